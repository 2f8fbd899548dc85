use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use graphon_core::experiments::{self, ExperimentConfig, ExperimentKind, Statistic};
use graphon_core::filters::{apply_poly, apply_spectral_graph_filter, PolyFilter, SpectralFilterFn};
use graphon_core::homdensity::{hom_density_graph, hom_density_graphon, DensityMethod, Motif};
use graphon_core::io::{self, Table};
use graphon_core::movielens::{self, MovieConfig};
use graphon_core::plot;
use graphon_core::seed::rng_from_seed;
use graphon_core::{
    eigendecompose, graphon_eigs, sample_graph, sample_latents, Error, Graph, GraphSignal, Graphon, LatentMode,
    SampleMode,
};

use crate::{
    DensityArgs, ExperimentArgs, ExperimentName, FilterArgs, FilterMode, LatentArg, ModeArg, SampleArgs,
    SpectrumArgs,
};

/// Dataset location used by `experiment movie` when neither `--data` nor a
/// config path is given.
const DEFAULT_MOVIELENS: &str = "data/ml-100k/u.data";
const TREND_TOLERANCE: f64 = 0.10;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Usage(String),
    Trend(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Numeric(_) | Error::Budget(_) => 1,
                Error::MissingData { .. } => 3,
                Error::Io(io) if io.kind() != std::io::ErrorKind::NotFound => 1,
                _ => 2,
            },
            CliError::Usage(_) => 2,
            CliError::Trend(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Trend(m) => write!(f, "trend check failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

type CliResult = Result<(), CliError>;

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_graphon(desc: &str) -> Result<Graphon, CliError> {
    desc.parse::<Graphon>()
        .map_err(|e| CliError::Usage(format!("bad graphon descriptor {desc:?}: {e}")))
}

pub fn sample(a: SampleArgs) -> CliResult {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let w = parse_graphon(&a.graphon)?;
    let (mode, mode_name) = match a.mode {
        ModeArg::Bernoulli => (SampleMode::Bernoulli, "bernoulli"),
        ModeArg::Weighted => (SampleMode::Weighted, "weighted"),
    };
    let (latents, latents_name) = match a.latents {
        LatentArg::Uniform => (LatentMode::UniformIid, "uniform"),
        LatentArg::Grid => (LatentMode::RegularGrid, "grid"),
    };
    let mut rng = rng_from_seed(a.seed);
    let labels = sample_latents(a.n, latents, &mut rng)?;
    let g = sample_graph(&w, &labels, mode, &mut rng);
    fs::create_dir_all(&a.out)?;
    io::write_matrix_csv(&a.out.join("adjacency.csv"), g.shift())?;
    fs::write(a.out.join("labels.csv"), io::format_signal_csv(labels.values(), None))?;
    let mut snapshot = toml::Table::new();
    snapshot.insert("command".into(), "sample".into());
    snapshot.insert("graphon".into(), a.graphon.clone().into());
    snapshot.insert("n".into(), (a.n as i64).into());
    snapshot.insert("mode".into(), mode_name.into());
    snapshot.insert("latents".into(), latents_name.into());
    let seed = i64::try_from(a.seed).map_or_else(|_| toml::Value::String(a.seed.to_string()), toml::Value::Integer);
    snapshot.insert("seed".into(), seed);
    fs::write(a.out.join("config.toml"), toml::to_string(&snapshot).expect("table serializes"))?;
    println!("edge_density={}", g.edge_density());
    Ok(())
}

pub fn spectrum(a: SpectrumArgs) -> CliResult {
    let text = if let Some(path) = &a.graph {
        let g = io::read_graph(path)?;
        let basis = eigendecompose(&g)?;
        let n = g.n() as f64;
        let mut t = Table::new(&["index", "eigenvalue", "eigenvalue_over_n"])
            .with_meta("source", path.display())
            .with_meta("n", g.n());
        for j in basis.indices() {
            if a.k.is_some_and(|k| j.get().unsigned_abs() as usize > k) {
                continue;
            }
            let l = basis.eigenvalue(j).expect("listed index");
            t.push(vec![j.to_string(), l.to_string(), (l / n).to_string()]);
        }
        t.to_csv()
    } else {
        let desc = a.graphon.as_deref().expect("clap requires graph or graphon");
        let w = parse_graphon(desc)?;
        let k = a.k.unwrap_or(a.resolution).min(a.resolution);
        let basis = graphon_eigs(&w, a.resolution, k)?;
        let mut t = Table::new(&["index", "eigenvalue"])
            .with_meta("source", desc)
            .with_meta("resolution", a.resolution);
        for j in basis.indices() {
            t.push(vec![j.to_string(), basis.eigenvalue(j).expect("listed index").to_string()]);
        }
        t.to_csv()
    };
    write_or_print(a.out.as_deref(), &text)
}

fn read_signal(path: &Path, n: usize) -> Result<GraphSignal, CliError> {
    let (values, _) = io::read_signal_csv(path)?;
    if values.len() != n {
        return Err(CliError::Usage(format!("signal has {} values but the graph has {n} nodes", values.len())));
    }
    Ok(GraphSignal::new(values)?)
}

fn max_difference(a: &GraphSignal, b: &GraphSignal) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn filter(a: FilterArgs) -> CliResult {
    let g: Graph = io::read_graph(&a.graph)?;
    let x = read_signal(&a.signal, g.n())?;
    let taps = a.taps.clone().map(PolyFilter::new).transpose()?;
    let response = match (&a.filter, &a.filter_file) {
        (Some(desc), _) => Some(desc.parse::<SpectralFilterFn>()?),
        (None, Some(path)) => Some(fs::read_to_string(path)?.trim().parse::<SpectralFilterFn>()?),
        (None, None) => None,
    };
    if a.check && taps.is_none() {
        return Err(CliError::Usage("--check compares both modes and needs --taps".into()));
    }
    let mut meta: Vec<(&str, String)> = Vec::new();
    let y = match a.mode {
        FilterMode::Poly => {
            let f = taps
                .as_ref()
                .ok_or_else(|| CliError::Usage("--mode poly needs --taps".into()))?;
            if response.is_some() {
                return Err(CliError::Usage("--mode poly takes --taps, not a frequency response".into()));
            }
            meta.push(("mode", "poly".into()));
            meta.push(("normalization", "raw shift".into()));
            meta.push(("filter", PolyFilter::taps(f).iter().map(f64::to_string).collect::<Vec<_>>().join(" ")));
            apply_poly(&g, f, &x)?
        }
        FilterMode::Spectral => {
            let h = match (&response, &taps) {
                (Some(h), None) => h.clone(),
                (None, Some(f)) => SpectralFilterFn::from_graph_taps(f, g.n()),
                _ => return Err(CliError::Usage("--mode spectral needs exactly one of --taps, --filter, --filter-file".into())),
            };
            meta.push(("mode", "spectral".into()));
            meta.push(("normalization", "eigenvalue/n".into()));
            meta.push(("filter", h.to_string()));
            apply_spectral_graph_filter(&eigendecompose(&g)?, &h, &x)?
        }
    };
    if a.check {
        let f = taps.as_ref().expect("checked above");
        let other = match a.mode {
            FilterMode::Poly => {
                apply_spectral_graph_filter(&eigendecompose(&g)?, &SpectralFilterFn::from_graph_taps(f, g.n()), &x)?
            }
            FilterMode::Spectral => apply_poly(&g, f, &x)?,
        };
        let gap = max_difference(&y, &other);
        eprintln!("cross-mode max difference {gap:e}");
        meta.push(("cross_mode_max_difference", gap.to_string()));
    }
    let mut text = String::from(io::SCHEMA_LINE);
    text.push('\n');
    for (k, v) in &meta {
        text.push_str(&format!("# {k}={v}\n"));
    }
    text.push_str(&io::format_signal_csv(y.values(), None));
    write_or_print(a.out.as_deref(), &text)
}

fn parse_motif(desc: &str) -> Result<Motif, CliError> {
    if desc == "edge" {
        return Ok(Motif::edge());
    }
    if let Some((family, k)) = desc.split_once(':') {
        let k: usize = k
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("bad motif size in {desc:?}")))?;
        let motif = match family {
            "cycle" => Motif::cycle(k),
            "path" => Motif::path(k),
            "complete" => Motif::complete(k),
            "star" => Motif::star(k),
            _ => return Err(CliError::Usage(format!("unknown motif family {family:?}"))),
        };
        return Ok(motif?);
    }
    let path = Path::new(desc);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "motif {desc:?} is neither edge, cycle:K, path:K, complete:K, star:K nor a file"
        )));
    }
    Ok(Motif::parse(&fs::read_to_string(path)?)?)
}

pub fn density(a: DensityArgs) -> CliResult {
    let motif = parse_motif(&a.motif)?;
    let mut t = Table::new(&["motif", "value", "std_error"]).with_meta("method", "");
    let (value, std_error, method) = if let Some(path) = &a.graph {
        (hom_density_graph(&motif, &io::read_graph(path)?)?, 0.0, "exact")
    } else {
        let w = parse_graphon(a.graphon.as_deref().expect("clap requires graph or graphon"))?;
        if w.as_blocks().is_some() {
            let est = hom_density_graphon(&motif, &w, DensityMethod::StepExact)?;
            (est.value, est.std_error, "step_exact")
        } else {
            let mut rng = rng_from_seed(a.seed);
            let est = hom_density_graphon(
                &motif,
                &w,
                DensityMethod::MonteCarlo {
                    samples: a.samples,
                    rng: &mut rng,
                },
            )?;
            (est.value, est.std_error, "monte_carlo")
        }
    };
    t.meta[0].1 = method.into();
    t.push(vec![a.motif.clone(), value.to_string(), std_error.to_string()]);
    print!("{}", t.to_csv());
    Ok(())
}

/// Defaults overlaid with the keys of an optional TOML file.
fn merged_toml(defaults: &str, file: Option<&Path>, drop_key: Option<&str>) -> Result<String, CliError> {
    let mut table: toml::Table = defaults.parse().expect("defaults serialize to TOML");
    if let Some(path) = file {
        let text = fs::read_to_string(path)?;
        let mut overlay: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(key) = drop_key {
            overlay.remove(key);
        }
        for (k, v) in overlay {
            table.insert(k, v);
        }
    }
    Ok(toml::to_string(&table).expect("table serializes"))
}

fn kind_of(name: ExperimentName) -> Option<ExperimentKind> {
    match name {
        ExperimentName::Pollution => Some(ExperimentKind::Pollution),
        ExperimentName::Gmrf => Some(ExperimentKind::Gmrf),
        ExperimentName::Eigconv => Some(ExperimentKind::Eigconv),
        ExperimentName::Transfer => Some(ExperimentKind::Transfer),
        ExperimentName::Movie => None,
    }
}

pub fn experiment(a: ExperimentArgs) -> CliResult {
    if let Some(t) = a.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    match kind_of(a.name) {
        Some(kind) => run_graphon_experiment(kind, &a),
        None => run_movie(&a),
    }
}

fn usage_on_config(e: Error) -> CliError {
    match e {
        Error::Config(m) => CliError::Usage(m),
        other => CliError::Core(other),
    }
}

fn run_graphon_experiment(kind: ExperimentKind, a: &ExperimentArgs) -> CliResult {
    let defaults = ExperimentConfig::defaults(kind).to_toml();
    let mut cfg = ExperimentConfig::from_toml(&merged_toml(&defaults, a.config.as_deref(), None)?)
        .map_err(usage_on_config)?;
    if cfg.experiment != kind {
        return Err(CliError::Usage(format!(
            "config is for experiment {} but {} was requested",
            cfg.experiment, kind
        )));
    }
    if a.data.is_some() || a.synthetic || a.orders.is_some() || a.k_nn.is_some() || a.lambda_reg.is_some() || a.symmetrize.is_some() {
        return Err(CliError::Usage("--data, --synthetic, --orders, --k-nn, --lambda-reg and --symmetrize apply to movie only".into()));
    }
    if let Some(v) = &a.graphon {
        cfg.graphon = v.clone();
    }
    if let Some(v) = &a.n {
        cfg.n_list = v.clone();
    }
    if let Some(v) = a.reps {
        cfg.reps = v;
    }
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.resolution {
        cfg.resolution = v;
    }
    if let Some(v) = &a.filter {
        cfg.filter = Some(v.clone());
    }
    if let Some(v) = &a.indices {
        cfg.indices = v.clone();
    }
    if a.magnitude_sorted {
        cfg.alignment = experiments::Alignment::MagnitudeSorted;
    }
    if let Some(v) = a.sigma {
        cfg.sigma = v;
    }
    if a.a.is_some() {
        cfg.a = a.a;
    }
    cfg.validate().map_err(usage_on_config)?;

    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("config.toml"), cfg.to_toml())?;
    let reports = experiments::run(&cfg)?;
    let stat = if kind == ExperimentKind::Pollution {
        Statistic::Median
    } else {
        Statistic::Mean
    };
    let mut failures = Vec::new();
    for (name, report) in &reports {
        for path in report.write(&a.out, name)? {
            println!("{}", path.display());
        }
        if a.svg {
            let path = a.out.join(format!("{name}.svg"));
            fs::write(&path, plot::convergence_plot(report, stat).to_svg())?;
            println!("{}", path.display());
        }
        for (j, check) in report.check_trend(stat, TREND_TOLERANCE) {
            let label = j.map_or(name.clone(), |j| format!("{name} j={j}"));
            let verdict = if check.holds { "holds" } else { "violated" };
            eprintln!("trend {label}: {verdict} {:?}", check.violations);
            if !check.holds {
                failures.push(label);
            }
        }
    }
    trend_outcome(a.assert_trend, failures)
}

fn trend_outcome(assert: bool, failures: Vec<String>) -> CliResult {
    if assert && !failures.is_empty() {
        return Err(CliError::Trend(failures.join(", ")));
    }
    Ok(())
}

fn run_movie(a: &ExperimentArgs) -> CliResult {
    if a.graphon.is_some() || a.reps.is_some() || a.resolution.is_some() || a.filter.is_some() || a.indices.is_some() || a.sigma.is_some() || a.a.is_some() || a.magnitude_sorted {
        return Err(CliError::Usage("graphon experiment flags do not apply to movie".into()));
    }
    let defaults = MovieConfig::default().to_toml();
    let mut cfg = MovieConfig::from_toml(&merged_toml(&defaults, a.config.as_deref(), Some("experiment"))?)
        .map_err(usage_on_config)?;
    if a.synthetic {
        cfg.data = None;
    } else if let Some(path) = &a.data {
        cfg.data = Some(path.clone());
    } else if cfg.data.is_none() {
        cfg.data = Some(PathBuf::from(DEFAULT_MOVIELENS));
    }
    if let Some(v) = &a.n {
        cfg.n_list = v.clone();
    }
    if let Some(v) = &a.orders {
        cfg.taps = v.clone();
    }
    if let Some(v) = a.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = a.k_nn {
        cfg.k_nn = v;
    }
    if let Some(v) = a.lambda_reg {
        cfg.lambda_reg = v;
    }
    if let Some(v) = &a.symmetrize {
        cfg.symmetrize = v.parse().map_err(usage_on_config)?;
    }
    cfg.validate().map_err(usage_on_config)?;
    if let Some(path) = &cfg.data {
        if !path.exists() {
            return Err(CliError::Core(Error::MissingData {
                path: path.clone(),
                hint: movielens::FETCH_HINT.into(),
            }));
        }
    }

    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("config.toml"), format!("experiment = \"movie\"\n{}", cfg.to_toml()))?;
    let report = movielens::exp_movie(&cfg)?;
    let path = a.out.join("movie.csv");
    report.to_table().write(&path)?;
    println!("{}", path.display());
    if a.svg {
        let path = a.out.join("movie.svg");
        fs::write(&path, plot::movie_plot(&report).to_svg())?;
        println!("{}", path.display());
    }
    let mut failures = Vec::new();
    for (k, &order) in report.taps.iter().enumerate() {
        let check = movielens::trend(&report.relative[k]);
        let verdict = if check.holds { "holds" } else { "violated" };
        eprintln!("trend movie K={order}: {verdict} {:?}", check.violations);
        if !check.holds {
            failures.push(format!("movie K={order}"));
        }
    }
    trend_outcome(a.assert_trend, failures)
}
