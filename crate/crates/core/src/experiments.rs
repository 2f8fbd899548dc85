//! Convergence experiments: GFT convergence of a sampled pollution field,
//! GMRF diffusion outputs, eigenvalue and frequency-response convergence, and
//! filter-output transfer from graphs to their graphon.
//!
//! Every experiment is a grid of independent `(n, rep)` cells. Each cell draws
//! from its own generator seeded by `derive_seed(master_seed, n, rep)`, cells
//! run in parallel, and records are collected in `(n, rep)` order, so results
//! do not depend on scheduling.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{apply_graphon_filter, apply_spectral_graph_filter, SpectralFilterFn};
use crate::graph::{eigendecompose, gft, Graph, GraphSignal, SignedIndex};
use crate::graphon::{block_index, grid_matrix, sample_graph, sample_latents, Graphon, LatentMode, SampleMode};
use crate::io::Table;
use crate::linalg;
use crate::seed::{derive_seed, rng_from_seed, Rng};
use crate::spectral::{
    aligned_coefficient_distance, graphon_eigenvalues, graphon_eigs, magnitude_sorted_distance,
    normalized_graph_eigenvalues, projection_distance, quad_dist, quad_norm, GraphonSignal,
};

/// The experiments run by [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Pollution,
    Gmrf,
    Eigconv,
    Transfer,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [Self::Pollution, Self::Gmrf, Self::Eigconv, Self::Transfer];

    pub fn name(self) -> &'static str {
        match self {
            Self::Pollution => "pollution",
            Self::Gmrf => "gmrf",
            Self::Eigconv => "eigconv",
            Self::Transfer => "transfer",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config(format!("unknown experiment {s:?}")))
    }
}

/// How two GFTs are matched before taking their difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Same signed index, sign chosen per coefficient.
    SignedIndex,
    /// Coefficient magnitudes sorted in decreasing order.
    MagnitudeSorted,
}

/// Parameters of one experiment run. Field defaults depend on the experiment;
/// see [`ExperimentConfig::defaults`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Graphon in the `family:params` mini-language.
    pub graphon: String,
    pub n_list: Vec<usize>,
    pub reps: usize,
    /// Grid resolution `N` for graphon-side computations.
    pub resolution: usize,
    pub master_seed: u64,
    pub sampling: SampleMode,
    pub latents: LatentMode,
    /// Spectral filter (eigconv, transfer).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    /// Spread of the pollution signal.
    pub sigma: f64,
    /// GMRF scale.
    pub a0: f64,
    /// GMRF diffusion coefficient; `None` selects `0.9 / λ_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Signed eigenvalue indices tracked by eigconv, or spanning the compared
    /// eigenspace in transfer.
    pub indices: Vec<i32>,
    pub alignment: Alignment,
}

pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_MASTER_SEED: u64 = 20_200_101;

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            graphon: String::new(),
            n_list: Vec::new(),
            reps: 10,
            resolution: crate::spectral::DEFAULT_RESOLUTION,
            master_seed: DEFAULT_MASTER_SEED,
            sampling: SampleMode::Bernoulli,
            latents: LatentMode::UniformIid,
            filter: None,
            sigma: DEFAULT_SIGMA,
            a0: 1.0,
            a: None,
            indices: vec![1, 2, 3],
            alignment: Alignment::SignedIndex,
        };
        match kind {
            ExperimentKind::Pollution => Self {
                graphon: "expabs:2.3".into(),
                n_list: vec![5, 10, 20, 50, 100, 200],
                reps: 50,
                ..base
            },
            ExperimentKind::Gmrf => Self {
                graphon: "er:0.4".into(),
                n_list: vec![50, 100, 200, 400, 800],
                ..base
            },
            ExperimentKind::Eigconv => Self {
                graphon: "exp:2.3".into(),
                n_list: vec![50, 100, 200, 400],
                filter: Some(DEFAULT_RESPONSE_FILTER.into()),
                ..base
            },
            ExperimentKind::Transfer => Self {
                graphon: BALANCED_SBM.into(),
                n_list: vec![100, 200, 400, 800],
                filter: Some("lowpass:0.2,0.1".into()),
                indices: vec![1, 2],
                ..base
            },
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::config("n_list is empty"));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("n_list must be strictly ascending"));
        }
        if self.n_list[0] < 2 {
            return Err(Error::config("graphs need at least 2 nodes"));
        }
        if self.reps == 0 {
            return Err(Error::config("reps must be >= 1"));
        }
        if self.resolution < 2 {
            return Err(Error::config("resolution must be >= 2"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::config("sigma must be positive"));
        }
        if !self.a0.is_finite() || self.a.is_some_and(|a| !a.is_finite()) {
            return Err(Error::config("GMRF parameters must be finite"));
        }
        for &j in &self.indices {
            SignedIndex::new(j).map_err(|_| Error::config("eigenvalue index 0 does not exist"))?;
        }
        self.graphon()?;
        self.filter_fn()?;
        Ok(())
    }

    pub fn graphon(&self) -> Result<Graphon> {
        self.graphon.parse()
    }

    pub fn filter_fn(&self) -> Result<Option<SpectralFilterFn>> {
        self.filter.as_deref().map(str::parse).transpose()
    }

    fn signed_indices(&self) -> Vec<SignedIndex> {
        self.indices.iter().map(|&j| SignedIndex::new(j).expect("validated")).collect()
    }
}

/// Piecewise-linear response with Lipschitz constant 1.
pub const DEFAULT_RESPONSE_FILTER: &str = "pwl:-1:0,0:0.1,0.5:0.6,1:1";
pub const BALANCED_SBM: &str = "sbm:0.5,1;0.8,0.2,0.2,0.8";

/// One metric value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    /// Eigenvalue index, for per-index metrics.
    pub index: Option<i32>,
    pub value: f64,
}

/// Statistics of the records sharing `(n, index)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub index: Option<i32>,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q68: f64,
    pub q95: f64,
    pub q997: f64,
}

/// Which statistic a trend is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    Mean,
    Median,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub metric: String,
    pub meta: Vec<(String, String)>,
    pub records: Vec<Record>,
}

/// Nearest-rank empirical quantile of sorted data: the `⌈q·m⌉`-th smallest.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    assert!(m > 0, "quantile of empty data");
    let rank = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[rank - 1]
}

impl ConvergenceReport {
    fn keys(&self) -> Vec<(usize, Option<i32>)> {
        let mut keys: Vec<(usize, Option<i32>)> = Vec::new();
        for r in &self.records {
            if !keys.contains(&(r.n, r.index)) {
                keys.push((r.n, r.index));
            }
        }
        keys
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        self.keys()
            .into_iter()
            .map(|(n, index)| {
                let values: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.n == n && r.index == index)
                    .map(|r| r.value)
                    .collect();
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                SummaryRow {
                    n,
                    index,
                    count: values.len(),
                    mean: values.iter().sum::<f64>() / values.len() as f64,
                    median: nearest_rank(&sorted, 0.5),
                    q68: nearest_rank(&sorted, 0.68),
                    q95: nearest_rank(&sorted, 0.95),
                    q997: nearest_rank(&sorted, 0.997),
                }
            })
            .collect()
    }

    /// Distinct indices in first-appearance order (`[None]` for scalar metrics).
    pub fn indices(&self) -> Vec<Option<i32>> {
        let mut out: Vec<Option<i32>> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.index) {
                out.push(r.index);
            }
        }
        out
    }

    /// `(n, statistic)` pairs for one index, in increasing `n`.
    pub fn series(&self, index: Option<i32>, stat: Statistic) -> Vec<(usize, f64)> {
        self.summary()
            .into_iter()
            .filter(|s| s.index == index)
            .map(|s| {
                (
                    s.n,
                    match stat {
                        Statistic::Mean => s.mean,
                        Statistic::Median => s.median,
                    },
                )
            })
            .collect()
    }

    fn has_index(&self) -> bool {
        self.records.iter().any(|r| r.index.is_some())
    }

    fn base_table(&self, header: &[&str]) -> Table {
        let mut t = Table::new(header)
            .with_meta("experiment", &self.experiment)
            .with_meta("metric", &self.metric);
        for (k, v) in &self.meta {
            t = t.with_meta(k, v);
        }
        t
    }

    /// Per-cell records: `n,rep,seed[,j],value`.
    pub fn to_table(&self) -> Table {
        let with_j = self.has_index();
        let header: &[&str] = if with_j {
            &["n", "rep", "seed", "j", "value"]
        } else {
            &["n", "rep", "seed", "value"]
        };
        let mut t = self.base_table(header);
        for r in &self.records {
            let mut row = vec![r.n.to_string(), r.rep.to_string(), r.seed.to_string()];
            if with_j {
                row.push(r.index.map_or(String::new(), |j| j.to_string()));
            }
            row.push(r.value.to_string());
            t.push(row);
        }
        t
    }

    /// Per-`(n, j)` statistics: `n[,j],count,mean,median,q68,q95,q997`.
    pub fn summary_table(&self) -> Table {
        let with_j = self.has_index();
        let header: &[&str] = if with_j {
            &["n", "j", "count", "mean", "median", "q68", "q95", "q997"]
        } else {
            &["n", "count", "mean", "median", "q68", "q95", "q997"]
        };
        let mut t = self.base_table(header);
        for s in self.summary() {
            let mut row = vec![s.n.to_string()];
            if with_j {
                row.push(s.index.map_or(String::new(), |j| j.to_string()));
            }
            for v in [s.mean, s.median, s.q68, s.q95, s.q997] {
                row.push(v.to_string());
            }
            row.insert(if with_j { 2 } else { 1 }, s.count.to_string());
            t.push(row);
        }
        t
    }

    /// Writes `<stem>.csv` and `<stem>_summary.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        let records = dir.join(format!("{stem}.csv"));
        let summary = dir.join(format!("{stem}_summary.csv"));
        self.to_table().write(&records)?;
        self.summary_table().write(&summary)?;
        Ok(vec![records, summary])
    }

    /// Trend check on every index series.
    pub fn check_trend(&self, stat: Statistic, max_relative_violation: f64) -> Vec<(Option<i32>, TrendCheck)> {
        self.indices()
            .into_iter()
            .map(|j| {
                let values: Vec<f64> = self.series(j, stat).into_iter().map(|(_, v)| v).collect();
                (j, trend_nonincreasing(&values, max_relative_violation))
            })
            .collect()
    }
}

/// Outcome of a monotonicity check.
#[derive(Debug, Clone, PartialEq)]
pub struct TrendCheck {
    pub holds: bool,
    /// `(position, relative increase)` for each step `values[i] → values[i+1]`
    /// that goes up.
    pub violations: Vec<(usize, f64)>,
}

/// Nonincreasing up to a single increase of at most `max_relative_violation`
/// (relative to the preceding value).
pub fn trend_nonincreasing(values: &[f64], max_relative_violation: f64) -> TrendCheck {
    let violations: Vec<(usize, f64)> = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0])
        .map(|(i, w)| (i, if w[0] > 0.0 { (w[1] - w[0]) / w[0] } else { f64::INFINITY }))
        .collect();
    let holds = match violations.as_slice() {
        [] => true,
        [(_, rel)] => *rel <= max_relative_violation,
        _ => false,
    };
    TrendCheck { holds, violations }
}

/// A cell's output: `(series, index, value)`. Experiments with several
/// metrics tag each value with a series number.
type CellValues = Vec<(usize, Option<i32>, f64)>;

/// Runs `cell(n, rep, rng)` over the whole grid in parallel and returns the
/// records of each series in `(n, rep)` order.
fn run_cells<F>(cfg: &ExperimentConfig, series: usize, cell: F) -> Result<Vec<Vec<Record>>>
where
    F: Fn(usize, usize, &mut Rng) -> Result<CellValues> + Sync,
{
    let cells: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |rep| (n, rep)))
        .collect();
    let results: Vec<Result<(u64, CellValues)>> = cells
        .par_iter()
        .map(|&(n, rep)| {
            let seed = derive_seed(cfg.master_seed, n as u64, rep as u64);
            let mut rng = rng_from_seed(seed);
            Ok((seed, cell(n, rep, &mut rng)?))
        })
        .collect();
    let mut out = vec![Vec::new(); series];
    for (&(n, rep), result) in cells.iter().zip(results) {
        let (seed, values) = result?;
        for (k, index, value) in values {
            out[k].push(Record {
                n,
                rep,
                seed,
                index,
                value,
            });
        }
    }
    Ok(out)
}

/// Seed for graphon-side draws shared by all `n` of one repetition. Cell
/// seeds never use `n = 0`.
fn shared_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, 0, rep as u64)
}

fn report(cfg: &ExperimentConfig, metric: &str, records: Vec<Record>) -> ConvergenceReport {
    ConvergenceReport {
        experiment: cfg.experiment.name().into(),
        metric: metric.into(),
        meta: vec![
            ("graphon".into(), cfg.graphon.clone()),
            ("master_seed".into(), cfg.master_seed.to_string()),
        ],
        records,
    }
}

fn sample(cfg: &ExperimentConfig, w: &Graphon, n: usize, rng: &mut Rng) -> Result<(Vec<f64>, Graph)> {
    let labels = sample_latents(n, cfg.latents, rng)?;
    let g = sample_graph(w, &labels, cfg.sampling, rng);
    Ok((labels.values().to_vec(), g))
}

/// Sorted-label sample: node `i` then sits in cell `i` of the regular
/// partition, which aligns the induced step objects with the graphon.
fn sample_sorted(cfg: &ExperimentConfig, w: &Graphon, n: usize, rng: &mut Rng) -> Result<(Vec<f64>, Graph)> {
    let labels = sample_latents(n, cfg.latents, rng)?.sorted();
    let g = sample_graph(w, &labels, cfg.sampling, rng);
    Ok((labels.values().to_vec(), g))
}

/// Pollutant concentration `exp(−u²/(2σ²))` at distance `u` from the source.
pub fn pollution_signal(u: f64, sigma: f64) -> f64 {
    (-u * u / (2.0 * sigma * sigma)).exp()
}

/// Normalized difference `‖ŝ_1 − ŝ_2‖ / ‖ŝ_1‖` between the GFTs of the
/// pollution field sampled on two graphs.
pub fn pollution_metric(
    first: (&Graph, &[f64]),
    second: (&Graph, &[f64]),
    sigma: f64,
    alignment: Alignment,
) -> Result<f64> {
    let transform = |(g, labels): (&Graph, &[f64])| -> Result<_> {
        let x = GraphSignal::new(labels.iter().map(|&u| pollution_signal(u, sigma)).collect())?;
        gft(&eigendecompose(g)?, &x)
    };
    let (a, b) = (transform(first)?, transform(second)?);
    let scale = a.energy().sqrt();
    if scale == 0.0 {
        return Err(Error::Numeric("reference GFT vanishes".into()));
    }
    let d = match alignment {
        Alignment::SignedIndex => aligned_coefficient_distance(&a, &b),
        Alignment::MagnitudeSorted => magnitude_sorted_distance(&a, &b),
    };
    Ok(d / scale)
}

/// GFT convergence: two independent graphs per cell, same pollution field.
pub fn exp_pollution(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let w = cfg.graphon()?;
    let mut records = run_cells(cfg, 1, |n, _, rng| {
        let (l1, g1) = sample(cfg, &w, n, rng)?;
        let (l2, g2) = sample(cfg, &w, n, rng)?;
        Ok(vec![(0, None, pollution_metric((&g1, &l1), (&g2, &l2), cfg.sigma, cfg.alignment)?)])
    })?;
    Ok(report(cfg, "normalized_gft_difference", records.remove(0)))
}

/// `Σ = a0² (I − aS)^{-1} (I − aS)^{-T}` for a symmetric shift `S`.
pub fn gmrf_covariance(s: &Mat<f64>, a0: f64, a: f64) -> Result<Mat<f64>> {
    let n = s.nrows();
    Error::check_dim(n, s.ncols())?;
    if !linalg::is_symmetric(s.as_ref()) {
        return Err(Error::validation("GMRF shift must be symmetric"));
    }
    let rho = linalg::spectral_radius(s)?;
    if a.abs() * rho >= 1.0 {
        return Err(Error::Numeric(format!(
            "|a| * max|λ(S)| = {} >= 1: I - aS may be singular",
            a.abs() * rho
        )));
    }
    let m = Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - a * s[(i, j)]);
    let inv = m.partial_piv_lu().inverse();
    let prod: Mat<f64> = &inv * inv.transpose();
    let scale = a0 * a0;
    Ok(Mat::from_fn(n, n, |i, j| scale * 0.5 * (prod[(i, j)] + prod[(j, i)])))
}

/// `0.9 / max|λ(S)|`, the default diffusion coefficient (0 for `S = 0`).
pub fn default_diffusion(s: &Mat<f64>) -> Result<f64> {
    let rho = linalg::spectral_radius(s)?;
    Ok(if rho > 0.0 { 0.9 / rho } else { 0.0 })
}

/// Zero-mean Gaussian sampler `x = L z` with `Σ = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    factor: Mat<f64>,
}

impl GaussianSampler {
    /// Uses a Cholesky factor, falling back to a symmetric square root for
    /// semidefinite covariances.
    pub fn new(cov: &Mat<f64>) -> Result<Self> {
        let n = cov.nrows();
        Error::check_dim(n, cov.ncols())?;
        if !linalg::is_symmetric(cov.as_ref()) {
            return Err(Error::validation("covariance must be symmetric"));
        }
        if let Ok(llt) = cov.llt(Side::Lower) {
            return Ok(Self {
                factor: llt.L().to_owned(),
            });
        }
        let (values, vectors) = linalg::sym_eigen(cov)?;
        let tol = 1e-10 * values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if values.iter().any(|&v| v < -tol) {
            return Err(Error::Numeric("covariance is not positive semidefinite".into()));
        }
        let roots: Vec<f64> = values.iter().map(|v| v.max(0.0).sqrt()).collect();
        Ok(Self {
            factor: Mat::from_fn(n, n, |i, j| vectors[(i, j)] * roots[j]),
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        linalg::matvec(self.factor.as_ref(), &z)
    }
}

/// One draw from `N(0, Σ)`.
pub fn gmrf_sample(cov: &Mat<f64>, rng: &mut Rng) -> Result<Vec<f64>> {
    Ok(GaussianSampler::new(cov)?.sample(rng))
}

/// Nearest-cell reading of grid values at arbitrary points.
fn at_labels(grid: &[f64], labels: &[f64]) -> Vec<f64> {
    labels.iter().map(|&u| grid[block_index(u, grid.len())]).collect()
}

/// Diffusion of a graphon GMRF: `‖S_n x_n / n − y_W(labels)‖ / ‖y_W(labels)‖`
/// with `y_W = (S_W/N) x_W` and `x_n` read from `x_W` at the labels. One
/// graphon draw per repetition is shared by all `n`.
pub fn exp_gmrf(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let w = cfg.graphon()?;
    let big_n = cfg.resolution;
    let grid = grid_matrix(&w, big_n);
    let shift = Mat::from_fn(big_n, big_n, |i, j| grid[(i, j)] / big_n as f64);
    let a = match cfg.a {
        Some(a) => a,
        None => default_diffusion(&shift)?,
    };
    let sampler = GaussianSampler::new(&gmrf_covariance(&shift, cfg.a0, a)?)?;
    let draws: Vec<(Vec<f64>, Vec<f64>)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let x = sampler.sample(&mut rng_from_seed(shared_seed(cfg.master_seed, rep)));
            let y = linalg::sym_matvec(&shift, &x);
            (x, y)
        })
        .collect();
    let mut records = run_cells(cfg, 1, |n, rep, rng| {
        let (x_w, y_w) = &draws[rep];
        let (labels, g) = sample(cfg, &w, n, rng)?;
        let x_n = at_labels(x_w, &labels);
        let y_n: Vec<f64> = linalg::sym_matvec(g.shift(), &x_n).iter().map(|v| v / n as f64).collect();
        let y_ref = at_labels(y_w, &labels);
        let scale = linalg::norm(&y_ref);
        let metric = if scale > 0.0 { linalg::dist(&y_n, &y_ref) / scale } else { linalg::norm(&y_n) };
        Ok(vec![(0, None, metric)])
    })?;
    let mut rep = report(cfg, "normalized_output_difference", records.remove(0));
    rep.meta.push(("a".into(), a.to_string()));
    rep.meta.push(("a0".into(), cfg.a0.to_string()));
    rep.meta.push(("resolution".into(), big_n.to_string()));
    Ok(rep)
}

/// Eigenvalue convergence `|λ_j(S_n)/n − λ_j(T_W)|` per tracked index, plus
/// the frequency-response gap `|h(λ_j(S_n)/n) − h(λ_j(T_W))|` when a filter is
/// configured. The reference spectrum comes from the grid operator at the
/// configured resolution.
pub fn exp_eigconv_with_response(cfg: &ExperimentConfig) -> Result<(ConvergenceReport, Option<ConvergenceReport>)> {
    cfg.validate()?;
    let w = cfg.graphon()?;
    let h = cfg.filter_fn()?;
    let reference = graphon_eigenvalues(&w, cfg.resolution)?;
    let indices = cfg.signed_indices();
    let mut records = run_cells(cfg, 2, |n, _, rng| {
        let (_, g) = sample(cfg, &w, n, rng)?;
        let graph = normalized_graph_eigenvalues(&g)?;
        let mut out = Vec::with_capacity(2 * indices.len());
        for &j in &indices {
            let (lg, lw) = (graph.get_or_zero(j), reference.get_or_zero(j));
            out.push((0, Some(j.get()), (lg - lw).abs()));
            if let Some(h) = &h {
                let gap = h.eval(lg.clamp(-1.0, 1.0)) - h.eval(lw.clamp(-1.0, 1.0));
                out.push((1, Some(j.get()), gap.abs()));
            }
        }
        Ok(out)
    })?;
    let response = records.pop().expect("two series");
    let mut eig_report = report(cfg, "eigenvalue_gap", records.pop().expect("two series"));
    eig_report.meta.push(("resolution".into(), cfg.resolution.to_string()));
    let response_report = h.map(|h| {
        let mut r = report(cfg, "frequency_response_gap", response);
        r.meta.push(("filter".into(), h.to_string()));
        r.meta.push(("resolution".into(), cfg.resolution.to_string()));
        r
    });
    Ok((eig_report, response_report))
}

pub fn exp_eigconv(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    Ok(exp_eigconv_with_response(cfg)?.0)
}

/// Filter transfer: the induced graph filter output against the graphon filter
/// output (relative L² distance), and the projection distance between the
/// graph and graphon eigenspaces spanned by the configured indices.
pub fn exp_filter_transfer(cfg: &ExperimentConfig) -> Result<(ConvergenceReport, ConvergenceReport)> {
    cfg.validate()?;
    let w = cfg.graphon()?;
    let h = cfg
        .filter_fn()?
        .ok_or_else(|| Error::config("the transfer experiment needs a filter"))?;
    let big_n = cfg.resolution;
    let basis = graphon_eigs(&w, big_n, big_n)?;
    let sigma = cfg.sigma;
    let phi = GraphonSignal::closed_form("pollution", move |u| pollution_signal(u, sigma));
    let target = apply_graphon_filter(&basis, &h, &phi)?.resample(big_n);
    let target_norm = quad_norm(&target);
    let indices = cfg.signed_indices();
    let graphon_space = indices
        .iter()
        .map(|&j| {
            basis
                .eigenfunction(j)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| Error::domain(format!("graphon basis has no eigenfunction {j}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records = run_cells(cfg, 2, |n, _, rng| {
        let (labels, g) = sample_sorted(cfg, &w, n, rng)?;
        let gb = eigendecompose(&g)?;
        let x = GraphSignal::new(phi.sample_at(&labels))?;
        let y = apply_spectral_graph_filter(&gb, &h, &x)?;
        let induced = GraphonSignal::grid(y.into_values())?.resample(big_n);
        let output = if target_norm > 0.0 {
            quad_dist(&induced, &target) / target_norm
        } else {
            quad_norm(&induced)
        };
        let mut graph_space = Vec::with_capacity(indices.len());
        for &j in &indices {
            match gb.eigenvector(j) {
                Some(v) => graph_space.push(GraphonSignal::grid(v.to_vec())?.resample(big_n)),
                None => break,
            }
        }
        let subspace = projection_distance(&graph_space, &graphon_space)?;
        Ok(vec![(0, None, output), (1, None, subspace)])
    })?;
    let mut subspace = report(cfg, "subspace_projection_distance", records.pop().expect("two series"));
    let mut output = report(cfg, "relative_output_difference", records.pop().expect("two series"));
    for r in [&mut output, &mut subspace] {
        r.meta.push(("filter".into(), h.to_string()));
        r.meta.push(("resolution".into(), big_n.to_string()));
    }
    subspace.meta.push(("indices".into(), format!("{:?}", cfg.indices)));
    Ok((output, subspace))
}

/// Output of [`run`]: named reports.
pub type ReportSet = Vec<(String, ConvergenceReport)>;

/// Runs the configured experiment and names its reports.
pub fn run(cfg: &ExperimentConfig) -> Result<ReportSet> {
    let name = cfg.experiment.name();
    Ok(match cfg.experiment {
        ExperimentKind::Pollution => vec![(name.into(), exp_pollution(cfg)?)],
        ExperimentKind::Gmrf => vec![(name.into(), exp_gmrf(cfg)?)],
        ExperimentKind::Eigconv => {
            let (eig, response) = exp_eigconv_with_response(cfg)?;
            let mut out = vec![(name.to_string(), eig)];
            if let Some(r) = response {
                out.push(("freq_response".into(), r));
            }
            out
        }
        ExperimentKind::Transfer => {
            let (output, subspace) = exp_filter_transfer(cfg)?;
            vec![(name.into(), output), ("transfer_subspace".into(), subspace)]
        }
    })
}
