//! End-to-end acceptance checks. Each test prints one `criterion N: PASS|FAIL`
//! line with the measured quantities before asserting.

use std::time::Instant;

use faer::Mat;
use graphon_core::experiments::{
    exp_eigconv_with_response, exp_filter_transfer, exp_gmrf, exp_pollution, run, ConvergenceReport,
    ExperimentConfig, ExperimentKind, Statistic, BALANCED_SBM,
};
use graphon_core::homdensity::{
    cut_norm_step, cycle_density_graph, hom_density_graph, l2_operator_norm, CutMode, Motif, StepKernel,
};
use graphon_core::movielens::{self, MovieConfig};
use graphon_core::seed::rng_from_seed;
use graphon_core::spectral::{bridge_check_refined, graphon_eigs};
use graphon_core::{eigendecompose, Graph, GraphSignal, Graphon};
use rand::Rng;

fn verdict(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

fn random_graph(n: usize, rng: &mut impl Rng) -> Graph {
    let mut s = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = rng.random();
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Graph::new(s).unwrap()
}

fn trend_line(report: &ConvergenceReport, stat: Statistic) -> String {
    report
        .indices()
        .into_iter()
        .map(|j| {
            let series: Vec<String> = report
                .series(j, stat)
                .into_iter()
                .map(|(n, v)| format!("{n}:{v:.4}"))
                .collect();
            match j {
                Some(j) => format!("j={j} [{}]", series.join(" ")),
                None => format!("[{}]", series.join(" ")),
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn trends_hold(report: &ConvergenceReport, stat: Statistic, tolerance: f64) -> bool {
    report.check_trend(stat, tolerance).iter().all(|(_, t)| t.holds)
}

#[test]
fn criterion_01_induced_graphon_bridge() {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst_eig: f64 = 0.0;
    let mut worst_coef: f64 = 0.0;
    let mut compared = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=64);
        let g = random_graph(n, &mut rng);
        let x = GraphSignal::new((0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap();
        // Refinement 1 diagonalizes the induced graphon on its own partition;
        // refinement 2 on a twice finer grid, an independent discretization.
        for refinement in [1, 2] {
            let r = bridge_check_refined(&g, &x, refinement).unwrap();
            worst_eig = worst_eig.max(r.max_eigenvalue_gap);
            worst_coef = worst_coef.max(r.max_wft_gap);
            compared += r.compared;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_eig <= 1e-10 && worst_coef <= 1e-10 && secs < 10.0;
    verdict(
        1,
        pass,
        &format!("max eigenvalue gap {worst_eig:.2e}, max coefficient gap {worst_coef:.2e}, {compared} pairs, {secs:.1}s"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_cycle_spectrum_identity() {
    let start = Instant::now();
    let mut rng = rng_from_seed(202);
    let mut worst: f64 = 0.0;
    let mut brute_checks = 0;
    for _ in 0..20 {
        let n = rng.random_range(2..=12);
        let g = random_graph(n, &mut rng);
        let basis = eigendecompose(&g).unwrap();
        let nf = n as f64;
        for k in 2..=5 {
            let trace = cycle_density_graph(k, &g).unwrap();
            let spectral: f64 = basis.spectrum().values().iter().map(|l| (l / nf).powi(k as i32)).sum();
            worst = worst.max((trace - spectral).abs());
            if let Ok(brute) = hom_density_graph(&Motif::cycle(k).unwrap(), &g) {
                worst = worst.max((brute - trace).abs()).max((brute - spectral).abs());
                brute_checks += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-9 && secs < 30.0;
    verdict(2, pass, &format!("max gap {worst:.2e}, {brute_checks} brute-force checks, {secs:.1}s"));
    assert!(pass);
}

#[test]
fn criterion_03_norm_sandwich() {
    let start = Instant::now();
    let mut rng = rng_from_seed(303);
    let mut failures = 0;
    let mut tightest_lower = f64::INFINITY;
    let mut tightest_upper = f64::INFINITY;
    for _ in 0..50 {
        let m = rng.random_range(1..=10);
        let mut values = Mat::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v: f64 = rng.random();
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        let w = Graphon::step(values).unwrap();
        let cut = cut_norm_step(&StepKernel::from_graphon(&w).unwrap(), CutMode::Exact).unwrap().value;
        // A 2m-cell grid refines the m blocks, so its spectrum is exact.
        let op = l2_operator_norm(&graphon_eigs(&w, 2 * m, 2 * m).unwrap());
        tightest_lower = tightest_lower.min(op - cut);
        tightest_upper = tightest_upper.min((8.0 * cut).sqrt() - op);
        if cut > op + 1e-12 || op > (8.0 * cut).sqrt() + 1e-12 {
            failures += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures == 0 && secs < 60.0;
    verdict(
        3,
        pass,
        &format!(
            "{failures} violations, min slack lower {tightest_lower:.3e} upper {tightest_upper:.3e}, {secs:.1}s"
        ),
    );
    assert!(pass);
}

fn eigconv_config(graphon: &str) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Eigconv);
    cfg.graphon = graphon.into();
    cfg.n_list = vec![50, 100, 200, 400];
    cfg.reps = 10;
    cfg.resolution = 4000;
    cfg.indices = vec![1, 2, 3];
    cfg
}

#[test]
fn criteria_04_05_eigenvalue_and_response_convergence() {
    let start = Instant::now();
    let mut pass4 = true;
    let mut pass5 = true;
    let mut detail4 = Vec::new();
    let mut detail5 = Vec::new();
    for graphon in ["exp:2.3", "er:0.4"] {
        let (eig, response) = exp_eigconv_with_response(&eigconv_config(graphon)).unwrap();
        let response = response.expect("a response filter is configured");
        let gap_400 = eig.series(Some(1), Statistic::Mean).last().unwrap().1;
        let response_400 = response.series(Some(1), Statistic::Mean).last().unwrap().1;
        pass4 &= trends_hold(&eig, Statistic::Mean, 0.10) && gap_400 < 0.02;
        pass5 &= response_400 < 0.02;
        detail4.push(format!("{graphon}: {}", trend_line(&eig, Statistic::Mean)));
        detail5.push(format!("{graphon}: j=1 response gap at n=400 {response_400:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass4 &= secs < 300.0;
    verdict(4, pass4, &format!("{}; {secs:.1}s", detail4.join(" | ")));
    verdict(5, pass5, &detail5.join(" | "));
    assert!(pass4 && pass5);
}

#[test]
fn criterion_06_pollution_gft_convergence() {
    let start = Instant::now();
    let report = exp_pollution(&ExperimentConfig::defaults(ExperimentKind::Pollution)).unwrap();
    let medians = report.series(None, Statistic::Median);
    let first = medians.first().unwrap().1;
    let last = medians.last().unwrap().1;
    let secs = start.elapsed().as_secs_f64();
    let pass = trends_hold(&report, Statistic::Median, 0.10) && last < 0.5 * first && secs < 300.0;
    verdict(
        6,
        pass,
        &format!("medians {}, last/first {:.3}, {secs:.1}s", trend_line(&report, Statistic::Median), last / first),
    );
    assert!(pass);
}

#[test]
fn criterion_07_gmrf_diffusion() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for graphon in ["er:0.4", BALANCED_SBM, "exp:2.3"] {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Gmrf);
        cfg.graphon = graphon.into();
        cfg.resolution = 2000;
        let report = exp_gmrf(&cfg).unwrap();
        pass &= trends_hold(&report, Statistic::Mean, 0.10);
        detail.push(format!("{graphon}: {}", trend_line(&report, Statistic::Mean)));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 600.0;
    verdict(7, pass, &format!("{}; {secs:.1}s", detail.join(" | ")));
    assert!(pass);
}

#[test]
fn criterion_08_filter_transfer_on_sbm() {
    let start = Instant::now();
    let cfg = ExperimentConfig::defaults(ExperimentKind::Transfer);
    let (output, subspace) = exp_filter_transfer(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = trends_hold(&output, Statistic::Mean, 0.10) && trends_hold(&subspace, Statistic::Mean, 0.10) && secs < 300.0;
    verdict(
        8,
        pass,
        &format!(
            "output {}; subspace {}; {secs:.1}s",
            trend_line(&output, Statistic::Mean),
            trend_line(&subspace, Statistic::Mean)
        ),
    );
    assert!(pass);
}

/// The real dataset when present, otherwise `None` for the synthetic fallback.
fn movielens_path() -> Option<std::path::PathBuf> {
    let path = std::env::var_os("MOVIELENS_DATA")
        .map(Into::into)
        .unwrap_or_else(|| std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ml-100k/u.data"));
    path.exists().then_some(path)
}

#[test]
fn criterion_09_movielens_transfer() {
    let start = Instant::now();
    let cfg = MovieConfig {
        data: movielens_path(),
        ..MovieConfig::default()
    };
    let real = cfg.data.is_some();
    let report = movielens::exp_movie(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let reference_base = [0.77, 0.72, 0.65];
    let mut pass = secs < 600.0;
    let mut detail = vec![format!("source {}", report.source)];
    for (k, &order) in report.taps.iter().enumerate() {
        let row = &report.relative[k];
        let trend = movielens::trend(row);
        let first = row[0];
        let last = *row.last().unwrap();
        let mut ok = trend.holds && last * 3.0 <= first;
        if real {
            ok &= (report.base_rmse[k] - reference_base[k]).abs() <= 0.15;
        }
        pass &= ok;
        let cells: Vec<String> = report.n_list.iter().zip(row).map(|(n, v)| format!("{n}:{:.4}", v)).collect();
        detail.push(format!("K={order} base {:.3} [{}]", report.base_rmse[k], cells.join(" ")));
    }
    if !real {
        detail.push("synthetic data, trend only".into());
    }
    verdict(9, pass, &format!("{}; {secs:.1}s", detail.join(" | ")));
    assert!(pass);
}

#[test]
fn criterion_10_determinism() {
    let mut configs = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.n_list = vec![10, 20];
        cfg.reps = 3;
        cfg.resolution = 60;
        configs.push(cfg);
    }
    let render = |threads: usize| -> Vec<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            configs
                .iter()
                .flat_map(|cfg| run(cfg).unwrap())
                .flat_map(|(_, r)| [r.to_table().to_csv(), r.summary_table().to_csv()])
                .collect()
        })
    };
    let a = render(1);
    let b = render(4);
    let c = render(4);
    let movie = MovieConfig {
        n_list: vec![50, 100],
        taps: vec![1],
        ..MovieConfig::default()
    };
    let movie_csv = |threads: usize| -> String {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| movielens::exp_movie(&movie).unwrap().to_csv())
    };
    let m1 = movie_csv(1);
    let m2 = movie_csv(4);
    let pass = a == b && b == c && m1 == m2;
    verdict(10, pass, &format!("{} CSVs compared across 1 and 4 threads, movie table on 1 and 4 threads", a.len()));
    assert!(pass);
}
