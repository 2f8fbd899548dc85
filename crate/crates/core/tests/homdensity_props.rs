use faer::Mat;
use graphon_core::experiments::trend_nonincreasing;
use graphon_core::homdensity::{
    cycle_density_graph, hom_density_graph, hom_density_graphon, DensityMethod, Motif,
};
use graphon_core::seed::{cell_rng, rng_from_seed};
use graphon_core::{
    discretize, graphon_eigs, induced_graphon, sample_graph, sample_latents, Graph, Graphon, LatentMode, SampleMode,
};
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1usize..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.0f64..=1.0, n * n).prop_map(move |raw| {
            Graph::new(Mat::from_fn(n, n, |i, j| if i == j { 0.0 } else { raw[i.min(j) * n + i.max(j)] })).unwrap()
        })
    })
}

/// Simple graphs on at most four vertices.
fn motif_strategy() -> impl Strategy<Value = Motif> {
    (1usize..=4).prop_flat_map(|v| {
        let pairs: Vec<(usize, usize)> = (0..v).flat_map(|i| ((i + 1)..v).map(move |j| (i, j))).collect();
        prop::collection::vec(any::<bool>(), pairs.len()).prop_map(move |keep| {
            let edges = pairs.iter().zip(&keep).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
            Motif::new(v, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_cycle_density_matches_trace(g in graph_strategy(9), k in 2usize..=5) {
        let brute = hom_density_graph(&Motif::cycle(k).unwrap(), &g).unwrap();
        let trace = cycle_density_graph(k, &g).unwrap();
        prop_assert!((brute - trace).abs() <= 1e-9);
    }

    #[test]
    fn graph_density_equals_induced_graphon_density(g in graph_strategy(10), f in motif_strategy()) {
        let direct = hom_density_graph(&f, &g).unwrap();
        let via = hom_density_graphon(&f, &induced_graphon(&g), DensityMethod::StepExact).unwrap();
        prop_assert_eq!(via.std_error, 0.0);
        prop_assert!((direct - via.value).abs() <= 1e-12);
    }

    #[test]
    fn monte_carlo_density_of_constant_graphon(p in 0.0f64..=1.0, f in motif_strategy(), seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let est = hom_density_graphon(&f, &Graphon::constant(p).unwrap(), DensityMethod::MonteCarlo { samples: 2000, rng: &mut rng }).unwrap();
        let exact = p.powi(f.edges().len() as i32);
        // A constant graphon has zero variance; the slack covers summation rounding.
        prop_assert!((est.value - exact).abs() <= 4.0 * est.std_error + 1e-12);
    }
}

#[test]
fn sampled_densities_converge_to_graphon_densities() {
    let w: Graphon = "exp:2.3".parse().unwrap();
    // Limits from a fine discretization: t(K2) is the grid mean of W and
    // t(C3) = Σλ³ of the grid operator.
    let res = 2000;
    let grid = discretize(&w, res).unwrap();
    let cells = grid.step_values().unwrap();
    let mass = (0..res).map(|j| cells.col_as_slice(j).iter().sum::<f64>()).sum::<f64>() / (res * res) as f64;
    let basis = graphon_eigs(&w, res, res).unwrap();
    let values = basis.spectrum().values();
    let limits = [
        ("K2", Motif::edge(), mass),
        ("C3", Motif::cycle(3).unwrap(), values.iter().map(|l| l.powi(3)).sum::<f64>()),
    ];
    let ns = [50usize, 100, 200, 400];
    let reps = 10;
    for (name, motif, limit) in limits {
        let gaps: Vec<f64> = ns
            .iter()
            .map(|&n| {
                (0..reps)
                    .map(|r| {
                        let mut rng = cell_rng(7, n as u64, r);
                        let labels = sample_latents(n, LatentMode::UniformIid, &mut rng).unwrap();
                        let g = sample_graph(&w, &labels, SampleMode::Bernoulli, &mut rng);
                        (hom_density_graph(&motif, &g).unwrap() - limit).abs()
                    })
                    .sum::<f64>()
                    / reps as f64
            })
            .collect();
        let check = trend_nonincreasing(&gaps, 0.10);
        assert!(check.holds, "{name}: {gaps:?} {:?}", check.violations);
    }
}
