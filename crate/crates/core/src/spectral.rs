//! Graphon operator spectra, the graphon Fourier transform (WFT) and
//! eigenspace projections.
//!
//! Graphon operators are diagonalized on a regular grid of `N` cells: the grid
//! matrix `M` of midpoint samples yields eigenvalues `λ_j(M)/N` and
//! piecewise-constant eigenfunctions `φ_j = √N · v_j` (cell values). Inner
//! products use the quadrature rule `⟨f,g⟩ = (1/N) Σ f_i g_i`, which is exact
//! for step functions on the grid. For a step graphon with `n` blocks sampled
//! at `N = n` this reproduces the operator spectrum exactly.

use std::fmt;
use std::sync::Arc;

use faer::Mat;

use crate::error::{Error, Result};
use crate::graph::{
    eigendecompose, gft, signed_order, Coefficients, Graph, GraphSignal, SignedIndex, SignedSpectrum,
};
use crate::graphon::{block_index, grid_matrix, induced_graphon, Graphon};
use crate::linalg;

/// Default grid resolution for graphon spectra.
pub const DEFAULT_RESOLUTION: usize = 2000;
/// Default number of eigenpairs kept per sign.
pub const DEFAULT_K_KEPT: usize = 20;

/// Eigenpairs of a discretized graphon operator.
#[derive(Debug, Clone)]
pub struct GraphonBasis {
    resolution: usize,
    k_kept: usize,
    spectrum: SignedSpectrum,
}

impl GraphonBasis {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn k_kept(&self) -> usize {
        self.k_kept
    }

    pub fn spectrum(&self) -> &SignedSpectrum {
        &self.spectrum
    }

    pub fn eigenvalue(&self, j: SignedIndex) -> Option<f64> {
        self.spectrum.eigenvalue(j)
    }

    /// Cell values of `φ_j`.
    pub fn eigenfunction(&self, j: SignedIndex) -> Option<&[f64]> {
        self.spectrum.vector(j)
    }

    pub fn indices(&self) -> impl Iterator<Item = SignedIndex> + '_ {
        self.spectrum.indices()
    }

    fn weight(&self) -> f64 {
        1.0 / self.resolution as f64
    }
}

/// Diagonalizes `W` on an `N`-cell grid, keeping `k` eigenpairs per sign.
pub fn graphon_eigs(w: &Graphon, resolution: usize, k: usize) -> Result<GraphonBasis> {
    if resolution < 2 {
        return Err(Error::domain(format!("resolution must be >= 2, got {resolution}")));
    }
    if k == 0 || k > resolution {
        return Err(Error::domain(format!(
            "cannot keep {k} eigenpairs per sign at resolution {resolution}"
        )));
    }
    let m = grid_matrix(w, resolution);
    let (values, vectors) = linalg::sym_eigen(&m)?;
    let scale = resolution as f64;
    let root = scale.sqrt();
    let spectrum = signed_order(values, vectors)
        .truncate(k)
        .map_values(|v| v / scale)
        .map_vectors(|v| v * root);
    Ok(GraphonBasis {
        resolution,
        k_kept: k,
        spectrum,
    })
}

/// Signed-index eigenvalues without eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedEigenvalues {
    /// `λ_1 ≥ λ_2 ≥ … ≥ 0`.
    pub positive: Vec<f64>,
    /// `λ_{-1}, λ_{-2}, …` (most negative first).
    pub negative: Vec<f64>,
}

impl SignedEigenvalues {
    pub(crate) fn from_ascending(mut values: Vec<f64>, n: usize) -> Self {
        let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let tol = 16.0 * n.max(1) as f64 * f64::EPSILON * scale;
        for v in &mut values {
            if v.abs() <= tol {
                *v = 0.0;
            }
        }
        let split = values.partition_point(|v| *v < 0.0);
        let negative = values[..split].to_vec();
        let mut positive = values[split..].to_vec();
        positive.reverse();
        Self { positive, negative }
    }

    pub fn get(&self, j: SignedIndex) -> Option<f64> {
        let k = j.get().unsigned_abs() as usize - 1;
        if j.is_positive() {
            self.positive.get(k).copied()
        } else {
            self.negative.get(k).copied()
        }
    }

    /// Eigenvalue at `j`, or 0 when the index is beyond the stored spectrum
    /// (the operator's remaining eigenvalues accumulate at zero).
    pub fn get_or_zero(&self, j: SignedIndex) -> f64 {
        self.get(j).unwrap_or(0.0)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.positive.iter_mut().for_each(|v| *v *= factor);
        self.negative.iter_mut().for_each(|v| *v *= factor);
        self
    }
}

/// Operator eigenvalues `λ_j(M)/N` of `W` on an `N`-cell grid (no eigenfunctions).
pub fn graphon_eigenvalues(w: &Graphon, resolution: usize) -> Result<SignedEigenvalues> {
    if resolution < 2 {
        return Err(Error::domain(format!("resolution must be >= 2, got {resolution}")));
    }
    let m = grid_matrix(w, resolution);
    let vals = linalg::sym_eigenvalues(&m)?;
    Ok(SignedEigenvalues::from_ascending(vals, resolution).scaled(1.0 / resolution as f64))
}

/// Normalized graph eigenvalues `λ_j(S)/n` (no eigenvectors).
pub fn normalized_graph_eigenvalues(g: &Graph) -> Result<SignedEigenvalues> {
    let vals = linalg::sym_eigenvalues(g.shift())?;
    Ok(SignedEigenvalues::from_ascending(vals, g.n()).scaled(1.0 / g.n() as f64))
}

/// A signal on `[0,1]`.
#[derive(Clone)]
pub enum GraphonSignal {
    ClosedForm {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    /// Piecewise constant on the regular partition into `values.len()` cells.
    Grid(Vec<f64>),
}

impl fmt::Debug for GraphonSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphonSignal::ClosedForm { name, .. } => write!(f, "ClosedForm({name})"),
            GraphonSignal::Grid(v) => write!(f, "Grid(len={})", v.len()),
        }
    }
}

impl GraphonSignal {
    pub fn closed_form(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GraphonSignal::ClosedForm {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn grid(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("grid signal is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("grid signal has non-finite entries"));
        }
        Ok(GraphonSignal::Grid(values))
    }

    pub fn zeros(resolution: usize) -> Self {
        GraphonSignal::Grid(vec![0.0; resolution])
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            GraphonSignal::ClosedForm { f, .. } => f(u),
            GraphonSignal::Grid(v) => v[block_index(u.clamp(0.0, 1.0), v.len())],
        }
    }

    /// Grid resolution, if this is a grid signal.
    pub fn resolution(&self) -> Option<usize> {
        match self {
            GraphonSignal::Grid(v) => Some(v.len()),
            GraphonSignal::ClosedForm { .. } => None,
        }
    }

    pub fn grid_values(&self) -> Option<&[f64]> {
        match self {
            GraphonSignal::Grid(v) => Some(v),
            GraphonSignal::ClosedForm { .. } => None,
        }
    }

    /// Values at the midpoints of an `N`-cell grid. Grid signals of another
    /// resolution are read with nearest-cell (step) semantics.
    pub fn resample(&self, resolution: usize) -> Vec<f64> {
        match self {
            GraphonSignal::Grid(v) if v.len() == resolution => v.clone(),
            _ => (0..resolution)
                .map(|i| self.eval((i as f64 + 0.5) / resolution as f64))
                .collect(),
        }
    }

    /// Samples at arbitrary points of `[0,1]`.
    pub fn sample_at(&self, points: &[f64]) -> Vec<f64> {
        points.iter().map(|&u| self.eval(u)).collect()
    }

    /// Quadrature L² norm; closed forms are sampled at `fallback_resolution`.
    pub fn norm(&self, fallback_resolution: usize) -> f64 {
        let v = match self {
            GraphonSignal::Grid(v) => return quad_norm(v),
            GraphonSignal::ClosedForm { .. } => self.resample(fallback_resolution),
        };
        quad_norm(&v)
    }

    fn values_for(&self, resolution: usize) -> Result<Vec<f64>> {
        match self {
            GraphonSignal::Grid(v) => {
                Error::check_dim(resolution, v.len())?;
                Ok(v.clone())
            }
            GraphonSignal::ClosedForm { .. } => Ok(self.resample(resolution)),
        }
    }
}

/// `sqrt((1/N) Σ v_i²)`.
pub fn quad_norm(v: &[f64]) -> f64 {
    (linalg::dot(v, v) / v.len() as f64).sqrt()
}

/// Quadrature L² distance between two grid vectors of equal length.
pub fn quad_dist(a: &[f64], b: &[f64]) -> f64 {
    linalg::dist(a, b) / (a.len() as f64).sqrt()
}

/// Graphon Fourier transform `φ̂_j = ⟨φ, φ_j⟩` over the retained indices.
pub fn wft(basis: &GraphonBasis, phi: &GraphonSignal) -> Result<Coefficients> {
    let values = phi.values_for(basis.resolution)?;
    Ok(basis.spectrum.project(&values, basis.weight()))
}

/// WFT plus the energy of `φ` outside the retained eigenfunctions,
/// `‖φ‖² − Σ_j φ̂_j²` (clamped at zero).
pub fn wft_with_residual(basis: &GraphonBasis, phi: &GraphonSignal) -> Result<(Coefficients, f64)> {
    let values = phi.values_for(basis.resolution)?;
    let coeffs = basis.spectrum.project(&values, basis.weight());
    let total = linalg::dot(&values, &values) * basis.weight();
    Ok((coeffs.clone(), (total - coeffs.energy()).max(0.0)))
}

/// Inverse WFT `φ = Σ_j φ̂_j φ_j` on the basis grid.
pub fn iwft(basis: &GraphonBasis, coeffs: &Coefficients) -> Result<GraphonSignal> {
    Ok(GraphonSignal::Grid(basis.spectrum.synthesize(coeffs)?))
}

/// Step signal with value `x_ℓ` on block `I_ℓ`.
pub fn induced_signal(g: &Graph, x: &GraphSignal) -> Result<GraphonSignal> {
    Error::check_dim(g.n(), x.len())?;
    GraphonSignal::grid(x.values().to_vec())
}

/// Result of comparing a graph with its induced graphon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeReport {
    /// `max_j |λ_j(T_{W_G}) − λ_j(S)/n|`.
    pub max_eigenvalue_gap: f64,
    /// `max_j |[φ̂_G]_j − [x̂]_j/√n|`.
    pub max_wft_gap: f64,
    /// Number of signed indices compared.
    pub compared: usize,
}

/// Checks the exact correspondence between a graph and its induced graphon:
/// eigenvalues scale by `1/n` and WFT coefficients of the induced signal are
/// the GFT coefficients scaled by `1/√n`. The induced graphon is diagonalized
/// on the `n`-cell grid.
pub fn bridge_check(g: &Graph, x: &GraphSignal) -> Result<BridgeReport> {
    bridge_check_refined(g, x, 1)
}

/// Same as [`bridge_check`] with the induced graphon diagonalized on a
/// grid refined by `refinement` cells per block. Refining adds zero
/// eigenvalues whose eigenfunctions are not identifiable, so for
/// `refinement > 1` only indices with `|λ_j(S)| > 1e-9·‖S‖` and an eigengap
/// above 1e-6 (relative) are compared.
pub fn bridge_check_refined(g: &Graph, x: &GraphSignal, refinement: usize) -> Result<BridgeReport> {
    if refinement == 0 {
        return Err(Error::domain("refinement must be >= 1"));
    }
    let n = g.n();
    let graph_basis = eigendecompose(g)?;
    let xhat = gft(&graph_basis, x)?;
    let resolution = (n * refinement).max(2);
    let refined = resolution != n;
    let graphon_basis = graphon_eigs(&induced_graphon(g), resolution, resolution)?;
    let induced = GraphonSignal::Grid(induced_signal(g, x)?.resample(resolution));
    let phihat = wft(&graphon_basis, &induced)?;

    let spectrum = graph_basis.spectrum();
    let scale = spectrum.values().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let nf = n as f64;
    let mut report = BridgeReport {
        max_eigenvalue_gap: 0.0,
        max_wft_gap: 0.0,
        compared: 0,
    };
    for (c, j) in spectrum.indices().enumerate() {
        let lambda = spectrum.values()[c];
        if refined {
            let isolated = spectrum
                .values()
                .iter()
                .enumerate()
                .all(|(o, v)| o == c || (v - lambda).abs() > 1e-6 * scale.max(1.0));
            if lambda.abs() <= 1e-9 * scale.max(1.0) || !isolated {
                continue;
            }
        }
        let graphon_lambda = graphon_basis.eigenvalue(j);
        let graphon_coeff = phihat.get(j);
        let (Some(gl), Some(gc)) = (graphon_lambda, graphon_coeff) else {
            report.max_eigenvalue_gap = f64::INFINITY;
            report.max_wft_gap = f64::INFINITY;
            continue;
        };
        report.max_eigenvalue_gap = report.max_eigenvalue_gap.max((gl - lambda / nf).abs());
        let xj = xhat.get(j).expect("graph basis index");
        report.max_wft_gap = report.max_wft_gap.max((gc - xj / nf.sqrt()).abs());
        report.compared += 1;
    }
    Ok(report)
}

/// Projection of `φ` onto the span of the eigenfunctions in `cluster`.
pub fn subspace_project(basis: &GraphonBasis, cluster: &[SignedIndex], phi: &GraphonSignal) -> Result<GraphonSignal> {
    let coeffs = wft(basis, phi)?;
    let mut kept = Coefficients::zeros_like(basis.spectrum());
    for &j in cluster {
        let value = coeffs
            .get(j)
            .ok_or_else(|| Error::domain(format!("index {j} is not retained in the basis")))?;
        kept.set(j, value)?;
    }
    iwft(basis, &kept)
}

/// Indices whose eigenvalue magnitude reaches a bandwidth, with the smallest
/// distance between any of them and another retained eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigengapSet {
    pub indices: Vec<SignedIndex>,
    /// `+∞` when the set is empty or nothing else is retained.
    pub min_gap: f64,
}

pub fn eigengap_set(basis: &GraphonBasis, bandwidth: f64) -> EigengapSet {
    let spectrum = basis.spectrum();
    let values = spectrum.values();
    let members: Vec<usize> = (0..values.len())
        .filter(|&c| values[c].abs() >= bandwidth)
        .collect();
    let mut min_gap = f64::INFINITY;
    for &c in &members {
        for (o, v) in values.iter().enumerate() {
            if o != c {
                min_gap = min_gap.min((values[c] - v).abs());
            }
        }
    }
    EigengapSet {
        indices: members.iter().map(|&c| spectrum.index_of_column(c)).collect(),
        min_gap,
    }
}

/// Operator-norm distance `‖P_A − P_B‖` between the orthogonal projections
/// onto the spans of two sets of grid functions of equal resolution.
///
/// Each set is orthonormalized first, so inputs only need to be linearly
/// independent. The quadrature weight cancels in the operator norm.
pub fn projection_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let n = a.first().or(b.first()).map(|v| v.len()).unwrap_or(0);
    if a.iter().chain(b).any(|v| v.len() != n) {
        return Err(Error::validation("projection bases must share one grid resolution"));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(if a.len() == b.len() { 0.0 } else { 1.0 });
    }
    if a.len() != b.len() {
        return Ok(1.0);
    }
    let qa = orthonormal_columns(a)?;
    let qb = orthonormal_columns(b)?;
    let cross: Mat<f64> = qa.transpose() * &qb;
    let sv = cross
        .singular_values()
        .map_err(|e| Error::Numeric(format!("svd of principal-angle matrix failed: {e:?}")))?;
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    Ok((1.0 - smallest * smallest).max(0.0).sqrt())
}

fn orthonormal_columns(cols: &[Vec<f64>]) -> Result<Mat<f64>> {
    let n = cols[0].len();
    let m = Mat::from_fn(n, cols.len(), |i, j| cols[j][i]);
    let qr = m.qr();
    let r = qr.thin_R();
    let diag_max = (0..cols.len()).fold(0.0_f64, |a, k| a.max(r[(k, k)].abs()));
    if (0..cols.len()).any(|k| r[(k, k)].abs() <= 1e-12 * diag_max.max(f64::MIN_POSITIVE)) {
        return Err(Error::Numeric("projection basis is rank deficient".into()));
    }
    Ok(qr.compute_thin_Q())
}

/// Distance between two coefficient sets after aligning by signed index and
/// resolving each coefficient's sign to minimize the difference. Indices
/// present in only one set are compared against zero.
pub fn aligned_coefficient_distance(a: &Coefficients, b: &Coefficients) -> f64 {
    let mut acc = 0.0;
    for (j, x) in a.iter() {
        let d = match b.get(j) {
            Some(y) => (x - y).abs().min((x + y).abs()),
            None => x.abs(),
        };
        acc += d * d;
    }
    for (j, y) in b.iter() {
        if a.get(j).is_none() {
            acc += y * y;
        }
    }
    acc.sqrt()
}

/// Distance between coefficient magnitudes sorted in decreasing order,
/// zero-padded to a common length.
pub fn magnitude_sorted_distance(a: &Coefficients, b: &Coefficients) -> f64 {
    let sorted = |c: &Coefficients| {
        let mut v: Vec<f64> = c.as_slice().iter().map(|x| x.abs()).collect();
        v.sort_by(|x, y| y.total_cmp(x));
        v
    };
    let (sa, sb) = (sorted(a), sorted(b));
    let len = sa.len().max(sb.len());
    (0..len)
        .map(|i| {
            let d = sa.get(i).copied().unwrap_or(0.0) - sb.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;
    use rand::Rng as _;

    fn idx(j: i32) -> SignedIndex {
        SignedIndex::new(j).unwrap()
    }

    #[test]
    fn constant_graphon_is_rank_one() {
        let basis = graphon_eigs(&Graphon::constant(0.3).unwrap(), 50, 5).unwrap();
        assert!((basis.eigenvalue(idx(1)).unwrap() - 0.3).abs() < 1e-13);
        for v in &basis.spectrum().values()[1..] {
            assert!(v.abs() < 1e-13);
        }
        assert!(basis
            .eigenfunction(idx(1))
            .unwrap()
            .iter()
            .all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn balanced_sbm_eigenvalues() {
        // Block operator eigenvalues are eig(B)/2 = {0.5, 0.3}.
        let basis = graphon_eigs(&Graphon::balanced_sbm(0.8, 0.2).unwrap(), 100, 3).unwrap();
        assert!((basis.eigenvalue(idx(1)).unwrap() - 0.5).abs() < 1e-12);
        assert!((basis.eigenvalue(idx(2)).unwrap() - 0.3).abs() < 1e-12);
        let set = eigengap_set(&basis, 0.4);
        assert_eq!(set.indices, vec![idx(1)]);
        assert!((set.min_gap - 0.2).abs() < 1e-12);
    }

    #[test]
    fn eigengap_set_edge_cases() {
        let basis = graphon_eigs(&Graphon::constant(0.6).unwrap(), 20, 3).unwrap();
        assert_eq!(eigengap_set(&basis, 0.3).indices, vec![idx(1)]);
        let empty = eigengap_set(&basis, 0.7);
        assert!(empty.indices.is_empty());
        assert_eq!(empty.min_gap, f64::INFINITY);
    }

    #[test]
    fn k_larger_than_resolution_is_rejected() {
        assert!(graphon_eigs(&Graphon::constant(0.3).unwrap(), 10, 11).is_err());
        assert!(graphon_eigs(&Graphon::constant(0.3).unwrap(), 1, 1).is_err());
    }

    #[test]
    fn eigenfunctions_are_quadrature_orthonormal() {
        let basis = graphon_eigs(&Graphon::exp_distance(2.3).unwrap(), 200, 10).unwrap();
        let spectrum = basis.spectrum();
        for a in 0..spectrum.len() {
            for b in 0..spectrum.len() {
                let ip = linalg::dot(spectrum.column(a), spectrum.column(b)) / 200.0;
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn wft_examples() {
        let basis = graphon_eigs(&Graphon::exp_distance(2.3).unwrap(), 120, 8).unwrap();
        let phi1 = GraphonSignal::grid(basis.eigenfunction(idx(1)).unwrap().to_vec()).unwrap();
        let c = wft(&basis, &phi1).unwrap();
        for (j, v) in c.iter() {
            let expected = if j == idx(1) { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-8);
        }
        let z = wft(&basis, &GraphonSignal::zeros(120)).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        assert!(wft(&basis, &GraphonSignal::zeros(100)).is_err());
    }

    #[test]
    fn iwft_round_trip_and_single_coefficient() {
        let basis = graphon_eigs(&Graphon::exp_abs_distance(2.3).unwrap(), 150, 6).unwrap();
        let mut rng = rng_from_seed(5);
        let values: Vec<f64> = (0..basis.spectrum().len()).map(|_| rng.random::<f64>() - 0.5).collect();
        let coeffs = Coefficients::from_columns(values, basis.spectrum().n_pos()).unwrap();
        let back = wft(&basis, &iwft(&basis, &coeffs).unwrap()).unwrap();
        for (a, b) in back.as_slice().iter().zip(coeffs.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }

        let mut single = Coefficients::zeros_like(basis.spectrum());
        single.set(idx(2), 0.5).unwrap();
        let sig = iwft(&basis, &single).unwrap();
        for (s, f) in sig.grid_values().unwrap().iter().zip(basis.eigenfunction(idx(2)).unwrap()) {
            assert!((s - 0.5 * f).abs() < 1e-14);
        }
        let zero = iwft(&basis, &Coefficients::zeros_like(basis.spectrum())).unwrap();
        assert!(zero.grid_values().unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn induced_signal_examples() {
        let g = Graph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e1 = induced_signal(&g, &GraphSignal::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(e1.eval(0.2), 1.0);
        assert_eq!(e1.eval(0.5), 0.0);
        assert_eq!(e1.eval(0.9), 0.0);
        let c = induced_signal(&g, &GraphSignal::new(vec![2.5, 2.5]).unwrap()).unwrap();
        assert!(c.resample(10).iter().all(|&v| v == 2.5));
        let x = GraphSignal::new(vec![3.0, -4.0]).unwrap();
        let s = induced_signal(&g, &x).unwrap();
        assert!((s.norm(0).powi(2) - x.norm().powi(2) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn bridge_on_k3_with_unit_signal() {
        let k3 = Graph::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let x = GraphSignal::new(vec![1.0, 0.0, 0.0]).unwrap();
        let r = bridge_check(&k3, &x).unwrap();
        assert!(r.max_eigenvalue_gap <= 1e-10 && r.max_wft_gap <= 1e-10);
        assert_eq!(r.compared, 3);
        // By hand: λ_1(T) = 2/3 and φ̂_1 = x̂_1/√3 = (1/√3)/√3 = 1/3.
        let gb = graphon_eigs(&induced_graphon(&k3), 3, 3).unwrap();
        assert!((gb.eigenvalue(idx(1)).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let phi = wft(&gb, &induced_signal(&k3, &x).unwrap()).unwrap();
        assert!((phi.get(idx(1)).unwrap() - 1.0 / 3.0).abs() < 1e-14);

        let empty = Graph::new(Mat::zeros(4, 4)).unwrap();
        let r = bridge_check(&empty, &GraphSignal::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        assert_eq!(r.max_eigenvalue_gap, 0.0);
    }

    #[test]
    fn subspace_projection_properties() {
        let basis = graphon_eigs(&Graphon::exp_distance(2.3).unwrap(), 100, 5).unwrap();
        let phi = GraphonSignal::closed_form("bump", |u| (-(u - 0.3) * (u - 0.3) / 0.02).exp());
        let cluster = [idx(1), idx(2)];
        let p1 = subspace_project(&basis, &cluster, &phi).unwrap();
        let p2 = subspace_project(&basis, &cluster, &p1).unwrap();
        assert!(quad_dist(p1.grid_values().unwrap(), p2.grid_values().unwrap()) < 1e-8);
        assert!(p1.norm(100) <= phi.norm(100) + 1e-12);
        let empty = subspace_project(&basis, &[], &phi).unwrap();
        assert!(empty.grid_values().unwrap().iter().all(|&v| v == 0.0));
        assert!(subspace_project(&basis, &[idx(99)], &phi).is_err());
    }

    #[test]
    fn projection_distance_basics() {
        let e = |k: usize| (0..4).map(|i| if i == k { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        assert!(projection_distance(&[e(0)], &[e(0)]).unwrap() < 1e-12);
        assert!((projection_distance(&[e(0)], &[e(1)]).unwrap() - 1.0).abs() < 1e-12);
        let tilted: Vec<f64> = vec![0.6, 0.8, 0.0, 0.0];
        assert!((projection_distance(&[e(0)], &[tilted]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(projection_distance(&[e(0)], &[e(0), e(1)]).unwrap(), 1.0);
    }

    #[test]
    fn aligned_distance_resolves_signs() {
        let a = Coefficients::from_columns(vec![1.0, -0.5, 0.25], 2).unwrap();
        let b = Coefficients::from_columns(vec![-1.0, -0.5], 1).unwrap();
        // index 1: |1 - (-1)| vs |1 + (-1)| -> 0; index 2 only in a -> 0.5;
        // index -1: 0.25 vs -0.5 -> 0.25.
        let d = aligned_coefficient_distance(&a, &b);
        assert!((d - (0.25f64 + 0.0625).sqrt()).abs() < 1e-15);
        assert!((magnitude_sorted_distance(&a, &b) - (0.0f64 + 0.0 + 0.0625).sqrt()).abs() < 1e-15);
    }
}
