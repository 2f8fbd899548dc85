//! Finite graphs, graph signals and the graph Fourier transform.
//!
//! Eigenpairs are indexed by a nonzero signed integer: positive indices hold
//! the nonnegative eigenvalues in decreasing order (`λ_1 ≥ λ_2 ≥ … ≥ 0`) and
//! negative indices the negative ones by decreasing magnitude
//! (`λ_{-1} ≤ λ_{-2} ≤ … < 0`).

use std::cmp::Ordering;
use std::fmt;

use faer::Mat;

use crate::error::{Error, Result};
use crate::graphon::check_symmetric_unit;
use crate::linalg;

/// Symmetric shift operator with entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    shift: Mat<f64>,
}

impl Graph {
    pub fn new(shift: Mat<f64>) -> Result<Self> {
        check_symmetric_unit(&shift, "shift operator")?;
        Ok(Self { shift })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("adjacency rows must form a square matrix"));
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub(crate) fn from_validated(shift: Mat<f64>) -> Self {
        debug_assert!(linalg::is_symmetric(shift.as_ref()));
        Self { shift }
    }

    pub fn n(&self) -> usize {
        self.shift.nrows()
    }

    pub fn shift(&self) -> &Mat<f64> {
        &self.shift
    }

    /// Mean off-diagonal weight, `Σ_{i≠j} S_ij / (n(n-1))`.
    pub fn edge_density(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    total += self.shift[(i, j)];
                }
            }
        }
        total / (n * (n - 1)) as f64
    }

    /// One application of the shift, `S x`.
    pub fn apply_shift(&self, x: &GraphSignal) -> Result<GraphSignal> {
        Error::check_dim(self.n(), x.len())?;
        Ok(GraphSignal {
            values: linalg::sym_matvec(&self.shift, x.values()),
        })
    }
}

/// Real-valued signal on the nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSignal {
    values: Vec<f64>,
}

impl GraphSignal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("signal entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.values)
    }
}

/// Nonzero signed eigenvalue index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedIndex(i32);

impl SignedIndex {
    pub fn new(j: i32) -> Result<Self> {
        if j == 0 {
            Err(Error::domain("signed eigenvalue indices are nonzero"))
        } else {
            Ok(Self(j))
        }
    }

    pub fn get(self) -> i32 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl fmt::Display for SignedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Eigenpairs laid out in signed-index order.
///
/// Columns `0..n_pos` hold indices `1..=n_pos`; the remaining columns hold
/// `-1, -2, …` in that order.
#[derive(Debug, Clone)]
pub struct SignedSpectrum {
    values: Vec<f64>,
    vectors: Mat<f64>,
    n_pos: usize,
}

impl SignedSpectrum {
    pub(crate) fn new(values: Vec<f64>, vectors: Mat<f64>, n_pos: usize) -> Self {
        debug_assert_eq!(values.len(), vectors.ncols());
        Self {
            values,
            vectors,
            n_pos,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.values.len() - self.n_pos
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Eigenvalues in column order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Mat<f64> {
        &self.vectors
    }

    pub fn index_of_column(&self, col: usize) -> SignedIndex {
        if col < self.n_pos {
            SignedIndex(col as i32 + 1)
        } else {
            SignedIndex(-((col - self.n_pos) as i32 + 1))
        }
    }

    pub fn column_of(&self, j: SignedIndex) -> Option<usize> {
        let k = j.0.unsigned_abs() as usize - 1;
        if j.0 > 0 {
            (k < self.n_pos).then_some(k)
        } else {
            (k < self.n_neg()).then_some(self.n_pos + k)
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = SignedIndex> + '_ {
        (0..self.len()).map(|c| self.index_of_column(c))
    }

    pub fn eigenvalue(&self, j: SignedIndex) -> Option<f64> {
        self.column_of(j).map(|c| self.values[c])
    }

    pub fn vector(&self, j: SignedIndex) -> Option<&[f64]> {
        self.column_of(j).map(|c| self.vectors.col_as_slice(c))
    }

    pub(crate) fn column(&self, c: usize) -> &[f64] {
        self.vectors.col_as_slice(c)
    }

    /// Inner products of `x` with every stored vector, scaled by `weight`.
    pub(crate) fn project(&self, x: &[f64], weight: f64) -> Coefficients {
        let values = (0..self.len())
            .map(|c| weight * linalg::dot(self.column(c), x))
            .collect();
        Coefficients {
            values,
            n_pos: self.n_pos,
        }
    }

    /// `Σ_c coeff_c · vector_c`.
    pub(crate) fn synthesize(&self, coeffs: &Coefficients) -> Result<Vec<f64>> {
        coeffs.check_layout(self)?;
        let mut out = vec![0.0; self.dim()];
        for (c, &a) in coeffs.values.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(self.column(c)) {
                *o += a * v;
            }
        }
        Ok(out)
    }

    /// Keeps at most `k` pairs per sign.
    pub(crate) fn truncate(self, k: usize) -> Self {
        let pos = self.n_pos.min(k);
        let neg = self.n_neg().min(k);
        let cols: Vec<usize> = (0..pos).chain(self.n_pos..self.n_pos + neg).collect();
        let vectors = Mat::from_fn(self.dim(), cols.len(), |i, c| self.vectors[(i, cols[c])]);
        let values = cols.iter().map(|&c| self.values[c]).collect();
        Self {
            values,
            vectors,
            n_pos: pos,
        }
    }

    pub(crate) fn map_vectors(mut self, f: impl Fn(f64) -> f64) -> Self {
        for j in 0..self.vectors.ncols() {
            for v in self.vectors.col_as_slice_mut(j) {
                *v = f(*v);
            }
        }
        self
    }

    pub(crate) fn map_values(mut self, f: impl Fn(f64) -> f64) -> Self {
        for v in &mut self.values {
            *v = f(*v);
        }
        self
    }
}

/// Spectral coefficients keyed by signed index, laid out like the
/// [`SignedSpectrum`] they were computed against.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    values: Vec<f64>,
    n_pos: usize,
}

impl Coefficients {
    pub fn zeros_like(spectrum: &SignedSpectrum) -> Self {
        Self {
            values: vec![0.0; spectrum.len()],
            n_pos: spectrum.n_pos(),
        }
    }

    /// Builds coefficients from column-ordered values.
    pub fn from_columns(values: Vec<f64>, n_pos: usize) -> Result<Self> {
        if n_pos > values.len() {
            return Err(Error::validation("more positive indices than coefficients"));
        }
        Ok(Self { values, n_pos })
    }

    pub fn get(&self, j: SignedIndex) -> Option<f64> {
        let k = j.0.unsigned_abs() as usize - 1;
        if j.0 > 0 {
            (k < self.n_pos).then(|| self.values[k])
        } else {
            self.values.get(self.n_pos + k).copied()
        }
    }

    pub fn set(&mut self, j: SignedIndex, value: f64) -> Result<()> {
        let k = j.0.unsigned_abs() as usize - 1;
        let col = if j.0 > 0 {
            (k < self.n_pos).then_some(k)
        } else {
            (self.n_pos + k < self.values.len()).then_some(self.n_pos + k)
        };
        let col = col.ok_or_else(|| Error::domain(format!("index {j} not in coefficient set")))?;
        self.values[col] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (SignedIndex, f64)> + '_ {
        self.values.iter().enumerate().map(|(c, &v)| {
            let j = if c < self.n_pos {
                c as i32 + 1
            } else {
                -((c - self.n_pos) as i32 + 1)
            };
            (SignedIndex(j), v)
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn energy(&self) -> f64 {
        linalg::dot(&self.values, &self.values)
    }

    fn check_layout(&self, spectrum: &SignedSpectrum) -> Result<()> {
        Error::check_dim(spectrum.len(), self.values.len())?;
        if self.n_pos != spectrum.n_pos() {
            return Err(Error::validation(format!(
                "coefficients have {} positive indices, basis has {}",
                self.n_pos,
                spectrum.n_pos()
            )));
        }
        Ok(())
    }
}

/// Flips `v` so that its largest-magnitude entry is positive. Entries whose
/// magnitude is within a relative 1e-10 of the maximum count as tied, and the
/// first of them decides.
pub(crate) fn canonical_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-10))
        .expect("max is attained");
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Arranges an ascending eigendecomposition into signed-index order.
///
/// Eigenvalues within `16·n·ε·max|λ|` of zero are set to exactly zero and
/// land on the positive side.
pub(crate) fn signed_order(values: Vec<f64>, vectors: Mat<f64>) -> SignedSpectrum {
    let n = vectors.nrows();
    let m = values.len();
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let zero_tol = 16.0 * n.max(1) as f64 * f64::EPSILON * scale;

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..m)
        .map(|c| {
            let lambda = if values[c].abs() <= zero_tol { 0.0 } else { values[c] };
            let mut v = vectors.col_as_slice(c).to_vec();
            canonical_sign(&mut v);
            (lambda, v)
        })
        .collect();

    let (mut pos, mut neg): (Vec<_>, Vec<_>) = pairs.drain(..).partition(|(l, _)| *l >= 0.0);
    pos.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lexicographic(&a.1, &b.1)));
    neg.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&a.1, &b.1)));

    let n_pos = pos.len();
    let ordered: Vec<(f64, Vec<f64>)> = pos.into_iter().chain(neg).collect();
    let vectors = Mat::from_fn(n, m, |i, c| ordered[c].1[i]);
    let values = ordered.into_iter().map(|(l, _)| l).collect();
    SignedSpectrum::new(values, vectors, n_pos)
}

/// Full eigendecomposition of a graph's shift operator.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    spectrum: SignedSpectrum,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn spectrum(&self) -> &SignedSpectrum {
        &self.spectrum
    }

    pub fn eigenvalue(&self, j: SignedIndex) -> Option<f64> {
        self.spectrum.eigenvalue(j)
    }

    pub fn eigenvector(&self, j: SignedIndex) -> Option<&[f64]> {
        self.spectrum.vector(j)
    }

    pub fn indices(&self) -> impl Iterator<Item = SignedIndex> + '_ {
        self.spectrum.indices()
    }
}

pub fn eigendecompose(g: &Graph) -> Result<SpectralBasis> {
    let (values, vectors) = linalg::sym_eigen(g.shift())?;
    Ok(SpectralBasis {
        spectrum: signed_order(values, vectors),
    })
}

/// Graph Fourier transform `x̂_j = ⟨v_j, x⟩`.
pub fn gft(basis: &SpectralBasis, x: &GraphSignal) -> Result<Coefficients> {
    Error::check_dim(basis.n(), x.len())?;
    Ok(basis.spectrum.project(x.values(), 1.0))
}

/// Inverse graph Fourier transform `x = Σ_j x̂_j v_j`.
pub fn igft(basis: &SpectralBasis, coeffs: &Coefficients) -> Result<GraphSignal> {
    Ok(GraphSignal::from_raw(basis.spectrum.synthesize(coeffs)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(j: i32) -> SignedIndex {
        SignedIndex::new(j).unwrap()
    }

    fn graph(rows: &[&[f64]]) -> Graph {
        Graph::new(Mat::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn two_node_path() {
        let basis = eigendecompose(&graph(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((basis.eigenvalue(idx(1)).unwrap() - 1.0).abs() < 1e-14);
        assert!((basis.eigenvalue(idx(-1)).unwrap() + 1.0).abs() < 1e-14);
        let v1 = basis.eigenvector(idx(1)).unwrap();
        let vm1 = basis.eigenvector(idx(-1)).unwrap();
        assert!((v1[0] - r).abs() < 1e-14 && (v1[1] - r).abs() < 1e-14);
        assert!((vm1[0] - r).abs() < 1e-14 && (vm1[1] + r).abs() < 1e-14);
        assert!(basis.eigenvalue(idx(2)).is_none());

        let mut coeffs = Coefficients::zeros_like(basis.spectrum());
        coeffs.set(idx(-1), 1.0).unwrap();
        let x = igft(&basis, &coeffs).unwrap();
        assert!((x.values()[0] - r).abs() < 1e-14 && (x.values()[1] + r).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_positive_indices_only() {
        let basis = eigendecompose(&Graph::new(Mat::zeros(4, 4)).unwrap()).unwrap();
        assert_eq!(basis.spectrum().n_pos(), 4);
        let idxs: Vec<i32> = basis.indices().map(|j| j.get()).collect();
        assert_eq!(idxs, vec![1, 2, 3, 4]);
        assert!(basis.spectrum().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complete_graph_k3() {
        // K_n spectrum is {n-1, -1 (n-1 times)}.
        let k3 = graph(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let basis = eigendecompose(&k3).unwrap();
        assert_eq!(basis.spectrum().n_pos(), 1);
        assert!((basis.eigenvalue(idx(1)).unwrap() - 2.0).abs() < 1e-12);
        assert!((basis.eigenvalue(idx(-1)).unwrap() + 1.0).abs() < 1e-12);
        assert!((basis.eigenvalue(idx(-2)).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gft_examples() {
        let g = graph(&[&[0.0, 0.5, 0.2], &[0.5, 0.0, 0.9], &[0.2, 0.9, 0.0]]);
        let basis = eigendecompose(&g).unwrap();
        let v1 = GraphSignal::new(basis.eigenvector(idx(1)).unwrap().to_vec()).unwrap();
        let c = gft(&basis, &v1).unwrap();
        for (j, value) in c.iter() {
            let expected = if j == idx(1) { 1.0 } else { 0.0 };
            assert!((value - expected).abs() < 1e-12);
        }
        let zero = gft(&basis, &GraphSignal::zeros(3)).unwrap();
        assert!(zero.as_slice().iter().all(|&v| v == 0.0));
        assert!(matches!(
            gft(&basis, &GraphSignal::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
        let back = igft(&basis, &Coefficients::zeros_like(basis.spectrum())).unwrap();
        assert!(back.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn canonical_sign_prefers_first_of_tied_entries() {
        let mut v = vec![-0.5, 0.5];
        canonical_sign(&mut v);
        assert_eq!(v, vec![0.5, -0.5]);
        let mut w = vec![0.1, -0.9, 0.3];
        canonical_sign(&mut w);
        assert_eq!(w, vec![-0.1, 0.9, -0.3]);
    }

    #[test]
    fn rejects_bad_shift() {
        assert!(Graph::from_rows(&[vec![0.0, 1.0], vec![0.9, 0.0]]).is_err());
        assert!(Graph::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]).is_err());
        assert!(Graph::from_rows(&[vec![0.0, 1.0]]).is_err());
        assert!(GraphSignal::new(vec![1.0, f64::NAN]).is_err());
        assert!(SignedIndex::new(0).is_err());
    }
}
