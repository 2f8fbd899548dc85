//! Homomorphism densities of small motifs, the cycle/spectrum identity and
//! cut norms of step kernels.
//!
//! Densities count all vertex maps, not only injective ones:
//! `t(F, G) = Σ_β Π_{(i,j)∈E(F)} S_{β(i)β(j)} / n^{|V(F)|}`.

use faer::Mat;
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, SpectralBasis};
use crate::graphon::{grid_matrix, Graphon};
use crate::linalg;
use crate::seed::{rng_from_seed, Rng};
use crate::spectral::GraphonBasis;

pub const MAX_MOTIF_VERTICES: usize = 8;
/// Largest number of vertex maps a brute-force count may enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e9;
pub const MAX_EXACT_CUT_BLOCKS: usize = 20;

/// A small pattern graph `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Motif {
    /// A simple graph on `n_vertices` vertices.
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n_vertices == 0 || n_vertices > MAX_MOTIF_VERTICES {
            return Err(Error::validation(format!(
                "motifs have 1..={MAX_MOTIF_VERTICES} vertices, got {n_vertices}"
            )));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::validation(format!("edge ({a},{b}) references a missing vertex")));
            }
            if a == b {
                return Err(Error::validation(format!("self-loop at vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if normalized.contains(&e) {
                return Err(Error::validation(format!("duplicate edge ({a},{b})")));
            }
            normalized.push(e);
        }
        Ok(Self {
            n_vertices,
            edges: normalized,
        })
    }

    pub fn edge() -> Self {
        Self::new(2, vec![(0, 1)]).expect("valid")
    }

    /// The `k`-cycle. `C_2` is the doubled edge, so that `t(C_2, ·)` is the
    /// squared Hilbert-Schmidt norm; it is the only motif with a repeated edge.
    pub fn cycle(k: usize) -> Result<Self> {
        match k {
            0 | 1 => Err(Error::domain(format!("cycles have length >= 2, got {k}"))),
            2 => Ok(Self {
                n_vertices: 2,
                edges: vec![(0, 1), (0, 1)],
            }),
            _ => Self::new(k, (0..k).map(|i| (i, (i + 1) % k)).collect()),
        }
    }

    pub fn path(vertices: usize) -> Result<Self> {
        Self::new(vertices, (1..vertices).map(|i| (i - 1, i)).collect())
    }

    pub fn complete(vertices: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..vertices {
            for j in (i + 1)..vertices {
                edges.push((i, j));
            }
        }
        Self::new(vertices, edges)
    }

    pub fn star(leaves: usize) -> Result<Self> {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i)).collect())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parses an edge list: `i,j` per line (0-based), with an optional
    /// `# n=<vertices>` header for isolated vertices.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n_decl = None;
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(v) = line.strip_prefix("# n=") {
                n_decl = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad vertex count {v:?}"),
                })?);
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "motif edges are i,j".into(),
            })?;
            let p = |s: &str| {
                s.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad vertex {s:?}"),
                })
            };
            edges.push((p(a)?, p(b)?));
        }
        let n = n_decl.unwrap_or_else(|| edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0));
        Self::new(n, edges)
    }

    /// Vertex order in which every vertex after the first in its component is
    /// adjacent to an earlier one, plus the earlier neighbours of each position.
    fn plan(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        let mut order = Vec::with_capacity(self.n_vertices);
        let mut placed = vec![false; self.n_vertices];
        while order.len() < self.n_vertices {
            let start = (0..self.n_vertices).find(|&v| !placed[v]).expect("unplaced vertex");
            placed[start] = true;
            order.push(start);
            let mut head = order.len() - 1;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &(a, b) in &self.edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == v && !placed[y] {
                            placed[y] = true;
                            order.push(y);
                        }
                    }
                }
            }
        }
        let position: Vec<usize> = {
            let mut p = vec![0; self.n_vertices];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        let mut back = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            let (pa, pb) = (position[a], position[b]);
            let (early, late) = if pa < pb { (pa, pb) } else { (pb, pa) };
            back[late].push(early);
        }
        (order, back)
    }
}

fn check_budget(targets: usize, motif: &Motif) -> Result<()> {
    let maps = (targets as f64).powi(motif.n_vertices as i32);
    if maps > ENUMERATION_BUDGET {
        return Err(Error::Budget(format!(
            "{targets}^{} = {maps:.3e} vertex maps exceed the budget of {ENUMERATION_BUDGET:.0e}; \
             use cycle_density_graph for cycles",
            motif.n_vertices
        )));
    }
    Ok(())
}

/// Sums in a fixed binary-tree order so the result does not depend on how
/// the terms were produced.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// `Σ_β Π_v w(β(v)) Π_{(i,j)} M[β(i), β(j)]` over all maps into the rows of `m`.
fn weighted_hom_sum(m: &Mat<f64>, weights: Option<&[f64]>, motif: &Motif) -> f64 {
    let targets = m.nrows();
    let (_, back) = motif.plan();
    let k = motif.n_vertices;

    fn recurse(
        pos: usize,
        assign: &mut [usize],
        m: &Mat<f64>,
        weights: Option<&[f64]>,
        back: &[Vec<usize>],
    ) -> f64 {
        if pos == assign.len() {
            return 1.0;
        }
        let mut total = 0.0;
        for a in 0..m.nrows() {
            let mut factor = weights.map_or(1.0, |w| w[a]);
            for &e in &back[pos] {
                factor *= m[(assign[e], a)];
            }
            if factor == 0.0 {
                continue;
            }
            assign[pos] = a;
            total += factor * recurse(pos + 1, assign, m, weights, back);
        }
        total
    }

    let partials: Vec<f64> = (0..targets)
        .into_par_iter()
        .map(|first| {
            let w0 = weights.map_or(1.0, |w| w[first]);
            if w0 == 0.0 {
                return 0.0;
            }
            let mut assign = vec![0usize; k];
            assign[0] = first;
            w0 * recurse(1, &mut assign, m, weights, &back)
        })
        .collect();
    pairwise_sum(&partials)
}

/// Brute-force homomorphism density `t(F, G)`.
pub fn hom_density_graph(motif: &Motif, g: &Graph) -> Result<f64> {
    check_budget(g.n(), motif)?;
    let hom = weighted_hom_sum(g.shift(), None, motif);
    Ok(hom / (g.n() as f64).powi(motif.n_vertices as i32))
}

/// `t(C_k, G) = trace(S^k) / n^k`.
pub fn cycle_density_graph(k: usize, g: &Graph) -> Result<f64> {
    Ok(trace_power(g.shift(), k)? / (g.n() as f64).powi(k as i32))
}

fn trace_power(s: &Mat<f64>, k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!("cycle length must be >= 2, got {k}")));
    }
    // trace(S^k) = <S^a, S^b> with a + b = k, a = ceil(k/2).
    let a = k.div_ceil(2);
    let b = k - a;
    let mut power_a = s.clone();
    for _ in 1..a {
        power_a = &power_a * s;
    }
    let power_b = if b == a {
        power_a.clone()
    } else {
        let mut p = s.clone();
        for _ in 1..b {
            p = &p * s;
        }
        p
    };
    let mut acc = 0.0;
    for j in 0..s.ncols() {
        acc += linalg::dot(power_a.col_as_slice(j), power_b.col_as_slice(j));
    }
    Ok(acc)
}

/// How to evaluate a graphon density.
pub enum DensityMethod<'a> {
    /// Exact block sum; only for piecewise-constant graphons.
    StepExact,
    /// Average of the edge product over i.i.d. uniform vertex positions.
    MonteCarlo { samples: usize, rng: &'a mut Rng },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEstimate {
    pub value: f64,
    /// Standard error of a Monte Carlo estimate; 0 for exact values.
    pub std_error: f64,
}

/// `t(F, W) = ∫ Π_{(i,j)} W(u_i, u_j) du`.
pub fn hom_density_graphon(motif: &Motif, w: &Graphon, method: DensityMethod<'_>) -> Result<DensityEstimate> {
    match method {
        DensityMethod::StepExact => {
            let (measures, blocks) = w
                .as_blocks()
                .ok_or_else(|| Error::domain(format!("step_exact needs a piecewise-constant graphon, got {w}")))?;
            check_budget(blocks.nrows(), motif)?;
            Ok(DensityEstimate {
                value: weighted_hom_sum(&blocks, Some(&measures), motif),
                std_error: 0.0,
            })
        }
        DensityMethod::MonteCarlo { samples, rng } => {
            if samples < 2 {
                return Err(Error::domain("Monte Carlo density needs at least 2 samples"));
            }
            let mut u = vec![0.0; motif.n_vertices];
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                for x in u.iter_mut() {
                    *x = rng.random::<f64>();
                }
                let prod: f64 = motif
                    .edges
                    .iter()
                    .map(|&(a, b)| w.eval_unchecked(u[a], u[b]))
                    .product();
                sum += prod;
                sum_sq += prod * prod;
            }
            let m = samples as f64;
            let mean = sum / m;
            let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
            Ok(DensityEstimate {
                value: mean,
                std_error: (var / m).sqrt(),
            })
        }
    }
}

/// Spectrum against which a cycle density is compared.
pub enum SpectrumSource<'a> {
    Graph { graph: &'a Graph, basis: &'a SpectralBasis },
    Graphon { graphon: &'a Graphon, basis: &'a GraphonBasis },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleIdentityReport {
    /// `t(C_k, ·)`.
    pub density: f64,
    /// `Σ_j λ_j^k` over the available (normalized) eigenvalues.
    pub spectral_sum: f64,
    pub gap: f64,
}

/// Compares `t(C_k, ·)` with the `k`-th power sum of the normalized spectrum.
/// Exact for graphs; for graphons the spectral sum covers the retained
/// eigenvalues of the grid operator only.
pub fn cycle_spectral_identity_check(k: usize, source: SpectrumSource<'_>) -> Result<CycleIdentityReport> {
    if k < 2 {
        return Err(Error::domain(format!("cycle length must be >= 2, got {k}")));
    }
    let (density, spectral_sum) = match source {
        SpectrumSource::Graph { graph, basis } => {
            Error::check_dim(graph.n(), basis.n())?;
            let n = graph.n() as f64;
            let sum: f64 = basis.spectrum().values().iter().map(|l| (l / n).powi(k as i32)).sum();
            (cycle_density_graph(k, graph)?, sum)
        }
        SpectrumSource::Graphon { graphon, basis } => {
            let sum: f64 = basis.spectrum().values().iter().map(|l| l.powi(k as i32)).sum();
            (graphon_cycle_density(k, graphon, basis.resolution())?, sum)
        }
    };
    Ok(CycleIdentityReport {
        density,
        spectral_sum,
        gap: (density - spectral_sum).abs(),
    })
}

fn graphon_cycle_density(k: usize, w: &Graphon, resolution: usize) -> Result<f64> {
    let cycle = Motif::cycle(k)?;
    if let Some((measures, blocks)) = w.as_blocks() {
        let m = blocks.nrows();
        if (m as f64).powi(k as i32) <= ENUMERATION_BUDGET {
            return Ok(weighted_hom_sum(&blocks, Some(&measures), &cycle));
        }
        if let Some(values) = w.step_values() {
            return Ok(trace_power(values, k)? / (m as f64).powi(k as i32));
        }
    }
    let grid = grid_matrix(w, resolution);
    Ok(trace_power(&grid, k)? / (resolution as f64).powi(k as i32))
}

/// Real-valued step kernel on the regular partition, e.g. a difference of
/// two step graphons. Not required to be symmetric or nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel {
    values: Mat<f64>,
}

impl StepKernel {
    pub fn new(values: Mat<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() || values.nrows() == 0 {
            return Err(Error::validation("step kernel values must be a nonempty square matrix"));
        }
        for j in 0..values.ncols() {
            for i in 0..values.nrows() {
                if !values[(i, j)].is_finite() {
                    return Err(Error::validation("step kernel values must be finite"));
                }
            }
        }
        Ok(Self { values })
    }

    /// Regular-partition kernel of a step graphon (constant, step or grid).
    pub fn from_graphon(w: &Graphon) -> Result<Self> {
        let (measures, blocks) = w
            .as_blocks()
            .ok_or_else(|| Error::domain("cut norms need a piecewise-constant graphon"))?;
        let m = measures.len();
        if measures.iter().any(|&x| (x - 1.0 / m as f64).abs() > 1e-15) {
            return Err(Error::domain("cut norms are computed on regular partitions only"));
        }
        Self::new(blocks)
    }

    /// `a − b` for kernels with the same number of blocks.
    pub fn difference(a: &StepKernel, b: &StepKernel) -> Result<Self> {
        Error::check_dim(a.blocks(), b.blocks())?;
        let m = a.blocks();
        Self::new(Mat::from_fn(m, m, |i, j| a.values[(i, j)] - b.values[(i, j)]))
    }

    pub fn blocks(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Mat<f64> {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutMode {
    /// Enumerate every block subset (at most 20 blocks).
    Exact,
    /// Alternating best responses from random starts; a lower bound.
    Greedy { starts: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutNorm {
    pub value: f64,
    /// Row blocks of the maximizing set `S`.
    pub rows: Vec<usize>,
    /// Column blocks of the maximizing set `T`.
    pub cols: Vec<usize>,
}

/// Cut norm `sup_{S,T} |∫_{S×T} D|` of a step kernel.
///
/// For fixed `S` the integral is linear in the indicator of `T`, so the
/// supremum is attained on unions of blocks and the best `T` keeps exactly the
/// columns whose partial sums have the optimizing sign.
pub fn cut_norm_step(d: &StepKernel, mode: CutMode) -> Result<CutNorm> {
    match mode {
        CutMode::Exact => exact_cut(d),
        CutMode::Greedy { starts, seed } => Ok(greedy_cut(d, starts.max(1), seed)),
    }
}

fn best_columns(col_sums: &[f64], sign: f64) -> (f64, Vec<usize>) {
    let mut total = 0.0;
    let mut cols = Vec::new();
    for (k, &c) in col_sums.iter().enumerate() {
        if sign * c > 0.0 {
            total += sign * c;
            cols.push(k);
        }
    }
    (total, cols)
}

fn exact_cut(d: &StepKernel) -> Result<CutNorm> {
    let m = d.blocks();
    if m > MAX_EXACT_CUT_BLOCKS {
        return Err(Error::Budget(format!(
            "exact cut norm enumerates 2^{m} subsets; at most {MAX_EXACT_CUT_BLOCKS} blocks allowed"
        )));
    }
    let v = &d.values;
    let mut col_sums = vec![0.0; m];
    let mut in_set = vec![false; m];
    let mut best = (0.0, 0u64, 1.0);
    // Gray-code walk: subset g(i) = i ^ (i >> 1) differs from g(i-1) in one row.
    for i in 1u64..(1u64 << m) {
        let row = i.trailing_zeros() as usize;
        let sign = if in_set[row] { -1.0 } else { 1.0 };
        in_set[row] = !in_set[row];
        for (k, c) in col_sums.iter_mut().enumerate() {
            *c += sign * v[(row, k)];
        }
        let gray = i ^ (i >> 1);
        for s in [1.0, -1.0] {
            let (value, _) = best_columns(&col_sums, s);
            if value > best.0 {
                best = (value, gray, s);
            }
        }
    }
    let (value, gray, sign) = best;
    let rows: Vec<usize> = (0..m).filter(|&r| gray >> r & 1 == 1).collect();
    let mut sums = vec![0.0; m];
    for &r in &rows {
        for (k, c) in sums.iter_mut().enumerate() {
            *c += v[(r, k)];
        }
    }
    let cols = best_columns(&sums, sign).1;
    Ok(CutNorm {
        value: value / (m * m) as f64,
        rows,
        cols,
    })
}

fn greedy_cut(d: &StepKernel, starts: usize, seed: u64) -> CutNorm {
    let m = d.blocks();
    let v = &d.values;
    let mut rng = rng_from_seed(seed);
    let mut best = CutNorm {
        value: 0.0,
        rows: Vec::new(),
        cols: Vec::new(),
    };
    for _ in 0..starts {
        let start: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
        for sign in [1.0, -1.0] {
            let mut rows = start.clone();
            let mut current = f64::NEG_INFINITY;
            for _ in 0..100 {
                let col_sums: Vec<f64> = (0..m)
                    .map(|k| (0..m).filter(|&r| rows[r]).map(|r| v[(r, k)]).sum())
                    .collect();
                let (_, cols) = best_columns(&col_sums, sign);
                let row_sums: Vec<f64> = (0..m).map(|r| cols.iter().map(|&k| v[(r, k)]).sum()).collect();
                let (value, new_rows) = best_columns(&row_sums, sign);
                if value <= current {
                    break;
                }
                current = value;
                rows = (0..m).map(|r| new_rows.contains(&r)).collect();
                if current / (m * m) as f64 > best.value {
                    best = CutNorm {
                        value: current / (m * m) as f64,
                        rows: new_rows.clone(),
                        cols: cols.clone(),
                    };
                }
            }
        }
    }
    best
}

/// `‖T_W‖ = max_j |λ_j(T_W)|` over the retained eigenvalues.
pub fn l2_operator_norm(basis: &GraphonBasis) -> f64 {
    basis
        .spectrum()
        .values()
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
}
