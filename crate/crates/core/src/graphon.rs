//! Graphon representations, discretization, induced graphons and W-random
//! graph sampling.
//!
//! A graphon is a symmetric kernel `W: [0,1]^2 -> [0,1]`. Closed-form families
//! are evaluated directly; step graphons (and grid samples of closed forms)
//! use a regular partition of `[0,1]` into right-open blocks, except the last
//! block which is closed so that `eval` is total on the unit interval.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use faer::Mat;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io;
use crate::linalg;
use crate::seed::Rng;

/// The concrete representation behind a [`Graphon`].
#[derive(Debug, Clone, PartialEq)]
pub enum GraphonKind {
    Constant {
        p: f64,
    },
    /// Stochastic block model with blocks `[b_{k-1}, b_k)`, `b_0 = 0`.
    Sbm {
        boundaries: Vec<f64>,
        block_probs: Mat<f64>,
    },
    /// `W(u,v) = exp(-beta (u-v)^2)`.
    ExpDistance {
        beta: f64,
    },
    /// `W(u,v) = exp(-beta |u-v|)`, the soft geometric sensor-network kernel.
    ExpAbsDistance {
        beta: f64,
    },
    /// Step graphon on the regular partition with `values.nrows()` blocks.
    Step {
        values: Mat<f64>,
    },
    /// Closed form sampled at regular-grid midpoints; evaluated with step semantics.
    GridSampled {
        values: Mat<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    kind: GraphonKind,
}

/// Index of the regular-partition block containing `u`.
pub(crate) fn block_index(u: f64, blocks: usize) -> usize {
    ((u * blocks as f64).floor() as usize).min(blocks - 1)
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {value} is outside [0, 1]")))
    }
}

pub(crate) fn check_symmetric_unit(values: &Mat<f64>, what: &str) -> Result<()> {
    if values.nrows() != values.ncols() {
        return Err(Error::validation(format!(
            "{what} must be square, got {}x{}",
            values.nrows(),
            values.ncols()
        )));
    }
    if values.nrows() == 0 {
        return Err(Error::validation(format!("{what} is empty")));
    }
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            let v = values[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::validation(format!(
                    "{what} entry ({i},{j}) = {v} is outside [0, 1]"
                )));
            }
        }
    }
    if !linalg::is_symmetric(values.as_ref()) {
        return Err(Error::validation(format!("{what} is not symmetric")));
    }
    Ok(())
}

impl Graphon {
    pub fn constant(p: f64) -> Result<Self> {
        check_unit("p", p)?;
        Ok(Self {
            kind: GraphonKind::Constant { p },
        })
    }

    pub fn sbm(boundaries: Vec<f64>, block_probs: Mat<f64>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::validation("SBM needs at least one block"));
        }
        let mut prev = 0.0;
        for &b in &boundaries {
            if !(b > prev) {
                return Err(Error::validation(format!(
                    "SBM boundaries must be strictly increasing in (0, 1], got {boundaries:?}"
                )));
            }
            prev = b;
        }
        if prev != 1.0 {
            return Err(Error::validation("last SBM boundary must be 1"));
        }
        if block_probs.nrows() != boundaries.len() {
            return Err(Error::validation(format!(
                "{} boundaries but {} block rows",
                boundaries.len(),
                block_probs.nrows()
            )));
        }
        check_symmetric_unit(&block_probs, "SBM block probabilities")?;
        Ok(Self {
            kind: GraphonKind::Sbm {
                boundaries,
                block_probs,
            },
        })
    }

    /// Balanced two-community SBM with within/between probabilities.
    pub fn balanced_sbm(p_in: f64, p_out: f64) -> Result<Self> {
        let probs = Mat::from_fn(2, 2, |i, j| if i == j { p_in } else { p_out });
        Self::sbm(vec![0.5, 1.0], probs)
    }

    pub fn exp_distance(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::validation(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self {
            kind: GraphonKind::ExpDistance { beta },
        })
    }

    pub fn exp_abs_distance(beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::validation(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self {
            kind: GraphonKind::ExpAbsDistance { beta },
        })
    }

    pub fn step(values: Mat<f64>) -> Result<Self> {
        check_symmetric_unit(&values, "step graphon values")?;
        Ok(Self {
            kind: GraphonKind::Step { values },
        })
    }

    pub fn grid_sampled(values: Mat<f64>) -> Result<Self> {
        check_symmetric_unit(&values, "grid-sampled graphon values")?;
        Ok(Self {
            kind: GraphonKind::GridSampled { values },
        })
    }

    pub fn kind(&self) -> &GraphonKind {
        &self.kind
    }

    /// Evaluates `W(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> Result<f64> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.eval_unchecked(u, v))
    }

    pub(crate) fn eval_unchecked(&self, u: f64, v: f64) -> f64 {
        match &self.kind {
            GraphonKind::Constant { p } => *p,
            GraphonKind::Sbm {
                boundaries,
                block_probs,
            } => {
                let bi = sbm_block(boundaries, u);
                let bj = sbm_block(boundaries, v);
                block_probs[(bi, bj)]
            }
            GraphonKind::ExpDistance { beta } => (-beta * (u - v) * (u - v)).exp(),
            GraphonKind::ExpAbsDistance { beta } => (-beta * (u - v).abs()).exp(),
            GraphonKind::Step { values } | GraphonKind::GridSampled { values } => {
                let m = values.nrows();
                values[(block_index(u, m), block_index(v, m))]
            }
        }
    }

    /// Piecewise-constant view: block measures and block values, if this
    /// graphon is a step function (constant, SBM, step or grid-sampled).
    pub fn as_blocks(&self) -> Option<(Vec<f64>, Mat<f64>)> {
        match &self.kind {
            GraphonKind::Constant { p } => Some((vec![1.0], Mat::from_fn(1, 1, |_, _| *p))),
            GraphonKind::Sbm {
                boundaries,
                block_probs,
            } => {
                let mut prev = 0.0;
                let measures = boundaries
                    .iter()
                    .map(|&b| {
                        let m = b - prev;
                        prev = b;
                        m
                    })
                    .collect();
                Some((measures, block_probs.clone()))
            }
            GraphonKind::Step { values } | GraphonKind::GridSampled { values } => {
                let m = values.nrows();
                Some((vec![1.0 / m as f64; m], values.clone()))
            }
            GraphonKind::ExpDistance { .. } | GraphonKind::ExpAbsDistance { .. } => None,
        }
    }

    /// Block values of a regular-partition step representation, if any.
    pub fn step_values(&self) -> Option<&Mat<f64>> {
        match &self.kind {
            GraphonKind::Step { values } | GraphonKind::GridSampled { values } => Some(values),
            _ => None,
        }
    }

    /// Canonical one-line descriptor for closed-form families (`er:0.4`, `exp:2.3`, ...).
    /// Step and grid graphons have no inline form and return `None`.
    pub fn descriptor(&self) -> Option<String> {
        match &self.kind {
            GraphonKind::Constant { p } => Some(format!("er:{p}")),
            GraphonKind::Sbm {
                boundaries,
                block_probs,
            } => {
                let b: Vec<String> = boundaries.iter().map(|x| x.to_string()).collect();
                let m = block_probs.nrows();
                let mut p = Vec::with_capacity(m * m);
                for i in 0..m {
                    for j in 0..m {
                        p.push(block_probs[(i, j)].to_string());
                    }
                }
                Some(format!("sbm:{};{}", b.join(","), p.join(",")))
            }
            GraphonKind::ExpDistance { beta } => Some(format!("exp:{beta}")),
            GraphonKind::ExpAbsDistance { beta } => Some(format!("expabs:{beta}")),
            GraphonKind::Step { .. } | GraphonKind::GridSampled { .. } => None,
        }
    }
}

fn sbm_block(boundaries: &[f64], u: f64) -> usize {
    boundaries
        .iter()
        .position(|&b| u < b)
        .unwrap_or(boundaries.len() - 1)
}

impl fmt::Display for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.kind, self.descriptor()) {
            (_, Some(s)) => f.write_str(&s),
            (GraphonKind::Step { values }, None) => write!(f, "step[{} blocks]", values.nrows()),
            (GraphonKind::GridSampled { values }, None) => {
                write!(f, "grid[{}]", values.nrows())
            }
            _ => unreachable!(),
        }
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(format!("cannot parse {what} from {s:?}")))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|t| parse_f64(t, what)).collect()
}

impl FromStr for Graphon {
    type Err = Error;

    /// Parses the `family:params` mini-language. `step:` and `grid:` descriptors
    /// name a CSV matrix file and are resolved relative to the working directory.
    fn from_str(s: &str) -> Result<Self> {
        let (family, params) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("graphon descriptor {s:?} is not of the form family:params")))?;
        match family.trim() {
            "er" | "const" => Graphon::constant(parse_f64(params, "p")?),
            "exp" => Graphon::exp_distance(parse_f64(params, "beta")?),
            "expabs" => Graphon::exp_abs_distance(parse_f64(params, "beta")?),
            "sbm" => {
                let (b, p) = params.split_once(';').ok_or_else(|| {
                    Error::config("sbm descriptor is sbm:b1,..,bk;p11,p12,..,pkk (row-major)")
                })?;
                let boundaries = parse_list(b, "SBM boundary")?;
                let probs = parse_list(p, "SBM probability")?;
                let k = boundaries.len();
                if probs.len() != k * k {
                    return Err(Error::config(format!(
                        "sbm descriptor has {k} blocks but {} probabilities (need {})",
                        probs.len(),
                        k * k
                    )));
                }
                Graphon::sbm(boundaries, Mat::from_fn(k, k, |i, j| probs[i * k + j]))
            }
            "step" => Graphon::step(io::read_matrix_csv(Path::new(params.trim()))?),
            "grid" => Graphon::grid_sampled(io::read_matrix_csv(Path::new(params.trim()))?),
            other => Err(Error::config(format!("unknown graphon family {other:?}"))),
        }
    }
}

/// How latent node labels are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentMode {
    UniformIid,
    RegularGrid,
}

/// Latent positions `u_i` of sampled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentLabels {
    values: Vec<f64>,
    mode: LatentMode,
}

impl LatentLabels {
    pub fn new(values: Vec<f64>, mode: LatentMode) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("latent labels must be nonempty"));
        }
        for &u in &values {
            check_unit("latent label", u)?;
        }
        Ok(Self { values, mode })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mode(&self) -> LatentMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Labels sorted ascending. Relabelling nodes this way aligns node `i`
    /// with block `I_i` of the induced graphon.
    pub fn sorted(mut self) -> Self {
        self.values.sort_by(|a, b| a.total_cmp(b));
        self
    }
}

pub fn sample_latents(n: usize, mode: LatentMode, rng: &mut Rng) -> Result<LatentLabels> {
    if n == 0 {
        return Err(Error::domain("cannot sample zero latent labels"));
    }
    let values = match mode {
        LatentMode::UniformIid => (0..n).map(|_| rng.random::<f64>()).collect(),
        LatentMode::RegularGrid => (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
    };
    Ok(LatentLabels { values, mode })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `S_ij = W(u_i, u_j)`.
    Weighted,
    /// `S_ij = S_ji ~ Bernoulli(W(u_i, u_j))`.
    Bernoulli,
}

/// Samples a W-random graph on the given labels. The diagonal is zero and
/// each unordered pair is drawn once, row by row over the upper triangle.
pub fn sample_graph(w: &Graphon, labels: &LatentLabels, mode: SampleMode, rng: &mut Rng) -> Graph {
    let u = labels.values();
    let n = u.len();
    let mut s = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = w.eval_unchecked(u[i], u[j]);
            let value = match mode {
                SampleMode::Weighted => p,
                SampleMode::Bernoulli => {
                    if rng.random::<f64>() < p {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            s[(i, j)] = value;
            s[(j, i)] = value;
        }
    }
    Graph::from_validated(s)
}

/// Graphon induced by a graph: the step graphon with block values `S`.
pub fn induced_graphon(g: &Graph) -> Graphon {
    Graphon {
        kind: GraphonKind::Step {
            values: g.shift().clone(),
        },
    }
}

/// Samples `W` at the `resolution^2` regular-grid midpoints. The upper triangle
/// is evaluated and mirrored, so the result is exactly symmetric.
pub fn discretize(w: &Graphon, resolution: usize) -> Result<Graphon> {
    if resolution < 2 {
        return Err(Error::domain(format!("resolution must be >= 2, got {resolution}")));
    }
    Ok(Graphon {
        kind: GraphonKind::GridSampled {
            values: grid_matrix(w, resolution),
        },
    })
}

/// The `resolution x resolution` midpoint matrix of `W`.
pub(crate) fn grid_matrix(w: &Graphon, resolution: usize) -> Mat<f64> {
    let mid = |i: usize| (i as f64 + 0.5) / resolution as f64;
    let mut m = Mat::<f64>::zeros(resolution, resolution);
    for j in 0..resolution {
        for i in 0..=j {
            let v = w.eval_unchecked(mid(i), mid(j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn mat(rows: &[&[f64]]) -> Mat<f64> {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn eval_examples() {
        let er = Graphon::constant(0.4).unwrap();
        assert_eq!(er.eval(0.1, 0.9).unwrap(), 0.4);
        let exp = Graphon::exp_distance(2.3).unwrap();
        assert_eq!(exp.eval(0.37, 0.37).unwrap(), 1.0);
        let sbm = Graphon::balanced_sbm(0.8, 0.2).unwrap();
        assert_eq!(sbm.eval(0.25, 0.75).unwrap(), 0.2);
        assert_eq!(sbm.eval(0.25, 0.4).unwrap(), 0.8);
        assert_eq!(sbm.eval(0.5, 1.0).unwrap(), 0.8);
    }

    #[test]
    fn eval_rejects_out_of_domain() {
        let er = Graphon::constant(0.4).unwrap();
        assert!(matches!(er.eval(-0.1, 0.5), Err(Error::Domain(_))));
        assert!(matches!(er.eval(0.5, 1.01), Err(Error::Domain(_))));
    }

    #[test]
    fn step_blocks_are_right_open_except_last() {
        let w = Graphon::step(mat(&[&[0.0, 1.0], &[1.0, 0.5]])).unwrap();
        assert_eq!(w.eval(0.5, 0.0).unwrap(), 1.0);
        assert_eq!(w.eval(0.49, 0.0).unwrap(), 0.0);
        assert_eq!(w.eval(1.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn invalid_constructions() {
        assert!(Graphon::constant(1.2).is_err());
        assert!(Graphon::sbm(vec![0.6, 0.5, 1.0], Mat::zeros(3, 3)).is_err());
        assert!(Graphon::sbm(vec![0.5, 0.9], Mat::zeros(2, 2)).is_err());
        assert!(Graphon::step(mat(&[&[0.0, 1.0], &[0.5, 0.0]])).is_err());
        assert!(Graphon::exp_distance(-1.0).is_err());
    }

    #[test]
    fn induced_graphon_examples() {
        let g = Graph::new(mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        let w = induced_graphon(&g);
        assert_eq!(w.eval(0.1, 0.7).unwrap(), 1.0);
        assert_eq!(w.eval(0.1, 0.2).unwrap(), 0.0);
        assert_eq!(w.eval(0.8, 0.9).unwrap(), 0.0);

        let single = induced_graphon(&Graph::new(mat(&[&[0.0]])).unwrap());
        assert_eq!(single.eval(0.3, 0.9).unwrap(), 0.0);

        let path = Graph::new(mat(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]])).unwrap();
        let w = induced_graphon(&path);
        assert_eq!(w.eval(0.1, 0.5).unwrap(), 1.0);
        assert_eq!(w.eval(0.1, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn latent_examples() {
        let mut rng = rng_from_seed(1);
        let grid = sample_latents(3, LatentMode::RegularGrid, &mut rng).unwrap();
        let expected = [1.0 / 6.0, 0.5, 5.0 / 6.0];
        for (a, b) in grid.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let a = sample_latents(50, LatentMode::UniformIid, &mut rng_from_seed(9)).unwrap();
        let b = sample_latents(50, LatentMode::UniformIid, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
        assert!(sample_latents(0, LatentMode::UniformIid, &mut rng).is_err());

        let big = sample_latents(10_000, LatentMode::UniformIid, &mut rng).unwrap();
        let mean = big.values().iter().sum::<f64>() / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn sample_graph_extremes() {
        let mut rng = rng_from_seed(3);
        let labels = sample_latents(20, LatentMode::UniformIid, &mut rng).unwrap();
        let full = sample_graph(&Graphon::constant(1.0).unwrap(), &labels, SampleMode::Bernoulli, &mut rng);
        let empty_b = sample_graph(&Graphon::constant(0.0).unwrap(), &labels, SampleMode::Bernoulli, &mut rng);
        let empty_w = sample_graph(&Graphon::constant(0.0).unwrap(), &labels, SampleMode::Weighted, &mut rng);
        for i in 0..20 {
            for j in 0..20 {
                let off = if i == j { 0.0 } else { 1.0 };
                assert_eq!(full.shift()[(i, j)], off);
                assert_eq!(empty_b.shift()[(i, j)], 0.0);
                assert_eq!(empty_w.shift()[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn sbm_edge_density() {
        // Expected density 0.5*0.8 + 0.5*0.2 = 0.5, averaged over a few seeds.
        let w = Graphon::balanced_sbm(0.8, 0.2).unwrap();
        let mut total = 0.0;
        for seed in 0..3 {
            let mut rng = rng_from_seed(seed);
            let labels = sample_latents(2000, LatentMode::UniformIid, &mut rng).unwrap();
            total += sample_graph(&w, &labels, SampleMode::Bernoulli, &mut rng).edge_density();
        }
        assert!((total / 3.0 - 0.5).abs() < 0.02);
    }

    #[test]
    fn discretize_examples() {
        let d = discretize(&Graphon::constant(0.3).unwrap(), 5).unwrap();
        let v = d.step_values().unwrap();
        assert_eq!(v.nrows(), 5);
        assert!((0..5).all(|i| (0..5).all(|j| v[(i, j)] == 0.3)));

        let b = mat(&[&[0.1, 0.7, 0.2], &[0.7, 0.0, 0.9], &[0.2, 0.9, 0.4]]);
        let step = Graphon::step(b.clone()).unwrap();
        let fine = discretize(&step, 12).unwrap();
        let f = fine.step_values().unwrap();
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(f[(i, j)], b[(i / 4, j / 4)]);
            }
        }

        let exp = discretize(&Graphon::exp_distance(2.3).unwrap(), 100).unwrap();
        let e = exp.step_values().unwrap();
        let mut max = f64::MIN;
        let mut min = f64::MAX;
        for i in 0..100 {
            for j in 0..100 {
                max = max.max(e[(i, j)]);
                min = min.min(e[(i, j)]);
            }
        }
        assert_eq!(max, 1.0);
        assert!((min - (-2.3_f64 * 0.99 * 0.99).exp()).abs() < 1e-14);
        assert!(discretize(&Graphon::constant(0.3).unwrap(), 1).is_err());
    }

    #[test]
    fn descriptors_round_trip() {
        for s in ["er:0.4", "exp:2.3", "expabs:1.5", "sbm:0.5,1;0.8,0.2,0.2,0.8"] {
            let w: Graphon = s.parse().unwrap();
            assert_eq!(w.descriptor().unwrap(), s);
            let again: Graphon = w.descriptor().unwrap().parse().unwrap();
            assert_eq!(again, w);
        }
        assert!("foo:1".parse::<Graphon>().is_err());
        assert!("sbm:0.5,1;0.8".parse::<Graphon>().is_err());
        assert!("er".parse::<Graphon>().is_err());
    }
}
