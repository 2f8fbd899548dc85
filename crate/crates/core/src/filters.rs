//! Polynomial (shift-invariant) graph filters, spectral filters on graphs and
//! graphons, Lipschitz checks and bandlimiting.
//!
//! Spectral filters take a function `h` on `[-1, 1]`. On a graph it is applied
//! to normalized eigenvalues `λ_j(S)/n`; on a graphon to the operator
//! eigenvalues `λ_j(T_W)` directly. Polynomial taps act on the raw shift `S`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{gft, igft, Graph, GraphSignal, SpectralBasis};
use crate::spectral::{iwft, wft, GraphonBasis, GraphonSignal};

/// Maximum polynomial order accepted for taps.
pub const MAX_ORDER: usize = 64;

/// Grid size used when validating a declared Lipschitz constant.
pub const LIPSCHITZ_GRID: usize = 10_000;

const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Taps `h_0..h_K` of `H(S) = Σ_k h_k S^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFilter {
    taps: Vec<f64>,
}

impl PolyFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::validation("a polynomial filter needs at least one tap"));
        }
        if taps.len() > MAX_ORDER + 1 {
            return Err(Error::validation(format!(
                "{} taps exceed the maximum order {MAX_ORDER}",
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::validation("filter taps must be finite"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn order(&self) -> usize {
        self.taps.len() - 1
    }
}

/// Frequency response `h(λ) = Σ_k h_k λ^k` (Horner).
pub fn poly_freq_response(f: &PolyFilter, lambda: f64) -> f64 {
    horner(&f.taps, lambda)
}

fn horner(taps: &[f64], x: f64) -> f64 {
    taps.iter().rev().fold(0.0, |acc, &t| acc * x + t)
}

/// `y = Σ_k h_k S^k x`, accumulated over successive shifts of `x`.
pub fn apply_poly(g: &Graph, f: &PolyFilter, x: &GraphSignal) -> Result<GraphSignal> {
    Error::check_dim(g.n(), x.len())?;
    let mut shifted = x.clone();
    let mut y: Vec<f64> = x.values().iter().map(|v| f.taps[0] * v).collect();
    for &tap in &f.taps[1..] {
        shifted = g.apply_shift(&shifted)?;
        for (yi, si) in y.iter_mut().zip(shifted.values()) {
            *yi += tap * si;
        }
    }
    GraphSignal::new(y)
}

/// Named closed-form responses.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    Constant(f64),
    /// `h(λ) = λ`.
    Identity,
    /// Passes `|λ| ≥ cutoff` (the smooth, slowly varying eigenvectors), blocks
    /// `|λ| ≤ cutoff − width`, with a linear ramp in between. Lipschitz
    /// constant `1/width`.
    Lowpass { cutoff: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterShape {
    Polynomial(Vec<f64>),
    /// Linear interpolation between sorted `(λ, h)` breakpoints, constant
    /// beyond the first and last breakpoint.
    PiecewiseLinear(Vec<(f64, f64)>),
    Builtin(Builtin),
    /// `factor · inner(λ)`.
    Scaled { inner: Box<FilterShape>, factor: f64 },
}

impl FilterShape {
    fn eval(&self, lambda: f64) -> f64 {
        match self {
            FilterShape::Polynomial(taps) => horner(taps, lambda),
            FilterShape::PiecewiseLinear(points) => piecewise_linear(points, lambda),
            FilterShape::Builtin(Builtin::Constant(c)) => *c,
            FilterShape::Builtin(Builtin::Identity) => lambda,
            FilterShape::Builtin(Builtin::Lowpass { cutoff, width }) => {
                ((lambda.abs() - (cutoff - width)) / width).clamp(0.0, 1.0)
            }
            FilterShape::Scaled { inner, factor } => factor * inner.eval(lambda),
        }
    }
}

fn piecewise_linear(points: &[(f64, f64)], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = points.partition_point(|p| p.0 <= x);
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// A spectral response `h: [-1, 1] -> R` with an optional declared Lipschitz
/// constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFilterFn {
    shape: FilterShape,
    lipschitz: Option<f64>,
}

impl SpectralFilterFn {
    pub fn new(shape: FilterShape) -> Result<Self> {
        match &shape {
            FilterShape::Polynomial(taps) => {
                PolyFilter::new(taps.clone())?;
            }
            FilterShape::PiecewiseLinear(points) => {
                if points.is_empty() {
                    return Err(Error::validation("piecewise-linear filter needs breakpoints"));
                }
                if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::validation("breakpoints must be strictly increasing"));
                }
                if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                    return Err(Error::validation("breakpoints must be finite"));
                }
            }
            FilterShape::Builtin(Builtin::Lowpass { cutoff, width }) => {
                if !(*width > 0.0 && *cutoff >= *width && *cutoff <= 1.0) {
                    return Err(Error::validation(format!(
                        "lowpass needs 0 < width <= cutoff <= 1, got cutoff={cutoff}, width={width}"
                    )));
                }
            }
            FilterShape::Builtin(Builtin::Constant(c)) if !c.is_finite() => {
                return Err(Error::validation("constant response must be finite"));
            }
            _ => {}
        }
        Ok(Self {
            shape,
            lipschitz: None,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self::new(FilterShape::Builtin(Builtin::Constant(c))).expect("finite constant")
    }

    pub fn identity() -> Self {
        Self {
            shape: FilterShape::Builtin(Builtin::Identity),
            lipschitz: None,
        }
    }

    pub fn lowpass(cutoff: f64, width: f64) -> Result<Self> {
        Self::new(FilterShape::Builtin(Builtin::Lowpass { cutoff, width }))?.with_lipschitz(1.0 / width)
    }

    pub fn polynomial(taps: Vec<f64>) -> Result<Self> {
        Self::new(FilterShape::Polynomial(taps))
    }

    pub fn piecewise_linear(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(FilterShape::PiecewiseLinear(points))
    }

    /// Response on normalized eigenvalues equivalent to taps acting on the raw
    /// shift of an `n`-node graph: `h(λ) = Σ_k h_k (nλ)^k`.
    pub fn from_graph_taps(f: &PolyFilter, n: usize) -> Self {
        let scaled = f
            .taps()
            .iter()
            .enumerate()
            .map(|(k, t)| t * (n as f64).powi(k as i32))
            .collect();
        Self {
            shape: FilterShape::Polynomial(scaled),
            lipschitz: None,
        }
    }

    /// Declares a Lipschitz constant, verified on a uniform grid of `[-1, 1]`.
    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::validation(format!("Lipschitz constant must be >= 0, got {l}")));
        }
        let report = lipschitz_verify(&self, l, LIPSCHITZ_GRID)?;
        if !report.holds {
            return Err(Error::validation(format!(
                "response is not {l}-Lipschitz (observed slope {})",
                report.max_ratio
            )));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }

    pub fn shape(&self) -> &FilterShape {
        &self.shape
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Evaluates `h(λ)` for `λ` in `[-1, 1]`.
    pub fn try_eval(&self, lambda: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("filter argument {lambda} outside [-1, 1]")));
        }
        Ok(self.shape.eval(lambda))
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.shape.eval(lambda)
    }

    /// `h(0)`.
    pub fn h0(&self) -> f64 {
        self.shape.eval(0.0)
    }

    /// `h / max|h|` over a 10^4-point grid of `[-1, 1]`. Opt-in; filters are
    /// never normalized implicitly.
    pub fn normalized(&self) -> Result<Self> {
        let peak = grid(LIPSCHITZ_GRID)
            .map(|x| self.eval(x).abs())
            .fold(0.0_f64, f64::max);
        if peak == 0.0 {
            return Err(Error::domain("cannot normalize an identically zero response"));
        }
        Ok(Self {
            shape: FilterShape::Scaled {
                inner: Box::new(self.shape.clone()),
                factor: 1.0 / peak,
            },
            lipschitz: self.lipschitz.map(|l| l / peak),
        })
    }
}

fn grid(points: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 / (points - 1) as f64;
    (0..points).map(move |i| if i + 1 == points { 1.0 } else { -1.0 + i as f64 * step })
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FilterShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterShape::Polynomial(taps) => write!(f, "poly:{}", fmt_list(taps)),
            FilterShape::PiecewiseLinear(points) => {
                let items: Vec<String> = points.iter().map(|(a, b)| format!("{a}:{b}")).collect();
                write!(f, "pwl:{}", items.join(","))
            }
            FilterShape::Builtin(Builtin::Constant(c)) => write!(f, "const:{c}"),
            FilterShape::Builtin(Builtin::Identity) => write!(f, "identity"),
            FilterShape::Builtin(Builtin::Lowpass { cutoff, width }) => write!(f, "lowpass:{cutoff},{width}"),
            FilterShape::Scaled { inner, factor } => write!(f, "scaled:{factor}*{inner}"),
        }
    }
}

impl fmt::Display for SpectralFilterFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)?;
        if let Some(l) = self.lipschitz {
            write!(f, ";L={l}")?;
        }
        Ok(())
    }
}

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::config(format!("cannot parse number from {s:?}")))
}

fn parse_shape(s: &str) -> Result<FilterShape> {
    let s = s.trim();
    if s == "identity" {
        return Ok(FilterShape::Builtin(Builtin::Identity));
    }
    if let Some(rest) = s.strip_prefix("scaled:") {
        let (factor, inner) = rest
            .split_once('*')
            .ok_or_else(|| Error::config("scaled descriptor is scaled:<factor>*<inner>"))?;
        return Ok(FilterShape::Scaled {
            inner: Box::new(parse_shape(inner)?),
            factor: num(factor)?,
        });
    }
    let (family, params) = s
        .split_once(':')
        .ok_or_else(|| Error::config(format!("filter descriptor {s:?} is not of the form family:params")))?;
    match family {
        "poly" => Ok(FilterShape::Polynomial(params.split(',').map(num).collect::<Result<_>>()?)),
        "const" => Ok(FilterShape::Builtin(Builtin::Constant(num(params)?))),
        "lowpass" => {
            let (c, w) = params
                .split_once(',')
                .ok_or_else(|| Error::config("lowpass descriptor is lowpass:<cutoff>,<width>"))?;
            Ok(FilterShape::Builtin(Builtin::Lowpass {
                cutoff: num(c)?,
                width: num(w)?,
            }))
        }
        "pwl" => {
            let points = params
                .split(',')
                .map(|p| {
                    let (a, b) = p
                        .split_once(':')
                        .ok_or_else(|| Error::config(format!("breakpoint {p:?} is not lambda:value")))?;
                    Ok((num(a)?, num(b)?))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FilterShape::PiecewiseLinear(points))
        }
        other => Err(Error::config(format!("unknown filter family {other:?}"))),
    }
}

impl FromStr for SpectralFilterFn {
    type Err = Error;

    /// Parses `poly:1,0.5`, `pwl:-1:0,0.5:1`, `lowpass:0.3,0.1`, `const:1`,
    /// `identity` or `scaled:<f>*<descriptor>`, optionally followed by `;L=<constant>`.
    fn from_str(s: &str) -> Result<Self> {
        let (shape, lip) = match s.split_once(";L=") {
            Some((a, b)) => (a, Some(num(b)?)),
            None => (s, None),
        };
        let mut filter = Self::new(parse_shape(shape)?)?;
        if let FilterShape::Builtin(Builtin::Lowpass { width, .. }) = filter.shape {
            filter.lipschitz = Some(1.0 / width);
        }
        match lip {
            Some(l) => filter.with_lipschitz(l),
            None => Ok(filter),
        }
    }
}

/// `y = Σ_j h(λ_j(S)/n) x̂_j v_j`.
pub fn apply_spectral_graph_filter(basis: &SpectralBasis, h: &SpectralFilterFn, x: &GraphSignal) -> Result<GraphSignal> {
    let mut coeffs = gft(basis, x)?;
    let n = basis.n() as f64;
    let values = basis.spectrum().values();
    for (c, a) in coeffs.as_mut_slice().iter_mut().enumerate() {
        let lambda = values[c] / n;
        assert!(
            lambda.abs() <= 1.0 + 1e-12,
            "normalized eigenvalue {lambda} outside [-1, 1]; shift entries must lie in [0, 1]"
        );
        *a *= h.eval(lambda.clamp(-1.0, 1.0));
    }
    igft(basis, &coeffs)
}

/// `γ = Σ_{retained j} h(λ_j) φ̂_j φ_j`.
pub fn apply_graphon_filter(basis: &GraphonBasis, h: &SpectralFilterFn, phi: &GraphonSignal) -> Result<GraphonSignal> {
    let mut coeffs = wft(basis, phi)?;
    let values = basis.spectrum().values();
    for (c, a) in coeffs.as_mut_slice().iter_mut().enumerate() {
        *a *= h.eval(values[c].clamp(-1.0, 1.0));
    }
    iwft(basis, &coeffs)
}

/// Keeps only the components with `|λ_j| ≥ c`.
pub fn bandlimit(basis: &GraphonBasis, bandwidth: f64, phi: &GraphonSignal) -> Result<GraphonSignal> {
    let mut coeffs = wft(basis, phi)?;
    let values = basis.spectrum().values();
    for (c, a) in coeffs.as_mut_slice().iter_mut().enumerate() {
        if values[c].abs() < bandwidth {
            *a = 0.0;
        }
    }
    iwft(basis, &coeffs)
}

/// Graph counterpart of [`bandlimit`] on normalized eigenvalues `λ_j(S)/n`.
pub fn bandlimit_graph(basis: &SpectralBasis, bandwidth: f64, x: &GraphSignal) -> Result<GraphSignal> {
    let mut coeffs = gft(basis, x)?;
    let n = basis.n() as f64;
    let values = basis.spectrum().values();
    for (c, a) in coeffs.as_mut_slice().iter_mut().enumerate() {
        if (values[c] / n).abs() < bandwidth {
            *a = 0.0;
        }
    }
    igft(basis, &coeffs)
}

/// Spectral threshold `c = (1 − |h_0|) / (L (2‖φ‖/ε + 1))` separating the
/// eigenvalues on which a Lipschitz filter's response is controlled.
/// `epsilon = ∞` is accepted and gives `(1 − |h_0|)/L`.
pub fn critical_bandwidth(h0: f64, lipschitz: f64, signal_norm: f64, epsilon: f64) -> Result<f64> {
    if !(lipschitz > 0.0) {
        return Err(Error::domain(format!("Lipschitz constant must be > 0, got {lipschitz}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(h0.abs() < 1.0) {
        return Err(Error::domain(format!("|h0| must be < 1, got {h0}")));
    }
    if !(signal_norm >= 0.0) {
        return Err(Error::domain("signal norm must be >= 0"));
    }
    Ok((1.0 - h0.abs()) / (lipschitz * (2.0 * signal_norm / epsilon + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    pub holds: bool,
    /// Largest `|h(λ) − h(λ')| / |λ − λ'|` over adjacent grid points.
    pub max_ratio: f64,
}

/// Checks `|h(λ) − h(λ')| ≤ L|λ − λ'|` (plus 1e-9 slack) on adjacent points of
/// a uniform grid of `[-1, 1]`.
pub fn lipschitz_verify(h: &SpectralFilterFn, lipschitz: f64, grid_points: usize) -> Result<LipschitzReport> {
    if grid_points < 2 {
        return Err(Error::domain("need at least two grid points"));
    }
    let xs: Vec<f64> = grid(grid_points).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| h.eval(x)).collect();
    let mut report = LipschitzReport {
        holds: true,
        max_ratio: 0.0,
    };
    for k in 1..xs.len() {
        let dx = xs[k] - xs[k - 1];
        let dy = (ys[k] - ys[k - 1]).abs();
        report.max_ratio = report.max_ratio.max(dy / dx);
        if dy > lipschitz * dx + LIPSCHITZ_SLACK {
            report.holds = false;
        }
    }
    Ok(report)
}
