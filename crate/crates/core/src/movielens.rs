//! Rating prediction with graph filters on a user-similarity network, and
//! transfer of filters trained on small subnetworks to the full network.
//!
//! Ratings are read in the MovieLens 100k `u.data` format. When the dataset is
//! not available, [`synthetic_ratings`] produces a data set of the same shape
//! from a latent-factor model.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use faer::{Mat, Side};
use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{trend_nonincreasing, TrendCheck};
use crate::filters::PolyFilter;
use crate::graph::Graph;
use crate::io::Table;
use crate::seed::{derive_seed, rng_from_seed};

pub const DEFAULT_K_NN: usize = 40;
pub const DEFAULT_LAMBDA_REG: f64 = 1e-3;
pub const FETCH_HINT: &str = "download MovieLens 100k with scripts/fetch_movielens.sh \
     (or from https://grouplens.org/datasets/movielens/100k/) and pass the path to u.data, \
     or run on synthetic data with --synthetic";

/// One observed rating (0-based ids).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rating {
    pub user: usize,
    pub movie: usize,
    pub value: f64,
}

/// Sparse user-by-movie ratings, sorted by `(user, movie)` with no repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingMatrix {
    n_users: usize,
    n_movies: usize,
    entries: Vec<Rating>,
    duplicates: usize,
}

impl RatingMatrix {
    /// Builds from raw triples; a repeated `(user, movie)` keeps the last value.
    pub fn new(n_users: usize, n_movies: usize, raw: Vec<Rating>) -> Result<Self> {
        let mut latest: HashMap<(usize, usize), (usize, f64)> = HashMap::with_capacity(raw.len());
        for (pos, r) in raw.iter().enumerate() {
            if r.user >= n_users || r.movie >= n_movies {
                return Err(Error::validation(format!(
                    "rating ({}, {}) outside {n_users} users x {n_movies} movies",
                    r.user, r.movie
                )));
            }
            if !(1.0..=5.0).contains(&r.value) {
                return Err(Error::validation(format!("rating {} outside [1, 5]", r.value)));
            }
            latest.insert((r.user, r.movie), (pos, r.value));
        }
        let duplicates = raw.len() - latest.len();
        let mut entries: Vec<Rating> = latest
            .into_iter()
            .map(|((user, movie), (_, value))| Rating { user, movie, value })
            .collect();
        entries.sort_by_key(|r| (r.user, r.movie));
        Ok(Self {
            n_users,
            n_movies,
            entries,
            duplicates,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_movies(&self) -> usize {
        self.n_movies
    }

    pub fn entries(&self) -> &[Rating] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of repeated pairs dropped when the matrix was built.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// Each user's `(movie, rating)` list in movie order.
    pub fn by_user(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.n_users];
        for r in &self.entries {
            out[r.user].push((r.movie, r.value));
        }
        out
    }

    /// Standard deviation of the ratings at the given entry positions.
    pub fn std_dev(&self, positions: &[usize]) -> f64 {
        let m = positions.len() as f64;
        let mean = positions.iter().map(|&i| self.entries[i].value).sum::<f64>() / m;
        (positions.iter().map(|&i| (self.entries[i].value - mean).powi(2)).sum::<f64>() / m).sqrt()
    }
}

/// Parses `user<TAB>item<TAB>rating<TAB>timestamp` lines with 1-based ids.
pub fn parse_ratings_str(text: &str) -> Result<RatingMatrix> {
    let mut raw = Vec::new();
    let (mut max_user, mut max_movie) = (0, 0);
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: line_no,
                message: "expected user, item, rating[, timestamp]".into(),
            });
        }
        let id = |s: &str, what: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse {
                    line: line_no,
                    message: format!("bad {what} id {s:?}"),
                }),
            }
        };
        let user = id(fields[0], "user")?;
        let movie = id(fields[1], "item")?;
        let value: f64 = fields[2].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("bad rating {:?}", fields[2]),
        })?;
        if !(1.0..=5.0).contains(&value) {
            return Err(Error::validation(format!("line {line_no}: rating {value} outside [1, 5]")));
        }
        max_user = max_user.max(user + 1);
        max_movie = max_movie.max(movie + 1);
        raw.push(Rating { user, movie, value });
    }
    if raw.is_empty() {
        return Err(Error::validation("ratings file has no entries"));
    }
    RatingMatrix::new(max_user, max_movie, raw)
}

pub fn parse_ratings(path: &Path) -> Result<RatingMatrix> {
    if !path.exists() {
        return Err(Error::MissingData {
            path: path.to_path_buf(),
            hint: FETCH_HINT.into(),
        });
    }
    parse_ratings_str(&std::fs::read_to_string(path)?)
}

/// Writes entries back in `u.data` layout (timestamps are written as 0).
pub fn format_ratings(r: &RatingMatrix) -> String {
    let mut out = String::new();
    for e in &r.entries {
        writeln!(out, "{}\t{}\t{}\t0", e.user + 1, e.movie + 1, e.value).unwrap();
    }
    out
}

/// Ratings from a latent-factor model with the MovieLens 100k shape: 943
/// users, 1682 movies, about 100k ratings, at least 20 per user and a
/// long-tailed movie popularity.
pub fn synthetic_ratings(seed: u64) -> RatingMatrix {
    const USERS: usize = 943;
    const MOVIES: usize = 1682;
    const FACTORS: usize = 4;
    let mut rng = rng_from_seed(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let user_factors: Vec<[f64; FACTORS]> = (0..USERS).map(|_| std::array::from_fn(|_| 0.6 * normal())).collect();
    let user_bias: Vec<f64> = (0..USERS).map(|_| 0.35 * normal()).collect();
    let movie_factors: Vec<[f64; FACTORS]> = (0..MOVIES).map(|_| std::array::from_fn(|_| 0.6 * normal())).collect();
    let movie_bias: Vec<f64> = (0..MOVIES).map(|_| 0.45 * normal()).collect();
    let mut rng = rng_from_seed(seed ^ 0x5EED);
    let popularity: Vec<f64> = (0..MOVIES).map(|m| 1.0 / (m as f64 + 15.0)).collect();
    let count_dist = Exp::new(1.0 / 86.0).expect("positive rate");
    let mut raw = Vec::new();
    for u in 0..USERS {
        let count = (20 + count_dist.sample(&mut rng) as usize).min(MOVIES / 2);
        let movies = index::sample_weighted(&mut rng, MOVIES, |m| popularity[m], count).expect("valid weights");
        let mut movies: Vec<usize> = movies.into_iter().collect();
        movies.sort_unstable();
        for m in movies {
            let affinity: f64 = (0..FACTORS).map(|f| user_factors[u][f] * movie_factors[m][f]).sum();
            let noise: f64 = 0.5 * rng.sample::<f64, _>(StandardNormal);
            let value = (3.55 + user_bias[u] + movie_bias[m] + affinity + noise).round().clamp(1.0, 5.0);
            raw.push(Rating { user: u, movie: m, value });
        }
    }
    RatingMatrix::new(USERS, MOVIES, raw).expect("synthetic ratings are valid")
}

/// Pearson correlation over co-rated movies; 0 with fewer than two co-rated
/// movies or zero variance on either side.
pub fn pearson_corated(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                pairs.push((a[i].1, b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    if pairs.len() < 2 {
        return 0.0;
    }
    let m = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / m;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// All pairwise user similarities (negative correlations clamped to 0).
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    values: Mat<f64>,
}

impl SimilarityMatrix {
    pub fn new(r: &RatingMatrix) -> Self {
        let users = r.by_user();
        let n = users.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| if j > i { pearson_corated(&users[i], &users[j]).max(0.0) } else { 0.0 })
                    .collect()
            })
            .collect();
        let values = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => rows[i][j],
            std::cmp::Ordering::Greater => rows[j][i],
            std::cmp::Ordering::Equal => 0.0,
        });
        Self { values }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[(a, b)]
    }
}

/// How the asymmetric nearest-neighbour relation is made symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetrize {
    Max,
    Mean,
}

impl std::str::FromStr for Symmetrize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "mean" => Ok(Self::Mean),
            _ => Err(Error::config(format!("symmetrize must be max or mean, got {s:?}"))),
        }
    }
}

/// Similarity graph over a subset of users (local node `i` is `users[i]`).
#[derive(Debug, Clone, PartialEq)]
pub struct UserNetwork {
    graph: Graph,
    users: Vec<usize>,
}

impl UserNetwork {
    /// Wraps an existing graph; `users[i]` is the rating-matrix id of node `i`.
    pub fn from_graph(graph: Graph, users: Vec<usize>) -> Result<Self> {
        Error::check_dim(graph.n(), users.len())?;
        Ok(Self { graph, users })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn users(&self) -> &[usize] {
        &self.users
    }

    pub fn n(&self) -> usize {
        self.users.len()
    }
}

/// Keeps each user's `k_nn` most similar users within the subset, symmetrizes
/// and divides by the largest weight.
pub fn build_user_network(
    sim: &SimilarityMatrix,
    users: &[usize],
    k_nn: usize,
    symmetrize: Symmetrize,
) -> Result<UserNetwork> {
    let n = users.len();
    if n < 2 {
        return Err(Error::domain("a user network needs at least 2 users"));
    }
    let mut directed = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let mut candidates: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sim.get(users[i], users[j]), j))
            .filter(|&(s, _)| s > 0.0)
            .collect();
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(s, j) in candidates.iter().take(k_nn) {
            directed[(i, j)] = s;
        }
    }
    let mut s = Mat::from_fn(n, n, |i, j| match symmetrize {
        Symmetrize::Max => directed[(i, j)].max(directed[(j, i)]),
        Symmetrize::Mean => 0.5 * (directed[(i, j)] + directed[(j, i)]),
    });
    let max = (0..n).flat_map(|j| s.col_as_slice(j).to_vec()).fold(0.0_f64, f64::max);
    if max > 0.0 {
        s = Mat::from_fn(n, n, |i, j| s[(i, j)] / max);
    }
    UserNetwork::from_graph(Graph::new(s)?, users.to_vec())
}

/// Filter taps plus the offset subtracted from ratings before filtering.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFilter {
    pub taps: PolyFilter,
    pub offset: f64,
}

/// Shift-power features of one target entry.
#[derive(Debug, Clone)]
struct EntryFeatures {
    /// `[S^k x]_u` with the raw rating signal `x`.
    signal: Vec<f64>,
    /// `[S^k b]_u` with the indicator `b` of observed inputs.
    mask: Vec<f64>,
    /// `[S^k]_uu`, needed to zero the target entry.
    diag: Vec<f64>,
    /// Whether the target rating is part of the input signal.
    in_input: bool,
    value: f64,
}

impl EntryFeatures {
    /// `[S^k x_c]_u` where `x_c` is the offset-centered input with the target
    /// entry zeroed.
    fn row(&self, order: usize, offset: f64) -> Vec<f64> {
        (0..=order)
            .map(|k| {
                let mut f = self.signal[k] - offset * self.mask[k];
                if self.in_input {
                    f -= self.diag[k] * (self.value - offset);
                }
                f
            })
            .collect()
    }
}

/// Features of `targets` on `net`, with the graph signal built from the
/// `input` entries of the network's users.
fn entry_features(
    net: &UserNetwork,
    r: &RatingMatrix,
    input: &[usize],
    targets: &[usize],
    order: usize,
) -> Result<Vec<EntryFeatures>> {
    let n = net.n();
    let mut local = vec![usize::MAX; r.n_users()];
    for (i, &u) in net.users().iter().enumerate() {
        local[u] = i;
    }
    let mut x = Mat::<f64>::zeros(n, r.n_movies());
    let mut b = Mat::<f64>::zeros(n, r.n_movies());
    let mut is_input = vec![false; r.len()];
    for &e in input {
        let rating = r.entries[e];
        if local[rating.user] != usize::MAX {
            x[(local[rating.user], rating.movie)] = rating.value;
            b[(local[rating.user], rating.movie)] = 1.0;
            is_input[e] = true;
        }
    }
    let mut out: Vec<EntryFeatures> = targets
        .iter()
        .map(|&e| {
            let rating = r.entries[e];
            if local[rating.user] == usize::MAX {
                return Err(Error::validation(format!("user {} is not in the network", rating.user)));
            }
            Ok(EntryFeatures {
                signal: Vec::with_capacity(order + 1),
                mask: Vec::with_capacity(order + 1),
                diag: Vec::with_capacity(order + 1),
                in_input: is_input[e],
                value: rating.value,
            })
        })
        .collect::<Result<_>>()?;
    let s = net.graph().shift();
    let mut power = Mat::<f64>::identity(n, n);
    for k in 0..=order {
        for (f, &e) in out.iter_mut().zip(targets) {
            let rating = r.entries[e];
            let u = local[rating.user];
            f.signal.push(x[(u, rating.movie)]);
            f.mask.push(b[(u, rating.movie)]);
            f.diag.push(power[(u, u)]);
        }
        if k < order {
            x = s * &x;
            b = s * &b;
            power = s * &power;
        }
    }
    Ok(out)
}

fn solve_ridge(rows: &[Vec<f64>], targets: &[f64], lambda_reg: f64) -> Result<Vec<f64>> {
    let p = rows.first().map_or(0, Vec::len);
    let mut a = Mat::<f64>::zeros(p, p);
    let mut rhs = Mat::<f64>::zeros(p, 1);
    for (row, &y) in rows.iter().zip(targets) {
        for i in 0..p {
            rhs[(i, 0)] += row[i] * y;
            for j in 0..p {
                a[(i, j)] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        a[(i, i)] += lambda_reg;
    }
    let llt = a.llt(Side::Lower).map_err(|_| {
        Error::Numeric(format!(
            "normal equations are singular with ridge {lambda_reg}; increase lambda_reg"
        ))
    })?;
    let l = llt.L();
    // Forward then backward substitution with the Cholesky factor.
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[(i, k)] * z[k]).sum();
        z[i] = (rhs[(i, 0)] - s) / l[(i, i)];
    }
    let mut h = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = ((i + 1)..p).map(|k| l[(k, i)] * h[k]).sum();
        h[i] = (z[i] - s) / l[(i, i)];
    }
    Ok(h)
}

fn fit_from_features(features: &[EntryFeatures], order: usize, lambda_reg: f64, center: bool) -> Result<FittedFilter> {
    if features.is_empty() {
        return Err(Error::validation("no training ratings"));
    }
    let offset = if center {
        features.iter().map(|f| f.value).sum::<f64>() / features.len() as f64
    } else {
        0.0
    };
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.row(order, offset)).collect();
    let targets: Vec<f64> = features.iter().map(|f| f.value - offset).collect();
    Ok(FittedFilter {
        taps: PolyFilter::new(solve_ridge(&rows, &targets, lambda_reg)?)?,
        offset,
    })
}

fn rmse_from_features(features: &[EntryFeatures], fitted: &FittedFilter) -> f64 {
    let order = fitted.taps.order();
    let sse: f64 = features
        .iter()
        .map(|f| {
            let row = f.row(order, fitted.offset);
            let pred = fitted.offset + fitted.taps.taps().iter().zip(&row).map(|(h, x)| h * x).sum::<f64>();
            (pred.clamp(1.0, 5.0) - f.value).powi(2)
        })
        .sum();
    (sse / features.len() as f64).sqrt()
}

/// Ridge least-squares taps `h_0..h_K` predicting each training rating from
/// the filtered rating signal of its movie with that rating removed. With
/// `center`, the mean training rating is subtracted before filtering and added
/// back to predictions.
pub fn fit_filter_taps(
    net: &UserNetwork,
    r: &RatingMatrix,
    train: &[usize],
    order: usize,
    lambda_reg: f64,
    center: bool,
) -> Result<FittedFilter> {
    let in_net: Vec<usize> = member_entries(net, r, train);
    let features = entry_features(net, r, &in_net, &in_net, order)?;
    fit_from_features(&features, order, lambda_reg, center)
}

/// RMSE on `eval` entries of predictions (clamped to `[1, 5]`) made from the
/// `input` entries of the network's users.
pub fn predict_and_rmse(
    net: &UserNetwork,
    fitted: &FittedFilter,
    r: &RatingMatrix,
    input: &[usize],
    eval: &[usize],
) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::validation("no evaluation ratings"));
    }
    let features = entry_features(net, r, input, eval, fitted.taps.order())?;
    Ok(rmse_from_features(&features, fitted))
}

fn member_entries(net: &UserNetwork, r: &RatingMatrix, positions: &[usize]) -> Vec<usize> {
    let mut member = vec![false; r.n_users()];
    for &u in net.users() {
        member[u] = true;
    }
    positions.iter().copied().filter(|&e| member[r.entries[e].user]).collect()
}

/// Random train/eval partition of the entry positions (both sorted).
pub fn split_entries(r: &RatingMatrix, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let n_eval = ((1.0 - train_fraction) * r.len() as f64).round() as usize;
    let mut eval = order[..n_eval].to_vec();
    let mut train = order[n_eval..].to_vec();
    eval.sort_unstable();
    train.sort_unstable();
    (train, eval)
}

/// Settings of the transfer experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MovieConfig {
    /// Path to `u.data`; `None` runs on [`synthetic_ratings`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    pub n_list: Vec<usize>,
    /// Filter orders `K` (taps `h_0..h_K`).
    pub taps: Vec<usize>,
    pub k_nn: usize,
    pub lambda_reg: f64,
    pub symmetrize: Symmetrize,
    pub train_fraction: f64,
    pub center: bool,
    pub split_seed: u64,
    pub master_seed: u64,
    pub synthetic_seed: u64,
}

impl Default for MovieConfig {
    fn default() -> Self {
        Self {
            data: None,
            n_list: vec![50, 100, 200, 400, 600, 800],
            taps: vec![1, 2, 3],
            k_nn: DEFAULT_K_NN,
            lambda_reg: DEFAULT_LAMBDA_REG,
            symmetrize: Symmetrize::Max,
            train_fraction: 0.9,
            center: true,
            split_seed: 1,
            master_seed: crate::experiments::DEFAULT_MASTER_SEED,
            synthetic_seed: 943,
        }
    }
}

impl MovieConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.n_list[0] < 2 {
            return Err(Error::config("n_list must be strictly ascending and start at >= 2"));
        }
        if self.taps.is_empty() {
            return Err(Error::config("taps list is empty"));
        }
        if self.k_nn == 0 {
            return Err(Error::config("k_nn must be positive"));
        }
        if !(self.lambda_reg >= 0.0) {
            return Err(Error::config("lambda_reg must be nonnegative"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::config("train_fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Ratings from `data`, or synthetic ones when no path is set.
    pub fn ratings(&self) -> Result<RatingMatrix> {
        match &self.data {
            Some(path) => parse_ratings(path),
            None => Ok(synthetic_ratings(self.synthetic_seed)),
        }
    }
}

/// Transfer results: base RMSE per order and mean relative RMSE difference
/// per `(order, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MovieReport {
    pub n_list: Vec<usize>,
    pub taps: Vec<usize>,
    pub base_rmse: Vec<f64>,
    /// `relative[k][i]` for order `taps[k]` and size `n_list[i]`.
    pub relative: Vec<Vec<f64>>,
    pub groups: Vec<usize>,
    pub source: String,
}

impl MovieReport {
    pub fn to_table(&self) -> Table {
        let mut header = vec!["K".to_string(), "base_rmse".to_string()];
        header.extend(self.n_list.iter().map(|n| format!("n{n}")));
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        let groups: Vec<String> = self.groups.iter().map(|g| g.to_string()).collect();
        let mut t = Table::new(&header_refs)
            .with_meta("experiment", "movie")
            .with_meta("metric", "relative_rmse_difference")
            .with_meta("source", &self.source)
            .with_meta("groups", groups.join(" "));
        for (k, &order) in self.taps.iter().enumerate() {
            let mut row = vec![order.to_string(), self.base_rmse[k].to_string()];
            row.extend(self.relative[k].iter().map(|v| v.to_string()));
            t.push(row);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }
}

/// Trains filters on `⌊U/n⌋` disjoint random user groups of size `n`, applies
/// them to the full network and reports `|RMSE − RMSE_base| / RMSE_base`
/// averaged over groups, where the base filter is trained on the full network.
pub fn exp_movie(cfg: &MovieConfig) -> Result<MovieReport> {
    cfg.validate()?;
    let ratings = cfg.ratings()?;
    let source = match &cfg.data {
        Some(p) => p.display().to_string(),
        None => format!("synthetic:{}", cfg.synthetic_seed),
    };
    exp_movie_on(&ratings, cfg, source)
}

pub fn exp_movie_on(r: &RatingMatrix, cfg: &MovieConfig, source: String) -> Result<MovieReport> {
    cfg.validate()?;
    let users = r.n_users();
    if let Some(&n) = cfg.n_list.iter().find(|&&n| n > users) {
        return Err(Error::config(format!("group size {n} exceeds the {users} users")));
    }
    let order = *cfg.taps.iter().max().expect("validated");
    let (train, eval) = split_entries(r, cfg.train_fraction, cfg.split_seed);
    let sim = SimilarityMatrix::new(r);
    let everyone: Vec<usize> = (0..users).collect();
    let full = build_user_network(&sim, &everyone, cfg.k_nn, cfg.symmetrize)?;
    let eval_features = entry_features(&full, r, &train, &eval, order)?;
    let train_features = entry_features(&full, r, &train, &train, order)?;
    let base: Vec<FittedFilter> = cfg
        .taps
        .iter()
        .map(|&k| fit_from_features(&train_features, k, cfg.lambda_reg, cfg.center))
        .collect::<Result<_>>()?;
    let base_rmse: Vec<f64> = base.iter().map(|f| rmse_from_features(&eval_features, f)).collect();

    let mut groups = Vec::with_capacity(cfg.n_list.len());
    let mut jobs = Vec::new();
    for &n in &cfg.n_list {
        let mut perm = everyone.clone();
        perm.shuffle(&mut rng_from_seed(derive_seed(cfg.master_seed, n as u64, 0)));
        let count = users / n;
        groups.push(count);
        for g in 0..count {
            let mut members = perm[g * n..(g + 1) * n].to_vec();
            members.sort_unstable();
            jobs.push((n, members));
        }
    }
    // Each job yields the relative difference for every order.
    let per_job: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|(_, members)| {
            let net = build_user_network(&sim, members, cfg.k_nn, cfg.symmetrize)?;
            let own = member_entries(&net, r, &train);
            let features = entry_features(&net, r, &own, &own, order)?;
            cfg.taps
                .iter()
                .enumerate()
                .map(|(k, &taps)| {
                    let fitted = fit_from_features(&features, taps, cfg.lambda_reg, cfg.center)?;
                    let rmse = rmse_from_features(&eval_features, &fitted);
                    Ok((rmse - base_rmse[k]).abs() / base_rmse[k])
                })
                .collect()
        })
        .collect();
    let mut relative = vec![vec![0.0; cfg.n_list.len()]; cfg.taps.len()];
    for ((n, _), result) in jobs.iter().zip(per_job) {
        let i = cfg.n_list.iter().position(|m| m == n).expect("listed size");
        for (k, v) in result?.into_iter().enumerate() {
            relative[k][i] += v / groups[i] as f64;
        }
    }
    Ok(MovieReport {
        n_list: cfg.n_list.clone(),
        taps: cfg.taps.clone(),
        base_rmse,
        relative,
        groups,
        source,
    })
}

/// Relative violations allowed by [`trend`]; one group at the largest sizes
/// makes this experiment noisier than the synthetic ones.
pub const MOVIE_TREND_TOLERANCE: f64 = 0.20;

/// Nonincreasing check of one row of relative differences.
pub fn trend(values: &[f64]) -> TrendCheck {
    trend_nonincreasing(values, MOVIE_TREND_TOLERANCE)
}
