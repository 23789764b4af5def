//! The estimation pipeline: discretize, penalized EM over 2^K Bernoulli
//! classes with a grouped truncated lasso penalty, median-threshold graph
//! extraction, pseudo-sample GES for the latent graph, and BIC selection
//! of the latent count.

mod ges;

use crate::configs;
use crate::graph::{BipartiteGraph, Cpdag};
use crate::model::{CondTable, LatentProportions, ModelError};
use crate::simulate::{ColumnType, Dataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors for the estimation pipeline.
#[derive(Debug, Error)]
pub enum EstimateError {
    /// Empty data or an unusable latent count.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// Invalid configuration values.
    #[error("invalid config: {0}")]
    Config(String),
    /// Propagated model error.
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// θ values are kept inside [1e-6, 1 − 1e-6] so the log-likelihood stays
/// finite.
pub const THETA_CLAMP: f64 = 1e-6;

/// Tuning and convergence knobs of the pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Penalty weights λ̃2 tried on the grid.
    pub lambda2_grid: Vec<f64>,
    /// Truncation levels τ tried on the grid.
    pub tau_grid: Vec<f64>,
    /// Median threshold ε for graph extraction.
    pub eps_gamma: f64,
    /// Pseudo-sample count for the latent-graph step.
    pub n_pseudo: usize,
    /// EM iteration cap.
    pub max_iters: usize,
    /// Stop when ‖π_t − π_{t−1}‖₂ falls below this.
    pub tol_pi: f64,
    /// (truth weight, noise weight) of the oracle-blend initializer.
    pub init_blend: (f64, f64),
    /// Restart count for the no-oracle initializer.
    pub n_restarts: usize,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            lambda2_grid: vec![1.0, 10.0, 100.0, 1000.0],
            tau_grid: vec![0.05, 0.1],
            eps_gamma: 0.125,
            n_pseudo: 2000,
            max_iters: 10,
            tol_pi: 0.005,
            init_blend: (0.7, 0.3),
            n_restarts: 20,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<(), EstimateError> {
        if self.lambda2_grid.is_empty() || self.tau_grid.is_empty() {
            return Err(EstimateError::Config("empty tuning grid".into()));
        }
        if self.lambda2_grid.iter().any(|&v| v < 0.0)
            || self.tau_grid.iter().any(|&v| v <= 0.0)
            || self.eps_gamma < 0.0
            || self.tol_pi <= 0.0
        {
            return Err(EstimateError::Config(
                "tuning values must be positive".into(),
            ));
        }
        if self.max_iters == 0 || self.n_pseudo == 0 || self.n_restarts == 0 {
            return Err(EstimateError::Config("counts must be positive".into()));
        }
        let (a, b) = self.init_blend;
        if a < 0.0 || b < 0.0 || (a + b - 1.0).abs() > 1e-12 {
            return Err(EstimateError::Config(
                "init blend weights must be nonnegative and sum to 1".into(),
            ));
        }
        Ok(())
    }
}

/// Discretized N×J binary matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryData {
    pub n: usize,
    pub j: usize,
    y: Vec<u8>,
}

impl BinaryData {
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self, EstimateError> {
        let n = rows.len();
        let j = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut y = Vec::with_capacity(n * j);
        for r in &rows {
            if r.len() != j {
                return Err(EstimateError::Config("ragged rows".into()));
            }
            for &v in r {
                if v > 1 {
                    return Err(EstimateError::Config("entries must be 0/1".into()));
                }
                y.push(v);
            }
        }
        Ok(Self { n, j, y })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.y[i * self.j + j]
    }
}

/// Threshold a mixed-type dataset: real entries become `1` iff strictly
/// above the cut (default 0); binary columns pass through.
pub fn discretize(data: &Dataset, cuts: Option<&[f64]>) -> BinaryData {
    let j = data.n_items();
    let mut y = Vec::with_capacity(data.n_records() * j);
    for row in &data.rows {
        for (c, &v) in row.iter().enumerate() {
            let bit = match data.columns[c] {
                ColumnType::Binary => v as u8,
                ColumnType::Real => {
                    let cut = cuts.map(|cs| cs[c]).unwrap_or(0.0);
                    u8::from(v > cut)
                }
            };
            y.push(bit);
        }
    }
    BinaryData {
        n: data.n_records(),
        j,
        y,
    }
}

/// Explicit initial values for one EM run.
#[derive(Clone, Debug)]
pub struct EmInit {
    /// Length 2^k, a probability vector.
    pub pi: Vec<f64>,
    /// J×2^k row-major success probabilities.
    pub theta: Vec<f64>,
}

/// Result of a single penalized EM run at one (λ, τ) grid point.
#[derive(Clone, Debug)]
pub struct EmRun {
    pub pi: Vec<f64>,
    /// J×2^k row-major.
    pub theta: Vec<f64>,
    /// Unpenalized log-likelihood at the final parameters.
    pub loglik: f64,
    /// λ Σ_j Σ_{h≠h'} min(|θ_{j,h}−θ_{j,h'}|, τ) at the final parameters.
    pub penalty: f64,
    /// Penalized objective after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub iters: usize,
    pub converged: bool,
    /// Items whose column was constant (θ row pinned at the clamp).
    pub degenerate_items: Vec<usize>,
}

/// Collapse records to distinct patterns with counts.
fn patterns_of(y: &BinaryData) -> Vec<(Vec<u8>, f64)> {
    use std::collections::HashMap;
    let mut map: HashMap<Vec<u8>, f64> = HashMap::new();
    for i in 0..y.n {
        let row: Vec<u8> = (0..y.j).map(|j| y.get(i, j)).collect();
        *map.entry(row).or_insert(0.0) += 1.0;
    }
    let mut out: Vec<(Vec<u8>, f64)> = map.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0)); // deterministic order
    out
}

/// Split-mix style hash for independent RNG substreams.
pub(crate) fn substream(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Maximize s·ln t + f·ln(1−t) − c·Σ_i |t − a_i| over the clamp interval:
/// evaluate the kinks, the endpoints, and the stationary points of each
/// smooth piece.
fn coordinate_max(s: f64, f: f64, c: f64, kinks: &[f64]) -> f64 {
    let lo = THETA_CLAMP;
    let hi = 1.0 - THETA_CLAMP;
    let mut candidates: Vec<f64> = vec![lo, hi];
    let mut sorted: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|a| *a > lo && *a < hi)
        .collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.extend_from_slice(&sorted);
    // stationary points per open interval
    let mut bounds = vec![lo];
    bounds.extend_from_slice(&sorted);
    bounds.push(hi);
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-12 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let beta: f64 = c * kinks.iter().map(|&kk| (mid - kk).signum()).sum::<f64>();
        // d/dt [s ln t + f ln(1−t) − beta·t] = 0:
        // beta·t² − (beta + s + f)·t + s = 0
        if beta.abs() < 1e-300 {
            if s + f > 0.0 {
                candidates.push((s / (s + f)).clamp(a, b));
            }
        } else {
            let bb = beta + s + f;
            let disc = bb * bb - 4.0 * beta * s;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                for root in [(bb - sq) / (2.0 * beta), (bb + sq) / (2.0 * beta)] {
                    if root > a && root < b {
                        candidates.push(root);
                    }
                }
            }
        }
    }
    let g = |t: f64| {
        let mut v = 0.0;
        if s > 0.0 {
            v += s * t.ln();
        }
        if f > 0.0 {
            v += f * (1.0 - t).ln();
        }
        v - c * kinks.iter().map(|&kk| (t - kk).abs()).sum::<f64>()
    };
    let mut best = lo;
    let mut best_v = f64::NEG_INFINITY;
    for t in candidates {
        let t = t.clamp(lo, hi);
        let v = g(t);
        if v > best_v {
            best_v = v;
            best = t;
        }
    }
    best
}

/// Grouped truncated lasso value λ Σ_j Σ_{h≠h'} min(|θ_{j,h}−θ_{j,h'}|, τ)
/// (ordered pairs, matching the penalty as written).
fn penalty_value(theta: &[f64], j: usize, nc: usize, lambda: f64, tau: f64) -> f64 {
    let mut acc = 0.0;
    for jj in 0..j {
        let row = &theta[jj * nc..(jj + 1) * nc];
        for a in 0..nc {
            for b in 0..nc {
                if a != b {
                    acc += (row[a] - row[b]).abs().min(tau);
                }
            }
        }
    }
    lambda * acc
}

fn loglik_of(
    patterns: &[(Vec<u8>, f64)],
    pi: &[f64],
    log_theta: &[f64],
    log_one_minus: &[f64],
    nc: usize,
) -> f64 {
    let log_pi: Vec<f64> = pi.iter().map(|&p| p.max(1e-300).ln()).collect();
    let mut total = 0.0;
    for (row, cnt) in patterns {
        let mut lw = vec![0.0f64; nc];
        let mut m = f64::NEG_INFINITY;
        for (h, slot) in lw.iter_mut().enumerate() {
            let mut acc = log_pi[h];
            for (jj, &yv) in row.iter().enumerate() {
                acc += if yv == 1 {
                    log_theta[jj * nc + h]
                } else {
                    log_one_minus[jj * nc + h]
                };
            }
            *slot = acc;
            m = m.max(acc);
        }
        let lse = m + lw.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
        total += cnt * lse;
    }
    total
}

/// One penalized EM run at a single (λ, τ) grid point.
///
/// E-step: exact posteriors over the 2^k configurations in log space.
/// M-step: π from posterior frequencies; each θ row solves the penalized
/// weighted-Bernoulli problem through a difference-of-convex majorization
/// of the truncated lasso (indicator weights 1{|θ_prev difference| < τ})
/// followed by exact coordinate descent. Stops when ‖π_t − π_{t−1}‖₂ <
/// `tol_pi` or at `max_iters`.
pub fn penalized_em(
    y: &BinaryData,
    k: usize,
    lambda: f64,
    tau: f64,
    cfg: &EmConfig,
    init: Option<&EmInit>,
) -> Result<EmRun, EstimateError> {
    if y.n == 0 {
        return Err(EstimateError::DegenerateInput("no records".into()));
    }
    if k == 0 {
        return Err(EstimateError::DegenerateInput(
            "need at least one latent class bit".into(),
        ));
    }
    let nc = configs::n_configs(k);
    let j = y.j;
    let n = y.n as f64;

    let default_init;
    let init = match init {
        Some(i) => i,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(cfg.seed, 0x1417));
            default_init = random_init(j, k, &mut rng);
            &default_init
        }
    };
    if init.pi.len() != nc || init.theta.len() != j * nc {
        return Err(EstimateError::Config("init has wrong dimensions".into()));
    }

    let patterns = patterns_of(y);
    let degenerate_items: Vec<usize> = (0..j)
        .filter(|&jj| {
            let first = y.get(0, jj);
            (1..y.n).all(|i| y.get(i, jj) == first)
        })
        .collect();

    let mut pi: Vec<f64> = init.pi.clone();
    let mut theta: Vec<f64> = init
        .theta
        .iter()
        .map(|&t| t.clamp(THETA_CLAMP, 1.0 - THETA_CLAMP))
        .collect();

    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut converged = false;
    let mut iters = 0;
    let c_pen = 2.0 * lambda; // each unordered pair appears twice in the sum

    for _ in 0..cfg.max_iters {
        iters += 1;
        // E-step
        let log_theta: Vec<f64> = theta.iter().map(|&t| t.ln()).collect();
        let log_one_minus: Vec<f64> = theta.iter().map(|&t| (1.0 - t).ln()).collect();
        let log_pi: Vec<f64> = pi.iter().map(|&p| p.max(1e-300).ln()).collect();
        let mut n_h = vec![0.0f64; nc];
        let mut s = vec![0.0f64; j * nc];
        for (row, cnt) in &patterns {
            let mut lw = vec![0.0f64; nc];
            let mut m = f64::NEG_INFINITY;
            for (h, slot) in lw.iter_mut().enumerate() {
                let mut acc = log_pi[h];
                for (jj, &yv) in row.iter().enumerate() {
                    acc += if yv == 1 {
                        log_theta[jj * nc + h]
                    } else {
                        log_one_minus[jj * nc + h]
                    };
                }
                *slot = acc;
                m = m.max(acc);
            }
            let z: f64 = lw.iter().map(|&v| (v - m).exp()).sum();
            for h in 0..nc {
                let r = cnt * (lw[h] - m).exp() / z;
                n_h[h] += r;
                for (jj, &yv) in row.iter().enumerate() {
                    if yv == 1 {
                        s[jj * nc + h] += r;
                    }
                }
            }
        }

        // M-step: proportions
        let prev_pi = pi.clone();
        let mut new_pi: Vec<f64> = n_h.iter().map(|&v| (v / n).max(1e-12)).collect();
        let z: f64 = new_pi.iter().sum();
        for p in &mut new_pi {
            *p /= z;
        }
        pi = new_pi;

        // M-step: per-item penalized coordinate descent on the majorized
        // fused-pairs problem
        for jj in 0..j {
            let row_prev: Vec<f64> = theta[jj * nc..(jj + 1) * nc].to_vec();
            // indicator weights from the previous iterate
            let mut active: Vec<Vec<usize>> = vec![Vec::new(); nc];
            for (a, slots) in active.iter_mut().enumerate() {
                for b in 0..nc {
                    if a != b && (row_prev[a] - row_prev[b]).abs() < tau {
                        slots.push(b);
                    }
                }
            }
            let row = &mut theta[jj * nc..(jj + 1) * nc];
            for _sweep in 0..50 {
                let mut max_delta = 0.0f64;
                for h in 0..nc {
                    let s_h = s[jj * nc + h];
                    let f_h = (n_h[h] - s_h).max(0.0);
                    let kinks: Vec<f64> = active[h].iter().map(|&b| row[b]).collect();
                    let c = if lambda > 0.0 && !kinks.is_empty() {
                        c_pen
                    } else {
                        0.0
                    };
                    let new = coordinate_max(s_h, f_h, c, &kinks);
                    max_delta = max_delta.max((new - row[h]).abs());
                    row[h] = new;
                }
                if max_delta < 1e-7 {
                    break;
                }
            }
        }

        // penalized objective at the new iterate
        let log_theta: Vec<f64> = theta.iter().map(|&t| t.ln()).collect();
        let log_one_minus: Vec<f64> = theta.iter().map(|&t| (1.0 - t).ln()).collect();
        let ll = loglik_of(&patterns, &pi, &log_theta, &log_one_minus, nc);
        trace.push(ll - penalty_value(&theta, j, nc, lambda, tau));

        let dpi: f64 = pi
            .iter()
            .zip(&prev_pi)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dpi < cfg.tol_pi {
            converged = true;
            break;
        }
    }

    let log_theta: Vec<f64> = theta.iter().map(|&t| t.ln()).collect();
    let log_one_minus: Vec<f64> = theta.iter().map(|&t| (1.0 - t).ln()).collect();
    let loglik = loglik_of(&patterns, &pi, &log_theta, &log_one_minus, nc);
    let penalty = penalty_value(&theta, j, nc, lambda, tau);
    Ok(EmRun {
        pi,
        theta,
        loglik,
        penalty,
        objective_trace: trace,
        iters,
        converged,
        degenerate_items,
    })
}

/// Blend the true parameters with noise: π₀ ∝ w_ref·π + w_noise·Dirichlet(1)
/// draw, Θ₀ = w_ref·Θ + w_noise·Uniform(0,1) entrywise. Fixes the label
/// permutation and sign ambiguities in simulations.
pub fn oracle_blend_init(
    pi: &LatentProportions,
    theta: &CondTable,
    blend: (f64, f64),
    seed: u64,
) -> EmInit {
    let (w_ref, w_noise) = blend;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nc = pi.values().len();
    // Dirichlet(1,...,1) via normalized exponentials
    let mut dir: Vec<f64> = (0..nc)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let z: f64 = dir.iter().sum();
    for d in &mut dir {
        *d /= z;
    }
    let mut pi0: Vec<f64> = pi
        .values()
        .iter()
        .zip(&dir)
        .map(|(&p, &d)| w_ref * p + w_noise * d)
        .collect();
    let z: f64 = pi0.iter().sum();
    for p in &mut pi0 {
        *p /= z;
    }
    let j = theta.n_items();
    let mut theta0 = Vec::with_capacity(j * nc);
    for jj in 0..j {
        for h in 0..nc {
            let u: f64 = rng.random();
            theta0.push(w_ref * theta.get(jj, h) + w_noise * u);
        }
    }
    EmInit {
        pi: pi0,
        theta: theta0,
    }
}

/// No-oracle initializer: π from Dirichlet(1), θ uniform on (0.2, 0.8).
pub fn random_init(j: usize, k: usize, rng: &mut ChaCha8Rng) -> EmInit {
    let nc = configs::n_configs(k);
    let mut pi: Vec<f64> = (0..nc)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let z: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= z;
    }
    let theta = (0..j * nc)
        .map(|_| 0.2 + 0.6 * rng.random::<f64>())
        .collect();
    EmInit { pi, theta }
}

/// Extract the bipartite graph: an edge (j, k) fires when the median over
/// `h_(−k)` of `|θ_{j,(h,1)} − θ_{j,(h,0)}|` exceeds `eps` strictly. The
/// median of an even count is the lower-middle order statistic.
pub fn extract_gamma(theta: &CondTable, eps: f64) -> BipartiteGraph {
    let j = theta.n_items();
    let k = theta.latents();
    BipartiteGraph::from_fn(j, k, |jj, kk| {
        let mut diffs: Vec<f64> = (0..configs::n_configs(k - 1))
            .map(|m| {
                let lo = configs::insert_bit(m, kk, false);
                let hi = configs::insert_bit(m, kk, true);
                (theta.get(jj, hi) - theta.get(jj, lo)).abs()
            })
            .collect();
        diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = diffs[(diffs.len() - 1) / 2];
        median > eps
    })
}

/// Learn the latent CPDAG from estimated proportions: draw pseudo-samples
/// and run GES with the BIC score.
pub fn fit_lambda_ges(pi: &LatentProportions, n_pseudo: usize, seed: u64) -> Cpdag {
    let k = pi.latents();
    assert!(k <= 8, "latent graph search expects a small node count");
    let nc = configs::n_configs(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; nc];
    for _ in 0..n_pseudo {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut h = nc - 1;
        for c in 0..nc {
            acc += pi.get(c);
            if u < acc {
                h = c;
                break;
            }
        }
        counts[h] += 1;
    }
    ges::ges_binary(&counts, k)
}

/// Count distinct θ levels in a row, merging values within `tol`.
fn fused_levels(row: &[f64], tol: f64) -> usize {
    let mut vals: Vec<f64> = row.to_vec();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut levels = 1;
    for w in vals.windows(2) {
        if w[1] - w[0] > tol {
            levels += 1;
        }
    }
    levels
}

/// Initialization mode for [`fit`].
#[derive(Clone, Debug)]
pub enum InitMode {
    /// Blend the known truth with noise per the configured weights.
    OracleBlend {
        pi: LatentProportions,
        theta: CondTable,
    },
    /// Fully specified starting point.
    Explicit { pi: Vec<f64>, theta: Vec<f64> },
    /// Best of `cfg.n_restarts` random starts by penalized objective.
    RandomRestarts,
}

/// Full fit output.
#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub pi_hat: LatentProportions,
    pub theta_hat: CondTable,
    pub gamma_hat: BipartiteGraph,
    pub lambda_hat: Cpdag,
    pub loglik: f64,
    pub bic: f64,
    pub penalty_value: f64,
    pub iters_used: usize,
    pub converged: bool,
    /// Selected (λ̃2, τ).
    pub selected_tuning: (f64, f64),
    /// Items with constant observed columns.
    pub degenerate_items: Vec<usize>,
}

/// The full pipeline: discretize, run the (λ, τ) grid of penalized EM,
/// select by BIC on the unpenalized log-likelihood (degrees of freedom =
/// fused θ levels per row plus 2^k − 1), extract the bipartite graph, then
/// fit the latent CPDAG from pseudo-samples. Deterministic given the seed.
pub fn fit(
    data: &Dataset,
    k: usize,
    cfg: &EmConfig,
    init: &InitMode,
) -> Result<FitResult, EstimateError> {
    let y = discretize(data, None);
    fit_binary(&y, k, cfg, init)
}

/// [`fit`] on already-discretized data.
pub fn fit_binary(
    y: &BinaryData,
    k: usize,
    cfg: &EmConfig,
    init: &InitMode,
) -> Result<FitResult, EstimateError> {
    cfg.validate()?;
    if y.n == 0 {
        return Err(EstimateError::DegenerateInput("no records".into()));
    }
    let nc = configs::n_configs(k);
    let inits: Vec<EmInit> = match init {
        InitMode::OracleBlend { pi, theta } => vec![oracle_blend_init(
            pi,
            theta,
            cfg.init_blend,
            substream(cfg.seed, 0xB1),
        )],
        InitMode::Explicit { pi, theta } => vec![EmInit {
            pi: pi.clone(),
            theta: theta.clone(),
        }],
        InitMode::RandomRestarts => (0..cfg.n_restarts)
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(substream(cfg.seed, 0xC0 + r as u64));
                random_init(y.j, k, &mut rng)
            })
            .collect(),
    };

    let grid: Vec<(f64, f64)> = cfg
        .lambda2_grid
        .iter()
        .flat_map(|&l| cfg.tau_grid.iter().map(move |&t| (l, t)))
        .collect();

    let runs: Vec<Result<(EmRun, f64), EstimateError>> = grid
        .par_iter()
        .map(|&(lambda, tau)| {
            let mut best: Option<EmRun> = None;
            for ini in &inits {
                let run = penalized_em(y, k, lambda, tau, cfg, Some(ini))?;
                let obj = run.loglik - run.penalty;
                if best.as_ref().is_none_or(|b| obj > b.loglik - b.penalty) {
                    best = Some(run);
                }
            }
            let run = best.expect("at least one init");
            let df: f64 = (0..y.j)
                .map(|jj| fused_levels(&run.theta[jj * nc..(jj + 1) * nc], tau / 2.0) as f64)
                .sum::<f64>()
                + (nc - 1) as f64;
            let bic = -2.0 * run.loglik + df * (y.n as f64).ln();
            Ok((run, bic))
        })
        .collect();

    let mut selected: Option<(EmRun, f64, (f64, f64))> = None;
    for (gi, res) in runs.into_iter().enumerate() {
        let (run, bic) = res?;
        if selected.as_ref().is_none_or(|(_, b, _)| bic < *b) {
            selected = Some((run, bic, grid[gi]));
        }
    }
    let (run, bic, tuning) = selected.expect("nonempty grid");

    let pi_hat =
        LatentProportions::from_weights(run.pi.clone()).map_err(EstimateError::Model)?;
    let theta_hat = CondTable::new(y.j, k, run.theta.clone()).map_err(EstimateError::Model)?;
    let gamma_hat = extract_gamma(&theta_hat, cfg.eps_gamma);
    let lambda_hat = fit_lambda_ges(&pi_hat, cfg.n_pseudo, substream(cfg.seed, 0x6E5));
    Ok(FitResult {
        pi_hat,
        theta_hat,
        gamma_hat,
        lambda_hat,
        loglik: run.loglik,
        bic,
        penalty_value: run.penalty,
        iters_used: run.iters,
        converged: run.converged,
        selected_tuning: tuning,
        degenerate_items: run.degenerate_items,
    })
}

/// Fit every candidate latent count and pick the BIC minimizer (ties toward
/// the smaller k). Uses the no-oracle initializer.
pub fn select_k(
    data: &Dataset,
    candidates: &[usize],
    cfg: &EmConfig,
) -> Result<(usize, Vec<(usize, f64)>), EstimateError> {
    if candidates.is_empty() {
        return Err(EstimateError::Config("no candidate latent counts".into()));
    }
    let y = discretize(data, None);
    let mut table = Vec::with_capacity(candidates.len());
    for &k in candidates {
        let r = fit_binary(&y, k, cfg, &InitMode::RandomRestarts)?;
        table.push((k, r.bic));
    }
    let mut best = table[0];
    for &(k, bic) in &table[1..] {
        if bic < best.1 || (bic == best.1 && k < best.0) {
            best = (k, bic);
        }
    }
    Ok((best.0, table))
}
