//! BLCM parameter containers, nondegeneracy validation, exact marginal
//! pmfs, and constructors for the known non-identifiable examples.

use crate::configs;
use crate::graph::{BipartiteGraph, LatentDag};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

/// Errors for model construction and model-level operations.
#[derive(Debug, Error)]
pub enum ModelError {
    /// Invalid parameter values (out of range, bad lengths, a = b, ...).
    #[error("parameter error: {0}")]
    Param(String),
    /// A documented operation precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// The operation supports Bernoulli items only.
    #[error("unsupported item kind for item {item}: {kind:?}")]
    UnsupportedItemKind { item: usize, kind: ItemKind },
}

/// Mixture proportions over the `2^K` latent configurations, indexed by
/// `h ↦ Σ_k h_k 2^k`.
///
/// Entries must be nonnegative and sum to one within 1e-12. Zeros are
/// representable so that nondegeneracy clause (a) is an operation-level
/// check rather than a type invariant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatentProportions {
    k: usize,
    values: Vec<f64>,
}

impl LatentProportions {
    pub fn new(values: Vec<f64>) -> Result<Self, ModelError> {
        let n = values.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(ModelError::Param(format!(
                "proportions length {n} is not a power of two"
            )));
        }
        let k = n.trailing_zeros() as usize;
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(ModelError::Param("proportions must be finite and >= 0".into()));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ModelError::Param(format!(
                "proportions sum to {sum}, expected 1 within 1e-12"
            )));
        }
        Ok(Self { k, values })
    }

    /// Normalize a nonnegative weight vector into proportions.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self, ModelError> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) {
            return Err(ModelError::Param("weights must have positive sum".into()));
        }
        for w in &mut weights {
            *w /= sum;
        }
        let n = weights.len();
        // exact renormalization can still miss by an ulp; pin the last entry
        let head: f64 = weights[..n - 1].iter().sum();
        weights[n - 1] = 1.0 - head;
        Self::new(weights)
    }

    pub fn uniform(k: usize) -> Self {
        let n = configs::n_configs(k);
        Self {
            k,
            values: vec![1.0 / n as f64; n],
        }
    }

    pub fn latents(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, h: usize) -> f64 {
        self.values[h]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl From<LatentProportions> for Vec<f64> {
    fn from(p: LatentProportions) -> Self {
        p.values
    }
}

impl TryFrom<Vec<f64>> for LatentProportions {
    type Error = ModelError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

/// Conditional distribution family of one observed item. Continuous items
/// are location families with unit scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Bernoulli,
    Normal,
    Cauchy,
}

/// Per-item conditional parameters: one location (or success probability)
/// per configuration of the item's latent parents, indexed with the shared
/// bit convention on the parent subset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ItemDistributionParts")]
pub struct ItemDistribution {
    pub kind: ItemKind,
    mu: Vec<f64>,
}

#[derive(Deserialize)]
struct ItemDistributionParts {
    kind: ItemKind,
    mu: Vec<f64>,
}

impl TryFrom<ItemDistributionParts> for ItemDistribution {
    type Error = ModelError;
    fn try_from(p: ItemDistributionParts) -> Result<Self, Self::Error> {
        Self::new(p.kind, p.mu)
    }
}

impl ItemDistribution {
    /// `mu` must have power-of-two length (one entry per parent config);
    /// Bernoulli values must lie in the open unit interval. Distinctness
    /// across parent configurations is validated by
    /// [`validate_nondegeneracy`], not here, so degenerate examples remain
    /// representable.
    pub fn new(kind: ItemKind, mu: Vec<f64>) -> Result<Self, ModelError> {
        if mu.is_empty() || !mu.len().is_power_of_two() {
            return Err(ModelError::Param(format!(
                "mu length {} is not a power of two",
                mu.len()
            )));
        }
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Param("mu must be finite".into()));
        }
        if kind == ItemKind::Bernoulli && mu.iter().any(|&v| v <= 0.0 || v >= 1.0) {
            return Err(ModelError::Param(
                "Bernoulli success probabilities must be in (0,1)".into(),
            ));
        }
        Ok(Self { kind, mu })
    }

    pub fn bernoulli(mu: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(ItemKind::Bernoulli, mu)
    }

    pub fn normal(mu: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(ItemKind::Normal, mu)
    }

    pub fn cauchy(mu: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(ItemKind::Cauchy, mu)
    }

    /// Number of parent configurations this item distinguishes.
    pub fn n_parent_configs(&self) -> usize {
        self.mu.len()
    }

    /// Parameter at a parent-configuration index.
    #[inline]
    pub fn mu_at(&self, parent_config: usize) -> f64 {
        self.mu[parent_config]
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }
}

/// A full binary latent causal model: bipartite graph, latent DAG, latent
/// proportions, and per-item conditionals. Immutable after construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "BlcmParts")]
pub struct Blcm {
    gamma: BipartiteGraph,
    lambda: LatentDag,
    proportions: LatentProportions,
    items: Vec<ItemDistribution>,
}

#[derive(Deserialize)]
struct BlcmParts {
    gamma: BipartiteGraph,
    lambda: LatentDag,
    proportions: LatentProportions,
    items: Vec<ItemDistribution>,
}

impl TryFrom<BlcmParts> for Blcm {
    type Error = ModelError;
    fn try_from(p: BlcmParts) -> Result<Self, Self::Error> {
        Self::new(p.gamma, p.lambda, p.proportions, p.items)
    }
}

impl Blcm {
    pub fn new(
        gamma: BipartiteGraph,
        lambda: LatentDag,
        proportions: LatentProportions,
        items: Vec<ItemDistribution>,
    ) -> Result<Self, ModelError> {
        let k = gamma.latents();
        if lambda.latents() != k {
            return Err(ModelError::Param(format!(
                "lambda has {} nodes, gamma has {} latents",
                lambda.latents(),
                k
            )));
        }
        if proportions.latents() != k {
            return Err(ModelError::Param(format!(
                "proportions are over {} latents, gamma has {}",
                proportions.latents(),
                k
            )));
        }
        if items.len() != gamma.items() {
            return Err(ModelError::Param(format!(
                "{} item distributions for {} items",
                items.len(),
                gamma.items()
            )));
        }
        for (j, item) in items.iter().enumerate() {
            let expect = configs::n_configs(gamma.parents_of_item(j).len());
            if item.n_parent_configs() != expect {
                return Err(ModelError::Param(format!(
                    "item {} has {} parameter entries, expected {} for its parents",
                    j + 1,
                    item.n_parent_configs(),
                    expect
                )));
            }
        }
        Ok(Self {
            gamma,
            lambda,
            proportions,
            items,
        })
    }

    pub fn gamma(&self) -> &BipartiteGraph {
        &self.gamma
    }

    pub fn lambda(&self) -> &LatentDag {
        &self.lambda
    }

    pub fn proportions(&self) -> &LatentProportions {
        &self.proportions
    }

    pub fn items(&self) -> &[ItemDistribution] {
        &self.items
    }

    pub fn n_items(&self) -> usize {
        self.gamma.items()
    }

    pub fn n_latents(&self) -> usize {
        self.gamma.latents()
    }

    /// Item parameter broadcast to a full latent configuration.
    #[inline]
    pub fn mu_at(&self, item: usize, h: usize) -> f64 {
        let parents = self.gamma.parents_of_item(item);
        self.items[item].mu_at(configs::project(h, &parents))
    }

    pub fn all_bernoulli(&self) -> bool {
        self.items.iter().all(|i| i.kind == ItemKind::Bernoulli)
    }
}

/// A J×2^K table of Bernoulli success probabilities θ_{j,h}: the discretized
/// model the estimator fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondTable {
    n_items: usize,
    k: usize,
    theta: Vec<f64>,
}

impl CondTable {
    pub fn new(n_items: usize, k: usize, theta: Vec<f64>) -> Result<Self, ModelError> {
        if theta.len() != n_items * configs::n_configs(k) {
            return Err(ModelError::Param(format!(
                "theta has {} entries, expected {}",
                theta.len(),
                n_items * configs::n_configs(k)
            )));
        }
        if theta.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(ModelError::Param("theta entries must be in [0,1]".into()));
        }
        Ok(Self { n_items, k, theta })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn latents(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, item: usize, h: usize) -> f64 {
        self.theta[item * configs::n_configs(self.k) + h]
    }

    pub fn row(&self, item: usize) -> &[f64] {
        let n = configs::n_configs(self.k);
        &self.theta[item * n..(item + 1) * n]
    }

    /// Restriction to a subset of items, in the given order.
    pub fn rows_subset(&self, items: &[usize]) -> CondTable {
        let n = configs::n_configs(self.k);
        let mut theta = Vec::with_capacity(items.len() * n);
        for &j in items {
            theta.extend_from_slice(self.row(j));
        }
        CondTable {
            n_items: items.len(),
            k: self.k,
            theta,
        }
    }

    /// Whether row `j` is constant across configurations differing only
    /// outside the parents of item `j` in an attached graph.
    pub fn respects(&self, gamma: &BipartiteGraph, tol: f64) -> bool {
        if gamma.items() != self.n_items || gamma.latents() != self.k {
            return false;
        }
        for j in 0..self.n_items {
            let parents = gamma.parents_of_item(j);
            for h in 0..configs::n_configs(self.k) {
                let rep = configs::project(h, &parents);
                // compare against the canonical config with the same parent bits
                let mut canon = 0usize;
                for (i, &p) in parents.iter().enumerate() {
                    if configs::bit(rep, i) {
                        canon |= 1 << p;
                    }
                }
                if (self.get(j, h) - self.get(j, canon)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// One record of mixed-type observations: binary items carry 0.0/1.0, real
/// items carry their sampled value.
pub type MixedRecord = Vec<f64>;

/// Standard normal CDF via the complementary error function.
pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Default per-item cuts: threshold 0 for continuous items; ignored for
/// Bernoulli items (their cut is the outcome {1}).
pub fn default_cuts(m: &Blcm) -> Vec<f64> {
    vec![0.0; m.n_items()]
}

/// Discretized conditional table θ_{j,h} = P(X_j ∈ C_j | H = h), with
/// C_j = {x > cut_j} for continuous items and {1} for Bernoulli items.
pub fn conditional_table(m: &Blcm, cuts: &[f64]) -> Result<CondTable, ModelError> {
    if cuts.len() != m.n_items() {
        return Err(ModelError::Param(format!(
            "{} cuts for {} items",
            cuts.len(),
            m.n_items()
        )));
    }
    let n = configs::n_configs(m.n_latents());
    let mut theta = Vec::with_capacity(m.n_items() * n);
    for j in 0..m.n_items() {
        for h in 0..n {
            let mu = m.mu_at(j, h);
            let t = match m.items()[j].kind {
                ItemKind::Bernoulli => mu,
                ItemKind::Normal => std_normal_cdf(mu - cuts[j]),
                ItemKind::Cauchy => 0.5 + (mu - cuts[j]).atan() / PI,
            };
            theta.push(t);
        }
    }
    CondTable::new(m.n_items(), m.n_latents(), theta)
}

/// Per-clause nondegeneracy verdict with offending indices (0-based).
#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    /// Clause (a): every latent configuration has positive probability.
    pub proportions_positive: bool,
    pub zero_configs: Vec<usize>,
    /// Clause (b): per item, conditionals differ across parent configs.
    pub conditionals_distinct: bool,
    /// Items violating clause (b) with one offending parent-config pair each.
    pub indistinct: Vec<(usize, (usize, usize))>,
    /// Clause (c): no all-zero columns in the bipartite graph.
    pub columns_nonempty: bool,
    pub empty_columns: Vec<usize>,
}

impl NondegeneracyReport {
    pub fn all_pass(&self) -> bool {
        self.proportions_positive && self.conditionals_distinct && self.columns_nonempty
    }
}

/// Distinctness tolerance for nondegeneracy clause (b).
pub const DISTINCTNESS_TOL: f64 = 1e-9;

/// Check the three nondegeneracy clauses. For continuous items distinctness
/// is judged on locations, which is sufficient for the implemented
/// unit-scale location families.
pub fn validate_nondegeneracy(m: &Blcm) -> NondegeneracyReport {
    let zero_configs: Vec<usize> = (0..configs::n_configs(m.n_latents()))
        .filter(|&h| m.proportions().get(h) <= 0.0)
        .collect();
    let mut indistinct = Vec::new();
    for (j, item) in m.items().iter().enumerate() {
        let n = item.n_parent_configs();
        'item: for a in 0..n {
            for b in (a + 1)..n {
                if (item.mu_at(a) - item.mu_at(b)).abs() <= DISTINCTNESS_TOL {
                    indistinct.push((j, (a, b)));
                    break 'item;
                }
            }
        }
    }
    let empty_columns: Vec<usize> = (0..m.n_latents())
        .filter(|&k| m.gamma().column_sum(k) == 0)
        .collect();
    NondegeneracyReport {
        proportions_positive: zero_configs.is_empty(),
        zero_configs,
        conditionals_distinct: indistinct.is_empty(),
        indistinct,
        columns_nonempty: empty_columns.is_empty(),
        empty_columns,
    }
}

/// Exact marginal pmf over {0,1}^J for an all-Bernoulli model, indexed by
/// `x ↦ Σ_j x_j 2^j`. Requires J ≤ 24.
pub fn marginal_pmf(m: &Blcm) -> Result<Vec<f64>, ModelError> {
    for (j, item) in m.items().iter().enumerate() {
        if item.kind != ItemKind::Bernoulli {
            return Err(ModelError::UnsupportedItemKind {
                item: j,
                kind: item.kind,
            });
        }
    }
    if m.n_items() > 24 {
        return Err(ModelError::Precondition(format!(
            "marginal_pmf supports J <= 24, got {}",
            m.n_items()
        )));
    }
    let n_out = 1usize << m.n_items();
    let mut pmf = vec![0.0f64; n_out];
    for h in 0..configs::n_configs(m.n_latents()) {
        let pi_h = m.proportions().get(h);
        if pi_h == 0.0 {
            continue;
        }
        // incremental outer product over items, item j occupying bit j
        let mut acc = vec![pi_h];
        for j in 0..m.n_items() {
            let t = m.mu_at(j, h);
            let mut next = vec![0.0; acc.len() * 2];
            for (i, &v) in acc.iter().enumerate() {
                next[i] = v * (1.0 - t);
                next[i + acc.len()] = v * t;
            }
            acc = next;
        }
        for (x, v) in acc.iter().enumerate() {
            pmf[x] += v;
        }
    }
    Ok(pmf)
}

/// The proof construction behind the subset-condition necessity result:
/// given column `k` dominating column `l`, swap the `l`-coordinate within
/// the `h_k = 1` slice of both the proportions and every affected
/// conditional. The output is observationally equivalent to the input.
pub fn subset_counterexample(m: &Blcm, k: usize, l: usize) -> Result<Blcm, ModelError> {
    let kk = m.n_latents();
    if k >= kk || l >= kk || k == l {
        return Err(ModelError::Param(format!(
            "latent indices ({k},{l}) invalid for K={kk}"
        )));
    }
    let dominated = (0..m.n_items()).all(|j| !m.gamma().get(j, l) || m.gamma().get(j, k));
    if !dominated {
        return Err(ModelError::Precondition(format!(
            "column {k} does not dominate column {l}"
        )));
    }
    let n = configs::n_configs(kk);
    let swap = |h: usize| {
        if configs::bit(h, k) {
            h ^ (1 << l)
        } else {
            h
        }
    };
    let mut pi = vec![0.0; n];
    for h in 0..n {
        pi[h] = m.proportions().get(swap(h));
    }
    let mut items = Vec::with_capacity(m.n_items());
    for (j, item) in m.items().iter().enumerate() {
        let parents = m.gamma().parents_of_item(j);
        if !m.gamma().get(j, l) {
            items.push(item.clone());
            continue;
        }
        // swap acts inside the parent-config space: both k and l are parents
        let kp = parents.iter().position(|&p| p == k).expect("k is a parent");
        let lp = parents.iter().position(|&p| p == l).expect("l is a parent");
        let mut mu = vec![0.0; item.n_parent_configs()];
        for (p, slot) in mu.iter_mut().enumerate() {
            let src = if configs::bit(p, kp) { p ^ (1 << lp) } else { p };
            *slot = item.mu_at(src);
        }
        items.push(ItemDistribution::new(item.kind, mu)?);
    }
    Blcm::new(
        m.gamma().clone(),
        m.lambda().clone(),
        LatentProportions::new(pi)?,
        items,
    )
}

/// The parity-pattern model with degenerate conditionals: two distinct
/// bipartite graphs carry the same observable distribution.
#[derive(Clone, Debug)]
pub struct DegenerateExample {
    /// Γ = lower-triangular all-ones, θ decided by parent-config parity.
    pub model: Blcm,
    /// The same distribution re-expressed with Γ̃ = I_K.
    pub relabeled: Blcm,
    /// Configuration relabeling h ↦ h̃ (prefix-parity map on indices).
    pub relabel: Vec<usize>,
}

/// Construct the degenerate parity example for `k ≥ 2` latents.
pub fn degenerate_example(k: usize, a: f64, b: f64) -> Result<DegenerateExample, ModelError> {
    if a == b {
        return Err(ModelError::Param("a and b must differ".into()));
    }
    if !(0.0 < a && a < 1.0 && 0.0 < b && b < 1.0) {
        return Err(ModelError::Param("a and b must be in (0,1)".into()));
    }
    if k < 2 {
        return Err(ModelError::Param("degenerate example needs K >= 2".into()));
    }
    let gamma = BipartiteGraph::from_fn(k, k, |j, c| c <= j);
    let lambda = LatentDag::empty(k);
    let pi = LatentProportions::uniform(k);
    let mut items = Vec::with_capacity(k);
    for j in 0..k {
        // item j has parents H_1..H_{j+1}; value by parity of the config
        let mu = (0..configs::n_configs(j + 1))
            .map(|p| if configs::weight(p) % 2 == 0 { a } else { b })
            .collect();
        items.push(ItemDistribution::bernoulli(mu)?);
    }
    let model = Blcm::new(gamma, lambda.clone(), pi.clone(), items)?;

    // relabel: h̃_k = parity of the first k+1 coordinates of h
    let n = configs::n_configs(k);
    let mut relabel = vec![0usize; n];
    for (h, slot) in relabel.iter_mut().enumerate() {
        let mut acc = 0usize;
        let mut par = 0usize;
        for c in 0..k {
            par ^= (h >> c) & 1;
            acc |= par << c;
        }
        *slot = acc;
    }

    let gamma_tilde = BipartiteGraph::from_fn(k, k, |j, c| c == j);
    let mut pi_tilde = vec![0.0; n];
    for h in 0..n {
        pi_tilde[relabel[h]] = pi.get(h);
    }
    let items_tilde = (0..k)
        .map(|_| ItemDistribution::bernoulli(vec![a, b]))
        .collect::<Result<Vec<_>, _>>()?;
    let relabeled = Blcm::new(
        gamma_tilde,
        lambda,
        LatentProportions::new(pi_tilde)?,
        items_tilde,
    )?;
    Ok(DegenerateExample {
        model,
        relabeled,
        relabel,
    })
}

/// Monotonicity of the discretized conditionals: for every item, parent
/// configurations ordered by elementwise dominance must have strictly
/// increasing θ under the given cuts.
pub fn check_monotonicity(m: &Blcm, cuts: &[f64]) -> Result<bool, ModelError> {
    let table = conditional_table(m, cuts)?;
    for j in 0..m.n_items() {
        let parents = m.gamma().parents_of_item(j);
        let np = parents.len();
        let nc = configs::n_configs(np);
        for hi in 0..nc {
            for lo in 0..nc {
                if hi != lo && configs::dominates(hi, lo, np) {
                    // compare via any full configs carrying these parent bits
                    let expand = |p: usize| {
                        let mut h = 0usize;
                        for (i, &c) in parents.iter().enumerate() {
                            if configs::bit(p, i) {
                                h |= 1 << c;
                            }
                        }
                        h
                    };
                    if table.get(j, expand(hi)) <= table.get(j, expand(lo)) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
