//! Greedy equivalence search over binary variables with the BIC score.
//!
//! Operates on a contingency vector over the 2^k joint configurations.
//! Forward equivalence search inserts edges, backward deletes them; each
//! applied operator re-completes the CPDAG through a consistent DAG
//! extension.

use crate::graph::pdag::Pdag;
use crate::graph::Cpdag;
use std::collections::HashMap;

/// Decomposable BIC scorer with a local-score cache.
struct BicScorer {
    k: usize,
    counts: Vec<f64>,
    log_n: f64,
    cache: HashMap<(usize, u32), f64>,
}

impl BicScorer {
    fn new(counts: &[u64], k: usize) -> Self {
        let total: u64 = counts.iter().sum();
        Self {
            k,
            counts: counts.iter().map(|&c| c as f64).collect(),
            log_n: (total.max(1) as f64).ln(),
            cache: HashMap::new(),
        }
    }

    /// loglik(v | parents) − (df/2)·ln N with df = 2^|parents|.
    fn local(&mut self, v: usize, parents_mask: u32) -> f64 {
        if let Some(&s) = self.cache.get(&(v, parents_mask)) {
            return s;
        }
        let n_parent_configs = 1usize << parents_mask.count_ones();
        let mut tab = vec![0.0f64; n_parent_configs * 2];
        for h in 0..(1usize << self.k) {
            let c = self.counts[h];
            if c == 0.0 {
                continue;
            }
            let mut pc = 0usize;
            let mut slot = 0usize;
            for b in 0..self.k {
                if parents_mask & (1 << b) != 0 {
                    if h & (1 << b) != 0 {
                        pc |= 1 << slot;
                    }
                    slot += 1;
                }
            }
            let y = (h >> v) & 1;
            tab[pc * 2 + y] += c;
        }
        let mut ll = 0.0;
        for pc in 0..n_parent_configs {
            let n0 = tab[pc * 2];
            let n1 = tab[pc * 2 + 1];
            let ns = n0 + n1;
            if n0 > 0.0 {
                ll += n0 * (n0 / ns).ln();
            }
            if n1 > 0.0 {
                ll += n1 * (n1 / ns).ln();
            }
        }
        let score = ll - 0.5 * n_parent_configs as f64 * self.log_n;
        self.cache.insert((v, parents_mask), score);
        score
    }
}

fn mask_of(nodes: &[usize]) -> u32 {
    nodes.iter().fold(0u32, |m, &v| m | (1 << v))
}

fn is_clique(p: &Pdag, nodes: &[usize]) -> bool {
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if !p.adjacent(a, b) {
                return false;
            }
        }
    }
    true
}

/// Whether a semi-directed path (following undirected edges or arrows
/// forward) runs from `from` to `to` avoiding `blocked`.
fn semi_directed_reaches(p: &Pdag, from: usize, to: usize, blocked: &[usize]) -> bool {
    let mut seen = vec![false; p.n];
    let mut queue = vec![from];
    seen[from] = true;
    while let Some(u) = queue.pop() {
        if u == to {
            return true;
        }
        for v in p.children(u).into_iter().chain(p.neighbors(u)) {
            if !seen[v] && !blocked.contains(&v) {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    false
}

fn submasks(full: u32) -> Vec<u32> {
    // all subsets of a bitmask, ascending
    let mut out = vec![0u32];
    let mut bits = Vec::new();
    for b in 0..32 {
        if full & (1 << b) != 0 {
            bits.push(b);
        }
    }
    for &b in &bits {
        let mut next = Vec::with_capacity(out.len() * 2);
        for &m in &out {
            next.push(m);
            next.push(m | (1 << b));
        }
        out = next;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&b| mask & (1 << b) != 0).collect()
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Insert { x: usize, y: usize, t: u32 },
    Delete { x: usize, y: usize, h: u32 },
}

/// Re-complete a PDAG after an operator: extend to a consistent DAG, then
/// rebuild the CPDAG. `None` when no extension exists (the operator is then
/// discarded).
fn recomplete(p: &Pdag) -> Option<Pdag> {
    let adj = p.to_consistent_dag()?;
    Some(Pdag::cpdag_of_dag(p.n, &adj))
}

fn apply(p: &Pdag, op: Op) -> Option<Pdag> {
    let mut q = p.clone();
    match op {
        Op::Insert { x, y, t } => {
            q.add_directed(x, y);
            for tt in members(t) {
                q.orient(tt, y);
            }
        }
        Op::Delete { x, y, h } => {
            q.remove_edge(x, y);
            for hh in members(h) {
                if q.has_undirected(y, hh) {
                    q.orient(y, hh);
                }
                if q.has_undirected(x, hh) {
                    q.orient(x, hh);
                }
            }
        }
    }
    recomplete(&q)
}

const SCORE_EPS: f64 = 1e-9;

/// GES over `k` binary variables given joint configuration counts.
pub fn ges_binary(counts: &[u64], k: usize) -> Cpdag {
    assert_eq!(counts.len(), 1usize << k, "counts over 2^k configurations");
    let mut scorer = BicScorer::new(counts, k);
    let mut state = Pdag::new(k);

    // forward equivalence search
    loop {
        let mut best: Option<(f64, Op)> = None;
        for y in 0..k {
            let nb_y = state.neighbors(y);
            let pa_y = mask_of(&state.parents(y));
            for x in 0..k {
                if x == y || state.adjacent(x, y) {
                    continue;
                }
                let t0: Vec<usize> = nb_y
                    .iter()
                    .copied()
                    .filter(|&t| !state.adjacent(t, x))
                    .collect();
                let na: Vec<usize> = nb_y
                    .iter()
                    .copied()
                    .filter(|&t| state.adjacent(t, x))
                    .collect();
                for t_mask in submasks(mask_of(&t0)) {
                    let mut c = na.clone();
                    c.extend(members(t_mask));
                    if !is_clique(&state, &c) {
                        continue;
                    }
                    if semi_directed_reaches(&state, y, x, &c) {
                        continue;
                    }
                    let base = pa_y | mask_of(&c);
                    let delta =
                        scorer.local(y, base | (1 << x)) - scorer.local(y, base);
                    if delta > SCORE_EPS && best.as_ref().is_none_or(|(d, _)| delta > *d) {
                        best = Some((delta, Op::Insert { x, y, t: t_mask }));
                    }
                }
            }
        }
        match best {
            Some((_, op)) => match apply(&state, op) {
                Some(next) => state = next,
                None => break, // no consistent extension; stop inserting
            },
            None => break,
        }
    }

    // backward equivalence search
    loop {
        let mut best: Option<(f64, Op)> = None;
        for y in 0..k {
            let pa_y = mask_of(&state.parents(y));
            for x in 0..k {
                if x == y {
                    continue;
                }
                let deletable = state.has_directed(x, y) || state.has_undirected(x, y);
                if !deletable {
                    continue;
                }
                let na: Vec<usize> = state
                    .neighbors(y)
                    .into_iter()
                    .filter(|&t| state.adjacent(t, x))
                    .collect();
                for h_mask in submasks(mask_of(&na)) {
                    let keep: Vec<usize> = na
                        .iter()
                        .copied()
                        .filter(|&t| h_mask & (1 << t) == 0)
                        .collect();
                    if !is_clique(&state, &keep) {
                        continue;
                    }
                    let base = (pa_y | mask_of(&keep)) & !(1u32 << x);
                    let delta =
                        scorer.local(y, base) - scorer.local(y, base | (1 << x));
                    if delta > SCORE_EPS && best.as_ref().is_none_or(|(d, _)| delta > *d) {
                        best = Some((delta, Op::Delete { x, y, h: h_mask }));
                    }
                }
            }
        }
        match best {
            Some((_, op)) => match apply(&state, op) {
                Some(next) => state = next,
                None => break,
            },
            None => break,
        }
    }

    Cpdag::from_pdag(&state)
}

#[cfg(test)]
pub(crate) fn score_dag(counts: &[u64], k: usize, edges: &[(usize, usize)]) -> f64 {
    let mut scorer = BicScorer::new(counts, k);
    (0..k)
        .map(|v| {
            let pa: Vec<usize> = edges
                .iter()
                .filter(|&&(_, b)| b == v)
                .map(|&(a, _)| a)
                .collect();
            scorer.local(v, mask_of(&pa))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configs;
    use crate::graph::{dag_to_cpdag, LatentDag};
    use crate::simulate::{proportions_of, LambdaKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_counts(pi: &[f64], k: usize, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u64; 1 << k];
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut h = (1 << k) - 1;
            for c in 0..(1 << k) {
                acc += pi[c];
                if u < acc {
                    h = c;
                    break;
                }
            }
            counts[h] += 1;
        }
        counts
    }

    #[test]
    fn chain_recovers_undirected_chain() {
        let pi = proportions_of(LambdaKind::Chain);
        let counts = sample_counts(pi.values(), 3, 100_000, 1);
        let c = ges_binary(&counts, 3);
        let truth = dag_to_cpdag(&LatentDag::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        assert_eq!(c, truth);
    }

    #[test]
    fn collider_recovers_v_structure() {
        let pi = proportions_of(LambdaKind::Collider);
        let counts = sample_counts(pi.values(), 3, 100_000, 2);
        let c = ges_binary(&counts, 3);
        let truth = dag_to_cpdag(&LatentDag::from_edges(3, &[(0, 1), (2, 1)]).unwrap());
        assert_eq!(c, truth);
    }

    #[test]
    fn independent_proportions_give_empty_graph() {
        // product of marginals 0.6 and 0.3
        let mut pi = vec![0.0; 4];
        for h in 0..4 {
            let p1 = if configs::bit(h, 0) { 0.6 } else { 0.4 };
            let p2 = if configs::bit(h, 1) { 0.3 } else { 0.7 };
            pi[h] = p1 * p2;
        }
        let counts = sample_counts(&pi, 2, 50_000, 3);
        let c = ges_binary(&counts, 2);
        assert_eq!(c.edge_count(), 0);
    }

    #[test]
    fn dependent_proportions_give_complete_undirected() {
        let pi = proportions_of(LambdaKind::Dependent);
        let counts = sample_counts(pi.values(), 3, 100_000, 4);
        let c = ges_binary(&counts, 3);
        let truth =
            dag_to_cpdag(&LatentDag::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap());
        assert_eq!(c, truth);
    }

    /// Exhaustive-search oracle on three nodes: GES must land on the same
    /// equivalence class as the best-scoring DAG.
    #[test]
    fn ges_matches_exhaustive_best_dag_on_three_nodes() {
        let all_dags: Vec<Vec<(usize, usize)>> = {
            let mut out = Vec::new();
            for s01 in 0..3u8 {
                for s02 in 0..3u8 {
                    for s12 in 0..3u8 {
                        let mut edges = Vec::new();
                        let mut push = |s: u8, a: usize, b: usize| match s {
                            1 => edges.push((a, b)),
                            2 => edges.push((b, a)),
                            _ => {}
                        };
                        push(s01, 0, 1);
                        push(s02, 0, 2);
                        push(s12, 1, 2);
                        if LatentDag::from_edges(3, &edges).is_ok() {
                            out.push(edges);
                        }
                    }
                }
            }
            out
        };
        for (seed, kind) in [
            (10, LambdaKind::Chain),
            (11, LambdaKind::Collider),
            (12, LambdaKind::Dependent),
        ] {
            let pi = proportions_of(kind);
            let counts = sample_counts(pi.values(), 3, 5_000, seed);
            let ges = ges_binary(&counts, 3);
            let best = all_dags
                .iter()
                .max_by(|a, b| {
                    score_dag(&counts, 3, a)
                        .partial_cmp(&score_dag(&counts, 3, b))
                        .unwrap()
                })
                .unwrap();
            let best_cpdag = dag_to_cpdag(&LatentDag::from_edges(3, best).unwrap());
            assert_eq!(ges, best_cpdag, "kind {kind:?}");
        }
    }
}
