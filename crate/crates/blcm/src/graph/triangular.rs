//! Triangularity, double triangularity, and the structural necessary
//! conditions (subset condition, three children per latent).

use super::{BipartiteGraph, GraphError};
use serde::Serialize;
use std::collections::HashSet;
use std::ops::ControlFlow;

/// A double-triangular decomposition of a bipartite graph.
///
/// `rows1`/`rows2` are disjoint item index lists of length K in peel order;
/// `cols1`/`cols2` are the matching diagonal columns, so
/// `g[rowsA[i]][colsA[i']]` is unit lower triangular in `(i, i')`.
/// `rows3` holds the remaining items, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangularWitness {
    pub rows1: Vec<usize>,
    pub cols1: Vec<usize>,
    pub rows2: Vec<usize>,
    pub cols2: Vec<usize>,
    pub rows3: Vec<usize>,
}

impl TriangularWitness {
    /// Check the witness against a graph: disjoint blocks, complement rows,
    /// and exact unit-lower-triangular patterns.
    pub fn verify(&self, g: &BipartiteGraph) -> bool {
        let k = g.latents();
        if self.rows1.len() != k || self.rows2.len() != k {
            return false;
        }
        let mut used: HashSet<usize> = HashSet::new();
        for &r in self.rows1.iter().chain(&self.rows2) {
            if r >= g.items() || !used.insert(r) {
                return false;
            }
        }
        let expect3: Vec<usize> = (0..g.items()).filter(|r| !used.contains(r)).collect();
        if self.rows3 != expect3 {
            return false;
        }
        for (rows, cols) in [(&self.rows1, &self.cols1), (&self.rows2, &self.cols2)] {
            let mut seen = HashSet::new();
            if cols.len() != k || !cols.iter().all(|&c| c < k && seen.insert(c)) {
                return false;
            }
            for i in 0..k {
                for i2 in 0..k {
                    let v = g.get(rows[i], cols[i2]);
                    if i2 == i && !v {
                        return false;
                    }
                    if i2 > i && v {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Witness with 1-based item indices for reports.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSummary {
    pub rows1: Vec<usize>,
    pub rows2: Vec<usize>,
    pub rows3: Vec<usize>,
}

impl WitnessSummary {
    fn of(w: &TriangularWitness) -> Self {
        let up = |v: &[usize]| v.iter().map(|&r| r + 1).collect();
        Self {
            rows1: up(&w.rows1),
            rows2: up(&w.rows2),
            rows3: up(&w.rows3),
        }
    }
}

/// Permutations putting a square 0/1 block in unit lower-triangular form
/// (ones on the diagonal, zeros strictly above), or `None` if none exist.
///
/// Greedy peel: take the lowest-index standard-basis row, delete it and the
/// column of its 1, recurse. Any basis-row choice preserves triangularity,
/// so the lowest-index rule is exhaustive here.
pub fn is_triangular(block: &BipartiteGraph) -> Option<(Vec<usize>, Vec<usize>)> {
    assert_eq!(block.items(), block.latents(), "block must be square");
    let k = block.latents();
    let mut rows_left: Vec<usize> = (0..k).collect();
    let mut cols_left: Vec<usize> = (0..k).collect();
    let mut row_perm = Vec::with_capacity(k);
    let mut col_perm = Vec::with_capacity(k);
    for _ in 0..k {
        let mut pick = None;
        'rows: for (ri, &r) in rows_left.iter().enumerate() {
            let mut hit = None;
            for (ci, &c) in cols_left.iter().enumerate() {
                if block.get(r, c) {
                    if hit.is_some() {
                        continue 'rows;
                    }
                    hit = Some(ci);
                }
            }
            if let Some(ci) = hit {
                pick = Some((ri, ci));
                break;
            }
        }
        let (ri, ci) = pick?;
        row_perm.push(rows_left.remove(ri));
        col_perm.push(cols_left.remove(ci));
    }
    Some((row_perm, col_perm))
}

/// DFS over peel sequences of one triangular block among `avail` rows.
///
/// States `(chosen_rows_mask, cols_left_mask)` are memoized so each reachable
/// state is expanded once; the callback fires once per completed block.
fn for_each_block<F>(g: &BipartiteGraph, avail: u64, f: &mut F) -> ControlFlow<()>
where
    F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
{
    let k = g.latents();
    let full_cols: u32 = ((1u64 << k) - 1) as u32;
    let mut visited: HashSet<(u64, u32)> = HashSet::new();
    let mut rows: Vec<usize> = Vec::with_capacity(k);
    let mut cols: Vec<usize> = Vec::with_capacity(k);

    fn go<F>(
        g: &BipartiteGraph,
        avail: u64,
        chosen: u64,
        cols_left: u32,
        rows: &mut Vec<usize>,
        cols: &mut Vec<usize>,
        visited: &mut HashSet<(u64, u32)>,
        f: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    {
        if cols_left == 0 {
            return f(rows, cols);
        }
        if !visited.insert((chosen, cols_left)) {
            return ControlFlow::Continue(());
        }
        for r in 0..g.items() {
            if avail & (1 << r) == 0 || chosen & (1 << r) != 0 {
                continue;
            }
            let mut hit = None;
            let mut weight = 0;
            for c in 0..g.latents() {
                if cols_left & (1 << c) != 0 && g.get(r, c) {
                    weight += 1;
                    hit = Some(c);
                }
            }
            if weight != 1 {
                continue;
            }
            let c = hit.unwrap();
            rows.push(r);
            cols.push(c);
            let res = go(
                g,
                avail,
                chosen | (1 << r),
                cols_left & !(1 << c),
                rows,
                cols,
                visited,
                f,
            );
            rows.pop();
            cols.pop();
            res?;
        }
        ControlFlow::Continue(())
    }

    go(g, avail, 0, full_cols, &mut rows, &mut cols, &mut visited, f)
}

/// All K-row subsets forming a triangular block, each with one canonical
/// peel, ordered by first completion in lowest-row-index-first DFS order.
fn triangular_row_sets(g: &BipartiteGraph) -> Vec<(u64, Vec<usize>, Vec<usize>)> {
    let mut out: Vec<(u64, Vec<usize>, Vec<usize>)> = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let all: u64 = if g.items() >= 64 {
        u64::MAX
    } else {
        (1u64 << g.items()) - 1
    };
    let _ = for_each_block(g, all, &mut |rows, cols| {
        let mask = rows.iter().fold(0u64, |m, &r| m | (1 << r));
        if seen.insert(mask) {
            out.push((mask, rows.to_vec(), cols.to_vec()));
        }
        ControlFlow::Continue(())
    });
    out
}

/// Visit every double-triangular witness (ordered pairs of disjoint
/// triangular row sets, one canonical peel each).
fn for_each_witness<F>(g: &BipartiteGraph, mut f: F)
where
    F: FnMut(&TriangularWitness) -> ControlFlow<()>,
{
    let blocks = triangular_row_sets(g);
    for (m1, r1, c1) in &blocks {
        for (m2, r2, c2) in &blocks {
            if m1 & m2 != 0 {
                continue;
            }
            let used = m1 | m2;
            let rows3: Vec<usize> = (0..g.items()).filter(|&r| used & (1 << r) == 0).collect();
            let w = TriangularWitness {
                rows1: r1.clone(),
                cols1: c1.clone(),
                rows2: r2.clone(),
                cols2: c2.clone(),
                rows3,
            };
            if f(&w).is_break() {
                return;
            }
        }
    }
}

/// Search for a double-triangular decomposition.
///
/// Deterministic lowest-index-first with full backtracking; exhaustive at
/// desk scale (J ≤ 24, K ≤ 8). `Err` reports the impossible shape J < 2K
/// distinctly from a failed search (`Ok(None)`).
pub fn find_double_triangular(
    g: &BipartiteGraph,
) -> Result<Option<TriangularWitness>, GraphError> {
    if g.items() < 2 * g.latents() {
        return Err(GraphError::Dimension(format!(
            "double triangularity needs J >= 2K, got J={}, K={}",
            g.items(),
            g.latents()
        )));
    }
    let mut found = None;
    for_each_witness(g, |w| {
        found = Some(w.clone());
        ControlFlow::Break(())
    });
    Ok(found)
}

/// Result of the subset-condition check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub holds: bool,
    /// First ordered pair (k, l) with column k elementwise ≤ column l,
    /// in lexicographic order; 0-based.
    pub violating_pair: Option<(usize, usize)>,
}

/// No column of Γ may be elementwise dominated by another.
pub fn check_subset_condition(g: &BipartiteGraph) -> SubsetReport {
    let k = g.latents();
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let dominated = (0..g.items()).all(|j| !g.get(j, a) || g.get(j, b));
            if dominated {
                return SubsetReport {
                    holds: false,
                    violating_pair: Some((a, b)),
                };
            }
        }
    }
    SubsetReport {
        holds: true,
        violating_pair: None,
    }
}

/// Result of the three-children necessity check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreeChildrenReport {
    pub holds: bool,
    /// Columns with fewer than three observed children; 0-based.
    pub deficient: Vec<usize>,
}

/// Every latent variable needs at least three observed children.
pub fn check_three_children(g: &BipartiteGraph) -> ThreeChildrenReport {
    let deficient: Vec<usize> = (0..g.latents())
        .filter(|&k| g.column_sum(k) < 3)
        .collect();
    ThreeChildrenReport {
        holds: deficient.is_empty(),
        deficient,
    }
}

/// Structured verdict on the sufficient and necessary identifiability
/// conditions for a bipartite graph. Indices in this report are 1-based to
/// match the `k1..kK` CSV naming.
#[derive(Debug, Clone, Serialize)]
pub struct Theorem2Report {
    pub double_triangular: bool,
    /// Best witness found: one whose Γ3 covers every column if any exists.
    pub witness: Option<WitnessSummary>,
    /// Γ3 of the best witness has no empty column.
    pub gamma3_columns_nonempty: bool,
    /// Some witness leaves Γ3 column-covering.
    pub gamma3_nonempty_some_witness: bool,
    /// Every witness leaves Γ3 column-covering (false when no witness).
    pub gamma3_nonempty_all_witnesses: bool,
    pub subset_condition: bool,
    pub subset_violating_pair: Option<[usize; 2]>,
    pub three_children: bool,
    pub deficient_columns: Vec<usize>,
    /// double_triangular ∧ gamma3_columns_nonempty ∧ subset_condition.
    pub sufficient: bool,
    /// ¬subset_condition ∨ ¬three_children.
    pub necessary_violated: bool,
}

fn gamma3_covers(g: &BipartiteGraph, rows3: &[usize]) -> bool {
    (0..g.latents()).all(|k| rows3.iter().any(|&j| g.get(j, k)))
}

/// Evaluate the full condition set, iterating over witnesses so that
/// Γ3-nonemptiness is judged both for some witness and for all witnesses.
pub fn check_theorem2_conditions(g: &BipartiteGraph) -> Theorem2Report {
    let mut first: Option<TriangularWitness> = None;
    let mut covering: Option<TriangularWitness> = None;
    let mut all_cover = true;
    let mut any_witness = false;
    if g.items() >= 2 * g.latents() {
        for_each_witness(g, |w| {
            any_witness = true;
            if first.is_none() {
                first = Some(w.clone());
            }
            if gamma3_covers(g, &w.rows3) {
                if covering.is_none() {
                    covering = Some(w.clone());
                }
            } else {
                all_cover = false;
            }
            // stop once both quantifiers are resolved
            if covering.is_some() && !all_cover {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
    }
    let some_cover = covering.is_some();
    let best = covering.or(first);
    let subset = check_subset_condition(g);
    let three = check_three_children(g);
    Theorem2Report {
        double_triangular: any_witness,
        witness: best.as_ref().map(WitnessSummary::of),
        gamma3_columns_nonempty: some_cover,
        gamma3_nonempty_some_witness: some_cover,
        gamma3_nonempty_all_witnesses: any_witness && all_cover,
        subset_condition: subset.holds,
        subset_violating_pair: subset.violating_pair.map(|(a, b)| [a + 1, b + 1]),
        three_children: three.holds,
        deficient_columns: three.deficient.iter().map(|&c| c + 1).collect(),
        sufficient: any_witness && some_cover && subset.holds,
        necessary_violated: !subset.holds || !three.holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(rows: &[&[u8]]) -> BipartiteGraph {
        BipartiteGraph::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn fig1() -> BipartiteGraph {
        gamma(&[
            &[1, 0, 0],
            &[1, 1, 0],
            &[1, 0, 1],
            &[1, 1, 1],
            &[1, 0, 1],
            &[0, 1, 0],
            &[0, 1, 1],
            &[0, 0, 0],
        ])
    }

    fn dense() -> BipartiteGraph {
        gamma(&[
            &[1, 0, 0],
            &[1, 1, 1],
            &[1, 0, 1],
            &[1, 1, 1],
            &[1, 0, 1],
            &[0, 1, 1],
            &[0, 1, 1],
            &[0, 0, 0],
        ])
    }

    fn sparse() -> BipartiteGraph {
        gamma(&[
            &[1, 0, 0],
            &[1, 1, 0],
            &[1, 0, 0],
            &[1, 1, 1],
            &[1, 0, 0],
            &[0, 1, 0],
            &[0, 1, 1],
            &[0, 0, 0],
        ])
    }

    #[test]
    fn triangular_examples() {
        let b = gamma(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]]);
        let (rp, cp) = is_triangular(&b).expect("triangular");
        assert_eq!(rp, vec![0, 1, 2]);
        assert_eq!(cp, vec![0, 1, 2]);

        let id = BipartiteGraph::from_fn(4, 4, |j, k| j == k);
        assert!(is_triangular(&id).is_some());

        let ones = gamma(&[&[1, 1], &[1, 1]]);
        assert!(is_triangular(&ones).is_none());
    }

    #[test]
    fn triangular_permutations_put_ones_on_diagonal() {
        // the witness property is exact: ones on the diagonal, zeros above
        let b = gamma(&[&[0, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let (rp, cp) = is_triangular(&b).expect("triangular after permutation");
        for i in 0..3 {
            assert!(b.get(rp[i], cp[i]));
            for i2 in (i + 1)..3 {
                assert!(!b.get(rp[i], cp[i2]));
            }
        }
    }

    #[test]
    fn fig1_is_double_triangular() {
        let g = fig1();
        let w = find_double_triangular(&g).unwrap().expect("witness");
        assert!(w.verify(&g));
    }

    #[test]
    fn dense_is_not_double_triangular() {
        // only row 1 is a basis row, so a second triangular block is impossible
        let g = dense();
        assert!(find_double_triangular(&g).unwrap().is_none());
    }

    #[test]
    fn stacked_identities_trivial_witness() {
        let g = BipartiteGraph::from_fn(6, 3, |j, k| j % 3 == k);
        let w = find_double_triangular(&g).unwrap().expect("witness");
        assert!(w.verify(&g));
        assert!(w.rows3.is_empty());
    }

    #[test]
    fn dimension_error_when_too_few_rows() {
        let g = BipartiteGraph::from_fn(5, 3, |j, k| j % 3 == k);
        assert!(find_double_triangular(&g).is_err());
    }

    #[test]
    fn witness_search_agrees_with_brute_force() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(5);
        for trial in 0..300 {
            let j = 6 + (trial % 5);
            let k = 2 + (trial % 2);
            let g = BipartiteGraph::from_fn(j, k, |_, _| rng.random::<f64>() < 0.45);
            let fast = find_double_triangular(&g).unwrap();
            // brute force over all disjoint K-row-subset pairs
            let mut brute = false;
            let subsets = combinations(j, k);
            'outer: for s1 in &subsets {
                if is_triangular(&g.submatrix(s1)).is_none() {
                    continue;
                }
                for s2 in &subsets {
                    if s1.iter().any(|r| s2.contains(r)) {
                        continue;
                    }
                    if is_triangular(&g.submatrix(s2)).is_some() {
                        brute = true;
                        break 'outer;
                    }
                }
            }
            assert_eq!(fast.is_some(), brute, "disagreement on {:?}", g);
            if let Some(w) = fast {
                assert!(w.verify(&g));
            }
        }
    }

    fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..n {
                cur.push(i);
                go(i + 1, n, k, cur, out);
                cur.pop();
            }
        }
        go(0, n, k, &mut cur, &mut out);
        out
    }

    #[test]
    fn subset_condition_examples() {
        assert!(check_subset_condition(&fig1()).holds);
        let r = check_subset_condition(&dense());
        assert!(!r.holds);
        // column 2 is nested in column 3 (1-based), i.e. (1, 2) 0-based
        assert_eq!(r.violating_pair, Some((1, 2)));
        let single = gamma(&[&[1], &[0], &[1]]);
        assert!(check_subset_condition(&single).holds);
    }

    #[test]
    fn subset_condition_invariances() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let g = BipartiteGraph::from_fn(6, 3, |_, _| rng.random::<f64>() < 0.5);
            let base = check_subset_condition(&g).holds;
            // row permutation leaves the verdict unchanged
            let rows: Vec<usize> = {
                let mut v: Vec<usize> = (0..6).collect();
                for i in (1..6).rev() {
                    let j = rng.random_range(0..=i);
                    v.swap(i, j);
                }
                v
            };
            let permuted = g.submatrix(&rows);
            assert_eq!(check_subset_condition(&permuted).holds, base);
            // simultaneous identical column permutation too
            let cols = [2usize, 0, 1];
            let colperm = BipartiteGraph::from_fn(6, 3, |j, k| g.get(j, cols[k]));
            assert_eq!(check_subset_condition(&colperm).holds, base);
        }
    }

    #[test]
    fn three_children_examples() {
        let r = check_three_children(&sparse());
        assert!(!r.holds);
        assert_eq!(r.deficient, vec![2]);
        assert!(check_three_children(&fig1()).holds);
        let all_ones = BipartiteGraph::from_fn(3, 2, |_, _| true);
        assert!(check_three_children(&all_ones).holds);
    }

    #[test]
    fn theorem2_fig1_sufficient() {
        let r = check_theorem2_conditions(&fig1());
        assert!(r.double_triangular);
        assert!(r.gamma3_columns_nonempty);
        assert!(r.subset_condition);
        assert!(r.sufficient);
        assert!(!r.necessary_violated);
        let w = r.witness.unwrap();
        assert_eq!(w.rows1.len(), 3);
    }

    #[test]
    fn theorem2_sparse_gamma3_empty_for_every_witness() {
        let r = check_theorem2_conditions(&sparse());
        assert!(r.double_triangular);
        assert!(!r.gamma3_nonempty_some_witness);
        assert!(!r.gamma3_nonempty_all_witnesses);
        assert!(!r.sufficient);
        assert!(r.necessary_violated);
    }

    #[test]
    fn theorem2_stacked_identities_gamma3_empty() {
        let g = BipartiteGraph::from_fn(6, 3, |j, k| j % 3 == k);
        let r = check_theorem2_conditions(&g);
        assert!(r.double_triangular);
        assert!(!r.gamma3_columns_nonempty);
    }
}
