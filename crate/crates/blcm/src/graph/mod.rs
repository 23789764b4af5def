//! Graph types and structural identifiability checks.
//!
//! Holds the latent-to-observed bipartite graph, the latent DAG and its
//! CPDAG representative, triangularity / double-triangularity search,
//! the subset and three-children conditions, and SHD metrics.

mod bipartite;
mod cpdag;
mod latent_dag;
pub(crate) mod pdag;
mod triangular;

pub use bipartite::BipartiteGraph;
pub use cpdag::{dag_to_cpdag, shd_cpdag, Cpdag};
pub use latent_dag::LatentDag;
pub use triangular::{
    check_subset_condition, check_theorem2_conditions, check_three_children,
    find_double_triangular, is_triangular, SubsetReport, Theorem2Report, ThreeChildrenReport,
    TriangularWitness, WitnessSummary,
};

use serde::Serialize;
use thiserror::Error;

/// Errors for graph construction, parsing, and metric preconditions.
#[derive(Debug, Error)]
pub enum GraphError {
    /// Shape mismatch between two graphs or an impossible requested shape.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// The adjacency matrix of a latent DAG contains a directed cycle.
    #[error("latent graph contains a directed cycle")]
    Cycle,
    /// Invalid entries (anything other than 0/1, or malformed CSV).
    #[error("parse error: {0}")]
    Parse(String),
}

/// Hamming distance between two bipartite graphs of identical shape.
pub fn shd_gamma(est: &BipartiteGraph, truth: &BipartiteGraph) -> Result<usize, GraphError> {
    if est.items() != truth.items() || est.latents() != truth.latents() {
        return Err(GraphError::Dimension(format!(
            "{}x{} vs {}x{}",
            est.items(),
            est.latents(),
            truth.items(),
            truth.latents()
        )));
    }
    let mut d = 0;
    for j in 0..est.items() {
        for k in 0..est.latents() {
            if est.get(j, k) != truth.get(j, k) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// A column permutation of `est` minimizing [`shd_gamma`] against `truth`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColumnAlignment {
    /// `perm[k]` is the column of `est` placed at position `k`.
    pub perm: Vec<usize>,
    /// Hamming distance achieved by the permutation.
    pub shd: usize,
}

/// Resolve the label-permutation ambiguity of `est` against `truth`.
///
/// Exhaustive over all `K!` column permutations; ties break toward the
/// lexicographically smallest permutation.
pub fn align_columns(
    est: &BipartiteGraph,
    truth: &BipartiteGraph,
) -> Result<ColumnAlignment, GraphError> {
    if est.items() != truth.items() || est.latents() != truth.latents() {
        return Err(GraphError::Dimension(format!(
            "{}x{} vs {}x{}",
            est.items(),
            est.latents(),
            truth.items(),
            truth.latents()
        )));
    }
    let k = est.latents();
    let mut best: Option<ColumnAlignment> = None;
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        let mut d = 0usize;
        for j in 0..est.items() {
            for (pos, &src) in perm.iter().enumerate() {
                if est.get(j, src) != truth.get(j, pos) {
                    d += 1;
                }
            }
        }
        if best.as_ref().is_none_or(|b| d < b.shd) {
            best = Some(ColumnAlignment {
                perm: perm.clone(),
                shd: d,
            });
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(best.expect("K >= 1"))
}

/// Advance to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(rows: &[&[u8]]) -> BipartiteGraph {
        BipartiteGraph::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn shd_gamma_examples() {
        let dt = gamma(&[
            &[1, 0, 0],
            &[1, 1, 0],
            &[1, 0, 1],
            &[1, 1, 1],
            &[1, 0, 1],
            &[0, 1, 0],
            &[0, 1, 1],
            &[0, 0, 0],
        ]);
        assert_eq!(shd_gamma(&dt, &dt).unwrap(), 0);

        let dense = gamma(&[
            &[1, 0, 0],
            &[1, 1, 1],
            &[1, 0, 1],
            &[1, 1, 1],
            &[1, 0, 1],
            &[0, 1, 1],
            &[0, 1, 1],
            &[0, 0, 0],
        ]);
        // the dense variant flips rows 2 and 6 in column 3
        assert_eq!(shd_gamma(&dense, &dt).unwrap(), 2);

        let zeros = gamma(&[
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
            &[0, 0, 0],
        ]);
        assert_eq!(shd_gamma(&zeros, &dt).unwrap(), 13);
    }

    #[test]
    fn shd_gamma_shape_mismatch() {
        let a = gamma(&[&[1, 0], &[0, 1]]);
        let b = gamma(&[&[1], &[0]]);
        assert!(shd_gamma(&a, &b).is_err());
    }

    #[test]
    fn align_identity_and_swap() {
        let truth = gamma(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 0]]);
        let id = align_columns(&truth, &truth).unwrap();
        assert_eq!(id.perm, vec![0, 1, 2]);
        assert_eq!(id.shd, 0);

        // est = truth with columns 0 and 1 swapped
        let est = gamma(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1], &[1, 1, 0]]);
        let a = align_columns(&est, &truth).unwrap();
        assert_eq!(a.perm, vec![1, 0, 2]);
        assert_eq!(a.shd, 0);
    }

    #[test]
    fn align_matches_brute_force_on_random_pairs() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = BipartiteGraph::from_fn(8, 3, |_, _| rng.random::<bool>());
            let b = BipartiteGraph::from_fn(8, 3, |_, _| rng.random::<bool>());
            let got = align_columns(&a, &b).unwrap();
            // brute force over the 6 permutations of three columns
            let perms: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let mut best = usize::MAX;
            for p in perms {
                let permuted = BipartiteGraph::from_fn(8, 3, |j, k| a.get(j, p[k]));
                best = best.min(shd_gamma(&permuted, &b).unwrap());
            }
            assert_eq!(got.shd, best);
        }
    }
}
