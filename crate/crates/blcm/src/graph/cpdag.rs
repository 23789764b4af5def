//! Markov-equivalence class representatives and their SHD metric.

use super::pdag::Pdag;
use super::{GraphError, LatentDag};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Completed partially directed acyclic graph: directed edges as ordered
/// pairs, undirected edges as unordered pairs. The two sets are disjoint on
/// vertex pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cpdag {
    k: usize,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

impl Cpdag {
    /// Build from explicit edge sets; undirected pairs may come in either order.
    pub fn new(
        k: usize,
        directed: impl IntoIterator<Item = (usize, usize)>,
        undirected: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut dir = BTreeSet::new();
        let mut und = BTreeSet::new();
        for (a, b) in directed {
            if a == b || a >= k || b >= k {
                return Err(GraphError::Dimension(format!("bad edge ({a},{b})")));
            }
            if dir.contains(&(b, a)) {
                return Err(GraphError::Parse(format!(
                    "both directions present for pair ({a},{b})"
                )));
            }
            dir.insert((a, b));
        }
        for (a, b) in undirected {
            if a == b || a >= k || b >= k {
                return Err(GraphError::Dimension(format!("bad edge ({a},{b})")));
            }
            und.insert((a.min(b), a.max(b)));
        }
        for &(a, b) in &dir {
            if und.contains(&(a.min(b), a.max(b))) {
                return Err(GraphError::Parse(format!(
                    "pair ({a},{b}) is both directed and undirected"
                )));
            }
        }
        Ok(Self {
            k,
            directed: dir,
            undirected: und,
        })
    }

    /// CPDAG with no edges.
    pub fn empty(k: usize) -> Self {
        Self {
            k,
            directed: BTreeSet::new(),
            undirected: BTreeSet::new(),
        }
    }

    /// Number of nodes.
    pub fn nodes(&self) -> usize {
        self.k
    }

    /// Directed edge set (ordered pairs).
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.directed.iter().copied()
    }

    /// Undirected edge set (pairs with `a < b`).
    pub fn undirected_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.undirected.iter().copied()
    }

    /// Total edge count.
    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    /// Orientation class of the unordered pair {a, b}, with `a < b`.
    fn pair_class(&self, a: usize, b: usize) -> PairClass {
        if self.directed.contains(&(a, b)) {
            PairClass::Forward
        } else if self.directed.contains(&(b, a)) {
            PairClass::Backward
        } else if self.undirected.contains(&(a, b)) {
            PairClass::Undirected
        } else {
            PairClass::Absent
        }
    }

    pub(crate) fn from_pdag(p: &Pdag) -> Self {
        let mut dir = BTreeSet::new();
        let mut und = BTreeSet::new();
        for a in 0..p.n {
            for b in 0..p.n {
                if p.has_directed(a, b) {
                    dir.insert((a, b));
                }
                if a < b && p.has_undirected(a, b) {
                    und.insert((a, b));
                }
            }
        }
        Self {
            k: p.n,
            directed: dir,
            undirected: und,
        }
    }
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum PairClass {
    Absent,
    Forward,
    Backward,
    Undirected,
}

/// Markov-equivalence class representative of a DAG: skeleton plus
/// v-structures, closed under Meek's orientation rules.
pub fn dag_to_cpdag(d: &LatentDag) -> Cpdag {
    let k = d.latents();
    let mut adj = vec![false; k * k];
    for (a, b) in d.edges() {
        adj[a * k + b] = true;
    }
    let p = Pdag::cpdag_of_dag(k, &adj);
    Cpdag::from_pdag(&p)
}

/// SHD between CPDAGs in the count-accuracy convention: per vertex pair,
/// +1 if edge presence differs, +1 if present in both with a different
/// orientation class (directed forward / backward / undirected — a reversed
/// edge costs one).
pub fn shd_cpdag(est: &Cpdag, truth: &Cpdag) -> Result<usize, GraphError> {
    if est.nodes() != truth.nodes() {
        return Err(GraphError::Dimension(format!(
            "{} vs {} nodes",
            est.nodes(),
            truth.nodes()
        )));
    }
    let mut d = 0;
    for a in 0..est.nodes() {
        for b in (a + 1)..est.nodes() {
            let ce = est.pair_class(a, b);
            let ct = truth.pair_class(a, b);
            match (ce == PairClass::Absent, ct == PairClass::Absent) {
                (true, true) => {}
                (false, false) => {
                    if ce != ct {
                        d += 1;
                    }
                }
                _ => d += 1,
            }
        }
    }
    Ok(d)
}
