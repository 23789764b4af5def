//! The K-node latent causal DAG.

use super::GraphError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};

/// Directed acyclic graph over the latent variables; entry `(k, l)` is the
/// edge `k → l`. The constructor rejects cycles and self-loops.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct LatentDag {
    k: usize,
    adj: Vec<bool>,
}

impl LatentDag {
    /// Build from a K×K 0/1 adjacency (rows are edge sources).
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self, GraphError> {
        let k = rows.len();
        if k == 0 {
            return Err(GraphError::Dimension("need at least one latent".into()));
        }
        let mut adj = vec![false; k * k];
        for (a, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(GraphError::Dimension(format!(
                    "row {} has length {}, expected {}",
                    a + 1,
                    row.len(),
                    k
                )));
            }
            for (b, &e) in row.iter().enumerate() {
                match e {
                    0 => {}
                    1 => {
                        if a == b {
                            return Err(GraphError::Parse(format!(
                                "self-loop at node {}",
                                a + 1
                            )));
                        }
                        adj[a * k + b] = true;
                    }
                    other => {
                        return Err(GraphError::Parse(format!(
                            "entry {} in row {} is not 0/1",
                            other,
                            a + 1
                        )))
                    }
                }
            }
        }
        let dag = Self { k, adj };
        if dag.topological_order().is_none() {
            return Err(GraphError::Cycle);
        }
        Ok(dag)
    }

    /// Edge list constructor.
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut rows = vec![vec![0u8; k]; k];
        for &(a, b) in edges {
            if a >= k || b >= k {
                return Err(GraphError::Dimension(format!(
                    "edge ({a},{b}) out of range for K={k}"
                )));
            }
            rows[a][b] = 1;
        }
        Self::from_rows(rows)
    }

    /// DAG with no edges.
    pub fn empty(k: usize) -> Self {
        Self {
            k,
            adj: vec![false; k * k],
        }
    }

    /// Number of latent nodes.
    pub fn latents(&self) -> usize {
        self.k
    }

    /// Whether the edge `a → b` is present.
    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.k + b]
    }

    /// Directed edges in (source, target) order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.k {
            for b in 0..self.k {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Parents of a node, ascending.
    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.k).filter(|&a| self.has_edge(a, v)).collect()
    }

    /// A topological order, or `None` if cyclic (checked by Kahn's algorithm).
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.k];
        for a in 0..self.k {
            for b in 0..self.k {
                if self.has_edge(a, b) {
                    indeg[b] += 1;
                }
            }
        }
        let mut queue: Vec<usize> = (0..self.k).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(self.k);
        while let Some(v) = queue.pop() {
            order.push(v);
            for b in 0..self.k {
                if self.has_edge(v, b) {
                    indeg[b] -= 1;
                    if indeg[b] == 0 {
                        queue.push(b);
                    }
                }
            }
        }
        (order.len() == self.k).then_some(order)
    }

    /// Write as CSV with header `k1,...,kK` and one 0/1 row per source node.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GraphError> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.k).map(|k| format!("k{k}")).collect();
        wtr.write_record(&header)
            .map_err(|e| GraphError::Parse(e.to_string()))?;
        for a in 0..self.k {
            let row: Vec<&str> = (0..self.k)
                .map(|b| if self.has_edge(a, b) { "1" } else { "0" })
                .collect();
            wtr.write_record(&row)
                .map_err(|e| GraphError::Parse(e.to_string()))?;
        }
        wtr.flush().map_err(|e| GraphError::Parse(e.to_string()))?;
        Ok(())
    }

    /// Parse the CSV format written by [`Self::write_csv`].
    pub fn read_csv<R: Read>(r: R) -> Result<Self, GraphError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GraphError::Parse(format!("row {}: {}", i + 2, e)))?;
            let mut row = Vec::new();
            for field in rec.iter() {
                match field.trim() {
                    "0" => row.push(0u8),
                    "1" => row.push(1u8),
                    other => {
                        return Err(GraphError::Parse(format!(
                            "row {}: entry '{}' is not 0/1",
                            i + 2,
                            other
                        )))
                    }
                }
            }
            rows.push(row);
        }
        Self::from_rows(rows)
    }
}

impl From<LatentDag> for Vec<Vec<u8>> {
    fn from(d: LatentDag) -> Self {
        (0..d.k)
            .map(|a| (0..d.k).map(|b| d.has_edge(a, b) as u8).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<u8>>> for LatentDag {
    type Error = GraphError;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self, Self::Error> {
        Self::from_rows(rows)
    }
}

impl fmt::Debug for LatentDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatentDag({} nodes, edges {:?})", self.k, self.edges())
    }
}
