//! The J×K latent-to-observed adjacency matrix.

use super::GraphError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};

/// Bipartite adjacency from latents to observed items: entry `(j, k)` is 1
/// when latent `k` is a parent of item `j`.
///
/// All-zero columns are representable on purpose; nondegeneracy is an
/// operation-level check, not a type invariant, so counterexample graphs
/// stay expressible.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct BipartiteGraph {
    j: usize,
    k: usize,
    bits: Vec<bool>,
}

impl BipartiteGraph {
    /// Build from item rows; every row must have the same length and 0/1 entries.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self, GraphError> {
        if rows.is_empty() {
            return Err(GraphError::Dimension("need at least one item row".into()));
        }
        let k = rows[0].len();
        if k == 0 {
            return Err(GraphError::Dimension("need at least one latent".into()));
        }
        let mut bits = Vec::with_capacity(rows.len() * k);
        for (j, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(GraphError::Dimension(format!(
                    "row {} has length {}, expected {}",
                    j + 1,
                    row.len(),
                    k
                )));
            }
            for &e in row {
                match e {
                    0 => bits.push(false),
                    1 => bits.push(true),
                    other => {
                        return Err(GraphError::Parse(format!(
                            "entry {} in row {} is not 0/1",
                            other,
                            j + 1
                        )))
                    }
                }
            }
        }
        Ok(Self {
            j: rows.len(),
            k,
            bits,
        })
    }

    /// Build from a predicate over (item, latent).
    pub fn from_fn(j: usize, k: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(j >= 1 && k >= 1, "graph must be at least 1x1");
        let mut bits = Vec::with_capacity(j * k);
        for jj in 0..j {
            for kk in 0..k {
                bits.push(f(jj, kk));
            }
        }
        Self { j, k, bits }
    }

    /// Number of observed items (rows).
    pub fn items(&self) -> usize {
        self.j
    }

    /// Number of latent variables (columns).
    pub fn latents(&self) -> usize {
        self.k
    }

    /// Entry (item, latent).
    #[inline]
    pub fn get(&self, item: usize, latent: usize) -> bool {
        self.bits[item * self.k + latent]
    }

    /// Latent parents of an item, ascending.
    pub fn parents_of_item(&self, item: usize) -> Vec<usize> {
        (0..self.k).filter(|&k| self.get(item, k)).collect()
    }

    /// Observed children of a latent, ascending.
    pub fn children_of_latent(&self, latent: usize) -> Vec<usize> {
        (0..self.j).filter(|&j| self.get(j, latent)).collect()
    }

    /// Count of ones in a column.
    pub fn column_sum(&self, latent: usize) -> usize {
        (0..self.j).filter(|&j| self.get(j, latent)).count()
    }

    /// Total number of edges.
    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Restriction to a subset of rows, in the given order.
    pub fn submatrix(&self, rows: &[usize]) -> BipartiteGraph {
        BipartiteGraph::from_fn(rows.len(), self.k, |i, k| self.get(rows[i], k))
    }

    /// Write as CSV with header `k1,...,kK` and one 0/1 row per item.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GraphError> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.k).map(|k| format!("k{k}")).collect();
        wtr.write_record(&header)
            .map_err(|e| GraphError::Parse(e.to_string()))?;
        for j in 0..self.j {
            let row: Vec<&str> = (0..self.k)
                .map(|k| if self.get(j, k) { "1" } else { "0" })
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
        let headers = rdr
            .headers()
            .map_err(|e| GraphError::Parse(e.to_string()))?
            .clone();
        let k = headers.len();
        if k == 0 {
            return Err(GraphError::Parse("empty header".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| GraphError::Parse(format!("row {}: {}", i + 2, e)))?;
            let mut row = Vec::with_capacity(k);
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

impl From<BipartiteGraph> for Vec<Vec<u8>> {
    fn from(g: BipartiteGraph) -> Self {
        (0..g.j)
            .map(|j| (0..g.k).map(|k| g.get(j, k) as u8).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<u8>>> for BipartiteGraph {
    type Error = GraphError;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self, Self::Error> {
        Self::from_rows(rows)
    }
}

impl fmt::Debug for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BipartiteGraph {}x{}", self.j, self.k)?;
        for j in 0..self.j {
            for k in 0..self.k {
                write!(f, "{}", self.get(j, k) as u8)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_entries() {
        assert!(BipartiteGraph::from_rows(vec![vec![0, 2]]).is_err());
        assert!(BipartiteGraph::from_rows(vec![vec![0, 1], vec![1]]).is_err());
        assert!(BipartiteGraph::from_rows(vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = BipartiteGraph::from_rows(vec![vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k1,k2,k3\n"));
        let back = BipartiteGraph::read_csv(&buf[..]).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn csv_rejects_non_binary() {
        let text = "k1,k2\n1,0\n2,1\n";
        assert!(BipartiteGraph::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = BipartiteGraph::from_rows(vec![vec![1, 0], vec![1, 1]]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, "[[1,0],[1,1]]");
        let back: BipartiteGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
    }
}
