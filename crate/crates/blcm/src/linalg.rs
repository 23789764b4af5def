//! Numerical rank and small dense-matrix helpers shared by the oracle module.

use nalgebra::DMatrix;

/// Outcome of a singular-value rank computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    /// Count of singular values above `rel_tol * max_sv`.
    pub rank: usize,
    /// Largest singular value.
    pub max_sv: f64,
    /// Smallest singular value of the full spectrum.
    pub min_sv: f64,
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> RankInfo {
    if m.is_empty() {
        return RankInfo {
            rank: 0,
            max_sv: 0.0,
            min_sv: 0.0,
        };
    }
    let svd = m.clone().svd(false, false);
    let mut max_sv = 0.0f64;
    let mut min_sv = f64::INFINITY;
    for &s in svd.singular_values.iter() {
        max_sv = max_sv.max(s);
        min_sv = min_sv.min(s);
    }
    if max_sv == 0.0 {
        return RankInfo {
            rank: 0,
            max_sv: 0.0,
            min_sv: 0.0,
        };
    }
    let thresh = rel_tol * max_sv;
    let rank = svd.singular_values.iter().filter(|&&s| s > thresh).count();
    RankInfo {
        rank,
        max_sv,
        min_sv,
    }
}

/// Max-norm equality of two columns.
pub fn columns_close(m: &DMatrix<f64>, a: usize, b: usize, tol: f64) -> bool {
    (0..m.nrows()).all(|r| (m[(r, a)] - m[(r, b)]).abs() <= tol)
}

/// Group column indices into blocks of (tolerance-)equal columns.
///
/// Columns are compared against the first member of each existing block, so
/// the grouping is deterministic. Blocks come out ordered by their smallest
/// member.
pub fn equal_column_blocks(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for c in 0..m.ncols() {
        match blocks.iter_mut().find(|b| columns_close(m, b[0], c, tol)) {
            Some(b) => b.push(c),
            None => blocks.push(vec![c]),
        }
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_identity() {
        let m = DMatrix::<f64>::identity(4, 4);
        let info = numerical_rank(&m, 1e-8);
        assert_eq!(info.rank, 4);
        assert!((info.min_sv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_of_rank_one() {
        let m = DMatrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        assert_eq!(numerical_rank(&m, 1e-8).rank, 1);
    }

    #[test]
    fn zero_matrix() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(numerical_rank(&m, 1e-8).rank, 0);
    }

    #[test]
    fn column_blocks() {
        let m = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, 1.0, 3.0, 0.0, 1.0, 0.0, 1.0]);
        let blocks = equal_column_blocks(&m, 1e-12);
        assert_eq!(blocks, vec![vec![0, 2], vec![1], vec![3]]);
    }
}
