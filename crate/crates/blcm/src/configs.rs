//! Bit-level helpers for latent configuration indices.
//!
//! A configuration `h ∈ {0,1}^K` is stored as the integer `Σ_k h_k 2^k`
//! (0-based `k`), so coordinate `k` is bit `k` of the index. Every module in
//! the crate shares this ordering.

/// Number of latent configurations for `k` latent variables.
#[inline]
pub fn n_configs(k: usize) -> usize {
    1usize << k
}

/// Coordinate `k` of configuration `h`.
#[inline]
pub fn bit(h: usize, k: usize) -> bool {
    (h >> k) & 1 == 1
}

/// Configuration `h` with coordinate `k` set to `v`.
#[inline]
pub fn with_bit(h: usize, k: usize, v: bool) -> usize {
    if v {
        h | (1 << k)
    } else {
        h & !(1 << k)
    }
}

/// Number of ones in the configuration.
#[inline]
pub fn weight(h: usize) -> u32 {
    h.count_ones()
}

/// Compress a full configuration onto the given coordinate subset.
///
/// `coords` must be strictly increasing; the result indexes the sub-vector
/// `(h_{coords[0]}, h_{coords[1]}, ...)` with the same bit convention.
#[inline]
pub fn project(h: usize, coords: &[usize]) -> usize {
    let mut out = 0usize;
    for (i, &c) in coords.iter().enumerate() {
        if bit(h, c) {
            out |= 1 << i;
        }
    }
    out
}

/// Insert a bit at position `pos`, shifting higher bits left by one.
///
/// Maps a configuration over `K-1` coordinates to one over `K` coordinates
/// whose `pos`-th coordinate is `v`.
#[inline]
pub fn insert_bit(m: usize, pos: usize, v: bool) -> usize {
    let low = m & ((1 << pos) - 1);
    let high = m >> pos;
    low | ((v as usize) << pos) | (high << (pos + 1))
}

/// `a ⪰ b` elementwise on the first `k` coordinates.
#[inline]
pub fn dominates(a: usize, b: usize, k: usize) -> bool {
    let mask = (1usize << k) - 1;
    (a & b & mask) == (b & mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_bit_round_trip() {
        // inserting then projecting away the new coordinate is the identity
        for m in 0..16usize {
            for pos in 0..5 {
                for v in [false, true] {
                    let h = insert_bit(m, pos, v);
                    assert_eq!(bit(h, pos), v);
                    let coords: Vec<usize> = (0..5).filter(|&c| c != pos).collect();
                    assert_eq!(project(h, &coords), m);
                }
            }
        }
    }

    #[test]
    fn project_matches_manual() {
        // h = (1,0,1,1) -> project onto coords {0,2} gives (1,1) = 3
        let h = 0b1101usize;
        assert_eq!(project(h, &[0, 2]), 0b11);
        assert_eq!(project(h, &[1]), 0);
        assert_eq!(project(h, &[3]), 1);
    }

    #[test]
    fn dominance() {
        assert!(dominates(0b111, 0b101, 3));
        assert!(!dominates(0b010, 0b101, 3));
        assert!(dominates(0b101, 0b101, 3));
    }
}
