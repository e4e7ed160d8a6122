//! Bijection between bit strings and per-layer (support, levels) choices.
//!
//! Supports are ranked in the colexicographic combinatorial number system over
//! *positions* within the ordered candidate set: the sorted positions
//! `c_0 < c_1 < … < c_{K-1}` have rank `Σ_i C(c_i, i + 1)`. Only the first
//! `2^position_bits` ranks are ever produced by the encoder; the rest are
//! unreachable and [`LayerMapping::layer_to_bits`] rejects them.
//!
//! Levels are assigned to the support in ascending index order and packed as a
//! mixed-radix number in base `J`, first support element most significant.
//!
//! Joining the block-index choice with the first layer's position choice
//! (selecting one column out of `N = G·M` and then `K - 1` more from the same
//! block) carries the same information as the separate fields used here:
//!
//! ```
//! use boss::index_map::binomial;
//! let (g, m, k1) = (8usize, 64usize, 3usize);
//! let lhs = (g as f64).log2() + (binomial(m, k1).unwrap() as f64).log2();
//! let rhs = ((g * m) as f64).log2()
//!     + (binomial(m - 1, k1 - 1).unwrap() as f64 / k1 as f64).log2();
//! assert!((lhs - rhs).abs() < 1e-12);
//! ```

use crate::bits::{push_uint, read_uint};
use crate::error::{Error, Result};

/// Exact binomial coefficient, `None` on `u128` overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `⌊log2 x⌋` for `x ≥ 1`.
pub fn floor_log2(x: u128) -> u32 {
    assert!(x > 0, "log2 of zero");
    127 - x.leading_zeros()
}

/// Colex rank of a `K`-subset of positions `0..n`. Input order does not matter.
pub fn rank_positions(positions: &[usize]) -> u128 {
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .enumerate()
        .map(|(i, &c)| binomial(c, i + 1).expect("rank below C(n, k) fits u128"))
        .sum()
}

/// Colex rank of `subset` over the ordered (ascending) `candidates`.
pub fn rank_subset(subset: &[usize], candidates: &[usize]) -> Result<u128> {
    let positions = subset
        .iter()
        .map(|&s| {
            candidates
                .binary_search(&s)
                .map_err(|_| Error::ElementNotInCandidateSet(s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_positions(&positions))
}

/// Inverse of [`rank_positions`]: the ascending `k`-subset of `0..n` with colex rank `rank`.
pub fn unrank_subset(rank: u128, n: usize, k: usize) -> Result<Vec<usize>> {
    let total = binomial(n, k).ok_or_else(|| Error::CountOverflow(format!("C({n}, {k})")))?;
    if rank >= total {
        return Err(Error::RankOutOfRange { rank, n, k });
    }
    let mut out = vec![0usize; k];
    let mut r = rank;
    let mut hi = n; // exclusive upper bound on the next position
    for i in (1..=k).rev() {
        // largest c in [i-1, hi) with C(c, i) <= r
        let (mut lo, mut up) = (i - 1, hi - 1);
        while lo < up {
            let mid = lo + (up - lo).div_ceil(2);
            match binomial(mid, i) {
                Some(v) if v <= r => lo = mid,
                _ => up = mid - 1,
            }
        }
        r -= binomial(lo, i).expect("checked above");
        out[i - 1] = lo;
        hi = lo;
    }
    Ok(out)
}

/// Bit mapping for one layer over a fixed candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerMapping {
    /// Ascending permissible indices.
    pub candidates: Vec<usize>,
    pub sparsity: usize,
    pub levels: usize,
    pub position_bits: usize,
    pub level_bits: usize,
}

impl LayerMapping {
    pub fn new(
        candidates: Vec<usize>,
        sparsity: usize,
        levels: usize,
        position_bits: usize,
        level_bits: usize,
    ) -> Self {
        debug_assert!(candidates.windows(2).all(|w| w[0] < w[1]));
        LayerMapping {
            candidates,
            sparsity,
            levels,
            position_bits,
            level_bits,
        }
    }

    pub fn bits(&self) -> usize {
        self.position_bits + self.level_bits
    }

    /// Maps `bits` (length [`bits`](Self::bits)) to an ascending support and the
    /// matching level indices.
    pub fn bits_to_layer(&self, bits: &[bool]) -> Result<(Vec<usize>, Vec<usize>)> {
        if bits.len() != self.bits() {
            return Err(Error::LengthMismatch {
                expected: self.bits(),
                actual: bits.len(),
            });
        }
        let (pos_bits, lvl_bits) = bits.split_at(self.position_bits);
        let positions = unrank_subset(read_uint(pos_bits), self.candidates.len(), self.sparsity)?;
        let support = positions.iter().map(|&p| self.candidates[p]).collect();

        let mut code = read_uint(lvl_bits);
        let mut levels = vec![0usize; self.sparsity];
        for slot in levels.iter_mut().rev() {
            *slot = (code % self.levels as u128) as usize;
            code /= self.levels as u128;
        }
        Ok((support, levels))
    }

    /// Inverse of [`bits_to_layer`](Self::bits_to_layer). `support` and `levels` are
    /// paired element-wise and may come in any order.
    ///
    /// Fails with [`Error::RankOutOfRange`] when the support or the level tuple is
    /// not reachable by any bit string.
    pub fn layer_to_bits(&self, support: &[usize], levels: &[usize]) -> Result<Vec<bool>> {
        if support.len() != self.sparsity || levels.len() != self.sparsity {
            return Err(Error::LengthMismatch {
                expected: self.sparsity,
                actual: support.len().min(levels.len()),
            });
        }
        let mut pairs: Vec<(usize, usize)> = support
            .iter()
            .copied()
            .zip(levels.iter().copied())
            .collect();
        pairs.sort_unstable();
        let sorted: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let rank = rank_subset(&sorted, &self.candidates)?;
        if self.position_bits < 128 && rank >> self.position_bits != 0 {
            return Err(Error::RankOutOfRange {
                rank,
                n: self.candidates.len(),
                k: self.sparsity,
            });
        }
        let mut code: u128 = 0;
        for &(_, lvl) in &pairs {
            if lvl >= self.levels {
                return Err(Error::RankOutOfRange {
                    rank: lvl as u128,
                    n: self.levels,
                    k: 1,
                });
            }
            code = code * self.levels as u128 + lvl as u128;
        }
        if self.level_bits < 128 && code >> self.level_bits != 0 {
            return Err(Error::RankOutOfRange {
                rank: code,
                n: self.levels,
                k: self.sparsity,
            });
        }
        let mut out = Vec::with_capacity(self.bits());
        push_uint(&mut out, rank, self.position_bits);
        push_uint(&mut out, code, self.level_bits);
        Ok(out)
    }
}

/// Ascending `0..m` with the `excluded` indices removed.
pub fn remaining_candidates(m: usize, excluded: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; m];
    for &e in excluded {
        mask[e] = true;
    }
    (0..m).filter(|&i| !mask[i]).collect()
}
