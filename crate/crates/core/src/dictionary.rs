//! Structured dictionary `A = [U_1 … U_G]` with `U_g = P_g D_g U_1`.
//!
//! `U_1` is the orthonormal Walsh–Hadamard matrix of order `M` (entries `±1/√M`),
//! applied through an in-place butterfly. `P_1 = D_1 = I`; `P_2 … P_G` are row
//! permutations drawn with a seeded Fisher–Yates shuffle and `D_g` are diagonal
//! `±1` sign matrices drawn from the same stream. The dense `M × GM` matrix is
//! never formed.
//!
//! Every row permutation fixes the all-ones column of `U_1`, so without signs
//! the blocks share a column and single-nonzero codes lose injectivity. With
//! signs (the default) a draw is also rejected when one of its columns equals
//! `±` a column of an earlier block, checked whenever `G M² ≤ 2^26`.
//! `row_signs = false` gives the plain row-permutation dictionary.
//!
//! Permutation convention: `perm[i] = π(i)` and `(P z)_i = z_{π(i)}`; signs are
//! indexed by source row, `(P D z)_i = d_{π(i)} z_{π(i)}`.
//!
//! Block indices are 0-based throughout the crate.

use std::marker::PhantomData;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code_params::ValidatedParams;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Orthonormal base transform `U_1` of fixed order.
pub trait BaseTransform<T: Real>: Send + Sync {
    fn order(&self) -> usize;
    /// `v ← U_1 v`.
    fn forward(&self, v: &mut [T]);
    /// `v ← U_1ᵀ v`.
    fn adjoint(&self, v: &mut [T]);
}

/// Normalized Walsh–Hadamard transform. Symmetric, so forward and adjoint coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hadamard {
    order: usize,
}

impl Hadamard {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || !order.is_power_of_two() {
            return Err(Error::NonPowerOfTwoM(order));
        }
        Ok(Hadamard { order })
    }
}

impl<T: Real> BaseTransform<T> for Hadamard {
    fn order(&self) -> usize {
        self.order
    }

    fn forward(&self, v: &mut [T]) {
        fwht_in_place(v);
    }

    fn adjoint(&self, v: &mut [T]) {
        fwht_in_place(v);
    }
}

/// In-place orthonormal fast Walsh–Hadamard transform (natural/Sylvester order).
///
/// Panics unless `v.len()` is a power of two.
pub fn fwht_in_place<T: Real>(v: &mut [T]) {
    let n = v.len();
    assert!(n.is_power_of_two(), "fwht length must be a power of two");
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    let scale = T::one() / T::from_usize(n).expect("length fits").sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}

/// Unbiased integer in `0..n` from 64-bit outputs by rejection.
fn bounded(rng: &mut impl RngCore, n: u64) -> u64 {
    debug_assert!(n > 0);
    let rem = (u64::MAX % n + 1) % n;
    loop {
        let x = rng.next_u64();
        if x <= u64::MAX - rem {
            return x % n;
        }
    }
}

/// Fisher–Yates shuffle of `0..m`: for `i = m-1 … 1`, swap `i` with a uniform `j ≤ i`.
fn shuffled_identity(rng: &mut impl RngCore, m: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = bounded(rng, i as u64 + 1) as usize;
        p.swap(i, j);
    }
    p
}

const MAX_PERMUTATION_RETRIES: usize = 1000;
const COLUMN_CHECK_LIMIT: usize = 1 << 26;

/// `G` pairwise distinct permutations of `0..m`, first one the identity.
///
/// Generator: ChaCha8 (`rand_chacha`) seeded through `SeedableRng::seed_from_u64`.
pub fn generate_permutations(m: usize, blocks: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if (1..=20usize).contains(&m) && (1..=m).product::<usize>() < blocks {
        return Err(Error::PermutationExhausted(blocks));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perms: Vec<Vec<usize>> = vec![(0..m).collect()];
    while perms.len() < blocks {
        let mut tries = 0;
        let p = loop {
            let p = shuffled_identity(&mut rng, m);
            if !perms.contains(&p) {
                break p;
            }
            tries += 1;
            if tries >= MAX_PERMUTATION_RETRIES {
                return Err(Error::PermutationExhausted(blocks));
            }
        };
        perms.push(p);
    }
    Ok(perms)
}

/// Sign pattern of column `i` of `P D H` (true = negative), normalized so the
/// first entry is positive, packed into words.
fn column_key(perm: &[usize], flips: &[bool], i: usize) -> Vec<u64> {
    let m = perm.len();
    let negative = |r: usize| {
        let src = perm[r];
        flips[src] ^ ((src & i).count_ones() % 2 == 1)
    };
    let first = negative(0);
    let mut key = vec![0u64; m.div_ceil(64)];
    for r in 0..m {
        if negative(r) ^ first {
            key[r / 64] |= 1 << (r % 64);
        }
    }
    key
}

/// `G` signed row permutations `(π_g, flips_g)`, the first one the identity with
/// no flips. Each later block draws a Fisher–Yates shuffle and then `M` sign
/// bits (one `next_u64` per 64 rows, least significant bit first) and is redrawn
/// if it repeats an earlier block or, when `G M² ≤ 2^26`, if any of its columns
/// equals `±` a column of an earlier block.
pub fn generate_signed_permutations(
    m: usize,
    blocks: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<bool>)>> {
    // at most 2^(M-1) sign patterns up to sign
    if m < 64 && blocks.saturating_mul(m) > 1usize << (m - 1) {
        return Err(Error::PermutationExhausted(blocks));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let identity: (Vec<usize>, Vec<bool>) = ((0..m).collect(), vec![false; m]);
    let check_columns = blocks.saturating_mul(m).saturating_mul(m) <= COLUMN_CHECK_LIMIT;
    let mut seen = std::collections::HashSet::new();
    if check_columns && blocks > 1 {
        for i in 0..m {
            seen.insert(column_key(&identity.0, &identity.1, i));
        }
    }
    let mut out = vec![identity];
    while out.len() < blocks {
        let mut tries = 0;
        let block = loop {
            let perm = shuffled_identity(&mut rng, m);
            let mut flips = Vec::with_capacity(m);
            while flips.len() < m {
                let word = rng.next_u64();
                let take = (m - flips.len()).min(64);
                flips.extend((0..take).map(|b| (word >> b) & 1 == 1));
            }
            let fresh = !out.iter().any(|(p, f)| *p == perm && *f == flips);
            let keys: Option<Vec<Vec<u64>>> = if check_columns {
                let keys: Vec<Vec<u64>> = (0..m).map(|i| column_key(&perm, &flips, i)).collect();
                (!keys.iter().any(|k| seen.contains(k))).then_some(keys)
            } else {
                Some(Vec::new())
            };
            if let (true, Some(keys)) = (fresh, keys) {
                seen.extend(keys);
                break (perm, flips);
            }
            tries += 1;
            if tries >= MAX_PERMUTATION_RETRIES {
                return Err(Error::PermutationExhausted(blocks));
            }
        };
        out.push(block);
    }
    Ok(out)
}

/// The dictionary: base transform plus per-block permutations.
#[derive(Debug, Clone)]
pub struct Dictionary<T: Real, B: BaseTransform<T> = Hadamard> {
    base: B,
    perms: Vec<Vec<usize>>,
    /// Per-block sign of each source row (`±1`).
    signs: Vec<Vec<T>>,
    _scalar: PhantomData<fn() -> T>,
}

impl<T: Real> Dictionary<T, Hadamard> {
    pub fn build(params: &ValidatedParams) -> Result<Self> {
        Self::with_base(params, Hadamard::new(params.blocklength())?)
    }
}

impl<T: Real, B: BaseTransform<T>> Dictionary<T, B> {
    pub fn with_base(params: &ValidatedParams, base: B) -> Result<Self> {
        if base.order() != params.blocklength() {
            return Err(Error::LengthMismatch {
                expected: params.blocklength(),
                actual: base.order(),
            });
        }
        let (m, blocks) = (params.blocklength(), params.blocks());
        let seed = params.params().permutation_seed;
        let (perms, flips): (Vec<_>, Vec<_>) = if params.params().row_signs {
            generate_signed_permutations(m, blocks, seed)?
                .into_iter()
                .unzip()
        } else {
            let perms = generate_permutations(m, blocks, seed)?;
            (perms, vec![vec![false; m]; blocks])
        };
        let signs = flips
            .iter()
            .map(|f| {
                f.iter()
                    .map(|&neg| if neg { -T::one() } else { T::one() })
                    .collect()
            })
            .collect();
        Ok(Dictionary {
            base,
            perms,
            signs,
            _scalar: PhantomData,
        })
    }

    pub fn blocklength(&self) -> usize {
        self.perms[0].len()
    }

    pub fn blocks(&self) -> usize {
        self.perms.len()
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    /// Diagonal of `D_g`, indexed by source row.
    pub fn signs(&self, g: usize) -> Result<&[T]> {
        self.signs
            .get(g)
            .map(Vec::as_slice)
            .ok_or(Error::BlockIndexOutOfRange {
                index: g,
                blocks: self.blocks(),
            })
    }

    pub fn permutation(&self, g: usize) -> Result<&[usize]> {
        self.perms
            .get(g)
            .map(Vec::as_slice)
            .ok_or(Error::BlockIndexOutOfRange {
                index: g,
                blocks: self.blocks(),
            })
    }

    fn check(&self, g: usize, len: usize) -> Result<()> {
        if g >= self.blocks() {
            return Err(Error::BlockIndexOutOfRange {
                index: g,
                blocks: self.blocks(),
            });
        }
        if len != self.blocklength() {
            return Err(Error::LengthMismatch {
                expected: self.blocklength(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `U_1ᵀ v`.
    pub fn fwht(&self, v: &[T]) -> Result<Vec<T>> {
        self.check(0, v.len())?;
        let mut out = v.to_vec();
        self.base.adjoint(&mut out);
        Ok(out)
    }

    /// `c = U_g x_g = P_g D_g U_1 x_g`.
    pub fn synthesize(&self, g: usize, x: &[T]) -> Result<Vec<T>> {
        self.check(g, x.len())?;
        let mut z = x.to_vec();
        self.base.forward(&mut z);
        if g == 0 {
            return Ok(z);
        }
        let signs = &self.signs[g];
        Ok(self.perms[g]
            .iter()
            .map(|&src| signs[src] * z[src])
            .collect())
    }

    /// Sparse form of [`synthesize`](Self::synthesize): `x` given as `(index, value)` pairs.
    pub fn synthesize_sparse(&self, g: usize, entries: &[(usize, T)]) -> Result<Vec<T>> {
        let mut x = vec![T::zero(); self.blocklength()];
        for &(i, v) in entries {
            if i >= x.len() {
                return Err(Error::LengthMismatch {
                    expected: x.len(),
                    actual: i + 1,
                });
            }
            x[i] += v;
        }
        self.synthesize(g, &x)
    }

    /// `y_g = U_gᵀ y = U_1ᵀ D_g P_gᵀ y`.
    pub fn analyze(&self, g: usize, y: &[T]) -> Result<Vec<T>> {
        self.check(g, y.len())?;
        let mut t = if g == 0 {
            y.to_vec()
        } else {
            let mut t = vec![T::zero(); y.len()];
            let signs = &self.signs[g];
            for (&src, &v) in self.perms[g].iter().zip(y) {
                t[src] = signs[src] * v;
            }
            t
        };
        self.base.adjoint(&mut t);
        Ok(t)
    }

    /// Column `i` of block `g`.
    pub fn column(&self, g: usize, i: usize) -> Result<Vec<T>> {
        self.synthesize_sparse(g, &[(i, T::one())])
    }
}
