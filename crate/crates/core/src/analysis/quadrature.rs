//! Globally adaptive Gauss–Kronrod (10/21-point) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 21-point Kronrod abscissae (non-negative half, descending) and weights, with the
// embedded 10-point Gauss weights on the odd-indexed abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// One 21-point Kronrod estimate on `[a, b]` and its error bound `|K − G|`.
pub fn gauss_kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target; the run stops once either target is met.
    pub rel_tol: f64,
    /// Number of equal pieces the interval starts with.
    pub initial_pieces: usize,
    /// Cap on the total number of subintervals.
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-14,
            initial_pieces: 16,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, bisecting the piece with the largest error
/// estimate until the summed error meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let n0 = opts.initial_pieces.max(1);
    let width = (b - a) / n0 as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    for i in 0..n0 {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (value, error) = gauss_kronrod21(&f, lo, hi);
        heap.push(Piece {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    let mut value: f64 = heap.iter().map(|p| p.value).sum();
    let mut error: f64 = heap.iter().map(|p| p.error).sum();
    loop {
        if !(value.is_finite() && error.is_finite()) {
            return Err(Error::NonConvergence {
                tolerance: opts.abs_tol,
                error,
            });
        }
        let target = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
        if error <= target(value) || heap.len() >= opts.max_intervals {
            // running sums drift; decide on exact sums
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
            if error <= target(value) {
                return Ok(QuadResult {
                    value,
                    error,
                    intervals: heap.len(),
                });
            }
            if heap.len() >= opts.max_intervals {
                return Err(Error::NonConvergence {
                    tolerance: opts.abs_tol,
                    error,
                });
            }
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at machine resolution; keep its estimate
            error -= worst.error;
            heap.push(Piece {
                error: 0.0,
                ..worst
            });
            continue;
        }
        value -= worst.value;
        error -= worst.error;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (piece_value, piece_error) = gauss_kronrod21(&f, lo, hi);
            value += piece_value;
            error += piece_error;
            heap.push(Piece {
                a: lo,
                b: hi,
                value: piece_value,
                error: piece_error,
            });
        }
    }
}
