//! Gaussian tail function and friends.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `ln √(2π)`
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_6;

/// Standard normal tail `Q(x) = P(N(0,1) > x) = erfc(x/√2)/2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Mills ratio `Q(x)/φ(x)` by its continued fraction, for `x ≥ 8`.
fn mills_ratio(x: f64) -> f64 {
    // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + …)))), evaluated bottom-up
    let mut tail = x;
    for k in (1..=60).rev() {
        tail = x + k as f64 / tail;
    }
    1.0 / tail
}

/// `ln Q(x)`, finite for every finite `x`.
pub fn ln_q(x: f64) -> f64 {
    if x > 8.0 {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    } else if x < -8.0 {
        // Q(x) = 1 − Q(−x) with Q(−x) < 7e-16
        (-q_function(-x)).ln_1p()
    } else {
        q_function(x).ln()
    }
}

/// `ln Φ(x) = ln(1 − Q(x)) = ln Q(−x)`.
pub fn ln_phi_cdf(x: f64) -> f64 {
    ln_q(-x)
}

/// `ln` of the `N(0, σ²)` density at `x`.
pub fn ln_normal_pdf(x: f64, sigma: f64) -> f64 {
    -0.5 * (x / sigma) * (x / sigma) - sigma.ln() - LN_SQRT_2PI
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}
