//! Exact block error rate of single-layer (`K = 1`, `A = {1}`) codes under the
//! two-stage decoder, by numerical integration.
//!
//! With `σ` the noise standard deviation and `Φ = 1 − Q` the normal CDF:
//!
//! * stage 1 fails when the transmitted index does not hold the largest
//!   transformed sample:
//!   `P(E1) = (M−1) ∫ Φ((y−1)/σ) Φ(y/σ)^{M−2} φ_σ(y) dy`,
//!   the complement of `1 − (M−1) ∫ Q((y−1)/σ) Φ(y/σ)^{M−2} φ_σ(y) dy`,
//!   which stays accurate when `P(E1)` is tiny;
//! * stage 2 fails, given stage 1 succeeded, when any of the `M(G−1)` competing
//!   columns wins: with `W` distributed as the inner product of two random unit
//!   vectors, `I = E[Q((W−1)/√(2σ²))]` and `P(E2|E1ᶜ) = 1 − I^{M(G−1)}`;
//! * `P_BLER = P(E1) + P(E2|E1ᶜ)(1 − P(E1))`.
//!
//! `1 − I` is integrated directly and the power is taken as
//! `−expm1(M(G−1) · log1p(−(1−I)))`, so large `M(G−1)` costs no precision.
//! The `W` integral uses `w = sin θ`, which removes the endpoint singularity at
//! `M = 2` and the `(1−w²)` cancellation near `±1`.

pub mod quadrature;
pub mod special;

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use quadrature::{integrate, QuadOptions};
use special::{ln_gamma, ln_normal_pdf, ln_phi_cdf, ln_q};

/// Default absolute tolerance of every probability.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// One evaluated point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisPoint {
    pub blocklength: usize,
    pub blocks: usize,
    pub eb_n0_db: f64,
    pub noise_var: f64,
    pub p_stage1: f64,
    pub p_stage2_given: f64,
    pub p_bler: f64,
    pub quad_tolerance: f64,
}

/// `σ² = 1 / (2 (⌊log2 M⌋ + ⌊log2 G⌋) Eb/N0)`.
pub fn noise_variance(blocklength: usize, blocks: usize, eb_n0_db: f64) -> f64 {
    let bits = blocklength.ilog2() + blocks.ilog2();
    1.0 / (2.0 * bits as f64 * 10f64.powf(eb_n0_db / 10.0))
}

fn check(blocklength: usize, noise_var: f64) -> Result<()> {
    if blocklength < 2 {
        return Err(Error::InvalidArgument(format!(
            "blocklength {blocklength} < 2"
        )));
    }
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance {noise_var} must be positive"
        )));
    }
    Ok(())
}

/// Stage-1 error probability with absolute tolerance `tol`.
pub fn p_stage1_tol(blocklength: usize, noise_var: f64, tol: f64) -> Result<f64> {
    check(blocklength, noise_var)?;
    let sigma = noise_var.sqrt();
    let m = blocklength as f64;
    let ln_count = (m - 1.0).ln();
    let integrand = |y: f64| {
        (ln_count
            + ln_phi_cdf((y - 1.0) / sigma)
            + (m - 2.0) * ln_phi_cdf(y / sigma)
            + ln_normal_pdf(y, sigma))
        .exp()
    };
    // 12σ beyond both signal levels
    let (lo, hi) = (-12.0 * sigma, 1.0 + 12.0 * sigma);
    let opts = QuadOptions {
        abs_tol: tol,
        initial_pieces: (((hi - lo) / sigma).ceil() as usize).clamp(16, 2048),
        ..QuadOptions::default()
    };
    Ok(integrate(integrand, lo, hi, &opts)?.value.clamp(0.0, 1.0))
}

pub fn p_stage1(blocklength: usize, noise_var: f64) -> Result<f64> {
    p_stage1_tol(blocklength, noise_var, DEFAULT_TOLERANCE)
}

/// `ln` of the normalizing constant `Γ(M/2) / (√π Γ((M−1)/2))`.
fn ln_sphere_constant(blocklength: usize) -> f64 {
    let m = blocklength as f64;
    ln_gamma(m / 2.0) - ln_gamma((m - 1.0) / 2.0) - 0.5 * PI.ln()
}

/// `1 − I`: probability that one competing column beats the transmitted one.
fn competitor_win_probability(blocklength: usize, noise_var: f64, tol: f64) -> Result<f64> {
    let m = blocklength as f64;
    let scale = (2.0 * noise_var).sqrt();
    let ln_c = ln_sphere_constant(blocklength);
    // w = sin θ: (1 − w) = 2 sin²(π/4 − θ/2), dw (1−w²)^{(M−3)/2} = cos^{M−2} θ dθ
    let integrand = |theta: f64| {
        let gap = 2.0 * (0.25 * PI - 0.5 * theta).sin().powi(2);
        let cos = theta.cos();
        if cos <= 0.0 {
            return 0.0;
        }
        let ln_weight = if blocklength == 2 {
            0.0
        } else {
            (m - 2.0) * cos.ln()
        };
        (ln_c + ln_weight + ln_q(gap / scale)).exp()
    };
    let opts = QuadOptions {
        abs_tol: tol,
        initial_pieces: 64,
        ..QuadOptions::default()
    };
    Ok(integrate(integrand, -FRAC_PI_2, FRAC_PI_2, &opts)?
        .value
        .clamp(0.0, 1.0))
}

/// Stage-2 error probability given stage-1 success, absolute tolerance `tol`.
pub fn p_stage2_given_tol(
    blocklength: usize,
    blocks: usize,
    noise_var: f64,
    tol: f64,
) -> Result<f64> {
    check(blocklength, noise_var)?;
    if blocks == 0 {
        return Err(Error::InvalidArgument("blocks must be at least 1".into()));
    }
    if blocks == 1 {
        return Ok(0.0);
    }
    let competitors = (blocklength * (blocks - 1)) as f64;
    // the power multiplies the inner error by up to M(G−1)
    let win = competitor_win_probability(blocklength, noise_var, tol / competitors)?;
    Ok((-(competitors * (-win).ln_1p()).exp_m1()).clamp(0.0, 1.0))
}

pub fn p_stage2_given(blocklength: usize, blocks: usize, noise_var: f64) -> Result<f64> {
    p_stage2_given_tol(blocklength, blocks, noise_var, DEFAULT_TOLERANCE)
}

/// Both stages at a given noise variance.
pub fn p_bler_at(
    blocklength: usize,
    blocks: usize,
    noise_var: f64,
    tol: f64,
) -> Result<AnalysisPoint> {
    let p1 = p_stage1_tol(blocklength, noise_var, tol)?;
    let p2 = p_stage2_given_tol(blocklength, blocks, noise_var, tol)?;
    Ok(AnalysisPoint {
        blocklength,
        blocks,
        eb_n0_db: f64::NAN,
        noise_var,
        p_stage1: p1,
        p_stage2_given: p2,
        p_bler: p1 + p2 * (1.0 - p1),
        quad_tolerance: tol,
    })
}

/// Block error rate at `Eb/N0` (dB) for `M`, `G` powers of two.
pub fn p_bler(blocklength: usize, blocks: usize, eb_n0_db: f64) -> Result<AnalysisPoint> {
    if !blocklength.is_power_of_two() {
        return Err(Error::NonPowerOfTwoM(blocklength));
    }
    if !blocks.is_power_of_two() {
        return Err(Error::NonPowerOfTwoG(blocks));
    }
    let var = noise_variance(blocklength, blocks, eb_n0_db);
    Ok(AnalysisPoint {
        eb_n0_db,
        ..p_bler_at(blocklength, blocks, var, DEFAULT_TOLERANCE)?
    })
}

/// Density of the inner product of two independent uniform unit vectors in `R^M`:
/// `Γ(M/2)/(√π Γ((M−1)/2)) (1 − w²)^{(M−3)/2}` on `[−1, 1]`.
pub fn overlap_pdf(w: f64, blocklength: usize) -> f64 {
    if !(-1.0..=1.0).contains(&w) || blocklength < 2 {
        return 0.0;
    }
    let m = blocklength as f64;
    let exponent = (m - 3.0) / 2.0;
    let ln_c = ln_sphere_constant(blocklength);
    if exponent == 0.0 {
        return ln_c.exp();
    }
    (ln_c + exponent * (-w * w).ln_1p()).exp()
}

/// Densities of the maximum and minimum of `n` IID draws with density `pdf` and
/// CDF `cdf`: `n f F^{n−1}` and `n f (1 − F)^{n−1}`.
pub fn ordered_stat_pdfs(
    x: f64,
    n: usize,
    pdf: impl Fn(f64) -> f64,
    cdf: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let f = pdf(x);
    let big_f = cdf(x);
    let k = n as f64;
    let e = (n - 1) as i32;
    (k * f * big_f.powi(e), k * f * (1.0 - big_f).powi(e))
}

#[cfg(test)]
mod tests {
    use super::special::{normal_pdf, q_function};
    use super::*;

    #[test]
    fn overlap_uniform_at_three() {
        for w in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert!((overlap_pdf(w, 3) - 0.5).abs() < 1e-12);
        }
        assert_eq!(overlap_pdf(1.5, 8), 0.0);
    }

    #[test]
    fn overlap_normalized() {
        for k in 1..=9 {
            let m = 1usize << k;
            // substitute w = sin θ so the M = 2 endpoint singularity disappears
            let r = integrate(
                |t: f64| overlap_pdf(t.sin(), m) * t.cos(),
                -FRAC_PI_2,
                FRAC_PI_2,
                &QuadOptions {
                    initial_pieces: 64,
                    ..QuadOptions::default()
                },
            )
            .unwrap();
            assert!((r.value - 1.0).abs() < 1e-10, "M={m}: {}", r.value);
        }
    }

    #[test]
    fn ordered_stats_basic() {
        let cdf = |x: f64| 1.0 - q_function(x);
        let (mx, mn) = ordered_stat_pdfs(0.7, 1, normal_pdf, cdf);
        assert_eq!(mx, normal_pdf(0.7));
        assert_eq!(mn, normal_pdf(0.7));
        let r = integrate(
            |x| ordered_stat_pdfs(x, 8, normal_pdf, cdf).0,
            -12.0,
            12.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stage1_two_columns_closed_form() {
        for var in [0.05f64, 0.2, 0.5, 1.0, 3.0] {
            let want = q_function(1.0 / (2.0 * var).sqrt());
            let got = p_stage1(2, var).unwrap();
            assert!((got - want).abs() < 1e-10, "var={var}: {got} vs {want}");
        }
    }

    #[test]
    fn stage1_vanishing_noise() {
        assert!(p_stage1(64, 1e-4).unwrap() < 1e-10);
    }

    #[test]
    fn stage2_single_block_is_zero() {
        assert_eq!(p_stage2_given(64, 1, 0.3).unwrap(), 0.0);
        assert!(p_stage2_given(64, 16, 1e-4).unwrap() < 1e-10);
    }

    #[test]
    fn structure_identity() {
        let p = p_bler(64, 2, 3.0).unwrap();
        assert_eq!(p.p_bler, p.p_stage1 + p.p_stage2_given * (1.0 - p.p_stage1));
        assert!((p.noise_var - 1.0 / (14.0 * 10f64.powf(0.3))).abs() < 1e-15);
        assert!((noise_variance(64, 2, 0.0) - 1.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn halving_tolerance_is_stable() {
        for (m, g, var) in [(64usize, 2usize, 0.05), (256, 16, 0.03), (256, 64, 0.08)] {
            let tol = 1e-10;
            let a = p_bler_at(m, g, var, tol).unwrap();
            let b = p_bler_at(m, g, var, tol / 2.0).unwrap();
            assert!((a.p_stage1 - b.p_stage1).abs() < tol);
            assert!((a.p_stage2_given - b.p_stage2_given).abs() < tol);
        }
    }

    #[test]
    fn bad_arguments() {
        assert!(p_stage1(1, 0.1).is_err());
        assert!(p_stage1(8, 0.0).is_err());
        assert!(p_bler(100, 2, 1.0).is_err());
    }
}
