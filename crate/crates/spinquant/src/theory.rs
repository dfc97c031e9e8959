//! Analytic predictions for the sign-mismatch error of quantized fields.
//!
//! At a random state the exact and quantized local fields `(H, h)` are
//! asymptotically a correlated Gaussian pair; a spin update goes wrong
//! exactly when their signs disagree. This module evaluates that mismatch
//! probability three ways (2-D quadrature of the joint density, the arcsin
//! closed form at zero means, and large-`m` asymptotics), the analogous
//! error at a descent minimum, and the downstream predictions for the
//! energy gap and Hamming distance of quantized descent.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::quad::{adaptive_simpson, adaptive_simpson_split};

/// Correlations this close to +/-1 switch to the degenerate closed form.
const RHO_LIMIT: f64 = 1.0 - 1e-12;
/// Gaussian tails are truncated this many deviations out.
const TAIL_SIGMAS: f64 = 8.0;
/// Typical normalized depth of minima reached by single-spin descent from a
/// random start; fluctuates only weakly with size.
pub const TYPICAL_DEPTH: f64 = 1.37;

/// Standard normal CDF via erfc; absolute error well below 1e-12.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let d = (x - mean) / sd;
    (-0.5 * d * d).exp() / (sd * (2.0 * PI).sqrt())
}

/// First and second moments of the exact and quantized local fields at a
/// random state, with their correlation.
#[derive(Clone, Copy, Debug)]
pub struct FieldStats {
    pub mean_exact: f64,
    pub mean_quant: f64,
    pub dev_exact: f64,
    pub dev_quant: f64,
    pub rho: f64,
}

/// Gaussian field statistics for site fields over random states:
/// `sigma_H^2 = N (A0^2 + sigma_A^2)`, `sigma_h^2 = N (a0^2 + sigma_a^2)`,
/// `rho = N (a0 A0 + <a A'>) / (sigma_H sigma_h)`, means given by the
/// external fields.
#[allow(clippy::too_many_arguments)]
pub fn field_stats(
    n: usize,
    coupling_mean: f64,
    coupling_dev: f64,
    offset: f64,
    quant_second_moment: f64,
    cross: f64,
    field_exact: f64,
    field_quant: f64,
) -> Result<FieldStats> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let nf = n as f64;
    let var_exact = nf * (coupling_mean * coupling_mean + coupling_dev * coupling_dev);
    let var_quant = nf * (offset * offset + quant_second_moment);
    if var_exact <= 0.0 || var_quant <= 0.0 {
        return Err(Error::InvalidArgument(
            "field variances must be positive".into(),
        ));
    }
    let dev_exact = var_exact.sqrt();
    let dev_quant = var_quant.sqrt();
    let rho = (nf * (offset * coupling_mean + cross) / (dev_exact * dev_quant)).clamp(-1.0, 1.0);
    Ok(FieldStats {
        mean_exact: field_exact,
        mean_quant: field_quant,
        dev_exact,
        dev_quant,
        rho,
    })
}

/// Probability that the exact and quantized fields disagree in sign at a
/// random state: `P = 1 - Pr{H>0, h>0} - Pr{H<0, h<0}` for the bivariate
/// normal of `stats`, by adaptive quadrature of the joint density.
pub fn error_random_point(stats: &FieldStats) -> f64 {
    let mx = stats.mean_exact / stats.dev_exact;
    let my = stats.mean_quant / stats.dev_quant;
    let rho = stats.rho;
    let p = if rho >= RHO_LIMIT {
        // comonotone limit: signs disagree only between the standardized means
        (normal_cdf(mx) - normal_cdf(my)).abs()
    } else if rho <= -RHO_LIMIT {
        1.0 - (normal_cdf(my) - normal_cdf(-mx)).max(0.0)
            - (normal_cdf(-my) - normal_cdf(mx)).max(0.0)
    } else {
        1.0 - (quadrant_mass(mx, my, rho) + quadrant_mass(-mx, -my, rho))
    };
    p.clamp(0.0, 1.0)
}

/// `Pr{X > 0, Y > 0}` for unit-variance Gaussians with means `(mx, my)` and
/// correlation `rho`, integrated in the rotated frame where the pair
/// decouples: `u = (x+y)/sqrt2`, `v = (x-y)/sqrt2` are independent with
/// variances `1 +/- rho`, and the quadrant becomes the wedge `u > |v|`.
fn quadrant_mass(mx: f64, my: f64, rho: f64) -> f64 {
    let su = (1.0 + rho).sqrt();
    let sv = (1.0 - rho).sqrt();
    let mu = (mx + my) * FRAC_1_SQRT_2;
    let mv = (mx - my) * FRAC_1_SQRT_2;
    let u_hi = mu + TAIL_SIGMAS * su;
    if u_hi <= 0.0 {
        return 0.0;
    }
    let tol = 1e-10;
    let outer = |u: f64| -> f64 {
        let lo = (-u).max(mv - TAIL_SIGMAS * sv);
        let hi = u.min(mv + TAIL_SIGMAS * sv);
        if lo >= hi {
            return 0.0;
        }
        let inner = adaptive_simpson(|v| normal_pdf(v, mv, sv), lo, hi, tol, 48);
        normal_pdf(u, mu, su) * inner
    };
    // knots where the wedge meets the v-tails and the u-mass peak
    let splits = [mv.abs(), mu, mv.abs() + TAIL_SIGMAS * sv];
    adaptive_simpson_split(outer, 0.0, u_hi, &splits, tol, 48).clamp(0.0, 1.0)
}

/// Zero-mean closed form of the mismatch probability,
/// `P = 1/2 - arcsin(rho) / pi`.
pub fn error_worst_case(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "correlation must lie in [-1, 1], got {rho}"
        )));
    }
    Ok(0.5 - rho.asin() / PI)
}

/// Closed-form parameters of the equal-bin quantizer on couplings uniform
/// over [-1, 1].
#[derive(Clone, Copy, Debug)]
pub struct UniformParams {
    pub step: f64,
    pub sigma_a2: f64,
    pub cross: f64,
    /// Optimal coupling offset; the rescaling factor is exactly 1 here.
    pub offset: f64,
    pub rho: f64,
}

/// Uniform coupling deviation, `1/sqrt(3)`.
pub const UNIFORM_SIGMA: f64 = 0.5773502691896258;

/// Equal bins on uniform couplings: `C = 2/(2m+1)`,
/// `sigma_a^2 = <a A'> = sigma_A^2 (1 - 1/(2m+1)^2)`, offsets reduce to the
/// identity, and
/// `rho = sqrt(1 - sigma_A^2 / ((2m+1)^2 (A0^2 + sigma_A^2)))`.
pub fn uniform_params(m: u8, coupling_mean: f64) -> Result<UniformParams> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let levels = 2.0 * m as f64 + 1.0;
    let sigma2 = UNIFORM_SIGMA * UNIFORM_SIGMA;
    let sigma_a2 = sigma2 * (1.0 - 1.0 / (levels * levels));
    let rho = (1.0 - sigma2 / (levels * levels * (coupling_mean * coupling_mean + sigma2))).sqrt();
    Ok(UniformParams {
        step: 2.0 / levels,
        sigma_a2,
        cross: sigma_a2,
        offset: coupling_mean,
        rho,
    })
}

/// Ensemble parameters of the two-level (sign) quantizer on uniform
/// couplings. The representative magnitude is the one-sided mean
/// `C = E[A' | A' > 0] = 1/2`, giving `sigma_a^2 = <a A'> = 1/4`; the offset
/// rescaling factor is again exactly 1.
pub fn binarized_params(coupling_mean: f64) -> UniformParams {
    let sigma_a2 = 0.25;
    let mu2 = coupling_mean * coupling_mean;
    let rho = ((mu2 + sigma_a2) / (mu2 + UNIFORM_SIGMA * UNIFORM_SIGMA)).sqrt();
    UniformParams {
        step: 0.5,
        sigma_a2,
        cross: sigma_a2,
        offset: coupling_mean,
        rho,
    }
}

/// Large-`m` worst case on uniform couplings: exact correlation floor
/// `rho_min = sqrt(1 - 1/(2m+1)^2)` and peak error `1/(pi (2m+1))`.
pub fn asymptotic_random(m: u8) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let levels = 2.0 * m as f64 + 1.0;
    Ok(((1.0 - 1.0 / (levels * levels)).sqrt(), 1.0 / (PI * levels)))
}

/// Mismatch probability at a descent minimum of normalized depth `r`:
///
/// ```text
/// P(m, r) = 1/(sqrt(2 pi) Phi(r)) * Int_0^inf Phi(-2 x sqrt(m(m+1)))
///           * exp(-(x - r)^2 / 2) dx,
/// ```
///
/// integrated adaptively on `[0, r+10]` to 1e-9 absolute.
pub fn error_at_minimum(m: u8, r: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "depth must be positive, got {r}"
        )));
    }
    let damp = 2.0 * (m as f64 * (m as f64 + 1.0)).sqrt();
    let integrand = |x: f64| normal_cdf(-damp * x) * (-0.5 * (x - r) * (x - r)).exp();
    // the CDF factor dies on the 1/damp scale, the weight peaks at r
    let splits = [1.0 / damp, 4.0 / damp, r];
    let integral = adaptive_simpson_split(integrand, 0.0, r + 10.0, &splits, 1e-9, 48);
    Ok((integral / ((2.0 * PI).sqrt() * normal_cdf(r))).clamp(0.0, 1.0))
}

/// Large-`m` limit of `error_at_minimum` at typical depth:
/// `P ~ 1 / (pi^2 sqrt(pi + 8 m (m+1)))`. Roughly 30% below the integral at
/// `m = 1`, converging from below as `m` grows.
pub fn asymptotic_minimum(m: u8) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be >= 1".into()));
    }
    let mm = m as f64 * (m as f64 + 1.0);
    Ok(1.0 / (PI * PI * (PI + 8.0 * mm).sqrt()))
}

/// Predicted relative energy gap of a quantized minimum: `delta E ~ 2 P`.
pub fn predicted_energy_gap(p: f64) -> f64 {
    2.0 * p
}

/// Predicted Hamming distance between quantized and exact minima: `d = N P`.
pub fn predicted_distance(n: usize, p: f64) -> f64 {
    n as f64 * p
}
