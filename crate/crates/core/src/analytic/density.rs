//! Densities used to compare square-root local times with Gaussian steps.

use std::f64::consts::PI;

use super::bessel;
use crate::error::{domain, Result};

/// Log-density of `√Z` for `Z ~ PoiGamma(ℓ², 1)` at `y > 0`:
/// `ln(2ℓ) - (y - ℓ)² + ln(I1(2yℓ) e^{-2yℓ})`.
pub fn ln_sqrt_poigamma_density(l: f64, y: f64) -> Result<f64> {
    if !(l > 0.0) {
        return domain(format!("l = {l} must be positive"));
    }
    if !(y > 0.0) {
        return domain(format!("y = {y} must be positive for the continuous part"));
    }
    let w = y - l;
    Ok((2.0 * l).ln() - w * w + bessel::ln_i1_scaled(2.0 * y * l))
}

/// Density of `√Z`, `Z ~ PoiGamma(ℓ², 1)`, for `y > 0`; the atom
/// `P(Z = 0) = e^{-ℓ²}` at `y = 0`.
pub fn sqrt_poigamma_density(l: f64, y: f64) -> Result<f64> {
    if !(l > 0.0) {
        return domain(format!("l = {l} must be positive"));
    }
    if !(y >= 0.0) {
        return domain(format!("y = {y} must be nonnegative"));
    }
    if y == 0.0 {
        return Ok((-l * l).exp());
    }
    Ok(ln_sqrt_poigamma_density(l, y)?.exp())
}

/// Density of `W / √2` for a standard Gaussian `W`: `e^{-w²} / √π`.
pub fn gaussian_half_density(w: f64) -> f64 {
    (-w * w).exp() / PI.sqrt()
}

/// `Π f_{ℓ_{i-1}}(ℓ_{i-1} + z_i) / g(z_i)` along the path
/// `ℓ_i = ℓ_{i-1} + z_i`, where `f_ℓ` is [`sqrt_poigamma_density`] and `g` is
/// [`gaussian_half_density`].
///
/// Each step must keep `|z_i| <= ℓ_{i-1} / 2` (hence `ℓ_i > 0`).
pub fn path_likelihood_ratio(l0: f64, increments: &[f64]) -> Result<f64> {
    if !(l0 > 0.0) {
        return domain(format!("l0 = {l0} must be positive"));
    }
    let mut level = l0;
    let mut ln_ratio = 0.0;
    for (i, &z) in increments.iter().enumerate() {
        if !(z.abs() <= level / 2.0) {
            return domain(format!(
                "step {i}: increment {z} exceeds half the current level {level}"
            ));
        }
        let next = level + z;
        ln_ratio += ln_sqrt_poigamma_density(level, next)? + z * z + 0.5 * PI.ln();
        level = next;
    }
    Ok(ln_ratio.exp())
}

/// `P(max_{0<=r<=q} W_r >= λ) = e^{-2λ²/q}` for a Brownian bridge `W` of
/// length `q` pinned at zero on both ends.
pub fn bridge_max_tail(q: f64, lam: f64) -> Result<f64> {
    if !(q > 0.0) {
        return domain(format!("bridge length q = {q} must be positive"));
    }
    if !(lam >= 0.0) {
        return domain(format!("level {lam} must be nonnegative"));
    }
    Ok((-2.0 * lam * lam / q).exp())
}
