//! The analytic invariant suite: each check reduces to one statistic compared
//! against a fixed threshold (`statistic <= threshold` passes).

use super::bessel::{i1_asymptotic, i1_series};
use super::density::{gaussian_half_density, sqrt_poigamma_density};
use super::poigamma::{sqrt_tail_bound, PoiGammaParams};
use super::quad;
use crate::error::Result;
use crate::harness::ks::{ks_critical_1pct, ks_statistic, FnCdf};
use crate::harness::replicas::{map_replicas, mean_var, Workers};
use crate::harness::rng::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            check: check.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }
}

pub const TAIL_DRAWS: u64 = 100_000;
pub const KS_DRAWS: u64 = 100_000;
const TAIL_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// `|atom + ∫ f - 1|` for the law of `√Z`, `Z ~ PoiGamma(ℓ², 1)`.
pub fn normalization_gap(l: f64) -> Result<f64> {
    sqrt_poigamma_density(l, 0.0)?;
    // the continuous part is negligible beyond ℓ + 12
    let mass = quad::integrate(
        |y| {
            if y > 0.0 {
                sqrt_poigamma_density(l, y).unwrap_or(0.0)
            } else {
                0.0
            }
        },
        0.0,
        l + 12.0,
        1e-13,
    );
    Ok((mass + (-l * l).exp() - 1.0).abs())
}

/// Largest `|f(ℓ+w)/g(w) - (1 - w/(2ℓ))| / ((w²+1)/ℓ²)` over `points`
/// evenly spaced values of `w` in `[-3, 3]`.
pub fn envelope_constant(l: f64, points: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..points {
        let w = -3.0 + 6.0 * i as f64 / (points - 1) as f64;
        let ratio = sqrt_poigamma_density(l, l + w)? / gaussian_half_density(w);
        let dev = (ratio - (1.0 - w / (2.0 * l))).abs();
        worst = worst.max(dev * l * l / (w * w + 1.0));
    }
    Ok(worst)
}

/// Largest relative gap between the series and the asymptotic expansion of
/// `I1` on an even grid over `[a, b]`.
pub fn bessel_overlap_gap(a: f64, b: f64, points: usize) -> f64 {
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .map(|x| {
            let s = i1_series(x);
            ((s - i1_asymptotic(x)) / s).abs()
        })
        .fold(0.0, f64::max)
}

fn binomial_excess(hits: u64, draws: u64, bound: f64) -> f64 {
    let p = hits as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64)
        .sqrt()
        .max(1.0 / draws as f64);
    (p - bound) / se
}

/// Worst standardized excess of an empirical tail over its bound, per bound
/// family, on the `{1,4,16} × {0.5,1,3}` grid of `(r, λ)`.
pub fn tail_bound_excess(seed: u64, draws: u64, workers: Workers) -> Result<[f64; 4]> {
    let mut worst = [f64::NEG_INFINITY; 4];
    let mut cell = 0u64;
    for r in [1.0, 4.0, 16.0] {
        for lambda in [0.5, 1.0, 3.0] {
            let p = PoiGammaParams::new(r, lambda)?;
            let mut z = map_replicas(draws, derive_seed(seed, cell), workers, |_, rng| {
                p.sample(rng)
            });
            cell += 1;
            z.sort_by(f64::total_cmp);
            let below = |x: f64| z.partition_point(|&v| v <= x) as u64;
            let at_least = |x: f64| draws - z.partition_point(|&v| v < x) as u64;
            let m = lambda * r;
            for f in TAIL_FRACTIONS {
                let b = p.tail_bounds(f * m)?;
                let lower = b.lower.expect("alpha below the mean");
                worst[0] = worst[0].max(binomial_excess(below(m - f * m), draws, lower));
                worst[1] = worst[1].max(binomial_excess(at_least(m + f * m), draws, b.upper));
                let sb = sqrt_tail_bound(r, f)?;
                let lo = ((1.0 - f) * m.sqrt()).powi(2);
                let hi = ((1.0 + f) * m.sqrt()).powi(2);
                worst[2] = worst[2].max(binomial_excess(below(lo), draws, sb));
                worst[3] = worst[3].max(binomial_excess(at_least(hi), draws, sb));
            }
        }
    }
    Ok(worst)
}

/// Largest `|mean(e^{-θZ/λ}) - e^{-θr/(1+θ)}| / SE` over `θ ∈ {0.25, 1, 4}`,
/// `r ∈ {1, 9}`.
pub fn mgf_z_max(seed: u64, draws: u64, workers: Workers) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut cell = 0u64;
    for r in [1.0, 9.0] {
        for theta in [0.25, 1.0, 4.0] {
            let p = PoiGammaParams::new(r, 1.0)?;
            let v = map_replicas(draws, derive_seed(seed, 100 + cell), workers, |_, rng| {
                (-theta * p.sample(rng)).exp()
            });
            cell += 1;
            let (mean, var) = mean_var(&v);
            let se = (var / draws as f64).sqrt();
            worst = worst.max((mean - p.mgf_neg(theta)?).abs() / se);
        }
    }
    Ok(worst)
}

/// KS distance between draws of `√Z | Z > 0`, `Z ~ PoiGamma(ℓ², 1)`, and the
/// normalized continuous part of its density.
pub fn sqrt_ks(l: f64, seed: u64, draws: u64, workers: Workers) -> Result<f64> {
    let p = PoiGammaParams::new(l * l, 1.0)?;
    let ys = map_replicas(draws, derive_seed(seed, 200), workers, |_, rng| loop {
        let z = p.sample(rng);
        if z > 0.0 {
            break z.sqrt();
        }
    });
    let mut sorted = ys.clone();
    sorted.sort_by(f64::total_cmp);
    let squares: Vec<f64> = sorted.iter().map(|y| y * y).collect();
    let atom = p.zero_mass();
    let table: Vec<f64> = p
        .cdf_sorted(&squares)
        .into_iter()
        .map(|c| (c - atom) / (1.0 - atom))
        .collect();
    let lookup = |y: f64| {
        let i = sorted.partition_point(|&v| v < y);
        if i < sorted.len() && sorted[i] == y {
            table[i]
        } else {
            (p.cdf(y * y) - atom) / (1.0 - atom)
        }
    };
    ks_statistic(&ys, &FnCdf(lookup))
}

/// Runs every check. Deterministic in `seed`.
pub fn run_suite(seed: u64, workers: Workers) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for l in [0.5, 2.0, 10.0] {
        rows.push(CheckRow::new(
            format!("normalization l={l}"),
            normalization_gap(l)?,
            1e-6,
        ));
    }
    rows.push(CheckRow::new(
        "gaussian envelope l=30",
        envelope_constant(30.0, 61)?,
        10.0,
    ));
    rows.push(CheckRow::new(
        "bessel overlap 25..40",
        bessel_overlap_gap(25.0, 40.0, 151),
        1e-6,
    ));
    let tails = tail_bound_excess(seed, TAIL_DRAWS, workers)?;
    for (name, v) in [
        "lower tail",
        "upper tail",
        "sqrt lower tail",
        "sqrt upper tail",
    ]
    .iter()
    .zip(tails)
    {
        rows.push(CheckRow::new(format!("{name} bound excess (SE)"), v, 3.0));
    }
    rows.push(CheckRow::new(
        "mgf |z|",
        mgf_z_max(seed, TAIL_DRAWS, workers)?,
        3.0,
    ));
    rows.push(CheckRow::new(
        "sqrt sampler ks l=5",
        sqrt_ks(5.0, seed, KS_DRAWS, workers)?,
        ks_critical_1pct(KS_DRAWS as usize),
    ));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_checks_pass() {
        for l in [0.5, 2.0, 10.0] {
            assert!(normalization_gap(l).unwrap() < 1e-6);
        }
        assert!(envelope_constant(30.0, 61).unwrap() <= 10.0);
        assert!(bessel_overlap_gap(25.0, 40.0, 151) <= 1e-6);
    }
}
