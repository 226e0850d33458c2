//! One-sample Kolmogorov-Smirnov statistic against an analytic CDF that may
//! carry atoms.

use crate::analytic::PoiGammaParams;
use crate::error::{Error, Result};

/// Critical value of `√N·D` at the 1% level for large `N`.
pub const KS_CRIT_1PCT: f64 = 1.63;

pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_CRIT_1PCT / (n as f64).sqrt()
}

/// A right-continuous CDF.
pub trait Cdf {
    fn cdf(&self, x: f64) -> f64;

    /// Left limit `F(x-)`; differs from [`cdf`](Self::cdf) only at atoms.
    fn cdf_left(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// `F` at every point of an ascending slice. Override when a batch
    /// evaluation is cheaper than pointwise calls.
    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.cdf(x)).collect()
    }
}

/// Adapts a closure into a continuous [`Cdf`].
pub struct FnCdf<F>(pub F);

impl<F: Fn(f64) -> f64> Cdf for FnCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

impl Cdf for PoiGammaParams {
    fn cdf(&self, x: f64) -> f64 {
        PoiGammaParams::cdf(self, x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            PoiGammaParams::cdf(self, x)
        }
    }

    fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        PoiGammaParams::cdf_sorted(self, xs)
    }
}

/// Empirical CDF of a sample, usable as a reference distribution.
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self { sorted }
    }
}

impl Cdf for EmpiricalCdf {
    fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s < x) as f64 / self.sorted.len() as f64
    }
}

/// `sup_x |F_N(x) - F(x)|`. Ties and atoms are handled by comparing both the
/// left limit and the value at each distinct sample point.
pub fn ks_statistic<C: Cdf + ?Sized>(samples: &[f64], cdf: &C) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::Domain(format!(
            "KS statistic needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;

    // (distinct value, count of samples strictly below, count at or below)
    let mut groups: Vec<(f64, usize, usize)> = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        groups.push((xs[i], i, j));
        i = j;
    }
    let distinct: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let at = cdf.cdf_sorted(&distinct);

    let mut d = 0.0f64;
    for (&(x, below, upto), f) in groups.iter().zip(at) {
        let left = cdf.cdf_left(x);
        d = d.max((f - upto as f64 / n).abs());
        d = d.max((left - below as f64 / n).abs());
    }
    Ok(d)
}
