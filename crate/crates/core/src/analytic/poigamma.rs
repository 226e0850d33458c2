//! The compound Poisson-exponential law `PoiGamma(r, λ)`: the sum of `N`
//! independent exponentials of mean `λ`, with `N ~ Poisson(r)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use super::{bessel, quad};
use crate::error::{domain, Result};

/// Above this count a single Gamma draw replaces summing exponentials.
const EXPLICIT_SUM_MAX: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoiGammaParams {
    r: f64,
    lambda: f64,
}

/// Chernoff bounds on the two tails of `Z ~ PoiGamma(r, λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// Bound on `P(Z <= λr - α)`; absent when `α >= λr`.
    pub lower: Option<f64>,
    /// Bound on `P(Z >= λr + α)`.
    pub upper: f64,
}

impl PoiGammaParams {
    pub fn new(r: f64, lambda: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return domain(format!(
                "PoiGamma rate r = {r} must be finite and nonnegative"
            ));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return domain(format!("PoiGamma scale lambda = {lambda} must be positive"));
        }
        Ok(Self { r, lambda })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mean(&self) -> f64 {
        self.lambda * self.r
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.lambda * self.lambda * self.r
    }

    /// Mass of the atom at zero, `P(N = 0) = e^{-r}`.
    pub fn zero_mass(&self) -> f64 {
        (-self.r).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample(self.r, self.lambda, rng)
    }

    /// `E exp(-θ Z / λ) = exp(-θ r / (1 + θ))`.
    pub fn mgf_neg(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return domain(format!("theta = {theta} must be nonnegative"));
        }
        Ok((-theta * self.r / (1.0 + theta)).exp())
    }

    /// Optimized Chernoff bounds on both tails at distance `alpha` from the
    /// mean.
    ///
    /// The lower-tail bound is itself at most `exp(-α² / (4 λ² r))`; that
    /// weaker form is not exposed.
    pub fn tail_bounds(&self, alpha: f64) -> Result<TailBounds> {
        if !(alpha > 0.0) {
            return domain(format!("alpha = {alpha} must be positive"));
        }
        let (r, a) = (self.r, alpha / self.lambda);
        let lower = (a < r).then(|| (2.0 * (r * (r - a)).sqrt() + a - 2.0 * r).exp());
        let upper = (2.0 * (r * (r + a)).sqrt() - 2.0 * r - a).exp();
        Ok(TailBounds { lower, upper })
    }

    /// Density of the absolutely continuous part at `z > 0`.
    pub fn density(&self, z: f64) -> f64 {
        if z < 0.0 || self.r == 0.0 {
            return 0.0;
        }
        let z1 = z / self.lambda;
        if z1 == 0.0 {
            return self.r * (-self.r).exp() / self.lambda;
        }
        let x = 2.0 * (self.r * z1).sqrt();
        // e^{-r-z} sqrt(r/z) I1(2 sqrt(rz)), scaled by 1/λ
        let ln = -self.r - z1 + x + 0.5 * (self.r / z1).ln() + bessel::ln_i1_scaled(x)
            - self.lambda.ln();
        ln.exp()
    }

    /// Integration tolerance used by the CDF evaluators.
    const CDF_TOL: f64 = 1e-12;

    /// `P(Z <= z)`: the atom plus the quadrature of [`density`](Self::density).
    pub fn cdf(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        let cont = quad::integrate(|s| self.density(s), 0.0, z, Self::CDF_TOL);
        (self.zero_mass() + cont).min(1.0)
    }

    /// CDF at every point of an ascending slice, integrating piecewise.
    pub fn cdf_sorted(&self, points: &[f64]) -> Vec<f64> {
        let start = points.partition_point(|&z| z < 0.0);
        let atom = self.zero_mass();
        let cont = quad::cumulative(|s| self.density(s), 0.0, &points[start..], Self::CDF_TOL);
        std::iter::repeat_n(0.0, start)
            .chain(cont.into_iter().map(|c| (atom + c).min(1.0)))
            .collect()
    }
}

/// Draws one `PoiGamma(r, λ)` variate. Consumes no randomness when `r = 0`.
#[inline]
pub fn sample<R: Rng + ?Sized>(r: f64, lambda: f64, rng: &mut R) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let count: f64 = Poisson::new(r)
        .expect("poisson rate is positive and finite")
        .sample(rng);
    if count == 0.0 {
        0.0
    } else if count <= EXPLICIT_SUM_MAX {
        let mut acc = 0.0;
        for _ in 0..count as u32 {
            let e: f64 = Exp1.sample(rng);
            acc += e;
        }
        acc * lambda
    } else {
        Gamma::new(count, lambda)
            .expect("gamma shape is a positive count")
            .sample(rng)
    }
}

/// Bound `e^{-r β²}` on `P(√Z <= (1-β)√(λr))` (for `β <= 1`) and on
/// `P(√Z >= (1+β)√(λr))` (for any `β > 0`). Independent of `λ`.
pub fn sqrt_tail_bound(r: f64, beta: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("r = {r} must be positive"));
    }
    if !(beta > 0.0) {
        return domain(format!("beta = {beta} must be positive"));
    }
    Ok((-r * beta * beta).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(r: f64, lambda: f64) -> PoiGammaParams {
        PoiGammaParams::new(r, lambda).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PoiGammaParams::new(-1.0, 1.0).is_err());
        assert!(PoiGammaParams::new(1.0, 0.0).is_err());
        assert!(PoiGammaParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn zero_rate_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = params(0.0, 3.0);
        assert!((0..1000).all(|_| p.sample(&mut rng) == 0.0));
    }

    #[test]
    fn zero_rate_consumes_nothing() {
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = a.clone();
        sample(0.0, 1.0, &mut a);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn mean_and_zero_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let p = params(4.0, 1.0);
        let mean = (0..n).map(|_| p.sample(&mut rng)).sum::<f64>() / n as f64;
        let se = (2.0 * 4.0 / n as f64).sqrt();
        assert!((mean - 4.0).abs() < 3.0 * se, "mean {mean}");

        let p = params(2.0, 1.0);
        let zeros = (0..n).filter(|_| p.sample(&mut rng) == 0.0).count() as f64 / n as f64;
        let q = (-2.0f64).exp();
        let se = (q * (1.0 - q) / n as f64).sqrt();
        assert!((zeros - q).abs() < 3.0 * se, "zero freq {zeros}");
    }

    #[test]
    fn mgf_examples() {
        let p = params(4.0, 1.0);
        assert_eq!(p.mgf_neg(0.0).unwrap(), 1.0);
        assert!((p.mgf_neg(1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-15);
        assert!(p.mgf_neg(-0.1).is_err());

        let p = params(3.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let vals: Vec<f64> = (0..n)
            .map(|_| (-0.5 * p.sample(&mut rng) / 2.0).exp())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - (-1.0f64).exp()).abs() < 3.0 * se);
        assert!((p.mgf_neg(0.5).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn tail_bound_examples() {
        let p = params(4.0, 1.0);
        let b = p.tail_bounds(2.0).unwrap();
        assert!((b.lower.unwrap() - (2.0 * 8f64.sqrt() - 6.0).exp()).abs() < 1e-15);
        assert!((b.lower.unwrap() - 0.7096).abs() < 1e-4);
        assert!((b.upper - (2.0 * 24f64.sqrt() - 10.0).exp()).abs() < 1e-15);
        assert!((b.upper - 0.8171).abs() < 1e-4);

        let tiny = p.tail_bounds(1e-12).unwrap();
        assert!((tiny.lower.unwrap() - 1.0).abs() < 1e-9);
        assert!(p.tail_bounds(4.0).unwrap().lower.is_none());
        assert!(p.tail_bounds(0.0).is_err());
    }

    #[test]
    fn sqrt_tail_examples() {
        assert!((sqrt_tail_bound(9.0, 0.5).unwrap() - (-2.25f64).exp()).abs() < 1e-15);
        assert!((sqrt_tail_bound(9.0, 0.5).unwrap() - 0.1054).abs() < 1e-4);
        // β = 1 is exactly the zero atom
        assert_eq!(
            sqrt_tail_bound(3.0, 1.0).unwrap(),
            params(3.0, 7.0).zero_mass()
        );
        assert!(sqrt_tail_bound(1.0, 0.0).is_err());
    }

    #[test]
    fn sqrt_tail_bound_holds_empirically() {
        let p = params(4.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let cut = 0.7 * 8f64.sqrt();
        let hits = (0..n).filter(|_| p.sample(&mut rng).sqrt() <= cut).count() as f64 / n as f64;
        let b = sqrt_tail_bound(4.0, 0.3).unwrap();
        let se = (b * (1.0 - b) / n as f64).sqrt();
        assert!(hits <= b + 3.0 * se, "{hits} vs {b}");
    }

    #[test]
    fn density_limit_at_zero_is_continuous() {
        let p = params(1.5, 2.0);
        assert!((p.density(0.0) - p.density(1e-12)).abs() < 1e-9);
    }

    #[test]
    fn cdf_total_mass() {
        for &(r, l) in &[(0.5, 1.0), (4.0 / 3.0, 3.0), (10.0, 0.5)] {
            let p = params(r, l);
            let top = p.mean() + 40.0 * p.variance().sqrt() + 40.0 * l;
            assert!((p.cdf(top) - 1.0).abs() < 1e-9, "r={r} l={l}");
        }
    }

    #[test]
    fn cdf_sorted_matches_pointwise() {
        let p = params(4.0 / 3.0, 3.0);
        let pts = [-1.0, 0.0, 0.3, 2.0, 2.0, 7.5, 20.0];
        for (z, c) in pts.iter().zip(p.cdf_sorted(&pts)) {
            assert!((c - p.cdf(*z)).abs() < 1e-11);
        }
    }
}
