//! Least-squares fit of `value ≈ A·n + B·log n + C`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub residual_rms: f64,
    pub n_min: f64,
    pub n_max: f64,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * n + self.b * n.ln() + self.c
    }
}

/// Ordinary least squares by Householder QR. Needs at least four distinct
/// positive `n`.
pub fn fit_centering(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.iter().any(|(n, v)| !(*n > 0.0) || !v.is_finite()) {
        return Err(Error::Domain(
            "fit points need n > 0 and finite values".into(),
        ));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::RankDeficient(format!(
            "need at least 4 distinct n, got {}",
            ns.len()
        )));
    }

    let m = points.len();
    // column-major design matrix [n, ln n, 1]
    let mut cols: [Vec<f64>; 3] = [
        points.iter().map(|p| p.0).collect(),
        points.iter().map(|p| p.0.ln()).collect(),
        vec![1.0; m],
    ];
    let mut rhs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let scale: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();

    let mut r = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let norm = cols[j][j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale[j] {
            return Err(Error::RankDeficient(format!("column {j} is dependent")));
        }
        let alpha = if cols[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |x: &mut [f64]| {
            let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (xi, vi) in x.iter_mut().zip(&v) {
                *xi -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(j) {
            reflect(&mut col[j..]);
        }
        reflect(&mut rhs[j..]);
        for (k, col) in cols.iter().enumerate().skip(j) {
            r[j][k] = col[j];
        }
    }

    let mut coef = [0.0f64; 3];
    for j in (0..3).rev() {
        let s: f64 = (j + 1..3).map(|k| r[j][k] * coef[k]).sum();
        coef[j] = (rhs[j] - s) / r[j][j];
    }

    let mut fit = FitResult {
        a: coef[0],
        b: coef[1],
        c: coef[2],
        residual_rms: 0.0,
        n_min: ns[0],
        n_max: ns[ns.len() - 1],
    };
    let ss: f64 = points
        .iter()
        .map(|&(n, v)| (v - fit.predict(n)).powi(2))
        .sum();
    fit.residual_rms = (ss / m as f64).sqrt();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_recovery() {
        let pts: Vec<(f64, f64)> = (8..=16)
            .map(|n| (n as f64, 2.0 * n as f64 - 0.7 * (n as f64).ln() + 1.0))
            .collect();
        let f = fit_centering(&pts).unwrap();
        assert!((f.a - 2.0).abs() < 1e-9);
        assert!((f.b + 0.7).abs() < 1e-9);
        assert!((f.c - 1.0).abs() < 1e-9);
        assert!(f.residual_rms < 1e-9);
        assert_eq!((f.n_min, f.n_max), (8.0, 16.0));
    }

    #[test]
    fn rank_deficiency() {
        let pts = [(5.0, 1.0), (5.0, 2.0), (6.0, 1.0), (7.0, 0.0)];
        assert!(matches!(fit_centering(&pts), Err(Error::RankDeficient(_))));
        assert!(fit_centering(&[(0.0, 1.0); 5]).is_err());
    }

    proptest! {
        #[test]
        fn refit_of_predictions(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -10.0..10.0f64,
                                lo in 1u32..20, len in 4u32..20) {
            let truth = FitResult { a, b, c, residual_rms: 0.0, n_min: 0.0, n_max: 0.0 };
            let pts: Vec<(f64, f64)> = (lo..lo + len)
                .map(|n| (n as f64, truth.predict(n as f64)))
                .collect();
            let f = fit_centering(&pts).unwrap();
            prop_assert!((f.a - a).abs() < 1e-9);
            prop_assert!((f.b - b).abs() < 1e-9);
            prop_assert!((f.c - c).abs() < 1e-9);
        }
    }
}
