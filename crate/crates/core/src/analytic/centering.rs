//! Closed-form centerings (local-time units) and level-indexed barrier
//! curves. All logarithms are natural.

use crate::error::{domain, Result};

fn sqrt_ln2() -> f64 {
    std::f64::consts::LN_2.sqrt()
}

/// `√(log 2)·n - log n / (2√(log 2))`, the first-order square-root
/// centering shared by every curve below.
pub fn first_order_root(n: f64) -> f64 {
    sqrt_ln2() * n - n.ln() / (2.0 * sqrt_ln2())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenteringSet {
    pub n: u32,
    pub t_plus: f64,
    pub t_minus: f64,
    pub t_first_order: f64,
    pub s_prop: f64,
    pub delta: f64,
    /// Signed square roots before squaring; `t_x = root_x²`.
    pub root_plus: f64,
    pub root_minus: f64,
    pub root_first_order: f64,
    pub root_s: f64,
    /// Set when some root above is negative, so the squared value no
    /// longer orders the way the formula intends.
    pub pre_asymptotic: bool,
}

pub fn centering(n: u32) -> Result<CenteringSet> {
    if n < 3 {
        return domain(format!("centering needs n >= 3 (log log n > 0), got {n}"));
    }
    let nf = n as f64;
    let lln = nf.ln().ln();
    let base = first_order_root(nf);
    let root_plus = base + 100.0 * lln;
    let root_minus = base - 100.0 * lln.powi(8);
    let root_s = base + nf.ln().powi(4);
    let roots = [root_plus, root_minus, base, root_s];
    Ok(CenteringSet {
        n,
        t_plus: root_plus * root_plus,
        t_minus: root_minus * root_minus,
        t_first_order: base * base,
        s_prop: root_s * root_s,
        delta: base + nf.ln().powi(4),
        root_plus,
        root_minus,
        root_first_order: base,
        root_s,
        pre_asymptotic: roots.iter().any(|r| *r < 0.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierCurve {
    pub n: u32,
    // index k - 1 holds level k
    a: Vec<f64>,
    psi: Vec<f64>,
    gamma: Vec<f64>,
    pub delta: f64,
}

fn xlogx_sqrt(k: f64) -> f64 {
    if k <= 0.0 {
        0.0
    } else {
        k.sqrt() * k.ln()
    }
}

pub fn barrier(n: u32) -> Result<BarrierCurve> {
    if n < 4 {
        return domain(format!("barrier curves need n >= 4, got {n}"));
    }
    let nf = n as f64;
    let top = first_order_root(nf);
    let mut a = Vec::with_capacity(n as usize);
    let mut psi = Vec::with_capacity(n as usize);
    let mut gamma = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let kf = k as f64;
        let rest = (n - k) as f64;
        gamma.push(xlogx_sqrt(kf).min(xlogx_sqrt(rest)) + 2.0);
        if k < n {
            let p = kf.min(rest).ln() / (2.0 * sqrt_ln2());
            psi.push(p);
            a.push(kf / nf * top - p + 2.0);
        } else {
            // the top level has its own branch without ψ
            psi.push(0.0);
            a.push(top);
        }
    }
    Ok(BarrierCurve {
        n,
        a,
        psi,
        gamma,
        delta: top + nf.ln().powi(4),
    })
}

impl BarrierCurve {
    fn at(&self, values: &[f64], k: u32) -> Result<f64> {
        if k == 0 || k > self.n {
            return domain(format!("level {k} outside [1, {}]", self.n));
        }
        Ok(values[k as usize - 1])
    }

    pub fn a(&self, k: u32) -> Result<f64> {
        self.at(&self.a, k)
    }

    /// `ψ(k) = log(k ∧ (n-k)) / (2√(log 2))` for `k < n`; reported as 0 at
    /// `k = n`, where it does not enter `a_n`.
    pub fn psi(&self, k: u32) -> Result<f64> {
        self.at(&self.psi, k)
    }

    pub fn gamma(&self, k: u32) -> Result<f64> {
        self.at(&self.gamma, k)
    }

    pub fn a_n(&self) -> f64 {
        self.a[self.n as usize - 1]
    }

    pub fn a_values(&self) -> &[f64] {
        &self.a
    }

    pub fn psi_values(&self) -> &[f64] {
        &self.psi
    }

    pub fn gamma_values(&self) -> &[f64] {
        &self.gamma
    }
}
