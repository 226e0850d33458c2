//! Bisection for the coverage threshold `t*`: the root local time at which
//! `P(every vertex visited by τ(t))` crosses a target probability.
//!
//! The search runs on `x = √t`, where the threshold is close to linear in the
//! depth. Each probe is an independent Monte Carlo estimate from the direct
//! field sampler with its own derived seed.

use super::replicas::{ReplicaSummary, Workers};
use super::rng::derive_seed;
use crate::analytic::centering::first_order_root;
use crate::error::{domain, Result};
use crate::rayknight;
use crate::tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Coverage probability defining `t*`.
    pub target: f64,
    /// Stop once `(hi - lo) / mid <= tolerance` for the bracket on `√t`.
    pub tolerance: f64,
    pub seed: u64,
    pub replicas_per_probe: u64,
    /// Probe budget; exhausting it returns a partial result.
    pub max_probes: usize,
    pub workers: Workers,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            target: 0.5,
            tolerance: 0.02,
            seed: 0,
            replicas_per_probe: 2000,
            max_probes: 40,
            workers: Workers::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub sqrt_t: f64,
    pub covered: f64,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub depth: u32,
    pub target: f64,
    pub t_star: f64,
    pub sqrt_t_star: f64,
    /// Final bracket in `t` units.
    pub ci: (f64, f64),
    pub probes: Vec<Probe>,
    /// The end probes do not separate beyond 3 combined standard errors.
    pub flagged: bool,
    /// The probe budget ran out before the tolerance was met.
    pub partial: bool,
}

struct Prober<'a> {
    tree: &'a TreeParams,
    cfg: &'a ScanConfig,
    stream: u64,
    probes: Vec<Probe>,
}

impl Prober<'_> {
    fn exhausted(&self) -> bool {
        self.probes.len() >= self.cfg.max_probes
    }

    fn probe(&mut self, x: f64) -> Result<Probe> {
        let seed = derive_seed(self.stream, self.probes.len() as u64);
        let s: ReplicaSummary = rayknight::uncover_probability(
            self.tree,
            x * x,
            self.cfg.replicas_per_probe,
            seed,
            self.cfg.workers,
        )?;
        let probe = Probe {
            sqrt_t: x,
            covered: 1.0 - s.estimate,
            stderr: s.stderr,
            seed,
        };
        self.probes.push(probe);
        Ok(probe)
    }
}

/// Binomial maximum-likelihood fit of `logit P(covered) = a + b·√t` over
/// the unsaturated probes; returns the `√t` where the fit crosses `target`.
fn logistic_crossing(probes: &[Probe], target: f64, replicas: u64) -> Option<f64> {
    let m = replicas as f64;
    let usable: Vec<&Probe> = probes
        .iter()
        .filter(|p| p.covered > 0.02 && p.covered < 0.98)
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let center = usable.iter().map(|p| p.sqrt_t).sum::<f64>() / usable.len() as f64;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        // gradient and Fisher information of the binomial log-likelihood
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for p in &usable {
            let x = p.sqrt_t - center;
            let mu = 1.0 / (1.0 + (-(a + b * x)).exp());
            let w = m * mu * (1.0 - mu);
            ga += m * (p.covered - mu);
            gb += m * (p.covered - mu) * x;
            haa += w;
            hab += w * x;
            hbb += w * x * x;
        }
        let det = haa * hbb - hab * hab;
        if !(det > 0.0) {
            return None;
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;
        a += da;
        b += db;
        if da.abs() < 1e-12 && db.abs() < 1e-12 {
            break;
        }
    }
    if !(b > 0.0) || !a.is_finite() {
        return None;
    }
    let logit = (target / (1.0 - target)).ln();
    Some(center + (logit - a) / b)
}

pub fn threshold_scan(p: &TreeParams, cfg: &ScanConfig) -> Result<ScanResult> {
    if !(cfg.target > 0.0 && cfg.target < 1.0) {
        return domain(format!("target {} must lie in (0, 1)", cfg.target));
    }
    if !(cfg.tolerance > 0.0) {
        return domain("tolerance must be positive");
    }
    if cfg.replicas_per_probe == 0 || cfg.max_probes < 2 {
        return domain("need at least one replica per probe and two probes");
    }
    if p.depth() < 1 {
        return domain("scan needs depth >= 1");
    }
    let mut prober = Prober {
        tree: p,
        cfg,
        stream: derive_seed(cfg.seed, p.depth() as u64),
        probes: Vec::new(),
    };

    let x0 = first_order_root(p.depth() as f64).max(0.5);
    let mut lo = prober.probe(0.5 * x0)?;
    let mut hi = prober.probe(1.5 * x0)?;
    while lo.covered >= cfg.target && !prober.exhausted() {
        hi = lo;
        lo = prober.probe(0.5 * lo.sqrt_t)?;
    }
    while hi.covered < cfg.target && !prober.exhausted() {
        lo = hi;
        hi = prober.probe(2.0 * hi.sqrt_t)?;
    }
    let width = |lo: &Probe, hi: &Probe| (hi.sqrt_t - lo.sqrt_t) / (0.5 * (hi.sqrt_t + lo.sqrt_t));
    while width(&lo, &hi) > cfg.tolerance && !prober.exhausted() {
        let mid = prober.probe(0.5 * (lo.sqrt_t + hi.sqrt_t))?;
        if mid.covered < cfg.target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let bracketed = lo.covered < cfg.target && hi.covered >= cfg.target;
    let partial = !bracketed || width(&lo, &hi) > cfg.tolerance;
    let gap = hi.covered - lo.covered;
    let x_star = logistic_crossing(&prober.probes, cfg.target, cfg.replicas_per_probe)
        .map(|x| x.clamp(lo.sqrt_t, hi.sqrt_t))
        .unwrap_or_else(|| {
            if gap > 0.0 {
                let frac = ((cfg.target - lo.covered) / gap).clamp(0.0, 1.0);
                lo.sqrt_t + frac * (hi.sqrt_t - lo.sqrt_t)
            } else {
                0.5 * (lo.sqrt_t + hi.sqrt_t)
            }
        });
    let noise = (lo.stderr.powi(2) + hi.stderr.powi(2)).sqrt();
    Ok(ScanResult {
        depth: p.depth(),
        target: cfg.target,
        t_star: x_star * x_star,
        sqrt_t_star: x_star,
        ci: (lo.sqrt_t.powi(2), hi.sqrt_t.powi(2)),
        probes: prober.probes,
        flagged: !(gap > 3.0 * noise),
        partial,
    })
}
