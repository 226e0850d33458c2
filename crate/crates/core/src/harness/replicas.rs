//! Deterministic replica execution and summary statistics.
//!
//! Replica `i` always draws from `replica_rng(master_seed, i)` and results are
//! gathered in replica order, so any worker count (including the sequential
//! build without the `parallel` feature) yields identical bits.

use super::rng::{replica_rng, ReplicaRng};
use crate::error::{Error, Result};

/// Degree of parallelism for replica execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// The ambient rayon pool (hardware default unless capped globally).
    #[default]
    Auto,
    /// Run on the calling thread.
    Sequential,
    /// A dedicated pool of exactly this many threads.
    Fixed(usize),
}

/// Environment variable capping the worker count of [`Workers::Auto`].
pub const THREADS_ENV: &str = "COVERTREE_THREADS";

/// Sizes the global pool from [`THREADS_ENV`] when it is set. Returns the
/// cap that was applied. Only the first call in a process can take effect.
pub fn configure_threads_from_env() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let k: usize = match raw.trim().parse() {
        Ok(k) if k >= 1 => k,
        _ => {
            return Err(Error::InvalidExperiment(format!(
                "{THREADS_ENV}={raw:?} must be a positive integer"
            )))
        }
    };
    #[cfg(feature = "parallel")]
    {
        // a pool that already exists keeps its size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    Ok(Some(k))
}

/// Runs `f(replica, rng)` for replicas `0..replicas` and returns the results
/// in replica order.
pub fn map_replicas<T, F>(replicas: u64, master_seed: u64, workers: Workers, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ReplicaRng) -> T + Sync + Send,
{
    let one = |i: u64| {
        let mut rng = replica_rng(master_seed, i);
        f(i, &mut rng)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let par = || (0..replicas).into_par_iter().map(one).collect::<Vec<T>>();
        match workers {
            Workers::Sequential | Workers::Fixed(1) => (0..replicas).map(one).collect(),
            Workers::Auto => par(),
            Workers::Fixed(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool.install(par),
                Err(_) => par(),
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        (0..replicas).map(one).collect()
    }
}

/// Mean of replica values with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaSummary {
    pub estimate: f64,
    /// Sample standard deviation over `√replicas`.
    pub stderr: f64,
    pub replicas: u64,
    pub master_seed: u64,
}

impl ReplicaSummary {
    /// Summarizes values given in replica order.
    pub fn from_values(values: &[f64], master_seed: u64) -> Self {
        let (mean, var) = mean_var(values);
        let n = values.len() as f64;
        Self {
            estimate: mean,
            stderr: if values.len() > 1 {
                (var / n).sqrt()
            } else {
                0.0
            },
            replicas: values.len() as u64,
            master_seed,
        }
    }

    /// `|estimate - value|` measured in standard errors (infinite if the
    /// standard error is zero and the values differ).
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.estimate - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Mean and unbiased sample variance, two-pass.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Replica results keyed by replica id. Merging is associative and
/// commutative because the summary is always computed in id order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicaBatch {
    entries: Vec<(u64, f64)>,
}

impl ReplicaBatch {
    pub fn new(mut entries: Vec<(u64, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        Self { entries }
    }

    pub fn merge(mut self, other: ReplicaBatch) -> Self {
        self.entries.extend(other.entries);
        self.entries.sort_by_key(|e| e.0);
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn summary(&self, master_seed: u64) -> ReplicaSummary {
        let values: Vec<f64> = self.entries.iter().map(|e| e.1).collect();
        ReplicaSummary::from_values(&values, master_seed)
    }
}

/// A per-replica estimator: a pure function of the replica's stream.
pub trait Estimator: Sync {
    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn estimate(&self, replica: u64, rng: &mut ReplicaRng) -> f64;
}

impl<F> Estimator for F
where
    F: Fn(u64, &mut ReplicaRng) -> f64 + Sync,
{
    fn estimate(&self, replica: u64, rng: &mut ReplicaRng) -> f64 {
        self(replica, rng)
    }
}

pub fn run_replicas<E: Estimator + ?Sized>(
    experiment: &E,
    replicas: u64,
    master_seed: u64,
    workers: Workers,
) -> Result<ReplicaSummary> {
    if replicas == 0 {
        return Err(Error::InvalidExperiment(
            "replicas must be at least 1".into(),
        ));
    }
    experiment.validate()?;
    let values = map_replicas(replicas, master_seed, workers, |i, rng| {
        experiment.estimate(i, rng)
    });
    Ok(ReplicaSummary::from_values(&values, master_seed))
}
