//! Replication, estimation and inference.

pub mod experiment;
pub mod fit;
pub mod ks;
pub mod replicas;
pub mod rng;
pub mod scan;

pub use experiment::Experiment;
pub use fit::{fit_centering, FitResult};
pub use ks::{ks_critical_1pct, ks_statistic, Cdf, EmpiricalCdf, FnCdf};
pub use replicas::{
    configure_threads_from_env, map_replicas, run_replicas, Estimator, ReplicaBatch,
    ReplicaSummary, Workers,
};
pub use rng::{derive_seed, replica_rng, ReplicaRng};
pub use scan::{threshold_scan, Probe, ScanConfig, ScanResult};
