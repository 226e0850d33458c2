//! Built-in per-replica estimators.

use super::replicas::Estimator;
use super::rng::ReplicaRng;
use crate::error::{Error, Result};
use crate::tree::{TreeParams, VertexRef};
use crate::{gff, rayknight, walk};

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Constant(f64),
    /// Indicator that leaf `leaf` is unvisited at `τ(t)` (direct sampler).
    LeafZero {
        tree: TreeParams,
        t: f64,
        leaf: u64,
    },
    /// Indicator that some vertex is unvisited at `τ(t)` (direct sampler).
    Uncovered {
        tree: TreeParams,
        t: f64,
    },
    /// Wall-clock `τ(t)` from the walk.
    TauT {
        tree: TreeParams,
        t: f64,
    },
    /// Cover time from the walk.
    CoverTime {
        tree: TreeParams,
    },
    /// Maximum of the free field over the leaves.
    GffMaxLeaf {
        tree: TreeParams,
    },
}

fn invalid(msg: impl Into<String>) -> Result<()> {
    Err(Error::InvalidExperiment(msg.into()))
}

impl Estimator for Experiment {
    fn validate(&self) -> Result<()> {
        let depth_ok = |tree: &TreeParams| tree.depth() >= 1;
        let t_ok = |t: f64| t > 0.0 && t.is_finite();
        match self {
            Experiment::Constant(c) if !c.is_finite() => invalid("constant must be finite"),
            Experiment::LeafZero { tree, t, leaf } => {
                if !depth_ok(tree) || !t_ok(*t) {
                    invalid("leaf-zero needs depth >= 1 and t > 0")
                } else if *leaf >= tree.leaf_count() {
                    invalid(format!("leaf {leaf} out of range"))
                } else {
                    Ok(())
                }
            }
            Experiment::Uncovered { tree, t } | Experiment::TauT { tree, t } => {
                if depth_ok(tree) && t_ok(*t) {
                    Ok(())
                } else {
                    invalid("needs depth >= 1 and t > 0")
                }
            }
            Experiment::CoverTime { tree } | Experiment::GffMaxLeaf { tree } => {
                if depth_ok(tree) {
                    Ok(())
                } else {
                    invalid("needs depth >= 1")
                }
            }
            Experiment::Constant(_) => Ok(()),
        }
    }

    fn estimate(&self, _replica: u64, rng: &mut ReplicaRng) -> f64 {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        // arguments are validated before any replica runs
        match self {
            Experiment::Constant(c) => *c,
            Experiment::LeafZero { tree, t, leaf } => {
                let target = VertexRef::new(tree.depth(), *leaf);
                let mut value = f64::NAN;
                let mut visit = |v: VertexRef, x: f64| {
                    if v == target {
                        value = x;
                    }
                };
                let _ = rayknight::sample_field(tree, *t, rng, Some(&mut visit));
                ind(value == 0.0)
            }
            Experiment::Uncovered { tree, t } => {
                ind(!rayknight::sample_covered(tree, *t, rng).unwrap_or(true))
            }
            Experiment::TauT { tree, t } => {
                walk::run_until_inverse_local_time(tree, *t, rng, false)
                    .ok()
                    .and_then(|o| o.tau_t)
                    .unwrap_or(f64::NAN)
            }
            Experiment::CoverTime { tree } => walk::run_until_cover(tree, rng)
                .ok()
                .and_then(|o| o.cover_time)
                .unwrap_or(f64::NAN),
            Experiment::GffMaxLeaf { tree } => gff::sample_gff_max(tree, rng)
                .map(|s| s.max_leaf)
                .unwrap_or(f64::NAN),
        }
    }
}
