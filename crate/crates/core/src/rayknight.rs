//! Direct sampler of the local-time field at the inverse local time `τ(t)`.
//!
//! Given its parent's local time `ℓ`, a vertex's local time is
//! `PoiGamma(ℓ, 1)`, and sibling subtrees are conditionally independent. The
//! root is pinned at `t`. The tree is walked depth-first with an explicit
//! stack of at most `n + 1` entries, so memory stays `O(n)` while the field
//! itself has `2^{n+1} - 1` values.

use rand::Rng;

use crate::analytic::poigamma;
use crate::error::{domain, Result};
use crate::harness::replicas::{map_replicas, ReplicaSummary, Workers};
use crate::tree::{Side, TreeParams, VertexRef};

/// Per-level minimum and mean of the field.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub min: Vec<f64>,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSummary {
    pub min_leaf: f64,
    pub zero_leaf_count: u64,
    pub zero_vertex_exists: bool,
    pub levels: Option<LevelStats>,
    /// Every vertex has positive local time.
    pub covered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    /// Skip traversal below a zero vertex when nothing observes it.
    pub prune: bool,
    pub emit_levels: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            prune: true,
            emit_levels: false,
        }
    }
}

fn check_args(p: &TreeParams, t: f64) -> Result<()> {
    if p.depth() < 1 {
        return domain("the field sampler needs depth >= 1");
    }
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t = {t} must be positive and finite"));
    }
    Ok(())
}

/// Samples one field with default options. `visitor`, when given, sees every
/// vertex as `(vertex, local time)` in depth-first preorder.
pub fn sample_field<R: Rng + ?Sized>(
    p: &TreeParams,
    t: f64,
    rng: &mut R,
    visitor: Option<&mut dyn FnMut(VertexRef, f64)>,
) -> Result<FieldSummary> {
    sample_field_with(p, t, rng, SampleOptions::default(), visitor)
}

pub fn sample_field_with<R: Rng + ?Sized>(
    p: &TreeParams,
    t: f64,
    rng: &mut R,
    opts: SampleOptions,
    mut visitor: Option<&mut dyn FnMut(VertexRef, f64)>,
) -> Result<FieldSummary> {
    check_args(p, t)?;
    let n = p.depth();
    let mut level_min = vec![f64::INFINITY; n as usize + 1];
    let mut level_sum = vec![0.0f64; n as usize + 1];
    let mut min_leaf = f64::INFINITY;
    let mut zero_leaves = 0u64;
    let mut zero_vertex = false;
    let skip_zero_subtrees = opts.prune && visitor.is_none();

    let mut stack: Vec<(VertexRef, f64)> = Vec::with_capacity(n as usize + 2);
    stack.push((VertexRef::ROOT, t));
    while let Some((v, x)) = stack.pop() {
        if let Some(f) = visitor.as_mut() {
            f(v, x);
        }
        let k = v.level as usize;
        level_min[k] = level_min[k].min(x);
        level_sum[k] += x;
        if x == 0.0 {
            zero_vertex = true;
        }
        if v.level == n {
            min_leaf = min_leaf.min(x);
            if x == 0.0 {
                zero_leaves += 1;
            }
            continue;
        }
        if x == 0.0 && skip_zero_subtrees {
            // every descendant is zero
            zero_leaves += 1u64 << (n - v.level);
            min_leaf = 0.0;
            for m in level_min.iter_mut().skip(k + 1) {
                *m = 0.0;
            }
            continue;
        }
        let left = poigamma::sample(x, 1.0, rng);
        let right = poigamma::sample(x, 1.0, rng);
        stack.push((v.child(Side::Right), right));
        stack.push((v.child(Side::Left), left));
    }

    let levels = opts.emit_levels.then(|| LevelStats {
        mean: level_sum
            .iter()
            .enumerate()
            .map(|(k, s)| s / (1u64 << k) as f64)
            .collect(),
        min: level_min,
    });
    Ok(FieldSummary {
        min_leaf,
        zero_leaf_count: zero_leaves,
        zero_vertex_exists: zero_vertex,
        levels,
        covered: !zero_vertex,
    })
}

/// Whether every vertex is visited by `τ(t)`. Stops at the first zero, so it
/// is cheaper than [`sample_field`] for coverage estimates.
pub fn sample_covered<R: Rng + ?Sized>(p: &TreeParams, t: f64, rng: &mut R) -> Result<bool> {
    check_args(p, t)?;
    let n = p.depth();
    let mut stack: Vec<(u32, f64)> = Vec::with_capacity(n as usize + 2);
    stack.push((0, t));
    while let Some((level, x)) = stack.pop() {
        if level == n {
            continue;
        }
        let left = poigamma::sample(x, 1.0, rng);
        let right = poigamma::sample(x, 1.0, rng);
        if left == 0.0 || right == 0.0 {
            return Ok(false);
        }
        stack.push((level + 1, right));
        stack.push((level + 1, left));
    }
    Ok(true)
}

/// Probability that a descendant at distance `d` is never visited given its
/// ancestor has local time `l`: `e^{-l/d}`.
pub fn conditional_zero_prob(l: f64, d: u32) -> Result<f64> {
    if d == 0 {
        return domain("distance d must be at least 1");
    }
    if !(l >= 0.0) {
        return domain(format!("local time {l} must be nonnegative"));
    }
    Ok((-l / d as f64).exp())
}

/// `d` successive `PoiGamma(·, 1)` steps starting from `l`.
pub fn chain<R: Rng + ?Sized>(l: f64, d: u32, rng: &mut R) -> f64 {
    (0..d).fold(l, |x, _| poigamma::sample(x, 1.0, rng))
}

/// Monte Carlo estimate of `P(some vertex unvisited at τ(t))`, with its
/// binomial standard error. Deterministic in `(seed, replicas)`.
pub fn uncover_probability(
    p: &TreeParams,
    t: f64,
    replicas: u64,
    seed: u64,
    workers: Workers,
) -> Result<ReplicaSummary> {
    check_args(p, t)?;
    if replicas == 0 {
        return domain("replicas must be at least 1");
    }
    let flags = map_replicas(replicas, seed, workers, |_, rng| {
        // arguments validated above
        if sample_covered(p, t, rng).unwrap_or(false) {
            0.0
        } else {
            1.0
        }
    });
    Ok(ReplicaSummary::from_values(&flags, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::rng::replica_rng;

    fn tree(n: u32) -> TreeParams {
        TreeParams::new(n).unwrap()
    }

    #[test]
    fn root_is_pinned() {
        let mut rng = replica_rng(1, 0);
        let mut root = None;
        let mut visit = |v: VertexRef, x: f64| {
            if v == VertexRef::ROOT {
                root = Some(x);
            }
        };
        sample_field(&tree(4), 2.5, &mut rng, Some(&mut visit)).unwrap();
        assert_eq!(root, Some(2.5));
    }

    #[test]
    fn visitor_sees_every_vertex_once() {
        let p = tree(5);
        let mut seen = vec![0u32; p.vertex_count() as usize];
        let mut rng = replica_rng(2, 0);
        let mut visit = |v: VertexRef, _: f64| seen[v.heap_id()] += 1;
        // small t so that pruned subtrees occur
        sample_field(&p, 0.3, &mut rng, Some(&mut visit)).unwrap();
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn zero_shielding_and_summary_consistency() {
        let p = tree(6);
        for i in 0..200 {
            let mut rng = replica_rng(3, i);
            let mut values = vec![f64::NAN; p.vertex_count() as usize];
            let mut visit = |v: VertexRef, x: f64| values[v.heap_id()] = x;
            let s = sample_field(&p, 1.5, &mut rng, Some(&mut visit)).unwrap();
            for id in 1..values.len() {
                let parent = VertexRef::from_heap_id(id).parent().unwrap().heap_id();
                if values[parent] == 0.0 {
                    assert_eq!(values[id], 0.0);
                }
            }
            let leaves = &values[(p.leaf_count() - 1) as usize..];
            let zeros = leaves.iter().filter(|x| **x == 0.0).count() as u64;
            assert_eq!(zeros, s.zero_leaf_count);
            assert_eq!(s.covered, s.min_leaf > 0.0);
            assert_eq!(s.zero_leaf_count == 0, s.min_leaf > 0.0);
        }
    }

    #[test]
    fn pruning_is_exact() {
        let p = tree(7);
        let opts_on = SampleOptions {
            prune: true,
            emit_levels: true,
        };
        let opts_off = SampleOptions {
            prune: false,
            emit_levels: true,
        };
        for i in 0..300 {
            let a = sample_field_with(&p, 0.8, &mut replica_rng(4, i), opts_on, None).unwrap();
            let b = sample_field_with(&p, 0.8, &mut replica_rng(4, i), opts_off, None).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn covered_matches_full_sampler() {
        let p = tree(5);
        for i in 0..500 {
            let full = sample_field(&p, 3.0, &mut replica_rng(5, i), None).unwrap();
            let quick = sample_covered(&p, 3.0, &mut replica_rng(5, i)).unwrap();
            assert_eq!(full.covered, quick);
        }
    }

    #[test]
    fn zero_prob_examples() {
        assert_eq!(conditional_zero_prob(0.0, 4).unwrap(), 1.0);
        assert!((conditional_zero_prob(2.0, 3).unwrap() - 0.51342).abs() < 1e-5);
        assert!(conditional_zero_prob(1.0, 0).is_err());
    }

    #[test]
    fn chained_zero_frequency() {
        let n = 100_000u64;
        let zeros = map_replicas(n, 6, Workers::Auto, |_, rng| {
            (chain(3.0, 2, rng) == 0.0) as u8 as f64
        });
        let s = ReplicaSummary::from_values(&zeros, 6);
        let q = (-1.5f64).exp();
        assert!(s.z_score(q) < 3.0, "{} vs {q}", s.estimate);
    }

    #[test]
    fn uncover_edges() {
        let s = uncover_probability(&tree(3), 1e-9, 1000, 7, Workers::Auto).unwrap();
        assert_eq!(s.estimate, 1.0);
        let s = uncover_probability(&tree(1), 1.0, 20_000, 8, Workers::Auto).unwrap();
        let q = 1.0 - (1.0 - (-1.0f64).exp()).powi(2);
        assert!((q - 0.6004).abs() < 1e-4);
        assert!(s.z_score(q) < 3.0, "{} vs {q}", s.estimate);
        assert!(uncover_probability(&tree(3), 0.0, 10, 1, Workers::Auto).is_err());
        assert!(uncover_probability(&tree(0), 1.0, 10, 1, Workers::Auto).is_err());
    }
}
