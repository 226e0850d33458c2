//! Gaussian free field on the tree: `η_v` is the sum of independent standard
//! Gaussians over the edges of the root-to-`v` path, so `η_ρ = 0` and
//! `Var(η_v) = level(v)`. Streamed depth-first like the local-time sampler.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::harness::replicas::{map_replicas, mean_var, Workers};
use crate::tree::{Side, TreeParams, VertexRef};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GffSummary {
    /// Maximum over all vertices, root included.
    pub max_all: f64,
    pub max_leaf: f64,
    /// Level of the (first, in preorder) vertex attaining `max_all`.
    pub argmax_level: u32,
}

pub fn sample_gff_max<R: Rng + ?Sized>(p: &TreeParams, rng: &mut R) -> Result<GffSummary> {
    sample_gff(p, rng, None)
}

/// Samples one field; `visitor` sees `(vertex, η_v)` in preorder.
pub fn sample_gff<R: Rng + ?Sized>(
    p: &TreeParams,
    rng: &mut R,
    mut visitor: Option<&mut dyn FnMut(VertexRef, f64)>,
) -> Result<GffSummary> {
    if p.depth() < 1 {
        return domain("the free field sampler needs depth >= 1");
    }
    let n = p.depth();
    let mut best = GffSummary {
        max_all: f64::NEG_INFINITY,
        max_leaf: f64::NEG_INFINITY,
        argmax_level: 0,
    };
    let mut stack: Vec<(VertexRef, f64)> = Vec::with_capacity(n as usize + 2);
    stack.push((VertexRef::ROOT, 0.0));
    while let Some((v, eta)) = stack.pop() {
        if let Some(f) = visitor.as_mut() {
            f(v, eta);
        }
        if eta > best.max_all {
            best.max_all = eta;
            best.argmax_level = v.level;
        }
        if v.level == n {
            best.max_leaf = best.max_leaf.max(eta);
            continue;
        }
        let left: f64 = StandardNormal.sample(rng);
        let right: f64 = StandardNormal.sample(rng);
        stack.push((v.child(Side::Right), eta + right));
        stack.push((v.child(Side::Left), eta + left));
    }
    Ok(best)
}

/// Empirical variance of `η` at each level along the leftmost root-to-leaf
/// path, from full-tree samples.
pub fn gff_leaf_variance_check(
    p: &TreeParams,
    replicas: u64,
    seed: u64,
    workers: Workers,
) -> Result<Vec<f64>> {
    if replicas < 2 {
        return domain("need at least 2 replicas for a variance");
    }
    let paths = gff_path_samples(p, replicas, seed, workers)?;
    let n = p.depth() as usize;
    Ok((0..=n)
        .map(|k| {
            let column: Vec<f64> = paths.iter().map(|path| path[k]).collect();
            mean_var(&column).1
        })
        .collect())
}

/// `η` along the leftmost path `(k, 0)`, `k = 0..=n`, one row per replica.
pub fn gff_path_samples(
    p: &TreeParams,
    replicas: u64,
    seed: u64,
    workers: Workers,
) -> Result<Vec<Vec<f64>>> {
    if p.depth() < 1 {
        return domain("the free field sampler needs depth >= 1");
    }
    let n = p.depth() as usize;
    Ok(map_replicas(replicas, seed, workers, |_, rng| {
        let mut path = vec![0.0; n + 1];
        let mut visit = |v: VertexRef, eta: f64| {
            if v.index == 0 {
                path[v.level as usize] = eta;
            }
        };
        // depth checked above
        let _ = sample_gff(p, rng, Some(&mut visit));
        path
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::replicas::ReplicaSummary;
    use crate::harness::rng::replica_rng;

    fn tree(n: u32) -> TreeParams {
        TreeParams::new(n).unwrap()
    }

    #[test]
    fn maxima_ordering() {
        for i in 0..200 {
            let s = sample_gff_max(&tree(6), &mut replica_rng(21, i)).unwrap();
            assert!(s.max_all >= 0.0);
            assert!(s.max_all >= s.max_leaf);
            assert!(s.argmax_level <= 6);
        }
        assert!(sample_gff_max(&tree(0), &mut replica_rng(0, 0)).is_err());
    }

    #[test]
    fn depth_one_expected_max() {
        let vals = map_replicas(100_000, 22, Workers::Auto, |_, rng| {
            sample_gff_max(&tree(1), rng).unwrap().max_leaf
        });
        let s = ReplicaSummary::from_values(&vals, 22);
        let exact = 1.0 / std::f64::consts::PI.sqrt();
        assert!(s.z_score(exact) < 3.0, "{} vs {exact}", s.estimate);
    }

    #[test]
    fn path_variances() {
        let v = gff_leaf_variance_check(&tree(7), 10_000, 23, Workers::Auto).unwrap();
        assert_eq!(v[0], 0.0);
        // Var of the sample variance of a Gaussian is 2σ⁴/(m-1)
        let se = (2.0 * 49.0 / 9_999.0f64).sqrt();
        assert!((v[7] - 7.0).abs() < 4.0 * se, "{}", v[7]);
        assert!(gff_leaf_variance_check(&tree(3), 1, 0, Workers::Auto).is_err());
    }
}
