use covertree_core::analytic::PoiGammaParams;
use covertree_core::harness::replicas::mean_var;
use covertree_core::harness::{
    ks_critical_1pct, ks_statistic, map_replicas, run_replicas, Experiment, ReplicaSummary, Workers,
};
use covertree_core::rayknight::{chain, sample_field};
use covertree_core::walk::{run_until_cover, run_until_inverse_local_time};
use covertree_core::{TreeParams, VertexRef};

fn tree(n: u32) -> TreeParams {
    TreeParams::new(n).unwrap()
}

fn field_values(p: &TreeParams, t: f64, rng: &mut covertree_core::harness::ReplicaRng) -> Vec<f64> {
    let mut values = vec![0.0; p.vertex_count() as usize];
    let mut visit = |v: VertexRef, x: f64| values[v.heap_id()] = x;
    sample_field(p, t, rng, Some(&mut visit)).unwrap();
    values
}

/// Mean and variance of a column with the standard errors of both.
fn moments(xs: &[f64]) -> (f64, f64, f64, f64) {
    let (m, v) = mean_var(xs);
    let n = xs.len() as f64;
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let (_, vsq) = mean_var(&sq);
    (m, (v / n).sqrt(), v, (vsq / n).sqrt())
}

#[test]
fn walk_and_field_agree_at_the_leaves() {
    let (p, t, reps) = (tree(3), 2.0, 10_000u64);
    let walk = map_replicas(reps, 41, Workers::Auto, |_, rng| {
        run_until_inverse_local_time(&p, t, rng, true)
            .unwrap()
            .field
            .unwrap()
            .leaves()
            .to_vec()
    });
    let first_leaf = (p.leaf_count() - 1) as usize;
    let field = map_replicas(reps, 42, Workers::Auto, |_, rng| {
        field_values(&p, t, rng)[first_leaf..].to_vec()
    });
    for leaf in 0..p.leaf_count() as usize {
        let a: Vec<f64> = walk.iter().map(|row| row[leaf]).collect();
        let b: Vec<f64> = field.iter().map(|row| row[leaf]).collect();
        let (ma, sma, va, sva) = moments(&a);
        let (mb, smb, vb, svb) = moments(&b);
        assert!(
            (ma - mb).abs() < 4.0 * sma.hypot(smb),
            "leaf {leaf} mean {ma} vs {mb}"
        );
        assert!(
            (va - vb).abs() < 4.0 * sva.hypot(svb),
            "leaf {leaf} var {va} vs {vb}"
        );
    }
    let q = (-t / 3.0f64).exp();
    for rows in [&walk, &field] {
        let zeros: Vec<f64> = rows.iter().map(|r| (r[0] == 0.0) as u8 as f64).collect();
        let s = ReplicaSummary::from_values(&zeros, 0);
        assert!(s.z_score(q) < 3.0, "{} vs {q}", s.estimate);
    }
}

#[test]
fn level_marginal_is_poigamma() {
    let (p, t, k) = (tree(6), 4.0, 3u32);
    let reps = 100_000u64;
    let id = VertexRef::new(k, 0).heap_id();
    let xs = map_replicas(reps, 43, Workers::Auto, |_, rng| {
        field_values(&p, t, rng)[id]
    });
    let law = PoiGammaParams::new(t / k as f64, k as f64).unwrap();
    let d = ks_statistic(&xs, &law).unwrap();
    assert!(d < ks_critical_1pct(xs.len()), "D = {d}");
}

#[test]
fn chained_steps_compose() {
    for d in [2u32, 3, 5] {
        let xs = map_replicas(100_000, 44 + d as u64, Workers::Auto, |_, rng| {
            chain(6.0, d, rng)
        });
        let (m, sm, v, sv) = moments(&xs);
        assert!((m - 6.0).abs() < 4.0 * sm, "d={d} mean {m}");
        let var = 2.0 * d as f64 * 6.0;
        assert!((v - var).abs() < 4.0 * sv, "d={d} var {v} vs {var}");
    }
}

#[test]
fn sibling_covariance_is_parent_variance() {
    // children of the pinned root are independent; grandchildren sharing a
    // parent have covariance Var(parent) = 2t
    let (p, t, reps) = (tree(2), 3.0, 100_000u64);
    for (seed, walk) in [(45u64, false), (46, true)] {
        let rows = map_replicas(reps, seed, Workers::Auto, |_, rng| {
            if walk {
                run_until_inverse_local_time(&p, t, rng, true)
                    .unwrap()
                    .field
                    .unwrap()
                    .values()
                    .to_vec()
            } else {
                field_values(&p, t, rng)
            }
        });
        for (i, j, expect) in [(1usize, 2usize, 0.0), (3, 4, 2.0 * t), (5, 6, 2.0 * t)] {
            let (mi, _) = mean_var(&rows.iter().map(|r| r[i]).collect::<Vec<_>>());
            let (mj, _) = mean_var(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());
            let prods: Vec<f64> = rows.iter().map(|r| (r[i] - mi) * (r[j] - mj)).collect();
            let s = ReplicaSummary::from_values(&prods, seed);
            assert!(
                s.z_score(expect) < 4.0,
                "walk={walk} ({i},{j}) {}",
                s.estimate
            );
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let experiments = [
        Experiment::LeafZero {
            tree: tree(4),
            t: 1.0,
            leaf: 3,
        },
        Experiment::Uncovered {
            tree: tree(5),
            t: 6.0,
        },
        Experiment::TauT {
            tree: tree(3),
            t: 1.5,
        },
        Experiment::CoverTime { tree: tree(3) },
        Experiment::GffMaxLeaf { tree: tree(6) },
    ];
    for e in &experiments {
        let base = run_replicas(e, 300, 47, Workers::Sequential).unwrap();
        for w in [Workers::Auto, Workers::Fixed(2), Workers::Fixed(8)] {
            let other = run_replicas(e, 300, 47, w).unwrap();
            assert_eq!(
                base.estimate.to_bits(),
                other.estimate.to_bits(),
                "{e:?} {w:?}"
            );
            assert_eq!(base.stderr.to_bits(), other.stderr.to_bits());
        }
    }
}

/// Var(τ(t)) from τ = Σ d_v L^v and Cov(L^u, L^w) = 2t·level(u∧w).
fn exact_tau_variance(n: u32, t: f64) -> f64 {
    let deg = |k: u32| {
        if k == 0 {
            2.0
        } else if k < n {
            3.0
        } else {
            1.0
        }
    };
    let (mut weight, mut pairs) = (0.0, 0.0);
    for k in (1..=n).rev() {
        weight = deg(k) + 2.0 * weight;
        pairs += 2f64.powi(k as i32) * weight * weight;
    }
    2.0 * t * pairs
}

#[test]
fn inverse_local_time_moments() {
    let t = 3.0;
    let mut scaled = Vec::new();
    for n in 3..=5u32 {
        let p = tree(n);
        let taus = map_replicas(10_000, 48 + n as u64, Workers::Auto, |_, rng| {
            run_until_inverse_local_time(&p, t, rng, false)
                .unwrap()
                .tau_t
                .unwrap()
        });
        let (m, sm, v, sv) = moments(&taus);
        let exact = t * 2.0 * p.edge_count() as f64;
        assert!((m - exact).abs() < 3.0 * sm, "n={n} {m} vs {exact}");
        let var = exact_tau_variance(n, t);
        assert!((v - var).abs() < 4.0 * sv, "n={n} var {v} vs {var}");
        scaled.push(v / (4f64.powi(n as i32) * t));
    }
    let (lo, hi) = scaled
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
    assert!(hi / lo < 2.0, "{scaled:?}");
}

#[test]
fn tau_variance_scale_saturates() {
    let r: Vec<f64> = (3..=12)
        .map(|n| exact_tau_variance(n, 1.0) / 4f64.powi(n as i32))
        .collect();
    assert!((r[0] - 13.9375).abs() < 1e-12);
    assert!(r.windows(2).all(|w| w[1] > w[0]) && r[9] < 32.0);
}

#[test]
fn cover_time_grows_with_depth() {
    let mean_cover = |n: u32| {
        let p = tree(n);
        let c = map_replicas(400, 52 + n as u64, Workers::Auto, |_, rng| {
            run_until_cover(&p, rng).unwrap().cover_time.unwrap()
        });
        mean_var(&c).0
    };
    let (a, b) = (mean_cover(3), mean_cover(5));
    assert!(b > a, "{a} {b}");
}
