use covertree_core::analytic::{bridge_max_tail, path_likelihood_ratio, PoiGammaParams};
use covertree_core::harness::{map_replicas, ReplicaSummary, Workers};
use rand_distr::{Distribution, StandardNormal};
use statrs::function::gamma::gamma_lr;

/// `P(Z <= z)` as a Poisson mixture of Gamma CDFs.
fn mixture_cdf(r: f64, lambda: f64, z: f64) -> f64 {
    let mut weight = (-r).exp();
    let mut total = weight;
    if z <= 0.0 {
        return total;
    }
    for k in 1..400 {
        weight *= r / k as f64;
        total += weight * gamma_lr(k as f64, z / lambda);
        if weight < 1e-300 && k as f64 > r {
            break;
        }
    }
    total
}

#[test]
fn cdf_matches_poisson_gamma_mixture() {
    for (r, lambda) in [
        (0.3, 1.0),
        (2.0, 0.5),
        (4.0 / 3.0, 3.0),
        (25.0, 1.0),
        (60.0, 2.0),
    ] {
        let p = PoiGammaParams::new(r, lambda).unwrap();
        let mean = p.mean();
        let mut zs: Vec<f64> = [0.0, 0.01, 0.2, 0.5, 1.0, 1.5, 2.5]
            .iter()
            .map(|f| f * mean)
            .collect();
        zs.push(mean + 6.0 * p.variance().sqrt());
        zs.sort_by(f64::total_cmp);
        let batch = p.cdf_sorted(&zs);
        for (z, b) in zs.iter().zip(batch) {
            let oracle = mixture_cdf(r, lambda, *z);
            assert!((p.cdf(*z) - oracle).abs() < 1e-9, "r={r} λ={lambda} z={z}");
            assert!((b - oracle).abs() < 1e-9, "batch r={r} λ={lambda} z={z}");
        }
    }
}

#[test]
fn discretized_bridge_maximum() {
    let (q, lam, steps) = (1.0f64, 0.8f64, 10_000usize);
    let sd = (q / steps as f64).sqrt();
    let hits = map_replicas(100_000, 31, Workers::Auto, |_, rng| {
        let mut walk = vec![0.0f64; steps + 1];
        for i in 1..=steps {
            let g: f64 = StandardNormal.sample(rng);
            walk[i] = walk[i - 1] + sd * g;
        }
        let end = walk[steps];
        let top = walk
            .iter()
            .enumerate()
            .map(|(i, w)| w - end * i as f64 / steps as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        (top >= lam) as u8 as f64
    });
    let s = ReplicaSummary::from_values(&hits, 31);
    let exact = bridge_max_tail(q, lam).unwrap();
    assert!(
        (s.estimate - exact).abs() < 0.01,
        "{} vs {exact}",
        s.estimate
    );
    // a discrete grid can only miss the continuous maximum
    assert!(s.estimate < exact + 3.0 * s.stderr);
}

/// 100 increments in [-2, 2], drawn once and frozen.
const FIXTURE: [f64; 100] = [
    0.4313, 1.0836, -0.9646, -1.4006, 0.873, 1.46, -0.6614, -1.0736, 0.712, 1.6051, -1.5029,
    -1.8003, -0.5675, -0.8022, 0.4069, -1.2733, -1.8759, -0.6932, -1.0603, -0.7956, -0.3397,
    -1.1596, 1.895, 0.4872, 0.9207, -0.5024, 1.742, 1.3591, -1.0137, 0.8434, 1.7803, 0.2857,
    -0.5185, -0.4917, 1.3358, 0.1369, 1.7406, 0.746, 1.2728, 0.6632, -0.4954, -0.684, 1.8363,
    0.7954, -0.3752, -1.6187, -0.3397, 0.8681, -0.6754, 1.5158, -1.534, 0.4132, 0.736, -1.7509,
    0.6423, 0.68, 0.855, 0.9058, 0.8091, 1.9005, 1.6492, -0.6623, 0.168, 1.8004, -1.0067, -0.5624,
    1.0875, 0.9049, -0.2963, -1.8177, 1.0667, 1.6631, 1.5636, 0.9722, 1.4834, 1.0842, -0.949,
    0.4974, -0.1847, 0.4878, 0.4746, -1.6535, 1.4352, -0.7425, -0.2444, -0.4963, -1.6879, -1.1125,
    -0.0276, 1.9296, 0.7667, -1.2574, -0.8598, -1.7688, 1.5332, 0.2203, 1.8533, -1.7945, -0.2186,
    1.0297,
];

#[test]
fn frozen_path_likelihood_ratio() {
    let ratio = path_likelihood_ratio(400.0, &FIXTURE).unwrap();
    // 50-digit evaluation with the exact density
    let reference = 0.982_720_107_187_407_3;
    assert!(((ratio - reference) / reference).abs() < 1e-10, "{ratio}");
    let end = 400.0 + FIXTURE.iter().sum::<f64>();
    let scaled = ratio * (end / 400.0f64).sqrt();
    assert!((0.2..=5.0).contains(&scaled));
}
