//! Statistical properties of the scrambles and the RQMC estimator.

use dignet::fixtures;
use dignet::gains::{enumerate_gains, EnumerateOptions};
use dignet::netgen::generate_points;
use dignet::scramble::{
    estimate, scramble_unit, verify_gain_identity, HaarIntegrand, Product, ScrambleKind, ScrambleSpec,
};
use dignet::SubsetIndex;

/// Kolmogorov–Smirnov distance of a sample from U[0, 1).
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).max((i + 1) as f64 / n - x))
        .fold(0.0, f64::max)
}

#[test]
fn nested_uniform_points_have_mean_one_half() {
    let p = generate_points(&fixtures::identity(13));
    let xs = scramble_unit(&p, &ScrambleSpec::new(ScrambleKind::NestedUniform, 99)).unwrap();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    // A net is far more balanced than iid; the iid standard error is generous.
    let se = (1.0 / 12.0 / n).sqrt();
    assert!((mean - 0.5).abs() < 4.0 * se, "mean {mean}");
}

#[test]
fn first_coordinates_are_uniform_across_replicates() {
    // Coordinate 1 of each replicate is one draw; pooled over R replicates
    // they are iid uniform, so KS applies exactly.
    let p = generate_points(&fixtures::sobol(2, 6));
    let replicates = 500;
    // 0.001 critical value of the KS distance.
    let critical = 1.949 / (replicates as f64).sqrt();
    for kind in ScrambleKind::ALL {
        let mut passed = 0;
        for trial in 0..100u64 {
            let first: Vec<f64> = (0..replicates)
                .map(|r| {
                    let spec = ScrambleSpec::new(kind, (trial << 32) | r);
                    scramble_unit(&p, &spec).unwrap()[0]
                })
                .collect();
            if ks_uniform(first) < critical {
                passed += 1;
            }
        }
        assert!(passed >= 99, "{kind:?}: {passed}/100");
    }
}

#[test]
fn pooled_points_are_uniform() {
    let p = generate_points(&fixtures::sobol(3, 5));
    for kind in ScrambleKind::ALL {
        let mut pooled = Vec::new();
        for r in 0..64 {
            let xs = scramble_unit(&p, &ScrambleSpec::new(kind, 1234).replicate(r)).unwrap();
            pooled.extend(xs.chunks(3).map(|pt| pt[2]));
        }
        let n = pooled.len() as f64;
        assert!(ks_uniform(pooled) < 1.949 / n.sqrt(), "{kind:?}");
    }
}

#[test]
fn haar_estimates_are_unbiased() {
    let g = fixtures::shift_net();
    let p = generate_points(&g);
    let f = HaarIntegrand::new(SubsetIndex::new(vec![0, 1, 3], vec![0, 0, 1]).unwrap(), 1.0);
    for kind in [ScrambleKind::RandomLinear, ScrambleKind::NestedUniform] {
        let est = estimate(&p, &ScrambleSpec::new(kind, 5), &f, 10_000).unwrap();
        assert!(est.mean.abs() < 4.0 * est.variance_of_mean.sqrt(), "{kind:?}: {}", est.mean);
    }
}

#[test]
fn product_integrand_beats_monte_carlo() {
    let p = generate_points(&fixtures::sobol(2, 10));
    let replicates = 32;
    // Var(x1 x2) for independent uniforms: 1/9 - 1/16.
    let sigma2 = 1.0 / 9.0 - 1.0 / 16.0;
    let mc = sigma2 / (p.n() as f64 * replicates as f64);
    for kind in [ScrambleKind::RandomLinear, ScrambleKind::NestedUniform] {
        let est = estimate(&p, &ScrambleSpec::new(kind, 17), &Product, replicates).unwrap();
        assert!(est.variance_of_mean < mc, "{kind:?}: {} vs {mc}", est.variance_of_mean);
        assert!((est.mean - 0.25).abs() < 1e-3);
    }
}

#[test]
fn every_nonzero_shift_net_gain_matches_the_variance() {
    let g = fixtures::shift_net();
    let report = enumerate_gains(&g, &EnumerateOptions::new(g.m() + 1)).unwrap();
    assert!(!report.entries.is_empty());
    for (i, entry) in report.entries.iter().enumerate() {
        let spec = ScrambleSpec::new(ScrambleKind::RandomLinear, 1 << 40 | (i as u64) << 20);
        let r = verify_gain_identity(&g, &entry.index, 4000, &spec).unwrap();
        assert!(r.pass, "{}", serde_json::to_string(&r).unwrap());
    }
}

#[test]
fn zero_gains_integrate_exactly_under_every_scramble() {
    let g = fixtures::shift_net();
    let idx = SubsetIndex::new(vec![0, 2], vec![1, 0]).unwrap();
    assert!(dignet::gain_fast(&g, &idx).is_zero());
    for kind in ScrambleKind::ALL {
        let r = verify_gain_identity(&g, &idx, 500, &ScrambleSpec::new(kind, 3)).unwrap();
        assert!(r.pass && r.empirical_n_var == 0.0, "{kind:?}");
    }
}
