use hdmc::bounds::{absolute_tail, ci_halfwidth, plan_sample_size, relative_tail, BoundSpec, SamplePlan};
use hdmc::estimators::{estimate_expectation, merge_moments, Domain, Integrand, Sampler, StreamingMoments};
use hdmc::experiments::StudyRow;
use hdmc::intervals::{interval, Method};
use hdmc::report::{csv_string, parse_csv};
use hdmc::sampling::{make_stream, sample_symmetric_cube, sample_unit_cube};
use hdmc::specfun::{inv_reg_inc_beta, reg_inc_beta};
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = BoundSpec> {
    prop_oneof![
        (0.1f64..100.0).prop_map(|w| BoundSpec::bounded(w).unwrap()),
        (0.1f64..50.0).prop_map(|l| BoundSpec::convex_lipschitz_cube(l).unwrap()),
        (0.1f64..50.0, 0.05f64..5.0).prop_map(|(l, g)| BoundSpec::lipschitz_log_concave(l, g).unwrap()),
    ]
}

fn moments(xs: &[f64]) -> StreamingMoments {
    xs.iter().copied().collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn merge_is_associative_and_commutative(
        a in prop::collection::vec(-1e3f64..1e3, 0..40),
        b in prop::collection::vec(-1e3f64..1e3, 0..40),
        c in prop::collection::vec(-1e3f64..1e3, 0..40),
    ) {
        let (ma, mb, mc) = (moments(&a), moments(&b), moments(&c));
        let left = merge_moments(&merge_moments(&ma, &mb), &mc);
        let right = merge_moments(&ma, &merge_moments(&mb, &mc));
        prop_assert_eq!(left.count(), right.count());
        prop_assert!(close(left.mean(), right.mean(), 1e-12));
        prop_assert!(close(left.m2(), right.m2(), 1e-12));
        let ab = merge_moments(&ma, &mb);
        let ba = merge_moments(&mb, &ma);
        prop_assert!(close(ab.mean(), ba.mean(), 1e-12));
        prop_assert!(close(ab.m2(), ba.m2(), 1e-12));
        let all: Vec<f64> = a.iter().chain(&b).chain(&c).copied().collect();
        let direct = moments(&all);
        prop_assert!(close(left.mean(), direct.mean(), 1e-12));
        prop_assert!(close(left.m2(), direct.m2(), 1e-10));
    }

    #[test]
    fn inc_beta_round_trip(a in 0.5f64..20.0, b in 0.5f64..20.0, x in 0.01f64..0.99) {
        let u = reg_inc_beta(a, b, x).unwrap();
        let back = inv_reg_inc_beta(a, b, u).unwrap();
        // where the CDF is flat the inverse is ill-conditioned; compare in probability space
        let u_back = reg_inc_beta(a, b, back).unwrap();
        prop_assert!((u_back - u).abs() <= 1e-10, "a={a} b={b} x={x} u={u} back={back}");
    }

    #[test]
    fn inc_beta_monotone(a in 0.5f64..20.0, b in 0.5f64..20.0, x in 0.0f64..1.0, dx in 0.0f64..0.1) {
        let y = (x + dx).min(1.0);
        prop_assert!(reg_inc_beta(a, b, x).unwrap() <= reg_inc_beta(a, b, y).unwrap() + 1e-15);
        prop_assert_eq!(reg_inc_beta(a, b, 0.0).unwrap(), 0.0);
        prop_assert_eq!(reg_inc_beta(a, b, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn halfwidth_inverts_tail(spec in spec_strategy(), n in 1u64..1_000_000, alpha in 1e-6f64..0.999) {
        let h = ci_halfwidth(&spec, n, alpha).unwrap();
        let back = absolute_tail(&spec, n, h).unwrap().probability_bound;
        prop_assert!((back - alpha).abs() <= 1e-10 * alpha.max(1e-2), "alpha={alpha} back={back}");
    }

    #[test]
    fn halving_alpha_scales_halfwidth(spec in spec_strategy(), n in 1u64..1_000_000, alpha in 1e-6f64..0.999) {
        let h1 = ci_halfwidth(&spec, n, alpha).unwrap();
        let h2 = ci_halfwidth(&spec, n, alpha / 2.0).unwrap();
        let expected = (4.0 / alpha).ln() / (2.0 / alpha).ln();
        prop_assert!((h2 * h2 / (h1 * h1) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn tail_decreasing(spec in spec_strategy(), n in 1u64..100_000, delta in 1e-3f64..10.0) {
        let t = absolute_tail(&spec, n, delta).unwrap().probability_bound;
        prop_assert!(absolute_tail(&spec, n + 1, delta).unwrap().probability_bound < t || t < f64::MIN_POSITIVE);
        prop_assert!(absolute_tail(&spec, n, delta * 1.01).unwrap().probability_bound < t || t < f64::MIN_POSITIVE);
    }

    #[test]
    fn plan_is_minimal(spec in spec_strategy(), mu in 0.01f64..10.0, delta in 0.01f64..1.0, alpha in 0.001f64..0.5) {
        let spec = spec.with_mean_lower_bound(mu).unwrap();
        match plan_sample_size(&spec, delta, alpha).unwrap() {
            SamplePlan::Feasible(n) => {
                prop_assert!(relative_tail(&spec, n, delta).unwrap().probability_bound <= alpha);
                if n > 1 {
                    prop_assert!(relative_tail(&spec, n - 1, delta).unwrap().probability_bound > alpha);
                }
            }
            SamplePlan::Infeasible { required } => prop_assert!(required > (1u64 << 62) as f64),
        }
    }

    #[test]
    fn interval_invariants(k in 1u64..300, frac in 0.0f64..=1.0, alpha in 0.001f64..0.5) {
        let x = ((k as f64) * frac).round() as u64;
        let phat = x as f64 / k as f64;
        for m in Method::ALL {
            let iv = interval(m, x, k, alpha).unwrap();
            prop_assert!(0.0 <= iv.lower && iv.lower <= iv.upper && iv.upper <= 1.0);
            // plain Jeffreys quantiles exclude x/k at x = 0 and x = k
            if m != Method::Jeffreys || (x > 0 && x < k) {
                prop_assert!(iv.lower <= phat + 1e-12 && phat <= iv.upper + 1e-12, "{m} x={x} k={k} {iv:?}");
            }
            let mirror = interval(m, k - x, k, alpha).unwrap();
            prop_assert!((iv.lower - (1.0 - mirror.upper)).abs() <= 1e-10);
            prop_assert!((iv.upper - (1.0 - mirror.lower)).abs() <= 1e-10);
        }
    }

    #[test]
    fn sampler_support(seed in any::<u64>(), idx in 0u64..1000, p in 1usize..8, n in 1usize..50) {
        let b = sample_unit_cube(&mut make_stream(seed, idx), p, n).unwrap();
        prop_assert!(b.points().iter().all(|v| (0.0..1.0).contains(v)));
        let b = sample_symmetric_cube(&mut make_stream(seed, idx), p, n).unwrap();
        prop_assert!(b.points().iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn estimate_is_sample_mean(seed in any::<u64>(), p in 1usize..5, n in 1usize..2000) {
        let f = Integrand::new(p, Domain::UnitCube, |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>());
        let spec = BoundSpec::bounded(p as f64).unwrap();
        let est = estimate_expectation(seed, &f, &Sampler::UnitCube { dim: p }, n, 0.05, &spec).unwrap();
        let batch = sample_unit_cube(&mut make_stream(seed, 0), p, n).unwrap();
        let direct = batch.rows().map(|x| f.eval(x)).sum::<f64>() / n as f64;
        prop_assert!(close(est.estimate, direct, 1e-12));
        prop_assert!((est.ci_upper - est.ci_lower - 2.0 * ci_halfwidth(&spec, n as u64, 0.05).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn study_rows_round_trip(
        p in prop::option::of(1u32..1000),
        vals in prop::collection::vec(prop::option::of(prop::num::f64::NORMAL | prop::num::f64::ZERO), 7),
        n in any::<u64>(),
        seed in any::<u64>(),
    ) {
        let row = StudyRow {
            study: "qnorm".into(),
            p,
            param: vals[0],
            n,
            estimate: vals[1],
            truth: vals[2],
            abs_error: vals[3],
            rel_error: vals[4],
            ci_lower: vals[5],
            ci_upper: vals[6],
            method: "convex_lipschitz_cube".into(),
            seed,
        };
        let text = csv_string(&["cfg".to_string()], std::slice::from_ref(&row));
        let (_, back) = parse_csv::<StudyRow>(&text).unwrap();
        prop_assert_eq!(back.len(), 1);
        let b = &back[0];
        prop_assert_eq!(b.p, row.p);
        prop_assert_eq!(b.n, row.n);
        prop_assert_eq!(b.seed, row.seed);
        let bits = |v: Option<f64>| v.map(f64::to_bits);
        for (x, y) in [
            (b.param, row.param), (b.estimate, row.estimate), (b.truth, row.truth), (b.abs_error, row.abs_error),
            (b.rel_error, row.rel_error), (b.ci_lower, row.ci_lower), (b.ci_upper, row.ci_upper),
        ] {
            prop_assert_eq!(bits(x), bits(y));
        }
    }
}
