use oppsched::analytic::{
    bin_boundaries, bin_index, binomial_terms, capacity_capture, capacity_enhanced, capacity_heterogeneous,
    capacity_homogeneous, collision_free_bound, enhanced_utilized_prob, AnalyticReport,
};
use oppsched::evt::{
    gpd_survival, norm_constants, tail_excess_survival, threshold_gaussian, threshold_gaussian_series,
    threshold_gumbel, TailModel,
};
use oppsched::point_process::{user_rate, UserProfile};
use oppsched::report::round12;
use oppsched::scenario::{parse_scenario, serialize_scenario};
use oppsched::sim::{
    run_materialized, simulate_slot, KTarget, OutcomeKind, ProfileSpec, ScenarioConfig, SchemeKind, SimStats,
    ThresholdRule,
};
use oppsched::special::normal_sf;
use proptest::prelude::*;

type ThresholdFn = fn(u64, f64, f64, f64) -> oppsched::Result<f64>;

fn partition_ok(r: &AnalyticReport) -> bool {
    (r.p_idle + r.p_collision + r.p_utilized - 1.0).abs() < 1e-9
}

fn profiles_strategy(max: usize) -> impl Strategy<Value = Vec<UserProfile>> {
    prop::collection::vec((-2.0..4.0f64, 0.03..3.0f64), 2..max)
        .prop_map(|v| v.into_iter().map(|(m, s)| UserProfile::new(m, s).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_constants_monotone(n in 8u64..10_000_000) {
        let c0 = norm_constants(n, 0.0, 1.0).unwrap();
        let c1 = norm_constants(n + 1, 0.0, 1.0).unwrap();
        prop_assert!(c1.a < c0.a);
        prop_assert!(c1.b > c0.b);
    }

    #[test]
    fn thresholds_are_affine(
        kk in 10u64..1_000_000,
        frac in 0.0001..0.05f64,
        mu in -10.0..10.0f64,
        sigma in 0.01..20.0f64,
    ) {
        let k = frac * kk as f64;
        let fs: [ThresholdFn; 3] = [threshold_gaussian, threshold_gaussian_series, threshold_gumbel];
        for f in fs {
            let (Ok(std), Ok(scaled)) = (f(kk, k, 0.0, 1.0), f(kk, k, mu, sigma)) else { continue };
            let want = mu + sigma * std;
            prop_assert!((scaled - want).abs() <= 1e-12 * want.abs().max(1.0), "{scaled} {want}");
        }
    }

    #[test]
    fn gaussian_threshold_round_trips(kk in 2u64..100_000_000, frac in 0.0..1.0f64, mu in -5.0..5.0f64, sigma in 0.1..5.0f64) {
        let k = (frac * kk as f64).max(1e-3).min(kk as f64 * 0.999);
        let u = threshold_gaussian(kk, k, mu, sigma).unwrap();
        let s = normal_sf((u - mu) / sigma);
        let want = k / kk as f64;
        prop_assert!(((s - want) / want).abs() < 1e-10, "{s} {want}");
    }

    #[test]
    fn gpd_tends_to_exponential(x in 0.0..50.0f64, sigma_v in 0.05..10.0f64, xi in -1e-8..1e-8f64) {
        let g = gpd_survival(x, sigma_v, xi);
        let e = tail_excess_survival(x, sigma_v);
        prop_assert!((g - e).abs() <= 1e-6);
    }

    #[test]
    fn tail_survival_nonincreasing(a in 0.0..20.0f64, d in 0.0..5.0f64, scale in 0.05..5.0f64, xi in -0.5..1.0f64) {
        let m = TailModel::gpd(0.0, scale, xi);
        prop_assert_eq!(m.survival(0.0), 1.0);
        prop_assert!(m.survival(a + d) <= m.survival(a));
    }

    #[test]
    fn rates_monotone(u in -5.0..10.0f64, du in 0.001..2.0f64, mu in -2.0..2.0f64, sigma in 0.05..3.0f64) {
        let p = UserProfile::new(mu, sigma).unwrap();
        let q = UserProfile::new(mu + du, sigma).unwrap();
        let r = user_rate(u, &p, 1000).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(user_rate(u + du, &p, 1000).unwrap() < r);
        prop_assert!(user_rate(u, &q, 1000).unwrap() > r);
    }

    #[test]
    fn reports_partition(kk in 3u64..5_000, frac in 0.001..0.9f64, mu in -3.0..3.0f64, sigma in 0.1..3.0f64) {
        let k = frac * kk as f64;
        let r = capacity_homogeneous(kk, k, mu, sigma).unwrap();
        prop_assert!(partition_ok(&r));
        // capacities are nonnegative whenever the threshold is
        if threshold_gaussian(kk, k, mu, sigma).unwrap() >= 0.0 {
            prop_assert!(r.expected_capacity >= 0.0);
        }
        for l in [1u32, 4, 49] {
            prop_assert!(partition_ok(&capacity_enhanced(kk, k, l, mu, sigma).unwrap()));
        }
    }

    #[test]
    fn capture_dominates(profiles in profiles_strategy(40), u in 0.0..6.0f64) {
        let base = capacity_heterogeneous(u, &profiles).unwrap();
        let cap = capacity_capture(u, &profiles).unwrap();
        prop_assert!(partition_ok(&base) && partition_ok(&cap));
        prop_assert!(cap.expected_capacity >= base.expected_capacity * (1.0 - 1e-12));
    }

    #[test]
    fn enhanced_monotone_in_bins(kk in 2u64..3_000, frac in 0.001..0.999f64, l in 1u32..200) {
        let k = frac * kk as f64;
        let p = k / kk as f64;
        let one = kk as f64 * p * (1.0 - p).powf(kk as f64 - 1.0);
        let any = 1.0 - (1.0 - p).powf(kk as f64);
        let a = enhanced_utilized_prob(kk, k, l).unwrap();
        let b = enhanced_utilized_prob(kk, k, l + 1).unwrap();
        prop_assert!(b >= a - 1e-12);
        prop_assert!(a >= one - 1e-12 && a <= any + 1e-12);
    }

    #[test]
    fn collision_free_exact_below_bound(k in 1u64..200, l in 1u64..5_000) {
        let c = collision_free_bound(k, l).unwrap();
        prop_assert!(c.exact <= c.bound);
        prop_assert!((0.0..=1.0).contains(&c.exact));
    }

    #[test]
    fn binomial_normalized(n in 1u64..2_000_000, p in 0.0..1.0f64) {
        let total: f64 = binomial_terms(n, p).iter().map(|t| t.1).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bins_partition_excess(l in 1u32..500, x in 0.0..3.0f64) {
        let b = bin_boundaries(l, 1000).unwrap();
        let j = bin_index(x, &b);
        prop_assert!(j >= 1 && j <= l);
        // bin j covers [t_j, t_{j-1}) with t_0 = infinity; b[j - 1] = t_j
        let j = j as usize;
        prop_assert!(x >= b[j - 1]);
        prop_assert!(j == 1 || x < b[j - 2]);
    }

    #[test]
    fn round12_idempotent(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(round12(round12(x)), round12(x));
    }

    #[test]
    fn scenario_round_trip(kk in 2u64..10_000, k in 0.1..1.9f64, seed in any::<u64>(), slots in 1u64..1_000_000, capture in any::<bool>()) {
        let scheme = if capture { SchemeKind::Capture } else { SchemeKind::Baseline };
        let mut c = ScenarioConfig::new(kk, scheme, ProfileSpec::Homogeneous { mu: 1.25, sigma: 0.5 });
        c.k_target = KTarget::Value(k);
        c.seed = seed;
        c.slots = slots;
        c.threshold_rule = ThresholdRule::Gumbel;
        let text = serialize_scenario(&c);
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize_scenario(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn merged_chunks_match_slotwise(seed in any::<u64>(), slots in 1u64..9_000, k in 0.5..3.0f64) {
        let mut c = ScenarioConfig::new(50, SchemeKind::Baseline, ProfileSpec::Homogeneous { mu: 0.0, sigma: 1.0 });
        c.k_target = KTarget::Value(k);
        c.seed = seed;
        let m = c.materialize().unwrap();
        let merged = run_materialized(&m, slots, 2).unwrap();
        let mut single = SimStats::empty(50, None);
        for s in 0..slots {
            single.record(&simulate_slot(&m, s));
        }
        prop_assert_eq!(merged.n_slots, slots);
        prop_assert_eq!(merged.idle + merged.utilized + merged.collision, slots);
        prop_assert_eq!(merged.idle, single.idle);
        prop_assert_eq!(merged.utilized, single.utilized);
        prop_assert_eq!(&merged.wins, &single.wins);
        prop_assert_eq!(merged.wins.iter().sum::<u64>(), merged.utilized);
        prop_assert!((merged.capacity_sum - single.capacity_sum).abs() <= 1e-9 * single.capacity_sum.abs().max(1.0));
    }

    #[test]
    fn utilized_slots_beat_threshold(seed in any::<u64>(), slot in any::<u64>()) {
        let mut c = ScenarioConfig::new(20, SchemeKind::Baseline, ProfileSpec::Uniform { mu: (0.0, 2.0), sigma: (0.1, 2.0), seed: 3 });
        c.k_target = KTarget::Value(1.0);
        c.seed = seed;
        let m = c.materialize().unwrap();
        let o = simulate_slot(&m, slot);
        match o.kind {
            OutcomeKind::Utilized => {
                let w = o.winner.unwrap();
                prop_assert_eq!(o.exceeders, 1);
                prop_assert!(o.capacity.unwrap() > m.thresholds[w]);
            }
            OutcomeKind::Idle => prop_assert_eq!(o.exceeders, 0),
            OutcomeKind::Collision => prop_assert!(o.exceeders >= 2),
        }
    }
}
