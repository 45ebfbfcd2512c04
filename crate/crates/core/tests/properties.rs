use std::cmp::Ordering;

use chase_lab::adversaries::{olsc_to_ddmdp, random_dracc, DraccGenParams, ValuationGen};
use chase_lab::chasing::{run_chase, PolicyFollower};
use chase_lab::ddmdp::{simulate_policy, DdMdp, View};
use chase_lab::dracc::{canonical_cmp, make_policy_family, static_policy, PolicyFamilySpec, PriceVector, ResourceId, Valuation};
use chase_lab::experts::{run_olsc, MbpConfig, MbpKind, OlscConfig, SwitchCost};
use num_rational::Rational64;
use proptest::prelude::*;

fn params(horizon: usize, cap: u32, life: usize) -> DraccGenParams {
    DraccGenParams {
        horizon,
        arrivals: 1,
        capacity: [0, cap],
        lifetime: [1, life],
        valuation: ValuationGen::Kdemand { k: [1, 3], weight: [0.0, 1.0], density: 0.9 },
        drift: None,
        capacity_bound: None,
        width_bound: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inventory_never_oversold(seed in any::<u64>(), cap in 1u32..4, life in 1usize..5, level in 0.05f64..1.0) {
        let inst = random_dracc::<f64>(&params(60, cap, life), seed).unwrap();
        let policy = static_policy("p", level);
        let trace = simulate_policy(&inst, &policy, 60).unwrap();
        let view = View::new(&inst);
        for (t, (s, x)) in trace.states.iter().zip(&trace.actions).enumerate() {
            prop_assert!(view.is_feasible(s, x));
            for &(i, u) in &s.0 {
                prop_assert!(u <= inst.schedule().resource(i).unwrap().c);
                if t > 0 {
                    if let Some(prev) = trace.states[t - 1].get(i) {
                        prop_assert!(u <= prev);
                    }
                }
            }
            let r = trace.rewards[t];
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }

    #[test]
    fn demand_depends_only_on_valuation_and_prices(
        raw in prop::collection::vec((1u32..10, 0i64..8, 1i64..9), 0..7),
        k in 1usize..4,
        rotate in 0usize..7,
    ) {
        let mut seen = std::collections::BTreeMap::new();
        for (id, w, p) in raw {
            seen.entry(id).or_insert((w, p));
        }
        let weights: Vec<(ResourceId, Rational64)> = seen.iter().map(|(i, (w, _))| (*i, Rational64::new(*w, 8))).collect();
        let prices = PriceVector(seen.iter().map(|(i, (_, p))| (*i, Rational64::new(*p, 8))).collect());
        let mut shuffled = weights.clone();
        if !shuffled.is_empty() {
            let n = shuffled.len();
            shuffled.rotate_left(rotate % n);
        }
        let a = Valuation::kdemand(k, weights).unwrap();
        let b = Valuation::kdemand(k, shuffled).unwrap();
        let da = a.demand(&prices).unwrap();
        prop_assert_eq!(&da, &b.demand(&prices).unwrap());
        prop_assert_eq!(&da, &a.demand(&prices).unwrap());
        prop_assert!(da.chosen.len() <= k);
        prop_assert!(a.value(&da.chosen) >= da.payment);
    }

    #[test]
    fn expert_reduction_is_half_chasable(
        rows in prop::collection::vec(prop::collection::vec(0u8..3, 3), 2..12),
        start in 0usize..3,
        target in 0usize..3,
        t_frac in 0.0f64..1.0,
    ) {
        let stream: Vec<Vec<Rational64>> = rows.iter().map(|r| r.iter().map(|&v| Rational64::new(v.into(), 2)).collect()).collect();
        let (inst, policies) = olsc_to_ddmdp(&stream).unwrap();
        let horizon = inst.horizon();
        let t_init = 1 + ((horizon - 1) as f64 * t_frac) as usize;
        let mut oracle = PolicyFollower::new();
        let rep = run_chase(&inst, &mut oracle, policies.get(target), t_init, &start, horizon, 0, None).unwrap();
        // Only the first chased round can differ: the repeat bonus of 1/2.
        let target_state = if t_init == 1 { 0 } else { target };
        let bonus = |s: usize| if s == target { Rational64::new(1, 2) } else { Rational64::from_integer(0) };
        prop_assert_eq!(rep.cr, bonus(target_state) - bonus(start));
        prop_assert!(rep.cr <= Rational64::from_integer(1));
    }

    #[test]
    fn canonical_order_is_first_difference(
        a in prop::collection::btree_set(1u32..8, 0..6),
        b in prop::collection::btree_set(1u32..8, 0..6),
    ) {
        let (a, b): (Vec<u32>, Vec<u32>) = (a.into_iter().collect(), b.into_iter().collect());
        let expected = match (1u32..8).find(|i| a.contains(i) != b.contains(i)) {
            None => Ordering::Equal,
            Some(i) if a.contains(&i) => Ordering::Greater,
            Some(_) => Ordering::Less,
        };
        prop_assert_eq!(canonical_cmp(&a, &b), expected);
        prop_assert_eq!(canonical_cmp(&b, &a), expected.reverse());
    }

    #[test]
    fn float_and_exact_scalars_agree_on_quantized_instances(seed in any::<u64>(), level in 1i64..16) {
        let p = params(40, 2, 3);
        let f = random_dracc::<f64>(&p, seed).unwrap();
        let q = random_dracc::<Rational64>(&p, seed).unwrap();
        let pf = simulate_policy(&f, &static_policy("p", level as f64 / 16.0), 40).unwrap();
        let pq = simulate_policy(&q, &static_policy("p", Rational64::new(level, 16)), 40).unwrap();
        prop_assert_eq!(&pf.states, &pq.states);
        let exact = pq.cumulative() * q.reward_scale();
        let float = pf.cumulative() * f.reward_scale();
        prop_assert!((float - *exact.numer() as f64 / *exact.denom() as f64).abs() < 1e-9);
    }

    #[test]
    fn bandit_distributions_are_valid(
        rewards in prop::collection::vec(0.0f64..=1.0, 1..200),
        arms in 1usize..6,
        seed in any::<u64>(),
        inf in any::<bool>(),
    ) {
        let cfg = MbpConfig::new(arms, rewards.len(), seed).unwrap();
        let mut learner = if inf { MbpKind::Inf } else { MbpKind::Exp3 }.build(&cfg);
        for r in rewards {
            let d = learner.distribution();
            prop_assert!(d.iter().all(|p| *p >= 0.0));
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let arm = learner.select();
            prop_assert!(arm < arms);
            learner.update(arm, r);
        }
    }

    #[test]
    fn lazy_leader_ignores_realized_costs(
        stream in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..300),
        seed in any::<u64>(),
        cost in 0.0f64..10.0,
    ) {
        let cfg = OlscConfig::new(3, 1.0, stream.len(), seed).unwrap();
        let base = run_olsc(&cfg, &stream, &SwitchCost::Fixed(1.0)).unwrap();
        let other = run_olsc(&cfg, &stream, &SwitchCost::Fixed(cost)).unwrap();
        let random = run_olsc(&cfg, &stream, &SwitchCost::Random { mean: cost, seed }).unwrap();
        prop_assert_eq!(&base.arms, &other.arms);
        prop_assert_eq!(&base.arms, &random.arms);
        let switches = base.arms.windows(2).filter(|w| w[0] != w[1]).count();
        prop_assert_eq!(base.switch_count, switches);
    }
}

#[test]
fn ladder_policies_respect_feasibility_everywhere() {
    let spec = PolicyFamilySpec::InventoryLadder {
        rungs: vec![chase_lab::dracc::LadderRung { base: 0.9, slope: 0.8, floor: 0.05 }],
    };
    for seed in 0..20 {
        let inst = random_dracc::<f64>(&params(80, 3, 4), seed).unwrap();
        let fam = make_policy_family::<f64>(&spec, inst.schedule()).unwrap();
        let trace = simulate_policy(&inst, fam.get(0), 80).unwrap();
        for (s, x) in trace.states.iter().zip(&trace.actions) {
            for &(i, u) in &s.0 {
                if u == 0 {
                    assert_eq!(x.get(i), Some(&1.0));
                }
            }
        }
    }
}
