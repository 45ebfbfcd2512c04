use chase_lab::adversaries::{random_mdbg, random_ojs, MdbgGenParams, OjsGenParams};
use chase_lab::apps::{mdbg_to_dracc, ojs_to_dracc, MdbgInstance, OjsInstance};
use chase_lab::ddmdp::{simulate_policy, DdMdp};
use chase_lab::dracc::static_policy;
use num_rational::Rational64;

type Q = Rational64;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Posted price `p` per slot, sold-out slots at 1; each job takes its cheapest
/// interval (earliest on ties) when it can afford it.
fn schedule_revenue(inst: &OjsInstance<Q>, p: Q) -> Q {
    let mut left: Vec<u32> = (0..=inst.slots()).map(|i| if i == 0 { 0 } else { inst.bandwidth(i) }).collect();
    let mut revenue = q(0, 1);
    for job in inst.jobs() {
        let mut best: Option<(Q, usize)> = None;
        for s in job.a..=job.d + 1 - job.l {
            let cost: Q = (s..s + job.l).map(|i| if left[i] > 0 { p } else { q(1, 1) }).sum();
            if best.is_none_or(|(c, _)| cost < c) {
                best = Some((cost, s));
            }
        }
        if let Some((cost, s)) = best {
            if cost <= job.v {
                for slot in left.iter_mut().skip(s).take(job.l) {
                    *slot -= 1;
                }
                revenue += cost;
            }
        }
    }
    revenue
}

/// Posted price `p` per unmatched live left node; each right node takes its
/// best margin (lowest id on ties) when the margin is nonnegative.
fn matching_revenue(inst: &MdbgInstance<Q>, p: Q) -> Q {
    let mut taken = std::collections::BTreeSet::new();
    let mut revenue = q(0, 1);
    for (t, node) in inst.right().iter().enumerate() {
        let live = inst.live(t + 1);
        let mut best: Option<(Q, u32, Q)> = None;
        for &(i, w) in &node.weights {
            if !live.contains(&i) {
                continue;
            }
            let price = if taken.contains(&i) { q(1, 1) } else { p };
            let margin = w - price;
            let better = match best {
                None => true,
                Some((m, id, _)) => margin > m || (margin == m && i < id),
            };
            if better {
                best = Some((margin, i, price));
            }
        }
        if let Some((m, i, price)) = best {
            if m >= q(0, 1) {
                taken.insert(i);
                revenue += price;
            }
        }
    }
    revenue
}

#[test]
fn scheduling_image_earns_the_native_revenue() {
    for k in 0..200u64 {
        let params = OjsGenParams {
            jobs: 30,
            jobs_per_slot: 1 + (k % 3) as usize,
            bandwidth: [1, 3],
            span: [1, 4],
            length: [1, 3],
            value: [0.0, 1.0],
        };
        let native = random_ojs::<Q>(&params, k).unwrap();
        let image = ojs_to_dracc(&native).unwrap();
        for n in 1..8 {
            let p = q(n, 8);
            let trace = simulate_policy(&image, &static_policy("p", p), image.horizon()).unwrap();
            assert_eq!(trace.cumulative() * image.reward_scale(), schedule_revenue(&native, p), "instance {k}, price {p}");
        }
    }
}

#[test]
fn matching_image_earns_the_native_revenue() {
    for k in 0..200u64 {
        let params = MdbgGenParams { right: 25, left_per_round: 1 + (k % 2) as usize, lifetime: [1, 5], weight: [0.0, 1.0], density: 0.7 };
        let native = random_mdbg::<Q>(&params, k).unwrap();
        let image = mdbg_to_dracc(&native).unwrap();
        assert_eq!(image.capacity_bound(), 1);
        for n in 1..8 {
            let p = q(n, 8);
            let trace = simulate_policy(&image, &static_policy("p", p), image.horizon()).unwrap();
            assert_eq!(trace.cumulative() * image.reward_scale(), matching_revenue(&native, p), "instance {k}, price {p}");
        }
    }
}

#[test]
fn scheduling_width_bounds_the_active_set() {
    for k in 0..50u64 {
        let params = OjsGenParams { jobs: 40, jobs_per_slot: 2, bandwidth: [1, 2], span: [1, 5], length: [1, 2], value: [0.0, 1.0] };
        let image = ojs_to_dracc(&random_ojs::<f64>(&params, k).unwrap()).unwrap();
        for t in 1..=image.horizon() {
            assert!(image.schedule().active(t).len() <= image.width_bound());
        }
        assert!(image.schedule().fifo_violation().is_none());
    }
}
