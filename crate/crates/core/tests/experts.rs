use chase_lab::experts::{run_olsc, MbpConfig, MbpKind, OlscConfig, SwitchCost};

fn arm_frequency(kind: MbpKind, rewards: [f64; 2], horizon: usize, seeds: u64) -> f64 {
    let mut hits = 0usize;
    for seed in 0..seeds {
        let mut learner = kind.build(&MbpConfig::new(2, horizon, seed).unwrap());
        for _ in 0..horizon {
            let arm = learner.select();
            hits += usize::from(arm == 0);
            learner.update(arm, rewards[arm]);
        }
    }
    hits as f64 / (horizon as f64 * seeds as f64)
}

#[test]
fn lazy_leader_settles_on_the_dominant_arm() {
    let stream = vec![vec![1.0, 0.0]; 100];
    let mut total = 0usize;
    for seed in 0..1000 {
        let cfg = OlscConfig::new(2, 0.25, 100, seed).unwrap();
        let rep = run_olsc(&cfg, &stream, &SwitchCost::Fixed(0.25)).unwrap();
        total += rep.arms.iter().filter(|a| **a == 0).count();
    }
    let mean = total as f64 / 1000.0;
    assert!(mean >= 95.0, "mean rounds on the better arm {mean}");
}

#[test]
fn lazy_leader_rarely_switches_on_constant_rewards() {
    let stream = vec![vec![0.7, 0.2, 0.4]; 10_000];
    for seed in 0..5 {
        let cfg = OlscConfig::new(3, 1.0, stream.len(), seed).unwrap();
        let rep = run_olsc(&cfg, &stream, &SwitchCost::Fixed(1.0)).unwrap();
        assert!(rep.switch_count <= 5, "seed {seed}: {} switches", rep.switch_count);
        assert_eq!(rep.switch_rounds.len(), rep.switch_count);
    }
}

#[test]
fn bandits_find_the_rewarding_arm() {
    for kind in [MbpKind::Exp3, MbpKind::Inf] {
        let f = arm_frequency(kind, [1.0, 0.0], 10_000, 100);
        assert!(f >= 0.9, "{kind:?}: {f}");
    }
}

#[test]
fn bandits_stay_balanced_on_equal_arms() {
    for kind in [MbpKind::Exp3, MbpKind::Inf] {
        let f = arm_frequency(kind, [0.5, 0.5], 2_000, 50);
        assert!((f - 0.5).abs() <= 0.1, "{kind:?}: {f}");
    }
}

#[test]
fn single_arm_is_trivial() {
    let mut learner = MbpKind::Inf.build(&MbpConfig::new(1, 10, 0).unwrap());
    for _ in 0..10 {
        assert_eq!(learner.distribution(), &[1.0]);
        let arm = learner.select();
        assert_eq!(arm, 0);
        learner.update(arm, 0.3);
    }
    let cfg = OlscConfig::new(1, 2.0, 20, 1).unwrap();
    let rep = run_olsc(&cfg, &vec![vec![0.1]; 20], &SwitchCost::Random { mean: 2.0, seed: 4 }).unwrap();
    assert_eq!((rep.switch_count, rep.adjusted_regret), (0, 0.0));
}

#[test]
fn adjusted_regret_accounts_for_paid_switches() {
    let stream: Vec<Vec<f64>> = (0..400).map(|t| if (t / 40) % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] }).collect();
    let cfg = OlscConfig::new(2, 1.0, stream.len(), 8).unwrap();
    let rep = run_olsc(&cfg, &stream, &SwitchCost::Fixed(1.0)).unwrap();
    let learner: f64 = rep.arms.iter().zip(&stream).map(|(a, r)| r[*a]).sum();
    assert_eq!(rep.learner_reward, learner);
    assert_eq!(rep.switching_cost_paid, rep.switch_count as f64);
    assert_eq!(rep.best_arm_reward, 200.0);
    assert_eq!(rep.adjusted_regret, 200.0 - learner + rep.switch_count as f64);
    assert!(MbpConfig::new(0, 5, 0).is_err());
}
