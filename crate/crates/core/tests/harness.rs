use alloc_bandit::{
    bas_pull_bounds, ch_pull_deviation_bound, monte_carlo, optimal_static_allocation, run_episodes,
    with_workers, ArmSpec, BanditInstance, EventCheck, StrategyKind, StrategyParams,
};

fn gaussians() -> BanditInstance {
    BanditInstance::new(vec![
        ArmSpec::gaussian(0.0, 4.0).unwrap(),
        ArmSpec::gaussian(1.0, 1.0).unwrap(),
    ])
    .unwrap()
}

#[test]
fn aggregates_do_not_depend_on_workers() {
    let inst = gaussians();
    for kind in [StrategyKind::ChAs, StrategyKind::BAs, StrategyKind::GafsMax] {
        let p = StrategyParams::new(kind);
        let one = with_workers(1, || monte_carlo(&inst, &p, 300, 400, 9)).unwrap();
        let four = with_workers(4, || monte_carlo(&inst, &p, 300, 400, 9)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.global_loss.to_bits(), four.global_loss.to_bits());
    }
}

#[test]
fn mean_pulls_sum_to_budget() {
    let inst = gaussians();
    for kind in [StrategyKind::ChAs, StrategyKind::BAs, StrategyKind::GafsMax, StrategyKind::Uniform, StrategyKind::Oracle] {
        let s = monte_carlo(&inst, &StrategyParams::new(kind), 257, 50, 1).unwrap();
        assert_eq!(s.mean_pulls.iter().sum::<f64>(), 257.0, "{kind:?}");
    }
}

#[test]
fn loss_stderr_shrinks_like_root_runs() {
    let inst = gaussians();
    let p = StrategyParams::new(StrategyKind::Uniform);
    let full = monte_carlo(&inst, &p, 200, 8000, 4).unwrap();
    let half = monte_carlo(&inst, &p, 200, 4000, 4).unwrap();
    for k in 0..2 {
        let ratio = half.loss_stderr[k] / full.loss_stderr[k];
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.3, "arm {k}: ratio {ratio}");
        assert!(full.loss[k] > 0.0);
    }
}

#[test]
fn events_hold_and_pulls_stay_in_bounds() {
    let inst = BanditInstance::new(vec![ArmSpec::bernoulli(0.5).unwrap(), ArmSpec::bernoulli(0.2).unwrap()]).unwrap();
    let (n, runs, k) = (200u64, 2000u64, 2.0);
    let delta = 1e-4;
    let check = EventCheck { ch_delta: delta, b_delta: delta, b_a: 1.0 };
    let s = inst.summary();
    let targets = optimal_static_allocation(inst.variances(), n).unwrap();

    let ch = StrategyParams::new(StrategyKind::ChAs).with_delta(delta);
    let results = run_episodes(&inst, &ch, n, runs, 11, Some(check)).unwrap();
    let held: Vec<_> = results.iter().filter(|r| r.events.unwrap().ch).collect();
    let freq = held.len() as f64 / runs as f64;
    let floor = 1.0 - 4.0 * n as f64 * k * delta;
    let se = (floor * (1.0 - floor) / runs as f64).sqrt();
    assert!(freq >= floor - 3.0 * se, "ch event frequency {freq}");
    let bound = ch_pull_deviation_bound(s, n, delta);
    for r in &held {
        for (arm, (&t, &target)) in r.pulls.iter().zip(&targets).enumerate() {
            let dev = t as f64 - target as f64;
            assert!(dev <= bound && dev >= -s.lambdas[arm] * bound);
        }
    }

    let b = StrategyParams::new(StrategyKind::BAs).with_delta(delta).with_a(1.0);
    let results = run_episodes(&inst, &b, n, runs, 12, Some(check)).unwrap();
    let held: Vec<_> = results.iter().filter(|r| r.events.unwrap().b).collect();
    let freq = held.len() as f64 / runs as f64;
    let floor = 1.0 - 2.0 * n as f64 * k * delta;
    let se = (floor * (1.0 - floor) / runs as f64).sqrt();
    assert!(freq >= floor - 3.0 * se, "b event frequency {freq}");
    for r in &held {
        for (arm, (&t, &target)) in r.pulls.iter().zip(&targets).enumerate() {
            let (lower, upper) = bas_pull_bounds(s, arm, n, delta, 1.0);
            let dev = t as f64 - target as f64;
            assert!(dev <= upper && dev >= -lower);
        }
    }
}
