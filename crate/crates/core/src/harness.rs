//! Episode simulation and Monte-Carlo aggregation.
//!
//! Arm `k` of run `r` draws from its own stream seeded by
//! `(master_seed, r, k)`. The `j`-th sample of an arm is therefore fixed
//! regardless of strategy, worker count or scheduling, and different
//! strategies run on the same seed see common random numbers.
//!
//! Per-run results are collected in run-index order and reduced
//! sequentially, so aggregates are bit-identical for any number of workers.

use log::warn;
use rayon::prelude::*;

use crate::bounds::{b_event_holds, ch_event_holds, InstanceSummary};
use crate::dists::ArmSpec;
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::strategies::{ResolvedParams, StrategyKind, StrategyParams, StrategyState};

/// A set of arms together with their derived summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditInstance {
    arms: Vec<ArmSpec>,
    summary: InstanceSummary,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmSpec>) -> Result<Self> {
        Self::with_sigma_bar(arms, None)
    }

    pub fn with_sigma_bar(arms: Vec<ArmSpec>, sigma_bar: Option<f64>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidInstance("an instance needs at least one arm".into()));
        }
        let summary = InstanceSummary::from_arms(&arms, sigma_bar)?;
        Ok(Self { arms, summary })
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn summary(&self) -> &InstanceSummary {
        &self.summary
    }

    pub fn k(&self) -> usize {
        self.arms.len()
    }

    pub fn variances(&self) -> &[f64] {
        &self.summary.variances
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmSpec::mean).collect()
    }

    /// Loss of the optimal static allocation, `sigma / n`.
    pub fn optimal_loss(&self, n: u64) -> f64 {
        self.summary.sigma / n as f64
    }

    pub fn all_gaussian(&self) -> bool {
        self.arms.iter().all(ArmSpec::is_gaussian)
    }
}

/// Confidence levels used when checking the concentration events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventCheck {
    pub ch_delta: f64,
    pub b_delta: f64,
    pub b_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventOutcome {
    pub ch: bool,
    pub b: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub pulls: Vec<u64>,
    pub means: Vec<f64>,
    pub sq_errors: Vec<f64>,
    /// Present only when event checking was requested.
    pub events: Option<EventOutcome>,
}

/// Runs one episode of `n` pulls. `run_index` selects the random streams.
pub fn run_episode(
    instance: &BanditInstance,
    params: &StrategyParams,
    n: u64,
    master_seed: u64,
    run_index: u64,
) -> Result<EpisodeResult> {
    let resolved = params.resolve(instance.arms(), n)?;
    simulate(instance, &resolved, n, master_seed, run_index, None)
}

/// Like [`run_episode`], but also records the full length-`n` sample path of
/// every arm and evaluates both concentration events on it. The episode
/// consumes prefixes of those same paths, so its outcome is unchanged.
pub fn run_episode_with_events(
    instance: &BanditInstance,
    params: &StrategyParams,
    n: u64,
    master_seed: u64,
    run_index: u64,
    check: EventCheck,
) -> Result<EpisodeResult> {
    let resolved = params.resolve(instance.arms(), n)?;
    simulate(instance, &resolved, n, master_seed, run_index, Some(check))
}

fn simulate(
    instance: &BanditInstance,
    params: &ResolvedParams,
    n: u64,
    master_seed: u64,
    run_index: u64,
    check: Option<EventCheck>,
) -> Result<EpisodeResult> {
    let k = instance.k();
    let mut state = StrategyState::new(*params, k, n, Some(instance.variances()))?;
    let mut rngs: Vec<RngState> = (0..k as u64)
        .map(|arm| RngState::for_arm(master_seed, run_index, arm))
        .collect();

    let paths: Option<Vec<Vec<f64>>> = check.map(|_| {
        instance
            .arms()
            .iter()
            .zip(rngs.iter_mut())
            .map(|(arm, rng)| (0..n).map(|_| arm.sample(rng)).collect())
            .collect()
    });

    while state.round() < n {
        let arm = state.select_arm()?;
        let x = match &paths {
            Some(p) => p[arm][state.stats()[arm].count() as usize],
            None => instance.arms()[arm].sample(&mut rngs[arm]),
        };
        state.observe(arm, x);
    }

    let pulls = state.pulls();
    let means: Vec<f64> = state
        .stats()
        .iter()
        .map(|s| s.mean().unwrap_or(f64::NAN))
        .collect();
    let sq_errors = means
        .iter()
        .zip(instance.arms())
        .map(|(m, arm)| (m - arm.mean()).powi(2))
        .collect();
    let events = check.zip(paths.as_ref()).map(|(c, p)| EventOutcome {
        ch: ch_event_holds(p, instance.variances(), c.ch_delta),
        b: b_event_holds(p, instance.variances(), c.b_delta, c.b_a),
    });
    Ok(EpisodeResult {
        pulls,
        means,
        sq_errors,
        events,
    })
}

/// Runs `runs` independent episodes in parallel on the current rayon pool and
/// returns them in run-index order.
pub fn run_episodes(
    instance: &BanditInstance,
    params: &StrategyParams,
    n: u64,
    runs: u64,
    master_seed: u64,
    check: Option<EventCheck>,
) -> Result<Vec<EpisodeResult>> {
    let resolved = params.resolve(instance.arms(), n)?;
    warn_regime(instance, params.kind, n);
    // Surface configuration errors before fanning out.
    StrategyState::new(resolved, instance.k(), n, Some(instance.variances()))?;
    (0..runs)
        .into_par_iter()
        .map(|run| simulate(instance, &resolved, n, master_seed, run, check))
        .collect()
}

fn warn_regime(instance: &BanditInstance, kind: StrategyKind, n: u64) {
    if kind.has_init_phase() && !instance.summary().in_regime(n) {
        warn!(
            "n = {n} is below 5K = {}; the guarantees do not cover this budget",
            5 * instance.k()
        );
    }
    if kind == StrategyKind::ChAs && instance.arms().iter().any(|a| !a.is_bounded()) {
        warn!("ch-as assumes arms supported on [0, 1]; running it on unbounded arms anyway");
    }
}

/// Monte-Carlo estimates over many episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub runs: u64,
    pub n: u64,
    /// Mean squared error of each arm's estimate.
    pub loss: Vec<f64>,
    pub loss_stderr: Vec<f64>,
    /// Largest per-arm loss estimate.
    pub global_loss: f64,
    pub worst_arm: usize,
    /// `global_loss - sigma / n`.
    pub regret: f64,
    /// Standard error of the worst arm's loss estimate.
    pub regret_stderr: f64,
    /// `n^{3/2} * regret`.
    pub rescaled_regret: f64,
    pub mean_pulls: Vec<f64>,
}

impl AggregateStats {
    pub fn rescaled_regret_stderr(&self) -> f64 {
        (self.n as f64).powf(1.5) * self.regret_stderr
    }
}

/// Sample mean and standard error of the mean, summed in order.
pub fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (count, sum) = xs.clone().fold((0usize, 0.0), |(c, s), x| (c + 1, s + x));
    if count == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = sum / count as f64;
    if count < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.map(|x| (x - mean).powi(2)).sum();
    let var = ss / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}

/// Reduces per-run results (in the given order) into [`AggregateStats`].
pub fn aggregate(instance: &BanditInstance, n: u64, results: &[EpisodeResult]) -> AggregateStats {
    let k = instance.k();
    let runs = results.len() as u64;
    let mut loss = Vec::with_capacity(k);
    let mut loss_stderr = Vec::with_capacity(k);
    let mut mean_pulls = Vec::with_capacity(k);
    for arm in 0..k {
        let (m, se) = mean_and_stderr(results.iter().map(|r| r.sq_errors[arm]));
        loss.push(m);
        loss_stderr.push(se);
        let total: u64 = results.iter().map(|r| r.pulls[arm]).sum();
        mean_pulls.push(total as f64 / runs as f64);
    }
    let mut worst_arm = 0;
    for arm in 1..k {
        if loss[arm] > loss[worst_arm] {
            worst_arm = arm;
        }
    }
    let global_loss = loss[worst_arm];
    let regret = global_loss - instance.optimal_loss(n);
    AggregateStats {
        runs,
        n,
        global_loss,
        worst_arm,
        regret,
        regret_stderr: loss_stderr[worst_arm],
        rescaled_regret: (n as f64).powf(1.5) * regret,
        loss,
        loss_stderr,
        mean_pulls,
    }
}

/// Monte-Carlo estimate of loss, regret and pull counts.
pub fn monte_carlo(
    instance: &BanditInstance,
    params: &StrategyParams,
    n: u64,
    runs: u64,
    master_seed: u64,
) -> Result<AggregateStats> {
    if runs < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 runs, got {runs}")));
    }
    let results = run_episodes(instance, params, n, runs, master_seed, None)?;
    Ok(aggregate(instance, n, &results))
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}

/// Both sides of `E[(mean - mu)^2] = variance * E[1/T]` for one arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityArmReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// Standard error of the paired per-run difference.
    pub diff_stderr: f64,
    pub z: f64,
}

/// Checks the Gaussian loss identity `E[(mean - mu)^2] = variance * E[1/T]`
/// per arm. Only defined for all-Gaussian instances under CH-AS or B-AS,
/// where the empirical mean is independent of the empirical variances that
/// drive the allocation.
pub fn gaussian_loss_identity_check(
    instance: &BanditInstance,
    params: &StrategyParams,
    n: u64,
    runs: u64,
    master_seed: u64,
) -> Result<Vec<IdentityArmReport>> {
    if !instance.all_gaussian() {
        return Err(Error::Precondition(
            "the loss identity only holds when every arm is Gaussian".into(),
        ));
    }
    if !matches!(params.kind, StrategyKind::ChAs | StrategyKind::BAs) {
        return Err(Error::Precondition(format!(
            "the loss identity check applies to ch-as and b-as, not {}",
            params.kind
        )));
    }
    if runs < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 runs, got {runs}")));
    }
    let results = run_episodes(instance, params, n, runs, master_seed, None)?;
    Ok(instance
        .variances()
        .iter()
        .enumerate()
        .map(|(arm, &var)| {
            let lhs = results.iter().map(move |r| r.sq_errors[arm]);
            let rhs = results.iter().map(move |r| var / r.pulls[arm] as f64);
            let (lhs_mean, lhs_se) = mean_and_stderr(lhs.clone());
            let (rhs_mean, rhs_se) = mean_and_stderr(rhs.clone());
            let (diff, diff_se) = mean_and_stderr(lhs.zip(rhs).map(|(l, r)| l - r));
            IdentityArmReport {
                lhs: lhs_mean,
                lhs_stderr: lhs_se,
                rhs: rhs_mean,
                rhs_stderr: rhs_se,
                diff_stderr: diff_se,
                z: diff / diff_se,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss41() -> BanditInstance {
        BanditInstance::new(vec![
            ArmSpec::gaussian(0.0, 4.0).unwrap(),
            ArmSpec::gaussian(0.0, 1.0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn oracle_pulls_exact() {
        let r = run_episode(&gauss41(), &StrategyParams::new(StrategyKind::Oracle), 1000, 1, 0).unwrap();
        assert_eq!(r.pulls, vec![800, 200]);
    }

    #[test]
    fn uniform_split() {
        let r = run_episode(&gauss41(), &StrategyParams::new(StrategyKind::Uniform), 10, 1, 0).unwrap();
        assert_eq!(r.pulls, vec![5, 5]);
    }

    #[test]
    fn pure_initialization() {
        let r = run_episode(&gauss41(), &StrategyParams::new(StrategyKind::ChAs), 4, 1, 0).unwrap();
        assert_eq!(r.pulls, vec![2, 2]);
    }

    #[test]
    fn infeasible_budget_rejected() {
        let e = run_episode(&gauss41(), &StrategyParams::new(StrategyKind::BAs), 3, 1, 0);
        assert!(matches!(e, Err(Error::InfeasibleBudget { .. })));
    }

    #[test]
    fn events_do_not_change_outcome() {
        let inst = gauss41();
        let p = StrategyParams::new(StrategyKind::BAs).with_a(0.5);
        let check = EventCheck {
            ch_delta: 1e-7,
            b_delta: 1e-7,
            b_a: 1.0,
        };
        let plain = run_episode(&inst, &p, 300, 9, 4).unwrap();
        let tracked = run_episode_with_events(&inst, &p, 300, 9, 4, check).unwrap();
        assert_eq!(plain.pulls, tracked.pulls);
        assert_eq!(plain.means, tracked.means);
        assert!(tracked.events.is_some());
    }

    #[test]
    fn identity_check_rejects_non_gaussian() {
        let inst = BanditInstance::new(vec![ArmSpec::gaussian(0.0, 4.0).unwrap(), ArmSpec::rademacher()]).unwrap();
        let e = gaussian_loss_identity_check(&inst, &StrategyParams::new(StrategyKind::BAs), 100, 10, 1);
        assert!(matches!(e, Err(Error::Precondition(_))));
        let e = gaussian_loss_identity_check(&gauss41(), &StrategyParams::new(StrategyKind::Uniform), 100, 10, 1);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn mean_and_stderr_basics() {
        let (m, se) = mean_and_stderr([1.0, 2.0, 3.0, 4.0].into_iter());
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
