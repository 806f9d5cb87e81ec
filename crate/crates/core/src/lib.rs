//! Adaptive sample allocation for estimating the means of several
//! distributions uniformly well under a fixed budget.
//!
//! The crate provides the CH-AS and B-AS upper-confidence-bound allocation
//! strategies together with baselines, incremental variance estimators, the
//! closed-form guarantees of both strategies, and a Monte-Carlo harness that
//! measures loss and regret against the optimal static allocation.
//!
//! ```
//! use alloc_bandit::{monte_carlo, ArmSpec, BanditInstance, StrategyKind, StrategyParams};
//!
//! let instance = BanditInstance::new(vec![
//!     ArmSpec::gaussian(0.0, 4.0).unwrap(),
//!     ArmSpec::gaussian(0.0, 1.0).unwrap(),
//! ])
//! .unwrap();
//! let stats = monte_carlo(&instance, &StrategyParams::new(StrategyKind::Oracle), 100, 50, 7).unwrap();
//! assert_eq!(stats.mean_pulls, vec![80.0, 20.0]);
//! ```

pub mod bounds;
pub mod dists;
pub mod error;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod strategies;

pub use bounds::{
    b_event_holds, bas_pull_bounds, bas_regret_bound, bound_report, ch_event_holds,
    ch_pull_deviation_bound, ch_regret_bound, gaussian_regret_bound, BoundFlag, BoundRow,
    InstanceSummary,
};
pub use dists::{ArmKind, ArmSpec};
pub use error::{Error, Result};
pub use harness::{
    aggregate, gaussian_loss_identity_check, monte_carlo, run_episode, run_episode_with_events,
    run_episodes, with_workers, AggregateStats, BanditInstance, EpisodeResult, EventCheck,
    EventOutcome, IdentityArmReport,
};
pub use rng::{derive_seed, RngState};
pub use stats::RunningStats;
pub use strategies::{
    b_index, ch_index, compute_a, optimal_static_allocation, AFormula, ResolvedParams,
    StrategyKind, StrategyParams, StrategyState,
};
