//! Built-in experiment presets.
//!
//! - `fig3-left`: arms N(0,4) and N(0,1); CH-AS, B-AS and GAFS-MAX over
//!   budgets {100, 200, 500, 1000, 2000, 5000}.
//! - `fig3-right-gauss`: B-AS at n = 1000 on N(0, s) and N(0, 1) for
//!   s in {1, 4, 9, 16, 25}, one spec per s.
//! - `fig3-right-rademacher`: as above with a Rademacher second arm.

use alloc_bandit::{ArmSpec, BanditInstance, StrategyKind, StrategyParams};
use thiserror::Error;

use crate::config::{ExperimentSpec, DEFAULT_RUNS};

pub const PRESET_NAMES: &[&str] = &["fig3-left", "fig3-right-gauss", "fig3-right-rademacher"];

pub const FIG3_LEFT_BUDGETS: &[u64] = &[100, 200, 500, 1000, 2000, 5000];
pub const FIG3_RIGHT_BUDGET: u64 = 1000;
pub const FIG3_RIGHT_VARIANCES: &[f64] = &[1.0, 4.0, 9.0, 16.0, 25.0];

/// Exploration constant B-AS uses in the presets.
///
/// The theory-sized `a` (tens at these budgets) makes B-AS pull almost
/// uniformly at every budget considered, so the presets fix a small value.
pub const PRESET_BAS_A: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
#[error("unknown preset `{0}` (expected one of: fig3-left, fig3-right-gauss, fig3-right-rademacher)")]
pub struct UnknownPreset(pub String);

pub fn preset_bas() -> StrategyParams {
    StrategyParams::new(StrategyKind::BAs).with_a(PRESET_BAS_A)
}

fn gaussian(var: f64) -> ArmSpec {
    ArmSpec::gaussian(0.0, var).expect("preset variances are positive")
}

fn base(instance: BanditInstance, strategies: Vec<StrategyParams>, n_grid: Vec<u64>) -> ExperimentSpec {
    ExperimentSpec {
        instance,
        sigma_bar: None,
        strategies,
        n_grid,
        runs: DEFAULT_RUNS,
        master_seed: None,
        out: None,
        bounds_out: None,
        check_events: false,
        emit_bounds: false,
    }
}

/// The specs making up preset `name`, in output order.
pub fn preset(name: &str) -> Result<Vec<ExperimentSpec>, UnknownPreset> {
    match name {
        "fig3-left" => {
            let instance = BanditInstance::new(vec![gaussian(4.0), gaussian(1.0)]).expect("valid instance");
            Ok(vec![base(
                instance,
                vec![
                    StrategyParams::new(StrategyKind::ChAs),
                    preset_bas(),
                    StrategyParams::new(StrategyKind::GafsMax),
                ],
                FIG3_LEFT_BUDGETS.to_vec(),
            )])
        }
        "fig3-right-gauss" | "fig3-right-rademacher" => {
            let rademacher = name.ends_with("rademacher");
            Ok(FIG3_RIGHT_VARIANCES
                .iter()
                .map(|&v| {
                    let second = if rademacher { ArmSpec::rademacher() } else { gaussian(1.0) };
                    let instance = BanditInstance::new(vec![gaussian(v), second]).expect("valid instance");
                    base(instance, vec![preset_bas()], vec![FIG3_RIGHT_BUDGET])
                })
                .collect())
        }
        other => Err(UnknownPreset(other.to_string())),
    }
}
