//! Shared fixtures for the criterion benchmarks.

use alloc_bandit::{ArmSpec, BanditInstance};

/// Two Gaussian arms with variances 4 and 1.
pub fn two_gaussians() -> BanditInstance {
    BanditInstance::new(vec![
        ArmSpec::gaussian(0.0, 4.0).expect("valid arm"),
        ArmSpec::gaussian(0.0, 1.0).expect("valid arm"),
    ])
    .expect("valid instance")
}
