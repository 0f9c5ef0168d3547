//! Equilibrium of a Dirac generator against a quadratic critic.
//!
//! A critic restricted to `x ↦ m x²` scores a Dirac at `g` against targets
//! `T` by `m (g² - E[T²])`. Unless `g² = E[T²]` the critic can drive that
//! value without bound, so the generator's equilibrium is `g* = √E[T²]`,
//! which in general is not `E[T]`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// `√(mean of squared samples)`.
pub fn quadratic_dirac_equilibrium(target_samples: &[f64]) -> Result<f64> {
    if target_samples.is_empty() {
        return Err(Error::Empty("target samples"));
    }
    let second_moment = target_samples.iter().map(|x| x * x).sum::<f64>() / target_samples.len() as f64;
    Ok(second_moment.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditReport {
    pub epsilon: f64,
    /// Arm A pays `1/2 + ε` deterministically.
    pub mean_a: f64,
    /// Arm B pays Bernoulli(1/2).
    pub mean_b: f64,
    pub equilibrium_a: f64,
    pub equilibrium_b: f64,
    pub truth_prefers_a: bool,
    pub equilibrium_prefers_b: bool,
}

impl BanditReport {
    pub fn misordered(&self) -> bool {
        self.truth_prefers_a && self.equilibrium_prefers_b
    }

    pub fn verdict(&self) -> &'static str {
        if self.misordered() {
            "equilibrium prefers arm B; truth prefers arm A"
        } else {
            "no misordering"
        }
    }
}

/// Two-armed bandit where the Dirac/quadratic equilibrium ranks the
/// risky arm above the truly better deterministic arm whenever
/// `0 < ε < 1/√2 - 1/2`.
pub fn bandit_misordering_demo(epsilon: f64) -> Result<BanditReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let arm_a = [0.5 + epsilon];
    let arm_b = [0.0, 1.0];
    let mean_a = arm_a[0];
    let mean_b = 0.5;
    let equilibrium_a = quadratic_dirac_equilibrium(&arm_a)?;
    let equilibrium_b = quadratic_dirac_equilibrium(&arm_b)?;
    debug_assert!((equilibrium_b - FRAC_1_SQRT_2).abs() < 1e-15);
    Ok(BanditReport {
        epsilon,
        mean_a,
        mean_b,
        equilibrium_a,
        equilibrium_b,
        truth_prefers_a: mean_a > mean_b,
        equilibrium_prefers_b: equilibrium_b > equilibrium_a,
    })
}
