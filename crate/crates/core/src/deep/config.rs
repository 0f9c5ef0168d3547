use std::time::Instant;

use crate::env::{EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::log::TrainLog;
use crate::nn::{CONTROL_WIDTH, TABULAR_WIDTH};
use crate::tabular::EpsilonSchedule;

/// Hyperparameters of a GAN Q-learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct GanQConfig {
    pub noise_dim: usize,
    pub batch_size: usize,
    pub n_disc: usize,
    pub n_gen: usize,
    /// Gradient-penalty coefficient.
    pub lambda: f64,
    pub alpha0: f64,
    /// Scheduler constant: `α = α0 / (1 + episode / k)`.
    pub lr_k: f64,
    /// Overrides the environment's discount when set.
    pub gamma: Option<f64>,
    /// Update steps between target-generator syncs; 0 bootstraps from the
    /// online generator.
    pub target_sync_period: usize,
    pub epsilon: EpsilonSchedule,
    pub episodes: usize,
    /// Overrides the environment's episode cap when set.
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub buffer_capacity: usize,
    pub hidden: usize,
    /// Updates begin once the buffer holds this many transitions.
    pub learning_starts: usize,
    /// Returns are divided by this inside the networks; `None` derives it
    /// from the reward range as `max|r| / (1 - γ)`.
    pub value_scale: Option<f64>,
    /// Episodes between W1 diagnostics on tabular environments; 0 disables.
    pub diag_every: usize,
    pub diag_samples: usize,
    /// Clamp bootstrapped targets to the range of achievable returns.
    pub clip_targets: bool,
    /// Stop early once the mean reward of the last `window` episodes
    /// reaches `threshold`.
    pub stop_at: Option<(usize, f64)>,
    /// Wall-clock cutoff checked between episodes. Leave unset for
    /// reproducible runs.
    pub deadline: Option<Instant>,
}

impl GanQConfig {
    pub fn preset(kind: EnvKind) -> Self {
        let tabular = kind.is_tabular();
        GanQConfig {
            noise_dim: if tabular { 2 } else { 16 },
            batch_size: 32,
            n_disc: 5,
            n_gen: 1,
            lambda: 0.1,
            alpha0: match kind {
                EnvKind::TwoState => 1e-4,
                EnvKind::TwoGoalChain | EnvKind::Gridworld => 3e-4,
                EnvKind::CartPole | EnvKind::Acrobot => 1e-3,
            },
            lr_k: if kind == EnvKind::CartPole { 200.0 } else { 500.0 },
            gamma: None,
            target_sync_period: 100,
            epsilon: EpsilonSchedule::default(),
            episodes: if tabular { 300 } else { 1000 },
            max_steps: None,
            seed: 0,
            buffer_capacity: 100_000,
            hidden: if tabular { TABULAR_WIDTH } else { CONTROL_WIDTH },
            learning_starts: 32,
            value_scale: None,
            diag_every: if tabular { 10 } else { 0 },
            diag_samples: 200,
            // off on two-state: Q*(s0, stay) sits exactly on the bound, and
            // clamping there flattens both actions to the same ceiling
            clip_targets: kind != EnvKind::TwoState,
            stop_at: None,
            deadline: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.n_disc == 0 || self.n_gen == 0 {
            return bad("n_disc and n_gen must be at least 1");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be nonnegative");
        }
        if !(self.alpha0 > 0.0) || !(self.lr_k > 0.0) {
            return bad("alpha0 and lr_k must be positive");
        }
        if self.noise_dim == 0 || self.hidden == 0 || self.buffer_capacity == 0 {
            return bad("noise_dim, hidden and buffer_capacity must be positive");
        }
        if self.value_scale.is_some_and(|c| !(c > 0.0)) {
            return bad("value_scale must be positive");
        }
        if self.diag_every > 0 && self.diag_samples == 0 {
            return bad("diag_samples must be positive");
        }
        self.epsilon.validate()
    }
}

/// Hyperparameters of the DQN baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub batch_size: usize,
    pub alpha0: f64,
    pub lr_k: f64,
    pub gamma: Option<f64>,
    pub target_sync_period: usize,
    pub epsilon: EpsilonSchedule,
    pub episodes: usize,
    pub max_steps: Option<usize>,
    pub seed: u64,
    pub buffer_capacity: usize,
    pub hidden: usize,
    pub learning_starts: usize,
    pub value_scale: Option<f64>,
    pub stop_at: Option<(usize, f64)>,
    pub deadline: Option<Instant>,
}

impl DqnConfig {
    pub fn preset(kind: EnvKind) -> Self {
        let g = GanQConfig::preset(kind);
        DqnConfig {
            batch_size: g.batch_size,
            alpha0: g.alpha0,
            lr_k: g.lr_k,
            gamma: None,
            target_sync_period: g.target_sync_period,
            epsilon: g.epsilon,
            episodes: g.episodes,
            max_steps: None,
            seed: 0,
            buffer_capacity: g.buffer_capacity,
            hidden: g.hidden,
            learning_starts: g.learning_starts,
            value_scale: None,
            stop_at: None,
            deadline: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.hidden == 0 || self.buffer_capacity == 0 {
            return Err(Error::Config("batch_size, hidden and buffer_capacity must be positive".into()));
        }
        if !(self.alpha0 > 0.0) || !(self.lr_k > 0.0) {
            return Err(Error::Config("alpha0 and lr_k must be positive".into()));
        }
        if self.value_scale.is_some_and(|c| !(c > 0.0)) {
            return Err(Error::Config("value_scale must be positive".into()));
        }
        self.epsilon.validate()
    }
}

pub(crate) fn should_stop(log: &TrainLog, stop_at: Option<(usize, f64)>, deadline: Option<Instant>) -> bool {
    stop_at.is_some_and(|(window, threshold)| log.rows.len() >= window && log.trailing_mean(window) >= threshold)
        || deadline.is_some_and(|d| Instant::now() >= d)
}

/// Spec with discount and cap overrides applied.
pub(crate) fn effective_spec(spec: EnvSpec, gamma: Option<f64>, max_steps: Option<usize>) -> EnvSpec {
    EnvSpec {
        gamma: gamma.unwrap_or(spec.gamma),
        max_steps: max_steps.unwrap_or(spec.max_steps),
        ..spec
    }
}

/// Discounted returns of any episode, including ones cut short by a
/// terminal state, lie in `[min(r_min, 0), max(r_max, 0)] / (1 - γ)`.
pub(crate) fn return_bounds(reward_range: (f64, f64), gamma: f64) -> (f64, f64) {
    (reward_range.0.min(0.0) / (1.0 - gamma), reward_range.1.max(0.0) / (1.0 - gamma))
}

/// `max|r| / (1 - γ)`, the largest achievable |return|.
pub(crate) fn default_value_scale(reward_range: (f64, f64), gamma: f64) -> f64 {
    let m = reward_range.0.abs().max(reward_range.1.abs());
    if m == 0.0 {
        1.0
    } else {
        m / (1.0 - gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn return_bounds_include_cut_short_episodes() {
        let (lo, hi) = return_bounds((-10.0, 20.0), 0.95);
        assert!((lo + 200.0).abs() < 1e-9 && (hi - 400.0).abs() < 1e-9);
        // +1 per step still allows a return of 1 when the pole falls at once
        let (lo, hi) = return_bounds((1.0, 1.0), 0.99);
        assert!(lo == 0.0 && (hi - 100.0).abs() < 1e-9);
    }

    #[test]
    fn presets_validate() {
        for kind in EnvKind::ALL {
            GanQConfig::preset(kind).validate().unwrap();
            DqnConfig::preset(kind).validate().unwrap();
        }
    }
}
