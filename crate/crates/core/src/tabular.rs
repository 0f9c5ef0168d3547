//! Tabular Q-learning and distributional (mixture-update) Q-learning.

use rand::Rng;

use crate::env::{build_env, EnvSpec, Transition};
use crate::error::{Error, Result};
use crate::log::{EpisodeRecord, TrainLog};
use crate::rng::{stream, stream_rng};
use crate::solvers::{project_onto, solve_optimal, support_for, ValueDistTable};

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Linear ε decay over the leading fraction of episodes, then constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 1.0, end: 0.05, decay_fraction: 0.2 }
    }
}

impl EpsilonSchedule {
    pub fn constant(eps: f64) -> Self {
        EpsilonSchedule { start: eps, end: eps, decay_fraction: 0.0 }
    }

    pub fn value(&self, episode: usize, total_episodes: usize) -> f64 {
        let horizon = self.decay_fraction * total_episodes as f64;
        if horizon <= 0.0 || episode as f64 >= horizon {
            return self.end;
        }
        let frac = episode as f64 / horizon;
        self.start + (self.end - self.start) * frac
    }

    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.start) || !unit.contains(&self.end) || !unit.contains(&self.decay_fraction) {
            return Err(Error::Config("epsilon schedule values must lie in [0,1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    pub n_states: usize,
    pub n_actions: usize,
    q: Vec<f64>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        QTable { n_states, n_actions, q: vec![0.0; n_states * n_actions] }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.q[s * self.n_actions + a] = v;
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }
}

/// Tables that expose per-action values for a state.
pub trait ActionValues {
    fn action_values(&self, s: usize) -> Vec<f64>;
}

impl ActionValues for QTable {
    fn action_values(&self, s: usize) -> Vec<f64> {
        self.row(s).to_vec()
    }
}

impl ActionValues for ValueDistTable {
    fn action_values(&self, s: usize) -> Vec<f64> {
        self.means(s)
    }
}

/// Greedy action by (expected) value; ties to the lowest index.
pub fn greedy_action<T: ActionValues + ?Sized>(values: &T, s: usize) -> usize {
    argmax(&values.action_values(s))
}

fn ids(t: &Transition) -> (usize, usize) {
    let s = t.obs.state_id.expect("tabular observation");
    let s2 = t.next_obs.state_id.expect("tabular observation");
    (s, s2)
}

/// Watkins update toward `r` (terminal) or `r + γ max_a' q(s',a')`.
pub fn q_learning_update(q: &mut QTable, t: &Transition, alpha: f64, gamma: f64) {
    let (s, s2) = ids(t);
    let target = if t.terminal {
        t.reward
    } else {
        t.reward + gamma * q.row(s2).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let old = q.get(s, t.action);
    q.set(s, t.action, old + alpha * (target - old));
}

/// Mixture update `Z(s,a) ← (1-α) Z(s,a) + α Π(r + γ Z(s', a*))`, with `a*`
/// greedy in expectation and a Dirac at `r` for terminal transitions.
pub fn dq_learning_update(z: &mut ValueDistTable, t: &Transition, alpha: f64, gamma: f64) -> Result<()> {
    let (s, s2) = ids(t);
    let mass: f64 = z.probs(s, t.action).iter().sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(mass));
    }
    let support = z.support().to_vec();
    let mut target = vec![0.0; support.len()];
    if t.terminal {
        project_onto(&support, t.reward, 1.0, &mut target);
    } else {
        let best = greedy_action(z, s2);
        for (&atom, &p) in support.iter().zip(z.probs(s2, best)) {
            if p != 0.0 {
                project_onto(&support, t.reward + gamma * atom, p, &mut target);
            }
        }
    }
    let cell = z.probs_mut(s, t.action);
    for (c, tgt) in cell.iter_mut().zip(&target) {
        *c = (1.0 - alpha) * *c + alpha * tgt;
    }
    let total: f64 = cell.iter().sum();
    cell.iter_mut().for_each(|c| *c /= total);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabularKind {
    Q,
    Dq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularAgentConfig {
    pub alpha: f64,
    /// Overrides the environment's discount when set.
    pub gamma: Option<f64>,
    pub epsilon: EpsilonSchedule,
    pub episodes: usize,
    pub n_atoms: usize,
    pub seed: u64,
}

impl Default for TabularAgentConfig {
    fn default() -> Self {
        TabularAgentConfig {
            alpha: 0.1,
            gamma: None,
            epsilon: EpsilonSchedule::default(),
            episodes: 300,
            n_atoms: 51,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TabularValues {
    Q(QTable),
    Dist(ValueDistTable),
}

impl TabularValues {
    pub fn expected(&self, s: usize) -> Vec<f64> {
        match self {
            TabularValues::Q(q) => q.action_values(s),
            TabularValues::Dist(z) => z.action_values(s),
        }
    }

    pub fn greedy(&self, s: usize) -> usize {
        argmax(&self.expected(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabularRun {
    pub log: TrainLog,
    pub values: TabularValues,
    /// `max |q - Q*|` over observable non-terminal states after each episode.
    pub q_error: Vec<f64>,
}

/// Trains a tabular agent with ε-greedy behavior and per-step updates.
pub fn run_tabular(spec: EnvSpec, config: &TabularAgentConfig, kind: TabularKind) -> Result<TabularRun> {
    if !spec.kind.is_tabular() {
        return Err(Error::NotTabular(spec.kind.name().to_string()));
    }
    config.epsilon.validate()?;
    if !(config.alpha >= 0.0 && config.alpha <= 1.0) {
        return Err(Error::Config(format!("alpha {} outside [0,1]", config.alpha)));
    }
    let mut env = build_env(spec, config.seed)?;
    let gamma = config.gamma.unwrap_or(spec.gamma);
    let mut mdp = env.tabular_dynamics()?;
    mdp.gamma = gamma;
    let optimum = solve_optimal(&mdp)?;
    let n_obs = env.n_states().expect("tabular");
    let n_actions = env.n_actions();
    let mut values = match kind {
        TabularKind::Q => TabularValues::Q(QTable::zeros(mdp.n_states, n_actions)),
        TabularKind::Dq => {
            let (lo, hi) = mdp.reward_range();
            let support = support_for(lo, hi, gamma, config.n_atoms);
            TabularValues::Dist(ValueDistTable::constant(mdp.n_states, n_actions, support, 0.0)?)
        }
    };
    let mut rng = stream_rng(config.seed, stream::AGENT);
    let mut log = TrainLog::new(config.seed);
    let mut q_error = Vec::with_capacity(config.episodes);
    for episode in 0..config.episodes {
        let eps = config.epsilon.value(episode, config.episodes);
        let mut obs = env.reset();
        let (mut total, mut steps) = (0.0, 0);
        let truncated = loop {
            let s = obs.state_id.expect("tabular");
            let explore = rng.random::<f64>() < eps;
            let action = if explore { rng.random_range(0..n_actions) } else { values.greedy(s) };
            let step = env.step(action)?;
            let t = Transition {
                obs,
                action,
                reward: step.reward,
                next_obs: step.obs.clone(),
                terminal: step.terminal,
            };
            match &mut values {
                TabularValues::Q(q) => q_learning_update(q, &t, config.alpha, gamma),
                TabularValues::Dist(z) => dq_learning_update(z, &t, config.alpha, gamma)?,
            }
            total += step.reward;
            steps += 1;
            obs = step.obs;
            if step.terminal || step.truncated {
                break step.truncated;
            }
        };
        let err = (0..n_obs)
            .filter(|&s| !mdp.is_terminal(s))
            .flat_map(|s| {
                let v = values.expected(s);
                let q = &optimum.q[s];
                v.into_iter().zip(q.clone()).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        q_error.push(err);
        log.rows.push(EpisodeRecord {
            seed: config.seed,
            episode,
            reward: total,
            steps,
            epsilon: eps,
            alpha: config.alpha,
            w1_diag: None,
            truncated,
        });
    }
    Ok(TabularRun { log, values, q_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{EnvKind, Observation};

    fn tr(s: usize, a: usize, r: f64, s2: usize, terminal: bool) -> Transition {
        Transition {
            obs: Observation::one_hot(s, 2),
            action: a,
            reward: r,
            next_obs: Observation::one_hot(s2, 2),
            terminal,
        }
    }

    #[test]
    fn q_update_arithmetic() {
        let mut q = QTable::zeros(2, 2);
        q_learning_update(&mut q, &tr(0, 0, 20.0, 0, false), 0.1, 0.95);
        assert!((q.get(0, 0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn terminal_target_is_reward() {
        let mut q = QTable::zeros(2, 2);
        q.set(1, 0, 100.0);
        q_learning_update(&mut q, &tr(0, 1, 3.0, 1, true), 1.0, 0.9);
        assert_eq!(q.get(0, 1), 3.0);
    }

    #[test]
    fn full_step_is_backup() {
        let mut q = QTable::zeros(2, 2);
        q.set(1, 1, 4.0);
        q_learning_update(&mut q, &tr(0, 1, -10.0, 1, false), 1.0, 0.5);
        assert_eq!(q.get(0, 1), -8.0);
    }

    #[test]
    fn greedy_ties_to_lowest() {
        assert_eq!(argmax(&[1.0, 0.0]), 0);
        assert_eq!(argmax(&[2.0, 2.0]), 0);
        assert_eq!(argmax(&[-1.0, 3.0, 3.0]), 1);
    }

    #[test]
    fn dq_endpoints() {
        let support = support_for(-10.0, 20.0, 0.95, 51);
        let mut z = ValueDistTable::constant(2, 2, support.clone(), 0.0).unwrap();
        let before = z.clone();
        dq_learning_update(&mut z, &tr(0, 0, 5.0, 1, false), 0.0, 0.95).unwrap();
        assert_eq!(z, before);
        dq_learning_update(&mut z, &tr(0, 0, 20.0, 1, true), 1.0, 0.95).unwrap();
        let mut want = vec![0.0; support.len()];
        project_onto(&support, 20.0, 1.0, &mut want);
        for (a, b) in z.probs(0, 0).iter().zip(&want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn schedule_shape() {
        let e = EpsilonSchedule::default();
        assert_eq!(e.value(0, 300), 1.0);
        assert!((e.value(30, 300) - 0.525).abs() < 1e-12);
        assert_eq!(e.value(60, 300), 0.05);
        assert_eq!(e.value(299, 300), 0.05);
    }

    #[test]
    fn rejects_control_envs() {
        let spec = EnvSpec::preset(EnvKind::CartPole);
        assert!(run_tabular(spec, &TabularAgentConfig::default(), TabularKind::Q).is_err());
    }
}
