//! Episodic environments: three tabular MDPs and two classic-control tasks.

mod acrobot;
mod cartpole;
mod tabular;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use tabular::{chain_mdp, gridworld_mdp, two_state_mdp, GRID_GOAL, GRID_START, CHAIN_START};

use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::rng::{stream, stream_rng, Prng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EnvKind {
    TwoState,
    TwoGoalChain,
    Gridworld,
    CartPole,
    Acrobot,
}

impl EnvKind {
    pub const ALL: [EnvKind; 5] =
        [EnvKind::TwoState, EnvKind::TwoGoalChain, EnvKind::Gridworld, EnvKind::CartPole, EnvKind::Acrobot];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::TwoState => "two-state",
            EnvKind::TwoGoalChain => "2g-chain",
            EnvKind::Gridworld => "gridworld",
            EnvKind::CartPole => "cartpole",
            EnvKind::Acrobot => "acrobot",
        }
    }

    pub fn is_tabular(self) -> bool {
        matches!(self, EnvKind::TwoState | EnvKind::TwoGoalChain | EnvKind::Gridworld)
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownEnv(s.to_string()))
    }
}

/// Environment kind with its discount and episode cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub gamma: f64,
    pub max_steps: usize,
}

impl EnvSpec {
    pub fn preset(kind: EnvKind) -> Self {
        let (gamma, max_steps) = match kind {
            EnvKind::TwoState => (0.95, 25),
            EnvKind::TwoGoalChain => (0.6, 50),
            EnvKind::Gridworld => (0.9, 100),
            EnvKind::CartPole => (0.99, 200),
            EnvKind::Acrobot => (0.99, 500),
        };
        EnvSpec { kind, gamma, max_steps }
    }

    pub fn named(name: &str) -> Result<Self> {
        Ok(Self::preset(name.parse()?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0,1)", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub features: Vec<f64>,
    /// Present iff the environment is tabular.
    pub state_id: Option<usize>,
}

impl Observation {
    pub fn one_hot(state: usize, n: usize) -> Self {
        let mut features = vec![0.0; n];
        features[state] = 1.0;
        Observation { features, state_id: Some(state) }
    }
}

/// Result of a single environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub obs: Observation,
    pub reward: f64,
    /// The environment reached a terminal state.
    pub terminal: bool,
    /// The episode hit `max_steps` without terminating.
    pub truncated: bool,
}

impl Step {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// One experience record. `terminal` marks true termination only; truncated
/// steps are stored as non-terminal so their targets still bootstrap.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Observation,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
enum Model {
    Tabular { mdp: TabularMdp, obs_dim: usize, state: usize },
    CartPole(CartPole),
    Acrobot(Acrobot),
}

/// A seeded episodic environment.
#[derive(Debug, Clone)]
pub struct Environment {
    spec: EnvSpec,
    model: Model,
    rng: Prng,
    t: usize,
    active: bool,
}

/// Builds an environment honoring the spec's discount and episode cap.
pub fn build_env(spec: EnvSpec, seed: u64) -> Result<Environment> {
    spec.validate()?;
    let model = match spec.kind {
        EnvKind::TwoState => tabular_model(two_state_mdp(spec.gamma)?, 2),
        EnvKind::TwoGoalChain => tabular_model(chain_mdp(spec.gamma)?, 10),
        EnvKind::Gridworld => tabular_model(gridworld_mdp(spec.gamma)?, 16),
        EnvKind::CartPole => Model::CartPole(CartPole::default()),
        EnvKind::Acrobot => Model::Acrobot(Acrobot::default()),
    };
    Ok(Environment { spec, model, rng: stream_rng(seed, stream::ENV), t: 0, active: false })
}

fn tabular_model(mdp: TabularMdp, obs_dim: usize) -> Model {
    let state = mdp.initial_states[0];
    Model::Tabular { mdp, obs_dim, state }
}

impl Environment {
    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn kind(&self) -> EnvKind {
        self.spec.kind
    }

    pub fn gamma(&self) -> f64 {
        self.spec.gamma
    }

    pub fn max_steps(&self) -> usize {
        self.spec.max_steps
    }

    pub fn n_actions(&self) -> usize {
        match &self.model {
            Model::Tabular { mdp, .. } => mdp.n_actions,
            Model::CartPole(_) => 2,
            Model::Acrobot(_) => 3,
        }
    }

    /// Number of observable states for tabular kinds.
    pub fn n_states(&self) -> Option<usize> {
        match &self.model {
            Model::Tabular { obs_dim, .. } => Some(*obs_dim),
            _ => None,
        }
    }

    pub fn obs_dim(&self) -> usize {
        match &self.model {
            Model::Tabular { obs_dim, .. } => *obs_dim,
            Model::CartPole(_) => 4,
            Model::Acrobot(_) => 6,
        }
    }

    /// Current index into the exported MDP (tabular kinds only).
    pub fn state_index(&self) -> Option<usize> {
        match &self.model {
            Model::Tabular { state, .. } => Some(*state),
            _ => None,
        }
    }

    pub fn steps_taken(&self) -> usize {
        self.t
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Bounds on a single reward, used for value scaling.
    pub fn reward_range(&self) -> (f64, f64) {
        match &self.model {
            Model::Tabular { mdp, .. } => mdp.reward_range(),
            Model::CartPole(_) => (0.0, 1.0),
            Model::Acrobot(_) => (-1.0, 0.0),
        }
    }

    pub fn reset(&mut self) -> Observation {
        self.t = 0;
        self.active = true;
        match &mut self.model {
            Model::Tabular { mdp, obs_dim, state } => {
                let i = if mdp.initial_states.len() == 1 {
                    0
                } else {
                    self.rng.random_range(0..mdp.initial_states.len())
                };
                *state = mdp.initial_states[i];
                Observation::one_hot(*state, *obs_dim)
            }
            Model::CartPole(c) => c.reset(&mut self.rng),
            Model::Acrobot(a) => a.reset(&mut self.rng),
        }
    }

    /// Starts an episode from a chosen non-terminal tabular state.
    pub fn reset_to(&mut self, s: usize) -> Result<Observation> {
        let name = self.spec.kind.name();
        match &mut self.model {
            Model::Tabular { mdp, obs_dim, state } => {
                if s >= *obs_dim || mdp.is_terminal(s) {
                    return Err(Error::InvalidArgument(format!("state {s} is not a start candidate")));
                }
                *state = s;
                self.t = 0;
                self.active = true;
                Ok(Observation::one_hot(s, *obs_dim))
            }
            _ => Err(Error::NotTabular(name.to_string())),
        }
    }

    pub fn step(&mut self, action: usize) -> Result<Step> {
        if !self.active {
            return Err(Error::EpisodeFinished);
        }
        let n_actions = self.n_actions();
        if action >= n_actions {
            return Err(Error::ActionOutOfRange { action, n_actions });
        }
        let (obs, reward, terminal) = match &mut self.model {
            Model::Tabular { mdp, obs_dim, state } => {
                let prev = *state;
                let next = mdp.sample_next(prev, action, &mut self.rng);
                let reward = mdp.r(prev, action);
                *state = next;
                // an unobservable sink reports the state it was entered from
                let shown = if next < *obs_dim { next } else { prev };
                (Observation::one_hot(shown, *obs_dim), reward, mdp.is_terminal(next))
            }
            Model::CartPole(c) => c.step(action),
            Model::Acrobot(a) => a.step(action),
        };
        self.t += 1;
        let truncated = !terminal && self.t >= self.spec.max_steps;
        if terminal || truncated {
            self.active = false;
        }
        Ok(Step { obs, reward, terminal, truncated })
    }

    /// Exact dynamics consistent with [`Environment::step`].
    pub fn tabular_dynamics(&self) -> Result<TabularMdp> {
        match &self.model {
            Model::Tabular { mdp, .. } => Ok(mdp.clone()),
            _ => Err(Error::NotTabular(self.spec.kind.name().to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(kind: EnvKind) -> Environment {
        build_env(EnvSpec::preset(kind), 0).unwrap()
    }

    #[test]
    fn presets_match_published_settings() {
        let p = EnvSpec::preset(EnvKind::TwoState);
        assert_eq!((p.gamma, p.max_steps), (0.95, 25));
        let p = EnvSpec::preset(EnvKind::TwoGoalChain);
        assert_eq!((p.gamma, p.max_steps), (0.6, 50));
        let p = EnvSpec::preset(EnvKind::Gridworld);
        assert_eq!((p.gamma, p.max_steps), (0.9, 100));
        assert_eq!(EnvSpec::preset(EnvKind::CartPole).max_steps, 200);
        assert_eq!(EnvSpec::preset(EnvKind::Acrobot).max_steps, 500);
    }

    #[test]
    fn names_round_trip() {
        for k in EnvKind::ALL {
            assert_eq!(k.name().parse::<EnvKind>().unwrap(), k);
        }
        assert!(matches!("pong".parse::<EnvKind>(), Err(Error::UnknownEnv(_))));
    }

    #[test]
    fn rejects_zero_max_steps() {
        let mut spec = EnvSpec::preset(EnvKind::TwoState);
        spec.max_steps = 0;
        assert!(build_env(spec, 0).is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(env(EnvKind::TwoState).n_actions(), 2);
        assert_eq!(env(EnvKind::TwoGoalChain).n_states(), Some(10));
        assert_eq!(env(EnvKind::Gridworld).n_states(), Some(16));
        assert_eq!(env(EnvKind::CartPole).obs_dim(), 4);
        assert_eq!(env(EnvKind::Acrobot).obs_dim(), 6);
    }

    #[test]
    fn resets() {
        assert_eq!(env(EnvKind::TwoState).reset().features, vec![1.0, 0.0]);
        assert_eq!(env(EnvKind::TwoGoalChain).reset().state_id, Some(5));
        let mut g = env(EnvKind::Gridworld);
        let a = g.reset();
        let b = g.reset();
        assert_eq!(a, b);
        assert_eq!(a.state_id, Some(GRID_START));
    }

    #[test]
    fn two_state_rewards() {
        let mut e = env(EnvKind::TwoState);
        e.reset();
        let s = e.step(0).unwrap();
        assert_eq!((s.obs.state_id, s.reward, s.terminal), (Some(0), 20.0, false));
        let s = e.step(1).unwrap();
        assert_eq!((s.obs.state_id, s.reward), (Some(1), -10.0));
        let s = e.step(1).unwrap();
        assert_eq!((s.obs.state_id, s.reward, s.terminal), (Some(0), -2.0, false));
    }

    #[test]
    fn gridworld_wall_bump_costs_one() {
        let mut e = env(EnvKind::Gridworld);
        let start = e.reset();
        let s = e.step(0).unwrap(); // up, into the wall
        assert_eq!(s.obs, start);
        assert_eq!(s.reward, -1.0);
        assert!(!s.terminal);
    }

    #[test]
    fn chain_goal_stay_terminates_with_one() {
        let mut e = env(EnvKind::TwoGoalChain);
        e.reset();
        for _ in 0..4 {
            let s = e.step(1).unwrap();
            assert_eq!(s.reward, 0.0);
        }
        let s = e.step(1).unwrap();
        assert_eq!((s.reward, s.terminal), (1.0, true));
        assert_eq!(s.obs.state_id, Some(9));
        assert!(matches!(e.step(0), Err(Error::EpisodeFinished)));
    }

    #[test]
    fn errors() {
        let mut e = env(EnvKind::TwoState);
        assert!(matches!(e.step(0), Err(Error::EpisodeFinished)));
        e.reset();
        assert!(matches!(e.step(2), Err(Error::ActionOutOfRange { .. })));
        assert!(env(EnvKind::CartPole).tabular_dynamics().is_err());
    }

    #[test]
    fn truncation_at_cap() {
        let mut e = env(EnvKind::TwoState);
        e.reset();
        for t in 1..=25 {
            let s = e.step(0).unwrap();
            assert_eq!(s.truncated, t == 25);
            assert!(!s.terminal);
        }
        assert!(e.step(0).is_err());
    }

    #[test]
    fn one_hot_invariant() {
        for k in [EnvKind::TwoState, EnvKind::TwoGoalChain, EnvKind::Gridworld] {
            let o = env(k).reset();
            assert_eq!(o.features.iter().sum::<f64>(), 1.0);
            assert_eq!(o.features.iter().filter(|&&x| x != 0.0).count(), 1);
        }
    }
}
