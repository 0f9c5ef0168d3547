//! Flat `key = value` run configuration with per-environment sections.
//!
//! ```text
//! env = cartpole
//! agent = gan-dqn
//! seeds = 0, 1, 2
//! episodes = 500
//!
//! [acrobot]
//! episodes = 800
//! ```
//!
//! Top-level keys apply to every environment; a `[name]` section overrides
//! them when `env = name`. Unknown keys, duplicates and malformed lines are
//! rejected with their line number.

use std::collections::BTreeMap;
use std::fmt::{self, Display, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::deep::{DqnConfig, GanQConfig};
use crate::env::{EnvKind, EnvSpec};
use crate::error::{Error, Result};
use crate::tabular::{EpsilonSchedule, TabularAgentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentKind {
    Q,
    Dq,
    Dqn,
    GanDqn,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [AgentKind::Q, AgentKind::Dq, AgentKind::Dqn, AgentKind::GanDqn];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Q => "q",
            AgentKind::Dq => "dq",
            AgentKind::Dqn => "dqn",
            AgentKind::GanDqn => "gan-dqn",
        }
    }

    pub fn is_tabular(self) -> bool {
        matches!(self, AgentKind::Q | AgentKind::Dq)
    }
}

impl Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown agent {s:?}; expected q, dq, dqn or gan-dqn")))
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

macro_rules! overrides {
    ($($(#[doc = $doc:literal])* $name:ident: $ty:ty,)*) => {
        /// Agent and environment settings. `None` keeps the preset for the
        /// chosen environment and agent.
        #[derive(Debug, Clone, Default, PartialEq)]
        pub struct Overrides {
            $($(#[doc = $doc])* pub $name: Option<$ty>,)*
        }

        impl Overrides {
            pub const KEYS: &'static [&'static str] = &[$(stringify!($name)),*];

            /// Returns `Ok(false)` for keys this struct does not own.
            fn set(&mut self, key: &str, value: &str) -> Result<bool> {
                match key {
                    $(stringify!($name) => {
                        if self.$name.is_some() {
                            return Err(Error::Config(format!("duplicate key {key}")));
                        }
                        self.$name = Some(parse_value(key, value)?);
                        Ok(true)
                    })*
                    _ => Ok(false),
                }
            }

            fn write(&self, out: &mut String) {
                $(if let Some(v) = &self.$name {
                    writeln!(out, "{} = {}", stringify!($name), v).expect("string write");
                })*
            }

            /// `self` with every field set in `other` replaced.
            pub fn merged(&self, other: &Overrides) -> Overrides {
                Overrides { $($name: other.$name.clone().or_else(|| self.$name.clone()),)* }
            }
        }
    };
}

overrides! {
    /// Episodes per seed. Preset: 300 tabular, 1000 control.
    episodes: usize,
    /// Discount. Preset: the environment's.
    gamma: f64,
    /// Episode cap. Preset: the environment's.
    max_steps: usize,
    /// Tabular step size. Preset: 0.1.
    alpha: f64,
    /// ε at the first episode. Preset: 1.0.
    epsilon_start: f64,
    /// ε after the decay window. Preset: 0.05.
    epsilon_end: f64,
    /// Fraction of episodes over which ε decays linearly. Preset: 0.2.
    epsilon_decay: f64,
    /// Categorical atoms for dQ-learning. Preset: 51.
    n_atoms: usize,
    /// Generator noise width. Preset: 8 tabular, 16 control.
    noise_dim: usize,
    /// Minibatch size. Preset: 32.
    batch_size: usize,
    /// Critic updates per step. Preset: 5.
    n_disc: usize,
    /// Generator updates per step. Preset: 1.
    n_gen: usize,
    /// Gradient-penalty coefficient. Preset: 0.1.
    lambda: f64,
    /// Initial network learning rate. Preset: 1e-3.
    alpha0: f64,
    /// Learning-rate decay constant in episodes. Preset: 200 cartpole, 500 otherwise.
    lr_k: f64,
    /// Update steps between target syncs; 0 disables the target network. Preset: 100.
    target_sync_period: usize,
    /// Replay capacity. Preset: 100000.
    buffer_capacity: usize,
    /// Hidden width. Preset: 64 tabular, 128 control.
    hidden: usize,
    /// Transitions stored before updates begin. Preset: 32.
    learning_starts: usize,
    /// Value normalizer. Preset: max|r| / (1 - γ).
    value_scale: f64,
    /// Clamp GAN targets to the achievable return range. Preset: true except two-state.
    clip_targets: bool,
    /// Episodes between W1 diagnostics (GAN, tabular only); 0 disables. Preset: 10.
    diag_every: usize,
    /// Samples per side of each W1 diagnostic. Preset: 200.
    diag_samples: usize,
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Default: two-state.
    pub env: EnvKind,
    /// Default: q.
    pub agent: AgentKind,
    /// Default: 0.
    pub seeds: Vec<u64>,
    /// Default: runs.
    pub output_dir: PathBuf,
    /// Write an SVG learning curve next to the CSVs. Default: true.
    pub plot: bool,
    pub overrides: Overrides,
    pub sections: BTreeMap<EnvKind, Overrides>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            env: EnvKind::TwoState,
            agent: AgentKind::Q,
            seeds: vec![0],
            output_dir: PathBuf::from("runs"),
            plot: true,
            overrides: Overrides::default(),
            sections: BTreeMap::new(),
        }
    }
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut seeds = Vec::new();
    for part in value.split(',').map(str::trim) {
        match part.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_value("seeds", a)?, parse_value("seeds", b)?);
                seeds.extend(a..b);
            }
            None => seeds.push(parse_value("seeds", part)?),
        }
    }
    Ok(seeds)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = Vec::new();
        let mut section: Option<EnvKind> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |e: Error| Error::Config(format!("line {line_no}: {e}"));
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let kind: EnvKind = name.trim().parse().map_err(at)?;
                if cfg.sections.contains_key(&kind) {
                    return Err(at(Error::Config(format!("duplicate section [{kind}]"))));
                }
                cfg.sections.insert(kind, Overrides::default());
                section = Some(kind);
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| at(Error::Config(format!("expected key = value, got {line:?}"))))?;
            if let Some(kind) = section {
                let target = cfg.sections.get_mut(&kind).expect("section inserted");
                if !target.set(key, value).map_err(at)? {
                    return Err(at(Error::Config(format!("unknown key {key:?} in [{kind}]"))));
                }
                continue;
            }
            if cfg.overrides.set(key, value).map_err(at)? {
                continue;
            }
            if seen.contains(&key) {
                return Err(at(Error::Config(format!("duplicate key {key}"))));
            }
            match key {
                "env" => cfg.env = value.parse().map_err(at)?,
                "agent" => cfg.agent = value.parse().map_err(at)?,
                "seeds" => cfg.seeds = parse_seeds(value).map_err(at)?,
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "plot" => cfg.plot = parse_value(key, value).map_err(at)?,
                _ => return Err(at(Error::Config(format!("unknown key {key:?}")))),
            }
            seen.push(key);
        }
        Ok(cfg)
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        writeln!(out, "env = {}", self.env).unwrap();
        writeln!(out, "agent = {}", self.agent).unwrap();
        writeln!(out, "seeds = {}", seeds.join(", ")).unwrap();
        writeln!(out, "output_dir = {}", self.output_dir.display()).unwrap();
        writeln!(out, "plot = {}", self.plot).unwrap();
        self.overrides.write(&mut out);
        for (kind, o) in &self.sections {
            writeln!(out, "\n[{kind}]").unwrap();
            o.write(&mut out);
        }
        out
    }

    /// First 16 hex digits of SHA-256 over the canonical text.
    pub fn hash(&self) -> String {
        Sha256::digest(self.serialize().as_bytes())[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Top-level settings with the active environment's section applied.
    pub fn resolved(&self) -> Overrides {
        match self.sections.get(&self.env) {
            Some(s) => self.overrides.merged(s),
            None => self.overrides.clone(),
        }
    }

    pub fn env_spec(&self) -> EnvSpec {
        let o = self.resolved();
        let preset = EnvSpec::preset(self.env);
        EnvSpec {
            kind: self.env,
            gamma: o.gamma.unwrap_or(preset.gamma),
            max_steps: o.max_steps.unwrap_or(preset.max_steps),
        }
    }

    fn epsilon(&self, o: &Overrides) -> EpsilonSchedule {
        let d = EpsilonSchedule::default();
        EpsilonSchedule {
            start: o.epsilon_start.unwrap_or(d.start),
            end: o.epsilon_end.unwrap_or(d.end),
            decay_fraction: o.epsilon_decay.unwrap_or(d.decay_fraction),
        }
    }

    pub fn tabular_config(&self, seed: u64) -> TabularAgentConfig {
        let o = self.resolved();
        let d = TabularAgentConfig::default();
        TabularAgentConfig {
            alpha: o.alpha.unwrap_or(d.alpha),
            gamma: None,
            epsilon: self.epsilon(&o),
            episodes: o.episodes.unwrap_or(d.episodes),
            n_atoms: o.n_atoms.unwrap_or(d.n_atoms),
            seed,
        }
    }

    pub fn gan_config(&self, seed: u64) -> GanQConfig {
        let o = self.resolved();
        let d = GanQConfig::preset(self.env);
        GanQConfig {
            noise_dim: o.noise_dim.unwrap_or(d.noise_dim),
            batch_size: o.batch_size.unwrap_or(d.batch_size),
            n_disc: o.n_disc.unwrap_or(d.n_disc),
            n_gen: o.n_gen.unwrap_or(d.n_gen),
            lambda: o.lambda.unwrap_or(d.lambda),
            alpha0: o.alpha0.unwrap_or(d.alpha0),
            lr_k: o.lr_k.unwrap_or(d.lr_k),
            gamma: None,
            target_sync_period: o.target_sync_period.unwrap_or(d.target_sync_period),
            epsilon: self.epsilon(&o),
            episodes: o.episodes.unwrap_or(d.episodes),
            max_steps: None,
            seed,
            buffer_capacity: o.buffer_capacity.unwrap_or(d.buffer_capacity),
            hidden: o.hidden.unwrap_or(d.hidden),
            learning_starts: o.learning_starts.unwrap_or(d.learning_starts),
            value_scale: o.value_scale.or(d.value_scale),
            diag_every: o.diag_every.unwrap_or(d.diag_every),
            diag_samples: o.diag_samples.unwrap_or(d.diag_samples),
            clip_targets: o.clip_targets.unwrap_or(d.clip_targets),
            stop_at: None,
            deadline: None,
        }
    }

    pub fn dqn_config(&self, seed: u64) -> DqnConfig {
        let o = self.resolved();
        let d = DqnConfig::preset(self.env);
        DqnConfig {
            batch_size: o.batch_size.unwrap_or(d.batch_size),
            alpha0: o.alpha0.unwrap_or(d.alpha0),
            lr_k: o.lr_k.unwrap_or(d.lr_k),
            gamma: None,
            target_sync_period: o.target_sync_period.unwrap_or(d.target_sync_period),
            epsilon: self.epsilon(&o),
            episodes: o.episodes.unwrap_or(d.episodes),
            max_steps: None,
            seed,
            buffer_capacity: o.buffer_capacity.unwrap_or(d.buffer_capacity),
            hidden: o.hidden.unwrap_or(d.hidden),
            learning_starts: o.learning_starts.unwrap_or(d.learning_starts),
            value_scale: o.value_scale.or(d.value_scale),
            stop_at: None,
            deadline: None,
        }
    }

    /// Checks everything `run` would otherwise discover midway.
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.agent.is_tabular() && !self.env.is_tabular() {
            return Err(Error::NotTabular(self.env.name().to_string()));
        }
        self.env_spec().validate()?;
        match self.agent {
            AgentKind::Q | AgentKind::Dq => {
                let c = self.tabular_config(0);
                c.epsilon.validate()?;
                if !(0.0..=1.0).contains(&c.alpha) {
                    return Err(Error::Config(format!("alpha {} outside [0,1]", c.alpha)));
                }
                if c.n_atoms < 2 {
                    return Err(Error::Config("n_atoms must be at least 2".into()));
                }
                Ok(())
            }
            AgentKind::Dqn => self.dqn_config(0).validate(),
            AgentKind::GanDqn => self.gan_config(0).validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_override_top_level() {
        let c = RunConfig::parse("env = cartpole\nagent = dqn\nepisodes = 10\n[cartpole]\nepisodes = 20\n[acrobot]\nepisodes = 30\n").unwrap();
        assert_eq!(c.dqn_config(0).episodes, 20);
        let mut other = c.clone();
        other.env = EnvKind::Gridworld;
        assert_eq!(other.dqn_config(0).episodes, 10);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(RunConfig::parse("learning_rate = 3").is_err());
        assert!(RunConfig::parse("episodes = 3\nepisodes = 4").is_err());
        assert!(RunConfig::parse("env = two-state\nenv = gridworld").is_err());
        assert!(RunConfig::parse("[cartpole]\nseeds = 1").is_err());
        assert!(RunConfig::parse("[mountaincar]").is_err());
        assert!(RunConfig::parse("episodes").is_err());
        assert!(RunConfig::parse("episodes = many").is_err());
    }

    #[test]
    fn seed_ranges_and_comments() {
        let c = RunConfig::parse("seeds = 0..3, 7 # trailing\n# whole line\n").unwrap();
        assert_eq!(c.seeds, vec![0, 1, 2, 7]);
    }

    #[test]
    fn round_trip_and_hash() {
        let text = "env = gridworld\nagent = gan-dqn\nseeds = 3, 1\nlambda = 0.25\nalpha0 = 0.0003\n[gridworld]\nhidden = 32\n";
        let c = RunConfig::parse(text).unwrap();
        let again = RunConfig::parse(&c.serialize()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
        assert_eq!(c.hash().len(), 16);
        let mut d = c.clone();
        d.overrides.lambda = Some(0.5);
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::parse("seeds =").unwrap().validate().is_err());
        assert!(RunConfig::parse("env = cartpole\nagent = q").unwrap().validate().is_err());
        assert!(RunConfig::parse("agent = gan-dqn\nn_disc = 0").unwrap().validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
