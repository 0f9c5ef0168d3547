//! Deterministic Q-network baseline sharing the replay and schedule code.

use ndarray::Array2;
use rand::Rng;

use crate::env::{build_env, EnvSpec, Observation, Transition};
use crate::error::{Error, Result};
use crate::log::{EpisodeRecord, TrainLog};
use crate::nn::{lr_schedule, DenseNet, OptState, ParamVector};
use crate::rng::{stream, stream_rng};
use crate::tabular::argmax;

use super::config::{default_value_scale, effective_spec, should_stop, DqnConfig};
use super::replay::ReplayBuffer;
use super::rows_to_matrix;

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub q: DenseNet,
    pub q_target: DenseNet,
    opt: OptState,
    pub gamma: f64,
    pub value_scale: f64,
    pub use_target: bool,
}

impl DqnAgent {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        n_actions: usize,
        hidden: usize,
        gamma: f64,
        value_scale: f64,
        use_target: bool,
        rng: &mut R,
    ) -> Self {
        let q = DenseNet::preset(obs_dim, hidden, n_actions, rng);
        DqnAgent { q_target: q.clone(), opt: OptState::new(q.n_params()), q, gamma, value_scale, use_target }
    }

    pub fn n_actions(&self) -> usize {
        self.q.output_dim()
    }

    /// Unscaled action values.
    pub fn q_values(&self, obs: &Observation) -> Vec<f64> {
        let out = self.q.forward(&obs.features).expect("observation width");
        out.into_iter().map(|v| v * self.value_scale).collect()
    }

    pub fn select_action<R: Rng + ?Sized>(&self, obs: &Observation, epsilon: f64, rng: &mut R) -> usize {
        if rng.random::<f64>() < epsilon {
            return rng.random_range(0..self.n_actions());
        }
        argmax(&self.q_values(obs))
    }

    /// Unscaled targets `r` (terminal) or `r + γ max_a Q'(s', a)`.
    pub fn targets(&self, batch: &[&Transition]) -> Vec<f64> {
        let width = self.q.input_dim();
        let rows: Vec<Vec<f64>> = batch.iter().map(|t| t.next_obs.features.clone()).collect();
        let net = if self.use_target { &self.q_target } else { &self.q };
        let out = net.forward_batch(&rows_to_matrix(&rows, width)).expect("observation width");
        batch
            .iter()
            .zip(out.rows())
            .map(|(t, row)| {
                if t.terminal {
                    t.reward
                } else {
                    t.reward + self.gamma * self.value_scale * row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                }
            })
            .collect()
    }

    /// Batch-mean `½(Q(s,a) - y)²` in scaled units and its gradient.
    pub fn loss_gradient(&self, batch: &[&Transition]) -> Result<(f64, ParamVector)> {
        if batch.is_empty() {
            return Err(Error::Empty("minibatch"));
        }
        let m = batch.len();
        let y = self.targets(batch);
        let rows: Vec<Vec<f64>> = batch.iter().map(|t| t.obs.features.clone()).collect();
        let tape = self.q.forward_tape(rows_to_matrix(&rows, self.q.input_dim()))?;
        let mut upstream = Array2::zeros((m, self.n_actions()));
        let mut loss = 0.0;
        for (i, t) in batch.iter().enumerate() {
            let err = tape.output[[i, t.action]] - y[i] / self.value_scale;
            loss += 0.5 * err * err / m as f64;
            upstream[[i, t.action]] = err / m as f64;
        }
        let (grads, _) = self.q.backward(&tape, &upstream)?;
        Ok((loss, grads))
    }

    pub fn update(&mut self, batch: &[&Transition], alpha: f64) -> Result<f64> {
        let (loss, grads) = self.loss_gradient(batch)?;
        self.opt.step_net(&mut self.q, &grads, alpha)?;
        Ok(loss)
    }

    pub fn sync_target(&mut self) {
        self.q_target = self.q.clone();
    }
}

#[derive(Debug, Clone)]
pub struct DqnRun {
    pub log: TrainLog,
    pub agent: DqnAgent,
}

/// Runs DQN for `config.episodes` episodes, one minibatch update per step.
pub fn train_dqn(spec: EnvSpec, config: &DqnConfig) -> Result<DqnRun> {
    config.validate()?;
    let spec = effective_spec(spec, config.gamma, config.max_steps);
    let mut env = build_env(spec, config.seed)?;
    let scale = config.value_scale.unwrap_or_else(|| default_value_scale(env.reward_range(), spec.gamma));
    let mut agent = DqnAgent::new(
        env.obs_dim(),
        env.n_actions(),
        config.hidden,
        spec.gamma,
        scale,
        config.target_sync_period > 0,
        &mut stream_rng(config.seed, stream::INIT),
    );
    let mut rng = stream_rng(config.seed, stream::AGENT);
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut log = TrainLog::new(config.seed);
    let mut updates: u64 = 0;

    'episodes: for episode in 0..config.episodes {
        let eps = config.epsilon.value(episode, config.episodes);
        let alpha = lr_schedule(config.alpha0, episode as u64, config.lr_k)?;
        let mut obs = env.reset();
        let (mut total, mut steps) = (0.0, 0);
        loop {
            let action = agent.select_action(&obs, eps, &mut rng);
            let step = env.step(action)?;
            total += step.reward;
            steps += 1;
            buffer.push(Transition {
                obs,
                action,
                reward: step.reward,
                next_obs: step.obs.clone(),
                terminal: step.terminal,
            });
            if buffer.len() >= config.learning_starts {
                let batch = buffer.sample(config.batch_size, &mut rng)?;
                let loss = agent.update(&batch, alpha)?;
                if !loss.is_finite() {
                    log.diverged = Some(Error::Diverged { episode, what: "Q loss".into() }.to_string());
                    break 'episodes;
                }
                updates += 1;
                if config.target_sync_period > 0 && updates.is_multiple_of(config.target_sync_period as u64) {
                    agent.sync_target();
                }
            }
            obs = step.obs;
            if step.terminal || step.truncated {
                log.rows.push(EpisodeRecord {
                    seed: config.seed,
                    episode,
                    reward: total,
                    steps,
                    epsilon: eps,
                    alpha,
                    w1_diag: None,
                    truncated: step.truncated,
                });
                break;
            }
        }
        if should_stop(&log, config.stop_at, config.deadline) {
            break;
        }
    }
    Ok(DqnRun { log, agent })
}
