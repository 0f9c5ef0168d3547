//! GAN Q-learning: a generator proposes return samples per action and a
//! gradient-penalized critic scores them against Bellman targets.

use ndarray::Array2;
use rand::Rng;

use crate::env::{build_env, EnvSpec, Observation, Transition};
use crate::error::{Error, Result};
use crate::log::{EpisodeRecord, TrainLog};
use crate::nn::{lr_schedule, DenseNet, OptState, ParamVector};
use crate::rng::{fill_normal, stream, stream_rng};
use crate::tabular::argmax;

use super::config::{default_value_scale, effective_spec, return_bounds, should_stop, GanQConfig};
use super::diag::w1_diagnostic;
use super::replay::ReplayBuffer;
use super::rows_to_matrix;

/// Generator, critic and lagged target generator.
///
/// `G: features ⊕ z → one value per action` and
/// `D: [x, features, one-hot action] → score`. Both work in value units
/// divided by `value_scale`; public methods return unscaled returns.
#[derive(Debug, Clone)]
pub struct GanQAgent {
    pub g: DenseNet,
    pub d: DenseNet,
    pub g_target: DenseNet,
    g_opt: OptState,
    d_opt: OptState,
    pub obs_dim: usize,
    pub n_actions: usize,
    pub noise_dim: usize,
    pub gamma: f64,
    pub value_scale: f64,
    /// Bootstrap from `g_target` (true) or from the online `g`.
    pub use_target: bool,
    /// Bootstrapped targets are clamped into this range (unscaled).
    pub target_bounds: (f64, f64),
}

impl GanQAgent {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        n_actions: usize,
        noise_dim: usize,
        hidden: usize,
        gamma: f64,
        value_scale: f64,
        use_target: bool,
        rng: &mut R,
    ) -> Self {
        let g = DenseNet::preset(obs_dim + noise_dim, hidden, n_actions, rng);
        let d = DenseNet::preset(1 + obs_dim + n_actions, hidden, 1, rng);
        Self::from_nets(g, d, obs_dim, noise_dim, gamma, value_scale, use_target)
    }

    /// Wraps existing networks; shapes must match the conditioning layout.
    pub fn from_nets(
        g: DenseNet,
        d: DenseNet,
        obs_dim: usize,
        noise_dim: usize,
        gamma: f64,
        value_scale: f64,
        use_target: bool,
    ) -> Self {
        let n_actions = g.output_dim();
        assert_eq!(g.input_dim(), obs_dim + noise_dim, "generator input width");
        assert_eq!(d.input_dim(), 1 + obs_dim + n_actions, "critic input width");
        assert_eq!(d.output_dim(), 1, "critic output width");
        GanQAgent {
            g_target: g.clone(),
            g_opt: OptState::new(g.n_params()),
            d_opt: OptState::new(d.n_params()),
            g,
            d,
            obs_dim,
            n_actions,
            noise_dim,
            gamma,
            value_scale,
            use_target,
            target_bounds: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn generator_input<'a, R: Rng + ?Sized>(
        &self,
        features: impl ExactSizeIterator<Item = &'a [f64]>,
        rng: &mut R,
    ) -> Array2<f64> {
        let rows = features.len();
        let width = self.obs_dim + self.noise_dim;
        let mut data = vec![0.0; rows * width];
        for (row, f) in data.chunks_exact_mut(width).zip(features) {
            row[..self.obs_dim].copy_from_slice(f);
            fill_normal(rng, &mut row[self.obs_dim..]);
        }
        Array2::from_shape_vec((rows, width), data).expect("shape matches")
    }

    fn critic_input(&self, xs: &[f64], batch: &[&Transition]) -> Array2<f64> {
        let width = 1 + self.obs_dim + self.n_actions;
        let rows: Vec<Vec<f64>> = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let t = batch[i % batch.len()];
                let mut row = Vec::with_capacity(width);
                row.push(x);
                row.extend_from_slice(&t.obs.features);
                row.extend((0..self.n_actions).map(|a| f64::from(u8::from(a == t.action))));
                row
            })
            .collect();
        rows_to_matrix(&rows, width)
    }

    /// One sample per action from `G(z | features)` for a given noise vector.
    pub fn generator_values_with(&self, features: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        let mut input = features.to_vec();
        input.extend_from_slice(z);
        let out = self.g.forward(&input)?;
        Ok(out.into_iter().map(|v| v * self.value_scale).collect())
    }

    /// Draws `z ~ N(0, I)` and returns one value sample per action.
    pub fn generator_values<R: Rng + ?Sized>(&self, obs: &Observation, rng: &mut R) -> Vec<f64> {
        let mut z = vec![0.0; self.noise_dim];
        fill_normal(rng, &mut z);
        self.generator_values_with(&obs.features, &z).expect("observation width")
    }

    /// ε-greedy over one shared generator draw; ties to the lowest action.
    pub fn select_action<R: Rng + ?Sized>(&self, obs: &Observation, epsilon: f64, rng: &mut R) -> usize {
        if rng.random::<f64>() < epsilon {
            return rng.random_range(0..self.n_actions);
        }
        argmax(&self.generator_values(obs, rng))
    }

    fn bootstrap_net(&self) -> &DenseNet {
        if self.use_target {
            &self.g_target
        } else {
            &self.g
        }
    }

    /// Unscaled Bellman targets `r` (terminal) or `r + γ max_a G'(z|s',a)`
    /// clamped to `target_bounds`, with fresh noise per transition.
    pub fn bellman_targets<R: Rng + ?Sized>(&self, batch: &[&Transition], rng: &mut R) -> Vec<f64> {
        let input = self.generator_input(batch.iter().map(|t| t.next_obs.features.as_slice()), rng);
        let out = self.bootstrap_net().forward_batch(&input).expect("observation width");
        batch
            .iter()
            .zip(out.rows())
            .map(|(t, row)| {
                if t.terminal {
                    t.reward
                } else {
                    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let (lo, hi) = self.target_bounds;
                    (t.reward + self.gamma * self.value_scale * best).clamp(lo, hi)
                }
            })
            .collect()
    }

    pub fn bellman_target<R: Rng + ?Sized>(&self, t: &Transition, rng: &mut R) -> f64 {
        self.bellman_targets(&[t], rng)[0]
    }

    /// Batch-mean critic loss `D(x_gen) - D(y) + λ(|∂D/∂x̃| - 1)²` and its
    /// gradient with respect to the critic's parameters.
    pub fn critic_gradient<R: Rng + ?Sized>(
        &self,
        batch: &[&Transition],
        rng: &mut R,
        lambda: f64,
    ) -> Result<(f64, ParamVector)> {
        self.critic_gradient_with(batch, rng, lambda, true)
    }

    /// `with_penalty = false` skips the penalty pass entirely; the rest of
    /// the computation, including RNG draws, is identical.
    pub(crate) fn critic_gradient_with<R: Rng + ?Sized>(
        &self,
        batch: &[&Transition],
        rng: &mut R,
        lambda: f64,
        with_penalty: bool,
    ) -> Result<(f64, ParamVector)> {
        if batch.is_empty() {
            return Err(Error::Empty("minibatch"));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!("lambda {lambda} must be nonnegative")));
        }
        let m = batch.len();
        let inv_m = 1.0 / m as f64;
        let real: Vec<f64> = self.bellman_targets(batch, rng).into_iter().map(|y| y / self.value_scale).collect();
        let gen_in = self.generator_input(batch.iter().map(|t| t.obs.features.as_slice()), rng);
        let gen_out = self.g.forward_batch(&gen_in)?;
        let fake: Vec<f64> = batch.iter().enumerate().map(|(i, t)| gen_out[[i, t.action]]).collect();
        let mix: Vec<f64> = (0..m)
            .map(|i| {
                let e: f64 = rng.random();
                e * real[i] + (1.0 - e) * fake[i]
            })
            .collect();

        let mut xs = fake;
        xs.extend_from_slice(&real);
        let tape = self.d.forward_tape(self.critic_input(&xs, batch))?;
        let upstream = Array2::from_shape_fn((2 * m, 1), |(i, _)| if i < m { inv_m } else { -inv_m });
        let scores = tape.output.column(0);
        let mut loss = inv_m * (scores.iter().take(m).sum::<f64>() - scores.iter().skip(m).sum::<f64>());
        let (mut grads, _) = self.d.backward(&tape, &upstream)?;

        if with_penalty {
            let pt = self.d.forward_penalty(self.critic_input(&mix, batch), 0)?;
            loss += inv_m * self.d.penalty_backward_into(&pt, lambda, inv_m, &mut grads);
        }
        Ok((loss, grads))
    }

    /// One RMSProp step on the critic; returns the batch-mean loss.
    pub fn discriminator_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[&Transition],
        rng: &mut R,
        lambda: f64,
        alpha: f64,
    ) -> Result<f64> {
        let (loss, grads) = self.critic_gradient(batch, rng, lambda)?;
        self.d_opt.step_net(&mut self.d, &grads, alpha)?;
        Ok(loss)
    }

    /// Batch-mean generator loss `-D(G(z|s)_a)` and its gradient with
    /// respect to the generator's parameters (critic held fixed).
    pub fn generator_gradient<R: Rng + ?Sized>(
        &self,
        batch: &[&Transition],
        rng: &mut R,
    ) -> Result<(f64, ParamVector)> {
        if batch.is_empty() {
            return Err(Error::Empty("minibatch"));
        }
        let m = batch.len();
        let inv_m = 1.0 / m as f64;
        let g_tape = self.g.forward_tape(self.generator_input(batch.iter().map(|t| t.obs.features.as_slice()), rng))?;
        let fake: Vec<f64> = batch.iter().enumerate().map(|(i, t)| g_tape.output[[i, t.action]]).collect();
        let d_tape = self.d.forward_tape(self.critic_input(&fake, batch))?;
        let loss = -inv_m * d_tape.output.sum();
        let (_, dx) = self.d.backward(&d_tape, &Array2::from_elem((m, 1), -inv_m))?;
        let mut upstream = Array2::zeros((m, self.n_actions));
        for (i, t) in batch.iter().enumerate() {
            upstream[[i, t.action]] = dx[[i, 0]];
        }
        let (grads, _) = self.g.backward(&g_tape, &upstream)?;
        Ok((loss, grads))
    }

    pub fn generator_update<R: Rng + ?Sized>(&mut self, batch: &[&Transition], rng: &mut R, alpha: f64) -> Result<f64> {
        let (loss, grads) = self.generator_gradient(batch, rng)?;
        self.g_opt.step_net(&mut self.g, &grads, alpha)?;
        Ok(loss)
    }

    /// Copies the online generator into the target generator.
    pub fn sync_target(&mut self) {
        self.g_target = self.g.clone();
    }
}

#[derive(Debug, Clone)]
pub struct GanQRun {
    pub log: TrainLog,
    pub agent: GanQAgent,
}

/// Runs GAN Q-learning for `config.episodes` episodes.
pub fn train_gan_q(spec: EnvSpec, config: &GanQConfig) -> Result<GanQRun> {
    config.validate()?;
    let spec = effective_spec(spec, config.gamma, config.max_steps);
    let mut env = build_env(spec, config.seed)?;
    let scale = config.value_scale.unwrap_or_else(|| default_value_scale(env.reward_range(), spec.gamma));
    let mut agent = GanQAgent::new(
        env.obs_dim(),
        env.n_actions(),
        config.noise_dim,
        config.hidden,
        spec.gamma,
        scale,
        config.target_sync_period > 0,
        &mut stream_rng(config.seed, stream::INIT),
    );
    if config.clip_targets {
        agent.target_bounds = return_bounds(env.reward_range(), spec.gamma);
    }
    let mut rng = stream_rng(config.seed, stream::AGENT);
    let mut diag_rng = stream_rng(config.seed, stream::DIAG);
    let mdp = if spec.kind.is_tabular() && config.diag_every > 0 { Some(env.tabular_dynamics()?) } else { None };
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
                for _ in 0..config.n_disc {
                    let batch = buffer.sample(config.batch_size, &mut rng)?;
                    let loss = agent.discriminator_update(&batch, &mut rng, config.lambda, alpha)?;
                    if !loss.is_finite() {
                        log.diverged = Some(Error::Diverged { episode, what: "critic loss".into() }.to_string());
                        break 'episodes;
                    }
                }
                for _ in 0..config.n_gen {
                    let batch = buffer.sample(config.batch_size, &mut rng)?;
                    let loss = agent.generator_update(&batch, &mut rng, alpha)?;
                    if !loss.is_finite() {
                        log.diverged = Some(Error::Diverged { episode, what: "generator loss".into() }.to_string());
                        break 'episodes;
                    }
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
        let stop = should_stop(&log, config.stop_at, config.deadline);
        if let Some(mdp) = &mdp {
            if (episode + 1) % config.diag_every == 0 {
                let record = w1_diagnostic(&agent, mdp, spec, config.diag_samples, episode + 1, &mut diag_rng);
                log.rows.last_mut().expect("episode recorded").w1_diag = Some(record.mean());
                log.diagnostics.push(record);
            }
        }
        if stop {
            break;
        }
    }
    Ok(GanQRun { log, agent })
}

#[cfg(test)]
mod tests {
    use ndarray::{Array1, Array2};

    use super::*;
    use crate::env::{EnvKind, Observation};
    use crate::nn::Dense;
    use crate::rng::normal;

    fn linear(w: Vec<f64>, b: Vec<f64>) -> DenseNet {
        let rows = w.len() / b.len();
        DenseNet::from_layers(vec![Dense {
            w: Array2::from_shape_vec((rows, b.len()), w).unwrap(),
            b: Array1::from(b),
        }])
        .unwrap()
    }

    fn tr(s: usize, a: usize, r: f64, s2: usize, terminal: bool) -> Transition {
        Transition {
            obs: Observation::one_hot(s, 2),
            action: a,
            reward: r,
            next_obs: Observation::one_hot(s2, 2),
            terminal,
        }
    }

    fn agent(seed: u64) -> GanQAgent {
        GanQAgent::new(2, 2, 3, 16, 0.95, 1.0, true, &mut stream_rng(seed, 0))
    }

    #[test]
    fn fixed_noise_is_deterministic_and_zero_net_is_zero() {
        let a = agent(1);
        let f = [1.0, 0.0];
        let z = [0.3, -1.2, 0.5];
        assert_eq!(a.generator_values_with(&f, &z).unwrap(), a.generator_values_with(&f, &z).unwrap());
        let zero = GanQAgent::from_nets(DenseNet::zeros(&[5, 4, 2]), DenseNet::zeros(&[5, 4, 1]), 2, 3, 0.9, 7.0, true);
        let mut rng = stream_rng(0, 0);
        assert_eq!(zero.generator_values(&Observation::one_hot(1, 2), &mut rng), vec![0.0, 0.0]);
    }

    #[test]
    fn epsilon_one_is_uniform_and_zero_is_greedy() {
        let a = agent(2);
        let obs = Observation::one_hot(0, 2);
        let mut rng = stream_rng(3, 0);
        let n = 10_000;
        let ones = (0..n).filter(|_| a.select_action(&obs, 1.0, &mut rng) == 1).count();
        // binomial sd is 50; allow 4 sd
        assert!((ones as f64 - 5000.0).abs() < 200.0, "{ones}");

        // G ignores noise and outputs (3, 1) for state 0
        let g = linear(vec![3.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]);
        let mut b = GanQAgent::from_nets(g, DenseNet::zeros(&[5, 1]), 2, 3, 0.9, 1.0, true);
        assert_eq!(b.select_action(&obs, 0.0, &mut rng), 0);
        // argmax is invariant under positive affine rescaling of G's output
        for l in b.g.layers_mut() {
            l.w.mapv_inplace(|v| 2.5 * v);
            l.b.mapv_inplace(|v| 2.5 * v - 4.0);
        }
        assert_eq!(b.select_action(&obs, 0.0, &mut rng), 0);
    }

    #[test]
    fn bellman_target_cases() {
        let mut rng = stream_rng(4, 0);
        let a = agent(5);
        assert_eq!(a.bellman_target(&tr(0, 1, 5.0, 1, true), &mut rng), 5.0);
        let mut myopic = agent(5);
        myopic.gamma = 0.0;
        assert_eq!(myopic.bellman_target(&tr(0, 1, 2.5, 1, false), &mut rng), 2.5);
        let zero = GanQAgent::from_nets(DenseNet::zeros(&[5, 4, 2]), DenseNet::zeros(&[5, 1]), 2, 3, 0.95, 1.0, true);
        assert_eq!(zero.bellman_target(&tr(0, 0, 1.0, 1, false), &mut rng), 1.0);
    }

    #[test]
    fn bootstrapped_targets_are_clamped_but_terminal_ones_are_not() {
        let mut rng = stream_rng(4, 0);
        let mut zero = GanQAgent::from_nets(DenseNet::zeros(&[5, 4, 2]), DenseNet::zeros(&[5, 1]), 2, 3, 0.95, 1.0, true);
        zero.target_bounds = (-0.5, 0.5);
        assert_eq!(zero.bellman_target(&tr(0, 0, 1.0, 1, false), &mut rng), 0.5);
        assert_eq!(zero.bellman_target(&tr(0, 0, -3.0, 1, false), &mut rng), -0.5);
        assert_eq!(zero.bellman_target(&tr(0, 0, 0.25, 1, false), &mut rng), 0.25);
        assert_eq!(zero.bellman_target(&tr(0, 0, 1.0, 1, true), &mut rng), 1.0);
    }

    #[test]
    fn zero_critic_without_penalty_has_zero_bias_gradient() {
        let a = GanQAgent::from_nets(DenseNet::new(&[5, 4, 2], &mut stream_rng(0, 1)), DenseNet::zeros(&[5, 3, 1]), 2, 3, 0.9, 1.0, true);
        let batch = [tr(0, 0, 1.0, 1, false), tr(1, 1, -2.0, 0, true)];
        let refs: Vec<&Transition> = batch.iter().collect();
        let (loss, grads) = a.critic_gradient(&refs, &mut stream_rng(0, 2), 0.0).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(*grads.0.last().unwrap(), 0.0);
    }

    #[test]
    fn single_item_linear_critic_matches_hand_derivative() {
        // G(z|s) = (0.7, -0.4) regardless of z; D(x, s, a) = w x
        let g = linear(vec![0.0; 5 * 2], vec![0.7, -0.4]);
        for &w in &[1.8, -0.6, 0.25] {
            let mut dw = vec![0.0; 5];
            dw[0] = w;
            let d = linear(dw, vec![0.0]);
            let a = GanQAgent::from_nets(g.clone(), d, 2, 3, 0.9, 1.0, true);
            let t = tr(0, 1, 0.3, 1, true);
            let (loss, grads) = a.critic_gradient(&[&t], &mut stream_rng(7, 0), 0.1).unwrap();
            let (x_gen, y) = (-0.4, 0.3);
            let want_loss = w * (x_gen - y) + 0.1 * (w.abs() - 1.0).powi(2);
            let want_dw = (x_gen - y) + 0.2 * (w.abs() - 1.0) * w.signum();
            assert!((loss - want_loss).abs() < 1e-10);
            assert!((grads.0[0] - want_dw).abs() < 1e-10);
            // conditioning weights see x only through the one-hot inputs
            assert!((grads.0[1] - 0.0).abs() < 1e-10 && (grads.0[3] - 0.0).abs() < 1e-10);
        }
    }

    #[test]
    fn penalty_with_zero_lambda_is_bitwise_inert() {
        let a = agent(8);
        let batch: Vec<Transition> = (0..6).map(|i| tr(i % 2, (i / 2) % 2, i as f64 * 0.1, (i + 1) % 2, i == 5)).collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let (l1, g1) = a.critic_gradient_with(&refs, &mut stream_rng(9, 0), 0.0, true).unwrap();
        let (l2, g2) = a.critic_gradient_with(&refs, &mut stream_rng(9, 0), 0.0, false).unwrap();
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert!(g1.0.iter().zip(&g2.0).all(|(x, y)| x.to_bits() == y.to_bits()));
        let (_, g3) = a.critic_gradient(&refs, &mut stream_rng(9, 0), 0.1).unwrap();
        assert_ne!(g3, g2);
    }

    #[test]
    fn generator_gradient_through_identity_critic() {
        // G(z) = g z on one noise input for both heads; D(x, s, a) = x
        let g_val = 0.8;
        let g = linear(vec![0.0, 0.0, 0.0, 0.0, g_val, g_val], vec![0.0, 0.0]);
        let d = linear(vec![1.0, 0.0, 0.0, 0.0, 0.0], vec![0.0]);
        let a = GanQAgent::from_nets(g, d, 2, 1, 0.9, 1.0, true);
        let batch = [tr(0, 0, 0.0, 1, true), tr(1, 1, 0.0, 0, true), tr(0, 1, 0.0, 0, true)];
        let refs: Vec<&Transition> = batch.iter().collect();
        let mut rng = stream_rng(10, 0);
        let mut replay = rng.clone();
        let zs: Vec<f64> = (0..3).map(|_| normal(&mut replay)).collect();
        let (loss, grads) = a.generator_gradient(&refs, &mut rng).unwrap();
        let mean_z = zs.iter().sum::<f64>() / 3.0;
        assert!((loss + g_val * mean_z).abs() < 1e-10);
        // weight (noise row, head a) collects -z_i / m from items taking action a
        let want_head0 = -zs[0] / 3.0;
        let want_head1 = -(zs[1] + zs[2]) / 3.0;
        assert!((grads.0[4] - want_head0).abs() < 1e-10);
        assert!((grads.0[5] - want_head1).abs() < 1e-10);
    }

    #[test]
    fn zero_critic_leaves_generator_unchanged() {
        let mut a = GanQAgent::from_nets(DenseNet::new(&[5, 4, 2], &mut stream_rng(0, 1)), DenseNet::zeros(&[5, 3, 1]), 2, 3, 0.9, 1.0, true);
        let before = a.g.clone();
        let t = tr(0, 0, 1.0, 1, false);
        let loss = a.generator_update(&[&t, &t], &mut stream_rng(1, 1), 1e-3).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(a.g, before);
    }

    #[test]
    fn target_tracks_syncs_only() {
        let mut a = agent(11);
        let t = tr(0, 1, 1.0, 1, false);
        let mut rng = stream_rng(12, 0);
        for _ in 0..3 {
            a.discriminator_update(&[&t], &mut rng, 0.1, 1e-2).unwrap();
            a.generator_update(&[&t], &mut rng, 1e-2).unwrap();
        }
        let stale = a.g_target.clone();
        assert_ne!(a.g, a.g_target);
        a.sync_target();
        assert_eq!(a.g_target, a.g);
        let x = [0.0, 1.0, 0.4, -0.3, 1.1];
        assert_eq!(a.g.forward(&x).unwrap(), a.g_target.forward(&x).unwrap());
        let synced = a.g_target.clone();
        a.generator_update(&[&t], &mut rng, 1e-2).unwrap();
        assert_eq!(a.g_target, synced);
        assert_ne!(synced, stale);
    }

    #[test]
    fn empty_batches_are_rejected() {
        let mut a = agent(13);
        let mut rng = stream_rng(0, 0);
        assert!(a.discriminator_update(&[], &mut rng, 0.1, 1e-3).is_err());
        assert!(a.generator_update(&[], &mut rng, 1e-3).is_err());
    }

    #[test]
    fn short_run_is_finite_and_reproducible() {
        let mut c = GanQConfig::preset(EnvKind::TwoState);
        c.episodes = 4;
        c.diag_every = 2;
        c.diag_samples = 20;
        c.seed = 3;
        let spec = EnvSpec::preset(EnvKind::TwoState);
        let r1 = train_gan_q(spec, &c).unwrap();
        let r2 = train_gan_q(spec, &c).unwrap();
        assert_eq!(r1.log, r2.log);
        assert_eq!(r1.log.rows.len(), 4);
        assert_eq!(r1.log.diagnostics.len(), 2);
        assert!(r1.log.rows[1].w1_diag.is_some() && r1.log.rows[0].w1_diag.is_none());
        assert!(r1.agent.g.params().0.iter().all(|v| v.is_finite()));
        assert!(r1.log.diverged.is_none());
    }
}
