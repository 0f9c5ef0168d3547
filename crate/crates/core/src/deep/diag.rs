//! Distance between the generator's return law and Monte-Carlo returns.

use rand::Rng;

use crate::env::EnvSpec;
use crate::log::DiagRecord;
use crate::mdp::TabularMdp;
use crate::rng::fill_normal;
use crate::solvers::wasserstein_empirical;
use crate::tabular::argmax;

use super::ganq::GanQAgent;
use super::rows_to_matrix;

/// Rollout length: the episode cap or the point where `γ^t < 1e-3`,
/// whichever is longer, since bootstrapped targets ignore truncation.
pub fn diag_horizon(spec: EnvSpec) -> usize {
    let tail = if spec.gamma > 0.0 && spec.gamma < 1.0 {
        (1e-3f64.ln() / spec.gamma.ln()).ceil() as usize
    } else {
        0
    };
    spec.max_steps.max(tail)
}

fn one_hot(s: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[s] = 1.0;
    v
}

/// `n` generator samples for every action at state `s`, unscaled.
fn generator_samples<R: Rng + ?Sized>(agent: &GanQAgent, s: usize, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let width = agent.obs_dim + agent.noise_dim;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut row = one_hot(s, agent.obs_dim);
            row.resize(width, 0.0);
            fill_normal(rng, &mut row[agent.obs_dim..]);
            row
        })
        .collect();
    let out = agent.g.forward_batch(&rows_to_matrix(&rows, width)).expect("generator width");
    (0..agent.n_actions)
        .map(|a| out.column(a).iter().map(|v| v * agent.value_scale).collect())
        .collect()
}

/// Discounted returns of `n` rollouts from `(s, a)` on the exact dynamics,
/// acting greedily on generator draws afterwards.
pub fn rollout_returns<R: Rng + ?Sized>(
    agent: &GanQAgent,
    mdp: &TabularMdp,
    s: usize,
    a: usize,
    n: usize,
    horizon: usize,
    rng: &mut R,
) -> Vec<f64> {
    let width = agent.obs_dim + agent.noise_dim;
    let mut returns = vec![0.0; n];
    let mut state = vec![s; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut discount = 1.0;
    let mut actions = vec![a; n];
    for t in 0..horizon {
        if active.is_empty() {
            break;
        }
        if t > 0 {
            let rows: Vec<Vec<f64>> = active
                .iter()
                .map(|&i| {
                    let mut row = one_hot(state[i], agent.obs_dim);
                    row.resize(width, 0.0);
                    fill_normal(rng, &mut row[agent.obs_dim..]);
                    row
                })
                .collect();
            let out = agent.g.forward_batch(&rows_to_matrix(&rows, width)).expect("generator width");
            for (k, &i) in active.iter().enumerate() {
                actions[i] = argmax(out.row(k).as_slice().expect("row-major output"));
            }
        }
        for &i in &active {
            returns[i] += discount * mdp.r(state[i], actions[i]);
            state[i] = mdp.sample_next(state[i], actions[i], rng);
        }
        active.retain(|&i| !mdp.is_terminal(state[i]));
        discount *= mdp.gamma;
    }
    returns
}

/// W1 between generator samples and Monte-Carlo returns for every
/// non-terminal observable state and every action.
pub fn w1_diagnostic<R: Rng + ?Sized>(
    agent: &GanQAgent,
    mdp: &TabularMdp,
    spec: EnvSpec,
    samples: usize,
    episode: usize,
    rng: &mut R,
) -> DiagRecord {
    let horizon = diag_horizon(spec);
    let mut pairs = Vec::new();
    for s in (0..agent.obs_dim).filter(|&s| !mdp.is_terminal(s)) {
        let gen = generator_samples(agent, s, samples, rng);
        for (a, g) in gen.iter().enumerate() {
            let mc = rollout_returns(agent, mdp, s, a, samples, horizon, rng);
            let w = wasserstein_empirical(g, &mc, 1.0).expect("nonempty samples");
            pairs.push((s, a, w));
        }
    }
    DiagRecord { episode, pairs }
}
