//! Replay sampling statistics and deep-agent behavior on small problems.

use ganq_core::deep::{train_dqn, train_gan_q, DqnConfig, GanQConfig, ReplayBuffer};
use ganq_core::env::{EnvKind, EnvSpec, Observation, Transition};
use ganq_core::rng::stream_rng;
use ganq_core::tabular::EpsilonSchedule;
use proptest::prelude::*;

fn tagged(r: f64) -> Transition {
    let o = Observation::one_hot(0, 1);
    Transition { obs: o.clone(), action: 0, reward: r, next_obs: o, terminal: false }
}

#[test]
fn replay_sampling_is_uniform() {
    let mut b = ReplayBuffer::new(10);
    for i in 0..10 {
        b.push(tagged(i as f64));
    }
    let mut rng = stream_rng(2024, 0);
    let mut counts = [0usize; 10];
    let draws = 100_000;
    for _ in 0..draws / 50 {
        for t in b.sample(50, &mut rng).unwrap() {
            counts[t.reward as usize] += 1;
        }
    }
    let expected = draws as f64 / 10.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 9 degrees of freedom
    assert!(chi2 < 21.666, "chi2 = {chi2}");
}

proptest! {
    #[test]
    fn replay_never_exceeds_capacity_and_keeps_newest(cap in 1usize..20, n in 0usize..60) {
        let mut b = ReplayBuffer::new(cap);
        for i in 0..n {
            b.push(tagged(i as f64));
            prop_assert!(b.len() <= cap);
        }
        let got: Vec<f64> = b.iter().map(|t| t.reward).collect();
        let want: Vec<f64> = (n.saturating_sub(cap)..n).map(|i| i as f64).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn myopic_dqn_prefers_immediate_reward() {
    let mut c = DqnConfig::preset(EnvKind::TwoState);
    c.gamma = Some(0.0);
    c.episodes = 40;
    c.seed = 1;
    let run = train_dqn(EnvSpec::preset(EnvKind::TwoState), &c).unwrap();
    let q = run.agent.q_values(&Observation::one_hot(0, 2));
    assert!(q[0] > q[1], "{q:?}");
    assert!((q[0] - 20.0).abs() < 3.0 && (q[1] + 10.0).abs() < 3.0, "{q:?}");
}

#[test]
fn tabular_gan_runs_stay_finite() {
    for kind in [EnvKind::TwoState, EnvKind::TwoGoalChain, EnvKind::Gridworld] {
        let mut c = GanQConfig::preset(kind);
        c.episodes = 6;
        c.diag_every = 3;
        c.diag_samples = 16;
        c.seed = 5;
        let run = train_gan_q(EnvSpec::preset(kind), &c).unwrap();
        assert!(run.log.diverged.is_none());
        assert!(run.agent.g.params().0.iter().chain(&run.agent.d.params().0).all(|v| v.is_finite()));
        assert!(run.log.diagnostics.iter().all(|d| d.pairs.iter().all(|p| p.2.is_finite())));
    }
}

#[test]
fn disabling_the_target_network_still_trains() {
    let mut c = GanQConfig::preset(EnvKind::TwoGoalChain);
    c.episodes = 3;
    c.target_sync_period = 0;
    c.epsilon = EpsilonSchedule::constant(0.0);
    c.diag_every = 0;
    let run = train_gan_q(EnvSpec::preset(EnvKind::TwoGoalChain), &c).unwrap();
    assert_eq!(run.log.rows.len(), 3);
    assert!(run.log.rows.iter().all(|r| r.epsilon == 0.0));
}
