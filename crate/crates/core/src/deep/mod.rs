//! Replay-based deep agents: GAN Q-learning and a DQN baseline.

mod config;
mod diag;
mod dqn;
mod ganq;
mod replay;

use ndarray::Array2;

pub use config::{DqnConfig, GanQConfig};
pub use diag::{diag_horizon, rollout_returns, w1_diagnostic};
pub use dqn::{train_dqn, DqnAgent, DqnRun};
pub use ganq::{train_gan_q, GanQAgent, GanQRun};
pub use replay::ReplayBuffer;

fn rows_to_matrix(rows: &[Vec<f64>], width: usize) -> Array2<f64> {
    let mut data = Vec::with_capacity(rows.len() * width);
    for r in rows {
        debug_assert_eq!(r.len(), width);
        data.extend_from_slice(r);
    }
    Array2::from_shape_vec((rows.len(), width), data).expect("rows share a width")
}
