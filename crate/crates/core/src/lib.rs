//! Distributional reinforcement-learning lab: GAN Q-learning with a WGAN-GP
//! critic, tabular and deep baselines, exact solvers and Wasserstein oracles.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod deep;
pub mod env;
pub mod error;
pub mod harness;
pub mod log;
pub mod mdp;
pub mod nn;
pub mod par;
pub mod rng;
pub mod solvers;
pub mod tabular;

pub use error::{Error, Result};
