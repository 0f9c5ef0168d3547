use rand::Rng;

use crate::env::{Environment, Observation};
use crate::error::{Error, Result};

use super::exact::PolicyTable;

/// Discounted returns of rollouts that start in tabular state `start_state`,
/// take `start_action`, then follow `policy` until the episode ends.
pub fn monte_carlo_returns<F>(
    env: &mut Environment,
    start_state: usize,
    start_action: usize,
    n_rollouts: usize,
    mut policy: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&Observation) -> usize,
{
    if n_rollouts == 0 {
        return Err(Error::InvalidArgument("n_rollouts must be at least 1".into()));
    }
    let gamma = env.gamma();
    (0..n_rollouts)
        .map(|_| {
            env.reset_to(start_state)?;
            let mut step = env.step(start_action)?;
            let mut ret = step.reward;
            let mut discount = gamma;
            while !step.done() {
                let a = policy(&step.obs);
                step = env.step(a)?;
                ret += discount * step.reward;
                discount *= gamma;
            }
            Ok(ret)
        })
        .collect()
}

/// Samples actions from a policy table, keyed by the observation's state id.
pub fn table_policy<'a, R: Rng>(pi: &'a PolicyTable, rng: &'a mut R) -> impl FnMut(&Observation) -> usize + 'a {
    move |obs| {
        let s = obs.state_id.expect("tabular observation");
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, &p) in pi.row(s).iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        pi.n_actions - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{build_env, EnvKind, EnvSpec};

    #[test]
    fn always_stay_finite_horizon() {
        let mut env = build_env(EnvSpec::preset(EnvKind::TwoState), 1).unwrap();
        let xs = monte_carlo_returns(&mut env, 0, 0, 5, |_| 0).unwrap();
        let want: f64 = (0..25).map(|t| 0.95f64.powi(t) * 20.0).sum();
        assert!((want - 400.0 * (1.0 - 0.95f64.powi(25))).abs() < 1e-9);
        for x in xs {
            assert!((x - want).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_zero_rollouts() {
        let mut env = build_env(EnvSpec::preset(EnvKind::TwoState), 1).unwrap();
        assert!(monte_carlo_returns(&mut env, 0, 0, 0, |_| 0).is_err());
    }
}
