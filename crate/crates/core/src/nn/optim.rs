use crate::error::{Error, Result};

use super::net::{DenseNet, ParamVector};

/// RMSProp state: running mean of squared gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub accumulator: Vec<f64>,
    pub decay: f64,
    pub epsilon: f64,
    pub step_count: u64,
}

impl OptState {
    /// Decay 0.9, ε = 1e-8.
    pub fn new(n_params: usize) -> Self {
        Self::with_constants(n_params, 0.9, 1e-8)
    }

    pub fn with_constants(n_params: usize, decay: f64, epsilon: f64) -> Self {
        OptState { accumulator: vec![0.0; n_params], decay, epsilon, step_count: 0 }
    }

    fn update(&mut self, params: &mut [f64], grads: &[f64], alpha: f64) {
        update_slice(&mut self.accumulator, params, grads, self.decay, self.epsilon, alpha);
    }

    /// Applies one step directly to a network's parameters.
    pub fn step_net(&mut self, net: &mut DenseNet, grads: &ParamVector, alpha: f64) -> Result<()> {
        check(self, grads, net.n_params(), alpha)?;
        let mut offset = 0;
        for slice in net.param_slices_mut() {
            let n = slice.len();
            let range = offset..offset + n;
            update_slice(&mut self.accumulator[range.clone()], slice, &grads.0[range], self.decay, self.epsilon, alpha);
            offset += n;
        }
        self.step_count += 1;
        Ok(())
    }
}

fn update_slice(acc: &mut [f64], params: &mut [f64], grads: &[f64], decay: f64, eps: f64, alpha: f64) {
    for ((p, acc), &g) in params.iter_mut().zip(acc.iter_mut()).zip(grads) {
        *acc = decay * *acc + (1.0 - decay) * g * g;
        *p -= alpha * g / (*acc + eps).sqrt();
    }
}

fn check(state: &OptState, grads: &ParamVector, n: usize, alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} must be positive")));
    }
    if grads.len() != n || state.accumulator.len() != n {
        return Err(Error::Dimension { expected: n, got: grads.len() });
    }
    Ok(())
}

/// `acc ← decay·acc + (1-decay)·g²; θ ← θ - α·g/√(acc + ε)`.
pub fn rmsprop_step(params: &mut ParamVector, grads: &ParamVector, state: &mut OptState, alpha: f64) -> Result<()> {
    check(state, grads, params.len(), alpha)?;
    state.update(&mut params.0, &grads.0, alpha);
    state.step_count += 1;
    Ok(())
}

/// Inverse-time decay `α0 / (1 + t/k)`.
pub fn lr_schedule(alpha0: f64, t: u64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("scheduler k = {k} must be positive")));
    }
    Ok(alpha0 / (1.0 + t as f64 / k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut p = ParamVector(vec![1.0, -2.0]);
        let mut st = OptState::new(2);
        rmsprop_step(&mut p, &ParamVector::zeros(2), &mut st, 0.1).unwrap();
        assert_eq!(p.0, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_magnitude() {
        let mut p = ParamVector(vec![0.0]);
        let mut st = OptState::new(1);
        rmsprop_step(&mut p, &ParamVector(vec![1e3]), &mut st, 0.01).unwrap();
        let want = 0.01 / 0.1f64.sqrt();
        assert!((p.0[0] + want).abs() < 1e-9);
    }

    #[test]
    fn repeated_steps_shrink() {
        let mut p = ParamVector(vec![0.0]);
        let mut st = OptState::new(1);
        let g = ParamVector(vec![0.5]);
        rmsprop_step(&mut p, &g, &mut st, 0.01).unwrap();
        let first = -p.0[0];
        rmsprop_step(&mut p, &g, &mut st, 0.01).unwrap();
        let second = -p.0[0] - first;
        assert!(second < first);
        assert!(rmsprop_step(&mut p, &g, &mut st, 0.0).is_err());
    }

    #[test]
    fn net_step_matches_flat_step() {
        let mut rng = crate::rng::stream_rng(5, 0);
        let mut net = DenseNet::preset(3, 4, 2, &mut rng);
        let mut flat = net.params();
        let g = ParamVector((0..net.n_params()).map(|i| (i as f64 * 0.37).sin()).collect());
        let mut s1 = OptState::new(net.n_params());
        let mut s2 = s1.clone();
        for _ in 0..3 {
            s1.step_net(&mut net, &g, 0.01).unwrap();
            rmsprop_step(&mut flat, &g, &mut s2, 0.01).unwrap();
        }
        assert_eq!(net.params(), flat);
        assert_eq!(s1, s2);
    }

    #[test]
    fn schedule_values() {
        assert_eq!(lr_schedule(0.1, 0, 200.0).unwrap(), 0.1);
        assert_eq!(lr_schedule(0.1, 200, 200.0).unwrap(), 0.05);
        assert_eq!(lr_schedule(0.1, 600, 200.0).unwrap(), 0.025);
        assert!(lr_schedule(0.1, 1, 0.0).is_err());
    }
}
