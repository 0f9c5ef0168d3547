//! Cart-pole balancing with Euler integration.

use rand::Rng;

use super::Observation;

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
/// Half the pole length.
const LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
pub const X_THRESHOLD: f64 = 2.4;

/// Per-dimension divisors mapping typical states into roughly [-1, 1].
const OBS_SCALE: [f64; 4] = [X_THRESHOLD, 3.0, THETA_THRESHOLD, 3.5];

#[derive(Debug, Clone, Default)]
pub struct CartPole {
    /// x, x_dot, theta, theta_dot
    pub state: [f64; 4],
}

impl CartPole {
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation {
        for v in &mut self.state {
            *v = rng.random_range(-0.05..0.05);
        }
        self.observe()
    }

    pub fn observe(&self) -> Observation {
        let features = self.state.iter().zip(OBS_SCALE).map(|(v, s)| v / s).collect();
        Observation { features, state_id: None }
    }

    /// Action 0 pushes left, 1 pushes right. +1 per step, including the
    /// step on which the pole falls.
    pub fn step(&mut self, action: usize) -> (Observation, f64, bool) {
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let (sin, cos) = theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin) / TOTAL_MASS;
        let theta_acc =
            (GRAVITY * sin - cos * temp) / (LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
        let terminal = self.state[0].abs() > X_THRESHOLD || self.state[2].abs() > THETA_THRESHOLD;
        (self.observe(), 1.0, terminal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_push_topples() {
        let mut c = CartPole::default();
        let mut steps = 0;
        loop {
            steps += 1;
            let (_, r, done) = c.step(1);
            assert_eq!(r, 1.0);
            if done {
                break;
            }
            assert!(steps < 200);
        }
        assert!(c.state[2].abs() > THETA_THRESHOLD || c.state[0].abs() > X_THRESHOLD);
    }

    #[test]
    fn pushes_are_mirror_images_from_rest() {
        let mut left = CartPole::default();
        let mut right = CartPole::default();
        for _ in 0..5 {
            left.step(0);
            right.step(1);
        }
        for i in 0..4 {
            assert!((left.state[i] + right.state[i]).abs() < 1e-12);
        }
        assert!(left.state[0] < 0.0 && left.state[2] > 0.0);
    }
}
