//! Two-link underactuated pendulum ("book" equations of motion).
//!
//! Integrated with semi-implicit Euler over fixed substeps of the 0.2 s
//! control interval.

use std::f64::consts::PI;

use rand::Rng;

use super::Observation;

const DT: f64 = 0.2;
const SUBSTEPS: usize = 10;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_1: f64 = 0.5;
const LINK_COM_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
pub const MAX_VEL_1: f64 = 4.0 * PI;
pub const MAX_VEL_2: f64 = 9.0 * PI;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Default)]
pub struct Acrobot {
    /// theta1, theta2, dtheta1, dtheta2
    pub state: [f64; 4],
}

fn wrap(angle: f64) -> f64 {
    let mut a = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if a < -PI {
        a += 2.0 * PI;
    }
    a
}

fn accelerations(s: [f64; 4], torque: f64) -> (f64, f64) {
    let (m1, m2, l1, lc1, lc2) = (LINK_MASS_1, LINK_MASS_2, LINK_LENGTH_1, LINK_COM_1, LINK_COM_2);
    let (i1, i2) = (LINK_MOI, LINK_MOI);
    let [theta1, theta2, dtheta1, dtheta2] = s;
    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * GRAVITY * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * GRAVITY * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    (ddtheta1, ddtheta2)
}

impl Acrobot {
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation {
        for v in &mut self.state {
            *v = rng.random_range(-0.1..0.1);
        }
        self.observe()
    }

    pub fn observe(&self) -> Observation {
        let [t1, t2, d1, d2] = self.state;
        Observation {
            features: vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), d1 / MAX_VEL_1, d2 / MAX_VEL_2],
            state_id: None,
        }
    }

    /// Height of the tip above the pivot, in link lengths.
    pub fn tip_height(&self) -> f64 {
        let [t1, t2, _, _] = self.state;
        -t1.cos() - (t1 + t2).cos()
    }

    /// Torque actions {-1, 0, +1}; -1 per step until the tip clears one link
    /// length above the pivot, 0 on that final step.
    pub fn step(&mut self, action: usize) -> (Observation, f64, bool) {
        let torque = TORQUES[action];
        let h = DT / SUBSTEPS as f64;
        let mut s = self.state;
        for _ in 0..SUBSTEPS {
            let (a1, a2) = accelerations(s, torque);
            s[2] += h * a1;
            s[3] += h * a2;
            s[0] += h * s[2];
            s[1] += h * s[3];
        }
        s[0] = wrap(s[0]);
        s[1] = wrap(s[1]);
        s[2] = s[2].clamp(-MAX_VEL_1, MAX_VEL_1);
        s[3] = s[3].clamp(-MAX_VEL_2, MAX_VEL_2);
        self.state = s;
        let terminal = self.tip_height() > 1.0;
        (self.observe(), if terminal { 0.0 } else { -1.0 }, terminal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hanging_rest_is_equilibrium() {
        let mut a = Acrobot::default();
        let (_, r, done) = a.step(1);
        assert_eq!((r, done), (-1.0, false));
        assert!(a.state.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn angles_wrap_and_velocities_clip() {
        let mut a = Acrobot::default();
        for _ in 0..300 {
            a.step(2);
            assert!(a.state[0].abs() <= PI && a.state[1].abs() <= PI);
            assert!(a.state[2].abs() <= MAX_VEL_1 && a.state[3].abs() <= MAX_VEL_2);
        }
    }

    #[test]
    fn wrap_range() {
        assert!((wrap(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
    }
}
