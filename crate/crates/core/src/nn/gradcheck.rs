//! Central finite-difference checks of the analytic derivative paths.

use rand::seq::index::sample;
use rand::Rng;

use super::net::{DenseNet, ParamVector};

const STEP: f64 = 1e-5;
/// Denominator floor for relative errors of near-zero components.
const REL_FLOOR: f64 = 1e-4;
/// Coordinates probed per path on large networks.
const MAX_COORDS: usize = 1500;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Worst relative error of each derivative path.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub param: f64,
    /// Present for scalar-output networks only.
    pub input: Option<f64>,
    /// Present for scalar-output networks only.
    pub penalty: Option<f64>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn first_order_ok(&self, tol: f64) -> bool {
        self.param <= tol && self.input.is_none_or(|e| e <= tol)
    }

    pub fn passed(&self) -> bool {
        self.first_order_ok(self.tolerance) && self.penalty.is_none_or(|e| e <= self.tolerance)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.param > self.tolerance {
            out.push("param_gradient");
        }
        if self.input.is_some_and(|e| e > self.tolerance) {
            out.push("input_derivative");
        }
        if self.penalty.is_some_and(|e| e > self.tolerance) {
            out.push("penalty_param_gradient");
        }
        out
    }
}

fn probe_coords<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    if n <= MAX_COORDS {
        (0..n).collect()
    } else {
        sample(rng, n, MAX_COORDS).into_vec()
    }
}

/// Overwrites parameter `i` in place.
fn set_coord(net: &mut DenseNet, mut i: usize, value: f64) {
    for slice in net.param_slices_mut() {
        if i < slice.len() {
            slice[i] = value;
            return;
        }
        i -= slice.len();
    }
    panic!("parameter index out of range");
}

fn param_fd(net: &DenseNet, coords: &[usize], f: impl Fn(&DenseNet) -> f64) -> Vec<f64> {
    let base = net.params();
    let mut probe = net.clone();
    coords
        .iter()
        .map(|&i| {
            set_coord(&mut probe, i, base.0[i] + STEP);
            let up = f(&probe);
            set_coord(&mut probe, i, base.0[i] - STEP);
            let down = f(&probe);
            set_coord(&mut probe, i, base.0[i]);
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

fn worst(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic.iter().zip(numeric).map(|(&a, &n)| relative_error(a, n)).fold(0.0, f64::max)
}

/// Checks `param_gradient`, `input_derivative` and `penalty_param_gradient`
/// of `net` at a random input and upstream vector.
pub fn gradient_check<R: Rng + ?Sized>(net: &DenseNet, tolerance: f64, rng: &mut R) -> GradCheckReport {
    gradient_check_with(net, tolerance, rng, |_| {})
}

/// As [`gradient_check`], with `tweak` applied to the analytic parameter
/// gradient before comparison.
pub(crate) fn gradient_check_with<R: Rng + ?Sized>(
    net: &DenseNet,
    tolerance: f64,
    rng: &mut R,
    tweak: impl Fn(&mut ParamVector),
) -> GradCheckReport {
    let input: Vec<f64> = (0..net.input_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let upstream: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let coords = probe_coords(net.n_params(), rng);

    let mut analytic = net.param_gradient(&input, &upstream).expect("shapes match");
    tweak(&mut analytic);
    let picked: Vec<f64> = coords.iter().map(|&i| analytic.0[i]).collect();
    let numeric = param_fd(net, &coords, |n| {
        n.forward(&input).expect("shapes match").iter().zip(&upstream).map(|(y, u)| y * u).sum()
    });
    let param = worst(&picked, &numeric);

    if net.output_dim() != 1 {
        return GradCheckReport { param, input: None, penalty: None, tolerance };
    }

    let dx = net.input_derivative(&input).expect("scalar output");
    let numeric_dx: Vec<f64> = (0..input.len())
        .map(|i| {
            let mut x = input.clone();
            x[i] = input[i] + STEP;
            let up = net.forward(&x).expect("shapes match")[0];
            x[i] = input[i] - STEP;
            let down = net.forward(&x).expect("shapes match")[0];
            (up - down) / (2.0 * STEP)
        })
        .collect();
    let input_err = worst(&dx, &numeric_dx);

    let lambda = 1.0;
    let (_, pg) = net.penalty_param_gradient(&input, 0, lambda).expect("scalar output");
    let picked: Vec<f64> = coords.iter().map(|&i| pg.0[i]).collect();
    let numeric = param_fd(net, &coords, |n| {
        let slope = n.input_derivative(&input).expect("scalar output")[0];
        lambda * (slope.abs() - 1.0).powi(2)
    });
    let penalty = worst(&picked, &numeric);

    GradCheckReport { param, input: Some(input_err), penalty: Some(penalty), tolerance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn fresh_preset_passes() {
        let mut rng = stream_rng(11, 0);
        let net = DenseNet::preset(6, 64, 1, &mut rng);
        let r = gradient_check(&net, 1e-4, &mut rng);
        assert!(r.passed(), "{r:?}");
        assert!(r.first_order_ok(1e-6), "{r:?}");
    }

    #[test]
    fn zero_net_agrees_exactly() {
        let mut rng = stream_rng(12, 0);
        let net = DenseNet::zeros(&[3, 4, 1]);
        let r = gradient_check(&net, 1e-4, &mut rng);
        assert!(r.param < 1e-9 && r.input.unwrap() < 1e-9, "{r:?}");
    }

    #[test]
    fn corrupted_gradient_is_reported() {
        let mut rng = stream_rng(13, 0);
        let net = DenseNet::preset(3, 5, 1, &mut rng);
        let r = gradient_check_with(&net, 1e-4, &mut rng, |g| g.0[0] += 0.5);
        assert!(!r.passed());
        assert_eq!(r.failures(), vec!["param_gradient"]);
    }
}
