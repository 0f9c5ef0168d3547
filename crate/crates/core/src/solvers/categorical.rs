use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

use super::exact::PolicyTable;

const MASS_TOL: f64 = 1e-9;

fn check_support(support: &[f64]) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Empty("support"));
    }
    if support.windows(2).any(|w| w[0] >= w[1]) || support.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("support must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn check_probs(probs: &[f64]) -> Result<()> {
    let mass: f64 = probs.iter().sum();
    if (mass - 1.0).abs() > MASS_TOL || probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::Unnormalized(mass));
    }
    Ok(())
}

/// `n_atoms` evenly spaced atoms bounding every discounted return achievable
/// with rewards in `[r_min, r_max]`.
pub fn support_for(r_min: f64, r_max: f64, gamma: f64, n_atoms: usize) -> Vec<f64> {
    let lo = r_min.min(0.0) / (1.0 - gamma);
    let mut hi = r_max.max(0.0) / (1.0 - gamma);
    if hi <= lo {
        hi = lo + 1.0;
    }
    let step = (hi - lo) / (n_atoms - 1) as f64;
    (0..n_atoms).map(|i| if i + 1 == n_atoms { hi } else { lo + step * i as f64 }).collect()
}

/// Adds `mass` at `x` to `out`, splitting it between the two neighboring
/// atoms in proportion to distance. Points outside the support clip to the
/// nearest end.
pub fn project_onto(support: &[f64], x: f64, mass: f64, out: &mut [f64]) {
    let last = support.len() - 1;
    if x <= support[0] {
        out[0] += mass;
        return;
    }
    if x >= support[last] {
        out[last] += mass;
        return;
    }
    // support[hi - 1] < x <= support[hi]
    let hi = support.partition_point(|&z| z < x);
    let lo = hi - 1;
    let frac = (x - support[lo]) / (support[hi] - support[lo]);
    out[lo] += mass * (1.0 - frac);
    out[hi] += mass * frac;
}

/// A probability vector over scalar atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalDist {
    pub support: Vec<f64>,
    pub probs: Vec<f64>,
}

impl CategoricalDist {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        check_support(&support)?;
        if probs.len() != support.len() {
            return Err(Error::Dimension { expected: support.len(), got: probs.len() });
        }
        check_probs(&probs)?;
        Ok(CategoricalDist { support, probs })
    }

    /// Point mass at `x`, projected onto `support`.
    pub fn dirac(support: Vec<f64>, x: f64) -> Result<Self> {
        check_support(&support)?;
        let mut probs = vec![0.0; support.len()];
        project_onto(&support, x, 1.0, &mut probs);
        Ok(CategoricalDist { support, probs })
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probs).map(|(z, p)| z * p).sum()
    }

    pub fn validate(&self) -> Result<()> {
        check_support(&self.support)?;
        check_probs(&self.probs)
    }
}

/// Return distributions for every `(s, a)` over one shared support.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueDistTable {
    pub n_states: usize,
    pub n_actions: usize,
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl ValueDistTable {
    /// Every cell a Dirac at `x` (projected).
    pub fn constant(n_states: usize, n_actions: usize, support: Vec<f64>, x: f64) -> Result<Self> {
        let d = CategoricalDist::dirac(support, x)?;
        let probs = d.probs.repeat(n_states * n_actions);
        Ok(ValueDistTable { n_states, n_actions, support: d.support, probs })
    }

    pub fn from_cells(n_states: usize, n_actions: usize, support: Vec<f64>, cells: Vec<Vec<f64>>) -> Result<Self> {
        check_support(&support)?;
        if cells.len() != n_states * n_actions {
            return Err(Error::Dimension { expected: n_states * n_actions, got: cells.len() });
        }
        let mut probs = Vec::with_capacity(cells.len() * support.len());
        for c in &cells {
            if c.len() != support.len() {
                return Err(Error::Dimension { expected: support.len(), got: c.len() });
            }
            check_probs(c)?;
            probs.extend_from_slice(c);
        }
        Ok(ValueDistTable { n_states, n_actions, support, probs })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn n_atoms(&self) -> usize {
        self.support.len()
    }

    /// Largest gap between neighboring atoms.
    pub fn spacing(&self) -> f64 {
        self.support.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn probs(&self, s: usize, a: usize) -> &[f64] {
        let k = self.n_atoms();
        let start = (s * self.n_actions + a) * k;
        &self.probs[start..start + k]
    }

    pub fn probs_mut(&mut self, s: usize, a: usize) -> &mut [f64] {
        let k = self.n_atoms();
        let start = (s * self.n_actions + a) * k;
        &mut self.probs[start..start + k]
    }

    pub fn dist(&self, s: usize, a: usize) -> CategoricalDist {
        CategoricalDist { support: self.support.clone(), probs: self.probs(s, a).to_vec() }
    }

    pub fn mean(&self, s: usize, a: usize) -> f64 {
        self.support.iter().zip(self.probs(s, a)).map(|(z, p)| z * p).sum()
    }

    pub fn means(&self, s: usize) -> Vec<f64> {
        (0..self.n_actions).map(|a| self.mean(s, a)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        check_support(&self.support)?;
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                check_probs(self.probs(s, a))?;
                if !self.mean(s, a).is_finite() {
                    return Err(Error::InvalidArgument("non-finite expected value".into()));
                }
            }
        }
        Ok(())
    }
}

/// Law of `R(s,a) + γ Z(S', A')` with `S' ~ P(·|s,a)`, `A' ~ π(·|S')`,
/// projected back onto the table's support.
pub fn distributional_backup(
    z: &ValueDistTable,
    mdp: &TabularMdp,
    policy: &PolicyTable,
    gamma: f64,
) -> Result<ValueDistTable> {
    check_support(z.support())?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0,1)")));
    }
    if z.n_states != mdp.n_states || policy.n_states != mdp.n_states {
        return Err(Error::Dimension { expected: mdp.n_states, got: z.n_states.min(policy.n_states) });
    }
    if z.n_actions != mdp.n_actions || policy.n_actions != mdp.n_actions {
        return Err(Error::Dimension { expected: mdp.n_actions, got: z.n_actions.min(policy.n_actions) });
    }
    let support = z.support();
    let mut out = z.clone();
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let r = mdp.r(s, a);
            let mut cell = vec![0.0; support.len()];
            for (s2, &p) in mdp.row(s, a).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (a2, &w) in policy.row(s2).iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    for (&atom, &q) in support.iter().zip(z.probs(s2, a2)) {
                        if q != 0.0 {
                            project_onto(support, r + gamma * atom, p * w * q, &mut cell);
                        }
                    }
                }
            }
            out.probs_mut(s, a).copy_from_slice(&cell);
        }
    }
    Ok(out)
}
