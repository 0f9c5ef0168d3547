//! Finite Markov decision processes with explicit dynamics.

use rand::Rng;

use crate::error::{Error, Result};

/// A finite MDP: transition tensor `p[s][a][s']`, expected rewards `r[s][a]`,
/// initial and terminal state sets, and a discount.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    p: Vec<f64>,
    r: Vec<f64>,
    pub initial_states: Vec<usize>,
    pub terminal_states: Vec<usize>,
    pub gamma: f64,
}

impl TabularMdp {
    /// Builds an MDP from nested tables and checks the invariants.
    pub fn new(
        p: Vec<Vec<Vec<f64>>>,
        r: Vec<Vec<f64>>,
        initial_states: Vec<usize>,
        terminal_states: Vec<usize>,
        gamma: f64,
    ) -> Result<Self> {
        let n_states = p.len();
        if n_states == 0 {
            return Err(Error::Empty("transition tensor"));
        }
        let n_actions = p[0].len();
        if n_actions == 0 {
            return Err(Error::Empty("action set"));
        }
        let mut flat_p = Vec::with_capacity(n_states * n_actions * n_states);
        for row in &p {
            if row.len() != n_actions {
                return Err(Error::Dimension { expected: n_actions, got: row.len() });
            }
            for dist in row {
                if dist.len() != n_states {
                    return Err(Error::Dimension { expected: n_states, got: dist.len() });
                }
                flat_p.extend_from_slice(dist);
            }
        }
        if r.len() != n_states {
            return Err(Error::Dimension { expected: n_states, got: r.len() });
        }
        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for row in &r {
            if row.len() != n_actions {
                return Err(Error::Dimension { expected: n_actions, got: row.len() });
            }
            flat_r.extend_from_slice(row);
        }
        let mdp = TabularMdp {
            n_states,
            n_actions,
            p: flat_p,
            r: flat_r,
            initial_states,
            terminal_states,
            gamma,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Checks normalization, nonnegativity, index ranges and absorbing terminals.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::InvalidArgument(format!("gamma {} outside [0,1)", self.gamma)));
        }
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.row(s, a);
                if row.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                    return Err(Error::InvalidArgument(format!("negative probability at ({s},{a})")));
                }
                let mass: f64 = row.iter().sum();
                if (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::Unnormalized(mass));
                }
                if !self.r(s, a).is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite reward at ({s},{a})")));
                }
            }
        }
        for &s in self.initial_states.iter().chain(&self.terminal_states) {
            if s >= self.n_states {
                return Err(Error::Dimension { expected: self.n_states, got: s });
            }
        }
        for &s in &self.terminal_states {
            for a in 0..self.n_actions {
                if self.p(s, a, s) != 1.0 || self.r(s, a) != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "terminal state {s} is not absorbing with zero reward"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self, s: usize, a: usize, next: usize) -> f64 {
        self.p[(s * self.n_actions + a) * self.n_states + next]
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.n_actions + a) * self.n_states;
        &self.p[start..start + self.n_states]
    }

    pub fn r(&self, s: usize, a: usize) -> f64 {
        self.r[s * self.n_actions + a]
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal_states.contains(&s)
    }

    pub fn reward_range(&self) -> (f64, f64) {
        self.r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }

    /// Draws a successor of `(s, a)` by inverse-CDF sampling.
    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, a: usize, rng: &mut R) -> usize {
        let row = self.row(s, a);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (next, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return next;
            }
        }
        // rounding slack: last state with positive mass
        row.iter().rposition(|&p| p > 0.0).unwrap_or(self.n_states - 1)
    }

    /// A random dense MDP, for property tests and oracle comparisons.
    pub fn random<R: Rng + ?Sized>(n_states: usize, n_actions: usize, gamma: f64, rng: &mut R) -> Self {
        let p = (0..n_states)
            .map(|_| {
                (0..n_actions)
                    .map(|_| {
                        let w: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 1e-3).collect();
                        let z: f64 = w.iter().sum();
                        let mut row: Vec<f64> = w.iter().map(|x| x / z).collect();
                        // pin the sum to exactly 1 within rounding
                        let drift: f64 = 1.0 - row.iter().sum::<f64>();
                        row[0] += drift;
                        row
                    })
                    .collect()
            })
            .collect();
        let r = (0..n_states)
            .map(|_| (0..n_actions).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        TabularMdp::new(p, r, vec![0], vec![], gamma).expect("random MDP is well formed")
    }
}
