use crate::error::{Error, Result};
use crate::mdp::TabularMdp;

/// Action probabilities per state.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    pub n_states: usize,
    pub n_actions: usize,
    probs: Vec<f64>,
}

impl PolicyTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        let n_actions = rows.first().map_or(0, Vec::len);
        if n_states == 0 || n_actions == 0 {
            return Err(Error::Empty("policy table"));
        }
        let mut probs = Vec::with_capacity(n_states * n_actions);
        for row in rows {
            if row.len() != n_actions {
                return Err(Error::Dimension { expected: n_actions, got: row.len() });
            }
            let mass: f64 = row.iter().sum();
            if (mass - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
                return Err(Error::Unnormalized(mass));
            }
            probs.extend(row);
        }
        Ok(PolicyTable { n_states, n_actions, probs })
    }

    /// Chooses `actions[s]` with certainty in every state.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Self {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            probs[s * n_actions + a] = 1.0;
        }
        PolicyTable { n_states: actions.len(), n_actions, probs }
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        PolicyTable { n_states, n_actions, probs: vec![1.0 / n_actions as f64; n_states * n_actions] }
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    fn check(&self, mdp: &TabularMdp) -> Result<()> {
        if self.n_states != mdp.n_states {
            return Err(Error::Dimension { expected: mdp.n_states, got: self.n_states });
        }
        if self.n_actions != mdp.n_actions {
            return Err(Error::Dimension { expected: mdp.n_actions, got: self.n_actions });
        }
        Ok(())
    }
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-14 {
            return Err(Error::Singular);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            // col < row, so the pivot row sits in the upper half
            let (upper, lower) = a.split_at_mut(row);
            for (t, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *t -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

fn policy_reward_and_matrix(mdp: &TabularMdp, policy: &PolicyTable) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mdp.n_states;
    let mut r = vec![0.0; n];
    let mut p = vec![vec![0.0; n]; n];
    for s in 0..n {
        for a in 0..mdp.n_actions {
            let w = policy.prob(s, a);
            if w == 0.0 {
                continue;
            }
            r[s] += w * mdp.r(s, a);
            for (dst, &pr) in p[s].iter_mut().zip(mdp.row(s, a)) {
                *dst += w * pr;
            }
        }
    }
    (r, p)
}

/// `V = (I - γ P_π)^{-1} R_π`.
pub fn solve_value_exact(mdp: &TabularMdp, policy: &PolicyTable) -> Result<Vec<f64>> {
    policy.check(mdp)?;
    let n = mdp.n_states;
    let (r, p) = policy_reward_and_matrix(mdp, policy);
    let a = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j)) - mdp.gamma * p[i][j]).collect())
        .collect();
    let v = solve_linear(a, r.clone())?;
    let residual = (0..n)
        .map(|i| {
            let backup = r[i] + mdp.gamma * (0..n).map(|j| p[i][j] * v[j]).sum::<f64>();
            (v[i] - backup).abs()
        })
        .fold(0.0, f64::max);
    let scale = v.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    if !residual.is_finite() || residual > 1e-10 * scale {
        return Err(Error::Singular);
    }
    Ok(v)
}

/// `Q[s][a] = R[s][a] + γ Σ P[s][a][s'] V[s']`.
pub fn q_from_v(mdp: &TabularMdp, v: &[f64], gamma: f64) -> Result<Vec<Vec<f64>>> {
    if v.len() != mdp.n_states {
        return Err(Error::Dimension { expected: mdp.n_states, got: v.len() });
    }
    Ok((0..mdp.n_states)
        .map(|s| {
            (0..mdp.n_actions)
                .map(|a| mdp.r(s, a) + gamma * mdp.row(s, a).iter().zip(v).map(|(p, x)| p * x).sum::<f64>())
                .collect()
        })
        .collect())
}

/// Iterative evaluation (`policy = Some`) or optimal control (`None`).
pub fn value_iteration(mdp: &TabularMdp, policy: Option<&PolicyTable>, iterations: usize) -> Vec<f64> {
    let mut v = vec![0.0; mdp.n_states];
    for _ in 0..iterations {
        let q = q_from_v(mdp, &v, mdp.gamma).expect("length matches");
        let next: Vec<f64> = q
            .iter()
            .enumerate()
            .map(|(s, qs)| match policy {
                Some(pi) => qs.iter().zip(pi.row(s)).map(|(q, p)| q * p).sum(),
                None => qs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect();
        if next == v {
            break;
        }
        v = next;
    }
    v
}

/// Deterministic greedy policy; ties go to the lowest action index.
pub fn greedy_policy(q: &[Vec<f64>]) -> Vec<usize> {
    q.iter().map(|row| crate::tabular::argmax(row)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalSolution {
    pub v: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub policy: Vec<usize>,
}

/// Exact optimal values by policy iteration over [`solve_value_exact`].
pub fn solve_optimal(mdp: &TabularMdp) -> Result<OptimalSolution> {
    let mut actions = vec![0; mdp.n_states];
    for _ in 0..10_000 {
        let pi = PolicyTable::deterministic(&actions, mdp.n_actions);
        let v = solve_value_exact(mdp, &pi)?;
        let q = q_from_v(mdp, &v, mdp.gamma)?;
        // keep the incumbent action unless another is strictly better
        let improved: Vec<usize> = q
            .iter()
            .zip(&actions)
            .map(|(row, &cur)| {
                let best = crate::tabular::argmax(row);
                if row[best] > row[cur] + 1e-12 * (1.0 + row[cur].abs()) {
                    best
                } else {
                    cur
                }
            })
            .collect();
        if improved == actions {
            let policy = greedy_policy(&q);
            return Ok(OptimalSolution { v, q, policy });
        }
        actions = improved;
    }
    Err(Error::InvalidArgument("policy iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::two_state_mdp;

    #[test]
    fn always_stay_in_s0_is_400() {
        let m = two_state_mdp(0.95).unwrap();
        let v = solve_value_exact(&m, &PolicyTable::deterministic(&[0, 1], 2)).unwrap();
        assert!((v[0] - 400.0).abs() < 1e-9);
    }

    #[test]
    fn two_state_optimum() {
        let m = two_state_mdp(0.95).unwrap();
        let sol = solve_optimal(&m).unwrap();
        assert!((sol.v[0] - 400.0).abs() < 1e-8);
        assert!((sol.v[1] - 378.0).abs() < 1e-8);
        assert!((sol.q[0][0] - 400.0).abs() < 1e-8);
        assert!((sol.q[0][1] - 349.1).abs() < 1e-8);
        assert_eq!(sol.policy, vec![0, 1]);
    }

    #[test]
    fn zero_discount_gives_rewards() {
        let m = two_state_mdp(0.0).unwrap();
        let pi = PolicyTable::uniform(2, 2);
        let v = solve_value_exact(&m, &pi).unwrap();
        assert!((v[0] - 5.0).abs() < 1e-12);
        let q = q_from_v(&m, &v, 0.0).unwrap();
        assert_eq!(q, vec![vec![20.0, -10.0], vec![-0.5, -2.0]]);
    }

    #[test]
    fn dimension_errors() {
        let m = two_state_mdp(0.9).unwrap();
        assert!(q_from_v(&m, &[0.0], 0.9).is_err());
        assert!(solve_value_exact(&m, &PolicyTable::uniform(3, 2)).is_err());
    }

    #[test]
    fn singular_system_is_reported() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert_eq!(solve_linear(a, vec![1.0, 2.0]), Err(Error::Singular));
    }

    #[test]
    fn policy_rows_must_normalize() {
        assert!(PolicyTable::new(vec![vec![0.5, 0.6]]).is_err());
    }
}
