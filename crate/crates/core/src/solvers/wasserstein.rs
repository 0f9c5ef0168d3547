//! One-dimensional p-Wasserstein distances via quantile functions.
//!
//! For real-valued laws `W_p^p = ∫_0^1 |F^{-1}(u) - G^{-1}(u)|^p du`. Both
//! quantile functions here are step functions, so the integral is a finite
//! sum over the merged breakpoints of the two CDFs.

use crate::error::{Error, Result};

use super::categorical::{CategoricalDist, ValueDistTable};

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p = {p}; need finite p >= 1")));
    }
    Ok(())
}

/// `xs`, `ys` ascending; `cx`, `cy` their cumulative masses ending at 1.
fn quantile_integral(xs: &[f64], cx: &[f64], ys: &[f64], cy: &[f64], p: f64) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    let mut acc = 0.0;
    while i < xs.len() && j < ys.len() {
        let next = cx[i].min(cy[j]);
        let width = next - u;
        if width > 0.0 {
            let d = (xs[i] - ys[j]).abs();
            acc += width * if p == 1.0 { d } else { d.powf(p) };
            u = next;
        }
        let (adv_x, adv_y) = (cx[i] <= next, cy[j] <= next);
        if adv_x {
            i += 1;
        }
        if adv_y {
            j += 1;
        }
    }
    acc.max(0.0).powf(1.0 / p)
}

/// `W_p` between two weighted atom sets. Atoms must be ascending and the
/// weights nonnegative with unit mass.
pub fn wasserstein_weighted(xs: &[f64], wx: &[f64], ys: &[f64], wy: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("distribution"));
    }
    if xs.len() != wx.len() || ys.len() != wy.len() {
        return Err(Error::Dimension { expected: xs.len(), got: wx.len() });
    }
    if xs.windows(2).chain(ys.windows(2)).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("atoms must be ascending".into()));
    }
    let cumulative = |w: &[f64]| -> Result<Vec<f64>> {
        let mut acc = 0.0;
        let mut c: Vec<f64> = w
            .iter()
            .map(|&m| {
                acc += m;
                acc
            })
            .collect();
        if (acc - 1.0).abs() > 1e-9 || w.iter().any(|&m| m < 0.0) {
            return Err(Error::Unnormalized(acc));
        }
        *c.last_mut().expect("non-empty") = 1.0;
        Ok(c)
    };
    Ok(quantile_integral(xs, &cumulative(wx)?, ys, &cumulative(wy)?, p))
}

/// `W_p` between the empirical laws of two samples of any lengths.
pub fn wasserstein_empirical(xs: &[f64], ys: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (xs, ys) = (sorted(xs), sorted(ys));
    let steps = |n: usize| (1..=n).map(|i| i as f64 / n as f64).collect::<Vec<_>>();
    Ok(quantile_integral(&xs, &steps(xs.len()), &ys, &steps(ys.len()), p))
}

/// Exact `W_p` between two categorical laws; supports may differ.
pub fn wasserstein_categorical(d1: &CategoricalDist, d2: &CategoricalDist, p: f64) -> Result<f64> {
    d1.validate()?;
    d2.validate()?;
    wasserstein_weighted(&d1.support, &d1.probs, &d2.support, &d2.probs, p)
}

/// Maximal `W_p` over all `(s, a)` cells.
pub fn wasserstein_max(z1: &ValueDistTable, z2: &ValueDistTable, p: f64) -> Result<f64> {
    if z1.n_states != z2.n_states || z1.n_actions != z2.n_actions {
        return Err(Error::Dimension { expected: z1.n_states * z1.n_actions, got: z2.n_states * z2.n_actions });
    }
    let mut worst: f64 = 0.0;
    for s in 0..z1.n_states {
        for a in 0..z1.n_actions {
            let w = wasserstein_weighted(z1.support(), z1.probs(s, a), z2.support(), z2.probs(s, a), p)?;
            worst = worst.max(w);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_cases() {
        assert_eq!(wasserstein_empirical(&[1.0, 2.0], &[2.0, 1.0], 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein_empirical(&[0.0], &[1.0], 1.0).unwrap(), 1.0);
        assert_eq!(wasserstein_empirical(&[0.0, 1.0], &[0.5, 0.5], 1.0).unwrap(), 0.5);
    }

    #[test]
    fn unequal_lengths() {
        // {0,1} vs {0,0,1}: quantiles differ on (1/3, 1/2]
        let w = wasserstein_empirical(&[0.0, 1.0], &[0.0, 0.0, 1.0], 1.0).unwrap();
        assert!((w - (0.5 - 1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn diracs() {
        let a = CategoricalDist::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]).unwrap();
        let b = CategoricalDist::new(vec![-3.0, 5.0], vec![1.0, 0.0]).unwrap();
        assert_eq!(wasserstein_categorical(&a, &b, 2.0).unwrap(), 5.0);
        assert_eq!(wasserstein_categorical(&a, &a, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(wasserstein_empirical(&[], &[1.0], 1.0).is_err());
        assert!(wasserstein_empirical(&[0.0], &[1.0], 0.5).is_err());
        let bad = CategoricalDist { support: vec![0.0, 1.0], probs: vec![0.3, 0.3] };
        let ok = CategoricalDist::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(wasserstein_categorical(&bad, &ok, 1.0), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn max_over_single_differing_cell() {
        let support = vec![0.0, 1.0, 2.0];
        let z1 = ValueDistTable::constant(2, 2, support.clone(), 0.0).unwrap();
        let mut z2 = z1.clone();
        z2.probs_mut(1, 0).copy_from_slice(&[0.0, 0.5, 0.5]);
        assert_eq!(wasserstein_max(&z1, &z1, 1.0).unwrap(), 0.0);
        assert!((wasserstein_max(&z1, &z2, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let z3 = ValueDistTable::constant(3, 2, support, 0.0).unwrap();
        assert!(wasserstein_max(&z1, &z3, 1.0).is_err());
    }
}
