//! Exact distances between step densities.
//!
//! Both arguments are constant on every cell of the merged knot set, so all
//! integrals reduce to finite sums with no quadrature error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::step::StepDensity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric<T> {
    L1,
    /// `h` with `h² = ½ ∫ (√f − √g)²`.
    Hellinger,
    /// `sup |f − g|` over the closed interval `[a, b]`.
    Sup { a: T, b: T },
}

/// Walks the merged knot set, yielding `(left, right, f, g)` per cell.
/// The last cell ends at the larger of the two right ends.
fn merged_cells<T: Scalar>(f: &StepDensity<T>, g: &StepDensity<T>) -> Vec<(T, T, T, T)> {
    let (fk, gk) = (f.knots(), g.knots());
    let mut cells = Vec::with_capacity(fk.len() + gk.len());
    let (mut i, mut j) = (1, 1);
    let mut left = T::zero();
    while i < fk.len() || j < gk.len() {
        let fr = fk.get(i).copied().unwrap_or(T::infinity());
        let gr = gk.get(j).copied().unwrap_or(T::infinity());
        let right = fr.min(gr);
        let fv = if i < fk.len() { f.heights()[i - 1] } else { T::zero() };
        let gv = if j < gk.len() { g.heights()[j - 1] } else { T::zero() };
        cells.push((left, right, fv, gv));
        if fr == right {
            i += 1;
        }
        if gr == right {
            j += 1;
        }
        left = right;
    }
    cells
}

pub fn distance<T: Scalar>(f: &StepDensity<T>, g: &StepDensity<T>, metric: Metric<T>) -> Result<T> {
    match metric {
        Metric::L1 => Ok(merged_cells(f, g)
            .into_iter()
            .fold(T::zero(), |acc, (l, r, fv, gv)| acc + (fv - gv).abs() * (r - l))),
        Metric::Hellinger => {
            let sq = merged_cells(f, g).into_iter().fold(T::zero(), |acc, (l, r, fv, gv)| {
                let d = fv.sqrt() - gv.sqrt();
                acc + d * d * (r - l)
            });
            Ok((sq / T::lit(2.0)).max(T::zero()).sqrt())
        }
        Metric::Sup { a, b } => {
            check_interval(a, b, &[f.support_bound(), g.support_bound()])?;
            // Cells are (left, right], so the point a itself needs its own check.
            let mut sup = (f.eval(a) - g.eval(a)).abs();
            for (l, r, fv, gv) in merged_cells(f, g) {
                if r > a && l < b {
                    sup = sup.max((fv - gv).abs());
                }
            }
            Ok(sup)
        }
    }
}

pub(crate) fn check_interval<T: Scalar>(a: T, b: T, bounds: &[Option<T>]) -> Result<()> {
    let err = |reason: &str| Error::InvalidInterval {
        a: a.as_f64(),
        b: b.as_f64(),
        reason: reason.to_string(),
    };
    if !(a >= T::zero()) || !(a < b) {
        return Err(err("need 0 <= a < b"));
    }
    if bounds.iter().flatten().any(|&bound| b > bound) {
        return Err(err("interval leaves the declared support"));
    }
    Ok(())
}

/// Kullback–Leibler divergence together with the second moment of the log ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence<T> {
    /// `∫ f log(f/g)`; `+∞` when `f` has mass where `g` vanishes.
    pub kl: T,
    /// `∫ f (log(f/g))²`; `+∞` together with `kl`.
    pub second_moment: T,
}

impl<T: Scalar> Divergence<T> {
    pub fn is_infinite(&self) -> bool {
        self.kl.is_infinite()
    }
}

pub fn kl_divergence<T: Scalar>(f: &StepDensity<T>, g: &StepDensity<T>) -> Divergence<T> {
    let mut kl = T::zero();
    let mut second = T::zero();
    for (l, r, fv, gv) in merged_cells(f, g) {
        if fv <= T::zero() {
            continue;
        }
        if gv <= T::zero() {
            return Divergence {
                kl: T::infinity(),
                second_moment: T::infinity(),
            };
        }
        let log_ratio = (fv / gv).ln();
        let mass = fv * (r - l);
        kl = kl + mass * log_ratio;
        second = second + mass * log_ratio * log_ratio;
    }
    Divergence {
        kl: kl.max(T::zero()),
        second_moment: second,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unif(w: f64) -> StepDensity<f64> {
        StepDensity::uniform(w).unwrap()
    }

    #[test]
    fn closed_form_pair() {
        let (f, g) = (unif(1.0), unif(2.0));
        assert_eq!(distance(&f, &f, Metric::L1).unwrap(), 0.0);
        assert!((distance(&f, &g, Metric::L1).unwrap() - 1.0).abs() < 1e-12);
        let h = distance(&f, &g, Metric::Hellinger).unwrap();
        assert!((h * h - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert!((h - 0.54120).abs() < 1e-5);
        let s = distance(&f, &g, Metric::Sup { a: 0.1, b: 0.4 }).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let (f, g) = (unif(1.0), unif(2.0));
        assert_eq!(kl_divergence(&f, &f).kl, 0.0);
        let d = kl_divergence(&f, &g);
        assert!((d.kl - 2f64.ln()).abs() < 1e-12);
        assert!((d.second_moment - 2f64.ln().powi(2)).abs() < 1e-12);
        assert!(kl_divergence(&g, &f).is_infinite());
    }

    #[test]
    fn kl_dominates_twice_hellinger_squared_on_the_reference_pair() {
        let (f, g) = (unif(1.0), unif(2.0));
        let h = distance(&f, &g, Metric::Hellinger).unwrap();
        assert!(kl_divergence(&f, &g).kl >= 2.0 * h * h);
    }

    #[test]
    fn sup_picks_up_the_left_endpoint() {
        // At a = 1 the point itself belongs to the first piece of U[0,1].
        let f = StepDensity::new(vec![0.0, 1.0], vec![1.0], None).unwrap();
        let g = unif(2.0);
        let s = distance(&f, &g, Metric::Sup { a: 1.0, b: 1.5 }).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
        let s = distance(&f, &g, Metric::Sup { a: 1.2, b: 1.5 }).unwrap();
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sup_rejects_bad_intervals() {
        let (f, g) = (unif(1.0), unif(2.0));
        assert!(distance(&f, &g, Metric::Sup { a: 0.5, b: 1.5 }).is_err());
        assert!(distance(&f, &g, Metric::Sup { a: 0.4, b: 0.1 }).is_err());
        assert!(distance(&f, &g, Metric::Sup { a: -0.1, b: 0.5 }).is_err());
    }
}
