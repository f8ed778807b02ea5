//! Grenander estimator: the left derivative of the least concave majorant of
//! the empirical CDF, plus the boundary-corrected variant and the inverse
//! process used as frequentist baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::step::StepDensity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrenanderFit<T> {
    sample: Vec<T>,
    /// Distinct sorted values with the ECDF value at each.
    ecdf_knots: Vec<(T, T)>,
    density: StepDensity<T>,
}

impl<T: Scalar> GrenanderFit<T> {
    pub fn sample(&self) -> &[T] {
        &self.sample
    }

    pub fn ecdf_knots(&self) -> &[(T, T)] {
        &self.ecdf_knots
    }

    pub fn density(&self) -> &StepDensity<T> {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    pub fn eval(&self, x: T) -> T {
        self.density.eval(x)
    }

    /// `f̂ₙ(0⁺)`, the slope of the first majorant segment.
    pub fn at_zero(&self) -> T {
        self.density.at_zero()
    }

    /// Empirical CDF `Fₙ(t)`, right-continuous.
    pub fn ecdf(&self, t: T) -> T {
        let j = self.ecdf_knots.partition_point(|&(x, _)| x <= t);
        if j == 0 {
            T::zero()
        } else {
            self.ecdf_knots[j - 1].1
        }
    }

    /// Inverse process `Uₙ(a)`, computed on the fitted ECDF.
    pub fn inverse_process(&self, a: T) -> T {
        argmax_ecdf_minus_line(&self.ecdf_knots, a)
    }
}

/// Fits the Grenander estimator. Ties add multiples of `1/n` to a single jump.
pub fn grenander_fit<T: Scalar>(data: &[T]) -> Result<GrenanderFit<T>> {
    let sample = sorted_positive(data)?;
    let ecdf_knots = ecdf(&sample);

    // Monotone stack over (x, Fₙ(x)) starting at the origin; slopes along the
    // stack stay strictly decreasing, so collinear points are pooled too.
    let mut hull: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    for &(x, y) in &ecdf_knots {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // Compared exactly as the heights are computed below.
            if (y2 - y1) / (x2 - x1) <= (y - y2) / (x - x2) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let knots: Vec<T> = hull.iter().map(|p| p.0).collect();
    let heights: Vec<T> = hull.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let density = StepDensity::new(knots, heights, None)?;
    Ok(GrenanderFit {
        sample,
        ecdf_knots,
        density,
    })
}

fn sorted_positive<T: Scalar>(data: &[T]) -> Result<Vec<T>> {
    if data.is_empty() {
        return Err(Error::Empty("data"));
    }
    if let Some(&bad) = data.iter().find(|&&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::Domain {
            value: bad.as_f64(),
            bound: f64::INFINITY,
        });
    }
    let mut sample = data.to_vec();
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sample)
}

fn ecdf<T: Scalar>(sorted: &[T]) -> Vec<(T, T)> {
    let n = T::from_usize(sorted.len()).unwrap();
    let mut knots: Vec<(T, T)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let y = T::from_usize(i + 1).unwrap() / n;
        match knots.last_mut() {
            Some(last) if last.0 == x => last.1 = y,
            _ => knots.push((x, y)),
        }
    }
    knots
}

/// `c_n = 5 (log n)^{1/3} / ε`.
pub fn boundary_constant(n: usize, eps: f64) -> f64 {
    5.0 * (n as f64).ln().cbrt() / eps
}

/// Boundary-corrected estimator `f̃ₙ(x)`.
///
/// At `x = 0` it returns `f̂ₙ(cₙ n^{−1/3})`, at `x = L` it returns
/// `f̂ₙ(L − cₙ n^{−1/3})`, and `f̂ₙ(x)` elsewhere.
pub fn boundary_modified_eval<T: Scalar>(
    fit: &GrenanderFit<T>,
    x: T,
    n: usize,
    eps: T,
    support: T,
) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("eps {eps} must be positive")));
    }
    if x < T::zero() || x > support {
        return Err(Error::InvalidInterval {
            a: x.as_f64(),
            b: support.as_f64(),
            reason: "x must lie in [0, L]".into(),
        });
    }
    let shift = T::lit(boundary_constant(n, eps.as_f64()) * (n as f64).powf(-1.0 / 3.0));
    if shift >= support {
        return Err(Error::DegenerateScale {
            shift: shift.as_f64(),
            bound: support.as_f64(),
        });
    }
    Ok(if x == T::zero() {
        fit.eval(shift)
    } else if x == support {
        fit.eval(support - shift)
    } else {
        fit.eval(x)
    })
}

/// `Uₙ(a) = argmax_{t ≥ 0} (Fₙ(t) − a t)`, smallest maximizer.
pub fn inverse_process<T: Scalar>(data: &[T], a: T) -> Result<T> {
    let sample = sorted_positive(data)?;
    Ok(argmax_ecdf_minus_line(&ecdf(&sample), a))
}

fn argmax_ecdf_minus_line<T: Scalar>(knots: &[(T, T)], a: T) -> T {
    // Between jumps the objective decreases, so only 0 and the jump points compete.
    let mut best_t = T::zero();
    let mut best = T::zero();
    for &(x, y) in knots {
        let v = y - a * x;
        if v > best {
            best = v;
            best_t = x;
        }
    }
    best_t
}
