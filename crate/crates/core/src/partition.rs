//! Adaptive dyadic partition producing a finite uniform mixture that is close
//! to a monotone density in Kullback–Leibler divergence.
//!
//! The refinement runs on `√f`. At every step the score of a cell
//! `[x_{j-1}, x_j]` is `(√f(x_{j-1}) − √f(x_j)) · (x_j − x_{j-1})^{1/2}`; every
//! cell whose score reaches `max_score / √2` is halved. Refinement stops at
//! the first step whose maximal score `ε_k` satisfies `ε_k² ≤ ε³`. The
//! approximation then takes the left-endpoint value of `f` on every cell and
//! renormalizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::AtomicMixture;
use crate::quadrature::adaptive_simpson;
use crate::scalar::Scalar;
use crate::step::StepDensity;

/// Grid size of the monotonicity spot check.
pub const SHAPE_CHECK_POINTS: usize = 1 << 16;

const MAX_REFINEMENTS: usize = 200;

/// `K₀ = 2(1 − 2^{−2/3})^{−2}`, the constant in the piece-count bound.
pub fn k0() -> f64 {
    2.0 / (1.0 - 2f64.powf(-2.0 / 3.0)).powi(2)
}

/// Upper bound `K₀ M^{2/3} L^{1/3} / ε` on the number of pieces.
pub fn piece_bound(eps: f64, support: f64, bound: f64) -> f64 {
    k0() * bound.powf(2.0 / 3.0) * support.cbrt() / eps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTrace<T> {
    /// Final partition `0 = x_0 < … < x_{n_k} = L`.
    pub breakpoints: Vec<T>,
    pub piece_count: usize,
    /// Number of refinement steps `k`.
    pub steps: usize,
    /// Maximal score of every partition visited, `ε_0 … ε_k`.
    pub epsilons: Vec<T>,
    pub final_epsilon: T,
    pub constant_k0: f64,
}

/// Approximates `f` on `[0, support]` by a finite mixture of uniforms.
///
/// `bound` must dominate `f(0)`. Monotonicity is only spot-checked on a
/// grid of [`SHAPE_CHECK_POINTS`] cells.
pub fn adaptive_kl_partition<T, F>(
    f: F,
    eps: T,
    support: T,
    bound: T,
) -> Result<(AtomicMixture<T>, PartitionTrace<T>)>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} must lie in (0, 1)")));
    }
    if !(support > T::zero()) || !support.is_finite() {
        return Err(Error::InvalidParameter(format!("support bound {support} must be positive")));
    }
    check_shape(&f, support, bound)?;

    let root = |x: T| f(x).max(T::zero()).sqrt();
    let half = T::lit(0.5);
    let threshold = eps * eps * eps;
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();

    let mut points = vec![T::zero(), support];
    let mut values = vec![root(T::zero()), root(support)];
    let mut epsilons = Vec::new();
    loop {
        let scores: Vec<T> = (1..points.len())
            .map(|j| (values[j - 1] - values[j]) * (points[j] - points[j - 1]).sqrt())
            .collect();
        let max_score = scores.iter().fold(T::zero(), |m, &s| m.max(s));
        epsilons.push(max_score);
        if max_score * max_score <= threshold {
            break;
        }
        if epsilons.len() > MAX_REFINEMENTS {
            return Err(Error::PartitionDidNotConverge(MAX_REFINEMENTS));
        }
        let cut = max_score * inv_sqrt2;
        let mut next_points = Vec::with_capacity(2 * points.len());
        let mut next_values = Vec::with_capacity(2 * points.len());
        next_points.push(points[0]);
        next_values.push(values[0]);
        for j in 1..points.len() {
            if scores[j - 1] >= cut {
                let mid = (points[j - 1] + points[j]) * half;
                next_points.push(mid);
                next_values.push(root(mid));
            }
            next_points.push(points[j]);
            next_values.push(values[j]);
        }
        points = next_points;
        values = next_values;
    }

    // Left-endpoint squares, g² on each cell, renormalized to integrate to 1.
    let squares: Vec<T> = values[..values.len() - 1].iter().map(|&g| g * g).collect();
    let mass = (1..points.len()).fold(T::zero(), |acc, j| {
        acc + squares[j - 1] * (points[j] - points[j - 1])
    });
    if !(mass > T::zero()) {
        return Err(Error::InvalidParameter("density vanishes at the origin".into()));
    }
    let heights: Vec<T> = squares.iter().map(|&s| s / mass).collect();
    let m = heights.len();
    let mut atoms = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        let next = if i + 1 < m { heights[i + 1] } else { T::zero() };
        let w = (heights[i] - next) * points[i + 1];
        if w < T::zero() {
            return Err(Error::ShapeViolation { at: points[i + 1].as_f64() });
        }
        atoms.push(points[i + 1]);
        weights.push(w);
    }
    // Σ wᵢ telescopes to Σ hᵢ (xᵢ − x_{i−1}) = 1 up to rounding.
    let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    for w in &mut weights {
        *w = *w / total;
    }
    let mixture = AtomicMixture::new(atoms, weights)?;
    let final_epsilon = *epsilons.last().unwrap();
    let trace = PartitionTrace {
        piece_count: m,
        steps: epsilons.len() - 1,
        breakpoints: points,
        epsilons,
        final_epsilon,
        constant_k0: k0(),
    };
    Ok((mixture, trace))
}

fn check_shape<T: Scalar, F: Fn(T) -> T>(f: &F, support: T, bound: T) -> Result<()> {
    let at_zero = f(T::zero());
    if !at_zero.is_finite() {
        return Err(Error::BoundViolation {
            value: at_zero.as_f64(),
            bound: bound.as_f64(),
        });
    }
    if at_zero > bound {
        return Err(Error::BoundViolation {
            value: at_zero.as_f64(),
            bound: bound.as_f64(),
        });
    }
    let cells = T::from_usize(SHAPE_CHECK_POINTS).unwrap();
    let mut prev = at_zero;
    for k in 1..=SHAPE_CHECK_POINTS {
        let x = support * T::from_usize(k).unwrap() / cells;
        let v = f(x);
        let slack = T::epsilon() * T::lit(16.0) * prev.abs().max(T::one());
        if v < -slack || v > prev + slack || v.is_nan() {
            return Err(Error::ShapeViolation { at: x.as_f64() });
        }
        prev = v;
    }
    Ok(())
}

/// `KL(f, g)` for an analytic `f` on `[0, support]` against a step density,
/// integrated piece by piece with adaptive Simpson.
pub fn kl_against_step<F: Fn(f64) -> f64>(f: &F, g: &StepDensity<f64>, support: f64, tol: f64) -> f64 {
    let integrand = |x: f64, h: f64| {
        let v = f(x);
        if v > 0.0 { v * (v / h).ln() } else { 0.0 }
    };
    let mut total = 0.0;
    for (l, r, h) in g.iter_pieces() {
        if l >= support {
            break;
        }
        let r = r.min(support);
        if h <= 0.0 {
            if adaptive_simpson(f, l, r, tol) > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        total += adaptive_simpson(&|x| integrand(x, h), l, r, tol);
    }
    if g.right_end() < support && adaptive_simpson(f, g.right_end(), support, tol) > tol {
        return f64::INFINITY;
    }
    total
}
