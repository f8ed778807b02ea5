use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Right-closed piecewise-constant non-increasing density.
///
/// Piece `j` covers `(knots[j], knots[j + 1]]` with value `heights[j]`. The
/// density is zero past the last knot, and its value at 0 is `heights[0]`,
/// the limit from the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDensity<T> {
    knots: Vec<T>,
    heights: Vec<T>,
    support_bound: Option<T>,
}

impl<T: Scalar> StepDensity<T> {
    /// Builds a step density, checking shape, normalization and support.
    ///
    /// `support_bound = None` marks the density as living on the half line.
    pub fn new(knots: Vec<T>, heights: Vec<T>, support_bound: Option<T>) -> Result<Self> {
        let invalid = |msg: &str| Error::InvalidStepDensity(msg.to_string());
        if heights.is_empty() {
            return Err(invalid("at least one piece is required"));
        }
        if knots.len() != heights.len() + 1 {
            return Err(invalid("knots must have exactly one more entry than heights"));
        }
        if knots[0] != T::zero() {
            return Err(invalid("first knot must be 0"));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) || knots.iter().any(|k| !k.is_finite()) {
            return Err(invalid("knots must be finite and strictly increasing"));
        }
        if heights.iter().any(|h| !h.is_finite() || *h < T::zero()) {
            return Err(invalid("heights must be finite and non-negative"));
        }
        if heights.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("heights must be non-increasing"));
        }
        if let Some(bound) = support_bound {
            if !(bound > T::zero()) || *knots.last().unwrap() > bound {
                return Err(invalid("last knot exceeds the support bound"));
            }
        }
        let density = Self {
            knots,
            heights,
            support_bound,
        };
        let mass = density.total_mass();
        if (mass - T::one()).abs() > T::mass_tolerance() {
            return Err(Error::InvalidStepDensity(format!(
                "total mass {mass} differs from 1"
            )));
        }
        Ok(density)
    }

    /// Uniform density on `[0, width]`.
    pub fn uniform(width: T) -> Result<Self> {
        Self::new(vec![T::zero(), width], vec![T::one() / width], Some(width))
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn heights(&self) -> &[T] {
        &self.heights
    }

    pub fn support_bound(&self) -> Option<T> {
        self.support_bound
    }

    pub fn pieces(&self) -> usize {
        self.heights.len()
    }

    /// Right end of the last piece; the density vanishes beyond it.
    pub fn right_end(&self) -> T {
        *self.knots.last().unwrap()
    }

    /// `f(0⁺)`, the largest value of the density.
    pub fn at_zero(&self) -> T {
        self.heights[0]
    }

    pub fn total_mass(&self) -> T {
        self.knots
            .windows(2)
            .zip(&self.heights)
            .fold(T::zero(), |acc, (w, &h)| acc + h * (w[1] - w[0]))
    }

    pub fn eval(&self, x: T) -> T {
        if x <= T::zero() {
            return self.heights[0];
        }
        // First knot >= x closes the piece containing x.
        let j = self.knots.partition_point(|&u| u < x);
        if j >= self.knots.len() {
            T::zero()
        } else {
            self.heights[j - 1]
        }
    }

    pub fn cdf(&self, x: T) -> T {
        if x <= T::zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for (w, &h) in self.knots.windows(2).zip(&self.heights) {
            if x >= w[1] {
                acc = acc + h * (w[1] - w[0]);
            } else {
                acc = acc + h * (x - w[0]);
                break;
            }
        }
        acc.min(T::one())
    }

    /// Iterates over `(left, right, height)` for every piece.
    pub fn iter_pieces(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.knots
            .windows(2)
            .zip(&self.heights)
            .map(|(w, &h)| (w[0], w[1], h))
    }
}
