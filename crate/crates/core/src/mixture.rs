use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, weighted::WeightedAliasIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::step::StepDensity;

/// Finite atomic mixing distribution `P = Σ pᵢ δ_{θᵢ}` over uniform kernel scales.
///
/// The induced density is `f_P(x) = Σ pᵢ 𝟙[x ≤ θᵢ] / θᵢ`, a non-increasing
/// step function with jumps at the atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMixture<T> {
    atoms: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> AtomicMixture<T> {
    pub fn new(atoms: Vec<T>, weights: Vec<T>) -> Result<Self> {
        let invalid = |msg: String| Error::InvalidMixture(msg);
        if atoms.is_empty() {
            return Err(invalid("at least one atom is required".into()));
        }
        if atoms.len() != weights.len() {
            return Err(invalid(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.iter().any(|a| !a.is_finite() || *a <= T::zero()) {
            return Err(invalid("atoms must be finite and strictly positive".into()));
        }
        if atoms.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("atoms must be strictly increasing".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(invalid("weights must be finite and non-negative".into()));
        }
        let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        if (total - T::one()).abs() > T::simplex_tolerance() {
            return Err(invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    /// Single kernel: the uniform density on `[0, theta]`.
    pub fn point(theta: T) -> Result<Self> {
        Self::new(vec![theta], vec![T::one()])
    }

    /// Sorts `(atom, weight)` pairs, merges coincident atoms and renormalizes
    /// away accumulated rounding in the weights.
    pub fn from_unsorted(mut pairs: Vec<(T, T)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atoms must not be NaN"));
        let mut atoms: Vec<T> = Vec::with_capacity(pairs.len());
        let mut weights: Vec<T> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match atoms.last() {
                Some(&last) if last == a => {
                    let k = weights.len() - 1;
                    weights[k] = weights[k] + w;
                }
                _ => {
                    atoms.push(a);
                    weights.push(w);
                }
            }
        }
        let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        if !(total > T::zero()) {
            return Err(Error::InvalidMixture("weights sum to zero".into()));
        }
        if (total - T::one()).abs() > T::lit(1e-6) {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, not 1")));
        }
        for w in &mut weights {
            *w = *w / total;
        }
        Self::new(atoms, weights)
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn max_atom(&self) -> T {
        *self.atoms.last().unwrap()
    }

    /// Fails if some atom exceeds the support bound `bound`.
    pub fn check_bound(&self, bound: T) -> Result<()> {
        if self.max_atom() > bound {
            return Err(Error::InvalidMixture(format!(
                "atom {} exceeds the support bound {bound}",
                self.max_atom()
            )));
        }
        Ok(())
    }

    /// Evaluates `f_P(x)`. Terms are accumulated in increasing atom order.
    pub fn eval(&self, x: T) -> T {
        let start = self.atoms.partition_point(|&a| a < x);
        self.atoms[start..]
            .iter()
            .zip(&self.weights[start..])
            .fold(T::zero(), |acc, (&a, &w)| acc + w / a)
    }

    /// The induced density as an explicit step function with knots at the atoms.
    pub fn to_step(&self, support_bound: Option<T>) -> Result<StepDensity<T>> {
        let m = self.atoms.len();
        let mut heights = vec![T::zero(); m];
        let mut acc = T::zero();
        for j in (0..m).rev() {
            acc = acc + self.weights[j] / self.atoms[j];
            heights[j] = acc;
        }
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(T::zero());
        knots.extend_from_slice(&self.atoms);
        StepDensity::new(knots, heights, support_bound)
    }

    /// Draws `n` i.i.d. observations from `f_P`: an atom from `P`, then a
    /// uniform point on `(0, θ]`.
    pub fn sample_iid(&self, n: usize, seed: u64) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<T> {
        if n == 0 {
            return Vec::new();
        }
        let weights: Vec<f64> = self.weights.iter().map(|w| w.as_f64()).collect();
        let index = WeightedAliasIndex::new(weights).expect("weights form a distribution");
        (0..n)
            .map(|_| {
                let theta = self.atoms[index.sample(rng)].as_f64();
                let u: f64 = rng.random();
                T::lit(theta * (1.0 - u))
            })
            .collect()
    }
}
