//! Truncated Gelfand triple as a weighted coordinate space.
//!
//! A single non-decreasing weight sequence `lambda_1 <= ... <= lambda_d`, all
//! at least one, generates the whole Hilbert scale: the `p`-norm of a vector
//! is `sqrt(sum_k lambda_k^{2p} v_k^2)`. Positive `p` gives test-function
//! norms, negative `p` the dual norms, and `p = 0` the base Euclidean norm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenweights of the Hilbert scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightSequence {
    weights: Vec<f64>,
}

impl WeightSequence {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("dimension must be at least 1".into()));
        }
        for (k, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 1.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {} = {} must be finite and >= 1",
                    k + 1,
                    w
                )));
            }
            if k > 0 && w < weights[k - 1] {
                return Err(Error::InvalidWeights(format!(
                    "weights must be non-decreasing (weight {} = {} < {})",
                    k + 1,
                    w,
                    weights[k - 1]
                )));
            }
        }
        Ok(Self { weights })
    }

    /// Canonical harmonic weights `lambda_k = k + 1`, `k = 1..=d`.
    pub fn harmonic(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            weights: (1..=dim).map(|k| k as f64 + 1.0).collect(),
        }
    }

    /// All weights equal to one; every `p`-norm is then the Euclidean norm.
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            weights: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_harmonic(&self) -> bool {
        self.weights
            .iter()
            .enumerate()
            .all(|(i, &w)| w == i as f64 + 2.0)
    }

    /// `lambda_k^{2p}` for every coordinate.
    pub(crate) fn squared_scales(&self, p: f64) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(move |&l| l.powf(2.0 * p))
    }

    /// Errors unless `found` equals the dimension.
    pub fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for WeightSequence {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WeightSequence> for Vec<f64> {
    fn from(value: WeightSequence) -> Self {
        value.weights
    }
}

/// A point of the truncated coordinate space, in the eigenbasis of the weights.
///
/// The same type carries test directions and distribution-side points; which
/// role it plays is decided by the norm index applied to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coords(Vec<f64>);

impl Coords {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Unit coordinate vector `e_k` (zero-based index).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Base-space inner product `<a, b>_0`.
    pub fn dot(&self, other: &Coords) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm0(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Coords {
        Coords(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn axpy(&mut self, factor: f64, other: &Coords) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += factor * b;
        }
    }
}

impl From<Vec<f64>> for Coords {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// `<a, b>_p = sum_k lambda_k^{2p} a_k b_k`.
pub fn inner_p(a: &Coords, b: &Coords, p: f64, w: &WeightSequence) -> Result<f64> {
    w.check_dim(a.dim())?;
    w.check_dim(b.dim())?;
    Ok(w.squared_scales(p)
        .zip(a.as_slice().iter().zip(b.as_slice()))
        .map(|(s, (x, y))| s * x * y)
        .sum())
}

/// `|v|_p`; negative `p` gives the dual norm.
pub fn norm_p(v: &Coords, p: f64, w: &WeightSequence) -> Result<f64> {
    Ok(inner_p(v, v, p, w)?.sqrt())
}

/// Hilbert-Schmidt norm of the embedding `H_{p'} -> H_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HsNorm {
    pub value: f64,
    /// Only reported for harmonic weights, where the untruncated series
    /// `sum_k (k+1)^{-2(p'-p)}` converges iff `p' - p > 1/2`.
    pub untruncated_converges: Option<bool>,
}

pub fn hs_norm(p: f64, p_prime: f64, w: &WeightSequence) -> Result<HsNorm> {
    if !(p_prime > p) {
        return Err(Error::EmbeddingDirection { p, p_prime });
    }
    let gap = p_prime - p;
    let value = w
        .weights()
        .iter()
        .map(|&l| l.powf(-2.0 * gap))
        .sum::<f64>()
        .sqrt();
    let untruncated_converges = w.is_harmonic().then_some(gap > 0.5);
    Ok(HsNorm {
        value,
        untruncated_converges,
    })
}

/// Supremum of the admissible `alpha` in [`gaussian_quadratic_integral`].
pub fn max_admissible_alpha(p: f64, w: &WeightSequence) -> f64 {
    w.squared_scales(p).fold(f64::INFINITY, f64::min) / 2.0
}

/// Closed form of `∫ exp(alpha |x|_{-p}^2) dmu(x)` for the standard Gaussian
/// `mu` on the truncated space: `prod_k (1 - 2 alpha lambda_k^{-2p})^{-1/2}`.
pub fn gaussian_quadratic_integral(alpha: f64, p: f64, w: &WeightSequence) -> Result<f64> {
    let mut log_value = 0.0;
    for (index, s) in w.squared_scales(-p).enumerate() {
        let factor = 2.0 * alpha * s;
        if factor >= 1.0 {
            return Err(Error::GaussianDivergence { index, factor });
        }
        log_value -= 0.5 * (-factor).ln_1p();
    }
    Ok(log_value.exp())
}
