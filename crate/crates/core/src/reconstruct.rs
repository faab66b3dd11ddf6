//! Representing measures from moments.
//!
//! Moments are turned into three-term recurrence coefficients with the
//! Chebyshev algorithm, and the Jacobi matrix is diagonalised to obtain the
//! Gauss rule. The rule reproduces `M_0..M_{2m-1}` and is the finite-order
//! stand-in for the measure behind a positive distribution.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chaos::{
    gaussian_product_expectation, pair, wick_from_monomial, ChaosElement, RankOneKernel, Role,
};
use crate::error::{Error, Result};
use crate::hilbert_scale::{Coords, WeightSequence};
use crate::moments::{directional_moments, MomentSequence, Truncation};
use crate::positivity::min_eigenpair;
use crate::special::factorial;

pub const MAX_NODES: usize = 12;
/// Above this many nodes the recurrence is flagged as ill-conditioned.
pub const CONDITIONING_WARNING: usize = 8;
pub const PAIRING_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiCoefficients {
    /// Diagonal `a_0..a_{m-1}`.
    pub a: Vec<f64>,
    /// Off-diagonal `b_1..b_{m-1}`, all positive.
    pub b: Vec<f64>,
    pub mass: f64,
    pub ill_conditioned: bool,
}

impl JacobiCoefficients {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Relative threshold below which the Hankel matrix is not treated as
/// strictly positive definite.
fn strict_threshold(m: usize) -> f64 {
    64.0 * m as f64 * f64::EPSILON
}

/// Recurrence coefficients of the orthogonal polynomials of `ms`.
///
/// Needs `M_0..M_{2m-1}` and a strictly positive definite `m x m` Hankel
/// matrix; an `m`-atom measure already has a singular `(m+1) x (m+1)` one.
pub fn jacobi_from_moments(ms: &MomentSequence, m: usize) -> Result<JacobiCoefficients> {
    if m == 0 || m > MAX_NODES {
        return Err(Error::InvalidParameter(format!(
            "node count m = {m} must be in 1..={MAX_NODES}"
        )));
    }
    if ms.order() < 2 * m - 1 {
        return Err(Error::InsufficientMoments(format!(
            "{m} nodes need moments up to order {}, have {}",
            2 * m - 1,
            ms.order()
        )));
    }
    let mu = &ms.values[..2 * m];
    let hankel: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|k| mu[j + k]).collect())
        .collect();
    let (min_eigenvalue, _) = min_eigenpair(&hankel);
    let scale = hankel.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !(min_eigenvalue > strict_threshold(m) * scale) {
        return Err(Error::NotStrictlyPositive {
            order: m,
            min_eigenvalue,
        });
    }

    // sigma_{k,l} rows, indexed by l
    let len = 2 * m;
    let mut prev = vec![0.0; len];
    let mut cur = mu.to_vec();
    let mut alpha = vec![mu[1] / mu[0]];
    let mut beta = vec![mu[0]];
    for k in 1..m {
        let mut next = vec![0.0; len];
        for l in k..(2 * m - k) {
            next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta[k - 1] * prev[l];
        }
        let bk = next[k] / cur[k - 1];
        if !(bk > 0.0) {
            return Err(Error::NotStrictlyPositive {
                order: m,
                min_eigenvalue,
            });
        }
        alpha.push(next[k + 1] / next[k] - cur[k] / cur[k - 1]);
        beta.push(bk);
        prev = cur;
        cur = next;
    }
    Ok(JacobiCoefficients {
        a: alpha,
        b: beta[1..].iter().map(|x| x.sqrt()).collect(),
        mass: mu[0],
        ill_conditioned: m > CONDITIONING_WARNING,
    })
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
struct RawMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Finitely supported positive measure on the line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure")]
pub struct DiscreteMeasure {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.nodes, raw.weights)
    }
}

impl DiscreteMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "measure needs matching non-empty nodes and weights, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        if let Some(x) = nodes.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite node {x}")));
        }
        if let Some(x) = weights.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "weights must be positive and finite, got {x}"
            )));
        }
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidParameter(
                "nodes must be strictly increasing".into(),
            ));
        }
        let total_mass = weights.iter().sum();
        Ok(DiscreteMeasure {
            nodes,
            weights,
            total_mass,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest degree integrated exactly when the measure is a Gauss rule.
    pub fn exactness_degree(&self) -> usize {
        2 * self.len() - 1
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points().map(|(t, w)| w * f(t)).sum()
    }

    pub fn moment(&self, n: usize) -> f64 {
        self.integrate(|t| t.powi(n as i32))
    }

    pub fn abs_moment(&self, n: usize) -> f64 {
        self.integrate(|t| t.abs().powi(n as i32))
    }

    pub fn moments(&self, n_max: usize) -> Result<MomentSequence> {
        MomentSequence::from_values((0..=n_max).map(|n| self.moment(n)).collect())?
            .with_absolute((0..=n_max).map(|n| self.abs_moment(n)).collect())
    }
}

/// Golub–Welsch: nodes are the eigenvalues of the leading `m x m` Jacobi
/// matrix, weights the squared first eigenvector components times the mass.
pub fn gauss_rule(jc: &JacobiCoefficients, m: usize) -> Result<DiscreteMeasure> {
    if m == 0 || m > jc.len() {
        return Err(Error::InvalidParameter(format!(
            "rule size {m} needs 1..={} recurrence coefficients",
            jc.len()
        )));
    }
    let jacobi = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            jc.a[i]
        } else if i.abs_diff(j) == 1 {
            jc.b[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut points: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            (
                eig.eigenvalues[k],
                jc.mass * eig.eigenvectors[(0, k)].powi(2),
            )
        })
        .collect();
    points.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (nodes, weights) = points.into_iter().unzip();
    DiscreteMeasure::new(nodes, weights)
}

/// Moments to `m`-point Gauss rule in one step.
pub fn reconstruct(ms: &MomentSequence, m: usize) -> Result<DiscreteMeasure> {
    gauss_rule(&jacobi_from_moments(ms, m)?, m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
}

impl PairingRow {
    pub fn holds(&self) -> bool {
        self.diff <= PAIRING_TOLERANCE * (1.0 + self.lhs.abs())
    }
}

fn check_exactness(dm: &DiscreteMeasure, max_deg: usize) -> Result<()> {
    if max_deg > dm.exactness_degree() {
        return Err(Error::ExactnessExceeded {
            degree: max_deg,
            limit: dm.exactness_degree(),
        });
    }
    Ok(())
}

/// Compares `<<Phi, <., xi>^n>>` with `sum_i w_i t_i^n` for `n <= max_deg`.
pub fn verify_pairing(
    big_phi: &ChaosElement,
    dm: &DiscreteMeasure,
    xi: &Coords,
    max_deg: usize,
    w: &WeightSequence,
) -> Result<Vec<PairingRow>> {
    check_exactness(dm, max_deg)?;
    let ms = directional_moments(big_phi, xi, max_deg.max(2), w, Truncation::Exact)?;
    verify_moments(&ms, dm, max_deg)
}

/// Same as [`verify_pairing`] against a stored moment sequence.
pub fn verify_moments(
    ms: &MomentSequence,
    dm: &DiscreteMeasure,
    max_deg: usize,
) -> Result<Vec<PairingRow>> {
    check_exactness(dm, max_deg)?;
    if max_deg > ms.order() {
        return Err(Error::InsufficientMoments(format!(
            "degree {max_deg} requested, moments known up to {}",
            ms.order()
        )));
    }
    Ok((0..=max_deg)
        .map(|n| {
            let lhs = ms.values[n];
            let rhs = dm.moment(n);
            PairingRow {
                n,
                lhs,
                rhs,
                diff: (lhs - rhs).abs(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanReport {
    pub partial_sum: f64,
    /// `M_{2n}^{-1/(2n)}` for `n = 1..`.
    pub terms: Vec<f64>,
    /// Fitted exponent `s` in `term_n ~ c n^s`.
    pub slope: f64,
    /// Heuristic: terms decay no faster than `c/n` (up to a 0.1 margin).
    pub diverging: bool,
}

/// Carleman's sufficient condition for determinacy, estimated from a finite
/// moment sequence. The flag is a fit to the tail, not a proof.
pub fn carleman_check(ms: &MomentSequence) -> Result<CarlemanReport> {
    let half = ms.order() / 2;
    if half < 3 {
        return Err(Error::InsufficientMoments(format!(
            "Carleman check needs even moments up to order 6, have {}",
            ms.order()
        )));
    }
    let mut terms = Vec::with_capacity(half);
    for n in 1..=half {
        let m2n = ms.values[2 * n];
        if !(m2n > 0.0) {
            return Err(Error::Domain(format!(
                "even moment M_{} = {m2n} is not positive",
                2 * n
            )));
        }
        terms.push((-m2n.ln() / (2 * n) as f64).exp());
    }
    let partial_sum = terms.iter().sum();
    // least squares of ln term_n on ln n over the upper half
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .enumerate()
        .skip(half / 2)
        .map(|(i, t)| (((i + 1) as f64).ln(), t.ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(CarlemanReport {
        partial_sum,
        terms,
        slope,
        diverging: slope >= -1.1,
    })
}

/// The truncated density `exp(<x, y> - |y|^2/2)` with the exponential
/// replaced by its Taylor polynomial of degree `n_max`, in the Wick basis.
pub fn exponential_density(y: &Coords, n_max: usize) -> Result<ChaosElement> {
    let y2 = y.dot(y);
    let norm = y2.sqrt();
    let damp = (-y2 / 2.0).exp();
    let mut coefs = vec![0.0; n_max + 1];
    for n in 0..=n_max {
        for (k, c) in wick_from_monomial(n, norm) {
            coefs[k] += damp * c / factorial(n);
        }
    }
    let mut out = ChaosElement::zero(y.dim(), Role::Test);
    for (k, c) in coefs.into_iter().enumerate() {
        if k == 0 {
            out.push(RankOneKernel::new(0, c, Coords::zeros(y.dim())))?;
        } else if !y.is_zero() {
            out.push(RankOneKernel::new(k, c, y.clone()))?;
        }
    }
    Ok(out)
}

fn random_test_polynomial(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_degree: usize,
) -> Result<ChaosElement> {
    let mut psi = ChaosElement::zero(dim, Role::Test);
    for _ in 0..rng.random_range(1..=3) {
        let degree = rng.random_range(0..=max_degree);
        let coef = rng.random_range(-1.0..1.0);
        let mut dir = Coords::new((0..dim).map(|_| StandardNormal.sample(&mut *rng)).collect());
        let n = dir.norm0();
        if degree == 0 {
            dir = Coords::zeros(dim);
        } else if n > 0.0 {
            dir = dir.scaled(1.0 / n);
        } else {
            continue;
        }
        psi.push(RankOneKernel::new(degree, coef, dir))?;
    }
    Ok(psi)
}

/// Largest `|<<Phi, psi>> - E_mu[density * psi]|` over random polynomial
/// test functions `psi` of degree at most 4. Both sides are exact Wick
/// algebra; only `psi` is random.
pub fn radon_nikodym_check(
    big_phi: &ChaosElement,
    density: &ChaosElement,
    samples: usize,
    seed: u64,
    w: &WeightSequence,
) -> Result<f64> {
    density.expect_role(Role::Test)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let psi = random_test_polynomial(&mut rng, w.dim(), 4)?;
        let lhs = pair(big_phi, &psi, w)?;
        let rhs = gaussian_product_expectation(density, &psi, w)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
