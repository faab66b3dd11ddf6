//! Moment functionals of distributions and their growth.
//!
//! Moments are computed on the distribution side, `M_n(xi) = <<Phi, <., xi>^n>>`,
//! so they are exact up to rounding. Growth is then either certified against
//! the `K C^n n! |xi|_p^n` bound with explicit constants, or classified onto
//! the `(n!)^{(1+beta)/2}` scale by a log-linear fit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chaos::{dual_norm, pair, ChaosElement, Role};
use crate::error::{Error, Result};
use crate::hilbert_scale::{norm_p, Coords, WeightSequence};
use crate::special::{bessel_i0, factorial, ln_factorial};

/// Slack on the fitted exponent before a sequence is declared beyond the
/// `beta <= 1` scale.
pub const ALPHA_FIT_TOLERANCE: f64 = 0.05;
pub const MAX_POLARIZATION_ORDER: usize = 12;
const MIN_FIT_POINTS: usize = 5;

/// Directional moments `M_0..M_N` along `direction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub direction: Coords,
    pub xi_norm_p: f64,
    pub p: f64,
    /// Set when some moments were computed beyond the truncation degree of
    /// a truncated distribution.
    #[serde(default)]
    pub approximate: bool,
    /// Optional absolute moments `∫ |t|^n dnu`, for sequences coming from a
    /// known measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absolute: Option<Vec<f64>>,
}

impl MomentSequence {
    pub fn new(values: Vec<f64>, direction: Coords, p: f64, w: &WeightSequence) -> Result<Self> {
        let xi_norm_p = norm_p(&direction, p, w)?;
        let ms = Self {
            values,
            direction,
            xi_norm_p,
            p,
            approximate: false,
            absolute: None,
        };
        ms.validate()?;
        Ok(ms)
    }

    /// A one-dimensional sequence with unit direction, for moments supplied
    /// directly (e.g. of a known measure on the line).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(
            values,
            Coords::new(vec![1.0]),
            0.0,
            &WeightSequence::unit(1),
        )
    }

    pub fn with_absolute(mut self, absolute: Vec<f64>) -> Result<Self> {
        self.absolute = Some(absolute);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() < 3 {
            return Err(Error::InsufficientMoments(format!(
                "need at least M_0..M_2, got {} values",
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("moments must be finite".into()));
        }
        if !(self.xi_norm_p.is_finite() && self.xi_norm_p > 0.0) {
            return Err(Error::InvalidParameter("direction must be nonzero".into()));
        }
        if let Some(abs) = &self.absolute {
            if abs.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(
                    "absolute moments must be finite and non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Highest moment order `N`.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    /// Checks the stored `|xi|_p` against the weights.
    pub fn is_consistent(&self, w: &WeightSequence) -> Result<bool> {
        let v = norm_p(&self.direction, self.p, w)?;
        Ok((v - self.xi_norm_p).abs() <= 1e-12 * v)
    }
}

/// How to treat moments whose order exceeds the degree of a truncated
/// distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Refuse such moments.
    Exact,
    /// Compute them from the available kernels and mark the result approximate.
    AllowApproximate,
}

fn check_truncation(big_phi: &ChaosElement, n: usize, truncation: Truncation) -> Result<bool> {
    let beyond = big_phi.is_truncated() && n > big_phi.max_degree();
    if beyond && truncation == Truncation::Exact {
        return Err(Error::Truncation {
            requested: n,
            available: big_phi.max_degree(),
        });
    }
    Ok(beyond)
}

/// `<<Phi, <., xi>^n>>` without truncation checks.
pub(crate) fn directional_moment(
    big_phi: &ChaosElement,
    xi: &Coords,
    n: usize,
    w: &WeightSequence,
) -> Result<f64> {
    pair(big_phi, &ChaosElement::monomial(xi, n, Role::Test)?, w)
}

pub fn directional_moments(
    big_phi: &ChaosElement,
    xi: &Coords,
    n_max: usize,
    w: &WeightSequence,
    truncation: Truncation,
) -> Result<MomentSequence> {
    big_phi.expect_role(Role::Distribution)?;
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!(
            "moment order N = {n_max} must be >= 2"
        )));
    }
    let approximate = check_truncation(big_phi, n_max, truncation)?;
    let values = (0..=n_max)
        .map(|n| directional_moment(big_phi, xi, n, w))
        .collect::<Result<Vec<_>>>()?;
    let mut ms = MomentSequence::new(values, xi.clone(), 0.0, w)?;
    ms.approximate = approximate;
    Ok(ms)
}

/// Same as [`directional_moments`] but records `|xi|_p` for the given `p`.
pub fn directional_moments_p(
    big_phi: &ChaosElement,
    xi: &Coords,
    n_max: usize,
    p: f64,
    w: &WeightSequence,
    truncation: Truncation,
) -> Result<MomentSequence> {
    let mut ms = directional_moments(big_phi, xi, n_max, w, truncation)?;
    ms.p = p;
    ms.xi_norm_p = norm_p(xi, p, w)?;
    Ok(ms)
}

/// `M_n(xi_1, ..., xi_n)` by polarization:
/// `(2^n n!)^{-1} sum_{s in {±1}^n} s_1...s_n M_n(sum_i s_i xi_i)`.
pub fn polarized_moment(
    big_phi: &ChaosElement,
    xis: &[Coords],
    w: &WeightSequence,
    truncation: Truncation,
) -> Result<f64> {
    big_phi.expect_role(Role::Distribution)?;
    let n = xis.len();
    if n > MAX_POLARIZATION_ORDER {
        return Err(Error::PolarizationOrder(n));
    }
    check_truncation(big_phi, n, truncation)?;
    if n == 0 {
        return directional_moment(big_phi, &Coords::zeros(big_phi.dim()), 0, w);
    }
    for xi in xis {
        w.check_dim(xi.dim())?;
    }
    // M_n(-eta) = (-1)^n M_n(eta): fix s_1 = +1 and double
    let mut acc = 0.0;
    for mask in 0u32..(1 << (n - 1)) {
        let mut eta = xis[0].clone();
        let mut sign = 1.0;
        for (i, xi) in xis.iter().enumerate().skip(1) {
            if mask >> (i - 1) & 1 == 1 {
                eta.axpy(-1.0, xi);
                sign = -sign;
            } else {
                eta.axpy(1.0, xi);
            }
        }
        acc += sign * directional_moment(big_phi, &eta, n, w)?;
    }
    Ok(2.0 * acc / ((n as f64).exp2() * factorial(n)))
}

/// Growth exponent on the Kondratiev scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Beta {
    Value(f64),
    ExceedsScale,
}

/// Constants witnessing `|M_n| <= K C^n (n!)^alpha |xi|_p^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub k: f64,
    pub c: f64,
    pub p: f64,
    pub q: Option<f64>,
    pub alpha_fit: f64,
    pub beta: Beta,
}

impl GrowthCertificate {
    pub fn bound(&self, n: usize, xi_norm_p: f64) -> f64 {
        self.k
            * self.c.powi(n as i32)
            * factorial(n).powf(self.alpha_fit)
            * xi_norm_p.powi(n as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundCertificate {
    pub certificate: GrowthCertificate,
    pub moments: Vec<f64>,
    pub bounds: Vec<f64>,
    pub margins: Vec<f64>,
}

impl MomentBoundCertificate {
    pub fn holds(&self) -> bool {
        self.margins.iter().all(|&m| m >= 0.0)
    }
}

/// The `n!`-moment bound with `K = sqrt(I0(2^-q)) ||Phi||_{-p,-q,-1}` and
/// `C = e 2^{q/2}`, checked for `n <= n_max`.
pub fn moment_bound_certificate(
    big_phi: &ChaosElement,
    xi: &Coords,
    p: f64,
    q: f64,
    n_max: usize,
    w: &WeightSequence,
) -> Result<MomentBoundCertificate> {
    if p < 0.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 0")));
    }
    let k = bessel_i0((-q).exp2()).sqrt() * dual_norm(big_phi, p, q, w)?;
    let c = std::f64::consts::E * (0.5 * q).exp2();
    let xi_p = norm_p(xi, p, w)?;
    let certificate = GrowthCertificate {
        k,
        c,
        p,
        q: Some(q),
        alpha_fit: 1.0,
        beta: Beta::Value(1.0),
    };
    let mut moments = Vec::with_capacity(n_max + 1);
    let mut bounds = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        moments.push(directional_moment(big_phi, xi, n, w)?);
        bounds.push(certificate.bound(n, xi_p));
    }
    let margins = bounds
        .iter()
        .zip(&moments)
        .map(|(b, m)| b - m.abs())
        .collect();
    Ok(MomentBoundCertificate {
        certificate,
        moments,
        bounds,
        margins,
    })
}

/// Least-squares fit of `log|M_n| ≈ log K + n log C + alpha log n!` over even
/// `n` with `M_n != 0`; `beta = 2 alpha - 1` clamped to `[0, 1]`.
///
/// The returned `C` is normalised by `|xi|_p` and `K` is raised to the
/// smallest value for which the fitted bound covers every supplied moment.
pub fn classify_growth(ms: &MomentSequence) -> Result<GrowthCertificate> {
    let points: Vec<(usize, f64)> = ms
        .values
        .iter()
        .enumerate()
        .filter(|(n, v)| n % 2 == 0 && **v != 0.0)
        .map(|(n, v)| (n, v.abs().ln()))
        .collect();
    if points.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientMoments(format!(
            "{} usable even moments, need at least {MIN_FIT_POINTS}",
            points.len()
        )));
    }
    let design = DMatrix::from_fn(points.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => points[i].0 as f64,
        _ => ln_factorial(points[i].0),
    });
    let rhs = DVector::from_iterator(points.len(), points.iter().map(|(_, y)| *y));
    let coef = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Domain(format!("growth fit failed: {e}")))?;
    let alpha = coef[2];
    let c = coef[1].exp() / ms.xi_norm_p;
    let beta = if alpha > 1.0 + ALPHA_FIT_TOLERANCE {
        Beta::ExceedsScale
    } else {
        Beta::Value((2.0 * alpha - 1.0).clamp(0.0, 1.0))
    };
    let mut cert = GrowthCertificate {
        k: 1.0,
        c,
        p: ms.p,
        q: None,
        alpha_fit: alpha,
        beta,
    };
    cert.k = ms
        .values
        .iter()
        .enumerate()
        .map(|(n, v)| v.abs() / cert.bound(n, ms.xi_norm_p))
        .fold(f64::MIN_POSITIVE, f64::max);
    Ok(cert)
}
