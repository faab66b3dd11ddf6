//! Exponential integrability of positive distributions.
//!
//! A distribution satisfying the `n!`-moment bound integrates
//! `exp(eps |x|_{-p'})` whenever the embedding `H_p -> H_{p'}` is
//! Hilbert–Schmidt and `eps < (e 2^{1+q/2} ||i||_HS)^{-1}`. Conversely an
//! exponentially integrable measure pairs continuously with test functions.
//!
//! Radial moments `∫ |x|_{-p'}^n dν` are computed exactly: from Wick algebra
//! for distributions, from nodes or closed forms for measures.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bounds::c_constant_upper;
use crate::chaos::{dual_norm, eval, norm_pqb, pair, ChaosElement, Role};
use crate::error::{Error, Result};
use crate::hilbert_scale::{hs_norm, Coords, WeightSequence};
use crate::moments::{moment_bound_certificate, MomentSequence};
use crate::reconstruct::DiscreteMeasure;
use crate::special::{bessel_i0, factorial, hermite_scaled_coefficients, ln_factorial};

pub const DEFAULT_SERIES_TERMS: usize = 60;
/// Limit on `n_max * d` for the radial moment expansion.
pub const RADIAL_GUARD: usize = 1_000_000;
/// Limit on tensor-grid size for product measures.
pub const GRID_GUARD: usize = 1_000_000;
const FORWARD_CERTIFICATE_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub p: f64,
    pub q: f64,
    pub p_prime: f64,
}

impl ScaleParams {
    pub fn new(p: f64, q: f64, p_prime: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p_prime.is_finite()) {
            return Err(Error::InvalidParameter(
                "scale indices must be finite".into(),
            ));
        }
        if q < 0.0 {
            return Err(Error::InvalidParameter(format!("q = {q} must be >= 0")));
        }
        if p_prime <= p {
            return Err(Error::EmbeddingDirection { p, p_prime });
        }
        Ok(Self { p, q, p_prime })
    }

    /// `||i_p^{p'}||_HS`.
    pub fn hs(&self, w: &WeightSequence) -> Result<f64> {
        Ok(hs_norm(self.p, self.p_prime, w)?.value)
    }

    /// `(e 2^{1+q/2} hs)^{-1}`.
    pub fn threshold(&self, w: &WeightSequence) -> Result<f64> {
        Ok(1.0 / (std::f64::consts::E * (1.0 + 0.5 * self.q).exp2() * self.hs(w)?))
    }
}

/// Constants of a moment bound `|M_n| <= K C^n n! prod |xi_j|_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstants {
    pub k: f64,
    pub c: f64,
}

impl GrowthConstants {
    /// `K = sqrt(I0(2^-q)) ||Phi||_{-p,-q,-1}`, `C = e 2^{q/2}`.
    pub fn for_distribution(
        big_phi: &ChaosElement,
        p: f64,
        q: f64,
        w: &WeightSequence,
    ) -> Result<Self> {
        Ok(Self {
            k: bessel_i0((-q).exp2()).sqrt() * dual_norm(big_phi, p, q, w)?,
            c: std::f64::consts::E * (0.5 * q).exp2(),
        })
    }
}

/// Where radial moments come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Distribution(ChaosElement),
    /// One-dimensional moments, optionally with absolute moments.
    Moments(MomentSequence),
    Discrete(DiscreteMeasure),
    /// Tensor product of one-dimensional measures, one per coordinate.
    Product(Vec<DiscreteMeasure>),
    /// Density `exp(-|t|/scale) / (2 scale)` on the line.
    Laplace {
        scale: f64,
    },
}

impl Source {
    pub fn dim(&self) -> usize {
        match self {
            Source::Distribution(phi) => phi.dim(),
            Source::Product(factors) => factors.len(),
            _ => 1,
        }
    }

    fn check(&self, w: &WeightSequence) -> Result<()> {
        w.check_dim(self.dim())?;
        match self {
            Source::Distribution(phi) => phi.expect_role(Role::Distribution),
            Source::Moments(ms) => ms.validate(),
            Source::Product(f) if f.is_empty() => {
                Err(Error::InvalidParameter("empty product measure".into()))
            }
            Source::Product(f) => {
                let size = f.iter().try_fold(1usize, |acc, m| acc.checked_mul(m.len()));
                match size {
                    Some(s) if s <= GRID_GUARD => Ok(()),
                    _ => Err(Error::Guard(format!(
                        "product grid exceeds {GRID_GUARD} points"
                    ))),
                }
            }
            Source::Laplace { scale } if !(*scale > 0.0 && scale.is_finite()) => Err(
                Error::InvalidParameter(format!("Laplace scale {scale} must be positive")),
            ),
            _ => Ok(()),
        }
    }

    fn grid(factors: &[DiscreteMeasure]) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let total: usize = factors.iter().map(DiscreteMeasure::len).product();
        (0..total).map(move |mut idx| {
            let mut x = Vec::with_capacity(factors.len());
            let mut weight = 1.0;
            for f in factors {
                let i = idx % f.len();
                idx /= f.len();
                x.push(f.nodes()[i]);
                weight *= f.weights()[i];
            }
            (x, weight)
        })
    }

    /// `∫ e^{eps |x|_{-p'}} dν` where a direct evaluation exists.
    fn direct_exp_integral(&self, epsilon: f64, p_prime: f64, w: &WeightSequence) -> Option<f64> {
        let s = scales(p_prime, w);
        match self {
            Source::Discrete(dm) => Some(dm.integrate(|t| (epsilon * s[0].sqrt() * t.abs()).exp())),
            Source::Product(f) => Some(
                Source::grid(f)
                    .map(|(x, weight)| weight * (epsilon * radial(&x, &s)).exp())
                    .sum(),
            ),
            Source::Laplace { scale } => {
                let b = scale * s[0].sqrt();
                (epsilon * b < 1.0).then(|| 1.0 / (1.0 - epsilon * b))
            }
            _ => None,
        }
    }

    /// `∫ phi dν` for a test function.
    pub fn integrate(&self, phi: &ChaosElement, w: &WeightSequence) -> Result<f64> {
        phi.expect_role(Role::Test)?;
        w.check_dim(phi.dim())?;
        self.check(w)?;
        match self {
            Source::Distribution(big_phi) => pair(big_phi, phi, w),
            Source::Discrete(dm) => {
                let mut acc = 0.0;
                for (t, weight) in dm.points() {
                    acc += weight * eval(phi, &Coords::new(vec![t]), w)?;
                }
                Ok(acc)
            }
            Source::Product(f) => {
                let mut acc = 0.0;
                for (x, weight) in Source::grid(f) {
                    acc += weight * eval(phi, &Coords::new(x), w)?;
                }
                Ok(acc)
            }
            Source::Moments(ms) => {
                let coefs = power_coefficients_1d(phi);
                if coefs.len() > ms.values.len() {
                    return Err(Error::InsufficientMoments(format!(
                        "test function of degree {} needs more moments than the {} supplied",
                        coefs.len() - 1,
                        ms.values.len()
                    )));
                }
                Ok(coefs.iter().zip(&ms.values).map(|(c, m)| c * m).sum())
            }
            Source::Laplace { scale } => Ok(power_coefficients_1d(phi)
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == 0)
                .map(|(k, c)| c * factorial(k) * scale.powi(k as i32))
                .sum()),
        }
    }
}

fn scales(p_prime: f64, w: &WeightSequence) -> Vec<f64> {
    w.weights().iter().map(|l| l.powf(-2.0 * p_prime)).collect()
}

fn radial(x: &[f64], s: &[f64]) -> f64 {
    x.iter().zip(s).map(|(x, s)| s * x * x).sum::<f64>().sqrt()
}

/// Coefficients of `t^k` of a one-dimensional test function.
fn power_coefficients_1d(phi: &ChaosElement) -> Vec<f64> {
    let mut out = vec![0.0; phi.max_degree() + 1];
    for k in phi.terms() {
        if k.degree == 0 {
            out[0] += k.coef;
            continue;
        }
        let e = k.direction.as_slice()[0];
        for (j, a) in hermite_scaled_coefficients(k.degree, e * e)
            .into_iter()
            .enumerate()
        {
            out[j] += k.coef * a * e.powi(j as i32);
        }
    }
    out
}

fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, x) in a.iter().enumerate().take(len) {
        if *x == 0.0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∫ |x|_{-p'}^{2n} dν` for `n = 0..=half`, from the generating function
/// `E[e^{t<x,eta> - t^2|eta|^2/2} e^{uQ}] = P(u) exp(t^2 A(u)/2)` with
/// `Q = sum_k s_k x_k^2`, `P = prod (1 - 2 u s_k)^{-1/2}` and
/// `A = sum_k eta_k^2 (2 u s_k) / (1 - 2 u s_k)`.
pub(crate) fn distribution_even_radial(
    big_phi: &ChaosElement,
    p_prime: f64,
    half: usize,
    w: &WeightSequence,
) -> Result<Vec<f64>> {
    if half.saturating_mul(w.dim()) > RADIAL_GUARD {
        return Err(Error::Guard(format!(
            "radial expansion of order {} in {} coordinates exceeds {RADIAL_GUARD} terms; lower n_max or d",
            2 * half,
            w.dim()
        )));
    }
    let len = half + 1;
    let s = scales(p_prime, w);
    // ln P = sum_r l_r u^r with l_r = (1/2r) sum_k (2 s_k)^r
    let mut log_p = vec![0.0; len];
    let mut pow: Vec<f64> = s.iter().map(|s| 2.0 * s).collect();
    for (r, slot) in log_p.iter_mut().enumerate().skip(1) {
        *slot = pow.iter().sum::<f64>() / (2.0 * r as f64);
        pow.iter_mut().zip(&s).for_each(|(x, s)| *x *= 2.0 * s);
    }
    let mut p_series = vec![0.0; len];
    p_series[0] = 1.0;
    for n in 1..len {
        let acc: f64 = (1..=n).map(|j| j as f64 * log_p[j] * p_series[n - j]).sum();
        p_series[n] = acc / n as f64;
    }

    let mut g = vec![0.0; len];
    for k in big_phi.terms() {
        if k.degree % 2 == 1 {
            continue;
        }
        let j = k.degree / 2;
        if j > half {
            continue;
        }
        let series = if j == 0 {
            p_series.clone()
        } else {
            // A(u)/2 = sum_{r>=1} u^r (1/2) sum_k eta_k^2 (2 s_k)^r
            let eta = k.direction.as_slice();
            let mut half_a = vec![0.0; len];
            let mut pow: Vec<f64> = s.iter().map(|s| 2.0 * s).collect();
            for slot in half_a.iter_mut().skip(1) {
                *slot = 0.5 * eta.iter().zip(&pow).map(|(e, x)| e * e * x).sum::<f64>();
                pow.iter_mut().zip(&s).for_each(|(x, s)| *x *= 2.0 * s);
            }
            let mut power = p_series.clone();
            for _ in 0..j {
                power = series_mul(&power, &half_a, len);
            }
            power
        };
        let scale = k.coef * factorial(k.degree) / factorial(j);
        g.iter_mut().zip(&series).for_each(|(g, x)| *g += scale * x);
    }
    Ok(g.iter()
        .enumerate()
        .map(|(n, x)| factorial(n) * x)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OddMoments {
    Exact,
    /// `∫|x|^{2n+1} <= (∫|x|^{2n} ∫|x|^{2n+2})^{1/2}`.
    SchwarzBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialMoments {
    pub p_prime: f64,
    pub values: Vec<f64>,
    pub odd: OddMoments,
}

fn fill_odd_by_schwarz(even: &[f64], n_max: usize) -> Result<Vec<f64>> {
    if let Some((i, v)) = even.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
        return Err(Error::Domain(format!(
            "radial moment of order {} is {v}; the source is not a positive measure",
            2 * i
        )));
    }
    Ok((0..=n_max)
        .map(|n| {
            if n % 2 == 0 {
                even[n / 2]
            } else {
                (even[n / 2] * even[n / 2 + 1]).sqrt()
            }
        })
        .collect())
}

/// `∫ |x|_{-p'}^n dν` for `n = 0..=n_max`.
pub fn radial_moments(
    source: &Source,
    p_prime: f64,
    n_max: usize,
    w: &WeightSequence,
) -> Result<RadialMoments> {
    source.check(w)?;
    let s = scales(p_prime, w);
    let (values, odd) = match source {
        Source::Distribution(phi) => {
            let even = distribution_even_radial(phi, p_prime, n_max.div_ceil(2), w)?;
            (fill_odd_by_schwarz(&even, n_max)?, OddMoments::SchwarzBound)
        }
        Source::Moments(ms) => {
            let root = s[0].sqrt();
            if let Some(abs) = &ms.absolute {
                if n_max >= abs.len() {
                    return Err(Error::InsufficientMoments(format!(
                        "radial order {n_max} requested, absolute moments known up to {}",
                        abs.len() - 1
                    )));
                }
                let v = (0..=n_max).map(|n| abs[n] * root.powi(n as i32)).collect();
                (v, OddMoments::Exact)
            } else {
                let top = n_max.div_ceil(2) * 2;
                if top > ms.order() {
                    return Err(Error::InsufficientMoments(format!(
                        "radial order {n_max} needs even moments up to {top}, have {}",
                        ms.order()
                    )));
                }
                let even: Vec<f64> = (0..=top / 2)
                    .map(|j| ms.values[2 * j] * root.powi(2 * j as i32))
                    .collect();
                (fill_odd_by_schwarz(&even, n_max)?, OddMoments::SchwarzBound)
            }
        }
        Source::Discrete(dm) => {
            let root = s[0].sqrt();
            (
                (0..=n_max)
                    .map(|n| dm.abs_moment(n) * root.powi(n as i32))
                    .collect(),
                OddMoments::Exact,
            )
        }
        Source::Product(f) => {
            let mut v = vec![0.0; n_max + 1];
            for (x, weight) in Source::grid(f) {
                let r = radial(&x, &s);
                let mut rn = weight;
                for slot in v.iter_mut() {
                    *slot += rn;
                    rn *= r;
                }
            }
            (v, OddMoments::Exact)
        }
        Source::Laplace { scale } => {
            let b = scale * s[0].sqrt();
            (
                (0..=n_max)
                    .map(|n| factorial(n) * b.powi(n as i32))
                    .collect(),
                OddMoments::Exact,
            )
        }
    };
    Ok(RadialMoments {
        p_prime,
        values,
        odd,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenMomentRow {
    /// Half the order: the row compares `∫ |x|^{2n}`.
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn resolve_constants(
    source: &Source,
    constants: Option<GrowthConstants>,
    params: &ScaleParams,
    w: &WeightSequence,
) -> Result<Option<GrowthConstants>> {
    match (constants, source) {
        (Some(c), _) => Ok(Some(c)),
        (None, Source::Distribution(phi)) => Ok(Some(GrowthConstants::for_distribution(
            phi, params.p, params.q, w,
        )?)),
        (None, _) => Ok(None),
    }
}

/// `∫ |x|_{-p'}^{2n} dν <= K (C hs)^{2n} (2n)!` for `n <= n_max`.
///
/// Distributions use their own constants unless overridden; other sources
/// need them supplied.
pub fn even_moment_bound(
    source: &Source,
    constants: Option<GrowthConstants>,
    params: &ScaleParams,
    n_max: usize,
    w: &WeightSequence,
) -> Result<Vec<EvenMomentRow>> {
    let constants = resolve_constants(source, constants, params, w)?.ok_or_else(|| {
        Error::InvalidParameter(
            "growth constants (K, C) are required for measure-side sources".into(),
        )
    })?;
    let hs = params.hs(w)?;
    let radial = radial_moments(source, params.p_prime, 2 * n_max, w)?;
    Ok((0..=n_max)
        .map(|n| {
            let lhs = radial.values[2 * n];
            let rhs =
                (constants.k.ln() + 2.0 * n as f64 * (constants.c * hs).ln() + ln_factorial(2 * n))
                    .exp();
            EvenMomentRow {
                n,
                lhs,
                rhs,
                holds: lhs <= rhs * (1.0 + 1e-12),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStatus {
    Converged,
    Diverged,
    Inconclusive,
}

/// Tail fit `ln term_n ≈ a + b n + gamma ln n!`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub b: f64,
    pub gamma: f64,
}

const TAIL_GAMMA_TOLERANCE: f64 = 0.05;
const TAIL_RATE_TOLERANCE: f64 = 1e-3;

fn fit_tail(terms: &[f64]) -> Option<TailFit> {
    let pts: Vec<(usize, f64)> = terms
        .iter()
        .enumerate()
        .skip(terms.len() / 2)
        .filter(|(_, t)| **t > 0.0)
        .map(|(n, t)| (n, t.ln()))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let a = DMatrix::from_fn(pts.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0 as f64,
        _ => ln_factorial(pts[i].0),
    });
    let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let sol = a.svd(true, true).solve(&y, 1e-12).ok()?;
    Some(TailFit {
        b: sol[1],
        gamma: sol[2],
    })
}

fn classify_tail(fit: Option<TailFit>) -> SeriesStatus {
    match fit {
        None => SeriesStatus::Inconclusive,
        Some(f) if f.gamma > TAIL_GAMMA_TOLERANCE => SeriesStatus::Diverged,
        Some(f) if f.gamma < -TAIL_GAMMA_TOLERANCE => SeriesStatus::Converged,
        Some(f) if f.b < -TAIL_RATE_TOLERANCE => SeriesStatus::Converged,
        Some(_) => SeriesStatus::Diverged,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub p: f64,
    pub p_prime: f64,
    pub q: f64,
    pub epsilon: f64,
    pub hs: f64,
    pub threshold: f64,
    /// `eps / threshold`.
    pub r: f64,
    pub k_const: Option<f64>,
    pub c_const: Option<f64>,
    /// Geometric bound `sqrt(nu(N') K) / (1 - 2 eps C hs)` on every partial
    /// sum, when constants are known and the ratio is below one.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
    pub partial_sums: Vec<f64>,
    pub series_value: Option<f64>,
    pub status: SeriesStatus,
    pub tail_fit: Option<TailFit>,
    pub direct_value: Option<f64>,
    pub odd_terms: OddMoments,
    /// `nu(N') = M_0`.
    pub mass: f64,
    /// `||Phi||_{-p,-q,-1}`, an upper bound on the mass for distributions.
    pub mass_bound: Option<f64>,
}

/// Partial sums of `sum_n eps^n / n! ∫ |x|_{-p'}^n dν`.
pub fn exp_series(
    source: &Source,
    constants: Option<GrowthConstants>,
    params: &ScaleParams,
    epsilon: f64,
    n_max: usize,
    w: &WeightSequence,
) -> Result<IntegrabilityReport> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be finite and >= 0"
        )));
    }
    let hs = params.hs(w)?;
    let threshold = params.threshold(w)?;
    let constants = resolve_constants(source, constants, params, w)?;
    let mass_bound = match source {
        Source::Distribution(phi) => Some(dual_norm(phi, params.p, params.q, w)?),
        _ => None,
    };
    let radial = radial_moments(source, params.p_prime, n_max.max(2), w)?;
    let mass = radial.values[0];

    let mut partial_sums = Vec::with_capacity(n_max + 1);
    let mut terms = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    for (n, r) in radial.values.iter().take(n_max + 1).enumerate() {
        let t = if n == 0 {
            *r
        } else if epsilon == 0.0 {
            0.0
        } else {
            (n as f64 * epsilon.ln() - ln_factorial(n)).exp() * r
        };
        acc += t;
        terms.push(t);
        partial_sums.push(acc);
    }

    let bound = constants.and_then(|c| {
        let ratio = 2.0 * epsilon * c.c * hs;
        (ratio < 1.0).then(|| (mass_bound.unwrap_or(mass) * c.k).sqrt() / (1.0 - ratio))
    });
    let within_bound = bound.map(|b| partial_sums.iter().all(|s| *s <= b));
    let (status, tail_fit) = if epsilon == 0.0 {
        (SeriesStatus::Converged, None)
    } else if terms.iter().any(|t| !t.is_finite()) {
        (SeriesStatus::Diverged, None)
    } else {
        let fit = fit_tail(&terms);
        (classify_tail(fit), fit)
    };
    Ok(IntegrabilityReport {
        p: params.p,
        p_prime: params.p_prime,
        q: params.q,
        epsilon,
        hs,
        threshold,
        r: epsilon / threshold,
        k_const: constants.map(|c| c.k),
        c_const: constants.map(|c| c.c),
        bound,
        within_bound,
        series_value: (status == SeriesStatus::Converged).then_some(acc),
        partial_sums,
        status,
        tail_fit,
        direct_value: source.direct_exp_integral(epsilon, params.p_prime, w),
        odd_terms: radial.odd,
        mass,
        mass_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardReport {
    /// Moment bounds along each coordinate axis up to order 8.
    pub certificates_hold: bool,
    pub report: IntegrabilityReport,
}

impl ForwardReport {
    pub fn holds(&self) -> bool {
        self.certificates_hold
            && self.report.status == SeriesStatus::Converged
            && self.report.within_bound == Some(true)
    }
}

/// Moment bound implies integrability: checks the bound along the axes,
/// then sums the series at `eps = threshold / 2`, where the geometric ratio
/// is exactly one half.
pub fn theorem2prime_forward(
    big_phi: &ChaosElement,
    params: &ScaleParams,
    n_max: usize,
    w: &WeightSequence,
) -> Result<ForwardReport> {
    let mut certificates_hold = true;
    for k in 0..w.dim() {
        let cert = moment_bound_certificate(
            big_phi,
            &Coords::unit(w.dim(), k),
            params.p,
            params.q,
            FORWARD_CERTIFICATE_ORDER,
            w,
        )?;
        certificates_hold &= cert.holds();
    }
    let epsilon = 0.5 * params.threshold(w)?;
    let report = exp_series(
        &Source::Distribution(big_phi.clone()),
        None,
        params,
        epsilon,
        n_max,
        w,
    )?;
    Ok(ForwardReport {
        certificates_hold,
        report,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseRow {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseReport {
    pub epsilon: f64,
    pub c_const: f64,
    pub exp_integral: f64,
    pub rows: Vec<ReverseRow>,
    pub max_ratio: f64,
}

/// Integrability implies continuity: `|∫ phi dν| <= C_{p',eps}
/// ||phi||_{p',q,1} ∫ e^{eps |x|_{-p'}} dν` over a suite of test functions.
///
/// Needs `eps >= 2^{-q/2}` so that the pointwise bound of the test functions
/// is dominated by the exponential weight.
pub fn theorem2prime_reverse(
    source: &Source,
    epsilon: f64,
    params: &ScaleParams,
    suite: &[ChaosElement],
    w: &WeightSequence,
) -> Result<ReverseReport> {
    if !(epsilon > 0.0) || epsilon < (-0.5 * params.q).exp2() {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be at least 2^(-q/2) = {}",
            (-0.5 * params.q).exp2()
        )));
    }
    let exp_integral = match source.direct_exp_integral(epsilon, params.p_prime, w) {
        Some(v) if v.is_finite() => v,
        _ => {
            let report = exp_series(source, None, params, epsilon, DEFAULT_SERIES_TERMS, w)?;
            report
                .series_value
                .ok_or(Error::MeasureRejected { epsilon })?
        }
    };
    let (c_const, _) = c_constant_upper(params.p_prime, epsilon, w, None)?;
    let mut rows = Vec::with_capacity(suite.len());
    for phi in suite {
        let lhs = source.integrate(phi, w)?.abs();
        let rhs = c_const * norm_pqb(phi, params.p_prime, params.q, 1.0, w)? * exp_integral;
        rows.push(ReverseRow {
            lhs,
            rhs,
            ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ReverseReport {
        epsilon,
        c_const,
        exp_integral,
        rows,
        max_ratio,
    })
}
