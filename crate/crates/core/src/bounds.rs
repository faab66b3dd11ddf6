//! Pointwise growth bounds for test functions.
//!
//! A test function with finite `||.||_{p,q,1}` norm is bounded by
//! `C_{p,eps} ||phi||_{p,q,1} exp(eps |x|_{-p})` with `eps = 2^{-q/2}`, where
//! `C_{p,eps}` is the Gaussian expectation of `exp(eps |x|_{-p})`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chaos::{eval, kernel_norm, norm_pqb, ChaosElement, Role};
use crate::error::{Error, Result};
use crate::hilbert_scale::{
    gaussian_quadratic_integral, max_admissible_alpha, norm_p, Coords, WeightSequence,
};
use crate::special::factorial;

pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Constants of the pointwise bound for one test function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpBound {
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub c_const: f64,
    pub norm_pq1: f64,
}

impl ExpBound {
    pub fn new(phi: &ChaosElement, p: f64, q: f64, w: &WeightSequence) -> Result<Self> {
        let epsilon = epsilon_for(q);
        let (c_const, _) = c_constant_upper(p, epsilon, w, None)?;
        Ok(Self {
            p,
            q,
            epsilon,
            c_const,
            norm_pq1: norm_pqb(phi, p, q, 1.0, w)?,
        })
    }

    /// Right-hand side of the pointwise bound at `x`.
    pub fn at(&self, x: &Coords, w: &WeightSequence) -> Result<f64> {
        Ok(self.c_const * self.norm_pq1 * (self.epsilon * norm_p(x, -self.p, w)?).exp())
    }
}

/// `eps = 2^{-q/2}`.
pub fn epsilon_for(q: f64) -> f64 {
    (-0.5 * q).exp2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelBoundRow {
    pub n: usize,
    pub bound: f64,
    pub actual: f64,
    pub holds: bool,
}

/// Per-degree check of `|phi^(n)|_p <= eps^n ||phi||_{p,q,1} / n!`.
pub fn kernel_bound(
    phi: &ChaosElement,
    p: f64,
    q: f64,
    w: &WeightSequence,
) -> Result<Vec<KernelBoundRow>> {
    let norm = norm_pqb(phi, p, q, 1.0, w)?;
    let eps = epsilon_for(q);
    (0..=phi.max_degree())
        .map(|n| {
            let bound = eps.powi(n as i32) * norm / factorial(n);
            let actual = kernel_norm(phi, n, p, w)?;
            Ok(KernelBoundRow {
                n,
                bound,
                actual,
                // equality is attained by single Wick powers
                holds: actual <= bound * (1.0 + 1e-12),
            })
        })
        .collect()
}

/// Sampling parameters for Monte Carlo estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            samples: DEFAULT_MC_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CConstant {
    pub p: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub upper_bound: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Analytic upper bound `exp(eps^2/(4 alpha)) ∫ exp(alpha |x|_{-p}^2) dmu`.
///
/// With `alpha = None` the bound is minimised over the admissible range
/// (it is convex in `alpha`). Returns `(bound, alpha)`. For `eps = 0` the
/// infimum over `alpha` is exactly one.
pub fn c_constant_upper(
    p: f64,
    epsilon: f64,
    w: &WeightSequence,
    alpha: Option<f64>,
) -> Result<(f64, f64)> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be >= 0"
        )));
    }
    let alpha = match alpha {
        Some(a) if a > 0.0 => a,
        Some(a) => return Err(Error::InvalidParameter(format!("alpha = {a} must be > 0"))),
        None if epsilon == 0.0 => return Ok((1.0, 0.0)),
        None => optimal_alpha(p, epsilon, w),
    };
    let integral = gaussian_quadratic_integral(alpha, p, w)?;
    Ok(((epsilon * epsilon / (4.0 * alpha)).exp() * integral, alpha))
}

fn optimal_alpha(p: f64, epsilon: f64, w: &WeightSequence) -> f64 {
    let a_max = max_admissible_alpha(p, w);
    let scales: Vec<f64> = w.weights().iter().map(|l| l.powf(-2.0 * p)).collect();
    let objective = |a: f64| {
        epsilon * epsilon / (4.0 * a)
            - 0.5 * scales.iter().map(|s| (-2.0 * a * s).ln_1p()).sum::<f64>()
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a_max * 1e-12, a_max * (1.0 - 1e-9));
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = objective(x2);
        }
        if hi - lo <= 1e-13 * a_max {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `C_{p,eps}` as an analytic upper bound and a seeded Monte Carlo estimate.
pub fn c_constant(
    p: f64,
    epsilon: f64,
    w: &WeightSequence,
    alpha: Option<f64>,
    mc: MonteCarlo,
) -> Result<CConstant> {
    let (upper_bound, alpha) = c_constant_upper(p, epsilon, w, alpha)?;
    let (mc_estimate, mc_std_error) = if epsilon == 0.0 {
        (1.0, 0.0)
    } else {
        mc_exp_norm(p, epsilon, w, mc)?
    };
    Ok(CConstant {
        p,
        epsilon,
        alpha,
        upper_bound,
        mc_estimate,
        mc_std_error,
        samples: mc.samples,
        seed: mc.seed,
    })
}

fn mc_exp_norm(p: f64, epsilon: f64, w: &WeightSequence, mc: MonteCarlo) -> Result<(f64, f64)> {
    if mc.samples < 2 {
        return Err(Error::InvalidParameter(
            "Monte Carlo needs at least 2 samples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let scales: Vec<f64> = w.weights().iter().map(|l| l.powf(-2.0 * p)).collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..mc.samples {
        let r2: f64 = scales
            .iter()
            .map(|s| {
                let z: f64 = StandardNormal.sample(&mut rng);
                s * z * z
            })
            .sum();
        let v = (epsilon * r2.sqrt()).exp();
        sum += v;
        sum_sq += v * v;
    }
    let n = mc.samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointwiseCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl PointwiseCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// `|phi(x)|` against `C_{p,eps} ||phi||_{p,q,1} exp(eps |x|_{-p})`, using the
/// analytic upper bound for the constant.
pub fn pointwise_bound_check(
    phi: &ChaosElement,
    p: f64,
    q: f64,
    x: &Coords,
    w: &WeightSequence,
) -> Result<PointwiseCheck> {
    phi.expect_role(Role::Test)?;
    let bound = ExpBound::new(phi, p, q, w)?;
    Ok(PointwiseCheck {
        lhs: eval(phi, x, w)?.abs(),
        rhs: bound.at(x, w)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::RankOneKernel;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn kernel_bound_examples() {
        let w = WeightSequence::harmonic(3);
        let one = ChaosElement::constant(3, Role::Test, 1.0);
        let rows = kernel_bound(&one, 1.0, 2.0, &w).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].bound, rows[0].actual), (1.0, 1.0));

        let xi = Coords::new(vec![0.3, 0.4, -0.2]);
        for n in 1..=8 {
            let wp = ChaosElement::wick_power(&xi, n, Role::Test).unwrap();
            let row = &kernel_bound(&wp, 1.0, 2.0, &w).unwrap()[n];
            assert_relative_eq!(row.actual, row.bound, max_relative = 1e-12);
            assert!(row.holds);
        }
    }

    #[test]
    fn c_constant_zero_epsilon() {
        let w = WeightSequence::harmonic(3);
        let c = c_constant(1.0, 0.0, &w, None, MonteCarlo::default()).unwrap();
        assert_eq!((c.upper_bound, c.mc_estimate), (1.0, 1.0));
    }

    #[test]
    fn c_constant_one_dimensional_closed_form() {
        // E exp(|Z|) = 2 e^{1/2} N(1)
        let w = WeightSequence::unit(1);
        let exact = 2.0 * 0.5f64.exp() * normal_cdf(1.0);
        assert_relative_eq!(exact, 2.774_285_957_670_009, max_relative = 1e-12);
        let c = c_constant(0.0, 1.0, &w, Some(0.25), MonteCarlo::default()).unwrap();
        assert!((c.mc_estimate - exact).abs() <= 3.0 * c.mc_std_error);
        assert_relative_eq!(
            c.upper_bound,
            std::f64::consts::E * 2f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(c.mc_estimate <= c.upper_bound);
        // optimal alpha only tightens
        let best = c_constant(0.0, 1.0, &w, None, MonteCarlo::default()).unwrap();
        assert!(best.upper_bound <= c.upper_bound && best.upper_bound >= exact);
        assert!(matches!(
            c_constant(0.0, 1.0, &w, Some(0.6), MonteCarlo::default()),
            Err(Error::GaussianDivergence { .. })
        ));
    }

    #[test]
    fn c_constant_deterministic_in_seed() {
        let w = WeightSequence::harmonic(2);
        let mc = MonteCarlo {
            samples: 5000,
            seed: 3,
        };
        let a = c_constant(0.5, 0.7, &w, None, mc).unwrap();
        let b = c_constant(0.5, 0.7, &w, None, mc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn c_constant_upper_monotone() {
        let w = WeightSequence::harmonic(4);
        let eps = [0.1, 0.3, 0.7, 1.0, 1.5];
        for p in [0.0, 0.5, 1.0] {
            let vals: Vec<f64> = eps
                .iter()
                .map(|&e| c_constant_upper(p, e, &w, None).unwrap().0)
                .collect();
            assert!(vals.windows(2).all(|v| v[0] <= v[1]), "{vals:?}");
        }
        for e in eps {
            let vals: Vec<f64> = [0.0, 0.5, 1.0, 2.0]
                .iter()
                .map(|&p| c_constant_upper(p, e, &w, None).unwrap().0)
                .collect();
            assert!(vals.windows(2).all(|v| v[0] >= v[1]), "{vals:?}");
        }
    }

    #[test]
    fn pointwise_examples() {
        let w = WeightSequence::harmonic(2);
        let one = ChaosElement::constant(2, Role::Test, 1.0);
        let c = pointwise_bound_check(&one, 1.0, 0.0, &Coords::new(vec![3.0, -1.0]), &w).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!(c.rhs >= 1.0);

        // polynomial growth against exponential growth along e_1
        let xi = Coords::new(vec![1.0, 0.5]);
        let sq = ChaosElement::monomial(&xi, 2, Role::Test).unwrap();
        let far = pointwise_bound_check(&sq, 1.0, 0.0, &Coords::new(vec![1e3, 0.0]), &w).unwrap();
        assert!(far.lhs / far.rhs < 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let x = Coords::new((0..2).map(|_| rng.random_range(-20.0..20.0)).collect());
            assert!(pointwise_bound_check(&sq, 1.0, 1.0, &x, &w)
                .unwrap()
                .holds());
        }
    }

    proptest! {
        #[test]
        fn kernel_bound_holds(terms in prop::collection::vec(
            (0usize..13, -3.0..3.0f64, prop::collection::vec(-1.0..1.0f64, 3)), 1..6),
            p in 0.0..2.0f64, q in 0.0..4.0f64)
        {
            let w = WeightSequence::harmonic(3);
            let mut phi = ChaosElement::zero(3, Role::Test);
            for (n, c, d) in terms {
                let d = Coords::new(d);
                if n > 0 && d.is_zero() { continue; }
                phi.push(RankOneKernel::new(n, c, d)).unwrap();
            }
            for row in kernel_bound(&phi, p, q, &w).unwrap() {
                prop_assert!(row.holds, "{row:?}");
            }
        }
    }
}
