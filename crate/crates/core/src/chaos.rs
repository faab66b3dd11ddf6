//! Finite chaos expansions with symmetrized rank-one kernels.
//!
//! An element is `sum_n <:x^{⊗n}:, f^(n)>` where every kernel `f^(n)` is a
//! finite sum `sum_j c_j eta_j^{⊗n}`. All tensor inner products reduce to the
//! Gram identity `<eta^{⊗n}, zeta^{⊗n}>_p = <eta, zeta>_p^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert_scale::{inner_p, Coords, WeightSequence};
use crate::special::{factorial, hermite_scaled_pair};

/// Whether an element is used as a test function or as a distribution.
///
/// A finite expansion is both at once; the tag records which side of the
/// dual pairing an operation expects it on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Test,
    Distribution,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Test => "test",
            Role::Distribution => "distribution",
        }
    }
}

/// One term `coef * direction^{⊗degree}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneKernel {
    pub degree: usize,
    pub coef: f64,
    pub direction: Coords,
}

impl RankOneKernel {
    pub fn new(degree: usize, coef: f64, direction: Coords) -> Self {
        Self {
            degree,
            coef,
            direction,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaosElement {
    dim: usize,
    role: Role,
    truncated: bool,
    kernels: Vec<Vec<RankOneKernel>>,
}

impl ChaosElement {
    /// The zero element.
    pub fn zero(dim: usize, role: Role) -> Self {
        Self {
            dim,
            role,
            truncated: false,
            kernels: vec![Vec::new()],
        }
    }

    pub fn from_terms(
        dim: usize,
        role: Role,
        terms: impl IntoIterator<Item = RankOneKernel>,
    ) -> Result<Self> {
        let mut out = Self::zero(dim, role);
        for t in terms {
            out.push(t)?;
        }
        Ok(out)
    }

    pub fn constant(dim: usize, role: Role, value: f64) -> Self {
        let mut out = Self::zero(dim, role);
        out.push(RankOneKernel::new(0, value, Coords::zeros(dim)))
            .expect("constant term is always valid");
        out
    }

    /// The Wick power `:<., xi>^n:`.
    pub fn wick_power(xi: &Coords, n: usize, role: Role) -> Result<Self> {
        if n > 0 && xi.is_zero() {
            return Ok(Self::zero(xi.dim(), role));
        }
        Self::from_terms(xi.dim(), role, [RankOneKernel::new(n, 1.0, xi.clone())])
    }

    /// The ordinary monomial `<., xi>^n`, expanded in the Wick basis.
    pub fn monomial(xi: &Coords, n: usize, role: Role) -> Result<Self> {
        if n > 0 && xi.is_zero() {
            return Ok(Self::zero(xi.dim(), role));
        }
        let coefs = wick_from_monomial(n, xi.norm0());
        Self::from_terms(
            xi.dim(),
            role,
            coefs
                .into_iter()
                .map(|(deg, c)| RankOneKernel::new(deg, c, xi.clone())),
        )
    }

    /// `sum_k coefs[k] <., xi>^k` in the Wick basis.
    pub fn polynomial_along(xi: &Coords, coefs: &[f64], role: Role) -> Result<Self> {
        let mut out = Self::zero(xi.dim(), role);
        for (k, &c) in coefs.iter().enumerate() {
            if c != 0.0 {
                out = out.add(&Self::monomial(xi, k, role)?.scale(c))?;
            }
        }
        Ok(out)
    }

    /// Truncated Wick exponential `Phi_y` with kernels `y^{⊗n}/n!`, `n <= n_max`.
    /// The result is marked as a truncation of an infinite expansion.
    pub fn wick_exponential(y: &Coords, n_max: usize, role: Role) -> Result<Self> {
        let mut out = Self::from_terms(
            y.dim(),
            role,
            (0..=n_max).map(|n| RankOneKernel::new(n, 1.0 / factorial(n), y.clone())),
        )?;
        out.truncated = true;
        Ok(out)
    }

    /// Adds one kernel, merging it into an existing term with an identical
    /// direction.
    pub fn push(&mut self, kernel: RankOneKernel) -> Result<()> {
        let RankOneKernel {
            degree,
            coef,
            direction,
        } = kernel;
        if direction.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: direction.dim(),
            });
        }
        if !coef.is_finite() || direction.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidKernel(format!(
                "degree {degree}: coefficient and direction must be finite"
            )));
        }
        let direction = if degree == 0 {
            Coords::zeros(self.dim)
        } else {
            direction
        };
        if degree >= 1 && coef != 0.0 && direction.is_zero() {
            return Err(Error::InvalidKernel(format!(
                "degree {degree}: direction must be nonzero"
            )));
        }
        if coef == 0.0 {
            return Ok(());
        }
        if self.kernels.len() <= degree {
            self.kernels.resize_with(degree + 1, Vec::new);
        }
        let slot = &mut self.kernels[degree];
        if let Some(existing) = slot.iter_mut().find(|k| k.direction == direction) {
            existing.coef += coef;
        } else {
            slot.push(RankOneKernel::new(degree, coef, direction));
        }
        slot.retain(|k| k.coef != 0.0);
        Ok(())
    }

    pub fn add(&self, other: &ChaosElement) -> Result<ChaosElement> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut out = self.clone();
        for k in other.terms() {
            out.push(k.clone())?;
        }
        out.truncated = self.truncated || other.truncated;
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> ChaosElement {
        let mut out = self.clone();
        for slot in &mut out.kernels {
            for k in slot.iter_mut() {
                k.coef *= factor;
            }
            slot.retain(|k| k.coef != 0.0);
        }
        out
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn with_truncated(mut self, truncated: bool) -> Self {
        self.truncated = truncated;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> Role {
        self.role
    }

    /// True when the kernels are a finite truncation of an infinite expansion,
    /// so that pairings with higher-degree test functions are approximate.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Highest degree carrying a nonzero kernel (0 for constants and zero).
    pub fn max_degree(&self) -> usize {
        self.kernels
            .iter()
            .rposition(|slot| !slot.is_empty())
            .unwrap_or(0)
    }

    /// Kernels of degree `n` (empty slice above the stored range).
    pub fn kernels(&self, n: usize) -> &[RankOneKernel] {
        self.kernels.get(n).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn terms(&self) -> impl Iterator<Item = &RankOneKernel> {
        self.kernels.iter().flatten()
    }

    pub(crate) fn expect_role(&self, role: Role) -> Result<()> {
        if self.role != role {
            return Err(Error::RoleMismatch {
                expected: role.name(),
                found: self.role.name(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_weights(&self, w: &WeightSequence) -> Result<()> {
        w.check_dim(self.dim)
    }
}

/// Coefficients `a_{n,k}` of `<., xi>^n = sum_k a_{n,k} :<., xi>^{n-2k}:`,
/// returned as `(degree n-2k, a_{n,k})` with
/// `a_{n,k} = n! / (k! (n-2k)! 2^k) |xi|_0^{2k}`.
pub fn wick_from_monomial(n: usize, xi_norm0: f64) -> Vec<(usize, f64)> {
    let var = xi_norm0 * xi_norm0;
    let mut out = Vec::with_capacity(n / 2 + 1);
    // a_{n,0} = 1; a_{n,k+1} = a_{n,k} (n-2k)(n-2k-1) / (2(k+1)) var
    let mut a = 1.0;
    for k in 0..=n / 2 {
        out.push((n - 2 * k, a));
        let m = (n - 2 * k) as f64;
        a *= m * (m - 1.0) / (2.0 * (k as f64 + 1.0)) * var;
    }
    out
}

/// Degree-`n` kernel inner product `<f^(n), g^(n)>_p` via the Gram identity.
pub(crate) fn kernel_inner(
    f: &ChaosElement,
    g: &ChaosElement,
    n: usize,
    p: f64,
    w: &WeightSequence,
) -> Result<f64> {
    let mut acc = 0.0;
    for a in f.kernels(n) {
        for b in g.kernels(n) {
            let gram = if n == 0 {
                1.0
            } else {
                inner_p(&a.direction, &b.direction, p, w)?.powi(n as i32)
            };
            acc += a.coef * b.coef * gram;
        }
    }
    Ok(acc)
}

/// `|f^(n)|_p`.
pub fn kernel_norm(f: &ChaosElement, n: usize, p: f64, w: &WeightSequence) -> Result<f64> {
    Ok(kernel_inner(f, f, n, p, w)?.max(0.0).sqrt())
}

fn degree_weight(n: usize, q: f64, beta: f64) -> f64 {
    factorial(n).powf(1.0 + beta) * (n as f64 * q).exp2()
}

/// Inner product associated with `||.||_{p,q,beta}`:
/// `sum_n (n!)^{1+beta} 2^{nq} <f^(n), g^(n)>_p`.
pub fn inner_pqb(
    f: &ChaosElement,
    g: &ChaosElement,
    p: f64,
    q: f64,
    beta: f64,
    w: &WeightSequence,
) -> Result<f64> {
    f.check_weights(w)?;
    g.check_weights(w)?;
    let top = f.max_degree().min(g.max_degree());
    let mut acc = 0.0;
    for n in 0..=top {
        let kin = kernel_inner(f, g, n, p, w)?;
        if kin != 0.0 {
            acc += degree_weight(n, q, beta) * kin;
        }
    }
    Ok(acc)
}

/// Test-function norm `||phi||_{p,q,beta}`.
pub fn norm_pqb(phi: &ChaosElement, p: f64, q: f64, beta: f64, w: &WeightSequence) -> Result<f64> {
    phi.expect_role(Role::Test)?;
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta = {beta} outside [0, 1]"
        )));
    }
    phi.check_weights(w)?;
    let mut acc = 0.0;
    for n in 0..=phi.max_degree() {
        acc += degree_weight(n, q, beta) * kernel_inner(phi, phi, n, p, w)?.max(0.0);
    }
    Ok(acc.sqrt())
}

/// Dual norm `||Phi||_{-p,-q,-1} = sqrt(sum_n 2^{-nq} |Phi^(n)|_{-p}^2)`.
pub fn dual_norm(big_phi: &ChaosElement, p: f64, q: f64, w: &WeightSequence) -> Result<f64> {
    big_phi.expect_role(Role::Distribution)?;
    big_phi.check_weights(w)?;
    let mut acc = 0.0;
    for n in 0..=big_phi.max_degree() {
        acc += (-(n as f64) * q).exp2() * kernel_inner(big_phi, big_phi, n, -p, w)?.max(0.0);
    }
    Ok(acc.sqrt())
}

/// Dual pairing `<<Phi, phi>> = sum_n n! <Phi^(n), phi^(n)>`.
pub fn pair(big_phi: &ChaosElement, phi: &ChaosElement, w: &WeightSequence) -> Result<f64> {
    big_phi.expect_role(Role::Distribution)?;
    phi.expect_role(Role::Test)?;
    gaussian_product_expectation(big_phi, phi, w)
}

/// `E_mu[f g] = sum_n n! <f^(n), g^(n)>_0`, the L^2(mu) inner product of two
/// finite expansions regardless of their roles.
pub fn gaussian_product_expectation(
    f: &ChaosElement,
    g: &ChaosElement,
    w: &WeightSequence,
) -> Result<f64> {
    f.check_weights(w)?;
    g.check_weights(w)?;
    let top = f.max_degree().min(g.max_degree());
    let mut acc = 0.0;
    for n in 0..=top {
        acc += factorial(n) * kernel_inner(f, g, n, 0.0, w)?;
    }
    Ok(acc)
}

/// Pointwise value of a test function.
pub fn eval(phi: &ChaosElement, x: &Coords, w: &WeightSequence) -> Result<f64> {
    Ok(eval_with_magnitude(phi, x, w)?.0)
}

/// Pointwise value together with the sum of absolute values of the
/// monomials it is made of. The ratio of the two measures cancellation.
pub fn eval_with_magnitude(
    phi: &ChaosElement,
    x: &Coords,
    w: &WeightSequence,
) -> Result<(f64, f64)> {
    phi.expect_role(Role::Test)?;
    phi.check_weights(w)?;
    w.check_dim(x.dim())?;
    let (mut value, mut magnitude) = (0.0, 0.0);
    for k in phi.terms() {
        let (h, m) = if k.degree == 0 {
            (1.0, 1.0)
        } else {
            let var = k.direction.dot(&k.direction);
            hermite_scaled_pair(k.degree, x.dot(&k.direction), var)
        };
        value += k.coef * h;
        magnitude += k.coef.abs() * m;
    }
    Ok((value, magnitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_i0;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_moment(n: usize) -> f64 {
        crate::special::double_factorial_odd(n) * if n.is_multiple_of(2) { 1.0 } else { 0.0 }
    }

    #[test]
    fn wick_coefficients_examples() {
        assert_eq!(wick_from_monomial(0, 1.0), vec![(0, 1.0)]);
        assert_eq!(wick_from_monomial(1, 1.0), vec![(1, 1.0)]);
        assert_eq!(wick_from_monomial(2, 1.0), vec![(2, 1.0), (0, 1.0)]);
        assert_eq!(
            wick_from_monomial(4, 1.0),
            vec![(4, 1.0), (2, 6.0), (0, 3.0)]
        );
    }

    #[test]
    fn wick_degree_zero_is_gaussian_moment() {
        // E :<x,xi>^m: = 0 for m >= 1, so E <x,xi>^n is the degree-0 coefficient
        for n in 0..=14 {
            for s in [0.5, 1.0, 1.7] {
                let c0: f64 = wick_from_monomial(n, s)
                    .into_iter()
                    .filter(|(d, _)| *d == 0)
                    .map(|(_, c)| c)
                    .sum();
                assert_relative_eq!(
                    c0,
                    gaussian_moment(n) * s.powi(n as i32),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn merging_and_validation() {
        let xi = Coords::new(vec![1.0, 0.0]);
        let mut e = ChaosElement::zero(2, Role::Test);
        e.push(RankOneKernel::new(2, 1.0, xi.clone())).unwrap();
        e.push(RankOneKernel::new(2, 2.0, xi.clone())).unwrap();
        assert_eq!(e.kernels(2).len(), 1);
        assert_eq!(e.kernels(2)[0].coef, 3.0);
        e.push(RankOneKernel::new(2, -3.0, xi.clone())).unwrap();
        assert!(e.kernels(2).is_empty());
        assert_eq!(e.max_degree(), 0);
        assert!(matches!(
            e.push(RankOneKernel::new(1, 1.0, Coords::zeros(2))),
            Err(Error::InvalidKernel(_))
        ));
        assert!(e.push(RankOneKernel::new(0, 1.0, Coords::zeros(2))).is_ok());
        assert!(matches!(
            e.push(RankOneKernel::new(1, 1.0, Coords::zeros(3))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        let w = WeightSequence::harmonic(3);
        let one = ChaosElement::constant(3, Role::Test, 1.0);
        for (p, q, b) in [(0.0, 0.0, 0.0), (1.0, 2.0, 1.0), (2.5, 0.5, 0.3)] {
            assert_eq!(norm_pqb(&one, p, q, b, &w).unwrap(), 1.0);
        }
        let xi = Coords::new(vec![0.3, -0.2, 0.5]);
        let (p, q) = (1.0, 2.0);
        let xp = crate::hilbert_scale::norm_p(&xi, p, &w).unwrap();
        for n in 0..=8 {
            let wp = ChaosElement::wick_power(&xi, n, Role::Test).unwrap();
            let got = norm_pqb(&wp, p, q, 1.0, &w).unwrap();
            let want = factorial(n) * (0.5 * n as f64 * q).exp2() * xp.powi(n as i32);
            assert_relative_eq!(got, want, max_relative = 1e-13);
            let got0 = norm_pqb(&wp, p, q, 0.0, &w).unwrap();
            assert_relative_eq!(
                got0,
                factorial(n).sqrt() * (0.5 * n as f64 * q).exp2() * xp.powi(n as i32),
                max_relative = 1e-13
            );
        }
        assert!(matches!(
            norm_pqb(
                &one.clone().with_role(Role::Distribution),
                0.0,
                0.0,
                1.0,
                &w
            ),
            Err(Error::RoleMismatch { .. })
        ));
        assert!(norm_pqb(&one, 0.0, 0.0, 1.5, &w).is_err());
    }

    #[test]
    fn bessel_bound_on_monomials() {
        // ||<.,xi>^n||^2 <= I0(2^-q) (n!)^2 2^{nq} |xi|_p^{2n}, since |xi|_0 <= |xi|_p
        let w = WeightSequence::harmonic(3);
        let xi = Coords::new(vec![0.7, 0.1, -0.4]);
        for q in [0.0, 1.0, 2.0, 4.0] {
            for p in [0.0, 0.5, 1.0] {
                let xp = crate::hilbert_scale::norm_p(&xi, p, &w).unwrap();
                for n in 0..=12 {
                    let mono = ChaosElement::monomial(&xi, n, Role::Test).unwrap();
                    let lhs = norm_pqb(&mono, p, q, 1.0, &w).unwrap().powi(2);
                    let scale =
                        factorial(n).powi(2) * (n as f64 * q).exp2() * xp.powi(2 * n as i32);
                    assert!(lhs / scale <= bessel_i0((-q).exp2()) * (1.0 + 1e-12));
                }
            }
        }
        // unit weights and p = 0 make |xi|_0 = |xi|_p; the chain is then the
        // partial sum of the I0 series itself
        let w1 = WeightSequence::unit(2);
        let xi = Coords::new(vec![0.6, 0.8]);
        let mono = ChaosElement::monomial(&xi, 12, Role::Test).unwrap();
        let lhs = norm_pqb(&mono, 0.0, 0.0, 1.0, &w1).unwrap().powi(2) / factorial(12).powi(2);
        let partial: f64 = (0..=6)
            .map(|k| 0.25f64.powi(k) / factorial(k as usize).powi(2))
            .sum();
        assert_relative_eq!(lhs, partial, max_relative = 1e-13);
    }

    #[test]
    fn dual_norm_examples() {
        let w = WeightSequence::harmonic(2);
        let one = ChaosElement::constant(2, Role::Distribution, 1.0);
        assert_eq!(dual_norm(&one, 1.0, 1.0, &w).unwrap(), 1.0);

        let y = Coords::new(vec![0.8, -1.1]);
        let (p, q) = (1.0, 3.0);
        let yp = crate::hilbert_scale::norm_p(&y, -p, &w).unwrap();
        let lin = ChaosElement::wick_power(&y, 1, Role::Distribution).unwrap();
        assert_relative_eq!(
            dual_norm(&lin, p, q, &w).unwrap(),
            (-q / 2.0).exp2() * yp,
            max_relative = 1e-14
        );

        let n_max = 10;
        let exp_y = ChaosElement::wick_exponential(&y, n_max, Role::Distribution).unwrap();
        let partial: f64 = (0..=n_max)
            .map(|n| (-(n as f64) * q).exp2() * yp.powi(2 * n as i32) / factorial(n).powi(2))
            .sum();
        assert_relative_eq!(
            dual_norm(&exp_y, p, q, &w).unwrap(),
            partial.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn pairing_examples() {
        let w = WeightSequence::harmonic(3);
        let one_d = ChaosElement::constant(3, Role::Distribution, 1.0);
        let one_t = ChaosElement::constant(3, Role::Test, 1.0);
        assert_eq!(pair(&one_d, &one_t, &w).unwrap(), 1.0);

        let xi = Coords::new(vec![0.4, 1.2, -0.3]);
        let y = Coords::new(vec![-0.5, 0.2, 0.9]);
        let sq = ChaosElement::monomial(&xi, 2, Role::Test).unwrap();
        assert_relative_eq!(
            pair(&one_d, &sq, &w).unwrap(),
            xi.dot(&xi),
            max_relative = 1e-15
        );

        // shifted Gaussian N(y, I): E <x,xi>^2 = <y,xi>^2 + |xi|^2
        let phi_y = ChaosElement::wick_exponential(&y, 4, Role::Distribution).unwrap();
        let want = y.dot(&xi).powi(2) + xi.dot(&xi);
        assert_relative_eq!(pair(&phi_y, &sq, &w).unwrap(), want, max_relative = 1e-14);

        assert!(pair(&one_t, &one_d, &w).is_err());
    }

    #[test]
    fn eval_examples() {
        let w = WeightSequence::harmonic(2);
        let xi = Coords::new(vec![1.5, -0.5]);
        let x = Coords::new(vec![0.3, 2.0]);
        let one = ChaosElement::constant(2, Role::Test, 1.0);
        assert_eq!(eval(&one, &x, &w).unwrap(), 1.0);
        let t = x.dot(&xi);
        let wick2 = ChaosElement::wick_power(&xi, 2, Role::Test).unwrap();
        assert_relative_eq!(
            eval(&wick2, &x, &w).unwrap(),
            t * t - xi.dot(&xi),
            max_relative = 1e-14
        );
        let sq = ChaosElement::monomial(&xi, 2, Role::Test).unwrap();
        assert_relative_eq!(eval(&sq, &x, &w).unwrap(), t * t, max_relative = 1e-14);
    }

    #[test]
    fn monomial_round_trip_at_random_points() {
        // relative error measured against the magnitude of the Hermite terms,
        // the conditioning scale of the Wick-basis evaluation
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let w = WeightSequence::harmonic(4);
        for n in 0..=12 {
            let xi = Coords::new((0..4).map(|_| rng.random_range(-1.0..1.0)).collect());
            let mono = ChaosElement::monomial(&xi, n, Role::Test).unwrap();
            for _ in 0..200 {
                let x = Coords::new(
                    (0..4)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            2.0 * z
                        })
                        .collect(),
                );
                let exact = x.dot(&xi).powi(n as i32);
                let (val, mag) = eval_with_magnitude(&mono, &x, &w).unwrap();
                assert!(
                    (val - exact).abs() <= 1e-10 * mag.max(exact.abs()),
                    "n={n}: {val} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn wick_powers_orthogonal() {
        let w = WeightSequence::harmonic(3);
        let xi = Coords::new(vec![0.2, 0.9, -0.6]);
        for n in 0..=6 {
            for m in 0..=6 {
                let a = ChaosElement::wick_power(&xi, n, Role::Test).unwrap();
                let b = ChaosElement::wick_power(&xi, m, Role::Test).unwrap();
                let v = inner_pqb(&a, &b, 1.0, 2.0, 1.0, &w).unwrap();
                if n != m {
                    assert_eq!(v, 0.0);
                } else {
                    assert!(v > 0.0);
                }
            }
        }
    }

    fn arb_element(dim: usize, role: Role) -> impl Strategy<Value = ChaosElement> {
        prop::collection::vec(
            (
                0usize..6,
                -2.0..2.0f64,
                prop::collection::vec(-1.0..1.0f64, dim),
            ),
            1..6,
        )
        .prop_map(move |terms| {
            let mut e = ChaosElement::zero(dim, role);
            for (deg, c, dir) in terms {
                let dir = Coords::new(dir);
                if deg > 0 && dir.is_zero() {
                    continue;
                }
                e.push(RankOneKernel::new(deg, c, dir)).unwrap();
            }
            e
        })
    }

    proptest! {
        #[test]
        fn pairing_cauchy_schwarz(big in arb_element(3, Role::Distribution),
                                  small in arb_element(3, Role::Test),
                                  p in 0.0..2.0f64, q in 0.0..3.0f64) {
            let w = WeightSequence::harmonic(3);
            let lhs = pair(&big, &small, &w).unwrap().abs();
            let rhs = dual_norm(&big, p, q, &w).unwrap() * norm_pqb(&small, p, q, 1.0, &w).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn pairing_is_bilinear(a in arb_element(2, Role::Distribution),
                               b in arb_element(2, Role::Distribution),
                               f in arb_element(2, Role::Test),
                               s in -3.0..3.0f64) {
            let w = WeightSequence::harmonic(2);
            let combo = a.add(&b.scale(s)).unwrap();
            let lhs = pair(&combo, &f, &w).unwrap();
            let rhs = pair(&a, &f, &w).unwrap() + s * pair(&b, &f, &w).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
        }
    }
}
