//! PSD certificates on moment matrices.
//!
//! A positive distribution pairs non-negatively with every square
//! `(sum_k c_k <., xi>^k)^2`, i.e. its Hankel matrices `H_{jk} = M_{j+k}`
//! are positive semidefinite. A negative eigenvalue therefore certifies
//! non-positivity, and its eigenvector is an explicit witness polynomial.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chaos::{eval_with_magnitude, pair, ChaosElement, Role};
use crate::error::{Error, Result};
use crate::hilbert_scale::{Coords, WeightSequence};
use crate::moments::{polarized_moment, MomentSequence, Truncation};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Eigenvalues in `[-GRAY_BAND_FACTOR * tol * scale, -tol * scale)` are
/// reported as indeterminate.
pub const GRAY_BAND_FACTOR: f64 = 100.0;
pub const MAX_MULTI_INDICES: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Positive,
    NotPositive,
    Indeterminate,
}

fn verdict(min_eigenvalue: f64, scale: f64, tol: f64) -> Verdict {
    let band = tol * scale;
    if min_eigenvalue >= -band {
        Verdict::Positive
    } else if min_eigenvalue < -GRAY_BAND_FACTOR * band {
        Verdict::NotPositive
    } else {
        Verdict::Indeterminate
    }
}

/// Smallest eigenvalue with a unit eigenvector.
pub(crate) fn min_eigenpair(matrix: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let m = matrix.len();
    let dm = DMatrix::from_fn(m, m, |i, j| matrix[i][j]);
    let eig = SymmetricEigen::new(dm);
    let (idx, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    // deterministic sign: largest component positive
    let (_, &pivot) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .expect("non-empty");
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    (val, v)
}

fn max_abs(matrix: &[Vec<f64>]) -> f64 {
    matrix.iter().flatten().fold(0.0, |a, &b| a.max(b.abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelReport {
    pub size: usize,
    pub matrix: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub scale: f64,
    /// Coefficients `c_k` of the witness `(sum_k c_k <., xi>^k)^2` when the
    /// verdict is not positive.
    pub witness: Option<Vec<f64>>,
}

impl HankelReport {
    /// `c^T H c` for the witness, which equals the pairing of the moment
    /// functional with the witness square.
    pub fn witness_quadratic_form(&self) -> Option<f64> {
        self.witness.as_ref().map(|c| {
            let mut acc = 0.0;
            for (j, cj) in c.iter().enumerate() {
                for (k, ck) in c.iter().enumerate() {
                    acc += cj * ck * self.matrix[j][k];
                }
            }
            acc
        })
    }
}

/// Builds the `m x m` Hankel matrix of `ms` and classifies it.
pub fn hankel_check(ms: &MomentSequence, m: usize, tol: f64) -> Result<HankelReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("Hankel size must be >= 1".into()));
    }
    if 2 * (m - 1) > ms.order() {
        return Err(Error::InsufficientMoments(format!(
            "Hankel size {m} needs moments up to order {}, have {}",
            2 * (m - 1),
            ms.order()
        )));
    }
    let matrix: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|k| ms.values[j + k]).collect())
        .collect();
    let (min_eigenvalue, vec) = min_eigenpair(&matrix);
    let scale = max_abs(&matrix);
    let verdict = verdict(min_eigenvalue, scale, tol);
    Ok(HankelReport {
        size: m,
        matrix,
        min_eigenvalue,
        verdict,
        tolerance: tol,
        scale,
        witness: (verdict == Verdict::NotPositive).then_some(vec),
    })
}

/// The test function `(sum_k c_k <., xi>^k)^2` in the Wick basis.
pub fn witness_polynomial(coefs: &[f64], xi: &Coords) -> Result<ChaosElement> {
    let mut square = vec![0.0; 2 * coefs.len().max(1) - 1];
    for (j, cj) in coefs.iter().enumerate() {
        for (k, ck) in coefs.iter().enumerate() {
            square[j + k] += cj * ck;
        }
    }
    ChaosElement::polynomial_along(xi, &square, Role::Test)
}

/// Pairs `Phi` with the witness square of a Hankel report, through the chaos
/// pairing rather than the stored moments.
pub fn witness_pairing(
    big_phi: &ChaosElement,
    report: &HankelReport,
    xi: &Coords,
    w: &WeightSequence,
) -> Result<Option<f64>> {
    report
        .witness
        .as_ref()
        .map(|c| pair(big_phi, &witness_polynomial(c, xi)?, w))
        .transpose()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentMatrixReport {
    pub multi_indices: Vec<Vec<usize>>,
    pub matrix: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub scale: f64,
    /// Coefficients of `sum_alpha c_alpha prod_i <., b_i>^{alpha_i}` whose
    /// square pairs negatively, when the verdict is not positive.
    pub witness: Option<Vec<f64>>,
}

fn multi_indices(vars: usize, max_deg: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=max_deg {
        compositions(vars, total, &mut Vec::with_capacity(vars), &mut out);
    }
    out
}

fn compositions(vars: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == vars {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=remaining).rev() {
        prefix.push(first);
        compositions(vars, remaining - first, prefix, out);
        prefix.pop();
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Checks that every kernel direction of `Phi` lies in the span of `basis`.
fn check_span(big_phi: &ChaosElement, basis: &[Coords]) -> Result<()> {
    let mut ortho: Vec<Coords> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for o in &ortho {
            let c = v.dot(o);
            v.axpy(-c, o);
        }
        let n = v.norm0();
        if n > 1e-12 * b.norm0().max(1e-300) {
            ortho.push(v.scaled(1.0 / n));
        }
    }
    for k in big_phi.terms().filter(|k| k.degree > 0) {
        let mut r = k.direction.clone();
        for o in &ortho {
            let c = r.dot(o);
            r.axpy(-c, o);
        }
        if r.norm0() > 1e-9 * k.direction.norm0() {
            return Err(Error::InvalidParameter(format!(
                "basis does not span the degree-{} kernel direction {:?}",
                k.degree,
                k.direction.as_slice()
            )));
        }
    }
    Ok(())
}

/// Multivariate truncated moment matrix `<<Phi, x^alpha x^gamma>>` over all
/// multi-indices of total degree `<= max_deg` in the basis directions.
pub fn moment_matrix_check(
    big_phi: &ChaosElement,
    basis: &[Coords],
    max_deg: usize,
    tol: f64,
    w: &WeightSequence,
) -> Result<MomentMatrixReport> {
    big_phi.expect_role(Role::Distribution)?;
    if basis.is_empty() {
        return Err(Error::InvalidParameter("basis must not be empty".into()));
    }
    for b in basis {
        w.check_dim(b.dim())?;
    }
    let count = binomial(basis.len() + max_deg, max_deg);
    if count > MAX_MULTI_INDICES {
        return Err(Error::TooManyMultiIndices {
            count,
            limit: MAX_MULTI_INDICES,
        });
    }
    check_span(big_phi, basis)?;
    let indices = multi_indices(basis.len(), max_deg);
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut matrix = vec![vec![0.0; indices.len()]; indices.len()];
    for (i, a) in indices.iter().enumerate() {
        for (j, g) in indices.iter().enumerate().skip(i) {
            let sum: Vec<usize> = a.iter().zip(g).map(|(x, y)| x + y).collect();
            let value = match cache.get(&sum) {
                Some(v) => *v,
                None => {
                    let dirs: Vec<Coords> = sum
                        .iter()
                        .zip(basis)
                        .flat_map(|(&e, b)| std::iter::repeat_n(b.clone(), e))
                        .collect();
                    let v = polarized_moment(big_phi, &dirs, w, Truncation::Exact)?;
                    cache.insert(sum, v);
                    v
                }
            };
            matrix[i][j] = value;
            matrix[j][i] = value;
        }
    }
    let (min_eigenvalue, vec) = min_eigenpair(&matrix);
    let scale = max_abs(&matrix);
    let verdict = verdict(min_eigenvalue, scale, tol);
    Ok(MomentMatrixReport {
        multi_indices: indices,
        matrix,
        min_eigenvalue,
        verdict,
        tolerance: tol,
        scale,
        witness: (verdict == Verdict::NotPositive).then_some(vec),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "result")]
pub enum NonnegCheck {
    NoViolationFound { samples: usize },
    Violation { x: Coords, value: f64 },
}

const SAMPLE_RADII: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Probabilistic search for a point where the test function is negative.
///
/// Points are standard Gaussian directions scaled through a fixed ladder of
/// radii. Values within rounding of zero relative to the size of the
/// Hermite terms are not counted as violations.
pub fn testfn_nonneg(
    phi: &ChaosElement,
    samples: usize,
    seed: u64,
    w: &WeightSequence,
) -> Result<NonnegCheck> {
    phi.expect_role(Role::Test)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = w.dim();
    for i in 0..samples {
        let r = SAMPLE_RADII[i % SAMPLE_RADII.len()];
        let x = Coords::new(
            (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    r * z
                })
                .collect(),
        );
        let (value, magnitude) = eval_with_magnitude(phi, &x, w)?;
        if value < -1e-12 * magnitude {
            return Ok(NonnegCheck::Violation { x, value });
        }
    }
    Ok(NonnegCheck::NoViolationFound { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::{eval, RankOneKernel};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn ms(values: &[f64]) -> MomentSequence {
        MomentSequence::from_values(values.to_vec()).unwrap()
    }

    fn det3(m: &[Vec<f64>]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn gaussian_hankel_positive() {
        let r = hankel_check(&ms(&[1.0, 0.0, 1.0, 0.0, 3.0]), 3, DEFAULT_TOLERANCE).unwrap();
        // leading minors 1, 1, 2
        let m = &r.matrix;
        assert_eq!(m[0][0], 1.0);
        assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1.0);
        assert_eq!(det3(m), 2.0);
        assert_eq!(r.verdict, Verdict::Positive);
        assert!(r.witness.is_none());
    }

    #[test]
    fn wick_square_hankel_not_positive() {
        let r = hankel_check(&ms(&[0.0, 0.0, 2.0, 0.0, 12.0]), 3, DEFAULT_TOLERANCE).unwrap();
        // the {0,2} block [[0,2],[2,12]] has eigenvalues 6 ± sqrt(40)
        assert_relative_eq!(r.min_eigenvalue, 6.0 - 40f64.sqrt(), max_relative = 1e-12);
        assert_eq!(r.verdict, Verdict::NotPositive);
        assert_relative_eq!(
            r.witness_quadratic_form().unwrap(),
            r.min_eigenvalue,
            max_relative = 1e-12
        );
    }

    #[test]
    fn t_square_density_positive() {
        let r = hankel_check(&ms(&[1.0, 0.0, 3.0, 0.0, 15.0]), 3, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(r.verdict, Verdict::Positive);
    }

    #[test]
    fn hankel_needs_enough_moments() {
        assert!(matches!(
            hankel_check(&ms(&[1.0, 0.0, 1.0, 0.0, 3.0]), 4, DEFAULT_TOLERANCE),
            Err(Error::InsufficientMoments(_))
        ));
    }

    #[test]
    fn verdict_bands() {
        assert_eq!(verdict(-1e-10, 1.0, 1e-9), Verdict::Positive);
        assert_eq!(verdict(-1e-8, 1.0, 1e-9), Verdict::Indeterminate);
        assert_eq!(verdict(-1e-6, 1.0, 1e-9), Verdict::NotPositive);
    }

    #[test]
    fn verdict_invariant_under_scaling() {
        for values in [
            [1.0, 0.0, 1.0, 0.0, 3.0],
            [0.0, 0.0, 2.0, 0.0, 12.0],
            [1.0, 0.0, 3.0, 0.0, 15.0],
        ] {
            let base = hankel_check(&ms(&values), 3, DEFAULT_TOLERANCE).unwrap();
            for a in [1e-6, 0.3, 7.0, 1e8] {
                let scaled: Vec<f64> = values.iter().map(|v| a * v).collect();
                let r = hankel_check(&ms(&scaled), 3, DEFAULT_TOLERANCE).unwrap();
                assert_eq!(r.verdict, base.verdict);
                assert_relative_eq!(
                    r.min_eigenvalue,
                    a * base.min_eigenvalue,
                    max_relative = 1e-10,
                    epsilon = 1e-300
                );
            }
        }
    }

    #[test]
    fn witness_reproduces_negative_pairing() {
        let w = WeightSequence::harmonic(3);
        let xi = Coords::new(vec![0.5, -0.2, 0.4]);
        let ws = ChaosElement::wick_power(&xi, 2, Role::Distribution).unwrap();
        let moments =
            crate::moments::directional_moments(&ws, &xi, 6, &w, Truncation::Exact).unwrap();
        for m in [3, 4] {
            let r = hankel_check(&moments, m, DEFAULT_TOLERANCE).unwrap();
            assert_eq!(r.verdict, Verdict::NotPositive);
            let via_chaos = witness_pairing(&ws, &r, &xi, &w).unwrap().unwrap();
            assert!(via_chaos < 0.0);
            assert_relative_eq!(via_chaos, r.min_eigenvalue, max_relative = 1e-8);
        }
    }

    /// Distributions `phi^2 dmu` for polynomial phi along a direction: their
    /// Wick kernels come from expanding phi^2 as a polynomial.
    #[test]
    fn squares_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = WeightSequence::harmonic(2);
        for _ in 0..20 {
            let xi = Coords::new(vec![
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]);
            let coefs: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let density = witness_polynomial(&coefs, &xi)
                .unwrap()
                .with_role(Role::Distribution);
            let moments =
                crate::moments::directional_moments(&density, &xi, 10, &w, Truncation::Exact)
                    .unwrap();
            for m in 1..=6 {
                let r = hankel_check(&moments, m, DEFAULT_TOLERANCE).unwrap();
                assert_eq!(r.verdict, Verdict::Positive, "m={m} {r:?}");
            }
            let basis = [xi.clone(), Coords::new(vec![1.0, 0.0])];
            let mm = moment_matrix_check(&density, &basis, 2, DEFAULT_TOLERANCE, &w).unwrap();
            assert_eq!(mm.verdict, Verdict::Positive);
        }
    }

    #[test]
    fn moment_matrix_examples() {
        let w = WeightSequence::harmonic(2);
        let e1 = Coords::unit(2, 0);
        let e2 = Coords::unit(2, 1);
        let one = ChaosElement::constant(2, Role::Distribution, 1.0);
        let r =
            moment_matrix_check(&one, &[e1.clone(), e2.clone()], 2, DEFAULT_TOLERANCE, &w).unwrap();
        assert_eq!(r.multi_indices.len(), 6);
        assert_eq!(r.verdict, Verdict::Positive);
        // product-moment oracle: E x1^a x2^b = (a-1)!! (b-1)!! for even a, b
        let g = |n: usize| {
            if n % 2 == 1 {
                0.0
            } else {
                crate::special::double_factorial_odd(n)
            }
        };
        for (i, a) in r.multi_indices.iter().enumerate() {
            for (j, b) in r.multi_indices.iter().enumerate() {
                let want = g(a[0] + b[0]) * g(a[1] + b[1]);
                assert_relative_eq!(r.matrix[i][j], want, epsilon = 1e-12);
            }
        }

        let xi = Coords::new(vec![0.6, 0.8]);
        let ws = ChaosElement::wick_power(&xi, 2, Role::Distribution).unwrap();
        let r =
            moment_matrix_check(&ws, &[xi.clone(), e2.clone()], 2, DEFAULT_TOLERANCE, &w).unwrap();
        assert_eq!(r.verdict, Verdict::NotPositive);

        let y = Coords::new(vec![0.4, -0.3]);
        let phi_y = ChaosElement::wick_exponential(&y, 8, Role::Distribution).unwrap();
        let r = moment_matrix_check(&phi_y, &[e1.clone(), e2.clone()], 2, DEFAULT_TOLERANCE, &w)
            .unwrap();
        assert_eq!(r.verdict, Verdict::Positive);

        assert!(matches!(
            moment_matrix_check(&phi_y, std::slice::from_ref(&e1), 1, DEFAULT_TOLERANCE, &w),
            Err(Error::InvalidParameter(_))
        ));
        let w9 = WeightSequence::harmonic(9);
        let basis: Vec<Coords> = (0..9).map(|k| Coords::unit(9, k)).collect();
        let one9 = ChaosElement::constant(9, Role::Distribution, 1.0);
        assert!(matches!(
            moment_matrix_check(&one9, &basis, 4, DEFAULT_TOLERANCE, &w9),
            Err(Error::TooManyMultiIndices { .. })
        ));
    }

    #[test]
    fn nonneg_sampling() {
        let w = WeightSequence::harmonic(3);
        let xi = Coords::new(vec![0.3, 0.9, -0.2]);
        let sq = ChaosElement::monomial(&xi, 2, Role::Test).unwrap();
        assert!(matches!(
            testfn_nonneg(&sq, 2000, 1, &w).unwrap(),
            NonnegCheck::NoViolationFound { .. }
        ));

        let ws = ChaosElement::wick_power(&xi, 2, Role::Test).unwrap();
        match testfn_nonneg(&ws, 2000, 1, &w).unwrap() {
            NonnegCheck::Violation { x, value } => {
                assert!(value < 0.0);
                assert!(value >= -xi.dot(&xi) - 1e-12);
                assert_relative_eq!(eval(&ws, &x, &w).unwrap(), value);
            }
            other => panic!("expected violation, got {other:?}"),
        }

        let mut affine = ChaosElement::constant(3, Role::Test, 1.0);
        affine.push(RankOneKernel::new(1, 1.0, xi.clone())).unwrap();
        assert!(matches!(
            testfn_nonneg(&affine, 2000, 2, &w).unwrap(),
            NonnegCheck::Violation { .. }
        ));
    }
}
