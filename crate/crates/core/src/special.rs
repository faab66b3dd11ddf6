//! Factorials, the modified Bessel function I0 and scaled Hermite polynomials.

use libm::lgamma as ln_gamma;

const EXACT_FACTORIAL_MAX: usize = 20;

/// n! as a float. Exact integer arithmetic up to 20!, log-gamma beyond.
pub fn factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_gamma(n as f64 + 1.0).exp()
    }
}

pub fn ln_factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        factorial(n).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// (n-1)!! with the convention (-1)!! = 1, i.e. the 2k-th standard Gaussian
/// moment when n = 2k.
pub fn double_factorial_odd(n: usize) -> f64 {
    let mut acc = 1.0;
    let mut k = n as i64 - 1;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Modified Bessel function of the first kind, order zero, by its power
/// series sum_k (z/2)^{2k} / (k!)^2.
pub fn bessel_i0(z: f64) -> f64 {
    let quarter = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= quarter / (k * k);
        sum += term;
        if term <= f64::EPSILON * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Hermite polynomial with variance `var`, H_n(t; var) = var^{n/2} He_n(t / sqrt(var)).
///
/// This is the Wick power :<x, eta>^n: evaluated at t = <x, eta> with
/// var = |eta|_0^2. The three-term recurrence avoids dividing by |eta|_0.
pub fn hermite_scaled(n: usize, t: f64, var: f64) -> f64 {
    hermite_scaled_pair(n, t, var).0
}

/// Returns (H_n(t; var), majorant) where the majorant is the same recurrence
/// run with |t| and a plus sign. It bounds the sum of absolute values of the
/// monomials making up H_n, i.e. the scale of cancellation in the value.
pub fn hermite_scaled_pair(n: usize, t: f64, var: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 1.0);
    }
    let (mut h_prev, mut h) = (1.0, t);
    let (mut m_prev, mut m) = (1.0, t.abs());
    for k in 1..n {
        let kf = k as f64;
        let h_next = t * h - kf * var * h_prev;
        let m_next = t.abs() * m + kf * var * m_prev;
        h_prev = h;
        h = h_next;
        m_prev = m;
        m = m_next;
    }
    (h, m)
}

/// Power-basis coefficients of H_n(t; var): entry k multiplies t^k.
pub fn hermite_scaled_coefficients(n: usize, var: f64) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for k in 1..n {
        let mut next = vec![0.0; k + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * var * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn factorial_exact_and_large() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(20), 2_432_902_008_176_640_000.0);
        let direct: f64 = (1..=25).map(|k| k as f64).product();
        assert_relative_eq!(factorial(25), direct, max_relative = 1e-12);
    }

    #[test]
    fn double_factorial_values() {
        assert_eq!(double_factorial_odd(0), 1.0);
        assert_eq!(double_factorial_odd(2), 1.0);
        assert_eq!(double_factorial_odd(4), 3.0);
        assert_eq!(double_factorial_odd(6), 15.0);
    }

    #[test]
    fn i0_reference() {
        assert_relative_eq!(bessel_i0(0.0), 1.0);
        assert_relative_eq!(
            bessel_i0(1.0),
            1.266_065_877_752_008_4,
            max_relative = 1e-15
        );
        assert_relative_eq!(bessel_i0(2.0), 2.279_585_302_336_067, max_relative = 1e-14);
    }

    #[test]
    fn hermite_low_orders() {
        // He_2 = t^2 - 1, He_3 = t^3 - 3t, He_4 = t^4 - 6t^2 + 3
        assert_relative_eq!(hermite_scaled(2, 1.5, 1.0), 1.25);
        assert_relative_eq!(hermite_scaled(3, 2.0, 1.0), 2.0);
        assert_relative_eq!(hermite_scaled(4, 1.0, 1.0), -2.0);
        // variance scaling: H_2(t; v) = t^2 - v
        assert_relative_eq!(hermite_scaled(2, 3.0, 4.0), 5.0);
        assert_eq!(
            hermite_scaled_coefficients(4, 1.0),
            vec![3.0, 0.0, -6.0, 0.0, 1.0]
        );
    }
}
