//! Finite and infinite q-Pochhammer symbols `(z;q)_n = ∏_{k<n} (1 − z q^k)`.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Value of an infinite product together with its error budget.
#[derive(Debug, Clone, PartialEq)]
pub struct QPochhammerResult<T> {
    pub value: T,
    /// `ln |value|`, `None` when some factor vanishes exactly.
    pub log_abs: Option<T>,
    /// Bound on the relative error of `value`: the certified truncation
    /// remainder plus a `√K·ε` rounding estimate.
    pub relative_error_bound: T,
    pub terms_used: usize,
}

impl<T: Real> QPochhammerResult<T> {
    pub fn is_zero(&self) -> bool {
        self.log_abs.is_none()
    }
}

fn check_base<T: Real>(q: &T) -> Result<()> {
    if !(*q > T::zero() && *q < q.lift(1.0)) {
        return Err(Error::Domain(format!("q = {q} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(z;q)_n`, evaluated as a plain product.
pub fn qpoch_finite<T: Real>(z: &T, q: &T, n: usize) -> T {
    let mut acc = z.lift(1.0);
    let mut u = z.clone();
    for _ in 0..n {
        acc = acc * &(u.lift(1.0) - &u);
        u = u * q;
    }
    acc
}

/// Partial products outside this range are folded into the running
/// logarithm so that `f64` never overflows.
const FOLD_HI: f64 = 1e100;
const FOLD_LO: f64 = 1e-100;

/// `(z;q)_∞` truncated once `|z| q^K ≤ tol (1 − q) / 2`.
///
/// The neglected factors satisfy `|∑_{k≥K} ln(1 − z q^k)| ≤ r / (1 − r)` with
/// `r = |z| q^K / (1 − q)`, which is what `relative_error_bound` reports.
pub fn qpoch_infinite<T: Real>(z: &T, q: &T, tol: &T) -> Result<QPochhammerResult<T>> {
    check_base(q)?;
    let one = q.lift(1.0);
    let eps = q.epsilon();
    if !(*tol > T::zero()) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    if *tol < eps.clone() * &q.lift(8.0) {
        return Err(Error::NonConvergence(format!(
            "tolerance {tol} is below 8ε at {} bits",
            q.precision_bits()
        )));
    }
    let one_minus_q = one.clone() - q;
    let cutoff = tol.clone() * &one_minus_q / &q.lift(2.0);
    let abs_z = z.abs();

    let mut chunk = one.clone();
    let mut log_acc = T::zero();
    let mut negative = false;
    let mut folded = false;
    let mut u = z.clone();
    let mut u_abs = abs_z.clone();
    let mut k = 0usize;
    let hi = q.lift(FOLD_HI);
    let lo = q.lift(FOLD_LO);
    while u_abs > cutoff {
        let factor = one.clone() - &u;
        if factor.is_zero() {
            return Ok(QPochhammerResult {
                value: T::zero(),
                log_abs: None,
                relative_error_bound: T::zero(),
                terms_used: k + 1,
            });
        }
        chunk = chunk * &factor;
        let mag = chunk.abs();
        if mag > hi || mag < lo {
            negative ^= chunk.is_negative();
            log_acc = log_acc + &mag.ln();
            chunk = one.clone();
            folded = true;
        }
        u = u * q;
        u_abs = u_abs * q;
        k += 1;
    }
    negative ^= chunk.is_negative();
    let log_abs = log_acc + &chunk.abs().ln();
    let value = if folded {
        let m = log_abs.exp();
        if negative {
            -m
        } else {
            m
        }
    } else {
        chunk
    };

    let r = u_abs / &one_minus_q;
    let truncation = r.clone() / &(one.clone() - &r);
    let rounding = eps * &q.lift(((k + 1) as f64).sqrt());
    Ok(QPochhammerResult {
        value,
        log_abs: Some(log_abs),
        relative_error_bound: truncation + rounding,
        terms_used: k,
    })
}

/// Relative residual of `(z;q)_n (z q^n; q)_∞ = (z;q)_∞`.
pub fn qpoch_split_identity_check<T: Real>(z: &T, q: &T, n: usize, tol: &T) -> Result<T> {
    let head = qpoch_finite(z, q, n);
    let shifted = z.clone() * &q.powi(n as i64);
    let tail = qpoch_infinite(&shifted, q, tol)?;
    let whole = qpoch_infinite(z, q, tol)?;
    if whole.is_zero() {
        return Ok((head * &tail.value).abs());
    }
    Ok((head * &tail.value - &whole.value).abs() / &whole.value.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mp;
    use num_traits::Zero;
    use proptest::prelude::*;

    /// Euler's pentagonal-number series for `(q;q)_∞`.
    fn euler_pentagonal(q: f64) -> f64 {
        let mut s = 1.0;
        for k in 1..200i64 {
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            let a = q.powf((k * (3 * k - 1) / 2) as f64);
            let b = q.powf((k * (3 * k + 1) / 2) as f64);
            if a == 0.0 {
                break;
            }
            s += sign * (a + b);
        }
        s
    }

    #[test]
    fn finite_products() {
        assert_eq!(qpoch_finite(&0.7, &0.6, 0), 1.0);
        assert!((qpoch_finite(&0.7, &0.6, 1) - 0.3).abs() < 1e-16);
        let direct = (1.0 - 0.7) * (1.0 - 0.42) * (1.0 - 0.252);
        assert!((qpoch_finite(&0.7, &0.6, 3) - direct).abs() < 1e-16);
    }

    #[test]
    fn infinite_product_edge_values() {
        let r = qpoch_infinite(&0.0, &0.6, &1e-14).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.terms_used, 0);

        let r = qpoch_infinite(&1.0, &0.6, &1e-14).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.is_zero());
    }

    #[test]
    fn q_q_infinity_matches_pentagonal_series() {
        let r = qpoch_infinite(&0.6, &0.6, &1e-14).unwrap();
        let oracle = euler_pentagonal(0.6);
        assert!(
            (r.value - oracle).abs() / oracle < 1e-14,
            "{} vs {oracle}",
            r.value
        );
        assert!(r.relative_error_bound <= 1e-14);

        // Same value at 128 bits and tol 1e-15.
        let q = Mp::with_precision(0.6, 128);
        let tol = q.lift(1e-15);
        let r = qpoch_infinite(&q, &q, &tol).unwrap();
        assert!((r.value.as_f64() - oracle).abs() / oracle < 2e-15);
        assert!(r.relative_error_bound < tol);
    }

    #[test]
    fn tolerance_below_precision_is_rejected() {
        let err = qpoch_infinite(&0.6, &0.6, &1e-20).unwrap_err();
        assert!(matches!(err, Error::NonConvergence(_)));
        assert!(matches!(
            qpoch_infinite(&0.6, &1.0, &1e-10),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn split_identity_examples() {
        assert_eq!(
            qpoch_split_identity_check(&0.7, &0.6, 0, &1e-14).unwrap(),
            0.0
        );
        assert!(qpoch_split_identity_check(&0.7, &0.6, 5, &1e-14).unwrap() <= 1e-13);
        assert!(qpoch_split_identity_check(&-2.5, &0.6, 8, &1e-14).unwrap() <= 1e-13);
    }

    #[test]
    fn large_arguments_do_not_overflow_the_logarithm() {
        // (z;q)_∞ for z = -1e12 has ~250 factors above one.
        let r = qpoch_infinite(&-1e12, &0.6, &1e-13).unwrap();
        let log_direct: f64 = (0..400).map(|k| (1.0 + 1e12 * 0.6f64.powi(k)).ln()).sum();
        let log_abs = r.log_abs.unwrap();
        assert!((log_abs - log_direct).abs() / log_direct < 1e-13);

        let big = qpoch_infinite(&-1e150, &0.6, &1e-13).unwrap();
        assert!(big.value.is_infinite());
        assert!(big.log_abs.unwrap().is_finite());
    }

    #[test]
    fn multiprecision_product_is_consistent_with_f64() {
        let q = Mp::with_precision(0.6, 512);
        let z = q.lift(-2.5);
        let tol = q.lift(1e-140);
        let r = qpoch_infinite(&z, &q, &tol).unwrap();
        let f = qpoch_infinite(&-2.5, &0.6, &1e-14).unwrap();
        assert!((r.value.as_f64() - f.value).abs() / f.value < 1e-14);
        let res = qpoch_split_identity_check(&z, &q, 8, &tol).unwrap();
        assert!(res < q.lift(1e-139), "{res}");
        assert!(!r.value.is_zero());
    }

    proptest! {
        #[test]
        fn finite_product_recurrence(z in -5.0f64..5.0, q in 0.05f64..0.95, n in 0usize..40) {
            let lhs = qpoch_finite(&z, &q, n + 1);
            let rhs = (1.0 - z * q.powi(n as i32)) * qpoch_finite(&z, &q, n);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }

        #[test]
        fn first_factor_peels_off(z in -5.0f64..0.99, q in 0.05f64..0.95) {
            let tol = 1e-13;
            let whole = qpoch_infinite(&z, &q, &tol).unwrap().value;
            let rest = qpoch_infinite(&(z * q), &q, &tol).unwrap().value;
            prop_assert!(((1.0 - z) * rest - whole).abs() <= 10.0 * tol * whole.abs());
        }

        #[test]
        fn positive_below_one(z in -20.0f64..0.999, q in 0.05f64..0.95) {
            prop_assert!(qpoch_infinite(&z, &q, &1e-13).unwrap().value > 0.0);
        }

        #[test]
        fn decreasing_on_unit_interval(z1 in 0.0f64..0.98, dz in 0.001f64..0.02, q in 0.05f64..0.95) {
            let z2 = z1 + dz;
            let a = qpoch_infinite(&z1, &q, &1e-13).unwrap().value;
            let b = qpoch_infinite(&z2, &q, &1e-13).unwrap().value;
            prop_assert!(a > b);
        }
    }
}
