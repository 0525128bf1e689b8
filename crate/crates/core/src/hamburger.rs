//! General indeterminate Hamburger machinery.
//!
//! From a normalised moment sequence we extract the Jacobi recurrence of the
//! orthonormal polynomials `p_n` through a Cholesky factorisation of the
//! Hankel matrix, evaluate `p_n` and the second-kind polynomials `q_n` by
//! forward recurrence, and assemble the truncated Nevanlinna functions
//!
//! ```text
//! A(z) = z Σ q_k(z) q_k(0)        B(z) = −1 + z Σ p_k(z) q_k(0)
//! C(z) = 1 + z Σ q_k(z) p_k(0)    D(z) = z Σ p_k(z) p_k(0)
//! ```
//!
//! with `k = 0..=N`. The same evaluation code runs on real and complex
//! arguments.

use std::ops::{Div, Mul, Sub};

use num_complex::Complex;
use num_traits::Num;

use crate::error::{Error, Result};
use crate::scalar::{Mp, Real};

/// Normalised moments `m_0 = 1, m_1, …`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<T> {
    values: Vec<T>,
}

impl<T: Real> MomentSequence<T> {
    /// Rejects sequences whose `m_0` differs from one by more than
    /// `2^{-p/2}` at working precision `p`.
    pub fn new(values: Vec<T>) -> Result<Self> {
        let m0 = values
            .first()
            .ok_or_else(|| Error::Input("empty moment sequence".into()))?;
        let slack = m0.epsilon().sqrt();
        if (m0.clone() - &m0.lift(1.0)).abs() > slack {
            return Err(Error::Input(format!("m_0 = {m0} is not 1")));
        }
        Ok(MomentSequence { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn precision_bits(&self) -> usize {
        self.values[0].precision_bits()
    }
}

/// Coefficients of `x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k−1}`.
///
/// `diag[k] = a_k` for `k < n` and `offdiag[k] = b_{k+1} > 0`, so the
/// recurrence generates `p_0..p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRecurrence<T> {
    diag: Vec<T>,
    offdiag: Vec<T>,
}

impl<T: Real> JacobiRecurrence<T> {
    pub fn from_coefficients(diag: Vec<T>, offdiag: Vec<T>) -> Result<Self> {
        if diag.len() != offdiag.len() {
            return Err(Error::Input(format!(
                "{} diagonal vs {} off-diagonal coefficients",
                diag.len(),
                offdiag.len()
            )));
        }
        if let Some(b) = offdiag.iter().find(|b| !(**b > T::zero())) {
            return Err(Error::Input(format!(
                "off-diagonal coefficient {b} is not positive"
            )));
        }
        Ok(JacobiRecurrence { diag, offdiag })
    }

    /// Highest polynomial degree the recurrence reaches.
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.order());
        JacobiRecurrence {
            diag: self.diag[..n].to_vec(),
            offdiag: self.offdiag[..n].to_vec(),
        }
    }

    /// Largest relative difference between the coefficients of two
    /// recurrences of the same order.
    pub fn max_relative_difference(&self, other: &Self) -> T {
        let rel = |x: &T, y: &T| {
            let scale = x.abs().max_of(y.abs()).max_of(x.lift(1.0));
            (x.clone() - y).abs() / &scale
        };
        self.diag
            .iter()
            .zip(&other.diag)
            .chain(self.offdiag.iter().zip(&other.offdiag))
            .map(|(x, y)| rel(x, y))
            .fold(T::zero(), |m, d| m.max_of(d))
    }
}

/// Orthonormal recurrence of order `n` from `m_0..m_{2n}`.
///
/// With `H = RᵀR` the Cholesky factorisation of `(m_{i+j})_{0≤i,j≤n}`,
/// `a_j = r_{j,j+1}/r_{j,j} − r_{j−1,j}/r_{j−1,j−1}` and
/// `b_{j+1} = r_{j+1,j+1}/r_{j,j}`.
pub fn recurrence_from_moments<T: Real>(
    m: &MomentSequence<T>,
    n: usize,
) -> Result<JacobiRecurrence<T>> {
    let need = 2 * n + 1;
    if m.len() < need {
        return Err(Error::Input(format!(
            "order {n} needs {need} moments, got {}",
            m.len()
        )));
    }
    let h = m.values();
    let size = n + 1;
    let eps = h[0].epsilon();
    let mut r: Vec<Vec<T>> = vec![vec![T::zero(); size]; size];
    for i in 0..size {
        let mut pivot = h[2 * i].clone();
        for row in r.iter().take(i) {
            pivot = pivot - &row[i].square();
        }
        let floor = h[2 * i].abs() * &eps * &h[0].lift(64.0);
        if pivot <= floor {
            return Err(Error::IllConditioned(format!(
                "pivot {i} is {pivot} against diagonal {}",
                h[2 * i]
            )));
        }
        let rii = pivot.sqrt();
        for j in (i + 1)..size {
            let mut s = h[i + j].clone();
            for row in r.iter().take(i) {
                s = s - &(row[i].clone() * &row[j]);
            }
            r[i][j] = s / &rii;
        }
        r[i][i] = rii;
    }
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n);
    for j in 0..n {
        let mut a = r[j][j + 1].clone() / &r[j][j];
        if j > 0 {
            a = a - &(r[j - 1][j].clone() / &r[j - 1][j - 1]);
        }
        diag.push(a);
        offdiag.push(r[j + 1][j + 1].clone() / &r[j][j]);
    }
    JacobiRecurrence::from_coefficients(diag, offdiag)
}

/// Recurrence whose coefficients are stable under a doubling of precision.
///
/// `moments_at(bits)` must produce the moment sequence at `bits` of
/// precision. Returns the recurrence at the final precision and that
/// precision.
pub fn stable_recurrence(
    mut moments_at: impl FnMut(usize) -> Result<MomentSequence<Mp>>,
    n: usize,
    start_bits: usize,
    max_bits: usize,
    rel_threshold: f64,
) -> Result<(JacobiRecurrence<Mp>, usize)> {
    let mut bits = start_bits;
    let mut current = recurrence_from_moments(&moments_at(bits)?, n);
    while bits < max_bits {
        let next_bits = (2 * bits).min(max_bits);
        let next = recurrence_from_moments(&moments_at(next_bits)?, n);
        if let (Ok(lo), Ok(hi)) = (&current, &next) {
            if lo.max_relative_difference(hi).as_f64() <= rel_threshold {
                return Ok((hi.clone(), next_bits));
            }
        }
        current = next;
        bits = next_bits;
    }
    Err(Error::NonConvergence(format!(
        "recurrence of order {n} not stable to {rel_threshold:e} below {max_bits} bits"
    )))
}

/// Argument types the recurrences can be evaluated at: the real scalar
/// itself or a complex number over it.
pub trait RecurrenceArg<T>:
    Clone + Num + Sub<T, Output = Self> + Mul<T, Output = Self> + Div<T, Output = Self>
{
}

impl<T, S> RecurrenceArg<T> for S where
    S: Clone + Num + Sub<T, Output = S> + Mul<T, Output = S> + Div<T, Output = S>
{
}

fn run_recurrence<T: Real, S: RecurrenceArg<T>>(
    r: &JacobiRecurrence<T>,
    x: &S,
    mut out: Vec<S>,
    from: usize,
) -> Vec<S> {
    for k in from..r.order() {
        let mut next = (x.clone() - r.diag[k].clone()) * out[k].clone();
        if k > 0 {
            next = next - out[k - 1].clone() * r.offdiag[k - 1].clone();
        }
        out.push(next / r.offdiag[k].clone());
    }
    out
}

/// `p_0(x), …, p_n(x)`.
pub fn eval_first_kind<T: Real, S: RecurrenceArg<T>>(r: &JacobiRecurrence<T>, x: &S) -> Vec<S> {
    let mut out = Vec::with_capacity(r.order() + 1);
    out.push(S::one());
    run_recurrence(r, x, out, 0)
}

/// `q_0(x), …, q_n(x)`: the same recurrence started from `q_0 = 0`,
/// `q_1 = 1/b_1`.
pub fn eval_second_kind<T: Real, S: RecurrenceArg<T>>(r: &JacobiRecurrence<T>, x: &S) -> Vec<S> {
    let mut out = Vec::with_capacity(r.order() + 1);
    out.push(S::zero());
    if r.order() == 0 {
        return out;
    }
    out.push(S::one() / r.offdiag[0].clone());
    run_recurrence(r, x, out, 1)
}

/// Gauss rule with `n` nodes: the zeros of `p_n` and the Christoffel
/// weights `1 / Σ_{k<n} p_k(x)²`.
///
/// Nodes are bracketed by Sturm counts on the Jacobi matrix and polished by
/// Newton steps on `p_n`.
pub fn gauss_rule<T: Real>(r: &JacobiRecurrence<T>, n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if n == 0 || n > r.order() {
        return Err(Error::Input(format!(
            "Gauss rule with {n} nodes needs 1 ≤ n ≤ {}",
            r.order()
        )));
    }
    let r = r.truncated(n);
    let x0 = r.diag[0].clone();
    let (mut lo, mut hi) = (x0.clone(), x0.clone());
    for i in 0..n {
        let left = if i > 0 {
            r.offdiag[i - 1].clone()
        } else {
            T::zero()
        };
        let right = if i + 1 < n {
            r.offdiag[i].clone()
        } else {
            T::zero()
        };
        let spread = left + &right;
        lo = lo.min_of(r.diag[i].clone() - &spread);
        hi = hi.max_of(r.diag[i].clone() + &spread);
    }
    let scale = lo.abs().max_of(hi.abs()).max_of(x0.lift(1.0));
    let bracket_width = scale.clone() * &x0.lift(1e-12);
    let mut nodes = Vec::with_capacity(n);
    for j in 0..n {
        // eigenvalue j (ascending) is where the count of eigenvalues below x passes j
        let (mut a, mut b) = (lo.clone() - &x0.lift(1.0), hi.clone() + &x0.lift(1.0));
        while b.clone() - &a > bracket_width {
            let mid = (a.clone() + &b) / &x0.lift(2.0);
            if sturm_count(&r, &mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        let mut x = (a + &b) / &x0.lift(2.0);
        let target = x0.epsilon() * &scale * &x0.lift(4.0);
        for _ in 0..64 {
            let (p, dp) = value_and_derivative(&r, &x);
            if dp.is_zero() {
                break;
            }
            let step = p / &dp;
            x = x - &step;
            if step.abs() <= target {
                break;
            }
        }
        nodes.push(x);
    }
    let weights = nodes
        .iter()
        .map(|x| {
            let p = eval_first_kind(&r, x);
            let s = p[..n].iter().fold(T::zero(), |s, v| s + &v.square());
            x.lift(1.0) / s
        })
        .collect();
    Ok((nodes, weights))
}

/// Number of eigenvalues of the Jacobi matrix below `x`.
fn sturm_count<T: Real>(r: &JacobiRecurrence<T>, x: &T) -> usize {
    let tiny = x.epsilon() * &x.epsilon();
    let mut count = 0;
    let mut d = r.diag[0].clone() - x;
    for i in 0..r.order() {
        if i > 0 {
            let b = &r.offdiag[i - 1];
            d = r.diag[i].clone() - x - &(b.square() / &d);
        }
        if d.is_zero() {
            d = -tiny.clone();
        }
        if d.is_negative() {
            count += 1;
        }
    }
    count
}

fn value_and_derivative<T: Real>(r: &JacobiRecurrence<T>, x: &T) -> (T, T) {
    let mut p_prev = T::zero();
    let mut p = x.lift(1.0);
    let mut d_prev = T::zero();
    let mut d = T::zero();
    for k in 0..r.order() {
        let shifted = x.clone() - &r.diag[k];
        let mut p_next = shifted.clone() * &p;
        let mut d_next = shifted * &d + &p;
        if k > 0 {
            p_next = p_next - &(r.offdiag[k - 1].clone() * &p_prev);
            d_next = d_next - &(r.offdiag[k - 1].clone() * &d_prev);
        }
        p_prev = std::mem::replace(&mut p, p_next / &r.offdiag[k]);
        d_prev = std::mem::replace(&mut d, d_next / &r.offdiag[k]);
    }
    (p, d)
}

/// A point `t + iγ` of the open upper half-plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PickPoint<T> {
    pub t: T,
    pub gamma: T,
}

impl<T: Real> PickPoint<T> {
    pub fn new(t: T, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(Error::Domain(format!("gamma = {gamma} must be positive")));
        }
        Ok(PickPoint { t, gamma })
    }
}

/// Values of the four Nevanlinna functions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaValues<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Clone + Num> NevanlinnaValues<S> {
    /// `A D − B C`, identically one for the exact functions.
    pub fn determinant(&self) -> S {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }
}

/// Result of scanning `h(x) = (tB − D)² + γ²B²` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult<T> {
    pub min_h: T,
    pub argmin: T,
    pub b_at_min: T,
    pub d_at_min: T,
}

/// The truncated quadruple `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaQuadruple<T> {
    order: usize,
    pk0: Vec<T>,
    qk0: Vec<T>,
    recurrence: JacobiRecurrence<T>,
    tail_indicator: T,
}

/// Reference grid for tail monitoring: 11 points on `[−5, 5]`.
fn reference_grid<T: Real>(like: &T) -> Vec<T> {
    (0..11).map(|i| like.lift(-5.0 + i as f64)).collect()
}

/// Ratio of the largest term over the last quarter of indices to the
/// largest over the quarter before it, above which the series are treated
/// as non-decaying.
const DECAY_RATIO: f64 = 0.5;

/// Builds `(A, B, C, D)` truncated after the term `k = n`.
///
/// The term magnitudes `|z u_k(z) v_k(0)|` of the four series are monitored
/// on the reference grid; if the largest term in the last quarter of indices
/// is not below half the largest in the quarter before, the problem looks
/// determinate (or the order is too small) and `DivergenceSuspected` is
/// returned.
pub fn build_quadruple<T: Real>(
    r: &JacobiRecurrence<T>,
    n: usize,
) -> Result<NevanlinnaQuadruple<T>> {
    if n == 0 || n > r.order() {
        return Err(Error::Input(format!(
            "truncation order {n} needs a recurrence of order ≥ {n}, have {}",
            r.order()
        )));
    }
    let recurrence = r.truncated(n);
    let zero = recurrence.diag[0].lift(0.0);
    let pk0 = eval_first_kind(&recurrence, &zero);
    let qk0 = eval_second_kind(&recurrence, &zero);

    let mut term_max = vec![T::zero(); n + 1];
    for x in reference_grid(&zero) {
        let p = eval_first_kind(&recurrence, &x);
        let q = eval_second_kind(&recurrence, &x);
        for k in 0..=n {
            let terms = [
                q[k].clone() * &qk0[k],
                p[k].clone() * &qk0[k],
                q[k].clone() * &pk0[k],
                p[k].clone() * &pk0[k],
            ];
            for t in terms {
                let mag = (t * &x).abs();
                if mag > term_max[k] {
                    term_max[k] = mag;
                }
            }
        }
    }
    let tail_indicator = term_max[n].clone();
    let w = (n / 4).max(1);
    if n >= 2 * w && n >= 8 {
        let window_max = |range: std::ops::RangeInclusive<usize>| {
            range
                .map(|k| term_max[k].clone())
                .fold(T::zero(), |m, v| m.max_of(v))
        };
        let recent = window_max(n - w + 1..=n);
        let previous = window_max(n - 2 * w + 1..=n - w);
        if recent > previous.clone() * &zero.lift(DECAY_RATIO) {
            return Err(Error::DivergenceSuspected(format!(
                "Nevanlinna series terms do not decay: max over last {w} indices {} vs {} before",
                recent.as_f64(),
                previous.as_f64()
            )));
        }
    }
    Ok(NevanlinnaQuadruple {
        order: n,
        pk0,
        qk0,
        recurrence,
        tail_indicator,
    })
}

impl<T: Real> NevanlinnaQuadruple<T> {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn pk0(&self) -> &[T] {
        &self.pk0
    }

    pub fn qk0(&self) -> &[T] {
        &self.qk0
    }

    pub fn recurrence(&self) -> &JacobiRecurrence<T> {
        &self.recurrence
    }

    /// Largest magnitude of the last retained term on the reference grid.
    pub fn tail_indicator(&self) -> &T {
        &self.tail_indicator
    }

    /// `A(z), B(z), C(z), D(z)` for real or complex `z`.
    pub fn evaluate<S: RecurrenceArg<T>>(&self, z: &S) -> NevanlinnaValues<S> {
        let p = eval_first_kind(&self.recurrence, z);
        let q = eval_second_kind(&self.recurrence, z);
        let (mut sa, mut sb, mut sc, mut sd) = (S::zero(), S::zero(), S::zero(), S::zero());
        for k in 0..=self.order {
            sa = sa + q[k].clone() * self.qk0[k].clone();
            sb = sb + p[k].clone() * self.qk0[k].clone();
            sc = sc + q[k].clone() * self.pk0[k].clone();
            sd = sd + p[k].clone() * self.pk0[k].clone();
        }
        NevanlinnaValues {
            a: z.clone() * sa,
            b: z.clone() * sb - S::one(),
            c: z.clone() * sc + S::one(),
            d: z.clone() * sd,
        }
    }

    /// `|A(x)D(x) − B(x)C(x) − 1|`.
    pub fn det_residual(&self, x: &T) -> T {
        (self.evaluate(x).determinant() - x.lift(1.0)).abs()
    }

    /// `h(x) = (tB(x) − D(x))² + γ²B(x)²`.
    pub fn h(&self, p: &PickPoint<T>, x: &T) -> T {
        let v = self.evaluate(x);
        h_from(&v.b, &v.d, p)
    }

    /// `f_{t+iγ}(x) = (γ/π) / h(x)`.
    pub fn density_f(&self, p: &PickPoint<T>, x: &T) -> T {
        p.gamma.clone() / &p.gamma.pi() / &self.h(p, x)
    }

    /// `∫ dμ(x)/(x − z) = −(A(z)φ − C(z)) / (B(z)φ − D(z))` for the constant
    /// Pick function `φ ≡ t + iγ`, extended by conjugation below the axis.
    pub fn stieltjes_transform(&self, p: &PickPoint<T>, z: &Complex<T>) -> Result<Complex<T>> {
        if z.im.is_zero() {
            return Err(Error::Domain(format!("z = {z} lies on the real axis")));
        }
        let phi = if z.im.is_positive() {
            Complex::new(p.t.clone(), p.gamma.clone())
        } else {
            Complex::new(p.t.clone(), -p.gamma.clone())
        };
        let v = self.evaluate(z);
        let den = v.b * phi.clone() - v.d;
        if den.re.is_zero() && den.im.is_zero() {
            return Err(Error::DivergenceSuspected(format!(
                "B(z)φ − D(z) vanishes at z = {z}"
            )));
        }
        Ok(-(v.a * phi - v.c) / den)
    }

    /// Minimum of `h` over `grid`, with `B` and `D` at the minimiser.
    pub fn boundedness_probe(&self, p: &PickPoint<T>, grid: &[T]) -> Result<ProbeResult<T>> {
        let mut best: Option<ProbeResult<T>> = None;
        for x in grid {
            let v = self.evaluate(x);
            let h = h_from(&v.b, &v.d, p);
            if best.as_ref().is_none_or(|b| h < b.min_h) {
                best = Some(ProbeResult {
                    min_h: h,
                    argmin: x.clone(),
                    b_at_min: v.b,
                    d_at_min: v.d,
                });
            }
        }
        best.ok_or_else(|| Error::Input("empty probe grid".into()))
    }
}

fn h_from<T: Real>(b: &T, d: &T, p: &PickPoint<T>) -> T {
    let u = p.t.clone() * b - d;
    let v = p.gamma.clone() * b;
    u.square() + &v.square()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    /// `m_{2k} = (2k−1)!!`, odd moments zero.
    fn gaussian_moments(count: usize) -> Vec<f64> {
        (0..count)
            .map(|k| {
                if k % 2 == 1 {
                    0.0
                } else {
                    (1..k).step_by(2).map(|j| j as f64).product()
                }
            })
            .collect()
    }

    fn hermite() -> JacobiRecurrence<f64> {
        let m = MomentSequence::new(gaussian_moments(13)).unwrap();
        recurrence_from_moments(&m, 6).unwrap()
    }

    #[test]
    fn gaussian_recurrence_is_hermite() {
        let m = MomentSequence::new(gaussian_moments(7)).unwrap();
        let r = recurrence_from_moments(&m, 3).unwrap();
        for a in r.diag() {
            assert!(a.abs() < 1e-14);
        }
        for (b, want) in r.offdiag().iter().zip([1.0, 2f64.sqrt(), 3f64.sqrt()]) {
            assert!((b - want).abs() < 1e-13, "{b} vs {want}");
        }
    }

    #[test]
    fn trivial_order_zero() {
        let m = MomentSequence::new(vec![1.0]).unwrap();
        let r = recurrence_from_moments(&m, 0).unwrap();
        assert_eq!(r.order(), 0);
        assert_eq!(eval_first_kind(&r, &0.3), vec![1.0]);
        assert_eq!(eval_second_kind(&r, &0.3), vec![0.0]);
    }

    #[test]
    fn moment_validation() {
        assert!(matches!(
            MomentSequence::<f64>::new(vec![]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            MomentSequence::new(vec![2.0, 0.0]),
            Err(Error::Input(_))
        ));
        let m = MomentSequence::new(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            recurrence_from_moments(&m, 2),
            Err(Error::Input(_))
        ));
        // two-point measure: H_2 is singular
        let m = MomentSequence::new(vec![1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            recurrence_from_moments(&m, 2),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn hermite_values_at_zero() {
        let r = hermite();
        let p = eval_first_kind(&r, &0.0);
        assert_eq!(p[0], 1.0);
        assert!(p[1].abs() < 1e-15);
        assert!((p[2] + 1.0 / 2f64.sqrt()).abs() < 1e-14);
        let q = eval_second_kind(&r, &0.7);
        assert_eq!(q[0], 0.0);
        assert!((q[1] - 1.0 / r.offdiag()[0]).abs() < 1e-15);
    }

    #[test]
    fn second_kind_matches_defining_integral() {
        // Against the 7-point Gauss rule, exact for the degrees involved.
        let r = hermite();
        let (nodes, weights) = gauss_rule(&r, 6).unwrap();
        let z = 2.0;
        let pz = eval_first_kind(&r, &z);
        let qz = eval_second_kind(&r, &z);
        for n in 1..=5 {
            let integral: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * (pz[n] - eval_first_kind(&r, x)[n]) / (z - x))
                .sum();
            assert!((integral - qz[n]).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn gauss_rule_reproduces_moments() {
        let r = hermite();
        let (nodes, weights) = gauss_rule(&r, 6).unwrap();
        let m = gaussian_moments(12);
        for (j, mj) in m.iter().enumerate() {
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * f64::powi(*x, j as i32))
                .sum();
            assert!(
                (s - mj).abs() <= 1e-10 * mj.max(1.0),
                "moment {j}: {s} vs {mj}"
            );
        }
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn quadruple_at_origin() {
        let r = hermite();
        let quad = build_quadruple(&r, 4).unwrap();
        let v = quad.evaluate(&0.0);
        assert_eq!((v.a, v.b, v.c, v.d), (0.0, -1.0, 1.0, 0.0));
        assert_eq!(v.determinant(), 1.0);
        let p = PickPoint::new(0.3, 0.8).unwrap();
        assert!((quad.h(&p, &0.0) - (0.09 + 0.64)).abs() < 1e-15);
    }

    #[test]
    fn truncated_determinant_is_one() {
        let quad = build_quadruple(&hermite(), 6).unwrap();
        for x in [-1.5, 0.4, 2.0] {
            assert!(quad.det_residual(&x) < 1e-10);
        }
    }

    #[test]
    fn determinate_moments_are_flagged() {
        // f64 Hankel matrices of this size are numerically indefinite.
        let mut m = vec![Mp::with_precision(1.0, 512)];
        for k in 1..81usize {
            let v = if k % 2 == 1 {
                Mp::with_precision(0.0, 512)
            } else {
                m[k - 2].clone() * &Mp::with_precision((k - 1) as f64, 512)
            };
            m.push(v);
        }
        let m = MomentSequence::new(m).unwrap();
        let r = recurrence_from_moments(&m, 40).unwrap();
        assert!(matches!(
            build_quadruple(&r, 40),
            Err(Error::DivergenceSuspected(_))
        ));
    }

    #[test]
    fn pick_point_requires_upper_half_plane() {
        assert!(PickPoint::new(0.0, 0.0).is_err());
        assert!(PickPoint::new(1.0, -1.0).is_err());
    }

    #[test]
    fn stieltjes_transform_rejects_real_argument() {
        let quad = build_quadruple(&hermite(), 4).unwrap();
        let p = PickPoint::new(0.0, 1.0).unwrap();
        assert!(quad
            .stieltjes_transform(&p, &Complex::new(1.0, 0.0))
            .is_err());
        let w = quad
            .stieltjes_transform(&p, &Complex::new(0.5, 1.0))
            .unwrap();
        let wc = quad
            .stieltjes_transform(&p, &Complex::new(0.5, -1.0))
            .unwrap();
        assert!((w.conj() - wc).norm() < 1e-14);
        assert!(!w.im.is_zero());
    }
}
