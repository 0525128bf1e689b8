//! The Al-Salam–Carlitz moment problem in closed form.
//!
//! For `0 < q < 1 < a < 1/q` the problem is indeterminate even as a Stieltjes
//! problem. Everything here is expressed through infinite q-Pochhammer
//! symbols, written `[z]_∞ = (z;q)_∞`:
//!
//! * the density family `ν_ρ(x) = c(a) ρ / ([(1+x)/a]_∞² + ρ² [1+x]_∞²)`,
//! * the discrete solutions `μ_K` (atoms `q^{-n} − 1`) and `μ_F`
//!   (atoms `a q^{-n} − 1`),
//! * the constant `α = lim p_n(0)/q_n(0)`,
//! * the half-circle map `t ↦ (γ(t), ρ(t))` identifying `ν_ρ` with the
//!   Nevanlinna density `f_{t+iγ}`,
//! * the lower bound `LB(a,q)` of `φ(x) = [x]_∞² + [x/a]_∞²`.

use crate::error::{Error, Result};
use crate::qseries::{qpoch_infinite, QPochhammerResult};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `1 < a < 1/q`.
    IndeterminateStieltjes,
    /// `q < a < 1`.
    DeterminateStieltjes,
    /// `a = 1`.
    Boundary,
}

/// Validated parameter pair `(q, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QParams<T> {
    q: T,
    a: T,
    regime: Regime,
}

impl<T: Real> QParams<T> {
    pub fn new(q: T, a: T) -> Result<Self> {
        let one = q.lift(1.0);
        if !(q > T::zero() && q < one) {
            return Err(Error::Regime(format!("q = {q} must lie in (0, 1)")));
        }
        if !(a > T::zero()) {
            return Err(Error::Regime(format!("a = {a} must be positive")));
        }
        if !(a.clone() * &q < one) {
            return Err(Error::Regime(format!("a = {a} must be below 1/q")));
        }
        let regime = if a > one {
            Regime::IndeterminateStieltjes
        } else if a == one {
            Regime::Boundary
        } else if a > q {
            Regime::DeterminateStieltjes
        } else {
            return Err(Error::Regime(format!(
                "a = {a} ≤ q = {q} is outside the implemented regimes"
            )));
        };
        Ok(QParams { q, a, regime })
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    fn require_indeterminate(&self, what: &str) -> Result<()> {
        match self.regime {
            Regime::IndeterminateStieltjes => Ok(()),
            r => Err(Error::Regime(format!(
                "{what} requires 1 < a < 1/q, got {r:?}"
            ))),
        }
    }

    fn reject_boundary(&self, what: &str) -> Result<()> {
        match self.regime {
            Regime::Boundary => Err(Error::Regime(format!("{what} is degenerate at a = 1"))),
            _ => Ok(()),
        }
    }

    fn pinf(&self, z: &T, tol: &T) -> Result<QPochhammerResult<T>> {
        qpoch_infinite(z, &self.q, &product_tol(tol))
    }

    fn pinf_value(&self, z: &T, tol: &T) -> Result<T> {
        Ok(self.pinf(z, tol)?.value)
    }
}

/// Tolerances below the working precision are clamped for the products.
fn product_tol<T: Real>(tol: &T) -> T {
    tol.clone().max_of(tol.epsilon() * &tol.lift(16.0))
}

/// Atoms and weights of a truncated discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    pub atoms: Vec<T>,
    pub weights: Vec<T>,
    /// Bounds `|∑ weights − 1|`: neglected mass plus the relative error
    /// carried by every weight.
    pub truncation_tail_bound: T,
    weight_relative_error: T,
}

impl<T: Real> DiscreteMeasure<T> {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().fold(T::zero(), |s, w| s + w)
    }
}

/// Builds a measure from `w_0` and the weight ratio `w_{n+1}/w_n`.
///
/// Stops at the first `n` where `w_n < tol·q^n` has held for five
/// consecutive indices; the remaining mass is bounded geometrically with the
/// (decreasing) ratio at the cut.
fn build_measure<T: Real>(
    q: &T,
    first_weight: QPochhammerResult<T>,
    atom_scale: &T,
    ratio: impl Fn(usize) -> T,
    tol: &T,
) -> Result<DiscreteMeasure<T>> {
    const GUARD: usize = 5;
    const MAX_ATOMS: usize = 100_000;
    let one = q.lift(1.0);
    let mut atoms = Vec::new();
    let mut weights = Vec::new();
    let mut w = first_weight.value;
    let mut qinv = one.clone();
    let mut qn = one.clone();
    let mut below = 0usize;
    let mut n = 0usize;
    let tail = loop {
        if w.is_zero() {
            // f64 underflow: everything beyond is below the smallest subnormal.
            break T::zero();
        }
        atoms.push(atom_scale.clone() * &qinv - &one);
        weights.push(w.clone());
        below = if w < tol.clone() * &qn { below + 1 } else { 0 };
        let r = ratio(n);
        if below >= GUARD && r < one {
            break w.clone() * &r / &(one.clone() - &r);
        }
        if n >= MAX_ATOMS {
            return Err(Error::NonConvergence(format!(
                "weights not below {tol} after {MAX_ATOMS} atoms"
            )));
        }
        w = w * &r;
        qinv = qinv / q;
        qn = qn * q;
        n += 1;
    };
    let rounding = q.epsilon() * &q.lift(4.0 * (atoms.len() as f64 + 1.0));
    let weight_relative_error = first_weight.relative_error_bound + &rounding;
    let mass = weights.iter().fold(T::zero(), |s, x| s + x);
    let truncation_tail_bound = tail + &(weight_relative_error.clone() * &mass);
    Ok(DiscreteMeasure {
        atoms,
        weights,
        truncation_tail_bound,
        weight_relative_error,
    })
}

/// The discrete solution `μ_K` with atoms `q^{-n} − 1` and weights
/// `[aq]_∞ a^n q^{n²} / ([aq]_n [q]_n)`.
pub fn mu_k<T: Real>(params: &QParams<T>, tol: &T) -> Result<DiscreteMeasure<T>> {
    let (q, a) = (params.q.clone(), params.a.clone());
    let one = q.lift(1.0);
    let aq = a.clone() * &q;
    let first = params.pinf(&aq, tol)?;
    let ratio = |n: usize| {
        let qn1 = q.powi(n as i64 + 1);
        let num = a.clone() * &q.powi(2 * n as i64 + 1);
        num / &((one.clone() - &(a.clone() * &qn1)) * &(one.clone() - &qn1))
    };
    build_measure(&q, first, &one, ratio, tol)
}

/// The discrete solution `μ_F` with atoms `a q^{-n} − 1` and weights
/// `[q/a]_∞ a^{-n} q^{n²} / ([q/a]_n [q]_n)`.
///
/// For `a < 1` this is no longer a positive measure, so only the
/// indeterminate Stieltjes regime is accepted.
pub fn mu_f<T: Real>(params: &QParams<T>, tol: &T) -> Result<DiscreteMeasure<T>> {
    params.require_indeterminate("mu_F")?;
    let (q, a) = (params.q.clone(), params.a.clone());
    let one = q.lift(1.0);
    let q_over_a = q.clone() / &a;
    let first = params.pinf(&q_over_a, tol)?;
    let ratio = |n: usize| {
        let qn1 = q.powi(n as i64 + 1);
        let num = q.powi(2 * n as i64 + 1) / &a;
        num / &((one.clone() - &(qn1.clone() / &a)) * &(one.clone() - &qn1))
    };
    build_measure(&q, first, &a, ratio, tol)
}

/// A moment with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate<T> {
    pub value: T,
    pub tail_estimate: T,
}

/// `∑ w_n x_n^k` over the retained atoms.
///
/// The unretained terms are bounded by a geometric series whose ratio is the
/// ratio of the last two retained terms; the term ratios of `μ_K` and `μ_F`
/// decrease in `n`, so this dominates the true tail once it is below 1/2.
pub fn moments_of_discrete<T: Real>(
    m: &DiscreteMeasure<T>,
    k: u32,
    rel_tol: &T,
) -> Result<MomentEstimate<T>> {
    if m.is_empty() {
        return Err(Error::Input("empty measure".into()));
    }
    let one = m.weights[0].lift(1.0);
    let mut sum = T::zero();
    let mut abs_sum = T::zero();
    let mut last = T::zero();
    let mut prev = T::zero();
    for (x, w) in m.atoms.iter().zip(&m.weights) {
        let term = w.clone() * &x.powi(k as i64);
        sum = sum + &term;
        abs_sum = abs_sum + &term.abs();
        prev = std::mem::replace(&mut last, term.abs());
    }
    let half = one.lift(0.5);
    let tail = if last.is_zero() {
        T::zero()
    } else if prev.is_zero() {
        return Err(Error::Accuracy(format!(
            "moment {k}: too few atoms to bound the tail"
        )));
    } else {
        let r = last.clone() / &prev;
        if r >= half {
            return Err(Error::Accuracy(format!(
                "moment {k}: term ratio {r} at the cut is not below 1/2"
            )));
        }
        last * &r / &(one.clone() - &r)
    };
    let tail_estimate = tail + &(m.weight_relative_error.clone() * &abs_sum);
    if tail_estimate > rel_tol.clone() * &sum.abs() {
        return Err(Error::Accuracy(format!(
            "moment {k}: tail estimate {tail_estimate} exceeds {rel_tol} relative"
        )));
    }
    Ok(MomentEstimate {
        value: sum,
        tail_estimate,
    })
}

/// Moments `m_0..m_{count-1}` of `μ_K`, each with relative accuracy `rel_tol`.
///
/// The measure is regenerated with a squared weight tolerance until the
/// highest moment's tail is certified.
pub fn moment_sequence<T: Real>(params: &QParams<T>, count: usize, rel_tol: &T) -> Result<Vec<T>> {
    let mut tol = rel_tol.clone().min_of(rel_tol.lift(1e-3));
    for _ in 0..16 {
        let measure = mu_k(params, &tol)?;
        let moments: Result<Vec<T>> = (0..count as u32)
            .map(|k| moments_of_discrete(&measure, k, rel_tol).map(|e| e.value))
            .collect();
        match moments {
            Ok(v) => return Ok(v),
            Err(Error::Accuracy(_)) => tol = tol.clone() * &tol,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NonConvergence(format!(
        "could not certify {count} moments to {rel_tol}"
    )))
}

/// `α = −(∑_{n≥0} [q]_n / a^{n+1})^{-1}`.
pub fn alpha<T: Real>(params: &QParams<T>, tol: &T) -> Result<T> {
    params.require_indeterminate("alpha")?;
    let (q, a) = (&params.q, &params.a);
    let one = q.lift(1.0);
    let tail_factor = one.clone() / &(a.clone() - &one);
    let mut term = one.clone() / a;
    let mut sum = term.clone();
    let mut qn = one.clone();
    let mut n = 0usize;
    // (q;q)_n decreases, so the tail after term n is at most term_n / (a − 1).
    while term.clone() * &tail_factor >= tol.clone() * &sum {
        qn = qn * q;
        term = term * &(one.clone() - &qn) / a;
        sum = sum + &term;
        n += 1;
        if n > 1_000_000 {
            return Err(Error::NonConvergence("alpha series".into()));
        }
    }
    Ok(-(one / sum))
}

/// `c(a) = |a − 1| / (π a) · [q]_∞ [aq]_∞ [q/a]_∞`.
pub fn c_of_a<T: Real>(params: &QParams<T>, tol: &T) -> Result<T> {
    params.reject_boundary("c(a)")?;
    let (q, a) = (&params.q, &params.a);
    let one = q.lift(1.0);
    let prefactor = (a.clone() - &one).abs() / &(q.pi() * a);
    let products = params.pinf_value(q, tol)?
        * &params.pinf_value(&(a.clone() * q), tol)?
        * &params.pinf_value(&(q.clone() / a), tol)?;
    Ok(prefactor * &products)
}

/// `ln(e^u + e^v)` without overflow.
fn log_add_exp<T: Real>(u: T, v: T) -> T {
    let (hi, lo) = if u >= v { (u, v) } else { (v, u) };
    let d = lo - &hi;
    hi + &d.exp().ln_1p()
}

/// `2 ln|[z]_∞|`, `None` when the product vanishes.
fn log_square<T: Real>(params: &QParams<T>, z: &T, tol: &T) -> Result<Option<T>> {
    let r = params.pinf(z, tol)?;
    Ok(r.log_abs.map(|l| l.clone() + &l))
}

/// The density `ν_ρ` with its normalising constant precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NuDensity<T> {
    params: QParams<T>,
    rho: T,
    c: T,
    ln_c_rho: T,
    ln_rho_sq: T,
    tol: T,
}

impl<T: Real> NuDensity<T> {
    pub fn new(params: QParams<T>, rho: T, tol: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(Error::Domain(format!("rho = {rho} must be positive")));
        }
        let c = c_of_a(&params, &tol)?;
        let ln_c_rho = (c.clone() * &rho).ln();
        let ln_rho_sq = (rho.clone() * &rho).ln();
        Ok(NuDensity {
            params,
            rho,
            c,
            ln_c_rho,
            ln_rho_sq,
            tol,
        })
    }

    pub fn params(&self) -> &QParams<T> {
        &self.params
    }

    pub fn rho(&self) -> &T {
        &self.rho
    }

    pub fn c(&self) -> &T {
        &self.c
    }

    /// `ln([(1+x)/a]_∞² + ρ² [1+x]_∞²)`.
    pub fn ln_denominator(&self, x: &T) -> Result<T> {
        let y = x.clone() + &x.lift(1.0);
        let first = log_square(&self.params, &(y.clone() / &self.params.a), &self.tol)?;
        let second = log_square(&self.params, &y, &self.tol)?.map(|l| l + &self.ln_rho_sq);
        match (first, second) {
            (Some(u), Some(v)) => Ok(log_add_exp(u, v)),
            (Some(u), None) | (None, Some(u)) => Ok(u),
            (None, None) => unreachable!("[y]_∞ and [y/a]_∞ have no common zero"),
        }
    }

    pub fn ln_density(&self, x: &T) -> Result<T> {
        Ok(self.ln_c_rho.clone() - &self.ln_denominator(x)?)
    }

    pub fn density(&self, x: &T) -> Result<T> {
        Ok(self.ln_density(x)?.exp())
    }
}

/// `ν_ρ(x)` for a single point.
pub fn density_nu<T: Real>(params: &QParams<T>, rho: &T, x: &T, tol: &T) -> Result<T> {
    NuDensity::new(params.clone(), rho.clone(), tol.clone())?.density(x)
}

/// A point `t + iγ(t)` on the half-circle over `[α, 0]` and its `ρ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfCirclePoint<T> {
    pub t: T,
    pub gamma: T,
    pub rho: T,
}

/// `(a − 1) [q/a]_∞ / (a [q]_∞ [aq]_∞)`, the constant in `ρ(t)`.
pub fn rho_scale<T: Real>(params: &QParams<T>, tol: &T) -> Result<T> {
    params.require_indeterminate("rho(t)")?;
    let (q, a) = (&params.q, &params.a);
    let one = q.lift(1.0);
    let num = (a.clone() - &one) * &params.pinf_value(&(q.clone() / a), tol)?;
    let den =
        a.clone() * &params.pinf_value(q, tol)? * &params.pinf_value(&(a.clone() * q), tol)?;
    Ok(num / den)
}

/// `γ(t) = √(−t(t − α))` and `ρ(t) = γ / (t² + γ²) · rho_scale`.
pub fn halfcircle_point<T: Real>(
    params: &QParams<T>,
    t: &T,
    tol: &T,
) -> Result<HalfCirclePoint<T>> {
    let alpha = alpha(params, tol)?;
    if !(*t > alpha && *t < T::zero()) {
        return Err(Error::Domain(format!(
            "t = {t} must lie in (α, 0) = ({alpha}, 0)"
        )));
    }
    let gamma = (-(t.clone() * &(t.clone() - &alpha))).sqrt();
    // t² + γ² = tα on the circle
    let rho = gamma.clone() / &(t.clone() * &alpha) * &rho_scale(params, tol)?;
    Ok(HalfCirclePoint {
        t: t.clone(),
        gamma,
        rho,
    })
}

/// Inverse of [`halfcircle_point`]: with `t = αs`,
/// `ρ = (rho_scale/|α|) √((1 − s)/s)`.
pub fn halfcircle_from_rho<T: Real>(
    params: &QParams<T>,
    rho: &T,
    tol: &T,
) -> Result<HalfCirclePoint<T>> {
    if !(*rho > T::zero()) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    let alpha = alpha(params, tol)?;
    let scale = rho_scale(params, tol)?;
    let one = rho.lift(1.0);
    let k = rho.clone() * &alpha.abs() / &scale;
    let s = one.clone() / &(one.clone() + &(k.clone() * &k));
    let t = alpha.clone() * &s;
    let gamma = alpha.abs() * &(s.clone() * &(one - &s)).sqrt();
    Ok(HalfCirclePoint {
        t,
        gamma,
        rho: rho.clone(),
    })
}

/// `LB(a,q) = [√(aq)]_∞² [q/√a]_∞² · min{(1/√a − 1)², 1/[q/√a]_∞²}`.
pub fn lower_bound_lb<T: Real>(params: &QParams<T>, tol: &T) -> Result<T> {
    params.require_indeterminate("LB(a,q)")?;
    let (q, a) = (&params.q, &params.a);
    let one = q.lift(1.0);
    let sqrt_a = a.sqrt();
    let p1 = params.pinf_value(&(a.clone() * q).sqrt(), tol)?;
    let p2 = params.pinf_value(&(q.clone() / &sqrt_a), tol)?;
    let gap = one.clone() / &sqrt_a - &one;
    let m = (gap.clone() * &gap).min_of(one / &(p2.clone() * &p2));
    Ok(p1.clone() * &p1 * &p2 * &p2 * &m)
}

/// `φ(x) = [x]_∞² + [x/a]_∞²`.
pub fn phi<T: Real>(params: &QParams<T>, x: &T, tol: &T) -> Result<T> {
    let u = params.pinf_value(x, tol)?;
    let v = params.pinf_value(&(x.clone() / &params.a), tol)?;
    Ok(u.clone() * &u + &(v.clone() * &v))
}

/// `ln φ(x)`, finite where `φ` itself would overflow.
pub fn ln_phi<T: Real>(params: &QParams<T>, x: &T, tol: &T) -> Result<T> {
    let u = log_square(params, x, tol)?;
    let v = log_square(params, &(x.clone() / &params.a), tol)?;
    match (u, v) {
        (Some(u), Some(v)) => Ok(log_add_exp(u, v)),
        (Some(u), None) | (None, Some(u)) => Ok(u),
        (None, None) => unreachable!("[x]_∞ and [x/a]_∞ have no common zero"),
    }
}

/// Evaluation points for checking `φ ≥ LB`.
///
/// A linear segment on `[−10, qβ]` followed by the q-adic shells
/// `[β q^{1−n}, β q^{−n}]`, `n = 0..shells`, with `β = √(a/q)`, each sampled
/// at `per_shell` points plus the zeros `q^{−k}` of `[x]_∞` and `a q^{−k}` of
/// `[x/a]_∞` that fall inside.
pub fn boundedness_grid<T: Real>(params: &QParams<T>, shells: usize, per_shell: usize) -> Vec<T> {
    let (q, a) = (&params.q, &params.a);
    let beta = (a.clone() / q).sqrt();
    let lo = q.lift(-10.0);
    let hi = q.clone() * &beta;
    let linear = 2000usize;
    let mut grid: Vec<T> = (0..=linear)
        .map(|i| {
            let s = q.lift(i as f64 / linear as f64);
            lo.clone() + &(s * &(hi.clone() - &lo))
        })
        .collect();
    let mut right = beta.clone();
    let mut left = hi;
    let mut qinv = q.lift(1.0);
    for _ in 0..shells {
        for i in 1..=per_shell {
            let s = q.lift(i as f64 / per_shell as f64);
            grid.push(left.clone() + &(s * &(right.clone() - &left)));
        }
        grid.push(qinv.clone());
        grid.push(a.clone() * &qinv);
        left = right.clone();
        right = right / q;
        qinv = qinv / q;
    }
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite grid"));
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Mp;
    use num_traits::Signed;

    const TOL: f64 = 1e-14;

    fn p() -> QParams<f64> {
        QParams::new(0.6, 1.2).unwrap()
    }

    /// Direct product, independent of `qpoch_infinite`.
    fn brute(z: f64, q: f64) -> f64 {
        (0..2000).map(|k| 1.0 - z * q.powi(k)).product()
    }

    #[test]
    fn regimes() {
        assert_eq!(p().regime(), Regime::IndeterminateStieltjes);
        assert_eq!(
            QParams::new(0.6, 0.8).unwrap().regime(),
            Regime::DeterminateStieltjes
        );
        assert_eq!(QParams::new(0.6, 1.0).unwrap().regime(), Regime::Boundary);
        assert!(matches!(QParams::new(0.6, 2.0), Err(Error::Regime(_))));
        assert!(matches!(QParams::new(0.6, 0.5), Err(Error::Regime(_))));
        assert!(matches!(QParams::new(1.0, 0.5), Err(Error::Regime(_))));
    }

    #[test]
    fn alpha_from_partial_sums() {
        // Plain partial sums of (q;q)_n / a^{n+1}.
        let mut s = 0.0;
        for n in 0..2000 {
            s += brute_finite(0.6, 0.6, n) / 1.2f64.powi(n as i32 + 1);
        }
        let oracle = -1.0 / s;
        let a = alpha(&p(), &1e-15).unwrap();
        assert!((a - oracle).abs() < 1e-14, "{a} vs {oracle}");
        assert!(a < 0.0);

        let a1 = alpha(&QParams::new(0.6, 1.66).unwrap(), &1e-15).unwrap();
        let a2 = alpha(&QParams::new(0.6, 1.6666).unwrap(), &1e-15).unwrap();
        assert!((a1 - a2).abs() < 1e-2);
        assert!(matches!(
            alpha(&QParams::new(0.6, 0.8).unwrap(), &1e-15),
            Err(Error::Regime(_))
        ));
    }

    fn brute_finite(z: f64, q: f64, n: usize) -> f64 {
        (0..n).map(|k| 1.0 - z * q.powi(k as i32)).product()
    }

    #[test]
    fn c_of_a_examples() {
        let c = c_of_a(&p(), &TOL).unwrap();
        let oracle = 0.2 / (1.2 * std::f64::consts::PI)
            * brute(0.6, 0.6)
            * brute(0.72, 0.6)
            * brute(0.5, 0.6);
        assert!((c - oracle).abs() / oracle < 1e-13);

        let low = QParams::new(0.6, 0.8).unwrap();
        let c = c_of_a(&low, &TOL).unwrap();
        let oracle = 0.2 / (0.8 * std::f64::consts::PI)
            * brute(0.6, 0.6)
            * brute(0.48, 0.6)
            * brute(0.75, 0.6);
        assert!((c - oracle).abs() / oracle < 1e-13);
        assert!(matches!(
            c_of_a(&QParams::new(0.6, 1.0).unwrap(), &TOL),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn density_at_minus_one_is_half_c() {
        let c = c_of_a(&p(), &TOL).unwrap();
        let v = density_nu(&p(), &1.0, &-1.0, &TOL).unwrap();
        assert!((v - c / 2.0).abs() / c < 1e-13);
    }

    #[test]
    fn density_matches_direct_formula() {
        let c = c_of_a(&p(), &TOL).unwrap();
        for &x in &[-3.0, -0.5, 0.3, 1.9, 4.2, 40.0] {
            for &rho in &[0.2, 1.0, 7.0] {
                let y: f64 = 1.0 + x;
                let direct =
                    c * rho / (brute(y / 1.2, 0.6).powi(2) + rho * rho * brute(y, 0.6).powi(2));
                let v = density_nu(&p(), &rho, &x, &TOL).unwrap();
                assert!((v - direct).abs() / direct < 1e-12, "x={x} rho={rho}");
            }
        }
    }

    #[test]
    fn mu_k_and_mu_f_first_atoms() {
        let k = mu_k(&p(), &1e-14).unwrap();
        assert_eq!(k.atoms[0], 0.0);
        assert!((k.weights[0] - brute(0.72, 0.6)).abs() < 1e-14);
        assert!(k.atoms.windows(2).all(|w| w[0] < w[1]));
        assert!(k.weights.iter().all(|&w| w > 0.0));

        let f = mu_f(&p(), &1e-14).unwrap();
        assert!((f.atoms[0] - 0.2).abs() < 1e-15);
        assert!((f.weights[0] - brute(0.5, 0.6)).abs() < 1e-14);
        assert!(matches!(
            mu_f(&QParams::new(0.6, 0.8).unwrap(), &1e-14),
            Err(Error::Regime(_))
        ));
        assert!(mu_k(&QParams::new(0.6, 0.8).unwrap(), &1e-14).is_ok());
    }

    #[test]
    fn measures_are_normalised_at_high_precision() {
        let q = Mp::with_precision(0.6, 256);
        let params = QParams::new(q.clone(), q.lift(1.2)).unwrap();
        let tol = q.lift(1e-20);
        for m in [mu_k(&params, &tol).unwrap(), mu_f(&params, &tol).unwrap()] {
            let dev = (m.total_mass() - q.lift(1.0)).abs();
            assert!(dev <= m.truncation_tail_bound);
            assert!(dev < q.lift(1e-20), "{dev}");
            assert!(m.truncation_tail_bound < q.lift(1e-20));
        }
    }

    #[test]
    fn first_moment_is_a_direct_sum() {
        let m = mu_k(&p(), &1e-14).unwrap();
        let direct: f64 = (0..60)
            .map(|n| {
                let w = brute(0.72, 0.6) * 1.2f64.powi(n) * 0.6f64.powi(n * n)
                    / (brute_finite(0.72, 0.6, n as usize) * brute_finite(0.6, 0.6, n as usize));
                w * (0.6f64.powi(-n) - 1.0)
            })
            .sum();
        let est = moments_of_discrete(&m, 1, &1e-12).unwrap();
        assert!((est.value - direct).abs() / direct < 1e-13);
        let zeroth = moments_of_discrete(&m, 0, &1e-12).unwrap();
        assert!((zeroth.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn high_moments_need_deeper_truncation() {
        let q = Mp::with_precision(0.6, 256);
        let params = QParams::new(q.clone(), q.lift(1.2)).unwrap();
        let shallow = mu_k(&params, &q.lift(1e-10)).unwrap();
        let err = moments_of_discrete(&shallow, 30, &q.lift(1e-60)).unwrap_err();
        assert!(matches!(err, Error::Accuracy(_)));

        let rel = q.lift(1e-60);
        let seq = moment_sequence(&params, 31, &rel).unwrap();
        let f = mu_f(&params, &q.lift(1e-200)).unwrap();
        let m30 = moments_of_discrete(&f, 30, &rel).unwrap().value;
        assert!(((m30 - &seq[30]) / &seq[30]).abs() < q.lift(1e-55));
    }

    #[test]
    fn halfcircle_midpoint() {
        let a = alpha(&p(), &1e-15).unwrap();
        let h = halfcircle_point(&p(), &(a / 2.0), &1e-15).unwrap();
        assert!((h.gamma - a.abs() / 2.0).abs() < 1e-15);
        let c = rho_scale(&p(), &TOL).unwrap();
        assert!((h.rho - c / a.abs()).abs() / h.rho < 1e-13);
        assert!(matches!(
            halfcircle_point(&p(), &0.1, &1e-15),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            halfcircle_point(&p(), &(a - 0.1), &1e-15),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn halfcircle_blows_up_near_zero_and_inverts() {
        let a = alpha(&p(), &1e-15).unwrap();
        let r1 = halfcircle_point(&p(), &(-1e-3 * a.abs()), &1e-15)
            .unwrap()
            .rho;
        let r2 = halfcircle_point(&p(), &(-1e-6 * a.abs()), &1e-15)
            .unwrap()
            .rho;
        assert!(r2 > r1 && r1 > 0.0);

        let mut last = 0.0;
        for i in 1..200 {
            let t = a * (1.0 - i as f64 / 200.0);
            let h = halfcircle_point(&p(), &t, &1e-15).unwrap();
            let circle = h.gamma * h.gamma + t * t;
            assert!((circle - t * a).abs() <= 1e-12 * (t * a));
            assert!(h.rho > last);
            last = h.rho;
            let back = halfcircle_from_rho(&p(), &h.rho, &1e-15).unwrap();
            assert!((back.t - t).abs() < 1e-12);
            assert!((back.gamma - h.gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn lb_and_phi() {
        let lb = lower_bound_lb(&p(), &TOL).unwrap();
        let (sa, sq) = (1.2f64.sqrt(), (1.2f64 * 0.6).sqrt());
        let p2 = brute(0.6 / sa, 0.6);
        let oracle =
            brute(sq, 0.6).powi(2) * p2 * p2 * ((1.0 / sa - 1.0).powi(2)).min(1.0 / (p2 * p2));
        assert!((lb - oracle).abs() / oracle < 1e-13);
        assert!(lb > 0.0);
        assert!(matches!(
            lower_bound_lb(&QParams::new(0.6, 0.8).unwrap(), &TOL),
            Err(Error::Regime(_))
        ));

        assert!((phi(&p(), &0.0, &TOL).unwrap() - 2.0).abs() < 1e-15);
        let at_one = phi(&p(), &1.0, &TOL).unwrap();
        assert!((at_one - brute(1.0 / 1.2, 0.6).powi(2)).abs() < 1e-14);
        let big = 1e6f64;
        assert!(ln_phi(&p(), &big, &TOL).unwrap() > 4.0 * big.ln());
        assert!(phi(&p(), &big, &TOL).unwrap() > big.powi(4));
    }

    #[test]
    fn phi_bounded_below_on_grid() {
        let params = p();
        let lb = lower_bound_lb(&params, &TOL).unwrap();
        let grid = boundedness_grid(&params, 40, 64);
        assert!(grid.len() > 2000 + 40 * 64);
        assert!(*grid.last().unwrap() > 1e8);
        for x in grid {
            assert!(ln_phi(&params, &x, &TOL).unwrap() >= lb.ln(), "x = {x}");
        }
    }

    /// Frozen after agreement with the partial-sum and plain-product oracles
    /// above.
    #[test]
    fn regression_constants_at_reference_parameters() {
        let cases = [
            (alpha(&p(), &1e-15).unwrap(), -5.794_965_679_440_739e-1),
            (lower_bound_lb(&p(), &1e-15).unwrap(), 2.453_800_874_633_132e-7),
            (c_of_a(&p(), &1e-15).unwrap(), 1.288_805_899_620_572e-4),
        ];
        for (got, frozen) in cases {
            assert!(((got - frozen) / frozen).abs() < 1e-13, "{got} vs {frozen}");
        }
    }
}
