//! Shannon entropy `H[f] = −∫ f log f` of densities on the line.
//!
//! Two routes are provided. [`entropy_of_density`] integrates `−f log f`
//! directly; [`entropy_of_family`] uses the representation
//! `H = log(π/γ) + (γ/π) ∫ log h / h` of a member `f = (γ/π)/h` of a
//! Nevanlinna density family. Both integrate over `[−X, X]` with `X`
//! doubling until the neglected part is bounded by the requested tolerance.
//!
//! The tail bound uses `|log f(x)| ≤ L + |x|` outside the window, with `L`
//! taken as twice the largest `|log f| − |x|` seen so far, together with the
//! Chebyshev estimates `∫_{|x|>X} f ≤ m_{2k}/X^{2k}` and
//! `∫_{|x|>X} |x| f ≤ m_{2k}/X^{2k−1}`, minimised over the available even
//! moments.
//!
//! Everything here runs in `f64`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::ascarlitz::{self, NuDensity, QParams};
use crate::error::{Error, Result};
use crate::hamburger::{NevanlinnaQuadruple, PickPoint};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on `H`, shared between quadrature and tail.
    pub tol: f64,
    pub initial_window: f64,
    pub max_window: f64,
    /// Maximum number of panels per integration range.
    pub refinement_limit: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tol: 1e-6,
            initial_window: 8.0,
            max_window: 65536.0,
            refinement_limit: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureConfig {
            tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Input(format!(
                "tolerance {} must be positive",
                self.tol
            )));
        }
        if !(self.initial_window > 0.0 && self.initial_window <= self.max_window) {
            return Err(Error::Input(format!(
                "need 0 < initial_window ({}) ≤ max_window ({})",
                self.initial_window, self.max_window
            )));
        }
        if self.refinement_limit == 0 {
            return Err(Error::Input("refinement_limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult {
    /// `H` in nats.
    pub value: f64,
    /// Half-width `X` of the window `[−X, X]` actually integrated.
    pub window: f64,
    /// Bound on the part of the integral outside the window.
    pub tail_estimate: f64,
    pub quadrature_error: f64,
    pub nodes_used: usize,
}

/// A probability density given through its logarithm.
pub trait Density {
    /// `ln f(x)`, `−∞` where `f` vanishes.
    fn ln_density(&self, x: f64) -> f64;

    /// `m_{2k} = ∫ x^{2k} f`, if known.
    fn even_moment(&self, k: usize) -> Option<f64>;

    /// Points in `[lo, hi]` where the integrand is not smooth or has sharp
    /// features.
    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Evaluator of `x ↦ ln h_{t,γ}(x)` for one member of a family.
pub type LnH<'a> = Box<dyn Fn(f64) -> Result<f64> + 'a>;

/// A family `f_{t+iγ} = (γ/π)/h_{t,γ}` sharing one moment sequence.
pub trait PickFamily {
    /// `ln h_{t,γ}`, with any per-member setup done once.
    fn ln_h(&self, p: &PickPoint<f64>) -> Result<LnH<'_>>;

    fn even_moment(&self, k: usize) -> Option<f64>;

    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// Densities below this are treated as zero.
const UNDERFLOW: f64 = 1e-300;
/// Bound on `|f log f|` where `f < UNDERFLOW`.
const UNDERFLOW_CONTRIBUTION: f64 = UNDERFLOW * 691.0;

/// Gauss–Kronrod 7-15 abscissae and weights on `[−1, 1]`.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One integrand sample: the value and `|log f(x)|` for the tail constant.
#[derive(Clone, Copy)]
struct Sample {
    value: f64,
    abs_log: Option<f64>,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Width times the bound on `|f log f|`, if any sample underflowed.
    dropped: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct Integrator<'a> {
    f: &'a dyn Fn(f64) -> Result<Sample>,
    nodes: usize,
    /// Largest `|log f(x)| − |x|` over all samples.
    log_excess: f64,
    underflowed: bool,
}

impl Integrator<'_> {
    fn sample(&mut self, x: f64) -> Result<f64> {
        let s = (self.f)(x)?;
        self.nodes += 1;
        match s.abs_log {
            Some(l) => self.log_excess = self.log_excess.max(l - x.abs()),
            None => self.underflowed = true,
        }
        if !s.value.is_finite() {
            return Err(Error::Quadrature(format!(
                "integrand is {} at x = {x}",
                s.value
            )));
        }
        Ok(s.value)
    }

    fn gk15(&mut self, a: f64, b: f64) -> Result<Panel> {
        self.underflowed = false;
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = self.sample(c)?;
        let mut kron = fc * WGK[7];
        let mut gauss = fc * WG[3];
        let mut abs_k = kron.abs();
        let mut fv = [0.0; 15];
        fv[7] = fc;
        for j in 0..7 {
            let dx = h * XGK[j];
            let f1 = self.sample(c - dx)?;
            let f2 = self.sample(c + dx)?;
            fv[j] = f1;
            fv[14 - j] = f2;
            kron += WGK[j] * (f1 + f2);
            abs_k += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * kron;
        let mut asc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
        }
        let (res_abs, res_asc) = (abs_k * h.abs(), asc * h.abs());
        let mut err = ((kron - gauss) * h).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * res_abs);
        }
        Ok(Panel {
            a,
            b,
            value: kron * h,
            error: err,
            dropped: if self.underflowed {
                (b - a) * UNDERFLOW_CONTRIBUTION
            } else {
                0.0
            },
        })
    }

    /// `∫_a^b` to absolute accuracy `tol`, starting from panels split at
    /// `breaks`. Returns value, error and underflow bound.
    fn integrate(
        &mut self,
        a: f64,
        b: f64,
        breaks: &[f64],
        tol: f64,
        limit: usize,
    ) -> Result<(f64, f64, f64)> {
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut heap = BinaryHeap::new();
        let mut lo = a;
        for hi in cuts.into_iter().chain(std::iter::once(b)) {
            heap.push(self.gk15(lo, hi)?);
            lo = hi;
        }
        loop {
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if error <= tol {
                // sum in positional order so the result does not depend on heap layout
                let mut panels: Vec<&Panel> = heap.iter().collect();
                panels.sort_by(|p, q| p.a.total_cmp(&q.a));
                let dropped = panels.iter().map(|p| p.dropped).sum();
                return Ok((panels.iter().map(|p| p.value).sum(), error, dropped));
            }
            if heap.len() >= limit {
                return Err(Error::Quadrature(format!(
                    "{limit} panels on [{a}, {b}] leave error {error:e} (value {value})"
                )));
            }
            let worst = heap.pop().expect("heap holds at least one panel");
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                return Err(Error::Quadrature(format!(
                    "panel [{}, {}] cannot be bisected further",
                    worst.a, worst.b
                )));
            }
            heap.push(self.gk15(worst.a, mid)?);
            heap.push(self.gk15(mid, worst.b)?);
        }
    }
}

/// An integral with its estimated absolute error.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub error: f64,
    pub nodes_used: usize,
}

/// `∫_a^b f` by adaptive Gauss–Kronrod to absolute accuracy `tol`, with
/// initial panels split at `breaks`.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
    refinement_limit: usize,
) -> Result<QuadratureEstimate> {
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::Input(format!(
            "need a < b and tol > 0, got [{a}, {b}], {tol}"
        )));
    }
    let g = |x: f64| {
        Ok(Sample {
            value: f(x),
            abs_log: Some(0.0),
        })
    };
    let mut it = Integrator {
        f: &g,
        nodes: 0,
        log_excess: f64::NEG_INFINITY,
        underflowed: false,
    };
    let (value, error, _) = it.integrate(a, b, breaks, tol, refinement_limit.max(1))?;
    Ok(QuadratureEstimate {
        value,
        error,
        nodes_used: it.nodes,
    })
}

/// `min_k m_{2k} (L/X^{2k} + 1/X^{2k−1})` over the available moments.
fn tail_bound(moment: &dyn Fn(usize) -> Option<f64>, l: f64, x: f64) -> f64 {
    let mut best = f64::INFINITY;
    for k in 1.. {
        let Some(m) = moment(k).filter(|m| m.is_finite()) else {
            break;
        };
        let p = (2 * k) as f64;
        let ln_bound = m.ln() - p * x.ln() + (l.max(0.0) + x).ln();
        if ln_bound.exp() < best {
            best = ln_bound.exp();
        }
        if ln_bound < -745.0 {
            break;
        }
    }
    best
}

fn windowed(
    f: &dyn Fn(f64) -> Result<Sample>,
    moment: &dyn Fn(usize) -> Option<f64>,
    breaks: &dyn Fn(f64, f64) -> Vec<f64>,
    cfg: &QuadratureConfig,
    fixed_window: Option<f64>,
) -> Result<EntropyResult> {
    cfg.validate()?;
    let mut it = Integrator {
        f,
        nodes: 0,
        log_excess: f64::NEG_INFINITY,
        underflowed: false,
    };
    let mut x = fixed_window.unwrap_or(cfg.initial_window);
    let mut share = cfg.tol / 4.0;
    let (mut value, mut error, mut dropped) =
        it.integrate(-x, x, &breaks(-x, x), share, cfg.refinement_limit)?;
    loop {
        let tail = tail_bound(moment, 2.0 * it.log_excess, x) + dropped;
        if fixed_window.is_some() || tail <= cfg.tol - error {
            return Ok(EntropyResult {
                value,
                window: x,
                tail_estimate: tail,
                quadrature_error: error,
                nodes_used: it.nodes,
            });
        }
        if 2.0 * x > cfg.max_window {
            return Err(Error::WindowExhausted(format!(
                "tail bound {tail:e} at window {x} exceeds tolerance {:e}",
                cfg.tol
            )));
        }
        share /= 2.0;
        let (left, el, dl) = it.integrate(
            -2.0 * x,
            -x,
            &breaks(-2.0 * x, -x),
            share / 2.0,
            cfg.refinement_limit,
        )?;
        let (right, er, dr) = it.integrate(
            x,
            2.0 * x,
            &breaks(x, 2.0 * x),
            share / 2.0,
            cfg.refinement_limit,
        )?;
        value += left + right;
        error += el + er;
        dropped += dl + dr;
        x *= 2.0;
    }
}

fn density_sample<D: Density + ?Sized>(f: &D, x: f64) -> Sample {
    let l = f.ln_density(x);
    if l < UNDERFLOW.ln() {
        return Sample {
            value: 0.0,
            abs_log: None,
        };
    }
    Sample {
        value: -l.exp() * l,
        abs_log: Some(l.abs()),
    }
}

/// `−∫ f log f` with the window enlarged until the tail is below `cfg.tol`.
pub fn entropy_of_density<D: Density + ?Sized>(
    f: &D,
    cfg: &QuadratureConfig,
) -> Result<EntropyResult> {
    windowed(
        &|x| Ok(density_sample(f, x)),
        &|k| f.even_moment(k),
        &|lo, hi| f.breakpoints(lo, hi),
        cfg,
        None,
    )
}

/// `−∫_{−X}^{X} f log f` on a fixed window, with the tail bound that would
/// apply to it.
pub fn entropy_on_window<D: Density + ?Sized>(
    f: &D,
    window: f64,
    cfg: &QuadratureConfig,
) -> Result<EntropyResult> {
    if !(window > 0.0) {
        return Err(Error::Input(format!("window {window} must be positive")));
    }
    windowed(
        &|x| Ok(density_sample(f, x)),
        &|k| f.even_moment(k),
        &|lo, hi| f.breakpoints(lo, hi),
        cfg,
        Some(window),
    )
}

/// `log(π/γ) + (γ/π) ∫ log h / h` for `f_{t+iγ} = (γ/π)/h`.
pub fn entropy_of_family<F: PickFamily + ?Sized>(
    family: &F,
    p: &PickPoint<f64>,
    cfg: &QuadratureConfig,
) -> Result<EntropyResult> {
    let scale = p.gamma / std::f64::consts::PI;
    let ln_scale = scale.ln();
    let ln_h_of = family.ln_h(p)?;
    let sample = |x: f64| -> Result<Sample> {
        let ln_h = ln_h_of(x)?;
        let ln_f = ln_scale - ln_h;
        if ln_f < UNDERFLOW.ln() {
            return Ok(Sample {
                value: 0.0,
                abs_log: None,
            });
        }
        Ok(Sample {
            value: ln_f.exp() * ln_h,
            abs_log: Some(ln_h.abs()),
        })
    };
    let mut r = windowed(
        &sample,
        &|k| family.even_moment(k),
        &|lo, hi| family.breakpoints(lo, hi),
        cfg,
        None,
    )?;
    r.value -= ln_scale;
    Ok(r)
}

/// `H[f_{t+iγ}]` at every point of a path in the upper half-plane.
pub fn continuity_scan<F: PickFamily + ?Sized>(
    points: &[PickPoint<f64>],
    family: &F,
    cfg: &QuadratureConfig,
) -> Result<Vec<EntropyResult>> {
    points
        .iter()
        .map(|p| entropy_of_family(family, p, cfg))
        .collect()
}

/// Comparison of a path sampled at `n` points with the same path sampled at
/// `2n − 1` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityWitness {
    /// Largest `|H_mid − secant| / |H_{j+1} − H_j|` over the interleaved
    /// points.
    pub max_ratio: f64,
    /// Index `j` of the coarse interval where it occurs.
    pub worst_interval: usize,
    pub all_finite: bool,
}

impl ContinuityWitness {
    /// Every interleaved value is within `factor` local secant increments of
    /// the secant, and every value is finite.
    pub fn holds(&self, factor: f64) -> bool {
        self.all_finite && self.max_ratio < factor
    }
}

/// Compares the odd-indexed values of `fine` with the secant through the
/// neighbouring `coarse` values. Requires `fine.len() == 2·coarse.len() − 1`.
pub fn continuity_witness(coarse: &[f64], fine: &[f64]) -> Result<ContinuityWitness> {
    if coarse.is_empty() || fine.len() != 2 * coarse.len() - 1 {
        return Err(Error::Input(format!(
            "{} fine values do not interleave {} coarse values",
            fine.len(),
            coarse.len()
        )));
    }
    let all_finite = coarse.iter().chain(fine).all(|v| v.is_finite());
    let mut max_ratio: f64 = 0.0;
    let mut worst_interval = 0;
    for j in 0..coarse.len().saturating_sub(1) {
        let secant = 0.5 * (coarse[j] + coarse[j + 1]);
        let deviation = (fine[2 * j + 1] - secant).abs();
        let increment = (coarse[j + 1] - coarse[j]).abs();
        let ratio = if deviation == 0.0 {
            0.0
        } else {
            deviation / increment
        };
        if ratio > max_ratio || ratio.is_nan() {
            max_ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            worst_interval = j;
        }
    }
    Ok(ContinuityWitness {
        max_ratio,
        worst_interval,
        all_finite,
    })
}

/// The standard normal density.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardGaussian;

impl Density for StandardGaussian {
    fn ln_density(&self, x: f64) -> f64 {
        -0.5 * x * x - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        Some((1..2 * k).step_by(2).map(|j| j as f64).product())
    }
}

/// The uniform density on `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Density for Uniform {
    fn ln_density(&self, x: f64) -> f64 {
        if x >= self.lo && x <= self.hi {
            -(self.hi - self.lo).ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        let p = 2 * k as i32 + 1;
        Some((self.hi.powi(p) - self.lo.powi(p)) / (p as f64 * (self.hi - self.lo)))
    }

    fn breakpoints(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        vec![self.lo, self.hi]
    }
}

/// `λ f(λ x)`.
#[derive(Debug, Clone)]
pub struct Rescaled<D> {
    pub inner: D,
    pub lambda: f64,
}

impl<D: Density> Density for Rescaled<D> {
    fn ln_density(&self, x: f64) -> f64 {
        self.lambda.ln() + self.inner.ln_density(self.lambda * x)
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        self.inner
            .even_moment(k)
            .map(|m| m / self.lambda.powi(2 * k as i32))
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let l = self.lambda;
        let (a, b) = if l > 0.0 {
            (lo * l, hi * l)
        } else {
            (hi * l, lo * l)
        };
        self.inner
            .breakpoints(a, b)
            .into_iter()
            .map(|x| x / l)
            .collect()
    }
}

/// Even moments of `μ_K` in `f64`, as many as can be certified to `1e-12`.
fn even_moments_of_mu_k(params: &QParams<f64>) -> Vec<f64> {
    let Ok(measure) = ascarlitz::mu_k(params, &1e-15) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for k in 1..=64u32 {
        match ascarlitz::moments_of_discrete(&measure, 2 * k, &1e-12) {
            Ok(m) if m.value.is_finite() => out.push(m.value),
            _ => break,
        }
    }
    out
}

/// Atoms of `μ_K` and `μ_F` inside `[lo, hi]`, where `ν_ρ` peaks, each with
/// a mesh graded geometrically towards it.
///
/// The peaks can be far narrower than the gap between atoms; without the
/// grading a Gauss–Kronrod panel may step over one and underestimate its
/// own error.
pub fn ascarlitz_breakpoints(params: &QParams<f64>, lo: f64, hi: f64) -> Vec<f64> {
    let (q, a) = (*params.q(), *params.a());
    let mut out = Vec::new();
    for base in [1.0, a] {
        let mut y = base;
        while y * (1.0 + (1.0 - q) / 2.0) - 1.0 < hi {
            let gap = y * (1.0 - q);
            let mut offset = gap / 2.0;
            let mut pts = vec![y - 1.0];
            for _ in 0..GRADING_LEVELS {
                pts.push(y - 1.0 - offset);
                pts.push(y - 1.0 + offset);
                offset /= 4.0;
            }
            out.extend(pts.into_iter().filter(|x| *x >= lo && *x <= hi));
            y /= q;
        }
    }
    // left of the support of μ_K and μ_F the density decays without peaks
    let mut d = 0.125;
    while -1.0 - d >= lo {
        out.push(-1.0 - d);
        d *= 2.0;
    }
    if (lo..=hi).contains(&-1.0) {
        out.push(-1.0);
    }
    out
}

/// Refinement levels towards each atom, down to `4^{−16}` of the gap.
const GRADING_LEVELS: usize = 16;

/// `ν_ρ` as a [`Density`], with the moments of `μ_K`.
#[derive(Debug, Clone)]
pub struct NuEntropyDensity {
    nu: NuDensity<f64>,
    moments: Vec<f64>,
}

impl NuEntropyDensity {
    pub fn new(params: QParams<f64>, rho: f64) -> Result<Self> {
        let moments = even_moments_of_mu_k(&params);
        let nu = NuDensity::new(params, rho, 1e-15)?;
        Ok(NuEntropyDensity { nu, moments })
    }

    pub fn nu(&self) -> &NuDensity<f64> {
        &self.nu
    }
}

impl Density for NuEntropyDensity {
    fn ln_density(&self, x: f64) -> f64 {
        self.nu.ln_density(&x).unwrap_or(f64::NAN)
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        self.moments.get(k.checked_sub(1)?).copied()
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        ascarlitz_breakpoints(self.nu.params(), lo, hi)
    }
}

/// The closed-form family `f_{t+iγ(t)} = ν_{ρ(t)}` on the half-circle over
/// `[α, 0]`.
#[derive(Debug, Clone)]
pub struct NuFamily {
    params: QParams<f64>,
    moments: Vec<f64>,
}

impl NuFamily {
    pub fn new(params: QParams<f64>) -> Result<Self> {
        ascarlitz::rho_scale(&params, &1e-15)?;
        let moments = even_moments_of_mu_k(&params);
        Ok(NuFamily { params, moments })
    }

    /// The point `t + iγ(t)` of the half-circle.
    pub fn pick_point(&self, t: f64) -> Result<PickPoint<f64>> {
        let hc = ascarlitz::halfcircle_point(&self.params, &t, &1e-15)?;
        PickPoint::new(hc.t, hc.gamma)
    }

    /// The point of the half-circle whose density is `ν_ρ`.
    pub fn pick_point_for_rho(&self, rho: f64) -> Result<PickPoint<f64>> {
        let hc = ascarlitz::halfcircle_from_rho(&self.params, &rho, &1e-15)?;
        PickPoint::new(hc.t, hc.gamma)
    }

    fn density_at(&self, p: &PickPoint<f64>) -> Result<NuDensity<f64>> {
        let hc = ascarlitz::halfcircle_point(&self.params, &p.t, &1e-15)?;
        if (hc.gamma - p.gamma).abs() > 1e-9 * hc.gamma.max(1.0) {
            return Err(Error::Domain(format!(
                "({}, {}) is not on the half-circle (γ(t) = {})",
                p.t, p.gamma, hc.gamma
            )));
        }
        NuDensity::new(self.params.clone(), hc.rho, 1e-15)
    }
}

impl PickFamily for NuFamily {
    fn ln_h(&self, p: &PickPoint<f64>) -> Result<LnH<'_>> {
        // f = (γ/π)/h = ν_ρ
        let nu = self.density_at(p)?;
        let ln_scale = (p.gamma / std::f64::consts::PI).ln();
        Ok(Box::new(move |x| Ok(ln_scale - nu.ln_density(&x)?)))
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        self.moments.get(k.checked_sub(1)?).copied()
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        ascarlitz_breakpoints(&self.params, lo, hi)
    }
}

/// The family `(γ/π)/h` built from a truncated quadruple, evaluated at the
/// quadruple's precision and reduced to `f64`.
#[derive(Debug, Clone)]
pub struct QuadrupleFamily<T> {
    quad: NevanlinnaQuadruple<T>,
    even_moments: Vec<f64>,
}

impl<T: Real> QuadrupleFamily<T> {
    /// `moments` are `m_0, m_1, …` of the underlying problem.
    pub fn new(quad: NevanlinnaQuadruple<T>, moments: &[T]) -> Self {
        let even_moments = moments
            .iter()
            .skip(2)
            .step_by(2)
            .map(|m| m.as_f64())
            .collect();
        QuadrupleFamily { quad, even_moments }
    }

    pub fn quadruple(&self) -> &NevanlinnaQuadruple<T> {
        &self.quad
    }
}

impl<T: Real> PickFamily for QuadrupleFamily<T> {
    fn ln_h(&self, p: &PickPoint<f64>) -> Result<LnH<'_>> {
        let like = &self.quad.pk0()[0];
        let pp = PickPoint::new(like.lift(p.t), like.lift(p.gamma))?;
        Ok(Box::new(move |x| {
            let h = self.quad.h(&pp, &like.lift(x));
            if !(h > T::zero()) {
                return Err(Error::Domain(format!("h({x}) = {h} is not positive")));
            }
            Ok(h.ln().as_f64())
        }))
    }

    fn even_moment(&self, k: usize) -> Option<f64> {
        self.even_moments.get(k.checked_sub(1)?).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nu(rho: f64) -> NuEntropyDensity {
        NuEntropyDensity::new(QParams::new(0.6, 1.2).unwrap(), rho).unwrap()
    }

    #[test]
    fn gaussian_entropy() {
        let cfg = QuadratureConfig::with_tol(1e-12);
        let r = entropy_of_density(&StandardGaussian, &cfg).unwrap();
        let want = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
        assert!((r.value - want).abs() < 1e-10, "{} vs {want}", r.value);
        assert!(r.tail_estimate <= cfg.tol);
    }

    #[test]
    fn uniform_entropy() {
        let cfg = QuadratureConfig::with_tol(1e-12);
        let r = entropy_of_density(&Uniform { lo: 0.0, hi: 1.0 }, &cfg).unwrap();
        assert!(r.value.abs() < 1e-10);
        let r = entropy_of_density(&Uniform { lo: -1.0, hi: 3.0 }, &cfg).unwrap();
        assert!((r.value - 4f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn gaussian_scale_law() {
        let cfg = QuadratureConfig::with_tol(1e-12);
        let f = Rescaled {
            inner: StandardGaussian,
            lambda: 3.0,
        };
        let base = entropy_of_density(&StandardGaussian, &cfg).unwrap().value;
        let scaled = entropy_of_density(&f, &cfg).unwrap().value;
        assert!((scaled - (base - 3f64.ln())).abs() < 1e-10);
    }

    #[test]
    fn nu_one_matches_table() {
        let r = entropy_of_density(&nu(1.0), &QuadratureConfig::default()).unwrap();
        assert!((r.value - 1.0617).abs() < 2e-4, "{}", r.value);
    }

    #[test]
    fn routes_agree() {
        let cfg = QuadratureConfig::default();
        let family = NuFamily::new(QParams::new(0.6, 1.2).unwrap()).unwrap();
        for rho in [0.2, 2.0] {
            let p = family.pick_point_for_rho(rho).unwrap();
            let a = entropy_of_family(&family, &p, &cfg).unwrap().value;
            let b = entropy_of_density(&nu(rho), &cfg).unwrap().value;
            assert!((a - b).abs() <= 2.0 * cfg.tol, "rho = {rho}: {a} vs {b}");
        }
    }

    #[test]
    fn window_monotonicity() {
        let cfg = QuadratureConfig::with_tol(1e-8);
        let f = nu(1.0);
        let mut prev = entropy_on_window(&f, 8.0, &cfg).unwrap();
        for x in [16.0, 32.0, 64.0] {
            let next = entropy_on_window(&f, x, &cfg).unwrap();
            let slack = prev.tail_estimate + prev.quadrature_error + next.quadrature_error;
            assert!((next.value - prev.value).abs() <= slack, "window {x}");
            prev = next;
        }
    }

    #[test]
    fn window_exhaustion_is_reported() {
        let cfg = QuadratureConfig {
            tol: 1e-6,
            initial_window: 1.0,
            max_window: 1.5,
            refinement_limit: 1000,
        };
        assert!(matches!(
            entropy_of_density(&StandardGaussian, &cfg),
            Err(Error::WindowExhausted(_))
        ));
    }

    #[test]
    fn config_validation() {
        let cfg = QuadratureConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            entropy_of_density(&StandardGaussian, &cfg),
            Err(Error::Input(_))
        ));
        let cfg = QuadratureConfig {
            initial_window: 1e6,
            ..Default::default()
        };
        assert!(matches!(
            entropy_of_density(&StandardGaussian, &cfg),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn off_circle_points_are_rejected() {
        let family = NuFamily::new(QParams::new(0.6, 1.2).unwrap()).unwrap();
        let p = PickPoint::new(-0.2, 5.0).unwrap();
        assert!(matches!(family.ln_h(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn witness_on_smooth_and_broken_paths() {
        let coarse: Vec<f64> = (0..5).map(|i| (i as f64 * 0.25).sin()).collect();
        let fine: Vec<f64> = (0..9).map(|i| (i as f64 * 0.125).sin()).collect();
        assert!(continuity_witness(&coarse, &fine).unwrap().holds(4.0));

        let mut broken = fine.clone();
        broken[3] += 10.0;
        let w = continuity_witness(&coarse, &broken).unwrap();
        assert!(!w.holds(4.0));
        assert_eq!(w.worst_interval, 1);

        assert!(continuity_witness(&[1.0], &[1.0]).unwrap().holds(4.0));
        assert!(continuity_witness(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn plain_quadrature() {
        let r = integrate(&|x| x.sin(), 0.0, std::f64::consts::PI, &[], 1e-13, 100).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(&|x| x.abs(), -1.0, 2.0, &[0.0], 1e-13, 100).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
        assert!(integrate(&|x| x, 1.0, 0.0, &[], 1e-6, 10).is_err());
    }
}
