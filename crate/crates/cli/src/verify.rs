use mpe_core::ascarlitz::{self, NuDensity, QParams};
use mpe_core::entropy::{
    ascarlitz_breakpoints, entropy_of_density, entropy_of_family, integrate, NuEntropyDensity,
    NuFamily, QuadratureConfig, StandardGaussian,
};
use mpe_core::hamburger::{
    build_quadruple, recurrence_from_moments, JacobiRecurrence, MomentSequence, PickPoint,
};
use mpe_core::qseries::{qpoch_infinite, qpoch_split_identity_check};
use mpe_core::{Error, Mp, Real};

use crate::commands::reference_entropy;
use crate::report::{Row, RunReport};
use crate::{Failure, Problem, Suite};

/// Tolerance for identities that hold to working precision.
const IDENTITY_TOL: f64 = 1e-8;

struct Context {
    problem: Problem,
    tol: f64,
    bits: usize,
    n: usize,
}

impl Context {
    fn mp(&self, v: f64) -> Mp {
        Mp::with_precision(v, self.bits)
    }

    fn params(&self) -> Result<QParams<f64>, Failure> {
        Ok(QParams::new(self.problem.q, self.problem.a)?)
    }

    fn params_mp(&self) -> Result<QParams<Mp>, Failure> {
        Ok(QParams::new(
            self.mp(self.problem.q),
            self.mp(self.problem.a),
        )?)
    }
}

pub fn run(
    problem: Problem,
    suite: Suite,
    tol: f64,
    precision: usize,
    n: usize,
) -> Result<RunReport, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::input(format!("tolerance {tol} must be positive")));
    }
    if precision < 64 || n == 0 {
        return Err(Failure::input("need precision ≥ 64 bits and order ≥ 1"));
    }
    let ctx = Context {
        problem,
        tol,
        bits: precision,
        n,
    };
    ctx.params()?;

    let mut report = RunReport::new("verify");
    report.param("q", problem.q);
    report.param("a", problem.a);
    report.param("suite", format!("{suite:?}").to_lowercase());
    report.param("tol", tol);
    report.param("precision", precision);
    report.param("n", n);
    type SuiteFn = fn(&Context, &mut RunReport) -> Result<(), Failure>;
    let suites: [(Suite, &str, SuiteFn); 4] = [
        (Suite::Qseries, "qseries", qseries),
        (Suite::Measures, "measures", measures),
        (Suite::Pipeline, "pipeline", pipeline),
        (Suite::Entropy, "entropy", entropy),
    ];
    for (s, name, f) in suites {
        if suite == Suite::All || suite == s {
            if let Err(e) = f(&ctx, &mut report) {
                report.error(e.code, format!("{name}: {}", e.message));
            }
        }
    }
    Ok(report)
}

/// Euler's pentagonal series `∑ (−1)^k q^{k(3k−1)/2}` over all integers `k`.
fn pentagonal(q: f64) -> f64 {
    let mut sum = 1.0;
    for k in 1..200i32 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        let term = q.powi(e1) + q.powi(e2);
        sum += sign * term;
        if term < 1e-300 {
            break;
        }
    }
    sum
}

fn qseries(ctx: &Context, report: &mut RunReport) -> Result<(), Failure> {
    let q = ctx.problem.q;
    let euler = qpoch_infinite(&q, &q, &1e-14)?;
    let oracle = pentagonal(q);
    report.push(Row::check(
        "qseries: (q;q)_inf vs pentagonal series",
        euler.value,
        ((euler.value - oracle) / oracle).abs(),
        IDENTITY_TOL,
    ));
    let tol = ctx.mp(2f64.powi(-(ctx.bits as i32) + 32));
    let qm = ctx.mp(q);
    let mut worst: f64 = 0.0;
    for z in [-3.0, -0.5, 0.3, 0.9, 2.5] {
        for n in [1, 5, 20] {
            let r = qpoch_split_identity_check(&ctx.mp(z), &qm, n, &tol)?;
            worst = worst.max(r.as_f64());
        }
    }
    report.push(Row::check(
        "qseries: split identity, max residual",
        worst,
        worst,
        IDENTITY_TOL,
    ));
    Ok(())
}

fn measures(ctx: &Context, report: &mut RunReport) -> Result<(), Failure> {
    let p = ctx.params_mp()?;
    let pf = ctx.params()?;
    let tol = ctx.mp(1e-40);
    let mu_k = ascarlitz::mu_k(&p, &tol)?;
    let mu_f = ascarlitz::mu_f(&p, &tol)?;
    for (name, m) in [("mu_K", &mu_k), ("mu_F", &mu_f)] {
        let mass = m.total_mass().as_f64();
        report.push(Row::check(
            format!("measures: mass of {name}"),
            mass,
            (mass - 1.0).abs(),
            IDENTITY_TOL,
        ));
    }

    let window = 4096.0;
    let breaks = ascarlitz_breakpoints(&pf, -window, window);
    let nus: Vec<NuDensity<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&rho| NuDensity::new(pf.clone(), rho, 1e-15))
        .collect::<Result<_, Error>>()?;
    let mut worst_f: f64 = 0.0;
    let mut worst_nu: f64 = 0.0;
    for k in 0..=10u32 {
        let mk = ascarlitz::moments_of_discrete(&mu_k, k, &ctx.mp(1e-30))?.value;
        let mf = ascarlitz::moments_of_discrete(&mu_f, k, &ctx.mp(1e-30))?.value;
        worst_f = worst_f.max(((mf - &mk) / &mk).as_f64().abs());
        let mk = mk.as_f64();
        for nu in &nus {
            let integrand = |x: f64| x.powi(k as i32) * nu.density(&x).unwrap_or(f64::NAN);
            let m = integrate(
                &integrand,
                -window,
                window,
                &breaks,
                1e-12 * mk.abs(),
                50_000,
            )?;
            worst_nu = worst_nu.max(((m.value - mk) / mk).abs());
        }
    }
    report.push(Row::check(
        "measures: moments k <= 10, mu_F vs mu_K",
        worst_f,
        worst_f,
        IDENTITY_TOL,
    ));
    report.push(Row::check(
        "measures: moments k <= 10, nu_rho vs mu_K (rho = 0.5, 1, 2)",
        worst_nu,
        worst_nu,
        IDENTITY_TOL,
    ));

    let lb = ascarlitz::lower_bound_lb(&pf, &1e-15)?;
    let mut min_phi = f64::INFINITY;
    for y in ascarlitz::boundedness_grid(&pf, 40, 50) {
        min_phi = min_phi.min(ascarlitz::phi(&pf, &y, &1e-15)?);
    }
    // passes when min φ ≥ LB
    report.push(Row::check(
        "measures: min phi on grid vs LB",
        min_phi,
        lb - min_phi,
        0.0,
    ));

    let alpha = ascarlitz::alpha(&p, &tol)?;
    let mut worst_hc: f64 = 0.0;
    for frac in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let t = alpha.clone() * &ctx.mp(frac);
        let fwd = ascarlitz::halfcircle_point(&p, &t, &tol)?;
        let back = ascarlitz::halfcircle_from_rho(&p, &fwd.rho, &tol)?;
        let dt = ((back.t - &t) / &t).as_f64().abs();
        let dg = ((back.gamma - &fwd.gamma) / &fwd.gamma).as_f64().abs();
        worst_hc = worst_hc.max(dt).max(dg);
    }
    report.push(Row::check(
        "measures: half-circle t -> rho -> t",
        worst_hc,
        worst_hc,
        IDENTITY_TOL,
    ));
    Ok(())
}

/// Jacobi coefficients of `μ_K`: `a_k = (1 + a) q^{−k} − 1`,
/// `b_k² = a q^{1−2k} (1 − q^k)`.
fn closed_form(p: &QParams<Mp>, n: usize) -> Result<JacobiRecurrence<Mp>, Failure> {
    let (q, a) = (p.q(), p.a());
    let one = q.lift(1.0);
    let diag = (0..n)
        .map(|k| (one.clone() + a) / &q.powi(k as i64) - &one)
        .collect();
    let offdiag = (1..=n as i64)
        .map(|k| (a.clone() * &q.powi(1 - 2 * k) * &(one.clone() - &q.powi(k))).sqrt())
        .collect();
    Ok(JacobiRecurrence::from_coefficients(diag, offdiag)?)
}

fn pipeline(ctx: &Context, report: &mut RunReport) -> Result<(), Failure> {
    let p = ctx.params_mp()?;
    let n = ctx.n;
    let tol = ctx.mp(2f64.powi(-(ctx.bits as i32) + 24));
    let moments = MomentSequence::new(ascarlitz::moment_sequence(&p, 2 * n + 1, &tol)?)?;
    let r = recurrence_from_moments(&moments, n)?;
    let diff = r.max_relative_difference(&closed_form(&p, n)?).as_f64();
    report.push(Row::check(
        format!("pipeline: recurrence vs closed form, N = {n}"),
        diff,
        diff,
        IDENTITY_TOL,
    ));

    let quad = build_quadruple(&r, n)?;
    for x in [-0.5, 0.0, 1.0, 3.0] {
        let res = quad.det_residual(&ctx.mp(x)).as_f64();
        report.push(Row::check(
            format!("pipeline: |AD - BC - 1| at x = {x}, N = {n}"),
            res,
            res,
            IDENTITY_TOL,
        ));
    }

    let alpha = ascarlitz::alpha(&p, &ctx.mp(1e-60))?;
    let hc = ascarlitz::halfcircle_point(&p, &(alpha * &ctx.mp(0.5)), &ctx.mp(1e-60))?;
    let pick = PickPoint::new(hc.t.clone(), hc.gamma.clone())?;
    let nu = NuDensity::new(p.clone(), hc.rho.clone(), ctx.mp(1e-60))?;
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let x = ctx.mp(-1.0 + 7.0 * i as f64 / 49.0);
        let g = nu.density(&x)?;
        worst = worst.max(((quad.density_f(&pick, &x) - &g) / &g).as_f64().abs());
    }
    report.note(format!(
        "pipeline: f at t = alpha/2 vs nu_rho on [-1, 6], N = {n}: max relative difference {worst:.3e}"
    ));

    let mut gauss = vec![ctx.mp(1.0)];
    for k in 1..=2 * n {
        let v = if k % 2 == 1 {
            ctx.mp(0.0)
        } else {
            gauss[k - 2].clone() * &ctx.mp((k - 1) as f64)
        };
        gauss.push(v);
    }
    let gr = recurrence_from_moments(&MomentSequence::new(gauss)?, n)?;
    let detected = matches!(build_quadruple(&gr, n), Err(Error::DivergenceSuspected(_)));
    let flag = if detected { 0.0 } else { 1.0 };
    report.push(Row::check(
        "pipeline: Gaussian moments flagged as divergent",
        flag,
        flag,
        0.0,
    ));
    Ok(())
}

fn entropy(ctx: &Context, report: &mut RunReport) -> Result<(), Failure> {
    let cfg = QuadratureConfig::with_tol(ctx.tol);
    let pf = ctx.params()?;
    let family = NuFamily::new(pf.clone())?;
    let rhos = [0.01, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
    for rho in rhos {
        let r = entropy_of_family(&family, &family.pick_point_for_rho(rho)?, &cfg)?;
        let row = match reference_entropy(ctx.problem, rho) {
            Some(h) => Row::check(
                format!("entropy: H(rho={rho}) vs table"),
                r.value,
                (r.value - h).abs(),
                2e-4,
            ),
            None => Row::check(
                format!("entropy: H(rho={rho}) error budget"),
                r.value,
                r.tail_estimate + r.quadrature_error,
                ctx.tol,
            ),
        };
        report.push(row);
    }

    let gauss = entropy_of_density(&StandardGaussian, &QuadratureConfig::with_tol(1e-12))?;
    let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    report.push(Row::check(
        "entropy: standard Gaussian",
        gauss.value,
        (gauss.value - exact).abs(),
        1e-10,
    ));

    let by_density = entropy_of_density(&NuEntropyDensity::new(pf, 1.0)?, &cfg)?;
    let by_family = entropy_of_family(&family, &family.pick_point_for_rho(1.0)?, &cfg)?;
    let budget = by_density.tail_estimate
        + by_density.quadrature_error
        + by_family.tail_estimate
        + by_family.quadrature_error;
    report.push(Row::check(
        "entropy: nu_1 by density vs by Pick point",
        by_family.value,
        (by_density.value - by_family.value).abs(),
        budget.max(ctx.tol),
    ));
    Ok(())
}
