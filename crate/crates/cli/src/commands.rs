use std::fmt::Write as _;
use std::path::Path;

use mpe_core::ascarlitz::{self, NuDensity, QParams};
use mpe_core::entropy::{entropy_of_family, NuFamily, QuadratureConfig, QuadrupleFamily};
use mpe_core::hamburger::{build_quadruple, recurrence_from_moments, MomentSequence, PickPoint};
use mpe_core::{Mp, Real};

use crate::report::{emit, num, Row, RunReport};
use crate::{Failure, Format, Problem};

/// Published entropies of `ν_ρ` for `q = 0.6, a = 1.2`, truncated to four
/// decimals.
const REFERENCE: [(f64, f64); 7] = [
    (0.01, -2.1184),
    (0.2, 0.5216),
    (0.5, 0.9714),
    (1.0, 1.0617),
    (2.0, 0.9100),
    (5.0, 0.4000),
    (10.0, -0.1393),
];
const REFERENCE_TOL: f64 = 2e-4;

pub fn reference_entropy(problem: Problem, rho: f64) -> Option<f64> {
    if problem.q != 0.6 || problem.a != 1.2 {
        return None;
    }
    REFERENCE.iter().find(|(r, _)| *r == rho).map(|&(_, h)| h)
}

pub fn emit_report(report: &RunReport, format: Format, out: Option<&Path>) -> Result<(), Failure> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => {
            let mut s = String::from("label,value,tolerance,residual,pass\n");
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.label.replace(',', ";"),
                    num(r.value),
                    num(r.tolerance),
                    num(r.residual),
                    r.pass
                );
            }
            s
        }
    };
    emit(out, &text)?;
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::input(format!("tolerance {tol} must be positive")))
    }
}

pub fn table(
    problem: Problem,
    rhos: &[f64],
    tol: f64,
    format: Format,
    out: Option<&Path>,
) -> Result<RunReport, Failure> {
    check_tol(tol)?;
    if rhos.is_empty() || rhos.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Failure::input("rho list must be nonempty and positive"));
    }
    let family = NuFamily::new(QParams::new(problem.q, problem.a)?)?;
    let cfg = QuadratureConfig::with_tol(tol);

    let mut report = RunReport::new("table");
    report.param("q", problem.q);
    report.param("a", problem.a);
    report.param("tol", tol);
    report.param("rho", rhos.to_vec());
    let mut csv = String::from("rho,H,tail_estimate,quadrature_error\n");
    for &rho in rhos {
        let p = family.pick_point_for_rho(rho)?;
        let r = entropy_of_family(&family, &p, &cfg)?;
        let label = format!("H(rho={rho})");
        let row = match reference_entropy(problem, rho) {
            Some(h) => Row::check(label, r.value, (r.value - h).abs(), REFERENCE_TOL),
            None => Row::check(label, r.value, r.tail_estimate + r.quadrature_error, tol),
        };
        report.push(row);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            num(rho),
            num(r.value),
            num(r.tail_estimate),
            num(r.quadrature_error)
        );
    }
    match format {
        Format::Csv => emit(out, &csv)?,
        _ => emit_report(&report, format, out)?,
    }
    Ok(report)
}

pub fn density(
    problem: Problem,
    rho: f64,
    xmin: f64,
    xmax: f64,
    points: usize,
    out: Option<&Path>,
    plot_script: Option<&Path>,
) -> Result<(), Failure> {
    if !(xmin < xmax) || !xmin.is_finite() || !xmax.is_finite() {
        return Err(Failure::input(format!(
            "need xmin < xmax, got {xmin}, {xmax}"
        )));
    }
    if points < 2 {
        return Err(Failure::input("need at least two points"));
    }
    if plot_script.is_some() && out.is_none() {
        return Err(Failure::input(
            "--plot-script needs --out for the data file",
        ));
    }
    let nu = NuDensity::new(QParams::new(problem.q, problem.a)?, rho, 1e-15)?;
    let mut csv = String::from("x,nu\n");
    for i in 0..points {
        let x = if i + 1 == points {
            xmax
        } else {
            xmin + (xmax - xmin) * i as f64 / (points - 1) as f64
        };
        let _ = writeln!(csv, "{},{}", num(x), num(nu.density(&x)?));
    }
    emit(out, &csv)?;
    if let (Some(script), Some(data)) = (plot_script, out) {
        let text = format!(
            "set datafile separator ','\n\
             set key autotitle columnhead\n\
             set xlabel 'x'\n\
             set ylabel 'density'\n\
             set title 'nu_rho, q = {}, a = {}, rho = {}'\n\
             plot '{}' using 1:2 with lines\n",
            problem.q,
            problem.a,
            rho,
            data.display()
        );
        std::fs::write(script, text)?;
    }
    Ok(())
}

/// Decimal strings, one per line, parsed at `bits` without an intermediate
/// `f64`.
pub fn parse_moments(text: &str, bits: usize) -> Result<Vec<Mp>, Failure> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let s = line.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        let v = Mp::parse(s, bits).ok_or_else(|| {
            Failure::input(format!("line {}: cannot parse {s:?} as a number", i + 1))
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Failure::input("moments file holds no values"));
    }
    Ok(out)
}

pub struct GeneralOptions {
    pub t: f64,
    pub gamma: f64,
    pub n: usize,
    pub precision: usize,
    pub tol: f64,
    pub entropy: bool,
}

pub fn general(
    path: &Path,
    opts: &GeneralOptions,
    xs: &[f64],
    format: Format,
    out: Option<&Path>,
) -> Result<RunReport, Failure> {
    check_tol(opts.tol)?;
    if !(opts.gamma > 0.0) {
        return Err(Failure::input(format!(
            "gamma = {} must be positive",
            opts.gamma
        )));
    }
    if opts.precision < 64 {
        return Err(Failure::input("precision must be at least 64 bits"));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let moments = MomentSequence::new(parse_moments(&text, opts.precision)?)?;
    let recurrence = recurrence_from_moments(&moments, opts.n)?;
    let quad = build_quadruple(&recurrence, opts.n)?;

    let lift = |v: f64| Mp::with_precision(v, opts.precision);
    let pick = PickPoint::new(lift(opts.t), lift(opts.gamma))?;
    let tail = quad.tail_indicator().as_f64();

    let mut report = RunReport::new("general");
    report.param("moments", path.display().to_string());
    report.param("t", opts.t);
    report.param("gamma", opts.gamma);
    report.param("n", opts.n);
    report.param("precision", opts.precision);
    report.param("tol", opts.tol);
    report.note(format!(
        "{} moments read; series tail indicator {tail:.3e}",
        moments.len()
    ));

    let lower: Vec<_> = (1..=2)
        .filter(|k| opts.n > *k)
        .map(|k| build_quadruple(&recurrence, opts.n - k))
        .collect::<Result<_, _>>()?;
    let mut csv = String::from("x,f\n");
    for &x in xs {
        let x_mp = lift(x);
        let f = quad.density_f(&pick, &x_mp).as_f64();
        let prev: Vec<f64> = lower
            .iter()
            .map(|q| q.density_f(&pick, &x_mp).as_f64())
            .collect();
        report.push(Row::check(
            format!("f(x={x})"),
            f,
            truncation_estimate(f, &prev),
            opts.tol,
        ));
        let _ = writeln!(csv, "{},{}", num(x), num(f));
    }
    if opts.entropy {
        let family = QuadrupleFamily::new(quad, moments.values());
        let p = PickPoint::new(opts.t, opts.gamma)?;
        let r = entropy_of_family(&family, &p, &QuadratureConfig::with_tol(opts.tol))?;
        report.push(Row::check(
            "H",
            r.value,
            r.tail_estimate + r.quadrature_error,
            opts.tol,
        ));
    }
    match format {
        Format::Csv => emit(out, &csv)?,
        _ => emit_report(&report, format, out)?,
    }
    Ok(report)
}

/// Relative truncation error of `f_N` from `f_{N−1}, f_{N−2}`: the last
/// increment summed as a geometric series with the observed ratio.
fn truncation_estimate(f: f64, prev: &[f64]) -> f64 {
    let [f1, f2] = prev else {
        return f64::INFINITY;
    };
    let d1 = (f - f1).abs();
    let d2 = (f1 - f2).abs();
    if d1 == 0.0 {
        return 0.0;
    }
    let r = d1 / d2;
    if r >= 1.0 {
        return f64::INFINITY;
    }
    d1 / (1.0 - r) / f.abs()
}

pub fn moments(
    problem: Problem,
    count: usize,
    precision: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if count == 0 || precision < 64 {
        return Err(Failure::input("need count ≥ 1 and precision ≥ 64 bits"));
    }
    let lift = |v: f64| Mp::with_precision(v, precision);
    let params = QParams::new(lift(problem.q), lift(problem.a))?;
    let tol = lift(2f64.powi(-(precision as i32) + 32));
    let values = ascarlitz::moment_sequence(&params, count, &tol)?;
    let digits = (precision as f64 * std::f64::consts::LOG10_2).floor() as usize;
    let mut text = format!(
        "# moments m_0..m_{} of mu_K, q = {}, a = {}, {precision} bits\n",
        count - 1,
        problem.q,
        problem.a
    );
    for v in &values {
        let _ = writeln!(text, "{v:.digits$}");
    }
    emit(out, &text)?;
    Ok(())
}
