//! Structured verification suites over the math modules: Picard-Fuchs
//! residuals, monodromy identities, Wronskian shape, and the h = 0
//! asymptotics.  Each suite returns named checks with residuals and
//! tolerances so the CLI can print a table and tests can assert the verdicts.

use crate::error::Result;
use crate::level_curve::{
    integrate_cycle, integrate_cycle_derivative, Cycle, CycleSpec, Exponent, Side,
};
use crate::monodromy::{boundary_value, verify_cycle_relations, wronskian, Pairing};
use crate::picard_fuchs::{
    fit_asymptotic_constants, fit_i4prime_h2_coefficient, i4prime, pf_apply, Evaluator,
    PeriodVector,
};
use crate::series::LocalSeries;
use num_complex::Complex64;

/// One named check: `residual` measured against `tolerance`.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual.is_finite() && self.residual < self.tolerance
    }
}

/// A verification suite outcome.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    /// Free-form measured quantities worth recording (name, value).
    pub measured: Vec<(String, f64)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    fn push(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check { name: name.into(), residual, tolerance });
    }
}

const PF_GRID: [f64; 7] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];

/// Residuals of the four first-section relations on the real energy grid,
/// with the quadrature/finite-difference route held to `tol_quad` and the
/// continuation route to `tol_ode`.
pub fn verify_pf(ev: &Evaluator, tol_quad: f64, tol_ode: f64) -> Result<Report> {
    let mut report = Report::default();
    let rt = ev.quad_rtol;
    let spec = CycleSpec::new(Cycle::Gamma, Side::NotOnCut);
    for &h in &PF_GRID {
        // quadrature values and derivatives
        let v = |i| integrate_cycle(spec, i, h, rt).map(|z| z.re);
        let d = |i| integrate_cycle_derivative(spec, i, h, rt).map(|z| z.re);
        let (i0, i2, i4) = (v(Exponent::X0)?, v(Exponent::X2)?, v(Exponent::X4)?);
        let (d0, d2, d4) = (d(Exponent::X0)?, d(Exponent::X2)?, d(Exponent::X4)?);
        let _ = i4;
        // second derivative of I0 by central difference of the derivative
        // integral (step h * 5e-6 balances truncation vs quadrature noise)
        let s = 5e-6 * h;
        let d0p = integrate_cycle_derivative(spec, Exponent::X0, h + s, rt)?.re;
        let d0m = integrate_cycle_derivative(spec, Exponent::X0, h - s, rt)?.re;
        let i0pp = (d0p - d0m) / (2.0 * s);

        let r1 = (i0 - (4.0 / 3.0 * h * d0 + d2 / 3.0)).abs() / i0.abs();
        let r2 = (i2 - (4.0 / 15.0 * h * d0 + (0.8 * h + 4.0 / 15.0) * d2)).abs() / i2.abs();
        let r3 = ((4.0 * h + 1.0) * d4 - (4.0 * h * i0 + 5.0 * i2)).abs()
            / ((4.0 * h + 1.0) * d4).abs();
        let r4 = (4.0 * h * (4.0 * h + 1.0) * i0pp + 3.0 * i0).abs() / (3.0 * i0).abs();
        report.push(format!("quad h={h}: I0 = 4/3 h I0' + 1/3 I2'"), r1, tol_quad);
        report.push(format!("quad h={h}: I2 = 4/15 h I0' + (4/5 h + 4/15) I2'"), r2, tol_quad);
        report.push(format!("quad h={h}: (4h+1) I4' = 4h I0 + 5 I2"), r3, tol_quad);
        report.push(format!("quad h={h}: 4h(4h+1) I0'' = -3 I0"), r4, tol_quad);

        // continuation route: values from the ODE service, derivatives from
        // the system matrix, I4' from the algebraic relation
        let hv = Complex64::new(h, 0.0);
        let pv = ev.periods(hv)?;
        let (c0, c2) = (pv.i0.re, pv.i2.re);
        let (ad0, ad2) = pf_apply(hv, pv.i0, pv.i2)?;
        let ai4 = i4prime(&pv)?;
        let r1 = (c0 - (4.0 / 3.0 * h * ad0.re + ad2.re / 3.0)).abs() / c0.abs();
        let r2 = (c2 - (4.0 / 15.0 * h * ad0.re + (0.8 * h + 4.0 / 15.0) * ad2.re)).abs() / c2.abs();
        let r3 = ((4.0 * h + 1.0) * ai4.re - (4.0 * h * c0 + 5.0 * c2)).abs()
            / ((4.0 * h + 1.0) * ai4.re).abs();
        // I0'' from differentiating the system
        let dd = 4.0 * h * (4.0 * h + 1.0);
        let dp = 32.0 * h + 4.0;
        let a = (12.0 * h + 4.0) / dd;
        let b = -5.0 / dd;
        let ap = (12.0 * dd - (12.0 * h + 4.0) * dp) / (dd * dd);
        let bp = 5.0 * dp / (dd * dd);
        let i0pp_ode = ap * c0 + bp * c2 + a * ad0.re + b * ad2.re;
        let r4 = (dd * i0pp_ode + 3.0 * c0).abs() / (3.0 * c0).abs();
        report.push(format!("ode h={h}: I0 = 4/3 h I0' + 1/3 I2'"), r1, tol_ode);
        report.push(format!("ode h={h}: I2 = 4/15 h I0' + (4/5 h + 4/15) I2'"), r2, tol_ode);
        report.push(format!("ode h={h}: (4h+1) I4' = 4h I0 + 5 I2"), r3, tol_ode);
        report.push(format!("ode h={h}: 4h(4h+1) I0'' = -3 I0"), r4, tol_ode);
        // cross-route agreement
        report.push(
            format!("h={h}: continuation vs quadrature I0"),
            (c0 - i0).abs() / i0.abs(),
            tol_ode,
        );
        report.push(
            format!("h={h}: A(h) v vs derivative quadrature"),
            ((ad0.re - d0) / d0).abs().max(((ad2.re - d2) / d2).abs()),
            1e-8,
        );
    }
    Ok(report)
}

/// Independent-quadrature check of (4h+1) I4' = 4h I0 + 5 I2 at `n` points.
pub fn verify_i4prime_relation(ev: &Evaluator, n: usize, tol: f64) -> Result<Report> {
    let mut report = Report::default();
    let spec = CycleSpec::new(Cycle::Gamma, Side::NotOnCut);
    for k in 0..n {
        let h = 0.1 * (100.0f64).powf(k as f64 / (n - 1) as f64); // 0.1 .. 10
        let i0 = integrate_cycle(spec, Exponent::X0, h, ev.quad_rtol)?.re;
        let i2 = integrate_cycle(spec, Exponent::X2, h, ev.quad_rtol)?.re;
        let d4 = integrate_cycle_derivative(spec, Exponent::X4, h, ev.quad_rtol)?.re;
        let lhs = (4.0 * h + 1.0) * d4;
        let rhs = 4.0 * h * i0 + 5.0 * i2;
        report.push(format!("h={h:.4}: (4h+1) d/dh I4 vs 4h I0 + 5 I2"), ((lhs - rhs) / lhs).abs(), tol);
    }
    Ok(report)
}

/// Boundary ratio I0/I2 -> 5 at the saddle value from both cut sides.
pub fn verify_saddle_ratio(ev: &Evaluator, tol: f64) -> Result<Report> {
    let mut report = Report::default();
    for (label, side) in [("upper", Side::Upper), ("lower", Side::Lower)] {
        for (sub, sgn) in [("right", 1.0), ("left", -1.0)] {
            let lim = extrapolate_ratio(ev, side, sgn)?;
            report.push(format!("I0/I2 -> 5 at -1/4 ({label}, {sub} side)"), (lim - 5.0).abs(), tol);
        }
    }
    Ok(report)
}

fn extrapolate_ratio(ev: &Evaluator, side: Side, sgn: f64) -> Result<f64> {
    let ts = [4e-6, 8e-6, 1.6e-5, 3.2e-5, 6.4e-5, 1.28e-4, 2.56e-4];
    let scale = 2.56e-4f64;
    let mut ata = [[0.0f64; 5]; 5];
    let mut atb = [0.0f64; 5];
    for &t in &ts {
        let bv = boundary_value(ev, -0.25 + sgn * t, side)?;
        let v = (bv.i0 / bv.i2).re;
        let u = t / scale;
        let row = [1.0, u * t.ln(), u, u * u * t.ln(), u * u];
        for i in 0..5 {
            for j in 0..5 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * v;
        }
    }
    solve5(&mut ata, &mut atb);
    Ok(atb[0])
}

fn solve5(a: &mut [[f64; 5]; 5], b: &mut [f64; 5]) {
    for p in 0..5 {
        let mut piv = p;
        for q in p + 1..5 {
            if a[q][p].abs() > a[piv][p].abs() {
                piv = q;
            }
        }
        a.swap(p, piv);
        b.swap(p, piv);
        let d = a[p][p];
        for c in p..5 {
            a[p][c] /= d;
        }
        b[p] /= d;
        for q in 0..5 {
            if q != p {
                let f = a[q][p];
                for c in p..5 {
                    a[q][c] -= f * a[p][c];
                }
                b[q] -= f * b[p];
            }
        }
    }
}

/// Cycle relations at the canonical sample energies.
pub fn verify_monodromy(ev: &Evaluator, tol: f64) -> Result<Report> {
    let mut report = Report::default();
    for h in [-0.05, -0.125, -0.2, -0.5, -1.0] {
        for r in verify_cycle_relations(ev, h)? {
            report.push(format!("h={h}: {} [{:?}]", r.name, r.integrand), r.relative(), tol);
        }
    }
    Ok(report)
}

/// Wronskian shape on both cut subintervals and the factor-2 jump of the
/// period pairing across -1/4.
pub fn verify_wronskian(ev: &Evaluator, tol_shape: f64, tol_jump: f64) -> Result<Report> {
    let mut report = Report::default();
    let shape = |h: f64| -> Result<Complex64> {
        Ok(wronskian(ev, h, Pairing::X2YdxVsYdx)?.w / (h * (4.0 * h + 1.0)))
    };
    // spread over (-2, -0.26)
    let far: Vec<Complex64> = [-0.26, -0.4, -0.7, -1.1, -1.6, -2.0]
        .iter()
        .map(|&h| shape(h))
        .collect::<Result<_>>()?;
    let far_mean = far.iter().sum::<Complex64>() / far.len() as f64;
    let far_spread = far.iter().map(|w| (w - far_mean).norm()).fold(0.0, f64::max) / far_mean.norm();
    report.push("W/(h(4h+1)) constant on (-2, -0.26)", far_spread, tol_shape);
    let near: Vec<Complex64> = [-0.24, -0.18, -0.12, -0.06, -0.03, -0.01]
        .iter()
        .map(|&h| shape(h))
        .collect::<Result<_>>()?;
    let near_mean = near.iter().sum::<Complex64>() / near.len() as f64;
    let near_spread =
        near.iter().map(|w| (w - near_mean).norm()).fold(0.0, f64::max) / near_mean.norm();
    report.push("W/(h(4h+1)) constant on (-0.24, -0.01)", near_spread, tol_shape);
    report.measured.push(("c on (-2,-0.26) (imag part)".into(), far_mean.im));
    report.measured.push(("c on (-0.24,-0.01) (imag part)".into(), near_mean.im));

    let wn = wronskian(ev, -0.125, Pairing::YdxVsDxOverY)?.w;
    let wf = wronskian(ev, -0.5, Pairing::YdxVsDxOverY)?.w;
    report.push(
        "period Wronskian factor-2 jump across -1/4",
        (wn - 2.0 * wf).norm() / wn.norm(),
        tol_jump,
    );
    report.measured.push(("period W on (-inf,-1/4) (imag part)".into(), wf.im));
    report.measured.push(("period W on (-1/4,0) (imag part)".into(), wn.im));
    Ok(report)
}

/// Fit the h = 0 model, check the monodromy-jump formula over the stated
/// window, and emit the I4' h^2-coefficient verdict.
pub fn verify_asymptotics(ev: &Evaluator, tol_jump: f64) -> Result<Report> {
    let mut report = Report::default();
    let series = ev.local_series();
    let mut samples = Vec::new();
    let mut pairs = Vec::new();
    let mut h = 1e-3;
    while h < 0.1001 {
        let v = ev.periods(Complex64::new(h, 0.0))?;
        samples.push((h, v));
        pairs.push((h, i4prime(&v)?));
        h *= 1.35;
    }
    let model = fit_asymptotic_constants(series, &samples)?;
    report.push("asymptotic fit residual", model.fit_residual, 1e-6);
    report.push("recovered h->0 constant vs 8/3", (model.kappa * 4.0 / 3.0 - 8.0 / 3.0).abs(), 1e-6);
    report.measured.push(("kappa (normalization vs single lobe)".into(), model.kappa));
    report.measured.push(("a1".into(), model.a1));
    report.measured.push(("a2".into(), model.a2));
    report.measured.push(("b2".into(), model.b2));

    // monodromy jump against the three-term log series, raw modulus divided
    // by the measured normalization
    let three = |hh: f64| LocalSeries::l0_three_term(hh).abs();
    for hh in [-0.04, -0.02, -0.01, -0.005] {
        let up = ev.periods(Complex64::new(hh, 1e-9))?;
        let jump = (2.0 * up.i0.im).abs() / model.kappa;
        let predicted = 2.0 * std::f64::consts::PI * three(hh);
        report.push(
            format!("jump of I0 at h={hh} vs 2 pi |L3(h)|"),
            (jump - predicted).abs() / predicted,
            tol_jump,
        );
    }
    // informational: the three-term formula truncates at ~1.6e-4 relative at
    // h = -0.05, outside the 1e-4 budget; record the deviation, do not gate
    {
        let hh = -0.05;
        let up = ev.periods(Complex64::new(hh, 1e-9))?;
        let jump = (2.0 * up.i0.im).abs() / model.kappa;
        let predicted = 2.0 * std::f64::consts::PI * three(hh);
        report
            .measured
            .push((format!("jump deviation at h={hh} (3-term truncation)"), (jump - predicted).abs() / predicted));
    }

    // the I4' h^2-coefficient verdict
    let c2 = fit_i4prime_h2_coefficient(series, &model, &pairs)?;
    let derived = 4.0 * model.a1 + 5.0 * model.b2 - 16.0;
    let stated = 4.0 * model.a1 + 5.0 * model.b2 - 304.0 / 3.0;
    report.measured.push(("I4' h^2 coefficient (measured)".into(), c2));
    report.measured.push(("candidate 4a1+5b2-16".into(), derived));
    report.measured.push(("candidate 4a1+5b2-304/3".into(), stated));
    report.push("I4' h^2 coefficient matches 4a1+5b2-16", (c2 - derived).abs(), 1e-2);
    report.push(
        "I4' h^2 coefficient rejects 4a1+5b2-304/3",
        1.0 / (c2 - stated).abs(),
        0.1,
    );
    Ok(report)
}

/// Convenience wrapper: seed samples for external fits.
pub fn asymptotic_samples(ev: &Evaluator) -> Result<Vec<(f64, PeriodVector)>> {
    let mut samples = Vec::new();
    let mut h = 1e-3;
    while h < 0.1001 {
        samples.push((h, ev.periods(Complex64::new(h, 0.0))?));
        h *= 1.35;
    }
    Ok(samples)
}
