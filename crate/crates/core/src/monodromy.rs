//! Boundary values on the branch cut, Picard-Lefschetz cycle relations and
//! the Wronskians that drive the Petrov bound.
//!
//! Boundary values I(h +- i0) are Richardson limits of continuation values at
//! geometric offsets.  The vanishing-cycle period pairs delta_0, delta_1 are
//! themselves solutions of the Picard-Fuchs system: they are seeded by real
//! quadrature at h = -1/8 and continued wherever needed, which gives an
//! implementation of delta_0 beyond h = -1/4 where no real-segment quadrature
//! exists.

use crate::error::{Error, Result};
use crate::level_curve::{integrate_cycle, Cycle, CycleSpec, Exponent, Side as CutSide};
use crate::picard_fuchs::{
    continue_along_path, i4prime, pf_apply, ContinuationPath, Evaluator, PeriodVector,
};
use num_complex::Complex64;

/// Boundary values of (I0, I2, I4') at a point of the open cut.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryValue {
    pub h: f64,
    pub side: CutSide,
    pub i0: Complex64,
    pub i2: Complex64,
    pub i4p: Complex64,
    /// Estimated extrapolation error (max over components).
    pub extrap_error: f64,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Richardson (Neville) extrapolation of f(delta) to delta = 0.
fn richardson(deltas: &[f64], values: &[(Complex64, Complex64)]) -> ((Complex64, Complex64), f64) {
    let n = deltas.len();
    let mut t0: Vec<Complex64> = values.iter().map(|v| v.0).collect();
    let mut t2: Vec<Complex64> = values.iter().map(|v| v.1).collect();
    let mut prev = (t0[n - 1], t2[n - 1]);
    let mut err = f64::INFINITY;
    for m in 1..n {
        for k in (m..n).rev() {
            let ratio = deltas[k - m] / deltas[k];
            t0[k] = t0[k] + (t0[k] - t0[k - 1]) / (ratio - 1.0);
            t2[k] = t2[k] + (t2[k] - t2[k - 1]) / (ratio - 1.0);
        }
        let cur = (t0[n - 1], t2[n - 1]);
        err = (cur.0 - prev.0).norm().max((cur.1 - prev.1).norm());
        prev = cur;
    }
    (prev, err)
}

/// Boundary value of the exterior-cycle integrals at h < 0 on the given side.
///
/// Offsets delta_k = 2^-k * 1e-2 scaled down near the singular energies so
/// the extrapolation nodes stay inside the local disc of analyticity.
pub fn boundary_value(ev: &Evaluator, h: f64, side: CutSide) -> Result<BoundaryValue> {
    if h >= 0.0 || h == -0.25 {
        return Err(Error::InvalidInput(format!(
            "boundary values need h < 0 away from -1/4, got {h}"
        )));
    }
    let sign = match side {
        CutSide::Upper => 1.0,
        CutSide::Lower => -1.0,
        CutSide::NotOnCut => {
            return Err(Error::InvalidInput("boundary_value needs Upper or Lower".into()))
        }
    };
    let radius = h.abs().min((h + 0.25).abs());
    let delta0 = 0.01f64.min(0.4 * radius);
    let levels = 11usize;
    let mut deltas = Vec::with_capacity(levels);
    let mut vals = Vec::with_capacity(levels);
    for k in 0..levels {
        let d = delta0 * 0.5f64.powi(k as i32);
        let v = ev.periods(c(h, sign * d))?;
        deltas.push(d);
        vals.push((v.i0, v.i2));
    }
    let ((i0, i2), err) = richardson(&deltas, &vals);
    if !(err.is_finite()) || err > 1e-6 {
        return Err(Error::ExtrapolationFailure { estimate: err, target: 1e-6 });
    }
    let pv = PeriodVector::new(c(h, 0.0), i0, i2);
    Ok(BoundaryValue { h, side, i0, i2, i4p: i4prime(&pv)?, extrap_error: err })
}

/// Vanishing-cycle period pair continued from its quadrature seed at -1/8.
///
/// `cycle` must be Delta0 or DeltaPlus1.  For targets off the real axis the
/// path lifts vertically from the seed; delta_0 has no monodromy across
/// (-1/4, 0), so starting on that segment is legitimate continuation.
pub fn vanishing_cycle_periods(
    ev: &Evaluator,
    cycle: Cycle,
    h: Complex64,
) -> Result<PeriodVector> {
    let seed_h = -0.125;
    let spec = CycleSpec::new(cycle, CutSide::Upper);
    let i0 = integrate_cycle(spec, Exponent::X0, seed_h, ev.quad_rtol)?;
    let i2 = integrate_cycle(spec, Exponent::X2, seed_h, ev.quad_rtol)?;
    let start = PeriodVector::new(c(seed_h, 0.0), i0, i2);
    if (h - start.h).norm() == 0.0 {
        return Ok(start);
    }
    // route: seed -> seed + i*eta -> (re h, eta) -> h, entirely in the closed
    // upper half plane (mirror for lower-half targets)
    let sgn = if h.im < 0.0 { -1.0 } else { 1.0 };
    let eta = 0.06f64.max(2.0 * h.im.abs().min(0.06));
    let mut wp = vec![start.h];
    if h.im.abs() < eta || h.re != seed_h {
        wp.push(c(seed_h, sgn * eta));
        wp.push(c(h.re, sgn * eta));
    }
    wp.push(h);
    let clearance = 0.05f64
        .min(0.5 * crate::picard_fuchs::dist_to_singularities(start.h))
        .min(0.5 * crate::picard_fuchs::dist_to_singularities(h));
    let path = ContinuationPath::new(wp, clearance)?;
    continue_along_path(&path, &start, &ev.ode_tol)
}

/// One verified relation: name, absolute residual and the scale it was
/// measured against.
#[derive(Clone, Debug)]
pub struct RelationResidual {
    pub name: &'static str,
    pub integrand: Exponent,
    pub residual: f64,
    pub scale: f64,
}

impl RelationResidual {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale.max(1e-300)
    }
}

/// Verify the Picard-Lefschetz cycle relations at a point of the cut.
///
/// For -1/4 < h < 0 the three-cycle relations are checked against real
/// quadratures of the lobes and the imaginary segment:
///   gamma+ = delta0+ + delta1+ + delta-1+
///   gamma- = -delta0+ + delta1+ + delta-1+
/// For h < -1/4:
///   gamma- = -delta0+              (delta0 by continuation)
///   delta1+ = delta1-              (no monodromy of the lobe cycle)
pub fn verify_cycle_relations(ev: &Evaluator, h: f64) -> Result<Vec<RelationResidual>> {
    if h >= 0.0 || h == -0.25 {
        return Err(Error::InvalidInput(format!("cycle relations need h < 0, h != -1/4, got {h}")));
    }
    let mut out = Vec::new();
    let up = boundary_value(ev, h, CutSide::Upper)?;
    let dn = boundary_value(ev, h, CutSide::Lower)?;
    if h > -0.25 {
        for i in [Exponent::X0, Exponent::X2] {
            let d0 = integrate_cycle(CycleSpec::new(Cycle::Delta0, CutSide::Upper), i, h, ev.quad_rtol)?;
            let d1 = integrate_cycle(CycleSpec::new(Cycle::DeltaPlus1, CutSide::Upper), i, h, ev.quad_rtol)?;
            let dm = integrate_cycle(CycleSpec::new(Cycle::DeltaMinus1, CutSide::Upper), i, h, ev.quad_rtol)?;
            let (g_up, g_dn) = match i {
                Exponent::X0 => (up.i0, dn.i0),
                _ => (up.i2, dn.i2),
            };
            let scale = g_up.norm().max(1.0);
            out.push(RelationResidual {
                name: "gamma+ = delta0+ + delta1+ + delta-1+",
                integrand: i,
                residual: (g_up - (d0 + d1 + dm)).norm(),
                scale,
            });
            out.push(RelationResidual {
                name: "gamma- = -delta0+ + delta1+ + delta-1+",
                integrand: i,
                residual: (g_dn - (-d0 + d1 + dm)).norm(),
                scale,
            });
            out.push(RelationResidual {
                name: "delta1+ = delta-1+ (mirror lobes)",
                integrand: i,
                residual: (d1 - dm).norm(),
                scale: d1.norm().max(1e-12),
            });
        }
    } else {
        // delta0 and delta1 boundary values by continuation + Richardson
        let extrap = |cycle: Cycle, side: f64| -> Result<(Complex64, Complex64)> {
            let radius = (h + 0.25).abs().min(h.abs());
            let d0 = 0.01f64.min(0.4 * radius);
            let mut deltas = Vec::new();
            let mut vals = Vec::new();
            for k in 0..10 {
                let d = d0 * 0.5f64.powi(k);
                let v = vanishing_cycle_periods(ev, cycle, c(h, side * d))?;
                deltas.push(d);
                vals.push((v.i0, v.i2));
            }
            let ((a, b), err) = richardson(&deltas, &vals);
            if err > 1e-6 {
                return Err(Error::ExtrapolationFailure { estimate: err, target: 1e-6 });
            }
            Ok((a, b))
        };
        let (d0_i0, d0_i2) = extrap(Cycle::Delta0, 1.0)?;
        let (d1u_i0, d1u_i2) = extrap(Cycle::DeltaPlus1, 1.0)?;
        let (d1l_i0, d1l_i2) = extrap(Cycle::DeltaPlus1, -1.0)?;
        for i in [Exponent::X0, Exponent::X2] {
            let (g_dn, d0, d1u, d1l) = match i {
                Exponent::X0 => (dn.i0, d0_i0, d1u_i0, d1l_i0),
                _ => (dn.i2, d0_i2, d1u_i2, d1l_i2),
            };
            out.push(RelationResidual {
                name: "gamma- = -delta0+ (beyond -1/4)",
                integrand: i,
                residual: (g_dn + d0).norm(),
                scale: g_dn.norm().max(1.0),
            });
            out.push(RelationResidual {
                name: "delta1+ = delta1- (single valued)",
                integrand: i,
                residual: (d1u - d1l).norm(),
                scale: d1u.norm().max(1e-12),
            });
        }
    }
    Ok(out)
}

/// Which pair of one-forms a Wronskian sample compares across the cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// det of (x^2 y dx, y dx) boundary values: shape c h (4h+1).
    X2YdxVsYdx,
    /// det of (y dx, dx/y) boundary values (periods): piecewise constant with
    /// the factor-2 jump across -1/4.
    YdxVsDxOverY,
}

/// A Wronskian of boundary values across the cut.
#[derive(Clone, Copy, Debug)]
pub struct WronskianSample {
    pub h: f64,
    pub pairing: Pairing,
    pub w: Complex64,
}

/// Evaluate the Wronskian at a point of the open cut.
pub fn wronskian(ev: &Evaluator, h: f64, pairing: Pairing) -> Result<WronskianSample> {
    let up = boundary_value(ev, h, CutSide::Upper)?;
    let dn = boundary_value(ev, h, CutSide::Lower)?;
    let w = match pairing {
        Pairing::X2YdxVsYdx => up.i2 * dn.i0 - up.i0 * dn.i2,
        Pairing::YdxVsDxOverY => {
            let hc = c(h, 0.0);
            let (du, _) = pf_apply(hc, up.i0, up.i2)?;
            let (dl, _) = pf_apply(hc, dn.i0, dn.i2)?;
            up.i0 * dl - dn.i0 * du
        }
    };
    Ok(WronskianSample { h, pairing, w })
}
