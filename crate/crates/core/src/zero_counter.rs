//! Argument-principle zero counts of the Melnikov combinations
//! M(h) = l0 I0 + l2 I2 + l4 I4' over a keyhole contour in D, plus the
//! Petrov-style upper bound from the circle variation and the explicit cut
//! factor alpha(h) h (4h+1).
//!
//! Period values on a contour are built once by continuing the system along
//! the contour itself and are shared between parameter points; adaptive
//! phase refinement inserts dyadically-anchored midpoints whose values are
//! pure functions of the contour geometry, so counts are independent of
//! evaluation order and thread count.

use crate::error::{Error, Result};
use crate::picard_fuchs::{
    continue_along_path, dist_to_singularities, pf_apply, ContinuationPath, Evaluator,
    PeriodVector,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};

/// Real projective parameters of M(h) = l0 I0 + l2 I2 + l4 I4', stored
/// normalized: unit Euclidean norm, first nonzero coordinate positive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MelnikovParams {
    pub lambda0: f64,
    pub lambda2: f64,
    pub lambda4: f64,
}

impl MelnikovParams {
    pub fn new(lambda0: f64, lambda2: f64, lambda4: f64) -> Result<Self> {
        let n = (lambda0 * lambda0 + lambda2 * lambda2 + lambda4 * lambda4).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("Melnikov parameters must be nonzero and finite".into()));
        }
        let mut v = [lambda0 / n, lambda2 / n, lambda4 / n];
        let first = v.iter().copied().find(|x| *x != 0.0).unwrap_or(0.0);
        if first < 0.0 {
            for x in &mut v {
                *x = -*x;
            }
        }
        Ok(MelnikovParams { lambda0: v[0], lambda2: v[1], lambda4: v[2] })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lambda0, self.lambda2, self.lambda4]
    }

    /// Linear combination at one period sample.
    fn combine(&self, i0: Complex64, i2: Complex64, i4p: Complex64) -> Complex64 {
        self.lambda0 * i0 + self.lambda2 * i2 + self.lambda4 * i4p
    }
}

/// Keyhole contour parameters: boundary of {|h| <= R} minus the
/// delta-neighbourhood of the cut (-inf, 0].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KeyholeContour {
    pub radius: f64,
    pub delta: f64,
    /// Dyadic refinement depth limit inside one base interval.
    pub max_depth: usize,
    /// Total budget of refined evaluations per winding run.
    pub max_points: usize,
}

impl Default for KeyholeContour {
    fn default() -> Self {
        KeyholeContour { radius: 50.0, delta: 1e-3, max_depth: 24, max_points: 20_000 }
    }
}

impl KeyholeContour {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 1.0) {
            return Err(Error::InvalidInput("contour radius must exceed 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 0.125) {
            return Err(Error::InvalidInput("contour delta must lie in (0, 1/8)".into()));
        }
        Ok(())
    }
}

/// Measurement status of a zero count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountStatus {
    Stable,
    NearBoundary,
    Failed,
}

/// Result of a keyhole winding measurement.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZeroCount {
    pub count: u32,
    /// Distance of the raw winding / 2 pi from the nearest integer.
    pub winding_defect: f64,
    /// Smallest |M| met on the contour (absolute).
    pub min_modulus_on_contour: f64,
    pub status: CountStatus,
}

// ---------------------------------------------------------------------------
// contour tables

const PIECES: usize = 4;

/// Geometry of one keyhole: piece 0 = upper cut side (toward the origin),
/// 1 = small semicircle around 0, 2 = lower cut side (away from the origin),
/// 3 = big circle swept counterclockwise.
#[derive(Clone, Copy, Debug)]
struct Geometry {
    radius: f64,
    delta: f64,
    reach: f64, // sqrt(R^2 - delta^2)
}

impl Geometry {
    fn new(radius: f64, delta: f64) -> Self {
        Geometry { radius, delta, reach: (radius * radius - delta * delta).sqrt() }
    }

    /// Point of piece `p` at parameter t in [0, 1].
    fn point(&self, p: usize, t: f64) -> Complex64 {
        match p {
            0 => {
                let u = 1.0 - t;
                Complex64::new(-self.reach * u * u * u, self.delta)
            }
            1 => {
                let th = std::f64::consts::FRAC_PI_2 * (1.0 - 2.0 * t);
                Complex64::from_polar(self.delta, th)
            }
            2 => Complex64::new(-self.reach * t * t * t, -self.delta),
            _ => {
                let a0 = -std::f64::consts::PI + (self.delta / self.radius).asin();
                Complex64::from_polar(self.radius, a0 + t * (-2.0 * a0))
            }
        }
    }
}

/// Period samples along one keyhole, shared between parameter points.
struct ContourTable {
    geom: Geometry,
    /// Base grid per piece: (t, h, I0, I2).
    base: [Vec<(f64, Complex64, Complex64, Complex64)>; PIECES],
    /// Dyadically refined midpoints keyed by (piece, base interval, numerator,
    /// log2 denominator); values are pure functions of the geometry.
    refined: RwLock<HashMap<(u8, u32, u32, u8), (Complex64, Complex64)>>,
}

fn short_hop(
    ev: &Evaluator,
    from: Complex64,
    to: Complex64,
    v: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    if (from - to).norm() == 0.0 {
        return Ok(v);
    }
    let seg = crate::picard_fuchs::segment_singularity_distance(from, to);
    let clearance = (0.9 * seg).max(1e-300).min(0.45 * dist_to_singularities(from).max(1e-300));
    let path = ContinuationPath::new(vec![from, to], clearance)?;
    let pv = continue_along_path(&path, &PeriodVector::new(from, v.0, v.1), &ev.ode_tol)?;
    Ok((pv.i0, pv.i2))
}

impl ContourTable {
    fn build(ev: &Evaluator, radius: f64, delta: f64) -> Result<Self> {
        let geom = Geometry::new(radius, delta);
        // base sample counts per piece
        let n = [192usize, 48, 192, (96.0 * radius.ln().max(1.0)) as usize + 384];
        // anchor at h = R (parameter of piece 3 where the angle is 0)
        let anchor_h = Complex64::new(radius, 0.0);
        let anchor = ev.periods(anchor_h)?;
        let a0 = -std::f64::consts::PI + (delta / radius).asin();
        let t_anchor = -a0 / (-2.0 * a0); // angle 0
        let mut circle: Vec<(f64, Complex64, Complex64, Complex64)> = Vec::with_capacity(n[3] + 1);
        // fill the circle grid indices
        let ts: Vec<f64> = (0..=n[3]).map(|k| k as f64 / n[3] as f64).collect();
        // walk ccw from the anchor
        let mut vals = vec![(Complex64::default(), Complex64::default()); ts.len()];
        let mut split = 0usize;
        for (k, &t) in ts.iter().enumerate() {
            if t >= t_anchor {
                split = k;
                break;
            }
        }
        let mut cur = (anchor.i0, anchor.i2);
        let mut prev_h = anchor_h;
        for k in split..ts.len() {
            let h = geom.point(3, ts[k]);
            cur = short_hop(ev, prev_h, h, cur)?;
            vals[k] = cur;
            prev_h = h;
        }
        // walk cw from the anchor
        cur = (anchor.i0, anchor.i2);
        prev_h = anchor_h;
        for k in (0..split).rev() {
            let h = geom.point(3, ts[k]);
            cur = short_hop(ev, prev_h, h, cur)?;
            vals[k] = cur;
            prev_h = h;
        }
        for (k, &t) in ts.iter().enumerate() {
            circle.push((t, geom.point(3, t), vals[k].0, vals[k].1));
        }

        // piece 0 starts at the ccw end of the circle (upper-left corner)
        let start0 = circle.last().unwrap();
        let mut piece0 = Vec::with_capacity(n[0] + 1);
        let mut cur = (start0.2, start0.3);
        let mut prev_h = start0.1;
        for k in 0..=n[0] {
            let t = k as f64 / n[0] as f64;
            let h = geom.point(0, t);
            cur = short_hop(ev, prev_h, h, cur)?;
            piece0.push((t, h, cur.0, cur.1));
            prev_h = h;
        }
        let mut piece1 = Vec::with_capacity(n[1] + 1);
        for k in 0..=n[1] {
            let t = k as f64 / n[1] as f64;
            let h = geom.point(1, t);
            cur = short_hop(ev, prev_h, h, cur)?;
            piece1.push((t, h, cur.0, cur.1));
            prev_h = h;
        }
        let mut piece2 = Vec::with_capacity(n[2] + 1);
        for k in 0..=n[2] {
            let t = k as f64 / n[2] as f64;
            let h = geom.point(2, t);
            cur = short_hop(ev, prev_h, h, cur)?;
            piece2.push((t, h, cur.0, cur.1));
            prev_h = h;
        }
        // closure: the end of piece 2 must reproduce the circle start
        let d_close = circle[0].1;
        let closed = short_hop(ev, prev_h, d_close, cur)?;
        let rel = (closed.0 - circle[0].2).norm() / circle[0].2.norm();
        if rel > 1e-6 {
            return Err(Error::StiffnessFailure {
                h: crate::picard_fuchs::format_c(d_close),
                step: rel,
                steps: 0,
            });
        }
        Ok(ContourTable {
            geom,
            base: [piece0, piece1, piece2, circle],
            refined: RwLock::new(HashMap::new()),
        })
    }

    /// Period value at dyadic position num/2^den inside base interval j of
    /// piece p; anchored on the left endpoint chain so the value does not
    /// depend on evaluation order.
    fn refined_value(
        &self,
        ev: &Evaluator,
        p: usize,
        j: u32,
        num: u32,
        den: u8,
    ) -> Result<(Complex64, Complex64)> {
        debug_assert!(num % 2 == 1 && num < (1u32 << den));
        let key = (p as u8, j, num, den);
        if let Some(&v) = self.refined.read().unwrap().get(&key) {
            return Ok(v);
        }
        // parent: previous dyadic point at this or a shallower level
        let (ph, pv) = if num == 1 {
            let b = &self.base[p][j as usize];
            (b.1, (b.2, b.3))
        } else {
            // largest dyadic point strictly below num/2^den
            let mut pn = num - 1;
            let mut pd = den;
            while pn % 2 == 0 {
                pn /= 2;
                pd -= 1;
            }
            let v = self.refined_value(ev, p, j, pn, pd)?;
            (self.param_point(p, j, pn, pd), v)
        };
        let h = self.param_point(p, j, num, den);
        let v = short_hop(ev, ph, h, pv)?;
        self.refined.write().unwrap().insert(key, v);
        Ok(v)
    }

    fn param_point(&self, p: usize, j: u32, num: u32, den: u8) -> Complex64 {
        let n = (self.base[p].len() - 1) as f64;
        let t = (j as f64 + num as f64 / (1u64 << den) as f64) / n;
        self.geom.point(p, t)
    }
}

/// Shared registry of contour tables keyed by (radius, delta) bits.
#[derive(Default)]
pub struct ContourCache {
    tables: RwLock<HashMap<(u64, u64), Arc<ContourTable>>>,
}

impl ContourCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn table(&self, ev: &Evaluator, radius: f64, delta: f64) -> Result<Arc<ContourTable>> {
        let key = (radius.to_bits(), delta.to_bits());
        if let Some(t) = self.tables.read().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let built = Arc::new(ContourTable::build(ev, radius, delta)?);
        let mut w = self.tables.write().unwrap();
        Ok(w.entry(key).or_insert(built).clone())
    }
}

// ---------------------------------------------------------------------------
// evaluation of M and F

/// M(h) for one parameter point via the continuation service.
pub fn eval_m(ev: &Evaluator, params: &MelnikovParams, h: Complex64) -> Result<Complex64> {
    let (i0, i2, i4p) = ev.triple(h)?;
    Ok(params.combine(i0, i2, i4p))
}

/// alpha(h) = (4h+1) l2 + 5 l4,  beta(h) = (4h+1) l0 + 4h l4.
pub fn alpha_beta(params: &MelnikovParams, h: Complex64) -> (Complex64, Complex64) {
    let fh1 = 4.0 * h + 1.0;
    (fh1 * params.lambda2 + 5.0 * params.lambda4, fh1 * params.lambda0 + 4.0 * h * params.lambda4)
}

/// The argument-principle function of the Petrov analysis:
/// F = M1/I0 when l4 = 0, else F = (4h+1) M / I0.  The alpha-beta route
/// F = alpha I2/I0 + beta is evaluated alongside and must agree to 1e-10.
pub fn eval_f(ev: &Evaluator, params: &MelnikovParams, h: Complex64) -> Result<Complex64> {
    let (i0, i2, i4p) = ev.triple(h)?;
    if params.lambda4 == 0.0 {
        return Ok(params.combine(i0, i2, i4p) / i0);
    }
    let f1 = (4.0 * h + 1.0) * params.combine(i0, i2, i4p) / i0;
    let (al, be) = alpha_beta(params, h);
    let f2 = al * i2 / i0 + be;
    let scale = f1.norm().max(1.0);
    if (f1 - f2).norm() > 1e-10 * scale {
        return Err(Error::InvalidInput(format!(
            "alpha-beta identity violated at h = {}: {f1} vs {f2}",
            crate::picard_fuchs::format_c(h)
        )));
    }
    Ok(f1)
}

// ---------------------------------------------------------------------------
// winding measurement

struct RunStats {
    count: u32,
    defect: f64,
    min_mod: f64,
    max_mod: f64,
}

struct WindingWalk<'a> {
    ev: &'a Evaluator,
    table: &'a ContourTable,
    params: MelnikovParams,
    budget: usize,
    used: usize,
    max_depth: usize,
    total: f64,
    min_mod: f64,
    max_mod: f64,
}

fn m_of(params: &MelnikovParams, h: Complex64, i0: Complex64, i2: Complex64) -> Complex64 {
    let i4p = (4.0 * h * i0 + 5.0 * i2) / (4.0 * h + 1.0);
    params.combine(i0, i2, i4p)
}

impl<'a> WindingWalk<'a> {
    fn segment(
        &mut self,
        p: usize,
        j: u32,
        a: (u32, u8),
        b: (u32, u8),
        ma: Complex64,
        mb: Complex64,
        depth: usize,
    ) -> Result<()> {
        let d = (mb / ma).arg();
        if d.abs() <= std::f64::consts::FRAC_PI_2 {
            self.total += d;
            return Ok(());
        }
        if depth >= self.max_depth || self.used >= self.budget {
            return Err(Error::RefinementExhausted { points: self.used, depth });
        }
        // midpoint in dyadic coordinates
        let den = a.1.max(b.1) + 1;
        let na = a.0 << (den - a.1);
        let nb = b.0 << (den - b.1);
        debug_assert!(nb == na + 2);
        let nm = (na + nb) / 2; // odd by construction
        self.used += 1;
        let (i0, i2) = self.table.refined_value(self.ev, p, j, nm, den)?;
        let h = self.table.param_point(p, j, nm, den);
        let mm = m_of(&self.params, h, i0, i2);
        let nm_mod = mm.norm();
        self.min_mod = self.min_mod.min(nm_mod);
        self.max_mod = self.max_mod.max(nm_mod);
        self.segment(p, j, a, (nm, den), ma, mm, depth + 1)?;
        self.segment(p, j, (nm, den), b, mm, mb, depth + 1)
    }
}

fn run_winding(
    ev: &Evaluator,
    cache: &ContourCache,
    params: &MelnikovParams,
    radius: f64,
    delta: f64,
    contour: &KeyholeContour,
) -> Result<RunStats> {
    let table = cache.table(ev, radius, delta)?;
    let mut walk = WindingWalk {
        ev,
        table: &table,
        params: *params,
        budget: contour.max_points,
        used: 0,
        max_depth: contour.max_depth,
        total: 0.0,
        min_mod: f64::INFINITY,
        max_mod: 0.0,
    };
    let mut first_m = None;
    let mut prev_m: Option<Complex64> = None;
    for p in 0..PIECES {
        let base = &table.base[p];
        for j in 0..base.len() {
            let (_, h, i0, i2) = base[j];
            let m = m_of(params, h, i0, i2);
            let nm = m.norm();
            walk.min_mod = walk.min_mod.min(nm);
            walk.max_mod = walk.max_mod.max(nm);
            if first_m.is_none() {
                first_m = Some(m);
            }
            if let Some(pm) = prev_m {
                if j == 0 {
                    // junction between pieces: same geometric point, add the
                    // (tiny) phase mismatch directly
                    walk.total += (m / pm).arg();
                } else {
                    walk.segment(p, (j - 1) as u32, (0, 0), (1, 0), pm, m, 0)?;
                }
            }
            prev_m = Some(m);
        }
    }
    // close the loop: last point of the circle coincides with the first point
    // of piece 0 geometrically
    walk.total += (first_m.unwrap() / prev_m.unwrap()).arg();
    let w = walk.total / (2.0 * std::f64::consts::PI);
    let count = w.round().max(0.0) as u32;
    Ok(RunStats { count, defect: (w - w.round()).abs(), min_mod: walk.min_mod, max_mod: walk.max_mod })
}

// ---------------------------------------------------------------------------
// zero-free radius and count_zeros

/// Radius beyond which |M| cannot vanish, from the large-h dominance of the
/// l2 I2 term (or of (l0+l4) I0 when l2 = 0).  Returns (radius, capped):
/// `capped` marks parameter points so close to the escape loci that the
/// required radius exceeds the cap, where a finite keyhole cannot decide.
pub fn zero_free_radius(params: &MelnikovParams, base_radius: f64) -> (f64, bool) {
    const CAP: f64 = 80_000.0;
    let a2 = params.lambda2.abs();
    let rest = params.lambda0.abs() + params.lambda4.abs();
    let needed = if a2 > 0.0 {
        (3.0 * rest / a2).powi(2)
    } else {
        let head = (params.lambda0 + params.lambda4).abs();
        if head > 0.0 {
            (4.0 * params.lambda4.abs() / head).powi(2)
        } else {
            // pure I4' - I0 direction: bounded zeros
            0.0
        }
    };
    if needed > CAP {
        return (base_radius, true);
    }
    // quantize to power-of-two multiples of the base radius so contour
    // tables are shared
    let mut r = base_radius;
    while r < needed {
        r *= 2.0;
    }
    (r, false)
}

/// Count zeros of M inside the keyhole by winding, with delta-halving and
/// radius-doubling re-runs deciding the status.
pub fn count_zeros(
    ev: &Evaluator,
    cache: &ContourCache,
    params: &MelnikovParams,
    contour: &KeyholeContour,
) -> Result<ZeroCount> {
    contour.validate()?;
    let (radius, capped) = zero_free_radius(params, contour.radius);
    let defect_tol = 1e-3;
    let main = match run_winding(ev, cache, params, radius, contour.delta, contour) {
        Ok(s) => s,
        Err(Error::RefinementExhausted { .. }) => {
            return Ok(ZeroCount {
                count: 0,
                winding_defect: f64::NAN,
                min_modulus_on_contour: 0.0,
                status: CountStatus::Failed,
            })
        }
        Err(e) => return Err(e),
    };
    let mut status = CountStatus::Stable;
    if main.defect >= defect_tol || main.min_mod < 1e-6 * main.max_mod || capped {
        status = CountStatus::NearBoundary;
    }
    if status == CountStatus::Stable {
        for (r2, d2) in [(radius, contour.delta / 2.0), (2.0 * radius, contour.delta)] {
            match run_winding(ev, cache, params, r2, d2, contour) {
                Ok(s) => {
                    let shrunk = d2 < contour.delta && s.min_mod < 0.6 * main.min_mod;
                    if s.count != main.count || s.defect >= defect_tol || shrunk {
                        status = CountStatus::NearBoundary;
                        break;
                    }
                }
                Err(Error::RefinementExhausted { .. }) => {
                    status = CountStatus::Failed;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ZeroCount {
        count: main.count,
        winding_defect: main.defect,
        min_modulus_on_contour: main.min_mod,
        status,
    })
}

// ---------------------------------------------------------------------------
// Petrov bound

/// Argument variation of the Petrov function F along the big circle of the
/// keyhole plus the counted real roots of the explicit cut factor, in the
/// classical budget  floor(var/2pi) + (#cut roots) + 1.
///
/// Cases: l2 = l4 = 0 uses F = I0'/I0 (period pairing; constant Wronskian,
/// no cut roots); l4 = 0 uses F = M1/I0 with factor h(4h+1); otherwise
/// F = (4h+1) M/I0 with factor alpha(h) h (4h+1).
pub fn petrov_bound(
    ev: &Evaluator,
    cache: &ContourCache,
    params: &MelnikovParams,
    radius: f64,
    delta: f64,
) -> Result<u32> {
    let table = cache.table(ev, radius, delta)?;
    let circle = &table.base[3];
    let f_at = |h: Complex64, i0: Complex64, i2: Complex64| -> Complex64 {
        if params.lambda2 == 0.0 && params.lambda4 == 0.0 {
            let (d0, _) = pf_apply(h, i0, i2).unwrap();
            d0 / i0
        } else if params.lambda4 == 0.0 {
            m_of(params, h, i0, i2) / i0
        } else {
            (4.0 * h + 1.0) * m_of(params, h, i0, i2) / i0
        }
    };
    let mut total = 0.0f64;
    let mut prev: Option<Complex64> = None;
    for &(_, h, i0, i2) in circle {
        let f = f_at(h, i0, i2);
        if let Some(p) = prev {
            let d = (f / p).arg();
            // base circle grid is dense enough for the smooth F away from zeros
            total += d;
        }
        prev = Some(f);
    }
    let mut cut_roots = 0u32;
    if params.lambda2 != 0.0 || params.lambda4 != 0.0 {
        // root of h(4h+1) inside (-R, 0): h = -1/4
        if radius > 0.25 {
            cut_roots += 1;
        }
        if params.lambda4 != 0.0 && params.lambda2 != 0.0 {
            let h_alpha = -(params.lambda2 + 5.0 * params.lambda4) / (4.0 * params.lambda2);
            if h_alpha > -radius && h_alpha < 0.0 && h_alpha != -0.25 {
                cut_roots += 1;
            }
        }
    }
    let bound = (total / (2.0 * std::f64::consts::PI)).floor() as i64 + cut_roots as i64 + 1;
    Ok(bound.max(0) as u32)
}

/// Count sign changes of the (real) M along (lo, hi) on the positive real
/// axis; used by the conjugate-pairing parity cross-check.
pub fn real_axis_zero_count(
    ev: &Evaluator,
    params: &MelnikovParams,
    lo: f64,
    hi: f64,
    grid: usize,
) -> Result<u32> {
    let mut prev_sign = 0.0;
    let mut count = 0u32;
    let ratio = (hi / lo).powf(1.0 / grid as f64);
    let mut h = lo;
    for _ in 0..=grid {
        let m = eval_m(ev, params, Complex64::new(h, 0.0))?.re;
        let s = m.signum();
        if prev_sign != 0.0 && s != prev_sign && m != 0.0 {
            count += 1;
        }
        if m != 0.0 {
            prev_sign = s;
        }
        h *= ratio;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use once_cell::sync::Lazy;
    use proptest::prelude::*;

    static EV: Lazy<Evaluator> = Lazy::new(|| Evaluator::with_defaults().unwrap());
    static CACHE: Lazy<ContourCache> = Lazy::new(ContourCache::new);

    fn count(l0: f64, l2: f64, l4: f64) -> ZeroCount {
        let p = MelnikovParams::new(l0, l2, l4).unwrap();
        count_zeros(&EV, &CACHE, &p, &KeyholeContour::default()).unwrap()
    }

    #[test]
    fn params_normalization() {
        let p = MelnikovParams::new(-2.0, 4.0, -6.0).unwrap();
        let n = (p.lambda0 * p.lambda0 + p.lambda2 * p.lambda2 + p.lambda4 * p.lambda4).sqrt();
        assert!((n - 1.0).abs() < 1e-15);
        assert!(p.lambda0 > 0.0); // first nonzero coordinate positive
        // idempotent
        let q = MelnikovParams::new(p.lambda0, p.lambda2, p.lambda4).unwrap();
        assert_eq!(p, q);
        assert!(MelnikovParams::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn alpha_beta_examples() {
        let h = Complex64::new(0.3, -0.2);
        // [0:0:1]: alpha = 5, beta = 4h
        let p = MelnikovParams::new(0.0, 0.0, 1.0).unwrap();
        let (a, b) = alpha_beta(&p, h);
        assert_eq!(a, Complex64::new(5.0, 0.0));
        assert!((b - 4.0 * h).norm() < 1e-15);
        // [1:-5:0]: alpha = -5(4h+1) vanishes at -1/4
        let p = MelnikovParams::new(1.0, -5.0, 0.0).unwrap();
        let (a, _) = alpha_beta(&p, Complex64::new(-0.25, 0.0));
        assert!(a.norm() < 1e-15);
        // [1:1:1]: real root of alpha at -(1+5)/4 = -3/2
        let p = MelnikovParams::new(1.0, 1.0, 1.0).unwrap();
        let ha = -(p.lambda2 + 5.0 * p.lambda4) / (4.0 * p.lambda2);
        assert!((ha + 1.5).abs() < 1e-12);
        let (a, _) = alpha_beta(&p, Complex64::new(ha, 0.0));
        assert!(a.norm() < 1e-12);
    }

    #[test]
    fn eval_m_matches_quadrature_at_one() {
        let p = MelnikovParams::new(0.0, 1.0, 0.0).unwrap();
        let v = eval_m(&EV, &p, Complex64::new(1.0, 0.0)).unwrap();
        assert!((v.re - 9.721029608442898).abs() < 1e-8);
    }

    #[test]
    fn eval_m_conjugate_symmetry() {
        let p = MelnikovParams::new(0.3, -0.8, 0.52).unwrap();
        let h = Complex64::new(-1.2, 0.8);
        let a = eval_m(&EV, &p, h).unwrap();
        let b = eval_m(&EV, &p, h.conj()).unwrap();
        assert_eq!(a.conj(), b);
    }

    #[test]
    fn eval_f_dual_route_agreement() {
        let p = MelnikovParams::new(1.0, 1.0, 1.0).unwrap();
        // the built-in identity check errors on disagreement > 1e-10
        let f = eval_f(&EV, &p, Complex64::new(2.0, 3.0)).unwrap();
        assert!(f.norm() > 0.0);
    }

    #[test]
    fn i0_has_no_zeros() {
        let z = count(1.0, 0.0, 0.0);
        assert_eq!(z.count, 0);
        assert_eq!(z.status, CountStatus::Stable);
    }

    #[test]
    fn first_melnikov_counts_on_the_three_arcs() {
        // r = -l0/l2 in (-inf, 1/5): 0 zeros; (1/5, 4/5): 2; (4/5, inf): 1
        let z = count(1.0, 1.0, 0.0); // r = -1
        assert_eq!((z.count, z.status), (0, CountStatus::Stable));
        let z = count(-0.5, 1.0, 0.0); // r = 1/2
        assert_eq!((z.count, z.status), (2, CountStatus::Stable));
        let z = count(-2.0, 1.0, 0.0); // r = 2
        assert_eq!((z.count, z.status), (1, CountStatus::Stable));
    }

    #[test]
    fn delta_interior_point_has_one_zero() {
        // on 5(l0+l4)+l2 = 0 with the root h* = 1/4 inside D
        let z = count(1.0, 5.0, -2.0);
        assert_eq!((z.count, z.status), (1, CountStatus::Stable));
    }

    #[test]
    fn quarter_locus_is_near_boundary() {
        // M1 with I0 - 5 I2 vanishes at the boundary point -1/4
        let z = count(1.0, -5.0, 0.0);
        assert_eq!(z.status, CountStatus::NearBoundary);
    }

    #[test]
    fn far_zero_is_tracked_by_adaptive_radius() {
        // small |l2|: the single real zero sits far outside the default disc
        let p = MelnikovParams::new(1.0, -0.05, -0.2).unwrap();
        let (r, capped) = zero_free_radius(&p, 50.0);
        assert!(!capped && r > 50.0);
        let z = count_zeros(&EV, &CACHE, &p, &KeyholeContour::default()).unwrap();
        assert_eq!((z.count, z.status), (1, CountStatus::Stable));
        let n = real_axis_zero_count(&EV, &p, 1e-3, r, 200).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn petrov_bound_cases() {
        let c = &KeyholeContour::default();
        // pure I0: sharper analysis path gives 0
        let p = MelnikovParams::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(petrov_bound(&EV, &CACHE, &p, c.radius, c.delta).unwrap(), 0);
        // generic first Melnikov function: 2
        let p = MelnikovParams::new(1.0, 1.0, 0.0).unwrap();
        assert_eq!(petrov_bound(&EV, &CACHE, &p, c.radius, c.delta).unwrap(), 2);
        let p = MelnikovParams::new(-0.5, 1.0, 0.0).unwrap();
        assert_eq!(petrov_bound(&EV, &CACHE, &p, c.radius, c.delta).unwrap(), 2);
        // generic full family: 4
        let p = MelnikovParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(petrov_bound(&EV, &CACHE, &p, c.radius, c.delta).unwrap(), 4);
    }

    #[test]
    fn petrov_dominates_measured_counts() {
        let c = KeyholeContour::default();
        for lam in [
            [1.0, 1.0, 0.0],
            [-0.5, 1.0, 0.0],
            [-2.0, 1.0, 0.0],
            [1.0, 5.0, -2.0],
            [1.0, -9.0, 1.0],
            [1.0, -11.0, 1.0],
            [0.3, -0.8, 0.52],
        ] {
            let p = MelnikovParams::new(lam[0], lam[1], lam[2]).unwrap();
            let z = count_zeros(&EV, &CACHE, &p, &c).unwrap();
            let (r, _) = zero_free_radius(&p, c.radius);
            let b = petrov_bound(&EV, &CACHE, &p, r, c.delta).unwrap();
            assert!(b <= 4);
            if z.status == CountStatus::Stable {
                assert!(z.count <= b, "count {} > bound {b} for {lam:?}", z.count);
            }
        }
    }

    #[test]
    fn circle_argument_of_f_near_three_pi() {
        // |F| ~ |h|^{3/2} for generic l2 != 0, l4 != 0, so the argument
        // increase along the big circle tends to 3 pi; the finite-radius
        // correction decays like R^{-1/2} and needs R ~ 3e3 for +-0.2 rad
        let p = MelnikovParams::new(1.0, 1.0, 1.0).unwrap();
        let table = CACHE.table(&EV, 3200.0, 1e-3).unwrap();
        let mut total = 0.0;
        let mut prev: Option<Complex64> = None;
        for &(_, h, i0, i2) in &table.base[3] {
            let f = (4.0 * h + 1.0) * m_of(&p, h, i0, i2) / i0;
            if let Some(pv) = prev {
                total += (f / pv).arg();
            }
            prev = Some(f);
        }
        assert!((total - 3.0 * std::f64::consts::PI).abs() < 0.2, "variation {total}");
    }

    #[test]
    fn conjugate_pairing_parity() {
        // count parity equals the parity of real-axis zeros for stable counts
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240209);
        let c = KeyholeContour::default();
        let mut checked = 0;
        while checked < 12 {
            let l: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let Ok(p) = MelnikovParams::new(l[0], l[1], l[2]) else { continue };
            let z = count_zeros(&EV, &CACHE, &p, &c).unwrap();
            if z.status != CountStatus::Stable {
                continue;
            }
            let (r, capped) = zero_free_radius(&p, c.radius);
            if capped {
                continue;
            }
            let n = real_axis_zero_count(&EV, &p, c.delta, r, 300).unwrap();
            assert_eq!(z.count % 2, n % 2, "params {l:?}: count {} real {n}", z.count);
            checked += 1;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn normalization_scale_invariance(
            l0 in -3.0f64..3.0, l2 in -3.0f64..3.0, l4 in -3.0f64..3.0,
            scale in prop::sample::select(vec![-4.0f64, -0.3, 0.7, 5.0])
        ) {
            prop_assume!(l0.abs() + l2.abs() + l4.abs() > 1e-3);
            let a = MelnikovParams::new(l0, l2, l4).unwrap();
            let b = MelnikovParams::new(scale * l0, scale * l2, scale * l4).unwrap();
            prop_assert!((a.lambda0 - b.lambda0).abs() < 1e-12);
            prop_assert!((a.lambda2 - b.lambda2).abs() < 1e-12);
            prop_assert!((a.lambda4 - b.lambda4).abs() < 1e-12);
        }
    }
}
