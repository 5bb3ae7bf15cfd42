//! Direct quadrature of the Abelian integrals over the real cycles of
//! H = y^2/2 - x^2/2 + x^4/4.
//!
//! On the level curve H = h we have y^2 = Q(x) with
//! Q(x) = 2h + x^2 - x^4/2 = (x^2 - e1)(e2 - x^2)/2,  e1 = 1 - s, e2 = 1 + s,
//! s = sqrt(1 + 4h).  All cycle integrals reduce to real integrals between
//! roots of Q; the factored form keeps the integrands accurate next to the
//! turning points.
//!
//! Orientation is fixed so that the exterior loop integral of y dx is the
//! enclosed area (positive for h > 0) and the vanishing-cycle integrals
//! satisfy gamma = delta_0 + delta_1 + delta_{-1} with positive lobe areas.

use crate::error::{Error, Result};
use crate::quad::tanh_sinh;
use num_complex::Complex64;

/// Saddle-loop energy: the double root of the quartic appears here.
pub const H_SADDLE: f64 = -0.25;

/// Exponent i of the integrand x^i y dx; odd powers vanish by symmetry and
/// are not represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    X0,
    X2,
    X4,
}

impl Exponent {
    pub fn power(self) -> i32 {
        match self {
            Exponent::X0 => 0,
            Exponent::X2 => 2,
            Exponent::X4 => 4,
        }
    }

    pub fn from_power(i: u32) -> Result<Self> {
        match i {
            0 => Ok(Exponent::X0),
            2 => Ok(Exponent::X2),
            4 => Ok(Exponent::X4),
            _ => Err(Error::InvalidInput(format!("exponent must be 0, 2 or 4, got {i}"))),
        }
    }
}

/// Which cycle an integral is taken over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cycle {
    /// Exterior oval surrounding all three equilibria (h > 0).
    Gamma,
    /// Vanishing cycle at the saddle (0,0); purely imaginary segment for
    /// -1/4 <= h < 0.
    Delta0,
    /// Right lobe, vanishing at the centre (1, 0).
    DeltaPlus1,
    /// Left lobe, vanishing at the centre (-1, 0).
    DeltaMinus1,
}

impl Cycle {
    pub fn name(self) -> &'static str {
        match self {
            Cycle::Gamma => "gamma",
            Cycle::Delta0 => "delta0",
            Cycle::DeltaPlus1 => "delta+1",
            Cycle::DeltaMinus1 => "delta-1",
        }
    }
}

/// Branch-cut side for boundary values; real quadrature of delta_0 returns
/// the upper-side convention, the lower side is its conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
    NotOnCut,
}

/// A cycle together with the side of the cut it is evaluated on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleSpec {
    pub cycle: Cycle,
    pub side: Side,
}

impl CycleSpec {
    pub fn new(cycle: Cycle, side: Side) -> Self {
        CycleSpec { cycle, side }
    }

    fn check_domain(&self, h: f64) -> Result<()> {
        let ok = match self.cycle {
            Cycle::Gamma => h > 0.0,
            Cycle::Delta0 | Cycle::DeltaPlus1 | Cycle::DeltaMinus1 => {
                (H_SADDLE..0.0).contains(&h)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::CycleUnavailable { cycle: self.cycle.name(), h })
        }
    }
}

/// The quartic Q(x) = 2h + x^2 - x^4/2 whose square root is y on H = h.
#[derive(Clone, Copy, Debug)]
pub struct Quartic {
    pub h: f64,
    /// e1 = 1 - sqrt(1+4h): square of the inner root pair (negative for h > 0).
    pub e1: f64,
    /// e2 = 1 + sqrt(1+4h): square of the outer root pair.
    pub e2: f64,
}

impl Quartic {
    pub fn new(h: f64) -> Result<Self> {
        if h < H_SADDLE {
            return Err(Error::NoRealOval { h });
        }
        let s = (1.0 + 4.0 * h).sqrt();
        Ok(Quartic { h, e1: 1.0 - s, e2: 1.0 + s })
    }

    /// Nonnegative real roots of Q, sorted ascending.  Double roots appear once.
    pub fn oval_roots(&self) -> Vec<f64> {
        let x2 = self.e2.sqrt();
        if self.h > 0.0 {
            vec![x2]
        } else if self.h == 0.0 {
            vec![0.0, x2]
        } else if self.e1 == self.e2 {
            vec![1.0]
        } else {
            vec![self.e1.sqrt(), x2]
        }
    }
}

/// Convenience wrapper over [`Quartic::oval_roots`].
pub fn oval_roots(h: f64) -> Result<Vec<f64>> {
    Ok(Quartic::new(h)?.oval_roots())
}

fn xi(x: f64, i: Exponent) -> f64 {
    match i {
        Exponent::X0 => 1.0,
        Exponent::X2 => x * x,
        Exponent::X4 => {
            let t = x * x;
            t * t
        }
    }
}

/// Integral of x^i y dx over the requested cycle at real energy h.
///
/// For gamma and the lobes the result is real; for delta_0 it is purely
/// imaginary with the sign convention of the upper side of the cut.
pub fn integrate_cycle(spec: CycleSpec, i: Exponent, h: f64, rtol: f64) -> Result<Complex64> {
    spec.check_domain(h)?;
    let q = Quartic::new(h)?;
    let val = match spec.cycle {
        Cycle::Gamma => {
            // 4 * int_0^{x2} x^i sqrt(Q) dx; Q = (x^2 + |e1|)(e2 - x^2)/2
            let x2 = q.e2.sqrt();
            let me1 = -q.e1; // >= 0 for h >= 0
            let r = tanh_sinh(
                |x, _, db| {
                    let f1 = x * x + me1;
                    let f2 = db * (x2 + x); // e2 - x^2 without cancellation
                    xi(x, i) * (0.5 * f1 * f2).sqrt()
                },
                0.0,
                x2,
                rtol,
                1e-300,
            )?;
            Complex64::new(4.0 * r.value, 0.0)
        }
        Cycle::DeltaPlus1 | Cycle::DeltaMinus1 => {
            // 2 * int over the lobe of x^i sqrt(Q) dx; the left lobe is
            // integrated literally over negative x.
            let (x1, x2) = (q.e1.sqrt(), q.e2.sqrt());
            if x2 - x1 <= 0.0 {
                return Ok(Complex64::new(0.0, 0.0)); // collapsed lobe at h = -1/4
            }
            let r = if spec.cycle == Cycle::DeltaPlus1 {
                tanh_sinh(
                    |x, da, db| {
                        let f1 = da * (x + x1); // x^2 - e1
                        let f2 = db * (x2 + x); // e2 - x^2
                        xi(x, i) * (0.5 * f1 * f2).sqrt()
                    },
                    x1,
                    x2,
                    rtol,
                    1e-300,
                )?
            } else {
                tanh_sinh(
                    |x, da, db| {
                        // x in [-x2, -x1]: x^2 - e1 = (x1 - x)... use distances:
                        // da = x + x2, db = -x1 - x
                        let f1 = db * (x1 - x); // x^2 - e1 = (-x - x1)(-x + x1)... see below
                        let f2 = da * (x2 - x); // e2 - x^2
                        xi(x, i) * (0.5 * f1 * f2).sqrt()
                    },
                    -x2,
                    -x1,
                    rtol,
                    1e-300,
                )?
            };
            Complex64::new(2.0 * r.value, 0.0)
        }
        Cycle::Delta0 => {
            // 2i * int_{-x1}^{x1} x^i sqrt(-Q) dx = 4i * int_0^{x1} (even);
            // -Q = (e1 - x^2)(e2 - x^2)/2 on |x| <= x1
            let x1 = q.e1.sqrt();
            if !(x1 > 0.0) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let r = tanh_sinh(
                |x, _, db| {
                    let f1 = db * (x1 + x); // e1 - x^2
                    let f2 = q.e2 - x * x;
                    xi(x, i) * (0.5 * f1 * f2).sqrt()
                },
                0.0,
                x1,
                rtol,
                1e-300,
            )?;
            let v = Complex64::new(0.0, 4.0 * r.value);
            if spec.side == Side::Lower {
                v.conj()
            } else {
                v
            }
        }
    };
    Ok(val)
}

/// Integral of x^i / y dx over the requested cycle: the h-derivative of
/// [`integrate_cycle`] (since dy/dh = 1/y and the boundary terms vanish at
/// the roots of Q).
pub fn integrate_cycle_derivative(
    spec: CycleSpec,
    i: Exponent,
    h: f64,
    rtol: f64,
) -> Result<Complex64> {
    spec.check_domain(h)?;
    let q = Quartic::new(h)?;
    let val = match spec.cycle {
        Cycle::Gamma => {
            let x2 = q.e2.sqrt();
            let me1 = -q.e1;
            let r = tanh_sinh(
                |x, _, db| {
                    let f1 = x * x + me1;
                    let f2 = db * (x2 + x);
                    xi(x, i) / (0.5 * f1 * f2).sqrt()
                },
                0.0,
                x2,
                rtol,
                1e-300,
            )?;
            Complex64::new(4.0 * r.value, 0.0)
        }
        Cycle::DeltaPlus1 | Cycle::DeltaMinus1 => {
            let (x1, x2) = (q.e1.sqrt(), q.e2.sqrt());
            if x2 - x1 <= 0.0 {
                return Err(Error::CycleUnavailable { cycle: spec.cycle.name(), h });
            }
            let r = if spec.cycle == Cycle::DeltaPlus1 {
                tanh_sinh(
                    |x, da, db| {
                        let f1 = da * (x + x1);
                        let f2 = db * (x2 + x);
                        xi(x, i) / (0.5 * f1 * f2).sqrt()
                    },
                    x1,
                    x2,
                    rtol,
                    1e-300,
                )?
            } else {
                tanh_sinh(
                    |x, da, db| {
                        let f1 = db * (x1 - x);
                        let f2 = da * (x2 - x);
                        xi(x, i) / (0.5 * f1 * f2).sqrt()
                    },
                    -x2,
                    -x1,
                    rtol,
                    1e-300,
                )?
            };
            Complex64::new(2.0 * r.value, 0.0)
        }
        Cycle::Delta0 => {
            // d/dh [2i int sqrt(-Q)] = -2i int x^i / sqrt(-Q) dx
            let x1 = q.e1.sqrt();
            if !(x1 > 0.0) {
                return Err(Error::CycleUnavailable { cycle: spec.cycle.name(), h });
            }
            let r = tanh_sinh(
                |x, _, db| {
                    let f1 = db * (x1 + x);
                    let f2 = q.e2 - x * x;
                    xi(x, i) / (0.5 * f1 * f2).sqrt()
                },
                0.0,
                x1,
                rtol,
                1e-300,
            )?;
            let v = Complex64::new(0.0, -4.0 * r.value);
            if spec.side == Side::Lower {
                v.conj()
            } else {
                v
            }
        }
    };
    Ok(val)
}
