//! Cylindrical and cartesian points, canonical phase-space states and the
//! transformation rules between the two coordinate systems.
//!
//! Conventions: `x = r cos(phi)`, `y = r sin(phi)`, `z = Z`. Momenta are the
//! canonical ones, related through the canonical one-form
//! `p_x dx + p_y dy + p_z dz = p_r dr + p_phi dphi + p_z dZ`. Magnetic field
//! triples in cylindrical coordinates are the components of the two-form
//! `B = B^r dphi^dZ + B^phi dZ^dr + B^Z dr^dphi`, not orthonormal-frame
//! components. Particle mass is 1 and charge is -1 throughout the crate.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{domain, Error, Result};

/// Default lower bound on the radius accepted by every field evaluator.
pub const DEFAULT_R_MIN: f64 = 1e-6;

static R_MIN_BITS: AtomicU64 = AtomicU64::new(0);

/// Process-wide minimum radius used by evaluators that are not given one
/// explicitly. Systems capture this value when they are built.
pub fn r_min() -> f64 {
    match R_MIN_BITS.load(Ordering::Relaxed) {
        0 => DEFAULT_R_MIN,
        bits => f64::from_bits(bits),
    }
}

/// Overrides the process-wide minimum radius (must be positive and finite).
pub fn set_r_min(value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(domain(format!("r_min must be positive and finite, got {value}")));
    }
    R_MIN_BITS.store(value.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Point in cylindrical coordinates, `r > 0`, `phi` wrapped into `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    r: f64,
    phi: f64,
    z: f64,
}

impl CylPoint {
    pub fn new(r: f64, phi: f64, z: f64) -> Result<Self> {
        if !(r.is_finite() && phi.is_finite() && z.is_finite()) {
            return Err(domain(format!("non-finite point ({r}, {phi}, {z})")));
        }
        if r <= 0.0 {
            return Err(domain(format!("radius must be positive, got {r}")));
        }
        Ok(Self {
            r,
            phi: wrap_angle(phi),
            z,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Fails with a domain error when the point is closer to the axis than `r_min`.
    pub fn require_r_min(&self, r_min: f64) -> Result<()> {
        if self.r < r_min {
            Err(domain(format!("r = {} is below r_min = {}", self.r, r_min)))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Canonical phase-space point in cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPhase {
    pub point: CylPoint,
    pub p_r: f64,
    pub p_phi: f64,
    pub p_z: f64,
}

impl CylPhase {
    pub fn new(r: f64, phi: f64, z: f64, p_r: f64, p_phi: f64, p_z: f64) -> Result<Self> {
        if !(p_r.is_finite() && p_phi.is_finite() && p_z.is_finite()) {
            return Err(domain("non-finite momentum"));
        }
        Ok(Self {
            point: CylPoint::new(r, phi, z)?,
            p_r,
            p_phi,
            p_z,
        })
    }

    /// Builds a phase point from `[r, phi, Z, p_r, p_phi, p_Z]`.
    pub fn from_array(y: [f64; 6]) -> Result<Self> {
        Self::new(y[0], y[1], y[2], y[3], y[4], y[5])
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.point.r,
            self.point.phi,
            self.point.z,
            self.p_r,
            self.p_phi,
            self.p_z,
        ]
    }

    pub fn momenta(&self) -> [f64; 3] {
        [self.p_r, self.p_phi, self.p_z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartPhase {
    pub point: CartPoint,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

/// Two-form components `(B^r, B^phi, B^Z)` of the magnetic field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldTriple {
    pub b_r: f64,
    pub b_phi: f64,
    pub b_z: f64,
}

impl FieldTriple {
    pub fn new(b_r: f64, b_phi: f64, b_z: f64) -> Self {
        Self { b_r, b_phi, b_z }
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.b_r, self.b_phi, self.b_z]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartField {
    pub b_x: f64,
    pub b_y: f64,
    pub b_z: f64,
}

pub fn cyl_to_cart_point(p: &CylPoint) -> CartPoint {
    let (s, c) = p.phi.sin_cos();
    CartPoint {
        x: p.r * c,
        y: p.r * s,
        z: p.z,
    }
}

pub fn cart_to_cyl_point(p: &CartPoint) -> Result<CylPoint> {
    let rho2 = p.x * p.x + p.y * p.y;
    if rho2 == 0.0 {
        return Err(Error::Axis);
    }
    CylPoint::new(p.x.hypot(p.y), p.y.atan2(p.x), p.z)
}

pub fn cyl_to_cart_momenta(ph: &CylPhase) -> CartPhase {
    let r = ph.point.r;
    let (s, c) = ph.point.phi.sin_cos();
    CartPhase {
        point: cyl_to_cart_point(&ph.point),
        p_x: c * ph.p_r - s / r * ph.p_phi,
        p_y: s * ph.p_r + c / r * ph.p_phi,
        p_z: ph.p_z,
    }
}

pub fn cart_to_cyl_momenta(ph: &CartPhase) -> Result<CylPhase> {
    let point = cart_to_cyl_point(&ph.point)?;
    let (s, c) = point.phi.sin_cos();
    Ok(CylPhase {
        point,
        p_r: c * ph.p_x + s * ph.p_y,
        p_phi: point.r * (c * ph.p_y - s * ph.p_x),
        p_z: ph.p_z,
    })
}

pub fn field_cyl_to_cart(f: &FieldTriple, at: &CylPoint) -> CartField {
    let (s, c) = at.phi.sin_cos();
    let r = at.r;
    CartField {
        b_x: c / r * f.b_r - s * f.b_phi,
        b_y: s / r * f.b_r + c * f.b_phi,
        b_z: f.b_z / r,
    }
}

pub fn field_cart_to_cyl(f: &CartField, at: &CylPoint) -> FieldTriple {
    let (s, c) = at.phi.sin_cos();
    FieldTriple {
        b_r: at.r * (c * f.b_x + s * f.b_y),
        b_phi: c * f.b_y - s * f.b_x,
        b_z: at.r * f.b_z,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn point_examples() {
        let c = cyl_to_cart_point(&CylPoint::new(1.0, 0.0, 0.0).unwrap());
        assert_eq!((c.x, c.y, c.z), (1.0, 0.0, 0.0));
        let c = cyl_to_cart_point(&CylPoint::new(2.0, FRAC_PI_2, 3.0).unwrap());
        assert!(close(c.x, 0.0, 1e-15) && close(c.y, 2.0, 1e-15) && c.z == 3.0);
        let c = cyl_to_cart_point(&CylPoint::new(1.0, FRAC_PI_4, 0.0).unwrap());
        assert!(close(c.x, 0.7071068, 1e-7) && close(c.y, 0.7071068, 1e-7));
    }

    #[test]
    fn inverse_point_examples() {
        let p = cart_to_cyl_point(&CartPoint { x: 1.0, y: 0.0, z: 0.0 }).unwrap();
        assert_eq!((p.r(), p.phi(), p.z()), (1.0, 0.0, 0.0));
        let p = cart_to_cyl_point(&CartPoint { x: 0.0, y: 2.0, z: 3.0 }).unwrap();
        assert!(close(p.r(), 2.0, 1e-15) && close(p.phi(), FRAC_PI_2, 1e-15));
        assert_eq!(
            cart_to_cyl_point(&CartPoint { x: 0.0, y: 0.0, z: 1.0 }),
            Err(Error::Axis)
        );
    }

    #[test]
    fn momentum_examples() {
        let m = cyl_to_cart_momenta(&CylPhase::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0).unwrap());
        assert_eq!((m.p_x, m.p_y), (1.0, 0.0));
        let m = cyl_to_cart_momenta(&CylPhase::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap());
        assert_eq!((m.p_x, m.p_y), (0.0, 1.0));
        let m = cyl_to_cart_momenta(&CylPhase::new(2.0, FRAC_PI_2, 0.0, 3.0, 4.0, 5.0).unwrap());
        assert!(close(m.p_x, -2.0, 1e-15) && close(m.p_y, 3.0, 1e-15) && m.p_z == 5.0);
    }

    #[test]
    fn field_examples() {
        let at = CylPoint::new(1.7, 0.3, -0.4).unwrap();
        let mu0 = 2.5;
        let b = field_cyl_to_cart(&FieldTriple::new(0.0, 0.0, mu0 * at.r()), &at);
        assert_eq!((b.b_x, b.b_y), (0.0, 0.0));
        assert!(close(b.b_z, mu0, 1e-15));
        let b = field_cyl_to_cart(&FieldTriple::default(), &at);
        assert_eq!(b, CartField::default());
        let at = CylPoint::new(1.0, 0.0, 0.0).unwrap();
        let b = field_cyl_to_cart(&FieldTriple::new(0.0, 1.0, 0.0), &at);
        assert_eq!((b.b_x, b.b_y, b.b_z), (0.0, 1.0, 0.0));
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(CylPoint::new(1.0, -1e-300, 0.0).unwrap().phi(), 0.0);
        assert!(close(CylPoint::new(1.0, 3.0 * PI, 0.0).unwrap().phi(), PI, 1e-15));
        assert!(CylPoint::new(0.0, 0.0, 0.0).is_err());
        assert!(CylPoint::new(1.0, 0.0, 0.0).unwrap().require_r_min(2.0).is_err());
    }
}
