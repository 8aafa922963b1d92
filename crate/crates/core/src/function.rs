//! Smooth scalar functions of one variable with exact derivatives.
//!
//! Every auxiliary function and potential slot is a [`Function1D`]. The
//! closed grammar (zero, const, poly, power, trig, exp2) covers parameter
//! files; profiles produced by special functions or ODE solutions plug in
//! through [`Profile`]. Derivatives come from Taylor jets, never from finite
//! differences.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, validation, Result};
use crate::jet::{Dual, Jet};

/// Highest derivative order a [`Function1D`] guarantees.
pub const MAX_ORDER: usize = 3;

/// Source of Taylor jets for a one-variable function.
pub trait Profile: Send + Sync {
    fn jet(&self, x: f64) -> Result<Jet>;
    fn describe(&self) -> String;
}

/// The closed grammar of parameter-file function kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    Zero,
    Const(f64),
    /// `c0 + c1 x + ... + c4 x^4`
    Poly([f64; 5]),
    /// `a x^n`
    Power {
        a: f64,
        n: f64,
    },
    /// `a sin(k x) + b cos(k x)`
    Trig {
        a: f64,
        b: f64,
        k: f64,
    },
    /// `a e^{k x} + b e^{-k x}`
    Exp2 {
        a: f64,
        b: f64,
        k: f64,
    },
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Zero => "zero",
            Kind::Const(_) => "const",
            Kind::Poly(_) => "poly",
            Kind::Power { .. } => "power",
            Kind::Trig { .. } => "trig",
            Kind::Exp2 { .. } => "exp2",
        }
    }

    fn jet(&self, x: f64) -> Result<Jet> {
        let t = Jet::variable(x);
        Ok(match *self {
            Kind::Zero => Jet::constant(0.0),
            Kind::Const(c) => Jet::constant(c),
            Kind::Poly(c) => {
                // Horner in jet arithmetic
                let mut acc = Jet::constant(c[4]);
                for &ck in c[..4].iter().rev() {
                    acc = acc * t + ck;
                }
                acc
            }
            Kind::Power { a, n } => {
                if n.fract() != 0.0 && x <= 0.0 {
                    return Err(domain(format!("x^{n} needs x > 0, got {x}")));
                }
                if n < 0.0 && x == 0.0 {
                    return Err(domain("negative power at the origin"));
                }
                if n.fract() == 0.0 && n < 0.0 {
                    t.recip().powi((-n) as u32) * a
                } else {
                    t.powf(n) * a
                }
            }
            Kind::Trig { a, b, k } => {
                let (s, c) = (t * k).sin_cos();
                s * a + c * b
            }
            Kind::Exp2 { a, b, k } => (t * k).exp() * a + (t * (-k)).exp() * b,
        })
    }

    fn is_zero(&self) -> bool {
        match *self {
            Kind::Zero => true,
            Kind::Const(c) => c == 0.0,
            Kind::Poly(c) => c.iter().all(|&x| x == 0.0),
            Kind::Power { a, .. } => a == 0.0,
            Kind::Trig { a, b, .. } => a == 0.0 && b == 0.0,
            Kind::Exp2 { a, b, .. } => a == 0.0 && b == 0.0,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Zero => write!(f, "0"),
            Kind::Const(c) => write!(f, "{c}"),
            Kind::Poly(c) => write!(f, "{} + {} x + {} x^2 + {} x^3 + {} x^4", c[0], c[1], c[2], c[3], c[4]),
            Kind::Power { a, n } => write!(f, "{a} x^{n}"),
            Kind::Trig { a, b, k } => write!(f, "{a} sin({k} x) + {b} cos({k} x)"),
            Kind::Exp2 { a, b, k } => write!(f, "{a} e^({k} x) + {b} e^(-{k} x)"),
        }
    }
}

#[derive(Clone)]
enum Repr {
    Kind(Kind),
    Custom(Arc<dyn Profile>),
}

/// A smooth function of one real variable with analytic derivatives.
#[derive(Clone)]
pub struct Function1D {
    repr: Repr,
    /// Number of times the underlying function has been differentiated.
    shift: usize,
}

impl fmt::Debug for Function1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Function1D({})", self.describe())
    }
}

impl Function1D {
    pub fn from_kind(kind: Kind) -> Self {
        Self {
            repr: Repr::Kind(kind),
            shift: 0,
        }
    }

    pub fn zero() -> Self {
        Self::from_kind(Kind::Zero)
    }

    pub fn constant(c: f64) -> Self {
        Self::from_kind(Kind::Const(c))
    }

    pub fn poly(c: &[f64]) -> Self {
        let mut cs = [0.0; 5];
        for (dst, src) in cs.iter_mut().zip(c) {
            *dst = *src;
        }
        Self::from_kind(Kind::Poly(cs))
    }

    pub fn power(a: f64, n: f64) -> Self {
        Self::from_kind(Kind::Power { a, n })
    }

    pub fn trig(a: f64, b: f64, k: f64) -> Self {
        Self::from_kind(Kind::Trig { a, b, k })
    }

    pub fn exp2(a: f64, b: f64, k: f64) -> Self {
        Self::from_kind(Kind::Exp2 { a, b, k })
    }

    pub fn from_profile(p: Arc<dyn Profile>) -> Self {
        Self {
            repr: Repr::Custom(p),
            shift: 0,
        }
    }

    /// Wraps a jet-valued closure, e.g. a composite of other functions.
    pub fn from_jet_fn<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> Result<Jet> + Send + Sync + 'static,
    {
        Self::from_profile(Arc::new(JetFn {
            name: name.into(),
            f: Box::new(f),
        }))
    }

    /// The derivative as a function in its own right.
    pub fn derivative(&self) -> Self {
        Self {
            repr: self.repr.clone(),
            shift: self.shift + 1,
        }
    }

    /// The grammar kind when this function came from a parameter file.
    pub fn kind(&self) -> Option<&Kind> {
        match (&self.repr, self.shift) {
            (Repr::Kind(k), 0) => Some(k),
            _ => None,
        }
    }

    /// True for grammar functions that vanish identically.
    pub fn is_identically_zero(&self) -> bool {
        match &self.repr {
            Repr::Kind(k) => {
                k.is_zero()
                    || (self.shift >= 1 && matches!(k, Kind::Const(_)))
                    || (self.shift >= 5 && matches!(k, Kind::Poly(_)))
            }
            Repr::Custom(_) => false,
        }
    }

    pub fn describe(&self) -> String {
        let base = match &self.repr {
            Repr::Kind(k) => k.to_string(),
            Repr::Custom(p) => p.describe(),
        };
        if self.shift == 0 {
            base
        } else {
            format!("d^{}/dx^{} [{}]", self.shift, self.shift, base)
        }
    }

    /// Taylor jet at `x`; the usable order drops by one per differentiation.
    pub fn jet(&self, x: f64) -> Result<Jet> {
        if !x.is_finite() {
            return Err(domain(format!("non-finite argument {x}")));
        }
        let mut j = match &self.repr {
            Repr::Kind(k) => k.jet(x)?,
            Repr::Custom(p) => p.jet(x)?,
        };
        for _ in 0..self.shift {
            j = j.derivative();
        }
        Ok(j)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.value())
    }

    /// Derivative of order `n` at `x`.
    pub fn deriv(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.jet(x)?.deriv(n))
    }

    /// Value and the first three derivatives.
    pub fn derivs(&self, x: f64) -> Result<[f64; 4]> {
        let j = self.jet(x)?;
        Ok([j.deriv(0), j.deriv(1), j.deriv(2), j.deriv(3)])
    }

    /// `f^(n)` applied to a dual number, propagating the gradient with `f^(n+1)`.
    pub fn apply(&self, n: usize, x: Dual) -> Result<Dual> {
        let j = self.jet(x.v)?;
        Ok(x.chain(j.deriv(n), j.deriv(n + 1)))
    }

    /// Checks `|f^(n)(x) - f^(n)(x + 2 pi)| <= tol` for `n = 0..=3` on `samples` points.
    pub fn check_periodic(&self, name: &str, samples: usize, tol: f64) -> Result<()> {
        for i in 0..samples {
            let x = TAU * i as f64 / samples as f64;
            let a = self.derivs(x)?;
            let b = self.derivs(x + TAU)?;
            for n in 0..=MAX_ORDER {
                let diff = (a[n] - b[n]).abs();
                if !(diff <= tol * (1.0 + a[n].abs())) {
                    return Err(validation(format!(
                        "{name} must be 2pi-periodic: derivative {n} differs by {diff:.3e} at {x}"
                    )));
                }
            }
        }
        Ok(())
    }
}

struct JetFn {
    name: String,
    f: Box<dyn Fn(f64) -> Result<Jet> + Send + Sync>,
}

impl Profile for JetFn {
    fn jet(&self, x: f64) -> Result<Jet> {
        (self.f)(x)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central(f: &Function1D, x: f64) -> f64 {
        let h = 1e-4 * x.abs().max(1.0);
        let e = |t| f.eval(t).unwrap();
        (-e(x + 2.0 * h) + 8.0 * e(x + h) - 8.0 * e(x - h) + e(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn grammar_first_derivative_matches_differences() {
        let fs = [
            Function1D::poly(&[1.0, -2.0, 0.5, 0.25, -0.1]),
            Function1D::power(0.7, -2.0),
            Function1D::power(1.5, 0.5),
            Function1D::trig(0.3, -1.1, 2.0),
            Function1D::exp2(0.4, 0.2, 1.3),
        ];
        for f in &fs {
            for &x in &[0.5, 1.0, 1.7, 3.2] {
                let d1 = f.deriv(1, x).unwrap();
                assert!((d1 - central(f, x)).abs() <= 1e-6 * d1.abs().max(1.0), "{f:?} at {x}");
            }
        }
    }

    #[test]
    fn higher_derivatives_of_power() {
        let f = Function1D::power(2.0, 3.0);
        assert_eq!(f.derivs(2.0).unwrap(), [16.0, 24.0, 24.0, 12.0]);
        let g = f.derivative();
        assert_eq!(g.derivs(2.0).unwrap()[..3], [24.0, 24.0, 12.0]);
    }

    #[test]
    fn negative_integer_power_rejects_origin() {
        assert!(Function1D::power(1.0, -3.0).eval(0.0).is_err());
        assert!(Function1D::power(1.0, 0.5).eval(-1.0).is_err());
        assert_eq!(Function1D::power(1.0, 2.0).eval(-3.0).unwrap(), 9.0);
    }

    #[test]
    fn periodicity_gate() {
        assert!(Function1D::trig(1.0, 0.5, 3.0).check_periodic("tau", 16, 1e-10).is_ok());
        assert!(Function1D::trig(1.0, 0.5, 1.5)
            .check_periodic("tau", 16, 1e-10)
            .is_err());
        assert!(Function1D::poly(&[0.0, 1.0]).check_periodic("psi", 16, 1e-10).is_err());
    }

    #[test]
    fn apply_propagates_gradient() {
        let f = Function1D::trig(1.0, 0.0, 1.0);
        let x = Dual::coordinate(0.3, 1);
        let y = f.apply(1, x).unwrap();
        assert!((y.v - 0.3f64.cos()).abs() < 1e-15);
        assert!((y.d[1] + 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn zero_detection() {
        assert!(Function1D::zero().is_identically_zero());
        assert!(Function1D::constant(3.0).derivative().is_identically_zero());
        assert!(!Function1D::constant(3.0).is_identically_zero());
        assert!(!Function1D::trig(0.0, 1.0, 1.0).is_identically_zero());
    }
}
