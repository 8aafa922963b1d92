//! Fourth-order central finite differences and residual normalization shared
//! by the verification code.

use crate::error::Result;

/// Below this magnitude the largest summand of an equation is treated as
/// rounding noise rather than a scale.
pub const NORMALIZATION_FLOOR: f64 = 1e-10;

/// Step `h0 * max(1, |x|)`.
pub fn scaled_step(h0: f64, x: f64) -> f64 {
    h0 * x.abs().max(1.0)
}

/// `(8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / (12 h)`, exactly zero
/// when `f` takes equal values on the stencil.
pub fn central4<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let fp2 = f(x + 2.0 * h)?;
    let fp1 = f(x + h)?;
    let fm1 = f(x - h)?;
    let fm2 = f(x - 2.0 * h)?;
    Ok(stencil4(fp2, fp1, fm1, fm2, h))
}

pub fn stencil4(fp2: f64, fp1: f64, fm1: f64, fm2: f64, h: f64) -> f64 {
    (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h)
}

/// Partial derivative of `f` along `axis` of a point in `R^n`.
pub fn partial<const N: usize, F>(f: &F, x: [f64; N], axis: usize, h: f64) -> Result<f64>
where
    F: Fn([f64; N]) -> Result<f64>,
{
    central4(
        |t| {
            let mut y = x;
            y[axis] = t;
            f(y)
        },
        x[axis],
        h,
    )
}

/// Mixed second partial as the tensor product of two fourth-order stencils.
pub fn mixed<const N: usize, F>(f: &F, x: [f64; N], a: usize, b: usize, ha: f64, hb: f64) -> Result<f64>
where
    F: Fn([f64; N]) -> Result<f64>,
{
    central4(
        |s| {
            let mut y = x;
            y[a] = s;
            partial(f, y, b, hb)
        },
        x[a],
        ha,
    )
}

/// Residual of an equation written as a sum of terms that should vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub raw: f64,
    pub scale: f64,
}

impl Residual {
    pub fn from_terms(terms: &[f64]) -> Self {
        let raw: f64 = terms.iter().sum();
        let scale = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
        Self { raw, scale }
    }

    /// `|raw| / max(scale, floor)`; exactly zero when every term vanishes.
    pub fn normalized(&self) -> f64 {
        self.normalized_with_floor(NORMALIZATION_FLOOR)
    }

    pub fn normalized_with_floor(&self, floor: f64) -> f64 {
        if self.raw == 0.0 {
            return 0.0;
        }
        if !self.raw.is_finite() || !self.scale.is_finite() {
            return f64::INFINITY;
        }
        self.raw.abs() / self.scale.max(floor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_convergence() {
        let f = |x: f64| Ok(x.sin() * x.exp());
        let exact = 1.0f64.exp() * (1.0f64.sin() + 1.0f64.cos());
        let e1 = (central4(f, 1.0, 0.02).unwrap() - exact).abs();
        let e2 = (central4(f, 1.0, 0.01).unwrap() - exact).abs();
        let ratio = e1 / e2;
        assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn mixed_partial_of_product() {
        let f = |x: [f64; 2]| Ok(x[0].powi(3) * x[1].sin());
        let v = mixed(&f, [1.2, 0.4], 0, 1, 1e-3, 1e-3).unwrap();
        let exact = 3.0 * 1.44 * 0.4f64.cos();
        assert!((v - exact).abs() < 1e-8);
    }

    #[test]
    fn residual_normalization() {
        let r = Residual::from_terms(&[1.0, -1.0 + 1e-9]);
        assert!((r.normalized() - 1e-9).abs() < 1e-15);
        assert_eq!(Residual::from_terms(&[0.0, 0.0]).normalized(), 0.0);
        assert_eq!(Residual::from_terms(&[2.0, -2.0]).normalized(), 0.0);
    }
}
