//! Jacobi elliptic functions and the complete elliptic integral of the first
//! kind for real arguments.
//!
//! `K(k)` is evaluated through the arithmetic-geometric mean,
//! `K = pi / (2 agm(1, sqrt(1 - k^2)))`. The Jacobi triple uses the descending
//! Landen transformation driven by the same AGM sequence. The endpoints
//! `k = 0` and `k = 1` reduce to `(sin, cos, 1)` and `(tanh, sech, sech)`.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

const AGM_MAX_ITER: usize = 64;

/// Elliptic modulus `k` with `0 <= k <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&k) {
            Ok(Self(k))
        } else {
            Err(domain(format!("elliptic modulus must lie in [0, 1], got {k}")))
        }
    }

    /// Builds the modulus from the parameter `m = k^2`.
    pub fn from_parameter(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(domain(format!("elliptic parameter must lie in [0, 1], got {m}")));
        }
        Ok(Self(m.sqrt()))
    }

    pub fn k(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k^2)`, computed without cancellation.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

/// Arithmetic-geometric mean of two positive numbers.
pub fn agm(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(domain(format!("agm needs positive finite arguments, got ({a}, {b})")));
    }
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(0.5 * (a + b))
}

/// Complete elliptic integral of the first kind `K(k)`; diverges at `k = 1`.
pub fn ellip_k(k: EllipticModulus) -> Result<f64> {
    if k.k() >= 1.0 {
        return Err(domain("K(k) diverges at k = 1"));
    }
    Ok(FRAC_PI_2 / agm(1.0, k.complementary())?)
}

/// Values of the three basic Jacobi elliptic functions at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

pub fn jacobi_sn_cn_dn(u: f64, k: EllipticModulus) -> JacobiTriple {
    let k = k.k();
    if k == 0.0 {
        let (sn, cn) = u.sin_cos();
        return JacobiTriple { sn, cn, dn: 1.0 };
    }
    if k == 1.0 {
        let sech = 1.0 / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    let kc = ((1.0 - k) * (1.0 + k)).sqrt();
    // reduce modulo the real period 4K so the Landen phase stays moderate
    let period = 4.0 * FRAC_PI_2 / agm(1.0, kc).expect("kc > 0 for k < 1");
    let u = u - period * (u / period).round();

    let mut a = vec![1.0_f64];
    let mut c = vec![k];
    let mut b = kc;
    while c.last().unwrap().abs() > f64::EPSILON * a.last().unwrap() && a.len() < AGM_MAX_ITER {
        let an = *a.last().unwrap();
        a.push(0.5 * (an + b));
        c.push(0.5 * (an - b));
        b = (an * b).sqrt();
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    let mut prev = phi;
    for i in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 { 1.0 } else { cn / (prev - phi).cos() };
    JacobiTriple { sn, cn, dn }
}
