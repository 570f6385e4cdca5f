//! Smooth compactly supported profiles built from exp(−1/x) transitions.

use crate::quad;
use std::sync::OnceLock;

#[inline]
fn expo(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1.
#[inline]
pub fn smoothstep(x: f64) -> f64 {
    let a = expo(x);
    let b = expo(1.0 - x);
    if a + b == 0.0 {
        return if x >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

#[inline]
fn raw_bump(x: f64) -> f64 {
    let r = 1.0 - x * x;
    if r <= 0.0 {
        0.0
    } else {
        (-1.0 / r).exp()
    }
}

fn bump_mass() -> f64 {
    static M: OnceLock<f64> = OnceLock::new();
    *M.get_or_init(|| quad::composite_gl(raw_bump, -1.0, 1.0, 64, 32))
}

/// Even, nonnegative, unit-mass profile supported in [−1, 1].
#[inline]
pub fn std_bump(x: f64) -> f64 {
    raw_bump(x) / bump_mass()
}

const CDF_N: usize = 4096;

fn cdf_table() -> &'static Vec<f64> {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let h = 2.0 / CDF_N as f64;
        let mut out = Vec::with_capacity(CDF_N + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..CDF_N {
            let a = -1.0 + h * i as f64;
            acc += quad::composite_gl(std_bump, a, a + h, 1, 16);
            out.push(acc);
        }
        let total = acc;
        out.iter_mut().for_each(|v| *v /= total);
        out
    })
}

/// ∫_{−1}^{x} std_bump, by table lookup with cubic Hermite interpolation.
pub fn std_bump_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let t = cdf_table();
    let h = 2.0 / CDF_N as f64;
    let u = (x + 1.0) / h;
    let i = (u.floor() as usize).min(CDF_N - 1);
    let s = u - i as f64;
    let x0 = -1.0 + h * i as f64;
    let (f0, f1) = (t[i], t[i + 1]);
    let (d0, d1) = (std_bump(x0) * h, std_bump(x0 + h) * h);
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * f0 + (s3 - 2.0 * s2 + s) * d0 + (-2.0 * s3 + 3.0 * s2) * f1 + (s3 - s2) * d1
}

/// Even plateau: 1 on [−inner, inner], 0 outside [−outer, outer], smooth in between.
#[inline]
pub fn plateau(x: f64, inner: f64, outer: f64) -> f64 {
    let a = x.abs();
    if a <= inner {
        1.0
    } else if a >= outer {
        0.0
    } else {
        1.0 - smoothstep((a - inner) / (outer - inner))
    }
}

/// The cut-off φ with 1_{B(0,1/2)} ≤ φ ≤ 1_{B(0,1)}.
#[inline]
pub fn cutoff(x: f64) -> f64 {
    plateau(x, 0.5, 1.0)
}

fn eta_raw(t: f64) -> f64 {
    // bump on [1/4, 1]
    raw_bump((t - 0.625) / 0.375)
}

fn eta_norm() -> f64 {
    static N: OnceLock<f64> = OnceLock::new();
    *N.get_or_init(|| quad::composite_gl(|t| eta_raw(t) / t, 0.25, 1.0, 64, 32))
}

/// η with spt η ⊂ [1/4, 1] and ∫ η(t) dt/t = 1.
#[inline]
pub fn eta(t: f64) -> f64 {
    eta_raw(t) / eta_norm()
}
