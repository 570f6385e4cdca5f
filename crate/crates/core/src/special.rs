//! Auxiliary zero-mean kernels: the Littlewood–Paley family Ψ_s built from an odd
//! kernel κ, and the one-dimensional distribution ℘_ε with ℘̂ = |ξ|^ε near 0 and
//! |ξ|^{−ε} near infinity.

use crate::bump;
use crate::error::{Error, Result};
use crate::kernel1d::{Kappa, QFn};
use crate::quad;
use crate::sampled;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpecialKernel {
    PsiS { s: f64, kappa: Kappa, q_fn: QFn },
    Wp { epsilon: f64, dimension: u32 },
}

impl SpecialKernel {
    pub fn psi(s: f64, kappa: Kappa, q_fn: QFn) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!("Ψ_s needs s > 0, got {s}")));
        }
        Ok(SpecialKernel::PsiS { s, kappa, q_fn })
    }

    pub fn wp(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!("℘ needs ε in (0,1), got {epsilon}")));
        }
        Ok(SpecialKernel::Wp { epsilon, dimension: 1 })
    }
}

/// Pointwise value. Ψ_s is defined off 0; ℘ is defined off 0.
pub fn special_eval(sk: &SpecialKernel, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Err(Error::Singularity("special kernels are evaluated off the origin".into()));
    }
    match sk {
        SpecialKernel::PsiS { s, kappa, q_fn } => Ok(psi_eval(*s, kappa, *q_fn, z)),
        SpecialKernel::Wp { epsilon, dimension } => {
            if *dimension != 1 {
                return Err(Error::Domain("℘ is implemented in dimension 1".into()));
            }
            Ok(wp_eval(*epsilon, z))
        }
    }
}

// ---------------------------------------------------------------- Ψ_s

fn psi_eval(s: f64, kappa: &Kappa, q_fn: QFn, z: f64) -> f64 {
    let a = z.abs();
    if a >= s {
        return 0.0;
    }
    let lo = (a / s).max(0.25);
    let inner = quad::composite_gl(
        |t| bump::eta(t) * kappa.eval(s * t) * (1.0 - 2.0 * a / (s * t)) / t,
        lo,
        1.0,
        24,
        16,
    );
    0.5 * z * a / q_fn.eval(z) * inner
}

/// Gauss–Legendre nodes and weights on (0, s).
fn half_nodes(s: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = quad::gauss_legendre(16);
    let h = s / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 16);
    let mut weights = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let c = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PsiReport {
    pub s: f64,
    pub parity: String,
    pub mean: f64,
    pub support_ok: bool,
    pub sup_times_s: f64,
    pub deriv_times_s2: f64,
    /// max of |Ψ̂_s(ξ)| / min{|sξ|, |sξ|^{−1}} over the sampled frequencies.
    pub fourier_constant: f64,
    pub samples: Vec<(f64, f64)>,
}

fn certify_psi(s: f64, kappa: &Kappa, q_fn: QFn) -> Result<PsiReport> {
    let norm = quad::composite_gl(|t| bump::eta(t) / t, 0.25, 1.0, 64, 32);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Construction(format!("η normalization off by {:e}", norm - 1.0)));
    }
    let even = matches!(q_fn, QFn::SignedSquare);
    let panels = 512;
    let (nodes, weights) = half_nodes(s, panels);
    let vals: Vec<f64> = nodes.par_iter().map(|&z| psi_eval(s, kappa, q_fn, z)).collect();
    let neg: Vec<f64> = nodes.par_iter().map(|&z| psi_eval(s, kappa, q_fn, -z)).collect();
    let mean: f64 = weights.iter().zip(vals.iter().zip(&neg)).map(|(w, (a, b))| w * (a + b)).sum();

    let grid = sampled::linspace(-1.25 * s, 1.25 * s, 2001);
    let samples: Vec<(f64, f64)> = grid
        .iter()
        .filter(|z| **z != 0.0)
        .map(|&z| (z, psi_eval(s, kappa, q_fn, z)))
        .collect();
    let support_ok = samples.iter().all(|(z, v)| z.abs() < s || *v == 0.0);
    let sup = vals.iter().chain(&neg).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut deriv: f64 = 0.0;
    for w in samples.windows(2) {
        let (z0, v0) = w[0];
        let (z1, v1) = w[1];
        if z0 < 0.0 && z1 > 0.0 {
            continue;
        }
        deriv = deriv.max(((v1 - v0) / (z1 - z0)).abs());
    }

    // Ψ̂(ξ) = ∫ Ψ(z) e^{−2πiξz} dz, split into the even and odd parts.
    let freqs: Vec<f64> = (0..=60).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 60.0) / s).collect();
    let fourier_constant = freqs
        .par_iter()
        .map(|&xi| {
            let mut re = 0.0;
            let mut im = 0.0;
            for ((z, w), (a, b)) in nodes.iter().zip(&weights).zip(vals.iter().zip(&neg)) {
                let ph = 2.0 * PI * xi * z;
                re += w * (a + b) * ph.cos();
                im -= w * (a - b) * ph.sin();
            }
            let m = (re * re + im * im).sqrt();
            let sx = s * xi;
            m / sx.min(1.0 / sx)
        })
        .reduce(|| 0.0, f64::max);

    Ok(PsiReport {
        s,
        parity: if even { "even" } else { "odd" }.to_string(),
        mean,
        support_ok,
        sup_times_s: sup * s,
        deriv_times_s2: deriv * s * s,
        fourier_constant,
        samples,
    })
}

// ---------------------------------------------------------------- ℘

/// ℘̂ on ξ ≥ 0: |ξ|^ε up to 1, |ξ|^{−ε} from 2, quintic Hermite bridge matching
/// value, slope and curvature at both ends.
pub fn wp_hat(epsilon: f64, xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 1.0 {
        a.powf(epsilon)
    } else if a >= 2.0 {
        a.powf(-epsilon)
    } else {
        let e = epsilon;
        let l = [1.0, e, e * (e - 1.0)];
        let r = [2f64.powf(-e), -e * 2f64.powf(-e - 1.0), e * (e + 1.0) * 2f64.powf(-e - 2.0)];
        quintic_hermite(l, r, a - 1.0)
    }
}

fn quintic_hermite(l: [f64; 3], r: [f64; 3], t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    h0 * l[0] + h1 * l[1] + h2 * l[2] + h3 * r[2] + h4 * r[1] + h5 * r[0]
}

/// ∫_0^2 ℘̂(ξ) g(ξ) dξ with panels graded toward 0 and refined for oscillation at
/// angular frequency `omega`.
fn finite_part(epsilon: f64, omega: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut breaks = vec![0.0];
    for k in (0..60).rev() {
        breaks.push(2f64.powi(-k));
    }
    breaks.push(2.0);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = 1 + ((b - a) * omega / PI).ceil() as usize;
        total += quad::composite_gl(|x| wp_hat(epsilon, x) * g(x), a, b, panels, 16);
    }
    total
}

/// ∫_2^∞ ξ^{−p} e^{iaξ} dξ for a > 0, by rotating onto ξ = 2 + iy.
fn power_tail(p: f64, a: f64) -> (f64, f64) {
    // i e^{2ia} / a ∫_0^∞ (2 + iw/a)^{−p} e^{−w} dw
    let (mut re, mut im) = (0.0, 0.0);
    let (x, w) = quad::gauss_legendre(32);
    for k in 0..24 {
        let (lo, hi) = (2.0 * k as f64, 2.0 * (k + 1) as f64);
        for (xi, wi) in x.iter().zip(&w) {
            let v = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xi;
            let wt = 0.5 * (hi - lo) * wi * (-v).exp();
            // (2 + i v/a)^{−p} in polar form
            let m = (4.0 + (v / a).powi(2)).sqrt();
            let ang = (v / a).atan2(2.0);
            let mag = m.powf(-p);
            re += wt * mag * (-p * ang).cos();
            im += wt * mag * (-p * ang).sin();
        }
    }
    // multiply by i e^{2ia} / a
    let (c, s) = ((2.0 * a).cos(), (2.0 * a).sin());
    let (zr, zi) = (re * c - im * s, re * s + im * c);
    (-zi / a, zr / a)
}

fn wp_eval(epsilon: f64, x: f64) -> f64 {
    let a = 2.0 * PI * x.abs();
    let head = finite_part(epsilon, a, |xi| (a * xi).cos());
    let (tail_cos, _) = power_tail(epsilon, a);
    2.0 * (head + tail_cos)
}

/// Asymptotic constants: ℘(x) ≈ c₀|x|^{ε−1} as x → 0 and ≈ c_∞|x|^{−1−ε} as |x| → ∞.
pub fn wp_asymptotics(epsilon: f64) -> (f64, f64) {
    let s = (PI * epsilon / 2.0).sin();
    let c0 = 2.0 * gamma(1.0 - epsilon) * s / (2.0 * PI).powf(1.0 - epsilon);
    let cinf = -2.0 * gamma(1.0 + epsilon) * s / (2.0 * PI).powf(1.0 + epsilon);
    (c0, cinf)
}

/// ∫_{−R}^{R} ℘ via Parseval with the Dirichlet kernel.
fn wp_mass_within(epsilon: f64, r: f64) -> f64 {
    let a = 2.0 * PI * r;
    let head = finite_part(epsilon, a, |xi| if xi == 0.0 { a / PI } else { (a * xi).sin() / (PI * xi) });
    let (_, tail_sin) = power_tail(1.0 + epsilon, a);
    2.0 * (head + tail_sin / PI)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WpReport {
    pub epsilon: f64,
    /// ∫℘ from the mass in [−R, R] plus the asymptotic tail beyond R.
    pub integral: f64,
    pub radius: f64,
    /// max |℘(x)| / min{|x|^{ε−1}, |x|^{−ε−1}} over the sample grid.
    pub envelope_constant: f64,
    /// |℘|·|x|^{1−ε} at the smallest sample over the predicted constant.
    pub small_x_ratio: f64,
    /// max |℘(x) − c₀|x|^{ε−1}| over samples with x ≤ 1/100; bounded because
    /// ℘̂ − |ξ|^{−ε} is integrable.
    pub small_x_remainder: f64,
    /// |℘|·|x|^{1+ε} at the largest sample over the predicted constant.
    pub large_x_ratio: f64,
    pub hat_positive: bool,
    pub samples: Vec<(f64, f64)>,
}

fn certify_wp(epsilon: f64) -> Result<WpReport> {
    let radius = 200.0;
    let (c0, cinf) = wp_asymptotics(epsilon);
    let inner = wp_mass_within(epsilon, radius);
    let integral = inner + 2.0 * cinf * radius.powf(-epsilon) / epsilon;

    let xs: Vec<f64> = (0..=80).map(|i| 10f64.powf(-3.0 + 5.0 * i as f64 / 80.0)).collect();
    let vals: Vec<f64> = xs.par_iter().map(|&x| wp_eval(epsilon, x)).collect();
    let mut env: f64 = 0.0;
    for (x, v) in xs.iter().zip(&vals) {
        let m = x.powf(epsilon - 1.0).min(x.powf(-epsilon - 1.0));
        env = env.max(v.abs() / m);
    }
    if !env.is_finite() {
        return Err(Error::Numeric("℘ samples not finite".into()));
    }
    let (x0, v0) = (xs[0], vals[0]);
    let (x1, v1) = (xs[xs.len() - 1], vals[vals.len() - 1]);
    let small_x_ratio = v0 * x0.powf(1.0 - epsilon) / c0;
    let small_x_remainder = xs
        .iter()
        .zip(&vals)
        .filter(|(x, _)| **x <= 0.01)
        .map(|(x, v)| (v - c0 * x.powf(epsilon - 1.0)).abs())
        .fold(0.0, f64::max);
    let large_x_ratio = v1 * x1.powf(1.0 + epsilon) / cinf;
    let hat_positive = (0..=1000).all(|i| wp_hat(epsilon, 1.0 + i as f64 / 1000.0) > 0.0);
    let samples = xs.iter().rev().map(|x| -x).chain(xs.iter().copied()).zip(vals.iter().rev().chain(vals.iter()).copied()).collect();
    Ok(WpReport { epsilon, integral, radius, envelope_constant: env, small_x_ratio, small_x_remainder, large_x_ratio, hat_positive, samples })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum SpecialReport {
    Psi(PsiReport),
    Wp(WpReport),
}

pub fn certify(sk: &SpecialKernel) -> Result<SpecialReport> {
    match sk {
        SpecialKernel::PsiS { s, kappa, q_fn } => certify_psi(*s, kappa, *q_fn).map(SpecialReport::Psi),
        SpecialKernel::Wp { epsilon, dimension } => {
            if *dimension != 1 {
                return Err(Error::Domain("℘ is implemented in dimension 1".into()));
            }
            certify_wp(*epsilon).map(SpecialReport::Wp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_matches_both_branches() {
        for e in [0.1, 0.5, 0.9] {
            assert_eq!(wp_hat(e, 1.0), 1.0);
            let h = 1e-6;
            let d = (wp_hat(e, 1.0 + h) - wp_hat(e, 1.0 - h)) / (2.0 * h);
            assert!((d - e).abs() < 1e-5);
            assert!((wp_hat(e, 2.0 - 1e-12) - 2f64.powf(-e)).abs() < 1e-10);
            let d2 = (wp_hat(e, 2.0 + h) - wp_hat(e, 2.0 - h)) / (2.0 * h);
            assert!((d2 + e * 2f64.powf(-e - 1.0)).abs() < 1e-5);
        }
    }

    #[test]
    fn tail_against_direct_quadrature() {
        // ∫_2^∞ ξ^{-2} e^{iaξ}: compare with a long truncated GL sum plus an integration-by-parts tail.
        let (p, a) = (2.0, 3.0);
        let (re, im) = power_tail(p, a);
        let big = 2000.0;
        let n = ((big - 2.0) * a / PI).ceil() as usize;
        let dre = quad::composite_gl(|x| x.powf(-p) * (a * x).cos(), 2.0, big, n, 16) - (a * big).sin() / (a * big * big);
        let dim = quad::composite_gl(|x| x.powf(-p) * (a * x).sin(), 2.0, big, n, 16) + (a * big).cos() / (a * big * big);
        assert!((re - dre).abs() < 1e-8, "{re} {dre}");
        assert!((im - dim).abs() < 1e-8, "{im} {dim}");
    }

    #[test]
    fn psi_scales_for_reciprocal_kappa() {
        // κ = 1/u gives Ψ_s(z) = Ψ_1(z/s)/s.
        for q in [QFn::Square, QFn::SignedSquare] {
            for z in [0.1, 0.3, 0.7, -0.45] {
                let a = psi_eval(2.0, &Kappa::Reciprocal, q, 2.0 * z);
                let b = psi_eval(1.0, &Kappa::Reciprocal, q, z) / 2.0;
                assert!((a - b).abs() < 1e-14);
            }
        }
    }
}
