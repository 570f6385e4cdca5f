//! Fourier expansion of a Heisenberg kernel restricted to an intrinsic Lipschitz
//! graph in the two difference-quotient variables:
//! κ(u; θ₁, θ₂) = χ(θ)·k(u, 2Lθ₁u, 4L²θ₂𝔮(u)) = Σ_n κ_n(u) e^{iθ·n}, with
//! κ_n(u) = (2π)^{-2} ∫_{[−π,π]²} κ(u; θ) e^{−iθ·n} dθ.

use crate::bump;
use crate::error::{Error, Result};
use crate::heis::HPoint;
use crate::ilg::{graph_map, IlgFunction};
use crate::kernel1d::QFn;
use crate::kernels::{self, KernelSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Periodic samples per direction used by the discrete transform.
pub const RESOLUTION: usize = 256;

pub fn q_for(spec: KernelSpec) -> QFn {
    if spec.is_horizontally_odd_class() {
        QFn::Square
    } else {
        QFn::SignedSquare
    }
}

/// χ = 1 on [−1, 1]², 0 off [−2, 2]².
pub fn chi(t1: f64, t2: f64) -> f64 {
    bump::plateau(t1, 1.0, 2.0) * bump::plateau(t2, 1.0, 2.0)
}

/// A kernel on ℍ with its quadratic function 𝔮.
pub trait HeisKernel: Sync {
    fn eval(&self, p: HPoint) -> f64;
    fn q(&self) -> QFn;
}

impl HeisKernel for KernelSpec {
    fn eval(&self, p: HPoint) -> f64 {
        kernels::eval_unchecked(*self, p)
    }
    fn q(&self) -> QFn {
        q_for(*self)
    }
}

/// k(x, y, t) = 1/x: odd, and independent of (y, t), so κ(u; θ) = χ(θ)/u.
#[derive(Debug, Clone, Copy)]
pub struct ReciprocalX;

impl HeisKernel for ReciprocalX {
    fn eval(&self, p: HPoint) -> f64 {
        1.0 / p.x
    }
    fn q(&self) -> QFn {
        QFn::SignedSquare
    }
}

pub fn aux_kappa<K: HeisKernel + ?Sized>(k: &K, l: f64, u: f64, t1: f64, t2: f64) -> f64 {
    let c = chi(t1, t2);
    if c == 0.0 {
        return 0.0;
    }
    let q = k.q().eval(u);
    c * k.eval(HPoint::new(u, 2.0 * l * t1 * u, 4.0 * l * l * t2 * q))
}

fn index(n_max: i32, n1: i32, n2: i32) -> usize {
    let w = (2 * n_max + 1) as usize;
    (n1 + n_max) as usize * w + (n2 + n_max) as usize
}

/// All κ_n(u) with |n|_∞ ≤ n_max, by the periodic trapezoid rule (separable DFT).
pub fn coefficients_at<K: HeisKernel + ?Sized>(spec: &K, l: f64, u: f64, n_max: i32) -> Vec<Complex64> {
    let m = RESOLUTION;
    let h = 2.0 * PI / m as f64;
    let th: Vec<f64> = (0..m).map(|j| -PI + h * j as f64).collect();
    let w = (2 * n_max + 1) as usize;
    let samples: Vec<f64> = (0..m * m).map(|k| aux_kappa(spec, l, u, th[k / m], th[k % m])).collect();
    let tw: Vec<Complex64> = (-n_max..=n_max)
        .flat_map(|n| th.iter().map(move |t| Complex64::from_polar(1.0, -(n as f64) * t)))
        .collect();
    // partial[j1][n2] = Σ_{j2} f(j1, j2) e^{−i n2 θ_{j2}}
    let mut partial = vec![Complex64::new(0.0, 0.0); m * w];
    for j1 in 0..m {
        let row = &samples[j1 * m..(j1 + 1) * m];
        if row.iter().all(|v| *v == 0.0) {
            continue;
        }
        for n2 in -n_max..=n_max {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j2, v) in row.iter().enumerate() {
                if *v != 0.0 {
                    acc += tw[(n2 + n_max) as usize * m + j2] * *v;
                }
            }
            partial[j1 * w + (n2 + n_max) as usize] = acc;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); w * w];
    let norm = 1.0 / (m * m) as f64;
    for n1 in -n_max..=n_max {
        for n2 in -n_max..=n_max {
            let mut acc = Complex64::new(0.0, 0.0);
            for j1 in 0..m {
                let p = partial[j1 * w + (n2 + n_max) as usize];
                if p != Complex64::new(0.0, 0.0) {
                    acc += p * tw[(n1 + n_max) as usize * m + j1];
                }
            }
            out[index(n_max, n1, n2)] = acc * norm;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierCoeffTable {
    pub l: f64,
    pub kernel: String,
    pub n_max: i32,
    pub u_samples: Vec<f64>,
    /// kappa_n[i][index(n)] = κ_n(u_i).
    pub kappa_n: Vec<Vec<Complex64>>,
    /// c_n indexed like kappa_n rows.
    pub c_n: Vec<f64>,
    /// Least-squares slope of log(max_{|n|_∞ = r} c_n) against log(1 + r), r ≥ 1.
    pub decay_slope: f64,
}

impl FourierCoeffTable {
    pub fn c(&self, n1: i32, n2: i32) -> f64 {
        self.c_n[index(self.n_max, n1, n2)]
    }

    pub fn shell_max(&self) -> Vec<f64> {
        (0..=self.n_max)
            .map(|r| {
                let mut m: f64 = 0.0;
                for n1 in -r..=r {
                    for n2 in -r..=r {
                        if n1.abs().max(n2.abs()) == r {
                            m = m.max(self.c(n1, n2));
                        }
                    }
                }
                m
            })
            .collect()
    }
}

/// κ_n on the u samples and c_n = max_u max(|u||κ_n(u)|, u²|κ_n′(u)|), the
/// derivative by symmetric differences.
pub fn fourier_coeffs<K: HeisKernel + ?Sized>(spec: &K, name: &str, l: f64, u_samples: &[f64], n_max: i32) -> Result<FourierCoeffTable> {
    if !(l >= 1.0) {
        return Err(Error::Domain(format!("L must be at least 1, got {l}")));
    }
    if n_max < 1 || u_samples.is_empty() || u_samples.iter().any(|u| *u == 0.0 || !u.is_finite()) {
        return Err(Error::Domain("need n_max >= 1 and nonzero finite u samples".into()));
    }
    let rel = 1e-4;
    let per_u: Vec<(Vec<Complex64>, Vec<f64>)> = u_samples
        .par_iter()
        .map(|&u| {
            let k0 = coefficients_at(spec, l, u, n_max);
            let kp = coefficients_at(spec, l, u * (1.0 + rel), n_max);
            let km = coefficients_at(spec, l, u * (1.0 - rel), n_max);
            let c: Vec<f64> = (0..k0.len())
                .map(|i| {
                    let d = (kp[i] - km[i]) / (2.0 * rel * u);
                    (u.abs() * k0[i].norm()).max(u * u * d.norm())
                })
                .collect();
            (k0, c)
        })
        .collect();
    if per_u.iter().any(|(k, _)| k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
        return Err(Error::Numeric("non-finite Fourier coefficient".into()));
    }
    let w = (2 * n_max + 1) as usize;
    let mut c_n = vec![0.0f64; w * w];
    for (_, c) in &per_u {
        for (a, b) in c_n.iter_mut().zip(c) {
            *a = a.max(*b);
        }
    }
    let mut table = FourierCoeffTable {
        l,
        kernel: name.to_string(),
        n_max,
        u_samples: u_samples.to_vec(),
        kappa_n: per_u.into_iter().map(|(k, _)| k).collect(),
        c_n,
        decay_slope: 0.0,
    };
    let shells = table.shell_max();
    let pts: Vec<(f64, f64)> = (1..shells.len())
        .filter(|&r| shells[r] > 0.0)
        .map(|r| ((1.0 + r as f64).ln(), shells[r].ln()))
        .collect();
    table.decay_slope = ls_slope(&pts);
    Ok(table)
}

fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Σ_{|n|_∞ ≤ n_max} κ_n(u) e^{iθ·n}.
pub fn partial_sum(coeffs: &[Complex64], n_max: i32, t1: f64, t2: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in -n_max..=n_max {
        for n2 in -n_max..=n_max {
            acc += coeffs[index(n_max, n1, n2)] * Complex64::from_polar(1.0, n1 as f64 * t1 + n2 as f64 * t2);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    /// max over pairs of |u|·|K_Φ(w, v) − partial sum|.
    pub residual: f64,
    /// max over pairs of max(|θ₁|, |θ₂|); χ ≡ 1 needs this ≤ 1.
    pub max_theta: f64,
    pub pairs: usize,
}

/// Compares K_Φ(w, v) = k(Φ(v)⁻¹Φ(w)) on grid pairs of an iLG over the x-axis
/// with the truncated expansion.
pub fn reconstruction_residual<K: HeisKernel + ?Sized>(spec: &K, l: f64, f: &IlgFunction, pairs: &[(usize, usize)], n_max: i32) -> Result<ReconstructionReport> {
    if f.sub.theta() != 0.0 {
        return Err(Error::Domain("reconstruction expects a graph over the x-axis".into()));
    }
    let q = spec.q();
    let rows: Vec<Result<(f64, f64)>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let p = graph_map(f, f.grid[j])?.inv() * graph_map(f, f.grid[i])?;
            let u = p.x;
            if u == 0.0 {
                return Err(Error::Singularity("pair on the diagonal".into()));
            }
            let t1 = p.y / (2.0 * l * u);
            let t2 = p.t / (4.0 * l * l * q.eval(u));
            let direct = spec.eval(p);
            let coeffs = coefficients_at(spec, l, u, n_max);
            let approx = partial_sum(&coeffs, n_max, t1, t2);
            Ok(((approx - Complex64::new(direct, 0.0)).norm() * u.abs(), t1.abs().max(t2.abs())))
        })
        .collect();
    let mut rep = ReconstructionReport { residual: 0.0, max_theta: 0.0, pairs: pairs.len() };
    for r in rows {
        let (res, th) = r?;
        rep.residual = rep.residual.max(res);
        rep.max_theta = rep.max_theta.max(th);
    }
    Ok(rep)
}
