//! Lipschitz flags {(A(y), y, t)}: the horizontal curve γ, the parametrization
//! Γ(y, t) = γ(y)·(0,0,t), area weights, the vertically reduced kernels k_τ and
//! desk-scale operator norms on the parametrized surface.

use crate::error::{Error, Result};
use crate::heis::{self, HPoint, HorizontalSubgroup, NormKind};
use crate::ilg::IlgFunction;
use crate::kernel1d::SampledFn;
use crate::quad;
use crate::sio::{self, Entries, SioMatrix, Truncation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Constant c of the area formula. Calibrated so that the flat flag carries
/// Lebesgue measure dy dt.
pub const AREA_C: f64 = 1.0;

/// Largest n_y·n_t handled by the dense flag operator.
pub const DENSE_CAP: usize = 1 << 14;

/// Horizontally odd kernels on ℍ of homogeneity −3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel3 {
    /// X‖p‖⁻² with the Korányi norm.
    GradNormX,
    /// Y‖p‖⁻².
    GradNormY,
    /// X(r⁴ + ‖p‖⁴)^{−1/2}: same decay at infinity, bounded at 0.
    MollifiedX(f64),
    Zero,
}

impl Kernel3 {
    pub fn eval(&self, p: HPoint) -> f64 {
        let r2 = p.x * p.x + p.y * p.y;
        let n4 = r2 * r2 + 16.0 * p.t * p.t;
        match *self {
            Kernel3::GradNormX => (-2.0 * p.x * r2 + 8.0 * p.y * p.t) / (n4 * n4.sqrt()),
            Kernel3::GradNormY => (-2.0 * p.y * r2 - 8.0 * p.x * p.t) / (n4 * n4.sqrt()),
            Kernel3::MollifiedX(r) => {
                let m = r.powi(4) + n4;
                (-2.0 * p.x * r2 + 8.0 * p.y * p.t) / (m * m.sqrt())
            }
            Kernel3::Zero => 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel3::GradNormX => "grad_norm_x".into(),
            Kernel3::GradNormY => "grad_norm_y".into(),
            Kernel3::MollifiedX(r) => format!("mollified_x({r})"),
            Kernel3::Zero => "zero".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Kernel3> {
        match s {
            "grad_norm_x" => Some(Kernel3::GradNormX),
            "grad_norm_y" => Some(Kernel3::GradNormY),
            "zero" => Some(Kernel3::Zero),
            _ => {
                let r = s.strip_prefix("mollified_x(")?.strip_suffix(')')?.parse().ok()?;
                Some(Kernel3::MollifiedX(r))
            }
        }
    }

    /// (δ_τK)(p) = τ⁻³K(δ_{1/τ}p).
    pub fn dilated_eval(&self, tau: f64, p: HPoint) -> f64 {
        let q = HPoint::new(p.x / tau, p.y / tau, p.t / (tau * tau));
        self.eval(q) / (tau * tau * tau)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagSpec {
    /// Piecewise-linear profile A on its grid; the grid is the y-window.
    pub a: SampledFn,
    pub t_window: (f64, f64),
}

impl FlagSpec {
    pub fn new(a: SampledFn, t_window: (f64, f64)) -> Result<Self> {
        if !(t_window.0 < t_window.1) {
            return Err(Error::Domain("empty t-window".into()));
        }
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile values must be finite".into()));
        }
        Ok(FlagSpec { a, t_window })
    }

    pub fn from_fn(y_window: (f64, f64), n: usize, t_window: (f64, f64), f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = crate::sampled::linspace(y_window.0, y_window.1, n);
        Self::new(SampledFn::from_fn(grid, f), t_window)
    }

    pub fn y_window(&self) -> (f64, f64) {
        self.a.range()
    }

    pub fn lipschitz(&self) -> f64 {
        self.a.lipschitz()
    }

    fn segment(&self, y: f64) -> usize {
        let g = &self.a.grid;
        match g.binary_search_by(|x| x.partial_cmp(&y).unwrap()) {
            Ok(i) => i.min(g.len() - 2),
            Err(i) => (i.max(1) - 1).min(g.len() - 2),
        }
    }

    /// A′ on the segment containing y.
    pub fn slope(&self, y: f64) -> f64 {
        let i = self.segment(y);
        let g = &self.a.grid;
        (self.a.values[i + 1] - self.a.values[i]) / (g[i + 1] - g[i])
    }

    /// ∫_{g₀}^y A, exact for the piecewise-linear profile.
    fn primitive(&self, y: f64) -> f64 {
        let g = &self.a.grid;
        let v = &self.a.values;
        let i = self.segment(y);
        let mut s = 0.0;
        for k in 0..i {
            s += 0.5 * (g[k + 1] - g[k]) * (v[k] + v[k + 1]);
        }
        let ay = self.a.eval(y);
        s + 0.5 * (y - g[i]) * (v[i] + ay)
    }

    /// ∫_0^y A. The origin may lie outside the window; the profile is then
    /// continued affinely from the nearest segment.
    pub fn integral(&self, y: f64) -> f64 {
        self.primitive_ext(y) - self.primitive_ext(0.0)
    }

    fn primitive_ext(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_window();
        if y < lo {
            let s = self.slope(lo);
            let a0 = self.a.values[0];
            let d = y - lo;
            a0 * d + 0.5 * s * d * d
        } else if y > hi {
            let s = self.slope(hi);
            let a1 = self.a.values[self.a.values.len() - 1];
            let d = y - hi;
            self.primitive(hi) + a1 * d + 0.5 * s * d * d
        } else {
            self.primitive(y)
        }
    }

    /// A_ρ(x) = ρA(x/ρ) on the grid scaled by ρ.
    pub fn rescaled(&self, rho: f64) -> FlagSpec {
        FlagSpec {
            a: SampledFn {
                grid: self.a.grid.iter().map(|g| rho * g).collect(),
                values: self.a.values.iter().map(|v| rho * v).collect(),
            },
            t_window: (rho * rho * self.t_window.0, rho * rho * self.t_window.1),
        }
    }

    /// ∬ √(1 + A′²) dy dt over the window.
    pub fn area_integral(&self) -> f64 {
        let g = &self.a.grid;
        let mut s = 0.0;
        for i in 0..g.len() - 1 {
            let h = g[i + 1] - g[i];
            let d = (self.a.values[i + 1] - self.a.values[i]) / h;
            s += h * (1.0 + d * d).sqrt();
        }
        s * (self.t_window.1 - self.t_window.0)
    }

    /// The leaf {t = const} seen as an intrinsic graph over the y-axis.
    pub fn gamma_graph(&self) -> Result<IlgFunction> {
        let neg: Vec<f64> = self.a.values.iter().map(|v| -v).collect();
        let start = self.integral(self.a.grid[0]);
        IlgFunction::from_phi1(HorizontalSubgroup::new(PI / 2.0), self.a.grid.clone(), neg, start)
    }
}

/// Γ(y, t) = (A(y), y, t − yA(y)/2 + ∫₀^y A).
pub fn flag_param(flag: &FlagSpec, y: f64, t: f64) -> Result<HPoint> {
    let (y0, y1) = flag.y_window();
    let (t0, t1) = flag.t_window;
    if !(y >= y0 && y <= y1 && t >= t0 && t <= t1) {
        return Err(Error::Domain(format!("({y}, {t}) outside the flag window")));
    }
    Ok(param_unchecked(flag, y, t))
}

fn param_unchecked(flag: &FlagSpec, y: f64, t: f64) -> HPoint {
    let a = flag.a.eval(y);
    HPoint::new(a, y, t - 0.5 * y * a + flag.integral(y))
}

/// γ(y) = Γ(y, 0), ignoring the t-window.
pub fn gamma(flag: &FlagSpec, y: f64) -> Result<HPoint> {
    let (y0, y1) = flag.y_window();
    if !(y >= y0 && y <= y1) {
        return Err(Error::Domain(format!("{y} outside the profile window")));
    }
    Ok(param_unchecked(flag, y, 0.0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BilipReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub lipschitz: f64,
    pub pairs: usize,
}

/// d(Γ(w), Γ(w′)) / max{|y − y′|, √|t − t′|} over random pairs (max-norm metric).
/// Half the pairs are uniform in the window, half are local at random scales.
pub fn flag_bilipschitz_audit(flag: &FlagSpec, pairs: usize, seed: u64) -> Result<BilipReport> {
    if pairs == 0 {
        return Err(Error::Domain("need at least one pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (y0, y1) = flag.y_window();
    let (t0, t1) = flag.t_window;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut done = 0;
    while done < pairs {
        let (ya, ta) = (rng.gen_range(y0..=y1), rng.gen_range(t0..=t1));
        let (yb, tb) = if done % 2 == 0 {
            (rng.gen_range(y0..=y1), rng.gen_range(t0..=t1))
        } else {
            let r = 10f64.powf(-rng.gen_range(0.0..4.0)) * (y1 - y0);
            let u: f64 = rng.gen_range(-1.0..1.0);
            let v: f64 = rng.gen_range(-1.0..1.0);
            ((ya + r * u).clamp(y0, y1), (ta + r * r * v).clamp(t0, t1))
        };
        let dp = (ya - yb).abs().max((ta - tb).abs().sqrt());
        if dp == 0.0 {
            continue;
        }
        let d = heis::dist(param_unchecked(flag, ya, ta), param_unchecked(flag, yb, tb), NormKind::MaxNorm);
        let r = d / dp;
        lo = lo.min(r);
        hi = hi.max(r);
        done += 1;
    }
    Ok(BilipReport { min_ratio: lo, max_ratio: hi, lipschitz: flag.lipschitz(), pairs })
}

/// Cell-centred nodes (y_i, t_j), row-major in j, with weights c·∫_cell √(1+A′²) dy dt.
pub fn flag_nodes(flag: &FlagSpec, ny: usize, nt: usize) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    if ny == 0 || nt == 0 {
        return Err(Error::Domain("empty flag grid".into()));
    }
    let (y0, y1) = flag.y_window();
    let (t0, t1) = flag.t_window;
    let (hy, ht) = ((y1 - y0) / ny as f64, (t1 - t0) / nt as f64);
    let g = &flag.a.grid;
    let mut row_w = Vec::with_capacity(ny);
    for i in 0..ny {
        let (a, b) = (y0 + i as f64 * hy, y0 + (i + 1) as f64 * hy);
        // exact arclength factor over [a, b]: split at profile nodes
        let mut cuts = vec![a];
        cuts.extend(g.iter().copied().filter(|x| *x > a && *x < b));
        cuts.push(b);
        let mut s = 0.0;
        for w in cuts.windows(2) {
            let d = flag.slope(0.5 * (w[0] + w[1]));
            s += (w[1] - w[0]) * (1.0 + d * d).sqrt();
        }
        row_w.push(AREA_C * s * ht);
    }
    let mut nodes = Vec::with_capacity(ny * nt);
    let mut weights = Vec::with_capacity(ny * nt);
    for i in 0..ny {
        for j in 0..nt {
            nodes.push((y0 + (i as f64 + 0.5) * hy, t0 + (j as f64 + 0.5) * ht));
            weights.push(row_w[i]);
        }
    }
    Ok((nodes, weights))
}

// ---------------------------------------------------------------- k_τ

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KTauSpec {
    pub kernel: Kernel3,
    pub tau: f64,
    pub rho: f64,
}

impl KTauSpec {
    pub fn new(kernel: Kernel3, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::Domain(format!("τ must be positive, got {tau}")));
        }
        Ok(KTauSpec { kernel, tau, rho: tau.sqrt() })
    }
}

/// ∫ e^{−iωu} G(u) du over ℝ for G smooth away from a peak of width `w` at 0 and
/// decaying like |u|^{−2}.
fn oscillatory_line(g: &(dyn Fn(f64) -> f64 + Sync), omega: f64, w: f64) -> Result<Complex64> {
    let period = 2.0 * PI / omega;
    let c = (4.0 * w).max(2.0 * period);
    let tol = 1e-13 * (1.0 + g(0.0).abs() * w);
    let mut breaks = vec![-c, 0.0, c];
    for k in [1.0 / 16.0, 0.25, 1.0] {
        if k * w < c {
            breaks.push(k * w);
            breaks.push(-k * w);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut re = 0.0;
    let mut im = 0.0;
    for s in breaks.windows(2) {
        re += quad::adaptive(|u| g(u) * (omega * u).cos(), s[0], s[1], tol, 1e-13, 4000)?.0;
        im -= quad::adaptive(|u| g(u) * (omega * u).sin(), s[0], s[1], tol, 1e-13, 4000)?.0;
    }
    // one panel per period out to T, then the asymptotic tail
    let panels = 256;
    let t_end = c + panels as f64 * period;
    for sign in [1.0, -1.0] {
        let (a, b) = if sign > 0.0 { (c, t_end) } else { (-t_end, -c) };
        re += quad::composite_gl(|u| g(u) * (omega * u).cos(), a, b, panels, 16);
        im -= quad::composite_gl(|u| g(u) * (omega * u).sin(), a, b, panels, 16);
    }
    // ∫_T^∞ e^{−iωu}G = e^{−iωT} Σ_k G^{(k)}(T)/(iω)^{k+1}, and the mirror at −T.
    let h = 1e-2 * t_end;
    let derivs = |x: f64| -> [f64; 3] {
        let (gm, g0, gp) = (g(x - h), g(x), g(x + h));
        [g0, (gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h)]
    };
    let iw = Complex64::new(0.0, omega);
    let mut tail = Complex64::new(0.0, 0.0);
    let dp = derivs(t_end);
    let dm = derivs(-t_end);
    let mut pw = iw;
    for k in 0..3 {
        tail += Complex64::from_polar(1.0, -omega * t_end) * dp[k] / pw;
        tail -= Complex64::from_polar(1.0, omega * t_end) * dm[k] / pw;
        pw *= iw;
    }
    Ok(Complex64::new(re, im) + tail)
}

/// ∫ e^{−2πiuτ} K(p·(0,0,u)) du.
pub fn vertical_ft(kernel: Kernel3, p: HPoint, tau: f64) -> Result<Complex64> {
    let r2 = p.x * p.x + p.y * p.y;
    if r2 == 0.0 {
        return Err(Error::Singularity("vertical transform needs |z| > 0".into()));
    }
    let g = move |u: f64| kernel.eval(HPoint::new(p.x, p.y, p.t + u));
    let omega = 2.0 * PI * tau;
    // shift u ↦ u − t so the peak sits at 0
    let g0 = move |u: f64| g(u - p.t);
    let j = oscillatory_line(&g0, omega, r2)?;
    Ok(j * Complex64::from_polar(1.0, omega * p.t))
}

/// k_τ(p) = ∫ e^{−2πiθ}(δ_τK)(p·(0,0,θ)) dθ.
pub fn k_tau_eval(spec: &KTauSpec, p: HPoint) -> Result<Complex64> {
    let r2 = p.x * p.x + p.y * p.y;
    if r2 == 0.0 {
        return Err(Error::Singularity("k_τ is defined off the t-axis".into()));
    }
    let (k, tau) = (spec.kernel, spec.tau);
    let g = move |u: f64| k.dilated_eval(tau, HPoint::new(p.x, p.y, u));
    let j = oscillatory_line(&g, 2.0 * PI, r2.max(tau * tau * 1e-12))?;
    Ok(j * Complex64::from_polar(1.0, 2.0 * PI * p.t))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauUniformity {
    pub taus: Vec<f64>,
    /// sup |z||k_τ(p)| over the sample set, per τ.
    pub constants: Vec<f64>,
    /// (max − min)/max over the τ set.
    pub variation: f64,
    pub oddness_defect: f64,
}

/// Samples p with |z| ∈ [1/8, 8] (log-uniform), random direction and |t| ≤ 2.
pub fn k_tau_uniformity(kernel: Kernel3, taus: &[f64], samples: usize, seed: u64) -> Result<TauUniformity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<HPoint> = (0..samples)
        .map(|_| {
            let r = 2f64.powf(rng.gen_range(-3.0..3.0));
            let a: f64 = rng.gen_range(0.0..2.0 * PI);
            HPoint::new(r * a.cos(), r * a.sin(), rng.gen_range(-2.0..2.0))
        })
        .collect();
    let mut constants = Vec::with_capacity(taus.len());
    let mut odd: f64 = 0.0;
    for &tau in taus {
        let spec = KTauSpec::new(kernel, tau)?;
        let vals: Vec<Result<(f64, f64)>> = pts
            .par_iter()
            .map(|p| {
                let v = k_tau_eval(&spec, *p)?;
                let w = k_tau_eval(&spec, HPoint::new(-p.x, -p.y, p.t))?;
                Ok((p.horizontal_len() * v.norm(), (v + w).norm()))
            })
            .collect();
        let mut c: f64 = 0.0;
        for v in vals {
            let (a, b) = v?;
            c = c.max(a);
            odd = odd.max(b);
        }
        constants.push(c);
    }
    let mx = constants.iter().cloned().fold(0.0, f64::max);
    let mn = constants.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = if mx > 0.0 { (mx - mn) / mx } else { 0.0 };
    Ok(TauUniformity { taus: taus.to_vec(), constants, variation, oddness_defect: odd })
}

// ---------------------------------------------------------------- operators

/// ε-truncated (Korányi, sharp) operator on the parametrized flag.
pub fn assemble_flag(flag: &FlagSpec, kernel: Kernel3, grid: (usize, usize), epsilon: f64) -> Result<SioMatrix> {
    let (ny, nt) = grid;
    let n = ny.checked_mul(nt).ok_or_else(|| Error::Resource("grid size overflow".into()))?;
    if n > DENSE_CAP {
        return Err(Error::Resource(format!("{ny}×{nt} exceeds the dense cap {DENSE_CAP}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain("ε must be positive".into()));
    }
    let (nodes, weights) = flag_nodes(flag, ny, nt)?;
    let pts: Vec<HPoint> = nodes.iter().map(|(y, t)| param_unchecked(flag, *y, *t)).collect();
    let mut entries = vec![0.0; n * n];
    entries.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let p = pts[i];
        for (j, e) in row.iter_mut().enumerate() {
            if i == j {
                continue;
            }
            let q = pts[j].inv() * p;
            if heis::koranyi(q) > epsilon {
                *e = kernel.eval(q) * weights[j];
            }
        }
    });
    Ok(SioMatrix { n, entries: Entries::Real(entries), weights, epsilon, truncation: Truncation::Sharp })
}

/// Weighted L²(σ) norm of the ε-truncated flag operator.
pub fn sio3_norm(flag: &FlagSpec, kernel: Kernel3, grid: (usize, usize), epsilon: f64) -> Result<f64> {
    let m = assemble_flag(flag, kernel, grid, epsilon)?;
    sio::op_norm(&m, true)
}

/// max |M_{σa,σb} + M_{ab}| where σ reflects the y-index; vanishes for
/// horizontally odd kernels on the flat flag with a symmetric y-window.
pub fn involution_defect(m: &SioMatrix, ny: usize, nt: usize) -> f64 {
    let sigma = |a: usize| (ny - 1 - a / nt) * nt + a % nt;
    let mut d: f64 = 0.0;
    for a in 0..m.n {
        for b in 0..m.n {
            let v = m.get(a, b) + m.get(sigma(a), sigma(b));
            d = d.max(v.norm());
        }
    }
    d
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlagSweepRow {
    pub kernel: String,
    pub flag: String,
    pub epsilon: f64,
    pub ny: usize,
    pub nt: usize,
    pub op_norm: f64,
}

pub fn flag_sweep(flag: &FlagSpec, flag_name: &str, kernel: Kernel3, grid: (usize, usize), eps: &[f64]) -> Result<Vec<FlagSweepRow>> {
    eps.iter()
        .map(|&e| {
            Ok(FlagSweepRow {
                kernel: kernel.name(),
                flag: flag_name.to_string(),
                epsilon: e,
                ny: grid.0,
                nt: grid.1,
                op_norm: sio3_norm(flag, kernel, grid, e)?,
            })
        })
        .collect()
}

/// Operator norm of the reduced one-dimensional kernel
/// 𝔎_ρ(x, y) = k_ρ(γ_ρ(y)⁻¹·γ_ρ(x)) on n nodes of the rescaled profile window,
/// ρ = √τ, truncated at |x − y| > ε with Lebesgue weights.
pub fn reduced_op_norm(flag: &FlagSpec, kernel: Kernel3, tau: f64, n: usize, epsilon: f64) -> Result<f64> {
    let spec = KTauSpec::new(kernel, tau)?;
    let scaled = flag.rescaled(spec.rho);
    let (x0, x1) = scaled.y_window();
    let h = (x1 - x0) / n as f64;
    let xs: Vec<f64> = (0..n).map(|i| x0 + (i as f64 + 0.5) * h).collect();
    let pts: Vec<HPoint> = xs.iter().map(|x| param_unchecked(&scaled, *x, 0.0)).collect();
    let rows: Vec<Result<Vec<Complex64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                if (xs[i] - xs[j]).abs() > epsilon {
                    row[j] = k_tau_eval(&spec, pts[j].inv() * pts[i])? * h;
                }
            }
            Ok(row)
        })
        .collect();
    let mut entries = Vec::with_capacity(n * n);
    for r in rows {
        entries.extend(r?);
    }
    let m = SioMatrix { n, entries: Entries::Complex(entries), weights: vec![h; n], epsilon, truncation: Truncation::Sharp };
    sio::op_norm(&m, true)
}
