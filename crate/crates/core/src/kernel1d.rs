//! Convolution kernels on ℝ twisted by a Lipschitz function A and a tame map B:
//! Calderón-type commutators C_{m,n}, the exponential kernels K_{A,B} and their
//! Taylor expansion, with sampled strong-kernel constants.

use crate::error::{Error, Result};
use crate::heis::HPoint;
use crate::sampled;
use crate::sio::PairKernel;
use crate::tame::TameMapSampled;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Odd convolution kernel κ. `Custom` holds samples on u > 0, extended oddly
/// and by c/u beyond the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kappa {
    Reciprocal,
    Smoothed(f64),
    Custom { u: Vec<f64>, values: Vec<f64> },
}

impl Kappa {
    /// κ(u) before any normalization.
    pub fn eval(&self, u: f64) -> f64 {
        self.raw(u)
    }

    fn raw(&self, u: f64) -> f64 {
        match self {
            Kappa::Reciprocal => 1.0 / u,
            Kappa::Smoothed(e) => u / (u * u + e * e),
            Kappa::Custom { u: us, values } => {
                let a = u.abs();
                let s = u.signum();
                let (u0, u1) = (us[0], us[us.len() - 1]);
                let v = if a < u0 {
                    values[0] * u0 / a
                } else if a > u1 {
                    values[values.len() - 1] * u1 / a
                } else {
                    sampled::interp(us, values, a)
                };
                s * v
            }
        }
    }

    /// max over sample points of |u κ(u)| and u²|κ′(u)|.
    fn sampled_constant(&self) -> f64 {
        let us: Vec<f64> = match self {
            Kappa::Custom { u, .. } => u.clone(),
            _ => (0..2001).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 2000.0)).collect(),
        };
        let mut c: f64 = 0.0;
        for w in us.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ka, kb) = (self.raw(a), self.raw(b));
            c = c.max((a * ka).abs()).max((b * kb).abs());
            let d = (kb - ka) / (b - a);
            c = c.max(a * b * d.abs());
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QFn {
    Square,
    SignedSquare,
}

impl QFn {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            QFn::Square => u * u,
            QFn::SignedSquare => u * u.abs(),
        }
    }
}

/// Piecewise-linear function from samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFn {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledFn {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 || !sampled::is_increasing(&grid) {
            return Err(Error::Domain("sampled function needs matching increasing samples".into()));
        }
        Ok(SampledFn { grid, values })
    }

    pub fn zero(grid: Vec<f64>) -> Self {
        let n = grid.len();
        SampledFn { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.iter().map(|&x| f(x)).collect();
        SampledFn { grid, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.grid.binary_search_by(|g| g.partial_cmp(&x).unwrap()) {
            Ok(i) => self.values[i],
            Err(_) => sampled::interp(&self.grid, &self.values, x),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        sampled::lipschitz_const(&self.grid, &self.values)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }
}

/// (B₁(x), B₂(x)) with B₁ linear between nodes and B₂ its running integral plus
/// a linear share of the per-cell coupling defect. Exact at nodes.
pub fn tame_eval(b: &TameMapSampled, x: f64) -> (f64, f64) {
    let g = &b.grid;
    let i = match g.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return (b.b1[i], b.b2[i]),
        Err(i) => (i.max(1) - 1).min(g.len() - 2),
    };
    let h = g[i + 1] - g[i];
    let lam = (x - g[i]) / h;
    let p1 = b.b1[i] + lam * (b.b1[i + 1] - b.b1[i]);
    let defect = b.b2[i + 1] - b.b2[i] - 0.5 * h * (b.b1[i] + b.b1[i + 1]);
    let p2 = b.b2[i] + 0.5 * (x - g[i]) * (b.b1[i] + p1) + lam * defect;
    (p1, p2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel1D {
    pub kappa: Kappa,
    pub q_fn: QFn,
    pub a: SampledFn,
    pub b: TameMapSampled,
    pub m: u32,
    pub n: u32,
    pub d_a0: Option<SampledFn>,
    pub d_b0: Option<TameMapSampled>,
    /// Normalization making |κ(u)| ≤ 1/|u| and |κ′(u)| ≤ 1/u² on the samples.
    pub kappa_scale: f64,
}

impl Kernel1D {
    pub fn new(kappa: Kappa, q_fn: QFn, a: SampledFn, b: TameMapSampled, m: u32, n: u32) -> Result<Self> {
        if let Kappa::Custom { u, values } = &kappa {
            if u.len() != values.len() || u.len() < 2 || u[0] <= 0.0 || !sampled::is_increasing(u) {
                return Err(Error::Domain("custom kappa needs increasing positive sample points".into()));
            }
        }
        if let Kappa::Smoothed(e) = kappa {
            if !(e > 0.0) {
                return Err(Error::Domain("smoothing scale must be positive".into()));
            }
        }
        let c = kappa.sampled_constant();
        if !c.is_finite() {
            return Err(Error::Numeric("kappa is not finite on its samples".into()));
        }
        let kappa_scale = if c > 1.0 + 1e-9 { 1.0 / c } else { 1.0 };
        Ok(Kernel1D { kappa, q_fn, a, b, m, n, d_a0: None, d_b0: None, kappa_scale })
    }

    pub fn with_factors(mut self, d_a0: Option<SampledFn>, d_b0: Option<TameMapSampled>) -> Self {
        self.d_a0 = d_a0;
        self.d_b0 = d_b0;
        self
    }

    pub fn with_orders(&self, m: u32, n: u32) -> Self {
        Kernel1D { m, n, ..self.clone() }
    }

    /// Lipschitz constant of A (measured) and tame constant of B (declared).
    pub fn constants(&self) -> (f64, f64) {
        (self.a.lipschitz(), self.b.declared_constant)
    }

    pub fn kappa_at(&self, u: f64) -> f64 {
        self.kappa_scale * self.kappa.raw(u)
    }

    /// Certified constant of the normalized κ: at most 1.
    pub fn kappa_constant(&self) -> f64 {
        self.kappa_scale * self.kappa.sampled_constant()
    }

    pub fn domain(&self) -> (f64, f64) {
        let (a0, a1) = self.a.range();
        let (b0, b1) = (self.b.grid[0], self.b.grid[self.b.grid.len() - 1]);
        (a0.max(b0), a1.min(b1))
    }

    fn check(&self, x: f64, y: f64) -> Result<()> {
        if x == y {
            return Err(Error::Singularity("kernel evaluated on the diagonal".into()));
        }
        let (lo, hi) = self.domain();
        if x < lo || x > hi || y < lo || y > hi {
            return Err(Error::Domain(format!("({x}, {y}) outside the sampled domain [{lo}, {hi}]")));
        }
        Ok(())
    }

    pub fn a_quotient(&self, x: f64, y: f64) -> f64 {
        (self.a.eval(x) - self.a.eval(y)) / (x - y)
    }

    /// [B₂(x) − B₂(y) − ½(B₁(x) + B₁(y))(x − y)] / 𝔮(x − y).
    pub fn b_quotient(&self, x: f64, y: f64) -> f64 {
        let (bx1, bx2) = tame_eval(&self.b, x);
        let (by1, by2) = tame_eval(&self.b, y);
        (bx2 - by2 - 0.5 * (bx1 + by1) * (x - y)) / self.q_fn.eval(x - y)
    }

    pub fn d_factors(&self, x: f64, y: f64) -> f64 {
        let mut f = 1.0;
        if let Some(a0) = &self.d_a0 {
            f *= (a0.eval(x) - a0.eval(y)) / (x - y);
        }
        if let Some(b0) = &self.d_b0 {
            let (bx1, bx2) = tame_eval(b0, x);
            let (by1, by2) = tame_eval(b0, y);
            let u = x - y;
            f *= (bx2 - by2 - 0.5 * (bx1 + by1) * u) / (u * u);
        }
        f
    }

    fn commutator_raw(&self, x: f64, y: f64) -> f64 {
        let mut v = self.kappa_at(x - y);
        if self.m > 0 {
            v *= self.a_quotient(x, y).powi(self.m as i32);
        }
        if self.n > 0 {
            v *= self.b_quotient(x, y).powi(self.n as i32);
        }
        v * self.d_factors(x, y)
    }

    fn exp_raw(&self, x: f64, y: f64) -> Complex64 {
        let phase = 2.0 * PI * (self.a_quotient(x, y) + self.b_quotient(x, y));
        Complex64::from_polar(self.kappa_at(x - y) * self.d_factors(x, y), phase)
    }

    /// κ(x−y)·[ΔA/Δ]^m·[B-quotient]^n·(D factors).
    pub fn commutator_eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x, y)?;
        Ok(self.commutator_raw(x, y))
    }

    /// κ(x−y)·exp(2πi[ΔA/Δ + B-quotient])·(D factors).
    pub fn exp_kernel_eval(&self, x: f64, y: f64) -> Result<Complex64> {
        self.check(x, y)?;
        Ok(self.exp_raw(x, y))
    }

    /// Σ_{k ≤ order} (2πi)^k S_k / k! and the remainder bound
    /// |κ·D|(2π|θ|)^{order+1}/(order+1)!.
    pub fn taylor_sum(&self, x: f64, y: f64, order: u32) -> Result<(Complex64, f64)> {
        self.check(x, y)?;
        let base = self.kappa_at(x - y) * self.d_factors(x, y);
        let theta = self.a_quotient(x, y) + self.b_quotient(x, y);
        let z = Complex64::new(0.0, 2.0 * PI * theta);
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..=order {
            term = term * z / k as f64;
            sum += term;
        }
        let mut bound = base.abs();
        for k in 1..=(order + 1) {
            bound *= 2.0 * PI * theta.abs() / k as f64;
        }
        Ok((sum * base, bound))
    }
}

/// C_{m,n} as a pair kernel on the parameter line.
pub struct Commutator<'a>(pub &'a Kernel1D);

/// K_{A,B} as a pair kernel on the parameter line.
pub struct ExpKernel<'a>(pub &'a Kernel1D);

/// κ alone as a pair kernel on the parameter line.
pub struct KappaKernel<'a>(pub &'a Kernel1D);

impl PairKernel for Commutator<'_> {
    fn eval(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> Complex64 {
        Complex64::new(self.0.commutator_raw(x, y), 0.0)
    }
    fn distance(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> f64 {
        (x - y).abs()
    }
    fn is_real(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("commutator_{}_{}", self.0.m, self.0.n)
    }
}

impl PairKernel for ExpKernel<'_> {
    fn eval(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> Complex64 {
        self.0.exp_raw(x, y)
    }
    fn distance(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> f64 {
        (x - y).abs()
    }
    fn name(&self) -> String {
        "exp_kernel".into()
    }
}

impl PairKernel for KappaKernel<'_> {
    fn eval(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> Complex64 {
        Complex64::new(self.0.kappa_at(x - y), 0.0)
    }
    fn distance(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> f64 {
        (x - y).abs()
    }
    fn is_real(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        "kappa".into()
    }
}

/// Sampled ‖K‖_{1,strong} on a window: size |K|·|x−y| and the α = 1 Hölder
/// quotient in either variable, over triples with |x − x′| ≤ |x − y|/2.
pub fn strong_constant_1d<F>(k: F, window: (f64, f64), samples: usize, seed: u64) -> f64
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let (a, b) = window;
    let len = b - a;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::with_capacity(samples);
    while triples.len() < samples {
        let x = rng.gen_range(a..b);
        let r = len * 10f64.powf(rng.gen_range(-3.0..(0.5f64).log10()));
        let y = if rng.gen_bool(0.5) { x + r } else { x - r };
        let s = r * 10f64.powf(rng.gen_range(-3.0..(0.5f64).log10()));
        let xp = if rng.gen_bool(0.5) { x + s } else { x - s };
        if y < a || y > b || xp < a || xp > b {
            continue;
        }
        triples.push((x, xp, y));
    }
    triples
        .par_iter()
        .map(|&(x, xp, y)| {
            let r = (x - y).abs();
            let s = (x - xp).abs();
            let kxy = k(x, y);
            let kyx = k(y, x);
            let size = r * kxy.norm().max(kyx.norm());
            let hold = (kxy - k(xp, y)).norm().max((kyx - k(y, xp)).norm()) * r * r / s;
            size.max(hold)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// (m, n, measured strong constant).
    pub constants: Vec<(u32, u32, f64)>,
    /// Smallest C with constant ≤ C^{m+n+1} for all listed (m, n).
    pub fitted_c: f64,
}

/// Strong constants of C_{m,n} for m + n ≤ max_order.
pub fn commutator_growth(base: &Kernel1D, max_order: u32, samples: usize, seed: u64) -> GrowthReport {
    let window = base.domain();
    let mut constants = Vec::new();
    let mut fitted_c: f64 = 0.0;
    for total in 0..=max_order {
        for m in 0..=total {
            let k = base.with_orders(m, total - m);
            let c = strong_constant_1d(|x, y| Complex64::new(k.commutator_raw(x, y), 0.0), window, samples, seed);
            fitted_c = fitted_c.max(c.powf(1.0 / (total + 1) as f64));
            constants.push((m, total - m, c));
        }
    }
    GrowthReport { constants, fitted_c }
}

/// Sampled strong constant of K_{A,B}.
pub fn exp_kernel_strong(k: &Kernel1D, samples: usize, seed: u64) -> f64 {
    strong_constant_1d(|x, y| k.exp_raw(x, y), k.domain(), samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::linspace;
    use crate::tame::TameLinear;

    fn dyadic_grid() -> Vec<f64> {
        linspace(-1.0, 1.0, 257)
    }

    fn base(m: u32, n: u32) -> Kernel1D {
        let g = dyadic_grid();
        let a = SampledFn::from_fn(g.clone(), |x| 0.5 * (3.0 * x).sin());
        let b = TameMapSampled::from_b1(g.clone(), g.iter().map(|x| (2.0 * x).cos() * 0.5).collect(), 0.0, 1.0).unwrap();
        Kernel1D::new(Kappa::Reciprocal, QFn::Square, a, b, m, n).unwrap()
    }

    #[test]
    fn reduces_to_kappa() {
        let k = base(0, 0);
        let (x, y) = (0.25, -0.5);
        assert_eq!(k.commutator_eval(x, y).unwrap(), 1.0 / (x - y));
        assert!(k.commutator_eval(x, x).is_err());
        assert!(k.commutator_eval(2.0, 0.0).is_err());
        // A ≡ 0 and B tame-linear: the phase vanishes exactly on the grid
        let g = dyadic_grid();
        let lin = TameLinear { a: 0.5, b: 0.125, c: -0.25 }.sample(&g);
        let k = Kernel1D::new(Kappa::Reciprocal, QFn::SignedSquare, SampledFn::zero(g.clone()), lin, 0, 3).unwrap();
        for (i, j) in [(3usize, 200usize), (100, 101), (256, 0)] {
            let (x, y) = (g[i], g[j]);
            assert_eq!(k.exp_kernel_eval(x, y).unwrap(), Complex64::new(1.0 / (x - y), 0.0));
            assert_eq!(k.commutator_eval(x, y).unwrap(), 0.0);
        }
    }

    #[test]
    fn affine_a_factor() {
        let g = dyadic_grid();
        let a = SampledFn::from_fn(g.clone(), |x| 0.75 * x);
        let b = TameLinear { a: 0.0, b: 0.0, c: 0.0 }.sample(&g);
        let k = Kernel1D::new(Kappa::Smoothed(0.1), QFn::Square, a, b, 1, 0).unwrap();
        for (x, y) in [(0.3, -0.2), (0.01, 0.9)] {
            let v = k.commutator_eval(x, y).unwrap();
            assert!((v - 0.75 * k.kappa_at(x - y)).abs() < 1e-14);
        }
    }

    #[test]
    fn modulus_and_taylor() {
        let k = base(0, 0);
        for (x, y) in [(0.3, -0.2), (0.01, 0.9), (-0.77, -0.75)] {
            let v = k.exp_kernel_eval(x, y).unwrap();
            assert!((v.norm() - (1.0 / (x - y)).abs()).abs() < 1e-12 * v.norm());
            for order in [2u32, 6, 12, 20, 40] {
                let (s, bound) = k.taylor_sum(x, y, order).unwrap();
                let err = (s - v).norm();
                assert!(err <= bound * (1.0 + 1e-9) + 1e-13 * v.norm());
            }
            let (s, _) = k.taylor_sum(x, y, 40).unwrap();
            assert!((s - v).norm() <= 1e-8 * v.norm());
        }
    }

    #[test]
    fn kappa_normalization() {
        let u = linspace(0.01, 10.0, 400);
        let vals: Vec<f64> = u.iter().map(|u| 3.0 / u).collect();
        let g = dyadic_grid();
        let k = Kernel1D::new(Kappa::Custom { u, values: vals }, QFn::Square, SampledFn::zero(g.clone()), TameLinear { a: 0.0, b: 0.0, c: 0.0 }.sample(&g), 0, 0)
            .unwrap();
        assert!(k.kappa_constant() <= 1.0 + 1e-12);
        assert!((k.kappa_at(-2.0) + k.kappa_at(2.0)).abs() < 1e-15);
        let r = base(0, 0);
        assert_eq!(r.kappa_scale, 1.0);
    }

    #[test]
    fn strong_constants_grow_geometrically() {
        let rep = commutator_growth(&base(0, 0), 2, 2000, 7);
        assert!(rep.fitted_c.is_finite() && rep.fitted_c >= 1.0);
        let c00 = rep.constants[0].2;
        assert!(c00 >= 1.0 && c00 < 3.0, "{c00}");
    }
}
