//! Dense discretizations of truncated singular integral operators on curves,
//! weighted operator norms, maximal operators, T1 testing integrals and the
//! annulus structure of D-truncations.

use crate::bump;
use crate::corona::{tree_distance, TreeRegionData};
use crate::error::{Error, Result};
use crate::heis::{self, HPoint, NormKind};
use crate::ilg::Curve;
use crate::kernels::{self, KernelSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// A kernel on pairs of curve samples, each given by its parameter and point.
pub trait PairKernel: Sync {
    fn eval(&self, x: f64, p: HPoint, y: f64, q: HPoint) -> Complex64;

    /// Distance used by truncations.
    fn distance(&self, _x: f64, p: HPoint, _y: f64, q: HPoint) -> f64 {
        heis::dist(p, q, NormKind::Koranyi)
    }

    fn is_real(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

impl PairKernel for KernelSpec {
    fn eval(&self, _x: f64, p: HPoint, _y: f64, q: HPoint) -> Complex64 {
        Complex64::new(kernels::pair_unchecked(*self, p, q), 0.0)
    }

    fn is_real(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        KernelSpec::name(self)
    }
}

/// Convolution kernels of the parameter difference: the Hilbert kernel, its
/// positive non-cancelling counterpart, and zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LineKernel {
    Hilbert,
    AbsReciprocal,
    Zero,
}

impl PairKernel for LineKernel {
    fn eval(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> Complex64 {
        let u = x - y;
        Complex64::new(
            match self {
                LineKernel::Hilbert => 1.0 / u,
                LineKernel::AbsReciprocal => 1.0 / u.abs(),
                LineKernel::Zero => 0.0,
            },
            0.0,
        )
    }

    fn distance(&self, x: f64, _p: HPoint, y: f64, _q: HPoint) -> f64 {
        (x - y).abs()
    }

    fn is_real(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        match self {
            LineKernel::Hilbert => "hilbert".into(),
            LineKernel::AbsReciprocal => "abs_reciprocal".into(),
            LineKernel::Zero => "zero".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Truncation {
    /// d(x, y) > ε.
    Sharp,
    /// ψ_ε(d) = 1 − φ(d/ε) with the fixed cut-off φ.
    Smooth,
    /// x ∈ Q(𝒯), D(x, y) ≤ d(x, y) ≤ ρ and d(x, y) > ε.
    ByD(Box<TreeRegionData>),
}

impl Truncation {
    pub fn name(&self) -> &'static str {
        match self {
            Truncation::Sharp => "sharp",
            Truncation::Smooth => "smooth",
            Truncation::ByD(_) => "by_d",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Entries {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Row-major n×n matrix with entries K(p_i, p_j)·w_j·cutoff.
#[derive(Debug, Clone)]
pub struct SioMatrix {
    pub n: usize,
    pub entries: Entries,
    pub weights: Vec<f64>,
    pub epsilon: f64,
    pub truncation: Truncation,
}

impl SioMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match &self.entries {
            Entries::Real(v) => Complex64::new(v[i * self.n + j], 0.0),
            Entries::Complex(v) => v[i * self.n + j],
        }
    }

    pub fn is_finite(&self) -> bool {
        match &self.entries {
            Entries::Real(v) => v.iter().all(|x| x.is_finite()),
            Entries::Complex(v) => v.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        }
    }

    /// (Mf)_i = Σ_j M_ij f_j, one sequential sum per row.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        match &self.entries {
            Entries::Real(v) => v
                .par_chunks(n)
                .map(|row| row.iter().zip(f).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + b * *a))
                .collect(),
            Entries::Complex(v) => v
                .par_chunks(n)
                .map(|row| row.iter().zip(f).fold(Complex64::new(0.0, 0.0), |acc, (a, b)| acc + a * b))
                .collect(),
        }
    }

    pub fn apply_real(&self, f: &[f64]) -> Vec<Complex64> {
        let fc: Vec<Complex64> = f.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        self.apply(&fc)
    }

    pub fn max_abs_antisymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self.get(i, j) + self.get(j, i)).norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        match &self.entries {
            Entries::Real(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Entries::Complex(v) => v.iter().fold(0.0, |m, x| m.max(x.norm())),
        }
    }
}

/// Largest distance between consecutive samples.
pub fn max_gap<K: PairKernel + ?Sized>(kernel: &K, params: &[f64], points: &[HPoint]) -> f64 {
    (1..params.len())
        .map(|i| kernel.distance(params[i - 1], points[i - 1], params[i], points[i]))
        .fold(0.0, f64::max)
}

pub(crate) fn assemble_nodes<K: PairKernel + ?Sized>(
    kernel: &K,
    params: &[f64],
    points: &[HPoint],
    weights: &[f64],
    epsilon: f64,
    truncation: Truncation,
) -> Result<SioMatrix> {
    let n = params.len();
    if n == 0 || points.len() != n || weights.len() != n {
        return Err(Error::Domain("empty or inconsistent sample set".into()));
    }
    if matches!(truncation, Truncation::Sharp) {
        let guard = 2.0 * max_gap(kernel, params, points);
        if epsilon < guard {
            return Err(Error::Discretization(format!("epsilon {epsilon} is below the guard 2·gap = {guard}")));
        }
    }
    if !(epsilon > 0.0) && !matches!(truncation, Truncation::ByD(_)) {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    let (dvals, rho, top) = match &truncation {
        Truncation::ByD(r) => {
            let d: Vec<f64> = params.par_iter().map(|&x| tree_distance(&r.tree, x)).collect();
            (d, r.rho, Some(r.tree.top))
        }
        _ => (Vec::new(), f64::INFINITY, None),
    };
    let cut = |i: usize, j: usize, d: f64| -> f64 {
        if i == j {
            return 0.0;
        }
        match &truncation {
            Truncation::Sharp => (d > epsilon) as u8 as f64,
            Truncation::Smooth => 1.0 - bump::cutoff(d / epsilon),
            Truncation::ByD(_) => {
                let inside = top.map(|t| t.contains_point(params[i])).unwrap_or(false);
                let big_d = 0.25 * (dvals[i] + dvals[j]);
                (inside && d >= big_d && d <= rho && d > epsilon) as u8 as f64
            }
        }
    };
    let row = |i: usize, j: usize| -> Complex64 {
        let d = kernel.distance(params[i], points[i], params[j], points[j]);
        let c = cut(i, j, d);
        if c == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            kernel.eval(params[i], points[i], params[j], points[j]) * (c * weights[j])
        }
    };
    let entries = if kernel.is_real() {
        let mut v = vec![0.0; n * n];
        v.par_chunks_mut(n).enumerate().for_each(|(i, r)| {
            for (j, e) in r.iter_mut().enumerate() {
                *e = row(i, j).re;
            }
        });
        Entries::Real(v)
    } else {
        let mut v = vec![Complex64::new(0.0, 0.0); n * n];
        v.par_chunks_mut(n).enumerate().for_each(|(i, r)| {
            for (j, e) in r.iter_mut().enumerate() {
                *e = row(i, j);
            }
        });
        Entries::Complex(v)
    };
    let m = SioMatrix { n, entries, weights: weights.to_vec(), epsilon, truncation };
    if !m.is_finite() {
        return Err(Error::Numeric("non-finite kernel entry".into()));
    }
    Ok(m)
}

/// ε-SIO of a kernel on a curve with its measure weights.
pub fn assemble_sio<K: PairKernel + ?Sized>(kernel: &K, curve: &Curve, epsilon: f64, truncation: Truncation) -> Result<SioMatrix> {
    assemble_nodes(kernel, &curve.params, &curve.points, &curve.weights, epsilon, truncation)
}

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 10_000;
const CHUNK: usize = 64;

/// Spectral norm of W^{1/2} M W^{−1/2} (weighted) or of M, by power iteration on
/// the Gram matrix with a fixed start vector. Row blocks of fixed size keep the
/// reductions independent of the thread count.
pub fn op_norm(m: &SioMatrix, weighted: bool) -> Result<f64> {
    op_norm_with(m, weighted, POWER_TOL, POWER_MAX_ITER)
}

pub fn op_norm_with(m: &SioMatrix, weighted: bool, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.n;
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    let (sl, sr): (Vec<f64>, Vec<f64>) = if weighted {
        (
            m.weights.iter().map(|w| w.sqrt()).collect(),
            m.weights.iter().map(|w| if *w > 0.0 { 1.0 / w.sqrt() } else { 0.0 }).collect(),
        )
    } else {
        (vec![1.0; n], vec![1.0; n])
    };
    if let Entries::Real(v) = &m.entries {
        return power_real(v, n, &sl, &sr, tol, max_iter);
    }
    // S = diag(sl) M diag(sr); S v and S* u
    let s_apply = |v: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = v.iter().zip(&sr).map(|(a, s)| a * *s).collect();
        m.apply(&scaled).iter().zip(&sl).map(|(a, s)| a * *s).collect()
    };
    let s_adjoint = |u: &[Complex64]| -> Vec<Complex64> {
        let scaled: Vec<Complex64> = u.iter().zip(&sl).map(|(a, s)| a * *s).collect();
        let partials: Vec<Vec<Complex64>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for i in b * CHUNK..((b + 1) * CHUNK).min(n) {
                    let ui = scaled[i];
                    match &m.entries {
                        Entries::Real(v) => {
                            for (a, e) in acc.iter_mut().zip(&v[i * n..(i + 1) * n]) {
                                *a += ui * *e;
                            }
                        }
                        Entries::Complex(v) => {
                            for (a, e) in acc.iter_mut().zip(&v[i * n..(i + 1) * n]) {
                                *a += e.conj() * ui;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for p in partials {
            for (o, x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
        out.iter().zip(&sr).map(|(a, s)| a * *s).collect()
    };
    let norm2 = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5))).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let u = s_apply(&v);
        let w = s_adjoint(&u);
        let nw = norm2(&w);
        let rq = u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if nw == 0.0 {
            return Ok(0.0);
        }
        residual = (rq - lambda).abs() / rq;
        lambda = rq;
        v = w.into_iter().map(|z| z / nw).collect();
        if residual <= tol {
            return Ok(lambda.sqrt());
        }
    }
    Err(Error::Iteration { iterations: max_iter, residual })
}

/// Real-arithmetic version of the iteration above for real matrices.
fn power_real(m: &[f64], n: usize, sl: &[f64], sr: &[f64], tol: f64, max_iter: usize) -> Result<f64> {
    let s_apply = |v: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = v.iter().zip(sr).map(|(a, s)| a * s).collect();
        m.par_chunks(n)
            .zip(sl.par_iter())
            .map(|(row, s)| s * row.iter().zip(&scaled).fold(0.0, |acc, (a, b)| acc + a * b))
            .collect()
    };
    let s_adjoint = |u: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = u.iter().zip(sl).map(|(a, s)| a * s).collect();
        let partials: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![0.0; n];
                for i in b * CHUNK..((b + 1) * CHUNK).min(n) {
                    let ui = scaled[i];
                    for (a, e) in acc.iter_mut().zip(&m[i * n..(i + 1) * n]) {
                        *a += ui * e;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0; n];
        for p in partials {
            for (o, x) in out.iter_mut().zip(p) {
                *o += x;
            }
        }
        out.iter().zip(sr).map(|(a, s)| a * s).collect()
    };
    let norm2 = |v: &[f64]| v.iter().map(|z| z * z).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let u = s_apply(&v);
        let w = s_adjoint(&u);
        let nw = norm2(&w);
        let rq = u.iter().map(|z| z * z).sum::<f64>();
        if nw == 0.0 {
            return Ok(0.0);
        }
        residual = (rq - lambda).abs() / rq;
        lambda = rq;
        v = w.into_iter().map(|z| z / nw).collect();
        if residual <= tol {
            return Ok(lambda.sqrt());
        }
    }
    Err(Error::Iteration { iterations: max_iter, residual })
}

/// Largest singular value of W^{1/2} M W^{−1/2} from a dense SVD.
pub fn op_norm_dense(m: &SioMatrix, weighted: bool) -> f64 {
    let n = m.n;
    let scale = |i: usize, j: usize| -> f64 {
        if weighted {
            let (wi, wj) = (m.weights[i], m.weights[j]);
            if wj > 0.0 {
                (wi / wj).sqrt()
            } else {
                0.0
            }
        } else {
            1.0
        }
    };
    match &m.entries {
        Entries::Real(v) => {
            let a = DMatrix::from_fn(n, n, |i, j| v[i * n + j] * scale(i, j));
            a.singular_values().max()
        }
        Entries::Complex(v) => {
            let a = DMatrix::from_fn(n, n, |i, j| v[i * n + j] * scale(i, j));
            a.singular_values().max()
        }
    }
}

/// Pointwise sup over the ε grid of |T_{μ,ε} f| with sharp truncations.
pub fn maximal_sio<K: PairKernel + ?Sized>(kernel: &K, curve: &Curve, f: &[f64], eps_grid: &[f64]) -> Result<Vec<f64>> {
    if eps_grid.is_empty() {
        return Err(Error::Domain("empty epsilon grid".into()));
    }
    if f.len() != curve.len() {
        return Err(Error::Domain("function and curve differ in length".into()));
    }
    let mut out = vec![0.0f64; f.len()];
    for &eps in eps_grid {
        let m = assemble_sio(kernel, curve, eps, Truncation::Sharp)?;
        for (o, v) in out.iter_mut().zip(m.apply_real(f)) {
            *o = o.max(v.norm());
        }
    }
    Ok(out)
}

/// Non-centred Hardy–Littlewood maximal function over parameter intervals,
/// with respect to the curve weights.
pub fn hl_maximal(weights: &[f64], f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut cw = vec![0.0; n + 1];
    let mut cf = vec![0.0; n + 1];
    for i in 0..n {
        cw[i + 1] = cw[i] + weights[i];
        cf[i + 1] = cf[i] + weights[i] * f[i].abs();
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best: f64 = f[i].abs();
            for a in 0..=i {
                for b in (i + 1)..=n {
                    let w = cw[b] - cw[a];
                    if w > 0.0 {
                        best = best.max((cf[b] - cf[a]) / w);
                    }
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CotlarReport {
    pub constant: f64,
    pub operator_norm: f64,
}

/// Smallest C with T*f ≤ C(M(|Tf|) + ‖T‖Mf) on the samples, with T the
/// finest truncation in the grid.
pub fn cotlar_audit<K: PairKernel + ?Sized>(kernel: &K, curve: &Curve, f: &[f64], eps_grid: &[f64]) -> Result<CotlarReport> {
    let tstar = maximal_sio(kernel, curve, f, eps_grid)?;
    let eps0 = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let m = assemble_sio(kernel, curve, eps0, Truncation::Sharp)?;
    let norm = op_norm(&m, true)?;
    let tf: Vec<f64> = m.apply_real(f).iter().map(|z| z.norm()).collect();
    let mtf = hl_maximal(&curve.weights, &tf);
    let mf = hl_maximal(&curve.weights, f);
    let constant = tstar
        .iter()
        .zip(mtf.iter().zip(&mf))
        .map(|(t, (a, b))| {
            let den = a + norm * b;
            if den > 0.0 {
                t / den
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    Ok(CotlarReport { constant, operator_norm: norm })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T1Report {
    pub forward: f64,
    pub transpose: f64,
}

/// Averages over B₀ = B(x₀, r) of |T̃_ε b| and |T̃ᵗ_ε b| with the smooth ε-SIO on
/// the parameter line, b = 1 on 2B₀ and 0 off 3B₀.
pub fn t1_test<K: PairKernel + ?Sized>(kernel: &K, grid: &[f64], x0: f64, r: f64, epsilon: f64) -> Result<T1Report> {
    let n = grid.len();
    if n < 2 || grid[0] > x0 - 3.0 * r || grid[n - 1] < x0 + 3.0 * r {
        return Err(Error::Domain("the window does not contain 3B₀".into()));
    }
    let h = crate::sampled::uniform_spacing(grid)?;
    if epsilon < 2.0 * h {
        return Err(Error::Discretization(format!("epsilon {epsilon} below the guard {}", 2.0 * h)));
    }
    let pt = |x: f64| HPoint::new(x, 0.0, 0.0);
    let b: Vec<f64> = grid.iter().map(|y| bump::plateau((y - x0) / r, 2.0, 3.0)).collect();
    let w = |j: usize| if j == 0 || j == n - 1 { 0.5 * h } else { h };
    let ball: Vec<usize> = (0..n).filter(|&i| (grid[i] - x0).abs() < r).collect();
    let eval = |transpose: bool| -> f64 {
        let s: f64 = ball
            .par_iter()
            .map(|&i| {
                let x = grid[i];
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &y) in grid.iter().enumerate() {
                    if b[j] == 0.0 || i == j {
                        continue;
                    }
                    let psi = 1.0 - bump::cutoff((x - y).abs() / epsilon);
                    if psi == 0.0 {
                        continue;
                    }
                    let k = if transpose { kernel.eval(y, pt(y), x, pt(x)).conj() } else { kernel.eval(x, pt(x), y, pt(y)) };
                    acc += k * (psi * b[j] * w(j));
                }
                acc.norm()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum();
        s / ball.len() as f64
    };
    Ok(T1Report { forward: eval(false), transpose: eval(true) })
}

/// Max over random (B, x, x₀) of the radius ratio of the smallest annuli around
/// x₀ covering the points y ∉ 2B where exactly one of K^D(x, y), K^D(x₀, y)
/// is cut, with D(x, y) = (d(x) + d(y))/4.
pub fn annulus_audit(tree: &TreeRegionData, grid: &[f64], trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d: Vec<f64> = grid.iter().map(|&x| tree_distance(&tree.tree, x)).collect();
    let (a, b) = (grid[0], grid[grid.len() - 1]);
    let dfun = |x: f64| tree_distance(&tree.tree, x);
    let mut worst: f64 = 1.0;
    for _ in 0..trials {
        let c = rng.gen_range(a..b);
        let r = (b - a) * 10f64.powf(rng.gen_range(-3.0..-1.0));
        let x = c + r * rng.gen_range(-1.0..1.0);
        let x0 = c + r * rng.gen_range(-1.0..1.0);
        let (dx, dx0) = (dfun(x), dfun(x0));
        let mut sets: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for (y, dy) in grid.iter().zip(&d) {
            if (y - c).abs() < 2.0 * r {
                continue;
            }
            let keep_x = (x - y).abs() >= 0.25 * (dx + dy);
            let keep_x0 = (x0 - y).abs() >= 0.25 * (dx0 + dy);
            if keep_x0 && !keep_x {
                sets[0].push((x0 - y).abs());
            } else if keep_x && !keep_x0 {
                sets[1].push((x0 - y).abs());
            }
        }
        for s in &sets {
            if let (Some(lo), Some(hi)) = (s.iter().cloned().reduce(f64::min), s.iter().cloned().reduce(f64::max)) {
                if lo > 0.0 {
                    worst = worst.max(hi / lo);
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub kernel: String,
    pub curve: String,
    pub epsilon: f64,
    pub n: usize,
    pub op_norm: f64,
    pub assembly_seconds: f64,
}

pub fn sweep<K: PairKernel + ?Sized>(kernel: &K, curve: &Curve, curve_name: &str, eps: &[f64]) -> Result<Vec<SweepRow>> {
    eps.iter()
        .map(|&e| {
            let t = std::time::Instant::now();
            let m = assemble_sio(kernel, curve, e, Truncation::Sharp)?;
            let secs = t.elapsed().as_secs_f64();
            Ok(SweepRow {
                kernel: kernel.name(),
                curve: curve_name.to_string(),
                epsilon: e,
                n: curve.len(),
                op_norm: op_norm(&m, true)?,
                assembly_seconds: secs,
            })
        })
        .collect()
}

/// max over consecutive ε ≤ `beyond` of (max − min)/min of the op_norm column.
pub fn relative_variation(rows: &[SweepRow], beyond: f64) -> f64 {
    let vals: Vec<f64> = rows.iter().filter(|r| r.epsilon <= beyond).map(|r| r.op_norm).collect();
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().cloned().fold(0.0, f64::max);
    (hi - lo) / lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heis::HPoint;

    fn x_axis(n: usize) -> Curve {
        Curve::horizontal_line(HPoint::ORIGIN, 0.0, 0.0, 1.0, n).unwrap()
    }

    #[test]
    fn hilbert_matrix_structure() {
        let c = x_axis(65);
        let m = assemble_sio(&LineKernel::Hilbert, &c, 1.0 / 16.0, Truncation::Sharp).unwrap();
        let r = assemble_sio(&KernelSpec::RieszX, &c, 1.0 / 16.0, Truncation::Sharp).unwrap();
        for i in 0..65 {
            assert_eq!(m.get(i, i).re, 0.0);
            for j in 0..65 {
                let (x, y) = (c.params[i], c.params[j]);
                let want = if (x - y).abs() > 1.0 / 16.0 { c.weights[j] / (x - y) } else { 0.0 };
                assert!((m.get(i, j).re - want).abs() <= 1e-12 * want.abs().max(1.0));
                assert!((r.get(i, j).re - want).abs() <= 1e-12 * want.abs().max(1.0));
            }
        }
        // antisymmetric once the weights are conjugated away
        let mut asym: f64 = 0.0;
        for i in 0..65 {
            for j in 0..65 {
                let a = m.get(i, j).re / c.weights[j] + m.get(j, i).re / c.weights[i];
                asym = asym.max(a.abs());
            }
        }
        assert_eq!(asym, 0.0);
        let z = assemble_sio(&KernelSpec::ChousionisLi(1.5), &c, 1.0 / 16.0, Truncation::Sharp).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert!(matches!(
            assemble_sio(&LineKernel::Hilbert, &c, 1.0 / 64.0, Truncation::Sharp),
            Err(Error::Discretization(_))
        ));
    }

    #[test]
    fn norms_of_simple_matrices() {
        let c = x_axis(33);
        let z = assemble_sio(&LineKernel::Zero, &c, 0.1, Truncation::Sharp).unwrap();
        assert_eq!(op_norm(&z, true).unwrap(), 0.0);
        let d: Vec<f64> = (0..9).map(|i| (i as f64 - 4.0) * 0.3).collect();
        let mut v = vec![0.0; 81];
        for i in 0..9 {
            v[i * 9 + i] = d[i];
        }
        let diag = SioMatrix { n: 9, entries: Entries::Real(v), weights: vec![1.0; 9], epsilon: 1.0, truncation: Truncation::Sharp };
        assert!((op_norm(&diag, true).unwrap() - 1.2).abs() < 1e-8);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let c = x_axis(512);
        for eps in [1.0 / 8.0, 1.0 / 64.0] {
            let m = assemble_sio(&LineKernel::Hilbert, &c, eps, Truncation::Sharp).unwrap();
            let p = op_norm(&m, true).unwrap();
            let s = op_norm_dense(&m, true);
            assert!((p - s).abs() <= 1e-6 * s, "{p} vs {s}");
        }
    }

    #[test]
    fn maximal_is_monotone_in_the_grid() {
        let c = x_axis(129);
        let f: Vec<f64> = c.params.iter().map(|x| (7.0 * x).sin()).collect();
        let a = maximal_sio(&LineKernel::Hilbert, &c, &f, &[0.1, 0.05]).unwrap();
        let b = maximal_sio(&LineKernel::Hilbert, &c, &f, &[0.1, 0.05, 0.025]).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| y >= x));
        let zero = maximal_sio(&LineKernel::Hilbert, &c, &vec![0.0; 129], &[0.1]).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let rep = cotlar_audit(&LineKernel::Hilbert, &c, &f, &[0.2, 0.1, 0.05, 0.025]).unwrap();
        assert!(rep.constant.is_finite() && rep.constant > 0.0);
    }

    #[test]
    fn t1_of_the_hilbert_kernel() {
        let g = crate::sampled::linspace(-4.0, 4.0, 8 * 1024 + 1);
        let a = t1_test(&LineKernel::Hilbert, &g, 0.0, 1.0, 1.0 / 64.0).unwrap();
        let b = t1_test(&LineKernel::Hilbert, &g, 0.0, 1.0, 1.0 / 128.0).unwrap();
        assert!(a.forward.is_finite() && a.forward > 0.0);
        assert!((a.forward - b.forward).abs() <= 0.1 * a.forward);
        assert!((a.forward - a.transpose).abs() <= 1e-9 * a.forward);
        let z = t1_test(&LineKernel::Zero, &g, 0.0, 1.0, 1.0 / 64.0).unwrap();
        assert_eq!(z.forward, 0.0);
        assert!(t1_test(&LineKernel::Hilbert, &g, 0.0, 2.0, 1.0 / 64.0).is_err());
    }
}
