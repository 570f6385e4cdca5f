//! Kernels on the Heisenberg group: Riesz-type, horizontal gradient of log-norm,
//! and the non-negative Chousionis–Li family. All use the Korányi norm.

use crate::error::{Error, Result};
use crate::heis::{self, dilate_unchecked, HPoint, NormKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    RieszX,
    RieszY,
    RieszT,
    GradLogX,
    GradLogY,
    ChousionisLi(f64),
}

impl KernelSpec {
    pub const GOOD: [KernelSpec; 5] = [
        KernelSpec::RieszX,
        KernelSpec::RieszY,
        KernelSpec::RieszT,
        KernelSpec::GradLogX,
        KernelSpec::GradLogY,
    ];

    pub fn chousionis_li(alpha: f64) -> Result<Self> {
        if !(alpha >= 1.0) {
            return Err(Error::Domain(format!("Chousionis-Li exponent must be >= 1, got {alpha}")));
        }
        Ok(KernelSpec::ChousionisLi(alpha))
    }

    pub fn norm_kind(&self) -> NormKind {
        NormKind::Koranyi
    }

    pub fn name(&self) -> String {
        match self {
            KernelSpec::RieszX => "riesz_x".into(),
            KernelSpec::RieszY => "riesz_y".into(),
            KernelSpec::RieszT => "riesz_t".into(),
            KernelSpec::GradLogX => "gradlog_x".into(),
            KernelSpec::GradLogY => "gradlog_y".into(),
            KernelSpec::ChousionisLi(a) => format!("chousionis_li_{a}"),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "riesz_x" => Some(KernelSpec::RieszX),
            "riesz_y" => Some(KernelSpec::RieszY),
            "riesz_t" => Some(KernelSpec::RieszT),
            "gradlog_x" => Some(KernelSpec::GradLogX),
            "gradlog_y" => Some(KernelSpec::GradLogY),
            _ => s
                .strip_prefix("chousionis_li_")
                .and_then(|a| a.parse::<f64>().ok())
                .and_then(|a| KernelSpec::chousionis_li(a).ok()),
        }
    }

    /// Horizontally odd kernels pair with 𝔮(u) = u², odd ones with u|u|.
    pub fn is_horizontally_odd_class(&self) -> bool {
        matches!(self, KernelSpec::GradLogX | KernelSpec::GradLogY)
    }
}

/// Kernel value without the singularity check. Returns NaN-free values only off the origin.
#[inline]
pub fn eval_unchecked(spec: KernelSpec, p: HPoint) -> f64 {
    let n = heis::koranyi(p);
    match spec {
        KernelSpec::RieszX => p.x / (n * n),
        KernelSpec::RieszY => p.y / (n * n),
        KernelSpec::RieszT => p.t / (n * n * n),
        KernelSpec::GradLogX => {
            let r2 = p.x * p.x + p.y * p.y;
            let n2 = n * n;
            (p.x * r2 - 4.0 * p.t * p.y) / (n2 * n2)
        }
        KernelSpec::GradLogY => {
            let r2 = p.x * p.x + p.y * p.y;
            let n2 = n * n;
            (p.y * r2 + 4.0 * p.t * p.x) / (n2 * n2)
        }
        KernelSpec::ChousionisLi(alpha) => {
            if p.t == 0.0 {
                0.0
            } else {
                (p.t.abs().sqrt() / n).powf(alpha) / n
            }
        }
    }
}

pub fn eval_kernel(spec: KernelSpec, p: HPoint) -> Result<f64> {
    if p == HPoint::ORIGIN {
        return Err(Error::Singularity(format!("{} evaluated at the origin", spec.name())));
    }
    if let KernelSpec::ChousionisLi(a) = spec {
        if !(a >= 1.0) {
            return Err(Error::Domain(format!("Chousionis-Li exponent must be >= 1, got {a}")));
        }
    }
    Ok(eval_unchecked(spec, p))
}

#[inline]
pub fn pair_unchecked(spec: KernelSpec, p: HPoint, q: HPoint) -> f64 {
    eval_unchecked(spec, heis::mul(heis::inverse(q), p))
}

pub fn pair_kernel(spec: KernelSpec, p: HPoint, q: HPoint) -> Result<f64> {
    if p == q {
        return Err(Error::Singularity("pair kernel on the diagonal".into()));
    }
    eval_kernel(spec, heis::mul(heis::inverse(q), p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub odd: bool,
    pub horizontally_odd: bool,
    pub max_violation: f64,
    pub odd_violation: f64,
    pub horizontal_violation: f64,
}

pub const SYMMETRY_TOL: f64 = 1e-10;

/// Random nonsingular sample point with coordinates of moderate size.
pub fn random_point(rng: &mut impl Rng, scale: f64) -> HPoint {
    loop {
        let p = HPoint::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale * scale..scale * scale),
        );
        if heis::norm(p, NormKind::MaxNorm) > 1e-3 * scale {
            return p;
        }
    }
}

pub fn symmetry_check(spec: KernelSpec, samples: usize, seed: u64) -> Result<SymmetryReport> {
    if samples == 0 {
        return Err(Error::Domain("symmetry_check needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut odd_v: f64 = 0.0;
    let mut hor_v: f64 = 0.0;
    for _ in 0..samples {
        let p = random_point(&mut rng, 2.0);
        let k = eval_kernel(spec, p)?;
        let k_odd = eval_kernel(spec, HPoint::new(-p.x, -p.y, -p.t))?;
        let k_hor = eval_kernel(spec, HPoint::new(-p.x, -p.y, p.t))?;
        odd_v = odd_v.max((k + k_odd).abs());
        hor_v = hor_v.max((k + k_hor).abs());
    }
    let odd = odd_v <= SYMMETRY_TOL;
    let horizontally_odd = hor_v <= SYMMETRY_TOL;
    let max_violation = match (odd, horizontally_odd) {
        (true, true) => odd_v.max(hor_v),
        (true, false) => odd_v,
        (false, true) => hor_v,
        (false, false) => odd_v.min(hor_v),
    };
    Ok(SymmetryReport { odd, horizontally_odd, max_violation, odd_violation: odd_v, horizontal_violation: hor_v })
}

/// A sample triple for standard-kernel estimates: the pair (p, q) and a perturbation p′ of p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkTriple {
    pub p: HPoint,
    pub q: HPoint,
    pub p_prime: HPoint,
}

impl SkTriple {
    pub fn translate(&self, z: HPoint) -> SkTriple {
        SkTriple { p: heis::mul(z, self.p), q: heis::mul(z, self.q), p_prime: heis::mul(z, self.p_prime) }
    }

    pub fn dilate(&self, r: f64) -> SkTriple {
        SkTriple { p: dilate_unchecked(r, self.p), q: dilate_unchecked(r, self.q), p_prime: dilate_unchecked(r, self.p_prime) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkReport {
    pub size_constant: f64,
    pub holder_constant: f64,
    pub holder_exponent: f64,
}

fn unit_sphere_point(rng: &mut impl Rng) -> HPoint {
    let p = random_point(rng, 1.0);
    let n = heis::norm(p, NormKind::MaxNorm);
    dilate_unchecked(1.0 / n, p)
}

/// Draws triples with d(p,q) log-uniform in [1e-3, 1e3] and d(p,p′) ≤ d(p,q)/2.
pub fn sample_triples(n: usize, seed: u64) -> Vec<SkTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = random_point(&mut rng, 1.0);
            let r = 10f64.powf(rng.gen_range(-3.0..3.0));
            let w = dilate_unchecked(r, unit_sphere_point(&mut rng));
            let q = heis::mul(p, heis::inverse(w));
            let ratio = 10f64.powf(rng.gen_range(-3.0..(0.5f64).log10()));
            let v = dilate_unchecked(r * ratio, unit_sphere_point(&mut rng));
            SkTriple { p, q, p_prime: heis::mul(p, v) }
        })
        .collect()
}

/// Size and Hölder constants measured over admissible triples. A sampled lower bound
/// for the true constants.
pub fn sk_constants(spec: KernelSpec, triples: &[SkTriple], alpha: f64) -> Result<SkReport> {
    if triples.is_empty() {
        return Err(Error::Domain("sk_constants needs a nonempty sample".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("Hölder exponent must be in (0,1], got {alpha}")));
    }
    let d = |a: HPoint, b: HPoint| heis::dist(a, b, NormKind::MaxNorm);
    let per: Vec<Result<(f64, f64)>> = triples
        .par_iter()
        .map(|tr| {
            let dpq = d(tr.p, tr.q);
            let dpp = d(tr.p, tr.p_prime);
            if dpq == 0.0 {
                return Err(Error::Domain("diagonal pair in sample".into()));
            }
            let k = pair_kernel(spec, tr.p, tr.q)?;
            let kt = pair_kernel(spec, tr.q, tr.p)?;
            let mut size = dpq * k.abs().max(kt.abs());
            let mut hold = 0.0f64;
            if dpp > 0.0 && dpp <= 0.5 * dpq {
                let dpq2 = d(tr.p_prime, tr.q);
                let k2 = pair_kernel(spec, tr.p_prime, tr.q)?;
                let kt2 = pair_kernel(spec, tr.q, tr.p_prime)?;
                size = size.max(dpq2 * k2.abs().max(kt2.abs()));
                let scale = dpq.powf(1.0 + alpha) / dpp.powf(alpha);
                hold = (k - k2).abs().max((kt - kt2).abs()) * scale;
            }
            Ok((size, hold))
        })
        .collect();
    let mut out = SkReport { size_constant: 0.0, holder_constant: 0.0, holder_exponent: alpha };
    for r in per {
        let (s, h) = r?;
        out.size_constant = out.size_constant.max(s);
        out.holder_constant = out.holder_constant.max(h);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_examples() {
        assert_eq!(eval_kernel(KernelSpec::RieszX, HPoint::new(1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(eval_kernel(KernelSpec::RieszT, HPoint::new(0.0, 0.0, 1.0)).unwrap(), 0.125);
        assert_eq!(eval_kernel(KernelSpec::GradLogX, HPoint::new(1.0, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(eval_kernel(KernelSpec::GradLogX, HPoint::new(-1.0, 0.0, 0.0)).unwrap(), -1.0);
        for (a, b) in [(1.0, 0.0), (-0.3, 2.0), (1e-4, -7.0)] {
            assert_eq!(eval_kernel(KernelSpec::ChousionisLi(4.0), HPoint::new(a, b, 0.0)).unwrap(), 0.0);
        }
        assert!(matches!(eval_kernel(KernelSpec::RieszY, HPoint::ORIGIN), Err(Error::Singularity(_))));
        assert!(KernelSpec::chousionis_li(0.5).is_err());
    }

    #[test]
    fn pair_kernel_on_x_axis_is_hilbert() {
        for (r, s) in [(0.5, 0.1), (-2.0, 3.0), (1.0, 1.25)] {
            let k = pair_kernel(KernelSpec::RieszX, HPoint::new(r, 0.0, 0.0), HPoint::new(s, 0.0, 0.0)).unwrap();
            assert!((k - 1.0 / (r - s)).abs() <= 1e-14 * k.abs());
        }
        let p = HPoint::new(0.2, 0.3, 0.4);
        assert!(pair_kernel(KernelSpec::RieszX, p, p).is_err());
    }

    #[test]
    fn chousionis_li_zero_on_horizontal_lines() {
        let base = HPoint::new(0.3, -1.0, 2.0);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let line = |r: f64| heis::mul(base, HPoint::new(r * c, r * s, 0.0));
        for (a, b) in [(0.0, 1.0), (-2.0, 0.5), (3.0, 3.5)] {
            let k = pair_kernel(KernelSpec::ChousionisLi(6.0), line(a), line(b)).unwrap();
            assert!(k.abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn symmetry_classes() {
        for spec in [KernelSpec::RieszX, KernelSpec::RieszY, KernelSpec::RieszT] {
            assert!(symmetry_check(spec, 500, 1).unwrap().odd);
        }
        for spec in [KernelSpec::GradLogX, KernelSpec::GradLogY] {
            let r = symmetry_check(spec, 500, 2).unwrap();
            assert!(r.horizontally_odd && !r.odd);
        }
        let r = symmetry_check(KernelSpec::ChousionisLi(4.0), 500, 3).unwrap();
        assert!(!r.odd && !r.horizontally_odd);
        assert!(symmetry_check(KernelSpec::RieszX, 0, 1).is_err());
    }

    #[test]
    fn riesz_size_constant() {
        let tr = sample_triples(10_000, 11);
        let rep = sk_constants(KernelSpec::RieszX, &tr, 0.5).unwrap();
        assert!(rep.size_constant <= 1.1 && rep.size_constant > 0.5);
        assert!(rep.holder_constant.is_finite());
        assert!(sk_constants(KernelSpec::RieszX, &[], 0.5).is_err());
    }

    #[test]
    fn riesz_size_grid_oracle() {
        // sup of M(p)|x|/Kor(p)^2 over the max-norm unit sphere, by brute-force grid
        let mut best: f64 = 0.0;
        let n = 200;
        for i in 0..=n {
            for j in 0..=n {
                let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let tt = -1.0 + 2.0 * j as f64 / n as f64;
                for p in [HPoint::new(th.cos(), th.sin(), tt), HPoint::new(tt.abs().sqrt() * th.cos(), tt.abs().sqrt() * th.sin(), tt.signum())] {
                    let m = heis::norm(p, NormKind::MaxNorm);
                    best = best.max(m * eval_unchecked(KernelSpec::RieszX, p).abs());
                }
            }
        }
        assert!((best - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parse_roundtrip() {
        for k in KernelSpec::GOOD.iter().copied().chain([KernelSpec::ChousionisLi(4.0)]) {
            assert_eq!(KernelSpec::parse(&k.name()), Some(k));
        }
        assert_eq!(KernelSpec::parse("nope"), None);
    }
}
