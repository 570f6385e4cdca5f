//! Intrinsic Lipschitz graphs over horizontal subgroups and sampled curves
//! carrying their length measure.

use crate::error::{Error, Result};
use crate::heis::{self, HPoint, HorizontalSubgroup, NormKind, Target};
use crate::sampled;
use crate::tame::{self, PartialTameData, DECLARED_REL_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlgFunction {
    pub sub: HorizontalSubgroup,
    pub grid: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub declared_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    IlgGraph,
    HorizontalLine,
    Polyline,
}

/// Samples of a curve with quadrature weights for its length measure.
///
/// The measure is encoded by its cumulative distribution `cum` at the parameter
/// `knots`, linear in between; `weights` integrate the hat functions of `params`
/// against it, so they sum to the total measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub params: Vec<f64>,
    pub points: Vec<HPoint>,
    pub weights: Vec<f64>,
    pub kind: CurveKind,
    pub knots: Vec<f64>,
    pub cum: Vec<f64>,
}

impl IlgFunction {
    pub fn new(sub: HorizontalSubgroup, grid: Vec<f64>, phi1: Vec<f64>, phi2: Vec<f64>, declared_l: f64) -> Result<Self> {
        let f = Self::new_unchecked(sub, grid, phi1, phi2, declared_l)?;
        let m = ilg_check(&f);
        if m > declared_l * (1.0 + DECLARED_REL_TOL) + 1e-12 {
            return Err(Error::Consistency(format!("measured intrinsic Lipschitz constant {m} exceeds declared {declared_l}")));
        }
        Ok(f)
    }

    pub fn new_unchecked(sub: HorizontalSubgroup, grid: Vec<f64>, phi1: Vec<f64>, phi2: Vec<f64>, declared_l: f64) -> Result<Self> {
        if grid.len() < 2 || grid.len() != phi1.len() || grid.len() != phi2.len() {
            return Err(Error::Domain("grid and components need equal lengths >= 2".into()));
        }
        if !sampled::is_increasing(&grid) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
        if !(declared_l >= 0.0) {
            return Err(Error::Domain("declared constant must be nonnegative".into()));
        }
        Ok(IlgFunction { sub, grid, phi1, phi2, declared_l })
    }

    /// The horizontal graph with first component φ₁: φ₂ = φ₂(start) − ∫φ₁ by
    /// the trapezoid rule, declared with the measured constant.
    pub fn from_phi1(sub: HorizontalSubgroup, grid: Vec<f64>, phi1: Vec<f64>, phi2_start: f64) -> Result<Self> {
        let neg: Vec<f64> = phi1.iter().map(|v| -v).collect();
        let phi2 = sampled::cumtrapz(&grid, &neg, phi2_start);
        let mut f = Self::new_unchecked(sub, grid, phi1, phi2, 0.0)?;
        f.declared_l = ilg_check(&f);
        Ok(f)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    pub fn phi1_dot(&self) -> Vec<f64> {
        sampled::derivative(&self.grid, &self.phi1)
    }

    fn local_point(&self, i: usize) -> HPoint {
        let v = self.grid[i];
        let (p1, p2) = (self.phi1[i], self.phi2[i]);
        HPoint::new(v, p1, p2 + 0.5 * p1 * v)
    }

    fn node_point(&self, i: usize) -> HPoint {
        heis::rotate(self.sub.theta(), self.local_point(i))
    }
}

/// (φ₁(v), φ₂(v)) between nodes: φ₁ linear; φ₂ follows −∫φ₁ plus the linear share
/// of the cell's deviation from it, so trapezoid-coupled data give a horizontal curve.
fn interp_components(f: &IlgFunction, v: f64) -> (f64, f64) {
    let g = &f.grid;
    let i = match g.binary_search_by(|x| x.partial_cmp(&v).unwrap()) {
        Ok(i) => return (f.phi1[i], f.phi2[i]),
        Err(i) => (i.max(1) - 1).min(g.len() - 2),
    };
    let h = g[i + 1] - g[i];
    let lam = (v - g[i]) / h;
    let p1 = f.phi1[i] + lam * (f.phi1[i + 1] - f.phi1[i]);
    let defect = f.phi2[i + 1] - f.phi2[i] + 0.5 * h * (f.phi1[i] + f.phi1[i + 1]);
    let p2 = f.phi2[i] - 0.5 * (v - g[i]) * (f.phi1[i] + p1) + lam * defect;
    (p1, p2)
}

/// Φ(v) = (v, φ₁(v), φ₂(v) + φ₁(v)v/2), rotated onto 𝕍.
pub fn graph_map(f: &IlgFunction, v: f64) -> Result<HPoint> {
    let (a, b) = f.range();
    if !(v >= a && v <= b) {
        return Err(Error::Domain(format!("{v} outside the graph domain [{a}, {b}]")));
    }
    let (p1, p2) = interp_components(f, v);
    Ok(heis::rotate(f.sub.theta(), HPoint::new(v, p1, p2 + 0.5 * p1 * v)))
}

/// Smallest L with ‖π_W(Φ(v′)⁻¹Φ(v))‖ ≤ L‖π_V(Φ(v′)⁻¹Φ(v))‖ over all grid pairs.
pub fn ilg_check(f: &IlgFunction) -> f64 {
    let n = f.grid.len();
    let pts: Vec<HPoint> = (0..n).map(|i| f.node_point(i)).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let qi = pts[i].inv();
            let mut m: f64 = 0.0;
            for p in &pts[i + 1..] {
                let d = qi * *p;
                let v = heis::norm(heis::project(d, f.sub, Target::V), NormKind::MaxNorm);
                let w = heis::norm(heis::project(d, f.sub, Target::W), NormKind::MaxNorm);
                if v > 0.0 {
                    m = m.max(w / v);
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

fn speed(f: &IlgFunction) -> Vec<f64> {
    f.phi1_dot().iter().map(|d| (1.0 + d * d).sqrt()).collect()
}

/// Knots and cumulative length of the graph over [a, b]: grid nodes inside plus
/// the end points, trapezoid on the linear interpolant of the speed.
fn length_profile(f: &IlgFunction, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let g = speed(f);
    let mut knots = vec![a];
    knots.extend(f.grid.iter().copied().filter(|&v| v > a && v < b));
    if b > a {
        knots.push(b);
    }
    let vals: Vec<f64> = knots.iter().map(|&v| sampled::interp(&f.grid, &g, v)).collect();
    let cum = sampled::cumtrapz(&knots, &vals, 0.0);
    (knots, cum)
}

/// ∫_a^b (1 + φ̇₁²)^{1/2}, trapezoid rule on the grid.
pub fn h1_length(f: &IlgFunction, a: f64, b: f64) -> Result<f64> {
    let (lo, hi) = f.range();
    if !(a >= lo && b <= hi && a <= b) {
        return Err(Error::Domain(format!("[{a}, {b}] not inside [{lo}, {hi}]")));
    }
    let (_, cum) = length_profile(f, a, b);
    Ok(*cum.last().unwrap())
}

/// Σ d(Φ(v_i), Φ(v_{i+1})) over n uniform parameters in [a, b].
pub fn polyline_length(f: &IlgFunction, a: f64, b: f64, n: usize) -> Result<f64> {
    let vs = sampled::linspace(a, b, n.max(2));
    let pts = vs.iter().map(|&v| graph_map(f, v)).collect::<Result<Vec<_>>>()?;
    Ok(pts.windows(2).map(|w| heis::dist(w[1], w[0], NormKind::MaxNorm)).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlgExtension {
    pub function: IlgFunction,
    pub input_l: f64,
    pub measured_l: f64,
    /// measured_l / max(L, L²)
    pub ratio: f64,
}

/// Extends intrinsic Lipschitz data on E ⊂ 𝕍 through the tame extension of
/// (φ₁, −φ₂); the result is declared max(6L, 36L²) and audited.
pub fn extend_ilg(sub: HorizontalSubgroup, data: &PartialTameData, out_grid: &[f64]) -> Result<IlgExtension> {
    let input = IlgFunction::new_unchecked(sub, data.points.clone(), data.phi1.clone(), data.phi2.clone(), 0.0);
    let l = match input {
        Ok(f) => ilg_check(&f),
        Err(_) => 0.0,
    };
    let neg: Vec<f64> = data.phi2.iter().map(|v| -v).collect();
    let tdata = PartialTameData::new(data.points.clone(), data.phi1.clone(), neg)?;
    let ext = tame::extend_tame(&tdata, out_grid)?;
    let phi2: Vec<f64> = ext.b2.iter().map(|v| -v).collect();
    let declared = (6.0 * l).max(36.0 * l * l);
    let f = IlgFunction::new_unchecked(sub, ext.grid, ext.b1, phi2, declared)?;
    let measured = ilg_check(&f);
    if measured > declared * (1.0 + DECLARED_REL_TOL) + 1e-9 {
        return Err(Error::Construction(format!("extension measured {measured} above max(6L, 36L²) = {declared}")));
    }
    let base = l.max(l * l);
    let ratio = if base > 0.0 { measured / base } else { 0.0 };
    Ok(IlgExtension { function: f, input_l: l, measured_l: measured, ratio })
}

/// ∫ of the hat function at params[i] against the measure with cumulative `cum`
/// (piecewise-constant density on the knot cells).
fn hat_weights(params: &[f64], knots: &[f64], cum: &[f64]) -> Vec<f64> {
    let n = params.len();
    let mut w = vec![0.0; n];
    for k in 0..knots.len().saturating_sub(1) {
        let (k0, k1) = (knots[k], knots[k + 1]);
        if k1 <= k0 {
            continue;
        }
        let rho = (cum[k + 1] - cum[k]) / (k1 - k0);
        // split the knot cell at parameter nodes and integrate the two linear hats
        let j0 = params.partition_point(|&p| p <= k0).saturating_sub(1).min(n - 2);
        let mut j = j0;
        while j < n - 1 && params[j] < k1 {
            let (p0, p1) = (params[j], params[j + 1]);
            let lo = k0.max(p0);
            let hi = k1.min(p1);
            if hi > lo {
                let mid = 0.5 * (lo + hi);
                let s = (mid - p0) / (p1 - p0);
                let mass = rho * (hi - lo);
                w[j] += mass * (1.0 - s);
                w[j + 1] += mass * s;
            }
            j += 1;
        }
    }
    w
}

impl Curve {
    fn assemble(params: Vec<f64>, points: Vec<HPoint>, kind: CurveKind, knots: Vec<f64>, cum: Vec<f64>) -> Curve {
        let weights = hat_weights(&params, &knots, &cum);
        Curve { params, points, weights, kind, knots, cum }
    }

    /// Samples of a polyline through `points` with parameters `params`, measured
    /// by metric segment lengths.
    pub fn polyline(params: Vec<f64>, points: Vec<HPoint>) -> Result<Curve> {
        if params.len() < 2 || params.len() != points.len() || !sampled::is_increasing(&params) {
            return Err(Error::Domain("polyline needs >= 2 points with increasing parameters".into()));
        }
        let mut cum = vec![0.0];
        for w in points.windows(2) {
            let last = *cum.last().unwrap();
            cum.push(last + heis::dist(w[1], w[0], NormKind::MaxNorm));
        }
        Ok(Self::assemble(params.clone(), points, CurveKind::Polyline, params, cum))
    }

    /// base·(s cos θ, s sin θ, 0) for s ∈ [a, b].
    pub fn horizontal_line(base: HPoint, theta: f64, a: f64, b: f64, n: usize) -> Result<Curve> {
        if n < 2 || !(b > a) {
            return Err(Error::Domain("horizontal line needs n >= 2 and a < b".into()));
        }
        let (s, c) = theta.sin_cos();
        let params = sampled::linspace(a, b, n);
        let points = params.iter().map(|&u| base * HPoint::new(u * c, u * s, 0.0)).collect();
        let cum = params.iter().map(|&u| u - a).collect();
        Ok(Self::assemble(params.clone(), points, CurveKind::HorizontalLine, params, cum))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0) - self.cum.first().copied().unwrap_or(0.0)
    }

    fn cum_at(&self, s: f64) -> f64 {
        sampled::interp(&self.knots, &self.cum, s)
    }

    /// Measure of the parameter interval [a, b].
    pub fn measure_between(&self, a: f64, b: f64) -> f64 {
        self.cum_at(b) - self.cum_at(a)
    }

    /// Left translate p·γ; the measure is unchanged.
    pub fn translated(&self, p: HPoint) -> Curve {
        let mut c = self.clone();
        c.points.iter_mut().for_each(|q| *q = p * *q);
        c
    }

    /// δ_r γ with the measure scaled by r.
    pub fn dilated(&self, r: f64) -> Curve {
        let mut c = self.clone();
        c.points.iter_mut().for_each(|q| *q = heis::dilate_unchecked(r, *q));
        c.weights.iter_mut().for_each(|w| *w *= r);
        c.cum.iter_mut().for_each(|w| *w *= r);
        c
    }

    pub fn rotated(&self, theta: f64) -> Curve {
        let mut c = self.clone();
        c.points.iter_mut().for_each(|q| *q = heis::rotate(theta, *q));
        c
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("param,x,y,t,weight\n");
        for i in 0..self.len() {
            let p = self.points[i];
            let _ = writeln!(s, "{},{},{},{},{}", self.params[i], p.x, p.y, p.t, self.weights[i]);
        }
        s
    }
}

/// Uniform samples of the graph over [a, b] with weights for H¹ restricted to it.
pub fn curve_from_graph(f: &IlgFunction, window: (f64, f64), n: usize) -> Result<Curve> {
    let (a, b) = window;
    if n < 2 {
        return Err(Error::Domain("curve needs n >= 2".into()));
    }
    let (lo, hi) = f.range();
    if !(a >= lo && b <= hi && a < b) {
        return Err(Error::Domain(format!("window [{a}, {b}] not inside [{lo}, {hi}]")));
    }
    let params = sampled::linspace(a, b, n);
    let points = params.iter().map(|&v| graph_map(f, v)).collect::<Result<Vec<_>>>()?;
    let (knots, cum) = length_profile(f, a, b);
    Ok(Curve::assemble(params, points, CurveKind::IlgGraph, knots, cum))
}

/// Range of d(Φ(v), Φ(v′)) / |v − v′| over all grid pairs.
pub fn bilipschitz_ratios(f: &IlgFunction) -> (f64, f64) {
    let n = f.grid.len();
    let pts: Vec<HPoint> = (0..n).map(|i| f.node_point(i)).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for j in i + 1..n {
                let r = heis::dist(pts[j], pts[i], NormKind::MaxNorm) / (f.grid[j] - f.grid[i]);
                lo = lo.min(r);
                hi = hi.max(r);
            }
            (lo, hi)
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// max over random balls B(γ(s), r) of max(μ(B)/r, r/μ(B)); centers from the
/// middle half of the curve, radii log-uniform between 4 sample gaps and a
/// quarter of the total length.
pub fn regularity_audit(curve: &Curve, samples: usize, seed: u64) -> f64 {
    let n = curve.len();
    if n < 8 {
        return f64::INFINITY;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = curve
        .points
        .windows(2)
        .map(|w| heis::dist(w[1], w[0], NormKind::MaxNorm))
        .fold(0.0, f64::max);
    let rmin = 4.0 * gap;
    let rmax = (0.25 * curve.total_measure()).max(rmin * 1.5);
    let queries: Vec<(usize, f64)> = (0..samples)
        .map(|_| {
            let i = rng.gen_range(n / 4..(3 * n / 4).max(n / 4 + 1));
            let r = (rmin.ln() + rng.gen::<f64>() * (rmax / rmin).ln()).exp();
            (i, r)
        })
        .collect();
    queries
        .par_iter()
        .map(|&(i, r)| {
            let c = curve.points[i];
            let mu: f64 = curve
                .points
                .iter()
                .zip(&curve.weights)
                .filter(|(p, _)| heis::dist(**p, c, NormKind::MaxNorm) <= r)
                .map(|(_, w)| *w)
                .sum();
            let q = mu / r;
            if q > 0.0 {
                q.max(1.0 / q)
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 1.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::linspace;

    fn x_axis(n: usize) -> IlgFunction {
        IlgFunction::new(HorizontalSubgroup::x_axis(), linspace(0.0, 1.0, n), vec![0.0; n], vec![0.0; n], 0.0).unwrap()
    }

    fn slope_one(n: usize) -> IlgFunction {
        let g = linspace(0.0, 1.0, n);
        let p2 = g.iter().map(|v| -0.5 * v * v).collect();
        IlgFunction::new(HorizontalSubgroup::x_axis(), g.clone(), g, p2, 1.0).unwrap()
    }

    #[test]
    fn graph_map_examples() {
        let f = x_axis(11);
        assert_eq!(graph_map(&f, 0.3).unwrap(), HPoint::new(0.3, 0.0, 0.0));
        let g = linspace(-1.0, 1.0, 21);
        let p2 = g.iter().map(|v| -v).collect();
        let line = IlgFunction::new(HorizontalSubgroup::x_axis(), g.clone(), vec![1.0; 21], p2, 0.0).unwrap();
        for &v in &[-0.7, 0.2, 1.0] {
            let p = graph_map(&line, v).unwrap();
            let q = HPoint::new(0.0, 1.0, 0.0) * HPoint::new(v, 0.0, 0.0);
            assert!((p.x - q.x).abs() < 1e-15 && (p.y - q.y).abs() < 1e-15 && (p.t - q.t).abs() < 1e-15);
        }
        assert!(ilg_check(&line) < 1e-15);
        assert!(graph_map(&line, 1.5).is_err());
    }

    #[test]
    fn difference_formula() {
        // Φ(v₁)⁻¹Φ(v₂) = (Δv, Δφ₁, Δφ₂ + (φ₁(v₁)+φ₁(v₂))Δv/2)
        let g = linspace(0.0, 1.0, 51);
        let p1: Vec<f64> = g.iter().map(|v| (3.0 * v).sin()).collect();
        let p2: Vec<f64> = g.iter().map(|v| v * v - 0.3).collect();
        let f = IlgFunction::new_unchecked(HorizontalSubgroup::x_axis(), g.clone(), p1.clone(), p2.clone(), 0.0).unwrap();
        for (i, j) in [(3usize, 40usize), (17, 2), (25, 26)] {
            let d = graph_map(&f, g[i]).unwrap().inv() * graph_map(&f, g[j]).unwrap();
            let dv = g[j] - g[i];
            assert!((d.x - dv).abs() < 1e-14);
            assert!((d.y - (p1[j] - p1[i])).abs() < 1e-14);
            assert!((d.t - (p2[j] - p2[i] + 0.5 * (p1[i] + p1[j]) * dv)).abs() < 1e-14);
        }
    }

    #[test]
    fn lengths() {
        assert!((h1_length(&x_axis(11), 0.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let f = slope_one(101);
        assert!((h1_length(&f, 0.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((polyline_length(&f, 0.0, 1.0, 1000).unwrap() - 2f64.sqrt()).abs() < 1e-3);
        assert_eq!(ilg_check(&f), 1.0);
        let c = curve_from_graph(&f, (0.0, 1.0), 37).unwrap();
        let s: f64 = c.weights.iter().sum();
        assert!((s - 2f64.sqrt()).abs() < 1e-12);
        let c = curve_from_graph(&x_axis(11), (0.0, 1.0), 101).unwrap();
        assert!(c.weights[1..100].iter().all(|w| (w - 0.01).abs() < 1e-14));
        assert!((c.weights.iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn curved_graph_weights_match_length() {
        let g = linspace(-1.0, 1.0, 401);
        let p1: Vec<f64> = g.iter().map(|v| 0.5 * (2.0 * v).sin()).collect();
        let f = IlgFunction::from_phi1(HorizontalSubgroup::new(0.4), g, p1, 0.1).unwrap();
        let len = h1_length(&f, -0.8, 0.9).unwrap();
        let c = curve_from_graph(&f, (-0.8, 0.9), 123).unwrap();
        let s: f64 = c.weights.iter().sum();
        assert!((s - len).abs() < 1e-9 * len);
        assert!(c.weights.iter().all(|w| *w > 0.0));
        let (lo, hi) = bilipschitz_ratios(&f);
        assert!(lo >= 1.0 - 1e-12 && hi <= 1.0 + f.declared_l + 1e-12, "{lo} {hi}");
        let reg = regularity_audit(&c, 200, 3);
        assert!(reg <= 2.0 * (1.0 + f.declared_l), "{reg}");
    }

    #[test]
    fn extension_of_horizontal_line_stays_flat() {
        let data = PartialTameData::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0, -1.0]).unwrap();
        let e = extend_ilg(HorizontalSubgroup::x_axis(), &data, &linspace(-0.5, 1.5, 81)).unwrap();
        assert!(e.measured_l < 1e-12);
        let f = &e.function;
        assert!(f.phi1.iter().all(|v| (*v - 1.0).abs() < 1e-15));
        assert!(f.grid.iter().zip(&f.phi2).all(|(v, p)| (p + v).abs() < 1e-14));
    }
}
