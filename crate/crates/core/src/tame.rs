//! Tame maps B = (B₁, B₂) with Ḃ₂ = B₁: measurement, extension from finite
//! sets, parabolic rescaling, and conversion from intrinsic Lipschitz data.

use crate::error::{Error, Result};
use crate::sampled;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative slack allowed between a measured constant and its declared value.
pub const DECLARED_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TameMapSampled {
    pub grid: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub declared_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TameLinear {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialTameData {
    pub points: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
}

impl TameLinear {
    pub fn b1(&self, x: f64) -> f64 {
        self.a * x + self.c
    }

    pub fn b2(&self, x: f64) -> f64 {
        0.5 * self.a * x * x + self.c * x + self.b
    }

    pub fn sample(&self, grid: &[f64]) -> TameMapSampled {
        TameMapSampled {
            grid: grid.to_vec(),
            b1: grid.iter().map(|&x| self.b1(x)).collect(),
            b2: grid.iter().map(|&x| self.b2(x)).collect(),
            declared_constant: self.a.abs(),
        }
    }
}

impl PartialTameData {
    pub fn new(points: Vec<f64>, phi1: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        if points.len() != phi1.len() || points.len() != phi2.len() {
            return Err(Error::Domain("partial data arrays differ in length".into()));
        }
        if !sampled::is_increasing(&points) {
            return Err(Error::Domain("partial data points must be distinct and sorted".into()));
        }
        Ok(PartialTameData { points, phi1, phi2 })
    }
}

/// Roundoff floor for difference quotients of second order on spacing h.
fn roundoff_floor(xs: &[f64], b1: &[f64], b2: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let hmin = xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mag2 = b2.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mag1 = b1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    64.0 * f64::EPSILON * (mag2 / (hmin * hmin) + mag1 / hmin)
}

impl TameMapSampled {
    /// Validates the coupling Ḃ₂ = B₁ (trapezoid, per step) and the declared constant.
    pub fn new(grid: Vec<f64>, b1: Vec<f64>, b2: Vec<f64>, declared_constant: f64) -> Result<Self> {
        let m = Self::new_unchecked(grid, b1, b2, declared_constant)?;
        m.validate()?;
        Ok(m)
    }

    /// Builds the map without measuring the tameness constant.
    pub fn new_unchecked(grid: Vec<f64>, b1: Vec<f64>, b2: Vec<f64>, declared_constant: f64) -> Result<Self> {
        if grid.len() != b1.len() || grid.len() != b2.len() {
            return Err(Error::Domain("tame map arrays differ in length".into()));
        }
        sampled::uniform_spacing(&grid)?;
        if !(declared_constant >= 0.0) {
            return Err(Error::Domain("declared constant must be nonnegative".into()));
        }
        Ok(TameMapSampled { grid, b1, b2, declared_constant })
    }

    /// B₂ from B₁ by the cumulative trapezoid rule.
    pub fn from_b1(grid: Vec<f64>, b1: Vec<f64>, b2_at_start: f64, declared_constant: f64) -> Result<Self> {
        let b2 = sampled::cumtrapz(&grid, &b1, b2_at_start);
        Self::new(grid, b1, b2, declared_constant)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.grid[self.len() - 1] - self.grid[0]) / (self.len() - 1) as f64
    }

    /// Largest per-step deviation of B₂ increments from the trapezoid rule, divided by h².
    pub fn coupling_defect(&self) -> f64 {
        let h = self.spacing();
        (1..self.len())
            .map(|i| {
                let d = self.b2[i] - self.b2[i - 1] - 0.5 * h * (self.b1[i] + self.b1[i - 1]);
                d.abs() / (h * h)
            })
            .fold(0.0, f64::max)
    }

    pub fn measured_constant(&self) -> f64 {
        tameness_two_sided(&self.grid, &self.b1, &self.b2)
    }

    pub fn validate(&self) -> Result<()> {
        let floor = roundoff_floor(&self.grid, &self.b1, &self.b2);
        let n = self.declared_constant;
        let slack = n * DECLARED_REL_TOL + floor;
        let defect = self.coupling_defect();
        if defect > n + slack {
            return Err(Error::Consistency(format!("coupling defect {defect:e} exceeds declared constant {n}")));
        }
        let measured = self.measured_constant();
        if measured > n + slack {
            return Err(Error::Consistency(format!("measured tameness {measured} exceeds declared {n}")));
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> TameMapSampled {
        TameMapSampled {
            grid: self.grid.clone(),
            b1: self.b1.iter().map(|v| v * factor).collect(),
            b2: self.b2.iter().map(|v| v * factor).collect(),
            declared_constant: self.declared_constant * factor.abs(),
        }
    }

    pub fn restrict(&self) -> PartialTameData {
        PartialTameData { points: self.grid.clone(), phi1: self.b1.clone(), phi2: self.b2.clone() }
    }
}

fn pair_quotient(x: f64, y: f64, p1x: f64, p1y: f64, p2x: f64, p2y: f64) -> f64 {
    let d = x - y;
    let q = (p2x - p2y) / d;
    ((q - p1x).abs() + (q - p1y).abs()) / d.abs()
}

/// Max over distinct pairs of the two-sided tameness quotient divided by |x − y|.
pub fn tameness_two_sided(xs: &[f64], p1: &[f64], p2: &[f64]) -> f64 {
    let n = xs.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in (i + 1)..n {
                m = m.max(pair_quotient(xs[i], xs[j], p1[i], p1[j], p2[i], p2[j]));
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

/// The one-sided variant |Δφ₂/Δx − φ₁(x)| / |x − y| over ordered pairs.
pub fn tameness_one_sided(xs: &[f64], p1: &[f64], p2: &[f64]) -> f64 {
    let n = xs.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut m = 0.0f64;
            for j in 0..n {
                if i != j {
                    let d = xs[i] - xs[j];
                    let q = (p2[i] - p2[j]) / d;
                    m = m.max((q - p1[i]).abs() / d.abs());
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max)
}

pub trait TameSamples {
    fn tame_parts(&self) -> (&[f64], &[f64], &[f64]);
}

impl TameSamples for TameMapSampled {
    fn tame_parts(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.grid, &self.b1, &self.b2)
    }
}

impl TameSamples for PartialTameData {
    fn tame_parts(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.points, &self.phi1, &self.phi2)
    }
}

pub fn tameness_constant<T: TameSamples + ?Sized>(map: &T) -> Result<f64> {
    let (x, p1, p2) = map.tame_parts();
    if x.len() < 2 {
        return Err(Error::Domain("tameness needs at least two points".into()));
    }
    Ok(tameness_two_sided(x, p1, p2))
}

/// Piecewise description of the extension; evaluates exactly at any real point.
#[derive(Debug, Clone)]
pub struct TameExtension {
    points: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
    /// Peak of the triangle correction on each bounded gap (after normalization).
    peaks: Vec<f64>,
}

impl TameExtension {
    pub fn build(data: &PartialTameData) -> Result<Self> {
        if data.points.is_empty() {
            return Err(Error::Domain("cannot extend from an empty set".into()));
        }
        let mut peaks = Vec::with_capacity(data.points.len().saturating_sub(1));
        for k in 0..data.points.len().saturating_sub(1) {
            let y = data.points[k + 1] - data.points[k];
            let f1 = data.phi1[k + 1] - data.phi1[k];
            let f2 = data.phi2[k + 1] - data.phi2[k] - data.phi1[k] * y;
            let disc = f2 - 0.5 * f1 * y;
            peaks.push(2.0 * disc / y);
        }
        Ok(TameExtension { points: data.points.clone(), phi1: data.phi1.clone(), phi2: data.phi2.clone(), peaks })
    }

    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    pub fn eval(&self, s: f64) -> (f64, f64) {
        let n = self.points.len();
        let (x0, xn) = (self.points[0], self.points[n - 1]);
        if s <= x0 {
            return (self.phi1[0], self.phi2[0] + self.phi1[0] * (s - x0));
        }
        if s >= xn {
            return (self.phi1[n - 1], self.phi2[n - 1] + self.phi1[n - 1] * (s - xn));
        }
        let k = match self.points.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(k) => return (self.phi1[k], self.phi2[k]),
            Err(k) => k - 1,
        };
        let x = self.points[k];
        let y = self.points[k + 1] - x;
        let u = s - x;
        let f1 = self.phi1[k + 1] - self.phi1[k];
        let peak = self.peaks[k];
        let (tri, tri_int) = if u <= 0.5 * y {
            (peak * 2.0 * u / y, peak * u * u / y)
        } else {
            let r = y - u;
            (peak * 2.0 * r / y, peak * 0.5 * y - peak * r * r / y)
        };
        let n1 = f1 * u / y + tri;
        let n2 = 0.5 * f1 * u * u / y + tri_int;
        (self.phi1[k] + n1, self.phi2[k] + self.phi1[k] * u + n2)
    }
}

/// Extends partial tame data to a uniform grid: per gap a linear candidate plus a
/// triangle correction with the area that closes the B₂ discrepancy; constant B₁
/// beyond the outermost points. Points of E are snapped to their nearest node
/// (tolerance h/2) and carry the data values exactly.
pub fn extend_tame(data: &PartialTameData, out_grid: &[f64]) -> Result<TameMapSampled> {
    let h = sampled::uniform_spacing(out_grid)?;
    if data.points.is_empty() {
        return Err(Error::Domain("cannot extend from an empty set".into()));
    }
    let mut snapped_idx = Vec::with_capacity(data.points.len());
    for &p in &data.points {
        let i = sampled::nearest_index(out_grid, p);
        if (out_grid[i] - p).abs() > 0.5 * h * (1.0 + 1e-9) {
            return Err(Error::Domain(format!("grid does not cover data point {p}")));
        }
        if snapped_idx.last() == Some(&i) {
            return Err(Error::Domain(format!("two data points snap to node {i}; refine the grid")));
        }
        snapped_idx.push(i);
    }
    let snapped = PartialTameData {
        points: snapped_idx.iter().map(|&i| out_grid[i]).collect(),
        phi1: data.phi1.clone(),
        phi2: data.phi2.clone(),
    };
    let l = if snapped.points.len() >= 2 { tameness_constant(&snapped)? } else { 0.0 };
    let ext = TameExtension::build(&snapped)?;
    let mut b1 = Vec::with_capacity(out_grid.len());
    let mut b2 = Vec::with_capacity(out_grid.len());
    for &s in out_grid {
        let (v1, v2) = ext.eval(s);
        b1.push(v1);
        b2.push(v2);
    }
    for (k, &i) in snapped_idx.iter().enumerate() {
        b1[i] = data.phi1[k];
        b2[i] = data.phi2[k];
    }
    let map = TameMapSampled::new_unchecked(out_grid.to_vec(), b1, b2, 18.0 * l)?;
    let measured = map.measured_constant();
    let slack = 18.0 * l * DECLARED_REL_TOL + roundoff_floor(&map.grid, &map.b1, &map.b2);
    if measured > 18.0 * l + slack {
        return Err(Error::Construction(format!("extension measured {measured} above 18L = {}", 18.0 * l)));
    }
    Ok(map)
}

pub fn rescale_tame(map: &TameMapSampled, r: f64) -> Result<TameMapSampled> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("rescaling factor must be positive, got {r}")));
    }
    if r == 1.0 {
        return Ok(map.clone());
    }
    Ok(TameMapSampled {
        grid: map.grid.iter().map(|x| x / r).collect(),
        b1: map.b1.iter().map(|v| v / r).collect(),
        b2: map.b2.iter().map(|v| v / (r * r)).collect(),
        declared_constant: map.declared_constant,
    })
}

/// Checks |Δφ₁| ≤ L|Δv| and |Δφ₂/Δv + φ₁(v₁)| ≤ L²|Δv| and returns (φ₁, −φ₂) with
/// declared constant 2L².
pub fn tame_from_ilg(grid: &[f64], phi1: &[f64], phi2: &[f64], l: f64) -> Result<TameMapSampled> {
    if grid.len() != phi1.len() || grid.len() != phi2.len() {
        return Err(Error::Domain("array lengths differ".into()));
    }
    let lip = sampled::lipschitz_const(grid, phi1);
    let neg: Vec<f64> = phi2.iter().map(|v| -v).collect();
    let one = tameness_one_sided(grid, phi1, &neg);
    let floor = roundoff_floor(grid, phi1, phi2);
    if lip > l * (1.0 + DECLARED_REL_TOL) + floor {
        return Err(Error::Consistency(format!("first component is {lip}-Lipschitz, above L = {l}")));
    }
    if one > l * l * (1.0 + DECLARED_REL_TOL) + floor {
        return Err(Error::Consistency(format!("vertical quotient bound {one} exceeds L² = {}", l * l)));
    }
    let map = TameMapSampled::new_unchecked(grid.to_vec(), phi1.to_vec(), neg, 2.0 * l * l)?;
    let measured = map.measured_constant();
    if measured > 2.0 * l * l * (1.0 + DECLARED_REL_TOL) + floor {
        return Err(Error::Consistency(format!("tame constant {measured} exceeds 2L²")));
    }
    Ok(map)
}
