//! First Heisenberg group in exponential coordinates.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint { x: 0.0, y: 0.0, t: 0.0 };

    pub const fn new(x: f64, y: f64, t: f64) -> Self {
        HPoint { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    /// Euclidean length of the horizontal part z = (x, y).
    pub fn horizontal_len(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn inv(&self) -> HPoint {
        inverse(*self)
    }
}

impl Mul for HPoint {
    type Output = HPoint;
    fn mul(self, rhs: HPoint) -> HPoint {
        mul(self, rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    MaxNorm,
    Koranyi,
}

/// The horizontal line {(r cos θ, r sin θ, 0)} through the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizontalSubgroup {
    theta: f64,
}

impl HorizontalSubgroup {
    pub fn new(theta: f64) -> Self {
        let mut th = theta.rem_euclid(PI);
        if th >= PI {
            th = 0.0;
        }
        HorizontalSubgroup { theta: th }
    }

    pub fn x_axis() -> Self {
        HorizontalSubgroup { theta: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn direction(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    V,
    L,
    W,
    T,
}

pub fn mul(p: HPoint, q: HPoint) -> HPoint {
    HPoint {
        x: p.x + q.x,
        y: p.y + q.y,
        t: p.t + q.t + 0.5 * (p.x * q.y - q.x * p.y),
    }
}

pub fn inverse(p: HPoint) -> HPoint {
    HPoint { x: -p.x, y: -p.y, t: -p.t }
}

pub fn dilate(lambda: f64, p: HPoint) -> Result<HPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return domain(format!("dilation factor must be positive, got {lambda}"));
    }
    Ok(dilate_unchecked(lambda, p))
}

#[inline]
pub(crate) fn dilate_unchecked(lambda: f64, p: HPoint) -> HPoint {
    HPoint { x: lambda * p.x, y: lambda * p.y, t: lambda * lambda * p.t }
}

pub fn norm(p: HPoint, kind: NormKind) -> f64 {
    match kind {
        NormKind::MaxNorm => p.horizontal_len().max(p.t.abs().sqrt()),
        NormKind::Koranyi => koranyi(p),
    }
}

#[inline]
pub fn koranyi(p: HPoint) -> f64 {
    let r2 = p.x * p.x + p.y * p.y;
    (r2 * r2 + 16.0 * p.t * p.t).sqrt().sqrt()
}

pub fn dist(p: HPoint, q: HPoint, kind: NormKind) -> f64 {
    norm(mul(inverse(q), p), kind)
}

/// Rotation by `theta` about the t-axis; a group automorphism and an isometry.
pub fn rotate(theta: f64, p: HPoint) -> HPoint {
    if theta == 0.0 {
        return p;
    }
    let (s, c) = theta.sin_cos();
    HPoint { x: c * p.x - s * p.y, y: s * p.x + c * p.y, t: p.t }
}

fn project_axis(p: HPoint, target: Target) -> HPoint {
    match target {
        Target::V => HPoint::new(p.x, 0.0, 0.0),
        Target::L => HPoint::new(0.0, p.y, 0.0),
        Target::W => HPoint::new(0.0, p.y, p.t - 0.5 * p.x * p.y),
        Target::T => HPoint::new(0.0, 0.0, p.t - 0.5 * p.x * p.y),
    }
}

pub fn project(p: HPoint, sub: HorizontalSubgroup, target: Target) -> HPoint {
    let th = sub.theta();
    if th == 0.0 {
        return project_axis(p, target);
    }
    rotate(th, project_axis(rotate(-th, p), target))
}

pub fn cone_contains(p: HPoint, sub: HorizontalSubgroup, alpha: f64) -> Result<bool> {
    if !(alpha >= 0.0) {
        return domain(format!("cone aperture must be nonnegative, got {alpha}"));
    }
    let v = norm(project(p, sub, Target::V), NormKind::MaxNorm);
    let w = norm(project(p, sub, Target::W), NormKind::MaxNorm);
    Ok(v <= alpha * w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: HPoint, b: HPoint, tol: f64) -> bool {
        let s = |u: f64, v: f64| (u - v).abs() <= tol * (1.0 + u.abs().max(v.abs()));
        s(a.x, b.x) && s(a.y, b.y) && s(a.t, b.t)
    }

    #[test]
    fn group_law_examples() {
        let a = HPoint::new(1.3, -2.0, 0.7);
        assert_eq!(mul(HPoint::ORIGIN, a), a);
        assert_eq!(mul(HPoint::new(1.0, 0.0, 0.0), HPoint::new(0.0, 1.0, 0.0)), HPoint::new(1.0, 1.0, 0.5));
        assert_eq!(mul(HPoint::new(0.0, 1.0, 0.0), HPoint::new(1.0, 0.0, 0.0)), HPoint::new(1.0, 1.0, -0.5));
        assert_eq!(inverse(HPoint::new(1.0, 2.0, 3.0)), HPoint::new(-1.0, -2.0, -3.0));
        assert_eq!(mul(a, inverse(a)), HPoint::ORIGIN);
    }

    #[test]
    fn dilation_examples() {
        let p = HPoint::new(0.3, 0.1, -4.0);
        assert_eq!(dilate(1.0, p).unwrap(), p);
        assert_eq!(dilate(2.0, HPoint::new(1.0, 1.0, 1.0)).unwrap(), HPoint::new(2.0, 2.0, 4.0));
        assert!(dilate(0.0, p).is_err());
        assert!(dilate(-1.0, p).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(HPoint::ORIGIN, NormKind::MaxNorm), 0.0);
        assert_eq!(norm(HPoint::ORIGIN, NormKind::Koranyi), 0.0);
        assert_eq!(norm(HPoint::new(3.0, 4.0, 25.0), NormKind::MaxNorm), 5.0);
        assert_eq!(norm(HPoint::new(0.0, 0.0, 1.0), NormKind::Koranyi), 2.0);
        assert_eq!(dist(HPoint::new(1.0, 0.0, 0.0), HPoint::ORIGIN, NormKind::MaxNorm), 1.0);
    }

    #[test]
    fn projection_examples() {
        let s0 = HorizontalSubgroup::x_axis();
        assert_eq!(project(HPoint::new(1.0, 2.0, 3.0), s0, Target::W), HPoint::new(0.0, 2.0, 2.0));
        for th in [0.0, 0.4, 1.0, 2.5] {
            let s = HorizontalSubgroup::new(th);
            assert!(close(project(HPoint::new(0.0, 0.0, 5.0), s, Target::V), HPoint::ORIGIN, 1e-15));
            let p = HPoint::new(0.7, -1.1, 0.25);
            let back = mul(project(p, s, Target::V), project(p, s, Target::W));
            assert!(close(back, p, 1e-12));
        }
    }

    #[test]
    fn cone_examples() {
        let s0 = HorizontalSubgroup::x_axis();
        assert!(cone_contains(HPoint::new(0.0, 1.0, 0.0), s0, 0.0).unwrap());
        assert!(!cone_contains(HPoint::new(1.0, 0.0, 0.0), s0, 10.0).unwrap());
        assert!(cone_contains(HPoint::ORIGIN, s0, 0.5).unwrap());
        assert!(cone_contains(HPoint::ORIGIN, s0, -1.0).is_err());
    }

    #[test]
    fn subgroup_normalization() {
        assert!((HorizontalSubgroup::new(PI + 0.25).theta() - 0.25).abs() < 1e-15);
        assert!((HorizontalSubgroup::new(-0.25).theta() - (PI - 0.25)).abs() < 1e-15);
    }
}
