//! Dyadic intervals and trees, stopping-time corona decompositions of Lipschitz
//! functions and tame maps, their auditor, Carleson sums, Whitney regions of a
//! tree and the rotated-graph reparametrization.

use crate::beta;
use crate::error::{Error, Result};
use crate::sampled;
use crate::tame::{self, TameLinear, TameMapSampled};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};

/// The interval [k·2^{−j}, (k+1)·2^{−j}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i32, i64)", into = "(i32, i64)")]
pub struct DyadicInterval {
    pub level: i32,
    pub index: i64,
}

impl From<(i32, i64)> for DyadicInterval {
    fn from(v: (i32, i64)) -> Self {
        DyadicInterval { level: v.0, index: v.1 }
    }
}

impl From<DyadicInterval> for (i32, i64) {
    fn from(q: DyadicInterval) -> Self {
        (q.level, q.index)
    }
}

impl DyadicInterval {
    pub fn new(level: i32, index: i64) -> Self {
        DyadicInterval { level, index }
    }

    pub fn len(&self) -> f64 {
        (-self.level as f64).exp2()
    }

    pub fn lo(&self) -> f64 {
        self.index as f64 * self.len()
    }

    pub fn hi(&self) -> f64 {
        (self.index + 1) as f64 * self.len()
    }

    pub fn center(&self) -> f64 {
        (self.index as f64 + 0.5) * self.len()
    }

    /// The interval λQ with the same center.
    pub fn dilated(&self, lambda: f64) -> (f64, f64) {
        let c = self.center();
        let r = 0.5 * lambda * self.len();
        (c - r, c + r)
    }

    pub fn parent(&self) -> DyadicInterval {
        DyadicInterval { level: self.level - 1, index: self.index.div_euclid(2) }
    }

    pub fn children(&self) -> [DyadicInterval; 2] {
        let l = self.level + 1;
        [DyadicInterval { level: l, index: 2 * self.index }, DyadicInterval { level: l, index: 2 * self.index + 1 }]
    }

    pub fn sibling(&self) -> DyadicInterval {
        DyadicInterval { level: self.level, index: self.index ^ 1 }
    }

    /// Q ⊆ self.
    pub fn contains(&self, q: &DyadicInterval) -> bool {
        q.level >= self.level && (q.index >> (q.level - self.level)) == self.index
    }

    pub fn contains_point(&self, x: f64) -> bool {
        x >= self.lo() && x < self.hi()
    }

    /// All dyadic intervals of levels 0..=depth inside [a, b) (integers a < b).
    pub fn truncated_grid(window: (f64, f64), depth: i32) -> Vec<DyadicInterval> {
        let (a, b) = (window.0 as i64, window.1 as i64);
        let mut out = Vec::new();
        for j in 0..=depth {
            let m = 1i64 << j;
            for k in a * m..b * m {
                out.push(DyadicInterval::new(j, k));
            }
        }
        out
    }
}

fn interval_dist(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicTree {
    pub top: DyadicInterval,
    pub members: BTreeSet<DyadicInterval>,
}

impl DyadicTree {
    pub fn new(top: DyadicInterval) -> Self {
        let mut members = BTreeSet::new();
        members.insert(top);
        DyadicTree { top, members }
    }

    /// Checks (T1) unique maximal top, (T2) coherence, (T3) sibling pairs.
    pub fn validate(&self) -> Result<()> {
        if !self.members.contains(&self.top) {
            return Err(Error::Consistency("tree does not contain its top".into()));
        }
        for q in &self.members {
            if *q == self.top {
                continue;
            }
            if !self.top.contains(q) {
                return Err(Error::Consistency(format!("{q:?} lies outside the top {:?}", self.top)));
            }
            if !self.members.contains(&q.parent()) {
                return Err(Error::Consistency(format!("parent of {q:?} missing (coherence)")));
            }
            if !self.members.contains(&q.sibling()) {
                return Err(Error::Consistency(format!("sibling of {q:?} missing")));
            }
        }
        Ok(())
    }

    /// Members with no children in the tree.
    pub fn minimal(&self) -> Vec<DyadicInterval> {
        self.members.iter().copied().filter(|q| !self.members.contains(&q.children()[0])).collect()
    }

    pub fn finest_level(&self) -> i32 {
        self.members.iter().map(|q| q.level).max().unwrap_or(self.top.level)
    }
}

/// A tree's approximant sampled on the grid nodes of 2Q(𝒯) inside the window:
/// ψ for the Lipschitz corona, (ψ₁, ψ₂) for the tame one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximant {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values2: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoronaTree {
    #[serde(flatten)]
    pub tree: DyadicTree,
    pub linear: TameLinear,
    pub psi: Approximant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoronaDecomposition {
    pub eta: f64,
    pub depth: i32,
    pub window: (f64, f64),
    pub bad: Vec<DyadicInterval>,
    pub trees: Vec<CoronaTree>,
}

impl CoronaDecomposition {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Domain(format!("invalid decomposition JSON: {e}")))
    }

    pub fn tops(&self) -> Vec<DyadicInterval> {
        self.trees.iter().map(|t| t.tree.top).collect()
    }
}

/// Uniform sample grid whose nodes include every endpoint of the truncated grid.
struct Samples<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    h: f64,
}

impl<'a> Samples<'a> {
    fn new(xs: &'a [f64], ys: &'a [f64], depth: i32) -> Result<Self> {
        let h = sampled::uniform_spacing(xs)?;
        if xs.len() != ys.len() {
            return Err(Error::Domain("grid and values differ in length".into()));
        }
        let (a, b) = (xs[0], xs[xs.len() - 1]);
        if a.fract() != 0.0 || b.fract() != 0.0 {
            return Err(Error::Domain("the window must have integer endpoints".into()));
        }
        let ratio = (-depth as f64).exp2() / h;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return Err(Error::Domain(format!("grid spacing {h} does not resolve level {depth}")));
        }
        Ok(Samples { xs, ys, h })
    }

    fn window(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn node(&self, x: f64) -> usize {
        let i = ((x - self.xs[0]) / self.h).round();
        (i.max(0.0) as usize).min(self.xs.len() - 1)
    }

    /// Node range of [lo, hi] clipped to the window.
    fn range(&self, lo: f64, hi: f64) -> (usize, usize) {
        let (a, b) = self.window();
        let i0 = ((lo.max(a) - a) / self.h - 1e-9).ceil().max(0.0) as usize;
        let i1 = (((hi.min(b) - a) / self.h + 1e-9).floor() as usize).min(self.xs.len() - 1);
        (i0, i1)
    }

    fn beta2(&self, q: &DyadicInterval) -> f64 {
        let (lo, hi) = q.dilated(2.0);
        let (i0, i1) = self.range(lo, hi);
        let (_, _, e) = beta::minimax_affine(&self.xs[i0..=i1], &self.ys[i0..=i1]);
        e / q.len()
    }

    fn slope(&self, q: &DyadicInterval) -> f64 {
        beta::mollified_slope(self.xs, self.ys, q.center(), q.len())
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1), got {eta}")));
    }
    Ok(())
}

/// Stopping-time part shared by both coronas: bad intervals and trees with their
/// slopes a_𝒯.
fn stopping_time(s: &Samples, eta: f64, depth: i32) -> (Vec<DyadicInterval>, Vec<(DyadicTree, f64)>) {
    let beta_max = eta / 64.0;
    let slope_dev = eta / 4.0;
    let (a, b) = s.window();
    let mut queue: VecDeque<DyadicInterval> = (a as i64..b as i64).map(|k| DyadicInterval::new(0, k)).collect();
    let mut bad = Vec::new();
    let mut trees = Vec::new();
    while let Some(q) = queue.pop_front() {
        if s.beta2(&q) > beta_max {
            bad.push(q);
            if q.level < depth {
                queue.extend(q.children());
            }
            continue;
        }
        let a_t = s.slope(&q);
        let mut tree = DyadicTree::new(q);
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            if p.level >= depth {
                continue;
            }
            let ch = p.children();
            let ok = ch.iter().all(|c| s.beta2(c) <= beta_max && (s.slope(c) - a_t).abs() <= slope_dev);
            if ok {
                tree.members.extend(ch);
                stack.extend(ch);
            } else {
                queue.extend(ch);
            }
        }
        trees.push((tree, a_t));
    }
    bad.sort();
    (bad, trees)
}

/// F_𝒯 on the storage grid of the tree: interpolation of φ at the endpoints of
/// the minimal intervals, affine with slope a_𝒯 beyond the top.
fn tree_interpolant(s: &Samples, tree: &DyadicTree, a_t: f64) -> (usize, usize, Vec<f64>) {
    let top = tree.top;
    let (lo2, hi2) = top.dilated(2.0);
    let (i0, i1) = s.range(lo2, hi2);
    let mut knots: Vec<usize> = tree.minimal().iter().flat_map(|q| [s.node(q.lo()), s.node(q.hi())]).collect();
    knots.sort_unstable();
    knots.dedup();
    let first = knots[0];
    let last = *knots.last().unwrap();
    let mut out = Vec::with_capacity(i1 + 1 - i0);
    let mut k = 0usize;
    for i in i0..=i1 {
        let x = s.xs[i];
        let v = if i <= first {
            s.ys[first] + a_t * (x - s.xs[first])
        } else if i >= last {
            s.ys[last] + a_t * (x - s.xs[last])
        } else {
            while knots[k + 1] < i {
                k += 1;
            }
            let (l, r) = (knots[k], knots[k + 1]);
            let w = (i - l) as f64 / (r - l) as f64;
            s.ys[l] + w * (s.ys[r] - s.ys[l])
        };
        out.push(v);
    }
    (i0, i1, out)
}

/// Stopping-time corona of a 1-Lipschitz function sampled on a uniform grid over
/// an integer window, truncated at `depth`.
pub fn lipschitz_corona(xs: &[f64], phi: &[f64], eta: f64, depth: i32) -> Result<CoronaDecomposition> {
    check_eta(eta)?;
    let s = Samples::new(xs, phi, depth)?;
    let lip = sampled::lipschitz_const(xs, phi);
    if lip > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("input is {lip}-Lipschitz, expected at most 1")));
    }
    let (bad, raw) = stopping_time(&s, eta, depth);
    let trees = raw
        .into_iter()
        .map(|(tree, a_t)| {
            let (i0, i1, f) = tree_interpolant(&s, &tree, a_t);
            let x0 = tree.top.lo();
            let c = f[s.node(x0) - i0] - a_t * x0;
            let grid = xs[i0..=i1].to_vec();
            let values = grid.iter().zip(&f).map(|(x, v)| v - (a_t * x + c)).collect();
            let p0 = -0.5 * a_t * x0 * x0 - c * x0;
            CoronaTree { tree, linear: TameLinear { a: a_t, b: p0, c }, psi: Approximant { grid, values, values2: None } }
        })
        .collect();
    Ok(CoronaDecomposition { eta, depth, window: s.window(), bad, trees })
}

/// Tame corona: the Lipschitz corona of B₁/N at δ = min(η²/5, η/17), triangle
/// corrections on the middle halves of minimal intervals so that each minimal
/// interval carries the integral of B₁/N, ψ₂ = ∫ψ₁ from the left end of the top,
/// and the result scaled by N. Audited before returning.
pub fn tame_corona(b: &TameMapSampled, eta: f64, depth: i32) -> Result<CoronaDecomposition> {
    check_eta(eta)?;
    let n = b.declared_constant.max(1.0);
    let delta = (eta * eta / 5.0).min(eta / 17.0);
    let xs = &b.grid;
    let p1: Vec<f64> = b.b1.iter().map(|v| v / n).collect();
    let p2: Vec<f64> = b.b2.iter().map(|v| v / n).collect();
    let s = Samples::new(xs, &p1, depth)?;
    let lip = sampled::lipschitz_const(xs, &p1);
    if lip > 1.0 + 1e-9 {
        return Err(Error::Domain(format!("B₁/N is {lip}-Lipschitz; the declared constant is too small")));
    }
    let (bad, raw) = stopping_time(&s, delta, depth);
    let trees: Vec<CoronaTree> = raw
        .into_iter()
        .map(|(tree, a_t)| {
            let (i0, i1, mut f) = tree_interpolant(&s, &tree, a_t);
            for q in tree.minimal() {
                let (l, r) = (s.node(q.lo()), s.node(q.hi()));
                let dev: Vec<f64> = (l..=r).map(|i| p1[i] - f[i - i0]).collect();
                let area = sampled::trapz(&xs[l..=r], &dev);
                let len = q.len();
                let peak = 4.0 * area / len;
                let (t0, t1) = (q.lo() + 0.25 * len, q.lo() + 0.75 * len);
                let mid = 0.5 * (t0 + t1);
                for i in s.node(t0)..=s.node(t1) {
                    let x = xs[i];
                    let w = 1.0 - (x - mid).abs() / (mid - t0);
                    f[i - i0] += peak * w.max(0.0);
                }
            }
            let x0 = tree.top.lo();
            let k0 = s.node(x0) - i0;
            let c = f[k0] - a_t * x0;
            let grid = xs[i0..=i1].to_vec();
            let psi1: Vec<f64> = grid.iter().zip(&f).map(|(x, v)| v - (a_t * x + c)).collect();
            let raw2 = sampled::cumtrapz(&grid, &psi1, 0.0);
            let psi2: Vec<f64> = raw2.iter().map(|v| v - raw2[k0]).collect();
            let bconst = p2[s.node(x0)] - 0.5 * a_t * x0 * x0 - c * x0;
            CoronaTree {
                tree,
                linear: TameLinear { a: n * a_t, b: n * bconst, c: n * c },
                psi: Approximant {
                    grid,
                    values: psi1.iter().map(|v| n * v).collect(),
                    values2: Some(psi2.iter().map(|v| n * v).collect()),
                },
            }
        })
        .collect();
    let dec = CoronaDecomposition { eta, depth, window: s.window(), bad, trees };
    let rep = audit_tame(b, &dec)?;
    if !rep.passed() {
        return Err(Error::Construction(format!(
            "tame corona audit failed at {:?}: ratio {}, tameness ratio {}, Lipschitz ratio {}",
            rep.worst, rep.max_ratio, rep.tameness_ratio, rep.lip_ratio
        )));
    }
    Ok(dec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub partition_ok: bool,
    pub axioms_ok: bool,
    /// max over trees, Q ∈ 𝒯 and grid s ∈ 2Q of (approximation error)/(η|Q|), or
    /// /(ηN|Q|) in d_π for tame decompositions.
    pub max_ratio: f64,
    /// (level, index, s) attaining max_ratio.
    pub worst: Option<(i32, i64, f64)>,
    /// Lipschitz (resp. tame) constant of ψ divided by η (resp. ηN).
    pub tameness_ratio: f64,
    /// max |slope of L_𝒯| / 2, or |a|/(2N).
    pub slope_ratio: f64,
    /// Tame only: Lip(ψ₁)/(17δN).
    pub lip_ratio: f64,
    /// Tame only: max over minimal endpoints of |B₂ − (ψ₂ + P_𝒯)|.
    pub endpoint_defect: f64,
    pub bad_carleson: f64,
    pub top_carleson: f64,
    pub issues: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.partition_ok
            && self.axioms_ok
            && self.max_ratio <= 1.0
            && self.tameness_ratio <= 1.0
            && self.slope_ratio <= 1.0
            && self.lip_ratio <= 1.0
    }
}

fn structure_checks(dec: &CoronaDecomposition, issues: &mut Vec<String>) -> (bool, bool) {
    let mut count: HashMap<DyadicInterval, usize> = HashMap::new();
    for q in &dec.bad {
        *count.entry(*q).or_default() += 1;
    }
    for t in &dec.trees {
        for q in &t.tree.members {
            *count.entry(*q).or_default() += 1;
        }
    }
    let grid = DyadicInterval::truncated_grid(dec.window, dec.depth);
    let mut partition_ok = count.len() == grid.len();
    for q in &grid {
        if count.get(q) != Some(&1) {
            partition_ok = false;
            issues.push(format!("{q:?} covered {} times", count.get(q).copied().unwrap_or(0)));
            break;
        }
    }
    let mut axioms_ok = true;
    for t in &dec.trees {
        if let Err(e) = t.tree.validate() {
            axioms_ok = false;
            issues.push(e.to_string());
        }
    }
    (partition_ok, axioms_ok)
}

/// Max over trees and Q ∈ 𝒯, grid s ∈ 2Q (clipped), of err(tree, s)/|Q|.
fn worst_over_trees<F>(dec: &CoronaDecomposition, xs: &[f64], err: F) -> (f64, Option<(i32, i64, f64)>)
where
    F: Fn(&CoronaTree, usize, usize) -> f64 + Sync,
{
    let h = xs[1] - xs[0];
    let a = xs[0];
    let n = xs.len();
    dec.trees
        .par_iter()
        .map(|t| {
            let g0 = ((t.psi.grid[0] - a) / h).round() as usize;
            let mut best = (0.0f64, None);
            for q in &t.tree.members {
                let (lo, hi) = q.dilated(2.0);
                let i0 = ((lo.max(a) - a) / h - 1e-9).ceil().max(0.0) as usize;
                let i1 = ((((hi - a) / h) + 1e-9).floor() as usize).min(n - 1);
                for i in i0..=i1 {
                    let r = err(t, i, i - g0) / q.len();
                    if r > best.0 {
                        best = (r, Some((q.level, q.index, xs[i])));
                    }
                }
            }
            best
        })
        .reduce(|| (0.0, None), |x, y| if y.0 > x.0 { y } else { x })
}

/// Checks a Lipschitz decomposition of (xs, φ): partition, tree axioms, the
/// approximation bound on 2Q, Lip(ψ_𝒯) ≤ η and |slope L_𝒯| ≤ 2. Accepts
/// hand-built decompositions.
pub fn audit_lipschitz(xs: &[f64], phi: &[f64], dec: &CoronaDecomposition) -> Result<AuditReport> {
    let mut issues = Vec::new();
    let (partition_ok, axioms_ok) = structure_checks(dec, &mut issues);
    for t in &dec.trees {
        let need = t.tree.top.dilated(2.0);
        let (g0, g1) = (t.psi.grid[0], t.psi.grid[t.psi.grid.len() - 1]);
        if g0 > need.0.max(xs[0]) + 1e-12 || g1 < need.1.min(xs[xs.len() - 1]) - 1e-12 {
            return Err(Error::Domain(format!("approximant of tree {:?} does not cover 2Q(T)", t.tree.top)));
        }
    }
    let (max_err, worst) = worst_over_trees(dec, xs, |t, i, k| {
        let l = &t.linear;
        (phi[i] - (t.psi.values[k] + l.b1(xs[i]))).abs()
    });
    let lip = dec.trees.iter().map(|t| sampled::lipschitz_const(&t.psi.grid, &t.psi.values)).fold(0.0, f64::max);
    let slope = dec.trees.iter().map(|t| t.linear.a.abs()).fold(0.0, f64::max);
    Ok(AuditReport {
        partition_ok,
        axioms_ok,
        max_ratio: max_err / dec.eta,
        worst,
        tameness_ratio: lip / dec.eta,
        slope_ratio: slope / 2.0,
        lip_ratio: 0.0,
        endpoint_defect: 0.0,
        bad_carleson: max_carleson(&dec.bad, dec),
        top_carleson: max_carleson(&dec.tops(), dec),
        issues,
    })
}

/// Checks a tame decomposition of B: d_π(B(s), [ψ+𝓛](s)) ≤ ηN|Q| on 2Q, ψ
/// ηN-tame, Lip(ψ₁) ≤ 17δN, 𝓛 2N-tame-linear; also the exactness defect at
/// endpoints of minimal intervals.
pub fn audit_tame(b: &TameMapSampled, dec: &CoronaDecomposition) -> Result<AuditReport> {
    let mut issues = Vec::new();
    let (partition_ok, axioms_ok) = structure_checks(dec, &mut issues);
    let n = b.declared_constant.max(1.0);
    let eta = dec.eta;
    let delta = (eta * eta / 5.0).min(eta / 17.0);
    let xs = &b.grid;
    if dec.trees.iter().any(|t| t.psi.values2.is_none()) {
        return Err(Error::Domain("tame audit needs the second component".into()));
    }
    let (max_err, worst) = worst_over_trees(dec, xs, |t, i, k| {
        let l = &t.linear;
        let v2 = t.psi.values2.as_ref().unwrap();
        let d1 = (b.b1[i] - (t.psi.values[k] + l.b1(xs[i]))).abs();
        let d2 = (b.b2[i] - (v2[k] + l.b2(xs[i]))).abs();
        d1.max(d2.sqrt())
    });
    let tameness = dec
        .trees
        .par_iter()
        .map(|t| tame::tameness_two_sided(&t.psi.grid, &t.psi.values, t.psi.values2.as_ref().unwrap()))
        .reduce(|| 0.0, f64::max);
    let lip = dec.trees.iter().map(|t| sampled::lipschitz_const(&t.psi.grid, &t.psi.values)).fold(0.0, f64::max);
    let slope = dec.trees.iter().map(|t| t.linear.a.abs()).fold(0.0, f64::max);
    let h = xs[1] - xs[0];
    let mut defect: f64 = 0.0;
    for t in &dec.trees {
        let v2 = t.psi.values2.as_ref().unwrap();
        let g0 = t.psi.grid[0];
        for q in t.tree.minimal() {
            for e in [q.lo(), q.hi()] {
                let i = ((e - xs[0]) / h).round() as usize;
                let k = ((e - g0) / h).round() as usize;
                if i < xs.len() && k < v2.len() {
                    defect = defect.max((b.b2[i] - (v2[k] + t.linear.b2(e))).abs());
                }
            }
        }
    }
    Ok(AuditReport {
        partition_ok,
        axioms_ok,
        max_ratio: max_err / (eta * n),
        worst,
        tameness_ratio: tameness / (eta * n) * (1.0 - 1e-12),
        slope_ratio: slope / (2.0 * n),
        lip_ratio: lip / (17.0 * delta * n) * (1.0 - 1e-12),
        endpoint_defect: defect,
        bad_carleson: max_carleson(&dec.bad, dec),
        top_carleson: max_carleson(&dec.tops(), dec),
        issues,
    })
}

/// Σ_{Q ∈ family, Q ⊆ Q₀} |Q| / |Q₀|.
pub fn carleson_sum(family: &[DyadicInterval], q0: &DyadicInterval) -> f64 {
    family.iter().filter(|q| q0.contains(q)).map(|q| q.len()).sum::<f64>() / q0.len()
}

/// max over Q₀ in the truncated grid of carleson_sum(family, Q₀).
pub fn max_carleson(family: &[DyadicInterval], dec: &CoronaDecomposition) -> f64 {
    let mut by_level: HashMap<(i32, i64), f64> = HashMap::new();
    // accumulate each member into all its ancestors down to level 0
    for q in family {
        let mut p = *q;
        loop {
            *by_level.entry((p.level, p.index)).or_default() += q.len();
            if p.level == 0 {
                break;
            }
            p = p.parent();
        }
    }
    by_level
        .iter()
        .filter(|((j, _), _)| *j <= dec.depth)
        .map(|((j, _), v)| v * (*j as f64).exp2())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeRegionData {
    pub tree: DyadicTree,
    pub rho: f64,
    pub grid: Vec<f64>,
    /// h(x) on grid points of Q(𝒯), NaN elsewhere.
    pub h: Vec<f64>,
    pub d: Vec<f64>,
    pub whitney: Vec<DyadicInterval>,
    /// max over grid y ∈ S ∈ 𝒮 of max(|S|/d(y), d(y)/(4|S|)); at most 1 when
    /// |S| ≤ d ≤ 4|S| holds.
    pub whitney_ratio: f64,
}

impl TreeRegionData {
    pub fn big_d(&self, i: usize, k: usize) -> f64 {
        0.25 * (self.d[i] + self.d[k])
    }
}

/// d(x) = min over Q ∈ 𝒯 of |Q| + dist(x, Q), with closed intervals.
pub fn tree_distance(tree: &DyadicTree, x: f64) -> f64 {
    tree.members
        .iter()
        .map(|q| q.len() + interval_dist(x, q.lo(), q.hi()))
        .fold(f64::INFINITY, f64::min)
}

fn inf_d_over(tree: &DyadicTree, lo: f64, hi: f64) -> f64 {
    tree.members
        .iter()
        .map(|q| {
            let gap = if hi < q.lo() {
                q.lo() - hi
            } else if lo > q.hi() {
                lo - q.hi()
            } else {
                0.0
            };
            q.len() + gap
        })
        .fold(f64::INFINITY, f64::min)
}

/// h, d and the Whitney family of maximal dyadic I with inf_I d ≥ |I| meeting
/// 3Q(𝒯), with the two-sided bound |S| ≤ d ≤ 4|S| checked on the grid.
pub fn tree_regions(tree: &DyadicTree, grid: &[f64]) -> TreeRegionData {
    let top = tree.top;
    let d: Vec<f64> = grid.par_iter().map(|&x| tree_distance(tree, x)).collect();
    let h: Vec<f64> = grid
        .iter()
        .map(|&x| {
            if !top.contains_point(x) {
                return f64::NAN;
            }
            tree.members
                .iter()
                .filter(|q| q.contains_point(x))
                .map(|q| q.len())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let (r0, r1) = top.dilated(3.0);
    let start_level = top.level - 2;
    let sz = (-start_level as f64).exp2();
    let mut stack: Vec<DyadicInterval> = ((r0 / sz).floor() as i64..(r1 / sz).ceil() as i64)
        .map(|k| DyadicInterval::new(start_level, k))
        .collect();
    let cap = tree.finest_level() + 3;
    let mut whitney = Vec::new();
    while let Some(i) = stack.pop() {
        if i.hi() <= r0 || i.lo() >= r1 {
            continue;
        }
        if inf_d_over(tree, i.lo(), i.hi()) >= i.len() {
            whitney.push(i);
        } else if i.level < cap {
            stack.extend(i.children());
        }
    }
    whitney.sort();
    let mut ratio: f64 = 0.0;
    for s in &whitney {
        for (x, dv) in grid.iter().zip(&d) {
            if *x >= s.lo() && *x <= s.hi() {
                ratio = ratio.max(s.len() / dv).max(dv / (4.0 * s.len()));
            }
        }
    }
    TreeRegionData { tree: tree.clone(), rho: 2.0 * top.len(), grid: grid.to_vec(), h, d, whitney, whitney_ratio: ratio }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotatedGraph {
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    pub linear: TameLinear,
    pub lipschitz: f64,
}

/// Rewrites the rotated graph R_θ{(x, φ(x))} as the graph of ψ + L with
/// L(z) = z tan θ: ψ(z(x)) = φ(x)/cos θ, z(x) = x cos θ − φ(x) sin θ.
pub fn reparam_rotated_graph(xs: &[f64], phi: &[f64], theta: f64) -> Result<RotatedGraph> {
    let (s, c) = theta.sin_cos();
    if !(c > 0.0) || (s / c).abs() > 2.0 {
        return Err(Error::Domain(format!("need cos θ > 0 and |tan θ| <= 2, got θ = {theta}")));
    }
    let z: Vec<f64> = xs.iter().zip(phi).map(|(x, p)| x * c - p * s).collect();
    if !sampled::is_increasing(&z) {
        return Err(Error::Domain("z(x) = x cos θ − φ(x) sin θ is not increasing".into()));
    }
    let psi: Vec<f64> = phi.iter().map(|p| p / c).collect();
    let lipschitz = sampled::lipschitz_const(&z, &psi);
    Ok(RotatedGraph { z, psi, linear: TameLinear { a: s / c, b: 0.0, c: 0.0 }, lipschitz })
}
