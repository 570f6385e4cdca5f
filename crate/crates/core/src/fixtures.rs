//! Named test objects shared by the runner, the acceptance suite and the benches.

use crate::error::{Error, Result};
use crate::flag::FlagSpec;
use crate::heis::{HPoint, HorizontalSubgroup};
use crate::ilg::{curve_from_graph, Curve, IlgFunction};
use crate::sampled::linspace;
use crate::tame::{TameLinear, TameMapSampled};
use std::f64::consts::PI;

pub const CURVES: [&str; 3] = ["hilbert-line", "ilg-sine", "ilg-abs"];
pub const FLAGS: [&str; 3] = ["flat", "abs", "sine"];
pub const LIPSCHITZ: [&str; 3] = ["affine", "abs", "sine"];
pub const TAME: [&str; 3] = ["linear", "sine", "abs"];

fn unknown<T>(what: &str, name: &str, known: &[&str]) -> Result<T> {
    Err(Error::Domain(format!("unknown {what} fixture '{name}' (known: {})", known.join(", "))))
}

/// Uniform grid on [a, b] whose nodes contain every dyadic endpoint down to `depth`.
pub fn corona_grid(a: f64, b: f64, depth: i32) -> Vec<f64> {
    let n = ((b - a) * (depth as f64 + 3.0).exp2()).round() as usize + 1;
    linspace(a, b, n)
}

/// φ₁(v) = sin(2πv)/(2π) over the x-axis on [0, 1]; measured intrinsic constant 1.
pub fn ilg_sine(nodes: usize) -> Result<IlgFunction> {
    let g = linspace(0.0, 1.0, nodes);
    let p = g.iter().map(|v| (2.0 * PI * v).sin() / (2.0 * PI)).collect();
    IlgFunction::from_phi1(HorizontalSubgroup::x_axis(), g, p, 0.0)
}

/// φ₁(v) = |v − 1/2|/2 over the x-axis on [0, 1].
pub fn ilg_abs(nodes: usize) -> Result<IlgFunction> {
    let g = linspace(0.0, 1.0, nodes);
    let p = g.iter().map(|v| 0.5 * (v - 0.5).abs()).collect();
    IlgFunction::from_phi1(HorizontalSubgroup::x_axis(), g, p, 0.0)
}

/// n samples of a named curve over the parameter interval [0, 1].
pub fn curve(name: &str, n: usize) -> Result<Curve> {
    match name {
        "hilbert-line" => Curve::horizontal_line(HPoint::ORIGIN, 0.0, 0.0, 1.0, n),
        "ilg-sine" => curve_from_graph(&ilg_sine(n.max(2049))?, (0.0, 1.0), n),
        "ilg-abs" => curve_from_graph(&ilg_abs(n.max(2049))?, (0.0, 1.0), n),
        _ => unknown("curve", name, &CURVES),
    }
}

/// Flag profiles on y ∈ [−1, 1] with the given t-window.
pub fn flag(name: &str, t_window: (f64, f64)) -> Result<FlagSpec> {
    match name {
        "flat" => FlagSpec::from_fn((-1.0, 1.0), 65, t_window, |_| 0.0),
        "abs" => FlagSpec::from_fn((-1.0, 1.0), 65, t_window, |y| 0.5 * y.abs()),
        "sine" => FlagSpec::from_fn((-1.0, 1.0), 129, t_window, |y| (PI * y).sin() / PI),
        _ => unknown("flag", name, &FLAGS),
    }
}

/// 1-Lipschitz samples on the corona grid over [−1, 1].
pub fn lipschitz(name: &str, depth: i32) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = corona_grid(-1.0, 1.0, depth);
    let f: fn(f64) -> f64 = match name {
        "affine" => |x| 0.4 * x + 0.1,
        "abs" => f64::abs,
        "sine" => |x| (3.0 * x).sin() / 3.0,
        _ => return unknown("Lipschitz", name, &LIPSCHITZ),
    };
    let ys = xs.iter().map(|&x| f(x)).collect();
    Ok((xs, ys))
}

/// Tame maps on the corona grid over [0, 2].
pub fn tame(name: &str, depth: i32) -> Result<TameMapSampled> {
    let xs = corona_grid(0.0, 2.0, depth);
    match name {
        "linear" => Ok(TameLinear { a: 0.7, b: -0.2, c: 0.3 }.sample(&xs)),
        "sine" => {
            let b1 = xs.iter().map(|x| (3.0 * x).sin() / 3.0 + 0.3 * (x - 1.0).abs()).collect();
            TameMapSampled::from_b1(xs, b1, 0.0, 1.5)
        }
        "abs" => {
            let b1 = xs.iter().map(|x| 0.5 * (x - 1.0).abs()).collect();
            TameMapSampled::from_b1(xs, b1, 0.0, 1.0)
        }
        _ => unknown("tame", name, &TAME),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilg::ilg_check;

    #[test]
    fn named_fixtures_build() {
        assert!((ilg_check(&ilg_sine(1025).unwrap()) - 1.0).abs() < 1e-3);
        for c in CURVES {
            assert_eq!(curve(c, 65).unwrap().len(), 65);
        }
        for f in FLAGS {
            flag(f, (-0.5, 0.5)).unwrap();
        }
        for l in LIPSCHITZ {
            lipschitz(l, 4).unwrap();
        }
        for t in TAME {
            tame(t, 4).unwrap();
        }
        assert!(curve("nope", 8).is_err());
    }
}
