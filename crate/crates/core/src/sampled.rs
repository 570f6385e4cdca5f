//! Helpers for functions sampled on 1D grids.

use crate::error::{Error, Result};

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { b } else { a + h * i as f64 }).collect()
        }
    }
}

/// Spacing of a uniform grid; errors if the grid is not strictly increasing and
/// uniform to 1e-9 relative.
pub fn uniform_spacing(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::Domain("grid needs at least two nodes".into()));
    }
    let h = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    for w in xs.windows(2) {
        let d = w[1] - w[0];
        if (d - h).abs() > 1e-9 * h.max(1e-300) * (1.0 + (xs[0].abs().max(xs[xs.len() - 1].abs()) / h).min(1e6)) {
            return Err(Error::Domain(format!("grid is not uniform: step {d} vs {h}")));
        }
    }
    Ok(h)
}

pub fn is_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Cumulative trapezoid integral starting from `c0` at xs[0].
pub fn cumtrapz(xs: &[f64], ys: &[f64], c0: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = c0;
    for i in 0..xs.len() {
        if i > 0 {
            acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn trapz(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Lipschitz constant of the sample set (equal to the max consecutive slope).
pub fn lipschitz_const(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
        .fold(0.0, f64::max)
}

/// Piecewise-linear interpolation, constant extrapolation outside the grid.
pub fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i - 1,
    };
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Symmetric finite differences, one-sided at the ends.
pub fn derivative(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            if n < 2 {
                0.0
            } else if i == 0 {
                (ys[1] - ys[0]) / (xs[1] - xs[0])
            } else if i == n - 1 {
                (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2])
            } else {
                (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1])
            }
        })
        .collect()
}

/// Index of the grid node nearest to x.
pub fn nearest_index(xs: &[f64], x: f64) -> usize {
    match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i,
        Err(0) => 0,
        Err(i) if i >= xs.len() => xs.len() - 1,
        Err(i) => {
            if (x - xs[i - 1]).abs() <= (xs[i] - x).abs() {
                i - 1
            } else {
                i
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_helpers() {
        let xs = linspace(0.0, 1.0, 11);
        assert_eq!(xs.len(), 11);
        assert_eq!(xs[10], 1.0);
        assert!((uniform_spacing(&xs).unwrap() - 0.1).abs() < 1e-15);
        assert!(uniform_spacing(&[0.0, 0.1, 0.3]).is_err());
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        assert!((trapz(&xs, &ys) - 1.0).abs() < 1e-14);
        assert!((lipschitz_const(&xs, &ys) - 2.0).abs() < 1e-12);
        assert!((interp(&xs, &ys, 0.55) - 1.1).abs() < 1e-14);
        assert_eq!(nearest_index(&xs, 0.34), 3);
        assert_eq!(nearest_index(&xs, -5.0), 0);
        let d = derivative(&xs, &ys);
        assert!(d.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
