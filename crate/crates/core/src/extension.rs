//! Reflection extension of functions on `[0, L]` to the circle of length `2L`.
//!
//! On `(L, 3L/2]` the extension is `χ(y−L) Σₘ λₘ u(L − (y−L)/m)` and on
//! `[3L/2, 2L)` it is `χ(2L−y) Σₘ λₘ u((2L−y)/m)`, with `m = 1..K` and
//! `Σₘ λₘ (−1/m)^p = 1` for `p < K`, so derivatives up to order `K−1` match
//! at both ends. `χ` is a C^∞ cutoff equal to 1 at distance 0 (to infinite
//! order) and to 0 from distance `L/2` on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

pub const DEFAULT_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct HestenesExtension {
    lambda: Vec<f64>,
}

fn bump(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (-1.0 / z).exp()
    }
}

/// Smooth step: 0 for `z ≤ 0`, 1 for `z ≥ 1`.
fn smooth_step(z: f64) -> f64 {
    let a = bump(z);
    let b = bump(1.0 - z);
    a / (a + b)
}

impl HestenesExtension {
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=8).contains(&order) {
            return Err(Error::Argument(format!(
                "extension order must be in 1..=8, got {order}"
            )));
        }
        let v = DMatrix::from_fn(order, order, |p, m| (-1.0 / (m + 1) as f64).powi(p as i32));
        let lambda = v
            .lu()
            .solve(&DVector::from_element(order, 1.0))
            .ok_or_else(|| Error::Numerical("singular reflection system".into()))?;
        Ok(HestenesExtension {
            lambda: lambda.iter().copied().collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.lambda.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.lambda
    }

    /// Cutoff at distance `d` from the interval end.
    pub fn cutoff(d: f64, len: f64) -> f64 {
        smooth_step(1.0 - 2.0 * d / len)
    }

    /// The extension at `y ∈ [0, 2L)` as `Σ wᵢ u(xᵢ)` with `xᵢ ∈ [0, L]`.
    pub fn stencil(&self, y: f64, len: f64) -> Vec<(f64, f64)> {
        if y <= len {
            return vec![(1.0, y.max(0.0))];
        }
        let (d, right) = if y <= 1.5 * len {
            (y - len, true)
        } else {
            (2.0 * len - y, false)
        };
        let chi = Self::cutoff(d, len);
        if chi == 0.0 {
            return Vec::new();
        }
        self.lambda
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let off = d / (i + 1) as f64;
                (chi * l, if right { len - off } else { off })
            })
            .collect()
    }
}

/// How one axis of a domain is placed on a periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Already periodic with this period.
    Periodic(f64),
    /// The interval `[0, L]`, extended to period `2L`.
    Extended(f64),
}

impl Axis {
    pub fn period(&self) -> f64 {
        match *self {
            Axis::Periodic(l) => l,
            Axis::Extended(l) => 2.0 * l,
        }
    }
}

/// Samples the extension of `u` on a uniform grid of the periodic box and
/// transforms it to a [`SpectralField`]. The last axis is time when
/// `has_time` is set.
pub fn extend_to_field(
    ext: &HestenesExtension,
    axes: &[Axis],
    grid: &[usize],
    has_time: bool,
    u: impl Fn(&[f64]) -> Complex64 + Sync,
) -> Result<SpectralField> {
    if axes.len() != grid.len() {
        return Err(Error::Argument("axis and grid counts differ".into()));
    }
    let periods: Vec<f64> = axes.iter().map(Axis::period).collect();
    let total: usize = grid.iter().product();
    let values: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; grid.len()];
            let mut rest = flat;
            for a in (0..grid.len()).rev() {
                idx[a] = rest % grid[a];
                rest /= grid[a];
            }
            let stencils: Vec<Vec<(f64, f64)>> = axes
                .iter()
                .zip(&idx)
                .zip(grid)
                .map(|((axis, &i), &n)| {
                    let y = i as f64 * axis.period() / n as f64;
                    match *axis {
                        Axis::Periodic(_) => vec![(1.0, y)],
                        Axis::Extended(l) => ext.stencil(y, l),
                    }
                })
                .collect();
            let mut acc = Complex64::new(0.0, 0.0);
            let mut pick = vec![0usize; axes.len()];
            let mut point = vec![0.0; axes.len()];
            if stencils.iter().any(Vec::is_empty) {
                return acc;
            }
            loop {
                let mut w = 1.0;
                for (a, &k) in pick.iter().enumerate() {
                    let (wk, x) = stencils[a][k];
                    w *= wk;
                    point[a] = x;
                }
                acc += u(&point) * w;
                let mut a = 0;
                while a < pick.len() {
                    pick[a] += 1;
                    if pick[a] < stencils[a].len() {
                        break;
                    }
                    pick[a] = 0;
                    a += 1;
                }
                if a == pick.len() {
                    break;
                }
            }
            acc
        })
        .collect();
    let space_dims = axes.len() - has_time as usize;
    SpectralField::from_samples(space_dims, has_time, grid, &periods, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moment_conditions() {
        for k in 1..=6 {
            let ext = HestenesExtension::new(k).unwrap();
            for p in 0..k {
                let s: f64 = ext
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(m, &l)| l * (-1.0 / (m + 1) as f64).powi(p as i32))
                    .sum();
                assert!((s - 1.0).abs() < 1e-9, "order {k}, moment {p}: {s}");
            }
        }
    }

    #[test]
    fn extension_is_smooth_at_the_ends() {
        let ext = HestenesExtension::new(4).unwrap();
        let u = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x.powi(3);
        let eval = |y: f64| ext.stencil(y, 1.0).iter().map(|&(w, x)| w * u(x)).sum::<f64>();
        let h = 1e-4;
        for end in [1.0, 2.0] {
            let inside = if end == 1.0 { u(1.0 - h) } else { u(h) };
            let outside = if end == 1.0 { eval(1.0 + h) } else { eval(2.0 - h) };
            let base = if end == 1.0 { u(1.0) } else { u(0.0) };
            // the second difference across the joint is O(h²) only if u' matches there
            assert!((inside + outside - 2.0 * base).abs() < 1e-6, "end {end}");
        }
        assert!(ext.stencil(1.5, 1.0).is_empty());
    }

    #[test]
    fn periodic_axes_sample_directly() {
        let ext = HestenesExtension::new(4).unwrap();
        let f = extend_to_field(&ext, &[Axis::Periodic(2.0)], &[8], false, |x| {
            Complex64::new((std::f64::consts::PI * x[0]).cos(), 0.0)
        })
        .unwrap();
        let c = f.mode(&[1]).unwrap();
        assert!((c.re - 0.5).abs() < 1e-14);
    }
}
