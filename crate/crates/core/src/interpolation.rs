//! Interpolation with a function parameter on the diagonal model.
//!
//! For a regular pair of weighted spaces with weights `w₀ ≤ w₁` diagonal in
//! the same basis, interpolation with parameter `ψ` gives the weight
//! `w₀ · ψ(w₁/w₀)`. With
//!
//! ```text
//! ψ(r) = r^{(s−s₀)/(s₁−s₀)} φ(r^{1/(s₁−s₀)})   (r ≥ 1),     ψ(r) = φ(1)   (0 < r < 1)
//! ```
//!
//! the Sobolev pair `(r^{s₀}, r^{s₁})` interpolates to `r^s φ(r)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::weights::SlowlyVaryingFn;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationParam {
    s0: f64,
    s: f64,
    s1: f64,
    phi: SlowlyVaryingFn,
}

impl InterpolationParam {
    pub fn new(s0: f64, s: f64, s1: f64, phi: SlowlyVaryingFn) -> Result<Self> {
        if !(s0.is_finite() && s1.is_finite() && s0 < s && s < s1) {
            return Err(Error::Argument(format!(
                "interpolation needs s0 < s < s1, got ({s0}, {s}, {s1})"
            )));
        }
        phi.validate()?;
        Ok(InterpolationParam { s0, s, s1, phi })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn s1(&self) -> f64 {
        self.s1
    }

    pub fn phi(&self) -> &SlowlyVaryingFn {
        &self.phi
    }
}

/// `ψ(r)`.
pub fn psi_eval(param: &InterpolationParam, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("ψ is defined for r > 0, got {r}")));
    }
    if r < 1.0 {
        return param.phi.eval(1.0);
    }
    let width = param.s1 - param.s0;
    let theta = (param.s - param.s0) / width;
    Ok(r.powf(theta) * param.phi.eval(r.powf(1.0 / width))?)
}

/// `w[i] = w₀[i] · ψ(w₁[i] / w₀[i])`.
pub fn interpolate_diag(w0: &[f64], w1: &[f64], param: &InterpolationParam) -> Result<Vec<f64>> {
    if w0.len() != w1.len() {
        return Err(Error::Argument(format!(
            "weight sequences differ in length ({} vs {})",
            w0.len(),
            w1.len()
        )));
    }
    w0.iter()
        .zip(w1)
        .enumerate()
        .map(|(i, (&a, &b))| {
            if !(a > 0.0 && b >= a && b.is_finite()) {
                return Err(Error::Argument(format!(
                    "weights at index {i} violate 0 < w0 ≤ w1: ({a}, {b})"
                )));
            }
            Ok(a * psi_eval(param, b / a)?)
        })
        .collect()
}

/// Max relative deviation of `r^{s₀} ψ(r^{s₁−s₀})` from `r^s φ(r)` on `grid`.
pub fn verify_weight_identity(param: &InterpolationParam, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Argument("empty radius grid".into()));
    }
    let mut worst = 0.0f64;
    for &r in grid {
        if !(r >= 1.0) {
            return Err(Error::Domain(format!("grid radius {r} < 1")));
        }
        let lhs = r.powf(param.s0) * psi_eval(param, r.powf(param.s1 - param.s0))?;
        let rhs = r.powf(param.s) * param.phi.eval(r)?;
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok(worst)
}

/// Interpolates the pair `(r^{s−ε}φ(r), r^{s+ε}φ(r))` with the midpoint
/// parameter `ψ(r) = r^{1/2}` at every grid radius.
pub fn midpoint_space_weights(s: f64, eps: f64, phi: &SlowlyVaryingFn, grid: &[f64]) -> Result<Vec<f64>> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Argument(format!("ε must lie in (0, 1/2), got {eps}")));
    }
    if !(s - eps > 2.0) {
        return Err(Error::Argument(format!("s − ε = {} must exceed 2", s - eps)));
    }
    let mid = InterpolationParam::new(s - eps, s, s + eps, SlowlyVaryingFn::one())?;
    let mut w0 = Vec::with_capacity(grid.len());
    let mut w1 = Vec::with_capacity(grid.len());
    for &r in grid {
        let v = phi.eval(r)?;
        w0.push(r.powf(s - eps) * v);
        w1.push(r.powf(s + eps) * v);
    }
    interpolate_diag(&w0, &w1, &mid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidpointReport {
    pub s: f64,
    pub eps: Vec<f64>,
    /// Max relative deviation from `r^s φ(r)`, per `ε`.
    pub deviation: Vec<f64>,
    /// Max relative spread between the weights obtained for different `ε`.
    pub eps_spread: f64,
}

impl MidpointReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviation.iter().copied().fold(self.eps_spread, f64::max)
    }
}

/// Runs [`midpoint_space_weights`] for each `ε` and compares the results
/// with `r^s φ(r)` and with each other.
pub fn midpoint_check(s: f64, eps: &[f64], phi: &SlowlyVaryingFn, grid: &[f64]) -> Result<MidpointReport> {
    if eps.is_empty() || grid.is_empty() {
        return Err(Error::Argument("midpoint check needs ε values and radii".into()));
    }
    let exact: Vec<f64> = grid
        .iter()
        .map(|&r| Ok(r.powf(s) * phi.eval(r)?))
        .collect::<Result<_>>()?;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut deviation = Vec::with_capacity(eps.len());
    let mut first: Option<Vec<f64>> = None;
    let mut eps_spread = 0.0f64;
    for &e in eps {
        let w = midpoint_space_weights(s, e, phi, grid)?;
        deviation.push(w.iter().zip(&exact).map(|(&a, &b)| rel(a, b)).fold(0.0, f64::max));
        match &first {
            None => first = Some(w),
            Some(w0) => {
                let d = w.iter().zip(w0).map(|(&a, &b)| rel(a, b)).fold(0.0, f64::max);
                eps_spread = eps_spread.max(d);
            }
        }
    }
    Ok(MidpointReport {
        s,
        eps: eps.to_vec(),
        deviation,
        eps_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::log_grid;
    use std::f64::consts::E;

    fn sobolev(s0: f64, s: f64, s1: f64) -> InterpolationParam {
        InterpolationParam::new(s0, s, s1, SlowlyVaryingFn::one()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let p = sobolev(2.0, 3.0, 4.0);
        assert!((psi_eval(&p, 9.0).unwrap() - 3.0).abs() < 1e-15);
        let ln = SlowlyVaryingFn::log_multiscale(&[1.0]).unwrap();
        let q = InterpolationParam::new(2.0, 3.0, 4.0, ln.clone()).unwrap();
        assert_eq!(psi_eval(&q, 0.5).unwrap(), ln.eval(1.0).unwrap());
        let v = psi_eval(&q, E.powi(4)).unwrap();
        let expected = E * E * ln.eval(E * E).unwrap();
        assert!(((v - expected) / expected).abs() < 1e-14);
        assert!(psi_eval(&q, 0.0).is_err());
    }

    #[test]
    fn psi_continuous_at_one() {
        let ln = SlowlyVaryingFn::log_multiscale(&[2.0, 1.0]).unwrap();
        let q = InterpolationParam::new(2.5, 3.0, 4.5, ln).unwrap();
        let below = psi_eval(&q, 1.0 - 1e-12).unwrap();
        let at = psi_eval(&q, 1.0).unwrap();
        assert!((below - at).abs() <= 1e-10 * at);
    }

    #[test]
    fn ordering_is_enforced() {
        assert!(InterpolationParam::new(3.0, 3.0, 4.0, SlowlyVaryingFn::one()).is_err());
        let p = sobolev(2.0, 3.0, 4.0);
        assert!(interpolate_diag(&[2.0], &[1.0], &p).is_err());
        assert!(interpolate_diag(&[1.0, 1.0], &[1.0], &p).is_err());
    }

    #[test]
    fn diag_examples() {
        let p = sobolev(2.0, 3.0, 4.0);
        assert_eq!(interpolate_diag(&[5.0], &[5.0], &p).unwrap(), vec![5.0]);
        let r = 7.0;
        let w = interpolate_diag(&[1.0], &[r * r], &p).unwrap();
        assert!((w[0] - r).abs() < 1e-14);
    }

    #[test]
    fn identity_for_constant_phi() {
        let grid = log_grid(1.0, 1e6, 100);
        let err = verify_weight_identity(&sobolev(2.2, 3.7, 5.1), &grid).unwrap();
        assert!(err <= 1e-13, "{err}");
        let one = verify_weight_identity(&sobolev(2.2, 3.7, 5.1), &[1.0]).unwrap();
        assert_eq!(one, 0.0);
    }

    #[test]
    fn midpoint_is_eps_independent() {
        let phi = SlowlyVaryingFn::log_multiscale(&[1.0]).unwrap();
        let grid = log_grid(1.0, 1e8, 50);
        let rep = midpoint_check(3.5, &[0.1, 0.2, 0.4], &phi, &grid).unwrap();
        assert!(rep.max_deviation() <= 1e-12, "{rep:?}");
        assert!(midpoint_space_weights(3.0, 0.6, &phi, &grid).is_err());
        assert!(midpoint_space_weights(2.1, 0.2, &phi, &grid).is_err());
    }
}
