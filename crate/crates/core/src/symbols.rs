//! Problem description and principal symbols.
//!
//! The system is
//!
//! ```text
//! ∂ₜuⱼ + Σₖ Σ_{|α|≤2} a^α_{j,k}(x,t) D^α uₖ = fⱼ    in Ω = G × (0, τ)
//! Σₖ Σ_{|α|≤lⱼ} b^α_{j,k}(x,t) D^α uₖ = gⱼ          on S = Γ × (0, τ)
//! uⱼ(·, 0) = hⱼ                                      in G
//! ```
//!
//! with `D_m = i ∂/∂x_m` throughout. With this convention the heat operator
//! `∂ₜ − Δ` has `a^{2e_m}_{j,j} = 1`, since `D_m² = −∂_m²`, and its principal
//! symbol is `p + |ξ|²`. Indices `j`, `k` are zero-based in code.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiPoly, Poly, PolyMatrix};

const GEOM_TOL: f64 = 1e-12;

/// Model domains. `Slab` is `[0, L₁] × T^{n−1}` with boundary faces
/// `x₁ = 0` (inward normal `+e₁`) and `x₁ = L₁` (inward normal `−e₁`);
/// the remaining axes are periodic with the listed lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    Periodic { lengths: Vec<f64> },
    Slab { lengths: Vec<f64> },
}

impl Domain {
    pub fn lengths(&self) -> &[f64] {
        match self {
            Domain::Periodic { lengths } | Domain::Slab { lengths } => lengths,
        }
    }

    pub fn has_boundary(&self) -> bool {
        matches!(self, Domain::Slab { .. })
    }

    /// Boundary faces as `(x₁ value, inward unit normal)`.
    pub fn faces(&self) -> Vec<Face> {
        match self {
            Domain::Periodic { .. } => Vec::new(),
            Domain::Slab { lengths } => vec![
                Face { x1: 0.0, inward: 1.0 },
                Face {
                    x1: lengths[0],
                    inward: -1.0,
                },
            ],
        }
    }

    pub fn contains_closure(&self, x: &[f64]) -> bool {
        x.len() == self.lengths().len()
            && x.iter()
                .zip(self.lengths())
                .all(|(&v, &l)| v >= -GEOM_TOL && v <= l + GEOM_TOL)
    }

    /// Face containing `x`, if `x` lies on the boundary.
    pub fn face_of(&self, x: &[f64]) -> Option<Face> {
        if !self.contains_closure(x) {
            return None;
        }
        self.faces().into_iter().find(|f| (x[0] - f.x1).abs() <= GEOM_TOL)
    }
}

/// A boundary face `x₁ = const` of a slab.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Face {
    pub x1: f64,
    /// Sign of the first component of the inward normal.
    pub inward: f64,
}

impl Face {
    pub fn normal(&self, dims: usize) -> Vec<f64> {
        let mut nu = vec![0.0; dims];
        nu[0] = self.inward;
        nu
    }
}

pub type CoeffKey = (usize, usize, Vec<u32>);

/// Full data of a second-order system with boundary orders `lⱼ ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    components: usize,
    space_dims: usize,
    tau: f64,
    orders: Vec<u32>,
    a: BTreeMap<CoeffKey, MultiPoly>,
    b: BTreeMap<CoeffKey, MultiPoly>,
    domain: Domain,
}

/// Multi-indices of order exactly `order` in `dims` variables, in
/// lexicographically decreasing order.
pub fn multi_indices(dims: usize, order: u32) -> Vec<Vec<u32>> {
    if dims == 0 {
        return if order == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in (0..=order).rev() {
        for mut rest in multi_indices(dims - 1, order - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `ξ^α` for complex `ξ`.
fn mono(xi: &[Complex64], alpha: &[u32]) -> Complex64 {
    xi.iter()
        .zip(alpha)
        .fold(Complex64::new(1.0, 0.0), |acc, (&v, &k)| acc * v.powu(k))
}

/// `(ξ + ζν)^α` as a polynomial in `ζ`.
fn mono_in_zeta(xi: &[f64], nu: &[f64], alpha: &[u32]) -> Poly {
    let mut acc = Poly::constant(Complex64::new(1.0, 0.0));
    for ((&x, &n), &k) in xi.iter().zip(nu).zip(alpha) {
        let lin = Poly::from_real(&[x, n]);
        for _ in 0..k {
            acc = &acc * &lin;
        }
    }
    acc
}

impl ProblemSpec {
    pub fn new(components: usize, space_dims: usize, tau: f64, orders: Vec<u32>, domain: Domain) -> Result<Self> {
        if components == 0 {
            return Err(Error::Argument("system needs at least one component".into()));
        }
        if space_dims == 0 {
            return Err(Error::Argument("space dimension must be at least 1".into()));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Argument(format!("time horizon must be positive, got {tau}")));
        }
        if orders.len() != components {
            return Err(Error::Argument(format!(
                "{} boundary orders given for {components} components",
                orders.len()
            )));
        }
        if let Some(l) = orders.iter().find(|&&l| l > 1) {
            return Err(Error::Argument(format!("boundary orders must be 0 or 1, got {l}")));
        }
        if domain.lengths().len() != space_dims {
            return Err(Error::Argument(format!(
                "domain has {} axes, expected {space_dims}",
                domain.lengths().len()
            )));
        }
        if let Some(l) = domain.lengths().iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::Argument(format!("domain lengths must be positive, got {l}")));
        }
        Ok(ProblemSpec {
            components,
            space_dims,
            tau,
            orders,
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            domain,
        })
    }

    /// `∂ₜ − Δ` on every component with identity boundary rows of the given
    /// order: `Bⱼⱼ = 1` for `l = 0`, `Bⱼⱼ = D₁` for `l = 1`.
    pub fn decoupled_heat(components: usize, space_dims: usize, tau: f64, order: u32, domain: Domain) -> Result<Self> {
        let mut spec = ProblemSpec::new(components, space_dims, tau, vec![order; components], domain)?;
        for j in 0..components {
            for m in 0..space_dims {
                let mut alpha = vec![0; space_dims];
                alpha[m] = 2;
                spec.add_a(j, j, &alpha, MultiPoly::constant(space_dims, Complex64::new(1.0, 0.0)))?;
            }
            let mut alpha = vec![0; space_dims];
            if order == 1 {
                alpha[0] = 1;
            }
            spec.add_b(j, j, &alpha, MultiPoly::constant(space_dims, Complex64::new(1.0, 0.0)))?;
        }
        Ok(spec)
    }

    fn check_entry(&self, j: usize, k: usize, alpha: &[u32], poly: &MultiPoly, max_order: u32) -> Result<()> {
        if j >= self.components || k >= self.components {
            return Err(Error::Argument(format!(
                "entry ({j}, {k}) outside a {0}×{0} system",
                self.components
            )));
        }
        if alpha.len() != self.space_dims {
            return Err(Error::Argument(format!(
                "multi-index {alpha:?} has wrong length for n = {}",
                self.space_dims
            )));
        }
        let order: u32 = alpha.iter().sum();
        if order > max_order {
            return Err(Error::Argument(format!(
                "multi-index {alpha:?} exceeds the order bound {max_order}"
            )));
        }
        if poly.space_dims() != self.space_dims {
            return Err(Error::Argument(
                "coefficient polynomial has wrong variable count".into(),
            ));
        }
        Ok(())
    }

    /// Adds `poly` to the coefficient `a^α_{j,k}`.
    pub fn add_a(&mut self, j: usize, k: usize, alpha: &[u32], poly: MultiPoly) -> Result<()> {
        self.check_entry(j, k, alpha, &poly, 2)?;
        let slot = self
            .a
            .entry((j, k, alpha.to_vec()))
            .or_insert_with(|| MultiPoly::zero(poly.space_dims()));
        *slot = &*slot + &poly;
        Ok(())
    }

    /// Adds `poly` to the coefficient `b^α_{j,k}`.
    pub fn add_b(&mut self, j: usize, k: usize, alpha: &[u32], poly: MultiPoly) -> Result<()> {
        self.check_entry(j, k, alpha, &poly, self.orders[j])?;
        let slot = self
            .b
            .entry((j, k, alpha.to_vec()))
            .or_insert_with(|| MultiPoly::zero(poly.space_dims()));
        *slot = &*slot + &poly;
        Ok(())
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn space_dims(&self) -> usize {
        self.space_dims
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn a_terms(&self) -> impl Iterator<Item = (&CoeffKey, &MultiPoly)> {
        self.a.iter()
    }

    pub fn b_terms(&self) -> impl Iterator<Item = (&CoeffKey, &MultiPoly)> {
        self.b.iter()
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.a.values().chain(self.b.values()).all(MultiPoly::is_constant)
    }

    /// Same problem with every coefficient `a^α` negated; for the heat
    /// system this is the backward heat equation `∂ₜu + Δu = f`.
    pub fn backward(&self) -> ProblemSpec {
        let mut out = self.clone();
        for v in out.a.values_mut() {
            *v = v.scale(Complex64::new(-1.0, 0.0));
        }
        out
    }

    /// Removes every boundary coefficient of row `j`.
    pub fn without_boundary_row(&self, j: usize) -> ProblemSpec {
        let mut out = self.clone();
        out.b.retain(|key, _| key.0 != j);
        out
    }

    fn check_point(&self, x: &[f64], t: f64) -> Result<()> {
        if x.len() != self.space_dims {
            return Err(Error::Argument(format!("point {x:?} has wrong dimension")));
        }
        if !self.domain.contains_closure(x) {
            return Err(Error::Argument(format!("point {x:?} outside the closed domain")));
        }
        if !(t >= -GEOM_TOL && t <= self.tau + GEOM_TOL) {
            return Err(Error::Argument(format!("time {t} outside [0, {}]", self.tau)));
        }
        Ok(())
    }

    fn check_boundary_point(&self, x: &[f64], t: f64) -> Result<Face> {
        self.check_point(x, t)?;
        self.domain
            .face_of(x)
            .ok_or_else(|| Error::Argument(format!("point {x:?} is not on the boundary")))
    }

    fn check_tangent(&self, xi: &[f64], nu: &[f64]) -> Result<()> {
        if xi.len() != self.space_dims || nu.len() != self.space_dims {
            return Err(Error::Argument("covector dimension mismatch".into()));
        }
        let len: f64 = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (len - 1.0).abs() > GEOM_TOL {
            return Err(Error::Argument(format!("normal {nu:?} is not a unit vector")));
        }
        let dot: f64 = xi.iter().zip(nu).map(|(a, b)| a * b).sum();
        if dot.abs() > GEOM_TOL * (1.0 + xi.iter().map(|v| v.abs()).sum::<f64>()) {
            return Err(Error::Argument(format!("ξ = {xi:?} is not tangent to ν = {nu:?}")));
        }
        Ok(())
    }

    /// `A⁽⁰⁾(x,t,ξ,p)` for complex `ξ`.
    fn symbol_a_complex(&self, x: &[f64], t: f64, xi: &[Complex64], p: Complex64) -> DMatrix<Complex64> {
        let n = self.components;
        let mut m = DMatrix::from_fn(n, n, |i, j| if i == j { p } else { Complex64::new(0.0, 0.0) });
        for ((j, k, alpha), coef) in &self.a {
            if alpha.iter().sum::<u32>() == 2 {
                m[(*j, *k)] += coef.eval(x, t) * mono(xi, alpha);
            }
        }
        m
    }

    /// Principal symbol `A⁽⁰⁾_{j,k} = δ_{j,k} p + Σ_{|α|=2} a^α_{j,k}(x,t) ξ^α`.
    pub fn principal_symbol_a(&self, x: &[f64], t: f64, xi: &[f64], p: Complex64) -> Result<DMatrix<Complex64>> {
        self.check_point(x, t)?;
        if xi.len() != self.space_dims {
            return Err(Error::Argument("ξ has wrong dimension".into()));
        }
        let xi: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.symbol_a_complex(x, t, &xi, p))
    }

    /// Principal symbol `B⁽⁰⁾_{j,k} = Σ_{|α|=lⱼ} b^α_{j,k}(x,t) ξ^α` at a boundary point.
    pub fn principal_symbol_b(&self, x: &[f64], t: f64, xi: &[f64]) -> Result<DMatrix<Complex64>> {
        self.check_boundary_point(x, t)?;
        if xi.len() != self.space_dims {
            return Err(Error::Argument("ξ has wrong dimension".into()));
        }
        let xi: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let n = self.components;
        let mut m = DMatrix::zeros(n, n);
        for ((j, k, alpha), coef) in &self.b {
            if alpha.iter().sum::<u32>() == self.orders[*j] {
                m[(*j, *k)] += coef.eval(x, t) * mono(&xi, alpha);
            }
        }
        Ok(m)
    }

    /// `det A⁽⁰⁾(x,t,ξ,·)` as a polynomial in `p`; asserted monic of degree `N`.
    pub fn det_poly_in_p(&self, x: &[f64], t: f64, xi: &[f64]) -> Result<Poly> {
        self.check_point(x, t)?;
        if xi.len() != self.space_dims {
            return Err(Error::Argument("ξ has wrong dimension".into()));
        }
        let xi_c: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let zero = Complex64::new(0.0, 0.0);
        let base = self.symbol_a_complex(x, t, &xi_c, zero);
        let n = self.components;
        let m = PolyMatrix::from_fn(n, |i, j| {
            if i == j {
                Poly::new(vec![base[(i, j)], Complex64::new(1.0, 0.0)])
            } else {
                Poly::constant(base[(i, j)])
            }
        });
        let det = m.det();
        if det.degree() != Some(n) || (det.coeff(n) - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "det A⁽⁰⁾ in p is not monic of degree {n}: {det:?}"
            )));
        }
        Ok(det)
    }

    /// `A⁽⁰⁾(x,t,ξ+ζν,p)` with entries as polynomials in `ζ`.
    pub fn symbol_a_in_zeta(&self, x: &[f64], t: f64, xi: &[f64], nu: &[f64], p: Complex64) -> Result<PolyMatrix> {
        self.check_point(x, t)?;
        self.check_tangent(xi, nu)?;
        let n = self.components;
        let mut m = PolyMatrix::from_fn(n, |i, j| if i == j { Poly::constant(p) } else { Poly::zero() });
        for ((j, k, alpha), coef) in &self.a {
            if alpha.iter().sum::<u32>() == 2 {
                let term = mono_in_zeta(xi, nu, alpha).scale(coef.eval(x, t));
                let sum = m.get(*j, *k) + &term;
                m.set(*j, *k, sum);
            }
        }
        Ok(m)
    }

    /// `B⁽⁰⁾(x,t,ξ+ζν)` with entries as polynomials in `ζ`.
    pub fn symbol_b_in_zeta(&self, x: &[f64], t: f64, xi: &[f64], nu: &[f64]) -> Result<PolyMatrix> {
        self.check_boundary_point(x, t)?;
        self.check_tangent(xi, nu)?;
        let mut m = PolyMatrix::zeros(self.components);
        for ((j, k, alpha), coef) in &self.b {
            if alpha.iter().sum::<u32>() == self.orders[*j] {
                let term = mono_in_zeta(xi, nu, alpha).scale(coef.eval(x, t));
                let sum = m.get(*j, *k) + &term;
                m.set(*j, *k, sum);
            }
        }
        Ok(m)
    }

    /// `det A⁽⁰⁾(x,t,ξ+ζν,p)` as a polynomial in `ζ`.
    pub fn det_poly_in_zeta(&self, x: &[f64], t: f64, xi: &[f64], nu: &[f64], p: Complex64) -> Result<ZetaDeterminant> {
        let poly = self.symbol_a_in_zeta(x, t, xi, nu, p)?.det();
        let effective_degree = poly.effective_degree(1e-13).unwrap_or(0);
        Ok(ZetaDeterminant { poly, effective_degree })
    }

    /// Adjugate `Ã⁽⁰⁾(x,t,ξ+ζν,p)`.
    pub fn adjugate_symbol(&self, x: &[f64], t: f64, xi: &[f64], nu: &[f64], p: Complex64) -> Result<PolyMatrix> {
        Ok(self.symbol_a_in_zeta(x, t, xi, nu, p)?.adjugate())
    }

    /// Full symbol of `A` on `exp(i(ξ·x + ηt))` for constant coefficients:
    /// `iη δ_{j,k} + Σ_α a^α_{j,k} (−ξ)^α`.
    pub fn full_symbol_a_const(&self, xi: &[f64], eta: f64) -> Result<DMatrix<Complex64>> {
        self.require_constant()?;
        let n = self.components;
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(0.0, eta)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let neg: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
        for ((j, k, alpha), coef) in &self.a {
            m[(*j, *k)] += coef.constant_term() * mono(&neg, alpha);
        }
        Ok(m)
    }

    /// Full symbol of `B` on `exp(iξ·x)` for constant coefficients.
    pub fn full_symbol_b_const(&self, xi: &[f64]) -> Result<DMatrix<Complex64>> {
        self.require_constant()?;
        let n = self.components;
        let mut m = DMatrix::zeros(n, n);
        let neg: Vec<Complex64> = xi.iter().map(|&v| Complex64::new(-v, 0.0)).collect();
        for ((j, k, alpha), coef) in &self.b {
            m[(*j, *k)] += coef.constant_term() * mono(&neg, alpha);
        }
        Ok(m)
    }

    fn require_constant(&self) -> Result<()> {
        if self.is_constant_coefficient() {
            Ok(())
        } else {
            Err(Error::Argument(
                "spectral application needs constant coefficients".into(),
            ))
        }
    }
}

/// Determinant in `ζ` together with its effective degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaDeterminant {
    pub poly: Poly,
    pub effective_degree: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn slab() -> Domain {
        Domain::Slab {
            lengths: vec![1.0, 1.0],
        }
    }

    #[test]
    fn heat_symbol_is_p_plus_xi_squared() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let p = Complex64::new(0.3, -0.7);
        let m = spec.principal_symbol_a(&[0.5, 0.5], 0.2, &[1.5, -2.0], p).unwrap();
        let q = 1.5f64 * 1.5 + 4.0;
        assert_eq!(m[(0, 0)], p + q);
        assert_eq!(m[(1, 1)], p + q);
        assert_eq!(m[(0, 1)], c(0.0));
        let z = spec.principal_symbol_a(&[0.5, 0.5], 0.2, &[0.0, 0.0], p).unwrap();
        assert_eq!(z, DMatrix::from_diagonal_element(2, 2, p));
    }

    #[test]
    fn coupled_offdiagonal() {
        let mut spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        spec.add_a(0, 1, &[2, 0], MultiPoly::constant(2, c(0.7))).unwrap();
        let m = spec.principal_symbol_a(&[0.0, 0.0], 0.0, &[3.0, 1.0], c(0.0)).unwrap();
        assert!((m[(0, 1)] - c(0.7 * 9.0)).norm() < 1e-14);
    }

    #[test]
    fn boundary_symbols() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let m = spec.principal_symbol_b(&[0.0, 0.3], 0.0, &[0.0, 2.0]).unwrap();
        assert_eq!(m, DMatrix::identity(2, 2));
        let neu = ProblemSpec::decoupled_heat(2, 2, 1.0, 1, slab()).unwrap();
        let m = neu.principal_symbol_b(&[1.0, 0.3], 0.0, &[0.4, 2.0]).unwrap();
        assert_eq!(m[(0, 0)], c(0.4));
        assert!(neu.principal_symbol_b(&[0.5, 0.3], 0.0, &[0.4, 2.0]).is_err());
    }

    #[test]
    fn out_of_domain_rejected() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        assert!(spec.principal_symbol_a(&[1.5, 0.0], 0.0, &[1.0, 0.0], c(0.0)).is_err());
        assert!(spec.principal_symbol_a(&[0.5, 0.0], 1.5, &[1.0, 0.0], c(0.0)).is_err());
    }

    #[test]
    fn det_in_p_heat() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let d = spec.det_poly_in_p(&[0.5, 0.5], 0.0, &[2.0, 0.0]).unwrap();
        assert_eq!(d, Poly::from_real(&[16.0, 8.0, 1.0]));
    }

    #[test]
    fn det_in_zeta_heat() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let p = Complex64::new(0.25, 0.5);
        let d = spec
            .det_poly_in_zeta(&[0.0, 0.5], 0.0, &[0.0, 1.5], &[1.0, 0.0], p)
            .unwrap();
        let base = Poly::new(vec![p + 2.25, c(0.0), c(1.0)]);
        let expect = &base * &base;
        assert_eq!(d.effective_degree, 4);
        for k in 0..5 {
            assert!((d.poly.coeff(k) - expect.coeff(k)).norm() < 1e-14);
        }
        assert!(spec
            .det_poly_in_zeta(&[0.0, 0.5], 0.0, &[0.5, 1.5], &[1.0, 0.0], p)
            .is_err());
        assert!(spec
            .det_poly_in_zeta(&[0.0, 0.5], 0.0, &[0.0, 1.5], &[2.0, 0.0], p)
            .is_err());
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 1).len(), 3);
        assert_eq!(multi_indices(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn order_bounds_enforced() {
        let mut spec = ProblemSpec::new(2, 2, 1.0, vec![0, 1], slab()).unwrap();
        assert!(spec.add_a(0, 0, &[2, 1], MultiPoly::zero(2)).is_err());
        assert!(spec.add_b(0, 0, &[1, 0], MultiPoly::zero(2)).is_err());
        assert!(spec.add_b(1, 0, &[1, 0], MultiPoly::zero(2)).is_ok());
        assert!(ProblemSpec::new(2, 2, 1.0, vec![0, 2], slab()).is_err());
    }
}
