//! Initial traces, boundary compatibility conditions and the exceptional set.
//!
//! For polynomial data the time derivatives `vⱼ,ᵣ = ∂ₜʳuⱼ(·,0)` of a solution
//! follow from the equation alone:
//!
//! ```text
//! vⱼ,₀ = hⱼ
//! vⱼ,ᵣ = −Σₖ Σ_α Σ_{q<r} C(r−1,q) (∂ₜ^{r−1−q} a^α_{j,k})(x,0) D^α vₖ,q + ∂ₜ^{r−1} fⱼ(x,0)
//! ```
//!
//! and the boundary data must satisfy `∂ₜʳgⱼ(·,0) = 𝓑ⱼ,ᵣ` on `Γ` for
//! `0 ≤ r < (s − lⱼ − 3/2)/2`, where
//!
//! ```text
//! 𝓑ⱼ,ᵣ = Σₖ Σ_α Σ_{q≤r} C(r,q) (∂ₜ^{r−q} b^α_{j,k})(x,0) D^α vₖ,q.
//! ```

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::symbols::{Domain, ProblemSpec};

/// Tolerance used to decide whether `s` hits a point of the exceptional set.
pub const EXCEPTIONAL_TOL: f64 = 1e-12;

/// Default residual threshold for "compatible".
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-10;

/// `{r ∈ ℤ : 0 ≤ r < (s − l − 3/2)/2}`.
pub fn trace_orders(s: f64, l: u32) -> Vec<u32> {
    let bound = (s - l as f64 - 1.5) / 2.0;
    (0..).take_while(|&r| (r as f64) < bound).collect()
}

/// `{2k + lⱼ + 3/2 : k ≥ 0} ∩ (2, s_max]`, sorted and without repeats.
pub fn exceptional_set(spec: &ProblemSpec, s_max: f64) -> Vec<f64> {
    exceptional_set_for_orders(spec.orders(), s_max)
}

pub fn exceptional_set_for_orders(orders: &[u32], s_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for &l in orders {
        let mut k = 0u32;
        loop {
            let e = 2.0 * k as f64 + l as f64 + 1.5;
            if e > s_max {
                break;
            }
            if e > 2.0 {
                out.push(e);
            }
            k += 1;
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

pub fn is_exceptional(orders: &[u32], s: f64) -> bool {
    exceptional_set_for_orders(orders, s + 1.0)
        .iter()
        .any(|e| (e - s).abs() <= EXCEPTIONAL_TOL)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// The traces `vⱼ,ᵣ` as polynomials in `x` (no `t` dependence).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFamily {
    entries: Vec<Vec<MultiPoly>>,
}

impl TraceFamily {
    pub fn components(&self) -> usize {
        self.entries.len()
    }

    pub fn max_order(&self, j: usize) -> Option<u32> {
        self.entries
            .get(j)
            .and_then(|v| v.len().checked_sub(1))
            .map(|r| r as u32)
    }

    pub fn get(&self, j: usize, r: u32) -> Option<&MultiPoly> {
        self.entries.get(j).and_then(|v| v.get(r as usize))
    }
}

fn check_data(spec: &ProblemSpec, what: &str, data: &[MultiPoly]) -> Result<()> {
    if data.len() != spec.components() {
        return Err(Error::Argument(format!(
            "{what}: expected {} components, got {}",
            spec.components(),
            data.len()
        )));
    }
    if let Some(p) = data.iter().find(|p| p.space_dims() != spec.space_dims()) {
        return Err(Error::Argument(format!(
            "{what}: polynomial in {} space variables, expected {}",
            p.space_dims(),
            spec.space_dims()
        )));
    }
    Ok(())
}

/// Runs the trace recursion up to order `r_max` for every component.
pub fn build_traces(spec: &ProblemSpec, f: &[MultiPoly], h: &[MultiPoly], r_max: u32) -> Result<TraceFamily> {
    check_data(spec, "right-hand side f", f)?;
    check_data(spec, "initial data h", h)?;
    if let Some(j) = h.iter().position(|p| p.t_degree() > 0) {
        return Err(Error::Argument(format!("initial datum h{} depends on t", j + 1)));
    }
    let n = spec.components();
    let mut entries: Vec<Vec<MultiPoly>> = h.iter().map(|p| vec![p.clone()]).collect();
    for r in 1..=r_max {
        let mut next: Vec<MultiPoly> = f.iter().map(|fj| fj.partial_t(r - 1).at_t0()).collect();
        for ((j, k, alpha), coef) in spec.a_terms() {
            for q in 0..r {
                let c = coef.partial_t(r - 1 - q).at_t0();
                if c.is_zero() {
                    continue;
                }
                let term = &c * &entries[*k][q as usize].d_alpha(alpha);
                next[*j] = &next[*j] - &term.scale(Complex64::new(binomial(r - 1, q), 0.0));
            }
        }
        for (j, v) in next.into_iter().enumerate().take(n) {
            entries[j].push(v);
        }
    }
    Ok(TraceFamily { entries })
}

/// `𝓑ⱼ,ᵣ` as a polynomial in `x`.
pub fn build_boundary_expr(spec: &ProblemSpec, traces: &TraceFamily, j: usize, r: u32) -> Result<MultiPoly> {
    if j >= spec.components() || traces.components() != spec.components() {
        return Err(Error::Argument(format!("component {} out of range", j + 1)));
    }
    let mut out = MultiPoly::zero(spec.space_dims());
    for ((row, k, alpha), coef) in spec.b_terms() {
        if *row != j {
            continue;
        }
        for q in 0..=r {
            let v = traces
                .get(*k, q)
                .ok_or_else(|| Error::Argument(format!("trace v{},{q} has not been built", k + 1)))?;
            let c = coef.partial_t(r - q).at_t0();
            if c.is_zero() {
                continue;
            }
            let term = &c * &v.d_alpha(alpha);
            out = &out + &term.scale(Complex64::new(binomial(r, q), 0.0));
        }
    }
    Ok(out)
}

/// One condition `∂ₜʳgⱼ(·,0) = 𝓑ⱼ,ᵣ` on `Γ`; `j` is zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub j: usize,
    pub r: u32,
    pub lhs: MultiPoly,
    pub rhs: MultiPoly,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilitySystem {
    pub s: f64,
    /// `qⱼ(s)`, the number of conditions for each component.
    pub counts: Vec<usize>,
    pub conditions: Vec<Condition>,
    pub tol: f64,
}

impl CompatibilitySystem {
    pub fn max_residual(&self) -> f64 {
        self.conditions.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn compatible(&self) -> bool {
        self.conditions.iter().all(|c| c.residual <= self.tol)
    }

    pub fn summary(&self) -> CompatibilitySummary {
        CompatibilitySummary {
            s: self.s,
            counts: self.counts.clone(),
            tol: self.tol,
            compatible: self.compatible(),
            max_residual: self.max_residual(),
            conditions: self
                .conditions
                .iter()
                .map(|c| ConditionSummary {
                    component: c.j + 1,
                    order: c.r,
                    residual: c.residual,
                    boundary_expr: c.rhs.to_string(),
                })
                .collect(),
        }
    }
}

/// Serializable view of a [`CompatibilitySystem`] with 1-based components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilitySummary {
    pub s: f64,
    pub counts: Vec<usize>,
    pub tol: f64,
    pub compatible: bool,
    pub max_residual: f64,
    pub conditions: Vec<ConditionSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSummary {
    pub component: usize,
    pub order: u32,
    pub residual: f64,
    pub boundary_expr: String,
}

/// Discrete L₂ norm of a polynomial over the boundary faces of a slab,
/// by tensor Gauss–Legendre quadrature exact for its degree.
pub fn boundary_l2(domain: &Domain, p: &MultiPoly) -> f64 {
    let faces = domain.faces();
    if faces.is_empty() || p.is_zero() {
        return 0.0;
    }
    let lengths = domain.lengths();
    let dims = lengths.len();
    let points = (p.total_degree() as usize + 1).max(2);
    let rule = GaussLegendre::new(NonZeroUsize::new(points).expect("positive"));
    let axis: Vec<Vec<(f64, f64)>> = lengths[1..]
        .iter()
        .map(|&l| {
            rule.nodes()
                .zip(rule.weights())
                .map(|(&x, &w)| (0.5 * l * (x + 1.0), 0.5 * l * w))
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for face in faces {
        let mut idx = vec![0usize; dims - 1];
        let mut x = vec![0.0; dims];
        x[0] = face.x1;
        loop {
            let mut w = 1.0;
            for (a, &i) in idx.iter().enumerate() {
                x[a + 1] = axis[a][i].0;
                w *= axis[a][i].1;
            }
            total += w * p.eval(&x, 0.0).norm_sqr();
            let mut a = 0;
            while a < idx.len() {
                idx[a] += 1;
                if idx[a] < points {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == idx.len() {
                break;
            }
        }
    }
    total.sqrt()
}

/// Builds every condition required at regularity `s` and measures its
/// residual on the boundary.
pub fn compatibility_residuals(
    spec: &ProblemSpec,
    f: &[MultiPoly],
    g: &[MultiPoly],
    h: &[MultiPoly],
    s: f64,
    tol: f64,
) -> Result<CompatibilitySystem> {
    if !(s > 2.0 && s.is_finite()) {
        return Err(Error::Argument(format!("regularity must exceed 2, got {s}")));
    }
    if is_exceptional(spec.orders(), s) {
        return Err(Error::ExceptionalRegularity(s));
    }
    check_data(spec, "boundary data g", g)?;
    let orders: Vec<Vec<u32>> = spec.orders().iter().map(|&l| trace_orders(s, l)).collect();
    let counts = orders.iter().map(Vec::len).collect();
    let r_max = orders.iter().flatten().copied().max().unwrap_or(0);
    let traces = build_traces(spec, f, h, r_max)?;
    let mut conditions = Vec::new();
    if spec.domain().has_boundary() {
        for (j, rs) in orders.iter().enumerate() {
            for &r in rs {
                let lhs = g[j].partial_t(r).at_t0();
                let rhs = build_boundary_expr(spec, &traces, j, r)?;
                let residual = boundary_l2(spec.domain(), &(&lhs - &rhs));
                conditions.push(Condition {
                    j,
                    r,
                    lhs,
                    rhs,
                    residual,
                });
            }
        }
    }
    Ok(CompatibilitySystem {
        s,
        counts,
        conditions,
        tol,
    })
}
