//! Sampled checks of Petrovskii parabolicity.
//!
//! Condition (i): every root `p` of `det A⁽⁰⁾(x,t,ξ,p)` satisfies
//! `Re p ≤ −δ|ξ|²`. By homogeneity it suffices to sample `|ξ| = 1`; the
//! estimate reported is `δ = −max Re p / |ξ|²` over the grid.
//!
//! Condition (ii): on the compact slice `|ξ|² + |p| = 1`, `Re p ≥ −δ₁|ξ|²`,
//! the rows of `B⁽⁰⁾(ξ+ζν)·Ã⁽⁰⁾(ξ+ζν,p)` are linearly independent modulo
//! `∏ⱼ (ζ − ζ⁺ⱼ)`. Each row is reduced modulo that polynomial, the remainder
//! coefficients of all `N` columns are laid side by side, and the smallest
//! singular value of the resulting `N × N·m` matrix is the margin.
//!
//! A finite grid cannot prove either condition; reports say "verified on grid".

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{Poly, PolyMatrix};
use crate::symbols::ProblemSpec;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub x: Vec<f64>,
    pub t: f64,
    /// Tangential covector.
    pub xi: Vec<f64>,
    /// Inward unit normal.
    pub nu: Vec<f64>,
    #[serde(serialize_with = "ser_complex")]
    pub p: Complex64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSplit {
    pub zeta_plus: Vec<Complex64>,
    pub zeta_minus: Vec<Complex64>,
    pub m: usize,
}

/// Partitions the roots of `poly` by the sign of their imaginary part.
pub fn split_roots_zeta(poly: &Poly, tol: f64) -> Result<RootSplit> {
    match poly.effective_degree(1e-13) {
        Some(d) if d >= 2 => {}
        d => {
            return Err(Error::Argument(format!(
                "root split needs a polynomial of degree >= 2, got {d:?}"
            )))
        }
    }
    let roots = poly.roots()?;
    if let Some(r) = roots.iter().find(|r| r.im.abs() <= tol) {
        return Err(Error::SplitUndefined {
            re: r.re,
            im: r.im,
            tol,
        });
    }
    let (zeta_plus, zeta_minus): (Vec<_>, Vec<_>) = roots.into_iter().partition(|r| r.im > 0.0);
    if zeta_plus.len() != zeta_minus.len() {
        return Err(Error::InvariantViolation(format!(
            "unbalanced root split: {} roots above and {} below the real axis",
            zeta_plus.len(),
            zeta_minus.len()
        )));
    }
    let m = zeta_plus.len();
    Ok(RootSplit {
        zeta_plus,
        zeta_minus,
        m,
    })
}

/// Unit vectors in `dims` dimensions: `±1` on the line, equally spaced
/// angles in the plane, seeded Gaussian directions above.
pub fn unit_directions(dims: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match dims {
        0 => vec![Vec::new()],
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(1))
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count.max(1) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count.max(1))
                .map(|_| {
                    let v: Vec<f64> = (0..dims).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    v.into_iter().map(|a| a / n).collect()
                })
                .collect()
        }
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

fn tensor_points(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Sampling resolution for both conditions.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub points_per_axis: usize,
    pub time_points: usize,
    pub directions: usize,
    pub rho_levels: usize,
    pub p_angles: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            points_per_axis: 3,
            time_points: 3,
            directions: 24,
            rho_levels: 6,
            p_angles: 9,
            seed: 0x5eed,
        }
    }
}

/// `(x, t, ξ)` samples with `|ξ| = 1` over the closed domain.
pub fn interior_grid(spec: &ProblemSpec, cfg: &GridConfig) -> Vec<InteriorSample> {
    let axes: Vec<Vec<f64>> = spec
        .domain()
        .lengths()
        .iter()
        .map(|&l| linspace(0.0, l, cfg.points_per_axis))
        .collect();
    let times = linspace(0.0, spec.tau(), cfg.time_points);
    let dirs = unit_directions(spec.space_dims(), cfg.directions, cfg.seed);
    let mut out = Vec::new();
    for x in tensor_points(&axes) {
        for &t in &times {
            for xi in &dirs {
                out.push(InteriorSample {
                    x: x.clone(),
                    t,
                    xi: xi.clone(),
                });
            }
        }
    }
    out
}

/// Samples of the compact parameter slice for condition (ii).
pub fn boundary_grid(spec: &ProblemSpec, delta1: f64, cfg: &GridConfig) -> Vec<BoundarySample> {
    let n = spec.space_dims();
    let lengths = spec.domain().lengths();
    let tangential_axes: Vec<Vec<f64>> = lengths[1..]
        .iter()
        .map(|&l| linspace(0.0, l, cfg.points_per_axis))
        .collect();
    let times = linspace(0.0, spec.tau(), cfg.time_points);
    let tangent_dirs = unit_directions(n - 1, cfg.directions, cfg.seed ^ 0x7a11);
    let rhos = linspace(0.0, 1.0, cfg.rho_levels.max(2));
    let mut out = Vec::new();
    for face in spec.domain().faces() {
        let nu = face.normal(n);
        for rest in tensor_points(&tangential_axes) {
            let mut x = vec![face.x1];
            x.extend(rest);
            for &t in &times {
                for &rho in &rhos {
                    // |ξ|² = ρ, |p| = 1 − ρ
                    let dirs: Vec<Vec<f64>> = if rho == 0.0 || n == 1 {
                        vec![vec![0.0; n - 1]]
                    } else {
                        tangent_dirs.clone()
                    };
                    let modulus = 1.0 - rho;
                    let angles = if modulus == 0.0 {
                        vec![0.0]
                    } else {
                        let bound = (-delta1 * rho / modulus).max(-1.0);
                        let theta_max = bound.acos();
                        if cfg.p_angles <= 1 {
                            vec![0.0]
                        } else {
                            linspace(-theta_max, theta_max, cfg.p_angles)
                        }
                    };
                    if n == 1 && rho > 0.0 {
                        continue;
                    }
                    for dir in &dirs {
                        let mut xi = vec![0.0];
                        xi.extend(dir.iter().map(|v| v * rho.sqrt()));
                        for &th in &angles {
                            out.push(BoundarySample {
                                x: x.clone(),
                                t,
                                xi: xi.clone(),
                                nu: nu.clone(),
                                p: Complex64::from_polar(modulus, th),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionIReport {
    pub pass: bool,
    pub delta_estimate: f64,
    pub samples: usize,
    pub worst: InteriorSample,
    pub note: &'static str,
}

/// Condition (i) over the given samples.
pub fn check_condition_i(spec: &ProblemSpec, samples: &[InteriorSample]) -> Result<ConditionIReport> {
    if samples.is_empty() {
        return Err(Error::Argument("condition (i) needs a nonempty sample grid".into()));
    }
    let per_sample: Vec<Result<f64>> = samples
        .par_iter()
        .map(|s| {
            let xi2: f64 = s.xi.iter().map(|v| v * v).sum();
            if xi2 == 0.0 {
                return Err(Error::Argument("condition (i) samples need ξ ≠ 0".into()));
            }
            let det = spec.det_poly_in_p(&s.x, s.t, &s.xi)?;
            let roots = det
                .roots()
                .map_err(|e| Error::Numerical(format!("{e} at x = {:?}, t = {}, ξ = {:?}", s.x, s.t, s.xi)))?;
            Ok(roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max) / xi2)
        })
        .collect();
    let mut worst = (f64::NEG_INFINITY, 0usize);
    for (i, r) in per_sample.into_iter().enumerate() {
        let v = r?;
        if v > worst.0 {
            worst = (v, i);
        }
    }
    let delta_estimate = -worst.0;
    Ok(ConditionIReport {
        pass: delta_estimate > 0.0,
        delta_estimate,
        samples: samples.len(),
        worst: samples[worst.1].clone(),
        note: "verified on grid",
    })
}

/// Reduces every entry of `rows` modulo `modulus` and lays the remainder
/// coefficients of each row side by side.
pub fn reduced_row_matrix(rows: &PolyMatrix, modulus: &Poly) -> Result<DMatrix<Complex64>> {
    let n = rows.size();
    let m = modulus
        .degree()
        .ok_or_else(|| Error::Argument("zero modulus polynomial".into()))?;
    let mut out = DMatrix::zeros(n, n * m);
    for j in 0..n {
        for c in 0..n {
            let (_, rem) = rows.get(j, c).div_rem(modulus)?;
            for k in 0..m {
                out[(j, c * m + k)] = rem.coeff(k);
            }
        }
    }
    Ok(out)
}

/// Smallest singular value of a matrix with at least as many columns as rows.
pub fn min_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sv = m.clone().svd(false, false).singular_values;
    if m.ncols() < m.nrows() {
        return 0.0;
    }
    sv.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Lopatinskii margin at one boundary sample.
pub fn lopatinskii_margin(spec: &ProblemSpec, s: &BoundarySample, tol: f64) -> Result<f64> {
    let det = spec.det_poly_in_zeta(&s.x, s.t, &s.xi, &s.nu, s.p)?;
    let split = split_roots_zeta(&det.poly, tol)?;
    if split.m != spec.components() {
        return Err(Error::Structural(format!(
            "root split gives m = {} but the system has N = {} rows",
            split.m,
            spec.components()
        )));
    }
    let modulus = Poly::from_roots(&split.zeta_plus);
    let adj = spec.adjugate_symbol(&s.x, s.t, &s.xi, &s.nu, s.p)?;
    let b = spec.symbol_b_in_zeta(&s.x, s.t, &s.xi, &s.nu)?;
    let rows = b.mul(&adj)?;
    Ok(min_singular_value(&reduced_row_matrix(&rows, &modulus)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionIIReport {
    pub pass: bool,
    pub min_singular_value: f64,
    pub delta1: f64,
    pub tol: f64,
    pub samples: usize,
    pub worst: BoundarySample,
    pub note: &'static str,
}

/// Condition (ii) over the given samples.
pub fn check_condition_ii(
    spec: &ProblemSpec,
    delta1: f64,
    samples: &[BoundarySample],
    tol: f64,
) -> Result<ConditionIIReport> {
    if !(delta1 > 0.0) {
        return Err(Error::Argument(format!("δ₁ must be positive, got {delta1}")));
    }
    if samples.is_empty() {
        return Err(Error::Argument("condition (ii) needs a nonempty sample grid".into()));
    }
    for s in samples {
        let xi2: f64 = s.xi.iter().map(|v| v * v).sum();
        if ((xi2 + s.p.norm()) - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "sample (ξ = {:?}, p = {}) is off the slice |ξ|² + |p| = 1",
                s.xi, s.p
            )));
        }
        if s.p.re < -delta1 * xi2 - 1e-12 {
            return Err(Error::Argument(format!("sample p = {} violates Re p >= -δ₁|ξ|²", s.p)));
        }
    }
    let margins: Vec<Result<f64>> = samples.par_iter().map(|s| lopatinskii_margin(spec, s, tol)).collect();
    let mut worst = (f64::INFINITY, 0usize);
    for (i, r) in margins.into_iter().enumerate() {
        let v = r?;
        if v < worst.0 {
            worst = (v, i);
        }
    }
    Ok(ConditionIIReport {
        pass: worst.0 > tol,
        min_singular_value: worst.0,
        delta1,
        tol,
        samples: samples.len(),
        worst: samples[worst.1].clone(),
        note: "verified on grid",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicityReport {
    pub pass: bool,
    pub condition_i: ConditionIReport,
    /// `None` when the domain has no boundary or condition (i) failed.
    pub condition_ii: Option<ConditionIIReport>,
    pub grid: GridConfig,
    pub tol: f64,
}

/// Runs condition (i), then condition (ii) with `δ₁` defaulting to `δ/2`.
pub fn check_parabolicity(
    spec: &ProblemSpec,
    cfg: &GridConfig,
    delta1: Option<f64>,
    tol: f64,
) -> Result<ParabolicityReport> {
    let condition_i = check_condition_i(spec, &interior_grid(spec, cfg))?;
    let mut condition_ii = None;
    if condition_i.pass && spec.domain().has_boundary() {
        let d1 = delta1.unwrap_or(condition_i.delta_estimate / 2.0);
        if !(d1 > 0.0 && d1 < condition_i.delta_estimate) {
            return Err(Error::Argument(format!(
                "δ₁ = {d1} must lie in (0, {})",
                condition_i.delta_estimate
            )));
        }
        condition_ii = Some(check_condition_ii(spec, d1, &boundary_grid(spec, d1, cfg), tol)?);
    }
    let pass = condition_i.pass && condition_ii.as_ref().is_none_or(|r| r.pass);
    Ok(ParabolicityReport {
        pass,
        condition_i,
        condition_ii,
        grid: cfg.clone(),
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Domain;

    fn slab() -> Domain {
        Domain::Slab {
            lengths: vec![1.0, 1.0],
        }
    }

    #[test]
    fn quadratic_split() {
        let pq = Complex64::new(0.7, 0.2);
        let base = Poly::new(vec![pq, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let split = split_roots_zeta(&(&base * &base), 1e-8).unwrap();
        assert_eq!(split.m, 2);
        let expect = (-pq).sqrt();
        let expect = if expect.im > 0.0 { expect } else { -expect };
        for z in &split.zeta_plus {
            assert!((z - expect).norm() < 1e-7, "{z} vs {expect}");
        }
    }

    #[test]
    fn real_roots_have_no_split() {
        let err = split_roots_zeta(&Poly::from_real(&[-1.0, 0.0, 1.0]), 1e-8).unwrap_err();
        assert!(matches!(err, Error::SplitUndefined { .. }));
    }

    #[test]
    fn unbalanced_split_is_invariant_violation() {
        let p = Poly::from_roots(&[Complex64::new(0.0, 1.0), Complex64::new(1.0, 2.0)]);
        assert!(matches!(split_roots_zeta(&p, 1e-8), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn heat_condition_i() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap();
        let rep = check_condition_i(&spec, &interior_grid(&spec, &GridConfig::default())).unwrap();
        assert!(rep.pass);
        assert!((rep.delta_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_heat_fails() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab()).unwrap().backward();
        let rep = check_parabolicity(&spec, &GridConfig::default(), None, DEFAULT_TOL).unwrap();
        assert!(!rep.pass);
        assert!((rep.condition_i.delta_estimate + 1.0).abs() < 1e-12);
        assert!(rep.condition_ii.is_none());
    }

    #[test]
    fn heat_dirichlet_and_neumann_pass() {
        for order in [0, 1] {
            let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, order, slab()).unwrap();
            let rep = check_parabolicity(&spec, &GridConfig::default(), None, DEFAULT_TOL).unwrap();
            assert!(rep.pass, "order {order}: {rep:?}");
            assert!(rep.condition_ii.unwrap().min_singular_value > 0.1);
        }
    }

    #[test]
    fn zero_row_fails_condition_ii() {
        let spec = ProblemSpec::decoupled_heat(2, 2, 1.0, 0, slab())
            .unwrap()
            .without_boundary_row(0);
        let rep = check_parabolicity(&spec, &GridConfig::default(), None, DEFAULT_TOL).unwrap();
        let ii = rep.condition_ii.unwrap();
        assert!(!ii.pass);
        assert!(ii.min_singular_value < 1e-12);
    }

    #[test]
    fn periodic_domain_skips_condition_ii() {
        let spec = ProblemSpec::decoupled_heat(
            2,
            2,
            1.0,
            0,
            Domain::Periodic {
                lengths: vec![1.0, 1.0],
            },
        )
        .unwrap();
        let rep = check_parabolicity(&spec, &GridConfig::default(), None, DEFAULT_TOL).unwrap();
        assert!(rep.pass && rep.condition_ii.is_none());
    }

    #[test]
    fn boundary_grid_lies_on_slice() {
        let spec = ProblemSpec::decoupled_heat(
            2,
            3,
            1.0,
            0,
            Domain::Slab {
                lengths: vec![1.0, 2.0, 1.0],
            },
        )
        .unwrap();
        let grid = boundary_grid(&spec, 0.5, &GridConfig::default());
        assert!(grid.len() >= 200);
        for s in &grid {
            let xi2: f64 = s.xi.iter().map(|v| v * v).sum();
            assert!((xi2 + s.p.norm() - 1.0).abs() < 1e-12);
            assert!(s.p.re >= -0.5 * xi2 - 1e-12);
            assert_eq!(s.xi[0], 0.0);
        }
    }
}
