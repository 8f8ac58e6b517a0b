//! Slowly varying function parameters and the regularity index `(s, φ)`.
//!
//! Three kinds of parameter are supported:
//!
//! * `constant`: `φ ≡ c` (usually `c = 1`, the classical Sobolev case);
//! * `log-multiscale`: `φ(r) = (ln r)^θ₁ (ln ln r)^θ₂ ⋯ (ln⋯ln r)^θₖ` for `r ≥ r₀`,
//!   held at the constant `φ(r₀)` on `[1, r₀)` so that positivity and
//!   boundedness on compacts hold on all of `[1, ∞)`;
//! * `tabulated`: sorted `(r, φ(r))` pairs, interpolated linearly in
//!   `(ln r, ln φ)`.
//!
//! Arbitrary measurable parameters are not representable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iterated logarithms above this depth overflow the splice radius in `f64`.
pub const MAX_LOG_DEPTH: usize = 4;

/// Default splice radius for log-multiscale parameters of depth `k`.
///
/// `e²` for `k ≤ 2`; deeper scales need `ln⋯ln r₀ > 0` at every level, so
/// twice the radius where the `(k-1)`-fold logarithm reaches 1 is used.
pub fn default_splice(depth: usize) -> Result<f64> {
    if depth <= 2 {
        return Ok(std::f64::consts::E * std::f64::consts::E);
    }
    if depth > MAX_LOG_DEPTH {
        return Err(Error::Argument(format!(
            "log-multiscale depth {depth} exceeds the supported maximum {MAX_LOG_DEPTH}"
        )));
    }
    // tower(j): ln applied j times gives 1
    let mut tower = 1.0f64;
    for _ in 0..depth - 1 {
        tower = tower.exp();
    }
    Ok(2.0 * tower)
}

/// A function parameter `φ` from the class of slowly varying functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SlowlyVaryingFn {
    Constant {
        #[serde(default = "unit")]
        value: f64,
    },
    LogMultiscale {
        theta: Vec<f64>,
        /// Splice radius `r₀`; `None` selects [`default_splice`].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        splice: Option<f64>,
    },
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

fn unit() -> f64 {
    1.0
}

impl Default for SlowlyVaryingFn {
    fn default() -> Self {
        SlowlyVaryingFn::one()
    }
}

fn iterated_logs(r: f64, depth: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(depth);
    let mut v = r;
    for _ in 0..depth {
        v = v.ln();
        out.push(v);
    }
    out
}

impl SlowlyVaryingFn {
    /// `φ ≡ 1`.
    pub fn one() -> Self {
        SlowlyVaryingFn::Constant { value: 1.0 }
    }

    pub fn constant(value: f64) -> Result<Self> {
        let f = SlowlyVaryingFn::Constant { value };
        f.validate()?;
        Ok(f)
    }

    /// Log-multiscale parameter with the default splice radius.
    pub fn log_multiscale(theta: &[f64]) -> Result<Self> {
        let f = SlowlyVaryingFn::LogMultiscale {
            theta: theta.to_vec(),
            splice: None,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn log_multiscale_spliced(theta: &[f64], splice: f64) -> Result<Self> {
        let f = SlowlyVaryingFn::LogMultiscale {
            theta: theta.to_vec(),
            splice: Some(splice),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(points: Vec<[f64; 2]>) -> Result<Self> {
        let f = SlowlyVaryingFn::Tabulated { points };
        f.validate()?;
        Ok(f)
    }

    /// Tabulates `g` on `count` log-spaced radii spanning `[lo, hi]`.
    pub fn tabulate(g: impl Fn(f64) -> f64, lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 || !(lo >= 1.0 && hi > lo) {
            return Err(Error::Argument(format!(
                "cannot tabulate on [{lo}, {hi}] with {count} points"
            )));
        }
        let points = log_grid(lo, hi, count).into_iter().map(|r| [r, g(r)]).collect();
        Self::tabulated(points)
    }

    /// Splice radius in effect, for the log-multiscale kind.
    pub fn splice_radius(&self) -> Option<f64> {
        match self {
            SlowlyVaryingFn::LogMultiscale { theta, splice } => splice.or_else(|| default_splice(theta.len()).ok()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, SlowlyVaryingFn::Constant { .. })
    }

    /// Checks the structural invariants of the parameter.
    pub fn validate(&self) -> Result<()> {
        match self {
            SlowlyVaryingFn::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(Error::InvariantViolation(format!(
                        "constant parameter must be positive and finite, got {value}"
                    )));
                }
            }
            SlowlyVaryingFn::LogMultiscale { theta, splice } => {
                if theta.is_empty() {
                    return Err(Error::Argument("log-multiscale needs at least one exponent".into()));
                }
                if theta.iter().any(|t| !t.is_finite()) {
                    return Err(Error::Argument("log-multiscale exponents must be finite".into()));
                }
                let r0 = match splice {
                    Some(r0) => *r0,
                    None => default_splice(theta.len())?,
                };
                if !(r0.is_finite() && r0 > 1.0) {
                    return Err(Error::Argument(format!("splice radius {r0} must exceed 1")));
                }
                let logs = iterated_logs(r0, theta.len());
                if let Some(bad) = logs.iter().position(|&l| !(l > 0.0)) {
                    return Err(Error::InvariantViolation(format!(
                        "splice radius {r0} leaves the {}-fold logarithm non-positive",
                        bad + 1
                    )));
                }
                let v = Self::multiscale_at(theta, &logs);
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvariantViolation(format!(
                        "log-multiscale value at splice radius {r0} is {v}"
                    )));
                }
            }
            SlowlyVaryingFn::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(Error::Argument("tabulated parameter needs at least two points".into()));
                }
                if points[0][0] < 1.0 {
                    return Err(Error::Argument(format!(
                        "tabulated radii must be >= 1, got {}",
                        points[0][0]
                    )));
                }
                for w in points.windows(2) {
                    if !(w[1][0] > w[0][0]) {
                        return Err(Error::Argument("tabulated radii must be strictly increasing".into()));
                    }
                }
                if let Some(p) = points.iter().find(|p| !(p[1].is_finite() && p[1] > 0.0)) {
                    return Err(Error::InvariantViolation(format!(
                        "tabulated value {} at r = {} is not positive",
                        p[1], p[0]
                    )));
                }
            }
        }
        Ok(())
    }

    fn multiscale_at(theta: &[f64], logs: &[f64]) -> f64 {
        theta.iter().zip(logs).fold(1.0, |acc, (&th, &l)| acc * l.powf(th))
    }

    /// Evaluates `φ(r)` for `r ≥ 1`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 1.0) {
            return Err(Error::Domain(format!("φ is defined on [1, ∞); got r = {r}")));
        }
        match self {
            SlowlyVaryingFn::Constant { value } => Ok(*value),
            SlowlyVaryingFn::LogMultiscale { theta, splice } => {
                let r0 = match splice {
                    Some(r0) => *r0,
                    None => default_splice(theta.len())?,
                };
                let at = if r < r0 { r0 } else { r };
                Ok(Self::multiscale_at(theta, &iterated_logs(at, theta.len())))
            }
            SlowlyVaryingFn::Tabulated { points } => {
                let lo = points[0][0];
                let hi = points[points.len() - 1][0];
                if r < lo || r > hi {
                    return Err(Error::InterpolationRange { r, lo, hi });
                }
                let i = points.partition_point(|p| p[0] <= r);
                if i == points.len() {
                    return Ok(points[i - 1][1]);
                }
                let (a, b) = (points[i - 1], points[i]);
                let u = (r.ln() - a[0].ln()) / (b[0].ln() - a[0].ln());
                Ok((a[1].ln() + u * (b[1].ln() - a[1].ln())).exp())
            }
        }
    }

    /// Like [`eval`](Self::eval) but for inputs already known to be `≥ 1`
    /// and inside any table; panics otherwise.
    pub(crate) fn at(&self, r: f64) -> f64 {
        self.eval(r).expect("φ evaluated outside its domain")
    }
}

/// `count` log-spaced points on `[lo, hi]`, endpoints included exactly.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect();
            g[0] = lo;
            g[count - 1] = hi;
            g
        }
    }
}

/// The pair `(s, φ)` indexing `H^{s,s/2;φ}` and `H^{s;φ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityIndex {
    pub s: f64,
    pub phi: SlowlyVaryingFn,
}

impl RegularityIndex {
    pub fn new(s: f64, phi: SlowlyVaryingFn) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::Argument(format!("regularity order must be finite, got {s}")));
        }
        phi.validate()?;
        Ok(RegularityIndex { s, phi })
    }

    /// Classical Sobolev index (`φ ≡ 1`).
    pub fn sobolev(s: f64) -> Self {
        RegularityIndex {
            s,
            phi: SlowlyVaryingFn::one(),
        }
    }

    /// The index `(s + shift, φ)`.
    pub fn shifted(&self, shift: f64) -> Self {
        RegularityIndex {
            s: self.s + shift,
            phi: self.phi.clone(),
        }
    }

    /// `r^s φ(r)` for `r ≥ 1`.
    pub fn weight(&self, r: f64) -> f64 {
        r.powf(self.s) * self.phi.at(r)
    }
}

pub fn eval_phi(phi: &SlowlyVaryingFn, r: f64) -> Result<f64> {
    phi.eval(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KaramataReport {
    pub pass: bool,
    pub probe_radius: f64,
    pub tol: f64,
    pub worst_lambda: f64,
    pub worst_deviation: f64,
    /// `(λ, |φ(λr)/φ(r) - 1|)` per probe.
    pub deviations: Vec<(f64, f64)>,
}

/// Finite-probe check of `φ(λr)/φ(r) → 1` at a single large radius.
///
/// This cannot prove slow variation; the report carries the probe radius.
pub fn karamata_check(phi: &SlowlyVaryingFn, lambdas: &[f64], r_probe: f64, tol: f64) -> Result<KaramataReport> {
    if !(r_probe >= 1.0) {
        return Err(Error::Domain(format!("probe radius {r_probe} < 1")));
    }
    let base = phi.eval(r_probe)?;
    let mut deviations = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::Argument(format!("scaling factor {lambda} must be positive")));
        }
        let scaled = phi.eval(lambda * r_probe)?;
        deviations.push((lambda, (scaled / base - 1.0).abs()));
    }
    let (worst_lambda, worst_deviation) =
        deviations.iter().copied().fold(
            (f64::NAN, 0.0),
            |acc, d| if d.1 >= acc.1 || acc.0.is_nan() { d } else { acc },
        );
    Ok(KaramataReport {
        pass: deviations.iter().all(|d| d.1 <= tol),
        probe_radius: r_probe,
        tol,
        worst_lambda,
        worst_deviation,
        deviations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub pass: bool,
    pub upper: f64,
    pub grid_size: usize,
    pub max_phi: f64,
    pub max_inv_phi: f64,
}

/// Samples `[1, d]` on a log grid and reports `max φ` and `max 1/φ`.
pub fn boundedness_check(phi: &SlowlyVaryingFn, d: f64, grid_size: usize) -> Result<BoundednessReport> {
    if !(d > 1.0) {
        return Err(Error::Argument(format!("upper end d = {d} must exceed 1")));
    }
    let grid_size = grid_size.max(2);
    let mut max_phi = 0.0f64;
    let mut max_inv = 0.0f64;
    for r in log_grid(1.0, d, grid_size) {
        let v = phi.eval(r)?;
        if !(v > 0.0) {
            return Err(Error::InvariantViolation(format!("φ({r}) = {v} is not positive")));
        }
        max_phi = max_phi.max(v);
        max_inv = max_inv.max(1.0 / v);
    }
    Ok(BoundednessReport {
        pass: max_phi.is_finite() && max_inv.is_finite(),
        upper: d,
        grid_size,
        max_phi,
        max_inv_phi: max_inv,
    })
}
