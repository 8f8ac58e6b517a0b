//! TOML run configuration.
//!
//! ```toml
//! [run]
//! stages = ["parabolicity", "compatibility", "sweep"]   # default: every stage with a section
//! seed = 7
//! tol = 1e-10
//!
//! [phi]                     # default φ ≡ 1
//! kind = "log-multiscale"
//! theta = [1.0]
//!
//! [system]
//! components = 2
//! space_dims = 2
//! tau = 1.0
//! orders = [0, 0]
//! preset = "decoupled-heat" # optional; a/b entries below are added to it
//!
//! [[system.a]]              # adds value·x^x·t^t to a^alpha_{j,k}; j, k are 1-based
//! j = 1
//! k = 2
//! alpha = [2, 0]
//! value = 0.25              # or [re, im]
//!
//! [domain]
//! kind = "slab"
//! lengths = [1.0, 1.0]
//! ```
//!
//! Stage sections are `[weights]`, `[parabolicity]`, `[compatibility]`,
//! `[interpolation]` and `[sweep]`; see the fixtures for complete examples.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parabolicity::{GridConfig, DEFAULT_TOL};
use crate::poly::MultiPoly;
use crate::symbols::{Domain, ProblemSpec};
use crate::weights::SlowlyVaryingFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Weights,
    Parabolicity,
    Compatibility,
    Interpolation,
    Sweep,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Weights,
        Stage::Parabolicity,
        Stage::Compatibility,
        Stage::Interpolation,
        Stage::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Weights => "weights",
            Stage::Parabolicity => "parabolicity",
            Stage::Compatibility => "compatibility",
            Stage::Interpolation => "interpolation",
            Stage::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown stage '{s}'")))
    }
}

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Real(f64),
    Complex([f64; 2]),
}

impl Value {
    pub fn to_complex(self) -> Complex64 {
        match self {
            Value::Real(v) => Complex64::new(v, 0.0),
            Value::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffEntry {
    pub j: usize,
    pub k: usize,
    pub alpha: Vec<u32>,
    #[serde(default)]
    pub x: Option<Vec<u32>>,
    #[serde(default)]
    pub t: u32,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    DecoupledHeat,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub components: usize,
    pub space_dims: usize,
    pub tau: f64,
    pub orders: Vec<u32>,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub a: Vec<CoeffEntry>,
    #[serde(default)]
    pub b: Vec<CoeffEntry>,
}

/// One term `value · x^x · t^t` of component `component` (1-based).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub component: usize,
    #[serde(default)]
    pub x: Option<Vec<u32>>,
    #[serde(default)]
    pub t: u32,
    pub value: Value,
}

fn default_seed() -> u64 {
    0
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub stages: Option<Vec<Stage>>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            stages: None,
            seed: default_seed(),
            tol: default_tol(),
        }
    }
}

fn default_lambdas() -> Vec<f64> {
    vec![0.5, 2.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "WeightsSection::default_probe")]
    pub probe: f64,
    #[serde(default = "WeightsSection::default_karamata_tol")]
    pub karamata_tol: f64,
    #[serde(default = "WeightsSection::default_upper")]
    pub upper: f64,
    #[serde(default = "WeightsSection::default_grid_size")]
    pub grid_size: usize,
}

impl WeightsSection {
    fn default_probe() -> f64 {
        1e8
    }
    fn default_karamata_tol() -> f64 {
        0.05
    }
    fn default_upper() -> f64 {
        1e4
    }
    fn default_grid_size() -> usize {
        200
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicitySection {
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default = "ParabolicitySection::default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub grid: GridConfig,
}

impl ParabolicitySection {
    fn default_tol() -> f64 {
        DEFAULT_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatibilitySection {
    pub s: Vec<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Manufactured solution; when present `f`, `g`, `h` are generated from
    /// it and the explicit terms below are added as perturbations.
    #[serde(default)]
    pub u: Vec<PolyTerm>,
    #[serde(default)]
    pub f: Vec<PolyTerm>,
    #[serde(default)]
    pub g: Vec<PolyTerm>,
    #[serde(default)]
    pub h: Vec<PolyTerm>,
    #[serde(default = "CompatibilitySection::default_points")]
    pub points: usize,
    #[serde(default = "CompatibilitySection::default_order")]
    pub extension_order: usize,
}

impl CompatibilitySection {
    fn default_points() -> usize {
        16
    }
    fn default_order() -> usize {
        crate::extension::DEFAULT_ORDER
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for RadiusGrid {
    fn default() -> Self {
        RadiusGrid {
            lo: 1.0,
            hi: 1e8,
            count: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCase {
    pub s0: f64,
    pub s: f64,
    pub s1: f64,
    #[serde(default)]
    pub phi: Option<SlowlyVaryingFn>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MidpointCase {
    pub s: f64,
    pub eps: Vec<f64>,
    #[serde(default)]
    pub phi: Option<SlowlyVaryingFn>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpolationSection {
    #[serde(default)]
    pub grid: RadiusGrid,
    #[serde(default = "InterpolationSection::default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub identity: Vec<IdentityCase>,
    #[serde(default)]
    pub midpoint: Vec<MidpointCase>,
}

impl InterpolationSection {
    fn default_tol() -> f64 {
        1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub s: f64,
    #[serde(default = "SweepSection::default_cutoffs")]
    pub cutoffs: Vec<usize>,
    #[serde(default = "SweepSection::default_samples")]
    pub samples: usize,
    #[serde(default = "SweepSection::default_spread")]
    pub spread_bound: f64,
    #[serde(default = "SweepSection::default_low_mode_tol")]
    pub low_mode_tol: f64,
}

impl SweepSection {
    fn default_cutoffs() -> Vec<usize> {
        vec![8, 16, 32]
    }
    fn default_samples() -> usize {
        30
    }
    fn default_spread() -> f64 {
        20.0
    }
    fn default_low_mode_tol() -> f64 {
        1e-10
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub phi: Option<SlowlyVaryingFn>,
    #[serde(default)]
    pub system: Option<SystemSection>,
    #[serde(default)]
    pub domain: Option<Domain>,
    #[serde(default)]
    pub weights: Option<WeightsSection>,
    #[serde(default)]
    pub parabolicity: Option<ParabolicitySection>,
    #[serde(default)]
    pub compatibility: Option<CompatibilitySection>,
    #[serde(default)]
    pub interpolation: Option<InterpolationSection>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            Error::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn phi(&self) -> SlowlyVaryingFn {
        self.phi.clone().unwrap_or_default()
    }

    /// Stages to run: the explicit list, or every stage with a section.
    pub fn stages(&self) -> Vec<Stage> {
        if let Some(list) = &self.run.stages {
            let mut v = list.clone();
            v.sort();
            v.dedup();
            return v;
        }
        let present = [
            self.weights.is_some(),
            self.parabolicity.is_some(),
            self.compatibility.is_some(),
            self.interpolation.is_some(),
            self.sweep.is_some(),
        ];
        Stage::ALL
            .into_iter()
            .zip(present)
            .filter_map(|(s, p)| p.then_some(s))
            .collect()
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        let sys = self
            .system
            .as_ref()
            .ok_or_else(|| Error::Argument("missing [system] section".into()))?;
        let domain = self
            .domain
            .clone()
            .ok_or_else(|| Error::Argument("missing [domain] section".into()))?;
        let n = sys.space_dims;
        let mut spec = ProblemSpec::new(sys.components, n, sys.tau, sys.orders.clone(), domain)?;
        let one = MultiPoly::constant(n, Complex64::new(1.0, 0.0));
        if sys.preset == Some(Preset::DecoupledHeat) {
            for j in 0..sys.components {
                for m in 0..n {
                    let mut alpha = vec![0; n];
                    alpha[m] = 2;
                    spec.add_a(j, j, &alpha, one.clone())?;
                }
                let mut alpha = vec![0; n];
                if sys.orders[j] == 1 {
                    alpha[0] = 1;
                }
                spec.add_b(j, j, &alpha, one.clone())?;
            }
        }
        for (which, entries) in [("a", &sys.a), ("b", &sys.b)] {
            for e in entries {
                if e.j == 0 || e.k == 0 {
                    return Err(Error::Argument(format!("{which}: component indices are 1-based")));
                }
                let x = e.x.clone().unwrap_or_else(|| vec![0; n]);
                if x.len() != n {
                    return Err(Error::Argument(format!(
                        "{which}: exponent x = {x:?} needs {n} entries"
                    )));
                }
                let p = MultiPoly::monomial(&x, e.t, e.value.to_complex());
                if which == "a" {
                    spec.add_a(e.j - 1, e.k - 1, &e.alpha, p)?;
                } else {
                    spec.add_b(e.j - 1, e.k - 1, &e.alpha, p)?;
                }
            }
        }
        Ok(spec)
    }
}

/// Collects polynomial terms into one polynomial per component.
pub fn polys_from_terms(terms: &[PolyTerm], components: usize, space_dims: usize) -> Result<Vec<MultiPoly>> {
    let mut out = vec![MultiPoly::zero(space_dims); components];
    for t in terms {
        if t.component == 0 || t.component > components {
            return Err(Error::Argument(format!(
                "term component {} outside 1..={components}",
                t.component
            )));
        }
        let x = t.x.clone().unwrap_or_else(|| vec![0; space_dims]);
        if x.len() != space_dims {
            return Err(Error::Argument(format!(
                "term exponent x = {x:?} needs {space_dims} entries"
            )));
        }
        out[t.component - 1].add_term(&x, t.t, t.value.to_complex());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_has_position() {
        let err = Config::parse("[run]\nseed = 1\n\n[system]\ncomponents = \"two\"\n").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 5);
                assert!(column > 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            Config::parse("[run]\nsed = 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn default_stages_follow_sections() {
        let cfg = Config::parse("[interpolation]\n[[interpolation.identity]]\ns0 = 2\ns = 3\ns1 = 4\n").unwrap();
        assert_eq!(cfg.stages(), vec![Stage::Interpolation]);
    }

    #[test]
    fn preset_with_extra_coupling() {
        let text = r#"
[system]
components = 2
space_dims = 2
tau = 1.0
orders = [0, 1]
preset = "decoupled-heat"

[[system.a]]
j = 1
k = 2
alpha = [2, 0]
value = [0.25, 0.0]

[domain]
kind = "slab"
lengths = [1.0, 2.0]
"#;
        let spec = Config::parse(text).unwrap().problem().unwrap();
        assert_eq!(spec.orders(), &[0, 1]);
        let m = spec
            .principal_symbol_a(&[0.0, 0.0], 0.0, &[1.0, 0.0], Complex64::new(0.0, 0.0))
            .unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.25, 0.0));
        assert_eq!(m[(1, 1)], Complex64::new(1.0, 0.0));
        let b = spec.principal_symbol_b(&[0.0, 0.5], 0.0, &[2.0, 0.0]).unwrap();
        assert_eq!(b[(1, 1)], Complex64::new(2.0, 0.0));
    }

    #[test]
    fn terms_are_one_based() {
        let t = PolyTerm {
            component: 0,
            x: None,
            t: 0,
            value: Value::Real(1.0),
        };
        assert!(polys_from_terms(&[t], 2, 1).is_err());
    }
}
