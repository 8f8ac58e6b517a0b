//! Stage execution and the run report.

use std::path::Path;

use serde::Serialize;

use crate::compatibility::{compatibility_residuals, exceptional_set, CompatibilitySummary};
use crate::config::{polys_from_terms, CompatibilitySection, Config, InterpolationSection, Stage, WeightsSection};
use crate::error::{Error, Result};
use crate::interpolation::{midpoint_check, verify_weight_identity, InterpolationParam, MidpointReport};
use crate::parabolicity::{check_parabolicity, ParabolicityReport};
use crate::symbols::ProblemSpec;
use crate::verifier::{
    apply_lambda_poly, boundary_operator_poly, discretize_image, discretize_solution, isomorphism_sweep, q_norm,
    solution_norm, Discretization, PolyImage, QNorm, SweepConfig, SweepReport,
};
use crate::weights::{
    boundedness_check, karamata_check, log_grid, BoundednessReport, KaramataReport, RegularityIndex, SlowlyVaryingFn,
};

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub stages: Option<Vec<Stage>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightsStage {
    pub phi: SlowlyVaryingFn,
    pub karamata: KaramataReport,
    pub boundedness: BoundednessReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManufacturedNorms {
    pub s: f64,
    pub solution_norm: f64,
    pub data_norm: QNorm,
    pub ratio: f64,
    /// False when the data violate a compatibility condition at this `s`.
    pub compatible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityStage {
    pub exceptional_set: Vec<f64>,
    pub systems: Vec<CompatibilitySummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub surrogate_norms: Vec<ManufacturedNorms>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub s0: f64,
    pub s: f64,
    pub s1: f64,
    pub phi: SlowlyVaryingFn,
    pub max_relative_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidpointResult {
    #[serde(flatten)]
    pub report: MidpointReport,
    pub phi: SlowlyVaryingFn,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationStage {
    pub grid: [f64; 2],
    pub grid_points: usize,
    pub tol: f64,
    pub identity: Vec<IdentityResult>,
    pub midpoint: Vec<MidpointResult>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: String,
    pub seed: u64,
    pub tol: f64,
    pub stages: Vec<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parabolicity: Option<ParabolicityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compatibility: Option<CompatibilityStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<InterpolationStage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    pub failures: Vec<String>,
    pub pass: bool,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: RunReport,
    /// Per-draw ratio table, when the sweep ran.
    pub csv: Option<String>,
}

/// Reads, parses and runs a configuration file.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let cfg = Config::parse(&text)?;
    let name = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    run_config(&cfg, &name, opts)
}

/// Runs the configured stages in their fixed order. Stage errors are
/// recorded as failures; the remaining stages still run.
pub fn run_config(cfg: &Config, name: &str, opts: &RunOptions) -> Result<RunOutcome> {
    let stages = match &opts.stages {
        Some(list) => {
            let mut v = list.clone();
            v.sort();
            v.dedup();
            v
        }
        None => cfg.stages(),
    };
    if stages.is_empty() {
        return Err(Error::Argument("no stages configured".into()));
    }
    let seed = opts.seed.unwrap_or(cfg.run.seed);
    let tol = opts.tol.unwrap_or(cfg.run.tol);
    let mut report = RunReport {
        tool: "parabolic-verify",
        version: env!("CARGO_PKG_VERSION"),
        config: name.to_string(),
        seed,
        tol,
        stages: stages.clone(),
        weights: None,
        parabolicity: None,
        compatibility: None,
        interpolation: None,
        sweep: None,
        failures: Vec::new(),
        pass: false,
    };
    let mut csv = None;
    let phi = cfg.phi();
    let needs_problem = stages
        .iter()
        .any(|s| matches!(s, Stage::Parabolicity | Stage::Compatibility | Stage::Sweep));
    let spec = if needs_problem { Some(cfg.problem()?) } else { None };
    let grid = cfg.parabolicity.as_ref().map(|p| p.grid.clone()).unwrap_or_default();

    for stage in &stages {
        let outcome: Result<()> = match stage {
            Stage::Weights => {
                let section = cfg.weights.clone().unwrap_or_else(default_weights);
                weights_stage(&phi, &section).map(|r| {
                    if !r.pass {
                        report.failures.push(format!(
                            "weights: Karamata deviation {} at λ = {} (tol {}), bounded: {}",
                            r.karamata.worst_deviation, r.karamata.worst_lambda, r.karamata.tol, r.boundedness.pass
                        ));
                    }
                    report.weights = Some(r);
                })
            }
            Stage::Parabolicity => {
                let spec = spec.as_ref().expect("problem built");
                let (delta1, ptol) = cfg
                    .parabolicity
                    .as_ref()
                    .map_or((None, crate::parabolicity::DEFAULT_TOL), |p| (p.delta1, p.tol));
                check_parabolicity(spec, &grid, delta1, ptol).map(|r| {
                    report.failures.extend(parabolicity_failures(&r));
                    report.parabolicity = Some(r);
                })
            }
            Stage::Compatibility => match &cfg.compatibility {
                None => Err(Error::Argument("missing [compatibility] section".into())),
                Some(section) => {
                    let spec = spec.as_ref().expect("problem built");
                    let ctol = opts.tol.or(section.tol).unwrap_or(cfg.run.tol);
                    compatibility_stage(spec, section, &phi, ctol, &mut report.failures)
                        .map(|r| report.compatibility = Some(r))
                }
            },
            Stage::Interpolation => match &cfg.interpolation {
                None => Err(Error::Argument("missing [interpolation] section".into())),
                Some(section) => {
                    let itol = opts.tol.unwrap_or(section.tol);
                    interpolation_stage(section, &phi, itol).map(|r| {
                        for c in r.identity.iter().filter(|c| !c.pass) {
                            report.failures.push(format!(
                                "interpolation: weight identity error {} for (s0, s, s1) = ({}, {}, {})",
                                c.max_relative_error, c.s0, c.s, c.s1
                            ));
                        }
                        for m in r.midpoint.iter().filter(|m| !m.pass) {
                            report.failures.push(format!(
                                "interpolation: midpoint deviation {} at s = {}",
                                m.report.max_deviation(),
                                m.report.s
                            ));
                        }
                        report.interpolation = Some(r);
                    })
                }
            },
            Stage::Sweep => match &cfg.sweep {
                None => Err(Error::Argument("missing [sweep] section".into())),
                Some(section) => {
                    let spec = spec.as_ref().expect("problem built");
                    let mut sc = SweepConfig::new(section.s, phi.clone());
                    sc.cutoffs = section.cutoffs.clone();
                    sc.samples = section.samples;
                    sc.seed = seed;
                    sc.spread_bound = section.spread_bound;
                    sc.low_mode_tol = section.low_mode_tol;
                    sc.grid = grid.clone();
                    isomorphism_sweep(spec, &sc).and_then(|r| {
                        if !r.pass {
                            report.failures.push(format!(
                                "sweep: ratio spread {} (bound {}), low-mode deviation {} (tol {})",
                                r.spread, r.spread_bound, r.low_mode.max_relative_deviation, r.low_mode.tol
                            ));
                        }
                        csv = Some(r.to_csv()?);
                        report.sweep = Some(r);
                        Ok(())
                    })
                }
            },
        };
        if let Err(e) = outcome {
            report.failures.push(format!("{stage}: {e}"));
        }
    }
    report.pass = report.failures.is_empty();
    Ok(RunOutcome { report, csv })
}

fn default_weights() -> WeightsSection {
    Config::parse("[weights]\n")
        .ok()
        .and_then(|c| c.weights)
        .expect("default weights section")
}

fn weights_stage(phi: &SlowlyVaryingFn, section: &WeightsSection) -> Result<WeightsStage> {
    let karamata = karamata_check(phi, &section.lambdas, section.probe, section.karamata_tol)?;
    let boundedness = boundedness_check(phi, section.upper, section.grid_size)?;
    Ok(WeightsStage {
        phi: phi.clone(),
        pass: karamata.pass && boundedness.pass,
        karamata,
        boundedness,
    })
}

fn parabolicity_failures(r: &ParabolicityReport) -> Vec<String> {
    let mut out = Vec::new();
    let c1 = &r.condition_i;
    if !c1.pass {
        out.push(format!(
            "parabolicity: condition (i) fails with δ estimate {} at x = {:?}, t = {}, ξ = {:?}",
            c1.delta_estimate, c1.worst.x, c1.worst.t, c1.worst.xi
        ));
    }
    if let Some(c2) = r.condition_ii.as_ref().filter(|c| !c.pass) {
        out.push(format!(
            "parabolicity: condition (ii) fails with minimal singular value {:e} (tol {:e}) at x = {:?}, ξ = {:?}, p = {}",
            c2.min_singular_value, c2.tol, c2.worst.x, c2.worst.xi, c2.worst.p
        ));
    }
    out
}

fn compatibility_stage(
    spec: &ProblemSpec,
    section: &CompatibilitySection,
    phi: &SlowlyVaryingFn,
    tol: f64,
    failures: &mut Vec<String>,
) -> Result<CompatibilityStage> {
    let (comps, n) = (spec.components(), spec.space_dims());
    let extra_f = polys_from_terms(&section.f, comps, n)?;
    let extra_g = polys_from_terms(&section.g, comps, n)?;
    let extra_h = polys_from_terms(&section.h, comps, n)?;
    let u = if section.u.is_empty() {
        None
    } else {
        Some(polys_from_terms(&section.u, comps, n)?)
    };
    let (f, g, h) = match &u {
        Some(u) => {
            let img = apply_lambda_poly(spec, u)?;
            // Bu as a polynomial in all of x; its restriction to each face is img.g
            let bu = boundary_operator_poly(spec, u)?;
            let add = |a: &[crate::poly::MultiPoly], b: &[crate::poly::MultiPoly]| {
                a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>()
            };
            (add(&img.f, &extra_f), add(&bu, &extra_g), add(&img.h, &extra_h))
        }
        None => (extra_f, extra_g, extra_h),
    };
    let s_max = section.s.iter().copied().fold(2.0, f64::max);
    let mut systems = Vec::new();
    let mut surrogate_norms = Vec::new();
    for &s in &section.s {
        match compatibility_residuals(spec, &f, &g, &h, s, tol) {
            Ok(sys) => {
                let summary = sys.summary();
                for c in summary.conditions.iter().filter(|c| c.residual > tol) {
                    failures.push(format!(
                        "compatibility: s = {s}, component {}, order {}: residual {:e} exceeds {:e}",
                        c.component, c.order, c.residual, tol
                    ));
                }
                if let Some(u) = &u {
                    if let Some(norms) = manufactured_norms(spec, section, u, (&f, &g, &h), s, phi, summary.compatible)?
                    {
                        surrogate_norms.push(norms);
                    }
                }
                systems.push(summary);
            }
            Err(e) => failures.push(format!("compatibility: s = {s}: {e}")),
        }
    }
    let pass = systems.len() == section.s.len() && systems.iter().all(|s| s.compatible);
    Ok(CompatibilityStage {
        exceptional_set: exceptional_set(spec, s_max),
        systems,
        surrogate_norms,
        pass,
    })
}

type PolyData<'a> = (
    &'a [crate::poly::MultiPoly],
    &'a [crate::poly::MultiPoly],
    &'a [crate::poly::MultiPoly],
);

fn manufactured_norms(
    spec: &ProblemSpec,
    section: &CompatibilitySection,
    u: &[crate::poly::MultiPoly],
    (f, g, h): PolyData<'_>,
    s: f64,
    phi: &SlowlyVaryingFn,
    compatible: bool,
) -> Result<Option<ManufacturedNorms>> {
    if spec.domain().has_boundary() && spec.space_dims() < 2 {
        return Ok(None);
    }
    let disc = Discretization {
        points: section.points,
        order: section.extension_order,
    };
    let img = PolyImage {
        f: f.to_vec(),
        g: spec
            .domain()
            .faces()
            .iter()
            .map(|face| g.iter().map(|p| p.substitute_space(0, face.x1)).collect())
            .collect(),
        h: h.to_vec(),
    };
    let idx = RegularityIndex::new(s, phi.clone())?;
    let un = solution_norm(&discretize_solution(spec, u, disc)?, &idx)?;
    let qn = q_norm(spec, &discretize_image(spec, &img, disc)?, &idx)?;
    Ok(Some(ManufacturedNorms {
        s,
        solution_norm: un,
        ratio: qn.total / un,
        data_norm: qn,
        compatible,
    }))
}

fn interpolation_stage(section: &InterpolationSection, phi: &SlowlyVaryingFn, tol: f64) -> Result<InterpolationStage> {
    let g = &section.grid;
    if !(g.lo >= 1.0 && g.hi > g.lo && g.count >= 2) {
        return Err(Error::Argument(format!(
            "radius grid [{}, {}] with {} points is invalid",
            g.lo, g.hi, g.count
        )));
    }
    let grid = log_grid(g.lo, g.hi, g.count);
    let identity = section
        .identity
        .iter()
        .map(|c| {
            let phi = c.phi.clone().unwrap_or_else(|| phi.clone());
            let param = InterpolationParam::new(c.s0, c.s, c.s1, phi.clone())?;
            let err = verify_weight_identity(&param, &grid)?;
            Ok(IdentityResult {
                s0: c.s0,
                s: c.s,
                s1: c.s1,
                phi,
                max_relative_error: err,
                pass: err <= tol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let midpoint = section
        .midpoint
        .iter()
        .map(|c| {
            let phi = c.phi.clone().unwrap_or_else(|| phi.clone());
            let report = midpoint_check(c.s, &c.eps, &phi, &grid)?;
            Ok(MidpointResult {
                pass: report.max_deviation() <= tol,
                report,
                phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationStage {
        grid: [g.lo, g.hi],
        grid_points: g.count,
        tol,
        pass: identity.iter().all(|c| c.pass) && midpoint.iter().all(|m| m.pass),
        identity,
        midpoint,
    })
}
