//! Batch front-end: run analysis specs, build JSON reports, and emit CSV
//! plot data from reports.

mod plot;
mod spec;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use plot::{plot_tables, write_plot_data, PlotError, PlotTable};
pub use spec::{
    decode_spec, parse_spec_file, AnalysisSpec, DomainSpec, Job, Point, ScheduleOverrides, SpecError, Task, TaskParams,
};

use crate::cones::{
    btc_hyperplane_membership, estimate_btc_cone, estimate_peano_cone, normal_cone_member, ConeEstimate,
    HyperplaneMembership, NormalMembership,
};
use crate::error::Error;
use crate::geometry::sphere_grid;
use crate::mvt::{lagrange_search, lebourg_certify, normal_lagrange_search, rolle_search, MeanValueCertificate};
use crate::subdiff::{
    btc_subdifferential_1d, clarke_subdifferential, compare_clarke_btc, frechet_member, limiting_subdifferential,
    lipschitz_gate, ClarkeBtcComparison, ConvexSetApprox, FrechetTest, LimitingResult, LipschitzGate,
    SubdiffEstimate1D,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO_RESULT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Directions of ℝⁿ on which n-D hyperplane membership is checked.
const MEMBERSHIP_DIRECTIONS: usize = 16;

/// Membership of one candidate in a Clarke set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateMembership {
    pub candidate: Vec<f64>,
    pub member: bool,
    pub violation: f64,
}

/// Typed result of one task.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskResult {
    Btc {
        cone: ConeEstimate,
        #[serde(skip_serializing_if = "Option::is_none")]
        subdifferential: Option<SubdiffEstimate1D>,
        #[serde(skip_serializing_if = "Option::is_none")]
        membership: Option<HyperplaneMembership>,
    },
    Peano {
        cone: ConeEstimate,
        #[serde(skip_serializing_if = "Option::is_none")]
        normal: Option<NormalMembership>,
    },
    Clarke {
        set: ConvexSetApprox,
        #[serde(skip_serializing_if = "Option::is_none")]
        interval: Option<(f64, f64)>,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        candidates: Vec<CandidateMembership>,
    },
    Frechet {
        test: FrechetTest,
    },
    Limiting {
        result: LimitingResult,
    },
    Compare {
        comparison: ClarkeBtcComparison,
    },
    Certificate {
        certificate: MeanValueCertificate,
    },
    Lipschitz {
        gate: LipschitzGate,
    },
}

impl TaskResult {
    fn stabilized(&self) -> Option<bool> {
        match self {
            TaskResult::Btc { cone, subdifferential, .. } => {
                Some(subdifferential.as_ref().map_or(cone.stabilized, |s| s.stabilized))
            }
            TaskResult::Peano { cone, .. } => Some(cone.stabilized),
            TaskResult::Clarke { set, .. } => Some(set.stabilized),
            TaskResult::Compare { comparison } => Some(comparison.clarke.stabilized),
            _ => None,
        }
    }

    fn residual(&self) -> Option<f64> {
        match self {
            TaskResult::Certificate { certificate } => Some(certificate.residual),
            TaskResult::Compare { comparison } => Some(comparison.hausdorff),
            TaskResult::Btc { membership: Some(m), .. } => Some(m.worst()),
            TaskResult::Frechet { test } => Some(test.estimate),
            _ => None,
        }
    }

    /// Whether the task reached its claim: certificates valid, comparisons
    /// passing. Other results are estimates and always count as success.
    fn succeeded(&self) -> bool {
        match self {
            TaskResult::Certificate { certificate } => certificate.valid,
            TaskResult::Compare { comparison } => comparison.pass,
            _ => true,
        }
    }
}

/// Runs a validated job.
pub fn execute(job: &Job) -> Result<TaskResult, Error> {
    let f = &job.function;
    let s = &job.schedule;
    let tol = job.tol;
    Ok(match &job.params {
        TaskParams::Btc { a, l } => {
            let cone = estimate_btc_cone(f, a, s)?;
            let subdifferential = if a.len() == 1 { Some(btc_subdifferential_1d(f, a[0], s)?) } else { None };
            let membership = match l {
                Some(l) => {
                    Some(btc_hyperplane_membership(f, a, l, &sphere_grid(a.len(), MEMBERSHIP_DIRECTIONS), s, tol)?)
                }
                None => None,
            };
            TaskResult::Btc { cone, subdifferential, membership }
        }
        TaskParams::Peano { a, v } => {
            let cone = estimate_peano_cone(f, a, s)?;
            let normal = v.as_ref().map(|v| normal_cone_member(v, &cone, tol));
            TaskResult::Peano { cone, normal }
        }
        TaskParams::Clarke { a, candidates } => {
            let set = clarke_subdifferential(f, a, job.grid, s, tol)?;
            let candidates = candidates
                .iter()
                .map(|c| CandidateMembership {
                    candidate: c.clone(),
                    member: set.contains(c),
                    violation: set.violation(c),
                })
                .collect();
            TaskResult::Clarke { interval: set.interval(), set, candidates }
        }
        TaskParams::Frechet { a, v } => TaskResult::Frechet { test: frechet_member(f, a, v, s, tol)? },
        TaskParams::Limiting { a, candidates } => {
            TaskResult::Limiting { result: limiting_subdifferential(f, a, candidates, s, tol)? }
        }
        TaskParams::Compare { a } => TaskResult::Compare { comparison: compare_clarke_btc(f, a, s, tol)? },
        TaskParams::Rolle { c } => TaskResult::Certificate { certificate: rolle_search(f, &f.domain, *c, s, tol)? },
        TaskParams::Lagrange { l, c } => {
            TaskResult::Certificate { certificate: lagrange_search(f, &f.domain, l, *c, s, tol)? }
        }
        TaskParams::NormalLagrange { l, c } => {
            TaskResult::Certificate { certificate: normal_lagrange_search(f, &f.domain, l, *c, s, tol)? }
        }
        TaskParams::Lebourg { x, y } => TaskResult::Certificate { certificate: lebourg_certify(f, x, y, s, tol)? },
        TaskParams::Lipschitz { a } => TaskResult::Lipschitz { gate: lipschitz_gate(f, a, s)? },
    })
}

/// Exit status for an estimator error: 1 when the estimator ran but could not
/// reach a claim, 2 when the input itself is unusable.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoCertificate { .. }
        | Error::UnstableEstimate(_)
        | Error::NotLipschitz { .. }
        | Error::BoundaryHypothesisFailed { .. }
        | Error::NormalMembershipFailed { .. }
        | Error::EmptyCone => EXIT_NO_RESULT,
        Error::Eval(_) | Error::Domain(_) | Error::Geometry(_) | Error::Diff(_) | Error::InvalidInput(_) => {
            EXIT_INVALID
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Eval(_) => "evaluation",
        Error::Domain(_) => "domain",
        Error::Geometry(_) => "geometry",
        Error::Diff(_) => "differentiation",
        Error::InvalidInput(_) => "invalid_input",
        Error::EmptyCone => "empty_cone",
        Error::UnstableEstimate(_) => "unstable_estimate",
        Error::NotLipschitz { .. } => "not_lipschitz",
        Error::BoundaryHypothesisFailed { .. } => "boundary_hypothesis_failed",
        Error::NoCertificate { .. } => "no_certificate",
        Error::NormalMembershipFailed { .. } => "normal_membership_failed",
    }
}

fn error_details(e: &Error) -> Value {
    match e {
        Error::NotLipschitz { coarse, fine } => json!({"coarse": coarse, "fine": fine}),
        Error::BoundaryHypothesisFailed { residual, tol } => json!({"residual": residual, "tol": tol}),
        Error::NoCertificate { best_residual, best_point } => {
            json!({"best_residual": best_residual, "best_point": best_point})
        }
        Error::NormalMembershipFailed { vector, violation, direction } => {
            json!({"vector": vector, "violation": violation, "direction": direction})
        }
        _ => Value::Null,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl ErrorReport {
    fn from_spec(e: &SpecError) -> Self {
        ErrorReport { kind: "spec".into(), message: e.to_string(), details: Value::Null }
    }

    fn from_error(e: &Error) -> Self {
        ErrorReport { kind: error_kind(e).into(), message: e.to_string(), details: error_details(e) }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stabilized: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    /// The spec as given.
    pub spec: Value,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<TaskResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides every spec's seed.
    pub seed: Option<u64>,
    pub timestamps: bool,
}

fn report(spec: Value, seed: u64) -> Report {
    Report {
        tool: "conewright",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        spec,
        exit_code: EXIT_OK,
        result: None,
        error: None,
        diagnostics: Diagnostics::default(),
    }
}

/// Runs one spec given as JSON. Never fails: problems end up in the report.
pub fn run_spec(value: &Value, opts: RunOptions) -> Report {
    let start = Instant::now();
    let declared_seed = value.get("seed").and_then(Value::as_u64);
    let mut out = report(value.clone(), opts.seed.or(declared_seed).unwrap_or(0));
    match decode_spec(value).and_then(|s| s.validate(opts.seed)) {
        Err(e) => {
            out.exit_code = EXIT_INVALID;
            out.error = Some(ErrorReport::from_spec(&e));
        }
        Ok(job) => {
            out.seed = job.schedule.seed;
            match execute(&job) {
                Ok(result) => {
                    out.diagnostics.stabilized = result.stabilized();
                    out.diagnostics.residual = result.residual();
                    out.exit_code = if result.succeeded() { EXIT_OK } else { EXIT_NO_RESULT };
                    out.result = Some(result);
                }
                Err(e) => {
                    out.exit_code = exit_code(&e);
                    out.error = Some(ErrorReport::from_error(&e));
                }
            }
        }
    }
    if opts.timestamps {
        out.diagnostics.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    out
}

/// Output of a spec file: one report, or one per batch item in spec order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum RunOutput {
    Single(Box<Report>),
    Batch(Vec<Report>),
}

impl RunOutput {
    /// 2 if any item was invalid, else 1 if any produced no result, else 0.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunOutput::Single(r) => r.exit_code,
            RunOutput::Batch(items) => items.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK),
        }
    }

    pub fn reports(&self) -> Vec<&Report> {
        match self {
            RunOutput::Single(r) => vec![r.as_ref()],
            RunOutput::Batch(items) => items.iter().collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Runs the contents of a spec file. Batch items run concurrently.
pub fn run_spec_text(text: &str, opts: RunOptions) -> RunOutput {
    let is_batch = text.trim_start().starts_with('[');
    match parse_spec_file(text) {
        Err(e) => {
            let mut r = report(Value::Null, opts.seed.unwrap_or(0));
            r.exit_code = EXIT_INVALID;
            r.error = Some(ErrorReport::from_spec(&e));
            RunOutput::Single(Box::new(r))
        }
        Ok(items) if is_batch => RunOutput::Batch(items.par_iter().map(|v| run_spec(v, opts)).collect()),
        Ok(items) => RunOutput::Single(Box::new(run_spec(&items[0], opts))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUIET: RunOptions = RunOptions { seed: None, timestamps: false };

    fn run(v: Value) -> Report {
        run_spec(&v, QUIET)
    }

    #[test]
    fn abs_btc_report() {
        let r = run(json!({"f": "abs(x0)", "task": "btc", "a": 0}));
        assert_eq!(r.exit_code, 0);
        let v = serde_json::to_value(&r).unwrap();
        let iv = &v["result"]["subdifferential"]["intervals"][0];
        assert!((iv[0].as_f64().unwrap() + 1.0).abs() < 0.02 && (iv[1].as_f64().unwrap() - 1.0).abs() < 0.02);
        assert_eq!(v["seed"], 0);
        assert!(v["diagnostics"].get("wall_time_ms").is_none());
    }

    #[test]
    fn exit_codes_partition_outcomes() {
        let r = run(json!({"f": "abs(x0)", "task": "btc"}));
        assert_eq!((r.exit_code, r.error.unwrap().message), (2, "missing field a".to_string()));
        let r = run(json!({"f": "sabs_pow(x0, 2/3)", "task": "compare", "a": 0}));
        assert_eq!(r.exit_code, 1);
        assert_eq!(r.error.unwrap().kind, "not_lipschitz");
        let r = run(json!({"f": "x0^2", "task": "lagrange", "domain": {"box": [[0, 1]]}, "L": 0, "C": 0}));
        assert_eq!((r.exit_code, r.error.unwrap().kind.as_str()), (1, "boundary_hypothesis_failed"));
        let r = run(json!({"f": "sqrt(x0)", "task": "btc", "a": -1}));
        assert_eq!(r.exit_code, 2);
    }

    #[test]
    fn certificates_and_seeds() {
        let r = run(json!({"f": "x0^2", "task": "lagrange", "domain": {"box": [[0, 1]]}, "L": 1, "C": 0, "seed": 5}));
        assert_eq!(r.exit_code, 0);
        assert_eq!(r.seed, 5);
        let Some(TaskResult::Certificate { certificate }) = r.result else { panic!("certificate expected") };
        assert!((certificate.point[0] - 0.5).abs() < 1e-3);
    }

    #[test]
    fn batches_keep_spec_order() {
        let text = r#"[{"f": "x0", "task": "lipschitz", "a": 0}, {"f": "x0"}, {"f": "2*x0", "task": "btc", "a": 1}]"#;
        let out = run_spec_text(text, QUIET);
        let codes: Vec<i32> = out.reports().iter().map(|r| r.exit_code).collect();
        assert_eq!(codes, vec![0, 2, 0]);
        assert_eq!(out.exit_code(), 2);
        assert_eq!(out.reports()[2].spec["f"], "2*x0");
        assert_eq!(run_spec_text("not json", QUIET).exit_code(), 2);
    }

    #[test]
    fn same_spec_same_bytes() {
        let text = r#"{"f": "abs(x0) + abs(x1)", "task": "clarke", "a": [0, 0], "grid": 16, "seed": 3}"#;
        assert_eq!(run_spec_text(text, QUIET).to_json(), run_spec_text(text, QUIET).to_json());
    }
}
