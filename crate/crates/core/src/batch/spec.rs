//! Analysis spec files: JSON objects naming a function, a domain, a task and
//! its parameters. Decoding checks types; `validate` checks completeness.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::ScaleSchedule;
use crate::expr::{parse, Disk, Domain, DomainBox, Function};
use crate::geometry::LinearFunctional;
use crate::subdiff::{DEFAULT_GRID, DEFAULT_TOL};

/// A malformed or incomplete spec; the message names the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("missing field {0}")]
    MissingField(&'static str),
    #[error("field {field}: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> SpecError {
    SpecError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Btc,
    Peano,
    Clarke,
    Frechet,
    Limiting,
    Compare,
    Rolle,
    Lagrange,
    NormalLagrange,
    Lebourg,
    Lipschitz,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::Btc,
        Task::Peano,
        Task::Clarke,
        Task::Frechet,
        Task::Limiting,
        Task::Compare,
        Task::Rolle,
        Task::Lagrange,
        Task::NormalLagrange,
        Task::Lebourg,
        Task::Lipschitz,
    ];
}

/// A point given either as a bare number (one variable) or as an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Point {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Point::Scalar(x) => vec![*x],
            Point::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Box(Vec<(f64, f64)>),
    Disk { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_level: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Point>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<Point>,
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Decodes one spec from a JSON value, naming the path of any type error.
pub fn decode_spec(value: &serde_json::Value) -> Result<AnalysisSpec, SpecError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let field = e.path().to_string();
        SpecError::Schema {
            field: if field == "." { "spec".into() } else { field },
            message: e.into_inner().to_string(),
        }
    })
}

/// A spec file holds one spec object or an array of them.
pub fn parse_spec_file(text: &str) -> Result<Vec<serde_json::Value>, SpecError> {
    match serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))? {
        serde_json::Value::Array(items) => Ok(items),
        other => Ok(vec![other]),
    }
}

/// Task parameters, complete and dimension-checked.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskParams {
    Btc { a: Vec<f64>, l: Option<LinearFunctional> },
    Peano { a: Vec<f64>, v: Option<Vec<f64>> },
    Clarke { a: Vec<f64>, candidates: Vec<Vec<f64>> },
    Frechet { a: Vec<f64>, v: Vec<f64> },
    Limiting { a: Vec<f64>, candidates: Vec<Vec<f64>> },
    Compare { a: Vec<f64> },
    Rolle { c: f64 },
    Lagrange { l: LinearFunctional, c: f64 },
    NormalLagrange { l: LinearFunctional, c: f64 },
    Lebourg { x: Vec<f64>, y: Vec<f64> },
    Lipschitz { a: Vec<f64> },
}

/// A validated spec, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub task: Task,
    pub function: Function,
    pub params: TaskParams,
    pub schedule: ScaleSchedule,
    pub tol: f64,
    pub grid: usize,
}

fn point(field: &'static str, p: &Option<Point>, n: usize) -> Result<Vec<f64>, SpecError> {
    let v = p.as_ref().ok_or(SpecError::MissingField(field))?.to_vec();
    check_dim(field, &v, n)?;
    Ok(v)
}

fn check_dim(field: &'static str, v: &[f64], n: usize) -> Result<(), SpecError> {
    if v.len() != n {
        return Err(invalid(field, format!("has {} coordinates, f takes {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(field, "coordinates must be finite"));
    }
    Ok(())
}

fn functional(spec: &AnalysisSpec, n: usize) -> Result<LinearFunctional, SpecError> {
    Ok(LinearFunctional::new(point("L", &spec.l, n)?))
}

fn offset(spec: &AnalysisSpec) -> Result<f64, SpecError> {
    let c = spec.c.ok_or(SpecError::MissingField("C"))?;
    if !c.is_finite() {
        return Err(invalid("C", "must be finite"));
    }
    Ok(c)
}

fn candidate_list(spec: &AnalysisSpec, n: usize, required: bool) -> Result<Vec<Vec<f64>>, SpecError> {
    let Some(list) = &spec.candidates else {
        return if required { Err(SpecError::MissingField("candidates")) } else { Ok(Vec::new()) };
    };
    if required && list.is_empty() {
        return Err(invalid("candidates", "must not be empty"));
    }
    list.iter()
        .map(|p| {
            let v = p.to_vec();
            check_dim("candidates", &v, n).map(|_| v)
        })
        .collect()
}

fn build_domain(spec: &DomainSpec) -> Result<Domain, SpecError> {
    let domain = match spec {
        DomainSpec::Box(bounds) => DomainBox::new(bounds.clone()).map(Domain::Box),
        DomainSpec::Disk { center, radius } => Disk::new(center.clone(), *radius).map(Domain::Disk),
    };
    domain.map_err(|e| invalid("domain", e.to_string()))
}

fn build_schedule(spec: &AnalysisSpec, seed: u64) -> Result<ScaleSchedule, SpecError> {
    let mut s = ScaleSchedule::default().with_seed(seed);
    if let Some(o) = &spec.schedule {
        if let Some(r0) = o.r0 {
            s.r0 = r0;
        }
        if let Some(rho) = o.rho {
            s.rho = rho;
        }
        if let Some(k) = o.levels {
            s.levels = k;
        }
        if let Some(m) = o.samples_per_level {
            s.samples_per_level = m;
        }
    }
    s.validate().map_err(|e| invalid("schedule", e.to_string()))?;
    Ok(s)
}

impl AnalysisSpec {
    /// Checks that the task has every parameter it needs, with matching
    /// dimensions, and builds the job. `seed` overrides the spec's seed.
    pub fn validate(&self, seed: Option<u64>) -> Result<Job, SpecError> {
        let src = self.f.as_deref().ok_or(SpecError::MissingField("f"))?;
        let task = self.task.ok_or(SpecError::MissingField("task"))?;
        let expr = parse(src).map_err(|e| invalid("f", e.to_string()))?;
        let domain = self.domain.as_ref().map(build_domain).transpose()?;
        let function = match domain {
            Some(d) => Function::new(expr, d).map_err(|e| invalid("domain", e.to_string()))?,
            None => Function::unbounded(expr),
        };
        let n = function.dim();
        if n == 0 {
            return Err(invalid("f", "the function must use at least the variable x0"));
        }
        let needs_compact = matches!(task, Task::Rolle | Task::Lagrange | Task::NormalLagrange);
        if needs_compact && self.domain.is_none() {
            return Err(SpecError::MissingField("domain"));
        }
        let params = match task {
            Task::Btc => TaskParams::Btc {
                a: point("a", &self.a, n)?,
                l: self.l.as_ref().map(|_| functional(self, n)).transpose()?,
            },
            Task::Peano => TaskParams::Peano {
                a: point("a", &self.a, n)?,
                v: self.v.as_ref().map(|_| point("v", &self.v, n + 1)).transpose()?,
            },
            Task::Clarke => {
                TaskParams::Clarke { a: point("a", &self.a, n)?, candidates: candidate_list(self, n, false)? }
            }
            Task::Frechet => TaskParams::Frechet { a: point("a", &self.a, n)?, v: point("v", &self.v, n)? },
            Task::Limiting => {
                TaskParams::Limiting { a: point("a", &self.a, n)?, candidates: candidate_list(self, n, true)? }
            }
            Task::Compare => TaskParams::Compare { a: point("a", &self.a, n)? },
            Task::Rolle => TaskParams::Rolle { c: offset(self)? },
            Task::Lagrange => TaskParams::Lagrange { l: functional(self, n)?, c: offset(self)? },
            Task::NormalLagrange => TaskParams::NormalLagrange { l: functional(self, n)?, c: offset(self)? },
            Task::Lebourg => TaskParams::Lebourg { x: point("x", &self.x, n)?, y: point("y", &self.y, n)? },
            Task::Lipschitz => TaskParams::Lipschitz { a: point("a", &self.a, n)? },
        };
        let tol = self.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid("tol", "must be positive and finite"));
        }
        let grid = self.grid.unwrap_or(DEFAULT_GRID);
        if grid < 4 {
            return Err(invalid("grid", "must be at least 4"));
        }
        let schedule = build_schedule(self, seed.or(self.seed).unwrap_or(0))?;
        Ok(Job { task, function, params, schedule, tol, grid })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn job(v: serde_json::Value) -> Result<Job, SpecError> {
        decode_spec(&v)?.validate(None)
    }

    #[test]
    fn minimal_btc_spec() {
        let j = job(json!({"f": "abs(x0)", "task": "btc", "a": 0})).unwrap();
        assert_eq!(j.params, TaskParams::Btc { a: vec![0.0], l: None });
        assert_eq!(j.schedule, ScaleSchedule::default());
        assert_eq!(j.tol, DEFAULT_TOL);
    }

    #[test]
    fn missing_parameters_are_named() {
        let e = job(json!({"f": "abs(x0)", "task": "btc"})).unwrap_err();
        assert_eq!(e.to_string(), "missing field a");
        let e = job(json!({"f": "x0^2", "task": "lagrange", "domain": {"box": [[0, 1]]}, "C": 0})).unwrap_err();
        assert_eq!(e.to_string(), "missing field L");
        let e = job(json!({"f": "x0^2", "task": "rolle", "C": 0})).unwrap_err();
        assert_eq!(e.to_string(), "missing field domain");
        assert_eq!(job(json!({"task": "btc", "a": 0})).unwrap_err().to_string(), "missing field f");
    }

    #[test]
    fn type_errors_name_the_path() {
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": "zero"})).unwrap_err();
        assert!(e.to_string().starts_with("a:"), "{e}");
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": 0, "schedule": {"levels": -1}})).unwrap_err();
        assert!(e.to_string().starts_with("schedule.levels:"), "{e}");
        let e = job(json!({"f": "abs(x0)", "task": "slope", "a": 0})).unwrap_err();
        assert!(e.to_string().starts_with("task:"), "{e}");
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": 0, "typo": 1})).unwrap_err();
        assert!(e.to_string().contains("typo"), "{e}");
    }

    #[test]
    fn dimensions_and_ranges_are_checked() {
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": [0, 1]})).unwrap_err();
        assert_eq!(e.to_string(), "field a: has 2 coordinates, f takes 1");
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": 0, "schedule": {"rho": 1.5}})).unwrap_err();
        assert!(e.to_string().starts_with("field schedule:"), "{e}");
        let e = job(json!({"f": "abs(x0)", "task": "btc", "a": 0, "tol": 0})).unwrap_err();
        assert!(e.to_string().starts_with("field tol:"), "{e}");
        let e = job(json!({"f": "abs(", "task": "btc", "a": 0})).unwrap_err();
        assert!(e.to_string().starts_with("field f:"), "{e}");
    }

    #[test]
    fn domains_and_seeds() {
        let j = job(
            json!({"f": "x0^2 + x1^2", "task": "rolle", "C": 1, "domain": {"disk": {"center": [0, 0], "radius": 1}},
                           "seed": 7}),
        )
        .unwrap();
        assert!(matches!(j.function.domain, Domain::Disk(_)));
        assert_eq!(j.schedule.seed, 7);
        let overridden =
            decode_spec(&json!({"f": "x0", "task": "lipschitz", "a": 0, "seed": 7})).unwrap().validate(Some(3));
        assert_eq!(overridden.unwrap().schedule.seed, 3);
    }

    #[test]
    fn spec_files_hold_one_spec_or_an_array() {
        assert_eq!(parse_spec_file(r#"{"f": "x0"}"#).unwrap().len(), 1);
        assert_eq!(parse_spec_file(r#"[{"f": "x0"}, {"f": "x0"}]"#).unwrap().len(), 2);
        assert!(matches!(parse_spec_file("{"), Err(SpecError::Json(_))));
    }
}
