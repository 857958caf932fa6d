//! JSON experiment configs and the reports produced by running them.
//!
//! A config names one space, a list of sections on it, and a list of tasks.
//! Loading validates the schema and resolves every name, so anything that
//! fails at that stage is a usage error; tasks that run and fail are
//! reported as failures.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::carnot::{Splitting, Step2Group};
use crate::error::Error;
use crate::heisenberg::{make_heisenberg, HeisenbergInstance};
use crate::instances::{reciprocal_section, LinearQuotient, ReciprocalQuotient};
use crate::metric::{
    intrinsic_slope, lipschitz_estimate, metric_axiom_audit, verify_section, BoxDomain, Quotient, Sampler,
    Section, SlopeParams,
};
use crate::quasi_linear::{
    check_quasi_linearity, leibniz_bound_check, sum_sections, CheckParams, ConstantSource, QuasiLinearQuotient,
};
use crate::sections::{
    dilate_section, heisenberg_compatibility_classify, sum_sections_step2, GraphSection, GridTable, Height,
    Monomial,
};

/// Environment variable naming the default directory for `report.json`.
pub const OUTPUT_DIR_ENV: &str = "ILS_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("config line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Schema { field: String, message: String },
}

fn schema(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Schema {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sections: Vec<SectionSpec>,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Heisenberg {
        n: usize,
        #[serde(default = "one_usize")]
        k: usize,
    },
    /// Row-major `m × m` matrices, one per second-layer coordinate.
    Step2 { m: usize, n: usize, b: Vec<Vec<f64>> },
    Linear {
        weights: Vec<Vec<f64>>,
        #[serde(default = "one_f64")]
        lambda: f64,
    },
    Reciprocal,
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub n_samples: usize,
    pub n_pairs: usize,
    pub n_triples: usize,
    pub domain: Option<DomainSpec>,
    pub slope_r0: f64,
    pub slope_levels: usize,
    pub slope_samples: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        let s = SlopeParams::default();
        Self {
            n_samples: 200,
            n_pairs: 500,
            n_triples: 1000,
            domain: None,
            slope_r0: s.r0,
            slope_levels: s.n_levels,
            slope_samples: s.samples_per_level,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub section: f64,
    pub ratio: f64,
    pub metric: f64,
    pub quasi_linear: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            section: 1e-12,
            ratio: 1e-9,
            metric: 1e-12,
            quasi_linear: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SectionSpec {
    /// Intrinsic graph with a polynomial height over `N`-coordinates.
    GraphPolynomial {
        name: String,
        terms: Vec<Monomial>,
        domain: Option<DomainSpec>,
    },
    /// Intrinsic graph with a tabulated height.
    GraphGrid {
        name: String,
        grid: GridTable,
        domain: Option<DomainSpec>,
    },
    /// `y ↦ x` with one polynomial per total-space coordinate.
    PolynomialMap {
        name: String,
        components: Vec<Vec<Monomial>>,
        domain: Option<DomainSpec>,
    },
    Builtin {
        name: String,
        builtin: String,
        domain: Option<DomainSpec>,
    },
}

impl SectionSpec {
    pub fn name(&self) -> &str {
        match self {
            SectionSpec::GraphPolynomial { name, .. }
            | SectionSpec::GraphGrid { name, .. }
            | SectionSpec::PolynomialMap { name, .. }
            | SectionSpec::Builtin { name, .. } => name,
        }
    }

    fn domain(&self) -> Option<&DomainSpec> {
        match self {
            SectionSpec::GraphPolynomial { domain, .. }
            | SectionSpec::GraphGrid { domain, .. }
            | SectionSpec::PolynomialMap { domain, .. }
            | SectionSpec::Builtin { domain, .. } => domain.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    VerifySection {
        section: String,
    },
    LipEstimate {
        section: String,
        /// Pass only if the estimate matches this value within `ratio`.
        expect: Option<f64>,
    },
    Slope {
        section: String,
        at: Vec<f64>,
    },
    DilateCheck {
        section: String,
        lambda: f64,
    },
    SumCheck {
        phi: String,
        psi: String,
    },
    CompatClassify {
        phi: String,
        psi: String,
    },
    QuasiLinearCheck {},
    LeibnizCheck {
        phi: String,
        psi: String,
        at: Vec<Vec<f64>>,
        c: Option<f64>,
    },
    MetricAudit {},
}

impl TaskSpec {
    pub fn label(&self) -> &'static str {
        match self {
            TaskSpec::VerifySection { .. } => "verify-section",
            TaskSpec::LipEstimate { .. } => "lip-estimate",
            TaskSpec::Slope { .. } => "slope",
            TaskSpec::DilateCheck { .. } => "dilate-check",
            TaskSpec::SumCheck { .. } => "sum-check",
            TaskSpec::CompatClassify { .. } => "compat-classify",
            TaskSpec::QuasiLinearCheck {} => "quasi-linear-check",
            TaskSpec::LeibnizCheck { .. } => "leibniz-check",
            TaskSpec::MetricAudit {} => "metric-audit",
        }
    }

    fn section_refs(&self) -> Vec<&str> {
        match self {
            TaskSpec::VerifySection { section }
            | TaskSpec::LipEstimate { section, .. }
            | TaskSpec::Slope { section, .. }
            | TaskSpec::DilateCheck { section, .. } => vec![section],
            TaskSpec::SumCheck { phi, psi }
            | TaskSpec::CompatClassify { phi, psi }
            | TaskSpec::LeibnizCheck { phi, psi, .. } => vec![phi, psi],
            TaskSpec::QuasiLinearCheck {} | TaskSpec::MetricAudit {} => vec![],
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }
}

// ------------------------------------------------------------------ world

#[derive(Debug, Clone)]
enum Space {
    Carnot {
        split: Splitting,
        heisenberg: Option<HeisenbergInstance>,
    },
    /// Heisenberg instance with `k > 1`: only the metric audit applies.
    HeisenbergWide(HeisenbergInstance),
    Linear(QuasiLinearQuotient),
    Reciprocal(Arc<dyn Quotient>),
}

impl Space {
    fn quotient(&self) -> Option<Arc<dyn Quotient>> {
        match self {
            Space::Carnot { split, .. } => Some(Arc::new(crate::carnot::CosetQuotient::new(split.clone()))),
            Space::HeisenbergWide(_) => None,
            Space::Linear(q) => Some(Arc::clone(q.base())),
            Space::Reciprocal(q) => Some(Arc::clone(q)),
        }
    }

    fn base_dim(&self) -> usize {
        match self {
            Space::Carnot { split, .. } => split.n_dim(),
            Space::HeisenbergWide(h) => 2 * h.n() + 1 - h.k(),
            Space::Linear(q) => q.base().base_dim(),
            Space::Reciprocal(_) => 1,
        }
    }

    fn default_domain(&self) -> BoxDomain {
        match self {
            Space::Reciprocal(_) => BoxDomain::interval(1.0, 10.0).expect("valid interval"),
            other => BoxDomain::cube(other.base_dim(), -1.0, 1.0).expect("valid cube"),
        }
    }
}

#[derive(Debug, Clone)]
struct Built {
    section: Section,
    graph: Option<GraphSection>,
}

/// A config with its space and sections constructed.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    space: Space,
    sections: BTreeMap<String, Built>,
}

fn build_space(spec: &SpaceSpec) -> Result<Space, ConfigError> {
    match spec {
        SpaceSpec::Heisenberg { n, k } => {
            let h = make_heisenberg(*n, *k).map_err(|e| schema("space", e))?;
            if *k == 1 {
                Ok(Space::Carnot {
                    split: h.splitting().map_err(|e| schema("space", e))?,
                    heisenberg: Some(h),
                })
            } else {
                Ok(Space::HeisenbergWide(h))
            }
        }
        SpaceSpec::Step2 { m, n, b } => {
            let g = Step2Group::new(*m, *n, b.clone()).map_err(|e| schema("space.b", e))?;
            Ok(Space::Carnot {
                split: Splitting::new(Arc::new(g)),
                heisenberg: None,
            })
        }
        SpaceSpec::Linear { weights, lambda } => {
            let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::new(weights).map_err(|e| schema("space.weights", e))?);
            let q = QuasiLinearQuotient::new(base, *lambda)
                .map_err(|e| schema("space.lambda", e))?
                .declare_fibers_in_lines();
            Ok(Space::Linear(q))
        }
        SpaceSpec::Reciprocal => Ok(Space::Reciprocal(Arc::new(ReciprocalQuotient))),
    }
}

fn polynomial_eval(terms: &[Monomial], y: &[f64]) -> f64 {
    Height::Polynomial { terms: terms.to_vec() }.eval(y).expect("polynomials evaluate everywhere")
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, ConfigError> {
        let space = build_space(&config.space)?;
        let default_domain = match &config.sampling.domain {
            Some(d) => BoxDomain::new(d.lower.clone(), d.upper.clone()).map_err(|e| schema("sampling.domain", e))?,
            None => space.default_domain(),
        };
        if default_domain.dim() != space.base_dim() {
            return Err(schema(
                "sampling.domain",
                format!("dimension {} but the base has dimension {}", default_domain.dim(), space.base_dim()),
            ));
        }
        let mut sections = BTreeMap::new();
        for (i, spec) in config.sections.iter().enumerate() {
            let field = format!("sections[{i}]");
            if sections.contains_key(spec.name()) {
                return Err(schema(field, format!("duplicate section name '{}'", spec.name())));
            }
            let domain = match spec.domain() {
                Some(d) => BoxDomain::new(d.lower.clone(), d.upper.clone()).map_err(|e| schema(&field, e))?,
                None => default_domain.clone(),
            };
            let sampler = Sampler::random(domain, config.seed);
            let built = build_section(&space, spec, sampler).map_err(|e| schema(&field, e))?;
            sections.insert(spec.name().to_string(), built);
        }
        for (i, task) in config.tasks.iter().enumerate() {
            let field = format!("tasks[{i}]");
            for name in task.section_refs() {
                let Some(b) = sections.get(name) else {
                    return Err(schema(field, format!("unknown section '{name}'")));
                };
                let needs_graph = matches!(
                    task,
                    TaskSpec::DilateCheck { .. } | TaskSpec::CompatClassify { .. }
                ) || (matches!(task, TaskSpec::SumCheck { .. }) && matches!(space, Space::Carnot { .. }));
                if needs_graph && b.graph.is_none() {
                    return Err(schema(field, format!("{} needs graph sections, '{name}' is not one", task.label())));
                }
            }
            let ok = match (task, &space) {
                (TaskSpec::CompatClassify { .. }, Space::Carnot { heisenberg, .. }) => heisenberg.is_some(),
                (TaskSpec::DilateCheck { .. }, Space::Carnot { .. }) => true,
                (TaskSpec::DilateCheck { .. } | TaskSpec::CompatClassify { .. }, _) => false,
                (TaskSpec::QuasiLinearCheck {} | TaskSpec::LeibnizCheck { .. }, s) => matches!(s, Space::Linear(_)),
                (TaskSpec::SumCheck { .. }, s) => matches!(s, Space::Linear(_) | Space::Carnot { .. }),
                _ => true,
            };
            if !ok {
                return Err(schema(field, format!("{} is not available for this space", task.label())));
            }
        }
        Ok(Self { config, space, sections })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }
}

fn build_section(space: &Space, spec: &SectionSpec, sampler: Sampler) -> crate::Result<Built> {
    let plain = |section: Section| Built { section, graph: None };
    match (spec, space) {
        (SectionSpec::GraphPolynomial { name, terms, .. }, Space::Carnot { split, .. }) => {
            graph(name, split, Height::Polynomial { terms: terms.clone() }, sampler)
        }
        (SectionSpec::GraphGrid { name, grid, .. }, Space::Carnot { split, .. }) => {
            graph(name, split, Height::Grid(grid.clone()), sampler)
        }
        (SectionSpec::Builtin { name, builtin, .. }, Space::Carnot { split, .. }) if builtin == "flat" => {
            graph(name, split, Height::zero(), sampler)
        }
        (SectionSpec::Builtin { name, builtin, .. }, Space::Reciprocal(_)) if builtin == "reciprocal" => {
            let seed = match sampler.mode {
                crate::metric::SampleMode::Random { seed } => seed,
                crate::metric::SampleMode::Grid => 0,
            };
            let s = reciprocal_section(sampler.domain.lower[0], sampler.domain.upper[0], seed)?;
            Ok(plain(s.renamed(name.clone())))
        }
        (SectionSpec::PolynomialMap { name, components, .. }, s @ (Space::Linear(_) | Space::Reciprocal(_))) => {
            let q = s.quotient().expect("plain quotient");
            if components.len() != q.total_dim() {
                return Err(Error::DimensionMismatch {
                    expected: q.total_dim(),
                    got: components.len(),
                });
            }
            for c in components {
                Height::Polynomial { terms: c.clone() }.validate(q.base_dim())?;
            }
            let comps = components.clone();
            let s = Section::new(name.clone(), q, sampler, move |y| {
                Ok(comps.iter().map(|c| polynomial_eval(c, y)).collect())
            })?;
            Ok(plain(s))
        }
        (spec, _) => Err(Error::InvalidArgument(format!(
            "section kind of '{}' does not fit this space",
            spec.name()
        ))),
    }
}

fn graph(name: &str, split: &Splitting, height: Height, sampler: Sampler) -> crate::Result<Built> {
    let g = GraphSection::new(name, split.clone(), height)?;
    Ok(Built {
        section: g.to_section(sampler)?,
        graph: Some(g),
    })
}

// ----------------------------------------------------------------- report

/// Outcome of one task. `result` holds the full task report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub index: usize,
    pub task: String,
    pub passed: bool,
    pub tolerance: Option<f64>,
    pub n_samples: Option<usize>,
    pub result: Value,
    pub error: Option<String>,
}

/// Everything in a report that is fixed by the config and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub tasks: Vec<TaskOutcome>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub body: ReportBody,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Writes one `key,value` CSV per task into `dir`.
    pub fn write_csv(&self, dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.body.tasks {
            let path = dir.join(format!("task_{:02}_{}.csv", t.index, t.task));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["key", "value"])?;
            let mut rows = vec![
                ("passed".to_string(), t.passed.to_string()),
                ("tolerance".to_string(), t.tolerance.map_or(String::new(), |v| v.to_string())),
                ("n_samples".to_string(), t.n_samples.map_or(String::new(), |v| v.to_string())),
            ];
            if let Some(e) = &t.error {
                rows.push(("error".into(), e.clone()));
            }
            flatten("result", &t.result, &mut rows);
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            w.flush()?;
            written.push(path);
        }
        Ok(written)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&format!("{prefix}.{k}"), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

struct Outcome {
    passed: bool,
    tolerance: Option<f64>,
    n_samples: Option<usize>,
    result: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

impl Experiment {
    fn section(&self, name: &str) -> &Built {
        &self.sections[name]
    }

    fn slope_params(&self) -> SlopeParams {
        let s = &self.config.sampling;
        SlopeParams {
            r0: s.slope_r0,
            n_levels: s.slope_levels,
            samples_per_level: s.slope_samples,
            seed: self.config.seed,
        }
    }

    fn check_params(&self) -> CheckParams {
        CheckParams {
            n_samples: self.config.sampling.n_samples,
            tol: self.config.tolerances.quasi_linear,
        }
    }

    fn run_task(&self, task: &TaskSpec) -> crate::Result<Outcome> {
        let seed = self.config.seed;
        let s = &self.config.sampling;
        let tol = &self.config.tolerances;
        Ok(match task {
            TaskSpec::VerifySection { section } => {
                let r = verify_section(&self.section(section).section, s.n_samples, tol.section)?;
                Outcome {
                    passed: r.passed,
                    tolerance: Some(r.tolerance),
                    n_samples: Some(r.n_samples),
                    result: to_value(&r),
                }
            }
            TaskSpec::LipEstimate { section, expect } => {
                let r = lipschitz_estimate(&self.section(section).section, s.n_pairs, seed)?;
                let passed = r.estimate.is_finite() && expect.map_or(true, |e| (r.estimate - e).abs() <= tol.ratio);
                let mut v = to_value(&r);
                v["expect"] = json!(expect);
                Outcome {
                    passed,
                    tolerance: Some(tol.ratio),
                    n_samples: Some(r.n_pairs),
                    result: v,
                }
            }
            TaskSpec::Slope { section, at } => {
                let p = self.slope_params();
                let r = intrinsic_slope(&self.section(section).section, at, &p)?;
                Outcome {
                    passed: r.extrapolated.is_finite(),
                    tolerance: None,
                    n_samples: Some(p.n_levels * p.samples_per_level),
                    result: to_value(&r),
                }
            }
            TaskSpec::DilateCheck { section, lambda } => {
                let b = self.section(section);
                let g = b.graph.as_ref().expect("checked at load");
                let r = dilate_section(g, *lambda, b.section.sampler(), s.n_pairs, seed, tol.ratio)?.report;
                Outcome {
                    passed: r.passed,
                    tolerance: Some(r.tolerance),
                    n_samples: Some(r.n_pairs),
                    result: to_value(&r),
                }
            }
            TaskSpec::SumCheck { phi, psi } => self.sum_check(phi, psi)?,
            TaskSpec::CompatClassify { phi, psi } => {
                let Space::Carnot {
                    heisenberg: Some(h), ..
                } = &self.space
                else {
                    unreachable!("checked at load")
                };
                let (a, b) = (self.section(phi), self.section(psi));
                let r = heisenberg_compatibility_classify(
                    h,
                    a.graph.as_ref().expect("checked at load"),
                    &a.section.sampler().domain,
                    b.graph.as_ref().expect("checked at load"),
                    &b.section.sampler().domain,
                    s.n_pairs,
                    seed,
                )?;
                Outcome {
                    passed: r.internally_consistent,
                    tolerance: Some(r.compatibility.tolerance),
                    n_samples: Some(r.n_pairs),
                    result: to_value(&r),
                }
            }
            TaskSpec::QuasiLinearCheck {} => {
                let Space::Linear(q) = &self.space else { unreachable!("checked at load") };
                let r = check_quasi_linearity(q, s.n_samples, seed)?;
                Outcome {
                    passed: r.max_defect <= tol.quasi_linear,
                    tolerance: Some(tol.quasi_linear),
                    n_samples: Some(r.n_samples),
                    result: to_value(&r),
                }
            }
            TaskSpec::LeibnizCheck { phi, psi, at, c } => {
                let Space::Linear(q) = &self.space else { unreachable!("checked at load") };
                let source = match c {
                    Some(c) => ConstantSource::Supplied(*c),
                    None => ConstantSource::Estimated { n_pairs: s.n_pairs, seed },
                };
                let (a, b) = (&self.section(phi).section, &self.section(psi).section);
                let reports = at
                    .iter()
                    .map(|y| leibniz_bound_check(q, a, b, y, source, &self.slope_params(), self.check_params()))
                    .collect::<crate::Result<Vec<_>>>()?;
                Outcome {
                    passed: reports.iter().all(|r| r.satisfied),
                    tolerance: Some(tol.quasi_linear),
                    n_samples: Some(at.len()),
                    result: to_value(&reports),
                }
            }
            TaskSpec::MetricAudit {} => {
                let r = match &self.space {
                    Space::HeisenbergWide(h) => {
                        let split_free = crate::carnot::CosetQuotient::new(Splitting::new(Arc::clone(h.group_arc())));
                        metric_axiom_audit(&split_free, s.n_triples, seed)?
                    }
                    other => metric_axiom_audit(other.quotient().expect("has quotient").as_ref(), s.n_triples, seed)?,
                };
                Outcome {
                    passed: r.max_triangle_defect <= tol.metric,
                    tolerance: Some(tol.metric),
                    n_samples: Some(r.n_triples),
                    result: to_value(&r),
                }
            }
        })
    }

    fn sum_check(&self, phi: &str, psi: &str) -> crate::Result<Outcome> {
        let seed = self.config.seed;
        let s = &self.config.sampling;
        let (a, b) = (self.section(phi), self.section(psi));
        match &self.space {
            Space::Carnot { .. } => {
                let r = sum_sections_step2(
                    a.graph.as_ref().expect("checked at load"),
                    b.graph.as_ref().expect("checked at load"),
                    a.section.sampler(),
                    s.n_samples,
                    seed,
                )?
                .report;
                Ok(Outcome {
                    passed: r.check.passed && r.finite,
                    tolerance: Some(r.compatibility.tolerance),
                    n_samples: Some(r.compatibility.n_pairs),
                    result: to_value(&r),
                })
            }
            Space::Linear(q) => {
                let r = sum_sections(q, &a.section, &b.section, s.n_pairs, seed, self.check_params())?;
                Ok(Outcome {
                    passed: r.check.passed && r.lipschitz.estimate.is_finite(),
                    tolerance: Some(r.check.tolerance),
                    n_samples: Some(r.lipschitz.n_pairs),
                    result: json!({
                        "quasi_linearity": to_value(&r.quasi_linearity),
                        "lines": to_value(&r.lines),
                        "check": to_value(&r.check),
                        "lipschitz": to_value(&r.lipschitz),
                    }),
                })
            }
            _ => unreachable!("checked at load"),
        }
    }

    /// Runs every task in order. Task errors are recorded as failures.
    pub fn run(&self) -> RunReport {
        let start = Instant::now();
        let tasks: Vec<TaskOutcome> = self
            .config
            .tasks
            .iter()
            .enumerate()
            .map(|(index, task)| match self.run_task(task) {
                Ok(o) => TaskOutcome {
                    index,
                    task: task.label().to_string(),
                    passed: o.passed,
                    tolerance: o.tolerance,
                    n_samples: o.n_samples,
                    result: o.result,
                    error: None,
                },
                Err(e) => TaskOutcome {
                    index,
                    task: task.label().to_string(),
                    passed: false,
                    tolerance: None,
                    n_samples: None,
                    result: error_detail(&e),
                    error: Some(e.to_string()),
                },
            })
            .collect();
        let passed = tasks.iter().all(|t| t.passed);
        RunReport {
            body: ReportBody {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: self.config.seed,
                config: self.config.clone(),
                tasks,
                passed,
            },
            wall_time_ms: start.elapsed().as_millis(),
        }
    }
}

fn error_detail(e: &Error) -> Value {
    match e {
        Error::CompatibilityViolated { a, b, defects } => json!({ "witness": [a, b], "defects": defects }),
        Error::QuasiLinearityViolated { point, residual } => json!({ "witness": point, "residual": residual }),
        _ => Value::Null,
    }
}

/// Loads, validates and runs a config, with an optional seed override.
pub fn run_config(config: ExperimentConfig, seed: Option<u64>) -> Result<RunReport, ConfigError> {
    let mut config = config;
    if let Some(s) = seed {
        config.seed = s;
    }
    Ok(Experiment::new(config)?.run())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuiltinEntry {
    pub name: &'static str,
    pub category: &'static str,
    pub description: &'static str,
}

pub fn list_builtins() -> Vec<BuiltinEntry> {
    vec![
        BuiltinEntry {
            name: "heisenberg",
            category: "space",
            description: "Heisenberg group H^n with H spanned by the first k coordinates {n, k}",
        },
        BuiltinEntry {
            name: "step2",
            category: "space",
            description: "step-2 Carnot group on R^(m+n) from skew matrices {m, n, b}",
        },
        BuiltinEntry {
            name: "linear",
            category: "space",
            description: "linear quotient x -> Ax on R^s with affine fibers {weights, lambda}",
        },
        BuiltinEntry {
            name: "reciprocal",
            category: "space",
            description: "pi(x) = 1/x from (0, 1) onto (1, inf), singleton fibers",
        },
        BuiltinEntry {
            name: "reciprocal",
            category: "section",
            description: "phi(y) = 1/y, an intrinsic 1-Lipschitz section of the reciprocal quotient",
        },
        BuiltinEntry {
            name: "flat",
            category: "section",
            description: "intrinsic graph with f = 0 on a step-2 or Heisenberg space",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_error_carries_position() {
        let err = ExperimentConfig::from_json("{\n  \"space\": {\"kind\": \"heisenberg\", \"n\": 1},\n  \"tasks\": [ {\"task\": \"nope\"} ]\n}")
            .unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_section_is_schema_error() {
        let c = ExperimentConfig::from_json(
            r#"{"space": {"kind": "heisenberg", "n": 1}, "tasks": [{"task": "verify-section", "section": "x"}]}"#,
        )
        .unwrap();
        assert!(matches!(Experiment::new(c), Err(ConfigError::Schema { .. })));
    }

    #[test]
    fn flat_heisenberg_run_passes() {
        let c = ExperimentConfig::from_json(
            r#"{"space": {"kind": "heisenberg", "n": 1, "k": 1},
                "sections": [{"kind": "builtin", "name": "flat", "builtin": "flat"}],
                "sampling": {"n_samples": 50, "n_pairs": 50},
                "tasks": [{"task": "verify-section", "section": "flat"},
                          {"task": "lip-estimate", "section": "flat"}]}"#,
        )
        .unwrap();
        let r = run_config(c, None).unwrap();
        assert!(r.body.passed, "{}", r.to_json());
    }

    #[test]
    fn catalog_names() {
        let names: Vec<_> = list_builtins().iter().map(|b| b.name).collect();
        assert!(names.contains(&"reciprocal") && names.contains(&"heisenberg"));
    }
}
