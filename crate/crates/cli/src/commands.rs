//! Job parsing, execution and rendering.

use std::fmt;

use multinorm::acceptance::{run_all, CriterionReport};
use multinorm::decompositions::{is_hermitian, is_orthogonal, is_orthogonal_set, is_small, MAX_ORTHOGONAL_LEN};
use multinorm::matrix_laws::check_multinorm_matrix_law;
use multinorm::multinorms::{check_axioms, rate_of_growth};
use multinorm::operators::mb_norm;
use multinorm::spaces::dual_space;
use multinorm::{evaluate, Decomposition, Index, Matrix, MultiNormSpec, NormValue, OptimConfig, SpaceSpec, Tuple, Vector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Eval,
    Axioms,
    Growth,
    Dual,
    Mbnorm,
    Decomp,
    Verify { only: Option<String> },
    Table { only: Option<String> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Axioms => "axioms",
            Command::Growth => "growth",
            Command::Dual => "dual",
            Command::Mbnorm => "mbnorm",
            Command::Decomp => "decomp",
            Command::Verify { .. } => "verify",
            Command::Table { .. } => "table",
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    /// The input does not match the job schema or is mathematically invalid.
    Schema(String),
    /// A kernel rejected the job while running it.
    Run(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "invalid input: {m}"),
            Failure::Run(m) => write!(f, "{m}"),
        }
    }
}

fn run_err(e: multinorm::Error) -> Failure {
    Failure::Run(e.to_string())
}

fn schema_err(e: impl fmt::Display) -> Failure {
    Failure::Schema(e.to_string())
}

pub struct Job {
    pub command: Command,
    pub input: Value,
    pub cfg: OptimConfig,
}

/// Splits a job document into its input and configuration. A previous
/// report (`{"command", "input", "cfg", ...}`) is accepted for replay.
pub fn parse_job(command: Command, text: Option<&str>) -> Result<Job, Failure> {
    let suite_input = |only: &Option<String>| match only {
        Some(o) => json!({ "only": o }),
        None => json!({}),
    };
    let Some(text) = text else {
        let input = match &command {
            Command::Verify { only } | Command::Table { only } => suite_input(only),
            _ => json!({}),
        };
        return Ok(Job { command, input, cfg: OptimConfig::default() });
    };
    let doc: Value = serde_json::from_str(text).map_err(schema_err)?;
    let Value::Object(mut map) = doc else {
        return Err(Failure::Schema("job must be a JSON object".into()));
    };
    let replay = map.contains_key("command") && map.contains_key("input");
    if replay {
        let name = map.get("command").and_then(Value::as_str).unwrap_or_default();
        if name != command.name() {
            return Err(Failure::Schema(format!("report is for command {name:?}, not {:?}", command.name())));
        }
    }
    let cfg = match map.remove("cfg") {
        Some(c) => serde_json::from_value(c).map_err(|e| Failure::Schema(format!("cfg: {e}")))?,
        None => OptimConfig::default(),
    };
    let input = if replay { map.remove("input").unwrap_or(Value::Null) } else { Value::Object(map) };
    Ok(Job { command, input, cfg })
}

fn typed<T: DeserializeOwned>(v: &Value) -> Result<T, Failure> {
    serde_json::from_value(v.clone()).map_err(schema_err)
}

fn tuple(space: &SpaceSpec, vectors: Vec<Vector>) -> Result<Tuple, Failure> {
    Tuple::new(space.clone(), vectors).map_err(schema_err)
}

fn default_n_max() -> usize {
    4
}

fn default_trials() -> usize {
    1000
}

fn default_decomp_trials() -> usize {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalInput {
    space: SpaceSpec,
    spec: MultiNormSpec,
    tuple: Vec<Vector>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AxiomsInput {
    space: SpaceSpec,
    spec: MultiNormSpec,
    #[serde(default = "default_n_max")]
    n_max: usize,
    #[serde(default = "default_trials")]
    trials: usize,
    /// Also test the matrix law for this index.
    #[serde(default)]
    p_role: Option<Index>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthInput {
    space: SpaceSpec,
    spec: MultiNormSpec,
    #[serde(default = "default_n_max")]
    n_max: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DualInput {
    /// The primal space; `tuple` lives in its dual.
    space: SpaceSpec,
    base: MultiNormSpec,
    tuple: Vec<Vector>,
    #[serde(default)]
    closed_form: Option<MultiNormSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MbInput {
    source: SpaceSpec,
    #[serde(default)]
    target: Option<SpaceSpec>,
    matrix: Matrix,
    spec_source: MultiNormSpec,
    spec_target: MultiNormSpec,
    #[serde(default = "default_n_max")]
    n_max: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompInput {
    space: SpaceSpec,
    spec: MultiNormSpec,
    decomposition: Decomposition,
    #[serde(default = "default_decomp_trials")]
    trials: usize,
    /// Optional finite set tested for orthogonality under `spec`.
    #[serde(default)]
    set: Option<Vec<Vector>>,
}

/// The output of one job.
pub struct Report {
    command: &'static str,
    input: Value,
    cfg: OptimConfig,
    result: Value,
    text: String,
    pub failed: bool,
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    input: &'a Value,
    cfg: &'a OptimConfig,
    result: &'a Value,
}

impl Report {
    pub fn json(&self) -> String {
        let env = Envelope { command: self.command, input: &self.input, cfg: &self.cfg, result: &self.result };
        let mut s = serde_json::to_string_pretty(&env).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn text(&self) -> String {
        let c = &self.cfg;
        format!(
            "{}\n# {} seed={} restarts={} tol={:e} max_enum={} grid_points={} refine_passes={}\n",
            self.text.trim_end(),
            self.command,
            c.seed,
            c.restarts,
            c.tol,
            c.max_enum,
            c.grid_points,
            c.refine_passes
        )
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn describe(v: &NormValue) -> String {
    let kind = to_value(&v.kind);
    format!(
        "{} [{}, {}] {} via {}",
        v.value(),
        v.lower,
        v.upper,
        kind.as_str().unwrap_or_default(),
        v.method
    )
}

fn norm_value_json(v: &NormValue) -> Value {
    let mut m = Map::new();
    m.insert("value".into(), to_value(&v.value()));
    if let Value::Object(rest) = to_value(v) {
        m.extend(rest);
    }
    Value::Object(m)
}

pub fn execute(job: Job, cfg: OptimConfig) -> Result<Report, Failure> {
    let Job { command, input, .. } = job;
    let mut failed = false;
    let (result, text) = match &command {
        Command::Eval => {
            let i: EvalInput = typed(&input)?;
            i.spec.validate(&i.space).map_err(schema_err)?;
            let t = tuple(&i.space, i.tuple)?;
            let v = evaluate(&i.spec, &t, &cfg).map_err(run_err)?;
            (norm_value_json(&v), format!("{}: {}", i.spec.name(), describe(&v)))
        }
        Command::Axioms => {
            let i: AxiomsInput = typed(&input)?;
            i.spec.validate(&i.space).map_err(schema_err)?;
            let r = check_axioms(&i.spec, &i.space, i.n_max, i.trials, &cfg).map_err(run_err)?;
            let mut text = format!(
                "{}: {} violations of {:?} in {} trials{}",
                r.spec,
                r.violation_count,
                r.checked,
                r.trials,
                if r.heuristic { " (search-based values)" } else { "" }
            );
            for v in r.violations.iter().take(3) {
                text.push_str(&format!("\n  {:?}: lhs {} vs rhs {} (gap {:e})", v.axiom, v.lhs, v.rhs, v.gap));
            }
            let mut out = json!({ "axioms": r });
            if let Some(p) = i.p_role {
                let law = check_multinorm_matrix_law(&i.spec, &i.space, p, i.n_max, i.trials, &cfg).map_err(run_err)?;
                text.push_str(&format!("\nmatrix law for l^{p}: {} violations", law.violation_count));
                out["matrix_law"] = to_value(&law);
            }
            (out, text)
        }
        Command::Growth => {
            let i: GrowthInput = typed(&input)?;
            i.spec.validate(&i.space).map_err(schema_err)?;
            let mut levels = Vec::new();
            let mut text = String::new();
            for n in 1..=i.n_max {
                let v = rate_of_growth(&i.spec, &i.space, n, &cfg).map_err(run_err)?;
                text.push_str(&format!("n={n}: {}\n", describe(&v)));
                levels.push(json!({ "n": n, "value": norm_value_json(&v) }));
            }
            (json!({ "spec": i.spec.name(), "levels": levels }), text)
        }
        Command::Dual => {
            let i: DualInput = typed(&input)?;
            let dual = dual_space(&i.space);
            let spec = MultiNormSpec::NumericalDual { base: Box::new(i.base) };
            spec.validate(&dual).map_err(schema_err)?;
            if let Some(c) = &i.closed_form {
                c.validate(&dual).map_err(schema_err)?;
            }
            let t = tuple(&dual, i.tuple)?;
            let v = evaluate(&spec, &t, &cfg).map_err(run_err)?;
            let mut text = format!("{}: {}", spec.name(), describe(&v));
            let mut out = json!({ "value": norm_value_json(&v) });
            if let Some(c) = &i.closed_form {
                let w = evaluate(c, &t, &cfg).map_err(run_err)?;
                text.push_str(&format!("\n{}: {}\ndifference {:e}", c.name(), describe(&w), v.lower - w.lower));
                out["closed_form"] = json!({ "spec": c.name(), "value": norm_value_json(&w), "difference": v.lower - w.lower });
            }
            (out, text)
        }
        Command::Mbnorm => {
            let i: MbInput = typed(&input)?;
            let target = i.target.unwrap_or_else(|| i.source.clone());
            i.spec_source.validate(&i.source).map_err(schema_err)?;
            i.spec_target.validate(&target).map_err(schema_err)?;
            let r = mb_norm(&i.matrix, &i.source, &i.spec_source, &target, &i.spec_target, i.n_max, &cfg).map_err(run_err)?;
            let mut text = String::new();
            for (n, v) in r.levels.iter().enumerate() {
                text.push_str(&format!("p_{}: {}\n", n + 1, describe(v)));
            }
            text.push_str(&format!("sup over n <= {}: {}; monotone: {}", r.n_max, describe(&r.sup_estimate), r.monotone));
            (to_value(&r), text)
        }
        Command::Decomp => {
            let i: DecompInput = typed(&input)?;
            i.spec.validate(&i.space).map_err(schema_err)?;
            let set = match i.set {
                Some(v) => Some(tuple(&i.space, v)?),
                None => None,
            };
            let h = is_hermitian(&i.decomposition, &i.space, i.trials, &cfg).map_err(run_err)?;
            let s = is_small(&i.decomposition, &i.spec, &i.space, i.trials, &cfg).map_err(run_err)?;
            let o = if i.decomposition.len() <= MAX_ORTHOGONAL_LEN {
                Some(is_orthogonal(&i.decomposition, &i.spec, &i.space, i.trials, &cfg).map_err(run_err)?)
            } else {
                None
            };
            let verdict = |holds: bool| if holds { "no counterexample found" } else { "fails (witness attached)" };
            let mut text = format!("hermitian: {}\nsmall: {}", verdict(h.holds), verdict(s.holds));
            match &o {
                Some(o) => text.push_str(&format!("\northogonal: {}", verdict(o.holds))),
                None => text.push_str("\northogonal: skipped (more than 8 summands)"),
            }
            let mut out = json!({ "hermitian": h, "small": s, "orthogonal": o });
            if let Some(t) = set {
                let v = is_orthogonal_set(&i.spec, &i.space, &t.vectors, &cfg).map_err(run_err)?;
                text.push_str(&format!("\nset orthogonal: {}", verdict(v.holds)));
                out["set_orthogonal"] = to_value(&v);
            }
            (out, text)
        }
        Command::Verify { only } => {
            let reports = run_all(&cfg, only.as_deref()).map_err(run_err)?;
            let passed = reports.iter().all(|r| r.passed);
            failed = !passed;
            let text = reports.iter().map(|r| r.summary_line()).collect::<Vec<_>>().join("\n");
            (json!({ "passed": passed, "criteria": reports }), text)
        }
        Command::Table { only } => {
            let reports = run_all(&cfg, only.as_deref()).map_err(run_err)?;
            (table_json(&reports), table_text(&reports))
        }
    };
    Ok(Report { command: command.name(), input, cfg, result, text, failed })
}

fn table_json(reports: &[CriterionReport]) -> Value {
    let rows: Vec<Value> = reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                json!({
                    "criterion": r.id,
                    "label": c.label,
                    "observed": c.observed,
                    "expected": c.expected,
                    "tolerance": c.tolerance,
                    "passed": c.passed,
                })
            })
        })
        .collect();
    json!({ "rows": rows })
}

fn table_text(reports: &[CriterionReport]) -> String {
    let mut rows = vec![["id".to_string(), "check".into(), "observed".into(), "expected".into(), "tol".into(), "ok".into()]];
    for r in reports {
        for c in &r.checks {
            rows.push([
                r.id.clone(),
                c.label.clone(),
                format!("{:.12}", c.observed),
                format!("{:.12}", c.expected),
                format!("{:e}", c.tolerance),
                if c.passed { "yes" } else { "NO" }.into(),
            ]);
        }
    }
    let widths: Vec<usize> = (0..6).map(|k| rows.iter().map(|r| r[k].chars().count()).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            r.iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (cell, w))| {
                    let pad = w - cell.chars().count();
                    if (2..5).contains(&k) { format!("{}{cell}", " ".repeat(pad)) } else { format!("{cell}{}", " ".repeat(pad)) }
                })
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}
