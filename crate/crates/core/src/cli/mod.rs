//! Experiment runner behind the `cbnorm-lab` binary.
//!
//! A config names a command, a seed and command-specific `params`. Running
//! it produces a [`ResultRecord`] whose fields, apart from `runtime_ms`,
//! depend only on the config.

pub mod descriptor;
mod report;

use std::time::Instant;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cbnorm::{algebra_check, cb_lower_bound, cb_upper_bound, question_probe, schwarz_check, CbEstimate, SANDWICH_TOL};
use crate::error::{Error, Result};
use crate::gcb::{delta_isometry_check, gcb_lower_bound, gcb_upper_bound, FunctionDictionary};
use crate::matcore::RngSeed;
use crate::mconvex::{check_certificate, find_certificate, hull_norm_check};
use crate::opspace::sample_space_ball;
use descriptor::{point_from_desc, point_to_desc, set_from_desc, FunctionDesc, GcbElementDesc, MatrixDesc, PointDesc, SpaceDesc};
pub use report::{report, ReportOutput, REPORT_HEADER};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit statuses of the binary.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PROPERTY: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Estimate,
    Sandwich,
    Schwarz,
    Algebra,
    Probe,
    Hull,
    Separate,
    Gcb,
    DeltaIsometry,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Estimate => "estimate",
            Command::Sandwich => "sandwich",
            Command::Schwarz => "schwarz",
            Command::Algebra => "algebra",
            Command::Probe => "probe",
            Command::Hull => "hull",
            Command::Separate => "separate",
            Command::Gcb => "gcb",
            Command::DeltaIsometry => "delta-isometry",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    pub params: Value,
}

impl ExperimentConfig {
    /// Parses a config, reporting the JSON path of the first schema violation.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::InvalidInput(format!("config at `{}`: {}", e.path(), e.inner())))
    }
}

fn params<P: DeserializeOwned>(v: &Value) -> Result<P> {
    serde_path_to_error::deserialize(v).map_err(|e| Error::InvalidInput(format!("config at `params.{}`: {}", e.path(), e.inner())))
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct WitnessRecord {
    pub label: String,
    pub level: usize,
    pub value: Option<f64>,
    pub point: PointDesc,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: Command,
    pub config: Value,
    /// False when a property check inside the run failed.
    pub passed: bool,
    pub outputs: Value,
    pub witnesses: Vec<WitnessRecord>,
    pub runtime_ms: u64,
}

impl ResultRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    /// The record with `runtime_ms` zeroed, for determinism comparisons.
    pub fn canonical(&self) -> String {
        ResultRecord { runtime_ms: 0, ..self.clone() }.to_json()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_PROPERTY
        }
    }
}

/// Exit status for an error raised before a record could be produced.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => EXIT_PROPERTY,
        _ => EXIT_INPUT,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionParams {
    function: FunctionDesc,
    max_level: usize,
    budget: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchwarzParams {
    function: FunctionDesc,
    /// Defaults to the certified upper bound.
    #[serde(default)]
    upper: Option<f64>,
    max_level: usize,
    trials: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraParams {
    f: FunctionDesc,
    g: FunctionDesc,
    max_level: usize,
    budget: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeParams {
    function: FunctionDesc,
    schedule: Vec<usize>,
    budget: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HullParams {
    space: SpaceDesc,
    generators: Vec<PointDesc>,
    trials: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparateParams {
    space: SpaceDesc,
    generators: Vec<PointDesc>,
    target: PointDesc,
    budget: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GcbParams {
    space: SpaceDesc,
    element: GcbElementDesc,
    budget: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaParams {
    spaces: Vec<SpaceDesc>,
    points_per_space: usize,
    max_level: usize,
    budget: usize,
}

struct Outcome {
    passed: bool,
    outputs: Value,
    witnesses: Vec<WitnessRecord>,
}

fn estimate_outputs(label: &str, est: &CbEstimate<f64>) -> (Value, Vec<WitnessRecord>) {
    let table: Vec<Value> = est
        .level_table
        .iter()
        .map(|e| json!({"level": e.level, "value": e.witness.value, "samples": e.samples, "lifted": e.lifted}))
        .collect();
    let witnesses = est
        .level_table
        .iter()
        .filter(|e| !e.lifted)
        .map(|e| WitnessRecord {
            label: format!("level {}", e.level),
            level: e.level,
            value: Some(e.witness.value),
            point: point_to_desc(&e.witness.matrix),
        })
        .collect();
    let outputs = json!({
        "function": label,
        "lower": est.lower,
        "upper": est.upper,
        "gap": est.gap(),
        "budget": est.budget,
        "level_table": table,
        "provenance": est.provenance,
    });
    (outputs, witnesses)
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("reports serialize")
}

fn dispatch(cfg: &ExperimentConfig) -> Result<Outcome> {
    let seed = RngSeed(cfg.seed);
    let none = Vec::new;
    Ok(match cfg.command {
        Command::Estimate | Command::Sandwich => {
            let p: FunctionParams = params(&cfg.params)?;
            let f = p.function.build()?;
            let mut est = cb_lower_bound(&f, p.max_level, p.budget, seed)?;
            let mut passed = true;
            if cfg.command == Command::Sandwich {
                let up = cb_upper_bound(&f);
                est.upper = up.value;
                est.provenance.push(format!("upper: {}", up.rules.join(", ")));
                passed = up.value.is_none_or(|u| est.lower <= u + SANDWICH_TOL);
            }
            let (outputs, witnesses) = estimate_outputs(&f.label(), &est);
            Outcome { passed, outputs, witnesses }
        }
        Command::Schwarz => {
            let p: SchwarzParams = params(&cfg.params)?;
            let f = p.function.build()?;
            let upper = match p.upper {
                Some(u) => u,
                None => cb_upper_bound(&f)
                    .value
                    .ok_or_else(|| Error::Config(format!("{} has no certified upper bound; set params.upper", f.label())))?,
            };
            let r = schwarz_check(&f, upper, p.max_level, p.trials, seed)?;
            let mut outputs = to_value(&r);
            outputs["function"] = json!(f.label());
            outputs["verdict"] = json!(if r.passed() { "pass" } else { "fail" });
            Outcome { passed: r.passed(), outputs, witnesses: none() }
        }
        Command::Algebra => {
            let p: AlgebraParams = params(&cfg.params)?;
            let (f, g) = (p.f.build()?, p.g.build()?);
            let r = algebra_check(&f, &g, p.max_level, p.budget, seed)?;
            let mut outputs = to_value(&r);
            outputs["function"] = json!(format!("({})*({})", f.label(), g.label()));
            Outcome { passed: r.passed(), outputs, witnesses: none() }
        }
        Command::Probe => {
            let p: ProbeParams = params(&cfg.params)?;
            let f = p.function.build()?;
            let r = question_probe(&f, &p.schedule, p.budget, seed)?;
            let mut outputs = to_value(&r);
            outputs["function"] = json!(f.label());
            Outcome { passed: true, outputs, witnesses: none() }
        }
        Command::Hull => {
            let p: HullParams = params(&cfg.params)?;
            let space = p.space.build()?;
            let set = set_from_desc(&space, &p.generators)?;
            let r = hull_norm_check(&set, p.trials, seed)?;
            Outcome { passed: r.passed(), outputs: to_value(&r), witnesses: none() }
        }
        Command::Separate => {
            let p: SeparateParams = params(&cfg.params)?;
            let space = p.space.build()?;
            let set = set_from_desc(&space, &p.generators)?;
            let x0 = point_from_desc(&space, &p.target)?;
            let found = find_certificate(&set, &x0, p.budget, seed)?;
            let (passed, outputs) = match found {
                Some(cert) => {
                    let v = check_certificate(&cert, &set, &x0)?;
                    let coeffs: Vec<MatrixDesc> = cert.coeffs().iter().map(descriptor::matrix_to_desc).collect();
                    (v.valid, json!({"found": true, "certificate": coeffs, "verdict": to_value(&v)}))
                }
                None => (true, json!({"found": false, "certificate": null, "verdict": null})),
            };
            Outcome { passed, outputs, witnesses: none() }
        }
        Command::Gcb => {
            let p: GcbParams = params(&cfg.params)?;
            let space = p.space.build()?;
            let u = p.element.build(&space)?;
            let dict = FunctionDictionary::standard(&space)?;
            let up = gcb_upper_bound(&u, p.budget, seed)?;
            let lo = gcb_lower_bound(&u, &dict)?;
            let passed = lo.value <= up.value + crate::gcb::DELTA_UPPER_TOL;
            let outputs = json!({
                "function": "gcb",
                "upper": up.value,
                "lower": lo.value,
                "gap": up.value - lo.value,
                "grouping": up.grouping,
                "scales": up.scales,
                "evaluations": up.evaluations,
                "best_entry": lo.best_entry.map(|i| dict.entries[i].label()),
            });
            Outcome { passed, outputs, witnesses: none() }
        }
        Command::DeltaIsometry => {
            let p: DeltaParams = params(&cfg.params)?;
            if p.max_level == 0 {
                return Err(Error::InvalidInput("params.max_level must be at least 1".into()));
            }
            let mut rows = Vec::new();
            let mut witnesses = Vec::new();
            let mut passed = true;
            let (mut max_up, mut max_lo) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (si, sd) in p.spaces.iter().enumerate() {
                let space = sd.build()?;
                for i in 0..p.points_per_space {
                    let s = seed.derive((si * p.points_per_space + i) as u64);
                    let mut rng = s.rng();
                    let level = rng.random_range(1..=p.max_level);
                    let radius = rng.random_range(0.05..0.95);
                    let x = sample_space_ball(&mut rng, &space, level, radius)?;
                    let r = delta_isometry_check(&x, p.budget, s)?;
                    passed &= r.passed();
                    max_up = max_up.max(r.upper_gap);
                    max_lo = max_lo.max(r.lower_gap);
                    let mut row = to_value(&r);
                    row["space"] = to_value(sd);
                    row["level"] = json!(level);
                    rows.push(row);
                    witnesses.push(WitnessRecord {
                        label: format!("point {si}.{i}"),
                        level,
                        value: Some(r.norm),
                        point: point_to_desc(&x),
                    });
                }
            }
            let outputs = json!({"points": rows, "max_upper_gap": max_up, "max_lower_gap": max_lo});
            Outcome { passed, outputs, witnesses }
        }
    })
}

/// Runs a config and assembles its record.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let start = Instant::now();
    let outcome = dispatch(cfg)?;
    Ok(ResultRecord {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        command: cfg.command,
        config: to_value(cfg),
        passed: outcome.passed,
        outputs: outcome.outputs,
        witnesses: outcome.witnesses,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}
