//! Campaigns: JSON configurations of checks, executed in parallel and merged
//! into a deterministic JSON report with optional CSV side tables.
//!
//! A report is reproducible from its config and seed. The only
//! nondeterministic field is `generated_at`, which is excluded from
//! `report_hash`.

mod families;
pub mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use families::{expand_family, Family};

use crate::displacement::{
    check_eigen_bound, check_lower_bound, find_functional_zero, growth_profile, projection_minorant_check,
    rotation_sweep, sharpness_witness, BoundKind, BoundReport, EstimatorConfig, GrowthRow, RotationRow, Verdict,
};
use crate::error::{Error, Result};
use crate::fields::{kakutani_fixed_point, FieldSpec, VectorField};
use crate::geometry::{BodySpec, ConvexBody};
use crate::linalg;
use crate::norms::{Norm, NormSpec};
use crate::vi::{solve, SolverConfig, VIProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign: String,
    pub seed: u64,
    /// Multiplier on the estimator start counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    pub items: Vec<ItemSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub check: CheckSpec,
}

fn default_radius_range() -> [f64; 2] {
    [1.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    Bound {
        kind: String,
        body: BodySpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
        field: FieldSpec,
    },
    /// Random nonvanishing fields on the unit ball, expanded into one
    /// `bound` item per member.
    BoundFamily {
        family: Family,
        kind: String,
        dims: Vec<usize>,
        count: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
        #[serde(default = "default_radius_range")]
        radius_range: [f64; 2],
    },
    Eigen {
        field: FieldSpec,
        mu: f64,
    },
    Sharpness {
        body: BodySpec,
        alpha: f64,
        eps: f64,
    },
    Vi {
        body: BodySpec,
        field: FieldSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    RotationSweep {
        alphas: usize,
    },
    GrowthProfile {
        phi: FieldSpec,
        psi: FieldSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
        radii: Vec<f64>,
    },
    ProjectionMinorant {
        phi: FieldSpec,
        #[serde(rename = "N")]
        n: usize,
        m: usize,
        samples: usize,
    },
    FunctionalZero {
        psi: FieldSpec,
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
    },
    Kakutani {
        #[serde(rename = "N")]
        n: usize,
    },
    NormConstants {
        norm: NormSpec,
        n: usize,
    },
}

enum Task {
    Bound {
        kind: BoundKind,
        body: ConvexBody,
        norm: Norm,
        field: VectorField,
    },
    Eigen {
        field: VectorField,
        mu: f64,
    },
    Sharpness {
        body: ConvexBody,
        alpha: f64,
        eps: f64,
    },
    Vi {
        body: ConvexBody,
        field: VectorField,
        tol: f64,
    },
    RotationSweep(usize),
    Growth {
        phi: VectorField,
        psi: VectorField,
        norm: Norm,
        radii: Vec<f64>,
    },
    Minorant {
        phi: VectorField,
        n: usize,
        m: usize,
        samples: usize,
    },
    FunctionalZero {
        psi: VectorField,
        a: Vec<Vec<f64>>,
    },
    Kakutani(usize),
    NormConstants {
        norm: Norm,
        n: usize,
    },
}

struct Resolved {
    id: String,
    check: &'static str,
    inputs: Value,
    task: Task,
}

/// One executed item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub index: usize,
    pub id: String,
    pub check: String,
    pub inputs: Value,
    pub status: ItemStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// `numerically_violated` on a field claimed nonvanishing, for a
    /// theorem bound (sharpness witnesses violate by design and never count).
    pub violated_nonvanishing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub items: usize,
    pub ok: usize,
    pub errors: usize,
    pub verdicts: BTreeMap<String, usize>,
    pub violated_nonvanishing: usize,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub campaign: String,
    pub seed: u64,
    pub budget: f64,
    pub version: String,
    pub config_hash: String,
    pub generated_at: String,
    pub aggregate: Aggregate,
    pub items: Vec<ItemReport>,
    pub report_hash: String,
}

/// Overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub budget: Option<f64>,
}

/// Parse a campaign config. Errors carry the line and column of the
/// offending JSON, or the line where the offending item starts.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let config: CampaignConfig = serde_json::from_str(text).map_err(|e| {
        let anchor = item_starts(text)
            .iter()
            .rposition(|&line| line <= e.line())
            .map(|i| format!(" (inside items[{i}])"))
            .unwrap_or_default();
        Error::Schema(format!("{}{anchor}", crate::error::json_location(&e)))
    })?;
    Ok(config)
}

/// Line numbers (1-based) at which each element of the top-level `items`
/// array begins.
fn item_starts(text: &str) -> Vec<usize> {
    let mut lines = Vec::new();
    let (mut depth, mut line) = (0usize, 1usize);
    let (mut in_string, mut escaped) = (false, false);
    let mut current_key = String::new();
    let mut last_key_at_depth1 = String::new();
    let mut items_array_depth: Option<usize> = None;
    for ch in text.chars() {
        if ch == '\n' {
            line += 1;
        }
        if in_string {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == '"' {
                in_string = false;
                if depth == 1 {
                    last_key_at_depth1 = current_key.clone();
                }
            } else {
                current_key.push(ch);
            }
            continue;
        }
        match ch {
            '"' => {
                in_string = true;
                current_key.clear();
            }
            '{' | '[' => {
                if ch == '{' && items_array_depth == Some(depth) {
                    lines.push(line);
                }
                depth += 1;
                if ch == '[' && depth == 2 && last_key_at_depth1 == "items" {
                    items_array_depth = Some(depth);
                }
            }
            '}' | ']' => {
                depth = depth.saturating_sub(1);
                if items_array_depth.is_some_and(|d| depth < d) {
                    items_array_depth = None;
                }
            }
            _ => {}
        }
    }
    lines
}

fn schema(index: usize, line: Option<usize>, e: impl std::fmt::Display) -> Error {
    match line {
        Some(l) => Error::Schema(format!("line {l}: items[{index}]: {e}")),
        None => Error::Schema(format!("items[{index}]: {e}")),
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("descriptor serialises")
}

fn norm_or_default(norm: &Option<NormSpec>) -> Result<Norm> {
    match norm {
        Some(spec) => Norm::from_spec(spec),
        None => Ok(Norm::Euclidean),
    }
}

fn resolve(config: &CampaignConfig, text: Option<&str>) -> Result<Vec<Resolved>> {
    let starts = text.map(item_starts).unwrap_or_default();
    let mut out = Vec::new();
    for (index, item) in config.items.iter().enumerate() {
        let line = starts.get(index).copied();
        let fail = |e: Error| schema(index, line, e);
        let base_id = item.id.clone().unwrap_or_else(|| format!("item{index:03}"));
        match &item.check {
            CheckSpec::Bound { kind, body, norm, field } => {
                let kind = BoundKind::parse(kind).map_err(fail)?;
                if kind == BoundKind::EigenThm42 {
                    return Err(fail(Error::Input("use the eigen check for thm42".into())));
                }
                out.push(Resolved {
                    id: base_id,
                    check: "bound",
                    inputs: json!({"kind": kind, "body": body, "norm": norm.clone().unwrap_or(NormSpec::Euclidean), "field": field}),
                    task: Task::Bound {
                        kind,
                        body: ConvexBody::from_spec(body).map_err(fail)?,
                        norm: norm_or_default(norm).map_err(fail)?,
                        field: VectorField::from_spec(field).map_err(fail)?,
                    },
                });
            }
            CheckSpec::BoundFamily {
                family,
                kind,
                dims,
                count,
                norm,
                radius_range,
            } => {
                let kind = BoundKind::parse(kind).map_err(fail)?;
                if kind == BoundKind::EigenThm42 {
                    return Err(fail(Error::Input("families do not support thm42".into())));
                }
                let members =
                    expand_family(*family, dims, *count, *radius_range, config.seed, index as u64).map_err(fail)?;
                let norm_spec = norm.clone().unwrap_or(NormSpec::Euclidean);
                for (k, spec) in members.into_iter().enumerate() {
                    let field = VectorField::from_spec(&spec).map_err(fail)?;
                    let body_spec = BodySpec::Ball {
                        center: vec![0.0; field.dimension()],
                        radius: 1.0,
                    };
                    out.push(Resolved {
                        id: format!("{base_id}-{k:03}"),
                        check: "bound",
                        inputs: json!({"kind": kind, "body": body_spec, "norm": norm_spec, "field": spec}),
                        task: Task::Bound {
                            kind,
                            body: ConvexBody::unit_ball(field.dimension()),
                            norm: Norm::from_spec(&norm_spec).map_err(fail)?,
                            field,
                        },
                    });
                }
            }
            CheckSpec::Eigen { field, mu } => out.push(Resolved {
                id: base_id,
                check: "eigen",
                inputs: json!({"field": field, "mu": mu}),
                task: Task::Eigen {
                    field: VectorField::from_spec(field).map_err(fail)?,
                    mu: *mu,
                },
            }),
            CheckSpec::Sharpness { body, alpha, eps } => out.push(Resolved {
                id: base_id,
                check: "sharpness",
                inputs: json!({"body": body, "alpha": alpha, "eps": eps}),
                task: Task::Sharpness {
                    body: ConvexBody::from_spec(body).map_err(fail)?,
                    alpha: *alpha,
                    eps: *eps,
                },
            }),
            CheckSpec::Vi { body, field, tol } => out.push(Resolved {
                id: base_id,
                check: "vi",
                inputs: json!({"body": body, "field": field, "tol": tol.unwrap_or(1e-8)}),
                task: Task::Vi {
                    body: ConvexBody::from_spec(body).map_err(fail)?,
                    field: VectorField::from_spec(field).map_err(fail)?,
                    tol: tol.unwrap_or(1e-8),
                },
            }),
            CheckSpec::RotationSweep { alphas } => {
                if *alphas == 0 {
                    return Err(fail(Error::Input("alphas must be ≥ 1".into())));
                }
                out.push(Resolved {
                    id: base_id,
                    check: "rotation_sweep",
                    inputs: json!({"alphas": alphas}),
                    task: Task::RotationSweep(*alphas),
                })
            }
            CheckSpec::GrowthProfile { phi, psi, norm, radii } => out.push(Resolved {
                id: base_id,
                check: "growth_profile",
                inputs: json!({"phi": phi, "psi": psi, "norm": norm.clone().unwrap_or(NormSpec::Euclidean), "radii": radii}),
                task: Task::Growth {
                    phi: VectorField::from_spec(phi).map_err(fail)?,
                    psi: VectorField::from_spec(psi).map_err(fail)?,
                    norm: norm_or_default(norm).map_err(fail)?,
                    radii: radii.clone(),
                },
            }),
            CheckSpec::ProjectionMinorant { phi, n, m, samples } => out.push(Resolved {
                id: base_id,
                check: "projection_minorant",
                inputs: json!({"phi": phi, "N": n, "m": m, "samples": samples}),
                task: Task::Minorant {
                    phi: VectorField::from_spec(phi).map_err(fail)?,
                    n: *n,
                    m: *m,
                    samples: *samples,
                },
            }),
            CheckSpec::FunctionalZero { psi, a } => out.push(Resolved {
                id: base_id,
                check: "functional_zero",
                inputs: json!({"psi": psi, "A": a}),
                task: Task::FunctionalZero {
                    psi: VectorField::from_spec(psi).map_err(fail)?,
                    a: a.clone(),
                },
            }),
            CheckSpec::Kakutani { n } => out.push(Resolved {
                id: base_id,
                check: "kakutani",
                inputs: json!({"N": n}),
                task: Task::Kakutani(*n),
            }),
            CheckSpec::NormConstants { norm, n } => out.push(Resolved {
                id: base_id,
                check: "norm_constants",
                inputs: json!({"norm": norm, "n": n}),
                task: Task::NormConstants {
                    norm: Norm::from_spec(norm).map_err(fail)?,
                    n: *n,
                },
            }),
        }
    }
    Ok(out)
}

struct Outcome {
    result: Value,
    violated_nonvanishing: bool,
}

fn plain(result: Value) -> Outcome {
    Outcome {
        result,
        violated_nonvanishing: false,
    }
}

/// A theorem bound that failed numerically on a field claimed nonvanishing.
fn counts_against(rep: &BoundReport) -> bool {
    rep.claimed_nonvanishing && rep.verdict == Verdict::NumericallyViolated
}

fn aggregate(items: &[ItemReport]) -> Aggregate {
    let mut verdicts = BTreeMap::new();
    for item in items {
        if let Some(v) = item_verdict(item) {
            *verdicts.entry(verdict_name(v)).or_insert(0) += 1;
        }
    }
    let violated = items.iter().filter(|i| i.violated_nonvanishing).count();
    let ok = items.iter().filter(|i| i.status == ItemStatus::Ok).count();
    Aggregate {
        items: items.len(),
        ok,
        errors: items.len() - ok,
        verdicts,
        violated_nonvanishing: violated,
        exit_code: if violated > 0 { 3 } else { 0 },
    }
}

fn execute(task: &Task, est: &EstimatorConfig, seed: u64) -> Result<Outcome> {
    match task {
        Task::Bound {
            kind,
            body,
            norm,
            field,
        } => {
            let rep = check_lower_bound(field, body, norm, *kind, est)?;
            Ok(Outcome {
                violated_nonvanishing: counts_against(&rep),
                result: to_value(&rep),
            })
        }
        Task::Eigen { field, mu } => {
            let rep = check_eigen_bound(field, *mu, est)?;
            Ok(Outcome {
                violated_nonvanishing: counts_against(&rep),
                result: to_value(&rep),
            })
        }
        Task::Sharpness { body, alpha, eps } => {
            let (field, rep) = sharpness_witness(body, *alpha, *eps, est)?;
            Ok(Outcome {
                violated_nonvanishing: false,
                result: json!({"field": field.to_spec()?, "report": rep}),
            })
        }
        Task::Vi { body, field, tol } => {
            let cfg = SolverConfig {
                tol: *tol,
                seed,
                ..SolverConfig::default()
            };
            let sol = solve(&VIProblem::new(body, field)?, &cfg)?;
            Ok(plain(to_value(&sol)))
        }
        Task::RotationSweep(count) => Ok(plain(json!({ "rows": rotation_sweep(*count, est)? }))),
        Task::Growth { phi, psi, norm, radii } => {
            let rows = growth_profile(phi, psi, norm, radii, est)?;
            Ok(plain(json!({ "rows": rows })))
        }
        Task::Minorant { phi, n, m, samples } => {
            Ok(plain(to_value(&projection_minorant_check(phi, *n, *m, *samples, seed)?)))
        }
        Task::FunctionalZero { psi, a } => {
            let z = find_functional_zero(psi, a, est)?;
            Ok(plain(to_value(&z)))
        }
        Task::Kakutani(n) => {
            let p = kakutani_fixed_point(*n)?;
            let fp = VectorField::kakutani(*n)?.eval(&p)?;
            Ok(plain(json!({"point": p, "residual": linalg::dist(&fp, &p)})))
        }
        Task::NormConstants { norm, n } => {
            let c = norm.equivalence_constants(*n)?;
            Ok(plain(json!({"constants": c, "nu": c.nu()})))
        }
    }
}

fn verdict_name(v: Verdict) -> String {
    match to_value(&v) {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Canonical SHA-256 of a JSON value (object keys sorted).
pub fn json_hash(v: &Value) -> String {
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

/// Hash of a report with `generated_at` and `report_hash` removed.
pub fn compute_report_hash(report: &CampaignReport) -> String {
    let mut v = to_value(report);
    if let Value::Object(map) = &mut v {
        map.remove("generated_at");
        map.remove("report_hash");
    }
    json_hash(&v)
}

/// Run a parsed campaign. `source` is the raw config text, used only to
/// anchor schema errors to lines.
pub fn run_config(config: &CampaignConfig, source: Option<&str>, opts: &RunOptions) -> Result<CampaignReport> {
    let seed = opts.seed.unwrap_or(config.seed);
    let budget = opts.budget.or(config.budget).unwrap_or(1.0);
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Schema(format!("budget must be positive, got {budget}")));
    }
    let mut effective = config.clone();
    effective.seed = seed;
    effective.budget = Some(budget);
    let resolved = resolve(&effective, source)?;
    let est = EstimatorConfig {
        seed,
        budget,
        ..EstimatorConfig::default()
    };

    let items: Vec<ItemReport> = resolved
        .par_iter()
        .enumerate()
        .map(|(index, r)| {
            let (status, result, error, violated) = match execute(&r.task, &est, seed) {
                Ok(o) => (ItemStatus::Ok, Some(o.result), None, o.violated_nonvanishing),
                Err(e) => {
                    let mut msg = e.to_string();
                    if let Error::Numeric { best, .. } = &e {
                        msg = format!("{msg}; best iterate {best:?}");
                    }
                    (ItemStatus::Error, None, Some(msg), false)
                }
            };
            ItemReport {
                index,
                id: r.id.clone(),
                check: r.check.to_string(),
                inputs: r.inputs.clone(),
                status,
                result,
                error,
                violated_nonvanishing: violated,
            }
        })
        .collect();

    let aggregate = aggregate(&items);
    let mut report = CampaignReport {
        campaign: config.campaign.clone(),
        seed,
        budget,
        version: crate::VERSION.to_string(),
        config_hash: json_hash(&to_value(&effective)),
        generated_at: timestamp(),
        aggregate,
        items,
        report_hash: String::new(),
    };
    report.report_hash = compute_report_hash(&report);
    Ok(report)
}

/// The verdict recorded in an item's result, if it has one.
pub fn item_verdict(item: &ItemReport) -> Option<Verdict> {
    let result = item.result.as_ref()?;
    let v = result.get("verdict").or_else(|| result.get("report")?.get("verdict"))?;
    serde_json::from_value(v.clone()).ok()
}

pub fn run_campaign_str(text: &str, opts: &RunOptions) -> Result<CampaignReport> {
    let config = parse_config(text)?;
    run_config(&config, Some(text), opts)
}

/// Files written by [`run_campaign`].
#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub report: CampaignReport,
    pub report_path: PathBuf,
    pub csv_paths: Vec<PathBuf>,
}

/// Run the campaign in `config_path` and write the report to `out` (default:
/// `<campaign>.report.json` next to the config). Sweep and profile tables go
/// to CSV files beside the report.
pub fn run_campaign(config_path: &Path, out: Option<&Path>, opts: &RunOptions) -> Result<CampaignOutput> {
    let text = std::fs::read_to_string(config_path)?;
    let report = run_campaign_str(&text, opts)?;
    let report_path = match out {
        Some(p) => p.to_path_buf(),
        None => config_path.with_file_name(format!("{}.report.json", report.campaign)),
    };
    write_report(report, &report_path)
}

pub fn write_report(report: CampaignReport, report_path: &Path) -> Result<CampaignOutput> {
    if let Some(dir) = report_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(report_path, serde_json::to_string_pretty(&report)? + "\n")?;
    let csv_paths = write_side_tables(&report, report_path)?;
    Ok(CampaignOutput {
        report,
        report_path: report_path.to_path_buf(),
        csv_paths,
    })
}

fn side_table_path(report_path: &Path, id: &str, suffix: &str) -> PathBuf {
    let stem = report_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    let safe: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    report_path.with_file_name(format!("{stem}.{safe}.{suffix}.csv"))
}

fn write_side_tables(report: &CampaignReport, report_path: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for item in &report.items {
        let Some(rows) = item.result.as_ref().and_then(|r| r.get("rows")) else {
            continue;
        };
        match item.check.as_str() {
            "rotation_sweep" => {
                let rows: Vec<RotationRow> = serde_json::from_value(rows.clone())?;
                let path = side_table_path(report_path, &item.id, "rotation");
                write_rotation_csv(&rows, &path)?;
                paths.push(path);
            }
            "growth_profile" => {
                let rows: Vec<GrowthRow> = serde_json::from_value(rows.clone())?;
                let path = side_table_path(report_path, &item.id, "growth");
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(["r", "sup"])?;
                for row in &rows {
                    w.write_record([row.r.to_string(), row.sup.to_string()])?;
                }
                w.flush()?;
                paths.push(path);
            }
            _ => {}
        }
    }
    Ok(paths)
}

/// Write a rotation curve with columns `alpha,d_estimate,d_closed_form,gamma,slack`.
pub fn write_rotation_csv(rows: &[RotationRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rotation_csv(path: &Path) -> Result<Vec<RotationRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Theorem presets `q1` … `q6`. A file `<id>.json` in the directory named by
/// `HSDL_PRESET_DIR` takes precedence over the copy shipped with the crate.
pub fn preset(id: &str) -> Result<String> {
    if let Some(dir) = std::env::var_os("HSDL_PRESET_DIR") {
        let path = Path::new(&dir).join(format!("{id}.json"));
        if path.is_file() {
            return Ok(std::fs::read_to_string(path)?);
        }
    }
    Ok(match id {
        "q1" => include_str!("../../presets/q1.json"),
        "q2" => include_str!("../../presets/q2.json"),
        "q3" => include_str!("../../presets/q3.json"),
        "q4" => include_str!("../../presets/q4.json"),
        "q5" => include_str!("../../presets/q5.json"),
        "q6" => include_str!("../../presets/q6.json"),
        other => return Err(Error::Input(format!("unknown preset {other:?} (expected q1..q6)"))),
    }
    .to_string())
}

pub const PRESET_IDS: [&str; 6] = ["q1", "q2", "q3", "q4", "q5", "q6"];

/// UTC time as RFC 3339, honouring `SOURCE_DATE_EPOCH`.
fn timestamp() -> String {
    let secs = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs() as i64)
                .unwrap_or(0)
        });
    let days = secs.div_euclid(86_400);
    let rem = secs.rem_euclid(86_400);
    // civil-from-days (Howard Hinnant)
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        rem % 3600 / 60,
        rem % 60
    )
}
