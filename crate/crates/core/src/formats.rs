//! File formats: scenario TOML, trade-off-curve CSV, plan CSV, and the JSON
//! run manifest written alongside every exported curve.
//!
//! The curve export rounds objectives to file precision, then re-filters for
//! dominance on the *rounded* values before writing. A reader of the file
//! sees exactly the parsed numbers, so the nondominance guarantee must hold
//! in file space, not just in memory; rounding two nearby points onto the
//! same grid must merge them rather than leave a duplicated or dominated row.

use crate::eval::{AllocationPlan, ObjectivePair};
use crate::front::{dominates, ParetoPoint, PointSource};
use crate::scenario::{RawScenario, Scenario, ValidationReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Parse { path: PathBuf, detail: String },
    #[error(transparent)]
    Validation(#[from] ValidationReport),
    #[error("{path}:{line}: {detail}")]
    Csv {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("front file is not a clean trade-off curve: {detail}")]
    FrontInvalid { detail: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Names accepted anywhere a scenario file path is expected.
pub const BUILTIN_NAMES: [&str; 3] = ["representative", "toy-linear", "toy-envlimited"];

/// A scenario bundled into the binary. `None` for unknown names.
pub fn builtin_scenario(name: &str) -> Option<Scenario> {
    let text = match name {
        "representative" => include_str!("../datasets/representative.toml"),
        "toy-linear" => include_str!("../datasets/toy-linear.toml"),
        "toy-envlimited" => include_str!("../datasets/toy-envlimited.toml"),
        _ => return None,
    };
    let raw: RawScenario = toml::from_str(text).expect("bundled dataset parses");
    Some(Scenario::validated(raw).expect("bundled dataset is valid"))
}

/// Load a scenario from a TOML file and validate it.
pub fn load_scenario(path: &Path) -> Result<Scenario, FormatError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let raw: RawScenario = toml::from_str(&text).map_err(|e| FormatError::Parse {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    Ok(Scenario::validated(raw)?)
}

/// Resolve a scenario argument: a bundled name first, a file path otherwise.
pub fn resolve_scenario(spec: &str) -> Result<Scenario, FormatError> {
    match builtin_scenario(spec) {
        Some(s) => Ok(s),
        None => load_scenario(Path::new(spec)),
    }
}

/// Write a scenario as TOML.
pub fn save_scenario(path: &Path, s: &Scenario) -> Result<(), FormatError> {
    let text = toml::to_string_pretty(&s.to_raw()).expect("scenario serializes");
    fs::write(path, text).map_err(io_err(path))
}

/// Hex SHA-256 of the scenario's canonical serialized form; stable across
/// load/save round trips.
pub fn scenario_digest(s: &Scenario) -> String {
    let canonical = toml::to_string(&s.to_raw()).expect("scenario serializes");
    let mut hex = String::with_capacity(64);
    for byte in Sha256::digest(canonical.as_bytes()) {
        write!(hex, "{byte:02x}").expect("writing to a string");
    }
    hex
}

/// Parameters recorded in a run manifest; unused fields stay absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Sidecar manifest for an exported curve: what produced it, from which
/// scenario, with which knobs. Two runs of the same command differ only in
/// `created_unix_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub method: String,
    pub scenario_digest: String,
    pub parameters: RunParameters,
    pub points_written: usize,
    pub created_unix_ms: u64,
}

impl RunManifest {
    pub fn new(method: &str, scenario_digest: String, parameters: RunParameters) -> Self {
        RunManifest {
            tool: "aquaplan".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            method: method.to_string(),
            scenario_digest,
            parameters,
            points_written: 0,
            created_unix_ms: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0),
        }
    }

    /// The manifest with its timestamp cleared, for content comparisons.
    pub fn without_timestamp(&self) -> RunManifest {
        RunManifest {
            created_unix_ms: 0,
            ..self.clone()
        }
    }
}

/// Sidecar path for a curve file: `<file>.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<PathBuf, FormatError> {
    let path = manifest_path(out);
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

pub fn read_manifest(out: &Path) -> Result<RunManifest, FormatError> {
    let path = manifest_path(out);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text).map_err(|e| FormatError::Parse {
        path,
        detail: e.to_string(),
    })
}

const FRONT_HEADER: &str = "net_benefit,efd,w1,source";

fn source_tag(source: PointSource) -> &'static str {
    match source {
        PointSource::Endpoint => "endpoint",
        PointSource::BenefitLed => "benefit-led",
        PointSource::FlowLed => "flow-led",
        PointSource::Evolutionary => "evolutionary",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExportSummary {
    /// Data rows written.
    pub written: usize,
    /// Points merged or dropped because rounding to file precision made them
    /// duplicates of (or dominated by) another row.
    pub merged_by_rounding: usize,
}

/// Write a trade-off curve as CSV, nondominated and sorted in file space.
pub fn export_front(path: &Path, points: &[ParetoPoint]) -> Result<ExportSummary, FormatError> {
    struct Row {
        nb: f64,
        efd: f64,
        line: String,
    }

    let mut rows: Vec<Row> = Vec::with_capacity(points.len());
    for p in points {
        let nb_text = format!("{:.8e}", p.objectives.net_benefit);
        let efd_text = format!("{:.8e}", p.objectives.efd);
        let nb: f64 = nb_text.parse().expect("formatted float parses");
        let efd: f64 = efd_text.parse().expect("formatted float parses");
        let w1 = p.weight.map(|w| w.w1.to_string()).unwrap_or_default();
        rows.push(Row {
            nb,
            efd,
            line: format!("{nb_text},{efd_text},{w1},{}", source_tag(p.source)),
        });
    }

    let mut kept: Vec<Row> = Vec::with_capacity(rows.len());
    'rows: for row in rows {
        for held in &kept {
            let duplicate = held.nb == row.nb && held.efd == row.efd;
            let covered = held.nb >= row.nb && held.efd <= row.efd;
            if duplicate || covered {
                continue 'rows;
            }
        }
        kept.retain(|held| !(row.nb >= held.nb && row.efd <= held.efd));
        kept.push(row);
    }
    kept.sort_by(|a, b| {
        a.nb
            .partial_cmp(&b.nb)
            .expect("finite objectives")
            .then(a.efd.partial_cmp(&b.efd).expect("finite objectives"))
    });

    let mut text = String::with_capacity(64 * (kept.len() + 1));
    text.push_str(FRONT_HEADER);
    text.push('\n');
    for row in &kept {
        text.push_str(&row.line);
        text.push('\n');
    }
    fs::write(path, text).map_err(io_err(path))?;
    Ok(ExportSummary {
        written: kept.len(),
        merged_by_rounding: points.len() - kept.len(),
    })
}

/// One parsed row of a curve file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub net_benefit: f64,
    pub efd: f64,
    pub w1: Option<f64>,
    pub source: String,
}

/// Parse a curve CSV, reporting the offending line on malformed input.
pub fn read_front_csv(path: &Path) -> Result<Vec<FrontRow>, FormatError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let csv_err = |line: usize, detail: String| FormatError::Csv {
        path: path.to_path_buf(),
        line,
        detail,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == FRONT_HEADER => {}
        Some((_, header)) => {
            return Err(csv_err(
                1,
                format!("expected header {FRONT_HEADER:?}, found {header:?}"),
            ))
        }
        None => return Err(csv_err(1, "empty file".to_string())),
    }

    let mut rows = Vec::new();
    for (index, line) in lines {
        let lineno = index + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(csv_err(
                lineno,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        }
        let net_benefit: f64 = fields[0]
            .parse()
            .map_err(|e| csv_err(lineno, format!("net_benefit: {e}")))?;
        let efd: f64 = fields[1]
            .parse()
            .map_err(|e| csv_err(lineno, format!("efd: {e}")))?;
        let w1 = if fields[2].is_empty() {
            None
        } else {
            Some(
                fields[2]
                    .parse()
                    .map_err(|e| csv_err(lineno, format!("w1: {e}")))?,
            )
        };
        if fields[3].is_empty() {
            return Err(csv_err(lineno, "source must not be empty".to_string()));
        }
        if !net_benefit.is_finite() || !efd.is_finite() {
            return Err(csv_err(lineno, "objectives must be finite".to_string()));
        }
        rows.push(FrontRow {
            net_benefit,
            efd,
            w1,
            source: fields[3].to_string(),
        });
    }
    Ok(rows)
}

/// Check a curve file from its contents alone: parseable, mutually
/// nondominated, and sorted so both objectives strictly increase.
/// Returns the number of data rows.
pub fn verify_front_file(path: &Path) -> Result<usize, FormatError> {
    let rows = read_front_csv(path)?;
    let pair = |r: &FrontRow| ObjectivePair {
        net_benefit: r.net_benefit,
        efd: r.efd,
    };
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let (a, b) = (pair(&rows[i]), pair(&rows[j]));
            if a == b {
                return Err(FormatError::FrontInvalid {
                    detail: format!("lines {} and {} are duplicates", i + 2, j + 2),
                });
            }
            if dominates(&a, &b) {
                return Err(FormatError::FrontInvalid {
                    detail: format!("line {} dominates line {}", i + 2, j + 2),
                });
            }
            if dominates(&b, &a) {
                return Err(FormatError::FrontInvalid {
                    detail: format!("line {} dominates line {}", j + 2, i + 2),
                });
            }
        }
    }
    for (i, w) in rows.windows(2).enumerate() {
        if w[1].net_benefit <= w[0].net_benefit {
            return Err(FormatError::FrontInvalid {
                detail: format!(
                    "net_benefit must strictly increase, but line {} does not",
                    i + 3
                ),
            });
        }
        if w[1].efd <= w[0].efd {
            return Err(FormatError::FrontInvalid {
                detail: format!("efd must strictly increase, but line {} does not", i + 3),
            });
        }
    }
    Ok(rows.len())
}

/// Write one plan as CSV: areas, monthly releases, then the two objective
/// scores. Values use exact shortest-round-trip formatting.
pub fn export_plan(
    path: &Path,
    s: &Scenario,
    plan: &AllocationPlan,
    objectives: &ObjectivePair,
) -> Result<(), FormatError> {
    let mut text = String::from("section,name,value\n");
    for (crop, area) in s.crops().iter().zip(&plan.area_per_crop) {
        writeln!(text, "area,{},{}", crop.name, area).expect("writing to a string");
    }
    for (m, flow) in plan.env_flow_per_month.iter().enumerate() {
        writeln!(text, "flow,m{:02},{}", m + 1, flow).expect("writing to a string");
    }
    writeln!(text, "objective,net_benefit,{}", objectives.net_benefit)
        .expect("writing to a string");
    writeln!(text, "objective,efd,{}", objectives.efd).expect("writing to a string");
    fs::write(path, text).map_err(io_err(path))
}
