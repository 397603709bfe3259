//! File formats.
//!
//! JSON documents are wrapped in an envelope
//! `{"schema": "phasestep", "version": 1, "kind": …, "data": …}`; a reader
//! rejects any other schema name, version or kind with
//! [`LabError::SchemaMismatch`]. Tables are CSV with the fixed header
//! [`CSV_HEADER`]; an empty `E` cell means no reference time was available.
//! Plot series are two-column CSV files. Every file is written atomically.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use phasestep_core::bench::{BenchmarkResult, Diagnostics, Problem};
use phasestep_core::radial::RadialConstants;
use phasestep_core::{Reaction, SchemeId};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub const SCHEMA_NAME: &str = "phasestep";
pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: [&str; 8] = ["scheme", "eps", "sigma", "n", "M", "CG", "T", "E"];
/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "PHASESTEP_OUT";
const FALLBACK_OUT_DIR: &str = "phasestep-out";

/// `$PHASESTEP_OUT`, else `./phasestep-out`.
pub fn default_output_dir() -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(FALLBACK_OUT_DIR),
    }
}

/// A JSON document type with its envelope `kind`.
pub trait Document: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

/// One table cell in the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scheme: SchemeId,
    pub eps: f64,
    pub sigma: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "CG")]
    pub cg: usize,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "E")]
    pub e: Option<f64>,
}

impl From<&BenchmarkResult> for TableRow {
    fn from(r: &BenchmarkResult) -> Self {
        Self {
            scheme: r.spec.scheme,
            eps: r.spec.epsilon,
            sigma: r.spec.sigma,
            n: r.spec.n,
            m: r.steps,
            cg: r.cg_total,
            t: r.t_bench,
            e: r.error,
        }
    }
}

/// A full benchmark run with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub result: BenchmarkResult,
    pub diagnostics: Diagnostics,
}

impl Document for RunDocument {
    const KIND: &'static str = "run";
}

/// Least-squares exponent of `M` against `eps` or `sigma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub scheme: SchemeId,
    /// `"eps"` or `"sigma"`.
    pub axis: String,
    /// Value of the other parameter, held fixed.
    pub fixed: f64,
    pub exponent: f64,
    pub points: usize,
}

/// A failed sweep cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub scheme: SchemeId,
    pub eps: f64,
    pub sigma: f64,
    pub message: String,
}

/// Sweep output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableDocument {
    pub problem: Problem,
    pub reaction: Reaction,
    pub rows: Vec<TableRow>,
    pub failures: Vec<CellFailure>,
    pub fits: Vec<Fit>,
    /// Reference benchmark time per `eps`, when computed.
    pub references: Vec<(f64, f64)>,
}

impl Document for TableDocument {
    const KIND: &'static str = "table";
}

/// Output of the `radial` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDocument {
    pub reaction: Reaction,
    pub constants: Option<RadialConstants>,
    /// Balance parameter, also when it is not below 1.
    pub gamma: f64,
    pub profile_residual: f64,
    pub epsilon: f64,
    pub be_step: f64,
    pub be_radii: Vec<f64>,
    pub eyre_radii: Vec<f64>,
}

impl Document for RadialDocument {
    const KIND: &'static str = "radial";
}

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    schema: &'a str,
    version: u32,
    kind: &'a str,
    data: &'a T,
}

#[derive(Deserialize)]
struct EnvelopeIn {
    schema: String,
    version: u32,
    kind: String,
    data: serde_json::Value,
}

pub fn to_json<T: Document>(doc: &T) -> LabResult<String> {
    let env = EnvelopeOut { schema: SCHEMA_NAME, version: SCHEMA_VERSION, kind: T::KIND, data: doc };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: Document>(text: &str) -> LabResult<T> {
    let env: EnvelopeIn = serde_json::from_str(text)?;
    let expected = format!("{SCHEMA_NAME} v{SCHEMA_VERSION} {}", T::KIND);
    let found = format!("{} v{} {}", env.schema, env.version, env.kind);
    if env.schema != SCHEMA_NAME || env.version != SCHEMA_VERSION || env.kind != T::KIND {
        return Err(LabError::SchemaMismatch { expected, found });
    }
    Ok(serde_json::from_value(env.data)?)
}

/// The envelope `kind` of a JSON document.
pub fn document_kind(text: &str) -> LabResult<String> {
    Ok(serde_json::from_str::<EnvelopeIn>(text)?.kind)
}

pub fn table_to_csv(rows: &[TableRow]) -> LabResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::Invalid(e.to_string()))
}

pub fn table_from_csv(text: &str) -> LabResult<Vec<TableRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(LabError::SchemaMismatch {
            expected: CSV_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    r.deserialize().map(|row| row.map_err(LabError::from)).collect()
}

/// Two-column CSV series.
pub fn series_csv(columns: (&str, &str), points: &[(f64, f64)]) -> String {
    let mut s = format!("{},{}\n", columns.0, columns.1);
    for (a, b) in points {
        s.push_str(&format!("{a},{b}\n"));
    }
    s
}

/// Writes through a temporary sibling file and a rename, so readers never
/// see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> LabResult<()> {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| LabError::io(&dir, e))?;
    let name = path.file_name().ok_or_else(|| LabError::Invalid(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}-{}",
        name.to_string_lossy(),
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(LabError::io(path, e));
    }
    Ok(())
}

pub fn read_to_string(path: &Path) -> LabResult<String> {
    fs::read_to_string(path).map_err(|e| LabError::io(path, e))
}

pub fn write_document<T: Document>(path: &Path, doc: &T) -> LabResult<()> {
    write_atomic(path, to_json(doc)?.as_bytes())
}

pub fn read_document<T: Document>(path: &Path) -> LabResult<T> {
    from_json(&read_to_string(path)?)
}
