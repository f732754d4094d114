use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sweep::{K1Source, SweepResult, Timings, Verdict};
use super::{ExperimentConfig, LabError};

pub const CSV_HEADER: [&str; 9] = ["alpha", "epsilon", "j", "lambda", "residual", "gap_A", "gap_Ahat", "gap_S", "gap_D"];

#[derive(Serialize)]
struct Row {
    alpha: f64,
    epsilon: f64,
    j: usize,
    lambda: f64,
    residual: f64,
    gap_a: f64,
    gap_ahat: f64,
    gap_s: f64,
    gap_d: f64,
}

/// The gap table; only deterministic quantities enter it.
pub fn csv_bytes(result: &SweepResult) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for p in &result.points {
        for (j, (&lambda, g)) in p.spectrum.eigenvalues.iter().zip(&p.gaps).enumerate() {
            let row = Row {
                alpha: result.config.alpha,
                epsilon: p.epsilon,
                j: j + 1,
                lambda,
                residual: p.spectrum.residuals[j],
                gap_a: g[0],
                gap_ahat: g[1],
                gap_s: g[2],
                gap_d: g[3],
            };
            w.serialize(row).expect("in-memory write");
        }
    }
    w.into_inner().expect("in-memory flush")
}

/// Run record written next to the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub k1: f64,
    pub k1_source: K1Source,
    pub reference_eigenvalues: [Vec<f64>; 4],
    pub verdict: Verdict,
    pub verdict_label: String,
    pub warnings: Vec<String>,
    pub timings: Timings,
}

impl Manifest {
    pub fn new(result: &SweepResult) -> Self {
        let r = &result.references;
        Manifest {
            config: result.config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            k1: result.k1,
            k1_source: result.k1_source.clone(),
            reference_eigenvalues: [r.a.eigenvalues.clone(), r.ahat.eigenvalues.clone(), r.s.eigenvalues.clone(), r.d.eigenvalues.clone()],
            verdict: result.verdict.clone(),
            verdict_label: result.verdict.label(),
            warnings: result.warnings.clone(),
            timings: result.timings.clone(),
        }
    }
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `path` (CSV) and the manifest beside it with a `.json` extension.
/// Returns both paths.
pub fn emit_results(result: &SweepResult, path: &Path) -> Result<(PathBuf, PathBuf), LabError> {
    let io = |p: &Path| {
        let p = p.to_path_buf();
        move |source| LabError::Io { path: p, source }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, csv_bytes(result)).map_err(io(path))?;
    let mpath = manifest_path(path);
    let json = serde_json::to_string_pretty(&Manifest::new(result)).map_err(|e| LabError::Format { path: mpath.clone(), message: e.to_string() })?;
    fs::write(&mpath, json).map_err(io(&mpath))?;
    Ok((path.to_path_buf(), mpath))
}

pub fn read_manifest(path: &Path) -> Result<Manifest, LabError> {
    let text = fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| LabError::Format { path: path.to_path_buf(), message: e.to_string() })
}
