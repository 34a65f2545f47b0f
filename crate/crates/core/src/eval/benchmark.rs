use std::fs;
use std::path::{Path, PathBuf};

use crate::ir::{parse_dsl, validate, Scenario};
use crate::vision::{load_detections, DetectionError, DetectionSet};

pub const DESCRIPTION_FILE: &str = "description.txt";
pub const DETECTIONS_FILE: &str = "detections.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.scn.yaml";
pub const IMAGE_FILE: &str = "image.jpg";

/// One benchmark scenario, loaded from its directory.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    /// Directory name.
    pub id: String,
    pub description: String,
    pub detections_path: PathBuf,
    pub detections: DetectionSet,
    pub ground_truth: Scenario,
    pub image: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchmarkError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: description is empty")]
    EmptyDescription { path: PathBuf },
    #[error(transparent)]
    Detections(#[from] DetectionError),
    #[error("{path}: {message}")]
    GroundTruth { path: PathBuf, message: String },
    #[error("{path}: no benchmark records found")]
    Empty { path: PathBuf },
}

fn read(path: &Path) -> Result<String, BenchmarkError> {
    fs::read_to_string(path).map_err(|source| BenchmarkError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a record directory. Detections are kept at every confidence; the
/// pipeline configuration applies its own floor.
pub fn load_record(dir: &Path) -> Result<BenchmarkRecord, BenchmarkError> {
    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());

    let desc_path = dir.join(DESCRIPTION_FILE);
    let description = read(&desc_path)?;
    if description.trim().is_empty() {
        return Err(BenchmarkError::EmptyDescription { path: desc_path });
    }

    let detections_path = dir.join(DETECTIONS_FILE);
    let detections = load_detections(&detections_path, 0.0)?;

    let gt_path = dir.join(GROUND_TRUTH_FILE);
    let ground_truth = parse_dsl(&read(&gt_path)?).map_err(|e| BenchmarkError::GroundTruth {
        path: gt_path.clone(),
        message: e.to_string(),
    })?;
    let report = validate(&ground_truth);
    if !report.is_structurally_valid() {
        return Err(BenchmarkError::GroundTruth {
            path: gt_path,
            message: report
                .violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        });
    }

    let image = Some(dir.join(IMAGE_FILE)).filter(|p| p.is_file());
    Ok(BenchmarkRecord {
        id,
        description,
        detections_path,
        detections,
        ground_truth: ground_truth.canonicalized(),
        image,
    })
}

/// Loads every subdirectory of `root` as a record, in name order.
pub fn load_benchmark(root: &Path) -> Result<Vec<BenchmarkRecord>, BenchmarkError> {
    let entries = fs::read_dir(root).map_err(|source| BenchmarkError::Io {
        path: root.to_path_buf(),
        source,
    })?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| BenchmarkError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.is_dir() && path.join(DESCRIPTION_FILE).exists() {
            dirs.push(path);
        }
    }
    if dirs.is_empty() {
        return Err(BenchmarkError::Empty { path: root.to_path_buf() });
    }
    dirs.sort();
    dirs.iter().map(|d| load_record(d)).collect()
}
