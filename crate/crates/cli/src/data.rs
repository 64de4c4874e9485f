//! Dataset ids: the `xor` builtin, MNIST IDX directories and labeled CSV.

use std::path::{Path, PathBuf};

use sac_core::Dataset;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::idx::{load_mnist, Split};

/// Environment variable naming the MNIST directory when `--data-dir` is unset.
pub const MNIST_DIR_VAR: &str = "MNIST_DIR";

/// Rows of a CSV file whose last column is an integer label. Lines starting
/// with `#` are skipped, as is a first row that does not parse as numbers.
pub fn load_csv(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let (mut features, mut labels) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let fields: Vec<&str> = record.iter().collect();
        if fields.len() < 2 {
            return Err(CliError::Data(format!("{}: row {} needs features and a label", path.display(), i + 1)));
        }
        let (label, row) = fields.split_last().expect("at least two fields");
        let parsed: Result<Vec<f64>, _> = row.iter().map(|v| v.parse::<f64>()).collect();
        match (parsed, label.parse::<usize>()) {
            (Ok(row), Ok(label)) if row.iter().all(|v| v.is_finite()) => {
                features.push(row);
                labels.push(label);
            }
            _ if i == 0 => continue,
            _ => return Err(CliError::Data(format!("{}: row {} is not numeric with an integer label", path.display(), i + 1))),
        }
    }
    if features.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Dataset::from_rows(features, labels).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io { path: path.to_path_buf(), source },
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

pub fn mnist_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    cfg.data_dir
        .clone()
        .or_else(|| std::env::var(MNIST_DIR_VAR).ok())
        .map(PathBuf::from)
        .ok_or_else(|| CliError::Usage(format!("mnist needs --data-dir or {MNIST_DIR_VAR}")))
}

/// Resolves `cfg.dataset`, then applies jitter augmentation and subsetting.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let id = cfg.dataset.as_deref().ok_or_else(|| CliError::Usage(String::from("--dataset is required")))?;
    let base = match id {
        "xor" => Dataset::xor(cfg.c),
        "mnist" => {
            let split = match cfg.split.as_str() {
                "train" => Split::Train,
                "test" => Split::Test,
                other => return Err(CliError::Usage(format!("unknown split `{other}`"))),
            };
            load_mnist(&mnist_dir(cfg)?, split, cfg.c)?
        }
        path => load_csv(Path::new(path))?,
    };
    let data = if cfg.jitter > 0.0 || cfg.per_point > 1 {
        base.jittered(cfg.jitter, cfg.per_point.max(1), cfg.seed)?
    } else {
        base
    };
    Ok(match cfg.subset {
        Some(k) => data.subset(k, cfg.seed)?,
        None => data,
    })
}
