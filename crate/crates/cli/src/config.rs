//! Resolved run configuration: defaults, then an optional JSON config file,
//! then command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: String,
    #[serde(rename = "S")]
    pub spline_counts: Vec<usize>,
    #[serde(rename = "C")]
    pub c: f64,
    /// Compressive constant; each command picks its own default when unset.
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub families: Vec<String>,
    pub temperatures: Vec<f64>,
    pub grid: String,
    pub block: String,
    pub weight: f64,
    pub threshold: f64,
    pub inputs: Vec<f64>,
    pub budgets: String,
    pub grid_n: usize,
    pub amplitude: f64,
    pub gain: f64,
    pub n_in: f64,
    pub n_ckt: f64,
    pub trials: Option<usize>,
    pub gain_sigmas: Vec<f64>,
    pub offset_sigma: f64,
    pub dataset: Option<String>,
    pub data_dir: Option<String>,
    pub split: String,
    pub subset: Option<usize>,
    pub jitter: f64,
    pub per_point: usize,
    pub topology: String,
    pub hidden: String,
    pub net: Option<String>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub momentum: f64,
    pub weight_clip: Option<f64>,
    pub mismatch_sigma: f64,
    pub oracle: bool,
    pub seed: u64,
    pub out: Option<String>,
    pub log: Option<String>,
    pub format: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: String::new(),
            spline_counts: vec![3],
            c: 1.0,
            k: None,
            families: ["rectifier", "wi", "si", "ekv"].map(String::from).to_vec(),
            temperatures: vec![25.0],
            grid: String::from("-4:4:201"),
            block: String::from("proto"),
            weight: 0.5,
            threshold: 0.0,
            inputs: vec![5.0, 4.0, 3.0, 2.0, 1.0],
            budgets: String::from("0:6:13"),
            grid_n: 101,
            amplitude: 1.0,
            gain: 1.0,
            n_in: 0.0,
            n_ckt: 0.1,
            trials: None,
            gain_sigmas: vec![0.01, 0.025, 0.05],
            offset_sigma: 0.0,
            dataset: None,
            data_dir: None,
            split: String::from("train"),
            subset: None,
            jitter: 0.0,
            per_point: 1,
            topology: String::from("2-4-1"),
            hidden: String::from("phi1"),
            net: None,
            epochs: 100,
            learning_rate: 0.05,
            batch_size: 16,
            momentum: 0.9,
            weight_clip: Some(0.9),
            mismatch_sigma: 0.0,
            oracle: false,
            seed: 0,
            out: None,
            log: None,
            format: String::from("csv"),
        }
    }
}

fn overlay(base: &mut Map<String, Value>, layer: Map<String, Value>, origin: &str) -> Result<(), CliError> {
    for (key, value) in layer {
        if !base.contains_key(&key) {
            return Err(CliError::Config(format!("{origin}: unknown key `{key}`")));
        }
        base.insert(key, value);
    }
    Ok(())
}

impl RunConfig {
    /// Merges `file` over the defaults and `flags` over both.
    pub fn resolve(command: &str, file: Option<Map<String, Value>>, flags: Map<String, Value>) -> Result<Self, CliError> {
        let Value::Object(mut merged) = serde_json::to_value(Self::default()).expect("config serializes") else {
            unreachable!("config is a struct");
        };
        if let Some(file) = file {
            overlay(&mut merged, file, "config file")?;
        }
        overlay(&mut merged, flags, "flags")?;
        merged.insert(String::from("command"), Value::String(command.to_owned()));
        let cfg: Self = serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.format.as_str(), "csv" | "json") {
            return Err(CliError::Usage(format!("unknown output format `{}`", self.format)));
        }
        if self.spline_counts.is_empty() {
            return Err(CliError::Usage(String::from("--S needs at least one value")));
        }
        Ok(())
    }

    /// Single-line JSON with a fixed field order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First spline count, for commands that take one.
    pub fn spline_count(&self) -> usize {
        self.spline_counts[0]
    }
}

/// Reads a JSON object from `path`.
pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Config(format!("{}: top level must be an object", path.display()))),
        Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
    }
}

/// Inclusive grid `lo:hi:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("grid `{s}` is not lo:hi:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let count: usize = count.trim().parse().map_err(|_| bad())?;
        if !lo.is_finite() || !hi.is_finite() || count == 0 || (count > 1 && hi <= lo) {
            return Err(bad());
        }
        Ok(Self { lo, hi, count })
    }

    pub fn points(&self) -> Vec<f64> {
        sac_core::analysis::linspace(self.lo, self.hi, self.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file = obj(json!({"C": 2.0, "seed": 4, "grid": "-1:1:3"}));
        let flags = obj(json!({"seed": 9}));
        let cfg = RunConfig::resolve("shape", Some(file), flags).unwrap();
        assert_eq!((cfg.c, cfg.seed, cfg.grid.as_str(), cfg.epochs), (2.0, 9, "-1:1:3", 100));
        assert_eq!(cfg.command, "shape");
    }

    #[test]
    fn unknown_and_mistyped_keys_are_config_errors() {
        let e = RunConfig::resolve("shape", Some(obj(json!({"bogus": 1}))), Map::new()).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        let e = RunConfig::resolve("shape", Some(obj(json!({"C": "one"}))), Map::new()).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
    }

    #[test]
    fn canonical_json_round_trips() {
        let cfg = RunConfig::resolve("snr", None, obj(json!({"trials": 1000}))).unwrap();
        let text = cfg.canonical_json();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical_json(), text);
        assert!(!text.contains('\n'));
    }

    #[test]
    fn grid_syntax() {
        let g = Grid::parse("-4:4:201").unwrap();
        assert_eq!((g.lo, g.hi, g.count), (-4.0, 4.0, 201));
        assert_eq!(Grid::parse("0:1:3").unwrap().points(), vec![0.0, 0.5, 1.0]);
        for bad in ["1:0:5", "0:1", "a:1:2", "0:1:0", "0:1:2:3"] {
            assert!(Grid::parse(bad).is_err(), "{bad}");
        }
    }
}
