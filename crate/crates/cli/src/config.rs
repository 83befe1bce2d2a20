//! Flat `key = value` run configuration with schema validation.
//!
//! The format is a plain text file of `key = value` lines (`#` comments).
//! Keys carry explicit units (`..._wavelengths`, `..._percent`) so a config
//! is auditable without reading code. Every run must name its experiment
//! and master seed; nothing is seeded from ambient entropy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: String,
    pub master_seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub grid_half_width: f64,
    pub grid_points: usize,
    /// Experiment-specific keys, already schema-checked.
    pub params: BTreeMap<String, String>,
}

pub const EXPERIMENTS: [&str; 9] = [
    "levy_paths",
    "levy_scaling",
    "superposition",
    "abs_measurement",
    "collapse_gaussianity",
    "wigner_cauchy",
    "chained_record",
    "anomalous_diffusion",
    "apertures",
];

/// Keys every experiment accepts.
const COMMON_KEYS: [&str; 6] = [
    "experiment",
    "master_seed",
    "workers",
    "output_dir",
    "grid_half_width_wavelengths",
    "grid_points",
];

/// Experiment-specific schema: (required, optional).
fn schema(experiment: &str) -> Option<(&'static [&'static str], &'static [&'static str])> {
    match experiment {
        "levy_paths" => Some((&["alphas", "steps", "horizon_time"], &["paths_per_alpha"])),
        "levy_scaling" => Some((
            &["alphas", "realizations"],
            &["rungs", "error_scale", "bootstrap_resamples"],
        )),
        "superposition" => Some((
            &["trials"],
            &["trap_length_wavelengths", "mirrors", "aperture_file"],
        )),
        "abs_measurement" => Some((
            &["detections"],
            &["initial_center_wavelengths", "initial_width_wavelengths"],
        )),
        "collapse_gaussianity" => Some((
            &["alpha", "measurements"],
            &["cumulant_ladder", "cumulant_replicates"],
        )),
        "wigner_cauchy" => Some((&[], &["sigma_phase_units", "x_stride"])),
        "chained_record" => Some((&["alpha", "jump_rate", "gamma", "horizon_time"], &[])),
        "anomalous_diffusion" => Some((
            &["efficiency_percent", "trajectories", "detections_per_trajectory"],
            &[
                "kernel",
                "aperture_file",
                "post_select",
                "trap_length_wavelengths",
                "initial_width_wavelengths",
                "burn_in",
            ],
        )),
        "apertures" => Some((&[], &[])),
        _ => None,
    }
}

fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "line {}: expected `key = value`, got {raw:?}",
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("duplicate key {key:?}")));
        }
    }
    Ok(map)
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_named(&text, path)
    }

    pub fn from_str_named(text: &str, origin: &Path) -> Result<Self> {
        let mut map = parse_kv(text)?;

        let experiment = map
            .remove("experiment")
            .ok_or_else(|| CliError::Config("missing key `experiment`".into()))?;
        let (required, optional) = schema(&experiment)
            .ok_or_else(|| {
                CliError::UnknownExperiment(format!(
                    "{experiment} (known: {})",
                    EXPERIMENTS.join(", ")
                ))
            })?;

        let master_seed = map
            .remove("master_seed")
            .ok_or_else(|| CliError::Config("missing key `master_seed` (seeds are explicit)".into()))?
            .parse::<u64>()
            .map_err(|e| CliError::Config(format!("master_seed: {e}")))?;

        // environment may override output directory and worker count only
        let workers = match std::env::var("LEVYSIM_WORKERS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|e| CliError::Config(format!("LEVYSIM_WORKERS: {e}")))?,
            Err(_) => map
                .remove("workers")
                .map(|v| v.parse::<usize>())
                .transpose()
                .map_err(|e| CliError::Config(format!("workers: {e}")))?
                .unwrap_or(1),
        };
        if workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        let output_dir = match std::env::var("LEVYSIM_OUTPUT_DIR") {
            Ok(v) => PathBuf::from(v),
            Err(_) => map
                .remove("output_dir")
                .map(PathBuf::from)
                .unwrap_or_else(|| {
                    let stem = origin
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_else(|| "run".into());
                    PathBuf::from(format!("runs/{stem}"))
                }),
        };

        let grid_half_width = map
            .remove("grid_half_width_wavelengths")
            .map(|v| v.parse::<f64>())
            .transpose()
            .map_err(|e| CliError::Config(format!("grid_half_width_wavelengths: {e}")))?
            .unwrap_or(256.0);
        let grid_points = map
            .remove("grid_points")
            .map(|v| v.parse::<usize>())
            .transpose()
            .map_err(|e| CliError::Config(format!("grid_points: {e}")))?
            .unwrap_or(1 << 14);
        if grid_half_width <= 0.0 || grid_points < 16 {
            return Err(CliError::Config(
                "grid_half_width_wavelengths must be positive and grid_points >= 16".into(),
            ));
        }

        for key in map.keys() {
            let known = required.contains(&key.as_str())
                || optional.contains(&key.as_str())
                || COMMON_KEYS.contains(&key.as_str());
            if !known {
                return Err(CliError::Config(format!(
                    "unknown key {key:?} for experiment {experiment:?}"
                )));
            }
        }
        for key in required {
            if !map.contains_key(*key) {
                return Err(CliError::Config(format!(
                    "experiment {experiment:?} requires key {key:?}"
                )));
            }
        }

        Ok(Self {
            experiment,
            master_seed,
            workers,
            output_dir,
            grid_half_width,
            grid_points,
            params: map,
        })
    }

    pub fn param_f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("{key}: {e}"))),
            None => Ok(default),
        }
    }

    pub fn param_usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.params.get(key) {
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("{key}: {e}"))),
            None => Ok(default),
        }
    }

    pub fn param_str(&self, key: &str, default: &str) -> String {
        self.params
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string())
    }

    pub fn param_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self
            .params
            .get(key)
            .ok_or_else(|| CliError::Config(format!("missing key {key:?}")))?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Config(format!("{key}: {e}")))
            })
            .collect()
    }

    pub fn param_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.params.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|e| CliError::Config(format!("{key}: {e}")))
                })
                .collect(),
        }
    }

    /// Resolved key-value view for the manifest.
    pub fn resolved(&self) -> BTreeMap<String, String> {
        let mut out = self.params.clone();
        out.insert("experiment".into(), self.experiment.clone());
        out.insert("master_seed".into(), self.master_seed.to_string());
        out.insert("workers".into(), self.workers.to_string());
        out.insert(
            "output_dir".into(),
            self.output_dir.to_string_lossy().into_owned(),
        );
        out.insert(
            "grid_half_width_wavelengths".into(),
            format!("{}", self.grid_half_width),
        );
        out.insert("grid_points".into(), self.grid_points.to_string());
        out
    }
}
