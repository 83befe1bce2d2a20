//! Experiment dispatch, artifact writing, and the run manifest.
//!
//! Every run writes per-record CSVs plus `summary.json`, then seals the
//! directory with `manifest.json` (resolved config, tool version,
//! timestamps, per-output checksums). Results are valid only once the
//! manifest exists. Summary and CSV bytes depend only on `(config,
//! master_seed)` — never on worker count or scheduling.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Value};

use levysim_core::density::GridDensity;
use levysim_core::experiments::{
    beta_estimator, chained_measurement_record, collapse_to_gaussian, cumulant_accumulation,
    diffusion_trajectory, levy_collapse_scaling, prepare_superposition, AbsPositionMeasurement,
    DiffusionConfig, DiffusionKernel, MeanFeed, PostSelectPolicy, ScalingConfig,
    SuperpositionConfig,
};
use levysim_core::grid::Grid;
use levysim_core::io::CsvTable;
use levysim_core::levy::{stable_path, PathConfig, StableParams, SubordinatedConfig};
use levysim_core::optics::{
    capture_fraction, collapse_kernel, preset, PHASE_SPACE_UNIT, PRESET_NAMES,
};
use levysim_core::rng::stream_rng;
use levysim_core::state::{wigner, HarmonicTrap, WaveFunction};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub struct RunOutput {
    pub summary: Value,
    pub tables: Vec<(String, CsvTable)>,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Execute the configured experiment and seal the output directory.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let started = unix_now();
    std::fs::create_dir_all(&cfg.output_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let output = dispatch(cfg, &pool)?;

    let mut checksums = BTreeMap::new();
    for (name, table) in &output.tables {
        let mut bytes = Vec::new();
        table
            .write_to(&mut bytes)
            .map_err(CliError::Core)?;
        std::fs::write(cfg.output_dir.join(name), &bytes)?;
        checksums.insert(name.clone(), format!("{:016x}", fnv1a64(&bytes)));
    }
    let summary_bytes = serde_json::to_vec_pretty(&output.summary)
        .map_err(|e| CliError::Config(format!("summary: {e}")))?;
    std::fs::write(cfg.output_dir.join("summary.json"), &summary_bytes)?;
    checksums.insert(
        "summary.json".into(),
        format!("{:016x}", fnv1a64(&summary_bytes)),
    );

    let manifest = json!({
        "tool": "levysim",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": cfg.resolved(),
        "start_unix": started,
        "end_unix": unix_now(),
        "outputs": checksums,
    });
    std::fs::write(
        cfg.output_dir.join("manifest.json"),
        serde_json::to_vec_pretty(&manifest)
            .map_err(|e| CliError::Config(format!("manifest: {e}")))?,
    )?;
    Ok(())
}

fn dispatch(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    match cfg.experiment.as_str() {
        "levy_paths" => levy_paths(cfg),
        "levy_scaling" => levy_scaling(cfg, pool),
        "superposition" => superposition(cfg),
        "abs_measurement" => abs_measurement(cfg),
        "collapse_gaussianity" => collapse_gaussianity(cfg),
        "wigner_cauchy" => wigner_cauchy(cfg),
        "chained_record" => chained_record(cfg),
        "anomalous_diffusion" => anomalous_diffusion(cfg, pool),
        "apertures" => apertures(cfg),
        other => Err(CliError::UnknownExperiment(other.to_string())),
    }
}

fn grid_of(cfg: &RunConfig) -> Result<Grid<f64>> {
    Grid::symmetric(cfg.grid_half_width, cfg.grid_points).map_err(CliError::Core)
}

fn alpha_tag(alpha: f64) -> String {
    format!("{alpha:.3}").replace('.', "p")
}

fn levy_paths(cfg: &RunConfig) -> Result<RunOutput> {
    let alphas = cfg.param_f64_list("alphas")?;
    let steps = cfg.param_usize("steps", 1024)?;
    let horizon = cfg.param_f64("horizon_time", 1.0)?;
    let per_alpha = cfg.param_usize("paths_per_alpha", 2)?;
    let mut tables = Vec::new();
    for (ai, &alpha) in alphas.iter().enumerate() {
        let params = StableParams::standard(alpha).map_err(CliError::Core)?;
        for p in 0..per_alpha {
            let seed = cfg
                .master_seed
                .wrapping_add(1_000_003u64.wrapping_mul(ai as u64))
                .wrapping_add(p as u64);
            let path = stable_path(
                &params,
                &PathConfig {
                    horizon,
                    steps,
                    seed,
                },
            )
            .map_err(CliError::Core)?;
            let mut t = CsvTable::new(&["t", "value"])
                .with_meta("alpha", alpha)
                .with_meta("seed", seed);
            for (ti, vi) in path.times.iter().zip(path.values.iter()) {
                t.push_row(vec![*ti, *vi]);
            }
            tables.push((format!("path_alpha{}_{p:03}.csv", alpha_tag(alpha)), t));
        }
    }
    let summary = json!({
        "experiment": "levy_paths",
        "alphas": alphas,
        "steps": steps,
        "horizon_time": horizon,
        "paths_per_alpha": per_alpha,
    });
    Ok(RunOutput { summary, tables })
}

fn levy_scaling(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let alphas = cfg.param_f64_list("alphas")?;
    let rungs = cfg.param_usize("rungs", 4)?;
    let realizations = cfg.param_usize("realizations", 4000)?;
    let error_scale = cfg.param_f64("error_scale", 24.0)?;
    let resamples = cfg.param_usize("bootstrap_resamples", 1000)?;

    let results: Vec<_> = pool.install(|| {
        alphas
            .par_iter()
            .enumerate()
            .map(|(ai, &alpha)| {
                let sc = ScalingConfig {
                    alpha,
                    rungs,
                    realizations,
                    error_scale,
                    master_seed: cfg.master_seed.wrapping_add((ai as u64) << 40),
                    bootstrap_resamples: resamples,
                };
                levy_collapse_scaling(&sc)
            })
            .collect::<Vec<_>>()
    });

    let mut tables = Vec::new();
    let mut exponents = CsvTable::new(&["alpha", "slope", "ci_lo", "ci_hi", "analytic"]);
    let mut summary_alphas = Vec::new();
    for (&alpha, result) in alphas.iter().zip(results) {
        let r = result.map_err(CliError::Core)?;
        let mut t = CsvTable::new(&["subdivisions", "mean_reduction"]).with_meta("alpha", alpha);
        for (n, m) in r.subdivisions.iter().zip(r.mean_reduction.iter()) {
            t.push_row(vec![*n as f64, *m]);
        }
        tables.push((format!("scaling_alpha{}.csv", alpha_tag(alpha)), t));
        exponents.push_row(vec![
            alpha,
            r.slope,
            r.slope_ci.0,
            r.slope_ci.1,
            2.0 / alpha - 1.0,
        ]);
        summary_alphas.push(json!({
            "alpha": alpha,
            "slope": r.slope,
            "ci": [r.slope_ci.0, r.slope_ci.1],
            "se": r.slope_se,
            "analytic": 2.0 / alpha - 1.0,
        }));
    }
    tables.push(("exponents.csv".into(), exponents));
    Ok(RunOutput {
        summary: json!({
            "experiment": "levy_scaling",
            "realizations": realizations,
            "rungs": rungs,
            "error_scale": error_scale,
            "slopes": summary_alphas,
        }),
        tables,
    })
}

fn superposition(cfg: &RunConfig) -> Result<RunOutput> {
    let trials = cfg.param_usize("trials", 2000)?;
    let trap_len = cfg.param_f64("trap_length_wavelengths", 60.0)?;
    let mirrors = cfg.param_usize("mirrors", 1)? as u32;
    let sc = SuperpositionConfig {
        grid: grid_of(cfg)?,
        trap: HarmonicTrap {
            length_scale: trap_len,
        },
        trials,
        mirrors,
        master_seed: cfg.master_seed,
    };
    let aperture = match cfg.params.get("aperture_file") {
        Some(path) => load_aperture(Path::new(path))?,
        None => preset::<f64>("double_gaussian").map_err(CliError::Core)?,
    };
    let (_, stats) = prepare_superposition(&sc, &aperture).map_err(CliError::Core)?;

    let mut t = CsvTable::new(&["trial", "ps", "location", "separation", "packet_sigma"])
        .with_meta("master_seed", cfg.master_seed);
    for i in 0..stats.ps_values.len() {
        t.push_row(vec![
            i as f64,
            stats.ps_values[i],
            stats.detection_locations[i],
            stats.separations[i],
            stats.packet_sigmas[i],
        ]);
    }
    Ok(RunOutput {
        summary: json!({
            "experiment": "superposition",
            "trials": stats.trials,
            "emissions_total": stats.emissions_total,
            "fraction_Ps_ge_one_third": stats.fraction_ps_ge_third,
            "mean_separation_wavelengths": stats.mean_separation,
            "mean_packet_sigma_wavelengths": stats.mean_packet_sigma,
        }),
        tables: vec![("trials.csv".into(), t)],
    })
}

fn abs_measurement(cfg: &RunConfig) -> Result<RunOutput> {
    let detections = cfg.param_usize("detections", 20)?;
    let center = cfg.param_f64("initial_center_wavelengths", 10.0)?;
    let width = cfg.param_f64("initial_width_wavelengths", 4.0)?;
    let grid = grid_of(cfg)?;
    let meas = AbsPositionMeasurement::new(grid).map_err(CliError::Core)?;
    let mut state = WaveFunction::gaussian(grid, center, width).map_err(CliError::Core)?;
    let mut rng = stream_rng(cfg.master_seed, 0);
    let mut t = CsvTable::new(&["index", "location", "mean", "std", "iqr"])
        .with_meta("master_seed", cfg.master_seed);
    for i in 0..detections {
        let out = meas.measure(&state, &mut rng).map_err(CliError::Core)?;
        state = out.posterior;
        let m = state.moments();
        t.push_row(vec![
            i as f64,
            out.location,
            m.mean,
            m.variance.sqrt(),
            m.iqr,
        ]);
    }
    let m = state.moments();
    Ok(RunOutput {
        summary: json!({
            "experiment": "abs_measurement",
            "detections": detections,
            "final_mean_wavelengths": m.mean,
            "final_std_wavelengths": m.variance.sqrt(),
        }),
        tables: vec![("measurements.csv".into(), t)],
    })
}

fn collapse_gaussianity(cfg: &RunConfig) -> Result<RunOutput> {
    let alpha = cfg.param_f64("alpha", 1.0)?;
    let n = cfg.param_usize("measurements", 100)?;
    let ladder = cfg.param_usize_list("cumulant_ladder", &[8, 16, 32, 64, 128, 256])?;
    let replicates = cfg.param_usize("cumulant_replicates", 24)?;

    let grid = Grid::symmetric(40.0, 1 << 13).map_err(CliError::Core)?;
    let mut rng = stream_rng(cfg.master_seed, 0);
    let trace = collapse_to_gaussian(alpha, n, &grid, &mut rng).map_err(CliError::Core)?;
    let mut gt = CsvTable::new(&["n", "excess_kurtosis", "ks_to_gaussian"])
        .with_meta("alpha", alpha)
        .with_meta("master_seed", cfg.master_seed);
    for i in 0..trace.excess_kurtosis.len() {
        gt.push_row(vec![
            (i + 1) as f64,
            trace.excess_kurtosis[i],
            trace.ks_to_gaussian[i],
        ]);
    }

    let mut dt = CsvTable::new(&["x", "value"])
        .with_meta("alpha", alpha)
        .with_meta("master_seed", cfg.master_seed);
    for (i, x) in trace.density.grid.points().enumerate() {
        dt.push_row(vec![x, trace.density.values[i]]);
    }

    let cum = cumulant_accumulation(alpha, &ladder, replicates, cfg.master_seed)
        .map_err(CliError::Core)?;
    let mut ct = CsvTable::new(&["n", "kappa1_abs", "kappa2_abs", "kappa3_abs", "kappa4_abs"]);
    for (i, nn) in cum.n_ladder.iter().enumerate() {
        ct.push_row(vec![
            *nn as f64,
            cum.kappa1_abs[i],
            cum.kappa2_abs[i],
            cum.kappa3_abs[i],
            cum.kappa4_abs[i],
        ]);
    }

    Ok(RunOutput {
        summary: json!({
            "experiment": "collapse_gaussianity",
            "alpha": alpha,
            "measurements": n,
            "final_excess_kurtosis": trace.excess_kurtosis.last(),
            "final_ks_to_gaussian": trace.ks_to_gaussian.last(),
            "cumulant_slopes": {
                "kappa1": cum.slope1,
                "kappa2": cum.slope2,
                "kappa3": cum.slope3,
                "kappa4": cum.slope4,
            },
        }),
        tables: vec![
            ("gaussianity.csv".into(), gt),
            ("density.csv".into(), dt),
            ("cumulants.csv".into(), ct),
        ],
    })
}

fn wigner_cauchy(cfg: &RunConfig) -> Result<RunOutput> {
    let sigma_units = cfg.param_f64("sigma_phase_units", 0.3)?;
    let stride = cfg.param_usize("x_stride", 16)?;
    let x_window = cfg.param_f64("x_window_phase_units", 2.0)?;
    let p_window = cfg.param_f64("p_window_phase_units", 2.0)?;
    let grid = grid_of(cfg)?;
    let sigma = sigma_units * PHASE_SPACE_UNIT;
    let density = GridDensity::new(
        grid,
        grid.points()
            .map(|z| sigma / (std::f64::consts::PI * (z * z + sigma * sigma)))
            .collect(),
    );
    let state = WaveFunction::from_density(&density).map_err(CliError::Core)?;
    let wg = wigner(&state, stride).map_err(CliError::Core)?;

    // X = z / unit, P = p * unit so that [X, P] = i in figure units
    let mut t = CsvTable::new(&["x", "p", "w"])
        .with_meta("sigma_phase_units", sigma_units)
        .with_meta("wavelengths_per_unit", PHASE_SPACE_UNIT);
    let mut min_w = f64::INFINITY;
    let mut max_w = f64::NEG_INFINITY;
    for (xi, x) in wg.x_grid.points().enumerate() {
        let xu = x / PHASE_SPACE_UNIT;
        if xu.abs() > x_window {
            continue;
        }
        for (pi, p) in wg.p_grid.points().enumerate() {
            let pu = p * PHASE_SPACE_UNIT;
            if pu.abs() > p_window {
                continue;
            }
            // W transforms with unit Jacobian under the canonical rescale
            let w = wg.values[xi][pi];
            min_w = min_w.min(w);
            max_w = max_w.max(w);
            t.push_row(vec![xu, pu, w]);
        }
    }
    Ok(RunOutput {
        summary: json!({
            "experiment": "wigner_cauchy",
            "sigma_phase_units": sigma_units,
            "total_mass": wg.total_mass(),
            "min_w": min_w,
            "max_w": max_w,
        }),
        tables: vec![("wigner.csv".into(), t)],
    })
}

fn chained_record(cfg: &RunConfig) -> Result<RunOutput> {
    let sc = SubordinatedConfig {
        alpha: cfg.param_f64("alpha", 1.0)?,
        jump_rate: cfg.param_f64("jump_rate", 10.0)?,
        gamma: cfg.param_f64("gamma", 1.0)?,
        horizon: cfg.param_f64("horizon_time", 100.0)?,
    };
    let mut rng = stream_rng(cfg.master_seed, 0);
    let rec = chained_measurement_record(&sc, &MeanFeed::Constant(0.0), &mut rng)
        .map_err(CliError::Core)?;
    let mut t = CsvTable::new(&["t", "increment", "record"])
        .with_meta("alpha", sc.alpha)
        .with_meta("jump_rate", sc.jump_rate)
        .with_meta("gamma", sc.gamma)
        .with_meta("master_seed", cfg.master_seed);
    for i in 0..rec.event_times.len() {
        t.push_row(vec![rec.event_times[i], rec.increments[i], rec.record[i]]);
    }
    Ok(RunOutput {
        summary: json!({
            "experiment": "chained_record",
            "alpha": sc.alpha,
            "jump_rate": sc.jump_rate,
            "gamma": sc.gamma,
            "horizon_time": sc.horizon,
            "events": rec.event_times.len(),
        }),
        tables: vec![("record.csv".into(), t)],
    })
}

fn anomalous_diffusion(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<RunOutput> {
    let kernel = match cfg.param_str("kernel", "square").as_str() {
        "square" => DiffusionKernel::Square,
        "gaussian_control" => DiffusionKernel::GaussianControl,
        other => {
            return Err(CliError::Config(format!(
                "kernel must be `square` or `gaussian_control`, got {other:?}"
            )))
        }
    };
    let post_select = match cfg.param_str("post_select", "none").as_str() {
        "none" => PostSelectPolicy::None,
        "first_emission" => PostSelectPolicy::FirstEmission,
        other => {
            return Err(CliError::Config(format!(
                "post_select must be `none` or `first_emission`, got {other:?}"
            )))
        }
    };
    let dc = DiffusionConfig {
        grid: grid_of(cfg)?,
        trap: HarmonicTrap {
            length_scale: cfg.param_f64("trap_length_wavelengths", 16.0)?,
        },
        kernel,
        detections_per_trajectory: cfg.param_usize("detections_per_trajectory", 200)?,
        efficiency: cfg.param_f64("efficiency_percent", 50.0)? / 100.0,
        post_select,
        trajectories: cfg.param_usize("trajectories", 24)?,
        initial_width: cfg.param_f64("initial_width_wavelengths", 30.0)?,
        burn_in: cfg.param_usize("burn_in", 16)?,
        master_seed: cfg.master_seed,
    };
    let aperture = match cfg.params.get("aperture_file") {
        Some(path) => load_aperture(Path::new(path))?,
        None => dc.aperture().map_err(CliError::Core)?,
    };

    let records: Vec<_> = pool.install(|| {
        (0..dc.trajectories)
            .into_par_iter()
            .map(|idx| diffusion_trajectory(&dc, &aperture, idx as u64))
            .collect::<Vec<_>>()
    });
    let records: std::result::Result<Vec<_>, _> = records.into_iter().collect();
    let records = records.map_err(CliError::Core)?;

    // same pooling and bootstrap stream as assemble_diffusion; short runs
    // keep their trajectory records and report null width statistics below
    // the estimator's 200-sample floor
    let aborted = records.iter().filter(|r| r.aborted).count();
    let mut pooled = Vec::new();
    for rec in records.iter().filter(|r| !r.aborted) {
        for (dx, &keep) in rec.delta_mean_x.iter().zip(rec.post_selected.iter()) {
            if keep {
                pooled.push(*dx);
            }
        }
    }
    let mut beta_rng = stream_rng(cfg.master_seed, u64::MAX - 1);
    let beta = match beta_estimator(&pooled, 1000, &mut beta_rng) {
        Ok(b) => Some(b),
        Err(levysim_core::Error::InsufficientSamples { .. }) => None,
        Err(e) => return Err(CliError::Core(e)),
    };

    let mut tables = Vec::new();
    for rec in &records {
        let mut t = CsvTable::new(&[
            "index",
            "delta_mean_x",
            "mean_x",
            "losses",
            "post_selected",
        ])
        .with_meta("stream", rec.stream)
        .with_meta("aborted", rec.aborted)
        .with_meta("max_lost_mass", rec.max_lost_mass);
        for i in 0..rec.delta_mean_x.len() {
            t.push_row(vec![
                i as f64,
                rec.delta_mean_x[i],
                rec.mean_x[i],
                f64::from(rec.losses[i]),
                if rec.post_selected[i] { 1.0 } else { 0.0 },
            ]);
        }
        tables.push((format!("traj_{:03}.csv", rec.stream), t));
    }
    Ok(RunOutput {
        summary: json!({
            "experiment": "anomalous_diffusion",
            "kernel": cfg.param_str("kernel", "square"),
            "efficiency": dc.efficiency,
            "trajectories": dc.trajectories,
            "detections_per_trajectory": dc.detections_per_trajectory,
            "pooled_samples": pooled.len(),
            "aborted_trajectories": aborted,
            "sigma1": beta.as_ref().map(|b| b.sigma1),
            "sigma2": beta.as_ref().map(|b| b.sigma2),
            "beta": beta.as_ref().map(|b| b.beta),
            "beta_ci": beta.as_ref().map(|b| [b.ci.0, b.ci.1]),
            "beta_se": beta.as_ref().map(|b| b.se),
        }),
        tables,
    })
}

fn apertures(cfg: &RunConfig) -> Result<RunOutput> {
    let grid = grid_of(cfg)?;
    let mut tables = Vec::new();
    let mut entries = Vec::new();
    for name in PRESET_NAMES {
        let ap = preset::<f64>(name).map_err(CliError::Core)?;
        let profile = ap.to_table().with_meta("preset", name);
        tables.push((format!("aperture_{name}.csv"), profile));

        let kern = collapse_kernel(&ap, &grid).map_err(CliError::Core)?;
        let kt = kern.to_table().with_meta("preset", name);
        tables.push((format!("kernel_{name}.csv"), kt));

        let eta1 = capture_fraction(&ap, 1);
        let eta2 = capture_fraction(&ap, 2);
        entries.push(json!({
            "preset": name,
            "eta_one_mirror": eta1,
            "eta_two_mirrors": eta2,
            "loss_rate_one_mirror": (1.0 - eta1) / eta1.max(1e-300),
            "long_tailed_kernel": kern.is_long_tailed(),
        }));
    }
    Ok(RunOutput {
        summary: json!({
            "experiment": "apertures",
            "presets": entries,
        }),
        tables,
    })
}

/// Human-oriented preset listing for `presets list`.
pub fn preset_listing() -> Result<String> {
    let mut out = String::new();
    out.push_str("preset            delta_phi  arc     capture           eta(1)      eta(2)\n");
    for name in PRESET_NAMES {
        let ap = preset::<f64>(name).map_err(CliError::Core)?;
        let eta1 = capture_fraction(&ap, 1);
        let eta2 = capture_fraction(&ap, 2);
        out.push_str(&format!(
            "{name:<17} {:>7.1}deg {:>5.1}deg [{:+.3},{:+.3}]  {eta1:<11.5} {eta2:<11.5}\n",
            ap.delta_phi.to_degrees(),
            ap.mirror_arc.to_degrees(),
            ap.capture.0,
            ap.capture.1,
        ));
    }
    Ok(out)
}

fn load_aperture(path: &Path) -> Result<levysim_core::ApertureProfile64> {
    if !path.is_file() {
        return Err(CliError::MissingArtifact(format!(
            "aperture file {}",
            path.display()
        )));
    }
    let table = CsvTable::read_file(path).map_err(CliError::Core)?;
    levysim_core::ApertureProfile64::from_table(&table).map_err(CliError::Core)
}

/// Require a sealed run directory (manifest present) before exporting.
pub fn check_sealed(run_dir: &Path) -> Result<()> {
    if !run_dir.join("manifest.json").is_file() {
        return Err(CliError::MissingArtifact(format!(
            "{} has no manifest.json (run incomplete?)",
            run_dir.display()
        )));
    }
    Ok(())
}
