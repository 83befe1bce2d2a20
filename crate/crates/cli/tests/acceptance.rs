//! CLI acceptance: determinism of run outputs across worker counts
//! (criterion 12), plus the command surface contract (exit codes, error
//! categories, sealed-run exports).

use std::path::{Path, PathBuf};
use std::process::Command;

fn levysim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levysim"))
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "levysim-test-{tag}-{}",
            std::process::id()
        ));
        let _ = std::fs::remove_dir_all(&dir);
        std::fs::create_dir_all(&dir).unwrap();
        Self(dir)
    }
    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn read_sorted_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == "manifest.json" {
            continue; // carries wall-clock timestamps
        }
        out.push((name, std::fs::read(entry.path()).unwrap()));
    }
    out.sort();
    out
}

#[test]
fn criterion_12_byte_identical_outputs_across_worker_counts() {
    let tmp = TempDir::new("determinism");
    let base = "experiment = anomalous_diffusion\n\
                master_seed = 77\n\
                grid_half_width_wavelengths = 64\n\
                grid_points = 4096\n\
                efficiency_percent = 50\n\
                trajectories = 4\n\
                detections_per_trajectory = 5\n";

    let mut dirs = Vec::new();
    for (label, workers) in [("w1", 1), ("w3", 3), ("w1b", 1)] {
        let out_dir = tmp.path().join(label);
        let cfg = write_config(
            tmp.path(),
            &format!("{label}.conf"),
            &format!(
                "{base}workers = {workers}\noutput_dir = {}\n",
                out_dir.display()
            ),
        );
        let status = levysim().arg("run").arg(&cfg).status().unwrap();
        assert!(status.success(), "{label} failed");
        dirs.push(out_dir);
    }

    let first = read_sorted_outputs(&dirs[0]);
    assert!(first.iter().any(|(n, _)| n == "summary.json"));
    assert!(first.iter().any(|(n, _)| n.starts_with("traj_")));
    for other in &dirs[1..] {
        let others = read_sorted_outputs(other);
        assert_eq!(first.len(), others.len());
        for ((name_a, bytes_a), (name_b, bytes_b)) in first.iter().zip(others.iter()) {
            assert_eq!(name_a, name_b);
            assert!(
                bytes_a == bytes_b,
                "{name_a} differs between worker counts"
            );
        }
    }

    // the manifest checksums must describe the files on disk
    let manifest: serde_json::Value = serde_json::from_slice(
        &std::fs::read(dirs[0].join("manifest.json")).unwrap(),
    )
    .unwrap();
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(outputs.contains_key("summary.json"));
    for (name, bytes) in &first {
        let expect = outputs[name].as_str().unwrap();
        let mut h = 0xcbf2_9ce4_8422_2325u64;
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        assert_eq!(format!("{h:016x}"), expect, "checksum of {name}");
    }
}

#[test]
fn scaling_runs_are_reproducible_and_parallel_safe() {
    let tmp = TempDir::new("scaling");
    let base = "experiment = levy_scaling\n\
                master_seed = 5\n\
                alphas = 1.5, 2.0\n\
                realizations = 60\n\
                rungs = 3\n\
                bootstrap_resamples = 100\n";
    let mut summaries = Vec::new();
    for (label, workers) in [("s1", 1), ("s2", 2)] {
        let out_dir = tmp.path().join(label);
        let cfg = write_config(
            tmp.path(),
            &format!("{label}.conf"),
            &format!(
                "{base}workers = {workers}\noutput_dir = {}\n",
                out_dir.display()
            ),
        );
        assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
        summaries.push(std::fs::read(out_dir.join("summary.json")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
}

#[test]
fn error_categories_and_exit_codes() {
    let tmp = TempDir::new("errors");

    // malformed config
    let bad = write_config(tmp.path(), "bad.conf", "experiment apertures\n");
    let out = levysim().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr must be machine readable");
    assert_eq!(err["error"]["category"], "config");

    // unknown experiment
    let unknown = write_config(
        tmp.path(),
        "unknown.conf",
        "experiment = teleportation\nmaster_seed = 1\n",
    );
    let out = levysim().arg("run").arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["category"], "unknown_experiment");

    // export from a directory without a manifest
    let out = levysim()
        .arg("export")
        .arg(tmp.path())
        .arg("fig3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["category"], "missing_artifact");

    // validate accepts a good config without running anything
    let good = write_config(
        tmp.path(),
        "good.conf",
        "experiment = superposition\nmaster_seed = 9\ntrials = 10\n",
    );
    let out = levysim().arg("validate").arg(&good).output().unwrap();
    assert!(out.status.success());
    assert!(std::str::from_utf8(&out.stdout).unwrap().contains("valid"));
}

#[test]
fn environment_overrides_output_dir_and_workers() {
    let tmp = TempDir::new("env");
    let override_dir = tmp.path().join("from-env");
    let cfg = write_config(
        tmp.path(),
        "env.conf",
        "experiment = levy_paths\nmaster_seed = 3\nalphas = 1.0\nsteps = 64\n\
         horizon_time = 1.0\npaths_per_alpha = 1\noutput_dir = should-not-be-used\n",
    );
    let status = levysim()
        .arg("run")
        .arg(&cfg)
        .env("LEVYSIM_OUTPUT_DIR", &override_dir)
        .env("LEVYSIM_WORKERS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    assert!(override_dir.join("summary.json").is_file());
    assert!(!Path::new("should-not-be-used").exists());
}

#[test]
fn superposition_summary_reports_the_named_fraction() {
    let tmp = TempDir::new("superp");
    let out_dir = tmp.path().join("out");
    let cfg = write_config(
        tmp.path(),
        "s.conf",
        &format!(
            "experiment = superposition\nmaster_seed = 21\ntrials = 400\n\
             output_dir = {}\n",
            out_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("summary.json")).unwrap()).unwrap();
    let fraction = summary["fraction_Ps_ge_one_third"].as_f64().unwrap();
    assert!(
        (fraction - 0.95).abs() < 0.08,
        "fraction_Ps_ge_one_third = {fraction}"
    );
}

#[test]
fn remaining_figures_export_from_their_runs() {
    let tmp = TempDir::new("figs");

    // fig2 from the aperture registry dump
    let ap_dir = tmp.path().join("apertures");
    let cfg = write_config(
        tmp.path(),
        "ap.conf",
        &format!(
            "experiment = apertures\nmaster_seed = 1\ngrid_points = 4096\n\
             grid_half_width_wavelengths = 64\noutput_dir = {}\n",
            ap_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let out = levysim().arg("export").arg(&ap_dir).arg("fig2").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ap_dir.join("fig2.csv").is_file());

    // fig4 and fig5 from a small scaling run
    let sc_dir = tmp.path().join("scaling");
    let cfg = write_config(
        tmp.path(),
        "sc.conf",
        &format!(
            "experiment = levy_scaling\nmaster_seed = 2\nalphas = 1.5, 2.0\n\
             realizations = 40\nrungs = 3\nbootstrap_resamples = 50\noutput_dir = {}\n",
            sc_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    for fig in ["fig4", "fig5"] {
        let out = levysim().arg("export").arg(&sc_dir).arg(fig).output().unwrap();
        assert!(out.status.success(), "{fig}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert!(sc_dir.join("fig4.csv").is_file());
    assert!(sc_dir.join("fig5_analytic.csv").is_file());
    assert!(sc_dir.join("fig5_measured.csv").is_file());

    // fig6 from a Wigner run
    let wg_dir = tmp.path().join("wigner");
    let cfg = write_config(
        tmp.path(),
        "wg.conf",
        &format!(
            "experiment = wigner_cauchy\nmaster_seed = 3\ngrid_points = 4096\n\
             grid_half_width_wavelengths = 64\nx_stride = 16\noutput_dir = {}\n",
            wg_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let out = levysim().arg("export").arg(&wg_dir).arg("fig6").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(wg_dir.join("fig6.csv").is_file());
}

#[test]
fn aperture_files_round_trip_through_runs() {
    let tmp = TempDir::new("apfile");
    // dump presets, then feed the double-Gaussian profile back as a file
    let ap_dir = tmp.path().join("apertures");
    let cfg = write_config(
        tmp.path(),
        "ap.conf",
        &format!(
            "experiment = apertures\nmaster_seed = 1\ngrid_points = 4096\n\
             grid_half_width_wavelengths = 64\noutput_dir = {}\n",
            ap_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let profile = ap_dir.join("aperture_double_gaussian.csv");
    assert!(profile.is_file());

    let sp_dir = tmp.path().join("superp");
    let cfg = write_config(
        tmp.path(),
        "sp.conf",
        &format!(
            "experiment = superposition\nmaster_seed = 4\ntrials = 60\n\
             aperture_file = {}\noutput_dir = {}\n",
            profile.display(),
            sp_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(sp_dir.join("summary.json")).unwrap()).unwrap();
    let sep = summary["mean_separation_wavelengths"].as_f64().unwrap();
    assert!((sep - 15.0).abs() < 1.0, "separation {sep}");
}

#[test]
fn presets_list_shows_the_registry() {
    let out = levysim().arg("presets").arg("list").output().unwrap();
    assert!(out.status.success());
    let text = std::str::from_utf8(&out.stdout).unwrap();
    for name in ["double_gaussian", "cauchy", "square", "full"] {
        assert!(text.contains(name), "missing {name} in:\n{text}");
    }
}

#[test]
fn figure_exports_from_completed_runs() {
    let tmp = TempDir::new("export");

    // fig3 from a paths run
    let paths_dir = tmp.path().join("paths");
    let cfg = write_config(
        tmp.path(),
        "paths.conf",
        &format!(
            "experiment = levy_paths\nmaster_seed = 11\nalphas = 2.0, 1.0\nsteps = 128\n\
             horizon_time = 1.0\npaths_per_alpha = 1\noutput_dir = {}\n",
            paths_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let out = levysim()
        .arg("export")
        .arg(&paths_dir)
        .arg("fig3")
        .output()
        .unwrap();
    assert!(out.status.success());
    let fig3 = std::fs::read_to_string(paths_dir.join("fig3.csv")).unwrap();
    let header = fig3.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,wiener,cauchy");

    // unknown figure id
    let out = levysim()
        .arg("export")
        .arg(&paths_dir)
        .arg("fig99")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    // fig7 needs a diffusion run with eight trajectories
    let diff_dir = tmp.path().join("diff");
    let cfg = write_config(
        tmp.path(),
        "diff.conf",
        &format!(
            "experiment = anomalous_diffusion\nmaster_seed = 12\nworkers = 2\n\
             grid_half_width_wavelengths = 64\ngrid_points = 4096\n\
             efficiency_percent = 50\ntrajectories = 8\ndetections_per_trajectory = 4\n\
             output_dir = {}\n",
            diff_dir.display()
        ),
    );
    assert!(levysim().arg("run").arg(&cfg).status().unwrap().success());
    let out = levysim()
        .arg("export")
        .arg(&diff_dir)
        .arg("fig7")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fig7 = std::fs::read_to_string(diff_dir.join("fig7.csv")).unwrap();
    let header = fig7.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("measurement_index,traj_0,"));
}
