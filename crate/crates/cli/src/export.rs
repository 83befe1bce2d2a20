//! Re-export run artifacts as plot-ready CSV series, one figure id at a
//! time. No rendering happens here; the output is labeled columns.

use std::path::{Path, PathBuf};

use levysim_core::io::CsvTable;
use levysim_core::stats;

use crate::error::{CliError, Result};
use crate::runner::check_sealed;

pub const FIGURE_IDS: [&str; 6] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"];

fn load(run_dir: &Path, name: &str) -> Result<CsvTable> {
    let path = run_dir.join(name);
    if !path.is_file() {
        return Err(CliError::MissingArtifact(format!(
            "{} (is this the right run for this figure?)",
            path.display()
        )));
    }
    CsvTable::read_file(&path).map_err(CliError::Core)
}

fn write(run_dir: &Path, name: &str, table: &CsvTable) -> Result<PathBuf> {
    let path = run_dir.join(name);
    table.write_file(&path).map_err(CliError::Core)?;
    Ok(path)
}

/// Export the plot data for one figure id from a completed run directory.
/// Returns the files written.
pub fn export(run_dir: &Path, figure_id: &str) -> Result<Vec<PathBuf>> {
    check_sealed(run_dir)?;
    match figure_id {
        // aperture transmission profiles: superposition (a) and Cauchy (b)
        "fig2" => {
            let a = load(run_dir, "aperture_double_gaussian.csv")?;
            let b = load(run_dir, "aperture_cauchy.csv")?;
            let xi = a.column("xi").unwrap_or_default();
            let ta = a.column("t_re").unwrap_or_default();
            let tb = b.column("t_re").unwrap_or_default();
            if xi.len() != tb.len() {
                return Err(CliError::MissingArtifact(
                    "aperture profiles have mismatched grids".into(),
                ));
            }
            let mut out = CsvTable::new(&["xi", "t_double_gaussian", "t_cauchy"]);
            for i in 0..xi.len() {
                out.push_row(vec![xi[i], ta[i], tb[i]]);
            }
            Ok(vec![write(run_dir, "fig2.csv", &out)?])
        }
        // one Wiener and one Cauchy sample path
        "fig3" => {
            let wiener = load(run_dir, "path_alpha2p000_000.csv")?;
            let cauchy = load(run_dir, "path_alpha1p000_000.csv")?;
            let t = wiener.column("t").unwrap_or_default();
            let w = wiener.column("value").unwrap_or_default();
            let c = cauchy.column("value").unwrap_or_default();
            if t.len() != c.len() {
                return Err(CliError::MissingArtifact(
                    "paths have different lengths".into(),
                ));
            }
            let mut out = CsvTable::new(&["t", "wiener", "cauchy"]);
            for i in 0..t.len() {
                out.push_row(vec![t[i], w[i], c[i]]);
            }
            Ok(vec![write(run_dir, "fig3.csv", &out)?])
        }
        // uncertainty-reduction ladder with its log-log fit (alpha = 1.5
        // when present, else the first recorded alpha)
        "fig4" => {
            let expo = load(run_dir, "exponents.csv")?;
            let alphas = expo.column("alpha").unwrap_or_default();
            let pick = alphas
                .iter()
                .position(|a| (a - 1.5).abs() < 1e-9)
                .unwrap_or(0);
            let alpha = *alphas
                .get(pick)
                .ok_or_else(|| CliError::MissingArtifact("no scaling results".into()))?;
            let tag = format!("{alpha:.3}").replace('.', "p");
            let ladder = load(run_dir, &format!("scaling_alpha{tag}.csv"))?;
            let n = ladder.column("subdivisions").unwrap_or_default();
            let red = ladder.column("mean_reduction").unwrap_or_default();
            let logs_n: Vec<f64> = n.iter().map(|v| v.ln()).collect();
            let logs_r: Vec<f64> = red.iter().map(|v| v.ln()).collect();
            let (intercept, slope) =
                stats::linear_fit(&logs_n, &logs_r).map_err(CliError::Core)?;
            let mut out = CsvTable::new(&["subdivisions", "mean_reduction", "fit"])
                .with_meta("alpha", alpha)
                .with_meta("slope", slope);
            for i in 0..n.len() {
                out.push_row(vec![
                    n[i],
                    red[i],
                    (intercept + slope * logs_n[i]).exp(),
                ]);
            }
            Ok(vec![write(run_dir, "fig4.csv", &out)?])
        }
        // exponent curve: analytic line plus measured points
        "fig5" => {
            let expo = load(run_dir, "exponents.csv")?;
            let mut curve = CsvTable::new(&["alpha", "analytic"]);
            let mut a = 1.0;
            while a <= 2.0 + 1e-9 {
                curve.push_row(vec![a, 2.0 / a - 1.0]);
                a += 0.01;
            }
            let mut points = CsvTable::new(&["alpha", "slope", "ci_lo", "ci_hi"]);
            let alphas = expo.column("alpha").unwrap_or_default();
            let slopes = expo.column("slope").unwrap_or_default();
            let lo = expo.column("ci_lo").unwrap_or_default();
            let hi = expo.column("ci_hi").unwrap_or_default();
            for i in 0..alphas.len() {
                points.push_row(vec![alphas[i], slopes[i], lo[i], hi[i]]);
            }
            Ok(vec![
                write(run_dir, "fig5_analytic.csv", &curve)?,
                write(run_dir, "fig5_measured.csv", &points)?,
            ])
        }
        // Wigner grid of the Cauchy-density state
        "fig6" => {
            let wt = load(run_dir, "wigner.csv")?;
            Ok(vec![write(run_dir, "fig6.csv", &wt)?])
        }
        // eight conditioned-mean trajectories
        "fig7" => {
            let mut columns = vec!["measurement_index".to_string()];
            let mut series = Vec::new();
            for i in 0..8 {
                let t = load(run_dir, &format!("traj_{i:03}.csv"))?;
                series.push(t.column("mean_x").unwrap_or_default());
                columns.push(format!("traj_{i}"));
            }
            let len = series.iter().map(|s| s.len()).min().unwrap_or(0);
            if len == 0 {
                return Err(CliError::MissingArtifact(
                    "trajectories are empty".into(),
                ));
            }
            let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            let mut out = CsvTable::new(&cols);
            for i in 0..len {
                let mut row = vec![i as f64];
                for s in &series {
                    row.push(s[i]);
                }
                out.push_row(row);
            }
            Ok(vec![write(run_dir, "fig7.csv", &out)?])
        }
        other => Err(CliError::UnknownFigure(format!(
            "{other} (known: {})",
            FIGURE_IDS.join(", ")
        ))),
    }
}
