//! Run directories, CSV files, summaries and plotting scripts.
//!
//! Every run gets its own directory `<base>/<kind>-<timestamp>` holding a
//! copy of the effective config as `config.txt`. The base comes from the
//! `DELTA_NLS_OUTPUT_DIR` environment variable when set, otherwise from the
//! config.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, FitModel};
use crate::error::Result;
use crate::experiments::{
    sweep_csv, FreeOutcome, LinearRow, ResolveOutcome, ScatterOutcome, SweepRow, TheoryRow,
    LINEAR_HEADER, THEORY_HEADER,
};
use crate::fitting::{fit_report_csv, FitResult};
use crate::snapshot::{self, SnapshotHeader};

pub const OUTPUT_ENV: &str = "DELTA_NLS_OUTPUT_DIR";

/// Base directory for run outputs.
pub fn output_base(cfg: &ExperimentConfig) -> PathBuf {
    match std::env::var(OUTPUT_ENV) {
        Ok(dir) if !dir.trim().is_empty() => PathBuf::from(dir),
        _ => PathBuf::from(&cfg.output_dir),
    }
}

/// Creates a fresh timestamped directory under `base` and copies the
/// config into it.
pub fn create_run_dir(base: &Path, cfg: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S%.3f");
    let stem = format!("{}-{stamp}", cfg.kind.name());
    let mut dir = base.join(&stem);
    let mut n = 1;
    while dir.exists() {
        dir = base.join(format!("{stem}-{n}"));
        n += 1;
    }
    fs::create_dir(&dir)?;
    fs::write(dir.join("config.txt"), cfg.render())?;
    Ok(dir)
}

fn summary(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        let _ = writeln!(s, "{k}={v}");
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), |v| v.to_string())
}

pub fn write_scatter(dir: &Path, out: &ScatterOutcome) -> Result<()> {
    let mut series = String::from(crate::measure::SERIES_HEADER);
    series.push('\n');
    for r in &out.rows {
        series.push_str(&r.to_csv());
        series.push('\n');
    }
    fs::write(dir.join("series.csv"), series)?;
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps)?;
    let p = out.params;
    for (t, u) in &out.snapshots {
        snapshot::write(&snaps.join(snapshot::file_name(*t)), u, &SnapshotHeader::new(p.q, p.v, p.x0, *t))?;
    }
    let (tr, re, tb) = out.fractions;
    let (min_t, min_d) = out.min_profile.map_or((None, None), |(t, d)| (Some(t), Some(d)));
    fs::write(
        dir.join("summary.txt"),
        summary(&[
            ("q", p.q.to_string()),
            ("v", p.v.to_string()),
            ("x0", p.x0.to_string()),
            ("final_time", out.final_time.to_string()),
            ("transmitted", tr.to_string()),
            ("reflected", re.to_string()),
            ("trapped", tb.to_string()),
            ("interaction_time", out.interaction_time.to_string()),
            ("min_profile_time", opt(min_t)),
            ("min_profile_distance", opt(min_d)),
            ("max_mass_drift", out.max_drift.to_string()),
        ]),
    )?;
    fs::write(dir.join("plot_partition.gp"), PARTITION_PLOT)?;
    fs::write(dir.join("plot_snapshots.gp"), snapshot_plot(&out.snapshots))?;
    Ok(())
}

const PARTITION_PLOT: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 't'
set ylabel 'half mass'
plot 'series.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines
pause -1
";

fn snapshot_plot(snaps: &[(f64, crate::fem::ComplexField)]) -> String {
    let mut s = String::from("set datafile separator ','\nset xlabel 'x'\nset ylabel '|u|'\nplot ");
    let parts: Vec<String> = snaps
        .iter()
        .map(|(t, _)| {
            format!(
                "'snapshots/{}' using 1:(sqrt($2**2+$3**2)) with lines title 't = {t:.2}'",
                snapshot::file_name(*t)
            )
        })
        .collect();
    s.push_str(&parts.join(", "));
    s.push_str("\npause -1\n");
    s
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<()> {
    fs::write(dir.join("sweep.csv"), sweep_csv(rows))?;
    let mut alphas: Vec<f64> = rows.iter().map(|r| r.alpha).collect();
    alphas.dedup();
    let trans: Vec<String> = alphas
        .iter()
        .map(|a| {
            format!(
                "'sweep.csv' using ($1=={a} ? $2 : 1/0):({lim} - $4) with linespoints title 'alpha = {a}'",
                lim = 1.0 / (1.0 + a * a)
            )
        })
        .collect();
    fs::write(
        dir.join("plot_trans.gp"),
        format!(
            "set datafile separator ','\nset logscale xy\nset xlabel 'v'\nset ylabel '1/(1+alpha^2) - T'\nplot {}\npause -1\n",
            trans.join(", ")
        ),
    )?;
    let trapped: Vec<String> = alphas
        .iter()
        .map(|a| format!("'sweep.csv' using ($1=={a} ? $2 : 1/0):6 with linespoints title 'alpha = {a}'"))
        .collect();
    fs::write(
        dir.join("plot_trapped.gp"),
        format!(
            "set datafile separator ','\nset logscale y\nset xlabel 'v'\nset ylabel 'B'\nplot {}\npause -1\n",
            trapped.join(", ")
        ),
    )?;
    Ok(())
}

pub const RESOLVE_HEADER: &str =
    "side,predicted,measured,window_start,window_end,stabilized,contaminated_at,piece_mass,momentum,skipped";

pub fn write_resolve(dir: &Path, out: &ResolveOutcome) -> Result<()> {
    let mut csv = String::from(RESOLVE_HEADER);
    csv.push('\n');
    for s in &out.sides {
        let (measured, w0, w1, stab, cont) = match &s.result {
            Some(r) => (
                r.measured_amplitude.to_string(),
                r.window.0.to_string(),
                r.window.1.to_string(),
                r.stabilized.to_string(),
                opt(r.contaminated_at),
            ),
            None => ("".into(), "".into(), "".into(), "".into(), "".into()),
        };
        let _ = writeln!(
            csv,
            "{},{},{measured},{w0},{w1},{stab},{cont},{},{},{}",
            s.side.name(),
            s.predicted,
            s.piece_mass,
            s.momentum,
            s.skipped.as_deref().unwrap_or("").replace(',', ";")
        );
        if let Some(r) = &s.result {
            let mut series = String::from("time,sup\n");
            for (t, a) in &r.amplitude_series {
                let _ = writeln!(series, "{t},{a}");
            }
            fs::write(dir.join(format!("amplitude_{}.csv", s.side.name())), series)?;
        }
    }
    fs::write(dir.join("resolve.csv"), csv)?;
    let p = out.params;
    snapshot::write(
        &dir.join(snapshot::file_name(out.best_time)),
        &out.best_state,
        &SnapshotHeader::new(p.q, p.v, p.x0, out.best_time),
    )?;
    snapshot::write(
        &dir.join(snapshot::file_name(out.cut_time)),
        &out.cut_state,
        &SnapshotHeader::new(p.q, p.v, p.x0, out.cut_time),
    )?;
    fs::write(
        dir.join("summary.txt"),
        summary(&[
            ("q", p.q.to_string()),
            ("v", p.v.to_string()),
            ("alpha", p.alpha().to_string()),
            ("best_time", out.best_time.to_string()),
            ("best_distance", out.best_distance.to_string()),
            ("deviation", out.deviation.to_string()),
            ("cut_time", out.cut_time.to_string()),
            ("predicted_amplitude_t", out.prediction.amplitude_t.to_string()),
            ("predicted_amplitude_r", out.prediction.amplitude_r.to_string()),
            ("predicted_phase_t", opt(out.prediction.phase_t)),
            ("predicted_phase_r", opt(out.prediction.phase_r)),
        ]),
    )?;
    fs::write(
        dir.join("plot_amplitude.gp"),
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nset ylabel 'sup |u|'\nplot 'amplitude_transmitted.csv' using 1:2 with lines, 'amplitude_reflected.csv' using 1:2 with lines\npause -1\n",
    )?;
    Ok(())
}

pub fn write_free(dir: &Path, out: &FreeOutcome) -> Result<()> {
    let mut csv = String::from("time,center_abs,sup,phase_deviation\n");
    for r in &out.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.time,
            r.center_abs,
            r.sup,
            r.phase_deviation.map_or(String::new(), |p| p.to_string())
        );
    }
    fs::write(dir.join("free.csv"), csv)?;
    fs::write(
        dir.join("summary.txt"),
        summary(&[
            ("alpha", out.alpha.to_string()),
            ("predicted_amplitude", out.asymptote.0.to_string()),
            ("predicted_phase", opt(out.asymptote.1)),
            ("measured_amplitude", out.amplitude.mean.to_string()),
            ("window_start", out.amplitude.window.0.to_string()),
            ("window_end", out.amplitude.window.1.to_string()),
            ("periods", out.amplitude.periods.to_string()),
            ("stabilized", out.amplitude.stabilized.to_string()),
            ("phase_mean", opt(out.phase_mean)),
            ("decay_exponent", out.decay_exponent.to_string()),
            ("max_mass_drift", out.max_drift.to_string()),
            ("max_boundary_mass", out.max_boundary_mass.to_string()),
        ]),
    )?;
    fs::write(
        dir.join("plot_free.gp"),
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 't'\nplot 'free.csv' using 1:2 with lines, '' using 1:4 with lines\npause -1\n",
    )?;
    Ok(())
}

pub fn write_linear(dir: &Path, rows: &[LinearRow]) -> Result<()> {
    let mut csv = String::from(LINEAR_HEADER);
    csv.push('\n');
    for r in rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    fs::write(dir.join("linear.csv"), csv)?;
    fs::write(
        dir.join("plot_linear.gp"),
        "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\nset xlabel 'v'\nplot 'linear.csv' using 1:6 with linespoints, '' using 1:7 with linespoints, '' using 1:10 with linespoints\npause -1\n",
    )?;
    Ok(())
}

pub fn write_theory(dir: &Path, rows: &[TheoryRow]) -> Result<()> {
    let mut csv = String::from(THEORY_HEADER);
    csv.push('\n');
    for r in rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    fs::write(dir.join("theory.csv"), csv)?;
    Ok(())
}

pub fn write_fit(dir: &Path, model: FitModel, fits: &[(f64, FitResult)]) -> Result<()> {
    fs::write(dir.join(format!("fit_{}.csv", model.name())), fit_report_csv(fits))?;
    Ok(())
}
