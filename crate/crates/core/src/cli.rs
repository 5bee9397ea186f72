//! Command-line front end.
//!
//! Settings are layered: built-in defaults, then `--config <file>`, then
//! the subcommand flags, then `--set section.key=value` assignments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ExperimentConfig, ExperimentKind, FitModel};
use crate::error::{Error, Result};
use crate::{experiments, output};

#[derive(Debug, Parser)]
#[command(name = "delta-nls", version, about = "Soliton scattering by a point impurity")]
pub struct Cli {
    /// Config file in sectioned `key = value` format.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base directory for run outputs (the DELTA_NLS_OUTPUT_DIR variable wins).
    #[arg(long, global = true)]
    pub output_dir: Option<String>,
    /// Extra `section.key=value` assignments, applied last.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct PhysicsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub h_outer: Option<f64>,
    #[arg(long)]
    pub h_inner: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One soliton through the impurity: mass partition series and snapshots.
    Scatter(PhysicsArgs),
    /// Scattering runs over an (alpha, v) grid.
    Sweep {
        #[command(flatten)]
        physics: PhysicsArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        velocities: Option<Vec<f64>>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Split a scattered soliton and resolve each piece under the free flow.
    Resolve(PhysicsArgs),
    /// Free evolution of `alpha sech x`.
    FreeResolution {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
    },
    /// Linear splitting of a smooth wave packet.
    LinearCheck {
        #[arg(long, value_delimiter = ',')]
        velocities: Option<Vec<f64>>,
    },
    /// Closed-form predictions over the alpha grid.
    Theory {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        v: Option<f64>,
    },
    /// Regression of a sweep CSV.
    Fit {
        #[arg(long)]
        input: Option<String>,
        /// `power-law` or `exponential`.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        v_min: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
    },
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::Scatter(_) => ExperimentKind::Scatter,
            Command::Sweep { .. } => ExperimentKind::Sweep,
            Command::Resolve(_) => ExperimentKind::Resolve,
            Command::FreeResolution { .. } => ExperimentKind::FreeResolution,
            Command::LinearCheck { .. } => ExperimentKind::LinearCheck,
            Command::Theory { .. } => ExperimentKind::Theory,
            Command::Fit { .. } => ExperimentKind::Fit,
        }
    }
}

fn apply_physics(cfg: &mut ExperimentConfig, p: &PhysicsArgs) {
    if let Some(q) = p.q {
        cfg.physics.q = q;
    }
    if let Some(v) = p.v {
        cfg.physics.v = v;
    }
    if let Some(x0) = p.x0 {
        cfg.physics.x0 = x0;
    }
    if let Some(dt) = p.dt {
        cfg.step.dt = dt;
    }
    if let Some(t) = p.t_final {
        cfg.run.t_final = Some(t);
    }
    if let Some(r) = p.half_width {
        cfg.mesh.half_width = r;
    }
    if let Some(h) = p.h_outer {
        cfg.mesh.h_outer = h;
    }
    if let Some(h) = p.h_inner {
        cfg.mesh.h_inner = h;
    }
}

/// The effective config for a parsed command line.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
    }
    cfg.kind = cli.command.kind();
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    match &cli.command {
        Command::Scatter(p) | Command::Resolve(p) => apply_physics(&mut cfg, p),
        Command::Sweep {
            physics,
            alphas,
            velocities,
            workers,
        } => {
            apply_physics(&mut cfg, physics);
            if let Some(a) = alphas {
                cfg.sweep.alphas = a.clone();
            }
            if let Some(v) = velocities {
                cfg.sweep.velocities = v.clone();
            }
            if let Some(w) = workers {
                cfg.sweep.workers = *w;
            }
        }
        Command::FreeResolution { alpha, t_final } => {
            if let Some(a) = alpha {
                cfg.free.alpha = *a;
            }
            if let Some(t) = t_final {
                cfg.free.t_final = *t;
            }
        }
        Command::LinearCheck { velocities } => {
            if let Some(v) = velocities {
                cfg.linear.velocities = v.clone();
            }
        }
        Command::Theory { alphas, v } => {
            if let Some(a) = alphas {
                cfg.sweep.alphas = a.clone();
            }
            if let Some(v) = v {
                cfg.physics.v = *v;
            }
        }
        Command::Fit {
            input,
            model,
            v_min,
            v_max,
        } => {
            if let Some(i) = input {
                cfg.fit.input = i.clone();
            }
            if let Some(m) = model {
                cfg.fit.model = m.parse::<FitModel>().map_err(|message| Error::Parse { line: 0, message })?;
            }
            if let Some(v) = v_min {
                cfg.fit.v_min = *v;
            }
            if let Some(v) = v_max {
                cfg.fit.v_max = *v;
            }
        }
    }
    for s in &cli.set {
        cfg.set_dotted(s)?;
    }
    cfg.kind = cli.command.kind();
    cfg.validate()?;
    Ok(cfg)
}

/// Runs `cfg` in a fresh directory under `base`; returns the directory and
/// a short human-readable report.
pub fn execute(cfg: &ExperimentConfig, base: &Path) -> Result<(PathBuf, String)> {
    if cfg.kind == ExperimentKind::Fit && cfg.fit.input.is_empty() {
        return Err(crate::error::invalid("input", "fit needs a sweep CSV (--input)"));
    }
    let dir = output::create_run_dir(base, cfg)?;
    let mut report = String::new();
    match cfg.kind {
        ExperimentKind::Scatter => {
            let out = experiments::run_scatter(cfg)?;
            output::write_scatter(&dir, &out)?;
            let (t, r, b) = out.fractions;
            let _ = writeln!(report, "T = {t:.6}  R = {r:.6}  B = {b:.3e}  mass drift = {:.2e}", out.max_drift);
            if let Some((tm, d)) = out.min_profile {
                let _ = writeln!(report, "closest to split profile at t = {tm:.4} (distance {d:.4e})");
            }
        }
        ExperimentKind::Sweep => {
            let rows = experiments::run_sweep(cfg)?;
            output::write_sweep(&dir, &rows)?;
            for r in &rows {
                match &r.failure {
                    None => {
                        let _ = writeln!(
                            report,
                            "alpha = {:<5} v = {:<5} T = {:.6}  R = {:.6}  B = {:.3e}",
                            r.alpha, r.v, r.transmitted, r.reflected, r.trapped
                        );
                    }
                    Some(e) => {
                        let _ = writeln!(report, "alpha = {:<5} v = {:<5} failed: {e}", r.alpha, r.v);
                    }
                }
            }
        }
        ExperimentKind::Resolve => {
            let out = experiments::run_resolve(cfg)?;
            output::write_resolve(&dir, &out)?;
            let _ = writeln!(
                report,
                "split profile reached at t = {:.4}; NLS_q vs NLS_0 deviation {:.3e}; cut at t = {:.4}",
                out.best_time, out.deviation, out.cut_time
            );
            for s in &out.sides {
                match (&s.result, &s.skipped) {
                    (Some(r), _) => {
                        let _ = writeln!(
                            report,
                            "{:<11} predicted {:.4}  measured {:.4}  stabilized {}",
                            s.side.name(),
                            s.predicted,
                            r.measured_amplitude,
                            r.stabilized
                        );
                    }
                    (None, Some(why)) => {
                        let _ = writeln!(report, "{:<11} skipped: {why}", s.side.name());
                    }
                    (None, None) => {}
                }
            }
        }
        ExperimentKind::FreeResolution => {
            let out = experiments::run_free_resolution(cfg)?;
            output::write_free(&dir, &out)?;
            let _ = writeln!(
                report,
                "amplitude {:.4} (predicted {:.4}), phase deviation {} (predicted {}), decay exponent {:.3}",
                out.amplitude.mean,
                out.asymptote.0,
                out.phase_mean.map_or("n/a".into(), |p| format!("{p:.4}")),
                out.asymptote.1.map_or("n/a".into(), |p| format!("{p:.4}")),
                out.decay_exponent
            );
        }
        ExperimentKind::LinearCheck => {
            let rows = experiments::run_linear_check(cfg)?;
            output::write_linear(&dir, &rows)?;
            for r in &rows {
                let _ = writeln!(
                    report,
                    "v = {:<4} split error {:.3e} (bound {:.3e})  |T - T_q| = {:.3e}",
                    r.v, r.split_error, r.bound, r.deviation
                );
            }
        }
        ExperimentKind::Theory => {
            let rows = experiments::run_theory(cfg)?;
            output::write_theory(&dir, &rows)?;
            for r in &rows {
                let _ = writeln!(
                    report,
                    "alpha = {:<5} T_q = {:.4}  A_T = {:.4}  A_R = {:.4}",
                    r.alpha, r.quantum_rate, r.prediction.amplitude_t, r.prediction.amplitude_r
                );
            }
        }
        ExperimentKind::Fit => {
            let text = std::fs::read_to_string(&cfg.fit.input)?;
            let fits = experiments::run_fit(cfg, &text)?;
            output::write_fit(&dir, cfg.fit.model, &fits)?;
            for (alpha, f) in &fits {
                let _ = writeln!(
                    report,
                    "alpha = {:<5} coefficient {:.4}  exponent {:.4}  residual {:.2e}  points {}",
                    alpha,
                    f.coefficient,
                    f.exponent,
                    f.residual,
                    f.points_used.len()
                );
            }
        }
    }
    Ok((dir, report))
}

/// Parses the process arguments, runs, and maps errors to exit status 1.
pub fn main_entry() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = || -> Result<(PathBuf, String)> {
        let cfg = resolve_config(&cli)?;
        execute(&cfg, &output::output_base(&cfg))
    };
    match run() {
        Ok((dir, report)) => {
            print!("{report}");
            println!("output: {}", dir.display());
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
