//! End-to-end experiment pipelines.
//!
//! Each function takes an [`ExperimentConfig`] and returns an in-memory
//! outcome; writing files is left to [`crate::output`].

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FitModel};
use crate::error::{invalid, Error, Result};
use crate::fem::{self, ComplexField, Mesh1D};
use crate::fitting::{self, FitResult};
use crate::measure::{
    self, MassPartition, OscillationAverage, ResolutionResult, ScatterRecorder, SeriesRow, Side,
};
use crate::stepper::{Observer, Sample, StepConfig, Stepper};
use crate::theory::{self, PhysParams, SplitPrediction};

/// Result of one scattering run.
#[derive(Debug, Clone)]
pub struct ScatterOutcome {
    pub params: PhysParams,
    pub rows: Vec<SeriesRow>,
    pub final_partition: MassPartition,
    /// Normalized `(T, R, B)` at the final time.
    pub fractions: (f64, f64, f64),
    /// `|x0| / v`.
    pub interaction_time: f64,
    /// `(time, distance)` of the closest approach to the split profile.
    pub min_profile: Option<(f64, f64)>,
    pub best_state: Option<ComplexField>,
    pub snapshots: Vec<(f64, ComplexField)>,
    pub final_state: ComplexField,
    pub final_time: f64,
    pub max_drift: f64,
}

/// Evolves the configured soliton through the impurity up to `t_end`.
pub fn scatter_until(cfg: &ExperimentConfig, params: PhysParams, t_end: f64, track_profile: bool) -> Result<ScatterOutcome> {
    params.validate_scattering()?;
    if !(t_end > 0.0) {
        return Err(invalid("t_final", format!("must be positive, got {t_end}")));
    }
    let mesh = Arc::new(cfg.mesh.build()?);
    let step = StepConfig { q: params.q, ..cfg.step.clone() };
    let mut stepper = Stepper::new(mesh.clone(), step)?;
    let u0 = fem::project(&mesh, |x| theory::soliton_exact(&params, x, 0.0));
    let m0 = fem::l2_norm_sq(&u0);

    let track = track_profile && params.amplitude == 1.0;
    let mut recorder = ScatterRecorder::new(params, track);
    let dt = cfg.step.dt;
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let stride = cfg.run.sample_stride.max(1);
    let mut pending: Vec<f64> = cfg.run.snapshot_times.iter().copied().filter(|s| *s <= t_end + 0.5 * dt).collect();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let mut snapshots = Vec::new();
    let mut max_drift: f64 = 0.0;

    let mut u = u0;
    let mut take_snapshots = |t: f64, u: &ComplexField, pending: &mut Vec<f64>| {
        while pending.last().is_some_and(|s| t >= s - 0.5 * dt) {
            pending.pop();
            snapshots.push((t, u.clone()));
        }
    };
    recorder.observe(0.0, &u)?;
    take_snapshots(0.0, &u, &mut pending);
    for k in 1..=steps {
        stepper.advance(&mut u.values)?;
        let t = k as f64 * dt;
        take_snapshots(t, &u, &mut pending);
        if k % stride == 0 || k == steps {
            recorder.observe(t, &u)?;
            let drift = ((fem::l2_norm_sq(&u) - m0) / m0).abs();
            max_drift = max_drift.max(drift);
            if drift > cfg.run.max_mass_drift {
                return Err(Error::MassDrift {
                    drift,
                    time: t,
                    bound: cfg.run.max_mass_drift,
                });
            }
        }
    }
    let final_time = steps as f64 * dt;
    let final_partition = measure::mass_partition(&u, final_time)?;
    let (min_profile, best_state) = match recorder.best.take() {
        Some((t, d, state)) => (Some((t, d)), Some(state)),
        None => (None, None),
    };
    Ok(ScatterOutcome {
        params,
        rows: recorder.rows,
        fractions: final_partition.fractions(),
        final_partition,
        interaction_time: params.x0.abs() / params.v,
        min_profile,
        best_state,
        snapshots,
        final_state: u,
        final_time,
        max_drift,
    })
}

/// Scattering run with the configured physics and end time.
pub fn run_scatter(cfg: &ExperimentConfig) -> Result<ScatterOutcome> {
    let t_end = cfg.run.end_time(&cfg.physics);
    scatter_until(cfg, cfg.physics, t_end, true)
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub v: f64,
    pub q: f64,
    pub transmitted: f64,
    pub reflected: f64,
    pub trapped: f64,
    pub mass_drift: f64,
    /// `None` on success, otherwise the failure message.
    pub failure: Option<String>,
}

pub const SWEEP_HEADER: &str = "alpha,v,q,transmitted,reflected,trapped,mass_drift,status";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let status = self
            .failure
            .as_deref()
            .map_or("ok".to_string(), |m| format!("error: {}", m.replace([',', '\n'], ";")));
        format!(
            "{},{},{},{},{},{},{},{}",
            self.alpha, self.v, self.q, self.transmitted, self.reflected, self.trapped, self.mass_drift, status
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Independent scattering runs over the `(alpha, v)` grid, sorted by
/// `(alpha, v)`. A failed run is recorded in its row and the sweep goes on.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.sweep.alphas.is_empty() || cfg.sweep.velocities.is_empty() {
        return Err(invalid("sweep", "alphas and velocities must be nonempty"));
    }
    let grid: Vec<(f64, f64)> = cfg
        .sweep
        .alphas
        .iter()
        .flat_map(|&a| cfg.sweep.velocities.iter().map(move |&v| (a, v)))
        .collect();
    let one = |&(alpha, v): &(f64, f64)| -> SweepRow {
        let params = PhysParams {
            q: alpha * v,
            v,
            ..cfg.physics
        };
        let t_end = cfg.run.end_time(&params);
        let mut local = cfg.clone();
        local.run.snapshot_times.clear();
        match scatter_until(&local, params, t_end, false) {
            Ok(out) => SweepRow {
                alpha,
                v,
                q: params.q,
                transmitted: out.fractions.0,
                reflected: out.fractions.1,
                trapped: out.fractions.2,
                mass_drift: out.max_drift,
                failure: None,
            },
            Err(e) => SweepRow {
                alpha,
                v,
                q: params.q,
                transmitted: f64::NAN,
                reflected: f64::NAN,
                trapped: f64::NAN,
                mass_drift: f64::NAN,
                failure: Some(e.to_string()),
            },
        }
    };
    let mut rows: Vec<SweepRow> = if cfg.sweep.workers == 1 {
        grid.iter().map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.sweep.workers)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| grid.par_iter().map(one).collect())
    };
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.v.total_cmp(&b.v)));
    Ok(rows)
}

/// Resolution of one outgoing piece.
#[derive(Debug, Clone)]
pub struct SideOutcome {
    pub side: Side,
    pub predicted: f64,
    pub piece_mass: f64,
    pub momentum: f64,
    pub result: Option<ResolutionResult>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ResolveOutcome {
    pub params: PhysParams,
    pub prediction: SplitPrediction,
    pub best_time: f64,
    pub best_distance: f64,
    pub best_state: ComplexField,
    /// `max ||NLS_q u - NLS_0 u||` from the best state.
    pub deviation: f64,
    pub cut_time: f64,
    pub cut_state: ComplexField,
    pub sides: Vec<SideOutcome>,
}

/// Scatter, locate the split, check that the impurity no longer matters,
/// then cut the field at the origin and resolve each piece under the free
/// flow.
///
/// The cut happens once both pieces are `separation` away from the origin
/// (and never before the closest approach to the split profile), so the
/// tail of one piece does not leak into the other side.
pub fn run_resolve(cfg: &ExperimentConfig) -> Result<ResolveOutcome> {
    let p = cfg.physics;
    if p.amplitude != 1.0 {
        return Err(invalid("amplitude", "the resolve pipeline uses unit-amplitude solitons"));
    }
    let prediction = theory::split_prediction(&p)?;
    let t_cut = (p.x0.abs() + cfg.resolve.separation) / p.v;
    let scan = scatter_until(cfg, p, t_cut, true)?;
    let (best_time, best_distance) = scan.min_profile.ok_or_else(|| Error::InsufficientData("no profile samples".into()))?;
    let best_state = scan.best_state.clone().expect("best state accompanies min_profile");
    let step = StepConfig { q: p.q, ..cfg.step.clone() };
    let deviation = measure::nls_q_vs_nls_0_deviation(&best_state, cfg.resolve.deviation_span, &step)?;
    let (cut_time, cut_state) = if best_time > scan.final_time {
        (best_time, best_state.clone())
    } else {
        (scan.final_time, scan.final_state.clone())
    };

    let settings = cfg.resolve.settings();
    let resolve_side = |side: Side, predicted: f64| -> Result<SideOutcome> {
        let restricted = measure::restrict_to_side(&cut_state, side);
        let piece_mass = fem::l2_norm_sq(&restricted);
        let mut out = SideOutcome {
            side,
            predicted,
            piece_mass,
            momentum: 0.0,
            result: None,
            skipped: None,
        };
        if predicted <= 0.0 {
            out.skipped = Some("below the soliton threshold".into());
            return Ok(out);
        }
        let piece = match measure::truncate_reembed(&cut_state, side, p.v, cfg.resolve.r_big, cfg.resolve.n_big) {
            Ok(piece) => piece,
            Err(e @ Error::EmptySide { .. }) => {
                out.skipped = Some(e.to_string());
                return Ok(out);
            }
            Err(e) => return Err(e),
        };
        out.momentum = measure::momentum(&piece);
        let mut result = measure::resolve_amplitude(&piece, &settings)?;
        result.side = Some(side);
        out.result = Some(result);
        Ok(out)
    };
    let (right, left) = rayon::join(
        || resolve_side(Side::Right, prediction.amplitude_t),
        || resolve_side(Side::Left, prediction.amplitude_r),
    );
    Ok(ResolveOutcome {
        params: p,
        prediction,
        best_time,
        best_distance,
        best_state,
        deviation,
        cut_time,
        cut_state,
        sides: vec![right?, left?],
    })
}

/// One recorded time of a free-resolution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeRow {
    pub time: f64,
    pub center_abs: f64,
    pub sup: f64,
    pub phase_deviation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FreeOutcome {
    pub alpha: f64,
    /// Predicted `(amplitude, phase)`.
    pub asymptote: (f64, Option<f64>),
    pub rows: Vec<FreeRow>,
    pub amplitude: OscillationAverage,
    /// Mean phase deviation over the amplitude averaging window.
    pub phase_mean: Option<f64>,
    /// `p` in a fit `sup |u| ~ t^{-p}` over the tail of the run.
    pub decay_exponent: f64,
    pub max_drift: f64,
    pub max_boundary_mass: f64,
}

/// Free evolution of `alpha sech x`.
pub fn run_free_resolution(cfg: &ExperimentConfig) -> Result<FreeOutcome> {
    let f = &cfg.free;
    let alpha = f.alpha;
    let asymptote = theory::free_resolution_asymptote(alpha)?;
    let mesh = Arc::new(Mesh1D::uniform(f.half_width, f.h)?);
    let u0 = fem::project(&mesh, |x| Complex64::new(alpha / x.cosh(), 0.0));
    let m0 = fem::l2_norm_sq(&u0);
    let step = StepConfig {
        dt: f.dt,
        q: 0.0,
        ..cfg.step.clone()
    };
    let mut stepper = Stepper::new(mesh, step)?;
    let steps = (f.t_final / f.dt - 1e-9).ceil().max(1.0) as usize;

    let mut u = u0;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut sups = Vec::with_capacity(steps + 1);
    let mut max_drift: f64 = 0.0;
    let mut max_boundary: f64 = 0.0;
    samples.push(Sample {
        time: 0.0,
        mass: m0,
        center: u.at_origin(),
    });
    sups.push((0.0, u.sup_norm()));
    for k in 1..=steps {
        stepper.advance(&mut u.values)?;
        let t = k as f64 * f.dt;
        let edge = measure::boundary_mass(&u);
        max_boundary = max_boundary.max(edge);
        if edge > f.boundary_mass {
            return Err(Error::BoundaryContamination { mass: edge, time: t });
        }
        let mass = fem::l2_norm_sq(&u);
        max_drift = max_drift.max(((mass - m0) / m0).abs());
        samples.push(Sample {
            time: t,
            mass,
            center: u.at_origin(),
        });
        sups.push((t, u.sup_norm()));
    }
    if max_drift > cfg.run.max_mass_drift {
        return Err(Error::MassDrift {
            drift: max_drift,
            time: f.t_final,
            bound: cfg.run.max_mass_drift,
        });
    }

    let amplitude = measure::oscillation_average(&sups, f.skip_fraction, 0.01)?;
    let phases = if alpha > 0.5 {
        Some(measure::center_phase_deviation(&samples, alpha)?)
    } else {
        None
    };
    let phase_mean = phases.as_ref().map(|ph| {
        let window: Vec<(f64, f64)> = ph
            .iter()
            .copied()
            .filter(|(t, _)| *t >= amplitude.window.0 && *t <= amplitude.window.1)
            .collect();
        measure::time_mean(&window)
    });
    let t_skip = f.skip_fraction * f.t_final;
    let (xs, ys): (Vec<f64>, Vec<f64>) = sups
        .iter()
        .filter(|(t, s)| *t >= t_skip && *t > 0.0 && *s > 0.0)
        .map(|&(t, s)| (t.ln(), s.ln()))
        .unzip();
    let (_, slope, _) = fitting::linear_regression(&xs, &ys)?;
    let rows = samples
        .iter()
        .zip(&sups)
        .enumerate()
        .map(|(i, (s, &(_, sup)))| FreeRow {
            time: s.time,
            center_abs: s.center.norm(),
            sup,
            phase_deviation: phases.as_ref().map(|ph| ph[i].1),
        })
        .collect();
    Ok(FreeOutcome {
        alpha,
        asymptote,
        rows,
        amplitude,
        phase_mean,
        decay_exponent: -slope,
        max_drift,
        max_boundary_mass: max_boundary,
    })
}

/// Smooth bump `exp(-1/(1-s²))`, `s = (x - center)/width`, zero for `|s| >= 1`.
pub fn bump(x: f64, center: f64, width: f64) -> f64 {
    let s = (x - center) / width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Largest divisor of `1/2` of the form `1/(2n)` not exceeding `h`.
pub fn spacing_below(h: f64) -> f64 {
    let n = (0.5 / h - 1e-9).ceil().max(1.0);
    0.5 / n
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub v: f64,
    pub q: f64,
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Largest split-formula error over the checked times.
    pub split_error: f64,
    /// `||∂ψ|| / v` with `||ψ|| = 1`.
    pub bound: f64,
    pub transmitted: f64,
    pub quantum_rate: f64,
    pub deviation: f64,
}

pub const LINEAR_HEADER: &str = "v,q,h,dt,t_final,split_error,bound,transmitted,quantum_rate,deviation";

impl LinearRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.v, self.q, self.h, self.dt, self.t_final, self.split_error, self.bound, self.transmitted, self.quantum_rate, self.deviation
        )
    }
}

/// Linear evolution of `e^{ivx} ψ` past the impurity, compared with the
/// free-flow split `t F[e^{ivx}ψ]` (right) and `r F[e^{-ivx}ψ(-x)] + F[e^{ivx}ψ]`
/// (left), and the transmitted mass compared with `T_q(v)`.
pub fn linear_check_at(cfg: &ExperimentConfig, v: f64) -> Result<LinearRow> {
    let l = &cfg.linear;
    if !(v > 0.0) {
        return Err(invalid("v", format!("velocity must be positive, got {v}")));
    }
    let q = l.alpha * v;
    let h = spacing_below(l.kh / v);
    let mesh = Arc::new(Mesh1D::uniform(l.half_width, h)?);
    let dt = l.dt_scale / (v * v);
    let t_final = 2.0 * l.center.abs() / v;
    let coeff = theory::delta_scattering(q, v)?;

    let psi = fem::project(&mesh, |x| Complex64::new(bump(x, l.center, l.width), 0.0));
    let norm = fem::l2_norm_sq(&psi).sqrt();
    let nodes = mesh.nodes().to_vec();
    let widths = mesh.widths();
    let grad: f64 = psi
        .values
        .windows(2)
        .zip(&widths)
        .map(|(w, h)| (w[1] - w[0]).norm_sqr() / h)
        .sum::<f64>()
        .sqrt()
        / norm;

    let incoming: Vec<Complex64> = nodes
        .iter()
        .map(|&x| Complex64::from_polar(bump(x, l.center, l.width) / norm, v * x))
        .collect();
    let mirrored: Vec<Complex64> = nodes
        .iter()
        .map(|&x| Complex64::from_polar(bump(-x, l.center, l.width) / norm, -v * x))
        .collect();
    let mut u = incoming.clone();
    let mut free_in = incoming;
    let mut free_mirror = mirrored;
    let mut with_q = Stepper::new(mesh.clone(), StepConfig::linear(dt, q))?;
    let mut free = Stepper::new(mesh.clone(), StepConfig::linear(dt, 0.0))?;

    let steps = (t_final / dt - 1e-9).ceil().max(1.0) as usize;
    let checks = l.checks.max(1);
    let origin = mesh.origin_index();
    let mut split_error: f64 = 0.0;
    for k in 1..=steps {
        with_q.advance(&mut u)?;
        free.advance(&mut free_in)?;
        free.advance(&mut free_mirror)?;
        if (k * checks) % steps < checks || k == steps {
            let diff: Vec<Complex64> = (0..nodes.len())
                .map(|i| {
                    let predicted = if i < origin {
                        coeff.r * free_mirror[i] + free_in[i]
                    } else {
                        coeff.t * free_in[i]
                    };
                    u[i] - predicted
                })
                .collect();
            let d = ComplexField::new(mesh.clone(), diff)?;
            split_error = split_error.max(fem::l2_norm_sq(&d).sqrt());
        }
    }
    let final_field = ComplexField::new(mesh, u)?;
    let transmitted = measure::mass_in_region(&final_field, 0.0, f64::INFINITY)? / fem::l2_norm_sq(&final_field);
    let quantum_rate = theory::quantum_transmission_rate(q, v)?;
    Ok(LinearRow {
        v,
        q,
        h,
        dt,
        t_final: steps as f64 * dt,
        split_error,
        bound: grad / v,
        transmitted,
        quantum_rate,
        deviation: (transmitted - quantum_rate).abs(),
    })
}

pub fn run_linear_check(cfg: &ExperimentConfig) -> Result<Vec<LinearRow>> {
    cfg.linear.velocities.iter().map(|&v| linear_check_at(cfg, v)).collect()
}

/// Closed-form predictions at one `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub alpha: f64,
    pub q: f64,
    pub v: f64,
    pub quantum_rate: f64,
    pub prediction: SplitPrediction,
    pub transmitted_threshold: f64,
    pub reflected_threshold: f64,
}

pub const THEORY_HEADER: &str =
    "alpha,q,v,quantum_rate,amplitude_t,amplitude_r,phase_t,phase_r,transmitted_threshold,reflected_threshold";

impl TheoryRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.alpha,
            self.q,
            self.v,
            self.quantum_rate,
            self.prediction.amplitude_t,
            self.prediction.amplitude_r,
            opt(self.prediction.phase_t),
            opt(self.prediction.phase_r),
            self.transmitted_threshold,
            self.reflected_threshold
        )
    }
}

/// Predictions for every `alpha` in the sweep grid at the configured `v`.
pub fn run_theory(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    let v = cfg.physics.v;
    cfg.sweep
        .alphas
        .iter()
        .map(|&alpha| {
            let p = PhysParams {
                q: alpha * v,
                amplitude: 1.0,
                ..cfg.physics
            };
            Ok(TheoryRow {
                alpha,
                q: p.q,
                v,
                quantum_rate: theory::quantum_transmission_rate(p.q, v)?,
                prediction: theory::split_prediction(&p)?,
                transmitted_threshold: theory::transmitted_threshold(p.q),
                reflected_threshold: theory::reflected_threshold(p.q),
            })
        })
        .collect()
}

/// Fits every `alpha` group of a sweep CSV within `[v_min, v_max]`.
pub fn run_fit(cfg: &ExperimentConfig, sweep_csv: &str) -> Result<Vec<(f64, FitResult)>> {
    let rows = fitting::read_columns(sweep_csv, &["alpha", "v", "transmitted", "trapped"])?;
    let mut alphas: Vec<f64> = rows.iter().map(|r| r[0]).filter(|a| a.is_finite()).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let mut fits = Vec::new();
    for alpha in alphas {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r[0] == alpha && r[1] >= cfg.fit.v_min && r[1] <= cfg.fit.v_max)
            .filter(|r| r[2].is_finite() && r[3].is_finite())
            .map(|r| match cfg.fit.model {
                FitModel::PowerLaw => (r[1], r[2]),
                FitModel::Exponential => (r[1], r[3]),
            })
            .collect();
        let fit = match cfg.fit.model {
            FitModel::PowerLaw => fitting::fit_power_law(&pts, alpha)?,
            FitModel::Exponential => fitting::fit_exponential(&pts)?,
        };
        fits.push((alpha, fit));
    }
    if fits.is_empty() {
        return Err(Error::InsufficientData("no rows to fit".into()));
    }
    Ok(fits)
}
