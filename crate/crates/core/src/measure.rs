//! Measurements on computed fields and trajectories.
//!
//! Region masses use the exact `∫|u_h|²` of the piecewise-linear
//! interpolant, so the three regions split the discrete mass `u* M u`
//! without remainder.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fem::{self, element_mass, ComplexField, Mesh1D};
use crate::stepper::{Observer, Sample, StepConfig, Stepper};
use crate::theory::{self, PhysParams};

/// Edge of the trapped region `(-CUTOFF, CUTOFF)`.
pub const CUTOFF: f64 = 0.5;

/// Mass of `u` on `[a, b]`; both ends must be mesh nodes. Infinite ends
/// stand for the corresponding end of the mesh.
pub fn mass_in_region(u: &ComplexField, a: f64, b: f64) -> Result<f64> {
    if !(a < b) {
        return Err(invalid("region", format!("need a < b, got [{a}, {b}]")));
    }
    let mesh = u.mesh();
    let locate = |x: f64| -> Result<usize> {
        if x == f64::NEG_INFINITY {
            Ok(0)
        } else if x == f64::INFINITY {
            Ok(mesh.len() - 1)
        } else {
            mesh.index_of(x).ok_or(Error::UnalignedEndpoint(x))
        }
    };
    let (i, j) = (locate(a)?, locate(b)?);
    let nodes = mesh.nodes();
    Ok((i..j)
        .map(|e| element_mass(nodes[e + 1] - nodes[e], u.values[e], u.values[e + 1]))
        .sum())
}

/// Halves of the region masses right of `1/2`, left of `-1/2` and between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassPartition {
    pub time: f64,
    pub transmitted: f64,
    pub reflected: f64,
    pub trapped: f64,
}

impl MassPartition {
    /// Half the total mass.
    pub fn total(&self) -> f64 {
        self.transmitted + self.reflected + self.trapped
    }

    /// `(T, R, B)` normalized to sum to one.
    pub fn fractions(&self) -> (f64, f64, f64) {
        let total = self.total();
        if total == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        (self.transmitted / total, self.reflected / total, self.trapped / total)
    }
}

pub fn mass_partition(u: &ComplexField, time: f64) -> Result<MassPartition> {
    Ok(MassPartition {
        time,
        transmitted: 0.5 * mass_in_region(u, CUTOFF, f64::INFINITY)?,
        reflected: 0.5 * mass_in_region(u, f64::NEG_INFINITY, -CUTOFF)?,
        trapped: 0.5 * mass_in_region(u, -CUTOFF, CUTOFF)?,
    })
}

/// Outcome of a stabilization test on a time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stabilization {
    Stable { value: f64, spread: f64 },
    NotYet { spread: f64 },
}

impl Stabilization {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Stabilization::Stable { value, .. } => Some(value),
            Stabilization::NotYet { .. } => None,
        }
    }
}

/// Mean over the last `window` of `series` if every sample in that window
/// lies within `tol` of it. The series must span at least two windows.
pub fn stabilized_limit(series: &[(f64, f64)], window: f64, tol: f64) -> Result<Stabilization> {
    if !(window > 0.0) {
        return Err(invalid("window", "window must be positive"));
    }
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return Err(Error::InsufficientData("empty series".into()));
    };
    if last.0 - first.0 < 2.0 * window {
        return Err(Error::InsufficientData(format!(
            "series spans {} but two windows of {window} are needed",
            last.0 - first.0
        )));
    }
    let tail: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= last.0 - window)
        .map(|&(_, v)| v)
        .collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok(if spread <= tol {
        Stabilization::Stable { value: mean, spread }
    } else {
        Stabilization::NotYet { spread }
    })
}

/// Two-soliton profile expected right after the interaction:
/// `e^{it(1-v²)/2} [t_q e^{ivx} sech(x-x0-vt) + r_q e^{-ivx} sech(x+x0+vt)]`.
pub fn expected_profile(p: &PhysParams, x: f64, t: f64) -> Result<Complex64> {
    let c = theory::delta_scattering(p.q, p.v)?;
    let common = 0.5 * t * (1.0 - p.v * p.v) + p.phase;
    let right = c.t * Complex64::from_polar(1.0 / (x - p.x0 - p.v * t).cosh(), common + p.v * x);
    let left = c.r * Complex64::from_polar(1.0 / (x + p.x0 + p.v * t).cosh(), common - p.v * x);
    Ok(right + left)
}

/// Discrete `L²` distance between `u` and the expected split profile.
pub fn profile_distance(u: &ComplexField, p: &PhysParams, t: f64) -> Result<f64> {
    let c = theory::delta_scattering(p.q, p.v)?;
    let common = 0.5 * t * (1.0 - p.v * p.v) + p.phase;
    let profile = fem::project(u.mesh(), |x| {
        c.t * Complex64::from_polar(1.0 / (x - p.x0 - p.v * t).cosh(), common + p.v * x)
            + c.r * Complex64::from_polar(1.0 / (x + p.x0 + p.v * t).cosh(), common - p.v * x)
    });
    Ok(fem::l2_norm_sq(&u.sub(&profile)?).sqrt())
}

/// `Im ∫ ū u_x dx` of the interpolant.
pub fn momentum(u: &ComplexField) -> f64 {
    let v = &u.values;
    (0..v.len() - 1)
        .map(|e| 0.5 * ((v[e].conj() + v[e + 1].conj()) * (v[e + 1] - v[e])).im)
        .sum()
}

/// `∫ x |u|² / ∫ |u|²`, using trapezoid weights.
pub fn mass_centroid(u: &ComplexField) -> f64 {
    let nodes = u.mesh().nodes();
    let w = u.mesh().widths();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, z) in u.values.iter().enumerate() {
        let left = if i > 0 { w[i - 1] } else { 0.0 };
        let right = if i < w.len() { w[i] } else { 0.0 };
        let m = 0.5 * (left + right) * z.norm_sqr();
        num += nodes[i] * m;
        den += m;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Reflected piece, `x < 0`.
    Left,
    /// Transmitted piece, `x > 0`.
    Right,
}

impl Side {
    pub fn name(&self) -> &'static str {
        match self {
            Side::Left => "reflected",
            Side::Right => "transmitted",
        }
    }
}

/// The part of `u` on one side of the origin (the origin node itself set to
/// zero), as a field on the original mesh.
pub fn restrict_to_side(u: &ComplexField, side: Side) -> ComplexField {
    let origin = u.mesh().origin_index();
    let mut piece = u.clone();
    for (i, z) in piece.values.iter_mut().enumerate() {
        let keep = match side {
            Side::Left => i < origin,
            Side::Right => i > origin,
        };
        if !keep {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    piece
}

/// Cuts `u` at the origin, removes the velocity `±v` of the chosen piece,
/// and embeds it at the center of a fresh uniform mesh of half-width `r_big`
/// split into `n_big` equal elements, zero elsewhere.
///
/// The piece is recentered on its mass centroid and rescaled so its discrete
/// mass equals that of the restriction.
pub fn truncate_reembed(
    u: &ComplexField,
    side: Side,
    v: f64,
    r_big: f64,
    n_big: usize,
) -> Result<ComplexField> {
    let total = fem::l2_norm_sq(u);
    let mut piece = restrict_to_side(u, side);
    let piece_mass = fem::l2_norm_sq(&piece);
    if total == 0.0 || piece_mass < 1e-6 * total {
        return Err(Error::EmptySide {
            fraction: if total > 0.0 { piece_mass / total } else { 0.0 },
        });
    }
    if !(r_big > u.mesh().half_width()) {
        return Err(invalid(
            "R_big",
            format!("must exceed the original half-width {}", u.mesh().half_width()),
        ));
    }
    let k = match side {
        Side::Right => -v,
        Side::Left => v,
    };
    let nodes = u.mesh().nodes().to_vec();
    for (z, &x) in piece.values.iter_mut().zip(&nodes) {
        *z *= Complex64::from_polar(1.0, k * x);
    }
    let center = mass_centroid(&piece);
    if n_big < 4 {
        return Err(invalid("n_big", format!("need at least 4 elements, got {n_big}")));
    }
    let mesh = Arc::new(Mesh1D::uniform(r_big, 2.0 * r_big / n_big as f64)?);
    let mut embedded = fem::project(&mesh, |x| piece.eval(x + center));
    let mass = fem::l2_norm_sq(&embedded);
    if mass == 0.0 {
        return Err(Error::EmptySide { fraction: 0.0 });
    }
    embedded.scale(Complex64::new((piece_mass / mass).sqrt(), 0.0));
    Ok(embedded)
}

/// Measured amplitude of one outgoing piece.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionResult {
    pub side: Option<Side>,
    pub measured_amplitude: f64,
    /// Averaging interval `(start, end)`.
    pub window: (f64, f64),
    pub stabilized: bool,
    /// Time at which the boundary check ended the run, if it did.
    pub contaminated_at: Option<f64>,
    /// `(t, sup |u|)` for every recorded step.
    pub amplitude_series: Vec<(f64, f64)>,
}

/// Settings for the free-flow amplitude resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolveSettings {
    /// Longest evolution time.
    pub t_max: f64,
    pub step: StepConfig,
    /// Averaging starts no earlier than this fraction of the elapsed time.
    pub skip_fraction: f64,
    /// Relative spread of consecutive period means that counts as stabilized.
    pub stabilization_tol: f64,
    /// Largest tolerated mass within one unit of either boundary.
    pub boundary_mass: f64,
    /// Stop as soon as the average has stabilized.
    pub early_stop: bool,
    /// Time between stabilization checks when `early_stop` is set.
    pub check_interval: f64,
    /// End the run at the first boundary contamination instead of failing.
    pub stop_on_contamination: bool,
}

impl ResolveSettings {
    pub fn new(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            step: StepConfig {
                iterations: 8,
                sweep_tol: Some(1e-13),
                ..StepConfig::new(dt, 0.0)
            },
            skip_fraction: 0.25,
            stabilization_tol: 0.01,
            boundary_mass: 1e-6,
            early_stop: true,
            check_interval: 25.0,
            stop_on_contamination: false,
        }
    }
}

/// Mass within one unit of either end of the mesh.
pub fn boundary_mass(u: &ComplexField) -> f64 {
    let (left, right) = boundary_elements(u.mesh());
    let nodes = u.mesh().nodes();
    let v = &u.values;
    left.chain(right)
        .map(|e| element_mass(nodes[e + 1] - nodes[e], v[e], v[e + 1]))
        .sum()
}

fn boundary_elements(mesh: &Mesh1D) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
    let nodes = mesh.nodes();
    let r = mesh.half_width();
    let n = nodes.len();
    let left_end = nodes.partition_point(|&x| x < -r + 1.0).max(1).min(n - 1);
    let right_start = nodes.partition_point(|&x| x <= r - 1.0).saturating_sub(1).max(left_end);
    (0..left_end, right_start..n - 1)
}

/// Evolves `piece` under the free flow and time-averages `sup_x |u|` over
/// whole oscillation periods.
///
/// With `early_stop` the run ends at the first check where the period means
/// agree to `stabilization_tol`; otherwise it runs to `t_max`. With
/// `stop_on_contamination` the run also ends, flagged, when mass reaches the
/// boundary layer; the average then covers the clean part only.
pub fn resolve_amplitude(piece: &ComplexField, settings: &ResolveSettings) -> Result<ResolutionResult> {
    if settings.step.q != 0.0 {
        return Err(invalid("q", "amplitude resolution uses the free flow (q = 0)"));
    }
    if !(settings.t_max > 0.0) {
        return Err(invalid("t_max", "must be positive"));
    }
    let mesh = piece.mesh().clone();
    let nodes = mesh.nodes().to_vec();
    let (left, right) = boundary_elements(&mesh);
    let mut stepper = Stepper::new(mesh.clone(), settings.step.clone())?;
    let dt = settings.step.dt;
    let steps = (settings.t_max / dt - 1e-9).ceil().max(1.0) as usize;
    let check_every = ((settings.check_interval / dt).round() as usize).max(1);
    let m0 = fem::l2_norm_sq(piece);

    let sup = |u: &[Complex64]| u.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt();
    let mut u = piece.values.clone();
    let mut series = Vec::with_capacity(steps + 1);
    series.push((0.0, sup(&u)));
    let mut last = None;
    let mut contaminated_at = None;
    for k in 1..=steps {
        stepper.advance(&mut u)?;
        let t = k as f64 * dt;
        let edge: f64 = left
            .clone()
            .chain(right.clone())
            .map(|e| element_mass(nodes[e + 1] - nodes[e], u[e], u[e + 1]))
            .sum();
        if edge > settings.boundary_mass {
            if settings.stop_on_contamination {
                contaminated_at = Some(t);
                break;
            }
            return Err(Error::BoundaryContamination { mass: edge, time: t });
        }
        series.push((t, sup(&u)));
        if settings.early_stop && k % check_every == 0 {
            if let Ok(avg) = oscillation_average(&series, settings.skip_fraction, settings.stabilization_tol) {
                if avg.stabilized {
                    last = Some(avg);
                    break;
                }
            }
        }
    }
    let m1 = fem::l2_norm_sq(&ComplexField::new(mesh, u)?);
    let drift = if m0 > 0.0 { ((m1 - m0) / m0).abs() } else { 0.0 };
    if drift > 1e-4 {
        return Err(Error::MassDrift {
            drift,
            time: series[series.len() - 1].0,
            bound: 1e-4,
        });
    }
    let avg = match last {
        Some(avg) => avg,
        None => oscillation_average(&series, settings.skip_fraction, settings.stabilization_tol)?,
    };
    Ok(ResolutionResult {
        side: None,
        measured_amplitude: avg.mean,
        window: avg.window,
        stabilized: avg.stabilized,
        contaminated_at,
        amplitude_series: series,
    })
}

/// Time average of an oscillating series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationAverage {
    pub mean: f64,
    pub window: (f64, f64),
    /// Number of complete oscillation periods in the window.
    pub periods: usize,
    /// Relative spread of the per-period means over the last three periods;
    /// infinite with fewer than two periods.
    pub spread: f64,
    pub stabilized: bool,
}

/// Averages `series` over whole oscillation periods after skipping the
/// initial `skip_fraction` of the time span.
///
/// Periods are delimited by local maxima of the series. With fewer than two
/// maxima the whole tail is used and `periods` is zero.
pub fn oscillation_average(series: &[(f64, f64)], skip_fraction: f64, tol: f64) -> Result<OscillationAverage> {
    if series.len() < 8 {
        return Err(Error::InsufficientData(format!("{} samples", series.len())));
    }
    let t0 = series[0].0;
    let t_end = series[series.len() - 1].0;
    let start_t = t0 + skip_fraction.clamp(0.0, 0.9) * (t_end - t0);
    let start = series.partition_point(|&(t, _)| t < start_t);
    let tail = &series[start..];
    let peaks = local_maxima(tail);
    let (window, periods) = if peaks.len() >= 2 {
        (&tail[peaks[0]..=peaks[peaks.len() - 1]], peaks.len() - 1)
    } else {
        (tail, 0)
    };
    let mean = time_mean(window);

    // Compare the means of the last (up to three) complete periods.
    let spread = if periods >= 2 {
        let first = peaks.len().saturating_sub(4);
        let means: Vec<f64> = peaks[first..]
            .windows(2)
            .map(|w| time_mean(&tail[w[0]..=w[1]]))
            .collect();
        let (lo, hi) = means
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| (lo.min(m), hi.max(m)));
        if mean.abs() > 0.0 {
            (hi - lo) / mean.abs()
        } else {
            f64::INFINITY
        }
    } else {
        f64::INFINITY
    };
    Ok(OscillationAverage {
        mean,
        window: (window[0].0, window[window.len() - 1].0),
        periods,
        spread,
        stabilized: spread <= tol,
    })
}

/// Trapezoid time average.
pub fn time_mean(series: &[(f64, f64)]) -> f64 {
    if series.len() < 2 {
        return series.first().map_or(0.0, |s| s.1);
    }
    let area: f64 = series
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[1].1 + w[0].1))
        .sum();
    area / (series[series.len() - 1].0 - series[0].0)
}

// Indices of strict maxima over a neighbourhood of 2% of the series length.
fn local_maxima(series: &[(f64, f64)]) -> Vec<usize> {
    let n = series.len();
    let reach = (n / 50).max(2);
    let mut peaks: Vec<usize> = Vec::new();
    for i in reach..n.saturating_sub(reach) {
        let v = series[i].1;
        let neighbourhood = &series[i - reach..=i + reach];
        if neighbourhood.iter().all(|s| s.1 <= v) && neighbourhood.iter().any(|s| s.1 < v) {
            if let Some(&last) = peaks.last() {
                if i - last <= reach {
                    continue;
                }
            }
            peaks.push(i);
        }
    }
    peaks
}

/// `max_t ||NLS_q(t) u - NLS_0(t) u||` over `(0, t_span]`.
pub fn nls_q_vs_nls_0_deviation(u: &ComplexField, t_span: f64, cfg: &StepConfig) -> Result<f64> {
    if !(t_span > 0.0) {
        return Err(invalid("t_span", "must be positive"));
    }
    if cfg.q == 0.0 {
        return Ok(0.0);
    }
    let free_cfg = StepConfig { q: 0.0, ..cfg.clone() };
    let mut perturbed = Stepper::new(u.mesh().clone(), cfg.clone())?;
    let mut free = Stepper::new(u.mesh().clone(), free_cfg)?;
    let mut a = u.values.clone();
    let mut b = u.values.clone();
    let steps = (t_span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        perturbed.advance(&mut a)?;
        free.advance(&mut b)?;
        let diff: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let d = ComplexField::new(u.mesh().clone(), diff)?;
        worst = worst.max(fem::l2_norm_sq(&d).sqrt());
    }
    Ok(worst)
}

/// Unwrapped `arg u(0,t)` minus the phase `(2α-1)² t / 2` of the emerging
/// soliton, one entry per sample.
pub fn center_phase_deviation(samples: &[Sample], alpha: f64) -> Result<Vec<(f64, f64)>> {
    if !(alpha > 0.5) {
        return Err(invalid("alpha", format!("a soliton emerges only for alpha > 1/2, got {alpha}")));
    }
    let freq = 0.5 * (2.0 * alpha - 1.0).powi(2);
    let mut out = Vec::with_capacity(samples.len());
    let mut unwrapped = 0.0;
    let mut prev: Option<f64> = None;
    for s in samples {
        let modulus = s.center.norm();
        if modulus < 1e-8 {
            return Err(Error::PhaseUndefined {
                modulus,
                time: s.time,
            });
        }
        let phase = s.center.arg();
        match prev {
            None => unwrapped = phase,
            Some(p) => {
                let step = wrap(phase - p);
                if step.abs() > 0.5 * PI {
                    return Err(Error::PhaseJump {
                        jump: step,
                        time: s.time,
                    });
                }
                unwrapped += step;
            }
        }
        prev = Some(phase);
        out.push((s.time, unwrapped - freq * s.time));
    }
    Ok(out)
}

fn wrap(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// One row of the scattering time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub time: f64,
    pub transmitted: f64,
    pub reflected: f64,
    pub trapped: f64,
    pub mass: f64,
    pub center_abs: f64,
    pub center_arg: f64,
    pub profile_distance: f64,
}

pub const SERIES_HEADER: &str =
    "time,transmitted,reflected,trapped,mass,center_abs,center_arg,profile_distance";

impl SeriesRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.time,
            self.transmitted,
            self.reflected,
            self.trapped,
            self.mass,
            self.center_abs,
            self.center_arg,
            self.profile_distance
        )
    }
}

/// Observer collecting [`SeriesRow`]s during a scattering run.
#[derive(Debug, Clone)]
pub struct ScatterRecorder {
    pub params: PhysParams,
    pub rows: Vec<SeriesRow>,
    /// Field with the smallest profile distance seen so far.
    pub best: Option<(f64, f64, ComplexField)>,
    track_profile: bool,
}

impl ScatterRecorder {
    pub fn new(params: PhysParams, track_profile: bool) -> Self {
        Self {
            params,
            rows: Vec::new(),
            best: None,
            track_profile,
        }
    }

    pub fn partitions(&self) -> Vec<MassPartition> {
        self.rows
            .iter()
            .map(|r| MassPartition {
                time: r.time,
                transmitted: r.transmitted,
                reflected: r.reflected,
                trapped: r.trapped,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(SERIES_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }
}

impl Observer for ScatterRecorder {
    fn observe(&mut self, t: f64, u: &ComplexField) -> Result<()> {
        let part = mass_partition(u, t)?;
        let distance = if self.track_profile {
            let d = profile_distance(u, &self.params, t)?;
            if self.best.as_ref().map_or(true, |b| d < b.1) {
                self.best = Some((t, d, u.clone()));
            }
            d
        } else {
            f64::NAN
        };
        let center = u.at_origin();
        self.rows.push(SeriesRow {
            time: t,
            transmitted: part.transmitted,
            reflected: part.reflected,
            trapped: part.trapped,
            mass: 2.0 * part.total(),
            center_abs: center.norm(),
            center_arg: center.arg(),
            profile_distance: distance,
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::project;
    use crate::theory::soliton_exact;

    fn mesh(r: f64, h: f64) -> Arc<Mesh1D> {
        Arc::new(Mesh1D::uniform(r, h).unwrap())
    }

    #[test]
    fn zero_field_has_no_mass_anywhere() {
        let m = mesh(5.0, 0.1);
        let u = ComplexField::zeros(m);
        assert_eq!(mass_in_region(&u, -0.5, 0.5).unwrap(), 0.0);
        let p = mass_partition(&u, 0.0).unwrap();
        assert_eq!(p.total(), 0.0);
    }

    #[test]
    fn unaligned_endpoints_are_rejected() {
        let u = ComplexField::zeros(mesh(5.0, 0.1));
        assert_eq!(mass_in_region(&u, 0.55, 2.0), Err(Error::UnalignedEndpoint(0.55)));
        assert!(mass_in_region(&u, 1.0, 1.0).is_err());
    }

    #[test]
    fn left_soliton_sits_in_reflected_region() {
        let m = mesh(30.0, 0.02);
        let p = PhysParams::new(0.0, 2.0, -10.0);
        let u = project(&m, |x| soliton_exact(&p, x, 0.0));
        let total = fem::l2_norm_sq(&u);
        let right = mass_in_region(&u, 0.5, f64::INFINITY).unwrap();
        assert!(right <= 1e-8 * total, "right mass {right}");
        let part = mass_partition(&u, 0.0).unwrap();
        assert!((2.0 * part.total() - total).abs() < 1e-10);
        let (_, r, _) = part.fractions();
        assert!((r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn stabilization_examples() {
        let constant: Vec<(f64, f64)> = (0..100).map(|i| (i as f64 * 0.1, 0.7)).collect();
        let v = stabilized_limit(&constant, 2.0, 1e-6).unwrap().value().unwrap();
        assert!((v - 0.7).abs() < 1e-14);
        let wobble: Vec<(f64, f64)> = (0..1000)
            .map(|i| {
                let t = i as f64 * 0.01;
                (t, 0.3 + 1e-4 * (7.0 * t).sin())
            })
            .collect();
        let v = stabilized_limit(&wobble, 3.0, 1e-3).unwrap().value().unwrap();
        assert!((v - 0.3).abs() < 1e-4);
        assert!(matches!(
            stabilized_limit(&wobble, 3.0, 1e-5).unwrap(),
            Stabilization::NotYet { .. }
        ));
        assert!(matches!(
            stabilized_limit(&wobble, 6.0, 1e-3),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn profile_distance_vanishes_on_profile_and_is_gauge_invariant() {
        let m = mesh(20.0, 0.02);
        let p = PhysParams::new(3.0, 3.0, -10.0);
        let t = 4.0;
        let u = project(&m, |x| expected_profile(&p, x, t).unwrap());
        assert!(profile_distance(&u, &p, t).unwrap() < 1e-12);

        let mut shifted = project(&m, |x| soliton_exact(&p, x, 1.0));
        let d0 = profile_distance(&shifted, &p, t).unwrap();
        let theta = 0.9;
        shifted.scale(Complex64::from_polar(1.0, theta));
        let rotated = PhysParams { phase: theta, ..p };
        let d1 = profile_distance(&shifted, &rotated, t).unwrap();
        assert!((d0 - d1).abs() < 1e-12);
    }

    #[test]
    fn oscillation_average_of_sinusoid() {
        let series: Vec<(f64, f64)> = (0..4000)
            .map(|i| {
                let t = i as f64 * 0.05;
                (t, 0.6 + 0.05 * (2.0 * PI * t / 35.0).cos())
            })
            .collect();
        let avg = oscillation_average(&series, 0.25, 0.01).unwrap();
        assert!(avg.periods >= 3);
        assert!((avg.mean - 0.6).abs() < 1e-4, "{avg:?}");
        assert!(avg.stabilized);
    }

    #[test]
    fn phase_deviation_of_exact_soliton_is_zero() {
        let samples: Vec<Sample> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.05;
                Sample {
                    time: t,
                    mass: 2.0,
                    center: Complex64::from_polar(1.0, 0.5 * t),
                }
            })
            .collect();
        let dev = center_phase_deviation(&samples, 1.0).unwrap();
        assert!(dev.iter().all(|(_, d)| d.abs() < 1e-12));
        let zero = [Sample {
            time: 0.0,
            mass: 0.0,
            center: Complex64::new(0.0, 0.0),
        }];
        assert!(matches!(
            center_phase_deviation(&zero, 1.0),
            Err(Error::PhaseUndefined { .. })
        ));
        assert!(center_phase_deviation(&samples, 0.4).is_err());
    }

    #[test]
    fn deviation_is_zero_without_potential() {
        let m = mesh(10.0, 0.05);
        let u = project(&m, |x| Complex64::new(1.0 / x.cosh(), 0.0));
        assert_eq!(nls_q_vs_nls_0_deviation(&u, 0.1, &StepConfig::new(1e-2, 0.0)).unwrap(), 0.0);
    }
}
