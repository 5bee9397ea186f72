//! Experiment configuration in a sectioned `key = value` text format.
//!
//! ```text
//! kind = scatter
//! output_dir = runs
//!
//! [physics]
//! q = 3
//! v = 3
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. [`ExperimentConfig::render`] writes every field, and
//! parsing the rendered text gives back an equal config.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::Mesh1D;
use crate::measure::ResolveSettings;
use crate::stepper::{CubicRule, StepConfig};
use crate::theory::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Scatter,
    Sweep,
    Resolve,
    FreeResolution,
    LinearCheck,
    Theory,
    Fit,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Scatter,
        ExperimentKind::Sweep,
        ExperimentKind::Resolve,
        ExperimentKind::FreeResolution,
        ExperimentKind::LinearCheck,
        ExperimentKind::Theory,
        ExperimentKind::Fit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Scatter => "scatter",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Resolve => "resolve",
            ExperimentKind::FreeResolution => "free-resolution",
            ExperimentKind::LinearCheck => "linear-check",
            ExperimentKind::Theory => "theory",
            ExperimentKind::Fit => "fit",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Transmission deficit `a v^{-b}`.
    PowerLaw,
    /// Trapped mass `d e^{-f v}`.
    Exponential,
}

impl FitModel {
    pub fn name(&self) -> &'static str {
        match self {
            FitModel::PowerLaw => "power-law",
            FitModel::Exponential => "exponential",
        }
    }
}

impl FromStr for FitModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power-law" => Ok(FitModel::PowerLaw),
            "exponential" => Ok(FitModel::Exponential),
            _ => Err(format!("unknown fit model `{s}`")),
        }
    }
}

/// Symmetric two-level mesh: `h_inner` on `[-1/2, 1/2]`, `h_outer` outside.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub half_width: f64,
    pub h_outer: f64,
    pub h_inner: f64,
}

impl MeshSpec {
    pub fn build(&self) -> Result<Mesh1D> {
        Mesh1D::with_spacing(self.half_width, self.h_outer, self.h_inner)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    /// End time; `None` means `time_factor * |x0| / v`.
    pub t_final: Option<f64>,
    pub time_factor: f64,
    /// Record the mass partition every this many steps.
    pub sample_stride: usize,
    pub snapshot_times: Vec<f64>,
    pub max_mass_drift: f64,
}

impl RunSpec {
    pub fn end_time(&self, p: &PhysParams) -> f64 {
        self.t_final.unwrap_or(self.time_factor * p.x0.abs() / p.v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Worker threads; zero uses the rayon default.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolveSpec {
    pub r_big: f64,
    pub n_big: usize,
    pub dt_big: f64,
    pub t_max: f64,
    /// Distance from the origin each piece must reach before the cut.
    pub separation: f64,
    /// Span of the `NLS_q` versus `NLS_0` comparison.
    pub deviation_span: f64,
    pub boundary_mass: f64,
    pub stop_on_contamination: bool,
    pub early_stop: bool,
}

impl ResolveSpec {
    pub fn settings(&self) -> ResolveSettings {
        ResolveSettings {
            boundary_mass: self.boundary_mass,
            stop_on_contamination: self.stop_on_contamination,
            early_stop: self.early_stop,
            ..ResolveSettings::new(self.t_max, self.dt_big)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeSpec {
    pub alpha: f64,
    pub half_width: f64,
    pub h: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Fraction of the run skipped before averaging and fitting.
    pub skip_fraction: f64,
    pub boundary_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSpec {
    pub velocities: Vec<f64>,
    /// `q = alpha * v`.
    pub alpha: f64,
    /// The bump lives on `[center - width, center + width]`.
    pub center: f64,
    pub width: f64,
    pub half_width: f64,
    /// Target `v h`; the spacing is the nearest divisor of `1/2` below it.
    pub kh: f64,
    /// `dt = dt_scale / v²`.
    pub dt_scale: f64,
    /// Number of times at which the split error is checked.
    pub checks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitSpec {
    /// Sweep CSV to fit; empty means the sweep written by this run.
    pub input: String,
    pub model: FitModel,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub output_dir: String,
    pub physics: PhysParams,
    pub mesh: MeshSpec,
    pub step: StepConfig,
    pub run: RunSpec,
    pub sweep: SweepSpec,
    pub resolve: ResolveSpec,
    pub free: FreeSpec,
    pub linear: LinearSpec,
    pub fit: FitSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Scatter,
            output_dir: "runs".into(),
            physics: PhysParams::new(3.0, 3.0, -10.0),
            mesh: MeshSpec {
                half_width: 20.5,
                h_outer: 0.01,
                h_inner: 0.01,
            },
            step: StepConfig::new(5e-4, 3.0),
            run: RunSpec {
                t_final: None,
                time_factor: 2.0,
                sample_stride: 20,
                snapshot_times: vec![0.0, 2.7, 3.3, 4.0],
                max_mass_drift: 1e-4,
            },
            sweep: SweepSpec {
                alphas: vec![1.0],
                velocities: vec![3.0, 4.0, 5.0, 6.0],
                workers: 0,
            },
            resolve: ResolveSpec {
                r_big: 2000.5,
                n_big: 16004,
                dt_big: 0.1,
                t_max: 1500.0,
                separation: 8.0,
                deviation_span: 1.0,
                boundary_mass: 1e-6,
                stop_on_contamination: true,
                early_stop: true,
            },
            free: FreeSpec {
                alpha: 0.8,
                half_width: 400.5,
                h: 0.05,
                dt: 0.02,
                t_final: 100.0,
                skip_fraction: 0.25,
                boundary_mass: 1e-6,
            },
            linear: LinearSpec {
                velocities: vec![10.0, 20.0, 40.0],
                alpha: 1.0,
                center: -10.0,
                width: 2.0,
                half_width: 20.5,
                kh: 0.05,
                dt_scale: 0.2,
                checks: 20,
            },
            fit: FitSpec {
                input: String::new(),
                model: FitModel::PowerLaw,
                v_min: 0.0,
                v_max: f64::INFINITY,
            },
        }
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect()
}

fn num<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("`{s}`: {e}"))
}

fn cubic_name(c: CubicRule) -> &'static str {
    match c {
        CubicRule::Nodal => "nodal",
        CubicRule::Exact => "exact",
    }
}

impl ExperimentConfig {
    /// Config for `kind` with every other field at its default.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies the assignments in `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: i + 1, message };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header `{line}`")))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            self.set(&section, key.trim(), value.trim()).map_err(err)?;
        }
        Ok(())
    }

    /// Sets one field from a dotted `section.key=value` assignment.
    pub fn set_dotted(&mut self, assignment: &str) -> Result<()> {
        let err = |message: String| Error::Parse { line: 0, message };
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| err(format!("expected `section.key=value`, found `{assignment}`")))?;
        let (section, key) = path.trim().rsplit_once('.').unwrap_or(("", path.trim()));
        self.set(section, key, value.trim()).map_err(err)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> std::result::Result<(), String> {
        match (section, key) {
            ("", "kind") => self.kind = v.parse()?,
            ("", "output_dir") => self.output_dir = v.to_string(),
            ("physics", "q") => self.physics.q = num(v)?,
            ("physics", "v") => self.physics.v = num(v)?,
            ("physics", "x0") => self.physics.x0 = num(v)?,
            ("physics", "amplitude") => self.physics.amplitude = num(v)?,
            ("physics", "phase") => self.physics.phase = num(v)?,
            ("mesh", "half_width") => self.mesh.half_width = num(v)?,
            ("mesh", "h_outer") => self.mesh.h_outer = num(v)?,
            ("mesh", "h_inner") => self.mesh.h_inner = num(v)?,
            ("step", "dt") => self.step.dt = num(v)?,
            ("step", "iterations") => self.step.iterations = num(v)?,
            ("step", "nonlinear") => self.step.nonlinear = num(v)?,
            ("step", "cubic") => {
                self.step.cubic = match v {
                    "nodal" => CubicRule::Nodal,
                    "exact" => CubicRule::Exact,
                    _ => return Err(format!("unknown cubic rule `{v}`")),
                }
            }
            ("step", "sweep_tol") => {
                self.step.sweep_tol = if v == "none" { None } else { Some(num(v)?) }
            }
            ("run", "t_final") => self.run.t_final = if v == "auto" { None } else { Some(num(v)?) },
            ("run", "time_factor") => self.run.time_factor = num(v)?,
            ("run", "sample_stride") => self.run.sample_stride = num(v)?,
            ("run", "snapshot_times") => self.run.snapshot_times = parse_list(v)?,
            ("run", "max_mass_drift") => self.run.max_mass_drift = num(v)?,
            ("sweep", "alphas") => self.sweep.alphas = parse_list(v)?,
            ("sweep", "velocities") => self.sweep.velocities = parse_list(v)?,
            ("sweep", "workers") => self.sweep.workers = num(v)?,
            ("resolve", "r_big") => self.resolve.r_big = num(v)?,
            ("resolve", "n_big") => self.resolve.n_big = num(v)?,
            ("resolve", "dt_big") => self.resolve.dt_big = num(v)?,
            ("resolve", "t_max") => self.resolve.t_max = num(v)?,
            ("resolve", "separation") => self.resolve.separation = num(v)?,
            ("resolve", "deviation_span") => self.resolve.deviation_span = num(v)?,
            ("resolve", "boundary_mass") => self.resolve.boundary_mass = num(v)?,
            ("resolve", "stop_on_contamination") => self.resolve.stop_on_contamination = num(v)?,
            ("resolve", "early_stop") => self.resolve.early_stop = num(v)?,
            ("free", "alpha") => self.free.alpha = num(v)?,
            ("free", "half_width") => self.free.half_width = num(v)?,
            ("free", "h") => self.free.h = num(v)?,
            ("free", "dt") => self.free.dt = num(v)?,
            ("free", "t_final") => self.free.t_final = num(v)?,
            ("free", "skip_fraction") => self.free.skip_fraction = num(v)?,
            ("free", "boundary_mass") => self.free.boundary_mass = num(v)?,
            ("linear", "velocities") => self.linear.velocities = parse_list(v)?,
            ("linear", "alpha") => self.linear.alpha = num(v)?,
            ("linear", "center") => self.linear.center = num(v)?,
            ("linear", "width") => self.linear.width = num(v)?,
            ("linear", "half_width") => self.linear.half_width = num(v)?,
            ("linear", "kh") => self.linear.kh = num(v)?,
            ("linear", "dt_scale") => self.linear.dt_scale = num(v)?,
            ("linear", "checks") => self.linear.checks = num(v)?,
            ("fit", "input") => self.fit.input = v.to_string(),
            ("fit", "model") => self.fit.model = v.parse()?,
            ("fit", "v_min") => self.fit.v_min = num(v)?,
            ("fit", "v_max") => self.fit.v_max = num(v)?,
            _ if section.is_empty() => return Err(format!("unknown key `{key}`")),
            _ => return Err(format!("unknown key `{key}` in section [{section}]")),
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let opt = |x: Option<f64>, none: &str| x.map_or(none.to_string(), |v| v.to_string());
        let _ = writeln!(s, "kind = {}", self.kind.name());
        let _ = writeln!(s, "output_dir = {}", self.output_dir);
        let p = &self.physics;
        let _ = writeln!(s, "\n[physics]\nq = {}\nv = {}\nx0 = {}\namplitude = {}\nphase = {}", p.q, p.v, p.x0, p.amplitude, p.phase);
        let m = &self.mesh;
        let _ = writeln!(s, "\n[mesh]\nhalf_width = {}\nh_outer = {}\nh_inner = {}", m.half_width, m.h_outer, m.h_inner);
        let st = &self.step;
        let _ = writeln!(
            s,
            "\n[step]\ndt = {}\niterations = {}\nnonlinear = {}\ncubic = {}\nsweep_tol = {}",
            st.dt,
            st.iterations,
            st.nonlinear,
            cubic_name(st.cubic),
            opt(st.sweep_tol, "none")
        );
        let r = &self.run;
        let _ = writeln!(
            s,
            "\n[run]\nt_final = {}\ntime_factor = {}\nsample_stride = {}\nsnapshot_times = {}\nmax_mass_drift = {}",
            opt(r.t_final, "auto"),
            r.time_factor,
            r.sample_stride,
            list(&r.snapshot_times),
            r.max_mass_drift
        );
        let sw = &self.sweep;
        let _ = writeln!(s, "\n[sweep]\nalphas = {}\nvelocities = {}\nworkers = {}", list(&sw.alphas), list(&sw.velocities), sw.workers);
        let rs = &self.resolve;
        let _ = writeln!(
            s,
            "\n[resolve]\nr_big = {}\nn_big = {}\ndt_big = {}\nt_max = {}\nseparation = {}\ndeviation_span = {}\nboundary_mass = {}\nstop_on_contamination = {}\nearly_stop = {}",
            rs.r_big, rs.n_big, rs.dt_big, rs.t_max, rs.separation, rs.deviation_span, rs.boundary_mass, rs.stop_on_contamination, rs.early_stop
        );
        let f = &self.free;
        let _ = writeln!(
            s,
            "\n[free]\nalpha = {}\nhalf_width = {}\nh = {}\ndt = {}\nt_final = {}\nskip_fraction = {}\nboundary_mass = {}",
            f.alpha, f.half_width, f.h, f.dt, f.t_final, f.skip_fraction, f.boundary_mass
        );
        let l = &self.linear;
        let _ = writeln!(
            s,
            "\n[linear]\nvelocities = {}\nalpha = {}\ncenter = {}\nwidth = {}\nhalf_width = {}\nkh = {}\ndt_scale = {}\nchecks = {}",
            list(&l.velocities), l.alpha, l.center, l.width, l.half_width, l.kh, l.dt_scale, l.checks
        );
        let ft = &self.fit;
        let _ = writeln!(
            s,
            "\n[fit]\ninput = {}\nmodel = {}\nv_min = {}\nv_max = {}",
            ft.input,
            ft.model.name(),
            ft.v_min,
            ft.v_max
        );
        s
    }

    /// Checks the fields used by the configured experiment kind.
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(crate::error::invalid(name, reason));
        match self.kind {
            ExperimentKind::Scatter | ExperimentKind::Resolve => {
                self.physics.validate_scattering()?;
                self.step.validate()?;
                self.mesh.build()?;
            }
            ExperimentKind::Sweep => {
                if self.sweep.alphas.is_empty() || self.sweep.velocities.is_empty() {
                    return bad("sweep", "alphas and velocities must be nonempty".into());
                }
                self.step.validate()?;
                self.mesh.build()?;
            }
            ExperimentKind::FreeResolution => {
                let a = self.free.alpha;
                if !(a > 0.0 && a <= 1.0) || a == 0.5 {
                    return bad("alpha", format!("must lie in (0, 1] and differ from 1/2, got {a}"));
                }
                Mesh1D::uniform(self.free.half_width, self.free.h)?;
            }
            ExperimentKind::LinearCheck => {
                if self.linear.velocities.iter().any(|v| !(*v > 0.0)) || self.linear.velocities.is_empty() {
                    return bad("velocities", "need positive velocities".into());
                }
            }
            ExperimentKind::Theory | ExperimentKind::Fit => {}
        }
        if self.run.sample_stride == 0 {
            return bad("sample_stride", "must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn sections_and_comments() {
        let text = "kind = sweep\n# comment\n[physics]\nq = -1.5\n[sweep]\nvelocities = 2, 2.5\n[run]\nt_final = 3\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Sweep);
        assert_eq!(cfg.physics.q, -1.5);
        assert_eq!(cfg.sweep.velocities, vec![2.0, 2.5]);
        assert_eq!(cfg.run.t_final, Some(3.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = ExperimentConfig::parse("kind = scatter\n[mesh]\nh_outer = fast\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = ExperimentConfig::parse("[physics\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = ExperimentConfig::parse("\n\n[mesh]\nbogus = 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 4, .. }));
    }

    #[test]
    fn dotted_overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.set_dotted("physics.v=5").unwrap();
        cfg.set_dotted("kind=fit").unwrap();
        assert_eq!(cfg.physics.v, 5.0);
        assert_eq!(cfg.kind, ExperimentKind::Fit);
        assert!(cfg.set_dotted("physics.w=1").is_err());
    }

    #[test]
    fn auto_end_time() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.run.end_time(&cfg.physics), 2.0 * 10.0 / 3.0);
    }
}
