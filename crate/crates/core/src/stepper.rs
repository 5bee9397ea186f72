//! Midpoint-rule time integration with fixed-point sweeps.
//!
//! With `y = (u_{n+1} + u_n) / 2` each step solves
//!
//! ```text
//! (M + i dt/4 K + i dt q/2 D) y^{k+1} = i dt/2 N(y^k) + M u_n
//! ```
//!
//! for a fixed number of sweeps starting from `y^0 = u_n`, then sets
//! `u_{n+1} = 2 y - u_n`. The left operator does not change between steps,
//! so it is factorized once.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fem::{self, ComplexField, Mesh1D, Tridiagonal};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Quadrature for the Galerkin cubic term `<|y|^2 y, v_i>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CubicRule {
    /// `M (|y|^2 y)` with the nonlinearity evaluated at nodes. Cheaper, but
    /// does not conserve mass across a change in element size.
    Nodal,
    /// Exact integral of the cubic of the piecewise-linear interpolant;
    /// keeps the scheme mass-conservative on refined meshes.
    #[default]
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Fixed-point sweeps per step.
    pub iterations: usize,
    pub nonlinear: bool,
    pub q: f64,
    pub cubic: CubicRule,
    /// Optional early stop once `max |y^{k+1} - y^k|` falls below this.
    pub sweep_tol: Option<f64>,
}

impl StepConfig {
    pub fn new(dt: f64, q: f64) -> Self {
        Self {
            dt,
            iterations: 3,
            nonlinear: true,
            q,
            cubic: CubicRule::Exact,
            sweep_tol: None,
        }
    }

    pub fn linear(dt: f64, q: f64) -> Self {
        Self {
            nonlinear: false,
            ..Self::new(dt, q)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("time step must be positive, got {}", self.dt)));
        }
        if self.iterations == 0 {
            return Err(invalid("iterations", "at least one sweep is required"));
        }
        if !self.q.is_finite() {
            return Err(invalid("q", "coupling must be finite"));
        }
        Ok(())
    }
}

/// Solves `T x = rhs` by forward elimination without pivoting.
pub fn thomas_solve<T>(t: &Tridiagonal<T>, rhs: &[Complex64]) -> Result<Vec<Complex64>>
where
    T: Copy + Into<Complex64>,
{
    let lu = TridiagonalLu::factor(t)?;
    let mut x = rhs.to_vec();
    lu.solve_in_place(&mut x)?;
    Ok(x)
}

/// Thomas factorization kept for repeated solves with the same matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
    upper_scaled: Vec<Complex64>,
}

impl TridiagonalLu {
    pub fn factor<T: Copy + Into<Complex64>>(t: &Tridiagonal<T>) -> Result<Self> {
        let n = t.len();
        if t.lower.len() != n || t.upper.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: t.lower.len().min(t.upper.len()),
            });
        }
        let scale = t
            .diag
            .iter()
            .map(|&d| d.into().norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut inv_pivot = vec![ZERO; n];
        let mut upper_scaled = vec![ZERO; n];
        let lower: Vec<Complex64> = t.lower.iter().map(|&a| a.into()).collect();
        for i in 0..n {
            let mut pivot = t.diag[i].into();
            if i > 0 {
                pivot -= lower[i] * upper_scaled[i - 1];
            }
            if pivot.norm() <= 1e-14 * scale {
                return Err(Error::ZeroPivot { row: i });
            }
            inv_pivot[i] = pivot.inv();
            upper_scaled[i] = t.upper[i].into() * inv_pivot[i];
        }
        Ok(Self {
            lower,
            inv_pivot,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        let n = self.len();
        if x.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: x.len(),
            });
        }
        if n == 0 {
            return Ok(());
        }
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] = x[i] - self.upper_scaled[i] * x[i + 1];
        }
        Ok(())
    }
}

/// Load vector of the cubic term for the nodal rule: `M (|y|^2 y)`.
pub fn cubic_load(y: &[Complex64], mass: &Tridiagonal<f64>) -> Vec<Complex64> {
    let cubed: Vec<Complex64> = y.iter().map(|z| z * z.norm_sqr()).collect();
    mass.apply(&cubed)
}

fn cubic_load_nodal_into(y: &[Complex64], mass: &Tridiagonal<f64>, scratch: &mut [Complex64], out: &mut [Complex64]) {
    for (c, z) in scratch.iter_mut().zip(y) {
        *c = z * z.norm_sqr();
    }
    mass.apply_into(scratch, out);
}

/// Load vector of the cubic term integrated exactly over each element.
pub fn cubic_load_exact(y: &[Complex64], mesh: &Mesh1D) -> Vec<Complex64> {
    let mut load = vec![ZERO; y.len()];
    cubic_load_exact_into(y, mesh.nodes(), &mut load);
    load
}

// With y(s) = a(1-s) + b s on an element of width h, the moments
// ∫(1-s)^p s^q ds = p! q! / 5! give closed forms for ∫|y|² y (1-s) and ∫|y|² y s.
fn cubic_load_exact_into(y: &[Complex64], nodes: &[f64], load: &mut [Complex64]) {
    load.iter_mut().for_each(|z| *z = ZERO);
    for e in 0..y.len().saturating_sub(1) {
        let h = nodes[e + 1] - nodes[e];
        let (a, b) = (y[e], y[e + 1]);
        let (aa, bb) = (a.norm_sqr(), b.norm_sqr());
        let a2bc = a * a * b.conj();
        let b2ac = b * b * a.conj();
        let left = a * (aa / 5.0 + bb / 15.0) + b * (aa / 10.0 + bb / 20.0) + a2bc / 20.0 + b2ac / 30.0;
        let right = b * (bb / 5.0 + aa / 15.0) + a * (bb / 10.0 + aa / 20.0) + b2ac / 20.0 + a2bc / 30.0;
        load[e] += left * h;
        load[e + 1] += right * h;
    }
}

/// One midpoint integrator bound to a mesh and configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    mesh: Arc<Mesh1D>,
    mass: Tridiagonal<f64>,
    lu: TridiagonalLu,
    cfg: StepConfig,
    rhs: Vec<Complex64>,
    y: Vec<Complex64>,
    base: Vec<Complex64>,
    load: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Stepper {
    pub fn new(mesh: Arc<Mesh1D>, cfg: StepConfig) -> Result<Self> {
        cfg.validate()?;
        let mass = fem::assemble_mass(&mesh);
        let stiffness = fem::assemble_stiffness(&mesh);
        let delta = fem::delta_term(&mesh, cfg.q);
        // K/4 + q D/2, scaled by i dt.
        let mut operator = Tridiagonal::zeros(mesh.len());
        for i in 0..mesh.len() {
            operator.lower[i] = 0.25 * stiffness.lower[i];
            operator.diag[i] = 0.25 * stiffness.diag[i] + 0.5 * delta.diag[i];
            operator.upper[i] = 0.25 * stiffness.upper[i];
        }
        let mut system = mass.combine(&operator, I * cfg.dt);
        // Homogeneous Dirichlet rows at both ends.
        let last = mesh.len() - 1;
        for row in [0, last] {
            system.lower[row] = ZERO;
            system.upper[row] = ZERO;
            system.diag[row] = Complex64::new(1.0, 0.0);
        }
        let lu = TridiagonalLu::factor(&system)?;
        let n = mesh.len();
        Ok(Self {
            mesh,
            mass,
            lu,
            cfg,
            rhs: vec![ZERO; n],
            y: vec![ZERO; n],
            base: vec![ZERO; n],
            load: vec![ZERO; n],
            scratch: vec![ZERO; n],
        })
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn mass_matrix(&self) -> &Tridiagonal<f64> {
        &self.mass
    }

    fn update_load(&mut self) {
        match self.cfg.cubic {
            CubicRule::Nodal => cubic_load_nodal_into(&self.y, &self.mass, &mut self.scratch, &mut self.load),
            CubicRule::Exact => cubic_load_exact_into(&self.y, self.mesh.nodes(), &mut self.load),
        }
    }

    /// Advance nodal values by one step in place.
    pub fn advance(&mut self, u: &mut [Complex64]) -> Result<()> {
        let n = self.mesh.len();
        if u.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: u.len(),
            });
        }
        self.mass.apply_into(u, &mut self.base);
        let sweeps = if self.cfg.nonlinear { self.cfg.iterations } else { 1 };
        self.y.copy_from_slice(u);
        let half_dt = I * (0.5 * self.cfg.dt);
        for _ in 0..sweeps {
            if self.cfg.nonlinear {
                self.update_load();
                for i in 0..n {
                    self.rhs[i] = self.base[i] + half_dt * self.load[i];
                }
            } else {
                self.rhs.copy_from_slice(&self.base);
            }
            self.rhs[0] = ZERO;
            self.rhs[n - 1] = ZERO;
            self.lu.solve_in_place(&mut self.rhs)?;
            let converged = self.cfg.sweep_tol.is_some_and(|tol| {
                self.rhs.iter().zip(&self.y).all(|(a, b)| (a - b).norm() <= tol)
            });
            std::mem::swap(&mut self.y, &mut self.rhs);
            if converged {
                break;
            }
        }
        for (ui, yi) in u.iter_mut().zip(&self.y) {
            *ui = 2.0 * yi - *ui;
        }
        Ok(())
    }

    /// One step from `u`, returning the new field.
    pub fn step(&mut self, u: &ComplexField) -> Result<ComplexField> {
        if !Arc::ptr_eq(u.mesh(), &self.mesh) && **u.mesh() != *self.mesh {
            return Err(Error::Mesh("field and stepper use different meshes".into()));
        }
        let mut values = u.values.clone();
        self.advance(&mut values)?;
        ComplexField::new(self.mesh.clone(), values)
    }

    /// Integrate from `t_start` to (at least) `t_end` in whole steps.
    pub fn evolve(
        &mut self,
        u0: &ComplexField,
        t_start: f64,
        t_end: f64,
        opts: &EvolveOptions,
        observers: &mut [&mut dyn Observer],
    ) -> Result<Trajectory> {
        if !(t_end > t_start) {
            return Err(invalid("t_final", format!("end time {t_end} must exceed start {t_start}")));
        }
        let stride = opts.sample_stride.max(1);
        let steps = ((t_end - t_start) / self.cfg.dt - 1e-9).ceil().max(1.0) as usize;
        let mut u = u0.clone();
        let mass0 = fem::l2_norm_sq(&u);
        let mut traj = Trajectory::default();
        let dt = self.cfg.dt;
        let mut record = |n: usize, u: &ComplexField, traj: &mut Trajectory| -> Result<()> {
            let t = t_start + n as f64 * dt;
            let mass = fem::l2_norm_sq(u);
            if mass0 > 0.0 {
                let drift = (mass - mass0).abs() / mass0;
                if drift > opts.max_mass_drift {
                    return Err(Error::MassDrift {
                        drift,
                        time: t,
                        bound: opts.max_mass_drift,
                    });
                }
            }
            traj.samples.push(Sample {
                time: t,
                mass,
                center: u.at_origin(),
            });
            if matches!(opts.snapshot_stride, Some(s) if n % s.max(1) == 0) {
                traj.snapshots.push((t, u.clone()));
            }
            for obs in observers.iter_mut() {
                obs.observe(t, u)?;
            }
            Ok(())
        };
        record(0, &u, &mut traj)?;
        for n in 1..=steps {
            self.advance(&mut u.values)?;
            if n % stride == 0 || n == steps {
                record(n, &u, &mut traj)?;
            }
        }
        traj.final_time = t_start + steps as f64 * self.cfg.dt;
        traj.final_state = Some(u);
        Ok(traj)
    }
}

/// Convenience wrapper: build a stepper for `u0`'s mesh and integrate from 0.
pub fn evolve(
    u0: &ComplexField,
    t_final: f64,
    cfg: &StepConfig,
    opts: &EvolveOptions,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(u0.mesh().clone(), cfg.clone())?;
    stepper.evolve(u0, 0.0, t_final, opts, observers)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    /// Record a sample (and call observers) every this many steps.
    pub sample_stride: usize,
    /// Keep a copy of the field every this many steps.
    pub snapshot_stride: Option<usize>,
    /// Abort once the relative mass drift exceeds this.
    pub max_mass_drift: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            sample_stride: 1,
            snapshot_stride: None,
            max_mass_drift: 1e-4,
        }
    }
}

/// Called on every recorded sample of an evolution.
pub trait Observer {
    fn observe(&mut self, t: f64, u: &ComplexField) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(f64, &ComplexField) -> Result<()>,
{
    fn observe(&mut self, t: f64, u: &ComplexField) -> Result<()> {
        self(t, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub mass: f64,
    pub center: Complex64,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub snapshots: Vec<(f64, ComplexField)>,
    pub final_time: f64,
    pub final_state: Option<ComplexField>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn final_state(&self) -> &ComplexField {
        self.final_state.as_ref().expect("trajectory has a final state")
    }

    pub fn max_relative_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        if first.mass == 0.0 {
            return 0.0;
        }
        self.samples
            .iter()
            .map(|s| (s.mass - first.mass).abs() / first.mass)
            .fold(0.0, f64::max)
    }
}
