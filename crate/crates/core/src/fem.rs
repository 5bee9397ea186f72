//! Piecewise-linear Galerkin discretization on a symmetric 1-D mesh.
//!
//! The mesh always carries nodes at `0` and `±1/2`, so the point potential
//! reduces to a single diagonal entry and the measurement regions
//! `(-∞,-1/2)`, `(-1/2,1/2)`, `(1/2,∞)` are unions of whole elements.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Half-width of the refinement window around the origin.
pub const WINDOW: f64 = 0.5;

/// Sorted, symmetric node set on `[-R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    origin: usize,
}

impl Mesh1D {
    /// Symmetric mesh with `n_inner` elements on `[0, 1/2]` and `n_outer`
    /// elements on `[1/2, R]` (mirrored to the left).
    pub fn build(half_width: f64, n_outer: usize, n_inner: usize) -> Result<Self> {
        if !(half_width > 1.0) || !half_width.is_finite() {
            return Err(invalid("R", format!("half-width must exceed 1, got {half_width}")));
        }
        if n_outer < 2 || n_inner < 2 {
            return Err(Error::Mesh(format!(
                "need at least two elements per segment (n_outer = {n_outer}, n_inner = {n_inner})"
            )));
        }
        let h_in = WINDOW / n_inner as f64;
        let h_out = (half_width - WINDOW) / n_outer as f64;
        if h_in > h_out * (1.0 + 1e-12) {
            return Err(Error::Mesh(format!(
                "inner spacing {h_in} is coarser than outer spacing {h_out}"
            )));
        }

        let mut right = Vec::with_capacity(n_inner + n_outer + 1);
        for i in 0..n_inner {
            right.push(i as f64 * h_in);
        }
        right.push(WINDOW);
        for j in 1..n_outer {
            right.push(WINDOW + j as f64 * h_out);
        }
        right.push(half_width);

        let origin = right.len() - 1;
        let mut nodes: Vec<f64> = right[1..].iter().rev().map(|x| -x).collect();
        nodes.extend_from_slice(&right);
        debug_assert_eq!(nodes[origin], 0.0);
        Ok(Self { nodes, origin })
    }

    /// Mesh from target spacings; both must divide their segment evenly.
    pub fn with_spacing(half_width: f64, h_out: f64, h_in: f64) -> Result<Self> {
        if !(h_out > 0.0) || !(h_in > 0.0) {
            return Err(invalid("spacing", "spacings must be positive"));
        }
        let n_inner = segment_count(WINDOW, h_in)
            .ok_or_else(|| Error::Mesh(format!("h_in = {h_in} does not divide 1/2")))?;
        let n_outer = segment_count(half_width - WINDOW, h_out).ok_or_else(|| {
            Error::Mesh(format!("h_out = {h_out} does not divide R - 1/2 = {}", half_width - WINDOW))
        })?;
        Self::build(half_width, n_outer, n_inner)
    }

    /// Uniform mesh of spacing `h` on `[-R, R]`.
    pub fn uniform(half_width: f64, h: f64) -> Result<Self> {
        Self::with_spacing(half_width, h, h)
    }

    /// Mesh from an explicit node list, as read back from a snapshot.
    ///
    /// The nodes must increase strictly, be symmetric about `0` and include
    /// `0` and `±1/2`.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n < 5 {
            return Err(Error::Mesh(format!("need at least 5 nodes, got {n}")));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Mesh("nodes must be finite and strictly increasing".into()));
        }
        if (0..n).any(|i| nodes[i] != -nodes[n - 1 - i]) {
            return Err(Error::Mesh("nodes are not symmetric about 0".into()));
        }
        let origin = n / 2;
        if nodes[origin] != 0.0 || !nodes.contains(&WINDOW) {
            return Err(Error::Mesh("nodes must include 0 and ±1/2".into()));
        }
        if !(nodes[n - 1] > 1.0) {
            return Err(invalid("R", format!("half-width must exceed 1, got {}", nodes[n - 1])));
        }
        Ok(Self { nodes, origin })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn origin_index(&self) -> usize {
        self.origin
    }

    pub fn half_width(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Element widths, `len() - 1` entries.
    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Smallest and largest element width.
    pub fn spacing_range(&self) -> (f64, f64) {
        self.widths()
            .into_iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), h| (lo.min(h), hi.max(h)))
    }

    /// Index of the node at `x`, if one lies within `1e-12` of it.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&n| n < x - 1e-12);
        (i < self.nodes.len() && (self.nodes[i] - x).abs() <= 1e-12).then_some(i)
    }
}

fn segment_count(length: f64, h: f64) -> Option<usize> {
    let n = (length / h).round();
    (n >= 1.0 && (n * h - length).abs() <= 1e-9 * length.max(1.0)).then_some(n as usize)
}

/// Tridiagonal matrix stored as three diagonals of equal length `n`.
/// `lower[0]` and `upper[n-1]` are padding and always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Copy + Default> Tridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![T::default(); n],
            diag: vec![T::default(); n],
            upper: vec![T::default(); n],
        }
    }
}

impl<T> Tridiagonal<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

impl<T: Copy + Into<Complex64>> Tridiagonal<T> {
    /// Matrix-vector product on complex nodal vectors.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `out = self * x` without allocating.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.len();
        assert!(x.len() == n && out.len() == n, "tridiagonal apply: dimension mismatch");
        if n == 1 {
            out[0] = self.diag[0].into() * x[0];
            return;
        }
        out[0] = self.diag[0].into() * x[0] + self.upper[0].into() * x[1];
        for i in 1..n - 1 {
            out[i] = self.lower[i].into() * x[i - 1]
                + self.diag[i].into() * x[i]
                + self.upper[i].into() * x[i + 1];
        }
        out[n - 1] = self.lower[n - 1].into() * x[n - 2] + self.diag[n - 1].into() * x[n - 1];
    }
}

impl Tridiagonal<f64> {
    /// Entry-wise `self + scale * other`, promoted to complex.
    pub fn combine(&self, other: &Tridiagonal<f64>, scale: Complex64) -> Tridiagonal<Complex64> {
        let zip = |a: &[f64], b: &[f64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(&a, &b)| Complex64::from(a) + scale * b).collect()
        };
        Tridiagonal {
            lower: zip(&self.lower, &other.lower),
            diag: zip(&self.diag, &other.diag),
            upper: zip(&self.upper, &other.upper),
        }
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &Tridiagonal<f64>) -> Tridiagonal<f64> {
        let zip = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(a, b)| a + b).collect();
        Tridiagonal {
            lower: zip(&self.lower, &other.lower),
            diag: zip(&self.diag, &other.diag),
            upper: zip(&self.upper, &other.upper),
        }
    }

    /// `upper[i] == lower[i+1]` for every row.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.len().saturating_sub(1)).all(|i| (self.upper[i] - self.lower[i + 1]).abs() <= tol)
    }
}

/// Consistent mass matrix `M_ij = <v_i, v_j>`.
pub fn assemble_mass(mesh: &Mesh1D) -> Tridiagonal<f64> {
    let n = mesh.len();
    let mut m = Tridiagonal::zeros(n);
    for (e, h) in mesh.widths().into_iter().enumerate() {
        m.diag[e] += h / 3.0;
        m.diag[e + 1] += h / 3.0;
        m.upper[e] += h / 6.0;
        m.lower[e + 1] += h / 6.0;
    }
    m
}

/// Stiffness matrix `K_ij = <v_i', v_j'>` with one-sided boundary rows.
/// Dirichlet conditions are imposed when the evolution system is formed.
pub fn assemble_stiffness(mesh: &Mesh1D) -> Tridiagonal<f64> {
    let n = mesh.len();
    let mut k = Tridiagonal::zeros(n);
    for (e, h) in mesh.widths().into_iter().enumerate() {
        k.diag[e] += 1.0 / h;
        k.diag[e + 1] += 1.0 / h;
        k.upper[e] -= 1.0 / h;
        k.lower[e + 1] -= 1.0 / h;
    }
    k
}

/// Point potential `q u(0) v(0)`: hat functions are nodal, so only the
/// origin diagonal is populated.
pub fn delta_term(mesh: &Mesh1D, q: f64) -> Tridiagonal<f64> {
    let mut d = Tridiagonal::zeros(mesh.len());
    d.diag[mesh.origin_index()] = q;
    d
}

/// Nodal coefficients of a continuous piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub values: Vec<Complex64>,
    mesh: Arc<Mesh1D>,
}

impl ComplexField {
    pub fn new(mesh: Arc<Mesh1D>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::Dimension {
                expected: mesh.len(),
                got: values.len(),
            });
        }
        Ok(Self { values, mesh })
    }

    pub fn zeros(mesh: Arc<Mesh1D>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); mesh.len()];
        Self { values, mesh }
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn at_origin(&self) -> Complex64 {
        self.values[self.mesh.origin_index()]
    }

    /// Value of the interpolant at `x`; zero outside the mesh.
    pub fn eval(&self, x: f64) -> Complex64 {
        let nodes = self.mesh.nodes();
        if x < nodes[0] || x > nodes[nodes.len() - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let j = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1);
        let (a, b) = (nodes[j - 1], nodes[j]);
        let s = (x - a) / (b - a);
        self.values[j - 1] * (1.0 - s) + self.values[j] * s
    }

    /// `max_i |u_i|`, which equals the sup norm of the interpolant.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.values.iter_mut().for_each(|z| *z *= factor);
    }

    /// Pointwise difference; both fields must share a mesh.
    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        if self.values.len() != other.values.len() {
            return Err(Error::Dimension {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(ComplexField {
            values,
            mesh: self.mesh.clone(),
        })
    }
}

/// Nodal interpolation of `f`.
pub fn project<F>(mesh: &Arc<Mesh1D>, f: F) -> ComplexField
where
    F: Fn(f64) -> Complex64,
{
    ComplexField {
        values: mesh.nodes().iter().map(|&x| f(x)).collect(),
        mesh: mesh.clone(),
    }
}

/// `u* M u`; the imaginary residue must stay below `1e-10`.
pub fn discrete_mass(u: &ComplexField, mass: &Tridiagonal<f64>) -> Result<f64> {
    if mass.len() != u.values.len() {
        return Err(Error::Dimension {
            expected: u.values.len(),
            got: mass.len(),
        });
    }
    let mu = mass.apply(&u.values);
    let s: Complex64 = u.values.iter().zip(&mu).map(|(a, b)| a.conj() * b).sum();
    if s.im.abs() > 1e-10 * s.re.abs().max(1.0) {
        return Err(Error::MassResidue(s.im));
    }
    Ok(s.re.max(0.0))
}

/// Exact `∫|u|²` of the interpolant over elements; cheaper than forming `M u`.
pub fn l2_norm_sq(u: &ComplexField) -> f64 {
    let nodes = u.mesh.nodes();
    let v = &u.values;
    (0..v.len() - 1)
        .map(|e| element_mass(nodes[e + 1] - nodes[e], v[e], v[e + 1]))
        .sum()
}

#[inline]
pub(crate) fn element_mass(h: f64, a: Complex64, b: Complex64) -> f64 {
    h / 3.0 * (a.norm_sqr() + b.norm_sqr() + (a.conj() * b).re)
}
