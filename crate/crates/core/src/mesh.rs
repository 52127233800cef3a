//! Uniform rectangular meshes and the cell-centered fields that live on them.
//!
//! Storage is row-major with `x` fastest: cell `(i, j)` sits at `j * nx + i`.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh needs at least one cell per axis, got {nx}x{ny}")]
    Empty { nx: usize, ny: usize },
    #[error("mesh spacing must be positive and finite, got hx={hx}, hy={hy}")]
    BadSpacing { hx: f64, hy: f64 },
    #[error("field length {got} does not match mesh size {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("tensor is not symmetric: xy={xy}, yx={yx}")]
    NotSymmetric { xy: f64, yx: f64 },
}

/// A uniform `nx x ny` cell mesh on `[0, nx*hx] x [0, ny*hy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, hx: f64, hy: f64) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::Empty { nx, ny });
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite()) {
            return Err(MeshError::BadSpacing { hx, hy });
        }
        Ok(Self { nx, ny, hx, hy })
    }

    /// Mesh with `nx x ny` cells covering a `lx x ly` rectangle.
    pub fn with_extents(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::Empty { nx, ny });
        }
        Self::new(nx, ny, lx / nx as f64, ly / ny as f64)
    }

    pub fn unit_square(n: usize) -> Self {
        Self::with_extents(n, n, 1.0, 1.0).expect("n >= 1")
    }

    pub fn lx(&self) -> f64 {
        self.nx as f64 * self.hx
    }

    pub fn ly(&self) -> f64 {
        self.ny as f64 * self.hy
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn area(&self) -> f64 {
        self.lx() * self.ly()
    }

    pub fn diameter(&self) -> f64 {
        self.lx().hypot(self.ly())
    }

    /// Smallest spacing, used as "the" mesh width in CFL-type bounds.
    pub fn h(&self) -> f64 {
        self.hx.min(self.hy)
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.hx, (j as f64 + 0.5) * self.hy]
    }

    /// Iterator over `(i, j, center)` in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, [f64; 2])> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.cell_center(i, j))))
    }

    /// Cell containing `p`, clamped to the mesh.
    pub fn locate(&self, p: [f64; 2]) -> (usize, usize) {
        let i = ((p[0] / self.hx).floor().max(0.0) as usize).min(self.nx - 1);
        let j = ((p[1] / self.hy).floor().max(0.0) as usize).min(self.ny - 1);
        (i, j)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > 0.0 && p[0] < self.lx() && p[1] > 0.0 && p[1] < self.ly()
    }
}

/// Symmetric 2x2 tensor stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Self { xx: a, xy: 0.0, yy: b }
    }

    /// Accepts a full matrix and rejects it unless the off-diagonals agree exactly.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self, MeshError> {
        if m[0][1] != m[1][0] {
            return Err(MeshError::NotSymmetric { xy: m[0][1], yx: m[1][0] });
        }
        Ok(Self { xx: m[0][0], xy: m[0][1], yy: m[1][1] })
    }

    pub fn to_matrix(self) -> [[f64; 2]; 2] {
        [[self.xx, self.xy], [self.xy, self.yy]]
    }

    /// `A : B = tr(A^T B)`.
    #[inline]
    pub fn ddot(self, other: Sym2) -> f64 {
        self.xx * other.xx + 2.0 * self.xy * other.xy + self.yy * other.yy
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.ddot(self)
    }

    /// Frobenius norm.
    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    pub fn is_finite(self) -> bool {
        self.xx.is_finite() && self.xy.is_finite() && self.yy.is_finite()
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, t: Sym2) -> Sym2 {
        Sym2::new(self * t.xx, self * t.xy, self * t.yy)
    }
}

/// Cell-centered scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub mesh: Mesh,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(mesh: Mesh) -> Self {
        Self { data: vec![0.0; mesh.n_cells()], mesh }
    }

    pub fn constant(mesh: Mesh, value: f64) -> Self {
        Self { data: vec![value; mesh.n_cells()], mesh }
    }

    pub fn from_vec(mesh: Mesh, data: Vec<f64>) -> Result<Self, MeshError> {
        if data.len() != mesh.n_cells() {
            return Err(MeshError::LengthMismatch { expected: mesh.n_cells(), got: data.len() });
        }
        Ok(Self { mesh, data })
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let data = mesh.cells().map(|(_, _, c)| f(c[0], c[1])).collect();
        Self { mesh, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.mesh.idx(i, j)]
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum(data) * cell volume`.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.mesh.cell_volume()
    }
}

/// Cell-centered vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct CellVectorField {
    pub mesh: Mesh,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl CellVectorField {
    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.n_cells();
        Self { mesh, x: vec![0.0; n], y: vec![0.0; n] }
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let (x, y) = mesh.cells().map(|(_, _, c)| f(c[0], c[1])).map(|v| (v[0], v[1])).unzip();
        Self { mesh, x, y }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.mesh.idx(i, j);
        [self.x[k], self.y[k]]
    }
}

/// Cell-centered field of symmetric 2x2 tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub mesh: Mesh,
    pub data: Vec<Sym2>,
}

impl TensorField {
    pub fn zeros(mesh: Mesh) -> Self {
        Self { data: vec![Sym2::ZERO; mesh.n_cells()], mesh }
    }

    pub fn from_fn(mesh: Mesh, f: impl Fn(f64, f64) -> Sym2) -> Self {
        let data = mesh.cells().map(|(_, _, c)| f(c[0], c[1])).collect();
        Self { mesh, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Sym2 {
        self.data[self.mesh.idx(i, j)]
    }
}

/// Pointwise magnitudes of a cell-centered field, the input to every modular.
pub trait CellMagnitudes {
    fn mesh(&self) -> &Mesh;
    fn magnitudes(&self) -> Vec<f64>;
}

impl CellMagnitudes for ScalarField {
    fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.abs()).collect()
    }
}

impl CellMagnitudes for CellVectorField {
    fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect()
    }
}

impl CellMagnitudes for TensorField {
    fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|t| t.norm()).collect()
    }
}
