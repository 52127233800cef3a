use crate::kernel::{axis_weights, Ghost, Stencil};
use crate::mesh::{CellMagnitudes, CellVectorField, Mesh, ScalarField};

/// Face-normal velocity on a MAC grid.
///
/// `u` lives on vertical faces `(i hx, (j + 1/2) hy)`, `i = 0..=nx`, stored with
/// `nx + 1` columns; `v` on horizontal faces `((i + 1/2) hx, j hy)`,
/// `j = 0..=ny`, stored with `nx` columns. Wall-normal components are zero;
/// tangential no-slip is imposed through odd ghost values.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub mesh: Mesh,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(mesh: Mesh) -> Self {
        Self { u: vec![0.0; (mesh.nx + 1) * mesh.ny], v: vec![0.0; mesh.nx * (mesh.ny + 1)], mesh }
    }

    #[inline]
    pub fn iu(&self, i: usize, j: usize) -> usize {
        j * (self.mesh.nx + 1) + i
    }

    #[inline]
    pub fn iv(&self, i: usize, j: usize) -> usize {
        j * self.mesh.nx + i
    }

    pub fn u_position(&self, i: usize, j: usize) -> [f64; 2] {
        [i as f64 * self.mesh.hx, (j as f64 + 0.5) * self.mesh.hy]
    }

    pub fn v_position(&self, i: usize, j: usize) -> [f64; 2] {
        [(i as f64 + 0.5) * self.mesh.hx, j as f64 * self.mesh.hy]
    }

    /// Samples `f` at the faces, then zeroes wall-normal components.
    pub fn from_fn(mesh: Mesh, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut out = Self::zeros(mesh);
        for j in 0..mesh.ny {
            for i in 0..=mesh.nx {
                let p = out.u_position(i, j);
                let k = out.iu(i, j);
                out.u[k] = f(p[0], p[1])[0];
            }
        }
        for j in 0..=mesh.ny {
            for i in 0..mesh.nx {
                let p = out.v_position(i, j);
                let k = out.iv(i, j);
                out.v[k] = f(p[0], p[1])[1];
            }
        }
        out.enforce_no_slip();
        out
    }

    /// `u = ∂ψ/∂y`, `v = -∂ψ/∂x` from node values of `ψ`: discretely
    /// divergence-free, and no-slip in the normal direction when `ψ` is
    /// constant on the walls.
    pub fn from_stream_function(mesh: Mesh, psi: impl Fn(f64, f64) -> f64) -> Self {
        let node = |i: usize, j: usize| psi(i as f64 * mesh.hx, j as f64 * mesh.hy);
        let mut out = Self::zeros(mesh);
        for j in 0..mesh.ny {
            for i in 0..=mesh.nx {
                let k = out.iu(i, j);
                out.u[k] = (node(i, j + 1) - node(i, j)) / mesh.hy;
            }
        }
        for j in 0..=mesh.ny {
            for i in 0..mesh.nx {
                let k = out.iv(i, j);
                out.v[k] = -(node(i + 1, j) - node(i, j)) / mesh.hx;
            }
        }
        out.enforce_no_slip();
        out
    }

    pub fn enforce_no_slip(&mut self) {
        let (nx, ny) = (self.mesh.nx, self.mesh.ny);
        for j in 0..ny {
            let (a, b) = (self.iu(0, j), self.iu(nx, j));
            self.u[a] = 0.0;
            self.u[b] = 0.0;
        }
        for i in 0..nx {
            let (a, b) = (self.iv(i, 0), self.iv(i, ny));
            self.v[a] = 0.0;
            self.v[b] = 0.0;
        }
    }

    /// `sum over faces (u u' + v v') hx hy`.
    pub fn dot(&self, other: &VelocityField) -> f64 {
        let vol = self.mesh.cell_volume();
        let su: f64 = self.u.iter().zip(&other.u).map(|(a, b)| a * b).sum();
        let sv: f64 = self.v.iter().zip(&other.v).map(|(a, b)| a * b).sum();
        (su + sv) * vol
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `1/2 sum |u|^2 hx hy`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &VelocityField) {
        self.u.iter_mut().zip(&x.u).for_each(|(s, y)| *s += a * y);
        self.v.iter_mut().zip(&x.v).for_each(|(s, y)| *s += a * y);
    }

    pub fn scaled(&self, a: f64) -> VelocityField {
        VelocityField {
            mesh: self.mesh,
            u: self.u.iter().map(|x| a * x).collect(),
            v: self.v.iter().map(|x| a * x).collect(),
        }
    }

    pub fn sub(&self, other: &VelocityField) -> VelocityField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Cell-centered discrete divergence.
    pub fn divergence(&self) -> ScalarField {
        let m = self.mesh;
        let mut out = ScalarField::zeros(m);
        for j in 0..m.ny {
            for i in 0..m.nx {
                out.data[m.idx(i, j)] = (self.u[self.iu(i + 1, j)] - self.u[self.iu(i, j)]) / m.hx
                    + (self.v[self.iv(i, j + 1)] - self.v[self.iv(i, j)]) / m.hy;
            }
        }
        out
    }

    pub fn to_cell_centered(&self) -> CellVectorField {
        let m = self.mesh;
        let mut out = CellVectorField::zeros(m);
        for j in 0..m.ny {
            for i in 0..m.nx {
                let k = m.idx(i, j);
                out.x[k] = 0.5 * (self.u[self.iu(i, j)] + self.u[self.iu(i + 1, j)]);
                out.y[k] = 0.5 * (self.v[self.iv(i, j)] + self.v[self.iv(i, j + 1)]);
            }
        }
        out
    }

    /// Bilinear stencil of the `u` component at `p`.
    #[inline]
    pub fn u_stencil(&self, p: [f64; 2]) -> Stencil {
        let m = &self.mesh;
        let wx = axis_weights(p[0], m.hx, 0.0, m.nx + 1, Ghost::Clamp);
        let wy = axis_weights(p[1], m.hy, 0.5, m.ny, Ghost::Odd);
        Stencil::new(wx, wy, m.nx + 1)
    }

    /// Bilinear stencil of the `v` component at `p`.
    #[inline]
    pub fn v_stencil(&self, p: [f64; 2]) -> Stencil {
        let m = &self.mesh;
        let wx = axis_weights(p[0], m.hx, 0.5, m.nx, Ghost::Odd);
        let wy = axis_weights(p[1], m.hy, 0.0, m.ny + 1, Ghost::Clamp);
        Stencil::new(wx, wy, m.nx)
    }

    /// Velocity at an interior point.
    #[inline]
    pub fn interpolate(&self, p: [f64; 2]) -> [f64; 2] {
        [self.u_stencil(p).gather(&self.u), self.v_stencil(p).gather(&self.v)]
    }
}

impl CellMagnitudes for VelocityField {
    fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    fn magnitudes(&self) -> Vec<f64> {
        self.to_cell_centered().magnitudes()
    }
}
