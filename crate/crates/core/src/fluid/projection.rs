use nalgebra::DMatrix;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::mesh::{Mesh, ScalarField};

use super::velocity::VelocityField;
use super::FluidError;

/// Discrete Leray projection on the MAC grid.
///
/// Solves `div grad φ = div u*` with homogeneous Neumann conditions and returns
/// `u* - grad φ`. The Neumann Laplacian is singular with constant null space,
/// so cell 0 is pinned to `φ = 0` and the remaining SPD system is factored
/// once by sparse Cholesky and reused for every solve on this mesh.
pub struct Projector {
    mesh: Mesh,
    factor: CscCholesky<f64>,
}

impl std::fmt::Debug for Projector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Projector").field("mesh", &self.mesh).finish_non_exhaustive()
    }
}

/// Relative residual above which a solve is reported as failed.
const SOLVE_RTOL: f64 = 1e-9;

impl Projector {
    pub fn new(mesh: Mesh) -> Result<Self, FluidError> {
        let n = mesh.n_cells();
        if n < 2 {
            return Err(FluidError::Solver("mesh too small for projection".into()));
        }
        let (ax, ay) = (1.0 / (mesh.hx * mesh.hx), 1.0 / (mesh.hy * mesh.hy));
        // rows/cols shifted by one: cell 0 is removed
        let mut coo = CooMatrix::new(n - 1, n - 1);
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                let k = mesh.idx(i, j);
                if k == 0 {
                    continue;
                }
                let mut diag = 0.0;
                let mut link = |nb: usize, a: f64, coo: &mut CooMatrix<f64>| {
                    diag += a;
                    if nb != 0 {
                        coo.push(k - 1, nb - 1, -a);
                    }
                };
                if i > 0 {
                    link(mesh.idx(i - 1, j), ax, &mut coo);
                }
                if i + 1 < mesh.nx {
                    link(mesh.idx(i + 1, j), ax, &mut coo);
                }
                if j > 0 {
                    link(mesh.idx(i, j - 1), ay, &mut coo);
                }
                if j + 1 < mesh.ny {
                    link(mesh.idx(i, j + 1), ay, &mut coo);
                }
                coo.push(k - 1, k - 1, diag);
            }
        }
        let csc = CscMatrix::from(&coo);
        let factor = CscCholesky::factor(&csc).map_err(|e| FluidError::Solver(format!("{e:?}")))?;
        Ok(Self { mesh, factor })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Potential `φ` with `div grad φ = rhs`, `φ = 0` in cell 0.
    pub fn solve_potential(&self, rhs: &ScalarField) -> Result<ScalarField, FluidError> {
        self.solve_potential_floor(rhs, 0.0)
    }

    /// As `solve_potential`, with `floor` a lower bound on the residual scale.
    fn solve_potential_floor(&self, rhs: &ScalarField, floor: f64) -> Result<ScalarField, FluidError> {
        let n = self.mesh.n_cells();
        // assembled matrix is -div grad
        let b: Vec<f64> = rhs.data[1..].iter().map(|r| -r).collect();
        let mut x = DMatrix::from_vec(n - 1, 1, b);
        self.factor.solve_mut(&mut x);
        let mut phi = ScalarField::zeros(self.mesh);
        phi.data[1..].copy_from_slice(x.as_slice());
        if phi.data.iter().any(|v| !v.is_finite()) {
            return Err(FluidError::Solver("non-finite potential".into()));
        }
        let resid = neumann_laplacian(&phi)
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let op_norm = 4.0 * (1.0 / (self.mesh.hx * self.mesh.hx) + 1.0 / (self.mesh.hy * self.mesh.hy));
        let phi_max = phi.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = rhs.data.iter().fold((op_norm * phi_max).max(floor), |m, v| m.max(v.abs()));
        if resid > SOLVE_RTOL * scale.max(f64::MIN_POSITIVE) && resid > 1e-300 {
            return Err(FluidError::Solver(format!("Poisson residual {resid:e} vs rhs scale {scale:e}")));
        }
        Ok(phi)
    }

    /// Returns the projected field together with the potential.
    pub fn project_with_potential(&self, u_star: &VelocityField) -> Result<(VelocityField, ScalarField), FluidError> {
        if u_star.mesh != self.mesh {
            return Err(FluidError::MeshMismatch);
        }
        let mut u = u_star.clone();
        u.enforce_no_slip();
        let floor = u.max_abs() * 2.0 * (1.0 / self.mesh.hx + 1.0 / self.mesh.hy);
        let phi = self.solve_potential_floor(&u.divergence(), floor)?;
        let g = gradient(&phi);
        u.axpy(-1.0, &g);
        Ok((u, phi))
    }

    pub fn project(&self, u_star: &VelocityField) -> Result<VelocityField, FluidError> {
        Ok(self.project_with_potential(u_star)?.0)
    }
}

/// Face gradient of a cell scalar; zero on wall faces.
pub fn gradient(phi: &ScalarField) -> VelocityField {
    let m = phi.mesh;
    let mut g = VelocityField::zeros(m);
    for j in 0..m.ny {
        for i in 1..m.nx {
            let k = g.iu(i, j);
            g.u[k] = (phi.at(i, j) - phi.at(i - 1, j)) / m.hx;
        }
    }
    for j in 1..m.ny {
        for i in 0..m.nx {
            let k = g.iv(i, j);
            g.v[k] = (phi.at(i, j) - phi.at(i, j - 1)) / m.hy;
        }
    }
    g
}

/// `div grad φ` with homogeneous Neumann walls (5-point stencil).
pub fn neumann_laplacian(phi: &ScalarField) -> ScalarField {
    gradient(phi).divergence()
}
