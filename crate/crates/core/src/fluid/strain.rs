use crate::mesh::{CellMagnitudes, Mesh, ScalarField, Sym2, TensorField};
use crate::rheology::StressLaw;

use super::velocity::VelocityField;

/// Symmetric tensor field in MAC layout: diagonal entries at cell centers,
/// the off-diagonal entry at cell corners (nodes).
///
/// Node `(i, j)`, `i = 0..=nx`, `j = 0..=ny`, is stored at `j * (nx + 1) + i`.
/// Boundary nodes carry half weight (corners a quarter) in the pairing, which
/// is what turns the ghost-value no-slip closure into an exact summation by
/// parts.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredTensor {
    pub mesh: Mesh,
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub xy: Vec<f64>,
}

impl StaggeredTensor {
    pub fn zeros(mesh: Mesh) -> Self {
        let n = mesh.n_cells();
        Self { mesh, xx: vec![0.0; n], yy: vec![0.0; n], xy: vec![0.0; (mesh.nx + 1) * (mesh.ny + 1)] }
    }

    #[inline]
    pub fn inode(&self, i: usize, j: usize) -> usize {
        j * (self.mesh.nx + 1) + i
    }

    #[inline]
    pub fn node_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.mesh.nx { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.mesh.ny { 0.5 } else { 1.0 };
        wx * wy
    }

    fn corner_mean_sq(&self, i: usize, j: usize) -> f64 {
        let a = self.xy[self.inode(i, j)];
        let b = self.xy[self.inode(i + 1, j)];
        let c = self.xy[self.inode(i, j + 1)];
        let d = self.xy[self.inode(i + 1, j + 1)];
        0.25 * (a * a + b * b + c * c + d * d)
    }

    /// Cells adjacent to node `(i, j)`.
    fn node_cells(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        let m = self.mesh;
        let is = [i.checked_sub(1), (i < m.nx).then_some(i)];
        let js = [j.checked_sub(1), (j < m.ny).then_some(j)];
        js.into_iter()
            .flatten()
            .flat_map(move |jj| is.into_iter().flatten().map(move |ii| m.idx(ii, jj)))
    }

    /// Frobenius magnitude at cell `k = (i, j)`, shear averaged from the corners.
    #[inline]
    pub fn cell_norm_sq(&self, i: usize, j: usize) -> f64 {
        let k = self.mesh.idx(i, j);
        self.xx[k] * self.xx[k] + self.yy[k] * self.yy[k] + 2.0 * self.corner_mean_sq(i, j)
    }

    /// Frobenius magnitude at node `(i, j)`, diagonal averaged from adjacent cells.
    pub fn node_norm_sq(&self, i: usize, j: usize) -> f64 {
        let (mut acc, mut n) = (0.0, 0.0);
        for k in self.node_cells(i, j) {
            acc += self.xx[k] * self.xx[k] + self.yy[k] * self.yy[k];
            n += 1.0;
        }
        let s = self.xy[self.inode(i, j)];
        acc / n + 2.0 * s * s
    }

    /// Weighted Frobenius pairing `sum S:D` with cell-volume weights.
    pub fn pairing(&self, other: &StaggeredTensor) -> f64 {
        let m = self.mesh;
        let mut cells = 0.0;
        for k in 0..m.n_cells() {
            cells += self.xx[k] * other.xx[k] + self.yy[k] * other.yy[k];
        }
        let mut nodes = 0.0;
        for j in 0..=m.ny {
            for i in 0..=m.nx {
                let k = self.inode(i, j);
                nodes += self.node_weight(i, j) * self.xy[k] * other.xy[k];
            }
        }
        (cells + 2.0 * nodes) * m.cell_volume()
    }

    pub fn max_norm(&self) -> f64 {
        let m = self.mesh;
        let mut best: f64 = 0.0;
        for j in 0..m.ny {
            for i in 0..m.nx {
                best = best.max(self.cell_norm_sq(i, j));
            }
        }
        for j in 0..=m.ny {
            for i in 0..=m.nx {
                best = best.max(self.node_norm_sq(i, j));
            }
        }
        best.sqrt()
    }

    /// Everything at cell centers, shear averaged from the four corners.
    pub fn to_cell_centered(&self) -> TensorField {
        let m = self.mesh;
        let mut out = TensorField::zeros(m);
        for j in 0..m.ny {
            for i in 0..m.nx {
                let k = m.idx(i, j);
                let xy = 0.25
                    * (self.xy[self.inode(i, j)]
                        + self.xy[self.inode(i + 1, j)]
                        + self.xy[self.inode(i, j + 1)]
                        + self.xy[self.inode(i + 1, j + 1)]);
                out.data[k] = Sym2::new(self.xx[k], xy, self.yy[k]);
            }
        }
        out
    }
}

impl CellMagnitudes for StaggeredTensor {
    fn mesh(&self) -> &Mesh {
        &self.mesh
    }
    fn magnitudes(&self) -> Vec<f64> {
        let m = self.mesh;
        (0..m.ny).flat_map(|j| (0..m.nx).map(move |i| (i, j))).map(|(i, j)| self.cell_norm_sq(i, j).sqrt()).collect()
    }
}

/// `(∇u + ∇uᵀ)/2` by centered differences; shear at nodes uses odd ghost
/// values for the tangential components.
pub fn sym_gradient(u: &VelocityField) -> StaggeredTensor {
    let m = u.mesh;
    let mut d = StaggeredTensor::zeros(m);
    for j in 0..m.ny {
        for i in 0..m.nx {
            let k = m.idx(i, j);
            d.xx[k] = (u.u[u.iu(i + 1, j)] - u.u[u.iu(i, j)]) / m.hx;
            d.yy[k] = (u.v[u.iv(i, j + 1)] - u.v[u.iv(i, j)]) / m.hy;
        }
    }
    let uval = |i: usize, j: i64| -> f64 {
        if j < 0 {
            -u.u[u.iu(i, 0)]
        } else if j as usize >= m.ny {
            -u.u[u.iu(i, m.ny - 1)]
        } else {
            u.u[u.iu(i, j as usize)]
        }
    };
    let vval = |i: i64, j: usize| -> f64 {
        if i < 0 {
            -u.v[u.iv(0, j)]
        } else if i as usize >= m.nx {
            -u.v[u.iv(m.nx - 1, j)]
        } else {
            u.v[u.iv(i as usize, j)]
        }
    };
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let dudy = (uval(i, j as i64) - uval(i, j as i64 - 1)) / m.hy;
            let dvdx = (vval(i as i64, j) - vval(i as i64 - 1, j)) / m.hx;
            let k = d.inode(i, j);
            d.xy[k] = 0.5 * (dudy + dvdx);
        }
    }
    d
}

/// Regularized stress `S^θ(Du)` at the staggered locations. Cell exponents
/// come from `s`; node exponents are the mean of the adjacent cells.
pub fn stress_field(strain: &StaggeredTensor, law: &StressLaw, s: &ScalarField) -> StaggeredTensor {
    let m = strain.mesh;
    let mut out = StaggeredTensor::zeros(m);
    for j in 0..m.ny {
        for i in 0..m.nx {
            let k = m.idx(i, j);
            let norm = strain.cell_norm_sq(i, j).sqrt();
            let mu = if norm == 0.0 { 0.0 } else { law.regularized_viscosity(s.data[k], norm) };
            out.xx[k] = mu * strain.xx[k];
            out.yy[k] = mu * strain.yy[k];
        }
    }
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let k = strain.inode(i, j);
            if strain.xy[k] == 0.0 {
                continue;
            }
            let (mut sn, mut cnt) = (0.0, 0.0);
            for c in strain.node_cells(i, j) {
                sn += s.data[c];
                cnt += 1.0;
            }
            let norm = strain.node_norm_sq(i, j).sqrt();
            out.xy[k] = law.regularized_viscosity(sn / cnt, norm) * strain.xy[k];
        }
    }
    out
}

/// Face-centered divergence of a staggered tensor; the negative adjoint of
/// [`sym_gradient`] under the face and tensor pairings.
pub fn tensor_divergence(t: &StaggeredTensor) -> VelocityField {
    let m = t.mesh;
    let mut out = VelocityField::zeros(m);
    for j in 0..m.ny {
        for i in 1..m.nx {
            let val = (t.xx[m.idx(i, j)] - t.xx[m.idx(i - 1, j)]) / m.hx
                + (t.xy[t.inode(i, j + 1)] - t.xy[t.inode(i, j)]) / m.hy;
            let k = out.iu(i, j);
            out.u[k] = val;
        }
    }
    for j in 1..m.ny {
        for i in 0..m.nx {
            let val = (t.xy[t.inode(i + 1, j)] - t.xy[t.inode(i, j)]) / m.hx
                + (t.yy[m.idx(i, j)] - t.yy[m.idx(i, j - 1)]) / m.hy;
            let k = out.iv(i, j);
            out.v[k] = val;
        }
    }
    out
}

/// `div S^θ(t, x, Du)` on the faces.
pub fn stress_divergence(u: &VelocityField, law: &StressLaw, s: &ScalarField) -> VelocityField {
    tensor_divergence(&stress_field(&sym_gradient(u), law, s))
}

/// `sum S^θ(Du) : Du` with the staggered weights.
pub fn stress_power(u: &VelocityField, law: &StressLaw, s: &ScalarField) -> f64 {
    let d = sym_gradient(u);
    stress_field(&d, law, s).pairing(&d)
}
