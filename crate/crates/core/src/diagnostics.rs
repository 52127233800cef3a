//! Run-time checks of structural bounds that are not part of any solver.

use crate::fluid::{sym_gradient, VelocityField};
use crate::kinetic::{ParticleEnsemble, DIM};

/// Full velocity gradient energy `sum |∇u|^2` with the staggered weights used
/// for the strain tensor.
pub fn gradient_energy(u: &VelocityField) -> f64 {
    let m = u.mesh;
    let vol = m.cell_volume();
    let mut total = 0.0;
    for j in 0..m.ny {
        for i in 0..m.nx {
            let dudx = (u.u[u.iu(i + 1, j)] - u.u[u.iu(i, j)]) / m.hx;
            let dvdy = (u.v[u.iv(i, j + 1)] - u.v[u.iv(i, j)]) / m.hy;
            total += (dudx * dudx + dvdy * dvdy) * vol;
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
    let d = sym_gradient(u);
    for j in 0..=m.ny {
        for i in 0..=m.nx {
            let dudy = (uval(i, j as i64) - uval(i, j as i64 - 1)) / m.hy;
            let dvdx = (vval(i as i64, j) - vval(i as i64 - 1, j)) / m.hx;
            total += d.node_weight(i, j) * (dudy * dudy + dvdx * dvdx) * vol;
        }
    }
    total
}

/// Empirical Korn constant `||∇u|| / ||Du||`; `None` for a rigid field.
pub fn korn_ratio(u: &VelocityField) -> Option<f64> {
    let d = sym_gradient(u);
    let sym = d.pairing(&d);
    if sym > 0.0 {
        Some((gradient_energy(u) / sym).sqrt())
    } else {
        None
    }
}

/// Relative deviation of `max fval(t) / max fval(0)` from `e^{d t}`.
pub fn growth_law_defect(initial: &ParticleEnsemble, current: &ParticleEnsemble, elapsed: f64) -> f64 {
    let f0 = initial.max_fval();
    if f0 == 0.0 {
        return 0.0;
    }
    let expected = (DIM as f64 * elapsed).exp();
    (current.max_fval() / f0 - expected).abs() / expected
}

/// Relative change of the total particle weight.
pub fn mass_defect(initial: &ParticleEnsemble, current: &ParticleEnsemble) -> f64 {
    let m0 = initial.total_mass();
    if m0 == 0.0 {
        return 0.0;
    }
    (current.total_mass() - m0).abs() / m0
}
