//! Particle solver for `∂t f + v·∇x f + div_v((u - v) f) = 0` on a rectangle
//! with specular walls.
//!
//! Along characteristics `dX/dt = V`, `dV/dt = u - V`. With `u` frozen at the
//! particle over a step this integrates in closed form, and the density value
//! carried by a particle grows by `e^{d dt}` because `div_v(u - v) = -d`.
//! Weights carry the phase-space measure and never change.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::fluid::VelocityField;
use crate::kernel::{axis_weights, Ghost, Stencil};
use crate::mesh::{CellVectorField, Mesh, ScalarField};

/// Spatial dimension of the particle phase.
pub const DIM: u32 = 2;

/// Wall crossings tolerated for one particle in one step.
pub const MAX_REFLECTIONS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticError {
    #[error("at least one particle is required")]
    NoParticles,
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("particle left the domain after {MAX_REFLECTIONS} reflections; time step too large")]
    Escape,
    #[error("non-finite particle state")]
    NonFinite,
    #[error("invalid initial distribution: {0}")]
    BadPreset(String),
    #[error("velocity field and particles use different domains")]
    MeshMismatch,
}

/// Initial phase-space density presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDistribution {
    Zero,
    /// Uniform on `Ω x [-vmax, vmax]^2` with total mass `mass`.
    UniformBox { mass: f64, vmax: f64 },
    /// Uniform in `x`, Maxwellian with temperature `temperature` in `v`.
    Maxwellian { mass: f64, temperature: f64 },
}

impl InitialDistribution {
    pub fn mass(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::UniformBox { mass, .. } | Self::Maxwellian { mass, .. } => mass,
        }
    }

    /// Density `f0(x, v)` on a domain of area `area`.
    pub fn density(&self, area: f64, v: [f64; 2]) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::UniformBox { mass, vmax } => {
                if v[0].abs() <= vmax && v[1].abs() <= vmax {
                    mass / (area * 4.0 * vmax * vmax)
                } else {
                    0.0
                }
            }
            Self::Maxwellian { mass, temperature } => {
                let norm = mass / (area * 2.0 * std::f64::consts::PI * temperature);
                norm * (-(v[0] * v[0] + v[1] * v[1]) / (2.0 * temperature)).exp()
            }
        }
    }

    fn check(&self) -> Result<(), KineticError> {
        let bad = |m: &str| Err(KineticError::BadPreset(m.into()));
        match *self {
            Self::Zero => Ok(()),
            Self::UniformBox { mass, vmax } => {
                if !(mass >= 0.0 && mass.is_finite()) {
                    bad("mass must be nonnegative")
                } else if !(vmax > 0.0 && vmax.is_finite()) {
                    bad("vmax must be positive")
                } else {
                    Ok(())
                }
            }
            Self::Maxwellian { mass, temperature } => {
                if !(mass >= 0.0 && mass.is_finite()) {
                    bad("mass must be nonnegative")
                } else if !(temperature > 0.0 && temperature.is_finite()) {
                    bad("temperature must be positive")
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Weighted particles; structure of arrays.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParticleEnsemble {
    pub x: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
    pub w: Vec<f64>,
    /// Pointwise value of `f` carried along the characteristic.
    pub fval: Vec<f64>,
}

impl ParticleEnsemble {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn push(&mut self, x: [f64; 2], v: [f64; 2], w: f64, fval: f64) {
        self.x.push(x);
        self.v.push(v);
        self.w.push(w);
        self.fval.push(fval);
    }

    pub fn total_mass(&self) -> f64 {
        self.w.iter().fold(0.0, |a, w| a + w)
    }

    /// `1/2 sum w |V|^2`.
    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.w.iter().zip(&self.v).fold(0.0, |a, (w, v)| a + w * (v[0] * v[0] + v[1] * v[1]))
    }

    pub fn max_fval(&self) -> f64 {
        self.fval.iter().copied().fold(0.0, f64::max)
    }

    pub fn momentum(&self) -> [f64; 2] {
        let mut p = [0.0; 2];
        for (w, v) in self.w.iter().zip(&self.v) {
            p[0] += w * v[0];
            p[1] += w * v[1];
        }
        p
    }
}

fn interior_uniform(rng: &mut ChaCha8Rng, hi: f64) -> f64 {
    loop {
        let x = rng.random_range(0.0..hi);
        if x > 0.0 {
            return x;
        }
    }
}

/// Equal-weight sample of `f0` with `w = mass / n`.
pub fn sample_initial(
    preset: &InitialDistribution,
    mesh: &Mesh,
    n: usize,
    seed: u64,
) -> Result<ParticleEnsemble, KineticError> {
    preset.check()?;
    if matches!(preset, InitialDistribution::Zero) || preset.mass() == 0.0 {
        return Ok(ParticleEnsemble::default());
    }
    if n == 0 {
        return Err(KineticError::NoParticles);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = preset.mass() / n as f64;
    let area = mesh.area();
    let mut out = ParticleEnsemble::default();
    for _ in 0..n {
        let x = [interior_uniform(&mut rng, mesh.lx()), interior_uniform(&mut rng, mesh.ly())];
        let v = match *preset {
            InitialDistribution::UniformBox { vmax, .. } => {
                [rng.random_range(-vmax..vmax), rng.random_range(-vmax..vmax)]
            }
            InitialDistribution::Maxwellian { temperature, .. } => {
                let sd = temperature.sqrt();
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                [sd * a, sd * b]
            }
            InitialDistribution::Zero => unreachable!(),
        };
        out.push(x, v, w, preset.density(area, v));
    }
    Ok(out)
}

/// Specular reflection off the walls of `[0, Lx] x [0, Ly]`.
///
/// Each crossing mirrors the overshoot and flips the normal velocity
/// component; a corner overshoot is handled one axis after the other. Speed
/// is preserved exactly.
pub fn reflect(mut x: [f64; 2], mut v: [f64; 2], mesh: &Mesh) -> Result<([f64; 2], [f64; 2]), KineticError> {
    if !(x[0].is_finite() && x[1].is_finite() && v[0].is_finite() && v[1].is_finite()) {
        return Err(KineticError::NonFinite);
    }
    let len = [mesh.lx(), mesh.ly()];
    let mut hits = 0;
    for axis in 0..2 {
        loop {
            let l = len[axis];
            if x[axis] < 0.0 {
                x[axis] = -x[axis];
            } else if x[axis] > l {
                x[axis] = 2.0 * l - x[axis];
            } else {
                break;
            }
            v[axis] = -v[axis];
            hits += 1;
            if hits > MAX_REFLECTIONS {
                return Err(KineticError::Escape);
            }
        }
        // grazing contact leaves the particle on the wall; nudge it inside
        if x[axis] == 0.0 {
            x[axis] = f64::MIN_POSITIVE.max(len[axis] * f64::EPSILON);
        } else if x[axis] == len[axis] {
            x[axis] = len[axis] * (1.0 - f64::EPSILON);
        }
    }
    Ok((x, v))
}

/// Per-step energy exchange of the exact drag integrator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdvanceStats {
    /// `sum w ∫_0^dt |u_k - V_k(τ)|^2 dτ = sum w |u_k - V_k|^2 (1 - e^{-2dt}) / 2`.
    pub drag_dissipation: f64,
    /// `sum w u_k · (V_k' - V_k)`: work done on the particles by the frozen flow.
    pub flow_work: f64,
}

/// Interpolated fluid velocity at every particle.
pub fn sample_velocity(particles: &ParticleEnsemble, u: &VelocityField) -> Vec<[f64; 2]> {
    particles.x.par_iter().map(|&x| u.interpolate(x)).collect()
}

/// Pushes every particle through `dt` with `u` frozen at its start position.
///
/// `V' = u_k + (V - u_k) e^{-dt}`, `X' = X + u_k dt + (V - u_k)(1 - e^{-dt})`,
/// then specular reflection; `fval' = fval e^{d dt}`.
pub fn advance(
    particles: &ParticleEnsemble,
    u: &VelocityField,
    dt: f64,
) -> Result<(ParticleEnsemble, AdvanceStats), KineticError> {
    if !(dt > 0.0) {
        return Err(KineticError::BadTimeStep(dt));
    }
    let mesh = u.mesh;
    let decay = (-dt).exp();
    let spread = -(-dt).exp_m1();
    let dissip_factor = -0.5 * (-2.0 * dt).exp_m1();
    let growth = (DIM as f64 * dt).exp();

    let pushed: Vec<Result<([f64; 2], [f64; 2], f64, f64), KineticError>> = (0..particles.len())
        .into_par_iter()
        .map(|k| {
            let (x, v, w) = (particles.x[k], particles.v[k], particles.w[k]);
            let uk = u.interpolate(x);
            let a = [v[0] - uk[0], v[1] - uk[1]];
            let v_new = [uk[0] + a[0] * decay, uk[1] + a[1] * decay];
            let x_new = [x[0] + uk[0] * dt + a[0] * spread, x[1] + uk[1] * dt + a[1] * spread];
            let dissipation = w * (a[0] * a[0] + a[1] * a[1]) * dissip_factor;
            let work = w * (uk[0] * (v_new[0] - v[0]) + uk[1] * (v_new[1] - v[1]));
            let (x_new, v_new) = reflect(x_new, v_new, &mesh)?;
            Ok((x_new, v_new, dissipation, work))
        })
        .collect();

    let mut out = ParticleEnsemble {
        x: Vec::with_capacity(particles.len()),
        v: Vec::with_capacity(particles.len()),
        w: particles.w.clone(),
        fval: particles.fval.iter().map(|f| f * growth).collect(),
    };
    let mut stats = AdvanceStats::default();
    for r in pushed {
        let (x, v, dissipation, work) = r?;
        out.x.push(x);
        out.v.push(v);
        stats.drag_dissipation += dissipation;
        stats.flow_work += work;
    }
    Ok((out, stats))
}

/// Velocity moments on cell centers: `∫ f dv`, `∫ v f dv`, `∫ |v|^2 f dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFields {
    pub rho: ScalarField,
    pub j: CellVectorField,
    pub e2: ScalarField,
}

/// Cell-centered bilinear stencil, ghost weights folded into the wall cells.
#[inline]
pub fn cell_stencil(mesh: &Mesh, p: [f64; 2]) -> Stencil {
    let wx = axis_weights(p[0], mesh.hx, 0.5, mesh.nx, Ghost::Clamp);
    let wy = axis_weights(p[1], mesh.hy, 0.5, mesh.ny, Ghost::Clamp);
    Stencil::new(wx, wy, mesh.nx)
}

/// Cloud-in-cell deposition of `w`, `w V`, `w |V|^2`, divided by the cell volume.
/// Accumulation runs in particle order, so the result is reproducible.
pub fn deposit(particles: &ParticleEnsemble, mesh: &Mesh) -> MomentFields {
    let mut rho = ScalarField::zeros(*mesh);
    let mut j = CellVectorField::zeros(*mesh);
    let mut e2 = ScalarField::zeros(*mesh);
    for k in 0..particles.len() {
        let st = cell_stencil(mesh, particles.x[k]);
        let (w, v) = (particles.w[k], particles.v[k]);
        st.scatter(&mut rho.data, w);
        st.scatter(&mut j.x, w * v[0]);
        st.scatter(&mut j.y, w * v[1]);
        st.scatter(&mut e2.data, w * (v[0] * v[0] + v[1] * v[1]));
    }
    let inv = 1.0 / mesh.cell_volume();
    rho.data.iter_mut().chain(j.x.iter_mut()).chain(j.y.iter_mut()).chain(e2.data.iter_mut()).for_each(|x| *x *= inv);
    MomentFields { rho, j, e2 }
}
