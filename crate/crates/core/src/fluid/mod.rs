//! Incompressible momentum solver on a no-slip rectangle (MAC grid).
//!
//! One explicit step is
//! `u* = u + dt (-conv(u) + div S^θ(Du) + F)` followed by the discrete Leray
//! projection. Every energy contribution of the step is recorded so the
//! coupled ledger can audit it.

mod convection;
mod projection;
mod strain;
mod velocity;

pub use convection::convective_term;
pub use projection::{gradient, neumann_laplacian, Projector};
pub use strain::{
    stress_divergence, stress_field, stress_power, sym_gradient, tensor_divergence, StaggeredTensor,
};
pub use velocity::VelocityField;

use thiserror::Error;

use crate::mesh::ScalarField;
use crate::rheology::StressLaw;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FluidError {
    #[error("time step {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("non-finite values in the velocity after the step at t = {time}")]
    NonFinite { time: f64 },
    #[error("Poisson solve failed: {0}")]
    Solver(String),
    #[error("fields live on different meshes")]
    MeshMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub velocity: VelocityField,
    pub time: f64,
    /// Projection multiplier `φ / dt` from the last step.
    pub pressure: ScalarField,
}

impl FluidState {
    pub fn new(velocity: VelocityField, time: f64) -> Self {
        let pressure = ScalarField::zeros(velocity.mesh);
        Self { velocity, time, pressure }
    }
}

/// Energy bookkeeping of one fluid step (all terms already multiplied by `dt`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluidStepRecord {
    pub energy_before: f64,
    pub energy_after: f64,
    /// `dt sum S^θ(Du):Du`, evaluated at the start of the step.
    pub stress_dissipation: f64,
    /// `dt <F, u>`.
    pub drag_work: f64,
    /// `dt <conv(u), u>`; zero up to rounding.
    pub convective_work: f64,
    /// `E(u*) - E(u^{n+1}) >= 0`.
    pub projection_loss: f64,
}

/// `min(h / |u|_inf, h^2 / (2 ν_eff))` with the effective viscosity
/// `ν0 + (ν1 + θ s_max) max|Du|^{s_max - 2}`.
pub fn stable_time_step(u: &VelocityField, law: &StressLaw) -> f64 {
    let h = u.mesh.h();
    let umax = u.max_abs();
    let advective = if umax > 0.0 { h / umax } else { f64::INFINITY };
    let dmax = sym_gradient(u).max_norm();
    let growth = if dmax > 0.0 { dmax.powf(law.s_max() - 2.0) } else if law.s_max() == 2.0 { 1.0 } else { 0.0 };
    let nu_eff = law.nu0() + (law.nu1() + law.theta() * law.s_max()) * growth;
    let diffusive = if nu_eff > 0.0 { h * h / (2.0 * nu_eff) } else { f64::INFINITY };
    advective.min(diffusive)
}

/// One explicit momentum step with body force `drag`, then projection.
pub fn fluid_step(
    state: &FluidState,
    drag: &VelocityField,
    law: &StressLaw,
    dt: f64,
    projector: &Projector,
) -> Result<(FluidState, FluidStepRecord), FluidError> {
    if !(dt > 0.0) {
        return Err(FluidError::BadTimeStep(dt));
    }
    let u = &state.velocity;
    if drag.mesh != u.mesh || projector.mesh() != &u.mesh {
        return Err(FluidError::MeshMismatch);
    }
    let limit = stable_time_step(u, law);
    if dt > limit {
        return Err(FluidError::Cfl { dt, limit });
    }
    let s = law.exponent().slab_at(state.time);
    let strain = sym_gradient(u);
    let stress = stress_field(&strain, law, s);
    let div_s = tensor_divergence(&stress);
    let conv = convective_term(u);

    let mut u_star = u.clone();
    u_star.axpy(-dt, &conv);
    u_star.axpy(dt, &div_s);
    u_star.axpy(dt, drag);
    u_star.enforce_no_slip();

    let (u_next, phi) = projector.project_with_potential(&u_star)?;
    let time = state.time + dt;
    if !u_next.is_finite() {
        return Err(FluidError::NonFinite { time });
    }
    let record = FluidStepRecord {
        energy_before: u.kinetic_energy(),
        energy_after: u_next.kinetic_energy(),
        stress_dissipation: dt * stress.pairing(&strain),
        drag_work: dt * drag.dot(u),
        convective_work: dt * conv.dot(u),
        projection_loss: u_star.kinetic_energy() - u_next.kinetic_energy(),
    };
    let pressure = ScalarField { mesh: phi.mesh, data: phi.data.iter().map(|p| p / dt).collect() };
    Ok((FluidState { velocity: u_next, time, pressure }, record))
}
