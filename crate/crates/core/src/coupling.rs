//! Two-way drag coupling between the particle phase and the fluid, and the
//! energy ledger that audits every coupled step.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fluid::{fluid_step, FluidError, FluidState, Projector, VelocityField};
use crate::kinetic::{advance, deposit, KineticError, MomentFields, ParticleEnsemble};
use crate::rheology::StressLaw;

#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("moments and velocity live on different meshes")]
    MeshMismatch,
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error("ledger i/o: {0}")]
    Ledger(#[from] csv::Error),
    #[error("ledger has no rows")]
    EmptyLedger,
}

/// Face values of `F = -(ρ u - j)` with `ρ`, `j` averaged from the two
/// adjacent cells; wall faces carry no force.
pub fn drag_force(moments: &MomentFields, u: &VelocityField) -> Result<VelocityField, CouplingError> {
    let m = u.mesh;
    if moments.rho.mesh != m || moments.j.mesh != m {
        return Err(CouplingError::MeshMismatch);
    }
    let rho = &moments.rho.data;
    let mut f = VelocityField::zeros(m);
    for j in 0..m.ny {
        for i in 1..m.nx {
            let (a, b) = (m.idx(i - 1, j), m.idx(i, j));
            let k = f.iu(i, j);
            let r = 0.5 * (rho[a] + rho[b]);
            let jx = 0.5 * (moments.j.x[a] + moments.j.x[b]);
            f.u[k] = -(r * u.u[k] - jx);
        }
    }
    for j in 1..m.ny {
        for i in 0..m.nx {
            let (a, b) = (m.idx(i, j - 1), m.idx(i, j));
            let k = f.iv(i, j);
            let r = 0.5 * (rho[a] + rho[b]);
            let jy = 0.5 * (moments.j.y[a] + moments.j.y[b]);
            f.v[k] = -(r * u.v[k] - jy);
        }
    }
    Ok(f)
}

/// Drag force deposited with the interpolation stencils themselves:
/// `F_f = -sum_k w_k c_f(X_k) (u_k - V_k) / |cell|`.
///
/// This is the exact adjoint of `interpolate`, so `<F, u> = -sum w (u_k - V_k)·u_k`
/// holds to rounding.
pub fn particle_drag_force(particles: &ParticleEnsemble, u: &VelocityField) -> VelocityField {
    let mut f = VelocityField::zeros(u.mesh);
    let inv = 1.0 / u.mesh.cell_volume();
    for k in 0..particles.len() {
        let x = particles.x[k];
        let (su, sv) = (u.u_stencil(x), u.v_stencil(x));
        let uk = [su.gather(&u.u), sv.gather(&u.v)];
        let w = particles.w[k] * inv;
        su.scatter(&mut f.u, -w * (uk[0] - particles.v[k][0]));
        sv.scatter(&mut f.v, -w * (uk[1] - particles.v[k][1]));
    }
    f.enforce_no_slip();
    f
}

/// Drag work exchanged over one step with `u` frozen at the particles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExchangeAudit {
    /// `-sum w (u_k - V_k)·u_k dt`
    pub fluid_work: f64,
    /// `sum w (u_k - V_k)·V_k dt`
    pub kinetic_work: f64,
    /// `-sum w |u_k - V_k|^2 dt`
    pub dissipation: f64,
}

impl ExchangeAudit {
    /// `W_f + W_p - dissipation`, zero up to rounding.
    pub fn defect(&self) -> f64 {
        self.fluid_work + self.kinetic_work - self.dissipation
    }
}

pub fn exchange_audit(particles: &ParticleEnsemble, u: &VelocityField, dt: f64) -> ExchangeAudit {
    let mut out = ExchangeAudit::default();
    for k in 0..particles.len() {
        let uk = u.interpolate(particles.x[k]);
        let v = particles.v[k];
        let w = particles.w[k] * dt;
        let r = [uk[0] - v[0], uk[1] - v[1]];
        out.fluid_work -= w * (r[0] * uk[0] + r[1] * uk[1]);
        out.kinetic_work += w * (r[0] * v[0] + r[1] * v[1]);
        out.dissipation -= w * (r[0] * r[0] + r[1] * r[1]);
    }
    out
}

/// One ledger line; the CSV header is exactly these field names.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: f64,
    #[serde(rename = "E_fluid")]
    pub e_fluid: f64,
    #[serde(rename = "E_kin")]
    pub e_kin: f64,
    #[serde(rename = "D_stress_cum")]
    pub d_stress_cum: f64,
    #[serde(rename = "D_drag_cum")]
    pub d_drag_cum: f64,
    pub residual_cum: f64,
}

pub const LEDGER_HEADER: [&str; 6] = ["t", "E_fluid", "E_kin", "D_stress_cum", "D_drag_cum", "residual_cum"];

/// Per-step quantities kept alongside the ledger rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepAudit {
    pub d_stress: f64,
    pub d_drag: f64,
    pub residual: f64,
    pub exchange: ExchangeAudit,
    pub energy_before: f64,
    pub energy_after: f64,
}

/// Append-only energy ledger.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
    pub steps: Vec<StepAudit>,
}

impl EnergyLedger {
    /// Ledger opened with the row at the initial time.
    pub fn start(t: f64, e_fluid: f64, e_kin: f64) -> Self {
        Self { rows: vec![LedgerRow { t, e_fluid, e_kin, ..Default::default() }], steps: Vec::new() }
    }

    pub fn last(&self) -> Option<&LedgerRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CouplingError> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(LEDGER_HEADER)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads rows written by [`write_csv`](Self::write_csv); per-step audits are not stored.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, CouplingError> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.iter().ne(LEDGER_HEADER.iter().copied()) {
            return Err(CouplingError::Ledger(csv::Error::from(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("unexpected ledger header {:?}", header.iter().collect::<Vec<_>>()),
            ))));
        }
        let rows = r.deserialize().collect::<Result<Vec<LedgerRow>, _>>()?;
        Ok(Self { rows, steps: Vec::new() })
    }
}

/// Energies of a coupled state: `(1/2 sum |u|^2 h^2, 1/2 sum w |V|^2)`.
pub fn energies(fluid: &FluidState, particles: &ParticleEnsemble) -> (f64, f64) {
    (fluid.velocity.kinetic_energy(), particles.kinetic_energy())
}

/// Records one step and returns its residual
/// `ΔE_fluid + ΔE_kin + D_stress_step + D_drag_step`.
pub fn audit_step(
    ledger: &mut EnergyLedger,
    before: (f64, f64),
    after: (f64, f64),
    t_after: f64,
    d_stress: f64,
    d_drag: f64,
    exchange: ExchangeAudit,
) -> f64 {
    let e0 = before.0 + before.1;
    let e1 = after.0 + after.1;
    let residual = e1 - e0 + d_stress + d_drag;
    let prev = ledger.rows.last().copied().unwrap_or_default();
    ledger.rows.push(LedgerRow {
        t: t_after,
        e_fluid: after.0,
        e_kin: after.1,
        d_stress_cum: prev.d_stress_cum + d_stress,
        d_drag_cum: prev.d_drag_cum + d_drag,
        residual_cum: prev.residual_cum + residual,
    });
    ledger.steps.push(StepAudit { d_stress, d_drag, residual, exchange, energy_before: e0, energy_after: e1 });
    residual
}

/// Fluid and particle phases at a common time.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub fluid: FluidState,
    pub particles: ParticleEnsemble,
}

/// Lie-split coupled step: deposit, drag, fluid step, then particle push in
/// the new velocity. Appends one ledger row.
///
/// The drag dissipation entered in the ledger is the exact integral of
/// `|u_k - V_k(τ)|^2` along the frozen-velocity trajectories.
pub fn coupled_step(
    state: &CoupledState,
    law: &StressLaw,
    dt: f64,
    projector: &Projector,
    ledger: &mut EnergyLedger,
) -> Result<CoupledState, CouplingError> {
    let before = energies(&state.fluid, &state.particles);
    let u = &state.fluid.velocity;
    let exchange = exchange_audit(&state.particles, u, dt);
    let force = particle_drag_force(&state.particles, u);
    let (fluid, record) = fluid_step(&state.fluid, &force, law, dt, projector)?;
    let (particles, stats) = advance(&state.particles, &fluid.velocity, dt)?;
    let next = CoupledState { fluid, particles };
    let after = energies(&next.fluid, &next.particles);
    audit_step(ledger, before, after, next.fluid.time, record.stress_dissipation, stats.drag_dissipation, exchange);
    Ok(next)
}

/// Moments of the current particle state.
pub fn moments(state: &CoupledState) -> MomentFields {
    deposit(&state.particles, &state.fluid.velocity.mesh)
}
