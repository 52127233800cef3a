mod common;

use std::sync::Arc;

use rand::Rng;

use common::{random_solenoidal, random_velocity, rng};
use vkf::coupling::{
    audit_step, coupled_step, drag_force, energies, exchange_audit, particle_drag_force, CoupledState, EnergyLedger,
};
use vkf::exponent_field::ExponentField;
use vkf::fluid::{fluid_step, stable_time_step, FluidState, Projector, VelocityField};
use vkf::kinetic::{advance, deposit, sample_initial, InitialDistribution, ParticleEnsemble};
use vkf::mesh::Mesh;
use vkf::rheology::StressLaw;

fn random_ensemble(mesh: &Mesh, n: usize, seed: u64) -> ParticleEnsemble {
    let mut r = rng(seed);
    let mut p = ParticleEnsemble::default();
    for _ in 0..n {
        let x = [r.random_range(0.0..mesh.lx()), r.random_range(0.0..mesh.ly())];
        let v = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        p.push(x, v, r.random_range(0.0..1.0) / n as f64, 1.0);
    }
    p
}

fn vortex(mesh: Mesh, amp: f64) -> VelocityField {
    VelocityField::from_stream_function(mesh, |x, y| {
        amp * (std::f64::consts::PI * x).sin().powi(2) * (std::f64::consts::PI * y).sin().powi(2)
    })
}

#[test]
fn exchange_identity_on_random_ensembles() {
    for seed in 0..10 {
        let m = Mesh::with_extents(16, 12, 1.0, 0.75).unwrap();
        let u = random_velocity(m, &mut rng(100 + seed));
        let p = random_ensemble(&m, 1000, seed);
        let a = exchange_audit(&p, &u, 0.01);
        let scale = a.fluid_work.abs() + a.kinetic_work.abs() + a.dissipation.abs();
        assert!(a.defect().abs() <= 1e-12 * scale);
        assert!(a.dissipation <= 0.0);
        // the deposited force does exactly the fluid work
        let f = particle_drag_force(&p, &u);
        assert!((f.dot(&u) * 0.01 - a.fluid_work).abs() <= 1e-12 * scale);
    }
}

#[test]
fn face_force_examples() {
    let m = Mesh::unit_square(8);
    let u = VelocityField::from_fn(m, |_, _| [1.0, 0.0]);
    let mut p = ParticleEnsemble::default();
    for &x in &[[0.3, 0.4], [0.6, 0.55], [0.45, 0.7]] {
        p.push(x, [1.0, 0.0], 0.1, 1.0);
    }
    let f = drag_force(&deposit(&p, &m), &u).unwrap();
    for j in 2..m.ny - 2 {
        for i in 2..m.nx - 1 {
            assert!(f.u[f.iu(i, j)].abs() < 1e-14);
        }
    }
    let empty = deposit(&ParticleEnsemble::default(), &m);
    assert_eq!(drag_force(&empty, &u).unwrap().max_abs(), 0.0);
}

#[test]
fn pure_kinetic_decay_audits_to_rounding() {
    let m = Mesh::unit_square(16);
    let zero = FluidState::new(VelocityField::zeros(m), 0.0);
    let mut p = sample_initial(&InitialDistribution::Maxwellian { mass: 1.0, temperature: 1.0 }, &m, 4096, 7).unwrap();
    let mut ledger = EnergyLedger::start(0.0, 0.0, p.kinetic_energy());
    let dt = 0.02;
    for step in 1..=50 {
        let before = energies(&zero, &p);
        let (next, stats) = advance(&p, &zero.velocity, dt).unwrap();
        let after = energies(&zero, &next);
        assert!((after.1 - before.1 * (-2.0 * dt).exp()).abs() <= 1e-12 * before.1);
        let ex = exchange_audit(&p, &zero.velocity, dt);
        let r = audit_step(&mut ledger, before, after, step as f64 * dt, 0.0, stats.drag_dissipation, ex);
        assert!(r.abs() <= 1e-12 * before.1);
        p = next;
    }
    assert_eq!(ledger.rows.len(), 51);
}

#[test]
fn zero_state_has_zero_residual() {
    let m = Mesh::unit_square(8);
    let law = StressLaw::new(0.1, 0.0, 0.0, Arc::new(ExponentField::constant(m, 2.0, 1.0))).unwrap();
    let p = Projector::new(m).unwrap();
    let mut state = CoupledState { fluid: FluidState::new(VelocityField::zeros(m), 0.0), particles: Default::default() };
    let mut ledger = EnergyLedger::start(0.0, 0.0, 0.0);
    for _ in 0..5 {
        state = coupled_step(&state, &law, 0.01, &p, &mut ledger).unwrap();
    }
    assert!(ledger.rows.iter().all(|r| r.e_fluid == 0.0
        && r.e_kin == 0.0
        && r.d_stress_cum == 0.0
        && r.d_drag_cum == 0.0
        && r.residual_cum == 0.0));
}

#[test]
fn particle_free_run_is_a_pure_fluid_run() {
    let m = Mesh::unit_square(16);
    let law = StressLaw::new(0.05, 0.05, 0.0, Arc::new(ExponentField::sinusoidal(m, 2.0, 0.3, 1.0))).unwrap();
    let p = Projector::new(m).unwrap();
    let fluid = FluidState::new(vortex(m, 0.5), 0.0);
    let mut solo = fluid.clone();
    let mut state = CoupledState { fluid, particles: Default::default() };
    let (ef, ek) = energies(&state.fluid, &state.particles);
    let mut ledger = EnergyLedger::start(0.0, ef, ek);
    let dt = 0.005;
    for _ in 0..20 {
        state = coupled_step(&state, &law, dt, &p, &mut ledger).unwrap();
        solo = fluid_step(&solo, &VelocityField::zeros(m), &law, dt, &p).unwrap().0;
    }
    assert_eq!(state.fluid.velocity, solo.velocity);
    assert!(ledger.rows.iter().all(|r| r.e_kin == 0.0 && r.d_drag_cum == 0.0));
    assert!(ledger.rows.last().unwrap().e_fluid < ef);
}

#[test]
fn particles_slow_down_in_a_stiff_resting_fluid() {
    let m = Mesh::unit_square(16);
    let law = StressLaw::new(20.0, 0.0, 0.0, Arc::new(ExponentField::constant(m, 2.0, 1.0))).unwrap();
    let proj = Projector::new(m).unwrap();
    let particles = sample_initial(&InitialDistribution::Maxwellian { mass: 1.0, temperature: 1.0 }, &m, 2000, 3).unwrap();
    let mut state = CoupledState { fluid: FluidState::new(VelocityField::zeros(m), 0.0), particles };
    let (ef, ek) = energies(&state.fluid, &state.particles);
    let mut ledger = EnergyLedger::start(0.0, ef, ek);
    let dt = 0.2 * stable_time_step(&state.fluid.velocity, &law);
    for _ in 0..200 {
        state = coupled_step(&state, &law, dt, &proj, &mut ledger).unwrap();
    }
    let rows = &ledger.rows;
    for w in rows.windows(2) {
        assert!(w[1].e_kin < w[0].e_kin);
    }
    let t = rows.last().unwrap().t;
    assert!(rows.last().unwrap().e_kin <= 1.05 * ek * (-2.0 * t).exp());
    assert!(rows.iter().map(|r| r.e_fluid).fold(0.0, f64::max) <= 1e-3 * ek);
}

#[test]
fn comoving_particles_feel_no_drag() {
    let m = Mesh::unit_square(32);
    let law = StressLaw::new(1e-3, 0.0, 0.0, Arc::new(ExponentField::constant(m, 2.0, 1.0))).unwrap();
    let proj = Projector::new(m).unwrap();
    let u = vortex(m, 0.2);
    let mut particles = random_ensemble(&m, 500, 5);
    particles.v = particles.x.iter().map(|&x| u.interpolate(x)).collect();
    let a = exchange_audit(&particles, &u, 1e-3);
    assert_eq!((a.fluid_work, a.kinetic_work, a.dissipation), (0.0, 0.0, 0.0));
    assert_eq!(particle_drag_force(&particles, &u).max_abs(), 0.0);
    let mut state = CoupledState { fluid: FluidState::new(u, 0.0), particles };
    let mut ledger = EnergyLedger::start(0.0, 0.0, 0.0);
    let dt = 1e-3;
    for _ in 0..5 {
        state = coupled_step(&state, &law, dt, &proj, &mut ledger).unwrap();
    }
    let slip = state
        .particles
        .x
        .iter()
        .zip(&state.particles.v)
        .map(|(&x, v)| {
            let uk = state.fluid.velocity.interpolate(x);
            (uk[0] - v[0]).hypot(uk[1] - v[1])
        })
        .fold(0.0, f64::max);
    // lag from transport through the shear only: a resting particle would see |u|
    assert!(slip <= 0.05 * state.fluid.velocity.max_abs(), "slip {slip}");
    assert!(ledger.steps.iter().all(|s| s.d_drag <= 1e-8));
}

#[test]
fn regularization_adds_dissipation() {
    let m = Mesh::unit_square(16);
    let e = Arc::new(ExponentField::sinusoidal(m, 2.0, 0.5, 1.0));
    let proj = Projector::new(m).unwrap();
    for seed in 0..5 {
        let st = FluidState::new(random_solenoidal(m, &mut rng(seed)), 0.0);
        let base = StressLaw::new(0.1, 0.5, 0.0, e.clone()).unwrap();
        let reg = base.with_theta(0.2).unwrap();
        let dt = 0.5 * stable_time_step(&st.velocity, &reg);
        let zero = VelocityField::zeros(m);
        let d0 = fluid_step(&st, &zero, &base, dt, &proj).unwrap().1.stress_dissipation;
        let d1 = fluid_step(&st, &zero, &reg, dt, &proj).unwrap().1.stress_dissipation;
        assert!(d1 >= d0 && d0 >= 0.0);
    }
}

#[test]
fn coupled_run_keeps_ledger_signs() {
    let m = Mesh::unit_square(24);
    let law = StressLaw::new(0.0, 0.2, 0.0, Arc::new(ExponentField::constant(m, 2.5, 1.0))).unwrap();
    let proj = Projector::new(m).unwrap();
    let particles = sample_initial(&InitialDistribution::UniformBox { mass: 0.5, vmax: 1.0 }, &m, 1500, 8).unwrap();
    let mut state = CoupledState { fluid: FluidState::new(vortex(m, 0.3), 0.0), particles };
    let mass0 = state.particles.total_mass();
    let (ef, ek) = energies(&state.fluid, &state.particles);
    let mut ledger = EnergyLedger::start(0.0, ef, ek);
    let dt = 0.002;
    for _ in 0..100 {
        state = coupled_step(&state, &law, dt, &proj, &mut ledger).unwrap();
        let div = state.fluid.velocity.divergence();
        let scale = state.fluid.velocity.max_abs() / m.h();
        assert!(div.data.iter().all(|d| d.abs() <= 1e-10 * scale.max(1e-300)));
    }
    for s in &ledger.steps {
        let scale = s.energy_before.max(1e-300);
        assert!(s.d_stress >= -1e-12 * scale);
        assert!(s.d_drag >= 0.0);
        assert!(s.exchange.defect().abs() <= 1e-12 * scale);
        assert!(s.energy_after - s.energy_before <= s.residual + 1e-15 * scale);
    }
    assert!(ledger.rows.iter().all(|r| r.e_kin >= 0.0));
    assert!((state.particles.total_mass() - mass0).abs() <= 1e-13 * mass0);
}
