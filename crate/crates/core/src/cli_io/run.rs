use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::coupling::{coupled_step, CoupledState, CouplingError, EnergyLedger};
use crate::diagnostics::{growth_law_defect, mass_defect};
use crate::exponent_field::{build_covering, validate, ExponentField, ValidationReport};
use crate::fluid::{stable_time_step, FluidState, Projector};
use crate::kinetic::{deposit, sample_initial};
use crate::mesh::{Mesh, Sym2, TensorField};
use crate::pressure_toolkit::{
    random_samples, verify_bounds, verify_locality, BoundsReport, LocalityReport, PressureInput, PressureKind,
    PressureProblem,
};
use crate::rheology::{certify_coercive, certify_monotone, CoercivityCertificate, MonotonicityReport, StressLaw};

use super::config::{module_seed, ConfigError, ScenarioConfig};
use super::snapshot::{Snapshot, SnapshotError};

/// Pairs drawn by the monotonicity check before a run.
pub const MONOTONE_PAIRS: usize = 10_000;
/// Normalized monotonicity inner products below this fail the certificate.
pub const MONOTONE_TOL: f64 = -1e-13;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("certificate failure: {0}")]
    Certificate(String),
    #[error("numerical failure at step {step}: {source}")]
    Numeric {
        step: usize,
        source: CouplingError,
        last_good: Box<CoupledState>,
        ledger: Box<EnergyLedger>,
    },
    #[error("snapshot: {0}")]
    Snapshot(#[from] SnapshotError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("ledger: {0}")]
    Ledger(#[from] CouplingError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric { .. } => 3,
            Self::Certificate(_) => 4,
            _ => 1,
        }
    }
}

/// Everything fixed before the time loop.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub exponent: Arc<ExponentField>,
    pub validation: ValidationReport,
    pub law: StressLaw,
    pub certificate: CoercivityCertificate,
    pub monotone: MonotonicityReport,
}

/// Exponent validation plus covering construction; failures are config errors.
pub fn validate_config(config: &ScenarioConfig) -> Result<(Arc<ExponentField>, ValidationReport, usize), ConfigError> {
    let exponent = config.exponent_field()?;
    let report = validate(&exponent).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    if !report.passed() {
        return Err(ConfigError::Invalid(format!(
            "exponent range [{}, {}] violates the lower bound {}",
            report.min, report.max, report.lower_bound
        )));
    }
    let covering = build_covering(&exponent).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok((exponent, report, covering.len()))
}

/// Stress law and both certificates.
pub fn certify(config: &ScenarioConfig, exponent: Arc<ExponentField>) -> Result<(StressLaw, CoercivityCertificate, MonotonicityReport), RunError> {
    let r = &config.rheology;
    let law = StressLaw::new(r.nu0, r.nu1, r.theta, exponent).map_err(|e| RunError::Certificate(e.to_string()))?;
    let certificate = certify_coercive(&law).map_err(|e| RunError::Certificate(e.to_string()))?;
    let monotone = certify_monotone(&law, MONOTONE_PAIRS, module_seed(config.seed, "rheology"));
    if monotone.worst_normalized < MONOTONE_TOL {
        return Err(RunError::Certificate(format!(
            "monotonicity inner product {:e} below tolerance",
            monotone.worst_normalized
        )));
    }
    Ok((law, certificate, monotone))
}

pub fn prepare(config: &ScenarioConfig) -> Result<Scenario, RunError> {
    config.check()?;
    let (exponent, validation, _) = validate_config(config)?;
    let (law, certificate, monotone) = certify(config, exponent.clone())?;
    Ok(Scenario { config: config.clone(), exponent, validation, law, certificate, monotone })
}

/// Summary of a completed time loop.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub initial: CoupledState,
    pub state: CoupledState,
    pub ledger: EnergyLedger,
    pub steps: usize,
    pub max_mass_defect: f64,
    pub max_growth_defect: f64,
}

/// Initial coupled state of a scenario.
pub fn initial_state(config: &ScenarioConfig) -> Result<CoupledState, RunError> {
    let (preset, n) = config.initial_distribution();
    let particles = sample_initial(&preset, &config.mesh(), n, module_seed(config.seed, "kinetic"))
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(CoupledState { fluid: FluidState::new(config.initial_velocity(), 0.0), particles })
}

fn adaptive_dt(state: &CoupledState, law: &StressLaw, cfl: f64) -> f64 {
    let mut limit = stable_time_step(&state.fluid.velocity, law);
    if !state.particles.is_empty() {
        let rho_max = deposit(&state.particles, &state.fluid.velocity.mesh).rho.max();
        if rho_max > 0.0 {
            limit = limit.min(1.0 / rho_max);
        }
    }
    cfl * limit
}

/// Runs the coupled loop, calling `observe` after every step.
pub fn simulate(
    scenario: &Scenario,
    mut observe: impl FnMut(usize, &CoupledState, &EnergyLedger),
) -> Result<RunOutcome, RunError> {
    let cfg = &scenario.config;
    let initial = initial_state(cfg)?;
    let projector = Projector::new(cfg.mesh()).map_err(|e| RunError::Ledger(e.into()))?;
    let e0 = (initial.fluid.velocity.kinetic_energy(), initial.particles.kinetic_energy());
    let mut ledger = EnergyLedger::start(0.0, e0.0, e0.1);
    let mut state = initial.clone();
    let t_end = cfg.time.t_end;
    let mut step = 0;
    let (mut max_mass_defect, mut max_growth_defect) = (0.0_f64, 0.0_f64);

    loop {
        let t = state.fluid.time;
        let remaining = t_end - t;
        if remaining <= 1e-12 * t_end {
            break;
        }
        let dt = match cfg.time.dt {
            Some(dt) => dt.min(remaining),
            None => adaptive_dt(&state, &scenario.law, cfg.time.cfl).min(remaining),
        };
        let next = match coupled_step(&state, &scenario.law, dt, &projector, &mut ledger) {
            Ok(s) => s,
            Err(source) => {
                return Err(RunError::Numeric { step, source, last_good: Box::new(state), ledger: Box::new(ledger) })
            }
        };
        state = next;
        step += 1;
        // keep the clock on the step lattice for fixed steps
        if let Some(dt) = cfg.time.dt {
            if step as f64 * dt <= t_end {
                state.fluid.time = step as f64 * dt;
            }
            if let Some(row) = ledger.rows.last_mut() {
                row.t = state.fluid.time;
            }
        }
        max_mass_defect = max_mass_defect.max(mass_defect(&initial.particles, &state.particles));
        max_growth_defect = max_growth_defect.max(growth_law_defect(&initial.particles, &state.particles, state.fluid.time));
        observe(step, &state, &ledger);
    }
    Ok(RunOutcome { initial, state, ledger, steps: step, max_mass_defect, max_growth_defect })
}

fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), RunError> {
    let mut f = BufWriter::new(File::create(path)?);
    snap.write(&mut f)?;
    f.flush()?;
    Ok(())
}

fn write_state(dir: &Path, tag: &str, state: &CoupledState) -> Result<(), RunError> {
    let t = state.fluid.time;
    write_snapshot(&dir.join(format!("velocity_{tag}.vkf")), &Snapshot::velocity(&state.fluid.velocity, t))?;
    write_snapshot(&dir.join(format!("pressure_{tag}.vkf")), &Snapshot::scalar(&state.fluid.pressure, t))?;
    write_snapshot(&dir.join(format!("particles_{tag}.vkf")), &Snapshot::particles(&state.particles, t))
}

fn write_ledger(dir: &Path, ledger: &EnergyLedger) -> Result<(), RunError> {
    let f = BufWriter::new(File::create(dir.join("ledger.csv"))?);
    ledger.write_csv(f)?;
    Ok(())
}

/// Exponent slabs as concatenated scalar snapshots stamped with their start times.
pub fn write_exponent(path: &Path, field: &ExponentField) -> Result<(), RunError> {
    let mut f = BufWriter::new(File::create(path)?);
    for slab in field.slabs() {
        Snapshot::scalar(&slab.values, slab.t_start).write(&mut f)?;
    }
    f.flush()?;
    Ok(())
}

/// Full run with artifacts in `out_dir`: `ledger.csv`, `exponent.vkf` and
/// velocity / pressure / particle snapshots. On a numerical failure the last
/// good state is written with the tag `last_good`.
pub fn run(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let scenario = prepare(config)?;
    std::fs::create_dir_all(out_dir)?;
    write_exponent(&out_dir.join("exponent.vkf"), &scenario.exponent)?;
    let every = config.time.output_every;
    let mut io_error = None;
    let result = simulate(&scenario, |step, state, _| {
        if every > 0 && step % every == 0 && io_error.is_none() {
            if let Err(e) = write_state(out_dir, &format!("{step:06}"), state) {
                io_error = Some(e);
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    match result {
        Ok(outcome) => {
            write_state(out_dir, "000000", &outcome.initial)?;
            write_state(out_dir, "final", &outcome.state)?;
            write_ledger(out_dir, &outcome.ledger)?;
            Ok(outcome)
        }
        Err(RunError::Numeric { step, source, last_good, ledger }) => {
            write_state(out_dir, "last_good", &last_good)?;
            write_ledger(out_dir, &ledger)?;
            Err(RunError::Numeric { step, source, last_good, ledger })
        }
        Err(e) => Err(e),
    }
}

/// Least-squares slope of `log |residual_cum(T)|` against `log dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub dts: Vec<f64>,
    pub residuals: Vec<f64>,
    pub order: f64,
}

pub fn fit_order(ledgers: &[EnergyLedger]) -> Result<OrderFit, RunError> {
    if ledgers.len() < 2 {
        return Err(RunError::Config(ConfigError::Invalid("at least two ledgers are needed".into())));
    }
    let mut dts = Vec::new();
    let mut residuals = Vec::new();
    for l in ledgers {
        if l.rows.len() < 2 {
            return Err(RunError::Ledger(CouplingError::EmptyLedger));
        }
        dts.push(l.rows[1].t - l.rows[0].t);
        residuals.push(l.rows.last().expect("rows").residual_cum.abs());
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(OrderFit { dts, residuals, order: sxy / sxx })
}

/// Bound study at `n` and `2n` plus a locality sweep around the domain center.
#[derive(Debug, Clone)]
pub struct PressureReport {
    pub resolutions: [usize; 2],
    pub bounds: [BoundsReport; 2],
    pub locality: LocalityReport,
}

impl PressureReport {
    /// `max(a/b, b/a)` of the worst ratio per kind across the two resolutions.
    pub fn drift(&self) -> [f64; 3] {
        let d = |a: f64, b: f64| if a > 0.0 && b > 0.0 { (a / b).max(b / a) } else { 1.0 };
        let [a, b] = &self.bounds;
        [d(a.p1, b.p1), d(a.p2, b.p2), d(a.p3, b.p3)]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "section,kind,n,value")?;
        for (n, b) in self.resolutions.iter().zip(&self.bounds) {
            writeln!(w, "ratio,p1,{n},{}", b.p1)?;
            writeln!(w, "ratio,p2,{n},{}", b.p2)?;
            writeln!(w, "ratio,p3,{n},{}", b.p3)?;
            writeln!(w, "residual,max_relative,{n},{}", b.max_relative_residual)?;
        }
        let [d1, d2, d3] = self.drift();
        writeln!(w, "drift,p1,,{d1}")?;
        writeln!(w, "drift,p2,,{d2}")?;
        writeln!(w, "drift,p3,,{d3}")?;
        for band in &self.locality.bands {
            writeln!(w, "locality_p,{}-{},,{}", band.inner, band.outer, band.sup_p)?;
            writeln!(w, "locality_grad,{}-{},,{}", band.inner, band.outer, band.sup_grad)?;
        }
        writeln!(w, "locality_padding_change,,,{}", self.locality.padding_change)?;
        writeln!(w, "locality_monotone,,,{}", self.locality.monotone)
    }
}

/// Quadrupole input `ζ diag(1, -1)` with `ζ` a bump of radius `radius`.
pub fn quadrupole_input(mesh: &Mesh, center: [f64; 2], radius: f64) -> PressureInput {
    PressureInput::Tensor(TensorField::from_fn(*mesh, |x, y| {
        let rho = (x - center[0]).hypot(y - center[1]) / radius;
        crate::exponent_field::bump(rho) * Sym2::diag(1.0, -1.0)
    }))
}

pub fn pressure_report(config: &ScenarioConfig) -> Result<PressureReport, RunError> {
    config.check()?;
    let n = config.domain.n;
    let pc = &config.pressure;
    let seed = module_seed(config.seed, "pressure_toolkit");
    let mut bounds = [BoundsReport::default(); 2];
    for (slot, res) in bounds.iter_mut().zip([n, 2 * n]) {
        let mut c = config.clone();
        c.domain.n = res;
        let (exponent, _, _) = validate_config(&c)?;
        let covering = build_covering(&exponent).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let samples = random_samples(&c.mesh(), pc.samples, seed);
        *slot = verify_bounds(&samples, &covering, pc.pad).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    }
    let mesh = config.mesh();
    let center = [0.5 * mesh.lx(), 0.5 * mesh.ly()];
    let radius = 0.1 * mesh.lx().min(mesh.ly());
    let problem = PressureProblem::new(PressureKind::P1, quadrupole_input(&mesh, center, radius)).with_pad(pc.pad);
    let locality = verify_locality(&problem, center, radius, 3).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(PressureReport { resolutions: [n, 2 * n], bounds, locality })
}
