mod common;

use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{mms_error, random_velocity, rng};
use vkf::cli_io::run::{pressure_report, prepare, simulate, RunOutcome};
use vkf::cli_io::{fit_order, ScenarioConfig};
use vkf::diagnostics::growth_law_defect;
use vkf::exponent_field::{admissible_lower_bound, build_covering, ExponentField};
use vkf::fluid::{Projector, VelocityField};
use vkf::kinetic::advance;
use vkf::mesh::{CellVectorField, Mesh, ScalarField, Sym2, TensorField};
use vkf::orlicz::{luxemburg_norm, modular, two_cell_mesh};
use vkf::pressure_toolkit::{solve, PressureInput, PressureKind, PressureProblem};
use vkf::rheology::{certify_coercive, certify_monotone, StressLaw};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn acceptance_config() -> ScenarioConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.toml");
    ScenarioConfig::load(&path).unwrap()
}

/// The acceptance scenario at `dt`, with the growth-law defect checked at every output time.
fn acceptance_run(dt: f64) -> (RunOutcome, f64) {
    let mut cfg = acceptance_config();
    cfg.time.dt = Some(dt);
    let every = cfg.time.output_every.max(1);
    let scenario = prepare(&cfg).unwrap();
    let mut initial = None;
    let mut worst_growth = 0.0_f64;
    let outcome = simulate(&scenario, |step, state, _| {
        let p0 = initial.get_or_insert_with(|| vkf::cli_io::run::initial_state(&cfg).unwrap().particles);
        if step % every == 0 {
            worst_growth = worst_growth.max(growth_law_defect(p0, &state.particles, state.fluid.time));
        }
    })
    .unwrap();
    let last = growth_law_defect(&outcome.initial.particles, &outcome.state.particles, outcome.state.fluid.time);
    (outcome, worst_growth.max(last))
}

struct Runs {
    base: RunOutcome,
    growth: f64,
    halves: Vec<RunOutcome>,
    elapsed: Duration,
}

fn c1_mass(r: &Runs) -> Verdict {
    let p0 = r.base.initial.particles.total_mass();
    let p1 = r.base.state.particles.total_mass();
    let rel = (p1 - p0).abs() / p0;
    let ok = r.base.steps == 500 && r.base.initial.particles.len() == 4096 && rel <= 1e-13 && r.base.max_mass_defect <= 1e-13;
    verdict(ok, format!("{} steps, {} particles, relative mass change {rel:e}", r.base.steps, r.base.initial.particles.len()))
}

fn c2_growth(r: &Runs) -> Verdict {
    verdict(r.growth <= 1e-12, format!("max relative defect of max fval vs e^(2t): {:e}", r.growth))
}

fn c3_free_decay() -> Verdict {
    let cfg = acceptance_config();
    let mut p = vkf::cli_io::run::initial_state(&cfg).unwrap().particles;
    let zero = VelocityField::zeros(cfg.mesh());
    let e0 = p.kinetic_energy();
    let dt = cfg.time.dt.unwrap();
    let mut worst = 0.0_f64;
    for step in 1..=500 {
        p = advance(&p, &zero, dt).unwrap().0;
        let want = e0 * (-2.0 * step as f64 * dt).exp();
        worst = worst.max((p.kinetic_energy() - want).abs() / want);
    }
    verdict(worst <= 1e-10, format!("max relative deviation from E0 e^(-2t): {worst:e}"))
}

fn c4_drag(r: &Runs) -> Verdict {
    let worst = r
        .base
        .ledger
        .steps
        .iter()
        .map(|s| s.exchange.defect().abs() / s.energy_before)
        .fold(0.0, f64::max);
    verdict(worst <= 1e-12, format!("max |W_f + W_p + drag| / (E_fluid + E_kin): {worst:e}"))
}

fn c5_energy(r: &Runs) -> Verdict {
    let ledgers: Vec<_> = std::iter::once(&r.base).chain(&r.halves).map(|o| o.ledger.clone()).collect();
    let fit = fit_order(&ledgers).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    for o in std::iter::once(&r.base).chain(&r.halves) {
        for s in &o.ledger.steps {
            let slack = 4.0 * f64::EPSILON * s.energy_before;
            worst_excess = worst_excess.max(s.energy_after - s.energy_before - s.residual - slack);
        }
    }
    let ok = fit.order >= 0.9 && worst_excess <= 0.0;
    verdict(
        ok,
        format!(
            "residual_cum {:?} at dt {:?}, order {:.4}; worst energy increase beyond residual {worst_excess:e}",
            fit.residuals, fit.dts, fit.order
        ),
    )
}

fn c6_stress() -> Verdict {
    let cfg = acceptance_config();
    let scenario = prepare(&cfg).unwrap();
    let law = &scenario.law;
    let mono_reg = certify_monotone(law, 100_000, 1);
    let mono_raw = certify_monotone(&law.with_theta(0.0).unwrap(), 100_000, 2);
    let cert = certify_coercive(law).unwrap();
    let m = Mesh::unit_square(8);
    let power = StressLaw::new(0.0, 1.0, 0.0, Arc::new(ExponentField::constant(m, 3.0, 1.0))).unwrap();
    let pc = certify_coercive(&power).unwrap();
    let reg_ok = cert.regularized.map_or(false, |r| r.worst_margin >= 0.0);
    let ok = mono_raw.worst_normalized >= -1e-13
        && mono_reg.worst_normalized >= -1e-13
        && mono_reg.strict
        && cert.worst_margin >= 0.0
        && reg_ok
        && pc.c == 2.0
        && pc.h_bar == 0.0
        && pc.worst_margin >= 0.0;
    verdict(
        ok,
        format!(
            "monotone min {:e} (theta 0), {:e} (theta > 0); c = {}, h_bar = {:e}, margin {:e}; power law c = {}, h_bar = {}",
            mono_raw.worst_normalized, mono_reg.worst_normalized, cert.c, cert.h_bar, cert.worst_margin, pc.c, pc.h_bar
        ),
    )
}

fn c7_luxemburg() -> Verdict {
    let mut r = rng(7);
    let m = Mesh::with_extents(24, 16, 1.5, 1.0).unwrap();
    let mut worst_lp = 0.0_f64;
    let mut worst_ball = 0.0_f64;
    for p in [2.0, 2.3, 3.0, 4.5, 6.0] {
        let xi = common::random_scalar(m, -4.0, 4.0, &mut r);
        let classical = xi.data.iter().map(|v| v.abs().powf(p) * m.cell_volume()).sum::<f64>().powf(1.0 / p);
        let n = luxemburg_norm(&xi, &ScalarField::constant(m, p)).unwrap();
        worst_lp = worst_lp.max((n - classical).abs() / classical);
        let s = common::random_scalar(m, 2.0, 5.0, &mut r);
        let n = luxemburg_norm(&xi, &s).unwrap();
        let scaled = ScalarField { mesh: m, data: xi.data.iter().map(|v| v / n).collect() };
        worst_ball = worst_ball.max((modular(&scaled, &s).unwrap() - 1.0).abs());
    }
    let c = two_cell_mesh();
    let two = luxemburg_norm(&ScalarField::constant(c, 2.0), &ScalarField::from_vec(c, vec![2.0, 4.0]).unwrap()).unwrap();
    let ok = worst_lp <= 1e-8 && (two - 2.0).abs() <= 1e-8 && worst_ball <= 1e-8;
    verdict(ok, format!("L^p relative error {worst_lp:e}; two-cell norm {two}; unit-ball modular error {worst_ball:e}"))
}

fn c8_covering() -> Verdict {
    let mut fields = Vec::new();
    let cfg = acceptance_config();
    fields.push(cfg.exponent_field().unwrap());
    for n in [16, 32, 64, 128] {
        let m = Mesh::unit_square(n);
        fields.push(Arc::new(ExponentField::constant(m, 2.0, 1.0)));
        fields.push(Arc::new(ExponentField::sinusoidal(m, 2.0, 0.4, 1.0)));
        fields.push(Arc::new(ExponentField::sinusoidal(m, 2.5, 0.9, 1.0)));
        if n < 32 {
            continue;
        }
        // total oscillation above s_min / d forces several balls
        fields.push(Arc::new(ExponentField::stationary(2, ScalarField::from_fn(m, |x, y| 2.0 + 1.5 * x * y), 1.0).unwrap()));
    }
    let switch = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/switch.toml");
    fields.push(ScenarioConfig::load(&switch).unwrap().exponent_field().unwrap());
    let allowed = admissible_lower_bound(2) / 2.0;
    let (mut gap, mut sum_err, mut balls) = (f64::INFINITY, 0.0_f64, 0);
    for f in &fields {
        let cov = build_covering(f).unwrap();
        balls += cov.len();
        gap = gap.min(cov.min_gap());
        sum_err = cov.weight_sum().data.iter().fold(sum_err, |e, w| e.max((w - 1.0).abs()));
    }
    let ok = gap >= allowed && sum_err <= 1e-12;
    verdict(ok, format!("{} coverings, {balls} balls; min R - r = {gap} (need {allowed}); max |sum zeta - 1| = {sum_err:e}", fields.len()))
}

fn c9_mms() -> Verdict {
    let errs: Vec<f64> = [32, 64, 128].iter().map(|&n| mms_error(n, 0.005)).collect();
    let orders = [(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()];
    verdict(orders.iter().all(|&o| o >= 1.5), format!("L2 errors {errs:?}, orders {orders:?}"))
}

fn c10_pressure() -> Verdict {
    const SIGMA: f64 = 0.06;
    let bump = |x: f64, y: f64| (-((x - 0.5).powi(2) + (y - 0.5).powi(2)) / (2.0 * SIGMA * SIGMA)).exp();
    let m = Mesh::unit_square(64);
    let z = ScalarField::from_fn(m, bump);
    let alpha = TensorField { mesh: m, data: z.data.iter().map(|&v| v * Sym2::IDENTITY).collect() };
    let p1 = solve(&PressureProblem::new(PressureKind::P1, PressureInput::Tensor(alpha))).unwrap();
    let mean = z.data.iter().sum::<f64>() / p1.geometry.mesh.n_cells() as f64;
    let e1 = p1.inner().data.iter().zip(&z.data).map(|(p, z)| (p + z - mean).abs()).fold(0.0, f64::max);
    let f = CellVectorField::from_fn(m, |x, y| {
        let g = bump(x, y);
        [-(x - 0.5) / (SIGMA * SIGMA) * g, -(y - 0.5) / (SIGMA * SIGMA) * g]
    });
    let p3 = solve(&PressureProblem::new(PressureKind::P3, PressureInput::Vector(f))).unwrap();
    let e3 = p3.inner().data.iter().zip(&z.data).map(|(p, z)| (p + z - mean).abs()).fold(0.0, f64::max);
    let report = pressure_report(&acceptance_config()).unwrap();
    let drift = report.drift().into_iter().fold(0.0, f64::max);
    let residual = report
        .bounds
        .iter()
        .map(|b| b.max_relative_residual)
        .chain([p1.residual / p1.scale, p3.residual / p3.scale])
        .fold(0.0, f64::max);
    let ok = e1 <= 1e-8 && e3 <= 1e-8 && drift <= 2.0 && residual <= 1e-10;
    verdict(
        ok,
        format!(
            "p1 + zeta error {e1:e}, p3 + g error {e3:e}; ratio drift {drift:.6} over n = {:?}; max residual/scale {residual:e}",
            report.resolutions
        ),
    )
}

fn c11_projection() -> Verdict {
    let mut r = rng(11);
    let (mut div, mut idem) = (0.0_f64, 0.0_f64);
    for m in [Mesh::unit_square(64), Mesh::with_extents(48, 32, 1.5, 1.0).unwrap(), Mesh::unit_square(128)] {
        let p = Projector::new(m).unwrap();
        for _ in 0..3 {
            let u = random_velocity(m, &mut r);
            let pu = p.project(&u).unwrap();
            let scale = u.max_abs() / m.h();
            div = div.max(pu.divergence().data.iter().fold(0.0_f64, |a, v| a.max(v.abs())) / scale);
            idem = idem.max(p.project(&pu).unwrap().sub(&pu).max_abs() / pu.max_abs());
        }
    }
    verdict(div <= 1e-10 && idem <= 1e-10, format!("max divergence / (|u|/h) {div:e}; idempotence defect {idem:e}"))
}

fn c12_runtime(r: &Runs) -> Verdict {
    let secs = r.elapsed.as_secs_f64();
    verdict(secs < 120.0, format!("acceptance runs (dt, dt/2, dt/4) took {secs:.1} s"))
}

#[test]
fn acceptance() {
    let start = Instant::now();
    let dt = acceptance_config().time.dt.unwrap();
    let (base, growth) = acceptance_run(dt);
    let halves = vec![acceptance_run(dt / 2.0).0, acceptance_run(dt / 4.0).0];
    let runs = Runs { base, growth, halves, elapsed: start.elapsed() };

    let results = [
        ("1 mass conservation", c1_mass(&runs)),
        ("2 sup growth law", c2_growth(&runs)),
        ("3 free kinetic decay", c3_free_decay()),
        ("4 drag antisymmetry", c4_drag(&runs)),
        ("5 energy audit convergence", c5_energy(&runs)),
        ("6 stress certificates", c6_stress()),
        ("7 Luxemburg norm", c7_luxemburg()),
        ("8 covering", c8_covering()),
        ("9 manufactured solution", c9_mms()),
        ("10 pressure toolkit", c10_pressure()),
        ("11 projection", c11_projection()),
        ("12 runtime", c12_runtime(&runs)),
    ];
    let mut failed = Vec::new();
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
