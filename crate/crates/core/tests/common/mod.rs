#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vkf::exponent_field::ExponentField;
use vkf::fluid::{fluid_step, FluidState, Projector, VelocityField};
use vkf::mesh::{Mesh, ScalarField};
use vkf::rheology::StressLaw;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Face values uniform in [-1, 1], no-slip normals.
pub fn random_velocity(mesh: Mesh, rng: &mut ChaCha8Rng) -> VelocityField {
    let mut u = VelocityField::zeros(mesh);
    u.u.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
    u.v.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
    u.enforce_no_slip();
    u
}

/// Discretely divergence-free field from random node stream values that
/// vanish on the wall.
pub fn random_solenoidal(mesh: Mesh, rng: &mut ChaCha8Rng) -> VelocityField {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let mut psi = vec![0.0; (nx + 1) * (ny + 1)];
    for j in 1..ny {
        for i in 1..nx {
            psi[j * (nx + 1) + i] = rng.random_range(-1.0..1.0) * mesh.h();
        }
    }
    let mut u = VelocityField::zeros(mesh);
    for j in 0..ny {
        for i in 0..=nx {
            let k = u.iu(i, j);
            u.u[k] = (psi[(j + 1) * (nx + 1) + i] - psi[j * (nx + 1) + i]) / mesh.hy;
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let k = u.iv(i, j);
            u.v[k] = -(psi[j * (nx + 1) + i + 1] - psi[j * (nx + 1) + i]) / mesh.hx;
        }
    }
    u
}

pub fn random_scalar(mesh: Mesh, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    ScalarField { mesh, data: (0..mesh.n_cells()).map(|_| rng.random_range(lo..hi)).collect() }
}

/// Luxemburg norm by golden-section minimization of `|modular(ξ/λ) - 1|`,
/// written independently of the library: magnitudes, exponents and weights
/// are plain slices.
pub fn golden_section_norm(mag: &[f64], s: &[f64], w: &[f64]) -> f64 {
    let modular = |lambda: f64| -> f64 { mag.iter().zip(s).zip(w).map(|((m, e), w)| (m / lambda).powf(*e) * w).sum() };
    let objective = |l: f64| (modular(l) - 1.0).abs();
    // bracket on a log scale
    let (mut a, mut b) = (1e-12_f64, 1.0_f64);
    while modular(b) > 1.0 {
        b *= 2.0;
    }
    while modular(a) < 1.0 {
        a *= 0.5;
    }
    let (mut a, mut b) = (a.ln(), b.ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..400 {
        if objective(c.exp()) < objective(d.exp()) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    ((a + b) / 2.0).exp()
}

// a(x) = sin^2(πx) and its derivatives
fn a0(x: f64) -> f64 {
    (PI * x).sin().powi(2)
}
fn a1(x: f64) -> f64 {
    PI * (2.0 * PI * x).sin()
}
fn a2(x: f64) -> f64 {
    2.0 * PI * PI * (2.0 * PI * x).cos()
}
fn a3(x: f64) -> f64 {
    -4.0 * PI.powi(3) * (2.0 * PI * x).sin()
}

/// Exact velocity of the stream function `sin^2(πx) sin^2(πy)`.
pub fn mms_velocity(x: f64, y: f64) -> [f64; 2] {
    [a0(x) * a1(y), -a1(x) * a0(y)]
}

/// Forcing that makes the velocity above steady for `S = ν0 Du`:
/// `(u·∇)u - ν0/2 Δu` (its pressure is zero).
pub fn mms_forcing(nu0: f64, x: f64, y: f64) -> [f64; 2] {
    let [u, v] = mms_velocity(x, y);
    let (ux, uy) = (a1(x) * a1(y), a0(x) * a2(y));
    let (vx, vy) = (-a2(x) * a0(y), -a1(x) * a1(y));
    let lap_u = a2(x) * a1(y) + a0(x) * a3(y);
    let lap_v = -a3(x) * a0(y) - a1(x) * a2(y);
    [u * ux + v * uy - 0.5 * nu0 * lap_u, u * vx + v * vy - 0.5 * nu0 * lap_v]
}

/// L² velocity error of the manufactured Newtonian flow at `t_end` on an
/// `n x n` unit square.
pub fn mms_error(n: usize, t_end: f64) -> f64 {
    let nu0 = 1.0;
    let mesh = Mesh::unit_square(n);
    let law = StressLaw::new(nu0, 0.0, 0.0, Arc::new(ExponentField::constant(mesh, 2.0, 1.0))).unwrap();
    let projector = Projector::new(mesh).unwrap();
    let psi = |x: f64, y: f64| a0(x) * a0(y);
    let exact = VelocityField::from_fn(mesh, mms_velocity);
    let forcing = VelocityField::from_fn(mesh, |x, y| mms_forcing(nu0, x, y));
    let mut state = FluidState::new(VelocityField::from_stream_function(mesh, psi), 0.0);
    let dt_target = 0.2 * mesh.h() * mesh.h() / nu0;
    let steps = (t_end / dt_target).ceil() as usize;
    let dt = t_end / steps as f64;
    for _ in 0..steps {
        state = fluid_step(&state, &forcing, &law, dt, &projector).unwrap().0;
    }
    state.velocity.sub(&exact).norm_l2()
}
