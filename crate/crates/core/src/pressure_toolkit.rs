//! Whole-space pressure problems approximated on a zero-padded periodic box.
//!
//! * `p1`: `-Δp = div div (α ζ_i)`
//! * `p2`: `-Δp = -div div (u ⊗ u ζ_i)`
//! * `p3`: `-Δp = div F`
//! * `p4`: `-Δp = div div (θ β)`
//!
//! Solves are Fourier-spectral. The Nyquist rows and columns are dropped from
//! both the data and the solution so every operator stays real, which makes
//! the discrete residual vanish up to rounding. The zero mode is set to zero,
//! so the box solution is the whole-space one shifted to mean zero.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::exponent_field::{conjugate_exponent, Covering};
use crate::mesh::{CellVectorField, Mesh, ScalarField, Sym2, TensorField};
use crate::orlicz::lp_norm;

/// Box side as a multiple of the domain side.
pub const DEFAULT_PAD: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PressureError {
    #[error("input field is empty")]
    Empty,
    #[error("{kind:?} expects a {expected} input")]
    WrongInput { kind: PressureKind, expected: &'static str },
    #[error("input support touches the box boundary (padding factor {0} < 2)")]
    NotCompact(usize),
    #[error("non-finite input")]
    NonFinite,
    #[error("far region intersects the input support")]
    FarRegionIntersectsSupport,
    #[error("invalid locality geometry: {0}")]
    BadGeometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PressureKind {
    P1,
    P2,
    P3,
    P4,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PressureInput {
    Tensor(TensorField),
    Vector(CellVectorField),
}

impl PressureInput {
    fn mesh(&self) -> &Mesh {
        match self {
            Self::Tensor(t) => &t.mesh,
            Self::Vector(v) => &v.mesh,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Self::Tensor(t) => t.data.iter().all(|a| a.is_finite()),
            Self::Vector(v) => v.x.iter().chain(&v.y).all(|a| a.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureProblem {
    pub kind: PressureKind,
    pub input: PressureInput,
    /// Scaling for `p4`; ignored otherwise.
    pub theta: f64,
    pub pad: usize,
}

impl PressureProblem {
    pub fn new(kind: PressureKind, input: PressureInput) -> Self {
        Self { kind, input, theta: 1.0, pad: DEFAULT_PAD }
    }

    pub fn with_pad(mut self, pad: usize) -> Self {
        self.pad = pad;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }
}

/// The domain mesh placed centrally in a larger periodic box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaddedBox {
    pub inner: Mesh,
    pub mesh: Mesh,
    /// Box cell index of inner cell `(0, 0)`.
    pub offset: (usize, usize),
}

impl PaddedBox {
    pub fn new(inner: Mesh, pad: usize) -> Result<Self, PressureError> {
        if pad < 2 {
            return Err(PressureError::NotCompact(pad));
        }
        let mesh = Mesh::new(pad * inner.nx, pad * inner.ny, inner.hx, inner.hy).map_err(|_| PressureError::Empty)?;
        let offset = ((pad - 1) * inner.nx / 2, (pad - 1) * inner.ny / 2);
        Ok(Self { inner, mesh, offset })
    }

    /// Center of box cell `(i, j)` in domain coordinates.
    pub fn position(&self, i: usize, j: usize) -> [f64; 2] {
        [
            (i as f64 - self.offset.0 as f64 + 0.5) * self.mesh.hx,
            (j as f64 - self.offset.1 as f64 + 0.5) * self.mesh.hy,
        ]
    }

    fn embed(&self, data: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.mesh.n_cells()];
        for j in 0..self.inner.ny {
            for i in 0..self.inner.nx {
                out[self.mesh.idx(i + self.offset.0, j + self.offset.1)] = Complex64::new(data[self.inner.idx(i, j)], 0.0);
            }
        }
        out
    }

    /// Restriction of a box field to the domain.
    pub fn restrict(&self, f: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(self.inner);
        for j in 0..self.inner.ny {
            for i in 0..self.inner.nx {
                out.data[self.inner.idx(i, j)] = f.at(i + self.offset.0, j + self.offset.1);
            }
        }
        out
    }
}

/// 2-D FFT on a row-major `nx x ny` grid.
struct Spectral {
    nx: usize,
    ny: usize,
    fx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
    /// Wavenumbers per axis; zero on the Nyquist index.
    kx: Vec<f64>,
    ky: Vec<f64>,
}

fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|m| {
            if 2 * m == n {
                0.0
            } else {
                let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                2.0 * PI * s / length
            }
        })
        .collect()
}

impl Spectral {
    fn new(mesh: &Mesh) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            nx: mesh.nx,
            ny: mesh.ny,
            fx: planner.plan_fft_forward(mesh.nx),
            fy: planner.plan_fft_forward(mesh.ny),
            ix: planner.plan_fft_inverse(mesh.nx),
            iy: planner.plan_fft_inverse(mesh.ny),
            kx: wavenumbers(mesh.nx, mesh.lx()),
            ky: wavenumbers(mesh.ny, mesh.ly()),
        }
    }

    fn nyquist(&self, i: usize, j: usize) -> bool {
        2 * i == self.nx || 2 * j == self.ny
    }

    fn transform(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        row.process(data);
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        for j in 0..self.ny {
            for i in 0..self.nx {
                t[i * self.ny + j] = data[j * self.nx + i];
            }
        }
        col.process(&mut t);
        for j in 0..self.ny {
            for i in 0..self.nx {
                data[j * self.nx + i] = t[i * self.ny + j];
            }
        }
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fx, &self.fy);
    }

    /// Normalized inverse, real part.
    fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut data, &self.ix, &self.iy);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        data.iter().map(|c| c.re * scale).collect()
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct PressureSolution {
    pub geometry: PaddedBox,
    /// Pressure on the whole box, mean zero.
    pub p: ScalarField,
    /// `max |-Δp - rhs|` over the box.
    pub residual: f64,
    /// `max |rhs|` over the box.
    pub scale: f64,
}

impl PressureSolution {
    /// Pressure restricted to the domain.
    pub fn inner(&self) -> ScalarField {
        self.geometry.restrict(&self.p)
    }

    /// Spectral gradient on the box.
    pub fn gradient(&self) -> CellVectorField {
        let sp = Spectral::new(&self.geometry.mesh);
        let mut hat: Vec<Complex64> = self.p.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        sp.forward(&mut hat);
        let mut gx = hat.clone();
        let mut gy = hat;
        for j in 0..sp.ny {
            for i in 0..sp.nx {
                let k = j * sp.nx + i;
                gx[k] *= Complex64::new(0.0, sp.kx[i]);
                gy[k] *= Complex64::new(0.0, sp.ky[j]);
            }
        }
        CellVectorField { mesh: self.geometry.mesh, x: sp.inverse_real(gx), y: sp.inverse_real(gy) }
    }
}

/// Spectral solve of one pressure problem.
pub fn solve(problem: &PressureProblem) -> Result<PressureSolution, PressureError> {
    let mesh = *problem.input.mesh();
    match (&problem.input, problem.kind) {
        (PressureInput::Vector(_), PressureKind::P1 | PressureKind::P2 | PressureKind::P4) => {
            return Err(PressureError::WrongInput { kind: problem.kind, expected: "tensor" })
        }
        (PressureInput::Tensor(_), PressureKind::P3) => {
            return Err(PressureError::WrongInput { kind: problem.kind, expected: "vector" })
        }
        _ => {}
    }
    let len_ok = match &problem.input {
        PressureInput::Tensor(t) => t.data.len() == mesh.n_cells() && !t.data.is_empty(),
        PressureInput::Vector(v) => v.x.len() == mesh.n_cells() && v.y.len() == mesh.n_cells() && !v.x.is_empty(),
    };
    if !len_ok {
        return Err(PressureError::Empty);
    }
    if !problem.input.is_finite() {
        return Err(PressureError::NonFinite);
    }
    let geometry = PaddedBox::new(mesh, problem.pad)?;
    let sp = Spectral::new(&geometry.mesh);
    let n = geometry.mesh.n_cells();

    // right-hand side in Fourier space
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    match &problem.input {
        PressureInput::Tensor(t) => {
            // rhs = ± div div A, with div div A <-> -(k ⊗ k : Â)
            let sign = match problem.kind {
                PressureKind::P2 => 1.0,
                _ => -1.0,
            };
            let comp = |f: fn(&Sym2) -> f64| {
                let mut c = geometry.embed(&t.data.iter().map(f).collect::<Vec<_>>());
                sp.forward(&mut c);
                c
            };
            let (axx, axy, ayy) = (comp(|a| a.xx), comp(|a| a.xy), comp(|a| a.yy));
            for j in 0..sp.ny {
                for i in 0..sp.nx {
                    let k = j * sp.nx + i;
                    let (kx, ky) = (sp.kx[i], sp.ky[j]);
                    rhs[k] = (axx[k] * (kx * kx) + axy[k] * (2.0 * kx * ky) + ayy[k] * (ky * ky)) * sign;
                }
            }
        }
        PressureInput::Vector(v) => {
            let mut fx = geometry.embed(&v.x);
            let mut fy = geometry.embed(&v.y);
            sp.forward(&mut fx);
            sp.forward(&mut fy);
            for j in 0..sp.ny {
                for i in 0..sp.nx {
                    let k = j * sp.nx + i;
                    rhs[k] = Complex64::new(0.0, 1.0) * (fx[k] * sp.kx[i] + fy[k] * sp.ky[j]);
                }
            }
        }
    }
    let mut p_hat = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..sp.ny {
        for i in 0..sp.nx {
            let k = j * sp.nx + i;
            let k2 = sp.kx[i] * sp.kx[i] + sp.ky[j] * sp.ky[j];
            if sp.nyquist(i, j) || k2 == 0.0 {
                rhs[k] = Complex64::new(0.0, 0.0);
            } else {
                p_hat[k] = rhs[k] / k2;
            }
        }
    }
    let rhs_phys = sp.inverse_real(rhs);
    let mut p = sp.inverse_real(p_hat);
    if problem.kind == PressureKind::P4 {
        p.iter_mut().for_each(|v| *v *= problem.theta);
    }

    // residual from the physical pressure
    let mut lap: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    sp.forward(&mut lap);
    for j in 0..sp.ny {
        for i in 0..sp.nx {
            let k = j * sp.nx + i;
            let k2 = sp.kx[i] * sp.kx[i] + sp.ky[j] * sp.ky[j];
            lap[k] = if sp.nyquist(i, j) { Complex64::new(0.0, 0.0) } else { lap[k] * k2 };
        }
    }
    let neg_lap = sp.inverse_real(lap);
    let theta = if problem.kind == PressureKind::P4 { problem.theta } else { 1.0 };
    let residual = neg_lap.iter().zip(&rhs_phys).map(|(a, b)| (a - theta * b).abs()).fold(0.0, f64::max);
    let scale = rhs_phys.iter().fold(0.0_f64, |m, v| m.max((theta * v).abs()));

    Ok(PressureSolution { geometry, p: ScalarField { mesh: geometry.mesh, data: p }, residual, scale })
}

/// One random input for the bound study. Every component is a sum of
/// Gaussians drawn from the seed alone, so the same seed gives the same
/// continuum fields at every resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSample {
    pub alpha: TensorField,
    pub u: CellVectorField,
    pub f: CellVectorField,
}

struct Blob {
    amp: f64,
    c: [f64; 2],
    width: f64,
}

fn random_blobs(rng: &mut ChaCha8Rng, lx: f64, ly: f64) -> Vec<Blob> {
    (0..4)
        .map(|_| Blob {
            amp: rng.random_range(-1.0..1.0),
            c: [rng.random_range(0.2..0.8) * lx, rng.random_range(0.2..0.8) * ly],
            width: rng.random_range(0.06..0.15) * lx.min(ly),
        })
        .collect()
}

fn eval_blobs(b: &[Blob], x: f64, y: f64) -> f64 {
    b.iter()
        .map(|g| {
            let r2 = (x - g.c[0]).powi(2) + (y - g.c[1]).powi(2);
            g.amp * (-r2 / (2.0 * g.width * g.width)).exp()
        })
        .sum()
}

pub fn random_samples(mesh: &Mesh, count: usize, seed: u64) -> Vec<BoundSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let comps: Vec<Vec<Blob>> = (0..7).map(|_| random_blobs(&mut rng, mesh.lx(), mesh.ly())).collect();
            BoundSample {
                alpha: TensorField::from_fn(*mesh, |x, y| {
                    Sym2::new(eval_blobs(&comps[0], x, y), eval_blobs(&comps[1], x, y), eval_blobs(&comps[2], x, y))
                }),
                u: CellVectorField::from_fn(*mesh, |x, y| [eval_blobs(&comps[3], x, y), eval_blobs(&comps[4], x, y)]),
                f: CellVectorField::from_fn(*mesh, |x, y| [eval_blobs(&comps[5], x, y), eval_blobs(&comps[6], x, y)]),
            }
        })
        .collect()
}

/// Worst observed ratios of the bound study.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundsReport {
    /// `max ||p1||_{L^{r_i'}} / ||α ζ_i||_{L^{r_i'}}`
    pub p1: f64,
    /// `max ||p2||_{L^{R_i/2}} / ||u sqrt(ζ_i)||^2_{L^{R_i}}`
    pub p2: f64,
    /// `max ||p3||_{L^2} / ||F||_{L^2}`
    pub p3: f64,
    /// Inputs with zero norm that were left out.
    pub skipped: usize,
    /// Largest `residual / scale` over all solves.
    pub max_relative_residual: f64,
    pub solves: usize,
}

fn relative(res: &PressureSolution) -> f64 {
    if res.scale > 0.0 {
        res.residual / res.scale
    } else {
        0.0
    }
}

enum Outcome {
    Ratio(PressureKind, f64, f64),
    Skipped,
}

/// Solves every `(sample, ball)` problem and collects the worst ratios.
pub fn verify_bounds(samples: &[BoundSample], covering: &Covering, pad: usize) -> Result<BoundsReport, PressureError> {
    let jobs: Vec<(usize, Option<usize>)> = (0..samples.len())
        .flat_map(|s| (0..covering.len()).map(move |b| (s, Some(b))).chain(std::iter::once((s, None))))
        .collect();
    let results: Vec<Result<Vec<Outcome>, PressureError>> = jobs
        .par_iter()
        .map(|&(s, ball)| {
            let sample = &samples[s];
            let mut out = Vec::new();
            match ball {
                Some(b) => {
                    let zeta = covering.zeta(b);
                    let mesh = zeta.mesh;
                    let alpha_z = TensorField {
                        mesh,
                        data: sample.alpha.data.iter().zip(&zeta.data).map(|(&a, &z)| z * a).collect(),
                    };
                    let uu_z = TensorField {
                        mesh,
                        data: sample
                            .u
                            .x
                            .iter()
                            .zip(&sample.u.y)
                            .zip(&zeta.data)
                            .map(|((&a, &b), &z)| Sym2::new(z * a * a, z * a * b, z * b * b))
                            .collect(),
                    };
                    let u_sqrt_z = CellVectorField {
                        mesh,
                        x: sample.u.x.iter().zip(&zeta.data).map(|(a, z)| a * z.sqrt()).collect(),
                        y: sample.u.y.iter().zip(&zeta.data).map(|(a, z)| a * z.sqrt()).collect(),
                    };
                    let p1 = solve(&PressureProblem::new(PressureKind::P1, PressureInput::Tensor(alpha_z.clone())).with_pad(pad))?;
                    let p2 = solve(&PressureProblem::new(PressureKind::P2, PressureInput::Tensor(uu_z)).with_pad(pad))?;
                    let p1_box = ScalarField { mesh: p1.geometry.mesh, data: p1.p.data.clone() };
                    let p2_box = ScalarField { mesh: p2.geometry.mesh, data: p2.p.data.clone() };
                    for slab in 0..covering.local_max[b].len() {
                        let r_conj = conjugate_exponent(covering.local_max[b][slab]);
                        let big_r = covering.integrability[b][slab];
                        let den1 = lp_norm(&alpha_z, r_conj);
                        if den1 > 0.0 {
                            out.push(Outcome::Ratio(PressureKind::P1, lp_norm(&p1_box, r_conj) / den1, relative(&p1)));
                        } else {
                            out.push(Outcome::Skipped);
                        }
                        let den2 = lp_norm(&u_sqrt_z, big_r).powi(2);
                        if den2 > 0.0 {
                            out.push(Outcome::Ratio(PressureKind::P2, lp_norm(&p2_box, big_r / 2.0) / den2, relative(&p2)));
                        } else {
                            out.push(Outcome::Skipped);
                        }
                    }
                }
                None => {
                    let p3 = solve(&PressureProblem::new(PressureKind::P3, PressureInput::Vector(sample.f.clone())).with_pad(pad))?;
                    let den = lp_norm(&sample.f, 2.0);
                    if den > 0.0 {
                        let p3_box = ScalarField { mesh: p3.geometry.mesh, data: p3.p.data.clone() };
                        out.push(Outcome::Ratio(PressureKind::P3, lp_norm(&p3_box, 2.0) / den, relative(&p3)));
                    } else {
                        out.push(Outcome::Skipped);
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut report = BoundsReport::default();
    for r in results {
        for o in r? {
            match o {
                Outcome::Skipped => report.skipped += 1,
                Outcome::Ratio(kind, ratio, res) => {
                    report.solves += 1;
                    report.max_relative_residual = report.max_relative_residual.max(res);
                    let slot = match kind {
                        PressureKind::P1 => &mut report.p1,
                        PressureKind::P2 => &mut report.p2,
                        _ => &mut report.p3,
                    };
                    *slot = slot.max(ratio);
                }
            }
        }
    }
    Ok(report)
}

/// Far-field magnitudes in one annulus `inner <= |x - c| < outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub inner: f64,
    pub outer: f64,
    /// `sup |p|` relative to the input `L^2` norm.
    pub sup_p: f64,
    /// `sup |∇p|` relative to the input `L^2` norm.
    pub sup_grad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub input_norm: f64,
    pub bands: Vec<Band>,
    /// Bands ordered by distance have non-increasing `sup |p|` and `sup |∇p|`.
    pub monotone: bool,
    /// Largest relative change of a band value when the padding is doubled.
    pub padding_change: f64,
}

fn band_sups(sol: &PressureSolution, center: [f64; 2], edges: &[f64]) -> Vec<(f64, f64)> {
    let g = sol.gradient();
    let m = sol.geometry.mesh;
    let mut sups = vec![(0.0_f64, 0.0_f64); edges.len() - 1];
    for j in 0..m.ny {
        for i in 0..m.nx {
            let x = sol.geometry.position(i, j);
            let dist = (x[0] - center[0]).hypot(x[1] - center[1]);
            if let Some(b) = (0..edges.len() - 1).find(|&b| dist >= edges[b] && dist < edges[b + 1]) {
                let k = m.idx(i, j);
                sups[b].0 = sups[b].0.max(sol.p.data[k].abs());
                sups[b].1 = sups[b].1.max(g.x[k].hypot(g.y[k]));
            }
        }
    }
    sups
}

fn input_support_radius(input: &PressureInput, center: [f64; 2]) -> f64 {
    let m = *input.mesh();
    let mut r: f64 = 0.0;
    for (i, j, c) in m.cells() {
        let k = m.idx(i, j);
        let nonzero = match input {
            PressureInput::Tensor(t) => t.data[k] != Sym2::ZERO,
            PressureInput::Vector(v) => v.x[k] != 0.0 || v.y[k] != 0.0,
        };
        if nonzero {
            r = r.max((c[0] - center[0]).hypot(c[1] - center[1]));
        }
    }
    r
}

fn input_l2(input: &PressureInput) -> f64 {
    match input {
        PressureInput::Tensor(t) => lp_norm(t, 2.0),
        PressureInput::Vector(v) => lp_norm(v, 2.0),
    }
}

/// Decay of the solution away from a ball `B(center, radius)` containing the
/// input support, over the annuli `[2^k 2r, 2^{k+1} 2r)`, `k < bands`.
///
/// The solve is repeated with the padding doubled to measure image effects.
pub fn verify_locality(
    problem: &PressureProblem,
    center: [f64; 2],
    radius: f64,
    bands: usize,
) -> Result<LocalityReport, PressureError> {
    if !(radius > 0.0) || bands == 0 {
        return Err(PressureError::BadGeometry(format!("radius {radius}, {bands} bands")));
    }
    if input_support_radius(&problem.input, center) >= radius {
        return Err(PressureError::FarRegionIntersectsSupport);
    }
    let edges: Vec<f64> = (0..=bands).map(|k| 2.0 * radius * 2f64.powi(k as i32)).collect();
    let base = solve(problem)?;
    let outer = edges[bands];
    let geo = base.geometry;
    let reach = [
        center[0] - outer,
        center[1] - outer,
        center[0] + outer,
        center[1] + outer,
    ];
    let lo = geo.position(0, 0);
    let hi = geo.position(geo.mesh.nx - 1, geo.mesh.ny - 1);
    if reach[0] < lo[0] || reach[1] < lo[1] || reach[2] > hi[0] || reach[3] > hi[1] {
        return Err(PressureError::BadGeometry(format!("outer band radius {outer} leaves the box")));
    }
    let doubled = solve(&problem.clone().with_pad(2 * problem.pad))?;
    let norm = input_l2(&problem.input);
    let a = band_sups(&base, center, &edges);
    let b = band_sups(&doubled, center, &edges);
    let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
    let bands: Vec<Band> = a
        .iter()
        .enumerate()
        .map(|(k, &(p, g))| Band { inner: edges[k], outer: edges[k + 1], sup_p: p * scale, sup_grad: g * scale })
        .collect();
    let monotone = bands.windows(2).all(|w| w[1].sup_p <= w[0].sup_p && w[1].sup_grad <= w[0].sup_grad);
    let change = |x: f64, y: f64| if x.max(y) > 0.0 { (x - y).abs() / x.max(y) } else { 0.0 };
    let padding_change = a
        .iter()
        .zip(&b)
        .map(|(&(p, g), &(q, h))| change(p, q).max(change(g, h)))
        .fold(0.0, f64::max);
    Ok(LocalityReport { input_norm: norm, bands, monotone, padding_change })
}
