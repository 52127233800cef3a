//! The variable growth exponent `s(t, x)`.
//!
//! Time dependence is piecewise constant: the field is a list of slabs, each
//! holding a spatial grid of exponent values valid on `[t_start, next_start)`.
//! Nothing is assumed about continuity across slab boundaries. In space the
//! exponent should be log-Hölder continuous; that modulus can only be
//! estimated on a grid, so [`validate`] reports it without gating on it.

use thiserror::Error;

use crate::mesh::{Mesh, ScalarField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("exponent field has no slabs")]
    NoSlabs,
    #[error("slab {slab} is defined on a different mesh")]
    MeshMismatch { slab: usize },
    #[error("slabs must start at t = 0 and increase strictly (slab {slab} starts at {t_start})")]
    BadSlabTimes { slab: usize, t_start: f64 },
    #[error("final time {t_end} does not exceed the last slab start")]
    BadFinalTime { t_end: f64 },
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    BadDimension(u32),
    #[error("non-finite exponent value in slab {slab} at cell {cell}")]
    NonFinite { slab: usize, cell: usize },
    #[error("exponent {value} at slab {slab}, cell {cell} is not above 1")]
    NotAboveOne { slab: usize, cell: usize, value: f64 },
    #[error("exponent minimum {min} is below the admissible bound {bound}")]
    BelowLowerBound { min: f64, bound: f64 },
    #[error("covering radius fell to {radius}, below two mesh cells; exponent oscillates too fast for this mesh")]
    RadiusUnderflow { radius: f64 },
}

/// Smallest admissible exponent `(3d + 2) / (d + 2)`.
pub fn admissible_lower_bound(d: u32) -> f64 {
    let d = d as f64;
    (3.0 * d + 2.0) / (d + 2.0)
}

/// `s0 = 3 + 2/d`, the space-time integrability exponent of the velocity.
pub fn s0(d: u32) -> f64 {
    3.0 + 2.0 / d as f64
}

/// Hölder conjugate `p / (p - 1)`.
#[inline]
pub fn conjugate_exponent(p: f64) -> f64 {
    p / (p - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub t_start: f64,
    pub values: ScalarField,
}

/// Exponent `s(t, x)` as piecewise-constant-in-time slabs over one spatial mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    d: u32,
    mesh: Mesh,
    slabs: Vec<Slab>,
    t_end: f64,
    s_min: f64,
    s_max: f64,
}

impl ExponentField {
    /// Slabs must start at 0, be strictly increasing and share one mesh.
    /// Values are not range-checked here; see [`validate`].
    pub fn new(d: u32, slabs: Vec<Slab>, t_end: f64) -> Result<Self, ExponentError> {
        if d != 2 && d != 3 {
            return Err(ExponentError::BadDimension(d));
        }
        let first = slabs.first().ok_or(ExponentError::NoSlabs)?;
        let mesh = first.values.mesh;
        let mut prev = f64::NEG_INFINITY;
        for (k, slab) in slabs.iter().enumerate() {
            if slab.values.mesh != mesh {
                return Err(ExponentError::MeshMismatch { slab: k });
            }
            let ok = if k == 0 { slab.t_start == 0.0 } else { slab.t_start > prev };
            if !ok || !slab.t_start.is_finite() {
                return Err(ExponentError::BadSlabTimes { slab: k, t_start: slab.t_start });
            }
            prev = slab.t_start;
        }
        if !(t_end > prev) {
            return Err(ExponentError::BadFinalTime { t_end });
        }
        let (s_min, s_max) = slabs
            .iter()
            .flat_map(|s| s.values.data.iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok(Self { d, mesh, slabs, t_end, s_min, s_max })
    }

    /// Single-slab field on `[0, t_end)`.
    pub fn stationary(d: u32, values: ScalarField, t_end: f64) -> Result<Self, ExponentError> {
        Self::new(d, vec![Slab { t_start: 0.0, values }], t_end)
    }

    pub fn constant(mesh: Mesh, value: f64, t_end: f64) -> Self {
        Self::stationary(2, ScalarField::constant(mesh, value), t_end).expect("valid constant field")
    }

    /// `base + amplitude * sin(pi x / Lx) sin(pi y / Ly)`.
    pub fn sinusoidal(mesh: Mesh, base: f64, amplitude: f64, t_end: f64) -> Self {
        let (lx, ly) = (mesh.lx(), mesh.ly());
        let values = ScalarField::from_fn(mesh, |x, y| {
            base + amplitude * (std::f64::consts::PI * x / lx).sin() * (std::f64::consts::PI * y / ly).sin()
        });
        Self::stationary(2, values, t_end).expect("valid sinusoidal field")
    }

    /// Two spatial profiles, switched wholesale at `switch_time`.
    pub fn two_phase_switch(
        before: ScalarField,
        after: ScalarField,
        switch_time: f64,
        t_end: f64,
    ) -> Result<Self, ExponentError> {
        Self::new(
            2,
            vec![Slab { t_start: 0.0, values: before }, Slab { t_start: switch_time, values: after }],
            t_end,
        )
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn slabs(&self) -> &[Slab] {
        &self.slabs
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Observed minimum over all slabs.
    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    /// Observed maximum over all slabs.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn slab_index(&self, t: f64) -> usize {
        self.slabs.partition_point(|s| s.t_start <= t).saturating_sub(1)
    }

    /// Exponent grid active at time `t` (the last slab for `t >= t_end`).
    pub fn slab_at(&self, t: f64) -> &ScalarField {
        &self.slabs[self.slab_index(t)].values
    }

    /// Slab lengths; the last one runs to `t_end`.
    pub fn slab_durations(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slabs.len());
        for (k, s) in self.slabs.iter().enumerate() {
            let end = self.slabs.get(k + 1).map_or(self.t_end, |n| n.t_start);
            out.push(end - s.t_start);
        }
        out
    }

    /// Piecewise-constant evaluation at `(t, x)`.
    pub fn at(&self, t: f64, x: [f64; 2]) -> f64 {
        let (i, j) = self.mesh.locate(x);
        self.slab_at(t).at(i, j)
    }

    /// Pointwise Hölder conjugate `s / (s - 1)`.
    pub fn conjugate(&self) -> Result<ExponentField, ExponentError> {
        let mut slabs = Vec::with_capacity(self.slabs.len());
        for (k, slab) in self.slabs.iter().enumerate() {
            let mut values = slab.values.clone();
            for (cell, v) in values.data.iter_mut().enumerate() {
                if !(*v > 1.0) {
                    return Err(ExponentError::NotAboveOne { slab: k, cell, value: *v });
                }
                *v = conjugate_exponent(*v);
            }
            slabs.push(Slab { t_start: slab.t_start, values });
        }
        Self::new(self.d, slabs, self.t_end)
    }

    /// Pointwise map `s -> f(s)` keeping the slab structure.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ExponentField {
        let slabs = self
            .slabs
            .iter()
            .map(|s| {
                let mut values = s.values.clone();
                values.data.iter_mut().for_each(|v| *v = f(*v));
                Slab { t_start: s.t_start, values }
            })
            .collect();
        Self::new(self.d, slabs, self.t_end).expect("map preserves slab structure")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub min: f64,
    pub max: f64,
    pub lower_bound: f64,
    pub bounds_ok: bool,
    /// Sampled log-Hölder modulus per slab.
    pub log_holder: Vec<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.bounds_ok && self.log_holder.iter().all(|m| m.is_finite())
    }
}

/// Upper bound on sample points per axis for the pairwise modulus sweep.
const MODULUS_SAMPLES_PER_AXIS: usize = 64;

/// Checks finiteness and the lower bound, and estimates the log-Hölder modulus.
pub fn validate(field: &ExponentField) -> Result<ValidationReport, ExponentError> {
    for (k, slab) in field.slabs.iter().enumerate() {
        if let Some(cell) = slab.values.data.iter().position(|v| !v.is_finite()) {
            return Err(ExponentError::NonFinite { slab: k, cell });
        }
    }
    let lower_bound = admissible_lower_bound(field.d);
    let log_holder = field
        .slabs
        .iter()
        .map(|s| log_holder_modulus(&s.values, MODULUS_SAMPLES_PER_AXIS))
        .collect();
    Ok(ValidationReport {
        min: field.s_min,
        max: field.s_max,
        lower_bound,
        bounds_ok: field.s_min >= lower_bound,
        log_holder,
    })
}

/// `sup |s(x) - s(y)| * |ln |x - y||` over cell-center pairs with `|x - y| < 1/2`,
/// using at most `max_per_axis` evenly strided samples per axis.
pub fn log_holder_modulus(values: &ScalarField, max_per_axis: usize) -> f64 {
    let mesh = values.mesh;
    let stride_x = mesh.nx.div_ceil(max_per_axis.max(1));
    let stride_y = mesh.ny.div_ceil(max_per_axis.max(1));
    let pts: Vec<([f64; 2], f64)> = (0..mesh.ny)
        .step_by(stride_y)
        .flat_map(|j| (0..mesh.nx).step_by(stride_x).map(move |i| (i, j)))
        .map(|(i, j)| (mesh.cell_center(i, j), values.at(i, j)))
        .collect();
    let mut best = 0.0_f64;
    for (a, (pa, sa)) in pts.iter().enumerate() {
        for (pb, sb) in &pts[a + 1..] {
            let dist = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
            if dist < 0.5 {
                best = best.max((sa - sb).abs() * dist.ln().abs());
            }
        }
    }
    best
}

/// Finite cover of the domain by balls of a common radius together with the
/// local exponent bounds on the doubled balls and a partition of unity.
#[derive(Debug, Clone)]
pub struct Covering {
    pub radius: f64,
    pub centers: Vec<[f64; 2]>,
    /// `min s` over `B_{2r} ∩ Ω`, indexed `[ball][slab]`.
    pub local_min: Vec<Vec<f64>>,
    /// `max s` over `B_{2r} ∩ Ω`, indexed `[ball][slab]`.
    pub local_max: Vec<Vec<f64>>,
    /// Improved integrability exponent `local_min * (1 + 2/d)`.
    pub integrability: Vec<Vec<f64>>,
    /// Sparse partition-of-unity weights: `(cell index, weight)` per ball.
    pub weights: Vec<Vec<(usize, f64)>>,
    mesh: Mesh,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    /// Dense weight grid of ball `i`.
    pub fn zeta(&self, i: usize) -> ScalarField {
        let mut f = ScalarField::zeros(self.mesh);
        for &(cell, w) in &self.weights[i] {
            f.data[cell] = w;
        }
        f
    }

    /// Pointwise sum of all weights; identically one for a valid covering.
    pub fn weight_sum(&self) -> ScalarField {
        let mut f = ScalarField::zeros(self.mesh);
        for ball in &self.weights {
            for &(cell, w) in ball {
                f.data[cell] += w;
            }
        }
        f
    }

    /// Smallest `R_i(t) - r_i(t)` over all balls and slabs.
    pub fn min_gap(&self) -> f64 {
        self.integrability
            .iter()
            .zip(&self.local_max)
            .flat_map(|(big, hi)| big.iter().zip(hi).map(|(a, b)| a - b))
            .fold(f64::INFINITY, f64::min)
    }
}

/// C² bump `(1 - rho^2)^3` on `rho < 1`.
#[inline]
pub fn bump(rho: f64) -> f64 {
    if rho < 1.0 {
        let a = 1.0 - rho * rho;
        a * a * a
    } else {
        0.0
    }
}

/// Cell indices whose centers lie within `radius` of `center`.
fn cells_within(mesh: &Mesh, center: [f64; 2], radius: f64) -> Vec<usize> {
    let i0 = ((center[0] - radius) / mesh.hx - 0.5).floor().max(0.0) as usize;
    let j0 = ((center[1] - radius) / mesh.hy - 0.5).floor().max(0.0) as usize;
    let i1 = (((center[0] + radius) / mesh.hx - 0.5).ceil().max(0.0) as usize).min(mesh.nx - 1);
    let j1 = (((center[1] + radius) / mesh.hy - 0.5).ceil().max(0.0) as usize).min(mesh.ny - 1);
    let mut out = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            let c = mesh.cell_center(i, j);
            if (c[0] - center[0]).hypot(c[1] - center[1]) < radius {
                out.push(mesh.idx(i, j));
            }
        }
    }
    out
}

/// Ball centers on a lattice of spacing at most `radius` per axis, so every
/// point of the domain is within `radius / sqrt(2)` of some center.
fn lattice_centers(mesh: &Mesh, radius: f64) -> Vec<[f64; 2]> {
    let nbx = (mesh.lx() / radius).ceil().max(1.0) as usize;
    let nby = (mesh.ly() / radius).ceil().max(1.0) as usize;
    let (sx, sy) = (mesh.lx() / nbx as f64, mesh.ly() / nby as f64);
    (0..nby)
        .flat_map(|b| (0..nbx).map(move |a| [(a as f64 + 0.5) * sx, (b as f64 + 0.5) * sy]))
        .collect()
}

/// Halves the radius from the domain diameter until, in every slab and on every
/// doubled ball, the exponent oscillates by at most `s_min / d` and the gap
/// `R_i - r_i >= s_min / d` holds as computed.
pub fn build_covering(field: &ExponentField) -> Result<Covering, ExponentError> {
    let s_min = admissible_lower_bound(field.d);
    if field.s_min < s_min {
        return Err(ExponentError::BelowLowerBound { min: field.s_min, bound: s_min });
    }
    let d = field.d as f64;
    let allowed = s_min / d;
    let mesh = field.mesh;
    let floor = 2.0 * mesh.hx.max(mesh.hy);
    let mut radius = mesh.diameter();

    loop {
        if radius < floor {
            return Err(ExponentError::RadiusUnderflow { radius });
        }
        let centers = lattice_centers(&mesh, radius);
        let mut local_min = Vec::with_capacity(centers.len());
        let mut local_max = Vec::with_capacity(centers.len());
        let mut integrability = Vec::with_capacity(centers.len());
        let mut ok = true;
        'balls: for c in &centers {
            let cells = cells_within(&mesh, *c, 2.0 * radius);
            let (mut lo, mut hi, mut big) = (Vec::new(), Vec::new(), Vec::new());
            for slab in &field.slabs {
                let (q, r) = cells
                    .iter()
                    .map(|&k| slab.values.data[k])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                let big_r = q * (1.0 + 2.0 / d);
                if r - q > allowed || big_r - r < allowed {
                    ok = false;
                    break 'balls;
                }
                lo.push(q);
                hi.push(r);
                big.push(big_r);
            }
            local_min.push(lo);
            local_max.push(hi);
            integrability.push(big);
        }
        if ok {
            let weights = partition_of_unity(&mesh, &centers, radius);
            return Ok(Covering { radius, centers, local_min, local_max, integrability, weights, mesh });
        }
        radius *= 0.5;
    }
}

fn partition_of_unity(mesh: &Mesh, centers: &[[f64; 2]], radius: f64) -> Vec<Vec<(usize, f64)>> {
    let mut raw: Vec<Vec<(usize, f64)>> = centers
        .iter()
        .map(|c| {
            cells_within(mesh, *c, radius)
                .into_iter()
                .filter_map(|k| {
                    let p = mesh.cell_center(k % mesh.nx, k / mesh.nx);
                    let w = bump((p[0] - c[0]).hypot(p[1] - c[1]) / radius);
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect();
    let mut total = vec![0.0; mesh.n_cells()];
    for ball in &raw {
        for &(k, w) in ball {
            total[k] += w;
        }
    }
    for ball in &mut raw {
        for (k, w) in ball.iter_mut() {
            *w /= total[*k];
        }
    }
    raw
}
