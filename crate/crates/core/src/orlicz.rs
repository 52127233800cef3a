//! Variable-exponent Lebesgue space numerics: modulars, Luxemburg norms,
//! modular distances and the Hölder pairing bound.
//!
//! All reductions run sequentially in storage order so results are
//! bit-reproducible.

use thiserror::Error;

use crate::exponent_field::{conjugate_exponent, ExponentField};
use crate::mesh::{CellMagnitudes, CellVectorField, Mesh, MeshError, ScalarField, TensorField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrliczError {
    #[error("field and exponent live on different meshes")]
    ShapeMismatch,
    #[error("expected {expected} per-slab fields, got {got}")]
    SlabCountMismatch { expected: usize, got: usize },
    #[error("scaling parameter must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("modular is not finite")]
    NonFinite,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Relative bisection tolerance for the Luxemburg norm.
pub const NORM_RTOL: f64 = 1e-10;
const NORM_MAX_ITER: usize = 200;

/// Magnitude, exponent and measure weight at each quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSamples {
    pub magnitude: Vec<f64>,
    pub exponent: Vec<f64>,
    pub weight: Vec<f64>,
}

impl WeightedSamples {
    /// Spatial samples at one instant with exponent grid `s` and cell-volume weights.
    pub fn spatial<F: CellMagnitudes + ?Sized>(xi: &F, s: &ScalarField) -> Result<Self, OrliczError> {
        if xi.mesh() != &s.mesh {
            return Err(OrliczError::ShapeMismatch);
        }
        let vol = s.mesh.cell_volume();
        Ok(Self {
            magnitude: xi.magnitudes(),
            exponent: s.data.clone(),
            weight: vec![vol; s.mesh.n_cells()],
        })
    }

    /// Space-time samples: one field per slab, each weighted by the slab duration.
    pub fn spacetime<F: CellMagnitudes>(per_slab: &[F], field: &ExponentField) -> Result<Self, OrliczError> {
        if per_slab.len() != field.slabs().len() {
            return Err(OrliczError::SlabCountMismatch { expected: field.slabs().len(), got: per_slab.len() });
        }
        let mut out = Self { magnitude: Vec::new(), exponent: Vec::new(), weight: Vec::new() };
        for ((xi, slab), dur) in per_slab.iter().zip(field.slabs()).zip(field.slab_durations()) {
            let mut part = Self::spatial(xi, &slab.values)?;
            part.weight.iter_mut().for_each(|w| *w *= dur);
            out.magnitude.append(&mut part.magnitude);
            out.exponent.append(&mut part.exponent);
            out.weight.append(&mut part.weight);
        }
        Ok(out)
    }

    /// `sum w |xi / lambda|^s`.
    pub fn modular_scaled(&self, lambda: f64) -> f64 {
        let inv = 1.0 / lambda;
        let mut acc = 0.0;
        for ((m, s), w) in self.magnitude.iter().zip(&self.exponent).zip(&self.weight) {
            if *m != 0.0 {
                acc += w * (m * inv).powf(*s);
            }
        }
        acc
    }

    pub fn modular(&self) -> f64 {
        self.modular_scaled(1.0)
    }

    fn constant_norm(&self, p: f64) -> f64 {
        let mut acc = 0.0;
        for (m, w) in self.magnitude.iter().zip(&self.weight) {
            acc += w * m.powf(p);
        }
        acc.powf(1.0 / p)
    }

    /// `inf { lambda > 0 : modular(xi / lambda) <= 1 }` by bisection.
    pub fn luxemburg_norm(&self) -> Result<f64, OrliczError> {
        if self.magnitude.iter().all(|&m| m == 0.0) {
            return Ok(0.0);
        }
        if !self.modular().is_finite() {
            return Err(OrliczError::NonFinite);
        }
        let (s_lo, s_hi) = self
            .exponent
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
        // Starting bracket from the two extreme constant-exponent norms; widened
        // geometrically if the measure puts it on the wrong side.
        let mut lo = self.constant_norm(s_hi).min(self.constant_norm(s_lo)) * 0.5;
        let mut hi = self.constant_norm(s_lo).max(self.constant_norm(s_hi)) + 1.0;
        if !(lo > 0.0) {
            lo = hi * 1e-3;
        }
        while self.modular_scaled(lo) < 1.0 {
            lo *= 0.5;
        }
        while self.modular_scaled(hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..NORM_MAX_ITER {
            let mid = 0.5 * (lo + hi);
            if self.modular_scaled(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= NORM_RTOL * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Discrete `∫ |xi|^{s}` at one instant.
pub fn modular<F: CellMagnitudes + ?Sized>(xi: &F, s: &ScalarField) -> Result<f64, OrliczError> {
    Ok(WeightedSamples::spatial(xi, s)?.modular())
}

/// Space-time modular `∫∫ |xi|^{s(t,x)}`, summing slabs weighted by duration.
pub fn spacetime_modular<F: CellMagnitudes>(per_slab: &[F], field: &ExponentField) -> Result<f64, OrliczError> {
    Ok(WeightedSamples::spacetime(per_slab, field)?.modular())
}

pub fn luxemburg_norm<F: CellMagnitudes + ?Sized>(xi: &F, s: &ScalarField) -> Result<f64, OrliczError> {
    WeightedSamples::spatial(xi, s)?.luxemburg_norm()
}

/// Fields that can be differenced and scaled cell by cell.
pub trait LinearCellField: CellMagnitudes + Sized {
    fn difference(&self, other: &Self) -> Result<Self, OrliczError>;
    fn scaled(&self, c: f64) -> Self;
}

impl LinearCellField for ScalarField {
    fn difference(&self, other: &Self) -> Result<Self, OrliczError> {
        if self.mesh != other.mesh {
            return Err(OrliczError::ShapeMismatch);
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ScalarField::from_vec(self.mesh, data)?)
    }
    fn scaled(&self, c: f64) -> Self {
        ScalarField { mesh: self.mesh, data: self.data.iter().map(|v| c * v).collect() }
    }
}

impl LinearCellField for CellVectorField {
    fn difference(&self, other: &Self) -> Result<Self, OrliczError> {
        if self.mesh != other.mesh {
            return Err(OrliczError::ShapeMismatch);
        }
        Ok(CellVectorField {
            mesh: self.mesh,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a - b).collect(),
        })
    }
    fn scaled(&self, c: f64) -> Self {
        CellVectorField {
            mesh: self.mesh,
            x: self.x.iter().map(|v| c * v).collect(),
            y: self.y.iter().map(|v| c * v).collect(),
        }
    }
}

impl LinearCellField for TensorField {
    fn difference(&self, other: &Self) -> Result<Self, OrliczError> {
        if self.mesh != other.mesh {
            return Err(OrliczError::ShapeMismatch);
        }
        Ok(TensorField { mesh: self.mesh, data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect() })
    }
    fn scaled(&self, c: f64) -> Self {
        TensorField { mesh: self.mesh, data: self.data.iter().map(|t| c * *t).collect() }
    }
}

/// `modular((xi_n - xi) / lambda)`.
pub fn modular_distance<F: LinearCellField>(
    xi_n: &F,
    xi: &F,
    s: &ScalarField,
    lambda: f64,
) -> Result<f64, OrliczError> {
    if !(lambda > 0.0) {
        return Err(OrliczError::NonPositiveLambda(lambda));
    }
    let diff = xi_n.difference(xi)?;
    Ok(WeightedSamples::spatial(&diff, s)?.modular_scaled(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport {
    /// `∫ |phi| |psi|`
    pub integral: f64,
    pub norm_phi: f64,
    pub norm_psi: f64,
    /// `integral / (norm_phi * norm_psi)`, zero when either norm vanishes.
    pub ratio: f64,
    pub holds: bool,
}

/// Checks `∫|phi psi| <= 2 ||phi||_{L^s} ||psi||_{L^{s'}}`.
pub fn holder_pairing<F, G>(phi: &F, psi: &G, s: &ScalarField) -> Result<HolderReport, OrliczError>
where
    F: CellMagnitudes + ?Sized,
    G: CellMagnitudes + ?Sized,
{
    if phi.mesh() != &s.mesh || psi.mesh() != &s.mesh {
        return Err(OrliczError::ShapeMismatch);
    }
    let conj = ScalarField { mesh: s.mesh, data: s.data.iter().map(|&p| conjugate_exponent(p)).collect() };
    let norm_phi = luxemburg_norm(phi, s)?;
    let norm_psi = luxemburg_norm(psi, &conj)?;
    let vol = s.mesh.cell_volume();
    let integral: f64 = phi.magnitudes().iter().zip(psi.magnitudes()).map(|(a, b)| a * b * vol).sum();
    let denom = norm_phi * norm_psi;
    let ratio = if denom > 0.0 { integral / denom } else { 0.0 };
    Ok(HolderReport { integral, norm_phi, norm_psi, ratio, holds: integral <= 2.0 * denom })
}

/// Classical `L^p` norm with cell-volume weights (no normalization).
pub fn lp_norm<F: CellMagnitudes + ?Sized>(xi: &F, p: f64) -> f64 {
    let vol = xi.mesh().cell_volume();
    xi.magnitudes().iter().map(|m| m.powf(p) * vol).sum::<f64>().powf(1.0 / p)
}

/// Mesh of two half-measure cells, handy for hand-checkable cases.
pub fn two_cell_mesh() -> Mesh {
    Mesh::new(2, 1, 0.5, 1.0).expect("valid mesh")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_examples() {
        let m = Mesh::unit_square(4);
        let ones = ScalarField::constant(m, 1.0);
        let s = ScalarField::from_fn(m, |x, y| 2.0 + x + y);
        assert!((modular(&ones, &s).unwrap() - 1.0).abs() < 1e-15);
        let twos = ScalarField::constant(m, 2.0);
        assert!((modular(&twos, &ScalarField::constant(m, 2.0)).unwrap() - 4.0).abs() < 1e-14);

        let tc = two_cell_mesh();
        let xi = ScalarField::constant(tc, 2.0);
        let s = ScalarField::from_vec(tc, vec![2.0, 4.0]).unwrap();
        assert_eq!(modular(&xi, &s).unwrap(), 10.0);
    }

    #[test]
    fn modular_zero_iff_field_zero() {
        let m = Mesh::unit_square(3);
        let s = ScalarField::constant(m, 2.5);
        let mut xi = ScalarField::zeros(m);
        assert_eq!(modular(&xi, &s).unwrap(), 0.0);
        xi.data[4] = 1e-3;
        assert!(modular(&xi, &s).unwrap() > 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let xi = ScalarField::zeros(Mesh::unit_square(3));
        let s = ScalarField::constant(Mesh::unit_square(4), 2.0);
        assert_eq!(modular(&xi, &s), Err(OrliczError::ShapeMismatch));
    }

    #[test]
    fn norm_examples() {
        let m = Mesh::unit_square(4);
        let xi = ScalarField::constant(m, 2.0);
        let n = luxemburg_norm(&xi, &ScalarField::constant(m, 2.0)).unwrap();
        assert!((n - 2.0).abs() <= 1e-9, "{n}");

        let tc = two_cell_mesh();
        let xi = ScalarField::constant(tc, 2.0);
        let s = ScalarField::from_vec(tc, vec![2.0, 4.0]).unwrap();
        // 1/2 y + 1/2 y^2 = 1 with y = (2/lambda)^2 has root y = 1
        let n = luxemburg_norm(&xi, &s).unwrap();
        assert!((n - 2.0).abs() <= 1e-8, "{n}");
        assert_eq!(luxemburg_norm(&ScalarField::zeros(tc), &s).unwrap(), 0.0);
    }

    #[test]
    fn modular_distance_examples() {
        let m = Mesh::unit_square(4);
        let s = ScalarField::constant(m, 2.0);
        let xi = ScalarField::from_fn(m, |x, y| x * y);
        assert_eq!(modular_distance(&xi, &xi, &s, 0.3).unwrap(), 0.0);
        for n in [1.0, 2.0, 10.0] {
            let xn = ScalarField { mesh: m, data: xi.data.iter().map(|v| v + 1.0 / n).collect() };
            let d = modular_distance(&xn, &xi, &s, 1.0).unwrap();
            assert!((d - 1.0 / (n * n)).abs() < 1e-14);
        }
        assert_eq!(modular_distance(&xi, &xi, &s, 0.0), Err(OrliczError::NonPositiveLambda(0.0)));
    }

    #[test]
    fn holder_degenerate_and_cauchy_schwarz() {
        let m = Mesh::unit_square(4);
        let s = ScalarField::constant(m, 2.0);
        let z = ScalarField::zeros(m);
        let r = holder_pairing(&z, &z, &s).unwrap();
        assert_eq!((r.integral, r.ratio), (0.0, 0.0));
        assert!(r.holds);
        let phi = ScalarField::from_fn(m, |x, y| 1.0 + x - y);
        let r = holder_pairing(&phi, &phi, &s).unwrap();
        assert!(r.ratio <= 1.0 + 1e-9, "{}", r.ratio);
    }

    #[test]
    fn spacetime_weights_by_duration() {
        let m = Mesh::unit_square(2);
        let field = ExponentField::two_phase_switch(
            ScalarField::constant(m, 2.0),
            ScalarField::constant(m, 3.0),
            0.25,
            1.0,
        )
        .unwrap();
        let xi = ScalarField::constant(m, 2.0);
        let v = spacetime_modular(&[xi.clone(), xi], &field).unwrap();
        assert!((v - (0.25 * 4.0 + 0.75 * 8.0)).abs() < 1e-14);
    }
}
