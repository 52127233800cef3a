//! Power-law stress `S(t,x,ξ) = (ν0 + ν1 |ξ|^{s(t,x)-2}) ξ`, its regularization
//! `S^θ = S + θ ∇_ξ |ξ|^{s_max}`, and sweep-based certificates for
//! monotonicity and coercivity.
//!
//! `|ξ|` is the Frobenius norm. Exponents are at least 2, so `|ξ|^{s-2}` stays
//! bounded at the origin and `S(t, x, 0) = 0` exactly.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::exponent_field::{conjugate_exponent, ExponentField};
use crate::mesh::{MeshError, Sym2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RheologyError {
    #[error("invalid stress law: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    NotSymmetric(#[from] MeshError),
    #[error("coercivity constant exceeded 2^64; the law does not satisfy the growth condition")]
    CoercivityFailed,
}

#[derive(Debug, Clone)]
pub struct StressLaw {
    nu0: f64,
    nu1: f64,
    theta: f64,
    exponent: Arc<ExponentField>,
    s_max: f64,
}

impl StressLaw {
    pub fn new(nu0: f64, nu1: f64, theta: f64, exponent: Arc<ExponentField>) -> Result<Self, RheologyError> {
        if !(nu0.is_finite() && nu1.is_finite() && theta.is_finite()) {
            return Err(RheologyError::InvalidParameters("non-finite coefficient".into()));
        }
        if nu0 < 0.0 || nu1 < 0.0 {
            return Err(RheologyError::InvalidParameters(format!("viscosities must be nonnegative (nu0={nu0}, nu1={nu1})")));
        }
        if nu0 + nu1 <= 0.0 {
            return Err(RheologyError::InvalidParameters("nu0 + nu1 must be positive".into()));
        }
        if !(0.0..1.0).contains(&theta) {
            return Err(RheologyError::InvalidParameters(format!("theta must lie in [0, 1), got {theta}")));
        }
        if exponent.s_min() < 2.0 {
            return Err(RheologyError::InvalidParameters(format!(
                "exponent minimum {} is below 2",
                exponent.s_min()
            )));
        }
        let s_max = exponent.s_max();
        Ok(Self { nu0, nu1, theta, exponent, s_max })
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    pub fn exponent(&self) -> &ExponentField {
        &self.exponent
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self, RheologyError> {
        Self::new(self.nu0, self.nu1, theta, self.exponent.clone())
    }

    /// Secant viscosity `ν0 + ν1 m^{s-2}` for `|ξ| = m`.
    #[inline]
    pub fn viscosity(&self, s: f64, m: f64) -> f64 {
        self.nu0 + self.nu1 * m.powf(s - 2.0)
    }

    /// Secant viscosity of the regularized law.
    #[inline]
    pub fn regularized_viscosity(&self, s: f64, m: f64) -> f64 {
        let mut mu = self.viscosity(s, m);
        if self.theta > 0.0 {
            mu += self.theta * self.s_max * m.powf(self.s_max - 2.0);
        }
        mu
    }

    /// `S` with the exponent value supplied directly.
    #[inline]
    pub fn stress(&self, s: f64, xi: Sym2) -> Sym2 {
        let m = xi.norm();
        if m == 0.0 {
            return Sym2::ZERO;
        }
        self.viscosity(s, m) * xi
    }

    /// `S^θ` with the exponent value supplied directly.
    #[inline]
    pub fn stress_regularized(&self, s: f64, xi: Sym2) -> Sym2 {
        let m = xi.norm();
        if m == 0.0 {
            return Sym2::ZERO;
        }
        self.regularized_viscosity(s, m) * xi
    }

    pub fn eval(&self, t: f64, x: [f64; 2], xi: Sym2) -> Sym2 {
        self.stress(self.exponent.at(t, x), xi)
    }

    pub fn eval_regularized(&self, t: f64, x: [f64; 2], xi: Sym2) -> Sym2 {
        self.stress_regularized(self.exponent.at(t, x), xi)
    }

    /// [`eval`](Self::eval) on a full matrix, rejecting non-symmetric input.
    pub fn eval_matrix(&self, t: f64, x: [f64; 2], xi: [[f64; 2]; 2]) -> Result<Sym2, RheologyError> {
        Ok(self.eval(t, x, Sym2::from_matrix(xi)?))
    }
}

/// `(S^θ(ξ1) - S^θ(ξ2)) : (ξ1 - ξ2)` at a fixed exponent.
pub fn monotone_inner(law: &StressLaw, s: f64, xi1: Sym2, xi2: Sym2) -> f64 {
    (law.stress_regularized(s, xi1) - law.stress_regularized(s, xi2)).ddot(xi1 - xi2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// Smallest raw inner product seen.
    pub worst_inner: f64,
    /// Smallest inner product divided by `|Δξ| (|S1| + |S2|)`.
    pub worst_normalized: f64,
    /// Every pair with `ξ1 != ξ2` gave a strictly positive inner product.
    pub strict: bool,
}

fn random_sym(rng: &mut ChaCha8Rng) -> Sym2 {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let xx: f64 = rng.sample(StandardNormal);
    let xy: f64 = rng.sample(StandardNormal);
    let yy: f64 = rng.sample(StandardNormal);
    scale * Sym2::new(xx, xy, yy)
}

/// Random sweep of the monotonicity inner product of `S^θ`.
///
/// A quarter of the pairs are near-diagonal (`ξ2 = ξ1 + small`) to probe
/// cancellation.
pub fn certify_monotone(law: &StressLaw, n_samples: usize, seed: u64) -> MonotonicityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = *law.exponent.mesh();
    let t_end = law.exponent.t_end();
    let mut worst_inner = f64::INFINITY;
    let mut worst_normalized = f64::INFINITY;
    let mut strict = true;
    for k in 0..n_samples.max(1) {
        let t = rng.random_range(0.0..t_end);
        let x = [rng.random_range(0.0..mesh.lx()), rng.random_range(0.0..mesh.ly())];
        let s = law.exponent.at(t, x);
        let xi1 = random_sym(&mut rng);
        let xi2 = if k % 4 == 3 {
            let eps = 10f64.powf(rng.random_range(-8.0..-3.0));
            xi1 + eps * random_sym(&mut rng)
        } else {
            random_sym(&mut rng)
        };
        let inner = monotone_inner(law, s, xi1, xi2);
        let scale = (xi1 - xi2).norm() * (law.stress_regularized(s, xi1).norm() + law.stress_regularized(s, xi2).norm());
        worst_inner = worst_inner.min(inner);
        if scale > 0.0 {
            worst_normalized = worst_normalized.min(inner / scale);
        }
        if xi1 != xi2 && !(inner > 0.0) {
            strict = false;
        }
    }
    MonotonicityReport { samples: n_samples.max(1), worst_inner, worst_normalized, strict }
}

/// Grid of `(|ξ|, s)` values visited by the coercivity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub magnitudes: Vec<f64>,
    pub exponents: Vec<f64>,
}

impl SweepRecord {
    /// `|ξ|` log-spaced over `[1e-8, 1e8]` (20 per decade) and `s` over the
    /// exponent's observed range.
    pub fn standard(s_lo: f64, s_hi: f64) -> Self {
        let magnitudes = (0..=320).map(|k| 10f64.powf(-8.0 + k as f64 / 20.0)).collect();
        let exponents = if s_hi > s_lo {
            (0..=32).map(|k| s_lo + (s_hi - s_lo) * k as f64 / 32.0).collect()
        } else {
            vec![s_lo]
        };
        Self { magnitudes, exponents }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedCertificate {
    pub c_theta: f64,
    pub h_theta: f64,
    pub worst_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityCertificate {
    pub c: f64,
    /// Constant majorant of `h(t, x)`; the tightest one for the chosen `c`.
    pub h_bar: f64,
    /// `min (c S:ξ - |ξ|^s - |S|^{s'} + h_bar)` over the sweep.
    pub worst_margin: f64,
    /// Worst margin divided by `|ξ|^s`.
    pub worst_relative_margin: f64,
    pub sweep: SweepRecord,
    /// Present when `θ > 0`.
    pub regularized: Option<RegularizedCertificate>,
}

const C_LIMIT: f64 = 18446744073709551616.0; // 2^64

/// Deficit `|ξ|^s + |S|^{s'} - c S:ξ` of the growth condition at `|ξ| = m`.
///
/// The law is isotropic, so with `g = (ν0 + ν1 m^{s-2}) m^{2-s}` both sides
/// scale by `m^s`: `S:ξ = g m^s` and `|S|^{s'} = g^{s'} m^s`. Factoring out
/// `m^s` keeps the pure power law (`g = ν1`) free of rounding.
fn growth_deficit(nu0: f64, nu1: f64, c: f64, s: f64, m: f64) -> (f64, f64) {
    let g = nu0 * m.powf(2.0 - s) + nu1;
    let rel = 1.0 + g.powf(conjugate_exponent(s)) - c * g;
    (rel * m.powf(s), m.powf(s))
}

/// Same deficit for `S^θ` measured in the fixed exponent `s_max`.
fn regularized_deficit(law: &StressLaw, c: f64, s: f64, m: f64) -> (f64, f64) {
    let p = law.s_max;
    let g = law.nu0 * m.powf(2.0 - p) + law.nu1 * m.powf(s - p) + law.theta * p;
    let rel = 1.0 + g.powf(conjugate_exponent(p)) - c * g;
    (rel * m.powf(p), m.powf(p))
}

/// Finds `(c, h_bar)` with `c S:ξ >= |ξ|^s + |S|^{s'} - h_bar` on the sweep grid.
///
/// `c` is doubled from 1 until the margin is nonnegative with the trial
/// allowance `h = c (1 + ν0 + ν1)`; `h_bar` is then tightened to the largest
/// deficit actually seen. For `θ > 0` the `s_max` variant is certified with
/// `h_θ / c_θ = (h_bar + 1) / c`.
pub fn certify_coercive(law: &StressLaw) -> Result<CoercivityCertificate, RheologyError> {
    let sweep = SweepRecord::standard(law.exponent.s_min(), law.exponent.s_max());
    let points: Vec<(f64, f64)> =
        sweep.exponents.iter().flat_map(|&s| sweep.magnitudes.iter().map(move |&m| (s, m))).collect();

    let mut c = 1.0;
    loop {
        let allowance = c * (1.0 + law.nu0 + law.nu1);
        let ok = points.iter().all(|&(s, m)| growth_deficit(law.nu0, law.nu1, c, s, m).0 <= allowance);
        if ok {
            break;
        }
        c *= 2.0;
        if c > C_LIMIT {
            return Err(RheologyError::CoercivityFailed);
        }
    }
    let h_bar = points
        .iter()
        .map(|&(s, m)| growth_deficit(law.nu0, law.nu1, c, s, m).0)
        .fold(0.0, f64::max);
    let (mut worst_margin, mut worst_relative_margin) = (f64::INFINITY, f64::INFINITY);
    for &(s, m) in &points {
        let (deficit, ms) = growth_deficit(law.nu0, law.nu1, c, s, m);
        let margin = h_bar - deficit;
        worst_margin = worst_margin.min(margin);
        worst_relative_margin = worst_relative_margin.min(margin / ms);
    }

    let regularized = if law.theta > 0.0 {
        let ratio = (h_bar + 1.0) / c;
        let mut c_theta = 1.0;
        loop {
            let h_theta = c_theta * ratio;
            let worst = points
                .iter()
                .map(|&(s, m)| h_theta - regularized_deficit(law, c_theta, s, m).0)
                .fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                break Some(RegularizedCertificate { c_theta, h_theta, worst_margin: worst });
            }
            c_theta *= 2.0;
            if c_theta > C_LIMIT {
                return Err(RheologyError::CoercivityFailed);
            }
        }
    } else {
        None
    };

    Ok(CoercivityCertificate { c, h_bar, worst_margin, worst_relative_margin, sweep, regularized })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    fn law(nu0: f64, nu1: f64, theta: f64, s: f64) -> StressLaw {
        let e = Arc::new(ExponentField::constant(Mesh::unit_square(4), s, 1.0));
        StressLaw::new(nu0, nu1, theta, e).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        for l in [law(1.0, 1.0, 0.0, 2.0), law(0.0, 1.0, 0.5, 3.0)] {
            assert_eq!(l.eval(0.1, [0.5, 0.5], Sym2::ZERO), Sym2::ZERO);
            assert_eq!(l.eval_regularized(0.1, [0.5, 0.5], Sym2::ZERO), Sym2::ZERO);
        }
    }

    #[test]
    fn newtonian_is_identity() {
        let l = law(1.0, 0.0, 0.0, 2.7);
        let xi = Sym2::new(0.3, -1.2, 4.0);
        assert_eq!(l.eval(0.0, [0.1, 0.1], xi), xi);
    }

    #[test]
    fn power_law_on_traceless_diag() {
        let l = law(0.0, 1.0, 0.0, 3.0);
        let s = l.eval(0.0, [0.5, 0.5], Sym2::diag(1.0, -1.0));
        let r2 = 2f64.sqrt();
        assert!((s.xx - r2).abs() < 1e-15 && (s.yy + r2).abs() < 1e-15 && s.xy == 0.0);
    }

    #[test]
    fn regularization_adds_expected_term() {
        let base = law(0.7, 0.4, 0.0, 4.0);
        let reg = base.with_theta(0.1).unwrap();
        let xi = Sym2::diag(1.0, -1.0);
        let x = [0.5, 0.5];
        assert_eq!(base.eval_regularized(0.0, x, xi), base.eval(0.0, x, xi));
        let extra = reg.eval_regularized(0.0, x, xi) - reg.eval(0.0, x, xi);
        // 0.1 * 4 * |xi|^2 * xi with |xi|^2 = 2
        let expect = 0.8 * xi;
        assert!((extra - expect).norm() < 1e-14);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let l = law(1.0, 0.0, 0.0, 2.0);
        assert!(l.eval_matrix(0.0, [0.5, 0.5], [[1.0, 2.0], [0.0, 1.0]]).is_err());
        assert!(l.eval_matrix(0.0, [0.5, 0.5], [[1.0, 2.0], [2.0, 1.0]]).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        let e = Arc::new(ExponentField::constant(Mesh::unit_square(4), 2.0, 1.0));
        assert!(StressLaw::new(-1.0, 1.0, 0.0, e.clone()).is_err());
        assert!(StressLaw::new(1.0, -0.5, 0.0, e.clone()).is_err());
        assert!(StressLaw::new(0.0, 0.0, 0.0, e.clone()).is_err());
        assert!(StressLaw::new(1.0, 0.0, 1.0, e).is_err());
        let low = Arc::new(ExponentField::constant(Mesh::unit_square(4), 1.8, 1.0));
        assert!(StressLaw::new(1.0, 0.0, 0.0, low).is_err());
    }

    #[test]
    fn identical_arguments_give_zero_inner() {
        let l = law(0.3, 1.0, 0.0, 3.0);
        let xi = Sym2::new(1.0, 2.0, 3.0);
        assert_eq!(monotone_inner(&l, 3.0, xi, xi), 0.0);
    }

    #[test]
    fn newtonian_inner_is_quadratic() {
        let l = law(2.0, 0.0, 0.0, 2.0);
        let (a, b) = (Sym2::new(1.0, 0.5, -1.0), Sym2::new(0.2, -0.3, 0.4));
        let inner = monotone_inner(&l, 2.0, a, b);
        assert!((inner - 2.0 * (a - b).norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn pure_power_law_certificate_is_exact() {
        for s in [2.0, 2.5, 3.0, 4.0] {
            let cert = certify_coercive(&law(0.0, 1.0, 0.0, s)).unwrap();
            assert_eq!((cert.c, cert.h_bar, cert.worst_margin), (2.0, 0.0, 0.0), "s = {s}");
        }
    }

    #[test]
    fn newtonian_certificate_is_exact() {
        let cert = certify_coercive(&law(1.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!((cert.c, cert.h_bar), (2.0, 0.0));
        assert!(cert.worst_margin >= 0.0);
    }

    #[test]
    fn newtonian_law_with_growing_exponent_needs_huge_constant() {
        // linear stress cannot dominate |ξ|^s for s > 2; on the bounded sweep
        // this shows up as a constant tied to the sweep range
        let e = Arc::new(ExponentField::sinusoidal(Mesh::unit_square(8), 2.0, 1.0, 1.0));
        let l = StressLaw::new(1.0, 0.0, 0.0, e).unwrap();
        let cert = certify_coercive(&l).unwrap();
        assert!(cert.c >= 2f64.powi(20), "c = {}", cert.c);
    }

    #[test]
    fn regularized_certificate_ratio() {
        let e = Arc::new(ExponentField::sinusoidal(Mesh::unit_square(8), 2.0, 1.0, 1.0));
        let l = StressLaw::new(1.0, 1.0, 0.1, e).unwrap();
        let cert = certify_coercive(&l).unwrap();
        let reg = cert.regularized.clone().unwrap();
        assert!(reg.worst_margin >= 0.0);
        assert_eq!(reg.h_theta / reg.c_theta, (cert.h_bar + 1.0) / cert.c);
    }
}
