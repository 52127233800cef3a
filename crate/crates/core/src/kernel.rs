//! Bilinear (cloud-in-cell) weights shared by particle interpolation and
//! deposition. Using one kernel for both directions makes the particle/grid
//! exchange an exact adjoint pair.

/// How a stencil point outside the sample lattice is folded back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ghost {
    /// Reuse the nearest lattice point with the same weight (mass-preserving).
    Clamp,
    /// Odd reflection: the ghost value is minus the nearest lattice value, so
    /// the interpolant vanishes on the wall half a spacing outside the lattice.
    Odd,
}

/// 1-D linear weights for a lattice `x_k = (k + offset) h`, `k = 0..n`.
#[inline]
pub fn axis_weights(x: f64, h: f64, offset: f64, n: usize, ghost: Ghost) -> [(usize, f64); 2] {
    let f = x / h - offset;
    let k0 = f.floor();
    let a = f - k0;
    let k0 = k0 as i64;
    let fold = |k: i64, w: f64| -> (usize, f64) {
        let last = n as i64 - 1;
        if k < 0 || k > last {
            let kk = k.clamp(0, last) as usize;
            match ghost {
                Ghost::Clamp => (kk, w),
                Ghost::Odd => (kk, -w),
            }
        } else {
            (k as usize, w)
        }
    };
    [fold(k0, 1.0 - a), fold(k0 + 1, a)]
}

/// Tensor-product stencil on a 2-D lattice stored row-major with `nx` columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub idx: [usize; 4],
    pub w: [f64; 4],
}

impl Stencil {
    #[inline]
    pub fn new(wx: [(usize, f64); 2], wy: [(usize, f64); 2], nx: usize) -> Self {
        let mut idx = [0; 4];
        let mut w = [0.0; 4];
        for (b, &(jy, ay)) in wy.iter().enumerate() {
            for (a, &(ix, ax)) in wx.iter().enumerate() {
                idx[2 * b + a] = jy * nx + ix;
                w[2 * b + a] = ax * ay;
            }
        }
        Self { idx, w }
    }

    #[inline]
    pub fn gather(&self, data: &[f64]) -> f64 {
        self.idx.iter().zip(&self.w).map(|(&k, &w)| w * data[k]).sum()
    }

    #[inline]
    pub fn scatter(&self, data: &mut [f64], value: f64) {
        for (&k, &w) in self.idx.iter().zip(&self.w) {
            data[k] += w * value;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamp_weights_sum_to_one() {
        for x in [0.01, 0.2, 0.5, 0.77, 0.99] {
            let w = axis_weights(x, 0.25, 0.5, 4, Ghost::Clamp);
            assert!((w[0].1 + w[1].1 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_ghost_vanishes_at_wall() {
        // lattice at y = 0.125, 0.375, ...; interpolant of a constant is zero at y = 0
        let w = axis_weights(0.0, 0.25, 0.5, 4, Ghost::Odd);
        assert_eq!(w[0].0, w[1].0);
        assert!((w[0].1 + w[1].1).abs() < 1e-15);
    }

    #[test]
    fn lattice_point_is_delta() {
        let w = axis_weights(0.375, 0.25, 0.5, 4, Ghost::Clamp);
        assert_eq!(w[0], (1, 1.0));
        assert_eq!(w[1].1, 0.0);
    }
}
