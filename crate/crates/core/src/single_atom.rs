//! Exact dynamics of one isolated three-level emitter.
//!
//! With `w = e^{i omega23 t} c3` the equations of motion become the constant
//! linear system `d/dt (c2, w) = M (c2, w)`,
//! `M = [[-g22/2, -g23/2], [-g32/2, i w23 - g33/2]]`, solved by the 2x2
//! spectral projector formula.

use num_complex::Complex64;

use crate::params::SystemParams;

#[derive(Debug, Clone, Copy)]
pub struct SingleAtom {
    m: [[Complex64; 2]; 2],
    lambda: [Complex64; 2],
    omega23: f64,
}

impl SingleAtom {
    pub fn new(params: &SystemParams) -> Self {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m = [
            [c(-params.gamma22 / 2.0, 0.0), c(-params.gamma23 / 2.0, 0.0)],
            [c(-params.gamma32 / 2.0, 0.0), c(-params.gamma33 / 2.0, params.omega23)],
        ];
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr - det * 4.0).sqrt();
        let l1 = (tr + disc) / 2.0;
        let l2 = (tr - disc) / 2.0;
        Self { m, lambda: [l1, l2], omega23: params.omega23 }
    }

    /// Eigenvalues of the rotating-frame generator (the single-atom poles).
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        self.lambda
    }

    /// `exp(M t)` applied to `(c2(0), c3(0))`; returns `(c2(t), c3(t))` with
    /// `c3` in the interaction picture.
    pub fn evolve(&self, c2: Complex64, c3: Complex64, t: f64) -> (Complex64, Complex64) {
        let [l1, l2] = self.lambda;
        let m = &self.m;
        let diff = l1 - l2;
        let (p, q) = (m[0][0] * c2 + m[0][1] * c3, m[1][0] * c2 + m[1][1] * c3);
        let (x, y) = if diff.norm() > 1e-8 * (l1.norm() + l2.norm()).max(1.0) {
            let e1 = (l1 * t).exp();
            let e2 = (l2 * t).exp();
            // e1 (M - l2)/(l1 - l2) + e2 (M - l1)/(l2 - l1)
            let a = (e1 - e2) / diff;
            let b = (e2 * l1 - e1 * l2) / diff;
            (a * p + b * c2, a * q + b * c3)
        } else {
            // defective limit: e^{l t} (I + (M - l) t)
            let l = (l1 + l2) / 2.0;
            let e = (l * t).exp();
            (e * (c2 + (p - l * c2) * t), e * (c3 + (q - l * c3) * t))
        };
        (x, y * Complex64::new(0.0, -self.omega23 * t).exp())
    }
}
