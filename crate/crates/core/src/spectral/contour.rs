//! Argument-principle integrals over axis-aligned rectangles.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Self { re_min, re_max, im_min, im_max }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    /// Distance from an interior point to the nearest edge (negative outside).
    pub fn margin(&self, s: Complex64) -> f64 {
        (s.re - self.re_min).min(self.re_max - s.re).min(s.im - self.im_min).min(self.im_max - s.im)
    }

    /// Split across the longer side at fraction `frac` of its length.
    pub fn split(&self, frac: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let cut = self.re_min + frac * self.width();
            (Rect { re_max: cut, ..*self }, Rect { re_min: cut, ..*self })
        } else {
            let cut = self.im_min + frac * self.height();
            (Rect { im_max: cut, ..*self }, Rect { im_min: cut, ..*self })
        }
    }

    fn corners_ccw(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

/// `(1/2 pi i)` times the contour integrals of `f'/f` and `s f'/f`: the
/// number of enclosed zeros and the sum of their positions.
#[derive(Debug, Clone, Copy)]
pub struct ContourMoments {
    pub count: f64,
    pub sum: Complex64,
}

impl ContourMoments {
    /// Nearest integer, if within 0.25 of it.
    pub fn winding(&self) -> Option<i64> {
        let n = self.count.round();
        ((self.count - n).abs() < 0.25).then_some(n as i64)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the zeroth moment integral.
    pub tol: f64,
    /// Upper bound on the length of the initial pieces of each edge.
    pub max_piece: f64,
    pub max_depth: u32,
    /// Total budget of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_piece: f64::INFINITY, max_depth: 40, max_evals: 4_000_000 }
    }
}

type Sample = (Complex64, Complex64);

struct Segment {
    a: Complex64,
    b: Complex64,
    fa: Sample,
    fm: Sample,
    fb: Sample,
    whole: Sample,
    tol: f64,
    depth: u32,
}

fn log_deriv<F>(f: &F, s: Complex64) -> Result<Sample>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let (v, dv) = f(s);
    let h = dv / v;
    if !h.re.is_finite() || !h.im.is_finite() {
        return Err(Error::BoundaryPole { near: s });
    }
    Ok((h, h * s))
}

fn simpson(fa: Sample, fm: Sample, fb: Sample, len: Complex64) -> Sample {
    let w = len / 6.0;
    ((fa.0 + fm.0 * 4.0 + fb.0) * w, (fa.1 + fm.1 * 4.0 + fb.1) * w)
}

/// Adaptive Simpson quadrature of the logarithmic derivative around `rect`
/// (counter-clockwise). `f` returns the function value and its derivative.
pub fn log_derivative_moments<F>(rect: &Rect, f: F, opts: &QuadratureOptions) -> Result<ContourMoments>
where
    F: Fn(Complex64) -> (Complex64, Complex64),
{
    let corners = rect.corners_ccw();
    let mut pieces = Vec::new();
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        let n = ((b - a).norm() / opts.max_piece).ceil().max(4.0) as usize;
        for i in 0..n {
            let za = a + (b - a) * (i as f64 / n as f64);
            let zb = a + (b - a) * ((i + 1) as f64 / n as f64);
            pieces.push((za, zb));
        }
    }
    let per_piece_tol = opts.tol / pieces.len() as f64;

    let mut total = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut stack: Vec<Segment> = Vec::new();
    let mut evals = 0usize;
    for (a, b) in pieces {
        let fa = log_deriv(&f, a)?;
        let fb = log_deriv(&f, b)?;
        let fm = log_deriv(&f, (a + b) * 0.5)?;
        let whole = simpson(fa, fm, fb, b - a);
        stack.push(Segment { a, b, fa, fm, fb, whole, tol: per_piece_tol, depth: 0 });
        while let Some(seg) = stack.pop() {
            evals += 2;
            let m = (seg.a + seg.b) * 0.5;
            let lm = log_deriv(&f, (seg.a + m) * 0.5)?;
            let rm = log_deriv(&f, (m + seg.b) * 0.5)?;
            let left = simpson(seg.fa, lm, seg.fm, m - seg.a);
            let right = simpson(seg.fm, rm, seg.fb, seg.b - m);
            let err = (left.0 + right.0 - seg.whole.0).norm();
            // relative floor guards against rounding noise in the integrand
            let floor = 1e-13 * (left.0.norm() + right.0.norm());
            if err <= 15.0 * seg.tol.max(floor) {
                // Richardson correction
                total.0 += left.0 + right.0 + (left.0 + right.0 - seg.whole.0) / 15.0;
                total.1 += left.1 + right.1 + (left.1 + right.1 - seg.whole.1) / 15.0;
            } else if seg.depth >= opts.max_depth || evals >= opts.max_evals {
                return Err(Error::BoundaryPole { near: m });
            } else {
                let tol = seg.tol / 2.0;
                let depth = seg.depth + 1;
                stack.push(Segment { a: seg.a, b: m, fa: seg.fa, fm: lm, fb: seg.fm, whole: left, tol, depth });
                stack.push(Segment { a: m, b: seg.b, fa: seg.fm, fm: rm, fb: seg.fb, whole: right, tol, depth });
            }
        }
    }
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let count = total.0 / two_pi_i;
    Ok(ContourMoments { count: count.re, sum: total.1 / two_pi_i })
}
