//! Locating the zeros of the inverse propagator inside a search window.
//!
//! Seeds on a rectangular grid are refined by damped Newton iteration. The
//! resulting set is then certified against the argument principle: any
//! rectangle whose winding number disagrees with the number of certified
//! zeros inside it is searched locally and, if still inconsistent, bisected.

use std::f64::consts::PI;

use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;

use super::contour::{log_derivative_moments, QuadratureOptions, Rect};
use super::propagator::{coincident_poles, eval_with_deriv, SymmetrySector};
use super::residues::ModeExpansion;
use crate::error::{Error, Result};
use crate::params::SystemParams;

const MAX_NEWTON_ITERS: usize = 100;
const MAX_BISECTION_DEPTH: u32 = 40;
const MIN_GRID: usize = 8;

/// Pole residual below which a Newton limit is accepted, relative to `1 + |s|^2`.
pub const TOL_RESIDUAL: f64 = 1e-9;

/// Rectangle `|Re s| < re_max`, `|Im s| < im_max` plus the Newton seed grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchWindow {
    pub re_max: f64,
    pub im_max: f64,
    pub grid_re: usize,
    pub grid_im: usize,
}

/// Named windows from the two separation regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowPreset {
    /// `|Re s| < 200 gamma22`, `|Im s| < 200 omega23`
    Markovian,
    /// `|Re s| < 10 gamma22`, `|Im s| < 10 omega23`
    NonMarkovian,
}

impl std::str::FromStr for WindowPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markovian" => Ok(WindowPreset::Markovian),
            "nonmarkovian" => Ok(WindowPreset::NonMarkovian),
            other => Err(Error::InvalidWindow(format!("unknown window preset '{other}'"))),
        }
    }
}

impl SearchWindow {
    /// Window with a seed grid sized for the delay of `params`: at least four
    /// seeds per expected pole spacing `2 pi v / d` along the imaginary axis.
    pub fn new(re_max: f64, im_max: f64, params: &SystemParams) -> Self {
        let delay = params.delay();
        let grid_im = if delay > 0.0 {
            let spacing = 2.0 * PI / delay;
            (8.0 * im_max / spacing).ceil().min(1e6) as usize
        } else {
            0
        };
        Self { re_max, im_max, grid_re: 16, grid_im: grid_im.max(4 * MIN_GRID) }
    }

    pub fn preset(preset: WindowPreset, params: &SystemParams) -> Self {
        let w = params.omega23.abs();
        match preset {
            WindowPreset::Markovian => Self::new(200.0 * params.gamma22, 200.0 * w, params),
            WindowPreset::NonMarkovian => Self::new(10.0 * params.gamma22, 10.0 * w, params),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.re_max > 0.0 && self.im_max > 0.0 && self.re_max.is_finite() && self.im_max.is_finite()) {
            return Err(Error::InvalidWindow(format!(
                "bounds must be positive, got re_max={} im_max={}",
                self.re_max, self.im_max
            )));
        }
        if self.grid_re < MIN_GRID || self.grid_im < MIN_GRID {
            return Err(Error::InvalidWindow(format!(
                "seed grid must be at least {MIN_GRID} x {MIN_GRID}, got {} x {}",
                self.grid_re, self.grid_im
            )));
        }
        Ok(())
    }

    pub fn rect(&self) -> Rect {
        Rect::new(-self.re_max, self.re_max, -self.im_max, self.im_max)
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re.abs() < self.re_max && s.im.abs() < self.im_max
    }
}

fn quadrature_options(params: &SystemParams, rect: &Rect) -> QuadratureOptions {
    let delay = params.delay();
    let side = rect.width().max(rect.height());
    let mut max_piece = side / 4.0;
    if delay > 0.0 {
        max_piece = max_piece.min(PI / (4.0 * delay));
    }
    QuadratureOptions { max_piece, ..QuadratureOptions::default() }
}

fn winding_in(params: &SystemParams, sector: SymmetrySector, rect: &Rect) -> Result<(i64, Complex64)> {
    let opts = quadrature_options(params, rect);
    let m = log_derivative_moments(rect, |s| eval_with_deriv(s, params, sector), &opts)?;
    match m.winding() {
        Some(n) => Ok((n, m.sum)),
        None => Err(Error::BoundaryPole { near: rect.center() }),
    }
}

/// Number of zeros of the inverse propagator inside an arbitrary rectangle.
pub fn count_poles_in(params: &SystemParams, sector: SymmetrySector, rect: &Rect) -> Result<i64> {
    params.validate()?;
    winding_in(params, sector, rect).map(|(n, _)| n)
}

/// Winding number of the inverse propagator around the window boundary.
pub fn count_poles(params: &SystemParams, sector: SymmetrySector, window: &SearchWindow) -> Result<i64> {
    window.validate()?;
    count_poles_in(params, sector, &window.rect())
}

fn is_certified(s: Complex64, value: Complex64) -> bool {
    value.norm() < TOL_RESIDUAL * (1.0 + s.norm_sqr())
}

/// Damped Newton iteration on the inverse propagator.
pub fn newton_refine(seed: Complex64, params: &SystemParams, sector: SymmetrySector) -> Result<Complex64> {
    let mut s = seed;
    let (mut v, mut dv) = eval_with_deriv(s, params, sector);
    for _ in 0..MAX_NEWTON_ITERS {
        let step = v / dv;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        let mut lambda = 1.0;
        let (mut trial, mut tv, mut tdv);
        loop {
            trial = s - step * lambda;
            (tv, tdv) = eval_with_deriv(trial, params, sector);
            let finite = tv.re.is_finite() && tv.im.is_finite();
            if (finite && tv.norm() < v.norm()) || lambda < 1e-3 {
                break;
            }
            lambda *= 0.5;
        }
        s = trial;
        v = tv;
        dv = tdv;
        if !(s.re.is_finite() && s.im.is_finite()) {
            break;
        }
        if (step * lambda).norm() <= 1e-14 * s.norm().max(1.0) || v.norm() == 0.0 {
            if is_certified(s, v) {
                return Ok(s);
            }
            break;
        }
    }
    if s.re.is_finite() && s.im.is_finite() && is_certified(s, v) {
        return Ok(s);
    }
    Err(Error::NonConvergence { seed, iters: MAX_NEWTON_ITERS })
}

fn dedupe_radius(s: Complex64) -> f64 {
    1e-6 * s.norm().max(1.0)
}

fn insert_unique(poles: &mut Vec<Complex64>, s: Complex64) -> bool {
    if poles.iter().any(|p| (p - s).norm() < dedupe_radius(s)) {
        return false;
    }
    poles.push(s);
    true
}

fn refine_seeds(seeds: &[Complex64], params: &SystemParams, sector: SymmetrySector, rect: &Rect) -> Vec<Complex64> {
    let found: Vec<Complex64> = seeds
        .par_iter()
        .filter_map(|&seed| match newton_refine(seed, params, sector) {
            Ok(s) if rect.contains(s) => Some(s),
            Ok(_) => None,
            Err(e) => {
                debug!("discarding seed: {e}");
                None
            }
        })
        .collect();
    let mut unique = Vec::new();
    for s in found {
        insert_unique(&mut unique, s);
    }
    unique
}

fn grid_seeds(rect: &Rect, n_re: usize, n_im: usize) -> Vec<Complex64> {
    let mut seeds = Vec::with_capacity(n_re * n_im);
    for i in 0..n_im {
        let im = rect.im_min + (i as f64 + 0.5) * rect.height() / n_im as f64;
        for j in 0..n_re {
            let re = rect.re_min + (j as f64 + 0.5) * rect.width() / n_re as f64;
            seeds.push(Complex64::new(re, im));
        }
    }
    seeds
}

struct Certifier<'a> {
    params: &'a SystemParams,
    sector: SymmetrySector,
    window: Rect,
}

impl Certifier<'_> {
    fn inside(&self, poles: &[Complex64], rect: &Rect) -> usize {
        poles.iter().filter(|&&s| rect.contains(s)).count()
    }

    fn local_search(&self, rect: &Rect, sum: Complex64, expected: i64, poles: &mut Vec<Complex64>) {
        let mut seeds = grid_seeds(rect, 6, 6);
        if expected == 1 {
            seeds.insert(0, sum);
        }
        for s in refine_seeds(&seeds, self.params, self.sector, &self.window) {
            insert_unique(poles, s);
        }
    }

    fn split_counts(&self, rect: &Rect, poles: &[Complex64]) -> Result<(Rect, i64, Complex64, Rect, i64, Complex64)> {
        let mut last_err = None;
        for frac in [0.5, 0.4375, 0.5625, 0.375, 0.625, 0.3125, 0.6875] {
            let (a, b) = rect.split(frac);
            let scale = rect.width().max(rect.height());
            let near_cut = poles
                .iter()
                .any(|&s| rect.contains(s) && (a.margin(s).abs() < 1e-6 * scale || b.margin(s).abs() < 1e-6 * scale));
            if near_cut {
                continue;
            }
            match (winding_in(self.params, self.sector, &a), winding_in(self.params, self.sector, &b)) {
                (Ok((na, sa)), Ok((nb, sb))) => return Ok((a, na, sa, b, nb, sb)),
                (Err(e), _) | (_, Err(e)) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or(Error::BoundaryPole { near: rect.center() }))
    }

    fn reconcile(&self, rect: &Rect, count: i64, sum: Complex64, poles: &mut Vec<Complex64>, depth: u32) -> Result<()> {
        let inside = self.inside(poles, rect);
        if inside as i64 == count {
            return Ok(());
        }
        if (inside as i64) < count {
            self.local_search(rect, sum, count, poles);
            if self.inside(poles, rect) as i64 == count {
                return Ok(());
            }
        }
        if depth >= MAX_BISECTION_DEPTH {
            return Err(Error::CountMismatch { certified: self.inside(poles, rect), winding: count });
        }
        let (a, na, sa, b, nb, sb) = self.split_counts(rect, poles)?;
        if na + nb != count {
            debug!("split of {rect:?} gave {na} + {nb}, expected {count}");
        }
        self.reconcile(&a, na, sa, poles, depth + 1)?;
        self.reconcile(&b, nb, sb, poles, depth + 1)
    }
}

// Small nudges first; larger steps clear pole chains that run parallel to an edge.
const SHRINK: [f64; 8] = [0.0, 1e-4, 2e-4, 3e-4, 1e-2, 2e-2, 3e-2, 5e-2];

fn shrink(window: &SearchWindow, attempt: usize) -> SearchWindow {
    let f = 1.0 - SHRINK[attempt];
    SearchWindow { re_max: window.re_max * f, im_max: window.im_max * f, ..*window }
}

/// Certified zeros of the inverse propagator inside `window`, ordered by
/// imaginary part. Residue coefficients are left empty; see
/// [`super::residues`].
pub fn find_poles(params: &SystemParams, sector: SymmetrySector, window: &SearchWindow) -> Result<ModeExpansion> {
    params.validate()?;
    window.validate()?;

    if params.delay() == 0.0 {
        let poles: Vec<Complex64> =
            coincident_poles(params, sector).into_iter().filter(|&s| window.contains(s)).collect();
        let winding = poles.len() as i64;
        return Ok(ModeExpansion::from_poles(params, sector, *window, poles, winding));
    }

    let mut last_err = None;
    for attempt in 0..SHRINK.len() {
        let win = shrink(window, attempt);
        let rect = win.rect();
        let seeds = grid_seeds(&rect, win.grid_re, win.grid_im);
        let mut poles = refine_seeds(&seeds, params, sector, &rect);

        // keep every certified pole well clear of the contour
        let scale = win.re_max.max(win.im_max);
        if let Some(&s) = poles.iter().find(|&&s| rect.margin(s) < 1e-6 * scale) {
            debug!("pole {s} on the edge of {rect:?}, shrinking");
            last_err = Some(Error::BoundaryPole { near: s });
            continue;
        }

        if attempt > 0 {
            warn!("search window shrunk to {} x {}", win.re_max, win.im_max);
        }
        let (winding, sum) = match winding_in(params, sector, &rect) {
            Ok(v) => v,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let certifier = Certifier { params, sector, window: rect };
        certifier.reconcile(&rect, winding, sum, &mut poles, 0)?;
        if poles.len() as i64 != winding {
            return Err(Error::CountMismatch { certified: poles.len(), winding });
        }
        return Ok(ModeExpansion::from_poles(params, sector, win, poles, winding));
    }
    Err(last_err.unwrap_or(Error::BoundaryPole { near: Complex64::new(0.0, 0.0) }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{canonical_paper_params, derive_scales};
    use crate::spectral::inverse_propagator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn near_zero() -> SystemParams {
        canonical_paper_params().with_distance(1e-9).with_lattice_phase()
    }

    #[test]
    fn coincident_symmetric_poles() {
        let p = near_zero();
        let w = SearchWindow::new(5.0, 100.0, &p);
        let exp = find_poles(&p, SymmetrySector::Symmetric, &w).unwrap();
        assert_eq!(exp.modes.len(), 2);
        // -(g22+g33)/2 + i(w23 +- delta)/2, delta = sqrt(w23^2 - (g22+g33)^2 - 2i w23 (g22-g33))
        let delta = c(2500.0 - 4.0, 0.0).sqrt();
        let expected = [c(-1.0, (50.0 - delta.re) / 2.0), c(-1.0, (50.0 + delta.re) / 2.0)];
        for (m, e) in exp.modes.iter().zip(expected) {
            assert!((m.s - e).norm() < 1e-6, "{} vs {}", m.s, e);
        }
    }

    #[test]
    fn coincident_antisymmetric_poles() {
        let p = near_zero();
        let w = SearchWindow::new(5.0, 100.0, &p);
        let exp = find_poles(&p, SymmetrySector::Antisymmetric, &w).unwrap();
        assert_eq!(exp.modes.len(), 2);
        assert!(exp.modes[0].s.norm() < 1e-6);
        assert!((exp.modes[1].s - c(0.0, 50.0)).norm() < 1e-6);
        assert_eq!(count_poles(&p, SymmetrySector::Antisymmetric, &w).unwrap(), 2);
    }

    #[test]
    fn exact_zero_distance_uses_closed_form() {
        let p = canonical_paper_params();
        let w = SearchWindow::new(5.0, 100.0, &p);
        let exp = find_poles(&p, SymmetrySector::Antisymmetric, &w).unwrap();
        assert_eq!(exp.modes.len(), 2);
        assert_eq!(exp.modes[0].s, c(0.0, 0.0));
    }

    #[test]
    fn right_half_plane_is_empty() {
        let p = canonical_paper_params().with_distance(derive_scales(&canonical_paper_params()).lambda_beat);
        let rect = Rect::new(10.0, 30.0, -100.0, 100.0);
        for sector in [SymmetrySector::Symmetric, SymmetrySector::Antisymmetric] {
            assert_eq!(count_poles_in(&p, sector, &rect).unwrap(), 0);
        }
    }

    #[test]
    fn one_beat_wavelength_markovian() {
        let base = canonical_paper_params();
        let p = base.with_distance(derive_scales(&base).lambda_beat);
        let w = SearchWindow::preset(WindowPreset::Markovian, &p);
        let exp = find_poles(&p, SymmetrySector::Symmetric, &w).unwrap();
        assert_eq!(exp.modes.len() as i64, exp.winding);
        assert_eq!(count_poles(&p, SymmetrySector::Symmetric, &exp.window).unwrap(), exp.winding);
        for m in &exp.modes {
            assert!(m.s.re <= 1e-7);
            let f = inverse_propagator(m.s, &p, SymmetrySector::Symmetric);
            assert!(f.norm() < TOL_RESIDUAL * (1.0 + m.s.norm_sqr()));
        }
        // dominant collective modes near Im s = 0 and omega23, decaying near 2 gamma22 at most
        let slowest: Vec<_> = exp.modes.iter().filter(|m| m.s.re > -3.0).collect();
        assert_eq!(slowest.len(), 2);
        assert!(slowest.iter().any(|m| m.s.im.abs() < 5.0));
        assert!(slowest.iter().any(|m| (m.s.im - 50.0).abs() < 5.0));
        for pair in exp.modes.windows(2) {
            assert!(pair[0].s.im <= pair[1].s.im);
            assert!((pair[0].s - pair[1].s).norm() > 1e-6);
        }
    }

    #[test]
    fn newton_rejects_garbage() {
        let p = canonical_paper_params().with_distance(0.5);
        let r = newton_refine(c(f64::NAN, 0.0), &p, SymmetrySector::Symmetric);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn window_validation() {
        let p = canonical_paper_params();
        let mut w = SearchWindow::new(1.0, 1.0, &p);
        assert!(w.validate().is_ok());
        w.grid_re = 2;
        assert!(w.validate().is_err());
        w = SearchWindow::new(-1.0, 1.0, &p);
        assert!(w.validate().is_err());
    }
}
