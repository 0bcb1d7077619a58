use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::poles::SearchWindow;
use super::propagator::{eval_with_deriv, feedback, level2_numerator, SymmetrySector};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Expansion coefficients of one pole. `alpha`/`beta` multiply `e^{s t}`;
/// the barred versions are shifted by `e^{s d/v}` and multiply `e^{s (t - d/v)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residue {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub alpha_bar: Complex64,
    pub beta_bar: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub s: Complex64,
    pub residue: Option<Residue>,
}

impl Mode {
    pub fn unresolved(s: Complex64) -> Self {
        Self { s, residue: None }
    }
}

/// Poles of one symmetry sector inside a search window, with optional residues.
#[derive(Debug, Clone)]
pub struct ModeExpansion {
    pub params: SystemParams,
    pub sector: SymmetrySector,
    /// Window actually used; may be marginally shrunk from the requested one
    /// to keep poles off the contour.
    pub window: SearchWindow,
    pub modes: Vec<Mode>,
    /// Argument-principle count around `window`.
    pub winding: i64,
}

impl ModeExpansion {
    pub(crate) fn from_poles(
        params: &SystemParams,
        sector: SymmetrySector,
        window: SearchWindow,
        mut poles: Vec<Complex64>,
        winding: i64,
    ) -> Self {
        poles.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        Self { params: *params, sector, window, modes: poles.into_iter().map(Mode::unresolved).collect(), winding }
    }

    pub fn is_complete(&self) -> bool {
        self.modes.iter().all(|m| m.residue.is_some())
    }

    pub fn poles(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.modes.iter().map(|m| m.s)
    }

    fn resolved(&self) -> Result<impl Iterator<Item = (Complex64, Residue)> + '_> {
        if !self.is_complete() {
            return Err(Error::IncompleteExpansion);
        }
        Ok(self.modes.iter().map(|m| (m.s, m.residue.unwrap())))
    }

    /// `(sum alpha, sum beta)` over the retained modes.
    pub fn residue_sums(&self) -> Result<(Complex64, Complex64)> {
        Ok(self
            .resolved()?
            .fold((Complex64::default(), Complex64::default()), |acc, (_, r)| (acc.0 + r.alpha, acc.1 + r.beta)))
    }

    /// `(sum alpha_bar, sum beta_bar)`: the truncated series evaluated at
    /// `t = d/v`.
    pub fn shifted_sums(&self) -> Result<(Complex64, Complex64)> {
        Ok(self.resolved()?.fold((Complex64::default(), Complex64::default()), |acc, (_, r)| {
            (acc.0 + r.alpha_bar, acc.1 + r.beta_bar)
        }))
    }

    /// `max(|sum alpha - 1/sqrt 2|, |sum beta|)`.
    pub fn residue_sum_defect(&self) -> Result<f64> {
        let (a, b) = self.residue_sums()?;
        Ok((a - FRAC_1_SQRT_2).norm().max(b.norm()))
    }

    /// Level-2 amplitude of emitter A from the mode sum at one argument
    /// `t' = t - d/v > 0`, using the shifted coefficients.
    pub fn level2_at(&self, t_shifted: f64) -> Result<Complex64> {
        Ok(self.resolved()?.map(|(s, r)| r.alpha_bar * (s * t_shifted).exp()).sum())
    }

    /// `sum beta_bar e^{(s - i omega23) t'}` at `t' = t - d/v`. This equals the
    /// level-3 amplitude of emitter A times `e^{i omega23 d/v}`: the unshifted
    /// series `sum beta e^{(s - i omega23) t}` fixes that relative phase.
    pub fn level3_at(&self, t_shifted: f64) -> Result<Complex64> {
        let iw = Complex64::new(0.0, self.params.omega23);
        Ok(self.resolved()?.map(|(s, r)| r.beta_bar * ((s - iw) * t_shifted).exp()).sum())
    }
}

/// Residue threshold on `|dG^{-1}/ds|` below which a pole counts as
/// non-simple.
pub const TOL_DERIV: f64 = 1e-10;

/// Fill in expansion coefficients for every pole.
pub fn residues(expansion: &ModeExpansion) -> Result<ModeExpansion> {
    let p = &expansion.params;
    let sector = expansion.sector;
    let delay = p.delay();
    let mut out = expansion.clone();
    for mode in &mut out.modes {
        let s = mode.s;
        let (_, df) = eval_with_deriv(s, p, sector);
        let deriv_norm = df.norm();
        if deriv_norm.is_nan() || deriv_norm <= TOL_DERIV * (1.0 + s.norm()) {
            return Err(Error::DegeneratePole { s, deriv_norm });
        }
        let one_e = feedback(s, p, sector) + 1.0;
        let alpha = level2_numerator(s, p, sector) / df * FRAC_1_SQRT_2;
        let beta = -(one_e * (p.gamma32 / 2.0)) / df * FRAC_1_SQRT_2;
        let shift = (s * delay).exp();
        mode.residue = Some(Residue { alpha, beta, alpha_bar: alpha * shift, beta_bar: beta * shift });
    }
    Ok(out)
}

/// Locate and resolve all poles of one sector.
pub fn solve_sector(params: &SystemParams, sector: SymmetrySector, window: &SearchWindow) -> Result<ModeExpansion> {
    let expansion = super::poles::find_poles(params, sector, window)?;
    residues(&expansion)
}
