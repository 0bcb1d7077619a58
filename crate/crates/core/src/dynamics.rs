//! Atomic excitation amplitudes: mode-sum reconstruction, coincident-emitter
//! closed forms, and composition of general initial states.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::{InitialState, SystemParams};
use crate::single_atom::SingleAtom;
use crate::spectral::{ModeExpansion, SymmetrySector};

/// Default sampling step, 2000 samples per `1/gamma22`.
pub const DEFAULT_DT: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ModeSum,
    Dde,
    ClosedForm,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::ModeSum => "mode_sum",
            Provenance::Dde => "dde",
            Provenance::ClosedForm => "closed_form",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Amplitudes `c_{m,j}(t)` of both emitters on a uniform grid. Level-3
/// amplitudes are in the interaction picture.
#[derive(Debug, Clone)]
pub struct AmplitudeTrace {
    pub times: Vec<f64>,
    pub ca2: Vec<Complex64>,
    pub ca3: Vec<Complex64>,
    pub cb2: Vec<Complex64>,
    pub cb3: Vec<Complex64>,
    pub provenance: Provenance,
    /// `max(|sum alpha - 1/sqrt 2|, |sum beta|)` for mode-sum traces.
    pub residue_sum_defect: Option<f64>,
    /// Mismatch between the truncated series at `t = d/v` and the exact
    /// pre-transit amplitudes, for mode-sum traces.
    pub transit_defect: Option<f64>,
}

impl AmplitudeTrace {
    pub fn zeros(times: Vec<f64>, provenance: Provenance) -> Self {
        let n = times.len();
        let z = vec![Complex64::default(); n];
        Self {
            times,
            ca2: z.clone(),
            ca3: z.clone(),
            cb2: z.clone(),
            cb3: z,
            provenance,
            residue_sum_defect: None,
            transit_defect: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing, or 0 for fewer than two samples.
    pub fn dt(&self) -> f64 {
        if self.times.len() < 2 {
            0.0
        } else {
            self.times[1] - self.times[0]
        }
    }

    /// `(cA2, cA3, cB2, cB3)` at sample `i`.
    pub fn state(&self, i: usize) -> [Complex64; 4] {
        [self.ca2[i], self.ca3[i], self.cb2[i], self.cb3[i]]
    }

    pub fn set_state(&mut self, i: usize, c: [Complex64; 4]) {
        self.ca2[i] = c[0];
        self.ca3[i] = c[1];
        self.cb2[i] = c[2];
        self.cb3[i] = c[3];
    }

    /// `(pop2A, pop3A, pop2B, pop3B)` at sample `i`.
    pub fn populations(&self, i: usize) -> [f64; 4] {
        self.state(i).map(|c| c.norm_sqr())
    }

    pub fn total_population(&self, i: usize) -> f64 {
        self.populations(i).iter().sum()
    }

    pub fn same_grid(&self, other: &AmplitudeTrace) -> bool {
        self.times.len() == other.times.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }

    /// Largest per-component deviation `|c - c'|` over samples with
    /// `t_min < t <= t_max`.
    pub fn max_deviation(&self, other: &AmplitudeTrace, t_min: f64, t_max: f64) -> Result<f64> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch(format!("{} vs {} samples", self.times.len(), other.times.len())));
        }
        Ok(self
            .deviation(other)
            .into_iter()
            .zip(&self.times)
            .filter(|(_, &t)| t > t_min && t <= t_max)
            .map(|(d, _)| d)
            .fold(0.0, f64::max))
    }

    /// Per-sample maximum component deviation. Grids must match.
    pub fn deviation(&self, other: &AmplitudeTrace) -> Vec<f64> {
        (0..self.len().min(other.len()))
            .map(|i| {
                let a = self.state(i);
                let b = other.state(i);
                (0..4).map(|k| (a[k] - b[k]).norm()).fold(0.0, f64::max)
            })
            .collect()
    }

    /// Exchange the level-2 and level-3 columns, undoing a run performed with
    /// [`SystemParams::level3_substitution`].
    pub fn swap_levels(mut self) -> Self {
        std::mem::swap(&mut self.ca2, &mut self.ca3);
        std::mem::swap(&mut self.cb2, &mut self.cb3);
        self
    }
}

/// Uniform grid `0, dt, ..., >= t_max` whose spacing divides `d/v` exactly,
/// so that the transit time is itself a sample.
pub fn time_grid(params: &SystemParams, t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite() && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParams(format!("bad time grid: dt={dt}, t_max={t_max}")));
    }
    let step = commensurate_step(params.delay(), dt);
    let n = (t_max / step - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=n).map(|i| i as f64 * step).collect())
}

/// Largest step not exceeding `dt` by more than rounding that divides
/// `delay` into an integer number of pieces.
pub(crate) fn commensurate_step(delay: f64, dt: f64) -> f64 {
    if delay <= 0.0 || delay < 0.5 * dt {
        return dt;
    }
    let m = (delay / dt).round().max(1.0);
    delay / m
}

fn transit_index(times: &[f64], delay: f64) -> Option<usize> {
    let dt = if times.len() > 1 { times[1] - times[0] } else { return None };
    let k = (delay / dt).round() as usize;
    (k < times.len() && (times[k] - delay).abs() <= 1e-9 * delay.max(1.0)).then_some(k)
}

/// Amplitudes of both emitters for a sector-pure initial state.
///
/// For `t > d/v` the shifted residue series is summed; up to and including
/// `t = d/v` each emitter evolves exactly as an isolated atom.
pub fn amplitudes_from_modes(expansion: &ModeExpansion, times: &[f64]) -> Result<AmplitudeTrace> {
    if !expansion.is_complete() {
        return Err(Error::IncompleteExpansion);
    }
    let p = &expansion.params;
    let delay = p.delay();
    let sign = expansion.sector.sign();
    let atom = SingleAtom::new(p);
    let k0 = Complex64::new(FRAC_1_SQRT_2, 0.0);
    // shifted level-3 series carries e^{-i omega23 d/v} relative to the level-2 one
    let lag = Complex64::new(0.0, -p.omega23 * delay).exp();

    let values: Vec<(Complex64, Complex64)> = times
        .par_iter()
        .map(|&t| {
            if t <= delay {
                Ok(atom.evolve(k0, Complex64::default(), t))
            } else {
                let tp = t - delay;
                Ok((expansion.level2_at(tp)?, expansion.level3_at(tp)? * lag))
            }
        })
        .collect::<Result<_>>()?;

    let mut trace = AmplitudeTrace::zeros(times.to_vec(), Provenance::ModeSum);
    for (i, (c2, c3)) in values.into_iter().enumerate() {
        trace.set_state(i, [c2, c3, c2 * sign, c3 * sign]);
    }
    trace.residue_sum_defect = Some(expansion.residue_sum_defect()?);
    if delay > 0.0 {
        let (exact2, exact3) = atom.evolve(k0, Complex64::default(), delay);
        let (s2, s3) = expansion.shifted_sums()?;
        trace.transit_defect = Some((s2 - exact2).norm().max((s3 * lag - exact3).norm()));
    }
    Ok(trace)
}

/// Zero-separation amplitudes in the well-separated-level approximation.
pub fn closed_form_coincident(params: &SystemParams, sector: SymmetrySector, times: &[f64]) -> AmplitudeTrace {
    let mut trace = AmplitudeTrace::zeros(times.to_vec(), Provenance::ClosedForm);
    let k = FRAC_1_SQRT_2;
    let w = params.omega23;
    let ratio = params.gamma32 * params.gamma23 / (w * w);
    let sign = sector.sign();
    for (i, &t) in times.iter().enumerate() {
        let (c2, c3) = match sector {
            SymmetrySector::Antisymmetric => (Complex64::new(k, 0.0), Complex64::default()),
            SymmetrySector::Symmetric => {
                let d2 = (-params.gamma22 * t).exp();
                let d3 = (-params.gamma33 * t).exp();
                let c2 = (Complex64::new(d2, 0.0) - Complex64::from_polar(ratio * d3, w * t)) * k;
                let c3 = Complex64::new(0.0, params.gamma32 * k / w)
                    * (Complex64::new(d3, 0.0) - Complex64::from_polar(d2, -w * t));
                (c2, c3)
            }
        };
        trace.set_state(i, [c2, c3, c2 * sign, c3 * sign]);
    }
    trace
}

/// Exact amplitudes of emitter A alone, prepared in `(k2, k3)`; emitter B
/// stays in the ground state.
pub fn single_atom_trace(params: &SystemParams, k2: Complex64, k3: Complex64, times: &[f64]) -> AmplitudeTrace {
    let atom = SingleAtom::new(params);
    let mut trace = AmplitudeTrace::zeros(times.to_vec(), Provenance::ClosedForm);
    for (i, &t) in times.iter().enumerate() {
        let (c2, c3) = atom.evolve(k2, k3, t);
        trace.set_state(i, [c2, c3, Complex64::default(), Complex64::default()]);
    }
    trace
}

/// Superpose sector solutions with weights `(K2A +- K2B)/sqrt 2`.
pub fn compose_general_state(
    init: &InitialState,
    plus: &AmplitudeTrace,
    minus: &AmplitudeTrace,
) -> Result<AmplitudeTrace> {
    if !init.is_level2_only() {
        return Err(Error::Unsupported("mode-sum composition covers level-2 initial excitations only".into()));
    }
    if !plus.same_grid(minus) {
        return Err(Error::GridMismatch(format!(
            "symmetric trace has {} samples, antisymmetric {}",
            plus.len(),
            minus.len()
        )));
    }
    let (wp, wm) = init.sector_weights();
    let mut out = AmplitudeTrace::zeros(plus.times.clone(), plus.provenance);
    for i in 0..plus.len() {
        let a = plus.state(i);
        let b = minus.state(i);
        out.set_state(i, [0, 1, 2, 3].map(|k| a[k] * wp + b[k] * wm));
    }
    out.residue_sum_defect = match (plus.residue_sum_defect, minus.residue_sum_defect) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    out.transit_defect = match (plus.transit_defect, minus.transit_defect) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    Ok(out)
}

/// Index of the sample at `t = d/v`, if the grid contains it.
pub fn transit_sample(trace: &AmplitudeTrace, params: &SystemParams) -> Option<usize> {
    transit_index(&trace.times, params.delay())
}
