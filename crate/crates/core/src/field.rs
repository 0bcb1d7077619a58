//! Emitted intensity reconstructed from amplitude histories.
//!
//! Emitter A sits at `x = 0`, emitter B at `x = d`. Couplings are
//! `g_j = sqrt(gamma_jj)` and intensities are quoted in units of `I0`, the
//! prefactor that absorbs every remaining constant. With this convention a
//! lone fully excited atom radiates `gamma22 e^{-gamma22 t}` to each side.
//!
//! The common carrier `e^{-i omega21 t}` is factored out. Relative phases
//! between the emitters use the propagation phase `phase2()` so that a
//! lattice override stays consistent with the dynamics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{AmplitudeTrace, Provenance};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::single_atom::SingleAtom;
use crate::spectral::ModeExpansion;

/// Offset of the default detectors from the outer emitters, `x -> x_B^+`.
pub const DETECTOR_OFFSET: f64 = 1e-6;

/// Which intensity unit a trace is quoted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntensityUnit {
    /// `I / I0` with `g_j = sqrt(gamma_jj)`.
    I0,
    /// `I / I0'` with `I0' = 2 I0`, the convention of the coincident closed form.
    I0Prime,
}

impl IntensityUnit {
    pub fn note(self) -> &'static str {
        match self {
            IntensityUnit::I0 => "I/I0, g_j = sqrt(gamma_jj)",
            IntensityUnit::I0Prime => "I/I0', I0' = 2 I0",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IntensityTrace {
    pub times: Vec<f64>,
    pub x: f64,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub unit: IntensityUnit,
}

impl IntensityTrace {
    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Re-express in another unit.
    pub fn to_unit(mut self, unit: IntensityUnit) -> Self {
        let scale = match (self.unit, unit) {
            (IntensityUnit::I0, IntensityUnit::I0Prime) => 0.5,
            (IntensityUnit::I0Prime, IntensityUnit::I0) => 2.0,
            _ => 1.0,
        };
        self.values.iter_mut().for_each(|v| *v *= scale);
        self.unit = unit;
        self
    }
}

fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Effective carrier used for inter-emitter phases: `phase2 v / d`.
fn carrier(params: &SystemParams) -> f64 {
    let delay = params.delay();
    if delay > 0.0 {
        params.phase2() / delay
    } else {
        params.omega21
    }
}

/// Emitted field amplitude of one emitter, `g2 c2 + g3 e^{i omega23 t} c3`.
#[inline]
fn source(params: &SystemParams, t: f64, c2: Complex64, c3: Complex64) -> Complex64 {
    c2 * params.g2() + Complex64::new(0.0, params.omega23 * t).exp() * c3 * params.g3()
}

/// Amplitudes at an arbitrary time from a uniform trace by four-point
/// Lagrange interpolation. Stencils never straddle the transit sample.
pub(crate) struct Sampler<'a> {
    trace: &'a AmplitudeTrace,
    dt: f64,
    kink: Option<usize>,
}

impl<'a> Sampler<'a> {
    pub(crate) fn new(trace: &'a AmplitudeTrace, params: &SystemParams) -> Self {
        let dt = trace.dt();
        let delay = params.delay();
        let kink = (delay > 0.0 && dt > 0.0)
            .then(|| (delay / dt).round() as usize)
            .filter(|&k| k < trace.len() && (trace.times[k] - delay).abs() <= 1e-9 * delay.max(1.0));
        Self { trace, dt, kink }
    }

    /// `(cA2, cA3, cB2, cB3)` at time `t >= 0`.
    pub(crate) fn at(&self, t: f64) -> Result<[Complex64; 4]> {
        let n = self.trace.len();
        let last = *self.trace.times.last().ok_or(Error::InsufficientHistory { t })?;
        if t < 0.0 || t > last + 1e-9 * self.dt.max(1e-300) {
            return Err(Error::InsufficientHistory { t });
        }
        if n < 4 {
            let i = if self.dt > 0.0 { ((t / self.dt).round() as usize).min(n - 1) } else { 0 };
            return Ok(self.trace.state(i));
        }
        let u = t / self.dt;
        let k = u.floor() as usize;
        if (u - u.round()).abs() < 1e-9 {
            return Ok(self.trace.state((u.round() as usize).min(n - 1)));
        }
        let mut start = k.saturating_sub(1);
        if let Some(kk) = self.kink {
            if kk == k || kk == k + 1 {
                start = if u <= kk as f64 { kk.saturating_sub(3) } else { kk };
            }
        }
        start = start.min(n - 4);
        let xs = [0, 1, 2, 3].map(|i| (start + i) as f64);
        let mut out = [Complex64::default(); 4];
        for i in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if i != j {
                    w *= (u - xs[j]) / (xs[i] - xs[j]);
                }
            }
            let s = self.trace.state(start + i);
            for c in 0..4 {
                out[c] += s[c] * w;
            }
        }
        Ok(out)
    }
}

/// Intensity at position `x` from the retarded light cones of both emitters
/// and both transitions.
pub fn intensity_lightcone(
    trace: &AmplitudeTrace,
    params: &SystemParams,
    x: f64,
    times: &[f64],
) -> Result<IntensityTrace> {
    let sampler = Sampler::new(trace, params);
    let k21 = carrier(params) / params.velocity;
    let w23 = params.omega23;
    let positions = [0.0, params.distance];
    let g = [params.g2(), params.g3()];

    let values = times
        .par_iter()
        .map(|&t| {
            let mut field = Complex64::default();
            for (m, &xm) in positions.iter().enumerate() {
                let delta = (x - xm) / params.velocity;
                let cones = [
                    (t - delta, heaviside(t - delta) - heaviside(-delta), (x - xm) * k21),
                    (t + delta, heaviside(t + delta) - heaviside(delta), -(x - xm) * k21),
                ];
                for (tr, weight, phase) in cones {
                    if weight == 0.0 {
                        continue;
                    }
                    let c = sampler.at(tr)?;
                    let (c2, c3) = (c[2 * m], c[2 * m + 1]);
                    let term = c2 * g[0] + c3 * g[1] * Complex64::new(0.0, w23 * tr).exp();
                    field += term * Complex64::new(0.0, phase).exp() * weight;
                }
            }
            Ok(field.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IntensityTrace { times: times.to_vec(), x, values, provenance: trace.provenance, unit: IntensityUnit::I0 })
}

/// Detector just outside emitter B from a mode expansion.
///
/// The emitted amplitude of emitter A after transit is
/// `sum (g2 alpha_bar + g3 beta_bar) e^{s (t - d/v)}`; before transit it is the
/// exact isolated-emitter value. The detector sees B directly and A after one
/// more transit.
pub fn intensity_at_detector(expansion: &ModeExpansion, times: &[f64]) -> Result<IntensityTrace> {
    if !expansion.is_complete() {
        return Err(Error::IncompleteExpansion);
    }
    let p = &expansion.params;
    let delay = p.delay();
    let sign = expansion.sector.sign();
    let atom = SingleAtom::new(p);
    let k0 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let weights: Vec<(Complex64, Complex64)> = expansion
        .modes
        .iter()
        .map(|m| {
            let r = m.residue.expect("completeness checked");
            (m.s, r.alpha_bar * p.g2() + r.beta_bar * p.g3())
        })
        .collect();
    let emitted = |tp: f64| -> Complex64 {
        if tp <= delay {
            let (c2, c3) = atom.evolve(k0, Complex64::default(), tp);
            source(p, tp, c2, c3)
        } else {
            weights.iter().map(|&(s, w)| w * (s * (tp - delay)).exp()).sum()
        }
    };
    let prop = Complex64::new(0.0, p.phase2()).exp();
    let values = times
        .par_iter()
        .map(|&t| {
            if t < 0.0 {
                return 0.0;
            }
            let mut field = emitted(t) * sign;
            if t >= delay {
                field += prop * emitted(t - delay);
            }
            field.norm_sqr()
        })
        .collect();
    Ok(IntensityTrace {
        times: times.to_vec(),
        x: p.distance,
        values,
        provenance: Provenance::ModeSum,
        unit: IntensityUnit::I0,
    })
}

/// Zero-separation symmetric-state intensity in the well-separated-level
/// approximation, in units of `I0'`.
pub fn intensity_coincident_closed_form(params: &SystemParams, times: &[f64]) -> IntensityTrace {
    let cross = params.gamma23 * params.gamma32;
    let w = params.omega23;
    let sum = params.gamma22 + params.gamma33;
    let values = times
        .iter()
        .map(|&t| {
            if t < 0.0 {
                return 0.0;
            }
            params.gamma22 * (-2.0 * params.gamma22 * t).exp()
                + params.gamma33 * cross / (w * w) * (-2.0 * params.gamma33 * t).exp()
                - 2.0 * cross / w * (w * t).sin() * (-sum * t).exp()
        })
        .collect();
    IntensityTrace {
        times: times.to_vec(),
        x: params.distance,
        values,
        provenance: Provenance::ClosedForm,
        unit: IntensityUnit::I0Prime,
    }
}

/// Right (`x -> x_B^+`) and left (`x -> x_A^-`) detector intensities on the
/// trace's own grid. The transit time is a grid multiple, so no
/// interpolation is involved.
#[derive(Debug, Clone)]
pub struct DetectorPair {
    pub times: Vec<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    /// Emitted amplitudes `g2 c2 + g3 e^{i omega23 t} c3` of A and B.
    pub source_a: Vec<Complex64>,
    pub source_b: Vec<Complex64>,
    pub lag: usize,
}

pub fn detector_pair(trace: &AmplitudeTrace, params: &SystemParams) -> Result<DetectorPair> {
    let dt = trace.dt();
    let delay = params.delay();
    let lag = if delay > 0.0 {
        let m = delay / dt;
        if (m - m.round()).abs() > 1e-6 {
            return Err(Error::GridMismatch(format!("transit time {delay} is not a multiple of {dt}")));
        }
        m.round() as usize
    } else {
        0
    };
    let source_a: Vec<Complex64> =
        (0..trace.len()).map(|i| source(params, trace.times[i], trace.ca2[i], trace.ca3[i])).collect();
    let source_b: Vec<Complex64> =
        (0..trace.len()).map(|i| source(params, trace.times[i], trace.cb2[i], trace.cb3[i])).collect();
    let prop = Complex64::new(0.0, params.phase2()).exp();
    let mut right = Vec::with_capacity(trace.len());
    let mut left = Vec::with_capacity(trace.len());
    for i in 0..trace.len() {
        let (mut r, mut l) = (source_b[i], source_a[i]);
        if i >= lag {
            r += prop * source_a[i - lag];
            l += prop * source_b[i - lag];
        }
        right.push(r.norm_sqr());
        left.push(l.norm_sqr());
    }
    Ok(DetectorPair { times: trace.times.clone(), right, left, source_a, source_b, lag })
}

impl DetectorPair {
    pub fn right_trace(&self, params: &SystemParams, provenance: Provenance) -> IntensityTrace {
        IntensityTrace {
            times: self.times.clone(),
            x: params.distance,
            values: self.right.clone(),
            provenance,
            unit: IntensityUnit::I0,
        }
    }

    /// Radiated probability through both detectors between samples `i0` and `i1`.
    fn emitted_range(&self, i0: usize, i1: usize) -> f64 {
        if i1 <= i0 {
            return 0.0;
        }
        let dt = self.times[1] - self.times[0];
        let f = |i: usize| 0.5 * (self.right[i] + self.left[i]);
        let inner: f64 = (i0 + 1..i1).map(f).sum();
        dt * (inner + 0.5 * (f(i0) + f(i1)))
    }

    fn index_at(&self, t: f64) -> usize {
        let dt = self.times[1] - self.times[0];
        ((t / dt).round().max(0.0) as usize).min(self.times.len() - 1)
    }

    /// Probability radiated out of the pair over `[t0, t1]`.
    pub fn emitted_between(&self, t0: f64, t1: f64) -> f64 {
        if self.times.len() < 2 {
            return 0.0;
        }
        self.emitted_range(self.index_at(t0), self.index_at(t1))
    }

    /// Probability stored in the field between the emitters at sample `i`.
    pub fn trapped_at(&self, i: usize) -> f64 {
        if self.lag == 0 || self.times.len() < 2 {
            return 0.0;
        }
        let dt = self.times[1] - self.times[0];
        let lo = i.saturating_sub(self.lag);
        let f = |k: usize| 0.5 * (self.source_a[k].norm_sqr() + self.source_b[k].norm_sqr());
        if i == lo {
            return 0.0;
        }
        let inner: f64 = (lo + 1..i).map(f).sum();
        dt * (inner + 0.5 * (f(lo) + f(i)))
    }
}

/// Where the initial excitation sits at the end of a run.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBudget {
    pub population: f64,
    pub emitted: f64,
    pub trapped: f64,
}

impl EnergyBudget {
    pub fn total(&self) -> f64 {
        self.population + self.emitted + self.trapped
    }
}

pub fn energy_budget(trace: &AmplitudeTrace, params: &SystemParams) -> Result<EnergyBudget> {
    let pair = detector_pair(trace, params)?;
    let last = trace.len() - 1;
    Ok(EnergyBudget {
        population: trace.total_population(last),
        emitted: pair.emitted_range(0, last),
        trapped: pair.trapped_at(last),
    })
}
