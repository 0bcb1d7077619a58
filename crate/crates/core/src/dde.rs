//! Direct time-domain integration of the retarded equations of motion.
//!
//! Classical RK4 on a grid commensurate with the transit time `d/v`, so
//! delayed lookups at full steps land on stored samples. Half-step delayed
//! values come from the stored history.

use log::warn;
use num_complex::Complex64;

use crate::dynamics::{commensurate_step, AmplitudeTrace, Provenance};
use crate::error::{Error, Result};
use crate::params::{InitialState, SystemParams};

/// How delayed values at half steps are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistoryInterp {
    /// Mean of the two neighbouring samples (second order).
    ExactGrid,
    /// Cubic Hermite from stored samples and derivatives.
    Cubic,
}

/// Whether the emitters talk to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    Full,
    /// Inter-emitter terms switched off; each emitter decays on its own.
    Isolated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdeConfig {
    /// Requested step; adjusted down to divide `d/v`.
    pub step: f64,
    pub t_max: f64,
    pub history_interp: HistoryInterp,
    pub coupling: Coupling,
}

impl DdeConfig {
    pub fn new(step: f64, t_max: f64) -> Self {
        Self { step, t_max, history_interp: HistoryInterp::Cubic, coupling: Coupling::Full }
    }

    pub fn isolated(mut self) -> Self {
        self.coupling = Coupling::Isolated;
        self
    }

    pub fn with_interp(mut self, interp: HistoryInterp) -> Self {
        self.history_interp = interp;
        self
    }
}

const MAX_PRODUCT: f64 = 0.05;
const NORM_SLACK: f64 = 1e-4;

type State = [Complex64; 4];

struct Rhs {
    /// `gamma_{jl}/2`
    half: [[f64; 2]; 2],
    /// `e^{i phi_l}`
    phase: [Complex64; 2],
    omega23: f64,
}

impl Rhs {
    fn new(p: &SystemParams) -> Self {
        Self {
            half: [[p.gamma22 / 2.0, p.gamma23 / 2.0], [p.gamma32 / 2.0, p.gamma33 / 2.0]],
            phase: [Complex64::new(0.0, p.phase2()).exp(), Complex64::new(0.0, p.phase3()).exp()],
            omega23: p.omega23,
        }
    }

    /// `dc/dt` at time `t` with state `c` and the retarded state `other`
    /// (`None` while the exchange term is inactive). Emitter `m` reads the
    /// partner's entries of `other`.
    fn eval(&self, t: f64, c: &State, other: Option<&State>) -> State {
        let rot = Complex64::new(0.0, self.omega23 * t).exp();
        // e^{i omega_{jl} t}: (2,3) -> rot, (3,2) -> conj(rot)
        let r = [[Complex64::new(1.0, 0.0), rot], [rot.conj(), Complex64::new(1.0, 0.0)]];
        let mut out = [Complex64::default(); 4];
        for m in 0..2 {
            let n = 1 - m;
            for j in 0..2 {
                let mut acc = Complex64::default();
                for l in 0..2 {
                    let mut src = c[2 * m + l];
                    if let Some(o) = other {
                        src += self.phase[l] * o[2 * n + l];
                    }
                    acc += r[j][l] * src * self.half[j][l];
                }
                out[2 * m + j] = -acc;
            }
        }
        out
    }
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [0, 1, 2, 3].map(|i| y[i] + k[i] * h)
}

fn hermite(y0: &State, y1: &State, d0: &State, d1: &State, h: f64, s: f64) -> State {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    [0, 1, 2, 3].map(|i| y0[i] * h00 + d0[i] * (h10 * h) + y1[i] * h01 + d1[i] * (h11 * h))
}

/// Integrate both emitters from `init` up to at least `cfg.t_max`.
pub fn dde_integrate(params: &SystemParams, init: &InitialState, cfg: &DdeConfig) -> Result<AmplitudeTrace> {
    params.validate()?;
    if !(cfg.step > 0.0 && cfg.step.is_finite() && cfg.t_max >= 0.0 && cfg.t_max.is_finite()) {
        return Err(Error::InvalidParams(format!("bad step {} or t_max {}", cfg.step, cfg.t_max)));
    }
    let delay = params.delay();
    let h = commensurate_step(delay, cfg.step);
    let product = params.omega23.abs() * h;
    if product > MAX_PRODUCT {
        return Err(Error::StepTooCoarse { step: h, product });
    }
    // delays below half a step are treated as instantaneous
    let lag = if delay > 0.0 && delay >= 0.5 * cfg.step {
        Some((delay / h).round() as usize)
    } else {
        if delay > 0.0 {
            warn!("transit time {delay} below half a step {h}; treating the coupling as instantaneous");
        }
        None
    };
    let coupled = cfg.coupling == Coupling::Full;

    let steps = (cfg.t_max / h - 1e-9).ceil().max(0.0) as usize;
    let rhs = Rhs::new(params);
    let mut y: Vec<State> = Vec::with_capacity(steps + 1);
    // right-limit derivatives; `dy_left` holds the left limit at the kink
    let mut dy: Vec<State> = Vec::with_capacity(steps + 1);
    let mut dy_kink_left: Option<State> = None;
    let k = init.amplitudes();
    // integrator layout is (A2, A3, B2, B3)
    y.push([k[0], k[2], k[1], k[3]]);

    let delayed = |y: &[State], dy: &[State], kink_left: &Option<State>, m: usize, idx: usize, frac: f64| -> State {
        // history sample `idx + frac` steps, stored states are for both emitters
        if frac == 0.0 {
            return y[idx];
        }
        match cfg.history_interp {
            HistoryInterp::ExactGrid => [0, 1, 2, 3].map(|i| (y[idx][i] + y[idx + 1][i]) * 0.5),
            HistoryInterp::Cubic => {
                let d1 = if idx + 1 == m { kink_left.as_ref().unwrap_or(&dy[idx + 1]) } else { &dy[idx + 1] };
                hermite(&y[idx], &y[idx + 1], &dy[idx], d1, h, frac)
            }
        }
    };

    for n in 0..steps {
        let t = n as f64 * h;
        let c = y[n];
        let (k1, k2, k3, k4);
        match (coupled, lag) {
            (false, _) => {
                k1 = rhs.eval(t, &c, None);
                dy.push(k1);
                k2 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k1), None);
                k3 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k2), None);
                k4 = rhs.eval(t + h, &axpy(&c, h, &k3), None);
            }
            (true, None) => {
                // instantaneous exchange: the other emitter's current stage value
                let f = |tt: f64, s: &State| rhs.eval(tt, s, Some(s));
                k1 = f(t, &c);
                dy.push(k1);
                k2 = f(t + h / 2.0, &axpy(&c, h / 2.0, &k1));
                k3 = f(t + h / 2.0, &axpy(&c, h / 2.0, &k2));
                k4 = f(t + h, &axpy(&c, h, &k3));
            }
            (true, Some(m)) => {
                if n < m {
                    k1 = rhs.eval(t, &c, None);
                    dy.push(k1);
                    k2 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k1), None);
                    k3 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k2), None);
                    // a step ending on the kink still sees the retarded term off
                    k4 = rhs.eval(t + h, &axpy(&c, h, &k3), None);
                } else {
                    let j = n - m;
                    if n == m {
                        dy_kink_left = Some(rhs.eval(t, &c, None));
                    }
                    let d0 = y[j];
                    k1 = rhs.eval(t, &c, Some(&d0));
                    dy.push(k1);
                    let dh = delayed(&y, &dy, &dy_kink_left, m, j, 0.5);
                    let d1 = y[j + 1];
                    k2 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k1), Some(&dh));
                    k3 = rhs.eval(t + h / 2.0, &axpy(&c, h / 2.0, &k2), Some(&dh));
                    k4 = rhs.eval(t + h, &axpy(&c, h, &k3), Some(&d1));
                }
            }
        }
        let next: State = [0, 1, 2, 3].map(|i| c[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0));
        let pop: f64 = next.iter().map(|a| a.norm_sqr()).sum();
        if pop.is_nan() || pop > 1.0 + NORM_SLACK {
            return Err(Error::NormViolation { t: t + h, population: pop });
        }
        y.push(next);
    }

    let mut trace = AmplitudeTrace::zeros((0..=steps).map(|i| i as f64 * h).collect(), Provenance::Dde);
    for (i, s) in y.into_iter().enumerate() {
        trace.set_state(i, s);
    }
    Ok(trace)
}

/// Result of a self-convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    /// Max-norm differences between consecutive resolutions.
    pub differences: Vec<f64>,
    /// Observed orders from consecutive difference ratios.
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    /// Order estimate from the finest triple.
    pub fn order(&self) -> f64 {
        *self.orders.last().unwrap_or(&f64::NAN)
    }
}

/// Empirical convergence order of [`dde_integrate`] from at least three
/// step sizes in geometric progression (coarse to fine).
pub fn convergence_study(
    params: &SystemParams,
    init: &InitialState,
    steps: &[f64],
    t_max: f64,
) -> Result<ConvergenceReport> {
    if steps.len() < 3 {
        return Err(Error::InvalidParams("convergence study needs at least three steps".into()));
    }
    let delay = params.delay();
    // refine the coarsest commensurate step by integer factors so grids nest
    let coarse_step = commensurate_step(delay, steps[0]);
    let actual: Vec<f64> = steps.iter().map(|&h| coarse_step / (steps[0] / h).round().max(1.0)).collect();
    for w in actual.windows(2) {
        if (w[0] - w[1]).abs() <= 1e-12 * w[0] {
            return Err(Error::NonDistinctSteps);
        }
    }
    let traces: Vec<AmplitudeTrace> =
        actual.iter().map(|&h| dde_integrate(params, init, &DdeConfig::new(h, t_max))).collect::<Result<_>>()?;

    // compare at the coarsest grid's samples, which every finer grid contains
    let coarse = &traces[0];
    let mut differences = Vec::new();
    for pair in traces.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let mut worst: f64 = 0.0;
        for &t in coarse.times.iter().filter(|&&t| t <= t_max) {
            let ia = lookup(a, t)?;
            let ib = lookup(b, t)?;
            let (sa, sb) = (a.state(ia), b.state(ib));
            for k in 0..4 {
                worst = worst.max((sa[k] - sb[k]).norm());
            }
        }
        differences.push(worst);
    }
    let mut orders = Vec::new();
    for i in 0..differences.len() - 1 {
        let ratio = actual[i] / actual[i + 1];
        orders.push((differences[i] / differences[i + 1]).ln() / ratio.ln());
    }
    Ok(ConvergenceReport { steps: actual, differences, orders })
}

fn lookup(trace: &AmplitudeTrace, t: f64) -> Result<usize> {
    let dt = trace.dt();
    let i = (t / dt).round() as usize;
    if i < trace.len() && (trace.times[i] - t).abs() <= 1e-9 * dt {
        Ok(i)
    } else {
        Err(Error::GridMismatch(format!("time {t} is not a sample of a grid with step {dt}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{canonical_paper_params, derive_scales};
    use crate::single_atom::SingleAtom;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn lone_atom_matches_exact_solution() {
        let p = canonical_paper_params().with_distance(0.7);
        let init = InitialState::from_angles(0.0, 0.0);
        let tr = dde_integrate(&p, &init, &DdeConfig::new(5e-4, 2.0).isolated()).unwrap();
        let atom = SingleAtom::new(&p);
        for i in (0..tr.len()).step_by(97) {
            let (c2, c3) = atom.evolve(Complex64::new(1.0, 0.0), Complex64::default(), tr.times[i]);
            assert!((tr.ca2[i] - c2).norm() < 1e-8);
            assert!((tr.ca3[i] - c3).norm() < 1e-8);
            assert!(tr.cb2[i].norm() == 0.0);
        }
    }

    #[test]
    fn rejects_coarse_step() {
        let p = canonical_paper_params();
        let r = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(0.01, 1.0));
        assert!(matches!(r, Err(Error::StepTooCoarse { .. })));
    }

    #[test]
    fn grid_is_commensurate_with_delay() {
        let base = canonical_paper_params();
        let p = base.with_distance(0.5 * derive_scales(&base).lambda_beat);
        let tr = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(5e-4, 0.2)).unwrap();
        let m = p.delay() / tr.dt();
        assert!((m - m.round()).abs() < 1e-9);
    }

    #[test]
    fn sector_symmetry_emerges() {
        let base = canonical_paper_params();
        let p = base.with_distance(derive_scales(&base).lambda_beat);
        for init in [InitialState::symmetric(), InitialState::antisymmetric()] {
            let sign = init.k2b().re / FRAC_1_SQRT_2;
            let tr = dde_integrate(&p, &init, &DdeConfig::new(5e-4, 2.0)).unwrap();
            for i in 0..tr.len() {
                assert!((tr.cb2[i] - tr.ca2[i] * sign).norm() < 1e-9);
                assert!((tr.cb3[i] - tr.ca3[i] * sign).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_grid_history_is_second_order_consistent() {
        let base = canonical_paper_params();
        let p = base.with_distance(derive_scales(&base).lambda_beat);
        let cubic = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(5e-4, 1.0)).unwrap();
        let grid = dde_integrate(
            &p,
            &InitialState::symmetric(),
            &DdeConfig::new(5e-4, 1.0).with_interp(HistoryInterp::ExactGrid),
        )
        .unwrap();
        assert!(cubic.max_deviation(&grid, 0.0, 1.0).unwrap() < 1e-5);
    }

    #[test]
    fn distinct_steps_required() {
        let p = canonical_paper_params();
        let r = convergence_study(&p, &InitialState::symmetric(), &[1e-3, 1e-3, 5e-4], 1.0);
        assert!(matches!(r, Err(Error::NonDistinctSteps)));
    }
}
