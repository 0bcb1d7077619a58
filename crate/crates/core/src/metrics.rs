//! Scalar summaries of traces: beat peaks, visibility, decay rates.

/// First strict local maximum with `t > t0`.
pub fn first_peak_after(times: &[f64], values: &[f64], t0: f64) -> Option<(f64, f64)> {
    let n = times.len().min(values.len());
    (1..n.saturating_sub(1))
        .find(|&i| times[i] > t0 && values[i] > values[i - 1] && values[i] >= values[i + 1])
        .map(|i| (times[i], values[i]))
}

/// First beat peak of a scenario relative to an independent-emitter reference.
#[derive(Debug, Clone, Copy)]
pub struct BeatEnhancement {
    pub peak: f64,
    pub peak_time: f64,
    pub reference_peak: f64,
    pub reference_time: f64,
    /// The scenario had no local maximum after `t0`; `peak` is its value at
    /// the reference peak time instead.
    pub fallback: bool,
}

impl BeatEnhancement {
    pub fn ratio(&self) -> f64 {
        self.peak / self.reference_peak
    }
}

/// Compare first peaks after `t0`. Both series share `times`.
pub fn beat_enhancement(times: &[f64], scenario: &[f64], reference: &[f64], t0: f64) -> Option<BeatEnhancement> {
    let (reference_time, reference_peak) = first_peak_after(times, reference, t0)?;
    match first_peak_after(times, scenario, t0) {
        Some((peak_time, peak)) => {
            Some(BeatEnhancement { peak, peak_time, reference_peak, reference_time, fallback: false })
        }
        None => {
            let i = times.iter().position(|&t| t >= reference_time)?;
            Some(BeatEnhancement {
                peak: scenario[i],
                peak_time: times[i],
                reference_peak,
                reference_time,
                fallback: true,
            })
        }
    }
}

/// `(max - min) / (max + min)` over `[t0, t0 + period]`.
pub fn visibility(times: &[f64], values: &[f64], t0: f64, period: f64) -> Option<f64> {
    let window: Vec<f64> =
        times.iter().zip(values).filter(|(&t, _)| t >= t0 && t <= t0 + period).map(|(_, &v)| v).collect();
    if window.is_empty() {
        return None;
    }
    let max = window.iter().cloned().fold(f64::MIN, f64::max);
    let min = window.iter().cloned().fold(f64::MAX, f64::min);
    (max + min > 0.0).then(|| (max - min) / (max + min))
}

/// Visibility after removing the exponential trend through the window
/// endpoints. Endpoints one beat period apart share the beat phase, so a
/// signal `e^{-r t} (1 + a cos(w t))` yields exactly `a`.
pub fn beat_visibility(times: &[f64], values: &[f64], t0: f64, period: f64) -> Option<f64> {
    let idx: Vec<usize> =
        (0..times.len().min(values.len())).filter(|&i| times[i] >= t0 && times[i] <= t0 + period).collect();
    let (&first, &last) = (idx.first()?, idx.last()?);
    if last == first || values[first] <= 0.0 || values[last] <= 0.0 {
        return None;
    }
    let rate = -(values[last] / values[first]).ln() / (times[last] - times[first]);
    let flat: Vec<f64> = idx.iter().map(|&i| values[i] * (rate * (times[i] - times[first])).exp()).collect();
    let max = flat.iter().cloned().fold(f64::MIN, f64::max);
    let min = flat.iter().cloned().fold(f64::MAX, f64::min);
    (max + min > 0.0).then(|| (max - min) / (max + min))
}

/// Average exponential rate `-ln(P(t1)/P(t0)) / (t1 - t0)`, sampled at the
/// nearest grid points.
pub fn mean_decay_rate(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Option<f64> {
    let i0 = times.iter().position(|&t| t >= t0)?;
    let i1 = times.iter().position(|&t| t >= t1)?;
    if i1 <= i0 || values[i0] <= 0.0 || values[i1] <= 0.0 {
        return None;
    }
    Some(-(values[i1] / values[i0]).ln() / (times[i1] - times[i0]))
}
