use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use beats_core::field::DETECTOR_OFFSET;
use beats_core::io::{write_amplitudes, write_header, write_intensity, write_poles};
use beats_core::metrics::{beat_enhancement, beat_visibility, first_peak_after};
use beats_core::scenarios;
use beats_core::{
    amplitudes_from_modes, compose_general_state, count_poles, dde_integrate, detector_pair, energy_budget,
    intensity_lightcone, single_atom_trace, solve_sector, time_grid, AmplitudeTrace, DdeConfig, InitialState,
    ModeExpansion, SearchWindow, SymmetrySector, SystemParams, WindowPreset, DEFAULT_DT,
};
use log::info;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::args::{Command, RunArgs, SelftestArgs};
use crate::config::{resolve, Init, RunSpec, Settings};
use crate::error::{CliError, CliResult};

/// Largest tolerated mode-sum/delay-equation deviation before exit code 4.
pub const DISAGREEMENT_TOL: f64 = 1e-2;

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Poles(args) => {
            let s = settings(&args)?;
            poles(&resolve(&s)?)
        }
        Command::Dynamics(args) => {
            let mut s = settings(&args.run)?;
            if args.intensity {
                s.set("intensity", "true")?;
            }
            if args.reference {
                s.set("reference", "true")?;
            }
            dynamics(&resolve(&s)?)
        }
        Command::Sweep(args) => {
            let mut s = settings(&args.run)?;
            for (k, v) in [
                ("axis", args.axis.clone()),
                ("from", args.from.map(|v| v.to_string())),
                ("to", args.to.map(|v| v.to_string())),
                ("steps", args.steps.map(|v| v.to_string())),
            ] {
                if let Some(v) = v {
                    s.set(k, &v)?;
                }
            }
            sweep(&s)
        }
        Command::Selftest(SelftestArgs { jobs }) => {
            init_pool(jobs)?;
            selftest()
        }
    }
}

fn settings(args: &RunArgs) -> CliResult<Settings> {
    let mut s = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for (k, v) in args.overrides() {
        s.set(k, &v)?;
    }
    init_pool(s.parsed("jobs")?)?;
    Ok(s)
}

fn init_pool(jobs: Option<usize>) -> CliResult<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::usage("--jobs must be at least 1"));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_file<F>(path: &Path, body: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<File>) -> beats_core::Result<()>,
{
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn sector_of(spec: &RunSpec) -> CliResult<SymmetrySector> {
    match spec.init {
        Init::Sector(s) => Ok(s),
        Init::Angles { .. } => Err(CliError::usage("poles needs --sector rather than --theta/--phi")),
    }
}

fn poles(spec: &RunSpec) -> CliResult<()> {
    let sector = sector_of(spec)?;
    let start = Instant::now();
    let exp = solve_sector(&spec.params, sector, &spec.window)?;
    let path = spec.out_dir.join("poles.csv");
    write_file(&path, |w| write_poles(w, &exp, &spec.meta()))?;

    let defect = exp.residue_sum_defect()?;
    println!(
        "{}: {} poles (winding {}) in |Re s| < {}, |Im s| < {} [{:.2} s]",
        sector.label(),
        exp.modes.len(),
        exp.winding,
        exp.window.re_max,
        exp.window.im_max,
        start.elapsed().as_secs_f64()
    );
    let (a, b) = exp.residue_sums()?;
    println!("residue sums: alpha {a:.6}, beta {b:.6}; defect {defect:.3e}");
    println!("{:>5} {:>14} {:>14} {:>12} {:>12}", "n", "re_s", "im_s", "|alpha_bar|", "|beta_bar|");
    for (n, s, ab, bb) in dominant(&exp, &spec.params, 8) {
        println!("{n:>5} {:>14.6} {:>14.6} {ab:>12.4e} {bb:>12.4e}", s.re, s.im);
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// Modes ranked by emitted amplitude `|g2 alpha_bar + g3 beta_bar|`.
fn dominant(exp: &ModeExpansion, params: &SystemParams, n: usize) -> Vec<(usize, Complex64, f64, f64)> {
    let mut rows: Vec<(usize, Complex64, f64, f64, f64)> = exp
        .modes
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let r = m.residue?;
            let weight = (r.alpha_bar * params.g2() + r.beta_bar * params.g3()).norm();
            Some((i, m.s, r.alpha_bar.norm(), r.beta_bar.norm(), weight))
        })
        .collect();
    rows.sort_by(|x, y| y.4.total_cmp(&x.4));
    rows.into_iter().take(n).map(|(i, s, a, b, _)| (i, s, a, b)).collect()
}

/// Emitter A alone with amplitude `1/sqrt 2` in level 2; emitter B stays in
/// the ground state and never couples.
fn lone_reference(params: &SystemParams, times: &[f64]) -> AmplitudeTrace {
    let k = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    single_atom_trace(params, k, Complex64::default(), times)
}

/// Traces produced by the selected backends on one shared grid.
pub struct Computed {
    pub primary: AmplitudeTrace,
    pub deviation: Option<Vec<f64>>,
    pub max_deviation: Option<f64>,
}

fn modes_trace(spec: &RunSpec, times: &[f64]) -> CliResult<AmplitudeTrace> {
    let expand = |sector| -> CliResult<AmplitudeTrace> {
        let exp = solve_sector(&spec.params, sector, &spec.window)?;
        Ok(amplitudes_from_modes(&exp, times)?)
    };
    match spec.init {
        Init::Sector(s) => expand(s),
        Init::Angles { .. } => {
            let plus = expand(SymmetrySector::Symmetric)?;
            let minus = expand(SymmetrySector::Antisymmetric)?;
            Ok(compose_general_state(&spec.init.state(), &plus, &minus)?)
        }
    }
}

pub fn compute(spec: &RunSpec) -> CliResult<Computed> {
    let dde = if spec.backend.dde() {
        Some(dde_integrate(&spec.params, &spec.init.state(), &DdeConfig::new(spec.dt, spec.t_max))?)
    } else {
        None
    };
    let times = match &dde {
        Some(tr) => tr.times.clone(),
        None => time_grid(&spec.params, spec.t_max, spec.dt)?,
    };
    let modes = if spec.backend.modes() { Some(modes_trace(spec, &times)?) } else { None };
    Ok(match (modes, dde) {
        (Some(m), Some(d)) => {
            let deviation = m.deviation(&d);
            let max = deviation.iter().cloned().fold(0.0, f64::max);
            Computed { primary: m, deviation: Some(deviation), max_deviation: Some(max) }
        }
        (Some(m), None) => Computed { primary: m, deviation: None, max_deviation: None },
        (None, Some(d)) => Computed { primary: d, deviation: None, max_deviation: None },
        (None, None) => unreachable!("every backend runs at least one solver"),
    })
}

fn dynamics(spec: &RunSpec) -> CliResult<()> {
    let start = Instant::now();
    let out = compute(spec)?;
    let tr = &out.primary;
    let mut meta = spec.meta();
    if let Some(m) = out.max_deviation {
        meta.push(("max_deviation", format!("{m:.16e}")));
    }
    let amp_path = spec.out_dir.join("amplitudes.csv");
    write_file(&amp_path, |w| write_amplitudes(w, &spec.params, tr, out.deviation.as_deref(), &meta))?;
    println!("wrote {}", amp_path.display());

    let reference = spec.reference.then(|| lone_reference(&spec.params, &tr.times));
    if let Some(r) = &reference {
        let path = spec.out_dir.join("reference.csv");
        write_file(&path, |w| write_amplitudes(w, &spec.params, r, None, &meta))?;
        println!("wrote {}", path.display());
    }

    if spec.intensity {
        let x_right = spec.params.distance + DETECTOR_OFFSET;
        let right = intensity_lightcone(tr, &spec.params, x_right, &tr.times)?;
        let left = intensity_lightcone(tr, &spec.params, -DETECTOR_OFFSET, &tr.times)?;
        let mut traces = vec![right, left];
        if let Some(r) = &reference {
            traces.push(intensity_lightcone(r, &spec.params, x_right, &tr.times)?);
        }
        let refs: Vec<_> = traces.iter().collect();
        let path = spec.out_dir.join("intensity.csv");
        write_file(&path, |w| write_intensity(w, &spec.params, &refs, &meta))?;
        println!("wrote {}", path.display());
    }

    let last = tr.len() - 1;
    let pops = tr.populations(last);
    println!(
        "t = {:.4}: pop2A {:.6e}, pop3A {:.6e}, pop2B {:.6e}, pop3B {:.6e} [{:.2} s]",
        tr.times[last],
        pops[0],
        pops[1],
        pops[2],
        pops[3],
        start.elapsed().as_secs_f64()
    );
    let budget = energy_budget(tr, &spec.params)?;
    println!(
        "energy: population {:.6}, emitted {:.6}, in flight {:.6}, total {:.6}",
        budget.population,
        budget.emitted,
        budget.trapped,
        budget.total()
    );
    if let Some(m) = out.max_deviation {
        println!("max |modes - dde| = {m:.3e}");
        if m > DISAGREEMENT_TOL {
            return Err(CliError::Disagreement(m));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Distance,
    Theta,
    Omega23,
}

impl Axis {
    fn key(self) -> &'static str {
        match self {
            Axis::Distance => "distance",
            Axis::Theta => "theta",
            Axis::Omega23 => "omega23",
        }
    }
}

/// Evenly spaced axis values; rejects empty or degenerate ranges.
pub fn axis_values(from: f64, to: f64, steps: usize) -> CliResult<Vec<f64>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::usage("sweep bounds must be finite"));
    }
    match steps {
        0 => Err(CliError::usage("empty sweep range: --steps must be at least 1")),
        1 => Ok(vec![from]),
        _ if from == to => Err(CliError::usage("empty sweep range: --from equals --to")),
        n => Ok((0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()),
    }
}

struct SweepRow {
    value: f64,
    init: String,
    distance: f64,
    omega23: f64,
    peak: Option<(f64, f64)>,
    peak_ratio: Option<f64>,
    visibility: Option<f64>,
    late_emitted: f64,
    max_deviation: Option<f64>,
    error: String,
}

fn sweep_point(settings: &Settings) -> CliResult<SweepRow> {
    let spec = resolve(settings)?;
    let out = compute(&spec)?;
    let tr = &out.primary;
    let p = &spec.params;
    let delay = p.delay();
    let pop2: Vec<f64> = tr.ca2.iter().map(|c| c.norm_sqr()).collect();
    let pop3: Vec<f64> = tr.ca3.iter().map(|c| c.norm_sqr()).collect();
    let lone = lone_reference(p, &tr.times);
    let lone_pop3: Vec<f64> = lone.ca3.iter().map(|c| c.norm_sqr()).collect();
    let pair = detector_pair(tr, p)?;
    let t_end = *tr.times.last().unwrap_or(&0.0);
    let error = match out.max_deviation {
        Some(m) if m > DISAGREEMENT_TOL => format!("backends disagree: {m:.3e}"),
        _ => String::new(),
    };
    Ok(SweepRow {
        value: f64::NAN,
        init: spec.init.label(),
        distance: p.distance,
        omega23: p.omega23,
        peak: first_peak_after(&tr.times, &pop3, delay),
        peak_ratio: beat_enhancement(&tr.times, &pop3, &lone_pop3, delay).map(|e| e.ratio()),
        visibility: beat_visibility(&tr.times, &pop2, delay, 2.0 * PI / p.omega23.abs()),
        late_emitted: pair.emitted_between(delay, t_end),
        max_deviation: out.max_deviation,
        error,
    })
}

fn sweep(settings: &Settings) -> CliResult<()> {
    let axis = match settings.get("axis") {
        Some("distance") => Axis::Distance,
        Some("theta") => Axis::Theta,
        Some("omega23") => Axis::Omega23,
        Some(other) => return Err(CliError::usage(format!("unknown sweep axis '{other}'"))),
        None => return Err(CliError::usage("sweep needs --axis {distance,theta,omega23}")),
    };
    let from = settings.parsed::<f64>("from")?.ok_or_else(|| CliError::usage("sweep needs --from"))?;
    let to = settings.parsed::<f64>("to")?.ok_or_else(|| CliError::usage("sweep needs --to"))?;
    let steps = settings.parsed::<usize>("steps")?.ok_or_else(|| CliError::usage("sweep needs --steps"))?;
    let values = axis_values(from, to, steps)?;

    let mut base_settings = settings.clone();
    if axis == Axis::Theta {
        base_settings.remove("sector");
        if !base_settings.has("phi") {
            base_settings.set("phi", "0")?;
        }
    }
    // usage errors in the shared settings abort before any point runs
    let base = resolve(&base_settings)?;
    if base.window_label != "custom" && axis != Axis::Distance && !settings.has("window") {
        // keep one window kind across the axis
        base_settings.set("window", &base.window_label)?;
    }

    let start = Instant::now();
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| {
            let mut s = base_settings.clone();
            let fallback = SweepRow {
                value: v,
                init: String::new(),
                distance: f64::NAN,
                omega23: f64::NAN,
                peak: None,
                peak_ratio: None,
                visibility: None,
                late_emitted: f64::NAN,
                max_deviation: None,
                error: String::new(),
            };
            let result = s.set(axis.key(), &v.to_string()).and_then(|_| sweep_point(&s));
            match result {
                Ok(row) => SweepRow { value: v, ..row },
                Err(e) => SweepRow { error: e.to_string(), ..fallback },
            }
        })
        .collect();

    let path = base.out_dir.join("sweep.csv");
    let meta = vec![
        ("axis", axis.key().to_string()),
        ("from", format!("{from:.16e}")),
        ("to", format!("{to:.16e}")),
        ("steps", steps.to_string()),
        ("backend", base.backend.label().to_string()),
        ("t_max", format!("{:.16e}", base.t_max)),
        ("dt", format!("{:.16e}", base.dt)),
    ];
    write_file(&path, |w| {
        write_header(w, &base.params, &meta)?;
        writeln!(
            w,
            "index,value,init,distance,omega23,first_peak_pop3,first_peak_time,first_peak_ratio,beat_visibility,late_emitted,max_deviation,error"
        )?;
        let num = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.16e}"));
        for (i, r) in rows.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{},{},{},{},{},{},{},{}",
                num(Some(r.value)),
                r.init,
                num(Some(r.distance)),
                num(Some(r.omega23)),
                num(r.peak.map(|p| p.1)),
                num(r.peak.map(|p| p.0)),
                num(r.peak_ratio),
                num(r.visibility),
                num(Some(r.late_emitted)),
                num(r.max_deviation),
                r.error.replace([',', '\n'], ";"),
            )?;
        }
        Ok(())
    })?;
    let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("{} points along {} ({} failed) [{:.2} s]", rows.len(), axis.key(), failed, start.elapsed().as_secs_f64());
    println!("wrote {}", path.display());
    Ok(())
}

fn selftest() -> CliResult<()> {
    let base = beats_core::canonical_paper_params();
    type Check = fn(&SystemParams) -> CliResult<(bool, String)>;
    let checks: [(&str, Check); 4] = [
        ("coincident antisymmetric poles", |base| {
            let p = base.with_distance(1e-9).with_lattice_phase();
            let w = SearchWindow::preset(WindowPreset::Markovian, &p);
            let exp = solve_sector(&p, SymmetrySector::Antisymmetric, &w)?;
            let poles: Vec<_> = exp.poles().collect();
            let ok = poles.len() == 2 && poles[0].norm() < 1e-6 && (poles[1].im - p.omega23).abs() < 1e-6;
            Ok((ok, format!("{poles:?}")))
        }),
        ("mode sum vs delay equation", |base| {
            let p = scenarios::MARKOVIAN_FULL.params(base);
            let w = SearchWindow::preset(WindowPreset::Markovian, &p);
            let exp = solve_sector(&p, SymmetrySector::Symmetric, &w)?;
            let count = count_poles(&p, SymmetrySector::Symmetric, &exp.window)?;
            let dde = dde_integrate(&p, &InitialState::symmetric(), &DdeConfig::new(DEFAULT_DT, 2.0))?;
            let modes = amplitudes_from_modes(&exp, &dde.times)?;
            let dev = modes.max_deviation(&dde, p.delay(), 2.0)?;
            let ok = dev < 1e-3 && count == exp.modes.len() as i64;
            Ok((ok, format!("deviation {dev:.2e}, {} poles, winding {count}", exp.modes.len())))
        }),
        ("energy balance", |base| {
            let p = scenarios::NONMARKOVIAN_FULL.params(base);
            let dde = dde_integrate(&p, &InitialState::from_angles(0.4, 0.9), &DdeConfig::new(DEFAULT_DT, 4.0))?;
            let total = energy_budget(&dde, &p)?.total();
            Ok(((total - 1.0).abs() < 2e-2, format!("total {total:.5}")))
        }),
        ("causality", |base| {
            let p = scenarios::NONMARKOVIAN_FULL.params(base);
            let cfg = DdeConfig::new(DEFAULT_DT, p.delay() * 1.2);
            let init = InitialState::from_angles(0.3, 1.2);
            let a = dde_integrate(&p, &init, &cfg)?;
            let b = dde_integrate(&p, &init, &cfg.isolated())?;
            let dev = a.max_deviation(&b, -1.0, p.delay() * (1.0 - 1e-12))?;
            Ok((dev <= 1e-9, format!("pre-transit deviation {dev:.1e}")))
        }),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (ok, detail) = check(&base)?;
        if !ok {
            failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        return Err(CliError::Selftest(failed));
    }
    Ok(())
}
