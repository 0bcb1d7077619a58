//! Flat `key = value` settings and their resolution into a runnable scenario.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use beats_core::params::derive_scales;
use beats_core::scenarios::Scenario;
use beats_core::{
    resolve_distance, DistanceUnit, InitialState, SearchWindow, SymmetrySector, SystemParams, WindowPreset, DEFAULT_DT,
};

use crate::error::{CliError, CliResult};

pub const KEYS: &[&str] = &[
    "scenario",
    "name",
    "sector",
    "theta",
    "phi",
    "distance",
    "distance_unit",
    "snap",
    "backend",
    "window",
    "re_max",
    "im_max",
    "tmax",
    "dt",
    "jobs",
    "out",
    "intensity",
    "reference",
    "gamma22",
    "gamma33",
    "gamma23",
    "gamma32",
    "omega23",
    "omega21",
    "velocity",
    "axis",
    "from",
    "to",
    "steps",
];

pub const DEFAULT_TMAX: f64 = 8.0;

/// Raw settings; later insertions win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut s = Settings::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", n + 1)))?;
            s.set(k.trim(), v.trim())?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !KEYS.contains(&key) {
            return Err(CliError::usage(format!("unknown setting '{key}'")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::usage(format!("cannot parse {key} = '{v}'"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Modes,
    Dde,
    Both,
}

impl Backend {
    pub fn modes(self) -> bool {
        matches!(self, Backend::Modes | Backend::Both)
    }

    pub fn dde(self) -> bool {
        matches!(self, Backend::Dde | Backend::Both)
    }

    pub fn label(self) -> &'static str {
        match self {
            Backend::Modes => "modes",
            Backend::Dde => "dde",
            Backend::Both => "both",
        }
    }
}

impl FromStr for Backend {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "modes" => Ok(Backend::Modes),
            "dde" => Ok(Backend::Dde),
            "both" => Ok(Backend::Both),
            other => Err(CliError::usage(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Init {
    Sector(SymmetrySector),
    Angles { theta: f64, phi: f64 },
}

impl Init {
    pub fn state(&self) -> InitialState {
        match *self {
            Init::Sector(s) => InitialState::sector(s),
            Init::Angles { theta, phi } => InitialState::from_angles(theta, phi),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Init::Sector(s) => s.label().to_string(),
            Init::Angles { theta, phi } => format!("theta{theta:.4}_phi{phi:.4}"),
        }
    }
}

/// Everything a command needs, in canonical units.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub name: String,
    pub params: SystemParams,
    pub init: Init,
    pub backend: Backend,
    pub window: SearchWindow,
    pub window_label: String,
    pub t_max: f64,
    pub dt: f64,
    pub out_dir: PathBuf,
    pub intensity: bool,
    pub reference: bool,
}

impl RunSpec {
    /// Provenance lines for CSV headers.
    pub fn meta(&self) -> Vec<(&'static str, String)> {
        vec![
            ("name", self.name.clone()),
            ("init", self.init.label()),
            ("backend", self.backend.label().to_string()),
            ("window", self.window_label.clone()),
            ("t_max", format!("{:.16e}", self.t_max)),
            ("dt", format!("{:.16e}", self.dt)),
        ]
    }
}

fn base_params(s: &Settings) -> CliResult<SystemParams> {
    let mut p = SystemParams::canonical();
    p.gamma22 = s.f64_or("gamma22", p.gamma22)?;
    p.gamma33 = s.f64_or("gamma33", p.gamma33)?;
    let cross = (p.gamma22 * p.gamma33).sqrt();
    p.gamma23 = s.f64_or("gamma23", cross)?;
    p.gamma32 = s.f64_or("gamma32", cross)?;
    p.omega23 = s.f64_or("omega23", p.omega23)?;
    p.omega21 = s.f64_or("omega21", p.omega21)?;
    p.velocity = s.f64_or("velocity", p.velocity)?;
    Ok(p)
}

fn positive(key: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::usage(format!("{key} must be positive, got {v}")))
    }
}

pub fn resolve(s: &Settings) -> CliResult<RunSpec> {
    let scenario = match s.get("scenario") {
        None => None,
        Some(n) => Some(Scenario::by_name(n).ok_or_else(|| CliError::usage(format!("unknown scenario '{n}'")))?),
    };

    let mut params = base_params(s)?;
    let unit: DistanceUnit = match s.get("distance_unit") {
        Some(u) => u.parse().map_err(|e: beats_core::Error| CliError::usage(e.to_string()))?,
        None => DistanceUnit::LambdaBeat,
    };
    let value = s.f64_or("distance", scenario.map_or(1.0, |sc| sc.beats))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(CliError::usage(format!("distance must be non-negative, got {value}")));
    }
    let snap = s.parsed::<bool>("snap")?.unwrap_or(true);
    params.distance = resolve_distance(value, unit, &params, snap);
    params.validate().map_err(|e| CliError::usage(e.to_string()))?;

    let init = if s.has("theta") || s.has("phi") {
        if s.has("sector") {
            return Err(CliError::usage("give either a sector or theta/phi, not both"));
        }
        Init::Angles { theta: s.f64_or("theta", 0.0)?, phi: s.f64_or("phi", 0.0)? }
    } else {
        let sector = s.get("sector").unwrap_or("sym");
        Init::Sector(sector.parse().map_err(|e: beats_core::Error| CliError::usage(e.to_string()))?)
    };

    let backend: Backend = s.parsed("backend")?.unwrap_or(Backend::Both);
    let explicit = s.has("re_max") || s.has("im_max");
    let window_kind = match s.get("window") {
        Some(w) => w.to_string(),
        None if explicit => "custom".to_string(),
        None => match scenario {
            Some(sc) => label(sc.window).to_string(),
            None if params.distance < derive_scales(&params).coherence_length => "markovian".to_string(),
            None => "nonmarkovian".to_string(),
        },
    };
    let window = if window_kind == "custom" {
        let re = s.parsed::<f64>("re_max")?;
        let im = s.parsed::<f64>("im_max")?;
        match (re, im) {
            (Some(re), Some(im)) => SearchWindow::new(positive("re_max", re)?, positive("im_max", im)?, &params),
            _ => return Err(CliError::usage("a custom window needs both --re-max and --im-max")),
        }
    } else {
        if explicit {
            return Err(CliError::usage("--re-max/--im-max only apply to --window custom"));
        }
        let preset: WindowPreset =
            window_kind.parse().map_err(|e: beats_core::Error| CliError::usage(e.to_string()))?;
        SearchWindow::preset(preset, &params)
    };

    let t_max = positive("tmax", s.f64_or("tmax", DEFAULT_TMAX)?)?;
    let dt = positive("dt", s.f64_or("dt", DEFAULT_DT)?)?;
    let name = match s.get("name") {
        Some(n) => n.to_string(),
        None => format!("{}_{}", scenario.map_or("custom", |sc| sc.name), init.label()),
    };
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(CliError::usage(format!("invalid name '{name}'")));
    }
    let out_dir = s.get("out").map(PathBuf::from).unwrap_or_else(|| Path::new("out").join(&name));
    let intensity = s.parsed::<bool>("intensity")?.unwrap_or(false);
    let reference = s.parsed::<bool>("reference")?.unwrap_or(false);

    Ok(RunSpec {
        name,
        params,
        init,
        backend,
        window,
        window_label: window_kind,
        t_max,
        dt,
        out_dir,
        intensity,
        reference,
    })
}

fn label(preset: WindowPreset) -> &'static str {
    match preset {
        WindowPreset::Markovian => "markovian",
        WindowPreset::NonMarkovian => "nonmarkovian",
    }
}
