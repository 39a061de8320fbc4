//! Flat `section.key=value` run configuration.
//!
//! A document is a list of lines; `#` starts a comment and blank lines are
//! ignored. Lists are comma separated. Keys are applied on top of a preset
//! (`preset=desk` or `preset=paper`, desk by default), and command-line
//! flags are applied last.

use std::fmt::Write as _;

use tfpilot::channel::{DopplerLayout, SnrReference};
use tfpilot::scenario::{carrier_for, ScenarioConfig, TruthReference, NOMINAL_SPEED, NU_MAX};
use tfpilot::tfgrid::Spacing;
use tfpilot::zcseq::{default_roots, default_zc1d_len, PilotSpec};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{key}: {msg}")]
    Key { key: String, msg: String },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

fn key_err(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Key { key: key.to_string(), msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Preset {
    #[default]
    Desk,
    Paper,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }

    fn parse(v: &str) -> Option<Self> {
        match v {
            "desk" => Some(Preset::Desk),
            "paper" => Some(Preset::Paper),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Preset,
    pub bs: (f64, f64),
    pub center: (f64, f64),
    pub radius: f64,
    pub angular_rate: f64,
    /// `None`: derived from `nu_max` and `carrier_speed`.
    pub carrier_freq: Option<f64>,
    pub nu_max: f64,
    pub carrier_speed: f64,
    pub num_instants: usize,
    pub kappas: Vec<f64>,
    pub snrs_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub truth: TruthReference,

    pub delta_f: f64,
    pub delta_t: f64,
    pub delay_bins: usize,
    pub doppler_bins: i64,
    pub doppler_layout: DopplerLayout,

    pub beta: f64,
    pub normalize_nlos: bool,
    pub unit_los: bool,
    /// `None`: `Δf·T`.
    pub alpha: Option<f64>,
    pub snr_reference: SnrReference,
    /// Single-point settings used by `estimate` and `dump-channel`.
    pub kappa: f64,
    pub snr_db: f64,
    pub trial: usize,

    pub families: Vec<String>,
    pub m: usize,
    pub n: usize,
    pub l: Option<usize>,
    pub r: i64,
    pub r_f: i64,
    pub r_t: i64,
    pub roots: Option<Vec<i64>>,
}

pub const FAMILIES: [&str; 4] = ["separable", "stacked", "zc1d", "stacked_transposed"];

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let s = match preset {
            Preset::Desk => ScenarioConfig::desk(),
            Preset::Paper => ScenarioConfig::paper(),
        };
        let (m, n) = match preset {
            Preset::Desk => (11, 7),
            Preset::Paper => (23, 17),
        };
        RunConfig {
            preset,
            bs: s.bs_position,
            center: s.circle_center,
            radius: s.circle_radius,
            angular_rate: s.angular_rate,
            carrier_freq: None,
            nu_max: NU_MAX,
            carrier_speed: NOMINAL_SPEED,
            num_instants: s.num_instants,
            kappas: s.kappas,
            snrs_db: s.snrs_db,
            trials: s.trials_per_point,
            seed: s.master_seed,
            truth: s.truth,
            delta_f: s.spacing.delta_f,
            delta_t: s.spacing.delta_t,
            delay_bins: s.delay_bins,
            doppler_bins: s.doppler_bins,
            doppler_layout: s.doppler_layout,
            beta: s.beta,
            normalize_nlos: s.normalize_nlos,
            unit_los: s.unit_los,
            alpha: s.alpha,
            snr_reference: s.snr_reference,
            kappa: 1.0,
            snr_db: 5.0,
            trial: 0,
            families: vec!["separable".into(), "stacked".into(), "zc1d".into()],
            m,
            n,
            l: None,
            r: 1,
            r_f: 1,
            r_t: 1,
            roots: None,
        }
    }

    /// Parses a document on top of a preset: `forced` if given, else the
    /// document's own `preset` key, else desk.
    pub fn from_text(text: &str, forced: Option<Preset>) -> Result<Self, ConfigError> {
        let pairs = parse_pairs(text)?;
        let mut preset = Preset::Desk;
        for (k, v) in &pairs {
            if k == "preset" {
                preset = Preset::parse(v).ok_or_else(|| key_err(k, format!("expected desk or paper, got '{v}'")))?;
            }
        }
        let mut cfg = RunConfig::preset(forced.unwrap_or(preset));
        for (k, v) in pairs.iter().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        let f = || parse_f64(key, v);
        let u = || v.parse::<usize>().map_err(|_| key_err(key, format!("expected a non-negative integer, got '{v}'")));
        let i = || v.parse::<i64>().map_err(|_| key_err(key, format!("expected an integer, got '{v}'")));
        let b = || match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(key_err(key, format!("expected true or false, got '{v}'"))),
        };
        match key {
            "preset" => return Err(key_err(key, "the preset can only be chosen in a config file or with --preset")),
            "scenario.bs_x" => self.bs.0 = f()?,
            "scenario.bs_y" => self.bs.1 = f()?,
            "scenario.center_x" => self.center.0 = f()?,
            "scenario.center_y" => self.center.1 = f()?,
            "scenario.radius" => self.radius = f()?,
            "scenario.angular_rate" => self.angular_rate = f()?,
            "scenario.carrier_freq" => self.carrier_freq = if v == "auto" { None } else { Some(f()?) },
            "scenario.nu_max" => self.nu_max = f()?,
            "scenario.carrier_speed" => self.carrier_speed = f()?,
            "scenario.num_instants" => self.num_instants = u()?,
            "scenario.kappas" => self.kappas = parse_list(key, v, |s| parse_f64(key, s))?,
            "scenario.snrs_db" => self.snrs_db = parse_list(key, v, |s| parse_f64(key, s))?,
            "scenario.trials" => self.trials = u()?,
            "scenario.seed" => {
                self.seed = v.parse().map_err(|_| key_err(key, format!("expected an unsigned 64-bit integer, got '{v}'")))?
            }
            "scenario.truth" => {
                self.truth = match v {
                    "continuous" => TruthReference::Continuous,
                    "snapped" => TruthReference::Snapped,
                    _ => return Err(key_err(key, format!("expected continuous or snapped, got '{v}'"))),
                }
            }
            "grid.delta_f" => self.delta_f = f()?,
            "grid.delta_t" => self.delta_t = f()?,
            "grid.delay_bins" => self.delay_bins = u()?,
            "grid.doppler_bins" => self.doppler_bins = i()?,
            "grid.doppler_layout" => {
                self.doppler_layout = match v {
                    "signed" => DopplerLayout::Signed,
                    "total" => DopplerLayout::Total,
                    _ => return Err(key_err(key, format!("expected signed or total, got '{v}'"))),
                }
            }
            "channel.beta" => self.beta = f()?,
            "channel.normalize_nlos" => self.normalize_nlos = b()?,
            "channel.unit_los" => self.unit_los = b()?,
            "channel.alpha" => self.alpha = if v == "physical" { None } else { Some(f()?) },
            "channel.snr_reference" => {
                self.snr_reference = match v {
                    "per_sample" => SnrReference::PerSample,
                    "pilot_energy" => SnrReference::PilotEnergy,
                    _ => return Err(key_err(key, format!("expected per_sample or pilot_energy, got '{v}'"))),
                }
            }
            "channel.kappa" => self.kappa = f()?,
            "channel.snr_db" => self.snr_db = f()?,
            "channel.trial" => self.trial = u()?,
            "pilot.families" => {
                let fams = parse_list(key, v, |s| {
                    if FAMILIES.contains(&s) {
                        Ok(s.to_string())
                    } else {
                        Err(key_err(key, format!("unknown family '{s}' (expected one of {})", FAMILIES.join(", "))))
                    }
                })?;
                self.families = fams;
            }
            "pilot.m" => self.m = u()?,
            "pilot.n" => self.n = u()?,
            "pilot.l" => self.l = if v == "auto" { None } else { Some(u()?) },
            "pilot.r" => self.r = i()?,
            "pilot.r_f" => self.r_f = i()?,
            "pilot.r_t" => self.r_t = i()?,
            "pilot.roots" => {
                self.roots = if v == "auto" {
                    None
                } else {
                    Some(parse_list(key, v, |s| s.parse::<i64>().map_err(|_| key_err(key, format!("bad root '{s}'"))))?)
                }
            }
            _ => return Err(key_err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn carrier(&self) -> f64 {
        self.carrier_freq.unwrap_or_else(|| carrier_for(self.nu_max, self.carrier_speed))
    }

    pub fn zc1d_len(&self) -> Result<usize, ConfigError> {
        match self.l {
            Some(l) => Ok(l),
            None => default_zc1d_len(self.m * self.n, self.r).map_err(|e| key_err("pilot.l", e.to_string())),
        }
    }

    pub fn stacked_roots(&self) -> Vec<i64> {
        self.roots.clone().unwrap_or_else(|| default_roots(self.m, self.n))
    }

    pub fn pilot(&self, family: &str) -> Result<PilotSpec, ConfigError> {
        Ok(match family {
            "separable" => PilotSpec::Separable { m: self.m, n: self.n, r_f: self.r_f, r_t: self.r_t },
            "stacked" => PilotSpec::Stacked { m: self.m, n: self.n, roots: self.stacked_roots() },
            "stacked_transposed" => PilotSpec::StackedTransposed { m: self.m, n: self.n, roots: self.stacked_roots() },
            "zc1d" => PilotSpec::Zc1d { len: self.zc1d_len()?, root: self.r },
            other => return Err(key_err("pilot.families", format!("unknown family '{other}'"))),
        })
    }

    pub fn spacing(&self) -> Result<Spacing, ConfigError> {
        Spacing::new(self.delta_f, self.delta_t).map_err(|e| key_err("grid", e.to_string()))
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, ConfigError> {
        let pilots = self.families.iter().map(|f| self.pilot(f)).collect::<Result<_, _>>()?;
        Ok(ScenarioConfig {
            bs_position: self.bs,
            circle_center: self.center,
            circle_radius: self.radius,
            angular_rate: self.angular_rate,
            carrier_freq: self.carrier(),
            num_instants: self.num_instants,
            spacing: self.spacing()?,
            delay_bins: self.delay_bins,
            doppler_bins: self.doppler_bins,
            doppler_layout: self.doppler_layout,
            kappas: self.kappas.clone(),
            snrs_db: self.snrs_db.clone(),
            snr_reference: self.snr_reference,
            trials_per_point: self.trials,
            master_seed: self.seed,
            pilots,
            beta: self.beta,
            normalize_nlos: self.normalize_nlos,
            unit_los: self.unit_los,
            alpha: self.alpha,
            truth: self.truth,
        })
    }

    /// Every key with its resolved value; feeding this back reproduces the run.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let list_f = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("preset", self.preset.name().into());
        kv("scenario.bs_x", self.bs.0.to_string());
        kv("scenario.bs_y", self.bs.1.to_string());
        kv("scenario.center_x", self.center.0.to_string());
        kv("scenario.center_y", self.center.1.to_string());
        kv("scenario.radius", self.radius.to_string());
        kv("scenario.angular_rate", self.angular_rate.to_string());
        kv("scenario.nu_max", self.nu_max.to_string());
        kv("scenario.carrier_speed", self.carrier_speed.to_string());
        kv("scenario.carrier_freq", self.carrier().to_string());
        kv("scenario.num_instants", self.num_instants.to_string());
        kv("scenario.kappas", list_f(&self.kappas));
        kv("scenario.snrs_db", list_f(&self.snrs_db));
        kv("scenario.trials", self.trials.to_string());
        kv("scenario.seed", self.seed.to_string());
        kv("scenario.truth", self.truth.name().into());
        kv("grid.delta_f", self.delta_f.to_string());
        kv("grid.delta_t", self.delta_t.to_string());
        kv("grid.delay_bins", self.delay_bins.to_string());
        kv("grid.doppler_bins", self.doppler_bins.to_string());
        kv("grid.doppler_layout", self.doppler_layout.name().into());
        kv("channel.beta", self.beta.to_string());
        kv("channel.normalize_nlos", self.normalize_nlos.to_string());
        kv("channel.unit_los", self.unit_los.to_string());
        match self.alpha {
            Some(a) => kv("channel.alpha", a.to_string()),
            None => kv("channel.alpha", format!("physical # {}", self.delta_f * self.delta_t)),
        }
        kv("channel.snr_reference", self.snr_reference.name().into());
        kv("channel.kappa", self.kappa.to_string());
        kv("channel.snr_db", self.snr_db.to_string());
        kv("channel.trial", self.trial.to_string());
        kv("pilot.families", self.families.join(","));
        kv("pilot.m", self.m.to_string());
        kv("pilot.n", self.n.to_string());
        kv("pilot.l", self.zc1d_len().map(|l| l.to_string()).unwrap_or_else(|_| "auto".into()));
        kv("pilot.r", self.r.to_string());
        kv("pilot.r_f", self.r_f.to_string());
        kv("pilot.r_t", self.r_t.to_string());
        kv("pilot.roots", self.stacked_roots().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","));
        s
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| key_err(key, format!("expected a number, got '{v}'")))
}

fn parse_list<T>(key: &str, v: &str, item: impl Fn(&str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let out = v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err(key_err(key, "empty list"));
    }
    Ok(out)
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: no + 1, msg: format!("expected key=value, got '{line}'") })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Splits a `key=value` command-line override.
pub fn split_override(s: &str) -> Result<(String, String), ConfigError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| ConfigError::Syntax { line: 0, msg: format!("override '{s}' is not key=value") })
}
