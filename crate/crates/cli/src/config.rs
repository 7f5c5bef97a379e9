//! Run configuration: defaults, then a JSON file, then command-line flags.

use std::f64::consts::PI;
use std::path::Path;

use serde::Deserialize;

use photologic_core::motion::{t_crit, OpticsParams, TrapParams};
use photologic_core::{McConfig, MissedPhoton, PatternKind, VarianceMode};

/// A scalar or a list, for keys like `xi`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapFile {
    pub nu_perp_hz: Option<f64>,
    pub nu_par_hz: Option<f64>,
    pub nu_recoil_hz: Option<f64>,
    pub temperature_k: Option<f64>,
    pub t_over_tcr: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsFile {
    pub theta0_rad: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternFile {
    pub kind: Option<String>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McFile {
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub trap: TrapFile,
    #[serde(default)]
    pub optics: OpticsFile,
    pub xi: Option<OneOrMany>,
    #[serde(default)]
    pub pattern: PatternFile,
    #[serde(default)]
    pub mc: McFile,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Kelvin(f64),
    Ratio(f64),
}

/// Everything a command needs, after merging.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trap: TrapParams,
    pub optics: OpticsParams,
    pub temperature: Temperature,
    pub xi: Option<Vec<f64>>,
    pub kind: PatternKind,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub mc: McConfig,
}

impl RunConfig {
    /// `T/T_cr` for the configured trap and aperture.
    pub fn t_over_tcr(&self) -> f64 {
        match self.temperature {
            Temperature::Ratio(r) => r,
            Temperature::Kelvin(t) => t / t_crit(&self.trap, &self.optics),
        }
    }
}

/// Flag values that override the file; `None` means not given.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub nu_perp: Option<f64>,
    pub nu_par: Option<f64>,
    pub nu_recoil: Option<f64>,
    pub temperature: Option<f64>,
    pub t_over_tcr: Option<f64>,
    pub theta0: Option<f64>,
    pub xi: Option<Vec<f64>>,
    pub kind: Option<String>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub variance: Option<VarianceMode>,
    pub missed_photon: Option<MissedPhoton>,
}

fn parse_kind(s: &str) -> Result<PatternKind, String> {
    match s {
        "standard" => Ok(PatternKind::Standard),
        "mirrored" => Ok(PatternKind::Mirrored),
        other => Err(format!("unknown pattern kind {other:?} (expected standard or mirrored)")),
    }
}

pub fn merge(file: ConfigFile, flags: Overrides, default_ratio: f64) -> Result<RunConfig, String> {
    let err = |e: photologic_core::Error| e.to_string();
    let base = TrapParams::rb87(0.0).map_err(err)?;

    if file.trap.temperature_k.is_some() && file.trap.t_over_tcr.is_some() {
        return Err("config gives both trap.temperature_k and trap.t_over_tcr".into());
    }
    let temperature = match (flags.temperature, flags.t_over_tcr) {
        (Some(t), _) => Temperature::Kelvin(t),
        (_, Some(r)) => Temperature::Ratio(r),
        _ => match (file.trap.temperature_k, file.trap.t_over_tcr) {
            (Some(t), _) => Temperature::Kelvin(t),
            (_, Some(r)) => Temperature::Ratio(r),
            _ => Temperature::Ratio(default_ratio),
        },
    };
    match temperature {
        Temperature::Kelvin(t) | Temperature::Ratio(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(format!("temperature must be finite and non-negative, got {t}"));
        }
        _ => {}
    }

    let nu_perp = flags.nu_perp.or(file.trap.nu_perp_hz).unwrap_or(base.nu_perp);
    let nu_par = flags.nu_par.or(file.trap.nu_par_hz).unwrap_or(base.nu_par);
    let nu_recoil = flags.nu_recoil.or(file.trap.nu_recoil_hz).unwrap_or(base.nu_recoil);
    let theta0 = flags.theta0.or(file.optics.theta0_rad).unwrap_or(OpticsParams::default().theta0());
    let optics = OpticsParams::new(theta0).map_err(err)?;
    let mut trap = TrapParams::new(nu_perp, nu_par, nu_recoil, 0.0).map_err(err)?;
    let kelvin = match temperature {
        Temperature::Kelvin(t) => t,
        Temperature::Ratio(r) => r * t_crit(&trap, &optics),
    };
    trap = trap.with_temperature(kelvin).map_err(err)?;

    let xi = flags.xi.or(file.xi.map(OneOrMany::into_vec));
    if let Some(list) = &xi {
        if list.is_empty() {
            return Err("xi list is empty".into());
        }
        for &x in list {
            photologic_core::ScatterRatio::new(x).map_err(err)?;
        }
    }

    let kind = match flags.kind.or(file.pattern.kind) {
        Some(s) => parse_kind(&s)?,
        None => PatternKind::Standard,
    };
    let x_min = flags.x_min.or(file.pattern.x_min).unwrap_or(0.0);
    let x_max = flags.x_max.or(file.pattern.x_max).unwrap_or(PI);
    let n = flags.n.or(file.pattern.n).unwrap_or(361);
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return Err(format!("need finite x_min < x_max, got [{x_min}, {x_max}]"));
    }
    if n < 2 {
        return Err(format!("grid needs at least 2 points, got {n}"));
    }

    let defaults = McConfig::default();
    let mut mc = McConfig {
        n_samples: flags.samples.or(file.mc.n_samples).unwrap_or(defaults.n_samples),
        seed: flags.seed.or(file.mc.seed).unwrap_or(defaults.seed),
        ..defaults
    };
    if let Some(v) = flags.variance {
        mc.mode = v;
    }
    if let Some(m) = flags.missed_photon {
        mc.missed_photon = m;
    }
    let mc = mc.validated().map_err(err)?;

    Ok(RunConfig { trap, optics, temperature, xi, kind, x_min, x_max, n, mc })
}
