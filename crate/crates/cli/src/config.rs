//! Scenario configuration: flat `key = value` files plus `--key=value`
//! overrides.
//!
//! Every SNR is set through `snr_db` plus a per-link offset, so a single SNR
//! axis moves all three links together. Keys ending in `_db` are converted to
//! linear scale when the scenario is resolved.

use std::fmt;
use std::path::{Path, PathBuf};

use isac_core::channel::{CommLink, SlotConfig};
use isac_core::metrics::MetricConfig;
use isac_core::montecarlo::McSpec;
use isac_core::sensing::{rms_bandwidth_flat, PathLoss, SenseLink, SPEED_OF_LIGHT};

use crate::error::{CliError, ConfigError, Origin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Pilots,
    Snr,
}

/// Which closed form backs the capacity columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityForm {
    Canonical,
    AsPrinted,
}

/// Pilot length used by `sweep-efficiency` along an SNR axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotChoice {
    Optimal,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub symbols: usize,
    pub bandwidth: f64,
    pub sigma1_sq: f64,
    pub snr_db: f64,
    pub gamma_p_offset_db: f64,
    pub gamma_d_offset_db: f64,
    pub gamma_ps_offset_db: f64,
    pub a_s: f64,
    pub sigma2_sq: f64,
    pub s_rcs: f64,
    pub range: f64,
    /// `None` means `bandwidth / √12`.
    pub b_rms: Option<f64>,
    pub speed: f64,
    pub wavelength: f64,
    pub rho_p: f64,
    pub path_loss_mode: PathLoss,
    pub capacity_form: CapacityForm,
    pub kappa: f64,
    pub eta: f64,
    pub u_c_th: f64,
    pub u_d_th: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub stream_id: u64,
    pub mc_workers: usize,
    pub axis: Axis,
    pub axis_start: Option<f64>,
    pub axis_stop: Option<f64>,
    pub axis_step: Option<f64>,
    pub efficiency_l_p: PilotChoice,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            symbols: 14,
            bandwidth: 200e6,
            sigma1_sq: 2.0,
            snr_db: 10.0,
            gamma_p_offset_db: 0.0,
            gamma_d_offset_db: 0.0,
            gamma_ps_offset_db: 0.0,
            a_s: 3.0,
            sigma2_sq: 1.0,
            s_rcs: 100.0,
            range: 100.0,
            b_rms: None,
            speed: 0.0,
            wavelength: SPEED_OF_LIGHT / 3.5e9,
            rho_p: 1.0,
            path_loss_mode: PathLoss::Spherical,
            capacity_form: CapacityForm::Canonical,
            kappa: 1.0,
            eta: 0.5,
            u_c_th: 0.2,
            u_d_th: 0.2,
            n_samples: 100_000,
            seed: 1,
            stream_id: 0,
            mc_workers: 0,
            axis: Axis::Snr,
            axis_start: None,
            axis_stop: None,
            axis_step: None,
            efficiency_l_p: PilotChoice::Optimal,
        }
    }
}

/// Every recognised key, in echo order.
pub const KEYS: &[&str] = &[
    "symbols",
    "bandwidth",
    "sigma1_sq",
    "snr_db",
    "gamma_p_offset_db",
    "gamma_d_offset_db",
    "gamma_ps_offset_db",
    "a_s",
    "sigma2_sq",
    "s_rcs",
    "range",
    "b_rms",
    "speed",
    "wavelength",
    "rho_p",
    "path_loss_mode",
    "capacity_form",
    "kappa",
    "eta",
    "u_c_th",
    "u_d_th",
    "n_samples",
    "seed",
    "stream_id",
    "mc_workers",
    "axis",
    "axis_start",
    "axis_stop",
    "axis_step",
    "efficiency_l_p",
];

fn parse<T: std::str::FromStr>(value: &str, what: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("expected {what}, got `{value}`"))
}

fn parse_real(value: &str) -> Result<f64, String> {
    let v: f64 = parse(value, "a number")?;
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl ScenarioConfig {
    /// Assigns one key. The error string does not name the key; callers add
    /// location context.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "symbols" => self.symbols = parse(value, "an integer")?,
            "bandwidth" => self.bandwidth = parse_real(value)?,
            "sigma1_sq" => self.sigma1_sq = parse_real(value)?,
            "snr_db" => self.snr_db = parse_real(value)?,
            "gamma_p_offset_db" => self.gamma_p_offset_db = parse_real(value)?,
            "gamma_d_offset_db" => self.gamma_d_offset_db = parse_real(value)?,
            "gamma_ps_offset_db" => self.gamma_ps_offset_db = parse_real(value)?,
            "a_s" => self.a_s = parse_real(value)?,
            "sigma2_sq" => self.sigma2_sq = parse_real(value)?,
            "s_rcs" => self.s_rcs = parse_real(value)?,
            "range" => self.range = parse_real(value)?,
            "b_rms" => self.b_rms = optional(value, parse_real)?,
            "speed" => self.speed = parse_real(value)?,
            "wavelength" => self.wavelength = parse_real(value)?,
            "rho_p" => self.rho_p = parse_real(value)?,
            "path_loss_mode" => {
                self.path_loss_mode = match value {
                    "spherical" | "eq3" => PathLoss::Spherical,
                    "none" | "strict_eq14" => PathLoss::None,
                    _ => return Err(format!("expected `spherical` or `none`, got `{value}`")),
                }
            }
            "capacity_form" => {
                self.capacity_form = match value {
                    "canonical" | "eq12_canonical" => CapacityForm::Canonical,
                    "as_printed" | "eq7_as_printed" => CapacityForm::AsPrinted,
                    _ => return Err(format!("expected `canonical` or `as_printed`, got `{value}`")),
                }
            }
            "kappa" => self.kappa = parse_real(value)?,
            "eta" => self.eta = parse_real(value)?,
            "u_c_th" => self.u_c_th = parse_real(value)?,
            "u_d_th" => self.u_d_th = parse_real(value)?,
            "n_samples" => self.n_samples = parse(value, "a positive integer")?,
            "seed" => self.seed = parse(value, "an unsigned 64-bit integer")?,
            "stream_id" => self.stream_id = parse(value, "an unsigned 64-bit integer")?,
            "mc_workers" => self.mc_workers = parse(value, "a nonnegative integer")?,
            "axis" => {
                self.axis = match value {
                    "pilots" => Axis::Pilots,
                    "snr" => Axis::Snr,
                    _ => return Err(format!("expected `pilots` or `snr`, got `{value}`")),
                }
            }
            "axis_start" => self.axis_start = optional(value, parse_real)?,
            "axis_stop" => self.axis_stop = optional(value, parse_real)?,
            "axis_step" => self.axis_step = optional(value, parse_real)?,
            "efficiency_l_p" => {
                self.efficiency_l_p = match value {
                    "opt" => PilotChoice::Optimal,
                    _ => PilotChoice::Fixed(parse(value, "`opt` or an integer")?),
                }
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Current value of `key` in the syntax [`set`](Self::set) accepts.
    /// Unset optional keys render as `auto`.
    pub fn get(&self, key: &str) -> Option<String> {
        let real = |v: f64| v.to_string();
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), real);
        Some(match key {
            "symbols" => self.symbols.to_string(),
            "bandwidth" => real(self.bandwidth),
            "sigma1_sq" => real(self.sigma1_sq),
            "snr_db" => real(self.snr_db),
            "gamma_p_offset_db" => real(self.gamma_p_offset_db),
            "gamma_d_offset_db" => real(self.gamma_d_offset_db),
            "gamma_ps_offset_db" => real(self.gamma_ps_offset_db),
            "a_s" => real(self.a_s),
            "sigma2_sq" => real(self.sigma2_sq),
            "s_rcs" => real(self.s_rcs),
            "range" => real(self.range),
            "b_rms" => opt(self.b_rms),
            "speed" => real(self.speed),
            "wavelength" => real(self.wavelength),
            "rho_p" => real(self.rho_p),
            "path_loss_mode" => match self.path_loss_mode {
                PathLoss::Spherical => "spherical".into(),
                PathLoss::None => "none".into(),
            },
            "capacity_form" => match self.capacity_form {
                CapacityForm::Canonical => "canonical".into(),
                CapacityForm::AsPrinted => "as_printed".into(),
            },
            "kappa" => real(self.kappa),
            "eta" => real(self.eta),
            "u_c_th" => real(self.u_c_th),
            "u_d_th" => real(self.u_d_th),
            "n_samples" => self.n_samples.to_string(),
            "seed" => self.seed.to_string(),
            "stream_id" => self.stream_id.to_string(),
            "mc_workers" => self.mc_workers.to_string(),
            "axis" => match self.axis {
                Axis::Pilots => "pilots".into(),
                Axis::Snr => "snr".into(),
            },
            "axis_start" => opt(self.axis_start),
            "axis_stop" => opt(self.axis_stop),
            "axis_step" => opt(self.axis_step),
            "efficiency_l_p" => match self.efficiency_l_p {
                PilotChoice::Optimal => "opt".into(),
                PilotChoice::Fixed(l) => l.to_string(),
            },
            _ => return None,
        })
    }

    /// Parses a config file body on top of the current values.
    pub fn apply_text(&mut self, text: &str, file: Option<&Path>) -> Result<(), ConfigError> {
        self.apply_text_tracked(text, file, &mut Vec::new())
    }

    fn apply_text_tracked(
        &mut self,
        text: &str,
        file: Option<&Path>,
        seen: &mut Vec<(String, Origin)>,
    ) -> Result<(), ConfigError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::File {
                path: file.map(Path::to_path_buf),
                line: idx + 1,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new(origin, line, "expected `key = value`"));
            };
            let key = key.trim();
            self.set(key, value)
                .map_err(|m| ConfigError::new(origin.clone(), key, m))?;
            seen.push((key.to_string(), origin));
        }
        Ok(())
    }

    /// Applies `--key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        self.apply_overrides_tracked(overrides, &mut Vec::new())
    }

    fn apply_overrides_tracked<S: AsRef<str>>(
        &mut self,
        overrides: &[S],
        seen: &mut Vec<(String, Origin)>,
    ) -> Result<(), ConfigError> {
        for raw in overrides {
            let raw = raw.as_ref();
            let origin = Origin::Override(raw.to_string());
            let body = raw
                .strip_prefix("--")
                .ok_or_else(|| ConfigError::new(origin.clone(), raw, "overrides take the form --key=value"))?;
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError::new(origin.clone(), body, "overrides take the form --key=value"))?;
            self.set(key, value)
                .map_err(|m| ConfigError::new(origin.clone(), key, m))?;
            seen.push((key.to_string(), origin));
        }
        Ok(())
    }

    /// Reads `config_file` (if any), applies `overrides` and validates.
    /// Validation failures point at the line or override that last set the
    /// offending key.
    pub fn load(config_file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
                path: path.to_path_buf(),
                source: e,
            })?;
            cfg.apply_text_tracked(&text, Some(path), &mut seen)?;
        }
        cfg.apply_overrides_tracked(overrides, &mut seen)?;
        match cfg.validate() {
            Err(CliError::Config(mut e)) if e.origin == Origin::Resolved => {
                let keys: &[&str] = match e.field.as_str() {
                    "gamma_p" => &["gamma_p_offset_db", "snr_db"],
                    "gamma_d" => &["gamma_d_offset_db", "snr_db"],
                    "gamma_ps" => &["gamma_ps_offset_db", "snr_db"],
                    other => &[other][..],
                };
                let last = seen.iter().rev().find(|(k, _)| keys.contains(&k.as_str()));
                if let Some((_, origin)) = last {
                    e.origin = origin.clone();
                }
                Err(CliError::Config(e))
            }
            other => other.map(|()| cfg),
        }
    }

    /// The fully resolved config, one `key = value` per line, that
    /// reproduces this run when read back.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("every listed key has a value");
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Link-specific SNRs in linear scale at scenario SNR `snr_db`:
    /// `(γ_p, γ_d, γ_ps)`.
    pub fn gammas_at(&self, snr_db: f64) -> (f64, f64, f64) {
        (
            db_to_linear(snr_db + self.gamma_p_offset_db),
            db_to_linear(snr_db + self.gamma_d_offset_db),
            db_to_linear(snr_db + self.gamma_ps_offset_db),
        )
    }

    pub fn slot(&self) -> Result<SlotConfig, CliError> {
        Ok(SlotConfig::new(self.symbols, 1, self.bandwidth)?)
    }

    pub fn comm_at(&self, snr_db: f64) -> Result<CommLink, CliError> {
        let (gp, gd, _) = self.gammas_at(snr_db);
        Ok(CommLink::new(self.sigma1_sq, gp, gd)?)
    }

    pub fn sense_at(&self, snr_db: f64) -> Result<SenseLink, CliError> {
        let (_, _, gps) = self.gammas_at(snr_db);
        let link = SenseLink {
            a_s: self.a_s,
            sigma2_sq: self.sigma2_sq,
            s_rcs: self.s_rcs,
            range: self.range,
            c: SPEED_OF_LIGHT,
            b_rms: self.b_rms.unwrap_or_else(|| rms_bandwidth_flat(self.bandwidth)),
            gamma_ps: gps,
            speed: self.speed,
            wavelength: self.wavelength,
            rho_p: self.rho_p,
            path_loss: self.path_loss_mode,
        };
        link.validate()?;
        Ok(link)
    }

    pub fn metric(&self) -> Result<MetricConfig, CliError> {
        Ok(MetricConfig::new(self.kappa, self.eta, self.u_c_th, self.u_d_th)?)
    }

    /// Monte Carlo spec on stream `stream_id + offset`.
    pub fn mc(&self, offset: u64) -> Result<McSpec, CliError> {
        Ok(McSpec::new(self.n_samples, self.seed, self.stream_id.wrapping_add(offset))?.with_workers(self.mc_workers))
    }

    /// Points of the sweep axis, inclusive of both ends.
    pub fn axis_values(&self) -> Result<Vec<f64>, CliError> {
        let (start, stop, step) = match self.axis {
            Axis::Snr => (
                self.axis_start.unwrap_or(-5.0),
                self.axis_stop.unwrap_or(25.0),
                self.axis_step.unwrap_or(1.0),
            ),
            Axis::Pilots => (
                self.axis_start.unwrap_or(1.0),
                self.axis_stop.unwrap_or((self.symbols - 1) as f64),
                self.axis_step.unwrap_or(1.0),
            ),
        };
        let bad = |field: &str, msg: String| CliError::Config(ConfigError::new(Origin::Resolved, field, msg));
        if !(step > 0.0 && step.is_finite()) {
            return Err(bad("axis_step", format!("must be positive, got {step}")));
        }
        if !(start.is_finite() && stop.is_finite()) || stop < start {
            return Err(bad("axis_stop", format!("axis range [{start}, {stop}] is empty")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let values: Vec<f64> = (0..count).map(|i| start + i as f64 * step).collect();
        if self.axis == Axis::Pilots {
            for &v in &values {
                if v.fract() != 0.0 || v < 1.0 || v > (self.symbols - 1) as f64 {
                    return Err(bad(
                        "axis",
                        format!("pilot axis value {v} is not an integer in 1..={}", self.symbols - 1),
                    ));
                }
            }
        }
        Ok(values)
    }

    /// Checks every component so errors surface before any output is
    /// written.
    pub fn validate(&self) -> Result<(), CliError> {
        self.slot()?;
        self.comm_at(self.snr_db)?;
        self.sense_at(self.snr_db)?;
        self.metric()?;
        self.mc(0)?;
        self.axis_values()?;
        if let PilotChoice::Fixed(l) = self.efficiency_l_p {
            if !(1..self.symbols).contains(&l) {
                return Err(CliError::Config(ConfigError::new(
                    Origin::Resolved,
                    "efficiency_l_p",
                    format!("must be `opt` or an integer in 1..={}", self.symbols - 1),
                )));
            }
        }
        Ok(())
    }
}

fn optional(value: &str, f: fn(&str) -> Result<f64, String>) -> Result<Option<f64>, String> {
    if value == "auto" {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Pilots => "pilots",
            Axis::Snr => "snr",
        })
    }
}

/// Default output location: `$ISAC_OUTPUT_DIR/<command>.csv`, or the
/// working directory when the variable is unset.
pub fn default_output(command: &str) -> PathBuf {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_default();
    dir.join(format!("{command}.csv"))
}

pub const OUTPUT_DIR_ENV: &str = "ISAC_OUTPUT_DIR";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let mut cfg = ScenarioConfig::default();
        let text = "# scenario\nsymbols = 20  # longer slot\n\n  snr_db=-3.5\npath_loss_mode = none\n";
        cfg.apply_text(text, None).unwrap();
        assert_eq!(cfg.symbols, 20);
        assert_eq!(cfg.snr_db, -3.5);
        assert_eq!(cfg.path_loss_mode, PathLoss::None);
    }

    #[test]
    fn reports_line_and_field() {
        let mut cfg = ScenarioConfig::default();
        let err = cfg
            .apply_text("symbols = 14\nkappa = lots\n", Some(Path::new("s.cfg")))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s.cfg:2"), "{msg}");
        assert!(msg.contains("kappa"), "{msg}");
        let err = cfg.apply_text("bogus = 1\n", None).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        assert!(cfg.apply_text("no equals sign\n", None).is_err());
    }

    #[test]
    fn overrides_apply_last() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_text("eta = 0.3\n", None).unwrap();
        cfg.apply_overrides(&["--eta=0.7", "--efficiency_l_p=5"]).unwrap();
        assert_eq!(cfg.eta, 0.7);
        assert_eq!(cfg.efficiency_l_p, PilotChoice::Fixed(5));
        assert!(cfg.apply_overrides(&["eta=0.1"]).is_err());
        assert!(cfg.apply_overrides(&["--eta"]).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_overrides(&[
            "--snr_db=0.1",
            "--b_rms=12345.678",
            "--capacity_form=as_printed",
            "--axis=pilots",
        ])
        .unwrap();
        let mut back = ScenarioConfig::default();
        back.apply_text(&cfg.echo(), None).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.echo().lines().count(), KEYS.len());
    }

    #[test]
    fn every_key_is_settable() {
        let cfg = ScenarioConfig::default();
        for key in KEYS {
            let mut copy = cfg.clone();
            copy.set(key, &cfg.get(key).unwrap()).unwrap();
            assert_eq!(copy, cfg, "{key}");
        }
    }

    #[test]
    fn default_snr_axis() {
        let v = ScenarioConfig::default().axis_values().unwrap();
        assert_eq!(v.len(), 31);
        assert_eq!(v[0], -5.0);
        assert_eq!(v[30], 25.0);
    }

    #[test]
    fn fractional_axis_hits_the_end() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_overrides(&["--axis_start=0", "--axis_stop=1", "--axis_step=0.1"])
            .unwrap();
        assert_eq!(cfg.axis_values().unwrap().len(), 11);
    }

    #[test]
    fn rejects_invalid_components() {
        for bad in [
            "--symbols=1",
            "--sigma1_sq=-1",
            "--eta=1",
            "--n_samples=0",
            "--axis_step=0",
            "--axis_start=30",
            "--efficiency_l_p=0",
            "--range=0",
        ] {
            let mut cfg = ScenarioConfig::default();
            cfg.apply_overrides(&[bad]).unwrap();
            assert!(cfg.validate().is_err(), "{bad}");
        }
        let mut cfg = ScenarioConfig::default();
        cfg.apply_overrides(&["--axis=pilots", "--axis_step=0.5"]).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn validation_errors_point_at_their_source() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.cfg");
        std::fs::write(&path, "symbols = 14\n\neta = 2\n").unwrap();
        let err = ScenarioConfig::load(Some(&path), &[]).unwrap_err().to_string();
        assert!(err.contains("s.cfg:3") && err.contains("eta"), "{err}");
        let err = ScenarioConfig::load(Some(&path), &["--eta=0.9".into(), "--kappa=-2".into()])
            .unwrap_err()
            .to_string();
        assert!(err.contains("--kappa=-2"), "{err}");
    }

    #[test]
    fn legacy_mode_names() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_overrides(&["--path_loss_mode=strict_eq14", "--capacity_form=eq7_as_printed"])
            .unwrap();
        assert_eq!(cfg.path_loss_mode, PathLoss::None);
        assert_eq!(cfg.capacity_form, CapacityForm::AsPrinted);
        cfg.apply_overrides(&["--path_loss_mode=eq3", "--capacity_form=eq12_canonical"])
            .unwrap();
        assert_eq!(cfg.path_loss_mode, PathLoss::Spherical);
        assert_eq!(cfg.capacity_form, CapacityForm::Canonical);
    }

    #[test]
    fn offsets_shift_each_link() {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_overrides(&["--gamma_d_offset_db=10"]).unwrap();
        let (gp, gd, gps) = cfg.gammas_at(0.0);
        assert_eq!((gp, gps), (1.0, 1.0));
        assert!((gd - 10.0).abs() < 1e-12);
    }
}
