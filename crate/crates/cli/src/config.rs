use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;
use swing_casimir_core::{
    three_mode_drive_frequency, CavityConfig, FrameTerms, ModeIndex, ProfileKind, ResonanceSearch,
    RotationProfile, SpeedRegime,
};

use crate::error::{CliError, Result};
use crate::table::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Sinusoidal,
    ConstantAcceleration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Complete,
    FirstOrder,
}

/// A mode as `"1,2,1"`, `"(1,2,1)"`, `"1-2-1"` or `[1, 2, 1]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ModeSpec {
    Triple([u32; 3]),
    Text(String),
}

impl ModeSpec {
    fn resolve(&self) -> Result<ModeIndex> {
        match self {
            ModeSpec::Triple([x, y, z]) => Ok(ModeIndex::new(*x, *y, *z)?),
            ModeSpec::Text(s) => Ok(ModeIndex::from_str(s)?),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PumpSpec {
    List(Vec<ModeSpec>),
    /// `"all"` or `"resonant"`.
    Keyword(String),
}

/// Which vacuum modes seed the direct runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Pumps {
    /// The resonant set, or `(1,1,n_z)` when nothing resonates.
    Resonant,
    /// Every mode of the truncated basis.
    All,
    List(Vec<ModeIndex>),
}

fn parse_pumps_flag(s: &str) -> Result<Pumps> {
    let s = s.trim();
    match s {
        "all" => return Ok(Pumps::All),
        "resonant" => return Ok(Pumps::Resonant),
        _ => {}
    }
    // modes separated by ';' or by whitespace, e.g. "1-1-1;1-2-1" or "1,1,1 1,2,1"
    let parts: Vec<&str> = if s.contains(';') {
        s.split(';').collect()
    } else {
        s.split_whitespace().collect()
    };
    let modes = parts
        .iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| ModeIndex::from_str(p.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if modes.is_empty() {
        return Err(CliError::Config("--pumps: no modes given".into()));
    }
    Ok(Pumps::List(modes))
}

/// JSON configuration document; every key is optional.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub length: Option<f64>,
    pub epsilon: Option<f64>,
    pub omega: Option<f64>,
    pub profile: Option<Profile>,
    pub acceleration: Option<f64>,
    pub frame: Option<Frame>,
    pub n_max: Option<u32>,
    pub n_z: Option<u32>,
    pub pumps: Option<PumpSpec>,
    pub fit_mode: Option<ModeSpec>,
    pub fit_window: Option<[f64; 2]>,
    pub t_f: Option<f64>,
    pub tau_f: Option<f64>,
    pub dt: Option<f64>,
    pub dtau: Option<f64>,
    pub sample_dt: Option<f64>,
    pub tol: Option<f64>,
    pub max_index: Option<u32>,
    pub include_difference: Option<bool>,
    pub rel_tol: Option<f64>,
    pub lambda_tol: Option<f64>,
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl FileConfig {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::ConfigParse {
            path: path.clone(),
            source,
        })
    }
}

/// Flags shared by every subcommand; each one overrides the matching config key.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    /// JSON config file
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Table format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Drive frequency
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Rotation amplitude (also sets the slow time tau = epsilon t)
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Cavity side length
    #[arg(long, global = true)]
    pub length: Option<f64>,
    /// Largest per-axis mode index kept in the direct basis
    #[arg(long = "nmax", global = true)]
    pub n_max: Option<u32>,
    /// z index of the simulated block
    #[arg(long = "nz", global = true)]
    pub n_z: Option<u32>,
    /// Final time
    #[arg(long = "tf", global = true)]
    pub t_f: Option<f64>,
    /// Final slow time
    #[arg(long = "tau-f", global = true)]
    pub tau_f: Option<f64>,
    /// Time step of the direct integration
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Slow-time step of the reduced integration
    #[arg(long, global = true)]
    pub dtau: Option<f64>,
    /// Time between stored samples
    #[arg(long, global = true)]
    pub sample_dt: Option<f64>,
    /// Resonance tolerance on |omega_a + omega_b - Omega|
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Largest index scanned for resonances
    #[arg(long, global = true)]
    pub max_index: Option<u32>,
    /// Also report difference matches omega_b - omega_a = Omega
    #[arg(long, global = true)]
    pub include_difference: bool,
    /// "all", "resonant", or modes separated by ';' or spaces
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub pumps: Option<String>,
    /// Mode whose particle number is fitted
    #[arg(long, global = true)]
    pub fit_mode: Option<String>,
    /// Slow-time fit window LO,HI
    #[arg(long, global = true, value_delimiter = ',', num_args = 2)]
    pub fit_window: Option<Vec<f64>>,
    /// Angle profile of the swing
    #[arg(long, global = true, value_enum)]
    pub profile: Option<Profile>,
    /// Angular acceleration for the constant-acceleration profile
    #[arg(long, global = true)]
    pub acceleration: Option<f64>,
    /// Drop the centrifugal term from the rotating-frame equations
    #[arg(long, global = true)]
    pub first_order_frame: bool,
    /// Relative tolerance on particle numbers in `compare`
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Relative tolerance on the fitted growth rate in `compare`
    #[arg(long, global = true)]
    pub lambda_tol: Option<f64>,
    /// Lowest sweep frequency (default 0.9 Omega)
    #[arg(long, global = true)]
    pub omega_min: Option<f64>,
    /// Highest sweep frequency (default 1.1 Omega)
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,
    /// Number of sweep points
    #[arg(long, global = true)]
    pub steps: Option<usize>,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub length: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub profile: Profile,
    pub acceleration: Option<f64>,
    pub frame: FrameTerms,
    pub n_max: u32,
    pub n_z: u32,
    pub pumps: Pumps,
    pub fit_mode: Option<ModeIndex>,
    pub fit_window: Option<(f64, f64)>,
    pub t_final: f64,
    pub dt: f64,
    pub dtau: f64,
    pub sample_dt: f64,
    pub tol: f64,
    pub max_index: u32,
    pub include_difference: bool,
    pub rel_tol: f64,
    pub lambda_tol: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

fn bad(name: &str, value: impl std::fmt::Display, requirement: &str) -> CliError {
    CliError::Config(format!("{name} = {value}: must be {requirement}"))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(name, v, "finite and > 0"))
    }
}

impl RunConfig {
    pub fn resolve(flags: &Overrides) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(file, flags)
    }

    pub fn merge(file: FileConfig, flags: &Overrides) -> Result<Self> {
        let length = positive("length", flags.length.or(file.length).unwrap_or(1.0))?;
        let epsilon = flags.epsilon.or(file.epsilon).unwrap_or(0.01);
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(bad("epsilon", epsilon, "finite and >= 0"));
        }
        let omega = positive(
            "omega",
            flags
                .omega
                .or(file.omega)
                .unwrap_or_else(|| three_mode_drive_frequency(length)),
        )?;
        let n_max = flags.n_max.or(file.n_max).unwrap_or(5);
        if n_max == 0 {
            return Err(bad("n_max", n_max, ">= 1"));
        }
        let n_z = flags.n_z.or(file.n_z).unwrap_or(1);
        if n_z == 0 {
            return Err(bad("n_z", n_z, ">= 1"));
        }

        let t_f = flags.t_f.or(file.t_f);
        let tau_f = flags.tau_f.or(file.tau_f);
        let t_final = match (t_f, tau_f) {
            (Some(t), Some(tau)) => {
                if (epsilon * t - tau).abs() > 1e-12 * tau.abs().max(1.0) {
                    return Err(CliError::Config(format!(
                        "t_f = {t} and tau_f = {tau} disagree for epsilon = {epsilon}"
                    )));
                }
                t
            }
            (Some(t), None) => t,
            (None, Some(tau)) if epsilon > 0.0 => tau / epsilon,
            (None, Some(tau)) => {
                return Err(CliError::Config(format!(
                    "tau_f = {tau} needs epsilon > 0; give t_f instead"
                )))
            }
            (None, None) if epsilon > 0.0 => 2.0 / epsilon,
            (None, None) => 200.0,
        };
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(bad("t_f", t_final, "finite and >= 0"));
        }

        let pumps = match (&flags.pumps, &file.pumps) {
            (Some(s), _) => parse_pumps_flag(s)?,
            (None, Some(PumpSpec::Keyword(k))) if k == "all" => Pumps::All,
            (None, Some(PumpSpec::Keyword(k))) if k == "resonant" => Pumps::Resonant,
            (None, Some(PumpSpec::Keyword(k))) => {
                return Err(bad("pumps", k, "\"all\", \"resonant\" or a list of modes"))
            }
            (None, Some(PumpSpec::List(list))) => {
                Pumps::List(list.iter().map(ModeSpec::resolve).collect::<Result<_>>()?)
            }
            (None, None) => Pumps::Resonant,
        };
        let fit_mode = match (&flags.fit_mode, &file.fit_mode) {
            (Some(s), _) => Some(ModeIndex::from_str(s)?),
            (None, Some(spec)) => Some(spec.resolve()?),
            (None, None) => None,
        };
        let fit_window = match (&flags.fit_window, file.fit_window) {
            (Some(v), _) => Some((v[0], v[1])),
            (None, Some([lo, hi])) => Some((lo, hi)),
            (None, None) => None,
        };
        if let Some((lo, hi)) = fit_window {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(bad("fit_window", format!("[{lo}, {hi}]"), "0 <= lo < hi"));
            }
        }

        let tol = flags
            .tol
            .or(file.tol)
            .unwrap_or_else(|| ResonanceSearch::default_tol(length));
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(bad("tol", tol, "finite and >= 0"));
        }
        let max_index = flags.max_index.or(file.max_index).unwrap_or(n_max);
        if max_index == 0 {
            return Err(bad("max_index", max_index, ">= 1"));
        }

        let omega_min = positive(
            "omega_min",
            flags.omega_min.or(file.omega_min).unwrap_or(0.9 * omega),
        )?;
        let omega_max = positive(
            "omega_max",
            flags.omega_max.or(file.omega_max).unwrap_or(1.1 * omega),
        )?;
        if omega_min > omega_max {
            return Err(bad("omega_min", omega_min, "<= omega_max"));
        }
        let steps = flags.steps.or(file.steps).unwrap_or(21);
        if steps == 0 {
            return Err(bad("steps", steps, ">= 1"));
        }
        let acceleration = flags.acceleration.or(file.acceleration);
        if let Some(a) = acceleration {
            if !a.is_finite() {
                return Err(bad("acceleration", a, "finite"));
            }
        }

        let frame = if flags.first_order_frame {
            FrameTerms::FirstOrder
        } else {
            match file.frame {
                Some(Frame::FirstOrder) => FrameTerms::FirstOrder,
                _ => FrameTerms::Complete,
            }
        };

        Ok(Self {
            length,
            epsilon,
            omega,
            profile: flags
                .profile
                .or(file.profile)
                .unwrap_or(Profile::Sinusoidal),
            acceleration,
            frame,
            n_max,
            n_z,
            pumps,
            fit_mode,
            fit_window,
            t_final,
            dt: positive("dt", flags.dt.or(file.dt).unwrap_or(0.005))?,
            dtau: positive("dtau", flags.dtau.or(file.dtau).unwrap_or(1e-4))?,
            sample_dt: positive(
                "sample_dt",
                flags.sample_dt.or(file.sample_dt).unwrap_or(0.1),
            )?,
            tol,
            max_index,
            include_difference: flags.include_difference
                || file.include_difference.unwrap_or(false),
            rel_tol: positive("rel_tol", flags.rel_tol.or(file.rel_tol).unwrap_or(0.05))?,
            lambda_tol: positive(
                "lambda_tol",
                flags.lambda_tol.or(file.lambda_tol).unwrap_or(0.05),
            )?,
            omega_min,
            omega_max,
            steps,
            out: flags.out.clone().or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Csv),
        })
    }

    pub fn tau_final(&self) -> f64 {
        self.epsilon * self.t_final
    }

    /// Default fit window: the last three quarters of the run.
    pub fn window(&self) -> (f64, f64) {
        self.fit_window
            .unwrap_or((0.25 * self.tau_final(), self.tau_final()))
    }

    /// Constant acceleration defaults to the value whose final rate matches
    /// the peak rate `εΩ` of the sinusoidal drive.
    pub fn acceleration_value(&self) -> f64 {
        self.acceleration.unwrap_or_else(|| {
            if self.t_final > 0.0 {
                self.epsilon * self.omega / self.t_final
            } else {
                0.0
            }
        })
    }

    pub fn rotation(&self, omega: f64) -> RotationProfile {
        match self.profile {
            Profile::Sinusoidal => RotationProfile::Sinusoidal {
                amplitude: self.epsilon,
                frequency: omega,
            },
            Profile::ConstantAcceleration => RotationProfile::ConstantAcceleration {
                acceleration: self.acceleration_value(),
            },
        }
    }

    /// Rejects superluminal walls; returns the wall speed when it is large
    /// enough to deserve a warning.
    pub fn check_speed(&self, omega: f64) -> Result<Option<f64>> {
        let cavity = CavityConfig {
            length: self.length,
            epsilon: self.rotation(omega).max_rate(self.t_final) / omega,
            omega,
            profile: ProfileKind::Sinusoidal,
        };
        Ok(match cavity.validate()? {
            SpeedRegime::Marginal { speed } => Some(speed),
            SpeedRegime::Slow => None,
        })
    }

    pub fn profile_name(&self) -> &'static str {
        match self.profile {
            Profile::Sinusoidal => "sinusoidal",
            Profile::ConstantAcceleration => "constant_acceleration",
        }
    }

    pub fn frame_name(&self) -> &'static str {
        match self.frame {
            FrameTerms::Complete => "complete",
            FrameTerms::FirstOrder => "first_order",
        }
    }
}

pub fn warn_speed(speed: Option<f64>) {
    if let Some(speed) = speed {
        log::warn!(
            "wall speed {speed:.3} exceeds {}; the perturbative treatment may be inaccurate",
            CavityConfig::WARN_SPEED
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: u32, y: u32, z: u32) -> ModeIndex {
        ModeIndex::new(x, y, z).unwrap()
    }

    #[test]
    fn defaults_follow_the_worked_example() {
        let cfg = RunConfig::merge(FileConfig::default(), &Overrides::default()).unwrap();
        assert_eq!(cfg.length, 1.0);
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.omega, three_mode_drive_frequency(1.0));
        assert_eq!((cfg.n_max, cfg.n_z), (5, 1));
        assert!((cfg.t_final - 200.0).abs() < 1e-9);
        assert_eq!(cfg.pumps, Pumps::Resonant);
        assert_eq!(cfg.window(), (0.5, 2.0));
        assert_eq!(cfg.frame, FrameTerms::Complete);
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig =
            serde_json::from_str(r#"{"epsilon": 0.02, "n_max": 3, "pumps": [[1,1,1], "1-2-1"]}"#)
                .unwrap();
        let flags = Overrides {
            n_max: Some(4),
            ..Default::default()
        };
        let cfg = RunConfig::merge(file, &flags).unwrap();
        assert_eq!(cfg.epsilon, 0.02);
        assert_eq!(cfg.n_max, 4);
        assert_eq!(cfg.pumps, Pumps::List(vec![m(1, 1, 1), m(1, 2, 1)]));
        assert!((cfg.t_final - 100.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"epsilon": 0.01, "nmax": 3}"#).is_err());
    }

    #[test]
    fn pump_flag_forms() {
        assert_eq!(parse_pumps_flag("all").unwrap(), Pumps::All);
        assert_eq!(
            parse_pumps_flag("1-1-1;(1,2,1)").unwrap(),
            Pumps::List(vec![m(1, 1, 1), m(1, 2, 1)])
        );
        assert_eq!(
            parse_pumps_flag("1,1,1 2,1,1").unwrap(),
            Pumps::List(vec![m(1, 1, 1), m(2, 1, 1)])
        );
        assert!(parse_pumps_flag("1,0,1").is_err());
        assert!(parse_pumps_flag(" ").is_err());
    }

    #[test]
    fn violated_bounds_are_named() {
        let check = |flags: Overrides, name: &str| {
            let err = RunConfig::merge(FileConfig::default(), &flags)
                .unwrap_err()
                .to_string();
            assert!(err.contains(name), "{err}");
        };
        check(
            Overrides {
                dt: Some(0.0),
                ..Default::default()
            },
            "dt",
        );
        check(
            Overrides {
                epsilon: Some(-1.0),
                ..Default::default()
            },
            "epsilon",
        );
        check(
            Overrides {
                n_max: Some(0),
                ..Default::default()
            },
            "n_max",
        );
        check(
            Overrides {
                length: Some(f64::NAN),
                ..Default::default()
            },
            "length",
        );
        check(
            Overrides {
                t_f: Some(10.0),
                tau_f: Some(1.0),
                ..Default::default()
            },
            "disagree",
        );
        check(
            Overrides {
                epsilon: Some(0.0),
                tau_f: Some(1.0),
                ..Default::default()
            },
            "tau_f",
        );
        check(
            Overrides {
                fit_window: Some(vec![2.0, 1.0]),
                ..Default::default()
            },
            "fit_window",
        );
    }

    #[test]
    fn tau_f_sets_duration() {
        let flags = Overrides {
            tau_f: Some(1.0),
            ..Default::default()
        };
        let cfg = RunConfig::merge(FileConfig::default(), &flags).unwrap();
        assert!((cfg.t_final - 100.0).abs() < 1e-9);
        assert_eq!(cfg.tau_final(), 1.0);
    }

    #[test]
    fn superluminal_drive_is_rejected() {
        let flags = Overrides {
            epsilon: Some(0.5),
            ..Default::default()
        };
        let cfg = RunConfig::merge(FileConfig::default(), &flags).unwrap();
        assert!(cfg.check_speed(cfg.omega).is_err());
        let cfg = RunConfig::merge(FileConfig::default(), &Overrides::default()).unwrap();
        assert!(cfg.check_speed(cfg.omega).is_ok());
    }

    #[test]
    fn matched_acceleration() {
        let flags = Overrides {
            profile: Some(Profile::ConstantAcceleration),
            ..Default::default()
        };
        let cfg = RunConfig::merge(FileConfig::default(), &flags).unwrap();
        let rate = cfg.rotation(cfg.omega).max_rate(cfg.t_final);
        assert!((rate - cfg.epsilon * cfg.omega).abs() < 1e-12);
    }
}
