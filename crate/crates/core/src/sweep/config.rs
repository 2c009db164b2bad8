//! Flat key-value configuration.
//!
//! One `key = value` per line; blank lines and lines starting with `#` are
//! ignored. Lists are comma separated. Keys are matched exactly, unknown or
//! repeated keys are errors, and `protocol` and `detection` are required.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::channel::{DetectionMode, DetectorParams, LinkParams};
use crate::error::{Error, Result};
use crate::modulation::ModulationScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    Psk4,
    Psk8,
    Gaussian,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Psk4 => "PSK4",
            Protocol::Psk8 => "PSK8",
            Protocol::Gaussian => "Gaussian",
        }
    }

    pub fn scheme(self, va: f64) -> Result<ModulationScheme> {
        match self {
            Protocol::Psk4 => ModulationScheme::psk_with_variance(4, va),
            Protocol::Psk8 => ModulationScheme::psk_with_variance(8, va),
            Protocol::Gaussian => ModulationScheme::gaussian(va),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "psk4" => Some(Protocol::Psk4),
            "psk8" => Some(Protocol::Psk8),
            "gaussian" => Some(Protocol::Gaussian),
            _ => None,
        }
    }
}

fn parse_detection(s: &str) -> Option<DetectionMode> {
    match s.to_ascii_lowercase().as_str() {
        "homodyne" => Some(DetectionMode::Homodyne),
        "heterodyne" => Some(DetectionMode::Heterodyne),
        _ => None,
    }
}

/// Which conditional-spectrum computation a sweep uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathChoice {
    ClosedForm,
    Matrix,
    /// Report the matrix path and fail if the closed form disagrees.
    Both,
}

impl PathChoice {
    pub fn name(self) -> &'static str {
        match self {
            PathChoice::ClosedForm => "ClosedForm",
            PathChoice::Matrix => "Matrix",
            PathChoice::Both => "Both",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "closedform" => Some(PathChoice::ClosedForm),
            "matrix" => Some(PathChoice::Matrix),
            "both" => Some(PathChoice::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VaSetting {
    Fixed(f64),
    Optimize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DistanceGrid {
    /// `start, start + step, …` up to `stop`, which is included when it lies
    /// on the grid (to within a part in 10⁹ of a step).
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocols: Vec<Protocol>,
    pub detections: Vec<DetectionMode>,
    pub va: VaSetting,
    pub beta: f64,
    pub eta: f64,
    pub eps_ele: f64,
    pub mu_db_per_km: f64,
    pub excess_noise: Vec<f64>,
    pub distance: DistanceGrid,
    pub path: PathChoice,
    pub seed: u64,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            protocols: vec![Protocol::Psk8],
            detections: vec![DetectionMode::Homodyne],
            va: VaSetting::Fixed(1.0),
            beta: 0.8,
            eta: 0.6,
            eps_ele: 0.05,
            mu_db_per_km: 0.2,
            excess_noise: vec![0.005, 0.01, 0.02],
            distance: DistanceGrid {
                start: 0.0,
                stop: 150.0,
                step: 1.0,
            },
            path: PathChoice::ClosedForm,
            seed: 0,
            output: None,
        }
    }
}

pub const KEYS: [&str; 12] = [
    "protocol",
    "detection",
    "V_A",
    "beta",
    "eta",
    "eps_ele",
    "mu_db_per_km",
    "excess_noise_list",
    "distance_km",
    "path",
    "seed",
    "output",
];

pub const REQUIRED_KEYS: [&str; 2] = ["protocol", "detection"];

fn number(key: &str, value: &str) -> Result<f64> {
    let x: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("expected a number, got {value:?}")))?;
    if !x.is_finite() {
        return Err(Error::config(key, format!("{value:?} is not finite")));
    }
    Ok(x)
}

fn list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(str::trim)
        .map(|s| {
            if s.is_empty() {
                Err(Error::config(key, "empty list entry"))
            } else {
                item(s)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(items)
}

impl SweepConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "protocol" => {
                self.protocols = list(key, value, |s| {
                    Protocol::parse(s).ok_or_else(|| {
                        Error::config(
                            key,
                            format!("unknown protocol {s:?} (PSK4, PSK8, Gaussian)"),
                        )
                    })
                })?
            }
            "detection" => {
                self.detections = list(key, value, |s| {
                    parse_detection(s).ok_or_else(|| {
                        Error::config(
                            key,
                            format!("unknown detection {s:?} (homodyne, heterodyne)"),
                        )
                    })
                })?
            }
            "V_A" => {
                self.va = if value.eq_ignore_ascii_case("optimize") {
                    VaSetting::Optimize
                } else {
                    VaSetting::Fixed(number(key, value)?)
                }
            }
            "beta" => self.beta = number(key, value)?,
            "eta" => self.eta = number(key, value)?,
            "eps_ele" => self.eps_ele = number(key, value)?,
            "mu_db_per_km" => self.mu_db_per_km = number(key, value)?,
            "excess_noise_list" => self.excess_noise = list(key, value, |s| number(key, s))?,
            "distance_km" => {
                let parts: Vec<&str> = value.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::config(key, "expected start:stop:step"));
                }
                self.distance = DistanceGrid {
                    start: number(key, parts[0])?,
                    stop: number(key, parts[1])?,
                    step: number(key, parts[2])?,
                };
            }
            "path" => {
                self.path = PathChoice::parse(value).ok_or_else(|| {
                    Error::config(
                        key,
                        format!("unknown path {value:?} (ClosedForm, Matrix, Both)"),
                    )
                })?
            }
            "seed" => {
                self.seed = value.parse().map_err(|_| {
                    Error::config(key, format!("expected an integer ≥ 0, got {value:?}"))
                })?
            }
            "output" => {
                if value.is_empty() {
                    return Err(Error::config(key, "empty path"));
                }
                self.output = (value != "-").then(|| PathBuf::from(value));
            }
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Range checks across fields.
    pub fn validate(&self) -> Result<()> {
        if self.protocols.is_empty() {
            return Err(Error::config("protocol", "no protocol given"));
        }
        if self.detections.is_empty() {
            return Err(Error::config("detection", "no detection given"));
        }
        if let VaSetting::Fixed(va) = self.va {
            if va < 0.0 {
                return Err(Error::config("V_A", format!("{va} < 0")));
            }
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config(
                "beta",
                format!("{} outside [0, 1]", self.beta),
            ));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::config("eta", format!("{} outside (0, 1]", self.eta)));
        }
        if self.eps_ele < 0.0 {
            return Err(Error::config("eps_ele", format!("{} < 0", self.eps_ele)));
        }
        if self.mu_db_per_km < 0.0 {
            return Err(Error::config(
                "mu_db_per_km",
                format!("{} < 0", self.mu_db_per_km),
            ));
        }
        if let Some(eps) = self.excess_noise.iter().find(|&&e| e < 0.0) {
            return Err(Error::config("excess_noise_list", format!("{eps} < 0")));
        }
        let d = self.distance;
        if d.start < 0.0 {
            return Err(Error::config(
                "distance_km",
                format!("start {} < 0", d.start),
            ));
        }
        if !(d.step > 0.0) {
            return Err(Error::config(
                "distance_km",
                format!("step {} must be > 0", d.step),
            ));
        }
        if d.stop < d.start {
            return Err(Error::config(
                "distance_km",
                format!("stop {} < start {}", d.stop, d.start),
            ));
        }
        Ok(())
    }

    pub fn detector(&self, mode: DetectionMode) -> Result<DetectorParams> {
        DetectorParams::new(mode, self.eta, self.eps_ele)
    }

    pub fn link(&self, length_km: f64, excess_noise: f64) -> Result<LinkParams> {
        LinkParams::new(length_km, self.mu_db_per_km, excess_noise)
    }

    /// Every key with its value, in the canonical order. Parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line(
            "protocol",
            join(self.protocols.iter().map(|p| p.name().into()).collect()),
        );
        line(
            "detection",
            join(self.detections.iter().map(|d| d.name().into()).collect()),
        );
        line(
            "V_A",
            match self.va {
                VaSetting::Fixed(va) => format!("{va}"),
                VaSetting::Optimize => "optimize".into(),
            },
        );
        line("beta", format!("{}", self.beta));
        line("eta", format!("{}", self.eta));
        line("eps_ele", format!("{}", self.eps_ele));
        line("mu_db_per_km", format!("{}", self.mu_db_per_km));
        line(
            "excess_noise_list",
            join(self.excess_noise.iter().map(|e| format!("{e}")).collect()),
        );
        let d = self.distance;
        line("distance_km", format!("{}:{}:{}", d.start, d.stop, d.step));
        line("path", self.path.name().into());
        line("seed", self.seed.to_string());
        line(
            "output",
            match &self.output {
                Some(p) => p.display().to_string(),
                None => "-".into(),
            },
        );
        out
    }
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut config = SweepConfig::default();
    let mut seen: Vec<String> = vec![];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                format!("line {}", lineno + 1),
                format!("expected key = value, got {line:?}"),
            )
        })?;
        let key = key.trim();
        if seen.iter().any(|k| k == key) {
            return Err(Error::config(key, "given more than once"));
        }
        config.set(key, value)?;
        seen.push(key.to_string());
    }
    for key in REQUIRED_KEYS {
        if !seen.iter().any(|k| k == key) {
            return Err(Error::config(key, "missing required key"));
        }
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let default = SweepConfig::default();
        assert_eq!(parse_config(&default.to_config_string()).unwrap(), default);
    }

    #[test]
    fn lists_and_options_round_trip() {
        let mut c = SweepConfig::default();
        c.protocols = vec![Protocol::Psk4, Protocol::Gaussian];
        c.detections = vec![DetectionMode::Heterodyne, DetectionMode::Homodyne];
        c.va = VaSetting::Optimize;
        c.excess_noise = vec![0.1 + 0.2];
        c.distance = DistanceGrid {
            start: 2.5,
            stop: 7.25,
            step: 0.3,
        };
        c.path = PathChoice::Both;
        c.seed = u64::MAX;
        c.output = Some("out dir/rates.csv".into());
        assert_eq!(parse_config(&c.to_config_string()).unwrap(), c);
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let c = parse_config("# comment\n\nprotocol = psk4\ndetection=Heterodyne\n").unwrap();
        assert_eq!(c.protocols, vec![Protocol::Psk4]);
        assert_eq!(c.detections, vec![DetectionMode::Heterodyne]);
        assert_eq!(c.beta, 0.8);
        assert_eq!(c.excess_noise, vec![0.005, 0.01, 0.02]);
    }

    fn config_error_key(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(config_error_key("protocol = PSK8\n"), "detection");
        assert_eq!(config_error_key("detection = homodyne\n"), "protocol");
        let base = "protocol = PSK8\ndetection = homodyne\n";
        assert_eq!(config_error_key(&format!("{base}betta = 0.8\n")), "betta");
        assert_eq!(config_error_key(&format!("{base}beta = 1.5\n")), "beta");
        assert_eq!(config_error_key(&format!("{base}eta = 0\n")), "eta");
        assert_eq!(
            config_error_key(&format!("{base}beta = 0.8\nbeta = 0.9\n")),
            "beta"
        );
        assert_eq!(
            config_error_key(&format!("{base}distance_km = 10:0:1\n")),
            "distance_km"
        );
        assert_eq!(
            config_error_key(&format!("{base}distance_km = 0:10:0\n")),
            "distance_km"
        );
        assert_eq!(
            config_error_key(&format!("{base}distance_km = 0:10\n")),
            "distance_km"
        );
        assert_eq!(
            config_error_key(&format!("{base}excess_noise_list = 0.01,,0.02\n")),
            "excess_noise_list"
        );
        assert_eq!(config_error_key(&format!("{base}V_A = nan\n")), "V_A");
        assert_eq!(config_error_key(&format!("{base}seed = -1\n")), "seed");
        assert_eq!(
            config_error_key(&format!("{base}path = both ways\n")),
            "path"
        );
        assert_eq!(
            config_error_key("protocol = PSK16\ndetection = homodyne\n"),
            "protocol"
        );
        assert_eq!(config_error_key("protocol PSK8\n"), "line 1");
    }

    #[test]
    fn grid_points() {
        let g = DistanceGrid {
            start: 0.0,
            stop: 150.0,
            step: 1.0,
        };
        let p = g.points();
        assert_eq!(p.len(), 151);
        assert_eq!(p[150], 150.0);
        let single = DistanceGrid {
            start: 20.0,
            stop: 20.0,
            step: 5.0,
        };
        assert_eq!(single.points(), vec![20.0]);
        let tenth = DistanceGrid {
            start: 0.0,
            stop: 1.0,
            step: 0.1,
        };
        assert_eq!(tenth.points().len(), 11);
        let ragged = DistanceGrid {
            start: 0.0,
            stop: 10.0,
            step: 3.0,
        };
        assert_eq!(ragged.points(), vec![0.0, 3.0, 6.0, 9.0]);
    }
}
