//! Run configuration: defaults, `key = value` files and command-line flags,
//! merged in that order of increasing precedence.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use contractive_core::grid::DEFAULT_POINTS;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown format '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub s0: Vec<f64>,
    pub phi0: Vec<f64>,
    pub t_max: f64,
    pub t_steps: usize,
    pub out: PathBuf,
    pub format: Format,
    /// Newton target residual; `None` keeps the solver default.
    pub tol_residual: Option<f64>,
    pub grid_n: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            s0: vec![0.5],
            phi0: vec![PI / 4.0, PI / 2.0, PI],
            t_max: 5.0,
            t_steps: 50,
            out: PathBuf::from("."),
            format: Format::Csv,
            tol_residual: None,
            grid_n: DEFAULT_POINTS,
        }
    }
}

/// Settings that may or may not be given by one layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartialConfig {
    pub s0: Option<Vec<f64>>,
    pub phi0: Option<Vec<f64>>,
    pub t_max: Option<f64>,
    pub t_steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol_residual: Option<f64>,
    pub grid_n: Option<usize>,
}

impl PartialConfig {
    /// Fields set here win over `lower`.
    pub fn over(self, lower: PartialConfig) -> PartialConfig {
        PartialConfig {
            s0: self.s0.or(lower.s0),
            phi0: self.phi0.or(lower.phi0),
            t_max: self.t_max.or(lower.t_max),
            t_steps: self.t_steps.or(lower.t_steps),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
            tol_residual: self.tol_residual.or(lower.tol_residual),
            grid_n: self.grid_n.or(lower.grid_n),
        }
    }

    pub fn resolve(self, defaults: RunConfig) -> Result<RunConfig, CliError> {
        let cfg = RunConfig {
            s0: self.s0.unwrap_or(defaults.s0),
            phi0: self.phi0.unwrap_or(defaults.phi0),
            t_max: self.t_max.unwrap_or(defaults.t_max),
            t_steps: self.t_steps.unwrap_or(defaults.t_steps),
            out: self.out.unwrap_or(defaults.out),
            format: self.format.unwrap_or(defaults.format),
            tol_residual: self.tol_residual.or(defaults.tol_residual),
            grid_n: self.grid_n.unwrap_or(defaults.grid_n),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are skipped;
    /// list values are comma separated.
    pub fn parse_file_contents(text: &str) -> Result<PartialConfig, CliError> {
        let mut cfg = PartialConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got '{line}'")))?;
            let (key, value) = (key.trim().replace('-', "_"), value.trim());
            let number = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("'{v}' is not a number")));
            let count = |v: &str| v.parse::<usize>().map_err(|_| bad(format!("'{v}' is not a count")));
            match key.as_str() {
                "s0" => cfg.s0 = Some(value.split(',').map(|v| number(v.trim())).collect::<Result<_, _>>()?),
                "phi0" => {
                    cfg.phi0 = Some(
                        value
                            .split(',')
                            .map(|v| parse_angle(v.trim()).map_err(&bad))
                            .collect::<Result<_, _>>()?,
                    )
                }
                "t_max" => cfg.t_max = Some(number(value)?),
                "t_steps" => cfg.t_steps = Some(count(value)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                "format" => cfg.format = Some(value.parse()?),
                "tol_residual" => cfg.tol_residual = Some(number(value)?),
                "grid_n" => cfg.grid_n = Some(count(value)?),
                other => return Err(bad(format!("unknown key '{other}'"))),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<PartialConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.s0.is_empty() || self.s0.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return usage(format!("s0 values must be finite and non-negative, got {:?}", self.s0));
        }
        if self.phi0.is_empty() || self.phi0.iter().any(|p| !p.is_finite()) {
            return usage("at least one finite phi0 is required".into());
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return usage(format!("t-max must be positive, got {}", self.t_max));
        }
        if self.t_steps < 2 {
            return usage(format!("t-steps must be at least 2, got {}", self.t_steps));
        }
        if let Some(tol) = self.tol_residual {
            if !(tol.is_finite() && tol > 0.0) {
                return usage(format!("tol-residual must be positive, got {tol}"));
            }
        }
        if self.grid_n < 16 || !self.grid_n.is_multiple_of(2) {
            return usage(format!("grid-n must be even and at least 16, got {}", self.grid_n));
        }
        Ok(())
    }
}

/// Angle in radians from plain numbers or multiples of pi: `1.2`, `pi`,
/// `-0.25pi`, `pi/4`, `3pi/4`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.trim().to_lowercase().replace('π', "pi").split_whitespace().collect();
    let err = || format!("cannot parse angle '{text}'");
    let Some((coef, rest)) = s.split_once("pi") else {
        return s.parse::<f64>().map_err(|_| err());
    };
    let coef = coef.strip_suffix('*').unwrap_or(coef);
    let c = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| err())?,
    };
    let d = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(err)?,
    };
    let v = c * PI / d;
    v.is_finite().then_some(v).ok_or_else(err)
}

/// Short label for an angle, as a multiple of pi where that is exact enough.
pub fn angle_label(phi: f64) -> String {
    let m = phi / PI;
    let rounded = (m * 1e6).round() / 1e6;
    let mut s = format!("{rounded:.6}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    format!("{s}pi")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("0.4*pi").unwrap(), 0.4 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("2pi3").is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(angle_label(PI / 4.0), "0.25pi");
        assert_eq!(angle_label(PI), "1pi");
        assert_eq!(angle_label(0.4 * PI), "0.4pi");
        assert_eq!(angle_label(0.0), "0pi");
    }

    #[test]
    fn file_parsing() {
        let text = "# comment\ns0 = 0.25, 1\nphi0 = pi/2, 0.4pi # trailing\nt-max=3\nformat = both\n";
        let cfg = PartialConfig::parse_file_contents(text).unwrap();
        assert_eq!(cfg.s0, Some(vec![0.25, 1.0]));
        assert_eq!(cfg.phi0, Some(vec![PI / 2.0, 0.4 * PI]));
        assert_eq!(cfg.t_max, Some(3.0));
        assert_eq!(cfg.format, Some(Format::Both));
        assert!(PartialConfig::parse_file_contents("bogus = 1").is_err());
        assert!(PartialConfig::parse_file_contents("t_max 3").is_err());
        assert!(PartialConfig::parse_file_contents("t_steps = -1").is_err());
    }

    #[test]
    fn precedence() {
        let file = PartialConfig { t_max: Some(3.0), t_steps: Some(20), ..Default::default() };
        let cli = PartialConfig { t_max: Some(7.0), ..Default::default() };
        let cfg = cli.over(file).resolve(RunConfig::default()).unwrap();
        assert_eq!((cfg.t_max, cfg.t_steps, cfg.s0.clone()), (7.0, 20, vec![0.5]));
    }

    #[test]
    fn validation() {
        let bad = |p: PartialConfig| p.resolve(RunConfig::default()).is_err();
        assert!(bad(PartialConfig { t_steps: Some(1), ..Default::default() }));
        assert!(bad(PartialConfig { t_max: Some(0.0), ..Default::default() }));
        assert!(bad(PartialConfig { phi0: Some(vec![]), ..Default::default() }));
        assert!(bad(PartialConfig { s0: Some(vec![-1.0]), ..Default::default() }));
        assert!(bad(PartialConfig { grid_n: Some(33), ..Default::default() }));
        assert!(bad(PartialConfig { tol_residual: Some(0.0), ..Default::default() }));
    }
}
