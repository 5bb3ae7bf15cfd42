//! Run configuration: tolerances, contour parameters, output paths and the
//! sampling seed, merged from defaults, a key=value config file, environment
//! variables (DUFFING_* prefix) and command-line flags in that order.

use crate::error::{Error, Result};
use crate::picard_fuchs::OdeTol;
use crate::zero_counter::KeyholeContour;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub quad_rtol: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub ode_max_steps: usize,
    pub extrap_tol: f64,
    pub winding_defect_tol: f64,
    pub clearance: f64,
    pub contour_radius: f64,
    pub contour_delta: f64,
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quad_rtol: 1e-12,
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            ode_max_steps: 1_000_000,
            extrap_tol: 1e-6,
            winding_defect_tol: 1e-3,
            clearance: 0.05,
            contour_radius: 50.0,
            contour_delta: 1e-3,
            jobs: 0, // 0 = all available cores
            seed: 7,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("quad_rtol", self.quad_rtol),
            ("ode_rtol", self.ode_rtol),
            ("ode_atol", self.ode_atol),
            ("extrap_tol", self.extrap_tol),
            ("winding_defect_tol", self.winding_defect_tol),
            ("clearance", self.clearance),
        ];
        for (name, v) in pos {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.contour_radius > 1.0) {
            return Err(Error::InvalidInput("contour_radius must exceed 1".into()));
        }
        if !(self.contour_delta > 0.0 && self.contour_delta < 0.125) {
            return Err(Error::InvalidInput("contour_delta must lie in (0, 1/8)".into()));
        }
        Ok(())
    }

    pub fn ode_tol(&self) -> OdeTol {
        OdeTol { rtol: self.ode_rtol, atol: self.ode_atol, max_steps: self.ode_max_steps }
    }

    pub fn contour(&self) -> KeyholeContour {
        KeyholeContour {
            radius: self.contour_radius,
            delta: self.contour_delta,
            ..KeyholeContour::default()
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f = |v: &str| -> Result<f64> {
            v.trim().parse().map_err(|_| Error::InvalidInput(format!("bad number: {v}")))
        };
        match key {
            "quad_rtol" => self.quad_rtol = parse_f(value)?,
            "ode_rtol" => self.ode_rtol = parse_f(value)?,
            "ode_atol" => self.ode_atol = parse_f(value)?,
            "ode_max_steps" => {
                self.ode_max_steps = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad integer: {value}")))?
            }
            "extrap_tol" => self.extrap_tol = parse_f(value)?,
            "winding_defect_tol" => self.winding_defect_tol = parse_f(value)?,
            "clearance" => self.clearance = parse_f(value)?,
            "contour_radius" => self.contour_radius = parse_f(value)?,
            "contour_delta" => self.contour_delta = parse_f(value)?,
            "jobs" => {
                self.jobs = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad integer: {value}")))?
            }
            "seed" => {
                self.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad integer: {value}")))?
            }
            other => return Err(Error::InvalidInput(format!("unknown config key: {other}"))),
        }
        Ok(())
    }

    /// Apply a key=value config file (# starts a comment line).
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("config {}: {e}", path.display())))?;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("config line {}: {line}", ln + 1)))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Apply DUFFING_<KEY> environment overrides (reserved for CI tolerance
    /// tweaks); unknown DUFFING_ variables are rejected.
    pub fn apply_env(&mut self) -> Result<()> {
        let vars: BTreeMap<String, String> = std::env::vars()
            .filter(|(k, _)| k.starts_with("DUFFING_"))
            .collect();
        for (k, v) in vars {
            let key = k.trim_start_matches("DUFFING_").to_ascii_lowercase();
            self.set(&key, &v)?;
        }
        Ok(())
    }
}

/// Parse a complex number in `a+bi` form (also plain reals and `bi`).
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let t: String = text.trim().replace(' ', "");
    if t.is_empty() {
        return Err(Error::InvalidInput("empty complex literal".into()));
    }
    let bad = || Error::InvalidInput(format!("cannot parse complex number: {text}"));
    if let Some(body) = t.strip_suffix('i') {
        // find the split between real and imaginary parts: the last +/- that
        // is not an exponent sign and not the leading sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let im_text = &body[k..];
                let im: f64 = if im_text == "+" {
                    1.0
                } else if im_text == "-" {
                    -1.0
                } else {
                    im_text.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = if body.is_empty() {
                    1.0
                } else if body == "-" {
                    -1.0
                } else {
                    body.parse().map_err(|_| bad())?
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5").unwrap(), Complex64::new(1.5, 0.0));
        assert_eq!(parse_complex("-0.125+0.001i").unwrap(), Complex64::new(-0.125, 0.001));
        assert_eq!(parse_complex(" -0.125+0.001i").unwrap(), Complex64::new(-0.125, 0.001));
        assert_eq!(parse_complex("2-3i").unwrap(), Complex64::new(2.0, -3.0));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), Complex64::new(1e-3, 2e-4));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn config_file_and_validation() {
        let mut cfg = RunConfig::default();
        let dir = std::env::temp_dir().join("duffing-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.txt");
        std::fs::write(&path, "# comment\ncontour_radius = 80\nseed=42\n").unwrap();
        cfg.apply_file(&path).unwrap();
        assert_eq!(cfg.contour_radius, 80.0);
        assert_eq!(cfg.seed, 42);
        cfg.contour_delta = 0.2;
        assert!(cfg.validate().is_err());
    }
}
