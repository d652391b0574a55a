//! Experiment configuration: a flat `key = value` text format with `#`
//! comments, strict validation, and a normalized dump such that
//! `parse(dump(c)) == c`.

use rustfft::num_complex::Complex;

use crate::error::ConfigError;
use crate::solver::ForcingSpec;

type C = Complex<f64>;

/// Full description of a simulation or twin-synchronization run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub l: f64,
    pub n: usize,
    pub dt: f64,
    pub t_total: f64,
    /// Snapshot / record cadence in time units.
    pub snapshot_interval: f64,
    pub r: f64,
    pub c_r: f64,
    pub c0: f64,
    pub forcing: ForcingSpec,
    pub seed_u: u64,
    pub seed_v: u64,
    pub output_dir: String,
    /// Averaging window for the report (defaults to the full run).
    pub t_avg: f64,
    /// Optional externally imposed intermittency dimension.
    pub d_override: Option<f64>,
    pub ic_rms: f64,
    pub ic_k0: f64,
}

const REQUIRED: [&str; 5] = ["nu", "L", "N", "dt", "T_total"];

const KNOWN: [&str; 17] = [
    "nu",
    "L",
    "N",
    "dt",
    "T_total",
    "snapshot_interval",
    "r",
    "c_r",
    "c0",
    "forcing",
    "seed_u",
    "seed_v",
    "output_dir",
    "T_avg",
    "d_override",
    "ic_rms",
    "ic_k0",
];

impl ExperimentConfig {
    /// Parse a config document.  Unknown keys are rejected; missing
    /// optional keys take defaults (`c_r = 0.05`, `c0 = 0.05`, `r = 2.5`,
    /// ABC forcing of amplitude 0.1 on `|k| = 1`, seeds 1 and 2).
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut seen: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
                lineno: lineno + 1,
                line: line.to_string(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key));
            }
            seen.push((key, value));
        }

        let missing: Vec<&str> = REQUIRED
            .iter()
            .filter(|k| !seen.iter().any(|(key, _)| key == *k))
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(ConfigError::MissingKeys(missing.join(", ")));
        }

        let get = |name: &str| -> Option<&str> {
            seen.iter()
                .rev()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v.as_str())
        };

        let nu = parse_f64("nu", get("nu").unwrap())?;
        let l = parse_f64("L", get("L").unwrap())?;
        let n = parse_u64("N", get("N").unwrap())? as usize;
        let dt = parse_f64("dt", get("dt").unwrap())?;
        let t_total = parse_f64("T_total", get("T_total").unwrap())?;

        let snapshot_interval = match get("snapshot_interval") {
            Some(v) => parse_f64("snapshot_interval", v)?,
            None => 10.0 * dt,
        };
        let r = match get("r") {
            Some(v) => parse_f64("r", v)?,
            None => 2.5,
        };
        let c_r = match get("c_r") {
            Some(v) => parse_f64("c_r", v)?,
            None => 0.05,
        };
        let c0 = match get("c0") {
            Some(v) => parse_f64("c0", v)?,
            None => 0.05,
        };
        let forcing = match get("forcing") {
            Some(v) => parse_forcing(v)?,
            None => ForcingSpec::SteadyLowMode {
                amplitude: 0.1,
                k_f: 1,
            },
        };
        let seed_u = match get("seed_u") {
            Some(v) => parse_u64("seed_u", v)?,
            None => 1,
        };
        let seed_v = match get("seed_v") {
            Some(v) => parse_u64("seed_v", v)?,
            None => 2,
        };
        let output_dir = get("output_dir").unwrap_or("out").to_string();
        let t_avg = match get("T_avg") {
            Some(v) => parse_f64("T_avg", v)?,
            None => t_total,
        };
        let d_override = match get("d_override") {
            Some(v) => Some(parse_f64("d_override", v)?),
            None => None,
        };
        let ic_rms = match get("ic_rms") {
            Some(v) => parse_f64("ic_rms", v)?,
            None => 0.3,
        };
        let ic_k0 = match get("ic_k0") {
            Some(v) => parse_f64("ic_k0", v)?,
            None => 2.5,
        };

        let cfg = Self {
            nu,
            l,
            n,
            dt,
            t_total,
            snapshot_interval,
            r,
            c_r,
            c0,
            forcing,
            seed_u,
            seed_v,
            output_dir,
            t_avg,
            d_override,
            ic_rms,
            ic_k0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| -> Result<(), ConfigError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Range {
                    key: key.into(),
                    value: format!("{v}"),
                    range: "finite and > 0".into(),
                })
            }
        };
        positive("nu", self.nu)?;
        positive("L", self.l)?;
        positive("dt", self.dt)?;
        positive("T_total", self.t_total)?;
        positive("snapshot_interval", self.snapshot_interval)?;
        positive("c_r", self.c_r)?;
        positive("c0", self.c0)?;
        positive("T_avg", self.t_avg)?;
        positive("ic_rms", self.ic_rms)?;
        positive("ic_k0", self.ic_k0)?;
        if self.n < 8 || self.n % 2 != 0 {
            return Err(ConfigError::Range {
                key: "N".into(),
                value: self.n.to_string(),
                range: "even integer >= 8".into(),
            });
        }
        if !(self.r > 2.0 && self.r < 3.0) {
            return Err(ConfigError::Range {
                key: "r".into(),
                value: format!("{}", self.r),
                range: "must lie in the open interval (2,3)".into(),
            });
        }
        if let Some(d) = self.d_override {
            if !(0.0..=3.0).contains(&d) {
                return Err(ConfigError::Range {
                    key: "d_override".into(),
                    value: format!("{d}"),
                    range: "within [0,3]".into(),
                });
            }
        }
        if let ForcingSpec::SteadyLowMode { amplitude, k_f } = &self.forcing {
            if !amplitude.is_finite() {
                return Err(ConfigError::Range {
                    key: "forcing".into(),
                    value: format!("{amplitude}"),
                    range: "finite amplitude".into(),
                });
            }
            if *k_f == 0 || *k_f > 2 {
                return Err(ConfigError::Range {
                    key: "forcing".into(),
                    value: k_f.to_string(),
                    range: "forcing wavenumber within 1..=2".into(),
                });
            }
        }
        Ok(())
    }

    /// Normalized dump; `parse(dump(c)) == c`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("nu = {:?}\n", self.nu));
        s.push_str(&format!("L = {:?}\n", self.l));
        s.push_str(&format!("N = {}\n", self.n));
        s.push_str(&format!("dt = {:?}\n", self.dt));
        s.push_str(&format!("T_total = {:?}\n", self.t_total));
        s.push_str(&format!("snapshot_interval = {:?}\n", self.snapshot_interval));
        s.push_str(&format!("r = {:?}\n", self.r));
        s.push_str(&format!("c_r = {:?}\n", self.c_r));
        s.push_str(&format!("c0 = {:?}\n", self.c0));
        s.push_str(&format!("forcing = {}\n", dump_forcing(&self.forcing)));
        s.push_str(&format!("seed_u = {}\n", self.seed_u));
        s.push_str(&format!("seed_v = {}\n", self.seed_v));
        s.push_str(&format!("output_dir = {}\n", self.output_dir));
        s.push_str(&format!("T_avg = {:?}\n", self.t_avg));
        if let Some(d) = self.d_override {
            s.push_str(&format!("d_override = {d:?}\n"));
        }
        s.push_str(&format!("ic_rms = {:?}\n", self.ic_rms));
        s.push_str(&format!("ic_k0 = {:?}\n", self.ic_k0));
        s
    }

    /// Apply one `key=value` override (CLI flags mirror config keys).
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "nu" => self.nu = parse_f64(key, value)?,
            "L" => self.l = parse_f64(key, value)?,
            "N" => self.n = parse_u64(key, value)? as usize,
            "dt" => self.dt = parse_f64(key, value)?,
            "T_total" => self.t_total = parse_f64(key, value)?,
            "snapshot_interval" => self.snapshot_interval = parse_f64(key, value)?,
            "r" => self.r = parse_f64(key, value)?,
            "c_r" => self.c_r = parse_f64(key, value)?,
            "c0" => self.c0 = parse_f64(key, value)?,
            "forcing" => self.forcing = parse_forcing(value)?,
            "seed_u" => self.seed_u = parse_u64(key, value)?,
            "seed_v" => self.seed_v = parse_u64(key, value)?,
            "output_dir" => self.output_dir = value.to_string(),
            "T_avg" => self.t_avg = parse_f64(key, value)?,
            "d_override" => self.d_override = Some(parse_f64(key, value)?),
            "ic_rms" => self.ic_rms = parse_f64(key, value)?,
            "ic_k0" => self.ic_k0 = parse_f64(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        self.validate()
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Parse {
        key: key.into(),
        value: value.into(),
    })
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse::<u64>().map_err(|_| ConfigError::Parse {
        key: key.into(),
        value: value.into(),
    })
}

fn parse_forcing(value: &str) -> Result<ForcingSpec, ConfigError> {
    let bad = |v: &str| ConfigError::Parse {
        key: "forcing".into(),
        value: v.into(),
    };
    if value == "none" {
        return Ok(ForcingSpec::None);
    }
    if let Some(rest) = value.strip_prefix("abc:") {
        let mut parts = rest.split(':');
        let amplitude = parse_f64("forcing", parts.next().ok_or_else(|| bad(value))?)?;
        let k_f = match parts.next() {
            Some(v) => parse_u64("forcing", v)? as usize,
            None => 1,
        };
        if parts.next().is_some() {
            return Err(bad(value));
        }
        return Ok(ForcingSpec::SteadyLowMode { amplitude, k_f });
    }
    if let Some(rest) = value.strip_prefix("custom:") {
        let mut modes = Vec::new();
        for entry in rest.split(';') {
            let nums: Vec<&str> = entry.split(',').map(str::trim).collect();
            if nums.len() != 9 {
                return Err(bad(value));
            }
            let k = [
                nums[0].parse::<i64>().map_err(|_| bad(value))?,
                nums[1].parse::<i64>().map_err(|_| bad(value))?,
                nums[2].parse::<i64>().map_err(|_| bad(value))?,
            ];
            let mut amps = [C::new(0.0, 0.0); 3];
            for comp in 0..3 {
                let re = parse_f64("forcing", nums[3 + 2 * comp])?;
                let im = parse_f64("forcing", nums[4 + 2 * comp])?;
                amps[comp] = C::new(re, im);
            }
            modes.push((k, amps));
        }
        return Ok(ForcingSpec::Custom(modes));
    }
    Err(bad(value))
}

fn dump_forcing(f: &ForcingSpec) -> String {
    match f {
        ForcingSpec::None => "none".to_string(),
        ForcingSpec::SteadyLowMode { amplitude, k_f } => {
            format!("abc:{amplitude:?}:{k_f}")
        }
        ForcingSpec::Custom(modes) => {
            let entries: Vec<String> = modes
                .iter()
                .map(|(k, a)| {
                    format!(
                        "{},{},{},{:?},{:?},{:?},{:?},{:?},{:?}",
                        k[0], k[1], k[2], a[0].re, a[0].im, a[1].re, a[1].im, a[2].re, a[2].im
                    )
                })
                .collect();
            format!("custom:{}", entries.join(";"))
        }
    }
}
