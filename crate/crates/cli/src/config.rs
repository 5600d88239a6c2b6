//! Option resolution (flag, then `--config` file, then default) and the
//! `.meta` sidecar that records every resolved value.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use bec_dephasing::params::{is_dimensionless_key, is_physical_key, presets, to_dimensionless, KeyValues};
use bec_dephasing::{PhysicalParams, ReservoirParams};

use crate::error::CliError;

/// Keys a config file may carry that are not options.
const RESERVED: [&str; 3] = ["command", "version", "output"];

pub struct Resolver {
    config: Option<KeyValues>,
    echo: KeyValues,
}

impl Resolver {
    pub fn new(command: &str, config_path: Option<&Path>) -> Result<Self, CliError> {
        let config = match config_path {
            None => None,
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
                let kv = KeyValues::parse(&text)?;
                if let Some(c) = kv.get("command") {
                    if c != command {
                        return Err(CliError::config(format!(
                            "config {} was written by `{c}`, not `{command}`",
                            path.display()
                        )));
                    }
                }
                Some(kv)
            }
        };
        let mut echo = KeyValues::default();
        echo.set("command", command);
        echo.set("version", env!("CARGO_PKG_VERSION"));
        Ok(Self { config, echo })
    }

    fn config_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.config.as_ref().and_then(|kv| kv.get(key)) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::config(format!("config key `{key}`: {e}"))),
        }
    }

    /// Resolve one option and record it.
    pub fn get<T: FromStr + Display + Clone>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.config_value(key)?.unwrap_or(default),
        };
        self.echo.set(key, v.to_string());
        Ok(v)
    }

    /// A comma-separated list of numbers.
    pub fn list(&mut self, key: &str, flag: Option<&[f64]>) -> Result<Option<Vec<f64>>, CliError> {
        let v = match flag {
            Some(v) => Some(v.to_vec()),
            None => match self.config.as_ref().and_then(|kv| kv.get(key)) {
                None => None,
                Some(raw) => Some(parse_list(raw).map_err(|e| CliError::config(format!("config key `{key}`: {e}")))?),
            },
        };
        if let Some(v) = &v {
            self.echo.set(key, join(v));
        }
        Ok(v)
    }

    /// Reservoir parameters: `--params` file, else `--preset`, else the
    /// config's dimensionless keys, else the default preset; then single
    /// overrides.
    pub fn reservoir(&mut self, args: &crate::ParamArgs) -> Result<ReservoirParams, CliError> {
        let mut p = if let Some(path) = &args.params {
            read_params_file(path)?
        } else if let Some(name) = &args.preset {
            preset(name)?
        } else if let Some(kv) = self.config.as_ref().filter(|kv| kv.keys().any(is_dimensionless_key)) {
            ReservoirParams::from_key_values(kv)?
        } else {
            preset(DEFAULT_PRESET)?
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.u, args.u);
        set(&mut p.g_ab, args.g_ab);
        set(&mut p.n0, args.n0);
        set(&mut p.theta, args.theta);
        set(&mut p.l_sep, args.l_sep);
        set(&mut p.d_sep, args.d_sep);
        p.validate()?;
        p.write_key_values(&mut self.echo);
        Ok(p)
    }

    pub fn sidecar_text(&self) -> String {
        self.echo.to_text()
    }

    /// Check that the config carries no keys the command does not know.
    pub fn finish(&self) -> Result<(), CliError> {
        if let Some(kv) = &self.config {
            for key in kv.keys() {
                if !RESERVED.contains(&key) && !self.echo.contains(key) && !is_dimensionless_key(key) {
                    return Err(CliError::config(format!("config key `{key}` is not used by this command")));
                }
            }
        }
        Ok(())
    }
}

pub const DEFAULT_PRESET: &str = "trapping";

pub fn preset(name: &str) -> Result<ReservoirParams, CliError> {
    presets::by_name(name).ok_or_else(|| {
        CliError::config(format!("unknown preset `{name}`; known: {}", presets::NAMES.join(", ")))
    })
}

/// A parameter file holds either all SI keys or all dimensionless keys.
pub fn read_params_file(path: &Path) -> Result<ReservoirParams, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read parameter file {}: {e}", path.display())))?;
    let kv = KeyValues::parse(&text)?;
    let physical = kv.keys().any(is_physical_key);
    let dimensionless = kv.keys().any(is_dimensionless_key);
    match (physical, dimensionless) {
        (true, true) => Err(CliError::config(format!(
            "{}: mixes SI and dimensionless keys",
            path.display()
        ))),
        (true, false) => Ok(to_dimensionless(&PhysicalParams::from_key_values(&kv)?)?),
        (false, true) => Ok(ReservoirParams::from_key_values(&kv)?),
        (false, false) => Err(CliError::config(format!("{}: no parameter keys", path.display()))),
    }
}

pub fn parse_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: `{}`", s.trim())))
        .collect()
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
