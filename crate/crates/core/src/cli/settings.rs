//! Option resolution: command-line flag, then config file, then default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::data_io::Metadata;
use crate::error::{Error, Result};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "PS2GD_THREADS";

/// `key=value` settings read from `--config`. Keys are long flag names.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    file: Option<Metadata>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = path.map(Metadata::read).transpose()?;
        Ok(Settings { file })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.file.as_ref().and_then(|m| m.get(key))
    }

    /// The flag value if given, else the config value if present.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::arg(format!("config key '{key}': {e}")))
            })
            .transpose()
    }

    pub fn pick_or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Boolean switches can only be turned on from the command line.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.raw(key) {
            None => Ok(false),
            Some("1" | "true" | "yes" | "on") => Ok(true),
            Some("0" | "false" | "no" | "off") => Ok(false),
            Some(v) => Err(Error::arg(format!("config key '{key}': bad boolean '{v}'"))),
        }
    }

    /// Flag, then config, then `PS2GD_THREADS`, then 1.
    pub fn threads(&self, flag: Option<usize>) -> Result<usize> {
        if let Some(t) = self.pick(flag, "threads")? {
            return Ok(t.max(1));
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .map(|t| t.max(1))
                .map_err(|_| Error::arg(format!("{THREADS_ENV}='{v}' is not a thread count"))),
            Err(_) => Ok(1),
        }
    }
}

/// Inner-loop bound given either literally or relative to the number of
/// components: `500`, `n`, `2n`, `n/2`, `3n/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerLength {
    Fixed(usize),
    PerComponent { num: usize, den: usize },
}

impl InnerLength {
    pub fn resolve(self, n: usize) -> Result<usize> {
        let m = match self {
            InnerLength::Fixed(m) => m,
            InnerLength::PerComponent { num, den } => (num * n).div_ceil(den),
        };
        if m == 0 {
            return Err(Error::arg(format!(
                "inner loop bound {self} resolves to 0 for n = {n}"
            )));
        }
        Ok(m)
    }
}

impl FromStr for InnerLength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::arg(format!(
                "bad inner loop bound '{s}' (expected e.g. 500, n, 2n, n/2)"
            ))
        };
        let t = s.trim();
        if let Ok(m) = t.parse::<usize>() {
            return Ok(InnerLength::Fixed(m));
        }
        let (head, den) = match t.split_once('/') {
            Some((h, d)) => (h, d.parse::<usize>().map_err(|_| bad())?),
            None => (t, 1),
        };
        let num = match head.strip_suffix('n').ok_or_else(bad)? {
            "" => 1,
            k => k.parse::<usize>().map_err(|_| bad())?,
        };
        if den == 0 || num == 0 {
            return Err(bad());
        }
        Ok(InnerLength::PerComponent { num, den })
    }
}

impl fmt::Display for InnerLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InnerLength::Fixed(m) => write!(f, "{m}"),
            InnerLength::PerComponent { num: 1, den: 1 } => f.write_str("n"),
            InnerLength::PerComponent { num, den: 1 } => write!(f, "{num}n"),
            InnerLength::PerComponent { num: 1, den } => write!(f, "n/{den}"),
            InnerLength::PerComponent { num, den } => write!(f, "{num}n/{den}"),
        }
    }
}

/// Comma-separated list, e.g. `1,2,4,8`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<T>()
                    .map_err(|e| Error::arg(format!("bad list item '{t}': {e}")))
            })
            .collect::<Result<Vec<T>>>()
            .map(List)
    }
}
