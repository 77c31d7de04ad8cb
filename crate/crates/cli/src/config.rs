//! Run configuration: flags over a flat `key = value` file over defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::UsageError;

/// Parsed config file. Lines are `key = value`; `#` starts a comment.
/// Keys use the long flag names, with `-` and `_` interchangeable.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key = value", i + 1)))?;
            let k = normalize(k);
            if k.is_empty() {
                return Err(UsageError(format!("config line {}: empty key", i + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(&normalize(key)).map(String::as_str)
    }
}

/// Resolves settings and records the effective value of each one, so the
/// output header describes exactly what ran.
#[derive(Debug)]
pub struct Resolver {
    file: ConfigFile,
    used: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Resolver { file, used: BTreeMap::new() }
    }

    pub fn pick<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, UsageError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(s) => s.parse().map_err(|e| UsageError(format!("config key {key}: {e}")))?,
                None => default,
            },
        };
        self.used.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Like `pick` but with no default.
    pub fn pick_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, UsageError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(s.parse().map_err(|e| UsageError(format!("config key {key}: {e}")))?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.used.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// A switch is on if the flag is given or the file says `true`.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, UsageError> {
        let on = flag || self.pick_opt::<bool>(key, None)?.unwrap_or(false);
        self.used.insert(key.to_string(), on.to_string());
        Ok(on)
    }

    pub fn record(&mut self, key: &str, value: impl Display) {
        self.used.insert(key.to_string(), value.to_string());
    }

    pub fn forget(&mut self, key: &str) {
        self.used.remove(key);
    }

    pub fn into_meta(self) -> BTreeMap<String, String> {
        self.used
    }
}

/// Parses `1,2,3` or a range `lo:hi:step`.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, UsageError> {
    let bad = |what: &str| UsageError(format!("cannot parse {what:?} in list {text:?}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(s));
        let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || hi < lo {
            return Err(UsageError(format!("range {text:?} needs lo <= hi and step > 0")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| lo + i as f64 * step).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad(s)))
        .collect()
}

pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, UsageError> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let s = s.trim();
            s.parse::<usize>()
                .or_else(|_| s.parse::<f64>().ok().filter(|x| x.fract() == 0.0 && *x >= 0.0).map(|x| x as usize).ok_or(()))
                .map_err(|_| UsageError(format!("cannot parse {s:?} as a size")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag_precedence() {
        let file = ConfigFile::parse("# experiment\nn = 12\nreplicas=3 # trailing\nformat = csv\n").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.pick("n", None, 5usize).unwrap(), 12);
        assert_eq!(r.pick("n", Some(7usize), 5).unwrap(), 7);
        assert_eq!(r.pick("seed", None, 99u64).unwrap(), 99);
        assert_eq!(r.into_meta()["n"], "7");
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        assert!(ConfigFile::parse("n 12").is_err());
        let mut r = Resolver::new(ConfigFile::parse("n = twelve").unwrap());
        assert!(r.pick("n", None, 1usize).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_f64_list("-1, 0,1").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_f64_list("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_usize_list("10,1e3").unwrap(), vec![10, 1000]);
        assert!(parse_f64_list("1:0:1").is_err());
    }
}
