//! Flat `key = value` run parameters.
//!
//! Each subcommand owns a table of keys with defaults. Values are layered:
//! table defaults, then the config file, then command-line flags. Keys not
//! in the table are rejected wherever they appear.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn param(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { key, default, help }
}

#[derive(Debug, Clone)]
pub struct Params {
    command: &'static str,
    specs: Vec<ParamSpec>,
    values: Vec<String>,
}

impl Params {
    pub fn defaults(command: &'static str, specs: Vec<ParamSpec>) -> Self {
        let values = specs.iter().map(|s| s.default.to_string()).collect();
        Params { command, specs, values }
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    fn index(&self, key: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.key == key)
    }

    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), CliError> {
        let i = self.index(key).ok_or_else(|| CliError::UnknownKey {
            key: key.to_string(),
            command: self.command,
            origin: origin.to_string(),
        })?;
        self.values[i] = value.trim().to_string();
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str, path: &Path) -> Result<(), CliError> {
        let mut seen: Vec<String> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |msg: String| CliError::ConfigSyntax {
                path: path.to_path_buf(),
                line: n + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(syntax("missing key before `=`".into()));
            }
            if seen.iter().any(|k| k == key) {
                return Err(syntax(format!("key `{key}` set twice")));
            }
            seen.push(key.to_string());
            self.set(key, value, &format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text, path)
    }

    pub fn raw(&self, key: &str) -> &str {
        let i = self.index(key).unwrap_or_else(|| panic!("`{key}` is not a {} key", self.command));
        &self.values[i]
    }

    fn bad(&self, key: &str, msg: impl Into<String>) -> CliError {
        CliError::BadValue {
            key: key.to_string(),
            value: self.raw(key).to_string(),
            msg: msg.into(),
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.raw(key).parse().map_err(|_| self.bad(key, "expected a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.bad(key, "must be finite"))
        }
    }

    /// Numbers where `0` selects an automatic value.
    pub fn f64_or_auto(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v = self.f64(key)?;
        Ok((v != 0.0).then_some(v))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.bad(key, "must be > 0"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.raw(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.raw(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    pub fn required(&self, key: &str) -> Result<&str, CliError> {
        let v = self.raw(key);
        if v.is_empty() {
            Err(self.bad(key, "is required"))
        } else {
            Ok(v)
        }
    }

    pub fn choice<'a>(&self, key: &str, options: &[&'a str]) -> Result<&'a str, CliError> {
        let v = self.raw(key);
        options
            .iter()
            .find(|o| **o == v)
            .copied()
            .ok_or_else(|| self.bad(key, format!("expected one of {}", options.join(", "))))
    }

    /// Config-file text holding every effective value; it loads back into
    /// the same parameters.
    pub fn render(&self) -> String {
        let mut out = format!("# levitaq {}\n", self.command);
        for (spec, value) in self.specs.iter().zip(&self.values) {
            let _ = writeln!(out, "# {}\n{} = {}", spec.help, spec.key, value);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Params {
        Params::defaults(
            "demo",
            vec![param("alpha", "1.5", "a number"), param("name", "", "a path")],
        )
    }

    #[test]
    fn layers_and_round_trips() {
        let mut p = sample();
        p.apply_text("# comment\n\nalpha = 2.5\n", Path::new("c.txt")).unwrap();
        assert_eq!(p.f64("alpha").unwrap(), 2.5);
        p.set("name", "x.csv", "flag").unwrap();
        let mut q = sample();
        q.apply_text(&p.render(), Path::new("r.txt")).unwrap();
        assert_eq!(q.raw("alpha"), "2.5");
        assert_eq!(q.raw("name"), "x.csv");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        let mut p = sample();
        let e = p.apply_text("beta = 1\n", Path::new("c.txt")).unwrap_err();
        assert!(e.to_string().contains("unknown key `beta`"), "{e}");
        assert!(e.to_string().contains("c.txt:1"), "{e}");
        let e = p.apply_text("alpha 1\n", Path::new("c.txt")).unwrap_err();
        assert!(matches!(e, CliError::ConfigSyntax { line: 1, .. }));
        let e = p.apply_text("alpha = 1\nalpha = 2\n", Path::new("c.txt")).unwrap_err();
        assert!(e.to_string().contains("set twice"));
        p.set("alpha", "abc", "flag").unwrap();
        let e = p.f64("alpha").unwrap_err();
        assert!(e.to_string().contains("`alpha`"));
        assert!(p.required("name").is_err());
    }
}
