//! Run configuration: a flat `key = value` text format.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value
//! key     := segment ('.' segment)*        segment := [a-z_]+
//! ```
//!
//! Values run to the end of the line with surrounding whitespace removed.
//! Every key is listed in [`KEYS`] together with its type and range; unknown
//! keys and out-of-range values are rejected when the file is parsed.
//! Command-line flags set the same keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::tokens;
use crate::CliError;

/// What a configuration value must look like.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    /// A real in `[min, max]`; `open_min` excludes the lower end.
    Real { min: f64, max: f64, open_min: bool },
    /// An integer in `[min, max]`.
    Int { min: u64, max: u64 },
    PowerOfTwo { min: usize },
    Bool,
    /// `re` or `re,im`.
    Complex,
    /// Comma-separated reals, non-empty, each at least `min`.
    RealList { min: f64 },
    /// `re,im` points separated by `;`.
    ComplexList,
    /// One of the listed words.
    Choice(&'static [&'static str]),
    /// Free text checked by the command that reads it.
    Text,
}

/// A documented configuration key.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn real(min: f64, max: f64) -> Kind {
    Kind::Real { min, max, open_min: false }
}

const fn positive(max: f64) -> Kind {
    Kind::Real { min: 0.0, max, open_min: true }
}

pub const KEYS: &[Key] = &[
    Key { name: "command", kind: Kind::Choice(crate::commands::COMMANDS), help: "subcommand to run" },
    Key { name: "demo.name", kind: Kind::Choice(&["koebe"]), help: "demo pipeline" },
    Key { name: "field.p", kind: Kind::Text, help: "Herglotz function token (const:, koebe:, power:, cayley, essential:, rational:, series:, file:)" },
    Key { name: "field.tau", kind: Kind::Text, help: "Denjoy-Wolff point: re[,im] or steps:t=re,im;..." },
    Key { name: "k", kind: real(0.0, 0.999_999), help: "Becker constant k in [0, 1)" },
    Key { name: "s", kind: real(0.0, 1e6), help: "start time" },
    Key { name: "t", kind: real(0.0, 1e6), help: "end time" },
    Key { name: "z", kind: Kind::ComplexList, help: "points re,im separated by ';'" },
    Key { name: "solver.rtol", kind: positive(1e-2), help: "relative tolerance" },
    Key { name: "solver.atol", kind: real(0.0, 1e-2), help: "absolute tolerance" },
    Key { name: "solver.max_step", kind: positive(100.0), help: "largest step" },
    Key { name: "chain.horizon", kind: positive(1e4), help: "largest t - s of a chain iterate" },
    Key { name: "chain.tolerance", kind: positive(1e-2), help: "relative increment accepted as converged" },
    Key { name: "chain.step", kind: positive(100.0), help: "spacing of chain iterates" },
    Key { name: "chain.richardson", kind: Kind::Bool, help: "geometric tail correction" },
    Key { name: "chain.mode", kind: Kind::Choice(&["radial", "mobius"]), help: "normalisation of the iterates" },
    Key { name: "grid.radii", kind: Kind::RealList { min: 0.0 }, help: "radii of the polar grid or of the circles" },
    Key { name: "grid.angles", kind: Kind::PowerOfTwo { min: 8 }, help: "angles per circle" },
    Key { name: "boundary.delta", kind: Kind::Real { min: 0.0, max: 0.5, open_min: true }, help: "first radial offset of the boundary extrapolation" },
    Key { name: "boundary.levels", kind: Kind::Int { min: 1, max: 30 }, help: "number of halvings of the offset" },
    Key { name: "boundary.tolerance", kind: positive(1.0), help: "largest accepted extrapolation residual" },
    Key { name: "beltrami.radii", kind: Kind::RealList { min: 0.0 }, help: "circles on which mu is sampled; default the grid radii above 1" },
    Key { name: "map", kind: Kind::Text, help: "map for beltrami/classify/schwarzian: f1:k, f2:k, fn:k,n, fsigma:s, mobius:a;b;c;d, chain, grid:path" },
    Key { name: "wirtinger.h", kind: positive(0.1), help: "difference step" },
    Key { name: "wirtinger.order", kind: Kind::Choice(&["second", "fourth"]), help: "difference stencil order" },
    Key { name: "classify.tolerance", kind: positive(1.0), help: "classifier tolerance; default from the field source" },
    Key { name: "classify.source", kind: Kind::Choice(&["closed-form", "numerical"]), help: "provenance of an imported trace" },
    Key { name: "range.horizon", kind: Kind::Real { min: 1.0, max: 1e5, open_min: false }, help: "final time T" },
    Key { name: "range.step", kind: positive(10.0), help: "sample spacing in t" },
    Key { name: "schwarzian.h", kind: positive(0.1), help: "difference step" },
    Key { name: "input", kind: Kind::Text, help: "input file (.csv trace or .json grid)" },
    Key { name: "output", kind: Kind::Text, help: "envelope destination; stdout when unset" },
    Key { name: "export.path", kind: Kind::Text, help: "raw payload export" },
    Key { name: "export.format", kind: Kind::Choice(&["json", "csv"]), help: "export format" },
    Key { name: "report.timing", kind: Kind::Bool, help: "add wall-clock timing to the envelope" },
];

pub fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// Parsed configuration; entries are kept as validated text.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config("config", format!("line {}: expected `key = value`", lineno + 1)))?;
            let k = k.trim();
            if cfg.entries.contains_key(k) {
                return Err(CliError::config(k, format!("line {}: duplicate key", lineno + 1)));
            }
            cfg.set(k, v.trim())?;
        }
        Ok(cfg)
    }

    /// Sorted `key = value` lines; parsing the result gives the same config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn set(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        let key = key(name).ok_or_else(|| CliError::config(name, "unknown key".into()))?;
        if value.contains('\n') {
            return Err(CliError::config(name, "values must fit on one line".into()));
        }
        validate(key, value)?;
        self.entries.insert(name.to_string(), value.to_string());
        Ok(())
    }

    /// Sets the key only when it is missing.
    pub fn set_default(&mut self, name: &str, value: &str) -> Result<(), CliError> {
        if !self.entries.contains_key(name) {
            self.set(name, value)?;
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries.get(name).map(String::as_str)
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn require(&self, name: &str) -> Result<&str, CliError> {
        self.get(name).ok_or_else(|| CliError::config(name, "required key is missing".into()))
    }

    pub fn real(&self, name: &str) -> Result<Option<f64>, CliError> {
        self.get(name).map(|v| tokens::real(name, v)).transpose()
    }

    pub fn real_or(&self, name: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.real(name)?.unwrap_or(default))
    }

    pub fn int_or(&self, name: &str, default: usize) -> Result<usize, CliError> {
        match self.get(name) {
            Some(v) => v.parse().map_err(|_| CliError::config(name, format!("`{v}` is not an integer"))),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, name: &str, default: bool) -> Result<bool, CliError> {
        match self.get(name) {
            Some(v) => parse_bool(name, v),
            None => Ok(default),
        }
    }

    pub fn reals(&self, name: &str) -> Result<Option<Vec<f64>>, CliError> {
        self.get(name).map(|v| tokens::real_list(name, v)).transpose()
    }

    pub fn points(&self, name: &str) -> Result<Option<Vec<loewner_core::Complex64>>, CliError> {
        self.get(name).map(|v| tokens::complex_list(name, v)).transpose()
    }
}

fn parse_bool(name: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::config(name, format!("`{v}` is not true or false"))),
    }
}

fn validate(key: &Key, value: &str) -> Result<(), CliError> {
    let name = key.name;
    match key.kind {
        Kind::Real { min, max, open_min } => {
            let x = tokens::real(name, value)?;
            let low_ok = if open_min { x > min } else { x >= min };
            if !(low_ok && x <= max) {
                let open = if open_min { "(" } else { "[" };
                return Err(CliError::config(name, format!("{x} is outside {open}{min}, {max}]")));
            }
        }
        Kind::Int { min, max } => {
            let x: u64 = value.parse().map_err(|_| CliError::config(name, format!("`{value}` is not an integer")))?;
            if !(min..=max).contains(&x) {
                return Err(CliError::config(name, format!("{x} is outside [{min}, {max}]")));
            }
        }
        Kind::PowerOfTwo { min } => {
            let x: usize = value.parse().map_err(|_| CliError::config(name, format!("`{value}` is not an integer")))?;
            if !x.is_power_of_two() || x < min {
                return Err(CliError::config(name, format!("{x} must be a power of two and at least {min}")));
            }
        }
        Kind::Bool => {
            parse_bool(name, value)?;
        }
        Kind::Complex => {
            tokens::complex(name, value)?;
        }
        Kind::RealList { min } => {
            let xs = tokens::real_list(name, value)?;
            if let Some(x) = xs.iter().find(|x| **x < min) {
                return Err(CliError::config(name, format!("{x} is below {min}")));
            }
        }
        Kind::ComplexList => {
            tokens::complex_list(name, value)?;
        }
        Kind::Choice(options) => {
            if !options.contains(&value) {
                return Err(CliError::config(name, format!("`{value}` is not one of {}", options.join(", "))));
            }
        }
        Kind::Text => {
            if value.is_empty() {
                return Err(CliError::config(name, "value is empty".into()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_idempotent() {
        let text = "# demo\ncommand = extend\nk=0.5\n  grid.radii = 0.5, 1.2,2\nfield.p = koebe:0.5\n";
        let a = RunConfig::parse(text).unwrap();
        let b = RunConfig::parse(&a.serialize()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.serialize(), b.serialize());
        assert_eq!(a.reals("grid.radii").unwrap().unwrap(), vec![0.5, 1.2, 2.0]);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(RunConfig::parse("nonsense = 1").is_err());
        assert!(RunConfig::parse("k = 1.0").is_err());
        assert!(RunConfig::parse("k = 0.5\nk = 0.4").is_err());
        assert!(RunConfig::parse("grid.angles = 100").is_err());
        assert!(RunConfig::parse("grid.radii =").is_err());
        assert!(RunConfig::parse("solver.rtol = 0").is_err());
        assert!(RunConfig::parse("just a line").is_err());
    }
}
