//! Line-oriented run configuration: `section.key = value`, `#` comments.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

const KEYS: &[&str] = &[
    "case.name",
    "case.method",
    "case.cfl",
    "case.elems_per_lambda",
    "case.mesh",
    "case.ust_mesh",
    "case.dt",
    "case.slabs",
    "case.t0",
    "case.steady_tol",
    "case.refine",
    "gas.r",
    "gas.gamma",
    "gas.pr",
    "gas.viscosity",
    "gas.mu",
    "initial.state",
    "bc.pure_neumann",
    "newton.max_iter",
    "newton.abs_tol",
    "newton.rel_tol",
    "krylov.restart",
    "krylov.max_iter",
    "krylov.tol",
    "krylov.preconditioner",
    "solver.quad_degree",
    "output.vtk",
    "output.vtk_every",
    "output.line",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Parsed key-value configuration. Boundary conditions `bc.<tag>` and
/// `bc.<tag>.viscous` keep their file order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
    bc: Vec<(String, Entry)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |reason: String| Error::Parse { line, reason };
            let (k, v) = body.split_once('=').ok_or_else(|| err(format!("expected 'section.key = value', got '{body}'")))?;
            let (k, v) = (k.trim(), v.trim());
            if !k.contains('.') || k.split('.').any(str::is_empty) {
                return Err(err(format!("malformed key '{k}'")));
            }
            if v.is_empty() {
                return Err(err(format!("missing value for '{k}'")));
            }
            let entry = Entry { value: v.to_string(), line };
            if let Some(tag) = k.strip_prefix("bc.").filter(|_| k != "bc.pure_neumann") {
                cfg.bc.push((tag.to_string(), entry));
            } else if KEYS.contains(&k) {
                if cfg.entries.insert(k.to_string(), entry).is_some() {
                    return Err(err(format!("duplicate key '{k}'")));
                }
            } else {
                return Err(err(format!("unknown key '{k}'")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(key.to_string(), Entry { value: value.to_string(), line: 0 });
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| Error::Parse {
                line: e.line,
                reason: format!("invalid value '{}' for '{key}'", e.value),
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Whitespace-separated numbers.
    pub fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse_numbers(&e.value, e.line).map(Some),
        }
    }

    /// Boundary entries in file order.
    pub fn boundary_entries(&self) -> &[(String, Entry)] {
        &self.bc
    }
}

pub fn parse_numbers(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split_whitespace()
        .map(|w| {
            w.parse().map_err(|_| Error::Parse {
                line,
                reason: format!("invalid number '{w}'"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_and_comments() {
        let c = Config::parse("# run\ncase.name = flat-plate\n\ncase.dt = 0.02 # pseudo time\nbc.wall = - 0 0 7.754e-4\nbc.wall.viscous = false\n").unwrap();
        assert_eq!(c.str("case.name"), Some("flat-plate"));
        assert_eq!(c.get::<f64>("case.dt").unwrap(), Some(0.02));
        assert_eq!(c.get::<usize>("case.slabs").unwrap(), None);
        assert_eq!(c.boundary_entries().len(), 2);
        assert_eq!(c.boundary_entries()[1].0, "wall.viscous");
        assert_eq!(c.boundary_entries()[0].1.line, 5);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line = |t: &str| match Config::parse(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line("case.name = x\nnonsense\n"), 2);
        assert_eq!(line("\n\ncase.bogus = 1\n"), 3);
        assert_eq!(line("case.cfl =\n"), 1);
        assert_eq!(line("case.cfl = 1\ncase.cfl = 2\n"), 2);
        assert_eq!(line(".x = 1\n"), 1);
        let c = Config::parse("\ncase.cfl = two\n").unwrap();
        assert!(matches!(c.get::<f64>("case.cfl"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_numbers("1 2 x", 7), Err(Error::Parse { line: 7, .. })));
    }
}
