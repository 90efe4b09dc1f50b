//! Sectioned TOML configuration and matrix literals for CLI test vectors.
//!
//! Layout:
//! ```toml
//! [global]
//! seed = 7
//! format = "text"
//!
//! [quadrature]
//! points_per_axis = 24
//! mode = "deterministic"
//!
//! [verify-polar]
//! case = "gl_r"
//! n = 2
//! mc_samples = 200000
//! ```
//! A subcommand section may override any quadrature key. Lookup order for a
//! key is subcommand section, then `[global]`.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AlgebraElement, GroupFactors, LeviElement};
use crate::quad::QuadratureSpec;
use crate::registry::{Backend, CaseDescriptor};

const QUAD_KEYS: [&str; 6] = [
    "points_per_axis",
    "truncation_radii",
    "mc_samples",
    "seed",
    "mode",
    "angle_points",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    table: toml::Table,
}

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("config: {e}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(parse_err)?;
        for (name, v) in &table {
            if !v.is_table() {
                return Err(parse_err(format!("top-level key `{name}` must be a [section]")));
            }
        }
        if let Some(q) = table.get("quadrature").and_then(|v| v.as_table()) {
            if let Some(bad) = q.keys().find(|k| !QUAD_KEYS.contains(&k.as_str())) {
                return Err(parse_err(format!("unknown quadrature key `{bad}`")));
            }
        }
        Ok(Config { table })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    fn section(&self, name: &str) -> Option<&toml::Table> {
        self.table.get(name).and_then(|v| v.as_table())
    }

    /// `key` from `[section]`, falling back to `[global]`.
    pub fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> Result<Option<T>> {
        let found = self
            .section(section)
            .and_then(|t| t.get(key))
            .or_else(|| self.section("global").and_then(|t| t.get(key)));
        match found {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| parse_err(format!("[{section}] {key}: {e}"))),
        }
    }

    /// Defaults, overlaid by `[quadrature]`, a `[global]` seed, then any
    /// quadrature keys in `[section]`.
    pub fn quadrature(&self, section: &str) -> Result<QuadratureSpec> {
        let mut merged = toml::Table::try_from(QuadratureSpec::default()).map_err(parse_err)?;
        let mut overlay = |t: &toml::Table, keys: &[&str]| {
            for k in keys {
                if let Some(v) = t.get(*k) {
                    merged.insert(k.to_string(), v.clone());
                }
            }
        };
        if let Some(q) = self.section("quadrature") {
            overlay(q, &QUAD_KEYS);
        }
        if let Some(g) = self.section("global") {
            overlay(g, &["seed"]);
        }
        if let Some(s) = self.section(section) {
            overlay(s, &QUAD_KEYS);
        }
        let spec: QuadratureSpec = toml::Value::Table(merged).try_into().map_err(parse_err)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldTag {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LiteralEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl LiteralEntry {
    fn value(self) -> Complex64 {
        match self {
            LiteralEntry::Real(v) => Complex64::new(v, 0.0),
            LiteralEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// Row-major matrix with a field tag, e.g.
/// `{"field":"complex","rows":[[[1,0],[0,2]],[[0,2],1]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixLiteral {
    pub field: FieldTag,
    pub rows: Vec<Vec<LiteralEntry>>,
}

impl MatrixLiteral {
    pub fn parse(text: &str) -> Result<Self> {
        let lit: MatrixLiteral = serde_json::from_str(text)?;
        lit.check()?;
        Ok(lit)
    }

    fn check(&self) -> Result<()> {
        let cols = self.rows.first().map_or(0, |r| r.len());
        if cols == 0 || self.rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("matrix literal rows are empty or ragged".into()));
        }
        if self.field == FieldTag::Real && self.rows.iter().flatten().any(|e| matches!(e, LiteralEntry::Complex(_))) {
            return Err(Error::Parse("real matrix literal has a complex entry".into()));
        }
        Ok(())
    }

    fn complex_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows.len(), self.rows[0].len(), |i, j| self.rows[i][j].value())
    }

    fn real_matrix(&self) -> Result<DMatrix<f64>> {
        if self.field == FieldTag::Complex {
            return Err(Error::Parse("complex literal given for a real model".into()));
        }
        Ok(self.complex_matrix().map(|z| z.re))
    }

    /// Element of the case's model. Real literals are accepted for complex
    /// models.
    pub fn to_element(&self, case: &CaseDescriptor) -> Result<AlgebraElement<f64>> {
        self.check()?;
        if case.require_backend()?.is_complex() {
            AlgebraElement::from_complex(case, self.complex_matrix())
        } else {
            AlgebraElement::from_real(case, self.real_matrix()?)
        }
    }
}

/// A Levi element from one literal, or two for the pair models `(a, b)`.
pub fn levi_from_literals(case: &CaseDescriptor, lits: &[MatrixLiteral]) -> Result<LeviElement<f64>> {
    for l in lits {
        l.check()?;
    }
    let backend = case.require_backend()?;
    let factors = match (backend, lits) {
        (Backend::RealFull, [a, b]) => GroupFactors::RealPair(a.real_matrix()?, b.real_matrix()?),
        (Backend::ComplexFull, [a, b]) => GroupFactors::ComplexPair(a.complex_matrix(), b.complex_matrix()),
        (Backend::ComplexSymmetric, [a]) => GroupFactors::Complex(a.complex_matrix()),
        (Backend::RealSkew, [a]) => GroupFactors::Real(a.real_matrix()?),
        _ => {
            let want = if matches!(backend, Backend::RealFull | Backend::ComplexFull) { 2 } else { 1 };
            return Err(Error::Parse(format!(
                "{} Levi factors given, model takes {want}",
                lits.len()
            )));
        }
    };
    LeviElement::new(case, factors)
}

/// Parses `lit` or `[lit, lit]` from JSON text.
pub fn parse_levi(case: &CaseDescriptor, text: &str) -> Result<LeviElement<f64>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    let lits: Vec<MatrixLiteral> = if v.is_array() {
        serde_json::from_value(v)?
    } else {
        vec![serde_json::from_value(v)?]
    };
    levi_from_literals(case, &lits)
}
