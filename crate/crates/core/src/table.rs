//! Knot table: PD codes, A-polynomials and reference volumes.

use std::collections::BTreeSet;
use std::path::Path;

use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acurve::BivarPoly;
use crate::knotcore::{KnotError, PlanarDiagram};

const BUILTIN: &str = include_str!("../data/knots.json");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("unknown knot {0:?}")]
    UnknownKnot(String),
    #[error("duplicate knot name {0:?}")]
    Duplicate(String),
    #[error("knot {name}: {source}")]
    Diagram { name: String, source: KnotError },
    #[error("knot {0}: no A-polynomial in table")]
    NoAPoly(String),
    #[error("knot {0}: bad decimal {1:?}")]
    Decimal(String, String),
    #[error("table parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("cannot read table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnotRecord {
    pub name: String,
    pub pd: Vec<[u32; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_poly: Option<BivarPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vol: Option<String>,
    /// `I_CS(iπ)` as decimal (re, im).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ics_anchor: Option<(String, String)>,
}

impl KnotRecord {
    pub fn diagram(&self) -> Result<PlanarDiagram, TableError> {
        if self.pd.is_empty() {
            return Ok(PlanarDiagram::unknot());
        }
        PlanarDiagram::knot(self.pd.clone())
            .map_err(|source| TableError::Diagram { name: self.name.clone(), source })
    }

    pub fn a_polynomial(&self) -> Result<&BivarPoly, TableError> {
        self.a_poly.as_ref().ok_or_else(|| TableError::NoAPoly(self.name.clone()))
    }

    pub fn volume(&self, prec: u32) -> Result<Option<Float>, TableError> {
        self.vol.as_ref().map(|v| parse_decimal(&self.name, v, prec)).transpose()
    }

    pub fn anchor(&self, prec: u32) -> Result<Option<Complex>, TableError> {
        match &self.ics_anchor {
            None => Ok(None),
            Some((re, im)) => {
                let re = parse_decimal(&self.name, re, prec)?;
                let im = parse_decimal(&self.name, im, prec)?;
                Ok(Some(Complex::with_val(prec, (re, im))))
            }
        }
    }
}

fn parse_decimal(name: &str, s: &str, prec: u32) -> Result<Float, TableError> {
    Float::parse(s)
        .map(|p| Float::with_val(prec, p))
        .map_err(|_| TableError::Decimal(name.to_string(), s.to_string()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KnotTable {
    pub knots: Vec<KnotRecord>,
}

impl KnotTable {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN).expect("builtin knot table")
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let table: Self = serde_json::from_str(text)?;
        let mut seen = BTreeSet::new();
        for k in &table.knots {
            if !seen.insert(k.name.as_str()) {
                return Err(TableError::Duplicate(k.name.clone()));
            }
            k.diagram()?;
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self, TableError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, name: &str) -> Result<&KnotRecord, TableError> {
        self.knots
            .iter()
            .find(|k| k.name == name)
            .ok_or_else(|| TableError::UnknownKnot(name.to_string()))
    }

    pub fn names(&self) -> Vec<&str> {
        self.knots.iter().map(|k| k.name.as_str()).collect()
    }
}
