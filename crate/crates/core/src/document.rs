//! Canonical JSON documents for frames and hybrid frames.
//!
//! ```json
//! { "dates": ["2020-01-01", ...],
//!   "columns": { "merchants_all": [-0.05, null, ...] },
//!   "roles": { "merchants_all": "target" },
//!   "provenance": { "column": "merchants_all", "cells": ["real", "synthetic:model_based", ...] } }
//! ```

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{CalendarDate, ColumnRole, ObservationFrame, Series};
use crate::impute::{HybridFrame, Provenance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceSection {
    pub column: String,
    pub cells: Vec<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDocument {
    pub dates: Vec<CalendarDate>,
    pub columns: IndexMap<String, Vec<Option<f64>>>,
    pub roles: IndexMap<String, ColumnRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceSection>,
}

impl From<&ObservationFrame> for FrameDocument {
    fn from(frame: &ObservationFrame) -> Self {
        FrameDocument {
            dates: frame.dates().to_vec(),
            columns: frame.columns().map(|(k, s)| (k.to_string(), s.iter().collect())).collect(),
            roles: frame.roles().map(|(k, r)| (k.to_string(), r)).collect(),
            provenance: None,
        }
    }
}

impl From<&HybridFrame> for FrameDocument {
    fn from(hybrid: &HybridFrame) -> Self {
        let mut doc = FrameDocument::from(&hybrid.frame);
        doc.provenance = Some(ProvenanceSection { column: hybrid.target.clone(), cells: hybrid.provenance.clone() });
        doc
    }
}

impl FrameDocument {
    pub fn to_frame(&self) -> Result<ObservationFrame> {
        let mut frame = ObservationFrame::new(self.dates.clone())?;
        for (name, cells) in &self.columns {
            let role = self.roles.get(name).copied().unwrap_or_default();
            frame.insert_column(name, Series::from_options(cells.iter().copied()), role)?;
        }
        Ok(frame)
    }

    pub fn to_hybrid(&self) -> Result<HybridFrame> {
        let section =
            self.provenance.as_ref().ok_or_else(|| Error::Format("document has no provenance section".into()))?;
        let frame = self.to_frame()?;
        if section.cells.len() != frame.n_rows() {
            return Err(Error::Format("provenance length differs from row count".into()));
        }
        frame.column(&section.column)?;
        Ok(HybridFrame { frame, target: section.column.clone(), provenance: section.cells.clone() })
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("frame documents always serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Reads a frame document, ignoring any provenance section.
pub fn read_frame(path: &Path) -> Result<ObservationFrame> {
    FrameDocument::read(path)?.to_frame()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::build_frame;

    #[test]
    fn json_shape_uses_null_for_missing() {
        let dates = CalendarDate::new(2020, 1, 1).unwrap().consecutive(2);
        let frame = build_frame(dates, vec![("x", vec![Some(0.5), None])]).unwrap();
        let json = FrameDocument::from(&frame).to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["dates"][1], "2020-01-02");
        assert_eq!(value["columns"]["x"][0], 0.5);
        assert!(value["columns"]["x"][1].is_null());
        assert_eq!(value["roles"]["x"], "feature");
        assert!(value.get("provenance").is_none());
    }

    #[test]
    fn missing_provenance_is_an_error_for_hybrids() {
        let frame = build_frame::<&str>(vec![], vec![]).unwrap();
        assert!(FrameDocument::from(&frame).to_hybrid().is_err());
    }
}
