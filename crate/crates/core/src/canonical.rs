//! Lossless plain-text interchange format for sheets.
//!
//! The canonical form is a JSON document
//! `{ "name", "width", "height", "cells": [...] }` where each cell record
//! carries `col`, `row`, a `kind` discriminator and exactly the payload
//! fields of its kind (`value` for booleans and numbers, optional `format`
//! for numbers, `text` for plain text, `html` for rich text). Unknown fields
//! are rejected. Serialization is deterministic: cells sort by row, then
//! column, and blank cells are never listed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cell::{Cell, CellValue, Sheet, SheetError};

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("canonical sheet parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cell #{index} at ({col},{row}): {problem}")]
    Record {
        index: usize,
        col: u32,
        row: u32,
        problem: String,
    },
    #[error(transparent)]
    Sheet(#[from] SheetError),
    #[error("rich text html in cell #{index} at ({col},{row}): {source}")]
    RichText {
        index: usize,
        col: u32,
        row: u32,
        source: crate::richtext::RichTextError,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SheetDoc {
    name: String,
    width: u32,
    height: u32,
    cells: Vec<CellRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellRecord {
    col: u32,
    row: u32,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    html: Option<String>,
}

impl CellRecord {
    fn into_value(self, index: usize) -> Result<CellValue, CanonicalError> {
        let fail = |problem: &str| CanonicalError::Record {
            index,
            col: self.col,
            row: self.row,
            problem: problem.to_string(),
        };
        let forbid = |field: &str, present: bool| {
            if present {
                Err(fail(&format!("field {field:?} is not allowed for kind {:?}", self.kind)))
            } else {
                Ok(())
            }
        };
        match self.kind.as_str() {
            "blank" => {
                forbid("value", self.value.is_some())?;
                forbid("format", self.format.is_some())?;
                forbid("text", self.text.is_some())?;
                forbid("html", self.html.is_some())?;
                Ok(CellValue::Blank)
            }
            "boolean" => {
                forbid("format", self.format.is_some())?;
                forbid("text", self.text.is_some())?;
                forbid("html", self.html.is_some())?;
                match self.value {
                    Some(serde_json::Value::Bool(flag)) => Ok(CellValue::Boolean(flag)),
                    Some(_) => Err(fail("boolean cell needs a boolean \"value\"")),
                    None => Err(fail("boolean cell is missing \"value\"")),
                }
            }
            "numeric" => {
                forbid("text", self.text.is_some())?;
                forbid("html", self.html.is_some())?;
                let value = match self.value {
                    Some(serde_json::Value::Number(n)) => n
                        .as_f64()
                        .ok_or_else(|| fail("numeric value does not fit a 64-bit float"))?,
                    Some(_) => return Err(fail("numeric cell needs a number \"value\"")),
                    None => return Err(fail("numeric cell is missing \"value\"")),
                };
                Ok(CellValue::Numeric { value, format: self.format })
            }
            "text" => {
                forbid("value", self.value.is_some())?;
                forbid("format", self.format.is_some())?;
                forbid("html", self.html.is_some())?;
                match self.text {
                    Some(text) => Ok(CellValue::Text(text)),
                    None => Err(fail("text cell is missing \"text\"")),
                }
            }
            "richtext" => {
                forbid("value", self.value.is_some())?;
                forbid("format", self.format.is_some())?;
                forbid("text", self.text.is_some())?;
                match self.html {
                    Some(html) => {
                        crate::richtext::parse_fragment(&html).map_err(|source| {
                            CanonicalError::RichText { index, col: self.col, row: self.row, source }
                        })?;
                        Ok(CellValue::RichText(html))
                    }
                    None => Err(fail("richtext cell is missing \"html\"")),
                }
            }
            other => Err(fail(&format!("unknown cell kind {other:?}"))),
        }
    }

    fn from_cell(cell: &Cell) -> CellRecord {
        let mut record = CellRecord {
            col: cell.column,
            row: cell.row,
            kind: cell.value.kind().to_string(),
            value: None,
            format: None,
            text: None,
            html: None,
        };
        match &cell.value {
            CellValue::Blank => {}
            CellValue::Boolean(flag) => record.value = Some(serde_json::Value::Bool(*flag)),
            CellValue::Numeric { value, format } => {
                record.value = Some(serde_json::json!(value));
                record.format = format.clone();
            }
            CellValue::Text(text) => record.text = Some(text.clone()),
            CellValue::RichText(html) => record.html = Some(html.clone()),
        }
        record
    }
}

/// Parses a canonical sheet document.
pub fn parse_canonical(document: &str) -> Result<Sheet, CanonicalError> {
    let doc: SheetDoc = serde_json::from_str(document)?;
    let mut cells = Vec::with_capacity(doc.cells.len());
    for (index, record) in doc.cells.into_iter().enumerate() {
        let (col, row) = (record.col, record.row);
        let value = record.into_value(index)?;
        cells.push(Cell { column: col, row, value });
    }
    Ok(Sheet::from_cells(doc.name, doc.width, doc.height, cells)?)
}

/// Serializes a sheet deterministically (cells by row, then column).
pub fn serialize_canonical(sheet: &Sheet) -> String {
    let doc = SheetDoc {
        name: sheet.name().to_string(),
        width: sheet.width(),
        height: sheet.height(),
        cells: sheet.cells().map(|cell| CellRecord::from_cell(&cell)).collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("sheet serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_text_cell() {
        let doc = r#"{"name":"s","width":1,"height":1,
            "cells":[{"col":0,"row":0,"kind":"text","text":"Hi"}]}"#;
        let sheet = parse_canonical(doc).unwrap();
        assert_eq!(*sheet.value_at(0, 0), CellValue::Text("Hi".into()));
    }

    #[test]
    fn numeric_format_is_preserved_verbatim() {
        let doc = r#"{"name":"s","width":1,"height":1,"cells":[
            {"col":0,"row":0,"kind":"numeric","value":44228.3479166667,
             "format":"MM/DD/YYYY HH:MM AM/PM"}]}"#;
        let sheet = parse_canonical(doc).unwrap();
        match sheet.value_at(0, 0) {
            CellValue::Numeric { value, format } => {
                assert_eq!(*value, 44228.3479166667);
                assert_eq!(format.as_deref(), Some("MM/DD/YYYY HH:MM AM/PM"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let out = serialize_canonical(&sheet);
        assert!(out.contains("44228.3479166667"));
        assert!(out.contains("MM/DD/YYYY HH:MM AM/PM"));
    }

    #[test]
    fn empty_cell_list_is_an_all_blank_sheet() {
        let sheet = parse_canonical(r#"{"name":"s","width":2,"height":2,"cells":[]}"#).unwrap();
        assert!(sheet.is_empty());
        assert_eq!(*sheet.value_at(1, 1), CellValue::Blank);
    }

    #[test]
    fn blank_sheet_serializes_to_empty_cell_list() {
        let out = serialize_canonical(&Sheet::new("s", 2, 2));
        let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(parsed["cells"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn richtext_html_preserved_verbatim() {
        let doc = r#"{"name":"s","width":1,"height":1,"cells":[
            {"col":0,"row":0,"kind":"richtext","html":"<b>a</b> b"}]}"#;
        let sheet = parse_canonical(doc).unwrap();
        assert_eq!(*sheet.value_at(0, 0), CellValue::RichText("<b>a</b> b".into()));
        assert!(serialize_canonical(&sheet).contains("<b>a</b> b"));
    }

    #[test]
    fn round_trip_is_identity_after_normalization() {
        let doc = r#"{"name":"s","width":2,"height":2,"cells":[
            {"col":1,"row":1,"kind":"boolean","value":true},
            {"col":0,"row":0,"kind":"blank"},
            {"col":0,"row":1,"kind":"numeric","value":1.5}]}"#;
        let sheet = parse_canonical(doc).unwrap();
        let serialized = serialize_canonical(&sheet);
        let reparsed = parse_canonical(&serialized).unwrap();
        assert_eq!(sheet, reparsed);
        assert_eq!(serialize_canonical(&reparsed), serialized);
    }

    #[test]
    fn unknown_fields_and_kinds_are_rejected() {
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"text","text":"x","bogus":1}]}"#
        )
        .is_err());
        let err = parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"magic"}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown cell kind"));
    }

    #[test]
    fn kind_payload_matrix_is_enforced() {
        // numeric payload on a text cell
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"text","text":"x","value":1}]}"#
        )
        .is_err());
        // missing payload
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"numeric"}]}"#
        )
        .is_err());
        // format on a boolean
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"boolean","value":true,"format":"0"}]}"#
        )
        .is_err());
    }

    #[test]
    fn duplicate_and_out_of_bounds_cells_are_rejected() {
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,"cells":[
                {"col":0,"row":0,"kind":"text","text":"a"},
                {"col":0,"row":0,"kind":"text","text":"b"}]}"#
        )
        .is_err());
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":5,"row":0,"kind":"text","text":"a"}]}"#
        )
        .is_err());
    }

    #[test]
    fn malformed_richtext_is_rejected() {
        assert!(parse_canonical(
            r#"{"name":"s","width":1,"height":1,
                "cells":[{"col":0,"row":0,"kind":"richtext","html":"<b>oops"}]}"#
        )
        .is_err());
    }
}
