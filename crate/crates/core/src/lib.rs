//! Spreadsheet-to-RDF mapping prediction, execution and evaluation.
//!
//! The crate turns messy spreadsheet tables into RDF knowledge graphs in three
//! stages that can also be run independently:
//!
//! 1. **Prediction** ([`templates`]): every column of a table is scored against a
//!    fixed catalogue of RML object-map templates (native datatypes, string-encoded
//!    numbers/dates/booleans, entity references, formatted-text extraction). The
//!    best template is chosen per column and remaining cells are covered
//!    recursively, producing a prediction tree.
//! 2. **Mapping & execution** ([`rml`]): prediction trees are materialized as an
//!    explicit RML mapping document (Turtle) which an internal executor runs over
//!    the workbook, producing RDF statements annotated with the originating cell.
//! 3. **Evaluation** ([`matching`]): actual and expected statement sets are
//!    compared per cell with a greedy injective resource matching, yielding
//!    precision / recall / f-measure.
//!
//! Sheets are read from XLSX ([`xlsx`]) or from a lossless JSON interchange
//! format ([`canonical`]) that keeps fixtures reviewable in plain text.

pub mod canonical;
pub mod cell;
pub mod config;
pub mod fno;
pub mod matching;
pub mod pipeline;
pub mod richtext;
pub mod rml;
pub mod templates;
pub mod typing;
pub mod vocab;
pub mod xlsx;

pub use cell::{Cell, CellValue, Sheet, Table};
pub use config::RunConfig;
