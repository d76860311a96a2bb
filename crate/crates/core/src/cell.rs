//! In-memory spreadsheet representation.
//!
//! A [`Sheet`] is a sparse grid of typed cells; coordinates that carry no cell
//! are implicitly blank. [`Table`] pins down the header row, the entity rows
//! and the populated columns of a sheet, which is all the structure the
//! prediction stage assumes.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// The typed content of a single cell.
///
/// Exactly one variant is active per cell. Numbers keep their spreadsheet
/// number-format string verbatim; partially formatted text is stored as an
/// HTML fragment restricted to the tags `b`, `i`, `u`, `strike` and
/// `font color="#rrggbb"` (see [`crate::richtext`]).
#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Blank,
    Boolean(bool),
    Numeric { value: f64, format: Option<String> },
    Text(String),
    RichText(String),
}

impl CellValue {
    pub fn is_blank(&self) -> bool {
        matches!(self, CellValue::Blank)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CellValue::Blank => "blank",
            CellValue::Boolean(_) => "boolean",
            CellValue::Numeric { .. } => "numeric",
            CellValue::Text(_) => "text",
            CellValue::RichText(_) => "richtext",
        }
    }
}

/// A cell together with its zero-based coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub column: u32,
    pub row: u32,
    pub value: CellValue,
}

/// A named, immutable grid of cells.
///
/// Cells are stored sparsely keyed by `(row, column)`; `width`/`height` bound
/// the addressable area. Blank cells are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Sheet {
    name: String,
    width: u32,
    height: u32,
    cells: BTreeMap<(u32, u32), CellValue>,
}

#[derive(Debug, Error, PartialEq)]
pub enum SheetError {
    #[error("cell ({column},{row}) lies outside the {width}x{height} sheet")]
    OutOfBounds {
        column: u32,
        row: u32,
        width: u32,
        height: u32,
    },
    #[error("duplicate cell at ({column},{row})")]
    DuplicateCell { column: u32, row: u32 },
    #[error("sheet is entirely blank, no table")]
    NoTable,
}

impl Sheet {
    pub fn new(name: impl Into<String>, width: u32, height: u32) -> Self {
        Sheet {
            name: name.into(),
            width,
            height,
            cells: BTreeMap::new(),
        }
    }

    /// Builds a sheet from explicit cells; bounds and uniqueness are checked.
    pub fn from_cells(
        name: impl Into<String>,
        width: u32,
        height: u32,
        cells: impl IntoIterator<Item = Cell>,
    ) -> Result<Self, SheetError> {
        let mut sheet = Sheet::new(name, width, height);
        for cell in cells {
            sheet.insert(cell)?;
        }
        Ok(sheet)
    }

    fn insert(&mut self, cell: Cell) -> Result<(), SheetError> {
        if cell.column >= self.width || cell.row >= self.height {
            return Err(SheetError::OutOfBounds {
                column: cell.column,
                row: cell.row,
                width: self.width,
                height: self.height,
            });
        }
        if cell.value.is_blank() {
            return Ok(());
        }
        let key = (cell.row, cell.column);
        if self.cells.contains_key(&key) {
            return Err(SheetError::DuplicateCell {
                column: cell.column,
                row: cell.row,
            });
        }
        self.cells.insert(key, cell.value);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// The value at a coordinate; absent coordinates are blank.
    pub fn value_at(&self, column: u32, row: u32) -> &CellValue {
        self.cells.get(&(row, column)).unwrap_or(&CellValue::Blank)
    }

    /// Non-blank cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().map(|(&(row, column), value)| Cell {
            column,
            row,
            value: value.clone(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn row_is_blank(&self, row: u32) -> bool {
        self.cells.range((row, 0)..(row, u32::MAX)).next().is_none()
    }
}

/// A localized table within a sheet: one header row followed by entity rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub sheet: Sheet,
    pub header_row: u32,
    pub entity_rows: Vec<u32>,
    pub columns: Vec<u32>,
}

impl Table {
    /// Header text of a column, if any.
    pub fn header_text(&self, column: u32) -> Option<String> {
        match self.sheet.value_at(column, self.header_row) {
            CellValue::Blank => None,
            CellValue::Text(t) => Some(t.clone()),
            CellValue::RichText(html) => crate::richtext::strip_tags(html).ok(),
            CellValue::Boolean(b) => Some(b.to_string()),
            CellValue::Numeric { value, .. } => Some(crate::typing::render_number(*value)),
        }
    }
}

/// Locates the table of a sheet: the first non-blank row is the header, every
/// later row with at least one non-blank cell is an entity row, and every
/// column index holding at least one non-blank cell participates.
pub fn extract_table(sheet: &Sheet) -> Result<Table, SheetError> {
    if sheet.is_empty() {
        return Err(SheetError::NoTable);
    }
    let header_row = (0..sheet.height)
        .find(|&row| !sheet.row_is_blank(row))
        .ok_or(SheetError::NoTable)?;
    let entity_rows: Vec<u32> = (header_row + 1..sheet.height)
        .filter(|&row| !sheet.row_is_blank(row))
        .collect();
    let mut columns: Vec<u32> = sheet.cells.keys().map(|&(_, column)| column).collect();
    columns.sort_unstable();
    columns.dedup();
    Ok(Table {
        sheet: sheet.clone(),
        header_row,
        entity_rows,
        columns,
    })
}

/// Spreadsheet-style column label: 0 -> `A`, 25 -> `Z`, 26 -> `AA`.
pub fn column_letter(mut index: u32) -> String {
    let mut letters = Vec::new();
    loop {
        letters.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    letters.reverse();
    String::from_utf8(letters).unwrap()
}

/// Inverse of [`column_letter`].
pub fn column_index(letters: &str) -> Option<u32> {
    if letters.is_empty() {
        return None;
    }
    let mut index: u32 = 0;
    for ch in letters.chars() {
        if !ch.is_ascii_uppercase() {
            return None;
        }
        index = index.checked_mul(26)?.checked_add(ch as u32 - 'A' as u32 + 1)?;
    }
    Some(index - 1)
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", column_letter(self.column), self.row + 1)
    }
}

/// An ordered collection of sheets with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct Workbook {
    pub sheets: Vec<Sheet>,
}

impl Workbook {
    pub fn sheet(&self, name: &str) -> Option<&Sheet> {
        self.sheets.iter().find(|s| s.name() == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(column: u32, row: u32, content: &str) -> Cell {
        Cell {
            column,
            row,
            value: CellValue::Text(content.into()),
        }
    }

    #[test]
    fn extract_table_counts_entity_rows() {
        let sheet = Sheet::from_cells(
            "s",
            2,
            4,
            vec![
                text(0, 0, "h1"),
                text(1, 0, "h2"),
                text(0, 1, "a"),
                text(0, 2, "b"),
                text(1, 3, "c"),
            ],
        )
        .unwrap();
        let table = extract_table(&sheet).unwrap();
        assert_eq!(table.header_row, 0);
        assert_eq!(table.entity_rows, vec![1, 2, 3]);
        assert_eq!(table.columns, vec![0, 1]);
    }

    #[test]
    fn extract_table_skips_blank_middle_row() {
        let sheet = Sheet::from_cells(
            "s",
            1,
            4,
            vec![text(0, 0, "h"), text(0, 1, "a"), text(0, 3, "b")],
        )
        .unwrap();
        let table = extract_table(&sheet).unwrap();
        assert_eq!(table.entity_rows, vec![1, 3]);
    }

    #[test]
    fn extract_table_rejects_blank_sheet() {
        let sheet = Sheet::new("s", 3, 3);
        assert_eq!(extract_table(&sheet), Err(SheetError::NoTable));
    }

    #[test]
    fn extract_table_is_idempotent() {
        let sheet = Sheet::from_cells("s", 2, 3, vec![text(0, 0, "h"), text(1, 2, "v")]).unwrap();
        let first = extract_table(&sheet).unwrap();
        let second = extract_table(&first.sheet).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn blank_cells_are_not_stored() {
        let sheet = Sheet::from_cells(
            "s",
            1,
            1,
            vec![Cell {
                column: 0,
                row: 0,
                value: CellValue::Blank,
            }],
        )
        .unwrap();
        assert!(sheet.is_empty());
        assert_eq!(*sheet.value_at(0, 0), CellValue::Blank);
    }

    #[test]
    fn bounds_are_enforced() {
        let err = Sheet::from_cells("s", 1, 1, vec![text(1, 0, "x")]).unwrap_err();
        assert!(matches!(err, SheetError::OutOfBounds { .. }));
    }

    #[test]
    fn column_letters_round_trip() {
        for (index, letters) in [(0, "A"), (25, "Z"), (26, "AA"), (27, "AB"), (701, "ZZ"), (702, "AAA")] {
            assert_eq!(column_letter(index), letters);
            assert_eq!(column_index(letters), Some(index));
        }
        assert_eq!(column_index(""), None);
        assert_eq!(column_index("a1"), None);
    }
}
