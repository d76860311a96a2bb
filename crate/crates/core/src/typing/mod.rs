//! Cell typing predicates and the duplication-degree heuristic.
//!
//! These are the auxiliary functions every template heuristic is built from:
//! decimal places of a number, data-format classification, string rendering,
//! delimiter splitting, integer/decimal/date parsing predicates and the
//! `dup` duplication degree that separates plain strings from entity columns.

pub mod dates;

use std::collections::HashMap;

use thiserror::Error;

use crate::cell::CellValue;
pub use dates::{DateGrammar, DateLocale};

#[derive(Debug, Error, PartialEq)]
pub enum TypingError {
    #[error("decimal places are undefined for non-finite number {0}")]
    NonFinite(f64),
}

/// Shortest round-trip decimal rendering of a 64-bit float.
///
/// Integral values render without a fractional part (`42`, not `42.0`),
/// matching how spreadsheets display typed integers. Negative zero
/// normalizes to `0`.
pub fn render_number(value: f64) -> String {
    let rendered = format!("{value}");
    if rendered == "-0" {
        "0".to_string()
    } else {
        rendered
    }
}

/// Number of decimal digits in the shortest round-trip rendering, capped at 10.
pub fn decimal_places(value: f64) -> Result<u32, TypingError> {
    if !value.is_finite() {
        return Err(TypingError::NonFinite(value));
    }
    let rendered = render_number(value);
    Ok(match rendered.find('.') {
        Some(dot) => ((rendered.len() - dot - 1) as u32).min(10),
        None => 0,
    })
}

/// Classification of a spreadsheet number-format string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DataFormatType {
    Date,
    DateTime,
    /// Text-only multi-section formats such as `"Yes";;"No";` that display
    /// numbers as fixed strings.
    BooleanDisplay,
    Other,
}

impl DataFormatType {
    pub fn name(&self) -> &'static str {
        match self {
            DataFormatType::Date => "date",
            DataFormatType::DateTime => "datetime",
            DataFormatType::BooleanDisplay => "boolean-display",
            DataFormatType::Other => "other",
        }
    }
}

/// Classifies a number-format string. Total: anything unrecognized is `Other`.
///
/// Date tokens are `d`/`m`/`y`, time tokens `h`/`s`/`AM/PM`, all considered
/// outside quoted literals, bracket sections and escaped characters.
pub fn data_format_type(format: Option<&str>) -> DataFormatType {
    let Some(format) = format else {
        return DataFormatType::Other;
    };
    let scan = scan_format(format);
    if scan.has_date {
        if scan.has_time {
            return DataFormatType::DateTime;
        }
        return DataFormatType::Date;
    }
    if scan.section_count >= 2 && scan.text_only && scan.has_quoted_literal {
        return DataFormatType::BooleanDisplay;
    }
    DataFormatType::Other
}

struct FormatScan {
    has_date: bool,
    has_time: bool,
    section_count: usize,
    text_only: bool,
    has_quoted_literal: bool,
}

fn scan_format(format: &str) -> FormatScan {
    let mut scan = FormatScan {
        has_date: false,
        has_time: false,
        section_count: 1,
        text_only: true,
        has_quoted_literal: false,
    };
    let chars: Vec<char> = format.chars().collect();
    let mut i = 0;
    let mut in_quote = false;
    let mut in_bracket = false;
    while i < chars.len() {
        let c = chars[i];
        if in_quote {
            if c == '"' {
                in_quote = false;
            } else {
                scan.has_quoted_literal = true;
            }
            i += 1;
            continue;
        }
        if in_bracket {
            if c == ']' {
                in_bracket = false;
            }
            i += 1;
            continue;
        }
        match c {
            '"' => in_quote = true,
            '[' => in_bracket = true,
            '\\' | '_' | '*' => i += 1, // escape and padding consume the next char
            ';' => scan.section_count += 1,
            _ => {
                // AM/PM markers are time tokens, not month/meridiem letters
                let rest: String = chars[i..].iter().take(5).collect::<String>().to_ascii_uppercase();
                if rest.starts_with("AM/PM") {
                    scan.has_time = true;
                    scan.text_only = false;
                    i += 5;
                    continue;
                }
                if rest.starts_with("A/P") {
                    scan.has_time = true;
                    scan.text_only = false;
                    i += 3;
                    continue;
                }
                match c.to_ascii_lowercase() {
                    'd' | 'm' | 'y' => {
                        scan.has_date = true;
                        scan.text_only = false;
                    }
                    'h' | 's' => {
                        scan.has_time = true;
                        scan.text_only = false;
                    }
                    c if c.is_ascii_alphanumeric() || c == '#' || c == '?' => {
                        scan.text_only = false;
                    }
                    _ => {}
                }
            }
        }
        i += 1;
    }
    scan
}

/// The display string of a cell: text content, `true`/`false` for booleans,
/// shortest round-trip rendering for numbers, tag-stripped text for rich text.
pub fn str_value(value: &CellValue) -> String {
    match value {
        CellValue::Blank => String::new(),
        CellValue::Boolean(b) => b.to_string(),
        CellValue::Numeric { value, .. } => render_number(*value),
        CellValue::Text(content) => content.clone(),
        CellValue::RichText(html) => {
            crate::richtext::strip_tags(html).unwrap_or_else(|_| html.clone())
        }
    }
}

/// Splits on maximal runs of delimiter characters and returns the distinct
/// substrings in first-occurrence order.
///
/// A character is part of a token when it is a letter, a digit, or a decimal
/// point directly between two digits (so `3.14` stays one token while
/// `DFKI; TUKL (42)` splits into `DFKI`, `TUKL`, `42`).
pub fn sep(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let is_token_char = c.is_alphanumeric()
            || (c == '.'
                && i > 0
                && i + 1 < chars.len()
                && chars[i - 1].is_ascii_digit()
                && chars[i + 1].is_ascii_digit());
        if is_token_char {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    let mut distinct = Vec::new();
    for token in tokens {
        if !distinct.contains(&token) {
            distinct.push(token);
        }
    }
    distinct
}

/// Accepts optionally signed strings of decimal digits, nothing else.
pub fn is_int(text: &str) -> bool {
    let t = text.trim();
    let t = t.strip_prefix(['+', '-']).unwrap_or(t);
    !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
}

/// Accepts decimal numbers written with the given decimal point character;
/// at least one digit must follow the point and no other non-digit characters
/// are allowed, so the opposite separator is always rejected.
pub fn is_dec(text: &str, point: char) -> bool {
    let t = text.trim();
    let t = t.strip_prefix(['+', '-']).unwrap_or(t);
    let Some((before, after)) = t.split_once(point) else {
        return false;
    };
    !after.is_empty()
        && before.bytes().all(|b| b.is_ascii_digit())
        && after.bytes().all(|b| b.is_ascii_digit())
}

/// One element entering the duplication degree: either a string value or an
/// element that always counts as distinct (numbers and booleans).
enum DupElement<'a> {
    Str(&'a str),
    Distinct,
}

/// dup(C) = (2|C| - |U| - |P| + 1) / (2|C|), 0 whenever |C| <= 1.
///
/// `U` holds the string elements whose value occurs exactly once plus every
/// always-distinct element; `P` holds the distinct string values plus every
/// always-distinct element.
fn dup_core<'a>(elements: impl IntoIterator<Item = DupElement<'a>>) -> f64 {
    let mut strings: Vec<&str> = Vec::new();
    let mut distinct_extra = 0usize;
    for element in elements {
        match element {
            DupElement::Str(s) => strings.push(s),
            DupElement::Distinct => distinct_extra += 1,
        }
    }
    let total = strings.len() + distinct_extra;
    if total <= 1 {
        return 0.0;
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in &strings {
        *freq.entry(s).or_insert(0) += 1;
    }
    let unique = strings.iter().filter(|s| freq[**s] == 1).count() + distinct_extra;
    let values = freq.len() + distinct_extra;
    (2.0 * total as f64 - unique as f64 - values as f64 + 1.0) / (2.0 * total as f64)
}

/// Duplication degree of a list of cells. String cells compare by their
/// string value; numeric and boolean cells are always considered distinct.
pub fn dup(cells: &[CellValue]) -> f64 {
    let strings: Vec<String> = cells
        .iter()
        .filter(|c| matches!(c, CellValue::Text(_) | CellValue::RichText(_)))
        .map(str_value)
        .collect();
    let mut string_iter = strings.iter();
    dup_core(cells.iter().filter(|c| !c.is_blank()).map(|c| match c {
        CellValue::Text(_) | CellValue::RichText(_) => DupElement::Str(string_iter.next().unwrap()),
        _ => DupElement::Distinct,
    }))
}

/// Duplication degree over bare string values, each occurrence counting as
/// one pseudo-cell.
pub fn dup_multiset(values: &[String]) -> f64 {
    dup_with_distinct(values, 0)
}

/// [`dup_multiset`] with `extra_distinct` additional always-distinct members
/// (the numeric and boolean cells accompanying a substring multiset).
pub fn dup_with_distinct(values: &[String], extra_distinct: usize) -> f64 {
    dup_core(
        values
            .iter()
            .map(|v| DupElement::Str(v))
            .chain((0..extra_distinct).map(|_| DupElement::Distinct)),
    )
}

/// Identifies a cell inside one column: either a real sheet row or one
/// formatted-text span extracted from a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellId {
    Row(u32),
    Span { row: u32, span: u32 },
}

impl CellId {
    pub fn row(&self) -> u32 {
        match self {
            CellId::Row(row) => *row,
            CellId::Span { row, .. } => *row,
        }
    }
}

/// A cell participating in column scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct PCell {
    pub id: CellId,
    pub value: CellValue,
}

/// The non-blank cells of one column, partitioned on demand into booleans
/// `B`, numerics `N`, plain strings `S` and formatted cells `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPartition {
    pub column: u32,
    pub cells: Vec<PCell>,
}

impl ColumnPartition {
    /// Gathers the non-blank entity-row cells of a table column.
    pub fn from_table(table: &crate::cell::Table, column: u32) -> ColumnPartition {
        let cells = table
            .entity_rows
            .iter()
            .filter_map(|&row| {
                let value = table.sheet.value_at(column, row);
                (!value.is_blank()).then(|| PCell {
                    id: CellId::Row(row),
                    value: value.clone(),
                })
            })
            .collect();
        ColumnPartition { column, cells }
    }

    pub fn from_cells(column: u32, cells: Vec<PCell>) -> ColumnPartition {
        ColumnPartition { column, cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn booleans(&self) -> impl Iterator<Item = &PCell> {
        self.cells.iter().filter(|c| matches!(c.value, CellValue::Boolean(_)))
    }

    pub fn numerics(&self) -> impl Iterator<Item = &PCell> {
        self.cells.iter().filter(|c| matches!(c.value, CellValue::Numeric { .. }))
    }

    /// Plain text cells (`S`); rich text belongs to `F`, not `S`.
    pub fn strings(&self) -> impl Iterator<Item = &PCell> {
        self.cells.iter().filter(|c| matches!(c.value, CellValue::Text(_)))
    }

    pub fn formatted(&self) -> impl Iterator<Item = &PCell> {
        self.cells.iter().filter(|c| matches!(c.value, CellValue::RichText(_)))
    }

    /// The substring multiset: every string cell contributes its distinct
    /// separated tokens, multiplicity accumulating across cells.
    pub fn substrings(&self) -> Vec<String> {
        self.strings()
            .flat_map(|c| sep(&str_value(&c.value)))
            .collect()
    }

    /// The cells whose ids are not in `covered`, as a new partition.
    pub fn without(&self, covered: &std::collections::BTreeSet<CellId>) -> ColumnPartition {
        ColumnPartition {
            column: self.column,
            cells: self
                .cells
                .iter()
                .filter(|c| !covered.contains(&c.id))
                .cloned()
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(values: &[&str]) -> Vec<CellValue> {
        values.iter().map(|v| CellValue::Text(v.to_string())).collect()
    }

    #[test]
    fn dup_reproduces_the_worked_value_table() {
        let table: &[(&[&str], f64)] = &[
            (&["a", "a", "a", "a", "a", "a"], 1.00),
            (&["a", "a", "a", "b", "b", "b"], 0.92),
            (&["a", "a", "a", "a", "b", "b"], 0.92),
            (&["a", "a", "b", "b", "c", "c"], 0.83),
            (&["a", "a", "a", "b", "b", "c"], 0.75),
            (&["a", "a", "a", "b", "b", "b", "c", "d"], 0.69),
            (&["a", "a", "b", "b", "b", "c", "d"], 0.64),
            (&["a", "a", "b", "b", "c", "d"], 0.58),
            (&["a", "a", "a", "a", "b", "c", "d", "e"], 0.50),
            (&["a", "a", "a", "b", "c", "d"], 0.50),
            (&["a", "a", "b", "c"], 0.50),
            (&["a", "a", "a", "c", "d", "e", "f"], 0.43),
            (&["a", "a", "c", "d", "e", "f"], 0.33),
            (&["a", "b", "c", "d", "e", "f"], 0.08),
        ];
        for (values, expected) in table {
            let got = dup(&texts(values));
            assert!(
                (got - expected).abs() <= 0.005,
                "dup({values:?}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn dup_degenerate_sizes_are_zero() {
        assert_eq!(dup(&[]), 0.0);
        assert_eq!(dup(&texts(&["a"])), 0.0);
        assert_eq!(dup_multiset(&[]), 0.0);
        assert_eq!(dup_multiset(&["a".into()]), 0.0);
    }

    #[test]
    fn dup_counts_numerics_and_booleans_as_distinct() {
        // two identical numbers still count as two distinct elements
        let cells = vec![
            CellValue::Numeric { value: 1.0, format: None },
            CellValue::Numeric { value: 1.0, format: None },
        ];
        assert!((dup(&cells) - 0.25).abs() < 1e-12); // (4-2-2+1)/4
    }

    #[test]
    fn dup_multiset_worked_values() {
        let xs: Vec<String> = ["x", "x", "y", "y"].iter().map(|s| s.to_string()).collect();
        assert!((dup_multiset(&xs) - 0.875).abs() < 1e-12);
        let ab: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        assert!((dup_multiset(&ab) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sep_worked_example() {
        assert_eq!(sep("DFKI; TUKL (42)"), vec!["DFKI", "TUKL", "42"]);
        assert_eq!(sep(""), Vec::<String>::new());
        assert_eq!(sep("42, 15; 3"), vec!["42", "15", "3"]);
        assert_eq!(sep("3.14 and 2.5"), vec!["3.14", "and", "2.5"]);
        assert_eq!(sep("a.b"), vec!["a", "b"]);
        assert_eq!(sep("x; x; y"), vec!["x", "y"]);
    }

    #[test]
    fn decimal_places_examples() {
        assert_eq!(decimal_places(0.023), Ok(3));
        assert_eq!(decimal_places(42.0), Ok(0));
        assert_eq!(decimal_places(1.5), Ok(1));
        assert_eq!(decimal_places(0.1 + 0.2), Ok(10)); // capped
        assert_eq!(decimal_places(44228.3479166667), Ok(10));
        assert!(decimal_places(f64::NAN).is_err());
        assert!(decimal_places(f64::INFINITY).is_err());
    }

    #[test]
    fn render_number_is_shortest_round_trip() {
        assert_eq!(render_number(42.0), "42");
        assert_eq!(render_number(3.14), "3.14");
        assert_eq!(render_number(-0.0), "0");
        assert_eq!(render_number(1e21), "1000000000000000000000");
    }

    #[test]
    fn int_and_dec_predicates() {
        assert!(is_int("042"));
        assert!(is_int("-7"));
        assert!(!is_int("4.2"));
        assert!(!is_int(""));
        assert!(is_dec("3,14", ','));
        assert!(!is_dec("3,14", '.'));
        assert!(is_dec("3.14", '.'));
        assert!(is_dec(".5", '.'));
        assert!(!is_dec("3.", '.'));
        assert!(!is_dec("1.234,5", ','));
    }

    #[test]
    fn data_format_classification() {
        assert_eq!(
            data_format_type(Some("MM/DD/YYYY HH:MM AM/PM")),
            DataFormatType::DateTime
        );
        assert_eq!(data_format_type(Some("MM/DD/YYYY")), DataFormatType::Date);
        assert_eq!(data_format_type(Some("yyyy-mm-dd")), DataFormatType::Date);
        assert_eq!(
            data_format_type(Some("\"Yes\";;\"No\";")),
            DataFormatType::BooleanDisplay
        );
        assert_eq!(data_format_type(Some("#,##0.00")), DataFormatType::Other);
        assert_eq!(data_format_type(Some("General")), DataFormatType::Other);
        assert_eq!(data_format_type(None), DataFormatType::Other);
        // date letters inside quotes do not count
        assert_eq!(data_format_type(Some("\"dym\";\"x\"")), DataFormatType::BooleanDisplay);
        // sections with number placeholders are not text-only
        assert_eq!(data_format_type(Some("0;;\"No\";")), DataFormatType::Other);
    }

    #[test]
    fn str_value_per_kind() {
        assert_eq!(str_value(&CellValue::Text("DFKI".into())), "DFKI");
        assert_eq!(str_value(&CellValue::Numeric { value: 42.0, format: None }), "42");
        assert_eq!(str_value(&CellValue::Boolean(true)), "true");
        assert_eq!(str_value(&CellValue::Blank), "");
        assert_eq!(str_value(&CellValue::RichText("<b>a</b> b".into())), "a b");
    }
}
