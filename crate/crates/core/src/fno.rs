//! The transformation functions callable from object maps.
//!
//! Eight functions cover the messy-data cases: `parseNumber`, `parseBoolean`,
//! `parseDate`, `parseDateTime` turn string-encoded values into typed
//! literals, `entityLinking` resolves mentions against a gazetteer, and the
//! three `getEntitiesBy*` functions extract spans from formatted text and
//! feed them to an inner call. All functions are total over cell content —
//! unparseable input yields no value rather than an error — with one
//! exception: a malformed rich-text fragment is a real error.

use std::sync::LazyLock;

use aho_corasick::AhoCorasick;
use regex::Regex;
use thiserror::Error;

use crate::cell::CellValue;
use crate::richtext::{self, Node, RichTextError, Tag};
use crate::typing::dates::{civil_from_days, days_from_civil, CivilDate, CivilTime, DateGrammar};
use crate::typing;
use crate::vocab;

#[derive(Debug, Error, PartialEq)]
pub enum FnError {
    #[error("rich text input: {0}")]
    RichText(#[from] RichTextError),
}

/// The eight function identities, addressable by stable IRIs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionId {
    ParseNumber,
    ParseBoolean,
    ParseDate,
    ParseDateTime,
    EntityLinking,
    GetEntitiesByTag,
    GetEntitiesByColor,
    GetEntitiesByUnformatted,
}

impl FunctionId {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionId::ParseNumber => "parseNumber",
            FunctionId::ParseBoolean => "parseBoolean",
            FunctionId::ParseDate => "parseDate",
            FunctionId::ParseDateTime => "parseDateTime",
            FunctionId::EntityLinking => "entityLinking",
            FunctionId::GetEntitiesByTag => "getEntitiesByTag",
            FunctionId::GetEntitiesByColor => "getEntitiesByColor",
            FunctionId::GetEntitiesByUnformatted => "getEntitiesByUnformatted",
        }
    }

    pub fn from_name(name: &str) -> Option<FunctionId> {
        Some(match name {
            "parseNumber" => FunctionId::ParseNumber,
            "parseBoolean" => FunctionId::ParseBoolean,
            "parseDate" => FunctionId::ParseDate,
            "parseDateTime" => FunctionId::ParseDateTime,
            "entityLinking" => FunctionId::EntityLinking,
            "getEntitiesByTag" => FunctionId::GetEntitiesByTag,
            "getEntitiesByColor" => FunctionId::GetEntitiesByColor,
            "getEntitiesByUnformatted" => FunctionId::GetEntitiesByUnformatted,
            _ => return None,
        })
    }
}

/// Whether an object becomes a resource or a literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermType {
    Iri,
    Literal,
}

/// A value produced by a function or accessor; multiplicity is expressed by
/// returning several, absence by returning none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FnValue {
    Resource(String),
    Literal {
        lexical: String,
        /// Full datatype IRI; `None` for plain strings.
        datatype: Option<String>,
    },
}

impl FnValue {
    pub fn typed(lexical: impl Into<String>, datatype: &str) -> FnValue {
        FnValue::Literal { lexical: lexical.into(), datatype: Some(datatype.to_string()) }
    }
}

/// Label-to-IRI dictionary for entity linking.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gazetteer {
    pub entries: Vec<(String, String)>,
}

impl Gazetteer {
    pub fn new(entries: Vec<(String, String)>) -> Gazetteer {
        Gazetteer { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds the matching automaton once; the compiled form is immutable
    /// and can be shared across rows.
    pub fn compile(&self) -> CompiledGazetteer {
        let mut labels = Vec::new();
        let mut iris = Vec::new();
        for (label, iri) in &self.entries {
            if !label.is_empty() {
                labels.push(label.clone());
                iris.push(iri.clone());
            }
        }
        let automaton = AhoCorasick::new(&labels).expect("gazetteer automaton");
        CompiledGazetteer { automaton, labels, iris }
    }
}

/// A gazetteer with its multi-pattern automaton.
pub struct CompiledGazetteer {
    automaton: AhoCorasick,
    labels: Vec<String>,
    iris: Vec<String>,
}

impl CompiledGazetteer {
    /// All entity mentions in `text`: every occurrence is considered, matches
    /// must sit on whole-token boundaries, overlaps resolve in favor of the
    /// longer match, and the distinct IRIs return in first-occurrence order.
    pub fn link(&self, text: &str) -> Vec<String> {
        let mut candidates: Vec<(usize, usize, usize)> = self
            .automaton
            .find_overlapping_iter(text)
            .map(|m| (m.start(), m.end(), m.pattern().as_usize()))
            .filter(|&(start, end, _)| token_boundaries(text, start, end))
            .collect();
        candidates.sort_by_key(|&(start, end, pattern)| {
            (std::cmp::Reverse(end - start), start, pattern)
        });
        let mut accepted: Vec<(usize, usize, usize)> = Vec::new();
        for candidate in candidates {
            if accepted
                .iter()
                .all(|&(start, end, _)| candidate.1 <= start || candidate.0 >= end)
            {
                accepted.push(candidate);
            }
        }
        accepted.sort_by_key(|&(start, _, _)| start);
        let mut iris = Vec::new();
        for (_, _, pattern) in accepted {
            let iri = &self.iris[pattern];
            if !iris.contains(iri) {
                iris.push(iri.clone());
            }
        }
        iris
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

fn token_boundaries(text: &str, start: usize, end: usize) -> bool {
    let before_ok = text[..start]
        .chars()
        .next_back()
        .map_or(true, |c| !c.is_alphanumeric());
    let after_ok = text[end..].chars().next().map_or(true, |c| !c.is_alphanumeric());
    before_ok && after_ok
}

/// A fully parameterized function invocation as it appears in an object map.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionCall {
    ParseNumber {
        decimal_point: char,
        integer_only: bool,
    },
    ParseBoolean {
        true_list: Vec<String>,
        false_list: Vec<String>,
    },
    ParseDate,
    ParseDateTime,
    EntityLinking {
        gazetteer: Gazetteer,
    },
    /// The three span extraction functions share their shape: select spans
    /// from the fragment, then run the inner call (or type the raw span).
    Extract(ExtractionCall),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionCall {
    pub selector: SpanSelector,
    pub inner: Option<Box<FunctionCall>>,
    pub inner_term_type: TermType,
    /// Datatype for spans when no inner call is present.
    pub inner_datatype: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpanSelector {
    /// Emphasis elements with this tag (`b`, `i`, `u` or `strike`).
    Tag(Tag),
    /// `font` elements with this `#rrggbb` color, compared case-insensitively.
    Color(String),
    /// Text that is neither emphasized nor colored (black counts as uncolored).
    Unformatted,
}

impl FunctionCall {
    pub fn function_id(&self) -> FunctionId {
        match self {
            FunctionCall::ParseNumber { .. } => FunctionId::ParseNumber,
            FunctionCall::ParseBoolean { .. } => FunctionId::ParseBoolean,
            FunctionCall::ParseDate => FunctionId::ParseDate,
            FunctionCall::ParseDateTime => FunctionId::ParseDateTime,
            FunctionCall::EntityLinking { .. } => FunctionId::EntityLinking,
            FunctionCall::Extract(call) => match call.selector {
                SpanSelector::Tag(_) => FunctionId::GetEntitiesByTag,
                SpanSelector::Color(_) => FunctionId::GetEntitiesByColor,
                SpanSelector::Unformatted => FunctionId::GetEntitiesByUnformatted,
            },
        }
    }
}

/// Context shared by all function applications of one run.
pub struct FnContext<'a> {
    pub grammar: &'a DateGrammar,
}

/// The cell reference accessors of object maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accessor {
    /// The display string of any cell.
    Value,
    /// Plain text cells only.
    ValueString,
    /// Numeric cells without decimal places.
    ValueInt,
    /// Any numeric cell.
    ValueNumeric,
    /// Boolean cells only.
    ValueBoolean,
    /// The HTML fragment of rich text cells; plain text escapes to a
    /// tag-free fragment.
    ValueRichText,
    /// The full typed cell content, for function input.
    Json,
}

impl Accessor {
    pub fn name(&self) -> &'static str {
        match self {
            Accessor::Value => "value",
            Accessor::ValueString => "valueString",
            Accessor::ValueInt => "valueInt",
            Accessor::ValueNumeric => "valueNumeric",
            Accessor::ValueBoolean => "valueBoolean",
            Accessor::ValueRichText => "valueRichText",
            Accessor::Json => "json",
        }
    }

    pub fn from_name(name: &str) -> Option<Accessor> {
        Some(match name {
            "value" => Accessor::Value,
            "valueString" => Accessor::ValueString,
            "valueInt" => Accessor::ValueInt,
            "valueNumeric" => Accessor::ValueNumeric,
            "valueBoolean" => Accessor::ValueBoolean,
            "valueRichText" => Accessor::ValueRichText,
            "json" => Accessor::Json,
            _ => return None,
        })
    }
}

/// What an accessor hands to a function: the typed cell or a projected string.
#[derive(Debug, Clone, PartialEq)]
pub enum FnInput<'a> {
    Cell(&'a CellValue),
    Text(String),
}

/// Projects a cell through an accessor; kind mismatches yield nothing.
pub fn resolve_accessor(accessor: Accessor, cell: &CellValue) -> Option<FnInput<'_>> {
    if cell.is_blank() {
        return None;
    }
    match accessor {
        Accessor::Json => Some(FnInput::Cell(cell)),
        Accessor::Value => Some(FnInput::Text(typing::str_value(cell))),
        Accessor::ValueString => match cell {
            CellValue::Text(content) => Some(FnInput::Text(content.clone())),
            _ => None,
        },
        Accessor::ValueInt => match cell {
            CellValue::Numeric { value, .. } if typing::decimal_places(*value) == Ok(0) => {
                Some(FnInput::Text(typing::render_number(*value)))
            }
            _ => None,
        },
        Accessor::ValueNumeric => match cell {
            CellValue::Numeric { value, .. } => Some(FnInput::Text(typing::render_number(*value))),
            _ => None,
        },
        Accessor::ValueBoolean => match cell {
            CellValue::Boolean(b) => Some(FnInput::Text(b.to_string())),
            _ => None,
        },
        Accessor::ValueRichText => match cell {
            CellValue::RichText(html) => Some(FnInput::Text(html.clone())),
            CellValue::Text(content) => Some(FnInput::Text(richtext::escape(content))),
            _ => None,
        },
    }
}

/// Applies a function to an accessor value. Only malformed rich text errors;
/// everything else is expressed as an empty result.
pub fn apply_function(
    call: &FunctionCall,
    input: &FnInput<'_>,
    ctx: &FnContext<'_>,
) -> Result<Vec<FnValue>, FnError> {
    match call {
        FunctionCall::ParseNumber { decimal_point, integer_only } => {
            Ok(parse_number(input, *decimal_point, *integer_only).into_iter().collect())
        }
        FunctionCall::ParseBoolean { true_list, false_list } => {
            Ok(parse_boolean(input, true_list, false_list).into_iter().collect())
        }
        FunctionCall::ParseDate => Ok(parse_date(input, ctx).into_iter().collect()),
        FunctionCall::ParseDateTime => Ok(parse_datetime(input, ctx).into_iter().collect()),
        FunctionCall::EntityLinking { gazetteer } => {
            let compiled = gazetteer.compile();
            Ok(entity_linking(input, &compiled))
        }
        FunctionCall::Extract(extraction) => apply_extraction(extraction, input, ctx),
    }
}

fn input_text(input: &FnInput<'_>) -> Option<String> {
    match input {
        FnInput::Text(text) => Some(text.clone()),
        FnInput::Cell(cell) => match cell {
            CellValue::Text(_) | CellValue::RichText(_) => Some(typing::str_value(cell)),
            _ => None,
        },
    }
}

static NUMBER_TOKEN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"[+-]?\d+(?:[.,]\d+)*").unwrap());

/// Number parsing with configurable decimal separator. Numeric cells pass
/// through (`integer_only` requires zero decimal places); for strings the
/// first acceptable number token wins, which also covers numbers embedded in
/// text like `42 pages`. Thousands separators of the opposite character are
/// accepted when they form proper three-digit groups.
pub fn parse_number(input: &FnInput<'_>, decimal_point: char, integer_only: bool) -> Option<FnValue> {
    if let FnInput::Cell(CellValue::Numeric { value, .. }) = input {
        let places = typing::decimal_places(*value).ok()?;
        if integer_only {
            return (places == 0)
                .then(|| FnValue::typed(typing::render_number(*value), vocab::XSD_INTEGER));
        }
        return Some(FnValue::typed(typing::render_number(*value), vocab::XSD_DECIMAL));
    }
    if let FnInput::Cell(CellValue::Boolean(_)) = input {
        return None;
    }
    let text = input_text(input)?;
    NUMBER_TOKEN
        .find_iter(&text)
        .find_map(|token| number_from_token(token.as_str(), decimal_point, integer_only))
}

/// Interprets one number token; `None` when the token does not fit the
/// separator convention (wrong decimal point, malformed thousands groups).
fn number_from_token(token: &str, decimal_point: char, integer_only: bool) -> Option<FnValue> {
    let negative = token.starts_with('-');
    let body = token.trim_start_matches(['+', '-']);
    let (int_part, dec_part) = match body.rfind(decimal_point) {
        Some(at) => (&body[..at], Some(&body[at + decimal_point.len_utf8()..])),
        None => (body, None),
    };
    if let Some(dec) = dec_part {
        if integer_only || dec.is_empty() || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    let opposite = if decimal_point == ',' { '.' } else { ',' };
    let digits = ungroup_thousands(int_part, opposite)?;
    let digits = digits.trim_start_matches('0');
    let int_lexical = if digits.is_empty() { "0" } else { digits };
    let sign = if negative && !(int_lexical == "0" && dec_part.is_none()) { "-" } else { "" };
    match dec_part {
        Some(dec) => Some(FnValue::typed(
            format!("{sign}{int_lexical}.{dec}"),
            vocab::XSD_DECIMAL,
        )),
        None => {
            let sign = if negative && int_lexical != "0" { "-" } else { "" };
            let datatype = if integer_only { vocab::XSD_INTEGER } else { vocab::XSD_DECIMAL };
            Some(FnValue::typed(format!("{sign}{int_lexical}"), datatype))
        }
    }
}

/// Validates and removes thousands grouping: either plain digits, or groups
/// joined by the separator where the first group has 1-3 digits and every
/// further group exactly 3.
fn ungroup_thousands(int_part: &str, separator: char) -> Option<String> {
    if int_part.is_empty() {
        return Some("0".to_string());
    }
    if !int_part.contains(separator) {
        return int_part
            .bytes()
            .all(|b| b.is_ascii_digit())
            .then(|| int_part.to_string());
    }
    let groups: Vec<&str> = int_part.split(separator).collect();
    let first_ok = !groups[0].is_empty()
        && groups[0].len() <= 3
        && groups[0].bytes().all(|b| b.is_ascii_digit());
    let rest_ok = groups[1..]
        .iter()
        .all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit()));
    (first_ok && rest_ok).then(|| groups.concat())
}

/// Boolean parsing by lexicon match; numeric 1/0 map directly.
pub fn parse_boolean(
    input: &FnInput<'_>,
    true_list: &[String],
    false_list: &[String],
) -> Option<FnValue> {
    match input {
        FnInput::Cell(CellValue::Boolean(b)) => {
            return Some(FnValue::typed(b.to_string(), vocab::XSD_BOOLEAN))
        }
        FnInput::Cell(CellValue::Numeric { value, .. }) => {
            return if *value == 1.0 {
                Some(FnValue::typed("true", vocab::XSD_BOOLEAN))
            } else if *value == 0.0 {
                Some(FnValue::typed("false", vocab::XSD_BOOLEAN))
            } else {
                None
            };
        }
        _ => {}
    }
    let text = input_text(input)?;
    let token = text.trim().to_lowercase();
    if token.is_empty() {
        return None;
    }
    let in_list = |list: &[String]| list.iter().any(|entry| entry.to_lowercase() == token);
    if in_list(true_list) {
        Some(FnValue::typed("true", vocab::XSD_BOOLEAN))
    } else if in_list(false_list) {
        Some(FnValue::typed("false", vocab::XSD_BOOLEAN))
    } else {
        None
    }
}

/// Spreadsheet serial datetime: day 1 is 1900-01-01, serials of 60 and above
/// carry the fictitious 1900-02-29 offset, the fraction is the part of a
/// 24-hour day rounded to whole seconds.
pub fn serial_to_datetime(serial: f64) -> Option<(CivilDate, CivilTime)> {
    if !serial.is_finite() || serial < 0.0 {
        return None;
    }
    let mut days = serial.trunc() as i64;
    let mut seconds = (serial.fract() * 86_400.0).round() as i64;
    if seconds == 86_400 {
        days += 1;
        seconds = 0;
    }
    let day_offset = if days >= 60 { days - 2 } else { days - 1 };
    let (year, month, day) = civil_from_days(day_offset + days_from_civil(1900, 1, 1));
    if !(1..=9999).contains(&year) {
        return None;
    }
    let date = CivilDate::new(year, month, day)?;
    let time = CivilTime {
        hour: (seconds / 3600) as u32,
        minute: (seconds % 3600 / 60) as u32,
        second: (seconds % 60) as u32,
    };
    Some((date, time))
}

/// Finds a date in the input (string grammar or numeric serial), emitted as
/// `xsd:date`.
pub fn parse_date(input: &FnInput<'_>, ctx: &FnContext<'_>) -> Option<FnValue> {
    if let FnInput::Cell(CellValue::Numeric { value, .. }) = input {
        let (date, _) = serial_to_datetime(*value)?;
        return Some(FnValue::typed(date.to_xsd(), vocab::XSD_DATE));
    }
    let text = input_text(input)?;
    let date = ctx.grammar.find_date(&text)?;
    Some(FnValue::typed(date.to_xsd(), vocab::XSD_DATE))
}

/// Finds a date with time, emitted as `xsd:dateTime` with whole seconds.
pub fn parse_datetime(input: &FnInput<'_>, ctx: &FnContext<'_>) -> Option<FnValue> {
    if let FnInput::Cell(CellValue::Numeric { value, .. }) = input {
        let (date, time) = serial_to_datetime(*value)?;
        return Some(FnValue::typed(
            format!("{}T{}", date.to_xsd(), time.to_xsd()),
            vocab::XSD_DATETIME,
        ));
    }
    let text = input_text(input)?;
    let (date, time) = ctx.grammar.find_datetime(&text)?;
    Some(FnValue::typed(
        format!("{}T{}", date.to_xsd(), time.to_xsd()),
        vocab::XSD_DATETIME,
    ))
}

/// Entity linking over a compiled gazetteer.
pub fn entity_linking(input: &FnInput<'_>, gazetteer: &CompiledGazetteer) -> Vec<FnValue> {
    let Some(text) = input_text(input) else {
        return Vec::new();
    };
    gazetteer.link(&text).into_iter().map(FnValue::Resource).collect()
}

fn apply_extraction(
    extraction: &ExtractionCall,
    input: &FnInput<'_>,
    ctx: &FnContext<'_>,
) -> Result<Vec<FnValue>, FnError> {
    let fragment = match input {
        FnInput::Text(text) => text.clone(),
        FnInput::Cell(CellValue::RichText(html)) => html.clone(),
        FnInput::Cell(CellValue::Text(content)) => richtext::escape(content),
        FnInput::Cell(_) => return Ok(Vec::new()),
    };
    let nodes = richtext::parse_fragment(&fragment)?;
    let spans = select_spans(&nodes, &extraction.selector);
    let mut values = Vec::new();
    for span in spans {
        let trimmed = span.trim();
        if trimmed.is_empty() {
            continue;
        }
        match &extraction.inner {
            Some(inner) => {
                let inner_input = FnInput::Text(trimmed.to_string());
                values.extend(apply_function(inner, &inner_input, ctx)?);
            }
            None => match extraction.inner_term_type {
                TermType::Literal => values.push(FnValue::Literal {
                    lexical: trimmed.to_string(),
                    datatype: extraction.inner_datatype.clone(),
                }),
                // raw spans cannot become IRIs without a linking step
                TermType::Iri => {}
            },
        }
    }
    Ok(values)
}

/// The text spans a selector extracts from a fragment, in document order.
pub fn select_spans(nodes: &[Node], selector: &SpanSelector) -> Vec<String> {
    match selector {
        SpanSelector::Tag(tag) => {
            let mut spans = Vec::new();
            collect_tag_spans(nodes, *tag, &mut spans);
            spans
        }
        SpanSelector::Color(color) => {
            let normalized = color.to_ascii_lowercase();
            let mut spans = Vec::new();
            collect_color_spans(nodes, &normalized, &mut spans);
            spans
        }
        SpanSelector::Unformatted => {
            let mut spans = Vec::new();
            let mut current = String::new();
            collect_unformatted(nodes, false, &mut spans, &mut current);
            if !current.is_empty() {
                spans.push(current);
            }
            spans
        }
    }
}

/// Outermost elements with the tag contribute their full text content;
/// nested other tags are transparent.
fn collect_tag_spans(nodes: &[Node], wanted: Tag, spans: &mut Vec<String>) {
    for node in nodes {
        if let Node::Element { tag, children, .. } = node {
            if *tag == wanted {
                spans.push(richtext::text_content(std::slice::from_ref(node)));
            } else {
                collect_tag_spans(children, wanted, spans);
            }
        }
    }
}

fn collect_color_spans(nodes: &[Node], wanted: &str, spans: &mut Vec<String>) {
    for node in nodes {
        if let Node::Element { tag, color, children } = node {
            let matches = *tag == Tag::Font
                && color.as_deref().is_some_and(|c| c.eq_ignore_ascii_case(wanted));
            if matches {
                spans.push(richtext::text_content(std::slice::from_ref(node)));
            } else {
                collect_color_spans(children, wanted, spans);
            }
        }
    }
}

/// Text nodes outside any emphasis and outside any non-black font color;
/// consecutive unformatted text merges into one span, formatted content
/// splits spans.
fn collect_unformatted(
    nodes: &[Node],
    formatted: bool,
    spans: &mut Vec<String>,
    current: &mut String,
) {
    for node in nodes {
        match node {
            Node::Text(text) => {
                if formatted {
                    if !current.is_empty() {
                        spans.push(std::mem::take(current));
                    }
                } else {
                    current.push_str(text);
                }
            }
            Node::Element { tag, color, children } => {
                let child_formatted = formatted
                    || match tag {
                        Tag::Font => color.as_deref().is_some_and(|c| c != "#000000"),
                        _ => true,
                    };
                if child_formatted && !formatted && !current.is_empty() {
                    spans.push(std::mem::take(current));
                }
                collect_unformatted(children, child_formatted, spans, current);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::dates::DateGrammar;

    fn ctx_grammar() -> DateGrammar {
        DateGrammar::default()
    }

    fn text_input(s: &str) -> FnInput<'static> {
        FnInput::Text(s.to_string())
    }

    fn lit(lexical: &str, datatype: &str) -> FnValue {
        FnValue::typed(lexical, datatype)
    }

    #[test]
    fn parse_number_separators() {
        assert_eq!(
            parse_number(&text_input("3,14"), ',', false),
            Some(lit("3.14", vocab::XSD_DECIMAL))
        );
        assert_eq!(parse_number(&text_input("3,14"), '.', false), None);
        assert_eq!(
            parse_number(&text_input("1.234,56"), ',', false),
            Some(lit("1234.56", vocab::XSD_DECIMAL))
        );
        assert_eq!(
            parse_number(&text_input("042"), '.', true),
            Some(lit("42", vocab::XSD_INTEGER))
        );
    }

    #[test]
    fn parse_number_numeric_cells() {
        let cell = CellValue::Numeric { value: 42.0, format: None };
        assert_eq!(
            parse_number(&FnInput::Cell(&cell), '.', true),
            Some(lit("42", vocab::XSD_INTEGER))
        );
        let decimal = CellValue::Numeric { value: 3.5, format: None };
        assert_eq!(parse_number(&FnInput::Cell(&decimal), '.', true), None);
        assert_eq!(
            parse_number(&FnInput::Cell(&decimal), '.', false),
            Some(lit("3.5", vocab::XSD_DECIMAL))
        );
    }

    #[test]
    fn parse_number_embedded_and_missing() {
        assert_eq!(
            parse_number(&text_input("42 pages"), '.', true),
            Some(lit("42", vocab::XSD_INTEGER))
        );
        assert_eq!(
            parse_number(&text_input("about 3.14 exactly"), '.', false),
            Some(lit("3.14", vocab::XSD_DECIMAL))
        );
        // integer-only skips the decimal token entirely
        assert_eq!(parse_number(&text_input("3.14"), '.', true), None);
        assert_eq!(parse_number(&text_input("Baseline"), '.', false), None);
        assert_eq!(parse_number(&text_input("N/A"), '.', true), None);
    }

    #[test]
    fn parse_boolean_lexicons_and_numerics() {
        let t = vec!["yes".to_string()];
        let f = vec!["no".to_string()];
        assert_eq!(
            parse_boolean(&text_input("Yes"), &t, &f),
            Some(lit("true", vocab::XSD_BOOLEAN))
        );
        assert_eq!(
            parse_boolean(&text_input("no"), &t, &f),
            Some(lit("false", vocab::XSD_BOOLEAN))
        );
        assert_eq!(parse_boolean(&text_input("maybe"), &t, &f), None);
        let zero = CellValue::Numeric { value: 0.0, format: Some("\"Yes\";;\"No\";".into()) };
        assert_eq!(
            parse_boolean(&FnInput::Cell(&zero), &t, &f),
            Some(lit("false", vocab::XSD_BOOLEAN))
        );
        let seven = CellValue::Numeric { value: 7.0, format: None };
        assert_eq!(parse_boolean(&FnInput::Cell(&seven), &t, &f), None);
    }

    #[test]
    fn serial_datetime_worked_example() {
        let grammar = ctx_grammar();
        let ctx = FnContext { grammar: &grammar };
        let cell = CellValue::Numeric {
            value: 44228.3479166667,
            format: Some("MM/DD/YYYY HH:MM AM/PM".into()),
        };
        assert_eq!(
            parse_datetime(&FnInput::Cell(&cell), &ctx),
            Some(lit("2021-02-01T08:21:00", vocab::XSD_DATETIME))
        );
        assert_eq!(
            parse_date(&FnInput::Cell(&cell), &ctx),
            Some(lit("2021-02-01", vocab::XSD_DATE))
        );
    }

    #[test]
    fn serial_boundaries() {
        // day 1 of the 1900 system
        assert_eq!(
            serial_to_datetime(1.0).map(|(d, _)| d.to_xsd()),
            Some("1900-01-01".into())
        );
        // the fictitious leap day shifts everything from 60 on
        assert_eq!(
            serial_to_datetime(59.0).map(|(d, _)| d.to_xsd()),
            Some("1900-02-28".into())
        );
        assert_eq!(
            serial_to_datetime(61.0).map(|(d, _)| d.to_xsd()),
            Some("1900-03-01".into())
        );
        assert_eq!(
            serial_to_datetime(0.5).map(|(d, t)| format!("{}T{}", d.to_xsd(), t.to_xsd())),
            Some("1899-12-31T12:00:00".into())
        );
        assert_eq!(serial_to_datetime(-1.0), None);
        // fraction rounding may carry into the next day
        assert_eq!(
            serial_to_datetime(2.9999999999).map(|(d, t)| (d.to_xsd(), t.to_xsd())),
            Some(("1900-01-03".into(), "00:00:00".into()))
        );
    }

    #[test]
    fn serial_steps_match_calendar_oracle() {
        // one serial step is one calendar day for all serials >= 61
        use chrono::NaiveDate;
        let mut serial = 61.0f64;
        let mut expected = NaiveDate::from_ymd_opt(1900, 3, 1).unwrap();
        while serial < 80000.0 {
            let (date, _) = serial_to_datetime(serial).unwrap();
            assert_eq!(
                (date.year, date.month, date.day),
                (
                    chrono::Datelike::year(&expected),
                    chrono::Datelike::month(&expected),
                    chrono::Datelike::day(&expected)
                ),
                "serial {serial}"
            );
            serial += 1.0;
            expected = expected.succ_opt().unwrap();
        }
    }

    #[test]
    fn parse_date_string_forms() {
        let grammar = ctx_grammar();
        let ctx = FnContext { grammar: &grammar };
        assert_eq!(
            parse_date(&text_input("01.02.2021"), &ctx),
            Some(lit("2021-02-01", vocab::XSD_DATE))
        );
        assert_eq!(parse_date(&text_input("n/a"), &ctx), None);
        assert_eq!(
            parse_datetime(&text_input("02/01/2021 08:21 AM"), &ctx),
            Some(lit("2021-02-01T08:21:00", vocab::XSD_DATETIME))
        );
        assert_eq!(parse_datetime(&text_input("02/01/2021"), &ctx), None);
    }

    fn gazetteer(entries: &[(&str, &str)]) -> Gazetteer {
        Gazetteer::new(
            entries
                .iter()
                .map(|(l, i)| (l.to_string(), i.to_string()))
                .collect(),
        )
    }

    #[test]
    fn entity_linking_finds_all_mentions_in_order() {
        let g = gazetteer(&[("DFKI", "ent:dfki"), ("TUKL", "ent:tukl")]).compile();
        assert_eq!(g.link("DFKI; TUKL"), vec!["ent:dfki", "ent:tukl"]);
        assert_eq!(g.link(""), Vec::<String>::new());
        assert_eq!(g.link("TUKL and DFKI and TUKL"), vec!["ent:tukl", "ent:dfki"]);
    }

    #[test]
    fn entity_linking_boundaries_and_overlaps() {
        let g = gazetteer(&[("AB", "ent:ab"), ("ABC", "ent:abc")]).compile();
        assert_eq!(g.link("AB ABC"), vec!["ent:ab", "ent:abc"]);
        // no match inside a longer token
        let g2 = gazetteer(&[("art", "ent:art")]).compile();
        assert_eq!(g2.link("part of art"), vec!["ent:art"]);
        // longest match wins at overlaps
        let g3 = gazetteer(&[("New York", "ent:ny"), ("York", "ent:york")]).compile();
        assert_eq!(g3.link("New York"), vec!["ent:ny"]);
    }

    fn extraction(selector: SpanSelector, inner: Option<FunctionCall>) -> FunctionCall {
        FunctionCall::Extract(ExtractionCall {
            selector,
            inner: inner.map(Box::new),
            inner_term_type: TermType::Literal,
            inner_datatype: Some(vocab::XSD_STRING.to_string()),
        })
    }

    #[test]
    fn extract_by_tag() {
        let grammar = ctx_grammar();
        let ctx = FnContext { grammar: &grammar };
        let call = extraction(
            SpanSelector::Tag(Tag::Bold),
            Some(FunctionCall::ParseNumber { decimal_point: '.', integer_only: true }),
        );
        let values = apply_function(&call, &text_input("<b>42</b> x <b>7</b>"), &ctx).unwrap();
        assert_eq!(
            values,
            vec![lit("42", vocab::XSD_INTEGER), lit("7", vocab::XSD_INTEGER)]
        );
        let italic = extraction(SpanSelector::Tag(Tag::Italic), Some(FunctionCall::ParseDate));
        let values = apply_function(&italic, &text_input("<i>01.02.2021</i>"), &ctx).unwrap();
        assert_eq!(values, vec![lit("2021-02-01", vocab::XSD_DATE)]);
        let none = apply_function(&italic, &text_input("plain only"), &ctx).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn extract_by_color_case_insensitive() {
        let grammar = ctx_grammar();
        let ctx = FnContext { grammar: &grammar };
        let call = extraction(SpanSelector::Color("#FF0000".into()), Some(FunctionCall::ParseDate));
        let values = apply_function(
            &call,
            &text_input("<font color=\"#ff0000\">01.02.2021</font>"),
            &ctx,
        )
        .unwrap();
        assert_eq!(values, vec![lit("2021-02-01", vocab::XSD_DATE)]);
        let other = extraction(SpanSelector::Color("#00ff00".into()), None);
        let values = apply_function(
            &other,
            &text_input("<font color=\"#ff0000\">01.02.2021</font>"),
            &ctx,
        )
        .unwrap();
        assert!(values.is_empty());
    }

    #[test]
    fn extract_unformatted() {
        let grammar = ctx_grammar();
        let ctx = FnContext { grammar: &grammar };
        let call = extraction(SpanSelector::Unformatted, None);
        let values = apply_function(&call, &text_input("plain <b>bold</b>"), &ctx).unwrap();
        assert_eq!(
            values,
            vec![FnValue::Literal {
                lexical: "plain".into(),
                datatype: Some(vocab::XSD_STRING.into())
            }]
        );
        assert!(apply_function(&call, &text_input("<b>bold</b>"), &ctx)
            .unwrap()
            .is_empty());
        // black font counts as unformatted
        let values = apply_function(
            &call,
            &text_input("<font color=\"#000000\">x</font>"),
            &ctx,
        )
        .unwrap();
        assert_eq!(values.len(), 1);
        // malformed fragments are real errors
        assert!(apply_function(&call, &text_input("<b>oops"), &ctx).is_err());
    }

    #[test]
    fn accessors_project_by_kind() {
        let numeric = CellValue::Numeric { value: 42.0, format: None };
        let boolean = CellValue::Boolean(true);
        let text = CellValue::Text("hi <x>".into());
        let rich = CellValue::RichText("<b>a</b>".into());
        assert_eq!(
            resolve_accessor(Accessor::ValueInt, &numeric),
            Some(FnInput::Text("42".into()))
        );
        assert_eq!(resolve_accessor(Accessor::ValueInt, &text), None);
        assert_eq!(
            resolve_accessor(Accessor::ValueBoolean, &boolean),
            Some(FnInput::Text("true".into()))
        );
        assert_eq!(resolve_accessor(Accessor::ValueString, &rich), None);
        assert_eq!(
            resolve_accessor(Accessor::ValueRichText, &text),
            Some(FnInput::Text("hi &lt;x&gt;".into()))
        );
        assert_eq!(
            resolve_accessor(Accessor::ValueRichText, &rich),
            Some(FnInput::Text("<b>a</b>".into()))
        );
        assert_eq!(resolve_accessor(Accessor::Value, &CellValue::Blank), None);
        let decimal = CellValue::Numeric { value: 1.25, format: None };
        assert_eq!(resolve_accessor(Accessor::ValueInt, &decimal), None);
        assert_eq!(
            resolve_accessor(Accessor::ValueNumeric, &decimal),
            Some(FnInput::Text("1.25".into()))
        );
    }

    #[test]
    fn entity_linking_matches_brute_force_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let alphabet = ["ab", "abc", "b", "bc", "ca", "x", "xyz", "yz"];
        for _ in 0..300 {
            let label_count = rng.gen_range(1..=6);
            let labels: Vec<String> = (0..label_count)
                .map(|_| {
                    let parts = rng.gen_range(1..=2);
                    (0..parts)
                        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                        .collect::<Vec<_>>()
                        .join("")
                })
                .collect();
            let entries: Vec<(String, String)> = labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), format!("ent:{i}")))
                .collect();
            let text: String = (0..rng.gen_range(0..30))
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        " ".to_string()
                    } else {
                        alphabet[rng.gen_range(0..alphabet.len())].to_string()
                    }
                })
                .collect();
            let compiled = Gazetteer::new(entries.clone()).compile();
            assert_eq!(
                compiled.link(&text),
                brute_force_link(&text, &entries),
                "text {text:?}, labels {labels:?}"
            );
        }
    }

    /// Independent matcher: scan every substring position for every label.
    fn brute_force_link(text: &str, entries: &[(String, String)]) -> Vec<String> {
        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for (pattern_idx, (label, _)) in entries.iter().enumerate() {
            if label.is_empty() {
                continue;
            }
            for start in 0..=text.len().saturating_sub(label.len()) {
                if !text.is_char_boundary(start) {
                    continue;
                }
                let end = start + label.len();
                if end <= text.len()
                    && text.is_char_boundary(end)
                    && &text[start..end] == label.as_str()
                    && super::token_boundaries(text, start, end)
                {
                    candidates.push((start, end, pattern_idx));
                }
            }
        }
        candidates.sort_by_key(|&(start, end, pattern)| {
            (std::cmp::Reverse(end - start), start, pattern)
        });
        let mut accepted: Vec<(usize, usize, usize)> = Vec::new();
        for candidate in candidates {
            if accepted
                .iter()
                .all(|&(start, end, _)| candidate.1 <= start || candidate.0 >= end)
            {
                accepted.push(candidate);
            }
        }
        accepted.sort_by_key(|&(start, _, _)| start);
        let mut iris = Vec::new();
        for (_, _, pattern) in accepted {
            let iri = entries[pattern].1.clone();
            if !iris.contains(&iri) {
                iris.push(iri);
            }
        }
        iris
    }
}
