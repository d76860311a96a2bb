//! Object-map template catalogue, per-column scoring and prediction trees.
//!
//! Each column is scored against fifteen templates: native datatype maps for
//! boolean/integer/decimal cells, string-parsing maps (integers, decimals
//! with either separator, dates, datetimes, integer lists, booleans), plain
//! strings versus entity references (decided by the duplication degree), a
//! data-format driven map for numerics, and formatted-text extraction. The
//! highest score wins; equal scores fall back to a fixed rank, then to the
//! function-free template, then to catalogue order. Cells the winner cannot
//! produce a value for are covered recursively by further templates.

use std::collections::BTreeSet;

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use thiserror::Error;

use crate::cell::CellValue;
use crate::config::RunConfig;
use crate::fno::{
    self, Accessor, FnContext, FunctionCall, FunctionId, Gazetteer, SpanSelector, TermType,
};
use crate::richtext::{self, Tag};
use crate::typing::dates::DateGrammar;
use crate::typing::{
    data_format_type, decimal_places, dup, dup_with_distinct, is_dec, is_int, str_value, CellId,
    ColumnPartition, DataFormatType, PCell,
};
use crate::vocab;

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("cannot score an empty column")]
    EmptyColumn,
    #[error("configuration: {0}")]
    Config(String),
    #[error("rich text in column {column}, row {row}: {source}")]
    RichText {
        column: u32,
        row: u32,
        source: richtext::RichTextError,
    },
}

/// The fifteen object-map templates, in catalogue order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateId {
    FormattedText,
    IntegerAsString,
    DecimalAsStringPoint,
    DecimalAsStringComma,
    DateAsString,
    DateTimeAsString,
    IntegerListAsString,
    BooleanAsString,
    String,
    SingleEntity,
    MultipleEntities,
    NativeBoolean,
    NativeInteger,
    NativeDecimal,
    NumericWithDataFormat,
}

impl TemplateId {
    pub fn name(&self) -> &'static str {
        match self {
            TemplateId::FormattedText => "FormattedText",
            TemplateId::IntegerAsString => "IntegerAsString",
            TemplateId::DecimalAsStringPoint => "DecimalAsStringPoint",
            TemplateId::DecimalAsStringComma => "DecimalAsStringComma",
            TemplateId::DateAsString => "DateAsString",
            TemplateId::DateTimeAsString => "DateTimeAsString",
            TemplateId::IntegerListAsString => "IntegerListAsString",
            TemplateId::BooleanAsString => "BooleanAsString",
            TemplateId::String => "String",
            TemplateId::SingleEntity => "SingleEntity",
            TemplateId::MultipleEntities => "MultipleEntities",
            TemplateId::NativeBoolean => "NativeBoolean",
            TemplateId::NativeInteger => "NativeInteger",
            TemplateId::NativeDecimal => "NativeDecimal",
            TemplateId::NumericWithDataFormat => "NumericWithDataFormat",
        }
    }

    fn catalogue_index(&self) -> usize {
        CATALOGUE.iter().position(|spec| spec.id == *self).unwrap()
    }
}

/// Static shape of a template: reference accessor, term type, datatype,
/// attached function and the tie-break rank.
#[derive(Debug, Clone, Copy)]
pub struct TemplateSpec {
    pub id: TemplateId,
    /// Higher rank wins ties; `None` for the heuristic-free formatted-text
    /// template which is applied whenever formatted cells exist.
    pub rank: Option<i32>,
    pub reference: Accessor,
    pub term_type: TermType,
    /// `None` when the datatype depends on parameters or children.
    pub datatype: Option<&'static str>,
    pub function: Option<FunctionId>,
}

pub const CATALOGUE: [TemplateSpec; 15] = [
    TemplateSpec {
        id: TemplateId::FormattedText,
        rank: None,
        reference: Accessor::ValueRichText,
        term_type: TermType::Literal,
        datatype: None,
        function: None, // selected per formatting group
    },
    TemplateSpec {
        id: TemplateId::IntegerAsString,
        rank: Some(2),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_INTEGER),
        function: Some(FunctionId::ParseNumber),
    },
    TemplateSpec {
        id: TemplateId::DecimalAsStringPoint,
        rank: Some(1),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_DECIMAL),
        function: Some(FunctionId::ParseNumber),
    },
    TemplateSpec {
        id: TemplateId::DecimalAsStringComma,
        rank: Some(1),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_DECIMAL),
        function: Some(FunctionId::ParseNumber),
    },
    TemplateSpec {
        id: TemplateId::DateAsString,
        rank: Some(2),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_DATE),
        function: Some(FunctionId::ParseDate),
    },
    TemplateSpec {
        id: TemplateId::DateTimeAsString,
        rank: Some(3),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_DATETIME),
        function: Some(FunctionId::ParseDateTime),
    },
    TemplateSpec {
        id: TemplateId::IntegerListAsString,
        rank: Some(0),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_INTEGER),
        function: Some(FunctionId::ParseNumber),
    },
    TemplateSpec {
        id: TemplateId::BooleanAsString,
        rank: Some(4),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_BOOLEAN),
        function: Some(FunctionId::ParseBoolean),
    },
    TemplateSpec {
        id: TemplateId::String,
        rank: Some(0),
        reference: Accessor::Value,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_STRING),
        function: None,
    },
    TemplateSpec {
        id: TemplateId::SingleEntity,
        rank: Some(3),
        reference: Accessor::ValueString,
        term_type: TermType::Iri,
        datatype: None,
        function: Some(FunctionId::EntityLinking),
    },
    TemplateSpec {
        id: TemplateId::MultipleEntities,
        rank: Some(4),
        reference: Accessor::ValueString,
        term_type: TermType::Iri,
        datatype: None,
        function: Some(FunctionId::EntityLinking),
    },
    TemplateSpec {
        id: TemplateId::NativeBoolean,
        rank: Some(0),
        reference: Accessor::ValueBoolean,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_BOOLEAN),
        function: None,
    },
    TemplateSpec {
        id: TemplateId::NativeInteger,
        rank: Some(3),
        reference: Accessor::ValueInt,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_INTEGER),
        function: None,
    },
    TemplateSpec {
        id: TemplateId::NativeDecimal,
        rank: Some(4),
        reference: Accessor::ValueNumeric,
        term_type: TermType::Literal,
        datatype: Some(vocab::XSD_DECIMAL),
        function: None,
    },
    TemplateSpec {
        id: TemplateId::NumericWithDataFormat,
        rank: Some(5),
        reference: Accessor::Json,
        term_type: TermType::Literal,
        datatype: None, // depends on the winning data format type
        function: None, // parseDate / parseDateTime / parseBoolean per format
    },
];

pub fn spec(id: TemplateId) -> &'static TemplateSpec {
    &CATALOGUE[id.catalogue_index()]
}

/// Parameters a heuristic resolved while scoring.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum TemplateParams {
    #[default]
    None,
    DecimalPoint(char),
    BooleanLexicons {
        true_list: Vec<String>,
        false_list: Vec<String>,
    },
    DataFormat(DataFormatType),
    Gazetteer(Gazetteer),
}

/// A scored template over a concrete column.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateScore {
    pub template: TemplateId,
    pub score: f64,
    pub params: TemplateParams,
    /// Cells on which the template's function (or native accessor) yields a
    /// value, i.e. the cells its statements will come from.
    pub covered: BTreeSet<CellId>,
}

impl TemplateScore {
    pub fn rank(&self) -> i32 {
        spec(self.template).rank.unwrap_or(i32::MAX)
    }

    fn has_function(&self) -> bool {
        self.effective_function().is_some()
    }

    /// The fully parameterized call this template executes, if any.
    pub fn effective_function(&self) -> Option<FunctionCall> {
        match (self.template, &self.params) {
            (TemplateId::IntegerAsString | TemplateId::IntegerListAsString, _) => {
                Some(FunctionCall::ParseNumber { decimal_point: '.', integer_only: true })
            }
            (TemplateId::DecimalAsStringPoint, _) => {
                Some(FunctionCall::ParseNumber { decimal_point: '.', integer_only: false })
            }
            (TemplateId::DecimalAsStringComma, _) => {
                Some(FunctionCall::ParseNumber { decimal_point: ',', integer_only: false })
            }
            (TemplateId::DateAsString, _) => Some(FunctionCall::ParseDate),
            (TemplateId::DateTimeAsString, _) => Some(FunctionCall::ParseDateTime),
            (
                TemplateId::BooleanAsString,
                TemplateParams::BooleanLexicons { true_list, false_list },
            ) => Some(FunctionCall::ParseBoolean {
                true_list: true_list.clone(),
                false_list: false_list.clone(),
            }),
            (
                TemplateId::SingleEntity | TemplateId::MultipleEntities,
                TemplateParams::Gazetteer(g),
            ) => Some(FunctionCall::EntityLinking { gazetteer: g.clone() }),
            (TemplateId::NumericWithDataFormat, TemplateParams::DataFormat(df)) => match df {
                DataFormatType::Date => Some(FunctionCall::ParseDate),
                DataFormatType::DateTime => Some(FunctionCall::ParseDateTime),
                DataFormatType::BooleanDisplay => Some(FunctionCall::ParseBoolean {
                    true_list: Vec::new(),
                    false_list: Vec::new(),
                }),
                DataFormatType::Other => None,
            },
            _ => None,
        }
    }

    /// Datatype of the emitted literals, resolving parameter-dependent cases.
    pub fn effective_datatype(&self) -> Option<&'static str> {
        match (self.template, &self.params) {
            (TemplateId::NumericWithDataFormat, TemplateParams::DataFormat(df)) => match df {
                DataFormatType::Date => Some(vocab::XSD_DATE),
                DataFormatType::DateTime => Some(vocab::XSD_DATETIME),
                DataFormatType::BooleanDisplay => Some(vocab::XSD_BOOLEAN),
                DataFormatType::Other => None,
            },
            _ => spec(self.template).datatype,
        }
    }
}

/// A formatting combination, canonicalized (tags in b, i, u, strike order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FormatKey {
    pub tags: Vec<Tag>,
    pub color: Option<String>,
}

impl FormatKey {
    pub fn from_style(style: &richtext::SpanStyle) -> FormatKey {
        let mut tags = Vec::new();
        for (flag, tag) in [
            (style.bold, Tag::Bold),
            (style.italic, Tag::Italic),
            (style.underline, Tag::Underline),
            (style.strike, Tag::Strike),
        ] {
            if flag {
                tags.push(tag);
            }
        }
        FormatKey { tags, color: style.color.clone() }
    }

    pub fn is_unformatted(&self) -> bool {
        self.tags.is_empty() && self.color.is_none()
    }

    /// Human-readable key, e.g. `b`, `b+color:#ff0000`, `unformatted`.
    pub fn canonical(&self) -> String {
        if self.is_unformatted() {
            return "unformatted".to_string();
        }
        let mut parts: Vec<String> = self.tags.iter().map(|t| t.name().to_string()).collect();
        if let Some(color) = &self.color {
            parts.push(format!("color:{color}"));
        }
        parts.join("+")
    }

    /// Predicate suffix, e.g. `b`, `b_color_ff0000`, `plain`.
    pub fn suffix(&self) -> String {
        if self.is_unformatted() {
            return "plain".to_string();
        }
        let mut parts: Vec<String> = self.tags.iter().map(|t| t.name().to_string()).collect();
        if let Some(color) = &self.color {
            parts.push(format!("color_{}", color.trim_start_matches('#')));
        }
        parts.join("_")
    }

    /// The extraction function for this group: emphasis is given preference,
    /// then color, otherwise the unformatted selector.
    pub fn selector(&self) -> SpanSelector {
        if let Some(tag) = self.tags.first() {
            SpanSelector::Tag(*tag)
        } else if let Some(color) = &self.color {
            SpanSelector::Color(color.clone())
        } else {
            SpanSelector::Unformatted
        }
    }

    fn ordinal(&self) -> (bool, bool, Vec<u8>, Option<String>) {
        (
            self.is_unformatted(),
            self.tags.is_empty(),
            self.tags.iter().map(|t| tag_order(*t)).collect(),
            self.color.clone(),
        )
    }
}

fn tag_order(tag: Tag) -> u8 {
    match tag {
        Tag::Bold => 0,
        Tag::Italic => 1,
        Tag::Underline => 2,
        Tag::Strike => 3,
        Tag::Font => 4,
    }
}

/// One virtual column: the spans of a formatting combination.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualColumn {
    pub key: FormatKey,
    pub cells: Vec<PCell>,
}

/// A predicted virtual column inside a formatted-text node.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualPrediction {
    pub key: FormatKey,
    pub cells: Vec<PCell>,
    pub tree: PredictionTree,
}

/// One chosen template plus the recursion over its uncovered cells.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionNode {
    pub choice: TemplateScore,
    /// Per-formatting-group predictions; only formatted-text nodes have any.
    pub virtuals: Vec<VirtualPrediction>,
    pub children: Vec<PredictionNode>,
}

/// Prediction result for one (virtual) column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionTree {
    pub root: Option<PredictionNode>,
    /// Cells no template could cover.
    pub residue: Vec<CellId>,
}

impl PredictionTree {
    /// All covered cell ids across the tree.
    pub fn covered(&self) -> BTreeSet<CellId> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<&PredictionNode> = self.root.iter().collect();
        while let Some(node) = stack.pop() {
            out.extend(node.choice.covered.iter().copied());
            stack.extend(node.children.iter());
        }
        out
    }
}

/// Column predictor configured for one run.
pub struct Predictor<'a> {
    config: &'a RunConfig,
    grammar: DateGrammar,
    user_gazetteer: Option<&'a Gazetteer>,
}

impl<'a> Predictor<'a> {
    pub fn new(
        config: &'a RunConfig,
        user_gazetteer: Option<&'a Gazetteer>,
    ) -> Result<Predictor<'a>, PredictError> {
        let grammar = config.date_grammar().map_err(PredictError::Config)?;
        Ok(Predictor { config, grammar, user_gazetteer })
    }

    pub fn grammar(&self) -> &DateGrammar {
        &self.grammar
    }

    /// Scores every heuristic template against the column.
    pub fn score_all(&self, column: &ColumnPartition) -> Result<Vec<TemplateScore>, PredictError> {
        if column.is_empty() {
            return Err(PredictError::EmptyColumn);
        }
        let total = column.len() as f64;
        let strings: Vec<String> = column.strings().map(|c| str_value(&c.value)).collect();
        let numerics: Vec<f64> = column
            .numerics()
            .filter_map(|c| match &c.value {
                CellValue::Numeric { value, .. } => Some(*value),
                _ => None,
            })
            .collect();
        let boolean_count = column.booleans().count();
        let integer_numerics = numerics.iter().filter(|v| decimal_places(**v) == Ok(0)).count();
        let decimal_numerics = numerics
            .iter()
            .filter(|v| matches!(decimal_places(**v), Ok(d) if d > 0))
            .count();
        let substrings = column.substrings();
        let values: Vec<CellValue> = column.cells.iter().map(|c| c.value.clone()).collect();
        let dup_column = dup(&values);

        let mut scores = Vec::new();
        let mut push = |template: TemplateId, score: f64, params: TemplateParams| {
            let covered = self.coverage(column, template, &params);
            scores.push(TemplateScore { template, score, params, covered });
        };

        let int_strings = strings.iter().filter(|s| is_int(s)).count();
        push(
            TemplateId::IntegerAsString,
            (int_strings + integer_numerics) as f64 / total,
            TemplateParams::None,
        );
        let point_strings = strings.iter().filter(|s| is_dec(s, '.')).count();
        push(
            TemplateId::DecimalAsStringPoint,
            (point_strings + decimal_numerics) as f64 / total,
            TemplateParams::DecimalPoint('.'),
        );
        let comma_strings = strings.iter().filter(|s| is_dec(s, ',')).count();
        push(
            TemplateId::DecimalAsStringComma,
            (comma_strings + decimal_numerics) as f64 / total,
            TemplateParams::DecimalPoint(','),
        );
        let date_strings = strings.iter().filter(|s| self.grammar.is_date(s)).count();
        push(
            TemplateId::DateAsString,
            (date_strings + numerics.len()) as f64 / total,
            TemplateParams::None,
        );
        let datetime_strings = strings.iter().filter(|s| self.grammar.is_datetime(s)).count();
        push(
            TemplateId::DateTimeAsString,
            (datetime_strings + numerics.len()) as f64 / total,
            TemplateParams::None,
        );
        let list_score = if substrings.is_empty() {
            0.0
        } else {
            substrings.iter().filter(|s| is_int(s)).count() as f64 / substrings.len() as f64
        };
        push(TemplateId::IntegerListAsString, list_score, TemplateParams::None);

        let (boolean_score, boolean_params) = self.boolean_as_string(&strings, total);
        push(TemplateId::BooleanAsString, boolean_score, boolean_params);

        push(TemplateId::String, 1.0 - dup_column, TemplateParams::None);

        let single_gazetteer = self.gazetteer_from(strings.iter().cloned());
        push(
            TemplateId::SingleEntity,
            dup_column,
            TemplateParams::Gazetteer(single_gazetteer),
        );
        let multi_gazetteer = self.gazetteer_from(substrings.iter().cloned());
        push(
            TemplateId::MultipleEntities,
            dup_with_distinct(&substrings, numerics.len() + boolean_count),
            TemplateParams::Gazetteer(multi_gazetteer),
        );

        push(
            TemplateId::NativeBoolean,
            boolean_count as f64 / total,
            TemplateParams::None,
        );
        push(
            TemplateId::NativeInteger,
            integer_numerics as f64 / total,
            TemplateParams::None,
        );
        push(
            TemplateId::NativeDecimal,
            decimal_numerics as f64 / total,
            TemplateParams::None,
        );

        let mut format_domain = vec![DataFormatType::Date, DataFormatType::DateTime];
        if self.config.boolean_display {
            format_domain.push(DataFormatType::BooleanDisplay);
        }
        let (best_format, best_count) = format_domain
            .iter()
            .map(|&df| {
                let count = column
                    .numerics()
                    .filter(|c| match &c.value {
                        CellValue::Numeric { format, .. } => {
                            data_format_type(format.as_deref()) == df
                        }
                        _ => false,
                    })
                    .count();
                (df, count)
            })
            .max_by_key(|&(_, count)| count)
            .unwrap();
        push(
            TemplateId::NumericWithDataFormat,
            best_count as f64 / total,
            TemplateParams::DataFormat(best_format),
        );

        Ok(scores)
    }

    /// String-encoded booleans: at most two distinct strings whose mean
    /// length stays below the threshold; the score is the string share of
    /// the column. The resolved lexicons (after majority voting over unknown
    /// tokens) ride along as parameters.
    fn boolean_as_string(&self, strings: &[String], total: f64) -> (f64, TemplateParams) {
        let mut distinct: Vec<(String, usize)> = Vec::new();
        for s in strings {
            match distinct.iter_mut().find(|(v, _)| v == s) {
                Some((_, count)) => *count += 1,
                None => distinct.push((s.clone(), 1)),
            }
        }
        if distinct.len() > 2 {
            return (0.0, TemplateParams::None);
        }
        if !distinct.is_empty() {
            let mean_len = distinct.iter().map(|(v, _)| v.chars().count()).sum::<usize>() as f64
                / distinct.len() as f64;
            if mean_len >= self.config.bool_length_threshold {
                return (0.0, TemplateParams::None);
            }
        }
        let (true_list, false_list) = self.vote_lexicons(&distinct);
        (
            strings.len() as f64 / total,
            TemplateParams::BooleanLexicons { true_list, false_list },
        )
    }

    /// Majority voting over the (at most two) distinct tokens: tokens found
    /// in a default lexicon keep their side; with two tokens, an unknown one
    /// takes the side opposite the known one; with only unknown tokens, the
    /// most frequent token is assumed true.
    fn vote_lexicons(&self, distinct: &[(String, usize)]) -> (Vec<String>, Vec<String>) {
        let mut true_list: Vec<String> =
            self.config.true_lexicon.iter().map(|s| s.to_lowercase()).collect();
        let mut false_list: Vec<String> =
            self.config.false_lexicon.iter().map(|s| s.to_lowercase()).collect();
        let mut tokens: Vec<(String, usize)> = distinct
            .iter()
            .map(|(v, count)| (v.trim().to_lowercase(), *count))
            .filter(|(v, _)| !v.is_empty())
            .collect();
        tokens.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        tokens.dedup_by(|a, b| a.0 == b.0);
        let known = |token: &str, list: &[String]| list.iter().any(|e| e == token);
        let unknown: Vec<(String, usize)> = tokens
            .iter()
            .filter(|(t, _)| !known(t, &true_list) && !known(t, &false_list))
            .cloned()
            .collect();
        match (tokens.len(), unknown.len()) {
            (2, 1) => {
                let unknown_token = unknown[0].0.clone();
                let other_is_true = tokens
                    .iter()
                    .any(|(t, _)| t != &unknown_token && known(t, &true_list));
                if other_is_true {
                    false_list.push(unknown_token);
                } else {
                    true_list.push(unknown_token);
                }
            }
            (2, 2) => {
                // most frequent token (ties break lexicographically) is true
                true_list.push(unknown[0].0.clone());
                false_list.push(unknown[1].0.clone());
            }
            (1, 1) => true_list.push(unknown[0].0.clone()),
            _ => {}
        }
        (true_list, false_list)
    }

    /// Entity dictionary from column content: distinct labels, sorted, each
    /// minted an IRI from the percent-encoded lowercase label. A user
    /// supplied gazetteer takes precedence.
    fn gazetteer_from(&self, labels: impl Iterator<Item = String>) -> Gazetteer {
        if let Some(user) = self.user_gazetteer {
            return user.clone();
        }
        let mut distinct: Vec<String> = Vec::new();
        for label in labels {
            let trimmed = label.trim().to_string();
            if !trimmed.is_empty() && !distinct.contains(&trimmed) {
                distinct.push(trimmed);
            }
        }
        distinct.sort();
        let entries = distinct
            .into_iter()
            .map(|label| {
                let iri = self.mint_entity_iri(&label);
                (label, iri)
            })
            .collect();
        Gazetteer::new(entries)
    }

    pub fn mint_entity_iri(&self, label: &str) -> String {
        format!(
            "{}{}",
            self.config.entity_namespace,
            utf8_percent_encode(&label.to_lowercase(), NON_ALPHANUMERIC)
        )
    }

    /// Cells on which the template yields at least one value, computed with
    /// the same evaluation path the executor uses.
    fn coverage(
        &self,
        column: &ColumnPartition,
        template: TemplateId,
        params: &TemplateParams,
    ) -> BTreeSet<CellId> {
        let probe = TemplateScore {
            template,
            score: 0.0,
            params: params.clone(),
            covered: BTreeSet::new(),
        };
        let function = probe.effective_function();
        let accessor = spec(template).reference;
        let ctx = FnContext { grammar: &self.grammar };
        let mut covered = BTreeSet::new();
        for cell in &column.cells {
            let Some(input) = fno::resolve_accessor(accessor, &cell.value) else {
                continue;
            };
            let produced = match &function {
                Some(call) => match fno::apply_function(call, &input, &ctx) {
                    Ok(values) => !values.is_empty(),
                    Err(_) => false,
                },
                None => match spec(template).term_type {
                    TermType::Literal => true, // the accessor value is the literal
                    TermType::Iri => false,
                },
            };
            if produced {
                covered.insert(cell.id);
            }
        }
        covered
    }

    /// Deterministic winner selection: highest score, then higher rank, then
    /// templates without a function, then catalogue order. All-zero scores
    /// select nothing.
    pub fn select<'s>(&self, scores: &'s [TemplateScore]) -> Option<&'s TemplateScore> {
        scores
            .iter()
            .filter(|s| s.score > 0.0)
            .min_by(|a, b| Self::selection_order(a, b))
    }

    fn selection_order(a: &TemplateScore, b: &TemplateScore) -> std::cmp::Ordering {
        b.score
            .total_cmp(&a.score)
            .then_with(|| b.rank().cmp(&a.rank()))
            .then_with(|| a.has_function().cmp(&b.has_function()))
            .then_with(|| a.template.catalogue_index().cmp(&b.template.catalogue_index()))
    }

    /// Predicts the template tree of one column. Formatted columns get the
    /// formatted-text root; everything else runs the heuristic recursion.
    pub fn predict_column(&self, column: &ColumnPartition) -> Result<PredictionTree, PredictError> {
        if column.is_empty() {
            return Ok(PredictionTree::default());
        }
        if column.formatted().next().is_some() {
            self.predict_formatted(column)
        } else {
            self.predict_heuristic(column)
        }
    }

    fn predict_heuristic(&self, column: &ColumnPartition) -> Result<PredictionTree, PredictError> {
        if column.is_empty() {
            return Ok(PredictionTree::default());
        }
        let mut scores = self.score_all(column)?;
        loop {
            let Some(winner) = self.select(&scores) else {
                return Ok(PredictionTree {
                    root: None,
                    residue: column.cells.iter().map(|c| c.id).collect(),
                });
            };
            if winner.covered.is_empty() {
                // a template that covers nothing cannot make progress
                let skip = winner.template;
                scores.retain(|s| s.template != skip);
                continue;
            }
            let choice = winner.clone();
            let residual = column.without(&choice.covered);
            let rest = self.predict_heuristic(&residual)?;
            return Ok(PredictionTree {
                root: Some(PredictionNode {
                    choice,
                    virtuals: Vec::new(),
                    children: rest.root.map(|n| vec![n]).unwrap_or_default(),
                }),
                residue: rest.residue,
            });
        }
    }

    /// Splits formatted content into per-combination virtual columns.
    ///
    /// Rich text cells contribute one pseudo-cell per styled span, plain text
    /// cells contribute their whole content to the unformatted group. Groups
    /// order deterministically: emphasis first, then colors, unformatted last.
    pub fn expand_formatted(
        &self,
        column: &ColumnPartition,
    ) -> Result<Vec<VirtualColumn>, PredictError> {
        if column.formatted().next().is_none() {
            return Ok(vec![VirtualColumn {
                key: FormatKey::default(),
                cells: column.cells.clone(),
            }]);
        }
        let mut groups: Vec<VirtualColumn> = Vec::new();
        let mut add_span = |key: FormatKey, id: CellId, text: &str| {
            let trimmed = text.trim();
            if trimmed.is_empty() {
                return;
            }
            let cell = PCell { id, value: CellValue::Text(trimmed.to_string()) };
            match groups.iter_mut().find(|g| g.key == key) {
                Some(group) => group.cells.push(cell),
                None => groups.push(VirtualColumn { key, cells: vec![cell] }),
            }
        };
        for cell in &column.cells {
            let row = cell.id.row();
            match &cell.value {
                CellValue::Text(content) => {
                    add_span(FormatKey::default(), CellId::Span { row, span: 0 }, content);
                }
                CellValue::RichText(html) => {
                    let runs = richtext::styled_runs(html).map_err(|source| {
                        PredictError::RichText { column: column.column, row, source }
                    })?;
                    for (span, run) in runs.iter().enumerate() {
                        add_span(
                            FormatKey::from_style(&run.style),
                            CellId::Span { row, span: span as u32 },
                            &run.text,
                        );
                    }
                }
                _ => {}
            }
        }
        groups.sort_by(|a, b| a.key.ordinal().cmp(&b.key.ordinal()));
        Ok(groups)
    }

    fn predict_formatted(&self, column: &ColumnPartition) -> Result<PredictionTree, PredictError> {
        let groups = self.expand_formatted(column)?;
        let mut virtuals = Vec::new();
        let mut covered_rows: BTreeSet<u32> = BTreeSet::new();
        for group in groups {
            let partition = ColumnPartition::from_cells(column.column, group.cells.clone());
            let tree = self.predict_heuristic(&partition)?;
            covered_rows.extend(tree.covered().iter().map(|id| id.row()));
            virtuals.push(VirtualPrediction { key: group.key, cells: group.cells, tree });
        }
        let covered: BTreeSet<CellId> = column
            .cells
            .iter()
            .map(|c| c.id)
            .filter(|id| covered_rows.contains(&id.row()))
            .collect();
        let choice = TemplateScore {
            template: TemplateId::FormattedText,
            score: 1.0, // applied unconditionally once formatted cells exist
            params: TemplateParams::None,
            covered,
        };
        let residual = column.without(&choice.covered);
        let rest = self.predict_heuristic(&residual)?;
        Ok(PredictionTree {
            root: Some(PredictionNode {
                choice,
                virtuals,
                children: rest.root.map(|n| vec![n]).unwrap_or_default(),
            }),
            residue: rest.residue,
        })
    }
}
