//! Formatted cell text as a restricted HTML fragment.
//!
//! Rich text uses only the tags `b`, `i`, `u`, `strike` and `font` with a
//! `color="#rrggbb"` attribute. This module converts between the three views
//! of such a fragment: formatting runs (as delivered by spreadsheet readers),
//! the serialized fragment string, and a parsed node tree for the extraction
//! functions.

use std::fmt::Write as _;

use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RichTextError {
    #[error("formatting runs overlap at character {0}")]
    OverlappingRuns(usize),
    #[error("formatting run {start}..{end} exceeds text length {len}")]
    RunOutOfRange { start: usize, end: usize, len: usize },
    #[error("malformed rich text fragment: {0}")]
    Malformed(String),
    #[error("tag <{0}> is not allowed in rich text")]
    UnknownTag(String),
    #[error("invalid color value {0:?}")]
    InvalidColor(String),
}

/// One contiguous stretch of identically formatted characters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FormatRun {
    /// Start offset in characters.
    pub start: usize,
    /// End offset in characters (exclusive).
    pub end: usize,
    pub bold: bool,
    pub italic: bool,
    pub underline: bool,
    pub strike: bool,
    /// Lowercase `#rrggbb`; `None` for default (black) text.
    pub color: Option<String>,
}

impl FormatRun {
    pub fn is_plain(&self) -> bool {
        !self.bold && !self.italic && !self.underline && !self.strike && self.color.is_none()
    }
}

/// The effective formatting of a piece of text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SpanStyle {
    pub bold: bool,
    pub italic: bool,
    pub underline: bool,
    pub strike: bool,
    pub color: Option<String>,
}

impl SpanStyle {
    pub fn is_plain(&self) -> bool {
        !self.bold && !self.italic && !self.underline && !self.strike && self.color.is_none()
    }

    /// Whether the text counts as typographically emphasized.
    pub fn has_emphasis(&self) -> bool {
        self.bold || self.italic || self.underline || self.strike
    }
}

/// A stretch of text with its effective style, flattened from the tag tree.
#[derive(Debug, Clone, PartialEq)]
pub struct StyledRun {
    pub text: String,
    pub style: SpanStyle,
}

/// Parsed fragment node. `font` keeps its color; all formatting accumulates
/// down the tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Text(String),
    Element {
        tag: Tag,
        color: Option<String>,
        children: Vec<Node>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Bold,
    Italic,
    Underline,
    Strike,
    Font,
}

impl Tag {
    pub fn name(&self) -> &'static str {
        match self {
            Tag::Bold => "b",
            Tag::Italic => "i",
            Tag::Underline => "u",
            Tag::Strike => "strike",
            Tag::Font => "font",
        }
    }

    fn from_name(name: &str) -> Option<Tag> {
        match name {
            "b" => Some(Tag::Bold),
            "i" => Some(Tag::Italic),
            "u" => Some(Tag::Underline),
            "strike" => Some(Tag::Strike),
            "font" => Some(Tag::Font),
            _ => None,
        }
    }
}

fn escape_text(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
}

/// Escapes plain text so it reads back as an equivalent fragment.
pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    escape_text(text, &mut out);
    out
}

fn normalize_color(value: &str) -> Result<String, RichTextError> {
    let hex = value.strip_prefix('#').unwrap_or(value);
    if hex.len() != 6 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(RichTextError::InvalidColor(value.to_string()));
    }
    Ok(format!("#{}", hex.to_ascii_lowercase()))
}

/// Serializes formatting runs over `text` as a fragment.
///
/// Tags nest in the fixed order font, b, i, u, strike (font outermost) so
/// that equal formatting always serializes identically. Runs may leave gaps
/// (emitted as bare text) but must not overlap or leave the text bounds.
pub fn runs_to_html(text: &str, runs: &[FormatRun]) -> Result<String, RichTextError> {
    let chars: Vec<char> = text.chars().collect();
    let mut sorted: Vec<&FormatRun> = runs.iter().collect();
    sorted.sort_by_key(|r| (r.start, r.end));
    let mut out = String::new();
    let mut position = 0usize;
    for run in sorted {
        if run.end > chars.len() || run.start > run.end {
            return Err(RichTextError::RunOutOfRange {
                start: run.start,
                end: run.end,
                len: chars.len(),
            });
        }
        if run.start < position {
            return Err(RichTextError::OverlappingRuns(run.start));
        }
        if run.start > position {
            let gap: String = chars[position..run.start].iter().collect();
            escape_text(&gap, &mut out);
        }
        let body: String = chars[run.start..run.end].iter().collect();
        let color = match &run.color {
            Some(c) => {
                let normalized = normalize_color(c)?;
                (normalized != "#000000").then_some(normalized)
            }
            None => None,
        };
        let mut open = String::new();
        let mut close = String::new();
        if let Some(color) = &color {
            let _ = write!(open, "<font color=\"{color}\">");
            close.insert_str(0, "</font>");
        }
        for (flag, name) in [
            (run.bold, "b"),
            (run.italic, "i"),
            (run.underline, "u"),
            (run.strike, "strike"),
        ] {
            if flag {
                let _ = write!(open, "<{name}>");
                close.insert_str(0, &format!("</{name}>"));
            }
        }
        out.push_str(&open);
        escape_text(&body, &mut out);
        out.push_str(&close);
        position = run.end;
    }
    if position < chars.len() {
        let tail: String = chars[position..].iter().collect();
        escape_text(&tail, &mut out);
    }
    Ok(out)
}

/// Parses a fragment into its node forest, rejecting anything outside the
/// whitelisted tag set.
pub fn parse_fragment(html: &str) -> Result<Vec<Node>, RichTextError> {
    let wrapped = format!("<fragment>{html}</fragment>");
    let mut reader = Reader::from_str(&wrapped);
    reader.config_mut().check_end_names = true;
    let mut stack: Vec<(Tag, Option<String>, Vec<Node>)> = Vec::new();
    let mut top: Vec<Node> = Vec::new();
    let mut depth = 0usize;
    loop {
        match reader.read_event() {
            Err(e) => return Err(RichTextError::Malformed(e.to_string())),
            Ok(Event::Eof) => break,
            Ok(Event::Start(start)) => {
                let name = String::from_utf8_lossy(start.name().as_ref()).to_string();
                if depth == 0 {
                    if name != "fragment" {
                        return Err(RichTextError::UnknownTag(name));
                    }
                    depth += 1;
                    continue;
                }
                depth += 1;
                let tag = Tag::from_name(&name).ok_or(RichTextError::UnknownTag(name))?;
                let mut color = None;
                for attr in start.attributes() {
                    let attr = attr.map_err(|e| RichTextError::Malformed(e.to_string()))?;
                    let key = String::from_utf8_lossy(attr.key.as_ref()).to_string();
                    if tag == Tag::Font && key == "color" {
                        let value = attr
                            .unescape_value()
                            .map_err(|e| RichTextError::Malformed(e.to_string()))?;
                        color = Some(normalize_color(&value)?);
                    } else {
                        return Err(RichTextError::Malformed(format!(
                            "unexpected attribute {key:?} on <{}>",
                            tag.name()
                        )));
                    }
                }
                stack.push((tag, color, Vec::new()));
            }
            Ok(Event::End(_)) => {
                depth -= 1;
                if depth == 0 {
                    continue; // closing wrapper
                }
                let (tag, color, children) = stack.pop().expect("balanced by reader");
                let node = Node::Element { tag, color, children };
                match stack.last_mut() {
                    Some((_, _, siblings)) => siblings.push(node),
                    None => top.push(node),
                }
            }
            Ok(Event::Empty(start)) => {
                let name = String::from_utf8_lossy(start.name().as_ref()).to_string();
                let tag = Tag::from_name(&name).ok_or(RichTextError::UnknownTag(name))?;
                let node = Node::Element { tag, color: None, children: Vec::new() };
                match stack.last_mut() {
                    Some((_, _, siblings)) => siblings.push(node),
                    None => top.push(node),
                }
            }
            Ok(Event::Text(text)) => {
                let content = text
                    .unescape()
                    .map_err(|e| RichTextError::Malformed(e.to_string()))?
                    .to_string();
                let node = Node::Text(content);
                match stack.last_mut() {
                    Some((_, _, siblings)) => siblings.push(node),
                    None => top.push(node),
                }
            }
            Ok(Event::CData(_) | Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_)) => {
                return Err(RichTextError::Malformed("unsupported markup in fragment".into()))
            }
        }
    }
    Ok(top)
}

/// All text content of a node forest, tags stripped.
pub fn text_content(nodes: &[Node]) -> String {
    let mut out = String::new();
    collect_text(nodes, &mut out);
    out
}

fn collect_text(nodes: &[Node], out: &mut String) {
    for node in nodes {
        match node {
            Node::Text(t) => out.push_str(t),
            Node::Element { children, .. } => collect_text(children, out),
        }
    }
}

/// The tag-stripped text of a fragment.
pub fn strip_tags(html: &str) -> Result<String, RichTextError> {
    Ok(text_content(&parse_fragment(html)?))
}

/// Flattens a fragment into runs with effective styles; adjacent runs with
/// equal style merge. Black font color normalizes to "no color".
pub fn styled_runs(html: &str) -> Result<Vec<StyledRun>, RichTextError> {
    let nodes = parse_fragment(html)?;
    let mut runs: Vec<StyledRun> = Vec::new();
    flatten(&nodes, &SpanStyle::default(), &mut runs);
    Ok(runs)
}

fn flatten(nodes: &[Node], style: &SpanStyle, out: &mut Vec<StyledRun>) {
    for node in nodes {
        match node {
            Node::Text(text) => {
                if let Some(last) = out.last_mut() {
                    if last.style == *style {
                        last.text.push_str(text);
                        continue;
                    }
                }
                out.push(StyledRun { text: text.clone(), style: style.clone() });
            }
            Node::Element { tag, color, children } => {
                let mut inner = style.clone();
                match tag {
                    Tag::Bold => inner.bold = true,
                    Tag::Italic => inner.italic = true,
                    Tag::Underline => inner.underline = true,
                    Tag::Strike => inner.strike = true,
                    Tag::Font => {
                        inner.color = color.as_deref().and_then(|c| {
                            (c != "#000000").then(|| c.to_string())
                        });
                    }
                }
                flatten(children, &inner, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(start: usize, end: usize) -> FormatRun {
        FormatRun { start, end, ..Default::default() }
    }

    #[test]
    fn single_bold_run() {
        let html = runs_to_html("ab", &[FormatRun { bold: true, ..run(0, 2) }]).unwrap();
        assert_eq!(html, "<b>ab</b>");
    }

    #[test]
    fn second_token_red() {
        let runs = [
            run(0, 2),
            FormatRun { color: Some("#ff0000".into()), ..run(2, 3) },
        ];
        assert_eq!(
            runs_to_html("x y", &runs).unwrap(),
            "x <font color=\"#ff0000\">y</font>"
        );
    }

    #[test]
    fn no_formatting_is_identity() {
        assert_eq!(runs_to_html("abc", &[run(0, 3)]).unwrap(), "abc");
        assert_eq!(runs_to_html("abc", &[]).unwrap(), "abc");
    }

    #[test]
    fn nesting_order_is_fixed() {
        let styled = FormatRun {
            bold: true,
            italic: true,
            underline: true,
            strike: true,
            color: Some("#00FF00".into()),
            ..run(0, 1)
        };
        assert_eq!(
            runs_to_html("x", &[styled]).unwrap(),
            "<font color=\"#00ff00\"><b><i><u><strike>x</strike></u></i></b></font>"
        );
    }

    #[test]
    fn black_color_drops_to_plain() {
        let black = FormatRun { color: Some("#000000".into()), ..run(0, 1) };
        assert_eq!(runs_to_html("x", &[black]).unwrap(), "x");
    }

    #[test]
    fn overlapping_runs_error() {
        let err = runs_to_html("abc", &[run(0, 2), run(1, 3)]).unwrap_err();
        assert_eq!(err, RichTextError::OverlappingRuns(1));
    }

    #[test]
    fn escaping_round_trips() {
        let html = runs_to_html("a<b> & \"c\"", &[FormatRun { bold: true, ..run(0, 10) }]).unwrap();
        assert_eq!(html, "<b>a&lt;b&gt; &amp; &quot;c&quot;</b>");
        assert_eq!(strip_tags(&html).unwrap(), "a<b> & \"c\"");
    }

    #[test]
    fn parse_rejects_unknown_tags_and_garbage() {
        assert!(matches!(
            strip_tags("<script>x</script>"),
            Err(RichTextError::UnknownTag(_))
        ));
        assert!(strip_tags("<b>unbalanced").is_err());
        assert!(strip_tags("<b class=\"x\">y</b>").is_err());
        assert!(strip_tags("<font color=\"red\">y</font>").is_err());
    }

    #[test]
    fn styled_runs_flatten_nested_tags() {
        let runs = styled_runs("<b>4<i>2</i></b> x").unwrap();
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[0].text, "4");
        assert!(runs[0].style.bold && !runs[0].style.italic);
        assert_eq!(runs[1].text, "2");
        assert!(runs[1].style.bold && runs[1].style.italic);
        assert_eq!(runs[2].text, " x");
        assert!(runs[2].style.is_plain());
    }

    #[test]
    fn styled_runs_merge_equal_neighbors() {
        let runs = styled_runs("a<font color=\"#000000\">b</font>c").unwrap();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].text, "abc");
        assert!(runs[0].style.is_plain());
    }

    #[test]
    fn runs_round_trip_through_fragment() {
        let original = [
            FormatRun { bold: true, ..run(0, 2) },
            run(2, 5),
            FormatRun { color: Some("#ff0000".into()), italic: true, ..run(5, 9) },
        ];
        let html = runs_to_html("ab cd efgh"[..9].as_ref(), &original).unwrap();
        let styled = styled_runs(&html).unwrap();
        assert_eq!(styled.len(), 3);
        assert_eq!(styled[0].text, "ab");
        assert_eq!(styled[2].style.color.as_deref(), Some("#ff0000"));
        assert!(styled[2].style.italic);
    }
}
