//! Date and time recognition for cell texts.
//!
//! The accepted grammar is deliberately a closed list (the normative set is
//! documented in the README): ISO `YYYY-MM-DD`, slash dates `M/D/YYYY`
//! (month first), dot dates `D.M.YYYY` and `D.M.YY` (day first), English
//! month-name dates `Mar 3, 2021` / `March 3, 2021` and German month-name
//! dates `3. Februar 2021`. Times are `H:MM`, `H:MM:SS`, each optionally
//! followed by `AM`/`PM`. Ambiguous numeric dates resolve by separator:
//! `/` prefers month-day order, `.` prefers day-month; the fallback order is
//! tried when the preferred reading is not a valid calendar date.

use std::sync::LazyLock;

use regex::Regex;

/// A calendar date, already validated against month lengths and leap years.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CivilDate {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CivilTime {
    pub hour: u32,
    pub minute: u32,
    pub second: u32,
}

impl CivilDate {
    pub fn new(year: i32, month: u32, day: u32) -> Option<CivilDate> {
        if !(1..=9999).contains(&year) || !(1..=12).contains(&month) {
            return None;
        }
        if day == 0 || day > days_in_month(year, month) {
            return None;
        }
        Some(CivilDate { year, month, day })
    }

    /// `YYYY-MM-DD`.
    pub fn to_xsd(self) -> String {
        format!("{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl CivilTime {
    pub fn to_xsd(self) -> String {
        format!("{:02}:{:02}:{:02}", self.hour, self.minute, self.second)
    }
}

pub fn is_leap_year(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap_year(year) => 29,
        2 => 28,
        _ => 0,
    }
}

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
pub fn days_from_civil(year: i32, month: u32, day: u32) -> i64 {
    let y = year as i64 - if month <= 2 { 1 } else { 0 };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let doy = (153 * (month as i64 + if month > 2 { -3 } else { 9 }) + 2) / 5 + day as i64 - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146097 + doe - 719468
}

/// Inverse of [`days_from_civil`].
pub fn civil_from_days(days: i64) -> (i32, u32, u32) {
    let z = days + 719468;
    let era = if z >= 0 { z } else { z - 146096 } / 146097;
    let doe = z - era * 146097;
    let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    ((y + if month <= 2 { 1 } else { 0 }) as i32, month, day)
}

/// Which component order wins when a numeric date is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DateLocale {
    /// Month-day for `/`, day-month for `.` (separator correlates with locale).
    #[default]
    Auto,
    /// Month-day order preferred for both separators.
    English,
    /// Day-month order preferred for both separators.
    German,
}

/// A user-supplied numeric date pattern such as `YYYY/MM/DD`.
#[derive(Debug, Clone)]
pub struct NumericDatePattern {
    regex: Regex,
    order: [DateField; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DateField {
    Year4,
    Year2,
    Month,
    Day,
}

impl NumericDatePattern {
    /// Parses a pattern of three component tokens (`YYYY`, `YY`, `MM`, `M`,
    /// `DD`, `D`) joined by one non-alphanumeric separator character.
    pub fn parse(pattern: &str) -> Result<NumericDatePattern, String> {
        let mut order = Vec::new();
        let mut pieces = Vec::new();
        let mut separator: Option<char> = None;
        let mut rest = pattern;
        while !rest.is_empty() {
            let (field, token_len) = if rest.starts_with("YYYY") {
                (DateField::Year4, 4)
            } else if rest.starts_with("YY") {
                (DateField::Year2, 2)
            } else if rest.starts_with("MM") {
                (DateField::Month, 2)
            } else if rest.starts_with('M') {
                (DateField::Month, 1)
            } else if rest.starts_with("DD") {
                (DateField::Day, 2)
            } else if rest.starts_with('D') {
                (DateField::Day, 1)
            } else {
                return Err(format!("unexpected token at {rest:?} in date pattern {pattern:?}"));
            };
            order.push(field);
            pieces.push(match field {
                DateField::Year4 => r"(\d{4})",
                DateField::Year2 => r"(\d{2})",
                DateField::Month | DateField::Day if token_len == 2 => r"(\d{2})",
                _ => r"(\d{1,2})",
            });
            rest = &rest[token_len..];
            if order.len() < 3 {
                let sep = rest
                    .chars()
                    .next()
                    .ok_or_else(|| format!("date pattern {pattern:?} is incomplete"))?;
                if sep.is_alphanumeric() {
                    return Err(format!("invalid separator {sep:?} in date pattern {pattern:?}"));
                }
                if let Some(first) = separator {
                    if first != sep {
                        return Err(format!("mixed separators in date pattern {pattern:?}"));
                    }
                }
                separator = Some(sep);
                rest = &rest[sep.len_utf8()..];
            } else {
                break;
            }
        }
        if order.len() != 3 || !rest.is_empty() {
            return Err(format!("date pattern {pattern:?} must have exactly three components"));
        }
        let sep = regex::escape(&separator.unwrap().to_string());
        let regex = Regex::new(&format!(
            "{}{sep}{}{sep}{}",
            pieces[0], pieces[1], pieces[2]
        ))
        .map_err(|e| e.to_string())?;
        Ok(NumericDatePattern {
            regex,
            order: [order[0], order[1], order[2]],
        })
    }

    fn interpret(&self, caps: &regex::Captures<'_>) -> Option<CivilDate> {
        let mut year = None;
        let mut month = None;
        let mut day = None;
        for (i, field) in self.order.iter().enumerate() {
            let value: i64 = caps.get(i + 1)?.as_str().parse().ok()?;
            match field {
                DateField::Year4 => year = Some(value as i32),
                DateField::Year2 => year = Some(window_two_digit_year(value as i32)),
                DateField::Month => month = Some(value as u32),
                DateField::Day => day = Some(value as u32),
            }
        }
        CivilDate::new(year?, month?, day?)
    }
}

/// Two-digit years follow the spreadsheet convention: 00-29 map into the
/// 2000s, 30-99 into the 1900s.
fn window_two_digit_year(yy: i32) -> i32 {
    if yy <= 29 {
        2000 + yy
    } else {
        1900 + yy
    }
}

/// The configured date/datetime recognizer.
#[derive(Debug, Clone, Default)]
pub struct DateGrammar {
    pub locale: DateLocale,
    pub extra_patterns: Vec<NumericDatePattern>,
}

static ISO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(\d{4})-(\d{2})-(\d{2})").unwrap());
static SLASH: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d{1,2})/(\d{1,2})/(\d{4})").unwrap());
static DOT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(\d{1,2})\.(\d{1,2})\.(\d{4}|\d{2})").unwrap());
static MONTH_NAME_EN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(jan(?:uary)?|feb(?:ruary)?|mar(?:ch)?|apr(?:il)?|may|jun(?:e)?|jul(?:y)?|aug(?:ust)?|sep(?:tember)?|oct(?:ober)?|nov(?:ember)?|dec(?:ember)?)\.? (\d{1,2}), ?(\d{4})")
        .unwrap()
});
static MONTH_NAME_DE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(\d{1,2})\. ?(januar|februar|märz|april|mai|juni|juli|august|september|oktober|november|dezember|jan|feb|mär|apr|jun|jul|aug|sep|okt|nov|dez)\.? (\d{4})")
        .unwrap()
});
static TIME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)(\d{1,2}):(\d{2})(?::(\d{2}))?( ?(?:AM|PM))?").unwrap());

fn month_from_name(name: &str) -> Option<u32> {
    let lower = name.to_lowercase();
    let month = match lower.as_str() {
        "jan" | "january" | "januar" => 1,
        "feb" | "february" | "februar" => 2,
        "mar" | "march" | "mär" | "märz" => 3,
        "apr" | "april" => 4,
        "may" | "mai" => 5,
        "jun" | "june" | "juni" => 6,
        "jul" | "july" | "juli" => 7,
        "aug" | "august" => 8,
        "sep" | "september" => 9,
        "oct" | "october" | "okt" | "oktober" => 10,
        "nov" | "november" => 11,
        "dec" | "december" | "dez" | "dezember" => 12,
        _ => return None,
    };
    Some(month)
}

/// A date (and the span it occupies) found inside a text.
#[derive(Debug, Clone, Copy)]
struct DateMatch {
    start: usize,
    end: usize,
    date: CivilDate,
}

impl DateGrammar {
    pub fn is_date(&self, text: &str) -> bool {
        self.parse_date(text).is_some()
    }

    pub fn is_datetime(&self, text: &str) -> bool {
        self.parse_datetime(text).is_some()
    }

    /// Accepts only when the whole (trimmed) text is a single date.
    pub fn parse_date(&self, text: &str) -> Option<CivilDate> {
        let trimmed = text.trim();
        let found = self.find_date_in(trimmed)?;
        (found.start == 0 && found.end == trimmed.len()).then_some(found.date)
    }

    /// Accepts only when the whole (trimmed) text is a date plus a time.
    pub fn parse_datetime(&self, text: &str) -> Option<(CivilDate, CivilTime)> {
        let trimmed = text.trim();
        let date = self.find_date_in(trimmed)?;
        if date.start != 0 {
            return None;
        }
        let rest = &trimmed[date.end..];
        let after_gap = rest.trim_start();
        if after_gap.len() == rest.len() {
            return None; // no separating whitespace
        }
        let (time, span) = parse_time_prefix(after_gap)?;
        (span == after_gap.len()).then_some((date.date, time))
    }

    /// Leftmost date occurring anywhere in the text.
    pub fn find_date(&self, text: &str) -> Option<CivilDate> {
        self.find_date_in(text).map(|m| m.date)
    }

    /// Leftmost date immediately followed by whitespace and a time.
    pub fn find_datetime(&self, text: &str) -> Option<(CivilDate, CivilTime)> {
        let mut offset = 0;
        while offset <= text.len() {
            let found = self.find_date_in(&text[offset..])?;
            let rest = &text[offset + found.end..];
            let after_gap = rest.trim_start();
            if after_gap.len() < rest.len() {
                if let Some((time, _)) = parse_time_prefix(after_gap) {
                    return Some((found.date, time));
                }
            }
            offset += found.end.max(1);
        }
        None
    }

    fn find_date_in(&self, text: &str) -> Option<DateMatch> {
        let mut best: Option<DateMatch> = None;
        let mut consider = |candidate: DateMatch| match best {
            Some(b) if (candidate.start, std::cmp::Reverse(candidate.end)) >= (b.start, std::cmp::Reverse(b.end)) => {}
            _ => best = Some(candidate),
        };

        for m in regex_matches(&ISO, text) {
            let caps = ISO.captures(&text[m.0..m.1]).unwrap();
            if let Some(date) = CivilDate::new(
                caps[1].parse().unwrap(),
                caps[2].parse().unwrap(),
                caps[3].parse().unwrap(),
            ) {
                consider(DateMatch { start: m.0, end: m.1, date });
            }
        }
        for m in regex_matches(&SLASH, text) {
            let caps = SLASH.captures(&text[m.0..m.1]).unwrap();
            let first: u32 = caps[1].parse().unwrap();
            let second: u32 = caps[2].parse().unwrap();
            let year: i32 = caps[3].parse().unwrap();
            let month_first = self.locale != DateLocale::German;
            if let Some(date) = resolve_numeric(year, first, second, month_first) {
                consider(DateMatch { start: m.0, end: m.1, date });
            }
        }
        for m in regex_matches(&DOT, text) {
            let caps = DOT.captures(&text[m.0..m.1]).unwrap();
            let first: u32 = caps[1].parse().unwrap();
            let second: u32 = caps[2].parse().unwrap();
            let year_text = &caps[3];
            let year: i32 = if year_text.len() == 2 {
                window_two_digit_year(year_text.parse().unwrap())
            } else {
                year_text.parse().unwrap()
            };
            let month_first = self.locale == DateLocale::English;
            if let Some(date) = resolve_numeric(year, first, second, month_first) {
                consider(DateMatch { start: m.0, end: m.1, date });
            }
        }
        for m in regex_matches(&MONTH_NAME_EN, text) {
            let caps = MONTH_NAME_EN.captures(&text[m.0..m.1]).unwrap();
            if let Some(month) = month_from_name(&caps[1]) {
                if let Some(date) = CivilDate::new(
                    caps[3].parse().unwrap(),
                    month,
                    caps[2].parse().unwrap(),
                ) {
                    consider(DateMatch { start: m.0, end: m.1, date });
                }
            }
        }
        for m in regex_matches(&MONTH_NAME_DE, text) {
            let caps = MONTH_NAME_DE.captures(&text[m.0..m.1]).unwrap();
            if let Some(month) = month_from_name(&caps[2]) {
                if let Some(date) = CivilDate::new(
                    caps[3].parse().unwrap(),
                    month,
                    caps[1].parse().unwrap(),
                ) {
                    consider(DateMatch { start: m.0, end: m.1, date });
                }
            }
        }
        for pattern in &self.extra_patterns {
            for m in regex_matches(&pattern.regex, text) {
                let caps = pattern.regex.captures(&text[m.0..m.1]).unwrap();
                if let Some(date) = pattern.interpret(&caps) {
                    consider(DateMatch { start: m.0, end: m.1, date });
                }
            }
        }
        best
    }
}

/// Numeric day/month resolution: the preferred order is tried first, the
/// other order is the fallback when the preferred one is no valid date.
fn resolve_numeric(year: i32, first: u32, second: u32, month_first: bool) -> Option<CivilDate> {
    let (a, b) = if month_first { (first, second) } else { (second, first) };
    CivilDate::new(year, a, b).or_else(|| CivilDate::new(year, b, a))
}

/// All matches of `re` whose surroundings look like token boundaries
/// (no letter or digit immediately before or after).
fn regex_matches(re: &Regex, text: &str) -> Vec<(usize, usize)> {
    re.find_iter(text)
        .filter(|m| {
            let before_ok = text[..m.start()]
                .chars()
                .next_back()
                .map_or(true, |c| !c.is_alphanumeric());
            let after_ok = text[m.end()..]
                .chars()
                .next()
                .map_or(true, |c| !c.is_alphanumeric());
            before_ok && after_ok
        })
        .map(|m| (m.start(), m.end()))
        .collect()
}

/// Parses a time at the start of `text`; returns the time and consumed length.
fn parse_time_prefix(text: &str) -> Option<(CivilTime, usize)> {
    let m = TIME.find(text)?;
    if m.start() != 0 {
        return None;
    }
    if text[m.end()..].chars().next().is_some_and(|c| c.is_alphanumeric()) {
        return None;
    }
    let caps = TIME.captures(&text[..m.end()]).unwrap();
    let hour: u32 = caps[1].parse().unwrap();
    let minute: u32 = caps[2].parse().unwrap();
    let second: u32 = caps.get(3).map_or(0, |s| s.as_str().parse().unwrap());
    if minute > 59 || second > 59 {
        return None;
    }
    let hour = match caps.get(4).map(|s| s.as_str().trim().to_ascii_uppercase()) {
        Some(meridiem) => {
            if !(1..=12).contains(&hour) {
                return None;
            }
            match (meridiem.as_str(), hour) {
                ("AM", 12) => 0,
                ("AM", h) => h,
                ("PM", 12) => 12,
                ("PM", h) => h + 12,
                _ => return None,
            }
        }
        None => {
            if hour > 23 {
                return None;
            }
            hour
        }
    };
    Some((CivilTime { hour, minute, second }, m.end()))
}
