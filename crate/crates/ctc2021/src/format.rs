//! Line formats for passages and answers.
//!
//! A passage line is `pid<TAB>text` (first tab wins; a single ASCII space
//! separates when no tab is present). An answer line is
//!
//! ```text
//! PID=<pid>, <loc>, <error type>, <incorrect>, <correct>, ...
//! ```
//!
//! with one `loc, type, incorrect, correct` group per edit and a trailing
//! comma, or `PID=<pid>, -1` for an error-free passage. Tokens are split on
//! ASCII commas and trimmed of surrounding ASCII spaces; the `PID=` prefix
//! is optional on input. Files use one record per line, `\n` or `\r\n`,
//! UTF-8; a leading BOM and blank lines are skipped with a warning.

use std::io::BufRead;

use thiserror::Error;

use crate::model::{
    valid_pid, Annotation, AnswerSet, Edit, FineErrorType, ModelError, Passage, PassageSet,
};

pub const NO_ERROR_TOKEN: &str = "-1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing pid")]
    MissingPid,
    #[error("invalid pid {0:?}")]
    InvalidPid(String),
    #[error("invalid location {0:?}")]
    InvalidLocation(String),
    #[error("unknown error type {0:?}")]
    UnknownErrorType(String),
    #[error("expected location/type/incorrect/correct groups, found {0} leftover token(s)")]
    GroupCount(usize),
    #[error("unexpected tokens after {NO_ERROR_TOKEN:?}")]
    TokensAfterNoError,
    #[error("both spans are empty")]
    EmptySpans,
    #[error("missing pid/text separator")]
    MissingSeparator,
    #[error("passage text is empty")]
    EmptyText,
    #[error("duplicate pid {0:?}")]
    DuplicatePid(String),
    #[error(transparent)]
    Io(#[from] IoKind),
}

/// io::Error with value semantics so parse errors stay comparable in tests.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct IoKind(String);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {kind}")]
    At { line: usize, kind: ParseErrorKind },
    #[error("{0}")]
    Whole(ParseErrorKind),
}

impl ParseError {
    fn at(line: usize, kind: ParseErrorKind) -> Self {
        ParseError::At { line, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializeError {
    #[error("invalid pid {0:?}")]
    InvalidPid(String),
    #[error("pid {0:?} starts with the reserved prefix PID=")]
    AmbiguousPid(String),
    #[error("span {0:?} contains an ASCII comma")]
    CommaInSpan(String),
    #[error("span {0:?} has a leading or trailing ASCII space")]
    EdgeSpaceInSpan(String),
    #[error("text or span {0:?} contains a line break")]
    LineBreak(String),
}

fn strip_pid_prefix(token: &str) -> &str {
    token.strip_prefix("PID=").unwrap_or(token)
}

/// Parse one answer line into an annotation. The line must already be free
/// of its trailing newline.
pub fn parse_answer_line(line: &str) -> Result<Annotation, ParseErrorKind> {
    let tokens: Vec<&str> = line.split(',').map(|t| t.trim_matches(' ')).collect();
    let pid = strip_pid_prefix(tokens[0]);
    if pid.is_empty() {
        return Err(ParseErrorKind::MissingPid);
    }
    if !valid_pid(pid) {
        return Err(ParseErrorKind::InvalidPid(pid.to_string()));
    }

    if tokens.len() >= 2 && tokens[1] == NO_ERROR_TOKEN {
        let rest = &tokens[2..];
        if rest.is_empty() || rest == [""] {
            return Ok(Annotation::empty(pid));
        }
        return Err(ParseErrorKind::TokensAfterNoError);
    }

    let mut rest = &tokens[1..];
    if let [head @ .., ""] = rest {
        rest = head;
    }
    if rest.len() % 4 != 0 {
        return Err(ParseErrorKind::GroupCount(rest.len() % 4));
    }
    let mut edits = Vec::with_capacity(rest.len() / 4);
    for group in rest.chunks_exact(4) {
        let location = parse_location(group[0])?;
        let error_type = FineErrorType::from_label(group[1])
            .ok_or_else(|| ParseErrorKind::UnknownErrorType(group[1].to_string()))?;
        let incorrect = group[2];
        let correct = group[3];
        if incorrect.is_empty() && correct.is_empty() {
            return Err(ParseErrorKind::EmptySpans);
        }
        edits.push(Edit::new(location, error_type, incorrect, correct));
    }
    Ok(Annotation::new(pid, edits))
}

fn parse_location(token: &str) -> Result<usize, ParseErrorKind> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseErrorKind::InvalidLocation(token.to_string()));
    }
    token
        .parse()
        .map_err(|_| ParseErrorKind::InvalidLocation(token.to_string()))
}

/// Serialize an annotation to its answer line, without a newline.
///
/// Spans that the line grammar cannot represent are rejected: ASCII commas
/// (the token separator), leading or trailing ASCII spaces (lost to token
/// trimming), and line breaks. Pids starting with `PID=` would not survive
/// prefix stripping and are rejected too.
pub fn serialize_annotation(a: &Annotation) -> Result<String, SerializeError> {
    if !valid_pid(&a.pid) {
        return Err(SerializeError::InvalidPid(a.pid.clone()));
    }
    if a.pid.starts_with("PID=") {
        return Err(SerializeError::AmbiguousPid(a.pid.clone()));
    }
    let mut out = format!("PID={}", a.pid);
    if a.edits.is_empty() {
        out.push_str(", ");
        out.push_str(NO_ERROR_TOKEN);
        return Ok(out);
    }
    for e in &a.edits {
        check_span(&e.incorrect)?;
        check_span(&e.correct)?;
        out.push_str(&format!(
            ", {}, {}, {}, {}",
            e.location,
            e.error_type.label(),
            e.incorrect,
            e.correct
        ));
    }
    out.push(',');
    Ok(out)
}

fn check_span(span: &str) -> Result<(), SerializeError> {
    if span.contains(',') {
        return Err(SerializeError::CommaInSpan(span.to_string()));
    }
    if span.contains('\n') || span.contains('\r') {
        return Err(SerializeError::LineBreak(span.to_string()));
    }
    if span.starts_with(' ') || span.ends_with(' ') {
        return Err(SerializeError::EdgeSpaceInSpan(span.to_string()));
    }
    Ok(())
}

/// Parse one passage line: pid, separator, text verbatim.
pub fn parse_passage_line(line: &str) -> Result<Passage, ParseErrorKind> {
    let (pid_part, text) = match line.split_once('\t') {
        Some(pair) => pair,
        None => line
            .split_once(' ')
            .ok_or(ParseErrorKind::MissingSeparator)?,
    };
    let pid = strip_pid_prefix(pid_part);
    if pid.is_empty() {
        return Err(ParseErrorKind::MissingPid);
    }
    if !valid_pid(pid) {
        return Err(ParseErrorKind::InvalidPid(pid.to_string()));
    }
    if text.is_empty() {
        return Err(ParseErrorKind::EmptyText);
    }
    Passage::new(pid, text).map_err(|e| match e {
        ModelError::InvalidPid(p) => ParseErrorKind::InvalidPid(p),
        ModelError::EmptyText(_) => ParseErrorKind::EmptyText,
        ModelError::DuplicatePid(p) => ParseErrorKind::DuplicatePid(p),
    })
}

/// Serialize a passage to its `pid<TAB>text` line, without a newline.
pub fn serialize_passage_line(p: &Passage) -> Result<String, SerializeError> {
    if !valid_pid(&p.pid) {
        return Err(SerializeError::InvalidPid(p.pid.clone()));
    }
    if p.pid.starts_with("PID=") {
        return Err(SerializeError::AmbiguousPid(p.pid.clone()));
    }
    if p.text.contains('\n') || p.text.contains('\r') {
        return Err(SerializeError::LineBreak(p.text.clone()));
    }
    Ok(format!("{}\t{}", p.pid, p.text))
}

#[derive(Debug, Default)]
pub struct Parsed<T> {
    pub records: T,
    pub warnings: Vec<String>,
}

struct LineReader<R> {
    inner: R,
    number: usize,
}

impl<R: BufRead> LineReader<R> {
    fn new(inner: R) -> Self {
        LineReader { inner, number: 0 }
    }

    /// Next content line: line endings stripped, BOM removed on the first
    /// line, blank lines skipped. Returns the 1-based line number.
    fn next_content(&mut self, warnings: &mut Vec<String>) -> Result<Option<(usize, String)>, ParseError> {
        loop {
            let mut raw = String::new();
            let n = self
                .inner
                .read_line(&mut raw)
                .map_err(|e| ParseError::Whole(ParseErrorKind::Io(IoKind(e.to_string()))))?;
            if n == 0 {
                return Ok(None);
            }
            self.number += 1;
            if raw.ends_with('\n') {
                raw.pop();
                if raw.ends_with('\r') {
                    raw.pop();
                }
            }
            if self.number == 1 {
                if let Some(stripped) = raw.strip_prefix('\u{feff}') {
                    warnings.push("line 1: byte order mark skipped".to_string());
                    raw = stripped.to_string();
                }
            }
            if raw.trim().is_empty() {
                warnings.push(format!("line {}: blank line skipped", self.number));
                continue;
            }
            return Ok(Some((self.number, raw)));
        }
    }
}

/// Parse a whole passage file. Duplicate pids are an error.
pub fn parse_passage_file<R: BufRead>(reader: R) -> Result<Parsed<PassageSet>, ParseError> {
    let mut lines = LineReader::new(reader);
    let mut warnings = Vec::new();
    let mut set = PassageSet::new();
    while let Some((number, line)) = lines.next_content(&mut warnings)? {
        let passage = parse_passage_line(&line).map_err(|kind| ParseError::at(number, kind))?;
        set.insert(passage)
            .map_err(|e| ParseError::at(number, ParseErrorKind::DuplicatePid(pid_of(e))))?;
    }
    Ok(Parsed {
        records: set,
        warnings,
    })
}

/// Parse a whole answer file. Duplicate pids are an error.
pub fn parse_answer_file<R: BufRead>(reader: R) -> Result<Parsed<AnswerSet>, ParseError> {
    let mut lines = LineReader::new(reader);
    let mut warnings = Vec::new();
    let mut set = AnswerSet::new();
    while let Some((number, line)) = lines.next_content(&mut warnings)? {
        let annotation = parse_answer_line(&line).map_err(|kind| ParseError::at(number, kind))?;
        set.insert(annotation)
            .map_err(|e| ParseError::at(number, ParseErrorKind::DuplicatePid(pid_of(e))))?;
    }
    Ok(Parsed {
        records: set,
        warnings,
    })
}

fn pid_of(e: ModelError) -> String {
    match e {
        ModelError::InvalidPid(p) | ModelError::EmptyText(p) | ModelError::DuplicatePid(p) => p,
    }
}

/// Serialize a full answer set, one line per annotation, trailing newline.
pub fn serialize_answer_file(answers: &AnswerSet) -> Result<String, SerializeError> {
    let mut out = String::new();
    for a in answers.iter() {
        out.push_str(&serialize_annotation(a)?);
        out.push('\n');
    }
    Ok(out)
}

/// Serialize a full passage set, one line per passage, trailing newline.
pub fn serialize_passage_file(passages: &PassageSet) -> Result<String, SerializeError> {
    let mut out = String::new();
    for p in passages.iter() {
        out.push_str(&serialize_passage_line(p)?);
        out.push('\n');
    }
    Ok(out)
}
