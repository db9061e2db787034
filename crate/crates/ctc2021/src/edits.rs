//! Applying annotations to passages and reducing edits to canonical form.
//!
//! Two edits against the same passage are interchangeable exactly when they
//! produce the same corrected text. The canonical form makes that decidable
//! by syntactic equality: apply the edit on its own, then strip the longest
//! common prefix and suffix between the source and the result. The suffix is
//! clamped so the stripped parts never overlap; whatever remains is the
//! minimal replacement window.

use thiserror::Error;

use crate::model::{self, Annotation, Edit, Passage, Violation};

/// The reduced, type-free form of an edit: replace `incorrect` with
/// `correct` at `location`. At most one of the spans is empty, never both,
/// and they differ in their first and last characters unless one is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalEdit {
    pub location: usize,
    pub incorrect: String,
    pub correct: String,
}

impl CanonicalEdit {
    /// The pair compared at detection level: where the error is and what
    /// the wrong characters are.
    pub fn detection_key(&self) -> (usize, &str) {
        (self.location, &self.incorrect)
    }

    /// Apply to a source text. Returns `None` when the incorrect span does
    /// not bind at `location`.
    pub fn apply_to(&self, source: &str) -> Option<String> {
        let chars: Vec<char> = source.chars().collect();
        let span_len = self.incorrect.chars().count();
        if self.location + span_len > chars.len() {
            return None;
        }
        let found: String = chars[self.location..self.location + span_len].iter().collect();
        if found != self.incorrect {
            return None;
        }
        let mut out: String = chars[..self.location].iter().collect();
        out.push_str(&self.correct);
        out.extend(&chars[self.location + span_len..]);
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("annotation for {pid:?} is invalid: {}", render_violations(.violations))]
    InvalidAnnotation {
        pid: String,
        violations: Vec<Violation>,
    },
}

fn render_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Apply every edit of a validated annotation. Edits are ordered ascending
/// and non-overlapping, so applying right to left keeps each location
/// meaningful in the original coordinate space.
pub fn apply_edits(p: &Passage, a: &Annotation) -> Result<String, ApplyError> {
    model::validate_annotation(a, p).map_err(|violations| ApplyError::InvalidAnnotation {
        pid: a.pid.clone(),
        violations,
    })?;
    let mut chars: Vec<char> = p.text.chars().collect();
    for e in a.edits.iter().rev() {
        let span_len = e.incorrect.chars().count();
        chars.splice(e.location..e.location + span_len, e.correct.chars());
    }
    Ok(chars.into_iter().collect())
}

/// Apply one edit alone, validating it against the passage first.
pub fn apply_edit(p: &Passage, e: &Edit) -> Result<String, ApplyError> {
    apply_edits(p, &Annotation::new(p.pid.clone(), vec![e.clone()]))
}

/// Reduce a source/target pair to the minimal replacement window turning
/// one into the other. Returns `None` when the texts are identical.
pub fn extract_min_edit(source: &str, target: &str) -> Option<CanonicalEdit> {
    if source == target {
        return None;
    }
    let source_chars = source.chars().count();
    let target_chars = target.chars().count();

    let mut pre = 0usize;
    let mut pre_bytes = 0usize;
    for (a, b) in source.chars().zip(target.chars()) {
        if a != b {
            break;
        }
        pre += 1;
        pre_bytes += a.len_utf8();
    }

    let max_suf = source_chars.min(target_chars) - pre;
    let mut suf = 0usize;
    let mut suf_bytes = 0usize;
    for (a, b) in source.chars().rev().zip(target.chars().rev()) {
        if suf == max_suf || a != b {
            break;
        }
        suf += 1;
        suf_bytes += a.len_utf8();
    }

    Some(CanonicalEdit {
        location: pre,
        incorrect: source[pre_bytes..source.len() - suf_bytes].to_string(),
        correct: target[pre_bytes..target.len() - suf_bytes].to_string(),
    })
}

/// Canonicalize an edit against its passage: apply it alone, then extract
/// the minimal window between the passage text and the result.
pub fn canonicalize(p: &Passage, e: &Edit) -> Result<CanonicalEdit, ApplyError> {
    let corrected = apply_edit(p, e)?;
    // A validated edit always changes the text: its spans differ, so the
    // spliced result cannot equal the source.
    extract_min_edit(&p.text, &corrected).ok_or_else(|| ApplyError::InvalidAnnotation {
        pid: p.pid.clone(),
        violations: vec![Violation {
            edit_index: Some(0),
            kind: model::ViolationKind::IdenticalSpans,
        }],
    })
}
