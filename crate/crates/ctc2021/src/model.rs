//! Core domain types: passages, edits, annotations, and the error taxonomy.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// The seven fine-grained error categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FineErrorType {
    Character,
    Word,
    Missing,
    Redundant,
    Disordered,
    SemanticRepetition,
    SyntacticHybridity,
}

/// The three coarse categories the fine-grained types roll up into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoarseErrorType {
    Spelling,
    Grammatical,
    Semantic,
}

impl FineErrorType {
    pub const ALL: [FineErrorType; 7] = [
        FineErrorType::Character,
        FineErrorType::Word,
        FineErrorType::Missing,
        FineErrorType::Redundant,
        FineErrorType::Disordered,
        FineErrorType::SemanticRepetition,
        FineErrorType::SyntacticHybridity,
    ];

    /// The literal label used in answer files.
    pub fn label(self) -> &'static str {
        match self {
            FineErrorType::Character => "character error",
            FineErrorType::Word => "word error",
            FineErrorType::Missing => "missing error",
            FineErrorType::Redundant => "redundant error",
            FineErrorType::Disordered => "disordered error",
            FineErrorType::SemanticRepetition => "semantic repetition",
            FineErrorType::SyntacticHybridity => "syntactic hybridity",
        }
    }

    /// Parse a label, tolerating case differences and irregular inner whitespace.
    pub fn from_label(s: &str) -> Option<Self> {
        let norm = normalize_label(s);
        Self::ALL.iter().copied().find(|t| t.label() == norm)
    }

    /// The coarse category this type belongs to.
    pub fn coarse(self) -> CoarseErrorType {
        match self {
            FineErrorType::Character | FineErrorType::Word => CoarseErrorType::Spelling,
            FineErrorType::Missing | FineErrorType::Redundant | FineErrorType::Disordered => {
                CoarseErrorType::Grammatical
            }
            FineErrorType::SemanticRepetition | FineErrorType::SyntacticHybridity => {
                CoarseErrorType::Semantic
            }
        }
    }
}

impl CoarseErrorType {
    pub const ALL: [CoarseErrorType; 3] = [
        CoarseErrorType::Spelling,
        CoarseErrorType::Grammatical,
        CoarseErrorType::Semantic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CoarseErrorType::Spelling => "spelling error",
            CoarseErrorType::Grammatical => "grammatical error",
            CoarseErrorType::Semantic => "Chinese semantic error",
        }
    }
}

impl fmt::Display for FineErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Display for CoarseErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn normalize_label(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid pid {0:?}: must be non-empty, without whitespace or ASCII commas")]
    InvalidPid(String),
    #[error("passage {0:?} has empty text")]
    EmptyText(String),
    #[error("duplicate pid {0:?}")]
    DuplicatePid(String),
}

/// A pid is any non-empty token free of whitespace and ASCII commas.
pub fn valid_pid(pid: &str) -> bool {
    !pid.is_empty() && !pid.chars().any(|c| c.is_whitespace() || c == ',')
}

/// One unit of source text, identified by pid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub pid: String,
    pub text: String,
}

impl Passage {
    pub fn new(pid: impl Into<String>, text: impl Into<String>) -> Result<Self, ModelError> {
        let pid = pid.into();
        let text = text.into();
        if !valid_pid(&pid) {
            return Err(ModelError::InvalidPid(pid));
        }
        if text.is_empty() {
            return Err(ModelError::EmptyText(pid));
        }
        Ok(Passage { pid, text })
    }

    /// Text length in characters, not bytes.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// One error instance: where it starts, what kind it is, and the two spans.
///
/// `location` indexes the start of `incorrect` in the passage text. For a
/// pure insertion (`incorrect` empty) it is the index at which `correct`
/// must be inserted, and may equal the text length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edit {
    pub location: usize,
    pub error_type: FineErrorType,
    /// The continuous incorrect characters; empty when text is missing.
    pub incorrect: String,
    /// The corrected characters; empty when the incorrect span is deleted.
    pub correct: String,
}

impl Edit {
    pub fn new(
        location: usize,
        error_type: FineErrorType,
        incorrect: impl Into<String>,
        correct: impl Into<String>,
    ) -> Self {
        Edit {
            location,
            error_type,
            incorrect: incorrect.into(),
            correct: correct.into(),
        }
    }
}

/// The full set of edits claimed for one passage. Empty edits means the
/// passage is declared error-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub pid: String,
    pub edits: Vec<Edit>,
}

impl Annotation {
    pub fn new(pid: impl Into<String>, edits: Vec<Edit>) -> Self {
        Annotation {
            pid: pid.into(),
            edits,
        }
    }

    pub fn empty(pid: impl Into<String>) -> Self {
        Annotation::new(pid, Vec::new())
    }
}

/// Why an edit or annotation failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ViolationKind {
    #[error("pid mismatch: annotation {annotation:?} vs passage {passage:?}")]
    PidMismatch { annotation: String, passage: String },
    #[error("both spans are empty")]
    EmptySpans,
    #[error("incorrect and correct spans are identical")]
    IdenticalSpans,
    #[error("{error_type} requires {requirement}")]
    ShapeMismatch {
        error_type: FineErrorType,
        requirement: &'static str,
    },
    #[error("disordered error spans must be permutations of each other")]
    NotPermutation,
    #[error("location {location} out of bounds for text of {text_len} characters")]
    OutOfBounds { location: usize, text_len: usize },
    #[error("span mismatch at {location}: text has {found:?}, edit claims {claimed:?}")]
    SpanMismatch {
        location: usize,
        claimed: String,
        found: String,
    },
    #[error("location does not ascend strictly over the previous edit")]
    Unsorted,
    #[error("span overlaps the previous edit")]
    Overlap,
}

/// A validation failure, tagged with the offending edit where applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub edit_index: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.edit_index {
            Some(i) => write!(f, "edit {}: {}", i, self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Passage-independent checks: span emptiness against the error type, the
/// disordered permutation rule, and the ban on no-op edits.
pub fn edit_shape_violations(e: &Edit) -> Vec<ViolationKind> {
    if e.incorrect.is_empty() && e.correct.is_empty() {
        return vec![ViolationKind::EmptySpans];
    }
    if e.incorrect == e.correct {
        return vec![ViolationKind::IdenticalSpans];
    }
    let shape = |requirement| ViolationKind::ShapeMismatch {
        error_type: e.error_type,
        requirement,
    };
    match e.error_type {
        FineErrorType::Character | FineErrorType::Word => {
            if e.incorrect.is_empty() || e.correct.is_empty() {
                return vec![shape("non-empty incorrect and correct spans")];
            }
        }
        FineErrorType::Missing => {
            if !e.incorrect.is_empty() || e.correct.is_empty() {
                return vec![shape("an empty incorrect span and a non-empty correct span")];
            }
        }
        FineErrorType::Redundant
        | FineErrorType::SemanticRepetition
        | FineErrorType::SyntacticHybridity => {
            if e.incorrect.is_empty() || !e.correct.is_empty() {
                return vec![shape("a non-empty incorrect span and an empty correct span")];
            }
        }
        FineErrorType::Disordered => {
            if e.incorrect.is_empty() || e.correct.is_empty() {
                return vec![shape("non-empty incorrect and correct spans")];
            }
            if !is_permutation(&e.incorrect, &e.correct) {
                return vec![ViolationKind::NotPermutation];
            }
        }
    }
    Vec::new()
}

fn is_permutation(a: &str, b: &str) -> bool {
    let mut ac: Vec<char> = a.chars().collect();
    let mut bc: Vec<char> = b.chars().collect();
    ac.sort_unstable();
    bc.sort_unstable();
    ac == bc
}

/// Checks against the passage text: bounds and span binding. `text` is the
/// passage as characters.
pub fn edit_binding_violations(e: &Edit, text: &[char]) -> Vec<ViolationKind> {
    let span_len = e.incorrect.chars().count();
    if e.location > text.len() || e.location + span_len > text.len() {
        return vec![ViolationKind::OutOfBounds {
            location: e.location,
            text_len: text.len(),
        }];
    }
    let found: String = text[e.location..e.location + span_len].iter().collect();
    if found != e.incorrect {
        return vec![ViolationKind::SpanMismatch {
            location: e.location,
            claimed: e.incorrect.clone(),
            found,
        }];
    }
    Vec::new()
}

/// All per-edit checks: shape plus binding.
pub fn edit_violations(e: &Edit, text: &[char]) -> Vec<ViolationKind> {
    let mut out = edit_shape_violations(e);
    out.extend(edit_binding_violations(e, text));
    out
}

/// Validate an annotation against its passage: pid agreement, every edit
/// individually, and strictly ascending, non-overlapping spans.
pub fn validate_annotation(a: &Annotation, p: &Passage) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if a.pid != p.pid {
        out.push(Violation {
            edit_index: None,
            kind: ViolationKind::PidMismatch {
                annotation: a.pid.clone(),
                passage: p.pid.clone(),
            },
        });
    }
    let text: Vec<char> = p.text.chars().collect();
    for (i, e) in a.edits.iter().enumerate() {
        for kind in edit_violations(e, &text) {
            out.push(Violation {
                edit_index: Some(i),
                kind,
            });
        }
    }
    for i in 1..a.edits.len() {
        let prev = &a.edits[i - 1];
        let cur = &a.edits[i];
        if cur.location <= prev.location {
            out.push(Violation {
                edit_index: Some(i),
                kind: ViolationKind::Unsorted,
            });
        } else if cur.location < prev.location + prev.incorrect.chars().count() {
            out.push(Violation {
                edit_index: Some(i),
                kind: ViolationKind::Overlap,
            });
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Passages keyed by pid, preserving insertion order.
#[derive(Debug, Clone, Default)]
pub struct PassageSet {
    items: Vec<Passage>,
    index: HashMap<String, usize>,
}

impl PassageSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Passage) -> Result<(), ModelError> {
        if self.index.contains_key(&p.pid) {
            return Err(ModelError::DuplicatePid(p.pid));
        }
        self.index.insert(p.pid.clone(), self.items.len());
        self.items.push(p);
        Ok(())
    }

    pub fn get(&self, pid: &str) -> Option<&Passage> {
        self.index.get(pid).map(|&i| &self.items[i])
    }

    pub fn contains(&self, pid: &str) -> bool {
        self.index.contains_key(pid)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Passage> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Annotations keyed by pid, preserving insertion order.
#[derive(Debug, Clone, Default)]
pub struct AnswerSet {
    items: Vec<Annotation>,
    index: HashMap<String, usize>,
}

impl AnswerSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: Annotation) -> Result<(), ModelError> {
        if self.index.contains_key(&a.pid) {
            return Err(ModelError::DuplicatePid(a.pid));
        }
        self.index.insert(a.pid.clone(), self.items.len());
        self.items.push(a);
        Ok(())
    }

    pub fn get(&self, pid: &str) -> Option<&Annotation> {
        self.index.get(pid).map(|&i| &self.items[i])
    }

    pub fn contains(&self, pid: &str) -> bool {
        self.index.contains_key(pid)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Annotation> {
        self.items.iter()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn total_edits(&self) -> usize {
        self.items.iter().map(|a| a.edits.len()).sum()
    }
}
