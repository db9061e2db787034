//! Toolkit for the CTC 2021 Chinese text correction protocol: parsing and
//! emitting the edit-annotation answer format, applying and canonicalizing
//! edits, scoring system outputs at detection and correction level,
//! synthesizing pseudo training data by controlled corruption, and
//! aggregating multi-run leaderboards.
//!
//! All locations are 0-based indices over Unicode scalar characters: every
//! character or punctuation mark, CJK or Latin, occupies exactly one spot.

pub mod corruptor;
pub mod edits;
pub mod format;
pub mod model;
pub mod report;
pub mod scoring;

pub use edits::CanonicalEdit;
pub use model::{Annotation, AnswerSet, CoarseErrorType, Edit, FineErrorType, Passage, PassageSet};
pub use scoring::MatchReport;

#[cfg(test)]
pub(crate) mod testdata;
