//! Detection- and correction-level scoring of system answers against gold.
//!
//! Every edit is canonicalized before comparison, so location conventions
//! that differ only superficially (like pointing at either copy of a
//! doubled character) still match. Detection compares (location, incorrect)
//! of the canonical form; correction compares the full canonical triple.
//! The error type never influences matching. Matching is one-to-one per
//! level: both sides are sorted by canonical key and merged greedily in
//! ascending order, which pairs exactly the multiset intersection.

use std::collections::HashMap;

use thiserror::Error;

use crate::edits::{self, CanonicalEdit};
use crate::model::{
    self, Annotation, AnswerSet, Edit, Passage, PassageSet, ViolationKind,
};

/// Counts and derived metrics for one level. Ratios with an empty
/// denominator are 0 by convention, as is F1 when both components are 0.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelScore {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl LevelScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        LevelScore {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f1,
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// The final score weights detection over correction.
pub fn overall_f1(detection_f1: f64, correction_f1: f64) -> f64 {
    0.8 * detection_f1 + 0.2 * correction_f1
}

/// One system edit and what happened to it.
#[derive(Debug, Clone, PartialEq)]
pub struct EditOutcome {
    pub edit: Edit,
    /// Canonical form; `None` when the edit is invalid.
    pub canonical: Option<CanonicalEdit>,
    /// Validation failures. A non-empty list makes the edit a false
    /// positive at both levels, never a fatal error.
    pub invalid: Vec<ViolationKind>,
    /// Index of the gold edit matched at detection level.
    pub detection_match: Option<usize>,
    /// Index of the gold edit matched at correction level.
    pub correction_match: Option<usize>,
}

/// One gold edit and which system edits found it.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldOutcome {
    pub edit: Edit,
    pub canonical: CanonicalEdit,
    pub detection_match: Option<usize>,
    pub correction_match: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageMatch {
    pub pid: String,
    pub gold: Vec<GoldOutcome>,
    pub system: Vec<EditOutcome>,
    pub detection: LevelScore,
    pub correction: LevelScore,
    /// Whether applying all edits of both sides yields the same text, as a
    /// diagnostic. `None` when the system annotation does not apply cleanly
    /// as a whole.
    pub corrected_texts_equal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub detection: LevelScore,
    pub correction: LevelScore,
    pub overall_f1: f64,
    pub gold_edits: usize,
    pub system_edits: usize,
    pub passages: Vec<PassageMatch>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("pid mismatch: passage {passage:?}, gold {gold:?}, system {system:?}")]
    PidMismatch {
        passage: String,
        gold: String,
        system: String,
    },
    #[error("no passage for gold pid {0:?}")]
    MissingPassage(String),
    #[error("gold annotation {pid:?} is invalid: {detail}")]
    InvalidGold { pid: String, detail: String },
}

/// Check that every gold annotation has a passage and validates against it.
/// Gold files must be flawless; system files merely lose points.
pub fn validate_gold_against(
    gold: &AnswerSet,
    passages: &PassageSet,
) -> Result<(), ScoreError> {
    for a in gold.iter() {
        let p = passages
            .get(&a.pid)
            .ok_or_else(|| ScoreError::MissingPassage(a.pid.clone()))?;
        model::validate_annotation(a, p).map_err(|violations| ScoreError::InvalidGold {
            pid: a.pid.clone(),
            detail: violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        })?;
    }
    Ok(())
}

/// Merge two key-sorted sides greedily; equal keys pair up one-to-one.
fn greedy_match<K: Ord>(gold: &[(K, usize)], system: &[(K, usize)]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < gold.len() && j < system.len() {
        match gold[i].0.cmp(&system[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                pairs.push((gold[i].1, system[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    pairs
}

/// Match one system annotation against gold for a single passage.
pub fn match_passage(
    p: &Passage,
    gold: &Annotation,
    system: &Annotation,
) -> Result<PassageMatch, ScoreError> {
    if gold.pid != p.pid || system.pid != p.pid {
        return Err(ScoreError::PidMismatch {
            passage: p.pid.clone(),
            gold: gold.pid.clone(),
            system: system.pid.clone(),
        });
    }
    let invalid_gold = |detail: String| ScoreError::InvalidGold {
        pid: gold.pid.clone(),
        detail,
    };
    model::validate_annotation(gold, p).map_err(|violations| {
        invalid_gold(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })?;

    let text: Vec<char> = p.text.chars().collect();

    let mut gold_outcomes = Vec::with_capacity(gold.edits.len());
    for e in &gold.edits {
        let canonical = edits::canonicalize(p, e).map_err(|err| invalid_gold(err.to_string()))?;
        gold_outcomes.push(GoldOutcome {
            edit: e.clone(),
            canonical,
            detection_match: None,
            correction_match: None,
        });
    }

    let mut system_outcomes = Vec::with_capacity(system.edits.len());
    for e in &system.edits {
        let invalid = model::edit_violations(e, &text);
        let canonical = if invalid.is_empty() {
            // Per-edit validation passed, so solo application cannot fail.
            Some(edits::canonicalize(p, e).expect("validated edit applies"))
        } else {
            None
        };
        system_outcomes.push(EditOutcome {
            edit: e.clone(),
            canonical,
            invalid,
            detection_match: None,
            correction_match: None,
        });
    }

    let gold_detection = sorted_keys(&gold_outcomes, |o| detection_key(&o.canonical));
    let gold_correction = sorted_keys(&gold_outcomes, |o| correction_key(&o.canonical));
    let sys_detection = sorted_valid_keys(&system_outcomes, detection_key);
    let sys_correction = sorted_valid_keys(&system_outcomes, correction_key);

    for (g, s) in greedy_match(&gold_detection, &sys_detection) {
        gold_outcomes[g].detection_match = Some(s);
        system_outcomes[s].detection_match = Some(g);
    }
    for (g, s) in greedy_match(&gold_correction, &sys_correction) {
        gold_outcomes[g].correction_match = Some(s);
        system_outcomes[s].correction_match = Some(g);
    }

    let det_tp = system_outcomes
        .iter()
        .filter(|o| o.detection_match.is_some())
        .count();
    let corr_tp = system_outcomes
        .iter()
        .filter(|o| o.correction_match.is_some())
        .count();
    let n_sys = system.edits.len();
    let n_gold = gold.edits.len();

    let corrected_texts_equal = match edits::apply_edits(p, system) {
        Ok(sys_text) => {
            let gold_text =
                edits::apply_edits(p, gold).map_err(|err| invalid_gold(err.to_string()))?;
            Some(sys_text == gold_text)
        }
        Err(_) => None,
    };

    Ok(PassageMatch {
        pid: p.pid.clone(),
        gold: gold_outcomes,
        system: system_outcomes,
        detection: LevelScore::from_counts(det_tp, n_sys - det_tp, n_gold - det_tp),
        correction: LevelScore::from_counts(corr_tp, n_sys - corr_tp, n_gold - corr_tp),
        corrected_texts_equal,
    })
}

fn detection_key(c: &CanonicalEdit) -> (usize, String, String) {
    (c.location, c.incorrect.clone(), String::new())
}

fn correction_key(c: &CanonicalEdit) -> (usize, String, String) {
    (c.location, c.incorrect.clone(), c.correct.clone())
}

fn sorted_keys<K: Ord, T>(outcomes: &[T], key: impl Fn(&T) -> K) -> Vec<(K, usize)> {
    let mut keyed: Vec<(K, usize)> = outcomes.iter().map(&key).zip(0..).collect();
    keyed.sort();
    keyed
}

fn sorted_valid_keys(
    outcomes: &[EditOutcome],
    key: impl Fn(&CanonicalEdit) -> (usize, String, String),
) -> Vec<((usize, String, String), usize)> {
    let mut keyed: Vec<_> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.canonical.as_ref().map(|c| (key(c), i)))
        .collect();
    keyed.sort();
    keyed
}

/// Score a full system answer set against gold. Gold pids absent from the
/// system count as claiming no errors; system pids absent from gold
/// contribute false positives and a note.
pub fn score(
    gold: &AnswerSet,
    system: &AnswerSet,
    passages: &PassageSet,
) -> Result<MatchReport, ScoreError> {
    validate_gold_against(gold, passages)?;

    let mut matches = Vec::with_capacity(gold.len());
    let mut notes = Vec::new();
    let (mut det_tp, mut det_fp, mut det_fn) = (0, 0, 0);
    let (mut corr_tp, mut corr_fp, mut corr_fn) = (0, 0, 0);
    let mut gold_edits = 0;
    let mut system_edits = 0;

    for g in gold.iter() {
        let p = passages.get(&g.pid).expect("gold validated");
        let empty;
        let sys = match system.get(&g.pid) {
            Some(a) => a,
            None => {
                empty = Annotation::empty(g.pid.clone());
                &empty
            }
        };
        let m = match_passage(p, g, sys)?;
        det_tp += m.detection.true_positives;
        det_fp += m.detection.false_positives;
        det_fn += m.detection.false_negatives;
        corr_tp += m.correction.true_positives;
        corr_fp += m.correction.false_positives;
        corr_fn += m.correction.false_negatives;
        gold_edits += g.edits.len();
        system_edits += sys.edits.len();
        matches.push(m);
    }

    for s in system.iter() {
        if !gold.contains(&s.pid) {
            det_fp += s.edits.len();
            corr_fp += s.edits.len();
            system_edits += s.edits.len();
            notes.push(format!(
                "system pid {:?} not in gold: {} edit(s) counted as false positives",
                s.pid,
                s.edits.len()
            ));
        }
    }

    let detection = LevelScore::from_counts(det_tp, det_fp, det_fn);
    let correction = LevelScore::from_counts(corr_tp, corr_fp, corr_fn);
    Ok(MatchReport {
        detection,
        correction,
        overall_f1: overall_f1(detection.f1, correction.f1),
        gold_edits,
        system_edits,
        passages: matches,
        notes,
    })
}

/// Fixed-point display with ties rounded up, so 0.46666... at four places
/// is 0.4667 and exact halves go away from zero.
pub fn format_fixed(value: f64, places: usize) -> String {
    let scale = 10u64.pow(places as u32);
    let scaled = (value * scale as f64 + 0.5 + 1e-9).floor().max(0.0) as u64;
    format!("{}.{:0width$}", scaled / scale, scaled % scale, width = places)
}

pub fn render_summary(report: &MatchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("gold edits: {}\n", report.gold_edits));
    out.push_str(&format!("system edits: {}\n", report.system_edits));
    for (name, level) in [
        ("detection", &report.detection),
        ("correction", &report.correction),
    ] {
        out.push_str(&format!(
            "{}: precision={} recall={} f1={} (tp={} fp={} fn={})\n",
            name,
            format_fixed(level.precision, 4),
            format_fixed(level.recall, 4),
            format_fixed(level.f1, 4),
            level.true_positives,
            level.false_positives,
            level.false_negatives,
        ));
    }
    out.push_str(&format!("overall f1: {}\n", format_fixed(report.overall_f1, 4)));
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

fn render_canonical(c: &CanonicalEdit) -> String {
    format!("({}, {:?} -> {:?})", c.location, c.incorrect, c.correct)
}

pub fn render_verbose(report: &MatchReport) -> String {
    let mut out = render_summary(report);
    for m in &report.passages {
        out.push_str(&format!(
            "\nPID={} gold={} system={} det_tp={} corr_tp={}{}\n",
            m.pid,
            m.gold.len(),
            m.system.len(),
            m.detection.true_positives,
            m.correction.true_positives,
            match m.corrected_texts_equal {
                Some(true) => " corrected_texts=equal",
                Some(false) => " corrected_texts=different",
                None => "",
            }
        ));
        for (i, o) in m.system.iter().enumerate() {
            if let Some(c) = &o.canonical {
                out.push_str(&format!(
                    "  sys[{i}] {} detection={} correction={}\n",
                    render_canonical(c),
                    match o.detection_match {
                        Some(g) => format!("gold[{g}]"),
                        None => "unmatched".to_string(),
                    },
                    match o.correction_match {
                        Some(g) => format!("gold[{g}]"),
                        None => "unmatched".to_string(),
                    },
                ));
            } else {
                let reasons = o
                    .invalid
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; ");
                out.push_str(&format!("  sys[{i}] invalid: {reasons}\n"));
            }
        }
        for (i, o) in m.gold.iter().enumerate() {
            if o.detection_match.is_none() {
                out.push_str(&format!("  gold[{i}] {} undetected\n", render_canonical(&o.canonical)));
            }
        }
    }
    out
}

pub const MACHINE_FORMAT_HEADER: &str = "format=ctc2021-report-v1";

/// Machine-readable aggregate, one `key=value` per line. Floats print with
/// full precision and parse back bit-identically.
pub fn to_machine_format(report: &MatchReport) -> String {
    let mut out = String::new();
    out.push_str(MACHINE_FORMAT_HEADER);
    out.push('\n');
    out.push_str(&format!("gold_edits={}\n", report.gold_edits));
    out.push_str(&format!("system_edits={}\n", report.system_edits));
    for (name, level) in [
        ("detection", &report.detection),
        ("correction", &report.correction),
    ] {
        out.push_str(&format!("{}_tp={}\n", name, level.true_positives));
        out.push_str(&format!("{}_fp={}\n", name, level.false_positives));
        out.push_str(&format!("{}_fn={}\n", name, level.false_negatives));
        out.push_str(&format!("{}_precision={}\n", name, level.precision));
        out.push_str(&format!("{}_recall={}\n", name, level.recall));
        out.push_str(&format!("{}_f1={}\n", name, level.f1));
    }
    out.push_str(&format!("overall_f1={}\n", report.overall_f1));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportParseError {
    #[error("missing header line {MACHINE_FORMAT_HEADER:?}")]
    BadHeader,
    #[error("missing key {0:?}")]
    MissingKey(String),
    #[error("bad value for {key:?}: {value:?}")]
    BadValue { key: String, value: String },
    #[error("malformed line {0:?}")]
    BadLine(String),
}

/// Parse the aggregate back. Per-passage detail is not representable in
/// the machine format, so `passages` and `notes` come back empty.
pub fn parse_machine_format(input: &str) -> Result<MatchReport, ReportParseError> {
    let mut lines = input.lines().filter(|l| !l.trim().is_empty());
    if lines.next() != Some(MACHINE_FORMAT_HEADER) {
        return Err(ReportParseError::BadHeader);
    }
    let mut map = HashMap::new();
    for line in lines {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ReportParseError::BadLine(line.to_string()))?;
        map.insert(k.to_string(), v.to_string());
    }
    let count = |key: &str| -> Result<usize, ReportParseError> {
        let v = map
            .get(key)
            .ok_or_else(|| ReportParseError::MissingKey(key.to_string()))?;
        v.parse().map_err(|_| ReportParseError::BadValue {
            key: key.to_string(),
            value: v.clone(),
        })
    };
    let float = |key: &str| -> Result<f64, ReportParseError> {
        let v = map
            .get(key)
            .ok_or_else(|| ReportParseError::MissingKey(key.to_string()))?;
        v.parse().map_err(|_| ReportParseError::BadValue {
            key: key.to_string(),
            value: v.clone(),
        })
    };
    let level = |name: &str| -> Result<LevelScore, ReportParseError> {
        Ok(LevelScore {
            true_positives: count(&format!("{name}_tp"))?,
            false_positives: count(&format!("{name}_fp"))?,
            false_negatives: count(&format!("{name}_fn"))?,
            precision: float(&format!("{name}_precision"))?,
            recall: float(&format!("{name}_recall"))?,
            f1: float(&format!("{name}_f1"))?,
        })
    };
    Ok(MatchReport {
        detection: level("detection")?,
        correction: level("correction")?,
        overall_f1: float("overall_f1")?,
        gold_edits: count("gold_edits")?,
        system_edits: count("system_edits")?,
        passages: Vec::new(),
        notes: Vec::new(),
    })
}
