//! Pseudo training data: corrupt clean passages with controlled errors.
//!
//! Each passage gets its own RNG stream derived from the corpus seed and
//! pid, so output is independent of corpus order and batching. Every
//! operation records the gold edit that undoes it, and a record is only
//! returned after a round-trip check: applying the gold annotation to the
//! corrupted text must restore the original exactly.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::edits;
use crate::model::{validate_annotation, Annotation, Edit, FineErrorType, Passage};

const MAX_PLAN_ATTEMPTS: usize = 16;
const MAX_POSITION_REDRAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperationKind {
    ReplacePinyin,
    ReplaceShape,
    ReplaceRandom,
    Delete,
    Insert,
    Swap,
}

impl OperationKind {
    pub const ALL: [OperationKind; 6] = [
        OperationKind::ReplacePinyin,
        OperationKind::ReplaceShape,
        OperationKind::ReplaceRandom,
        OperationKind::Delete,
        OperationKind::Insert,
        OperationKind::Swap,
    ];

    pub fn label(self) -> &'static str {
        match self {
            OperationKind::ReplacePinyin => "replace_pinyin",
            OperationKind::ReplaceShape => "replace_shape",
            OperationKind::ReplaceRandom => "replace_random",
            OperationKind::Delete => "delete",
            OperationKind::Insert => "insert",
            OperationKind::Swap => "swap",
        }
    }
}

/// Relative draw weights for the six operations. Zero disables an
/// operation; they need not sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperationWeights {
    pub replace_pinyin: f64,
    pub replace_shape: f64,
    pub replace_random: f64,
    pub delete: f64,
    pub insert: f64,
    pub swap: f64,
}

impl Default for OperationWeights {
    fn default() -> Self {
        OperationWeights {
            replace_pinyin: 1.0,
            replace_shape: 1.0,
            replace_random: 1.0,
            delete: 1.0,
            insert: 1.0,
            swap: 1.0,
        }
    }
}

impl OperationWeights {
    pub fn get(&self, kind: OperationKind) -> f64 {
        match kind {
            OperationKind::ReplacePinyin => self.replace_pinyin,
            OperationKind::ReplaceShape => self.replace_shape,
            OperationKind::ReplaceRandom => self.replace_random,
            OperationKind::Delete => self.delete,
            OperationKind::Insert => self.insert,
            OperationKind::Swap => self.swap,
        }
    }

    fn total(&self) -> f64 {
        OperationKind::ALL.iter().map(|&k| self.get(k)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorruptionConfig {
    pub seed: u64,
    /// Probability of planting two errors instead of one.
    pub p_two_errors: f64,
    /// Probability of emitting the passage unchanged with an empty gold
    /// annotation, so trained models also see clean text.
    pub p_passthrough: f64,
    /// Passages shorter than this many characters are skipped.
    pub min_text_length: usize,
    /// Segment into greedy longest lexicon matches instead of single
    /// characters.
    pub word_mode: bool,
    pub weights: OperationWeights,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            seed: 0,
            p_two_errors: 0.5,
            p_passthrough: 0.0,
            min_text_length: 2,
            word_mode: false,
            weights: OperationWeights::default(),
        }
    }
}

impl CorruptionConfig {
    fn check(&self) -> Result<(), CorruptError> {
        let prob = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) {
                return Err(CorruptError::InvalidConfig(format!(
                    "{name} must be within [0, 1], got {v}"
                )));
            }
            Ok(())
        };
        prob("p_two_errors", self.p_two_errors)?;
        prob("p_passthrough", self.p_passthrough)?;
        for kind in OperationKind::ALL {
            let w = self.weights.get(kind);
            if !w.is_finite() || w < 0.0 {
                return Err(CorruptError::InvalidConfig(format!(
                    "weight for {} must be finite and non-negative, got {w}",
                    kind.label()
                )));
            }
        }
        if self.weights.total() <= 0.0 {
            return Err(CorruptError::InvalidConfig(
                "operation weights sum to zero".to_string(),
            ));
        }
        Ok(())
    }
}

/// Confusion tables and word lists backing the operations.
#[derive(Debug, Clone, Default)]
pub struct ConfusionResources {
    pub pinyin: HashMap<String, Vec<String>>,
    pub shape: HashMap<String, Vec<String>>,
    pub vocabulary: Vec<String>,
    pub lexicon: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourcePaths {
    pub pinyin: PathBuf,
    pub shape: PathBuf,
    pub vocabulary: PathBuf,
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug)]
pub struct LoadedResources {
    pub resources: ConfusionResources,
    pub warnings: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ResourceError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Malformed {
        path: String,
        line: usize,
        detail: String,
    },
    #[error("{path}: vocabulary is empty")]
    EmptyVocabulary { path: String },
}

fn usable_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == ',')
}

/// Load a confusion table: one `key<TAB>candidate candidate ...` per line.
fn load_confusion_table(
    path: &Path,
    warnings: &mut Vec<String>,
) -> Result<HashMap<String, Vec<String>>, ResourceError> {
    let name = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: name.clone(),
        source,
    })?;
    let malformed = |line: usize, detail: String| ResourceError::Malformed {
        path: name.clone(),
        line,
        detail,
    };
    let mut table = HashMap::new();
    for (i, raw) in content.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let (key, rest) = raw
            .split_once('\t')
            .ok_or_else(|| malformed(line, "missing tab separator".to_string()))?;
        if !usable_token(key) {
            return Err(malformed(line, format!("unusable key {key:?}")));
        }
        let candidates: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
        if candidates.is_empty() {
            return Err(malformed(line, format!("no candidates for {key:?}")));
        }
        for c in &candidates {
            if !usable_token(c) {
                return Err(malformed(line, format!("unusable candidate {c:?}")));
            }
            if c == key {
                return Err(malformed(
                    line,
                    format!("{key:?} lists itself as a candidate"),
                ));
            }
        }
        if table.insert(key.to_string(), candidates).is_some() {
            warnings.push(format!("{name} line {line}: duplicate key {key:?}, last wins"));
        }
    }
    Ok(table)
}

fn load_word_list(path: &Path) -> Result<Vec<String>, ResourceError> {
    let name = path.display().to_string();
    let content = fs::read_to_string(path).map_err(|source| ResourceError::Io {
        path: name.clone(),
        source,
    })?;
    let mut words = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let raw = raw.trim_end_matches('\r').trim();
        if raw.is_empty() {
            continue;
        }
        if !usable_token(raw) {
            return Err(ResourceError::Malformed {
                path: name.clone(),
                line: i + 1,
                detail: format!("unusable entry {raw:?}"),
            });
        }
        words.push(raw.to_string());
    }
    Ok(words)
}

pub fn load_resources(paths: &ResourcePaths) -> Result<LoadedResources, ResourceError> {
    let mut warnings = Vec::new();
    let pinyin = load_confusion_table(&paths.pinyin, &mut warnings)?;
    let shape = load_confusion_table(&paths.shape, &mut warnings)?;
    let vocabulary = load_word_list(&paths.vocabulary)?;
    if vocabulary.is_empty() {
        return Err(ResourceError::EmptyVocabulary {
            path: paths.vocabulary.display().to_string(),
        });
    }
    let lexicon = match &paths.lexicon {
        Some(p) => load_word_list(p)?,
        None => Vec::new(),
    };
    Ok(LoadedResources {
        resources: ConfusionResources {
            pinyin,
            shape,
            vocabulary,
            lexicon,
        },
        warnings,
    })
}

/// One applied operation. `position` is a character index into the
/// original text; `gold.location` points into the corrupted text.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionOp {
    pub kind: OperationKind,
    pub position: usize,
    /// What the corrupted text holds at the site; empty for a deletion.
    pub payload: String,
    /// A confusion replacement that found no table entry and became a
    /// random replacement.
    pub fell_back: bool,
    pub gold: Edit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionRecord {
    pub original: Passage,
    pub corrupted: Passage,
    pub gold: Annotation,
    pub ops: Vec<CorruptionOp>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorruptError {
    #[error("invalid corruption config: {0}")]
    InvalidConfig(String),
    #[error("passage {pid:?} is too short to corrupt ({len} < {min} characters)")]
    TextTooShort { pid: String, len: usize, min: usize },
    #[error("no valid corruption found for passage {pid:?} after {attempts} attempts")]
    NoValidCorruption { pid: String, attempts: usize },
}

/// The per-passage RNG stream: independent of corpus order, stable across
/// runs with the same seed.
pub fn passage_rng(seed: u64, pid: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(pid.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

#[derive(Debug, Clone, PartialEq)]
struct Unit {
    start: usize,
    text: String,
}

impl Unit {
    fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

fn segment(text: &str, word_mode: bool, lexicon: &[String]) -> Vec<Unit> {
    let chars: Vec<char> = text.chars().collect();
    if !word_mode || lexicon.is_empty() {
        return chars
            .iter()
            .enumerate()
            .map(|(i, c)| Unit {
                start: i,
                text: c.to_string(),
            })
            .collect();
    }
    let words: HashSet<&str> = lexicon.iter().map(String::as_str).collect();
    let max_len = lexicon
        .iter()
        .map(|w| w.chars().count())
        .max()
        .unwrap_or(1);
    let mut units = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let mut len = 1;
        let upper = max_len.min(chars.len() - i);
        for l in (2..=upper).rev() {
            let cand: String = chars[i..i + l].iter().collect();
            if words.contains(cand.as_str()) {
                len = l;
                break;
            }
        }
        units.push(Unit {
            start: i,
            text: chars[i..i + len].iter().collect(),
        });
        i += len;
    }
    units
}

#[derive(Debug, Clone)]
struct PlannedOp {
    kind: OperationKind,
    /// Covered unit range; empty for an insertion before `range.0`.
    range: (usize, usize),
    payload: String,
    fell_back: bool,
}

fn ranges_conflict(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 < b.1 && b.0 < a.1) || (a == b && a.0 == a.1)
}

fn draw_kind(rng: &mut impl Rng, weights: &OperationWeights) -> OperationKind {
    let total = weights.total();
    let x = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for kind in OperationKind::ALL {
        acc += weights.get(kind);
        if x < acc {
            return kind;
        }
    }
    OperationKind::Swap
}

fn draw_distinct(rng: &mut impl Rng, n_units: usize, n: usize) -> Option<Vec<usize>> {
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..64 {
        if chosen.len() == n {
            break;
        }
        let u = rng.gen_range(0..n_units);
        if !chosen.contains(&u) {
            chosen.push(u);
        }
    }
    if chosen.len() < n {
        return None;
    }
    chosen.sort_unstable();
    Some(chosen)
}

/// Corrupt one passage. Draws an op plan, resolves payloads, and retries
/// the whole plan when the result does not survive validation and the
/// round-trip check.
pub fn corrupt(
    p: &Passage,
    cfg: &CorruptionConfig,
    res: &ConfusionResources,
    rng: &mut impl Rng,
) -> Result<CorruptionRecord, CorruptError> {
    cfg.check()?;
    let len = p.char_len();
    if len < cfg.min_text_length {
        return Err(CorruptError::TextTooShort {
            pid: p.pid.clone(),
            len,
            min: cfg.min_text_length,
        });
    }
    if rng.gen_bool(cfg.p_passthrough) {
        return Ok(CorruptionRecord {
            original: p.clone(),
            corrupted: p.clone(),
            gold: Annotation::empty(p.pid.clone()),
            ops: Vec::new(),
        });
    }
    let units = segment(&p.text, cfg.word_mode, &res.lexicon);
    for _ in 0..MAX_PLAN_ATTEMPTS {
        let n = if rng.gen_bool(cfg.p_two_errors) { 2 } else { 1 };
        let n = n.min(units.len());
        if let Some(record) = attempt_plan(p, cfg, res, rng, &units, n) {
            return Ok(record);
        }
    }
    Err(CorruptError::NoValidCorruption {
        pid: p.pid.clone(),
        attempts: MAX_PLAN_ATTEMPTS,
    })
}

fn attempt_plan(
    p: &Passage,
    cfg: &CorruptionConfig,
    res: &ConfusionResources,
    rng: &mut impl Rng,
    units: &[Unit],
    n: usize,
) -> Option<CorruptionRecord> {
    let n_units = units.len();
    let chosen = draw_distinct(rng, n_units, n)?;
    let mut occupied: HashSet<usize> = chosen.iter().copied().collect();
    let mut plans: Vec<PlannedOp> = Vec::with_capacity(n);

    for &u0 in &chosen {
        let kind = draw_kind(rng, &cfg.weights);
        let plan = match kind {
            OperationKind::ReplacePinyin | OperationKind::ReplaceShape => {
                let table = if kind == OperationKind::ReplacePinyin {
                    &res.pinyin
                } else {
                    &res.shape
                };
                let mut u = u0;
                let mut found = table.contains_key(&units[u].text);
                for _ in 0..MAX_POSITION_REDRAWS {
                    if found {
                        break;
                    }
                    let cand = rng.gen_range(0..n_units);
                    if !occupied.contains(&cand) && table.contains_key(&units[cand].text) {
                        occupied.remove(&u0);
                        occupied.insert(cand);
                        u = cand;
                        found = true;
                    }
                }
                if found {
                    let candidates = &table[&units[u].text];
                    let payload = candidates[rng.gen_range(0..candidates.len())].clone();
                    PlannedOp {
                        kind,
                        range: (u, u + 1),
                        payload,
                        fell_back: false,
                    }
                } else {
                    random_replacement(rng, res, units, u0, true)?
                }
            }
            OperationKind::ReplaceRandom => random_replacement(rng, res, units, u0, false)?,
            OperationKind::Delete => PlannedOp {
                kind,
                range: (u0, u0 + 1),
                payload: String::new(),
                fell_back: false,
            },
            OperationKind::Insert => {
                let payload = res.vocabulary[rng.gen_range(0..res.vocabulary.len())].clone();
                PlannedOp {
                    kind,
                    range: (u0, u0),
                    payload,
                    fell_back: false,
                }
            }
            OperationKind::Swap => {
                if n_units < 2 {
                    return None;
                }
                let (a, b) = if u0 + 1 < n_units { (u0, u0 + 1) } else { (u0 - 1, u0) };
                let partner = if a == u0 { b } else { a };
                if occupied.contains(&partner) {
                    return None;
                }
                occupied.insert(partner);
                let forward = format!("{}{}", units[a].text, units[b].text);
                let reversed = format!("{}{}", units[b].text, units[a].text);
                if forward == reversed {
                    return None;
                }
                PlannedOp {
                    kind,
                    range: (a, b + 1),
                    payload: reversed,
                    fell_back: false,
                }
            }
        };
        plans.push(plan);
    }

    for i in 0..plans.len() {
        for j in 0..i {
            if ranges_conflict(plans[i].range, plans[j].range) {
                return None;
            }
        }
    }
    plans.sort_by_key(|op| (op.range.0, op.range.1));

    build_record(p, units, &plans)
}

fn random_replacement(
    rng: &mut impl Rng,
    res: &ConfusionResources,
    units: &[Unit],
    u: usize,
    fell_back: bool,
) -> Option<PlannedOp> {
    for _ in 0..=MAX_POSITION_REDRAWS {
        let payload = &res.vocabulary[rng.gen_range(0..res.vocabulary.len())];
        if payload != &units[u].text {
            return Some(PlannedOp {
                kind: OperationKind::ReplaceRandom,
                range: (u, u + 1),
                payload: payload.clone(),
                fell_back,
            });
        }
    }
    None
}

fn replacement_error_type(unit: &Unit, payload: &str) -> FineErrorType {
    if unit.char_len() == 1 && payload.chars().count() == 1 {
        FineErrorType::Character
    } else {
        FineErrorType::Word
    }
}

fn build_record(p: &Passage, units: &[Unit], plans: &[PlannedOp]) -> Option<CorruptionRecord> {
    let mut out = String::new();
    let mut emitted = 0usize;
    let mut next_unit = 0usize;
    let mut gold_edits = Vec::with_capacity(plans.len());
    let mut ops = Vec::with_capacity(plans.len());
    let emit = |out: &mut String, emitted: &mut usize, s: &str| {
        out.push_str(s);
        *emitted += s.chars().count();
    };

    for plan in plans {
        while next_unit < plan.range.0 {
            emit(&mut out, &mut emitted, &units[next_unit].text);
            next_unit += 1;
        }
        let q = emitted;
        let position = units[plan.range.0].start;
        let gold = match plan.kind {
            OperationKind::ReplacePinyin
            | OperationKind::ReplaceShape
            | OperationKind::ReplaceRandom => {
                let unit = &units[plan.range.0];
                emit(&mut out, &mut emitted, &plan.payload);
                next_unit = plan.range.1;
                Edit::new(
                    q,
                    replacement_error_type(unit, &plan.payload),
                    plan.payload.clone(),
                    unit.text.clone(),
                )
            }
            OperationKind::Delete => {
                let unit = &units[plan.range.0];
                next_unit = plan.range.1;
                Edit::new(q, FineErrorType::Missing, "", unit.text.clone())
            }
            OperationKind::Insert => {
                emit(&mut out, &mut emitted, &plan.payload);
                Edit::new(q, FineErrorType::Redundant, plan.payload.clone(), "")
            }
            OperationKind::Swap => {
                let forward = format!(
                    "{}{}",
                    units[plan.range.0].text,
                    units[plan.range.0 + 1].text
                );
                emit(&mut out, &mut emitted, &plan.payload);
                next_unit = plan.range.1;
                Edit::new(q, FineErrorType::Disordered, plan.payload.clone(), forward)
            }
        };
        ops.push(CorruptionOp {
            kind: plan.kind,
            position,
            payload: plan.payload.clone(),
            fell_back: plan.fell_back,
            gold: gold.clone(),
        });
        gold_edits.push(gold);
    }
    while next_unit < units.len() {
        emit(&mut out, &mut emitted, &units[next_unit].text);
        next_unit += 1;
    }

    if out.is_empty() {
        return None;
    }
    let corrupted = Passage::new(p.pid.clone(), out).ok()?;
    let gold = Annotation::new(p.pid.clone(), gold_edits);
    if validate_annotation(&gold, &corrupted).is_err() {
        return None;
    }
    match edits::apply_edits(&corrupted, &gold) {
        Ok(restored) if restored == p.text => Some(CorruptionRecord {
            original: p.clone(),
            corrupted,
            gold,
            ops,
        }),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusSummary {
    pub attempted: usize,
    pub produced: usize,
    pub skipped_too_short: usize,
    pub passthrough: usize,
    pub two_error_records: usize,
    pub replacement_fallbacks: usize,
    pub operations: BTreeMap<OperationKind, usize>,
    pub error_types: BTreeMap<FineErrorType, usize>,
    pub failures: Vec<(String, String)>,
}

/// Corrupt a whole corpus. Too-short passages are skipped and tallied;
/// passages with no valid corruption end up under `failures`.
pub fn corrupt_corpus<'a>(
    passages: impl IntoIterator<Item = &'a Passage>,
    cfg: &CorruptionConfig,
    res: &ConfusionResources,
) -> Result<(Vec<CorruptionRecord>, CorpusSummary), CorruptError> {
    cfg.check()?;
    let mut records = Vec::new();
    let mut summary = CorpusSummary::default();
    for p in passages {
        summary.attempted += 1;
        let mut rng = passage_rng(cfg.seed, &p.pid);
        match corrupt(p, cfg, res, &mut rng) {
            Ok(record) => {
                summary.produced += 1;
                if record.ops.is_empty() {
                    summary.passthrough += 1;
                }
                if record.ops.len() == 2 {
                    summary.two_error_records += 1;
                }
                for op in &record.ops {
                    *summary.operations.entry(op.kind).or_default() += 1;
                    *summary.error_types.entry(op.gold.error_type).or_default() += 1;
                    if op.fell_back {
                        summary.replacement_fallbacks += 1;
                    }
                }
                records.push(record);
            }
            Err(CorruptError::TextTooShort { .. }) => {
                summary.skipped_too_short += 1;
            }
            Err(e) => {
                summary.failures.push((p.pid.clone(), e.to_string()));
            }
        }
    }
    Ok((records, summary))
}

pub fn render_corpus_summary(s: &CorpusSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("passages: {}\n", s.attempted));
    out.push_str(&format!("corrupted: {}\n", s.produced));
    out.push_str(&format!("passthrough: {}\n", s.passthrough));
    out.push_str(&format!("skipped too short: {}\n", s.skipped_too_short));
    out.push_str(&format!("two-error records: {}\n", s.two_error_records));
    out.push_str(&format!(
        "replacement fallbacks: {}\n",
        s.replacement_fallbacks
    ));
    if !s.operations.is_empty() {
        out.push_str("operations:\n");
        for (kind, count) in &s.operations {
            out.push_str(&format!("  {}: {}\n", kind.label(), count));
        }
    }
    if !s.error_types.is_empty() {
        out.push_str("gold error types:\n");
        for (ty, count) in &s.error_types {
            out.push_str(&format!("  {}: {}\n", ty.label(), count));
        }
    }
    for (pid, reason) in &s.failures {
        out.push_str(&format!("failed: {pid}: {reason}\n"));
    }
    out
}
