//! Dataset statistics and multi-run leaderboards.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{AnswerSet, CoarseErrorType, PassageSet};
use crate::scoring::{self, format_fixed, LevelScore, ScoreError};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub n_texts: usize,
    pub n_texts_with_errors: usize,
    /// Mean passage length in characters.
    pub avg_len: f64,
    pub total_edits: usize,
    pub edits_by_coarse: BTreeMap<CoarseErrorType, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Gold(#[from] ScoreError),
    #[error("team {team:?} lists {count} runs, more than the allowed {max}")]
    TooManyRuns {
        team: String,
        count: usize,
        max: usize,
    },
    #[error("manifest line {line}: {detail}")]
    BadManifest { line: usize, detail: String },
    #[error("duplicate run {run_id:?} for team {team:?}")]
    DuplicateRun { team: String, run_id: String },
}

/// Corpus-level numbers: how many passages, how many actually erroneous,
/// mean length, and the coarse error-type distribution of the gold edits.
pub fn compute_stats(
    passages: &PassageSet,
    gold: &AnswerSet,
) -> Result<DatasetStats, ReportError> {
    scoring::validate_gold_against(gold, passages)?;
    let n_texts = passages.len();
    let total_chars: usize = passages.iter().map(|p| p.char_len()).sum();
    let avg_len = if n_texts == 0 {
        0.0
    } else {
        total_chars as f64 / n_texts as f64
    };
    let mut edits_by_coarse = BTreeMap::new();
    let mut total_edits = 0;
    let mut n_texts_with_errors = 0;
    for a in gold.iter() {
        if !a.edits.is_empty() {
            n_texts_with_errors += 1;
        }
        for e in &a.edits {
            total_edits += 1;
            *edits_by_coarse.entry(e.error_type.coarse()).or_default() += 1;
        }
    }
    Ok(DatasetStats {
        n_texts,
        n_texts_with_errors,
        avg_len,
        total_edits,
        edits_by_coarse,
    })
}

pub fn render_stats(stats: &DatasetStats) -> String {
    let mut out = String::new();
    out.push_str(&format!("texts: {}\n", stats.n_texts));
    out.push_str(&format!("texts with errors: {}\n", stats.n_texts_with_errors));
    out.push_str(&format!("average length: {}\n", format_fixed(stats.avg_len, 2)));
    out.push_str(&format!("edits: {}\n", stats.total_edits));
    for coarse in CoarseErrorType::ALL {
        out.push_str(&format!(
            "  {}: {}\n",
            coarse.label(),
            stats.edits_by_coarse.get(&coarse).copied().unwrap_or(0)
        ));
    }
    out
}

/// One manifest entry: `team<TAB>run_id<TAB>path`, paths relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSpec {
    pub team: String,
    pub run_id: String,
    pub path: PathBuf,
}

/// Parse a run manifest. Blank lines are skipped; duplicate
/// (team, run_id) pairs are rejected.
pub fn parse_manifest<R: BufRead>(reader: R) -> Result<Vec<RunSpec>, ReportError> {
    let mut specs: Vec<RunSpec> = Vec::new();
    let mut line_no = 0;
    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| ReportError::BadManifest {
            line: line_no,
            detail: e.to_string(),
        })?;
        let mut line = line.trim_end_matches('\r');
        if line_no == 1 {
            line = line.trim_start_matches('\u{feff}');
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(ReportError::BadManifest {
                line: line_no,
                detail: format!("expected team<TAB>run_id<TAB>path, found {} field(s)", fields.len()),
            });
        }
        let (team, run_id, path) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
        if team.is_empty() || run_id.is_empty() || path.is_empty() {
            return Err(ReportError::BadManifest {
                line: line_no,
                detail: "empty field".to_string(),
            });
        }
        if specs.iter().any(|s| s.team == team && s.run_id == run_id) {
            return Err(ReportError::DuplicateRun {
                team: team.to_string(),
                run_id: run_id.to_string(),
            });
        }
        specs.push(RunSpec {
            team: team.to_string(),
            run_id: run_id.to_string(),
            path: PathBuf::from(path),
        });
    }
    Ok(specs)
}

/// Resolve a manifest path against the manifest file's directory.
pub fn resolve_run_path(manifest_path: &Path, run_path: &Path) -> PathBuf {
    if run_path.is_absolute() {
        return run_path.to_path_buf();
    }
    match manifest_path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => dir.join(run_path),
        _ => run_path.to_path_buf(),
    }
}

/// One run, loaded or failed. Load failures (unreadable file, parse error)
/// are carried as strings so scoring can report them without aborting.
#[derive(Debug, Clone)]
pub struct RunInput {
    pub team: String,
    pub run_id: String,
    pub answers: Result<AnswerSet, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeaderboardEntry {
    pub team: String,
    /// Runs that actually scored.
    pub n_runs: usize,
    pub best_run_id: String,
    pub detection: LevelScore,
    pub correction: LevelScore,
    pub overall_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedRun {
    pub team: String,
    pub run_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaderboard {
    pub entries: Vec<LeaderboardEntry>,
    pub failed: Vec<FailedRun>,
}

/// Score every run and keep each team's best by overall F1, breaking ties
/// by detection F1 and then run id. Teams submitting more than `max_runs`
/// are rejected outright; unscorable runs are reported but only sink a
/// team when none of its runs survive.
pub fn build_leaderboard(
    runs: Vec<RunInput>,
    gold: &AnswerSet,
    passages: &PassageSet,
    max_runs: usize,
) -> Result<Leaderboard, ReportError> {
    scoring::validate_gold_against(gold, passages)?;

    let mut by_team: BTreeMap<String, Vec<RunInput>> = BTreeMap::new();
    for run in runs {
        by_team.entry(run.team.clone()).or_default().push(run);
    }
    for (team, team_runs) in &by_team {
        if team_runs.len() > max_runs {
            return Err(ReportError::TooManyRuns {
                team: team.clone(),
                count: team_runs.len(),
                max: max_runs,
            });
        }
    }

    let mut entries = Vec::new();
    let mut failed = Vec::new();
    for (team, team_runs) in by_team {
        let mut best: Option<(f64, f64, String, LevelScore, LevelScore)> = None;
        let mut n_scored = 0;
        for run in team_runs {
            let answers = match run.answers {
                Ok(a) => a,
                Err(reason) => {
                    failed.push(FailedRun {
                        team: team.clone(),
                        run_id: run.run_id,
                        reason,
                    });
                    continue;
                }
            };
            let report = match scoring::score(gold, &answers, passages) {
                Ok(r) => r,
                Err(e) => {
                    failed.push(FailedRun {
                        team: team.clone(),
                        run_id: run.run_id,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            n_scored += 1;
            let candidate = (
                report.overall_f1,
                report.detection.f1,
                run.run_id,
                report.detection,
                report.correction,
            );
            best = Some(match best.take() {
                None => candidate,
                Some(cur) => {
                    if candidate.0 > cur.0
                        || (candidate.0 == cur.0 && candidate.1 > cur.1)
                        || (candidate.0 == cur.0
                            && candidate.1 == cur.1
                            && candidate.2 < cur.2)
                    {
                        candidate
                    } else {
                        cur
                    }
                }
            });
        }
        if let Some((overall, _, run_id, detection, correction)) = best {
            entries.push(LeaderboardEntry {
                team,
                n_runs: n_scored,
                best_run_id: run_id,
                detection,
                correction,
                overall_f1: overall,
            });
        }
    }

    entries.sort_by(|a, b| {
        b.overall_f1
            .partial_cmp(&a.overall_f1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                b.detection
                    .f1
                    .partial_cmp(&a.detection.f1)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then_with(|| a.team.cmp(&b.team))
    });

    Ok(Leaderboard { entries, failed })
}

pub fn render_leaderboard(lb: &Leaderboard) -> String {
    let mut out = String::new();
    out.push_str("rank  team                  runs  best    det_f1  corr_f1  overall\n");
    for (i, e) in lb.entries.iter().enumerate() {
        out.push_str(&format!(
            "{:<5} {:<21} {:<5} {:<7} {:<7} {:<8} {}\n",
            i + 1,
            e.team,
            e.n_runs,
            e.best_run_id,
            format_fixed(e.detection.f1, 4),
            format_fixed(e.correction.f1, 4),
            format_fixed(e.overall_f1, 4),
        ));
    }
    if !lb.failed.is_empty() {
        out.push_str("\nfailed runs:\n");
        for f in &lb.failed {
            out.push_str(&format!("  {}/{}: {}\n", f.team, f.run_id, f.reason));
        }
    }
    out
}

/// Tab-separated leaderboard with full-precision scores, one team per
/// line, with failed runs as trailing comment lines.
pub fn leaderboard_to_tsv(lb: &Leaderboard) -> String {
    let mut out = String::from(
        "team\tn_runs\tbest_run\tdetection_precision\tdetection_recall\tdetection_f1\tcorrection_precision\tcorrection_recall\tcorrection_f1\toverall_f1\n",
    );
    for e in &lb.entries {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            e.team,
            e.n_runs,
            e.best_run_id,
            e.detection.precision,
            e.detection.recall,
            e.detection.f1,
            e.correction.precision,
            e.correction.recall,
            e.correction.f1,
            e.overall_f1,
        ));
    }
    for f in &lb.failed {
        out.push_str(&format!("# failed\t{}\t{}\t{}\n", f.team, f.run_id, f.reason));
    }
    out
}
