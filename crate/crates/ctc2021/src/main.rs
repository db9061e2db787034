use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ctc2021::corruptor::{
    self, CorruptionConfig, LoadedResources, ResourcePaths,
};
use ctc2021::format::{self, Parsed};
use ctc2021::model::{validate_annotation, AnswerSet, PassageSet};
use ctc2021::report;
use ctc2021::scoring;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "ctc2021", version, about = "CTC 2021 Chinese text correction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check answer files against their passages
    Validate(ValidateArgs),
    /// Apply answer edits and emit the corrected passages
    Apply(ApplyArgs),
    /// Score a system answer file against gold
    Score(ScoreArgs),
    /// Corrupt clean passages into training pairs with gold corrections
    Corrupt(CorruptArgs),
    /// Corpus statistics from passages and gold answers
    Stats(StatsArgs),
    /// Aggregate team runs into a leaderboard
    Leaderboard(LeaderboardArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Passage file (pid<TAB>text per line)
    #[arg(long)]
    passages: PathBuf,
    /// Answer files to check
    #[arg(required = true)]
    answers: Vec<PathBuf>,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    passages: PathBuf,
    #[arg(long)]
    answers: PathBuf,
    /// Write here instead of stdout
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    passages: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    system: PathBuf,
    /// Per-passage match detail
    #[arg(long)]
    verbose: bool,
    /// Also write the machine-readable report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CorruptArgs {
    #[arg(long)]
    passages: PathBuf,
    /// Pinyin confusion table (char<TAB>candidates)
    #[arg(long)]
    pinyin: PathBuf,
    /// Shape confusion table (char<TAB>candidates)
    #[arg(long)]
    shape: PathBuf,
    /// Vocabulary for random replacements and insertions, one per line
    #[arg(long)]
    vocabulary: PathBuf,
    /// Optional lexicon for word-mode segmentation
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// TOML config; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    p_two_errors: Option<f64>,
    #[arg(long)]
    p_passthrough: Option<f64>,
    /// Skip passages shorter than this many characters
    #[arg(long)]
    min_length: Option<usize>,
    /// Segment with the lexicon instead of characters
    #[arg(long)]
    word_mode: bool,
    /// Operation weights: pinyin,shape,random,delete,insert,swap
    #[arg(long, value_delimiter = ',', num_args = 6, allow_negative_numbers = true)]
    weights: Option<Vec<f64>>,
    /// Corrupted passage file to write
    #[arg(long)]
    out_passages: PathBuf,
    /// Gold answer file to write
    #[arg(long)]
    out_answers: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    passages: PathBuf,
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct LeaderboardArgs {
    #[arg(long)]
    passages: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Run manifest: team<TAB>run_id<TAB>path per line, paths relative to
    /// the manifest
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, default_value_t = 3)]
    max_runs: usize,
    /// Also write the full-precision TSV here
    #[arg(long)]
    tsv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let inputs = input_paths(&cli.command);
    let missing: Vec<&Path> = inputs.into_iter().filter(|p| !p.exists()).collect();
    if !missing.is_empty() {
        for p in missing {
            eprintln!("input file not found: {}", p.display());
        }
        return Ok(EXIT_USAGE);
    }
    match cli.command {
        Command::Validate(args) => run_validate(args),
        Command::Apply(args) => run_apply(args),
        Command::Score(args) => run_score(args),
        Command::Corrupt(args) => run_corrupt(args),
        Command::Stats(args) => run_stats(args),
        Command::Leaderboard(args) => run_leaderboard(args),
    }
}

fn input_paths(command: &Command) -> Vec<&Path> {
    let mut paths: Vec<&Path> = Vec::new();
    match command {
        Command::Validate(a) => {
            paths.push(&a.passages);
            paths.extend(a.answers.iter().map(PathBuf::as_path));
        }
        Command::Apply(a) => {
            paths.push(&a.passages);
            paths.push(&a.answers);
        }
        Command::Score(a) => {
            paths.push(&a.passages);
            paths.push(&a.gold);
            paths.push(&a.system);
        }
        Command::Corrupt(a) => {
            paths.push(&a.passages);
            paths.push(&a.pinyin);
            paths.push(&a.shape);
            paths.push(&a.vocabulary);
            if let Some(p) = &a.lexicon {
                paths.push(p);
            }
            if let Some(p) = &a.config {
                paths.push(p);
            }
        }
        Command::Stats(a) => {
            paths.push(&a.passages);
            paths.push(&a.gold);
        }
        Command::Leaderboard(a) => {
            paths.push(&a.passages);
            paths.push(&a.gold);
            paths.push(&a.manifest);
        }
    }
    paths
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
}

fn print_warnings(path: &Path, warnings: &[String]) {
    for w in warnings {
        eprintln!("{}: {}", path.display(), w);
    }
}

fn load_passages(path: &Path) -> Result<PassageSet> {
    let Parsed { records, warnings } = format::parse_passage_file(open(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    print_warnings(path, &warnings);
    Ok(records)
}

fn load_answers(path: &Path) -> Result<AnswerSet> {
    let Parsed { records, warnings } = format::parse_answer_file(open(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    print_warnings(path, &warnings);
    Ok(records)
}

/// Write via a temp file in the target directory so readers never see a
/// half-written file.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(content.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

fn emit(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => write_atomic(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_validate(args: ValidateArgs) -> Result<u8> {
    let passages = load_passages(&args.passages)?;
    let mut problems = 0usize;
    for file in &args.answers {
        let answers = match format::parse_answer_file(open(file)?) {
            Ok(parsed) => {
                print_warnings(file, &parsed.warnings);
                parsed.records
            }
            Err(e) => {
                println!("{}: {}", file.display(), e);
                problems += 1;
                continue;
            }
        };
        for a in answers.iter() {
            let p = match passages.get(&a.pid) {
                Some(p) => p,
                None => {
                    println!("{}: PID={}: no such passage", file.display(), a.pid);
                    problems += 1;
                    continue;
                }
            };
            if let Err(violations) = validate_annotation(a, p) {
                for v in violations {
                    println!("{}: PID={}: {}", file.display(), a.pid, v);
                    problems += 1;
                }
            }
        }
    }
    if problems == 0 {
        println!("ok");
        Ok(0)
    } else {
        println!("{problems} problem(s) found");
        Ok(EXIT_FAILURE)
    }
}

fn run_apply(args: ApplyArgs) -> Result<u8> {
    let passages = load_passages(&args.passages)?;
    let answers = load_answers(&args.answers)?;
    for a in answers.iter() {
        if !passages.contains(&a.pid) {
            bail!("answer file names unknown pid {:?}", a.pid);
        }
    }
    let mut out = String::new();
    for p in passages.iter() {
        let corrected = match answers.get(&p.pid) {
            Some(a) => ctc2021::edits::apply_edits(p, a)?,
            None => p.text.clone(),
        };
        out.push_str(&format!("{}\t{}\n", p.pid, corrected));
    }
    emit(args.output.as_deref(), &out)?;
    Ok(0)
}

fn run_score(args: ScoreArgs) -> Result<u8> {
    let passages = load_passages(&args.passages)?;
    let gold = load_answers(&args.gold)?;
    let system = load_answers(&args.system)?;
    let report = scoring::score(&gold, &system, &passages)?;
    if args.verbose {
        print!("{}", scoring::render_verbose(&report));
    } else {
        print!("{}", scoring::render_summary(&report));
    }
    if let Some(path) = &args.report {
        write_atomic(path, &scoring::to_machine_format(&report))?;
    }
    Ok(0)
}

fn run_corrupt(args: CorruptArgs) -> Result<u8> {
    let mut cfg = match &args.config {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<CorruptionConfig>(&raw)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => CorruptionConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(p) = args.p_two_errors {
        cfg.p_two_errors = p;
    }
    if let Some(p) = args.p_passthrough {
        cfg.p_passthrough = p;
    }
    if let Some(n) = args.min_length {
        cfg.min_text_length = n;
    }
    if args.word_mode {
        cfg.word_mode = true;
    }
    if let Some(w) = &args.weights {
        cfg.weights.replace_pinyin = w[0];
        cfg.weights.replace_shape = w[1];
        cfg.weights.replace_random = w[2];
        cfg.weights.delete = w[3];
        cfg.weights.insert = w[4];
        cfg.weights.swap = w[5];
    }

    let passages = load_passages(&args.passages)?;
    let LoadedResources {
        resources,
        warnings,
    } = corruptor::load_resources(&ResourcePaths {
        pinyin: args.pinyin.clone(),
        shape: args.shape.clone(),
        vocabulary: args.vocabulary.clone(),
        lexicon: args.lexicon.clone(),
    })?;
    for w in &warnings {
        eprintln!("{w}");
    }

    let (records, summary) = corruptor::corrupt_corpus(passages.iter(), &cfg, &resources)?;

    let mut out_passages = String::new();
    let mut out_answers = String::new();
    for r in &records {
        out_passages.push_str(&format::serialize_passage_line(&r.corrupted)?);
        out_passages.push('\n');
        out_answers.push_str(&format::serialize_annotation(&r.gold)?);
        out_answers.push('\n');
    }
    write_atomic(&args.out_passages, &out_passages)?;
    write_atomic(&args.out_answers, &out_answers)?;

    print!("{}", corruptor::render_corpus_summary(&summary));
    if summary.produced == 0 && summary.attempted > 0 {
        eprintln!("no passage could be corrupted");
        return Ok(EXIT_FAILURE);
    }
    Ok(0)
}

fn run_stats(args: StatsArgs) -> Result<u8> {
    let passages = load_passages(&args.passages)?;
    let gold = load_answers(&args.gold)?;
    let stats = report::compute_stats(&passages, &gold)?;
    print!("{}", report::render_stats(&stats));
    Ok(0)
}

fn run_leaderboard(args: LeaderboardArgs) -> Result<u8> {
    let passages = load_passages(&args.passages)?;
    let gold = load_answers(&args.gold)?;
    let specs = report::parse_manifest(open(&args.manifest)?)?;
    let runs = specs
        .into_iter()
        .map(|spec| {
            let path = report::resolve_run_path(&args.manifest, &spec.path);
            let answers = File::open(&path)
                .map_err(|e| format!("{}: {}", path.display(), e))
                .and_then(|f| {
                    format::parse_answer_file(BufReader::new(f))
                        .map_err(|e| format!("{}: {}", path.display(), e))
                })
                .map(|parsed| {
                    print_warnings(&path, &parsed.warnings);
                    parsed.records
                });
            report::RunInput {
                team: spec.team,
                run_id: spec.run_id,
                answers,
            }
        })
        .collect();
    let lb = report::build_leaderboard(runs, &gold, &passages, args.max_runs)?;
    print!("{}", report::render_leaderboard(&lb));
    if let Some(path) = &args.tsv {
        write_atomic(path, &report::leaderboard_to_tsv(&lb))?;
    }
    Ok(0)
}
