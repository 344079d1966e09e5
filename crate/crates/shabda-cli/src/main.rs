//! The `shabda` binary: the toolkit's operations as composable,
//! line-oriented subcommands. Exit codes: 0 success, 1 usage error,
//! 2 data error. Data errors go to stderr with the offending line number.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use shabda::augment::{self, AffixList, DictEntry};
use shabda::corpus::{self, PruneChecks};
use shabda::metrics::{self, ChrfParams, EvalReport};
use shabda::sandhi::{self, RuleTable};
use shabda::script::{self, ScriptTag, TaggedText, TranslitTable, VargaTable};
use shabda::segmenter::{self, Lexicon};

const DATA_DIR_ENV: &str = "SHABDA_DATA_DIR";
const BATCH_LINES: usize = 4096;

#[derive(Parser)]
#[command(name = "shabda", version, about = "Sanskrit text toolkit", arg_required_else_help = true)]
struct Cli {
    /// JSON config file; explicit flags win over config values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-line subcommands; output order is preserved
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct TableArgs {
    /// Directory holding translit.tsv and varga.tsv
    #[arg(long)]
    tables: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Transliterate stdin lines between scripts
    Translit {
        #[arg(long, default_value = "slp1")]
        from: ScriptTag,
        #[arg(long)]
        to: ScriptTag,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Rewrite anusvara before varga consonants to the row nasal
    Normalize {
        #[arg(long, default_value = "slp1")]
        from: ScriptTag,
        #[command(flatten)]
        tables: TableArgs,
    },
    /// Join two whitespace-separated words per line
    SandhiJoin {
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// List all two-way split candidates of each compound
    SandhiSplit {
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Segment each whitespace-separated word of a line
    Segment {
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Analyses per word (default 1); above 1 the line must hold a
        /// single word
        #[arg(short)]
        k: Option<usize>,
    },
    /// Wrap plus-joined segments in the target markers
    Encode,
    /// Strip markers and print plus-joined segments
    Decode,
    /// Build augmented-input lines from dictionary TSV rows
    Augment {
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        affixes: Option<PathBuf>,
        /// Write a coverage summary (JSON) to this path
        #[arg(long)]
        coverage: Option<PathBuf>,
    },
    /// Score a predictions file with the segmentation metrics
    EvalSeg {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        per_item: bool,
        /// Normalize anusvara in every field before comparison
        #[arg(long)]
        normalize_anusvara: bool,
    },
    /// Score hypothesis lines against reference lines with chrF++
    EvalChrf {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        char_n: Option<usize>,
        #[arg(long)]
        word_n: Option<usize>,
        #[arg(long)]
        per_item: bool,
    },
    /// Summarize a segmentation corpus
    CorpusStats {
        #[arg(long, default_value = "slp1")]
        script: ScriptTag,
        file: PathBuf,
    },
    /// Drop invalid corpus instances; kept lines go to stdout
    Prune {
        #[arg(long, default_value = "slp1")]
        script: ScriptTag,
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Comma-separated checks: script, empty, join
        #[arg(long)]
        checks: Option<String>,
        /// Write the line<TAB>reason report here instead of stderr
        #[arg(long)]
        report: Option<PathBuf>,
        file: PathBuf,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn data(err: impl std::fmt::Display) -> Self {
        Self::Data(err.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// File-backed defaults, lowest priority of flag > config > data dir.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineConfig {
    rules: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    affixes: Option<PathBuf>,
    tables: Option<PathBuf>,
    k: Option<usize>,
    beta: Option<f64>,
    char_n: Option<usize>,
    word_n: Option<usize>,
    jobs: Option<usize>,
    checks: Option<String>,
}

impl PipelineConfig {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        for referenced in [&config.rules, &config.lexicon, &config.affixes, &config.tables]
            .into_iter()
            .flatten()
        {
            if !referenced.exists() {
                return Err(CliError::Data(format!(
                    "{}: referenced path {} does not exist",
                    path.display(),
                    referenced.display()
                )));
            }
        }
        Ok(config)
    }
}

fn data_dir_file(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(DATA_DIR_ENV)?;
    let path = PathBuf::from(dir).join(name);
    path.exists().then_some(path)
}

fn resolve(flag: Option<PathBuf>, config: Option<PathBuf>, name: &str) -> Option<PathBuf> {
    flag.or(config).or_else(|| data_dir_file(name))
}

fn leak<T>(value: T) -> &'static T {
    Box::leak(Box::new(value))
}

fn load_rules(flag: Option<PathBuf>, config: &PipelineConfig) -> CliResult<&'static RuleTable> {
    match resolve(flag, config.rules.clone(), "sandhi_rules.tsv") {
        Some(path) => Ok(leak(RuleTable::load(path).map_err(CliError::data)?)),
        None => Ok(RuleTable::default_table()),
    }
}

fn load_lexicon(flag: Option<PathBuf>, config: &PipelineConfig) -> CliResult<&'static Lexicon> {
    match resolve(flag, config.lexicon.clone(), "lexicon.tsv") {
        Some(path) => Ok(leak(Lexicon::load(path).map_err(CliError::data)?)),
        None => Ok(leak(Lexicon::new())),
    }
}

fn load_affixes(flag: Option<PathBuf>, config: &PipelineConfig) -> CliResult<&'static AffixList> {
    match resolve(flag, config.affixes.clone(), "hindi_affixes.tsv") {
        Some(path) => Ok(leak(AffixList::load(path).map_err(CliError::data)?)),
        None => Ok(AffixList::default_list()),
    }
}

fn load_translit(dir: Option<&Path>) -> CliResult<&'static TranslitTable> {
    match dir {
        Some(dir) => Ok(leak(
            TranslitTable::load(dir.join("translit.tsv")).map_err(CliError::data)?,
        )),
        None => Ok(TranslitTable::default_table()),
    }
}

fn load_varga(dir: Option<&Path>) -> CliResult<&'static VargaTable> {
    match dir {
        Some(dir) => Ok(leak(
            VargaTable::load(dir.join("varga.tsv")).map_err(CliError::data)?,
        )),
        None => Ok(VargaTable::default_table()),
    }
}

fn tables_dir(args: TableArgs, config: &PipelineConfig) -> Option<PathBuf> {
    args.tables
        .or_else(|| config.tables.clone())
        .or_else(|| {
            std::env::var_os(DATA_DIR_ENV)
                .map(PathBuf::from)
                .filter(|dir| dir.join("translit.tsv").exists())
        })
}

/// Runs `f` over stdin lines with order-preserving output. Blank lines are
/// echoed untouched so 1:1 line pipelines survive them.
fn process_lines<F>(jobs: usize, f: F) -> CliResult<()>
where
    F: Fn(&str, usize) -> CliResult<String> + Sync,
{
    let stdin = io::stdin().lock();
    let stdout = io::stdout().lock();
    let mut out = io::BufWriter::new(stdout);
    let mut lines = stdin.lines();
    let mut line_no = 0usize;
    let jobs = jobs.max(1);
    loop {
        let mut batch: Vec<(usize, String)> = Vec::with_capacity(BATCH_LINES);
        for line in lines.by_ref().take(BATCH_LINES) {
            let line = line.map_err(|e| CliError::Data(format!("stdin: {e}")))?;
            line_no += 1;
            batch.push((line_no, line));
        }
        if batch.is_empty() {
            break;
        }
        let results: Vec<CliResult<String>> = if jobs == 1 || batch.len() == 1 {
            batch
                .iter()
                .map(|(no, line)| apply(&f, line, *no))
                .collect()
        } else {
            let chunk = batch.len().div_ceil(jobs);
            let mut collected: Vec<Vec<CliResult<String>>> = Vec::new();
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .chunks(chunk)
                    .map(|part| {
                        scope.spawn(|| {
                            part.iter()
                                .map(|(no, line)| apply(&f, line, *no))
                                .collect::<Vec<_>>()
                        })
                    })
                    .collect();
                for handle in handles {
                    collected.push(handle.join().expect("worker panicked"));
                }
            });
            collected.into_iter().flatten().collect()
        };
        for result in results {
            let text = result?;
            writeln!(out, "{text}").map_err(|e| CliError::Data(format!("stdout: {e}")))?;
        }
    }
    out.flush().map_err(|e| CliError::Data(format!("stdout: {e}")))?;
    Ok(())
}

fn apply<F>(f: &F, line: &str, no: usize) -> CliResult<String>
where
    F: Fn(&str, usize) -> CliResult<String>,
{
    if line.trim().is_empty() {
        return Ok(line.to_string());
    }
    f(line, no).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("stdin:{no}: {msg}")),
        usage => usage,
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::data)?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let config = PipelineConfig::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(config.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".to_string()));
    }

    match cli.command {
        Command::Translit { from, to, tables } => {
            let table = load_translit(tables_dir(tables, &config).as_deref())?;
            process_lines(jobs, |line, _| {
                table
                    .transliterate(&TaggedText::new(line, from), to)
                    .map(|t| t.into_text())
                    .map_err(CliError::data)
            })
        }
        Command::Normalize { from, tables } => {
            let varga = load_varga(tables_dir(tables, &config).as_deref())?;
            process_lines(jobs, |line, no| {
                let text = TaggedText::new(line, from);
                for offset in script::final_anusvara_offsets(&text) {
                    eprintln!(
                        "stdin:{no}: note: word-final anusvara at offset {offset} left unchanged"
                    );
                }
                script::normalize_anusvara_with(&text, varga)
                    .map(|t| t.into_text())
                    .map_err(CliError::data)
            })
        }
        Command::SandhiJoin { rules } => {
            let table = load_rules(rules, &config)?;
            process_lines(jobs, |line, _| {
                let words: Vec<&str> = line.split_whitespace().collect();
                if words.len() != 2 {
                    return Err(CliError::Data(format!(
                        "expected two words, got {}",
                        words.len()
                    )));
                }
                sandhi::join(words[0], words[1], table).map_err(CliError::data)
            })
        }
        Command::SandhiSplit { rules } => {
            let table = load_rules(rules, &config)?;
            process_lines(jobs, |line, _| {
                let candidates =
                    sandhi::split_candidates(line.trim(), table).map_err(CliError::data)?;
                Ok(candidates
                    .iter()
                    .map(|c| format!("{}+{}", c.left, c.right))
                    .collect::<Vec<_>>()
                    .join(" "))
            })
        }
        Command::Segment { lexicon, rules, k } => {
            let k = k.or(config.k).unwrap_or(1);
            if k == 0 {
                return Err(CliError::Usage("-k must be at least 1".to_string()));
            }
            let table = load_rules(rules, &config)?;
            let lexicon = load_lexicon(lexicon, &config)?;
            process_lines(jobs, move |line, _| {
                let words: Vec<&str> = line.split_whitespace().collect();
                if k > 1 && words.len() != 1 {
                    return Err(CliError::Data(
                        "-k above 1 needs exactly one word per line".to_string(),
                    ));
                }
                let mut rendered = Vec::with_capacity(words.len());
                for word in words {
                    let analyses =
                        segmenter::segment(word, lexicon, table, k).map_err(CliError::data)?;
                    if k == 1 {
                        rendered.push(analyses[0].segments.join("+"));
                    } else {
                        rendered.push(
                            analyses
                                .iter()
                                .map(|a| a.segments.join("+"))
                                .collect::<Vec<_>>()
                                .join("\t"),
                        );
                    }
                }
                Ok(rendered.join(" "))
            })
        }
        Command::Encode => process_lines(jobs, |line, _| {
            let segments: Vec<&str> = line
                .split('+')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            segmenter::encode_target(&segments).map_err(CliError::data)
        }),
        Command::Decode => process_lines(jobs, |line, _| {
            segmenter::decode_target(line)
                .map(|segments| segments.join("+"))
                .map_err(CliError::data)
        }),
        Command::Augment {
            rules,
            lexicon,
            affixes,
            coverage,
        } => {
            let table = load_rules(rules, &config)?;
            let lexicon = load_lexicon(lexicon, &config)?;
            let affixes = load_affixes(affixes, &config)?;
            let entries: Mutex<Vec<DictEntry>> = Mutex::new(Vec::new());
            process_lines(jobs, |line, no| {
                let entry = DictEntry::from_tsv_line(line, "stdin", no).map_err(CliError::data)?;
                let built = augment::build_augmented_input(&entry, table, lexicon, affixes)
                    .map_err(CliError::data)?;
                if coverage.is_some() {
                    entries.lock().expect("poisoned").push(entry);
                }
                Ok(format!(
                    "{}\t{}\t{}",
                    built.english, built.rendered, built.coverage_flag
                ))
            })?;
            if let Some(path) = coverage {
                let entries = entries.into_inner().expect("poisoned");
                let report = augment::coverage_report(&entries, table, lexicon, affixes)
                    .map_err(CliError::data)?;
                let text = serde_json::to_string_pretty(&report).map_err(CliError::data)?;
                fs::write(&path, text + "\n")
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::EvalSeg {
            pred,
            per_item,
            normalize_anusvara,
        } => {
            let mut records = segmenter::load_predictions(&pred).map_err(CliError::data)?;
            if normalize_anusvara {
                records = metrics::normalize_records(&records);
            }
            let result = metrics::evaluate_segmentation(&records).map_err(CliError::data)?;
            let per_item_value = per_item.then(|| {
                serde_json::Value::Array(
                    records
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "input": r.input,
                                "exact": r.pred == r.gold,
                                "gold": r.gold,
                                "pred": r.pred,
                            })
                        })
                        .collect(),
                )
            });
            let report = EvalReport::for_segmentation(
                pred.display().to_string(),
                serde_json::json!({ "normalize_anusvara": normalize_anusvara }),
                result,
                per_item_value,
            );
            print_json(&report)
        }
        Command::EvalChrf {
            hyp,
            reference,
            beta,
            char_n,
            word_n,
            per_item,
        } => {
            let params = ChrfParams {
                char_ngram_max: char_n.or(config.char_n).unwrap_or(6),
                word_ngram_max: word_n.or(config.word_n).unwrap_or(2),
                beta: beta.or(config.beta).unwrap_or(2.0),
            };
            if params.char_ngram_max == 0 || params.beta <= 0.0 {
                return Err(CliError::Usage(
                    "--char-n must be >= 1 and --beta positive".to_string(),
                ));
            }
            let read = |path: &Path| -> CliResult<Vec<String>> {
                Ok(fs::read_to_string(path)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
                    .lines()
                    .map(str::to_string)
                    .collect())
            };
            let hyps = read(&hyp)?;
            let refs = read(&reference)?;
            if hyps.len() != refs.len() {
                return Err(CliError::Data(format!(
                    "{} has {} lines but {} has {}",
                    hyp.display(),
                    hyps.len(),
                    reference.display(),
                    refs.len()
                )));
            }
            let pairs = hyps
                .iter()
                .map(String::as_str)
                .zip(refs.iter().map(String::as_str));
            let scores = metrics::chrf_corpus(pairs, &params).map_err(CliError::data)?;
            let corpus = format!("{} vs {}", hyp.display(), reference.display());
            print_json(&EvalReport::for_chrf(corpus, &params, &scores, per_item))
        }
        Command::CorpusStats { script, file } => {
            let instances = corpus::load_seg_corpus(&file, script).map_err(CliError::data)?;
            print_json(&corpus::stats(&instances))
        }
        Command::Prune {
            script,
            rules,
            checks,
            report,
            file,
        } => {
            let table = load_rules(rules, &config)?;
            let checks_spec = checks.or_else(|| config.checks.clone());
            let checks = match checks_spec {
                None => PruneChecks::default(),
                Some(spec) => {
                    let mut parsed = PruneChecks {
                        script: false,
                        empty: false,
                        join: false,
                    };
                    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        match item {
                            "script" => parsed.script = true,
                            "empty" => parsed.empty = true,
                            "join" => parsed.join = true,
                            other => {
                                return Err(CliError::Usage(format!(
                                    "unknown prune check {other:?}"
                                )))
                            }
                        }
                    }
                    parsed
                }
            };
            let instances = corpus::load_seg_corpus(&file, script).map_err(CliError::data)?;
            let (kept, pruned) = corpus::prune_invalid(instances, table, checks);
            let stdout = io::stdout().lock();
            let mut out = io::BufWriter::new(stdout);
            for instance in &kept {
                writeln!(
                    out,
                    "{}\t{}",
                    instance.compound.text(),
                    instance.gold_strings().join("+")
                )
                .map_err(|e| CliError::Data(format!("stdout: {e}")))?;
            }
            out.flush()
                .map_err(|e| CliError::Data(format!("stdout: {e}")))?;
            let mut report_lines = String::new();
            for p in &pruned {
                report_lines.push_str(&format!("{}\t{}\n", p.line, p.reason.as_str()));
            }
            match report {
                Some(path) => fs::write(&path, report_lines)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
                None => eprint!("{report_lines}"),
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
