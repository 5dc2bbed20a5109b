use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use medsimp::eval::{self, significance, tune, EvalCounts};
use medsimp::lm::{self, arpa, TrainConfig};
use medsimp::ontology::{self, AlignOptions, PhraseTable};
use medsimp::simplifier::{self, SimplifierConfig, DEFAULT_MAX_ITERATIONS};
use medsimp::wordfreq::FrequencyTable;

/// Ontology-driven lexical simplification of medical text.
#[derive(Debug, Parser)]
#[command(name = "medsimp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align ontology label files into a phrase table.
    #[command(after_help = "\
INPUT FORMAT (one or more files, concatenated before alignment):
  concept_id<TAB>label<TAB>source<TAB>P|A
  Lines starting with '#' and blank lines are ignored. P marks a primary label.

OUTPUT FORMAT:
  group_id<TAB>normalized label, sorted by group id then label.")]
    BuildTable(BuildTableArgs),

    /// Train a backoff n-gram model and write it as ARPA.
    #[command(after_help = "\
INPUT FORMAT: one sentence per line; blank lines are skipped.
OUTPUT FORMAT: ARPA text (log10 probabilities and backoff weights).")]
    TrainLm(TrainLmArgs),

    /// Simplify a file of sentences.
    #[command(after_help = "\
INPUT FORMAT: one sentence per line.
OUTPUT FORMAT: original<TAB>simplified<TAB>iterations, one row per input line.

MODEL FILES:
  --table-path  phrase table written by build-table
  --lm-path     ARPA model, or a score table of sentence<TAB>score rows
                (a '*' row sets the score of unlisted sentences)
  --freq-path   word<TAB>probability rows, probabilities in (0, 1]

TRACE (--trace): JSON array, one object per sentence with keys
  original, final, iterations, changed, stop_reason, trace[]
  where each trace entry has iteration, input, output, decisions[]
  and each decision has span, chosen, replaced, candidates[].")]
    Simplify(SimplifyArgs),

    /// Score system output with BLEU, SARI and simplification gain.
    #[command(after_help = "\
FILE FORMATS:
  --input, --sources, --references  one sentence per line, aligned by line
  --judgments  CSV sentence_id,system_id,category with category in S,F,E,N
               (or 1=F, 2=S, 3=E, 4=N); header row optional
  --unchanged  CSV sentence_id,system_id; each distinct pair adds
               --replications U judgments to that system
  --counts     TSV system<TAB>S<TAB>F<TAB>E<TAB>N<TAB>U; header row optional

Without --bleu or --sari every metric the inputs allow is reported.
--output writes the per-system count report as TSV.")]
    Evaluate(EvaluateArgs),

    /// Grid-search the mixing weight on a development set.
    #[command(after_help = "\
INPUT FORMAT: source<TAB>reference, one pair per line.
GRID: start:stop:step (inclusive) or a comma list; values in [0, 1].
      The default covers 0 to 1 in steps of 0.05 and 0.90 to 1 in steps of 0.01.
OUTPUT FORMAT: alpha<TAB>sari with a header row.")]
    Tune(TuneArgs),
}

#[derive(Debug, Args)]
struct BuildTableArgs {
    /// Ontology TSV files.
    #[arg(required = true, value_name = "ONTOLOGY_TSV")]
    inputs: Vec<PathBuf>,
    /// Phrase-table file to write (standard output if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Do not add naive plural variants of labels.
    #[arg(long)]
    no_plurals: bool,
}

#[derive(Debug, Args)]
struct TrainLmArgs {
    /// Training corpus.
    #[arg(long, short)]
    input: PathBuf,
    /// ARPA file to write (standard output if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = 0.75)]
    discount: f64,
    /// Words seen fewer times become <unk>.
    #[arg(long, default_value_t = 2)]
    min_count: u64,
}

#[derive(Debug, Args)]
struct Models {
    #[arg(long, alias = "table")]
    table_path: PathBuf,
    #[arg(long, alias = "lm")]
    lm_path: PathBuf,
    #[arg(long, alias = "freq")]
    freq_path: PathBuf,
}

#[derive(Debug, Args)]
struct SimplifyArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Output TSV (standard output if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    models: Models,
    #[arg(long, default_value_t = 0.7, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS, value_parser = clap::value_parser!(usize))]
    max_iterations: usize,
    /// Never keep the original term when alternatives exist.
    #[arg(long)]
    exclude_original: bool,
    /// Write a JSON trace of every decision.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// System outputs.
    #[arg(long, short, alias = "outputs")]
    input: Option<PathBuf>,
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long)]
    references: Option<PathBuf>,
    /// Require BLEU.
    #[arg(long)]
    bleu: bool,
    /// Require SARI.
    #[arg(long)]
    sari: bool,
    #[arg(long)]
    judgments: Option<PathBuf>,
    #[arg(long)]
    unchanged: Option<PathBuf>,
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long, default_value_t = eval::DEFAULT_REPLICATIONS)]
    replications: u64,
    /// Run the bootstrap test between every pair of systems.
    #[arg(long)]
    significance: bool,
    #[arg(long, default_value_t = significance::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    /// Count report TSV.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    /// Development set TSV.
    #[arg(long, short)]
    input: PathBuf,
    /// Curve TSV (standard output if omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    models: Models,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    max_iterations: usize,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("alpha must be within [0, 1], got {a}"))
    }
}

/// Errors that map to exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildTable(a) => build_table(a),
        Command::TrainLm(a) => train_lm(a),
        Command::Simplify(a) => simplify(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Tune(a) => tune_alpha(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn check_exists<'a>(paths: impl IntoIterator<Item = &'a Path>) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            anyhow::bail!("cannot read {}: no such file", p.display());
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read(path)?
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect())
}

fn write_out(path: Option<&Path>, data: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, data).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(data.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn build_table(args: BuildTableArgs) -> Result<()> {
    check_exists(args.inputs.iter().map(PathBuf::as_path))?;
    let mut records = Vec::new();
    for path in &args.inputs {
        let file =
            fs::File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
        let mut part = ontology::parse_records(BufReader::new(file))
            .with_context(|| format!("{}", path.display()))?;
        records.append(&mut part);
    }
    let table = ontology::align(
        &records,
        &AlignOptions {
            pluralize: !args.no_plurals,
        },
    );
    log::info!("{} groups, {} labels", table.len(), table.label_count());
    write_out(args.output.as_deref(), &table.to_tsv())
}

fn train_lm(args: TrainLmArgs) -> Result<()> {
    check_exists([args.input.as_path()])?;
    let lines = read_lines(&args.input)?;
    let config = TrainConfig {
        order: args.order,
        discount: args.discount,
        min_count: args.min_count,
    };
    let model = lm::train(&lines, &config)
        .with_context(|| format!("training on {}", args.input.display()))?;
    write_out(args.output.as_deref(), &arpa::save_arpa(&model))
}

struct LoadedModels {
    table: PhraseTable,
    lm: Box<dyn lm::LmScorer>,
    freq: FrequencyTable,
}

fn load_models(m: &Models) -> Result<LoadedModels> {
    check_exists([
        m.table_path.as_path(),
        m.lm_path.as_path(),
        m.freq_path.as_path(),
    ])?;
    let table_file = fs::File::open(&m.table_path)?;
    let table = PhraseTable::read_tsv(BufReader::new(table_file))
        .with_context(|| format!("phrase table {}", m.table_path.display()))?;
    let lm = lm::load_scorer(&read(&m.lm_path)?)
        .with_context(|| format!("language model {}", m.lm_path.display()))?;
    let freq_file = fs::File::open(&m.freq_path)?;
    let freq = FrequencyTable::load(BufReader::new(freq_file))
        .with_context(|| format!("frequency table {}", m.freq_path.display()))?;
    Ok(LoadedModels { table, lm, freq })
}

fn simplify(args: SimplifyArgs) -> Result<()> {
    check_exists([args.input.as_path()])?;
    let config = SimplifierConfig {
        alpha: args.alpha,
        max_iterations: args.max_iterations,
        include_original: !args.exclude_original,
    }
    .validated()
    .map_err(|e| usage(e.to_string()))?;
    let models = load_models(&args.models)?;
    let sentences = read_lines(&args.input)?;

    let results =
        simplifier::simplify_batch(&sentences, &models.table, &models.lm, &models.freq, &config);
    let mut out = String::new();
    for r in &results {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            r.original, r.final_sentence, r.iterations
        ));
    }
    write_out(args.output.as_deref(), &out)?;
    if let Some(path) = &args.trace {
        let json = serde_json::to_string_pretty(&results)?;
        fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }

    let stats = simplifier::iteration_stats(&results);
    eprintln!(
        "{} sentences, {} changed, iterations mean {:.2} median {:.1} max {}",
        stats.sentences, stats.changed, stats.mean, stats.median, stats.max
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let have_refs = args.input.is_some() && args.references.is_some();
    if args.bleu && !have_refs {
        return Err(usage("--bleu needs --input and --references"));
    }
    if args.sari && !(have_refs && args.sources.is_some()) {
        return Err(usage("--sari needs --input, --sources and --references"));
    }
    if args.unchanged.is_some() && args.judgments.is_none() {
        return Err(usage("--unchanged needs --judgments"));
    }
    let explicit = args.bleu || args.sari;
    let want_bleu = if explicit { args.bleu } else { have_refs };
    let want_sari = if explicit {
        args.sari
    } else {
        have_refs && args.sources.is_some()
    };
    let want_sg = args.judgments.is_some() || args.counts.is_some();
    if !(want_bleu || want_sari || want_sg) {
        return Err(usage(
            "nothing to evaluate: give references, judgments or counts",
        ));
    }
    check_exists(
        [
            &args.input,
            &args.sources,
            &args.references,
            &args.judgments,
            &args.unchanged,
            &args.counts,
        ]
        .into_iter()
        .flatten()
        .map(PathBuf::as_path),
    )?;

    let mut report = String::new();
    if want_bleu || want_sari {
        let outputs = read_lines(args.input.as_deref().expect("checked above"))?;
        let references = read_lines(args.references.as_deref().expect("checked above"))?;
        if outputs.len() != references.len() {
            anyhow::bail!(
                "{} outputs but {} references",
                outputs.len(),
                references.len()
            );
        }
        if want_bleu {
            report.push_str(&format!(
                "BLEU\t{:.2}\n",
                eval::bleu(&outputs, &references)?
            ));
        }
        if want_sari {
            let sources = read_lines(args.sources.as_deref().expect("checked above"))?;
            if sources.len() != outputs.len() {
                anyhow::bail!("{} outputs but {} sources", outputs.len(), sources.len());
            }
            let mut total = 0.0;
            for ((s, o), r) in sources.iter().zip(&outputs).zip(&references) {
                total += eval::sari(s, o, &[r])?;
            }
            let mean = if outputs.is_empty() {
                0.0
            } else {
                total / outputs.len() as f64
            };
            report.push_str(&format!("SARI\t{mean:.2}\n"));
        }
    }

    if want_sg {
        let mut counts = std::collections::BTreeMap::<String, EvalCounts>::new();
        if let Some(path) = &args.counts {
            let parsed =
                eval::read_counts(&read(path)?).with_context(|| format!("{}", path.display()))?;
            counts.extend(parsed);
        }
        if let Some(path) = &args.judgments {
            let records = eval::read_judgments(fs::File::open(path)?)
                .with_context(|| format!("{}", path.display()))?;
            let unchanged = match &args.unchanged {
                Some(p) => eval::read_unchanged(fs::File::open(p)?)
                    .with_context(|| format!("{}", p.display()))?,
                None => Vec::new(),
            };
            if records.is_empty() && unchanged.is_empty() {
                return Err(eval::EvalError::NoJudgments)
                    .with_context(|| format!("{}", path.display()));
            }
            for (system, c) in eval::aggregate_judgments(&records, &unchanged, args.replications) {
                let slot = counts.entry(system).or_default();
                *slot = EvalCounts::new(
                    slot.s + c.s,
                    slot.f + c.f,
                    slot.e + c.e,
                    slot.n + c.n,
                    slot.u + c.u,
                );
            }
        }
        if !report.is_empty() {
            report.push('\n');
        }
        report.push_str(&eval::counts_report_table(&counts));
        if args.significance {
            let names: Vec<&String> = counts.keys().collect();
            report.push('\n');
            for (i, a) in names.iter().enumerate() {
                for b in &names[i + 1..] {
                    let p =
                        eval::sg_significance(&counts[*a], &counts[*b], args.iterations, args.seed)
                            .map_err(|e| usage(e.to_string()))?;
                    report.push_str(&format!("p({a} vs {b})\t{p:.4}\n"));
                }
            }
        }
        if let Some(path) = &args.output {
            fs::write(path, eval::counts_report_tsv(&counts))
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    write_out(None, &report)
}

fn tune_alpha(args: TuneArgs) -> Result<()> {
    let grid = match &args.grid {
        Some(spec) => tune::parse_grid(spec).map_err(|e| usage(e.to_string()))?,
        None => tune::default_grid(),
    };
    check_exists([args.input.as_path()])?;
    let base = SimplifierConfig {
        max_iterations: args.max_iterations,
        ..SimplifierConfig::default()
    }
    .validated()
    .map_err(|e| usage(e.to_string()))?;
    let models = load_models(&args.models)?;
    let dev = tune::read_parallel(&read(&args.input)?)
        .with_context(|| format!("{}", args.input.display()))?;
    let result =
        tune::grid_search_alpha(&dev, &models.table, &models.lm, &models.freq, &grid, &base)?;
    write_out(args.output.as_deref(), &result.curve_tsv())?;
    println!(
        "best alpha {:.2}\tSARI {:.4}",
        result.best_alpha, result.best_sari
    );
    Ok(())
}
