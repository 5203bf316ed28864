use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sensebias::assoc::{PermutationConfig, DEFAULT_MAX_EXACT, DEFAULT_SAMPLES};
use sensebias::mlm::Grouping;
use sensebias::propagation::{DEFAULT_ALPHA, DEFAULT_EPSILON, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use sensebias::report::{self, Format, GenderInputs, Report, WatInputs, WeatInputs};
use sensebias::Level;

#[derive(Parser)]
#[command(name = "sensebias", version, about = "Social-bias evaluation for word and sense embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// WEAT statistic, effect size and permutation p-value per test.
    Weat(WeatArgs),
    /// Gender-mass propagation over an association graph, correlated with
    /// embedding gender scores.
    Wat(WatArgs),
    /// Generate the SSSB sentence-pair dataset.
    GenSssb(GenSssbArgs),
    /// AUL bias score from token log-probability files.
    Aul(AulArgs),
    /// Cosine of terms with the gender direction.
    Gender(GenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Word,
    Sense,
    Both,
}

impl LevelArg {
    fn levels(self) -> Vec<Level> {
        match self {
            LevelArg::Word => vec![Level::Word],
            LevelArg::Sense => vec![Level::Sense],
            LevelArg::Both => vec![Level::Word, Level::Sense],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Tsv,
    Markdown,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Tsv => Format::Tsv,
            FormatArg::Markdown => Format::Markdown,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    SenseType,
    Category,
    Lemma,
    None,
}

#[derive(Args)]
struct Common {
    /// Report format; tsv and markdown are rendered from the JSON report.
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Report path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Seed recorded in the report and used by every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct WeatArgs {
    /// word2vec text files; several files give a dimensionality sweep.
    #[arg(long, required = true, num_args = 1..)]
    embeddings: Vec<PathBuf>,
    /// Bias test JSON files (an object or an array of objects).
    #[arg(long, required = true, num_args = 1..)]
    spec: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    level: LevelArg,
    /// Monte-Carlo samples when exact enumeration is too large.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    /// Largest number of equal splits enumerated exactly.
    #[arg(long, default_value_t = DEFAULT_MAX_EXACT)]
    max_exact: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WatArgs {
    /// Edge list TSV: `word<TAB>word<TAB>weight`.
    #[arg(long)]
    graph: PathBuf,
    /// Seed pairs TSV: `masculine<TAB>feminine`.
    #[arg(long)]
    seeds: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    embeddings: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    level: LevelArg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Write per-node masses and biases as TSV.
    #[arg(long)]
    masses: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenSssbArgs {
    /// Template configuration (the shipped one when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset JSONL to write.
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct AulArgs {
    /// SSSB dataset JSONL.
    #[arg(long)]
    dataset: PathBuf,
    /// Score JSONL, one record per sentence.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long, value_enum, default_value = "sense-type")]
    group_by: GroupArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenderArgs {
    #[arg(long, required = true, num_args = 1..)]
    embeddings: Vec<PathBuf>,
    /// Gendered word pairs TSV (the shipped list when omitted).
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// A word or a sense key; repeatable.
    #[arg(long = "term")]
    term: Vec<String>,
    /// File with one word or sense key per line.
    #[arg(long)]
    terms: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    level: LevelArg,
    #[command(flatten)]
    common: Common,
}

fn emit(report: &Report, common: &Common) -> Result<()> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let text = report.render(common.format.into());
    report::write_output(&text, common.output.as_deref())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Weat(a) => {
            let inputs = WeatInputs {
                embeddings: a.embeddings,
                specs: a.spec,
                levels: a.level.levels(),
                permutation: PermutationConfig {
                    max_exact: a.max_exact,
                    samples: a.samples,
                    seed: a.common.seed,
                },
            };
            emit(&report::weat_report(&inputs)?, &a.common)
        }
        Command::Wat(a) => {
            let inputs = WatInputs {
                graph: a.graph,
                seeds: a.seeds,
                embeddings: a.embeddings,
                levels: a.level.levels(),
                alpha: a.alpha,
                tol: a.tol,
                max_iters: a.max_iters,
                epsilon: a.epsilon,
                seed: a.common.seed,
            };
            let (report, mass) = report::wat_report(&inputs)?;
            if let Some(path) = &a.masses {
                let file = File::create(path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
                report::write_masses(&mass, inputs.epsilon, &mut BufWriter::new(file))
                    .map_err(|e| anyhow!("{}: {e}", path.display()))?;
            }
            emit(&report, &a.common)
        }
        Command::GenSssb(a) => {
            let report = report::gen_sssb_report(a.config.as_deref(), &a.dataset, a.common.seed)?;
            emit(&report, &a.common)
        }
        Command::Aul(a) => {
            let grouping = match a.group_by {
                GroupArg::SenseType => Some(Grouping::SenseType),
                GroupArg::Category => Some(Grouping::Category),
                GroupArg::Lemma => Some(Grouping::Lemma),
                GroupArg::None => None,
            };
            let report = report::aul_report(&a.dataset, &a.scores, grouping, a.common.seed)?;
            emit(&report, &a.common)
        }
        Command::Gender(a) => {
            let mut terms: Vec<_> = a.term.iter().map(|t| report::parse_term(t)).collect();
            if let Some(path) = &a.terms {
                terms.extend(report::read_terms(path)?);
            }
            if terms.is_empty() {
                bail!("give at least one --term or a --terms file");
            }
            let inputs = GenderInputs {
                embeddings: a.embeddings,
                pairs: a.pairs,
                terms,
                levels: a.level.levels(),
                seed: a.common.seed,
            };
            emit(&report::gender_report(&inputs)?, &a.common)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        // library errors already include their cause in the message
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
