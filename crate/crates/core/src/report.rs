//! Command-level reports.
//!
//! Every command builds one [`Report`]. Its JSON serialization is the
//! canonical output; TSV and markdown are rendered from the `tables` array of
//! that JSON document. Reports carry the tool version and seed and never a
//! timestamp, so equal inputs give byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::assoc::{self, BiasSpec, PermutationConfig, Term};
use crate::embedstore::{EmbeddingStore, Level};
use crate::error::{Error, Result};
use crate::mlm::{self, AulSection, Grouping};
use crate::propagation::{self, AssociationGraph, GenderMass};
use crate::sssb::{self, SssbConfig};

pub const TOOL: &str = "sensebias";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Masculine/feminine word pairs used when no pair file is given.
pub const DEFAULT_GENDER_PAIRS: &str = include_str!("../data/gender_pairs.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "tsv" => Ok(Format::Tsv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(title: impl Into<String>, columns: &[&str]) -> Table {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub parameters: Value,
    pub results: Value,
    pub tables: Vec<Table>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(command: &str, seed: u64, parameters: Value) -> Report {
        Report {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            parameters,
            results: Value::Null,
            tables: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn render(&self, format: Format) -> String {
        render(&self.to_json(), format)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("value serializes")
}

/// Renders a report document. TSV and markdown only use its header fields
/// and `tables`.
pub fn render(doc: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Tsv => render_tsv(doc),
        Format::Markdown => render_markdown(doc),
    }
}

fn header_line(doc: &Value) -> String {
    format!(
        "{} {} {} seed={}",
        doc["tool"].as_str().unwrap_or(TOOL),
        doc["version"].as_str().unwrap_or(VERSION),
        doc["command"].as_str().unwrap_or(""),
        doc["seed"]
    )
}

fn tables(doc: &Value) -> impl Iterator<Item = (&str, Vec<&Value>, Vec<&Vec<Value>>)> {
    doc["tables"].as_array().into_iter().flatten().map(|t| {
        let title = t["title"].as_str().unwrap_or("");
        let columns = t["columns"].as_array().map(|c| c.iter().collect()).unwrap_or_default();
        let rows = t["rows"]
            .as_array()
            .map(|r| r.iter().filter_map(Value::as_array).collect())
            .unwrap_or_default();
        (title, columns, rows)
    })
}

fn plain_cell(v: &Value) -> String {
    let s = match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    s.replace(['\t', '\n', '\r'], " ")
}

fn markdown_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let s = format!("{:.4}", n.as_f64().unwrap_or(f64::NAN));
            if s == "-0.0000" {
                "0.0000".to_string()
            } else {
                s
            }
        }
        other => plain_cell(other).replace('|', "\\|"),
    }
}

fn warnings(doc: &Value) -> impl Iterator<Item = &str> {
    doc["warnings"].as_array().into_iter().flatten().filter_map(Value::as_str)
}

fn render_tsv(doc: &Value) -> String {
    let mut out = format!("# {}\n", header_line(doc));
    for w in warnings(doc) {
        let _ = writeln!(out, "# warning: {w}");
    }
    for (title, columns, rows) in tables(doc) {
        let _ = writeln!(out, "\n# {title}");
        let header: Vec<String> = columns.iter().map(|c| plain_cell(c)).collect();
        let _ = writeln!(out, "{}", header.join("\t"));
        for row in rows {
            let cells: Vec<String> = row.iter().map(plain_cell).collect();
            let _ = writeln!(out, "{}", cells.join("\t"));
        }
    }
    out
}

fn render_markdown(doc: &Value) -> String {
    let mut out = format!("<!-- {} -->\n", header_line(doc));
    for w in warnings(doc) {
        let _ = writeln!(out, "\n> warning: {w}");
    }
    for (title, columns, rows) in tables(doc) {
        let _ = writeln!(out, "\n### {title}\n");
        let header: Vec<String> = columns.iter().map(|c| markdown_cell(c)).collect();
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        for row in rows {
            let cells: Vec<String> = row.iter().map(markdown_cell).collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
    }
    out
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| Error::io(p, e))?;
            f.write_all(text.as_bytes()).map_err(|e| Error::io(p, e))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn levels_value(levels: &[Level]) -> Value {
    levels.iter().map(|l| Value::from(l.as_str())).collect()
}

fn load_store(path: &Path) -> Result<EmbeddingStore> {
    EmbeddingStore::load(path)
}

#[derive(Debug, Clone)]
pub struct WeatInputs {
    pub embeddings: Vec<PathBuf>,
    pub specs: Vec<PathBuf>,
    pub levels: Vec<Level>,
    pub permutation: PermutationConfig,
}

#[derive(Debug, Clone, Serialize)]
struct WeatRow {
    embeddings: String,
    dim: usize,
    test: String,
    level: Level,
    #[serde(flatten)]
    result: assoc::WeatResult,
}

/// WEAT for every (embedding file, test, level). With both levels an extra
/// table sets word and sense effect sizes side by side.
pub fn weat_report(inputs: &WeatInputs) -> Result<Report> {
    let mut specs = Vec::new();
    for path in &inputs.specs {
        specs.extend(BiasSpec::load_all(path)?);
    }
    let pc = &inputs.permutation;
    let mut report = Report::new(
        "weat",
        pc.seed,
        json!({
            "embeddings": inputs.embeddings.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
            "specs": inputs.specs.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
            "levels": levels_value(&inputs.levels),
            "max_exact": pc.max_exact,
            "samples": pc.samples,
        }),
    );

    let mut rows = Vec::new();
    for path in &inputs.embeddings {
        let store = load_store(path)?;
        for spec in &specs {
            for &level in &inputs.levels {
                let result = assoc::weat(spec, level, &store, pc).map_err(|e| {
                    e.within(format!("{}: test `{}` at {level} level", path.display(), spec.name))
                })?;
                rows.push(WeatRow {
                    embeddings: path_str(path),
                    dim: store.dim(),
                    test: spec.name.clone(),
                    level,
                    result,
                });
            }
        }
    }

    let mut table = Table::new(
        "WEAT",
        &["embeddings", "dim", "test", "level", "statistic", "effect_size", "p_value", "method", "permutations"],
    );
    for r in &rows {
        table.rows.push(vec![
            r.embeddings.clone().into(),
            r.dim.into(),
            r.test.clone().into(),
            r.level.as_str().into(),
            r.result.statistic.into(),
            r.result.effect_size.into(),
            r.result.p_value.into(),
            to_value(&r.result.method),
            r.result.permutations_used.into(),
        ]);
    }
    report.tables.push(table);

    if inputs.levels.contains(&Level::Word) && inputs.levels.contains(&Level::Sense) {
        let mut side = Table::new(
            "WEAT effect size, word vs sense",
            &["embeddings", "dim", "test", "word", "sense"],
        );
        let mut grouped: BTreeMap<(usize, usize), [Option<f64>; 2]> = BTreeMap::new();
        let file_index = |p: &str| inputs.embeddings.iter().position(|e| path_str(e) == p).unwrap_or(0);
        let spec_index = |t: &str| specs.iter().position(|s| s.name == t).unwrap_or(0);
        for r in &rows {
            let slot = grouped.entry((file_index(&r.embeddings), spec_index(&r.test))).or_default();
            slot[usize::from(r.level == Level::Sense)] = Some(r.result.effect_size);
        }
        for ((fi, si), [word, sense]) in grouped {
            let store_dim = rows
                .iter()
                .find(|r| r.embeddings == path_str(&inputs.embeddings[fi]))
                .map(|r| r.dim)
                .unwrap_or(0);
            side.rows.push(vec![
                path_str(&inputs.embeddings[fi]).into(),
                store_dim.into(),
                specs[si].name.clone().into(),
                word.into(),
                sense.into(),
            ]);
        }
        report.tables.push(side);
    }

    report.results = json!({ "weat": to_value(&rows) });
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct WatInputs {
    pub graph: PathBuf,
    pub seeds: PathBuf,
    pub embeddings: Vec<PathBuf>,
    pub levels: Vec<Level>,
    pub alpha: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub seed: u64,
}

/// Propagates gender mass over the graph and correlates node biases with
/// embedding gender scores for every embedding file and level.
pub fn wat_report(inputs: &WatInputs) -> Result<(Report, GenderMass)> {
    let graph = AssociationGraph::load(&inputs.graph, &inputs.seeds)?;
    let mass = propagation::propagate(&graph, inputs.alpha, inputs.tol, inputs.max_iters)?;
    let mut report = Report::new(
        "wat",
        inputs.seed,
        json!({
            "graph": path_str(&inputs.graph),
            "seeds": path_str(&inputs.seeds),
            "embeddings": inputs.embeddings.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
            "levels": levels_value(&inputs.levels),
            "alpha": inputs.alpha,
            "tol": inputs.tol,
            "max_iters": inputs.max_iters,
            "epsilon": inputs.epsilon,
        }),
    );
    if !mass.converged {
        report.warnings.push(format!(
            "propagation did not converge within {} iterations",
            inputs.max_iters
        ));
    }

    let mut table = Table::new("WAT", &["embeddings", "dim", "level", "pearson_r", "n_common"]);
    let mut correlations = Vec::new();
    for path in &inputs.embeddings {
        let store = load_store(path)?;
        for &level in &inputs.levels {
            let c = propagation::wat_correlation(&graph, &mass, &store, level, inputs.epsilon)
                .map_err(|e| e.within(format!("{}: {level} level", path.display())))?;
            table.rows.push(vec![
                path_str(path).into(),
                store.dim().into(),
                level.as_str().into(),
                c.pearson_r.into(),
                c.n_common.into(),
            ]);
            correlations.push(json!({
                "embeddings": path_str(path),
                "dim": store.dim(),
                "level": level,
                "pearson_r": c.pearson_r,
                "n_common": c.n_common,
            }));
        }
    }
    report.tables.push(table);
    report.results = json!({
        "nodes": graph.nodes().len(),
        "seed_pairs": graph.seeds().len(),
        "iterations": mass.iterations,
        "converged": mass.converged,
        "correlations": correlations,
    });
    Ok((report, mass))
}

/// Tab-separated `word, b_m, b_f, bias` per node in sorted node order.
pub fn write_masses<W: Write>(mass: &GenderMass, epsilon: f64, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "word\tb_m\tb_f\tbias")?;
    for (word, &(bm, bf)) in mass.nodes.iter().zip(&mass.mass) {
        let bias = ((bm + epsilon) / (bf + epsilon)).ln();
        writeln!(out, "{word}\t{bm:?}\t{bf:?}\t{bias:?}")?;
    }
    Ok(())
}

/// Expands the configuration, writes the dataset JSONL and reports its
/// statistics and validation result. Violations are warnings.
pub fn gen_sssb_report(config_path: Option<&Path>, dataset_out: &Path, seed: u64) -> Result<Report> {
    let config = match config_path {
        Some(p) => SssbConfig::load(p)?,
        None => SssbConfig::shipped(),
    };
    let dataset = sssb::expand(&config)?;
    sssb::emit(&dataset, dataset_out)?;
    let validation = sssb::validate(&dataset);
    let statistics = sssb::config_statistics(&config)?;
    let expected = sssb::expected_pair_counts(&config)?;

    let mut report = Report::new(
        "gen-sssb",
        seed,
        json!({
            "config": config_path.map(path_str).unwrap_or_else(|| "<shipped>".to_string()),
            "dataset": path_str(dataset_out),
        }),
    );
    if !validation.is_clean() {
        report
            .warnings
            .push(format!("{} validation violations", validation.violations.len()));
    }

    let mut stats = Table::new(
        "SSSB statistics",
        &["category", "pleasant", "unpleasant", "targets", "templates", "pairs", "sentences"],
    );
    for (cat, s) in &statistics {
        stats.rows.push(vec![
            cat.clone().into(),
            s.pleasant_words.into(),
            s.unpleasant_words.into(),
            s.target_words.into(),
            s.templates.into(),
            s.test_case_pairs.into(),
            s.test_case_sentences.into(),
        ]);
    }
    report.tables.push(stats);

    let mut counts = Table::new(
        "SSSB pairs by sense type",
        &["category", "sense_type", "pairs", "sense_keys", "neutral_pairs"],
    );
    for (cat, c) in &validation.counts {
        for (sense_type, n) in &c.by_sense_type {
            counts.rows.push(vec![
                cat.clone().into(),
                sense_type.clone().into(),
                n.pairs.into(),
                n.sense_keys.into(),
                n.neutral_pairs.into(),
            ]);
        }
    }
    report.tables.push(counts);

    if !validation.is_clean() {
        let mut v = Table::new("SSSB violations", &["pair_id", "kind", "message"]);
        for x in &validation.violations {
            v.rows
                .push(vec![x.pair_id.clone().into(), x.kind.clone().into(), x.message.clone().into()]);
        }
        report.tables.push(v);
    }

    report.results = json!({
        "total_pairs": dataset.len(),
        "expected_pairs": expected.iter().map(|(_, n)| n).sum::<usize>(),
        "pairs_per_template": expected.into_iter().collect::<BTreeMap<_, _>>(),
        "statistics": statistics,
        "validation": validation,
    });
    Ok(report)
}

fn aul_table(title: &str, section: &AulSection) -> Table {
    let mut t = Table::new(title, &["group", "pairs", "stereo_higher", "ties", "aul"]);
    let mut push = |name: &str, s: &mlm::AulScore| {
        t.rows.push(vec![
            name.into(),
            s.n_pairs.into(),
            s.n_stereo_higher.into(),
            s.n_ties.into(),
            s.score.into(),
        ])
    };
    push("overall", &section.overall);
    for (g, s) in &section.per_group {
        push(g, s);
    }
    t
}

/// Joins scores to the dataset and reports AUL overall and per group,
/// with neutral-expectation pairs in their own section.
pub fn aul_report(dataset: &Path, scores: &Path, grouping: Option<Grouping>, seed: u64) -> Result<Report> {
    let (pairs, validation) = sssb::ingest(dataset)?;
    let records = mlm::load_scores(scores)?;
    let joined = mlm::join_scores(&pairs, &records)?;
    let result = mlm::aul(&joined.pairs, grouping)?;

    let mut report = Report::new(
        "aul",
        seed,
        json!({
            "dataset": path_str(dataset),
            "scores": path_str(scores),
            "grouping": grouping,
        }),
    );
    if !validation.is_clean() {
        report
            .warnings
            .push(format!("dataset has {} validation violations", validation.violations.len()));
    }
    if !joined.orphans.is_empty() {
        report.warnings.push(format!(
            "{} score records match no dataset pair (first: {})",
            joined.orphans.len(),
            joined.orphans[0]
        ));
    }
    if let Some(s) = &result.standard {
        report.tables.push(aul_table("AUL", s));
    }
    if let Some(s) = &result.neutral {
        report.tables.push(aul_table("AUL, neutral-expectation pairs", s));
    }
    report.results = json!({
        "n_pairs": joined.pairs.len(),
        "n_records": records.len(),
        "orphans": joined.orphans,
        "aul": result,
    });
    Ok(report)
}

/// Parses a term given as a surface word or as a sense key.
pub fn parse_term(raw: &str) -> Term {
    match crate::embedstore::SenseKey::parse(raw) {
        Some(key) => Term::with_senses(key.lemma(), [raw]),
        None => Term::new(raw),
    }
}

/// Reads one term per line (`#` comments and blank lines skipped).
pub fn read_terms(path: &Path) -> Result<Vec<Term>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(parse_term)
        .collect())
}

#[derive(Debug, Clone)]
pub struct GenderInputs {
    pub embeddings: Vec<PathBuf>,
    /// `None` selects the shipped pair list.
    pub pairs: Option<PathBuf>,
    pub terms: Vec<Term>,
    pub levels: Vec<Level>,
    pub seed: u64,
}

/// Gender-direction cosine per term, one table per embedding file. At sense
/// level a bare word expands to one row per sense in the store.
pub fn gender_report(inputs: &GenderInputs) -> Result<Report> {
    let pairs = match &inputs.pairs {
        Some(p) => {
            let f = File::open(p).map_err(|e| Error::io(p, e))?;
            propagation::read_pairs(f, &path_str(p))?
        }
        None => propagation::read_pairs(DEFAULT_GENDER_PAIRS.as_bytes(), "<shipped gender pairs>")?,
    };
    let pairs: Vec<(Term, Term)> = pairs.into_iter().map(|(m, f)| (Term::new(m), Term::new(f))).collect();
    if inputs.terms.is_empty() {
        return Err(Error::InvalidArgument("no terms given".into()));
    }

    let mut report = Report::new(
        "gender",
        inputs.seed,
        json!({
            "embeddings": inputs.embeddings.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
            "pairs": inputs.pairs.as_deref().map(path_str).unwrap_or_else(|| "<shipped>".to_string()),
            "levels": levels_value(&inputs.levels),
            "terms": inputs.terms.iter().map(|t| t.surface.clone()).collect::<Vec<_>>(),
        }),
    );

    let mut results = Vec::new();
    for path in &inputs.embeddings {
        let store = load_store(path)?;
        let (usable, skipped): (Vec<_>, Vec<_>) = pairs
            .iter()
            .cloned()
            .partition(|(m, f)| store.word_vector(&m.surface).is_ok() && store.word_vector(&f.surface).is_ok());
        if !skipped.is_empty() {
            let names: Vec<String> = skipped.iter().map(|(m, f)| format!("{}/{}", m.surface, f.surface)).collect();
            report.warnings.push(format!(
                "{}: skipped gender pairs missing from the store: {}",
                path.display(),
                names.join(", ")
            ));
        }
        let direction = assoc::gender_direction(&usable, &store).map_err(|e| e.within(path.display().to_string()))?;
        let mut table = Table::new(
            format!("gender cosine: {} (dim {})", path.display(), store.dim()),
            &["level", "term", "sense_key", "cosine"],
        );
        let mut rows = Vec::new();
        for &level in &inputs.levels {
            let mut seen_words = Vec::new();
            for term in &inputs.terms {
                let expanded: Vec<(Term, Option<String>)> = match level {
                    Level::Word => {
                        if seen_words.contains(&term.surface) {
                            continue;
                        }
                        seen_words.push(term.surface.clone());
                        vec![(Term::new(term.surface.as_str()), None)]
                    }
                    Level::Sense => match &term.senses {
                        Some(keys) => keys
                            .iter()
                            .map(|k| (Term::with_senses(term.surface.as_str(), [k.as_str()]), Some(k.clone())))
                            .collect(),
                        None => {
                            let senses = store.senses_of(&term.surface);
                            if senses.is_empty() {
                                return Err(Error::NoSenses(term.surface.clone())
                                    .within(path.display().to_string()));
                            }
                            senses
                                .into_iter()
                                .map(|(k, _)| {
                                    (Term::with_senses(term.surface.as_str(), [k.raw()]), Some(k.raw().to_string()))
                                })
                                .collect()
                        }
                    },
                };
                for (t, key) in expanded {
                    let cos = assoc::gender_cosine(&t, &direction, level, &store)
                        .map_err(|e| e.within(format!("{}: term `{}`", path.display(), t.surface)))?;
                    table.rows.push(vec![
                        level.as_str().into(),
                        t.surface.clone().into(),
                        key.clone().into(),
                        cos.into(),
                    ]);
                    rows.push(json!({ "level": level, "term": t.surface, "sense_key": key, "cosine": cos }));
                }
            }
        }
        report.tables.push(table);
        results.push(json!({
            "embeddings": path_str(path),
            "dim": store.dim(),
            "pairs_used": direction.pairs_used,
            "rows": rows,
        }));
    }
    report.results = json!({ "files": results });
    Ok(report)
}
