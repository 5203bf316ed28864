//! Sense-sensitive social bias (SSSB) dataset: template expansion,
//! validation and JSONL I/O.
//!
//! A configuration holds templates and named lexicons. Each template fills
//! `{slot}` placeholders from one lexicon and alternates a single contrast
//! slot to produce a stereotypical / anti-stereotypical sentence pair:
//!
//! * `attribute` contrast: the unpleasant filler gives the stereotypical
//!   sentence, the pleasant filler the anti-stereotypical one.
//! * `gender` contrast: the male and female fillers of every gender-family
//!   slot (`{gender}`, `{possessive}`, ...) are swapped. With a pleasant (or
//!   no) attribute the occupation's stereotyped gender is the stereotypical
//!   side; with an unpleasant attribute the direction reverses.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embedstore::SenseKey;
use crate::error::{Error, Result};

pub const TARGET_SLOT: &str = "target";
pub const ATTRIBUTE_SLOT: &str = "attribute";
pub const GENDER_SLOT: &str = "gender";

/// The configuration shipped with the toolkit.
pub const DEFAULT_CONFIG: &str = include_str!("../data/sssb.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    NationalityLanguage,
    RaceColour,
    NounVerb,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::NationalityLanguage, Category::RaceColour, Category::NounVerb];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::NationalityLanguage => "nationality-language",
            Category::RaceColour => "race-colour",
            Category::NounVerb => "noun-verb",
        }
    }

    pub fn sense_types(self) -> [&'static str; 2] {
        match self {
            Category::NationalityLanguage => ["nationality", "language"],
            Category::RaceColour => ["race", "colour"],
            Category::NounVerb => ["noun", "verb"],
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Every pleasant attribute against every unpleasant one.
    #[default]
    Cross,
    /// Pleasant attribute `i` against unpleasant attribute `i`.
    Matched,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    Standard,
    /// An unbiased model should prefer neither sentence.
    NeutralExpectation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn other(self) -> Gender {
        match self {
            Gender::Male => Gender::Female,
            Gender::Female => Gender::Male,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub id: String,
    pub category: Category,
    pub sense_type: String,
    /// Name of the lexicon in [`SssbConfig::lexicons`] supplying fillers.
    pub lexicon: String,
    pub pattern: String,
    pub contrast_slot: String,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default)]
    pub orientation: Orientation,
    /// Restricts the template to these target surfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub surface: String,
    /// Sense key per sense type the target participates in.
    pub sense_keys: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stereotyped_gender: Option<Gender>,
}

/// Male and female fillers for every gender-family slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenderTerms {
    pub male: BTreeMap<String, String>,
    pub female: BTreeMap<String, String>,
}

impl GenderTerms {
    fn side(&self, g: Gender) -> &BTreeMap<String, String> {
        match g {
            Gender::Male => &self.male,
            Gender::Female => &self.female,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub targets: Vec<Target>,
    #[serde(default)]
    pub pleasant: Vec<String>,
    #[serde(default)]
    pub unpleasant: Vec<String>,
    #[serde(default)]
    pub gender_terms: Vec<GenderTerms>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SssbConfig {
    pub templates: Vec<Template>,
    pub lexicons: BTreeMap<String, Lexicon>,
}

impl SssbConfig {
    pub fn shipped() -> SssbConfig {
        serde_json::from_str(DEFAULT_CONFIG).expect("shipped SSSB config parses")
    }

    pub fn from_json(text: &str, source: &str) -> Result<SssbConfig> {
        serde_json::from_str(text).map_err(|e| Error::Json {
            path: source.to_string(),
            source: e,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SssbConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SssbConfig::from_json(&text, &path.display().to_string())
    }
}

/// The alternated slot and its fillers on each side of a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contrast {
    pub slot: String,
    pub stereo: BTreeMap<String, String>,
    pub anti: BTreeMap<String, String>,
}

/// One stereo/anti sentence pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCasePair {
    pub pair_id: String,
    pub category: String,
    pub sense_type: String,
    pub sense_key: String,
    pub stereo: String,
    pub anti: String,
    pub contrast: Contrast,
    #[serde(default)]
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(String),
}

fn parse_pattern(pattern: &str) -> Result<Vec<Segment>> {
    let mut segments = Vec::new();
    let mut rest = pattern;
    while let Some(open) = rest.find(['{', '}']) {
        if rest.as_bytes()[open] == b'}' {
            return Err(Error::Config(format!("unbalanced `}}` in pattern `{pattern}`")));
        }
        let close = rest[open..]
            .find('}')
            .map(|c| open + c)
            .ok_or_else(|| Error::Config(format!("unclosed `{{` in pattern `{pattern}`")))?;
        let name = &rest[open + 1..close];
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config(format!("bad slot name `{name}` in pattern `{pattern}`")));
        }
        if open > 0 {
            segments.push(Segment::Text(rest[..open].to_string()));
        }
        segments.push(Segment::Slot(name.to_string()));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest.to_string()));
    }
    Ok(segments)
}

fn starts_with_vowel(s: &str) -> bool {
    s.chars()
        .next()
        .is_some_and(|c| matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u'))
}

/// Substitutes slot values, turns an indefinite article `a` before a
/// vowel-initial filler into `an`, and capitalizes the first character.
fn fill(segments: &[Segment], values: &BTreeMap<&str, &str>) -> String {
    let mut out = String::new();
    for seg in segments {
        match seg {
            Segment::Text(t) => out.push_str(t),
            Segment::Slot(name) => {
                let value = values[name.as_str()];
                let before_article = out.len() >= 2 && out.ends_with("a ") && {
                    let head = &out[..out.len() - 2];
                    head.is_empty() || head.ends_with(' ')
                } || out == "A ";
                if before_article && starts_with_vowel(value) {
                    out.insert(out.len() - 1, 'n');
                }
                out.push_str(value);
            }
        }
    }
    let mut chars = out.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => out,
    }
}

fn slug(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join("-").to_lowercase()
}

/// A template checked against its lexicon and ready to expand.
struct Prepared<'c> {
    template: &'c Template,
    lexicon: &'c Lexicon,
    segments: Vec<Segment>,
    slots: BTreeSet<String>,
    targets: Vec<&'c Target>,
}

impl Prepared<'_> {
    fn has_attribute(&self) -> bool {
        self.slots.contains(ATTRIBUTE_SLOT)
    }

    fn gender_slots(&self) -> impl Iterator<Item = &str> {
        self.slots
            .iter()
            .map(String::as_str)
            .filter(|s| *s != TARGET_SLOT && *s != ATTRIBUTE_SLOT)
    }

    fn pair_count(&self) -> usize {
        let lex = self.lexicon;
        let per_target = match (self.template.contrast_slot.as_str(), self.template.pairing) {
            (ATTRIBUTE_SLOT, Pairing::Cross) => lex.pleasant.len() * lex.unpleasant.len(),
            (ATTRIBUTE_SLOT, Pairing::Matched) => lex.pleasant.len().min(lex.unpleasant.len()),
            _ => {
                let attrs = if self.has_attribute() {
                    lex.pleasant.len() + lex.unpleasant.len()
                } else {
                    1
                };
                attrs * lex.gender_terms.len()
            }
        };
        self.targets.len() * per_target
    }
}

fn prepare<'c>(template: &'c Template, config: &'c SssbConfig) -> Result<Prepared<'c>> {
    let fail = |msg: String| Err(Error::Config(format!("template `{}`: {msg}", template.id)));
    if !template.category.sense_types().contains(&template.sense_type.as_str()) {
        return fail(format!(
            "sense type `{}` does not belong to category {}",
            template.sense_type, template.category
        ));
    }
    let Some(lexicon) = config.lexicons.get(&template.lexicon) else {
        return fail(format!("unknown lexicon `{}`", template.lexicon));
    };

    let segments = parse_pattern(&template.pattern)?;
    let mut slots = BTreeSet::new();
    for seg in &segments {
        if let Segment::Slot(name) = seg {
            if !slots.insert(name.clone()) {
                return fail(format!("slot `{{{name}}}` appears more than once"));
            }
        }
    }
    if !slots.contains(TARGET_SLOT) {
        return fail("pattern has no {target} slot".into());
    }
    if !slots.contains(&template.contrast_slot) {
        return fail(format!("contrast slot `{}` is not in the pattern", template.contrast_slot));
    }

    let targets: Vec<&Target> = match &template.targets {
        None => lexicon.targets.iter().collect(),
        Some(names) => names
            .iter()
            .map(|n| {
                lexicon
                    .targets
                    .iter()
                    .find(|t| &t.surface == n)
                    .ok_or_else(|| Error::Config(format!("template `{}`: unknown target `{n}`", template.id)))
            })
            .collect::<Result<_>>()?,
    };
    if targets.is_empty() {
        return fail(format!("lexicon `{}` has no targets", template.lexicon));
    }
    for t in &targets {
        match t.sense_keys.get(&template.sense_type) {
            None => {
                return fail(format!(
                    "target `{}` has no sense key for sense type `{}`",
                    t.surface, template.sense_type
                ))
            }
            Some(key) if !SenseKey::is_well_formed(key) => {
                return fail(format!("target `{}` has malformed sense key `{key}`", t.surface))
            }
            Some(_) => {}
        }
    }
    if let Some(word) = lexicon.pleasant.iter().find(|w| lexicon.unpleasant.contains(w)) {
        return fail(format!("`{word}` is both pleasant and unpleasant"));
    }

    let prepared = Prepared {
        template,
        lexicon,
        segments,
        slots,
        targets,
    };

    match template.contrast_slot.as_str() {
        ATTRIBUTE_SLOT => {
            if let Some(slot) = prepared.gender_slots().next() {
                return fail(format!("slot `{{{slot}}}` cannot be resolved in an attribute-contrast template"));
            }
            if lexicon.pleasant.is_empty() || lexicon.unpleasant.is_empty() {
                return fail(format!(
                    "lexicon `{}` needs pleasant and unpleasant attributes",
                    template.lexicon
                ));
            }
        }
        GENDER_SLOT => {
            if lexicon.gender_terms.is_empty() {
                return fail(format!("lexicon `{}` has no gender terms", template.lexicon));
            }
            for slot in prepared.gender_slots() {
                for terms in &lexicon.gender_terms {
                    if !terms.male.contains_key(slot) || !terms.female.contains_key(slot) {
                        return fail(format!("gender terms do not fill slot `{{{slot}}}`"));
                    }
                }
            }
            if prepared.has_attribute() && lexicon.pleasant.is_empty() && lexicon.unpleasant.is_empty() {
                return fail(format!("lexicon `{}` has no attributes", template.lexicon));
            }
            if let Some(t) = prepared.targets.iter().find(|t| t.stereotyped_gender.is_none()) {
                return fail(format!("target `{}` has no stereotyped gender", t.surface));
            }
        }
        other => return fail(format!("unsupported contrast slot `{other}`")),
    }
    Ok(prepared)
}

fn prepare_all(config: &SssbConfig) -> Result<Vec<Prepared<'_>>> {
    let mut ids = HashSet::new();
    for t in &config.templates {
        if !ids.insert(t.id.as_str()) {
            return Err(Error::Config(format!("duplicate template id `{}`", t.id)));
        }
    }
    config.templates.iter().map(|t| prepare(t, config)).collect()
}

/// Number of pairs each template contributes under its pairing policy:
///
/// * attribute/cross: `targets × |pleasant| × |unpleasant|`
/// * attribute/matched: `targets × min(|pleasant|, |unpleasant|)`
/// * gender: `targets × (|pleasant| + |unpleasant|, or 1 without an
///   attribute slot) × |gender_terms|`
pub fn expected_pair_counts(config: &SssbConfig) -> Result<Vec<(String, usize)>> {
    Ok(prepare_all(config)?
        .iter()
        .map(|p| (p.template.id.clone(), p.pair_count()))
        .collect())
}

/// Deterministic expansion of every template, in configuration order.
pub fn expand(config: &SssbConfig) -> Result<Vec<TestCasePair>> {
    let mut out = Vec::new();
    for prepared in prepare_all(config)? {
        expand_template(&prepared, &mut out);
    }
    Ok(out)
}

fn expand_template(p: &Prepared<'_>, out: &mut Vec<TestCasePair>) {
    let tpl = p.template;
    let lex = p.lexicon;
    for target in &p.targets {
        let sense_key = target.sense_keys[&tpl.sense_type].clone();
        let mut counter = 0usize;
        let mut push = |stereo: String, anti: String, contrast: Contrast| {
            counter += 1;
            out.push(TestCasePair {
                pair_id: format!("{}-{}-{:03}", tpl.id, slug(&target.surface), counter),
                category: tpl.category.as_str().to_string(),
                sense_type: tpl.sense_type.clone(),
                sense_key: sense_key.clone(),
                stereo,
                anti,
                contrast,
                orientation: tpl.orientation,
            });
        };

        if tpl.contrast_slot == ATTRIBUTE_SLOT {
            let combos: Vec<(&String, &String)> = match tpl.pairing {
                Pairing::Cross => lex
                    .pleasant
                    .iter()
                    .flat_map(|pl| lex.unpleasant.iter().map(move |un| (pl, un)))
                    .collect(),
                Pairing::Matched => lex.pleasant.iter().zip(&lex.unpleasant).collect(),
            };
            for (pleasant, unpleasant) in combos {
                let sentence = |attr: &str| {
                    let values = BTreeMap::from([(TARGET_SLOT, target.surface.as_str()), (ATTRIBUTE_SLOT, attr)]);
                    fill(&p.segments, &values)
                };
                let contrast = Contrast {
                    slot: ATTRIBUTE_SLOT.to_string(),
                    stereo: BTreeMap::from([(ATTRIBUTE_SLOT.to_string(), unpleasant.clone())]),
                    anti: BTreeMap::from([(ATTRIBUTE_SLOT.to_string(), pleasant.clone())]),
                };
                push(sentence(unpleasant), sentence(pleasant), contrast);
            }
        } else {
            let stereotyped = target.stereotyped_gender.expect("checked in prepare");
            // (attribute, is_pleasant); one unattributed entry when the pattern has no attribute slot
            let attributes: Vec<(Option<&String>, bool)> = if p.has_attribute() {
                lex.pleasant
                    .iter()
                    .map(|a| (Some(a), true))
                    .chain(lex.unpleasant.iter().map(|a| (Some(a), false)))
                    .collect()
            } else {
                vec![(None, true)]
            };
            for (attribute, pleasant) in attributes {
                for terms in &lex.gender_terms {
                    let stereo_gender = if pleasant { stereotyped } else { stereotyped.other() };
                    let side = |g: Gender| {
                        let mut values: BTreeMap<&str, &str> = BTreeMap::new();
                        values.insert(TARGET_SLOT, &target.surface);
                        if let Some(a) = attribute {
                            values.insert(ATTRIBUTE_SLOT, a);
                        }
                        let fillers: BTreeMap<String, String> = p
                            .gender_slots()
                            .map(|s| (s.to_string(), terms.side(g)[s].clone()))
                            .collect();
                        for s in p.gender_slots() {
                            values.insert(s, &terms.side(g)[s]);
                        }
                        (fill(&p.segments, &values), fillers)
                    };
                    let (stereo, stereo_fill) = side(stereo_gender);
                    let (anti, anti_fill) = side(stereo_gender.other());
                    let contrast = Contrast {
                        slot: GENDER_SLOT.to_string(),
                        stereo: stereo_fill,
                        anti: anti_fill,
                    };
                    push(stereo, anti, contrast);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub pair_id: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub pairs: usize,
    pub sentences: usize,
    pub sense_keys: usize,
    pub neutral_pairs: usize,
    pub by_sense_type: BTreeMap<String, SenseTypeCounts>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SenseTypeCounts {
    pub pairs: usize,
    pub sense_keys: usize,
    pub neutral_pairs: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub total_pairs: usize,
    pub violations: Vec<Violation>,
    pub counts: BTreeMap<String, CategoryCounts>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn normalize_token(token: &str) -> String {
    token.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase()
}

fn value_tokens(values: &BTreeMap<String, String>) -> HashSet<String> {
    values
        .values()
        .flat_map(|v| v.split_whitespace().map(normalize_token))
        .collect()
}

fn is_article_variant(a: &str, b: &str) -> bool {
    let (a, b) = (a.to_lowercase(), b.to_lowercase());
    (a == "a" && b == "an") || (a == "an" && b == "a")
}

/// True when the sentences differ only where the contrast fillers sit.
fn contrast_confined(pair: &TestCasePair) -> bool {
    let s: Vec<&str> = pair.stereo.split_whitespace().collect();
    let a: Vec<&str> = pair.anti.split_whitespace().collect();
    let sv = value_tokens(&pair.contrast.stereo);
    let av = value_tokens(&pair.contrast.anti);
    let differs_ok = |x: &str, y: &str| {
        x == y || is_article_variant(x, y) || (sv.contains(&normalize_token(x)) && av.contains(&normalize_token(y)))
    };
    if s.len() == a.len() && s.iter().zip(&a).all(|(x, y)| differs_ok(x, y)) {
        return true;
    }
    let prefix = s.iter().zip(&a).take_while(|(x, y)| x == y).count();
    let max_suffix = s.len().min(a.len()) - prefix;
    let suffix = s
        .iter()
        .rev()
        .zip(a.iter().rev())
        .take(max_suffix)
        .take_while(|(x, y)| x == y)
        .count();
    let mid_s = &s[prefix..s.len() - suffix];
    let mid_a = &a[prefix..a.len() - suffix];
    mid_s.iter().all(|t| sv.contains(&normalize_token(t))) && mid_a.iter().all(|t| av.contains(&normalize_token(t)))
}

/// Checks pair invariants and tallies per-category counts. Never fails;
/// problems are listed as violations.
pub fn validate(dataset: &[TestCasePair]) -> ValidationReport {
    let mut report = ValidationReport {
        total_pairs: dataset.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    let mut keys: BTreeMap<(&str, Option<&str>), BTreeSet<&str>> = BTreeMap::new();

    for (index, pair) in dataset.iter().enumerate() {
        let mut flag = |kind: &str, message: String| {
            report.violations.push(Violation {
                index,
                pair_id: pair.pair_id.clone(),
                kind: kind.to_string(),
                message,
            })
        };
        if pair.pair_id.is_empty() {
            flag("missing pair_id", "pair_id is empty".into());
        } else if !seen.insert(pair.pair_id.as_str()) {
            flag("duplicate pair_id", format!("pair_id `{}` occurs more than once", pair.pair_id));
        }
        if !SenseKey::is_well_formed(&pair.sense_key) {
            flag("malformed sense key", format!("`{}` is not a WordNet sense key", pair.sense_key));
        }
        match Category::parse(&pair.category) {
            None => flag("unknown category", format!("category `{}` is not an SSSB category", pair.category)),
            Some(c) if !c.sense_types().contains(&pair.sense_type.as_str()) => flag(
                "inconsistent sense type",
                format!("sense type `{}` does not belong to category {c}", pair.sense_type),
            ),
            Some(_) => {}
        }
        if pair.stereo.trim().is_empty() || pair.anti.trim().is_empty() {
            flag("empty sentence", "stereo or anti sentence is empty".into());
        } else if pair.stereo == pair.anti {
            flag("degenerate pair", "stereo and anti sentences are identical".into());
        } else if !contrast_confined(pair) {
            flag(
                "contrast not confined",
                format!("sentences differ outside the `{}` slot", pair.contrast.slot),
            );
        }

        let neutral = usize::from(pair.orientation == Orientation::NeutralExpectation);
        let counts = report.counts.entry(pair.category.clone()).or_default();
        counts.pairs += 1;
        counts.sentences += 2;
        counts.neutral_pairs += neutral;
        let by_type = counts.by_sense_type.entry(pair.sense_type.clone()).or_default();
        by_type.pairs += 1;
        by_type.neutral_pairs += neutral;
        keys.entry((&pair.category, None)).or_default().insert(&pair.sense_key);
        keys.entry((&pair.category, Some(&pair.sense_type)))
            .or_default()
            .insert(&pair.sense_key);
    }
    for ((category, sense_type), set) in keys {
        let c = report.counts.get_mut(category).expect("category counted");
        match sense_type {
            None => c.sense_keys = set.len(),
            Some(t) => c.by_sense_type.get_mut(t).expect("sense type counted").sense_keys = set.len(),
        }
    }
    report
}

/// Per-category summary of a configuration in the layout of the dataset
/// statistics table: lexicon sizes, templates, and generated test cases.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CategoryStatistics {
    pub pleasant_words: usize,
    pub unpleasant_words: usize,
    pub target_words: usize,
    pub templates: usize,
    pub test_case_pairs: usize,
    pub test_case_sentences: usize,
}

pub fn config_statistics(config: &SssbConfig) -> Result<BTreeMap<String, CategoryStatistics>> {
    let prepared = prepare_all(config)?;
    let mut out: BTreeMap<String, CategoryStatistics> = BTreeMap::new();
    let mut words: BTreeMap<Category, [BTreeSet<&str>; 3]> = BTreeMap::new();
    for p in &prepared {
        let cat = p.template.category;
        let stats = out.entry(cat.as_str().to_string()).or_default();
        stats.templates += 1;
        stats.test_case_pairs += p.pair_count();
        stats.test_case_sentences += 2 * p.pair_count();
        let sets = words.entry(cat).or_default();
        if p.has_attribute() {
            sets[0].extend(p.lexicon.pleasant.iter().map(String::as_str));
            sets[1].extend(p.lexicon.unpleasant.iter().map(String::as_str));
        }
        sets[2].extend(p.targets.iter().map(|t| t.surface.as_str()));
    }
    for (cat, [pleasant, unpleasant, targets]) in words {
        let stats = out.get_mut(cat.as_str()).expect("category present");
        stats.pleasant_words = pleasant.len();
        stats.unpleasant_words = unpleasant.len();
        stats.target_words = targets.len();
    }
    Ok(out)
}

/// Writes one JSON object per line.
pub fn emit(dataset: &[TestCasePair], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_jsonl(dataset, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<W: Write>(dataset: &[TestCasePair], out: &mut W) -> std::io::Result<()> {
    for pair in dataset {
        serde_json::to_writer(&mut *out, pair)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: std::io::Read>(reader: R, source: &str) -> Result<Vec<TestCasePair>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: TestCasePair =
            serde_json::from_str(&line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        out.push(pair);
    }
    Ok(out)
}

/// Reads a dataset file and re-validates it.
pub fn ingest(path: impl AsRef<Path>) -> Result<(Vec<TestCasePair>, ValidationReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let dataset = read_jsonl(file, &path.display().to_string())?;
    let report = validate(&dataset);
    Ok((dataset, report))
}
