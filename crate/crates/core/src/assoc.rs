//! WEAT-style association statistics at word and sense level.
//!
//! At word level each term resolves to one vector and similarity is plain
//! cosine. At sense level each term resolves to a set of candidate sense
//! vectors and the similarity of two terms is the maximum cosine over all
//! cross pairs of their candidates.

use std::borrow::Cow;
use std::fs;
use std::path::Path;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedstore::{EmbeddingStore, Level};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_EXACT: u64 = 100_000;
pub const DEFAULT_SAMPLES: u64 = 10_000;

/// A target or attribute term, optionally pinned to explicit sense keys.
///
/// Serialized as a bare string when no senses are given, otherwise as
/// `{"surface": ..., "senses": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "TermRepr", into = "TermRepr")]
pub struct Term {
    pub surface: String,
    pub senses: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TermRepr {
    Bare(String),
    Full {
        surface: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        senses: Option<Vec<String>>,
    },
}

impl From<TermRepr> for Term {
    fn from(repr: TermRepr) -> Self {
        match repr {
            TermRepr::Bare(surface) => Term { surface, senses: None },
            TermRepr::Full { surface, senses } => Term { surface, senses },
        }
    }
}

impl From<Term> for TermRepr {
    fn from(term: Term) -> Self {
        match term.senses {
            None => TermRepr::Bare(term.surface),
            senses => TermRepr::Full {
                surface: term.surface,
                senses,
            },
        }
    }
}

impl Term {
    pub fn new(surface: impl Into<String>) -> Self {
        Term {
            surface: surface.into(),
            senses: None,
        }
    }

    pub fn with_senses<S: Into<String>>(surface: impl Into<String>, senses: impl IntoIterator<Item = S>) -> Self {
        Term {
            surface: surface.into(),
            senses: Some(senses.into_iter().map(Into::into).collect()),
        }
    }

    pub(crate) fn resolve<'s>(&self, level: Level, store: &'s EmbeddingStore) -> Result<Vec<Cow<'s, [f64]>>> {
        store.term_vectors(&self.surface, level, self.senses.as_deref())
    }
}

impl From<&str> for Term {
    fn from(s: &str) -> Self {
        Term::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSpec {
    pub name: String,
    pub targets_x: Vec<Term>,
    pub targets_y: Vec<Term>,
    pub attrs_a: Vec<Term>,
    pub attrs_b: Vec<Term>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpecFile {
    One(BiasSpec),
    Many(Vec<BiasSpec>),
}

impl BiasSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidSpec {
                name: self.name.clone(),
                reason,
            })
        };
        if self.targets_x.is_empty() {
            return fail("target sets must be non-empty".into());
        }
        if self.targets_x.len() != self.targets_y.len() {
            return fail(format!(
                "target sets differ in size ({} vs {})",
                self.targets_x.len(),
                self.targets_y.len()
            ));
        }
        if self.attrs_a.is_empty() || self.attrs_b.is_empty() {
            return fail("attribute sets must be non-empty".into());
        }
        if let Some(t) = self.targets_x.iter().find(|t| self.targets_y.contains(t)) {
            return fail(format!("term `{}` appears in both target sets", t.surface));
        }
        Ok(())
    }

    /// Reads a JSON file holding one spec object or an array of specs.
    pub fn load_all(path: impl AsRef<Path>) -> Result<Vec<BiasSpec>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed: SpecFile = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.display().to_string(),
            source,
        })?;
        let specs = match parsed {
            SpecFile::One(s) => vec![s],
            SpecFile::Many(v) => v,
        };
        for spec in &specs {
            spec.validate()?;
        }
        Ok(specs)
    }

    /// The same spec with the two target sets exchanged.
    pub fn swapped_targets(&self) -> BiasSpec {
        BiasSpec {
            name: self.name.clone(),
            targets_x: self.targets_y.clone(),
            targets_y: self.targets_x.clone(),
            attrs_a: self.attrs_a.clone(),
            attrs_b: self.attrs_b.clone(),
        }
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector(" in cosine similarity".into()));
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

pub(crate) fn max_cosine(left: &[Cow<'_, [f64]>], right: &[Cow<'_, [f64]>]) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for l in left {
        for r in right {
            best = best.max(cosine(l, r)?);
        }
    }
    Ok(best)
}

/// Cosine at word level; max cosine over all candidate sense pairs at
/// sense level.
pub fn pair_similarity(t: &Term, u: &Term, level: Level, store: &EmbeddingStore) -> Result<f64> {
    max_cosine(&t.resolve(level, store)?, &u.resolve(level, store)?)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Terms resolved once so every statistic reuses the same vectors.
struct ResolvedSet<'s>(Vec<Vec<Cow<'s, [f64]>>>);

impl<'s> ResolvedSet<'s> {
    fn new(terms: &[Term], level: Level, store: &'s EmbeddingStore) -> Result<Self> {
        Ok(ResolvedSet(
            terms.iter().map(|t| t.resolve(level, store)).collect::<Result<_>>()?,
        ))
    }

    fn mean_similarity(&self, target: &[Cow<'_, [f64]>]) -> Result<f64> {
        let sims = self
            .0
            .iter()
            .map(|a| max_cosine(target, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(mean(&sims))
    }
}

fn association_resolved(target: &[Cow<'_, [f64]>], a: &ResolvedSet<'_>, b: &ResolvedSet<'_>) -> Result<f64> {
    Ok(a.mean_similarity(target)? - b.mean_similarity(target)?)
}

/// Mean similarity of `t` to `a` minus mean similarity to `b`.
pub fn association(t: &Term, a: &[Term], b: &[Term], level: Level, store: &EmbeddingStore) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("attribute sets must be non-empty".into()));
    }
    let target = t.resolve(level, store)?;
    let a = ResolvedSet::new(a, level, store)?;
    let b = ResolvedSet::new(b, level, store)?;
    association_resolved(&target, &a, &b)
}

/// Per-target association values for both target sets.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationValues {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn association_values(spec: &BiasSpec, level: Level, store: &EmbeddingStore) -> Result<AssociationValues> {
    spec.validate()?;
    let a = ResolvedSet::new(&spec.attrs_a, level, store)?;
    let b = ResolvedSet::new(&spec.attrs_b, level, store)?;
    let values = |targets: &[Term]| -> Result<Vec<f64>> {
        targets
            .iter()
            .map(|t| association_resolved(&t.resolve(level, store)?, &a, &b))
            .collect()
    };
    Ok(AssociationValues {
        x: values(&spec.targets_x)?,
        y: values(&spec.targets_y)?,
    })
}

/// Sum of X associations minus sum of Y associations.
pub fn statistic_from_values(x: &[f64], y: &[f64]) -> f64 {
    x.iter().sum::<f64>() - y.iter().sum::<f64>()
}

/// Mean gap between the groups over the population standard deviation of
/// all association values.
pub fn effect_size_from_values(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument("effect size needs two non-empty groups".into()));
    }
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let mu = mean(&all);
    let var = all.iter().map(|w| (w - mu) * (w - mu)).sum::<f64>() / all.len() as f64;
    let sd = var.sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::Degenerate(
            "association values have zero standard deviation; effect size undefined".into(),
        ));
    }
    Ok((mean(x) - mean(y)) / sd)
}

pub fn weat_statistic(spec: &BiasSpec, level: Level, store: &EmbeddingStore) -> Result<f64> {
    let v = association_values(spec, level, store)?;
    Ok(statistic_from_values(&v.x, &v.y))
}

pub fn effect_size(spec: &BiasSpec, level: Level, store: &EmbeddingStore) -> Result<f64> {
    let v = association_values(spec, level, store)?;
    effect_size_from_values(&v.x, &v.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationConfig {
    /// Enumerate exactly when the number of equal splits is at most this.
    pub max_exact: u64,
    /// Random splits drawn otherwise.
    pub samples: u64,
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig {
            max_exact: DEFAULT_MAX_EXACT,
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub p_value: f64,
    pub method: PermutationMethod,
    pub permutations_used: u64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatResult {
    pub statistic: f64,
    pub effect_size: f64,
    pub p_value: f64,
    pub method: PermutationMethod,
    pub permutations_used: u64,
    pub seed: Option<u64>,
}

/// C(n, k), or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

fn split_statistic(values: &[f64], in_x: &[bool]) -> f64 {
    let mut sx = 0.0;
    let mut sy = 0.0;
    for (v, &x) in values.iter().zip(in_x) {
        if x {
            sx += v;
        } else {
            sy += v;
        }
    }
    sx - sy
}

/// One-sided permutation test over equal-size splits of X ∪ Y: the share
/// of splits whose statistic is strictly greater than the observed one.
pub fn permutation_test(x: &[f64], y: &[f64], config: &PermutationConfig) -> Result<PermutationOutcome> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument("permutation test needs equal, non-empty groups".into()));
    }
    let n = x.len();
    let values: Vec<f64> = x.iter().chain(y).copied().collect();
    let total = values.len();
    let mut in_x = vec![false; total];
    in_x[..n].fill(true);
    let observed = split_statistic(&values, &in_x);

    let exact_count = binomial(total as u64, n as u64).filter(|&c| c <= config.max_exact);
    if let Some(count) = exact_count {
        let mut greater = 0u64;
        for combo in (0..total).combinations(n) {
            in_x.fill(false);
            for i in combo {
                in_x[i] = true;
            }
            if split_statistic(&values, &in_x) > observed {
                greater += 1;
            }
        }
        return Ok(PermutationOutcome {
            p_value: greater as f64 / count as f64,
            method: PermutationMethod::Exact,
            permutations_used: count,
            seed: None,
        });
    }

    if config.samples == 0 {
        return Err(Error::InvalidArgument("Monte-Carlo permutation test needs samples > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..total).collect();
    let mut greater = 0u64;
    for _ in 0..config.samples {
        order.shuffle(&mut rng);
        in_x.fill(false);
        for &i in &order[..n] {
            in_x[i] = true;
        }
        if split_statistic(&values, &in_x) > observed {
            greater += 1;
        }
    }
    Ok(PermutationOutcome {
        p_value: greater as f64 / config.samples as f64,
        method: PermutationMethod::MonteCarlo,
        permutations_used: config.samples,
        seed: Some(config.seed),
    })
}

pub fn permutation_pvalue(
    spec: &BiasSpec,
    level: Level,
    store: &EmbeddingStore,
    config: &PermutationConfig,
) -> Result<PermutationOutcome> {
    let v = association_values(spec, level, store)?;
    permutation_test(&v.x, &v.y, config)
}

/// Statistic, effect size, and permutation p-value in one pass.
pub fn weat(spec: &BiasSpec, level: Level, store: &EmbeddingStore, config: &PermutationConfig) -> Result<WeatResult> {
    let v = association_values(spec, level, store)?;
    let outcome = permutation_test(&v.x, &v.y, config)?;
    Ok(WeatResult {
        statistic: statistic_from_values(&v.x, &v.y),
        effect_size: effect_size_from_values(&v.x, &v.y)?,
        p_value: outcome.p_value,
        method: outcome.method,
        permutations_used: outcome.permutations_used,
        seed: outcome.seed,
    })
}

/// Mean male-minus-female difference vector over gendered word pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderDirection {
    pub vector: Vec<f64>,
    pub pairs_used: usize,
}

impl GenderDirection {
    /// True when the direction is the zero vector and cannot be used for
    /// cosine comparisons.
    pub fn is_degenerate(&self) -> bool {
        self.vector.iter().all(|&v| v == 0.0)
    }
}

pub fn gender_direction(pairs: &[(Term, Term)], store: &EmbeddingStore) -> Result<GenderDirection> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("gender direction needs at least one pair".into()));
    }
    let mut sum = vec![0.0; store.dim()];
    for (m, f) in pairs {
        let mv = store.word_vector(&m.surface)?;
        let fv = store.word_vector(&f.surface)?;
        for ((s, a), b) in sum.iter_mut().zip(mv.iter()).zip(fv.iter()) {
            *s += a - b;
        }
    }
    for s in &mut sum {
        *s /= pairs.len() as f64;
    }
    Ok(GenderDirection {
        vector: sum,
        pairs_used: pairs.len(),
    })
}

/// Cosine between a term and the gender direction; positive values lean
/// male. At sense level the term must name exactly one sense key.
pub fn gender_cosine(term: &Term, g: &GenderDirection, level: Level, store: &EmbeddingStore) -> Result<f64> {
    if g.is_degenerate() {
        return Err(Error::ZeroVector(" (gender direction)".into()));
    }
    let v = match level {
        Level::Word => store.word_vector(&term.surface)?,
        Level::Sense => match term.senses.as_deref() {
            Some([key]) => Cow::Borrowed(store.get(key).ok_or_else(|| Error::MissingSense(key.clone()))?),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "term `{}` needs exactly one explicit sense key at sense level",
                    term.surface
                )))
            }
        },
    };
    cosine(&v, &g.vector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn store(entries: &[(&str, &[f64])]) -> EmbeddingStore {
        let dim = entries[0].1.len();
        EmbeddingStore::from_entries(dim, entries.iter().map(|(k, v)| (k.to_string(), v.to_vec()))).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 0.0]), Err(Error::DimensionMismatch(1, 2))));
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 0.0]), Err(Error::ZeroVector(_))));
    }

    #[test]
    fn pair_similarity_takes_best_sense_pair() {
        let s = store(&[
            ("t%1:00:00::", &[1.0, 0.0]),
            ("t%1:00:01::", &[0.0, 1.0]),
            ("u%1:00:00::", &[1.0, 0.0]),
            ("u%1:00:01::", &[0.0, -1.0]),
        ]);
        let sim = pair_similarity(&"t".into(), &"u".into(), Level::Sense, &s).unwrap();
        assert_eq!(sim, 1.0);
    }

    #[test]
    fn pair_similarity_max_of_candidates() {
        // cosines against u: 0.2 and 0.9 by construction
        let a = [0.2, (1.0f64 - 0.04).sqrt()];
        let b = [0.9, (1.0f64 - 0.81).sqrt()];
        let s = store(&[("t%1:00:00::", &a), ("t%1:00:01::", &b), ("u", &[1.0, 0.0])]);
        let sim = pair_similarity(&"t".into(), &"u".into(), Level::Sense, &s).unwrap();
        assert!((sim - 0.9).abs() < 1e-15);
    }

    #[test]
    fn single_sense_pair_matches_word_level() {
        let s = store(&[("t%1:00:00::", &[0.3, 0.7]), ("u%1:00:00::", &[0.9, -0.1])]);
        let w = pair_similarity(&"t".into(), &"u".into(), Level::Word, &s).unwrap();
        let z = pair_similarity(&"t".into(), &"u".into(), Level::Sense, &s).unwrap();
        assert_eq!(w.to_bits(), z.to_bits());
    }

    #[test]
    fn association_examples() {
        let s = store(&[
            ("t", &[1.0, 0.0]),
            ("a", &[1.0, 0.0]),
            ("b", &[-1.0, 0.0]),
            ("d", &[1.0, 1.0]),
            ("e", &[0.0, 1.0]),
        ]);
        let a = vec![Term::new("a")];
        let b = vec![Term::new("b")];
        assert_eq!(association(&"t".into(), &a, &b, Level::Word, &s).unwrap(), 2.0);
        assert_eq!(association(&"t".into(), &a, &a, Level::Word, &s).unwrap(), 0.0);
        let e = vec![Term::new("e")];
        assert_eq!(association(&"d".into(), &a, &e, Level::Word, &s).unwrap(), 0.0);
        assert!(association(&"t".into(), &[], &b, Level::Word, &s).is_err());
    }

    #[test]
    fn statistic_and_effect_from_values() {
        assert_eq!(statistic_from_values(&[0.5, 0.5], &[-0.5, -0.5]), 2.0);
        assert_eq!(effect_size_from_values(&[0.3, 0.3, 0.3], &[-0.3, -0.3, -0.3]).unwrap(), 2.0);
        assert_eq!(effect_size_from_values(&[0.1, 0.4, -0.2], &[0.1, 0.4, -0.2]).unwrap(), 0.0);
        assert!(matches!(
            effect_size_from_values(&[0.2, 0.2], &[0.2, 0.2]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(2, 1), Some(2));
        assert_eq!(binomial(16, 8), Some(12870));
        assert_eq!(binomial(20, 10), Some(184756));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(200, 100), None);
    }

    #[test]
    fn permutation_single_pair_unique_maximum() {
        // Two splits: observed s = 2w and the swap -2w; strict > never holds.
        let out = permutation_test(&[0.7], &[-0.1], &PermutationConfig::default()).unwrap();
        assert_eq!(out.p_value, 0.0);
        assert_eq!(out.method, PermutationMethod::Exact);
        assert_eq!(out.permutations_used, 2);
        assert_eq!(out.seed, None);

        let out = permutation_test(&[-0.1], &[0.7], &PermutationConfig::default()).unwrap();
        assert_eq!(out.p_value, 0.5);
    }

    #[test]
    fn permutation_all_ties() {
        let out = permutation_test(&[0.25; 4], &[0.25; 4], &PermutationConfig::default()).unwrap();
        assert_eq!(out.p_value, 0.0);
        assert_eq!(out.permutations_used, 70);
    }

    #[test]
    fn permutation_brute_force_oracle() {
        // Independent oracle: enumerate every subset bitmask of size n.
        let x = [0.31, -0.02, 0.17, 0.05];
        let y = [0.11, -0.2, 0.08, 0.02];
        let all: Vec<f64> = x.iter().chain(&y).copied().collect();
        let observed: f64 = x.iter().sum::<f64>() - y.iter().sum::<f64>();
        let (mut greater, mut total) = (0, 0);
        for mask in 0u32..(1 << 8) {
            if mask.count_ones() != 4 {
                continue;
            }
            total += 1;
            let s: f64 = (0..8)
                .map(|i| if mask & (1 << i) != 0 { all[i] } else { -all[i] })
                .sum();
            if s > observed + 1e-12 {
                greater += 1;
            }
        }
        assert_eq!(total, 70);
        let out = permutation_test(&x, &y, &PermutationConfig::default()).unwrap();
        assert_eq!(out.p_value, greater as f64 / 70.0);
    }

    #[test]
    fn monte_carlo_mode() {
        let x = [0.3, 0.1, 0.2];
        let y = [0.0, -0.1, 0.05];
        let cfg = PermutationConfig {
            max_exact: 0,
            samples: 500,
            seed: 7,
        };
        let a = permutation_test(&x, &y, &cfg).unwrap();
        let b = permutation_test(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, PermutationMethod::MonteCarlo);
        assert_eq!(a.permutations_used, 500);
        assert_eq!(a.seed, Some(7));
        let zero = PermutationConfig { samples: 0, ..cfg };
        assert!(permutation_test(&x, &y, &zero).is_err());
    }

    #[test]
    fn spec_validation() {
        let spec = BiasSpec {
            name: "s".into(),
            targets_x: vec!["a".into(), "b".into()],
            targets_y: vec!["c".into()],
            attrs_a: vec!["p".into()],
            attrs_b: vec!["q".into()],
        };
        assert!(spec.validate().is_err());
        let spec = BiasSpec {
            targets_y: vec!["c".into(), "a".into()],
            ..spec
        };
        assert!(spec.validate().unwrap_err().to_string().contains("both target sets"));
        let spec = BiasSpec {
            targets_y: vec!["c".into(), "d".into()],
            attrs_b: vec![],
            ..spec
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn term_json_forms() {
        let terms: Vec<Term> =
            serde_json::from_str(r#"["rose", {"surface": "black", "senses": ["black%3:00:02::"]}]"#).unwrap();
        assert_eq!(terms[0], Term::new("rose"));
        assert_eq!(terms[1], Term::with_senses("black", ["black%3:00:02::"]));
        let back = serde_json::to_string(&terms).unwrap();
        assert_eq!(back, r#"["rose",{"surface":"black","senses":["black%3:00:02::"]}]"#);
    }

    #[test]
    fn gender_direction_examples() {
        let s = store(&[("m", &[1.0, 0.0]), ("f", &[0.0, 1.0])]);
        let g = gender_direction(&[("m".into(), "f".into())], &s).unwrap();
        assert_eq!(g.vector, vec![1.0, -1.0]);
        assert_eq!(g.pairs_used, 1);
        assert!(!g.is_degenerate());

        let g = gender_direction(&[("m".into(), "f".into()), ("f".into(), "m".into())], &s).unwrap();
        assert_eq!(g.vector, vec![0.0, 0.0]);
        assert!(g.is_degenerate());
        assert!(gender_cosine(&"m".into(), &g, Level::Word, &s).is_err());

        let g = gender_direction(&[("m".into(), "m".into())], &s).unwrap();
        assert!(g.is_degenerate());
        assert!(gender_direction(&[], &s).is_err());
        assert!(gender_direction(&[("m".into(), "zz".into())], &s).is_err());
    }

    #[test]
    fn gender_cosine_examples() {
        let s = store(&[
            ("he", &[1.0, 0.0, 0.0]),
            ("she", &[0.0, 1.0, 0.0]),
            ("along", &[1.0, -1.0, 0.0]),
            ("ortho", &[1.0, 1.0, 0.0]),
            ("against", &[-1.0, 1.0, 0.0]),
            ("nurse%1:18:00::", &[-2.0, 2.0, 0.0]),
            ("nurse%2:29:00::", &[0.0, 0.0, 1.0]),
        ]);
        let g = gender_direction(&[("he".into(), "she".into())], &s).unwrap();
        assert!((gender_cosine(&"along".into(), &g, Level::Word, &s).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gender_cosine(&"ortho".into(), &g, Level::Word, &s).unwrap(), 0.0);
        assert!((gender_cosine(&"against".into(), &g, Level::Word, &s).unwrap() + 1.0).abs() < 1e-15);

        let noun = Term::with_senses("nurse", ["nurse%1:18:00::"]);
        let verb = Term::with_senses("nurse", ["nurse%2:29:00::"]);
        let n = gender_cosine(&noun, &g, Level::Sense, &s).unwrap();
        let v = gender_cosine(&verb, &g, Level::Sense, &s).unwrap();
        assert!((n + 1.0).abs() < 1e-15);
        assert_eq!(v, 0.0);
        assert!(gender_cosine(&"nurse".into(), &g, Level::Sense, &s).is_err());
    }

    fn spec_for(n: usize) -> BiasSpec {
        let t = |p: &str, k: usize| (0..k).map(|i| Term::new(format!("{p}{i}"))).collect::<Vec<_>>();
        BiasSpec {
            name: "prop".into(),
            targets_x: t("x", n),
            targets_y: t("y", n),
            attrs_a: t("a", 2),
            attrs_b: t("b", 2),
        }
    }

    fn store_for(n: usize, raw: &[f64], dim: usize) -> EmbeddingStore {
        let names: Vec<String> = ["x", "y"]
            .iter()
            .flat_map(|p| (0..n).map(move |i| format!("{p}{i}")))
            .chain(["a0", "a1", "b0", "b1"].iter().map(|s| s.to_string()))
            .collect();
        EmbeddingStore::from_entries(
            dim,
            names.into_iter().enumerate().map(|(i, k)| {
                let mut v = raw[i * dim..(i + 1) * dim].to_vec();
                v[0] += 3.0; // keeps every vector away from zero
                (k, v)
            }),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn antisymmetry(raw in proptest::collection::vec(-1.0f64..1.0, 10 * 3)) {
            let s = store_for(3, &raw, 3);
            let spec = spec_for(3);
            let fwd = weat_statistic(&spec, Level::Word, &s).unwrap();
            let back = weat_statistic(&spec.swapped_targets(), Level::Word, &s).unwrap();
            prop_assert_eq!(fwd.to_bits(), (-back).to_bits());
            let t = Term::new("x0");
            let ab = association(&t, &spec.attrs_a, &spec.attrs_b, Level::Word, &s).unwrap();
            let ba = association(&t, &spec.attrs_b, &spec.attrs_a, Level::Word, &s).unwrap();
            prop_assert_eq!(ab.to_bits(), (-ba).to_bits());
        }

        #[test]
        fn power_of_two_scale_is_bit_identical(raw in proptest::collection::vec(-1.0f64..1.0, 8 * 3), exp in -8i32..8) {
            let s = store_for(2, &raw, 3);
            let scaled = s.scaled(2f64.powi(exp)).unwrap();
            let spec = spec_for(2);
            let cfg = PermutationConfig::default();
            let (Ok(r1), Ok(r2)) = (weat(&spec, Level::Sense, &s, &cfg), weat(&spec, Level::Sense, &scaled, &cfg)) else {
                return Ok(());
            };
            prop_assert_eq!(r1, r2);
        }

        #[test]
        fn arbitrary_positive_scale_is_stable(raw in proptest::collection::vec(-1.0f64..1.0, 8 * 3), k in 0.01f64..100.0) {
            let s = store_for(2, &raw, 3);
            let scaled = s.scaled(k).unwrap();
            let spec = spec_for(2);
            let a = weat_statistic(&spec, Level::Word, &s).unwrap();
            let b = weat_statistic(&spec, Level::Word, &scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn effect_size_shift_invariant(
            x in proptest::collection::vec(-1.0f64..1.0, 4),
            y in proptest::collection::vec(-1.0f64..1.0, 4),
            c in -1.0f64..1.0,
        ) {
            let Ok(e) = effect_size_from_values(&x, &y) else { return Ok(()); };
            let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
            let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
            let shifted = effect_size_from_values(&xs, &ys).unwrap();
            prop_assert!((e - shifted).abs() < 1e-9 * (1.0 + e.abs()));
        }

        #[test]
        fn effect_size_bounded_and_p_in_unit_interval(
            x in proptest::collection::vec(-2.0f64..2.0, 1..6),
            y_seed in proptest::collection::vec(-2.0f64..2.0, 6),
        ) {
            let y = &y_seed[..x.len()];
            if let Ok(e) = effect_size_from_values(&x, y) {
                // |mean gap| / pooled population sd never exceeds 2
                prop_assert!(e.abs() <= 2.0 + 1e-12);
            }
            let out = permutation_test(&x, y, &PermutationConfig::default()).unwrap();
            prop_assert!((0.0..=1.0).contains(&out.p_value));
            prop_assert_eq!(out.permutations_used, binomial(2 * x.len() as u64, x.len() as u64).unwrap());
        }
    }
}
