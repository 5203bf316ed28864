//! Pseudo log-likelihood (PLL) and All Unmasked Likelihood (AUL) bias
//! scores computed from token log-probability files.
//!
//! Score files are JSONL, one [`ScoreRecord`] per sentence. Log-probabilities
//! are natural logs of the content tokens only; sentence boundary markers are
//! never part of a record.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sssb::{Orientation, TestCasePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Stereo,
    Anti,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Stereo => "stereo",
            Role::Anti => "anti",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sentence_id: String,
    pub role: Role,
    pub pair_id: String,
    pub tokens: Vec<String>,
    pub token_logprobs: Vec<f64>,
}

impl ScoreRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.tokens.is_empty() {
            return Err(format!("record `{}` has no tokens", self.sentence_id));
        }
        if self.tokens.len() != self.token_logprobs.len() {
            return Err(format!(
                "record `{}` has {} tokens but {} log-probabilities",
                self.sentence_id,
                self.tokens.len(),
                self.token_logprobs.len()
            ));
        }
        if let Some((i, lp)) = self
            .token_logprobs
            .iter()
            .enumerate()
            .find(|(_, lp)| !lp.is_finite() || **lp > 0.0)
        {
            return Err(format!(
                "record `{}` token {i} has log-probability {lp}; expected a finite value <= 0",
                self.sentence_id
            ));
        }
        Ok(())
    }
}

/// Mean token log-probability. The denominator is the number of scored
/// content tokens.
pub fn pll(record: &ScoreRecord) -> Result<f64> {
    record.validate().map_err(Error::InvalidArgument)?;
    let n = record.token_logprobs.len() as f64;
    Ok(record.token_logprobs.iter().sum::<f64>() / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    SenseType,
    Category,
    /// Lemma of the pair's sense key together with its sense type, e.g.
    /// `engineer/noun`.
    Lemma,
}

impl Grouping {
    pub fn as_str(self) -> &'static str {
        match self {
            Grouping::SenseType => "sense-type",
            Grouping::Category => "category",
            Grouping::Lemma => "lemma",
        }
    }

    pub fn key(self, pair: &JoinedPair) -> String {
        match self {
            Grouping::SenseType => pair.sense_type.clone(),
            Grouping::Category => pair.category.clone(),
            Grouping::Lemma => {
                let lemma = pair.sense_key.split('%').next().unwrap_or(&pair.sense_key);
                format!("{lemma}/{}", pair.sense_type)
            }
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Grouping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sense-type" | "sense_type" => Ok(Grouping::SenseType),
            "category" => Ok(Grouping::Category),
            "lemma" => Ok(Grouping::Lemma),
            other => Err(Error::InvalidArgument(format!(
                "unknown grouping `{other}` (expected sense-type, category or lemma)"
            ))),
        }
    }
}

/// AUL over one set of pairs: `100 * stereo_higher / n_pairs - 50`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AulScore {
    pub score: f64,
    pub n_pairs: usize,
    pub n_stereo_higher: usize,
    /// Pairs whose PLLs are exactly equal; these count as not stereo-higher.
    pub n_ties: usize,
}

impl AulScore {
    pub fn from_counts(n_pairs: usize, n_stereo_higher: usize, n_ties: usize) -> Result<AulScore> {
        if n_pairs == 0 {
            return Err(Error::InvalidArgument("AUL over an empty set of pairs".into()));
        }
        Ok(AulScore {
            // 100 * k / n - 50 over an integer numerator; exact negation under a role swap
            score: 50.0 * (2.0 * n_stereo_higher as f64 - n_pairs as f64) / n_pairs as f64,
            n_pairs,
            n_stereo_higher,
            n_ties,
        })
    }
}

/// AUL over `(stereo, anti)` record pairs. Both records of a pair must carry
/// the same `pair_id` and the expected roles.
pub fn aul_score(pairs: &[(&ScoreRecord, &ScoreRecord)]) -> Result<AulScore> {
    let mut higher = 0;
    let mut ties = 0;
    for (stereo, anti) in pairs {
        if stereo.pair_id != anti.pair_id {
            return Err(Error::Join {
                pair_id: stereo.pair_id.clone(),
                reason: format!("paired with a record of pair `{}`", anti.pair_id),
            });
        }
        if stereo.role != Role::Stereo || anti.role != Role::Anti {
            return Err(Error::Join {
                pair_id: stereo.pair_id.clone(),
                reason: "records are not in (stereo, anti) order".into(),
            });
        }
        let (s, a) = (pll(stereo)?, pll(anti)?);
        if s > a {
            higher += 1;
        } else if s == a {
            ties += 1;
        }
    }
    AulScore::from_counts(pairs.len(), higher, ties)
}

/// A dataset pair with both of its score records.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedPair {
    pub pair_id: String,
    pub category: String,
    pub sense_type: String,
    pub sense_key: String,
    pub orientation: Orientation,
    pub stereo: ScoreRecord,
    pub anti: ScoreRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinOutcome {
    /// In dataset order.
    pub pairs: Vec<JoinedPair>,
    /// `sentence_id`s of records whose pair is not in the dataset.
    pub orphans: Vec<String>,
}

/// Attaches exactly one stereo and one anti record to every dataset pair.
pub fn join_scores(dataset: &[TestCasePair], scores: &[ScoreRecord]) -> Result<JoinOutcome> {
    let mut by_pair: HashMap<&str, [Option<&ScoreRecord>; 2]> =
        dataset.iter().map(|p| (p.pair_id.as_str(), [None, None])).collect();
    if by_pair.len() != dataset.len() {
        let mut seen = std::collections::HashSet::new();
        let dup = dataset.iter().find(|p| !seen.insert(&p.pair_id)).expect("duplicate exists");
        return Err(Error::Join {
            pair_id: dup.pair_id.clone(),
            reason: "pair_id occurs more than once in the dataset".into(),
        });
    }
    let mut orphans = Vec::new();
    for record in scores {
        let Some(slots) = by_pair.get_mut(record.pair_id.as_str()) else {
            orphans.push(record.sentence_id.clone());
            continue;
        };
        let slot = &mut slots[record.role as usize];
        if slot.is_some() {
            return Err(Error::Join {
                pair_id: record.pair_id.clone(),
                reason: format!("duplicate {} record", record.role.as_str()),
            });
        }
        *slot = Some(record);
    }

    let mut pairs = Vec::with_capacity(dataset.len());
    for pair in dataset {
        let [stereo, anti] = by_pair[pair.pair_id.as_str()];
        let missing = |role: Role| Error::Join {
            pair_id: pair.pair_id.clone(),
            reason: format!("missing {} record", role.as_str()),
        };
        let stereo = stereo.ok_or_else(|| missing(Role::Stereo))?;
        let anti = anti.ok_or_else(|| missing(Role::Anti))?;
        pairs.push(JoinedPair {
            pair_id: pair.pair_id.clone(),
            category: pair.category.clone(),
            sense_type: pair.sense_type.clone(),
            sense_key: pair.sense_key.clone(),
            orientation: pair.orientation,
            stereo: stereo.clone(),
            anti: anti.clone(),
        });
    }
    Ok(JoinOutcome { pairs, orphans })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AulSection {
    pub overall: AulScore,
    pub per_group: BTreeMap<String, AulScore>,
}

fn records<'a>(pairs: &[&'a JoinedPair]) -> Vec<(&'a ScoreRecord, &'a ScoreRecord)> {
    pairs.iter().map(|p| (&p.stereo, &p.anti)).collect()
}

fn section(pairs: &[&JoinedPair], grouping: Option<Grouping>) -> Result<AulSection> {
    let overall = aul_score(&records(pairs))?;
    let mut per_group = BTreeMap::new();
    if let Some(g) = grouping {
        let mut groups: BTreeMap<String, Vec<&JoinedPair>> = BTreeMap::new();
        for p in pairs {
            groups.entry(g.key(p)).or_default().push(p);
        }
        for (key, members) in groups {
            per_group.insert(key, aul_score(&records(&members))?);
        }
    }
    Ok(AulSection { overall, per_group })
}

/// Standard pairs and neutral-expectation pairs are scored separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AulReport {
    pub grouping: Option<Grouping>,
    pub standard: Option<AulSection>,
    pub neutral: Option<AulSection>,
}

pub fn aul(pairs: &[JoinedPair], grouping: Option<Grouping>) -> Result<AulReport> {
    let (neutral, standard): (Vec<&JoinedPair>, Vec<&JoinedPair>) = pairs
        .iter()
        .partition(|p| p.orientation == Orientation::NeutralExpectation);
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("AUL over an empty set of pairs".into()));
    }
    let run = |ps: Vec<&JoinedPair>| -> Result<Option<AulSection>> {
        if ps.is_empty() {
            Ok(None)
        } else {
            section(&ps, grouping).map(Some)
        }
    };
    Ok(AulReport {
        grouping,
        standard: run(standard)?,
        neutral: run(neutral)?,
    })
}

pub fn read_scores<R: std::io::Read>(reader: R, source: &str) -> Result<Vec<ScoreRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        record.validate().map_err(|m| Error::parse(source, i + 1, m))?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_scores(file, &path.display().to_string())
}

pub fn write_scores<W: Write>(records: &[ScoreRecord], out: &mut W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
