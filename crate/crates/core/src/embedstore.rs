//! Static word and sense embedding store.
//!
//! Files use the word2vec text layout: a `<count> <dim>` header followed by
//! one `<key> <v1> ... <vdim>` row per entry. Any key containing `%` is
//! treated as a WordNet sense key (`lemma%L:NN:NN[:...]`) and indexed under
//! its lowercased lemma; every other key is a plain word key.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resolution level for terms: sense-insensitive word vectors or the set of
/// candidate sense vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Word,
    Sense,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Word => "word",
            Level::Sense => "sense",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Level::Word),
            "sense" => Ok(Level::Sense),
            other => Err(Error::InvalidArgument(format!("unknown level `{other}`"))),
        }
    }
}

/// A WordNet sense key such as `black%3:00:02::`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SenseKey {
    raw: String,
    lemma: String,
}

impl SenseKey {
    /// Splits `raw` at its single `%`. Only the lemma part is checked here;
    /// see [`SenseKey::is_well_formed`] for the full WordNet syntax.
    pub fn parse(raw: &str) -> Option<SenseKey> {
        let (lemma, rest) = raw.split_once('%')?;
        if lemma.is_empty() || rest.contains('%') || raw.chars().any(char::is_whitespace) {
            return None;
        }
        Some(SenseKey {
            raw: raw.to_string(),
            lemma: lemma.to_lowercase(),
        })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn lemma(&self) -> &str {
        &self.lemma
    }

    /// Checks `lemma%S:FF:II[:head:id]` where S is the synset type digit
    /// (1-5) and FF/II are two-digit lexicographer file and lexical ids.
    pub fn is_well_formed(raw: &str) -> bool {
        let Some(key) = SenseKey::parse(raw) else {
            return false;
        };
        let tail = &key.raw[key.raw.find('%').unwrap() + 1..];
        let mut parts = tail.split(':');
        let ss_type = parts.next().unwrap_or("");
        let lex_file = parts.next().unwrap_or("");
        let lex_id = parts.next().unwrap_or("");
        let digits = |s: &str, n: usize| s.len() == n && s.bytes().all(|b| b.is_ascii_digit());
        matches!(ss_type, "1" | "2" | "3" | "4" | "5") && digits(lex_file, 2) && digits(lex_id, 2)
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Immutable key → vector map with a lemma → sense-key index.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    keys: Vec<String>,
    vectors: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
    lemma_index: BTreeMap<String, Vec<SenseKey>>,
}

impl EmbeddingStore {
    /// Builds a store from in-memory entries, applying the same checks as
    /// the file loader.
    pub fn from_entries<I, K>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, Vec<f64>)>,
        K: Into<String>,
    {
        let mut store = EmbeddingStore::empty(dim)?;
        for (key, vector) in entries {
            let key = key.into();
            store.insert(key.clone(), vector).map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::InvalidArgument(format!("entry `{key}`: {msg}")),
                other => other,
            })?;
        }
        Ok(store)
    }

    fn empty(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            keys: Vec::new(),
            vectors: Vec::new(),
            index: HashMap::new(),
            lemma_index: BTreeMap::new(),
        })
    }

    fn insert(&mut self, key: String, vector: Vec<f64>) -> Result<()> {
        if key.is_empty() || key.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument("keys must be non-empty and contain no whitespace".into()));
        }
        if vector.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: expected {}, found {}",
                self.dim,
                vector.len()
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value".into()));
        }
        if vector.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        if self.index.contains_key(&key) {
            return Err(Error::InvalidArgument(format!("duplicate key `{key}`")));
        }
        if key.contains('%') {
            let sense = SenseKey::parse(&key)
                .ok_or_else(|| Error::InvalidArgument(format!("malformed sense key `{key}`")))?;
            self.lemma_index.entry(sense.lemma.clone()).or_default().push(sense);
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        self.vectors.push(vector);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Parses word2vec text from any reader; `source` names the input in
    /// error messages.
    pub fn from_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let reader = BufReader::new(reader);
        let mut lines = reader.lines().enumerate();

        let (count, dim) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::parse(source, 1, "missing `<count> <dim>` header"));
            };
            let line = line.map_err(|e| Error::io(source, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parsed = match fields.as_slice() {
                [c, d] => c.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((c, d)) if d > 0 => break (c, d),
                _ => return Err(Error::parse(source, i + 1, format!("malformed header `{line}`"))),
            }
        };

        let mut store = EmbeddingStore::empty(dim)?;
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(source, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default().to_string();
            let vector = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(source, i + 1, format!("invalid number `{f}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            store.insert(key, vector).map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::parse(source, i + 1, msg),
                other => other,
            })?;
        }

        if store.len() != count {
            return Err(Error::parse(
                source,
                1,
                format!("header declares {count} entries but {} were read", store.len()),
            ));
        }
        Ok(store)
    }

    /// Writes the store in word2vec text format with round-trip precision.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        for (key, vector) in self.keys.iter().zip(&self.vectors) {
            write!(out, "{key}")?;
            for v in vector {
                write!(out, " {v:?}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Keys in file order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&i| self.vectors[i].as_slice())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.index.contains_key(key)
    }

    pub fn lemma_index(&self) -> &BTreeMap<String, Vec<SenseKey>> {
        &self.lemma_index
    }

    /// All sense entries of `lemma`, matched case-insensitively, in file order.
    pub fn senses_of(&self, lemma: &str) -> Vec<(&SenseKey, &[f64])> {
        self.lemma_index
            .get(&lemma.to_lowercase())
            .map(|keys| {
                keys.iter()
                    .map(|k| (k, self.get(k.raw()).expect("indexed sense key is stored")))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Unweighted component-wise mean of every sense vector of `lemma`.
    pub fn word_average(&self, lemma: &str) -> Result<Vec<f64>> {
        let senses = self.senses_of(lemma);
        if senses.is_empty() {
            return Err(Error::NoSenses(lemma.to_string()));
        }
        Ok(mean_of(senses.iter().map(|(_, v)| *v), self.dim))
    }

    /// Sense lookup that also accepts WordNet's underscore-joined spelling
    /// of multiword lemmas (`mental condition` → `mental_condition`).
    fn senses_of_surface(&self, surface: &str) -> Vec<(&SenseKey, &[f64])> {
        let senses = self.senses_of(surface);
        if !senses.is_empty() || !surface.contains(char::is_whitespace) {
            return senses;
        }
        let joined = surface.split_whitespace().collect::<Vec<_>>().join("_");
        self.senses_of(&joined)
    }

    /// Sense-insensitive vector for a term: exact key, then lowercased key,
    /// then the average of the lemma's senses, then (multiword terms) the
    /// mean of the component words' vectors.
    pub fn word_vector(&self, surface: &str) -> Result<Cow<'_, [f64]>> {
        let surface = surface.trim();
        if let Some(v) = self.get(surface) {
            return Ok(Cow::Borrowed(v));
        }
        let lower = surface.to_lowercase();
        if !lower.contains('%') {
            if let Some(v) = self.get(&lower) {
                return Ok(Cow::Borrowed(v));
            }
        }
        let senses = self.senses_of_surface(surface);
        if !senses.is_empty() {
            return Ok(Cow::Owned(mean_of(senses.iter().map(|(_, v)| *v), self.dim)));
        }
        let words: Vec<&str> = surface.split_whitespace().collect();
        if words.len() > 1 {
            let parts = words
                .iter()
                .map(|w| self.word_vector(w))
                .collect::<Result<Vec<_>>>()
                .map_err(|_| Error::UnresolvedTerm(surface.to_string()))?;
            return Ok(Cow::Owned(mean_of(parts.iter().map(|p| p.as_ref()), self.dim)));
        }
        Err(Error::UnresolvedTerm(surface.to_string()))
    }

    /// Candidate sense vectors for a term: the explicit senses when given,
    /// else every sense of the lemma, else the word vector as a singleton.
    pub fn sense_vectors(&self, surface: &str, senses: Option<&[String]>) -> Result<Vec<Cow<'_, [f64]>>> {
        if let Some(explicit) = senses.filter(|s| !s.is_empty()) {
            return explicit
                .iter()
                .map(|key| {
                    self.get(key)
                        .map(Cow::Borrowed)
                        .ok_or_else(|| Error::MissingSense(key.clone()))
                })
                .collect();
        }
        let found = self.senses_of_surface(surface.trim());
        if !found.is_empty() {
            return Ok(found.into_iter().map(|(_, v)| Cow::Borrowed(v)).collect());
        }
        Ok(vec![self.word_vector(surface)?])
    }

    /// Resolves a term at the given level. Word level always yields exactly
    /// one vector; sense level yields the candidate set.
    pub fn term_vectors(
        &self,
        surface: &str,
        level: Level,
        senses: Option<&[String]>,
    ) -> Result<Vec<Cow<'_, [f64]>>> {
        match level {
            Level::Word => Ok(vec![self.word_vector(surface)?]),
            Level::Sense => self.sense_vectors(surface, senses),
        }
    }

    /// Returns a copy with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        EmbeddingStore::from_entries(
            self.dim,
            self.keys
                .iter()
                .zip(&self.vectors)
                .map(|(k, v)| (k.clone(), v.iter().map(|x| x * factor).collect())),
        )
    }
}

fn mean_of<'a>(vectors: impl Iterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
        n += 1;
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EmbeddingStore> {
        EmbeddingStore::from_reader(text.as_bytes(), "test")
    }

    #[test]
    fn loads_word_and_sense_keys() {
        let store = parse("2 3\na 1 0 0\nb%1:00:00:: 0 1 0").unwrap();
        assert_eq!(store.dim(), 3);
        assert_eq!(store.keys().collect::<Vec<_>>(), ["a", "b%1:00:00::"]);
        let index = store.lemma_index();
        assert_eq!(index.len(), 1);
        assert_eq!(index["b"][0].raw(), "b%1:00:00::");
    }

    #[test]
    fn crlf_line_endings() {
        let store = parse("1 2\r\nx 0.5 -1\r\n").unwrap();
        assert_eq!(store.get("x"), Some(&[0.5, -1.0][..]));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let err = parse("1 2\na 1 0 0").unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
        assert!(err.to_string().starts_with("test:2:"), "{err}");
    }

    #[test]
    fn rejects_zero_vector() {
        let err = parse("1 3\na 0 0 0").unwrap_err();
        assert!(err.to_string().contains("zero vector"), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(parse("").is_err());
        assert!(parse("two 3\na 1 0 0").is_err());
        assert!(parse("2 1\na 1\na 2").unwrap_err().to_string().contains("duplicate"));
        assert!(parse("1 1\na NaN").unwrap_err().to_string().contains("non-finite"));
        assert!(parse("1 1\na inf").is_err());
        assert!(parse("1 1\na x").unwrap_err().to_string().contains("invalid number"));
        assert!(parse("2 1\na 1").unwrap_err().to_string().contains("declares 2"));
        assert!(parse("1 1\n%1:00:00:: 1").is_err());
    }

    #[test]
    fn senses_of_lemma() {
        let store = parse("3 2\nblack%3:00:01:: 1 0\nblack%3:00:02:: 0 1\nb%1:00:00:: 1 1").unwrap();
        assert_eq!(store.senses_of("black").len(), 2);
        assert_eq!(store.senses_of("Black").len(), 2);
        assert_eq!(store.senses_of("b")[0].1, &[1.0, 1.0]);
        assert!(store.senses_of("z").is_empty());
    }

    #[test]
    fn word_average_examples() {
        let store = EmbeddingStore::from_entries(
            2,
            [
                ("u%1:00:00::", vec![1.0, 0.0]),
                ("u%1:00:01::", vec![-1.0, 0.0]),
                ("v%1:00:00::", vec![2.0, 0.0]),
                ("v%1:00:01::", vec![0.0, 2.0]),
                ("w%2:00:00::", vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        assert_eq!(store.word_average("u").unwrap(), vec![0.0, 0.0]);
        assert_eq!(store.word_average("v").unwrap(), vec![1.0, 1.0]);
        assert_eq!(store.word_average("w").unwrap(), vec![0.0, 1.0]);
        assert!(matches!(store.word_average("x"), Err(Error::NoSenses(_))));
    }

    #[test]
    fn term_resolution() {
        let store = parse(
            "5 3\nb%1:00:00:: 0 1 0\nblack%3:00:01:: 1 0 0\nblack%3:00:02:: 0 0 1\nmental 1 1 0\ncondition 1 -1 0",
        )
        .unwrap();
        assert_eq!(store.word_vector("b").unwrap().as_ref(), &[0.0, 1.0, 0.0]);
        assert_eq!(store.term_vectors("black", Level::Sense, None).unwrap().len(), 2);
        assert_eq!(store.word_vector("mental condition").unwrap().as_ref(), &[1.0, 0.0, 0.0]);
        assert_eq!(store.word_vector("Mental").unwrap().as_ref(), &[1.0, 1.0, 0.0]);

        let explicit = vec!["black%3:00:02::".to_string()];
        let v = store.term_vectors("black", Level::Sense, Some(&explicit)).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].as_ref(), &[0.0, 0.0, 1.0]);

        let missing = vec!["black%3:00:09::".to_string()];
        assert!(matches!(
            store.term_vectors("black", Level::Sense, Some(&missing)),
            Err(Error::MissingSense(_))
        ));
        assert!(matches!(store.word_vector("purple"), Err(Error::UnresolvedTerm(_))));
        assert!(matches!(store.word_vector("mental purple"), Err(Error::UnresolvedTerm(_))));
        // singleton fallback for plain word keys
        assert_eq!(store.term_vectors("mental", Level::Sense, None).unwrap().len(), 1);
    }

    #[test]
    fn underscore_multiword_lemma() {
        let store = parse("1 2\nmental_condition%1:26:00:: 1 2").unwrap();
        assert_eq!(store.word_vector("mental condition").unwrap().as_ref(), &[1.0, 2.0]);
    }

    #[test]
    fn sense_key_syntax() {
        assert!(SenseKey::is_well_formed("black%3:00:02::"));
        assert!(SenseKey::is_well_formed("japanese%1:18:00::"));
        assert!(SenseKey::is_well_formed("dark%3:00:01:black:00"));
        assert!(!SenseKey::is_well_formed("black3:00"));
        assert!(!SenseKey::is_well_formed("black%3:0:02::"));
        assert!(!SenseKey::is_well_formed("black%9:00:02::"));
        assert!(!SenseKey::is_well_formed("%3:00:02::"));
        assert!(!SenseKey::is_well_formed("a%b%3:00:02::"));
        assert_eq!(SenseKey::parse("Black%3:00:02::").unwrap().lemma(), "black");
    }
}
