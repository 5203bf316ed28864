//! Word Association Test: gender mass propagation over a word-association
//! graph and its correlation with embedding-derived gender scores.
//!
//! Propagation iterates `F ← α·S·F + (1−α)·Y` with the symmetrically
//! normalized weight matrix `S = D^{-1/2} W D^{-1/2}`, starting from the seed
//! labels `Y` (masculine seeds `(1, 0)`, feminine seeds `(0, 1)`).

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;

use crate::assoc::{max_cosine, Term};
use crate::embedstore::{EmbeddingStore, Level};
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 1000;
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Undirected weighted word graph plus masculine/feminine seed pairs.
#[derive(Debug, Clone)]
pub struct AssociationGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    /// Symmetric adjacency, each list sorted by neighbour index.
    adjacency: Vec<Vec<(usize, f64)>>,
    seeds: Vec<(String, String)>,
}

impl AssociationGraph {
    /// Builds the graph from (possibly directed) edges. Weights of `u→v` and
    /// `v→u` are averaged, a missing direction counting as zero. Nodes are
    /// kept in sorted order so results never depend on input order.
    pub fn new<I>(edges: I, seeds: Vec<(String, String)>) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let mut directed: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on `{u}`")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!("edge {u} -> {v} has non-positive weight {w}")));
            }
            if directed.insert((u.clone(), v.clone()), w).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge {u} -> {v}")));
            }
        }

        let nodes: Vec<String> = directed
            .keys()
            .flat_map(|(u, v)| [u.clone(), v.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<String, usize> = nodes.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();

        let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for ((u, v), &w) in &directed {
            let back = directed.get(&(v.clone(), u.clone())).copied().unwrap_or(0.0);
            let weight = 0.5 * (w + back);
            let (i, j) = (index[u], index[v]);
            undirected.insert((i.min(j), i.max(j)), weight);
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (&(i, j), &w) in &undirected {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }

        for (m, f) in &seeds {
            for word in [m, f] {
                if !index.contains_key(word) {
                    return Err(Error::InvalidGraph(format!("seed word `{word}` is not a graph node")));
                }
            }
        }
        if seeds.is_empty() {
            return Err(Error::InvalidGraph("no seed pairs".into()));
        }

        Ok(AssociationGraph {
            nodes,
            index,
            adjacency,
            seeds,
        })
    }

    /// Loads a `u<TAB>v<TAB>weight` graph file and a `masculine<TAB>feminine`
    /// seed file.
    pub fn load(graph: impl AsRef<Path>, seeds: impl AsRef<Path>) -> Result<Self> {
        let open = |p: &Path| File::open(p).map_err(|e| Error::io(p, e));
        let (graph, seeds) = (graph.as_ref(), seeds.as_ref());
        let edges = read_edges(open(graph)?, &graph.display().to_string())?;
        let pairs = read_pairs(open(seeds)?, &seeds.display().to_string())?;
        AssociationGraph::new(edges, pairs)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn seeds(&self) -> &[(String, String)] {
        &self.seeds
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Symmetrized weight between two nodes (0 when not adjacent).
    pub fn weight(&self, u: &str, v: &str) -> f64 {
        let (Some(&i), Some(&j)) = (self.index.get(u), self.index.get(v)) else {
            return 0.0;
        };
        self.adjacency[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.adjacency[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Dense copy of the normalized matrix `D^{-1/2} W D^{-1/2}`, in node order.
    pub fn normalized_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        let inv = self.inv_sqrt_degrees();
        let mut s = vec![vec![0.0; n]; n];
        for (i, list) in self.adjacency.iter().enumerate() {
            for &(j, w) in list {
                s[i][j] = w * inv[i] * inv[j];
            }
        }
        s
    }

    /// Seed label matrix `Y` in node order.
    pub fn seed_labels(&self) -> Vec<(f64, f64)> {
        let mut y = vec![(0.0, 0.0); self.nodes.len()];
        for (m, f) in &self.seeds {
            y[self.index[m]].0 = 1.0;
            y[self.index[f]].1 = 1.0;
        }
        y
    }

    fn inv_sqrt_degrees(&self) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|list| 1.0 / list.iter().map(|&(_, w)| w).sum::<f64>().sqrt())
            .collect()
    }

    /// The same graph with every seed pair's roles exchanged.
    pub fn with_swapped_seeds(&self) -> AssociationGraph {
        AssociationGraph {
            seeds: self.seeds.iter().map(|(m, f)| (f.clone(), m.clone())).collect(),
            ..self.clone()
        }
    }
}

fn tsv_fields<R: Read>(reader: R, source: &str, arity: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(|f| f.trim().to_string()).collect();
        if fields.len() != arity || fields.iter().any(String::is_empty) {
            return Err(Error::parse(
                source,
                i + 1,
                format!("expected {arity} tab-separated fields, found `{line}`"),
            ));
        }
        rows.push((i + 1, fields));
    }
    Ok(rows)
}

/// Parses `u<TAB>v<TAB>weight` lines.
pub fn read_edges<R: Read>(reader: R, source: &str) -> Result<Vec<(String, String, f64)>> {
    tsv_fields(reader, source, 3)?
        .into_iter()
        .map(|(line, mut f)| {
            let w: f64 = f[2]
                .parse()
                .map_err(|_| Error::parse(source, line, format!("invalid weight `{}`", f[2])))?;
            let v = f.swap_remove(1);
            let u = f.swap_remove(0);
            Ok((u, v, w))
        })
        .collect()
}

/// Parses `masculine<TAB>feminine` lines.
pub fn read_pairs<R: Read>(reader: R, source: &str) -> Result<Vec<(String, String)>> {
    Ok(tsv_fields(reader, source, 2)?
        .into_iter()
        .map(|(_, mut f)| {
            let b = f.swap_remove(1);
            let a = f.swap_remove(0);
            (a, b)
        })
        .collect())
}

/// Propagated masculine/feminine mass per node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenderMass {
    pub nodes: Vec<String>,
    /// `(b_m, b_f)` per node, in node order.
    pub mass: Vec<(f64, f64)>,
    pub alpha: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GenderMass {
    pub fn get(&self, word: &str) -> Option<(f64, f64)> {
        self.nodes
            .binary_search_by(|n| n.as_str().cmp(word))
            .ok()
            .map(|i| self.mass[i])
    }
}

/// Runs the damped propagation from `F = Y` until the largest componentwise
/// update drops below `tol`. Hitting `max_iters` first returns the partial
/// result with `converged = false`.
pub fn propagate(graph: &AssociationGraph, alpha: f64, tol: f64, max_iters: usize) -> Result<GenderMass> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let inv = graph.inv_sqrt_degrees();
    let normalized: Vec<Vec<(usize, f64)>> = graph
        .adjacency
        .iter()
        .enumerate()
        .map(|(i, list)| list.iter().map(|&(j, w)| (j, w * inv[i] * inv[j])).collect())
        .collect();
    let y = graph.seed_labels();

    let mut f = y.clone();
    let mut next = vec![(0.0, 0.0); f.len()];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iters {
        let mut delta: f64 = 0.0;
        for (i, row) in normalized.iter().enumerate() {
            let (mut m, mut fe) = (0.0, 0.0);
            for &(j, s) in row {
                m += s * f[j].0;
                fe += s * f[j].1;
            }
            let updated = (alpha * m + (1.0 - alpha) * y[i].0, alpha * fe + (1.0 - alpha) * y[i].1);
            delta = delta.max((updated.0 - f[i].0).abs()).max((updated.1 - f[i].1).abs());
            next[i] = updated;
        }
        std::mem::swap(&mut f, &mut next);
        iterations += 1;
        if delta < tol {
            converged = true;
            break;
        }
    }

    Ok(GenderMass {
        nodes: graph.nodes.clone(),
        mass: f,
        alpha,
        iterations,
        converged,
    })
}

/// `ln((b_m + ε) / (b_f + ε))`.
pub fn node_bias(mass: &GenderMass, word: &str, epsilon: f64) -> Result<f64> {
    let (bm, bf) = mass.get(word).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    Ok(((bm + epsilon) / (bf + epsilon)).ln())
}

type Resolved<'s> = Vec<Cow<'s, [f64]>>;

/// Seed pairs resolved once against a store, for scoring many words.
pub struct GenderScorer<'s> {
    level: Level,
    store: &'s EmbeddingStore,
    seeds: Vec<(Resolved<'s>, Resolved<'s>)>,
}

impl<'s> GenderScorer<'s> {
    pub fn new(seeds: &[(Term, Term)], level: Level, store: &'s EmbeddingStore) -> Result<Self> {
        if seeds.is_empty() {
            return Err(Error::InvalidArgument("gender score needs at least one seed pair".into()));
        }
        let seeds = seeds
            .iter()
            .map(|(m, f)| Ok((m.resolve(level, store)?, f.resolve(level, store)?)))
            .collect::<Result<_>>()?;
        Ok(GenderScorer { level, store, seeds })
    }

    /// Mean over seed pairs of `sim(w, m) − sim(w, f)`.
    pub fn score(&self, word: &Term) -> Result<f64> {
        let target = word.resolve(self.level, self.store)?;
        let mut total = 0.0;
        for (m, f) in &self.seeds {
            total += max_cosine(&target, m)? - max_cosine(&target, f)?;
        }
        Ok(total / self.seeds.len() as f64)
    }
}

pub fn embedding_gender_score(
    word: &Term,
    seeds: &[(Term, Term)],
    level: Level,
    store: &EmbeddingStore,
) -> Result<f64> {
    GenderScorer::new(seeds, level, store)?.score(word)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::Degenerate(format!(
            "Pearson correlation needs at least 2 observations, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("Pearson correlation undefined for a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WatCorrelation {
    pub level: Level,
    pub pearson_r: f64,
    pub n_common: usize,
}

/// Pearson r between node biases and embedding gender scores over the graph
/// words the store can resolve. Graph seeds serve as the lexicon.
pub fn wat_correlation(
    graph: &AssociationGraph,
    mass: &GenderMass,
    store: &EmbeddingStore,
    level: Level,
    epsilon: f64,
) -> Result<WatCorrelation> {
    let seeds: Vec<(Term, Term)> = graph
        .seeds
        .iter()
        .map(|(m, f)| (Term::new(m.as_str()), Term::new(f.as_str())))
        .collect();
    let scorer = GenderScorer::new(&seeds, level, store)?;
    let mut biases = Vec::new();
    let mut scores = Vec::new();
    for word in &graph.nodes {
        let score = match scorer.score(&Term::new(word.as_str())) {
            Ok(s) => s,
            Err(Error::UnresolvedTerm(_)) | Err(Error::NoSenses(_)) => continue,
            Err(e) => return Err(e),
        };
        biases.push(node_bias(mass, word, epsilon)?);
        scores.push(score);
    }
    if biases.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} graph words are present in the embedding store",
            biases.len()
        )));
    }
    Ok(WatCorrelation {
        level,
        pearson_r: pearson(&biases, &scores)?,
        n_common: biases.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn edges(list: &[(&str, &str, f64)]) -> Vec<(String, String, f64)> {
        list.iter().map(|&(u, v, w)| (u.to_string(), v.to_string(), w)).collect()
    }

    fn seeds(list: &[(&str, &str)]) -> Vec<(String, String)> {
        list.iter().map(|&(m, f)| (m.to_string(), f.to_string())).collect()
    }

    /// Direct solve of `(1−α)(I−αS)^{-1}Y` built from the raw edge list.
    fn closed_form(graph: &AssociationGraph, alpha: f64) -> Vec<(f64, f64)> {
        let n = graph.nodes().len();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for (i, u) in graph.nodes().iter().enumerate() {
            for (j, v) in graph.nodes().iter().enumerate() {
                w[(i, j)] = graph.weight(u, v);
            }
        }
        let d: Vec<f64> = (0..n).map(|i| w.row(i).sum()).collect();
        let s = DMatrix::from_fn(n, n, |i, j| w[(i, j)] / (d[i] * d[j]).sqrt());
        let a = DMatrix::<f64>::identity(n, n) - s * alpha;
        let y = graph.seed_labels();
        let ym = DMatrix::from_fn(n, 2, |i, c| if c == 0 { y[i].0 } else { y[i].1 });
        let f = a.lu().solve(&ym).unwrap() * (1.0 - alpha);
        (0..n).map(|i| (f[(i, 0)], f[(i, 1)])).collect()
    }

    #[test]
    fn path_graph_matches_linear_solve() {
        let g = AssociationGraph::new(
            edges(&[("m", "c", 1.0), ("c", "m", 1.0), ("c", "f", 1.0), ("f", "c", 1.0)]),
            seeds(&[("m", "f")]),
        )
        .unwrap();
        let mass = propagate(&g, 0.5, 1e-12, 1000).unwrap();
        assert!(mass.converged);
        let (bm, bf) = mass.get("c").unwrap();
        assert!((bm - bf).abs() < 1e-15);
        let oracle = closed_form(&g, 0.5);
        for (got, want) in mass.mass.iter().zip(&oracle) {
            assert!((got.0 - want.0).abs() < 1e-10 && (got.1 - want.1).abs() < 1e-10);
        }
        // S has entries 1/√2 on the path; solving by hand gives b_m(m) = 7/12.
        assert!((mass.get("m").unwrap().0 - 7.0 / 12.0).abs() < 1e-10);
        assert!(node_bias(&mass, "c", DEFAULT_EPSILON).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tiny_alpha_recovers_seed_labels() {
        let g = AssociationGraph::new(
            edges(&[("m", "c", 1.0), ("c", "f", 2.0), ("c", "x", 1.0)]),
            seeds(&[("m", "f")]),
        )
        .unwrap();
        let mass = propagate(&g, 1e-12, 1e-8, 1000).unwrap();
        let (bm, bf) = mass.get("x").unwrap();
        assert!(bm.abs() < 1e-11 && bf.abs() < 1e-11);
        assert!((mass.get("m").unwrap().0 - 1.0).abs() < 1e-11);
    }

    #[test]
    fn rejects_bad_parameters_and_graphs() {
        let g = AssociationGraph::new(edges(&[("m", "f", 1.0)]), seeds(&[("m", "f")])).unwrap();
        assert!(propagate(&g, 0.0, 1e-8, 10).is_err());
        assert!(propagate(&g, 1.0, 1e-8, 10).is_err());
        assert!(propagate(&g, 1.5, 1e-8, 10).is_err());
        assert!(AssociationGraph::new(edges(&[("a", "a", 1.0)]), seeds(&[("a", "a")])).is_err());
        assert!(AssociationGraph::new(edges(&[("a", "b", 0.0)]), seeds(&[("a", "b")])).is_err());
        assert!(AssociationGraph::new(edges(&[("a", "b", -1.0)]), seeds(&[("a", "b")])).is_err());
        assert!(AssociationGraph::new(edges(&[("a", "b", 1.0), ("a", "b", 2.0)]), seeds(&[("a", "b")])).is_err());
        assert!(AssociationGraph::new(edges(&[("a", "b", 1.0)]), seeds(&[("a", "z")])).is_err());
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = AssociationGraph::new(edges(&[("m", "c", 1.0), ("c", "f", 1.0)]), seeds(&[("m", "f")])).unwrap();
        let mass = propagate(&g, 0.99, 1e-14, 3).unwrap();
        assert!(!mass.converged);
        assert_eq!(mass.iterations, 3);
    }

    #[test]
    fn directed_weights_are_averaged() {
        let g = AssociationGraph::new(edges(&[("a", "b", 2.0), ("b", "a", 4.0), ("a", "c", 1.0)]), seeds(&[("a", "b")]))
            .unwrap();
        assert_eq!(g.weight("a", "b"), 3.0);
        assert_eq!(g.weight("b", "a"), 3.0);
        assert_eq!(g.weight("c", "a"), 0.5);
        assert_eq!(g.weight("b", "c"), 0.0);
    }

    #[test]
    fn node_bias_examples() {
        let mass = GenderMass {
            nodes: vec!["a".into(), "b".into(), "c".into()],
            mass: vec![(0.3, 0.3), (std::f64::consts::E * 0.2, 0.2), (0.0, 0.0)],
            alpha: 0.9,
            iterations: 1,
            converged: true,
        };
        assert_eq!(node_bias(&mass, "a", DEFAULT_EPSILON).unwrap(), 0.0);
        assert!((node_bias(&mass, "b", DEFAULT_EPSILON).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(node_bias(&mass, "c", DEFAULT_EPSILON).unwrap(), 0.0);
        assert!(matches!(node_bias(&mass, "zz", DEFAULT_EPSILON), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn gender_score_examples() {
        // w·m = 0.8 and w·f = 0.3 with unit vectors
        let w = [1.0, 0.0, 0.0];
        let m = [0.8, 0.6, 0.0];
        let f = [0.3, 0.0, (1.0f64 - 0.09).sqrt()];
        let store = EmbeddingStore::from_entries(3, [("w", w.to_vec()), ("m", m.to_vec()), ("f", f.to_vec())]).unwrap();
        let s = embedding_gender_score(&"w".into(), &[("m".into(), "f".into())], Level::Word, &store).unwrap();
        assert!((s - 0.5).abs() < 1e-12);

        let store = EmbeddingStore::from_entries(
            2,
            [("w", vec![1.0, 0.0]), ("m", vec![1.0, 1.0]), ("f", vec![1.0, -1.0])],
        )
        .unwrap();
        let s = embedding_gender_score(&"w".into(), &[("m".into(), "f".into())], Level::Word, &store).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn gender_score_mean_of_differences() {
        // differences 0.4 and −0.2 → 0.1
        let unit = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        let store = EmbeddingStore::from_entries(
            2,
            [
                ("w", vec![1.0, 0.0]),
                ("m1", unit(0.9)),
                ("f1", unit(0.5)),
                ("m2", unit(0.3)),
                ("f2", unit(0.5)),
            ],
        )
        .unwrap();
        let pairs = [("m1".into(), "f1".into()), ("m2".into(), "f2".into())];
        let s = embedding_gender_score(&"w".into(), &pairs, Level::Word, &store).unwrap();
        assert!((s - 0.1).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[-2.0, -4.0, -6.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tsv_parsing() {
        let e = read_edges("a\tb\t1.5\r\n\n# comment\nb\tc\t2\n".as_bytes(), "g.tsv").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], ("a".to_string(), "b".to_string(), 1.5));
        let err = read_edges("a\tb\n".as_bytes(), "g.tsv").unwrap_err();
        assert!(err.to_string().starts_with("g.tsv:1:"));
        assert!(read_edges("a\tb\tx\n".as_bytes(), "g.tsv").is_err());
        let p = read_pairs("he\tshe\nman\twoman\n".as_bytes(), "s.tsv").unwrap();
        assert_eq!(p[1], ("man".to_string(), "woman".to_string()));
    }

    fn random_graph(n: usize, raw: &[(usize, usize, f64)]) -> Vec<(String, String, f64)> {
        let mut out: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        // spanning path keeps every node present
        for i in 1..n {
            out.insert((i - 1, i), 1.0);
        }
        for &(a, b, w) in raw {
            let (a, b) = (a % n, b % n);
            if a != b {
                out.insert((a, b), w);
            }
        }
        out.into_iter().map(|((a, b), w)| (format!("w{a:02}"), format!("w{b:02}"), w)).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn iteration_matches_closed_form(
            n in 4usize..30,
            raw in proptest::collection::vec((0usize..64, 0usize..64, 0.1f64..5.0), 0..80),
            alpha in 0.1f64..0.95,
        ) {
            let g = AssociationGraph::new(random_graph(n, &raw), seeds(&[("w00", "w01"), ("w02", "w03")])).unwrap();
            let mass = propagate(&g, alpha, DEFAULT_TOL, 10_000).unwrap();
            prop_assert!(mass.converged);
            for (got, want) in mass.mass.iter().zip(closed_form(&g, alpha)) {
                prop_assert!((got.0 - want.0).abs() < 1e-6);
                prop_assert!((got.1 - want.1).abs() < 1e-6);
                prop_assert!(got.0 >= 0.0 && got.1 >= 0.0);
            }
        }

        #[test]
        fn swapping_seeds_swaps_mass(
            n in 4usize..20,
            raw in proptest::collection::vec((0usize..64, 0usize..64, 0.1f64..5.0), 0..40),
        ) {
            let g = AssociationGraph::new(random_graph(n, &raw), seeds(&[("w00", "w03")])).unwrap();
            let a = propagate(&g, 0.9, DEFAULT_TOL, 1000).unwrap();
            let b = propagate(&g.with_swapped_seeds(), 0.9, DEFAULT_TOL, 1000).unwrap();
            for (x, y) in a.mass.iter().zip(&b.mass) {
                prop_assert_eq!(x.0, y.1);
                prop_assert_eq!(x.1, y.0);
            }
            for node in g.nodes() {
                let fwd = node_bias(&a, node, DEFAULT_EPSILON).unwrap();
                let back = node_bias(&b, node, DEFAULT_EPSILON).unwrap();
                prop_assert!((fwd + back).abs() < 1e-9);
            }
        }

        #[test]
        fn input_order_does_not_matter(
            n in 4usize..20,
            raw in proptest::collection::vec((0usize..64, 0usize..64, 0.1f64..5.0), 0..40),
        ) {
            let list = random_graph(n, &raw);
            let mut reversed = list.clone();
            reversed.reverse();
            let a = propagate(&AssociationGraph::new(list, seeds(&[("w00", "w01")])).unwrap(), 0.8, 1e-10, 1000).unwrap();
            let b = propagate(&AssociationGraph::new(reversed, seeds(&[("w00", "w01")])).unwrap(), 0.8, 1e-10, 1000).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn pearson_affine_invariance(
            x in proptest::collection::vec(-5.0f64..5.0, 3..20),
            noise in proptest::collection::vec(-5.0f64..5.0, 20),
            scale in 0.1f64..10.0,
            shift in -10.0f64..10.0,
        ) {
            let y = &noise[..x.len()];
            let Ok(r) = pearson(&x, y) else { return Ok(()); };
            prop_assert!((-1.0..=1.0).contains(&r));
            let xt: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
            let r2 = pearson(&xt, y).unwrap();
            prop_assert!((r - r2).abs() < 1e-9);
        }
    }
}
