//! Graded Smatch: concept pairs earn their embedding cosine similarity
//! when it reaches a threshold `tau`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::matching::Similarity;
use crate::scalar::FloatScalar;
use crate::smatch::{brute_force_with, search, MatchResult, PairScorer, ScoreError, SearchConfig};
use crate::triples::{TripleKind, TripleSet};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse `{value}` as a number")]
    BadFloat { line: usize, value: String },
    #[error("line {line}: vector for `{token}` has zero length")]
    ZeroVector { line: usize, token: String },
    #[error("line {line}: missing vector components")]
    MissingVector { line: usize },
}

/// Token vectors, stored with unit L2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<F> {
    dimension: usize,
    vectors: HashMap<String, Vec<F>>,
}

fn normalize<F: FloatScalar>(v: &mut [F]) -> bool {
    let norm = v.iter().fold(F::zero(), |acc, &x| acc + x * x).sqrt();
    if norm.is_zero() || !norm.is_finite() {
        return false;
    }
    for x in v.iter_mut() {
        *x = *x / norm;
    }
    true
}

impl<F: FloatScalar> EmbeddingTable<F> {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            vectors: HashMap::new(),
        }
    }

    /// Adds a vector, normalizing it. Returns `false` if the token was
    /// already present (the first vector is kept) or the vector is zero.
    pub fn insert(&mut self, token: &str, mut vector: Vec<F>) -> bool {
        assert_eq!(vector.len(), self.dimension, "vector dimension");
        let key = token.to_lowercase();
        if self.vectors.contains_key(&key) || !normalize(&mut vector) {
            return false;
        }
        self.vectors.insert(key, vector);
        true
    }

    /// Parses GloVe-style text: `token v1 ... vD` per line with an
    /// optional `N D` header line. A first line of exactly two unsigned
    /// integers is read as the header.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dimension: Option<usize> = None;
        let mut vectors = HashMap::new();
        let mut first = true;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if std::mem::take(&mut first) && fields.len() == 2 {
                if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    dimension = Some(d);
                    continue;
                }
            }
            if fields.len() < 2 {
                return Err(EmbeddingError::MissingVector { line: lineno });
            }
            let found = fields.len() - 1;
            let expected = *dimension.get_or_insert(found);
            if found != expected {
                return Err(EmbeddingError::DimensionMismatch {
                    line: lineno,
                    expected,
                    found,
                });
            }
            let mut v = Vec::with_capacity(found);
            for value in &fields[1..] {
                let x: f64 = value.parse().map_err(|_| EmbeddingError::BadFloat {
                    line: lineno,
                    value: value.to_string(),
                })?;
                v.push(F::from(x).ok_or_else(|| EmbeddingError::BadFloat {
                    line: lineno,
                    value: value.to_string(),
                })?);
            }
            let token = fields[0].to_lowercase();
            if vectors.contains_key(&token) {
                continue;
            }
            if !normalize(&mut v) {
                return Err(EmbeddingError::ZeroVector {
                    line: lineno,
                    token,
                });
            }
            vectors.insert(token, v);
        }
        Ok(Self {
            dimension: dimension.unwrap_or(0),
            vectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[F]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Vector for a concept label: the sense suffix is dropped, the rest
    /// split on hyphens and the token vectors averaged. `None` if any
    /// token is out of vocabulary.
    pub fn compose(&self, label: &str) -> Option<Vec<F>> {
        let label = label.to_lowercase();
        let base = strip_sense(&label);
        let mut sum = vec![F::zero(); self.dimension];
        let mut count = 0usize;
        for tok in base.split('-').filter(|t| !t.is_empty()) {
            let v = self.vectors.get(tok)?;
            for (s, x) in sum.iter_mut().zip(v) {
                *s = *s + *x;
            }
            count += 1;
        }
        if count == 0 {
            return None;
        }
        let n = F::from(count).expect("token count");
        Some(sum.into_iter().map(|s| s / n).collect())
    }
}

/// Loads an embedding file.
pub fn load_embeddings<F: FloatScalar>(path: impl AsRef<Path>) -> Result<EmbeddingTable<F>, EmbeddingError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    EmbeddingTable::parse(&text)
}

/// Removes a trailing `-NN` sense number, as in `want-01`.
pub fn strip_sense(label: &str) -> &str {
    match label.rfind('-') {
        Some(i)
            if i > 0
                && i + 1 < label.len()
                && label[i + 1..].bytes().all(|b| b.is_ascii_digit()) =>
        {
            &label[..i]
        }
        _ => label,
    }
}

pub fn cosine<F: FloatScalar>(a: &[F], b: &[F]) -> F {
    let dot = a.iter().zip(b).fold(F::zero(), |acc, (x, y)| acc + *x * *y);
    let na = a.iter().fold(F::zero(), |acc, x| acc + *x * *x).sqrt();
    let nb = b.iter().fold(F::zero(), |acc, x| acc + *x * *x).sqrt();
    if na.is_zero() || nb.is_zero() {
        return F::zero();
    }
    (dot / (na * nb)).min(F::one())
}

fn gate<F: FloatScalar>(cos: F, tau: F) -> F {
    if cos >= tau && cos > F::zero() {
        cos
    } else {
        F::zero()
    }
}

fn graded<F: FloatScalar>(a: Option<&[F]>, b: Option<&[F]>, tau: F) -> F {
    match (a, b) {
        (Some(u), Some(v)) => gate(cosine(u, v), tau),
        _ => F::zero(),
    }
}

/// Similarity of two concept labels: 1 when equal (ignoring case),
/// otherwise the cosine of their composed vectors if it reaches `tau`,
/// else 0.
pub fn concept_similarity<F: FloatScalar>(a: &str, b: &str, table: &EmbeddingTable<F>, tau: F) -> F {
    if a.to_lowercase() == b.to_lowercase() {
        return F::one();
    }
    graded(table.compose(a).as_deref(), table.compose(b).as_deref(), tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("tau must lie in [0, 1]")]
pub struct InvalidTau;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Config<F> {
    pub tau: F,
    pub search: SearchConfig,
    /// Grade the top triple like an instance triple.
    pub grade_top: bool,
}

impl<F: FloatScalar> Default for S2Config<F> {
    fn default() -> Self {
        Self {
            tau: F::from(0.5).expect("0.5"),
            search: SearchConfig::default(),
            grade_top: true,
        }
    }
}

impl<F: FloatScalar> S2Config<F> {
    pub fn new(tau: F, search: SearchConfig) -> Result<Self, InvalidTau> {
        if !(tau >= F::zero() && tau <= F::one()) {
            return Err(InvalidTau);
        }
        Ok(Self {
            tau,
            search,
            grade_top: true,
        })
    }
}

/// Composed vectors for every concept and top value of two triple sets.
struct Composed<F> {
    vectors: HashMap<String, Option<Vec<F>>>,
}

impl<F: FloatScalar> Composed<F> {
    fn new(table: &EmbeddingTable<F>, sets: [&TripleSet; 2]) -> Self {
        let mut vectors = HashMap::new();
        for t in sets.into_iter().flatten() {
            if t.kind == TripleKind::Instance || t.is_top() {
                vectors
                    .entry(t.target.clone())
                    .or_insert_with(|| table.compose(&t.target));
            }
        }
        Self { vectors }
    }

    fn similarity(&self, a: &str, b: &str, tau: F) -> F {
        if a.to_lowercase() == b.to_lowercase() {
            return F::one();
        }
        let get = |k: &str| self.vectors.get(k).and_then(|v| v.as_deref());
        graded(get(a), get(b), tau)
    }
}

/// S2MATCH between a gold and a predicted triple set.
pub fn s2match_score<F: FloatScalar>(
    gold: &TripleSet,
    pred: &TripleSet,
    table: &EmbeddingTable<F>,
    cfg: &S2Config<F>,
) -> MatchResult<F> {
    let composed = Composed::new(table, [gold, pred]);
    let tau = cfg.tau;
    let sim = move |a: &str, b: &str| composed.similarity(a, b, tau);
    search(
        gold,
        pred,
        &Similarity {
            sim: &sim,
            grade_top: cfg.grade_top,
        },
        &cfg.search,
    )
}

/// Exhaustive graded optimum; reference oracle for [`s2match_score`].
pub fn s2match_brute_force<F: FloatScalar>(
    gold: &TripleSet,
    pred: &TripleSet,
    table: &EmbeddingTable<F>,
    cfg: &S2Config<F>,
) -> Result<MatchResult<F>, ScoreError> {
    let tau = cfg.tau;
    let sim = |a: &str, b: &str| concept_similarity(a, b, table, tau);
    brute_force_with(gold, pred, &sim, cfg.grade_top)
}

/// Graded scorer for corpus-level and breakdown evaluation.
#[derive(Debug, Clone, Copy)]
pub struct S2Match<'t, F> {
    pub table: &'t EmbeddingTable<F>,
    pub config: S2Config<F>,
}

impl<'t, F: FloatScalar> S2Match<'t, F> {
    pub fn new(table: &'t EmbeddingTable<F>, config: S2Config<F>) -> Self {
        Self { table, config }
    }
}

impl<F: FloatScalar> PairScorer<F> for S2Match<'_, F> {
    fn score_pair(&self, gold: &TripleSet, pred: &TripleSet) -> MatchResult<F> {
        s2match_score(gold, pred, self.table, &self.config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;
    use crate::triples::to_triples;

    fn ts(s: &str) -> TripleSet {
        to_triples(&parse_penman(s).unwrap())
    }

    fn berries() -> EmbeddingTable<f64> {
        EmbeddingTable::parse("blueberry 3 4\nhuckleberry 0 5\n").unwrap()
    }

    #[test]
    fn loads_and_normalizes() {
        let t: EmbeddingTable<f64> = EmbeddingTable::parse("2 2\ncat 3 4\ndog 1 0\ncat 9 9\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.get("cat").unwrap(), &[0.6, 0.8]);
        let t: EmbeddingTable<f64> = EmbeddingTable::parse("a 1 2 3\nb 4 5 6\n").unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 3));
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            EmbeddingTable::<f64>::parse("a 1 2\nb 1 2 3\n"),
            Err(EmbeddingError::DimensionMismatch { line: 2, expected: 2, found: 3 })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::parse("a 1 x\n"),
            Err(EmbeddingError::BadFloat { line: 1, .. })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::parse("a 0 0\n"),
            Err(EmbeddingError::ZeroVector { .. })
        ));
        assert!(matches!(
            EmbeddingTable::<f64>::parse("3 2\na 1 2 3\n"),
            Err(EmbeddingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sense_stripping() {
        assert_eq!(strip_sense("want-01"), "want");
        assert_eq!(strip_sense("pledge-promise"), "pledge-promise");
        assert_eq!(strip_sense("-1"), "-1");
        assert_eq!(strip_sense("have-rel-role-91"), "have-rel-role");
    }

    #[test]
    fn similarity_values() {
        let t = berries();
        assert_eq!(concept_similarity("dog", "dog", &t, 0.5), 1.0);
        assert_eq!(concept_similarity("Dog", "dog", &t, 0.5), 1.0);
        let s = concept_similarity("blueberry", "huckleberry", &t, 0.5);
        assert!((s - 0.8).abs() < 1e-12);
        assert_eq!(concept_similarity("blueberry", "huckleberry", &t, 0.9), 0.0);
        assert_eq!(concept_similarity("blueberry", "cranberry", &t, 0.0), 0.0);
    }

    #[test]
    fn multiword_composition() {
        let t: EmbeddingTable<f64> = EmbeddingTable::parse("a 1 0\nb 0 1\n").unwrap();
        let v = t.compose("a-b-01").unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
        let s = concept_similarity("a-b", "a", &t, 0.5);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(t.compose("a-zzz").is_none());
    }

    #[test]
    fn berry_graphs() {
        let t = berries();
        let (g, p) = (ts("(a / blueberry)"), ts("(b / huckleberry)"));
        let cfg = S2Config::new(0.5, SearchConfig::default()).unwrap();
        let r = s2match_score(&g, &p, &t, &cfg);
        assert!((r.f1 - 0.8).abs() < 1e-12);
        assert!((r.matched() - 1.6).abs() < 1e-12);
        let cfg = S2Config::new(0.9, SearchConfig::default()).unwrap();
        assert_eq!(s2match_score(&g, &p, &t, &cfg).f1, 0.0);
        let mut ungraded = S2Config::new(0.5, SearchConfig::default()).unwrap();
        ungraded.grade_top = false;
        assert!((s2match_score(&g, &p, &t, &ungraded).f1 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn identity_any_tau() {
        let t = berries();
        let g = ts("(w / want-01 :ARG0 (b / blueberry))");
        for tau in [0.0, 0.5, 1.0] {
            let cfg = S2Config::new(tau, SearchConfig::default()).unwrap();
            assert_eq!(s2match_score(&g, &g, &t, &cfg).f1, 1.0);
        }
    }

    #[test]
    fn tau_validation() {
        assert!(S2Config::new(1.5, SearchConfig::default()).is_err());
        assert!(S2Config::new(f64::NAN, SearchConfig::default()).is_err());
    }

    #[test]
    fn oracle_agrees() {
        let t = berries();
        let g = ts("(e / eat-01 :ARG0 (p / person) :ARG1 (b / blueberry))");
        let p = ts("(e / eat-01 :ARG1 (h / huckleberry) :ARG0 (q / person))");
        let cfg = S2Config::new(0.5, SearchConfig::default()).unwrap();
        let r = s2match_score(&g, &p, &t, &cfg);
        let o = s2match_brute_force(&g, &p, &t, &cfg).unwrap();
        assert!((r.matched() - o.matched()).abs() < 1e-12);
    }
}
