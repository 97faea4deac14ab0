//! Smatch: precision, recall and F1 of triple overlap under the best
//! variable alignment.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::matching::{Mapping, Problem, Similarity};
use crate::scalar::Scalar;
use crate::triples::{TripleKind, TripleSet};

/// Largest side size accepted by [`brute_force_score`].
pub const BRUTE_FORCE_MAX_VARS: usize = 8;
/// Upper limit on enumerated mappings in [`brute_force_score`].
pub const BRUTE_FORCE_MAX_MAPPINGS: u128 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("gold corpus has {gold} entries but prediction corpus has {pred}")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("exhaustive search too large: {gold} gold and {pred} predicted variables")]
    SizeLimit { gold: usize, pred: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Independent hill-climbing initializations; at least one is run.
    pub restarts: usize,
    pub seed: u64,
    /// Pairs whose smaller side has at most this many variables are
    /// solved exactly.
    pub exact_threshold: usize,
    /// Node budget for the exact search before it gives up.
    pub exact_budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            seed: 0,
            exact_threshold: 6,
            exact_budget: 5_000_000,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    /// Hill climbing only.
    pub fn heuristic_only(mut self) -> Self {
        self.exact_threshold = 0;
        self
    }

    /// Exact search for every pair, within the node budget.
    pub fn always_exact(mut self) -> Self {
        self.exact_threshold = usize::MAX;
        self
    }
}

/// Injective map from predicted to gold variables and the score it earns.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment<S> {
    pub pairs: Vec<(String, String)>,
    pub matched: S,
}

impl<S: Scalar> Alignment<S> {
    pub fn get(&self, pred_var: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(p, _)| p == pred_var)
            .map(|(_, g)| g.as_str())
    }

    /// The same alignment read from the gold side.
    pub fn inverted(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|(p, g)| (g.clone(), p.clone())).collect(),
            matched: self.matched.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<S> {
    pub precision: S,
    pub recall: S,
    pub f1: S,
    /// For corpus-level results the pairs are empty and `matched` is the
    /// summed score.
    pub alignment: Alignment<S>,
    pub pred_triples: usize,
    pub gold_triples: usize,
    pub restarts_used: usize,
    pub seed: u64,
    /// Whether the optimum was certified by exhaustive search.
    pub exact: bool,
    /// Set when the prediction has no triples, so precision is undefined
    /// and reported as zero.
    pub empty_pred: bool,
}

impl<S: Scalar> MatchResult<S> {
    /// Precision, recall and F1 from a matched score and triple totals.
    /// Both sides empty is a perfect match; one side empty scores zero.
    pub fn from_totals(matched: S, pred_triples: usize, gold_triples: usize) -> Self {
        let (precision, recall, f1) = if pred_triples == 0 && gold_triples == 0 {
            (S::one(), S::one(), S::one())
        } else {
            let p = if pred_triples == 0 {
                S::zero()
            } else {
                matched.clone() / S::from_count(pred_triples)
            };
            let r = if gold_triples == 0 {
                S::zero()
            } else {
                matched.clone() / S::from_count(gold_triples)
            };
            let f = if p.is_zero() && r.is_zero() {
                S::zero()
            } else {
                (matched.clone() + matched.clone()) / S::from_count(pred_triples + gold_triples)
            };
            (p, r, f)
        };
        Self {
            precision,
            recall,
            f1,
            alignment: Alignment {
                pairs: Vec::new(),
                matched,
            },
            pred_triples,
            gold_triples,
            restarts_used: 0,
            seed: 0,
            exact: true,
            empty_pred: pred_triples == 0 && gold_triples > 0,
        }
    }

    pub fn matched(&self) -> &S {
        &self.alignment.matched
    }

    /// Result with the roles of gold and prediction exchanged.
    pub fn transposed(&self) -> Self {
        let mut t = Self::from_totals(self.matched().clone(), self.gold_triples, self.pred_triples);
        t.alignment = self.alignment.inverted();
        t.restarts_used = self.restarts_used;
        t.seed = self.seed;
        t.exact = self.exact;
        t
    }

    /// Micro-average: sums matched scores and triple totals.
    pub fn aggregate<'a, I>(results: I) -> Self
    where
        I: IntoIterator<Item = &'a Self>,
        S: 'a,
    {
        let mut matched = S::zero();
        let (mut pred, mut gold) = (0, 0);
        let mut exact = true;
        let mut restarts = 0;
        let mut seed = 0;
        for r in results {
            matched = matched + r.matched().clone();
            pred += r.pred_triples;
            gold += r.gold_triples;
            exact &= r.exact;
            restarts = restarts.max(r.restarts_used);
            seed = r.seed;
        }
        let mut out = Self::from_totals(matched, pred, gold);
        out.exact = exact;
        out.restarts_used = restarts;
        out.seed = seed;
        out
    }

    pub fn summary(&self) -> ScoreSummary {
        ScoreSummary {
            precision: self.precision.as_f64(),
            recall: self.recall.as_f64(),
            f1: self.f1.as_f64(),
            matched: self.matched().as_f64(),
            pred_triples: self.pred_triples,
            gold_triples: self.gold_triples,
        }
    }
}

/// Floating-point view of a result for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: f64,
    pub pred_triples: usize,
    pub gold_triples: usize,
}

/// Scores one (gold, prediction) pair of triple sets.
pub trait PairScorer<S: Scalar>: Sync {
    fn score_pair(&self, gold: &TripleSet, pred: &TripleSet) -> MatchResult<S>;
}

/// Binary Smatch.
#[derive(Debug, Clone, Copy, Default)]
pub struct Smatch {
    pub config: SearchConfig,
}

impl Smatch {
    pub fn new(config: SearchConfig) -> Self {
        Self { config }
    }
}

impl<S: Scalar> PairScorer<S> for Smatch {
    fn score_pair(&self, gold: &TripleSet, pred: &TripleSet) -> MatchResult<S> {
        smatch_score(gold, pred, &self.config)
    }
}

pub(crate) fn binary<S: Scalar>(a: &str, b: &str) -> S {
    if a == b {
        S::one()
    } else {
        S::zero()
    }
}

fn named_pairs(mapping: &Mapping, left: &TripleSet, right: &TripleSet) -> Vec<(String, String)> {
    mapping
        .iter()
        .enumerate()
        .filter_map(|(l, r)| {
            r.map(|r| (left.variables()[l].clone(), right.variables()[r].clone()))
        })
        .collect()
}

/// Hill climbing with restarts, refined by exhaustive search when the
/// smaller side is within `exact_threshold`.
pub(crate) fn search<S: Scalar>(
    gold: &TripleSet,
    pred: &TripleSet,
    similarity: &Similarity<'_, S>,
    cfg: &SearchConfig,
) -> MatchResult<S> {
    let problem = Problem::new(pred, gold, similarity);
    let restarts = cfg.restarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(Mapping, S)> = None;
    if problem.n_left() > 0 && problem.n_right() > 0 {
        for _ in 0..restarts {
            let init = problem.initial_mapping(&mut rng);
            let (mapping, score) = problem.hill_climb(init);
            if best.as_ref().is_none_or(|(_, s)| score > *s) {
                best = Some((mapping, score));
            }
        }
    }
    let (mut mapping, mut score) =
        best.unwrap_or_else(|| (vec![None; problem.n_left()], S::zero()));

    let smaller = problem.n_left().min(problem.n_right());
    let mut exact = smaller == 0;
    if smaller > 0 && smaller <= cfg.exact_threshold {
        let found = if problem.n_left() <= problem.n_right() {
            problem.exact(score.clone(), cfg.exact_budget)
        } else {
            let flipped = |a: &str, b: &str| (similarity.sim)(b, a);
            let transposed = Problem::new(
                gold,
                pred,
                &Similarity {
                    sim: &flipped,
                    grade_top: similarity.grade_top,
                },
            );
            transposed
                .exact(score.clone(), cfg.exact_budget)
                .map(|(m, s)| {
                    let m = m.map(|gold_to_pred| {
                        let mut inv = vec![None; problem.n_left()];
                        for (g, p) in gold_to_pred.iter().enumerate() {
                            if let Some(p) = p {
                                inv[*p] = Some(g);
                            }
                        }
                        inv
                    });
                    (m, s)
                })
        };
        if let Some((candidate, _)) = found {
            exact = true;
            if let Some(candidate) = candidate {
                let s = problem.score(&candidate);
                if s > score {
                    mapping = candidate;
                    score = s;
                }
            }
        }
    }

    let mut result = MatchResult::from_totals(score.clone(), pred.len(), gold.len());
    result.alignment = Alignment {
        pairs: named_pairs(&mapping, pred, gold),
        matched: score,
    };
    result.restarts_used = restarts;
    result.seed = cfg.seed;
    result.exact = exact;
    result
}

/// Smatch between a gold and a predicted triple set.
pub fn smatch_score<S: Scalar>(gold: &TripleSet, pred: &TripleSet, cfg: &SearchConfig) -> MatchResult<S> {
    let sim = binary::<S>;
    search(
        gold,
        pred,
        &Similarity {
            sim: &sim,
            grade_top: false,
        },
        cfg,
    )
}

/// Triple-by-triple scoring of mappings. Graded comparison applies to
/// instance triples and, when `grade_top`, to the top triple; everything
/// else is matched as a multiset.
struct NaiveScorer<'a, S> {
    pred: &'a TripleSet,
    gold_counts: HashMap<(TripleKind, &'a str, &'a str, &'a str), usize>,
    gold_values: HashMap<(TripleKind, &'a str, &'a str), &'a str>,
    sim: &'a dyn Fn(&str, &str) -> S,
    grade_top: bool,
}

impl<'a, S: Scalar> NaiveScorer<'a, S> {
    fn new(
        gold: &'a TripleSet,
        pred: &'a TripleSet,
        sim: &'a dyn Fn(&str, &str) -> S,
        grade_top: bool,
    ) -> Self {
        let mut gold_counts = HashMap::new();
        let mut gold_values = HashMap::new();
        for t in gold {
            *gold_counts
                .entry((t.kind, t.source.as_str(), t.relation.as_str(), t.target.as_str()))
                .or_default() += 1;
            if t.kind == TripleKind::Instance || t.is_top() {
                gold_values.insert((t.kind, t.relation.as_str(), t.source.as_str()), t.target.as_str());
            }
        }
        Self {
            pred,
            gold_counts,
            gold_values,
            sim,
            grade_top,
        }
    }

    fn score(&self, mapping: &HashMap<&str, &str>) -> S {
        let mut total = S::zero();
        let mut images: HashMap<(TripleKind, &str, &str, &str), usize> = HashMap::new();
        for t in self.pred {
            let Some(&src) = mapping.get(t.source.as_str()) else {
                continue;
            };
            let graded = t.kind == TripleKind::Instance || (t.is_top() && self.grade_top);
            if graded {
                if let Some(v) = self.gold_values.get(&(t.kind, t.relation.as_str(), src)) {
                    total = total + (self.sim)(&t.target, v);
                }
            } else if t.kind == TripleKind::Relation {
                if let Some(&tgt) = mapping.get(t.target.as_str()) {
                    *images.entry((t.kind, src, &t.relation, tgt)).or_default() += 1;
                }
            } else {
                *images.entry((t.kind, src, &t.relation, &t.target)).or_default() += 1;
            }
        }
        let shared: usize = images
            .iter()
            .map(|(k, c)| (*c).min(self.gold_counts.get(k).copied().unwrap_or(0)))
            .sum();
        total + S::from_count(shared)
    }
}

fn partial_injections(k: usize, n: usize) -> u128 {
    // sum over j of C(k, j) * n! / (n - j)!
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    let mut falling: u128 = 1;
    for j in 0..=k.min(n) {
        total = total.saturating_add(choose.saturating_mul(falling));
        choose = choose * (k - j) as u128 / (j + 1) as u128;
        falling = falling.saturating_mul((n - j) as u128);
    }
    total
}

/// Exhaustive optimum over every injective partial mapping, with an
/// arbitrary value similarity. Used as the reference oracle.
pub fn brute_force_with<S: Scalar>(
    gold: &TripleSet,
    pred: &TripleSet,
    sim: &dyn Fn(&str, &str) -> S,
    grade_top: bool,
) -> Result<MatchResult<S>, ScoreError> {
    let (pv, gv) = (pred.variables(), gold.variables());
    let too_big = pv.len().min(gv.len()) > BRUTE_FORCE_MAX_VARS
        || partial_injections(pv.len(), gv.len()) > BRUTE_FORCE_MAX_MAPPINGS;
    if too_big {
        return Err(ScoreError::SizeLimit {
            gold: gv.len(),
            pred: pv.len(),
        });
    }

    struct Enum<'a, S> {
        pv: &'a [String],
        gv: &'a [String],
        used: Vec<bool>,
        current: Vec<Option<usize>>,
        best: Option<(S, Vec<Option<usize>>)>,
    }
    fn walk<S: Scalar>(
        e: &mut Enum<'_, S>,
        i: usize,
        eval: &dyn Fn(&HashMap<&str, &str>) -> S,
    ) {
        if i == e.pv.len() {
            let map: HashMap<&str, &str> = e
                .current
                .iter()
                .enumerate()
                .filter_map(|(p, g)| g.map(|g| (e.pv[p].as_str(), e.gv[g].as_str())))
                .collect();
            let s = eval(&map);
            if e.best.as_ref().is_none_or(|(b, _)| s > *b) {
                e.best = Some((s, e.current.clone()));
            }
            return;
        }
        e.current[i] = None;
        walk(e, i + 1, eval);
        for g in 0..e.gv.len() {
            if !e.used[g] {
                e.used[g] = true;
                e.current[i] = Some(g);
                walk(e, i + 1, eval);
                e.used[g] = false;
            }
        }
        e.current[i] = None;
    }

    let mut e = Enum {
        pv,
        gv,
        used: vec![false; gv.len()],
        current: vec![None; pv.len()],
        best: None,
    };
    let scorer = NaiveScorer::new(gold, pred, sim, grade_top);
    let eval = |m: &HashMap<&str, &str>| scorer.score(m);
    walk(&mut e, 0, &eval);
    let (matched, best) = e.best.expect("at least the empty mapping is visited");
    let mut result = MatchResult::from_totals(matched.clone(), pred.len(), gold.len());
    result.alignment = Alignment {
        pairs: best
            .iter()
            .enumerate()
            .filter_map(|(p, g)| g.map(|g| (pv[p].clone(), gv[g].clone())))
            .collect(),
        matched,
    };
    Ok(result)
}

/// Exact Smatch by enumeration of all injective mappings.
pub fn brute_force_score<S: Scalar>(gold: &TripleSet, pred: &TripleSet) -> Result<MatchResult<S>, ScoreError> {
    brute_force_with(gold, pred, &binary::<S>, false)
}

/// Scores aligned corpora with any pair scorer and micro-averages.
/// Pairs are scored in parallel on the current rayon pool; aggregation
/// runs in corpus order.
pub fn corpus_score_with<S: Scalar, P: PairScorer<S> + ?Sized>(
    scorer: &P,
    gold: &[TripleSet],
    pred: &[TripleSet],
) -> Result<MatchResult<S>, ScoreError> {
    let results = score_pairs(scorer, gold, pred)?;
    Ok(MatchResult::aggregate(&results))
}

/// Per-pair results, in corpus order.
pub fn score_pairs<S: Scalar, P: PairScorer<S> + ?Sized>(
    scorer: &P,
    gold: &[TripleSet],
    pred: &[TripleSet],
) -> Result<Vec<MatchResult<S>>, ScoreError> {
    if gold.len() != pred.len() {
        return Err(ScoreError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    Ok(gold
        .par_iter()
        .zip(pred.par_iter())
        .map(|(g, p)| scorer.score_pair(g, p))
        .collect())
}

/// Corpus-level Smatch (micro-averaged).
pub fn corpus_score<S: Scalar>(
    gold: &[TripleSet],
    pred: &[TripleSet],
    cfg: &SearchConfig,
) -> Result<MatchResult<S>, ScoreError> {
    corpus_score_with(&Smatch::new(*cfg), gold, pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;
    use crate::triples::to_triples;
    use crate::Exact;

    fn ts(s: &str) -> TripleSet {
        to_triples(&parse_penman(s).unwrap())
    }

    const GOLD: &str = "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))";
    const PRED: &str = "(w2 / want-01 :ARG0 (b2 / boy) :ARG1 (g2 / go-02 :ARG0 (g3 / girl)))";

    #[test]
    fn identity() {
        let t = ts("(w / want-01 :ARG0 (b / boy))");
        let r: MatchResult<Exact> = smatch_score(&t, &t, &SearchConfig::default());
        assert_eq!(r.f1, Exact::from_integer(1));
        assert_eq!(r.precision, Exact::from_integer(1));
        assert!(r.exact);
    }

    #[test]
    fn apple_banana() {
        let r: MatchResult<Exact> =
            smatch_score(&ts("(a / apple)"), &ts("(b / banana)"), &SearchConfig::default());
        assert_eq!(*r.matched(), Exact::from_integer(0));
        assert_eq!(r.f1, Exact::from_integer(0));
    }

    #[test]
    fn want_boy_go_girl() {
        let (g, p) = (ts(GOLD), ts(PRED));
        assert_eq!((g.len(), p.len()), (7, 8));
        let r: MatchResult<Exact> = smatch_score(&g, &p, &SearchConfig::default());
        assert_eq!(*r.matched(), Exact::from_integer(6));
        assert_eq!(r.precision, Exact::new(6, 8));
        assert_eq!(r.recall, Exact::new(6, 7));
        assert_eq!(r.f1, Exact::new(4, 5));
        assert_eq!(r.alignment.get("w2"), Some("w"));
        let oracle: MatchResult<Exact> = brute_force_score(&g, &p).unwrap();
        assert_eq!(*oracle.matched(), Exact::from_integer(6));
    }

    #[test]
    fn heuristic_alone_finds_the_small_optimum() {
        let r: MatchResult<Exact> =
            smatch_score(&ts(GOLD), &ts(PRED), &SearchConfig::default().heuristic_only());
        assert_eq!(*r.matched(), Exact::from_integer(6));
        assert!(!r.exact);
    }

    #[test]
    fn single_variable_pairs_agree_with_oracle() {
        for (a, b) in [("(a / x)", "(b / x)"), ("(a / x)", "(b / y)"), ("(a / x :polarity -)", "(b / x)")] {
            let (g, p) = (ts(a), ts(b));
            let h: MatchResult<Exact> = smatch_score(&g, &p, &SearchConfig::default());
            let o: MatchResult<Exact> = brute_force_score(&g, &p).unwrap();
            assert_eq!(h.matched(), o.matched());
        }
    }

    #[test]
    fn empty_sets() {
        let e = TripleSet::empty();
        let t = ts("(a / x)");
        let both: MatchResult<Exact> = smatch_score(&e, &e, &SearchConfig::default());
        assert_eq!(both.f1, Exact::from_integer(1));
        let no_pred: MatchResult<Exact> = smatch_score(&t, &e, &SearchConfig::default());
        assert_eq!(no_pred.f1, Exact::from_integer(0));
        assert!(no_pred.empty_pred);
        let no_gold: MatchResult<Exact> = smatch_score(&e, &t, &SearchConfig::default());
        assert_eq!(no_gold.f1, Exact::from_integer(0));
        assert!(!no_gold.empty_pred);
    }

    #[test]
    fn corpus_micro_average() {
        let gold = vec![ts(GOLD), ts("(a / apple)")];
        let pred = vec![ts(PRED), ts("(b / banana)")];
        let r: MatchResult<Exact> = corpus_score(&gold, &pred, &SearchConfig::default()).unwrap();
        assert_eq!(r.precision, Exact::new(6, 10));
        assert_eq!(r.recall, Exact::new(6, 9));
        assert_eq!(r.f1, Exact::new(12, 19));
        assert!((r.f1.as_f64() - 0.632).abs() < 1e-3);
        let swapped: MatchResult<Exact> = corpus_score(
            &[gold[1].clone(), gold[0].clone()],
            &[pred[1].clone(), pred[0].clone()],
            &SearchConfig::default(),
        )
        .unwrap();
        assert_eq!(swapped.f1, r.f1);
    }

    #[test]
    fn corpus_errors() {
        let t = ts("(a / x)");
        assert_eq!(
            corpus_score::<Exact>(std::slice::from_ref(&t), &[], &SearchConfig::default()).unwrap_err(),
            ScoreError::LengthMismatch { gold: 1, pred: 0 }
        );
        assert_eq!(
            corpus_score::<Exact>(&[], &[], &SearchConfig::default()).unwrap_err(),
            ScoreError::EmptyCorpus
        );
    }

    #[test]
    fn brute_force_guard() {
        let big: String = (0..10).fold("(v0 / c".to_string(), |mut acc, i| {
            acc.push_str(&format!(" :op{} (v{} / c)", i + 1, i + 1));
            acc
        }) + ")";
        let t = ts(&big);
        assert!(matches!(
            brute_force_score::<Exact>(&t, &t),
            Err(ScoreError::SizeLimit { .. })
        ));
    }

    #[test]
    fn injection_counts() {
        assert_eq!(partial_injections(1, 1), 2);
        assert_eq!(partial_injections(2, 2), 7);
        assert_eq!(partial_injections(3, 4), 1 + 12 + 36 + 24);
    }

    #[test]
    fn transposition() {
        let r: MatchResult<Exact> = smatch_score(&ts(GOLD), &ts(PRED), &SearchConfig::default());
        let t = r.transposed();
        assert_eq!(t.precision, r.recall);
        assert_eq!(t.f1, r.f1);
        assert_eq!(t.alignment.get("w"), Some("w2"));
    }
}
