//! Cross-lingual consistency: one system's outputs for language X scored
//! against its outputs for language Y on a parallel corpus.

use std::collections::HashMap;

use thiserror::Error;

use crate::penman::CorpusEntry;
use crate::scalar::Scalar;
use crate::smatch::{score_pairs, MatchResult, PairScorer, ScoreError};
use crate::subscores::{aspect_view, Aspect};
use crate::triples::{to_triples, TripleSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsistencyError {
    #[error("at least two languages are required")]
    TooFewLanguages,
    #[error("language `{0}` appears more than once")]
    DuplicateLanguage(String),
    #[error("`{lang}` has {found} entries, expected {expected}")]
    CountMismatch {
        lang: String,
        expected: usize,
        found: usize,
    },
    #[error("`{lang}` has no entry with id `{id}`")]
    MissingId { lang: String, id: String },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Predicted graphs for one language.
#[derive(Debug, Clone)]
pub struct LanguageOutputs {
    pub language: String,
    pub entries: Vec<CorpusEntry>,
}

impl LanguageOutputs {
    pub fn new(language: impl Into<String>, entries: Vec<CorpusEntry>) -> Self {
        Self {
            language: language.into(),
            entries,
        }
    }
}

fn synthetic(id: &str) -> bool {
    id.starts_with("line:")
}

/// Puts every language's triple sets into the first language's order.
/// Entries are matched by id when every id is explicit, by position
/// otherwise.
pub fn align_outputs(outputs: &[LanguageOutputs]) -> Result<Vec<Vec<TripleSet>>, ConsistencyError> {
    if outputs.len() < 2 {
        return Err(ConsistencyError::TooFewLanguages);
    }
    for (i, o) in outputs.iter().enumerate() {
        if outputs[..i].iter().any(|p| p.language == o.language) {
            return Err(ConsistencyError::DuplicateLanguage(o.language.clone()));
        }
    }
    let first = &outputs[0];
    let expected = first.entries.len();
    for o in outputs {
        if o.entries.len() != expected {
            return Err(ConsistencyError::CountMismatch {
                lang: o.language.clone(),
                expected,
                found: o.entries.len(),
            });
        }
    }
    let by_id = outputs
        .iter()
        .all(|o| o.entries.iter().all(|e| !synthetic(&e.id)));
    let mut aligned = Vec::with_capacity(outputs.len());
    for o in outputs {
        let sets = if by_id {
            let index: HashMap<&str, &CorpusEntry> =
                o.entries.iter().map(|e| (e.id.as_str(), e)).collect();
            first
                .entries
                .iter()
                .map(|e| {
                    index
                        .get(e.id.as_str())
                        .map(|x| to_triples(&x.graph))
                        .ok_or_else(|| ConsistencyError::MissingId {
                            lang: o.language.clone(),
                            id: e.id.clone(),
                        })
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            o.entries.iter().map(|e| to_triples(&e.graph)).collect()
        };
        aligned.push(sets);
    }
    Ok(aligned)
}

/// Square matrix of corpus-level results indexed by language. Cell
/// `(x, y)` treats language `x` as the prediction and `y` as the
/// reference, so its precision is read from the row language.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyMatrix<S> {
    pub languages: Vec<String>,
    pub cells: Vec<Vec<MatchResult<S>>>,
}

impl<S: Scalar> ConsistencyMatrix<S> {
    pub fn get(&self, x: usize, y: usize) -> &MatchResult<S> {
        &self.cells[x][y]
    }

    /// Unordered language pairs `(x, y)` with `x < y`, in row order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.languages.len();
        (0..n).flat_map(move |x| (x + 1..n).map(move |y| (x, y)))
    }
}

fn matrix_from_sets<S: Scalar, P: PairScorer<S> + ?Sized>(
    languages: Vec<String>,
    sets: &[Vec<TripleSet>],
    scorer: &P,
) -> Result<ConsistencyMatrix<S>, ConsistencyError> {
    let n = sets.len();
    let mut cells: Vec<Vec<Option<MatchResult<S>>>> = vec![vec![None; n]; n];
    for x in 0..n {
        let total: usize = sets[x].iter().map(TripleSet::len).sum();
        let mut diag = MatchResult::from_totals(S::from_count(total), total, total);
        diag.exact = true;
        cells[x][x] = Some(diag);
        for y in x + 1..n {
            let per_pair = score_pairs(scorer, &sets[y], &sets[x])?;
            let r = MatchResult::aggregate(&per_pair);
            cells[y][x] = Some(r.transposed());
            cells[x][y] = Some(r);
        }
    }
    Ok(ConsistencyMatrix {
        languages,
        cells: cells
            .into_iter()
            .map(|row| row.into_iter().map(|c| c.expect("filled")).collect())
            .collect(),
    })
}

/// Corpus-level consistency for every language pair.
pub fn consistency_matrix<S: Scalar, P: PairScorer<S> + ?Sized>(
    outputs: &[LanguageOutputs],
    scorer: &P,
) -> Result<ConsistencyMatrix<S>, ConsistencyError> {
    let sets = align_outputs(outputs)?;
    let languages = outputs.iter().map(|o| o.language.clone()).collect();
    matrix_from_sets(languages, &sets, scorer)
}

/// One consistency matrix per aspect view.
pub fn breakdown_consistency<S: Scalar, P: PairScorer<S> + ?Sized>(
    outputs: &[LanguageOutputs],
    scorer: &P,
) -> Result<Vec<(Aspect, ConsistencyMatrix<S>)>, ConsistencyError> {
    let sets = align_outputs(outputs)?;
    let languages: Vec<String> = outputs.iter().map(|o| o.language.clone()).collect();
    Aspect::ALL
        .iter()
        .map(|&a| {
            let views: Vec<Vec<TripleSet>> = sets
                .iter()
                .map(|lang| lang.iter().map(|t| aspect_view(t, a)).collect())
                .collect();
            matrix_from_sets(languages.clone(), &views, scorer).map(|m| (a, m))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_corpus_str;
    use crate::smatch::Smatch;
    use crate::Exact;

    fn lang(tag: &str, text: &str) -> LanguageOutputs {
        LanguageOutputs::new(tag, parse_corpus_str(text, true).unwrap().entries)
    }

    const GOLD: &str = "# ::id 1\n(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))\n";
    const PRED: &str = "# ::id 1\n(w2 / want-01 :ARG0 (b2 / boy) :ARG1 (g2 / go-02 :ARG0 (g3 / girl)))\n";

    #[test]
    fn self_consistency() {
        let m: ConsistencyMatrix<Exact> =
            consistency_matrix(&[lang("de", GOLD), lang("es", GOLD)], &Smatch::default()).unwrap();
        assert_eq!(m.get(0, 1).f1, Exact::from_integer(1));
        assert_eq!(m.get(0, 0).f1, Exact::from_integer(1));
    }

    #[test]
    fn want_boy_pair() {
        let m: ConsistencyMatrix<Exact> =
            consistency_matrix(&[lang("de", GOLD), lang("es", PRED)], &Smatch::default()).unwrap();
        assert_eq!(m.get(0, 1).f1, Exact::new(4, 5));
        assert_eq!(m.get(1, 0).f1, Exact::new(4, 5));
        // row language de has 7 triples
        assert_eq!(m.get(0, 1).precision, Exact::new(6, 7));
        assert_eq!(m.get(1, 0).precision, Exact::new(6, 8));
        assert_eq!(m.get(0, 1).precision, m.get(1, 0).recall);
    }

    #[test]
    fn aligns_by_id() {
        let a = "# ::id x\n(a / apple)\n\n# ::id y\n(b / boy)\n";
        let b = "# ::id y\n(b / boy)\n\n# ::id x\n(a / apple)\n";
        let m: ConsistencyMatrix<Exact> =
            consistency_matrix(&[lang("a", a), lang("b", b)], &Smatch::default()).unwrap();
        assert_eq!(m.get(0, 1).f1, Exact::from_integer(1));
    }

    #[test]
    fn misalignment_errors() {
        let a = "# ::id x\n(a / apple)\n";
        let b = "# ::id z\n(a / apple)\n";
        assert!(matches!(
            consistency_matrix::<Exact, _>(&[lang("a", a), lang("b", b)], &Smatch::default()),
            Err(ConsistencyError::MissingId { .. })
        ));
        let c = "(a / apple)\n\n(b / boy)\n";
        assert!(matches!(
            consistency_matrix::<Exact, _>(&[lang("a", a), lang("c", c)], &Smatch::default()),
            Err(ConsistencyError::CountMismatch { .. })
        ));
        assert_eq!(
            consistency_matrix::<Exact, _>(&[lang("a", a)], &Smatch::default()).unwrap_err(),
            ConsistencyError::TooFewLanguages
        );
        assert!(matches!(
            consistency_matrix::<Exact, _>(&[lang("a", a), lang("a", a)], &Smatch::default()),
            Err(ConsistencyError::DuplicateLanguage(_))
        ));
    }

    #[test]
    fn positional_when_ids_are_synthetic() {
        let a = "(a / apple)\n";
        let b = "# ::id q\n(b / apple)\n";
        let m: ConsistencyMatrix<Exact> =
            consistency_matrix(&[lang("a", a), lang("b", b)], &Smatch::default()).unwrap();
        assert_eq!(m.get(0, 1).f1, Exact::from_integer(1));
    }

    #[test]
    fn negation_only_difference() {
        let a = "# ::id 1\n(s / sleep-01 :ARG0 (b / boy) :polarity -)\n";
        let b = "# ::id 1\n(s / sleep-01 :ARG0 (b / boy))\n";
        let per: Vec<(Aspect, ConsistencyMatrix<Exact>)> =
            breakdown_consistency(&[lang("a", a), lang("b", b)], &Smatch::default()).unwrap();
        let get = |asp: Aspect| &per.iter().find(|(x, _)| *x == asp).unwrap().1;
        assert!(get(Aspect::Negation).get(0, 1).f1 < Exact::from_integer(1));
        assert!(get(Aspect::Unlabeled).get(0, 1).f1 < Exact::from_integer(1));
        assert_eq!(get(Aspect::SRL).get(0, 1).f1, Exact::from_integer(1));
        assert_eq!(per.len(), 7);
    }
}
