//! Fine-grained breakdown: Unlabeled, No WSD, Reentrancies, Concepts,
//! Named entities, Negation and SRL.
//!
//! Each aspect is a view of a triple set; the aspect score is the
//! alignment score between the gold and predicted views.
//!
//! Triple selection per aspect:
//! - Unlabeled: every relation and attribute role becomes `rel`; instance
//!   and top triples are kept.
//! - NoWSD: `-NN` sense numbers are dropped from instance and top values.
//! - Concepts: instance triples only.
//! - NamedEnt: for each variable with an outgoing `name` relation, its
//!   instance triple, the `name` relation, the name node's instance
//!   triple and the name node's `opN` attributes.
//! - Negation: each `polarity -` attribute and its source's instance.
//! - Reentrancies: relations into variables with at least two incoming
//!   relations, plus the instance triples of their endpoints.
//! - SRL: `argN` relations plus the instance triples of their endpoints.
//!
//! Only Unlabeled and NoWSD keep the top triple.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::penman::AmrGraph;
use crate::s2match::strip_sense;
use crate::scalar::Scalar;
use crate::smatch::{MatchResult, PairScorer, ScoreError};
use crate::triples::{to_triples, Triple, TripleKind, TripleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Aspect {
    Unlabeled,
    NoWSD,
    Reentrancies,
    Concepts,
    NamedEnt,
    Negation,
    SRL,
}

impl Aspect {
    /// In report row order.
    pub const ALL: [Aspect; 7] = [
        Aspect::Unlabeled,
        Aspect::NoWSD,
        Aspect::Reentrancies,
        Aspect::Concepts,
        Aspect::NamedEnt,
        Aspect::Negation,
        Aspect::SRL,
    ];

    /// Machine-readable key.
    pub fn key(self) -> &'static str {
        match self {
            Aspect::Unlabeled => "unlabeled",
            Aspect::NoWSD => "no_wsd",
            Aspect::Reentrancies => "reentrancies",
            Aspect::Concepts => "concepts",
            Aspect::NamedEnt => "named_ent",
            Aspect::Negation => "negation",
            Aspect::SRL => "srl",
        }
    }

    /// Row label for text tables.
    pub fn label(self) -> &'static str {
        match self {
            Aspect::Unlabeled => "Unlabeled",
            Aspect::NoWSD => "No WSD",
            Aspect::Reentrancies => "Reentrancies",
            Aspect::Concepts => "Concepts",
            Aspect::NamedEnt => "Named Ent.",
            Aspect::Negation => "Negation",
            Aspect::SRL => "SRL",
        }
    }

    /// Views that only select triples, never relabel them.
    pub fn is_subset_view(self) -> bool {
        !matches!(self, Aspect::Unlabeled | Aspect::NoWSD)
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn is_srl_role(role: &str) -> bool {
    let core = role.strip_suffix("-of").unwrap_or(role);
    core.strip_prefix("arg")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

fn is_op_role(role: &str) -> bool {
    role.strip_prefix("op")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

fn build(triples: Vec<Triple>) -> TripleSet {
    TripleSet::from_triples(triples).expect("views never add instance or top triples")
}

/// Selects triples in original order: the chosen non-instance triples
/// plus the instance triples of `keep_instances`.
fn select(t: &TripleSet, keep: &HashSet<usize>, keep_instances: &HashSet<&str>) -> TripleSet {
    let triples = t
        .iter()
        .enumerate()
        .filter(|(i, tr)| {
            keep.contains(i)
                || (tr.kind == TripleKind::Instance && keep_instances.contains(tr.source.as_str()))
        })
        .map(|(_, tr)| tr.clone())
        .collect();
    build(triples)
}

/// Aspect-specific view of a triple set.
pub fn aspect_view(t: &TripleSet, aspect: Aspect) -> TripleSet {
    match aspect {
        Aspect::Unlabeled => build(
            t.iter()
                .map(|tr| match tr.kind {
                    TripleKind::Instance => tr.clone(),
                    _ if tr.is_top() => tr.clone(),
                    _ => Triple {
                        relation: "rel".to_string(),
                        ..tr.clone()
                    },
                })
                .collect(),
        ),
        Aspect::NoWSD => build(
            t.iter()
                .map(|tr| {
                    if tr.kind == TripleKind::Instance || tr.is_top() {
                        Triple {
                            target: strip_sense(&tr.target).to_string(),
                            ..tr.clone()
                        }
                    } else {
                        tr.clone()
                    }
                })
                .collect(),
        ),
        Aspect::Concepts => build(
            t.iter()
                .filter(|tr| tr.kind == TripleKind::Instance)
                .cloned()
                .collect(),
        ),
        Aspect::NamedEnt => {
            let mut keep = HashSet::new();
            let mut vars = HashSet::new();
            let mut name_nodes = HashSet::new();
            for (i, tr) in t.iter().enumerate() {
                if tr.kind == TripleKind::Relation && tr.relation == "name" {
                    keep.insert(i);
                    vars.insert(tr.source.as_str());
                    vars.insert(tr.target.as_str());
                    name_nodes.insert(tr.target.as_str());
                }
            }
            for (i, tr) in t.iter().enumerate() {
                if tr.kind == TripleKind::Attribute
                    && is_op_role(&tr.relation)
                    && name_nodes.contains(tr.source.as_str())
                {
                    keep.insert(i);
                }
            }
            select(t, &keep, &vars)
        }
        Aspect::Negation => {
            let mut keep = HashSet::new();
            let mut vars = HashSet::new();
            for (i, tr) in t.iter().enumerate() {
                if tr.kind == TripleKind::Attribute && tr.relation == "polarity" && tr.target == "-" {
                    keep.insert(i);
                    vars.insert(tr.source.as_str());
                }
            }
            select(t, &keep, &vars)
        }
        Aspect::Reentrancies => {
            let mut incoming: HashMap<&str, usize> = HashMap::new();
            for tr in t.iter().filter(|tr| tr.kind == TripleKind::Relation) {
                *incoming.entry(tr.target.as_str()).or_default() += 1;
            }
            let mut keep = HashSet::new();
            let mut vars = HashSet::new();
            for (i, tr) in t.iter().enumerate() {
                if tr.kind == TripleKind::Relation && incoming[tr.target.as_str()] >= 2 {
                    keep.insert(i);
                    vars.insert(tr.source.as_str());
                    vars.insert(tr.target.as_str());
                }
            }
            select(t, &keep, &vars)
        }
        Aspect::SRL => {
            let mut keep = HashSet::new();
            let mut vars = HashSet::new();
            for (i, tr) in t.iter().enumerate() {
                if tr.kind == TripleKind::Relation && is_srl_role(&tr.relation) {
                    keep.insert(i);
                    vars.insert(tr.source.as_str());
                    vars.insert(tr.target.as_str());
                }
            }
            select(t, &keep, &vars)
        }
    }
}

/// Overall score plus one score per aspect.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownReport<S> {
    pub smatch: MatchResult<S>,
    pub aspects: Vec<(Aspect, MatchResult<S>)>,
}

impl<S: Scalar> BreakdownReport<S> {
    pub fn get(&self, aspect: Aspect) -> &MatchResult<S> {
        &self
            .aspects
            .iter()
            .find(|(a, _)| *a == aspect)
            .expect("report holds every aspect")
            .1
    }

    /// Micro-averages reports of several pairs.
    pub fn aggregate(reports: &[Self]) -> Self {
        let smatch = MatchResult::aggregate(reports.iter().map(|r| &r.smatch));
        let aspects = Aspect::ALL
            .iter()
            .map(|&a| (a, MatchResult::aggregate(reports.iter().map(|r| r.get(a)))))
            .collect();
        Self { smatch, aspects }
    }
}

/// Scores the full triple sets and every aspect view.
pub fn breakdown_triples<S: Scalar, P: PairScorer<S> + ?Sized>(
    gold: &TripleSet,
    pred: &TripleSet,
    scorer: &P,
) -> BreakdownReport<S> {
    let smatch = scorer.score_pair(gold, pred);
    let aspects = Aspect::ALL
        .iter()
        .map(|&a| (a, scorer.score_pair(&aspect_view(gold, a), &aspect_view(pred, a))))
        .collect();
    BreakdownReport { smatch, aspects }
}

pub fn breakdown<S: Scalar, P: PairScorer<S> + ?Sized>(
    gold: &AmrGraph,
    pred: &AmrGraph,
    scorer: &P,
) -> BreakdownReport<S> {
    breakdown_triples(&to_triples(gold), &to_triples(pred), scorer)
}

/// Corpus-level breakdown, micro-averaged per aspect.
pub fn corpus_breakdown<S: Scalar, P: PairScorer<S> + ?Sized>(
    gold: &[TripleSet],
    pred: &[TripleSet],
    scorer: &P,
) -> Result<BreakdownReport<S>, ScoreError> {
    use rayon::prelude::*;
    if gold.len() != pred.len() {
        return Err(ScoreError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(ScoreError::EmptyCorpus);
    }
    let reports: Vec<BreakdownReport<S>> = gold
        .par_iter()
        .zip(pred.par_iter())
        .map(|(g, p)| breakdown_triples(g, p, scorer))
        .collect();
    Ok(BreakdownReport::aggregate(&reports))
}

/// Bag-of-concepts F1: overlap of the concept multisets. Equals the
/// Concepts aspect under exact binary search.
pub fn concept_bag_f1<S: Scalar>(gold: &TripleSet, pred: &TripleSet) -> MatchResult<S> {
    let bag = |t: &TripleSet| {
        let mut m: HashMap<String, usize> = HashMap::new();
        for tr in t.iter().filter(|tr| tr.kind == TripleKind::Instance) {
            *m.entry(tr.target.clone()).or_default() += 1;
        }
        m
    };
    let (g, p) = (bag(gold), bag(pred));
    let keys: BTreeSet<&String> = g.keys().chain(p.keys()).collect();
    let shared: usize = keys
        .iter()
        .map(|k| g.get(*k).copied().unwrap_or(0).min(p.get(*k).copied().unwrap_or(0)))
        .sum();
    MatchResult::from_totals(S::from_count(shared), p.values().sum(), g.values().sum())
}
