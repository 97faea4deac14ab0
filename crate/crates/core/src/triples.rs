//! Normalized triple bags, the unit compared by the alignment metrics.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::penman::AmrGraph;

pub const INSTANCE: &str = "instance";
pub const TOP: &str = "top";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripleKind {
    Instance,
    Attribute,
    Relation,
}

impl TripleKind {
    pub fn name(self) -> &'static str {
        match self {
            TripleKind::Instance => "instance",
            TripleKind::Attribute => "attribute",
            TripleKind::Relation => "relation",
        }
    }
}

/// For `Relation` the target is a variable; otherwise it is a concept or
/// constant value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub kind: TripleKind,
    pub source: String,
    pub relation: String,
    pub target: String,
}

impl Triple {
    pub fn instance(var: impl Into<String>, concept: impl Into<String>) -> Self {
        Self {
            kind: TripleKind::Instance,
            source: var.into(),
            relation: INSTANCE.to_string(),
            target: concept.into(),
        }
    }

    pub fn attribute(var: impl Into<String>, role: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            kind: TripleKind::Attribute,
            source: var.into(),
            relation: role.into(),
            target: value.into(),
        }
    }

    pub fn relation(src: impl Into<String>, role: impl Into<String>, tgt: impl Into<String>) -> Self {
        Self {
            kind: TripleKind::Relation,
            source: src.into(),
            relation: role.into(),
            target: tgt.into(),
        }
    }

    pub fn top(var: impl Into<String>, concept: impl Into<String>) -> Self {
        Self::attribute(var, TOP, concept)
    }

    /// The virtual root triple.
    pub fn is_top(&self) -> bool {
        self.kind == TripleKind::Attribute && self.relation == TOP
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}, {}, {})",
            self.kind.name(),
            self.relation,
            self.source,
            self.target
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripleError {
    #[error("variable `{0}` has more than one instance triple")]
    MultipleInstances(String),
    #[error("more than one top triple")]
    MultipleTops,
}

/// Multiset of triples plus the variables they mention.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleSet {
    triples: Vec<Triple>,
    variables: Vec<String>,
}

impl TripleSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a set from arbitrary triples. Variables are collected in
    /// first-mention order. Each variable may carry at most one instance
    /// triple and the set at most one top triple.
    pub fn from_triples(triples: Vec<Triple>) -> Result<Self, TripleError> {
        let mut variables = Vec::new();
        let mut seen = HashSet::new();
        let mut with_instance = HashSet::new();
        let mut tops = 0;
        for t in &triples {
            if seen.insert(t.source.as_str()) {
                variables.push(t.source.clone());
            }
            if t.kind == TripleKind::Relation && seen.insert(t.target.as_str()) {
                variables.push(t.target.clone());
            }
            if t.kind == TripleKind::Instance && !with_instance.insert(t.source.as_str()) {
                return Err(TripleError::MultipleInstances(t.source.clone()));
            }
            if t.is_top() {
                tops += 1;
            }
        }
        if tops > 1 {
            return Err(TripleError::MultipleTops);
        }
        Ok(Self { triples, variables })
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Triple> {
        self.triples.iter()
    }

    /// Concept of each variable that has an instance triple.
    pub fn concepts(&self) -> HashMap<&str, &str> {
        self.triples
            .iter()
            .filter(|t| t.kind == TripleKind::Instance)
            .map(|t| (t.source.as_str(), t.target.as_str()))
            .collect()
    }

    /// One triple per line, `kind(relation, source, target)`, sorted.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self.triples.iter().map(Triple::to_string).collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

impl<'a> IntoIterator for &'a TripleSet {
    type Item = &'a Triple;
    type IntoIter = std::slice::Iter<'a, Triple>;
    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

/// Expands a graph into its triples: one instance triple per node, one
/// attribute triple per attribute, one relation triple per edge and the
/// virtual `top` triple holding the root concept. Labels, roles and
/// constants are lowercased; variables are not.
pub fn to_triples(graph: &AmrGraph) -> TripleSet {
    let mut triples = Vec::with_capacity(graph.len() + graph.edges().len() + graph.attributes().len() + 1);
    for (var, concept) in graph.nodes() {
        triples.push(Triple::instance(var.clone(), concept.to_lowercase()));
    }
    for a in graph.attributes() {
        triples.push(Triple::attribute(
            a.source.clone(),
            a.role.to_lowercase(),
            a.value.value.to_lowercase(),
        ));
    }
    for e in graph.edges() {
        triples.push(Triple::relation(
            e.source.clone(),
            e.role.to_lowercase(),
            e.target.clone(),
        ));
    }
    let root_concept = graph.concept(graph.root()).unwrap_or_default().to_lowercase();
    triples.push(Triple::top(graph.root(), root_concept));
    let variables = graph.variables().map(str::to_string).collect();
    TripleSet { triples, variables }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penman::parse_penman;

    #[test]
    fn want_boy_dump() {
        let g = parse_penman("(w / want-01 :ARG0 (b / Boy))").unwrap();
        let t = to_triples(&g);
        assert_eq!(t.len(), 4);
        assert_eq!(
            t.dump(),
            "attribute(top, w, want-01)\ninstance(instance, b, boy)\ninstance(instance, w, want-01)\nrelation(arg0, w, b)\n"
        );
        assert_eq!(t.variables(), &["w".to_string(), "b".to_string()]);
    }

    #[test]
    fn polarity_attribute() {
        let t = to_triples(&parse_penman("(s / sleep-01 :polarity -)").unwrap());
        assert!(t.triples().contains(&Triple::attribute("s", "polarity", "-")));
    }

    #[test]
    fn count_formula() {
        let g = parse_penman(
            "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b :polarity -) :mode \"Imperative\")",
        )
        .unwrap();
        let t = to_triples(&g);
        assert_eq!(t.len(), g.len() + g.edges().len() + g.attributes().len() + 1);
        assert!(t.triples().contains(&Triple::attribute("w", "mode", "imperative")));
    }

    #[test]
    fn from_triples_checks() {
        let ok = TripleSet::from_triples(vec![
            Triple::instance("a", "x"),
            Triple::relation("a", "arg0", "b"),
        ])
        .unwrap();
        assert_eq!(ok.variables(), &["a".to_string(), "b".to_string()]);
        assert_eq!(
            TripleSet::from_triples(vec![Triple::instance("a", "x"), Triple::instance("a", "y")]),
            Err(TripleError::MultipleInstances("a".into()))
        );
        assert_eq!(
            TripleSet::from_triples(vec![Triple::top("a", "x"), Triple::top("b", "y")]),
            Err(TripleError::MultipleTops)
        );
        assert_eq!(TripleSet::empty().dump(), "");
    }
}
