use std::collections::{HashMap, HashSet};

use super::graph::{AmrGraph, Constant};
use super::inverse_surface;

struct Writer<'g> {
    graph: &'g AmrGraph,
    incident: HashMap<&'g str, Vec<usize>>,
    introduced: HashMap<&'g str, bool>,
    forward: HashSet<&'g str>,
    emitted: Vec<bool>,
    out: String,
    indent: Option<usize>,
}

impl<'g> Writer<'g> {
    fn new(graph: &'g AmrGraph, indent: Option<usize>) -> Self {
        let mut incident: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, e) in graph.edges().iter().enumerate() {
            incident.entry(e.source.as_str()).or_default().push(i);
            if e.target != e.source {
                incident.entry(e.target.as_str()).or_default().push(i);
            }
        }
        let mut forward = HashSet::new();
        let mut stack = vec![graph.root()];
        forward.insert(graph.root());
        while let Some(v) = stack.pop() {
            for e in graph.edges().iter().filter(|e| e.source == v) {
                if forward.insert(e.target.as_str()) {
                    stack.push(e.target.as_str());
                }
            }
        }
        Self {
            graph,
            incident,
            forward,
            introduced: HashMap::new(),
            emitted: vec![false; graph.edges().len()],
            out: String::new(),
            indent,
        }
    }

    fn separator(&mut self, depth: usize) {
        match self.indent {
            Some(width) => {
                self.out.push('\n');
                self.out.extend(std::iter::repeat_n(' ', width * depth));
            }
            None => self.out.push(' '),
        }
    }

    fn node(&mut self, var: &'g str, depth: usize) {
        self.introduced.insert(var, true);
        let concept = self.graph.concept(var).unwrap_or_default();
        self.out.push('(');
        self.out.push_str(var);
        self.out.push_str(" / ");
        if concept.is_empty() || concept.contains(|c: char| c.is_whitespace() || "()\":/".contains(c)) {
            self.out.push_str(&Constant::string(concept).to_string());
        } else {
            self.out.push_str(concept);
        }
        for a in self.graph.attributes().iter().filter(|a| a.source == var) {
            self.separator(depth + 1);
            self.out.push(':');
            self.out.push_str(&a.role);
            self.out.push(' ');
            self.out.push_str(&a.value.to_string());
        }
        // Outgoing edges first; incoming ones only for nodes that cannot
        // be reached from the root along edge direction.
        let incident = self.incident.get(var).cloned().unwrap_or_default();
        let outgoing = incident.iter().filter(|&&i| self.graph.edges()[i].source == var);
        let incoming = incident.iter().filter(|&&i| self.graph.edges()[i].source != var);
        let ordered: Vec<usize> = outgoing.chain(incoming).copied().collect();
        for i in ordered {
            if self.emitted[i] {
                continue;
            }
            let e = &self.graph.edges()[i];
            let (role, other) = if e.source == var {
                (e.role.clone(), e.target.as_str())
            } else {
                let source = e.source.as_str();
                if self.forward.contains(source) || self.introduced.contains_key(source) {
                    continue;
                }
                (inverse_surface(&e.role), source)
            };
            self.emitted[i] = true;
            self.separator(depth + 1);
            self.out.push(':');
            self.out.push_str(&role);
            self.out.push(' ');
            if self.introduced.contains_key(other) {
                self.out.push_str(other);
            } else {
                self.node(other, depth + 1);
            }
        }
        self.out.push(')');
    }
}

/// Serializes a graph as indented Penman text rooted at its root variable.
pub fn serialize_penman(graph: &AmrGraph) -> String {
    let mut w = Writer::new(graph, Some(4));
    w.node(graph.root(), 0);
    w.out
}

/// Single-line serialization, as used by line-oriented tools.
pub fn serialize_penman_compact(graph: &AmrGraph) -> String {
    let mut w = Writer::new(graph, None);
    w.node(graph.root(), 0);
    w.out
}
