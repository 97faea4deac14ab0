//! Random AMR-shaped graphs for property tests, fuzzing and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::penman::{AmrGraph, Attribute, Constant, Edge};

/// Concepts whose hyphen-split stems are pairwise distinct.
pub const CONCEPTS: &[&str] = &[
    "want-01", "go-02", "boy", "girl", "dog", "eat-01", "apple", "city", "see-01", "house",
    "name", "person", "sleep-01", "big", "possible-01", "say-01",
];

pub const ROLES: &[&str] = &["ARG0", "ARG1", "ARG2", "mod", "name", "time", "location", "ARG0-of"];

#[derive(Debug, Clone, Copy)]
pub struct GraphShape {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Chance of each extra re-entrant edge.
    pub reentrancy: f64,
    /// Chance that a node carries an attribute.
    pub attribute: f64,
}

impl Default for GraphShape {
    fn default() -> Self {
        Self {
            min_nodes: 1,
            max_nodes: 6,
            reentrancy: 0.3,
            attribute: 0.3,
        }
    }
}

fn attribute_for<R: Rng>(rng: &mut R, source: String) -> Attribute {
    let (role, value) = match rng.gen_range(0..4) {
        0 => ("polarity", Constant::symbol("-")),
        1 => ("op1", Constant::string(["Paris", "Rome", "Obama"].choose(rng).unwrap().to_string())),
        2 => ("quant", Constant::number(rng.gen_range(1..4).to_string())),
        _ => ("mode", Constant::symbol("interrogative")),
    };
    Attribute {
        source,
        role: role.to_string(),
        value,
    }
}

/// A connected random graph. Variables are `<prefix><index>`.
pub fn random_graph<R: Rng>(rng: &mut R, shape: &GraphShape, prefix: &str) -> AmrGraph {
    let n = rng.gen_range(shape.min_nodes.max(1)..=shape.max_nodes.max(shape.min_nodes.max(1)));
    let vars: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let nodes: Vec<(String, String)> = vars
        .iter()
        .map(|v| (v.clone(), CONCEPTS.choose(rng).unwrap().to_string()))
        .collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        let role = ROLES.choose(rng).unwrap();
        let (source, target, role) = match role.strip_suffix("-of") {
            Some(forward) => (vars[i].clone(), vars[parent].clone(), forward),
            None => (vars[parent].clone(), vars[i].clone(), *role),
        };
        edges.push(Edge {
            source,
            role: role.to_string(),
            target,
        });
    }
    if n > 1 {
        while rng.gen_bool(shape.reentrancy) {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                edges.push(Edge {
                    source: vars[a].clone(),
                    role: ROLES[..3].choose(rng).unwrap().to_string(),
                    target: vars[b].clone(),
                });
            }
            if edges.len() > 3 * n {
                break;
            }
        }
    }
    let mut attributes = Vec::new();
    for v in &vars {
        if rng.gen_bool(shape.attribute) {
            attributes.push(attribute_for(rng, v.clone()));
        }
    }
    AmrGraph::new(vars[0].clone(), nodes, edges, attributes).expect("generated graph is valid")
}

/// A noisy copy: some concepts replaced, some edges relabeled or
/// dropped (keeping connectivity), attributes toggled and variables
/// renamed with `prefix`.
pub fn perturb<R: Rng>(rng: &mut R, graph: &AmrGraph, strength: f64, prefix: &str) -> AmrGraph {
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.shuffle(rng);
    let rename = |v: &str| {
        let i = graph.variables().position(|w| w == v).unwrap();
        format!("{prefix}{}", order[i])
    };
    let nodes = graph
        .nodes()
        .iter()
        .map(|(v, c)| {
            let c = if rng.gen_bool(strength) {
                CONCEPTS.choose(rng).unwrap().to_string()
            } else {
                c.clone()
            };
            (rename(v), c)
        })
        .collect();
    let mut edges: Vec<Edge> = Vec::new();
    for e in graph.edges() {
        let mut e = Edge {
            source: rename(&e.source),
            role: e.role.clone(),
            target: rename(&e.target),
        };
        if rng.gen_bool(strength) {
            e.role = ROLES[..7].choose(rng).unwrap().to_string();
        }
        edges.push(e);
    }
    let mut attributes: Vec<Attribute> = graph
        .attributes()
        .iter()
        .filter(|_| !rng.gen_bool(strength))
        .map(|a| Attribute {
            source: rename(&a.source),
            role: a.role.clone(),
            value: a.value.clone(),
        })
        .collect();
    for (v, _) in graph.nodes() {
        if rng.gen_bool(strength / 2.0) {
            attributes.push(attribute_for(rng, rename(v)));
        }
    }
    let candidate = AmrGraph::new(rename(graph.root()), nodes, edges.clone(), attributes.clone())
        .expect("renaming keeps the graph valid");
    // drop one edge if that keeps the graph connected
    if !edges.is_empty() && rng.gen_bool(strength) {
        let i = rng.gen_range(0..edges.len());
        let mut fewer = edges;
        fewer.remove(i);
        if let Ok(g) = AmrGraph::new(
            candidate.root().to_string(),
            candidate.nodes().to_vec(),
            fewer,
            attributes,
        ) {
            return g;
        }
    }
    candidate
}

/// Copy with every sense-numbered concept given a different sense.
pub fn shift_senses(graph: &AmrGraph) -> AmrGraph {
    let nodes = graph
        .nodes()
        .iter()
        .map(|(v, c)| {
            let base = crate::s2match::strip_sense(c);
            if base.len() < c.len() {
                (v.clone(), format!("{base}-99"))
            } else {
                (v.clone(), c.clone())
            }
        })
        .collect();
    AmrGraph::new(
        graph.root().to_string(),
        nodes,
        graph.edges().to_vec(),
        graph.attributes().to_vec(),
    )
    .expect("same structure")
}
