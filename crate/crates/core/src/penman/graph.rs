use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Lexical category of an attribute value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstKind {
    /// Double-quoted literal; stored without the quotes.
    String,
    Number,
    /// Bare symbol such as `-` or `interrogative`.
    Symbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constant {
    pub kind: ConstKind,
    pub value: String,
}

impl Constant {
    pub fn new(kind: ConstKind, value: impl Into<String>) -> Self {
        Self {
            kind,
            value: value.into(),
        }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Self::new(ConstKind::String, value)
    }

    pub fn symbol(value: impl Into<String>) -> Self {
        Self::new(ConstKind::Symbol, value)
    }

    pub fn number(value: impl Into<String>) -> Self {
        Self::new(ConstKind::Number, value)
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstKind::String => {
                f.write_str("\"")?;
                for c in self.value.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
            ConstKind::Number | ConstKind::Symbol => f.write_str(&self.value),
        }
    }
}

/// Relation between two variables. Roles are stored without the colon.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: String,
    pub role: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Attribute {
    pub source: String,
    pub role: String,
    pub value: Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("variable `{0}` is defined more than once")]
    DuplicateVariable(String),
    #[error("variable `{0}` is referenced but never defined")]
    UndefinedVariable(String),
    #[error("root `{0}` is not a node of the graph")]
    MissingRoot(String),
    #[error("graph is not connected: `{0}` cannot be reached from the root")]
    Disconnected(String),
    #[error("empty role label")]
    EmptyRole,
}

/// A rooted AMR graph: variables carrying concepts, relations between
/// variables and constant-valued attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    root: String,
    nodes: Vec<(String, String)>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    attributes: Vec<Attribute>,
}

impl AmrGraph {
    /// Builds a graph and checks every structural invariant.
    pub fn new(
        root: impl Into<String>,
        nodes: Vec<(String, String)>,
        edges: Vec<Edge>,
        attributes: Vec<Attribute>,
    ) -> Result<Self, GraphError> {
        let g = Self::new_unchecked(root.into(), nodes, edges, attributes)?;
        g.validate()?;
        Ok(g)
    }

    /// Builds the index without the connectivity check.
    pub(crate) fn new_unchecked(
        root: String,
        nodes: Vec<(String, String)>,
        edges: Vec<Edge>,
        attributes: Vec<Attribute>,
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, (var, _)) in nodes.iter().enumerate() {
            if index.insert(var.clone(), i).is_some() {
                return Err(GraphError::DuplicateVariable(var.clone()));
            }
        }
        Ok(Self {
            root,
            nodes,
            index,
            edges,
            attributes,
        })
    }

    /// Checks the invariants: referenced variables exist, the root is a
    /// node and every node is reachable from the root ignoring direction.
    pub fn validate(&self) -> Result<(), GraphError> {
        if !self.index.contains_key(&self.root) {
            return Err(GraphError::MissingRoot(self.root.clone()));
        }
        for e in &self.edges {
            for v in [&e.source, &e.target] {
                if !self.index.contains_key(v) {
                    return Err(GraphError::UndefinedVariable(v.clone()));
                }
            }
            if e.role.is_empty() {
                return Err(GraphError::EmptyRole);
            }
        }
        for a in &self.attributes {
            if !self.index.contains_key(&a.source) {
                return Err(GraphError::UndefinedVariable(a.source.clone()));
            }
            if a.role.is_empty() {
                return Err(GraphError::EmptyRole);
            }
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            let (s, t) = (self.index[&e.source], self.index[&e.target]);
            adj[s].push(t);
            adj[t].push(s);
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.index[&self.root]];
        seen[stack[0]] = true;
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(GraphError::Disconnected(self.nodes[i].0.clone()));
        }
        Ok(())
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Nodes in introduction order as `(variable, concept)`.
    pub fn nodes(&self) -> &[(String, String)] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn concept(&self, var: &str) -> Option<&str> {
        self.index.get(var).map(|&i| self.nodes[i].1.as_str())
    }

    pub fn contains(&self, var: &str) -> bool {
        self.index.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|(v, _)| v.as_str())
    }

    /// Applies `rename` to every variable. The mapping must be injective.
    pub fn rename_variables<F>(&self, mut rename: F) -> Result<Self, GraphError>
    where
        F: FnMut(&str) -> String,
    {
        let map: HashMap<&str, String> = self
            .nodes
            .iter()
            .map(|(v, _)| (v.as_str(), rename(v)))
            .collect();
        let distinct: HashSet<&String> = map.values().collect();
        if distinct.len() != map.len() {
            let dup = map.values().find(|v| map.values().filter(|w| w == v).count() > 1);
            return Err(GraphError::DuplicateVariable(dup.cloned().unwrap_or_default()));
        }
        let nodes = self
            .nodes
            .iter()
            .map(|(v, c)| (map[v.as_str()].clone(), c.clone()))
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                source: map[e.source.as_str()].clone(),
                role: e.role.clone(),
                target: map[e.target.as_str()].clone(),
            })
            .collect();
        let attributes = self
            .attributes
            .iter()
            .map(|a| Attribute {
                source: map[a.source.as_str()].clone(),
                role: a.role.clone(),
                value: a.value.clone(),
            })
            .collect();
        AmrGraph::new(map[self.root.as_str()].clone(), nodes, edges, attributes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn rejects_disconnected() {
        let err = AmrGraph::new("a", nodes(&[("a", "x"), ("b", "y")]), vec![], vec![]);
        assert_eq!(err.unwrap_err(), GraphError::Disconnected("b".into()));
    }

    #[test]
    fn rejects_missing_root_and_duplicates() {
        assert!(matches!(
            AmrGraph::new("z", nodes(&[("a", "x")]), vec![], vec![]),
            Err(GraphError::MissingRoot(_))
        ));
        assert!(matches!(
            AmrGraph::new("a", nodes(&[("a", "x"), ("a", "y")]), vec![], vec![]),
            Err(GraphError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn rename_keeps_structure() {
        let g = AmrGraph::new(
            "a",
            nodes(&[("a", "x"), ("b", "y")]),
            vec![Edge {
                source: "a".into(),
                role: "ARG0".into(),
                target: "b".into(),
            }],
            vec![],
        )
        .unwrap();
        let r = g.rename_variables(|v| format!("{v}9")).unwrap();
        assert_eq!(r.root(), "a9");
        assert_eq!(r.edges()[0].target, "b9");
        assert!(g.rename_variables(|_| "q".into()).is_err());
    }

    #[test]
    fn constant_display_escapes() {
        assert_eq!(Constant::string("a\"b").to_string(), "\"a\\\"b\"");
        assert_eq!(Constant::symbol("-").to_string(), "-");
    }
}
