use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::graph::{AmrGraph, Attribute, ConstKind, Constant, Edge};
use super::invert_role;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnbalancedParens,
    MissingSlash,
    MissingConcept,
    MissingValue(String),
    DuplicateVariable(String),
    UndefinedVariable(String),
    UnterminatedString,
    UnexpectedToken(String),
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => f.write_str("no Penman expression found"),
            Self::UnbalancedParens => f.write_str("unbalanced parentheses"),
            Self::MissingSlash => f.write_str("expected `/` after node variable"),
            Self::MissingConcept => f.write_str("expected a concept after `/`"),
            Self::MissingValue(role) => write!(f, "role `:{role}` has no value"),
            Self::DuplicateVariable(v) => write!(f, "variable `{v}` defined more than once"),
            Self::UndefinedVariable(v) => write!(f, "reference to undefined variable `{v}`"),
            Self::UnterminatedString => f.write_str("unterminated string literal"),
            Self::UnexpectedToken(t) => write!(f, "unexpected token `{t}`"),
            Self::TrailingInput => f.write_str("text after the closing parenthesis"),
        }
    }
}

/// Syntax error with its 1-based line and column and byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Slash,
    Role(String),
    Str(String),
    Sym(String),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Open => "(".into(),
            Tok::Close => ")".into(),
            Tok::Slash => "/".into(),
            Tok::Role(r) => format!(":{r}"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(s) => s.clone(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, (usize, ParseErrorKind)> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    let is_delim = |c: char| c.is_whitespace() || c == '(' || c == ')' || c == '"';
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                toks.push((pos, Tok::Open));
            }
            ')' => {
                chars.next();
                toks.push((pos, Tok::Close));
            }
            '/' => {
                chars.next();
                toks.push((pos, Tok::Slash));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                let mut closed = false;
                while let Some((_, c)) = chars.next() {
                    match c {
                        '\\' => {
                            if let Some((_, e)) = chars.next() {
                                s.push(e);
                            }
                        }
                        '"' => {
                            closed = true;
                            break;
                        }
                        c => s.push(c),
                    }
                }
                if !closed {
                    return Err((pos, ParseErrorKind::UnterminatedString));
                }
                toks.push((pos, Tok::Str(s)));
            }
            ':' => {
                chars.next();
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if is_delim(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                toks.push((pos, Tok::Role(s)));
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if is_delim(c) || c == '/' {
                        break;
                    }
                    s.push(c);
                    chars.next();
                }
                toks.push((pos, Tok::Sym(s)));
            }
        }
    }
    Ok(toks)
}

enum Target {
    Node(String),
    Str(String),
    Sym(String, usize),
}

struct RawEdge {
    source: String,
    role: String,
    target: Target,
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    nodes: Vec<(String, String)>,
    defined: HashMap<String, usize>,
    raw: Vec<RawEdge>,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> Result<T, (usize, ParseErrorKind)> {
        Err((self.offset(), kind))
    }

    /// Parses `( var / concept role-value* )` and returns the variable.
    fn node(&mut self) -> Result<String, (usize, ParseErrorKind)> {
        match self.bump() {
            Some(Tok::Open) => {}
            _ => {
                self.pos -= 1;
                return self.fail(ParseErrorKind::UnexpectedToken(
                    self.peek().map_or_else(String::new, Tok::describe),
                ));
            }
        }
        let var_at = self.offset();
        let var = match self.bump() {
            Some(Tok::Sym(v)) => v,
            None => return Err((self.end, ParseErrorKind::UnbalancedParens)),
            Some(t) => {
                self.pos -= 1;
                return self.fail(ParseErrorKind::UnexpectedToken(t.describe()));
            }
        };
        match self.peek() {
            Some(Tok::Slash) => {
                self.pos += 1;
            }
            None => return Err((self.end, ParseErrorKind::UnbalancedParens)),
            _ => return self.fail(ParseErrorKind::MissingSlash),
        }
        let concept = match self.peek() {
            Some(Tok::Sym(c)) => c.clone(),
            Some(Tok::Str(c)) => c.clone(),
            None => return Err((self.end, ParseErrorKind::UnbalancedParens)),
            _ => return self.fail(ParseErrorKind::MissingConcept),
        };
        self.pos += 1;
        if self.defined.contains_key(&var) {
            return Err((var_at, ParseErrorKind::DuplicateVariable(var)));
        }
        self.defined.insert(var.clone(), self.nodes.len());
        self.nodes.push((var.clone(), concept));

        loop {
            match self.peek() {
                Some(Tok::Close) => {
                    self.pos += 1;
                    return Ok(var);
                }
                Some(Tok::Role(_)) => {
                    let Some(Tok::Role(role)) = self.bump() else {
                        unreachable!()
                    };
                    let at = self.offset();
                    if let Some(Tok::Open) = self.peek() {
                        let slot = self.raw.len();
                        self.raw.push(RawEdge {
                            source: var.clone(),
                            role,
                            target: Target::Node(String::new()),
                        });
                        let child = self.node()?;
                        self.raw[slot].target = Target::Node(child);
                        continue;
                    }
                    let target = match self.peek() {
                        Some(Tok::Str(s)) => {
                            let s = s.clone();
                            self.pos += 1;
                            Target::Str(s)
                        }
                        Some(Tok::Sym(s)) => {
                            let s = s.clone();
                            self.pos += 1;
                            Target::Sym(s, at)
                        }
                        None => return Err((self.end, ParseErrorKind::UnbalancedParens)),
                        Some(_) => return self.fail(ParseErrorKind::MissingValue(role)),
                    };
                    self.raw.push(RawEdge {
                        source: var.clone(),
                        role,
                        target,
                    });
                }
                None => return Err((self.end, ParseErrorKind::UnbalancedParens)),
                Some(t) => return self.fail(ParseErrorKind::UnexpectedToken(t.describe())),
            }
        }
    }
}

fn directed(source: String, role: String, target: String) -> Edge {
    match invert_role(&role) {
        Some(forward) => Edge {
            source: target,
            role: forward.to_string(),
            target: source,
        },
        None => Edge {
            source,
            role,
            target,
        },
    }
}

/// Bare symbols of this shape are read as variable references; anything
/// else unresolved is a constant.
fn looks_like_variable(s: &str) -> bool {
    let letters = s.chars().take_while(|c| c.is_ascii_lowercase()).count();
    (1..=2).contains(&letters) && s[letters..].chars().all(|c| c.is_ascii_digit())
}

fn is_number(s: &str) -> bool {
    s.chars().any(|c| c.is_ascii_digit())
        && s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        && s.parse::<f64>().is_ok()
}

fn locate(text: &str, offset: usize, kind: ParseErrorKind) -> ParseError {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| {
        before[i + 1..].chars().count()
    }) + 1;
    ParseError {
        offset,
        line,
        column,
        kind,
    }
}

/// Parses one Penman expression into an [`AmrGraph`].
pub fn parse_penman(text: &str) -> Result<AmrGraph, ParseError> {
    let toks = lex(text).map_err(|(o, k)| locate(text, o, k))?;
    if toks.is_empty() {
        return Err(locate(text, text.len(), ParseErrorKind::Empty));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        nodes: Vec::new(),
        defined: HashMap::new(),
        raw: Vec::new(),
    };
    let root = p.node().map_err(|(o, k)| locate(text, o, k))?;
    if p.pos < toks.len() {
        let (o, t) = &toks[p.pos];
        let kind = if *t == Tok::Close {
            ParseErrorKind::UnbalancedParens
        } else {
            ParseErrorKind::TrailingInput
        };
        return Err(locate(text, *o, kind));
    }

    let mut edges = Vec::new();
    let mut attributes = Vec::new();
    for RawEdge {
        source,
        role,
        target,
    } in p.raw
    {
        match target {
            Target::Node(v) => edges.push(directed(source, role, v)),
            Target::Sym(s, _) if p.defined.contains_key(&s) => {
                edges.push(directed(source, role, s))
            }
            Target::Sym(s, at) if looks_like_variable(&s) => {
                return Err(locate(text, at, ParseErrorKind::UndefinedVariable(s)));
            }
            Target::Sym(s, _) => {
                let kind = if is_number(&s) {
                    ConstKind::Number
                } else {
                    ConstKind::Symbol
                };
                attributes.push(Attribute {
                    source,
                    role,
                    value: Constant::new(kind, s),
                });
            }
            Target::Str(s) => attributes.push(Attribute {
                source,
                role,
                value: Constant::string(s),
            }),
        }
    }
    let graph = AmrGraph::new_unchecked(root, p.nodes, edges, attributes)
        .expect("duplicates rejected during parsing");
    debug_assert!(graph.validate().is_ok());
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(s: &str, r: &str, t: &str) -> Edge {
        Edge {
            source: s.into(),
            role: r.into(),
            target: t.into(),
        }
    }

    #[test]
    fn simple_graph() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy))").unwrap();
        assert_eq!(g.root(), "w");
        assert_eq!(g.concept("w"), Some("want-01"));
        assert_eq!(g.concept("b"), Some("boy"));
        assert_eq!(g.edges(), &[edge("w", "ARG0", "b")]);
    }

    #[test]
    fn inverse_role_is_normalized() {
        let g = parse_penman("(g / go-02 :ARG0-of (p / possible-01))").unwrap();
        assert_eq!(g.root(), "g");
        assert_eq!(g.edges(), &[edge("p", "ARG0", "g")]);
    }

    #[test]
    fn verbatim_of_roles() {
        let g = parse_penman("(a / army :consist-of (s / soldier))").unwrap();
        assert_eq!(g.edges(), &[edge("a", "consist-of", "s")]);
        let g = parse_penman("(a / x :prep-on-behalf-of (s / y))").unwrap();
        assert_eq!(g.edges()[0].role, "prep-on-behalf-of");
    }

    #[test]
    fn reentrancy_creates_edge() {
        let g = parse_penman("(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))").unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(g.edges()[2], edge("g", "ARG0", "b"));
    }

    #[test]
    fn forward_reference() {
        let g = parse_penman("(a / and :op1 b :op2 (b / boy))").unwrap();
        assert_eq!(g.edges()[0], edge("a", "op1", "b"));
    }

    #[test]
    fn constants() {
        let g = parse_penman(
            r#"(p / person :name (n / name :op1 "Barack" :op2 "O\"b") :polarity - :quant 5 :mode interrogative)"#,
        )
        .unwrap();
        let attrs: Vec<_> = g
            .attributes()
            .iter()
            .map(|a| (a.role.as_str(), a.value.kind, a.value.value.as_str()))
            .collect();
        assert_eq!(
            attrs,
            vec![
                ("op1", ConstKind::String, "Barack"),
                ("op2", ConstKind::String, "O\"b"),
                ("polarity", ConstKind::Symbol, "-"),
                ("quant", ConstKind::Number, "5"),
                ("mode", ConstKind::Symbol, "interrogative"),
            ]
        );
    }

    #[test]
    fn variables_are_case_sensitive() {
        let g = parse_penman("(x / a :ARG0 (X / b))").unwrap();
        assert_eq!(g.len(), 2);
    }

    #[test]
    fn cycles_are_accepted() {
        let g = parse_penman("(a / x :ARG0 (b / y :ARG1 a))").unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    fn kind_of(text: &str) -> ParseErrorKind {
        parse_penman(text).unwrap_err().kind
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(kind_of("(w / want-01"), ParseErrorKind::UnbalancedParens);
        assert_eq!(kind_of("(w / want-01))"), ParseErrorKind::UnbalancedParens);
        assert_eq!(kind_of("(w want-01)"), ParseErrorKind::MissingSlash);
        assert_eq!(
            kind_of("(w / a :ARG0 (w / b))"),
            ParseErrorKind::DuplicateVariable("w".into())
        );
        assert_eq!(
            kind_of("(w / a :ARG0 b2)"),
            ParseErrorKind::UndefinedVariable("b2".into())
        );
        assert_eq!(kind_of(""), ParseErrorKind::Empty);
        assert_eq!(kind_of("(a / b) (c / d)"), ParseErrorKind::TrailingInput);
        assert_eq!(kind_of("(a / b :op1 \"x)"), ParseErrorKind::UnterminatedString);
        assert_eq!(kind_of("(a / )"), ParseErrorKind::MissingConcept);
        assert_eq!(
            kind_of("(a / b :ARG0)"),
            ParseErrorKind::MissingValue("ARG0".into())
        );
    }

    #[test]
    fn error_positions() {
        let e = parse_penman("(a / b\n   :ARG0 (a / c))").unwrap_err();
        assert_eq!((e.line, e.column), (2, 11));
        assert_eq!(e.offset, 17);
    }
}
