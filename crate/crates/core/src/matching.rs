//! Alignment search shared by the binary and graded metrics.
//!
//! Variables of the predicted graph ("left") are mapped injectively onto
//! variables of the gold graph ("right"). The score of a mapping splits
//! into per-variable unary terms (instance, top and attribute triples)
//! and per-edge-group terms (relation triples between a pair of
//! variables), which lets move gains be computed locally.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::scalar::{max_of, Scalar};
use crate::triples::{TripleKind, TripleSet};

pub(crate) type Mapping = Vec<Option<usize>>;

/// Value comparison for instance and top triples.
pub(crate) struct Similarity<'a, S> {
    pub sim: &'a (dyn Fn(&str, &str) -> S + Sync),
    pub grade_top: bool,
}

#[derive(Default)]
struct VarFacts {
    concept: Option<String>,
    top: Option<String>,
    attrs: HashMap<(String, String), usize>,
}

struct Group {
    src: usize,
    tgt: usize,
    roles: Vec<(String, usize)>,
    cap: usize,
}

pub(crate) struct Problem<S> {
    n_left: usize,
    n_right: usize,
    unary: Vec<Vec<S>>,
    left_concepts: Vec<Option<String>>,
    right_concepts: Vec<Option<String>>,
    groups: Vec<Group>,
    var_groups: Vec<Vec<usize>>,
    right_rel: HashMap<(usize, usize), HashMap<String, usize>>,
}

fn facts(ts: &TripleSet) -> (HashMap<&str, usize>, Vec<VarFacts>) {
    let index: HashMap<&str, usize> = ts
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut facts: Vec<VarFacts> = (0..index.len()).map(|_| VarFacts::default()).collect();
    for t in ts {
        let f = &mut facts[index[t.source.as_str()]];
        match t.kind {
            TripleKind::Instance => f.concept = Some(t.target.clone()),
            TripleKind::Attribute if t.is_top() => f.top = Some(t.target.clone()),
            TripleKind::Attribute => {
                *f.attrs
                    .entry((t.relation.clone(), t.target.clone()))
                    .or_default() += 1;
            }
            TripleKind::Relation => {}
        }
    }
    (index, facts)
}

impl<S: Scalar> Problem<S> {
    pub fn new(left: &TripleSet, right: &TripleSet, similarity: &Similarity<'_, S>) -> Self {
        let (left_index, left_facts) = facts(left);
        let (right_index, right_facts) = facts(right);
        let n_left = left_facts.len();
        let n_right = right_facts.len();

        let mut unary = vec![vec![S::zero(); n_right]; n_left];
        for (l, lf) in left_facts.iter().enumerate() {
            for (r, rf) in right_facts.iter().enumerate() {
                let mut u = S::zero();
                if let (Some(a), Some(b)) = (&lf.concept, &rf.concept) {
                    u = u + (similarity.sim)(a, b);
                }
                if let (Some(a), Some(b)) = (&lf.top, &rf.top) {
                    if similarity.grade_top {
                        u = u + (similarity.sim)(a, b);
                    } else if a == b {
                        u = u + S::one();
                    }
                }
                let mut shared = 0;
                for (key, &c) in &lf.attrs {
                    if let Some(&d) = rf.attrs.get(key) {
                        shared += c.min(d);
                    }
                }
                if shared > 0 {
                    u = u + S::from_count(shared);
                }
                unary[l][r] = u;
            }
        }

        let mut grouped: BTreeMap<(usize, usize), BTreeMap<String, usize>> = BTreeMap::new();
        for t in left.iter().filter(|t| t.kind == TripleKind::Relation) {
            let key = (left_index[t.source.as_str()], left_index[t.target.as_str()]);
            *grouped.entry(key).or_default().entry(t.relation.clone()).or_default() += 1;
        }
        let mut groups = Vec::with_capacity(grouped.len());
        let mut var_groups = vec![Vec::new(); n_left];
        for ((src, tgt), roles) in grouped {
            let gi = groups.len();
            var_groups[src].push(gi);
            if tgt != src {
                var_groups[tgt].push(gi);
            }
            let roles: Vec<(String, usize)> = roles.into_iter().collect();
            let cap = roles.iter().map(|(_, c)| c).sum();
            groups.push(Group {
                src,
                tgt,
                roles,
                cap,
            });
        }
        let mut right_rel: HashMap<(usize, usize), HashMap<String, usize>> = HashMap::new();
        for t in right.iter().filter(|t| t.kind == TripleKind::Relation) {
            let key = (right_index[t.source.as_str()], right_index[t.target.as_str()]);
            *right_rel.entry(key).or_default().entry(t.relation.clone()).or_default() += 1;
        }

        Self {
            n_left,
            n_right,
            unary,
            left_concepts: left_facts.into_iter().map(|f| f.concept).collect(),
            right_concepts: right_facts.into_iter().map(|f| f.concept).collect(),
            groups,
            var_groups,
            right_rel,
        }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    fn group_value(&self, g: &Group, mapping: &[Option<usize>]) -> usize {
        let (Some(x), Some(y)) = (mapping[g.src], mapping[g.tgt]) else {
            return 0;
        };
        let Some(right) = self.right_rel.get(&(x, y)) else {
            return 0;
        };
        g.roles
            .iter()
            .map(|(role, c)| right.get(role).map_or(0, |d| (*c).min(*d)))
            .sum()
    }

    /// Full score of a mapping, summed in a fixed order.
    pub fn score(&self, mapping: &[Option<usize>]) -> S {
        let mut total = S::zero();
        for (l, m) in mapping.iter().enumerate() {
            if let Some(r) = m {
                total = total + self.unary[l][*r].clone();
            }
        }
        let rel: usize = self.groups.iter().map(|g| self.group_value(g, mapping)).sum();
        total + S::from_count(rel)
    }

    /// Score change from applying `changes` to `mapping`. The mapping is
    /// restored before returning.
    fn gain(&self, mapping: &mut Mapping, changes: &[(usize, Option<usize>)]) -> S {
        let mut touched: Vec<usize> = Vec::new();
        for &(l, _) in changes {
            for &g in &self.var_groups[l] {
                if !touched.contains(&g) {
                    touched.push(g);
                }
            }
        }
        let before: usize = touched
            .iter()
            .map(|&g| self.group_value(&self.groups[g], mapping))
            .sum();
        let mut delta = S::zero();
        let mut saved = Vec::with_capacity(changes.len());
        for &(l, new) in changes {
            let old = mapping[l];
            if let Some(r) = old {
                delta = delta - self.unary[l][r].clone();
            }
            if let Some(r) = new {
                delta = delta + self.unary[l][r].clone();
            }
            saved.push((l, old));
            mapping[l] = new;
        }
        let after: usize = touched
            .iter()
            .map(|&g| self.group_value(&self.groups[g], mapping))
            .sum();
        for (l, old) in saved.into_iter().rev() {
            mapping[l] = old;
        }
        if after >= before {
            delta + S::from_count(after - before)
        } else {
            delta - S::from_count(before - after)
        }
    }

    /// Greedy concept pairing over a seeded shuffle, then random fill.
    pub fn initial_mapping<R: Rng>(&self, rng: &mut R) -> Mapping {
        let mut left_order: Vec<usize> = (0..self.n_left).collect();
        let mut right_order: Vec<usize> = (0..self.n_right).collect();
        left_order.shuffle(rng);
        right_order.shuffle(rng);
        let mut mapping = vec![None; self.n_left];
        let mut used = vec![false; self.n_right];
        for &l in &left_order {
            let Some(concept) = &self.left_concepts[l] else {
                continue;
            };
            if let Some(&r) = right_order
                .iter()
                .find(|&&r| !used[r] && self.right_concepts[r].as_ref() == Some(concept))
            {
                mapping[l] = Some(r);
                used[r] = true;
            }
        }
        for &l in &left_order {
            if mapping[l].is_some() {
                continue;
            }
            let free: Vec<usize> = right_order.iter().copied().filter(|&r| !used[r]).collect();
            if free.is_empty() {
                break;
            }
            let r = free[rng.gen_range(0..free.len())];
            mapping[l] = Some(r);
            used[r] = true;
        }
        mapping
    }

    /// Steepest-ascent over single remaps and pairwise swaps until no
    /// move strictly improves the score.
    pub fn hill_climb(&self, mut mapping: Mapping) -> (Mapping, S) {
        let mut current = self.score(&mapping);
        loop {
            let mut used = vec![false; self.n_right];
            for r in mapping.iter().flatten() {
                used[*r] = true;
            }
            let mut best_gain = S::zero();
            let mut best_move: Option<Vec<(usize, Option<usize>)>> = None;
            for l in 0..self.n_left {
                for (r, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
                    let mv = [(l, Some(r))];
                    let g = self.gain(&mut mapping, &mv);
                    if g > best_gain {
                        best_gain = g;
                        best_move = Some(mv.to_vec());
                    }
                }
            }
            for a in 0..self.n_left {
                for b in a + 1..self.n_left {
                    if mapping[a] == mapping[b] {
                        continue;
                    }
                    let mv = [(a, mapping[b]), (b, mapping[a])];
                    let g = self.gain(&mut mapping, &mv);
                    if g > best_gain {
                        best_gain = g;
                        best_move = Some(mv.to_vec());
                    }
                }
            }
            let Some(mv) = best_move else {
                break;
            };
            let previous = mapping.clone();
            for (l, r) in mv {
                mapping[l] = r;
            }
            let next = self.score(&mapping);
            if next > current {
                current = next;
            } else {
                mapping = previous;
                break;
            }
        }
        (mapping, current)
    }

    /// Branch and bound over total injective maps of the left variables.
    /// Requires `n_left <= n_right`. Returns `None` if the node budget ran
    /// out before the search space was exhausted.
    pub fn exact(&self, incumbent: S, budget: u64) -> Option<(Option<Mapping>, S)> {
        debug_assert!(self.n_left <= self.n_right);
        let max_unary: Vec<S> = self
            .unary
            .iter()
            .map(|row| row.iter().cloned().fold(S::zero(), max_of))
            .collect();
        let mut order: Vec<usize> = (0..self.n_left).collect();
        order.sort_by_key(|&l| std::cmp::Reverse(self.var_groups[l].len()));
        let candidates: Vec<Vec<usize>> = (0..self.n_left)
            .map(|l| {
                let mut rs: Vec<usize> = (0..self.n_right).collect();
                rs.sort_by(|&a, &b| {
                    self.unary[l][b]
                        .partial_cmp(&self.unary[l][a])
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                rs
            })
            .collect();
        let rem_unary = max_unary.iter().cloned().fold(S::zero(), |a, b| a + b);
        let rem_cap = self.groups.iter().map(|g| g.cap).sum();
        let mut state = Search {
            problem: self,
            order,
            candidates,
            max_unary,
            mapping: vec![None; self.n_left],
            used: vec![false; self.n_right],
            best: incumbent,
            best_mapping: None,
            nodes: 0,
            budget,
        };
        let complete = state.descend(0, S::zero(), rem_unary, rem_cap);
        complete.then_some((state.best_mapping, state.best))
    }
}

struct Search<'p, S> {
    problem: &'p Problem<S>,
    order: Vec<usize>,
    candidates: Vec<Vec<usize>>,
    max_unary: Vec<S>,
    mapping: Mapping,
    used: Vec<bool>,
    best: S,
    best_mapping: Option<Mapping>,
    nodes: u64,
    budget: u64,
}

impl<S: Scalar> Search<'_, S> {
    fn descend(&mut self, depth: usize, partial: S, rem_unary: S, rem_cap: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            return false;
        }
        if depth == self.order.len() {
            if partial > self.best {
                self.best = partial;
                self.best_mapping = Some(self.mapping.clone());
            }
            return true;
        }
        let bound = partial.clone() + rem_unary.clone() + S::from_count(rem_cap) + S::slack();
        if bound <= self.best {
            return true;
        }
        let l = self.order[depth];
        let rem_unary = rem_unary - self.max_unary[l].clone();
        for i in 0..self.candidates[l].len() {
            let r = self.candidates[l][i];
            if self.used[r] {
                continue;
            }
            self.mapping[l] = Some(r);
            self.used[r] = true;
            let mut gained = 0;
            let mut closed = 0;
            for &g in &self.problem.var_groups[l] {
                let group = &self.problem.groups[g];
                if self.mapping[group.src].is_some() && self.mapping[group.tgt].is_some() {
                    gained += self.problem.group_value(group, &self.mapping);
                    closed += group.cap;
                }
            }
            let next = partial.clone() + self.problem.unary[l][r].clone() + S::from_count(gained);
            let ok = self.descend(depth + 1, next, rem_unary.clone(), rem_cap - closed);
            self.used[r] = false;
            self.mapping[l] = None;
            if !ok {
                return false;
            }
        }
        true
    }
}
