use std::fmt;

use rustc_hash::FxHashMap;

use serde::Serialize;

use super::edge::{Derivation, EdgeId, Seed};
use super::Chart;
use crate::grammar::{Category, CategoryKind};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyntaxTree {
    #[serde(serialize_with = "category_text")]
    pub category: Category,
    pub children: Vec<SyntaxTree>,
}

fn category_text<S: serde::Serializer>(c: &Category, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(c)
}

impl SyntaxTree {
    /// Terminal leaves from left to right.
    pub fn leaves(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<&'static str>) {
        if self.category.kind == CategoryKind::Terminal {
            out.push(self.category.name.as_str());
        }
        for child in &self.children {
            child.collect_leaves(out);
        }
    }
}

impl fmt::Display for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "{}", self.category);
        }
        write!(f, "({}", self.category)?;
        for child in &self.children {
            write!(f, " {child}")?;
        }
        f.write_str(")")
    }
}

/// Derivation counting over back-pointers. Edges reached again while being
/// counted lie on a derivation cycle and contribute nothing.
struct Counter<'c> {
    chart: &'c Chart,
    memo: FxHashMap<EdgeId, Option<u128>>,
}

impl Counter<'_> {
    /// Ways to derive the recognized part of edge `id`.
    fn body(&mut self, id: EdgeId) -> u128 {
        match self.memo.get(&id) {
            Some(Some(n)) => return *n,
            Some(None) => return 0,
            None => {}
        }
        self.memo.insert(id, None);
        let mut total: u128 = 0;
        for d in self.chart.derivations(id).to_vec() {
            let n = match d {
                Derivation::Init | Derivation::Scan | Derivation::Predict { .. } => 1,
                Derivation::Resolve { from, .. } => self.body(from),
                Derivation::Complete { active, passive } => {
                    let child = if self.chart.edge(passive).seed == Seed::Scanned { 1 } else { self.body(passive) };
                    self.body(active).saturating_mul(child)
                }
            };
            total = total.saturating_add(n);
        }
        self.memo.insert(id, Some(total));
        total
    }
}

struct Builder<'c> {
    chart: &'c Chart,
    limit: usize,
    active: Vec<EdgeId>,
}

impl Builder<'_> {
    /// Alternative child sequences of edge `id`, at most `limit` of them.
    fn children(&mut self, id: EdgeId) -> Vec<Vec<SyntaxTree>> {
        if self.active.contains(&id) {
            return Vec::new();
        }
        self.active.push(id);
        let mut out: Vec<Vec<SyntaxTree>> = Vec::new();
        for d in self.chart.derivations(id).to_vec() {
            if out.len() >= self.limit {
                break;
            }
            match d {
                Derivation::Init | Derivation::Predict { .. } => out.push(Vec::new()),
                Derivation::Scan => {
                    let edge = self.chart.edge(id);
                    let leaves = edge.body.iter().filter_map(|e| e.as_category()).cloned();
                    out.push(leaves.map(|category| SyntaxTree { category, children: Vec::new() }).collect());
                }
                Derivation::Resolve { from, .. } => {
                    let rest = self.limit - out.len();
                    out.extend(self.children(from).into_iter().take(rest));
                }
                Derivation::Complete { active, passive } => {
                    let prefixes = self.children(active);
                    let subtrees = self.trees(passive);
                    'outer: for prefix in &prefixes {
                        for tree in &subtrees {
                            if out.len() >= self.limit {
                                break 'outer;
                            }
                            let mut seq = prefix.clone();
                            seq.push(tree.clone());
                            out.push(seq);
                        }
                    }
                }
            }
        }
        self.active.pop();
        out
    }

    fn trees(&mut self, id: EdgeId) -> Vec<SyntaxTree> {
        let edge = self.chart.edge(id);
        if edge.head.kind == CategoryKind::Terminal {
            return vec![SyntaxTree { category: edge.head.clone(), children: Vec::new() }];
        }
        let head = edge.head.clone();
        self.children(id).into_iter().map(|children| SyntaxTree { category: head.clone(), children }).collect()
    }
}

impl Chart {
    /// Number of derivations of passive edge `id`.
    pub fn derivation_count(&self, id: EdgeId) -> u128 {
        if self.edge(id).seed == Seed::Scanned {
            return 1;
        }
        Counter { chart: self, memo: FxHashMap::default() }.body(id)
    }

    pub fn root_derivation_count(&self) -> u128 {
        let mut counter = Counter { chart: self, memo: FxHashMap::default() };
        self.complete_edges().map(|id| counter.body(id)).fold(0, u128::saturating_add)
    }

    pub fn trees(&self, id: EdgeId, limit: usize) -> Vec<SyntaxTree> {
        Builder { chart: self, limit, active: Vec::new() }.trees(id)
    }

    pub fn root_trees(&self, limit: usize) -> Vec<SyntaxTree> {
        let mut out = Vec::new();
        for id in self.complete_edges().collect::<Vec<_>>() {
            if out.len() >= limit {
                break;
            }
            out.extend(self.trees(id, limit - out.len()));
        }
        out
    }
}
