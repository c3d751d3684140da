//! Possible next tokens of an unfinished text, read off the chart.
//!
//! Abstract options describe a class of tokens as a category minus some
//! exceptions; concrete options are the actual surfaces with the pre-terminal
//! they come from (or none for function words written in the grammar).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::chart::{Antecedent, Edge, ParseSession, Status};
use crate::grammar::{
    Binding, Category, CategoryKind, Element, FeatureStructure, Grammar, Special, Terms, Value, VarId,
};
use crate::symbol::Sym;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AbstractOption {
    pub category: Category,
    pub exceptions: Vec<Category>,
}

impl AbstractOption {
    fn new(category: Category, exceptions: Vec<Category>) -> Self {
        AbstractOption { category, exceptions }.canonical()
    }

    /// Variables renumbered by first occurrence, exceptions deduplicated and
    /// sorted, so that alpha-equivalent options compare equal.
    fn canonical(self) -> Self {
        let mut order: Vec<VarId> = Vec::new();
        let mut rename = |v: Value| match v {
            Value::Var(id) => {
                let i = order.iter().position(|&o| o == id).unwrap_or_else(|| {
                    order.push(id);
                    order.len() - 1
                });
                Value::Var(VarId(i as u32))
            }
            c => c,
        };
        let category = self.category.map_values(&mut rename);
        let mut exceptions: Vec<Category> = self.exceptions.iter().map(|e| e.map_values(&mut rename)).collect();
        exceptions.sort_by_cached_key(|e| e.to_string());
        exceptions.dedup();
        AbstractOption { category, exceptions }
    }

    fn var_count(&self) -> u32 {
        let mut max = 0;
        let mut visit = |v: Value| {
            if let Value::Var(VarId(i)) = v {
                max = max.max(i + 1);
            }
        };
        self.category.visit_values(&mut visit);
        self.exceptions.iter().for_each(|e| e.visit_values(&mut visit));
        max
    }
}

impl fmt::Display for AbstractOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {{", self.category)?;
        for (i, e) in self.exceptions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ConcreteOption {
    pub surface: String,
    /// Pre-terminal the surface comes from; `None` for grammar terminals.
    pub source: Option<String>,
}

impl fmt::Display for ConcreteOption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ← {}", self.surface, self.source.as_deref().unwrap_or("∅"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub abstract_options: Vec<AbstractOption>,
    pub concrete: Vec<ConcreteOption>,
}

impl Options {
    pub fn surfaces(&self) -> BTreeSet<&str> {
        self.concrete.iter().map(|c| c.surface.as_str()).collect()
    }
}

/// Abstract options at the end of the session's input, sorted by their text.
pub fn abstract_options(session: &ParseSession) -> Vec<AbstractOption> {
    if session.status() == Status::Dead {
        return Vec::new();
    }
    let chart = session.chart();
    let mut out: BTreeMap<String, AbstractOption> = BTreeMap::new();
    for (_, edge) in chart.edges_ending_at(chart.position()) {
        if edge.is_scanned() {
            continue;
        }
        let Some(t) = edge.next_category().filter(|c| c.is_lexical()) else { continue };
        for option in edge_options(edge, t) {
            out.insert(option.to_string(), option);
        }
    }
    out.into_values().collect()
}

fn edge_options(edge: &Edge, t: &Category) -> Vec<AbstractOption> {
    let following = &edge.body[edge.dot + 1..];
    let refs: Vec<&FeatureStructure> = edge.antecedents().filter_map(Antecedent::fs).collect();
    let fresh = || Binding::with_capacity(edge.var_count);
    let mut out = Vec::new();
    match following.first() {
        Some(Element::Special(Special::ComplexBwdRef { positives, negatives })) => {
            for f1 in &refs {
                for positive in positives {
                    let mut b = fresh();
                    if !b.unify_fs(f1, positive) {
                        continue;
                    }
                    let exceptions = negatives
                        .iter()
                        .filter_map(|n| {
                            let mut b = fresh();
                            b.unify_fs(f1, n).then(|| b.apply(t))
                        })
                        .collect();
                    out.push(AbstractOption::new(b.apply(t), exceptions));
                }
            }
        }
        Some(Element::Special(Special::NegBwdRef(f))) => {
            let exceptions = refs
                .iter()
                .filter_map(|f1| {
                    let mut b = fresh();
                    b.unify_fs(f, f1).then(|| b.apply(t))
                })
                .collect();
            out.push(AbstractOption::new(t.clone(), exceptions));
        }
        _ => {
            let lexical = following.iter().take_while(|e| e.as_category().is_some_and(Category::is_lexical)).count();
            match following.get(lexical) {
                Some(Element::Special(Special::ComplexBwdRef { positives, .. })) if lexical > 0 => {
                    for f1 in &refs {
                        for positive in positives {
                            let mut b = fresh();
                            if b.unify_fs(f1, positive) {
                                out.push(AbstractOption::new(b.apply(t), Vec::new()));
                            }
                        }
                    }
                }
                _ => out.push(AbstractOption::new(t.clone(), Vec::new())),
            }
        }
    }
    out
}

/// The surfaces the abstract options allow, by lexicon lookup for
/// pre-terminal options. Sorted by source name, function words first, then
/// by surface.
pub fn concrete_options(grammar: &Grammar, options: &[AbstractOption]) -> Vec<ConcreteOption> {
    let mut out: BTreeSet<(Option<Sym>, String)> = BTreeSet::new();
    for option in options {
        match option.category.kind {
            CategoryKind::Terminal => {
                if option.exceptions.is_empty() {
                    out.insert((None, option.category.name.as_str().to_owned()));
                }
            }
            CategoryKind::PreTerminal => {
                let offset = option.var_count();
                for id in grammar.lexicon().for_preterminal(option.category.name) {
                    let entry = grammar.lexicon().get(id);
                    let head = entry.head.fs.shifted(offset);
                    let b = Binding::new();
                    if b.unifiable(&head, &option.category.fs)
                        && !option.exceptions.iter().any(|x| b.unifiable(&head, &x.fs))
                    {
                        out.insert((Some(option.category.name), entry.surface().expect("lexical rule").to_owned()));
                    }
                }
            }
            CategoryKind::NonTerminal => {}
        }
    }
    out.into_iter()
        .map(|(source, surface)| ConcreteOption { surface, source: source.map(|s| s.as_str().to_owned()) })
        .collect()
}

/// Both option sets for the session's current input. The chart is not touched.
pub fn next_tokens(session: &ParseSession) -> Options {
    let abstract_options = abstract_options(session);
    let concrete = concrete_options(session.grammar(), &abstract_options);
    Options { abstract_options, concrete }
}

/// Token sequences of up to `depth` tokens that can follow the session's
/// input, found by applying the lookahead repeatedly and parsing each
/// candidate. Sequences are listed in depth-first order.
pub fn continuations(session: &ParseSession, depth: usize) -> Vec<Vec<String>> {
    let mut work = session.clone();
    let mut out = Vec::new();
    let mut path = Vec::new();
    extend(&mut work, depth, &mut path, &mut out);
    out
}

fn extend(session: &mut ParseSession, depth: usize, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    if depth == 0 {
        return;
    }
    let surfaces: BTreeSet<String> = next_tokens(session).concrete.into_iter().map(|c| c.surface).collect();
    for w in surfaces {
        let cp = session.checkpoint();
        if matches!(session.push(&w), Ok(status) if status != Status::Dead) {
            path.push(w);
            out.push(path.clone());
            extend(session, depth - 1, path, out);
            path.pop();
        }
        session.rollback(cp);
    }
}
