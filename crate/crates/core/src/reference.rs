//! A backtracking interpreter for the same grammars, used as an independent
//! second opinion on the chart parser. It walks derivations top-down with a
//! single global antecedent list, undoing every change on backtracking.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::grammar::{Category, CategoryKind, Element, FeatureStructure, Grammar, RuleKind, Special, Value, VarId};
use crate::symbol::Sym;

pub const DEFAULT_DEPTH_FACTOR: usize = 10;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReferenceError {
    #[error("recursion depth limit of {limit} goal expansions exceeded")]
    DepthExceeded { limit: usize },
}

/// A generated sentence with the number of its derivations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub tokens: Vec<String>,
    pub derivations: u64,
}

impl Generated {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ReferenceEngine<'g> {
    grammar: &'g Grammar,
    depth_factor: usize,
}

impl<'g> ReferenceEngine<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        ReferenceEngine { grammar, depth_factor: DEFAULT_DEPTH_FACTOR }
    }

    /// Allows `factor × max(tokens, 1)` nested goal expansions per derivation.
    pub fn with_depth_factor(mut self, factor: usize) -> Self {
        self.depth_factor = factor;
        self
    }

    fn limit(&self, tokens: usize) -> usize {
        self.depth_factor * tokens.max(1)
    }

    /// Number of derivations of `tokens` from the start category.
    pub fn derivations<S: AsRef<str>>(&self, tokens: &[S]) -> Result<u64, ReferenceError> {
        let tokens: Vec<Sym> = tokens.iter().map(|t| Sym::new(t.as_ref())).collect();
        let mut m = Machine::new(self.grammar, Mode::Parse(tokens.clone()), tokens.len(), self.limit(tokens.len()));
        m.start()?;
        Ok(m.count)
    }

    pub fn accepts<S: AsRef<str>>(&self, tokens: &[S]) -> Result<bool, ReferenceError> {
        Ok(self.derivations(tokens)? > 0)
    }

    /// Every sentence of at most `max_tokens` tokens, ordered by text.
    pub fn generate(&self, max_tokens: usize) -> Result<Vec<Generated>, ReferenceError> {
        let mut m = Machine::new(self.grammar, Mode::Generate(Vec::new()), max_tokens, self.limit(max_tokens));
        m.start()?;
        let mut out: Vec<Generated> = m
            .generated
            .into_iter()
            .map(|(tokens, derivations)| Generated {
                tokens: tokens.iter().map(|s| s.to_string()).collect(),
                derivations,
            })
            .collect();
        out.sort_by_cached_key(|g| g.text());
        Ok(out)
    }
}

enum Mode {
    Parse(Vec<Sym>),
    Generate(Vec<Sym>),
}

#[derive(Clone)]
struct Item {
    /// `None` for a scope opener.
    strong: Option<bool>,
    fs: FeatureStructure,
}

enum Goal {
    Body { rule: usize, index: usize, offset: u32 },
    CloseScopes { mark: usize },
}

struct Frame {
    goal: Goal,
    next: Cont,
    min_yield: usize,
}

type Cont = Option<Rc<Frame>>;

fn min_yield(cont: &Cont) -> usize {
    cont.as_ref().map_or(0, |f| f.min_yield)
}

const UNREACHABLE: usize = usize::MAX / 4;

struct Machine<'g> {
    grammar: &'g Grammar,
    mode: Mode,
    max_tokens: usize,
    limit: usize,
    env: Vec<Option<Value>>,
    trail: Vec<u32>,
    items: Vec<Item>,
    /// Minimum yield of each rule's body suffix, by rule and dot.
    suffix: Vec<Vec<usize>>,
    count: u64,
    generated: BTreeMap<Vec<Sym>, u64>,
}

impl<'g> Machine<'g> {
    fn new(grammar: &'g Grammar, mode: Mode, max_tokens: usize, limit: usize) -> Self {
        Machine {
            grammar,
            mode,
            max_tokens,
            limit,
            env: Vec::new(),
            trail: Vec::new(),
            items: Vec::new(),
            suffix: suffix_yields(grammar),
            count: 0,
            generated: BTreeMap::new(),
        }
    }

    fn start(&mut self) -> Result<(), ReferenceError> {
        let start = Category::nonterminal(self.grammar.start().as_str(), FeatureStructure::new());
        self.expand(&start, 0, None, 0, 0)
    }

    // Unification over frame-relative terms: variable `i` of a term read
    // with offset `o` is global variable `i + o`.

    fn walk(&self, mut v: Value) -> Value {
        while let Value::Var(VarId(i)) = v {
            match self.env[i as usize] {
                Some(w) => v = w,
                None => break,
            }
        }
        v
    }

    fn absolute(v: Value, offset: u32) -> Value {
        match v {
            Value::Var(VarId(i)) => Value::Var(VarId(i + offset)),
            c => c,
        }
    }

    fn unify_values(&mut self, a: Value, b: Value) -> bool {
        let (a, b) = (self.walk(a), self.walk(b));
        if a == b {
            return true;
        }
        match (a, b) {
            (Value::Var(VarId(i)), other) | (other, Value::Var(VarId(i))) => {
                self.env[i as usize] = Some(other);
                self.trail.push(i);
                true
            }
            _ => false,
        }
    }

    fn unify_fs(&mut self, a: &FeatureStructure, oa: u32, b: &FeatureStructure, ob: u32) -> bool {
        for (name, va) in a.iter() {
            if let Some(vb) = b.get(name) {
                if !self.unify_values(Self::absolute(va, oa), Self::absolute(vb, ob)) {
                    return false;
                }
            }
        }
        true
    }

    fn unifiable(&mut self, a: &FeatureStructure, oa: u32, b: &FeatureStructure, ob: u32) -> bool {
        let mark = self.trail.len();
        let ok = self.unify_fs(a, oa, b, ob);
        self.undo(mark);
        ok
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let i = self.trail.pop().unwrap();
            self.env[i as usize] = None;
        }
    }

    fn fresh(&mut self, count: u32) -> u32 {
        let offset = self.env.len() as u32;
        self.env.resize(self.env.len() + count as usize, None);
        offset
    }

    fn absolute_fs(fs: &FeatureStructure, offset: u32) -> FeatureStructure {
        let mut out = FeatureStructure::new();
        for (name, v) in fs.iter() {
            out.set(name, Self::absolute(v, offset));
        }
        out
    }

    fn push_frame(&self, goal: Goal, next: Cont) -> Cont {
        let own = match goal {
            Goal::Body { rule, index, .. } => self.suffix[rule][index],
            Goal::CloseScopes { .. } => 0,
        };
        let min_yield = own.saturating_add(min_yield(&next)).min(UNREACHABLE);
        Some(Rc::new(Frame { goal, next, min_yield }))
    }

    /// Continuation after element `index` of a rule body.
    fn after(&self, rule: usize, index: usize, offset: u32, next: &Cont) -> Cont {
        if index + 1 >= self.grammar.rule(rule).body.len() {
            next.clone()
        } else {
            self.push_frame(Goal::Body { rule, index: index + 1, offset }, next.clone())
        }
    }

    fn run(&mut self, cont: &Cont, pos: usize, depth: usize) -> Result<(), ReferenceError> {
        if pos + min_yield(cont) > self.max_tokens {
            return Ok(());
        }
        let Some(frame) = cont else {
            match &self.mode {
                Mode::Parse(tokens) => {
                    if pos == tokens.len() {
                        self.count += 1;
                    }
                }
                Mode::Generate(out) => *self.generated.entry(out.clone()).or_insert(0) += 1,
            }
            return Ok(());
        };
        match frame.goal {
            Goal::CloseScopes { mark } => {
                let Some(first) = self.items[mark..].iter().position(|i| i.strong.is_none()) else {
                    return self.run(&frame.next, pos, depth);
                };
                let saved = self.items.split_off(mark + first);
                self.items.extend(saved.iter().filter(|i| i.strong == Some(true)).cloned());
                let result = self.run(&frame.next, pos, depth);
                self.items.truncate(mark + first);
                self.items.extend(saved);
                result
            }
            Goal::Body { rule, index, offset } => {
                let grammar = self.grammar;
                let element = &grammar.rule(rule).body[index];
                let next = self.after(rule, index, offset, &frame.next);
                match element {
                    Element::Cat(c) => self.category(c, offset, &next, pos, depth),
                    Element::Special(s) => self.special(s, offset, &next, pos, depth),
                }
            }
        }
    }

    fn category(
        &mut self,
        c: &Category,
        offset: u32,
        next: &Cont,
        pos: usize,
        depth: usize,
    ) -> Result<(), ReferenceError> {
        match c.kind {
            CategoryKind::Terminal => self.consume(c.name, next, pos, depth),
            CategoryKind::PreTerminal => {
                let grammar = self.grammar;
                let entries: Vec<usize> = match &self.mode {
                    Mode::Parse(tokens) => match tokens.get(pos) {
                        Some(t) => grammar.lexicon().for_surface(t.as_str()).collect(),
                        None => return Ok(()),
                    },
                    Mode::Generate(_) => grammar.lexicon().for_preterminal(c.name).collect(),
                };
                for id in entries {
                    let entry = grammar.lexicon().get(id);
                    if entry.head.name != c.name || entry.head.kind != CategoryKind::PreTerminal {
                        continue;
                    }
                    let (mark, env_len) = (self.trail.len(), self.env.len());
                    let own = self.fresh(entry.var_count());
                    if self.unify_fs(&c.fs, offset, &entry.head.fs, own) {
                        let surface = Sym::new(entry.surface().expect("lexical rule"));
                        self.consume(surface, next, pos, depth)?;
                    }
                    self.undo(mark);
                    self.env.truncate(env_len);
                }
                Ok(())
            }
            CategoryKind::NonTerminal => self.expand(c, offset, next.clone(), pos, depth),
        }
    }

    fn consume(&mut self, surface: Sym, next: &Cont, pos: usize, depth: usize) -> Result<(), ReferenceError> {
        match &mut self.mode {
            Mode::Parse(tokens) => {
                if tokens.get(pos) == Some(&surface) {
                    self.run(next, pos + 1, depth)?;
                }
                Ok(())
            }
            Mode::Generate(out) => {
                out.push(surface);
                let result = self.run(next, pos + 1, depth);
                if let Mode::Generate(out) = &mut self.mode {
                    out.pop();
                }
                result
            }
        }
    }

    fn expand(
        &mut self,
        c: &Category,
        offset: u32,
        next: Cont,
        pos: usize,
        depth: usize,
    ) -> Result<(), ReferenceError> {
        if depth >= self.limit {
            return Err(ReferenceError::DepthExceeded { limit: self.limit });
        }
        let grammar = self.grammar;
        let rules: Vec<usize> = grammar.rules_for(c.name).collect();
        for id in rules {
            let rule = grammar.rule(id);
            let (mark, env_len) = (self.trail.len(), self.env.len());
            let own = self.fresh(rule.var_count());
            if self.unify_fs(&c.fs, offset, &rule.head.fs, own) {
                let mut cont = next.clone();
                if rule.kind == RuleKind::ScopeClosing {
                    cont = self.push_frame(Goal::CloseScopes { mark: self.items.len() }, cont);
                }
                if !rule.body.is_empty() {
                    cont = self.push_frame(Goal::Body { rule: id, index: 0, offset: own }, cont);
                }
                self.run(&cont, pos, depth + 1)?;
            }
            self.undo(mark);
            self.env.truncate(env_len);
        }
        Ok(())
    }

    fn special(
        &mut self,
        s: &Special,
        offset: u32,
        next: &Cont,
        pos: usize,
        depth: usize,
    ) -> Result<(), ReferenceError> {
        match s {
            Special::PositionOp(v) => {
                let mark = self.trail.len();
                if self.unify_values(Self::absolute(*v, offset), Value::position(pos)) {
                    self.run(next, pos, depth)?;
                }
                self.undo(mark);
                Ok(())
            }
            Special::ScopeOpener => {
                self.with_item(Item { strong: None, fs: FeatureStructure::new() }, next, pos, depth)
            }
            Special::FwdRef(fs) => {
                self.with_item(Item { strong: Some(false), fs: Self::absolute_fs(fs, offset) }, next, pos, depth)
            }
            Special::StrongFwdRef(fs) => {
                self.with_item(Item { strong: Some(true), fs: Self::absolute_fs(fs, offset) }, next, pos, depth)
            }
            Special::NegBwdRef(fs) => {
                for i in 0..self.items.len() {
                    if self.items[i].strong.is_some() {
                        let target = self.items[i].fs.clone();
                        if self.unifiable(&target, 0, fs, offset) {
                            return Ok(());
                        }
                    }
                }
                self.run(next, pos, depth)
            }
            Special::ComplexBwdRef { positives, negatives } => {
                let mut chosen = None;
                for j in (0..self.items.len()).rev() {
                    if self.items[j].strong.is_none() {
                        continue;
                    }
                    let target = self.items[j].fs.clone();
                    let mut positive = false;
                    for p in positives {
                        positive = positive || self.unifiable(&target, 0, p, offset);
                    }
                    let mut negative = false;
                    for n in negatives {
                        negative = negative || self.unifiable(&target, 0, n, offset);
                    }
                    if positive && !negative {
                        chosen = Some(j);
                        break;
                    }
                }
                let Some(j) = chosen else { return Ok(()) };
                let original = self.items[j].clone();
                for p in positives {
                    let mark = self.trail.len();
                    if self.unify_fs(&original.fs, 0, p, offset) {
                        let mut union = original.fs.clone();
                        for (name, v) in p.iter() {
                            if union.get(name).is_none() {
                                union.set(name, Self::absolute(v, offset));
                            }
                        }
                        self.items[j].fs = union;
                        let result = self.run(next, pos, depth);
                        self.items[j] = original.clone();
                        if result.is_err() {
                            self.undo(mark);
                            return result;
                        }
                    }
                    self.undo(mark);
                }
                Ok(())
            }
        }
    }

    fn with_item(&mut self, item: Item, next: &Cont, pos: usize, depth: usize) -> Result<(), ReferenceError> {
        self.items.push(item);
        let result = self.run(next, pos, depth);
        self.items.pop();
        result
    }
}

/// Least number of tokens each body suffix can derive, by fixpoint over the
/// rules. Categories that derive nothing finite get a huge value.
fn suffix_yields(grammar: &Grammar) -> Vec<Vec<usize>> {
    let mut best: HashMap<Sym, usize> = HashMap::new();
    let lexical = |c: &Category| match c.kind {
        CategoryKind::Terminal => Some(1),
        CategoryKind::PreTerminal => {
            Some(if grammar.lexicon().for_preterminal(c.name).next().is_some() { 1 } else { UNREACHABLE })
        }
        CategoryKind::NonTerminal => None,
    };
    let body_yield = |body: &[Element], best: &HashMap<Sym, usize>| -> usize {
        body.iter()
            .map(|e| match e {
                Element::Special(_) => 0,
                Element::Cat(c) => lexical(c).unwrap_or_else(|| best.get(&c.name).copied().unwrap_or(UNREACHABLE)),
            })
            .fold(0usize, |a, b| a.saturating_add(b).min(UNREACHABLE))
    };
    loop {
        let mut changed = false;
        for rule in grammar.rules() {
            let y = body_yield(&rule.body, &best);
            let slot = best.entry(rule.head.name).or_insert(UNREACHABLE);
            if y < *slot {
                *slot = y;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    grammar.rules().iter().map(|r| (0..=r.body.len()).map(|i| body_yield(&r.body[i..], &best)).collect()).collect()
}
