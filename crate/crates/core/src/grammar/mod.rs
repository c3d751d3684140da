//! The grammar object model: values, flat feature structures, categories,
//! special elements, rules and grammars with an extensible lexicon.

mod notation;
mod unify;
mod validate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::symbol::Sym;

pub use notation::{parse_grammar, parse_rule, parse_unvalidated, ParseError};
pub use unify::{unify, Binding};
pub use validate::{validate_grammar, Finding, Severity, ValidationReport};

/// A logic variable, scoped to one rule or one chart edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Const(Sym),
    Var(VarId),
}

impl Value {
    pub fn constant(text: &str) -> Value {
        Value::Const(Sym::new(text))
    }

    /// The identifier a position operator binds for text position `index`.
    /// Position identifiers start with `#`, which no grammar constant can.
    pub fn position(index: usize) -> Value {
        Value::Const(Sym::new(&format!("#{index}")))
    }

    pub fn as_var(self) -> Option<VarId> {
        match self {
            Value::Var(v) => Some(v),
            Value::Const(_) => None,
        }
    }
}

/// Flat set of feature/value pairs, kept sorted by feature name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    pairs: Vec<(Sym, Value)>,
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a structure from pairs. Fails on a repeated feature name.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Sym, Value)>) -> Result<Self, Sym> {
        let mut fs = FeatureStructure::new();
        for (name, value) in pairs {
            if fs.get(name).is_some() {
                return Err(name);
            }
            fs.set(name, value);
        }
        Ok(fs)
    }

    /// Convenience constructor over constant values, used mostly by tests.
    pub fn constants(pairs: &[(&str, &str)]) -> Self {
        let mut fs = FeatureStructure::new();
        for (name, value) in pairs {
            fs.set(Sym::new(name), Value::constant(value));
        }
        fs
    }

    pub fn get(&self, name: Sym) -> Option<Value> {
        self.pairs.binary_search_by(|(n, _)| n.cmp(&name)).ok().map(|i| self.pairs[i].1)
    }

    /// Inserts or replaces the value of `name`.
    pub fn set(&mut self, name: Sym, value: Value) {
        match self.pairs.binary_search_by(|(n, _)| n.cmp(&name)) {
            Ok(i) => self.pairs[i].1 = value,
            Err(i) => self.pairs.insert(i, (name, value)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Sym, Value)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CategoryKind {
    Terminal,
    PreTerminal,
    NonTerminal,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Category {
    pub kind: CategoryKind,
    pub name: Sym,
    pub fs: FeatureStructure,
}

impl Category {
    pub fn terminal(surface: &str) -> Self {
        Category { kind: CategoryKind::Terminal, name: Sym::new(surface), fs: FeatureStructure::new() }
    }

    pub fn preterminal(name: &str, fs: FeatureStructure) -> Self {
        Category { kind: CategoryKind::PreTerminal, name: Sym::new(name), fs }
    }

    pub fn nonterminal(name: &str, fs: FeatureStructure) -> Self {
        Category { kind: CategoryKind::NonTerminal, name: Sym::new(name), fs }
    }

    pub fn is_terminal(&self) -> bool {
        self.kind == CategoryKind::Terminal
    }

    /// Terminal or pre-terminal: the categories a single token can fill.
    pub fn is_lexical(&self) -> bool {
        matches!(self.kind, CategoryKind::Terminal | CategoryKind::PreTerminal)
    }
}

/// Grammar elements that are not categories and consume no input.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Special {
    FwdRef(FeatureStructure),
    StrongFwdRef(FeatureStructure),
    NegBwdRef(FeatureStructure),
    ScopeOpener,
    PositionOp(Value),
    /// Normal backward references are the single-positive, no-negative case.
    ComplexBwdRef {
        positives: Vec<FeatureStructure>,
        negatives: Vec<FeatureStructure>,
    },
}

impl Special {
    pub fn backward(fs: FeatureStructure) -> Self {
        Special::ComplexBwdRef { positives: vec![fs], negatives: Vec::new() }
    }

    pub fn is_backward(&self) -> bool {
        matches!(self, Special::ComplexBwdRef { .. } | Special::NegBwdRef(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Cat(Category),
    Special(Special),
}

impl Element {
    pub fn as_category(&self) -> Option<&Category> {
        match self {
            Element::Cat(c) => Some(c),
            Element::Special(_) => None,
        }
    }
}

/// Uniform traversal over every value embedded in a term-like structure.
pub trait Terms: Sized {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self;
    fn visit_values(&self, f: &mut dyn FnMut(Value));
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value));

    /// Adds `offset` to every variable id.
    fn shifted(&self, offset: u32) -> Self {
        if offset == 0 {
            return self.map_values(&mut |v| v);
        }
        self.map_values(&mut |v| match v {
            Value::Var(VarId(i)) => Value::Var(VarId(i + offset)),
            c => c,
        })
    }
}

impl Terms for FeatureStructure {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self {
        FeatureStructure { pairs: self.pairs.iter().map(|&(n, v)| (n, f(v))).collect() }
    }
    fn visit_values(&self, f: &mut dyn FnMut(Value)) {
        for &(_, v) in &self.pairs {
            f(v);
        }
    }
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value)) {
        for (_, v) in &mut self.pairs {
            f(v);
        }
    }
}

impl Terms for Category {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self {
        Category { kind: self.kind, name: self.name, fs: self.fs.map_values(f) }
    }
    fn visit_values(&self, f: &mut dyn FnMut(Value)) {
        self.fs.visit_values(f)
    }
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value)) {
        self.fs.update_values(f)
    }
}

impl Terms for Special {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self {
        match self {
            Special::FwdRef(fs) => Special::FwdRef(fs.map_values(f)),
            Special::StrongFwdRef(fs) => Special::StrongFwdRef(fs.map_values(f)),
            Special::NegBwdRef(fs) => Special::NegBwdRef(fs.map_values(f)),
            Special::ScopeOpener => Special::ScopeOpener,
            Special::PositionOp(v) => Special::PositionOp(f(*v)),
            Special::ComplexBwdRef { positives, negatives } => Special::ComplexBwdRef {
                positives: positives.iter().map(|p| p.map_values(f)).collect(),
                negatives: negatives.iter().map(|n| n.map_values(f)).collect(),
            },
        }
    }
    fn visit_values(&self, f: &mut dyn FnMut(Value)) {
        match self {
            Special::FwdRef(fs) | Special::StrongFwdRef(fs) | Special::NegBwdRef(fs) => fs.visit_values(f),
            Special::ScopeOpener => {}
            Special::PositionOp(v) => f(*v),
            Special::ComplexBwdRef { positives, negatives } => {
                positives.iter().chain(negatives).for_each(|fs| fs.visit_values(f))
            }
        }
    }
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value)) {
        match self {
            Special::FwdRef(fs) | Special::StrongFwdRef(fs) | Special::NegBwdRef(fs) => fs.update_values(f),
            Special::ScopeOpener => {}
            Special::PositionOp(v) => f(v),
            Special::ComplexBwdRef { positives, negatives } => {
                positives.iter_mut().chain(negatives).for_each(|fs| fs.update_values(f))
            }
        }
    }
}

impl Terms for Element {
    fn map_values(&self, f: &mut dyn FnMut(Value) -> Value) -> Self {
        match self {
            Element::Cat(c) => Element::Cat(c.map_values(f)),
            Element::Special(s) => Element::Special(s.map_values(f)),
        }
    }
    fn visit_values(&self, f: &mut dyn FnMut(Value)) {
        match self {
            Element::Cat(c) => c.visit_values(f),
            Element::Special(s) => s.visit_values(f),
        }
    }
    fn update_values(&mut self, f: &mut dyn FnMut(&mut Value)) {
        match self {
            Element::Cat(c) => c.update_values(f),
            Element::Special(s) => s.update_values(f),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Normal,
    ScopeClosing,
    Lexical,
}

#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Category,
    pub kind: RuleKind,
    pub body: Vec<Element>,
    /// Source names of the rule's variables, indexed by `VarId`.
    pub var_names: Vec<Sym>,
}

impl Rule {
    pub fn var_count(&self) -> u32 {
        self.var_names.len() as u32
    }

    /// For a lexical rule, the surface string of its terminal.
    pub fn surface(&self) -> Option<&'static str> {
        match (self.kind, self.body.as_slice()) {
            (RuleKind::Lexical, [Element::Cat(t)]) if t.is_terminal() => Some(t.name.as_str()),
            _ => None,
        }
    }

    /// Head and body with variables renumbered by first occurrence, so that
    /// alpha-equivalent rules compare equal.
    fn canonical(&self) -> (Category, Vec<Element>) {
        let mut order: HashMap<VarId, u32> = HashMap::new();
        let mut rename = |v: Value| match v {
            Value::Var(id) => {
                let next = order.len() as u32;
                Value::Var(VarId(*order.entry(id).or_insert(next)))
            }
            c => c,
        };
        let head = self.head.map_values(&mut rename);
        let body = self.body.iter().map(|e| e.map_values(&mut rename)).collect();
        (head, body)
    }

    pub fn alpha_eq(&self, other: &Rule) -> bool {
        self.kind == other.kind && self.canonical() == other.canonical()
    }

    /// Structural problems of this rule on its own (no grammar context).
    pub fn shape_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        match self.kind {
            RuleKind::Lexical => {
                if self.head.kind != CategoryKind::PreTerminal {
                    errors.push(format!("lexical rule head '{}' must be a pre-terminal", self.head.name));
                }
                if self.surface().is_none() {
                    errors.push(format!(
                        "lexical rule for '{}' must have exactly one terminal in its body",
                        self.head.name
                    ));
                }
            }
            RuleKind::Normal | RuleKind::ScopeClosing => {
                if self.head.kind != CategoryKind::NonTerminal {
                    errors.push(format!(
                        "rule head '{}' must be a non-terminal (pre-terminals expand only through lexical rules)",
                        self.head.name
                    ));
                }
            }
        }
        for (i, element) in self.body.iter().enumerate() {
            if let Element::Special(s) = element {
                if s.is_backward() {
                    let follows_lexical = i > 0 && matches!(&self.body[i - 1], Element::Cat(c) if c.is_lexical());
                    if !follows_lexical {
                        errors.push(format!(
                            "backward reference at body position {} of rule for '{}' must immediately follow a terminal or pre-terminal",
                            i + 1,
                            self.head.name
                        ));
                    }
                }
                if let Special::ComplexBwdRef { positives, .. } = s {
                    if positives.is_empty() {
                        errors.push(format!(
                            "complex backward reference in rule for '{}' needs at least one positive structure",
                            self.head.name
                        ));
                    }
                }
            }
        }
        errors
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_eq(other)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("not a lexical rule: {0}")]
    NotLexical(String),
    #[error("invalid lexical rule: {0}")]
    InvalidLexical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexiconUpdate {
    Added,
    /// The entry already existed; nothing changed.
    Duplicate,
}

#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    entries: Vec<Rule>,
    by_surface: HashMap<Sym, Vec<usize>>,
    by_preterminal: HashMap<Sym, Vec<usize>>,
}

impl Lexicon {
    fn push(&mut self, rule: Rule) {
        let id = self.entries.len();
        let surface = Sym::new(rule.surface().expect("lexical rule"));
        self.by_surface.entry(surface).or_default().push(id);
        self.by_preterminal.entry(rule.head.name).or_default().push(id);
        self.entries.push(rule);
    }

    pub fn entries(&self) -> &[Rule] {
        &self.entries
    }

    pub fn get(&self, id: usize) -> &Rule {
        &self.entries[id]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Lexical rules whose terminal equals `surface`.
    pub fn for_surface(&self, surface: &str) -> impl Iterator<Item = usize> + '_ {
        self.by_surface.get(&Sym::new(surface)).into_iter().flatten().copied()
    }

    /// Lexical rules expanding the pre-terminal `name`.
    pub fn for_preterminal(&self, name: Sym) -> impl Iterator<Item = usize> + '_ {
        self.by_preterminal.get(&name).into_iter().flatten().copied()
    }
}

/// A grammar: start category, phrase-structure rules and a lexicon. Cloning is
/// cheap; the lexicon is shared until a clone extends it.
#[derive(Clone, Debug)]
pub struct Grammar {
    start: Sym,
    rules: Arc<Vec<Rule>>,
    by_head: Arc<HashMap<Sym, Vec<usize>>>,
    lexicon: Arc<Lexicon>,
}

impl Grammar {
    /// Assembles a grammar without validating it. Lexical rules go to the lexicon.
    pub fn from_rules(start: &str, rules: impl IntoIterator<Item = Rule>) -> Grammar {
        let mut phrase = Vec::new();
        let mut lexicon = Lexicon::default();
        for rule in rules {
            if rule.kind == RuleKind::Lexical && rule.surface().is_some() {
                if !lexicon.entries.iter().any(|r| r.alpha_eq(&rule)) {
                    lexicon.push(rule);
                }
            } else {
                phrase.push(rule);
            }
        }
        let mut by_head: HashMap<Sym, Vec<usize>> = HashMap::new();
        for (i, rule) in phrase.iter().enumerate() {
            by_head.entry(rule.head.name).or_default().push(i);
        }
        Grammar {
            start: Sym::new(start),
            rules: Arc::new(phrase),
            by_head: Arc::new(by_head),
            lexicon: Arc::new(lexicon),
        }
    }

    pub fn start(&self) -> Sym {
        self.start
    }

    /// Normal and scope-closing rules, in source order.
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Rule {
        &self.rules[id]
    }

    pub fn rules_for(&self, head: Sym) -> impl Iterator<Item = usize> + '_ {
        self.by_head.get(&head).into_iter().flatten().copied()
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Adds a lexical rule. Existing lexical rule ids stay valid, so parse
    /// state built against the previous lexicon can keep using this grammar.
    pub fn add_lexical_rule(&mut self, rule: Rule) -> Result<LexiconUpdate, GrammarError> {
        if rule.kind != RuleKind::Lexical {
            return Err(GrammarError::NotLexical(rule.to_string()));
        }
        let errors = rule.shape_errors();
        if !errors.is_empty() {
            return Err(GrammarError::InvalidLexical(errors.join("; ")));
        }
        if self.rules.iter().any(|r| r.head.name == rule.head.name) {
            return Err(GrammarError::InvalidLexical(format!(
                "'{}' is a non-terminal of this grammar",
                rule.head.name
            )));
        }
        if self.lexicon.entries.iter().any(|r| r.alpha_eq(&rule)) {
            return Ok(LexiconUpdate::Duplicate);
        }
        Arc::make_mut(&mut self.lexicon).push(rule);
        Ok(LexiconUpdate::Added)
    }

    /// Every terminal surface mentioned by a rule or lexicon entry, sorted.
    pub fn surfaces(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::new();
        for rule in self.rules.iter().chain(self.lexicon.entries.iter()) {
            for element in &rule.body {
                if let Element::Cat(c) = element {
                    if c.is_terminal() {
                        out.insert(c.name.as_str());
                    }
                }
            }
        }
        out
    }

    /// Names used as pre-terminals anywhere in the grammar or lexicon.
    pub fn preterminals(&self) -> BTreeSet<Sym> {
        let mut out: BTreeSet<Sym> = self.lexicon.entries.iter().map(|r| r.head.name).collect();
        for rule in self.rules.iter() {
            for element in &rule.body {
                if let Element::Cat(c) = element {
                    if c.kind == CategoryKind::PreTerminal {
                        out.insert(c.name);
                    }
                }
            }
        }
        out
    }

    /// Splits free text into tokens, greedily matching the longest known
    /// multi-word surface (such as `does not`) before falling back to words.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let words: Vec<&str> = text.split_whitespace().collect();
        let phrases: Vec<Vec<&str>> = self
            .surfaces()
            .into_iter()
            .map(|s| s.split_whitespace().collect::<Vec<_>>())
            .filter(|p| p.len() > 1)
            .collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let longest = phrases.iter().filter(|p| words[i..].starts_with(p)).map(|p| p.len()).max().unwrap_or(1);
            out.push(words[i..i + longest].join(" "));
            i += longest;
        }
        out
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) => notation::write_constant(f, c.as_str()),
            Value::Var(VarId(i)) => write!(f, "_{i}"),
        }
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (name, value)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}:{value}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CategoryKind::Terminal => notation::write_terminal(f, self.name.as_str()),
            CategoryKind::PreTerminal | CategoryKind::NonTerminal => {
                if self.kind == CategoryKind::PreTerminal {
                    f.write_str("$")?;
                }
                write!(f, "{}", self.name)?;
                if !self.fs.is_empty() {
                    write!(f, "{}", self.fs)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Special {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Special::FwdRef(fs) => write!(f, ">{fs}"),
            Special::StrongFwdRef(fs) => write!(f, ">>{fs}"),
            Special::NegBwdRef(fs) => write!(f, "/<{fs}"),
            Special::ScopeOpener => f.write_str("//"),
            Special::PositionOp(v) => write!(f, "#{v}"),
            Special::ComplexBwdRef { positives, negatives } => {
                if positives.len() == 1 && negatives.is_empty() {
                    return write!(f, "<{}", positives[0]);
                }
                f.write_str("<(")?;
                let mut first = true;
                for (sign, list) in [("+", positives), ("-", negatives)] {
                    for fs in list {
                        if !first {
                            f.write_str(" ")?;
                        }
                        first = false;
                        write!(f, "{sign}{fs}")?;
                    }
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Cat(c) => write!(f, "{c}"),
            Element::Special(s) => write!(f, "{s}"),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        notation::write_rule(f, self)
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.start)?;
        for rule in self.rules.iter().chain(self.lexicon.entries.iter()) {
            notation::write_rule(f, rule)?;
            writeln!(f)?;
        }
        Ok(())
    }
}
