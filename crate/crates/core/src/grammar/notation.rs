//! The line-oriented grammar file format.
//!
//! ```text
//! # comment
//! start: text
//! text => s ['.']
//! vp(num:Num) ~> v(neg:+, num:Num, type:tr) np(case:acc)
//! np(id:Id) => #Id $prop(human:H) >>(id:Id, human:H, type:prop)
//! ref(subj:Subj) => ['he'] <(+(human:+, gender:masc) -(id:Subj))
//! newvar => $var(text:V) /<(type:var, var:V) >(type:var, var:V)
//! det => // ['every']
//! noun(text:person, human:+) -> ['person']
//! ```
//!
//! `=>` normal rule, `~>` scope-closing rule, `->` lexical rule. Capitalized
//! or `_`-prefixed words are variables (`_` alone is anonymous); quoted
//! values and every other word are constants. A trailing `\` continues a rule
//! on the next line.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::{
    validate, Category, CategoryKind, Element, FeatureStructure, Grammar, Rule, RuleKind, Special, Value, VarId,
};
use crate::symbol::Sym;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into() }
    }
}

/// One logical line, with the physical position of every character.
struct Logical {
    chars: Vec<(char, usize, usize)>,
    line: usize,
}

fn logical_lines(text: &str) -> Vec<Logical> {
    let mut out = Vec::new();
    let mut current: Option<Logical> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed_end = raw.trim_end();
        let (body, continues) = match trimmed_end.strip_suffix('\\') {
            Some(rest) => (rest, true),
            None => (trimmed_end, false),
        };
        let logical = current.get_or_insert_with(|| Logical { chars: Vec::new(), line: line_no });
        if !logical.chars.is_empty() {
            logical.chars.push((' ', line_no, 0));
        }
        logical.chars.extend(body.chars().enumerate().map(|(col, ch)| (ch, line_no, col + 1)));
        if !continues {
            out.push(current.take().unwrap());
        }
    }
    out.extend(current);
    out
}

fn is_word_char(ch: char) -> bool {
    ch.is_alphanumeric() || matches!(ch, '_' | '-' | '+' | '–' | '.')
}

struct Cursor<'a> {
    chars: &'a [(char, usize, usize)],
    pos: usize,
    fallback_line: usize,
    vars: HashMap<String, VarId>,
    var_names: Vec<Sym>,
}

impl<'a> Cursor<'a> {
    fn new(logical: &'a Logical) -> Self {
        Cursor {
            chars: &logical.chars,
            pos: 0,
            fallback_line: logical.line,
            vars: HashMap::new(),
            var_names: Vec::new(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.0)
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).map(|c| c.0)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        match self.chars.get(self.pos).or(self.chars.last()) {
            Some(&(_, line, col)) => {
                let col = if self.pos >= self.chars.len() { col + 1 } else { col };
                ParseError::at(line, col, message)
            }
            None => ParseError::at(self.fallback_line, 1, message),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn eat(&mut self, text: &str) -> bool {
        self.skip_ws();
        let n = text.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().map(|c| c.0).eq(text.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> Result<(), ParseError> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{text}'")))
        }
    }

    fn word(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(is_word_char) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().map(|c| c.0).collect())
    }

    fn name(&mut self, what: &str) -> Result<Sym, ParseError> {
        match self.word() {
            Some(w) => Ok(Sym::new(&w)),
            None => Err(self.error(format!("expected {what}"))),
        }
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let quote = match self.peek() {
            Some(q @ ('\'' | '"')) => q,
            _ => return Err(self.error("expected quoted text")),
        };
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated quoted text")),
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(ch) => out.push(ch),
                        None => return Err(self.error("dangling escape")),
                    }
                }
                Some(ch) if ch == quote => break,
                Some(ch) => out.push(ch),
            }
            self.pos += 1;
        }
        self.pos += 1;
        Ok(out)
    }

    fn variable(&mut self, name: &str) -> Value {
        if name == "_" {
            let id = VarId(self.var_names.len() as u32);
            self.var_names.push(Sym::new("_"));
            return Value::Var(id);
        }
        let next = VarId(self.var_names.len() as u32);
        let id = *self.vars.entry(name.to_owned()).or_insert(next);
        if id == next {
            self.var_names.push(Sym::new(name));
        }
        Value::Var(id)
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        if matches!(self.peek(), Some('\'' | '"')) {
            let text = self.quoted()?;
            if text.starts_with('#') {
                return Err(self.error("constants may not start with '#'"));
            }
            return Ok(Value::constant(&text));
        }
        let word = self.word().ok_or_else(|| self.error("expected a value"))?;
        if is_variable_name(&word) {
            Ok(self.variable(&word))
        } else {
            Ok(Value::constant(&word))
        }
    }

    /// `( name:value, ... )`; the opening parenthesis must be next.
    fn features(&mut self) -> Result<FeatureStructure, ParseError> {
        self.expect("(")?;
        let mut fs = FeatureStructure::new();
        loop {
            if self.eat(")") {
                return Ok(fs);
            }
            let name = self.name("a feature name")?;
            self.expect(":")?;
            let value = self.value()?;
            if fs.get(name).is_some() {
                return Err(self.error(format!("feature '{name}' given twice")));
            }
            fs.set(name, value);
            self.eat(",");
        }
    }

    fn optional_features(&mut self) -> Result<FeatureStructure, ParseError> {
        self.skip_ws();
        if self.peek() == Some('(') {
            self.features()
        } else {
            Ok(FeatureStructure::new())
        }
    }

    fn complex_reference(&mut self) -> Result<Special, ParseError> {
        self.expect("(")?;
        let (mut positives, mut negatives) = (Vec::new(), Vec::new());
        loop {
            if self.eat(")") {
                break;
            }
            if self.eat("+") {
                positives.push(self.features()?);
            } else if self.eat("-") {
                negatives.push(self.features()?);
            } else {
                return Err(self.error("expected '+(...)' or '-(...)' inside a complex backward reference"));
            }
        }
        if positives.is_empty() {
            return Err(self.error("complex backward reference needs at least one positive structure"));
        }
        Ok(Special::ComplexBwdRef { positives, negatives })
    }

    fn backward_reference(&mut self) -> Result<Special, ParseError> {
        self.skip_ws();
        // `<(+(` or `<(-(` opens the complex form.
        let mut look = self.pos + 1;
        while self.chars.get(look).is_some_and(|c| c.0.is_whitespace()) {
            look += 1;
        }
        let sign = self.chars.get(look).map(|c| c.0);
        let mut after = look + 1;
        while self.chars.get(after).is_some_and(|c| c.0.is_whitespace()) {
            after += 1;
        }
        let complex = self.peek() == Some('(')
            && matches!(sign, Some('+' | '-'))
            && self.chars.get(after).map(|c| c.0) == Some('(');
        if complex {
            self.complex_reference()
        } else {
            Ok(Special::backward(self.optional_features()?))
        }
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        self.skip_ws();
        match (self.peek(), self.peek_at(1)) {
            (Some('['), _) => {
                self.pos += 1;
                let surface = self.quoted()?;
                self.expect("]")?;
                if surface.trim().is_empty() {
                    return Err(self.error("empty terminal"));
                }
                Ok(Element::Cat(Category::terminal(&surface)))
            }
            (Some('/'), Some('/')) => {
                self.pos += 2;
                Ok(Element::Special(Special::ScopeOpener))
            }
            (Some('/'), Some('<')) => {
                self.pos += 2;
                Ok(Element::Special(Special::NegBwdRef(self.optional_features()?)))
            }
            (Some('>'), Some('>')) => {
                self.pos += 2;
                Ok(Element::Special(Special::StrongFwdRef(self.optional_features()?)))
            }
            (Some('>'), _) => {
                self.pos += 1;
                Ok(Element::Special(Special::FwdRef(self.optional_features()?)))
            }
            (Some('<'), _) => {
                self.pos += 1;
                Ok(Element::Special(self.backward_reference()?))
            }
            (Some('#'), _) => {
                self.pos += 1;
                let word = self.word().ok_or_else(|| self.error("expected a variable after '#'"))?;
                if !is_variable_name(&word) {
                    return Err(self.error(format!("position operator needs a variable, found '{word}'")));
                }
                Ok(Element::Special(Special::PositionOp(self.variable(&word))))
            }
            (Some('$'), _) => {
                self.pos += 1;
                let name = self.name("a pre-terminal name")?;
                let fs = self.optional_features()?;
                Ok(Element::Cat(Category { kind: CategoryKind::PreTerminal, name, fs }))
            }
            (Some(ch), _) if is_word_char(ch) => {
                let name = self.name("a category name")?;
                let fs = self.optional_features()?;
                Ok(Element::Cat(Category { kind: CategoryKind::NonTerminal, name, fs }))
            }
            _ => Err(self.error("expected a grammar element")),
        }
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let preterminal_head = self.eat("$");
        let name = self.name("a rule head")?;
        let fs = self.optional_features()?;
        let kind = if self.eat("=>") {
            RuleKind::Normal
        } else if self.eat("~>") {
            RuleKind::ScopeClosing
        } else if self.eat("->") {
            RuleKind::Lexical
        } else {
            return Err(self.error("expected '=>', '~>' or '->'"));
        };
        let head_kind = if preterminal_head || kind == RuleKind::Lexical {
            CategoryKind::PreTerminal
        } else {
            CategoryKind::NonTerminal
        };
        let head = Category { kind: head_kind, name, fs };
        let mut body = Vec::new();
        while !self.at_end() {
            body.push(self.element()?);
        }
        Ok(Rule { head, kind, body, var_names: std::mem::take(&mut self.var_names) })
    }
}

fn is_variable_name(word: &str) -> bool {
    word.starts_with('_') || word.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn is_comment_or_blank(logical: &Logical) -> bool {
    match logical.chars.iter().find(|c| !c.0.is_whitespace()) {
        None => true,
        Some(c) => c.0 == '#',
    }
}

/// Parses a single rule in the grammar notation.
pub fn parse_rule(text: &str) -> Result<Rule, ParseError> {
    let lines = logical_lines(text);
    let mut found = lines.iter().filter(|l| !is_comment_or_blank(l));
    let logical = found.next().ok_or_else(|| ParseError::at(1, 1, "empty rule"))?;
    if let Some(extra) = found.next() {
        return Err(ParseError::at(extra.line, 1, "expected a single rule"));
    }
    Cursor::new(logical).rule()
}

struct Parsed {
    grammar: Grammar,
    rule_lines: Vec<(usize, Rule)>,
    start_line: usize,
}

fn parse_syntax(text: &str) -> Result<Parsed, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut start: Option<(Sym, usize)> = None;
    let mut rules = Vec::new();
    for logical in logical_lines(text) {
        if is_comment_or_blank(&logical) {
            continue;
        }
        let mut cursor = Cursor::new(&logical);
        let checkpoint = cursor.pos;
        if cursor.word().as_deref() == Some("start") && cursor.eat(":") {
            match cursor.name("a start category") {
                Ok(name) if cursor.at_end() => {
                    if start.is_some() {
                        errors.push(ParseError::at(logical.line, 1, "start category declared twice"));
                    }
                    start = Some((name, logical.line));
                }
                Ok(_) => errors.push(cursor.error("unexpected text after start declaration")),
                Err(e) => errors.push(e),
            }
            continue;
        }
        cursor.pos = checkpoint;
        match cursor.rule() {
            Ok(rule) => rules.push((logical.line, rule)),
            Err(e) => errors.push(e),
        }
    }
    let Some((start, start_line)) = start else {
        errors.push(ParseError::at(1, 1, "missing 'start: <category>' declaration"));
        return Err(errors);
    };
    if !errors.is_empty() {
        return Err(errors);
    }
    let grammar = Grammar::from_rules(start.as_str(), rules.iter().map(|(_, r)| r.clone()));
    Ok(Parsed { grammar, rule_lines: rules, start_line })
}

/// Parses the notation without checking grammar-level invariants.
pub fn parse_unvalidated(text: &str) -> Result<Grammar, Vec<ParseError>> {
    parse_syntax(text).map(|p| p.grammar)
}

/// Parses and validates a grammar. Warnings do not fail the parse; use
/// [`validate_grammar`](super::validate_grammar) to see them.
pub fn parse_grammar(text: &str) -> Result<Grammar, Vec<ParseError>> {
    let parsed = parse_syntax(text)?;
    let mut errors: Vec<ParseError> = Vec::new();
    for (line, rule) in &parsed.rule_lines {
        for finding in validate::rule_findings(rule) {
            errors.push(ParseError::at(*line, 1, finding.message));
        }
    }
    for finding in validate::grammar_findings(&parsed.grammar) {
        if finding.severity == validate::Severity::Error {
            errors.push(ParseError::at(parsed.start_line, 1, finding.message));
        }
    }
    if errors.is_empty() {
        Ok(parsed.grammar)
    } else {
        Err(errors)
    }
}

pub(super) fn write_constant(f: &mut fmt::Formatter<'_>, text: &str) -> fmt::Result {
    let plain = !text.is_empty() && !is_variable_name(text) && text.chars().all(is_word_char);
    if plain {
        f.write_str(text)
    } else {
        write_quoted(f, text)
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, text: &str) -> fmt::Result {
    f.write_str("'")?;
    for ch in text.chars() {
        if ch == '\'' || ch == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{ch}")?;
    }
    f.write_str("'")
}

pub(super) fn write_terminal(f: &mut fmt::Formatter<'_>, surface: &str) -> fmt::Result {
    f.write_str("[")?;
    write_quoted(f, surface)?;
    f.write_str("]")
}

struct Named<'r, T> {
    rule: &'r Rule,
    item: &'r T,
}

impl Rule {
    fn var_label(&self, id: VarId) -> String {
        match self.var_names.get(id.0 as usize) {
            Some(name)
                if name.as_str() != "_"
                    && is_variable_name(name.as_str())
                    && self.var_names.iter().filter(|n| *n == name).count() == 1 =>
            {
                name.as_str().to_owned()
            }
            _ => format!("V_{}", id.0),
        }
    }
}

fn write_value(f: &mut fmt::Formatter<'_>, rule: &Rule, value: Value) -> fmt::Result {
    match value {
        Value::Const(c) => write_constant(f, c.as_str()),
        Value::Var(id) => f.write_str(&rule.var_label(id)),
    }
}

impl fmt::Display for Named<'_, FeatureStructure> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (name, value)) in self.item.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}:")?;
            write_value(f, self.rule, value)?;
        }
        f.write_str(")")
    }
}

fn named<'r, T>(rule: &'r Rule, item: &'r T) -> Named<'r, T> {
    Named { rule, item }
}

fn write_category(f: &mut fmt::Formatter<'_>, rule: &Rule, cat: &Category, as_head: bool) -> fmt::Result {
    match cat.kind {
        CategoryKind::Terminal => write_terminal(f, cat.name.as_str()),
        kind => {
            if kind == CategoryKind::PreTerminal && !(as_head && rule.kind == RuleKind::Lexical) {
                f.write_str("$")?;
            }
            write!(f, "{}", cat.name)?;
            if !cat.fs.is_empty() {
                write!(f, "{}", named(rule, &cat.fs))?;
            }
            Ok(())
        }
    }
}

pub(super) fn write_rule(f: &mut fmt::Formatter<'_>, rule: &Rule) -> fmt::Result {
    write_category(f, rule, &rule.head, true)?;
    f.write_str(match rule.kind {
        RuleKind::Normal => " =>",
        RuleKind::ScopeClosing => " ~>",
        RuleKind::Lexical => " ->",
    })?;
    for element in &rule.body {
        f.write_str(" ")?;
        match element {
            Element::Cat(c) => write_category(f, rule, c, false)?,
            Element::Special(s) => match s {
                Special::FwdRef(fs) => write!(f, ">{}", named(rule, fs))?,
                Special::StrongFwdRef(fs) => write!(f, ">>{}", named(rule, fs))?,
                Special::NegBwdRef(fs) => write!(f, "/<{}", named(rule, fs))?,
                Special::ScopeOpener => f.write_str("//")?,
                Special::PositionOp(v) => {
                    f.write_str("#")?;
                    write_value(f, rule, *v)?;
                }
                Special::ComplexBwdRef { positives, negatives } => {
                    if positives.len() == 1 && negatives.is_empty() {
                        write!(f, "<{}", named(rule, &positives[0]))?;
                    } else {
                        f.write_str("<(")?;
                        let mut first = true;
                        for (sign, list) in [("+", positives), ("-", negatives)] {
                            for fs in list {
                                if !first {
                                    f.write_str(" ")?;
                                }
                                first = false;
                                write!(f, "{sign}{}", named(rule, fs))?;
                            }
                        }
                        f.write_str(")")?;
                    }
                }
            },
        }
    }
    Ok(())
}
