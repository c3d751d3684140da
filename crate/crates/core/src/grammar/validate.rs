use std::collections::BTreeSet;
use std::fmt;

use super::{CategoryKind, Element, Grammar, Rule};
use crate::symbol::Sym;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{label}: {}", self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }
}

pub(super) fn rule_findings(rule: &Rule) -> Vec<Finding> {
    rule.shape_errors().into_iter().map(|message| Finding { severity: Severity::Error, message }).collect()
}

pub(super) fn grammar_findings(g: &Grammar) -> Vec<Finding> {
    let mut out = Vec::new();
    let heads: BTreeSet<Sym> = g.rules().iter().map(|r| r.head.name).collect();
    if !heads.contains(&g.start()) {
        out.push(Finding {
            severity: Severity::Error,
            message: format!("start category '{}' undefined: no rule has it as head", g.start()),
        });
    }
    for name in g.preterminals().intersection(&heads) {
        out.push(Finding {
            severity: Severity::Error,
            message: format!("'{name}' is used both as a pre-terminal and as a non-terminal"),
        });
    }
    let mut undefined = BTreeSet::new();
    for rule in g.rules() {
        for element in &rule.body {
            if let Element::Cat(c) = element {
                if c.kind == CategoryKind::NonTerminal && !heads.contains(&c.name) {
                    undefined.insert(c.name);
                }
            }
        }
    }
    for name in undefined {
        out.push(Finding { severity: Severity::Warning, message: format!("{name} can never complete") });
    }
    out
}

/// Checks rule shapes and grammar-level consistency. Warnings describe
/// grammars that parse but contain parts that can never be used.
pub fn validate_grammar(g: &Grammar) -> ValidationReport {
    let mut findings = Vec::new();
    for rule in g.rules().iter().chain(g.lexicon().entries()) {
        for mut finding in rule_findings(rule) {
            finding.message = format!("{} (in `{rule}`)", finding.message);
            findings.push(finding);
        }
    }
    findings.extend(grammar_findings(g));
    ValidationReport { findings }
}
