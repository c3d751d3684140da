use serde::Serialize;
use thiserror::Error;

use super::tree::SyntaxTree;
use super::{Chart, ChartOptions, Checkpoint};
use crate::grammar::Grammar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The tokens so far can be continued.
    PrefixValid,
    /// The tokens form a complete text of the start category.
    Complete,
    /// No edge at the current position can consume further input.
    Dead,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::PrefixValid => "prefix-valid",
            Status::Complete => "complete",
            Status::Dead => "dead",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("token '{token}' refused: the session is dead")]
pub struct Refused {
    pub token: String,
}

#[derive(Clone, Copy, Debug)]
pub struct SessionCheckpoint {
    chart: Checkpoint,
    tokens: usize,
    status: Status,
}

/// Incremental parse of a token sequence.
#[derive(Clone, Debug)]
pub struct ParseSession {
    chart: Chart,
    tokens: Vec<String>,
    status: Status,
}

impl ParseSession {
    pub fn new(grammar: Grammar) -> Self {
        Self::with_options(grammar, ChartOptions::default())
    }

    pub fn with_options(grammar: Grammar, options: ChartOptions) -> Self {
        let mut chart = Chart::new(grammar, options);
        chart.pcr();
        let mut session = ParseSession { chart, tokens: Vec::new(), status: Status::Dead };
        session.status = session.compute_status();
        session
    }

    fn compute_status(&self) -> Status {
        if self.chart.is_complete() {
            Status::Complete
        } else if self.chart.can_continue() {
            Status::PrefixValid
        } else {
            Status::Dead
        }
    }

    /// Scans one token and runs the fixpoint. Dead sessions refuse tokens.
    pub fn push(&mut self, token: &str) -> Result<Status, Refused> {
        if self.status == Status::Dead {
            return Err(Refused { token: token.to_owned() });
        }
        self.chart.scan(token);
        self.chart.pcr();
        self.tokens.push(token.to_owned());
        self.status = self.compute_status();
        Ok(self.status)
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn grammar(&self) -> &Grammar {
        self.chart.grammar()
    }

    /// Adopts a grammar whose lexicon extends the current one. Later scans
    /// and lookahead see the new entries; existing edges are untouched.
    pub fn set_grammar(&mut self, grammar: Grammar) {
        self.chart.set_grammar(grammar);
    }

    pub fn checkpoint(&self) -> SessionCheckpoint {
        SessionCheckpoint { chart: self.chart.checkpoint(), tokens: self.tokens.len(), status: self.status }
    }

    pub fn rollback(&mut self, cp: SessionCheckpoint) {
        self.chart.rollback(cp.chart);
        self.tokens.truncate(cp.tokens);
        self.status = cp.status;
    }

    /// Number of distinct derivations of the whole input.
    pub fn derivation_count(&self) -> u128 {
        self.chart.root_derivation_count()
    }

    /// Syntax trees of the whole input, at most `limit` of them; empty if
    /// the parse is not complete.
    pub fn trees(&self, limit: usize) -> Vec<SyntaxTree> {
        self.chart.root_trees(limit)
    }
}

/// Parses `tokens` from scratch. Tokens after the session turns dead are
/// not consumed.
pub fn parse<S: AsRef<str>>(grammar: &Grammar, tokens: &[S]) -> ParseSession {
    parse_with(grammar, tokens, ChartOptions::default())
}

pub fn parse_with<S: AsRef<str>>(grammar: &Grammar, tokens: &[S], options: ChartOptions) -> ParseSession {
    let mut session = ParseSession::with_options(grammar.clone(), options);
    for token in tokens {
        if session.push(token.as_ref()).is_err() {
            break;
        }
    }
    session
}
