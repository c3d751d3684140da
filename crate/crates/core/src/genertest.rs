//! Grammar testing by exhaustive generation: every sentence up to a length
//! bound is generated with the reference engine, then checked for ambiguity,
//! for agreement of the two engines (on the corpus and on near misses made by
//! substituting or deleting one token), and for lookahead completeness and
//! correctness on every proper prefix.
//!
//! The chart side walks token tries with one parse session, rolling back
//! to shared prefixes and skipping whole subtrees once a prefix is dead.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::chart::{ChartOptions, ParseSession, Status};
use crate::grammar::Grammar;
use crate::lookahead::next_tokens;
use crate::reference::{Generated, ReferenceEngine, ReferenceError};
use crate::symbol::Sym;

/// Findings listed in reports; totals are always exact.
pub const MAX_LISTED: usize = 50;

#[derive(Clone, Debug, Default)]
struct Node {
    children: BTreeMap<Sym, usize>,
    sentence: bool,
    /// Sentences in this subtree, this node included.
    size: u64,
}

#[derive(Clone, Debug)]
struct Trie {
    nodes: Vec<Node>,
}

impl Trie {
    fn build<'a>(sentences: impl IntoIterator<Item = &'a [Sym]>) -> Trie {
        let mut nodes = vec![Node::default()];
        for s in sentences {
            let mut at = 0;
            nodes[0].size += 1;
            for &t in s {
                let next = match nodes[at].children.get(&t) {
                    Some(&n) => n,
                    None => {
                        nodes.push(Node::default());
                        let n = nodes.len() - 1;
                        nodes[at].children.insert(t, n);
                        n
                    }
                };
                at = next;
                nodes[at].size += 1;
            }
            nodes[at].sentence = true;
        }
        Trie { nodes }
    }

    fn child(&self, node: usize, token: Sym) -> Option<usize> {
        self.nodes[node].children.get(&token).copied()
    }

    fn walk(&self, tokens: &[Sym]) -> Option<usize> {
        tokens.iter().try_fold(0, |n, &t| self.child(n, t))
    }
}

/// All sentences of a grammar up to a length bound.
#[derive(Clone, Debug)]
pub struct Corpus {
    max_tokens: usize,
    sentences: Vec<Generated>,
    trie: Trie,
}

impl Corpus {
    pub fn generate(grammar: &Grammar, max_tokens: usize) -> Result<Corpus, ReferenceError> {
        let sentences = ReferenceEngine::new(grammar).generate(max_tokens)?;
        Ok(Corpus::from_sentences(max_tokens, sentences))
    }

    pub fn from_sentences(max_tokens: usize, sentences: Vec<Generated>) -> Corpus {
        let symbols: Vec<Vec<Sym>> = sentences.iter().map(|g| g.tokens.iter().map(|t| Sym::new(t)).collect()).collect();
        let trie = Trie::build(symbols.iter().map(Vec::as_slice));
        Corpus { max_tokens, sentences, trie }
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn sentences(&self) -> &[Generated] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn contains<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        let tokens: Vec<Sym> = tokens.iter().map(|t| Sym::new(t.as_ref())).collect();
        self.trie.walk(&tokens).is_some_and(|n| self.trie.nodes[n].sentence)
    }

    /// Number of distinct proper prefixes, the empty one included.
    pub fn prefix_count(&self) -> usize {
        self.trie.nodes.iter().filter(|n| !n.children.is_empty()).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmbiguityReport {
    pub sentences: usize,
    pub ambiguous_count: usize,
    /// Sentences with more than one derivation, with their counts.
    pub ambiguous: Vec<(String, u64)>,
}

/// Texts with more than one derivation. Token sequences that read the same
/// (a multi-word token against its parts) count together.
pub fn ambiguity_check(corpus: &Corpus) -> AmbiguityReport {
    let mut totals: Vec<(String, u64)> = Vec::new();
    for g in &corpus.sentences {
        let text = g.text();
        match totals.last_mut() {
            Some((last, n)) if *last == text => *n += g.derivations,
            _ => totals.push((text, g.derivations)),
        }
    }
    let all: Vec<(String, u64)> = totals.into_iter().filter(|(_, n)| *n > 1).collect();
    AmbiguityReport {
        sentences: corpus.len(),
        ambiguous_count: all.len(),
        ambiguous: all.into_iter().take(MAX_LISTED).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub text: String,
    pub chart: bool,
    pub reference: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub corpus: usize,
    /// Near-miss sequences checked, counted once per way they arise.
    pub near_misses: u64,
    pub near_misses_accepted: u64,
    pub disagreement_count: u64,
    pub disagreements: Vec<Disagreement>,
}

/// Compares the chart parser with the reference engine on the corpus and on
/// its single-token near misses. A sequence of at most the corpus bound is
/// accepted by the reference engine iff it was generated.
pub fn equivalence_check(grammar: &Grammar, corpus: &Corpus, options: ChartOptions) -> EquivalenceReport {
    let mut walker = Walker {
        trie: &corpus.trie,
        session: ParseSession::with_options(grammar.clone(), options),
        surfaces: grammar.surfaces().into_iter().map(Sym::new).collect(),
        tokens: Vec::new(),
        report: EquivalenceReport {
            corpus: corpus.len(),
            near_misses: 0,
            near_misses_accepted: 0,
            disagreement_count: 0,
            disagreements: Vec::new(),
        },
    };
    walker.corpus_node(0);
    walker.report
}

struct Walker<'c> {
    trie: &'c Trie,
    session: ParseSession,
    surfaces: Vec<Sym>,
    tokens: Vec<Sym>,
    report: EquivalenceReport,
}

impl Walker<'_> {
    fn record(&mut self, chart: bool, reference: bool) {
        if chart != reference {
            self.report.disagreement_count += 1;
            if self.report.disagreements.len() < MAX_LISTED {
                let text = join(&self.tokens);
                self.report.disagreements.push(Disagreement { text, chart, reference });
            }
        }
    }

    fn push(&mut self, token: Sym) -> bool {
        self.tokens.push(token);
        matches!(self.session.push(token.as_str()), Ok(s) if s != Status::Dead)
    }

    fn verdict(&self) -> bool {
        self.session.is_complete()
    }

    /// Visits corpus prefix `node`, whose tokens the session has consumed.
    fn corpus_node(&mut self, node: usize) {
        let trie = self.trie;
        if trie.nodes[node].sentence {
            let chart = self.verdict();
            self.record(chart, true);
        }
        let children: Vec<(Sym, usize)> = trie.nodes[node].children.iter().map(|(&t, &c)| (t, c)).collect();
        if children.is_empty() {
            return;
        }
        // Deletion of the next token.
        let all: Vec<usize> = children.iter().map(|&(_, c)| c).collect();
        self.near_miss(&all, Some(node));
        // Substitution of the next token.
        for w in self.surfaces.clone() {
            let others: Vec<usize> = children.iter().filter(|(t, _)| *t != w).map(|&(_, c)| c).collect();
            if others.is_empty() {
                continue;
            }
            let cp = self.session.checkpoint();
            let mirror = trie.child(node, w);
            if self.push(w) {
                self.near_miss(&others, mirror);
            } else {
                self.dead(&others, mirror);
            }
            self.tokens.pop();
            self.session.rollback(cp);
        }
        for (t, c) in children {
            let cp = self.session.checkpoint();
            if self.push(t) {
                self.corpus_node(c);
            } else {
                self.dead(&[c], Some(c));
            }
            self.tokens.pop();
            self.session.rollback(cp);
        }
    }

    /// Feeds every distinct suffix found below any of `sources` after the
    /// current tokens. `mirror` is the corpus node of the current token
    /// sequence, if it is a prefix of some corpus sentence.
    fn near_miss(&mut self, sources: &[usize], mirror: Option<usize>) {
        let trie = self.trie;
        if sources.iter().any(|&n| trie.nodes[n].sentence) {
            self.report.near_misses += 1;
            let chart = self.verdict();
            if chart {
                self.report.near_misses_accepted += 1;
            }
            let reference = mirror.is_some_and(|m| trie.nodes[m].sentence);
            self.record(chart, reference);
        }
        for (t, next) in union_children(trie, sources) {
            let cp = self.session.checkpoint();
            let mirror = mirror.and_then(|m| trie.child(m, t));
            if self.push(t) {
                self.near_miss(&next, mirror);
            } else {
                self.dead(&next, mirror);
            }
            self.tokens.pop();
            self.session.rollback(cp);
        }
    }

    /// The chart rejects every continuation of the current tokens by the
    /// suffixes below `sources`; any of them the corpus contains is a
    /// disagreement.
    fn dead(&mut self, sources: &[usize], mirror: Option<usize>) {
        let trie = self.trie;
        let Some(m) = mirror else {
            self.report.near_misses += union_size(trie, sources);
            return;
        };
        if sources.iter().any(|&n| trie.nodes[n].sentence) {
            self.report.near_misses += 1;
            self.record(false, trie.nodes[m].sentence);
        }
        for (t, next) in union_children(trie, sources) {
            self.tokens.push(t);
            self.dead(&next, trie.child(m, t));
            self.tokens.pop();
        }
    }
}

/// Children of a set of trie nodes, merged by token.
fn union_children(trie: &Trie, sources: &[usize]) -> Vec<(Sym, Vec<usize>)> {
    if let [one] = sources {
        return trie.nodes[*one].children.iter().map(|(&t, &c)| (t, vec![c])).collect();
    }
    let mut merged: BTreeMap<Sym, Vec<usize>> = BTreeMap::new();
    for &n in sources {
        for (&t, &c) in &trie.nodes[n].children {
            merged.entry(t).or_default().push(c);
        }
    }
    merged.into_iter().collect()
}

/// Number of distinct sequences in the union of the subtrees.
fn union_size(trie: &Trie, sources: &[usize]) -> u64 {
    if let [one] = sources {
        return trie.nodes[*one].size;
    }
    let own = u64::from(sources.iter().any(|&n| trie.nodes[n].sentence));
    own + union_children(trie, sources).iter().map(|(_, next)| union_size(trie, next)).sum::<u64>()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LookaheadIssue {
    pub prefix: String,
    pub token: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LookaheadReport {
    pub prefixes: u64,
    pub offers: u64,
    /// True next tokens that were not offered.
    pub miss_count: u64,
    pub misses: Vec<LookaheadIssue>,
    /// Offered tokens that lead to a dead prefix.
    pub false_offer_count: u64,
    pub false_offers: Vec<LookaheadIssue>,
}

/// Lookahead completeness and correctness over every proper corpus prefix.
pub fn lookahead_check(grammar: &Grammar, corpus: &Corpus, options: ChartOptions) -> LookaheadReport {
    let mut report = LookaheadReport {
        prefixes: 0,
        offers: 0,
        miss_count: 0,
        misses: Vec::new(),
        false_offer_count: 0,
        false_offers: Vec::new(),
    };
    let mut session = ParseSession::with_options(grammar.clone(), options);
    let mut path = Vec::new();
    lookahead_node(&corpus.trie, 0, &mut session, &mut path, &mut report);
    report
}

fn lookahead_node(
    trie: &Trie,
    node: usize,
    session: &mut ParseSession,
    path: &mut Vec<Sym>,
    report: &mut LookaheadReport,
) {
    let children: Vec<(Sym, usize)> = trie.nodes[node].children.iter().map(|(&t, &c)| (t, c)).collect();
    if children.is_empty() {
        return;
    }
    report.prefixes += 1;
    let offered: Vec<Sym> = {
        let mut v: Vec<Sym> = next_tokens(session).concrete.iter().map(|c| Sym::new(&c.surface)).collect();
        v.sort();
        v.dedup();
        v
    };
    for &(t, _) in &children {
        if offered.binary_search(&t).is_err() {
            report.miss_count += 1;
            if report.misses.len() < MAX_LISTED {
                report.misses.push(LookaheadIssue { prefix: join(path), token: t.to_string() });
            }
        }
    }
    for &w in &offered {
        report.offers += 1;
        if trie.child(node, w).is_some() {
            // Checked below on the way down.
            continue;
        }
        let cp = session.checkpoint();
        let dead = !matches!(session.push(w.as_str()), Ok(s) if s != Status::Dead);
        session.rollback(cp);
        if dead {
            report.false_offer_count += 1;
            if report.false_offers.len() < MAX_LISTED {
                report.false_offers.push(LookaheadIssue { prefix: join(path), token: w.to_string() });
            }
        }
    }
    for (t, c) in children {
        let cp = session.checkpoint();
        let status = session.push(t.as_str());
        let dead = !matches!(status, Ok(s) if s != Status::Dead);
        if dead && offered.binary_search(&t).is_ok() {
            report.false_offer_count += 1;
            if report.false_offers.len() < MAX_LISTED {
                report.false_offers.push(LookaheadIssue { prefix: join(path), token: t.to_string() });
            }
        }
        if !dead {
            path.push(t);
            lookahead_node(trie, c, session, path, report);
            path.pop();
        }
        session.rollback(cp);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub generation: Duration,
    pub ambiguity: Duration,
    pub equivalence: Duration,
    pub lookahead: Duration,
}

/// Results of a full test run. Timings are kept out of the report text so
/// that runs can be compared byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub max_tokens: usize,
    pub sentences_by_length: BTreeMap<usize, usize>,
    pub ambiguity: AmbiguityReport,
    pub equivalence: EquivalenceReport,
    pub lookahead: Option<LookaheadReport>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.ambiguity.ambiguous_count == 0
            && self.equivalence.disagreement_count == 0
            && self.lookahead.as_ref().is_none_or(|l| l.miss_count == 0 && l.false_offer_count == 0)
    }

    /// One JSON object per line: a summary line, then one line per finding.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut line = |v: serde_json::Value| {
            out.push_str(&v.to_string());
            out.push('\n');
        };
        line(serde_json::json!({
            "kind": "summary",
            "max_tokens": self.max_tokens,
            "sentences_by_length": self.sentences_by_length,
            "ambiguous": self.ambiguity.ambiguous_count,
            "near_misses": self.equivalence.near_misses,
            "near_misses_accepted": self.equivalence.near_misses_accepted,
            "disagreements": self.equivalence.disagreement_count,
            "prefixes": self.lookahead.as_ref().map(|l| l.prefixes),
            "lookahead_misses": self.lookahead.as_ref().map(|l| l.miss_count),
            "false_offers": self.lookahead.as_ref().map(|l| l.false_offer_count),
            "passed": self.passed(),
        }));
        for (text, count) in &self.ambiguity.ambiguous {
            line(serde_json::json!({"kind": "ambiguous", "text": text, "derivations": count}));
        }
        for d in &self.equivalence.disagreements {
            line(
                serde_json::json!({"kind": "disagreement", "text": d.text, "chart": d.chart, "reference": d.reference}),
            );
        }
        if let Some(l) = &self.lookahead {
            for i in &l.misses {
                line(serde_json::json!({"kind": "lookahead-miss", "prefix": i.prefix, "token": i.token}));
            }
            for i in &l.false_offers {
                line(serde_json::json!({"kind": "false-offer", "prefix": i.prefix, "token": i.token}));
            }
        }
        out
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut lengths = String::new();
        for (len, n) in &self.sentences_by_length {
            let _ = write!(lengths, " {len}:{n}");
        }
        writeln!(f, "sentences up to {} tokens: {} (by length:{lengths})", self.max_tokens, self.ambiguity.sentences)?;
        writeln!(f, "ambiguous sentences: {}", self.ambiguity.ambiguous_count)?;
        for (text, count) in &self.ambiguity.ambiguous {
            writeln!(f, "  ambiguous ({count} derivations): {text}")?;
        }
        let e = &self.equivalence;
        writeln!(f, "near misses checked: {} ({} accepted)", e.near_misses, e.near_misses_accepted)?;
        writeln!(f, "engine disagreements: {}", e.disagreement_count)?;
        for d in &e.disagreements {
            writeln!(f, "  chart {} reference {}: {}", verdict(d.chart), verdict(d.reference), d.text)?;
        }
        if let Some(l) = &self.lookahead {
            writeln!(f, "prefixes checked: {} ({} offers)", l.prefixes, l.offers)?;
            writeln!(f, "lookahead misses: {}", l.miss_count)?;
            for i in &l.misses {
                writeln!(f, "  '{}' not offered after: {}", i.token, i.prefix)?;
            }
            writeln!(f, "false offers: {}", l.false_offer_count)?;
            for i in &l.false_offers {
                writeln!(f, "  '{}' offered but dead after: {}", i.token, i.prefix)?;
            }
        }
        writeln!(f, "result: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

fn join(tokens: &[Sym]) -> String {
    tokens.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" ")
}

fn verdict(accepted: bool) -> &'static str {
    if accepted {
        "accepts"
    } else {
        "rejects"
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub max_tokens: usize,
    pub lookahead: bool,
    pub chart: ChartOptions,
}

impl SuiteConfig {
    pub fn new(max_tokens: usize) -> Self {
        SuiteConfig { max_tokens, lookahead: true, chart: ChartOptions::default() }
    }
}

/// Generation, ambiguity, equivalence and (optionally) lookahead checks.
pub fn run_suite(grammar: &Grammar, config: SuiteConfig) -> Result<(SuiteReport, Timings), ReferenceError> {
    let mut timings = Timings::default();
    let clock = Instant::now();
    let corpus = Corpus::generate(grammar, config.max_tokens)?;
    timings.generation = clock.elapsed();

    let clock = Instant::now();
    let ambiguity = ambiguity_check(&corpus);
    timings.ambiguity = clock.elapsed();

    let clock = Instant::now();
    let equivalence = equivalence_check(grammar, &corpus, config.chart);
    timings.equivalence = clock.elapsed();

    let lookahead = config.lookahead.then(|| {
        let clock = Instant::now();
        let report = lookahead_check(grammar, &corpus, config.chart);
        timings.lookahead = clock.elapsed();
        report
    });

    let mut sentences_by_length = BTreeMap::new();
    for g in corpus.sentences() {
        *sentences_by_length.entry(g.tokens.len()).or_insert(0) += 1;
    }
    let report = SuiteReport { max_tokens: config.max_tokens, sentences_by_length, ambiguity, equivalence, lookahead };
    Ok((report, timings))
}
