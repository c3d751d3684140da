//! The chart parser: edges carrying antecedent lists, the parsing steps and
//! the prediction/completion/resolution fixpoint loop.

mod edge;
mod session;
mod steps;
mod tree;

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::grammar::{Grammar, RuleKind};

pub use edge::{Antecedent, Derivation, Edge, EdgeId, EdgeKind, Seed, Source};
pub use session::{parse, parse_with, ParseSession, Refused, SessionCheckpoint, Status};
pub use steps::close_scopes;
pub use tree::SyntaxTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Predict,
    Complete,
    Resolve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChartOptions {
    /// Rotation order of the fixpoint loop.
    pub order: [Step; 3],
    /// Fault injection for harness self-tests: the resolution step does nothing.
    pub skip_resolution: bool,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions { order: [Step::Predict, Step::Complete, Step::Resolve], skip_resolution: false }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Progress {
    predict: usize,
    resolve: usize,
    complete_edges: usize,
    complete_links: usize,
}

/// Chart state after a fixpoint, restorable with [`Chart::rollback`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checkpoint {
    edges: usize,
    links: usize,
    position: usize,
    progress: Progress,
}

#[derive(Clone, Debug)]
pub struct Chart {
    grammar: Grammar,
    options: ChartOptions,
    edges: Vec<Arc<Edge>>,
    derivations: Vec<Vec<Derivation>>,
    index: FxHashMap<Arc<Edge>, EdgeId>,
    by_end: Vec<Vec<EdgeId>>,
    /// (predictor, predicted) pairs in the order they were established.
    links: Vec<(EdgeId, EdgeId)>,
    /// Predicted edge to (link index, predictor).
    predictors: FxHashMap<EdgeId, Vec<(usize, EdgeId)>>,
    passives_by_seed: FxHashMap<EdgeId, Vec<EdgeId>>,
    progress: Progress,
    position: usize,
}

impl Chart {
    /// An initialized chart for position 0, before the first fixpoint.
    pub fn new(grammar: Grammar, options: ChartOptions) -> Chart {
        let mut chart = Chart {
            grammar,
            options,
            edges: Vec::new(),
            derivations: Vec::new(),
            index: FxHashMap::default(),
            by_end: vec![Vec::new()],
            links: Vec::new(),
            predictors: FxHashMap::default(),
            passives_by_seed: FxHashMap::default(),
            progress: Progress::default(),
            position: 0,
        };
        chart.initialize();
        chart
    }

    fn initialize(&mut self) {
        let start = self.grammar.start();
        let ids: Vec<usize> = self.grammar.rules_for(start).collect();
        for id in ids {
            let rule = self.grammar.rule(id);
            let edge = Edge {
                source: Source::Rule(id),
                kind: edge_kind(rule.kind),
                head: rule.head.clone(),
                body: rule.body.clone(),
                dot: 0,
                start: 0,
                end: 0,
                external: Vec::new(),
                internal: Vec::new(),
                seed: Seed::Root,
                var_count: 0,
            }
            .canonical(&Default::default());
            self.insert(edge, Derivation::Init);
        }
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    /// Swaps in a grammar with the same phrase rules and an extended lexicon.
    pub fn set_grammar(&mut self, grammar: Grammar) {
        debug_assert_eq!(grammar.rules().len(), self.grammar.rules().len());
        debug_assert!(grammar.lexicon().len() >= self.grammar.lexicon().len());
        self.grammar = grammar;
    }

    pub fn options(&self) -> ChartOptions {
        self.options
    }

    /// Number of tokens scanned so far.
    pub fn position(&self) -> usize {
        self.position
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().enumerate().map(|(i, e)| (i, &**e))
    }

    pub fn edges_ending_at(&self, position: usize) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.by_end.get(position).into_iter().flatten().map(|&i| (i, &*self.edges[i]))
    }

    pub fn derivations(&self, id: EdgeId) -> &[Derivation] {
        &self.derivations[id]
    }

    /// Looks up an edge equivalent to `edge`.
    pub fn find(&self, edge: &Edge) -> Option<EdgeId> {
        self.index.get(edge).copied()
    }

    /// Adds `edge` unless an equivalent one exists; records `derivation`
    /// either way. Returns the id and whether the edge is new.
    fn insert(&mut self, edge: Edge, derivation: Derivation) -> (EdgeId, bool) {
        if let Some(&id) = self.index.get(&edge) {
            let known = &mut self.derivations[id];
            if !matches!(derivation, Derivation::Predict { .. }) && !known.contains(&derivation) {
                known.push(derivation);
            }
            return (id, false);
        }
        let id = self.edges.len();
        debug_assert!(edge.end >= self.by_end.len().saturating_sub(1));
        while self.by_end.len() <= edge.end {
            self.by_end.push(Vec::new());
        }
        self.by_end[edge.end].push(id);
        if edge.is_passive() {
            let seed = match edge.seed {
                Seed::Edge(s) => Some(s),
                Seed::Own => Some(id),
                Seed::Root | Seed::Scanned => None,
            };
            if let Some(s) = seed {
                self.passives_by_seed.entry(s).or_default().push(id);
            }
        }
        let edge = Arc::new(edge);
        self.index.insert(edge.clone(), id);
        self.edges.push(edge);
        self.derivations.push(vec![derivation]);
        (id, true)
    }

    fn link(&mut self, predictor: EdgeId, predicted: EdgeId) {
        let index = self.links.len();
        self.links.push((predictor, predicted));
        self.predictors.entry(predicted).or_default().push((index, predictor));
    }

    /// Runs prediction, completion and resolution in rotation until three
    /// consecutive steps add nothing. Returns the number of edges added.
    pub fn pcr(&mut self) -> usize {
        let before = self.edges.len();
        let mut idle = 0;
        let mut step = 0;
        loop {
            let size = (self.edges.len(), self.links.len());
            match self.options.order[step] {
                Step::Predict => self.predict(),
                Step::Complete => self.complete(),
                Step::Resolve => self.resolve(),
            }
            if size == (self.edges.len(), self.links.len()) {
                idle += 1;
            } else {
                idle = 0;
            }
            if idle > 2 {
                return self.edges.len() - before;
            }
            step = (step + 1) % 3;
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            edges: self.edges.len(),
            links: self.links.len(),
            position: self.position,
            progress: self.progress,
        }
    }

    /// Restores the chart to an earlier checkpoint of this same chart,
    /// discarding every later token and edge.
    pub fn rollback(&mut self, cp: Checkpoint) {
        assert!(cp.edges <= self.edges.len() && cp.position <= self.position);
        while self.links.len() > cp.links {
            let (_, predicted) = self.links.pop().unwrap();
            let list = self.predictors.get_mut(&predicted).unwrap();
            list.pop();
            if list.is_empty() {
                self.predictors.remove(&predicted);
            }
        }
        while self.edges.len() > cp.edges {
            let id = self.edges.len() - 1;
            let edge = self.edges.pop().unwrap();
            self.derivations.pop();
            self.index.remove(&edge);
            self.passives_by_seed.remove(&id);
            if edge.is_passive() {
                if let Seed::Edge(s) = edge.seed {
                    if let Some(list) = self.passives_by_seed.get_mut(&s) {
                        if list.last() == Some(&id) {
                            list.pop();
                        }
                        if list.is_empty() {
                            self.passives_by_seed.remove(&s);
                        }
                    }
                }
            }
        }
        self.by_end.truncate(cp.position + 1);
        if let Some(last) = self.by_end.last_mut() {
            last.retain(|&id| id < cp.edges);
        }
        self.position = cp.position;
        self.progress = cp.progress;
    }

    /// True if a passive edge for the start category spans the whole input.
    pub fn is_complete(&self) -> bool {
        self.complete_edges().next().is_some()
    }

    pub fn complete_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        let start = self.grammar.start();
        self.edges_ending_at(self.position)
            .filter(move |(_, e)| e.is_passive() && e.seed == Seed::Root && e.start == 0 && e.head.name == start)
            .map(|(i, _)| i)
    }

    /// True if some edge at the current position can still consume input:
    /// an active edge expecting a category.
    pub fn can_continue(&self) -> bool {
        self.edges_ending_at(self.position).any(|(_, e)| !e.is_scanned() && e.next_category().is_some())
    }
}

fn edge_kind(kind: RuleKind) -> EdgeKind {
    match kind {
        RuleKind::ScopeClosing => EdgeKind::ScopeClosing,
        RuleKind::Normal | RuleKind::Lexical => EdgeKind::Normal,
    }
}
