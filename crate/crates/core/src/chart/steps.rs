use super::edge::{Antecedent, Derivation, Edge, EdgeId, EdgeKind, Seed, Source};
use super::{edge_kind, Chart};
use crate::grammar::{Binding, Category, CategoryKind, Element, FeatureStructure, Special, Terms, Value};

/// The antecedents a completed edge passes to its parent. Behind the first
/// scope opener of a scope-closing edge only strong references survive.
pub fn close_scopes(kind: EdgeKind, internal: &[Antecedent]) -> Vec<Antecedent> {
    match (kind, internal.iter().position(|a| *a == Antecedent::Opener)) {
        (EdgeKind::ScopeClosing, Some(first)) => internal[..first]
            .iter()
            .chain(internal[first..].iter().filter(|a| matches!(a, Antecedent::Ref { strong: true, .. })))
            .cloned()
            .collect(),
        _ => internal.to_vec(),
    }
}

/// Elementwise unification of two antecedent lists of equal shape, returning
/// the merged items.
fn unify_lists(binding: &mut Binding, a: &[Antecedent], b: &[Antecedent]) -> Option<Vec<Antecedent>> {
    if a.len() != b.len() {
        return None;
    }
    let mut ok = true;
    for pair in a.iter().zip(b) {
        ok &= match pair {
            (Antecedent::Opener, Antecedent::Opener) => true,
            (Antecedent::Ref { strong: s1, fs: f1 }, Antecedent::Ref { strong: s2, fs: f2 }) => {
                s1 == s2 && binding.unify_fs(f1, f2)
            }
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    Some(
        a.iter()
            .zip(b)
            .map(|pair| match pair {
                (Antecedent::Ref { strong, fs: f1 }, Antecedent::Ref { fs: f2, .. }) => {
                    Antecedent::Ref { strong: *strong, fs: binding.merge(f1, f2) }
                }
                _ => Antecedent::Opener,
            })
            .collect(),
    )
}

/// Whether antecedent structure `f` can serve a complex backward reference.
fn matches_reference(
    binding: &Binding,
    f: &FeatureStructure,
    positives: &[FeatureStructure],
    negatives: &[FeatureStructure],
) -> bool {
    positives.iter().any(|p| binding.unifiable(f, p)) && !negatives.iter().any(|n| binding.unifiable(f, n))
}

impl Chart {
    pub(super) fn predict(&mut self) {
        while self.progress.predict < self.edges.len() {
            let id = self.progress.predict;
            self.progress.predict += 1;
            let x = self.edges[id].clone();
            let Some(active) = x.next_category().filter(|c| c.kind == CategoryKind::NonTerminal) else {
                continue;
            };
            let rules: Vec<usize> = self.grammar.rules_for(active.name).collect();
            for r in rules {
                let rule = self.grammar.rule(r);
                let offset = x.var_count;
                let head = rule.head.shifted(offset);
                let mut binding = Binding::with_capacity(offset + rule.var_count());
                if !binding.unify_fs(&active.fs, &head.fs) {
                    continue;
                }
                let edge = Edge {
                    source: Source::Rule(r),
                    kind: edge_kind(rule.kind),
                    head: Category { kind: head.kind, name: head.name, fs: binding.merge(&head.fs, &active.fs) },
                    body: rule.body.iter().map(|e| e.shifted(offset)).collect(),
                    dot: 0,
                    start: x.end,
                    end: x.end,
                    external: x.antecedents().cloned().collect(),
                    internal: Vec::new(),
                    seed: Seed::Own,
                    var_count: 0,
                }
                .canonical(&binding);
                let (s, _) = self.insert(edge, Derivation::Predict { from: id });
                self.link(id, s);
            }
        }
    }

    pub(super) fn complete(&mut self) {
        loop {
            if self.progress.complete_links < self.links.len() {
                let l = self.progress.complete_links;
                self.progress.complete_links += 1;
                let (x, s) = self.links[l];
                let done = self.progress.complete_edges;
                let passives: Vec<EdgeId> = self
                    .passives_by_seed
                    .get(&s)
                    .map(|v| v.iter().copied().take_while(|&p| p < done).collect())
                    .unwrap_or_default();
                for p in passives {
                    self.combine(x, p);
                }
            } else if self.progress.complete_edges < self.edges.len() {
                let p = self.progress.complete_edges;
                self.progress.complete_edges += 1;
                let edge = self.edges[p].clone();
                if !edge.is_passive() {
                    continue;
                }
                let seed = match edge.seed {
                    Seed::Edge(s) => s,
                    Seed::Own => p,
                    Seed::Root => continue,
                    Seed::Scanned => {
                        let actives: Vec<EdgeId> = self
                            .edges_ending_at(edge.start)
                            .filter(|(_, x)| {
                                x.next_category().is_some_and(|c| c.kind == edge.head.kind && c.name == edge.head.name)
                            })
                            .map(|(i, _)| i)
                            .collect();
                        for x in actives {
                            self.combine_scanned(x, p);
                        }
                        continue;
                    }
                };
                let done = self.progress.complete_links;
                let predictors: Vec<EdgeId> = self
                    .predictors
                    .get(&seed)
                    .map(|v| v.iter().take_while(|(l, _)| *l < done).map(|&(_, x)| x).collect())
                    .unwrap_or_default();
                for x in predictors {
                    self.combine(x, p);
                }
            } else {
                return;
            }
        }
    }

    /// Completes active edge `x` with the passive rule edge `p` it predicted.
    fn combine(&mut self, x: EdgeId, p: EdgeId) {
        let (active, passive) = (self.edges[x].clone(), self.edges[p].clone());
        let Some(expected) = active.next_category() else { return };
        if expected.name != passive.head.name {
            return;
        }
        let offset = active.var_count;
        let mut binding = Binding::with_capacity(offset + passive.var_count);
        if !binding.unify_fs(&expected.fs, &passive.head.fs.shifted(offset)) {
            return;
        }
        let own: Vec<Antecedent> = active.antecedents().cloned().collect();
        let theirs: Vec<Antecedent> = passive.external.iter().map(|a| a.shifted(offset)).collect();
        let Some(merged) = unify_lists(&mut binding, &own, &theirs) else { return };
        let split = active.external.len();
        let mut internal = merged[split..].to_vec();
        let closed = close_scopes(passive.kind, &passive.internal);
        internal.extend(closed.iter().map(|a| a.shifted(offset)));
        let edge = Edge {
            dot: active.dot + 1,
            end: passive.end,
            external: merged[..split].to_vec(),
            internal,
            seed: active.seed_for_successor(x),
            ..(*active).clone()
        }
        .canonical(&binding);
        self.insert(edge, Derivation::Complete { active: x, passive: p });
    }

    fn combine_scanned(&mut self, x: EdgeId, p: EdgeId) {
        let (active, passive) = (self.edges[x].clone(), self.edges[p].clone());
        let Some(expected) = active.next_category() else { return };
        let head = passive.head.fs.shifted(active.var_count);
        let mut binding = Binding::with_capacity(active.var_count + passive.var_count);
        if !binding.unify_fs(&expected.fs, &head) {
            return;
        }
        let mut edge =
            Edge { dot: active.dot + 1, end: passive.end, seed: active.seed_for_successor(x), ..(*active).clone() };
        // Features the lexical entry adds to the expected category are kept
        // in the recognized body element.
        if let Element::Cat(c) = &mut edge.body[active.dot] {
            c.fs = binding.merge(&c.fs, &head);
        }
        let edge = edge.canonical(&binding);
        self.insert(edge, Derivation::Complete { active: x, passive: p });
    }

    pub(super) fn resolve(&mut self) {
        while self.progress.resolve < self.edges.len() {
            let id = self.progress.resolve;
            self.progress.resolve += 1;
            if self.options.skip_resolution {
                continue;
            }
            let x = self.edges[id].clone();
            let Some(Element::Special(special)) = x.next() else { continue };
            let advance = |binding: &Binding, internal: Vec<Antecedent>| {
                Edge { dot: x.dot + 1, internal, seed: x.seed_for_successor(id), ..(*x).clone() }.canonical(binding)
            };
            let pushed = |a: Antecedent| {
                let mut internal = x.internal.clone();
                internal.push(a);
                internal
            };
            let no_binding = Binding::new();
            match special {
                Special::PositionOp(v) => {
                    let mut binding = Binding::with_capacity(x.var_count);
                    if binding.unify_values(*v, Value::position(x.end)) {
                        let edge = advance(&binding, x.internal.clone());
                        self.insert(edge, Derivation::Resolve { from: id, choice: 0 });
                    }
                }
                Special::ScopeOpener => {
                    let edge = advance(&no_binding, pushed(Antecedent::Opener));
                    self.insert(edge, Derivation::Resolve { from: id, choice: 0 });
                }
                Special::FwdRef(fs) | Special::StrongFwdRef(fs) => {
                    let strong = matches!(special, Special::StrongFwdRef(_));
                    let edge = advance(&no_binding, pushed(Antecedent::Ref { strong, fs: fs.clone() }));
                    self.insert(edge, Derivation::Resolve { from: id, choice: 0 });
                }
                Special::NegBwdRef(fs) => {
                    let blocked = x.antecedents().filter_map(Antecedent::fs).any(|f| no_binding.unifiable(f, fs));
                    if !blocked {
                        let edge = advance(&no_binding, x.internal.clone());
                        self.insert(edge, Derivation::Resolve { from: id, choice: 0 });
                    }
                }
                Special::ComplexBwdRef { positives, negatives } => {
                    let all: Vec<&Antecedent> = x.antecedents().collect();
                    let chosen = all
                        .iter()
                        .rposition(|a| a.fs().is_some_and(|f| matches_reference(&no_binding, f, positives, negatives)));
                    let Some(j) = chosen else { continue };
                    let Antecedent::Ref { strong, fs: target } = all[j].clone() else { unreachable!() };
                    for (choice, positive) in positives.iter().enumerate() {
                        let mut binding = Binding::with_capacity(x.var_count);
                        if !binding.unify_fs(&target, positive) {
                            continue;
                        }
                        let resolved = binding.merge(&target, positive);
                        let mut edge = (*x).clone();
                        let replacement = Antecedent::Ref { strong, fs: resolved.clone() };
                        if j < edge.external.len() {
                            edge.external[j] = replacement;
                        } else {
                            edge.internal[j - x.external.len()] = replacement;
                        }
                        if let Element::Special(Special::ComplexBwdRef { positives, .. }) = &mut edge.body[x.dot] {
                            positives[choice] = resolved;
                        }
                        edge.dot += 1;
                        edge.seed = x.seed_for_successor(id);
                        let edge = edge.canonical(&binding);
                        self.insert(edge, Derivation::Resolve { from: id, choice });
                    }
                }
            }
        }
    }

    /// Reads the next token: a passive terminal edge plus one passive edge per
    /// matching lexical rule.
    pub fn scan(&mut self, token: &str) {
        let (start, end) = (self.position, self.position + 1);
        self.position = end;
        while self.by_end.len() <= end {
            self.by_end.push(Vec::new());
        }
        let terminal = Category::terminal(token);
        let edge = Edge {
            source: Source::Terminal,
            kind: EdgeKind::Normal,
            head: terminal.clone(),
            body: Vec::new(),
            dot: 0,
            start,
            end,
            external: Vec::new(),
            internal: Vec::new(),
            seed: Seed::Scanned,
            var_count: 0,
        };
        self.insert(edge, Derivation::Scan);
        let entries: Vec<usize> = self.grammar.lexicon().for_surface(token).collect();
        for i in entries {
            let rule = self.grammar.lexicon().get(i);
            let edge = Edge {
                source: Source::Lexical(i),
                kind: EdgeKind::Normal,
                head: rule.head.clone(),
                body: vec![Element::Cat(terminal.clone())],
                dot: 1,
                start,
                end,
                external: Vec::new(),
                internal: Vec::new(),
                seed: Seed::Scanned,
                var_count: 0,
            }
            .canonical(&Binding::new());
            self.insert(edge, Derivation::Scan);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference(strong: bool, tag: &str) -> Antecedent {
        Antecedent::Ref { strong, fs: FeatureStructure::constants(&[("tag", tag)]) }
    }

    #[test]
    fn normal_edges_pass_everything() {
        let list = vec![reference(false, "a"), Antecedent::Opener, reference(false, "b")];
        assert_eq!(close_scopes(EdgeKind::Normal, &list), list);
    }

    #[test]
    fn scope_closing_keeps_prefix_and_strong_references() {
        let list = vec![
            reference(false, "a"),
            Antecedent::Opener,
            reference(false, "b"),
            reference(true, "c"),
            Antecedent::Opener,
            reference(true, "d"),
        ];
        assert_eq!(
            close_scopes(EdgeKind::ScopeClosing, &list),
            vec![reference(false, "a"), reference(true, "c"), reference(true, "d")]
        );
    }

    fn arb_item() -> impl Strategy<Value = Antecedent> {
        prop_oneof![
            Just(Antecedent::Opener),
            (any::<bool>(), prop::sample::select(vec!["a", "b", "c"])).prop_map(|(s, t)| reference(s, t)),
        ]
    }

    proptest! {
        #[test]
        fn closed_scopes_hide_normal_references(list in prop::collection::vec(arb_item(), 0..8)) {
            let out = close_scopes(EdgeKind::ScopeClosing, &list);
            prop_assert!(!out.contains(&Antecedent::Opener));
            let first = list.iter().position(|a| *a == Antecedent::Opener).unwrap_or(list.len());
            prop_assert_eq!(&out[..first], &list[..first]);
            let strong_after: Vec<_> = list[first..]
                .iter()
                .filter(|a| matches!(a, Antecedent::Ref { strong: true, .. }))
                .cloned()
                .collect();
            prop_assert_eq!(&out[first..], &strong_after[..]);
        }
    }
}
