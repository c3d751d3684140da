mod common;

use std::collections::HashSet;

use codeco::chart::{parse, parse_with, Chart, ChartOptions, ParseSession, Source, Status, Step};
use codeco::grammar::{parse_rule, Element, Grammar, Special, Value};
use codeco::reference::ReferenceEngine;
use codeco::symbol::Sym;
use common::{demo, words};
use proptest::prelude::*;

const SENTENCES: &[&str] = &[
    "a woman helps herself .",
    "john knows bill and helps him .",
    "Mary does not love Bill . Mary hates him .",
    "every man protects a house from every enemy and does not destroy the house .",
    "if a part of a machine causes an error then it hates john .",
    "a person X knows a person Y .",
    "a woman knows a man who helps herself .",
];

fn edge_texts(chart: &Chart) -> Vec<String> {
    let mut out: Vec<String> = chart.edges().map(|(_, e)| e.to_string()).collect();
    out.sort();
    out
}

#[test]
fn initialization_adds_one_edge_per_start_rule() {
    let chart = Chart::new(demo(), ChartOptions::default());
    assert_eq!(chart.len(), 2);
    for (_, edge) in chart.edges() {
        assert_eq!((edge.dot, edge.start, edge.end), (0, 0, 0));
        assert!(edge.external.is_empty() && edge.internal.is_empty());
        assert_eq!(edge.head.name.as_str(), "text");
    }
}

#[test]
fn grammar_without_start_rules_is_dead_at_once() {
    let rule = parse_rule("np => ['x']").unwrap();
    let grammar = Grammar::from_rules("s", [rule]);
    let session = ParseSession::new(grammar);
    assert!(session.chart().is_empty());
    assert_eq!(session.status(), Status::Dead);
}

#[test]
fn scanning_a_noun_adds_terminal_and_preterminal_edges() {
    let mut chart = Chart::new(demo(), ChartOptions::default());
    chart.pcr();
    chart.scan("person");
    let scanned: Vec<_> = chart.edges_ending_at(1).filter(|(_, e)| e.is_scanned()).map(|(_, e)| e.clone()).collect();
    assert_eq!(scanned.len(), 2);
    assert!(scanned.iter().any(|e| e.source == Source::Terminal && e.head.name.as_str() == "person"));
    assert!(scanned.iter().any(|e| matches!(e.source, Source::Lexical(_)) && e.head.name.as_str() == "noun"));
    assert!(scanned.iter().all(|e| e.is_passive() && e.external.is_empty() && e.internal.is_empty()));
}

#[test]
fn scanning_every_adds_a_passive_terminal_edge() {
    let mut chart = Chart::new(demo(), ChartOptions::default());
    chart.pcr();
    chart.scan("every");
    let scanned: Vec<_> = chart.edges_ending_at(1).filter(|(_, e)| e.is_scanned()).collect();
    assert_eq!(scanned.len(), 1);
    assert_eq!(scanned[0].1.source, Source::Terminal);
}

#[test]
fn unknown_token_kills_the_session() {
    let session = parse(&demo(), &["zzz"]);
    assert_eq!(session.status(), Status::Dead);
    let at_end: Vec<_> = session.chart().edges_ending_at(1).collect();
    assert_eq!(at_end.len(), 1);
    assert_eq!(at_end[0].1.source, Source::Terminal);

    let mut session = session;
    assert!(session.push("a").is_err());
    assert_eq!(session.tokens(), ["zzz"]);
}

#[test]
fn example_sentence_statuses() {
    let g = demo();
    for (text, status) in [
        ("a woman helps herself .", Status::Complete),
        ("a woman knows a man who helps herself .", Status::Dead),
        ("john knows bill and helps him .", Status::Complete),
        ("john helps him .", Status::Dead),
        ("a person X knows a person X .", Status::Dead),
        ("Mary does not love Bill . Mary hates him .", Status::Complete),
        ("every man protects a house", Status::PrefixValid),
    ] {
        assert_eq!(parse(&g, &words(text)).status(), status, "{text}");
    }
}

#[test]
fn fixpoint_is_idempotent() {
    let g = demo();
    for text in SENTENCES {
        let session = parse(&g, &words(text));
        let mut chart = session.chart().clone();
        assert_eq!(chart.pcr(), 0, "{text}");
    }
    let mut empty = Chart::new(Grammar::from_rules("s", []), ChartOptions::default());
    assert_eq!(empty.pcr(), 0);
}

#[test]
fn step_order_does_not_change_the_chart() {
    use Step::*;
    let g = demo();
    let orders = [
        [Predict, Complete, Resolve],
        [Predict, Resolve, Complete],
        [Complete, Predict, Resolve],
        [Complete, Resolve, Predict],
        [Resolve, Predict, Complete],
        [Resolve, Complete, Predict],
    ];
    for text in SENTENCES {
        let tokens = words(text);
        let reference = parse_with(&g, &tokens, ChartOptions::default());
        for order in orders {
            let other = parse_with(&g, &tokens, ChartOptions { order, ..ChartOptions::default() });
            assert_eq!(other.status(), reference.status(), "{text} {order:?}");
            assert_eq!(edge_texts(other.chart()), edge_texts(reference.chart()), "{text} {order:?}");
            assert_eq!(other.derivation_count(), reference.derivation_count());
        }
    }
}

#[test]
fn no_two_stored_edges_are_equivalent() {
    let g = demo();
    for text in SENTENCES {
        let session = parse(&g, &words(text));
        let chart = session.chart();
        let distinct: HashSet<_> = chart.edges().map(|(_, e)| e.clone()).collect();
        assert_eq!(distinct.len(), chart.len(), "{text}");
        for (id, edge) in chart.edges() {
            assert_eq!(chart.find(edge), Some(id));
            assert!(edge.start <= edge.end);
            if edge.dot == 0 {
                assert!(edge.internal.is_empty(), "{edge}");
            }
        }
    }
}

#[test]
fn trees_cover_the_tokens_and_match_the_reference_engine() {
    let g = demo();
    let engine = ReferenceEngine::new(&g);
    for s in engine.generate(6).unwrap() {
        let session = parse(&g, &s.tokens);
        assert!(session.is_complete(), "{}", s.text());
        assert_eq!(session.derivation_count(), s.derivations as u128);
        let trees = session.trees(3);
        assert_eq!(trees.len(), 1, "{}", s.text());
        assert_eq!(trees[0].leaves(), s.tokens);
        assert_eq!(trees[0].category.name.as_str(), "text");
    }
}

#[test]
fn incomplete_input_has_no_trees() {
    let session = parse(&demo(), &words("a woman helps"));
    assert!(session.trees(1).is_empty());
    assert_eq!(session.derivation_count(), 0);
}

#[test]
fn pronoun_takes_the_closest_antecedent() {
    let g = demo();
    let tokens = words("if a part of a machine causes an error then it");
    let session = parse(&g, &tokens);
    assert_eq!(session.status(), Status::PrefixValid);
    let chart = session.chart();
    let resolved: Vec<_> = chart
        .edges_ending_at(tokens.len())
        .map(|(_, e)| e)
        .filter(|e| e.is_passive() && e.head.name.as_str() == "np")
        .filter(|e| matches!(e.body.first(), Some(Element::Cat(c)) if c.name.as_str() == "it"))
        .collect();
    assert_eq!(resolved.len(), 1);
    // "an error" starts at position 7.
    assert_eq!(resolved[0].head.fs.get(Sym::new("id")), Some(Value::position(7)));
    let error = resolved[0]
        .external
        .iter()
        .filter_map(|a| a.fs())
        .find(|fs| fs.get(Sym::new("noun")) == Some(Value::constant("error")))
        .expect("error antecedent");
    assert_eq!(error.get(Sym::new("id")), Some(Value::position(7)));
}

#[test]
fn position_identifiers_come_from_recognized_material() {
    let g = demo();
    for text in SENTENCES {
        let session = parse(&g, &words(text));
        for (_, edge) in session.chart().edges() {
            let mut known = constants(&edge.body[..edge.dot]);
            known.extend(edge.head.fs.iter().filter_map(|(_, v)| const_of(v)));
            for fs in edge.antecedents().filter_map(|a| a.fs()) {
                known.extend(fs.iter().filter_map(|(_, v)| const_of(v)));
            }
            for c in constants(&edge.body[edge.dot..]) {
                if c.as_str().starts_with('#') {
                    assert!(known.contains(&c), "{edge}");
                }
            }
        }
    }
}

fn const_of(v: Value) -> Option<Sym> {
    match v {
        Value::Const(c) => Some(c),
        Value::Var(_) => None,
    }
}

fn constants(elements: &[Element]) -> HashSet<Sym> {
    use codeco::grammar::Terms;
    let mut out = HashSet::new();
    for e in elements {
        e.visit_values(&mut |v| out.extend(const_of(v)));
    }
    out
}

#[test]
fn closed_scopes_drop_normal_references_only() {
    let g = demo();
    let session = parse(&g, &words("every man protects a house from every enemy and does not destroy"));
    for (_, edge) in session.chart().edges_ending_at(session.tokens().len()) {
        for fs in edge.antecedents().filter_map(|a| a.fs()) {
            let noun = fs.get(Sym::new("noun"));
            if edge.end > 7 && edge.start == 0 {
                assert_ne!(noun, Some(Value::constant("enemy")), "{edge}");
            }
        }
    }
    let session = parse(&g, &words("Mary does not love Bill . Mary hates"));
    let strong = session
        .chart()
        .edges_ending_at(session.tokens().len())
        .flat_map(|(_, e)| e.antecedents().cloned().collect::<Vec<_>>())
        .any(|a| matches!(&a, codeco::chart::Antecedent::Ref { strong: true, fs } if fs.get(Sym::new("prop")) == Some(Value::constant("Bill"))));
    assert!(strong);
}

#[test]
fn skipping_resolution_breaks_references() {
    let options = ChartOptions { skip_resolution: true, ..ChartOptions::default() };
    let session = parse_with(&demo(), &words("a woman helps herself ."), options);
    assert_ne!(session.status(), Status::Complete);
}

#[test]
fn new_words_do_not_touch_existing_edges() {
    let mut g = demo();
    let mut session = parse(&g, &words("a"));
    let before = edge_texts(session.chart());
    g.add_lexical_rule(parse_rule("noun(text:bike, human:-, gender:neut, vowel:-, rel:-) -> ['bike']").unwrap())
        .unwrap();
    session.set_grammar(g);
    assert_eq!(edge_texts(session.chart()), before);
    assert_eq!(session.push("bike"), Ok(Status::PrefixValid));
}

#[test]
fn special_elements_follow_a_lexical_category() {
    for rule in demo().rules() {
        for (i, e) in rule.body.iter().enumerate() {
            if let Element::Special(s) = e {
                if matches!(s, Special::ComplexBwdRef { .. } | Special::NegBwdRef(_)) {
                    assert!(i > 0 && rule.body[i - 1].as_category().is_some_and(|c| c.is_lexical()), "{rule}");
                }
            }
        }
    }
}

fn demo_surfaces() -> Vec<String> {
    let mut s: Vec<String> = demo().surfaces().into_iter().map(str::to_owned).collect();
    s.sort();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn replaying_tokens_gives_the_same_chart(picks in proptest::collection::vec(any::<prop::sample::Index>(), 0..7)) {
        let surfaces = demo_surfaces();
        let tokens: Vec<&str> = picks.iter().map(|i| surfaces[i.index(surfaces.len())].as_str()).collect();
        let g = demo();
        let a = parse(&g, &tokens);
        let b = parse(&g, &tokens);
        prop_assert_eq!(a.status(), b.status());
        let ta: Vec<String> = a.chart().edges().map(|(_, e)| e.to_string()).collect();
        let tb: Vec<String> = b.chart().edges().map(|(_, e)| e.to_string()).collect();
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn rollback_restores_the_earlier_chart(picks in proptest::collection::vec(any::<prop::sample::Index>(), 1..7), cut in any::<prop::sample::Index>()) {
        let surfaces = demo_surfaces();
        let tokens: Vec<&str> = picks.iter().map(|i| surfaces[i.index(surfaces.len())].as_str()).collect();
        let g = demo();
        let cut = cut.index(tokens.len());
        let mut session = parse(&g, &tokens[..cut]);
        let cp = session.checkpoint();
        let before: Vec<String> = session.chart().edges().map(|(_, e)| e.to_string()).collect();
        for t in &tokens[cut..] {
            if session.push(t).is_err() {
                break;
            }
        }
        prop_assert!(session.chart().len() >= before.len());
        session.rollback(cp);
        let after: Vec<String> = session.chart().edges().map(|(_, e)| e.to_string()).collect();
        prop_assert_eq!(after, before);
        prop_assert_eq!(session.tokens().len(), parse(&g, &tokens[..cut]).tokens().len());
    }
}
