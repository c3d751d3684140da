mod common;

use codeco::grammar::{
    parse_grammar, parse_rule, unify, validate_grammar, Binding, Element, FeatureStructure, GrammarError,
    LexiconUpdate, RuleKind, Special, Value, VarId,
};
use codeco::symbol::Sym;
use common::{brother, demo};

fn fs(pairs: &[(&str, Value)]) -> FeatureStructure {
    FeatureStructure::from_pairs(pairs.iter().map(|(n, v)| (Sym::new(n), *v))).unwrap()
}

fn c(text: &str) -> Value {
    Value::constant(text)
}

#[test]
fn unification_examples() {
    let empty = Binding::new();
    let b = unify(&FeatureStructure::new(), &FeatureStructure::new(), &empty).unwrap();
    assert!(b.is_empty());

    let n = Value::Var(VarId(0));
    let b =
        unify(&fs(&[("type", c("noun")), ("noun", n)]), &fs(&[("type", c("noun")), ("noun", c("country"))]), &empty)
            .unwrap();
    assert_eq!(b.resolve(n), c("country"));

    assert!(unify(&fs(&[("type", c("noun"))]), &fs(&[("type", c("prop"))]), &empty).is_none());
    assert!(unify(&fs(&[("human", c("+")), ("gender", c("masc"))]), &fs(&[("human", c("-"))]), &empty).is_none());
}

#[test]
fn notation_examples() {
    let vp = parse_rule("vp(num:Num) ~> v(neg:+, num:Num, type:tr) np(case:acc)").unwrap();
    assert_eq!(vp.kind, RuleKind::ScopeClosing);
    assert_eq!(vp.head.name.as_str(), "vp");
    assert_eq!(vp.body.len(), 2);

    let he = parse_rule("ref(subj:Subj) => ['he'] <(+(human:+, gender:masc) -(id:Subj))").unwrap();
    assert_eq!(he.kind, RuleKind::Normal);
    assert!(matches!(&he.body[0], Element::Cat(t) if t.is_terminal() && t.name.as_str() == "he"));
    match &he.body[1] {
        Element::Special(Special::ComplexBwdRef { positives, negatives }) => {
            assert_eq!((positives.len(), negatives.len()), (1, 1));
        }
        other => panic!("unexpected {other}"),
    }

    let errors = parse_grammar("start: np\nnp => <(type:noun) $noun(text:N)\nnoun -> ['x']\n").unwrap_err();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].line, 2);
}

#[test]
fn shipped_grammars_validate_cleanly() {
    for g in [demo(), brother()] {
        assert!(validate_grammar(&g).findings.is_empty(), "{:?}", validate_grammar(&g).findings);
    }
    assert_eq!(demo().start().as_str(), "text");
    assert_eq!(demo().rules_for(Sym::new("text")).count(), 2);
}

#[test]
fn printed_grammar_parses_back() {
    for g in [demo(), brother()] {
        let again = parse_grammar(&g.to_string()).unwrap();
        assert_eq!(again.start(), g.start());
        assert_eq!(again.rules().len(), g.rules().len());
        for (a, b) in again.rules().iter().zip(g.rules()) {
            assert!(a.alpha_eq(b), "{a} vs {b}");
        }
        for (a, b) in again.lexicon().entries().iter().zip(g.lexicon().entries()) {
            assert!(a.alpha_eq(b), "{a} vs {b}");
        }
    }
}

#[test]
fn lexicon_extension() {
    let mut g = demo();
    let before = g.lexicon().len();
    let country = parse_rule("noun(text:country, human:-) -> ['country']").unwrap();
    assert_eq!(g.add_lexical_rule(country.clone()), Ok(LexiconUpdate::Added));
    assert_eq!(g.add_lexical_rule(country), Ok(LexiconUpdate::Duplicate));
    assert_eq!(g.lexicon().len(), before + 1);
    assert!(g.surfaces().contains("country"));

    let phrase = parse_rule("s => np vp").unwrap();
    assert!(matches!(g.add_lexical_rule(phrase), Err(GrammarError::NotLexical(_))));
    assert_eq!(g.lexicon().len(), before + 1);
}

#[test]
fn tokenizer_uses_grammar_surfaces() {
    let g = parse_grammar("start: s\ns => ['does not'] $v\nv -> ['go']\n").unwrap();
    assert_eq!(g.tokenize("does not go"), ["does not", "go"]);
    assert_eq!(demo().tokenize("john  helps herself ."), ["john", "helps", "herself", "."]);
}
