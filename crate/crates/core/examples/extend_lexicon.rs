//! Adds a word to a running parse session's grammar and sees it offered.
//!
//! ```text
//! cargo run --example extend_lexicon
//! ```

use codeco::chart::ParseSession;
use codeco::grammar::{parse_grammar, parse_rule};
use codeco::lookahead::next_tokens;

fn main() {
    let mut grammar = parse_grammar(include_str!("../grammars/demo.codeco")).expect("demo grammar");
    let mut session = ParseSession::new(grammar.clone());
    session.push("a").unwrap();

    let nouns = |s: &ParseSession| {
        next_tokens(s)
            .concrete
            .into_iter()
            .filter(|c| c.source.as_deref() == Some("noun"))
            .map(|c| c.surface)
            .collect::<Vec<_>>()
    };
    println!("before: {:?}", nouns(&session));

    let rule = parse_rule("noun(text:bike, human:-, gender:neut, vowel:-, rel:-) -> ['bike']").expect("rule");
    println!("add: {:?}", grammar.add_lexical_rule(rule.clone()).expect("lexical rule"));
    println!("again: {:?}", grammar.add_lexical_rule(rule).expect("lexical rule"));
    session.set_grammar(grammar);
    println!("after: {:?}", nouns(&session));

    session.push("bike").unwrap();
    println!("a bike ... {}", session.status());
}
