//! Lists every sentence of the demo grammar up to a length, using the
//! backtracking reference engine.
//!
//! ```text
//! cargo run --example generate -- 5
//! ```

use std::collections::BTreeMap;

use codeco::grammar::parse_grammar;
use codeco::reference::ReferenceEngine;

fn main() {
    let max: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let grammar = parse_grammar(include_str!("../grammars/demo.codeco")).expect("demo grammar");
    let sentences = ReferenceEngine::new(&grammar).generate(max).expect("generation");

    let mut by_length: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &sentences {
        *by_length.entry(s.tokens.len()).or_default() += 1;
    }
    for s in sentences.iter().take(20) {
        println!("{}", s.text());
    }
    if sentences.len() > 20 {
        println!("... {} more", sentences.len() - 20);
    }
    println!("by length: {by_length:?}");
}
