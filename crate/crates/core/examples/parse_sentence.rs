//! Parses a few sentences of the demo grammar and prints their status and
//! syntax tree.
//!
//! ```text
//! cargo run --example parse_sentence
//! ```

use codeco::chart::{parse, Status};
use codeco::grammar::parse_grammar;

fn main() {
    let grammar = parse_grammar(include_str!("../grammars/demo.codeco")).expect("demo grammar");
    for text in [
        "a woman helps herself .",
        "a woman knows a man who helps herself .",
        "john knows bill and helps him .",
        "Mary does not love Bill . Mary hates him .",
        "every man protects",
    ] {
        let session = parse(&grammar, &grammar.tokenize(text));
        println!("{text}\n  {}", session.status());
        if session.status() == Status::Complete {
            for tree in session.trees(1) {
                println!("  {tree}");
            }
        }
    }
}
