//! Anaphoric references and scopes: which nouns and pronouns can follow,
//! and how the offer narrows while a sentence is typed.
//!
//! ```text
//! cargo run --example anaphora
//! ```

use codeco::chart::parse;
use codeco::grammar::parse_grammar;
use codeco::lookahead::next_tokens;

fn show(grammar: &codeco::grammar::Grammar, text: &str) {
    let session = parse(grammar, &grammar.tokenize(text));
    let options = next_tokens(&session);
    let words: Vec<String> = options.concrete.iter().map(ToString::to_string).collect();
    println!("{text} ...\n  {}", words.join(", "));
}

fn main() {
    let grammar = parse_grammar(include_str!("../grammars/demo.codeco")).expect("demo grammar");

    // "him" would have to mean the subject, which needs "himself".
    show(&grammar, "john helps");
    // The enemy is inside the scope of "every" and gone after it.
    show(&grammar, "every man protects a house from every enemy and does not destroy");
    show(&grammar, "every man protects a house from every enemy and does not destroy the");
    // Variables can only be introduced once.
    show(&grammar, "a person X knows a person");

    // Pronouns pick the closest fitting antecedent.
    // "it" gets the identifier of "an error", the closest fitting noun phrase.
    let text = "if a part of a machine causes an error then it hates john .";
    let session = parse(&grammar, &grammar.tokenize(text));
    println!("\n{text}\n  {}", session.status());
    for tree in session.trees(1) {
        println!("  {tree}");
    }
}
