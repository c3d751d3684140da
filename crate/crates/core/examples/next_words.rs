//! Shows what an editor would offer after an unfinished sentence, both as
//! categories and as concrete words.
//!
//! ```text
//! cargo run --example next_words -- "a brother of Sue likes"
//! ```

use codeco::chart::parse;
use codeco::grammar::parse_grammar;
use codeco::lookahead::next_tokens;

fn main() {
    let grammar = parse_grammar(include_str!("../grammars/brother.codeco")).expect("brother grammar");
    let text = std::env::args().nth(1).unwrap_or_else(|| "a brother of Sue likes".to_owned());
    let session = parse(&grammar, &grammar.tokenize(&text));
    let options = next_tokens(&session);

    println!("{text} ... [{}]", session.status());
    for option in &options.abstract_options {
        println!("  {option}");
    }
    let words: Vec<&str> = options.concrete.iter().map(|c| c.surface.as_str()).collect();
    println!("words: {}", words.join(", "));
}
