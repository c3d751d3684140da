#![allow(dead_code)]

use codeco::grammar::{parse_grammar, Grammar};

pub fn demo() -> Grammar {
    parse_grammar(include_str!("../../grammars/demo.codeco")).expect("demo grammar")
}

pub fn brother() -> Grammar {
    parse_grammar(include_str!("../../grammars/brother.codeco")).expect("brother grammar")
}

pub fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
