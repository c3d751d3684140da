//! Acceptance run over the demo grammar: one PASS/FAIL line per criterion.
//!
//! ```text
//! cargo test --release --test acceptance
//! ```

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use codeco::chart::{parse, ParseSession, Status};
use codeco::genertest::{run_suite, Corpus, SuiteConfig};
use codeco::grammar::{parse_grammar, Element, Grammar, Value};
use codeco::lookahead::next_tokens;
use codeco::reference::ReferenceEngine;
use codeco::symbol::Sym;

const MAX_TOKENS: usize = 8;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(300);
const PARSE_BUDGET: Duration = Duration::from_millis(50);
const LOOKAHEAD_BUDGET: Duration = Duration::from_millis(100);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn surfaces(grammar: &Grammar, text: &str) -> BTreeSet<String> {
    let session = parse(grammar, &words(text));
    next_tokens(&session).surfaces().into_iter().map(str::to_owned).collect()
}

fn example_sentences(g: &Grammar) -> Outcome {
    let engine = ReferenceEngine::new(g);
    let cases = [
        ("a woman helps herself .", true),
        ("a woman knows a man who helps herself .", false),
        ("john knows bill and helps him .", true),
        ("john helps him .", false),
        ("a person X knows a person X .", false),
        ("Mary does not love Bill . Mary hates him .", true),
    ];
    let mut wrong = Vec::new();
    for (text, accepted) in cases {
        let chart = parse(g, &words(text)).status() == Status::Complete;
        let reference = engine.accepts(&words(text)).unwrap_or(!accepted);
        if chart != accepted || reference != accepted {
            wrong.push(text);
        }
    }
    outcome(
        wrong.is_empty(),
        format!("{} of {} sentences as expected {wrong:?}", cases.len() - wrong.len(), cases.len()),
    )
}

fn scoping(g: &Grammar) -> Outcome {
    let prefix = "every man protects a house from every enemy and does not destroy";
    if words(prefix).len() != 12 {
        return outcome(false, "prefix is not 12 tokens");
    }
    let offered = surfaces(g, prefix);
    let after_the = surfaces(g, &format!("{prefix} the"));
    let man_and_house = offered.contains("himself") && offered.contains("the") && offered.contains("it");
    let no_enemy = !offered.contains("him") && !after_the.contains("enemy");
    let nouns_ok = after_the == BTreeSet::from(["house".to_owned(), "man".to_owned()]);
    let enemy_dead = parse(g, &words(&format!("{prefix} the enemy"))).status() == Status::Dead;
    outcome(
        man_and_house && no_enemy && nouns_ok && enemy_dead,
        format!("offered {offered:?}; after 'the' {after_the:?}"),
    )
}

fn proximity(g: &Grammar) -> Outcome {
    let tokens = words("if a part of a machine causes an error then it");
    let session = parse(g, &tokens);
    let id = Sym::new("id");
    let error_id = session
        .chart()
        .edges()
        .map(|(_, e)| e)
        .filter(|e| e.head.name.as_str() == "nbar" && e.is_passive() && e.start == 8)
        .find_map(|e| e.head.fs.get(id));
    let resolved: Vec<Option<Value>> = session
        .chart()
        .edges_ending_at(tokens.len())
        .map(|(_, e)| e)
        .filter(|e| e.is_passive() && e.head.name.as_str() == "np")
        .filter(|e| matches!(e.body.first(), Some(Element::Cat(c)) if c.name.as_str() == "it"))
        .map(|e| e.head.fs.get(id))
        .collect();
    let passed = error_id == Some(Value::position(7)) && resolved == [Some(Value::position(7))];
    let shown: Vec<String> = resolved.iter().map(|v| v.map_or("unbound".into(), |v| v.to_string())).collect();
    outcome(
        passed,
        format!("'it' resolved to {shown:?}, 'an error' is {}", error_id.map_or("?".into(), |v| v.to_string())),
    )
}

fn performance(g: &Grammar, corpus: &Corpus) -> Outcome {
    // Every 20th generated sentence, plus longer ones up to ten tokens.
    let mut sample: Vec<Vec<String>> = corpus.sentences().iter().step_by(20).map(|s| s.tokens.clone()).collect();
    for text in [
        "every man protects a house from every enemy and does not destroy the house .",
        "if a part of a machine causes an error then it hates john .",
        "a woman knows a man who helps her and knows him .",
        "Mary does not love Bill . Mary hates him .",
    ] {
        let tokens: Vec<String> = words(text).into_iter().map(str::to_owned).collect();
        if tokens.len() <= 10 {
            sample.push(tokens);
        }
    }
    let mut parse_total = Duration::ZERO;
    let mut lookahead_total = Duration::ZERO;
    let mut prefixes = 0u32;
    for tokens in &sample {
        let started = Instant::now();
        std::hint::black_box(parse(g, tokens));
        parse_total += started.elapsed();
        let mut session = ParseSession::new(g.clone());
        for t in tokens {
            let started = Instant::now();
            std::hint::black_box(next_tokens(&session));
            lookahead_total += started.elapsed();
            prefixes += 1;
            let _ = session.push(t);
        }
    }
    let parse_mean = parse_total / sample.len() as u32;
    let lookahead_mean = lookahead_total / prefixes;
    outcome(
        parse_mean <= PARSE_BUDGET && lookahead_mean <= LOOKAHEAD_BUDGET,
        format!(
            "mean parse {parse_mean:.2?} over {} sentences, mean lookahead {lookahead_mean:.2?} over {prefixes} prefixes",
            sample.len()
        ),
    )
}

fn main() -> ExitCode {
    let g = parse_grammar(include_str!("../grammars/demo.codeco")).expect("demo grammar");
    let mut lines: Vec<(&str, Outcome)> = Vec::new();

    lines.push(("example sentences", example_sentences(&g)));
    lines.push(("scoping lookahead", scoping(&g)));
    lines.push(("proximity resolution", proximity(&g)));

    let started = Instant::now();
    let first = run_suite(&g, SuiteConfig::new(MAX_TOKENS));
    let suite_time = started.elapsed();
    match &first {
        Ok((report, timings)) => {
            let eq = &report.equivalence;
            let equivalence_time = timings.generation + timings.equivalence;
            lines.push((
                "dual-engine equivalence",
                outcome(
                    eq.disagreement_count == 0 && equivalence_time <= EQUIVALENCE_BUDGET,
                    format!(
                        "{} sentences and {} near misses up to {MAX_TOKENS} tokens, {} disagreements, {equivalence_time:.1?}",
                        eq.corpus, eq.near_misses, eq.disagreement_count
                    ),
                ),
            ));
            let amb = &report.ambiguity;
            lines.push((
                "ambiguity",
                outcome(
                    amb.ambiguous_count == 0,
                    format!("{} sentences, {} ambiguous", amb.sentences, amb.ambiguous_count),
                ),
            ));
            let lookahead = report.lookahead.as_ref();
            lines.push((
                "lookahead completeness and correctness",
                match lookahead {
                    Some(l) => outcome(
                        l.miss_count == 0 && l.false_offer_count == 0 && l.prefixes > 0,
                        format!(
                            "{} prefixes, {} misses, {} false offers",
                            l.prefixes, l.miss_count, l.false_offer_count
                        ),
                    ),
                    None => outcome(false, "lookahead check did not run"),
                },
            ));
        }
        Err(e) => {
            for name in ["dual-engine equivalence", "ambiguity", "lookahead completeness and correctness"] {
                lines.push((name, outcome(false, e.to_string())));
            }
        }
    }

    match Corpus::generate(&g, MAX_TOKENS) {
        Ok(corpus) => lines.push(("performance", performance(&g, &corpus))),
        Err(e) => lines.push(("performance", outcome(false, e.to_string()))),
    }

    let second = run_suite(&g, SuiteConfig::new(MAX_TOKENS));
    let determinism = match (&first, &second) {
        (Ok((a, _)), Ok((b, _))) => {
            let same = a.to_string() == b.to_string() && a.to_json_lines() == b.to_json_lines();
            outcome(
                same,
                format!("two runs of {suite_time:.1?} each, reports {}", if same { "identical" } else { "differ" }),
            )
        }
        _ => outcome(false, "a suite run failed"),
    };
    lines.push(("determinism", determinism));

    let mut all = true;
    for (name, o) in &lines {
        all &= o.passed;
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", lines.iter().filter(|(_, o)| o.passed).count(), lines.len());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
