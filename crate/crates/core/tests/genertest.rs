mod common;

use codeco::chart::ChartOptions;
use codeco::genertest::{ambiguity_check, equivalence_check, lookahead_check, run_suite, Corpus, SuiteConfig};
use codeco::grammar::{parse_grammar, Grammar};
use common::{brother, demo};

#[test]
fn demo_grammar_passes_at_six_tokens() {
    let (report, _) = run_suite(&demo(), SuiteConfig::new(6)).unwrap();
    assert!(report.passed(), "{report}");
    assert_eq!(report.sentences_by_length.values().sum::<usize>(), report.ambiguity.sentences);
    assert_eq!(report.sentences_by_length.get(&4), Some(&80));
    let lookahead = report.lookahead.unwrap();
    assert_eq!((lookahead.miss_count, lookahead.false_offer_count), (0, 0));
    assert!(report.equivalence.near_misses > report.equivalence.near_misses_accepted);
}

#[test]
fn brother_grammar_passes() {
    let (report, _) = run_suite(&brother(), SuiteConfig::new(8)).unwrap();
    assert!(report.passed(), "{report}");
}

#[test]
fn empty_grammar_has_no_sentences() {
    let g = Grammar::from_rules("s", []);
    let corpus = Corpus::generate(&g, 5).unwrap();
    assert!(corpus.is_empty());
    let ambiguity = ambiguity_check(&corpus);
    assert_eq!((ambiguity.sentences, ambiguity.ambiguous_count), (0, 0));
    let equivalence = equivalence_check(&g, &corpus, ChartOptions::default());
    assert_eq!(equivalence.disagreement_count, 0);
}

#[test]
fn multiword_token_ambiguity_is_listed() {
    let g = parse_grammar("start: s\ns => ['a'] ['b']\ns => ['a b']\n").unwrap();
    let corpus = Corpus::generate(&g, 3).unwrap();
    assert_eq!(corpus.len(), 2);
    let report = ambiguity_check(&corpus);
    assert_eq!(report.ambiguous, [("a b".to_owned(), 2)]);
}

#[test]
fn structural_ambiguity_is_listed() {
    let g = parse_grammar("start: s\ns => x ['c']\nx => ['a'] ['b']\nx => y ['b']\ny => ['a']\n").unwrap();
    let (report, _) = run_suite(&g, SuiteConfig::new(4)).unwrap();
    assert!(!report.passed());
    assert_eq!(report.ambiguity.ambiguous, [("a b c".to_owned(), 2)]);
    assert_eq!(report.equivalence.disagreement_count, 0);
}

#[test]
fn broken_resolution_is_caught() {
    let g = demo();
    let corpus = Corpus::generate(&g, 5).unwrap();
    let faulty = ChartOptions { skip_resolution: true, ..ChartOptions::default() };
    let report = equivalence_check(&g, &corpus, faulty);
    assert!(report.disagreement_count > 0);
    assert!(!report.disagreements.is_empty());
    assert!(report.disagreements.iter().any(|d| d.reference && !d.chart));

    let lookahead = lookahead_check(&g, &corpus, faulty);
    assert!(lookahead.miss_count > 0);
}

#[test]
fn starred_near_miss_is_rejected_by_both() {
    let g = demo();
    let text = "a woman knows a man who helps herself .";
    let tokens: Vec<&str> = text.split(' ').collect();
    let corpus = Corpus::generate(&g, 9).unwrap();
    assert!(!corpus.contains(&tokens));
    assert!(corpus.contains(&"a woman knows a man who helps himself .".split(' ').collect::<Vec<_>>()));
    assert!(!codeco::chart::parse(&g, &tokens).is_complete());
}

#[test]
fn reports_are_deterministic_and_grow_with_length() {
    let g = demo();
    let (a, _) = run_suite(&g, SuiteConfig::new(5)).unwrap();
    let (b, _) = run_suite(&g, SuiteConfig::new(5)).unwrap();
    assert_eq!(a.to_string(), b.to_string());
    assert_eq!(a.to_json_lines(), b.to_json_lines());

    let mut previous = 0;
    for n in 3..=6 {
        let count = Corpus::generate(&g, n).unwrap().len();
        assert!(count >= previous);
        previous = count;
    }
}

#[test]
fn json_lines_have_one_summary_and_one_line_per_finding() {
    let g = parse_grammar("start: s\ns => ['a'] ['b']\ns => ['a b']\n").unwrap();
    let (report, _) = run_suite(&g, SuiteConfig::new(3)).unwrap();
    let lines: Vec<serde_json::Value> =
        report.to_json_lines().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["kind"], "summary");
    assert_eq!(lines[0]["passed"], false);
    assert_eq!(lines[1]["kind"], "ambiguous");
    assert_eq!(lines[1]["text"], "a b");
}
