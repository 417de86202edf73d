mod common;

use proptest::prelude::*;
use semdex::corpus::{parse_corpus, term_vector, write_corpus};
use semdex::text::{is_stopword, preprocess, sentences, stem};
use semdex::{load_corpus, Document};

#[test]
fn porter_reference_vocabulary() {
    let fixture = include_str!("data/porter_reference.tsv");
    let mut checked = 0;
    let mut mismatches = Vec::new();
    for line in fixture.lines().filter(|l| !l.is_empty()) {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: expected {expected}, got {got}"));
        }
        checked += 1;
    }
    assert!(checked > 3000, "fixture too small: {checked}");
    assert!(
        mismatches.is_empty(),
        "{} mismatches:\n{}",
        mismatches.len(),
        mismatches.join("\n")
    );
}

#[test]
fn stemming_is_not_always_idempotent() {
    // One pass of the rules; re-stemming can strip further suffixes.
    assert_eq!(stem("agreed"), "agre");
    assert_eq!(stem("agre"), "agr");
    assert_eq!(stem("adiposity"), "adipos");
    assert_eq!(stem("adipos"), "adipo");
    assert_eq!(stem("generalizations"), "gener");
    assert_eq!(stem("gener"), "gener");
}

#[test]
fn mixed_text() {
    let terms = preprocess("The patients were treated with Aspirin; relief was observed.");
    assert_eq!(terms.to_vec(), ["patient", "treat", "aspirin", "relief", "observ"]);
}

proptest! {
    #[test]
    fn stem_never_lengthens(word in "[a-z]{1,14}") {
        let s = stem(&word);
        prop_assert!(s.len() <= word.len());
        prop_assert!(s.chars().all(|c| c.is_ascii_lowercase()));
        prop_assert!(word.starts_with(&s[..s.len().saturating_sub(1)]));
    }

    #[test]
    fn stems_share_a_prefix_with_the_word(word in "[a-z]{3,14}") {
        // Every rule rewrites a suffix, so at least the first letter survives.
        let s = stem(&word);
        prop_assert_eq!(s.as_bytes()[0], word.as_bytes()[0]);
    }

    #[test]
    fn preprocess_output_is_clean(text in "[ -~]{0,200}") {
        for t in preprocess(&text).iter() {
            prop_assert!(!t.is_empty());
            prop_assert!(!is_stopword(t), "stopword {t:?} survived");
            prop_assert!(t.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit()));
        }
    }

    #[test]
    fn preprocess_is_deterministic(text in "\\PC{0,120}") {
        prop_assert_eq!(preprocess(&text), preprocess(&text));
    }

    #[test]
    fn sentences_partition_the_text(text in "[a-zA-Z .!?\n]{0,200}") {
        prop_assert_eq!(sentences(&text).collect::<String>(), text);
    }

    #[test]
    fn term_vector_counts_every_term(title in "[a-z ]{0,60}", body in "[a-z ,.]{0,200}") {
        let doc = Document::new("x", title.clone(), body.clone());
        let total: u32 = term_vector(&doc).values().sum();
        prop_assert_eq!(total as usize, preprocess(&format!("{title} {body}")).len());
    }

    #[test]
    fn corpus_round_trip(seed in any::<u64>(), n in 1usize..30) {
        let docs = common::random_corpus(seed, n, 20, 12, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_corpus(&path, &docs).unwrap();
        prop_assert_eq!(load_corpus(&path).unwrap(), docs);
    }
}

#[test]
fn corpus_with_unicode_and_escapes() {
    let line = r#"{"id":"p1","title":"Über \"quoted\" naïve","abstract":"line\nbreak","labels":["D1"]}"#;
    let docs = parse_corpus(line.as_bytes()).unwrap();
    assert_eq!(docs[0].title, "Über \"quoted\" naïve");
    assert_eq!(parse_corpus(docs[0].to_json_line().as_bytes()).unwrap(), docs);
}
