use fairdiv::io::corpus::{Corpus, Evaluator};
use fairdiv::welfare::SearchOptions;

#[test]
fn every_corpus_claim_holds() {
    let corpus = Corpus::embedded();
    let mut failures = Vec::new();
    for entry in &corpus.entries {
        let mut ev = Evaluator::new(entry, SearchOptions::default()).unwrap();
        for outcome in ev.evaluate_all() {
            if !outcome.passed {
                failures.push(format!("{}: {} ({})", entry.name(), outcome.claim.text, outcome.observed));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
