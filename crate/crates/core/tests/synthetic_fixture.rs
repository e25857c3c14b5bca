mod common;

use common::*;

/// The committed fixture is exactly what the seeded generator produces.
#[test]
fn committed_synthetic_corpus_matches_generator() {
    let path = fixture("synthetic_60x3.json");
    let generated = synthetic_corpus();
    if std::env::var_os("HADES_REGENERATE_FIXTURES").is_some() {
        let mut bytes = serde_json::to_vec(&generated).unwrap();
        bytes.push(b'\n');
        std::fs::write(&path, bytes).unwrap();
    }
    let committed: SyntheticCorpus = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(committed, generated);
    assert_eq!(committed.docs.len(), 60);
    assert_eq!(committed.phi.len(), 3);
}
