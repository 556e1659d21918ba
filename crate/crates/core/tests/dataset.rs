mod oracles;

use std::collections::BTreeSet;

use nlds_core::exec::{run_script, ViewCatalog};
use nlds_core::graph::{extract_schema, generate_synthetic, load_csv_dataset, Value, ENTITY_FILES};
use nlds_core::nl::{bind_vocabulary, parse_question};
use nlds_core::querygen::generate_all;
use oracles::csv_count;

#[test]
fn loaded_graph_matches_written_rows() {
    for (seed, n) in [(1, 1), (2, 5), (3, 60)] {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_synthetic(dir.path(), seed, n).unwrap();
        let g = load_csv_dataset(dir.path()).unwrap();
        assert_eq!(g.node_count(), manifest.total_rows());
        for file in ENTITY_FILES {
            let rows = manifest.files.get(file.file).copied().unwrap_or(0);
            assert_eq!(g.nodes_with_label(file.label).len(), rows, "{}", file.file);
            if let Some(suffix) = file.patient_rel {
                let rel = format!("PATIENT_HAS_{suffix}");
                let count = g.relationships().iter().filter(|r| r.rel_type == rel).count();
                assert_eq!(count, rows, "{rel}");
            }
        }
        let medications = manifest.files["medications.csv"];
        let linked = csv_count(&dir.path().join("medications.csv"), "ENCOUNTER", "");
        let encounter_links = g
            .relationships()
            .iter()
            .filter(|r| r.rel_type == "ENCOUNTER_FOR_MEDICATION")
            .count();
        assert_eq!(encounter_links, medications - linked);
    }
}

#[test]
fn caucasian_count_matches_a_csv_scan() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(dir.path(), 42, 500).unwrap();
    let expected = csv_count(&dir.path().join("patients.csv"), "RACE", "white");
    assert!(expected > 0);

    let g = load_csv_dataset(dir.path()).unwrap();
    let lexicon = bind_vocabulary(&extract_schema(&g).unwrap(), &[]).unwrap();
    let asts = parse_question("How many patients are caucasian?", &lexicon).unwrap();
    let candidates = generate_all(&asts, &lexicon, &BTreeSet::new()).unwrap();
    assert_eq!(candidates.len(), 1);
    let outcome = run_script(&candidates[0].script_text(), &g, &ViewCatalog::new(), true).unwrap();
    assert_eq!(outcome.table.rows, vec![vec![Value::Int(expected as i64)]]);
}
