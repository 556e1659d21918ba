//! Seeded desk-scale stand-in for the Synthea patient export.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ENTITY_FILES;

pub const MEDICATION_DESCRIPTIONS: [(&str, &str); 12] = [
    ("Lisinopril 10 MG Oral Tablet", "Hypertension"),
    ("Amlodipine 5 MG Oral Tablet", "Hypertension"),
    ("Hydrochlorothiazide 25 MG Oral Tablet", "Hypertension"),
    ("Metformin 500 MG Oral Tablet", "Diabetes"),
    ("Simvastatin 20 MG Oral Tablet", "Hyperlipidemia"),
    ("Atorvastatin 10 MG Oral Tablet", "Hyperlipidemia"),
    ("Acetaminophen 325 MG Oral Tablet", "Pain"),
    ("Ibuprofen 200 MG Oral Tablet", "Pain"),
    ("Amoxicillin 250 MG Oral Capsule", "Infection"),
    ("Omeprazole 20 MG Oral Capsule", "Reflux"),
    ("Clopidogrel 75 MG Oral Tablet", "Heart disease"),
    ("Levothyroxine 50 MCG Oral Tablet", "Hypothyroidism"),
];

const BIRTHPLACES: [&str; 6] = ["Boston", "Worcester", "Springfield", "Cambridge", "Lowell", "Quincy"];
const RACES: [(&str, f64); 3] = [("white", 0.6), ("black", 0.25), ("asian", 0.15)];
const ENCOUNTERS: [&str; 5] = [
    "General examination of patient (procedure)",
    "Encounter for symptom",
    "Encounter for check up (procedure)",
    "Emergency room admission (procedure)",
    "Follow-up encounter",
];
const ENCOUNTER_REASONS: [&str; 4] = [
    "",
    "Hypertension",
    "Acute bronchitis (disorder)",
    "Viral sinusitis (disorder)",
];
const ALLERGIES: [&str; 4] = [
    "Allergy to peanuts",
    "Shellfish (substance)",
    "House dust mite (organism)",
    "Penicillin V",
];
const CONDITIONS: [&str; 5] = [
    "Hypertension",
    "Prediabetes",
    "Viral sinusitis (disorder)",
    "Acute bronchitis (disorder)",
    "Anemia (disorder)",
];
const CAREPLANS: [&str; 3] = [
    "Lifestyle education regarding hypertension",
    "Diabetes self management plan",
    "Respiratory therapy",
];
const PROCEDURES: [&str; 3] = [
    "Medication Reconciliation (procedure)",
    "Hemoglobin A1c measurement",
    "Screening for depression",
];
const IMMUNIZATIONS: [&str; 3] = [
    "Influenza seasonal injectable preservative free",
    "Td (adult) preservative free",
    "Hep B adolescent or pediatric",
];

/// What `generate_synthetic` wrote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub directory: PathBuf,
    /// file name -> number of data rows
    pub files: BTreeMap<String, usize>,
    pub seed: Option<u64>,
}

impl DatasetManifest {
    pub fn total_rows(&self) -> usize {
        self.files.values().sum()
    }
}

#[derive(Default)]
struct Tables {
    rows: BTreeMap<&'static str, Vec<Vec<String>>>,
}

impl Tables {
    fn push(&mut self, file: &'static str, row: Vec<String>) {
        self.rows.entry(file).or_default().push(row);
    }
}

/// Writes every entity file for `n_patients` synthetic patients.
///
/// Output is a pure function of `(seed, n_patients)`. Per patient: 1-4
/// encounters, 0-3 medications (each tied to one of the patient's
/// encounters), 0-2 allergies, 0-2 conditions, 0-1 care plans, 0-1
/// procedures and 0-2 immunizations.
pub fn generate_synthetic(directory: &Path, seed: u64, n_patients: usize) -> io::Result<DatasetManifest> {
    if n_patients == 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            "n_patients must be at least 1",
        ));
    }
    fs::create_dir_all(directory)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let race = WeightedIndex::new(RACES.iter().map(|(_, w)| *w)).expect("static weights");
    let mut t = Tables::default();
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    let mut next_id = |prefix: &'static str| {
        let n = counters.entry(prefix).or_default();
        *n += 1;
        format!("{prefix}{:06}", *n)
    };

    for _ in 0..n_patients {
        let pid = next_id("P");
        let year = rng.gen_range(1940..=2015);
        let month = rng.gen_range(1..=12);
        let day = rng.gen_range(1..=28);
        t.push(
            "patients.csv",
            vec![
                pid.clone(),
                BIRTHPLACES.choose(&mut rng).unwrap().to_string(),
                RACES[race.sample(&mut rng)].0.to_string(),
                if rng.gen_bool(0.5) { "F" } else { "M" }.to_string(),
                format!("{year:04}-{month:02}-{day:02}"),
            ],
        );

        let mut encounters = Vec::new();
        for _ in 0..rng.gen_range(1..=4) {
            let eid = next_id("E");
            t.push(
                "encounters.csv",
                vec![
                    eid.clone(),
                    pid.clone(),
                    ENCOUNTERS.choose(&mut rng).unwrap().to_string(),
                    ENCOUNTER_REASONS.choose(&mut rng).unwrap().to_string(),
                ],
            );
            encounters.push(eid);
        }
        for _ in 0..rng.gen_range(0..=3) {
            let (description, reason) = MEDICATION_DESCRIPTIONS.choose(&mut rng).unwrap();
            t.push(
                "medications.csv",
                vec![
                    next_id("M"),
                    pid.clone(),
                    encounters.choose(&mut rng).unwrap().clone(),
                    description.to_string(),
                    reason.to_string(),
                ],
            );
        }
        for (file, prefix, pool, max) in [
            ("allergies.csv", "A", &ALLERGIES[..], 2),
            ("conditions.csv", "C", &CONDITIONS[..], 2),
            ("careplans.csv", "CP", &CAREPLANS[..], 1),
            ("procedures.csv", "PR", &PROCEDURES[..], 1),
            ("immunizations.csv", "I", &IMMUNIZATIONS[..], 2),
        ] {
            for _ in 0..rng.gen_range(0..=max) {
                t.push(
                    file,
                    vec![next_id(prefix), pid.clone(), pool.choose(&mut rng).unwrap().to_string()],
                );
            }
        }
    }

    let mut manifest = DatasetManifest {
        directory: directory.to_path_buf(),
        files: BTreeMap::new(),
        seed: Some(seed),
    };
    for entity in ENTITY_FILES {
        let rows = t.rows.remove(entity.file).unwrap_or_default();
        let mut writer = csv::Writer::from_path(directory.join(entity.file)).map_err(io::Error::from)?;
        writer.write_record(entity.columns).map_err(io::Error::from)?;
        for row in &rows {
            writer.write_record(row).map_err(io::Error::from)?;
        }
        writer.flush()?;
        manifest.files.insert(entity.file.to_string(), rows.len());
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_summary, load_csv_dataset};

    fn read_all(dir: &Path) -> BTreeMap<String, Vec<u8>> {
        ENTITY_FILES
            .iter()
            .map(|e| (e.file.to_string(), fs::read(dir.join(e.file)).unwrap()))
            .collect()
    }

    #[test]
    fn same_seed_gives_identical_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_synthetic(a.path(), 42, 100).unwrap();
        generate_synthetic(b.path(), 42, 100).unwrap();
        assert_eq!(read_all(a.path()), read_all(b.path()));
    }

    #[test]
    fn different_seeds_differ() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_synthetic(a.path(), 1, 50).unwrap();
        generate_synthetic(b.path(), 2, 50).unwrap();
        assert_ne!(read_all(a.path()), read_all(b.path()));
    }

    #[test]
    fn patient_row_count_matches_request() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_synthetic(dir.path(), 42, 100).unwrap();
        assert_eq!(manifest.files["patients.csv"], 100);
        let text = fs::read_to_string(dir.path().join("patients.csv")).unwrap();
        assert_eq!(text.lines().count(), 101);
    }

    #[test]
    fn manifest_counts_equal_loaded_label_counts() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = generate_synthetic(dir.path(), 7, 60).unwrap();
        let graph = load_csv_dataset(dir.path()).unwrap();
        let summary = graph_summary(&graph);
        for entity in ENTITY_FILES {
            assert_eq!(
                manifest.files[entity.file],
                summary.per_label.get(entity.label).copied().unwrap_or(0),
                "{}",
                entity.file
            );
        }
        assert_eq!(summary.node_count, manifest.total_rows());
    }

    #[test]
    fn zero_patients_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(generate_synthetic(dir.path(), 1, 0).is_err());
    }

    #[test]
    fn unwritable_directory_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        assert!(generate_synthetic(&blocker.join("sub"), 1, 1).is_err());
    }
}
