//! CSV ingestion of the patient dataset.
//!
//! Each entity file becomes one label. The `PATIENT` column of every
//! non-patient file becomes a `PATIENT_HAS_<ENTITY>` relationship from the
//! patient, and `medications.ENCOUNTER` becomes `ENCOUNTER_FOR_MEDICATION`
//! from the encounter. Foreign-key columns are not copied onto nodes.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{NodeId, Properties, PropertyGraph, Value};

pub struct EntityFile {
    pub file: &'static str,
    pub label: &'static str,
    pub columns: &'static [&'static str],
    /// Suffix of the `PATIENT_HAS_*` relationship; `None` for patients.
    pub patient_rel: Option<&'static str>,
}

/// Load order matters: encounters precede medications so that
/// `ENCOUNTER` references resolve.
pub const ENTITY_FILES: &[EntityFile] = &[
    EntityFile {
        file: "patients.csv",
        label: "Patients",
        columns: &["ID", "BIRTHPLACE", "RACE", "GENDER", "BIRTHDATE"],
        patient_rel: None,
    },
    EntityFile {
        file: "encounters.csv",
        label: "Encounters",
        columns: &["ID", "PATIENT", "DESCRIPTION", "REASON"],
        patient_rel: Some("ENCOUNTER"),
    },
    EntityFile {
        file: "medications.csv",
        label: "Medications",
        columns: &["ID", "PATIENT", "ENCOUNTER", "DESCRIPTION", "REASON"],
        patient_rel: Some("MEDICATION"),
    },
    EntityFile {
        file: "allergies.csv",
        label: "Allergies",
        columns: &["ID", "PATIENT", "DESCRIPTION"],
        patient_rel: Some("ALLERGY"),
    },
    EntityFile {
        file: "conditions.csv",
        label: "Conditions",
        columns: &["ID", "PATIENT", "DESCRIPTION"],
        patient_rel: Some("CONDITION"),
    },
    EntityFile {
        file: "careplans.csv",
        label: "CarePlans",
        columns: &["ID", "PATIENT", "DESCRIPTION"],
        patient_rel: Some("CAREPLAN"),
    },
    EntityFile {
        file: "procedures.csv",
        label: "Procedures",
        columns: &["ID", "PATIENT", "DESCRIPTION"],
        patient_rel: Some("PROCEDURE"),
    },
    EntityFile {
        file: "immunizations.csv",
        label: "Immunizations",
        columns: &["ID", "PATIENT", "DESCRIPTION"],
        patient_rel: Some("IMMUNIZATION"),
    },
];

const FOREIGN_KEYS: &[&str] = &["PATIENT", "ENCOUNTER"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("dataset directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: missing required column {column}")]
    MissingColumn { file: String, column: String },
    #[error("{file} row {row}: empty {column}")]
    MissingValue { file: String, row: usize, column: String },
    #[error("{file} row {row}: duplicate ID {id}")]
    DuplicateId { file: String, row: usize, id: String },
    #[error("{file} row {row}: {column} {value} does not match any loaded row")]
    DanglingForeignKey {
        file: String,
        row: usize,
        column: String,
        value: String,
    },
}

/// Loads every entity file present in `directory`. Rows are numbered from 1
/// (the first data row after the header) in error messages.
pub fn load_csv_dataset(directory: &Path) -> Result<PropertyGraph, IngestError> {
    if !directory.is_dir() {
        return Err(IngestError::MissingDirectory(directory.to_path_buf()));
    }
    let mut graph = PropertyGraph::new();
    let mut ids: HashMap<&'static str, HashMap<String, NodeId>> = HashMap::new();

    for entity in ENTITY_FILES {
        let path = directory.join(entity.file);
        if !path.exists() {
            continue;
        }
        let csv_err = |source| IngestError::Csv {
            file: entity.file.to_string(),
            source,
        };
        let mut reader = csv::Reader::from_path(&path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?.clone();
        let mut index = HashMap::new();
        for column in entity.columns {
            let pos = headers
                .iter()
                .position(|h| h.trim() == *column)
                .ok_or_else(|| IngestError::MissingColumn {
                    file: entity.file.to_string(),
                    column: column.to_string(),
                })?;
            index.insert(*column, pos);
        }

        let mut own_ids = HashMap::new();
        for (i, record) in reader.records().enumerate() {
            let row = i + 1;
            let record = record.map_err(csv_err)?;
            let cell = |column: &str| record.get(index[column]).unwrap_or("").trim();

            let id = cell("ID");
            if id.is_empty() {
                return Err(IngestError::MissingValue {
                    file: entity.file.to_string(),
                    row,
                    column: "ID".into(),
                });
            }
            let mut properties = Properties::new();
            for column in entity.columns {
                let value = cell(column);
                if !FOREIGN_KEYS.contains(column) && !value.is_empty() {
                    properties.insert(column.to_string(), Value::from(value));
                }
            }

            // Resolve foreign keys before creating the node so a bad row
            // leaves nothing half-built behind.
            let lookup = |label: &str, column: &str, value: &str| {
                ids.get(label)
                    .and_then(|m| m.get(value))
                    .copied()
                    .ok_or_else(|| IngestError::DanglingForeignKey {
                        file: entity.file.to_string(),
                        row,
                        column: column.to_string(),
                        value: value.to_string(),
                    })
            };
            let patient = match entity.patient_rel {
                Some(_) => {
                    let value = cell("PATIENT");
                    if value.is_empty() {
                        return Err(IngestError::MissingValue {
                            file: entity.file.to_string(),
                            row,
                            column: "PATIENT".into(),
                        });
                    }
                    Some(lookup("Patients", "PATIENT", value)?)
                }
                None => None,
            };
            let encounter = match index.get("ENCOUNTER") {
                Some(_) if !cell("ENCOUNTER").is_empty() => Some(lookup("Encounters", "ENCOUNTER", cell("ENCOUNTER"))?),
                _ => None,
            };

            if own_ids.contains_key(id) {
                return Err(IngestError::DuplicateId {
                    file: entity.file.to_string(),
                    row,
                    id: id.to_string(),
                });
            }
            let node = graph.add_node(entity.label, properties);
            own_ids.insert(id.to_string(), node);

            if let (Some(patient), Some(suffix)) = (patient, entity.patient_rel) {
                graph
                    .add_relationship(format!("PATIENT_HAS_{suffix}"), patient, node, Properties::new())
                    .expect("endpoints exist");
            }
            if let Some(encounter) = encounter {
                graph
                    .add_relationship("ENCOUNTER_FOR_MEDICATION", encounter, node, Properties::new())
                    .expect("endpoints exist");
            }
        }
        ids.insert(entity.label, own_ids);
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{extract_schema, graph_summary};
    use std::fs;

    fn write(dir: &Path, file: &str, body: &str) {
        fs::write(dir.join(file), body).unwrap();
    }

    /// patients.csv with 3 rows, medications.csv with 2 rows both pointing at
    /// the first patient.
    pub(crate) fn five_row_fixture(dir: &Path) {
        write(
            dir,
            "patients.csv",
            "ID,BIRTHPLACE,RACE,GENDER,BIRTHDATE\n\
             p1,Boston,white,F,1970-01-01\n\
             p2,Quincy,black,M,1980-02-02\n\
             p3,Lowell,white,M,1990-03-03\n",
        );
        write(
            dir,
            "medications.csv",
            "ID,PATIENT,ENCOUNTER,DESCRIPTION,REASON\n\
             m1,p1,,Lisinopril 10 MG Oral Tablet,Hypertension\n\
             m2,p1,,Amlodipine 5 MG Oral Tablet,Hypertension\n",
        );
    }

    #[test]
    fn five_row_fixture_loads() {
        let dir = tempfile::tempdir().unwrap();
        five_row_fixture(dir.path());
        let g = load_csv_dataset(dir.path()).unwrap();
        let summary = graph_summary(&g);
        assert_eq!(summary.node_count, 5);
        assert_eq!(summary.relationship_count, 2);
        assert_eq!(summary.per_label["Patients"], 3);
        assert_eq!(summary.per_label["Medications"], 2);
        assert_eq!(summary.per_type["PATIENT_HAS_MEDICATION"], 2);
        for rel in g.relationships() {
            assert_eq!(g.node(rel.source).unwrap().properties["ID"], Value::from("p1"));
        }
        let schema = extract_schema(&g).unwrap();
        assert_eq!(
            schema.labels.iter().collect::<Vec<_>>(),
            vec!["Medications", "Patients"]
        );
        assert_eq!(
            schema.relationship_types["PATIENT_HAS_MEDICATION"],
            ("Patients".to_string(), "Medications".to_string())
        );
        // foreign keys are relationships, not properties
        assert!(!schema.has_property("Medications", "PATIENT"));
        assert!(schema.has_property("Medications", "REASON"));
    }

    #[test]
    fn header_only_patients_gives_no_nodes() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "patients.csv", "ID,BIRTHPLACE,RACE,GENDER,BIRTHDATE\n");
        let g = load_csv_dataset(dir.path()).unwrap();
        assert!(g.nodes_with_label("Patients").is_empty());
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn unknown_patient_reference_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        five_row_fixture(dir.path());
        write(
            dir.path(),
            "medications.csv",
            "ID,PATIENT,ENCOUNTER,DESCRIPTION,REASON\nm1,p1,,A,\nm2,p9,,B,\n",
        );
        match load_csv_dataset(dir.path()).unwrap_err() {
            IngestError::DanglingForeignKey { file, row, value, .. } => {
                assert_eq!(file, "medications.csv");
                assert_eq!(row, 2);
                assert_eq!(value, "p9");
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn missing_column_names_file_and_column() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "patients.csv", "ID,BIRTHPLACE,GENDER,BIRTHDATE\n");
        let err = load_csv_dataset(dir.path()).unwrap_err();
        assert!(matches!(
            &err,
            IngestError::MissingColumn { file, column } if file == "patients.csv" && column == "RACE"
        ));
        assert_eq!(err.to_string(), "patients.csv: missing required column RACE");
    }

    #[test]
    fn encounter_links_become_relationships() {
        let dir = tempfile::tempdir().unwrap();
        five_row_fixture(dir.path());
        write(
            dir.path(),
            "encounters.csv",
            "ID,PATIENT,DESCRIPTION,REASON\ne1,p1,Checkup,\n",
        );
        write(
            dir.path(),
            "medications.csv",
            "ID,PATIENT,ENCOUNTER,DESCRIPTION,REASON\nm1,p1,e1,A,\n",
        );
        let g = load_csv_dataset(dir.path()).unwrap();
        let summary = graph_summary(&g);
        assert_eq!(summary.per_type["ENCOUNTER_FOR_MEDICATION"], 1);
        assert_eq!(summary.per_type["PATIENT_HAS_ENCOUNTER"], 1);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "patients.csv",
            "ID,BIRTHPLACE,RACE,GENDER,BIRTHDATE\np1,,,,\np1,,,,\n",
        );
        assert!(matches!(
            load_csv_dataset(dir.path()).unwrap_err(),
            IngestError::DuplicateId { row: 2, .. }
        ));
    }

    #[test]
    fn missing_directory() {
        assert!(matches!(
            load_csv_dataset(Path::new("/nonexistent/nlds")).unwrap_err(),
            IngestError::MissingDirectory(_)
        ));
    }
}
