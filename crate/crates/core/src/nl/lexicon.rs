//! Schema-derived vocabulary for question tokenization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlgorithmKind {
    PageRank,
    DegreeCentrality,
    LabelPropagation,
}

impl AlgorithmKind {
    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::PageRank => "PageRank",
            AlgorithmKind::DegreeCentrality => "DegreeCentrality",
            AlgorithmKind::LabelPropagation => "LabelPropagation",
        }
    }

    /// True for the community-detection family.
    pub fn is_community(self) -> bool {
        self == AlgorithmKind::LabelPropagation
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Extra value synonym: `surface` said about `property` means `canonical`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Synonym {
    pub property: String,
    pub surface: String,
    pub canonical: String,
}

impl Synonym {
    pub fn new(property: &str, surface: &str, canonical: &str) -> Self {
        Self {
            property: property.to_string(),
            surface: surface.to_string(),
            canonical: canonical.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum VocabularyError {
    #[error("synonym {surface:?} refers to unknown property {property}")]
    UnknownProperty { property: String, surface: String },
    #[error("synonym has an empty surface form")]
    EmptySurface,
    #[error("synonym file: {0}")]
    Csv(#[from] csv::Error),
}

/// Single-word grammar terminals.
pub const TERMINALS: &[&str] = &[
    "a",
    "an",
    "and",
    "applying",
    "are",
    "as",
    "by",
    "classify",
    "create",
    "database",
    "equals",
    "estimate",
    "find",
    "for",
    "get",
    "graph",
    "has",
    "have",
    "having",
    "how",
    "in",
    "is",
    "iteration",
    "iterations",
    "list",
    "max",
    "maximum",
    "memory",
    "named",
    "node",
    "nodes",
    "of",
    "on",
    "oriented",
    "relation",
    "relationship",
    "required",
    "show",
    "study",
    "that",
    "the",
    "there",
    "through",
    "via",
    "view",
    "what",
    "where",
    "which",
    "who",
    "whose",
    "with",
    "within",
];

/// Multiword grammar terminals.
pub const PHRASE_TERMINALS: &[&str] = &["how many", "for which", "damping factor"];

const KEYWORD_TABLE: &[(&str, &[AlgorithmKind])] = &[
    ("most important", &[AlgorithmKind::PageRank]),
    (
        "most popular",
        &[AlgorithmKind::DegreeCentrality, AlgorithmKind::PageRank],
    ),
    ("most influential", &[AlgorithmKind::PageRank]),
    ("classify", &[AlgorithmKind::LabelPropagation]),
    ("communities", &[AlgorithmKind::LabelPropagation]),
    ("community", &[AlgorithmKind::LabelPropagation]),
    ("groups", &[AlgorithmKind::LabelPropagation]),
    ("group", &[AlgorithmKind::LabelPropagation]),
    ("subgroups", &[AlgorithmKind::LabelPropagation]),
    ("subgroup", &[AlgorithmKind::LabelPropagation]),
    ("clusters", &[AlgorithmKind::LabelPropagation]),
];

const ALGORITHM_NAMES: &[(&str, AlgorithmKind)] = &[
    ("pagerank", AlgorithmKind::PageRank),
    ("page rank", AlgorithmKind::PageRank),
    ("label propagation", AlgorithmKind::LabelPropagation),
    ("degree centrality", AlgorithmKind::DegreeCentrality),
];

/// Everyday words for labels, used only when the label exists.
const LABEL_SYNONYMS: &[(&str, &str)] = &[
    ("drug", "Medications"),
    ("drugs", "Medications"),
    ("medicine", "Medications"),
    ("medicines", "Medications"),
    ("prescriptions", "Medications"),
    ("visits", "Encounters"),
    ("diagnosis", "Conditions"),
    ("diagnoses", "Conditions"),
    ("vaccines", "Immunizations"),
    ("vaccinations", "Immunizations"),
];

/// (property, surface, canonical), used only when the property exists.
const VALUE_SYNONYMS: &[(&str, &str, &str)] = &[
    ("RACE", "caucasian", "white"),
    ("RACE", "white", "white"),
    ("RACE", "black", "black"),
    ("RACE", "asian", "asian"),
    ("GENDER", "male", "M"),
    ("GENDER", "female", "F"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermKind {
    Keyword,
    Relationship,
    Label,
    Property,
    /// Multiword value synonym.
    Value,
}

/// What a lowercase phrase means to the tokenizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    /// Canonical schema name for labels, relationships and properties.
    pub resolved: Option<String>,
}

/// Immutable vocabulary bound to one schema.
#[derive(Debug, Clone)]
pub struct Lexicon {
    schema: GraphSchema,
    extras: Vec<Synonym>,
    phrases: BTreeMap<Vec<String>, Term>,
    longest_phrase: usize,
    value_synonyms: BTreeMap<(String, String), String>,
    keywords: BTreeMap<String, BTreeSet<AlgorithmKind>>,
    algorithm_names: BTreeMap<String, AlgorithmKind>,
}

pub(crate) fn phrase_key(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_lowercase).collect()
}

fn singular(word: &str) -> Option<String> {
    if let Some(stem) = word.strip_suffix("ies") {
        Some(format!("{stem}y"))
    } else if word.len() > 1 && word.ends_with('s') && !word.ends_with("ss") {
        Some(word[..word.len() - 1].to_string())
    } else {
        None
    }
}

fn plural(word: &str) -> String {
    if word.ends_with('s') {
        word.to_string()
    } else if let Some(stem) = word.strip_suffix('y') {
        format!("{stem}ies")
    } else {
        format!("{word}s")
    }
}

/// `CarePlans` -> `Care Plans`; other names unchanged.
fn split_camel(name: &str) -> String {
    let mut out = String::new();
    let mut prev_lower = false;
    for c in name.chars() {
        if c.is_uppercase() && prev_lower {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        out.push(c);
    }
    out
}

fn label_surfaces(label: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for form in [label.to_string(), split_camel(label)] {
        let lower = form.to_lowercase();
        if let Some(s) = singular(&lower) {
            out.insert(s);
        }
        out.insert(plural(&lower));
        out.insert(lower);
    }
    out
}

fn property_surfaces(property: &str) -> BTreeSet<String> {
    let lower = property.to_lowercase();
    let mut out = BTreeSet::from([lower.clone(), plural(&lower)]);
    if lower.contains('_') {
        let spaced = lower.replace('_', " ");
        out.insert(plural(&spaced));
        out.insert(spaced);
    }
    out
}

impl Lexicon {
    fn insert_phrase(&mut self, phrase: &str, kind: TermKind, resolved: Option<&str>) {
        let key = phrase_key(phrase);
        if key.is_empty() {
            return;
        }
        self.longest_phrase = self.longest_phrase.max(key.len());
        let term = Term {
            kind,
            resolved: resolved.map(str::to_string),
        };
        match self.phrases.get(&key) {
            // lower kinds win; among equals the first (sorted) name wins
            Some(existing) if existing.kind <= kind => {}
            _ => {
                self.phrases.insert(key, term);
            }
        }
    }

    pub fn schema(&self) -> &GraphSchema {
        &self.schema
    }

    /// User-supplied synonyms the lexicon was bound with.
    pub fn extras(&self) -> &[Synonym] {
        &self.extras
    }

    pub fn term(&self, key: &[String]) -> Option<&Term> {
        self.phrases.get(key)
    }

    /// Word count of the longest phrase.
    pub fn longest_phrase(&self) -> usize {
        self.longest_phrase
    }

    /// Canonical value for `surface` said about `property`.
    pub fn value_synonym(&self, property: &str, surface: &str) -> Option<&str> {
        let surface = phrase_key(surface).join(" ");
        self.value_synonyms
            .get(&(property.to_string(), surface))
            .map(String::as_str)
    }

    pub fn keyword_algorithms(&self, phrase: &str) -> Option<&BTreeSet<AlgorithmKind>> {
        self.keywords.get(&phrase_key(phrase).join(" "))
    }

    pub fn keyword_phrases(&self) -> impl Iterator<Item = &str> {
        self.keywords.keys().map(String::as_str)
    }

    pub fn algorithm_named(&self, phrase: &str) -> Option<AlgorithmKind> {
        self.algorithm_names.get(&phrase_key(phrase).join(" ")).copied()
    }

    /// New lexicon over the same schema with `more` appended to the extras.
    pub fn extended(&self, more: &[Synonym]) -> Result<Lexicon, VocabularyError> {
        let mut extras = self.extras.clone();
        extras.extend_from_slice(more);
        bind_vocabulary(&self.schema, &extras)
    }
}

/// Builds the lexicon for `schema`.
///
/// Every label gets its lowercase, singular and plural forms (and the
/// spaced form of camel-case names), every property its lowercase and
/// plural forms, every relationship type its lowercase name. Built-in
/// label and value synonyms are added only for names the schema has.
pub fn bind_vocabulary(schema: &GraphSchema, extras: &[Synonym]) -> Result<Lexicon, VocabularyError> {
    let mut lex = Lexicon {
        schema: schema.clone(),
        extras: extras.to_vec(),
        phrases: BTreeMap::new(),
        longest_phrase: 0,
        value_synonyms: BTreeMap::new(),
        keywords: BTreeMap::new(),
        algorithm_names: BTreeMap::new(),
    };
    for extra in extras {
        if !schema.knows_property(&extra.property) {
            return Err(VocabularyError::UnknownProperty {
                property: extra.property.clone(),
                surface: extra.surface.clone(),
            });
        }
        if phrase_key(&extra.surface).is_empty() {
            return Err(VocabularyError::EmptySurface);
        }
    }

    for w in TERMINALS.iter().chain(PHRASE_TERMINALS) {
        lex.insert_phrase(w, TermKind::Keyword, None);
    }
    for (phrase, algos) in KEYWORD_TABLE {
        lex.insert_phrase(phrase, TermKind::Keyword, None);
        lex.keywords.insert(phrase.to_string(), algos.iter().copied().collect());
    }
    for (name, kind) in ALGORITHM_NAMES {
        lex.insert_phrase(name, TermKind::Keyword, None);
        lex.algorithm_names.insert(name.to_string(), *kind);
    }

    for rel in schema.relationship_types.keys() {
        lex.insert_phrase(&rel.to_lowercase(), TermKind::Relationship, Some(rel));
    }
    for label in &schema.labels {
        for surface in label_surfaces(label) {
            lex.insert_phrase(&surface, TermKind::Label, Some(label));
        }
    }
    for (surface, label) in LABEL_SYNONYMS {
        if schema.labels.contains(*label) {
            lex.insert_phrase(surface, TermKind::Label, Some(label));
        }
    }
    let properties: BTreeSet<&String> = schema.properties.values().flatten().collect();
    for property in properties {
        for surface in property_surfaces(property) {
            lex.insert_phrase(&surface, TermKind::Property, Some(property));
        }
    }

    let builtin = VALUE_SYNONYMS
        .iter()
        .filter(|(p, _, _)| schema.knows_property(p))
        .map(|(p, s, c)| Synonym::new(p, s, c));
    for syn in builtin.chain(extras.iter().cloned()) {
        let key = phrase_key(&syn.surface);
        if key.len() > 1 {
            lex.insert_phrase(&syn.surface, TermKind::Value, None);
        }
        lex.value_synonyms.insert((syn.property, key.join(" ")), syn.canonical);
    }
    Ok(lex)
}

/// Reads `property,surface,canonical` rows (with that header).
pub fn read_synonyms<R: Read>(reader: R) -> Result<Vec<Synonym>, VocabularyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> GraphSchema {
        let mut s = GraphSchema::default();
        for l in ["Patients", "Medications", "CarePlans", "Allergies"] {
            s.labels.insert(l.into());
        }
        s.relationship_types
            .insert("PATIENT_HAS_CAREPLAN".into(), ("Patients".into(), "CarePlans".into()));
        s.properties.insert(
            "Patients".into(),
            ["RACE", "BIRTHPLACE", "FIRST_NAME"].map(String::from).into(),
        );
        s
    }

    fn resolve(lex: &Lexicon, phrase: &str) -> Option<(TermKind, Option<String>)> {
        lex.term(&phrase_key(phrase)).map(|t| (t.kind, t.resolved.clone()))
    }

    #[test]
    fn label_forms() {
        let lex = bind_vocabulary(&schema(), &[]).unwrap();
        for surface in ["patient", "patients", "Patients", "PATIENTS"] {
            assert_eq!(resolve(&lex, surface), Some((TermKind::Label, Some("Patients".into()))));
        }
        assert_eq!(resolve(&lex, "allergy").unwrap().1.as_deref(), Some("Allergies"));
        assert_eq!(resolve(&lex, "care plans").unwrap().1.as_deref(), Some("CarePlans"));
        assert_eq!(resolve(&lex, "careplan").unwrap().1.as_deref(), Some("CarePlans"));
        assert_eq!(resolve(&lex, "drugs").unwrap().1.as_deref(), Some("Medications"));
        // no Encounters label, so no "visits"
        assert_eq!(resolve(&lex, "visits"), None);
    }

    #[test]
    fn relationship_and_property_forms() {
        let lex = bind_vocabulary(&schema(), &[]).unwrap();
        assert_eq!(
            resolve(&lex, "PATIENT_HAS_CAREPLAN"),
            Some((TermKind::Relationship, Some("PATIENT_HAS_CAREPLAN".into())))
        );
        assert_eq!(resolve(&lex, "birthplace").unwrap().1.as_deref(), Some("BIRTHPLACE"));
        assert_eq!(resolve(&lex, "first name").unwrap().1.as_deref(), Some("FIRST_NAME"));
        assert_eq!(resolve(&lex, "the"), Some((TermKind::Keyword, None)));
    }

    #[test]
    fn keyword_table_and_value_synonyms() {
        let lex = bind_vocabulary(&schema(), &[]).unwrap();
        assert_eq!(
            lex.keyword_algorithms("Most Popular").unwrap(),
            &BTreeSet::from([AlgorithmKind::PageRank, AlgorithmKind::DegreeCentrality])
        );
        assert_eq!(lex.value_synonym("RACE", "Caucasian"), Some("white"));
        assert_eq!(lex.value_synonym("GENDER", "male"), None);
        assert_eq!(
            lex.algorithm_named("Label  Propagation"),
            Some(AlgorithmKind::LabelPropagation)
        );
    }

    #[test]
    fn extras_extend_and_validate() {
        let lex = bind_vocabulary(&schema(), &[Synonym::new("RACE", "african american", "black")]).unwrap();
        assert_eq!(lex.value_synonym("RACE", "African American"), Some("black"));
        assert_eq!(resolve(&lex, "african american"), Some((TermKind::Value, None)));
        let err = bind_vocabulary(&schema(), &[Synonym::new("EYECOLOR", "blue", "blue")]).unwrap_err();
        assert!(matches!(err, VocabularyError::UnknownProperty { .. }));
        let more = lex
            .extended(&[Synonym::new("BIRTHPLACE", "beantown", "Boston")])
            .unwrap();
        assert_eq!(more.extras().len(), 2);
        assert_eq!(more.value_synonym("BIRTHPLACE", "beantown"), Some("Boston"));
    }

    #[test]
    fn synonym_csv() {
        let rows = read_synonyms("property,surface,canonical\nRACE, african american ,black\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![Synonym::new("RACE", "african american", "black")]);
        assert!(read_synonyms("property,surface\nRACE,x\n".as_bytes()).is_err());
    }
}
