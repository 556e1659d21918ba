//! Random sentences from the question grammar, for round-trip testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::GraphSchema;

const NAMES: &[&str] = &["my_graph", "g1", "patients_view", "synthea", "view_2"];
const VALUES: &[&str] = &[
    "Lisinopril 10 MG Oral Tablet",
    "Hypertension",
    "white",
    "Boston",
    "Well child visit",
    "it's fine",
    "42",
];
const CENTRALITY: &[&str] = &["most important", "most popular", "most influential"];
const COMMUNITY: &[&str] = &["communities", "groups", "subgroups", "clusters"];

struct Sampler<'a> {
    rng: ChaCha8Rng,
    schema: &'a GraphSchema,
    /// (label, property) pairs.
    owned: Vec<(&'a str, &'a str)>,
    /// (label, relationship type) pairs where the type touches the label.
    touching: Vec<(&'a str, &'a str)>,
    /// (label, other label) pairs joined by some relationship type.
    joined: Vec<(&'a str, &'a str)>,
}

impl<'a> Sampler<'a> {
    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        *items.choose(&mut self.rng).expect("non-empty choice")
    }

    fn value(&mut self) -> String {
        let v = self.pick(VALUES);
        if v.contains('\'') || self.rng.gen_bool(0.3) {
            format!("\"{v}\"")
        } else {
            format!("'{v}'")
        }
    }

    fn name(&mut self) -> &'static str {
        self.pick(NAMES)
    }

    fn properties_of(&self, label: &str) -> Vec<&'a str> {
        self.owned
            .iter()
            .filter(|(l, _)| *l == label)
            .map(|(_, p)| *p)
            .collect()
    }

    fn selection(&mut self) -> Option<String> {
        let (label, prop) = self.pick_opt(&self.owned.clone())?;
        let connector = self.pick(&["for which", "where", "with", "whose"]);
        let mut s = format!("Find the {label} {connector} the {prop} is {}", self.value());
        if self.rng.gen_bool(0.4) {
            let other = self.pick(&self.properties_of(label));
            s.push_str(&format!(" and the {other} is {}", self.value()));
        }
        Some(s)
    }

    fn projection(&mut self) -> Option<String> {
        let (label, prop) = self.pick_opt(&self.owned.clone())?;
        let scope = self.pick(&["", " in the study", " in the graph", " in the Synthea study"]);
        Some(if self.rng.gen_bool(0.5) {
            format!("Which is the {prop} of the {label}{scope}?")
        } else {
            format!("Find the {prop} of {label}{scope}")
        })
    }

    fn selection_projection(&mut self) -> Option<String> {
        let (source, source_prop) = self.pick_opt(&self.owned.clone())?;
        let (target, target_prop) = self.pick(&self.owned.clone());
        Some(format!(
            "Find the {source} {source_prop} node where the {target_prop} of the {target} is {}.",
            self.value()
        ))
    }

    fn aggregation(&mut self) -> Option<String> {
        let label = self.pick(&self.schema.labels.iter().map(String::as_str).collect::<Vec<_>>());
        let props = self.properties_of(label);
        Some(match self.rng.gen_range(0..3) {
            1 if props.contains(&"RACE") => format!("How many {label} are caucasian?"),
            2 if !props.is_empty() => {
                let prop = self.pick(&props);
                format!("How many {label} where the {prop} is {}?", self.value())
            }
            _ => format!("How many {label} are there in the study?"),
        })
    }

    fn view_creation(&mut self) -> Option<String> {
        let (label, rel) = self.pick_opt(&self.touching.clone())?;
        let base = self.name();
        let named = if self.rng.gen_bool(0.5) {
            format!(" named as {}", self.name())
        } else {
            String::new()
        };
        let oriented = if self.rng.gen_bool(0.5) { " oriented" } else { "" };
        Some(format!(
            "Create and estimate memory for the graph view {base}{named} with the node {label} and the relationship {rel}{oriented}"
        ))
    }

    fn estimate_memory(&mut self) -> Option<String> {
        let algorithm = self.pick(&["PageRank", "Label Propagation"]);
        Some(format!(
            "Estimate the required memory for applying {algorithm} on the graph view {}",
            self.name()
        ))
    }

    fn relation(&mut self) -> Option<(&'a str, String)> {
        if self.rng.gen_bool(0.5) {
            let (label, rel) = self.pick_opt(&self.touching.clone())?;
            Some((label, format!("with {rel}")))
        } else {
            let (label, other) = self.pick_opt(&self.joined.clone())?;
            Some((label, format!("for the {other}")))
        }
    }

    fn iterations(&mut self) -> String {
        let n = self.rng.gen_range(1..=50);
        match self.rng.gen_range(0..4) {
            0 => String::new(),
            1 => format!(" with a maximum of {n} iterations"),
            2 => format!(" with {n} maximum of iterations"),
            _ => format!(" with max iterations {n}"),
        }
    }

    fn centrality(&mut self) -> Option<String> {
        let (label, relation) = self.relation()?;
        let keyword = self.pick(CENTRALITY);
        let graph = match self.rng.gen_range(0..3) {
            0 => String::new(),
            1 => " in the graph".to_string(),
            _ => format!(" in the graph {}", self.name()),
        };
        let iterations = self.iterations();
        let damping = if self.rng.gen_bool(0.5) {
            format!(" and a damping factor of 0.{}", self.rng.gen_range(10..=95))
        } else {
            String::new()
        };
        Some(format!(
            "Find the {keyword} {label} {relation}{graph}{iterations}{damping}"
        ))
    }

    fn community(&mut self) -> Option<String> {
        let (label, relation) = self.relation()?;
        let opening = if self.rng.gen_bool(0.3) {
            "Classify the".to_string()
        } else {
            format!("Find the {} of", self.pick(COMMUNITY))
        };
        let view = match self.rng.gen_range(0..3) {
            0 => String::new(),
            1 => format!(" within the view {}", self.name()),
            _ => " in the graph".to_string(),
        };
        let iterations = self.iterations();
        Some(format!("{opening} {label}{view} {relation}{iterations}"))
    }

    fn pick_opt<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        items.choose(&mut self.rng).copied()
    }
}

/// `n` grammar sentences with slots filled from `schema`; the same seed
/// always gives the same list. Values are quoted so every sentence has
/// exactly one reading of its literals.
pub fn grammar_sample(seed: u64, n: usize, schema: &GraphSchema) -> Vec<String> {
    let owned = schema
        .properties
        .iter()
        .flat_map(|(l, props)| props.iter().map(move |p| (l.as_str(), p.as_str())))
        .collect();
    let mut touching = Vec::new();
    let mut joined = Vec::new();
    for (rel, (source, target)) in &schema.relationship_types {
        touching.push((source.as_str(), rel.as_str()));
        touching.push((target.as_str(), rel.as_str()));
        joined.push((source.as_str(), target.as_str()));
        joined.push((target.as_str(), source.as_str()));
    }
    let mut sampler = Sampler {
        rng: ChaCha8Rng::seed_from_u64(seed),
        schema,
        owned,
        touching,
        joined,
    };
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let sentence = match sampler.rng.gen_range(0..8) {
            0 => sampler.selection(),
            1 => sampler.projection(),
            2 => sampler.selection_projection(),
            3 => sampler.aggregation(),
            4 => sampler.view_creation(),
            5 => sampler.estimate_memory(),
            6 => sampler.centrality(),
            _ => sampler.community(),
        };
        if schema.labels.is_empty() {
            // nothing to talk about beyond view estimates
            out.push(sampler.estimate_memory().expect("always available"));
            continue;
        }
        out.extend(sentence);
    }
    out
}
