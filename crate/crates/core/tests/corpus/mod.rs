//! The published question/listing pairs and the comparison used to check
//! generated scripts against them.
#![allow(dead_code)]

use nlds_core::querygen::QueryCandidate;

use super::oracles::normalize_cypher;

pub fn normalized(script: &[impl AsRef<str>]) -> Vec<String> {
    script.iter().map(|s| normalize_cypher(s.as_ref())).collect()
}

/// True when some candidate's script equals `expected` statement by
/// statement, modulo whitespace and keyword case.
pub fn produced(candidates: &[QueryCandidate], expected: &[&str]) -> bool {
    let want = normalized(expected);
    candidates.iter().any(|c| normalized(&c.script) == want)
}

pub struct Golden {
    pub question: &'static str,
    pub views: &'static [&'static str],
    pub listing: &'static [&'static str],
}

/// Listings as published, except the PageRank stream column: the
/// published `.name` is a property no synthetic node has, so the generator
/// reads `DESCRIPTION` instead.
pub const CORPUS: &[Golden] = &[
    Golden {
        question: "Which is the birthplace of the PATIENTS in the study?",
        views: &[],
        listing: &["MATCH (n:Patients) return n.BIRTHPLACE"],
    },
    Golden {
        question: "Find the Encounters DESCRIPTION node where the DESCRIPTION of the drugs is Amlodipine 5 MG Oral Tablet.",
        views: &[],
        listing: &["MATCH (n:Encounters)-[*]->(m:Medications {DESCRIPTION:\u{2019}Amlodipine 5 MG Oral Tablet\u{2019}}) return n.DESCRIPTION, m.DESCRIPTION"],
    },
    Golden {
        question: "How many patients are caucasian?",
        views: &[],
        listing: &["MATCH (n:Patients {RACE:\u{2019}white\u{2019}}) return count(n)"],
    },
    Golden {
        question: "Find the most popular Encounters for Medications in the graph.",
        views: &[],
        listing: &["MATCH (n:Encounters)-[r:ENCOUNTER_FOR_MEDICATION]-() with n,count(*) as degree return id(n), degree ORDER BY (degree) DESC"],
    },
    Golden {
        question: "Find the most important Drugs prescribed for the PATIENT with a maximum of 25 iterations and a damping factor of 0.60.",
        views: &[],
        listing: &[
            "CALL gds.graph.create('my_graph','Medications',{PATIENT_HAS_MEDICATION: {orientation: 'NATURAL'}})",
            "CALL gds.pageRank.write.estimate('my_graph', {writeProperty: 'pageRank', maxIterations: 25, dampingFactor:0.60}) YIELD nodeCount, relationshipCount, bytesMin, bytesMax, requiredMemory",
            "CALL gds.pageRank.stream('my_graph') YIELD nodeId, score RETURN gds.util.asNode(nodeId).DESCRIPTION AS name, score ORDER BY score DESC LIMIT 10",
        ],
    },
    Golden {
        question: "Get the subgroup of Patients who have PATIENT_HAS_CAREPLAN in the graph with max iterations 20",
        views: &["my_graph"],
        listing: &[
            "CALL gds.labelPropagation.write.estimate('my_graph', {writeProperty: 'community'}) YIELD nodeCount, relationshipCount, bytesMin, bytesMax, requiredMemory",
            "CALL gds.labelPropagation.stream('my_graph', {maxIterations: 20}) YIELD nodeId, communityId RETURN communityId, count(nodeId) AS size ORDER BY size DESC LIMIT 5",
        ],
    },
];
