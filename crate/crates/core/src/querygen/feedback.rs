use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CandidateKind, QueryCandidate};
use crate::nl::{AlgorithmKind, Production};

/// Score of a candidate nobody has rated yet.
pub const DEFAULT_SCORE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeedbackKey {
    pub production: Production,
    pub kind: CandidateKind,
    pub algorithm: Option<AlgorithmKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("stars must be between 1 and 5, got {0}")]
pub struct FeedbackError(pub i64);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub sum: u64,
    pub count: u64,
}

/// Star ratings per (production, kind, algorithm).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeedbackStore {
    tallies: BTreeMap<FeedbackKey, Tally>,
}

impl FeedbackStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, key: FeedbackKey, stars: i64) -> Result<(), FeedbackError> {
        if !(1..=5).contains(&stars) {
            return Err(FeedbackError(stars));
        }
        let tally = self.tallies.entry(key).or_default();
        tally.sum += stars as u64;
        tally.count += 1;
        Ok(())
    }

    /// Seeds a tally directly, e.g. when restoring saved state.
    pub fn insert(&mut self, key: FeedbackKey, tally: Tally) {
        self.tallies.insert(key, tally);
    }

    pub fn tally(&self, key: &FeedbackKey) -> Option<Tally> {
        self.tallies.get(key).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FeedbackKey, &Tally)> {
        self.tallies.iter()
    }

    /// Mean stars for `key`, or [`DEFAULT_SCORE`] when unrated.
    pub fn score(&self, key: &FeedbackKey) -> f64 {
        match self.tallies.get(key) {
            Some(t) if t.count > 0 => t.sum as f64 / t.count as f64,
            _ => DEFAULT_SCORE,
        }
    }
}

/// Scores every candidate from `feedback` and sorts by score, highest
/// first; equal scores keep their input order.
pub fn rank_candidates(mut candidates: Vec<QueryCandidate>, feedback: &FeedbackStore) -> Vec<QueryCandidate> {
    for c in &mut candidates {
        c.score = feedback.score(&c.feedback_key());
    }
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score));
    candidates
}
