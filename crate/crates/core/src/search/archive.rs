use serde::{Deserialize, Serialize};

use crate::fitness::ProxyVector;
use crate::testcase::TestCase;

/// When a covering newcomer displaces the stored test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchivePolicy {
    /// Strictly lower performance score.
    PerformanceScore,
    /// Strictly shorter.
    Length,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub test: TestCase,
    pub proxies: ProxyVector,
    pub score: f64,
}

impl ArchiveEntry {
    pub fn new(test: TestCase, proxies: ProxyVector) -> Self {
        ArchiveEntry { score: proxies.performance_score(), test, proxies }
    }

    pub fn length(&self) -> usize {
        self.test.len()
    }
}

/// One insertion or replacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEvent {
    pub generation: usize,
    pub target: String,
    /// Score and length of the displaced test; `None` for an insertion.
    pub old_score: Option<f64>,
    pub old_length: Option<usize>,
    pub new_score: f64,
    pub new_length: usize,
}

impl ArchiveEvent {
    pub fn is_replacement(&self) -> bool {
        self.old_score.is_some()
    }
}

/// Best covering test per target, keyed by target index.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub policy: ArchivePolicy,
    ids: Vec<String>,
    entries: Vec<Option<ArchiveEntry>>,
    covered: usize,
    pub events: Vec<ArchiveEvent>,
}

impl Archive {
    pub fn new(policy: ArchivePolicy, ids: Vec<String>) -> Self {
        let entries = vec![None; ids.len()];
        Archive { policy, ids, entries, covered: 0, events: Vec::new() }
    }

    pub fn is_covered(&self, target: usize) -> bool {
        self.entries[target].is_some()
    }

    pub fn covered_count(&self) -> usize {
        self.covered
    }

    pub fn all_covered(&self) -> bool {
        self.covered == self.entries.len()
    }

    pub fn get(&self, target: usize) -> Option<&ArchiveEntry> {
        self.entries[target].as_ref()
    }

    /// `(target index, target id, entry)` for every covered target.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &str, &ArchiveEntry)> {
        self.entries.iter().enumerate().filter_map(|(i, e)| e.as_ref().map(|e| (i, self.ids[i].as_str(), e)))
    }

    /// Offers `test`, known to cover `target`. Returns whether it was stored.
    pub fn offer(&mut self, target: usize, test: &TestCase, proxies: ProxyVector, generation: usize) -> bool {
        let (score, length) = (proxies.performance_score(), test.len());
        let (old_score, old_length) = match &self.entries[target] {
            None => (None, None),
            Some(old) => {
                let better = match self.policy {
                    ArchivePolicy::PerformanceScore => score < old.score,
                    ArchivePolicy::Length => length < old.length(),
                };
                if !better {
                    return false;
                }
                (Some(old.score), Some(old.length()))
            }
        };
        if old_score.is_none() {
            self.covered += 1;
        }
        self.events.push(ArchiveEvent {
            generation,
            target: self.ids[target].clone(),
            old_score,
            new_score: score,
            old_length,
            new_length: length,
        });
        self.entries[target] = Some(ArchiveEntry { test: test.clone(), proxies, score });
        true
    }

    /// Distinct archived tests, in target order.
    pub fn tests(&self) -> Vec<TestCase> {
        let mut out: Vec<TestCase> = Vec::new();
        for (_, _, e) in self.entries() {
            if !out.contains(&e.test) {
                out.push(e.test.clone());
            }
        }
        out
    }
}
