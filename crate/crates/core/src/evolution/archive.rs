use serde::{Deserialize, Serialize};

use super::Candidate;

/// The `capacity` best candidates seen so far, regardless of island.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliteArchive {
    pub capacity: usize,
    members: Vec<Candidate>,
}

impl EliteArchive {
    pub fn new(capacity: usize) -> Self {
        EliteArchive {
            capacity,
            members: Vec::new(),
        }
    }

    /// Best first.
    pub fn members(&self) -> &[Candidate] {
        &self.members
    }

    pub fn best(&self) -> Option<&Candidate> {
        self.members.first()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Returns true if the candidate was admitted. Failed candidates and ids
    /// already present are ignored.
    pub fn insert(&mut self, c: &Candidate) -> bool {
        if c.fitness.is_none() || self.capacity == 0 || self.members.iter().any(|m| m.id == c.id) {
            return false;
        }
        let pos = self
            .members
            .partition_point(|m| Candidate::rank_cmp(m, c).is_lt());
        if pos >= self.capacity {
            return false;
        }
        self.members.insert(pos, c.clone());
        self.members.truncate(self.capacity);
        true
    }
}
