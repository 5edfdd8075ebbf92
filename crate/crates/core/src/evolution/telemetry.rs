use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::RunRecord;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MutatorStats {
    pub children: usize,
    pub failures: usize,
    /// Children whose fitness strictly exceeded their parent's.
    pub improvements: usize,
    pub improvement_rate: f64,
    /// Appearances among the top-K candidates by fitness.
    pub top_k: usize,
    /// Steps along the best candidate's ancestry produced by this mutator.
    pub lineage_steps: usize,
}

/// Ancestry chain from `id` back to the seed, starting with `id`.
pub fn lineage(record: &RunRecord, id: u64) -> Vec<u64> {
    let mut chain = Vec::new();
    let mut cur = record.get(id);
    while let Some(e) = cur {
        if chain.contains(&e.id) {
            break;
        }
        chain.push(e.id);
        cur = e.parent_id.and_then(|p| record.get(p));
    }
    chain
}

/// Per-mutator improvement rates, top-K membership and lineage contributions.
/// The seed is excluded.
pub fn mutator_stats(record: &RunRecord, top_k: usize) -> BTreeMap<String, MutatorStats> {
    let mut stats: BTreeMap<String, MutatorStats> = BTreeMap::new();
    for e in record.entries.iter().filter(|e| e.parent_id.is_some()) {
        let s = stats.entry(e.mutator_tag.clone()).or_default();
        s.children += 1;
        let parent_fit = e
            .parent_id
            .and_then(|p| record.get(p))
            .and_then(|p| p.is_fitness);
        match (e.is_fitness, parent_fit) {
            (None, _) => s.failures += 1,
            (Some(c), Some(p)) if c > p => s.improvements += 1,
            _ => {}
        }
    }
    let mut ranked: Vec<_> = record
        .entries
        .iter()
        .filter(|e| e.is_fitness.is_some() && e.parent_id.is_some())
        .collect();
    ranked.sort_by(|a, b| {
        b.is_fitness
            .unwrap()
            .total_cmp(&a.is_fitness.unwrap())
            .then(a.id.cmp(&b.id))
    });
    for e in ranked.into_iter().take(top_k) {
        stats.entry(e.mutator_tag.clone()).or_default().top_k += 1;
    }
    if let Some(best) = record.best() {
        for id in lineage(record, best.id) {
            let e = record.get(id).expect("lineage ids exist");
            if e.parent_id.is_some() {
                stats
                    .entry(e.mutator_tag.clone())
                    .or_default()
                    .lineage_steps += 1;
            }
        }
    }
    for s in stats.values_mut() {
        s.improvement_rate = if s.children > 0 {
            s.improvements as f64 / s.children as f64
        } else {
            0.0
        };
    }
    stats
}
