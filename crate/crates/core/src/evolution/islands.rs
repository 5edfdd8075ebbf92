use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Candidate, EvolutionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MigrationEvent {
    pub generation: u32,
    pub from: usize,
    pub to: usize,
    pub id: u64,
}

/// Sub-populations connected in a ring; island `i` sends to `(i + 1) % n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IslandSet {
    pub migration_period: u32,
    pub migration_rate: f64,
    islands: Vec<Vec<Candidate>>,
}

impl IslandSet {
    pub fn new(n_islands: usize, migration_period: u32, migration_rate: f64) -> Self {
        IslandSet {
            migration_period,
            migration_rate,
            islands: vec![Vec::new(); n_islands.max(1)],
        }
    }

    pub fn n_islands(&self) -> usize {
        self.islands.len()
    }

    pub fn island(&self, i: usize) -> &[Candidate] {
        &self.islands[i]
    }

    pub fn population(&self) -> usize {
        self.islands.iter().map(Vec::len).sum()
    }

    /// Failed candidates are not added.
    pub fn add(&mut self, island: usize, c: Candidate) {
        if c.fitness.is_some() {
            let i = island % self.islands.len();
            self.islands[i].push(Candidate { island: i, ..c });
        }
    }

    /// Picks a non-empty island uniformly, then a member with probability
    /// proportional to exp(-rank / temp) (rank 0 = fittest).
    pub fn sample_parent<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        exploit_temp: f64,
    ) -> Result<&Candidate, EvolutionError> {
        let live: Vec<&Vec<Candidate>> = self.islands.iter().filter(|i| !i.is_empty()).collect();
        if live.is_empty() {
            return Err(EvolutionError::EmptyPopulation);
        }
        let island = live[rng.random_range(0..live.len())];
        let mut ranked: Vec<&Candidate> = island.iter().collect();
        ranked.sort_by(|a, b| Candidate::rank_cmp(a, b));
        let weights: Vec<f64> = (0..ranked.len())
            .map(|r| (-(r as f64) / exploit_temp).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (c, w) in ranked.iter().zip(&weights) {
            if u < *w {
                return Ok(c);
            }
            u -= w;
        }
        Ok(ranked[ranked.len() - 1])
    }

    /// Copies each island's top `max(1, floor(rate·n))` members to its ring
    /// neighbour. Members already present on the target are not duplicated.
    /// Only runs on multiples of the migration period.
    pub fn migrate(&mut self, generation: u32) -> Vec<MigrationEvent> {
        let n = self.islands.len();
        if n < 2
            || self.migration_period == 0
            || generation == 0
            || !generation.is_multiple_of(self.migration_period)
        {
            return Vec::new();
        }
        let outgoing: Vec<Vec<Candidate>> = self
            .islands
            .iter()
            .map(|members| {
                if members.is_empty() {
                    return Vec::new();
                }
                let k = ((self.migration_rate * members.len() as f64).floor() as usize).max(1);
                let mut ranked: Vec<&Candidate> = members.iter().collect();
                ranked.sort_by(|a, b| Candidate::rank_cmp(a, b));
                ranked.into_iter().take(k).cloned().collect()
            })
            .collect();
        let mut events = Vec::new();
        for (from, sent) in outgoing.into_iter().enumerate() {
            let to = (from + 1) % n;
            for c in sent {
                if self.islands[to].iter().any(|m| m.id == c.id) {
                    continue;
                }
                events.push(MigrationEvent {
                    generation,
                    from,
                    to,
                    id: c.id,
                });
                self.islands[to].push(Candidate { island: to, ..c });
            }
        }
        events
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Descriptor;
    use crate::genome::Genome;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cand(id: u64, fitness: f64) -> Candidate {
        Candidate {
            id,
            genome: Genome::new(),
            program: None,
            parent_id: None,
            generation: 0,
            island: 0,
            mutator_tag: "t".into(),
            fitness: Some(fitness),
            descriptor: Descriptor::default(),
        }
    }

    #[test]
    fn empty_population_errors() {
        let s = IslandSet::new(5, 5, 0.1);
        assert_eq!(
            s.sample_parent(&mut ChaCha8Rng::seed_from_u64(0), 1.0)
                .unwrap_err(),
            EvolutionError::EmptyPopulation
        );
    }

    #[test]
    fn single_candidate_always_chosen() {
        let mut s = IslandSet::new(5, 5, 0.1);
        s.add(3, cand(7, 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            assert_eq!(s.sample_parent(&mut rng, 1.0).unwrap().id, 7);
        }
    }

    #[test]
    fn better_parent_favoured() {
        let mut s = IslandSet::new(1, 5, 0.1);
        s.add(0, cand(0, 0.0));
        s.add(0, cand(1, 100.0));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let hits = (0..10_000)
            .filter(|_| s.sample_parent(&mut rng, 1.0).unwrap().id == 1)
            .count();
        assert!(hits as f64 / 10_000.0 > 0.7, "{hits}");
    }

    #[test]
    fn infinite_temperature_is_uniform() {
        let mut s = IslandSet::new(1, 5, 0.1);
        for i in 0..4 {
            s.add(0, cand(i, i as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 4];
        let n = 8_000;
        for _ in 0..n {
            counts[s.sample_parent(&mut rng, f64::INFINITY).unwrap().id as usize] += 1;
        }
        let e = n as f64 / 4.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // χ²(3) 99.9% quantile
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn ring_migration_copies() {
        let mut s = IslandSet::new(5, 5, 0.1);
        for i in 0..5 {
            for j in 0..10 {
                s.add(i, cand((i * 10 + j) as u64, j as f64));
            }
        }
        assert!(s.migrate(3).is_empty());
        let ev = s.migrate(5);
        assert_eq!(ev.len(), 5);
        for e in &ev {
            assert_eq!(e.to, (e.from + 1) % 5);
            assert_eq!(e.id, (e.from * 10 + 9) as u64);
        }
        assert_eq!(s.population(), 55);
        assert!(s.island(1).iter().any(|c| c.id == 9 && c.island == 1));
        assert!(s.island(0).iter().any(|c| c.id == 9));
    }

    #[test]
    fn single_member_islands_still_send() {
        let mut s = IslandSet::new(3, 5, 0.1);
        for i in 0..3 {
            s.add(i, cand(i as u64, 1.0));
        }
        assert_eq!(s.migrate(10).len(), 3);
        assert_eq!(s.population(), 6);
    }
}
