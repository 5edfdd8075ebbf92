use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::Cell;
use super::{
    check_budget, BudgetConfig, Candidate, Descriptor, EliteArchive, EvolutionError, GridConfig,
    IslandSet, MapElitesGrid, MigrationEvent, Mutator, Proposal,
};
use crate::calibration::ParamSpace;
use crate::genome::Genome;
use crate::par::{self, Jobs};
use crate::stats::{is_oos_curve, CurvePoint, IsOosCurve};

/// Scores candidates. `fitness` drives selection; `oos_fitness` is recorded
/// for reporting only.
pub trait Evaluator: Sync {
    fn fitness(&self, genome: &Genome, program: Option<&str>) -> Result<f64, String>;

    fn oos_fitness(&self, _genome: &Genome, _program: Option<&str>) -> Option<Result<f64, String>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub generations: u32,
    pub candidates_per_generation: usize,
    pub n_islands: usize,
    pub migration_period: u32,
    pub migration_rate: f64,
    /// Rank temperature for parent sampling; larger is more uniform.
    pub exploit_temp: f64,
    pub n_inspirations: usize,
    pub archive_capacity: usize,
    pub grid: GridConfig,
    pub budget: BudgetConfig,
    /// Relative mutator weights; empty means round-robin.
    pub mutator_weights: Vec<f64>,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            generations: 20,
            candidates_per_generation: 10,
            n_islands: 5,
            migration_period: 5,
            migration_rate: 0.10,
            exploit_temp: 1.0,
            n_inspirations: 4,
            archive_capacity: 50,
            grid: GridConfig::default(),
            budget: BudgetConfig::default(),
            mutator_weights: Vec::new(),
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, n_mutators: usize) -> Result<(), EvolutionError> {
        let bad = |m: &str| Err(EvolutionError::Config(m.into()));
        if self.n_islands == 0 {
            return bad("n_islands must be >= 1");
        }
        if !(self.exploit_temp > 0.0) {
            return bad("exploit_temp must be positive");
        }
        if !(0.0..=1.0).contains(&self.migration_rate) {
            return bad("migration_rate must lie in [0, 1]");
        }
        if self.grid.bins.contains(&0) {
            return bad("grid bins must be >= 1");
        }
        if !self.mutator_weights.is_empty()
            && (self.mutator_weights.len() != n_mutators
                || self.mutator_weights.iter().any(|w| !(*w >= 0.0))
                || self.mutator_weights.iter().sum::<f64>() <= 0.0)
        {
            return bad(
                "mutator_weights must be one non-negative weight per mutator with a positive sum",
            );
        }
        Ok(())
    }
}

/// One evaluated candidate as persisted in the run record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    /// Evaluation order; doubles as the record's logical timestamp.
    pub seq: usize,
    pub id: u64,
    pub parent_id: Option<u64>,
    pub generation: u32,
    pub island: usize,
    pub mutator_tag: String,
    pub genome: Genome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    /// Selection fitness (after budget penalty).
    pub is_fitness: Option<f64>,
    pub raw_is_fitness: Option<f64>,
    pub oos_fitness: Option<f64>,
    pub budget_count: usize,
    pub budget_violation: bool,
    pub descriptor: Descriptor,
    pub cell: Option<Cell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub entries: Vec<RunEntry>,
    pub migrations: Vec<MigrationEvent>,
}

impl RunRecord {
    /// Highest IS fitness; earliest on ties.
    pub fn best(&self) -> Option<&RunEntry> {
        self.entries.iter().filter(|e| e.is_fitness.is_some()).fold(
            None,
            |acc: Option<&RunEntry>, e| match acc {
                Some(b) if b.is_fitness >= e.is_fitness => Some(b),
                _ => Some(e),
            },
        )
    }

    pub fn get(&self, id: u64) -> Option<&RunEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn curve_points(&self) -> Vec<CurvePoint> {
        self.entries
            .iter()
            .map(|e| CurvePoint {
                is_fitness: e.is_fitness,
                oos_fitness: e.oos_fitness,
            })
            .collect()
    }

    /// Cumulative-best IS fitness and the OOS fitness of the running champion.
    pub fn is_oos_curve(&self) -> IsOosCurve {
        is_oos_curve(&self.curve_points())
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut writer, e)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<RunRecord, EvolutionError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| EvolutionError::Record(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            entries.push(
                serde_json::from_str(&line)
                    .map_err(|e| EvolutionError::Record(format!("line {}: {e}", i + 1)))?,
            );
        }
        Ok(RunRecord {
            entries,
            migrations: Vec::new(),
        })
    }
}

/// Global best first, then recent top performers and occupants of randomly
/// chosen grid cells (one per cell), without repeats.
pub fn sample_inspirations<R: Rng + ?Sized>(
    grid: &MapElitesGrid,
    archive: &EliteArchive,
    recent: &[Candidate],
    rng: &mut R,
    k: usize,
) -> Vec<Candidate> {
    let Some(best) = archive.best() else {
        return Vec::new();
    };
    if k == 0 {
        return Vec::new();
    }
    let mut out = vec![best.clone()];
    let rest = k - 1;
    let n_recent = rest / 2;
    let mut ranked: Vec<&Candidate> = recent.iter().filter(|c| c.fitness.is_some()).collect();
    ranked.sort_by(|a, b| Candidate::rank_cmp(a, b));
    for c in ranked {
        if out.len() > n_recent {
            break;
        }
        if !out.iter().any(|o| o.id == c.id) {
            out.push(c.clone());
        }
    }
    let mut cells: Vec<&Candidate> = grid.occupants().map(|(_, c)| c).collect();
    cells.shuffle(rng);
    for c in cells {
        if out.len() >= k {
            break;
        }
        if !out.iter().any(|o| o.id == c.id) {
            out.push(c.clone());
        }
    }
    for c in archive.members() {
        if out.len() >= k {
            break;
        }
        if !out.iter().any(|o| o.id == c.id) {
            out.push(c.clone());
        }
    }
    out
}

struct Pending {
    parent: Candidate,
    mutator_name: String,
    proposal: Result<Proposal, String>,
}

struct Scored {
    raw: Result<f64, String>,
    oos: Option<f64>,
}

fn score(evaluator: &dyn Evaluator, genome: &Genome, program: Option<&str>) -> Scored {
    let raw = evaluator.fitness(genome, program).and_then(|f| {
        if f.is_finite() {
            Ok(f)
        } else {
            Err(format!("non-finite fitness {f}"))
        }
    });
    let oos = evaluator
        .oos_fitness(genome, program)
        .and_then(|r| r.ok())
        .filter(|f| f.is_finite());
    Scored { raw, oos }
}

/// Runs the sample → inspire → mutate → evaluate → insert loop. Evaluation
/// within a generation is parallel; all population updates are sequential,
/// so the record is identical for any `jobs`.
pub fn evolve(
    config: &EvolutionConfig,
    seed_genome: &Genome,
    space: &ParamSpace,
    evaluator: &dyn Evaluator,
    mutators: &[&dyn Mutator],
    jobs: Jobs,
) -> Result<RunRecord, EvolutionError> {
    if mutators.is_empty() {
        return Err(EvolutionError::NoMutators);
    }
    config.validate(mutators.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut grid = MapElitesGrid::new(config.grid);
    let mut islands = IslandSet::new(
        config.n_islands,
        config.migration_period,
        config.migration_rate,
    );
    let mut archive = EliteArchive::new(config.archive_capacity);
    let mut record = RunRecord::default();
    let mut next_id = 0u64;
    let mut rr = 0usize;

    let mut admit = |record: &mut RunRecord,
                     grid: &mut MapElitesGrid,
                     islands: &mut IslandSet,
                     archive: &mut EliteArchive,
                     parent: Option<&Candidate>,
                     generation: u32,
                     tag: String,
                     proposal: Result<Proposal, String>,
                     scored: Option<Scored>|
     -> Candidate {
        let id = next_id;
        next_id += 1;
        let (genome, program, descriptor, mut error) = match &proposal {
            Ok(p) => (p.genome.clone(), p.program.clone(), p.descriptor, None),
            Err(e) => (
                parent.map(|p| p.genome.clone()).unwrap_or_default(),
                None,
                None,
                Some(e.clone()),
            ),
        };
        let budget = check_budget(&genome, program.as_deref(), &config.budget);
        let descriptor = descriptor.unwrap_or(Descriptor {
            complexity: budget.count() as f64,
            diversity: space.normalized_distance(seed_genome, &genome),
        });
        let (raw, oos) = match scored {
            Some(Scored { raw: Ok(f), oos }) => (Some(f), oos),
            Some(Scored { raw: Err(e), oos }) => {
                error = Some(e);
                (None, oos)
            }
            None => (None, None),
        };
        let fitness = raw.map(|f| {
            if budget.is_violation() {
                config.budget.penalize(f)
            } else {
                f
            }
        });
        let island = parent.map_or(0, |p| p.island);
        let cand = Candidate {
            id,
            genome: genome.clone(),
            program: program.clone(),
            parent_id: parent.map(|p| p.id),
            generation,
            island,
            mutator_tag: tag.clone(),
            fitness,
            descriptor,
        };
        let cell = grid.insert(&cand).map(|o| o.cell);
        archive.insert(&cand);
        if parent.is_none() {
            for i in 0..islands.n_islands() {
                islands.add(i, cand.clone());
            }
        } else {
            islands.add(island, cand.clone());
        }
        record.entries.push(RunEntry {
            seq: record.entries.len(),
            id,
            parent_id: cand.parent_id,
            generation,
            island,
            mutator_tag: tag,
            genome,
            program,
            is_fitness: fitness,
            raw_is_fitness: raw,
            oos_fitness: oos,
            budget_count: budget.count(),
            budget_violation: budget.is_violation(),
            descriptor,
            cell,
            error,
        });
        cand
    };

    let seed_score = score(evaluator, seed_genome, None);
    let seed_prop = Ok(Proposal {
        genome: seed_genome.clone(),
        program: None,
        tag: None,
        descriptor: None,
    });
    let seed = admit(
        &mut record,
        &mut grid,
        &mut islands,
        &mut archive,
        None,
        0,
        "seed".into(),
        seed_prop,
        Some(seed_score),
    );
    let mut recent = vec![seed];

    for generation in 1..=config.generations {
        if islands.population() == 0 {
            log::warn!("population empty at generation {generation}; stopping");
            break;
        }
        let mut pending = Vec::with_capacity(config.candidates_per_generation);
        for _ in 0..config.candidates_per_generation {
            let parent = islands
                .sample_parent(&mut rng, config.exploit_temp)?
                .clone();
            let inspirations =
                sample_inspirations(&grid, &archive, &recent, &mut rng, config.n_inspirations);
            let m = if config.mutator_weights.is_empty() {
                rr += 1;
                (rr - 1) % mutators.len()
            } else {
                let total: f64 = config.mutator_weights.iter().sum();
                let mut u = rng.random::<f64>() * total;
                config
                    .mutator_weights
                    .iter()
                    .position(|w| {
                        let hit = u < *w;
                        u -= w;
                        hit
                    })
                    .unwrap_or(mutators.len() - 1)
            };
            let mut child_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
            let proposal = mutators[m]
                .propose(&parent, &inspirations, &mut child_rng)
                .map_err(|e| e.to_string());
            pending.push(Pending {
                parent,
                mutator_name: mutators[m].name().to_string(),
                proposal,
            });
        }
        let scores = par::map(&pending, jobs, |p| {
            p.proposal
                .as_ref()
                .ok()
                .map(|prop| score(evaluator, &prop.genome, prop.program.as_deref()))
        });
        recent.clear();
        for (p, s) in pending.into_iter().zip(scores) {
            let tag = p
                .proposal
                .as_ref()
                .ok()
                .and_then(|x| x.tag.clone())
                .unwrap_or(p.mutator_name);
            let c = admit(
                &mut record,
                &mut grid,
                &mut islands,
                &mut archive,
                Some(&p.parent),
                generation,
                tag,
                p.proposal,
                s,
            );
            recent.push(c);
        }
        record.migrations.extend(islands.migrate(generation));
    }
    Ok(record)
}
