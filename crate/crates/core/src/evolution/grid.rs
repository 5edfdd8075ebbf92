use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Candidate;

pub type Cell = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Bin counts for (complexity, diversity, score).
    pub bins: [usize; 3],
    /// Complexity mapped to the last bin and beyond.
    pub complexity_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            bins: [8, 8, 8],
            complexity_max: 32.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertOutcome {
    pub cell: Cell,
    pub inserted: bool,
    pub replaced: Option<u64>,
    /// The score range grew and every cell was recomputed.
    pub rebinned: bool,
}

/// One best occupant per (complexity, diversity, score) cell. Score bins
/// track the running fitness range; when it grows, occupancy is recomputed
/// from every candidate ever inserted so the cell-best property always holds
/// for the current binning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapElitesGrid {
    pub config: GridConfig,
    score_range: Option<(f64, f64)>,
    occupants: BTreeMap<Cell, Candidate>,
    history: Vec<Candidate>,
}

fn bin(x: f64, max: f64, n: usize) -> usize {
    if !(max > 0.0) || !x.is_finite() {
        return 0;
    }
    ((x / max * n as f64).floor().max(0.0) as usize).min(n - 1)
}

impl MapElitesGrid {
    pub fn new(config: GridConfig) -> Self {
        MapElitesGrid {
            config,
            score_range: None,
            occupants: BTreeMap::new(),
            history: Vec::new(),
        }
    }

    pub fn cell_of(&self, c: &Candidate) -> Cell {
        let [nc, nd, ns] = self.config.bins;
        let score = match self.score_range {
            Some((lo, hi)) if hi > lo => bin(c.score() - lo, hi - lo, ns),
            _ => 0,
        };
        [
            bin(c.descriptor.complexity, self.config.complexity_max, nc),
            bin(c.descriptor.diversity, 1.0, nd),
            score,
        ]
    }

    pub fn occupants(&self) -> impl Iterator<Item = (&Cell, &Candidate)> {
        self.occupants.iter()
    }

    pub fn get(&self, cell: &Cell) -> Option<&Candidate> {
        self.occupants.get(cell)
    }

    pub fn len(&self) -> usize {
        self.occupants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupants.is_empty()
    }

    /// All candidates ever inserted, in order.
    pub fn history(&self) -> &[Candidate] {
        &self.history
    }

    fn place(&mut self, c: &Candidate) -> InsertOutcome {
        let cell = self.cell_of(c);
        match self.occupants.get(&cell) {
            Some(old) if old.score() >= c.score() => InsertOutcome {
                cell,
                inserted: false,
                replaced: None,
                rebinned: false,
            },
            old => {
                let replaced = old.map(|o| o.id);
                self.occupants.insert(cell, c.clone());
                InsertOutcome {
                    cell,
                    inserted: true,
                    replaced,
                    rebinned: false,
                }
            }
        }
    }

    fn widen(&mut self, f: f64) -> bool {
        match self.score_range {
            None => {
                self.score_range = Some((f, f));
                false
            }
            Some((lo, hi)) if f >= lo && f <= hi => false,
            Some((lo, hi)) => {
                let (mut nlo, mut nhi) = (lo.min(f), hi.max(f));
                let pad = 0.1
                    * if nhi > nlo {
                        nhi - nlo
                    } else {
                        f.abs().max(1.0)
                    };
                if f < lo {
                    nlo -= pad;
                }
                if f > hi {
                    nhi += pad;
                }
                self.score_range = Some((nlo, nhi));
                true
            }
        }
    }

    /// Failed candidates are ignored.
    pub fn insert(&mut self, c: &Candidate) -> Option<InsertOutcome> {
        let f = c.fitness?;
        let rebinned = self.widen(f);
        self.history.push(c.clone());
        if rebinned {
            self.occupants.clear();
            let history = std::mem::take(&mut self.history);
            for h in &history[..history.len() - 1] {
                self.place(h);
            }
            self.history = history;
        }
        let mut out = self.place(c);
        out.rebinned = rebinned;
        Some(out)
    }
}
