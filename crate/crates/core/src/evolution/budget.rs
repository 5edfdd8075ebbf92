use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::genome::Genome;

static NAME: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[A-Z][A-Z0-9_]*$").unwrap());
/// Module-level `NAME = ...` or `NAME: type = ...` assignments.
static ASSIGN: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?m)^(?:pub\s+)?(?:const\s+|static\s+)?([A-Z][A-Z0-9_]*)\s*(?::[^=\n]*)?=[^=]")
        .unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConfig {
    pub cap: usize,
    /// Fraction of |fitness| subtracted on violation.
    pub haircut: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            cap: 18,
            haircut: 0.5,
        }
    }
}

impl BudgetConfig {
    /// `f - haircut·|f|`: halves a profit, and makes a loss worse.
    pub fn penalize(&self, fitness: f64) -> f64 {
        fitness - self.haircut * fitness.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetCheck {
    Ok(usize),
    Violation(usize),
}

impl BudgetCheck {
    pub fn count(self) -> usize {
        match self {
            BudgetCheck::Ok(n) | BudgetCheck::Violation(n) => n,
        }
    }

    pub fn is_violation(self) -> bool {
        matches!(self, BudgetCheck::Violation(_))
    }
}

pub fn count_genome_params(genome: &Genome) -> usize {
    genome.keys().filter(|k| NAME.is_match(k)).count()
}

/// Distinct UPPER_CASE names assigned at the start of a line.
pub fn count_text_params(text: &str) -> usize {
    ASSIGN
        .captures_iter(text)
        .map(|c| c.get(1).unwrap().as_str())
        .collect::<BTreeSet<_>>()
        .len()
}

/// Counts program text when present, genome keys otherwise.
pub fn check_budget(genome: &Genome, program: Option<&str>, config: &BudgetConfig) -> BudgetCheck {
    let n = program.map_or_else(|| count_genome_params(genome), count_text_params);
    if n > config.cap {
        BudgetCheck::Violation(n)
    } else {
        BudgetCheck::Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::StrategyParams;

    #[test]
    fn baseline_within_cap() {
        let g = StrategyParams::default().to_genome();
        assert_eq!(
            check_budget(&g, None, &BudgetConfig::default()),
            BudgetCheck::Ok(11)
        );
        assert_eq!(
            check_budget(&Genome::new(), None, &BudgetConfig::default()),
            BudgetCheck::Ok(0)
        );
    }

    #[test]
    fn nineteen_keys_violate() {
        let g: Genome = (0..19).map(|i| (format!("P_{i}"), 1.0)).collect();
        assert_eq!(
            check_budget(&g, None, &BudgetConfig::default()),
            BudgetCheck::Violation(19)
        );
        let lower: Genome = [("lower_case", 1.0)].into_iter().collect();
        assert_eq!(count_genome_params(&lower), 0);
    }

    #[test]
    fn text_counting() {
        let src = "ZP = 1e-4\nSIZING_FACTOR: float = 7000\npub const Q_MAX: f64 = 1e6;\n  INDENTED = 3\nZP = 2e-4\nX == Y\nlower = 1\n";
        assert_eq!(count_text_params(src), 3);
    }

    #[test]
    fn penalty() {
        let b = BudgetConfig::default();
        assert_eq!(b.penalize(100.0), 50.0);
        assert_eq!(b.penalize(-100.0), -150.0);
    }
}
