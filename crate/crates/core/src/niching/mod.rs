//! The eight niching strategies behind one common generational interface:
//! deterministic and probabilistic crowding, restricted tournament selection,
//! worst-among-most-similar, enhanced crowding, and the fitness-sharing
//! hybrids of the steady-state methods.

mod crowding;
mod sharing;
mod steady;

pub use crowding::{
    pair_offspring, step_crowding, substitute_dc, substitute_pc, Pairing, SubstitutionRule,
    Survivor,
};
pub use sharing::{shared_fitness, FitnessView};
pub use steady::{make_candidate_rts, reinsert_ec, reinsert_rts, reinsert_wams};

use std::collections::HashSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fitness::{EvaluateGenome, Evaluator, PenaltyTable};
use crate::ga::{init_population, CrossoverKind, Individual, RngStream};

/// The eight algorithms under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algorithm {
    Dc,
    Pc,
    Rts,
    Wams,
    Ec,
    Rtsfs,
    Wamsfs,
    Ecfs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Dc,
        Algorithm::Pc,
        Algorithm::Rts,
        Algorithm::Wams,
        Algorithm::Ec,
        Algorithm::Rtsfs,
        Algorithm::Wamsfs,
        Algorithm::Ecfs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dc => "DC",
            Algorithm::Pc => "PC",
            Algorithm::Rts => "RTS",
            Algorithm::Wams => "WAMS",
            Algorithm::Ec => "EC",
            Algorithm::Rtsfs => "RTSFS",
            Algorithm::Wamsfs => "WAMSFS",
            Algorithm::Ecfs => "ECFS",
        }
    }

    /// Whole-population generational methods, as opposed to steady state.
    pub fn is_population(self) -> bool {
        matches!(self, Algorithm::Dc | Algorithm::Pc)
    }

    pub fn uses_sharing(self) -> bool {
        matches!(self, Algorithm::Rtsfs | Algorithm::Wamsfs | Algorithm::Ecfs)
    }

    /// The steady-state reinsertion scheme behind an FS hybrid.
    pub fn base(self) -> Algorithm {
        match self {
            Algorithm::Rtsfs => Algorithm::Rts,
            Algorithm::Wamsfs => Algorithm::Wams,
            Algorithm::Ecfs => Algorithm::Ec,
            other => other,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full parameterization of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub population_size: usize,
    /// Generations for population methods; steps for steady-state methods.
    pub generations: usize,
    /// Per-bit flip probability; `None` means `1 / genome_len`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default)]
    pub crossover: CrossoverKind,
    #[serde(default = "default_init_density")]
    pub init_density: f64,
    /// RTS window size and WAMS/EC subgroup size.
    #[serde(default = "default_window_n")]
    pub window_n: usize,
    /// Hamming niche radius for FS hybrids; `None` means
    /// `ceil(genome_len / 10)`, 0 disables sharing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharing_radius: Option<usize>,
    /// Restore the non-competitive replacement of the original WAMS.
    #[serde(default)]
    pub wams_force_replace: bool,
    pub seed: u64,
}

fn default_init_density() -> f64 {
    0.5
}

fn default_window_n() -> usize {
    10
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            population_size: 100,
            generations: if algorithm.is_population() { 200 } else { 10_000 },
            mutation_rate: None,
            crossover: CrossoverKind::default(),
            init_density: default_init_density(),
            window_n: default_window_n(),
            sharing_radius: None,
            wams_force_replace: false,
            seed,
        }
    }

    pub fn validate(&self, genome_len: usize) -> Result<()> {
        let algo = self.algorithm.name();
        if self.population_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "population_size must be at least 2 for algorithm {algo}"
            )));
        }
        if self.algorithm.is_population() && !self.population_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "population_size must be even for crowding algorithm {algo} (full pairing), got {}",
                self.population_size
            )));
        }
        if !self.algorithm.is_population() {
            if self.window_n == 0 {
                return Err(Error::InvalidConfig(format!(
                    "window_n must be at least 1 for algorithm {algo}"
                )));
            }
            if self.window_n > self.population_size {
                return Err(Error::InvalidConfig(format!(
                    "window_n ({}) exceeds population_size ({}) for algorithm {algo}",
                    self.window_n, self.population_size
                )));
            }
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::InvalidConfig(format!(
                    "mutation_rate must lie in [0, 1], got {rate}"
                )));
            }
        }
        if !(self.init_density > 0.0 && self.init_density < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "init_density must lie in (0, 1), got {}",
                self.init_density
            )));
        }
        if let Some(radius) = self.sharing_radius {
            if radius > genome_len {
                return Err(Error::InvalidConfig(format!(
                    "sharing_radius ({radius}) exceeds genome length ({genome_len})"
                )));
            }
        }
        Ok(())
    }

    pub fn resolved_mutation_rate(&self, genome_len: usize) -> f64 {
        self.mutation_rate
            .unwrap_or(1.0 / genome_len.max(1) as f64)
    }

    pub fn resolved_sharing_radius(&self, genome_len: usize) -> usize {
        self.sharing_radius.unwrap_or(genome_len.div_ceil(10))
    }
}

/// Per-generation population statistics. Steady-state methods record one
/// entry every `population_size` steps so histories are comparable across
/// architectures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenStats {
    pub generation: usize,
    pub best_f: f64,
    pub mean_f: f64,
    pub distinct: usize,
}

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub final_population: Vec<Individual>,
    pub history: Vec<GenStats>,
    pub wall_clock_seconds: f64,
    pub evaluations: u64,
}

pub fn population_stats(generation: usize, pop: &[Individual]) -> GenStats {
    let best_f = pop.iter().map(|i| i.fitness.f).fold(f64::INFINITY, f64::min);
    let mean_f = pop.iter().map(|i| i.fitness.f).sum::<f64>() / pop.len() as f64;
    let distinct = pop.iter().map(|i| &i.genome).collect::<HashSet<_>>().len();
    GenStats {
        generation,
        best_f,
        mean_f,
        distinct,
    }
}

/// Run the configured algorithm to completion. Fully deterministic per seed;
/// wall-clock covers only the evolutionary loop.
pub fn run(dataset: &Dataset, table: &PenaltyTable, cfg: &AlgorithmConfig) -> Result<RunResult> {
    let genome_len = dataset.n_variables();
    cfg.validate(genome_len)?;
    if table.len() != genome_len {
        return Err(Error::DimensionMismatch {
            context: "penalty table length",
            expected: genome_len,
            found: table.len(),
        });
    }

    let mutation_rate = cfg.resolved_mutation_rate(genome_len);
    let mut rng = RngStream::from_seed(cfg.seed);
    let mut evaluator = Evaluator::new(dataset, table);
    let start = Instant::now();

    let genomes = init_population(cfg.population_size, genome_len, cfg.init_density, &mut rng);
    let mut pop = evaluator.individuals(genomes);
    let mut history = Vec::new();

    if cfg.algorithm.is_population() {
        let rule = match cfg.algorithm {
            Algorithm::Dc => SubstitutionRule::Deterministic,
            Algorithm::Pc => SubstitutionRule::Probabilistic,
            _ => unreachable!(),
        };
        for generation in 1..=cfg.generations {
            step_crowding(
                &mut pop,
                cfg.crossover,
                mutation_rate,
                rule,
                &mut rng,
                &mut evaluator,
            );
            history.push(population_stats(generation, &pop));
        }
    } else {
        let radius = cfg.resolved_sharing_radius(genome_len);
        let view = if cfg.algorithm.uses_sharing() && radius > 0 {
            FitnessView::Shared { radius }
        } else {
            FitnessView::Raw
        };
        for step in 1..=cfg.generations {
            let candidate = make_candidate_rts(
                &pop,
                cfg.crossover,
                mutation_rate,
                &view,
                &mut rng,
                &mut evaluator,
            );
            match cfg.algorithm.base() {
                Algorithm::Rts => reinsert_rts(&mut pop, candidate, cfg.window_n, &view, &mut rng),
                Algorithm::Wams => reinsert_wams(
                    &mut pop,
                    candidate,
                    cfg.window_n,
                    cfg.wams_force_replace,
                    &view,
                    &mut rng,
                ),
                Algorithm::Ec => reinsert_ec(&mut pop, candidate, cfg.window_n, &view, &mut rng),
                _ => unreachable!(),
            }
            if step % cfg.population_size == 0 {
                history.push(population_stats(step, &pop));
            }
        }
    }

    Ok(RunResult {
        algorithm: cfg.algorithm,
        seed: cfg.seed,
        final_population: pop,
        history,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        evaluations: evaluator.evaluations(),
    })
}
