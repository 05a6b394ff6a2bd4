//! Genome evaluation: fit a pseudo-inverse regression on the training rows
//! restricted to the selected columns, then combine training RMSE, linear
//! correlation, and the station-distance penalty into the objective
//! `F = (RMSE / R) * (1 + weight * Pen)`, minimized by the algorithms.
//!
//! Replacement rules work on the maximizing transform `f_max = 1 / F`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::ga::{Genome, Individual};
use crate::regression;

/// Multiplier of the distance penalty inside `F`.
pub const PENALTY_WEIGHT: f64 = 1.5;

/// Worst-case objective assigned to degenerate evaluations
/// (non-finite RMSE, undefined or near-zero correlation).
pub const F_CEIL: f64 = 1e9;

/// RMSE below this is clamped so `F` stays positive and `f_max` finite.
pub const RMSE_FLOOR: f64 = 1e-9;

/// Correlations at or below this are treated as degenerate; dividing by a
/// vanishing `R` would corrupt the replacement probabilities.
pub const R_FLOOR: f64 = 0.01;

/// Evaluation result of one genome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitnessRecord {
    /// Minimizing objective.
    pub f: f64,
    /// `1 / f`; the larger-is-better fitness used by replacement rules.
    pub f_max: f64,
    /// Raw training RMSE (unclamped).
    pub rmse: f64,
    /// Training correlation; NaN when undefined (constant prediction).
    pub r: f64,
    /// Distance penalty of the selection.
    pub pen: f64,
    pub n_selected: usize,
}

/// Per-variable normalized station distances `d_i / d_max` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTable {
    normalized: Vec<f64>,
    weight: f64,
}

impl PenaltyTable {
    /// Normalize raw distances by their maximum. All-zero distances yield an
    /// all-zero table (no station differs from the target site).
    pub fn from_distances(distances: &[f64], weight: f64) -> Self {
        let d_max = distances.iter().copied().fold(0.0_f64, f64::max);
        let normalized = if d_max > 0.0 {
            distances.iter().map(|d| d / d_max).collect()
        } else {
            vec![0.0; distances.len()]
        };
        Self { normalized, weight }
    }

    pub fn from_dataset(dataset: &Dataset, weight: f64) -> Self {
        let distances: Vec<f64> = dataset
            .variable_meta()
            .iter()
            .map(|m| m.distance_km)
            .collect();
        Self::from_distances(&distances, weight)
    }

    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// `Pen = sum of d_i / d_max over selected variables`.
pub fn penalization(genome: &Genome, table: &PenaltyTable) -> Result<f64> {
    if genome.len() != table.len() {
        return Err(Error::DimensionMismatch {
            context: "penalization genome length",
            expected: table.len(),
            found: genome.len(),
        });
    }
    Ok(genome
        .bits()
        .iter()
        .zip(table.normalized())
        .filter(|(&b, _)| b)
        .map(|(_, d)| d)
        .sum())
}

/// The objective formula with its degenerate guards. `r` may be NaN for
/// undefined correlation.
pub fn objective(rmse: f64, r: f64, pen: f64, weight: f64) -> f64 {
    if !rmse.is_finite() || !r.is_finite() || r <= R_FLOOR {
        return F_CEIL;
    }
    (rmse.max(RMSE_FLOOR) / r) * (1.0 + weight * pen)
}

/// Evaluate one genome against the dataset's training rows.
pub fn evaluate(genome: &Genome, dataset: &Dataset, table: &PenaltyTable) -> FitnessRecord {
    let mut evaluator = Evaluator::new(dataset, table);
    evaluator.evaluate(genome)
}

/// Anything that can turn a genome into an evaluated individual; the
/// algorithms are generic over this so tests can plant fitness values.
pub trait EvaluateGenome {
    fn individual(&mut self, genome: Genome) -> Individual;

    fn individuals(&mut self, genomes: Vec<Genome>) -> Vec<Individual> {
        genomes.into_iter().map(|g| self.individual(g)).collect()
    }
}

/// Caching evaluator over one dataset and penalty table.
///
/// Identical genomes are frequent near crowding; the cache changes no
/// observable result (evaluation is pure), only runtime. `evaluations()`
/// counts logical requests, cache hits included.
pub struct Evaluator<'a> {
    table: &'a PenaltyTable,
    train_x: DMatrix<f64>,
    train_y: DVector<f64>,
    cache: HashMap<Genome, FitnessRecord>,
    requests: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(dataset: &'a Dataset, table: &'a PenaltyTable) -> Self {
        assert_eq!(
            table.len(),
            dataset.n_variables(),
            "penalty table must cover every dataset variable"
        );
        let all_cols: Vec<usize> = (0..dataset.n_variables()).collect();
        Self {
            table,
            train_x: dataset.submatrix(dataset.train_rows(), &all_cols),
            train_y: dataset.subvector(dataset.train_rows()),
            cache: HashMap::new(),
            requests: 0,
        }
    }

    /// Number of evaluation requests so far (cache hits included).
    pub fn evaluations(&self) -> u64 {
        self.requests
    }

    pub fn evaluate(&mut self, genome: &Genome) -> FitnessRecord {
        assert_eq!(
            genome.len(),
            self.table.len(),
            "genome length must match dataset variable count"
        );
        self.requests += 1;
        if let Some(record) = self.cache.get(genome) {
            return *record;
        }
        let record = self.compute(genome);
        self.cache.insert(genome.clone(), record);
        record
    }

    fn compute(&self, genome: &Genome) -> FitnessRecord {
        let selected = genome.selected_indices();
        let x = self.train_x.select_columns(selected.iter());
        // The fit cannot fail here: rows are nonempty and finite by dataset
        // construction.
        let model = regression::fit_pseudoinverse(&x, &self.train_y)
            .expect("training design is nonempty and finite");
        let yhat = regression::predict(&model, &x).expect("dimensions fixed by construction");
        let rmse = regression::rmse(&yhat, &self.train_y).expect("lengths match");
        let r = regression::corrcoef(&yhat, &self.train_y).unwrap_or(f64::NAN);
        let pen = penalization(genome, self.table).expect("lengths match");
        let f = objective(rmse, r, pen, self.table.weight());
        FitnessRecord {
            f,
            f_max: 1.0 / f,
            rmse,
            r,
            pen,
            n_selected: selected.len(),
        }
    }
}

impl EvaluateGenome for Evaluator<'_> {
    fn individual(&mut self, genome: Genome) -> Individual {
        let fitness = self.evaluate(&genome);
        Individual { genome, fitness }
    }
}
