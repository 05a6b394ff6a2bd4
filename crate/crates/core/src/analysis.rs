//! Post-run population analytics: variable classification, test-set error
//! statistics, niche structure, cross-algorithm variable maps, and the CSV
//! tables the harness emits.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, VariableMeta};
use crate::error::{Error, Result};
use crate::ga::{hamming, Genome, Individual};
use crate::niching::GenStats;
use crate::regression;

/// Importance class of one variable in a final population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarClass {
    /// Selected by at least 95% of the final population.
    Critical,
    /// Selected by at least 5% and less than 95%.
    NonCritical,
    /// Selected by less than 5%.
    Irrelevant,
}

impl VarClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VarClass::Critical => "critical",
            VarClass::NonCritical => "non_critical",
            VarClass::Irrelevant => "irrelevant",
        }
    }
}

/// Per-variable selection frequency and class over a final population.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableClassification {
    pub frequencies: Vec<f64>,
    pub classes: Vec<VarClass>,
}

impl VariableClassification {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn count(&self, class: VarClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Indices classified as `class`.
    pub fn indices(&self, class: VarClass) -> Vec<usize> {
        self.classes
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == class).then_some(i))
            .collect()
    }
}

/// Classify every variable by its selection frequency in the final
/// population. The 95%/5% thresholds are applied with exact integer
/// arithmetic: critical iff `20 * count >= 19 * n`, irrelevant iff
/// `20 * count < n`.
pub fn classify_variables(final_pop: &[Individual]) -> Result<VariableClassification> {
    if final_pop.is_empty() {
        return Err(Error::EmptyInput("classify_variables on empty population"));
    }
    let n = final_pop.len();
    let genome_len = final_pop[0].genome.len();
    let mut counts = vec![0usize; genome_len];
    for individual in final_pop {
        for (c, &bit) in counts.iter_mut().zip(individual.genome.bits()) {
            *c += usize::from(bit);
        }
    }
    let frequencies = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let classes = counts
        .iter()
        .map(|&c| {
            if 20 * c >= 19 * n {
                VarClass::Critical
            } else if 20 * c < n {
                VarClass::Irrelevant
            } else {
                VarClass::NonCritical
            }
        })
        .collect();
    Ok(VariableClassification {
        frequencies,
        classes,
    })
}

/// Mean and standard deviation (population convention, divide by N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> ErrorStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ErrorStats {
        mean,
        std: var.sqrt(),
    }
}

/// Refit each distinct genome on the training rows and score RMSE on the
/// held-out test rows; each individual is weighted once.
pub fn error_stats(final_pop: &[Individual], dataset: &Dataset) -> Result<ErrorStats> {
    if final_pop.is_empty() {
        return Err(Error::EmptyInput("error_stats on empty population"));
    }
    if dataset.test_rows().is_empty() {
        return Err(Error::EmptyInput("error_stats needs a non-empty test split"));
    }
    let mut per_genome: HashMap<&Genome, f64> = HashMap::new();
    for individual in final_pop {
        if !per_genome.contains_key(&individual.genome) {
            let rmse = test_rmse(&individual.genome, dataset)?;
            per_genome.insert(&individual.genome, rmse);
        }
    }
    let values: Vec<f64> = final_pop
        .iter()
        .map(|i| per_genome[&i.genome])
        .collect();
    Ok(mean_std(&values))
}

/// Test-set RMSE of one genome (fit on train, score on test).
pub fn test_rmse(genome: &Genome, dataset: &Dataset) -> Result<f64> {
    let cols = genome.selected_indices();
    let train_x = dataset.submatrix(dataset.train_rows(), &cols);
    let train_y = dataset.subvector(dataset.train_rows());
    let model = regression::fit_pseudoinverse(&train_x, &train_y)?;
    let test_x = dataset.submatrix(dataset.test_rows(), &cols);
    let test_y = dataset.subvector(dataset.test_rows());
    let yhat = regression::predict(&model, &test_x)?;
    regression::rmse(&yhat, &test_y)
}

/// Niche structure of a final population.
#[derive(Debug, Clone, PartialEq)]
pub struct NicheCensus {
    /// Niche sizes, sorted descending.
    pub sizes: Vec<usize>,
}

impl NicheCensus {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

/// Group the population into niches: exact duplicates at radius 0, or
/// single-linkage clusters at Hamming distance <= radius otherwise.
pub fn niche_census(final_pop: &[Individual], radius: usize) -> NicheCensus {
    let n = final_pop.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if hamming(&final_pop[i].genome, &final_pop[j].genome) <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        *sizes.entry(root).or_insert(0) += 1;
    }
    let mut sizes: Vec<usize> = sizes.into_values().collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    NicheCensus { sizes }
}

/// Number of distinct genomes (niche census at radius 0).
pub fn distinct_genomes(final_pop: &[Individual]) -> usize {
    final_pop
        .iter()
        .map(|i| &i.genome)
        .collect::<std::collections::HashSet<_>>()
        .len()
}

/// Three-way cell of the cross-algorithm variable map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapCell {
    Critical,
    NonCritical,
    Unselected,
}

impl MapCell {
    pub fn as_str(self) -> &'static str {
        match self {
            MapCell::Critical => "critical",
            MapCell::NonCritical => "non_critical",
            MapCell::Unselected => "unselected",
        }
    }
}

/// Algorithms x variables map of critical / non-critical / unselected.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    pub algorithms: Vec<String>,
    pub cells: Vec<Vec<MapCell>>,
}

/// Combine per-algorithm classifications into the selection map.
pub fn variable_map(entries: &[(String, VariableClassification)]) -> Result<VariableMap> {
    if entries.is_empty() {
        return Err(Error::EmptyInput("variable_map needs at least one algorithm"));
    }
    let len = entries[0].1.len();
    for (name, classification) in entries {
        if classification.len() != len {
            return Err(Error::DimensionMismatch {
                context: "variable_map classification length",
                expected: len,
                found: classification.len(),
            });
        }
        let _ = name;
    }
    let algorithms = entries.iter().map(|(n, _)| n.clone()).collect();
    let cells = entries
        .iter()
        .map(|(_, c)| {
            c.classes
                .iter()
                .map(|class| match class {
                    VarClass::Critical => MapCell::Critical,
                    VarClass::NonCritical => MapCell::NonCritical,
                    VarClass::Irrelevant => MapCell::Unselected,
                })
                .collect()
        })
        .collect();
    Ok(VariableMap { algorithms, cells })
}

/// One aggregated row of the comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub algorithm: String,
    pub mean_rmse: f64,
    pub std_rmse: f64,
    pub critical: f64,
    pub non_critical: f64,
    pub avg_selected: f64,
    pub distinct: f64,
    pub seconds: f64,
}

/// Mean number of selected variables over the final population.
pub fn mean_selected(final_pop: &[Individual]) -> f64 {
    final_pop
        .iter()
        .map(|i| i.genome.count_ones() as f64)
        .sum::<f64>()
        / final_pop.len() as f64
}

// --- CSV emission -----------------------------------------------------------

pub fn write_comparison_csv(path: &Path, rows: &[ComparisonRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "algorithm",
        "mean_rmse",
        "std_rmse",
        "critical",
        "non_critical",
        "avg_selected",
        "distinct",
        "seconds",
    ])
    .map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record([
            row.algorithm.clone(),
            fmt(row.mean_rmse),
            fmt(row.std_rmse),
            fmt(row.critical),
            fmt(row.non_critical),
            fmt(row.avg_selected),
            fmt(row.distinct),
            fmt(row.seconds),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_history_csv(path: &Path, history: &[GenStats]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["generation", "best_f", "mean_f", "distinct"])
        .map_err(|e| csv_err(path, e))?;
    for s in history {
        w.write_record([
            s.generation.to_string(),
            fmt(s.best_f),
            fmt(s.mean_f),
            s.distinct.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_classification_csv(
    path: &Path,
    classification: &VariableClassification,
    meta: &[VariableMeta],
) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "variable",
        "station_id",
        "quantity",
        "day",
        "frequency",
        "class",
    ])
    .map_err(|e| csv_err(path, e))?;
    for (i, (freq, class)) in classification
        .frequencies
        .iter()
        .zip(&classification.classes)
        .enumerate()
    {
        let m = &meta[i];
        w.write_record([
            i.to_string(),
            m.station_id.clone(),
            m.quantity.clone(),
            m.day.to_string(),
            fmt(*freq),
            class.as_str().to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_variable_map_csv(path: &Path, map: &VariableMap) -> Result<()> {
    let mut w = csv_writer(path)?;
    let n_vars = map.cells.first().map_or(0, Vec::len);
    let mut header = vec!["algorithm".to_string()];
    header.extend((0..n_vars).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (name, row) in map.algorithms.iter().zip(&map.cells) {
        let mut record = vec![name.clone()];
        record.extend(row.iter().map(|c| c.as_str().to_string()));
        w.write_record(&record).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn write_population_csv(path: &Path, pop: &[Individual]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["genome", "f", "f_max", "rmse", "r", "pen", "n_selected"])
        .map_err(|e| csv_err(path, e))?;
    for i in pop {
        w.write_record([
            i.genome.to_string01(),
            fmt(i.fitness.f),
            fmt(i.fitness.f_max),
            fmt(i.fitness.rmse),
            fmt(i.fitness.r),
            fmt(i.fitness.pen),
            i.fitness.n_selected.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

fn fmt(v: f64) -> String {
    // full round-trip precision so reports re-parse losslessly
    format!("{v:?}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    Ok(csv::Writer::from_writer(std::io::BufWriter::new(file)))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        source: e,
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}
