//! Experiment harness behind the command-line interface: single runs,
//! multi-algorithm comparisons, the crowding-point study, and synthetic
//! dataset export.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    classify_variables, error_stats, mean_selected, mean_std, variable_map,
    write_classification_csv, write_comparison_csv, write_history_csv, write_population_csv,
    write_variable_map_csv, ComparisonRow, ErrorStats, VarClass, VariableClassification,
};
use crate::config::{AlgorithmEntry, ExperimentConfig};
use crate::dataset::{generate_synthetic, Dataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::fitness::PenaltyTable;
use crate::ga::{mix_seed, Individual};
use crate::niching::{self, RunResult};

/// Environment variable naming the default worker count.
pub const WORKERS_ENV: &str = "NICHESEL_WORKERS";

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed_override: Option<u64>,
}

/// Execute every (algorithm, seed) cell and write per-run reports plus the
/// comparison aggregates.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let (cfg, base_dir) = load(config_path, overrides)?;
    let experiment = execute(&cfg, &base_dir)?;
    write_aggregates(&experiment, false)?;
    println!(
        "wrote {} runs to {}",
        experiment.cells.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

/// Run all configured algorithms against the identical dataset and emit the
/// comparison tables (error and dispersion, variable counts, variable map,
/// runtimes).
pub fn cmd_compare(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let (cfg, base_dir) = load(config_path, overrides)?;
    let experiment = execute(&cfg, &base_dir)?;
    write_aggregates(&experiment, true)?;
    print_comparison(&experiment.comparison);
    Ok(())
}

/// Escalate population size and generations along the configured ladder,
/// tracking critical-variable and distinct-genome counts per rung.
pub fn cmd_crowding_study(config_path: &Path, overrides: &Overrides) -> Result<()> {
    let (cfg, base_dir) = load(config_path, overrides)?;
    let study = cfg.crowding_study.clone().ok_or_else(|| {
        Error::InvalidConfig("crowding-study requires a [crowding_study] section".into())
    })?;

    let dataset = cfg.build_dataset(&base_dir)?;
    let table = PenaltyTable::from_dataset(&dataset, cfg.penalty_weight);
    let mut rows: Vec<StudyRow> = Vec::new();
    for (rung_index, rung) in study.rungs.iter().enumerate() {
        let entries: Vec<AlgorithmEntry> = cfg
            .algorithms
            .iter()
            .map(|entry| {
                let mut entry = entry.clone();
                entry.population_size = rung.population_size;
                entry.generations = Some(if entry.algorithm.is_population() {
                    rung.generations
                } else {
                    rung.steady_generations.unwrap_or(rung.generations)
                });
                entry
            })
            .collect();
        let rung_dir = cfg.output_dir.join(format!("rung_{rung_index:02}"));
        let experiment = execute_cells(&cfg, &dataset, &table, &entries, &rung_dir)?;
        write_cell_reports(&dataset, &experiment)?;
        write_aggregates(&experiment, false)?;
        for cell in &experiment.cells {
            rows.push(StudyRow {
                rung: rung_index,
                population_size: rung.population_size,
                generations: entries[cell.entry_index].resolved_generations(),
                algorithm: cell.label.clone(),
                seed: cell.base_seed,
                critical: cell.classification.count(VarClass::Critical),
                non_critical: cell.classification.count(VarClass::NonCritical),
                irrelevant: cell.classification.count(VarClass::Irrelevant),
                distinct: crate::analysis::distinct_genomes(&cell.result.final_population),
                avg_selected: mean_selected(&cell.result.final_population),
                best_f: best_f(&cell.result.final_population),
                seconds: cell.result.wall_clock_seconds,
            });
        }
    }
    write_study_csv(&cfg.output_dir.join("crowding_study.csv"), &rows)?;
    println!(
        "crowding study: {} rungs, {} rows -> {}",
        study.rungs.len(),
        rows.len(),
        cfg.output_dir.display()
    );
    Ok(())
}

/// Generate a synthetic dataset from a spec file and export it as CSV.
pub fn cmd_synth(spec_path: &Path, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(spec_path).map_err(|source| Error::Io {
        path: spec_path.to_path_buf(),
        source,
    })?;
    let spec: SyntheticSpec = toml::from_str(&text).map_err(|e| Error::ConfigParse {
        path: spec_path.to_path_buf(),
        message: e.to_string(),
    })?;
    let dataset = generate_synthetic(&spec)?;
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let data_path = out_dir.join("data.csv");
    let mut w = csv::Writer::from_path(&data_path).map_err(|e| Error::Csv {
        path: data_path.clone(),
        source: e,
    })?;
    let mut header = vec!["y".to_string()];
    header.extend((0..dataset.n_variables()).map(|j| format!("v{j}")));
    w.write_record(&header).map_err(|e| Error::Csv {
        path: data_path.clone(),
        source: e,
    })?;
    for i in 0..dataset.n_samples() {
        let mut record = vec![format!("{:?}", dataset.y()[i])];
        record.extend((0..dataset.n_variables()).map(|j| format!("{:?}", dataset.x()[(i, j)])));
        w.write_record(&record).map_err(|e| Error::Csv {
            path: data_path.clone(),
            source: e,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: data_path.clone(),
        source,
    })?;

    let vars_path = out_dir.join("variables.csv");
    let mut w = csv::Writer::from_path(&vars_path).map_err(|e| Error::Csv {
        path: vars_path.clone(),
        source: e,
    })?;
    w.write_record(["variable", "station_id", "quantity", "day", "distance_km"])
        .map_err(|e| Error::Csv {
            path: vars_path.clone(),
            source: e,
        })?;
    for (j, m) in dataset.variable_meta().iter().enumerate() {
        w.write_record([
            j.to_string(),
            m.station_id.clone(),
            m.quantity.clone(),
            m.day.to_string(),
            format!("{:?}", m.distance_km),
        ])
        .map_err(|e| Error::Csv {
            path: vars_path.clone(),
            source: e,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: vars_path.clone(),
        source,
    })?;

    let truth_path = out_dir.join("truth.csv");
    let mut w = csv::Writer::from_path(&truth_path).map_err(|e| Error::Csv {
        path: truth_path.clone(),
        source: e,
    })?;
    w.write_record(["variable", "in_support", "duplicate_group"])
        .map_err(|e| Error::Csv {
            path: truth_path.clone(),
            source: e,
        })?;
    for j in 0..dataset.n_variables() {
        let group = spec
            .duplicate_groups
            .iter()
            .position(|g| g.contains(&j))
            .map_or(String::new(), |g| g.to_string());
        w.write_record([
            j.to_string(),
            spec.true_support.contains(&j).to_string(),
            group,
        ])
        .map_err(|e| Error::Csv {
            path: truth_path.clone(),
            source: e,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: truth_path.clone(),
        source,
    })?;

    println!(
        "synthetic dataset: {} samples x {} variables (checksum {:016x}) -> {}",
        dataset.n_samples(),
        dataset.n_variables(),
        dataset.checksum(),
        out_dir.display()
    );
    Ok(())
}

// --- engine ------------------------------------------------------------------

/// One finished (algorithm, seed) cell.
pub struct CellOutcome {
    pub label: String,
    pub entry_index: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,
    pub result: RunResult,
    pub classification: VariableClassification,
    pub test_stats: ErrorStats,
    pub dataset_checksum: u64,
}

pub struct Experiment {
    pub cells: Vec<CellOutcome>,
    pub comparison: Vec<ComparisonRow>,
    pub labels: Vec<String>,
    pub output_dir: PathBuf,
}

fn load(config_path: &Path, overrides: &Overrides) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(out) = &overrides.out {
        cfg.output_dir = out.clone();
    }
    if let Some(workers) = overrides.workers {
        cfg.workers = Some(workers);
    }
    if let Some(seed) = overrides.seed_override {
        cfg.seeds = vec![seed];
    }
    cfg.validate()?;
    let base_dir = config_path
        .parent()
        .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
    Ok((cfg, base_dir))
}

fn resolved_workers(cfg: &ExperimentConfig) -> usize {
    cfg.workers
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&v| v > 0)
        })
        .unwrap_or(0) // 0 lets the pool pick the core count
}

fn execute(cfg: &ExperimentConfig, base_dir: &Path) -> Result<Experiment> {
    let dataset = cfg.build_dataset(base_dir)?;
    let table = PenaltyTable::from_dataset(&dataset, cfg.penalty_weight);
    let experiment = execute_cells(cfg, &dataset, &table, &cfg.algorithms, &cfg.output_dir)?;
    write_cell_reports(&dataset, &experiment)?;
    Ok(experiment)
}

/// Unique per-entry directory labels; duplicate algorithm names get an
/// index suffix.
fn entry_labels(entries: &[AlgorithmEntry]) -> Vec<String> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for entry in entries {
        *counts.entry(entry.algorithm.name()).or_insert(0) += 1;
    }
    entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let name = entry.algorithm.name();
            if counts[name] > 1 {
                format!("{name}_{i}")
            } else {
                name.to_string()
            }
        })
        .collect()
}

fn execute_cells(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    table: &PenaltyTable,
    entries: &[AlgorithmEntry],
    output_dir: &Path,
) -> Result<Experiment> {
    let labels = entry_labels(entries);
    let checksum = dataset.checksum();
    let cells: Vec<(usize, u64)> = entries
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(resolved_workers(cfg))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    // Each cell gets an independent stream derived from (seed, algorithm
    // label); no RNG state is shared between algorithms.
    let outcomes: Result<Vec<CellOutcome>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(entry_index, base_seed)| {
                let entry = &entries[entry_index];
                let label = labels[entry_index].clone();
                let run_cfg = entry.to_algorithm_config(mix_seed(base_seed, &label));
                let result = niching::run(dataset, table, &run_cfg)?;
                let classification = classify_variables(&result.final_population)?;
                let test_stats = error_stats(&result.final_population, dataset)?;
                Ok(CellOutcome {
                    label: label.clone(),
                    entry_index,
                    base_seed,
                    out_dir: output_dir.join(&label).join(base_seed.to_string()),
                    result,
                    classification,
                    test_stats,
                    dataset_checksum: checksum,
                })
            })
            .collect()
    });
    let cells = outcomes?;

    let comparison = aggregate_comparison(&labels, &cells);
    Ok(Experiment {
        cells,
        comparison,
        labels,
        output_dir: output_dir.to_path_buf(),
    })
}

fn best_f(pop: &[Individual]) -> f64 {
    pop.iter().map(|i| i.fitness.f).fold(f64::INFINITY, f64::min)
}

fn aggregate_comparison(labels: &[String], cells: &[CellOutcome]) -> Vec<ComparisonRow> {
    labels
        .iter()
        .enumerate()
        .map(|(entry_index, label)| {
            let of_entry: Vec<&CellOutcome> =
                cells.iter().filter(|c| c.entry_index == entry_index).collect();
            let n = of_entry.len() as f64;
            ComparisonRow {
                algorithm: label.clone(),
                mean_rmse: of_entry.iter().map(|c| c.test_stats.mean).sum::<f64>() / n,
                std_rmse: of_entry.iter().map(|c| c.test_stats.std).sum::<f64>() / n,
                critical: of_entry
                    .iter()
                    .map(|c| c.classification.count(VarClass::Critical) as f64)
                    .sum::<f64>()
                    / n,
                non_critical: of_entry
                    .iter()
                    .map(|c| c.classification.count(VarClass::NonCritical) as f64)
                    .sum::<f64>()
                    / n,
                avg_selected: of_entry
                    .iter()
                    .map(|c| mean_selected(&c.result.final_population))
                    .sum::<f64>()
                    / n,
                distinct: of_entry
                    .iter()
                    .map(|c| crate::analysis::distinct_genomes(&c.result.final_population) as f64)
                    .sum::<f64>()
                    / n,
                seconds: of_entry
                    .iter()
                    .map(|c| c.result.wall_clock_seconds)
                    .sum::<f64>()
                    / n,
            }
        })
        .collect()
}

fn write_cell_reports(dataset: &Dataset, experiment: &Experiment) -> Result<()> {
    for cell in &experiment.cells {
        std::fs::create_dir_all(&cell.out_dir).map_err(|source| Error::Io {
            path: cell.out_dir.clone(),
            source,
        })?;
        write_summary_csv(&cell.out_dir.join("summary.csv"), cell)?;
        write_history_csv(&cell.out_dir.join("history.csv"), &cell.result.history)?;
        write_classification_csv(
            &cell.out_dir.join("classification.csv"),
            &cell.classification,
            dataset.variable_meta(),
        )?;
        write_population_csv(
            &cell.out_dir.join("population.csv"),
            &cell.result.final_population,
        )?;
    }
    Ok(())
}

fn write_aggregates(experiment: &Experiment, with_dispersion: bool) -> Result<()> {
    write_comparison_csv(
        &experiment.output_dir.join("comparison.csv"),
        &experiment.comparison,
    )?;

    // pooled classification per algorithm for the variable map
    let mut entries: Vec<(String, VariableClassification)> = Vec::new();
    for (entry_index, label) in experiment.labels.iter().enumerate() {
        let pooled: Vec<Individual> = experiment
            .cells
            .iter()
            .filter(|c| c.entry_index == entry_index)
            .flat_map(|c| c.result.final_population.iter().cloned())
            .collect();
        entries.push((label.clone(), classify_variables(&pooled)?));
    }
    let map = variable_map(&entries)?;
    write_variable_map_csv(&experiment.output_dir.join("variable_map.csv"), &map)?;

    if with_dispersion {
        write_dispersion_csv(experiment)?;
    }
    Ok(())
}

/// Both dispersion readings: within-population std averaged over seeds, and
/// the across-seed std of the per-seed mean RMSE.
fn write_dispersion_csv(experiment: &Experiment) -> Result<()> {
    let path = experiment.output_dir.join("dispersion.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::Csv {
        path: path.clone(),
        source: e,
    })?;
    w.write_record(["algorithm", "within_population_std", "across_seed_std"])
        .map_err(|e| Error::Csv {
            path: path.clone(),
            source: e,
        })?;
    for (entry_index, label) in experiment.labels.iter().enumerate() {
        let of_entry: Vec<&CellOutcome> = experiment
            .cells
            .iter()
            .filter(|c| c.entry_index == entry_index)
            .collect();
        let within = of_entry.iter().map(|c| c.test_stats.std).sum::<f64>()
            / of_entry.len() as f64;
        let means: Vec<f64> = of_entry.iter().map(|c| c.test_stats.mean).collect();
        let across = mean_std(&means).std;
        w.write_record([label.clone(), format!("{within:?}"), format!("{across:?}")])
            .map_err(|e| Error::Csv {
                path: path.clone(),
                source: e,
            })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(())
}

fn write_summary_csv(path: &Path, cell: &CellOutcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.write_record([
        "algorithm",
        "seed",
        "best_f",
        "mean_test_rmse",
        "std_test_rmse",
        "critical",
        "non_critical",
        "irrelevant",
        "distinct",
        "avg_selected",
        "evaluations",
        "seconds",
        "dataset_checksum",
    ])
    .map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.write_record([
        cell.label.clone(),
        cell.base_seed.to_string(),
        format!("{:?}", best_f(&cell.result.final_population)),
        format!("{:?}", cell.test_stats.mean),
        format!("{:?}", cell.test_stats.std),
        cell.classification.count(VarClass::Critical).to_string(),
        cell.classification.count(VarClass::NonCritical).to_string(),
        cell.classification.count(VarClass::Irrelevant).to_string(),
        crate::analysis::distinct_genomes(&cell.result.final_population).to_string(),
        format!("{:?}", mean_selected(&cell.result.final_population)),
        cell.result.evaluations.to_string(),
        format!("{:?}", cell.result.wall_clock_seconds),
        format!("{:016x}", cell.dataset_checksum),
    ])
    .map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

#[derive(Debug)]
struct StudyRow {
    rung: usize,
    population_size: usize,
    generations: usize,
    algorithm: String,
    seed: u64,
    critical: usize,
    non_critical: usize,
    irrelevant: usize,
    distinct: usize,
    avg_selected: f64,
    best_f: f64,
    seconds: f64,
}

fn write_study_csv(path: &Path, rows: &[StudyRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.write_record([
        "rung",
        "population_size",
        "generations",
        "algorithm",
        "seed",
        "critical",
        "non_critical",
        "irrelevant",
        "distinct",
        "avg_selected",
        "best_f",
        "seconds",
    ])
    .map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    for r in rows {
        w.write_record([
            r.rung.to_string(),
            r.population_size.to_string(),
            r.generations.to_string(),
            r.algorithm.clone(),
            r.seed.to_string(),
            r.critical.to_string(),
            r.non_critical.to_string(),
            r.irrelevant.to_string(),
            r.distinct.to_string(),
            format!("{:?}", r.avg_selected),
            format!("{:?}", r.best_f),
            format!("{:?}", r.seconds),
        ])
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn print_comparison(rows: &[ComparisonRow]) {
    println!(
        "{:<10} {:>12} {:>12} {:>9} {:>13} {:>13} {:>9} {:>9}",
        "algorithm", "mean_rmse", "std_rmse", "critical", "non_critical", "avg_selected", "distinct", "seconds"
    );
    for r in rows {
        println!(
            "{:<10} {:>12.5} {:>12.5} {:>9.1} {:>13.1} {:>13.1} {:>9.1} {:>9.2}",
            r.algorithm,
            r.mean_rmse,
            r.std_rmse,
            r.critical,
            r.non_critical,
            r.avg_selected,
            r.distinct,
            r.seconds
        );
    }
}
