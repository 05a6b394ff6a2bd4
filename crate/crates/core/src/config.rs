//! Experiment configuration: a diff-friendly TOML schema with validation and
//! explicit defaults.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{
    build_lagged_dataset_with, generate_synthetic, load_station_csv, Dataset, ExtraColumn,
    LagLayout, StationSeries, SyntheticSpec, QUANTITIES, RADIATION,
};
use crate::error::{Error, Result};
use crate::ga::CrossoverKind;
use crate::niching::{Algorithm, AlgorithmConfig};

/// Top-level experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_penalty_weight")]
    pub penalty_weight: f64,
    pub data: DataConfig,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crowding_study: Option<CrowdingStudy>,
}

fn default_penalty_weight() -> f64 {
    crate::fitness::PENALTY_WEIGHT
}

/// Exactly one data source must be configured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stations: Option<StationsConfig>,
}

/// Station-CSV data source and lag-expansion layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationsConfig {
    /// Directory holding the station CSVs, relative to the config file.
    pub dir: PathBuf,
    pub target_station: String,
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub stations: Vec<StationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endogenous_lags: Option<usize>,
    /// Quantities expanded for every station; defaults to every non-target
    /// quantity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exogenous_quantities: Option<Vec<String>>,
    #[serde(default = "default_true")]
    pub include_day_of_year: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_columns: Vec<ExtraColumn>,
}

fn default_lags() -> usize {
    4
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_true() -> bool {
    true
}

impl StationsConfig {
    pub fn layout(&self) -> LagLayout {
        LagLayout {
            lags: self.lags,
            endogenous_lags: self.endogenous_lags.unwrap_or(self.lags),
            exogenous_quantities: self.exogenous_quantities.clone().unwrap_or_else(|| {
                QUANTITIES
                    .iter()
                    .filter(|&&q| q != RADIATION)
                    .map(|q| q.to_string())
                    .collect()
            }),
            include_day_of_year: self.include_day_of_year,
            extra_columns: self.extra_columns.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationEntry {
    pub id: String,
    pub file: String,
    pub distance_km: f64,
}

/// One algorithm of the comparison, with per-algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub algorithm: Algorithm,
    #[serde(default = "default_population_size")]
    pub population_size: usize,
    /// Defaults to 200 for population methods, 10000 steps for steady state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    #[serde(default)]
    pub crossover: CrossoverKind,
    #[serde(default = "default_init_density")]
    pub init_density: f64,
    #[serde(default = "default_window_n")]
    pub window_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sharing_radius: Option<usize>,
    #[serde(default)]
    pub wams_force_replace: bool,
}

fn default_population_size() -> usize {
    100
}

fn default_init_density() -> f64 {
    0.5
}

fn default_window_n() -> usize {
    10
}

impl AlgorithmEntry {
    pub fn resolved_generations(&self) -> usize {
        self.generations.unwrap_or(if self.algorithm.is_population() {
            200
        } else {
            10_000
        })
    }

    /// Concrete run configuration for one seed.
    pub fn to_algorithm_config(&self, seed: u64) -> AlgorithmConfig {
        AlgorithmConfig {
            algorithm: self.algorithm,
            population_size: self.population_size,
            generations: self.resolved_generations(),
            mutation_rate: self.mutation_rate,
            crossover: self.crossover,
            init_density: self.init_density,
            window_n: self.window_n,
            sharing_radius: self.sharing_radius,
            wams_force_replace: self.wams_force_replace,
            seed,
        }
    }
}

/// Escalation ladder for the crowding-point study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrowdingStudy {
    pub rungs: Vec<Rung>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rung {
    pub population_size: usize,
    pub generations: usize,
    /// Step count for steady-state methods on this rung; defaults to
    /// `generations`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_generations: Option<usize>,
}

impl ExperimentConfig {
    /// Parse, apply defaults, and validate a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::ConfigParse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        cfg.apply_defaults();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Make derivable defaults explicit so the emitted effective config
    /// round-trips identically.
    pub fn apply_defaults(&mut self) {
        for entry in &mut self.algorithms {
            entry.generations = Some(entry.resolved_generations());
        }
    }

    /// Serialize the effective config back to TOML.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::InvalidConfig(format!("config serialization failed: {e}")))
    }

    /// Genome length implied by the data source.
    pub fn genome_len(&self) -> usize {
        match (&self.data.synthetic, &self.data.stations) {
            (Some(spec), _) => spec.n_variables,
            (_, Some(stations)) => stations.layout().column_count(stations.stations.len()),
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must not be empty".into()));
        }
        if self.seeds.iter().collect::<HashSet<_>>().len() != self.seeds.len() {
            return Err(Error::InvalidConfig("seeds must be distinct".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one [[algorithms]] entry is required".into(),
            ));
        }
        if !(self.penalty_weight.is_finite() && self.penalty_weight >= 0.0) {
            return Err(Error::InvalidConfig(
                "penalty_weight must be a nonnegative real".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }

        match (&self.data.synthetic, &self.data.stations) {
            (Some(spec), None) => spec.validate()?,
            (None, Some(stations)) => {
                if stations.stations.is_empty() {
                    return Err(Error::InvalidConfig(
                        "data.stations.stations must not be empty".into(),
                    ));
                }
                if !stations
                    .stations
                    .iter()
                    .any(|s| s.id == stations.target_station)
                {
                    return Err(Error::InvalidConfig(format!(
                        "target_station `{}` is not among the configured stations",
                        stations.target_station
                    )));
                }
                if !(stations.train_fraction > 0.0 && stations.train_fraction < 1.0) {
                    return Err(Error::InvalidConfig(
                        "data.stations.train_fraction must lie in (0, 1)".into(),
                    ));
                }
            }
            (Some(_), Some(_)) => {
                return Err(Error::InvalidConfig(
                    "configure exactly one of data.synthetic and data.stations, not both".into(),
                ));
            }
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "one of data.synthetic or data.stations is required".into(),
                ));
            }
        }

        let genome_len = self.genome_len();
        for (entry_index, entry) in self.algorithms.iter().enumerate() {
            entry
                .to_algorithm_config(0)
                .validate(genome_len)
                .map_err(|e| {
                    Error::InvalidConfig(format!("algorithms[{entry_index}]: {e}"))
                })?;
        }

        if let Some(study) = &self.crowding_study {
            if study.rungs.is_empty() {
                return Err(Error::InvalidConfig(
                    "crowding_study.rungs must not be empty".into(),
                ));
            }
            for (rung_index, rung) in study.rungs.iter().enumerate() {
                for entry in &self.algorithms {
                    let mut cfg = entry.to_algorithm_config(0);
                    cfg.population_size = rung.population_size;
                    cfg.generations = rung.generations;
                    cfg.validate(genome_len).map_err(|e| {
                        Error::InvalidConfig(format!(
                            "crowding_study.rungs[{rung_index}] with algorithm {}: {e}",
                            entry.algorithm
                        ))
                    })?;
                }
            }
        }
        Ok(())
    }

    /// Materialize the configured data source. Station files resolve
    /// relative to `base_dir` (normally the config file's directory).
    pub fn build_dataset(&self, base_dir: &Path) -> Result<Dataset> {
        match (&self.data.synthetic, &self.data.stations) {
            (Some(spec), _) => generate_synthetic(spec),
            (_, Some(stations)) => {
                let dir = if stations.dir.is_absolute() {
                    stations.dir.clone()
                } else {
                    base_dir.join(&stations.dir)
                };
                let series: Vec<StationSeries> = stations
                    .stations
                    .iter()
                    .map(|s| load_station_csv(dir.join(&s.file), &s.id, s.distance_km))
                    .collect::<Result<_>>()?;
                build_lagged_dataset_with(
                    &series,
                    &stations.target_station,
                    &stations.layout(),
                    stations.train_fraction,
                )
            }
            _ => Err(Error::InvalidConfig("no data source configured".into())),
        }
    }
}
