//! Station time-series ingestion, lagged design-matrix construction, and
//! synthetic dataset generation with planted ground truth.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantity columns every station CSV must provide, in header order.
pub const QUANTITIES: [&str; 6] = [
    "temperature",
    "humidity",
    "pressure",
    "cloudiness",
    "sunshine",
    "radiation",
];

/// The predicted quantity.
pub const RADIATION: &str = "radiation";

/// Synthetic quantity name for the calendar-position column.
pub const DAY_OF_YEAR: &str = "day_of_year";

/// Daily series of one weather station. Missing measurements are `None`.
#[derive(Debug, Clone)]
pub struct StationSeries {
    station_id: String,
    distance_km: f64,
    dates: Vec<NaiveDate>,
    columns: BTreeMap<String, Vec<Option<f64>>>,
    date_index: HashMap<NaiveDate, usize>,
}

impl StationSeries {
    pub fn new(
        station_id: impl Into<String>,
        distance_km: f64,
        dates: Vec<NaiveDate>,
        columns: BTreeMap<String, Vec<Option<f64>>>,
    ) -> Result<Self> {
        let station_id = station_id.into();
        if distance_km < 0.0 || !distance_km.is_finite() {
            return Err(Error::InvalidData(format!(
                "station `{station_id}`: distance_km must be a nonnegative real"
            )));
        }
        for q in QUANTITIES {
            let col = columns
                .get(q)
                .ok_or_else(|| Error::MissingColumn(q.to_string()))?;
            if col.len() != dates.len() {
                return Err(Error::DimensionMismatch {
                    context: "station column length",
                    expected: dates.len(),
                    found: col.len(),
                });
            }
        }
        // sort rows by date, then reject duplicates
        let mut order: Vec<usize> = (0..dates.len()).collect();
        order.sort_by_key(|&i| dates[i]);
        let dates: Vec<NaiveDate> = order.iter().map(|&i| dates[i]).collect();
        let columns: BTreeMap<String, Vec<Option<f64>>> = columns
            .into_iter()
            .map(|(k, v)| (k, order.iter().map(|&i| v[i]).collect()))
            .collect();
        for w in dates.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateDates {
                    station: station_id,
                    date: w[0].to_string(),
                });
            }
        }
        let date_index = dates.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        Ok(Self {
            station_id,
            distance_km,
            dates,
            columns,
            date_index,
        })
    }

    pub fn station_id(&self) -> &str {
        &self.station_id
    }

    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Measurement of `quantity` on `date`; `None` when the date is absent
    /// or the cell is missing.
    pub fn value(&self, quantity: &str, date: NaiveDate) -> Option<f64> {
        let &row = self.date_index.get(&date)?;
        self.columns.get(quantity)?[row]
    }
}

/// Load one station CSV (`date,temperature,humidity,pressure,cloudiness,sunshine,radiation`).
///
/// Cells that are empty or fail to parse as numbers are recorded as missing;
/// rows are sorted by date. Duplicate dates are an error.
pub fn load_station_csv(
    path: impl AsRef<Path>,
    station_id: &str,
    distance_km: f64,
) -> Result<StationSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;

    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let col_of = |name: &str| headers.iter().position(|h| h == name);
    let date_col = col_of("date").ok_or_else(|| Error::MissingColumn("date".into()))?;
    let mut quantity_cols = Vec::with_capacity(QUANTITIES.len());
    for q in QUANTITIES {
        quantity_cols.push(col_of(q).ok_or_else(|| Error::MissingColumn(q.to_string()))?);
    }

    let mut dates = Vec::new();
    let mut columns: BTreeMap<String, Vec<Option<f64>>> =
        QUANTITIES.iter().map(|q| (q.to_string(), Vec::new())).collect();
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let raw_date = record.get(date_col).unwrap_or("");
        let date = raw_date.parse::<NaiveDate>().map_err(|_| {
            Error::InvalidData(format!("{}: unparseable date `{raw_date}`", path.display()))
        })?;
        dates.push(date);
        for (q, &col) in QUANTITIES.iter().zip(&quantity_cols) {
            let cell = record.get(col).unwrap_or("");
            let value = if cell.is_empty() {
                None
            } else {
                cell.parse::<f64>().ok().filter(|v| v.is_finite())
            };
            columns.get_mut(*q).unwrap().push(value);
        }
    }

    StationSeries::new(station_id, distance_km, dates, columns)
}

/// Per-column provenance of a design-matrix variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableMeta {
    pub station_id: String,
    pub quantity: String,
    /// 1-based day index within the lag window; the highest index is the
    /// estimation day. 0 for synthetic variables.
    pub day: usize,
    pub distance_km: f64,
}

/// Design matrix plus target, variable provenance, and a chronological
/// train/test split. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    variable_meta: Vec<VariableMeta>,
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
    row_dates: Option<Vec<NaiveDate>>,
}

impl Dataset {
    pub fn new(
        x: DMatrix<f64>,
        y: DVector<f64>,
        variable_meta: Vec<VariableMeta>,
        train_rows: Vec<usize>,
        test_rows: Vec<usize>,
        row_dates: Option<Vec<NaiveDate>>,
    ) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                context: "dataset target length",
                expected: x.nrows(),
                found: y.len(),
            });
        }
        if variable_meta.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                context: "dataset variable metadata",
                expected: x.ncols(),
                found: variable_meta.len(),
            });
        }
        if let Some(dates) = &row_dates {
            if dates.len() != x.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "dataset row dates",
                    expected: x.nrows(),
                    found: dates.len(),
                });
            }
        }
        let train_set: HashSet<usize> = train_rows.iter().copied().collect();
        if test_rows.iter().any(|r| train_set.contains(r)) {
            return Err(Error::InvalidData("train and test rows overlap".into()));
        }
        if train_rows.iter().chain(&test_rows).any(|&r| r >= x.nrows()) {
            return Err(Error::InvalidData("split row index out of range".into()));
        }
        if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("dataset contains non-finite values".into()));
        }
        Ok(Self {
            x,
            y,
            variable_meta,
            train_rows,
            test_rows,
            row_dates,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_variables(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn variable_meta(&self) -> &[VariableMeta] {
        &self.variable_meta
    }

    pub fn train_rows(&self) -> &[usize] {
        &self.train_rows
    }

    pub fn test_rows(&self) -> &[usize] {
        &self.test_rows
    }

    pub fn row_dates(&self) -> Option<&[NaiveDate]> {
        self.row_dates.as_deref()
    }

    /// Submatrix of the given rows restricted to the given columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.x[(rows[i], cols[j])])
    }

    pub fn subvector(&self, rows: &[usize]) -> DVector<f64> {
        DVector::from_fn(rows.len(), |i, _| self.y[rows[i]])
    }

    /// FNV-1a digest over dimensions, values, and split; used by the harness
    /// to prove all algorithms saw the same data.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.x.nrows() as u64).to_le_bytes());
        eat(&(self.x.ncols() as u64).to_le_bytes());
        for v in self.x.iter() {
            eat(&v.to_bits().to_le_bytes());
        }
        for v in self.y.iter() {
            eat(&v.to_bits().to_le_bytes());
        }
        for r in self.train_rows.iter().chain(&self.test_rows) {
            eat(&(*r as u64).to_le_bytes());
        }
        h
    }
}

/// One explicitly requested design column: `quantity` of `station_id`,
/// `day_offset` days before the estimation day (0 = estimation day).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraColumn {
    pub station_id: String,
    pub quantity: String,
    pub day_offset: usize,
}

/// Composition of the lag expansion. The produced column count is
/// `endogenous_lags + n_stations * exogenous_quantities * (lags + 1) +
/// day_of_year + extra_columns`, so any required composition can be
/// configured without hard-coding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagLayout {
    /// Exogenous window: day offsets `lags..=0` for every station/quantity.
    pub lags: usize,
    /// Lagged copies of the target station's radiation, offsets
    /// `endogenous_lags..=1` (the estimation day itself is the target).
    pub endogenous_lags: usize,
    pub exogenous_quantities: Vec<String>,
    pub include_day_of_year: bool,
    #[serde(default)]
    pub extra_columns: Vec<ExtraColumn>,
}

impl LagLayout {
    /// Every non-target quantity for every station over the full window,
    /// the target's radiation lags, and the day of year.
    pub fn standard(lags: usize) -> Self {
        Self {
            lags,
            endogenous_lags: lags,
            exogenous_quantities: QUANTITIES
                .iter()
                .filter(|&&q| q != RADIATION)
                .map(|q| q.to_string())
                .collect(),
            include_day_of_year: true,
            extra_columns: Vec::new(),
        }
    }

    /// Closed-form column count of the expansion for `n_stations` stations.
    pub fn column_count(&self, n_stations: usize) -> usize {
        self.endogenous_lags
            + n_stations * self.exogenous_quantities.len() * (self.lags + 1)
            + usize::from(self.include_day_of_year)
            + self.extra_columns.len()
    }

    /// Widest day offset referenced by any column.
    fn window(&self) -> usize {
        self.lags
            .max(self.endogenous_lags)
            .max(self.extra_columns.iter().map(|e| e.day_offset).max().unwrap_or(0))
    }
}

/// Build the lagged dataset with the standard layout for `lags`.
pub fn build_lagged_dataset(
    series: &[StationSeries],
    target_station: &str,
    lags: usize,
    train_fraction: f64,
) -> Result<Dataset> {
    build_lagged_dataset_with(series, target_station, &LagLayout::standard(lags), train_fraction)
}

/// Build the lagged dataset with an explicit layout.
///
/// A sample is produced for day `t` only when the target radiation at `t`
/// and every constituent of every column are present; windows touching a
/// gap are dropped entirely. The split is chronological.
pub fn build_lagged_dataset_with(
    series: &[StationSeries],
    target_station: &str,
    layout: &LagLayout,
    train_fraction: f64,
) -> Result<Dataset> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let target = series
        .iter()
        .find(|s| s.station_id() == target_station)
        .ok_or_else(|| {
            Error::InvalidData(format!("target station `{target_station}` not in series"))
        })?;
    for extra in &layout.extra_columns {
        if !series.iter().any(|s| s.station_id() == extra.station_id) {
            return Err(Error::InvalidData(format!(
                "extra column references unknown station `{}`",
                extra.station_id
            )));
        }
    }

    let start = series
        .iter()
        .map(|s| s.dates().first().copied())
        .collect::<Option<Vec<_>>>()
        .and_then(|v| v.into_iter().max());
    let end = series
        .iter()
        .map(|s| s.dates().last().copied())
        .collect::<Option<Vec<_>>>()
        .and_then(|v| v.into_iter().min());
    let (start, end) = match (start, end) {
        (Some(s), Some(e)) if s <= e => (s, e),
        _ => return Err(Error::InvalidData("empty common date range".into())),
    };

    let window = layout.window();
    let day_of = |offset: usize| window + 1 - offset;

    // Column plan: endogenous lags, per-station exogenous windows, extras,
    // day of year.
    enum Source<'a> {
        Value {
            series: &'a StationSeries,
            quantity: String,
            offset: usize,
        },
        DayOfYear,
    }
    let mut meta = Vec::new();
    let mut sources = Vec::new();
    for offset in (1..=layout.endogenous_lags).rev() {
        meta.push(VariableMeta {
            station_id: target.station_id().to_string(),
            quantity: RADIATION.to_string(),
            day: day_of(offset),
            distance_km: target.distance_km(),
        });
        sources.push(Source::Value {
            series: target,
            quantity: RADIATION.to_string(),
            offset,
        });
    }
    for s in series {
        for q in &layout.exogenous_quantities {
            for offset in (0..=layout.lags).rev() {
                meta.push(VariableMeta {
                    station_id: s.station_id().to_string(),
                    quantity: q.clone(),
                    day: day_of(offset),
                    distance_km: s.distance_km(),
                });
                sources.push(Source::Value {
                    series: s,
                    quantity: q.clone(),
                    offset,
                });
            }
        }
    }
    for extra in &layout.extra_columns {
        let s = series
            .iter()
            .find(|s| s.station_id() == extra.station_id)
            .expect("validated above");
        meta.push(VariableMeta {
            station_id: s.station_id().to_string(),
            quantity: extra.quantity.clone(),
            day: day_of(extra.day_offset),
            distance_km: s.distance_km(),
        });
        sources.push(Source::Value {
            series: s,
            quantity: extra.quantity.clone(),
            offset: extra.day_offset,
        });
    }
    if layout.include_day_of_year {
        meta.push(VariableMeta {
            station_id: target.station_id().to_string(),
            quantity: DAY_OF_YEAR.to_string(),
            day: day_of(0),
            distance_km: target.distance_km(),
        });
        sources.push(Source::DayOfYear);
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut t = start + Days::new(window as u64);
    while t <= end {
        let sample: Option<(Vec<f64>, f64)> = (|| {
            let y = target.value(RADIATION, t)?;
            let mut row = Vec::with_capacity(sources.len());
            for source in &sources {
                match source {
                    Source::Value {
                        series,
                        quantity,
                        offset,
                    } => {
                        let date = t - Days::new(*offset as u64);
                        row.push(series.value(quantity, date)?);
                    }
                    Source::DayOfYear => row.push(f64::from(t.ordinal())),
                }
            }
            Some((row, y))
        })();
        if let Some((row, y)) = sample {
            rows.push(row);
            targets.push(y);
            dates.push(t);
        }
        t = match t.succ_opt() {
            Some(next) => next,
            None => break,
        };
    }

    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidData(
            "no usable sample rows in the common date range".into(),
        ));
    }
    let x = DMatrix::from_fn(n, sources.len(), |i, j| rows[i][j]);
    let y = DVector::from_vec(targets);
    let (train_rows, test_rows) = chronological_split(n, train_fraction);
    Dataset::new(x, y, meta, train_rows, test_rows, Some(dates))
}

fn chronological_split(n: usize, train_fraction: f64) -> (Vec<usize>, Vec<usize>) {
    let train_n = ((n as f64 * train_fraction).floor() as usize).clamp(1, n);
    ((0..train_n).collect(), (train_n..n).collect())
}

fn default_train_fraction() -> f64 {
    0.8
}

/// Recipe for a synthetic dataset with planted ground truth.
///
/// `y = sum over true_support of beta_j * x_j + eps`, with `x` standard
/// normal, coefficients in `[1, 2)` with random sign, and
/// `eps ~ Normal(0, noise_std)`; all draws fixed by `seed`. Columns listed
/// together in `duplicate_groups` are bit-exact copies, planting exactly
/// equivalent selection optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_variables: usize,
    pub true_support: Vec<usize>,
    #[serde(default)]
    pub duplicate_groups: Vec<Vec<usize>>,
    pub noise_std: f64,
    /// Per-variable distances; empty means 1.0 for every variable.
    #[serde(default)]
    pub station_distances: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.n_variables == 0 {
            return Err(Error::InvalidConfig(
                "synthetic n_samples and n_variables must be positive".into(),
            ));
        }
        if let Some(&bad) = self.true_support.iter().find(|&&j| j >= self.n_variables) {
            return Err(Error::InvalidConfig(format!(
                "true_support index {bad} out of range (n_variables = {})",
                self.n_variables
            )));
        }
        let mut seen = HashSet::new();
        for group in &self.duplicate_groups {
            for &j in group {
                if j >= self.n_variables {
                    return Err(Error::InvalidConfig(format!(
                        "duplicate_groups index {j} out of range"
                    )));
                }
                if !seen.insert(j) {
                    return Err(Error::InvalidConfig(
                        "duplicate_groups must be disjoint".into(),
                    ));
                }
            }
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::InvalidConfig("noise_std must be nonnegative".into()));
        }
        if !self.station_distances.is_empty()
            && self.station_distances.len() != self.n_variables
        {
            return Err(Error::InvalidConfig(format!(
                "station_distances must have {} entries or be empty",
                self.n_variables
            )));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(
                "train_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    /// Coefficients planted on the sorted support, as drawn by
    /// [`generate_synthetic`].
    pub fn coefficients(&self) -> Vec<(usize, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut support: Vec<usize> = self.true_support.clone();
        support.sort_unstable();
        support
            .into_iter()
            .map(|j| {
                let magnitude = 1.0 + rng.gen::<f64>();
                let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                (j, sign * magnitude)
            })
            .collect()
    }
}

/// Deterministically generate the dataset described by `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let coefficients = spec.coefficients();

    // Continue the stream where `coefficients()` left it.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in &coefficients {
        let _: f64 = rng.gen();
        let _: bool = rng.gen_bool(0.5);
    }

    let n = spec.n_samples;
    let k = spec.n_variables;
    let mut x = DMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            x[(i, j)] = rng.sample(StandardNormal);
        }
    }
    for group in &spec.duplicate_groups {
        let mut group = group.clone();
        group.sort_unstable();
        if let Some((&src, rest)) = group.split_first() {
            for &dst in rest {
                let col = x.column(src).into_owned();
                x.set_column(dst, &col);
            }
        }
    }

    let mut y = DVector::zeros(n);
    for i in 0..n {
        let noise: f64 = rng.sample(StandardNormal);
        let mut v = spec.noise_std * noise;
        for &(j, beta) in &coefficients {
            v += beta * x[(i, j)];
        }
        y[i] = v;
    }

    let distances = if spec.station_distances.is_empty() {
        vec![1.0; k]
    } else {
        spec.station_distances.clone()
    };
    let meta = (0..k)
        .map(|j| VariableMeta {
            station_id: "synthetic".to_string(),
            quantity: format!("x{j}"),
            day: 0,
            distance_km: distances[j],
        })
        .collect();
    let (train_rows, test_rows) = chronological_split(n, spec.train_fraction);
    Dataset::new(x, y, meta, train_rows, test_rows, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const HEADER: &str = "date,temperature,humidity,pressure,cloudiness,sunshine,radiation";

    fn toy_station(id: &str, distance: f64, days: &[(u32, Option<f64>)]) -> StationSeries {
        // every quantity takes the same per-day value, missing where None
        let dates: Vec<NaiveDate> = days
            .iter()
            .map(|&(d, _)| NaiveDate::from_ymd_opt(2020, 1, d).unwrap())
            .collect();
        let values: Vec<Option<f64>> = days.iter().map(|&(_, v)| v).collect();
        let columns = QUANTITIES
            .iter()
            .map(|q| (q.to_string(), values.clone()))
            .collect();
        StationSeries::new(id, distance, dates, columns).unwrap()
    }

    #[test]
    fn load_well_formed_csv_sorted() {
        let f = write_csv(&format!(
            "{HEADER}\n2020-01-03,1,2,3,4,5,6\n2020-01-01,1,2,3,4,5,6\n2020-01-02,9,2,3,4,5,6\n"
        ));
        let s = load_station_csv(f.path(), "a", 10.0).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.dates().windows(2).all(|w| w[0] < w[1]));
        let d2 = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        assert_eq!(s.value("temperature", d2), Some(9.0));
    }

    #[test]
    fn duplicate_dates_rejected() {
        let f = write_csv(&format!(
            "{HEADER}\n2020-01-01,1,2,3,4,5,6\n2020-01-01,1,2,3,4,5,6\n"
        ));
        assert!(matches!(
            load_station_csv(f.path(), "a", 0.0),
            Err(Error::DuplicateDates { .. })
        ));
    }

    #[test]
    fn non_numeric_cell_becomes_missing() {
        let f = write_csv(&format!(
            "{HEADER}\n2020-01-01,oops,2,3,4,5,6\n2020-01-02,,2,3,4,5,6\n"
        ));
        let s = load_station_csv(f.path(), "a", 0.0).unwrap();
        let d1 = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let d2 = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        assert_eq!(s.value("temperature", d1), None);
        assert_eq!(s.value("temperature", d2), None);
        assert_eq!(s.value("humidity", d1), Some(2.0));
    }

    #[test]
    fn missing_required_column_rejected() {
        let f = write_csv("date,temperature,humidity,pressure,cloudiness,sunshine\n2020-01-01,1,2,3,4,5\n");
        assert!(matches!(
            load_station_csv(f.path(), "a", 0.0),
            Err(Error::MissingColumn(c)) if c == "radiation"
        ));
    }

    #[test]
    fn paper_composition_yields_89_columns() {
        // 4 endogenous lags + 4 stations x 4 exogenous quantities x 5 days
        // + day of year + 4 extra columns = 89
        let days: Vec<(u32, Option<f64>)> = (1..=30).map(|d| (d, Some(d as f64))).collect();
        let series: Vec<StationSeries> = ["colmenar", "s1", "s2", "s3"]
            .iter()
            .enumerate()
            .map(|(i, id)| toy_station(id, i as f64 * 40.0, &days))
            .collect();
        let layout = LagLayout {
            lags: 4,
            endogenous_lags: 4,
            exogenous_quantities: ["temperature", "humidity", "pressure", "cloudiness"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            include_day_of_year: true,
            extra_columns: (0..4)
                .map(|offset| ExtraColumn {
                    station_id: "colmenar".into(),
                    quantity: "sunshine".into(),
                    day_offset: offset,
                })
                .collect(),
        };
        assert_eq!(layout.column_count(4), 89);
        let ds = build_lagged_dataset_with(&series, "colmenar", &layout, 0.8).unwrap();
        assert_eq!(ds.n_variables(), 89);
        assert_eq!(ds.variable_meta().len(), 89);
        assert_eq!(ds.n_samples(), 30 - 4);
    }

    #[test]
    fn degenerate_layout_two_columns() {
        let days: Vec<(u32, Option<f64>)> = (1..=5).map(|d| (d, Some(d as f64))).collect();
        let series = vec![toy_station("only", 0.0, &days)];
        let layout = LagLayout {
            lags: 0,
            endogenous_lags: 0,
            exogenous_quantities: vec!["temperature".into()],
            include_day_of_year: true,
            extra_columns: vec![],
        };
        assert_eq!(layout.column_count(1), 2);
        let ds = build_lagged_dataset_with(&series, "only", &layout, 0.7).unwrap();
        assert_eq!(ds.n_variables(), 2);
        assert_eq!(ds.n_samples(), 5);
        // day-of-year column carries the calendar ordinal
        assert_eq!(ds.x()[(0, 1)], 1.0);
        assert_eq!(ds.x()[(4, 1)], 5.0);
    }

    #[test]
    fn gap_drops_every_window_touching_it() {
        // 10 consecutive days, day 5 missing; lags = 2 => samples exist for
        // day t only when {t-2, t-1, t} are all present. Affected: t in
        // {5, 6, 7}. Usable: 3, 4, 8, 9, 10.
        let days: Vec<(u32, Option<f64>)> = (1..=10)
            .map(|d| (d, if d == 5 { None } else { Some(d as f64) }))
            .collect();
        let series = vec![toy_station("a", 0.0, &days)];
        let layout = LagLayout {
            lags: 2,
            endogenous_lags: 2,
            exogenous_quantities: vec!["temperature".into()],
            include_day_of_year: false,
            extra_columns: vec![],
        };
        let ds = build_lagged_dataset_with(&series, "a", &layout, 0.5).unwrap();
        let got: Vec<u32> = ds.row_dates().unwrap().iter().map(|d| d.day()).collect();
        assert_eq!(got, vec![3, 4, 8, 9, 10]);
    }

    #[test]
    fn split_is_chronological() {
        let days: Vec<(u32, Option<f64>)> = (1..=20).map(|d| (d, Some(d as f64))).collect();
        let series = vec![toy_station("a", 0.0, &days)];
        let ds = build_lagged_dataset(&series, "a", 2, 0.8).unwrap();
        let dates = ds.row_dates().unwrap();
        let max_train = ds.train_rows().iter().map(|&r| dates[r]).max().unwrap();
        let min_test = ds.test_rows().iter().map(|&r| dates[r]).min().unwrap();
        assert!(max_train < min_test);
        assert_eq!(ds.train_rows().len(), 14); // floor(18 * 0.8)
    }

    #[test]
    fn disjoint_date_ranges_are_an_error() {
        let a = toy_station("a", 0.0, &[(1, Some(1.0)), (2, Some(1.0))]);
        let b = toy_station("b", 1.0, &[(20, Some(1.0)), (21, Some(1.0))]);
        assert!(build_lagged_dataset(&[a, b], "a", 1, 0.8).is_err());
    }

    #[test]
    fn all_windows_incomplete_is_an_error() {
        // radiation present only on day 1: no day has a complete lag window
        let days: Vec<(u32, Option<f64>)> =
            vec![(1, Some(1.0)), (2, None), (3, None), (4, None)];
        let series = vec![toy_station("a", 0.0, &days)];
        let err = build_lagged_dataset(&series, "a", 2, 0.8).unwrap_err();
        assert!(err.to_string().contains("no usable sample rows"), "{err}");
    }

    fn small_spec() -> SyntheticSpec {
        SyntheticSpec {
            n_samples: 60,
            n_variables: 8,
            true_support: vec![1, 4, 6],
            duplicate_groups: vec![vec![2, 7]],
            noise_std: 0.0,
            station_distances: vec![],
            seed: 99,
            train_fraction: 0.8,
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let a = generate_synthetic(&small_spec()).unwrap();
        let b = generate_synthetic(&small_spec()).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.y(), b.y());
        assert_eq!(a.checksum(), b.checksum());
    }

    #[test]
    fn synthetic_duplicates_are_exact_copies() {
        let ds = generate_synthetic(&small_spec()).unwrap();
        for i in 0..ds.n_samples() {
            assert_eq!(ds.x()[(i, 2)].to_bits(), ds.x()[(i, 7)].to_bits());
        }
    }

    #[test]
    fn noise_free_support_fit_is_exact() {
        let ds = generate_synthetic(&small_spec()).unwrap();
        let rows: Vec<usize> = (0..ds.n_samples()).collect();
        let x = ds.submatrix(&rows, &[1, 4, 6]);
        let model = regression::fit_pseudoinverse(&x, ds.y()).unwrap();
        let yhat = regression::predict(&model, &x).unwrap();
        assert!(regression::rmse(&yhat, ds.y()).unwrap() < 1e-10);
    }

    #[test]
    fn support_out_of_range_is_an_error() {
        let mut spec = small_spec();
        spec.true_support = vec![8];
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn overlapping_duplicate_groups_are_an_error() {
        let mut spec = small_spec();
        spec.duplicate_groups = vec![vec![1, 2], vec![2, 3]];
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn checksum_distinguishes_datasets() {
        let a = generate_synthetic(&small_spec()).unwrap();
        let mut spec = small_spec();
        spec.seed = 100;
        let b = generate_synthetic(&spec).unwrap();
        assert_ne!(a.checksum(), b.checksum());
    }
}
