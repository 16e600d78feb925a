//! Data ingestion: categorical CSV matrices, lag embedding of time series
//! and windowed binarization of event timestamps.

use crate::probcore::{DataMatrix, VariableId};
use crate::{OcteError, Result};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

/// Reads a CSV with a header row of variable names and non-negative integer
/// codes in the body. Each column's alphabet is `max code + 1`.
pub fn read_csv<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| OcteError::parse("line 1", e.to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(OcteError::parse("line 1", "missing header row"));
    }
    if let Some(c) = headers.iter().position(str::is_empty) {
        return Err(OcteError::parse(
            format!("line 1, column {}", c + 1),
            "empty variable name",
        ));
    }
    let names: Vec<String> = headers.iter().map(String::from).collect();
    let mut columns: Vec<Vec<u32>> = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            OcteError::parse(format!("line {line}"), e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(OcteError::parse(
                format!("line {line}"),
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for (c, (cell, col)) in record.iter().zip(columns.iter_mut()).enumerate() {
            let v = cell.parse::<u32>().map_err(|_| {
                OcteError::parse(
                    format!("line {line}, column {} ({})", c + 1, names[c]),
                    format!("cell {cell:?} is not a non-negative integer code"),
                )
            })?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(OcteError::parse("line 2", "no data rows"));
    }
    let vars = names
        .into_iter()
        .enumerate()
        .map(|(i, n)| VariableId::new(i, n))
        .collect();
    DataMatrix::with_inferred_alphabet(vars, columns)
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    read_csv(std::fs::File::open(path)?)
}

pub fn write_csv<W: Write>(data: &DataMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| OcteError::Io(std::io::Error::other(e));
    w.write_record(data.variables().iter().map(|v| v.name.as_str()))
        .map_err(to_io)?;
    let mut row = Vec::with_capacity(data.variables().len());
    for t in 0..data.sample_count() {
        row.clear();
        row.extend(data.columns().iter().map(|c| c[t].to_string()));
        w.write_record(&row).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_csv(data, std::io::BufWriter::new(std::fs::File::create(path)?))
}

/// Lags of the candidate sources relative to one target column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagSpec {
    pub target: usize,
    pub default_lag: usize,
    /// Per-source overrides of `default_lag`, keyed by variable index.
    pub lags: BTreeMap<usize, usize>,
}

impl LagSpec {
    pub fn new(target: usize, default_lag: usize) -> Self {
        Self {
            target,
            default_lag,
            lags: BTreeMap::new(),
        }
    }

    pub fn with_lag(mut self, source: usize, lag: usize) -> Self {
        self.lags.insert(source, lag);
        self
    }

    fn lag_of(&self, v: usize) -> usize {
        if v == self.target {
            0
        } else {
            self.lags.get(&v).copied().unwrap_or(self.default_lag)
        }
    }
}

/// Pairs every source at time `t - τ` with the target at time `t`. The output
/// keeps the column layout and alphabet of `series` and has
/// `T - max τ` samples.
pub fn lag_embed(series: &DataMatrix, spec: &LagSpec) -> Result<DataMatrix> {
    series.variable(spec.target)?;
    for &v in spec.lags.keys() {
        series.variable(v)?;
    }
    let lags: Vec<usize> = series.variables().iter().map(|v| spec.lag_of(v.index)).collect();
    if lags
        .iter()
        .zip(series.variables())
        .any(|(&l, v)| l == 0 && v.index != spec.target)
    {
        return Err(OcteError::arg("source lags must be at least 1"));
    }
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let t = series.sample_count();
    if t <= max_lag {
        return Err(OcteError::arg(format!(
            "series of length {t} too short for lag {max_lag}"
        )));
    }
    let len = t - max_lag;
    let columns = series
        .columns()
        .iter()
        .zip(&lags)
        .map(|(c, &lag)| c[max_lag - lag..max_lag - lag + len].to_vec())
        .collect();
    DataMatrix::new(
        series.variables().to_vec(),
        columns,
        series.alphabet().cardinalities.clone(),
    )
}

/// Event times in seconds over a recording of known length.
#[derive(Clone, Debug, PartialEq)]
pub struct EventSeries {
    timestamps: Vec<f64>,
    duration: f64,
}

impl EventSeries {
    pub fn new(timestamps: Vec<f64>, duration: f64) -> Result<Self> {
        if !duration.is_finite() || duration < 0.0 {
            return Err(OcteError::Domain(format!("invalid duration {duration}")));
        }
        if timestamps.windows(2).any(|w| w[1] < w[0]) {
            return Err(OcteError::Domain("event times must be nondecreasing".into()));
        }
        if let Some(t) = timestamps.iter().find(|t| !(**t >= 0.0 && **t <= duration)) {
            return Err(OcteError::Domain(format!("event time {t} outside [0, {duration}]")));
        }
        Ok(Self { timestamps, duration })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Parses one timestamp per line after a `# duration=<seconds>` header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut duration = None;
        let mut times = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let loc = || format!("line {}", i + 1);
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("duration=") {
                    let d = v
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| OcteError::parse(loc(), format!("bad duration {v:?}")))?;
                    duration = Some(d);
                }
                continue;
            }
            let t = line
                .parse::<f64>()
                .map_err(|_| OcteError::parse(loc(), format!("bad timestamp {line:?}")))?;
            times.push(t);
        }
        let duration = duration.ok_or_else(|| OcteError::parse("line 1", "missing '# duration=<seconds>' header"))?;
        Self::new(times, duration)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// One value per full window: 1 when the event rate in the window is
/// strictly above `rate_threshold` (Hz). A trailing partial window is dropped.
pub fn binarize_events(events: &EventSeries, window: f64, rate_threshold: f64) -> Result<Vec<u32>> {
    if !window.is_finite() || window <= 0.0 {
        return Err(OcteError::arg(format!("window {window} must be positive")));
    }
    if events.duration < window {
        return Err(OcteError::arg(format!(
            "recording of {} s shorter than one {window} s window",
            events.duration
        )));
    }
    // relative slack so that e.g. 0.3 / 0.1 yields 3 windows
    let windows = (events.duration / window * (1.0 + 1e-12)).floor() as usize;
    let mut counts = vec![0usize; windows];
    for &t in &events.timestamps {
        let w = (t / window * (1.0 + 1e-12)).floor() as usize;
        if let Some(c) = counts.get_mut(w) {
            *c += 1;
        }
    }
    Ok(counts
        .into_iter()
        .map(|n| u32::from(n as f64 / window > rate_threshold))
        .collect())
}
