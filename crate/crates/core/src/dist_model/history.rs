use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DistModelError;
use crate::scalar::Scalar;

pub const STEPS_PER_DAY: usize = 24;

/// Daily forecast/realization pairs for one disturbance source.
///
/// `forecasts[k][t]` and `realizations[k][t]` hold day `k`, hour-of-day `t`
/// (0-based; hour `t` in the CSV files is `t + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceHistory<S> {
    pub disturbance_id: String,
    pub forecasts: Vec<Vec<S>>,
    pub realizations: Vec<Vec<S>>,
}

#[derive(Debug, Deserialize, Serialize)]
struct CsvRow {
    day: i64,
    hour: u32,
    forecast: f64,
    realization: f64,
}

impl<S: Scalar> DisturbanceHistory<S> {
    pub fn new(
        disturbance_id: impl Into<String>,
        forecasts: Vec<Vec<S>>,
        realizations: Vec<Vec<S>>,
    ) -> Result<Self, DistModelError> {
        let h = Self {
            disturbance_id: disturbance_id.into(),
            forecasts,
            realizations,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<(), DistModelError> {
        let n = self.forecasts.len();
        if n != self.realizations.len() {
            return Err(DistModelError::InvalidHistory(format!(
                "{}: {} forecast days but {} realization days",
                self.disturbance_id,
                n,
                self.realizations.len()
            )));
        }
        if n < 3 {
            return Err(DistModelError::InvalidHistory(format!(
                "{}: need at least 3 days, got {n}",
                self.disturbance_id
            )));
        }
        for (k, (f, r)) in self.forecasts.iter().zip(&self.realizations).enumerate() {
            if f.len() != STEPS_PER_DAY || r.len() != STEPS_PER_DAY {
                return Err(DistModelError::InvalidHistory(format!(
                    "{}: day {k} does not have {STEPS_PER_DAY} hourly values",
                    self.disturbance_id
                )));
            }
            if f.iter().chain(r).any(|v| !v.is_finite()) {
                return Err(DistModelError::InvalidHistory(format!(
                    "{}: day {k} contains non-finite values",
                    self.disturbance_id
                )));
            }
        }
        Ok(())
    }

    pub fn days(&self) -> usize {
        self.forecasts.len()
    }

    /// Forecast errors `e[k][t] = ξ[k][t] - f[k][t]`.
    pub fn errors(&self) -> Vec<Vec<S>> {
        self.forecasts
            .iter()
            .zip(&self.realizations)
            .map(|(f, r)| r.iter().zip(f).map(|(r, f)| *r - *f).collect())
            .collect()
    }

    /// Reads the `day,hour,forecast,realization` format.
    pub fn read_csv(
        reader: impl Read,
        disturbance_id: impl Into<String>,
    ) -> Result<Self, DistModelError> {
        let id = disturbance_id.into();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_err(&id, 1, e))?.clone();
        for required in ["day", "hour", "forecast", "realization"] {
            if !headers.iter().any(|h| h == required) {
                return Err(DistModelError::Csv {
                    source_name: id,
                    line: 1,
                    message: format!("missing column `{required}`"),
                });
            }
        }
        let mut forecasts: Vec<Vec<S>> = Vec::new();
        let mut realizations: Vec<Vec<S>> = Vec::new();
        let mut first_day: Option<i64> = None;
        for (i, rec) in rdr.deserialize::<CsvRow>().enumerate() {
            let line = i as u64 + 2;
            let row = rec.map_err(|e| csv_err(&id, line, e))?;
            let first = *first_day.get_or_insert(row.day);
            let k = row.day - first;
            let expect_day = (i / STEPS_PER_DAY) as i64;
            let expect_hour = (i % STEPS_PER_DAY) as u32 + 1;
            if k != expect_day || row.hour != expect_hour {
                return Err(DistModelError::Csv {
                    source_name: id,
                    line,
                    message: format!(
                        "expected day {} hour {expect_hour}, found day {} hour {}",
                        first + expect_day,
                        row.day,
                        row.hour
                    ),
                });
            }
            if expect_hour == 1 {
                forecasts.push(Vec::with_capacity(STEPS_PER_DAY));
                realizations.push(Vec::with_capacity(STEPS_PER_DAY));
            }
            forecasts.last_mut().unwrap().push(S::lit(row.forecast));
            realizations.last_mut().unwrap().push(S::lit(row.realization));
        }
        if forecasts.last().is_some_and(|d| d.len() != STEPS_PER_DAY) {
            return Err(DistModelError::InvalidHistory(format!(
                "{id}: trailing partial day"
            )));
        }
        Self::new(id, forecasts, realizations)
    }

    pub fn read_csv_file(path: &Path) -> Result<Self, DistModelError> {
        let file = std::fs::File::open(path).map_err(|e| DistModelError::Io(e.to_string()))?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::read_csv(file, id).map_err(|e| match e {
            DistModelError::Csv { line, message, .. } => DistModelError::Csv {
                source_name: path.display().to_string(),
                line,
                message,
            },
            other => other,
        })
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), DistModelError> {
        let mut w = csv::Writer::from_writer(writer);
        for (k, (f, r)) in self.forecasts.iter().zip(&self.realizations).enumerate() {
            for t in 0..STEPS_PER_DAY {
                w.serialize(CsvRow {
                    day: k as i64 + 1,
                    hour: t as u32 + 1,
                    forecast: f[t].to_f64_lossy(),
                    realization: r[t].to_f64_lossy(),
                })
                .map_err(|e| DistModelError::Io(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| DistModelError::Io(e.to_string()))
    }
}

fn csv_err(id: &str, line: u64, e: csv::Error) -> DistModelError {
    let line = e.position().map(|p| p.line()).unwrap_or(line);
    DistModelError::Csv {
        source_name: id.to_string(),
        line,
        message: e.to_string(),
    }
}
