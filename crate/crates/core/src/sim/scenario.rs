use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::dist_model::{DisturbanceHistory, STEPS_PER_DAY};
use crate::plant::DisturbanceKind;

/// Hourly forecasts and realizations per disturbance; index `k` is the value
/// acting between hour `k` and hour `k + 1`, with hour 0 a Monday 00:00.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub disturbances: Vec<DisturbanceKind>,
    pub forecast: Vec<Vec<f64>>,
    pub realization: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub params: Option<GeneratorParams>,
}

impl Scenario {
    pub fn hours(&self) -> usize {
        self.forecast.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let nd = self.disturbances.len();
        if nd == 0 || self.forecast.len() != nd || self.realization.len() != nd {
            return Err(SimError::Scenario(format!(
                "{nd} disturbances but {} forecast and {} realization series",
                self.forecast.len(),
                self.realization.len()
            )));
        }
        let n = self.hours();
        for (i, (f, r)) in self.forecast.iter().zip(&self.realization).enumerate() {
            if f.len() != n || r.len() != n {
                return Err(SimError::Scenario(format!(
                    "series {} is not aligned with the first series ({n} hours)",
                    self.disturbances[i].id()
                )));
            }
            if f.iter().chain(r).any(|v| !v.is_finite()) {
                return Err(SimError::Scenario(format!("series {} is not finite", self.disturbances[i].id())));
            }
        }
        Ok(())
    }

    /// Realized minus forecast at hour `k`.
    pub fn error(&self, i: usize, k: usize) -> f64 {
        self.realization[i][k] - self.forecast[i][k]
    }

    pub fn realized_at(&self, k: usize) -> Vec<f64> {
        self.realization.iter().map(|r| r[k]).collect()
    }

    /// Keeps only the listed disturbances, in that order.
    pub fn select(&self, kinds: &[DisturbanceKind]) -> Result<Scenario, SimError> {
        let mut out = Scenario {
            disturbances: kinds.to_vec(),
            forecast: Vec::new(),
            realization: Vec::new(),
            seed: self.seed,
            params: self.params.clone(),
        };
        for k in kinds {
            let i = self
                .disturbances
                .iter()
                .position(|d| d == k)
                .ok_or_else(|| SimError::Scenario(format!("scenario lacks disturbance {}", k.id())))?;
            out.forecast.push(self.forecast[i].clone());
            out.realization.push(self.realization[i].clone());
        }
        Ok(out)
    }

    /// Wide CSV: `hour` then `<id>_forecast,<id>_realization` per disturbance.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["hour".to_string()];
        for d in &self.disturbances {
            header.push(format!("{}_forecast", d.id()));
            header.push(format!("{}_realization", d.id()));
        }
        w.write_record(&header).map_err(io_err)?;
        for k in 0..self.hours() {
            let mut rec = vec![k.to_string()];
            for i in 0..self.disturbances.len() {
                rec.push(self.forecast[i][k].to_string());
                rec.push(self.realization[i][k].to_string());
            }
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(|e| SimError::Io(e.to_string()))
    }

    pub fn read_csv(reader: impl Read) -> Result<Scenario, SimError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(io_err)?.clone();
        let mut disturbances = Vec::new();
        let mut cols = Vec::new();
        for (c, h) in headers.iter().enumerate() {
            if let Some(id) = h.strip_suffix("_forecast") {
                let kind = DisturbanceKind::from_id(id)
                    .ok_or_else(|| SimError::Scenario(format!("unknown disturbance column {h}")))?;
                let r = headers
                    .iter()
                    .position(|x| x == format!("{id}_realization"))
                    .ok_or_else(|| SimError::Scenario(format!("{h} has no matching realization column")))?;
                disturbances.push(kind);
                cols.push((c, r));
            }
        }
        if disturbances.is_empty() {
            return Err(SimError::Scenario("no <id>_forecast columns".into()));
        }
        let mut forecast = vec![Vec::new(); cols.len()];
        let mut realization = vec![Vec::new(); cols.len()];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(io_err)?;
            let field = |c: usize| -> Result<f64, SimError> {
                rec.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| SimError::Scenario(format!("line {}: bad value in column {}", line + 2, c + 1)))
            };
            for (i, (f, r)) in cols.iter().enumerate() {
                forecast[i].push(field(*f)?);
                realization[i].push(field(*r)?);
            }
        }
        let s = Scenario {
            disturbances,
            forecast,
            realization,
            seed: None,
            params: None,
        };
        s.validate()?;
        Ok(s)
    }
}

fn io_err(e: csv::Error) -> SimError {
    SimError::Io(e.to_string())
}

/// Forecast error process `e_k = α e_{k−1} + σ g(h) n_k`, where the gate
/// `g(h) ∈ [0, 1]` depends on the hour of day only. While the gate is shut
/// the error is exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub alpha: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    /// Daily mean ambient temperature, °C, and half the day-night swing.
    pub ambient_mean: f64,
    pub ambient_swing: f64,
    /// Standard deviation of the day-to-day drift of the ambient mean.
    pub ambient_drift: f64,
    pub ambient_noise: NoiseParams,
    pub ground_temp: f64,
    pub ground_noise: NoiseParams,
    /// Clear-sky radiation peak on the south facade, kW/m².
    pub solar_peak: f64,
    pub sunrise: f64,
    pub sunset: f64,
    pub solar_noise: NoiseParams,
    /// Internal gains per room outside and during occupancy, kW.
    pub gains_base: f64,
    pub gains_occupied: f64,
    pub occupied_from: usize,
    pub occupied_to: usize,
    pub gains_noise: NoiseParams,
    /// Length of the emitted training history.
    pub training_days: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self::winter()
    }
}

impl GeneratorParams {
    pub fn winter() -> Self {
        Self {
            ambient_mean: 2.0,
            ambient_swing: 4.0,
            ambient_drift: 1.5,
            ambient_noise: NoiseParams { alpha: 0.8, sigma: 0.8 },
            ground_temp: 8.0,
            ground_noise: NoiseParams { alpha: 0.9, sigma: 0.05 },
            solar_peak: 0.35,
            sunrise: 7.0,
            sunset: 17.0,
            solar_noise: NoiseParams { alpha: 0.3, sigma: 0.01 },
            gains_base: 0.1,
            gains_occupied: 0.4,
            occupied_from: 8,
            occupied_to: 18,
            gains_noise: NoiseParams { alpha: 0.5, sigma: 0.15 },
            training_days: 365,
        }
    }

    pub fn summer() -> Self {
        Self {
            ambient_mean: 20.0,
            ambient_swing: 5.0,
            ground_temp: 14.0,
            solar_peak: 0.6,
            sunrise: 5.0,
            sunset: 21.0,
            ..Self::winter()
        }
    }

    /// Sets every innovation standard deviation to zero.
    pub fn noiseless(mut self) -> Self {
        for n in [
            &mut self.ambient_noise,
            &mut self.ground_noise,
            &mut self.solar_noise,
            &mut self.gains_noise,
        ] {
            n.sigma = 0.0;
        }
        self
    }

    fn solar_shape(&self, hour: usize) -> f64 {
        let h = hour as f64 + 0.5;
        if h <= self.sunrise || h >= self.sunset {
            0.0
        } else {
            (PI * (h - self.sunrise) / (self.sunset - self.sunrise)).sin()
        }
    }

    fn occupied(&self, hour: usize) -> bool {
        (self.occupied_from..self.occupied_to).contains(&hour)
    }

    fn noise(&self, kind: DisturbanceKind) -> NoiseParams {
        match kind {
            DisturbanceKind::AmbientTemp => self.ambient_noise,
            DisturbanceKind::GroundTemp => self.ground_noise,
            DisturbanceKind::InternalGains => self.gains_noise,
            _ => self.solar_noise,
        }
    }

    fn gate(&self, kind: DisturbanceKind, hour: usize) -> f64 {
        match kind {
            DisturbanceKind::AmbientTemp | DisturbanceKind::GroundTemp => 1.0,
            DisturbanceKind::InternalGains => f64::from(u8::from(self.occupied(hour))),
            _ => self.solar_shape(hour),
        }
    }
}

fn facade_factor(kind: DisturbanceKind) -> f64 {
    match kind {
        DisturbanceKind::SolarSouth => 1.0,
        DisturbanceKind::SolarEast | DisturbanceKind::SolarWest => 0.55,
        DisturbanceKind::SolarNorth => 0.25,
        _ => 0.0,
    }
}

/// Generated test-period scenario plus the matching training history.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub scenario: Scenario,
    pub training: Vec<DisturbanceHistory<f64>>,
}

struct Weather {
    ambient: Vec<f64>,
    cloud: Vec<f64>,
}

fn daily_weather(params: &GeneratorParams, days: usize, rng: &mut ChaCha8Rng) -> Weather {
    let drift = Normal::new(0.0, params.ambient_drift.max(0.0)).expect("finite drift");
    let mut ambient = Vec::with_capacity(days);
    let mut level = 0.0;
    for _ in 0..days {
        level = 0.7 * level + drift.sample(rng);
        ambient.push(params.ambient_mean + level);
    }
    let cloud = (0..days).map(|_| rng.gen_range(0.4..=1.0)).collect();
    Weather { ambient, cloud }
}

fn forecast_value(params: &GeneratorParams, kind: DisturbanceKind, w: &Weather, k: usize) -> f64 {
    let (day, hour) = (k / STEPS_PER_DAY, k % STEPS_PER_DAY);
    match kind {
        DisturbanceKind::AmbientTemp => {
            w.ambient[day] + params.ambient_swing * (2.0 * PI * (hour as f64 - 15.0) / 24.0).cos()
        }
        DisturbanceKind::GroundTemp => params.ground_temp,
        DisturbanceKind::InternalGains => {
            params.gains_base + if params.occupied(hour) { params.gains_occupied } else { 0.0 }
        }
        solar => params.solar_peak * facade_factor(solar) * w.cloud[day] * params.solar_shape(hour),
    }
}

fn generate(
    params: &GeneratorParams,
    kinds: &[DisturbanceKind],
    hours: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let days = hours.div_ceil(STEPS_PER_DAY);
    let weather = daily_weather(params, days, rng);
    let mut forecast = Vec::with_capacity(kinds.len());
    let mut realization = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let noise = params.noise(kind);
        let mut e = 0.0;
        let mut f = Vec::with_capacity(hours);
        let mut r = Vec::with_capacity(hours);
        for k in 0..hours {
            let g = params.gate(kind, k % STEPS_PER_DAY);
            let n: f64 = StandardNormal.sample(rng);
            e = if g > 0.0 { noise.alpha * e + noise.sigma * g * n } else { 0.0 };
            let fk = forecast_value(params, kind, &weather, k);
            let mut rk = fk + e;
            if kind != DisturbanceKind::AmbientTemp && kind != DisturbanceKind::GroundTemp {
                rk = rk.max(0.0);
            }
            f.push(fk);
            r.push(rk);
        }
        forecast.push(f);
        realization.push(r);
    }
    (forecast, realization)
}

/// Seeded synthetic scenario covering `hours` hours, with a training history
/// of `params.training_days` days drawn from an independent stream.
pub fn synth_scenario(
    params: &GeneratorParams,
    kinds: &[DisturbanceKind],
    seed: u64,
    hours: usize,
) -> Result<SyntheticData, SimError> {
    if kinds.is_empty() {
        return Err(SimError::Scenario("no disturbances requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let (forecast, realization) = generate(params, kinds, hours, &mut rng);
    let scenario = Scenario {
        disturbances: kinds.to_vec(),
        forecast,
        realization,
        seed: Some(seed),
        params: Some(params.clone()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let train_hours = params.training_days * STEPS_PER_DAY;
    let (tf, tr) = generate(params, kinds, train_hours, &mut rng);
    let training = kinds
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            let days = |s: &[f64]| s.chunks(STEPS_PER_DAY).map(<[f64]>::to_vec).collect();
            DisturbanceHistory::new(kind.id(), days(&tf[i]), days(&tr[i]))
                .map_err(|e| SimError::Scenario(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SyntheticData { scenario, training })
}
