use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Hourly electricity price in CHF/kWh, indexed by hour-of-day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tariff<S> {
    pub price: Vec<S>,
}

impl<S: Scalar> Tariff<S> {
    /// Day/night tariff: 0.145 from 05:00 to 23:00, 0.097 otherwise.
    pub fn day_night() -> Self {
        Self {
            price: (0..24)
                .map(|h| S::lit(if (5..23).contains(&h) { 0.145 } else { 0.097 }))
                .collect(),
        }
    }

    pub fn at(&self, hour: usize) -> S {
        self.price[hour % 24]
    }

    pub fn is_valid(&self) -> bool {
        self.price.len() == 24 && self.price.iter().all(|p| *p > S::zero() && p.is_finite())
    }
}

/// Room temperature comfort band per hour-of-day, °C. `None` is unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortSchedule<S> {
    pub bounds: Vec<(Option<S>, Option<S>)>,
}

impl<S: Scalar> ComfortSchedule<S> {
    fn banded(inside: impl Fn(usize) -> bool, tight: (f64, f64), loose: (f64, f64)) -> Self {
        Self {
            bounds: (0..24)
                .map(|h| {
                    let (lb, ub) = if inside(h) { tight } else { loose };
                    (Some(S::lit(lb)), Some(S::lit(ub)))
                })
                .collect(),
        }
    }

    /// Winter bounds: [21, 25] °C from 05:00 to 23:00, [15, 30] °C at night.
    pub fn winter() -> Self {
        Self::banded(|h| (5..23).contains(&h), (21.0, 25.0), (15.0, 30.0))
    }

    /// Summer bounds: [20, 23] °C from 05:00 to 23:00, [15, 30] °C at night.
    pub fn summer() -> Self {
        Self::banded(|h| (5..23).contains(&h), (20.0, 23.0), (15.0, 30.0))
    }

    /// Commercial: [21, 25] °C from 09:00 to 19:00.
    pub fn commercial() -> Self {
        Self::banded(|h| (9..19).contains(&h), (21.0, 25.0), (15.0, 30.0))
    }

    /// Residential: [21, 25] °C from 06:00 to 09:00 and 19:00 to 23:00.
    pub fn residential() -> Self {
        Self::banded(
            |h| (6..9).contains(&h) || (19..23).contains(&h),
            (21.0, 25.0),
            (15.0, 30.0),
        )
    }

    pub fn unbounded() -> Self {
        Self {
            bounds: vec![(None, None); 24],
        }
    }

    pub fn at(&self, hour: usize) -> (Option<S>, Option<S>) {
        self.bounds[hour % 24]
    }

    pub fn is_valid(&self) -> bool {
        self.bounds.len() == 24
            && self.bounds.iter().all(|b| match b {
                (Some(l), Some(u)) => l <= u,
                _ => true,
            })
    }

    /// Kelvin violation of temperature `x` at `hour`.
    pub fn violation(&self, hour: usize, x: S) -> S {
        let (lb, ub) = self.at(hour);
        let below = lb.map_or(S::zero(), |l| (l - x).max(S::zero()));
        let above = ub.map_or(S::zero(), |u| (x - u).max(S::zero()));
        below.max(above)
    }
}
