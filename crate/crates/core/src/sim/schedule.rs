use serde::{Deserialize, Serialize};

use super::SimError;

pub const DEFAULT_TICK_SECS: f64 = 1.0;

/// Offered rate (pps) of every flow at every tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSchedule {
    tick_secs: f64,
    /// `rates[f][t]`
    rates: Vec<Vec<f64>>,
}

impl TrafficSchedule {
    pub fn new(tick_secs: f64, rates: Vec<Vec<f64>>) -> Result<Self, SimError> {
        if !(tick_secs > 0.0 && tick_secs.is_finite()) {
            return Err(SimError::Schedule(format!("tick length {tick_secs} must be positive")));
        }
        let horizon = rates.first().map_or(0, Vec::len);
        if horizon == 0 {
            return Err(SimError::Schedule("horizon must be positive".into()));
        }
        for (f, row) in rates.iter().enumerate() {
            if row.len() != horizon {
                return Err(SimError::Schedule(format!("flow {f} has {} ticks, expected {horizon}", row.len())));
            }
            if let Some(r) = row.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
                return Err(SimError::Schedule(format!("flow {f} has invalid rate {r}")));
            }
        }
        Ok(TrafficSchedule { tick_secs, rates })
    }

    pub fn tick_secs(&self) -> f64 {
        self.tick_secs
    }

    pub fn horizon(&self) -> usize {
        self.rates[0].len()
    }

    pub fn num_flows(&self) -> usize {
        self.rates.len()
    }

    pub fn rate(&self, flow: usize, tick: usize) -> f64 {
        self.rates[flow][tick]
    }

    /// Sum of all flows' rates at `tick`.
    pub fn aggregate(&self, tick: usize) -> f64 {
        self.rates.iter().map(|r| r[tick]).sum()
    }
}

/// `n_flows` identical flows whose rate is `initial * 2^floor(t / period)`.
pub fn doubling_schedule(n_flows: usize, initial: f64, period: usize, horizon: usize) -> Result<TrafficSchedule, SimError> {
    if n_flows == 0 {
        return Err(SimError::Schedule("need at least one flow".into()));
    }
    doubling_schedule_from(&vec![initial; n_flows], period, horizon)
}

/// Doubling schedule with a separate starting rate per flow.
pub fn doubling_schedule_from(initial: &[f64], period: usize, horizon: usize) -> Result<TrafficSchedule, SimError> {
    if period == 0 {
        return Err(SimError::Schedule("doubling period must be positive".into()));
    }
    if initial.iter().any(|&r| !(r > 0.0)) {
        return Err(SimError::Schedule("initial rates must be positive".into()));
    }
    let rates = initial
        .iter()
        .map(|&r0| (0..horizon).map(|t| r0 * 2f64.powi((t / period) as i32)).collect())
        .collect();
    TrafficSchedule::new(DEFAULT_TICK_SECS, rates)
}

pub fn constant_schedule(rates: &[f64], horizon: usize) -> Result<TrafficSchedule, SimError> {
    TrafficSchedule::new(DEFAULT_TICK_SECS, rates.iter().map(|&r| vec![r; horizon]).collect())
}
