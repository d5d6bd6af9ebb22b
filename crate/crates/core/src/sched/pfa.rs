use crate::error::{Error, Result};

/// Floor applied to the average throughput in the priority denominator and
/// the initial value of every average, in bits/slot.
pub const COLD_START_FLOOR: f64 = 1.0;

pub const DEFAULT_TIME_CONSTANT: f64 = 1000.0;

/// EWMA window for the average-throughput update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeConstant {
    /// Constant window length in slots.
    Fixed(f64),
    /// Window grows with time: `elapsed slots + 1`.
    Growing,
}

impl Default for TimeConstant {
    fn default() -> Self {
        TimeConstant::Fixed(DEFAULT_TIME_CONSTANT)
    }
}

/// `r / max(R, ε)`.
pub fn pfa_priority(rate: f64, avg_throughput: f64) -> f64 {
    rate / avg_throughput.max(COLD_START_FLOOR)
}

/// One EWMA step of the average throughput.
pub fn update_avg_throughput(prev: f64, rate: f64, scheduled: bool, tc: f64) -> Result<f64> {
    if !(tc >= 1.0) {
        return Err(Error::config(
            "tc",
            format!("time constant must be >= 1, got {tc}"),
        ));
    }
    let decayed = (1.0 - 1.0 / tc) * prev;
    Ok(if scheduled {
        decayed + rate / tc
    } else {
        decayed
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfaState {
    /// `R_k` in bits/slot.
    pub avg_throughput: Vec<f64>,
    pub time_constant: TimeConstant,
    pub elapsed_slots: u64,
}

impl PfaState {
    pub fn new(n_users: usize, time_constant: TimeConstant) -> Result<Self> {
        if let TimeConstant::Fixed(tc) = time_constant {
            if !(tc >= 1.0) || !tc.is_finite() {
                return Err(Error::config("tc", format!("must be >= 1, got {tc}")));
            }
        }
        Ok(PfaState {
            avg_throughput: vec![COLD_START_FLOOR; n_users],
            time_constant,
            elapsed_slots: 0,
        })
    }

    /// Window length used by the next update.
    pub fn tc(&self) -> f64 {
        match self.time_constant {
            TimeConstant::Fixed(tc) => tc,
            TimeConstant::Growing => (self.elapsed_slots + 1) as f64,
        }
    }

    pub fn priorities(&self, rates: &[f64]) -> Vec<f64> {
        rates
            .iter()
            .zip(&self.avg_throughput)
            .map(|(&r, &avg)| pfa_priority(r, avg))
            .collect()
    }

    /// Applies the EWMA to every user; only `chosen` receives its rate.
    pub fn update(&mut self, rates: &[f64], chosen: usize) -> Result<()> {
        let tc = self.tc();
        for (k, (avg, &r)) in self.avg_throughput.iter_mut().zip(rates).enumerate() {
            *avg = update_avg_throughput(*avg, r, k == chosen, tc)?;
        }
        self.elapsed_slots += 1;
        Ok(())
    }
}
