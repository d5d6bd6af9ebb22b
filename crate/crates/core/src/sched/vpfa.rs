//! Variance-based scheduling. Runs plain PF until the cumulative fairness
//! index settles, then switches permanently to picking the user whose
//! delivered data deviates most from the population.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use super::pfa::{PfaState, TimeConstant};
use crate::error::{Error, Result};
use crate::metrics::{fi_stability_update, StabilityMode};

pub const DEFAULT_S_FI: u64 = 100;
pub const DEFAULT_L_SC: u32 = 5;
pub const DEFAULT_WINDOW: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// Shortfall of cumulative delivered bits below the population mean.
    #[default]
    Deficit,
    /// Sample variance of per-slot delivered bits over a sliding window.
    Series,
}

impl fmt::Display for VarianceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarianceMode::Deficit => "deficit",
            VarianceMode::Series => "series",
        })
    }
}

impl FromStr for VarianceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "deficit" => Ok(VarianceMode::Deficit),
            "series" => Ok(VarianceMode::Series),
            _ => Err(format!("expected `deficit` or `series`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VpfaParams {
    /// Slots between FI evaluations (`S_fi`).
    pub s_fi: u64,
    /// Stability count that triggers the switch (`L_sc`).
    pub l_sc: u32,
    pub variance_mode: VarianceMode,
    /// Window length for [`VarianceMode::Series`].
    pub window: usize,
    pub stability_mode: StabilityMode,
}

impl Default for VpfaParams {
    fn default() -> Self {
        VpfaParams {
            s_fi: DEFAULT_S_FI,
            l_sc: DEFAULT_L_SC,
            variance_mode: VarianceMode::Deficit,
            window: DEFAULT_WINDOW,
            stability_mode: StabilityMode::Absolute,
        }
    }
}

impl VpfaParams {
    pub fn validate(&self) -> Result<()> {
        if self.s_fi < 1 {
            return Err(Error::config("vpfa_s_fi", "must be >= 1"));
        }
        if self.l_sc < 1 {
            return Err(Error::config("vpfa_l_sc", "must be >= 1"));
        }
        if self.window < 2 {
            return Err(Error::config("vpfa_window", "must be >= 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    PfWarmup,
    Variance,
}

/// Fixed-length history of one user's per-slot deliveries with running
/// moments.
#[derive(Debug, Clone, PartialEq)]
struct Window {
    samples: VecDeque<f64>,
    cap: usize,
    sum: f64,
    sum_sq: f64,
}

impl Window {
    fn new(cap: usize) -> Self {
        Window {
            samples: VecDeque::with_capacity(cap),
            cap,
            sum: 0.0,
            sum_sq: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        if self.samples.len() == self.cap {
            if let Some(old) = self.samples.pop_front() {
                self.sum -= old;
                self.sum_sq -= old * old;
            }
        }
        self.samples.push_back(x);
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn sample_variance(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let n = n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VpfaState {
    pub pfa: PfaState,
    pub params: VpfaParams,
    pub phase: Phase,
    /// FI stability counter `C_s`.
    pub stability_count: u32,
    pub last_fi: Option<f64>,
    /// Cumulative delivered bits per user.
    pub delivered_bits: Vec<f64>,
    windows: Vec<Window>,
}

impl VpfaState {
    pub fn new(n_users: usize, time_constant: TimeConstant, params: VpfaParams) -> Result<Self> {
        params.validate()?;
        Ok(VpfaState {
            pfa: PfaState::new(n_users, time_constant)?,
            windows: vec![Window::new(params.window); n_users],
            params,
            phase: Phase::PfWarmup,
            stability_count: 0,
            last_fi: None,
            delivered_bits: vec![0.0; n_users],
        })
    }

    pub fn n_users(&self) -> usize {
        self.delivered_bits.len()
    }

    /// Feeds one FI evaluation into the stability counter. Returns `true`
    /// when this evaluation triggers the switch to the variance phase.
    pub fn record_fi(&mut self, fi: f64) -> bool {
        if self.phase == Phase::Variance {
            return false;
        }
        let (count, last) = fi_stability_update(
            self.stability_count,
            self.last_fi.unwrap_or(fi),
            fi,
            self.params.stability_mode,
        );
        self.stability_count = count;
        self.last_fi = Some(last);
        if self.stability_count >= self.params.l_sc {
            self.phase = Phase::Variance;
            true
        } else {
            false
        }
    }

    pub fn priorities(&self, rates: &[f64]) -> Vec<f64> {
        match self.phase {
            Phase::PfWarmup => self.pfa.priorities(rates),
            Phase::Variance => (0..self.n_users()).map(|k| vpfa_score(self, k)).collect(),
        }
    }

    pub fn update(&mut self, rates: &[f64], chosen: usize) -> Result<()> {
        if self.phase == Phase::PfWarmup {
            self.pfa.update(rates, chosen)?;
        }
        self.delivered_bits[chosen] += rates[chosen];
        for (k, w) in self.windows.iter_mut().enumerate() {
            w.push(if k == chosen { rates[k] } else { 0.0 });
        }
        Ok(())
    }
}

/// Variance-phase selection score for `user`; higher is served first.
pub fn vpfa_score(state: &VpfaState, user: usize) -> f64 {
    match state.params.variance_mode {
        VarianceMode::Deficit => {
            let n = state.n_users() as f64;
            let mean = state.delivered_bits.iter().sum::<f64>() / n;
            mean - state.delivered_bits[user]
        }
        VarianceMode::Series => state.windows[user].sample_variance(),
    }
}
