//! Dynamically-updating proportional fair: PF with a per-user exponent on
//! the average throughput that grows for users parked at the cell center.

use std::fmt;
use std::str::FromStr;

use super::pfa::{PfaState, TimeConstant, COLD_START_FLOOR};
use crate::error::{Error, Result};

pub const DEFAULT_THETA: u64 = 20;
pub const DEFAULT_B: f64 = 0.5;

/// Edge/center timer semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimerMode {
    /// Edge (`γ < δ`) counts `A` and clears `B`; center (`γ ≥ δ`) counts `B`
    /// and clears `A`.
    #[default]
    Text,
    /// The printed inequalities: `A` counts while `γ < δ`, `B` counts while
    /// `γ ≤ δ`. Both timers then track edge residence.
    Literal,
}

impl fmt::Display for TimerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimerMode::Text => "text",
            TimerMode::Literal => "literal",
        })
    }
}

impl FromStr for TimerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(TimerMode::Text),
            "literal" => Ok(TimerMode::Literal),
            _ => Err(format!("expected `text` or `literal`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpfaParams {
    pub alpha: f64,
    /// Cell SNR threshold δ, linear.
    pub delta: f64,
    /// Cell time threshold θ, slots.
    pub theta: u64,
    pub b: f64,
    pub timer_mode: TimerMode,
    /// Pins β for every user, bypassing the timer rule. Used to reproduce
    /// the degenerate PF / Max C/I cases.
    pub beta_override: Option<f64>,
}

impl DpfaParams {
    pub fn new(delta: f64) -> Self {
        DpfaParams {
            alpha: 1.0,
            delta,
            theta: DEFAULT_THETA,
            b: DEFAULT_B,
            timer_mode: TimerMode::Text,
            beta_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::config("dpfa_alpha", "must be >= 0"));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::config("dpfa_delta", "must be > 0"));
        }
        if self.theta < 1 {
            return Err(Error::config("dpfa_theta", "must be >= 1"));
        }
        if !(self.b > 0.0 && self.b <= 1.0) {
            return Err(Error::config("dpfa_b", "must be in (0, 1]"));
        }
        if let Some(beta) = self.beta_override {
            if !(beta >= 0.0) || !beta.is_finite() {
                return Err(Error::config("dpfa_beta", "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// `r^α / max(R, ε)^β`.
pub fn dpfa_priority(rate: f64, avg_throughput: f64, alpha: f64, beta: f64) -> f64 {
    rate.powf(alpha) / avg_throughput.max(COLD_START_FLOOR).powf(beta)
}

/// Advances the edge (`A`) and center (`B`) residence timers.
pub fn update_timers(
    edge: u64,
    center: u64,
    gamma: f64,
    delta: f64,
    mode: TimerMode,
) -> (u64, u64) {
    match mode {
        TimerMode::Text => {
            if gamma < delta {
                (edge + 1, 0)
            } else {
                (0, center + 1)
            }
        }
        TimerMode::Literal => {
            let a = if gamma >= delta { 0 } else { edge + 1 };
            let b = if gamma > delta { 0 } else { center + 1 };
            (a, b)
        }
    }
}

/// β for one user. The `β = 1` branch takes precedence where the two
/// conditions overlap, so center users get θ slots of grace.
pub fn update_beta(edge: u64, center: u64, gamma: f64, params: &DpfaParams) -> f64 {
    if edge >= params.theta || center <= params.theta {
        1.0
    } else {
        (gamma / params.delta).max(params.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpfaState {
    pub pfa: PfaState,
    pub params: DpfaParams,
    /// `A_k`: consecutive slots at the cell edge.
    pub edge_slots: Vec<u64>,
    /// `B_k`: consecutive slots at the cell center.
    pub center_slots: Vec<u64>,
    pub beta: Vec<f64>,
}

impl DpfaState {
    pub fn new(n_users: usize, time_constant: TimeConstant, params: DpfaParams) -> Result<Self> {
        params.validate()?;
        Ok(DpfaState {
            pfa: PfaState::new(n_users, time_constant)?,
            params,
            edge_slots: vec![0; n_users],
            center_slots: vec![0; n_users],
            beta: vec![1.0; n_users],
        })
    }

    fn effective_beta(&self, k: usize) -> f64 {
        self.params.beta_override.unwrap_or(self.beta[k])
    }

    pub fn priorities(&self, rates: &[f64]) -> Vec<f64> {
        rates
            .iter()
            .enumerate()
            .map(|(k, &r)| {
                dpfa_priority(
                    r,
                    self.pfa.avg_throughput[k],
                    self.params.alpha,
                    self.effective_beta(k),
                )
            })
            .collect()
    }

    /// Post-selection update: the EWMA for every user, then timers and β
    /// from this slot's SNR.
    pub fn update(&mut self, rates: &[f64], snrs: &[f64], chosen: usize) -> Result<()> {
        self.pfa.update(rates, chosen)?;
        for (k, &gamma) in snrs.iter().enumerate() {
            let (a, b) = update_timers(
                self.edge_slots[k],
                self.center_slots[k],
                gamma,
                self.params.delta,
                self.params.timer_mode,
            );
            self.edge_slots[k] = a;
            self.center_slots[k] = b;
            self.beta[k] = update_beta(a, b, gamma, &self.params);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::pfa::pfa_priority;
    use super::*;

    fn params() -> DpfaParams {
        DpfaParams::new(1.0)
    }

    #[test]
    fn degenerate_exponents() {
        for &(r, avg) in &[(10.0, 3.0), (250.0, 1000.0), (7.0, 0.2)] {
            assert_eq!(dpfa_priority(r, avg, 1.0, 1.0), pfa_priority(r, avg));
            assert_eq!(dpfa_priority(r, avg, 1.0, 0.0), r);
            assert_eq!(
                dpfa_priority(r, avg, 0.0, 1.0),
                1.0 / avg.max(COLD_START_FLOOR)
            );
        }
    }

    #[test]
    fn timer_examples() {
        let m = TimerMode::Text;
        assert_eq!(update_timers(5, 3, 2.0, 1.0, m), (0, 4));
        assert_eq!(update_timers(0, 7, 0.5, 1.0, m), (1, 0));
        // boundary belongs to the center
        assert_eq!(update_timers(4, 2, 1.0, 1.0, m), (0, 3));
    }

    #[test]
    fn literal_timers() {
        let m = TimerMode::Literal;
        assert_eq!(update_timers(2, 3, 0.5, 1.0, m), (3, 4));
        assert_eq!(update_timers(2, 3, 1.0, 1.0, m), (0, 4));
        assert_eq!(update_timers(2, 3, 2.0, 1.0, m), (0, 0));
    }

    #[test]
    fn beta_examples() {
        let p = params();
        let theta = p.theta;
        assert_eq!(update_beta(theta, 0, 0.1, &p), 1.0);
        assert_eq!(update_beta(theta, theta + 50, 9.0, &p), 1.0);
        assert_eq!(update_beta(0, theta + 5, 2.0, &p), 2.0);
        assert_eq!(update_beta(0, theta + 5, 0.2, &p), 0.5);
        // grace period: center users within θ slots stay at β = 1
        assert_eq!(update_beta(0, theta, 5.0, &p), 1.0);
    }

    #[test]
    fn punished_user_loses_priority() {
        let mut s = DpfaState::new(2, TimeConstant::Fixed(100.0), params()).unwrap();
        s.pfa.avg_throughput = vec![500.0, 500.0];
        let theta = s.params.theta;
        for _ in 0..=theta {
            s.update(&[1000.0, 1000.0], &[4.0, 0.5], 0).unwrap();
        }
        assert!(s.beta[0] > 1.0);
        assert_eq!(s.beta[1], 1.0);
        let p = s.priorities(&[1000.0, 1000.0]);
        assert!(p[1] > p[0]);
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        let mut p = params();
        p.b = 0.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.delta = -1.0;
        assert!(p.validate().is_err());
        let mut p = params();
        p.theta = 0;
        assert!(p.validate().is_err());
    }
}
