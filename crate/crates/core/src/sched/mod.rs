//! Per-slot downlink schedulers. Every policy sees the same per-user rate
//! and SNR vectors and serves exactly one user.

mod dpfa;
mod pfa;
mod vpfa;

use std::fmt;
use std::str::FromStr;

pub use dpfa::{
    dpfa_priority, update_beta, update_timers, DpfaParams, DpfaState, TimerMode, DEFAULT_B,
    DEFAULT_THETA,
};
pub use pfa::{
    pfa_priority, update_avg_throughput, PfaState, TimeConstant, COLD_START_FLOOR,
    DEFAULT_TIME_CONSTANT,
};
pub use vpfa::{
    vpfa_score, Phase, VarianceMode, VpfaParams, VpfaState, DEFAULT_L_SC, DEFAULT_S_FI,
    DEFAULT_WINDOW,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    Pfa,
    Dpfa,
    MaxCi,
    Rr,
    Vpfa,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::Pfa,
        Policy::Dpfa,
        Policy::MaxCi,
        Policy::Rr,
        Policy::Vpfa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Pfa => "pfa",
            Policy::Dpfa => "dpfa",
            Policy::MaxCi => "maxci",
            Policy::Rr => "rr",
            Policy::Vpfa => "vpfa",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected pfa, dpfa, maxci, rr or vpfa)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerDecision {
    pub chosen_user: usize,
    pub priorities: Vec<f64>,
}

/// Arg-max with lowest-index tie-break.
pub fn select(priorities: Vec<f64>) -> Result<SchedulerDecision> {
    if priorities.is_empty() {
        return Err(Error::Scheduler("empty priority list".into()));
    }
    let mut best = 0;
    for (k, &p) in priorities.iter().enumerate() {
        if p.is_nan() {
            return Err(Error::Scheduler(format!("NaN priority for user {k}")));
        }
        if p > priorities[best] {
            best = k;
        }
    }
    Ok(SchedulerDecision {
        chosen_user: best,
        priorities,
    })
}

/// Policy state for one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheduler {
    Pfa(PfaState),
    Dpfa(DpfaState),
    MaxCi { n_users: usize },
    RoundRobin { n_users: usize, next: usize },
    Vpfa(VpfaState),
}

impl Scheduler {
    pub fn n_users(&self) -> usize {
        match self {
            Scheduler::Pfa(s) => s.avg_throughput.len(),
            Scheduler::Dpfa(s) => s.pfa.avg_throughput.len(),
            Scheduler::MaxCi { n_users } | Scheduler::RoundRobin { n_users, .. } => *n_users,
            Scheduler::Vpfa(s) => s.n_users(),
        }
    }

    pub fn policy(&self) -> Policy {
        match self {
            Scheduler::Pfa(_) => Policy::Pfa,
            Scheduler::Dpfa(_) => Policy::Dpfa,
            Scheduler::MaxCi { .. } => Policy::MaxCi,
            Scheduler::RoundRobin { .. } => Policy::Rr,
            Scheduler::Vpfa(_) => Policy::Vpfa,
        }
    }

    /// Picks one user for this slot and applies every state update.
    pub fn step(&mut self, rates: &[f64], snrs: &[f64]) -> Result<SchedulerDecision> {
        let n = self.n_users();
        if rates.len() != n || snrs.len() != n {
            return Err(Error::Scheduler(format!(
                "expected {n} rates and SNRs, got {} and {}",
                rates.len(),
                snrs.len()
            )));
        }
        if let Some(k) = rates.iter().position(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::Scheduler(format!(
                "invalid rate {} for user {k}",
                rates[k]
            )));
        }

        match self {
            Scheduler::Pfa(s) => {
                let d = select(s.priorities(rates))?;
                s.update(rates, d.chosen_user)?;
                Ok(d)
            }
            Scheduler::Dpfa(s) => {
                let d = select(s.priorities(rates))?;
                s.update(rates, snrs, d.chosen_user)?;
                Ok(d)
            }
            Scheduler::MaxCi { .. } => select(rates.to_vec()),
            Scheduler::RoundRobin { n_users, next } => {
                let chosen = *next;
                *next = (chosen + 1) % *n_users;
                // 1 for the user whose turn it is, 0 otherwise
                let priorities = (0..*n_users)
                    .map(|k| if k == chosen { 1.0 } else { 0.0 })
                    .collect();
                Ok(SchedulerDecision {
                    chosen_user: chosen,
                    priorities,
                })
            }
            Scheduler::Vpfa(s) => {
                let d = select(s.priorities(rates))?;
                s.update(rates, d.chosen_user)?;
                Ok(d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_argmax(v: &[f64]) -> usize {
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        v.iter().position(|&x| x == max).unwrap()
    }

    #[test]
    fn select_examples() {
        assert_eq!(select(vec![1.0, 3.0, 2.0]).unwrap().chosen_user, 1);
        assert_eq!(select(vec![2.0, 2.0]).unwrap().chosen_user, 0);
        assert!(select(vec![]).is_err());
        assert!(select(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn pfa_cold_start_picks_best_rate() {
        let mut s = Scheduler::Pfa(PfaState::new(2, TimeConstant::default()).unwrap());
        let d = s.step(&[10.0, 20.0], &[1.0, 1.0]).unwrap();
        assert_eq!(d.chosen_user, 1);
    }

    #[test]
    fn round_robin_cycles() {
        let mut s = Scheduler::RoundRobin {
            n_users: 3,
            next: 0,
        };
        let seq: Vec<usize> = (0..6)
            .map(|_| s.step(&[1.0; 3], &[1.0; 3]).unwrap().chosen_user)
            .collect();
        assert_eq!(seq, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn max_ci_picks_highest_rate() {
        let mut s = Scheduler::MaxCi { n_users: 3 };
        assert_eq!(s.step(&[5.0, 9.0, 7.0], &[1.0; 3]).unwrap().chosen_user, 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut s = Scheduler::MaxCi { n_users: 3 };
        assert!(s.step(&[1.0, 2.0], &[1.0, 1.0]).is_err());
        assert!(s.step(&[1.0, 2.0, 3.0], &[1.0]).is_err());
    }

    #[test]
    fn dpfa_forced_unit_exponents_matches_pfa() {
        let mut params = DpfaParams::new(1.0);
        params.beta_override = Some(1.0);
        let mut dpfa = Scheduler::Dpfa(DpfaState::new(3, TimeConstant::default(), params).unwrap());
        let mut pfa = Scheduler::Pfa(PfaState::new(3, TimeConstant::default()).unwrap());
        let rates = [
            [10.0, 20.0, 5.0],
            [30.0, 1.0, 8.0],
            [3.0, 3.0, 3.0],
            [9.0, 40.0, 2.0],
        ];
        for r in rates.iter().cycle().take(200) {
            let a = dpfa.step(r, &[1.0, 0.5, 2.0]).unwrap();
            let b = pfa.step(r, &[1.0, 0.5, 2.0]).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.as_str().parse::<Policy>().unwrap(), p);
        }
        assert!("flying".parse::<Policy>().is_err());
    }

    proptest! {
        #[test]
        fn select_matches_linear_scan(v in prop::collection::vec(-1e6f64..1e6, 1..10)) {
            prop_assert_eq!(select(v.clone()).unwrap().chosen_user, brute_argmax(&v));
        }

        #[test]
        fn pfa_argmax_scale_invariant(
            rates in prop::collection::vec(0.0f64..1e5, 10),
            avgs in prop::collection::vec(1.0f64..1e5, 10),
            c in 1.0f64..1e3,
        ) {
            let p1: Vec<f64> = rates.iter().zip(&avgs).map(|(&r, &a)| pfa_priority(r, a)).collect();
            let p2: Vec<f64> = rates.iter().zip(&avgs).map(|(&r, &a)| pfa_priority(r, a * c)).collect();
            prop_assert_eq!(brute_argmax(&p1), brute_argmax(&p2));
        }

        #[test]
        fn text_timers_never_both_nonzero(gammas in prop::collection::vec(0.01f64..10.0, 1..200)) {
            let (mut a, mut b) = (0u64, 0u64);
            for g in gammas {
                (a, b) = update_timers(a, b, g, 1.0, TimerMode::Text);
                prop_assert_eq!(a * b, 0);
            }
        }

        #[test]
        fn one_user_per_slot(
            rows in prop::collection::vec(prop::collection::vec(1.0f64..1e5, 4), 1..200),
            policy in prop::sample::select(Policy::ALL.to_vec()),
        ) {
            let mut s = match policy {
                Policy::Pfa => Scheduler::Pfa(PfaState::new(4, TimeConstant::default()).unwrap()),
                Policy::Dpfa => Scheduler::Dpfa(DpfaState::new(4, TimeConstant::default(), DpfaParams::new(2.0)).unwrap()),
                Policy::MaxCi => Scheduler::MaxCi { n_users: 4 },
                Policy::Rr => Scheduler::RoundRobin { n_users: 4, next: 0 },
                Policy::Vpfa => Scheduler::Vpfa(VpfaState::new(4, TimeConstant::default(), VpfaParams::default()).unwrap()),
            };
            let mut counts = [0usize; 4];
            for r in &rows {
                let d = s.step(r, &[1.0, 2.0, 3.0, 4.0]).unwrap();
                prop_assert!(d.chosen_user < 4);
                let best = d.priorities[d.chosen_user];
                prop_assert!(d.priorities.iter().all(|&p| p <= best));
                counts[d.chosen_user] += 1;
            }
            prop_assert_eq!(counts.iter().sum::<usize>(), rows.len());
        }
    }
}
