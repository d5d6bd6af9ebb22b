//! Throughput accounting and the Jain fairness index.

use crate::error::{Error, Result};

/// FI change below which an evaluation counts as "stable".
pub const FI_STABILITY_DELTA: f64 = 0.01;

/// Jain fairness index `(Σx)² / (N·Σx²)`.
pub fn jain_index(throughputs: &[f64]) -> Result<f64> {
    if throughputs.is_empty() {
        return Err(Error::UndefinedFairness("empty throughput list"));
    }
    if throughputs.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain(
            "throughputs must be finite and non-negative".into(),
        ));
    }
    let n = throughputs.len() as f64;
    let sum: f64 = throughputs.iter().sum();
    if sum == 0.0 {
        return Err(Error::UndefinedFairness("all throughputs are zero"));
    }
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    // rounding can push the ratio a few ulps past the analytic bounds
    Ok((sum * sum / (n * sum_sq)).clamp(1.0 / n, 1.0))
}

/// How the FI stability test compares consecutive samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilityMode {
    /// `|last − fi| < 0.01`.
    #[default]
    Absolute,
    /// `last − fi < 0.01` exactly as written in the pseudocode; any increase
    /// counts as stable.
    Signed,
}

impl std::fmt::Display for StabilityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityMode::Absolute => "absolute",
            StabilityMode::Signed => "signed",
        })
    }
}

impl std::str::FromStr for StabilityMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(StabilityMode::Absolute),
            "signed" => Ok(StabilityMode::Signed),
            _ => Err(format!("expected `absolute` or `signed`, got `{s}`")),
        }
    }
}

/// One step of the FI stability counter. Returns `(C_s, last_fi)`.
///
/// A zero counter always restarts at 1, otherwise a stable sample
/// increments it and an unstable one resets it. `last_fi` becomes `fi`.
pub fn fi_stability_update(
    stability_count: u32,
    last_fi: f64,
    fi: f64,
    mode: StabilityMode,
) -> (u32, f64) {
    let next = if stability_count == 0 {
        1
    } else {
        let change = match mode {
            StabilityMode::Absolute => (last_fi - fi).abs(),
            StabilityMode::Signed => last_fi - fi,
        };
        if change < FI_STABILITY_DELTA {
            stability_count + 1
        } else {
            0
        }
    };
    (next, fi)
}

/// Per-run counters: delivered bits, schedule counts and sampled series.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsLog {
    pub per_user_bits: Vec<f64>,
    pub schedule_counts: Vec<u64>,
    pub system_bits: f64,
    /// `(slot, FI)` samples, slot numbering starts at 1.
    pub fi_series: Vec<(u64, f64)>,
    /// `(slot, cumulative system bits)` samples.
    pub system_series: Vec<(u64, f64)>,
    pub elapsed_slots: u64,
}

impl MetricsLog {
    pub fn new(n_users: usize) -> Self {
        MetricsLog {
            per_user_bits: vec![0.0; n_users],
            schedule_counts: vec![0; n_users],
            system_bits: 0.0,
            fi_series: Vec::new(),
            system_series: Vec::new(),
            elapsed_slots: 0,
        }
    }

    pub fn n_users(&self) -> usize {
        self.per_user_bits.len()
    }

    /// Credits one served slot to `chosen`.
    pub fn record_slot(&mut self, chosen: usize, delivered_bits: f64) -> Result<()> {
        if chosen >= self.n_users() {
            return Err(Error::Scheduler(format!(
                "user {chosen} out of range for {} users",
                self.n_users()
            )));
        }
        if !(delivered_bits >= 0.0) {
            return Err(Error::Domain(format!(
                "delivered bits must be >= 0, got {delivered_bits}"
            )));
        }
        self.per_user_bits[chosen] += delivered_bits;
        self.schedule_counts[chosen] += 1;
        self.system_bits += delivered_bits;
        self.elapsed_slots += 1;
        Ok(())
    }

    /// FI of cumulative per-user bits so far.
    pub fn fairness(&self) -> Result<f64> {
        jain_index(&self.per_user_bits)
    }

    /// Appends FI and system-throughput samples for the current slot.
    pub fn sample(&mut self) -> Result<f64> {
        let fi = self.fairness()?;
        self.fi_series.push((self.elapsed_slots, fi));
        self.system_series
            .push((self.elapsed_slots, self.system_bits));
        Ok(fi)
    }
}
