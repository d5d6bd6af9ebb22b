//! Slot-by-slot simulation driver and multi-policy comparisons.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, cost231_path_loss, db_to_linear, ChannelParams, Placement, UserLink};
use crate::error::{Error, Result};
use crate::metrics::MetricsLog;
use crate::sched::{
    DpfaParams, DpfaState, PfaState, Phase, Policy, Scheduler, TimeConstant, TimerMode, VpfaParams,
    VpfaState, DEFAULT_B, DEFAULT_THETA,
};

/// Fraction of the cell radius whose deterministic SNR becomes δ when the
/// threshold is left on `auto`.
pub const AUTO_DELTA_RADIUS_FRACTION: f64 = 0.6;

const GEOMETRY_STREAM: u64 = 1;
const FADING_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum DeltaSpec {
    /// SNR at 60% of the cell radius, no shadowing, no fading.
    #[default]
    Auto,
    Linear(f64),
}

impl fmt::Display for DeltaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSpec::Auto => f.write_str("auto"),
            DeltaSpec::Linear(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for DeltaSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(DeltaSpec::Auto);
        }
        s.parse::<f64>()
            .map(DeltaSpec::Linear)
            .map_err(|_| format!("expected `auto` or a linear SNR, got `{s}`"))
    }
}

/// DPFA settings before δ is resolved against the link budget.
#[derive(Debug, Clone, PartialEq)]
pub struct DpfaConfig {
    pub alpha: f64,
    pub delta: DeltaSpec,
    pub theta: u64,
    pub b: f64,
    pub timer_mode: TimerMode,
    pub beta_override: Option<f64>,
}

impl Default for DpfaConfig {
    fn default() -> Self {
        DpfaConfig {
            alpha: 1.0,
            delta: DeltaSpec::Auto,
            theta: DEFAULT_THETA,
            b: DEFAULT_B,
            timer_mode: TimerMode::Text,
            beta_override: None,
        }
    }
}

impl DpfaConfig {
    pub fn resolve(&self, delta: f64) -> DpfaParams {
        DpfaParams {
            alpha: self.alpha,
            delta,
            theta: self.theta,
            b: self.b,
            timer_mode: self.timer_mode,
            beta_override: self.beta_override,
        }
    }
}

/// Complete, self-describing experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub channel: ChannelParams,
    pub n_users: usize,
    pub placement: Placement,
    pub policy: Policy,
    pub time_constant: TimeConstant,
    pub dpfa: DpfaConfig,
    pub vpfa: VpfaParams,
    pub total_slots: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            channel: ChannelParams::default(),
            n_users: 10,
            placement: Placement::EqualSpacing,
            policy: Policy::Pfa,
            time_constant: TimeConstant::default(),
            dpfa: DpfaConfig::default(),
            vpfa: VpfaParams::default(),
            total_slots: 20_000,
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn with_policy(&self, policy: Policy) -> Self {
        SimConfig {
            policy,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.n_users < 1 {
            return Err(Error::config("n_users", "must be >= 1"));
        }
        if self.total_slots < 1 {
            return Err(Error::config("total_slots", "must be >= 1"));
        }
        if let TimeConstant::Fixed(tc) = self.time_constant {
            if !(tc >= 1.0) || !tc.is_finite() {
                return Err(Error::config("tc", "must be >= 1"));
            }
        }
        // placeholder δ; the real one is only known after the link budget
        let delta = match self.dpfa.delta {
            DeltaSpec::Auto => 1.0,
            DeltaSpec::Linear(d) => d,
        };
        self.dpfa.resolve(delta).validate()?;
        self.vpfa.validate()
    }

    /// DPFA threshold δ in linear units.
    pub fn resolve_delta(&self) -> Result<f64> {
        match self.dpfa.delta {
            DeltaSpec::Linear(d) => Ok(d),
            DeltaSpec::Auto => {
                let link = UserLink {
                    user_id: 0,
                    distance_m: AUTO_DELTA_RADIUS_FRACTION * self.channel.cell_radius_m,
                    shadowing_db: 0.0,
                    snr_linear: 0.0,
                };
                channel::snr(&self.channel, &link, 1.0)
            }
        }
    }

    fn build_scheduler(&self, delta: f64) -> Result<Scheduler> {
        let n = self.n_users;
        Ok(match self.policy {
            Policy::Pfa => Scheduler::Pfa(PfaState::new(n, self.time_constant)?),
            Policy::Dpfa => Scheduler::Dpfa(DpfaState::new(
                n,
                self.time_constant,
                self.dpfa.resolve(delta),
            )?),
            Policy::MaxCi => Scheduler::MaxCi { n_users: n },
            Policy::Rr => Scheduler::RoundRobin {
                n_users: n,
                next: 0,
            },
            Policy::Vpfa => {
                Scheduler::Vpfa(VpfaState::new(n, self.time_constant, self.vpfa.clone())?)
            }
        })
    }
}

/// Per-slot SNR and rate generator. Depends only on the channel section of
/// the config and the seed, never on the policy.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    params: ChannelParams,
    pub links: Vec<UserLink>,
    mean_snr: Vec<f64>,
    fading_rng: ChaCha8Rng,
    pub warnings: Vec<String>,
}

impl ChannelModel {
    pub fn new(config: &SimConfig) -> Result<Self> {
        Self::build(config, None)
    }

    /// Like [`ChannelModel::new`] but with explicit user distances in place
    /// of the configured placement. Shadowing is still drawn from the seed.
    pub fn with_distances(config: &SimConfig, distances: &[f64]) -> Result<Self> {
        if distances.len() != config.n_users {
            return Err(Error::config(
                "n_users",
                format!(
                    "{} distances given for {} users",
                    distances.len(),
                    config.n_users
                ),
            ));
        }
        Self::build(config, Some(distances))
    }

    fn build(config: &SimConfig, distances: Option<&[f64]>) -> Result<Self> {
        let params = &config.channel;
        let mut geo = ChaCha8Rng::seed_from_u64(config.seed);
        geo.set_stream(GEOMETRY_STREAM);
        let mut fading_rng = ChaCha8Rng::seed_from_u64(config.seed);
        fading_rng.set_stream(FADING_STREAM);

        let distances = match distances {
            Some(d) => d.to_vec(),
            None => channel::place_users(
                config.n_users,
                params.cell_radius_m,
                config.placement,
                &mut geo,
            )?,
        };

        let mut warnings = Vec::new();
        let mut links = Vec::with_capacity(distances.len());
        let mut mean_snr = Vec::with_capacity(distances.len());
        for (user_id, &distance_m) in distances.iter().enumerate() {
            if !(distance_m > 0.0 && distance_m <= params.cell_radius_m) {
                return Err(Error::config(
                    "distance",
                    format!("user {user_id} at {distance_m} m is outside (0, cell_radius]"),
                ));
            }
            let shadowing_db = channel::draw_shadowing(&mut geo, params.shadowing_sigma_db);
            if cost231_path_loss(distance_m, params)?.clamped {
                warnings.push(format!(
                    "user {user_id}: distance {distance_m} m clamped to {} m for path loss",
                    channel::MIN_DISTANCE_M
                ));
            }
            let link = UserLink {
                user_id,
                distance_m,
                shadowing_db,
                snr_linear: 0.0,
            };
            mean_snr.push(db_to_linear(channel::mean_snr_db(params, &link)?));
            links.push(link);
        }

        Ok(ChannelModel {
            params: params.clone(),
            links,
            mean_snr,
            fading_rng,
            warnings,
        })
    }

    /// Fills `snrs` and `rates` for the next slot.
    pub fn next_slot(&mut self, snrs: &mut [f64], rates: &mut [f64]) -> Result<()> {
        for k in 0..self.links.len() {
            let gain = channel::fading_gain(&mut self.fading_rng, &self.params);
            let gamma = self.mean_snr[k] * gain;
            self.links[k].snr_linear = gamma;
            snrs[k] = gamma;
            rates[k] = channel::instantaneous_rate(gamma, &self.params)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSummary {
    pub user_id: usize,
    pub distance_m: f64,
    pub shadowing_db: f64,
    pub schedule_count: u64,
    pub cumulative_bits: f64,
    /// Mean instantaneous rate over all slots, served or not.
    pub mean_rate: f64,
}

/// State captured when VPFA leaves the PF phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSwitch {
    /// First slot (1-based) served by variance selection.
    pub slot: u64,
    pub bits_at_switch: Vec<f64>,
    pub counts_at_switch: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    /// δ actually used by DPFA (linear).
    pub resolved_delta: f64,
    pub metrics: MetricsLog,
    pub users: Vec<UserSummary>,
    pub phase_switch: Option<PhaseSwitch>,
    /// Chosen user for every slot.
    pub schedule: Vec<usize>,
    pub warnings: Vec<String>,
}

impl SimResult {
    pub fn fairness(&self) -> f64 {
        self.metrics.fairness().unwrap_or(0.0)
    }

    pub fn system_bits(&self) -> f64 {
        self.metrics.system_bits
    }

    pub fn phase_switch_slot(&self) -> Option<u64> {
        self.phase_switch.as_ref().map(|p| p.slot)
    }

    pub fn fi_series(&self) -> &[(u64, f64)] {
        &self.metrics.fi_series
    }

    pub fn system_series(&self) -> &[(u64, f64)] {
        &self.metrics.system_series
    }
}

pub fn run(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let model = ChannelModel::new(config)?;
    simulate(config, model)
}

/// Runs with explicit user distances instead of the configured placement.
pub fn run_at(config: &SimConfig, distances: &[f64]) -> Result<SimResult> {
    config.validate()?;
    let model = ChannelModel::with_distances(config, distances)?;
    simulate(config, model)
}

fn simulate(config: &SimConfig, mut model: ChannelModel) -> Result<SimResult> {
    let n = config.n_users;
    let resolved_delta = config.resolve_delta()?;
    let mut scheduler = config.build_scheduler(resolved_delta)?;
    let mut metrics = MetricsLog::new(n);
    let mut schedule = Vec::with_capacity(config.total_slots as usize);
    let mut rate_sums = vec![0.0; n];
    let mut snrs = vec![0.0; n];
    let mut rates = vec![0.0; n];
    let mut phase_switch = None;
    let cadence = config.vpfa.s_fi;

    for slot in 1..=config.total_slots {
        model.next_slot(&mut snrs, &mut rates)?;
        for (sum, r) in rate_sums.iter_mut().zip(&rates) {
            *sum += r;
        }
        let decision = scheduler.step(&rates, &snrs)?;
        let chosen = decision.chosen_user;
        metrics.record_slot(chosen, rates[chosen])?;
        schedule.push(chosen);

        if slot % cadence == 0 {
            let fi = metrics.sample()?;
            if let Scheduler::Vpfa(state) = &mut scheduler {
                if state.phase == Phase::PfWarmup && state.record_fi(fi) {
                    phase_switch = Some(PhaseSwitch {
                        slot: slot + 1,
                        bits_at_switch: metrics.per_user_bits.clone(),
                        counts_at_switch: metrics.schedule_counts.clone(),
                    });
                }
            }
        } else if slot == config.total_slots {
            metrics.sample()?;
        }
    }

    let slots = config.total_slots as f64;
    let users = model
        .links
        .iter()
        .enumerate()
        .map(|(k, link)| UserSummary {
            user_id: k,
            distance_m: link.distance_m,
            shadowing_db: link.shadowing_db,
            schedule_count: metrics.schedule_counts[k],
            cumulative_bits: metrics.per_user_bits[k],
            mean_rate: rate_sums[k] / slots,
        })
        .collect();

    Ok(SimResult {
        config: config.clone(),
        resolved_delta,
        metrics,
        users,
        phase_switch,
        schedule,
        warnings: model.warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: Policy,
    pub fi: f64,
    pub system_bits: f64,
    /// `(T_ref − T) / T_ref · 100`.
    pub drop_pct: f64,
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub reference: Policy,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, policy: Policy) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

pub fn drop_pct(reference_bits: f64, bits: f64) -> f64 {
    (reference_bits - bits) / reference_bits * 100.0
}

/// Runs every config (in parallel) and tabulates them against `reference`.
/// All configs must share the channel, users, placement, seed and length.
pub fn run_comparison(configs: &[SimConfig], reference: Policy) -> Result<Comparison> {
    let first = configs
        .first()
        .ok_or_else(|| Error::config("policies", "no policies to compare"))?;
    for (i, c) in configs.iter().enumerate() {
        let mismatch = if c.channel != first.channel {
            Some("channel")
        } else if c.n_users != first.n_users {
            Some("n_users")
        } else if c.placement != first.placement {
            Some("placement")
        } else if c.seed != first.seed {
            Some("seed")
        } else if c.total_slots != first.total_slots {
            Some("total_slots")
        } else {
            None
        };
        if let Some(key) = mismatch {
            return Err(Error::config(
                key,
                format!("comparison entry {i} differs from entry 0"),
            ));
        }
        if configs[..i].iter().any(|o| o.policy == c.policy) {
            return Err(Error::config(
                "policies",
                format!("policy `{}` listed twice", c.policy),
            ));
        }
    }
    if !configs.iter().any(|c| c.policy == reference) {
        return Err(Error::config(
            "reference",
            format!("reference policy `{reference}` is not among the compared policies"),
        ));
    }

    let results: Vec<Result<SimResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let ref_bits = results
        .iter()
        .find(|r| r.config.policy == reference)
        .map(|r| r.system_bits())
        .unwrap_or(0.0);
    let rows = results
        .into_iter()
        .map(|result| ComparisonRow {
            policy: result.config.policy,
            fi: result.fairness(),
            system_bits: result.system_bits(),
            drop_pct: drop_pct(ref_bits, result.system_bits()),
            result,
        })
        .collect();
    Ok(Comparison { reference, rows })
}

/// Convenience wrapper: one config per policy, everything else from `base`.
pub fn compare_policies(
    base: &SimConfig,
    policies: &[Policy],
    reference: Policy,
) -> Result<Comparison> {
    let configs: Vec<SimConfig> = policies.iter().map(|&p| base.with_policy(p)).collect();
    run_comparison(&configs, reference)
}
