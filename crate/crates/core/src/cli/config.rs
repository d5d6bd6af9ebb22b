//! Flat `key = value` configuration format.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Keys not present take the defaults of [`SimConfig::default`]; unknown
//! and repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::{DeltaSpec, SimConfig};
use crate::error::{Error, Result};
use crate::sched::TimeConstant;

/// Every accepted key, in rendering order.
pub const KEYS: &[&str] = &[
    "tx_power",
    "carrier_freq",
    "bandwidth",
    "cell_radius",
    "shadowing_sigma",
    "bs_height",
    "ue_height",
    "env_class",
    "noise_figure",
    "slot_duration",
    "fast_fading",
    "n_users",
    "placement",
    "policy",
    "total_slots",
    "seed",
    "tc_mode",
    "tc",
    "dpfa_alpha",
    "dpfa_delta",
    "dpfa_theta",
    "dpfa_b",
    "dpfa_timer_mode",
    "dpfa_beta",
    "vpfa_s_fi",
    "vpfa_l_sc",
    "vpfa_variance_mode",
    "vpfa_window",
    "vpfa_stability_mode",
];

/// Where a value came from: a file line, or `None` for `--set` overrides.
type Entries<'a> = BTreeMap<&'a str, (Option<usize>, &'a str)>;

pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_config_with_overrides(text, &[])
}

/// Parses `text`, then applies `key=value` overrides on top.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<SimConfig> {
    let mut entries: Entries = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigLine {
            key: content.to_string(),
            line,
            msg: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        check_key(key, Some(line))?;
        if let Some((Some(prev), _)) = entries.get(key) {
            return Err(Error::ConfigLine {
                key: key.to_string(),
                line,
                msg: format!("already set on line {prev}"),
            });
        }
        entries.insert(key, (Some(line), value.trim()));
    }
    for ov in overrides {
        let (key, value) = ov
            .split_once('=')
            .ok_or_else(|| Error::config(ov.as_str(), "override must be `key=value`"))?;
        let key = key.trim();
        check_key(key, None)?;
        entries.insert(key, (None, value.trim()));
    }
    build(&entries)
}

fn check_key(key: &str, line: Option<usize>) -> Result<()> {
    if KEYS.contains(&key) {
        return Ok(());
    }
    let msg = "unknown key".to_string();
    Err(match line {
        Some(line) => Error::ConfigLine {
            key: key.to_string(),
            line,
            msg,
        },
        None => Error::config(key, msg),
    })
}

fn located(entries: &Entries, key: &str, msg: String) -> Error {
    match entries.get(key) {
        Some((Some(line), _)) => Error::ConfigLine {
            key: key.to_string(),
            line: *line,
            msg,
        },
        _ => Error::config(key, msg),
    }
}

fn get<T>(entries: &Entries, key: &str, slot: &mut T) -> Result<()>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    if let Some((_, raw)) = entries.get(key) {
        *slot = raw
            .parse::<T>()
            .map_err(|e| located(entries, key, format!("cannot parse `{raw}`: {e}")))?;
    }
    Ok(())
}

fn build(entries: &Entries) -> Result<SimConfig> {
    let mut c = SimConfig::default();
    let ch = &mut c.channel;
    get(entries, "tx_power", &mut ch.tx_power_dbm)?;
    get(entries, "carrier_freq", &mut ch.carrier_freq_mhz)?;
    get(entries, "bandwidth", &mut ch.bandwidth_hz)?;
    get(entries, "cell_radius", &mut ch.cell_radius_m)?;
    get(entries, "shadowing_sigma", &mut ch.shadowing_sigma_db)?;
    get(entries, "bs_height", &mut ch.bs_height_m)?;
    get(entries, "ue_height", &mut ch.ue_height_m)?;
    get(entries, "env_class", &mut ch.env_class)?;
    get(entries, "noise_figure", &mut ch.noise_figure_db)?;
    get(entries, "slot_duration", &mut ch.slot_duration_s)?;
    get(entries, "fast_fading", &mut ch.fast_fading_enabled)?;

    get(entries, "n_users", &mut c.n_users)?;
    get(entries, "placement", &mut c.placement)?;
    get(entries, "policy", &mut c.policy)?;
    get(entries, "total_slots", &mut c.total_slots)?;
    get(entries, "seed", &mut c.seed)?;

    let mut tc_mode = String::from("fixed");
    let mut tc = match c.time_constant {
        TimeConstant::Fixed(v) => v,
        TimeConstant::Growing => crate::sched::DEFAULT_TIME_CONSTANT,
    };
    get(entries, "tc_mode", &mut tc_mode)?;
    get(entries, "tc", &mut tc)?;
    c.time_constant = match tc_mode.as_str() {
        "fixed" => TimeConstant::Fixed(tc),
        "growing" => TimeConstant::Growing,
        other => {
            return Err(located(
                entries,
                "tc_mode",
                format!("expected `fixed` or `growing`, got `{other}`"),
            ))
        }
    };

    get(entries, "dpfa_alpha", &mut c.dpfa.alpha)?;
    get::<DeltaSpec>(entries, "dpfa_delta", &mut c.dpfa.delta)?;
    get(entries, "dpfa_theta", &mut c.dpfa.theta)?;
    get(entries, "dpfa_b", &mut c.dpfa.b)?;
    get(entries, "dpfa_timer_mode", &mut c.dpfa.timer_mode)?;
    let mut beta = String::from("none");
    get(entries, "dpfa_beta", &mut beta)?;
    c.dpfa.beta_override = match beta.as_str() {
        "none" => None,
        v => Some(v.parse::<f64>().map_err(|_| {
            located(
                entries,
                "dpfa_beta",
                format!("expected `none` or a number, got `{v}`"),
            )
        })?),
    };

    get(entries, "vpfa_s_fi", &mut c.vpfa.s_fi)?;
    get(entries, "vpfa_l_sc", &mut c.vpfa.l_sc)?;
    get(entries, "vpfa_variance_mode", &mut c.vpfa.variance_mode)?;
    get(entries, "vpfa_window", &mut c.vpfa.window)?;
    get(entries, "vpfa_stability_mode", &mut c.vpfa.stability_mode)?;

    c.validate().map_err(|e| match e {
        Error::Config { key, msg } => located(entries, &key, msg),
        other => other,
    })?;
    Ok(c)
}

/// Serialises every key so that `parse_config(&render(c)) == c`.
pub fn render(c: &SimConfig) -> String {
    let ch = &c.channel;
    let (tc_mode, tc) = match c.time_constant {
        TimeConstant::Fixed(v) => ("fixed", v),
        TimeConstant::Growing => ("growing", crate::sched::DEFAULT_TIME_CONSTANT),
    };
    let beta = c
        .dpfa
        .beta_override
        .map_or_else(|| "none".to_string(), |b| b.to_string());
    let values: [String; 29] = [
        ch.tx_power_dbm.to_string(),
        ch.carrier_freq_mhz.to_string(),
        ch.bandwidth_hz.to_string(),
        ch.cell_radius_m.to_string(),
        ch.shadowing_sigma_db.to_string(),
        ch.bs_height_m.to_string(),
        ch.ue_height_m.to_string(),
        ch.env_class.to_string(),
        ch.noise_figure_db.to_string(),
        ch.slot_duration_s.to_string(),
        ch.fast_fading_enabled.to_string(),
        c.n_users.to_string(),
        c.placement.to_string(),
        c.policy.to_string(),
        c.total_slots.to_string(),
        c.seed.to_string(),
        tc_mode.to_string(),
        tc.to_string(),
        c.dpfa.alpha.to_string(),
        c.dpfa.delta.to_string(),
        c.dpfa.theta.to_string(),
        c.dpfa.b.to_string(),
        c.dpfa.timer_mode.to_string(),
        beta,
        c.vpfa.s_fi.to_string(),
        c.vpfa.l_sc.to_string(),
        c.vpfa.variance_mode.to_string(),
        c.vpfa.window.to_string(),
        c.vpfa.stability_mode.to_string(),
    ];
    let mut out = String::new();
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value}");
    }
    out
}
