//! Command implementations behind the `cellsched` binary.

pub mod config;
pub mod csv;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{self, Comparison, SimConfig, SimResult};
use crate::error::{Error, Result};
use crate::sched::Policy;

pub use config::{parse_config, parse_config_with_overrides, render};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "CELLSCHED_OUT";
pub const DEFAULT_OUT_DIR: &str = "out";

/// Reads and resolves a config file (or defaults when `path` is `None`)
/// with `key=value` overrides applied last.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => String::new(),
    };
    parse_config_with_overrides(&text, overrides)
}

/// Parses a comma-separated policy list such as `pfa,dpfa,vpfa`.
pub fn parse_policies(list: &str) -> Result<Vec<Policy>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|e: String| Error::config("policies", e)))
        .collect()
}

fn write_config_echo(config: &SimConfig, resolved_delta: f64, dir: &Path) -> Result<PathBuf> {
    let text = format!(
        "# resolved dpfa_delta (linear) = {resolved_delta}\n{}",
        render(config)
    );
    csv::write_file(dir.join("config.txt"), &text)
}

/// `run`: one simulation, three CSV tables plus the resolved config.
pub fn cmd_run(config: &SimConfig, out_dir: &Path) -> Result<SimResult> {
    let result = engine::run(config)?;
    csv::emit_result(&result, out_dir)?;
    write_config_echo(config, result.resolved_delta, out_dir)?;
    Ok(result)
}

/// `compare`: one run per policy over the same channel and seed.
pub fn cmd_compare(
    config: &SimConfig,
    policies: &[Policy],
    reference: Policy,
    out_dir: &Path,
) -> Result<Comparison> {
    let cmp = engine::compare_policies(config, policies, reference)?;
    csv::emit_comparison(&cmp, out_dir)?;
    for row in &cmp.rows {
        write_config_echo(
            &row.result.config,
            row.result.resolved_delta,
            &out_dir.join(row.policy.as_str()),
        )?;
    }
    Ok(cmp)
}

/// `figures`: `compare` plus the four SVG charts.
pub fn cmd_figures(
    config: &SimConfig,
    policies: &[Policy],
    reference: Policy,
    out_dir: &Path,
) -> Result<Comparison> {
    if policies.len() < 2 {
        return Err(Error::config(
            "policies",
            "figures need at least two policies",
        ));
    }
    let cmp = cmd_compare(config, policies, reference, out_dir)?;
    svg::emit_figures(&cmp, out_dir)?;
    Ok(cmp)
}
