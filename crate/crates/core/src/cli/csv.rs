//! CSV tables. Headers and column order are part of the public format.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{Comparison, SimResult};
use crate::error::{Error, Result};

pub const PER_USER_HEADER: &str = "user_id,distance_m,schedule_count,cumulative_bits";
pub const FI_SERIES_HEADER: &str = "slot,fi";
pub const SYSTEM_HEADER: &str = "slot,cumulative_bits";
pub const SUMMARY_HEADER: &str = "policy,fi,system_bits,drop_pct_vs_reference";

/// Decimal rendering with 6 significant digits, trailing zeros trimmed and
/// no exponent.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    let s = if decimals > 0 {
        let s = format!("{:.*}", decimals as usize, x);
        let s = s.trim_end_matches('0');
        s.trim_end_matches('.').to_string()
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn per_user_csv(result: &SimResult) -> String {
    let mut out = format!("{PER_USER_HEADER}\n");
    for u in &result.users {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            u.user_id,
            fmt_sig6(u.distance_m),
            u.schedule_count,
            fmt_sig6(u.cumulative_bits)
        );
    }
    out
}

pub fn fi_series_csv(result: &SimResult) -> String {
    let mut out = format!("{FI_SERIES_HEADER}\n");
    for &(slot, fi) in result.fi_series() {
        let _ = writeln!(out, "{slot},{}", fmt_sig6(fi));
    }
    out
}

pub fn system_csv(result: &SimResult) -> String {
    let mut out = format!("{SYSTEM_HEADER}\n");
    for &(slot, bits) in result.system_series() {
        let _ = writeln!(out, "{slot},{}", fmt_sig6(bits));
    }
    out
}

pub fn summary_csv(cmp: &Comparison) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for row in &cmp.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.policy,
            fmt_sig6(row.fi),
            fmt_sig6(row.system_bits),
            fmt_sig6(row.drop_pct)
        );
    }
    out
}

pub(crate) fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `per_user.csv`, `fi_series.csv` and `system.csv` into `dir`.
pub fn emit_result(result: &SimResult, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    Ok(vec![
        write_file(dir.join("per_user.csv"), &per_user_csv(result))?,
        write_file(dir.join("fi_series.csv"), &fi_series_csv(result))?,
        write_file(dir.join("system.csv"), &system_csv(result))?,
    ])
}

/// Writes `summary.csv` into `dir` and one sub-directory of per-run tables
/// per policy.
pub fn emit_comparison(cmp: &Comparison, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut files = vec![write_file(dir.join("summary.csv"), &summary_csv(cmp))?];
    for row in &cmp.rows {
        files.extend(emit_result(&row.result, &dir.join(row.policy.as_str()))?);
    }
    Ok(files)
}
