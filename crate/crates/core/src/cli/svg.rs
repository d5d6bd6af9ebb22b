//! Static SVG charts for policy comparisons: two grouped bar charts (per-user
//! schedule counts and delivered bits) and two time-series line charts
//! (cumulative system throughput and fairness index).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::csv::{ensure_dir, fmt_sig6, write_file};
use crate::engine::Comparison;
use crate::error::{Error, Result};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const Y_TICKS: usize = 5;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

pub const FIGURE_FILES: [&str; 4] = [
    "fig1_schedule_counts.svg",
    "fig2_user_throughput.svg",
    "fig3_system_throughput.svg",
    "fig4_fairness_index.svg",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Smallest 1/2/5·10^k at or above `x`.
fn nice_ceiling(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    let base = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|&v| v >= x)
        .unwrap_or(10.0 * base)
}

struct Series<'a> {
    name: &'a str,
    values: Vec<(f64, f64)>,
}

struct Frame {
    title: String,
    x_label: String,
    y_label: String,
    x_range: (f64, f64),
    y_max: f64,
}

impl Frame {
    fn plot_w(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_h(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let span = if hi > lo { hi - lo } else { 1.0 };
        MARGIN_LEFT + (v - lo) / span * self.plot_w()
    }

    fn y(&self, v: f64) -> f64 {
        MARGIN_TOP + self.plot_h() * (1.0 - v / self.y_max)
    }

    fn open(&self, out: &mut String) {
        let _ = writeln!(
            out,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
            MARGIN_LEFT + self.plot_w() / 2.0,
            escape(&self.title)
        );
        let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + self.plot_h());
        let _ = writeln!(
            out,
            r#"<g class="axes" stroke="black"><line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{MARGIN_TOP:.2}" x2="{x0:.2}" y2="{y0:.2}"/></g>"#,
            x0 + self.plot_w()
        );
        for i in 0..=Y_TICKS {
            let v = self.y_max * i as f64 / Y_TICKS as f64;
            let y = self.y(v);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text class="ytick" x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                fmt_sig6(v)
            );
        }
        let _ = writeln!(
            out,
            r#"<text class="xlabel" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_LEFT + self.plot_w() / 2.0,
            HEIGHT - 20.0,
            escape(&self.x_label)
        );
        let cy = MARGIN_TOP + self.plot_h() / 2.0;
        let _ = writeln!(
            out,
            r#"<text class="ylabel" x="22" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 22 {cy:.2})">{}</text>"#,
            escape(&self.y_label)
        );
    }

    fn legend(&self, out: &mut String, names: &[&str]) {
        let x = WIDTH - MARGIN_RIGHT + 20.0;
        out.push_str("<g class=\"legend\">\n");
        for (i, name) in names.iter().enumerate() {
            let y = MARGIN_TOP + 10.0 + 22.0 * i as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{:.2}" width="14" height="14" fill="{}"/><text x="{:.2}" y="{y:.2}">{}</text>"#,
                y - 11.0,
                PALETTE[i % PALETTE.len()],
                x + 20.0,
                escape(name)
            );
        }
        out.push_str("</g>\n");
    }
}

/// Grouped bars: one group per user, one bar per series.
fn bar_chart(frame: &mut Frame, categories: &[String], series: &[Series]) -> String {
    let max = series
        .iter()
        .flat_map(|s| s.values.iter().map(|v| v.1))
        .fold(0.0, f64::max);
    frame.y_max = nice_ceiling(max);
    frame.x_range = (0.0, categories.len() as f64);

    let mut out = String::new();
    frame.open(&mut out);
    let group_w = frame.plot_w() / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (ci, label) in categories.iter().enumerate() {
        let gx = frame.x(ci as f64);
        let _ = writeln!(
            out,
            r#"<text class="xtick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            gx + group_w / 2.0,
            MARGIN_TOP + frame.plot_h() + 18.0,
            escape(label)
        );
    }
    for (si, s) in series.iter().enumerate() {
        let colour = PALETTE[si % PALETTE.len()];
        let _ = writeln!(out, r#"<g fill="{colour}">"#);
        for (ci, &(_, v)) in s.values.iter().enumerate() {
            let x = frame.x(ci as f64) + group_w * 0.1 + bar_w * si as f64;
            let y = frame.y(v);
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{:.2}"/>"#,
                frame.y(0.0) - y
            );
        }
        out.push_str("</g>\n");
    }
    let names: Vec<&str> = series.iter().map(|s| s.name).collect();
    frame.legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

fn line_chart(frame: &mut Frame, series: &[Series], fixed_y_max: Option<f64>) -> String {
    let points = || series.iter().flat_map(|s| s.values.iter());
    let x_max = points().map(|p| p.0).fold(0.0, f64::max);
    let y_max = points().map(|p| p.1).fold(0.0, f64::max);
    frame.y_max = fixed_y_max.unwrap_or_else(|| nice_ceiling(y_max));
    frame.x_range = (0.0, x_max.max(1.0));

    let mut out = String::new();
    frame.open(&mut out);
    for i in 0..=4 {
        let v = frame.x_range.1 * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text class="xtick" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            frame.x(v),
            MARGIN_TOP + frame.plot_h() + 18.0,
            fmt_sig6(v.round())
        );
    }
    for (si, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .values
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.x(x), frame.y(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            PALETTE[si % PALETTE.len()],
            pts.join(" ")
        );
    }
    let names: Vec<&str> = series.iter().map(|s| s.name).collect();
    frame.legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

fn frame(title: &str, x_label: &str, y_label: &str) -> Frame {
    Frame {
        title: title.into(),
        x_label: x_label.into(),
        y_label: y_label.into(),
        x_range: (0.0, 1.0),
        y_max: 1.0,
    }
}

/// Renders the four comparison figures as `(file name, svg text)` pairs.
pub fn render_figures(cmp: &Comparison) -> Result<Vec<(&'static str, String)>> {
    if cmp.rows.len() < 2 {
        return Err(Error::config(
            "policies",
            "figures need at least two policies",
        ));
    }
    let users = &cmp.rows[0].result.users;
    let categories: Vec<String> = users
        .iter()
        .map(|u| format!("{} ({} m)", u.user_id, fmt_sig6(u.distance_m)))
        .collect();

    let per_user = |f: &dyn Fn(&crate::engine::UserSummary) -> f64| -> Vec<Series> {
        cmp.rows
            .iter()
            .map(|row| Series {
                name: row.policy.as_str(),
                values: row
                    .result
                    .users
                    .iter()
                    .map(|u| (u.user_id as f64, f(u)))
                    .collect(),
            })
            .collect()
    };
    let over_time = |f: &dyn Fn(&crate::engine::SimResult) -> &[(u64, f64)]| -> Vec<Series> {
        cmp.rows
            .iter()
            .map(|row| Series {
                name: row.policy.as_str(),
                values: f(&row.result).iter().map(|&(s, v)| (s as f64, v)).collect(),
            })
            .collect()
    };

    let fig1 = bar_chart(
        &mut frame(
            "Schedule count per user",
            "user (distance)",
            "slots scheduled",
        ),
        &categories,
        &per_user(&|u| u.schedule_count as f64),
    );
    let fig2 = bar_chart(
        &mut frame(
            "Delivered bits per user",
            "user (distance)",
            "cumulative bits",
        ),
        &categories,
        &per_user(&|u| u.cumulative_bits),
    );
    let fig3 = line_chart(
        &mut frame("System throughput", "slot", "cumulative system bits"),
        &over_time(&|r| r.system_series()),
        None,
    );
    let fig4 = line_chart(
        &mut frame("Jain fairness index", "slot", "fairness index"),
        &over_time(&|r| r.fi_series()),
        Some(1.0),
    );
    Ok(FIGURE_FILES
        .into_iter()
        .zip([fig1, fig2, fig3, fig4])
        .collect())
}

pub fn emit_figures(cmp: &Comparison, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    render_figures(cmp)?
        .into_iter()
        .map(|(name, svg)| write_file(dir.join(name), &svg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_ceilings() {
        assert_eq!(nice_ceiling(0.93), 1.0);
        assert_eq!(nice_ceiling(1.0), 1.0);
        assert_eq!(nice_ceiling(1.2), 2.0);
        assert_eq!(nice_ceiling(3100.0), 5000.0);
        assert_eq!(nice_ceiling(0.0), 1.0);
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
