use std::fs;
use std::path::Path;
use std::process::Command;

use cellsched::cli::{self, csv, svg};
use cellsched::engine::SimConfig;
use cellsched::Policy;

fn toy(n_users: usize, slots: u64) -> SimConfig {
    SimConfig {
        n_users,
        total_slots: slots,
        ..SimConfig::default()
    }
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn last_value(csv_text: &str) -> f64 {
    csv_text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn run_writes_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    cli::cmd_run(&toy(2, 300), dir.path()).unwrap();
    let per_user = read(&dir.path().join("per_user.csv"));
    assert_eq!(per_user.lines().count(), 3);
    assert_eq!(per_user.lines().next().unwrap(), csv::PER_USER_HEADER);
    assert_eq!(
        read(&dir.path().join("fi_series.csv"))
            .lines()
            .next()
            .unwrap(),
        "slot,fi"
    );
    let system = read(&dir.path().join("system.csv"));
    assert_eq!(system.lines().next().unwrap(), "slot,cumulative_bits");
    // total slots not a multiple of the cadence still gets a final sample
    assert!(system.lines().last().unwrap().starts_with("300,"));

    let echo = read(&dir.path().join("config.txt"));
    let back = cli::parse_config(&echo).unwrap();
    assert_eq!(back, toy(2, 300));
}

#[test]
fn csv_totals_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cmp = cli::cmd_compare(
        &toy(5, 2_000),
        &[Policy::Pfa, Policy::Dpfa, Policy::Vpfa],
        Policy::Pfa,
        dir.path(),
    )
    .unwrap();
    for row in &cmp.rows {
        let sub = dir.path().join(row.policy.as_str());
        let per_user = read(&sub.join("per_user.csv"));
        let sum: f64 = per_user
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
            .sum();
        let total = last_value(&read(&sub.join("system.csv")));
        // every printed value is rounded to 6 significant digits
        assert!((sum - total).abs() <= 1e-5 * total, "{sum} vs {total}");
    }
    let summary = read(&dir.path().join("summary.csv"));
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), csv::SUMMARY_HEADER);
    let pfa: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(pfa[0], "pfa");
    assert_eq!(pfa[3].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn figures_are_well_formed_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cmp = cli::cmd_figures(
        &toy(10, 1_000),
        &[Policy::Pfa, Policy::Dpfa, Policy::Vpfa],
        Policy::Pfa,
        dir.path(),
    )
    .unwrap();
    for name in svg::FIGURE_FILES {
        let text = read(&dir.path().join(name));
        let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let legend = doc
            .descendants()
            .find(|n| n.attribute("class") == Some("legend"))
            .expect("legend");
        let labels: Vec<&str> = legend.descendants().filter_map(|n| n.text()).collect();
        for row in &cmp.rows {
            assert!(labels.contains(&row.policy.as_str()), "{name} legend");
        }
        assert!(doc
            .descendants()
            .any(|n| n.attribute("class") == Some("xlabel")));
        assert!(doc
            .descendants()
            .any(|n| n.attribute("class") == Some("ylabel")));
    }

    let bars = read(&dir.path().join(svg::FIGURE_FILES[0]));
    let doc = roxmltree::Document::parse(&bars).unwrap();
    let n_bars = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("bar"))
        .count();
    assert_eq!(n_bars, 30);

    let fi = read(&dir.path().join(svg::FIGURE_FILES[3]));
    let doc = roxmltree::Document::parse(&fi).unwrap();
    let ticks: Vec<f64> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("ytick"))
        .map(|n| n.text().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ticks.first(), Some(&0.0));
    assert_eq!(ticks.last(), Some(&1.0));
}

#[test]
fn figures_need_two_policies() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cli::cmd_figures(&toy(3, 100), &[Policy::Pfa], Policy::Pfa, dir.path()).is_err());
}

#[test]
fn emission_is_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let r = cellsched::run(&toy(2, 500)).unwrap();
    csv::emit_result(&r, a.path()).unwrap();
    csv::emit_result(&r, b.path()).unwrap();
    for f in ["per_user.csv", "fi_series.csv", "system.csv"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn binary_exit_status() {
    let exe = env!("CARGO_BIN_EXE_cellsched");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.conf");
    fs::write(
        &cfg,
        "# toy\nn_users = 3\ntotal_slots = 400\npolicy = vpfa\n",
    )
    .unwrap();

    let ok = Command::new(exe)
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(dir.path().join("out/per_user.csv").exists());

    fs::write(&cfg, "policy = flying\n").unwrap();
    let bad = Command::new(exe)
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert_eq!(stderr.trim_end().lines().count(), 1);
    assert!(stderr.contains("policy"));
}

#[test]
fn out_dir_from_environment() {
    let exe = env!("CARGO_BIN_EXE_cellsched");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("from_env");
    let output = Command::new(exe)
        .args(["run", "--set", "n_users=2", "--set", "total_slots=50"])
        .env(cli::OUT_DIR_ENV, &out)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(out.join("system.csv").exists());
}
