//! Generation of a standalone matplotlib script for sweep output.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rates::{Csi, Receiver};

use super::config::SweepKind;
use super::csv::format_number;
use super::sweep::SweepRow;

/// Restricts which curves are drawn. Empty lists mean "everything".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotFilter {
    pub receivers: Vec<Receiver>,
    pub csi: Vec<Csi>,
    pub k_db: Vec<f64>,
}

impl PlotFilter {
    fn keeps(&self, row: &SweepRow) -> bool {
        (self.receivers.is_empty() || self.receivers.contains(&row.receiver))
            && (self.csi.is_empty() || self.csi.contains(&row.csi))
            && (self.k_db.is_empty() || self.k_db.iter().any(|k| k.to_bits() == row.k_db.to_bits()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// CSV file name, resolved relative to the script's own directory.
    pub csv_name: String,
    pub kind: SweepKind,
    pub filter: PlotFilter,
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

/// Builds the script text, or fails if the filter leaves no rows.
pub fn plot_script(rows: &[SweepRow], options: &PlotOptions) -> Result<String> {
    let kept: Vec<&SweepRow> = rows.iter().filter(|r| options.filter.keeps(r)).collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument("plot filter selects no rows".into()));
    }
    let (x_column, x_label) = match options.kind {
        SweepKind::KSweep => ("K_dB", "Ricean K-factor (dB)"),
        SweepKind::MSweep | SweepKind::AlphaSweep => ("M", "Number of BS antennas M"),
    };
    // (receiver, csi, K) ordered by first appearance
    let mut seen = BTreeSet::new();
    let mut curves = Vec::new();
    for r in &kept {
        let k = match options.kind {
            SweepKind::KSweep => "None".to_string(),
            _ => py_str(&format_number(r.k_db)),
        };
        let key = (r.receiver.to_string(), r.csi.to_string(), k);
        if seen.insert(key.clone()) {
            curves.push(key);
        }
    }
    let curve_lines: String = curves
        .iter()
        .map(|(rx, csi, k)| format!("    ({}, {}, {}),\n", py_str(rx), py_str(csi), k))
        .collect();

    Ok(format!(
        r#"#!/usr/bin/env python3
"""Sum rate versus {x_label}, regenerated from the sweep CSV."""
import csv
import math
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV_PATH = os.path.join(HERE, {csv})
X_COLUMN = {x_column:?}

# (receiver, csi, K_dB); K_dB is None when K is the x axis
CURVES = [
{curve_lines}]

STYLE = {{
    ("mrc", "perfect"): ("tab:blue", "o"),
    ("mrc", "imperfect"): ("tab:cyan", "s"),
    ("zf", "perfect"): ("tab:red", "^"),
    ("zf", "imperfect"): ("tab:orange", "v"),
}}
LINES = ["-", "--", ":", "-."]


def load_rows(path):
    with open(path, newline="") as handle:
        return list(csv.DictReader(handle))


def curve_points(rows, receiver, csi, k_db):
    points = []
    for row in rows:
        if row["receiver"] != receiver or row["csi"] != csi:
            continue
        if k_db is not None and row["K_dB"] != k_db:
            continue
        x = float(row[X_COLUMN])
        if math.isfinite(x):
            points.append((x, float(row["rate_sim"]), float(row["rate_approx"])))
    return sorted(points)


def k_label(k_db):
    value = float(k_db)
    return "Rayleigh" if value == -math.inf else f"K = {{value:g}} dB"


def main():
    rows = load_rows(CSV_PATH)
    k_values = []
    for _, _, k_db in CURVES:
        if k_db is not None and k_db not in k_values:
            k_values.append(k_db)
    fig, ax = plt.subplots(figsize=(9, 5))
    for receiver, csi, k_db in CURVES:
        points = curve_points(rows, receiver, csi, k_db)
        if not points:
            continue
        xs, sim, approx = zip(*points)
        color, marker = STYLE[(receiver, csi)]
        line = "-"
        label = f"{{receiver.upper()}} {{csi}}"
        if k_db is not None:
            line = LINES[k_values.index(k_db) % len(LINES)]
            label += ", " + k_label(k_db)
        ax.plot(xs, sim, marker, color=color, fillstyle="none", label=label + " (sim)")
        ax.plot(xs, approx, line, color=color, label=label + " (approx)")
    ax.set_xlabel({x_label:?})
    ax.set_ylabel("Sum rate (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small", loc="center left", bbox_to_anchor=(1.02, 0.5))
    fig.tight_layout()
    target = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(os.path.abspath(__file__))[0] + ".png"
    fig.savefig(target, dpi=120)


if __name__ == "__main__":
    main()
"#,
        csv = py_str(&options.csv_name),
    ))
}

/// Writes the plotting script to `path`. Nothing is written on error.
pub fn emit_plot_script(rows: &[SweepRow], path: &Path, options: &PlotOptions) -> Result<()> {
    let script = plot_script(rows, options)?;
    fs::write(path, script)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<SweepRow> {
        let mut out = Vec::new();
        for m in [50, 100] {
            for k_db in [f64::NEG_INFINITY, 6.0] {
                for receiver in Receiver::ALL {
                    for csi in Csi::ALL {
                        out.push(SweepRow {
                            scenario_id: 0,
                            antennas: m,
                            users: 10,
                            k_db,
                            p_u_db: 10.0,
                            alpha: 0.0,
                            receiver,
                            csi,
                            rate_sim: 1.0,
                            rate_approx: 1.0,
                            rate_det_equiv: 1.0,
                            stderr: 0.0,
                            trials: 100,
                            discarded: 0,
                            seed: 1,
                        });
                    }
                }
            }
        }
        out
    }

    fn options(filter: PlotFilter) -> PlotOptions {
        PlotOptions {
            csv_name: "fig1.csv".into(),
            kind: SweepKind::MSweep,
            filter,
        }
    }

    #[test]
    fn one_curve_per_combination() {
        let script = plot_script(&rows(), &options(PlotFilter::default())).unwrap();
        let block = script
            .split("CURVES = [")
            .nth(1)
            .unwrap()
            .split(']')
            .next()
            .unwrap();
        assert_eq!(
            block
                .lines()
                .filter(|l| l.trim_start().starts_with('('))
                .count(),
            8
        );
        assert!(script.contains("\"fig1.csv\""));
        assert!(script.contains("(\"zf\", \"imperfect\", \"-inf\")"));
    }

    #[test]
    fn empty_filter_intersection_writes_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.py");
        let filter = PlotFilter {
            k_db: vec![3.0],
            ..Default::default()
        };
        assert!(emit_plot_script(&rows(), &path, &options(filter)).is_err());
        assert!(!path.exists());

        let filter = PlotFilter {
            receivers: vec![Receiver::Zf],
            csi: vec![Csi::Perfect],
            k_db: vec![],
        };
        emit_plot_script(&rows(), &path, &options(filter)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("(\"zf\", \"perfect\"").count(), 3);
    }
}
