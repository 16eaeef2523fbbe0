//! Sweep outputs: a CSV table, a JSON manifest and a matplotlib script.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `point` | row index in output order |
//! | `experiment` | preset id |
//! | `series` | curve label |
//! | `grid_index`, `axis`, `x` | position on the swept grid |
//! | `L` .. `mode_cutoff`, `sum_tol` | every input parameter, named as in config files |
//! | `dalpha` | resolution step, empty when not requested |
//! | `delta_gamma` | interferometric phase difference |
//! | `eta_re`, `eta_im`, `eta_ref_re`, `eta_ref_im` | target and reference phases |
//! | `visibility` | `exp(-2 Im eta)` |
//! | `p_excite` | probe excitation probability |
//! | `resolution` | `R_dalpha`, empty when not requested |
//! | `entropy`, `pi_plus`, `pi_minus` | von Neumann entropy (bits) and eigenvalues |
//! | `A_I`, `A_z`, `A_x`, `A_y` | qubit observables |
//! | `trace_residual`, `hermiticity_residual`, `last_mode` | diagnostics |
//! | `high_excitation`, `negative_im_eta` | protocol flags, `0` or `1` |
//! | `status`, `error` | `ok` or `failed` with the message |
//!
//! Floats are written in the shortest form that parses back to the same
//! bits, so identical rows give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{Experiment, SweepRow, SweepSpec};

pub const COLUMNS: [&str; 43] = [
    "point",
    "experiment",
    "series",
    "grid_index",
    "axis",
    "x",
    "L",
    "c",
    "v",
    "kappa",
    "lambda_p_T",
    "lambda_q_over_lambda_p",
    "x0_over_L",
    "delta_over_omega",
    "A",
    "B",
    "alpha_abs",
    "theta",
    "beta_abs",
    "phi",
    "mode_cutoff",
    "sum_tol",
    "dalpha",
    "delta_gamma",
    "eta_re",
    "eta_im",
    "eta_ref_re",
    "eta_ref_im",
    "visibility",
    "p_excite",
    "resolution",
    "entropy",
    "pi_plus",
    "pi_minus",
    "A_I",
    "A_z",
    "A_x",
    "A_y",
    "trace_residual",
    "hermiticity_residual",
    "last_mode",
    "high_excitation",
    "negative_im_eta",
];

/// Round-trip exact decimal; NaN becomes an empty field.
fn float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

fn record(spec: &SweepSpec, row: &SweepRow) -> Vec<String> {
    let pt = &row.point;
    let p = &pt.params;
    let mut out = vec![
        pt.point.to_string(),
        spec.experiment.id().to_string(),
        pt.series.clone(),
        pt.grid_index.to_string(),
        spec.axis.name().to_string(),
        float(pt.x),
        float(p.length),
        float(p.light_speed),
        float(p.v),
        p.kappa.to_string(),
        float(p.lambda_p_t),
        float(p.lambda_q_over_lambda_p),
        float(p.x0_over_l),
        float(p.delta_over_omega),
        float(p.a),
        float(p.b),
        float(p.alpha_abs),
        float(p.theta),
        float(p.beta_abs),
        float(p.phi),
        p.mode_cutoff.to_string(),
        float(p.sum_tol),
        pt.dalpha.map(float).unwrap_or_default(),
    ];
    match &row.outcome {
        Ok(o) => {
            out.extend(
                [
                    o.delta_gamma,
                    o.eta_re,
                    o.eta_im,
                    o.eta_ref_re,
                    o.eta_ref_im,
                    o.visibility,
                    o.p_excite,
                    o.resolution,
                    o.entropy,
                    o.pi_plus,
                    o.pi_minus,
                    o.bloch.a_i,
                    o.bloch.a_z,
                    o.bloch.a_x,
                    o.bloch.a_y,
                    o.trace_residual,
                    o.hermiticity_residual,
                ]
                .map(float),
            );
            out.push(o.last_mode.to_string());
            out.push(u8::from(o.flags.high_excitation).to_string());
            out.push(u8::from(o.flags.negative_im_eta).to_string());
            out.push("ok".into());
            out.push(String::new());
        }
        Err(e) => {
            out.extend(std::iter::repeat_n(String::new(), COLUMNS.len() - out.len()));
            out.push("failed".into());
            out.push(e.clone());
        }
    }
    out
}

/// CSV text for the rows, header included.
pub fn csv_string(spec: &SweepSpec, rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidSweep(format!("csv: {e}"));
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(["status", "error"]);
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        w.write_record(record(spec, row)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidSweep(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub program: String,
    pub version: String,
    pub spec: SweepSpec,
    pub rows: usize,
    pub failed_rows: usize,
    pub flagged_rows: usize,
    pub threads: Option<usize>,
    pub wall_time_seconds: f64,
    pub csv: String,
    pub plot_script: String,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Paths of the files written by [`write_outputs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plot_script: PathBuf,
}

pub fn write_outputs(
    dir: &Path,
    spec: &SweepSpec,
    rows: &[SweepRow],
    threads: Option<usize>,
    wall_time: Duration,
) -> Result<OutputFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = spec.experiment.id();
    let files = OutputFiles {
        csv: dir.join(format!("{stem}.csv")),
        manifest: dir.join(format!("{stem}.json")),
        plot_script: dir.join(format!("plot_{}.py", stem.replace('-', "_"))),
    };
    let file_name = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
    fs::write(&files.csv, csv_string(spec, rows)?).map_err(|e| Error::io(&files.csv, e))?;
    fs::write(&files.plot_script, plot_script(spec, &file_name(&files.csv)))
        .map_err(|e| Error::io(&files.plot_script, e))?;
    let manifest = Manifest {
        program: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        rows: rows.len(),
        failed_rows: rows.iter().filter(|r| r.failed()).count(),
        flagged_rows: rows.iter().filter(|r| r.flagged()).count(),
        threads,
        wall_time_seconds: wall_time.as_secs_f64(),
        csv: file_name(&files.csv),
        plot_script: file_name(&files.plot_script),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest always serializes");
    fs::write(&files.manifest, json + "\n").map_err(|e| Error::io(&files.manifest, e))?;
    Ok(files)
}

/// Panel column, curve column, x column and y columns for each preset.
fn layout(spec: &SweepSpec) -> (&'static str, &'static str, &'static str, Vec<&'static str>) {
    match spec.experiment {
        Experiment::Fig2 => ("lambda_q_over_lambda_p", "series", "alpha_abs", vec!["delta_gamma"]),
        Experiment::Fig3 => ("series_amplitude", "series", "x0_over_L", vec!["delta_gamma"]),
        Experiment::Fig4 => ("lambda_q_over_lambda_p", "series", "delta_gamma", vec!["A_z", "A_x", "A_y"]),
        Experiment::Fig5to7 => ("lambda_q_over_lambda_p", "series", "delta_gamma", vec!["entropy"]),
        Experiment::FigResolution => ("lambda_q_over_lambda_p", "dalpha", "alpha_abs", vec!["resolution"]),
        Experiment::FigVisibility => ("lambda_q_over_lambda_p", "series", "alpha_abs", vec!["visibility"]),
        Experiment::Custom => ("lambda_q_over_lambda_p", "series", "x", vec!["delta_gamma"]),
    }
}

/// Standalone matplotlib script rendering the CSV in the preset's layout.
pub fn plot_script(spec: &SweepSpec, csv_name: &str) -> String {
    let (panel, curve, x, ys) = layout(spec);
    let ys = ys.iter().map(|y| format!("{y:?}")).collect::<Vec<_>>().join(", ");
    // Wide |alpha| grids need room at small amplitudes.
    let xscale = match spec.experiment {
        Experiment::Fig2 | Experiment::FigVisibility => "symlog",
        _ => "linear",
    };
    format!(
        r#"#!/usr/bin/env python3
# Renders {csv_name} ({id}). Usage: python3 {{script}} [output.png]
import csv
import sys
from collections import OrderedDict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
PANEL, CURVE, X, YS = "{panel}", "{curve}", "{x}", [{ys}]
XSCALE = "{xscale}"

rows = [r for r in csv.DictReader(open(HERE / "{csv_name}")) if r["status"] == "ok"]
for r in rows:
    r["series_amplitude"] = r["series"].split(" ")[0]

panels = OrderedDict()
for r in rows:
    panels.setdefault(r[PANEL], OrderedDict()).setdefault(r[CURVE], []).append(r)

fig, axes = plt.subplots(len(YS), max(len(panels), 1), squeeze=False,
                         figsize=(4.5 * max(len(panels), 1), 3.5 * len(YS)))
for j, (pkey, curves) in enumerate(panels.items()):
    for i, y in enumerate(YS):
        ax = axes[i][j]
        for ckey, pts in curves.items():
            ax.plot([float(p[X]) for p in pts], [float(p[y]) for p in pts], label=ckey or None)
        ax.set_xscale(XSCALE)
        ax.set_xlabel(X)
        ax.set_ylabel(y)
        ax.set_title(f"{{PANEL}} = {{pkey}}")
        if any(curves):
            ax.legend(fontsize="x-small")
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else str(HERE / "{stem}.png")
fig.savefig(out, dpi=150)
print(out)
"#,
        id = spec.experiment.id(),
        stem = spec.experiment.id(),
    )
}
