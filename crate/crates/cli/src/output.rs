//! CSV, JSON report, gnuplot script and timing sidecar. Only the sidecar
//! depends on the run; the other three are byte-identical for equal
//! configs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::commands::PlotSpec;
use crate::sweep::{PointStatus, SweepReport, SweepTiming};

fn header_line(r: &SweepReport) -> String {
    format!(
        "# fingerprint={} seed={} version={} command={}\n",
        r.fingerprint, r.seed, r.version, r.command
    )
}

fn status_text(s: PointStatus) -> &'static str {
    match s {
        PointStatus::Ok => "ok",
        PointStatus::Violation => "violation",
        PointStatus::Capacity => "capacity",
        PointStatus::Invalid => "invalid",
        PointStatus::Inconsistent => "inconsistent",
    }
}

pub fn render_csv(r: &SweepReport) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head: Vec<&str> = r.param_columns.iter().map(String::as_str).collect();
    head.extend(r.result_columns.iter().map(String::as_str));
    head.push("status");
    w.write_record(&head)?;
    let blank = vec![String::new(); r.result_columns.len()];
    for p in &r.points {
        let status = status_text(p.status);
        match &p.outcome {
            Some(o) => {
                for row in &o.rows {
                    w.write_record(p.params.iter().chain(row).map(String::as_str).chain([status]))?;
                }
            }
            None => {
                w.write_record(p.params.iter().chain(&blank).map(String::as_str).chain([status]))?;
            }
        }
    }
    let body = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    Ok(header_line(r) + &String::from_utf8(body).map_err(io::Error::other)?)
}

pub fn render_json(r: &SweepReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes") + "\n"
}

pub fn render_plot(r: &SweepReport, spec: &PlotSpec) -> String {
    let mut s = header_line(r);
    s += "set datafile separator ','\n";
    s += "set datafile commentschars '#'\n";
    s += "set key autotitle columnhead\n";
    s += "set terminal pngcairo size 900,600\n";
    s += &format!("set output '{}.png'\n", r.command);
    if spec.logx {
        s += "set logscale x\n";
    }
    if spec.logy {
        s += "set logscale y\n";
    }
    s += &format!("set xlabel '{}'\n", spec.x);
    let plots: Vec<String> = spec
        .ys
        .iter()
        .map(|y| format!("'{}.csv' using (column('{}')):(column('{}')) with points title '{}'", r.command, spec.x, y, y))
        .collect();
    s += &format!("plot {}\n", plots.join(", \\\n     "));
    s
}

pub fn write_all(dir: &Path, r: &SweepReport, timing: &SweepTiming, spec: &PlotSpec) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (format!("{}.csv", r.command), render_csv(r)?),
        (format!("{}.json", r.command), render_json(r)),
        (format!("{}.gp", r.command), render_plot(r, spec)),
        (
            format!("{}.timing.json", r.command),
            serde_json::to_string_pretty(timing).expect("timing serializes") + "\n",
        ),
    ];
    let mut out = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text)?;
        out.push(path);
    }
    Ok(out)
}
