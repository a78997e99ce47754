//! CSV formats. Every file starts with a `# bdris <kind> v<version>` line; readers
//! reject files of another kind or version.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use bdris_core::channel::{Link, TapChannels};
use bdris_core::circuit::{FitPoint, LinearSusceptanceModel};
use bdris_core::optimizer::TracePoint;
use bdris_core::topology::SusceptanceAssignment;
use bdris_core::C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::harness::{CellKey, CellSummary, Outcome, SweepRecord};

pub const FORMAT_VERSION: u32 = 1;

fn header(kind: &str) -> String {
    format!("# bdris {kind} v{FORMAT_VERSION}")
}

fn write_rows<T: Serialize>(path: &Path, kind: &str, extra_comments: &[String], rows: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{}", header(kind))?;
    for line in extra_comments {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let first = text.lines().next().unwrap_or_default();
    ensure!(
        first == header(kind),
        "{}: expected header {:?}, found {:?}",
        path.display(),
        header(kind),
        first
    );
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    scheme: String,
    elements: usize,
    group_size: usize,
    power_dbm: f64,
    trial: usize,
    seed: u64,
    status: String,
    rate_bps_hz: f64,
    objective: f64,
    wall_time_s: f64,
    reason: String,
}

pub fn write_records(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let rows: Vec<RecordRow> = records
        .iter()
        .map(|r| {
            let (status, rate, objective, reason) = match &r.outcome {
                Outcome::Ok { rate, objective } => ("ok", *rate, *objective, String::new()),
                Outcome::Failed { reason } => ("failed", f64::NAN, f64::NAN, reason.clone()),
            };
            RecordRow {
                scheme: r.cell.scheme.label().into(),
                elements: r.cell.elements,
                group_size: r.cell.group_size,
                power_dbm: r.cell.power_dbm,
                trial: r.trial,
                seed: r.seed,
                status: status.into(),
                rate_bps_hz: rate,
                objective,
                wall_time_s: r.wall_time_s,
                reason,
            }
        })
        .collect();
    write_rows(path, "records", &[], &rows)
}

pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    read_rows::<RecordRow>(path, "records")?
        .into_iter()
        .map(|row| {
            let outcome = match row.status.as_str() {
                "ok" => Outcome::Ok {
                    rate: row.rate_bps_hz,
                    objective: row.objective,
                },
                "failed" => Outcome::Failed { reason: row.reason },
                other => bail!("unknown status {other:?}"),
            };
            Ok(SweepRecord {
                cell: CellKey {
                    scheme: row.scheme.parse()?,
                    elements: row.elements,
                    group_size: row.group_size,
                    power_dbm: row.power_dbm,
                },
                trial: row.trial,
                seed: row.seed,
                outcome,
                wall_time_s: row.wall_time_s,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct SummaryRow {
    scheme: String,
    elements: usize,
    group_size: usize,
    power_dbm: f64,
    trials: usize,
    failed: usize,
    mean_rate_bps_hz: f64,
    stderr_rate_bps_hz: f64,
    mean_objective: f64,
}

pub fn write_summary(path: &Path, summaries: &[CellSummary]) -> Result<()> {
    let rows: Vec<SummaryRow> = summaries
        .iter()
        .map(|s| SummaryRow {
            scheme: s.cell.scheme.label().into(),
            elements: s.cell.elements,
            group_size: s.cell.group_size,
            power_dbm: s.cell.power_dbm,
            trials: s.trials,
            failed: s.failed,
            mean_rate_bps_hz: s.mean_rate,
            stderr_rate_bps_hz: s.stderr_rate,
            mean_objective: s.mean_objective,
        })
        .collect();
    write_rows(path, "summary", &[], &rows)
}

pub fn read_summary(path: &Path) -> Result<Vec<CellSummary>> {
    read_rows::<SummaryRow>(path, "summary")?
        .into_iter()
        .map(|row| {
            Ok(CellSummary {
                cell: CellKey {
                    scheme: row.scheme.parse()?,
                    elements: row.elements,
                    group_size: row.group_size,
                    power_dbm: row.power_dbm,
                },
                trials: row.trials,
                failed: row.failed,
                mean_rate: row.mean_rate_bps_hz,
                stderr_rate: row.stderr_rate_bps_hz,
                mean_objective: row.mean_objective,
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct FitRow {
    f_hz: f64,
    slope: f64,
    intercept: f64,
    nmse_pointwise: f64,
}

/// Per-frequency fit diagnostics, with the model coefficients in a comment line.
pub fn write_fit_report(path: &Path, model: &LinearSusceptanceModel, points: &[FitPoint], nmse: f64) -> Result<()> {
    let rows: Vec<FitRow> = points
        .iter()
        .map(|p| FitRow {
            f_hz: p.f_hz,
            slope: p.slope,
            intercept: p.intercept,
            nmse_pointwise: p.nmse_pointwise,
        })
        .collect();
    let comment = format!(
        "alpha1_per_hz={:e} beta1={:e} alpha2_s_per_hz={:e} beta2_s={:e} f_c_hz={:e} b_min_s={:e} b_max_s={:e} nmse={:e}",
        model.alpha1, model.beta1, model.alpha2, model.beta2, model.f_c, model.b_min, model.b_max, nmse
    );
    write_rows(path, "fit-report", &[comment], &rows)
}

pub fn read_fit_report(path: &Path) -> Result<Vec<FitPoint>> {
    Ok(read_rows::<FitRow>(path, "fit-report")?
        .into_iter()
        .map(|r| FitPoint {
            f_hz: r.f_hz,
            slope: r.slope,
            intercept: r.intercept,
            nmse_pointwise: r.nmse_pointwise,
        })
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct ChannelRow {
    trial_id: usize,
    link: String,
    tap_index: usize,
    element_index: usize,
    re: f64,
    im: f64,
}

/// Delay-domain taps for several trials. The RT link uses element index 0.
pub fn write_channels(path: &Path, trials: &[(usize, TapChannels)]) -> Result<()> {
    let mut rows = Vec::new();
    for (trial_id, taps) in trials {
        let mut push = |link: Link, tap_index, element_index, v: C64| {
            rows.push(ChannelRow {
                trial_id: *trial_id,
                link: link.as_str().into(),
                tap_index,
                element_index,
                re: v.re,
                im: v.im,
            })
        };
        for (t, &v) in taps.rt.iter().enumerate() {
            push(Link::Rt, t, 0, v);
        }
        for (link, per_tap) in [(Link::Ri, &taps.ri), (Link::It, &taps.it)] {
            for (t, row) in per_tap.iter().enumerate() {
                for (m, &v) in row.iter().enumerate() {
                    push(link, t, m, v);
                }
            }
        }
    }
    write_rows(path, "channels", &[], &rows)
}

pub fn read_channels(path: &Path) -> Result<Vec<(usize, TapChannels)>> {
    let rows: Vec<ChannelRow> = read_rows(path, "channels")?;
    let mut by_trial: BTreeMap<usize, Vec<ChannelRow>> = BTreeMap::new();
    for r in rows {
        by_trial.entry(r.trial_id).or_default().push(r);
    }
    by_trial
        .into_iter()
        .map(|(id, rows)| {
            let n_taps = rows.iter().map(|r| r.tap_index + 1).max().unwrap_or(0);
            let elements = rows
                .iter()
                .filter(|r| r.link != Link::Rt.as_str())
                .map(|r| r.element_index + 1)
                .max()
                .unwrap_or(0);
            let mut taps = TapChannels::zeros(elements, n_taps);
            for r in rows {
                let v = C64::new(r.re, r.im);
                match r.link.parse::<Link>()? {
                    Link::Rt => taps.rt[r.tap_index] = v,
                    Link::Ri => taps.ri[r.tap_index][r.element_index] = v,
                    Link::It => taps.it[r.tap_index][r.element_index] = v,
                }
            }
            Ok((id, taps))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct AssignmentRow {
    group: usize,
    /// Packed lower-triangle index within the group.
    l: usize,
    b_c_s: f64,
}

pub fn write_assignment(path: &Path, assignment: &SusceptanceAssignment) -> Result<()> {
    let rows: Vec<AssignmentRow> = assignment
        .iter_groups()
        .enumerate()
        .flat_map(|(g, values)| {
            values
                .iter()
                .enumerate()
                .map(move |(l, &b_c_s)| AssignmentRow { group: g, l, b_c_s })
        })
        .collect();
    write_rows(
        path,
        "assignment",
        &[format!("group_size={}", assignment.group_size())],
        &rows,
    )
}

pub fn read_assignment(path: &Path, group_size: usize) -> Result<SusceptanceAssignment> {
    let rows: Vec<AssignmentRow> = read_rows(path, "assignment")?;
    let groups = rows.iter().map(|r| r.group + 1).max().unwrap_or(0);
    let mut values = vec![Vec::new(); groups];
    for r in rows {
        ensure!(
            values[r.group].len() == r.l,
            "assignment rows out of order at group {}",
            r.group
        );
        values[r.group].push(r.b_c_s);
    }
    Ok(SusceptanceAssignment::new(group_size, values)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    restart: usize,
    iteration: usize,
    objective: f64,
    grad_norm: f64,
}

pub fn write_trace(path: &Path, trace: &[TracePoint]) -> Result<()> {
    let rows: Vec<TraceRow> = trace
        .iter()
        .map(|t| TraceRow {
            restart: t.restart,
            iteration: t.iteration,
            objective: t.objective,
            grad_norm: t.grad_norm,
        })
        .collect();
    write_rows(path, "trace", &[], &rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<TracePoint>> {
    Ok(read_rows::<TraceRow>(path, "trace")?
        .into_iter()
        .map(|r| TracePoint {
            restart: r.restart,
            iteration: r.iteration,
            objective: r.objective,
            grad_norm: r.grad_norm,
        })
        .collect())
}
