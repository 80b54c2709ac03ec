//! Post-run report: a plain-text summary plus SVG figures.
//!
//! `write_report` drops `summary.txt`, `forces.svg`, `torques.svg`, and
//! `rates.svg` into a directory (figures only for channels the trace
//! actually carries, so subset traces still report cleanly).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::io::plot::{line_plot, Series};
use crate::sim::{Channel, Trace};

/// Mean of the final 10% of samples (at least two), the |value − mean| band
/// a channel is judged settled against, and the settling time if any.
fn asymptote_and_settling(time: &[f64], v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len();
    let tail = (n / 10).max(2).min(n);
    let asym = v[n - tail..].iter().sum::<f64>() / tail as f64;
    if asym.abs() < 1e-12 {
        // A near-zero asymptote has no meaningful 1% band.
        return (asym, None);
    }
    let band = 0.01 * asym.abs();
    let last_outside = (0..n).rev().find(|&i| (v[i] - asym).abs() > band);
    let settle = match last_outside {
        None => Some(time[0]),
        Some(i) if i + 1 < n => Some(time[i + 1]),
        Some(_) => None,
    };
    (asym, settle)
}

fn render_summary(trace: &Trace) -> String {
    let mut out = String::new();
    let n = trace.len();
    let _ = writeln!(out, "samples: {n}");
    if n > 0 {
        let t = trace.time();
        let _ = writeln!(out, "span: {:.6} .. {:.6} s", t[0], t[n - 1]);
        if let Some(rt) = trace.meta.runtime_s {
            let _ = write!(out, "runtime: {rt:.3} s");
            let span = t[n - 1] - t[0];
            if rt > 0.0 && span > 0.0 {
                let _ = write!(out, " ({:.1}x real time)", span / rt);
            }
            out.push('\n');
        }
    }
    if let Some(c) = trace.meta.max_constraint {
        let _ = writeln!(out, "max |constraint| while in contact: {c:.3e}");
    }
    if let Some(r) = trace.meta.max_residual {
        let _ = writeln!(out, "max contact-acceleration residual: {r:.3e}");
    }

    out.push('\n');
    if trace.events.is_empty() {
        let _ = writeln!(out, "events: none");
    } else {
        let _ = writeln!(out, "events:");
        for ev in &trace.events {
            let _ = writeln!(out, "  {:?} at t = {:.6} s", ev.kind, ev.time);
        }
    }

    let channels = trace.channels();
    out.push('\n');
    let _ = writeln!(
        out,
        "channels ({}): {}",
        channels.len(),
        channels
            .iter()
            .map(|c| c.csv_name())
            .collect::<Vec<_>>()
            .join(", ")
    );

    if n > 0 {
        out.push('\n');
        let _ = writeln!(
            out,
            "{:<8} {:>14} {:>14} {:>14}",
            "channel", "final", "min", "max"
        );
        for &c in &channels {
            let v = trace.channel(c).expect("listed channel present");
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &x in v {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            let _ = writeln!(
                out,
                "{:<8} {:>14.6e} {:>14.6e} {:>14.6e}",
                c.csv_name(),
                v[n - 1],
                lo,
                hi
            );
        }

        // Settling report for the channels where an asymptote is meaningful.
        let watched = [
            Channel::ForceX,
            Channel::ForceY,
            Channel::ForceZ,
            Channel::RateX,
            Channel::RateY,
            Channel::RateZ,
        ];
        let mut lines = Vec::new();
        for c in watched {
            if let Some(v) = trace.channel(c) {
                let (asym, settle) = asymptote_and_settling(trace.time(), v);
                if asym.abs() >= 1e-12 {
                    let when = match settle {
                        Some(t) => format!("settled within 1% by t = {t:.3} s"),
                        None => "not settled within 1%".to_string(),
                    };
                    lines.push(format!(
                        "{:<8} asymptote {asym:>13.6e}  ({when})",
                        c.csv_name()
                    ));
                }
            }
        }
        if !lines.is_empty() {
            out.push('\n');
            let _ = writeln!(out, "asymptotes (mean of final 10%):");
            for l in lines {
                let _ = writeln!(out, "  {l}");
            }
        }
    }
    out
}

fn figure(
    trace: &Trace,
    title: &str,
    y_label: &str,
    channels: &[Channel],
) -> Option<String> {
    let present: Vec<Channel> = channels.iter().copied().filter(|&c| trace.has(c)).collect();
    if present.is_empty() || trace.is_empty() {
        return None;
    }
    let t = trace.time();
    let series: Vec<Series> = present
        .iter()
        .map(|&c| Series {
            label: c.csv_name(),
            x: t,
            y: trace.channel(c).expect("filtered on has()"),
        })
        .collect();
    Some(line_plot(title, "t [s]", y_label, &series))
}

/// Write `summary.txt` and the standard figures into `dir` (created if
/// needed). Returns the paths written.
pub fn write_report(trace: &Trace, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let summary = dir.join("summary.txt");
    std::fs::write(&summary, render_summary(trace))?;
    written.push(summary);

    let figures = [
        (
            "forces.svg",
            "slosh reaction force, body axes",
            "force [N]",
            &[Channel::ForceX, Channel::ForceY, Channel::ForceZ][..],
        ),
        (
            "torques.svg",
            "slosh reaction torque, body axes",
            "torque [N·m]",
            &[Channel::TorqueX, Channel::TorqueY, Channel::TorqueZ][..],
        ),
        (
            "rates.svg",
            "body rates",
            "rate [rad/s]",
            &[
                Channel::RateX,
                Channel::RateY,
                Channel::RateZ,
                Channel::RateRef,
            ][..],
        ),
    ];
    for (file, title, y_label, channels) in figures {
        if let Some(svg) = figure(trace, title, y_label, channels) {
            let path = dir.join(file);
            std::fs::write(&path, svg)?;
            written.push(path);
        }
    }
    Ok(written)
}
