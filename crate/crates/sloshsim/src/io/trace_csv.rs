//! Trace CSV serialization.
//!
//! Layout, in order:
//!
//! ```text
//! # sloshsim-trace v1
//! # runtime_s,9.12e0              (optional metadata)
//! # max_constraint,3.2e-12
//! # max_residual,1.1e-11
//! # event,collision,1.41e0        (chronological contact events)
//! t,Fx,Fy,...,lambda              (header names pick the stored channels)
//! 0e0,...
//! ```
//!
//! Floats are written with `{:e}` (shortest scientific form that parses back
//! to the same bits), the mode column as a bare 0/1 integer. The reader is
//! header-driven: any subset of channels in any order is accepted, unknown
//! column names and non-finite values are rejected. Writing a parsed trace
//! reproduces the original file byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::emm::{SloshEvent, SloshEventKind};
use crate::error::{Error, Result};
use crate::sim::{Channel, Trace};

const MAGIC: &str = "# sloshsim-trace v1";

fn fmt_value(c: Channel, v: f64, out: &mut String) {
    if c == Channel::ContactMode {
        let _ = write!(out, "{}", v.round() as i64);
    } else {
        let _ = write!(out, "{v:e}");
    }
}

fn event_name(kind: SloshEventKind) -> &'static str {
    match kind {
        SloshEventKind::Collision => "collision",
        SloshEventKind::Separation => "separation",
    }
}

/// Render a trace to CSV text.
pub fn render_trace(trace: &Trace) -> Result<String> {
    let channels = trace.channels();
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    for (key, value) in [
        ("runtime_s", trace.meta.runtime_s),
        ("max_constraint", trace.meta.max_constraint),
        ("max_residual", trace.meta.max_residual),
    ] {
        if let Some(v) = value {
            check_finite(v, key)?;
            let _ = writeln!(out, "# {key},{v:e}");
        }
    }
    for ev in &trace.events {
        check_finite(ev.time, "event time")?;
        let _ = writeln!(out, "# event,{},{:e}", event_name(ev.kind), ev.time);
    }
    out.push('t');
    for c in &channels {
        out.push(',');
        out.push_str(c.csv_name());
    }
    out.push('\n');
    for i in 0..trace.len() {
        let t = trace.time()[i];
        check_finite(t, "time")?;
        let _ = write!(out, "{t:e}");
        for &c in &channels {
            let v = trace.value(c, i).expect("channels() listed this column");
            if c != Channel::ContactMode {
                check_finite(v, c.csv_name())?;
            }
            out.push(',');
            fmt_value(c, v, &mut out);
        }
        out.push('\n');
    }
    Ok(out)
}

fn check_finite(v: f64, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::numerical(format!(
            "refusing to write non-finite {what} ({v}) to trace"
        )))
    }
}

/// Write a trace to a CSV file.
pub fn write_trace(trace: &Trace, path: &Path) -> Result<()> {
    std::fs::write(path, render_trace(trace)?)?;
    Ok(())
}

/// Parse trace CSV text. `origin` labels parse errors.
pub fn parse_trace_str(text: &str, origin: &str) -> Result<Trace> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: origin.into(),
        line: Some(line),
        msg,
    };
    let parse_f64 = |line: usize, field: &str, what: &str| -> Result<f64> {
        let v: f64 = field
            .parse()
            .map_err(|_| parse_err(line, format!("malformed {what} {field:?}")))?;
        if !v.is_finite() {
            return Err(parse_err(line, format!("non-finite {what} {field:?}")));
        }
        Ok(v)
    };

    let mut lines = text.lines().map(|l| l.trim_end_matches('\r')).enumerate();
    match lines.next() {
        Some((_, first)) if first == MAGIC => {}
        Some((_, first)) => {
            return Err(parse_err(
                1,
                format!("expected {MAGIC:?} on the first line, found {first:?}"),
            ))
        }
        None => return Err(parse_err(1, "empty file".into())),
    }

    let mut meta_runtime = None;
    let mut meta_constraint = None;
    let mut meta_residual = None;
    let mut events = Vec::new();
    let mut header: Option<(usize, &str)> = None;
    for (idx, raw) in lines.by_ref() {
        let line_no = idx + 1;
        if raw.is_empty() {
            continue;
        }
        if let Some(comment) = raw.strip_prefix('#') {
            let comment = comment.trim_start();
            let mut parts = comment.split(',');
            match parts.next() {
                Some("event") => {
                    let kind = parts
                        .next()
                        .ok_or_else(|| parse_err(line_no, "event comment needs a kind".into()))?;
                    let kind = match kind {
                        "collision" => SloshEventKind::Collision,
                        "separation" => SloshEventKind::Separation,
                        other => {
                            return Err(parse_err(line_no, format!("unknown event kind {other:?}")))
                        }
                    };
                    let time = parts
                        .next()
                        .ok_or_else(|| parse_err(line_no, "event comment needs a time".into()))?;
                    let time = parse_f64(line_no, time, "event time")?;
                    events.push(SloshEvent { kind, time });
                }
                Some("runtime_s") => {
                    let v = parts
                        .next()
                        .ok_or_else(|| parse_err(line_no, "runtime_s needs a value".into()))?;
                    meta_runtime = Some(parse_f64(line_no, v, "runtime_s")?);
                }
                Some("max_constraint") => {
                    let v = parts
                        .next()
                        .ok_or_else(|| parse_err(line_no, "max_constraint needs a value".into()))?;
                    meta_constraint = Some(parse_f64(line_no, v, "max_constraint")?);
                }
                Some("max_residual") => {
                    let v = parts
                        .next()
                        .ok_or_else(|| parse_err(line_no, "max_residual needs a value".into()))?;
                    meta_residual = Some(parse_f64(line_no, v, "max_residual")?);
                }
                // Other comments are tolerated so hand-annotated files load.
                _ => {}
            }
            continue;
        }
        header = Some((line_no, raw));
        break;
    }
    let (header_line, header) =
        header.ok_or_else(|| parse_err(text.lines().count(), "missing column header".into()))?;

    let mut names = header.split(',');
    match names.next() {
        Some("t") => {}
        other => {
            return Err(parse_err(
                header_line,
                format!("first column must be \"t\", found {other:?}"),
            ))
        }
    }
    let mut channels: Vec<Channel> = Vec::new();
    for name in names {
        let c = Channel::from_csv_name(name)
            .ok_or_else(|| parse_err(header_line, format!("unknown column name {name:?}")))?;
        if channels.contains(&c) {
            return Err(parse_err(header_line, format!("duplicate column {name:?}")));
        }
        channels.push(c);
    }

    let mut time: Vec<f64> = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); channels.len()];
    for (idx, raw) in lines {
        let line_no = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != channels.len() + 1 {
            return Err(parse_err(
                line_no,
                format!(
                    "expected {} fields, found {}",
                    channels.len() + 1,
                    fields.len()
                ),
            ));
        }
        let t = parse_f64(line_no, fields[0], "time value")?;
        if let Some(&prev) = time.last() {
            if t <= prev {
                return Err(parse_err(
                    line_no,
                    format!("time must increase strictly ({t:e} after {prev:e})"),
                ));
            }
        }
        for (k, field) in fields[1..].iter().enumerate() {
            cols[k].push(parse_f64(line_no, field, "value")?);
        }
        time.push(t);
    }

    let mut trace = Trace::from_columns(time, channels.into_iter().zip(cols).collect())?;
    trace.events = events;
    trace.meta.runtime_s = meta_runtime;
    trace.meta.max_constraint = meta_constraint;
    trace.meta.max_residual = meta_residual;
    Ok(trace)
}

/// Load a trace from a CSV file.
pub fn read_trace(path: &Path) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    parse_trace_str(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emm::{SloshMode, SloshWrench};
    use crate::frames::{Quat, Vec3};
    use crate::sim::TraceRow;

    fn sample_trace() -> Trace {
        let mut trace = Trace::full();
        for k in 0..5 {
            let t = k as f64 * 0.01;
            trace.push_row(&TraceRow {
                t,
                wrench: SloshWrench {
                    force_b: Vec3::new(0.1 * t, -2e-12, 3.5),
                    torque_b: Vec3::new(0.0, 1e-3, -0.25 * t),
                },
                omega_b: Vec3::new(0.0, 0.0, 1.5 * t),
                att: Quat::from_scaled_axis(Vec3::new(0.0, 0.0, 0.3 * t)),
                omega_ref: 1.5,
                control_torque: 0.14,
                slosh_pos_t: Vec3::new(0.01, 0.02, -0.03),
                slosh_vel_i: Vec3::new(1e-4, 0.0, 2.0),
                mode: if k % 2 == 0 { SloshMode::Unconstrained } else { SloshMode::Constrained },
                lambda: -0.016,
            });
        }
        trace.events.push(SloshEvent {
            kind: SloshEventKind::Collision,
            time: 0.015,
        });
        trace.meta.runtime_s = Some(0.25);
        trace.meta.max_constraint = Some(3.2e-12);
        trace.meta.max_residual = Some(1.1e-11);
        trace
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let trace = sample_trace();
        let text = render_trace(&trace).unwrap();
        let back = parse_trace_str(&text, "<mem>").unwrap();
        assert_eq!(back.len(), trace.len());
        assert_eq!(back.events.len(), 1);
        assert_eq!(render_trace(&back).unwrap(), text);
    }

    #[test]
    fn reader_accepts_channel_subsets_in_any_order() {
        let text = "# sloshsim-trace v1\nt,wz,Fx\n0e0,1e0,2e0\n1e-2,1.5e0,2.5e0\n";
        let trace = parse_trace_str(text, "<mem>").unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.channels(), vec![Channel::ForceX, Channel::RateZ]);
        assert_eq!(trace.value(Channel::RateZ, 1), Some(1.5));
        assert_eq!(trace.value(Channel::ForceX, 0), Some(2.0));
        assert!(!trace.has(Channel::ForceY));
    }

    #[test]
    fn unknown_column_rejected() {
        let text = "# sloshsim-trace v1\nt,wz,bogus\n0e0,1e0,2e0\n";
        let err = parse_trace_str(text, "bad.csv").unwrap_err();
        assert!(err.is_input_error());
        assert!(err.to_string().contains("bogus"), "{err}");
        assert!(err.to_string().contains("bad.csv:2"), "{err}");
    }

    #[test]
    fn non_finite_value_rejected() {
        let text = "# sloshsim-trace v1\nt,wz\n0e0,NaN\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
        let text = "# sloshsim-trace v1\nt,wz\n0e0,inf\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
    }

    #[test]
    fn missing_magic_rejected() {
        let text = "t,wz\n0e0,1e0\n";
        let err = parse_trace_str(text, "<mem>").unwrap_err();
        assert!(err.to_string().contains("sloshsim-trace"), "{err}");
    }

    #[test]
    fn wrong_field_count_rejected() {
        let text = "# sloshsim-trace v1\nt,wz,Fx\n0e0,1e0\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
        let text = "# sloshsim-trace v1\nt,wz\n0e0,1e0,2e0\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
    }

    #[test]
    fn time_must_increase() {
        let text = "# sloshsim-trace v1\nt,wz\n0e0,1e0\n0e0,2e0\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
    }

    #[test]
    fn mode_column_is_integer_formatted() {
        let trace = sample_trace();
        let text = render_trace(&trace).unwrap();
        let row = text.lines().nth(7).unwrap();
        let mode_field = row.split(',').nth(22).unwrap();
        assert!(mode_field == "0" || mode_field == "1", "{mode_field}");
    }

    #[test]
    fn duplicate_column_rejected() {
        let text = "# sloshsim-trace v1\nt,wz,wz\n0e0,1e0,1e0\n";
        assert!(parse_trace_str(text, "<mem>").is_err());
    }

    #[test]
    fn non_finite_write_refused() {
        let trace =
            Trace::from_columns(vec![0.0], vec![(Channel::RateZ, vec![f64::NAN])]).unwrap();
        assert!(render_trace(&trace).is_err());
    }
}
