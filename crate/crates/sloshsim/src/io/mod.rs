//! File formats and report generation: scenario TOML, trace CSV, SVG plots.

pub mod plot;
pub mod report;
pub mod scenario_file;
pub mod trace_csv;

pub use report::write_report;
pub use scenario_file::{parse_scenario, parse_scenario_str};
pub use trace_csv::{parse_trace_str, read_trace, render_trace, write_trace};
