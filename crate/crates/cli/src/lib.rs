//! File formats, reports and the command line for the deadlock detector.

pub mod cli;
pub mod report;
pub mod svg;

pub use cli::{run_cli, EXIT_DEADLOCK, EXIT_ERROR, EXIT_OK, EXIT_UNREACHABLE_ONLY};
pub use report::{build_report, emit_json, explain_deadlock, render_text, ReportDocument, REPORT_SCHEMA};
pub use svg::{render_svg, DimensionError};
