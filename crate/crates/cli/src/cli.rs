//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use msc_deadlock_core::{
    analyze, build_graph, compare_with_geometry, explore, parse_scenario, validate, Diagnostics,
    OracleError, Reachability, DEFAULT_STATE_BUDGET,
};

use crate::report::{build_report, emit_json, render_text, ReportDocument};
use crate::svg::{render_svg, DimensionError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_UNREACHABLE_ONLY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "msc-deadlock", version, about = "Deadlock detection for lock/unlock scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a scenario file, or every `.msc` file in a directory.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Write an SVG drawing (two-process scenarios only). A directory when
    /// analyzing a directory.
    #[arg(long, value_name = "OUT")]
    svg: Option<PathBuf>,
    /// Include per-process semantics in the text report.
    #[arg(long)]
    semantics: bool,
    #[arg(long, value_enum, default_value_t = OracleMode::Off)]
    oracle: OracleMode,
    /// State budget for the exhaustive oracle.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    max_states: u64,
    /// Exit 2 for any deadlock, reachable or not.
    #[arg(long)]
    fail_on_deadlock: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMode {
    /// Geometry only.
    Off,
    /// Cross-check every state against exhaustive search.
    Check,
    /// Like `check`, and take deadlock reachability from the search.
    Reachability,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", render_diagnostics(.path, .diagnostics))]
    Invalid { path: PathBuf, diagnostics: Diagnostics },
    #[error("{path}: {source}")]
    Oracle { path: PathBuf, source: OracleError },
    #[error("{path}: detector and oracle disagree:\n{details}")]
    Disagreement { path: PathBuf, details: String },
    #[error("{path}: {source}")]
    Svg { path: PathBuf, source: DimensionError },
}

fn render_diagnostics(path: &Path, d: &Diagnostics) -> String {
    let lines: Vec<String> = d.iter().map(|x| format!("{}: {x}", path.display())).collect();
    lines.join("\n")
}

struct Outcome {
    doc: ReportDocument,
    svg: Option<String>,
}

fn analyze_file(path: &Path, args: &AnalyzeArgs, batch: bool, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let invalid = |diagnostics| CliError::Invalid { path: path.into(), diagnostics };
    let scenario = parse_scenario(&src).map_err(invalid)?;
    let v = validate(&scenario).map_err(invalid)?;
    for w in v.warnings() {
        let _ = writeln!(err, "{}: {w}", path.display());
    }
    let g = build_graph(&v);
    let oracle_err = |source| CliError::Oracle { path: path.into(), source };

    let (regions, comparison) = match args.oracle {
        OracleMode::Off => (analyze(&g, Reachability::Geometric), None),
        mode => {
            let o = explore(&v, args.max_states).map_err(oracle_err)?;
            let reach = if mode == OracleMode::Reachability {
                Reachability::Oracle(&o)
            } else {
                Reachability::Geometric
            };
            let regions = analyze(&g, reach);
            let c = compare_with_geometry(&o, &regions, &g).map_err(oracle_err)?;
            if !c.passed() {
                let details: Vec<String> = c.mismatches.iter().map(|m| format!("  {m}")).collect();
                return Err(CliError::Disagreement { path: path.into(), details: details.join("\n") });
            }
            (regions, Some(c))
        }
    };

    let svg = match &args.svg {
        Some(_) if batch && g.dim() != 2 => {
            let _ = writeln!(err, "{}: no SVG for {} processes", path.display(), g.dim());
            None
        }
        Some(_) => Some(render_svg(&g, &regions).map_err(|source| CliError::Svg { path: path.into(), source })?),
        None => None,
    };
    Ok(Outcome { doc: build_report(&g, &regions, comparison.as_ref()), svg })
}

fn verdict_code(doc: &ReportDocument, fail_on_deadlock: bool) -> i32 {
    if doc.deadlocks.is_empty() {
        EXIT_OK
    } else if doc.reachable_deadlocks() > 0 || fail_on_deadlock {
        EXIT_DEADLOCK
    } else {
        EXIT_UNREACHABLE_ONLY
    }
}

// Batch severity: error, then reachable deadlock, then unreachable-only.
fn rank(code: i32) -> u8 {
    match code {
        EXIT_ERROR => 3,
        EXIT_DEADLOCK => 2,
        EXIT_UNREACHABLE_ONLY => 1,
        _ => 0,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.into(), source })
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let io = |source| CliError::Io { path: dir.into(), source };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "msc") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Output of one file, buffered so batch runs print in a stable order.
struct FileRun {
    code: i32,
    text: String,
    diagnostics: Vec<u8>,
    doc: Option<ReportDocument>,
}

fn run_file(file: &Path, args: &AnalyzeArgs, batch: bool) -> FileRun {
    let mut diagnostics = Vec::new();
    let mut text = String::new();
    let outcome = analyze_file(file, args, batch, &mut diagnostics);
    let (code, doc) = match outcome {
        Ok(o) => {
            let mut code = verdict_code(&o.doc, args.fail_on_deadlock);
            if let (Some(target), Some(svg)) = (&args.svg, &o.svg) {
                let dest = if batch {
                    target.join(file.file_stem().unwrap_or_default()).with_extension("svg")
                } else {
                    target.clone()
                };
                if let Err(e) = write_file(&dest, svg) {
                    let _ = writeln!(diagnostics, "error: {e}");
                    code = EXIT_ERROR;
                }
            }
            if args.report == ReportFormat::Text {
                if batch {
                    text.push_str(&format!("== {} ==\n", file.display()));
                }
                text.push_str(&render_text(&o.doc, args.semantics));
            }
            (code, Some(o.doc))
        }
        Err(e) => {
            let _ = writeln!(diagnostics, "{e}");
            (EXIT_ERROR, None)
        }
    };
    FileRun { code, text, diagnostics, doc }
}

fn run_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let batch = args.path.is_dir();
    let files = if batch {
        match scenario_files(&args.path) {
            Ok(f) => f,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_ERROR;
            }
        }
    } else {
        vec![args.path.clone()]
    };

    let runs: Vec<FileRun> = std::thread::scope(|scope| {
        let handles: Vec<_> = files.iter().map(|f| scope.spawn(move || run_file(f, args, batch))).collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });

    let mut code = EXIT_OK;
    let mut docs = Vec::new();
    for run in runs {
        let _ = err.write_all(&run.diagnostics);
        let _ = out.write_all(run.text.as_bytes());
        if rank(run.code) > rank(code) {
            code = run.code;
        }
        docs.extend(run.doc);
    }

    if args.report == ReportFormat::Json {
        if batch {
            let mut s = serde_json::to_string_pretty(&docs).expect("reports serialize");
            s.push('\n');
            let _ = out.write_all(s.as_bytes());
        } else if let Some(doc) = docs.first() {
            let _ = out.write_all(emit_json(doc).as_bytes());
        }
    }
    code
}

/// Runs the command line and returns the process exit code: 0 deadlock-free,
/// 2 reachable deadlock, 3 only unreachable deadlocks, 1 any error.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Analyze(a) => run_analyze(&a, out, err),
    }
}
