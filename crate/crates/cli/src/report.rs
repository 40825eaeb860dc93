//! Report assembly: text verdicts, deadlock narratives and canonical JSON.

use std::fmt::Write as _;

use msc_deadlock_core::{
    normalize_point, Blocker, ComparisonReport, DeadlockPoint, HyperRect, Point, ProcessId,
    ProgressGraph, RectKind, RectLabel, RegionReport, ValidatedScenario,
};
use serde::Serialize;

/// JSON schema the report document conforms to.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub scenario: String,
    pub processes: Vec<ProcessEntry>,
    pub extents: Vec<u32>,
    pub forbidden: Vec<RectEntry>,
    #[serde(rename = "unsafe")]
    pub unsafe_boxes: Vec<RectEntry>,
    pub unreachable: Vec<RectEntry>,
    pub deadlocks: Vec<DeadlockEntry>,
    pub oracle: Option<OracleEntry>,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProcessEntry {
    pub name: String,
    pub events: Vec<String>,
    pub semantics: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RectEntry {
    pub lo: Vec<u32>,
    pub hi: Vec<u32>,
    pub label: LabelEntry,
    pub normalized: NormalizedEntry,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LabelEntry {
    Forbidden { resource: String, holders: [HolderEntry; 2] },
    Unsafe,
    Unreachable,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderEntry {
    pub process: String,
    pub lock: u32,
    pub unlock: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalizedEntry {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeadlockEntry {
    pub point: Vec<u32>,
    pub grid_state: Vec<u32>,
    pub reachable: bool,
    pub blocking: Vec<BlockingEntry>,
    pub narrative: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockingEntry {
    pub process: String,
    /// `forbidden` or `wall`.
    pub kind: &'static str,
    /// Index into `forbidden`, for rect blockers.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rect: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resource: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleEntry {
    pub states_total: usize,
    pub agreement: String,
    pub mismatches: Vec<String>,
}

impl ReportDocument {
    pub fn reachable_deadlocks(&self) -> usize {
        self.deadlocks.iter().filter(|d| d.reachable).count()
    }
}

fn plural(n: u32, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// One line per process describing why it cannot move at a deadlock.
pub fn explain_deadlock(d: &DeadlockPoint, v: &ValidatedScenario) -> Vec<String> {
    let s = v.scenario();
    let state = &d.grid_state.0;
    (0..v.process_count())
        .map(|i| {
            let p = ProcessId(i);
            let name = s.process_name(p);
            if d.assignment.sigma[i] == Blocker::Wall(i) {
                return format!("{name}: finished");
            }
            let done = state[i];
            let held: Vec<&str> = v.held_by(p, done).into_iter().map(|r| s.resource_name(r)).collect();
            let holds = if held.is_empty() {
                "holds nothing".to_owned()
            } else {
                format!("holds {}", held.join(", "))
            };
            let next = s.trace(p)[done as usize];
            let res = s.resource_name(next.resource);
            let owners: Vec<&str> = (0..v.process_count())
                .filter(|&j| j != i && v.held_by(ProcessId(j), state[j]).contains(&next.resource))
                .map(|j| s.process_name(ProcessId(j)))
                .collect();
            let owner = if owners.is_empty() {
                String::new()
            } else {
                format!(" (held by {})", owners.join(", "))
            };
            format!(
                "{name}: done {}, {holds}, blocked at {} {res}{owner}",
                plural(done, "event"),
                next.kind.keyword()
            )
        })
        .collect()
}

fn rect_entry(g: &ProgressGraph, r: &HyperRect) -> RectEntry {
    let s = g.scenario().scenario();
    let label = match &r.label {
        RectLabel::Conflict { resource, first, second } => {
            let holder = |(p, iv): &(ProcessId, msc_deadlock_core::Interval)| HolderEntry {
                process: s.process_name(*p).to_owned(),
                lock: iv.lock,
                unlock: iv.unlock,
            };
            LabelEntry::Forbidden {
                resource: s.resource_name(*resource).to_owned(),
                holders: [holder(first), holder(second)],
            }
        }
        RectLabel::Unsafe => LabelEntry::Unsafe,
        RectLabel::Unreachable => LabelEntry::Unreachable,
    };
    let norm = |v: &[u32]| normalize_point(g, &Point::new(v.to_vec())).expect("box inside cube");
    RectEntry {
        lo: r.lo.clone(),
        hi: r.hi.clone(),
        label,
        normalized: NormalizedEntry { lo: norm(&r.lo), hi: norm(&r.hi) },
    }
}

fn blocking(g: &ProgressGraph, d: &DeadlockPoint) -> Vec<BlockingEntry> {
    let s = g.scenario().scenario();
    d.assignment
        .sigma
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let process = s.processes[i].clone();
            match *b {
                Blocker::Rect { index, kind: RectKind::Forbidden } => {
                    let resource = match &g.forbidden[index].label {
                        RectLabel::Conflict { resource, .. } => Some(s.resource_name(*resource).to_owned()),
                        _ => None,
                    };
                    BlockingEntry { process, kind: "forbidden", rect: Some(index), resource }
                }
                Blocker::Rect { kind: RectKind::Unsafe, .. } => unreachable!("deadlocks are blocked by forbidden rects only"),
                Blocker::Wall(_) => BlockingEntry { process, kind: "wall", rect: None, resource: None },
            }
        })
        .collect()
}

pub fn oracle_entry(c: &ComparisonReport) -> OracleEntry {
    OracleEntry {
        states_total: c.states_total,
        agreement: c.agreement(),
        mismatches: c.mismatches.iter().map(ToString::to_string).collect(),
    }
}

pub fn build_report(
    g: &ProgressGraph,
    regions: &RegionReport,
    comparison: Option<&ComparisonReport>,
) -> ReportDocument {
    let v = g.scenario();
    let s = v.scenario();
    let processes = (0..v.process_count())
        .map(|i| {
            let p = ProcessId(i);
            ProcessEntry {
                name: s.process_name(p).to_owned(),
                events: s
                    .trace(p)
                    .iter()
                    .map(|a| format!("{} {}", a.kind.keyword(), s.resource_name(a.resource)))
                    .collect(),
                semantics: v.semantics_of(p),
            }
        })
        .collect();
    ReportDocument {
        scenario: s.name.clone(),
        processes,
        extents: g.extents().to_vec(),
        forbidden: g.forbidden.iter().map(|r| rect_entry(g, r)).collect(),
        unsafe_boxes: regions.unsafe_boxes.iter().map(|r| rect_entry(g, r)).collect(),
        unreachable: regions.unreachable.iter().map(|r| rect_entry(g, r)).collect(),
        deadlocks: regions
            .deadlocks
            .iter()
            .map(|d| DeadlockEntry {
                point: d.point.coords().to_vec(),
                grid_state: d.grid_state.0.clone(),
                reachable: d.reachable,
                blocking: blocking(g, d),
                narrative: explain_deadlock(d, v).join("; "),
            })
            .collect(),
        oracle: comparison.map(oracle_entry),
        version: VERSION.to_owned(),
    }
}

/// Canonical pretty-printed JSON with a trailing newline.
pub fn emit_json(r: &ReportDocument) -> String {
    let mut out = serde_json::to_string_pretty(r).expect("report serializes");
    out.push('\n');
    out
}

fn tuple(v: &[u32]) -> String {
    let parts: Vec<String> = v.iter().map(u32::to_string).collect();
    format!("({})", parts.join(","))
}

fn floats(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("({})", parts.join(", "))
}

fn open_box(r: &RectEntry, upper_closed: bool) -> String {
    let close = if upper_closed { ']' } else { '[' };
    let axes: Vec<String> = r
        .lo
        .iter()
        .zip(&r.hi)
        .map(|(l, h)| format!("]{l},{h}{close}"))
        .collect();
    axes.join(" x ")
}

/// Human-readable report. With `semantics`, the per-process algebra
/// expressions are listed too.
pub fn render_text(r: &ReportDocument, semantics: bool) -> String {
    let mut out = String::new();
    let extents: Vec<String> = r.extents.iter().map(u32::to_string).collect();
    let _ = writeln!(
        out,
        "scenario {}: {}, extents {}",
        r.scenario,
        match r.processes.len() {
            1 => "1 process".to_owned(),
            n => format!("{n} processes"),
        },
        extents.join("x")
    );
    if semantics {
        let _ = writeln!(out, "semantics:");
        for p in &r.processes {
            let _ = writeln!(out, "  {}: {}", p.name, p.semantics);
        }
    }
    let _ = writeln!(out, "forbidden: {}", r.forbidden.len());
    for f in &r.forbidden {
        if let LabelEntry::Forbidden { resource, holders } = &f.label {
            let _ = writeln!(
                out,
                "  {}  {} held by {} ({},{}) and {} ({},{})",
                open_box(f, false),
                resource,
                holders[0].process,
                holders[0].lock,
                holders[0].unlock,
                holders[1].process,
                holders[1].lock,
                holders[1].unlock
            );
        }
    }
    let _ = writeln!(out, "unsafe: {}", r.unsafe_boxes.len());
    for b in &r.unsafe_boxes {
        let _ = writeln!(out, "  {}", open_box(b, true));
    }
    let _ = writeln!(out, "unreachable: {}", r.unreachable.len());
    for b in &r.unreachable {
        let _ = writeln!(out, "  {}", open_box(b, true));
    }
    let _ = writeln!(out, "deadlocks: {}", r.deadlocks.len());
    for d in &r.deadlocks {
        let norm: Vec<f64> = d
            .point
            .iter()
            .zip(&r.extents)
            .map(|(&x, &l)| x as f64 / l as f64)
            .collect();
        let _ = writeln!(
            out,
            "  deadlock at {} (state {}, normalized {}) {}",
            tuple(&d.point),
            tuple(&d.grid_state),
            floats(&norm),
            if d.reachable { "reachable" } else { "unreachable" }
        );
        for line in d.narrative.split("; ") {
            let _ = writeln!(out, "    {line}");
        }
    }
    if let Some(o) = &r.oracle {
        let _ = writeln!(out, "oracle: {} states agree", o.agreement);
        for m in &o.mismatches {
            let _ = writeln!(out, "  mismatch: {m}");
        }
    }
    let reachable = r.reachable_deadlocks();
    let verdict = if r.deadlocks.is_empty() {
        "deadlock-free".to_owned()
    } else if reachable > 0 {
        let points: Vec<String> = r
            .deadlocks
            .iter()
            .filter(|d| d.reachable)
            .map(|d| tuple(&d.point))
            .collect();
        format!("DEADLOCK at {}", points.join(", "))
    } else {
        format!("only unreachable deadlocks ({})", r.deadlocks.len())
    };
    let _ = writeln!(out, "verdict: {verdict}");
    out
}
