//! Two-process progress graphs as standalone SVG.

use std::fmt::Write as _;

use msc_deadlock_core::{ProcessId, ProgressGraph, RegionReport};

const PLOT: f64 = 400.0;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("SVG output needs exactly 2 processes, scenario has {0}; use the JSON or text report instead")]
pub struct DimensionError(pub usize);

struct Frame {
    ux: f64,
    uy: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + v * self.ux
    }

    // y grows upward.
    fn y(&self, v: f64) -> f64 {
        MARGIN + PLOT - v * self.uy
    }

    fn rect(&self, out: &mut String, class: &str, lo: &[u32], hi: &[u32]) {
        let (x0, x1) = (self.x(lo[0] as f64), self.x(hi[0] as f64));
        let (y0, y1) = (self.y(hi[1] as f64), self.y(lo[1] as f64));
        let _ = writeln!(
            out,
            r#"  <rect class="{class}" x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}"/>"#,
            x1 - x0,
            y1 - y0
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders forbidden rects, unsafe and unreachable boxes, deadlock markers and
/// event ticks. Fails unless the scenario has exactly two processes.
pub fn render_svg(g: &ProgressGraph, r: &RegionReport) -> Result<String, DimensionError> {
    if g.dim() != 2 {
        return Err(DimensionError(g.dim()));
    }
    let ext = g.extents();
    let f = Frame { ux: PLOT / ext[0] as f64, uy: PLOT / ext[1] as f64 };
    let v = g.scenario();
    let s = v.scenario();
    let size = PLOT + 2.0 * MARGIN;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, "  <title>{}</title>", escape(&s.name));
    out.push_str(concat!(
        "  <style>\n",
        "    .forbidden { fill: #333; }\n",
        "    .unsafe { fill: #f4b6ad; }\n",
        "    .unreachable { fill: #c8c8c8; }\n",
        "    .frame { fill: none; stroke: #000; }\n",
        "    .tick { stroke: #999; stroke-dasharray: 2 3; }\n",
        "    .deadlock { fill: #d00; stroke: #fff; }\n",
        "    text { font: 12px sans-serif; }\n",
        "  </style>\n",
    ));
    for b in &r.unreachable {
        f.rect(&mut out, "unreachable", &b.lo, &b.hi);
    }
    for b in &r.unsafe_boxes {
        f.rect(&mut out, "unsafe", &b.lo, &b.hi);
    }
    for b in &g.forbidden {
        f.rect(&mut out, "forbidden", &b.lo, &b.hi);
    }
    f.rect(&mut out, "frame", &[0, 0], ext);

    for axis in 0..2 {
        let p = ProcessId(axis);
        for (j, a) in s.trace(p).iter().enumerate() {
            let label = format!("{}{}", a.kind.letter(), escape(s.resource_name(a.resource)));
            let c = (j + 1) as f64;
            if axis == 0 {
                let x = f.x(c);
                let _ = writeln!(
                    out,
                    r#"  <line class="tick" x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}"/>"#,
                    f.y(0.0),
                    f.y(ext[1] as f64)
                );
                let _ = writeln!(
                    out,
                    r#"  <text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#,
                    f.y(0.0) + 16.0
                );
            } else {
                let y = f.y(c);
                let _ = writeln!(
                    out,
                    r#"  <line class="tick" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}"/>"#,
                    f.x(0.0),
                    f.x(ext[0] as f64)
                );
                let _ = writeln!(
                    out,
                    r#"  <text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
                    f.x(0.0) - 6.0,
                    y + 4.0
                );
            }
        }
    }
    let _ = writeln!(
        out,
        r#"  <text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        f.x(ext[0] as f64 / 2.0),
        size - 12.0,
        escape(s.process_name(ProcessId(0)))
    );
    let _ = writeln!(
        out,
        r#"  <text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        f.y(ext[1] as f64 / 2.0),
        f.y(ext[1] as f64 / 2.0),
        escape(s.process_name(ProcessId(1)))
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.1}" y="{:.1}" text-anchor="end">(0,0)</text>"#,
        f.x(0.0) - 4.0,
        f.y(0.0) + 16.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{:.1}" y="{:.1}">(1,1)</text>"#,
        f.x(ext[0] as f64) + 4.0,
        f.y(ext[1] as f64) - 4.0
    );
    for d in &r.deadlocks {
        let p = d.point.coords();
        let _ = writeln!(
            out,
            r#"  <circle class="deadlock" cx="{:.1}" cy="{:.1}" r="5"/>"#,
            f.x(p[0] as f64),
            f.y(p[1] as f64)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
