//! Progress graph geometry.
//!
//! Process `i` owns axis `i`. Its `j`-th event sits at integer coordinate `j`
//! and the axis runs from `0` to `L[i] = m[i] + 1`, where `m[i]` is the trace
//! length. A grid state `s` (events completed per process) is represented by
//! the midpoint `s + ½`, so it never touches an integer face.
//!
//! Boxes are stored as integer corners `lo`, `hi`. For forbidden rectangles
//! they denote the open box `∏ ]lo, hi[`; for unsafe and unreachable boxes the
//! lower-open, upper-closed box `∏ ]lo, hi]`. Either way the grid states
//! whose midpoints fall inside are exactly `lo ≤ s < hi`.

use alloc::vec;
use alloc::vec::Vec;

use crate::scenario::{Interval, LookupError, ProcessId, ResourceId, ValidatedScenario};

/// A lattice point of the progress graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(Vec<u32>);

impl Point {
    pub fn new(coords: Vec<u32>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<u32>> for Point {
    fn from(v: Vec<u32>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RectLabel {
    /// Both processes would hold `resource` inside this box.
    Conflict {
        resource: ResourceId,
        first: (ProcessId, Interval),
        second: (ProcessId, Interval),
    },
    Unsafe,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HyperRect {
    pub lo: Vec<u32>,
    pub hi: Vec<u32>,
    pub label: RectLabel,
}

impl HyperRect {
    pub fn new(lo: Vec<u32>, hi: Vec<u32>, label: RectLabel) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        debug_assert!(lo.iter().zip(&hi).all(|(l, h)| l < h), "empty box {lo:?}..{hi:?}");
        HyperRect { lo, hi, label }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Whether the midpoint of grid state `s` lies in the box.
    pub fn contains_state(&self, s: &[u32]) -> bool {
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&l, &h))| l <= x && x < h)
    }

    /// Corner-wise containment; labels are ignored.
    pub fn contains_box(&self, other: &HyperRect) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    pub fn same_corners(&self, other: &HyperRect) -> bool {
        self.lo == other.lo && self.hi == other.hi
    }

    /// Image under `x ↦ L - x` on every axis.
    pub fn reflect(&self, extents: &[u32]) -> HyperRect {
        let lo = extents.iter().zip(&self.hi).map(|(l, h)| l - h).collect();
        let hi = extents.iter().zip(&self.lo).map(|(l, lo)| l - lo).collect();
        HyperRect { lo, hi, label: self.label.clone() }
    }

    pub fn with_label(mut self, label: RectLabel) -> Self {
        self.label = label;
        self
    }
}

/// Event labels along one axis, with their integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisMap {
    pub axes: Vec<Vec<(alloc::string::String, u32)>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgressGraph {
    scenario: ValidatedScenario,
    extents: Vec<u32>,
    pub forbidden: Vec<HyperRect>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("point {coords:?} lies outside the cube with extents {extents:?}")]
pub struct OutsideCube {
    pub coords: Vec<u32>,
    pub extents: Vec<u32>,
}

impl ProgressGraph {
    pub fn scenario(&self) -> &ValidatedScenario {
        &self.scenario
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    /// `L[i]`: event count of process `i` plus one.
    pub fn extents(&self) -> &[u32] {
        &self.extents
    }

    /// `m[i]`: event count of process `i`.
    pub fn event_counts(&self) -> Vec<u32> {
        self.extents.iter().map(|l| l - 1).collect()
    }

    pub fn initial(&self) -> Point {
        Point(vec![0; self.dim()])
    }

    pub fn final_point(&self) -> Point {
        Point(self.extents.clone())
    }

    /// Number of grid states, `∏ (m[i] + 1)`.
    pub fn state_count(&self) -> u128 {
        self.extents.iter().map(|&l| l as u128).product()
    }

    pub fn in_forbidden(&self, s: &[u32]) -> bool {
        self.forbidden.iter().any(|r| r.contains_state(s))
    }

    pub fn axis_map(&self) -> AxisMap {
        let s = self.scenario.scenario();
        let axes = s
            .events
            .iter()
            .map(|trace| {
                trace
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (s.event_label(a), j as u32 + 1))
                    .collect()
            })
            .collect();
        AxisMap { axes }
    }
}

/// Open boxes in which two processes would both hold `r`.
pub fn conflict_rects(v: &ValidatedScenario, r: &str) -> Result<Vec<HyperRect>, LookupError> {
    let rid = v
        .scenario()
        .resource_id(r)
        .ok_or_else(|| LookupError::UnknownResource(r.into()))?;
    Ok(conflict_rects_of(v, rid, &extents_of(v)))
}

fn extents_of(v: &ValidatedScenario) -> Vec<u32> {
    (0..v.process_count())
        .map(|p| v.event_count(ProcessId(p)) as u32 + 1)
        .collect()
}

fn conflict_rects_of(v: &ValidatedScenario, r: ResourceId, extents: &[u32]) -> Vec<HyperRect> {
    let n = extents.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (pi, pj) = (ProcessId(i), ProcessId(j));
            for &a in v.holds(pi, r) {
                for &b in v.holds(pj, r) {
                    let mut lo = vec![0; n];
                    let mut hi = extents.to_vec();
                    lo[i] = a.lock;
                    hi[i] = a.unlock;
                    lo[j] = b.lock;
                    hi[j] = b.unlock;
                    out.push(HyperRect::new(
                        lo,
                        hi,
                        RectLabel::Conflict {
                            resource: r,
                            first: (pi, a),
                            second: (pj, b),
                        },
                    ));
                }
            }
        }
    }
    out
}

/// Builds the progress graph: one axis per process in declaration order and
/// one forbidden box per pair of overlapping-capable holds of a resource.
pub fn build_graph(v: &ValidatedScenario) -> ProgressGraph {
    let extents = extents_of(v);
    let forbidden = (0..v.scenario().resources.len())
        .flat_map(|r| conflict_rects_of(v, ResourceId(r), &extents))
        .collect();
    ProgressGraph {
        scenario: v.clone(),
        extents,
        forbidden,
    }
}

/// Time-reversed graph: every box is mirrored through the cube's centre.
/// Labels are carried over unchanged.
pub fn reflect_graph(g: &ProgressGraph) -> ProgressGraph {
    ProgressGraph {
        scenario: g.scenario.clone(),
        extents: g.extents.clone(),
        forbidden: g.forbidden.iter().map(|r| r.reflect(&g.extents)).collect(),
    }
}

/// Maps a point of the integer cube into the unit cube. Display only.
pub fn normalize_point(g: &ProgressGraph, p: &Point) -> Result<Vec<f64>, OutsideCube> {
    if p.dim() != g.dim() || p.0.iter().zip(&g.extents).any(|(x, l)| x > l) {
        return Err(OutsideCube {
            coords: p.0.clone(),
            extents: g.extents.clone(),
        });
    }
    Ok(p.0
        .iter()
        .zip(&g.extents)
        .map(|(&x, &l)| x as f64 / l as f64)
        .collect())
}
