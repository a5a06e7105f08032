//! Physical canvas mapping and a two-arm drawing schedule.
//!
//! The canvas is split at its vertical midline. Each arm draws only on its own
//! half, consumes its strokes in global plan order and never waits for the
//! other arm. Strokes that cross the midline are cut at the crossing.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strokes::StrokePlan;

pub type PointMm = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MmStroke {
    pub global_index: usize,
    pub points: Vec<PointMm>,
    pub color_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPlan {
    pub strokes: Vec<MmStroke>,
    pub canvas_width_mm: f64,
    pub canvas_height_mm: f64,
    /// Millimetres per pixel.
    pub scale: f64,
    pub offset_mm: PointMm,
}

impl PhysicalPlan {
    pub fn midline(&self) -> f64 {
        self.canvas_width_mm / 2.0
    }
}

/// Uniformly scales the pixel plan into the canvas minus margins, centered.
/// Pixel coordinate `(0, 0)` lands on the top-left of the drawn image area.
pub fn map_to_canvas(plan: &StrokePlan, canvas_mm: (f64, f64), margin_mm: f64) -> Result<PhysicalPlan> {
    let (cw, ch) = canvas_mm;
    let dw = cw - 2.0 * margin_mm;
    let dh = ch - 2.0 * margin_mm;
    if !(margin_mm >= 0.0) || !(dw > 0.0) || !(dh > 0.0) || !cw.is_finite() || !ch.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "degenerate canvas {cw}x{ch} mm with margin {margin_mm} mm"
        )));
    }
    let scale = (dw / plan.width as f64).min(dh / plan.height as f64);
    let offset = [
        margin_mm + (dw - plan.width as f64 * scale) / 2.0,
        margin_mm + (dh - plan.height as f64 * scale) / 2.0,
    ];
    let strokes = plan
        .strokes
        .iter()
        .enumerate()
        .map(|(i, s)| MmStroke {
            global_index: i,
            points: s
                .points
                .iter()
                .map(|p| [offset[0] + p[0] * scale, offset[1] + p[1] * scale])
                .collect(),
            color_index: s.color_index,
        })
        .collect();
    Ok(PhysicalPlan {
        strokes,
        canvas_width_mm: cw,
        canvas_height_mm: ch,
        scale,
        offset_mm: offset,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Left,
    Right,
}

/// A stroke, or the part of one, that lies on a single half of the canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubStroke {
    pub global_index: usize,
    pub part: usize,
    pub arm: Arm,
    pub points: Vec<PointMm>,
    pub color_index: Option<usize>,
}

impl SubStroke {
    pub fn path_length(&self) -> f64 {
        polyline_length(&self.points)
    }
}

fn polyline_length(pts: &[PointMm]) -> f64 {
    pts.windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    On,
}

fn side_of(x: f64, mid: f64) -> Side {
    if x < mid {
        Side::Left
    } else if x > mid {
        Side::Right
    } else {
        Side::On
    }
}

/// Assigns strokes to arms. A stroke that stays on one side goes to the arm
/// of its centroid (`x >= midline` is right). A stroke that crosses the
/// midline is cut at every crossing, inserting an interpolated point on the
/// midline, and each piece goes to the arm of its side.
pub fn split_canvas(plan: &PhysicalPlan) -> Vec<SubStroke> {
    let mid = plan.midline();
    let mut out = Vec::new();
    for s in &plan.strokes {
        let pieces = split_polyline(&s.points, mid);
        if pieces.len() == 1 {
            let n = s.points.len() as f64;
            let cx = s.points.iter().map(|p| p[0]).sum::<f64>() / n;
            let arm = if cx < mid { Arm::Left } else { Arm::Right };
            out.push(SubStroke {
                global_index: s.global_index,
                part: 0,
                arm,
                points: s.points.clone(),
                color_index: s.color_index,
            });
        } else {
            for (part, (arm, points)) in pieces.into_iter().enumerate() {
                out.push(SubStroke {
                    global_index: s.global_index,
                    part,
                    arm,
                    points,
                    color_index: s.color_index,
                });
            }
        }
    }
    out
}

/// Maximal runs of a polyline on one side of `x = mid`. Runs that touch the
/// midline share the crossing point.
fn split_polyline(points: &[PointMm], mid: f64) -> Vec<(Arm, Vec<PointMm>)> {
    let mut pieces: Vec<(Arm, Vec<PointMm>)> = Vec::new();
    let mut current: Vec<PointMm> = Vec::new();
    let mut side: Option<Arm> = None;
    for &p in points {
        let s = side_of(p[0], mid);
        let arm = match s {
            Side::Left => Some(Arm::Left),
            Side::Right => Some(Arm::Right),
            Side::On => None,
        };
        match (side, arm) {
            (_, None) => current.push(p),
            (None, Some(a)) => {
                side = Some(a);
                current.push(p);
            }
            (Some(cur), Some(a)) if cur == a => current.push(p),
            (Some(cur), Some(a)) => {
                let prev = *current.last().expect("run is non-empty");
                let junction = if prev[0] == mid {
                    prev
                } else {
                    let t = (mid - prev[0]) / (p[0] - prev[0]);
                    let q = [mid, prev[1] + t * (p[1] - prev[1])];
                    current.push(q);
                    q
                };
                pieces.push((cur, std::mem::take(&mut current)));
                current.push(junction);
                current.push(p);
                side = Some(a);
            }
        }
    }
    pieces.push((side.unwrap_or(Arm::Right), current));
    pieces
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timing {
    pub pen_speed_mm_s: f64,
    pub travel_speed_mm_s: f64,
    pub tool_change_s: f64,
}

impl Default for Timing {
    /// Placeholder values for studying schedule shape, not measured rates.
    fn default() -> Self {
        Timing {
            pen_speed_mm_s: 40.0,
            travel_speed_mm_s: 100.0,
            tool_change_s: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Draw,
    Travel,
    Toolchange,
    Idle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleEvent {
    pub arm: Arm,
    pub kind: EventKind,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pts: Vec<PointMm>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArmSchedule {
    pub left: Vec<ScheduleEvent>,
    pub right: Vec<ScheduleEvent>,
    pub makespan: f64,
}

impl ArmSchedule {
    pub fn events(&self, arm: Arm) -> &[ScheduleEvent] {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    /// Time an arm spends drawing, travelling or changing tools.
    pub fn busy_time(&self, arm: Arm) -> f64 {
        self.events(arm)
            .iter()
            .filter(|e| e.kind != EventKind::Idle)
            .map(|e| e.t_end - e.t_start)
            .sum()
    }

    pub fn tool_changes(&self, arm: Arm) -> usize {
        self.events(arm)
            .iter()
            .filter(|e| e.kind == EventKind::Toolchange)
            .count()
    }

    pub fn utilization(&self, arm: Arm) -> f64 {
        if self.makespan > 0.0 {
            self.busy_time(arm) / self.makespan
        } else {
            0.0
        }
    }

    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            makespan: self.makespan,
            utilization_left: self.utilization(Arm::Left),
            utilization_right: self.utilization(Arm::Right),
            tool_changes: self.tool_changes(Arm::Left) + self.tool_changes(Arm::Right),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScheduleSummary {
    pub makespan: f64,
    pub utilization_left: f64,
    pub utilization_right: f64,
    pub tool_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Event(ScheduleEvent),
    Summary(ScheduleSummary),
}

struct ArmState {
    queue: VecDeque<SubStroke>,
    pos: Option<PointMm>,
    pen: Option<Option<usize>>,
    events: Vec<ScheduleEvent>,
}

/// Discrete-event simulation of both arms.
///
/// Each arm takes its sub-strokes in `(global index, part)` order. Before a
/// stroke the arm changes pens if the color differs from the one it holds
/// (it starts out holding the color of its first stroke) and travels from the
/// end of its previous stroke. An arm that runs out of work idles until the
/// makespan.
pub fn schedule_bimanual(parts: &[SubStroke], timing: Timing) -> Result<ArmSchedule> {
    if !(timing.pen_speed_mm_s > 0.0) || !(timing.travel_speed_mm_s > 0.0) || !(timing.tool_change_s >= 0.0) {
        return Err(Error::InvalidParameter(format!("invalid timing {timing:?}")));
    }
    let mut sorted: Vec<SubStroke> = parts.to_vec();
    sorted.sort_by_key(|s| (s.global_index, s.part));
    let mut states: [ArmState; 2] = [Arm::Left, Arm::Right].map(|arm| ArmState {
        queue: sorted.iter().filter(|s| s.arm == arm).cloned().collect(),
        pos: None,
        pen: None,
        events: Vec::new(),
    });

    // (ready time, arm) ordered so the earliest arm acts first, left on ties
    let mut agenda: BinaryHeap<Reverse<(TimeKey, Arm)>> = BinaryHeap::new();
    for arm in [Arm::Left, Arm::Right] {
        if !states[arm as usize].queue.is_empty() {
            agenda.push(Reverse((TimeKey(0.0), arm)));
        }
    }
    let mut finish = [0.0f64; 2];
    while let Some(Reverse((TimeKey(now), arm))) = agenda.pop() {
        let st = &mut states[arm as usize];
        let Some(job) = st.queue.pop_front() else {
            finish[arm as usize] = now;
            continue;
        };
        let mut t = now;
        let pen = *st.pen.get_or_insert(job.color_index);
        if pen != job.color_index {
            st.events.push(ScheduleEvent {
                arm,
                kind: EventKind::Toolchange,
                t_start: t,
                t_end: t + timing.tool_change_s,
                stroke_index: Some(job.global_index),
                part: None,
                color_index: job.color_index,
                pts: Vec::new(),
            });
            t += timing.tool_change_s;
            st.pen = Some(job.color_index);
        }
        let start = job.points[0];
        if let Some(pos) = st.pos {
            let d = (start[0] - pos[0]).hypot(start[1] - pos[1]);
            if d > 0.0 {
                let dt = d / timing.travel_speed_mm_s;
                st.events.push(ScheduleEvent {
                    arm,
                    kind: EventKind::Travel,
                    t_start: t,
                    t_end: t + dt,
                    stroke_index: Some(job.global_index),
                    part: None,
                    color_index: None,
                    pts: vec![pos, start],
                });
                t += dt;
            }
        }
        let dt = job.path_length() / timing.pen_speed_mm_s;
        st.pos = Some(*job.points.last().expect("non-empty stroke"));
        st.events.push(ScheduleEvent {
            arm,
            kind: EventKind::Draw,
            t_start: t,
            t_end: t + dt,
            stroke_index: Some(job.global_index),
            part: Some(job.part),
            color_index: job.color_index,
            pts: job.points,
        });
        t += dt;
        finish[arm as usize] = t;
        agenda.push(Reverse((TimeKey(t), arm)));
    }

    let makespan = finish[0].max(finish[1]);
    for (i, st) in states.iter_mut().enumerate() {
        let arm = if i == 0 { Arm::Left } else { Arm::Right };
        if finish[i] < makespan {
            st.events.push(ScheduleEvent {
                arm,
                kind: EventKind::Idle,
                t_start: finish[i],
                t_end: makespan,
                stroke_index: None,
                part: None,
                color_index: None,
                pts: Vec::new(),
            });
        }
    }
    let [left, right] = states;
    Ok(ArmSchedule {
        left: left.events,
        right: right.events,
        makespan,
    })
}

/// Total-ordered simulation time.
#[derive(Debug, Clone, Copy, PartialEq)]
struct TimeKey(f64);

impl Eq for TimeKey {}

impl PartialOrd for TimeKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimeKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Events of both arms merged by start time (left first on ties).
fn merged_events(schedule: &ArmSchedule) -> Vec<&ScheduleEvent> {
    let mut all: Vec<(usize, &ScheduleEvent)> = schedule
        .left
        .iter()
        .chain(&schedule.right)
        .enumerate()
        .collect();
    all.sort_by(|(ia, a), (ib, b)| a.t_start.total_cmp(&b.t_start).then(a.arm.cmp(&b.arm)).then(ia.cmp(ib)));
    all.into_iter().map(|(_, e)| e).collect()
}

/// JSON Lines: one `{"type":"event",...}` per event, then one
/// `{"type":"summary",...}` record.
pub fn export_plan(schedule: &ArmSchedule, path: &Path) -> Result<()> {
    let mut out = String::new();
    for e in merged_events(schedule) {
        out.push_str(&serde_json::to_string(&Record::Event(e.clone())).expect("event serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&Record::Summary(schedule.summary())).expect("summary serializes"));
    out.push('\n');
    fs::write(path, out).map_err(|e| Error::write(path, e))
}

pub fn read_plan(path: &Path) -> Result<ArmSchedule> {
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    let mut schedule = ArmSchedule::default();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let rec: Record = serde_json::from_str(line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        match rec {
            Record::Event(e) => match e.arm {
                Arm::Left => schedule.left.push(e),
                Arm::Right => schedule.right.push(e),
            },
            Record::Summary(s) => schedule.makespan = s.makespan,
        }
    }
    Ok(schedule)
}

/// SVG overlay of the arm assignment: left in blue, right in red.
pub fn write_svg(plan: &PhysicalPlan, parts: &[SubStroke], path: &Path) -> Result<()> {
    let (w, h) = (plan.canvas_width_mm, plan.canvas_height_mm);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}mm" height="{h}mm" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let mid = plan.midline();
    let _ = writeln!(
        svg,
        r##"<line x1="{mid}" y1="0" x2="{mid}" y2="{h}" stroke="#888" stroke-width="0.3" stroke-dasharray="2 2"/>"##
    );
    for p in parts {
        let color = match p.arm {
            Arm::Left => "#1f5fd0",
            Arm::Right => "#d0341f",
        };
        let pts: Vec<String> = p.points.iter().map(|q| format!("{:.3},{:.3}", q[0], q[1])).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="0.4" stroke-linecap="round"/>"#,
            pts.join(" ")
        );
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| Error::write(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::Seed;
    use crate::strokes::Stroke;

    fn px_plan(w: u32, h: u32, strokes: Vec<Vec<[f64; 2]>>) -> StrokePlan {
        StrokePlan {
            strokes: strokes
                .into_iter()
                .map(|points| Stroke {
                    points,
                    width_px: 6,
                    color: [0; 3],
                    color_index: Some(0),
                    seed: Seed(0, 0),
                    frame_index: 0,
                    bin_index: 0,
                    prediction_id: 0,
                })
                .collect(),
            width: w,
            height: h,
            palette: None,
        }
    }

    fn mm_plan(strokes: Vec<(Vec<PointMm>, usize)>) -> PhysicalPlan {
        PhysicalPlan {
            strokes: strokes
                .into_iter()
                .enumerate()
                .map(|(i, (points, c))| MmStroke { global_index: i, points, color_index: Some(c) })
                .collect(),
            canvas_width_mm: 160.0,
            canvas_height_mm: 160.0,
            scale: 1.0,
            offset_mm: [0.0, 0.0],
        }
    }

    #[test]
    fn square_image_on_square_canvas() {
        let plan = px_plan(300, 300, vec![vec![[0.0, 0.0]], vec![[150.0, 150.0]]]);
        let pp = map_to_canvas(&plan, (160.0, 160.0), 5.0).unwrap();
        assert_eq!(pp.scale, 150.0 / 300.0);
        assert_eq!(pp.strokes[0].points[0], [5.0, 5.0]);
        assert_eq!(pp.strokes[1].points[0], [80.0, 80.0]);
    }

    #[test]
    fn square_image_on_tall_canvas_is_centered_vertically() {
        let plan = px_plan(200, 200, vec![vec![[0.0, 0.0]], vec![[100.0, 100.0]]]);
        let pp = map_to_canvas(&plan, (160.0, 200.0), 5.0).unwrap();
        // drawable 150 x 190, bounded by width
        assert_eq!(pp.scale, 0.75);
        assert_eq!(pp.offset_mm, [5.0, 5.0 + (190.0 - 150.0) / 2.0]);
        assert_eq!(pp.strokes[0].points[0], [5.0, 25.0]);
        assert_eq!(pp.strokes[1].points[0], [80.0, 100.0]);
    }

    #[test]
    fn degenerate_canvas_is_rejected() {
        let plan = px_plan(10, 10, vec![]);
        assert!(map_to_canvas(&plan, (10.0, 160.0), 5.0).is_err());
        assert!(map_to_canvas(&plan, (160.0, 160.0), -1.0).is_err());
    }

    #[test]
    fn sides_and_tie_rule() {
        let plan = mm_plan(vec![
            (vec![[10.0, 10.0], [40.0, 20.0]], 0),
            (vec![[80.0, 10.0], [80.0, 50.0]], 0),
        ]);
        let parts = split_canvas(&plan);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].arm, Arm::Left);
        assert_eq!(parts[1].arm, Arm::Right);
    }

    #[test]
    fn crossing_stroke_is_cut_at_midline() {
        let plan = mm_plan(vec![(vec![[70.0, 10.0], [90.0, 30.0]], 0)]);
        let parts = split_canvas(&plan);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].arm, Arm::Left);
        assert_eq!(parts[0].points, vec![[70.0, 10.0], [80.0, 20.0]]);
        assert_eq!(parts[1].arm, Arm::Right);
        assert_eq!(parts[1].points, vec![[80.0, 20.0], [90.0, 30.0]]);
        let total: f64 = parts.iter().map(|p| p.path_length()).sum();
        assert!((total - polyline_length(&plan.strokes[0].points)).abs() < 1e-9);
    }

    #[test]
    fn crossing_through_a_midline_vertex() {
        let plan = mm_plan(vec![(vec![[70.0, 0.0], [80.0, 5.0], [90.0, 0.0]], 0)]);
        let parts = split_canvas(&plan);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].points, vec![[70.0, 0.0], [80.0, 5.0]]);
        assert_eq!(parts[1].points, vec![[80.0, 5.0], [90.0, 0.0]]);
    }

    #[test]
    fn right_only_leaves_left_idle() {
        let plan = mm_plan(vec![
            (vec![[100.0, 10.0], [140.0, 10.0]], 0),
            (vec![[100.0, 50.0], [120.0, 50.0]], 0),
        ]);
        let parts = split_canvas(&plan);
        let timing = Timing { pen_speed_mm_s: 10.0, travel_speed_mm_s: 20.0, tool_change_s: 5.0 };
        let s = schedule_bimanual(&parts, timing).unwrap();
        // 40 mm draw, travel from (140,10) to (100,50), 20 mm draw
        let serial = 4.0 + 40.0 * 2f64.sqrt() / 20.0 + 2.0;
        assert!((s.makespan - serial).abs() < 1e-12);
        assert_eq!(s.left.len(), 1);
        assert_eq!(s.left[0].kind, EventKind::Idle);
        assert_eq!((s.left[0].t_start, s.left[0].t_end), (0.0, s.makespan));
    }

    #[test]
    fn draw_duration_is_length_over_speed() {
        let plan = mm_plan(vec![(vec![[10.0, 10.0], [70.0, 10.0], [70.0, 50.0]], 0)]);
        let s = schedule_bimanual(&split_canvas(&plan), Timing { pen_speed_mm_s: 50.0, ..Default::default() })
            .unwrap();
        assert_eq!(s.left.len(), 1);
        assert!((s.left[0].t_end - s.left[0].t_start - 2.0).abs() < 1e-12);
    }

    #[test]
    fn contiguous_color_blocks_change_tools_three_times() {
        let mut strokes = Vec::new();
        for c in 0..4 {
            for k in 0..3 {
                let y = (c * 3 + k) as f64 * 10.0 + 5.0;
                strokes.push((vec![[10.0, y], [30.0, y]], c));
                strokes.push((vec![[110.0, y], [150.0, y]], c));
            }
        }
        let plan = mm_plan(strokes);
        let s = schedule_bimanual(&split_canvas(&plan), Timing::default()).unwrap();
        assert_eq!(s.tool_changes(Arm::Left), 3);
        assert_eq!(s.tool_changes(Arm::Right), 3);
        let serial = s.busy_time(Arm::Left) + s.busy_time(Arm::Right);
        assert!(s.makespan >= serial / 2.0 && s.makespan <= serial);
    }

    #[test]
    fn empty_schedule_exports_summary_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        let s = schedule_bimanual(&[], Timing::default()).unwrap();
        export_plan(&s, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with(r#"{"type":"summary""#));
    }

    #[test]
    fn export_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        let plan = mm_plan(vec![
            (vec![[10.0, 10.0], [95.5, 33.3]], 1),
            (vec![[120.0, 7.25]], 2),
            (vec![[20.0, 60.0], [30.1, 61.7]], 2),
        ]);
        let s = schedule_bimanual(&split_canvas(&plan), Timing::default()).unwrap();
        export_plan(&s, &p).unwrap();
        assert_eq!(read_plan(&p).unwrap(), s);
    }

    #[test]
    fn invalid_timing_is_rejected() {
        let t = Timing { pen_speed_mm_s: 0.0, ..Default::default() };
        assert!(schedule_bimanual(&[], t).is_err());
    }

    #[test]
    fn svg_overlay_lists_every_part() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("o.svg");
        let plan = mm_plan(vec![(vec![[70.0, 10.0], [90.0, 30.0]], 0)]);
        let parts = split_canvas(&plan);
        write_svg(&plan, &parts, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
    }
}
