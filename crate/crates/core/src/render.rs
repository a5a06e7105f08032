//! Opaque raster rendering of stroke plans and progress snapshots.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{Image, Rgb};
use crate::strokes::{Stroke, StrokePlan};

pub const WHITE: Rgb = [255, 255, 255];

/// Snapshot stroke counts always taken when reached.
pub const BASE_SNAPSHOTS: [usize; 4] = [50, 250, 500, 1000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RasterMode {
    /// Hard-edged disc stamping.
    #[default]
    Hard,
    /// Coverage-blended capsules.
    Antialiased,
}

/// `{50, 250, 500, 1000}` plus every 500 strokes after that, up to `total`.
pub fn default_snapshots(total: usize) -> Vec<usize> {
    let mut out: Vec<usize> = BASE_SNAPSHOTS.iter().copied().filter(|&c| c <= total).collect();
    let mut c = 1500;
    while c <= total {
        out.push(c);
        c += 500;
    }
    out
}

/// Sampling offset of pixel centers: even widths sample at `x + 0.5` so a disc
/// spans exactly `width` pixels instead of `width + 1`.
#[inline]
fn sample_offset(width_px: u32) -> f64 {
    if width_px.is_multiple_of(2) {
        0.5
    } else {
        0.0
    }
}

fn stamp_disc(canvas: &mut Image, cx: f64, cy: f64, radius: f64, off: f64, color: Rgb) {
    let r2 = radius * radius;
    let x0 = (cx - radius - off).ceil().max(0.0);
    let x1 = (cx + radius - off).floor().min(canvas.width as f64 - 1.0);
    let y0 = (cy - radius - off).ceil().max(0.0);
    let y1 = (cy + radius - off).floor().min(canvas.height as f64 - 1.0);
    if x0 > x1 || y0 > y1 {
        return;
    }
    for y in y0 as u32..=y1 as u32 {
        let dy = y as f64 + off - cy;
        for x in x0 as u32..=x1 as u32 {
            let dx = x as f64 + off - cx;
            if dx * dx + dy * dy <= r2 {
                canvas.set(x, y, color);
            }
        }
    }
}

/// Draws one stroke onto `canvas`, clipping at the borders.
pub fn raster_stroke(canvas: &mut Image, stroke: &Stroke, mode: RasterMode) {
    match mode {
        RasterMode::Hard => raster_hard(canvas, stroke),
        RasterMode::Antialiased => raster_antialiased(canvas, stroke),
    }
}

fn raster_hard(canvas: &mut Image, stroke: &Stroke) {
    let radius = stroke.width_px as f64 / 2.0;
    let off = sample_offset(stroke.width_px);
    let pts = &stroke.points;
    let [x, y] = pts[0];
    stamp_disc(canvas, x, y, radius, off, stroke.color);
    for seg in pts.windows(2) {
        let [ax, ay] = seg[0];
        let [bx, by] = seg[1];
        let len = (bx - ax).hypot(by - ay);
        let steps = len.ceil().max(1.0) as usize;
        for i in 1..=steps {
            let t = i as f64 / steps as f64;
            stamp_disc(canvas, ax + (bx - ax) * t, ay + (by - ay) * t, radius, off, stroke.color);
        }
    }
}

fn dist_to_segment(px: f64, py: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a[0]) * dx + (py - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - a[0] - t * dx).hypot(py - a[1] - t * dy)
}

fn raster_antialiased(canvas: &mut Image, stroke: &Stroke) {
    let radius = stroke.width_px as f64 / 2.0;
    let off = sample_offset(stroke.width_px);
    let pts = &stroke.points;
    let pad = radius + 1.0;
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &[x, y] in pts {
        x0 = x0.min(x - pad);
        y0 = y0.min(y - pad);
        x1 = x1.max(x + pad);
        y1 = y1.max(y + pad);
    }
    let x0 = x0.floor().max(0.0) as u32;
    let y0 = y0.floor().max(0.0) as u32;
    let x1 = x1.ceil().min(canvas.width as f64 - 1.0);
    let y1 = y1.ceil().min(canvas.height as f64 - 1.0);
    if x1 < 0.0 || y1 < 0.0 {
        return;
    }
    for y in y0..=y1 as u32 {
        for x in x0..=x1 as u32 {
            let (px, py) = (x as f64 + off, y as f64 + off);
            let d = if pts.len() == 1 {
                (px - pts[0][0]).hypot(py - pts[0][1])
            } else {
                pts.windows(2)
                    .map(|s| dist_to_segment(px, py, s[0], s[1]))
                    .fold(f64::INFINITY, f64::min)
            };
            let a = (radius + 0.5 - d).clamp(0.0, 1.0);
            if a <= 0.0 {
                continue;
            }
            let old = canvas.get(x, y);
            let mut c = [0u8; 3];
            for i in 0..3 {
                c[i] = (old[i] as f64 * (1.0 - a) + stroke.color[i] as f64 * a).round() as u8;
            }
            canvas.set(x, y, c);
        }
    }
}

/// Renders the first `count` strokes onto a fresh white canvas.
pub fn render_prefix(plan: &StrokePlan, count: usize, mode: RasterMode) -> Image {
    let mut canvas = Image::filled(plan.width, plan.height, WHITE);
    for s in plan.strokes.iter().take(count) {
        raster_stroke(&mut canvas, s, mode);
    }
    canvas
}

#[derive(Debug, Clone)]
pub struct RenderOutput {
    pub painting: Image,
    pub painting_path: PathBuf,
    /// `(stroke count, file)` for every snapshot written.
    pub snapshots: Vec<(usize, PathBuf)>,
    pub frame_list: PathBuf,
}

pub fn snapshot_name(count: usize) -> String {
    format!("frame{count:04}.png")
}

/// Draws every stroke in order, saving `frame{c:04}.png` after `c` strokes for
/// each requested count that is reached, then `painting.png`. Also writes
/// `frames.txt` listing the snapshots followed by the painting.
pub fn render_plan(
    plan: &StrokePlan,
    snapshot_at: &[usize],
    out_dir: &Path,
    mode: RasterMode,
) -> Result<RenderOutput> {
    if snapshot_at.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "snapshot counts must be strictly ascending: {snapshot_at:?}"
        )));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::write(out_dir, e))?;
    let mut canvas = Image::filled(plan.width, plan.height, WHITE);
    let mut snapshots = Vec::new();
    let mut pending = snapshot_at.iter().copied().peekable();
    let mut save_due = |drawn: usize, canvas: &Image, snapshots: &mut Vec<(usize, PathBuf)>| -> Result<()> {
        while let Some(&c) = pending.peek() {
            if c != drawn {
                break;
            }
            pending.next();
            let path = out_dir.join(snapshot_name(c));
            canvas.save_png(&path)?;
            snapshots.push((c, path));
        }
        Ok(())
    };
    save_due(0, &canvas, &mut snapshots)?;
    for (i, s) in plan.strokes.iter().enumerate() {
        raster_stroke(&mut canvas, s, mode);
        save_due(i + 1, &canvas, &mut snapshots)?;
    }
    let painting_path = out_dir.join("painting.png");
    canvas.save_png(&painting_path)?;

    let frame_list = out_dir.join("frames.txt");
    let mut listing = String::new();
    for (_, p) in &snapshots {
        listing.push_str(&p.file_name().unwrap().to_string_lossy());
        listing.push('\n');
    }
    listing.push_str("painting.png\n");
    fs::write(&frame_list, listing).map_err(|e| Error::write(&frame_list, e))?;

    Ok(RenderOutput {
        painting: canvas,
        painting_path,
        snapshots,
        frame_list,
    })
}
