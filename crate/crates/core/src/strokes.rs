//! Curved brush strokes grown from seeds along image isophotes.
//!
//! A stroke takes the reference color at its seed and advances in steps of
//! one brush width perpendicular to the local luma gradient, keeping the turn
//! from the previous step as small as possible. Growth stops at `max_points`,
//! when the canvas already matches the reference better than the stroke color
//! would, or when the gradient vanishes after `min_points`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::imagecore::{Image, Rgb};
use crate::ordering::SeedPlan;
use crate::palette::{quantize, Palette};
use crate::render::{raster_stroke, RasterMode, WHITE};
use crate::segmentation::Seed;

/// Gradient magnitudes below this count as flat.
pub const GRADIENT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    /// Polyline in pixel coordinates; the first point is the seed.
    pub points: Vec<[f64; 2]>,
    pub width_px: u32,
    pub color: Rgb,
    /// Palette index, `None` in unrestricted-color mode.
    pub color_index: Option<usize>,
    pub seed: Seed,
    pub frame_index: usize,
    pub bin_index: usize,
    pub prediction_id: u32,
}

impl Stroke {
    pub fn path_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrokeParams {
    pub width_px: u32,
    pub min_points: usize,
    pub max_points: usize,
    /// Slack added to the canvas distance before a stroke is cut off.
    pub color_tolerance: f64,
    pub raster: RasterMode,
}

impl Default for StrokeParams {
    fn default() -> Self {
        StrokeParams {
            width_px: 6,
            min_points: 2,
            max_points: 12,
            color_tolerance: 0.0,
            raster: RasterMode::Hard,
        }
    }
}

impl StrokeParams {
    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 {
            return Err(Error::InvalidParameter("stroke width must be >= 1".into()));
        }
        if self.max_points == 0 || self.min_points == 0 {
            return Err(Error::InvalidParameter("point limits must be >= 1".into()));
        }
        if self.min_points > self.max_points {
            return Err(Error::InvalidParameter(format!(
                "minPoints {} exceeds maxPoints {}",
                self.min_points, self.max_points
            )));
        }
        if !(self.color_tolerance >= 0.0) {
            return Err(Error::InvalidParameter("color tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokePlan {
    pub strokes: Vec<Stroke>,
    pub width: u32,
    pub height: u32,
    pub palette: Option<Palette>,
}

/// One line of the JSON Lines stroke export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeRecord {
    pub i: usize,
    pub pred: u32,
    pub bin: usize,
    pub color: Rgb,
    pub w: u32,
    pub pts: Vec<[f64; 2]>,
}

impl StrokePlan {
    pub fn records(&self) -> impl Iterator<Item = StrokeRecord> + '_ {
        self.strokes.iter().enumerate().map(|(i, s)| StrokeRecord {
            i,
            pred: s.prediction_id,
            bin: s.bin_index,
            color: s.color,
            w: s.width_px,
            pts: s.points.clone(),
        })
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for r in self.records() {
            serde_json::to_writer(&mut out, &r).expect("record serializes");
            out.push(b'\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::write(path, e))?;
        f.write_all(&out).map_err(|e| Error::write(path, e))
    }

    pub fn read_jsonl(path: &Path) -> Result<Vec<StrokeRecord>> {
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l).map_err(|e| Error::Json {
                    path: path.to_path_buf(),
                    source: e,
                })
            })
            .collect()
    }
}

fn color_dist(a: Rgb, b: Rgb) -> f64 {
    let d: i32 = (0..3)
        .map(|i| {
            let v = a[i] as i32 - b[i] as i32;
            v * v
        })
        .sum();
    (d as f64).sqrt()
}

/// Reference image, its smoothed gradient and the optional palette, shared by
/// every stroke of a plan.
pub struct StrokeGenerator<'a> {
    reference: &'a Image,
    gradient: GradientField,
    palette: Option<&'a Palette>,
    params: StrokeParams,
}

impl<'a> StrokeGenerator<'a> {
    pub fn new(reference: &'a Image, palette: Option<&'a Palette>, params: StrokeParams) -> Result<Self> {
        params.validate()?;
        if palette.is_some_and(|p| p.is_empty()) {
            return Err(Error::InvalidParameter("palette must not be empty".into()));
        }
        Ok(StrokeGenerator {
            reference,
            gradient: GradientField::of_image_smoothed(reference),
            palette,
            params,
        })
    }

    fn stroke_color(&self, seed: Seed) -> (Rgb, Option<usize>) {
        let c = self.reference.get(seed.x(), seed.y());
        match self.palette {
            Some(p) => {
                let i = quantize(c, p);
                (p.colors[i], Some(i))
            }
            None => (c, None),
        }
    }

    /// Grows one stroke from `seed` against the current `canvas`. Provenance
    /// fields are left at zero.
    pub fn generate(&self, seed: Seed, canvas: &Image) -> Stroke {
        let (w, h) = (self.reference.width, self.reference.height);
        let step = self.params.width_px as f64;
        let (color, color_index) = self.stroke_color(seed);
        let mut p = [seed.x() as f64, seed.y() as f64];
        let mut points = vec![p];
        let mut last: Option<[f64; 2]> = None;

        while points.len() < self.params.max_points {
            let ix = p[0].round().clamp(0.0, (w - 1) as f64) as u32;
            let iy = p[1].round().clamp(0.0, (h - 1) as f64) as u32;
            let (gx, gy) = self.gradient.at(ix, iy);
            let mag = gx.hypot(gy);
            let dir = if mag < GRADIENT_EPSILON {
                if points.len() >= self.params.min_points {
                    break;
                }
                last.unwrap_or([1.0, 0.0])
            } else {
                let d = [-gy / mag, gx / mag];
                let flip = match last {
                    Some(l) => d[0] * l[0] + d[1] * l[1] < 0.0,
                    None => d[0] < 0.0 || (d[0] == 0.0 && d[1] < 0.0),
                };
                if flip {
                    [-d[0], -d[1]]
                } else {
                    d
                }
            };
            let next = [p[0] + dir[0] * step, p[1] + dir[1] * step];
            if next[0] < 0.0 || next[1] < 0.0 || next[0] > (w - 1) as f64 || next[1] > (h - 1) as f64 {
                break;
            }
            if points.len() >= self.params.min_points {
                let nx = next[0].round() as u32;
                let ny = next[1].round() as u32;
                let r = self.reference.get(nx, ny);
                if color_dist(r, color) > color_dist(r, canvas.get(nx, ny)) + self.params.color_tolerance {
                    break;
                }
            }
            points.push(next);
            last = Some(dir);
            p = next;
        }

        Stroke {
            points,
            width_px: self.params.width_px,
            color,
            color_index,
            seed,
            frame_index: 0,
            bin_index: 0,
            prediction_id: 0,
        }
    }
}

/// Convenience wrapper building a [`StrokeGenerator`] for a single stroke.
pub fn generate_stroke(
    seed: Seed,
    reference: &Image,
    canvas: &Image,
    palette: Option<&Palette>,
    params: StrokeParams,
) -> Result<Stroke> {
    if seed.x() >= reference.width || seed.y() >= reference.height {
        return Err(Error::InvalidParameter(format!("seed {seed:?} out of bounds")));
    }
    Ok(StrokeGenerator::new(reference, palette, params)?.generate(seed, canvas))
}

/// Generates one stroke per seed in plan order, painting each onto a white
/// working canvas before growing the next.
pub fn generate_all(
    plan: &SeedPlan,
    reference: &Image,
    palette: Option<&Palette>,
    params: StrokeParams,
) -> Result<StrokePlan> {
    let generator = StrokeGenerator::new(reference, palette, params)?;
    let mut canvas = Image::filled(reference.width, reference.height, WHITE);
    let mut strokes = Vec::with_capacity(plan.seed_count());
    for (frame_index, frame, seed) in plan.iter_seeds() {
        if seed.x() >= reference.width || seed.y() >= reference.height {
            return Err(Error::InvalidParameter(format!("seed {seed:?} out of bounds")));
        }
        let mut s = generator.generate(seed, &canvas);
        s.frame_index = frame_index;
        s.bin_index = frame.bin_index;
        s.prediction_id = frame.prediction_id;
        raster_stroke(&mut canvas, &s, params.raster);
        strokes.push(s);
    }
    Ok(StrokePlan {
        strokes,
        width: reference.width,
        height: reference.height,
        palette: palette.cloned(),
    })
}
