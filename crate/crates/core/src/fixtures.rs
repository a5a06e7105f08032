//! Synthetic inputs: scenes with known depth and labels, so that the whole
//! pipeline can be exercised without any learned models.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imagecore::{
    save_label_png, write_meta, DepthConvention, DepthMap, Image, PredictionKind, PredictionMeta,
    Rgb, Segmentation,
};

#[derive(Debug, Clone)]
pub struct Scene {
    pub image: Image,
    pub depth: DepthMap,
    pub segmentation: Segmentation,
}

/// Locations of a scene written with [`Scene::write`].
#[derive(Debug, Clone)]
pub struct ScenePaths {
    pub image: PathBuf,
    pub depth: PathBuf,
    pub labels: PathBuf,
    pub meta: PathBuf,
}

impl Scene {
    pub fn width(&self) -> u32 {
        self.image.width
    }

    pub fn height(&self) -> u32 {
        self.image.height
    }

    /// Writes `image.png`, `depth.pgm`, `labels.png` and `labels.json`.
    pub fn write(&self, dir: &Path) -> Result<ScenePaths> {
        fs::create_dir_all(dir).map_err(|e| Error::write(dir, e))?;
        let paths = ScenePaths {
            image: dir.join("image.png"),
            depth: dir.join("depth.pgm"),
            labels: dir.join("labels.png"),
            meta: dir.join("labels.json"),
        };
        self.image.save_png(&paths.image)?;
        self.depth.save_pgm(&paths.depth)?;
        let seg = &self.segmentation;
        save_label_png(&paths.labels, seg.width, seg.height, &seg.labels)?;
        write_meta(&paths.meta, &seg.to_meta())?;
        Ok(paths)
    }
}

enum Shape {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

impl Shape {
    /// Normalized radial distance: 0 at the center, 1 on the boundary.
    fn radius(&self, x: f64, y: f64) -> f64 {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => {
                let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
                let (hx, hy) = ((x1 - x0) / 2.0, (y1 - y0) / 2.0);
                let r = ((x - cx) / hx).hypot((y - cy) / hy);
                if (x - cx).abs() <= hx && (y - cy).abs() <= hy {
                    r.min(1.0)
                } else {
                    f64::INFINITY
                }
            }
            Shape::Ellipse { cx, cy, rx, ry } => ((x - cx) / rx).hypot((y - cy) / ry),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x < x1 && y >= y0 && y < y1,
            Shape::Ellipse { .. } => self.radius(x, y) <= 1.0,
        }
    }
}

struct Thing {
    shape: Shape,
    color: Rgb,
    score: f64,
    category: &'static str,
}

/// Dome profile of a thing: `near` at its center falling to `rim` at its edge.
fn dome(r: f64, rim: f64, near: f64) -> f64 {
    rim + (near - rim) * (1.0 - r.min(1.0)).powi(2)
}

fn lerp_color(a: Rgb, b: Rgb, t: f64) -> Rgb {
    let mix = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    [mix(0), mix(1), mix(2)]
}

/// Composes things (later ones on top) over a vertically graded background
/// stuff region whose depth runs from `bg_depth.0` at the top to `bg_depth.1`
/// at the bottom. Depth is stored nearer-high.
fn compose(
    width: u32,
    height: u32,
    things: &[Thing],
    bg_colors: (Rgb, Rgb),
    bg_depth: (f64, f64),
) -> Scene {
    let n = width as usize * height as usize;
    let bg_id = things.len() as u32 + 1;
    let mut pixels = Vec::with_capacity(n);
    let mut depth = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for y in 0..height {
        let t = if height > 1 { y as f64 / (height - 1) as f64 } else { 0.0 };
        for x in 0..width {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let top = things
                .iter()
                .enumerate()
                .rev()
                .find(|(_, th)| th.shape.contains(px, py));
            match top {
                Some((i, th)) => {
                    pixels.push(th.color);
                    depth.push(dome(th.shape.radius(px, py), 0.05, 0.7));
                    labels.push(i as u32 + 1);
                }
                None => {
                    pixels.push(lerp_color(bg_colors.0, bg_colors.1, t));
                    depth.push(bg_depth.0 + (bg_depth.1 - bg_depth.0) * t);
                    labels.push(bg_id);
                }
            }
        }
    }
    let mut meta: Vec<PredictionMeta> = things
        .iter()
        .enumerate()
        .map(|(i, th)| PredictionMeta {
            id: i as u32 + 1,
            kind: PredictionKind::Thing,
            score: th.score,
            category: th.category.to_string(),
            semantic_group: 0,
        })
        .collect();
    meta.push(PredictionMeta {
        id: bg_id,
        kind: PredictionKind::Stuff,
        score: 1.0,
        category: "wall".to_string(),
        semantic_group: 4,
    });
    let present: std::collections::HashSet<u32> = labels.iter().copied().collect();
    meta.retain(|m| present.contains(&m.id));
    Scene {
        image: Image::new(width, height, pixels).expect("buffer sized to dimensions"),
        depth: DepthMap::new(width, height, depth, DepthConvention::NearerHigh)
            .expect("depth values lie in [0,1]"),
        segmentation: Segmentation::from_parts(width, height, labels, meta)
            .expect("labels match metadata"),
    }
}

/// The 640x512 reference scene: a red rectangle and a yellow disc, both
/// domed toward the viewer, on a graded background receding from 0.28 at the
/// bottom to 0.1 at the top.
pub fn reference_scene() -> Scene {
    let things = [
        Thing {
            shape: Shape::Rect { x0: 20.0, y0: 40.0, x1: 320.0, y1: 260.0 },
            color: [200, 30, 30],
            score: 0.95,
            category: "box",
        },
        Thing {
            shape: Shape::Ellipse { cx: 470.0, cy: 300.0, rx: 140.0, ry: 140.0 },
            color: [240, 210, 40],
            score: 0.9,
            category: "ball",
        },
    ];
    compose(640, 512, &things, ([70, 110, 190], [60, 150, 80]), (0.1, 0.28))
}

/// A random scene: one to four things (rectangles or ellipses) of random
/// uniform colors over a graded background.
pub fn random_scene(width: u32, height: u32, rng_seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (w, h) = (width as f64, height as f64);
    let count = rng.random_range(1..=4);
    let categories = ["person", "cup", "chair", "dog"];
    let things: Vec<Thing> = (0..count)
        .map(|i| {
            let cx = rng.random_range(0.15..0.85) * w;
            let cy = rng.random_range(0.15..0.85) * h;
            let rx = rng.random_range(0.08..0.3) * w;
            let ry = rng.random_range(0.08..0.3) * h;
            let shape = if rng.random_bool(0.5) {
                Shape::Rect { x0: cx - rx, y0: cy - ry, x1: cx + rx, y1: cy + ry }
            } else {
                Shape::Ellipse { cx, cy, rx, ry }
            };
            Thing {
                shape,
                color: [rng.random(), rng.random(), rng.random()],
                score: rng.random_range(0.5..1.0),
                category: categories[i % categories.len()],
            }
        })
        .collect();
    let near = rng.random_range(0.1..0.3);
    let bg_colors = ([rng.random(), rng.random(), rng.random()], [rng.random(), rng.random(), rng.random()]);
    compose(width, height, &things, bg_colors, (near, near + rng.random_range(0.0..0.2)))
}

/// Small scenes used for fidelity measurements: the reference layout at
/// reduced size plus a handful of random scenes.
pub fn standard_corpus() -> Vec<(String, Scene)> {
    let mut corpus = vec![("reference".to_string(), scaled_reference(160, 128))];
    for seed in 1..=3u64 {
        corpus.push((format!("random{seed}"), random_scene(160, 128, seed)));
    }
    corpus
}

/// The reference scene layout at another resolution.
pub fn scaled_reference(width: u32, height: u32) -> Scene {
    let (sx, sy) = (width as f64 / 640.0, height as f64 / 512.0);
    let r = 140.0 * sx.min(sy);
    let things = [
        Thing {
            shape: Shape::Rect { x0: 20.0 * sx, y0: 40.0 * sy, x1: 320.0 * sx, y1: 260.0 * sy },
            color: [200, 30, 30],
            score: 0.95,
            category: "box",
        },
        Thing {
            shape: Shape::Ellipse { cx: 470.0 * sx, cy: 300.0 * sy, rx: r, ry: r },
            color: [240, 210, 40],
            score: 0.9,
            category: "ball",
        },
    ];
    compose(width, height, &things, ([70, 110, 190], [60, 150, 80]), (0.1, 0.28))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::{load_depth, load_image, load_labels};

    #[test]
    fn reference_scene_layout() {
        let s = reference_scene();
        assert_eq!((s.width(), s.height()), (640, 512));
        let seg = &s.segmentation;
        assert_eq!(seg.predictions.len(), 3);
        let rect = seg.prediction(1).unwrap();
        assert_eq!(rect.area, 300 * 220);
        assert_eq!(s.image.get(100, 100), [200, 30, 30]);
        assert_eq!(s.image.get(470, 300), [240, 210, 40]);
        assert!((s.depth.get(470, 300) - 0.7).abs() < 1e-2);
        assert!((s.depth.get(630, 0) - 0.1).abs() < 1e-12);
        assert!((s.depth.get(630, 511) - 0.28).abs() < 1e-12);
    }

    #[test]
    fn random_scenes_are_reproducible() {
        let a = random_scene(64, 48, 9);
        let b = random_scene(64, 48, 9);
        assert_eq!(a.image, b.image);
        assert_eq!(a.segmentation, b.segmentation);
    }

    #[test]
    fn written_scene_loads_back() {
        let dir = tempfile::tempdir().unwrap();
        let s = random_scene(40, 30, 3);
        let p = s.write(dir.path()).unwrap();
        assert_eq!(load_image(&p.image).unwrap(), s.image);
        let d = load_depth(&p.depth, DepthConvention::NearerHigh).unwrap();
        for (a, b) in d.values.iter().zip(&s.depth.values) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
        assert_eq!(load_labels(&p.labels, &p.meta).unwrap(), s.segmentation);
    }
}
