//! Frame construction and the layered-depth seed plan.
//!
//! Each prediction's seeds are split by depth bin, visited from the farthest
//! bin to the nearest, and every resulting frame is sorted on a coarse grid
//! (row-major cells, then `(y, x)` inside a cell). Frames are concatenated
//! prediction by prediction in painting order.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{bin_of, build_histogram_with, default_sigma, smooth_depth, BinMode, DepthHistogram};
use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::imagecore::{DepthMap, Image, Prediction, PredictionKind, Segmentation};
use crate::segmentation::{
    allocate_budgets, order_predictions, region_centroids, superpixels_with_gradient, Mask, Seed,
    SeedSet, SuperpixelRegions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub rows: u32,
    pub cols: u32,
}

impl Default for GridDims {
    fn default() -> Self {
        GridDims { rows: 5, cols: 5 }
    }
}

impl std::str::FromStr for GridDims {
    type Err = String;

    /// Parses `RxC`, e.g. `5x5`.
    fn from_str(s: &str) -> Result<Self, String> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected RxC, got {s:?}"))?;
        let rows: u32 = r.trim().parse().map_err(|_| format!("bad row count in {s:?}"))?;
        let cols: u32 = c.trim().parse().map_err(|_| format!("bad column count in {s:?}"))?;
        if rows == 0 || cols == 0 {
            return Err(format!("grid dimensions must be >= 1, got {s:?}"));
        }
        Ok(GridDims { rows, cols })
    }
}

impl std::fmt::Display for GridDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Grid cell `(row, col)` of a pixel.
#[inline]
pub fn grid_cell(seed: Seed, grid: GridDims, width: u32, height: u32) -> (u32, u32) {
    let row = (grid.rows as u64 * seed.y() as u64 / height as u64) as u32;
    let col = (grid.cols as u64 * seed.x() as u64 / width as u64) as u32;
    (row, col)
}

/// Seeds of one prediction that fall into one depth bin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Frame {
    pub prediction_id: u32,
    pub bin_index: usize,
    pub seeds: Vec<Seed>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPlan {
    pub frames: Vec<Frame>,
    pub grid: GridDims,
}

impl SeedPlan {
    pub fn seed_count(&self) -> usize {
        self.frames.iter().map(|f| f.seeds.len()).sum()
    }

    /// `(frame index, frame, seed)` in plan order.
    pub fn iter_seeds(&self) -> impl Iterator<Item = (usize, &Frame, Seed)> {
        self.frames
            .iter()
            .enumerate()
            .flat_map(|(i, f)| f.seeds.iter().map(move |&s| (i, f, s)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.frames).expect("frames serialize")
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::write(path, e))
    }

    pub fn load_json(path: &Path, grid: GridDims) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let frames = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(SeedPlan { frames, grid })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlanParams {
    /// Gaussian sigma for depth smoothing; `None` uses diagonal / 200.
    pub sigma: Option<f64>,
    pub bin_count: usize,
    pub grid: GridDims,
    pub bin_mode: BinMode,
    /// Emit the first `k` frames of every thing before going prediction-major.
    pub interleave_first_k: Option<usize>,
}

impl Default for PlanParams {
    fn default() -> Self {
        PlanParams {
            sigma: None,
            bin_count: 8,
            grid: GridDims::default(),
            bin_mode: BinMode::EqualWidth,
            interleave_first_k: None,
        }
    }
}

/// Splits `seeds` into frames: one per non-empty bin in traversal order, each
/// sorted by (grid row, grid col, y, x).
pub fn compute_frames(
    hist: &DepthHistogram,
    seeds: &SeedSet,
    smoothed: &DepthMap,
    grid: GridDims,
) -> Vec<Frame> {
    let (w, h) = (smoothed.width, smoothed.height);
    let mut per_bin: Vec<Vec<Seed>> = vec![Vec::new(); hist.bin_count];
    for &s in &seeds.seeds {
        per_bin[bin_of(smoothed.get(s.x(), s.y()), hist)].push(s);
    }
    hist.traversal
        .iter()
        .filter_map(|&b| {
            let mut frame = std::mem::take(&mut per_bin[b]);
            if frame.is_empty() {
                return None;
            }
            frame.sort_by_key(|&s| {
                let (r, c) = grid_cell(s, grid, w, h);
                (r, c, s.y(), s.x())
            });
            Some(Frame {
                prediction_id: seeds.prediction_id,
                bin_index: b,
                seeds: frame,
            })
        })
        .collect()
}

/// Intermediate products of [`layered_depth_plan_detailed`], useful for
/// debug dumps.
#[derive(Debug, Clone)]
pub struct PlanDetails {
    pub smoothed: DepthMap,
    pub histogram: DepthHistogram,
    pub order: Vec<Prediction>,
    pub budgets: Vec<u64>,
    pub regions: Vec<Option<SuperpixelRegions>>,
    pub seed_sets: Vec<SeedSet>,
}

/// The full layered-depth ordering of stroke seeds.
pub fn layered_depth_plan(
    image: &Image,
    seg: &Segmentation,
    depth: &DepthMap,
    n: u64,
    params: &PlanParams,
) -> Result<SeedPlan> {
    layered_depth_plan_detailed(image, seg, depth, n, params).map(|(p, _)| p)
}

pub fn layered_depth_plan_detailed(
    image: &Image,
    seg: &Segmentation,
    depth: &DepthMap,
    n: u64,
    params: &PlanParams,
) -> Result<(SeedPlan, PlanDetails)> {
    if n == 0 {
        return Err(Error::InvalidParameter("stroke count must be >= 1".into()));
    }
    if params.grid.rows == 0 || params.grid.cols == 0 {
        return Err(Error::InvalidParameter("grid dimensions must be >= 1".into()));
    }
    depth.check_dims(image)?;
    seg.check_dims(image)?;

    let order = order_predictions(seg);
    let sigma = params
        .sigma
        .unwrap_or_else(|| default_sigma(image.width, image.height));
    let smoothed = smooth_depth(depth, sigma)?;
    let histogram = build_histogram_with(&smoothed, params.bin_count, params.bin_mode)?;
    let budgets = allocate_budgets(&order, image.pixel_count() as u64, n);

    let magnitude = GradientField::of_image(image).magnitude();
    let mut pixel_lists = seg.pixel_lists();
    let masks: Vec<Mask> = order
        .iter()
        .map(|p| Mask {
            width: image.width,
            height: image.height,
            pixels: pixel_lists.remove(&p.id).unwrap_or_default(),
        })
        .collect();

    let seeded: Vec<(Option<SuperpixelRegions>, SeedSet)> = order
        .par_iter()
        .zip(masks.into_par_iter())
        .zip(budgets.par_iter())
        .map(|((pred, mask), &budget)| -> Result<_> {
            if budget == 0 || mask.is_empty() {
                return Ok((
                    None,
                    SeedSet {
                        prediction_id: pred.id,
                        seeds: Vec::new(),
                    },
                ));
            }
            let regions = superpixels_with_gradient(&magnitude, &mask, budget as usize)?;
            let seeds = region_centroids(&regions, pred.id);
            Ok((Some(regions), seeds))
        })
        .collect::<Result<_>>()?;

    let per_prediction: Vec<Vec<Frame>> = seeded
        .iter()
        .map(|(_, seeds)| {
            if seeds.seeds.is_empty() {
                Vec::new()
            } else {
                compute_frames(&histogram, seeds, &smoothed, params.grid)
            }
        })
        .collect();

    let frames = match params.interleave_first_k {
        None => per_prediction.into_iter().flatten().collect(),
        Some(k) => interleave_first_k(&order, per_prediction, k),
    };

    let (regions, seed_sets) = seeded.into_iter().unzip();
    Ok((
        SeedPlan {
            frames,
            grid: params.grid,
        },
        PlanDetails {
            smoothed,
            histogram,
            order,
            budgets,
            regions,
            seed_sets,
        },
    ))
}

fn interleave_first_k(order: &[Prediction], per_prediction: Vec<Vec<Frame>>, k: usize) -> Vec<Frame> {
    let mut head = Vec::new();
    let mut tail = Vec::new();
    for (pred, frames) in order.iter().zip(per_prediction) {
        if pred.kind == PredictionKind::Thing {
            let split = k.min(frames.len());
            let mut frames = frames;
            let rest = frames.split_off(split);
            head.extend(frames);
            tail.push(rest);
        } else {
            tail.push(frames);
        }
    }
    head.into_iter().chain(tail.into_iter().flatten()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth::build_histogram;
    use crate::imagecore::{DepthConvention, PredictionMeta};

    fn const_depth(w: u32, h: u32, v: f64) -> DepthMap {
        DepthMap::new(w, h, vec![v; (w * h) as usize], DepthConvention::NearerHigh).unwrap()
    }

    #[test]
    fn same_depth_single_frame() {
        let d = const_depth(10, 10, 0.5);
        let hist = build_histogram(&d, 8).unwrap();
        let seeds = SeedSet {
            prediction_id: 3,
            seeds: vec![Seed(1, 1), Seed(8, 2), Seed(4, 9)],
        };
        let frames = compute_frames(&hist, &seeds, &d, GridDims::default());
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].seeds.len(), 3);
        assert_eq!(frames[0].prediction_id, 3);
    }

    #[test]
    fn grid_cells_order_before_coordinates() {
        let d = const_depth(100, 100, 0.2);
        let hist = build_histogram(&d, 8).unwrap();
        let input = vec![Seed(10, 60), Seed(60, 10), Seed(10, 10)];
        // oracle: enumerate cells by hand with integer arithmetic
        let cell = |s: Seed| ((5 * s.y()) / 100, (5 * s.x()) / 100);
        assert_eq!(cell(Seed(10, 10)), (0, 0));
        assert_eq!(cell(Seed(60, 10)), (0, 3));
        assert_eq!(cell(Seed(10, 60)), (3, 0));
        let mut expected = input.clone();
        expected.sort_by_key(|&s| (cell(s), s.y(), s.x()));
        let frames = compute_frames(
            &hist,
            &SeedSet { prediction_id: 0, seeds: input },
            &d,
            GridDims::default(),
        );
        assert_eq!(frames[0].seeds, expected);
        assert_eq!(expected, vec![Seed(10, 10), Seed(60, 10), Seed(10, 60)]);
    }

    #[test]
    fn same_cell_sorts_by_row_then_column() {
        let d = const_depth(100, 100, 0.2);
        let hist = build_histogram(&d, 8).unwrap();
        let frames = compute_frames(
            &hist,
            &SeedSet { prediction_id: 0, seeds: vec![Seed(9, 5), Seed(2, 5)] },
            &d,
            GridDims::default(),
        );
        assert_eq!(frames[0].seeds, vec![Seed(2, 5), Seed(9, 5)]);
    }

    #[test]
    fn grid_parses() {
        assert_eq!("5x5".parse::<GridDims>().unwrap(), GridDims { rows: 5, cols: 5 });
        assert_eq!("3X7".parse::<GridDims>().unwrap(), GridDims { rows: 3, cols: 7 });
        assert!("0x5".parse::<GridDims>().is_err());
        assert!("55".parse::<GridDims>().is_err());
    }

    fn meta(id: u32, kind: PredictionKind, score: f64, group: u32) -> PredictionMeta {
        PredictionMeta { id, kind, score, category: String::new(), semantic_group: group }
    }

    fn textured(w: u32, h: u32) -> Image {
        let mut img = Image::filled(w, h, [0; 3]);
        for y in 0..h {
            for x in 0..w {
                let v = ((x * 13 + y * 7) % 97) as u8;
                img.set(x, y, [v, v / 2, 255 - v]);
            }
        }
        img
    }

    #[test]
    fn degenerate_single_prediction() {
        let img = textured(40, 30);
        let seg = Segmentation::from_parts(40, 30, vec![0; 1200], vec![meta(0, PredictionKind::Stuff, 1.0, 0)])
            .unwrap();
        let plan = layered_depth_plan(&img, &seg, &const_depth(40, 30, 0.6), 50, &PlanParams::default())
            .unwrap();
        assert_eq!(plan.frames.len(), 1);
        assert!(plan.seed_count() <= 50);
        assert_eq!(plan.seed_count(), 50);
    }

    #[test]
    fn things_precede_stuff() {
        let img = textured(40, 30);
        let labels: Vec<u32> = (0..1200).map(|i| if i % 40 < 15 { 1 } else { 2 }).collect();
        let seg = Segmentation::from_parts(
            40,
            30,
            labels,
            vec![meta(1, PredictionKind::Thing, 0.8, 0), meta(2, PredictionKind::Stuff, 1.0, 1)],
        )
        .unwrap();
        let v: Vec<f64> = (0..1200).map(|i| (i % 40) as f64 / 39.0).collect();
        let depth = DepthMap::new(40, 30, v, DepthConvention::NearerHigh).unwrap();
        let plan = layered_depth_plan(&img, &seg, &depth, 120, &PlanParams::default()).unwrap();
        let ids: Vec<u32> = plan.frames.iter().map(|f| f.prediction_id).collect();
        let first_stuff = ids.iter().position(|&i| i == 2).unwrap();
        assert!(ids[..first_stuff].iter().all(|&i| i == 1));
        assert!(ids[first_stuff..].iter().all(|&i| i == 2));
        assert_eq!(plan.seed_count(), 120);
    }

    #[test]
    fn farthest_bin_first_for_ramp() {
        let (w, h) = (64u32, 64u32);
        let img = textured(w, h);
        let seg = Segmentation::from_parts(w, h, vec![0; (w * h) as usize], vec![meta(0, PredictionKind::Stuff, 1.0, 0)])
            .unwrap();
        let v: Vec<f64> = (0..w * h).map(|i| (i / w) as f64 / (h - 1) as f64).collect();
        let depth = DepthMap::new(w, h, v, DepthConvention::NearerLow).unwrap();
        let params = PlanParams { sigma: Some(0.0), ..Default::default() };
        let (plan, details) = layered_depth_plan_detailed(&img, &seg, &depth, 200, &params).unwrap();
        let first = &plan.frames[0];
        assert_eq!(first.bin_index, 7);
        for s in &first.seeds {
            assert_eq!(bin_of(details.smoothed.get(s.x(), s.y()), &details.histogram), 7);
        }
    }

    #[test]
    fn interleave_emits_thing_heads_first() {
        let img = textured(60, 40);
        let labels: Vec<u32> = (0..2400)
            .map(|i| match i % 60 { 0..=19 => 1, 20..=39 => 2, _ => 3 })
            .collect();
        let seg = Segmentation::from_parts(
            60,
            40,
            labels,
            vec![
                meta(1, PredictionKind::Thing, 0.9, 0),
                meta(2, PredictionKind::Thing, 0.5, 0),
                meta(3, PredictionKind::Stuff, 1.0, 0),
            ],
        )
        .unwrap();
        let v: Vec<f64> = (0..2400).map(|i| (i / 60) as f64 / 39.0).collect();
        let depth = DepthMap::new(60, 40, v, DepthConvention::NearerHigh).unwrap();
        let params = PlanParams { sigma: Some(0.0), interleave_first_k: Some(1), ..Default::default() };
        let plan = layered_depth_plan(&img, &seg, &depth, 300, &params).unwrap();
        let ids: Vec<u32> = plan.frames.iter().map(|f| f.prediction_id).collect();
        assert_eq!(&ids[..3], &[1, 2, 1]);
        let base = layered_depth_plan(&img, &seg, &depth, 300, &PlanParams { sigma: Some(0.0), ..Default::default() })
            .unwrap();
        assert_eq!(base.seed_count(), plan.seed_count());
    }

    #[test]
    fn mismatched_dims_are_rejected() {
        let img = textured(10, 10);
        let seg = Segmentation::from_parts(10, 10, vec![0; 100], vec![meta(0, PredictionKind::Stuff, 1.0, 0)]).unwrap();
        let err = layered_depth_plan(&img, &seg, &const_depth(9, 10, 0.1), 10, &PlanParams::default()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(layered_depth_plan(&img, &seg, &const_depth(10, 10, 0.1), 0, &PlanParams::default()).is_err());
    }

    #[test]
    fn seed_plan_json_shape() {
        let plan = SeedPlan {
            frames: vec![Frame { prediction_id: 4, bin_index: 2, seeds: vec![Seed(1, 2), Seed(3, 4)] }],
            grid: GridDims::default(),
        };
        assert_eq!(plan.to_json(), r#"[{"predictionId":4,"binIndex":2,"seeds":[[1,2],[3,4]]}]"#);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seeds.json");
        plan.save_json(&p).unwrap();
        assert_eq!(SeedPlan::load_json(&p, plan.grid).unwrap(), plan);
    }
}
