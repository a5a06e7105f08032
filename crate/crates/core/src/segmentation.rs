//! Prediction ordering, stroke budgets and superpixel seeding.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradient::GradientField;
use crate::imagecore::{save_label_png, Image, Prediction, PredictionKind, Segmentation};

const NONE: u32 = u32::MAX;

/// A stroke seed pixel, serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Seed(pub u32, pub u32);

impl Seed {
    #[inline]
    pub fn x(self) -> u32 {
        self.0
    }
    #[inline]
    pub fn y(self) -> u32 {
        self.1
    }
}

/// Candidate seeds for one prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedSet {
    pub prediction_id: u32,
    pub seeds: Vec<Seed>,
}

/// The pixels of one prediction, row-major and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u32>,
}

impl Mask {
    pub fn new(width: u32, height: u32, mut pixels: Vec<u32>) -> Self {
        pixels.sort_unstable();
        pixels.dedup();
        Mask {
            width,
            height,
            pixels,
        }
    }

    pub fn from_segmentation(seg: &Segmentation, id: u32) -> Self {
        let pixels = seg
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == id)
            .map(|(i, _)| i as u32)
            .collect();
        Mask {
            width: seg.width,
            height: seg.height,
            pixels,
        }
    }

    pub fn from_predicate(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut pixels = Vec::new();
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    pixels.push(y * width + x);
                }
            }
        }
        Mask {
            width,
            height,
            pixels,
        }
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn coords(&self, k: usize) -> (u32, u32) {
        let p = self.pixels[k];
        (p % self.width, p / self.width)
    }

    /// Inclusive bounding box `(x0, y0, x1, y1)`.
    pub fn bbox(&self) -> Option<(u32, u32, u32, u32)> {
        let first = *self.pixels.first()?;
        let last = *self.pixels.last()?;
        let (mut x0, mut x1) = (u32::MAX, 0);
        for &p in &self.pixels {
            let x = p % self.width;
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        Some((x0, first / self.width, x1, last / self.width))
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.pixels.binary_search(&(y * self.width + x)).is_ok()
    }
}

/// Things by decreasing weight (then larger area, then lower id), followed by
/// stuff by ascending semantic group (then lower id).
pub fn order_predictions(seg: &Segmentation) -> Vec<Prediction> {
    let mut out = seg.predictions.clone();
    out.sort_by(compare_for_painting);
    out
}

fn compare_for_painting(a: &Prediction, b: &Prediction) -> Ordering {
    use PredictionKind::*;
    match (a.kind, b.kind) {
        (Thing, Stuff) => Ordering::Less,
        (Stuff, Thing) => Ordering::Greater,
        (Thing, Thing) => b
            .weight
            .total_cmp(&a.weight)
            .then(b.area.cmp(&a.area))
            .then(a.id.cmp(&b.id)),
        (Stuff, Stuff) => a
            .semantic_group
            .cmp(&b.semantic_group)
            .then(a.id.cmp(&b.id)),
    }
}

/// Area-proportional share of `total_strokes`, rounded half up, at least one
/// for any non-empty prediction.
pub fn seed_budget(prediction: &Prediction, image: &Image, total_strokes: u64) -> u64 {
    budget_for(prediction.area, image.pixel_count() as u64, total_strokes)
}

fn budget_for(area: u64, total_pixels: u64, n: u64) -> u64 {
    if area == 0 {
        return 0;
    }
    let ideal = area as f64 / total_pixels as f64 * n as f64;
    ((ideal + 0.5).floor() as u64).max(1)
}

/// Budgets for a list of predictions, corrected so they sum to `n`.
///
/// Overruns are trimmed from the prediction furthest above its ideal share
/// (ties: larger area first); shortfalls go to the one furthest below. No
/// non-empty prediction drops below one seed, so when `n` is smaller than the
/// number of non-empty predictions the sum stays above `n`.
pub fn allocate_budgets(predictions: &[Prediction], total_pixels: u64, n: u64) -> Vec<u64> {
    let ideal: Vec<f64> = predictions
        .iter()
        .map(|p| p.area as f64 / total_pixels as f64 * n as f64)
        .collect();
    let mut budgets: Vec<u64> = predictions
        .iter()
        .map(|p| budget_for(p.area, total_pixels, n))
        .collect();
    let mut sum: u64 = budgets.iter().sum();

    let pick = |budgets: &[u64], eligible: &dyn Fn(usize) -> bool, key: &dyn Fn(usize) -> f64| {
        let mut best: Option<usize> = None;
        for i in (0..budgets.len()).filter(|&i| eligible(i)) {
            best = match best {
                None => Some(i),
                Some(j) => {
                    let ord = key(i)
                        .total_cmp(&key(j))
                        .then(predictions[i].area.cmp(&predictions[j].area));
                    if ord == Ordering::Greater {
                        Some(i)
                    } else {
                        Some(j)
                    }
                }
            };
        }
        best
    };

    while sum > n {
        let snapshot = budgets.clone();
        let Some(i) = pick(
            &snapshot,
            &|i| snapshot[i] > 1,
            &|i| snapshot[i] as f64 - ideal[i],
        ) else {
            break;
        };
        budgets[i] -= 1;
        sum -= 1;
    }
    while sum < n {
        let snapshot = budgets.clone();
        let Some(i) = pick(
            &snapshot,
            &|i| predictions[i].area > 0,
            &|i| ideal[i] - snapshot[i] as f64,
        ) else {
            break;
        };
        budgets[i] += 1;
        sum += 1;
    }
    budgets
}

/// Partition of a prediction mask into watershed regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelRegions {
    pub mask: Mask,
    /// Region id of each mask pixel, parallel to `mask.pixels`.
    pub region_of: Vec<u32>,
    pub region_count: usize,
}

impl SuperpixelRegions {
    /// Full-image region map: `region + 1` inside the mask, 0 elsewhere.
    pub fn to_label_map(&self) -> Vec<u32> {
        let mut map = vec![0u32; self.mask.width as usize * self.mask.height as usize];
        for (&p, &r) in self.mask.pixels.iter().zip(&self.region_of) {
            map[p as usize] = r + 1;
        }
        map
    }

    /// Debug dump as a 16-bit PNG (ids saturate at 65535).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let map: Vec<u32> = self.to_label_map().into_iter().map(|v| v.min(65535)).collect();
        save_label_png(path, self.mask.width, self.mask.height, &map)
    }
}

/// Marker-controlled watershed of the Sobel luma gradient inside `mask`.
///
/// `count` markers are placed by farthest-point sampling; the returned regions
/// cover the mask exactly with dense ids. `count` is clamped to the mask area.
pub fn superpixels(image: &Image, mask: &Mask, count: usize) -> Result<SuperpixelRegions> {
    if mask.width != image.width || mask.height != image.height {
        return Err(Error::DimensionMismatch {
            what: "mask",
            expected_w: image.width,
            expected_h: image.height,
            got_w: mask.width,
            got_h: mask.height,
        });
    }
    let magnitude = GradientField::of_image(image).magnitude();
    superpixels_with_gradient(&magnitude, mask, count)
}

/// [`superpixels`] over a precomputed full-image gradient magnitude.
pub fn superpixels_with_gradient(
    magnitude: &[f64],
    mask: &Mask,
    count: usize,
) -> Result<SuperpixelRegions> {
    if mask.is_empty() {
        return Err(Error::InvalidParameter("superpixels of an empty mask".into()));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("superpixel count must be >= 1".into()));
    }
    let m = mask.len();
    let (x0, y0, x1, y1) = mask.bbox().expect("non-empty mask");
    let bw = (x1 - x0 + 1) as usize;
    let bh = (y1 - y0 + 1) as usize;
    let mut local = vec![NONE; bw * bh];
    for k in 0..m {
        let (x, y) = mask.coords(k);
        local[(y - y0) as usize * bw + (x - x0) as usize] = k as u32;
    }
    let neighbors = |k: usize| -> [u32; 4] {
        let (x, y) = mask.coords(k);
        let lx = (x - x0) as usize;
        let ly = (y - y0) as usize;
        [
            if lx > 0 { local[ly * bw + lx - 1] } else { NONE },
            if lx + 1 < bw { local[ly * bw + lx + 1] } else { NONE },
            if ly > 0 { local[(ly - 1) * bw + lx] } else { NONE },
            if ly + 1 < bh { local[(ly + 1) * bw + lx] } else { NONE },
        ]
    };
    let priority = |k: usize| -> u32 {
        let g = magnitude[mask.pixels[k] as usize];
        (g * 64.0).round().clamp(0.0, u32::MAX as f64) as u32
    };

    let markers = farthest_point_markers(mask, count.min(m));
    let mut labels = vec![NONE; m];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for (r, &k) in markers.iter().enumerate() {
        labels[k] = r as u32;
        heap.push(Reverse((priority(k), seq, k as u32)));
        seq += 1;
    }
    while let Some(Reverse((_, _, k))) = heap.pop() {
        let k = k as usize;
        let label = labels[k];
        for n in neighbors(k) {
            if n != NONE && labels[n as usize] == NONE {
                labels[n as usize] = label;
                heap.push(Reverse((priority(n as usize), seq, n)));
                seq += 1;
            }
        }
    }

    // Mask components without a marker join the region of the marker nearest
    // to their first pixel.
    for start in 0..m {
        if labels[start] != NONE {
            continue;
        }
        let (sx, sy) = mask.coords(start);
        let label = markers
            .iter()
            .enumerate()
            .min_by_key(|(r, &k)| {
                let (mx, my) = mask.coords(k);
                let dx = mx as i64 - sx as i64;
                let dy = my as i64 - sy as i64;
                (dx * dx + dy * dy, *r)
            })
            .map(|(r, _)| r as u32)
            .expect("at least one marker");
        let mut queue = VecDeque::from([start]);
        labels[start] = label;
        while let Some(k) = queue.pop_front() {
            for n in neighbors(k) {
                if n != NONE && labels[n as usize] == NONE {
                    labels[n as usize] = label;
                    queue.push_back(n as usize);
                }
            }
        }
    }

    Ok(SuperpixelRegions {
        mask: mask.clone(),
        region_of: labels,
        region_count: markers.len(),
    })
}

/// Deterministic farthest-point sampling of `count` mask pixels.
///
/// Starts from the pixel farthest from the mask centroid. Large masks are
/// sampled on a coarse lattice of candidates (at least 16 per marker).
/// Returns mask-local indices.
fn farthest_point_markers(mask: &Mask, count: usize) -> Vec<usize> {
    let m = mask.len();
    let count = count.min(m);
    let stride = ((m as f64 / (count as f64 * 16.0)).sqrt().floor() as u32).max(1);
    let mut candidates: Vec<usize> = if stride > 1 {
        (0..m)
            .filter(|&k| {
                let (x, y) = mask.coords(k);
                x % stride == 0 && y % stride == 0
            })
            .collect()
    } else {
        Vec::new()
    };
    if candidates.len() < count {
        candidates = (0..m).collect();
    }
    let pts: Vec<(i64, i64)> = candidates
        .iter()
        .map(|&k| {
            let (x, y) = mask.coords(k);
            (x as i64, y as i64)
        })
        .collect();

    let (sx, sy) = (0..m).fold((0u64, 0u64), |(ax, ay), k| {
        let (x, y) = mask.coords(k);
        (ax + x as u64, ay + y as u64)
    });
    let cx = sx as f64 / m as f64;
    let cy = sy as f64 / m as f64;
    let mut first = 0;
    let mut first_d = -1.0;
    for (i, &(x, y)) in pts.iter().enumerate() {
        let d = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        if d > first_d {
            first_d = d;
            first = i;
        }
    }

    let mut chosen = vec![first];
    let mut min_d: Vec<i64> = pts.iter().map(|&p| sq(p, pts[first])).collect();
    while chosen.len() < count {
        let mut best = 0;
        let mut best_d = -1;
        for (i, &d) in min_d.iter().enumerate() {
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        if best_d <= 0 {
            break;
        }
        chosen.push(best);
        let b = pts[best];
        for (d, &p) in min_d.iter_mut().zip(&pts) {
            *d = (*d).min(sq(p, b));
        }
    }
    chosen.into_iter().map(|i| candidates[i]).collect()
}

#[inline]
fn sq(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)
}

/// One seed per region at its rounded centroid, snapped to the nearest pixel
/// of the region when the centroid falls outside it.
pub fn region_centroids(regions: &SuperpixelRegions, prediction_id: u32) -> SeedSet {
    let mask = &regions.mask;
    let n = regions.region_count;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sums = vec![(0u64, 0u64); n];
    for (k, &r) in regions.region_of.iter().enumerate() {
        let (x, y) = mask.coords(k);
        sums[r as usize].0 += x as u64;
        sums[r as usize].1 += y as u64;
        members[r as usize].push(k);
    }
    let mut seeds = Vec::with_capacity(n);
    for (r, pix) in members.iter().enumerate() {
        if pix.is_empty() {
            continue;
        }
        let cnt = pix.len() as f64;
        let cx = (sums[r].0 as f64 / cnt + 0.5).floor() as u32;
        let cy = (sums[r].1 as f64 / cnt + 0.5).floor() as u32;
        let target = cy * mask.width + cx;
        let inside = pix
            .binary_search_by(|&k| mask.pixels[k].cmp(&target))
            .is_ok();
        if inside {
            seeds.push(Seed(cx, cy));
            continue;
        }
        let nearest = pix
            .iter()
            .map(|&k| mask.coords(k))
            .min_by_key(|&(x, y)| {
                let dx = x as i64 - cx as i64;
                let dy = y as i64 - cy as i64;
                (dx * dx + dy * dy, y, x)
            })
            .expect("non-empty region");
        seeds.push(Seed(nearest.0, nearest.1));
    }
    SeedSet {
        prediction_id,
        seeds,
    }
}
