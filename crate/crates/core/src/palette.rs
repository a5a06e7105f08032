//! k-means color palette over RGB pixels.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imagecore::{Image, Rgb};

/// Pixel sets larger than this are stride-subsampled before clustering.
pub const MAX_CLUSTER_PIXELS: usize = 1_000_000;

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Palette {
    pub colors: Vec<Rgb>,
    pub k: usize,
}

impl Palette {
    pub fn from_colors(colors: Vec<Rgb>) -> Result<Self> {
        if colors.is_empty() {
            return Err(Error::InvalidParameter("palette must not be empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = colors.iter().find(|c| !seen.insert(**c)) {
            return Err(Error::InvalidParameter(format!(
                "duplicate palette color {dup:?}"
            )));
        }
        let k = colors.len();
        Ok(Palette { colors, k })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.colors).expect("palette serializes")
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::write(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
        let colors: Vec<Rgb> = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_colors(colors)
    }
}

/// Index of the nearest palette color (squared RGB distance, lowest index on ties).
pub fn quantize(color: Rgb, palette: &Palette) -> usize {
    let mut best = 0;
    let mut best_d = i32::MAX;
    for (i, p) in palette.colors.iter().enumerate() {
        let d = sq_dist_u8(color, *p);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[inline]
fn sq_dist_u8(a: Rgb, b: Rgb) -> i32 {
    (0..3)
        .map(|c| {
            let d = a[c] as i32 - b[c] as i32;
            d * d
        })
        .sum()
}

#[inline]
fn sq_dist(p: Rgb, c: &[f64; 3]) -> f64 {
    let dr = p[0] as f64 - c[0];
    let dg = p[1] as f64 - c[1];
    let db = p[2] as f64 - c[2];
    dr * dr + dg * dg + db * db
}

/// Builds a palette of at most `k` colors. See [`build_palette_traced`].
pub fn build_palette(image: &Image, k: usize, rng_seed: u64, max_iters: usize) -> Result<Palette> {
    build_palette_traced(image, k, rng_seed, max_iters).map(|(p, _)| p)
}

/// Lloyd's k-means with k-means++ seeding; also returns the within-cluster SSE
/// measured after every assignment step.
///
/// When the image has no more than `k` distinct colors those colors are
/// returned directly (sorted) and the trace is empty.
pub fn build_palette_traced(
    image: &Image,
    k: usize,
    rng_seed: u64,
    max_iters: usize,
) -> Result<(Palette, Vec<f64>)> {
    if k == 0 {
        return Err(Error::InvalidParameter("palette size k must be >= 1".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidParameter("maxIters must be >= 1".into()));
    }
    let points = sample_pixels(&image.pixels);

    let mut distinct: Vec<Rgb> = points
        .iter()
        .copied()
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    if distinct.len() <= k {
        distinct.sort_unstable();
        return Ok((Palette { colors: distinct, k }, Vec::new()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut centroids = kmeans_plus_plus(&points, k, &mut rng);
    let mut assign = vec![usize::MAX; points.len()];
    let mut trace = Vec::new();

    for iter in 0..max_iters {
        let (changed, sse) = assign_step(&points, &centroids, &mut assign);
        trace.push(sse);
        if iter > 0 && !changed {
            break;
        }
        centroids = update_step(&points, &mut assign, centroids.len());
    }

    let mut colors: Vec<Rgb> = Vec::with_capacity(centroids.len());
    for c in &centroids {
        let rgb = [round_channel(c[0]), round_channel(c[1]), round_channel(c[2])];
        if !colors.contains(&rgb) {
            colors.push(rgb);
        }
    }
    Ok((Palette { colors, k }, trace))
}

fn round_channel(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn sample_pixels(pixels: &[Rgb]) -> Vec<Rgb> {
    if pixels.len() <= MAX_CLUSTER_PIXELS {
        return pixels.to_vec();
    }
    let stride = pixels.len().div_ceil(MAX_CLUSTER_PIXELS);
    pixels.iter().step_by(stride).copied().collect()
}

fn kmeans_plus_plus(points: &[Rgb], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let first = points[rng.random_range(0..points.len())];
    let mut centroids = vec![to_f64(first)];
    let mut d2: Vec<f64> = points.iter().map(|&p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            break;
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            chosen = Some(i);
            if acc > target {
                break;
            }
        }
        let c = to_f64(points[chosen.expect("positive total implies a candidate")]);
        for (d, &p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn to_f64(c: Rgb) -> [f64; 3] {
    [c[0] as f64, c[1] as f64, c[2] as f64]
}

/// Assigns every point to its nearest centroid. Returns whether any assignment
/// changed and the resulting SSE. Chunked so the float sum is independent of
/// the worker count.
fn assign_step(points: &[Rgb], centroids: &[[f64; 3]], assign: &mut [usize]) -> (bool, f64) {
    let partials: Vec<(bool, f64)> = points
        .par_chunks(CHUNK)
        .zip(assign.par_chunks_mut(CHUNK))
        .map(|(pts, asg)| {
            let mut changed = false;
            let mut sse = 0.0;
            for (p, a) in pts.iter().zip(asg.iter_mut()) {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (j, c) in centroids.iter().enumerate() {
                    let d = sq_dist(*p, c);
                    if d < best_d {
                        best_d = d;
                        best = j;
                    }
                }
                if *a != best {
                    *a = best;
                    changed = true;
                }
                sse += best_d;
            }
            (changed, sse)
        })
        .collect();
    partials
        .into_iter()
        .fold((false, 0.0), |(c, s), (pc, ps)| (c || pc, s + ps))
}

/// Recomputes centroids as cluster means and drops empty clusters, remapping
/// `assign` to the surviving indices.
fn update_step(points: &[Rgb], assign: &mut [usize], k: usize) -> Vec<[f64; 3]> {
    let sums = points
        .par_chunks(CHUNK)
        .zip(assign.par_chunks(CHUNK))
        .map(|(pts, asg)| {
            let mut acc = vec![[0u64; 4]; k];
            for (p, &a) in pts.iter().zip(asg) {
                let s = &mut acc[a];
                s[0] += p[0] as u64;
                s[1] += p[1] as u64;
                s[2] += p[2] as u64;
                s[3] += 1;
            }
            acc
        })
        .reduce(
            || vec![[0u64; 4]; k],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for c in 0..4 {
                        x[c] += y[c];
                    }
                }
                a
            },
        );
    let mut remap = vec![usize::MAX; k];
    let mut centroids = Vec::with_capacity(k);
    for (j, s) in sums.iter().enumerate() {
        if s[3] == 0 {
            continue;
        }
        remap[j] = centroids.len();
        let n = s[3] as f64;
        centroids.push([s[0] as f64 / n, s[1] as f64 / n, s[2] as f64 / n]);
    }
    if centroids.len() < k {
        for a in assign.iter_mut() {
            *a = remap[*a];
        }
    }
    centroids
}
