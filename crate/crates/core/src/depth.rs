//! Depth smoothing and the depth histogram that drives frame order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{DepthConvention, DepthMap};

/// Default smoothing: image diagonal / 200 pixels.
pub fn default_sigma(width: u32, height: u32) -> f64 {
    (width as f64).hypot(height as f64) / 200.0
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with radius `ceil(3 sigma)` and replicated borders.
/// `sigma == 0` returns the input unchanged.
pub fn smooth_depth(depth: &DepthMap, sigma: f64) -> Result<DepthMap> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(depth.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let r = (kernel.len() / 2) as i64;
    let (w, h) = (depth.width as i64, depth.height as i64);
    let src = &depth.values;
    let (lo, hi) = src
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));

    let mut tmp = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let xx = (x + i as i64 - r).clamp(0, w - 1);
                acc += kv * src[(y * w + xx) as usize];
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    let mut out = vec![0.0; src.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let yy = (y + i as i64 - r).clamp(0, h - 1);
                acc += kv * tmp[(yy * w + x) as usize];
            }
            out[(y * w + x) as usize] = acc.clamp(lo, hi);
        }
    }
    Ok(DepthMap {
        width: depth.width,
        height: depth.height,
        values: out,
        convention: depth.convention,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinMode {
    #[default]
    EqualWidth,
    EqualPopulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthHistogram {
    pub bin_count: usize,
    /// `bin_count + 1` ascending edges; bins are half-open except the last.
    pub edges: Vec<f64>,
    /// Bin indices from farthest to nearest.
    pub traversal: Vec<usize>,
    /// Pixel population per bin.
    pub counts: Vec<u64>,
}

impl DepthHistogram {
    pub fn min(&self) -> f64 {
        self.edges[0]
    }

    pub fn max(&self) -> f64 {
        *self.edges.last().expect("at least two edges")
    }
}

/// Equal-width histogram over `[min, max]` of `depth`.
pub fn build_histogram(depth: &DepthMap, bin_count: usize) -> Result<DepthHistogram> {
    build_histogram_with(depth, bin_count, BinMode::EqualWidth)
}

/// Histogram with the traversal set far-to-near according to the map's
/// convention. A constant map yields a single bin whose two edges coincide;
/// equal-population edges that coincide are merged.
pub fn build_histogram_with(
    depth: &DepthMap,
    bin_count: usize,
    mode: BinMode,
) -> Result<DepthHistogram> {
    if bin_count == 0 {
        return Err(Error::InvalidParameter("bin count must be >= 1".into()));
    }
    let (lo, hi) = depth
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let edges = if lo == hi {
        vec![lo, hi]
    } else {
        match mode {
            BinMode::EqualWidth => {
                let mut e: Vec<f64> = (0..=bin_count)
                    .map(|i| lo + (hi - lo) * i as f64 / bin_count as f64)
                    .collect();
                e[bin_count] = hi;
                e
            }
            BinMode::EqualPopulation => {
                let mut sorted = depth.values.clone();
                sorted.sort_by(f64::total_cmp);
                let n = sorted.len();
                let mut e = vec![lo];
                for i in 1..bin_count {
                    let q = sorted[i * n / bin_count];
                    if q > *e.last().unwrap() && q < hi {
                        e.push(q);
                    }
                }
                e.push(hi);
                e
            }
        }
    };
    let bins = edges.len() - 1;
    let traversal = match depth.convention {
        DepthConvention::NearerHigh => (0..bins).collect(),
        DepthConvention::NearerLow => (0..bins).rev().collect(),
    };
    let mut hist = DepthHistogram {
        bin_count: bins,
        edges,
        traversal,
        counts: vec![0; bins],
    };
    for &v in &depth.values {
        let b = bin_of(v, &hist);
        hist.counts[b] += 1;
    }
    Ok(hist)
}

/// Bin containing `value`; out-of-range values clamp to the first/last bin.
pub fn bin_of(value: f64, hist: &DepthHistogram) -> usize {
    let last = hist.bin_count - 1;
    if value >= hist.edges[last] {
        return last;
    }
    // largest i with edges[i] <= value
    let i = hist.edges[..=last].partition_point(|&e| e <= value);
    i.saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: u32, h: u32, v: Vec<f64>, c: DepthConvention) -> DepthMap {
        DepthMap::new(w, h, v, c).unwrap()
    }

    #[test]
    fn constant_map_is_unchanged_by_blur() {
        let d = map(7, 5, vec![0.3; 35], DepthConvention::NearerHigh);
        let s = smooth_depth(&d, 2.5).unwrap();
        for v in s.values {
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_sigma_is_identity() {
        let d = map(3, 1, vec![0.1, 0.7, 0.2], DepthConvention::NearerHigh);
        assert_eq!(smooth_depth(&d, 0.0).unwrap(), d);
        assert!(smooth_depth(&d, -1.0).is_err());
    }

    #[test]
    fn impulse_matches_direct_2d_gaussian() {
        let (w, h) = (21u32, 21u32);
        let mut v = vec![0.0; 441];
        v[10 * 21 + 10] = 1.0;
        let d = map(w, h, v, DepthConvention::NearerHigh);
        let s = smooth_depth(&d, 1.0).unwrap();
        // oracle: directly evaluated, normalized 2D kernel of radius 3
        let mut total = 0.0;
        for j in -3i32..=3 {
            for i in -3i32..=3 {
                total += (-((i * i + j * j) as f64) / 2.0).exp();
            }
        }
        for j in -3i32..=3 {
            for i in -3i32..=3 {
                let expect = (-((i * i + j * j) as f64) / 2.0).exp() / total;
                let got = s.values[((10 + j) * 21 + (10 + i)) as usize];
                assert!((got - expect).abs() < 1e-12, "({i},{j})");
            }
        }
        let mass: f64 = s.values.iter().sum();
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn blur_stays_within_input_range() {
        let v: Vec<f64> = (0..64).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let d = map(8, 8, v.clone(), DepthConvention::NearerHigh);
        let s = smooth_depth(&d, 3.0).unwrap();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(s.values.iter().all(|&x| x >= lo && x <= hi));
    }

    #[test]
    fn mean_is_preserved_on_interior_dominated_maps() {
        let (w, h) = (64u32, 64u32);
        let v: Vec<f64> = (0..w * h)
            .map(|i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                0.5 + 0.3 * (x / 5.0).sin() * (y / 7.0).cos()
            })
            .collect();
        let d = map(w, h, v.clone(), DepthConvention::NearerHigh);
        let s = smooth_depth(&d, 3.0).unwrap();
        let m0 = v.iter().sum::<f64>() / v.len() as f64;
        let m1 = s.values.iter().sum::<f64>() / v.len() as f64;
        assert!((m0 - m1).abs() < 1e-3, "{m0} vs {m1}");
    }

    #[test]
    fn two_bins_half_open() {
        let d = map(3, 1, vec![0.1, 0.5, 0.9], DepthConvention::NearerHigh);
        let h = build_histogram(&d, 2).unwrap();
        assert_eq!(h.edges, vec![0.1, 0.5, 0.9]);
        assert_eq!(bin_of(0.5, &h), 1);
        assert_eq!(bin_of(0.1, &h), 0);
        assert_eq!(h.counts, vec![1, 2]);
    }

    #[test]
    fn constant_map_single_bin() {
        let d = map(4, 4, vec![0.4; 16], DepthConvention::NearerHigh);
        let h = build_histogram(&d, 8).unwrap();
        assert_eq!(h.bin_count, 1);
        assert_eq!(h.counts, vec![16]);
        assert_eq!(bin_of(0.4, &h), 0);
    }

    #[test]
    fn traversal_follows_convention() {
        let v: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
        let near_high = build_histogram(&map(16, 1, v.clone(), DepthConvention::NearerHigh), 8).unwrap();
        assert_eq!(near_high.traversal, (0..8).collect::<Vec<_>>());
        let near_low = build_histogram(&map(16, 1, v, DepthConvention::NearerLow), 8).unwrap();
        assert_eq!(near_low.traversal, (0..8).rev().collect::<Vec<_>>());
    }

    #[test]
    fn bin_of_edges_and_clamping() {
        let v: Vec<f64> = (0..=8).map(|i| i as f64 / 8.0).collect();
        let h = build_histogram(&map(9, 1, v, DepthConvention::NearerHigh), 8).unwrap();
        assert_eq!(bin_of(1.0, &h), 7);
        assert_eq!(bin_of(h.edges[3], &h), 3);
        assert_eq!(bin_of(-0.5, &h), 0);
        assert_eq!(bin_of(2.0, &h), 7);
    }

    #[test]
    fn equal_population_balances_counts() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64 / 99.0).powi(3)).collect();
        let h = build_histogram_with(&map(100, 1, v, DepthConvention::NearerHigh), 4, BinMode::EqualPopulation)
            .unwrap();
        assert_eq!(h.bin_count, 4);
        for c in &h.counts {
            assert!((20..=30).contains(c), "{:?}", h.counts);
        }
        assert!(h.edges.windows(2).all(|w| w[0] < w[1]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bins_partition_pixels(v in proptest::collection::vec(0.0f64..=1.0, 1..300), bins in 1usize..16) {
                let n = v.len() as u32;
                let h = build_histogram(&map(n, 1, v.clone(), DepthConvention::NearerLow), bins).unwrap();
                prop_assert_eq!(h.counts.iter().sum::<u64>(), n as u64);
                let mut t = h.traversal.clone();
                t.sort();
                prop_assert_eq!(t, (0..h.bin_count).collect::<Vec<_>>());
                for &x in &v {
                    let b = bin_of(x, &h);
                    prop_assert!(x >= h.edges[b]);
                    prop_assert!(x < h.edges[b + 1] || (b == h.bin_count - 1 && x <= h.edges[b + 1]));
                }
            }
        }
    }
}
