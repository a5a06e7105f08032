//! Input artifacts: the target image, the depth map and the panoptic labels.
//!
//! Formats:
//! - image: PNG, 8-bit RGB or RGBA (alpha dropped)
//! - depth: binary PGM `P5`, maxval 65535, big-endian samples
//! - labels: 16-bit grayscale PNG of prediction ids plus a JSON sidecar

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use image::{ImageBuffer, ImageFormat, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

/// Label id reserved for pixels the segmenter left unlabeled.
pub const VOID_ID: u32 = 65535;

pub const BACKGROUND_CATEGORY: &str = "background";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: u32, height: u32, pixels: Vec<Rgb>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer has {} entries, expected {}",
                pixels.len(),
                width as usize * height as usize
            )));
        }
        Ok(Image {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, color: Rgb) -> Self {
        Image {
            width,
            height,
            pixels: vec![color; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: Rgb) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = c;
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    /// Writes the image as an 8-bit RGB PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buf = image::RgbImage::from_raw(self.width, self.height, raw)
            .expect("buffer size matches dimensions");
        buf.save_with_format(path, ImageFormat::Png)
            .map_err(|e| encode_error(path, e))
    }
}

/// Which end of the [0,1] range is closest to the viewer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DepthConvention {
    /// Larger values are nearer (inverse depth, typical of monocular estimators).
    #[default]
    NearerHigh,
    /// Larger values are farther (metric-style depth).
    NearerLow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f64>,
    pub convention: DepthConvention,
}

impl DepthMap {
    pub fn new(
        width: u32,
        height: u32,
        values: Vec<f64>,
        convention: DepthConvention,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if values.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "depth buffer has {} entries, expected {}",
                values.len(),
                width as usize * height as usize
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "depth value {v} outside [0,1]"
            )));
        }
        Ok(DepthMap {
            width,
            height,
            values,
            convention,
        })
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    /// Writes the map as a 16-bit binary PGM, rounding to the nearest sample.
    pub fn save_pgm(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(32 + self.values.len() * 2);
        write!(out, "P5\n{} {}\n65535\n", self.width, self.height).expect("vec write");
        for v in &self.values {
            let s = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
            out.extend_from_slice(&s.to_be_bytes());
        }
        fs::write(path, out).map_err(|e| Error::write(path, e))
    }

    pub fn check_dims(&self, image: &Image) -> Result<()> {
        check_dims("depth map", image, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionKind {
    Thing,
    Stuff,
}

/// One panoptic region.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: u32,
    pub kind: PredictionKind,
    pub score: f64,
    pub category: String,
    pub semantic_group: u32,
    pub area: u64,
    /// `score * area`: confidence-weighted size used to rank things.
    pub weight: f64,
}

/// Sidecar metadata entry as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredictionMeta {
    pub id: u32,
    pub kind: PredictionKind,
    pub score: f64,
    pub category: String,
    #[serde(default)]
    pub semantic_group: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub width: u32,
    pub height: u32,
    /// Row-major prediction id per pixel.
    pub labels: Vec<u32>,
    pub predictions: Vec<Prediction>,
}

impl Segmentation {
    /// Validates a label map against its metadata and computes areas and weights.
    ///
    /// Pixels carrying [`VOID_ID`] (when no metadata entry claims that id) are
    /// collected into a synthetic `background` stuff prediction ranked after
    /// every other semantic group.
    pub fn from_parts(
        width: u32,
        height: u32,
        labels: Vec<u32>,
        meta: Vec<PredictionMeta>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "label buffer has {} entries, expected {}",
                labels.len(),
                width as usize * height as usize
            )));
        }
        let mut by_id: BTreeMap<u32, PredictionMeta> = BTreeMap::new();
        for m in meta {
            validate_meta(&m)?;
            let id = m.id;
            if by_id.insert(id, m).is_some() {
                return Err(Error::DuplicateMetadataId(id));
            }
        }

        let mut areas: HashMap<u32, u64> = HashMap::new();
        for &id in &labels {
            *areas.entry(id).or_insert(0) += 1;
        }
        let mut unknown: Vec<u32> = areas
            .keys()
            .copied()
            .filter(|id| !by_id.contains_key(id) && *id != VOID_ID)
            .collect();
        unknown.sort_unstable();
        if let Some(&id) = unknown.first() {
            return Err(Error::UnknownPredictionId(id));
        }
        if areas.contains_key(&VOID_ID) && !by_id.contains_key(&VOID_ID) {
            let lowest_rank = by_id
                .values()
                .filter(|m| m.kind == PredictionKind::Stuff)
                .map(|m| m.semantic_group + 1)
                .max()
                .unwrap_or(0);
            by_id.insert(
                VOID_ID,
                PredictionMeta {
                    id: VOID_ID,
                    kind: PredictionKind::Stuff,
                    score: 1.0,
                    category: BACKGROUND_CATEGORY.to_string(),
                    semantic_group: lowest_rank,
                },
            );
        }

        let predictions = by_id
            .into_values()
            .map(|m| {
                let area = areas.get(&m.id).copied().unwrap_or(0);
                Prediction {
                    id: m.id,
                    kind: m.kind,
                    score: m.score,
                    category: m.category,
                    semantic_group: m.semantic_group,
                    area,
                    weight: m.score * area as f64,
                }
            })
            .collect();

        Ok(Segmentation {
            width,
            height,
            labels,
            predictions,
        })
    }

    pub fn prediction(&self, id: u32) -> Option<&Prediction> {
        self.predictions.iter().find(|p| p.id == id)
    }

    /// Row-major pixel indices of every prediction, keyed by id.
    pub fn pixel_lists(&self) -> HashMap<u32, Vec<u32>> {
        let mut lists: HashMap<u32, Vec<u32>> = HashMap::new();
        for (i, &id) in self.labels.iter().enumerate() {
            lists.entry(id).or_default().push(i as u32);
        }
        lists
    }

    pub fn check_dims(&self, image: &Image) -> Result<()> {
        check_dims("label map", image, self.width, self.height)
    }

    pub fn to_meta(&self) -> Vec<PredictionMeta> {
        self.predictions
            .iter()
            .map(|p| PredictionMeta {
                id: p.id,
                kind: p.kind,
                score: p.score,
                category: p.category.clone(),
                semantic_group: p.semantic_group,
            })
            .collect()
    }
}

fn validate_meta(m: &PredictionMeta) -> Result<()> {
    if !(0.0..=1.0).contains(&m.score) {
        return Err(Error::InvalidMetadata {
            id: m.id,
            reason: format!("score {} outside [0,1]", m.score),
        });
    }
    if m.kind == PredictionKind::Stuff && m.score != 1.0 {
        return Err(Error::InvalidMetadata {
            id: m.id,
            reason: format!("stuff entry must have score 1.0, got {}", m.score),
        });
    }
    Ok(())
}

fn check_dims(what: &'static str, image: &Image, w: u32, h: u32) -> Result<()> {
    if image.width != w || image.height != h {
        return Err(Error::DimensionMismatch {
            what,
            expected_w: image.width,
            expected_h: image.height,
            got_w: w,
            got_h: h,
        });
    }
    Ok(())
}

fn encode_error(path: &Path, e: image::ImageError) -> Error {
    match e {
        image::ImageError::IoError(io) => Error::write(path, io),
        other => Error::Encode {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    }
}

fn read_png(path: &Path) -> Result<image::DynamicImage> {
    let bytes = fs::read(path).map_err(|e| Error::read(path, e))?;
    match image::guess_format(&bytes) {
        Ok(ImageFormat::Png) => {}
        Ok(other) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{other:?}, expected PNG"),
            })
        }
        Err(_) => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "unrecognized signature, expected PNG".into(),
            })
        }
    }
    image::load_from_memory_with_format(&bytes, ImageFormat::Png).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Loads a PNG target image, discarding alpha.
pub fn load_image(path: &Path) -> Result<Image> {
    let img = read_png(path)?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::ZeroDimension);
    }
    let rgb = img.to_rgb8();
    let (width, height) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    Image::new(width, height, pixels)
}

/// Loads a 16-bit binary PGM and normalizes samples by 65535.
pub fn load_depth(path: &Path, convention: DepthConvention) -> Result<DepthMap> {
    let bytes = fs::read(path).map_err(|e| Error::read(path, e))?;
    parse_pgm16(&bytes, convention)
}

pub fn parse_pgm16(bytes: &[u8], convention: DepthConvention) -> Result<DepthMap> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos).ok_or_else(|| Error::Pgm("missing magic".into()))?;
    if magic != b"P5" {
        return Err(Error::Pgm(format!(
            "expected P5, found {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let mut field = |name: &str| -> Result<u32> {
        let tok = next_token(bytes, &mut pos).ok_or_else(|| Error::Pgm(format!("missing {name}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| Error::Pgm(format!("bad {name}")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if maxval != 65535 {
        return Err(Error::Pgm(format!("maxval must be 65535, found {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimension);
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::Pgm("missing raster separator".into()));
    }
    pos += 1;
    let n = width as usize * height as usize;
    let raster = &bytes[pos..];
    if raster.len() < n * 2 {
        return Err(Error::Pgm(format!(
            "raster truncated: {} bytes, expected {}",
            raster.len(),
            n * 2
        )));
    }
    let values = raster[..n * 2]
        .chunks_exact(2)
        .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / 65535.0)
        .collect();
    DepthMap::new(width, height, values, convention)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

/// Loads a label map PNG (8- or 16-bit grayscale) and its JSON metadata.
pub fn load_labels(map_path: &Path, meta_path: &Path) -> Result<Segmentation> {
    let img = read_png(map_path)?;
    let (width, height) = (img.width(), img.height());
    let labels: Vec<u32> = match img {
        image::DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: map_path.to_path_buf(),
                reason: format!("label map must be grayscale, found {:?}", other.color()),
            })
        }
    };
    let meta = read_meta(meta_path)?;
    Segmentation::from_parts(width, height, labels, meta)
}

pub fn read_meta(path: &Path) -> Result<Vec<PredictionMeta>> {
    let text = fs::read_to_string(path).map_err(|e| Error::read(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn write_meta(path: &Path, meta: &[PredictionMeta]) -> Result<()> {
    let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(path, text).map_err(|e| Error::write(path, e))
}

/// Writes a row-major id buffer as a 16-bit grayscale PNG.
pub fn save_label_png(path: &Path, width: u32, height: u32, ids: &[u32]) -> Result<()> {
    let raw: Vec<u16> = ids
        .iter()
        .map(|&id| {
            u16::try_from(id).map_err(|_| {
                Error::InvalidParameter(format!("label id {id} does not fit in 16 bits"))
            })
        })
        .collect::<Result<_>>()?;
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width, height, raw).ok_or_else(|| {
            Error::InvalidParameter("label buffer does not match dimensions".into())
        })?;
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| encode_error(path, e))
}
