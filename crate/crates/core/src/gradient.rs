//! Luma and Sobel gradients shared by the superpixel and stroke stages.

use crate::imagecore::{Image, Rgb};

#[inline]
pub fn luma(c: Rgb) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

/// Row-major luma plane.
pub fn luma_plane(image: &Image) -> Vec<f64> {
    image.pixels.iter().map(|&c| luma(c)).collect()
}

/// 3x3 binomial blur (`[1 2 1] / 4` in each direction) with replicated borders.
pub fn blur3(plane: &[f64], width: u32, height: u32) -> Vec<f64> {
    let (w, h) = (width as usize, height as usize);
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..w {
            let l = row[x.saturating_sub(1)];
            let r = row[(x + 1).min(w - 1)];
            tmp[y * w + x] = (l + 2.0 * row[x] + r) * 0.25;
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..h {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(h - 1);
        for x in 0..w {
            out[y * w + x] = (tmp[up * w + x] + 2.0 * tmp[y * w + x] + tmp[down * w + x]) * 0.25;
        }
    }
    out
}

/// Per-pixel Sobel derivatives of a scalar plane.
#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: u32,
    pub height: u32,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
}

impl GradientField {
    pub fn sobel(plane: &[f64], width: u32, height: u32) -> Self {
        let (w, h) = (width as usize, height as usize);
        let mut gx = vec![0.0; plane.len()];
        let mut gy = vec![0.0; plane.len()];
        for y in 0..h {
            let ym = y.saturating_sub(1);
            let yp = (y + 1).min(h - 1);
            for x in 0..w {
                let xm = x.saturating_sub(1);
                let xp = (x + 1).min(w - 1);
                let p = |xx: usize, yy: usize| plane[yy * w + xx];
                gx[y * w + x] = (p(xp, ym) + 2.0 * p(xp, y) + p(xp, yp))
                    - (p(xm, ym) + 2.0 * p(xm, y) + p(xm, yp));
                gy[y * w + x] = (p(xm, yp) + 2.0 * p(x, yp) + p(xp, yp))
                    - (p(xm, ym) + 2.0 * p(x, ym) + p(xp, ym));
            }
        }
        GradientField {
            width,
            height,
            gx,
            gy,
        }
    }

    /// Sobel of the image luma, without pre-blur.
    pub fn of_image(image: &Image) -> Self {
        Self::sobel(&luma_plane(image), image.width, image.height)
    }

    /// Sobel of the image luma after a 3x3 binomial pre-blur.
    pub fn of_image_smoothed(image: &Image) -> Self {
        let plane = blur3(&luma_plane(image), image.width, image.height);
        Self::sobel(&plane, image.width, image.height)
    }

    #[inline]
    pub fn at(&self, x: u32, y: u32) -> (f64, f64) {
        let i = y as usize * self.width as usize + x as usize;
        (self.gx[i], self.gy[i])
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.gx
            .iter()
            .zip(&self.gy)
            .map(|(a, b)| a.hypot(*b))
            .collect()
    }
}
