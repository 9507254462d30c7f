//! In-memory images and the pixel-level transforms behind augmentation.
//!
//! [`ImageU8`] is the raw storage form (interleaved RGB, row-major, as the
//! pixel-store files hold it). [`Pixels`] is the compute form: a 3xHxW
//! `f64` tensor with values in `[0, 1]` before normalization.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

pub const CHANNELS: usize = 3;

/// Luma weights used by the contrast and saturation transforms.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Raw 8-bit RGB image, interleaved, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageU8 {
    pub width: usize,
    pub height: usize,
    /// `height * width * 3` bytes, `data[(y*width + x)*3 + c]`.
    pub data: Vec<u8>,
}

impl ImageU8 {
    pub fn new(width: usize, height: usize) -> Self {
        ImageU8 {
            width,
            height,
            data: vec![0; width * height * CHANNELS],
        }
    }

    /// Channel-major float pixels scaled to `[0, 1]`.
    pub fn to_pixels(&self) -> Pixels {
        let (w, h) = (self.width, self.height);
        let mut out = Pixels::zeros(h, w);
        for c in 0..CHANNELS {
            for y in 0..h {
                for x in 0..w {
                    out.data[c * h * w + y * w + x] =
                        self.data[(y * w + x) * CHANNELS + c] as f64 / 255.0;
                }
            }
        }
        out
    }
}

/// Float image, channel-major (3xHxW).
#[derive(Debug, Clone, PartialEq)]
pub struct Pixels {
    pub height: usize,
    pub width: usize,
    /// `3 * height * width` values, `data[c*H*W + y*W + x]`.
    pub data: Vec<f64>,
}

impl Pixels {
    pub fn zeros(height: usize, width: usize) -> Self {
        Pixels {
            height,
            width,
            data: vec![0.0; CHANNELS * height * width],
        }
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[c * self.height * self.width + y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[c * self.height * self.width + y * self.width + x] = v;
    }
}

/// Bilinear resize to `side x side` using the half-pixel convention.
pub fn resize_bilinear(src: &Pixels, side: usize) -> Pixels {
    if src.height == side && src.width == side {
        return src.clone();
    }
    let mut out = Pixels::zeros(side, side);
    let sy = src.height as f64 / side as f64;
    let sx = src.width as f64 / side as f64;
    for y in 0..side {
        let fy = ((y as f64 + 0.5) * sy - 0.5).max(0.0);
        let y0 = (fy.floor() as usize).min(src.height - 1);
        let y1 = (y0 + 1).min(src.height - 1);
        let wy = fy - y0 as f64;
        for x in 0..side {
            let fx = ((x as f64 + 0.5) * sx - 0.5).max(0.0);
            let x0 = (fx.floor() as usize).min(src.width - 1);
            let x1 = (x0 + 1).min(src.width - 1);
            let wx = fx - x0 as f64;
            for c in 0..CHANNELS {
                let top = src.at(c, y0, x0) * (1.0 - wx) + src.at(c, y0, x1) * wx;
                let bot = src.at(c, y1, x0) * (1.0 - wx) + src.at(c, y1, x1) * wx;
                out.set(c, y, x, top * (1.0 - wy) + bot * wy);
            }
        }
    }
    out
}

/// Crop a `side x side` window with top-left corner `(x0, y0)`.
pub fn crop(src: &Pixels, x0: usize, y0: usize, side: usize) -> Pixels {
    debug_assert!(x0 + side <= src.width && y0 + side <= src.height);
    let mut out = Pixels::zeros(side, side);
    for c in 0..CHANNELS {
        for y in 0..side {
            for x in 0..side {
                out.set(c, y, x, src.at(c, y0 + y, x0 + x));
            }
        }
    }
    out
}

/// Mirror left-right.
pub fn hflip(src: &Pixels) -> Pixels {
    let mut out = Pixels::zeros(src.height, src.width);
    for c in 0..CHANNELS {
        for y in 0..src.height {
            for x in 0..src.width {
                out.set(c, y, x, src.at(c, y, src.width - 1 - x));
            }
        }
    }
    out
}

fn clamp01(x: f64) -> f64 {
    x.max(0.0).min(1.0)
}

/// Scale every value by `factor`, clamping back to `[0, 1]`.
pub fn adjust_brightness(img: &mut Pixels, factor: f64) {
    for v in &mut img.data {
        *v = clamp01(*v * factor);
    }
}

/// Blend against the image's mean luma: `mean + (x - mean) * factor`.
pub fn adjust_contrast(img: &mut Pixels, factor: f64) {
    let (h, w) = (img.height, img.width);
    let mut mean = 0.0;
    for y in 0..h {
        for x in 0..w {
            let mut l = 0.0;
            for c in 0..CHANNELS {
                l += LUMA[c] * img.at(c, y, x);
            }
            mean += l;
        }
    }
    mean /= (h * w) as f64;
    for v in &mut img.data {
        *v = clamp01(mean + (*v - mean) * factor);
    }
}

/// Blend each pixel against its own luma: `luma + (x - luma) * factor`.
pub fn adjust_saturation(img: &mut Pixels, factor: f64) {
    let (h, w) = (img.height, img.width);
    for y in 0..h {
        for x in 0..w {
            let mut l = 0.0;
            for c in 0..CHANNELS {
                l += LUMA[c] * img.at(c, y, x);
            }
            for c in 0..CHANNELS {
                let v = img.at(c, y, x);
                img.set(c, y, x, clamp01(l + (v - l) * factor));
            }
        }
    }
}

/// Per-channel `(x - mean) / std`.
pub fn normalize(img: &mut Pixels, mean: f64, std: f64) {
    for v in &mut img.data {
        *v = (*v - mean) / std;
    }
}
