//! Train- and eval-time image transforms.
//!
//! Training: resize to `resize`, random crop to `crop`, horizontal flip
//! with probability 0.5, color jitter (brightness, contrast, saturation
//! factors drawn uniformly from `[1-jitter, 1+jitter]`, applied in that
//! order), then per-channel normalization. Evaluation: resize straight to
//! `crop`, normalization only.

use rand_core::RngCore;

use crate::image::{
    adjust_brightness, adjust_contrast, adjust_saturation, crop, hflip, normalize,
    resize_bilinear, Pixels,
};
use crate::rng::RngExt;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum AugmentError {
    #[error("crop size {crop} exceeds resize size {resize}")]
    CropLargerThanResize { crop: usize, resize: usize },
    #[error("normalization std must be nonzero")]
    ZeroStd,
}

/// Augmentation parameters. `resize`/`crop` are the side lengths R and S;
/// normalization constants apply identically to all three channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentConfig {
    pub resize: usize,
    pub crop: usize,
    pub jitter: f64,
    pub mean: f64,
    pub std: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        // desk-scale profile; the full-scale recipe uses 256 / 224
        AugmentConfig {
            resize: 40,
            crop: 32,
            jitter: 0.2,
            mean: 0.5,
            std: 0.5,
        }
    }
}

impl AugmentConfig {
    pub fn full_scale() -> Self {
        AugmentConfig {
            resize: 256,
            crop: 224,
            ..AugmentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if self.crop > self.resize {
            return Err(AugmentError::CropLargerThanResize {
                crop: self.crop,
                resize: self.resize,
            });
        }
        if self.std == 0.0 {
            return Err(AugmentError::ZeroStd);
        }
        Ok(())
    }
}

/// The stochastic training transform. Draw order from `rng`: crop x, crop
/// y, flip decision, brightness, contrast, saturation factors.
pub fn augment_train<R: RngCore>(src: &Pixels, cfg: &AugmentConfig, rng: &mut R) -> Pixels {
    let resized = resize_bilinear(src, cfg.resize);
    let slack = cfg.resize - cfg.crop + 1;
    let x0 = rng.below(slack);
    let y0 = rng.below(slack);
    let mut out = crop(&resized, x0, y0, cfg.crop);
    if rng.chance(0.5) {
        out = hflip(&out);
    }
    if cfg.jitter > 0.0 {
        let lo = 1.0 - cfg.jitter;
        let hi = 1.0 + cfg.jitter;
        adjust_brightness(&mut out, rng.uniform_in(lo, hi));
        adjust_contrast(&mut out, rng.uniform_in(lo, hi));
        adjust_saturation(&mut out, rng.uniform_in(lo, hi));
    }
    normalize(&mut out, cfg.mean, cfg.std);
    out
}

/// The deterministic evaluation transform: resize to the crop size, then
/// normalize.
pub fn augment_eval(src: &Pixels, cfg: &AugmentConfig) -> Pixels {
    let mut out = resize_bilinear(src, cfg.crop);
    normalize(&mut out, cfg.mean, cfg.std);
    out
}
