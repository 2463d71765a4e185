use image::imageops::{self, FilterType};
use image::RgbImage;
use sha2::{Digest, Sha256};

use super::CorpusError;
use crate::model::{ModelId, ModelSpec};

/// Normalized channel-first (3 × R × R) image tensor for one model.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessedTensor {
    pub model_id: ModelId,
    pub resolution: u32,
    /// Channel-first samples, `3 * resolution * resolution` long.
    pub data: Vec<f32>,
}

impl PreprocessedTensor {
    /// `[channels, height, width]`
    pub fn shape(&self) -> [usize; 3] {
        let r = self.resolution as usize;
        [3, r, r]
    }

    /// SHA-256 over the shape and the little-endian sample bytes.
    pub fn content_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for d in self.shape() {
            h.update((d as u64).to_le_bytes());
        }
        for v in &self.data {
            h.update(v.to_le_bytes());
        }
        h.finalize().into()
    }
}

/// Bicubic resize of the short side to `spec.resize_size`, center crop to
/// `spec.input_resolution`, then per-channel `(x / 255 - mean) / std`.
pub fn preprocess_image(image: &RgbImage, spec: &ModelSpec) -> Result<PreprocessedTensor, CorpusError> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(CorpusError::Decode {
            path: Default::default(),
            reason: "image has no pixels".into(),
        });
    }
    let crop = spec.input_resolution;
    let short_target = spec.resize_size.max(crop);
    let short = w.min(h);
    let scale = |side: u32| -> u32 {
        let scaled = (side as u64 * short_target as u64 + short as u64 / 2) / short as u64;
        (scaled as u32).max(short_target)
    };
    let (rw, rh) = if w <= h { (short_target, scale(h)) } else { (scale(w), short_target) };
    let resized = if (rw, rh) == (w, h) {
        image.clone()
    } else {
        imageops::resize(image, rw, rh, FilterType::CatmullRom)
    };
    let left = (rw - crop) / 2;
    let top = (rh - crop) / 2;
    let cropped = imageops::crop_imm(&resized, left, top, crop, crop).to_image();

    let plane = (crop * crop) as usize;
    let mut data = vec![0f32; 3 * plane];
    for (i, px) in cropped.pixels().enumerate() {
        for c in 0..3 {
            let v = px.0[c] as f32 / 255.0;
            data[c * plane + i] = (v - spec.channel_means[c]) / spec.channel_stds[c];
        }
    }
    Ok(PreprocessedTensor { model_id: spec.model_id, resolution: crop, data })
}
