use std::path::Path;

use image::{DynamicImage, RgbImage};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CorpusError;

/// Colour layout of the file before conversion to 8-bit RGB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorSource {
    Rgb,
    Grayscale,
    /// Alpha channel composited over white.
    WithAlpha,
    /// Higher bit depth or float samples, reduced to 8 bits.
    Other,
}

#[derive(Debug, Clone)]
pub struct LoadedImage {
    pub rgb: RgbImage,
    pub source: ColorSource,
}

impl LoadedImage {
    pub fn key(&self) -> String {
        image_key(&self.rgb)
    }
}

/// Decodes an image file and converts it to 8-bit RGB.
pub fn load_rgb(path: &Path) -> Result<LoadedImage, CorpusError> {
    let decode_err = |reason: String| CorpusError::Decode { path: path.to_path_buf(), reason };
    let reader = image::ImageReader::open(path)
        .map_err(|e| decode_err(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| decode_err(e.to_string()))?;
    let img = reader.decode().map_err(|e| decode_err(e.to_string()))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(decode_err("image has no pixels".into()));
    }
    Ok(to_rgb(img))
}

pub(crate) fn to_rgb(img: DynamicImage) -> LoadedImage {
    let source = match &img {
        DynamicImage::ImageRgb8(_) => ColorSource::Rgb,
        DynamicImage::ImageLuma8(_) | DynamicImage::ImageLuma16(_) => ColorSource::Grayscale,
        c if c.color().has_alpha() => ColorSource::WithAlpha,
        _ => ColorSource::Other,
    };
    let rgb = if source == ColorSource::WithAlpha {
        composite_over_white(&img)
    } else {
        img.to_rgb8()
    };
    LoadedImage { rgb, source }
}

fn composite_over_white(img: &DynamicImage) -> RgbImage {
    let rgba = img.to_rgba8();
    RgbImage::from_fn(rgba.width(), rgba.height(), |x, y| {
        let [r, g, b, a] = rgba.get_pixel(x, y).0;
        let alpha = a as u32;
        let blend = |c: u8| ((c as u32 * alpha + 255 * (255 - alpha) + 127) / 255) as u8;
        image::Rgb([blend(r), blend(g), blend(b)])
    })
}

/// Content key of a decoded image: SHA-256 over dimensions and RGB pixels, hex encoded.
pub fn image_key(rgb: &RgbImage) -> String {
    let mut h = Sha256::new();
    h.update(b"RGB8");
    h.update(rgb.width().to_le_bytes());
    h.update(rgb.height().to_le_bytes());
    h.update(rgb.as_raw());
    hex::encode(h.finalize())
}
