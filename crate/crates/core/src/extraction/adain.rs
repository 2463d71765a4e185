use super::{ExtractionError, OutputTensor};
use crate::model::ADAIN_LAYERS;

/// One activation map, channel-first (`channels × height × width`).
#[derive(Debug, Clone, PartialEq)]
pub struct Activation {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl Activation {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self, ExtractionError> {
        if data.len() != channels * height * width {
            return Err(ExtractionError::Shape(format!(
                "{} values for a {channels}x{height}x{width} map",
                data.len()
            )));
        }
        Ok(Activation { channels, height, width, data })
    }

    /// Accepts `[C, H, W]` or a batch of one `[1, C, H, W]`.
    pub fn from_output(t: OutputTensor) -> Result<Self, ExtractionError> {
        match t.shape.as_slice() {
            &[c, h, w] | &[1, c, h, w] => Activation::new(c, h, w, t.data),
            other => Err(ExtractionError::Shape(format!("expected a CHW activation, got shape {other:?}"))),
        }
    }
}

/// Concatenates, layer by layer, every channel's spatial mean followed by
/// every channel's population standard deviation. The four layers must carry
/// 64, 128, 256 and 512 channels, giving a 1920-long descriptor.
pub fn adain_pool(activations: &[Activation]) -> Result<Vec<f32>, ExtractionError> {
    if activations.len() != ADAIN_LAYERS.len() {
        return Err(ExtractionError::Shape(format!(
            "expected {} activation maps, got {}",
            ADAIN_LAYERS.len(),
            activations.len()
        )));
    }
    let total: usize = ADAIN_LAYERS.iter().map(|(_, c)| 2 * c).sum();
    let mut out = Vec::with_capacity(total);
    for (act, (layer, channels)) in activations.iter().zip(ADAIN_LAYERS) {
        if act.channels != channels {
            return Err(ExtractionError::Shape(format!(
                "{layer}: {} channels, expected {channels}",
                act.channels
            )));
        }
        let plane = act.height * act.width;
        if plane == 0 {
            return Err(ExtractionError::Shape(format!("{layer}: empty spatial extent")));
        }
        let (means, stds): (Vec<f32>, Vec<f32>) = act
            .data
            .chunks_exact(plane)
            .map(|ch| {
                let (m, s) = mean_std(ch);
                (m as f32, s as f32)
            })
            .unzip();
        out.extend(means);
        out.extend(stds);
    }
    Ok(out)
}

fn mean_std(xs: &[f32]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
