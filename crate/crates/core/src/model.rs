//! Registry of the five embedding extractors and their preprocessing constants.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The five embedding families measured by the dashboard.
///
/// Variant order is significant: it is the tie-break order used by every
/// sorted table and the key order of every model-keyed map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelId {
    /// Channel-wise mean/std of four VGG19 encoder activations (texture, color).
    AdainStyle,
    /// Pre-logit pooled features of a ResNet-50 (artistic category).
    Resnet50Style,
    /// Projected CLIP ViT-L/14 image embedding (semantic).
    ClipVitL,
    /// DINOv2-large CLS token (structure, fine detail).
    Dinov2,
    /// VGG19 penultimate fully connected features (perceptual).
    Vgg19,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::AdainStyle,
        ModelId::Resnet50Style,
        ModelId::ClipVitL,
        ModelId::Dinov2,
        ModelId::Vgg19,
    ];

    /// Length of the embedding vector this model produces.
    pub const fn expected_dim(self) -> usize {
        match self {
            ModelId::AdainStyle => 1920,
            ModelId::Resnet50Style => 2048,
            ModelId::ClipVitL => 768,
            ModelId::Dinov2 => 1024,
            ModelId::Vgg19 => 4096,
        }
    }

    /// Identifier used in files, CLI flags and JSON.
    pub const fn as_str(self) -> &'static str {
        match self {
            ModelId::AdainStyle => "ADAIN_STYLE",
            ModelId::Resnet50Style => "RESNET50_STYLE",
            ModelId::ClipVitL => "CLIP_VIT_L",
            ModelId::Dinov2 => "DINOV2",
            ModelId::Vgg19 => "VGG19",
        }
    }

    /// Human readable name used in tables and plots.
    pub const fn display_name(self) -> &'static str {
        match self {
            ModelId::AdainStyle => "AdaIN-Style",
            ModelId::Resnet50Style => "ResNet50-Style",
            ModelId::ClipVitL => "CLIP-ViT-L",
            ModelId::Dinov2 => "DINOv2",
            ModelId::Vgg19 => "VGG19",
        }
    }

    /// The style dimension each model stands for.
    pub const fn style_dimension(self) -> &'static str {
        match self {
            ModelId::AdainStyle => "statistical (texture, color)",
            ModelId::Resnet50Style => "categorical (artistic movement)",
            ModelId::ClipVitL => "semantic (concept, theme)",
            ModelId::Dinov2 => "structural (composition, fine features)",
            ModelId::Vgg19 => "classical perceptual",
        }
    }

    pub(crate) const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown model id `{0}` (expected one of ADAIN_STYLE, RESNET50_STYLE, CLIP_VIT_L, DINOV2, VGG19)")]
pub struct UnknownModel(pub String);

impl FromStr for ModelId {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == norm)
            .ok_or_else(|| UnknownModel(s.to_string()))
    }
}

/// VGG19 activation layers pooled into the AdaIN descriptor, with channel counts.
pub const ADAIN_LAYERS: [(&str, usize); 4] = [
    ("relu1_1", 64),
    ("relu2_1", 128),
    ("relu3_1", 256),
    ("relu4_1", 512),
];

/// Name of the single vector output of the non-AdaIN graphs.
pub const EMBEDDING_OUTPUT: &str = "embedding";
/// Name of the image input of every graph.
pub const GRAPH_INPUT: &str = "pixel_values";

pub const IMAGENET_MEAN: [f32; 3] = [0.485, 0.456, 0.406];
pub const IMAGENET_STD: [f32; 3] = [0.229, 0.224, 0.225];
pub const CLIP_MEAN: [f32; 3] = [0.481_454_66, 0.457_827_5, 0.408_210_73];
pub const CLIP_STD: [f32; 3] = [0.268_629_54, 0.261_302_58, 0.275_777_11];

/// Everything needed to preprocess an image for one model and run its graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: ModelId,
    /// Side of the square center crop fed to the network.
    pub input_resolution: u32,
    /// Target length of the image's short side before cropping.
    pub resize_size: u32,
    pub channel_means: [f32; 3],
    pub channel_stds: [f32; 3],
    pub graph_path: PathBuf,
    pub input_name: String,
    pub output_names: Vec<String>,
}

impl ModelSpec {
    /// Default spec for `model_id`, with its graph expected at `<graphs_dir>/<MODEL_ID>.onnx`.
    pub fn standard(model_id: ModelId, graphs_dir: &Path) -> Self {
        let (resize_size, channel_means, channel_stds) = match model_id {
            ModelId::ClipVitL => (224, CLIP_MEAN, CLIP_STD),
            _ => (256, IMAGENET_MEAN, IMAGENET_STD),
        };
        let output_names = match model_id {
            ModelId::AdainStyle => ADAIN_LAYERS.iter().map(|(n, _)| n.to_string()).collect(),
            _ => vec![EMBEDDING_OUTPUT.to_string()],
        };
        ModelSpec {
            model_id,
            input_resolution: 224,
            resize_size,
            channel_means,
            channel_stds,
            graph_path: graphs_dir.join(format!("{}.onnx", model_id.as_str())),
            input_name: GRAPH_INPUT.to_string(),
            output_names,
        }
    }

    /// Key identifying the preprocessing pipeline; specs sharing it produce identical tensors.
    pub(crate) fn preprocess_key(&self) -> (u32, u32, [u32; 3], [u32; 3]) {
        (
            self.input_resolution,
            self.resize_size,
            self.channel_means.map(f32::to_bits),
            self.channel_stds.map(f32::to_bits),
        )
    }
}
