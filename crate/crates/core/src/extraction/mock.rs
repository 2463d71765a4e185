use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{ExtractionError, InferenceBackend, OutputTensor};
use crate::corpus::PreprocessedTensor;
use crate::model::{ModelId, ModelSpec, ADAIN_LAYERS, EMBEDDING_OUTPUT};

/// Spatial size of the synthetic AdaIN activation maps.
const MOCK_SPATIAL: usize = 4;

/// Weight-free stand-in for real graphs. Each output is a model-wide base
/// pattern plus a perturbation drawn from a ChaCha stream keyed by
/// `(seed, model, tensor content hash)`, so related inputs land at
/// model-dependent but reproducible distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MockBackend {
    seed: u64,
}

pub fn mock_backend(seed: u64) -> MockBackend {
    MockBackend { seed }
}

impl MockBackend {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, label: &[u8], model: ModelId, extra: &[u8]) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(b"style-dashboard/mock/");
        h.update(label);
        h.update(self.seed.to_le_bytes());
        h.update(model.as_str().as_bytes());
        h.update(extra);
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    fn fill(&self, model: ModelId, input_hash: &[u8; 32], len: usize) -> Vec<f32> {
        let mut base = self.stream(b"base", model, &[]);
        let mut noise = self.stream(b"noise", model, input_hash);
        let spread = noise_scale(model);
        (0..len)
            .map(|_| {
                let b: f32 = base.gen_range(0.0..1.0);
                let n: f32 = noise.gen_range(-1.0..1.0);
                (b + spread * n).abs()
            })
            .collect()
    }
}

fn noise_scale(model: ModelId) -> f32 {
    match model {
        ModelId::AdainStyle => 0.35,
        ModelId::ClipVitL => 0.6,
        ModelId::Resnet50Style => 1.1,
        ModelId::Dinov2 => 1.2,
        ModelId::Vgg19 => 1.6,
    }
}

impl InferenceBackend for MockBackend {
    fn run(
        &self,
        spec: &ModelSpec,
        input: &PreprocessedTensor,
    ) -> Result<BTreeMap<String, OutputTensor>, ExtractionError> {
        let hash = input.content_hash();
        let model = spec.model_id;
        let mut out = BTreeMap::new();
        if model == ModelId::AdainStyle {
            let plane = MOCK_SPATIAL * MOCK_SPATIAL;
            let total: usize = ADAIN_LAYERS.iter().map(|(_, c)| c * plane).sum();
            let mut values = self.fill(model, &hash, total).into_iter();
            for (name, c) in ADAIN_LAYERS {
                let data: Vec<f32> = values.by_ref().take(c * plane).collect();
                let shape = vec![1, c, MOCK_SPATIAL, MOCK_SPATIAL];
                out.insert(name.to_string(), OutputTensor { shape, data });
            }
        } else {
            let dim = model.expected_dim();
            let name = spec.output_names.first().map(String::as_str).unwrap_or(EMBEDDING_OUTPUT);
            out.insert(name.to_string(), OutputTensor { shape: vec![1, dim], data: self.fill(model, &hash, dim) });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::extract_embedding;
    use std::path::Path;

    fn tensor(model: ModelId, v: f32) -> PreprocessedTensor {
        PreprocessedTensor { model_id: model, resolution: 4, data: vec![v; 48] }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        for m in ModelId::ALL {
            let spec = ModelSpec::standard(m, Path::new("none"));
            let t = tensor(m, 0.25);
            let a = extract_embedding(&t, &spec, &mock_backend(7), "k").unwrap();
            let b = extract_embedding(&t, &spec, &mock_backend(7), "k").unwrap();
            let c = extract_embedding(&t, &spec, &mock_backend(8), "k").unwrap();
            assert_eq!(a, b);
            assert_ne!(a.vector, c.vector);
            assert_eq!(a.vector.len(), m.expected_dim());
            assert!(a.vector.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn input_sensitive() {
        let spec = ModelSpec::standard(ModelId::AdainStyle, Path::new("none"));
        let a = extract_embedding(&tensor(ModelId::AdainStyle, 0.1), &spec, &mock_backend(1), "k").unwrap();
        let b = extract_embedding(&tensor(ModelId::AdainStyle, 0.2), &spec, &mock_backend(1), "k").unwrap();
        assert_eq!(a.vector.len(), 1920);
        assert_ne!(a.vector, b.vector);
    }
}
