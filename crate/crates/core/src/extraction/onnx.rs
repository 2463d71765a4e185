//! ONNX graph execution through tract.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use tract_onnx::prelude::*;

use super::{ExtractionError, InferenceBackend, OutputTensor};
use crate::corpus::PreprocessedTensor;
use crate::model::ModelSpec;

struct LoadedGraph {
    plan: Arc<TypedRunnableModel>,
    output_names: Vec<String>,
}

/// Loads each graph once (per resolution) and runs it on the CPU.
#[derive(Default)]
pub struct OnnxBackend {
    graphs: RwLock<HashMap<(PathBuf, u32), Arc<LoadedGraph>>>,
}

impl OnnxBackend {
    pub fn new() -> Self {
        Self::default()
    }

    fn load(&self, path: &Path, resolution: u32) -> TractResult<Arc<LoadedGraph>> {
        let key = (path.to_path_buf(), resolution);
        if let Some(g) = self.graphs.read().unwrap().get(&key) {
            return Ok(g.clone());
        }
        let r = resolution as usize;
        let model = tract_onnx::onnx()
            .model_for_path(path)?
            .with_input_fact(0, f32::fact([1, 3, r, r]).into())?;
        let output_names = model
            .output_outlets()?
            .iter()
            .map(|o| model.outlet_label(*o).unwrap_or(&model.node(o.node).name).to_string())
            .collect();
        let plan = model.into_optimized()?.into_runnable()?;
        let loaded = Arc::new(LoadedGraph { plan, output_names });
        self.graphs.write().unwrap().insert(key, loaded.clone());
        Ok(loaded)
    }
}

impl InferenceBackend for OnnxBackend {
    fn run(
        &self,
        spec: &ModelSpec,
        input: &PreprocessedTensor,
    ) -> Result<BTreeMap<String, OutputTensor>, ExtractionError> {
        let model = spec.model_id;
        if !spec.graph_path.is_file() {
            return Err(ExtractionError::GraphLoad {
                model,
                path: spec.graph_path.clone(),
                reason: "graph file not found".into(),
            });
        }
        let graph = self.load(&spec.graph_path, input.resolution).map_err(|e| ExtractionError::GraphLoad {
            model,
            path: spec.graph_path.clone(),
            reason: format!("{e:#}"),
        })?;
        let infer = |e: TractError| ExtractionError::Inference { model, reason: format!("{e:#}") };
        let [c, h, w] = input.shape();
        let tensor = Tensor::from_shape(&[1, c, h, w], &input.data).map_err(infer)?;
        let outputs = graph.plan.run(tvec!(tensor.into())).map_err(infer)?;
        let mut named = BTreeMap::new();
        for (name, value) in graph.output_names.iter().zip(outputs) {
            let view = value.to_plain_array_view::<f32>().map_err(infer)?;
            named.insert(
                name.clone(),
                OutputTensor { shape: view.shape().to_vec(), data: view.iter().copied().collect() },
            );
        }
        Ok(named)
    }
}
