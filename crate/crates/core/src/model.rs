//! ONNX model loading with up-front shape checks.
//!
//! Models are checked against the declared tensor shapes in the graph before
//! anything is run, so a wrong export fails at load time rather than on the
//! first frame.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use tract_onnx::pb;
use tract_onnx::prelude::*;

use crate::error::{Error, Result};

/// One declared dimension: `None` for symbolic/unknown.
pub type DeclaredShape = Vec<Option<i64>>;

#[derive(Clone)]
pub struct OnnxModel {
    path: PathBuf,
    input_shape: Vec<usize>,
    plan: Arc<TypedRunnableModel>,
}

impl std::fmt::Debug for OnnxModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnnxModel")
            .field("path", &self.path)
            .field("input_shape", &self.input_shape)
            .finish_non_exhaustive()
    }
}

fn declared(info: &pb::ValueInfoProto) -> Option<DeclaredShape> {
    let ty = info.r#type.as_ref()?;
    let pb::type_proto::Value::TensorType(tensor) = ty.value.as_ref()?;
    let shape = tensor.shape.as_ref()?;
    Some(
        shape
            .dim
            .iter()
            .map(|d| match d.value {
                Some(pb::tensor_shape_proto::dimension::Value::DimValue(v)) if v > 0 => Some(v),
                _ => None,
            })
            .collect(),
    )
}

/// Compare a declared shape with `[batch, ...expected]`. A leading batch
/// dimension of 1 (or symbolic) is accepted but not required.
fn check_shape(
    path: &Path,
    what: &str,
    declared: &DeclaredShape,
    expected: &[usize],
    labels: &[&str],
) -> Result<()> {
    let body = match declared.len() {
        n if n == expected.len() + 1 => {
            if let Some(b) = declared[0] {
                if b != 1 {
                    return Err(Error::Model {
                        path: path.into(),
                        message: format!("{what} batch dimension is {b}, expected 1"),
                    });
                }
            }
            &declared[1..]
        }
        n if n == expected.len() => &declared[..],
        _ => {
            return Err(Error::Model {
                path: path.into(),
                message: format!(
                    "{what} has rank {}, expected {} ({})",
                    declared.len(),
                    expected.len() + 1,
                    describe(expected)
                ),
            })
        }
    };
    for ((got, want), label) in body.iter().zip(expected).zip(labels) {
        match got {
            Some(g) if *g as usize != *want => {
                return Err(Error::Model {
                    path: path.into(),
                    message: format!(
                        "{what} declares {g} {label}, expected {want} {label} (shape {})",
                        describe(expected)
                    ),
                })
            }
            _ => {}
        }
    }
    Ok(())
}

fn describe(shape: &[usize]) -> String {
    let parts: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    format!("1x{}", parts.join("x"))
}

impl OnnxModel {
    /// Load `path`, check its first input against `[1, ..input]` and its first
    /// output against `[1, outputs]`, then optimize for that fixed shape.
    pub fn load(
        path: &Path,
        input: &[usize],
        input_labels: &[&str],
        outputs: usize,
    ) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::Model {
                path: path.into(),
                message: "model file not found".into(),
            });
        }
        let model_err = |message: String| Error::Model {
            path: path.into(),
            message,
        };
        let onnx = tract_onnx::onnx();
        let proto = onnx
            .proto_model_for_path(path)
            .map_err(|e| model_err(format!("cannot parse: {e}")))?;
        let graph = proto
            .graph
            .as_ref()
            .ok_or_else(|| model_err("no graph".into()))?;
        let initializers: std::collections::HashSet<&str> =
            graph.initializer.iter().map(|t| t.name.as_str()).collect();
        let input_info = graph
            .input
            .iter()
            .find(|i| !initializers.contains(i.name.as_str()))
            .ok_or_else(|| model_err("graph declares no input".into()))?;
        let output_info = graph
            .output
            .first()
            .ok_or_else(|| model_err("graph declares no output".into()))?;
        let in_shape =
            declared(input_info).ok_or_else(|| model_err("input shape not declared".into()))?;
        let out_shape =
            declared(output_info).ok_or_else(|| model_err("output shape not declared".into()))?;
        check_shape(path, "input", &in_shape, input, input_labels)?;
        check_shape(path, "output", &out_shape, &[outputs], &["scores"])?;

        let mut full: Vec<usize> = vec![1];
        full.extend_from_slice(input);
        let plan = onnx
            .model_for_proto_model(&proto)
            .and_then(|m| m.with_input_fact(0, f32::fact(&full).into()))
            .and_then(|m| m.into_optimized())
            .and_then(|m| m.into_runnable())
            .map_err(|e| model_err(format!("runtime initialization failed: {e}")))?;
        Ok(Self {
            path: path.into(),
            input_shape: full,
            plan,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Run on one input laid out as `input_shape` (batch 1), return the flat
    /// output scores.
    pub fn run(&self, data: Vec<f32>) -> Result<Vec<f32>> {
        let tensor = tract_ndarray::ArrayD::from_shape_vec(self.input_shape.clone(), data)
            .map_err(|e| Error::Backend(format!("input layout: {e}")))?;
        let outputs = self
            .plan
            .run(tvec!(Tensor::from(tensor).into()))
            .map_err(|e| Error::Backend(format!("{}: {e}", self.path.display())))?;
        let view = outputs[0]
            .to_plain_array_view::<f32>()
            .map_err(|e| Error::Backend(format!("output type: {e}")))?;
        Ok(view.iter().copied().collect())
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f32]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f32::NEG_INFINITY, f32::max) as f64;
    let exps: Vec<f64> = logits.iter().map(|&v| (v as f64 - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[2] > p[1] && p[1] > p[0]);
        let big = softmax(&[1000.0, 0.0]);
        assert!((big[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_check_messages() {
        let p = Path::new("m.onnx");
        let ok = vec![Some(1), Some(6), Some(256), Some(256)];
        check_shape(p, "input", &ok, &[6, 256, 256], &["channels", "rows", "cols"]).unwrap();
        let symbolic = vec![None, Some(6), Some(256), Some(256)];
        check_shape(p, "input", &symbolic, &[6, 256, 256], &["channels", "rows", "cols"]).unwrap();
        let bad = vec![Some(1), Some(3), Some(256), Some(256)];
        let err = check_shape(p, "input", &bad, &[6, 256, 256], &["channels", "rows", "cols"])
            .unwrap_err()
            .to_string();
        assert!(err.contains("expected 6 channels"), "{err}");
        let rank = vec![Some(6), Some(256)];
        assert!(check_shape(p, "input", &rank, &[6, 256, 256], &["c", "r", "w"]).is_err());
    }

    #[test]
    fn missing_file() {
        let err = OnnxModel::load(Path::new("/no/such/model.onnx"), &[6], &["c"], 2).unwrap_err();
        assert!(err.to_string().contains("/no/such/model.onnx"));
    }
}
