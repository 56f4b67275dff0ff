//! Tiny hand-built ONNX graphs with known behavior, for exercising the model
//! adapters without trained weights.

use std::path::Path;

use prost::Message;
use tract_onnx::pb;

const FLOAT: i32 = 1;

fn value_info(name: &str, dims: &[Option<i64>]) -> pb::ValueInfoProto {
    use pb::tensor_shape_proto::dimension::Value;
    let dim = dims
        .iter()
        .map(|d| pb::tensor_shape_proto::Dimension {
            value: Some(match d {
                Some(v) => Value::DimValue(*v),
                None => Value::DimParam("N".into()),
            }),
            ..Default::default()
        })
        .collect();
    pb::ValueInfoProto {
        name: name.into(),
        r#type: Some(pb::TypeProto {
            value: Some(pb::type_proto::Value::TensorType(pb::type_proto::Tensor {
                elem_type: FLOAT,
                shape: Some(pb::TensorShapeProto { dim }),
            })),
            ..Default::default()
        }),
        ..Default::default()
    }
}

fn tensor(name: &str, dims: &[i64], data: Vec<f32>) -> pb::TensorProto {
    pb::TensorProto {
        name: name.into(),
        dims: dims.to_vec(),
        data_type: FLOAT,
        float_data: data,
        ..Default::default()
    }
}

fn node(op: &str, inputs: &[&str], output: &str, attribute: Vec<pb::AttributeProto>) -> pb::NodeProto {
    pb::NodeProto {
        op_type: op.into(),
        name: output.into(),
        input: inputs.iter().map(|s| s.to_string()).collect(),
        output: vec![output.into()],
        attribute,
        ..Default::default()
    }
}

fn ints(name: &str, values: &[i64]) -> pb::AttributeProto {
    pb::AttributeProto {
        name: name.into(),
        r#type: pb::attribute_proto::AttributeType::Ints as i32,
        ints: values.to_vec(),
        ..Default::default()
    }
}

fn int(name: &str, value: i64) -> pb::AttributeProto {
    pb::AttributeProto {
        name: name.into(),
        r#type: pb::attribute_proto::AttributeType::Int as i32,
        i: value,
        ..Default::default()
    }
}

fn save(path: &Path, graph: pb::GraphProto) {
    let model = pb::ModelProto {
        ir_version: 7,
        opset_import: vec![pb::OperatorSetIdProto {
            domain: String::new(),
            version: 13,
        }],
        producer_name: "fixture".into(),
        graph: Some(graph),
        ..Default::default()
    };
    std::fs::write(path, model.encode_to_vec()).unwrap();
}

/// Pair network over `channels` stacked input planes of `patch x patch`.
/// Scores `[100 * |mean(first half) - mean(second half)|, 0.5]`, so two
/// frames read as "same" when their average levels differ by less than
/// 0.005 (about 1.3 gray levels).
pub fn pair_model(path: &Path, channels: i64, patch: i64, symbolic_batch: bool) {
    let half = channels / 2;
    let w: Vec<f32> = (0..channels).map(|c| if c < half { 1.0 } else { -1.0 }).collect();
    let batch = if symbolic_batch { None } else { Some(1) };
    let graph = pb::GraphProto {
        name: "pair".into(),
        node: vec![
            node("ReduceMean", &["x"], "m", vec![ints("axes", &[2, 3]), int("keepdims", 0)]),
            node("MatMul", &["m", "w"], "d", vec![]),
            node("Abs", &["d"], "a", vec![]),
            node("MatMul", &["a", "s"], "l", vec![]),
            node("Add", &["l", "b"], "y", vec![]),
        ],
        initializer: vec![
            tensor("w", &[channels, 1], w),
            tensor("s", &[1, 2], vec![100.0, 0.0]),
            tensor("b", &[2], vec![0.0, 0.5]),
        ],
        input: vec![value_info("x", &[batch, Some(channels), Some(patch), Some(patch)])],
        output: vec![value_info("y", &[batch, Some(2)])],
        ..Default::default()
    };
    save(path, graph);
}

/// Clip network over `frames x patch x patch x 3`. Class scores are linear
/// in the clip's mean level: dark clips pick class 0, bright ones the last
/// class.
pub fn clip_model(path: &Path, frames: i64, patch: i64, classes: usize) {
    let k = classes as i64;
    let mut w = Vec::new();
    for _ in 0..frames {
        for c in 0..classes {
            w.push(c as f32 / frames as f32);
        }
    }
    let b: Vec<f32> = (0..classes).map(|c| (classes - 1 - c) as f32 * 0.5).collect();
    let graph = pb::GraphProto {
        name: "clip".into(),
        node: vec![
            node("ReduceMean", &["x"], "m", vec![ints("axes", &[2, 3, 4]), int("keepdims", 0)]),
            node("MatMul", &["m", "w"], "l", vec![]),
            node("Add", &["l", "b"], "y", vec![]),
        ],
        initializer: vec![tensor("w", &[frames, k], w), tensor("b", &[k], b)],
        input: vec![value_info("x", &[Some(1), Some(frames), Some(patch), Some(patch), Some(3)])],
        output: vec![value_info("y", &[Some(1), Some(k)])],
        ..Default::default()
    };
    save(path, graph);
}
