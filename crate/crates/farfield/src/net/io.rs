//! Model file format: a self-describing header followed by raw little-endian
//! `f64` parameter data. Round trips are bit-exact.
//!
//! Layout:
//! ```text
//! magic   8 bytes  b"FFLDMDL\0"
//! version u32 LE   currently 1
//! hdrlen  u32 LE   byte length of the JSON header
//! header  JSON     { spec, fingerprint, param_shapes }
//! params  f64 LE   tensors in order, row-major
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tensor::Tensor;
use crate::Result;

use super::{ModelSpec, TrainedModel, TrainingFingerprint};

const MAGIC: &[u8; 8] = b"FFLDMDL\0";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    spec: ModelSpec,
    fingerprint: TrainingFingerprint,
    param_shapes: Vec<Vec<usize>>,
}

/// Writes a model to `path`.
pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let header = Header {
        spec: model.spec().clone(),
        fingerprint: model.fingerprint().clone(),
        param_shapes: model.parameters().iter().map(|p| p.shape().to_vec()).collect(),
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| Error::format(format!("header: {e}")))?;

    let mut out = Vec::with_capacity(header_json.len() + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    out.extend_from_slice(&header_json);
    for p in model.parameters() {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }

    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Reads a model back; any structural inconsistency is a format error.
pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let bytes = fs::read(path)?;
    let name = path.display();
    if bytes.len() < MAGIC.len() + 8 {
        return Err(Error::format(format!("{name}: file too short for a model header")));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::format(format!("{name}: bad magic bytes")));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::format(format!(
            "{name}: unsupported model format version {version} (expected {VERSION})"
        )));
    }
    let hdr_len = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let body_start = 16 + hdr_len;
    if bytes.len() < body_start {
        return Err(Error::format(format!("{name}: truncated header")));
    }
    let header: Header = serde_json::from_slice(&bytes[16..body_start])
        .map_err(|e| Error::format(format!("{name}: header does not parse: {e}")))?;

    let expected_shapes = header.spec.parameter_shapes();
    if expected_shapes != header.param_shapes {
        return Err(Error::format(format!(
            "{name}: declared parameter shapes do not match the architecture"
        )));
    }
    let total: usize = header.param_shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let expected_bytes = body_start + total * 8;
    if bytes.len() != expected_bytes {
        return Err(Error::format(format!(
            "{name}: expected {expected_bytes} bytes ({total} doubles), file has {}",
            bytes.len()
        )));
    }

    let mut params = Vec::with_capacity(header.param_shapes.len());
    let mut off = body_start;
    for shape in &header.param_shapes {
        let count: usize = shape.iter().product();
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(f64::from_le_bytes(bytes[off..off + 8].try_into().expect("8 bytes")));
            off += 8;
        }
        let t = Tensor::new(shape.clone(), data)
            .map_err(|e| Error::format(format!("{name}: parameter tensor invalid: {e}")))?;
        params.push(t);
    }

    TrainedModel::from_parts(header.spec, params, header.fingerprint)
        .map_err(|e| Error::format(format!("{name}: {e}")))
}
