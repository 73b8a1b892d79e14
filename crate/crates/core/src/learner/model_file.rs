//! `ZOM1` model files: magic, `u32` classes, `u32` layer count, then per layer
//! `u32` in/out, `f32` weights (out x in) and biases, then the `f32` mean and
//! std vectors. All little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::mlp::{Layer, MlpModel};

pub const MODEL_MAGIC: &[u8; 4] = b"ZOM1";

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::invalid("model dimension exceeds u32"))?;
    out.extend_from_slice(&v.to_le_bytes());
    Ok(())
}

fn put_f32s(out: &mut Vec<u8>, vs: &[f32]) {
    vs.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
}

pub fn model_to_bytes(model: &MlpModel) -> Result<Vec<u8>> {
    let mut out = MODEL_MAGIC.to_vec();
    put_u32(&mut out, model.num_classes())?;
    put_u32(&mut out, model.layers().len())?;
    for layer in model.layers() {
        put_u32(&mut out, layer.inputs)?;
        put_u32(&mut out, layer.outputs)?;
        put_f32s(&mut out, &layer.weights);
        put_f32s(&mut out, &layer.bias);
    }
    put_f32s(&mut out, model.mean());
    put_f32s(&mut out, model.std());
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format("model file truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let len = n.checked_mul(4).ok_or_else(|| Error::format("model dimensions overflow"))?;
        Ok(self.take(len)?.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect())
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MODEL_MAGIC {
        return Err(Error::format("bad model magic"));
    }
    let classes = r.u32()?;
    let count = r.u32()?;
    if count == 0 {
        return Err(Error::format("model has no layers"));
    }
    let mut layers = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let inputs = r.u32()?;
        let outputs = r.u32()?;
        let n = inputs.checked_mul(outputs).ok_or_else(|| Error::format("model dimensions overflow"))?;
        let weights = r.f32s(n)?;
        let bias = r.f32s(outputs)?;
        layers.push(Layer { inputs, outputs, weights, bias });
    }
    let d = layers[0].inputs;
    let mean = r.f32s(d)?;
    let std = r.f32s(d)?;
    if r.pos != bytes.len() {
        return Err(Error::format("trailing bytes after model"));
    }
    let model = MlpModel::from_parts(layers, mean, std).map_err(|e| Error::format(e.to_string()))?;
    if model.num_classes() != classes {
        return Err(Error::format("class count does not match output layer"));
    }
    Ok(model)
}

pub fn write_model(path: impl AsRef<Path>, model: &MlpModel) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_bytes(model)?).map_err(Error::at_path(path))?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    model_from_bytes(&fs::read(path).map_err(Error::at_path(path))?)
}
