//! Conversions between ZOT1 tensor files and toolkit values.

use std::path::Path;

use zok_core::io::{matrix_tensor, read_tensor, tensor_rows, write_tensor};
use zok_core::{Error, FeatureMap, Result, SuperpixelMap, Tensor};

/// `H×W` u32 ids.
pub fn read_superpixels(path: &Path) -> Result<SuperpixelMap> {
    let t = read_tensor(path)?;
    t.expect_rank(2, "superpixel map")?;
    SuperpixelMap::new(t.dims()[1], t.dims()[0], t.as_u32()?.to_vec())
}

pub fn write_superpixels(map: &SuperpixelMap, path: &Path) -> Result<()> {
    write_tensor(&Tensor::u32(vec![map.height(), map.width()], map.labels().to_vec())?, path)
}

/// `C×H×W` f32 field.
pub fn read_field(path: &Path, what: &str) -> Result<FeatureMap> {
    let t = read_tensor(path)?;
    t.expect_rank(3, what)?;
    let d = t.dims();
    FeatureMap::new(d[0], d[1], d[2], t.as_f32()?.to_vec())
}

pub fn read_rows(path: &Path) -> Result<Vec<Vec<f32>>> {
    tensor_rows(&read_tensor(path)?)
}

pub fn write_rows(rows: &[Vec<f32>], path: &Path) -> Result<()> {
    write_tensor(&matrix_tensor(rows)?, path)
}

/// Rank-1 u32 labels.
pub fn read_labels(path: &Path) -> Result<Vec<u16>> {
    let t = read_tensor(path)?;
    t.expect_rank(1, "label vector")?;
    t.as_u32()?
        .iter()
        .map(|&v| u16::try_from(v).map_err(|_| Error::invalid(format!("label {v} exceeds 65535"))))
        .collect()
}

pub fn write_labels(labels: &[u16], path: &Path) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::invalid("no labels to write"));
    }
    write_tensor(&Tensor::u32(vec![labels.len()], labels.iter().map(|&l| u32::from(l)).collect())?, path)
}

/// Rank-1 f32 values.
pub fn read_values(path: &Path) -> Result<Vec<f32>> {
    let t = read_tensor(path)?;
    t.expect_rank(1, "value vector")?;
    Ok(t.as_f32()?.to_vec())
}
