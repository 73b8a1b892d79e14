//! ZOT1 tensor container.
//!
//! Layout: `"ZOT1"`, one dtype byte (0 = f32, 1 = u32, 2 = u16), one rank
//! byte (1..=4), `rank` little-endian u32 extents, then the row-major
//! little-endian payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{DepthMap, FeatureMap, SuperpixelMap};

pub const TENSOR_MAGIC: &[u8; 4] = b"ZOT1";
pub const MAX_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DType {
    F32,
    U32,
    U16,
}

impl DType {
    pub fn code(self) -> u8 {
        match self {
            DType::F32 => 0,
            DType::U32 => 1,
            DType::U16 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(DType::F32),
            1 => Ok(DType::U32),
            2 => Ok(DType::U16),
            c => Err(Error::format(format!("unknown dtype code {c}"))),
        }
    }

    pub fn size(self) -> usize {
        match self {
            DType::F32 | DType::U32 => 4,
            DType::U16 => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    U32(Vec<u32>),
    U16(Vec<u16>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::U32(v) => v.len(),
            TensorData::U16(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> DType {
        match self {
            TensorData::F32(_) => DType::F32,
            TensorData::U32(_) => DType::U32,
            TensorData::U16(_) => DType::U16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: TensorData) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return Err(Error::invalid(format!("tensor rank {} outside 1..=4", dims.len())));
        }
        if dims.iter().any(|&d| d == 0 || d > u32::MAX as usize) {
            return Err(Error::invalid(format!("tensor extents {dims:?} must be in 1..=u32::MAX")));
        }
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!(
                "payload size mismatch: dims {dims:?} need {n} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn f32(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        Self::new(dims, TensorData::F32(data))
    }

    pub fn u32(dims: Vec<usize>, data: Vec<u32>) -> Result<Self> {
        Self::new(dims, TensorData::U32(data))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn dtype(&self) -> DType {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn as_f32(&self) -> Result<&[f32]> {
        match &self.data {
            TensorData::F32(v) => Ok(v),
            other => Err(Error::invalid(format!("expected f32 tensor, found {:?}", other.dtype()))),
        }
    }

    pub fn as_u32(&self) -> Result<&[u32]> {
        match &self.data {
            TensorData::U32(v) => Ok(v),
            other => Err(Error::invalid(format!("expected u32 tensor, found {:?}", other.dtype()))),
        }
    }

    pub fn expect_rank(&self, rank: usize, what: &str) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::shape(format!("{what} must be a rank-{rank} tensor, found dims {:?}", self.dims)));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dtype = self.dtype();
        let mut out = Vec::with_capacity(6 + 4 * self.rank() + self.data.len() * dtype.size());
        out.extend_from_slice(TENSOR_MAGIC);
        out.push(dtype.code());
        out.push(self.rank() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        match &self.data {
            TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::U32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::U16(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 || &bytes[..4] != TENSOR_MAGIC {
            return Err(Error::format("bad magic: not a ZOT1 tensor"));
        }
        let dtype = DType::from_code(bytes[4])?;
        let rank = bytes[5] as usize;
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::format(format!("tensor rank {rank} outside 1..=4")));
        }
        let header = 6 + 4 * rank;
        if bytes.len() < header {
            return Err(Error::format("truncated tensor header"));
        }
        let dims: Vec<usize> =
            bytes[6..header].chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]) as usize).collect();
        if dims.contains(&0) {
            return Err(Error::format(format!("zero extent in tensor dims {dims:?}")));
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::format("tensor extents overflow"))?;
        let payload = &bytes[header..];
        if Some(payload.len()) != count.checked_mul(dtype.size()) {
            return Err(Error::format(format!(
                "payload size mismatch: dims {dims:?} need {} bytes, file has {}",
                count.saturating_mul(dtype.size()),
                payload.len()
            )));
        }
        let data = match dtype {
            DType::F32 => {
                TensorData::F32(payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
            }
            DType::U32 => {
                TensorData::U32(payload.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect())
            }
            DType::U16 => TensorData::U16(payload.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect()),
        };
        Ok(Self { dims, data })
    }
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    Tensor::from_bytes(&fs::read(path).map_err(Error::at_path(path))?)
}

pub fn write_tensor(tensor: &Tensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, tensor.to_bytes()).map_err(Error::at_path(path))?;
    Ok(())
}

impl From<&SuperpixelMap> for Tensor {
    fn from(map: &SuperpixelMap) -> Self {
        Tensor::u32(vec![map.height(), map.width()], map.labels().to_vec()).expect("valid map")
    }
}

impl TryFrom<&Tensor> for SuperpixelMap {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect_rank(2, "superpixel map")?;
        SuperpixelMap::new(t.dims()[1], t.dims()[0], t.as_u32()?.to_vec())
    }
}

impl From<&FeatureMap> for Tensor {
    fn from(fm: &FeatureMap) -> Self {
        Tensor::f32(vec![fm.channels(), fm.height(), fm.width()], fm.data().to_vec()).expect("valid feature map")
    }
}

impl TryFrom<&Tensor> for FeatureMap {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect_rank(3, "feature map")?;
        let d = t.dims();
        FeatureMap::new(d[0], d[1], d[2], t.as_f32()?.to_vec())
    }
}

impl From<&DepthMap> for Tensor {
    fn from(depth: &DepthMap) -> Self {
        Tensor::f32(vec![depth.height(), depth.width()], depth.data().to_vec()).expect("valid depth map")
    }
}

impl TryFrom<&Tensor> for DepthMap {
    type Error = Error;

    fn try_from(t: &Tensor) -> Result<Self> {
        t.expect_rank(2, "depth map")?;
        DepthMap::new(t.dims()[1], t.dims()[0], t.as_f32()?.to_vec())
    }
}

/// Row-major `rows x cols` matrix of f32 as a rank-2 tensor.
pub fn matrix_tensor(rows: &[Vec<f32>]) -> Result<Tensor> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::shape("ragged matrix rows"));
    }
    Tensor::f32(vec![rows.len(), cols], rows.concat())
}

/// Splits a rank-2 f32 tensor into its rows.
pub fn tensor_rows(t: &Tensor) -> Result<Vec<Vec<f32>>> {
    t.expect_rank(2, "feature matrix")?;
    let cols = t.dims()[1];
    Ok(t.as_f32()?.chunks_exact(cols).map(<[f32]>::to_vec).collect())
}
