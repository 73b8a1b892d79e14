//! File formats: Netpbm rasters and ZOT1 tensors.

mod netpbm;
mod tensor;

pub use netpbm::{
    decode_pgm, decode_ppm, encode_pgm, encode_pgm_with_maxval, encode_ppm, read_pgm, read_ppm, write_pgm, write_ppm,
};
pub use tensor::{
    matrix_tensor, read_tensor, tensor_rows, write_tensor, DType, Tensor, TensorData, MAX_RANK, TENSOR_MAGIC,
};
