//! Quantized tensors, zero-point adjustment, tile extraction and the QTF
//! on-disk format.
//!
//! Layout is fixed to batch, row, column, channel. Values are immutable after
//! construction and safe to share across threads.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::WinoAlgorithm;

/// Four-dimensional tensor shape: batch, height, width, channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub h: usize,
    pub w: usize,
    pub c: usize,
}

impl Shape {
    pub const fn new(n: usize, h: usize, w: usize, c: usize) -> Self {
        Shape { n, h, w, c }
    }

    pub fn len(&self) -> usize {
        self.n * self.h * self.w * self.c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index in batch, row, column, channel order.
    #[inline]
    pub fn index(&self, b: usize, y: usize, x: usize, ch: usize) -> usize {
        ((b * self.h + y) * self.w + x) * self.c + ch
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.n, self.h, self.w, self.c]
    }
}

/// Element type of a stored tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    U8,
    I32,
}

impl Dtype {
    pub fn name(&self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::I32 => "i32",
        }
    }
}

/// Flat element storage for a [`QTensor`].
#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    U8(Vec<u8>),
    I32(Vec<i32>),
}

impl TensorData {
    pub fn len(&self) -> usize {
        match self {
            TensorData::U8(v) => v.len(),
            TensorData::I32(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dtype(&self) -> Dtype {
        match self {
            TensorData::U8(_) => Dtype::U8,
            TensorData::I32(_) => Dtype::I32,
        }
    }
}

/// A quantized integer tensor with its affine-quantization metadata.
///
/// `dequant_scale` is carried as metadata only; no kernel arithmetic consumes
/// it once values are quantized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTensor {
    pub shape: Shape,
    pub zero_point: u8,
    pub dequant_scale: f64,
    data: TensorData,
}

impl QTensor {
    pub fn new(shape: Shape, zero_point: u8, dequant_scale: f64, data: TensorData) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} holds {} elements but data has {}",
                shape.dims(),
                shape.len(),
                data.len()
            )));
        }
        Ok(QTensor {
            shape,
            zero_point,
            dequant_scale,
            data,
        })
    }

    pub fn from_u8(
        shape: Shape,
        zero_point: u8,
        dequant_scale: f64,
        data: Vec<u8>,
    ) -> Result<Self> {
        QTensor::new(shape, zero_point, dequant_scale, TensorData::U8(data))
    }

    pub fn dtype(&self) -> Dtype {
        self.data.dtype()
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn as_u8(&self) -> Result<&[u8]> {
        match &self.data {
            TensorData::U8(v) => Ok(v),
            TensorData::I32(_) => Err(Error::WrongDtype {
                expected: "u8",
                got: "i32",
            }),
        }
    }

    pub fn as_i32(&self) -> Result<&[i32]> {
        match &self.data {
            TensorData::I32(v) => Ok(v),
            TensorData::U8(_) => Err(Error::WrongDtype {
                expected: "i32",
                got: "u8",
            }),
        }
    }

    /// Wraps a signed accumulator tensor for storage (zero point 0, scale 1).
    pub fn from_itensor(t: &ITensor) -> Self {
        QTensor {
            shape: t.shape,
            zero_point: 0,
            dequant_scale: 1.0,
            data: TensorData::I32(t.data().to_vec()),
        }
    }
}

/// Signed integer tensor with a declared bit-width bound.
///
/// `bits = b` bounds every element to the symmetric range
/// `[-(2^(b-1) - 1), 2^(b-1) - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ITensor {
    pub shape: Shape,
    pub bits: u8,
    data: Vec<i32>,
}

/// Largest magnitude representable at the given signed bit width.
#[inline]
pub fn signed_bound(bits: u8) -> i64 {
    (1i64 << (bits - 1)) - 1
}

impl ITensor {
    pub fn new(shape: Shape, bits: u8, data: Vec<i32>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} holds {} elements but data has {}",
                shape.dims(),
                shape.len(),
                data.len()
            )));
        }
        let bound = signed_bound(bits);
        if let Some(bad) = data.iter().find(|&&v| (v as i64).abs() > bound) {
            return Err(Error::ValueOutOfRange(format!(
                "{bad} exceeds the int{bits} bound {bound}"
            )));
        }
        Ok(ITensor { shape, bits, data })
    }

    pub fn data(&self) -> &[i32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, b: usize, y: usize, x: usize, ch: usize) -> i32 {
        self.data[self.shape.index(b, y, x, ch)]
    }
}

/// One square input tile extracted for a Winograd algorithm.
///
/// `origin` is in source-tensor coordinates and can be negative when padding
/// extends past the top or left edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub origin: (i64, i64),
    pub size: usize,
    pub channel: usize,
    pub data: Vec<i32>,
}

impl Tile {
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> i32 {
        self.data[r * self.size + c]
    }
}

/// Subtracts the zero point from every element, mapping uint8 codes to the
/// signed 9-bit range [-255, 255].
pub fn zero_point_adjust(t: &QTensor) -> Result<ITensor> {
    let raw = t.as_u8()?;
    let zp = t.zero_point as i32;
    let data = raw.iter().map(|&v| v as i32 - zp).collect();
    ITensor::new(t.shape, 9, data)
}

/// Extracts `t x t` tiles at stride `m` covering the zero-padded input.
///
/// Tiles are ordered batch-major, then channel, then tile row, then tile
/// column; reads outside the padded plane yield 0. Per spatial plane the tile
/// count is `ceil(out_h / m) * ceil(out_w / m)` with
/// `out = spatial + 2*padding - 2`.
pub fn extract_tiles(t: &ITensor, algorithm: &WinoAlgorithm, padding: usize) -> Result<Vec<Tile>> {
    let side = algorithm.t;
    let stride = algorithm.m;
    let (h, w) = (t.shape.h, t.shape.w);
    if h + 2 * padding < side || w + 2 * padding < side {
        return Err(Error::InputTooSmall {
            h,
            w,
            padding,
            tile: side,
        });
    }
    let out_h = h + 2 * padding - 2;
    let out_w = w + 2 * padding - 2;
    let tiles_h = out_h.div_ceil(stride);
    let tiles_w = out_w.div_ceil(stride);

    let mut tiles = Vec::with_capacity(t.shape.n * t.shape.c * tiles_h * tiles_w);
    for b in 0..t.shape.n {
        for ch in 0..t.shape.c {
            for ty in 0..tiles_h {
                for tx in 0..tiles_w {
                    let oy = (ty * stride) as i64 - padding as i64;
                    let ox = (tx * stride) as i64 - padding as i64;
                    let mut data = vec![0i32; side * side];
                    for r in 0..side {
                        let y = oy + r as i64;
                        if y < 0 || y >= h as i64 {
                            continue;
                        }
                        for c in 0..side {
                            let x = ox + c as i64;
                            if x < 0 || x >= w as i64 {
                                continue;
                            }
                            data[r * side + c] = t.get(b, y as usize, x as usize, ch);
                        }
                    }
                    tiles.push(Tile {
                        origin: (oy, ox),
                        size: side,
                        channel: ch,
                        data,
                    });
                }
            }
        }
    }
    Ok(tiles)
}

#[derive(Serialize, Deserialize)]
struct QtfHeader {
    dtype: String,
    shape: [usize; 4],
    zero_point: u8,
    scale: f64,
}

/// Writes a tensor in the QTF format: one JSON header line followed by raw
/// little-endian element data.
pub fn store_qtf(path: &Path, t: &QTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let header = QtfHeader {
        dtype: t.dtype().name().to_string(),
        shape: t.shape.dims(),
        zero_point: t.zero_point,
        scale: t.dequant_scale,
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    match t.data() {
        TensorData::U8(v) => w.write_all(v)?,
        TensorData::I32(v) => {
            for x in v {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a tensor written by [`store_qtf`].
pub fn load_qtf(path: &Path) -> Result<QTensor> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        match r.read(&mut byte)? {
            0 => {
                return Err(Error::MalformedHeader(
                    "missing newline-terminated header line".into(),
                ))
            }
            _ if byte[0] == b'\n' => break,
            _ => header_bytes.push(byte[0]),
        }
    }
    let header_str =
        std::str::from_utf8(&header_bytes).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let header: QtfHeader =
        serde_json::from_str(header_str).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let [n, h, w, c] = header.shape;
    let shape = Shape::new(n, h, w, c);

    let elem_size = match header.dtype.as_str() {
        "u8" => 1,
        "i32" => 4,
        other => return Err(Error::UnknownDtype(other.to_string())),
    };
    let expected = shape.len() * elem_size;
    let mut body = Vec::with_capacity(expected);
    r.read_to_end(&mut body)?;
    if body.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: body.len(),
        });
    }
    let data = match header.dtype.as_str() {
        "u8" => TensorData::U8(body),
        _ => TensorData::I32(
            body.chunks_exact(4)
                .map(|b| i32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect(),
        ),
    };
    QTensor::new(shape, header.zero_point, header.scale, data)
}
