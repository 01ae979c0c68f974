//! End-to-end multi-channel 2-D quantized convolution: the direct reference
//! method and the tiled Winograd pipeline with optional filter precision
//! scaling.
//!
//! Both engines zero-point adjust activations and weights symmetrically and
//! leave the output feature map in signed-32 accumulator form; requantization
//! is out of scope. With scaling disabled every supported algorithm is
//! bit-identical to the direct method.

use crate::error::{Error, Result};
use crate::gauss::{GaussInt, GaussMat, MulCounter};
use crate::hadamard::{finalize, hadamard_accumulate, HadamardAccumulator};
use crate::scaling::{
    apply_reverse, apply_scaling, reverse_factor, scale_factors_for_filter, InverseFactor,
};
use crate::tensor::{extract_tiles, zero_point_adjust, ITensor, QTensor, Shape};
use crate::transform::{
    activation_transform, algorithm, filter_transform, output_transform, output_transform_rounded,
    AlgorithmId, WinoAlgorithm,
};

/// Which engine computes the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvAlgorithm {
    Direct,
    Winograd(AlgorithmId),
}

/// Layer configuration. Filters are 3x3 with unit stride and dilation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub algorithm: ConvAlgorithm,
    pub padding: usize,
    pub scaling_enabled: bool,
    pub in_channels: usize,
    pub out_channels: usize,
}

/// Arithmetic accounting for one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvStats {
    /// General (data x data) multiplications spent.
    pub general_muls: u64,
    /// Input tile positions processed (per batch image, summed).
    pub tiles: u64,
    /// General multiplications the direct method spends on the same layer.
    pub direct_muls: u64,
}

impl ConvStats {
    /// Per-layer arithmetic reduction over the direct method.
    pub fn reduction(&self) -> f64 {
        self.direct_muls as f64 / self.general_muls as f64
    }
}

/// A computed layer: signed-32 accumulators plus accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvResult {
    pub ofm: ITensor,
    pub stats: ConvStats,
}

fn validate_shapes(ifm: &QTensor, filters: &QTensor, spec: &ConvSpec) -> Result<(usize, usize)> {
    let [_, fh, fw, fc] = filters.shape.dims();
    if (fh, fw) != (3, 3) {
        return Err(Error::ShapeMismatch(format!(
            "filters must be 3x3, got {fh}x{fw}"
        )));
    }
    if filters.shape.n != spec.out_channels {
        return Err(Error::ShapeMismatch(format!(
            "filters hold {} output channels, spec says {}",
            filters.shape.n, spec.out_channels
        )));
    }
    if fc != spec.in_channels || ifm.shape.c != spec.in_channels {
        return Err(Error::ShapeMismatch(format!(
            "channel mismatch: ifm has {}, filters have {fc}, spec says {}",
            ifm.shape.c, spec.in_channels
        )));
    }
    let (h, w) = (ifm.shape.h, ifm.shape.w);
    if h + 2 * spec.padding < 3 || w + 2 * spec.padding < 3 {
        return Err(Error::InputTooSmall {
            h,
            w,
            padding: spec.padding,
            tile: 3,
        });
    }
    Ok((h + 2 * spec.padding - 2, w + 2 * spec.padding - 2))
}

fn to_i32(v: i64) -> Result<i32> {
    i32::try_from(v)
        .map_err(|_| Error::ValueOutOfRange(format!("accumulator {v} exceeds signed-32")))
}

/// Direct convolution by spatial dot products; the correctness oracle and
/// the complexity baseline.
pub fn direct_conv(ifm: &QTensor, filters: &QTensor, spec: &ConvSpec) -> Result<ConvResult> {
    if spec.algorithm != ConvAlgorithm::Direct {
        return Err(Error::UnsupportedCombination(
            "direct_conv requires the direct algorithm".into(),
        ));
    }
    if spec.scaling_enabled {
        return Err(Error::UnsupportedCombination(
            "precision scaling does not apply to the direct method".into(),
        ));
    }
    let (out_h, out_w) = validate_shapes(ifm, filters, spec)?;
    let a = zero_point_adjust(ifm)?;
    let f = zero_point_adjust(filters)?;
    let (n, h, w, cin) = (ifm.shape.n, ifm.shape.h, ifm.shape.w, spec.in_channels);
    let k = spec.out_channels;
    let pad = spec.padding as i64;

    let out_shape = Shape::new(n, out_h, out_w, k);
    let mut data = vec![0i32; out_shape.len()];
    for b in 0..n {
        for y in 0..out_h {
            for x in 0..out_w {
                for o in 0..k {
                    let mut acc = 0i64;
                    for u in 0..3usize {
                        let sy = y as i64 + u as i64 - pad;
                        if sy < 0 || sy >= h as i64 {
                            continue;
                        }
                        for v in 0..3usize {
                            let sx = x as i64 + v as i64 - pad;
                            if sx < 0 || sx >= w as i64 {
                                continue;
                            }
                            for ch in 0..cin {
                                acc += a.get(b, sy as usize, sx as usize, ch) as i64
                                    * f.get(o, u, v, ch) as i64;
                            }
                        }
                    }
                    data[out_shape.index(b, y, x, o)] = to_i32(acc)?;
                }
            }
        }
    }
    let muls = (n * out_h * out_w * k * 9 * cin) as u64;
    Ok(ConvResult {
        ofm: ITensor::new(out_shape, 32, data)?,
        stats: ConvStats {
            general_muls: muls,
            tiles: 0,
            direct_muls: muls,
        },
    })
}

/// Per-output-channel scaled filter bank.
struct ScaledBank {
    /// Winograd-domain filters per (out channel, in channel), possibly
    /// downscaled.
    filters: Vec<Vec<GaussMat>>,
    /// Reverse factor per (out channel, position); None at sentinel
    /// positions.
    inverse: Option<Vec<Vec<Option<InverseFactor>>>>,
}

fn transform_filters(
    filters: &ITensor,
    spec: &ConvSpec,
    algo: &WinoAlgorithm,
) -> Result<ScaledBank> {
    let mut bank = Vec::with_capacity(spec.out_channels);
    for o in 0..spec.out_channels {
        let mut per_channel = Vec::with_capacity(spec.in_channels);
        for ch in 0..spec.in_channels {
            let mut g = [[0i32; 3]; 3];
            for (u, row) in g.iter_mut().enumerate() {
                for (v, cell) in row.iter_mut().enumerate() {
                    *cell = filters.get(o, u, v, ch);
                }
            }
            per_channel.push(filter_transform(&g, algo)?);
        }
        bank.push(per_channel);
    }
    if !spec.scaling_enabled {
        return Ok(ScaledBank {
            filters: bank,
            inverse: None,
        });
    }
    let mut scaled_bank = Vec::with_capacity(spec.out_channels);
    let mut inverse = Vec::with_capacity(spec.out_channels);
    for per_channel in &bank {
        let grid = scale_factors_for_filter(per_channel)?;
        scaled_bank.push(apply_scaling(per_channel, &grid)?);
        let mut inv_grid = Vec::with_capacity(algo.t * algo.t);
        for r in 0..algo.t {
            for c in 0..algo.t {
                let f = grid.at(r, c);
                inv_grid.push(if f.is_none() {
                    None
                } else {
                    Some(reverse_factor(&f)?)
                });
            }
        }
        inverse.push(inv_grid);
    }
    Ok(ScaledBank {
        filters: scaled_bank,
        inverse: Some(inverse),
    })
}

/// Tiled Winograd convolution. With scaling disabled the output is
/// bit-identical to [`direct_conv`]; with scaling enabled the Winograd-domain
/// filters are downscaled to int9 and the accumulated Hadamard products are
/// reverse-scaled before the final transforms.
pub fn winograd_conv(ifm: &QTensor, filters: &QTensor, spec: &ConvSpec) -> Result<ConvResult> {
    let id = match spec.algorithm {
        ConvAlgorithm::Winograd(id) => id,
        ConvAlgorithm::Direct => {
            return Err(Error::UnsupportedCombination(
                "winograd_conv requires a winograd algorithm".into(),
            ))
        }
    };
    if spec.scaling_enabled && id == AlgorithmId::Rat4x4 {
        return Err(Error::UnsupportedCombination(
            "precision scaling supports rat2x2 and cplx4x4 only".into(),
        ));
    }
    let algo = algorithm(id);
    let (out_h, out_w) = validate_shapes(ifm, filters, spec)?;
    let a = zero_point_adjust(ifm)?;
    let f = zero_point_adjust(filters)?;
    let bank = transform_filters(&f, spec, algo)?;

    let tiles = extract_tiles(&a, algo, spec.padding)?;
    let (n, cin, k) = (ifm.shape.n, spec.in_channels, spec.out_channels);
    let tiles_h = out_h.div_ceil(algo.m);
    let tiles_w = out_w.div_ceil(algo.m);
    let per_plane = tiles_h * tiles_w;

    // activation transforms are shared across output channels
    let mut d_cache: Vec<GaussMat> = Vec::with_capacity(tiles.len());
    for tile in &tiles {
        d_cache.push(activation_transform(tile, algo)?);
    }

    let out_shape = Shape::new(n, out_h, out_w, k);
    let mut data = vec![0i32; out_shape.len()];
    let mut counter = MulCounter::new();
    for b in 0..n {
        for ty in 0..tiles_h {
            for tx in 0..tiles_w {
                let tile_idx = ty * tiles_w + tx;
                for o in 0..k {
                    let mut acc = HadamardAccumulator::new(algo);
                    for ch in 0..cin {
                        let d = &d_cache[(b * cin + ch) * per_plane + tile_idx];
                        hadamard_accumulate(&mut acc, &bank.filters[o][ch], d, algo, &mut counter)?;
                    }
                    let mut m = finalize(&acc, algo)?;
                    let patch = if let Some(inverse) = &bank.inverse {
                        for r in 0..algo.t {
                            for c in 0..algo.t {
                                if let Some(inv) = &inverse[o][r * algo.t + c] {
                                    let v = m.at(r, c);
                                    m.set(
                                        r,
                                        c,
                                        GaussInt::new(
                                            apply_reverse(v.re, inv),
                                            apply_reverse(v.im, inv),
                                        ),
                                    );
                                }
                            }
                        }
                        output_transform_rounded(&m, algo)?
                    } else {
                        output_transform(&m, algo)?
                    };
                    // crop the m x m patch to the true output bounds
                    for py in 0..algo.m {
                        let y = ty * algo.m + py;
                        if y >= out_h {
                            break;
                        }
                        for px in 0..algo.m {
                            let x = tx * algo.m + px;
                            if x >= out_w {
                                break;
                            }
                            data[out_shape.index(b, y, x, o)] = patch[py * algo.m + px];
                        }
                    }
                }
            }
        }
    }
    Ok(ConvResult {
        ofm: ITensor::new(out_shape, 32, data)?,
        stats: ConvStats {
            general_muls: counter.general_muls,
            tiles: (n * per_plane) as u64,
            direct_muls: (n * out_h * out_w * k * 9 * cin) as u64,
        },
    })
}

/// Runs the engine selected by `spec.algorithm`.
pub fn convolve(ifm: &QTensor, filters: &QTensor, spec: &ConvSpec) -> Result<ConvResult> {
    match spec.algorithm {
        ConvAlgorithm::Direct => direct_conv(ifm, filters, spec),
        ConvAlgorithm::Winograd(_) => winograd_conv(ifm, filters, spec),
    }
}

/// Element-wise difference statistics between two results; `b` is the
/// reference. Per-element relative differences clamp the reference magnitude
/// to at least 1; `l1_rel` is the aggregate `sum|a-b| / sum|b|` deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffReport {
    pub elements: usize,
    pub differing: usize,
    pub max_abs: i64,
    pub mean_abs: f64,
    pub max_rel: f64,
    pub mean_rel: f64,
    pub l1_rel: f64,
}

impl DiffReport {
    pub fn identical(&self) -> bool {
        self.differing == 0
    }
}

/// Compares two results of equal shape.
pub fn compare(a: &ConvResult, b: &ConvResult) -> Result<DiffReport> {
    if a.ofm.shape != b.ofm.shape {
        return Err(Error::ShapeMismatch(format!(
            "cannot compare shapes {:?} and {:?}",
            a.ofm.shape.dims(),
            b.ofm.shape.dims()
        )));
    }
    let mut differing = 0usize;
    let mut max_abs = 0i64;
    let mut sum_abs = 0f64;
    let mut max_rel = 0f64;
    let mut sum_rel = 0f64;
    let mut sum_abs_ref = 0f64;
    for (&x, &y) in a.ofm.data().iter().zip(b.ofm.data()) {
        let d = (x as i64 - y as i64).abs();
        if d != 0 {
            differing += 1;
        }
        max_abs = max_abs.max(d);
        sum_abs += d as f64;
        let rel = d as f64 / (y as i64).abs().max(1) as f64;
        max_rel = max_rel.max(rel);
        sum_rel += rel;
        sum_abs_ref += (y as i64).abs() as f64;
    }
    let elements = a.ofm.data().len();
    Ok(DiffReport {
        elements,
        differing,
        max_abs,
        mean_abs: sum_abs / elements as f64,
        max_rel,
        mean_rel: sum_rel / elements as f64,
        l1_rel: sum_abs / sum_abs_ref.max(1.0),
    })
}
