//! Bit-exact integer arithmetic for Winograd convolution of quantized 3x3
//! filters.
//!
//! The crate provides three minimal-filtering algorithms over integer data:
//! the rational 2x2- and 4x4-output-tile algorithms and a complex-field
//! 4x4-output-tile algorithm whose transformed grids split into 16 rational
//! values and 10 conjugate pairs. Each pair costs a single Karatsuba complex
//! product (3 multiplications), so one 6x6 Hadamard product spends 46 general
//! multiplications instead of the direct method's 144 — a 3.13x reduction
//! with only 4 bits of filter widening.
//!
//! On top of the lossless kernels sits a lossy Winograd-domain filter
//! precision-scaling scheme: per-position factors of the form `n / 2^shift`
//! (6-bit encoded) bring 13-bit transformed weights back to int9, and an
//! 8-bit multiply-and-shift reverses the scaling after channel accumulation.
//!
//! Everything is verified against a direct-convolution oracle: with scaling
//! disabled each algorithm reproduces the direct method bit for bit.
//!
//! See the `examples/` directory for one runnable example per capability and
//! the `winoint` binary for the analysis CLI.

pub mod cli;
pub mod conv;
pub mod error;
pub mod gauss;
pub mod hadamard;
pub mod scaling;
pub mod tensor;
pub mod transform;

pub use conv::{
    compare, convolve, direct_conv, winograd_conv, ConvAlgorithm, ConvResult, ConvSpec, ConvStats,
    DiffReport,
};
pub use error::{Error, Result};
pub use gauss::{
    gmul_conjugate_pair, gmul_karatsuba, karatsuba_accumulate, GaussInt, GaussMat,
    KaratsubaPartial, MulCounter,
};
pub use hadamard::{finalize, hadamard_accumulate, HadamardAccumulator};
pub use scaling::{
    apply_reverse, apply_scaling, bitwidth_reduction, compute_scale_factor,
    compute_scale_factor_wide, reverse_factor, scale_factors_for_filter, scale_table,
    static_error_sweep, ErrorReport, InverseFactor, ScaleFactor, ScaleGrid,
};
pub use tensor::{
    extract_tiles, load_qtf, store_qtf, zero_point_adjust, Dtype, ITensor, QTensor, Shape,
    TensorData, Tile,
};
pub use transform::{
    activation_transform, algorithm, efficiency_gain, filter_transform, output_transform,
    output_transform_rounded, reduction_ratio, worst_case_ranges, AlgorithmId, ConjLayout,
    RangeReport, Ratio, WinoAlgorithm,
};
