//! Transform matrices and the filter/activation/output transforms for the
//! three supported minimal-filtering algorithms, plus worst-case range
//! analysis and arithmetic-reduction accounting.
//!
//! All three algorithms compute 2-D FIR filtering (correlation, no kernel
//! flip) of a 3x3 filter. The filter transform matrix is stored pre-scaled by
//! an integer `filter_scale` so every transform stays in integer arithmetic;
//! the squared scale is divided out once per output tile.

use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::gauss::{GaussInt, GaussMat};
use crate::scaling::{round_div_away, round_shift_away};
use crate::tensor::Tile;

/// Identifier of a supported algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmId {
    /// 2x2 output tile, interpolation points {0, 1, -1}.
    Rat2x2,
    /// 4x4 output tile, interpolation points {0, 1, -1, 2, -2}.
    Rat4x4,
    /// 4x4 output tile, interpolation points {0, 1, -1, i, -i}.
    Cplx4x4,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 3] = [
        AlgorithmId::Rat2x2,
        AlgorithmId::Rat4x4,
        AlgorithmId::Cplx4x4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Rat2x2 => "rat2x2",
            AlgorithmId::Rat4x4 => "rat4x4",
            AlgorithmId::Cplx4x4 => "cplx4x4",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rat2x2" => Ok(AlgorithmId::Rat2x2),
            "rat4x4" => Ok(AlgorithmId::Rat4x4),
            "cplx4x4" => Ok(AlgorithmId::Cplx4x4),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }
}

/// A primary grid position and its conjugate mirror.
pub type ConjPair = ((usize, usize), (usize, usize));

/// Partition of the `t x t` transformed grid into rational positions and
/// conjugate-mirror pairs.
///
/// For the complex algorithm the 6x6 grid splits into 16 rational positions
/// (both indices in {0, 1, 2, 5}) and 10 conjugate pairs; the two rational
/// algorithms have every position rational and no pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConjLayout {
    rational: Vec<(usize, usize)>,
    pairs: Vec<ConjPair>,
}

impl ConjLayout {
    fn all_rational(t: usize) -> Self {
        let rational = (0..t).flat_map(|r| (0..t).map(move |c| (r, c))).collect();
        ConjLayout {
            rational,
            pairs: Vec::new(),
        }
    }

    fn conjugate_6x6() -> Self {
        const REAL: [usize; 4] = [0, 1, 2, 5];
        let rational = REAL
            .iter()
            .flat_map(|&r| REAL.iter().map(move |&c| (r, c)))
            .collect();
        let mut pairs = Vec::with_capacity(10);
        for &r in &REAL {
            pairs.push(((r, 3), (r, 4)));
        }
        for &c in &REAL {
            pairs.push(((3, c), (4, c)));
        }
        pairs.push(((3, 3), (4, 4)));
        pairs.push(((3, 4), (4, 3)));
        ConjLayout { rational, pairs }
    }

    pub fn rational_positions(&self) -> &[(usize, usize)] {
        &self.rational
    }

    pub fn pair_positions(&self) -> &[ConjPair] {
        &self.pairs
    }

    /// General multiplications per Hadamard product of one channel: one per
    /// rational position, three per conjugate pair.
    pub fn muls_per_tile(&self) -> u64 {
        self.rational.len() as u64 + 3 * self.pairs.len() as u64
    }

    /// Checks that a transformed grid respects this layout exactly.
    pub fn check(&self, m: &GaussMat) -> Result<()> {
        for &(r, c) in &self.rational {
            if !m.at(r, c).is_rational() {
                return Err(Error::LayoutViolation(format!(
                    "position ({r},{c}) should be rational, got {}",
                    m.at(r, c)
                )));
            }
        }
        for &((pr, pc), (mr, mc)) in &self.pairs {
            if m.at(mr, mc) != m.at(pr, pc).conj() {
                return Err(Error::LayoutViolation(format!(
                    "({mr},{mc}) = {} is not the conjugate of ({pr},{pc}) = {}",
                    m.at(mr, mc),
                    m.at(pr, pc)
                )));
            }
        }
        Ok(())
    }
}

/// A fixed algorithm descriptor: transform matrices with integer scaling
/// compensation, tile geometry, and the conjugate-position layout.
#[derive(Debug)]
pub struct WinoAlgorithm {
    pub id: AlgorithmId,
    /// Output tile side.
    pub m: usize,
    /// Filter side (always 3).
    pub r: usize,
    /// Input tile side, m + r - 1.
    pub t: usize,
    /// t x t activation transform (applied as `bt * d * bt^T`).
    pub bt: GaussMat,
    /// t x 3 integer-scaled filter transform (`filter_scale` times the
    /// fractional filter matrix).
    pub g_int: GaussMat,
    /// m x t output transform (applied as `at * m * at^T`).
    pub at: GaussMat,
    /// Element-wise integer scale baked into `g_int`.
    pub filter_scale: i64,
    /// `filter_scale^2`, divided out once per 2-D output tile.
    pub output_divisor: i64,
    pub layout: ConjLayout,
}

fn real_mat(rows: &[&[i64]]) -> GaussMat {
    GaussMat::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn gauss_mat(rows: &[&[(i64, i64)]]) -> GaussMat {
    GaussMat::from_fn(rows.len(), rows[0].len(), |i, j| {
        GaussInt::new(rows[i][j].0, rows[i][j].1)
    })
}

static RAT_2X2: LazyLock<WinoAlgorithm> = LazyLock::new(|| WinoAlgorithm {
    id: AlgorithmId::Rat2x2,
    m: 2,
    r: 3,
    t: 4,
    bt: real_mat(&[
        &[1, 0, -1, 0],
        &[0, 1, 1, 0],
        &[0, -1, 1, 0],
        &[0, 1, 0, -1],
    ]),
    g_int: real_mat(&[&[2, 0, 0], &[1, 1, 1], &[1, -1, 1], &[0, 0, 2]]),
    at: real_mat(&[&[1, 1, 1, 0], &[0, 1, -1, -1]]),
    filter_scale: 2,
    output_divisor: 4,
    layout: ConjLayout::all_rational(4),
});

static RAT_4X4: LazyLock<WinoAlgorithm> = LazyLock::new(|| WinoAlgorithm {
    id: AlgorithmId::Rat4x4,
    m: 4,
    r: 3,
    t: 6,
    bt: real_mat(&[
        &[4, 0, -5, 0, 1, 0],
        &[0, -4, -4, 1, 1, 0],
        &[0, 4, -4, -1, 1, 0],
        &[0, -2, -1, 2, 1, 0],
        &[0, 2, -1, -2, 1, 0],
        &[0, 4, 0, -5, 0, 1],
    ]),
    g_int: real_mat(&[
        &[6, 0, 0],
        &[-4, -4, -4],
        &[-4, 4, -4],
        &[1, 2, 4],
        &[1, -2, 4],
        &[0, 0, 24],
    ]),
    at: real_mat(&[
        &[1, 1, 1, 1, 1, 0],
        &[0, 1, -1, 2, -2, 0],
        &[0, 1, 1, 4, 4, 0],
        &[0, 1, -1, 8, -8, 1],
    ]),
    filter_scale: 24,
    output_divisor: 576,
    layout: ConjLayout::all_rational(6),
});

static CPLX_4X4: LazyLock<WinoAlgorithm> = LazyLock::new(|| {
    const O: (i64, i64) = (0, 0);
    const P: (i64, i64) = (1, 0);
    const N: (i64, i64) = (-1, 0);
    const PI: (i64, i64) = (0, 1);
    const NI: (i64, i64) = (0, -1);
    WinoAlgorithm {
        id: AlgorithmId::Cplx4x4,
        m: 4,
        r: 3,
        t: 6,
        bt: gauss_mat(&[
            &[P, O, O, O, N, O],
            &[O, P, P, P, P, O],
            &[O, N, P, N, P, O],
            &[O, NI, N, PI, P, O],
            &[O, PI, N, NI, P, O],
            &[O, N, O, O, O, P],
        ]),
        g_int: gauss_mat(&[
            &[(4, 0), O, O],
            &[P, P, P],
            &[P, N, P],
            &[P, PI, N],
            &[P, NI, N],
            &[O, O, (4, 0)],
        ]),
        at: gauss_mat(&[
            &[P, P, P, P, P, O],
            &[O, P, N, PI, NI, O],
            &[O, P, P, N, N, O],
            &[O, P, N, NI, PI, P],
        ]),
        filter_scale: 4,
        output_divisor: 16,
        layout: ConjLayout::conjugate_6x6(),
    }
});

/// Returns the immutable descriptor for a supported algorithm.
pub fn algorithm(id: AlgorithmId) -> &'static WinoAlgorithm {
    match id {
        AlgorithmId::Rat2x2 => &RAT_2X2,
        AlgorithmId::Rat4x4 => &RAT_4X4,
        AlgorithmId::Cplx4x4 => &CPLX_4X4,
    }
}

fn mat_from_i32_grid(data: &[i32], side: usize) -> GaussMat {
    GaussMat::from_fn(side, side, |r, c| GaussInt::real(data[r * side + c] as i64))
}

/// Transforms a spatial 3x3 filter into the Winograd domain:
/// `W = g_int * g * g_int^T`, exactly.
pub fn filter_transform(g: &[[i32; 3]; 3], a: &WinoAlgorithm) -> Result<GaussMat> {
    for row in g {
        for &v in row {
            if v.abs() > 255 {
                return Err(Error::ValueOutOfRange(format!(
                    "filter weight {v} outside the int9 range [-255, 255]"
                )));
            }
        }
    }
    let gm = GaussMat::from_fn(3, 3, |r, c| GaussInt::real(g[r][c] as i64));
    Ok(a.g_int.mul(&gm).mul(&a.g_int.transpose()))
}

/// Transforms an input tile into the Winograd domain:
/// `D = bt * d * bt^T`, exactly.
pub fn activation_transform(d: &Tile, a: &WinoAlgorithm) -> Result<GaussMat> {
    if d.size != a.t {
        return Err(Error::ShapeMismatch(format!(
            "tile side {} does not match algorithm tile side {}",
            d.size, a.t
        )));
    }
    let dm = mat_from_i32_grid(&d.data, a.t);
    Ok(a.bt.mul(&dm).mul(&a.bt.transpose()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DivMode {
    /// Division must be exact; a remainder is an upstream arithmetic bug.
    Exact,
    /// Round half away from zero; used after lossy reverse scaling.
    Rounded,
}

fn div_stage(v: i64, divisor: i64, mode: DivMode) -> Result<i64> {
    match mode {
        DivMode::Exact => {
            if v % divisor != 0 {
                return Err(Error::DivisibilityViolation { value: v, divisor });
            }
            Ok(v / divisor)
        }
        DivMode::Rounded => Ok(round_div_away(v, divisor)),
    }
}

fn to_i32_patch(vals: Vec<i64>) -> Result<Vec<i32>> {
    vals.into_iter()
        .map(|v| {
            i32::try_from(v).map_err(|_| {
                Error::ValueOutOfRange(format!("output value {v} exceeds the signed-32 range"))
            })
        })
        .collect()
}

/// Applies the final transform `at * M * at^T` and divides out the squared
/// filter scale, with the division asserted exact. The complex algorithm is
/// evaluated through real re/im combinations only and never materializes the
/// (identically zero) imaginary output coefficients.
pub fn output_transform(m: &GaussMat, a: &WinoAlgorithm) -> Result<Vec<i32>> {
    output_transform_impl(m, a, DivMode::Exact)
}

/// [`output_transform`] with round-half-away-from-zero division; for the
/// lossy scaled pipeline where exact divisibility no longer holds.
pub fn output_transform_rounded(m: &GaussMat, a: &WinoAlgorithm) -> Result<Vec<i32>> {
    output_transform_impl(m, a, DivMode::Rounded)
}

fn output_transform_impl(m: &GaussMat, a: &WinoAlgorithm, mode: DivMode) -> Result<Vec<i32>> {
    if m.rows() != a.t || m.cols() != a.t {
        return Err(Error::ShapeMismatch(format!(
            "hadamard grid is {}x{}, expected {}x{}",
            m.rows(),
            m.cols(),
            a.t,
            a.t
        )));
    }
    a.layout.check(m)?;
    match a.id {
        AlgorithmId::Rat2x2 => {
            // The divisor 4 is realized as one right shift after each of the
            // two final transform applications.
            let u = real_apply(&a.at, m);
            let u = shift_stage(u, mode)?;
            let at_t = a.at.transpose();
            let y = real_apply_right(&u, &at_t, a.m);
            let y = shift_stage(y, mode)?;
            to_i32_patch(y)
        }
        AlgorithmId::Rat4x4 => {
            let u = real_apply(&a.at, m);
            let at_t = a.at.transpose();
            let p = real_apply_right(&u, &at_t, a.m);
            let y = p
                .into_iter()
                .map(|v| div_stage(v, a.output_divisor, mode))
                .collect::<Result<Vec<_>>>()?;
            to_i32_patch(y)
        }
        AlgorithmId::Cplx4x4 => {
            let p = cplx_output_real_only(m);
            let y = p
                .into_iter()
                .map(|v| div_stage(v, a.output_divisor, mode))
                .collect::<Result<Vec<_>>>()?;
            to_i32_patch(y)
        }
    }
}

fn shift_stage(vals: Vec<i64>, mode: DivMode) -> Result<Vec<i64>> {
    vals.into_iter()
        .map(|v| match mode {
            DivMode::Exact => {
                if v & 1 != 0 {
                    return Err(Error::DivisibilityViolation {
                        value: v,
                        divisor: 2,
                    });
                }
                Ok(v >> 1)
            }
            DivMode::Rounded => Ok(round_shift_away(v, 1)),
        })
        .collect()
}

/// `lhs * m` over plain integers; entries of `m` are rational here (the
/// layout check ran first).
fn real_apply(lhs: &GaussMat, m: &GaussMat) -> Vec<i64> {
    let rows = lhs.rows();
    let inner = lhs.cols();
    let cols = m.cols();
    let mut out = vec![0i64; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0i64;
            for k in 0..inner {
                let e = m.at(k, j);
                debug_assert!(e.is_rational());
                acc = acc
                    .checked_add(
                        lhs.at(i, k)
                            .re
                            .checked_mul(e.re)
                            .expect("i64 overflow in output transform"),
                    )
                    .expect("i64 overflow in output transform");
            }
            out[i * cols + j] = acc;
        }
    }
    out
}

/// `u (rows x inner) * rhs` over plain integers, u given flat.
fn real_apply_right(u: &[i64], rhs: &GaussMat, rows: usize) -> Vec<i64> {
    let inner = rhs.rows();
    let cols = rhs.cols();
    let mut out = vec![0i64; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0i64;
            for k in 0..inner {
                acc = acc
                    .checked_add(
                        u[i * inner + k]
                            .checked_mul(rhs.at(k, j).re)
                            .expect("i64 overflow in output transform"),
                    )
                    .expect("i64 overflow in output transform");
            }
            out[i * cols + j] = acc;
        }
    }
    out
}

/// One application of the complex algorithm's 4x6 output transform to a
/// layout-conforming 6-vector, expanded into real arithmetic: the two
/// conjugate columns combine as `v + conj(v) = 2 re(v)` and
/// `i (v - conj(v)) = -2 im(v)`.
#[inline]
fn at_conforming(v0: i64, v1: i64, v2: i64, v3: GaussInt, v5: i64) -> [i64; 4] {
    [
        v0 + v1 + v2 + 2 * v3.re,
        v1 - v2 - 2 * v3.im,
        v1 + v2 - 2 * v3.re,
        v1 - v2 + 2 * v3.im + v5,
    ]
}

/// The same 4x6 transform applied with complex additions to a full complex
/// column (multiplication by +-i is a swap and negate of parts).
#[inline]
fn at_complex(v: [GaussInt; 6]) -> [GaussInt; 4] {
    let i_mul = |x: GaussInt| GaussInt::new(-x.im, x.re);
    [
        v[0] + v[1] + v[2] + v[3] + v[4],
        v[1] - v[2] + i_mul(v[3]) - i_mul(v[4]),
        v[1] + v[2] - v[3] - v[4],
        v[1] - v[2] - i_mul(v[3]) + i_mul(v[4]) + v[5],
    ]
}

/// Evaluates `at * M * at^T` for the complex algorithm using only real
/// combinations of re/im parts. Imaginary output coefficients are never
/// computed; they sum to zero for any integer filter and activation.
fn cplx_output_real_only(m: &GaussMat) -> Vec<i64> {
    const REAL: [usize; 4] = [0, 1, 2, 5];
    // Left application: columns 0, 1, 2, 5 of M conform to the layout along
    // rows, giving real columns of U; column 3 is computed complex (column 4
    // is its implicit conjugate and never materialized).
    let mut u_real = [[0i64; 4]; 4]; // [real-col-index][row]
    for (ci, &c) in REAL.iter().enumerate() {
        let col = at_conforming(
            m.at(0, c).re,
            m.at(1, c).re,
            m.at(2, c).re,
            m.at(3, c),
            m.at(5, c).re,
        );
        u_real[ci] = col;
    }
    let u3 = at_complex([
        m.at(0, 3),
        m.at(1, 3),
        m.at(2, 3),
        m.at(3, 3),
        m.at(4, 3),
        m.at(5, 3),
    ]);
    // Right application: each row of U conforms along its columns.
    let mut out = vec![0i64; 16];
    for r in 0..4 {
        let y = at_conforming(
            u_real[0][r],
            u_real[1][r],
            u_real[2][r],
            u3[r],
            u_real[3][r],
        );
        out[r * 4..r * 4 + 4].copy_from_slice(&y);
    }
    out
}

/// Worst-case magnitudes and signed bit widths of the Winograd-domain filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeReport {
    pub t: usize,
    /// Worst-case absolute value per position (max of the re and im bounds
    /// for complex positions).
    pub magnitude: Vec<Vec<i64>>,
    /// Signed bit width per position: `1 + ceil(log2(magnitude + 1))`.
    pub bits: Vec<Vec<u32>>,
    pub max_magnitude: i64,
    /// `ceil(log2(filter_scale^2))`: bit growth of the integer-scaled filter
    /// transform relative to the fractional one.
    pub widening_bits: u32,
}

fn ceil_log2(v: u64) -> u32 {
    if v <= 1 {
        0
    } else {
        (v - 1).ilog2() + 1
    }
}

/// Computes per-position worst-case magnitudes of `g_int * g * g_int^T` over
/// all filters with `|g| <= weight_bound`, bounding re and im parts
/// separately by the L1 norm of their contributing coefficients.
pub fn worst_case_ranges(a: &WinoAlgorithm, weight_bound: i64) -> RangeReport {
    assert!(weight_bound > 0, "weight bound must be positive");
    let t = a.t;
    let mut magnitude = vec![vec![0i64; t]; t];
    let mut bits = vec![vec![0u32; t]; t];
    let mut max_magnitude = 0i64;
    for i in 0..t {
        for j in 0..t {
            let mut sum_re = 0i64;
            let mut sum_im = 0i64;
            for k in 0..3 {
                for l in 0..3 {
                    let coeff = a.g_int.at(i, k).const_mul(a.g_int.at(j, l));
                    sum_re += coeff.re.abs();
                    sum_im += coeff.im.abs();
                }
            }
            let mag = sum_re.max(sum_im) * weight_bound;
            magnitude[i][j] = mag;
            bits[i][j] = 1 + ceil_log2(mag as u64 + 1);
            max_magnitude = max_magnitude.max(mag);
        }
    }
    RangeReport {
        t,
        magnitude,
        bits,
        max_magnitude,
        widening_bits: ceil_log2((a.filter_scale * a.filter_scale) as u64),
    }
}

/// An exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub const fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Arithmetic complexity reduction over the direct method: direct
/// multiplications per tile (`m^2 r^2`) over the algorithm's general
/// multiplications per tile.
pub fn reduction_ratio(a: &WinoAlgorithm) -> Ratio {
    let direct = (a.m * a.m * a.r * a.r) as u64;
    Ratio::new(direct, a.layout.muls_per_tile())
}

/// Relative efficiency of two algorithms when each reduction is weighed by
/// its multiplier bit width: `(red_a / bits_a) / (red_b / bits_b) - 1`.
pub fn efficiency_gain(red_a: Ratio, bits_a: u32, red_b: Ratio, bits_b: u32) -> f64 {
    assert!(bits_a > 0 && bits_b > 0 && red_a.den > 0 && red_b.den > 0);
    let num = red_a.num as u128 * red_b.den as u128 * bits_b as u128;
    let den = red_a.den as u128 * bits_a as u128 * red_b.num as u128;
    num as f64 / den as f64 - 1.0
}
