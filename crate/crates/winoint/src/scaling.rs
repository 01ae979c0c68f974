//! Lossy precision scaling of Winograd-domain filters.
//!
//! Transformed filter values grow past the int9 range of the multipliers. A
//! per-position scale factor of the form `n / 2^shift` (4-bit n, shift in
//! [4, 7], 6 bits total with 0 meaning "no scaling") brings them back into
//! [-255, 255]. After channel accumulation the scaling is inverted with an
//! 8-bit multiply and a right shift, a closer integer approximation of the
//! reciprocal. Rounding is half-away-from-zero throughout.

use std::io::Write;

use crate::error::{Error, Result};
use crate::gauss::{GaussInt, GaussMat};

/// Round-half-away-from-zero division by a positive divisor.
#[inline]
pub fn round_div_away(num: i64, den: i64) -> i64 {
    debug_assert!(den > 0);
    let q = (num.abs() + den / 2) / den;
    if num < 0 {
        -q
    } else {
        q
    }
}

/// Round-half-away-from-zero right shift.
#[inline]
pub fn round_shift_away(v: i64, k: u32) -> i64 {
    let q = (v.abs() + (1 << (k - 1))) >> k;
    if v < 0 {
        -q
    } else {
        q
    }
}

/// Mantissa bound for downscale factors; the scheme never needs a factor
/// below `14 / 128`, the one computed for the largest scalable magnitude.
const MIN_FACTOR_N128: i64 = 14; // value floor expressed as n at shift 7

/// Largest magnitude the public scale-factor computation accepts (the
/// worst case of the 2x2 rational algorithm's filter transform).
pub const MAX_SCALABLE_MAGNITUDE: i64 = 2295;

/// Largest magnitude the internal wide path accepts (the worst case of the
/// complex algorithm's corner positions, 16 * 255).
pub const MAX_SCALABLE_MAGNITUDE_WIDE: i64 = 4080;

/// A per-position downscale factor `n / 2^shift`, or the no-scaling sentinel.
///
/// Encoded in 6 bits: 4-bit `n` and 2-bit stored `p = shift - 4`; the encoded
/// value 0 means "no scaling".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleFactor {
    n: u8,
    shift: u8,
}

impl ScaleFactor {
    /// The "no scaling" sentinel.
    pub const NONE: ScaleFactor = ScaleFactor { n: 0, shift: 4 };

    pub fn new(n: u8, shift: u8) -> Result<Self> {
        if !(1..=15).contains(&n) || !(4..=7).contains(&shift) {
            return Err(Error::ValueOutOfRange(format!(
                "scale factor n={n} shift={shift} outside n in [1,15], shift in [4,7]"
            )));
        }
        Ok(ScaleFactor { n, shift })
    }

    pub fn is_none(&self) -> bool {
        self.n == 0
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn shift(&self) -> u8 {
        self.shift
    }

    /// The factor value `n / 2^shift`; 1.0 for the sentinel.
    pub fn value(&self) -> f64 {
        if self.is_none() {
            1.0
        } else {
            self.n as f64 / (1u32 << self.shift) as f64
        }
    }

    /// 6-bit encoding: `n` in the high 4 bits, `shift - 4` in the low 2.
    pub fn encode(&self) -> u8 {
        if self.is_none() {
            0
        } else {
            (self.n << 2) | (self.shift - 4)
        }
    }

    pub fn decode(code: u8) -> Result<Self> {
        if code == 0 {
            return Ok(ScaleFactor::NONE);
        }
        if code >= 64 {
            return Err(Error::ValueOutOfRange(format!(
                "scale factor code {code} does not fit 6 bits"
            )));
        }
        ScaleFactor::new(code >> 2, (code & 3) + 4)
    }

    /// Downscales one value: round-half-away of `v * n / 2^shift`.
    /// Sentinel factors pass the value through.
    pub fn apply(&self, v: i64) -> i64 {
        if self.is_none() {
            v
        } else {
            round_div_away(v * self.n as i64, 1i64 << self.shift)
        }
    }
}

/// Integer approximation of a scale factor's reciprocal: `m / 2^q` with an
/// 8-bit `m` and `q` in [4, 7].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InverseFactor {
    pub m: u8,
    pub q: u8,
}

impl InverseFactor {
    pub fn value(&self) -> f64 {
        self.m as f64 / (1u32 << self.q) as f64
    }
}

fn scale_factor_bounded(max_magnitude: i64, bound: i64) -> Result<ScaleFactor> {
    if max_magnitude <= 0 || max_magnitude > bound {
        return Err(Error::ValueOutOfRange(format!(
            "max magnitude {max_magnitude} outside (0, {bound}]"
        )));
    }
    if max_magnitude <= 255 {
        return Ok(ScaleFactor::NONE);
    }
    // x = floor(255 * 128 / mag) is the target factor in 1/128ths; take its
    // top bits as the mantissa. The raw mantissa spans [16, 31], so exactly
    // one halving lands n in [8, 15] with shift in [4, 7].
    let x = 255 * 128 / max_magnitude;
    let y = x.ilog2() as i64;
    let mut n = if y >= 4 { x >> (y - 4) } else { x << (4 - y) };
    let mut shift = 11 - y;
    while n > 15 {
        n /= 2;
        shift -= 1;
    }
    debug_assert!(n * max_magnitude <= 255 << shift);
    ScaleFactor::new(n as u8, shift as u8)
}

/// Computes the downscale factor for a maximum Winograd-domain magnitude.
///
/// Magnitudes of at most 255 need no scaling and return the sentinel. The
/// produced factor is the largest `n / 2^shift` on the grid that keeps
/// `factor * max_magnitude <= 255` exactly.
pub fn compute_scale_factor(max_magnitude: i64) -> Result<ScaleFactor> {
    scale_factor_bounded(max_magnitude, MAX_SCALABLE_MAGNITUDE)
}

/// [`compute_scale_factor`] with the bound extended to the complex
/// algorithm's corner positions (up to 16 * 255); the rest of the scheme is
/// unchanged.
pub fn compute_scale_factor_wide(max_magnitude: i64) -> Result<ScaleFactor> {
    scale_factor_bounded(max_magnitude, MAX_SCALABLE_MAGNITUDE_WIDE)
}

/// The `t x t` grid of per-position factors shared across channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaleGrid {
    t: usize,
    factors: Vec<ScaleFactor>,
}

impl ScaleGrid {
    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> ScaleFactor {
        self.factors[r * self.t + c]
    }

    pub fn iter(&self) -> impl Iterator<Item = ScaleFactor> + '_ {
        self.factors.iter().copied()
    }
}

/// Computes one factor per X-Y position of a Winograd-domain filter stack
/// (all input channels of one output channel), from the per-position maximum
/// magnitude across channels. Complex entries use `max(|re|, |im|)`.
/// Positions that are zero in every channel get the sentinel.
pub fn scale_factors_for_filter(stack: &[GaussMat]) -> Result<ScaleGrid> {
    let first = stack.first().ok_or(Error::EmptyPopulation)?;
    let t = first.rows();
    let mut factors = Vec::with_capacity(t * t);
    for r in 0..t {
        for c in 0..t {
            let mut max_mag = 0i64;
            for w in stack {
                max_mag = max_mag.max(w.at(r, c).component_magnitude());
            }
            let f = if max_mag == 0 {
                ScaleFactor::NONE
            } else {
                compute_scale_factor_wide(max_mag)?
            };
            factors.push(f);
        }
    }
    Ok(ScaleGrid { t, factors })
}

/// Downscales a filter stack position-wise; re and im parts independently.
/// Every scaled value is checked back into [-255, 255].
pub fn apply_scaling(stack: &[GaussMat], factors: &ScaleGrid) -> Result<Vec<GaussMat>> {
    let t = factors.t;
    stack
        .iter()
        .map(|w| {
            let mut out = GaussMat::zeros(t, t);
            for r in 0..t {
                for c in 0..t {
                    let f = factors.at(r, c);
                    let v = w.at(r, c);
                    let s = GaussInt::new(f.apply(v.re), f.apply(v.im));
                    if s.component_magnitude() > 255 {
                        return Err(Error::ValueOutOfRange(format!(
                            "scaled weight {s} at ({r},{c}) exceeds int9"
                        )));
                    }
                    out.set(r, c, s);
                }
            }
            Ok(out)
        })
        .collect()
}

/// Finds the closest `m / 2^q` approximation of the factor's reciprocal with
/// `m <= 255`: the largest `q` in [4, 7] such that `round(2^(q+shift) / n)`
/// still fits 8 bits.
///
/// Factors computed for magnitudes up to 2295 always fit (q = 4 gives
/// m <= 146). The extension factor `8/128` has reciprocal exactly 16, one
/// past the 8-bit grid; it clamps to `255/16`, 0.39% under the true
/// reciprocal.
pub fn reverse_factor(f: &ScaleFactor) -> Result<InverseFactor> {
    if f.is_none() {
        return Err(Error::ValueOutOfRange(
            "the no-scaling sentinel has no reverse factor".into(),
        ));
    }
    for q in (4..=7u32).rev() {
        let m = round_div_away(1i64 << (q + f.shift as u32), f.n as i64);
        if m <= 255 {
            return Ok(InverseFactor {
                m: m as u8,
                q: q as u8,
            });
        }
    }
    Ok(InverseFactor { m: 255, q: 4 })
}

/// Reverses the scaling on a channel-accumulated value:
/// round-half-away of `acc * m / 2^q`.
#[inline]
pub fn apply_reverse(acc_value: i64, inv: &InverseFactor) -> i64 {
    round_shift_away(acc_value * inv.m as i64, inv.q as u32)
}

/// One cell of the downscale-factor table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTableEntry {
    pub n: u8,
    /// Stored exponent p; the actual shift is p + 4.
    pub p: u8,
    /// `n / 2^(p+4)` rounded half away from zero to 5 decimals.
    pub value: String,
    /// Below the `14/128` floor ever produced by the factor computation.
    pub out_of_range: bool,
    /// The same value exists at a smaller stored p (even mantissa).
    pub duplicate: bool,
}

/// Enumerates all 60 table cells `n in [1,15] x p in [0,3]` with their
/// 5-decimal values and out-of-range/duplicate flags.
pub fn scale_table() -> Vec<ScaleTableEntry> {
    let mut rows = Vec::with_capacity(60);
    for n in 1u8..=15 {
        for p in 0u8..=3 {
            let shift = p + 4;
            let v5 = round_div_away(n as i64 * 100_000, 1i64 << shift);
            // value < 14/128  <=>  n * 2^(7-shift) < 14
            let out_of_range = (n as i64) << (7 - shift) < MIN_FACTOR_N128;
            let duplicate = p > 0 && n % 2 == 0;
            rows.push(ScaleTableEntry {
                n,
                p,
                value: format!("0.{v5:05}"),
                out_of_range,
                duplicate,
            });
        }
    }
    rows
}

/// One weight's trip through downscale and reverse scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub weight: i64,
    pub n: u8,
    pub shift: u8,
    pub down: i64,
    pub up: i64,
    pub num_err: i64,
    pub prop_err: f64,
}

/// Static error statistics over a weight population.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub records: Vec<ErrorRecord>,
    pub mean_numerical: f64,
    pub mean_proportional: f64,
}

/// Sweeps a population of scalable magnitudes through downscale,
/// single-channel identity accumulation, and reverse scale, recording the
/// numerical and proportional recovery errors.
pub fn static_error_sweep(population: impl IntoIterator<Item = i64>) -> Result<ErrorReport> {
    let mut records = Vec::new();
    let mut sum_num = 0.0;
    let mut sum_prop = 0.0;
    for weight in population {
        if !(256..=MAX_SCALABLE_MAGNITUDE).contains(&weight) {
            return Err(Error::ValueOutOfRange(format!(
                "sweep weight {weight} outside the scalable range [256, {MAX_SCALABLE_MAGNITUDE}]"
            )));
        }
        let f = compute_scale_factor(weight)?;
        let down = f.apply(weight);
        let inv = reverse_factor(&f)?;
        let up = apply_reverse(down, &inv);
        let num_err = (up - weight).abs();
        let prop_err = num_err as f64 / weight as f64;
        sum_num += num_err as f64;
        sum_prop += prop_err;
        records.push(ErrorRecord {
            weight,
            n: f.n(),
            shift: f.shift(),
            down,
            up,
            num_err,
            prop_err,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let count = records.len() as f64;
    Ok(ErrorReport {
        records,
        mean_numerical: sum_num / count,
        mean_proportional: sum_prop / count,
    })
}

/// Writes the sweep as CSV with a trailing `#mean,` summary row.
pub fn write_error_csv(report: &ErrorReport, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "weight,n,shift,down,up,num_err,prop_err")?;
    for r in &report.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6}",
            r.weight, r.n, r.shift, r.down, r.up, r.num_err, r.prop_err
        )?;
    }
    writeln!(
        out,
        "#mean,,,,,{:.4},{:.6}",
        report.mean_numerical, report.mean_proportional
    )?;
    Ok(())
}

/// Relative bit-width reduction when `from_bits` values shrink to `to_bits`.
pub fn bitwidth_reduction(from_bits: u32, to_bits: u32) -> f64 {
    1.0 - to_bits as f64 / from_bits as f64
}
