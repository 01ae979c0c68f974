//! Gaussian-integer arithmetic and Karatsuba complex multiplication.
//!
//! All Winograd-domain values live in Z[i], represented as [`GaussInt`] with
//! 64-bit parts. Arithmetic is checked: overflow of the working width panics
//! instead of wrapping, so a violated range assumption surfaces as a fault.
//!
//! General multiplications (data x data products, as opposed to products with
//! small transform constants) are tallied in an explicit [`MulCounter`] that
//! callers thread through, so counts stay exact under any execution order.

use std::fmt;
use std::ops::{Add, Neg, Sub};

#[inline]
fn cadd(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("i64 overflow in complex add")
}

#[inline]
fn csub(a: i64, b: i64) -> i64 {
    a.checked_sub(b).expect("i64 overflow in complex sub")
}

#[inline]
fn cmul(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("i64 overflow in complex mul")
}

/// A Gaussian integer `re + im*i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };
    pub const ONE: GaussInt = GaussInt { re: 1, im: 0 };
    /// The imaginary unit.
    pub const I: GaussInt = GaussInt { re: 0, im: 1 };

    #[inline]
    pub const fn new(re: i64, im: i64) -> Self {
        GaussInt { re, im }
    }

    /// Embeds a plain integer.
    #[inline]
    pub const fn real(re: i64) -> Self {
        GaussInt { re, im: 0 }
    }

    /// Complex conjugate.
    #[inline]
    pub const fn conj(self) -> Self {
        GaussInt {
            re: self.re,
            im: -self.im,
        }
    }

    /// True when the value lies in Q embedded in C (zero imaginary part).
    #[inline]
    pub const fn is_rational(self) -> bool {
        self.im == 0
    }

    /// max(|re|, |im|); the magnitude used by the scale-factor scheme.
    #[inline]
    pub fn component_magnitude(self) -> i64 {
        self.re.abs().max(self.im.abs())
    }

    /// Exact complex product without any counting; used for applying
    /// transform-matrix constants (never a general multiplication).
    #[inline]
    pub fn const_mul(self, rhs: GaussInt) -> GaussInt {
        GaussInt {
            re: csub(cmul(self.re, rhs.re), cmul(self.im, rhs.im)),
            im: cadd(cmul(self.re, rhs.im), cmul(self.im, rhs.re)),
        }
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    #[inline]
    fn add(self, rhs: GaussInt) -> GaussInt {
        GaussInt {
            re: cadd(self.re, rhs.re),
            im: cadd(self.im, rhs.im),
        }
    }
}

impl Sub for GaussInt {
    type Output = GaussInt;
    #[inline]
    fn sub(self, rhs: GaussInt) -> GaussInt {
        GaussInt {
            re: csub(self.re, rhs.re),
            im: csub(self.im, rhs.im),
        }
    }
}

impl Neg for GaussInt {
    type Output = GaussInt;
    #[inline]
    fn neg(self) -> GaussInt {
        GaussInt {
            re: self.re.checked_neg().expect("i64 overflow in neg"),
            im: self.im.checked_neg().expect("i64 overflow in neg"),
        }
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im == 0 {
            write!(f, "{}", self.re)
        } else if self.im < 0 {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Tally of general multiplications (and additions, informationally).
///
/// Counters are passed explicitly and merged at join points rather than held
/// in shared state, so totals are exact under any parallel schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MulCounter {
    pub general_muls: u64,
    pub additions: u64,
}

impl MulCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn count_muls(&mut self, n: u64) {
        self.general_muls += n;
    }

    #[inline]
    pub fn count_adds(&mut self, n: u64) {
        self.additions += n;
    }

    /// Folds another worker's counter into this one.
    pub fn merge(&mut self, other: &MulCounter) {
        self.general_muls += other.general_muls;
        self.additions += other.additions;
    }
}

/// The three partial products of one Karatsuba complex multiplication,
/// kept un-combined so sums over channels can defer the recombination.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KaratsubaPartial {
    /// x.re * y.re
    pub p0: i64,
    /// x.im * y.im
    pub p1: i64,
    /// (x.re + x.im) * (y.re + y.im)
    pub p2: i64,
}

impl KaratsubaPartial {
    /// Recombines into the exact complex product:
    /// `(p0 - p1) + (p2 - p1 - p0) i`.
    #[inline]
    pub fn combine(self) -> GaussInt {
        GaussInt {
            re: csub(self.p0, self.p1),
            im: csub(csub(self.p2, self.p1), self.p0),
        }
    }
}

/// Complex product via Karatsuba: three general multiplications, or a single
/// one when both operands are rational (plain product path).
pub fn gmul_karatsuba(x: GaussInt, y: GaussInt, c: &mut MulCounter) -> GaussInt {
    if x.is_rational() && y.is_rational() {
        c.count_muls(1);
        return GaussInt::real(cmul(x.re, y.re));
    }
    let p = karatsuba_terms(x, y, c);
    p.combine()
}

/// Products of a conjugate pair: computes `x*y` once with three general
/// multiplications and derives the mirror `conj(x)*conj(y) = conj(x*y)` free.
pub fn gmul_conjugate_pair(x: GaussInt, y: GaussInt, c: &mut MulCounter) -> (GaussInt, GaussInt) {
    let z = karatsuba_terms(x, y, c).combine();
    (z, z.conj())
}

/// Adds the three Karatsuba terms of `x*y` into `acc` (three general
/// multiplications). Combining the accumulated partial after `k` calls equals
/// the sum of the `k` exact complex products.
pub fn karatsuba_accumulate(
    acc: &mut KaratsubaPartial,
    x: GaussInt,
    y: GaussInt,
    c: &mut MulCounter,
) {
    let p = karatsuba_terms(x, y, c);
    acc.p0 = cadd(acc.p0, p.p0);
    acc.p1 = cadd(acc.p1, p.p1);
    acc.p2 = cadd(acc.p2, p.p2);
}

#[inline]
fn karatsuba_terms(x: GaussInt, y: GaussInt, c: &mut MulCounter) -> KaratsubaPartial {
    c.count_muls(3);
    c.count_adds(2);
    KaratsubaPartial {
        p0: cmul(x.re, y.re),
        p1: cmul(x.im, y.im),
        p2: cmul(cadd(x.re, x.im), cadd(y.re, y.im)),
    }
}

/// A small dense matrix over Gaussian integers (row major).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussMat {
    rows: usize,
    cols: usize,
    data: Vec<GaussInt>,
}

impl GaussMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        GaussMat {
            rows,
            cols,
            data: vec![GaussInt::ZERO; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> GaussInt) -> Self {
        let mut m = GaussMat::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix of plain integers.
    pub fn from_real_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        GaussMat::from_fn(r, c, |i, j| GaussInt::real(rows[i][j]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> GaussInt {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: GaussInt) {
        self.data[r * self.cols + c] = v;
    }

    /// Plain matrix product using constant (uncounted) complex arithmetic.
    pub fn mul(&self, rhs: &GaussMat) -> GaussMat {
        assert_eq!(self.cols, rhs.rows, "matrix dimension mismatch");
        GaussMat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = GaussInt::ZERO;
            for k in 0..self.cols {
                acc = acc + self.at(i, k).const_mul(rhs.at(k, j));
            }
            acc
        })
    }

    pub fn transpose(&self) -> GaussMat {
        GaussMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn iter(&self) -> impl Iterator<Item = GaussInt> + '_ {
        self.data.iter().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent 4-multiplication schoolbook complex product.
    fn schoolbook(x: GaussInt, y: GaussInt) -> GaussInt {
        GaussInt::new(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re)
    }

    #[test]
    fn rational_product_counts_one_mul() {
        let mut c = MulCounter::new();
        let z = gmul_karatsuba(GaussInt::real(1), GaussInt::real(5), &mut c);
        assert_eq!(z, GaussInt::real(5));
        assert_eq!(c.general_muls, 1);
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let mut c = MulCounter::new();
        assert_eq!(
            gmul_karatsuba(GaussInt::I, GaussInt::I, &mut c),
            GaussInt::real(-1)
        );
        assert_eq!(c.general_muls, 3);
    }

    #[test]
    fn karatsuba_matches_schoolbook_example() {
        let x = GaussInt::new(3, 2);
        let y = GaussInt::new(1, 4);
        let mut c = MulCounter::new();
        let z = gmul_karatsuba(x, y, &mut c);
        assert_eq!(z, schoolbook(x, y));
        assert_eq!(z, GaussInt::new(-5, 14));
    }

    #[test]
    fn conjugate_pair_examples() {
        let mut c = MulCounter::new();
        let (z, zc) = gmul_conjugate_pair(GaussInt::new(1, 1), GaussInt::new(1, -1), &mut c);
        assert_eq!((z, zc), (GaussInt::real(2), GaussInt::real(2)));
        assert_eq!(c.general_muls, 3);

        // zero annihilates but the pair still spends its three multiplications
        let mut c = MulCounter::new();
        let (z, zc) = gmul_conjugate_pair(GaussInt::ZERO, GaussInt::new(7, -9), &mut c);
        assert_eq!((z, zc), (GaussInt::ZERO, GaussInt::ZERO));
        assert_eq!(c.general_muls, 3);

        let mut c = MulCounter::new();
        let (z, zc) = gmul_conjugate_pair(GaussInt::new(3, 2), GaussInt::new(1, 4), &mut c);
        assert_eq!(z, GaussInt::new(-5, 14));
        assert_eq!(zc, GaussInt::new(-5, -14));
    }

    #[test]
    fn accumulate_single_product_equals_gmul() {
        let x = GaussInt::new(-7, 3);
        let y = GaussInt::new(2, 11);
        let mut acc = KaratsubaPartial::default();
        let mut c = MulCounter::new();
        karatsuba_accumulate(&mut acc, x, y, &mut c);
        assert_eq!(acc.combine(), schoolbook(x, y));
        assert_eq!(c.general_muls, 3);
    }

    #[test]
    fn accumulate_cancelling_pair() {
        // (1+i)^2 + (1-i)^2 = 2i - 2i = 0
        let mut acc = KaratsubaPartial::default();
        let mut c = MulCounter::new();
        karatsuba_accumulate(&mut acc, GaussInt::new(1, 1), GaussInt::new(1, 1), &mut c);
        karatsuba_accumulate(&mut acc, GaussInt::new(1, -1), GaussInt::new(1, -1), &mut c);
        assert_eq!(acc.combine(), GaussInt::ZERO);
        assert_eq!(c.general_muls, 6);
    }

    #[test]
    fn karatsuba_matches_schoolbook_exhaustive_small() {
        let mut c = MulCounter::new();
        for xr in -4..=4 {
            for xi in -4..=4 {
                for yr in -4..=4 {
                    for yi in -4..=4 {
                        let x = GaussInt::new(xr, xi);
                        let y = GaussInt::new(yr, yi);
                        assert_eq!(gmul_karatsuba(x, y, &mut c), schoolbook(x, y));
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn karatsuba_matches_schoolbook(
            xr in -1_000_000i64..1_000_000,
            xi in -1_000_000i64..1_000_000,
            yr in -1_000_000i64..1_000_000,
            yi in -1_000_000i64..1_000_000,
        ) {
            let x = GaussInt::new(xr, xi);
            let y = GaussInt::new(yr, yi);
            let mut c = MulCounter::new();
            prop_assert_eq!(gmul_karatsuba(x, y, &mut c), schoolbook(x, y));
        }

        #[test]
        fn accumulated_combine_is_sum_of_products(
            pairs in proptest::collection::vec(
                (-5_000i64..5_000, -5_000i64..5_000, -5_000i64..5_000, -5_000i64..5_000),
                1..16,
            )
        ) {
            let mut acc = KaratsubaPartial::default();
            let mut c = MulCounter::new();
            let mut want = GaussInt::ZERO;
            for &(xr, xi, yr, yi) in &pairs {
                let x = GaussInt::new(xr, xi);
                let y = GaussInt::new(yr, yi);
                karatsuba_accumulate(&mut acc, x, y, &mut c);
                want = want + schoolbook(x, y);
            }
            prop_assert_eq!(acc.combine(), want);
            prop_assert_eq!(c.general_muls, 3 * pairs.len() as u64);
        }

        #[test]
        fn counting_is_exact(
            xr in -100i64..100, xi in -100i64..100,
            yr in -100i64..100, yi in -100i64..100,
        ) {
            let x = GaussInt::new(xr, xi);
            let y = GaussInt::new(yr, yi);
            let mut c = MulCounter::new();
            gmul_karatsuba(x, y, &mut c);
            let expected = if x.is_rational() && y.is_rational() { 1 } else { 3 };
            prop_assert_eq!(c.general_muls, expected);
        }
    }

    #[test]
    fn conj_is_involutive() {
        let x = GaussInt::new(5, -3);
        assert_eq!(x.conj().conj(), x);
    }
}
