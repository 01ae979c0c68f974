//! Structured element-wise multiplication of transformed filters and
//! activations, with channel accumulation kept in Karatsuba format.
//!
//! Rational grid positions cost one general multiplication per channel; each
//! conjugate pair costs three (one Karatsuba complex product), with the
//! mirror position's product implied by conjugation. Only the primary
//! position of each pair carries state; the mirror is materialized in
//! [`finalize`].

use crate::error::{Error, Result};
use crate::gauss::{
    gmul_karatsuba, karatsuba_accumulate, GaussInt, GaussMat, KaratsubaPartial, MulCounter,
};
use crate::transform::WinoAlgorithm;

/// Per-tile, per-output-channel accumulator over input channels.
#[derive(Debug, Clone)]
pub struct HadamardAccumulator {
    t: usize,
    rational_acc: Vec<i64>,
    pair_acc: Vec<KaratsubaPartial>,
    channels_seen: usize,
}

impl HadamardAccumulator {
    pub fn new(a: &WinoAlgorithm) -> Self {
        HadamardAccumulator {
            t: a.t,
            rational_acc: vec![0; a.layout.rational_positions().len()],
            pair_acc: vec![KaratsubaPartial::default(); a.layout.pair_positions().len()],
            channels_seen: 0,
        }
    }

    pub fn channels_seen(&self) -> usize {
        self.channels_seen
    }
}

/// Accumulates one channel's Hadamard product `W (.) D` into `acc`.
///
/// Both inputs must conform to the algorithm's conjugate layout. The counter
/// advances by exactly `layout.muls_per_tile()` regardless of values.
pub fn hadamard_accumulate(
    acc: &mut HadamardAccumulator,
    w: &GaussMat,
    d: &GaussMat,
    a: &WinoAlgorithm,
    c: &mut MulCounter,
) -> Result<()> {
    if acc.t != a.t {
        return Err(Error::ShapeMismatch(
            "accumulator was built for a different tile size".into(),
        ));
    }
    a.layout.check(w)?;
    a.layout.check(d)?;
    for (slot, &(r, col)) in acc
        .rational_acc
        .iter_mut()
        .zip(a.layout.rational_positions())
    {
        let p = gmul_karatsuba(w.at(r, col), d.at(r, col), c);
        debug_assert!(p.is_rational());
        *slot = slot
            .checked_add(p.re)
            .expect("i64 overflow in hadamard accumulation");
    }
    for (slot, &((r, col), _)) in acc.pair_acc.iter_mut().zip(a.layout.pair_positions()) {
        karatsuba_accumulate(slot, w.at(r, col), d.at(r, col), c);
    }
    acc.channels_seen += 1;
    Ok(())
}

/// Combines each pair's Karatsuba partial once and materializes the mirror
/// positions, yielding the layout-conforming accumulated grid.
pub fn finalize(acc: &HadamardAccumulator, a: &WinoAlgorithm) -> Result<GaussMat> {
    if acc.channels_seen == 0 {
        return Err(Error::EmptyAccumulator);
    }
    let mut m = GaussMat::zeros(a.t, a.t);
    for (&v, &(r, c)) in acc.rational_acc.iter().zip(a.layout.rational_positions()) {
        m.set(r, c, GaussInt::real(v));
    }
    for (partial, &((pr, pc), (mr, mc))) in acc.pair_acc.iter().zip(a.layout.pair_positions()) {
        let v = partial.combine();
        m.set(pr, pc, v);
        m.set(mr, mc, v.conj());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{algorithm, AlgorithmId};
    use rand::{Rng, SeedableRng};

    fn random_conforming(a: &WinoAlgorithm, rng: &mut impl Rng) -> GaussMat {
        let mut m = GaussMat::zeros(a.t, a.t);
        for &(r, c) in a.layout.rational_positions() {
            m.set(r, c, GaussInt::real(rng.gen_range(-2000..=2000)));
        }
        for &((pr, pc), (mr, mc)) in a.layout.pair_positions() {
            let v = GaussInt::new(rng.gen_range(-2000..=2000), rng.gen_range(-2000..=2000));
            m.set(pr, pc, v);
            m.set(mr, mc, v.conj());
        }
        m
    }

    /// Naive sum of per-element complex products over all channels.
    fn naive_hadamard_sum(ws: &[GaussMat], ds: &[GaussMat], t: usize) -> GaussMat {
        GaussMat::from_fn(t, t, |i, j| {
            let mut acc = GaussInt::ZERO;
            for (w, d) in ws.iter().zip(ds) {
                acc = acc + w.at(i, j).const_mul(d.at(i, j));
            }
            acc
        })
    }

    #[test]
    fn counter_advances_by_exact_totals() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for (id, per_tile) in [
            (AlgorithmId::Rat2x2, 16),
            (AlgorithmId::Rat4x4, 36),
            (AlgorithmId::Cplx4x4, 46),
        ] {
            let a = algorithm(id);
            let mut acc = HadamardAccumulator::new(a);
            let mut c = MulCounter::new();
            for k in 1..=5u64 {
                let w = random_conforming(a, &mut rng);
                let d = random_conforming(a, &mut rng);
                hadamard_accumulate(&mut acc, &w, &d, a, &mut c).unwrap();
                assert_eq!(c.general_muls, k * per_tile);
            }
        }
    }

    #[test]
    fn zero_filter_leaves_value_but_advances_counter() {
        let a = algorithm(AlgorithmId::Cplx4x4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut acc = HadamardAccumulator::new(a);
        let mut c = MulCounter::new();
        let w = GaussMat::zeros(6, 6);
        let d = random_conforming(a, &mut rng);
        hadamard_accumulate(&mut acc, &w, &d, a, &mut c).unwrap();
        assert_eq!(c.general_muls, 46);
        let m = finalize(&acc, a).unwrap();
        assert!(m.iter().all(|v| v == GaussInt::ZERO));
    }

    #[test]
    fn identity_filter_passes_activation_through() {
        let a = algorithm(AlgorithmId::Cplx4x4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let ones = GaussMat::from_fn(6, 6, |_, _| GaussInt::ONE);
        let d = random_conforming(a, &mut rng);
        let mut acc = HadamardAccumulator::new(a);
        let mut c = MulCounter::new();
        hadamard_accumulate(&mut acc, &ones, &d, a, &mut c).unwrap();
        assert_eq!(finalize(&acc, a).unwrap(), d);
    }

    #[test]
    fn opposite_filters_cancel() {
        let a = algorithm(AlgorithmId::Cplx4x4);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let w = random_conforming(a, &mut rng);
        let neg_w = GaussMat::from_fn(6, 6, |i, j| -w.at(i, j));
        let d = random_conforming(a, &mut rng);
        let mut acc = HadamardAccumulator::new(a);
        let mut c = MulCounter::new();
        hadamard_accumulate(&mut acc, &w, &d, a, &mut c).unwrap();
        hadamard_accumulate(&mut acc, &neg_w, &d, a, &mut c).unwrap();
        let m = finalize(&acc, a).unwrap();
        assert!(m.iter().all(|v| v == GaussInt::ZERO));
    }

    #[test]
    fn multichannel_accumulation_matches_naive_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for id in AlgorithmId::ALL {
            let a = algorithm(id);
            let ws: Vec<_> = (0..8).map(|_| random_conforming(a, &mut rng)).collect();
            let ds: Vec<_> = (0..8).map(|_| random_conforming(a, &mut rng)).collect();
            let mut acc = HadamardAccumulator::new(a);
            let mut c = MulCounter::new();
            for (w, d) in ws.iter().zip(&ds) {
                hadamard_accumulate(&mut acc, w, d, a, &mut c).unwrap();
            }
            let m = finalize(&acc, a).unwrap();
            assert_eq!(m, naive_hadamard_sum(&ws, &ds, a.t));
            a.layout.check(&m).unwrap();
            assert_eq!(c.general_muls, 8 * a.layout.muls_per_tile());
        }
    }

    #[test]
    fn layout_violation_is_rejected() {
        let a = algorithm(AlgorithmId::Cplx4x4);
        let mut bad = GaussMat::zeros(6, 6);
        bad.set(0, 0, GaussInt::I); // rational position with imaginary part
        let d = GaussMat::zeros(6, 6);
        let mut acc = HadamardAccumulator::new(a);
        let mut c = MulCounter::new();
        assert!(matches!(
            hadamard_accumulate(&mut acc, &bad, &d, a, &mut c),
            Err(Error::LayoutViolation(_))
        ));
    }

    #[test]
    fn finalize_on_empty_accumulator_fails() {
        let a = algorithm(AlgorithmId::Rat2x2);
        let acc = HadamardAccumulator::new(a);
        assert!(matches!(finalize(&acc, a), Err(Error::EmptyAccumulator)));
    }
}
