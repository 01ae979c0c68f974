//! Wall-clock comparison of the engines on one synthetic layer.
//!
//! The interesting figure is the general-multiplication count; the timing
//! depends on this host and on the fact that these are scalar reference
//! kernels. Run with:
//!
//! ```text
//! cargo run --release -p winoint --example bench_layers
//! ```

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use winoint::{convolve, AlgorithmId, ConvAlgorithm, ConvSpec, QTensor, Shape};

fn main() -> winoint::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let ishape = Shape::new(1, 56, 56, 16);
    let out_channels = 16;
    let ifm = QTensor::from_u8(
        ishape,
        rng.gen(),
        1.0,
        (0..ishape.len()).map(|_| rng.gen()).collect(),
    )?;
    let fshape = Shape::new(out_channels, 3, 3, ishape.c);
    let filters = QTensor::from_u8(
        fshape,
        rng.gen(),
        1.0,
        (0..fshape.len()).map(|_| rng.gen()).collect(),
    )?;
    println!(
        "layer {:?} -> {out_channels} channels, padding 1",
        ishape.dims()
    );

    let algorithms = [
        ("direct", ConvAlgorithm::Direct),
        ("rat2x2", ConvAlgorithm::Winograd(AlgorithmId::Rat2x2)),
        ("rat4x4", ConvAlgorithm::Winograd(AlgorithmId::Rat4x4)),
        ("cplx4x4", ConvAlgorithm::Winograd(AlgorithmId::Cplx4x4)),
    ];
    let mut reference = None;
    for (name, algorithm) in algorithms {
        let spec = ConvSpec {
            algorithm,
            padding: 1,
            scaling_enabled: false,
            in_channels: ishape.c,
            out_channels,
        };
        let mut best = f64::INFINITY;
        let mut result = None;
        for _ in 0..3 {
            let t0 = Instant::now();
            let r = convolve(&ifm, &filters, &spec)?;
            best = best.min(t0.elapsed().as_secs_f64());
            result = Some(r);
        }
        let r = result.unwrap();
        match &reference {
            None => reference = Some(r.ofm.clone()),
            Some(ofm) => assert_eq!(&r.ofm, ofm, "{name} diverged from direct"),
        }
        println!(
            "{name:>8}: {:>9} general muls (reduction {:.2}x)  best {:>7.2} ms  {:>6.1} M muls/s",
            r.stats.general_muls,
            r.stats.reduction(),
            best * 1e3,
            r.stats.general_muls as f64 / best / 1e6
        );
    }
    Ok(())
}
