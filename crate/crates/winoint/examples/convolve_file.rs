//! The QTF tensor-file workflow: store, convolve, reload.
//!
//! QTF files hold one JSON header line followed by raw little-endian data;
//! the same format carries uint8 feature maps and filters in, and the
//! signed-32 output feature map back out. Run with:
//!
//! ```text
//! cargo run -p winoint --example convolve_file
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use winoint::{
    convolve, load_qtf, store_qtf, AlgorithmId, ConvAlgorithm, ConvSpec, QTensor, Shape,
};

fn main() -> winoint::Result<()> {
    let dir = std::env::temp_dir().join("winoint_example");
    std::fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(42);

    let ishape = Shape::new(1, 12, 12, 4);
    let ifm = QTensor::from_u8(
        ishape,
        128,
        0.02,
        (0..ishape.len()).map(|_| rng.gen()).collect(),
    )?;
    let fshape = Shape::new(8, 3, 3, 4);
    let filters = QTensor::from_u8(
        fshape,
        131,
        0.005,
        (0..fshape.len()).map(|_| rng.gen()).collect(),
    )?;

    let ifm_path = dir.join("ifm.qtf");
    let flt_path = dir.join("filters.qtf");
    store_qtf(&ifm_path, &ifm)?;
    store_qtf(&flt_path, &filters)?;
    println!("stored {} and {}", ifm_path.display(), flt_path.display());

    let spec = ConvSpec {
        algorithm: ConvAlgorithm::Winograd(AlgorithmId::Cplx4x4),
        padding: 1,
        scaling_enabled: false,
        in_channels: 4,
        out_channels: 8,
    };
    let result = convolve(&load_qtf(&ifm_path)?, &load_qtf(&flt_path)?, &spec)?;
    println!(
        "convolved: OFM shape {:?}, {} tiles, {} general muls (direct {}, reduction {:.2}x)",
        result.ofm.shape.dims(),
        result.stats.tiles,
        result.stats.general_muls,
        result.stats.direct_muls,
        result.stats.reduction()
    );

    let ofm_path = dir.join("ofm.qtf");
    store_qtf(&ofm_path, &QTensor::from_itensor(&result.ofm))?;
    let reloaded = load_qtf(&ofm_path)?;
    println!(
        "OFM written to {} and reloaded: {} i32 accumulators, first four {:?}",
        ofm_path.display(),
        reloaded.shape.len(),
        &reloaded.as_i32()?[..4]
    );
    Ok(())
}
