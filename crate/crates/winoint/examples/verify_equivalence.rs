//! Bit-exactness of every Winograd engine against the direct method.
//!
//! With scaling disabled the tiled pipelines are pure integer arithmetic and
//! must reproduce the direct convolution exactly, element for element, on
//! any quantized input. Run with:
//!
//! ```text
//! cargo run -p winoint --example verify_equivalence
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use winoint::{
    algorithm, compare, direct_conv, winograd_conv, AlgorithmId, ConvAlgorithm, ConvSpec, QTensor,
    Shape,
};

fn main() {
    let trials = 200;
    for id in AlgorithmId::ALL {
        let tile = algorithm(id).t;
        let mut exact = 0;
        for i in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let padding = rng.gen_range(0..=1usize);
            let min_side = tile.saturating_sub(2 * padding).max(4);
            let h = rng.gen_range(min_side..=16);
            let w = rng.gen_range(min_side..=16);
            let cin = rng.gen_range(1..=8usize);
            let k = rng.gen_range(1..=8usize);

            let ishape = Shape::new(1, h, w, cin);
            let ifm = QTensor::from_u8(
                ishape,
                rng.gen(),
                1.0,
                (0..ishape.len()).map(|_| rng.gen()).collect(),
            )
            .unwrap();
            let fshape = Shape::new(k, 3, 3, cin);
            let filters = QTensor::from_u8(
                fshape,
                rng.gen(),
                1.0,
                (0..fshape.len()).map(|_| rng.gen()).collect(),
            )
            .unwrap();

            let spec = ConvSpec {
                algorithm: ConvAlgorithm::Winograd(id),
                padding,
                scaling_enabled: false,
                in_channels: cin,
                out_channels: k,
            };
            let direct_spec = ConvSpec {
                algorithm: ConvAlgorithm::Direct,
                ..spec
            };
            let d = direct_conv(&ifm, &filters, &direct_spec).unwrap();
            let w = winograd_conv(&ifm, &filters, &spec).unwrap();
            let report = compare(&w, &d).unwrap();
            if report.identical() {
                exact += 1;
            } else {
                println!(
                    "  {id} trial {i}: {} differing elements, max abs {}",
                    report.differing, report.max_abs
                );
            }
        }
        println!("{id}: {exact}/{trials} random layers bit-exact");
    }
}
