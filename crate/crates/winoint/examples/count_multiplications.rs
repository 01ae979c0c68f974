//! General-multiplication accounting for the three algorithms.
//!
//! Each output tile of a 3x3 convolution takes `m^2 * 9` multiplications the
//! direct way. The Winograd form spends them only in the element-wise product
//! of the transformed grids: 16 for the 4x4 grid, 36 for the rational 6x6
//! grid, and 46 for the complex 6x6 grid (16 rational positions plus 10
//! conjugate pairs at 3 each). Run with:
//!
//! ```text
//! cargo run -p winoint --example count_multiplications
//! ```

use winoint::{algorithm, efficiency_gain, reduction_ratio, worst_case_ranges, AlgorithmId, Ratio};

fn main() {
    for id in AlgorithmId::ALL {
        let a = algorithm(id);
        let red = reduction_ratio(a);
        println!(
            "{id}: {} general muls per tile per channel, direct needs {}, reduction {red} = {:.2}x",
            a.layout.muls_per_tile(),
            red.num,
            red.to_f64(),
        );
        println!(
            "    layout: {} rational positions + {} conjugate pairs",
            a.layout.rational_positions().len(),
            a.layout.pair_positions().len(),
        );
    }

    // weigh each reduction by its Winograd-domain multiplier width:
    // 8-bit spatial weights plus the algorithm's widening bits
    let bits = |id| 8 + worst_case_ranges(algorithm(id), 255).widening_bits;
    let cplx_red = Ratio::new(313, 100); // the two-decimal reduction figure
    let g4 = efficiency_gain(
        cplx_red,
        bits(AlgorithmId::Cplx4x4),
        Ratio::new(4, 1),
        bits(AlgorithmId::Rat4x4),
    );
    let g2 = efficiency_gain(
        cplx_red,
        bits(AlgorithmId::Cplx4x4),
        Ratio::new(9, 4),
        bits(AlgorithmId::Rat2x2),
    );
    println!(
        "cplx4x4 ({}b) vs rat4x4 ({}b): {:+.2}% efficiency per multiplier bit",
        bits(AlgorithmId::Cplx4x4),
        bits(AlgorithmId::Rat4x4),
        g4 * 100.0
    );
    println!(
        "cplx4x4 ({}b) vs rat2x2 ({}b): {:+.2}%",
        bits(AlgorithmId::Cplx4x4),
        bits(AlgorithmId::Rat2x2),
        g2 * 100.0
    );
}
