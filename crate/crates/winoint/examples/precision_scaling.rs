//! One filter through the precision-scaling pipeline, step by step.
//!
//! A worst-case 3x3 filter transforms to 13-bit Winograd-domain values; the
//! per-position factors bring them back to int9 for the multipliers, and the
//! 8-bit reverse scaling recovers the accumulated products to within a
//! fraction of a percent. Run with:
//!
//! ```text
//! cargo run -p winoint --example precision_scaling
//! ```

use winoint::{
    algorithm, apply_reverse, apply_scaling, filter_transform, reverse_factor,
    scale_factors_for_filter, AlgorithmId,
};

fn main() {
    let a = algorithm(AlgorithmId::Rat2x2);
    let g = [[255i32, -255, 255], [-255, 255, -255], [255, -255, 255]];
    let w = filter_transform(&g, a).expect("weights are int9");

    println!("Winograd-domain filter (alternating-sign max weights):");
    for r in 0..4 {
        let row: Vec<String> = (0..4).map(|c| format!("{:>6}", w.at(r, c).re)).collect();
        println!("  {}", row.join(" "));
    }

    let stack = vec![w.clone()];
    let grid = scale_factors_for_filter(&stack).expect("non-empty stack");
    println!("\nper-position scale factors n/2^shift:");
    for r in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|c| {
                let f = grid.at(r, c);
                if f.is_none() {
                    "   none ".into()
                } else {
                    format!("{:>3}/{:<4}", f.n(), 1u32 << f.shift())
                }
            })
            .collect();
        println!("  {}", row.join(" "));
    }

    let scaled = apply_scaling(&stack, &grid).expect("factors fit");
    println!("\nscaled filter (back in int9):");
    for r in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|c| format!("{:>6}", scaled[0].at(r, c).re))
            .collect();
        println!("  {}", row.join(" "));
    }

    println!("\ndown/up round trip per position (single channel, unit activation):");
    for r in 0..4 {
        for c in 0..4 {
            let f = grid.at(r, c);
            if f.is_none() {
                continue;
            }
            let original = w.at(r, c).re;
            let down = scaled[0].at(r, c).re;
            let inv = reverse_factor(&f).expect("not the sentinel");
            let up = apply_reverse(down, &inv);
            println!(
                "  ({r},{c}): {original:>5} -> {down:>4} -> {up:>5}   error {:+} ({:.3}%)",
                up - original,
                100.0 * (up - original).abs() as f64 / original.abs() as f64
            );
        }
    }
}
