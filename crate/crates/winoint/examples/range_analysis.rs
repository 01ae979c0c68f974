//! Worst-case Winograd-domain filter magnitudes and bit widths.
//!
//! Zero-point-adjusted int9 weights grow when multiplied through the
//! integer-scaled filter transform; this prints how far, per grid position,
//! and the widening each algorithm imposes on its multipliers. Run with:
//!
//! ```text
//! cargo run -p winoint --example range_analysis
//! ```

use winoint::{algorithm, worst_case_ranges, AlgorithmId};

fn main() {
    for id in AlgorithmId::ALL {
        let rep = worst_case_ranges(algorithm(id), 255);
        println!("{id} (int9 weights, bound 255):");
        println!("  worst-case magnitudes:");
        for row in &rep.magnitude {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>6}")).collect();
            println!("    {}", cells.join(" "));
        }
        println!("  signed bit widths:");
        for row in &rep.bits {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            println!("    {}", cells.join(" "));
        }
        println!("  max magnitude {} -> {} bits signed", rep.max_magnitude, {
            rep.bits.iter().flatten().max().unwrap()
        });
        println!(
            "  widening over the fractional transform: {} bits\n",
            rep.widening_bits
        );
    }
}
