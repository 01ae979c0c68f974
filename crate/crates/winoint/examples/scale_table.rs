//! The downscale-factor grid `n / 2^(p+4)` for Winograd-domain filters.
//!
//! Factors below 14/128 are never produced (no scalable magnitude needs
//! them) and print bracketed; `*` marks values that also exist at a smaller
//! stored p. Run with:
//!
//! ```text
//! cargo run -p winoint --example scale_table
//! ```

use winoint::scale_table;

fn main() {
    println!("  n     p=0        p=1        p=2        p=3");
    let table = scale_table();
    for n in 1u8..=15 {
        let mut cells = Vec::new();
        for p in 0u8..=3 {
            let e = table.iter().find(|e| e.n == n && e.p == p).unwrap();
            let marker = if e.duplicate { "*" } else { " " };
            if e.out_of_range {
                cells.push(format!("[{}]{marker}", e.value));
            } else {
                cells.push(format!(" {} {marker}", e.value));
            }
        }
        println!(" {n:>2}  {}", cells.join(" "));
    }
    println!("\n[..] out of range (below 14/128)   * duplicated at a smaller p");
}
