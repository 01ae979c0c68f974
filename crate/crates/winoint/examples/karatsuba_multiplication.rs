//! Gaussian-integer products with exact multiplication accounting.
//!
//! A complex product naively costs four real multiplications; the Karatsuba
//! form reuses `x.re*y.re` and `x.im*y.im` to get by with three. For a
//! conjugate pair only one product is computed at all — the mirror is a free
//! conjugation. Run with:
//!
//! ```text
//! cargo run -p winoint --example karatsuba_multiplication
//! ```

use winoint::{
    gmul_conjugate_pair, gmul_karatsuba, karatsuba_accumulate, GaussInt, KaratsubaPartial,
    MulCounter,
};

fn main() {
    let mut counter = MulCounter::new();

    let x = GaussInt::new(3, 2);
    let y = GaussInt::new(1, 4);
    let z = gmul_karatsuba(x, y, &mut counter);
    println!(
        "({x}) * ({y}) = {z}   [{} general muls]",
        counter.general_muls
    );

    // rational operands take the plain single-multiplication path
    let mut c = MulCounter::new();
    let z = gmul_karatsuba(GaussInt::real(21), GaussInt::real(-2), &mut c);
    println!("21 * -2 = {z}   [{} general mul]", c.general_muls);

    // one complex product serves both halves of a conjugate pair
    let mut c = MulCounter::new();
    let (p, q) = gmul_conjugate_pair(x, y, &mut c);
    println!(
        "pair ({x})*({y}) -> {p} and conj {q}   [{} general muls for both]",
        c.general_muls
    );

    // channel sums can stay in the three-term Karatsuba format and combine once
    let mut c = MulCounter::new();
    let mut acc = KaratsubaPartial::default();
    let products = [
        (GaussInt::new(1, 1), GaussInt::new(1, 1)),
        (GaussInt::new(1, -1), GaussInt::new(1, -1)),
        (GaussInt::new(5, -3), GaussInt::new(-2, 7)),
    ];
    for (a, b) in products {
        karatsuba_accumulate(&mut acc, a, b, &mut c);
    }
    println!(
        "sum of {} products = {}   [{} general muls, combined once at the end]",
        products.len(),
        acc.combine(),
        c.general_muls
    );
}
