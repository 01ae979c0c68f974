//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use winoint::{
    algorithm, bitwidth_reduction, compare, compute_scale_factor, direct_conv, efficiency_gain,
    hadamard_accumulate, reduction_ratio, scale_table, static_error_sweep, winograd_conv,
    worst_case_ranges, AlgorithmId, ConvAlgorithm, ConvSpec, GaussMat, HadamardAccumulator,
    MulCounter, QTensor, Ratio, Shape,
};

fn criterion(n: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {n} ({name}): {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

/// Deterministic random layer sized so the algorithm's tile fits.
fn random_layer(seed: u64, tile_side: usize) -> (QTensor, QTensor, usize, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let padding = rng.gen_range(0..=1usize);
    let min_side = tile_side.saturating_sub(2 * padding).max(4);
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
    (ifm, filters, padding, cin, k)
}

#[test]
fn criterion_1_oracle_equivalence_lossless() {
    let start = std::time::Instant::now();
    const LAYERS_PER_ALGORITHM: u64 = 1000;
    let mut checked = 0u64;
    for id in AlgorithmId::ALL {
        let tile = algorithm(id).t;
        for i in 0..LAYERS_PER_ALGORITHM {
            let seed = 1000 + i;
            let (ifm, filters, padding, cin, k) = random_layer(seed, tile);
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
            if w.ofm != d.ofm {
                criterion(
                    1,
                    "oracle equivalence, lossless",
                    false,
                    &format!("{id} diverged from direct_conv on layer seed {seed}"),
                );
            }
            checked += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    criterion(
        1,
        "oracle equivalence, lossless",
        checked == 3 * LAYERS_PER_ALGORITHM && elapsed < 60.0,
        &format!("{checked} layer checks bit-exact across 3 algorithms in {elapsed:.1} s"),
    );
}

#[test]
fn criterion_2_multiplication_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = true;
    let mut details = Vec::new();
    for (id, want_muls, want_ratio) in [
        (AlgorithmId::Rat2x2, 16u64, "2.25"),
        (AlgorithmId::Rat4x4, 36, "4.00"),
        (AlgorithmId::Cplx4x4, 46, "3.13"),
    ] {
        let a = algorithm(id);
        // structural count per tile per channel
        let mut acc = HadamardAccumulator::new(a);
        let mut c = MulCounter::new();
        let w = GaussMat::zeros(a.t, a.t);
        hadamard_accumulate(&mut acc, &w, &w, a, &mut c).unwrap();
        ok &= c.general_muls == want_muls;
        // and through a whole layer
        let (ifm, filters, padding, cin, k) = random_layer(rng.gen(), a.t);
        let spec = ConvSpec {
            algorithm: ConvAlgorithm::Winograd(id),
            padding,
            scaling_enabled: false,
            in_channels: cin,
            out_channels: k,
        };
        let r = winograd_conv(&ifm, &filters, &spec).unwrap();
        ok &= r.stats.general_muls == r.stats.tiles * (cin * k) as u64 * want_muls;
        let printed = format!("{:.2}", reduction_ratio(a).to_f64());
        ok &= printed == want_ratio;
        details.push(format!(
            "{id}: {want_muls} muls/tile/channel, reduction {printed}"
        ));
    }
    criterion(2, "multiplication counts", ok, &details.join("; "));
}

#[test]
fn criterion_3_efficiency_gains() {
    // gains quoted against the two-decimal reduction figure 3.13
    let cplx = Ratio::new(313, 100);
    let vs_rat4 = efficiency_gain(cplx, 12, Ratio::new(4, 1), 18) * 100.0;
    let vs_rat2 = efficiency_gain(cplx, 12, Ratio::new(9, 4), 10) * 100.0;
    let ok = (vs_rat4 - 17.37).abs() <= 0.01 && (vs_rat2 - 15.93).abs() <= 0.01;
    criterion(
        3,
        "efficiency gains",
        ok,
        &format!("vs rat4x4 (12b/18b): {vs_rat4:.3}% (target 17.37); vs rat2x2 (12b/10b): {vs_rat2:.3}% (target 15.93)"),
    );
}

#[test]
fn criterion_4_range_analysis() {
    let rep = worst_case_ranges(algorithm(AlgorithmId::Rat2x2), 255);
    let want_mag = [
        [1020i64, 1530, 1530, 1020],
        [1530, 2295, 2295, 1530],
        [1530, 2295, 2295, 1530],
        [1020, 1530, 1530, 1020],
    ];
    let want_bits = [
        [11u32, 12, 12, 11],
        [12, 13, 13, 12],
        [12, 13, 13, 12],
        [11, 12, 12, 11],
    ];
    let mut ok = true;
    for i in 0..4 {
        ok &= rep.magnitude[i] == want_mag[i];
        ok &= rep.bits[i] == want_bits[i];
    }
    let w4 = worst_case_ranges(algorithm(AlgorithmId::Rat4x4), 255).widening_bits;
    let wc = worst_case_ranges(algorithm(AlgorithmId::Cplx4x4), 255).widening_bits;
    ok &= w4 == 10 && wc == 4;
    criterion(
        4,
        "range analysis",
        ok,
        &format!(
            "rat2x2 matrices exact (max {}), widening bits rat4x4={w4} cplx4x4={wc}",
            rep.max_magnitude
        ),
    );
}

#[test]
fn criterion_5_scale_table_reproduction() {
    // all 60 values to five decimals, with the out-of-range cells flagged;
    // "G" marks a flagged cell, "." a plain one
    const EXPECTED: [[&str; 4]; 15] = [
        ["0.06250 G", "0.03125 G", "0.01563 G", "0.00781 G"],
        ["0.12500 .", "0.06250 G", "0.03125 G", "0.01563 G"],
        ["0.18750 .", "0.09375 G", "0.04688 G", "0.02344 G"],
        ["0.25000 .", "0.12500 .", "0.06250 G", "0.03125 G"],
        ["0.31250 .", "0.15625 .", "0.07813 G", "0.03906 G"],
        ["0.37500 .", "0.18750 .", "0.09375 G", "0.04688 G"],
        ["0.43750 .", "0.21875 .", "0.10938 .", "0.05469 G"],
        ["0.50000 .", "0.25000 .", "0.12500 .", "0.06250 G"],
        ["0.56250 .", "0.28125 .", "0.14063 .", "0.07031 G"],
        ["0.62500 .", "0.31250 .", "0.15625 .", "0.07813 G"],
        ["0.68750 .", "0.34375 .", "0.17188 .", "0.08594 G"],
        ["0.75000 .", "0.37500 .", "0.18750 .", "0.09375 G"],
        ["0.81250 .", "0.40625 .", "0.20313 .", "0.10156 G"],
        ["0.87500 .", "0.43750 .", "0.21875 .", "0.10938 ."],
        ["0.93750 .", "0.46875 .", "0.23438 .", "0.11719 ."],
    ];
    let table = scale_table();
    let mut ok = table.len() == 60;
    for e in &table {
        let want = EXPECTED[e.n as usize - 1][e.p as usize];
        let (want_value, want_flag) = want.split_once(' ').unwrap();
        ok &= e.value == want_value;
        ok &= e.out_of_range == (want_flag == "G");
    }
    let flagged = table.iter().filter(|e| e.out_of_range).count();
    criterion(
        5,
        "scale table reproduction",
        ok,
        &format!("60/60 values exact to 5 decimals, {flagged} cells flagged out-of-range"),
    );
}

#[test]
fn criterion_6_scale_factor_pipeline() {
    let mut ok = true;
    for mag in 256i64..=2295 {
        let f = compute_scale_factor(mag).unwrap();
        ok &= (1..=15).contains(&f.n()) && (4..=7).contains(&f.shift());
        // value * magnitude <= 255, exact rational arithmetic
        ok &= f.n() as i64 * mag <= 255i64 << f.shift();
    }
    let reduction = bitwidth_reduction(13, 9) * 100.0;
    let reduction_2dp = format!("{reduction:.2}");
    ok &= reduction_2dp == "30.77";
    criterion(
        6,
        "scale factor pipeline",
        ok,
        &format!("all magnitudes in [256, 2295] yield valid int9-preserving factors; 13 -> 9 bits = {reduction_2dp}%"),
    );
}

#[test]
fn criterion_7_static_error_sweep() {
    let start = std::time::Instant::now();
    let report = static_error_sweep(256..=2295).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mean_prop = report.mean_proportional * 100.0;
    let ok = mean_prop <= 0.5 && report.mean_numerical <= 2.5 && elapsed < 5.0;
    criterion(
        7,
        "static error sweep",
        ok,
        &format!(
            "measured means: numerical {:.4}, proportional {mean_prop:.4}% \
             (published analysis reports 1.12 and 0.1%; its weight population is unspecified) \
             in {elapsed:.2} s",
            report.mean_numerical
        ),
    );
}

#[test]
fn criterion_8_lossy_end_to_end() {
    let start = std::time::Instant::now();
    const LAYERS: u64 = 120;
    let mut deviations = Vec::new();
    for i in 0..LAYERS {
        let (ifm, filters, padding, cin, k) = random_layer(9000 + i, 4);
        let spec = ConvSpec {
            algorithm: ConvAlgorithm::Winograd(AlgorithmId::Rat2x2),
            padding,
            scaling_enabled: true,
            in_channels: cin,
            out_channels: k,
        };
        let direct_spec = ConvSpec {
            algorithm: ConvAlgorithm::Direct,
            scaling_enabled: false,
            ..spec
        };
        let d = direct_conv(&ifm, &filters, &direct_spec).unwrap();
        let w = winograd_conv(&ifm, &filters, &spec).unwrap();
        deviations.push(compare(&w, &d).unwrap().l1_rel);
    }
    let mean = deviations.iter().sum::<f64>() / deviations.len() as f64;
    let max = deviations.iter().cloned().fold(0.0f64, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = mean <= 0.01 && max <= 0.05 && elapsed < 60.0;
    criterion(
        8,
        "lossy end-to-end sanity",
        ok,
        &format!(
            "{LAYERS} scaled rat2x2 layers: mean layer deviation {:.4}%, max {:.4}% in {elapsed:.1} s",
            mean * 100.0,
            max * 100.0
        ),
    );
}
