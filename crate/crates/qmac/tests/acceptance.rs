//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Tolerances and runtime limits are pinned here; a criterion fails loudly
//! rather than silently loosening a bound.

use std::time::Instant;

use qmac::capacity::{
    ea_capacity_single, region_for_inputs, sum_rate_bound, verify_dephasing_maximizer,
    OptimizerConfig,
};
use qmac::channels::{
    make_collective_phase_flip, make_completely_dephasing, make_generalized_pauli,
    random_channel, QuantumChannel,
};
use qmac::codesim::{
    average_output_state, average_output_state_enumerated, decode_explicit_codebook,
    gentle_measurement_sweep, hayashi_nagaoka_sweep, simulate_packing, BlockPauliIndex,
    PackingConfig, ResourceDecomposition,
};
use qmac::entropy::{verify_entropy_lemmas, verify_strong_subadditivity};
use qmac::qmath::{
    ginibre_state, max_entry_diff, tensor, trace_distance, CMatrix, DensityOperator, PureState,
};
use qmac::typing::verify_typical_properties;

fn pi(d: usize) -> DensityOperator {
    DensityOperator::maximally_mixed(d)
}

fn report(criterion: &str, elapsed: std::time::Duration, limit_s: f64) {
    println!("PASS {criterion} ({elapsed:.2?} < {limit_s}s)");
    assert!(
        elapsed.as_secs_f64() < limit_s,
        "{criterion}: runtime {elapsed:?} exceeded {limit_s}s"
    );
}

#[test]
fn criterion_01_phase_flip_closed_form() {
    let t0 = Instant::now();
    let m = make_collective_phase_flip(2, &[0.5, 0.5]).unwrap();
    let pent = region_for_inputs(&m, &pi(2), &pi(2)).unwrap();
    assert!((pent.r1 - 2.0).abs() < 1e-6, "r1 = {}", pent.r1);
    assert!((pent.r2 - 2.0).abs() < 1e-6, "r2 = {}", pent.r2);
    assert!((pent.rsum - 3.0).abs() < 1e-6, "rsum = {}", pent.rsum);

    let m = make_collective_phase_flip(2, &[0.75, 0.25]).unwrap();
    let pent = region_for_inputs(&m, &pi(2), &pi(2)).unwrap();
    assert!(
        (pent.rsum - (4.0 - 0.811278)).abs() < 1e-5,
        "rsum = {}",
        pent.rsum
    );
    report(
        "criterion 1: phase-flip closed form (2,2,3) and 4-H(p)",
        t0.elapsed(),
        1.0,
    );
}

#[test]
fn criterion_02_sum_rate_optimizer() {
    let t0 = Instant::now();
    let m = make_collective_phase_flip(2, &[0.5, 0.5]).unwrap();
    let cfg = OptimizerConfig::default(); // 8 starts
    let res = sum_rate_bound(&m, (2, 2), &cfg).unwrap();
    assert!((res.value - 3.0).abs() < 1e-3, "value = {}", res.value);
    let argmax = res.rho1.tensor(&res.rho2).unwrap();
    let target = pi(2).tensor(&pi(2)).unwrap();
    let dist = trace_distance(&argmax, &target).unwrap();
    assert!(dist < 0.05, "argmax distance from π⊗π = {dist}");
    report(
        "criterion 2: sum-rate bound 3.0 at π⊗π under 8-start ascent",
        t0.elapsed(),
        60.0,
    );
}

#[test]
fn criterion_03_single_sender_ea_capacity() {
    let t0 = Instant::now();
    let cfg = OptimizerConfig::default();
    let res = ea_capacity_single(&QuantumChannel::identity(2), &cfg).unwrap();
    assert!((res.value - 2.0).abs() < 1e-3, "identity value = {}", res.value);
    assert!(res.value <= 2.0 + 1e-6, "identity value exceeds dimension bound");

    let res = ea_capacity_single(&make_completely_dephasing(2), &cfg).unwrap();
    assert!((res.value - 1.0).abs() < 1e-3, "dephasing value = {}", res.value);
    report(
        "criterion 3: EA capacity 2.0 (identity qubit), 1.0 (dephasing qubit)",
        t0.elapsed(),
        60.0,
    );
}

#[test]
fn criterion_04_entropic_lemma_suite() {
    let t0 = Instant::now();
    let lemmas = verify_entropy_lemmas(500, 4, 20260810);
    assert!(
        lemmas.duality_max_violation <= 1e-8,
        "duality violation {}",
        lemmas.duality_max_violation
    );
    assert!(
        lemmas.bound_min_slack >= -1e-9,
        "bound slack {}",
        lemmas.bound_min_slack
    );
    let ssa = verify_strong_subadditivity(1000, 3, 20260810);
    assert!(ssa.min_value >= -1e-9, "SSA min {}", ssa.min_value);
    report(
        "criterion 4: entropy duality (500), bound (500), SSA (1000)",
        t0.elapsed(),
        120.0,
    );
}

#[test]
fn criterion_05_randomization_identity() {
    let t0 = Instant::now();
    for d in 2..=5usize {
        let paulis = make_generalized_pauli(d);
        let phi = PureState::maximally_entangled(d).to_density();
        let id = CMatrix::identity(d, d);
        let mut avg = CMatrix::zeros(d * d, d * d);
        for u in &paulis {
            let lifted = tensor(u, &id).unwrap();
            avg += &lifted * phi.matrix() * lifted.adjoint();
        }
        avg = avg.scale(1.0 / (d * d) as f64);
        let target = CMatrix::identity(d * d, d * d).scale(1.0 / (d * d) as f64);
        let err = max_entry_diff(&avg, &target);
        assert!(err < 1e-12, "d = {d}: max entry deviation {err:.3e}");
    }
    report(
        "criterion 5: Pauli randomization of Φ equals π⊗π for d = 2..5",
        t0.elapsed(),
        5.0,
    );
}

#[test]
fn criterion_06_average_state_identity() {
    let t0 = Instant::now();
    let m = QuantumChannel::identity(2);
    let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
    for n in [1usize, 2] {
        let closed = average_output_state(&m, &rho, n).unwrap();
        let enumerated = average_output_state_enumerated(&m, &rho, n, 1 << 16).unwrap();
        let dist = trace_distance(&closed, &enumerated).unwrap();
        assert!(dist < 1e-8, "n = {n}: closed-form distance {dist:.3e}");
    }
    // cross-block entries of the enumerated average vanish (n = 2)
    let avg = average_output_state_enumerated(&m, &rho, 2, 1 << 16).unwrap();
    let decomp = ResourceDecomposition::new(&rho, 2).unwrap();
    let mut class_of = [0usize; 4];
    for (ci, c) in decomp.classes.iter().enumerate() {
        for &mb in &c.members {
            class_of[mb] = ci;
        }
    }
    let mat = avg.matrix();
    let mut max_cross: f64 = 0.0;
    for r in 0..16 {
        for c in 0..16 {
            if class_of[r % 4] != class_of[c % 4] || class_of[r / 4] != class_of[c / 4] {
                max_cross = max_cross.max(mat[(r, c)].norm());
            }
        }
    }
    assert!(max_cross <= 1e-10, "cross-block entry {max_cross:.3e}");
    report(
        "criterion 6: average-state identity at n = 1, 2 with vanishing cross blocks",
        t0.elapsed(),
        60.0,
    );
}

#[test]
fn criterion_07_packing_simulation() {
    let t0 = Instant::now();

    // (a) superdense instance: perfect recovery of the 4 Pauli codewords
    let entries: Vec<BlockPauliIndex> = (0..4)
        .map(|g| BlockPauliIndex {
            entries: vec![(g, false)],
        })
        .collect();
    let successes =
        decode_explicit_codebook(&QuantumChannel::identity(2), &pi(2), 1, 0.5, &entries).unwrap();
    for (g, s) in successes.iter().enumerate() {
        assert!(*s >= 1.0 - 1e-9, "superdense codeword {g}: success {s}");
    }

    // (b) qubit cq channel at n = 4, one bit below the level-n mutual
    // information (4 bits): N = 8 codewords
    let cfg = PackingConfig {
        n: 4,
        rate: 0.75,
        n_codewords: None,
        gamma: 0.01,
        delta: 0.25,
        trials: 20,
        seed: 20260810,
    };
    let rep = simulate_packing(&make_completely_dephasing(2), &pi(2), &cfg).unwrap();
    assert_eq!(rep.n_codewords, 8);
    assert!(
        rep.pass_fraction >= 0.95,
        "bound cleared in only {:.0}% of trials",
        rep.pass_fraction * 100.0
    );

    // (c) Hayashi–Nagaoka margins on 100 random operand pairs
    let hn = hayashi_nagaoka_sweep(100, 8, 20260810).unwrap();
    assert!(hn.min_margin >= -1e-8, "HN margin {}", hn.min_margin);

    // (d) gentle-measurement disturbance within √(8ε) on all instances
    let gentle = gentle_measurement_sweep(100, 20260810).unwrap();
    assert!(
        gentle.max_excess <= 1e-9,
        "disturbance exceeded bound by {}",
        gentle.max_excess
    );
    report(
        "criterion 7: packing simulation (superdense, cq bound, HN, gentle)",
        t0.elapsed(),
        600.0,
    );
}

#[test]
fn criterion_08_typicality_suite() {
    let t0 = Instant::now();
    let rho = DensityOperator::from_probabilities(&[0.75, 0.25]).unwrap();
    let mut masses = Vec::new();
    for n in [4usize, 6, 8] {
        let r = verify_typical_properties(&rho, n, 0.1, 0.25).unwrap();
        assert!(r.tightest_c.is_finite(), "n = {n}: tightest c not finite");
        assert!(
            r.sandwich_lower_margin >= -1e-12 && r.sandwich_upper_margin >= -1e-12,
            "n = {n}: sandwich margins ({}, {})",
            r.sandwich_lower_margin,
            r.sandwich_upper_margin
        );
        assert!(
            r.cardinality_margin >= -1e-6,
            "n = {n}: cardinality margin {}",
            r.cardinality_margin
        );
        assert!(
            r.type_dimension_margin >= -1e-6,
            "n = {n}: type-dimension margin {}",
            r.type_dimension_margin
        );
        masses.push(r.typical_mass);
    }
    let monotone = masses.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    println!(
        "  typical masses over n = 4, 6, 8: {masses:?} (monotone: {monotone})"
    );
    report(
        "criterion 8: typicality sandwich/cardinality inequalities at reported constants",
        t0.elapsed(),
        30.0,
    );
}

#[test]
fn criterion_09_dephasing_maximizer() {
    let t0 = Instant::now();
    let delta = make_completely_dephasing(2);
    let rep = verify_dephasing_maximizer(&delta, 200, 20260810).unwrap();
    assert!(
        rep.min_dephasing_gain >= -1e-8,
        "dephasing lowered I(A;B) by {}",
        -rep.min_dephasing_gain
    );
    assert!(
        rep.max_closed_form_deviation <= 1e-8,
        "closed form deviation {}",
        rep.max_closed_form_deviation
    );
    report(
        "criterion 9: dephasing maximizer and closed form on 200 random inputs",
        t0.elapsed(),
        30.0,
    );
}

#[test]
fn criterion_10_corner_rate_consistency() {
    let t0 = Instant::now();
    let m = make_collective_phase_flip(2, &[0.5, 0.5]).unwrap();
    let dec = qmac::codesim::successive_decode_rates(&m, &pi(2), &pi(2)).unwrap();
    assert!((dec.rates.0 - 1.0).abs() < 1e-9, "Alice rate {}", dec.rates.0);
    assert!((dec.rates.1 - 2.0).abs() < 1e-9, "Bob rate {}", dec.rates.1);

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(20260810);
    for trial in 0..50 {
        let dout = 2 + (trial % 2);
        let m = random_channel(4, dout, 2, &mut rng).unwrap();
        let rho1 = ginibre_state(2, &mut rng);
        let rho2 = ginibre_state(2, &mut rng);
        let dec = qmac::codesim::successive_decode_rates(&m, &rho1, &rho2).unwrap();
        assert!(
            dec.chain_rule_defect < 1e-9,
            "trial {trial}: chain-rule defect {}",
            dec.chain_rule_defect
        );
    }
    report(
        "criterion 10: corner rates (1,2) and chain-rule consistency on 50 channels",
        t0.elapsed(),
        60.0,
    );
}

#[test]
fn criterion_11_cli_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_qmac");
    let dir = std::env::temp_dir().join("qmac_acceptance_determinism");
    std::fs::create_dir_all(&dir).unwrap();

    let cases: Vec<(&str, Vec<String>)> = vec![
        (
            "region",
            vec![
                "region".into(),
                "--channel".into(),
                "phase-flip:d=2,p=0.5,0.5".into(),
                "--samples".into(),
                "3".into(),
                "--seed".into(),
                "7".into(),
            ],
        ),
        (
            "optimize",
            vec![
                "optimize".into(),
                "--channel".into(),
                "dephasing:d=2".into(),
                "--seed".into(),
                "7".into(),
            ],
        ),
        (
            "simulate",
            vec![
                "simulate".into(),
                "--channel".into(),
                "dephasing:d=2".into(),
                "--n".into(),
                "3".into(),
                "--rate".into(),
                "0.66".into(),
                "--trials".into(),
                "3".into(),
                "--seed".into(),
                "7".into(),
            ],
        ),
        (
            "verify",
            vec![
                "verify".into(),
                "--trials".into(),
                "40".into(),
                "--seed".into(),
                "7".into(),
            ],
        ),
    ];
    for (name, args) in cases {
        let out = dir.join(format!("{name}.json"));
        let mut first: Option<Vec<u8>> = None;
        for _ in 0..2 {
            let status = std::process::Command::new(bin)
                .args(&args)
                .arg("--out")
                .arg(&out)
                .output()
                .expect("binary runs");
            assert!(
                status.status.success(),
                "{name} exited with {:?}: {}",
                status.status.code(),
                String::from_utf8_lossy(&status.stderr)
            );
            let bytes = std::fs::read(if name == "region" {
                out.with_extension("json")
            } else {
                out.clone()
            })
            .unwrap();
            match &first {
                None => first = Some(bytes),
                Some(prev) => assert_eq!(prev, &bytes, "{name}: reports differ between reruns"),
            }
        }
        if name == "region" {
            // the CSV hull must also be byte-identical
            let csv1 = std::fs::read(out.with_extension("csv")).unwrap();
            let status = std::process::Command::new(bin)
                .args(&args)
                .arg("--out")
                .arg(&out)
                .output()
                .unwrap();
            assert!(status.status.success());
            let csv2 = std::fs::read(out.with_extension("csv")).unwrap();
            assert_eq!(csv1, csv2, "region CSV differs between reruns");
        }
    }
    report(
        "criterion 11: CLI reruns produce byte-identical reports",
        t0.elapsed(),
        600.0,
    );
}
