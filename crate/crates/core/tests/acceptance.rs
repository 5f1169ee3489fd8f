//! Acceptance checks. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! exits non-zero if any criterion fails.
//!
//! Run with `cargo test -p winograd-core --test acceptance`.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use common::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

use winograd_core::harness::{condition_table, run_bench, Algorithm, ExperimentConfig, Metric};
use winograd_core::pipeline::{winograd_1d, winograd_tile_2d};
use winograd_core::quantization::{MAX_BITS, MIN_BITS};
use winograd_core::reference::correlate_1d;
use winograd_core::tensor::rel_l2_error;
use winograd_core::{
    build_base_change, build_plan, conv2d_direct, conv2d_winograd, fake_quant, plan_to_float,
    BaseMode, InterpolationPoints, Tensor,
};

const MODES: [BaseMode; 2] = [BaseMode::Canonical, BaseMode::Legendre];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn exactness() -> Outcome {
    const CASES: usize = 100;
    let mut r = rng(0xE4AC7);
    let mut bad = Vec::new();
    for o in [2, 4, 6] {
        let m = o + 2;
        let plan = build_plan(o, 3, InterpolationPoints::default_for(m), true).unwrap();
        let t = plan.transforms();
        for _ in 0..CASES {
            let g = rational_vec(&mut r, 3);
            let d = rational_vec(&mut r, m);
            let want1 = correlate_1d(&d, &g).unwrap();
            let w = rational_matrix(&mut r, 3, 3);
            let x = rational_matrix(&mut r, m, m);
            let want2 = correlate_2d(&x, &w);
            for mode in MODES {
                if winograd_1d(&g, &d, t, mode).unwrap() != want1 {
                    bad.push(format!("1-D o={o} {}", mode.name()));
                }
                if winograd_tile_2d(&w, &x, t, mode).unwrap() != want2 {
                    bad.push(format!("2-D o={o} {}", mode.name()));
                }
            }
        }
    }
    let detail = format!("o in {{2,4,6}}, {CASES} rational cases each, 1-D and 2-D, both bases; mismatches: {}", bad.len());
    outcome(bad.is_empty(), detail)
}

fn golden() -> Outcome {
    let b6 = build_base_change(6).unwrap();
    let pt = fractions(&[
        &[(1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        &[(0, 1), (1, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        &[(-1, 3), (0, 1), (1, 1), (0, 1), (0, 1), (0, 1)],
        &[(0, 1), (-3, 5), (0, 1), (1, 1), (0, 1), (0, 1)],
        &[(3, 35), (0, 1), (-6, 7), (0, 1), (1, 1), (0, 1)],
        &[(0, 1), (5, 21), (0, 1), (-10, 9), (0, 1), (1, 1)],
    ]);
    let pit = fractions(&[
        &[(1, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        &[(0, 1), (1, 1), (0, 1), (0, 1), (0, 1), (0, 1)],
        &[(1, 3), (0, 1), (1, 1), (0, 1), (0, 1), (0, 1)],
        &[(0, 1), (3, 5), (0, 1), (1, 1), (0, 1), (0, 1)],
        &[(1, 5), (0, 1), (6, 7), (0, 1), (1, 1), (0, 1)],
        &[(0, 1), (3, 7), (0, 1), (10, 9), (0, 1), (1, 1)],
    ]);
    let nz4 = build_base_change(4).unwrap().p().count_nonzero();
    let nz6 = b6.p().count_nonzero();
    let pass = b6.p_t() == pt && b6.p_inv_t() == pit && nz4 == 6 && nz6 == 12;
    outcome(
        pass,
        format!("P^T and P^-T (m=6) exact: {}; nonzeros m=4: {nz4}, m=6: {nz6}", b6.p_t() == pt && b6.p_inv_t() == pit),
    )
}

fn float_oracle() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut r = rng(0xF10A7);
    let plans: Vec<_> = [2, 4]
        .iter()
        .map(|&o| plan_to_float(&build_plan(o, 3, InterpolationPoints::default_for(o + 2), true).unwrap()))
        .collect();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let plan = &plans[case % 2];
        let c_in = [1, 3][r.random_range(0..2)];
        let c_out = [1, 4][r.random_range(0..2)];
        let (h, w) = (r.random_range(6..=16), r.random_range(6..=16));
        let x = normal_tensor(&mut r, vec![c_in, h, w]);
        let wt = normal_tensor(&mut r, vec![c_out, c_in, 3, 3]);
        let want = conv2d_direct(&x, &wt).unwrap();
        for mode in MODES {
            let got = conv2d_winograd(&x, &wt, plan, mode).unwrap();
            worst = worst.max(rel_l2_error(got.data(), want.data()));
        }
    }
    outcome(worst <= TOL, format!("200 cases, both bases, worst rel L2 {worst:.3e} (tol {TOL:e})"))
}

fn quantization_laws() -> Outcome {
    const CASES: u32 = 1000;
    let strategy = (
        prop::collection::vec(
            prop_oneof![4 => -1e3..1e3f64, 1 => Just(0.0), 1 => (-64i32..=64).prop_map(|n| n as f64 / 8.0)],
            1..64,
        ),
        MIN_BITS..=MAX_BITS,
    );
    let fq = |v: &[f64], bits| {
        fake_quant(&Tensor::new(vec![v.len()], v.to_vec()).unwrap(), bits)
            .unwrap()
            .into_data()
    };
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    let result = runner.run(&strategy, |(v, bits)| {
        let once = fq(&v, bits);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        for (a, b) in once.iter().zip(fq(&neg, bits)) {
            prop_assert_eq!(*a, -b, "symmetry");
        }
        prop_assert_eq!(&fq(&once, bits), &once, "idempotence");
        let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for (x, y) in v.iter().zip(&once) {
            prop_assert!(y.abs() <= m, "bound");
            if x.abs() == m {
                prop_assert_eq!(y.abs(), m, "extreme");
            }
        }
        let again: Vec<u64> = fq(&v, bits).iter().map(|x| x.to_bits()).collect();
        let first: Vec<u64> = once.iter().map(|x| x.to_bits()).collect();
        prop_assert_eq!(again, first, "determinism");
        Ok(())
    });
    match result {
        Ok(()) => outcome(true, format!("symmetry, idempotence, boundedness, determinism over {CASES} cases")),
        Err(e) => outcome(false, format!("{e}")),
    }
}

fn bench(qconfigs: &[&str], seed: u64) -> winograd_core::harness::ErrorReport {
    let config = ExperimentConfig {
        modes: vec![Algorithm::Canonical, Algorithm::Legendre],
        qconfigs: qconfigs.iter().map(|&q| q.into()).collect(),
        trials: 1000,
        seed,
        ..ExperimentConfig::default()
    };
    run_bench(&config).unwrap()
}

fn mean(report: &winograd_core::harness::ErrorReport, mode: Algorithm, q: &str) -> f64 {
    report.row(mode, q, Metric::RelL2Err).unwrap().summary.mean
}

fn directional(report: &winograd_core::harness::ErrorReport) -> (Outcome, Outcome) {
    let c8 = mean(report, Algorithm::Canonical, "8b");
    let l8 = mean(report, Algorithm::Legendre, "8b");
    let c9 = mean(report, Algorithm::Canonical, "8b+9b");
    let l9 = mean(report, Algorithm::Legendre, "8b+9b");
    (
        outcome(
            l8 < c8,
            format!("F(4,3), 1000 trials, all 8-bit mean rel L2: legendre {l8:.4} vs canonical {c8:.4}"),
        ),
        outcome(
            c9 < c8 && l9 < l8,
            format!("9-bit Hadamard mean rel L2: canonical {c8:.4} -> {c9:.4}, legendre {l8:.4} -> {l9:.4}"),
        ),
    )
}

fn monotonicity() -> Outcome {
    let widths = ["8b", "10b", "12b", "16b"];
    let report = bench(&widths, 7);
    let mut pass = true;
    let mut parts = Vec::new();
    for mode in [Algorithm::Canonical, Algorithm::Legendre] {
        let m: Vec<f64> = widths.iter().map(|q| mean(&report, mode, q)).collect();
        pass &= m.windows(2).all(|w| w[1] <= w[0]);
        parts.push(format!(
            "{} {}",
            mode.name(),
            m.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" > ")
        ));
    }
    outcome(pass, format!("mean rel L2 over 8/10/12/16 bits: {}", parts.join("; ")))
}

fn conditioning() -> Outcome {
    let table = |o: usize| condition_table(&build_plan(o, 3, InterpolationPoints::default_for(o + 2), true).unwrap());
    let (t4, t6) = (table(4), table(6));
    let finite = t4
        .iter()
        .chain(&t6)
        .all(|r| r.two_norm.is_finite() && r.frobenius.is_finite());
    let mut not_larger = Vec::new();
    for a in &t4 {
        let b = t6
            .iter()
            .find(|b| b.base == a.base && b.matrix == a.matrix)
            .expect("same matrix set for both sizes");
        if !(b.two_norm > a.two_norm && b.frobenius > a.frobenius) {
            not_larger.push(format!("{} {:.2}<={:.2}", a.matrix, b.two_norm, a.two_norm));
        }
    }
    let detail = format!(
        "finite: {finite}; F(6,3) > F(4,3) for {}/{} matrices{}",
        t4.len() - not_larger.len(),
        t4.len(),
        if not_larger.is_empty() {
            String::new()
        } else {
            format!(", not for {}", not_larger.join(", "))
        }
    );
    outcome(finite && not_larger.is_empty(), detail)
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.json");
    std::fs::write(&cfg, r#"{"seed": 1234, "trials": 1000}"#).unwrap();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_winograd"))
            .arg("bench-error")
            .arg(&cfg)
            .args(extra)
            .output()
            .expect("binary runs")
    };
    let a = run(&[]);
    let b = run(&[]);
    let s = run(&["--serial"]);
    let ok = a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout && a.stdout == s.stdout;
    outcome(
        ok,
        format!(
            "seed 1234, 1000 trials: repeated run identical {}, serial identical {} ({} bytes)",
            a.stdout == b.stdout,
            a.stdout == s.stdout,
            a.stdout.len()
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("exactness", exactness()),
        ("golden matrices", golden()),
        ("float oracle equivalence", float_oracle()),
        ("quantization unit laws", quantization_laws()),
    ];
    let (claim1, claim2) = directional(&bench(&["8b", "8b+9b"], 0));
    results.push(("directional claim 1 (legendre beats canonical at 8 bits)", claim1));
    results.push(("directional claim 2 (9-bit Hadamard lowers error)", claim2));
    results.push(("precision monotonicity", monotonicity()));
    results.push(("conditioning report", conditioning()));
    results.push(("reproducibility", reproducibility()));

    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
