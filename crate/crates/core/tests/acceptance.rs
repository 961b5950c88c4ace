//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lamplighter_core::analytic::{self, ModelParams};
use lamplighter_core::geodesic::{self, DEFAULT_STATE_CAP};
use lamplighter_core::montecarlo::{self, EstimateWithCI};
use lamplighter_core::{table, Generator, LampConfig, ModelSpec, ReducedWord, WreathElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const STEPS: usize = 100_000;
const TRIALS: usize = 200;

struct Outcome {
    pass: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn from_failures(summary: impl Into<String>, details: Vec<String>) -> Self {
        Self {
            pass: details.is_empty(),
            summary: summary.into(),
            details,
        }
    }
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let minute = Duration::from_secs(60);
    let criteria: [Criterion; 10] = [
        (
            1,
            "table regression",
            Duration::from_secs(1),
            table_regression,
        ),
        (
            2,
            "algebraic identities",
            Duration::from_secs(1),
            algebraic_identities,
        ),
        (3, "oracle equivalence", 5 * minute, oracle_equivalence),
        (
            4,
            "left-increment signs",
            Duration::from_secs(30),
            left_increment_signs,
        ),
        (5, "projection drift", 2 * minute, projection_drift),
        (6, "drift bracket", 5 * minute, drift_bracket),
        (7, "boundary statistics", 5 * minute, boundary_statistics),
        (8, "drift from estimated nu1", 5 * minute, nu1_consistency),
        (
            9,
            "switch-walk-switch acceleration",
            5 * minute,
            sws_acceleration,
        ),
        (
            10,
            "multi-state acceleration",
            5 * minute,
            multi_state_acceleration,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if elapsed > budget {
            outcome.pass = false;
            outcome
                .details
                .push(format!("runtime {elapsed:.2?} exceeds {budget:?}"));
        }
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {id:>2} ({name}): {} [{elapsed:.2?}]",
            outcome.summary
        );
        for d in &outcome.details {
            println!("       {d}");
        }
        failed += !outcome.pass as u32;
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn params(q: u32, p: f64) -> ModelParams {
    ModelParams::new(q, p).unwrap()
}

fn est(e: &EstimateWithCI) -> String {
    format!("{:.6} ± {:.6}", e.mean, e.std_error)
}

/// Printed reference rows: q, p, projection drift, ℓ_low, ℓ_low2, ℓ_up, relative precision.
#[rustfmt::skip]
const REFERENCE_ROWS: [(u32, &str, [&str; 5]); 16] = [
    (3, "4/5", ["0.067", "0.145098", "0.144410", "0.157358", "0.01314"]),
    (3, "2/3", ["0.111", "0.234567", "0.233467", "0.253778", "0.02161"]),
    (3, "1/2", ["0.167", "0.333", "0.333", "0.359733", "0.03167"]),
    (3, "1/4", ["0.25", "0.428571", "0.438050", "0.461289", "0.03099"]),
    (5, "4/5", ["0.12", "0.216", "0.215942", "0.221533", "0.00629"]),
    (5, "2/3", ["0.2", "0.347368", "0.347629", "0.355735", "0.010459"]),
    (5, "1/2", ["0.3", "0.490909", "0.492585", "0.501825", "0.01559"]),
    (5, "1/4", ["0.45", "0.635294", "0.641344", "0.647154", "0.01056"]),
    (10, "4/5", ["0.16", "0.256", "0.256029", "0.257516", "0.001805"]),
    (10, "2/3", ["0.267", "0.412121", "0.412311", "0.414351", "0.003040"]),
    (10, "1/2", ["0.4", "0.584615", "0.585277", "0.587408", "0.00465"]),
    (10, "1/4", ["0.6", "0.771429", "0.773099", "0.774202", "0.00276"]),
    (20, "4/5", ["0.18", "0.273176", "0.273189", "0.273569", "0.0004789"]),
    (20, "2/3", ["0.3", "0.440425", "0.440487", "0.440994", "0.0008128"]),
    (20, "1/2", ["0.45", "0.626785", "0.626975", "0.627483", "0.001269"]),
    (20, "1/4", ["0.675", "0.836413", "0.836835", "0.837079", "0.00075"]),
];

fn table_regression() -> Outcome {
    const COLUMNS: [&str; 5] = [
        "projection_drift",
        "ell_low",
        "ell_low2",
        "ell_up",
        "rel_precision",
    ];
    let csv = table::table_csv().unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    let mut details = Vec::new();
    if rows.len() != 16 {
        details.push(format!("expected 16 rows, got {}", rows.len()));
    }
    for ((q, p, printed), row) in REFERENCE_ROWS.iter().zip(&rows) {
        let (num, den) = p.split_once('/').unwrap();
        let p_value = num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap();
        if row[0] != *q as f64 || (row[1] - p_value).abs() > 5e-7 {
            details.push(format!(
                "row order: expected ({q}, {p}), got ({}, {})",
                row[0], row[1]
            ));
            continue;
        }
        for (col, (cell, actual)) in printed.iter().zip(&row[2..]).enumerate() {
            let expected: f64 = cell.parse().unwrap();
            let six_digits = cell.split_once('.').unwrap().1.len() >= 6;
            let tol = if col < 4 && six_digits { 5e-6 } else { 5e-4 };
            if (actual - expected).abs() > tol {
                details.push(format!(
                    "q={q} p={p} {}: expected {cell} ± {tol:e}, got {actual}",
                    COLUMNS[col]
                ));
            }
        }
    }
    Outcome::from_failures("16 rows × 5 columns against the printed values", details)
}

fn algebraic_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let q = rng.random_range(3..=64u32);
        let p = rng.random_range(0.001..0.999);
        let prm = params(q, p);
        let qf = q as f64;
        let nu = analytic::nu_bounds(prm).unwrap();
        let bounds = analytic::drift_bounds(prm).unwrap();
        let nu1 = rng.random_range(0.0..=1.0 / (qf * (qf - 1.0)));
        let nu2 = (1.0 / qf - (qf - 1.0) * nu1).max(0.0);
        for d in [
            bounds.ell_low - analytic::exact_drift_from_nu1(prm, nu.nu1_hat).unwrap(),
            bounds.ell_up - analytic::exact_drift_from_nu2(prm, nu.nu2_hat).unwrap(),
            analytic::exact_drift_from_nu1(prm, nu1).unwrap()
                - analytic::exact_drift_from_nu2(prm, nu2).unwrap(),
        ] {
            worst = worst.max(d.abs());
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        summary: format!("10000 random inputs, max deviation {worst:e} (tolerance 1e-12)"),
        details: Vec::new(),
    }
}

fn oracle_equivalence() -> Outcome {
    let cases = [
        (ModelSpec::walk_or_switch(3, 0.5).unwrap(), 5),
        (ModelSpec::walk_or_switch(4, 0.5).unwrap(), 5),
        (ModelSpec::switch_walk_switch(3, 0.5).unwrap(), 5),
        (ModelSpec::switch_walk_switch(4, 0.5).unwrap(), 5),
        (ModelSpec::multi_state(3, 0.5, vec![0.25, 0.25]).unwrap(), 4),
    ];
    let mut details = Vec::new();
    let mut elements = 0;
    for (model, radius) in cases {
        match geodesic::oracle_check(&model, radius, DEFAULT_STATE_CAP) {
            Ok(report) => {
                elements += report.elements;
                if !report.mismatches.is_empty() {
                    details.push(format!(
                        "{} q={} radius {radius}: {} mismatches",
                        model.kind,
                        model.q,
                        report.mismatches.len()
                    ));
                }
            }
            Err(e) => details.push(format!("{} q={}: {e}", model.kind, model.q)),
        }
    }
    Outcome::from_failures(
        format!(
            "{elements} elements compared, {} cases with mismatches",
            details.len()
        ),
        details,
    )
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<u32> {
    let len = rng.random_range(0..=max_len);
    let mut letters: Vec<u32> = Vec::with_capacity(len);
    while letters.len() < len {
        let a = rng.random_range(1..=3);
        if letters.last() != Some(&a) {
            letters.push(a);
        }
    }
    letters
}

fn left_increment_signs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let root = ReducedWord::identity(3);
    let generators: Vec<(Generator, WreathElement)> = [
        Generator::SwitchAt(1),
        Generator::Move(1),
        Generator::Move(2),
        Generator::Move(3),
    ]
    .into_iter()
    .map(|g| (g, g.embed(3, 2).unwrap()))
    .collect();
    let mut details = Vec::new();
    let mut violations = 0;
    for _ in 0..100_000 {
        let lamps: Vec<(ReducedWord, u32)> = (0..rng.random_range(0..=10))
            .map(|_| {
                (
                    ReducedWord::reduce(3, &random_word(&mut rng, 6)).unwrap(),
                    1,
                )
            })
            .collect();
        let config = LampConfig::from_entries(3, 2, lamps).unwrap();
        let position = ReducedWord::reduce(3, &random_word(&mut rng, 6)).unwrap();
        let z = WreathElement::new(config, position).unwrap();
        let before = geodesic::length_walk_or_switch(&z) as i64;
        for (g, element) in &generators {
            let expected = match *g {
                Generator::SwitchAt(_) => {
                    if z.config.get(&root) == 0 {
                        1
                    } else {
                        -1
                    }
                }
                Generator::Move(a) => {
                    let in_cone = |w: &ReducedWord| w.letters().first() == Some(&a);
                    if in_cone(&z.position) {
                        // Lamps outside the cone of `a` force the walk back through `o`.
                        if z.config.support().any(|w| !in_cone(w)) {
                            1
                        } else {
                            -1
                        }
                    } else if z.config.support().any(in_cone) {
                        -1
                    } else {
                        1
                    }
                }
                Generator::SwsMove { .. } => unreachable!(),
            };
            let after = geodesic::length_walk_or_switch(&element.mul(&z).unwrap()) as i64;
            if after - before != expected {
                violations += 1;
                if details.len() < 5 {
                    details.push(format!(
                        "{g:?} · {}: Δℓ = {}, expected {expected}",
                        z.to_json(),
                        after - before
                    ));
                }
            }
        }
    }
    Outcome::from_failures(
        format!("400000 products checked, {violations} violations"),
        details,
    )
}

/// `(q, p, printed ℓ_low2, printed ℓ_up)`.
const DRIFT_GRID: [(u32, f64, f64, f64); 3] = [
    (3, 0.5, 0.333, 0.359733),
    (5, 0.25, 0.641344, 0.647154),
    (10, 2.0 / 3.0, 0.412311, 0.414351),
];

fn projection_drift() -> Outcome {
    let mut details = Vec::new();
    let mut parts = Vec::new();
    for (q, p, _, _) in DRIFT_GRID {
        let model = ModelSpec::walk_or_switch(q, p).unwrap();
        let e =
            montecarlo::estimate_drift_with_projection(&model, STEPS, TRIALS, SEED, false).unwrap();
        let target = (1.0 - p) * (q as f64 - 2.0) / q as f64;
        let z = (e.projection_drift.mean - target) / e.projection_drift.std_error;
        parts.push(format!("q={q}: {:+.2} s.e.", z));
        if z.abs() > 3.0 {
            details.push(format!(
                "q={q} p={p}: {} vs {target:.6}",
                est(&e.projection_drift)
            ));
        }
    }
    Outcome::from_failures(parts.join(", "), details)
}

fn drift_bracket() -> Outcome {
    let mut details = Vec::new();
    let mut parts = Vec::new();
    for (q, p, low2, up) in DRIFT_GRID {
        let model = ModelSpec::walk_or_switch(q, p).unwrap();
        let e = montecarlo::estimate_drift(&model, STEPS, TRIALS, SEED).unwrap();
        let (lo, hi) = (low2 - 3.0 * e.std_error, up + 3.0 * e.std_error);
        parts.push(format!("q={q}: {:.6}", e.mean));
        if !(lo..=hi).contains(&e.mean) {
            details.push(format!(
                "q={q} p={p}: {} outside [{lo:.6}, {hi:.6}]",
                est(&e)
            ));
        }
    }
    Outcome::from_failures(parts.join(", "), details)
}

const BOUNDARY_STEPS: usize = 10_000;
const BOUNDARY_TRIALS: usize = 10_000;
const BALL_RADIUS: u32 = 30;

fn boundary_statistics() -> Outcome {
    let mut details = Vec::new();
    for (q, p) in [(3u32, 0.5), (5, 0.5)] {
        let qf = q as f64;
        let model = ModelSpec::walk_or_switch(q, p).unwrap();
        let stats = montecarlo::estimate_boundary_stats(
            &model,
            BOUNDARY_STEPS,
            BOUNDARY_TRIALS,
            SEED,
            BALL_RADIUS,
        )
        .unwrap();
        for (i, h) in stats.first_letter_hist.iter().enumerate() {
            if (h - 1.0 / qf).abs() > 0.02 {
                details.push(format!("q={q}: first letter {} frequency {h}", i + 1));
            }
        }
        let off = (qf - 2.0 + p) / (p * qf + qf - 2.0);
        if (stats.lamp_off_freq.mean - off).abs() > 0.02 {
            details.push(format!(
                "q={q}: lamp-off frequency {} vs {off:.6}",
                est(&stats.lamp_off_freq)
            ));
        }
        let nu = analytic::nu_bounds(params(q, p)).unwrap();
        let nu1_hat = p / (qf * (p * qf + qf - 2.0));
        for (name, e, bound) in [
            ("nu1 vs nu1_hat", &stats.nu1_est, nu1_hat),
            (
                "nu1 vs nu3_hat/(q-1)",
                &stats.nu1_est,
                nu.nu3_hat / (qf - 1.0),
            ),
            ("nu2 vs nu2_hat", &stats.nu2_est, nu.nu2_hat),
        ] {
            if e.mean < bound - 3.0 * e.std_error {
                details.push(format!("q={q} {name}: {} below {bound:.6}", est(e)));
            }
        }
        if !stats.warnings.is_empty() {
            details.push(format!("q={q}: {}", stats.warnings.join("; ")));
        }
    }
    Outcome::from_failures(
        format!("q ∈ {{3, 5}}, p = 1/2, {BOUNDARY_TRIALS} trials of {BOUNDARY_STEPS} steps, ball radius {BALL_RADIUS}"),
        details,
    )
}

fn nu1_consistency() -> Outcome {
    let mut details = Vec::new();
    let mut parts = Vec::new();
    for (q, p) in [(3u32, 0.5), (5, 0.5)] {
        let model = ModelSpec::walk_or_switch(q, p).unwrap();
        let stats = montecarlo::estimate_boundary_stats(
            &model,
            BOUNDARY_STEPS,
            BOUNDARY_TRIALS,
            SEED,
            BALL_RADIUS,
        )
        .unwrap();
        let drift = montecarlo::estimate_drift(&model, STEPS, TRIALS, SEED).unwrap();
        match analytic::exact_drift_from_nu1(params(q, p), stats.nu1_est.mean) {
            Ok(exact) => {
                parts.push(format!("q={q}: {exact:.6} vs {:.6}", drift.mean));
                if (exact - drift.mean).abs() > 0.02 {
                    details.push(format!("q={q}: |{exact:.6} − {:.6}| > 0.02", drift.mean));
                }
            }
            Err(e) => details.push(format!("q={q}: {e}")),
        }
    }
    Outcome::from_failures(parts.join(", "), details)
}

fn sws_acceleration() -> Outcome {
    let mut details = Vec::new();
    let mut parts = Vec::new();
    for (q, p) in [(3u32, 0.5), (5, 0.5)] {
        let qf = q as f64;
        let b = 4.0 * (qf - 1.0) * (qf - 2.0) * p * (1.0 - p) / qf.powi(3);
        let floor = (qf - 2.0) / qf * (1.0 + b);
        let model = ModelSpec::switch_walk_switch(q, p).unwrap();
        let drift = montecarlo::estimate_drift(&model, STEPS, TRIALS, SEED).unwrap();
        if drift.mean < floor - 3.0 * drift.std_error {
            details.push(format!("q={q}: drift {} below {floor:.6}", est(&drift)));
        }
        let exits =
            montecarlo::estimate_exit_stats(&model, STEPS, TRIALS, SEED, 10 * q as usize).unwrap();
        if exits.mean_delta.mean < b - 3.0 * exits.mean_delta.std_error {
            details.push(format!(
                "q={q}: mean Δ {} below B = {b:.6}",
                est(&exits.mean_delta)
            ));
        }
        if exits.star_violations > 0 || exits.total_exits == 0 {
            details.push(format!(
                "q={q}: {} violations among {} exits",
                exits.star_violations, exits.total_exits
            ));
        }
        parts.push(format!(
            "q={q}: drift {:.4}, mean Δ {:.4}, {} exits",
            drift.mean, exits.mean_delta.mean, exits.total_exits
        ));
    }
    Outcome::from_failures(parts.join("; "), details)
}

fn multi_state_acceleration() -> Outcome {
    let model = ModelSpec::multi_state(3, 0.5, vec![0.25, 0.25]).unwrap();
    let drift = montecarlo::estimate_drift(&model, STEPS, TRIALS, SEED).unwrap();
    let margin = (drift.mean - 1.0 / 6.0) / drift.std_error;
    Outcome {
        pass: margin >= 5.0,
        summary: format!(
            "drift {} exceeds 1/6 by {margin:.1} s.e. (need 5)",
            est(&drift)
        ),
        details: Vec::new(),
    }
}
