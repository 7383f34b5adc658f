//! Acceptance criteria. Each test writes one `PASS`/`FAIL` line straight to
//! stderr (bypassing output capture) and then asserts. Tests hold a shared
//! lock so the wall-clock budgets are measured without interference.

use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use gambles::cli::{execute, Cli};
use gambles::criteria::{bernoulli_value, expected_utility_rate, huygens_rate, laplace_rate, menger_decomposition};
use gambles::dynamics::{simulate_ensemble, simulate_trajectory, time_average_rate};
use gambles::ergodicity::{diagnose_observables, DiagnosticConfig, ObservableKind, Verdict};
use gambles::lotteries::{
    approach_grid, max_acceptable_price, menger_lottery, nmax_sweep, price_sweep, st_petersburg, LotteryFamily,
    LotterySpec,
};
use gambles::{Dynamic, Execution, Extended, Gamble, Utility};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id} [{status}] {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn coin() -> Gamble {
    Gamble::new(&[(0.5, -0.4), (0.5, 0.5)], 1.0).unwrap()
}

const LN_TIME_AVERAGE: f64 = -0.052_680_257_828_913_17;

#[test]
fn c1_sign_reversal() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let g = coin();
    let s = simulate_ensemble(
        &g,
        Dynamic::Multiplicative,
        1.0,
        10,
        100_000,
        11,
        Some(&[10]),
        Execution::default(),
    )
    .unwrap();
    let mean = s.ensemble_mean_wealth[0];
    let growth = mean.ln() / 10.0;
    let growth_se = s.std_error[0] / mean / 10.0;
    let ensemble_ok = (growth - 1.05f64.ln()).abs() <= 3.0 * growth_se;

    let traj = simulate_trajectory(&g, Dynamic::Multiplicative, 1.0, 1_000_000, 12).unwrap();
    let rate = time_average_rate(&traj).unwrap();
    let time_ok = (rate - LN_TIME_AVERAGE).abs() <= 0.00137;
    let elapsed = start.elapsed();
    report(
        1,
        "sign reversal",
        ensemble_ok && time_ok && rate < 0.0 && growth > 0.0 && elapsed < Duration::from_secs(10),
        format!(
            "ensemble growth {growth:.5} (se {growth_se:.5}, want ln 1.05 = 0.04879), \
             time-average rate {rate:.5} (want {LN_TIME_AVERAGE:.5} +- 0.00137), {elapsed:.2?}"
        ),
    );
}

#[test]
fn c2_additive_rate() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let g = coin();
    let traj = simulate_trajectory(&g, Dynamic::Additive, 1.0, 1_000_000, 21).unwrap();
    let rate = time_average_rate(&traj).unwrap();
    let s = simulate_ensemble(
        &g,
        Dynamic::Additive,
        1.0,
        10,
        100_000,
        22,
        Some(&[10]),
        Execution::default(),
    )
    .unwrap();
    let (mean, se) = (s.ensemble_mean_wealth[0], s.std_error[0]);
    let elapsed = start.elapsed();
    report(
        2,
        "additive ergodic rate",
        (rate - 0.05).abs() <= 0.00135 && (mean - 1.5).abs() <= 3.0 * se && elapsed < Duration::from_secs(10),
        format!("time-average rate {rate:.5} (want 0.05 +- 0.00135), ensemble mean {mean:.4} (se {se:.4}, want 1.5), {elapsed:.2?}"),
    );
}

#[test]
fn c3_ergodicity_table() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let g = coin();
    let config = DiagnosticConfig::default();
    let mut reproduced = 0;
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let run = |dynamic, observables: &[ObservableKind]| {
            diagnose_observables(
                &g,
                dynamic,
                observables,
                1.0,
                100_000,
                10_000,
                seed,
                0.01,
                config,
                Execution::default(),
            )
            .unwrap()
        };
        let add = run(
            Dynamic::Additive,
            &[ObservableKind::WealthChange, ObservableKind::Wealth],
        );
        let mul = run(
            Dynamic::Multiplicative,
            &[ObservableKind::LogWealthChange, ObservableKind::WealthChange],
        );
        let got = [add[0].verdict, add[1].verdict, mul[0].verdict, mul[1].verdict];
        let want = [
            Verdict::Ergodic,
            Verdict::NonErgodic,
            Verdict::Ergodic,
            Verdict::NonErgodic,
        ];
        if got == want {
            reproduced += 1;
        } else {
            failures.push(seed);
        }
    }
    let elapsed = start.elapsed();
    report(
        3,
        "ergodicity classification",
        reproduced >= 99 && elapsed < Duration::from_secs(120),
        format!("{reproduced}/100 seeds reproduce all four verdicts (failed seeds {failures:?}), {elapsed:.2?}"),
    );
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn gamble_strategy() -> impl Strategy<Value = (Gamble, f64)> {
    (
        prop::collection::vec((0.01f64..1.0, -0.999f64..5.0), 1..8),
        0.1f64..100.0,
        prop::sample::select(vec![0.25, 1.0, 3.0]),
    )
        .prop_filter_map("distinct changes", |(raw, wealth, dt)| {
            let total: f64 = raw.iter().map(|r| r.0).sum();
            let scaled: Vec<(f64, f64)> = raw.iter().map(|&(p, c)| (p / total, c * wealth)).collect();
            Gamble::new(&scaled, dt).ok().map(|g| (g, wealth))
        })
}

fn lottery_strategy() -> impl Strategy<Value = (LotterySpec, f64)> {
    (any::<bool>(), 1usize..60, 0.1f64..100.0, 0.0f64..1.0).prop_map(|(menger, n_max, wealth, fraction)| {
        let family = if menger {
            LotteryFamily::menger()
        } else {
            LotteryFamily::StPetersburg
        };
        let free = family.build(n_max, 0.0).unwrap();
        // prices below both W and W + D(1) keep every criterion finite
        let price = fraction * wealth.min(free.bankruptcy_price(wealth)) * 0.999;
        (free.with_price(price).unwrap(), wealth)
    })
}

#[test]
fn c4_criteria_identities() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let config = Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    };
    let gambles = TestRunner::new(config.clone()).run(&gamble_strategy(), |(g, w)| {
        let linear = expected_utility_rate(&g, &Utility::Linear, w).unwrap();
        prop_assert!(
            close(linear, huygens_rate(&g)),
            "linear {linear} vs huygens {}",
            huygens_rate(&g)
        );
        let log = expected_utility_rate(&g, &Utility::Logarithmic, w).unwrap();
        let laplace = laplace_rate(&g, w).unwrap();
        prop_assert!(close(log, laplace), "log {log} vs laplace {laplace}");
        Ok(())
    });
    let lotteries = TestRunner::new(config).run(&lottery_strategy(), |(l, w)| {
        let change = l.laplace_change(w);
        let parts = menger_decomposition(&l, w).unwrap();
        let total = parts.total().finite().unwrap();
        prop_assert!(close(total, change), "decomposition {total} vs change {change}");
        let free = l.with_price(0.0).unwrap();
        let b = bernoulli_value(&free, w).unwrap().value;
        let dt_change = free.round_duration() * free.laplace_change(w);
        prop_assert!(close(b, dt_change), "bernoulli {b} vs {dt_change}");
        if let Ok(g) = free.to_gamble() {
            let rate = laplace_rate(&g, w).unwrap() * g.round_duration();
            prop_assert!(close(b, rate), "bernoulli {b} vs gamble laplace {rate}");
        }
        Ok(())
    });
    report(
        4,
        "criteria identities",
        gambles.is_ok() && lotteries.is_ok(),
        format!("1000 random gambles: {gambles:?}; 1000 random lotteries: {lotteries:?}"),
    );
}

#[test]
fn c5_st_petersburg_divergence() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for n in 1..=62usize {
        for price in [0.0, 1.0, 2.0, 3.5, 10.0, 1e6] {
            for dt in [1.0, 0.5, 4.0] {
                let l = st_petersburg(n, price).unwrap().with_round_duration(dt).unwrap();
                let oracle = (n as f64 / 2.0 - price * (1.0 - 2f64.powi(-(n as i32)))) / dt;
                checked += 1;
                if l.huygens_value() != Extended::Finite(oracle) {
                    mismatches.push((n, price, dt, l.huygens_value(), oracle));
                }
            }
        }
    }
    // each extra term adds 1/2 - P 2^-(n+1), positive for P < 2
    let grows = (1..62).all(|n| {
        st_petersburg(n + 1, 1.0).unwrap().huygens_value().to_f64()
            > st_petersburg(n, 1.0).unwrap().huygens_value().to_f64()
    });
    report(
        5,
        "St Petersburg divergence",
        mismatches.is_empty() && grows,
        format!(
            "{checked} cases bit-exact against n/2 - P(1 - 2^-n), mismatches {mismatches:?}, increasing in n: {grows}"
        ),
    );
}

#[test]
fn c6_menger_correction() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    // (a) approach W + D(1) down to gaps far below 1e-9 W
    let spec = st_petersburg(10, 0.0).unwrap();
    let bound = spec.bankruptcy_price(1.0);
    let sweep = price_sweep(&spec, 1.0, &approach_grid(bound, 20, 40), Execution::default()).unwrap();
    let finite: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .filter_map(|p| p.laplace.finite().map(|v| (p.gap, v)))
        .collect();
    let decreasing = finite.windows(2).all(|w| w[1].1 < w[0].1);
    let (last_gap, last_value) = *finite.last().unwrap();
    let ends_bankrupt = sweep.points.last().unwrap().laplace == Extended::NegInf;
    let a = decreasing && last_value < -20.0 && last_gap <= 1e-9 && ends_bankrupt;

    // (b) Menger family at P = 0.5, W = 1
    let n_values: Vec<usize> = (1..=40).collect();
    let values: Vec<f64> = nmax_sweep(LotteryFamily::menger(), 1.0, 0.5, &n_values, Execution::default())
        .unwrap()
        .points
        .iter()
        .map(|p| p.laplace.to_f64())
        .collect();
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let first_above = values.iter().position(|&v| v > 1e3).map(|i| n_values[i]);
    let b = increasing && first_above.is_some();

    // (c) never pay W + D(1) or more
    let mut worst = f64::NEG_INFINITY;
    let mut c = true;
    for family in [LotteryFamily::StPetersburg, LotteryFamily::menger()] {
        for n in 1..=50 {
            let l = family.build(n, 0.0).unwrap();
            let s = max_acceptable_price(&l, 1.0, 1e-9).unwrap();
            let bound = l.bankruptcy_price(1.0);
            c &= s.price < bound;
            worst = worst.max(s.price - bound);
        }
    }
    report(
        6,
        "Menger correction",
        a && b && c,
        format!(
            "(a) {} finite points strictly decreasing: {decreasing}, last {last_value:.3} at gap {last_gap:e}, ends -inf: {ends_bankrupt}; \
             (b) strictly increasing: {increasing}, exceeds 1e3 from n_max {first_above:?}; \
             (c) max(P* - (W + D(1))) = {worst:e}",
            finite.len()
        ),
    );
}

fn figure2(dir: &std::path::Path, exec: &str) -> Vec<(String, Vec<u8>)> {
    let args = [
        "gambles",
        "figure2",
        "--seed",
        "2024",
        "--exec",
        exec,
        "--out",
        dir.to_str().unwrap(),
    ];
    let cli = <Cli as clap::Parser>::try_parse_from(args).unwrap();
    execute(cli.command, &mut std::io::sink(), &mut std::io::sink()).unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn c7_determinism() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let first = figure2(dirs[0].path(), "parallel");
    let second = figure2(dirs[1].path(), "parallel");
    let serial = figure2(dirs[2].path(), "sequential");
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    report(
        7,
        "determinism",
        first == second && first == serial && names.len() == 3,
        format!(
            "files {names:?}; repeat identical: {}, serial vs parallel identical: {}",
            first == second,
            first == serial
        ),
    );
}

#[test]
fn c8_log_space_fidelity() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=5 {
        for wealth in [0.1, 0.5, 1.0, 10.0, 1e3] {
            let free = menger_lottery(n, 0.0).unwrap();
            let bound = free.bankruptcy_price(wealth);
            for fraction in [0.0, 0.01, 0.3, 0.7, 0.99, 0.999999] {
                let l = free.with_price(fraction * bound).unwrap();
                let log_space = l.laplace_change_log_space(wealth);
                let direct = l.laplace_change_direct(wealth).unwrap();
                let rel = (log_space - direct).abs() / log_space.abs().max(direct.abs());
                worst = worst.max(if log_space == direct { 0.0 } else { rel });
                cases += 1;
            }
        }
    }
    report(
        8,
        "log-space fidelity",
        worst <= 1e-10,
        format!("{cases} Menger lotteries with n_max <= 5, worst relative difference {worst:e}"),
    );
}
