//! Empirical check of the ergodic property for an observable: its
//! expectation should not depend on time, and its finite-time average along
//! one long trajectory should converge to that expectation.
//!
//! Two statistics are computed.
//!
//! Stationarity: an ensemble of `N` realizations is run over geometrically
//! growing windows of rounds `[1, L]`, `(L, 2L]`, `(2L, 4L]`, ... Each
//! realization contributes its mean of the observable within each window.
//! Window `k` is compared with window 0 through
//! `z_k = (m_k - m_0) / sqrt(se_k² + se_0²)` and the statistic is `max |z_k|`.
//!
//! Convergence: one further trajectory of `T` rounds gives the time average
//! `a` with a batch-means standard error `se_a`; the statistic is
//! `|a - m_0| / sqrt(se_a² + se_0²)`.
//!
//! Wealth and its increments are heavy tailed under multiplicative
//! dynamics, so critical values come from Chebyshev's inequality with a
//! Bonferroni correction rather than from normal quantiles:
//! `sqrt(comparisons / threshold)`. A true stationary, convergent observable
//! is then rejected with probability at most `threshold` whatever the
//! distribution of the estimates.

use thiserror::Error;

use crate::dynamics::{Dynamic, Moments, SimError, Walk, BLOCK};
use crate::exec::{self, Execution};
use crate::gamble::Gamble;
use crate::rng::{derive_seed, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicityError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("significance threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("the long trajectory needs at least one round")]
    NoRounds,
    #[error("standard errors need at least two realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("need at least two windows of at least one round, got {windows} windows of first length {first_window}")]
    InvalidWindows { windows: usize, first_window: usize },
    #[error("need at least one batch")]
    NoBatches,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObservableKind {
    /// `W(τ)`.
    Wealth,
    /// `W(τ) - W(τ-1)`.
    WealthChange,
    /// `ln W(τ) - ln W(τ-1)`.
    LogWealthChange,
}

impl ObservableKind {
    pub const ALL: [ObservableKind; 3] = [
        ObservableKind::Wealth,
        ObservableKind::WealthChange,
        ObservableKind::LogWealthChange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObservableKind::Wealth => "wealth",
            ObservableKind::WealthChange => "delta-w",
            ObservableKind::LogWealthChange => "delta-log-w",
        }
    }

    #[inline]
    fn observe(self, walk: &Walk, before: f64, after: f64) -> f64 {
        match (self, walk.dynamic) {
            (ObservableKind::Wealth, _) => walk.wealth(after),
            (ObservableKind::WealthChange, _) => walk.wealth(after) - walk.wealth(before),
            (ObservableKind::LogWealthChange, Dynamic::Multiplicative) => after - before,
            (ObservableKind::LogWealthChange, Dynamic::Additive) => {
                if after > 0.0 && before > 0.0 {
                    after.ln() - before.ln()
                } else {
                    f64::NAN
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ergodic,
    NonErgodic,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Ergodic => "ergodic",
            Verdict::NonErgodic => "non_ergodic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Window layout and batching for [`diagnose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagnosticConfig {
    pub windows: usize,
    /// Length of window 0; window `k` ends at round `first_window · 2^k`.
    pub first_window: usize,
    /// Batches for the long-trajectory standard error (capped at `T`).
    pub batches: usize,
}

impl Default for DiagnosticConfig {
    fn default() -> Self {
        DiagnosticConfig {
            windows: 8,
            first_window: 4,
            batches: 32,
        }
    }
}

impl DiagnosticConfig {
    /// Rounds simulated by each ensemble member.
    pub fn horizon(&self) -> usize {
        self.first_window << (self.windows - 1)
    }

    /// Inclusive round ranges of the windows.
    pub fn window_bounds(&self) -> Vec<(usize, usize)> {
        (0..self.windows)
            .map(|k| {
                let end = self.first_window << k;
                let start = if k == 0 { 1 } else { (self.first_window << (k - 1)) + 1 };
                (start, end)
            })
            .collect()
    }

    fn validate(&self) -> Result<(), ErgodicityError> {
        if self.windows < 2 || self.first_window == 0 || self.windows > 40 {
            return Err(ErgodicityError::InvalidWindows {
                windows: self.windows,
                first_window: self.first_window,
            });
        }
        if self.batches == 0 {
            return Err(ErgodicityError::NoBatches);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestStatistic {
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

impl TestStatistic {
    fn new(statistic: f64, critical: f64) -> Self {
        TestStatistic {
            statistic,
            critical,
            passed: statistic <= critical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticParams {
    pub rounds: usize,
    pub realizations: usize,
    pub seed: u64,
    pub threshold: f64,
    pub config: DiagnosticConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityVerdict {
    pub observable: ObservableKind,
    pub dynamic: Dynamic,
    pub expectation_stationary: TestStatistic,
    pub time_average_converges: TestStatistic,
    pub verdict: Verdict,
    /// Some realization or the long trajectory produced a non-finite
    /// observable (bankruptcy, or a log of non-positive wealth).
    pub bankrupt: bool,
    pub window_bounds: Vec<(usize, usize)>,
    pub window_means: Vec<f64>,
    pub window_std_errors: Vec<f64>,
    /// Exact expectation of each window mean, where a closed form exists.
    pub expected_window_means: Option<Vec<f64>>,
    pub time_average: f64,
    pub time_average_std_error: f64,
    pub params: DiagnosticParams,
}

/// Standardized discrepancy; `0/0` counts as agreement.
fn z_score(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se == 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / se
    }
}

#[allow(clippy::too_many_arguments)]
pub fn diagnose(
    gamble: &Gamble,
    dynamic: Dynamic,
    observable: ObservableKind,
    initial_wealth: f64,
    rounds: usize,
    realizations: usize,
    seed: u64,
    threshold: f64,
    exec: Execution,
) -> Result<ErgodicityVerdict, ErgodicityError> {
    let mut v = diagnose_observables(
        gamble,
        dynamic,
        &[observable],
        initial_wealth,
        rounds,
        realizations,
        seed,
        threshold,
        DiagnosticConfig::default(),
        exec,
    )?;
    Ok(v.remove(0))
}

/// Diagnoses several observables from one shared set of simulations.
/// Each verdict equals the one [`diagnose`] gives for that observable alone.
#[allow(clippy::too_many_arguments)]
pub fn diagnose_observables(
    gamble: &Gamble,
    dynamic: Dynamic,
    observables: &[ObservableKind],
    initial_wealth: f64,
    rounds: usize,
    realizations: usize,
    seed: u64,
    threshold: f64,
    config: DiagnosticConfig,
    exec: Execution,
) -> Result<Vec<ErgodicityVerdict>, ErgodicityError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ErgodicityError::InvalidThreshold(threshold));
    }
    if rounds == 0 {
        return Err(ErgodicityError::NoRounds);
    }
    if realizations < 2 {
        return Err(ErgodicityError::TooFewRealizations(realizations));
    }
    config.validate()?;
    let walk = Walk::new(gamble, dynamic, initial_wealth)?;

    let windows = ensemble_windows(&walk, observables, realizations, seed, &config, exec);
    let long: Vec<LongRun> = {
        let mut rng = Stream::new(derive_seed(seed, realizations as u64));
        long_run(&walk, observables, rounds, config.batches.min(rounds), &mut rng)
    };

    let k = config.windows;
    let critical_stationary = ((k - 1) as f64 / threshold).sqrt();
    let critical_convergence = (1.0 / threshold).sqrt();
    let params = DiagnosticParams {
        rounds,
        realizations,
        seed,
        threshold,
        config,
    };

    Ok(observables
        .iter()
        .enumerate()
        .map(|(i, &observable)| {
            let (moments, ensemble_finite) = &windows[i];
            let run = &long[i];
            let means: Vec<f64> = moments.iter().map(|m| m.mean).collect();
            let ses: Vec<f64> = moments.iter().map(Moments::std_error).collect();
            let bankrupt = !(*ensemble_finite && run.finite);

            let stationary = (1..k)
                .map(|j| z_score(means[j] - means[0], ses[j].hypot(ses[0])))
                .fold(0.0, f64::max);
            let converge = z_score(run.mean - means[0], run.std_error.hypot(ses[0]));
            let (expectation_stationary, time_average_converges) = if bankrupt {
                (
                    TestStatistic::new(f64::NAN, critical_stationary),
                    TestStatistic::new(f64::NAN, critical_convergence),
                )
            } else {
                (
                    TestStatistic::new(stationary, critical_stationary),
                    TestStatistic::new(converge, critical_convergence),
                )
            };
            let verdict = if bankrupt || stationary.is_nan() || converge.is_nan() {
                Verdict::Inconclusive
            } else if expectation_stationary.passed && time_average_converges.passed {
                Verdict::Ergodic
            } else {
                Verdict::NonErgodic
            };
            ErgodicityVerdict {
                observable,
                dynamic,
                expectation_stationary,
                time_average_converges,
                verdict,
                bankrupt,
                window_bounds: config.window_bounds(),
                window_means: means,
                window_std_errors: ses,
                expected_window_means: expected_window_means(gamble, dynamic, observable, initial_wealth, &config),
                time_average: run.mean,
                time_average_std_error: run.std_error,
                params: params.clone(),
            }
        })
        .collect())
}

/// Per-observable window moments over the ensemble, plus whether every
/// observation was finite.
fn ensemble_windows(
    walk: &Walk,
    observables: &[ObservableKind],
    realizations: usize,
    seed: u64,
    config: &DiagnosticConfig,
    exec: Execution,
) -> Vec<(Vec<Moments>, bool)> {
    let bounds = config.window_bounds();
    let horizon = config.horizon();
    let blocks = exec::blocks(realizations, BLOCK);
    let empty = || vec![(vec![Moments::default(); bounds.len()], true); observables.len()];

    let partial = exec.map(blocks.len(), |b| {
        let mut acc = empty();
        let mut sums = vec![0.0; observables.len()];
        for nu in blocks[b].clone() {
            let mut rng = Stream::new(derive_seed(seed, nu as u64));
            let mut state = walk.start;
            let mut window = 0;
            for tau in 1..=horizon {
                let next = walk.advance(state, walk.draw(&mut rng));
                for (o, kind) in observables.iter().enumerate() {
                    let x = kind.observe(walk, state, next);
                    if !x.is_finite() {
                        acc[o].1 = false;
                    }
                    sums[o] += x;
                }
                state = next;
                let (start, end) = bounds[window];
                if tau == end {
                    let len = (end - start + 1) as f64;
                    for o in 0..observables.len() {
                        acc[o].0[window].push(sums[o] / len);
                        sums[o] = 0.0;
                    }
                    window += 1;
                }
            }
        }
        acc
    });

    partial.into_iter().fold(empty(), |acc, block| {
        acc.into_iter()
            .zip(block)
            .map(|((ma, fa), (mb, fb))| (ma.into_iter().zip(mb).map(|(a, b)| a.merge(b)).collect(), fa && fb))
            .collect()
    })
}

struct LongRun {
    mean: f64,
    std_error: f64,
    finite: bool,
}

fn long_run(
    walk: &Walk,
    observables: &[ObservableKind],
    rounds: usize,
    batches: usize,
    rng: &mut Stream,
) -> Vec<LongRun> {
    let mut total = vec![0.0; observables.len()];
    let mut batch_sum = vec![0.0; observables.len()];
    let mut batch_means = vec![Moments::default(); observables.len()];
    let mut finite = vec![true; observables.len()];
    let mut state = walk.start;
    let mut batch = 0;
    let mut batch_start = 0;
    for i in 0..rounds {
        let next = walk.advance(state, walk.draw(rng));
        for (o, kind) in observables.iter().enumerate() {
            let x = kind.observe(walk, state, next);
            if !x.is_finite() {
                finite[o] = false;
            }
            total[o] += x;
            batch_sum[o] += x;
        }
        state = next;
        // batch b covers rounds [b·T/B, (b+1)·T/B)
        let batch_end = ((batch + 1) as u128 * rounds as u128 / batches as u128) as usize;
        if i + 1 == batch_end {
            let len = (batch_end - batch_start) as f64;
            for o in 0..observables.len() {
                batch_means[o].push(batch_sum[o] / len);
                batch_sum[o] = 0.0;
            }
            batch += 1;
            batch_start = batch_end;
        }
    }
    (0..observables.len())
        .map(|o| LongRun {
            mean: total[o] / rounds as f64,
            std_error: if batches > 1 { batch_means[o].std_error() } else { 0.0 },
            finite: finite[o],
        })
        .collect()
}

/// Exact `E[window mean]` from `⟨ΔW⟩`, `⟨r⟩` and `⟨ln r⟩`.
pub fn expected_window_means(
    gamble: &Gamble,
    dynamic: Dynamic,
    observable: ObservableKind,
    initial_wealth: f64,
    config: &DiagnosticConfig,
) -> Option<Vec<f64>> {
    let per_round: Box<dyn Fn(usize) -> f64> = match (dynamic, observable) {
        (Dynamic::Additive, ObservableKind::Wealth) => {
            let mu = gamble.mean_change();
            Box::new(move |tau| initial_wealth + mu * tau as f64)
        }
        (Dynamic::Additive, ObservableKind::WealthChange) => {
            let mu = gamble.mean_change();
            Box::new(move |_| mu)
        }
        (Dynamic::Additive, ObservableKind::LogWealthChange) => return None,
        (Dynamic::Multiplicative, kind) => {
            let factors = gamble.growth_factors(initial_wealth).ok()?;
            let mean_r = factors.mean(gamble);
            match kind {
                ObservableKind::Wealth => Box::new(move |tau| initial_wealth * mean_r.powi(tau as i32)),
                ObservableKind::WealthChange => {
                    Box::new(move |tau| initial_wealth * (mean_r - 1.0) * mean_r.powi(tau as i32 - 1))
                }
                ObservableKind::LogWealthChange => {
                    let mean_log: f64 = gamble
                        .probabilities()
                        .zip(&factors.factors)
                        .map(|(p, r)| p * r.ln())
                        .sum();
                    Box::new(move |_| mean_log)
                }
            }
        }
    };
    Some(
        config
            .window_bounds()
            .into_iter()
            .map(|(start, end)| (start..=end).map(&per_round).sum::<f64>() / (end - start + 1) as f64)
            .collect(),
    )
}
