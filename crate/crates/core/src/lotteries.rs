//! Parametric lotteries: truncated St Petersburg and Menger-type
//! double-exponential payouts, divergence sweeps and the maximum
//! acceptable ticket price.
//!
//! Payouts are carried as log-magnitudes so that double-exponential
//! families stay representable far beyond the `f64` range. Each payout
//! also keeps its exact finite value where one exists (dyadic payouts
//! are exact powers of two).

use thiserror::Error;

use crate::criteria;
use crate::exec::Execution;
use crate::gamble::{check_wealth, Gamble, GambleError};
use crate::value::Extended;

/// Largest truncation for which all built-in probabilities `2^-n` are
/// normal `f64` values. Dyadic probabilities and payouts are exact up to
/// this bound.
pub const MAX_NMAX: usize = 1022;

/// Log-space terms are used once `ln D(n)` exceeds this value.
pub const LOG_SPACE_THRESHOLD: f64 = 30.0;

pub const DEFAULT_PRICE_TOLERANCE: f64 = 1e-9;
pub const MAX_BISECTION_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LotteryError {
    #[error("n_max must be in 1..={MAX_NMAX}, got {0}")]
    NMaxOutOfRange(usize),
    #[error("ticket price must be finite and non-negative, got {0}")]
    InvalidPrice(f64),
    #[error("payout n={index} has invalid log-magnitude {ln_payout}")]
    InvalidPayout { index: usize, ln_payout: f64 },
    #[error("payout probabilities must be positive and sum to at most 1")]
    InvalidProbabilities,
    #[error("payout n={index} (ln D = {ln_payout}) does not fit in a finite f64")]
    OverflowToFinite { index: usize, ln_payout: f64 },
    #[error("Menger bases must be finite and greater than 1")]
    InvalidBase,
    #[error("price {price} is not below wealth {wealth}; purchase loss diverges")]
    PriceExceedsWealth { price: f64, wealth: f64 },
    #[error(transparent)]
    Gamble(#[from] GambleError),
}

/// One lottery payout `D(n) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Payout {
    /// `ln D(n)`; `-inf` for a zero payout.
    pub ln_value: f64,
    /// `D(n)`, `+inf` when it exceeds the `f64` range.
    pub value: f64,
}

impl Payout {
    pub fn from_ln(ln_value: f64) -> Self {
        Payout {
            ln_value,
            value: ln_value.exp(),
        }
    }

    pub fn from_value(value: f64) -> Self {
        Payout {
            ln_value: value.ln(),
            value,
        }
    }
}

/// Built-in lottery families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LotteryFamily {
    /// `p(n) = 2^-n`, `D(n) = 2^(n-1)`.
    StPetersburg,
    /// `p(n) = 2^-n`, `D(n) = outer^(inner^n)`; the classic choice is
    /// `outer = inner = e`, i.e. `D(n) = exp(exp(n))`.
    Menger { outer_base: f64, inner_base: f64 },
}

impl LotteryFamily {
    pub fn menger() -> Self {
        LotteryFamily::Menger {
            outer_base: std::f64::consts::E,
            inner_base: std::f64::consts::E,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LotteryFamily::StPetersburg => "st_petersburg",
            LotteryFamily::Menger { .. } => "menger",
        }
    }

    pub fn build(&self, n_max: usize, price: f64) -> Result<LotterySpec, LotteryError> {
        match *self {
            LotteryFamily::StPetersburg => st_petersburg(n_max, price),
            LotteryFamily::Menger { outer_base, inner_base } => {
                menger_lottery_with_bases(n_max, price, outer_base, inner_base)
            }
        }
    }

    /// Whether `Σ p(n) ln D(n)` diverges as `n_max → ∞`, i.e. whether the
    /// expected log-utility change grows without bound at any price below
    /// `W + D(1)`.
    pub fn log_utility_diverges(&self) -> bool {
        match *self {
            LotteryFamily::StPetersburg => false,
            // Σ 2^-n inner^n ln(outer)
            LotteryFamily::Menger { inner_base, .. } => inner_base >= 2.0,
        }
    }
}

/// A lottery truncated at `n_max` payouts. Any run past `n_max` is void:
/// the remaining probability sits on a null outcome that leaves wealth
/// unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct LotterySpec {
    family: Option<LotteryFamily>,
    payouts: Vec<Payout>,
    probabilities: Vec<f64>,
    null_probability: f64,
    price: f64,
    round_duration: f64,
}

fn check_nmax(n_max: usize) -> Result<(), LotteryError> {
    if (1..=MAX_NMAX).contains(&n_max) {
        Ok(())
    } else {
        Err(LotteryError::NMaxOutOfRange(n_max))
    }
}

fn check_price(price: f64) -> Result<(), LotteryError> {
    if price >= 0.0 && price.is_finite() {
        Ok(())
    } else {
        Err(LotteryError::InvalidPrice(price))
    }
}

fn dyadic(n_max: usize) -> Vec<f64> {
    (1..=n_max).map(|n| 2f64.powi(-(n as i32))).collect()
}

pub fn st_petersburg(n_max: usize, price: f64) -> Result<LotterySpec, LotteryError> {
    check_nmax(n_max)?;
    check_price(price)?;
    let payouts = (1..=n_max)
        .map(|n| Payout {
            ln_value: (n - 1) as f64 * std::f64::consts::LN_2,
            value: 2f64.powi(n as i32 - 1),
        })
        .collect();
    Ok(LotterySpec {
        family: Some(LotteryFamily::StPetersburg),
        payouts,
        probabilities: dyadic(n_max),
        null_probability: 2f64.powi(-(n_max as i32)),
        price,
        round_duration: 1.0,
    })
}

/// Menger's lottery with `D(n) = exp(exp(n))`.
pub fn menger_lottery(n_max: usize, price: f64) -> Result<LotterySpec, LotteryError> {
    LotteryFamily::menger().build(n_max, price)
}

pub fn menger_lottery_with_bases(
    n_max: usize,
    price: f64,
    outer_base: f64,
    inner_base: f64,
) -> Result<LotterySpec, LotteryError> {
    check_nmax(n_max)?;
    check_price(price)?;
    if !(outer_base > 1.0 && outer_base.is_finite() && inner_base > 1.0 && inner_base.is_finite()) {
        return Err(LotteryError::InvalidBase);
    }
    let ln_outer = outer_base.ln();
    let payouts = (1..=n_max)
        .map(|n| {
            let exponent = if inner_base == std::f64::consts::E {
                (n as f64).exp()
            } else {
                inner_base.powi(n as i32)
            };
            if outer_base == std::f64::consts::E {
                Payout::from_ln(exponent)
            } else {
                // powf keeps integer powers of an exact base exact
                Payout {
                    ln_value: exponent * ln_outer,
                    value: outer_base.powf(exponent),
                }
            }
        })
        .collect();
    Ok(LotterySpec {
        family: Some(LotteryFamily::Menger { outer_base, inner_base }),
        payouts,
        probabilities: dyadic(n_max),
        null_probability: 2f64.powi(-(n_max as i32)),
        price,
        round_duration: 1.0,
    })
}

impl LotterySpec {
    /// A custom lottery from payout log-magnitudes and probabilities; the
    /// probability left over goes to the null outcome.
    pub fn new(ln_payouts: &[f64], probabilities: &[f64], price: f64) -> Result<Self, LotteryError> {
        check_nmax(ln_payouts.len())?;
        check_price(price)?;
        if probabilities.len() != ln_payouts.len() || probabilities.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(LotteryError::InvalidProbabilities);
        }
        for (i, &ln) in ln_payouts.iter().enumerate() {
            if ln.is_nan() || ln == f64::INFINITY {
                return Err(LotteryError::InvalidPayout {
                    index: i + 1,
                    ln_payout: ln,
                });
            }
        }
        let paid: f64 = probabilities.iter().sum();
        let null_probability = 1.0 - paid;
        if null_probability < -crate::gamble::PROBABILITY_SUM_TOLERANCE {
            return Err(LotteryError::InvalidProbabilities);
        }
        Ok(LotterySpec {
            family: None,
            payouts: ln_payouts.iter().map(|&ln| Payout::from_ln(ln)).collect(),
            probabilities: probabilities.to_vec(),
            null_probability: null_probability.max(0.0),
            price,
            round_duration: 1.0,
        })
    }

    pub fn with_price(&self, price: f64) -> Result<Self, LotteryError> {
        check_price(price)?;
        Ok(LotterySpec { price, ..self.clone() })
    }

    pub fn with_round_duration(self, round_duration: f64) -> Result<Self, LotteryError> {
        if !(round_duration > 0.0 && round_duration.is_finite()) {
            return Err(GambleError::NonPositiveDuration(round_duration).into());
        }
        Ok(LotterySpec { round_duration, ..self })
    }

    pub fn family(&self) -> Option<LotteryFamily> {
        self.family
    }

    pub fn n_max(&self) -> usize {
        self.payouts.len()
    }

    pub fn payouts(&self) -> &[Payout] {
        &self.payouts
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Probability that the lottery is declared void.
    pub fn null_probability(&self) -> f64 {
        self.null_probability
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn round_duration(&self) -> f64 {
        self.round_duration
    }

    /// Total probability, summed smallest term first so that dyadic
    /// probabilities add up to exactly 1.
    pub fn total_probability(&self) -> f64 {
        self.probabilities
            .iter()
            .rev()
            .fold(self.null_probability, |acc, p| acc + p)
    }

    /// Smallest payout `D(1)` (the minimum over all payouts for custom
    /// lotteries).
    pub fn smallest_payout(&self) -> Payout {
        *self
            .payouts
            .iter()
            .min_by(|a, b| a.ln_value.total_cmp(&b.ln_value))
            .expect("n_max >= 1")
    }

    /// The price `W + D(1)` at which bankruptcy becomes possible.
    pub fn bankruptcy_price(&self, wealth: f64) -> f64 {
        wealth + self.smallest_payout().value
    }

    /// Expected wealth change per unit time, `(Σ p D - P Σ p) / Δt`.
    /// `+inf` once any payout exceeds the `f64` range.
    pub fn huygens_value(&self) -> Extended {
        if self.payouts.iter().any(|d| d.value.is_infinite()) {
            return Extended::PosInf;
        }
        let payout_mean: f64 = self
            .payouts
            .iter()
            .zip(&self.probabilities)
            .map(|(d, p)| p * d.value)
            .sum();
        let paid_probability = 1.0 - self.null_probability;
        Extended::from((payout_mean - self.price * paid_probability) / self.round_duration)
    }

    /// Converts to a gamble with `ΔW(n) = D(n) - P` plus the null outcome
    /// `ΔW = 0`. Outcomes with equal wealth change (for instance
    /// `P = D(k)`, which coincides with the null outcome) are merged by
    /// adding their probabilities.
    pub fn to_gamble(&self) -> Result<Gamble, LotteryError> {
        let mut raw: Vec<(f64, f64)> = Vec::with_capacity(self.n_max() + 1);
        for (i, (d, &p)) in self.payouts.iter().zip(&self.probabilities).enumerate() {
            if d.value.is_infinite() {
                return Err(LotteryError::OverflowToFinite {
                    index: i + 1,
                    ln_payout: d.ln_value,
                });
            }
            raw.push((p, d.value - self.price));
        }
        if self.null_probability > 0.0 {
            raw.push((self.null_probability, 0.0));
        }
        raw.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (p, dw) in raw {
            match merged.last_mut() {
                Some(last) if last.1 == dw => last.0 += p,
                _ => merged.push((p, dw)),
            }
        }
        Ok(Gamble::new(&merged, self.round_duration)?)
    }

    /// Expected log-utility change `⟨ΔU_B⟩ = Σ p(n) ln((W + D(n) - P)/W)`,
    /// with hybrid evaluation: direct for moderate payouts, log-space for
    /// large ones. The null outcome contributes nothing.
    pub fn laplace_change(&self, wealth: f64) -> f64 {
        self.weighted_log_terms(wealth, TermPath::Hybrid).sum()
    }

    /// [`LotterySpec::laplace_change`] with every term in log-space.
    pub fn laplace_change_log_space(&self, wealth: f64) -> f64 {
        self.weighted_log_terms(wealth, TermPath::LogSpace).sum()
    }

    /// [`LotterySpec::laplace_change`] from the finite payout values.
    pub fn laplace_change_direct(&self, wealth: f64) -> Result<f64, LotteryError> {
        if let Some((i, d)) = self.payouts.iter().enumerate().find(|(_, d)| d.value.is_infinite()) {
            return Err(LotteryError::OverflowToFinite {
                index: i + 1,
                ln_payout: d.ln_value,
            });
        }
        Ok(self.weighted_log_terms(wealth, TermPath::Direct).sum())
    }

    /// Expected log-utility change at the price `W + D(1) - gap`. Each
    /// term uses `W + D(n) - P = (D(n) - D(1)) + gap`, so the bankruptcy
    /// term keeps full precision as the gap shrinks.
    pub fn laplace_change_at_gap(&self, wealth: f64, gap: f64) -> f64 {
        let smallest = self.smallest_payout().value;
        let ln_wealth = wealth.ln();
        self.payouts
            .iter()
            .zip(&self.probabilities)
            .map(|(d, &p)| {
                let term = if d.ln_value > LOG_SPACE_THRESHOLD {
                    let rel = (gap - smallest) * (-d.ln_value).exp();
                    if rel <= -1.0 {
                        f64::NEG_INFINITY
                    } else {
                        d.ln_value + rel.ln_1p() - ln_wealth
                    }
                } else {
                    let net = (d.value - smallest) + gap;
                    if net <= 0.0 {
                        f64::NEG_INFINITY
                    } else if net < 0.5 * wealth {
                        // net - W would round to -W for gaps below an ulp of W
                        (net / wealth).ln()
                    } else {
                        ((net - wealth) / wealth).ln_1p()
                    }
                };
                p * term
            })
            .sum()
    }

    pub(crate) fn weighted_log_terms(&self, wealth: f64, path: TermPath) -> impl Iterator<Item = f64> + '_ {
        let price = self.price;
        self.payouts
            .iter()
            .zip(&self.probabilities)
            .map(move |(d, &p)| p * log_wealth_ratio(*d, wealth, price, path))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TermPath {
    Direct,
    LogSpace,
    Hybrid,
}

/// `ln((W + D - P) / W)`, `-inf` when `W + D - P <= 0`.
pub(crate) fn log_wealth_ratio(payout: Payout, wealth: f64, price: f64, path: TermPath) -> f64 {
    let use_log_space = match path {
        TermPath::Direct => false,
        TermPath::LogSpace => payout.ln_value.is_finite(),
        TermPath::Hybrid => payout.ln_value > LOG_SPACE_THRESHOLD,
    };
    if use_log_space {
        // ln(W + D - P) = ln D + ln(1 + (W - P)/D)
        let rel = (wealth - price) * (-payout.ln_value).exp();
        if rel <= -1.0 {
            return f64::NEG_INFINITY;
        }
        payout.ln_value + rel.ln_1p() - wealth.ln()
    } else {
        let slack = payout.value - price;
        if wealth + slack <= 0.0 {
            f64::NEG_INFINITY
        } else {
            (slack / wealth).ln_1p()
        }
    }
}

/// Which lottery parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Price,
    NMax,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Price => "price",
            SweepAxis::NMax => "n_max",
        }
    }
}

/// A point of a price sweep, given either as a price or as the gap
/// `W + D(1) - P` below the bankruptcy price. Gaps resolve prices far
/// closer to the bound than an `f64` price near `W + D(1)` can.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PricePoint {
    Price(f64),
    Gap(f64),
}

/// One row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n_max: usize,
    pub price: f64,
    /// `W + D(1) - P`
    pub gap: f64,
    /// Expected wealth change per unit time.
    pub huygens: Extended,
    /// Expected log-utility change per round, `⟨ΔU_B⟩`.
    pub laplace: Extended,
    /// Bernoulli's criterion; `-inf` once `P >= W`.
    pub bernoulli: Extended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub wealth: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn laplace_values(&self) -> Vec<Extended> {
        self.points.iter().map(|p| p.laplace).collect()
    }
}

fn sweep_point(spec: &LotterySpec, wealth: f64, gap: Option<f64>) -> SweepPoint {
    let bernoulli = match criteria::bernoulli_value(spec, wealth) {
        Ok(report) => Extended::from(report.value),
        Err(_) => Extended::NegInf,
    };
    let laplace = match gap {
        Some(gap) => spec.laplace_change_at_gap(wealth, gap),
        None => spec.laplace_change(wealth),
    };
    SweepPoint {
        n_max: spec.n_max(),
        price: spec.price(),
        gap: gap.unwrap_or_else(|| spec.bankruptcy_price(wealth) - spec.price()),
        huygens: spec.huygens_value(),
        laplace: Extended::from(laplace),
        bernoulli,
    }
}

/// Evaluates the criteria of `spec` at each price point. Points at or
/// beyond `W + D(1)` report `-inf`.
pub fn price_sweep(
    spec: &LotterySpec,
    wealth: f64,
    points: &[PricePoint],
    exec: Execution,
) -> Result<SweepResult, LotteryError> {
    check_wealth(wealth)?;
    let bound = spec.bankruptcy_price(wealth);
    let points = exec.try_map(points.len(), |i| match points[i] {
        PricePoint::Price(price) => Ok(sweep_point(&spec.with_price(price)?, wealth, None)),
        PricePoint::Gap(gap) => {
            if gap.is_nan() {
                return Err(LotteryError::InvalidPrice(bound - gap));
            }
            let priced = spec.with_price((bound - gap).max(0.0))?;
            Ok(sweep_point(&priced, wealth, Some(gap)))
        }
    })?;
    Ok(SweepResult {
        axis: SweepAxis::Price,
        wealth,
        points,
    })
}

/// Evaluates the criteria of a family at fixed price for each truncation.
pub fn nmax_sweep(
    family: LotteryFamily,
    wealth: f64,
    price: f64,
    n_max_values: &[usize],
    exec: Execution,
) -> Result<SweepResult, LotteryError> {
    check_wealth(wealth)?;
    let points = exec.try_map(n_max_values.len(), |i| {
        let spec = family.build(n_max_values[i], price)?;
        Ok::<_, LotteryError>(sweep_point(&spec, wealth, None))
    })?;
    Ok(SweepResult {
        axis: SweepAxis::NMax,
        wealth,
        points,
    })
}

/// Price points approaching `bound = W + D(1)`: prices `bound (1 - 2^-k)`
/// for `k = 0..steps`, then gaps `bound 10^-j` down to `bound 10^-fine_tail`,
/// then the bound itself and one point beyond it.
pub fn approach_grid(bound: f64, steps: usize, fine_tail: usize) -> Vec<PricePoint> {
    let mut points: Vec<PricePoint> = (0..steps)
        .map(|k| PricePoint::Price(bound * (1.0 - 2f64.powi(-(k as i32)))))
        .collect();
    let coarse_gap = if steps == 0 {
        f64::INFINITY
    } else {
        2f64.powi(-(steps as i32 - 1))
    };
    points.extend(
        (1..=fine_tail)
            .map(|j| 10f64.powi(-(j as i32)))
            .filter(|&rel| rel < coarse_gap)
            .map(|rel| PricePoint::Gap(bound * rel)),
    );
    points.push(PricePoint::Gap(0.0));
    points.push(PricePoint::Gap(-0.01 * bound));
    points
}

/// Result of the maximum-acceptable-price search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceSolution {
    /// Highest price found with a positive expected log-utility change;
    /// `0` when no positive price is acceptable.
    pub price: f64,
    /// False when even a free ticket has a non-positive expected change.
    pub acceptable: bool,
    /// Final bracket `(lo, hi)`: positive at `lo`, non-positive at `hi`.
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Bisects for the price where the expected log-utility change crosses
/// zero. The search interval is `(0, W + D(1))`; the result is the lower
/// end of the final bracket, so it is always strictly below `W + D(1)`
/// however fast the payouts grow.
pub fn max_acceptable_price(spec: &LotterySpec, wealth: f64, tolerance: f64) -> Result<PriceSolution, LotteryError> {
    check_wealth(wealth)?;
    let value_at = |price: f64| -> Result<f64, LotteryError> { Ok(spec.with_price(price)?.laplace_change(wealth)) };
    let bound = spec.bankruptcy_price(wealth);
    let free_ticket = value_at(0.0)?;
    if free_ticket.is_nan() || free_ticket <= 0.0 {
        return Ok(PriceSolution {
            price: 0.0,
            acceptable: false,
            bracket: (0.0, 0.0),
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, bound);
    let mut iterations = 0;
    while hi - lo > tolerance && iterations < MAX_BISECTION_ITERATIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if value_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(PriceSolution {
        price: lo,
        acceptable: true,
        bracket: (lo, hi),
        iterations,
    })
}

/// The double limit `lim_{P → W+D(1)} lim_{n_max → ∞} ⟨ΔU_B⟩`: the
/// indeterminate form `-inf + inf` when the inner limit diverges,
/// otherwise `-inf` from the bankruptcy term alone.
pub fn double_limit(family: LotteryFamily) -> Extended {
    let inner = if family.log_utility_diverges() {
        Extended::PosInf
    } else {
        Extended::Finite(0.0)
    };
    Extended::NegInf + inner
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_st_petersburg() {
        let s = st_petersburg(1, 0.0).unwrap();
        assert_eq!(s.payouts()[0].value, 1.0);
        assert_eq!(s.probabilities(), &[0.5]);
        assert_eq!(s.null_probability(), 0.5);
    }

    #[test]
    fn expected_payout_is_half_nmax() {
        assert_eq!(st_petersburg(10, 0.0).unwrap().huygens_value(), Extended::Finite(5.0));
        assert_eq!(st_petersburg(30, 0.0).unwrap().huygens_value(), Extended::Finite(15.0));
    }

    #[test]
    fn probabilities_sum_to_exactly_one() {
        for n in 1..=MAX_NMAX {
            assert_eq!(st_petersburg(n, 0.0).unwrap().total_probability(), 1.0, "n_max={n}");
        }
    }

    #[test]
    fn menger_payouts_in_log_space() {
        let m = menger_lottery(50, 0.0).unwrap();
        assert_eq!(m.payouts()[0].ln_value, std::f64::consts::E);
        assert!((m.payouts()[49].ln_value / 50f64.exp() - 1.0).abs() < 1e-15);
        assert!(m.payouts()[49].value.is_infinite());
        assert!(m.laplace_change(1.0).is_finite());
        assert_eq!(m.huygens_value(), Extended::PosInf);
    }

    #[test]
    fn custom_bases() {
        let m = menger_lottery_with_bases(3, 0.0, 2.0, 2.0).unwrap();
        let values: Vec<f64> = m.payouts().iter().map(|d| d.value).collect();
        assert_eq!(values, vec![4.0, 16.0, 256.0]);
        assert!(menger_lottery_with_bases(3, 0.0, 1.0, 2.0).is_err());
        assert!(LotteryFamily::Menger {
            outer_base: 2.0,
            inner_base: 2.0
        }
        .log_utility_diverges());
        assert!(!LotteryFamily::Menger {
            outer_base: 2.0,
            inner_base: 1.5
        }
        .log_utility_diverges());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(st_petersburg(0, 0.0), Err(LotteryError::NMaxOutOfRange(0)));
        assert_eq!(
            st_petersburg(MAX_NMAX + 1, 0.0),
            Err(LotteryError::NMaxOutOfRange(MAX_NMAX + 1))
        );
        assert_eq!(st_petersburg(3, -1.0), Err(LotteryError::InvalidPrice(-1.0)));
        assert!(LotterySpec::new(&[0.0, 1.0], &[0.7, 0.7], 0.0).is_err());
        assert!(LotterySpec::new(&[f64::INFINITY], &[0.5], 0.0).is_err());
    }

    #[test]
    fn gamble_merges_price_collisions() {
        // D = {1, 2}, P = 1: n=1 gives ΔW = 0, same as the void outcome
        let g = st_petersburg(2, 1.0).unwrap().to_gamble().unwrap();
        let outcomes: Vec<(f64, f64)> = g.outcomes().iter().map(|o| (o.probability, o.wealth_change)).collect();
        assert_eq!(outcomes, vec![(0.75, 0.0), (0.25, 1.0)]);
    }

    #[test]
    fn free_ticket_gamble_pays_payouts() {
        let g = st_petersburg(3, 0.0).unwrap().to_gamble().unwrap();
        let changes: Vec<f64> = g.wealth_changes().collect();
        assert_eq!(changes, vec![0.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn menger_gamble_overflows() {
        assert!(menger_lottery(5, 0.0).unwrap().to_gamble().is_ok());
        assert!(matches!(
            menger_lottery(10, 0.0).unwrap().to_gamble(),
            Err(LotteryError::OverflowToFinite { index: 7, .. })
        ));
    }

    #[test]
    fn log_space_matches_direct_for_moderate_payouts() {
        let m = menger_lottery(5, 0.5).unwrap();
        let direct = m.laplace_change_direct(1.0).unwrap();
        let logspace = m.laplace_change_log_space(1.0);
        assert!((direct - logspace).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn bankruptcy_term() {
        let s = st_petersburg(10, 2.0).unwrap();
        assert_eq!(s.bankruptcy_price(1.0), 2.0);
        assert_eq!(s.laplace_change(1.0), f64::NEG_INFINITY);
        assert_eq!(s.laplace_change_log_space(1.0), f64::NEG_INFINITY);
        assert!(s.with_price(1.999).unwrap().laplace_change(1.0).is_finite());
    }

    #[test]
    fn price_sweep_ends_in_minus_infinity() {
        let s = st_petersburg(10, 0.0).unwrap();
        let prices = approach_grid(s.bankruptcy_price(1.0), 20, 12);
        let r = price_sweep(&s, 1.0, &prices, Execution::Sequential).unwrap();
        let last = r.points.last().unwrap();
        assert_eq!(last.laplace, Extended::NegInf);
        assert_eq!(r.points[r.points.len() - 2].laplace, Extended::NegInf);
        assert_eq!(r.points[0].price, 0.0);
        assert_eq!(r.points[0].laplace, Extended::Finite(s.laplace_change(1.0)));
        assert!(r.points[..r.points.len() - 2]
            .iter()
            .all(|p| p.laplace.finite().is_some()));
    }

    #[test]
    fn gap_and_price_evaluations_agree() {
        for spec in [st_petersburg(12, 0.0).unwrap(), menger_lottery(8, 0.0).unwrap()] {
            let bound = spec.bankruptcy_price(1.0);
            for gap in [0.5, 0.25 * bound, 0.75 * bound] {
                let by_price = spec.with_price(bound - gap).unwrap().laplace_change(1.0);
                let by_gap = spec.laplace_change_at_gap(1.0, gap);
                assert!((by_price - by_gap).abs() <= 1e-12 * by_price.abs().max(1.0));
            }
            assert_eq!(spec.laplace_change_at_gap(1.0, 0.0), f64::NEG_INFINITY);
        }
    }

    #[test]
    fn nmax_one_is_a_single_term() {
        for family in [LotteryFamily::StPetersburg, LotteryFamily::menger()] {
            let r = nmax_sweep(family, 1.0, 0.5, &[1], Execution::Sequential).unwrap();
            let d1 = family.build(1, 0.0).unwrap().payouts()[0].value;
            let expected = 0.5 * (1.0 + d1 - 0.5f64).ln();
            let got = r.points[0].laplace.finite().unwrap();
            assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        }
    }

    #[test]
    fn worthless_lottery_has_zero_price() {
        let s = LotterySpec::new(&[f64::NEG_INFINITY, f64::NEG_INFINITY], &[0.25, 0.25], 0.0).unwrap();
        assert_eq!(s.payouts()[0].value, 0.0);
        let sol = max_acceptable_price(&s, 1.0, 1e-9).unwrap();
        assert_eq!(sol.price, 0.0);
        assert!(!sol.acceptable);
    }

    #[test]
    fn single_payout_price_is_the_payout() {
        // 0.5 ln(W + 1 - P) crosses zero at P = 1 for W = 1
        let s = st_petersburg(1, 0.0).unwrap();
        let sol = max_acceptable_price(&s, 1.0, 1e-12).unwrap();
        assert!((sol.price - 1.0).abs() < 1e-11);
        assert!(sol.price < 2.0);
    }

    #[test]
    fn double_limits() {
        assert_eq!(double_limit(LotteryFamily::menger()), Extended::Indeterminate);
        assert_eq!(double_limit(LotteryFamily::StPetersburg), Extended::NegInf);
    }
}
