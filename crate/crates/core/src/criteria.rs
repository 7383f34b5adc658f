//! Decision criteria for gambles and lotteries.
//!
//! * Huygens: expected rate of change of wealth, `⟨ΔW⟩/Δt`.
//! * Laplace: expected rate of change of log wealth, `⟨Δ ln W⟩/Δt`, which
//!   is the time-average growth rate under multiplicative repetition.
//! * Bernoulli: expected log gain of a free ticket minus the log loss of
//!   paying for it. It is not an expected change of anything and differs
//!   from Laplace's value whenever the price is positive.
//! * General expected utility, which reduces to Huygens for linear and to
//!   Laplace for logarithmic utility.

use thiserror::Error;

use crate::gamble::{check_wealth, log_ratio, Gamble, GambleError, Utility, UtilityError};
use crate::lotteries::{LotterySpec, TermPath};
use crate::value::Extended;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error(transparent)]
    Gamble(#[from] GambleError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error("price {price} is not below wealth {wealth}; purchase loss diverges")]
    PriceExceedsWealth { price: f64, wealth: f64 },
}

/// Huygens' criterion, `(1/Δt) Σ p(n) ΔW(n)`.
pub fn huygens_rate(gamble: &Gamble) -> f64 {
    gamble.mean_change() / gamble.round_duration()
}

/// Laplace's criterion, `(1/Δt) Σ p(n) ln((W + ΔW(n))/W)`.
///
/// Returns `-inf` if any outcome takes wealth to zero or below; that is a
/// valid result (the absorbing boundary), not an error.
pub fn laplace_rate(gamble: &Gamble, wealth: f64) -> Result<f64, CriteriaError> {
    check_wealth(wealth)?;
    if wealth + gamble.worst_change() <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let mean_log: f64 = gamble
        .outcomes()
        .iter()
        .map(|o| o.probability * log_ratio(wealth, o.wealth_change))
        .sum();
    Ok(mean_log / gamble.round_duration())
}

/// `(1/Δt) Σ p(n) [U(W + ΔW(n)) - U(W)]`.
///
/// Logarithmic utility returns `-inf` past the absorbing boundary; the
/// other utilities report a domain error there.
pub fn expected_utility_rate(gamble: &Gamble, utility: &Utility, wealth: f64) -> Result<f64, CriteriaError> {
    let mut total = 0.0;
    for o in gamble.outcomes() {
        let change = utility.change(wealth, o.wealth_change)?;
        if change == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += o.probability * change;
    }
    Ok(total / gamble.round_duration())
}

/// The two parts of Bernoulli's criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliDecomposition {
    /// `⟨ΔU⁺⟩ = Σ p(n) ln((W + D(n))/W)`, the gain from a free ticket.
    pub expected_gain: f64,
    /// `ΔU⁻ = ln(W/(W - P))`, the loss on paying for the ticket.
    pub purchase_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliReport {
    /// `expected_gain - purchase_loss`
    pub value: f64,
    pub decomposition: BernoulliDecomposition,
}

/// Bernoulli's criterion for a lottery ticket. The gain term uses
/// `W + D(n)`, not `W + D(n) - P`.
///
/// Fails with [`CriteriaError::PriceExceedsWealth`] when `P >= W`; see
/// [`bernoulli_value_extended`] for the sentinel form.
pub fn bernoulli_value(lottery: &LotterySpec, wealth: f64) -> Result<BernoulliReport, CriteriaError> {
    check_wealth(wealth)?;
    let price = lottery.price();
    if price >= wealth {
        return Err(CriteriaError::PriceExceedsWealth { price, wealth });
    }
    let decomposition = BernoulliDecomposition {
        expected_gain: free_ticket_gain(lottery, wealth),
        purchase_loss: -(-price / wealth).ln_1p(),
    };
    Ok(BernoulliReport {
        value: decomposition.expected_gain - decomposition.purchase_loss,
        decomposition,
    })
}

/// Bernoulli's criterion with `P >= W` mapped to `(-inf, gain, +inf)`.
pub fn bernoulli_value_extended(
    lottery: &LotterySpec,
    wealth: f64,
) -> Result<(Extended, BernoulliDecomposition), CriteriaError> {
    match bernoulli_value(lottery, wealth) {
        Ok(r) => Ok((Extended::from(r.value), r.decomposition)),
        Err(CriteriaError::PriceExceedsWealth { .. }) => Ok((
            Extended::NegInf,
            BernoulliDecomposition {
                expected_gain: free_ticket_gain(lottery, wealth),
                purchase_loss: f64::INFINITY,
            },
        )),
        Err(e) => Err(e),
    }
}

fn free_ticket_gain(lottery: &LotterySpec, wealth: f64) -> f64 {
    let free = lottery.with_price(0.0).expect("zero is a valid price");
    free.weighted_log_terms(wealth, TermPath::Hybrid).sum()
}

/// Expected log-utility change of a lottery split into the term of the
/// smallest payout and the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MengerDecomposition {
    /// `p(1) ln((W + D(1) - P)/W)`; `-inf` once `P >= W + D(1)`.
    pub first_term: f64,
    /// `Σ_{n>=2} p(n) ln((W + D(n) - P)/W)`
    pub tail_sum: f64,
}

impl MengerDecomposition {
    /// `first_term + tail_sum`, indeterminate for `-inf + inf`.
    pub fn total(&self) -> Extended {
        Extended::from(self.first_term) + Extended::from(self.tail_sum)
    }
}

pub fn menger_decomposition(lottery: &LotterySpec, wealth: f64) -> Result<MengerDecomposition, CriteriaError> {
    check_wealth(wealth)?;
    let mut terms = lottery.weighted_log_terms(wealth, TermPath::Hybrid);
    let first_term = terms.next().expect("n_max >= 1");
    Ok(MengerDecomposition {
        first_term,
        tail_sum: terms.sum(),
    })
}

/// All criteria for one gamble at one wealth.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub evaluation_wealth: f64,
    pub huygens_rate: f64,
    /// May be `-inf`.
    pub laplace_rate: f64,
    pub utility: Utility,
    pub expected_utility_rate: Result<f64, UtilityError>,
    pub bankruptcy_outcome: Option<usize>,
    /// Present when the gamble came from a lottery.
    pub lottery: Option<LotteryCriteria>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LotteryCriteria {
    pub price: f64,
    pub n_max: usize,
    /// May be `-inf` (with `purchase_loss = +inf`) when `P >= W`.
    pub bernoulli_value: Extended,
    pub bernoulli: BernoulliDecomposition,
    pub menger: MengerDecomposition,
    /// Expected log-utility change per round, `⟨ΔU_B⟩`.
    pub laplace_change: Extended,
    pub huygens_value: Extended,
}

pub fn evaluate_gamble(gamble: &Gamble, wealth: f64, utility: Utility) -> Result<CriterionReport, CriteriaError> {
    let laplace_rate = laplace_rate(gamble, wealth)?;
    let bankruptcy_outcome = match gamble.bankruptcy_outcome(wealth) {
        Ok(n) => n,
        Err(GambleError::NegativeFactor { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let expected_utility_rate = match expected_utility_rate(gamble, &utility, wealth) {
        Ok(v) => Ok(v),
        Err(CriteriaError::Utility(e)) => Err(e),
        Err(e) => return Err(e),
    };
    Ok(CriterionReport {
        evaluation_wealth: wealth,
        huygens_rate: huygens_rate(gamble),
        laplace_rate,
        utility,
        expected_utility_rate,
        bankruptcy_outcome,
        lottery: None,
    })
}

/// Criteria for a lottery. Gamble-level rates are only available when all
/// payouts are finite; otherwise they come from the log-space lottery
/// evaluation.
pub fn evaluate_lottery(
    lottery: &LotterySpec,
    wealth: f64,
    utility: Utility,
) -> Result<(Option<CriterionReport>, LotteryCriteria), CriteriaError> {
    let (bernoulli_value, bernoulli) = bernoulli_value_extended(lottery, wealth)?;
    let menger = menger_decomposition(lottery, wealth)?;
    let criteria = LotteryCriteria {
        price: lottery.price(),
        n_max: lottery.n_max(),
        bernoulli_value,
        bernoulli,
        menger,
        laplace_change: menger.total(),
        huygens_value: lottery.huygens_value(),
    };
    let report = match lottery.to_gamble() {
        Ok(g) => Some(CriterionReport {
            lottery: Some(criteria),
            ..evaluate_gamble(&g, wealth, utility)?
        }),
        Err(_) => None,
    };
    Ok((report, criteria))
}
