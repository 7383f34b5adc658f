//! Gamble data model: outcomes, probabilities, wealth changes and the
//! growth factors they induce at a reference wealth.

use thiserror::Error;

/// Tolerance on the total probability of a gamble.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GambleError {
    #[error("a gamble needs at least one outcome")]
    Empty,
    #[error("probabilities sum to {sum}, expected 1 within {PROBABILITY_SUM_TOLERANCE:e}")]
    ProbabilitySum { sum: f64 },
    #[error("outcome {position} has probability {probability}, expected a value in (0, 1]")]
    NonPositiveProbability { position: usize, probability: f64 },
    #[error("outcome {position} has a non-finite wealth change {wealth_change}")]
    NonFiniteWealthChange { position: usize, wealth_change: f64 },
    #[error("outcomes {first} and {second} share the wealth change {wealth_change}")]
    DuplicateWealthChange {
        first: usize,
        second: usize,
        wealth_change: f64,
    },
    #[error("round duration must be strictly positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("reference wealth must be strictly positive and finite, got {0}")]
    NonPositiveWealth(f64),
    #[error(
        "outcome n={index} changes wealth by {wealth_change} at reference wealth {reference_wealth}; \
         wealth would become negative"
    )]
    NegativeFactor {
        index: usize,
        wealth_change: f64,
        reference_wealth: f64,
    },
}

/// A single outcome of a gamble. `index` is the 1-based label `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub index: usize,
    pub probability: f64,
    pub wealth_change: f64,
}

/// A validated gamble. Outcomes are sorted by strictly increasing wealth
/// change and labelled `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamble {
    outcomes: Vec<Outcome>,
    round_duration: f64,
}

impl Gamble {
    /// Validates raw `(probability, wealth_change)` pairs.
    ///
    /// Probabilities are stored exactly as given; a total off by more than
    /// [`PROBABILITY_SUM_TOLERANCE`] is rejected rather than renormalised.
    /// Equal wealth changes are rejected, never merged. Positions in the
    /// returned errors refer to the input order.
    pub fn new(raw: &[(f64, f64)], round_duration: f64) -> Result<Self, GambleError> {
        if raw.is_empty() {
            return Err(GambleError::Empty);
        }
        if !(round_duration > 0.0 && round_duration.is_finite()) {
            return Err(GambleError::NonPositiveDuration(round_duration));
        }
        for (position, &(probability, wealth_change)) in raw.iter().enumerate() {
            if !(probability > 0.0 && probability <= 1.0) {
                return Err(GambleError::NonPositiveProbability { position, probability });
            }
            if !wealth_change.is_finite() {
                return Err(GambleError::NonFiniteWealthChange {
                    position,
                    wealth_change,
                });
            }
        }
        let sum: f64 = raw.iter().map(|&(p, _)| p).sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(GambleError::ProbabilitySum { sum });
        }

        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].1.total_cmp(&raw[b].1));
        for pair in order.windows(2) {
            // -0.0 and 0.0 are the same wealth change
            if raw[pair[0]].1 == raw[pair[1]].1 {
                return Err(GambleError::DuplicateWealthChange {
                    first: pair[0].min(pair[1]),
                    second: pair[0].max(pair[1]),
                    wealth_change: raw[pair[0]].1,
                });
            }
        }
        let outcomes = order
            .iter()
            .enumerate()
            .map(|(i, &src)| Outcome {
                index: i + 1,
                probability: raw[src].0,
                wealth_change: raw[src].1,
            })
            .collect();
        Ok(Self {
            outcomes,
            round_duration,
        })
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn n_max(&self) -> usize {
        self.outcomes.len()
    }

    /// Duration `Δt` of one round.
    pub fn round_duration(&self) -> f64 {
        self.round_duration
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.outcomes.iter().map(|o| o.probability)
    }

    pub fn wealth_changes(&self) -> impl Iterator<Item = f64> + '_ {
        self.outcomes.iter().map(|o| o.wealth_change)
    }

    /// Smallest wealth change, `ΔW(1)`.
    pub fn worst_change(&self) -> f64 {
        self.outcomes[0].wealth_change
    }

    /// Expected wealth change per round, `⟨ΔW⟩`.
    pub fn mean_change(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.wealth_change).sum()
    }

    /// Per-round growth factors `r(n) = (W + ΔW(n)) / W` at reference wealth `W`.
    pub fn growth_factors(&self, reference_wealth: f64) -> Result<GrowthFactorSet, GambleError> {
        check_wealth(reference_wealth)?;
        let mut factors = Vec::with_capacity(self.outcomes.len());
        for o in &self.outcomes {
            let next = reference_wealth + o.wealth_change;
            if next < 0.0 {
                return Err(GambleError::NegativeFactor {
                    index: o.index,
                    wealth_change: o.wealth_change,
                    reference_wealth,
                });
            }
            factors.push(next / reference_wealth);
        }
        Ok(GrowthFactorSet {
            reference_wealth,
            factors,
        })
    }

    /// Returns the bankruptcy outcome `n*` if one exists, i.e. an outcome
    /// with `ΔW(n*) = -W` exactly. No tolerance is applied.
    pub fn bankruptcy_outcome(&self, reference_wealth: f64) -> Result<Option<usize>, GambleError> {
        Ok(self.growth_factors(reference_wealth)?.bankruptcy_outcome())
    }

    pub fn is_bankruptcy_possible(&self, reference_wealth: f64) -> Result<bool, GambleError> {
        Ok(self.bankruptcy_outcome(reference_wealth)?.is_some())
    }
}

pub(crate) fn check_wealth(wealth: f64) -> Result<(), GambleError> {
    if wealth > 0.0 && wealth.is_finite() {
        Ok(())
    } else {
        Err(GambleError::NonPositiveWealth(wealth))
    }
}

/// Growth factors of a gamble, fixed relative to the wealth just before
/// the first round.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFactorSet {
    pub reference_wealth: f64,
    pub factors: Vec<f64>,
}

impl GrowthFactorSet {
    /// 1-based label of the outcome with `r(n*) = 0`.
    pub fn bankruptcy_outcome(&self) -> Option<usize> {
        // factors are increasing, so only the first can be zero
        (self.factors.first() == Some(&0.0)).then_some(1)
    }

    /// Expected growth factor `⟨r⟩` under the given probabilities.
    pub fn mean(&self, gamble: &Gamble) -> f64 {
        self.factors
            .iter()
            .zip(gamble.probabilities())
            .map(|(r, p)| r * p)
            .sum()
    }

    /// Reconstructs `ΔW(n) = W (r(n) - 1)`.
    pub fn wealth_changes(&self) -> Vec<f64> {
        self.factors.iter().map(|r| self.reference_wealth * (r - 1.0)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UtilityError {
    #[error("{utility} utility is undefined at wealth {wealth}")]
    Domain { utility: &'static str, wealth: f64 },
    #[error("tabulated utility needs at least two points with strictly increasing wealth and utility")]
    NotIncreasing,
}

/// A piecewise-linear utility function through strictly increasing points.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedUtility {
    points: Vec<(f64, f64)>,
}

impl TabulatedUtility {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, UtilityError> {
        let increasing = points.len() >= 2
            && points.iter().all(|&(w, u)| w.is_finite() && u.is_finite())
            && points.windows(2).all(|p| p[1].0 > p[0].0 && p[1].1 > p[0].1);
        if increasing {
            Ok(Self { points })
        } else {
            Err(UtilityError::NotIncreasing)
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn eval(&self, wealth: f64) -> Result<f64, UtilityError> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if !(wealth >= first.0 && wealth <= last.0) {
            return Err(UtilityError::Domain {
                utility: "tabulated",
                wealth,
            });
        }
        let upper = self.points.partition_point(|&(w, _)| w < wealth).max(1);
        let (w0, u0) = self.points[upper - 1];
        let (w1, u1) = self.points[upper];
        Ok(u0 + (u1 - u0) * (wealth - w0) / (w1 - w0))
    }
}

/// Utility of money.
#[derive(Debug, Clone, PartialEq)]
pub enum Utility {
    Linear,
    /// `U(W) = ln W`
    Logarithmic,
    /// `U(W) = √W`
    SquareRoot,
    Tabulated(TabulatedUtility),
}

impl Utility {
    pub fn name(&self) -> &'static str {
        match self {
            Utility::Linear => "linear",
            Utility::Logarithmic => "logarithmic",
            Utility::SquareRoot => "square_root",
            Utility::Tabulated(_) => "tabulated",
        }
    }

    pub fn apply(&self, wealth: f64) -> Result<f64, UtilityError> {
        let domain = || UtilityError::Domain {
            utility: self.name(),
            wealth,
        };
        match self {
            Utility::Linear => Ok(wealth),
            Utility::Logarithmic if wealth > 0.0 => Ok(wealth.ln()),
            Utility::SquareRoot if wealth >= 0.0 => Ok(wealth.sqrt()),
            Utility::Logarithmic | Utility::SquareRoot => Err(domain()),
            Utility::Tabulated(t) => t.eval(wealth),
        }
    }

    /// `U(W + ΔW) - U(W)`, evaluated without cancellation where a closed
    /// form allows. Logarithmic utility returns `-inf` when `W + ΔW <= 0`.
    pub fn change(&self, wealth: f64, wealth_change: f64) -> Result<f64, UtilityError> {
        match self {
            Utility::Linear => Ok(wealth_change),
            Utility::Logarithmic => {
                if wealth.is_nan() || wealth <= 0.0 {
                    return Err(UtilityError::Domain {
                        utility: self.name(),
                        wealth,
                    });
                }
                Ok(log_ratio(wealth, wealth_change))
            }
            Utility::SquareRoot => {
                let next = wealth + wealth_change;
                if !(wealth >= 0.0 && next >= 0.0) {
                    return Err(UtilityError::Domain {
                        utility: self.name(),
                        wealth: wealth.min(next),
                    });
                }
                let denom = next.sqrt() + wealth.sqrt();
                Ok(if denom == 0.0 { 0.0 } else { wealth_change / denom })
            }
            Utility::Tabulated(t) => Ok(t.eval(wealth + wealth_change)? - t.eval(wealth)?),
        }
    }
}

/// `ln((W + ΔW) / W)` for `W > 0`; `-inf` once `W + ΔW <= 0`.
pub(crate) fn log_ratio(wealth: f64, wealth_change: f64) -> f64 {
    if wealth + wealth_change <= 0.0 {
        f64::NEG_INFINITY
    } else {
        (wealth_change / wealth).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coin() -> Gamble {
        Gamble::new(&[(0.5, 0.5), (0.5, -0.4)], 1.0).unwrap()
    }

    #[test]
    fn sorts_outcomes_by_wealth_change() {
        let g = coin();
        let changes: Vec<f64> = g.wealth_changes().collect();
        assert_eq!(changes, vec![-0.4, 0.5]);
        assert_eq!(g.outcomes()[0].index, 1);
        assert_eq!(g.outcomes()[1].index, 2);
    }

    #[test]
    fn certainty_gamble() {
        let g = Gamble::new(&[(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(g.n_max(), 1);
        assert_eq!(g.mean_change(), 0.0);
        assert!(!g.is_bankruptcy_possible(3.0).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            Gamble::new(&[(0.3, 1.0), (0.3, 2.0), (0.3, 3.0)], 1.0),
            Err(GambleError::ProbabilitySum { .. })
        ));
        assert_eq!(Gamble::new(&[], 1.0), Err(GambleError::Empty));
        assert!(matches!(
            Gamble::new(&[(0.0, 1.0), (1.0, 2.0)], 1.0),
            Err(GambleError::NonPositiveProbability { position: 0, .. })
        ));
        assert!(matches!(
            Gamble::new(&[(0.5, 1.0), (0.5, 1.0)], 1.0),
            Err(GambleError::DuplicateWealthChange {
                first: 0,
                second: 1,
                ..
            })
        ));
        assert_eq!(
            Gamble::new(&[(1.0, 1.0)], 0.0),
            Err(GambleError::NonPositiveDuration(0.0))
        );
        assert!(matches!(
            Gamble::new(&[(1.0, f64::NAN)], 1.0),
            Err(GambleError::NonFiniteWealthChange { .. })
        ));
    }

    #[test]
    fn probability_sum_tolerance_is_tight() {
        assert!(Gamble::new(&[(0.5, 0.0), (0.5 + 5e-13, 1.0)], 1.0).is_ok());
        assert!(Gamble::new(&[(0.5, 0.0), (0.5 + 5e-12, 1.0)], 1.0).is_err());
    }

    #[test]
    fn coin_growth_factors() {
        let f = coin().growth_factors(1.0).unwrap();
        assert_eq!(f.factors, vec![0.6, 1.5]);
        assert_eq!(f.bankruptcy_outcome(), None);
        assert!((f.mean(&coin()) - 1.05).abs() < 1e-15);
    }

    #[test]
    fn bankruptcy_factor() {
        let g = Gamble::new(&[(0.5, -10.0), (0.5, 10.0)], 1.0).unwrap();
        let f = g.growth_factors(10.0).unwrap();
        assert_eq!(f.factors, vec![0.0, 2.0]);
        assert_eq!(f.bankruptcy_outcome(), Some(1));
        assert_eq!(g.bankruptcy_outcome(10.0).unwrap(), Some(1));
    }

    #[test]
    fn wealth_below_zero_is_rejected() {
        let g = Gamble::new(&[(1.0, -15.0)], 1.0).unwrap();
        assert!(matches!(
            g.growth_factors(10.0),
            Err(GambleError::NegativeFactor { index: 1, .. })
        ));
        assert!(g.is_bankruptcy_possible(10.0).is_err());
        assert_eq!(g.growth_factors(0.0), Err(GambleError::NonPositiveWealth(0.0)));
    }

    #[test]
    fn utilities() {
        assert_eq!(Utility::Logarithmic.apply(1.0).unwrap(), 0.0);
        assert_eq!(Utility::SquareRoot.apply(4.0).unwrap(), 2.0);
        assert!(Utility::Logarithmic.apply(0.0).is_err());
        assert!(Utility::SquareRoot.apply(-1.0).is_err());
        assert_eq!(Utility::SquareRoot.apply(0.0).unwrap(), 0.0);
        assert_eq!(Utility::SquareRoot.change(4.0, 5.0).unwrap(), 1.0);
        assert_eq!(Utility::Logarithmic.change(1.0, -1.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn tabulated_utility() {
        let t = TabulatedUtility::new(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]).unwrap();
        let u = Utility::Tabulated(t);
        assert_eq!(u.apply(0.5).unwrap(), 1.0);
        assert_eq!(u.apply(1.0).unwrap(), 2.0);
        assert_eq!(u.apply(2.0).unwrap(), 2.5);
        assert_eq!(u.apply(3.0).unwrap(), 3.0);
        assert!(u.apply(3.5).is_err());
        assert!(TabulatedUtility::new(vec![(0.0, 1.0), (1.0, 1.0)]).is_err());
        assert!(TabulatedUtility::new(vec![(0.0, 1.0)]).is_err());
    }

    fn arb_gamble() -> impl Strategy<Value = (Gamble, f64)> {
        (1usize..8, 0.1f64..1e3).prop_flat_map(|(n, w)| {
            (
                prop::collection::vec(0.01f64..1.0, n),
                prop::collection::btree_set(-1000i64..1000, n),
                Just(w),
            )
                .prop_filter_map("need n distinct changes", move |(weights, changes, w)| {
                    if changes.len() != n {
                        return None;
                    }
                    let total: f64 = weights.iter().sum();
                    let mut probs: Vec<f64> = weights.iter().map(|x| x / total).collect();
                    let head: f64 = probs[..n - 1].iter().sum();
                    probs[n - 1] = 1.0 - head;
                    // changes scaled into [-w, w]
                    let raw: Vec<(f64, f64)> = probs
                        .into_iter()
                        .zip(changes.iter().map(|&c| c as f64 / 1000.0 * w))
                        .collect();
                    Gamble::new(&raw, 1.0).ok().map(|g| (g, w))
                })
        })
    }

    proptest! {
        #[test]
        fn valid_gambles_hold_invariants((g, _w) in arb_gamble()) {
            let sum: f64 = g.probabilities().sum();
            prop_assert!((sum - 1.0).abs() <= PROBABILITY_SUM_TOLERANCE);
            let changes: Vec<f64> = g.wealth_changes().collect();
            prop_assert!(changes.windows(2).all(|p| p[1] > p[0]));
        }

        #[test]
        fn growth_factors_round_trip((g, w) in arb_gamble()) {
            let f = g.growth_factors(w).unwrap();
            prop_assert!(f.factors.windows(2).all(|p| p[1] > p[0]));
            for (back, orig) in f.wealth_changes().into_iter().zip(g.wealth_changes()) {
                prop_assert!((back - orig).abs() <= 1e-14 * orig.abs().max(w));
            }
        }

        #[test]
        fn bankruptcy_iff_worst_change_is_minus_wealth((g, w) in arb_gamble()) {
            let expected = g.worst_change() == -w;
            prop_assert_eq!(g.is_bankruptcy_possible(w).unwrap(), expected);
        }

        #[test]
        fn linear_utility_is_identity(x in -1e12f64..1e12) {
            prop_assert_eq!(Utility::Linear.apply(x).unwrap(), x);
        }
    }
}
