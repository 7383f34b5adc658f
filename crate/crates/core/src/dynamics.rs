//! Wealth trajectories under additive and multiplicative repetition of a
//! gamble, ensemble averages and finite-time growth rates.
//!
//! Additive repetition adds `ΔW(n_τ)` each round. Multiplicative repetition
//! multiplies by `r(n_τ)`, the growth factors fixed at the initial wealth;
//! it is accumulated as a sum of `ln r` and only exponentiated on output,
//! with wealth held at exactly zero once a zero factor is drawn.

use thiserror::Error;

use crate::exec::{self, Execution};
use crate::gamble::{check_wealth, Gamble, GambleError};
use crate::rng::{derive_seed, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Gamble(#[from] GambleError),
    #[error("initial wealth must be finite, got {0}")]
    NonFiniteWealth(f64),
    #[error("an ensemble needs at least one realization")]
    EmptyEnsemble,
    #[error("a growth rate needs at least one round")]
    NoRounds,
    #[error("outcome label {0} is outside 1..=n_max")]
    UnknownOutcome(usize),
    #[error("sample time {time} is beyond the horizon of {rounds} rounds")]
    SampleTimeOutOfRange { time: usize, rounds: usize },
}

/// The mode of repetition imposed on a gamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dynamic {
    Additive,
    Multiplicative,
}

impl Dynamic {
    pub fn name(self) -> &'static str {
        match self {
            Dynamic::Additive => "additive",
            Dynamic::Multiplicative => "multiplicative",
        }
    }
}

/// Inverse-CDF sampler over the ordered outcomes; one uniform per round.
#[derive(Debug, Clone)]
pub(crate) struct OutcomeSampler {
    upper: Vec<f64>,
}

impl OutcomeSampler {
    pub(crate) fn new(gamble: &Gamble) -> Self {
        let mut acc = 0.0;
        let mut upper: Vec<f64> = gamble
            .probabilities()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // total may sit within 1e-12 of 1 either way
        *upper.last_mut().expect("n_max >= 1") = f64::INFINITY;
        OutcomeSampler { upper }
    }

    /// 0-based outcome for a uniform deviate in `[0, 1)`.
    #[inline]
    pub(crate) fn sample(&self, u: f64) -> usize {
        self.upper.iter().position(|&c| u < c).unwrap_or(self.upper.len() - 1)
    }
}

/// Per-round increments of the state variable: `ΔW(n)` for additive
/// dynamics and `ln r(n)` for multiplicative dynamics.
#[derive(Debug, Clone)]
pub(crate) struct Walk {
    pub(crate) dynamic: Dynamic,
    pub(crate) sampler: OutcomeSampler,
    pub(crate) increments: Vec<f64>,
    /// Initial state: `W` or `ln W`.
    pub(crate) start: f64,
}

impl Walk {
    pub(crate) fn new(gamble: &Gamble, dynamic: Dynamic, initial_wealth: f64) -> Result<Self, SimError> {
        let (increments, start) = match dynamic {
            Dynamic::Additive => {
                if !initial_wealth.is_finite() {
                    return Err(SimError::NonFiniteWealth(initial_wealth));
                }
                (gamble.wealth_changes().collect(), initial_wealth)
            }
            Dynamic::Multiplicative => {
                let factors = gamble.growth_factors(initial_wealth)?;
                (factors.factors.iter().map(|r| r.ln()).collect(), initial_wealth.ln())
            }
        };
        Ok(Walk {
            dynamic,
            sampler: OutcomeSampler::new(gamble),
            increments,
            start,
        })
    }

    /// State after one round from `state`, given 0-based outcome `n`.
    #[inline]
    pub(crate) fn advance(&self, state: f64, n: usize) -> f64 {
        state + self.increments[n]
    }

    /// Wealth for a state value.
    #[inline]
    pub(crate) fn wealth(&self, state: f64) -> f64 {
        match self.dynamic {
            Dynamic::Additive => state,
            Dynamic::Multiplicative => state.exp(),
        }
    }

    #[inline]
    pub(crate) fn draw(&self, rng: &mut Stream) -> usize {
        self.sampler.sample(rng.uniform())
    }
}

/// One realization of wealth over `T` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial_wealth: f64,
    pub dynamic: Dynamic,
    pub round_duration: f64,
    /// `W(t₀ + τΔt)` for `τ = 0..=T`.
    pub wealth_path: Vec<f64>,
    /// `ln W` for multiplicative trajectories (`-inf` after bankruptcy).
    /// Wealth itself underflows to zero long before `ln W` loses precision.
    pub log_wealth_path: Option<Vec<f64>>,
    /// 1-based outcome labels `n_τ` for `τ = 1..=T`.
    pub outcome_path: Vec<usize>,
    /// Seed that generated the outcomes; `None` for replayed sequences.
    pub seed: Option<u64>,
}

impl Trajectory {
    pub fn rounds(&self) -> usize {
        self.outcome_path.len()
    }

    pub fn final_wealth(&self) -> f64 {
        *self.wealth_path.last().expect("path holds W(t0)")
    }

    pub fn is_bankrupt(&self) -> bool {
        match &self.log_wealth_path {
            Some(log) => *log.last().expect("path holds W(t0)") == f64::NEG_INFINITY,
            None => false,
        }
    }
}

/// Draws `rounds` outcome labels (1-based) from the stream seeded by `seed`.
/// The sequence depends only on the gamble's probabilities, so it can be
/// replayed under either dynamic.
pub fn draw_outcomes(gamble: &Gamble, rounds: usize, seed: u64) -> Vec<usize> {
    let sampler = OutcomeSampler::new(gamble);
    let mut rng = Stream::new(seed);
    (0..rounds).map(|_| sampler.sample(rng.uniform()) + 1).collect()
}

pub fn simulate_trajectory(
    gamble: &Gamble,
    dynamic: Dynamic,
    initial_wealth: f64,
    rounds: usize,
    seed: u64,
) -> Result<Trajectory, SimError> {
    let outcomes = draw_outcomes(gamble, rounds, seed);
    let mut traj = replay(gamble, dynamic, initial_wealth, &outcomes)?;
    traj.seed = Some(seed);
    Ok(traj)
}

/// Builds the trajectory for a given outcome sequence.
pub fn replay(
    gamble: &Gamble,
    dynamic: Dynamic,
    initial_wealth: f64,
    outcomes: &[usize],
) -> Result<Trajectory, SimError> {
    let walk = Walk::new(gamble, dynamic, initial_wealth)?;
    let mut states = Vec::with_capacity(outcomes.len() + 1);
    let mut state = walk.start;
    states.push(state);
    for &n in outcomes {
        if n == 0 || n > gamble.n_max() {
            return Err(SimError::UnknownOutcome(n));
        }
        state = walk.advance(state, n - 1);
        states.push(state);
    }
    let (wealth_path, log_wealth_path) = match dynamic {
        Dynamic::Additive => (states, None),
        Dynamic::Multiplicative => {
            let mut wealth: Vec<f64> = states.iter().map(|s| s.exp()).collect();
            wealth[0] = initial_wealth;
            (wealth, Some(states))
        }
    };
    Ok(Trajectory {
        initial_wealth,
        dynamic,
        round_duration: gamble.round_duration(),
        wealth_path,
        log_wealth_path,
        outcome_path: outcomes.to_vec(),
        seed: None,
    })
}

/// Finite-time growth rate: `(W(T) - W(0))/(TΔt)` for additive and
/// `ln(W(T)/W(0))/(TΔt)` for multiplicative trajectories; `-inf` for a
/// bankrupt multiplicative trajectory.
pub fn time_average_rate(traj: &Trajectory) -> Result<f64, SimError> {
    let rounds = traj.rounds();
    if rounds == 0 {
        return Err(SimError::NoRounds);
    }
    let span = rounds as f64 * traj.round_duration;
    Ok(match &traj.log_wealth_path {
        Some(log) => (log[rounds] - log[0]) / span,
        None => (traj.wealth_path[rounds] - traj.wealth_path[0]) / span,
    })
}

/// `W̄_T = (1/T) Σ_{τ=1..T} W(t₀ + τΔt)`.
pub fn finite_time_average_wealth(traj: &Trajectory) -> Result<f64, SimError> {
    let rounds = traj.rounds();
    if rounds == 0 {
        return Err(SimError::NoRounds);
    }
    Ok(traj.wealth_path[1..].iter().sum::<f64>() / rounds as f64)
}

/// Default sample grid: `0`, powers of two below `rounds`, and `rounds`.
pub fn geometric_times(rounds: usize) -> Vec<usize> {
    let mut times = vec![0];
    let mut t = 1;
    while t < rounds {
        times.push(t);
        t *= 2;
    }
    if rounds > 0 {
        times.push(rounds);
    }
    times
}

/// Realizations per work block. Block layout, and hence every floating
/// point sum, is independent of the number of threads.
pub(crate) const BLOCK: usize = 256;

/// Running mean and variance, merged pairwise (Chan et al.).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub(crate) count: f64,
    pub(crate) mean: f64,
    pub(crate) m2: f64,
}

impl Moments {
    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn merge(self, other: Moments) -> Moments {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }

    pub(crate) fn variance(&self) -> f64 {
        if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        }
    }

    pub(crate) fn std_error(&self) -> f64 {
        if self.count > 0.0 {
            (self.variance() / self.count).sqrt()
        } else {
            f64::NAN
        }
    }
}

/// An ensemble of `N` independent realizations of one gamble under one
/// dynamic. Realization `ν` (0-based) uses seed `derive_seed(master, ν)`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    gamble: Gamble,
    dynamic: Dynamic,
    initial_wealth: f64,
    rounds: usize,
    realizations: usize,
    master_seed: u64,
}

/// Ensemble means of wealth at the sampled times.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub realization_count: usize,
    pub master_seed: u64,
    pub times: Vec<usize>,
    pub ensemble_mean_wealth: Vec<f64>,
    /// Standard error of each mean.
    pub std_error: Vec<f64>,
}

impl Ensemble {
    pub fn new(
        gamble: &Gamble,
        dynamic: Dynamic,
        initial_wealth: f64,
        rounds: usize,
        realizations: usize,
        master_seed: u64,
    ) -> Result<Self, SimError> {
        if realizations == 0 {
            return Err(SimError::EmptyEnsemble);
        }
        Walk::new(gamble, dynamic, initial_wealth)?;
        Ok(Ensemble {
            gamble: gamble.clone(),
            dynamic,
            initial_wealth,
            rounds,
            realizations,
            master_seed,
        })
    }

    pub fn realization_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }

    /// Regenerates realization `index`.
    pub fn realization(&self, index: usize) -> Result<Trajectory, SimError> {
        simulate_trajectory(
            &self.gamble,
            self.dynamic,
            self.initial_wealth,
            self.rounds,
            self.realization_seed(index),
        )
    }

    /// `W̄_T` of realization `index`.
    pub fn finite_time_average(&self, index: usize) -> Result<f64, SimError> {
        finite_time_average_wealth(&self.realization(index)?)
    }

    /// Ensemble mean wealth at each sample time (`None` uses
    /// [`geometric_times`]). Sample times must be sorted and `<= rounds`.
    pub fn summarize(&self, sample_times: Option<&[usize]>, exec: Execution) -> Result<EnsembleSummary, SimError> {
        let times = match sample_times {
            Some(t) => {
                let mut t = t.to_vec();
                t.sort_unstable();
                t.dedup();
                t
            }
            None => geometric_times(self.rounds),
        };
        if let Some(&time) = times.iter().find(|&&t| t > self.rounds) {
            return Err(SimError::SampleTimeOutOfRange {
                time,
                rounds: self.rounds,
            });
        }
        let moments = self.wealth_moments(&times, exec)?;
        Ok(EnsembleSummary {
            realization_count: self.realizations,
            master_seed: self.master_seed,
            times,
            ensemble_mean_wealth: moments.iter().map(|m| m.mean).collect(),
            std_error: moments.iter().map(Moments::std_error).collect(),
        })
    }

    /// Moments of `W` over realizations at each of the sorted `times`.
    pub(crate) fn wealth_moments(&self, times: &[usize], exec: Execution) -> Result<Vec<Moments>, SimError> {
        let walk = Walk::new(&self.gamble, self.dynamic, self.initial_wealth)?;
        let horizon = times.last().copied().unwrap_or(0);
        let blocks = exec::blocks(self.realizations, BLOCK);
        let partial = exec.map(blocks.len(), |b| {
            let mut acc = vec![Moments::default(); times.len()];
            for nu in blocks[b].clone() {
                let mut rng = Stream::new(self.realization_seed(nu));
                let mut state = walk.start;
                let mut next = 0;
                for tau in 0..=horizon {
                    if tau > 0 {
                        state = walk.advance(state, walk.draw(&mut rng));
                    }
                    while next < times.len() && times[next] == tau {
                        let w = if tau == 0 {
                            self.initial_wealth
                        } else {
                            walk.wealth(state)
                        };
                        acc[next].push(w);
                        next += 1;
                    }
                }
            }
            acc
        });
        Ok(partial
            .into_iter()
            .fold(vec![Moments::default(); times.len()], |acc, block| {
                acc.into_iter().zip(block).map(|(a, b)| a.merge(b)).collect()
            }))
    }
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_ensemble(
    gamble: &Gamble,
    dynamic: Dynamic,
    initial_wealth: f64,
    rounds: usize,
    realizations: usize,
    master_seed: u64,
    sample_times: Option<&[usize]>,
    exec: Execution,
) -> Result<EnsembleSummary, SimError> {
    Ensemble::new(gamble, dynamic, initial_wealth, rounds, realizations, master_seed)?.summarize(sample_times, exec)
}

/// Closed-form expected wealth after `rounds`: `W + T⟨ΔW⟩` (additive) or
/// `W⟨r⟩^T` (multiplicative).
pub fn expected_wealth(gamble: &Gamble, dynamic: Dynamic, initial_wealth: f64, rounds: usize) -> Result<f64, SimError> {
    Ok(match dynamic {
        Dynamic::Additive => initial_wealth + rounds as f64 * gamble.mean_change(),
        Dynamic::Multiplicative => {
            check_wealth(initial_wealth)?;
            let mean_factor = gamble.growth_factors(initial_wealth)?.mean(gamble);
            initial_wealth * mean_factor.powi(rounds as i32)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> Gamble {
        Gamble::new(&[(0.5, -0.4), (0.5, 0.5)], 1.0).unwrap()
    }

    #[test]
    fn zero_rounds() {
        let t = simulate_trajectory(&coin(), Dynamic::Multiplicative, 1.0, 0, 3).unwrap();
        assert_eq!(t.wealth_path, vec![1.0]);
        assert!(t.outcome_path.is_empty());
        assert_eq!(time_average_rate(&t), Err(SimError::NoRounds));
    }

    #[test]
    fn heads_then_tails() {
        let g = coin();
        let mult = replay(&g, Dynamic::Multiplicative, 1.0, &[2, 1]).unwrap();
        let expected = [1.0, 1.5, 1.5 * 0.6];
        for (a, b) in mult.wealth_path.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let add = replay(&g, Dynamic::Additive, 1.0, &[2, 1]).unwrap();
        let expected = [1.0, 1.5, 1.0 + 0.5 - 0.4];
        for (a, b) in add.wealth_path.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((time_average_rate(&add).unwrap() - 0.05).abs() < 1e-12);
        assert!((time_average_rate(&mult).unwrap() - 0.9f64.ln() / 2.0).abs() < 1e-12);
        assert!((finite_time_average_wealth(&add).unwrap() - 1.3).abs() < 1e-12);
        assert_eq!(
            replay(&g, Dynamic::Additive, 1.0, &[3]),
            Err(SimError::UnknownOutcome(3))
        );
    }

    #[test]
    fn constant_path_has_zero_rate() {
        let g = Gamble::new(&[(1.0, 0.0)], 1.0).unwrap();
        for dynamic in [Dynamic::Additive, Dynamic::Multiplicative] {
            let t = simulate_trajectory(&g, dynamic, 2.0, 50, 1).unwrap();
            assert_eq!(time_average_rate(&t).unwrap(), 0.0);
            assert!(t.wealth_path.iter().all(|&w| w == 2.0));
        }
    }

    #[test]
    fn same_seed_same_outcomes_across_dynamics() {
        let g = coin();
        let a = simulate_trajectory(&g, Dynamic::Additive, 1.0, 200, 9).unwrap();
        let m = simulate_trajectory(&g, Dynamic::Multiplicative, 1.0, 200, 9).unwrap();
        assert_eq!(a.outcome_path, m.outcome_path);
        assert_eq!(a.outcome_path, draw_outcomes(&g, 200, 9));
        assert_eq!(
            m,
            simulate_trajectory(&g, Dynamic::Multiplicative, 1.0, 200, 9).unwrap()
        );
    }

    #[test]
    fn bankruptcy_is_absorbing() {
        let g = Gamble::new(&[(0.5, -1.0), (0.5, 1.0)], 1.0).unwrap();
        let t = simulate_trajectory(&g, Dynamic::Multiplicative, 1.0, 100, 5).unwrap();
        let first_zero = t.wealth_path.iter().position(|&w| w == 0.0).unwrap();
        assert!(t.wealth_path[first_zero..].iter().all(|&w| w == 0.0));
        assert!(t.is_bankrupt());
        assert_eq!(time_average_rate(&t).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn long_decay_does_not_look_like_bankruptcy() {
        let t = simulate_trajectory(&coin(), Dynamic::Multiplicative, 1.0, 100_000, 5).unwrap();
        assert_eq!(t.final_wealth(), 0.0);
        assert!(!t.is_bankrupt());
        assert!(time_average_rate(&t).unwrap().is_finite());
    }

    #[test]
    fn multiplicative_requires_non_negative_factors() {
        let g = Gamble::new(&[(0.5, -2.0), (0.5, 1.0)], 1.0).unwrap();
        assert!(matches!(
            simulate_trajectory(&g, Dynamic::Multiplicative, 1.0, 5, 0),
            Err(SimError::Gamble(GambleError::NegativeFactor { .. }))
        ));
        assert!(simulate_trajectory(&g, Dynamic::Additive, 1.0, 5, 0).is_ok());
    }

    #[test]
    fn sampler_frequencies() {
        let g = Gamble::new(&[(0.2, 0.0), (0.3, 1.0), (0.5, 2.0)], 1.0).unwrap();
        let outcomes = draw_outcomes(&g, 100_000, 11);
        for (n, p) in [(1, 0.2), (2, 0.3), (3, 0.5)] {
            let freq = outcomes.iter().filter(|&&o| o == n).count() as f64 / 1e5;
            let se = (p * (1.0 - p) / 1e5f64).sqrt();
            assert!((freq - p).abs() < 5.0 * se, "n={n}: {freq}");
        }
    }

    #[test]
    fn single_member_ensemble_is_the_trajectory() {
        let g = coin();
        let e = Ensemble::new(&g, Dynamic::Multiplicative, 1.0, 16, 1, 77).unwrap();
        let s = e.summarize(None, Execution::Sequential).unwrap();
        let t = e.realization(0).unwrap();
        assert_eq!(s.times, vec![0, 1, 2, 4, 8, 16]);
        for (time, mean) in s.times.iter().zip(&s.ensemble_mean_wealth) {
            assert_eq!(*mean, t.wealth_path[*time]);
        }
    }

    #[test]
    fn ensemble_is_identical_serial_and_parallel() {
        let g = coin();
        let e = Ensemble::new(&g, Dynamic::Multiplicative, 1.0, 64, 3000, 5).unwrap();
        assert_eq!(
            e.summarize(None, Execution::Sequential).unwrap(),
            e.summarize(None, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn ensemble_means_match_closed_forms() {
        let g = coin();
        for dynamic in [Dynamic::Additive, Dynamic::Multiplicative] {
            let s = simulate_ensemble(&g, dynamic, 1.0, 10, 100_000, 3, Some(&[10]), Execution::default()).unwrap();
            let expected = expected_wealth(&g, dynamic, 1.0, 10).unwrap();
            let z = (s.ensemble_mean_wealth[0] - expected) / s.std_error[0];
            assert!(z.abs() < 3.0, "{dynamic:?}: z = {z}");
        }
        assert!((expected_wealth(&g, Dynamic::Multiplicative, 1.0, 10).unwrap() - 1.05f64.powi(10)).abs() < 1e-12);
        assert!((expected_wealth(&g, Dynamic::Additive, 1.0, 10).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_ensembles() {
        assert_eq!(
            Ensemble::new(&coin(), Dynamic::Additive, 1.0, 5, 0, 0).unwrap_err(),
            SimError::EmptyEnsemble
        );
        let e = Ensemble::new(&coin(), Dynamic::Additive, 1.0, 5, 2, 0).unwrap();
        assert!(matches!(
            e.summarize(Some(&[6]), Execution::Sequential),
            Err(SimError::SampleTimeOutOfRange { time: 6, rounds: 5 })
        ));
    }

    #[test]
    fn moments_merge_like_a_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt()).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.variance() - whole.variance()).abs() < 1e-9);
    }
}
