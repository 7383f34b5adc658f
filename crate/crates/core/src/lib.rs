//! Gambles under additive and multiplicative repetition: decision criteria,
//! wealth simulation, empirical ergodicity checks and the St Petersburg and
//! Menger lottery families.

pub mod cli;
pub mod criteria;
pub mod dynamics;
pub mod ergodicity;
pub mod exec;
pub mod gamble;
pub mod io;
pub mod lotteries;
pub mod rng;
pub mod value;

pub use criteria::{expected_utility_rate, huygens_rate, laplace_rate};
pub use dynamics::{Dynamic, Ensemble, Trajectory};
pub use ergodicity::{diagnose, ObservableKind, Verdict};
pub use exec::Execution;
pub use gamble::{Gamble, GambleError, Outcome, Utility};
pub use lotteries::{LotteryFamily, LotterySpec};
pub use value::Extended;
