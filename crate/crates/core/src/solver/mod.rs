//! Desk-scale equilibrium search and the executable gadget lemmas.
//!
//! Nothing here solves full compiled markets. Tâtonnement is best effort;
//! pinned bisection and the grid oracle clear one to three goods with every
//! other price held fixed, which is what the gadget truth tables need.

mod bisection;
mod chain;
mod demand;
mod equilibrium;
mod grid;
pub mod lab;
mod lemmas;
mod tatonnement;

use thiserror::Error;

use crate::market::MarketError;
use crate::rational::Rational;
use crate::reduction::ReductionError;

pub use bisection::{critical_prices, demand_band, pinned_bisection, Band, BisectionResult, Side};
pub use chain::{chain_bounds, chain_ordering, chain_pair, ChainBounds, ChainOrdering, OrderingWitness};
pub use demand::{canonical_demand, canonical_demand_for, DemandProfile};
pub use equilibrium::not_cycle_equilibrium;
pub use grid::{grid_search, uniform_grid, GridHit};
pub use lemmas::{lemma_suite, LemmaRecord, LemmaReport, Scope};
pub use tatonnement::{tatonnement, write_trace_csv, SolverConfig, TatonnementResult, TraceRow};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("price vector has {got} entries, market has {expected} goods")]
    PriceDimension { expected: usize, got: usize },
    #[error("buyer {buyer} has unbounded demand for {good}")]
    UnboundedDemand { buyer: String, good: String },
    #[error("market violates the sufficient condition: some buyer can be satiated")]
    SufficientCondition,
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("bracket [{lo}, {hi}] does not straddle clearing: demand at lo is {at_lo}, at hi is {at_hi}")]
    Bracket { lo: Rational, hi: Rational, at_lo: Band, at_hi: Band },
    #[error("demand is not non-increasing over [{lo}, {hi}]: {at_lo} at lo, {at_hi} at hi")]
    Monotonicity { lo: Rational, hi: Rational, at_lo: Band, at_hi: Band },
    #[error("not an ε-equilibrium: {goods_violating} goods fail to clear, {buyers_suboptimal} buyers are not optimal")]
    NotEquilibrium { goods_violating: usize, buyers_suboptimal: usize },
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Market(#[from] MarketError),
}
