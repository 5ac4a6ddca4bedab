//! Fisher and exchange markets with separable piecewise-linear concave (SPLC)
//! utilities, unit supply of every good, and exact rational prices.
//!
//! Goods are addressed by their position in [`FisherMarket::goods`]; names are
//! only used at the document boundary (see [`io`]).

mod bundle;
mod exchange;
pub mod io;
mod verify;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rational::Rational;

pub use bundle::{demand_interval, is_optimal, optimal_bundle, utility_value, DemandInterval, OptimalBundle};
pub use exchange::{
    economy_graph_strongly_connected, normalize_prices, to_exchange, verify_exchange, Endowment, ExchangeMarket,
    Trader,
};
pub use verify::{buyer_verdict, verify_fisher, BuyerReport, BuyerVerdict, EquilibriumReport, GoodReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MarketError {
    #[error("invalid utility: {0}")]
    InvalidUtility(String),
    #[error("buyer {buyer:?} has non-positive budget {budget}")]
    NonPositiveBudget { buyer: String, budget: Rational },
    #[error("duplicate good {0:?}")]
    DuplicateGood(String),
    #[error("duplicate buyer {0:?}")]
    DuplicateBuyer(String),
    #[error("unknown good {0:?}")]
    UnknownGood(String),
    #[error("unknown buyer {0:?}")]
    UnknownBuyer(String),
    #[error("buyer {buyer:?} lists good {good:?} twice")]
    DuplicateUtility { buyer: String, good: String },
    #[error("buyer {buyer:?} demands an unbounded amount of good {good:?} at price 0")]
    UnboundedDemand { buyer: String, good: String },
    #[error("price of good {good:?} is negative: {price}")]
    NegativePrice { good: String, price: Rational },
    #[error("allocation of good {good:?} to buyer {buyer:?} is negative: {amount}")]
    NegativeAmount { buyer: String, good: String, amount: Rational },
    #[error("no price given for good {0:?}")]
    MissingPrice(String),
    #[error("{what}: expected {expected} entries, got {got}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("endowments of good {good:?} sum to {sum}, not 1")]
    EndowmentSum { good: String, sum: Rational },
    #[error("negative epsilon {0}")]
    NegativeEpsilon(Rational),
}

/// Length of one linear piece.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Length {
    Finite(Rational),
    Unbounded,
}

impl Length {
    pub fn is_unbounded(&self) -> bool {
        matches!(self, Length::Unbounded)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Finite(r) => write!(f, "{r}"),
            Length::Unbounded => f.write_str("inf"),
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == "inf" {
            Ok(Length::Unbounded)
        } else {
            text.parse().map(Length::Finite).map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplcSegment {
    pub length: Length,
    pub slope: Rational,
}

impl SplcSegment {
    pub fn finite(length: Rational, slope: Rational) -> Self {
        SplcSegment { length: Length::Finite(length), slope }
    }

    pub fn unbounded(slope: Rational) -> Self {
        SplcSegment { length: Length::Unbounded, slope }
    }
}

/// A concave non-decreasing piecewise-linear function with value 0 at 0.
///
/// Beyond the last segment the function is flat. The empty list is the zero
/// utility.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SplcUtility {
    segments: Vec<SplcSegment>,
}

impl SplcUtility {
    pub fn new(segments: Vec<SplcSegment>) -> Result<Self, MarketError> {
        let last = segments.len().saturating_sub(1);
        for (i, seg) in segments.iter().enumerate() {
            if seg.slope.is_negative() {
                return Err(MarketError::InvalidUtility(format!("segment {i} has negative slope {}", seg.slope)));
            }
            match &seg.length {
                Length::Finite(len) if !len.is_positive() => {
                    return Err(MarketError::InvalidUtility(format!("segment {i} has non-positive length {len}")));
                }
                Length::Unbounded if i != last => {
                    return Err(MarketError::InvalidUtility(format!("segment {i} is unbounded but not last")));
                }
                _ => {}
            }
            if i > 0 && seg.slope > segments[i - 1].slope {
                return Err(MarketError::InvalidUtility(format!(
                    "slopes increase from {} to {} at segment {i}",
                    segments[i - 1].slope, seg.slope
                )));
            }
        }
        Ok(SplcUtility { segments })
    }

    pub fn zero() -> Self {
        SplcUtility::default()
    }

    /// `u(x) = slope · x`.
    pub fn linear(slope: Rational) -> Self {
        SplcUtility::new(vec![SplcSegment::unbounded(slope)]).expect("linear utility")
    }

    /// `u(x) = slope · min(x, cap)`.
    pub fn capped(slope: Rational, cap: Rational) -> Self {
        SplcUtility::new(vec![SplcSegment::finite(cap, slope)]).expect("capped utility")
    }

    pub fn segments(&self) -> &[SplcSegment] {
        &self.segments
    }

    /// True when the function is strictly increasing everywhere.
    pub fn is_strictly_increasing(&self) -> bool {
        self.segments.last().is_some_and(|s| s.length.is_unbounded() && s.slope.is_positive())
    }

    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| s.slope.is_zero())
    }
}

pub type GoodIndex = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Buyer {
    id: String,
    budget: Rational,
    utilities: Vec<(GoodIndex, SplcUtility)>,
}

impl Buyer {
    /// `utilities` may be given in any order; each good at most once.
    pub fn new(
        id: impl Into<String>,
        budget: Rational,
        mut utilities: Vec<(GoodIndex, SplcUtility)>,
    ) -> Result<Self, MarketError> {
        let id = id.into();
        if !budget.is_positive() {
            return Err(MarketError::NonPositiveBudget { buyer: id, budget });
        }
        utilities.sort_by_key(|(g, _)| *g);
        if let Some(w) = utilities.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(MarketError::DuplicateUtility { buyer: id, good: w[0].0.to_string() });
        }
        Ok(Buyer { id, budget, utilities })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn budget(&self) -> &Rational {
        &self.budget
    }

    /// Utilities sorted by good index.
    pub fn utilities(&self) -> &[(GoodIndex, SplcUtility)] {
        &self.utilities
    }

    pub fn utility_for(&self, good: GoodIndex) -> Option<&SplcUtility> {
        self.utilities
            .binary_search_by_key(&good, |(g, _)| *g)
            .ok()
            .map(|i| &self.utilities[i].1)
    }

    pub fn is_unsatiated(&self) -> bool {
        self.utilities.iter().any(|(_, u)| u.is_strictly_increasing())
    }
}

/// Goods named by index, each with unit supply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FisherMarket {
    goods: Vec<String>,
    index: HashMap<String, GoodIndex>,
    buyers: Vec<Buyer>,
}

impl FisherMarket {
    pub fn new(goods: Vec<String>, buyers: Vec<Buyer>) -> Result<Self, MarketError> {
        let index = index_goods(&goods)?;
        check_buyers(goods.len(), buyers.iter().map(|b| (b.id(), b.utilities())))?;
        Ok(FisherMarket { goods, index, buyers })
    }

    pub fn goods(&self) -> &[String] {
        &self.goods
    }

    pub fn buyers(&self) -> &[Buyer] {
        &self.buyers
    }

    pub fn good_index(&self, name: &str) -> Option<GoodIndex> {
        self.index.get(name).copied()
    }

    pub fn buyer_index(&self, id: &str) -> Option<usize> {
        self.buyers.iter().position(|b| b.id == id)
    }

    pub fn total_budget(&self) -> Rational {
        self.buyers.iter().map(|b| &b.budget).sum()
    }

    /// Every buyer has some good whose utility is strictly increasing; this
    /// guarantees an equilibrium exists.
    pub fn satisfies_sufficient_condition(&self) -> bool {
        self.buyers.iter().all(Buyer::is_unsatiated)
    }

    /// Buyers with non-zero utility for each good.
    pub fn consumers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.goods.len()];
        for (bi, b) in self.buyers.iter().enumerate() {
            for (g, u) in &b.utilities {
                if !u.is_zero() {
                    out[*g].push(bi);
                }
            }
        }
        out
    }
}

fn index_goods(goods: &[String]) -> Result<HashMap<String, GoodIndex>, MarketError> {
    let mut index = HashMap::with_capacity(goods.len());
    for (i, g) in goods.iter().enumerate() {
        if index.insert(g.clone(), i).is_some() {
            return Err(MarketError::DuplicateGood(g.clone()));
        }
    }
    Ok(index)
}

fn check_buyers<'a>(
    n_goods: usize,
    buyers: impl Iterator<Item = (&'a str, &'a [(GoodIndex, SplcUtility)])>,
) -> Result<(), MarketError> {
    let mut seen = std::collections::HashSet::new();
    for (id, utils) in buyers {
        if !seen.insert(id) {
            return Err(MarketError::DuplicateBuyer(id.to_string()));
        }
        if let Some((g, _)) = utils.iter().find(|(g, _)| *g >= n_goods) {
            return Err(MarketError::UnknownGood(format!("#{g}")));
        }
    }
    Ok(())
}

/// One price per good, aligned with the market's goods list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriceVector(pub Vec<Rational>);

impl PriceVector {
    pub fn uniform(n: usize, p: Rational) -> Self {
        PriceVector(vec![p; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, good: GoodIndex) -> &Rational {
        &self.0[good]
    }

    pub fn sum(&self) -> Rational {
        self.0.iter().sum()
    }

    pub fn scaled(&self, factor: &Rational) -> PriceVector {
        PriceVector(self.0.iter().map(|p| p * factor).collect())
    }
}

/// A buyer's bundle: `(good, amount)` pairs, sorted by good, amounts positive.
pub type Bundle = Vec<(GoodIndex, Rational)>;

/// Sparse allocation, one bundle per buyer in market order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    pub rows: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(n_buyers: usize) -> Self {
        Allocation { rows: vec![Vec::new(); n_buyers] }
    }

    pub fn get(&self, buyer: usize, good: GoodIndex) -> Rational {
        self.rows[buyer]
            .binary_search_by_key(&good, |(g, _)| *g)
            .map(|i| self.rows[buyer][i].1.clone())
            .unwrap_or_default()
    }

    /// Σ_i x_{i,j} for every good.
    pub fn column_sums(&self, n_goods: usize) -> Vec<Rational> {
        let mut sums = vec![Rational::zero(); n_goods];
        for row in &self.rows {
            for (g, x) in row {
                sums[*g] += x;
            }
        }
        sums
    }
}

pub(crate) fn check_prices(goods: &[String], prices: &PriceVector) -> Result<(), MarketError> {
    if prices.len() != goods.len() {
        return Err(MarketError::Dimension { what: "prices", expected: goods.len(), got: prices.len() });
    }
    if let Some(i) = prices.0.iter().position(Rational::is_negative) {
        return Err(MarketError::NegativePrice { good: goods[i].clone(), price: prices.0[i].clone() });
    }
    Ok(())
}
