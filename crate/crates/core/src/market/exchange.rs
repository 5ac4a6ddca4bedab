use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;

use super::verify::{assemble, buyer_verdict, check_allocation, BuyerVerdict, EquilibriumReport};
use super::{check_prices, index_goods, Allocation, FisherMarket, GoodIndex, MarketError, PriceVector, SplcUtility};
use crate::rational::Rational;

/// A trader's endowment. `Uniform(w)` holds `w` units of every good.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endowment {
    Uniform(Rational),
    PerGood(Vec<(GoodIndex, Rational)>),
}

impl Endowment {
    pub fn amount(&self, good: GoodIndex) -> Rational {
        match self {
            Endowment::Uniform(w) => w.clone(),
            Endowment::PerGood(rows) => rows
                .binary_search_by_key(&good, |(g, _)| *g)
                .map(|i| rows[i].1.clone())
                .unwrap_or_default(),
        }
    }

    /// Σ_j p_j w_j
    pub fn value(&self, prices: &PriceVector) -> Rational {
        match self {
            Endowment::Uniform(w) => w * &prices.sum(),
            Endowment::PerGood(rows) => rows.iter().map(|(g, w)| prices.get(*g) * w).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trader {
    pub id: String,
    pub endowment: Endowment,
    /// Sorted by good index.
    pub utilities: Vec<(GoodIndex, SplcUtility)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeMarket {
    goods: Vec<String>,
    index: HashMap<String, GoodIndex>,
    traders: Vec<Trader>,
}

impl ExchangeMarket {
    /// Requires non-negative endowments summing to exactly 1 per good.
    pub fn new(goods: Vec<String>, mut traders: Vec<Trader>) -> Result<Self, MarketError> {
        let index = index_goods(&goods)?;
        for t in &mut traders {
            t.utilities.sort_by_key(|(g, _)| *g);
            if let Endowment::PerGood(rows) = &mut t.endowment {
                rows.sort_by_key(|(g, _)| *g);
            }
        }
        super::check_buyers(goods.len(), traders.iter().map(|t| (t.id.as_str(), t.utilities.as_slice())))?;
        let mut uniform = Rational::zero();
        let mut sums = vec![Rational::zero(); goods.len()];
        for t in &traders {
            match &t.endowment {
                Endowment::Uniform(w) => {
                    if w.is_negative() {
                        return Err(MarketError::NegativeAmount {
                            buyer: t.id.clone(),
                            good: "*".into(),
                            amount: w.clone(),
                        });
                    }
                    uniform += w;
                }
                Endowment::PerGood(rows) => {
                    for (g, w) in rows {
                        let name = goods.get(*g).ok_or_else(|| MarketError::UnknownGood(format!("#{g}")))?;
                        if w.is_negative() {
                            return Err(MarketError::NegativeAmount {
                                buyer: t.id.clone(),
                                good: name.clone(),
                                amount: w.clone(),
                            });
                        }
                        sums[*g] += w;
                    }
                }
            }
        }
        let one = Rational::one();
        for (g, s) in sums.into_iter().enumerate() {
            let total = s + &uniform;
            if total != one {
                return Err(MarketError::EndowmentSum { good: goods[g].clone(), sum: total });
            }
        }
        Ok(ExchangeMarket { goods, index, traders })
    }

    pub fn goods(&self) -> &[String] {
        &self.goods
    }

    pub fn traders(&self) -> &[Trader] {
        &self.traders
    }

    pub fn good_index(&self, name: &str) -> Option<GoodIndex> {
        self.index.get(name).copied()
    }
}

/// Endows each buyer with the share `e_i / Σ_k e_k` of every good.
pub fn to_exchange(fisher: &FisherMarket) -> ExchangeMarket {
    let total = fisher.total_budget();
    let traders = fisher
        .buyers()
        .iter()
        .map(|b| Trader {
            id: b.id().to_string(),
            endowment: Endowment::Uniform(b.budget() / &total),
            utilities: b.utilities().to_vec(),
        })
        .collect();
    ExchangeMarket::new(fisher.goods().to_vec(), traders).expect("shares of a positive total sum to 1")
}

/// Rescales `prices` so they sum to `total`. Returns `None` for all-zero prices.
pub fn normalize_prices(prices: &PriceVector, total: &Rational) -> Option<PriceVector> {
    let factor = total.checked_div(&prices.sum())?;
    Some(prices.scaled(&factor))
}

/// As `verify_fisher`, with each budget equal to the endowment's value at
/// `prices`. Prices are used as given.
pub fn verify_exchange(
    market: &ExchangeMarket,
    prices: &PriceVector,
    alloc: &Allocation,
    epsilon: &Rational,
) -> Result<EquilibriumReport, MarketError> {
    if epsilon.is_negative() {
        return Err(MarketError::NegativeEpsilon(epsilon.clone()));
    }
    check_prices(&market.goods, prices)?;
    check_allocation(&market.goods, market.traders.len(), alloc)?;
    let total = prices.sum();
    let verdicts: Vec<BuyerVerdict> = market
        .traders
        .par_iter()
        .zip(alloc.rows.par_iter())
        .map(|(t, row)| {
            let budget = match &t.endowment {
                Endowment::Uniform(w) => w * &total,
                per_good => per_good.value(prices),
            };
            buyer_verdict(&market.goods, &budget, &t.utilities, prices, row)
        })
        .collect();
    Ok(assemble(&market.goods, market.traders.iter().map(|t| t.id.clone()), verdicts, alloc, epsilon))
}

/// Strong connectivity of the economy graph: trader `i → i'` when `i` owns
/// some good `j` (`w_{i,j} > 0`) on which `i'` has a strictly increasing
/// utility.
///
/// Runs over the bipartite trader/good graph so uniform endowments cost
/// O(goods) rather than O(traders · goods).
pub fn economy_graph_strongly_connected(market: &ExchangeMarket) -> bool {
    let m = market.traders.len();
    if m <= 1 {
        return true;
    }
    let n = market.goods.len();
    let mut wanted_by = vec![Vec::new(); n];
    let mut owned_by = vec![Vec::new(); n];
    let mut uniform_owners = Vec::new();
    for (i, t) in market.traders.iter().enumerate() {
        for (g, u) in &t.utilities {
            if u.is_strictly_increasing() {
                wanted_by[*g].push(i);
            }
        }
        match &t.endowment {
            Endowment::Uniform(w) if w.is_positive() => uniform_owners.push(i),
            Endowment::Uniform(_) => {}
            Endowment::PerGood(rows) => {
                for (g, w) in rows {
                    if w.is_positive() {
                        owned_by[*g].push(i);
                    }
                }
            }
        }
    }
    let wants = |i: usize| -> Vec<GoodIndex> {
        market.traders[i]
            .utilities
            .iter()
            .filter(|(_, u)| u.is_strictly_increasing())
            .map(|(g, _)| *g)
            .collect()
    };
    let owns = |i: usize| -> Option<Vec<GoodIndex>> {
        match &market.traders[i].endowment {
            Endowment::Uniform(w) if w.is_positive() => None,
            Endowment::Uniform(_) => Some(Vec::new()),
            Endowment::PerGood(rows) => Some(rows.iter().filter(|(_, w)| w.is_positive()).map(|(g, _)| *g).collect()),
        }
    };

    // forward: trader --owns--> good --wanted by--> trader
    let forward = reach(m, n, owns, |g| wanted_by[g].clone(), &[]);
    // reverse: trader --wants--> good --owned by--> trader
    let reverse = reach(m, n, |i| Some(wants(i)), |g| owned_by[g].clone(), &uniform_owners);
    forward && reverse
}

/// BFS from trader 0. `goods_of(i) = None` means trader `i` reaches every good.
/// `always` traders are reached from any good.
fn reach(
    m: usize,
    n: usize,
    goods_of: impl Fn(usize) -> Option<Vec<GoodIndex>>,
    traders_of: impl Fn(GoodIndex) -> Vec<usize>,
    always: &[usize],
) -> bool {
    let mut seen_t = vec![false; m];
    let mut seen_g = vec![false; n];
    let mut all_goods_done = false;
    let mut always_done = false;
    let mut queue = VecDeque::from([0usize]);
    seen_t[0] = true;
    while let Some(i) = queue.pop_front() {
        let goods = match goods_of(i) {
            Some(gs) => gs,
            None if all_goods_done => continue,
            None => {
                all_goods_done = true;
                (0..n).collect()
            }
        };
        for g in goods {
            if std::mem::replace(&mut seen_g[g], true) {
                continue;
            }
            let mut next = traders_of(g);
            if !always_done {
                always_done = true;
                next.extend_from_slice(always);
            }
            for j in next {
                if !std::mem::replace(&mut seen_t[j], true) {
                    queue.push_back(j);
                }
            }
        }
    }
    seen_t.into_iter().all(|s| s)
}
