//! JSON documents for markets, prices and allocations.
//!
//! Rationals are strings (`"3"`, `"2/11"`); segment lengths may be `"inf"`.
//! Maps are written in goods-list (or buyer-list) order.
//!
//! ```json
//! {"goods": ["ref"],
//!  "buyers": [{"id": "b_ref", "budget": "1",
//!              "utilities": {"ref": [{"length": "inf", "slope": "1"}]}}]}
//! ```
//!
//! Exchange documents carry `endowments` instead of `budget`. The key `"*"`
//! stands for an equal share of every good.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    Allocation, Buyer, Endowment, ExchangeMarket, FisherMarket, MarketError, PriceVector, SplcSegment, SplcUtility,
    Trader,
};
use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Market(#[from] MarketError),
}

type UtilityDoc = IndexMap<String, Vec<SplcSegment>>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BuyerDoc {
    id: String,
    budget: Rational,
    utilities: UtilityDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarketDoc {
    goods: Vec<String>,
    buyers: Vec<BuyerDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraderDoc {
    id: String,
    endowments: IndexMap<String, Rational>,
    utilities: UtilityDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExchangeDoc {
    goods: Vec<String>,
    buyers: Vec<TraderDoc>,
}

const ALL_GOODS: &str = "*";

fn utilities_to_doc(goods: &[String], utils: &[(usize, SplcUtility)]) -> UtilityDoc {
    utils.iter().map(|(g, u)| (goods[*g].clone(), u.segments().to_vec())).collect()
}

fn utilities_from_doc(
    lookup: impl Fn(&str) -> Option<usize>,
    doc: UtilityDoc,
) -> Result<Vec<(usize, SplcUtility)>, MarketError> {
    doc.into_iter()
        .map(|(name, segs)| {
            let g = lookup(&name).ok_or(MarketError::UnknownGood(name))?;
            Ok((g, SplcUtility::new(segs)?))
        })
        .collect()
}

fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn market_to_json(market: &FisherMarket) -> String {
    let doc = MarketDoc {
        goods: market.goods().to_vec(),
        buyers: market
            .buyers()
            .iter()
            .map(|b| BuyerDoc {
                id: b.id().to_string(),
                budget: b.budget().clone(),
                utilities: utilities_to_doc(market.goods(), b.utilities()),
            })
            .collect(),
    };
    to_pretty(&doc)
}

pub fn market_from_json(text: &str) -> Result<FisherMarket, DocError> {
    let doc: MarketDoc = serde_json::from_str(text)?;
    let index: std::collections::HashMap<&str, usize> =
        doc.goods.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let buyers = doc
        .buyers
        .into_iter()
        .map(|b| {
            let utils = utilities_from_doc(|n| index.get(n).copied(), b.utilities)?;
            Buyer::new(b.id, b.budget, utils)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FisherMarket::new(doc.goods, buyers)?)
}

pub fn exchange_to_json(market: &ExchangeMarket) -> String {
    let goods = market.goods();
    let doc = ExchangeDoc {
        goods: goods.to_vec(),
        buyers: market
            .traders()
            .iter()
            .map(|t| TraderDoc {
                id: t.id.clone(),
                endowments: match &t.endowment {
                    Endowment::Uniform(w) => IndexMap::from([(ALL_GOODS.to_string(), w.clone())]),
                    Endowment::PerGood(rows) => rows.iter().map(|(g, w)| (goods[*g].clone(), w.clone())).collect(),
                },
                utilities: utilities_to_doc(goods, &t.utilities),
            })
            .collect(),
    };
    to_pretty(&doc)
}

pub fn exchange_from_json(text: &str) -> Result<ExchangeMarket, DocError> {
    let doc: ExchangeDoc = serde_json::from_str(text)?;
    let index: std::collections::HashMap<&str, usize> =
        doc.goods.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let traders = doc
        .buyers
        .into_iter()
        .map(|t| {
            let utilities = utilities_from_doc(|n| index.get(n).copied(), t.utilities)?;
            let endowment = match t.endowments.get(ALL_GOODS) {
                Some(w) if t.endowments.len() == 1 => Endowment::Uniform(w.clone()),
                Some(_) => {
                    return Err(MarketError::UnknownGood(format!("{ALL_GOODS} mixed with named endowments")))
                }
                None => Endowment::PerGood(
                    t.endowments
                        .into_iter()
                        .map(|(n, w)| index.get(n.as_str()).map(|&g| (g, w)).ok_or(MarketError::UnknownGood(n)))
                        .collect::<Result<_, _>>()?,
                ),
            };
            Ok(Trader { id: t.id, endowment, utilities })
        })
        .collect::<Result<Vec<_>, MarketError>>()?;
    Ok(ExchangeMarket::new(doc.goods, traders)?)
}

pub fn prices_to_json(goods: &[String], prices: &PriceVector) -> String {
    let doc: IndexMap<&str, &Rational> = goods.iter().map(String::as_str).zip(&prices.0).collect();
    to_pretty(&doc)
}

/// Prices must be given for every good and nothing else.
pub fn prices_from_json(goods: &[String], text: &str) -> Result<PriceVector, DocError> {
    let mut doc: IndexMap<String, Rational> = serde_json::from_str(text)?;
    let prices = goods
        .iter()
        .map(|g| doc.swap_remove(g).ok_or_else(|| MarketError::MissingPrice(g.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((extra, _)) = doc.into_iter().next() {
        return Err(MarketError::UnknownGood(extra).into());
    }
    Ok(PriceVector(prices))
}

/// Every buyer appears, with possibly empty bundle.
pub fn allocation_to_json(goods: &[String], buyer_ids: &[&str], alloc: &Allocation) -> String {
    let doc: IndexMap<&str, IndexMap<&str, &Rational>> = buyer_ids
        .iter()
        .zip(&alloc.rows)
        .map(|(id, row)| (*id, row.iter().map(|(g, x)| (goods[*g].as_str(), x)).collect()))
        .collect();
    to_pretty(&doc)
}

/// Missing buyers get empty bundles; zero entries are dropped.
pub fn allocation_from_json(goods: &[String], buyer_ids: &[&str], text: &str) -> Result<Allocation, DocError> {
    let doc: IndexMap<String, IndexMap<String, Rational>> = serde_json::from_str(text)?;
    let gidx: std::collections::HashMap<&str, usize> = goods.iter().enumerate().map(|(i, g)| (g.as_str(), i)).collect();
    let bidx: std::collections::HashMap<&str, usize> = buyer_ids.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let mut alloc = Allocation::empty(buyer_ids.len());
    for (buyer, row) in doc {
        let bi = *bidx.get(buyer.as_str()).ok_or_else(|| MarketError::UnknownBuyer(buyer.clone()))?;
        let mut bundle = Vec::with_capacity(row.len());
        for (good, x) in row {
            let g = *gidx.get(good.as_str()).ok_or_else(|| MarketError::UnknownGood(good.clone()))?;
            if x.is_negative() {
                return Err(MarketError::NegativeAmount { buyer, good, amount: x }.into());
            }
            if x.is_positive() {
                bundle.push((g, x));
            }
        }
        bundle.sort_by_key(|(g, _)| *g);
        if bundle.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(MarketError::DuplicateUtility { buyer, good: "allocation entry".into() }.into());
        }
        alloc.rows[bi] = bundle;
    }
    Ok(alloc)
}
