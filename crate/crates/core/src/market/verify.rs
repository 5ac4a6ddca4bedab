use rayon::prelude::*;
use serde::Serialize;

use super::bundle::{greedy, row_spend, row_utility};
use super::{check_prices, Allocation, Bundle, FisherMarket, GoodIndex, MarketError, PriceVector, SplcUtility};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum BuyerVerdict {
    Optimal,
    Suboptimal { achieved: Rational, max: Rational },
    UnboundedDemand { good: String },
    OverBudget { spend: Rational, budget: Rational },
}

impl BuyerVerdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, BuyerVerdict::Optimal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoodReport {
    pub good: String,
    pub demand: Rational,
    /// Σ_i x_{i,j} − 1
    pub slack: Rational,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BuyerReport {
    pub buyer: String,
    #[serde(flatten)]
    pub verdict: BuyerVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub epsilon: Rational,
    pub pass: bool,
    pub max_abs_slack: Rational,
    pub goods_violating: usize,
    pub buyers_suboptimal: usize,
    pub goods: Vec<GoodReport>,
    pub buyers: Vec<BuyerReport>,
}

impl EquilibriumReport {
    pub fn failing_buyers(&self) -> impl Iterator<Item = &BuyerReport> {
        self.buyers.iter().filter(|b| !b.verdict.is_optimal())
    }
}

/// Verdict for one row given the buyer's effective budget.
pub fn buyer_verdict(
    goods: &[String],
    budget: &Rational,
    utilities: &[(GoodIndex, SplcUtility)],
    prices: &PriceVector,
    row: &Bundle,
) -> BuyerVerdict {
    let best = match greedy(budget, utilities, prices) {
        Ok(b) => b,
        Err(e) => return BuyerVerdict::UnboundedDemand { good: goods[e.good].clone() },
    };
    let spend = row_spend(row, prices);
    if spend > *budget {
        return BuyerVerdict::OverBudget { spend, budget: budget.clone() };
    }
    let achieved = row_utility(utilities, row);
    if achieved == best.max_utility {
        BuyerVerdict::Optimal
    } else {
        BuyerVerdict::Suboptimal { achieved, max: best.max_utility }
    }
}

pub(crate) fn check_allocation(goods: &[String], n_buyers: usize, alloc: &Allocation) -> Result<(), MarketError> {
    if alloc.rows.len() != n_buyers {
        return Err(MarketError::Dimension { what: "allocation rows", expected: n_buyers, got: alloc.rows.len() });
    }
    for row in &alloc.rows {
        for (g, x) in row {
            if *g >= goods.len() {
                return Err(MarketError::UnknownGood(format!("#{g}")));
            }
            if x.is_negative() {
                return Err(MarketError::NegativeAmount {
                    buyer: String::new(),
                    good: goods[*g].clone(),
                    amount: x.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Assembles the report; `verdicts` are in buyer order.
pub(crate) fn assemble(
    goods: &[String],
    ids: impl Iterator<Item = String>,
    verdicts: Vec<BuyerVerdict>,
    alloc: &Allocation,
    epsilon: &Rational,
) -> EquilibriumReport {
    let one = Rational::one();
    let goods_report: Vec<GoodReport> = alloc
        .column_sums(goods.len())
        .into_iter()
        .zip(goods)
        .map(|(demand, good)| {
            let slack = &demand - &one;
            let within = slack.abs() <= *epsilon;
            GoodReport { good: good.clone(), demand, slack, within }
        })
        .collect();
    let max_abs_slack = goods_report.iter().map(|g| g.slack.abs()).max().unwrap_or_default();
    let goods_violating = goods_report.iter().filter(|g| !g.within).count();
    let buyers: Vec<BuyerReport> =
        ids.zip(verdicts).map(|(buyer, verdict)| BuyerReport { buyer, verdict }).collect();
    let buyers_suboptimal = buyers.iter().filter(|b| !b.verdict.is_optimal()).count();
    EquilibriumReport {
        epsilon: epsilon.clone(),
        pass: goods_violating == 0 && buyers_suboptimal == 0,
        max_abs_slack,
        goods_violating,
        buyers_suboptimal,
        goods: goods_report,
        buyers,
    }
}

/// Checks every buyer's bundle for optimality and every good for clearing
/// within `epsilon`.
pub fn verify_fisher(
    market: &FisherMarket,
    prices: &PriceVector,
    alloc: &Allocation,
    epsilon: &Rational,
) -> Result<EquilibriumReport, MarketError> {
    if epsilon.is_negative() {
        return Err(MarketError::NegativeEpsilon(epsilon.clone()));
    }
    check_prices(market.goods(), prices)?;
    check_allocation(market.goods(), market.buyers().len(), alloc)?;
    let verdicts: Vec<BuyerVerdict> = market
        .buyers()
        .par_iter()
        .zip(alloc.rows.par_iter())
        .map(|(b, row)| buyer_verdict(market.goods(), b.budget(), b.utilities(), prices, row))
        .collect();
    Ok(assemble(market.goods(), market.buyers().iter().map(|b| b.id().to_string()), verdicts, alloc, epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Buyer, SplcUtility};
    use crate::rational::q;

    fn ref_only() -> FisherMarket {
        let b = Buyer::new("b_ref", q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]).unwrap();
        FisherMarket::new(vec!["ref".into()], vec![b]).unwrap()
    }

    #[test]
    fn trivial_market_clears() {
        let m = ref_only();
        let alloc = Allocation { rows: vec![vec![(0, q(1, 1))]] };
        let r = verify_fisher(&m, &PriceVector(vec![q(1, 1)]), &alloc, &q(0, 1)).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn doubled_price_needs_half_epsilon() {
        let m = ref_only();
        let alloc = Allocation { rows: vec![vec![(0, q(1, 2))]] };
        let p = PriceVector(vec![q(2, 1)]);
        let r = verify_fisher(&m, &p, &alloc, &q(0, 1)).unwrap();
        assert!(!r.pass);
        assert_eq!(r.goods[0].slack, q(-1, 2));
        assert!(r.buyers[0].verdict.is_optimal());
        assert!(verify_fisher(&m, &p, &alloc, &q(1, 2)).unwrap().pass);
    }

    #[test]
    fn verdict_kinds() {
        let m = ref_only();
        let p = PriceVector(vec![q(1, 1)]);
        let over = Allocation { rows: vec![vec![(0, q(2, 1))]] };
        let r = verify_fisher(&m, &p, &over, &q(1, 1)).unwrap();
        assert!(matches!(r.buyers[0].verdict, BuyerVerdict::OverBudget { .. }));
        let under = Allocation { rows: vec![vec![(0, q(1, 2))]] };
        let r = verify_fisher(&m, &p, &under, &q(1, 1)).unwrap();
        assert_eq!(r.buyers[0].verdict, BuyerVerdict::Suboptimal { achieved: q(1, 2), max: q(1, 1) });
        let r = verify_fisher(&m, &PriceVector(vec![q(0, 1)]), &under, &q(1, 1)).unwrap();
        assert_eq!(r.buyers[0].verdict, BuyerVerdict::UnboundedDemand { good: "ref".into() });
    }

    #[test]
    fn shape_errors() {
        let m = ref_only();
        assert!(verify_fisher(&m, &PriceVector(vec![]), &Allocation::empty(1), &q(0, 1)).is_err());
        assert!(verify_fisher(&m, &PriceVector(vec![q(1, 1)]), &Allocation::empty(2), &q(0, 1)).is_err());
        assert!(verify_fisher(&m, &PriceVector(vec![q(1, 1)]), &Allocation::empty(1), &q(-1, 1)).is_err());
    }
}
