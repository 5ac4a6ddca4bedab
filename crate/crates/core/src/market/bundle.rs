use std::cmp::Ordering;

use serde::Serialize;

use super::{Buyer, Bundle, GoodIndex, Length, PriceVector, SplcUtility};
use crate::rational::Rational;

/// Price 0 on a good the buyer still wants more of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnboundedDemand {
    pub good: GoodIndex,
}

/// Evaluates `u(amount)`; amounts past the last segment add nothing.
pub fn utility_value(u: &SplcUtility, amount: &Rational) -> Rational {
    let mut left = amount.clone();
    let mut total = Rational::zero();
    for seg in u.segments() {
        if !left.is_positive() {
            break;
        }
        let take = match &seg.length {
            Length::Finite(len) => left.clone().min(len.clone()),
            Length::Unbounded => left.clone(),
        };
        total += &seg.slope * &take;
        left -= take;
    }
    total
}

/// The canonical greedy solution of a buyer's optimal-bundle program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OptimalBundle {
    pub max_utility: Rational,
    pub bundle: Bundle,
    pub spend: Rational,
}

struct Piece<'a> {
    good: GoodIndex,
    seg: usize,
    slope: &'a Rational,
    length: &'a Length,
    price: &'a Rational,
}

impl Piece<'_> {
    /// Descending bang-per-buck, then ascending (good, segment).
    fn order(&self, other: &Piece<'_>) -> Ordering {
        let lhs = self.slope * other.price;
        let rhs = other.slope * self.price;
        rhs.cmp(&lhs).then((self.good, self.seg).cmp(&(other.good, other.seg)))
    }

    fn same_ratio(&self, other: &Piece<'_>) -> bool {
        self.slope * other.price == other.slope * self.price
    }

    fn cost(&self) -> Option<Rational> {
        match self.length {
            Length::Finite(len) => Some(len * self.price),
            Length::Unbounded => None,
        }
    }
}

/// Splits a buyer's positive-slope segments into free ones (price 0, bought
/// outright) and priced ones sorted by bang-per-buck.
fn pieces<'a>(
    utilities: &'a [(GoodIndex, SplcUtility)],
    prices: &'a PriceVector,
) -> Result<(Vec<Piece<'a>>, Vec<Piece<'a>>), UnboundedDemand> {
    let mut free = Vec::new();
    let mut priced = Vec::new();
    for (good, u) in utilities {
        let price = prices.get(*good);
        for (seg, s) in u.segments().iter().enumerate() {
            if !s.slope.is_positive() {
                continue;
            }
            let piece = Piece { good: *good, seg, slope: &s.slope, length: &s.length, price };
            if price.is_zero() {
                if s.length.is_unbounded() {
                    return Err(UnboundedDemand { good: *good });
                }
                free.push(piece);
            } else {
                priced.push(piece);
            }
        }
    }
    priced.sort_by(|a, b| a.order(b));
    Ok((free, priced))
}

fn push_amount(bundle: &mut Bundle, good: GoodIndex, amount: Rational) {
    if !amount.is_positive() {
        return;
    }
    match bundle.binary_search_by_key(&good, |(g, _)| *g) {
        Ok(i) => bundle[i].1 += amount,
        Err(i) => bundle.insert(i, (good, amount)),
    }
}

pub(crate) fn greedy(
    budget: &Rational,
    utilities: &[(GoodIndex, SplcUtility)],
    prices: &PriceVector,
) -> Result<OptimalBundle, UnboundedDemand> {
    let (free, priced) = pieces(utilities, prices)?;
    let mut bundle = Bundle::new();
    let mut utility = Rational::zero();
    for p in free {
        let Length::Finite(len) = p.length else { unreachable!() };
        utility += p.slope * len;
        push_amount(&mut bundle, p.good, len.clone());
    }
    let mut remaining = budget.clone();
    for p in priced {
        if !remaining.is_positive() {
            break;
        }
        let amount = match p.cost() {
            Some(cost) if cost <= remaining => {
                remaining -= cost;
                let Length::Finite(len) = p.length else { unreachable!() };
                len.clone()
            }
            _ => {
                let amount = &remaining / p.price;
                remaining = Rational::zero();
                amount
            }
        };
        utility += p.slope * &amount;
        push_amount(&mut bundle, p.good, amount);
    }
    Ok(OptimalBundle { max_utility: utility, bundle, spend: budget - &remaining })
}

/// Greedy optimal bundle under the `(good, segment)` tie-break.
pub fn optimal_bundle(buyer: &Buyer, prices: &PriceVector) -> Result<OptimalBundle, UnboundedDemand> {
    greedy(buyer.budget(), buyer.utilities(), prices)
}

/// Range of amounts of one good over the whole optimal set of a buyer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandInterval {
    pub min: Rational,
    /// `None` when leftover budget can buy arbitrarily much at price 0.
    pub max: Option<Rational>,
}

pub(crate) fn interval(
    budget: &Rational,
    utilities: &[(GoodIndex, SplcUtility)],
    prices: &PriceVector,
    good: GoodIndex,
) -> Result<DemandInterval, UnboundedDemand> {
    let (free, priced) = pieces(utilities, prices)?;
    let mut base = Rational::zero();
    for p in free.iter().filter(|p| p.good == good) {
        let Length::Finite(len) = p.length else { unreachable!() };
        base += len;
    }
    let price = prices.get(good);
    let mut remaining = budget.clone();
    let mut min = base.clone();
    let mut max = base;
    let mut start = 0;
    while start < priced.len() && remaining.is_positive() {
        let mut end = start + 1;
        while end < priced.len() && priced[start].same_ratio(&priced[end]) {
            end += 1;
        }
        let level = &priced[start..end];
        // cost capacity of the level, split into this good's share and the rest
        let mut mine: Option<Rational> = Some(Rational::zero());
        let mut others: Option<Rational> = Some(Rational::zero());
        for p in level {
            let slot = if p.good == good { &mut mine } else { &mut others };
            *slot = match (slot.take(), p.cost()) {
                (Some(acc), Some(c)) => Some(acc + c),
                _ => None,
            };
        }
        let capacity = match (&mine, &others) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        match capacity {
            Some(cap) if cap <= remaining => {
                if level.iter().any(|p| p.good == good) {
                    let bought = mine.expect("finite level") / price;
                    min += &bought;
                    max += bought;
                }
                remaining -= cap;
            }
            _ => {
                // marginal level: exactly `remaining` is spent across it
                let lo = match &others {
                    Some(o) if *o < remaining => &remaining - o,
                    _ => Rational::zero(),
                };
                let hi = match &mine {
                    Some(m) if *m < remaining => m.clone(),
                    _ => remaining.clone(),
                };
                if level.iter().any(|p| p.good == good) {
                    min += lo / price;
                    max += hi / price;
                }
                remaining = Rational::zero();
            }
        }
        start = end;
    }
    // leftover budget may go to any good without changing utility
    let max = if remaining.is_positive() {
        if price.is_zero() {
            None
        } else {
            Some(max + &remaining / price)
        }
    } else {
        Some(max)
    };
    Ok(DemandInterval { min, max })
}

/// Minimum and maximum amount of `good` over the buyer's optimal bundles.
pub fn demand_interval(buyer: &Buyer, prices: &PriceVector, good: GoodIndex) -> Result<DemandInterval, UnboundedDemand> {
    interval(buyer.budget(), buyer.utilities(), prices, good)
}

pub(crate) fn row_utility(utilities: &[(GoodIndex, SplcUtility)], row: &Bundle) -> Rational {
    row.iter()
        .filter_map(|(g, x)| {
            utilities
                .binary_search_by_key(g, |(h, _)| *h)
                .ok()
                .map(|i| utility_value(&utilities[i].1, x))
        })
        .sum()
}

pub(crate) fn row_spend(row: &Bundle, prices: &PriceVector) -> Rational {
    row.iter().map(|(g, x)| prices.get(*g) * x).sum()
}

/// Affordable and attains the optimal utility value.
pub fn is_optimal(buyer: &Buyer, prices: &PriceVector, row: &Bundle) -> Result<bool, UnboundedDemand> {
    let best = optimal_bundle(buyer, prices)?;
    Ok(row_spend(row, prices) <= *buyer.budget() && row_utility(buyer.utilities(), row) == best.max_utility)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::SplcSegment;
    use crate::rational::q;

    fn buyer(budget: Rational, utils: Vec<(usize, SplcUtility)>) -> Buyer {
        Buyer::new("b", budget, utils).unwrap()
    }

    #[test]
    fn evaluation() {
        let a = q(2, 1);
        let t = q(4, 11);
        assert_eq!(utility_value(&SplcUtility::capped(a.clone(), q(2, 11)), &q(1, 11)), q(2, 11));
        let u = SplcUtility::new(vec![SplcSegment::finite(t.clone(), a.clone()), SplcSegment::unbounded(q(0, 1))]).unwrap();
        assert_eq!(utility_value(&u, &(&t * &q(2, 1))), &a * &t);
        assert_eq!(utility_value(&u, &q(0, 1)), q(0, 1));
    }

    #[test]
    fn single_good_linear() {
        let b = buyer(q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]);
        let out = optimal_bundle(&b, &PriceVector(vec![q(1, 2)])).unwrap();
        assert_eq!(out.bundle, vec![(0, q(2, 1))]);
        assert_eq!(out.max_utility, q(2, 1));
        assert_eq!(out.spend, q(1, 1));
    }

    #[test]
    fn zero_price_unbounded_is_an_error() {
        let b = buyer(q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]);
        assert_eq!(optimal_bundle(&b, &PriceVector(vec![q(0, 1)])), Err(UnboundedDemand { good: 0 }));
    }

    #[test]
    fn free_capped_segment_is_taken_and_leftover_allowed() {
        let b = buyer(q(1, 1), vec![(0, SplcUtility::capped(q(3, 1), q(1, 2))), (1, SplcUtility::capped(q(1, 1), q(1, 4)))]);
        let out = optimal_bundle(&b, &PriceVector(vec![q(0, 1), q(1, 1)])).unwrap();
        assert_eq!(out.bundle, vec![(0, q(1, 2)), (1, q(1, 4))]);
        assert_eq!(out.spend, q(1, 4));
        let d = demand_interval(&b, &PriceVector(vec![q(0, 1), q(1, 1)]), 1).unwrap();
        assert_eq!(d, DemandInterval { min: q(1, 4), max: Some(q(1, 1)) });
    }

    #[test]
    fn tie_break_and_interval() {
        // both goods give bang-per-buck 1; greedy fills good 0 first
        let b = buyer(q(1, 1), vec![(0, SplcUtility::capped(q(1, 1), q(2, 1))), (1, SplcUtility::linear(q(1, 1)))]);
        let p = PriceVector(vec![q(1, 1), q(1, 1)]);
        let out = optimal_bundle(&b, &p).unwrap();
        assert_eq!(out.bundle, vec![(0, q(1, 1))]);
        assert_eq!(demand_interval(&b, &p, 0).unwrap(), DemandInterval { min: q(0, 1), max: Some(q(1, 1)) });
        assert_eq!(demand_interval(&b, &p, 1).unwrap(), DemandInterval { min: q(0, 1), max: Some(q(1, 1)) });
        // shifting spend between the tied goods keeps the bundle optimal
        assert!(is_optimal(&b, &p, &vec![(0, q(1, 3)), (1, q(2, 3))]).unwrap());
        assert!(!is_optimal(&b, &p, &vec![(0, q(1, 3))]).unwrap());
        assert!(!is_optimal(&b, &p, &vec![(0, q(1, 1)), (1, q(1, 100))]).unwrap());
    }

    #[test]
    fn aux_buys_exactly_r() {
        // aux(j, r) with H_high = 2s, p_ref = 1, p_j = s < H_high
        let s = q(1, 140800);
        let h_high = &s * &q(2, 1);
        let r = q(2, 11);
        let b = buyer(
            &r * &h_high,
            vec![(0, SplcUtility::linear(q(1, 1))), (1, SplcUtility::capped(&s * &q(2, 1), r.clone()))],
        );
        let p = PriceVector(vec![q(1, 1), s.clone()]);
        let out = optimal_bundle(&b, &p).unwrap();
        assert_eq!(out.bundle, vec![(0, &r * &s), (1, r)]);
        assert_eq!(out.spend, b.budget().clone());
    }

    #[test]
    fn interval_at_marginal_level_with_fixed_others() {
        // budget 3; level 1: good 0 cap cost 1; level 2 (tie): good 0 cost 1, good 1 cost 4
        let u0 = SplcUtility::new(vec![SplcSegment::finite(q(1, 1), q(4, 1)), SplcSegment::finite(q(1, 1), q(2, 1))]).unwrap();
        let u1 = SplcUtility::capped(q(2, 1), q(4, 1));
        let b = buyer(q(3, 1), vec![(0, u0), (1, u1)]);
        let p = PriceVector(vec![q(1, 1), q(1, 1)]);
        assert_eq!(demand_interval(&b, &p, 0).unwrap(), DemandInterval { min: q(1, 1), max: Some(q(2, 1)) });
        assert_eq!(demand_interval(&b, &p, 1).unwrap(), DemandInterval { min: q(1, 1), max: Some(q(2, 1)) });
    }
}
