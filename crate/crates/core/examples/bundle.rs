//! Greedy optimal bundle of one SPLC buyer, and the demand interval that
//! appears when two goods tie on bang-per-buck.

use fisher_gadgets::market::{demand_interval, optimal_bundle, Buyer, PriceVector, SplcSegment, SplcUtility};
use fisher_gadgets::q;

fn main() {
    let apples = SplcUtility::new(vec![SplcSegment::finite(q(1, 2), q(4, 1)), SplcSegment::unbounded(q(1, 1))]).unwrap();
    let pears = SplcUtility::capped(q(2, 1), q(1, 1));
    let buyer = Buyer::new("ann", q(2, 1), vec![(0, apples), (1, pears)]).unwrap();

    for prices in [vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(1, 1)], vec![q(1, 2), q(1, 4)]] {
        let prices = PriceVector(prices);
        let best = optimal_bundle(&buyer, &prices).unwrap();
        let band = demand_interval(&buyer, &prices, 0).unwrap();
        println!(
            "p = ({}, {}): utility {}, spend {}, bundle {:?}, apples demand {band:?}",
            prices.0[0], prices.0[1], best.max_utility, best.spend, best.bundle
        );
    }
}
