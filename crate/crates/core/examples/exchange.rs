//! Fisher to Arrow-Debreu: endow each buyer with its budget share of every
//! good, normalize prices to the total budget and re-verify. Exchange
//! verdicts do not depend on the price scale.

use fisher_gadgets::market::io::exchange_to_json;
use fisher_gadgets::market::{
    economy_graph_strongly_connected, normalize_prices, to_exchange, verify_exchange, verify_fisher, Allocation,
    Buyer, FisherMarket, PriceVector, SplcUtility,
};
use fisher_gadgets::q;

fn main() {
    let market = FisherMarket::new(
        vec!["apples".into(), "pears".into()],
        vec![
            Buyer::new("ann", q(3, 1), vec![(0, SplcUtility::linear(q(3, 1))), (1, SplcUtility::linear(q(1, 1)))]).unwrap(),
            Buyer::new("bo", q(1, 1), vec![(0, SplcUtility::linear(q(1, 1))), (1, SplcUtility::linear(q(3, 1)))]).unwrap(),
        ],
    )
    .unwrap();
    let prices = PriceVector(vec![q(3, 1), q(1, 1)]);
    let alloc = Allocation { rows: vec![vec![(0, q(1, 1))], vec![(1, q(1, 1))]] };
    println!("fisher: {}", verify_fisher(&market, &prices, &alloc, &q(0, 1)).unwrap().pass);

    let exchange = to_exchange(&market);
    print!("{}", exchange_to_json(&exchange));
    println!("economy graph strongly connected: {}", economy_graph_strongly_connected(&exchange));
    let normalized = normalize_prices(&prices, &market.total_budget()).unwrap();
    for scale in [q(1, 1), q(7, 1), q(1, 1000)] {
        let report = verify_exchange(&exchange, &normalized.scaled(&scale), &alloc, &q(0, 1)).unwrap();
        println!("exchange at {scale}×: {}", report.pass);
    }
}
