//! Check a Fisher market equilibrium and print per-buyer verdicts.
//!
//!     cargo run --example verify -- market.json prices.json allocation.json 1/12

use fisher_gadgets::market::io::{allocation_from_json, market_from_json, prices_from_json};
use fisher_gadgets::market::verify_fisher;
use fisher_gadgets::Rational;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/markets");

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let files = if args.len() >= 3 {
        [args[0].clone(), args[1].clone(), args[2].clone()]
    } else {
        ["swap.json", "swap.prices.json", "swap.bad-allocation.json"].map(|f| format!("{FIXTURES}/{f}"))
    };
    let eps: Rational = args.get(3).map_or("0", String::as_str).parse().expect("ε as p/q");
    let read = |p: &str| std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{p}: {e}"));

    let market = market_from_json(&read(&files[0])).unwrap();
    let ids: Vec<&str> = market.buyers().iter().map(|b| b.id()).collect();
    let prices = prices_from_json(market.goods(), &read(&files[1])).unwrap();
    let alloc = allocation_from_json(market.goods(), &ids, &read(&files[2])).unwrap();

    let report = verify_fisher(&market, &prices, &alloc, &eps).unwrap();
    println!("pass: {} (max |slack| {})", report.pass, report.max_abs_slack);
    for g in &report.goods {
        println!("  good {:>8}: demand {}", g.good, g.demand);
    }
    for b in &report.buyers {
        println!("  buyer {:>7}: {:?}", b.buyer, b.verdict);
    }
}
