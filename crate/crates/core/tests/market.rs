mod common;

use common::{r, random_instance, random_planted, vertex_oracle};
use fisher_gadgets::market::io::{allocation_from_json, allocation_to_json, market_from_json, market_to_json};
use fisher_gadgets::market::{
    normalize_prices, optimal_bundle, to_exchange, verify_exchange, verify_fisher, Allocation,
};
use fisher_gadgets::Rational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_matches_vertex_oracle(seed in any::<u64>(), goods in 1usize..=4, segs in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (buyer, prices) = random_instance(&mut rng, goods, segs);
        let greedy = optimal_bundle(&buyer, &prices).unwrap();
        prop_assert_eq!(greedy.max_utility, vertex_oracle(&buyer, &prices));
        prop_assert!(greedy.spend <= *buyer.budget());
    }

    #[test]
    fn raising_one_price_never_helps(seed in any::<u64>(), good in 0usize..4, num in 1i64..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (buyer, prices) = random_instance(&mut rng, 4, 3);
        let mut higher = prices.clone();
        higher.0[good] = &higher.0[good] + &r(num, 3);
        let before = optimal_bundle(&buyer, &prices).unwrap().max_utility;
        let after = optimal_bundle(&buyer, &higher).unwrap().max_utility;
        prop_assert!(after <= before);
    }

    #[test]
    fn fisher_and_exchange_equilibria_correspond(seed in any::<u64>(), scale in 1i64..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (market, prices, alloc) = random_planted(&mut rng);
        let eps = r(1, 12);
        prop_assert!(verify_fisher(&market, &prices, &alloc, &eps).unwrap().pass);

        let exchange = to_exchange(&market);
        let normalized = normalize_prices(&prices, &market.total_budget()).unwrap();
        prop_assert!(verify_exchange(&exchange, &normalized, &alloc, &eps).unwrap().pass);
        let scaled = normalized.scaled(&Rational::from_integer(scale));
        prop_assert!(verify_exchange(&exchange, &scaled, &alloc, &eps).unwrap().pass);

        // back from an exchange equilibrium at arbitrary scale
        let back = normalize_prices(&scaled, &market.total_budget()).unwrap();
        prop_assert!(verify_fisher(&market, &back, &alloc, &eps).unwrap().pass);
    }

    #[test]
    fn reports_are_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (market, prices, alloc) = random_planted(&mut rng);
        let doubled = prices.scaled(&r(2, 1));
        let a = verify_fisher(&market, &doubled, &alloc, &r(0, 1)).unwrap();
        let b = verify_fisher(&market, &doubled, &alloc, &r(0, 1)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (market, _, alloc) = random_planted(&mut rng);
        let text = market_to_json(&market);
        let back = market_from_json(&text).unwrap();
        prop_assert_eq!(&back, &market);
        let ids: Vec<&str> = market.buyers().iter().map(|b| b.id()).collect();
        let alloc_text = allocation_to_json(market.goods(), &ids, &alloc);
        prop_assert_eq!(allocation_from_json(market.goods(), &ids, &alloc_text).unwrap(), alloc);
    }
}

#[test]
fn halved_bundle_is_suboptimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (market, prices, alloc) = random_planted(&mut rng);
    let mut rows = alloc.rows.clone();
    rows[0].iter_mut().for_each(|(_, x)| *x = &*x * &r(1, 2));
    let short = Allocation { rows };
    let report = verify_fisher(&market, &prices, &short, &r(1, 2)).unwrap();
    assert!(!report.pass, "halved bundle leaves budget unspent");
    assert_eq!(report.buyers_suboptimal, 1);
}
