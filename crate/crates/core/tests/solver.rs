mod common;

use common::r;
use fisher_gadgets::market::{Buyer, FisherMarket, PriceVector, SplcSegment, SplcUtility};
use fisher_gadgets::reduction::Override;
use fisher_gadgets::solver::lab::{GadgetFixture, NAND_FIXTURE, NOT_FIXTURE};
use fisher_gadgets::solver::{
    chain_bounds, chain_ordering, grid_search, lemma_suite, not_cycle_equilibrium, pinned_bisection, tatonnement,
    canonical_demand_for, uniform_grid, BisectionResult, SolverConfig,
};
use fisher_gadgets::purecircuit::parse_circuit;
use fisher_gadgets::reduction::{compile, compute_params, params_for_circuit};
use fisher_gadgets::Rational;
use proptest::prelude::*;

const GRID_POINTS: usize = 1025;

/// Bisection's price and the first grid hit for `good`, plus the grid step.
fn both_oracles(
    market: &FisherMarket,
    pinned: &PriceVector,
    good: usize,
    (lo, hi): (&Rational, &Rational),
    eps: &Rational,
) -> (BisectionResult, Option<Rational>, Rational) {
    let tol = &(hi - lo) / &Rational::from_integer(1 << 40);
    let bisected = pinned_bisection(market, pinned, good, (lo, hi), eps, &tol).unwrap();
    let grid = uniform_grid(lo, hi, GRID_POINTS);
    let step = &grid[1] - &grid[0];
    let hit = grid_search(market, eps, pinned, &[good], &grid).unwrap();
    (bisected, hit.map(|h| h.prices.0[good].clone()), step)
}

/// The two answers agree when they are within one grid step, or when every
/// grid-spaced price between them also ε-clears: demand is monotone, so the
/// ε-clearing prices form one interval and both oracles landed in it.
fn same_window(
    market: &FisherMarket,
    pinned: &PriceVector,
    good: usize,
    a: &Rational,
    b: &Rational,
    step: &Rational,
    eps: &Rational,
) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if hi - lo <= *step {
        return true;
    }
    let mut prices = pinned.clone();
    let mut p = lo.clone();
    while p <= *hi {
        prices.0[good] = p.clone();
        let d = &canonical_demand_for(market, &prices, good).unwrap() - &Rational::one();
        if d.abs() > *eps {
            return false;
        }
        p = &p + step;
    }
    true
}

// Inputs pinned inside (L, H). Where the output clears on a tie (a band
// wider than a point) canonical demand jumps over 1 and no grid point can
// clear it; bisection lands on L or H exactly instead. Elsewhere demand is
// continuous and the two oracles must agree.
#[test]
fn bisection_and_grid_agree_on_gadgets() {
    let eps = r(1, 100);
    for (text, inputs, output) in [(NOT_FIXTURE, vec![0], 1), (NAND_FIXTURE, vec![0, 1], 2)] {
        let fx = GadgetFixture::from_text(text, &eps, None).unwrap();
        let vars = fx.layout().variables.clone();
        let bracket = (&fx.h / &r(64, 1), &fx.h * &r(2, 1));
        let mut continuous = 0;
        for j in 16..32 {
            let p_in = &fx.l + &(&(&fx.h - &fx.l) * &r(j, 32));
            let mut prices = fx.base_prices();
            for &node in &inputs {
                prices.0[vars[node]] = p_in.clone();
            }
            let (b, hit, step) = both_oracles(&fx.reduced.market, &prices, vars[output], (&bracket.0, &bracket.1), &eps);
            assert!(b.cleared, "j={j}");
            if b.demand.max.as_ref() == Some(&b.demand.min) {
                continuous += 1;
                let g = hit.unwrap_or_else(|| panic!("j={j}: no grid hit near {}", b.price));
                assert!(
                    same_window(&fx.reduced.market, &prices, vars[output], &b.price, &g, &step, &eps),
                    "j={j}: bisection {}, grid {g}, step {step}",
                    b.price
                );
            } else {
                assert!(b.price == fx.h || b.price == fx.l, "j={j}: tie away from a threshold at {}", b.price);
            }
        }
        assert!(continuous >= 3, "only {continuous} continuous cases");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // aux(r) plus a linear buyer with budget m/10: clearing price (m/10)/(1 − r)
    #[test]
    fn bisection_and_grid_agree_on_aux_market(m in 1i64..=20, r_num in 1i64..=6) {
        let rr = r(r_num, 11);
        let aux = Buyer::new(
            "aux",
            r(10, 1),
            vec![
                (0, SplcUtility::linear(r(1, 1))),
                (1, SplcUtility::new(vec![SplcSegment::finite(rr.clone(), r(1000, 1))]).unwrap()),
            ],
        )
        .unwrap();
        let anchor = Buyer::new("anchor", r(1, 1), vec![(0, SplcUtility::linear(r(1, 1)))]).unwrap();
        let spender = Buyer::new("m", r(m, 10), vec![(1, SplcUtility::linear(r(1, 1)))]).unwrap();
        let market = FisherMarket::new(vec!["ref".into(), "x".into()], vec![anchor, aux, spender]).unwrap();
        let pinned = PriceVector(vec![r(1, 1), r(1, 1)]);
        let exact = &r(m, 10) / &(&r(1, 1) - &rr);
        let tol = r(1, 1 << 40);
        let b = pinned_bisection(&market, &pinned, 1, (&r(1, 100), &r(10, 1)), &r(0, 1), &tol).unwrap();
        prop_assert!((&b.price - &exact).abs() <= tol);
        // bracket from the budget alone: p* ∈ [m/10, 11m/50]
        let (lo, hi) = (r(m, 20), r(m, 4));
        let (b, hit, step) = both_oracles(&market, &pinned, 1, (&lo, &hi), &r(1, 50));
        let g = hit.expect("window wider than a grid step");
        prop_assert!(same_window(&market, &pinned, 1, &b.price, &g, &step, &r(1, 50)), "bisection {} grid {}", b.price, g);
    }
}

#[test]
fn chain_ordering_and_spot_values() {
    for eps in [r(0, 1), r(1, 12)] {
        let circuit = parse_circuit("nodes 3\nPURIFY 0 1 2\nNOT 1 0\n").unwrap();
        let params = params_for_circuit(&circuit, &eps, None).unwrap();
        let ordering = chain_ordering(&params);
        assert!(ordering.holds, "eps={eps}");
        assert_eq!(ordering.copies_checked as u64, params.k);
    }
    let params = compute_params(&r(0, 1), 1).unwrap();
    let h = params.s.clone();
    let b = chain_bounds(&params, 1, &h, &h, &params.low_threshold(&h));
    assert_eq!((b.a, b.a_prime), (r(3, 4), r(1, 4)));
}

#[test]
fn lemma_suite_passes_on_exact_equilibria() {
    for text in ["nodes 2\nNOT 0 1\nNOT 1 0\n", "nodes 4\nNOT 0 1\nNOT 1 2\nNOT 2 3\nNOT 3 0\n"] {
        let circuit = parse_circuit(text).unwrap();
        let reduced = compile(&circuit, &r(0, 1), None).unwrap();
        let (prices, alloc) = not_cycle_equilibrium(&reduced).unwrap();
        let report = lemma_suite(&reduced, &prices, &alloc, &r(0, 1)).unwrap();
        assert!(report.pass, "{:?}", report.failures().collect::<Vec<_>>());
        let again = lemma_suite(&reduced, &prices, &alloc, &r(0, 1)).unwrap();
        assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    }
}

#[test]
fn tatonnement_is_reproducible() {
    let circuit = parse_circuit("nodes 2\nNOT 0 1\nNOT 1 0\n").unwrap();
    let reduced = compile(&circuit, &r(1, 12), Some(Override { k: 1, d: 2 })).unwrap();
    let config = SolverConfig { max_iters: 40, restarts: 2, seed: 9, ..SolverConfig::default() };
    let a = tatonnement(&reduced.market, &config).unwrap();
    let b = tatonnement(&reduced.market, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trace.first().map(|t| t.iteration), Some(0));
}
