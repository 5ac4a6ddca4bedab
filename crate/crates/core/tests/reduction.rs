mod common;

use common::{circuit_corpus, r};
use fisher_gadgets::market::io::market_to_json;
use fisher_gadgets::market::PriceVector;
use fisher_gadgets::purecircuit::{all_satisfied, brute_force_solve, check_assignment, parse_circuit, Value};
use fisher_gadgets::reduction::meta::{from_meta, meta_to_json};
use fisher_gadgets::reduction::{audit, compile, compile_selected, decode, Override, ReducedMarket, REF_GOOD};
use fisher_gadgets::Rational;
use proptest::prelude::*;
use std::sync::LazyLock;

#[test]
fn corpus_audits_clean_at_full_scale() {
    for (name, circuit) in circuit_corpus() {
        let reduced = compile(&circuit, &r(0, 1), None).unwrap();
        let report = audit(&reduced);
        assert!(report.pass(), "{name}: {report:?}");
    }
}

#[test]
fn corpus_audits_clean_under_override() {
    for (name, circuit) in circuit_corpus() {
        for (k, d) in [(1, 2), (3, 4)] {
            let reduced = compile(&circuit, &r(1, 12), Some(Override { k, d })).unwrap();
            assert!(audit(&reduced).pass(), "{name} k={k} d={d}");
        }
    }
}

#[test]
fn compile_is_pure() {
    for (name, circuit) in circuit_corpus() {
        let a = compile(&circuit, &r(1, 20), Some(Override { k: 2, d: 4 })).unwrap();
        let b = compile(&circuit, &r(1, 20), Some(Override { k: 2, d: 4 })).unwrap();
        assert_eq!(market_to_json(&a.market), market_to_json(&b.market), "{name}");
        assert_eq!(meta_to_json(&a), meta_to_json(&b), "{name}");
    }
}

#[test]
fn meta_rebuilds_the_market() {
    let circuit = parse_circuit("nodes 3\nNAND 0 1 2\nNOT 1 0\nNOT 0 1\n").unwrap();
    let reduced = compile_selected(&circuit, &r(1, 12), None, Some(&[3, 1759])).unwrap();
    let rebuilt = from_meta(&meta_to_json(&reduced)).unwrap();
    assert_eq!(rebuilt.market, reduced.market);
    assert_eq!(rebuilt.compiled_copies(), vec![3, 1759]);
}

#[test]
fn corpus_solutions_check_out() {
    for (name, circuit) in circuit_corpus() {
        let a = brute_force_solve(&circuit, 1 << 20).unwrap();
        assert!(all_satisfied(&check_assignment(&circuit, &a).unwrap()), "{name}");
    }
}

static ALL_GATES: LazyLock<ReducedMarket> = LazyLock::new(|| {
    let (_, circuit) = circuit_corpus().into_iter().find(|(n, _)| n == "all_gates").unwrap();
    compile(&circuit, &r(0, 1), None).unwrap()
});

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // synthetic prices: p_ref = 1, variables of the selected copy at
    // H_high (value 1) or L/2 (value 0)
    #[test]
    fn decode_reads_back_pure_prices(bits in proptest::collection::vec(any::<bool>(), 6)) {
        let reduced = &*ALL_GATES;
        let p = &reduced.params;
        let copy = p.copy_containing(&p.s).unwrap();
        let layout = reduced.copy(copy).unwrap();
        let l = p.low_threshold(&p.s);
        let mut prices = PriceVector::uniform(reduced.market.goods().len(), p.s.clone());
        prices.0[REF_GOOD] = Rational::one();
        for (&g, &bit) in layout.variables.iter().zip(&bits) {
            prices.0[g] = if bit { layout.h_high.clone() } else { &l / &r(2, 1) };
        }
        let decoded = decode(reduced, &prices).unwrap();
        prop_assert_eq!(decoded.copy, copy);
        let want: Vec<Value> = bits.iter().map(|&b| if b { Value::One } else { Value::Zero }).collect();
        prop_assert_eq!(decoded.assignment.values, want);
    }
}
