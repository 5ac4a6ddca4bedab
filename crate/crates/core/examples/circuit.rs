//! Parse a Pure-Circuit instance, solve it by enumeration and check gates.
//!
//!     cargo run --example circuit -- tests/fixtures/circuits/all_gates.pc

use fisher_gadgets::purecircuit::{all_satisfied, brute_force_solve, check_assignment, parse_circuit, validate};

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable .pc file"),
        None => "nodes 3\nNAND 0 1 2\nNOT 1 0\nNOT 0 1\n".to_string(),
    };
    let circuit = parse_circuit(&text).expect("valid circuit");
    for w in validate(&circuit) {
        println!("warning: {w:?}");
    }
    let solution = brute_force_solve(&circuit, 1 << 20).expect("instance is small");
    let values: Vec<String> = solution.values.iter().map(|v| v.to_string()).collect();
    println!("first solution in lexicographic order: [{}]", values.join(", "));
    let verdicts = check_assignment(&circuit, &solution).unwrap();
    println!("all gates satisfied: {}", all_satisfied(&verdicts));
}
