//! Run the lemma suite on the exact equilibrium of a compiled NOT cycle.

use fisher_gadgets::purecircuit::parse_circuit;
use fisher_gadgets::reduction::compile;
use fisher_gadgets::solver::{lemma_suite, not_cycle_equilibrium};
use fisher_gadgets::q;

fn main() {
    let circuit = parse_circuit("nodes 3\nNOT 0 1\nNOT 1 2\nNOT 2 0\n").unwrap();
    let reduced = compile(&circuit, &q(0, 1), None).unwrap();
    let (prices, alloc) = not_cycle_equilibrium(&reduced).expect("disjoint NOT cycles");
    let report = lemma_suite(&reduced, &prices, &alloc, &q(0, 1)).unwrap();
    println!("copy {}, p_ref = {}, pass = {}", report.copy, report.p_ref, report.pass);
    for (id, records, applicable, failed) in report.tally() {
        println!("  {id:<28} {records:>4} records, {applicable:>4} applicable, {failed} failed");
    }
    if let Some(rec) = report.records.iter().find(|r| r.id == "not_anti_endowment") {
        println!("sample witnesses for {} at {}: {:?}", rec.id, rec.scope, rec.witnesses);
    }
}
