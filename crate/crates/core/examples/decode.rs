//! Read a circuit assignment off a price vector. Thresholds come from the
//! copy whose interval holds H = s·p_ref.

use fisher_gadgets::market::PriceVector;
use fisher_gadgets::purecircuit::parse_circuit;
use fisher_gadgets::reduction::{compile, decode, REF_GOOD};
use fisher_gadgets::q;

fn main() {
    let circuit = parse_circuit("nodes 3\nNOT 0 1\nNOT 1 2\nNOT 2 0\n").unwrap();
    let reduced = compile(&circuit, &q(0, 1), None).unwrap();
    let p = &reduced.params;

    for p_ref in [q(1, 1), q(3, 2), q(3, 5)] {
        let h = &p.s * &p_ref;
        let c = p.copy_containing(&h).unwrap();
        let layout = reduced.copy(c).unwrap();
        let l = p.low_threshold(&h);
        // node 0 high, node 1 low, node 2 in between
        let mut prices = PriceVector::uniform(reduced.market.goods().len(), h.clone());
        prices.0[REF_GOOD] = p_ref.clone();
        prices.0[layout.variables[1]] = &l / &q(2, 1);
        prices.0[layout.variables[2]] = h.midpoint(&l);
        let d = decode(&reduced, &prices).unwrap();
        println!("p_ref = {p_ref}: copy {}, H = {}, L = {}, values {:?}", d.copy, d.h, d.l, d.assignment.values);
    }
}
