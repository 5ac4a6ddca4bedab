//! Chain thresholds of the PURIFY construction and their ordering across
//! copies.

use fisher_gadgets::q;
use fisher_gadgets::reduction::compute_params;
use fisher_gadgets::solver::{chain_bounds, chain_ordering};

fn main() {
    for eps in [q(0, 1), q(1, 20), q(1, 12)] {
        let p = compute_params(&eps, 1).unwrap();
        let h = p.s.clone();
        let l = p.low_threshold(&h);
        for chain in [1, 2] {
            let b = chain_bounds(&p, chain, &h, &h, &l);
            println!(
                "ε = {eps}, chain {chain}: A = {}, A' = {}, B = {}, B' = {}, R_L/H = {:e}, R_U/H = {:e}",
                b.a,
                b.a_prime,
                b.b,
                b.b_prime,
                (&b.r_lower / &h).to_f64(),
                (&b.r_upper / &h).to_f64()
            );
        }
        let o = chain_ordering(&p);
        println!("  R_U(chain 1) ≤ R_L(chain 2) on all {} copies: {}", o.copies_checked, o.holds);
    }
}
