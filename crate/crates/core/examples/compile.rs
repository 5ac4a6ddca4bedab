//! Compile a circuit into a Fisher market, print the census and the
//! structural audit.
//!
//!     cargo run --example compile -- tests/fixtures/circuits/purify_tail.pc 1/12 40 4

use fisher_gadgets::purecircuit::parse_circuit;
use fisher_gadgets::reduction::{audit, compile, describe, Override};
use fisher_gadgets::Rational;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let text = match args.first() {
        Some(path) => std::fs::read_to_string(path).expect("readable .pc file"),
        None => "nodes 2\nNOT 0 1\nNOT 1 0\n".to_string(),
    };
    let eps: Rational = args.get(1).map_or("0", String::as_str).parse().expect("ε as p/q");
    let ovr = match (args.get(2), args.get(3)) {
        (Some(k), Some(d)) => Some(Override { k: k.parse().unwrap(), d: d.parse().unwrap() }),
        _ => None,
    };
    let reduced = compile(&parse_circuit(&text).unwrap(), &eps, ovr).unwrap();
    let p = &reduced.params;
    println!("δ = {}, k = {}, d = {}, s = {}, a = {}, |V| = {}", p.delta, p.k, p.d, p.s, p.a, p.v_expanded);
    print!("{}", describe(&reduced));
    for check in audit(&reduced).checks {
        println!("{:<28} {}", check.name, if check.pass { "ok" } else { "VIOLATED" });
    }
}
