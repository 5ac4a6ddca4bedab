//! NOT and NAND truth tables and the PURIFY sweep, at full scale or under an
//! override.
//!
//!     cargo run --example gadget_lab -- 1/12 40 4

use fisher_gadgets::reduction::Override;
use fisher_gadgets::solver::lab::{run_lab, DEFAULT_MESH};
use fisher_gadgets::Rational;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let eps: Rational = args.first().map_or("1/12", String::as_str).parse().unwrap();
    let ovr = match (args.get(1), args.get(2)) {
        (Some(k), Some(d)) => Some(Override { k: k.parse().unwrap(), d: d.parse().unwrap() }),
        _ => None,
    };
    let lab = run_lab(&eps, ovr, DEFAULT_MESH).unwrap();
    for table in [&lab.not, &lab.nand] {
        for row in &table.rows {
            println!("{:>4} {:<20} → {} ({:?}) {}", table.gadget, row.label, row.output.price, row.expect, row.pass);
        }
    }
    let sweep = &lab.purify;
    println!("purify: d = {}, {} mesh points, {} exceptions", sweep.d, sweep.mesh, sweep.exceptions);
    for pt in sweep.points.iter().step_by(8) {
        let rel = |p: &Rational| (p / &sweep.h).to_f64();
        println!("  p_in/H = {:.6}  out1/H = {:.6}  out2/H = {:.6}", rel(&pt.p_in), rel(&pt.p_out1), rel(&pt.p_out2));
    }
    println!("pass: {}", lab.pass);
}
