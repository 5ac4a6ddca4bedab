use crate::market::{Allocation, Bundle, PriceVector};
use crate::purecircuit::GateType;
use crate::rational::Rational;
use crate::reduction::{GadgetKind, ReducedMarket, REF_BUYER, REF_GOOD};

fn push(row: &mut Bundle, good: usize, amount: Rational) {
    if amount.is_positive() {
        row.push((good, amount));
    }
}

/// Exact equilibrium of a compiled circuit made only of NOT gates in which
/// every node feeds exactly one gate (disjoint NOT cycles).
///
/// Every good of copy `c` gets the same price `q_c`. Its demand is `t` from
/// the downstream inverter, `t` from its top-up, `r` from the gate auxiliary
/// and the producing inverter's leftover `t·(H_low − q)/q`, which clears at
/// `q* = t·H_low/(1 − t − r)`. When `q* ≥ H` the price sits at `H`, the
/// inverter buys exactly the missing `1 − 2t − r` units of output and spends
/// the rest on the reference good. `p_ref` is then the fixed point of the
/// reference good's spending, which is affine in `p_ref` once the copies are
/// classified; classification is repeated until stable.
///
/// Returns `None` for any other circuit shape.
pub fn not_cycle_equilibrium(reduced: &ReducedMarket) -> Option<(PriceVector, Allocation)> {
    let circuit = &reduced.circuit;
    if circuit.n() == 0
        || circuit.gates().iter().any(|g| g.gate_type != GateType::Not)
        || circuit.out_degree().iter().any(|&d| d != 1)
    {
        return None;
    }
    let p = &reduced.params;
    let one = Rational::one();
    let t = &p.t;
    let r = &p.r_not;
    let missing = &(&one - &(t + t)) - r;
    let q_star: Vec<Rational> =
        reduced.copies.iter().map(|c| &(t * &c.h_low) / &(&(&one - t) - r)).collect();
    let nodes = Rational::from_integer(circuit.n() as i64);

    let mut p_ref = one.clone();
    let mut pinned: Option<Vec<bool>> = None;
    for _ in 0..=reduced.copies.len() + 1 {
        let h = &p.s * &p_ref;
        let at_h: Vec<bool> = q_star.iter().map(|q| *q >= h).collect();
        if pinned.as_ref() == Some(&at_h) {
            break;
        }
        // spend on ref = C − D·p_ref; p_ref = C/(1 + D)
        let mut c = one.clone();
        let mut d = Rational::zero();
        for ((layout, q), high) in reduced.copies.iter().zip(&q_star).zip(&at_h) {
            if *high {
                c += &nodes * &(&(&(r + t) * &layout.h_high) + &(t * &layout.h_low));
                d += &nodes * &p.s;
            } else {
                c += &nodes * &(&(r + t) * &(&layout.h_high - q));
            }
        }
        p_ref = &c / &(&one + &d);
        pinned = Some(at_h);
    }
    let at_h = pinned?;
    if at_h != q_star.iter().map(|q| *q >= &p.s * &p_ref).collect::<Vec<_>>() {
        return None;
    }
    let h = &p.s * &p_ref;

    let n_goods = reduced.market.goods().len();
    let mut prices = PriceVector::uniform(n_goods, Rational::zero());
    prices.0[REF_GOOD] = p_ref.clone();
    let mut rows: Vec<Bundle> = vec![Vec::new(); reduced.market.buyers().len()];
    rows[REF_BUYER] = vec![(REF_GOOD, &one / &p_ref)];
    for ((layout, q_star), high) in reduced.copies.iter().zip(&q_star).zip(&at_h) {
        let q = if *high { h.clone() } else { q_star.clone() };
        for &g in &layout.variables {
            prices.0[g] = q.clone();
        }
        for gadget in &layout.gadgets {
            debug_assert_eq!(gadget.kind, GadgetKind::Not);
            let (input, output) = (gadget.inputs[0], gadget.output);
            let leftover = t * &(&layout.h_low - &q);
            let (out_amount, ref_spend) =
                if *high { (missing.clone(), &leftover - &(&missing * &q)) } else { (&leftover / &q, Rational::zero()) };
            let mut row = Vec::new();
            push(&mut row, REF_GOOD, &ref_spend / &p_ref);
            let mut goods = [(input, t.clone()), (output, out_amount)];
            goods.sort_by_key(|(g, _)| *g);
            for (g, x) in goods {
                push(&mut row, g, x);
            }
            rows[gadget.inverter] = row;
            if let Some(aux) = gadget.aux {
                let mut row = Vec::new();
                push(&mut row, REF_GOOD, &(r * &(&layout.h_high - &q)) / &p_ref);
                push(&mut row, output, r.clone());
                rows[aux] = row;
            }
        }
        for &(good, buyer) in &layout.top_ups {
            let mut row = Vec::new();
            push(&mut row, REF_GOOD, &(t * &(&layout.h_high - &q)) / &p_ref);
            push(&mut row, good, t.clone());
            rows[buyer] = row;
        }
    }
    Some((prices, Allocation { rows }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::verify_fisher;
    use crate::purecircuit::parse_circuit;
    use crate::rational::q;
    use crate::reduction::{compile, compile_selected, Override};

    #[test]
    fn single_copy_closed_form() {
        let c = parse_circuit("nodes 2\nNOT 0 1\nNOT 1 0\n").unwrap();
        let r = compile(&c, &q(0, 1), Some(Override { k: 1, d: 2 })).unwrap();
        let (prices, alloc) = not_cycle_equilibrium(&r).unwrap();
        let s = r.params.s.clone();
        assert_eq!(s, q(1, 80));
        assert_eq!(prices.0[REF_GOOD], &q(1, 1) + &(&q(96, 55) * &s));
        assert_eq!(prices.0[1], &q(2, 5) * &s);
        assert!(verify_fisher(&r.market, &prices, &alloc, &q(0, 1)).unwrap().pass);
    }

    #[test]
    fn all_copies_exact() {
        let c = parse_circuit("nodes 3\nNOT 0 1\nNOT 1 2\nNOT 2 0\n").unwrap();
        let r = compile(&c, &q(0, 1), None).unwrap();
        let (prices, alloc) = not_cycle_equilibrium(&r).unwrap();
        assert!(verify_fisher(&r.market, &prices, &alloc, &q(0, 1)).unwrap().pass);
    }

    #[test]
    fn selected_copy_exact() {
        let c = parse_circuit("nodes 2\nNOT 0 1\nNOT 1 0\n").unwrap();
        let r = compile_selected(&c, &q(1, 12), None, Some(&[1759])).unwrap();
        let (prices, alloc) = not_cycle_equilibrium(&r).unwrap();
        assert!(verify_fisher(&r.market, &prices, &alloc, &q(0, 1)).unwrap().pass);
    }

    #[test]
    fn other_shapes_rejected() {
        let c = parse_circuit("nodes 3\nNAND 0 1 2\nNOT 2 0\nNOT 2 1\n").unwrap();
        let r = compile(&c, &q(0, 1), Some(Override { k: 1, d: 2 })).unwrap();
        assert!(not_cycle_equilibrium(&r).is_none());
    }
}
