use serde::Serialize;

use super::{BuyerRole, GadgetId, GoodRole, ReducedMarket, REF_BUYER, REF_GOOD};
use crate::market::{Length, SplcUtility};
use crate::rational::{q, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditCheck {
    pub name: &'static str,
    pub pass: bool,
    /// First few violations; empty on pass.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn violation_count(&self) -> usize {
        self.checks.iter().map(|c| c.violations.len()).sum()
    }
}

const MAX_REPORTED: usize = 20;

struct Collector {
    name: &'static str,
    violations: Vec<String>,
    total: usize,
}

impl Collector {
    fn new(name: &'static str) -> Self {
        Collector { name, violations: Vec::new(), total: 0 }
    }

    fn fail(&mut self, msg: impl FnOnce() -> String) {
        self.total += 1;
        if self.violations.len() < MAX_REPORTED {
            self.violations.push(msg());
        }
    }

    fn finish(mut self) -> AuditCheck {
        if self.total > self.violations.len() {
            self.violations.push(format!("… {} more", self.total - self.violations.len()));
        }
        AuditCheck { name: self.name, pass: self.total == 0, violations: self.violations }
    }
}

/// Total cap of a utility's positive-slope segments; `None` if unbounded.
fn positive_cap(u: &SplcUtility) -> Option<Rational> {
    let mut total = Rational::zero();
    for seg in u.segments().iter().filter(|s| s.slope.is_positive()) {
        match &seg.length {
            Length::Finite(l) => total += l,
            Length::Unbounded => return None,
        }
    }
    Some(total)
}

/// Checks the structural invariants every compiled market must satisfy.
pub fn audit(reduced: &ReducedMarket) -> AuditReport {
    let m = &reduced.market;
    let p = &reduced.params;
    let one = Rational::one();
    let mut checks = Vec::new();

    let mut c = Collector::new("reference_good_and_buyer");
    let refs = reduced.good_roles.iter().filter(|r| **r == GoodRole::Reference).count();
    if refs != 1 || reduced.good_roles[REF_GOOD] != GoodRole::Reference {
        c.fail(|| format!("{refs} reference goods"));
    }
    let ref_buyers = reduced.buyer_roles.iter().filter(|r| **r == BuyerRole::ReferenceBuyer).count();
    let b_ref = &m.buyers()[REF_BUYER];
    if ref_buyers != 1 || reduced.buyer_roles[REF_BUYER] != BuyerRole::ReferenceBuyer {
        c.fail(|| format!("{ref_buyers} reference buyers"));
    }
    if *b_ref.budget() != one || b_ref.utilities() != [(REF_GOOD, SplcUtility::linear(one.clone()))] {
        c.fail(|| "reference buyer must have budget 1 and utility x on ref only".into());
    }
    checks.push(c.finish());

    let consumers = m.consumers();

    let mut c = Collector::new("one_inverter_per_good");
    let mut producers = vec![0usize; m.goods().len()];
    for layout in &reduced.copies {
        for g in &layout.gadgets {
            producers[g.output] += 1;
        }
    }
    for (g, &n) in producers.iter().enumerate().skip(1) {
        if n != 1 {
            c.fail(|| format!("{} is the output of {n} inverters", m.goods()[g]));
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("at_most_four_consumers");
    for (g, cons) in consumers.iter().enumerate().skip(1) {
        if cons.len() > 4 {
            c.fail(|| format!("{} has {} consumers", m.goods()[g], cons.len()));
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("budgets_at_most_h_max");
    for b in m.buyers().iter().skip(1) {
        if *b.budget() > p.h_max {
            c.fail(|| format!("{} has budget {} > H_max = {}", b.id(), b.budget(), p.h_max));
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("sufficient_condition");
    for b in m.buyers() {
        let ok = b.utility_for(REF_GOOD).is_some_and(SplcUtility::is_strictly_increasing);
        if !ok {
            c.fail(|| format!("{} lacks an unbounded positive segment on ref", b.id()));
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("budget_sum");
    let total: Rational = m.buyers().iter().skip(1).map(|b| b.budget()).sum();
    let bound = Rational::from_integer((4 * p.k * p.d * p.v_expanded) as i64) * &p.h_max;
    if total > bound {
        c.fail(|| format!("non-reference budgets sum to {total} > 4·k·d·|V|·H_max = {bound}"));
    }
    checks.push(c.finish());

    let mut c = Collector::new("external_caps");
    for layout in &reduced.copies {
        for g in &layout.gadgets {
            let limit = &(&p.t * &q(2, 1)) + &g.r;
            let mut caps = Rational::zero();
            let mut unbounded = false;
            for &bi in &consumers[g.output] {
                if bi == g.inverter {
                    continue;
                }
                match m.buyers()[bi].utility_for(g.output).and_then(positive_cap) {
                    Some(cap) => caps += cap,
                    None => unbounded = true,
                }
            }
            if unbounded || caps > limit {
                let name = &m.goods()[g.output];
                c.fail(|| format!("{name}: outside consumers cap {caps} > 2t + r = {limit}"));
            }
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("chain_parity");
    if !p.d.is_multiple_of(2) {
        c.fail(|| format!("chain length d = {} is odd", p.d));
    }
    for layout in &reduced.copies {
        for chain in &layout.chains {
            if chain.goods.len() as u64 != p.d + 1 {
                c.fail(|| format!("chain {}/{} has {} goods", chain.gate, chain.chain, chain.goods.len()));
            }
            for j in 1..=p.d {
                let id = GadgetId::Chain { gate: chain.gate, chain: chain.chain, position: j };
                let expect = if (chain.chain == 1) == (j % 2 == 0) { q(2, 11) } else { Rational::zero() };
                match layout.gadget(id) {
                    Some(g) if g.r == expect && (g.aux.is_some() == expect.is_positive()) => {}
                    Some(g) => c.fail(|| format!("{id}: r = {} but pattern requires {expect}", g.r)),
                    None => c.fail(|| format!("{id} missing")),
                }
            }
        }
    }
    checks.push(c.finish());

    let mut c = Collector::new("roles_cover_market");
    if reduced.good_roles.len() != m.goods().len() {
        c.fail(|| format!("{} good roles for {} goods", reduced.good_roles.len(), m.goods().len()));
    }
    if reduced.buyer_roles.len() != m.buyers().len() {
        c.fail(|| format!("{} buyer roles for {} buyers", reduced.buyer_roles.len(), m.buyers().len()));
    }
    checks.push(c.finish());

    AuditReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::purecircuit::parse_circuit;
    use crate::reduction::{compile, Override};

    #[test]
    fn compiled_markets_pass() {
        for text in [
            "nodes 2\nNOT 0 1\nNOT 1 0\n",
            "nodes 3\nNAND 0 1 2\nNOT 2 0\nNOT 2 1\n",
            "nodes 3\nPURIFY 0 1 2\nNAND 1 2 0\n",
        ] {
            let c = parse_circuit(text).unwrap();
            let r = compile(&c, &q(1, 20), Some(Override { k: 3, d: 4 })).unwrap();
            let report = audit(&r);
            assert!(report.pass(), "{text}: {report:?}");
        }
    }

    #[test]
    fn tampered_market_fails() {
        let c = parse_circuit("nodes 2\nNOT 0 1\nNOT 1 0\n").unwrap();
        let mut r = compile(&c, &q(0, 1), Some(Override { k: 1, d: 2 })).unwrap();
        r.copies[0].gadgets[0].output = r.copies[0].gadgets[1].output;
        let report = audit(&r);
        assert!(!report.pass());
        assert!(report.checks.iter().any(|c| c.name == "one_inverter_per_good" && !c.pass));
    }
}
