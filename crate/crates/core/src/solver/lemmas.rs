use std::fmt;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::chain::chain_bounds;
use super::SolverError;
use crate::market::{verify_fisher, Allocation, GoodIndex, PriceVector};
use crate::purecircuit::GateType;
use crate::rational::{q, Rational};
use crate::reduction::{decode, BuyerRole, CopyLayout, GadgetId, GadgetKind, ReducedMarket, REF_GOOD};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scope {
    Global,
    Gadget(GadgetId),
    Good(String),
    Buyer(String),
    /// A PURIFY gate or one of its chains.
    Purify { gate: usize, chain: Option<u8> },
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Global => write!(f, "global"),
            Scope::Gadget(id) => write!(f, "{id}"),
            Scope::Good(g) => write!(f, "good {g}"),
            Scope::Buyer(b) => write!(f, "buyer {b}"),
            Scope::Purify { gate, chain: None } => write!(f, "g{gate}"),
            Scope::Purify { gate, chain: Some(c) } => write!(f, "g{gate}.c{c}"),
        }
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaRecord {
    pub id: &'static str,
    pub scope: Scope,
    /// False when the lemma's premise does not hold; such records pass.
    pub applies: bool,
    pub pass: bool,
    pub witnesses: IndexMap<String, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub epsilon: Rational,
    pub copy: u64,
    pub p_ref: Rational,
    #[serde(rename = "H")]
    pub h: Rational,
    #[serde(rename = "L")]
    pub l: Rational,
    pub pass: bool,
    pub records: Vec<LemmaRecord>,
}

impl LemmaReport {
    pub fn failures(&self) -> impl Iterator<Item = &LemmaRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// `(id, records, applicable, failed)` in suite order.
    pub fn tally(&self) -> Vec<(&'static str, usize, usize, usize)> {
        let mut out: Vec<(&'static str, usize, usize, usize)> = Vec::new();
        for r in &self.records {
            if out.last().is_none_or(|l| l.0 != r.id) {
                out.push((r.id, 0, 0, 0));
            }
            let last = out.last_mut().expect("just pushed");
            last.1 += 1;
            last.2 += usize::from(r.applies);
            last.3 += usize::from(!r.pass);
        }
        out
    }
}

struct Ctx<'a> {
    reduced: &'a ReducedMarket,
    prices: &'a PriceVector,
    alloc: &'a Allocation,
    demand: Vec<Rational>,
    layout: &'a CopyLayout,
    p_ref: Rational,
    h: Rational,
    l: Rational,
}

fn witnesses<const N: usize>(pairs: [(&str, &Rational); N]) -> IndexMap<String, Rational> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn record(id: &'static str, scope: Scope, applies: bool, pass: bool, w: IndexMap<String, Rational>) -> LemmaRecord {
    LemmaRecord { id, scope, applies, pass, witnesses: w }
}

impl Ctx<'_> {
    fn price(&self, g: GoodIndex) -> &Rational {
        self.prices.get(g)
    }

    fn x(&self, buyer: usize, good: GoodIndex) -> Rational {
        self.alloc.get(buyer, good)
    }

    fn good_name(&self, g: GoodIndex) -> String {
        self.reduced.market.goods()[g].clone()
    }

    fn ref_price_bounds(&self) -> Vec<LemmaRecord> {
        let (lo, hi) = (q(1, 2), q(2, 1));
        let pass = self.p_ref >= lo && self.p_ref <= hi;
        vec![record("ref_price_bounds", Scope::Global, true, pass, witnesses([("p_ref", &self.p_ref), ("lower", &lo), ("upper", &hi)]))]
    }

    fn external_demand_cap(&self) -> Vec<LemmaRecord> {
        let t = &self.reduced.params.t;
        self.layout
            .gadgets
            .iter()
            .map(|g| {
                let external = &self.demand[g.output] - &self.x(g.inverter, g.output);
                let cap = &(t + t) + &g.r;
                let pass = external <= cap;
                record("external_demand_cap", Scope::Gadget(g.id), true, pass, witnesses([("external", &external), ("cap", &cap)]))
            })
            .collect()
    }

    fn external_band(&self) -> Vec<LemmaRecord> {
        let p = &self.reduced.params;
        let two = Rational::from_integer(2);
        let (lo, hi) = (&two * &p.t_bar(), &two * &p.t);
        self.layout
            .gadgets
            .iter()
            .map(|g| {
                let mut outside = &self.demand[g.output] - &self.x(g.inverter, g.output);
                if let Some(aux) = g.aux {
                    outside = &outside - &self.x(aux, g.output);
                }
                let pass = outside >= lo && outside <= hi;
                record("external_band", Scope::Gadget(g.id), true, pass, witnesses([("outside", &outside), ("lower", &lo), ("upper", &hi)]))
            })
            .collect()
    }

    fn inverter_output_positive(&self) -> Vec<LemmaRecord> {
        self.layout
            .gadgets
            .iter()
            .map(|g| {
                let x = self.x(g.inverter, g.output);
                record("inverter_output_positive", Scope::Gadget(g.id), true, x.is_positive(), witnesses([("x_inverter_out", &x)]))
            })
            .collect()
    }

    fn price_bounds(&self) -> Vec<LemmaRecord> {
        self.layout
            .goods()
            .map(|g| {
                let p = self.price(g);
                let pass = p.is_positive() && *p <= self.h;
                record("price_bounds", Scope::Good(self.good_name(g)), true, pass, witnesses([("price", p), ("H", &self.h)]))
            })
            .collect()
    }

    fn aux_exact(&self) -> Vec<LemmaRecord> {
        let mut out = Vec::new();
        let mut check = |buyer: usize, good: GoodIndex, r: &Rational| {
            let x = self.x(buyer, good);
            let id = self.reduced.market.buyers()[buyer].id().to_string();
            out.push(record("aux_exact", Scope::Buyer(id), true, x == *r, witnesses([("allocated", &x), ("r", r)])));
        };
        for g in &self.layout.gadgets {
            if let Some(aux) = g.aux {
                check(aux, g.output, &g.r);
            }
        }
        for &(good, buyer) in &self.layout.top_ups {
            let BuyerRole::TopUpAux { r, .. } = &self.reduced.buyer_roles[buyer] else {
                unreachable!("top-up list names top-up buyers")
            };
            check(buyer, good, r);
        }
        out
    }

    fn anti_endowment(&self, kind: GadgetKind) -> Vec<LemmaRecord> {
        let p = &self.reduced.params;
        let (id, slack) = match kind {
            GadgetKind::Not => ("not_anti_endowment", 3),
            GadgetKind::Nand => ("nand_anti_endowment", 5),
        };
        let lo = &p.t - &Rational::new(slack, p.k as i64);
        let mut out = Vec::new();
        for g in self.layout.gadgets.iter().filter(|g| g.kind == kind) {
            for (i, &input) in g.inputs.iter().enumerate() {
                let x = self.x(g.inverter, input);
                let pass = x >= lo && x <= p.t;
                let name = format!("x_inverter_in{}", i + 1);
                out.push(record(id, Scope::Gadget(g.id), true, pass, witnesses([(name.as_str(), &x), ("lower", &lo), ("upper", &p.t)])));
            }
        }
        out
    }

    fn not_correct(&self) -> Vec<LemmaRecord> {
        self.layout
            .gadgets
            .iter()
            .filter(|g| g.kind == GadgetKind::Not && matches!(g.id, GadgetId::Gate { .. }))
            .map(|g| {
                let (p_in, p_out) = (self.price(g.inputs[0]), self.price(g.output));
                let high = *p_in >= self.h;
                let low = *p_in <= self.l;
                let pass = (!high || *p_out <= self.l) && (!low || *p_out >= self.h);
                let w = witnesses([("p_in", p_in), ("p_out", p_out), ("H", &self.h), ("L", &self.l)]);
                record("not_correct", Scope::Gadget(g.id), high || low, pass, w)
            })
            .collect()
    }

    fn nand(&self, two: bool) -> Vec<LemmaRecord> {
        self.layout
            .gadgets
            .iter()
            .filter(|g| g.kind == GadgetKind::Nand)
            .map(|g| {
                let (a, b, out) = (self.price(g.inputs[0]), self.price(g.inputs[1]), self.price(g.output));
                let w = witnesses([("p_in1", a), ("p_in2", b), ("p_out", out), ("H", &self.h), ("L", &self.l)]);
                if two {
                    let applies = *a <= self.l || *b <= self.l;
                    record("nand_two", Scope::Gadget(g.id), applies, !applies || *out >= self.h, w)
                } else {
                    let applies = *a >= self.h && *b >= self.h;
                    record("nand_one", Scope::Gadget(g.id), applies, !applies || *out <= self.l, w)
                }
            })
            .collect()
    }

    fn chain_thresholds(&self) -> Vec<LemmaRecord> {
        let p = &self.reduced.params;
        self.layout
            .chains
            .iter()
            .map(|c| {
                let b = chain_bounds(p, c.chain, &self.layout.h_low, &self.h, &self.l);
                let p_in = self.price(c.goods[0]);
                let p_out = self.price(*c.goods.last().expect("chain has goods"));
                let up = *p_in >= b.r_upper;
                let down = *p_in <= b.r_lower;
                let pass = (!up || *p_out >= self.h) && (!down || *p_out <= self.l);
                let w = witnesses([
                    ("p_in", p_in),
                    ("p_out", p_out),
                    ("R_U", &b.r_upper),
                    ("R_L", &b.r_lower),
                    ("H", &self.h),
                    ("L", &self.l),
                ]);
                record("chain_thresholds", Scope::Purify { gate: c.gate, chain: Some(c.chain) }, up || down, pass, w)
            })
            .collect()
    }

    fn purify_trichotomy(&self) -> Vec<LemmaRecord> {
        let circuit = &self.reduced.circuit;
        circuit
            .gates()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.gate_type == GateType::Purify)
            .map(|(gi, g)| {
                let var = |n: crate::purecircuit::NodeId| self.price(self.layout.variables[n.0]);
                let (p_in, o1, o2) = (var(g.u), var(g.v), var(g.w.expect("PURIFY has two outputs")));
                let (h, l) = (&self.h, &self.l);
                let outside = |p: &Rational| p <= l || p >= h;
                let pass = if p_in >= h {
                    o1 >= h && o2 >= h
                } else if p_in <= l {
                    o1 <= l && o2 <= l
                } else {
                    outside(o1) || outside(o2)
                };
                let w = witnesses([("p_in", p_in), ("p_out1", o1), ("p_out2", o2), ("H", h), ("L", l)]);
                record("purify_trichotomy", Scope::Purify { gate: gi, chain: None }, true, pass, w)
            })
            .collect()
    }

    fn chain_ordering(&self) -> Vec<LemmaRecord> {
        let p = &self.reduced.params;
        let applies = self.reduced.circuit.gates().iter().any(|g| g.gate_type == GateType::Purify);
        let one = chain_bounds(p, 1, &self.layout.h_low, &self.h, &self.l);
        let two = chain_bounds(p, 2, &self.layout.h_low, &self.h, &self.l);
        let pass = one.r_upper <= two.r_lower;
        let w = witnesses([("R_U_chain1", &one.r_upper), ("R_L_chain2", &two.r_lower)]);
        vec![record("chain_ordering", Scope::Global, applies, !applies || pass, w)]
    }
}

type Check = dyn Fn(&Ctx<'_>) -> Vec<LemmaRecord> + Sync;

/// Checks every gadget lemma on the copy selected by `H = s·p_ref`. The
/// pair `(prices, allocation)` must be an ε-equilibrium of the market.
pub fn lemma_suite(
    reduced: &ReducedMarket,
    prices: &PriceVector,
    allocation: &Allocation,
    epsilon: &Rational,
) -> Result<LemmaReport, SolverError> {
    let report = verify_fisher(&reduced.market, prices, allocation, epsilon)?;
    if !report.pass {
        return Err(SolverError::NotEquilibrium {
            goods_violating: report.goods_violating,
            buyers_suboptimal: report.buyers_suboptimal,
        });
    }
    let decoded = decode(reduced, prices)?;
    let layout = reduced.copy(decoded.copy).expect("decode returns a compiled copy");
    let ctx = Ctx {
        reduced,
        prices,
        alloc: allocation,
        demand: allocation.column_sums(reduced.market.goods().len()),
        layout,
        p_ref: prices.get(REF_GOOD).clone(),
        h: decoded.h.clone(),
        l: decoded.l.clone(),
    };
    let checks: [&Check; 14] = [
        &|c| c.ref_price_bounds(),
        &|c| c.external_demand_cap(),
        &|c| c.external_band(),
        &|c| c.inverter_output_positive(),
        &|c| c.price_bounds(),
        &|c| c.aux_exact(),
        &|c| c.anti_endowment(GadgetKind::Not),
        &|c| c.anti_endowment(GadgetKind::Nand),
        &|c| c.not_correct(),
        &|c| c.nand(false),
        &|c| c.nand(true),
        &|c| c.chain_thresholds(),
        &|c| c.purify_trichotomy(),
        &|c| c.chain_ordering(),
    ];
    let records: Vec<LemmaRecord> = checks.par_iter().map(|f| f(&ctx)).collect::<Vec<_>>().into_iter().flatten().collect();
    let pass = records.iter().all(|r| r.pass);
    Ok(LemmaReport { epsilon: epsilon.clone(), copy: decoded.copy, p_ref: ctx.p_ref.clone(), h: ctx.h, l: ctx.l, pass, records })
}
