//! Compilation of Pure-Circuit instances into SPLC Fisher markets.
//!
//! Every node becomes a good whose price encodes its value relative to the
//! thresholds `H = s·p_ref` and `L = s·H/a`. NOT and NAND gates become an
//! inverter buyer plus an auxiliary buyer on the output; PURIFY becomes two
//! chains of `d` NOT gadgets. The whole circuit is replicated in `k` copies,
//! one per subinterval of `[H_min, H_max]`.

mod audit;
mod census;
mod decode;
pub mod meta;
mod params;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::{Buyer, FisherMarket, GoodIndex, SplcUtility};
use crate::purecircuit::{CircuitInstance, GateType};
use crate::rational::Rational;

pub use audit::{audit, AuditCheck, AuditReport};
pub use census::{describe, Census, CopyCensus};
pub use decode::{decode, Decoded};
pub use params::{
    chain_length, compute_params, copy_count, delta_for, epsilon_limit, expanded_nodes, params_for_circuit, Override,
    ReductionParams,
};

pub const REF_GOOD: GoodIndex = 0;
pub const REF_BUYER: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("epsilon {0} is outside [0, 1/11)")]
    Epsilon(Rational),
    #[error("override k = {}, d = {} is invalid: need k ≥ 1 and even d ≥ 2", .0.k, .0.d)]
    Override(Override),
    #[error("node {node} has out-degree {degree}; at most 2 consumers per good are supported")]
    OutDegree { node: usize, degree: usize },
    #[error("copy {copy} is out of range for k = {k}")]
    CopyRange { copy: u64, k: u64 },
    #[error("copy selection must be strictly increasing and non-empty")]
    CopySelection,
    #[error("reference price must be positive, got {0}")]
    ReferencePrice(Rational),
    #[error("H = {h} lies outside [H_min, H_max] = [{h_min}, {h_max}]")]
    HOutOfRange { h: Rational, h_min: Rational, h_max: Rational },
    #[error("H = {h} selects copy {copy}, which is not part of this market")]
    CopyNotCompiled { h: Rational, copy: u64 },
    #[error("price vector has {got} entries, market has {expected} goods")]
    PriceDimension { expected: usize, got: usize },
    #[error("metadata does not match the market: {0}")]
    Meta(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GadgetId {
    /// The NOT or NAND gate at this index.
    Gate { gate: usize },
    /// NOT gadget `position ∈ [1, d]` of chain `1` or `2` of a PURIFY gate.
    Chain { gate: usize, chain: u8, position: u64 },
}

impl fmt::Display for GadgetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GadgetId::Gate { gate } => write!(f, "g{gate}"),
            GadgetId::Chain { gate, chain, position } => write!(f, "g{gate}.c{chain}.{position}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    Not,
    Nand,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum GoodRole {
    Reference,
    Variable { copy: u64, node: usize },
    ChainIntermediate { copy: u64, gate: usize, chain: u8, position: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum BuyerRole {
    ReferenceBuyer,
    Inverter { copy: u64, gadget: GadgetId },
    GateAux { copy: u64, gadget: GadgetId, r: Rational },
    TopUpAux { copy: u64, good: GoodIndex, r: Rational },
}

impl BuyerRole {
    pub fn copy(&self) -> Option<u64> {
        match self {
            BuyerRole::ReferenceBuyer => None,
            BuyerRole::Inverter { copy, .. } | BuyerRole::GateAux { copy, .. } | BuyerRole::TopUpAux { copy, .. } => {
                Some(*copy)
            }
        }
    }
}

/// One NOT or NAND gadget inside a copy, by market indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gadget {
    pub id: GadgetId,
    pub kind: GadgetKind,
    pub inputs: Vec<GoodIndex>,
    pub output: GoodIndex,
    pub r: Rational,
    pub inverter: usize,
    /// Absent when `r = 0`.
    pub aux: Option<usize>,
}

/// The goods `g_0 = in, g_1, …, g_d = out` of one PURIFY chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    pub gate: usize,
    pub chain: u8,
    pub goods: Vec<GoodIndex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyLayout {
    pub copy: u64,
    pub h_low: Rational,
    pub h_high: Rational,
    /// Good of each circuit node.
    pub variables: Vec<GoodIndex>,
    pub gadgets: Vec<Gadget>,
    pub chains: Vec<Chain>,
    /// `(good, buyer)` for every top-up auxiliary buyer.
    pub top_ups: Vec<(GoodIndex, usize)>,
}

impl CopyLayout {
    /// The gadget whose inverter produces `good`.
    pub fn producer(&self, good: GoodIndex) -> Option<&Gadget> {
        self.gadgets.iter().find(|g| g.output == good)
    }

    pub fn gadget(&self, id: GadgetId) -> Option<&Gadget> {
        self.gadgets.iter().find(|g| g.id == id)
    }

    /// Non-reference goods of this copy.
    pub fn goods(&self) -> impl Iterator<Item = GoodIndex> + '_ {
        let mut all: Vec<GoodIndex> = self.variables.clone();
        for c in &self.chains {
            all.extend(&c.goods[1..c.goods.len() - 1]);
        }
        all.sort_unstable();
        all.into_iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMarket {
    pub market: FisherMarket,
    pub params: ReductionParams,
    pub circuit: CircuitInstance,
    pub copies: Vec<CopyLayout>,
    pub good_roles: Vec<GoodRole>,
    pub buyer_roles: Vec<BuyerRole>,
}

impl ReducedMarket {
    pub fn copy(&self, c: u64) -> Option<&CopyLayout> {
        self.copies.iter().find(|l| l.copy == c)
    }

    pub fn compiled_copies(&self) -> Vec<u64> {
        self.copies.iter().map(|l| l.copy).collect()
    }

    /// True when only a subset of the `k` copies was compiled.
    pub fn is_partial(&self) -> bool {
        self.copies.len() as u64 != self.params.k
    }
}

/// Copy-independent shape: local good ids and gadgets over them.
struct Template {
    /// Name suffix and role constructor data per local good.
    goods: Vec<LocalGood>,
    gadgets: Vec<LocalGadget>,
    chains: Vec<(usize, u8, Vec<usize>)>,
    /// Local good and number of top-ups it needs.
    top_ups: Vec<(usize, usize)>,
    n_nodes: usize,
}

enum LocalGood {
    Variable(usize),
    Intermediate { gate: usize, chain: u8, position: u64 },
}

impl LocalGood {
    fn suffix(&self) -> String {
        match self {
            LocalGood::Variable(v) => format!("v{v}"),
            LocalGood::Intermediate { gate, chain, position } => format!("g{gate}.c{chain}.{position}"),
        }
    }
}

struct LocalGadget {
    id: GadgetId,
    kind: GadgetKind,
    inputs: Vec<usize>,
    output: usize,
    r: Rational,
}

fn template(circuit: &CircuitInstance, params: &ReductionParams) -> Result<Template, ReductionError> {
    let n = circuit.n();
    let d = params.d;
    let mut goods: Vec<LocalGood> = (0..n).map(LocalGood::Variable).collect();
    let mut gadgets = Vec::new();
    let mut chains = Vec::new();
    for (gi, g) in circuit.gates().iter().enumerate() {
        match g.gate_type {
            GateType::Not => gadgets.push(LocalGadget {
                id: GadgetId::Gate { gate: gi },
                kind: GadgetKind::Not,
                inputs: vec![g.u.0],
                output: g.v.0,
                r: params.r_not.clone(),
            }),
            GateType::Nand => gadgets.push(LocalGadget {
                id: GadgetId::Gate { gate: gi },
                kind: GadgetKind::Nand,
                inputs: vec![g.u.0, g.v.0],
                output: g.w.expect("NAND output").0,
                r: params.r_nand.clone(),
            }),
            GateType::Purify => {
                let outs = [g.v.0, g.w.expect("PURIFY output").0];
                for (ci, out) in outs.into_iter().enumerate() {
                    let chain = ci as u8 + 1;
                    let mut path = vec![g.u.0];
                    for position in 1..d {
                        path.push(goods.len());
                        goods.push(LocalGood::Intermediate { gate: gi, chain, position });
                    }
                    path.push(out);
                    for position in 1..=d {
                        let j = position as usize;
                        gadgets.push(LocalGadget {
                            id: GadgetId::Chain { gate: gi, chain, position },
                            kind: GadgetKind::Not,
                            inputs: vec![path[j - 1]],
                            output: path[j],
                            r: params.r_chain(chain, position),
                        });
                    }
                    chains.push((gi, chain, path));
                }
            }
        }
    }
    let mut consumers = vec![0usize; goods.len()];
    for g in &gadgets {
        for &i in &g.inputs {
            consumers[i] += 1;
        }
    }
    if let Some((node, &degree)) = consumers.iter().enumerate().find(|(_, &c)| c > 2) {
        // only original nodes can exceed 2; intermediates feed one gadget
        return Err(ReductionError::OutDegree { node, degree });
    }
    let top_ups = consumers.iter().enumerate().map(|(g, &c)| (g, 2 - c)).filter(|(_, k)| *k > 0).collect();
    Ok(Template { goods, gadgets, chains, top_ups, n_nodes: n })
}

struct CopyParts {
    goods: Vec<String>,
    good_roles: Vec<GoodRole>,
    buyers: Vec<Buyer>,
    buyer_roles: Vec<BuyerRole>,
    layout: CopyLayout,
}

fn aux_buyer(id: String, target: GoodIndex, r: &Rational, h_high: &Rational, s2: &Rational) -> Buyer {
    Buyer::new(
        id,
        r * h_high,
        vec![(REF_GOOD, SplcUtility::linear(Rational::one())), (target, SplcUtility::capped(s2.clone(), r.clone()))],
    )
    .expect("aux budget is positive")
}

fn instantiate(tpl: &Template, params: &ReductionParams, copy: u64, good_base: usize, buyer_base: usize) -> CopyParts {
    let (h_low, h_high) = params.copy_interval(copy);
    let global = |local: usize| good_base + local;
    let prefix = format!("c{copy}");
    let goods: Vec<String> = tpl.goods.iter().map(|g| format!("{prefix}.{}", g.suffix())).collect();
    let good_roles = tpl
        .goods
        .iter()
        .map(|g| match g {
            LocalGood::Variable(node) => GoodRole::Variable { copy, node: *node },
            LocalGood::Intermediate { gate, chain, position } => {
                GoodRole::ChainIntermediate { copy, gate: *gate, chain: *chain, position: *position }
            }
        })
        .collect();

    let s2 = &params.s * &Rational::from_integer(2);
    let mut buyers = Vec::new();
    let mut buyer_roles = Vec::new();
    let mut gadgets = Vec::with_capacity(tpl.gadgets.len());
    for g in &tpl.gadgets {
        let inverter = buyer_base + buyers.len();
        let budget = match g.kind {
            GadgetKind::Not => &params.t * &h_low,
            GadgetKind::Nand => &(&params.t * &h_low) * &Rational::from_integer(2),
        };
        let mut utils = vec![
            (REF_GOOD, SplcUtility::linear(Rational::one())),
            (global(g.output), SplcUtility::linear(params.s.clone())),
        ];
        for &i in &g.inputs {
            utils.push((global(i), SplcUtility::capped(params.a.clone(), params.t.clone())));
        }
        buyers.push(Buyer::new(format!("{prefix}.inv.{}", g.id), budget, utils).expect("inverter budget is positive"));
        buyer_roles.push(BuyerRole::Inverter { copy, gadget: g.id });
        let aux = if g.r.is_positive() {
            let idx = buyer_base + buyers.len();
            buyers.push(aux_buyer(format!("{prefix}.aux.{}", g.id), global(g.output), &g.r, &h_high, &s2));
            buyer_roles.push(BuyerRole::GateAux { copy, gadget: g.id, r: g.r.clone() });
            Some(idx)
        } else {
            None
        };
        gadgets.push(Gadget {
            id: g.id,
            kind: g.kind,
            inputs: g.inputs.iter().map(|&i| global(i)).collect(),
            output: global(g.output),
            r: g.r.clone(),
            inverter,
            aux,
        });
    }
    let mut top_ups = Vec::new();
    for &(local, count) in &tpl.top_ups {
        for i in 0..count {
            let idx = buyer_base + buyers.len();
            let id = format!("{prefix}.top.{}.{i}", tpl.goods[local].suffix());
            buyers.push(aux_buyer(id, global(local), &params.t, &h_high, &s2));
            buyer_roles.push(BuyerRole::TopUpAux { copy, good: global(local), r: params.t.clone() });
            top_ups.push((global(local), idx));
        }
    }
    let layout = CopyLayout {
        copy,
        h_low,
        h_high,
        variables: (0..tpl.n_nodes).map(global).collect(),
        gadgets,
        chains: tpl
            .chains
            .iter()
            .map(|(gate, chain, path)| Chain { gate: *gate, chain: *chain, goods: path.iter().map(|&l| global(l)).collect() })
            .collect(),
        top_ups,
    };
    CopyParts { goods, good_roles, buyers, buyer_roles, layout }
}

fn buyers_per_copy(tpl: &Template) -> usize {
    tpl.gadgets.iter().map(|g| 1 + usize::from(g.r.is_positive())).sum::<usize>()
        + tpl.top_ups.iter().map(|(_, k)| k).sum::<usize>()
}

/// Compiles all `k` copies.
pub fn compile(
    circuit: &CircuitInstance,
    epsilon: &Rational,
    ovr: Option<Override>,
) -> Result<ReducedMarket, ReductionError> {
    compile_selected(circuit, epsilon, ovr, None)
}

/// Compiles the reference good and buyer plus only the listed copies, with
/// the parameters of the full construction.
pub fn compile_selected(
    circuit: &CircuitInstance,
    epsilon: &Rational,
    ovr: Option<Override>,
    copies: Option<&[u64]>,
) -> Result<ReducedMarket, ReductionError> {
    let params = params_for_circuit(circuit, epsilon, ovr)?;
    let selected: Vec<u64> = match copies {
        None => (0..params.k).collect(),
        Some(list) => {
            if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ReductionError::CopySelection);
            }
            if let Some(&c) = list.iter().find(|&&c| c >= params.k) {
                return Err(ReductionError::CopyRange { copy: c, k: params.k });
            }
            list.to_vec()
        }
    };
    let tpl = template(circuit, &params)?;
    let goods_per = tpl.goods.len();
    let buyers_per = buyers_per_copy(&tpl);
    let parts: Vec<CopyParts> = selected
        .par_iter()
        .enumerate()
        .map(|(pos, &c)| instantiate(&tpl, &params, c, 1 + pos * goods_per, 1 + pos * buyers_per))
        .collect();

    let mut goods = vec!["ref".to_string()];
    let mut good_roles = vec![GoodRole::Reference];
    let mut buyers = vec![Buyer::new("b_ref", Rational::one(), vec![(REF_GOOD, SplcUtility::linear(Rational::one()))])
        .expect("reference buyer")];
    let mut buyer_roles = vec![BuyerRole::ReferenceBuyer];
    let mut layouts = Vec::with_capacity(parts.len());
    for p in parts {
        goods.extend(p.goods);
        good_roles.extend(p.good_roles);
        buyers.extend(p.buyers);
        buyer_roles.extend(p.buyer_roles);
        layouts.push(p.layout);
    }
    let market = FisherMarket::new(goods, buyers).expect("compiled names are unique");
    Ok(ReducedMarket { market, params, circuit: circuit.clone(), copies: layouts, good_roles, buyer_roles })
}
