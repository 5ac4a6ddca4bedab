//! Sidecar metadata for a compiled market: parameters, source circuit and the
//! role of every good and buyer.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{compile_selected, describe, BuyerRole, ReducedMarket, ReductionError, ReductionParams};
use crate::market::FisherMarket;
use crate::purecircuit::parse_circuit;
use crate::rational::Rational;

#[derive(Debug, Serialize, Deserialize)]
struct ParamsDoc {
    #[serde(flatten)]
    params: ReductionParams,
    copy_intervals: Vec<(Rational, Rational)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MetaDoc {
    params: ParamsDoc,
    guarantees_void: bool,
    /// `null` when all `k` copies are present.
    compiled_copies: Option<Vec<u64>>,
    circuit: String,
    census: Value,
    goods: Map<String, Value>,
    buyers: Map<String, Value>,
}

fn buyer_role_doc(reduced: &ReducedMarket, role: &BuyerRole) -> Value {
    match role {
        BuyerRole::TopUpAux { copy, good, r } => json!({
            "role": "top_up_aux",
            "copy": copy,
            "good": reduced.market.goods()[*good],
            "r": r,
        }),
        other => serde_json::to_value(other).expect("roles serialize"),
    }
}

fn to_doc(reduced: &ReducedMarket) -> MetaDoc {
    let m = &reduced.market;
    MetaDoc {
        params: ParamsDoc { params: reduced.params.clone(), copy_intervals: reduced.params.copy_intervals() },
        guarantees_void: reduced.params.guarantees_void(),
        compiled_copies: reduced.is_partial().then(|| reduced.compiled_copies()),
        circuit: reduced.circuit.to_pc(),
        census: serde_json::to_value(describe(reduced)).expect("census serializes"),
        goods: m
            .goods()
            .iter()
            .zip(&reduced.good_roles)
            .map(|(g, r)| (g.clone(), serde_json::to_value(r).expect("roles serialize")))
            .collect(),
        buyers: m
            .buyers()
            .iter()
            .zip(&reduced.buyer_roles)
            .map(|(b, r)| (b.id().to_string(), buyer_role_doc(reduced, r)))
            .collect(),
    }
}

pub fn meta_to_json(reduced: &ReducedMarket) -> String {
    let mut s = serde_json::to_string_pretty(&to_doc(reduced)).expect("meta serializes");
    s.push('\n');
    s
}

/// Recompiles the market described by a metadata document and checks that
/// the document is exactly the one the compiler emits for it.
pub fn from_meta(meta_text: &str) -> Result<ReducedMarket, ReductionError> {
    let bad = |e: String| ReductionError::Meta(e);
    let given: Value = serde_json::from_str(meta_text).map_err(|e| bad(e.to_string()))?;
    let doc: MetaDoc = serde_json::from_value(given.clone()).map_err(|e| bad(e.to_string()))?;
    let circuit = parse_circuit(&doc.circuit).map_err(|e| bad(format!("circuit: {e}")))?;
    let p = &doc.params.params;
    let rebuilt = compile_selected(&circuit, &p.epsilon, p.overridden, doc.compiled_copies.as_deref())?;
    let expected = serde_json::to_value(to_doc(&rebuilt)).expect("meta serializes");
    if expected != given {
        return Err(bad("metadata differs from the recompiled metadata".into()));
    }
    Ok(rebuilt)
}

/// Rebuilds the role tables for `market` from its metadata. The market must
/// equal the one recompiled from the recorded circuit and parameters.
pub fn from_parts(market: FisherMarket, meta_text: &str) -> Result<ReducedMarket, ReductionError> {
    let rebuilt = from_meta(meta_text)?;
    if rebuilt.market != market {
        return Err(ReductionError::Meta(
            "market differs from the one compiled from the recorded circuit and parameters".into(),
        ));
    }
    Ok(rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::reduction::{compile, Override};

    #[test]
    fn round_trip() {
        let c = parse_circuit("nodes 3\nPURIFY 0 1 2\nNAND 1 2 0\n").unwrap();
        let r = compile(&c, &q(1, 20), Some(Override { k: 2, d: 2 })).unwrap();
        let text = meta_to_json(&r);
        assert!(text.contains("\"guarantees_void\": true"));
        assert!(text.contains("\"c1.top.v1.0\""));
        let back = from_parts(r.market.clone(), &text).unwrap();
        assert_eq!(back, r);
        let tampered = text.replace("\"guarantees_void\": true", "\"guarantees_void\": false");
        assert!(from_parts(r.market.clone(), &tampered).is_err());
    }
}
