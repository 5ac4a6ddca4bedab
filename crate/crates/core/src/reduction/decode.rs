use serde::Serialize;

use super::{ReducedMarket, ReductionError, REF_GOOD};
use crate::market::PriceVector;
use crate::purecircuit::{Assignment, Value};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decoded {
    pub assignment: Assignment,
    pub copy: u64,
    #[serde(rename = "H")]
    pub h: Rational,
    #[serde(rename = "L")]
    pub l: Rational,
}

/// Reads a circuit assignment off the copy whose interval contains
/// `H = s·p_ref`: `p ≥ H` is 1, `p ≤ L` is 0, anything between is ⊥.
pub fn decode(reduced: &ReducedMarket, prices: &PriceVector) -> Result<Decoded, ReductionError> {
    let n_goods = reduced.market.goods().len();
    if prices.len() != n_goods {
        return Err(ReductionError::PriceDimension { expected: n_goods, got: prices.len() });
    }
    let p = &reduced.params;
    let p_ref = prices.get(REF_GOOD);
    if !p_ref.is_positive() {
        return Err(ReductionError::ReferencePrice(p_ref.clone()));
    }
    let h = &p.s * p_ref;
    let copy = p.copy_containing(&h).ok_or_else(|| ReductionError::HOutOfRange {
        h: h.clone(),
        h_min: p.h_min.clone(),
        h_max: p.h_max.clone(),
    })?;
    let layout = reduced.copy(copy).ok_or_else(|| ReductionError::CopyNotCompiled { h: h.clone(), copy })?;
    let l = p.low_threshold(&h);
    let values = layout
        .variables
        .iter()
        .map(|&g| {
            let price = prices.get(g);
            if *price >= h {
                Value::One
            } else if *price <= l {
                Value::Zero
            } else {
                Value::Bot
            }
        })
        .collect();
    Ok(Decoded { assignment: Assignment::new(values), copy, h, l })
}
