use std::fmt;

use serde::Serialize;

use super::{BuyerRole, GoodRole, ReducedMarket};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CopyCensus {
    pub copy: u64,
    pub variable_goods: usize,
    pub intermediate_goods: usize,
    pub inverters: usize,
    pub gate_aux: usize,
    pub top_ups: usize,
}

impl CopyCensus {
    pub fn goods(&self) -> usize {
        self.variable_goods + self.intermediate_goods
    }

    pub fn buyers(&self) -> usize {
        self.inverters + self.gate_aux + self.top_ups
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub copies: Vec<CopyCensus>,
    pub total_goods: usize,
    pub total_buyers: usize,
    pub guarantees_void: bool,
}

/// Counts goods and buyers by role, per copy and overall. The reference good
/// and buyer are included in the totals only.
pub fn describe(reduced: &ReducedMarket) -> Census {
    let mut copies: Vec<CopyCensus> =
        reduced.copies.iter().map(|l| CopyCensus { copy: l.copy, ..Default::default() }).collect();
    let slot = |copies: &mut Vec<CopyCensus>, c: u64| -> usize {
        copies.iter().position(|x| x.copy == c).expect("role names a compiled copy")
    };
    for role in &reduced.good_roles {
        match role {
            GoodRole::Reference => {}
            GoodRole::Variable { copy, .. } => {
                let i = slot(&mut copies, *copy);
                copies[i].variable_goods += 1;
            }
            GoodRole::ChainIntermediate { copy, .. } => {
                let i = slot(&mut copies, *copy);
                copies[i].intermediate_goods += 1;
            }
        }
    }
    for role in &reduced.buyer_roles {
        let Some(c) = role.copy() else { continue };
        let i = slot(&mut copies, c);
        match role {
            BuyerRole::Inverter { .. } => copies[i].inverters += 1,
            BuyerRole::GateAux { .. } => copies[i].gate_aux += 1,
            BuyerRole::TopUpAux { .. } => copies[i].top_ups += 1,
            BuyerRole::ReferenceBuyer => unreachable!(),
        }
    }
    let total_goods = 1 + copies.iter().map(CopyCensus::goods).sum::<usize>();
    let total_buyers = 1 + copies.iter().map(CopyCensus::buyers).sum::<usize>();
    Census { copies, total_goods, total_buyers, guarantees_void: reduced.params.guarantees_void() }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "goods:  {} (1 reference)", self.total_goods)?;
        writeln!(f, "buyers: {} (1 reference)", self.total_buyers)?;
        writeln!(f, "copies: {}", self.copies.len())?;
        let uniform = self.copies.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.variable_goods, a.intermediate_goods, a.inverters, a.gate_aux, a.top_ups)
                == (b.variable_goods, b.intermediate_goods, b.inverters, b.gate_aux, b.top_ups)
        });
        let line = |f: &mut fmt::Formatter<'_>, label: String, c: &CopyCensus| {
            writeln!(
                f,
                "{label}: {} variable + {} intermediate goods; {} inverters, {} gate aux, {} top-ups",
                c.variable_goods, c.intermediate_goods, c.inverters, c.gate_aux, c.top_ups
            )
        };
        match self.copies.first() {
            Some(first) if uniform => line(f, "each copy".into(), first)?,
            _ => {
                for c in &self.copies {
                    line(f, format!("copy {}", c.copy), c)?;
                }
            }
        }
        if self.guarantees_void {
            writeln!(f, "override in effect: guarantees void")?;
        }
        Ok(())
    }
}
