use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::ReductionError;
use crate::purecircuit::{CircuitInstance, GateType};
use crate::rational::{q, Rational};

/// Explicit `{k, d}` in place of the values derived from ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Override {
    pub k: u64,
    pub d: u64,
}

/// The gadget parameter table for one ε.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub epsilon: Rational,
    pub delta: Rational,
    pub t: Rational,
    pub d: u64,
    pub k: u64,
    pub s: Rational,
    pub a: Rational,
    pub r_not: Rational,
    pub r_nand: Rational,
    pub h_min: Rational,
    pub h_max: Rational,
    /// Node count after PURIFY expansion; enters `s`.
    pub v_expanded: u64,
    /// `Some` when `k`, `d` were set by hand and the correctness guarantees no
    /// longer apply.
    pub overridden: Option<Override>,
}

/// Largest admissible ε is strictly below 1/11.
pub fn epsilon_limit() -> Rational {
    q(1, 11)
}

pub fn delta_for(epsilon: &Rational) -> Rational {
    q(11, 4) * (epsilon_limit() - epsilon)
}

/// `d = 2·⌈log₂(3/δ)⌉`.
pub fn chain_length(delta: &Rational) -> u64 {
    2 * (q(3, 1) / delta).ceil_log2()
}

/// `k = ⌈110/δ⌉`.
pub fn copy_count(delta: &Rational) -> u64 {
    (q(110, 1) / delta).ceil().to_u64().expect("k fits in u64")
}

fn check_epsilon(epsilon: &Rational) -> Result<(), ReductionError> {
    if epsilon.is_negative() || *epsilon >= epsilon_limit() {
        return Err(ReductionError::Epsilon(epsilon.clone()));
    }
    Ok(())
}

/// Parameters for ε and an already-expanded node count.
pub fn compute_params(epsilon: &Rational, v_expanded: u64) -> Result<ReductionParams, ReductionError> {
    check_epsilon(epsilon)?;
    let delta = delta_for(epsilon);
    let d = chain_length(&delta);
    let k = copy_count(&delta);
    Ok(assemble(epsilon.clone(), delta, k, d, v_expanded.max(1), None))
}

/// `|V|` after replacing each PURIFY gate by two chains of `d` NOT gadgets.
pub fn expanded_nodes(circuit: &CircuitInstance, d: u64) -> u64 {
    let purify = circuit.gates().iter().filter(|g| g.gate_type == GateType::Purify).count() as u64;
    circuit.n() as u64 + 2 * (d - 1) * purify
}

/// Parameters for compiling `circuit`: `d` from ε (or the override) fixes the
/// expanded node count, which then fixes `s`. An empty circuit counts as one
/// node.
pub fn params_for_circuit(
    circuit: &CircuitInstance,
    epsilon: &Rational,
    ovr: Option<Override>,
) -> Result<ReductionParams, ReductionError> {
    check_epsilon(epsilon)?;
    let delta = delta_for(epsilon);
    let (k, d) = match ovr {
        Some(o) => {
            if o.k == 0 || o.d < 2 || o.d % 2 != 0 {
                return Err(ReductionError::Override(o));
            }
            (o.k, o.d)
        }
        None => (copy_count(&delta), chain_length(&delta)),
    };
    let v = expanded_nodes(circuit, d).max(1);
    Ok(assemble(epsilon.clone(), delta, k, d, v, ovr))
}

fn assemble(epsilon: Rational, delta: Rational, k: u64, d: u64, v: u64, ovr: Option<Override>) -> ReductionParams {
    let s = Rational::one() / Rational::from_bigint((20u64 * k * d * v).into());
    let a = q(2, 1).max(q(4, 1) * &s / &delta);
    ReductionParams {
        t: q(4, 11),
        r_not: q(2, 11),
        r_nand: q(2, 11),
        h_min: &s / &q(2, 1),
        h_max: &s * &q(2, 1),
        epsilon,
        delta,
        d,
        k,
        s,
        a,
        v_expanded: v,
        overridden: ovr,
    }
}

impl ReductionParams {
    pub fn guarantees_void(&self) -> bool {
        self.overridden.is_some()
    }

    /// `t̄ = t − 5/k`
    pub fn t_bar(&self) -> Rational {
        &self.t - &q(5, self.k as i64)
    }

    /// Anti-endowment pattern along PURIFY chain `chain ∈ {1, 2}` at position
    /// `j ∈ [1, d]`.
    pub fn r_chain(&self, chain: u8, j: u64) -> Rational {
        let even = j.is_multiple_of(2);
        match (chain, even) {
            (1, true) | (2, false) => q(2, 11),
            (1, false) | (2, true) => Rational::zero(),
            _ => panic!("chain must be 1 or 2, got {chain}"),
        }
    }

    fn width(&self) -> Rational {
        (&self.h_max - &self.h_min) / Rational::from_integer(self.k as i64)
    }

    /// `[H_low^c, H_high^c]`
    pub fn copy_interval(&self, c: u64) -> (Rational, Rational) {
        let w = self.width();
        let lo = &self.h_min + &(&w * &Rational::from_integer(c as i64));
        let hi = &lo + &w;
        (lo, hi)
    }

    pub fn copy_intervals(&self) -> Vec<(Rational, Rational)> {
        (0..self.k).map(|c| self.copy_interval(c)).collect()
    }

    /// Lowest-index copy whose closed interval contains `h`.
    pub fn copy_containing(&self, h: &Rational) -> Option<u64> {
        if *h < self.h_min || *h > self.h_max {
            return None;
        }
        let pos = (h - &self.h_min) / self.width();
        let mut c = pos.floor().to_u64().expect("copy index fits in u64");
        if pos.is_integer() && c > 0 {
            c -= 1;
        }
        Some(c.min(self.k - 1))
    }

    /// `L = s·H/a`
    pub fn low_threshold(&self, h: &Rational) -> Rational {
        &self.s * h / &self.a
    }
}
