//! Gadget truth tables run on real compiled buyers.
//!
//! Each fixture compiles a small circuit whose gate 0 is the gadget under
//! test, keeps only the copy containing `s`, and pins `p_ref` so that
//! `H = s·p_ref` is that copy's `H_high`. Input prices are pinned, the output
//! is cleared with [`pinned_bisection`], and every buyer that touches the
//! output (top-ups, downstream inverters) is the one the compiler emitted.

use rayon::prelude::*;
use serde::Serialize;

use super::bisection::{demand_band, pinned_bisection, BisectionResult, Side};
use super::grid::uniform_grid;
use super::SolverError;
use crate::market::{GoodIndex, PriceVector};
use crate::purecircuit::{parse_circuit, CircuitInstance};
use crate::rational::{q, Rational};
use crate::reduction::{compile_selected, params_for_circuit, CopyLayout, Override, ReducedMarket, REF_GOOD};

/// Gate 0 is `NOT(0 → 1)`; the other gates only give node 0 a producer.
pub const NOT_FIXTURE: &str = "nodes 3\nNOT 0 1\nNOT 2 0\nNOT 0 2\n";
/// Gate 0 is `NAND(0, 1 → 2)`.
pub const NAND_FIXTURE: &str = "nodes 3\nNAND 0 1 2\nNOT 1 0\nNOT 0 1\n";
/// Gate 0 is `PURIFY(0 → 1, 2)`.
pub const PURIFY_FIXTURE: &str = "nodes 5\nPURIFY 0 1 2\nNOT 3 0\nNOT 4 3\nNOT 3 4\n";

pub const DEFAULT_MESH: usize = 64;
const MAX_CHAIN_PASSES: u32 = 8;

#[derive(Debug, Clone)]
pub struct GadgetFixture {
    pub reduced: ReducedMarket,
    pub copy: u64,
    pub p_ref: Rational,
    pub h: Rational,
    pub l: Rational,
}

impl GadgetFixture {
    pub fn build(circuit: &CircuitInstance, epsilon: &Rational, ovr: Option<Override>) -> Result<Self, SolverError> {
        let params = params_for_circuit(circuit, epsilon, ovr)?;
        let copy = params.copy_containing(&params.s).expect("s lies in [s/2, 2s]");
        let reduced = compile_selected(circuit, epsilon, ovr, Some(&[copy]))?;
        let h = reduced.copies[0].h_high.clone();
        let p_ref = &h / &params.s;
        let l = params.low_threshold(&h);
        Ok(GadgetFixture { reduced, copy, p_ref, h, l })
    }

    pub fn from_text(text: &str, epsilon: &Rational, ovr: Option<Override>) -> Result<Self, SolverError> {
        Self::build(&parse_circuit(text).expect("fixture circuits parse"), epsilon, ovr)
    }

    pub fn layout(&self) -> &CopyLayout {
        &self.reduced.copies[0]
    }

    /// `p_ref` on the reference good, `H` everywhere else.
    pub fn base_prices(&self) -> PriceVector {
        let mut p = PriceVector::uniform(self.reduced.market.goods().len(), self.h.clone());
        p.0[REF_GOOD] = self.p_ref.clone();
        p
    }

    pub fn bracket(&self) -> (Rational, Rational) {
        (&self.l / &q(2, 1), &self.h * &q(4, 1))
    }

    pub fn clear(&self, prices: &PriceVector, good: GoodIndex) -> Result<BisectionResult, SolverError> {
        let (lo, hi) = self.bracket();
        let tol = &(&hi - &lo) / &Rational::from_bigint(num_bigint::BigInt::from(1u8) << 80u32);
        pinned_bisection(&self.reduced.market, prices, good, (&lo, &hi), &self.reduced.params.epsilon, &tol)
    }

    fn var(&self, node: usize) -> GoodIndex {
        self.layout().variables[node]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    AtMostL,
    AtLeastH,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthRow {
    pub label: String,
    pub inputs: Vec<Rational>,
    pub expect: Expect,
    pub output: BisectionResult,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TruthTable {
    pub gadget: &'static str,
    pub epsilon: Rational,
    pub copy: u64,
    pub p_ref: Rational,
    #[serde(rename = "H")]
    pub h: Rational,
    #[serde(rename = "L")]
    pub l: Rational,
    pub pass: bool,
    pub rows: Vec<TruthRow>,
}

fn truth_table(
    gadget: &'static str,
    fx: &GadgetFixture,
    inputs: &[usize],
    output: usize,
    cases: &[(&str, Vec<Rational>, Expect)],
) -> Result<TruthTable, SolverError> {
    let rows = cases
        .par_iter()
        .map(|(label, values, expect)| {
            let mut prices = fx.base_prices();
            for (&node, v) in inputs.iter().zip(values) {
                prices.0[fx.var(node)] = v.clone();
            }
            let out = fx.clear(&prices, fx.var(output))?;
            let ok = match expect {
                Expect::AtMostL => out.price <= fx.l,
                Expect::AtLeastH => out.price >= fx.h,
            };
            Ok(TruthRow { label: label.to_string(), inputs: values.clone(), expect: *expect, pass: out.cleared && ok, output: out })
        })
        .collect::<Result<Vec<_>, SolverError>>()?;
    Ok(TruthTable {
        gadget,
        epsilon: fx.reduced.params.epsilon.clone(),
        copy: fx.copy,
        p_ref: fx.p_ref.clone(),
        h: fx.h.clone(),
        l: fx.l.clone(),
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

/// Input at `H_high` must clear the output at most `L`; input at `L/2` at
/// least `H`.
pub fn not_truth_table(epsilon: &Rational, ovr: Option<Override>) -> Result<TruthTable, SolverError> {
    let fx = GadgetFixture::from_text(NOT_FIXTURE, epsilon, ovr)?;
    let (high, low) = (fx.layout().h_high.clone(), &fx.l / &q(2, 1));
    let cases = [("in=H_high", vec![high], Expect::AtMostL), ("in=L/2", vec![low], Expect::AtLeastH)];
    truth_table("not", &fx, &[0], 1, &cases)
}

pub fn nand_truth_table(epsilon: &Rational, ovr: Option<Override>) -> Result<TruthTable, SolverError> {
    let fx = GadgetFixture::from_text(NAND_FIXTURE, epsilon, ovr)?;
    let (hi, lo) = (fx.layout().h_high.clone(), &fx.l / &q(2, 1));
    let cases = [
        ("in=(H_high,H_high)", vec![hi.clone(), hi.clone()], Expect::AtMostL),
        ("in=(L/2,H_high)", vec![lo.clone(), hi.clone()], Expect::AtLeastH),
        ("in=(H_high,L/2)", vec![hi, lo.clone()], Expect::AtLeastH),
        ("in=(L/2,L/2)", vec![lo.clone(), lo], Expect::AtLeastH),
    ];
    truth_table("nand", &fx, &[0, 1], 2, &cases)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepPoint {
    pub p_in: Rational,
    pub p_out1: Rational,
    pub p_out2: Rational,
    /// Every chain good clears at the final prices.
    pub cleared: bool,
    pub passes: u32,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PurifySweep {
    pub epsilon: Rational,
    pub copy: u64,
    pub d: u64,
    pub p_ref: Rational,
    #[serde(rename = "H")]
    pub h: Rational,
    #[serde(rename = "L")]
    pub l: Rational,
    pub mesh: usize,
    pub exceptions: usize,
    pub pass: bool,
    pub points: Vec<SweepPoint>,
}

/// Clears both chains of gate 0 with `p_in` pinned, one good at a time from
/// the input end. Later goods start at `H`; passes repeat until every chain
/// good clears against its final neighbours.
fn clear_chains(fx: &GadgetFixture, p_in: &Rational) -> Result<(PriceVector, bool, u32), SolverError> {
    let mut prices = fx.base_prices();
    prices.0[fx.var(0)] = p_in.clone();
    let chains: Vec<&[GoodIndex]> = fx.layout().chains.iter().filter(|c| c.gate == 0).map(|c| &c.goods[1..]).collect();
    let eps = &fx.reduced.params.epsilon;
    for pass in 1..=MAX_CHAIN_PASSES {
        for goods in &chains {
            for &g in *goods {
                prices.0[g] = fx.clear(&prices, g)?.price;
            }
        }
        let mut settled = true;
        for &g in chains.iter().flat_map(|c| c.iter()) {
            if demand_band(&fx.reduced.market, &prices, g)?.side(eps) != Side::Clears {
                settled = false;
                break;
            }
        }
        if settled {
            return Ok((prices, true, pass));
        }
    }
    Ok((prices, false, MAX_CHAIN_PASSES))
}

/// Sweeps `p_in` over `mesh` evenly spaced points of `[L, H]`.
pub fn purify_sweep(epsilon: &Rational, ovr: Option<Override>, mesh: usize) -> Result<PurifySweep, SolverError> {
    if mesh < 2 {
        return Err(SolverError::Config(format!("mesh needs at least 2 points, got {mesh}")));
    }
    let fx = GadgetFixture::from_text(PURIFY_FIXTURE, epsilon, ovr)?;
    let (h, l) = (fx.h.clone(), fx.l.clone());
    let (out1, out2) = (fx.var(1), fx.var(2));
    let points = uniform_grid(&l, &h, mesh)
        .into_par_iter()
        .map(|p_in| {
            let (prices, cleared, passes) = clear_chains(&fx, &p_in)?;
            let (o1, o2) = (prices.get(out1).clone(), prices.get(out2).clone());
            let outside = |p: &Rational| *p <= l || *p >= h;
            let ok = if p_in >= h {
                o1 >= h && o2 >= h
            } else if p_in <= l {
                o1 <= l && o2 <= l
            } else {
                outside(&o1) || outside(&o2)
            };
            Ok(SweepPoint { p_in, p_out1: o1, p_out2: o2, cleared, passes, pass: cleared && ok })
        })
        .collect::<Result<Vec<_>, SolverError>>()?;
    let exceptions = points.iter().filter(|p| !p.pass).count();
    Ok(PurifySweep {
        epsilon: epsilon.clone(),
        copy: fx.copy,
        d: fx.reduced.params.d,
        p_ref: fx.p_ref.clone(),
        h,
        l,
        mesh,
        exceptions,
        pass: exceptions == 0,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabSummary {
    pub guarantees_void: bool,
    pub pass: bool,
    pub not: TruthTable,
    pub nand: TruthTable,
    pub purify: PurifySweep,
}

pub fn run_lab(epsilon: &Rational, ovr: Option<Override>, mesh: usize) -> Result<LabSummary, SolverError> {
    let not = not_truth_table(epsilon, ovr)?;
    let nand = nand_truth_table(epsilon, ovr)?;
    let purify = purify_sweep(epsilon, ovr, mesh)?;
    Ok(LabSummary { guarantees_void: ovr.is_some(), pass: not.pass && nand.pass && purify.pass, not, nand, purify })
}
