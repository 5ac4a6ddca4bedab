#![allow(dead_code)]

use std::path::{Path, PathBuf};

use fisher_gadgets::market::{Allocation, Buyer, FisherMarket, Length, PriceVector, SplcSegment, SplcUtility};
use fisher_gadgets::purecircuit::{parse_circuit, CircuitInstance};
use fisher_gadgets::Rational;
use rand::Rng;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Every `.pc` fixture, sorted by file name.
pub fn circuit_corpus() -> Vec<(String, CircuitInstance)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("circuits"))
        .expect("circuit fixtures")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "pc"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).unwrap();
            (name, parse_circuit(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn small_positive(rng: &mut impl Rng) -> Rational {
    r(rng.gen_range(1..=12), rng.gen_range(1..=6))
}

/// Random concave utility with 1 to `max_segments` segments; the last one is
/// unbounded with probability 1/3 and slopes may reach zero.
pub fn random_utility(rng: &mut impl Rng, max_segments: usize) -> SplcUtility {
    let n = rng.gen_range(1..=max_segments);
    let mut slopes: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(0..=9), rng.gen_range(1..=4))).collect();
    slopes.sort_by(|a, b| b.cmp(a));
    let unbounded_tail = rng.gen_ratio(1, 3);
    let segs = slopes
        .into_iter()
        .enumerate()
        .map(|(i, slope)| {
            if unbounded_tail && i == n - 1 {
                SplcSegment::unbounded(slope)
            } else {
                SplcSegment::finite(r(rng.gen_range(1..=8), rng.gen_range(1..=8)), slope)
            }
        })
        .collect();
    SplcUtility::new(segs).expect("sorted slopes")
}

/// One buyer over `goods` goods with positive prices.
pub fn random_instance(rng: &mut impl Rng, goods: usize, max_segments: usize) -> (Buyer, PriceVector) {
    let mut utilities = Vec::new();
    for g in 0..goods {
        if rng.gen_ratio(4, 5) {
            utilities.push((g, random_utility(rng, max_segments)));
        }
    }
    let buyer = Buyer::new("b", small_positive(rng), utilities).unwrap();
    let prices = PriceVector((0..goods).map(|_| small_positive(rng)).collect());
    (buyer, prices)
}

/// Independent optimum of the bundle LP `max Σ slope·x` subject to
/// `Σ price·x ≤ budget`, `0 ≤ x_seg ≤ length`.
///
/// Enumerates every vertex: each subset of segments bought in full (when
/// affordable) plus at most one more segment filled with the leftover
/// budget. Concavity makes segment order irrelevant to the LP value.
pub fn vertex_oracle(buyer: &Buyer, prices: &PriceVector) -> Rational {
    let segs: Vec<(Rational, Option<Rational>, Rational)> = buyer
        .utilities()
        .iter()
        .flat_map(|(g, u)| {
            u.segments().iter().map(move |s| {
                let len = match &s.length {
                    Length::Finite(l) => Some(l.clone()),
                    Length::Unbounded => None,
                };
                (s.slope.clone(), len, prices.get(*g).clone())
            })
        })
        .collect();
    let n = segs.len();
    assert!(n <= 16, "oracle is exponential in the segment count");
    let budget = buyer.budget();
    let mut best = Rational::zero();
    for mask in 0u32..(1 << n) {
        let mut cost = Rational::zero();
        let mut value = Rational::zero();
        let mut ok = true;
        for (i, (slope, len, price)) in segs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let Some(len) = len else {
                    ok = false;
                    break;
                };
                cost += price * len;
                value += slope * len;
            }
        }
        if !ok || cost > *budget {
            continue;
        }
        let left = budget - &cost;
        let mut extra = Rational::zero();
        for (i, (slope, len, price)) in segs.iter().enumerate() {
            if mask & (1 << i) == 0 {
                let afford = &left / price;
                let x = match len {
                    Some(l) => afford.min(l.clone()),
                    None => afford,
                };
                extra = extra.max(slope * &x);
            }
        }
        best = best.max(value + extra);
    }
    best
}

/// A planted exact equilibrium: `held` lists `(good, units)` per buyer, each
/// good's units summing to 1. Held goods carry bang-per-buck 2 up to the held
/// amount then 1/2; other goods carry 1. Budgets equal the held value.
pub fn planted_market(prices: &[Rational], held: &[Vec<(usize, Rational)>]) -> (FisherMarket, PriceVector, Allocation) {
    let goods: Vec<String> = (0..prices.len()).map(|j| format!("g{j}")).collect();
    let buyers = held
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let budget: Rational = row.iter().map(|(g, x)| &prices[*g] * x).sum();
            let utilities = (0..prices.len())
                .map(|g| {
                    let p = &prices[g];
                    let u = match row.iter().find(|(h, _)| *h == g) {
                        Some((_, x)) => SplcUtility::new(vec![
                            SplcSegment::finite(x.clone(), p * &r(2, 1)),
                            SplcSegment::unbounded(p * &r(1, 2)),
                        ])
                        .unwrap(),
                        None => SplcUtility::linear(p.clone()),
                    };
                    (g, u)
                })
                .collect();
            Buyer::new(format!("b{i}"), budget, utilities).unwrap()
        })
        .collect();
    let market = FisherMarket::new(goods, buyers).unwrap();
    let alloc = Allocation { rows: held.to_vec() };
    (market, PriceVector(prices.to_vec()), alloc)
}

/// Random planted equilibrium with 2 to 4 goods and 2 to 4 buyers.
pub fn random_planted(rng: &mut impl Rng) -> (FisherMarket, PriceVector, Allocation) {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(2..=4);
    let prices: Vec<Rational> = (0..n).map(|_| small_positive(rng)).collect();
    let mut held = vec![Vec::new(); m];
    for g in 0..n {
        // split the unit of good g between up to two buyers
        let a = rng.gen_range(0..m);
        let b = rng.gen_range(0..m);
        if a == b {
            held[a].push((g, Rational::one()));
        } else {
            let share = r(rng.gen_range(1..=7), 8);
            held[a].push((g, share.clone()));
            held[b].push((g, &Rational::one() - &share));
        }
    }
    // every buyer needs a positive budget
    if held.iter().any(|row| row.is_empty()) {
        return random_planted(rng);
    }
    planted_market(&prices, &held)
}
