use std::fmt;

use serde::Serialize;

use super::SolverError;
use crate::market::{demand_interval, FisherMarket, GoodIndex, PriceVector};
use crate::rational::Rational;

/// Aggregate demand for one good over every optimal bundle of every buyer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Band {
    pub min: Rational,
    /// `None` when some buyer could absorb unboundedly much.
    pub max: Option<Rational>,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.max {
            Some(m) => write!(f, "[{}, {}]", self.min, m),
            None => write!(f, "[{}, inf)", self.min),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Every optimal demand exceeds `1 + ε`: the price is too low.
    Above,
    Clears,
    /// Every optimal demand is below `1 − ε`: the price is too high.
    Below,
}

impl Band {
    pub fn side(&self, epsilon: &Rational) -> Side {
        let one = Rational::one();
        match &self.max {
            Some(m) if *m < &one - epsilon => Side::Below,
            _ if self.min > &one + epsilon => Side::Above,
            _ => Side::Clears,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BisectionResult {
    pub price: Rational,
    pub cleared: bool,
    pub iterations: u32,
    pub demand: Band,
}

fn relevant_buyers(market: &FisherMarket, good: GoodIndex) -> Vec<usize> {
    market
        .buyers()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.utility_for(good).is_some() || !b.is_unsatiated())
        .map(|(i, _)| i)
        .collect()
}

fn band_over(market: &FisherMarket, prices: &PriceVector, good: GoodIndex, buyers: &[usize]) -> Result<Band, SolverError> {
    let mut min = Rational::zero();
    let mut max = Some(Rational::zero());
    for &i in buyers {
        let b = &market.buyers()[i];
        let d = demand_interval(b, prices, good).map_err(|e| SolverError::UnboundedDemand {
            buyer: b.id().to_string(),
            good: market.goods()[e.good].clone(),
        })?;
        min += d.min;
        max = match (max, d.max) {
            (Some(acc), Some(m)) => Some(acc + m),
            _ => None,
        };
    }
    Ok(Band { min, max })
}

/// Demand band for `good` at `prices`.
pub fn demand_band(market: &FisherMarket, prices: &PriceVector, good: GoodIndex) -> Result<Band, SolverError> {
    band_over(market, prices, good, &relevant_buyers(market, good))
}

/// Own prices of `good` at which some buyer is indifferent between one of its
/// segments and a segment of another positively priced good. Aggregate
/// demand can only jump at these points.
pub fn critical_prices(market: &FisherMarket, prices: &PriceVector, good: GoodIndex) -> Vec<Rational> {
    let mut out = Vec::new();
    for b in market.buyers() {
        let Some(own) = b.utility_for(good) else { continue };
        for (g, u) in b.utilities() {
            let p = prices.get(*g);
            if *g == good || !p.is_positive() {
                continue;
            }
            for sf in own.segments() {
                for sg in u.segments() {
                    if sf.slope.is_positive() && sg.slope.is_positive() {
                        out.push(&(&sf.slope * p) / &sg.slope);
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Finds a price for `free` in `[lo, hi]` at which some optimal allocation
/// ε-clears it, with every other price held at `pinned`.
///
/// Jumps in demand happen only at critical prices, so those are searched
/// first; between two adjacent critical prices demand is continuous and exact
/// midpoint bisection runs until the band meets `[1 − ε, 1 + ε]` or the
/// interval is narrower than `tolerance`.
pub fn pinned_bisection(
    market: &FisherMarket,
    pinned: &PriceVector,
    free: GoodIndex,
    bracket: (&Rational, &Rational),
    epsilon: &Rational,
    tolerance: &Rational,
) -> Result<BisectionResult, SolverError> {
    let n = market.goods().len();
    if pinned.len() != n {
        return Err(SolverError::PriceDimension { expected: n, got: pinned.len() });
    }
    if free >= n {
        return Err(SolverError::Config(format!("free good #{free} is out of range")));
    }
    let (lo, hi) = bracket;
    if !lo.is_positive() || lo >= hi {
        return Err(SolverError::Config(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
    }
    if epsilon.is_negative() || !tolerance.is_positive() {
        return Err(SolverError::Config("epsilon must be non-negative and tolerance positive".into()));
    }
    let buyers = relevant_buyers(market, free);
    let mut prices = pinned.clone();
    let mut eval = |p: &Rational| -> Result<Band, SolverError> {
        prices.0[free] = p.clone();
        band_over(market, &prices, free, &buyers)
    };
    let done = |price: &Rational, demand: Band, iterations: u32| {
        Ok(BisectionResult { price: price.clone(), cleared: true, iterations, demand })
    };

    let at_lo = eval(lo)?;
    let at_hi = eval(hi)?;
    if let Some(m) = &at_lo.max {
        if *m < at_hi.min {
            return Err(SolverError::Monotonicity { lo: lo.clone(), hi: hi.clone(), at_lo, at_hi });
        }
    }
    let side_lo = at_lo.side(epsilon);
    let side_hi = at_hi.side(epsilon);
    if side_lo == Side::Clears {
        return done(lo, at_lo, 0);
    }
    if side_hi == Side::Clears {
        return done(hi, at_hi, 0);
    }
    if side_lo == Side::Below || side_hi == Side::Above {
        return Err(SolverError::Bracket { lo: lo.clone(), hi: hi.clone(), at_lo, at_hi });
    }

    let mut points = vec![lo.clone()];
    points.extend(critical_prices(market, pinned, free).into_iter().filter(|c| c > lo && c < hi));
    points.push(hi.clone());
    let (mut i, mut j) = (0, points.len() - 1);
    let mut iterations = 0;
    while j - i > 1 {
        let m = (i + j) / 2;
        iterations += 1;
        let band = eval(&points[m])?;
        match band.side(epsilon) {
            Side::Clears => return done(&points[m], band, iterations),
            Side::Above => i = m,
            Side::Below => j = m,
        }
    }

    let (mut a, mut b) = (points[i].clone(), points[j].clone());
    loop {
        let mid = a.midpoint(&b);
        iterations += 1;
        let band = eval(&mid)?;
        let side = band.side(epsilon);
        if side == Side::Clears {
            return done(&mid, band, iterations);
        }
        if &b - &a <= *tolerance {
            return Ok(BisectionResult { price: mid, cleared: false, iterations, demand: band });
        }
        match side {
            Side::Above => a = mid,
            _ => b = mid,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Buyer, SplcUtility};
    use crate::rational::q;

    /// aux(j, r) with `p_ref = 1` plus a buyer spending `m` on `j` only.
    fn aux_plus_linear(r: Rational, m: Rational, s: Rational) -> FisherMarket {
        let b_ref = Buyer::new("b_ref", q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]).unwrap();
        let aux = Buyer::new(
            "aux",
            r.clone(),
            vec![(0, SplcUtility::linear(q(1, 1))), (1, SplcUtility::capped(&s * &q(2, 1), r))],
        )
        .unwrap();
        let lin = Buyer::new("lin", m, vec![(1, SplcUtility::linear(q(1, 1)))]).unwrap();
        FisherMarket::new(vec!["ref".into(), "j".into()], vec![b_ref, aux, lin]).unwrap()
    }

    #[test]
    fn closed_form_clearing_price() {
        // demand m/p + r = 1 while p ≤ 2s, so p* = m/(1 − r)
        let (r, m, s) = (q(2, 11), q(9, 110), q(1, 5));
        let market = aux_plus_linear(r.clone(), m.clone(), s.clone());
        let pinned = PriceVector(vec![q(1, 1), q(1, 1)]);
        let tol = q(1, 1 << 40);
        let out = pinned_bisection(&market, &pinned, 1, (&q(1, 100), &q(1, 1)), &q(0, 1), &tol).unwrap();
        let exact = &m / &(&q(1, 1) - &r);
        assert_eq!(exact, q(1, 10));
        assert!((&out.price - &exact).abs() <= tol);
    }

    #[test]
    fn tie_is_found_at_critical_price() {
        // above 2s the aux drops j entirely, so demand jumps from m/p + r to m/p
        let (r, m, s) = (q(1, 2), q(1, 4), q(1, 4));
        let market = aux_plus_linear(r, m, s);
        let pinned = PriceVector(vec![q(1, 1), q(1, 1)]);
        // at p = 1/2: m/p = 1/2, band [1/2, 1]; any ε clears it
        let out = pinned_bisection(&market, &pinned, 1, (&q(1, 100), &q(4, 1)), &q(0, 1), &q(1, 1 << 20)).unwrap();
        assert!(out.cleared);
        assert_eq!(out.price, q(1, 2));
        assert_eq!(out.demand, Band { min: q(1, 2), max: Some(q(1, 1)) });
        assert_eq!(critical_prices(&market, &pinned, 1), vec![q(1, 2)]);
    }

    #[test]
    fn bad_bracket() {
        let market = aux_plus_linear(q(2, 11), q(9, 110), q(1, 5));
        let pinned = PriceVector(vec![q(1, 1), q(1, 1)]);
        let err = pinned_bisection(&market, &pinned, 1, (&q(1, 2), &q(1, 1)), &q(0, 1), &q(1, 1000)).unwrap_err();
        assert!(matches!(err, SolverError::Bracket { .. }));
    }
}
