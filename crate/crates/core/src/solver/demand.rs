use rayon::prelude::*;

use super::SolverError;
use crate::market::{optimal_bundle, Allocation, FisherMarket, GoodIndex, PriceVector};
use crate::rational::Rational;

/// Aggregate of every buyer's canonical greedy bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandProfile {
    /// Per good, `Σ_i x_{i,j}`.
    pub aggregate: Vec<Rational>,
    pub bundles: Allocation,
}

impl DemandProfile {
    /// `max_j |D_j − 1|` and the number of goods with `|D_j − 1| > ε`.
    pub fn slack(&self, epsilon: &Rational) -> (Rational, usize) {
        let one = Rational::one();
        let mut worst = Rational::zero();
        let mut violating = 0;
        for d in &self.aggregate {
            let s = (d - &one).abs();
            if s > *epsilon {
                violating += 1;
            }
            if s > worst {
                worst = s;
            }
        }
        (worst, violating)
    }
}

pub fn canonical_demand(market: &FisherMarket, prices: &PriceVector) -> Result<DemandProfile, SolverError> {
    if prices.len() != market.goods().len() {
        return Err(SolverError::PriceDimension { expected: market.goods().len(), got: prices.len() });
    }
    let rows = market
        .buyers()
        .par_iter()
        .map(|b| {
            optimal_bundle(b, prices).map(|o| o.bundle).map_err(|e| SolverError::UnboundedDemand {
                buyer: b.id().to_string(),
                good: market.goods()[e.good].clone(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bundles = Allocation { rows };
    let aggregate = bundles.column_sums(market.goods().len());
    Ok(DemandProfile { aggregate, bundles })
}

/// Canonical demand for a single good, from the buyers that can want it.
pub fn canonical_demand_for(
    market: &FisherMarket,
    prices: &PriceVector,
    good: GoodIndex,
) -> Result<Rational, SolverError> {
    let mut total = Rational::zero();
    for b in market.buyers() {
        if b.utility_for(good).is_none() {
            continue;
        }
        let o = optimal_bundle(b, prices).map_err(|e| SolverError::UnboundedDemand {
            buyer: b.id().to_string(),
            good: market.goods()[e.good].clone(),
        })?;
        if let Ok(i) = o.bundle.binary_search_by_key(&good, |(g, _)| *g) {
            total += &o.bundle[i].1;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Buyer, SplcUtility};
    use crate::rational::q;

    fn ref_only() -> FisherMarket {
        let b = Buyer::new("b_ref", q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]).unwrap();
        FisherMarket::new(vec!["ref".into()], vec![b]).unwrap()
    }

    #[test]
    fn ref_only_demand() {
        let m = ref_only();
        assert_eq!(canonical_demand(&m, &PriceVector(vec![q(1, 1)])).unwrap().aggregate, vec![q(1, 1)]);
        assert_eq!(canonical_demand(&m, &PriceVector(vec![q(1, 2)])).unwrap().aggregate, vec![q(2, 1)]);
        assert_eq!(canonical_demand_for(&m, &PriceVector(vec![q(1, 2)]), 0).unwrap(), q(2, 1));
        assert!(matches!(
            canonical_demand(&m, &PriceVector(vec![q(0, 1)])),
            Err(SolverError::UnboundedDemand { .. })
        ));
    }
}
