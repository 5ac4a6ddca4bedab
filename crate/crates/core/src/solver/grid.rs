use super::demand::canonical_demand;
use super::SolverError;
use crate::market::{Allocation, FisherMarket, GoodIndex, PriceVector};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridHit {
    pub prices: PriceVector,
    /// Canonical greedy bundles at `prices`.
    pub allocation: Allocation,
    /// Grid index chosen for each free good.
    pub index: Vec<usize>,
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: &Rational, hi: &Rational, points: usize) -> Vec<Rational> {
    match points {
        0 => Vec::new(),
        1 => vec![lo.clone()],
        _ => {
            let step = &(hi - lo) / &Rational::from_integer(points as i64 - 1);
            (0..points).map(|i| lo + &(&step * &Rational::from_integer(i as i64))).collect()
        }
    }
}

/// Tries every assignment of `grid` values to the `free` goods in
/// lexicographic order (first free good most significant) and returns the
/// first whose canonical demand ε-clears every free good. Pinned goods are
/// not required to clear; with every good free this is full clearing.
pub fn grid_search(
    market: &FisherMarket,
    epsilon: &Rational,
    pinned: &PriceVector,
    free: &[GoodIndex],
    grid: &[Rational],
) -> Result<Option<GridHit>, SolverError> {
    let n = market.goods().len();
    if pinned.len() != n {
        return Err(SolverError::PriceDimension { expected: n, got: pinned.len() });
    }
    if free.is_empty() || free.len() > 3 {
        return Err(SolverError::Config(format!("grid search takes 1 to 3 free goods, got {}", free.len())));
    }
    let mut seen = free.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != free.len() || seen.iter().any(|&g| g >= n) {
        return Err(SolverError::Config("free goods must be distinct market goods".into()));
    }
    if grid.iter().any(|p| !p.is_positive()) {
        return Err(SolverError::Config("grid values must be positive".into()));
    }
    if grid.is_empty() {
        return Ok(None);
    }
    let one = Rational::one();
    let mut index = vec![0usize; free.len()];
    let mut prices = pinned.clone();
    loop {
        for (&g, &i) in free.iter().zip(&index) {
            prices.0[g] = grid[i].clone();
        }
        let demand = canonical_demand(market, &prices)?;
        if free.iter().all(|&g| (&demand.aggregate[g] - &one).abs() <= *epsilon) {
            return Ok(Some(GridHit { prices, allocation: demand.bundles, index }));
        }
        // odometer increment, last coordinate fastest
        let mut pos = free.len();
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < grid.len() {
                break;
            }
            index[pos] = 0;
        }
    }
}
