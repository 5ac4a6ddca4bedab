use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::demand::canonical_demand;
use super::SolverError;
use crate::market::{verify_fisher, FisherMarket, PriceVector};
use crate::rational::{q, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Step factor λ > 0.
    pub lambda: Rational,
    pub max_iters: u64,
    pub epsilon: Rational,
    /// Lower bound on every price; must be positive.
    pub floor: Rational,
    pub seed: u64,
    /// Extra runs from seeded random starting prices after the all-ones run.
    pub restarts: u32,
    /// Prices are truncated to this many significant bits after each step.
    pub precision_bits: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: q(1, 2),
            max_iters: 1000,
            epsilon: q(1, 12),
            floor: q(1, 1_000_000_000),
            seed: 0,
            restarts: 0,
            precision_bits: 64,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !self.lambda.is_positive() {
            return Err(SolverError::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !self.floor.is_positive() {
            return Err(SolverError::Config(format!("price floor must be positive, got {}", self.floor)));
        }
        if self.epsilon.is_negative() {
            return Err(SolverError::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if self.precision_bits == 0 {
            return Err(SolverError::Config("precision_bits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub run: u32,
    pub iteration: u64,
    pub max_abs_slack: Rational,
    pub goods_violating: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TatonnementResult {
    /// Converged prices, or the best seen (smallest max slack).
    pub prices: PriceVector,
    pub converged: bool,
    /// Price vectors evaluated across all runs, starting points included.
    pub iterations: u64,
    pub trace: Vec<TraceRow>,
}

/// `p_j ← max(floor, p_j · (1 + λ·(D_j − 1)))` from all-ones prices, using
/// canonical greedy demand. Stops as soon as the canonical allocation passes
/// `verify_fisher` at the configured ε.
pub fn tatonnement(market: &FisherMarket, config: &SolverConfig) -> Result<TatonnementResult, SolverError> {
    config.validate()?;
    if !market.satisfies_sufficient_condition() {
        return Err(SolverError::SufficientCondition);
    }
    let n = market.goods().len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::new();
    let mut best: Option<(Rational, PriceVector)> = None;
    let mut total_iters = 0;
    for run in 0..=config.restarts {
        let mut prices = if run == 0 {
            PriceVector::uniform(n, Rational::one())
        } else {
            // denominators of 1024 keep restarts exact and reproducible
            PriceVector((0..n).map(|_| Rational::new(rng.gen_range(1..=2048), 1024).max(config.floor.clone())).collect())
        };
        for iteration in 0..=config.max_iters {
            let demand = canonical_demand(market, &prices)?;
            let (worst, violating) = demand.slack(&config.epsilon);
            trace.push(TraceRow { run, iteration, max_abs_slack: worst.clone(), goods_violating: violating });
            total_iters += 1;
            if violating == 0 {
                let report = verify_fisher(market, &prices, &demand.bundles, &config.epsilon)
                    .expect("prices and bundles match the market");
                if report.pass {
                    return Ok(TatonnementResult { prices, converged: true, iterations: total_iters, trace });
                }
            }
            if best.as_ref().is_none_or(|(b, _)| worst < *b) {
                best = Some((worst, prices.clone()));
            }
            if iteration == config.max_iters {
                break;
            }
            let one = Rational::one();
            prices = PriceVector(
                prices
                    .0
                    .iter()
                    .zip(&demand.aggregate)
                    .map(|(p, d)| {
                        let step = &one + &(&config.lambda * &(d - &one));
                        (p * &step).truncate_to_bits(config.precision_bits).max(config.floor.clone())
                    })
                    .collect(),
            );
        }
    }
    let prices = best.map(|(_, p)| p).unwrap_or_else(|| PriceVector::uniform(n, Rational::one()));
    Ok(TatonnementResult { prices, converged: false, iterations: total_iters, trace })
}

/// Writes `iteration,max_abs_slack,goods_violating` rows (plus `run` when
/// restarts were used).
pub fn write_trace_csv<W: Write>(trace: &[TraceRow], with_run: bool, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if with_run {
        w.write_record(["run", "iteration", "max_abs_slack", "goods_violating"])?;
    } else {
        w.write_record(["iteration", "max_abs_slack", "goods_violating"])?;
    }
    for row in trace {
        let mut rec = Vec::with_capacity(4);
        if with_run {
            rec.push(row.run.to_string());
        }
        rec.push(row.iteration.to_string());
        rec.push(row.max_abs_slack.to_string());
        rec.push(row.goods_violating.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{Buyer, SplcUtility};

    #[test]
    fn fixed_point_at_start() {
        let b = Buyer::new("b_ref", q(1, 1), vec![(0, SplcUtility::linear(q(1, 1)))]).unwrap();
        let m = FisherMarket::new(vec!["ref".into()], vec![b]).unwrap();
        let out = tatonnement(&m, &SolverConfig { epsilon: q(0, 1), ..Default::default() }).unwrap();
        assert!(out.converged);
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.trace[0].iteration, 0);
    }

    #[test]
    fn symmetric_two_by_two() {
        // each buyer likes both goods linearly with a mild preference; equal
        // budgets give equal prices 1 and any split clearing both goods
        let u = |a: i64, b: i64| vec![(0, SplcUtility::linear(q(a, 1))), (1, SplcUtility::linear(q(b, 1)))];
        let b1 = Buyer::new("b1", q(1, 1), u(2, 1)).unwrap();
        let b2 = Buyer::new("b2", q(1, 1), u(1, 2)).unwrap();
        let m = FisherMarket::new(vec!["x".into(), "y".into()], vec![b1, b2]).unwrap();
        let out = tatonnement(&m, &SolverConfig { epsilon: q(0, 1), ..Default::default() }).unwrap();
        assert!(out.converged);
        assert_eq!(out.prices.0[0], out.prices.0[1]);
    }

    #[test]
    fn trace_csv_shape() {
        let rows = vec![TraceRow { run: 0, iteration: 0, max_abs_slack: q(1, 2), goods_violating: 1 }];
        let mut buf = Vec::new();
        write_trace_csv(&rows, false, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "iteration,max_abs_slack,goods_violating\n0,1/2,1\n");
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig { lambda: q(0, 1), ..Default::default() }.validate().is_err());
        assert!(SolverConfig { floor: q(0, 1), ..Default::default() }.validate().is_err());
    }
}
