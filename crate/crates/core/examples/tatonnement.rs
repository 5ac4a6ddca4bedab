//! Best-effort tâtonnement with restarts. The trace goes to stdout as CSV.
//!
//!     cargo run --example tatonnement -- market.json

use fisher_gadgets::market::io::market_from_json;
use fisher_gadgets::q;
use fisher_gadgets::solver::{tatonnement, write_trace_csv, SolverConfig};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/markets/capped.json").to_string());
    let market = market_from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let config = SolverConfig { epsilon: q(1, 50), max_iters: 200, restarts: 1, seed: 7, ..SolverConfig::default() };
    let result = tatonnement(&market, &config).unwrap();
    eprintln!("converged: {} after {} evaluations", result.converged, result.iterations);
    for (g, p) in market.goods().iter().zip(&result.prices.0) {
        eprintln!("  {g} = {p}");
    }
    write_trace_csv(&result.trace, true, std::io::stdout().lock()).unwrap();
}
