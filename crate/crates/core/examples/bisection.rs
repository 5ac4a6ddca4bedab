//! Clear a NOT gadget's output with its input pinned, by exact bisection and
//! by grid search.

use fisher_gadgets::q;
use fisher_gadgets::solver::lab::{GadgetFixture, NOT_FIXTURE};
use fisher_gadgets::solver::{grid_search, uniform_grid};

fn main() {
    let fx = GadgetFixture::from_text(NOT_FIXTURE, &q(1, 100), None).unwrap();
    let (input, output) = (fx.layout().variables[0], fx.layout().variables[1]);
    println!("copy {}: H = {}, L = {}", fx.copy, fx.h, fx.l);

    for share in [q(0, 1), q(7, 8), q(15, 16), q(1, 1)] {
        let p_in = &fx.l + &(&(&fx.h - &fx.l) * &share);
        let mut prices = fx.base_prices();
        prices.0[input] = p_in;
        let b = fx.clear(&prices, output).unwrap();
        let grid = uniform_grid(&(&fx.h / &q(64, 1)), &(&fx.h * &q(2, 1)), 1025);
        let hit = grid_search(&fx.reduced.market, &fx.reduced.params.epsilon, &prices, &[output], &grid).unwrap();
        println!(
            "p_in = L + {share}·(H − L): bisection p_out/H = {} (demand {}, {} steps), grid p_out/H = {:?}",
            (&b.price / &fx.h).to_f64(),
            b.demand,
            b.iterations,
            hit.map(|h| (&h.prices.0[output] / &fx.h).to_f64())
        );
    }
}
