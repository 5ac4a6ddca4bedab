use rayon::prelude::*;
use serde::Serialize;

use crate::rational::Rational;
use crate::reduction::ReductionParams;

/// Threshold constants for one PURIFY chain, evaluated at given `H_low`,
/// `H` and `L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainBounds {
    pub chain: u8,
    /// `r` of the odd positions and `r'` of the even positions.
    pub r: Rational,
    pub r_prime: Rational,
    pub a: Rational,
    pub a_prime: Rational,
    pub b: Rational,
    pub b_prime: Rational,
    /// Inputs at or below this drive the chain output to at most `L`.
    pub r_lower: Rational,
    /// Inputs at or above this drive the chain output to at least `H`.
    pub r_upper: Rational,
}

/// `(r, r')` for chain 1 or 2.
pub fn chain_pair(params: &ReductionParams, chain: u8) -> (Rational, Rational) {
    (params.r_chain(chain, 1), params.r_chain(chain, 2))
}

/// `x·(1−y)/(1−xy') + (xy')^{d/2}·(end − x·(1−y)/(1−xy'))` with `x = H_low`.
fn threshold(h_low: &Rational, first: &Rational, product: &Rational, end: &Rational, half_d: i32) -> Rational {
    let one = Rational::one();
    let fixed = h_low * &(&(&one - first) / &(&one - product));
    &fixed + &(&product.pow(half_d) * &(end - &fixed))
}

pub fn chain_bounds(params: &ReductionParams, chain: u8, h_low: &Rational, h: &Rational, l: &Rational) -> ChainBounds {
    let (r, r_prime) = chain_pair(params, chain);
    let one = Rational::one();
    let t = &params.t;
    let eps = &params.epsilon;
    let two = Rational::from_integer(2);
    let two_t_bar = &two * &params.t_bar();
    let two_t = &two * t;
    let tight = |r: &Rational| &(&(&(&one - &two_t) - r) - eps) / t;
    let loose = |r: &Rational| &(&(&(&one - &two_t_bar) - r) + eps) / t;
    let (a, a_prime, b, b_prime) = (tight(&r), tight(&r_prime), loose(&r), loose(&r_prime));
    let half_d = i32::try_from(params.d / 2).expect("chain length fits in i32");
    let r_upper = threshold(h_low, &a, &(&a * &b_prime), h, half_d);
    let r_lower = threshold(h_low, &b, &(&a_prime * &b), l, half_d);
    ChainBounds { chain, r, r_prime, a, a_prime, b, b_prime, r_lower, r_upper }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderingWitness {
    pub copy: u64,
    pub r_upper_chain1: Rational,
    pub r_lower_chain2: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainOrdering {
    pub holds: bool,
    pub copies_checked: u64,
    /// The copy with the smallest `R_L(2) − R_U(1)`.
    pub tightest: OrderingWitness,
}

/// Checks `R_U(chain 1) ≤ R_L(chain 2)` in every copy, taking the worst case
/// over the copy's interval: `R_U` is increasing in `H`, so it is evaluated
/// at `H_high`, and `R_L` is increasing in `L`, so it is evaluated at
/// `L = s·H_low/a`.
pub fn chain_ordering(params: &ReductionParams) -> ChainOrdering {
    let witnesses: Vec<OrderingWitness> = (0..params.k)
        .into_par_iter()
        .map(|c| {
            let (h_low, h_high) = params.copy_interval(c);
            let l_min = params.low_threshold(&h_low);
            let one = chain_bounds(params, 1, &h_low, &h_high, &l_min);
            let two = chain_bounds(params, 2, &h_low, &h_high, &l_min);
            OrderingWitness { copy: c, r_upper_chain1: one.r_upper, r_lower_chain2: two.r_lower }
        })
        .collect();
    let holds = witnesses.iter().all(|w| w.r_upper_chain1 <= w.r_lower_chain2);
    let tightest = witnesses
        .into_iter()
        .min_by(|x, y| (&x.r_lower_chain2 - &x.r_upper_chain1).cmp(&(&y.r_lower_chain2 - &y.r_upper_chain1)))
        .expect("k ≥ 1");
    ChainOrdering { holds, copies_checked: params.k, tightest }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::reduction::compute_params;

    #[test]
    fn spot_values_at_zero() {
        let p = compute_params(&q(0, 1), 2).unwrap();
        let (h_low, h_high) = p.copy_interval(0);
        let b = chain_bounds(&p, 1, &h_low, &h_high, &p.low_threshold(&h_high));
        assert_eq!((b.r.clone(), b.r_prime.clone()), (q(0, 1), q(2, 11)));
        assert_eq!(b.a, q(3, 4));
        assert_eq!(b.a_prime, q(1, 4));
        // B uses t̄ = t − 5/k, so it sits slightly above A
        assert_eq!(b.b, &q(3, 4) + &(&q(10, 440) * &q(11, 4)));
        let two = chain_bounds(&p, 2, &h_low, &h_high, &p.low_threshold(&h_high));
        assert_eq!((two.a.clone(), two.a_prime.clone()), (q(1, 4), q(3, 4)));
        assert!(b.r_lower < b.r_upper);
        assert!(b.r_upper <= two.r_lower);
        assert!(two.r_lower < two.r_upper);
    }

    #[test]
    fn ordering_holds_on_all_copies() {
        for eps in [q(0, 1), q(1, 12)] {
            let p = compute_params(&eps, 3).unwrap();
            let o = chain_ordering(&p);
            assert!(o.holds);
            assert_eq!(o.copies_checked, p.k);
        }
    }
}
