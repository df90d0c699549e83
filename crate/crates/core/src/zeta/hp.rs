//! Full-precision Dirichlet head for moderate heights.

use astro_float::BigFloat;

use super::cbf::{power_neg_s, Cbf};
use crate::precision::with_consts;
use crate::primes::smallest_factor_sieve;

/// Largest cutoff the high-precision engine accepts; above this the fast
/// engine (about 13 digits) is the only option.
pub const MAX_TERMS: u64 = 600_000;

/// sum_{n=1}^{n_max-1} n^{-s}, with prime powers computed directly and every
/// composite obtained as one complex product of earlier terms.
pub fn head(sigma: &BigFloat, t: &BigFloat, n_max: u64, p: usize) -> Cbf {
    let limit = n_max as usize;
    let spf = smallest_factor_sieve(limit.max(2));
    // only values that can still appear as a factor are kept
    let keep = limit / 2 + 1;
    let mut vals: Vec<Cbf> = Vec::with_capacity(keep);
    vals.push(Cbf::zero(p));
    let one = Cbf::new(BigFloat::from_word(1, p), BigFloat::from_word(0, p));
    vals.push(one.clone());
    let mut acc = if limit > 1 { one } else { Cbf::zero(p) };
    with_consts(|cc| {
        for n in 2..limit {
            let f = spf[n] as usize;
            let v = if f == n {
                let ln = BigFloat::from_u64(n as u64, p).ln(p, super::RM, cc);
                power_neg_s(&ln, sigma, t, p, cc)
            } else {
                vals[f].mul(&vals[n / f], p)
            };
            acc = acc.add(&v, p);
            if n < keep {
                vals.push(v);
            }
        }
    });
    acc
}
