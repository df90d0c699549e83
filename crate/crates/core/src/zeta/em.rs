//! Euler-Maclaurin tail of the Dirichlet series.

use astro_float::BigFloat;
use num_rational::BigRational;

use super::bernoulli::em_coefficient;
use super::cbf::{power_neg_s, Cbf};
use crate::precision::{bf, with_consts, RM};

const MAX_CORRECTIONS: usize = 150;

pub struct Tail {
    pub value: Cbf,
    pub remainder_bound: f64,
}

fn rational_to_bf(r: &BigRational, p: usize) -> BigFloat {
    bf::from_bigint(r.numer(), p).div(&bf::from_bigint(r.denom(), p), p, RM)
}

/// N^{1-s}/(s-1) + N^{-s}/2 + sum_j B_2j/(2j)! s(s+1)..(s+2j-2) N^{-s-2j+1},
/// adding corrections until the remainder bound falls below `tol`.
pub fn tail(sigma: &BigFloat, t: &BigFloat, n: u64, tol: f64, p: usize) -> Tail {
    let ln_n = with_consts(|cc| BigFloat::from_u64(n, p).ln(p, RM, cc));
    let nms = with_consts(|cc| power_neg_s(&ln_n, sigma, t, p, cc));
    let n_bf = BigFloat::from_u64(n, p);
    let one = BigFloat::from_word(1, p);
    let s = Cbf::new(sigma.clone(), t.clone());
    let s_minus_1 = Cbf::new(sigma.sub(&one, p, RM), t.clone());
    let mut value = nms
        .scale(&n_bf, p)
        .div(&s_minus_1, p)
        .add(&nms.scale(&BigFloat::from_f64(0.5, p), p), p);

    let inv_n2 = one.div(&n_bf.mul(&n_bf, p, RM), p, RM);
    // running factor s(s+1)..(s+2j-2) N^{-s-2j+1}
    let mut run = s.mul(&nms, p).scale(&one.div(&n_bf, p, RM), p);
    let sigma_f = bf::to_f64(sigma);
    let t_f = bf::to_f64(t);
    let mut prev_mag = f64::INFINITY;
    for j in 1..=MAX_CORRECTIONS + 1 {
        let term = run.scale(&rational_to_bf(&em_coefficient(j), p), p);
        let mag = term.abs_f64();
        let a = sigma_f + (2 * j - 1) as f64;
        let bound = mag * a.hypot(t_f) / a;
        if bound < tol || mag > prev_mag || j == MAX_CORRECTIONS + 1 {
            return Tail {
                value,
                remainder_bound: bound,
            };
        }
        value = value.add(&term, p);
        prev_mag = mag;
        let k = (2 * j - 1) as u64;
        let f1 = Cbf::new(sigma.add(&BigFloat::from_u64(k, p), p, RM), t.clone());
        let f2 = Cbf::new(sigma.add(&BigFloat::from_u64(k + 1, p), p, RM), t.clone());
        run = run.mul(&f1, p).mul(&f2, p).scale(&inv_n2, p);
    }
    unreachable!()
}
