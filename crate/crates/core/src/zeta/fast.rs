//! Double-double phase engine for large cutoffs (about 13 significant digits).
//!
//! The phase t log n / 2pi is carried in double-double so that only its
//! fractional part is rounded to f64. Logarithms of small n come from a table
//! built on prime logarithms; beyond the table each block of terms starts from
//! a 128-bit logarithm and advances by log(1 + 1/n).

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::precision::dd::{log1p_small_g, ratio, sin_cos_turns, two_atanh, Dd, LN2};
use crate::primes::smallest_factor_sieve;

const TABLE: usize = 1 << 16;
const BLOCK: u64 = 1 << 14;
const U: f64 = f64::EPSILON / 2.0;

/// log n for n < 2^16; a prime p gets log(p - 1) + 2 atanh(1 / (2p - 1)).
fn log_table() -> &'static [Dd] {
    static TABLE_CELL: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE_CELL.get_or_init(|| {
        let spf = smallest_factor_sieve(TABLE);
        let mut t = vec![Dd::ZERO; TABLE];
        t[2] = LN2;
        for n in 3..TABLE {
            let f = spf[n] as usize;
            t[n] = if f == n {
                t[n - 1].add(two_atanh(ratio(1, 2 * n as u64 - 1)))
            } else {
                t[f].add(t[n / f])
            };
        }
        t
    })
}

/// log n for any n < 2^50, from the table entry of its leading 16 bits.
pub(crate) fn ln_dd(n: u64) -> Dd {
    let table = log_table();
    if n < TABLE as u64 {
        return table[n as usize];
    }
    let shift = 64 - n.leading_zeros() - 16;
    let lead = n >> shift;
    let d = lead << shift;
    let v = n - d;
    let mut l = table[lead as usize].add(LN2.mul_f64(shift as f64));
    if v > 0 {
        l = l.add(two_atanh(ratio(v, 2 * d + v)));
    }
    l
}

#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline(always)]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let b = t - self.sum;
        self.comp += (self.sum - (t - b)) + (x - b);
        self.sum = t;
    }

    fn value(&self) -> Dd {
        Dd::new(self.sum, self.comp)
    }
}

pub struct HeadSum {
    pub re: Dd,
    pub im: Dd,
    pub err_bound: f64,
}

struct Block {
    re: Dd,
    im: Dd,
    err: f64,
}


#[inline(always)]
fn term<const FMA: bool>(big_t: Dd, l: Dd, mag: f64, re: &mut Compensated, im: &mut Compensated) {
    let (s, c) = sin_cos_turns(big_t.mul_g::<FMA>(l).frac());
    re.add(mag * c);
    im.add(-mag * s);
}

fn block(big_t: Dd, sigma: f64, lo: u64, hi: u64) -> Block {
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("fma") && std::is_x86_feature_detected!("sse4.1") {
        // SAFETY: the required CPU features were detected at runtime
        return unsafe { block_fma(big_t, sigma, lo, hi) };
    }
    block_impl::<false>(big_t, sigma, lo, hi)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "fma,sse4.1")]
unsafe fn block_fma(big_t: Dd, sigma: f64, lo: u64, hi: u64) -> Block {
    block_impl::<true>(big_t, sigma, lo, hi)
}

#[inline(always)]
fn block_impl<const FMA: bool>(big_t: Dd, sigma: f64, lo: u64, hi: u64) -> Block {
    let table = log_table();
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    let mut mag_sum = 0.0;
    let unit_sigma = sigma == 1.0;
    let tab_end = hi.min(TABLE as u64);
    for n in lo..tab_end {
        let l = table[n as usize];
        let mag = if unit_sigma { 1.0 / n as f64 } else { (-sigma * l.hi).exp() };
        mag_sum += mag;
        term::<FMA>(big_t, l, mag, &mut re, &mut im);
    }
    let mut l_max = if tab_end > lo { table[(tab_end - 1) as usize].hi } else { 0.0 };
    let start = lo.max(TABLE as u64);
    if start < hi {
        let mut l = ln_dd(start);
        for n in start..hi {
            let x = Dd::recip_g::<FMA>(n);
            let mag = if unit_sigma { x.hi } else { (-sigma * l.hi).exp() };
            mag_sum += mag;
            term::<FMA>(big_t, l, mag, &mut re, &mut im);
            l = l.add(log1p_small_g::<FMA>(x));
        }
        l_max = l.hi;
    }
    // phase error in turns: the log (table or walked) and the product T*log in
    // double-double, then the f64 fractional part and sin/cos
    let steps = (hi - lo) as f64;
    let log_err = l_max * (2f64.powi(-98) + steps * 2f64.powi(-103));
    let phase_err = big_t.hi.abs() * (log_err + l_max * 2f64.powi(-102)) + 2.0 * U;
    let mag_rel = if unit_sigma { U } else { 4.0 * U * (1.0 + sigma * l_max) };
    let err = mag_sum * (std::f64::consts::TAU * phase_err + 4.0 * U + mag_rel)
        + 2.0 * U * (re.sum.abs() + im.sum.abs())
        + 4.0 * steps * U * U * mag_sum;
    Block {
        re: re.value(),
        im: im.value(),
        err,
    }
}

/// sum_{n=1}^{n_max-1} n^{-sigma} e^{-2 pi i T log n} with T = t / 2pi in double-double.
pub fn head(big_t: Dd, sigma: f64, n_max: u64) -> HeadSum {
    let ranges: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut a = 1u64;
        while a < n_max {
            let b = (a + BLOCK).min(n_max);
            v.push((a, b));
            a = b;
        }
        v
    };
    let blocks: Vec<Block> = ranges
        .par_iter()
        .map(|&(a, b)| block(big_t, sigma, a, b))
        .collect();
    let mut re = Dd::ZERO;
    let mut im = Dd::ZERO;
    let mut err = 0.0;
    for b in &blocks {
        re = re.add(b.re);
        im = im.add(b.im);
        err += b.err;
    }
    HeadSum {
        re,
        im,
        err_bound: err + (re.hi.abs() + im.hi.abs()) * blocks.len() as f64 * 2f64.powi(-104),
    }
}
