//! Conversions between astro-float values and machine / big-integer types.

use astro_float::{BigFloat, Sign, Word};
use num_bigint::{BigInt, BigUint, Sign as BiSign};

use super::RM;

pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    if x.is_zero() || words.is_empty() {
        return 0.0;
    }
    let n = words.len();
    let top = words[n - 1] as f64;
    let next = if n > 1 { words[n - 2] as f64 } else { 0.0 };
    let frac = (top + next / 18446744073709551616.0) / 18446744073709551616.0;
    let v = scale2(frac, exp);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

fn scale2(mut v: f64, mut e: i32) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
    }
    v * 2f64.powi(e)
}

pub fn from_biguint(n: &BigUint, bits: usize) -> BigFloat {
    let nbits = n.bits();
    if nbits == 0 {
        return BigFloat::from_word(0, bits);
    }
    let pad = (64 - nbits % 64) % 64;
    let shifted = n << pad;
    let words: Vec<Word> = shifted.to_u64_digits();
    let mut x = BigFloat::from_words(&words, Sign::Pos, nbits as i32);
    x.set_precision(bits, RM).expect("precision change");
    x
}

pub fn from_bigint(n: &BigInt, bits: usize) -> BigFloat {
    let x = from_biguint(n.magnitude(), bits);
    if n.sign() == BiSign::Minus {
        x.neg()
    } else {
        x
    }
}

/// Floor of `x` as a big integer.
pub fn floor_to_bigint(x: &BigFloat) -> BigInt {
    let f = x.floor();
    if f.is_zero() {
        return BigInt::from(0);
    }
    let Some((words, _, sign, exp, _)) = f.as_raw_parts() else {
        return BigInt::from(0);
    };
    let mag = BigUint::from_slice(
        &words
            .iter()
            .flat_map(|w| [*w as u32, (*w >> 32) as u32])
            .collect::<Vec<_>>(),
    );
    let total = 64 * words.len() as i64;
    let shift = exp as i64 - total;
    let mag = if shift >= 0 {
        mag << shift as usize
    } else {
        mag >> (-shift) as usize
    };
    let v = BigInt::from(mag);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}
