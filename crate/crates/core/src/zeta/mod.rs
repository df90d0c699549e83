//! Values of zeta(sigma + it) on and right of the line sigma = 1, Euler-product
//! partial log sums, and the arctangent buildup of the product's argument.

mod bernoulli;
pub(crate) mod cbf;
mod em;
mod fast;
mod hp;

use std::fmt;

use astro_float::BigFloat;

use crate::error::{Error, Result};
use crate::precision::dd::Dd;
use crate::precision::{bf, bits_for_digits, pi_bf, with_consts, BigReal, ComplexValue, ExactT, RM};
use crate::primes::first_primes;

pub use bernoulli::em_coefficients;
pub use hp::MAX_TERMS as HP_MAX_TERMS;

/// Heights above this are refused by `zeta`.
pub const DEFAULT_CEILING: f64 = 1e12;

/// Requests up to this many digits use the double-double engine.
pub const FAST_MAX_DIGITS: u32 = 12;

/// Height t, either exactly on the k-lattice or as a decimal.
#[derive(Clone, Debug)]
pub enum Abscissa {
    Exact(ExactT),
    Real(BigReal),
}

impl Abscissa {
    pub fn parse(s: &str) -> Result<Abscissa> {
        let digits = (s.len() as u32 + 30).max(50);
        Ok(Abscissa::Real(BigReal::parse(s, digits)?))
    }

    pub fn from_f64(t: f64) -> Abscissa {
        Abscissa::Real(BigReal::from_f64(t, 50))
    }

    pub(crate) fn to_bf(&self, bits: usize) -> BigFloat {
        match self {
            Abscissa::Exact(t) => t.value_bf(bits + t.q().bits() as usize),
            Abscissa::Real(r) => {
                let mut v = r.as_bigfloat().clone();
                v.set_precision(bits.max(r.bits()), RM).expect("precision");
                v
            }
        }
    }

    pub fn approx_f64(&self) -> f64 {
        match self {
            Abscissa::Exact(t) => t.approx_f64(),
            Abscissa::Real(r) => r.to_f64(),
        }
    }
}

impl fmt::Display for Abscissa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Abscissa::Exact(t) => write!(f, "{t}"),
            Abscissa::Real(r) => write!(f, "{}", r.to_significant(20)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvalRequest {
    pub sigma: BigReal,
    pub t: Abscissa,
    pub digits: u32,
}

impl EvalRequest {
    pub fn new(sigma: BigReal, t: Abscissa, digits: u32) -> Result<EvalRequest> {
        if sigma.to_f64() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "sigma must be at least 1, got {}",
                sigma.to_significant(10)
            )));
        }
        if digits < 10 {
            return Err(Error::InvalidArgument(format!(
                "at least 10 digits must be requested, got {digits}"
            )));
        }
        let req = EvalRequest { sigma, t, digits };
        if req.sigma.to_f64() == 1.0 && req.t.approx_f64().abs() < 1e-3 {
            return Err(Error::PoleProximity);
        }
        Ok(req)
    }

    pub fn at(sigma: f64, t: f64, digits: u32) -> Result<EvalRequest> {
        EvalRequest::new(BigReal::from_f64(sigma, 50), Abscissa::from_f64(t), digits)
    }
}

/// Cutoff N = ceil(max(10 digits, 2t / 2pi)).
pub fn cutoff(req: &EvalRequest) -> u64 {
    let t = req.t.approx_f64().abs();
    ((10 * req.digits) as f64).max(t / std::f64::consts::PI).ceil() as u64
}

/// zeta(sigma + it) with an error bound no larger than 10^-digits.
pub fn zeta(req: &EvalRequest) -> Result<ComplexValue> {
    zeta_with_cutoff(req, cutoff(req), DEFAULT_CEILING)
}

/// Same as `zeta` with an explicit cutoff and height ceiling. A different
/// cutoff gives an evaluation whose head and tail split independently.
pub fn zeta_with_cutoff(req: &EvalRequest, n: u64, ceiling: f64) -> Result<ComplexValue> {
    let t_abs = req.t.approx_f64().abs();
    if t_abs > ceiling {
        return Err(Error::AboveCeiling {
            t: req.t.to_string(),
            ceiling,
        });
    }
    let n = n.max(cutoff_floor(req));
    let target = 10f64.powi(-(req.digits as i32));
    if req.digits <= FAST_MAX_DIGITS {
        let v = fast_eval(req, n);
        if v.err_bound <= target {
            return Ok(v);
        }
    }
    if n > HP_MAX_TERMS {
        return Err(Error::PrecisionUnattainable {
            digits: req.digits,
            reason: format!(
                "{n} terms exceed the full-precision engine limit of {HP_MAX_TERMS}; at most {FAST_MAX_DIGITS} digits are available here"
            ),
        });
    }
    let v = hp_eval(req, n);
    if v.err_bound > target {
        return Err(Error::PrecisionUnattainable {
            digits: req.digits,
            reason: format!("error bound {:e} above target", v.err_bound),
        });
    }
    Ok(v)
}

fn cutoff_floor(req: &EvalRequest) -> u64 {
    // the Euler-Maclaurin corrections only shrink when 2 pi N exceeds |s|
    let t = req.t.approx_f64().abs();
    (t / (2.0 * std::f64::consts::PI) + 2.0 * req.digits as f64).ceil() as u64
}

fn phase_bits(req: &EvalRequest, n: u64) -> usize {
    let mag = req.t.approx_f64().abs() * (n as f64).ln().max(1.0) + 1.0;
    mag.log2().ceil().max(0.0) as usize + 16
}

fn hp_eval(req: &EvalRequest, n: u64) -> ComplexValue {
    let p = bits_for_digits(req.digits + 10) + phase_bits(req, n);
    let sigma = widen(req.sigma.as_bigfloat(), p);
    let t = req.t.to_bf(p);
    let head = hp::head(&sigma, &t, n, p);
    let tol = 10f64.powi(-(req.digits as i32) - 5);
    let tail = em::tail(&sigma, &t, n, tol, p);
    let v = head.add(&tail.value, p);
    let rounding = n as f64 * 64.0 * 2f64.powi(-(p as i32) + phase_bits(req, n) as i32);
    finish(v.re, v.im, req.digits, tail.remainder_bound + rounding)
}

fn fast_eval(req: &EvalRequest, n: u64) -> ComplexValue {
    let p = 192 + phase_bits(req, n);
    let t = req.t.to_bf(p);
    let two_pi = pi_bf(p).mul(&BigFloat::from_word(2, p), p, RM);
    let tt = t.div(&two_pi, p, RM);
    let hi = bf::to_f64(&tt);
    let lo = bf::to_f64(&tt.sub(&BigFloat::from_f64(hi, p), p, RM));
    let sigma_f = req.sigma.to_f64();
    let head = fast::head(Dd { hi, lo }, sigma_f, n);

    let sigma = widen(req.sigma.as_bigfloat(), p);
    let tail = em::tail(&sigma, &t, n, 1e-18, p);
    let ln_n = (n as f64).ln();
    let sigma_rounding = bf::to_f64(&sigma.sub(&BigFloat::from_f64(sigma_f, p), p, RM)).abs()
        * ln_n
        * (1.0 + ln_n);
    let re = BigFloat::from_f64(head.re.hi, p)
        .add(&BigFloat::from_f64(head.re.lo, p), p, RM)
        .add(&tail.value.re, p, RM);
    let im = BigFloat::from_f64(head.im.hi, p)
        .add(&BigFloat::from_f64(head.im.lo, p), p, RM)
        .add(&tail.value.im, p, RM);
    finish(re, im, req.digits, head.err_bound + tail.remainder_bound + sigma_rounding)
}

fn widen(x: &BigFloat, p: usize) -> BigFloat {
    let mut v = x.clone();
    v.set_precision(p, RM).expect("precision");
    v
}

fn finish(re: BigFloat, im: BigFloat, digits: u32, err: f64) -> ComplexValue {
    ComplexValue {
        re: BigReal::from_bigfloat(re, digits),
        im: BigReal::from_bigfloat(im, digits),
        err_bound: err,
    }
}

/// -sum_{n<=N} log(1 - p_n^{-s}) with principal logarithms.
pub fn euler_log_partial(
    sigma: &BigReal,
    t: &Abscissa,
    n_terms: usize,
    digits: u32,
) -> Result<ComplexValue> {
    if sigma.to_f64() < 1.0 {
        return Err(Error::InvalidArgument("sigma must be at least 1".into()));
    }
    let extra = (t.approx_f64().abs() * 10.0 + 1.0).log2().ceil() as usize;
    let p = bits_for_digits(digits + 10) + extra;
    let s = widen(sigma.as_bigfloat(), p);
    let tb = t.to_bf(p);
    let one = BigFloat::from_word(1, p);
    let half = BigFloat::from_f64(0.5, p);
    let mut re = BigFloat::from_word(0, p);
    let mut im = BigFloat::from_word(0, p);
    with_consts(|cc| {
        for q in first_primes(n_terms) {
            let ln = BigFloat::from_u64(q, p).ln(p, RM, cc);
            let z = cbf::power_neg_s(&ln, &s, &tb, p, cc);
            // |z| <= 1/2 so 1 - z has positive real part
            let wr = one.sub(&z.re, p, RM);
            let wi = z.im.neg();
            let m2 = wr.mul(&wr, p, RM).add(&wi.mul(&wi, p, RM), p, RM);
            let ln_abs = m2.ln(p, RM, cc).mul(&half, p, RM);
            let arg = wi.div(&wr, p, RM).atan(p, RM, cc);
            re = re.sub(&ln_abs, p, RM);
            im = im.sub(&arg, p, RM);
        }
    });
    let err = (n_terms as f64 + 1.0) * 2f64.powi(-(p as i32) + extra as i32 + 8);
    Ok(finish(re, im, digits, err))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildupRow {
    pub n: usize,
    pub value: f64,
}

/// Row N holds sum_{n<=N} arctan(1/p_n), the argument of prod (1 + i/p_n).
pub fn arg_buildup(max_n: usize) -> Vec<BuildupRow> {
    let mut acc = 0.0;
    first_primes(max_n)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            acc += (1.0 / p as f64).atan();
            BuildupRow { n: i + 1, value: acc }
        })
        .collect()
}

/// Smallest N whose buildup exceeds pi/2.
pub fn crossing_index() -> usize {
    let mut acc = 0.0;
    let mut n = 0;
    let mut p = 1u64;
    while acc <= std::f64::consts::FRAC_PI_2 {
        p += 1;
        while !crate::primes::is_prime(p) {
            p += 1;
        }
        acc += (1.0 / p as f64).atan();
        n += 1;
    }
    n
}
