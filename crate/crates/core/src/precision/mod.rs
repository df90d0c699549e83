//! Extended-precision reals, exact abscissae in k-units, and residue reduction.

pub mod bf;
pub mod dd;
pub mod turns;

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::is_prime;

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

pub const MIN_DIGITS: u32 = 30;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants"));
}

/// Runs `f` with this thread's astro-float constant cache. Must not be nested.
pub(crate) fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn bits_for_digits(digits: u32) -> usize {
    let b = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 16;
    b.div_ceil(64) * 64
}

pub fn decimal_digits(q: &BigUint) -> u32 {
    if q.is_zero() {
        1
    } else {
        (q.bits() as f64 * std::f64::consts::LOG10_2).floor() as u32 + 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKey {
    Pi,
    Ln(u64),
}

fn const_cache() -> &'static RwLock<HashMap<(ConstKey, usize), BigFloat>> {
    static CACHE: OnceLock<RwLock<HashMap<(ConstKey, usize), BigFloat>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached(key: ConstKey, bits: usize) -> BigFloat {
    let bits = bits.div_ceil(64) * 64;
    if let Some(v) = const_cache().read().unwrap().get(&(key, bits)) {
        return v.clone();
    }
    // a private constant cache keeps this callable from inside `with_consts`
    let mut cc = Consts::new().expect("astro-float constants");
    let v = match key {
        ConstKey::Pi => cc.pi(bits, RM),
        ConstKey::Ln(n) => BigFloat::from_u64(n, bits).ln(bits, RM, &mut cc),
    };
    const_cache()
        .write()
        .unwrap()
        .entry((key, bits))
        .or_insert(v)
        .clone()
}

pub fn pi_bf(bits: usize) -> BigFloat {
    cached(ConstKey::Pi, bits)
}

pub fn ln_bf(n: u64, bits: usize) -> BigFloat {
    cached(ConstKey::Ln(n), bits)
}

/// A real number held at a stated number of significant decimal digits.
#[derive(Clone, Debug)]
pub struct BigReal {
    value: BigFloat,
    digits: u32,
}

impl BigReal {
    pub fn from_bigfloat(value: BigFloat, digits: u32) -> Self {
        BigReal { value, digits }
    }

    pub fn from_f64(x: f64, digits: u32) -> Self {
        BigReal {
            value: BigFloat::from_f64(x, bits_for_digits(digits)),
            digits,
        }
    }

    pub fn from_i64(x: i64, digits: u32) -> Self {
        BigReal {
            value: BigFloat::from_i64(x, bits_for_digits(digits)),
            digits,
        }
    }

    /// Parses a decimal literal such as `682112.9` or `-4e-1`.
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        let bits = bits_for_digits(digits);
        let s = s.trim();
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits, RM, cc));
        if v.is_nan() || v.is_inf() || s.is_empty() {
            return Err(Error::InvalidArgument(format!("not a decimal number: {s:?}")));
        }
        Ok(BigReal { value: v, digits })
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.value
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> usize {
        bits_for_digits(self.digits)
    }

    pub fn to_f64(&self) -> f64 {
        bf::to_f64(&self.value)
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() && !self.value.is_zero()
    }

    fn binary(&self, o: &BigReal, f: impl Fn(&BigFloat, &BigFloat, usize) -> BigFloat) -> BigReal {
        let digits = self.digits.min(o.digits);
        BigReal {
            value: f(&self.value, &o.value, bits_for_digits(digits)),
            digits,
        }
    }

    pub fn add(&self, o: &BigReal) -> BigReal {
        self.binary(o, |a, b, p| a.add(b, p, RM))
    }

    pub fn sub(&self, o: &BigReal) -> BigReal {
        self.binary(o, |a, b, p| a.sub(b, p, RM))
    }

    pub fn mul(&self, o: &BigReal) -> BigReal {
        self.binary(o, |a, b, p| a.mul(b, p, RM))
    }

    pub fn div(&self, o: &BigReal) -> BigReal {
        self.binary(o, |a, b, p| a.div(b, p, RM))
    }

    /// Natural logarithm; the argument must be positive.
    pub fn ln(&self) -> BigReal {
        let p = self.bits();
        BigReal {
            value: with_consts(|cc| self.value.ln(p, RM, cc)),
            digits: self.digits,
        }
    }

    pub fn neg(&self) -> BigReal {
        BigReal {
            value: self.value.neg(),
            digits: self.digits,
        }
    }

    pub fn abs(&self) -> BigReal {
        BigReal {
            value: self.value.abs(),
            digits: self.digits,
        }
    }

    /// Fixed-point decimal rendering with `frac` digits after the point,
    /// rounded half to even on the binary value.
    pub fn to_fixed(&self, frac: usize) -> String {
        let bits = self.value.mantissa_max_bit_len().unwrap_or(64).max(64) + 4 * frac + 64;
        let scale = BigFloat::from_word(10, bits).powi(frac, bits, RM);
        let scaled = self.value.abs().mul(&scale, bits, RM);
        let half = BigFloat::from_f64(0.5, bits);
        let rounded = bf::floor_to_bigint(&scaled.add(&half, bits, RM));
        let digits = rounded.magnitude().to_string();
        let digits = if digits.len() <= frac {
            format!("{}{}", "0".repeat(frac + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = digits.split_at(digits.len() - frac);
        let neg = self.is_negative() && rounded.sign() != Sign::NoSign;
        let sign = if neg { "-" } else { "" };
        if frac == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Decimal rendering with about `sig` significant digits.
    pub fn to_significant(&self, sig: usize) -> String {
        let x = self.to_f64().abs();
        let e10 = if x == 0.0 { 0 } else { x.log10().floor() as i64 };
        let frac = (sig as i64 - 1 - e10).max(0) as usize;
        self.to_fixed(frac)
    }
}

impl PartialEq for BigReal {
    fn eq(&self, o: &Self) -> bool {
        self.value.partial_cmp(&o.value) == Some(Ordering::Equal)
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&o.value)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_significant(self.digits as usize))
    }
}

/// Complex value with an upper bound on its distance from the exact value.
#[derive(Clone, Debug)]
pub struct ComplexValue {
    pub re: BigReal,
    pub im: BigReal,
    pub err_bound: f64,
}

impl ComplexValue {
    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    pub fn format(&self, frac: usize) -> String {
        let im = self.im.to_fixed(frac);
        match im.strip_prefix('-') {
            Some(mag) => format!("{} - {}i", self.re.to_fixed(frac), mag),
            None => format!("{} + {}i", self.re.to_fixed(frac), im),
        }
    }
}

impl fmt::Display for ComplexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.re.digits().min(self.im.digits()) as usize;
        write!(f, "{}", self.format(d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimePair {
    pub p1: u64,
    pub p2: u64,
}

impl PrimePair {
    pub const TWO_THREE: PrimePair = PrimePair { p1: 2, p2: 3 };

    pub fn new(p1: u64, p2: u64) -> Result<Self> {
        for p in [p1, p2] {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        if p1 >= p2 {
            return Err(Error::InvalidArgument(format!(
                "base pair must be increasing, got {p1},{p2}"
            )));
        }
        Ok(PrimePair { p1, p2 })
    }

    /// Parses `"2,3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::InvalidArgument(format!("expected p1,p2 but got {s:?}")))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidArgument(format!("bad prime {x:?}")))
        };
        PrimePair::new(parse(a)?, parse(b)?)
    }

    /// k = pi / (log p2 - log p1).
    pub fn k_bf(&self, bits: usize) -> BigFloat {
        let d = ln_bf(self.p2, bits).sub(&ln_bf(self.p1, bits), bits, RM);
        pi_bf(bits).div(&d, bits, RM)
    }

    pub fn k(&self, digits: u32) -> BigReal {
        BigReal::from_bigfloat(self.k_bf(bits_for_digits(digits)), digits)
    }

    pub fn k_definition(&self) -> String {
        format!("k = pi/(log({}) - log({}))", self.p2, self.p1)
    }
}

impl fmt::Display for PrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.p1, self.p2)
    }
}

/// t = q*k + offset with k = pi/(log p2 - log p1), held exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExactT {
    q: BigUint,
    pair: PrimePair,
    offset: Ratio<i64>,
}

impl ExactT {
    pub fn new(q: BigUint, pair: PrimePair) -> Self {
        ExactT {
            q,
            pair,
            offset: Ratio::zero(),
        }
    }

    pub fn from_u64(q: u64, pair: PrimePair) -> Self {
        Self::new(BigUint::from(q), pair)
    }

    pub fn with_offset(&self, offset: Ratio<i64>) -> Result<Self> {
        if offset.abs() > Ratio::from_integer(1) {
            return Err(Error::InvalidArgument(format!("offset {offset} outside [-1, 1]")));
        }
        Ok(ExactT {
            q: self.q.clone(),
            pair: self.pair,
            offset,
        })
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn pair(&self) -> PrimePair {
        self.pair
    }

    pub fn offset(&self) -> Ratio<i64> {
        self.offset
    }

    pub fn is_even(&self) -> bool {
        self.q.is_even()
    }

    pub fn plus_gap(&self, gap: &BigUint) -> ExactT {
        ExactT {
            q: &self.q + gap,
            pair: self.pair,
            offset: self.offset,
        }
    }

    /// Working precision used for reductions involving this abscissa.
    pub fn working_digits(&self) -> u32 {
        (decimal_digits(&self.q) + 20).max(50)
    }

    /// Value of t as an astro-float at the given binary precision.
    pub(crate) fn value_bf(&self, bits: usize) -> BigFloat {
        let q = bf::from_biguint(&self.q, bits);
        let mut v = q.mul(&self.pair.k_bf(bits), bits, RM);
        if !self.offset.is_zero() {
            let n = BigFloat::from_i64(*self.offset.numer(), bits);
            let d = BigFloat::from_i64(*self.offset.denom(), bits);
            v = v.add(&n.div(&d, bits, RM), bits, RM);
        }
        v
    }

    /// Rough magnitude of t, for ceilings and step-size decisions.
    pub fn approx_f64(&self) -> f64 {
        self.q.to_f64().unwrap_or(f64::INFINITY) * self.pair.k(MIN_DIGITS).to_f64()
            + self.offset.to_f64().unwrap_or(0.0)
    }

    pub fn to_real(&self, digits: u32) -> Result<BigReal> {
        let need = if self.q.is_zero() { 0 } else { decimal_digits(&self.q) + 20 };
        if digits < need {
            return Err(Error::InsufficientPrecision(format!(
                "{digits} digits requested, q has {} digits so at least {need} are needed",
                decimal_digits(&self.q)
            )));
        }
        Ok(BigReal::from_bigfloat(
            self.value_bf(bits_for_digits(digits + 5)),
            digits,
        ))
    }

    /// Human-readable exact form, e.g. `4378640k - 2/5`.
    pub fn expression(&self) -> String {
        if self.offset.is_zero() {
            format!("{}k", self.q)
        } else if self.offset.is_negative() {
            format!("{}k - {}", self.q, -self.offset)
        } else {
            format!("{}k + {}", self.q, self.offset)
        }
    }
}

impl PartialOrd for ExactT {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ExactT {
    fn cmp(&self, o: &Self) -> Ordering {
        self.q
            .cmp(&o.q)
            .then(self.offset.cmp(&o.offset))
            .then((self.pair.p1, self.pair.p2).cmp(&(o.pair.p1, o.pair.p2)))
    }
}

impl fmt::Display for ExactT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.expression())
    }
}

pub fn log_prime(p: u64, digits: u32) -> Result<BigReal> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if digits < MIN_DIGITS {
        return Err(Error::InsufficientPrecision(format!(
            "log_prime needs at least {MIN_DIGITS} digits, got {digits}"
        )));
    }
    Ok(BigReal::from_bigfloat(ln_bf(p, bits_for_digits(digits)), digits))
}

/// Reduces x into [-pi/2, 3pi/2) as mod(x, 2pi) - pi/2.
pub(crate) fn shifted_mod_2pi(x: &BigFloat, bits: usize) -> BigFloat {
    let pi = pi_bf(bits);
    let two_pi = pi.mul(&BigFloat::from_word(2, bits), bits, RM);
    let turns = x.div(&two_pi, bits, RM).floor();
    let mut m = x.sub(&turns.mul(&two_pi, bits, RM), bits, RM);
    if m.is_negative() && !m.is_zero() {
        m = m.add(&two_pi, bits, RM);
    }
    if m >= two_pi {
        m = m.sub(&two_pi, bits, RM);
    }
    let half_pi = pi.div(&BigFloat::from_word(2, bits), bits, RM);
    m.sub(&half_pi, bits, RM)
}

/// mod(t log p, 2pi) - pi/2 computed with `digits` decimal digits of working precision.
pub fn residue_at(t: &ExactT, p: u64, digits: u32) -> Result<BigReal> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let need = decimal_digits(&t.q) + 20;
    if digits < need {
        return Err(Error::InsufficientPrecision(format!(
            "residue at q with {} digits needs {need} working digits",
            decimal_digits(&t.q)
        )));
    }
    let bits = bits_for_digits(digits);
    let x = t.value_bf(bits).mul(&ln_bf(p, bits), bits, RM);
    Ok(BigReal::from_bigfloat(shifted_mod_2pi(&x, bits), digits))
}

/// Shifted residue of t log p, accurate to 1e-12 absolute. Precision is
/// escalated until two successive working precisions agree.
pub fn residue(t: &ExactT, p: u64) -> Result<BigReal> {
    let mut digits = t.working_digits();
    let mut prev = residue_at(t, p, digits)?;
    for _ in 0..8 {
        digits += 20;
        let next = residue_at(t, p, digits)?;
        let diff = next.sub(&prev).to_f64().abs();
        // agreement across the 2pi wrap counts as agreement too
        if diff < 1e-15 || (diff - 2.0 * std::f64::consts::PI).abs() < 1e-15 {
            return Ok(prev);
        }
        prev = next;
    }
    Err(Error::PrecisionUnattainable {
        digits,
        reason: "residue did not stabilise".into(),
    })
}

/// Signed big integer floor of a real, re-exported for callers that need exact lattice arithmetic.
pub fn floor_bigint(x: &BigReal) -> BigInt {
    bf::floor_to_bigint(&x.value)
}
