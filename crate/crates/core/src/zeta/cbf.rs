//! Minimal complex arithmetic on astro-float values.

use astro_float::{BigFloat, Consts};

use crate::precision::{bf, pi_bf, RM};

#[derive(Clone, Debug)]
pub struct Cbf {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Cbf {
    pub fn new(re: BigFloat, im: BigFloat) -> Cbf {
        Cbf { re, im }
    }

    pub fn zero(bits: usize) -> Cbf {
        Cbf::new(BigFloat::from_word(0, bits), BigFloat::from_word(0, bits))
    }

    pub fn add(&self, o: &Cbf, p: usize) -> Cbf {
        Cbf::new(self.re.add(&o.re, p, RM), self.im.add(&o.im, p, RM))
    }

    pub fn mul(&self, o: &Cbf, p: usize) -> Cbf {
        let re = self.re.mul(&o.re, p, RM).sub(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.re.mul(&o.im, p, RM).add(&self.im.mul(&o.re, p, RM), p, RM);
        Cbf::new(re, im)
    }

    pub fn scale(&self, x: &BigFloat, p: usize) -> Cbf {
        Cbf::new(self.re.mul(x, p, RM), self.im.mul(x, p, RM))
    }

    pub fn div(&self, o: &Cbf, p: usize) -> Cbf {
        let d = o.re.mul(&o.re, p, RM).add(&o.im.mul(&o.im, p, RM), p, RM);
        let re = self.re.mul(&o.re, p, RM).add(&self.im.mul(&o.im, p, RM), p, RM);
        let im = self.im.mul(&o.re, p, RM).sub(&self.re.mul(&o.im, p, RM), p, RM);
        Cbf::new(re.div(&d, p, RM), im.div(&d, p, RM))
    }

    pub fn abs_f64(&self) -> f64 {
        bf::to_f64(&self.re).hypot(bf::to_f64(&self.im))
    }
}

/// exp(-sigma L) * exp(-i t L) for a logarithm L = log n.
pub fn power_neg_s(
    ln_n: &BigFloat,
    sigma: &BigFloat,
    t: &BigFloat,
    p: usize,
    cc: &mut Consts,
) -> Cbf {
    let mag = sigma.mul(ln_n, p, RM).neg().exp(p, RM, cc);
    if t.is_zero() {
        return Cbf::new(mag, BigFloat::from_word(0, p));
    }
    let theta = reduce_2pi(&t.mul(ln_n, p, RM), p);
    let c = theta.cos(p, RM, cc);
    let s = theta.sin(p, RM, cc);
    Cbf::new(mag.mul(&c, p, RM), mag.mul(&s, p, RM).neg())
}

/// x mod 2pi in [0, 2pi).
pub fn reduce_2pi(x: &BigFloat, p: usize) -> BigFloat {
    let two_pi = pi_bf(p).mul(&BigFloat::from_word(2, p), p, RM);
    let k = x.div(&two_pi, p, RM).floor();
    let mut r = x.sub(&k.mul(&two_pi, p, RM), p, RM);
    if r.is_negative() && !r.is_zero() {
        r = r.add(&two_pi, p, RM);
    }
    r
}
