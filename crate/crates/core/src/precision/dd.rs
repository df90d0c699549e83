//! Double-double arithmetic (about 106 bits) for the fast zeta engine.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline(always)]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline(always)]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Veltkamp split, so exact products need no hardware fma.
#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = 134217729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Error of the rounded product a*b. Both branches are exact, so the choice
/// only affects speed.
#[inline(always)]
fn prod_err<const FMA: bool>(a: f64, b: f64, p: f64) -> f64 {
    if FMA {
        a.mul_add(b, -p)
    } else {
        let (ah, al) = split(a);
        let (bh, bl) = split(b);
        ((ah * bh - p) + ah * bl + al * bh) + al * bl
    }
}

#[inline(always)]
fn two_prod_err(a: f64, b: f64, p: f64) -> f64 {
    prod_err::<false>(a, b, p)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline(always)]
    pub fn new(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline(always)]
    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn add_f64(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.hi, x);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Dd { hi, lo }
    }

    #[inline(always)]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline(always)]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline(always)]
    pub fn mul(self, o: Dd) -> Dd {
        self.mul_g::<false>(o)
    }

    #[inline(always)]
    pub fn mul_g<const FMA: bool>(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = prod_err::<FMA>(self.hi, o.hi, p);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi));
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, x: f64) -> Dd {
        let p = self.hi * x;
        let e = two_prod_err(self.hi, x, p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * x);
        Dd { hi, lo }
    }

    /// 1/n for an integer n < 2^53.
    #[inline(always)]
    pub fn recip_u64(n: u64) -> Dd {
        Self::recip_g::<false>(n)
    }

    #[inline(always)]
    pub fn recip_g<const FMA: bool>(n: u64) -> Dd {
        let nf = n as f64;
        let hi = 1.0 / nf;
        let r = -prod_err::<FMA>(hi, nf, hi * nf) + (1.0 - hi * nf);
        Dd { hi, lo: r / nf }
    }

    /// Fractional part in [0, 1) as an f64.
    #[inline(always)]
    pub fn frac(self) -> f64 {
        let f = self.hi - self.hi.floor();
        let mut v = f + self.lo;
        if v < 0.0 {
            v += 1.0;
        }
        if v >= 1.0 {
            v -= 1.0;
        }
        v
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// log(1 + 1/n) for n >= 2^16.
#[inline]
pub fn log1p_recip(n: u64) -> Dd {
    log1p_small(Dd::recip_u64(n))
}

/// log(1 + x) for 0 <= x <= 2^-16.
#[inline(always)]
pub fn log1p_small(x: Dd) -> Dd {
    log1p_small_g::<false>(x)
}

#[inline(always)]
pub fn log1p_small_g<const FMA: bool>(x: Dd) -> Dd {
    let h = x.hi;
    let sq = h * h;
    let sq_err = prod_err::<FMA>(h, h, sq) + 2.0 * h * x.lo;
    let half_sq = Dd::new(sq * 0.5, sq_err * 0.5);
    let tail = h * sq * (1.0 / 3.0 - h * (0.25 - h * (0.2 - h * (1.0 / 6.0))));
    x.sub(half_sq).add_f64(tail)
}

/// log 2 in double-double.
pub const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319046813846299558417771e-17,
};

/// a / b for integers below 2^53.
#[inline]
pub fn ratio(a: u64, b: u64) -> Dd {
    let (af, bf) = (a as f64, b as f64);
    let hi = af / bf;
    let p = hi * bf;
    let r = (af - p) - two_prod_err(hi, bf, p);
    Dd::new(hi, r / bf)
}

/// 2 atanh(y) = log((1 + y) / (1 - y)) for 0 <= y <= 1/3.
pub fn two_atanh(y: Dd) -> Dd {
    let y2 = y.mul(y);
    let mut pow = y;
    let mut acc = y;
    let mut k = 1u64;
    while pow.hi > 1e-34 * y.hi {
        pow = pow.mul(y2);
        k += 2;
        acc = acc.add(pow.mul(Dd::recip_u64(k)));
    }
    acc.add(acc)
}

/// (sin 2 pi f, cos 2 pi f) for f in [0, 1), to about one ulp.
#[inline(always)]
pub fn sin_cos_turns(f: f64) -> (f64, f64) {
    let k = (f * 4.0).round();
    let x = (f - 0.25 * k) * std::f64::consts::TAU;
    let x2 = x * x;
    let s = x * (1.0
        + x2 * (-1.0 / 6.0
            + x2 * (1.0 / 120.0
                + x2 * (-1.0 / 5040.0
                    + x2 * (1.0 / 362880.0
                        + x2 * (-1.0 / 39916800.0
                            + x2 * (1.0 / 6227020800.0
                                + x2 * (-1.0 / 1307674368000.0
                                    + x2 * (1.0 / 355687428096000.0)))))))));
    let c = 1.0
        + x2 * (-0.5
            + x2 * (1.0 / 24.0
                + x2 * (-1.0 / 720.0
                    + x2 * (1.0 / 40320.0
                        + x2 * (-1.0 / 3628800.0
                            + x2 * (1.0 / 479001600.0
                                + x2 * (-1.0 / 87178291200.0
                                    + x2 * (1.0 / 20922789888000.0
                                        + x2 * (-1.0 / 6402373705728000.0)))))))));
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recip_is_accurate() {
        let r = Dd::recip_u64(3);
        let back = r.mul_f64(3.0);
        assert!((back.hi - 1.0).abs() < 1e-30 && back.lo.abs() < 1e-30);
    }

    #[test]
    fn atanh_gives_log3() {
        // log 3 = log 2 + 2 atanh(1/5)
        let l3 = LN2.add(two_atanh(ratio(1, 5)));
        assert!((l3.hi - 3f64.ln()).abs() < 1e-16);
        assert!((l3.lo + 9.07129723500153e-17).abs() < 1e-30, "{:e}", l3.lo);
    }

    #[test]
    fn log1p_matches_f64() {
        for n in [65536u64, 100_000, 1 << 30] {
            let v = log1p_recip(n).to_f64();
            assert!((v - (1.0 / n as f64).ln_1p()).abs() < 1e-20);
        }
    }

    #[test]
    fn turn_sin_cos_matches_libm() {
        let mut worst: f64 = 0.0;
        for i in 0..100_000 {
            let f = i as f64 / 100_000.0 + 1.234e-7;
            let (s, c) = sin_cos_turns(f);
            let (s0, c0) = (std::f64::consts::TAU * f).sin_cos();
            worst = worst.max((s - s0).abs()).max((c - c0).abs());
        }
        assert!(worst < 1e-15, "{worst}");
    }

    #[test]
    fn frac_of_large_values() {
        let x = Dd::new(1e11, 0.25);
        assert!((x.frac() - 0.25).abs() < 1e-12);
        let y = Dd::new(5.0, -0.25);
        assert!((y.frac() - 0.75).abs() < 1e-15);
    }
}
