//! Exact fixed-point phases on the k-lattice.
//!
//! For t = q k the quantity t log p / (2 pi) equals q * alpha_p with
//! alpha_p = log p / (2 (log p2 - log p1)). Its fractional part is stored as a
//! multi-limb binary fraction, so q * alpha_p mod 1 is an exact integer product
//! reduced mod 2^F and the only error is q times the rounding of alpha_p.

use astro_float::BigFloat;
use num_bigint::BigUint;

use super::{bf, ln_bf, PrimePair, RM};

/// Fraction of a turn, little-endian limbs, value = sum limb_i 2^(64 i) / 2^(64 n).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phase(Vec<u64>);

impl Phase {
    #[inline]
    pub fn top(&self) -> u64 {
        *self.0.last().unwrap()
    }

    #[inline]
    pub fn add_assign(&mut self, o: &Phase) {
        let mut carry = false;
        for (a, b) in self.0.iter_mut().zip(&o.0) {
            let (s1, c1) = a.overflowing_add(*b);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            *a = s2;
            carry = c1 || c2;
        }
    }

    #[inline]
    pub fn added(&self, o: &Phase) -> Phase {
        let mut p = self.clone();
        p.add_assign(o);
        p
    }

    /// Shifted residue mod(t log p, 2pi) - pi/2 as an f64.
    pub fn residue(&self) -> f64 {
        turns_to_residue(self.top())
    }
}

pub fn turns_to_residue(top: u64) -> f64 {
    let turns = top as f64 / 18446744073709551616.0;
    turns * std::f64::consts::TAU - std::f64::consts::FRAC_PI_2
}

/// Half-open residue interval [lo, hi) expressed on the 64-bit turn circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TurnWindow {
    lo: u64,
    width: u64,
}

impl TurnWindow {
    pub fn from_residues(lo: f64, hi: f64) -> TurnWindow {
        let to_turns = |r: f64| (r + std::f64::consts::FRAC_PI_2) / std::f64::consts::TAU;
        let scale = 18446744073709551616.0;
        let lo_t = to_turns(lo).clamp(0.0, 1.0);
        let width = ((hi - lo) / std::f64::consts::TAU).clamp(0.0, 1.0);
        TurnWindow {
            lo: (lo_t * scale) as u64,
            width: if width >= 1.0 { u64::MAX } else { (width * scale) as u64 },
        }
    }

    #[inline]
    pub fn contains(&self, top: u64) -> bool {
        top.wrapping_sub(self.lo) < self.width
    }
}

/// Per-prime lattice increments alpha_p at a fixed number of fraction limbs.
#[derive(Clone, Debug)]
pub struct PhaseKernel {
    pair: PrimePair,
    primes: Vec<u64>,
    limbs: usize,
    alphas: Vec<BigUint>,
}

impl PhaseKernel {
    /// `q_bits` is the largest q bit length the kernel must handle.
    pub fn new(pair: PrimePair, primes: &[u64], q_bits: u64) -> PhaseKernel {
        let frac_bits = ((q_bits + 128).max(256)).div_ceil(64) * 64;
        let limbs = (frac_bits / 64) as usize;
        let bits = frac_bits as usize + 128;
        let denom = ln_bf(pair.p2, bits)
            .sub(&ln_bf(pair.p1, bits), bits, RM)
            .mul(&BigFloat::from_word(2, bits), bits, RM);
        let scale = bf::from_biguint(&(BigUint::from(1u8) << frac_bits), bits);
        let alphas = primes
            .iter()
            .map(|&p| {
                let a = ln_bf(p, bits).div(&denom, bits, RM);
                let f = a.sub(&a.floor(), bits, RM);
                bf::floor_to_bigint(&f.mul(&scale, bits, RM))
                    .to_biguint()
                    .expect("nonnegative fraction")
            })
            .collect();
        PhaseKernel {
            pair,
            primes: primes.to_vec(),
            limbs,
            alphas,
        }
    }

    pub fn pair(&self) -> PrimePair {
        self.pair
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn frac_bits(&self) -> u64 {
        64 * self.limbs as u64
    }

    fn to_phase(&self, x: &BigUint) -> Phase {
        let mut d = x.to_u64_digits();
        d.resize(self.limbs, 0);
        Phase(d)
    }

    /// Phase of q alpha_p for the prime at `index`.
    pub fn phase(&self, index: usize, q: &BigUint) -> Phase {
        let mask = (BigUint::from(1u8) << self.frac_bits()) - 1u8;
        self.to_phase(&((q * &self.alphas[index]) & mask))
    }

    pub fn phases(&self, q: &BigUint) -> Vec<Phase> {
        (0..self.primes.len()).map(|i| self.phase(i, q)).collect()
    }

    pub fn residues(&self, q: &BigUint) -> Vec<f64> {
        self.phases(q).iter().map(Phase::residue).collect()
    }
}
