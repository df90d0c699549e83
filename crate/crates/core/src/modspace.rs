//! Line geometry of the (2,3) modular space and the base confluence sets.
//!
//! On the lattice t = q k with q even, t log 2 and t log 3 agree mod 2pi, so
//! an order-2 point is a lattice point whose common residue is small. The red
//! R lines cross zero once every 2pi / (53 log 3 - 84 log 2) in t; the two
//! lattice points of the matching class that bracket each crossing are the
//! only ones whose residue can be smaller than |R slope| * 62 k.

use astro_float::BigFloat;
use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::precision::turns::{turns_to_residue, PhaseKernel, TurnWindow};
use crate::precision::{
    bf, bits_for_digits, ln_bf, pi_bf, shifted_mod_2pi, BigReal, ExactT, PrimePair, RM,
};
use crate::primes::prime_sequence;

/// Distance in k-units between consecutive lattice points of one R-line class.
pub const CLASS_SPACING: u64 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineKind {
    L,
    G,
    R,
}

#[derive(Clone, Debug)]
pub struct LineFamily {
    pub kind: LineKind,
    pub slope: BigReal,
}

impl LineFamily {
    pub fn new(kind: LineKind, digits: u32) -> LineFamily {
        let p = bits_for_digits(digits);
        let l2 = ln_bf(2, p);
        let l3 = ln_bf(3, p);
        let lin = |a: u64, b: u64, d: u64| {
            let x = BigFloat::from_u64(a, p)
                .mul(&l2, p, RM)
                .sub(&BigFloat::from_u64(b, p).mul(&l3, p, RM), p, RM);
            x.div(&BigFloat::from_u64(d, p), p, RM)
        };
        let slope = match kind {
            LineKind::L => lin(3, 2, 1),
            LineKind::G => lin(8, 5, 3),
            LineKind::R => lin(84, 53, 31),
        };
        LineFamily {
            kind,
            slope: BigReal::from_bigfloat(slope, digits),
        }
    }

    /// Intercept of member n (and m in 1..=4 for the R family).
    pub fn intercept(&self, n: i64, m: i64) -> Result<BigReal> {
        let digits = self.slope.digits();
        let p = bits_for_digits(digits);
        let pi = pi_bf(p);
        let i = |v: i64| BigFloat::from_i64(v, p);
        let v = match self.kind {
            LineKind::L => i(4 * n - 1).mul(&pi, p, RM).div(&i(2), p, RM),
            LineKind::G => i(9 - 4 * n).mul(&pi, p, RM).div(&i(6), p, RM),
            LineKind::R => {
                check_m(m)?;
                i(16 * n + 4 * m - 47).mul(&pi, p, RM).div(&i(62), p, RM)
            }
        };
        Ok(BigReal::from_bigfloat(v, digits))
    }
}

fn check_m(m: i64) -> Result<()> {
    if !(1..=4).contains(&m) {
        return Err(Error::InvalidArgument(format!("m must be in 1..=4, got {m}")));
    }
    Ok(())
}

/// 53 log 3 - 84 log 2.
fn r_denominator(p: usize) -> BigFloat {
    BigFloat::from_u64(53, p)
        .mul(&ln_bf(3, p), p, RM)
        .sub(&BigFloat::from_u64(84, p).mul(&ln_bf(2, p), p, RM), p, RM)
}

/// Spacing between consecutive R-line zeros, 2pi / (53 log 3 - 84 log 2).
pub fn r_zero_spacing(digits: u32) -> BigReal {
    let p = bits_for_digits(digits);
    let v = pi_bf(p)
        .mul(&BigFloat::from_word(2, p), p, RM)
        .div(&r_denominator(p), p, RM);
    BigReal::from_bigfloat(v, digits)
}

/// |R slope| * 62 k: the largest residue either bracketing neighbour of an
/// R-line zero can have.
pub fn fast_path_threshold() -> f64 {
    let p = bits_for_digits(40);
    let slope = LineFamily::new(LineKind::R, 40).slope;
    let k = PrimePair::TWO_THREE.k_bf(p);
    bf::to_f64(&slope.as_bigfloat().abs().mul(&k, p, RM)) * CLASS_SPACING as f64
}

#[derive(Clone, Debug)]
pub struct RLineZero {
    pub n: i64,
    pub m: i64,
    pub t: BigReal,
}

impl RLineZero {
    /// Position of the zero in the lexicographic (n, m) order; index 0 is the
    /// first positive zero.
    pub fn index(&self) -> i64 {
        4 * self.n + self.m - 8
    }
}

/// t-axis crossing (16n + 4m - 31) pi / (2 (53 log 3 - 84 log 2)).
pub fn r_line_zero(n: i64, m: i64) -> Result<RLineZero> {
    check_m(m)?;
    if n < 0 {
        return Err(Error::InvalidArgument(format!("n must be nonnegative, got {n}")));
    }
    let extra = ((n.unsigned_abs() + 2) as f64).log10().ceil() as u32;
    let digits = 50 + extra;
    let p = bits_for_digits(digits);
    let v = BigFloat::from_i64(16 * n + 4 * m - 31, p)
        .mul(&pi_bf(p), p, RM)
        .div(&r_denominator(p).mul(&BigFloat::from_word(2, p), p, RM), p, RM);
    Ok(RLineZero {
        n,
        m,
        t: BigReal::from_bigfloat(v, digits),
    })
}

/// The two class points prev <= zero < next, 62 k-units apart. The class is
/// q = 2 (31 - 7m + 3n) mod 62.
pub fn nearest_neighbors(zero: &RLineZero) -> Result<(ExactT, ExactT)> {
    if zero.t.is_negative() || zero.t.to_f64() == 0.0 {
        return Err(Error::InvalidArgument("zero must be positive".into()));
    }
    let pair = PrimePair::TWO_THREE;
    let p = zero.t.bits() + 64;
    let z = zero.t.as_bigfloat().div(&pair.k_bf(p), p, RM);
    let start = BigInt::from(2 * (31 - 7 * zero.m + 3 * zero.n));
    let shifted = z.sub(&bf::from_bigint(&start, p), p, RM);
    let steps = bf::floor_to_bigint(&shifted.div(&BigFloat::from_u64(CLASS_SPACING, p), p, RM));
    let prev = start + steps * BigInt::from(CLASS_SPACING);
    let prev = prev
        .to_biguint()
        .ok_or_else(|| Error::InvalidArgument("zero lies before the first lattice point".into()))?;
    let next = &prev + CLASS_SPACING;
    Ok((ExactT::new(prev, pair), ExactT::new(next, pair)))
}

/// Residue interval for the base primes. For (2,3) with delta above the
/// fast-path threshold it is the symmetric band the two R-line neighbours
/// fill; otherwise the one-sided window [0, delta).
pub fn base_window(pair: PrimePair, delta: f64) -> Window {
    let h = fast_path_threshold();
    if pair == PrimePair::TWO_THREE && delta > h {
        Window { lo: -h, hi: h }
    } else {
        Window { lo: 0.0, hi: delta }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn one_sided(delta: f64) -> Window {
        Window { lo: 0.0, hi: delta }
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo <= r && r < self.hi
    }

    pub fn turns(&self) -> TurnWindow {
        TurnWindow::from_residues(self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfluencePoint {
    pub order: usize,
    pub t: ExactT,
    pub delta: f64,
    /// residue(t, p_i) for the point's prime sequence, as f64.
    pub residues: Vec<f64>,
}

impl ConfluencePoint {
    pub fn q(&self) -> &BigUint {
        self.t.q()
    }

    pub fn primes(&self) -> Vec<u64> {
        let pair = self.t.pair();
        prime_sequence(pair.p1, pair.p2, self.order)
    }
}

#[derive(Clone, Debug)]
pub struct BaseSetParams {
    pub pair: PrimePair,
    pub delta: f64,
    /// First outer-loop index n of the R-line enumeration.
    pub n_start: i64,
    /// Last outer-loop index n (inclusive).
    pub n_max: Option<i64>,
    pub q_max: Option<BigUint>,
    pub max_points: Option<usize>,
    pub fast_path_threshold: f64,
}

impl BaseSetParams {
    pub fn new(pair: PrimePair, delta: f64) -> BaseSetParams {
        BaseSetParams {
            pair,
            delta,
            n_start: 1,
            n_max: None,
            q_max: None,
            max_points: None,
            fast_path_threshold: fast_path_threshold(),
        }
    }

    pub fn with_q_max(mut self, q_max: u64) -> Self {
        self.q_max = Some(BigUint::from(q_max));
        self
    }

    pub fn with_n_range(mut self, start: i64, end: i64) -> Self {
        self.n_start = start;
        self.n_max = Some(end);
        self
    }

    pub fn with_max_points(mut self, count: usize) -> Self {
        self.max_points = Some(count);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, pi/2), got {}",
                self.delta
            )));
        }
        if self.n_max.is_none() && self.q_max.is_none() && self.max_points.is_none() {
            return Err(Error::InvalidArgument(
                "base set needs an n range, a q bound or a point budget".into(),
            ));
        }
        if self.pair != PrimePair::TWO_THREE && self.q_max.is_none() && self.max_points.is_none() {
            return Err(Error::InvalidArgument(
                "pairs other than (2,3) are enumerated on the lattice and need qmax or a point budget"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Order-2 confluence points.
///
/// For (2,3) the candidates are the R-line neighbours for n = n_start..=n_max,
/// m = 1..4. Above the fast-path threshold both neighbours are taken as they
/// are; below it each candidate's p1 residue is checked against [0, delta).
/// Other pairs are enumerated directly on the even-q lattice.
pub fn base_set(params: &BaseSetParams) -> Result<Vec<ConfluencePoint>> {
    params.validate()?;
    let mut out = if params.pair == PrimePair::TWO_THREE {
        r_line_base_set(params)?
    } else {
        lattice_base_set(params)
    };
    out.sort_by(|a, b| a.t.cmp(&b.t));
    out.dedup_by(|a, b| a.t == b.t);
    if let Some(limit) = params.max_points {
        out.truncate(limit);
    }
    Ok(out)
}

fn r_line_base_set(params: &BaseSetParams) -> Result<Vec<ConfluencePoint>> {
    let pair = params.pair;
    let fast = params.delta > params.fast_path_threshold;
    let window = if fast {
        Window {
            lo: -params.fast_path_threshold,
            hi: params.fast_path_threshold,
        }
    } else {
        Window::one_sided(params.delta)
    };
    let q_bits = params.q_max.as_ref().map_or(128, |q| q.bits() + 8).max(128);
    let kernel = PhaseKernel::new(pair, &[pair.p1, pair.p2], q_bits);
    let mut out = Vec::new();
    let mut n = params.n_start.max(0);
    'outer: loop {
        if params.n_max.is_some_and(|nm| n > nm) {
            break;
        }
        for m in 1..=4 {
            let zero = r_line_zero(n, m)?;
            if zero.t.is_negative() || zero.t.to_f64() == 0.0 {
                continue;
            }
            let (prev, next) = nearest_neighbors(&zero)?;
            if params.q_max.as_ref().is_some_and(|qm| prev.q() > qm) {
                break 'outer;
            }
            if params.max_points.is_some_and(|c| out.len() >= c) {
                break 'outer;
            }
            for cand in [prev, next] {
                if params.q_max.as_ref().is_some_and(|qm| cand.q() > qm) {
                    continue;
                }
                let residues = kernel.residues(cand.q());
                if fast || window.contains(residues[0]) {
                    out.push(ConfluencePoint {
                        order: 2,
                        t: cand,
                        delta: params.delta,
                        residues,
                    });
                }
            }
        }
        n += 1;
    }
    Ok(out)
}

fn lattice_base_set(params: &BaseSetParams) -> Vec<ConfluencePoint> {
    let pair = params.pair;
    let window = base_window(pair, params.delta);
    let tw = window.turns();
    let q_bits = params.q_max.as_ref().map_or(128, |q| q.bits() + 8).max(128);
    let kernel = PhaseKernel::new(pair, &[pair.p1, pair.p2], q_bits);
    let step = kernel.phase(0, &BigUint::from(2u8));
    let mut phase = kernel.phase(0, &BigUint::from(2u8));
    let mut q = BigUint::from(2u8);
    let mut out = Vec::new();
    loop {
        if params.q_max.as_ref().is_some_and(|qm| &q > qm) {
            break;
        }
        if params.max_points.is_some_and(|c| out.len() >= c) {
            break;
        }
        if tw.contains(phase.top()) {
            out.push(ConfluencePoint {
                order: 2,
                t: ExactT::new(q.clone(), pair),
                delta: params.delta,
                residues: kernel.residues(&q),
            });
        }
        phase.add_assign(&step);
        q += 2u8;
    }
    out
}

/// Ground truth for order 2: every even q in [2, q_max] whose p1 residue,
/// reduced in extended precision, lies in the base window.
pub fn brute_force_base(q_max: u64, delta: f64, pair: PrimePair) -> Result<Vec<ConfluencePoint>> {
    if q_max < 2 {
        return Err(Error::InvalidArgument("qmax must be at least 2".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let window = base_window(pair, delta);
    let residues = brute_residues(q_max, pair, &[pair.p1, pair.p2]);
    Ok(residues
        .into_iter()
        .filter(|(_, r)| window.contains(r[0]))
        .map(|(q, r)| ConfluencePoint {
            order: 2,
            t: ExactT::from_u64(q, pair),
            delta,
            residues: r,
        })
        .collect())
}

/// Residues of every even q in [2, q_max] for the given primes, each reduced
/// independently as q * (k log p) mod 2pi in extended precision.
pub fn brute_residues(q_max: u64, pair: PrimePair, primes: &[u64]) -> Vec<(u64, Vec<f64>)> {
    let digits = (crate::precision::decimal_digits(&BigUint::from(q_max)) + 20).max(50);
    let p = bits_for_digits(digits);
    let k = pair.k_bf(p);
    let factors: Vec<BigFloat> = primes.iter().map(|&l| k.mul(&ln_bf(l, p), p, RM)).collect();
    let chunks: Vec<(u64, u64)> = (0..=q_max / 2 / 8192)
        .map(|c| (2 + c * 16384, (2 + (c + 1) * 16384).min(q_max + 2)))
        .filter(|(a, b)| a < b)
        .collect();
    chunks
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let factors = &factors;
            (a..b).step_by(2).map(move |q| {
                let qb = BigFloat::from_u64(q, p);
                let r = factors
                    .iter()
                    .map(|f| bf::to_f64(&shifted_mod_2pi(&qb.mul(f, p, RM), p)))
                    .collect();
                (q, r)
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortraitRow {
    pub prime: u64,
    pub offset: f64,
    pub residue: f64,
}

/// Residue of each of the point's congruences over [t - alpha, t + alpha].
pub fn portrait(point: &ConfluencePoint, alpha: f64, samples: usize) -> Result<Vec<PortraitRow>> {
    if !(alpha > 0.0) || samples < 2 {
        return Err(Error::InvalidArgument(
            "portrait needs alpha > 0 and at least 2 samples".into(),
        ));
    }
    let primes = point.primes();
    let kernel = PhaseKernel::new(point.t.pair(), &primes, point.q().bits() + 8);
    let mut rows = Vec::with_capacity(primes.len() * samples);
    for (i, &p) in primes.iter().enumerate() {
        let top = kernel.phase(i, point.q()).top();
        let base_turns = top as f64 / 18446744073709551616.0;
        let lp = (p as f64).ln();
        for s in 0..samples {
            let offset = if s == samples - 1 {
                alpha
            } else {
                -alpha + 2.0 * alpha * s as f64 / (samples - 1) as f64
            };
            let turns = (base_turns + offset * lp / std::f64::consts::TAU).rem_euclid(1.0);
            let residue = if s * 2 == samples - 1 {
                turns_to_residue(top)
            } else {
                turns * std::f64::consts::TAU - std::f64::consts::FRAC_PI_2
            };
            rows.push(PortraitRow {
                prime: p,
                offset,
                residue,
            });
        }
    }
    Ok(rows)
}

/// Rough q range of the R-line enumeration for a given outer index.
pub fn q_for_n(n: i64) -> Option<u64> {
    let zero = r_line_zero(n, 4).ok()?;
    let k = PrimePair::TWO_THREE.k(40).to_f64();
    (zero.t.to_f64() / k).to_u64()
}
