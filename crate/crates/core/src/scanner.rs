//! Searches for samples with Re zeta(1 + it) < 0, around confluence points
//! and along the t axis.

use std::str::FromStr;

use num_rational::Ratio;
use rayon::prelude::*;
use rust_decimal::Decimal;

use crate::confsearch::RunResult;
use crate::error::{Error, Result};
use crate::modspace::ConfluencePoint;
use crate::precision::{BigReal, ComplexValue, ExactT};
use crate::titchmarsh::can_be_negative;
use crate::zeta::{cutoff, zeta_with_cutoff, Abscissa, EvalRequest, DEFAULT_CEILING, HP_MAX_TERMS};

pub const DEFAULT_SAMPLES: usize = 21;
pub const SCAN_DIGITS: u32 = 10;

/// Heights closer than this to the pole at s = 1 are skipped by the brute scan.
pub const POLE_EXCLUSION: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub sigma: f64,
    pub digits: u32,
    pub ceiling: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            sigma: 1.0,
            digits: SCAN_DIGITS,
            ceiling: DEFAULT_CEILING,
        }
    }
}

impl ScanConfig {
    fn check(&self) -> Result<()> {
        if self.sigma != 1.0 && !can_be_negative(self.sigma)? {
            return Err(Error::InvalidArgument(format!(
                "Re zeta cannot be negative at sigma = {}",
                self.sigma
            )));
        }
        Ok(())
    }

    fn eval(&self, t: Abscissa) -> Result<ComplexValue> {
        let req = EvalRequest::new(BigReal::from_f64(self.sigma, 30), t, self.digits)?;
        zeta_with_cutoff(&req, cutoff(&req), self.ceiling)
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub offset: Ratio<i64>,
    pub t: ExactT,
    pub value: ComplexValue,
}

#[derive(Clone, Debug)]
pub struct NegativeRegionHit {
    pub source: Option<ConfluencePoint>,
    pub t_sample: Abscissa,
    pub zeta: ComplexValue,
    pub min_re: f64,
    /// Every sample of the window the hit came from.
    pub window: Vec<Sample>,
}

impl NegativeRegionHit {
    pub fn decimal_t(&self) -> String {
        match &self.t_sample {
            Abscissa::Exact(t) => t
                .to_real(t.working_digits())
                .map(|r| r.to_fixed(6))
                .unwrap_or_else(|_| format!("{:.6}", t.approx_f64())),
            Abscissa::Real(r) => r.to_fixed(6),
        }
    }
}

#[derive(Clone, Debug)]
pub enum WindowScan {
    Evaluated {
        samples: Vec<Sample>,
        hit: Option<NegativeRegionHit>,
    },
    /// The point lies above the evaluation ceiling and was not evaluated.
    Unverifiable { t: ExactT, approx: f64, ceiling: f64 },
}

impl WindowScan {
    pub fn hit(&self) -> Option<&NegativeRegionHit> {
        match self {
            WindowScan::Evaluated { hit, .. } => hit.as_ref(),
            WindowScan::Unverifiable { .. } => None,
        }
    }
}

/// Offsets -1, -1 + 2/(n-1), ..., 1 as exact fractions.
pub fn window_offsets(samples: usize) -> Result<Vec<Ratio<i64>>> {
    if samples < 2 {
        return Err(Error::InvalidArgument("a window needs at least 2 samples".into()));
    }
    let n = (samples - 1) as i64;
    Ok((0..=n).map(|i| Ratio::new(2 * i - n, n)).collect())
}

/// Evaluates zeta(sigma + i(t + o)) over the offset grid around the point.
pub fn scan_window(point: &ConfluencePoint, samples: usize, config: &ScanConfig) -> Result<WindowScan> {
    config.check()?;
    let offsets = window_offsets(samples)?;
    let approx = point.t.approx_f64();
    if approx + 1.0 > config.ceiling {
        return Ok(WindowScan::Unverifiable {
            t: point.t.clone(),
            approx,
            ceiling: config.ceiling,
        });
    }
    let samples: Vec<Sample> = offsets
        .par_iter()
        .map(|&o| {
            let t = point.t.with_offset(o)?;
            let value = config.eval(Abscissa::Exact(t.clone()))?;
            Ok(Sample { offset: o, t, value })
        })
        .collect::<Result<_>>()?;
    let hit = samples
        .iter()
        .min_by(|a, b| a.value.re.to_f64().total_cmp(&b.value.re.to_f64()))
        .filter(|s| s.value.re.to_f64() < 0.0)
        .map(|s| NegativeRegionHit {
            source: Some(point.clone()),
            t_sample: Abscissa::Exact(s.t.clone()),
            zeta: s.value.clone(),
            min_re: s.value.re.to_f64(),
            window: samples.clone(),
        });
    Ok(WindowScan::Evaluated { samples, hit })
}

#[derive(Clone, Debug, Default)]
pub struct TableScan {
    pub hits: Vec<NegativeRegionHit>,
    pub unverifiable: Vec<ExactT>,
    pub windows: usize,
}

/// Scans every point of orders 2..=max_order, lowest order first.
pub fn scan_tables(run: &RunResult, max_order: usize, samples: usize, config: &ScanConfig) -> Result<TableScan> {
    let mut out = TableScan::default();
    for (_, order) in run.orders.range(..=max_order) {
        for p in &order.points {
            out.windows += 1;
            match scan_window(p, samples, config)? {
                WindowScan::Evaluated { hit: Some(h), .. } => out.hits.push(h),
                WindowScan::Evaluated { hit: None, .. } => {}
                WindowScan::Unverifiable { t, .. } => out.unverifiable.push(t),
            }
        }
    }
    Ok(out)
}

/// Re-evaluates a hit with 10 more digits, or with a different cutoff when
/// that precision is out of reach, and reports whether Re zeta stays negative.
pub fn revalidate(hit: &NegativeRegionHit, config: &ScanConfig) -> Result<bool> {
    let sigma = BigReal::from_f64(config.sigma, 30);
    let digits = config.digits + 10;
    let req = EvalRequest::new(sigma.clone(), hit.t_sample.clone(), digits)?;
    let n = cutoff(&req);
    let value = if n <= HP_MAX_TERMS {
        zeta_with_cutoff(&req, n, config.ceiling)?
    } else {
        let req = EvalRequest::new(sigma, hit.t_sample.clone(), config.digits)?;
        let n = cutoff(&req) + cutoff(&req) / 2;
        zeta_with_cutoff(&req, n, config.ceiling)?
    };
    let re = value.re.to_f64();
    Ok(re < 0.0 && re.abs() > value.err_bound)
}

#[derive(Clone, Debug)]
pub struct BruteHit {
    pub t: Decimal,
    pub index: u64,
    pub value: ComplexValue,
}

impl BruteHit {
    pub fn as_region_hit(&self) -> NegativeRegionHit {
        NegativeRegionHit {
            source: None,
            t_sample: Abscissa::parse(&self.t.to_string()).expect("decimal heights parse"),
            zeta: self.value.clone(),
            min_re: self.value.re.to_f64(),
            window: Vec::new(),
        }
    }
}

/// Samples t = start + i step for i = next, next + 1, ... while t <= end.
/// The position `next` can be saved and restored to resume a scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteScan {
    pub start: Decimal,
    pub end: Decimal,
    pub step: Decimal,
    pub next: u64,
}

impl BruteScan {
    pub fn new(start: &str, end: &str, step: &str) -> Result<BruteScan> {
        let parse = |s: &str| {
            Decimal::from_str(s.trim()).map_err(|_| Error::InvalidArgument(format!("not a decimal number: {s:?}")))
        };
        let (start, end, step) = (parse(start)?, parse(end)?, parse(step)?);
        if start >= end {
            return Err(Error::InvalidArgument("scan start must be below its end".into()));
        }
        if step <= Decimal::ZERO {
            return Err(Error::InvalidArgument("scan step must be positive".into()));
        }
        Ok(BruteScan { start, end, step, next: 0 })
    }

    pub fn sample(&self, i: u64) -> Decimal {
        self.start + self.step * Decimal::from(i)
    }

    pub fn len(&self) -> u64 {
        let n = ((self.end - self.start) / self.step).floor();
        u64::try_from(n).unwrap_or(u64::MAX).saturating_add(1)
    }

    pub fn is_done(&self) -> bool {
        self.next >= self.len()
    }

    /// Evaluates up to `chunk` further samples in parallel and returns the
    /// first negative one among them. `next` moves past the hit, or past the
    /// whole chunk when there is none.
    pub fn advance(&mut self, chunk: u64, config: &ScanConfig) -> Result<Option<BruteHit>> {
        config.check()?;
        let stop = (self.next + chunk.max(1)).min(self.len());
        let found = (self.next..stop)
            .into_par_iter()
            .map(|i| -> Result<Option<BruteHit>> {
                let t = self.sample(i);
                if t.abs() < Decimal::from_str("0.001").unwrap() {
                    return Ok(None);
                }
                let value = config.eval(Abscissa::parse(&t.to_string())?)?;
                Ok((value.re.to_f64() < 0.0).then_some(BruteHit { t, index: i, value }))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .min_by_key(|h| h.index);
        self.next = match &found {
            Some(h) => h.index + 1,
            None => stop,
        };
        Ok(found)
    }

    /// Scans to the end, returning the first sample with Re zeta < 0.
    pub fn run(&mut self, config: &ScanConfig) -> Result<Option<BruteHit>> {
        while !self.is_done() {
            if let Some(h) = self.advance(256, config)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }
}

pub fn brute_scan(start: &str, end: &str, step: &str) -> Result<Option<BruteHit>> {
    BruteScan::new(start, end, step)?.run(&ScanConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_are_symmetric_tenths() {
        let o = window_offsets(21).unwrap();
        assert_eq!(o.len(), 21);
        assert_eq!(o[0], Ratio::from_integer(-1));
        assert_eq!(o[20], Ratio::from_integer(1));
        assert_eq!(o[6], Ratio::new(-2, 5));
        for i in 0..21 {
            assert_eq!(o[i], -o[20 - i]);
        }
        assert!(window_offsets(1).is_err());
    }

    #[test]
    fn brute_samples_are_exact_decimals() {
        let s = BruteScan::new("682112.85", "682112.95", "0.01").unwrap();
        assert_eq!(s.len(), 11);
        assert_eq!(s.sample(5).to_string(), "682112.90");
    }

    #[test]
    fn sigma_guard() {
        let c = ScanConfig {
            sigma: 1.5,
            ..ScanConfig::default()
        };
        let mut s = BruteScan::new("0", "1", "0.5").unwrap();
        assert_eq!(s.advance(4, &c).unwrap_err().category(), "invalid-argument");
    }
}
