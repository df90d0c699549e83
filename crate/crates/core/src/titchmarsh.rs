//! Disk bounds on log zeta(sigma + it) and the abscissa below which
//! Re zeta can turn negative.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::precision::{BigReal, MIN_DIGITS};
use crate::zeta::{zeta, EvalRequest};

const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Debug)]
pub struct DiskBound {
    pub sigma: f64,
    pub center: BigReal,
    pub radius: BigReal,
}

fn zeta_real(sigma: f64, digits: u32) -> Result<BigReal> {
    Ok(zeta(&EvalRequest::at(sigma, 0.0, digits)?)?.re)
}

/// Center 1/2 log zeta(2 sigma) and radius 1/2 log(zeta(sigma)^2 / zeta(2 sigma)).
pub fn disk_bound(sigma: f64, digits: u32) -> Result<DiskBound> {
    if !(sigma > 1.0) || !sigma.is_finite() {
        return Err(Error::InvalidArgument(format!("disk bound needs sigma > 1, got {sigma}")));
    }
    let digits = digits.max(10);
    let z1 = zeta_real(sigma, digits)?;
    let z2 = zeta_real(2.0 * sigma, digits)?;
    let half = BigReal::from_f64(0.5, digits);
    Ok(DiskBound {
        sigma,
        center: half.mul(&z2.ln()),
        radius: half.mul(&z1.mul(&z1).div(&z2).ln()),
    })
}

pub fn radius(sigma: f64, digits: u32) -> Result<f64> {
    Ok(disk_bound(sigma, digits)?.radius.to_f64())
}

/// The sigma in (1, 2] where the disk radius equals pi/2, by bisection to
/// within 10^(-digits/2).
pub fn negativity_threshold(digits: u32) -> Result<f64> {
    let tol = 10f64.powf(-(digits as f64) / 2.0).max(f64::EPSILON);
    let eval_digits = digits.max(MIN_DIGITS);
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius(mid, eval_digits)? > FRAC_PI_2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Whether Re zeta(sigma + it) may be negative for some t.
pub fn can_be_negative(sigma: f64) -> Result<bool> {
    if !(sigma > 1.0) {
        return Err(Error::InvalidArgument(format!("sigma must exceed 1, got {sigma}")));
    }
    Ok(sigma < negativity_threshold(20)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_two_disk() {
        let d = disk_bound(2.0, 30).unwrap();
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        assert!((d.center.to_f64() - 0.5 * zeta4.ln()).abs() < 1e-14);
        assert!((d.center.to_f64() + d.radius.to_f64() - (std::f64::consts::PI.powi(2) / 6.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn sigma_at_most_one_is_rejected() {
        assert!(disk_bound(1.0, 30).is_err());
        assert!(can_be_negative(0.5).is_err());
    }

    #[test]
    fn threshold_brackets() {
        let s = negativity_threshold(10).unwrap();
        assert!((s - 1.197).abs() < 1e-3);
        assert!(radius(s + 0.01, 30).unwrap() < FRAC_PI_2);
        assert!(radius(s - 0.01, 30).unwrap() > FRAC_PI_2);
        assert!(!can_be_negative(2.0).unwrap());
        assert!(can_be_negative(1.0 + 1e-6).unwrap());
    }
}
