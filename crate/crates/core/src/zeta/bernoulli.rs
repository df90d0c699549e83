//! Exact coefficients B_{2j} / (2j)! for the Euler-Maclaurin correction.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn store() -> &'static Mutex<Vec<BigRational>> {
    static STORE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    STORE.get_or_init(|| Mutex::new(vec![BigRational::one()]))
}

/// a_n = B_n / n! for n = 0..=max, from sum_{k=0}^{n} a_k / (n+1-k)! = 0.
fn scaled_bernoulli(max: usize) -> Vec<BigRational> {
    let mut a = store().lock().unwrap();
    if a.len() > max {
        return a[..=max].to_vec();
    }
    let mut inv_fact = vec![BigRational::one()];
    for i in 1..=max + 2 {
        let next = &inv_fact[i - 1] / BigRational::from_integer(BigInt::from(i));
        inv_fact.push(next);
    }
    while a.len() <= max {
        let n = a.len();
        if n > 1 && n % 2 == 1 {
            a.push(BigRational::zero());
            continue;
        }
        let mut s = BigRational::zero();
        for (k, ak) in a.iter().enumerate() {
            if !ak.is_zero() {
                s += ak * &inv_fact[n + 1 - k];
            }
        }
        a.push(-s);
    }
    a[..=max].to_vec()
}

/// B_{2j} / (2j)! for j = 1..=count.
pub fn em_coefficients(count: usize) -> Vec<BigRational> {
    let a = scaled_bernoulli(2 * count);
    (1..=count).map(|j| a[2 * j].clone()).collect()
}

/// B_{2j} / (2j)!.
pub fn em_coefficient(j: usize) -> BigRational {
    {
        let a = store().lock().unwrap();
        if a.len() > 2 * j {
            return a[2 * j].clone();
        }
    }
    scaled_bernoulli(2 * j + 8)[2 * j].clone()
}
