fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn first_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = 2u64;
    while out.len() < count {
        if is_prime(n) {
            out.push(n);
        }
        n += 1;
    }
    out
}

/// Primes used for a confluence point of the given order: the base pair
/// first, then the remaining primes in ascending order.
pub fn prime_sequence(p1: u64, p2: u64, order: usize) -> Vec<u64> {
    let mut out = vec![p1, p2];
    let mut n = 2u64;
    while out.len() < order {
        if n != p1 && n != p2 && is_prime(n) {
            out.push(n);
        }
        n += 1;
    }
    out.truncate(order);
    out
}

/// Smallest prime factor of every n < limit (0 and 1 map to themselves).
pub fn smallest_factor_sieve(limit: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..limit as u32).collect();
    let mut i = 2usize;
    while i * i < limit {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j < limit {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(first_primes(10), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751));
        assert!(!is_prime(1));
    }

    #[test]
    fn sequence_puts_pair_first() {
        assert_eq!(prime_sequence(2, 3, 6), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(prime_sequence(5, 7, 5), vec![5, 7, 2, 3, 11]);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let spf = smallest_factor_sieve(1000);
        for n in 2..1000u32 {
            let f = (2..=n).find(|d| n % d == 0).unwrap();
            assert_eq!(spf[n as usize], f);
        }
    }
}
