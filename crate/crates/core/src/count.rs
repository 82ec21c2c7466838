//! Shortest-path multiplicities: exact big integers or residues modulo a
//! prime.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand_core::RngCore;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("mixed count arithmetic: {0} vs {1}")]
    MixedMode(String, String),
    #[error("exact count subtraction would go negative")]
    Underflow,
    #[error("modulus {0} is not a usable prime")]
    BadModulus(u64),
}

/// Arithmetic regime used for every count in one build or query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CountMode {
    Exact,
    Mod(u64),
}

impl CountMode {
    pub fn zero(self) -> CountValue {
        match self {
            CountMode::Exact => CountValue::Exact(BigUint::zero()),
            CountMode::Mod(p) => CountValue::Mod { residue: 0, modulus: p },
        }
    }

    pub fn one(self) -> CountValue {
        self.from_u64(1)
    }

    pub fn from_u64(self, x: u64) -> CountValue {
        match self {
            CountMode::Exact => CountValue::Exact(BigUint::from(x)),
            CountMode::Mod(p) => CountValue::Mod { residue: x % p, modulus: p },
        }
    }

    /// Builds a value from little-endian magnitude bytes.
    pub fn from_le_bytes(self, bytes: &[u8]) -> CountValue {
        match self {
            CountMode::Exact => CountValue::Exact(BigUint::from_bytes_le(bytes)),
            CountMode::Mod(p) => {
                let big = BigUint::from_bytes_le(bytes) % BigUint::from(p);
                CountValue::Mod { residue: big.to_u64().unwrap_or(0), modulus: p }
            }
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountMode::Exact => f.write_str("exact"),
            CountMode::Mod(p) => write!(f, "mod:{p}"),
        }
    }
}

/// A number of paths.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CountValue {
    Exact(BigUint),
    Mod { residue: u64, modulus: u64 },
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl CountValue {
    pub fn mode(&self) -> CountMode {
        match self {
            CountValue::Exact(_) => CountMode::Exact,
            CountValue::Mod { modulus, .. } => CountMode::Mod(*modulus),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CountValue::Exact(x) => x.is_zero(),
            CountValue::Mod { residue, .. } => *residue == 0,
        }
    }

    fn mismatch(&self, other: &CountValue) -> CountError {
        CountError::MixedMode(self.mode().to_string(), other.mode().to_string())
    }

    pub fn try_add(&self, other: &CountValue) -> Result<CountValue, CountError> {
        let mut out = self.clone();
        out.try_add_assign(other)?;
        Ok(out)
    }

    pub fn try_add_assign(&mut self, other: &CountValue) -> Result<(), CountError> {
        match (&mut *self, other) {
            (CountValue::Exact(a), CountValue::Exact(b)) => {
                *a += b;
                Ok(())
            }
            (CountValue::Mod { residue: a, modulus: p }, CountValue::Mod { residue: b, modulus: q })
                if p == q =>
            {
                *a = ((*a as u128 + *b as u128) % *p as u128) as u64;
                Ok(())
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn try_mul(&self, other: &CountValue) -> Result<CountValue, CountError> {
        match (self, other) {
            (CountValue::Exact(a), CountValue::Exact(b)) => Ok(CountValue::Exact(a * b)),
            (CountValue::Mod { residue: a, modulus: p }, CountValue::Mod { residue: b, modulus: q })
                if p == q =>
            {
                Ok(CountValue::Mod { residue: mul_mod(*a, *b, *p), modulus: *p })
            }
            _ => Err(self.mismatch(other)),
        }
    }

    /// `self - other`; exact values may not go negative.
    pub fn try_sub(&self, other: &CountValue) -> Result<CountValue, CountError> {
        match (self, other) {
            (CountValue::Exact(a), CountValue::Exact(b)) => {
                if a < b {
                    Err(CountError::Underflow)
                } else {
                    Ok(CountValue::Exact(a - b))
                }
            }
            (CountValue::Mod { residue: a, modulus: p }, CountValue::Mod { residue: b, modulus: q })
                if p == q =>
            {
                Ok(CountValue::Mod { residue: (*a + (*p - *b)) % *p, modulus: *p })
            }
            _ => Err(self.mismatch(other)),
        }
    }

    /// Reduces an exact value into `Mod(p)`; residues must already match `p`.
    pub fn reduce(&self, p: u64) -> Result<CountValue, CountError> {
        match self {
            CountValue::Exact(x) => {
                let r = (x % BigUint::from(p)).to_u64().unwrap_or(0);
                Ok(CountValue::Mod { residue: r, modulus: p })
            }
            CountValue::Mod { modulus, .. } if *modulus == p => Ok(self.clone()),
            CountValue::Mod { .. } => Err(self.mismatch(&CountMode::Mod(p).zero())),
        }
    }

    /// Little-endian magnitude bytes, empty for zero.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match self {
            CountValue::Exact(x) if x.is_zero() => Vec::new(),
            CountValue::Exact(x) => x.to_bytes_le(),
            CountValue::Mod { residue, .. } => {
                let bytes = residue.to_le_bytes();
                let len = 8 - residue.leading_zeros() as usize / 8;
                bytes[..len].to_vec()
            }
        }
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            CountValue::Exact(x) => Some(x),
            CountValue::Mod { .. } => None,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            CountValue::Exact(x) => x.is_one(),
            CountValue::Mod { residue, .. } => *residue == 1,
        }
    }
}

impl fmt::Display for CountValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountValue::Exact(x) => write!(f, "{x}"),
            CountValue::Mod { residue, .. } => write!(f, "{residue}"),
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Miller-Rabin with `rounds` random bases drawn from `rng`.
pub fn is_probable_prime<R: RngCore>(n: u64, rounds: u32, rng: &mut R) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for _ in 0..rounds {
        let a = 2 + rng.next_u64() % (n - 3);
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

/// Draws a random prime with exactly `bits` bits (top bit set), `3 ≤ bits ≤ 63`.
pub fn random_prime<R: RngCore>(bits: u32, rng: &mut R) -> u64 {
    assert!((3..=63).contains(&bits), "prime size must be between 3 and 63 bits");
    let top = 1u64 << (bits - 1);
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    loop {
        let candidate = ((rng.next_u64() & mask) | top) | 1;
        if is_probable_prime(candidate, 64, rng) {
            return candidate;
        }
    }
}

/// Prime size suggested for length-preservation queries with `k` faults on
/// an `n`-vertex graph: `⌈4·k·log2 n⌉` bits.
pub fn suggested_prime_bits(k: usize, n: usize) -> u32 {
    let n = n.max(2) as f64;
    (4.0 * k.max(1) as f64 * n.log2()).ceil() as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::SeedableRng;
    use rand_xoshiro::SplitMix64;

    #[test]
    fn exact_arithmetic() {
        let m = CountMode::Exact;
        let six = m.from_u64(2).try_mul(&m.from_u64(3)).unwrap();
        assert_eq!(six, m.from_u64(6));
        assert_eq!(six.try_sub(&m.from_u64(6)).unwrap(), m.zero());
        assert_eq!(m.from_u64(1).try_sub(&m.from_u64(2)), Err(CountError::Underflow));
    }

    #[test]
    fn mod_arithmetic_wraps() {
        let m = CountMode::Mod(7);
        assert_eq!(m.from_u64(5).try_add(&m.from_u64(4)).unwrap(), m.from_u64(2));
        assert_eq!(m.from_u64(1).try_sub(&m.from_u64(3)).unwrap(), m.from_u64(5));
        assert_eq!(m.from_u64(3).try_mul(&m.from_u64(5)).unwrap(), m.from_u64(1));
    }

    #[test]
    fn mixed_mode_is_an_error() {
        let a = CountMode::Exact.one();
        let b = CountMode::Mod(7).one();
        assert!(matches!(a.try_add(&b), Err(CountError::MixedMode(..))));
        assert!(CountMode::Mod(11).one().try_mul(&b).is_err());
    }

    #[test]
    fn bytes_round_trip() {
        let big = CountValue::Exact(BigUint::from(1u64) << 100);
        assert_eq!(CountMode::Exact.from_le_bytes(&big.to_le_bytes()), big);
        let r = CountMode::Mod(1_000_003).from_u64(999_999);
        assert_eq!(CountMode::Mod(1_000_003).from_le_bytes(&r.to_le_bytes()), r);
        assert!(CountMode::Exact.zero().to_le_bytes().is_empty());
    }

    #[test]
    fn primes_have_requested_size() {
        let mut rng = SplitMix64::seed_from_u64(1);
        for bits in [3, 10, 31, 61, 63] {
            let p = random_prime(bits, &mut rng);
            assert_eq!(64 - p.leading_zeros(), bits);
            // trial division for the small ones
            if bits <= 31 {
                assert!((2..).take_while(|d| d * d <= p).all(|d| p % d != 0));
            }
        }
        assert!(!is_probable_prime(561, 64, &mut rng));
        assert!(is_probable_prime((1 << 61) - 1, 64, &mut rng));
    }

    #[test]
    fn reduce_matches_residue() {
        let x = CountValue::Exact(BigUint::from(123_456_789u64));
        assert_eq!(x.reduce(1000).unwrap(), CountMode::Mod(1000).from_u64(789));
    }

    #[test]
    fn prime_bits_formula() {
        assert_eq!(suggested_prime_bits(1, 1024), 40);
        assert_eq!(suggested_prime_bits(2, 256), 64);
    }
}
