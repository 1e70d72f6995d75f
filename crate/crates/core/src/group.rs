//! Prime-field group parameters and the modular arithmetic the protocols run on.
//!
//! Everything works over `Z_q^*` for a prime `q` with a generator `g` of order
//! `q - 1`. Exponents of `g` therefore live modulo `q - 1`, which is where
//! inversions of password hashes are taken.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::serde_dec;

/// Largest `q` whose `q - 1` is fully factored when checking the generator order.
pub const FACTOR_BOUND_BITS: u64 = 64;

const SEARCH_BUDGET: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("base is not in [1, q-1]")]
    BaseOutOfRange,
    #[error("{0} has no inverse modulo {1}")]
    NotCoprime(BigUint, BigUint),
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("group order leaves no invertible exponent")]
    DegenerateGroup,
    #[error("modulus is not prime")]
    NotPrime,
    #[error("g does not generate Z_q^*")]
    NotGenerator,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("cannot verify the order of g: q is above the factoring bound and not a safe prime")]
    UnverifiableOrder,
    #[error("no suitable prime found within the search budget")]
    SearchExhausted,
}

/// Public group parameters `(q, g)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "RawParams", into = "RawParams")]
pub struct GroupParams {
    q: BigUint,
    g: BigUint,
    q_byte_len: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(with = "serde_dec")]
    q: BigUint,
    #[serde(with = "serde_dec")]
    g: BigUint,
}

impl From<RawParams> for GroupParams {
    fn from(raw: RawParams) -> Self {
        GroupParams::from_parts(raw.q, raw.g)
    }
}

impl From<GroupParams> for RawParams {
    fn from(p: GroupParams) -> Self {
        RawParams { q: p.q, g: p.g }
    }
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupParams(q={}, g={})", self.q, self.g)
    }
}

impl GroupParams {
    /// Builds parameters without validating them. Use [`validate_params`] or
    /// [`GroupParams::new`] before running a protocol.
    pub fn from_parts(q: BigUint, g: BigUint) -> Self {
        let q_byte_len = q.bits().div_ceil(8).max(1) as usize;
        GroupParams { q, g, q_byte_len }
    }

    pub fn new(q: BigUint, g: BigUint) -> Result<Self, GroupError> {
        let params = Self::from_parts(q, g);
        validate_params(&params)?;
        Ok(params)
    }

    /// `q = 13, g = 6`.
    pub fn example() -> Self {
        Self::from_parts(BigUint::from(13u32), BigUint::from(6u32))
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn q_byte_len(&self) -> usize {
        self.q_byte_len
    }

    /// The order of `g`, `q - 1`.
    pub fn order(&self) -> BigUint {
        &self.q - 1u32
    }

    /// True when `0 < value < q`.
    pub fn contains(&self, value: &BigUint) -> bool {
        !value.is_zero() && value < &self.q
    }

    /// Fixed-width big-endian encoding, `q_byte_len` bytes. Values wider than
    /// that are truncated to their low-order bytes; callers pass residues.
    pub fn encode_residue(&self, value: &BigUint) -> Vec<u8> {
        let raw = value.to_bytes_be();
        let mut out = vec![0u8; self.q_byte_len];
        if raw.len() >= self.q_byte_len {
            out.copy_from_slice(&raw[raw.len() - self.q_byte_len..]);
        } else {
            out[self.q_byte_len - raw.len()..].copy_from_slice(&raw);
        }
        out
    }

    /// Serialises as the params file: `q` then `g`, one decimal per line.
    pub fn to_file_string(&self) -> String {
        format!("{}\n{}\n", self.q, self.g)
    }

    pub fn parse_file(text: &str) -> Result<Self, GroupError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| -> Result<BigUint, GroupError> {
            lines
                .next()
                .ok_or_else(|| GroupError::OutOfRange(format!("params file is missing {what}")))?
                .parse::<BigUint>()
                .map_err(|e| GroupError::OutOfRange(format!("{what}: {e}")))
        };
        let q = next("q")?;
        let g = next("g")?;
        if lines.next().is_some() {
            return Err(GroupError::OutOfRange("params file has extra lines".into()));
        }
        Ok(Self::from_parts(q, g))
    }
}

/// Per-session operation tally. Owned by whoever runs the session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub modexp: u64,
    pub hash_evals: u64,
}

impl Tally {
    pub fn merge(&mut self, other: &Tally) {
        self.modexp += other.modexp;
        self.hash_evals += other.hash_evals;
    }
}

/// `base^exponent mod q` by left-to-right square-and-multiply. Counts one
/// exponentiation in `tally`.
pub fn mod_exp(
    base: &BigUint,
    exponent: &BigUint,
    params: &GroupParams,
    tally: &mut Tally,
) -> Result<BigUint, GroupError> {
    if !params.contains(base) {
        return Err(GroupError::BaseOutOfRange);
    }
    tally.modexp += 1;
    Ok(square_and_multiply(base, exponent, &params.q))
}

pub(crate) fn square_and_multiply(base: &BigUint, exponent: &BigUint, modulus: &BigUint) -> BigUint {
    let mut acc = BigUint::one() % modulus;
    for i in (0..exponent.bits()).rev() {
        acc = (&acc * &acc) % modulus;
        if exponent.bit(i) {
            acc = (acc * base) % modulus;
        }
    }
    acc
}

/// Inverse of `a` modulo `m` via the extended Euclidean algorithm.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Result<BigUint, GroupError> {
    if m < &BigUint::from(2u32) {
        return Err(GroupError::InvalidModulus);
    }
    let modulus = BigInt::from_biguint(Sign::Plus, m.clone());
    let (mut old_r, mut r) = (BigInt::from_biguint(Sign::Plus, a % m), modulus.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    while !r.is_zero() {
        let quotient = &old_r / &r;
        let next_r = &old_r - &quotient * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &quotient * &s;
        old_s = std::mem::replace(&mut s, next_s);
    }
    if !old_r.is_one() {
        return Err(GroupError::NotCoprime(a.clone(), m.clone()));
    }
    let inv = old_s.mod_floor(&modulus);
    Ok(inv.to_biguint().expect("mod_floor of a positive modulus is nonnegative"))
}

/// Reduces an exponent modulo the group order `q - 1`.
pub fn exponent_reduce(value: &BigUint, params: &GroupParams) -> BigUint {
    value % params.order()
}

/// Maps a hash value to an exponent that is invertible modulo `q - 1`: reduce,
/// then step forward until the result is nonzero and coprime to the order.
pub fn hash_to_exponent(hash_value: &BigUint, params: &GroupParams) -> Result<BigUint, GroupError> {
    let order = params.order();
    if order < BigUint::from(2u32) {
        return Err(GroupError::DegenerateGroup);
    }
    let mut e = hash_value % &order;
    let mut steps = BigUint::zero();
    while e.is_zero() || !e.gcd(&order).is_one() {
        e = (e + 1u32) % &order;
        steps += 1u32;
        if steps > order {
            return Err(GroupError::DegenerateGroup);
        }
    }
    Ok(e)
}

/// Checks that `q` is prime and `g` has order exactly `q - 1`.
pub fn validate_params(params: &GroupParams) -> Result<(), GroupError> {
    let q = &params.q;
    let g = &params.g;
    if q < &BigUint::from(3u32) {
        return Err(GroupError::OutOfRange("q must be at least 3".into()));
    }
    if g <= &BigUint::one() || g >= q {
        return Err(GroupError::OutOfRange("g must satisfy 1 < g < q".into()));
    }
    if !is_prime(q) {
        return Err(GroupError::NotPrime);
    }
    let order = params.order();
    if q.bits() <= FACTOR_BOUND_BITS {
        let order64 = order.to_u64().expect("q fits in 64 bits");
        let factors = num_prime::nt_funcs::factorize64(order64);
        for p in factors.keys() {
            let cofactor = BigUint::from(order64 / p);
            if square_and_multiply(g, &cofactor, q).is_one() {
                return Err(GroupError::NotGenerator);
            }
        }
        Ok(())
    } else {
        let p: BigUint = &order >> 1usize;
        if !is_prime(&p) {
            return Err(GroupError::UnverifiableOrder);
        }
        if square_and_multiply(g, &BigUint::from(2u32), q).is_one()
            || square_and_multiply(g, &p, q).is_one()
        {
            return Err(GroupError::NotGenerator);
        }
        Ok(())
    }
}

pub(crate) fn is_prime(n: &BigUint) -> bool {
    match n.to_u64() {
        Some(small) => num_prime::nt_funcs::is_prime64(small),
        None => num_prime::nt_funcs::is_prime(n, None).probably(),
    }
}

/// Deterministically generates parameters of the given size from `seed`.
///
/// Up to 64 bits the prime is arbitrary and `g` is a primitive root checked
/// against the factorisation of `q - 1`. Above that `q = 2p + 1` is a safe
/// prime.
pub fn generate_params(bit_length: u64, seed: u64) -> Result<GroupParams, GroupError> {
    if !(4..=4096).contains(&bit_length) {
        return Err(GroupError::OutOfRange(format!(
            "bit length {bit_length} not in [4, 4096]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = if bit_length <= FACTOR_BOUND_BITS {
        search_prime(&mut rng, bit_length)?
    } else {
        search_safe_prime(&mut rng, bit_length)?
    };
    let upper = &q - 1u32;
    for _ in 0..SEARCH_BUDGET {
        let g = random_in(&mut rng, &BigUint::from(2u32), &upper);
        let params = GroupParams::from_parts(q.clone(), g);
        if validate_params(&params).is_ok() {
            return Ok(params);
        }
    }
    Err(GroupError::SearchExhausted)
}

fn search_prime(rng: &mut ChaCha8Rng, bits: u64) -> Result<BigUint, GroupError> {
    for _ in 0..SEARCH_BUDGET {
        let candidate = random_odd_with_top_bit(rng, bits);
        if is_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(GroupError::SearchExhausted)
}

fn search_safe_prime(rng: &mut ChaCha8Rng, bits: u64) -> Result<BigUint, GroupError> {
    for _ in 0..SEARCH_BUDGET {
        let p = random_odd_with_top_bit(rng, bits - 1);
        // p = 2 mod 3 is required for 2p + 1 to avoid divisibility by 3
        if (&p % 3u32) != BigUint::from(2u32) {
            continue;
        }
        if is_prime(&p) {
            let q = (&p << 1usize) + 1u32;
            if is_prime(&q) {
                return Ok(q);
            }
        }
    }
    Err(GroupError::SearchExhausted)
}

fn random_odd_with_top_bit(rng: &mut ChaCha8Rng, bits: u64) -> BigUint {
    let nbytes = bits.div_ceil(8) as usize;
    let mut bytes = vec![0u8; nbytes];
    rng.fill(bytes.as_mut_slice());
    let mut n = BigUint::from_bytes_be(&bytes);
    n %= BigUint::one() << bits as usize;
    n.set_bit(bits - 1, true);
    n.set_bit(0, true);
    n
}

/// Uniform value in `[low, high)`.
pub(crate) fn random_in<R: Rng>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    assert!(low < high, "empty range");
    let span = high - low;
    let nbytes = span.bits().div_ceil(8) as usize + 8;
    let mut bytes = vec![0u8; nbytes];
    rng.fill(bytes.as_mut_slice());
    low + BigUint::from_bytes_be(&bytes) % span
}

/// Uniform ephemeral exponent in `[1, q - 2]`.
pub fn sample_nonce<R: Rng>(rng: &mut R, params: &GroupParams) -> BigUint {
    random_in(rng, &BigUint::one(), &params.order())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn p13() -> GroupParams {
        GroupParams::example()
    }

    #[test]
    fn mod_exp_examples() {
        let mut t = Tally::default();
        assert_eq!(mod_exp(&big(6), &big(3), &p13(), &mut t).unwrap(), big(8));
        assert_eq!(mod_exp(&big(7), &big(16), &p13(), &mut t).unwrap(), big(9));
        assert_eq!(mod_exp(&big(5), &big(0), &p13(), &mut t).unwrap(), big(1));
        assert_eq!(t.modexp, 3);
    }

    #[test]
    fn mod_exp_rejects_bad_base() {
        let mut t = Tally::default();
        assert_eq!(
            mod_exp(&big(0), &big(3), &p13(), &mut t),
            Err(GroupError::BaseOutOfRange)
        );
        assert_eq!(
            mod_exp(&big(13), &big(3), &p13(), &mut t),
            Err(GroupError::BaseOutOfRange)
        );
        assert_eq!(t.modexp, 0);
    }

    #[test]
    fn mod_inverse_examples() {
        assert_eq!(mod_inverse(&big(7), &big(12)).unwrap(), big(7));
        assert_eq!(mod_inverse(&big(1), &big(2)).unwrap(), big(1));
        assert_eq!(mod_inverse(&big(1), &big(97)).unwrap(), big(1));
        assert!(matches!(
            mod_inverse(&big(4), &big(12)),
            Err(GroupError::NotCoprime(..))
        ));
        assert_eq!(mod_inverse(&big(3), &big(1)), Err(GroupError::InvalidModulus));
    }

    #[test]
    fn exponent_reduce_examples() {
        assert_eq!(exponent_reduce(&big(31), &p13()), big(7));
        assert_eq!(exponent_reduce(&big(0), &p13()), big(0));
        assert_eq!(exponent_reduce(&big(11), &p13()), big(11));
    }

    #[test]
    fn hash_to_exponent_examples() {
        assert_eq!(hash_to_exponent(&big(31), &p13()).unwrap(), big(7));
        assert_eq!(hash_to_exponent(&big(12), &p13()).unwrap(), big(1));
        assert_eq!(hash_to_exponent(&big(4), &p13()).unwrap(), big(5));
        let q3 = GroupParams::from_parts(big(3), big(2));
        assert_eq!(hash_to_exponent(&big(8), &q3).unwrap(), big(1));
        let q2 = GroupParams::from_parts(big(2), big(1));
        assert_eq!(hash_to_exponent(&big(8), &q2), Err(GroupError::DegenerateGroup));
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate_params(&p13()), Ok(()));
        assert_eq!(
            validate_params(&GroupParams::from_parts(big(13), big(12))),
            Err(GroupError::NotGenerator)
        );
        assert_eq!(
            validate_params(&GroupParams::from_parts(big(12), big(6))),
            Err(GroupError::NotPrime)
        );
        assert!(matches!(
            validate_params(&GroupParams::from_parts(big(13), big(13))),
            Err(GroupError::OutOfRange(_))
        ));
        for g in [2, 6, 7, 11] {
            assert!(validate_params(&GroupParams::from_parts(big(13), big(g))).is_ok());
        }
        for g in [3, 4, 5, 8, 9, 10, 12] {
            assert_eq!(
                validate_params(&GroupParams::from_parts(big(13), big(g))),
                Err(GroupError::NotGenerator)
            );
        }
    }

    #[test]
    fn generate_small_params() {
        let a = generate_params(16, 7).unwrap();
        let b = generate_params(16, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.q().bits(), 16);
        validate_params(&a).unwrap();

        // some seed lands on q = 13, and every g it picks is a primitive root of 13
        let hit = (0..200)
            .map(|s| generate_params(4, s).unwrap())
            .find(|p| p.q() == &big(13))
            .expect("a 4-bit seed producing 13");
        assert!([2u64, 6, 7, 11].iter().any(|g| hit.g() == &big(*g)));
    }

    #[test]
    fn generate_safe_prime_params() {
        let p = generate_params(96, 1).unwrap();
        assert_eq!(p.q().bits(), 96);
        validate_params(&p).unwrap();
        let half: BigUint = (p.q() - 1u32) >> 1usize;
        assert!(is_prime(&half));
    }

    #[test]
    fn generate_rejects_tiny() {
        assert!(matches!(generate_params(3, 0), Err(GroupError::OutOfRange(_))));
    }

    #[test]
    fn params_file_roundtrip() {
        let p = p13();
        assert_eq!(p.to_file_string(), "13\n6\n");
        assert_eq!(GroupParams::parse_file("13\n6\n").unwrap(), p);
        assert!(GroupParams::parse_file("13\n").is_err());
        assert!(GroupParams::parse_file("13\n6\n7\n").is_err());
    }

    #[test]
    fn residue_encoding_is_fixed_width() {
        let p = generate_params(20, 3).unwrap();
        assert_eq!(p.q_byte_len(), 3);
        assert_eq!(p.encode_residue(&big(5)), vec![0, 0, 5]);
        assert_eq!(p13().encode_residue(&big(8)), vec![8]);
    }

    proptest! {
        #[test]
        fn modexp_matches_biguint_modpow(base in 1u64..1_000_000, e in any::<u64>()) {
            let q = big(1_000_003);
            let got = square_and_multiply(&big(base), &big(e), &q);
            prop_assert_eq!(got, big(base).modpow(&big(e), &q));
        }

        #[test]
        fn exponents_add(a in 0u64..12, b in 0u64..12) {
            let p = p13();
            let mut t = Tally::default();
            let lhs = mod_exp(p.g(), &big(a), &p, &mut t).unwrap()
                * mod_exp(p.g(), &big(b), &p, &mut t).unwrap() % p.q();
            let rhs = mod_exp(p.g(), &big((a + b) % 12), &p, &mut t).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_is_inverse(a in 1u64..10_000, m in 2u64..10_000) {
            match mod_inverse(&big(a), &big(m)) {
                Ok(u) => {
                    prop_assert!(u < big(m));
                    prop_assert_eq!(big(a) * u % big(m), big(1) % big(m));
                }
                Err(_) => prop_assert!(num_integer::gcd(a, m) != 1),
            }
        }

        #[test]
        fn hash_exponent_is_invertible(h in any::<u64>(), seed in 0u64..20) {
            let p = generate_params(12, seed).unwrap();
            let e = hash_to_exponent(&big(h), &p).unwrap();
            prop_assert!(!e.is_zero() && e < p.order());
            prop_assert!(e.gcd(&p.order()).is_one());
            prop_assert!(mod_inverse(&e, &p.order()).is_ok());
        }
    }
}
