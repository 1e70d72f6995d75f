//! Desk-scale analysis oracles: a full discrete-log table and the pairing
//! built from it.
//!
//! `Z_q^*` has no efficient bilinear map, so the pairing here is
//! `e(X, Y) = dlog(X) * dlog(Y) mod (q - 1)`, which is bilinear by
//! construction and only computable because the group is tiny.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::group::GroupParams;

/// Largest `q` for which a table is built.
pub const DESK_SCALE_BOUND: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("group too large for the discrete-log oracle (q > {DESK_SCALE_BOUND})")]
    GroupTooLarge,
    #[error("{0} is not an element of Z_q^*")]
    NotInGroup(BigUint),
    #[error("g does not generate Z_q^*")]
    NotGenerator,
}

/// Every element of `Z_q^*` mapped to its exponent base `g`.
#[derive(Debug, Clone)]
pub struct DlogTable {
    params: GroupParams,
    // index = element, value = exponent; slot 0 unused
    table: Vec<u32>,
}

const EMPTY: u32 = u32::MAX;

impl DlogTable {
    pub fn is_desk_scale(params: &GroupParams) -> bool {
        params
            .q()
            .to_u64()
            .is_some_and(|q| q <= DESK_SCALE_BOUND)
    }

    pub fn new(params: &GroupParams) -> Result<Self, OracleError> {
        if !Self::is_desk_scale(params) {
            return Err(OracleError::GroupTooLarge);
        }
        let q = params.q().to_u64().expect("desk scale");
        let g = params.g().to_u64().ok_or(OracleError::NotGenerator)?;
        if g == 0 || g >= q {
            return Err(OracleError::NotGenerator);
        }
        let mut table = vec![EMPTY; q as usize];
        let mut cur = 1u64;
        for k in 0..(q - 1) {
            if table[cur as usize] != EMPTY {
                return Err(OracleError::NotGenerator);
            }
            table[cur as usize] = k as u32;
            cur = cur * g % q;
        }
        Ok(DlogTable {
            params: params.clone(),
            table,
        })
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    /// The exponent `k` in `[0, q - 2]` with `g^k = element`.
    pub fn dlog(&self, element: &BigUint) -> Result<u64, OracleError> {
        element
            .to_usize()
            .and_then(|i| self.table.get(i))
            .filter(|&&k| k != EMPTY)
            .map(|&k| u64::from(k))
            .ok_or_else(|| OracleError::NotInGroup(element.clone()))
    }

    pub fn pairing(&self, x: &BigUint, y: &BigUint) -> Result<u64, OracleError> {
        let order = self.table.len() as u128 - 1;
        let a = u128::from(self.dlog(x)?);
        let b = u128::from(self.dlog(y)?);
        Ok((a * b % order) as u64)
    }
}

pub fn brute_force_dlog(element: &BigUint, params: &GroupParams) -> Result<u64, OracleError> {
    DlogTable::new(params)?.dlog(element)
}

pub fn toy_pairing(x: &BigUint, y: &BigUint, params: &GroupParams) -> Result<u64, OracleError> {
    DlogTable::new(params)?.pairing(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::generate_params;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn dlog_examples() {
        let p = GroupParams::example();
        assert_eq!(brute_force_dlog(&big(8), &p), Ok(3));
        assert_eq!(brute_force_dlog(&big(1), &p), Ok(0));
        assert_eq!(brute_force_dlog(&big(7), &p), Ok(7));
        assert_eq!(
            brute_force_dlog(&big(0), &p),
            Err(OracleError::NotInGroup(big(0)))
        );
        assert_eq!(
            brute_force_dlog(&big(13), &p),
            Err(OracleError::NotInGroup(big(13)))
        );
    }

    #[test]
    fn pairing_examples() {
        let p = GroupParams::example();
        assert_eq!(toy_pairing(&big(9), &big(8), &p), Ok(0));
        assert_eq!(toy_pairing(&big(6), &big(6), &p), Ok(1));
        assert_eq!(toy_pairing(&big(1), &big(5), &p), Ok(0));
        assert_eq!(toy_pairing(&big(8), &big(8), &p), Ok(9));
    }

    #[test]
    fn refuses_large_or_bad_groups() {
        let big_params = generate_params(24, 1).unwrap();
        assert_eq!(
            DlogTable::new(&big_params).unwrap_err(),
            OracleError::GroupTooLarge
        );
        let bad = GroupParams::from_parts(big(13), big(12));
        assert_eq!(DlogTable::new(&bad).unwrap_err(), OracleError::NotGenerator);
    }

    proptest! {
        #[test]
        fn dlog_inverts_powers(seed in 0u64..8, k in any::<u64>()) {
            let p = generate_params(14, seed).unwrap();
            let table = DlogTable::new(&p).unwrap();
            let order = p.q().to_u64().unwrap() - 1;
            let elem = p.g().modpow(&big(k), p.q());
            prop_assert_eq!(table.dlog(&elem).unwrap(), k % order);
        }

        #[test]
        fn pairing_is_bilinear(x in 1u64..13, y in 1u64..13, a in 0u64..100) {
            let p = GroupParams::example();
            let table = DlogTable::new(&p).unwrap();
            let xa = big(x).modpow(&big(a), p.q());
            let lhs = table.pairing(&xa, &big(y)).unwrap();
            let rhs = a * table.pairing(&big(x), &big(y)).unwrap() % 12;
            prop_assert_eq!(lhs, rhs);
        }
    }
}
