//! Arbitrary-precision reference for modular exponentiation.
//!
//! Shares no code with the strategies in the parent module; tests compare
//! every strategy against it.

use num_bigint::BigUint;

use super::ModError;

pub fn oracle_modexp(g: u64, e: u64, m: u64) -> Result<u64, ModError> {
    if m == 0 {
        return Err(ModError::ZeroModulus);
    }
    let r = BigUint::from(g).modpow(&BigUint::from(e), &BigUint::from(m));
    Ok(r.iter_u64_digits().next().unwrap_or(0))
}
