//! Textbook RSA over 64-bit moduli: key generation, key validation and block
//! encryption/decryption.
//!
//! INSECURE: no padding and no randomness. This exists to study the
//! arithmetic, never to protect data.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::modmath::{mul_mod, AlgorithmSelector, ModError};

/// Exclusive bound on the primes accepted by [`keygen`].
pub const PRIME_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RsaError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("primes must differ")]
    PrimesMustDiffer,
    #[error("prime {0} out of range (must be < 65536)")]
    PrimeOutOfRange(u64),
    #[error("exponent not coprime with totient (gcd({e}, {phi}) = {gcd})")]
    ExponentNotCoprime { e: u64, phi: u64, gcd: u64 },
    #[error("exponent {e} out of range (need 1 < e < {phi})")]
    ExponentOutOfRange { e: u64, phi: u64 },
    #[error("block exceeds modulus ({block} >= {n})")]
    BlockExceedsModulus { block: u64, n: u64 },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("malformed key file: {0}")]
    KeyFormat(String),
    #[error(transparent)]
    Mod(#[from] ModError),
}

/// Deterministic primality test for every `u64`.
///
/// Trial division below 2^16, Miller-Rabin with the first twelve prime bases
/// above (exact for all 64-bit inputs).
pub fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    if x < PRIME_LIMIT {
        return (2..)
            .take_while(|d| d * d <= x)
            .all(|d| !x.is_multiple_of(d));
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if BASES.iter().any(|&p| x.is_multiple_of(p)) {
        return false;
    }
    let s = (x - 1).trailing_zeros();
    let d = (x - 1) >> s;
    'witness: for &a in &BASES {
        let mut y = pow_mod(a, d, x);
        if y == 1 || y == x - 1 {
            continue;
        }
        for _ in 1..s {
            y = mul_mod(y, y, x);
            if y == x - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
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

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m` by the extended Euclidean algorithm.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicKey {
    pub n: u64,
    pub e: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivateKey {
    pub n: u64,
    pub d: u64,
}

impl PublicKey {
    pub fn new(n: u64, e: u64) -> Result<Self, RsaError> {
        if n < 2 || e <= 1 {
            return Err(RsaError::InvalidKey(format!(
                "public key needs n >= 2 and e > 1 (n={n}, e={e})"
            )));
        }
        Ok(Self { n, e })
    }
}

impl PrivateKey {
    pub fn new(n: u64, d: u64) -> Result<Self, RsaError> {
        if n < 2 || d == 0 {
            return Err(RsaError::InvalidKey(format!(
                "private key needs n >= 2 and d > 0 (n={n}, d={d})"
            )));
        }
        Ok(Self { n, d })
    }
}

/// Full key material: both primes, modulus, totient and both exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPair {
    pub p: u64,
    pub q: u64,
    pub n: u64,
    pub phi: u64,
    pub e: u64,
    pub d: u64,
}

impl KeyPair {
    pub fn public(&self) -> PublicKey {
        PublicKey {
            n: self.n,
            e: self.e,
        }
    }

    pub fn private(&self) -> PrivateKey {
        PrivateKey {
            n: self.n,
            d: self.d,
        }
    }
}

/// Builds a key pair from two primes below 2^16.
///
/// Without an explicit `e`, picks the smallest `e >= 3` coprime with the
/// totient. `d` is the inverse of `e` modulo the totient.
pub fn keygen(p: u64, q: u64, e: Option<u64>) -> Result<KeyPair, RsaError> {
    for x in [p, q] {
        if !is_prime(x) {
            return Err(RsaError::NotPrime(x));
        }
        if x >= PRIME_LIMIT {
            return Err(RsaError::PrimeOutOfRange(x));
        }
    }
    if p == q {
        return Err(RsaError::PrimesMustDiffer);
    }
    let n = p * q;
    let phi = (p - 1) * (q - 1);
    let e = match e {
        Some(e) => e,
        None => (3..phi)
            .find(|&c| gcd(c, phi) == 1)
            .ok_or(RsaError::ExponentOutOfRange { e: 3, phi })?,
    };
    if e <= 1 || e >= phi {
        return Err(RsaError::ExponentOutOfRange { e, phi });
    }
    let d = mod_inverse(e, phi).ok_or(RsaError::ExponentNotCoprime {
        e,
        phi,
        gcd: gcd(e, phi),
    })?;
    Ok(KeyPair { p, q, n, phi, e, d })
}

pub mod check {
    pub const FACTORIZATION: &str = "factorization";
    pub const P_PRIME: &str = "p-prime";
    pub const Q_PRIME: &str = "q-prime";
    pub const DISTINCT_PRIMES: &str = "distinct-primes";
    pub const MODULUS: &str = "modulus";
    pub const EXPONENT_RANGE: &str = "exponent-range";
    pub const EXPONENT_COPRIME: &str = "exponent-coprime";
    pub const PRIVATE_RANGE: &str = "private-range";
    pub const INVERSE: &str = "inverse";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl ValidationReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        let overall = checks.iter().all(|c| c.passed);
        Self { checks, overall }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let mark = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "{mark:4} {:17} {}", c.name, c.detail)?;
        }
        write!(f, "overall: {}", if self.overall { "pass" } else { "FAIL" })
    }
}

/// Smallest-factor split of `n` by trial division, when `n = p * q`.
fn split_semiprime(n: u64) -> Option<(u64, u64)> {
    if n < 4 {
        return None;
    }
    let p = (2..)
        .take_while(|d: &u64| d.saturating_mul(*d) <= n)
        .find(|d| n.is_multiple_of(*d))?;
    Some((p, n / p))
}

/// Judges a claimed key without trusting it. Every failed property becomes a
/// failed check in the report; nothing here returns an error.
///
/// When `p` and `q` are not given, `n` is factored by trial division, which
/// is only attempted for `n < 2^32`.
pub fn validate_keypair(
    n: u64,
    e: u64,
    d: u64,
    p: Option<u64>,
    q: Option<u64>,
) -> ValidationReport {
    let pass = |name, detail: String| Check {
        name,
        passed: true,
        detail,
    };
    let fail = |name, detail: String| Check {
        name,
        passed: false,
        detail,
    };
    let mut checks = Vec::new();

    let factors = match (p, q) {
        (Some(p), Some(q)) => Some((p, q)),
        (None, None) if n >= 1 << 32 => {
            checks.push(fail(
                check::FACTORIZATION,
                format!("n = {n} exceeds trial-division range"),
            ));
            None
        }
        (None, None) => match split_semiprime(n) {
            Some((p, q)) => {
                checks.push(pass(check::FACTORIZATION, format!("n = {p} * {q}")));
                Some((p, q))
            }
            None => {
                checks.push(fail(
                    check::FACTORIZATION,
                    format!("n = {n} has no nontrivial factor"),
                ));
                None
            }
        },
        _ => {
            checks.push(fail(
                check::FACTORIZATION,
                "supply both p and q or neither".into(),
            ));
            None
        }
    };

    let Some((p, q)) = factors else {
        for name in [
            check::EXPONENT_RANGE,
            check::EXPONENT_COPRIME,
            check::PRIVATE_RANGE,
            check::INVERSE,
        ] {
            checks.push(fail(name, "totient unavailable".into()));
        }
        return ValidationReport::from_checks(checks);
    };

    for (name, x) in [(check::P_PRIME, p), (check::Q_PRIME, q)] {
        let c = if is_prime(x) { pass } else { fail };
        checks.push(c(name, format!("{x}")));
    }
    checks.push(if p != q {
        pass(check::DISTINCT_PRIMES, format!("{p} != {q}"))
    } else {
        fail(check::DISTINCT_PRIMES, format!("p = q = {p}"))
    });
    let product = p.checked_mul(q);
    checks.push(if product == Some(n) {
        pass(check::MODULUS, format!("{p} * {q} = {n}"))
    } else {
        fail(check::MODULUS, format!("{p} * {q} != {n}"))
    });

    let phi = (p.max(1) - 1) as u128 * (q.max(1) - 1) as u128;
    let phi = u64::try_from(phi).unwrap_or(u64::MAX);
    checks.push(if 1 < e && e < phi {
        pass(check::EXPONENT_RANGE, format!("1 < {e} < {phi}"))
    } else {
        fail(check::EXPONENT_RANGE, format!("{e} not in (1, {phi})"))
    });
    let g = gcd(e, phi);
    checks.push(if g == 1 {
        pass(check::EXPONENT_COPRIME, format!("gcd({e}, {phi}) = 1"))
    } else {
        fail(
            check::EXPONENT_COPRIME,
            format!("exponent not coprime: gcd({e}, {phi}) = {g}"),
        )
    });
    checks.push(if 0 < d && d < phi {
        pass(check::PRIVATE_RANGE, format!("0 < {d} < {phi}"))
    } else {
        fail(check::PRIVATE_RANGE, format!("{d} not in (0, {phi})"))
    });
    let residue = if phi == 0 {
        0
    } else {
        (d as u128 * e as u128 % phi as u128) as u64
    };
    checks.push(if phi > 1 && residue == 1 {
        pass(check::INVERSE, format!("{d} * {e} mod {phi} = 1"))
    } else {
        fail(
            check::INVERSE,
            format!("{d} * {e} mod {phi} = {residue} != 1"),
        )
    });

    ValidationReport::from_checks(checks)
}

pub fn encrypt_block(m: u64, key: &PublicKey, algo: &AlgorithmSelector) -> Result<u64, RsaError> {
    if m >= key.n {
        return Err(RsaError::BlockExceedsModulus { block: m, n: key.n });
    }
    Ok(algo.apply(m, key.e, key.n)?)
}

pub fn decrypt_block(c: u64, key: &PrivateKey, algo: &AlgorithmSelector) -> Result<u64, RsaError> {
    if c >= key.n {
        return Err(RsaError::BlockExceedsModulus { block: c, n: key.n });
    }
    Ok(algo.apply(c, key.d, key.n)?)
}

const PUBLIC_TAG: &str = "rsa-toy-public";
const PRIVATE_TAG: &str = "rsa-toy-private";

fn render_key(tag: &str, n: u64, x: u64) -> String {
    format!("{tag}\n{n} {x}\n")
}

fn parse_key(text: &str, tag: &str) -> Result<(u64, u64), RsaError> {
    let mut lines = text.lines();
    let head = lines.next().map(str::trim);
    if head != Some(tag) {
        return Err(RsaError::KeyFormat(format!("expected `{tag}` on line 1")));
    }
    let body = lines
        .next()
        .ok_or_else(|| RsaError::KeyFormat("missing line 2".into()))?;
    let fields: Vec<&str> = body.split_whitespace().collect();
    let [n, x] = fields.as_slice() else {
        return Err(RsaError::KeyFormat(
            "line 2 must be `<n> <exponent>`".into(),
        ));
    };
    let num = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| RsaError::KeyFormat(format!("not a decimal number: `{s}`")))
    };
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(RsaError::KeyFormat("trailing content after line 2".into()));
    }
    Ok((num(n)?, num(x)?))
}

impl PublicKey {
    /// Two-line text form: `rsa-toy-public` then `<n> <e>`.
    pub fn to_key_file(&self) -> String {
        render_key(PUBLIC_TAG, self.n, self.e)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_key_file())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RsaError> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| RsaError::KeyFormat(format!("{}: {e}", path.as_ref().display())))?;
        text.parse()
    }
}

impl FromStr for PublicKey {
    type Err = RsaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, e) = parse_key(s, PUBLIC_TAG)?;
        Self::new(n, e)
    }
}

impl PrivateKey {
    /// Two-line text form: `rsa-toy-private` then `<n> <d>`.
    pub fn to_key_file(&self) -> String {
        render_key(PRIVATE_TAG, self.n, self.d)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_key_file())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RsaError> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| RsaError::KeyFormat(format!("{}: {e}", path.as_ref().display())))?;
        text.parse()
    }
}

impl FromStr for PrivateKey {
    type Err = RsaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (n, d) = parse_key(s, PRIVATE_TAG)?;
        Self::new(n, d)
    }
}
