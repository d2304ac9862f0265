//! Modular arithmetic over `u64` and a family of modular exponentiation
//! strategies: naive repeated multiplication, binary square-and-multiply in
//! both scan directions, left-to-right k-ary, sliding window, and the
//! exponent-halving loop used by the parallel kernel.
//!
//! Every result is the canonical representative in `[0, m)`. The logarithmic
//! strategies use 128-bit intermediates where the modulus needs them; the
//! halving strategy instead restricts `m < 2^31` so that its fixed-width
//! products stay inside 64 bits.

use std::fmt;
use std::str::FromStr;

pub mod oracle;

/// Default ceiling on the exponent for strategies whose cost is linear in `e`.
pub const DEFAULT_LINEAR_CAP: u64 = 1 << 20;

/// Exclusive upper bound on the modulus accepted by the halving strategy.
pub const KERNEL_MODULUS_LIMIT: u64 = 1 << 31;

/// Largest window width for k-ary and sliding-window exponentiation.
pub const MAX_WINDOW: u32 = 8;

/// Window width used when a windowed strategy is named without one.
pub const DEFAULT_WINDOW: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModError {
    #[error("zero modulus")]
    ZeroModulus,
    #[error("exponent too large for {strategy} strategy ({exponent} > cap {cap})")]
    ExponentTooLarge {
        strategy: &'static str,
        exponent: u64,
        cap: u64,
    },
    #[error("window out of range (k = {0}, expected 1..=8)")]
    WindowOutOfRange(u32),
    #[error("modulus out of kernel range ({0} >= 2^31)")]
    ModulusOutOfKernelRange(u64),
}

#[inline]
fn check_modulus(m: u64) -> Result<(), ModError> {
    if m == 0 {
        Err(ModError::ZeroModulus)
    } else {
        Ok(())
    }
}

#[inline]
fn check_window(k: u32) -> Result<(), ModError> {
    if (1..=MAX_WINDOW).contains(&k) {
        Ok(())
    } else {
        Err(ModError::WindowOutOfRange(k))
    }
}

/// `a * b mod m` for `a, b < m`.
#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= 1 << 32 {
        // a, b < 2^32 so the product fits.
        a * b % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

/// A value reduced modulo a fixed modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: u64,
}

impl Residue {
    /// Reduces `value` into `[0, modulus)`.
    pub fn new(value: u64, modulus: u64) -> Result<Self, ModError> {
        check_modulus(modulus)?;
        Ok(Self {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    fn combine(self, other: Self, op: ArithOp) -> Self {
        assert_eq!(
            self.modulus, other.modulus,
            "residues with different moduli"
        );
        let value = arith(self.value, other.value, self.modulus, op);
        Self { value, ..self }
    }

    /// Raises the residue to `e` with the given strategy.
    pub fn pow(self, e: u64, algo: &AlgorithmSelector) -> Result<Self, ModError> {
        let value = algo.apply(self.value, e, self.modulus)?;
        Ok(Self { value, ..self })
    }
}

impl std::ops::Add for Residue {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        self.combine(other, ArithOp::Add)
    }
}

impl std::ops::Sub for Residue {
    type Output = Self;

    fn sub(self, other: Self) -> Self {
        self.combine(other, ArithOp::Sub)
    }
}

impl std::ops::Mul for Residue {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        self.combine(other, ArithOp::Mul)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

fn arith(u: u64, v: u64, m: u64, op: ArithOp) -> u64 {
    let (u, v, m) = ((u % m) as u128, (v % m) as u128, m as u128);
    let r = match op {
        ArithOp::Add => (u + v) % m,
        ArithOp::Sub => (u + m - v) % m,
        ArithOp::Mul => (u * v) % m,
    };
    r as u64
}

/// `(u op v) mod m`, always in `[0, m)`. Subtraction wraps into range.
pub fn modular_arith(u: u64, v: u64, m: u64, op: ArithOp) -> Result<u64, ModError> {
    check_modulus(m)?;
    Ok(arith(u, v, m, op))
}

fn naive_inner(
    g: u64,
    e: u64,
    m: u64,
    cap: u64,
    mut trace: Option<&mut Vec<u64>>,
) -> Result<u64, ModError> {
    check_modulus(m)?;
    if e > cap {
        return Err(ModError::ExponentTooLarge {
            strategy: "naive",
            exponent: e,
            cap,
        });
    }
    if e == 0 {
        return Ok(1 % m);
    }
    let base = g % m;
    let mut c = base;
    if let Some(t) = trace.as_deref_mut() {
        t.push(c);
    }
    for _ in 1..e {
        c = mul_mod(c, base, m);
        if let Some(t) = trace.as_deref_mut() {
            t.push(c);
        }
    }
    Ok(c)
}

/// `g^e mod m` by `e - 1` successive multiplications.
pub fn modexp_naive(g: u64, e: u64, m: u64) -> Result<u64, ModError> {
    naive_inner(g, e, m, DEFAULT_LINEAR_CAP, None)
}

/// Like [`modexp_naive`], also returning the partial value after each step
/// (`g mod m`, `g^2 mod m`, ..., `g^e mod m`).
pub fn modexp_naive_trace(g: u64, e: u64, m: u64) -> Result<(u64, Vec<u64>), ModError> {
    let mut trace = Vec::with_capacity(e.min(DEFAULT_LINEAR_CAP) as usize);
    let r = naive_inner(g, e, m, DEFAULT_LINEAR_CAP, Some(&mut trace))?;
    Ok((r, trace))
}

/// Right-to-left binary square-and-multiply.
pub fn modexp_r2l(g: u64, e: u64, m: u64) -> Result<u64, ModError> {
    check_modulus(m)?;
    let mut acc = 1 % m;
    let mut square = g % m;
    let mut rest = e;
    while rest != 0 {
        if rest & 1 == 1 {
            acc = mul_mod(acc, square, m);
        }
        rest >>= 1;
        if rest != 0 {
            square = mul_mod(square, square, m);
        }
    }
    Ok(acc)
}

/// Left-to-right binary square-and-multiply.
pub fn modexp_l2r(g: u64, e: u64, m: u64) -> Result<u64, ModError> {
    check_modulus(m)?;
    let base = g % m;
    let mut acc = 1 % m;
    let bits = u64::BITS - e.leading_zeros();
    for i in (0..bits).rev() {
        acc = mul_mod(acc, acc, m);
        if (e >> i) & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
    }
    Ok(acc)
}

/// Left-to-right k-ary exponentiation with a `2^k`-entry power table.
pub fn modexp_kary(g: u64, e: u64, m: u64, k: u32) -> Result<u64, ModError> {
    check_window(k)?;
    check_modulus(m)?;
    let base = g % m;
    let size = 1usize << k;
    let mut table = Vec::with_capacity(size);
    table.push(1 % m);
    for i in 1..size {
        table.push(mul_mod(table[i - 1], base, m));
    }

    let mask = (1u64 << k) - 1;
    let bits = u64::BITS - e.leading_zeros();
    let digits = bits.div_ceil(k);
    let mut acc = 1 % m;
    for j in (0..digits).rev() {
        for _ in 0..k {
            acc = mul_mod(acc, acc, m);
        }
        let digit = (e >> (j * k)) & mask;
        acc = mul_mod(acc, table[digit as usize], m);
    }
    Ok(acc)
}

/// Sliding-window exponentiation over odd powers `g, g^3, ..., g^(2^k - 1)`.
pub fn modexp_sliding(g: u64, e: u64, m: u64, k: u32) -> Result<u64, ModError> {
    check_window(k)?;
    check_modulus(m)?;
    if e == 0 {
        return Ok(1 % m);
    }
    let base = g % m;
    let squared = mul_mod(base, base, m);
    // odd[j] = g^(2j + 1)
    let odd_count = 1usize << (k - 1);
    let mut odd = Vec::with_capacity(odd_count);
    odd.push(base);
    for j in 1..odd_count {
        odd.push(mul_mod(odd[j - 1], squared, m));
    }

    let mut acc = 1 % m;
    let bit = |i: u32| (e >> i) & 1 == 1;
    let mut i = (u64::BITS - 1 - e.leading_zeros()) as i64;
    while i >= 0 {
        let top = i as u32;
        if !bit(top) {
            acc = mul_mod(acc, acc, m);
            i -= 1;
            continue;
        }
        // Longest window e_top..e_low of width <= k whose low bit is set.
        let mut low = top.saturating_sub(k - 1);
        while !bit(low) {
            low += 1;
        }
        let width = top - low + 1;
        let window = (e >> low) & ((1u64 << width) - 1);
        for _ in 0..width {
            acc = mul_mod(acc, acc, m);
        }
        acc = mul_mod(acc, odd[(window >> 1) as usize], m);
        i = low as i64 - 1;
    }
    Ok(acc)
}

fn halving_inner(g: u64, e: u64, m: u64, faithful: bool, cap: u64) -> Result<u64, ModError> {
    check_modulus(m)?;
    if m >= KERNEL_MODULUS_LIMIT {
        return Err(ModError::ModulusOutOfKernelRange(m));
    }
    if e > cap {
        return Err(ModError::ExponentTooLarge {
            strategy: "halving",
            exponent: e,
            cap,
        });
    }
    let base = g % m;
    if e == 0 {
        return Ok(if faithful { base } else { 1 % m });
    }
    // base < 2^31, so base^2 < 2^62 and ret * a < 2^62 once a is reduced.
    let a = base * base % m;
    let mut ret = 1u64;
    for _ in 0..e / 2 {
        ret = ret * a % m;
    }
    if e & 1 == 1 {
        ret = ret * base % m;
    }
    Ok(ret)
}

/// The kernel's exponent-halving loop: multiply by `(g mod m)^2` exactly
/// `e / 2` times, then by `g mod m` once more if `e` is odd.
///
/// With `faithful` set, `e = 0` returns `g mod m` as the original device
/// function does; otherwise it returns the empty product `1 mod m`.
pub fn modexp_halving(g: u64, e: u64, m: u64, faithful: bool) -> Result<u64, ModError> {
    halving_inner(g, e, m, faithful, DEFAULT_LINEAR_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Naive,
    RightToLeft,
    LeftToRight,
    Kary,
    SlidingWindow,
    Halving,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Naive,
        Strategy::RightToLeft,
        Strategy::LeftToRight,
        Strategy::Kary,
        Strategy::SlidingWindow,
        Strategy::Halving,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Naive => "naive",
            Strategy::RightToLeft => "r2l",
            Strategy::LeftToRight => "l2r",
            Strategy::Kary => "kary",
            Strategy::SlidingWindow => "sliding",
            Strategy::Halving => "halving",
        }
    }

    pub fn is_windowed(self) -> bool {
        matches!(self, Strategy::Kary | Strategy::SlidingWindow)
    }

    /// Cost grows linearly with the exponent.
    pub fn is_linear(self) -> bool {
        matches!(self, Strategy::Naive | Strategy::Halving)
    }
}

/// Picks one exponentiation strategy together with its tuning knobs.
///
/// `window` only matters for k-ary and sliding-window, `faithful` only for
/// halving, and `linear_cap` only for the linear-time strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AlgorithmSelector {
    pub strategy: Strategy,
    pub window: u32,
    pub faithful: bool,
    pub linear_cap: u64,
}

impl AlgorithmSelector {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            window: DEFAULT_WINDOW,
            faithful: false,
            linear_cap: DEFAULT_LINEAR_CAP,
        }
    }

    pub fn naive() -> Self {
        Self::new(Strategy::Naive)
    }

    pub fn r2l() -> Self {
        Self::new(Strategy::RightToLeft)
    }

    pub fn l2r() -> Self {
        Self::new(Strategy::LeftToRight)
    }

    pub fn kary(k: u32) -> Self {
        Self::new(Strategy::Kary).with_window(k)
    }

    pub fn sliding(k: u32) -> Self {
        Self::new(Strategy::SlidingWindow).with_window(k)
    }

    pub fn halving(faithful: bool) -> Self {
        Self {
            faithful,
            ..Self::new(Strategy::Halving)
        }
    }

    pub fn with_window(mut self, k: u32) -> Self {
        self.window = k;
        self
    }

    pub fn with_faithful(mut self, faithful: bool) -> Self {
        self.faithful = faithful;
        self
    }

    pub fn with_linear_cap(mut self, cap: u64) -> Self {
        self.linear_cap = cap;
        self
    }

    /// Computes `g^e mod m` with the selected strategy.
    pub fn apply(&self, g: u64, e: u64, m: u64) -> Result<u64, ModError> {
        match self.strategy {
            Strategy::Naive => naive_inner(g, e, m, self.linear_cap, None),
            Strategy::RightToLeft => modexp_r2l(g, e, m),
            Strategy::LeftToRight => modexp_l2r(g, e, m),
            Strategy::Kary => modexp_kary(g, e, m, self.window),
            Strategy::SlidingWindow => modexp_sliding(g, e, m, self.window),
            Strategy::Halving => halving_inner(g, e, m, self.faithful, self.linear_cap),
        }
    }
}

impl Default for AlgorithmSelector {
    fn default() -> Self {
        Self::l2r()
    }
}

impl fmt::Display for AlgorithmSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.strategy.name())?;
        if self.strategy.is_windowed() {
            write!(f, ":{}", self.window)?;
        }
        if self.strategy == Strategy::Halving && self.faithful {
            f.write_str(":faithful")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error(
    "unknown algorithm `{0}` (expected naive, r2l, l2r, kary[:k], sliding[:k], halving[:faithful])"
)]
pub struct ParseAlgorithmError(pub String);

impl FromStr for AlgorithmSelector {
    type Err = ParseAlgorithmError;

    /// Accepts `naive`, `r2l`, `l2r`, `kary[:k]`, `sliding[:k]` and
    /// `halving[:faithful]`, plus a few long-form aliases.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseAlgorithmError(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let strategy = match name {
            "naive" => Strategy::Naive,
            "r2l" | "r2l-binary" | "r2l_binary" | "right-to-left" => Strategy::RightToLeft,
            "l2r" | "l2r-binary" | "l2r_binary" | "left-to-right" => Strategy::LeftToRight,
            "kary" | "k-ary" => Strategy::Kary,
            "sliding" | "sliding-window" | "sliding_window" => Strategy::SlidingWindow,
            "halving" => Strategy::Halving,
            _ => return Err(err()),
        };
        let mut sel = Self::new(strategy);
        match (strategy, arg) {
            (_, None) => {}
            (Strategy::Kary | Strategy::SlidingWindow, Some(k)) => {
                let k: u32 = k.parse().map_err(|_| err())?;
                if check_window(k).is_err() {
                    return Err(err());
                }
                sel.window = k;
            }
            (Strategy::Halving, Some("faithful")) => sel.faithful = true,
            _ => return Err(err()),
        }
        Ok(sel)
    }
}
