//! Exact arithmetic over `Z/p^n` and the value group `Z[1/p]`, together with
//! the integer coefficient functions used by the divided-power and Witt layers.
//!
//! Every scalar is a canonical representative in `[0, p^n)`. Binomial
//! coefficients come from a memoized Pascal table keyed by `(p, n)`, so no
//! factorial is ever inverted modulo `p^n`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by the scalar layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("truncation exponent must be at least 1")]
    ZeroExponent,
    #[error("modulus {p}^{n} does not fit the 62-bit residue representation")]
    ModulusTooLarge { p: u64, n: u32 },
    #[error("{0} is not a unit modulo p^n")]
    NotUnit(u64),
    #[error("value has negative p-adic valuation and is not a p-adic integer")]
    NotIntegral,
    #[error("malformed p-adic exponent literal {0:?}")]
    BadExponent(String),
    #[error("exponent arithmetic overflowed 64 bits")]
    Overflow,
}

/// Trial-division primality test; parameters in this crate are small.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// The pair `(p, n)` fixing the coefficient ring `Z/p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingParams {
    p: u64,
    n: u32,
    modulus: u64,
}

impl RingParams {
    pub fn new(p: u64, n: u32) -> Result<Self, ExactError> {
        if !is_prime(p) {
            return Err(ExactError::NotPrime(p));
        }
        if n == 0 {
            return Err(ExactError::ZeroExponent);
        }
        let mut modulus: u64 = 1;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m < (1u64 << 62))
                .ok_or(ExactError::ModulusTooLarge { p, n })?;
        }
        Ok(RingParams { p, n, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `p^n`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn reduce_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    pub fn reduce_bigint(&self, x: &BigInt) -> u64 {
        let m = BigInt::from(self.modulus);
        x.mod_floor(&m).to_u64().expect("reduced value fits in u64")
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.modulus;
        let mut acc = 1 % self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `p^e mod p^n` (zero once `e ≥ n`).
    pub fn p_pow(&self, e: u64) -> u64 {
        if e >= self.n as u64 {
            0
        } else {
            self.p.pow(e as u32)
        }
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit of `Z/p^n`.
    pub fn inv(&self, a: u64) -> Result<u64, ExactError> {
        if !self.is_unit(a) {
            return Err(ExactError::NotUnit(a));
        }
        let g = (a as i128).extended_gcd(&(self.modulus as i128));
        debug_assert_eq!(g.gcd, 1);
        Ok(self.reduce_i128(g.x))
    }

    /// p-adic valuation of a residue; zero reports `n` with the zero flag set.
    pub fn valuation(&self, a: u64) -> Valuation {
        let a = a % self.modulus;
        if a == 0 {
            return Valuation { value: self.n, is_zero: true };
        }
        Valuation { value: vp_u64(a, self.p), is_zero: false }
    }

    /// Writes a nonzero residue as `p^v · u` with `u` a unit; `None` for zero.
    pub fn split_unit(&self, a: u64) -> Option<(u32, u64)> {
        let a = a % self.modulus;
        if a == 0 {
            return None;
        }
        let v = vp_u64(a, self.p);
        Some((v, a / self.p.pow(v)))
    }
}

/// A p-adic valuation in `Z/p^n`, total on zero by reporting `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Valuation {
    pub value: u32,
    pub is_zero: bool,
}

/// Valuation of a nonzero machine integer.
pub fn vp_u64(mut x: u64, p: u64) -> u32 {
    assert!(x != 0, "valuation of zero");
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// Valuation of a nonzero signed integer.
pub fn vp_i64(x: i64, p: u64) -> u32 {
    vp_u64(x.unsigned_abs(), p)
}

/// `v_p(k!)` by Legendre's formula.
pub fn vp_factorial(k: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = k;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// `K = min { k : v_p(k!) ≥ n }`: every divided-power ideal element `z`
/// satisfies `z^K = k!·z^[K] = 0` in `Z/p^n`.
pub fn nilpotency_index(params: &RingParams) -> u64 {
    let mut k = 0;
    while vp_factorial(k, params.p) < params.n as u64 {
        k += 1;
    }
    k
}

/// An element of `Z/p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueInt {
    value: u64,
    params: RingParams,
}

impl ResidueInt {
    pub fn new(value: i64, params: RingParams) -> Self {
        ResidueInt { value: params.reduce_i64(value), params }
    }

    pub fn from_raw(value: u64, params: RingParams) -> Self {
        ResidueInt { value: value % params.modulus, params }
    }

    pub fn from_bigint(value: &BigInt, params: RingParams) -> Self {
        ResidueInt { value: params.reduce_bigint(value), params }
    }

    pub fn zero(params: RingParams) -> Self {
        ResidueInt { value: 0, params }
    }

    pub fn one(params: RingParams) -> Self {
        ResidueInt::from_raw(1, params)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn is_unit(&self) -> bool {
        self.params.is_unit(self.value)
    }

    pub fn valuation(&self) -> Valuation {
        self.params.valuation(self.value)
    }

    pub fn inverse(&self) -> Result<Self, ExactError> {
        Ok(ResidueInt { value: self.params.inv(self.value)?, params: self.params })
    }

    pub fn pow(&self, e: u64) -> Self {
        ResidueInt { value: self.params.pow(self.value, e), params: self.params }
    }

    /// The representative in `(-p^n/2, p^n/2]`, used for readable output.
    pub fn signed(&self) -> i64 {
        let m = self.params.modulus;
        if self.value > m / 2 {
            self.value as i64 - m as i64
        } else {
            self.value as i64
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.params, other.params, "residues from different rings");
    }
}

impl Add for ResidueInt {
    type Output = ResidueInt;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        ResidueInt { value: self.params.add(self.value, rhs.value), params: self.params }
    }
}

impl Sub for ResidueInt {
    type Output = ResidueInt;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        ResidueInt { value: self.params.sub(self.value, rhs.value), params: self.params }
    }
}

impl Mul for ResidueInt {
    type Output = ResidueInt;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        ResidueInt { value: self.params.mul(self.value, rhs.value), params: self.params }
    }
}

impl Neg for ResidueInt {
    type Output = ResidueInt;
    fn neg(self) -> Self {
        ResidueInt { value: self.params.neg(self.value), params: self.params }
    }
}

impl fmt::Display for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// A nonzero p-adic rational `p^val · unit` whose unit part is tracked
/// modulo `p^n`. Products and quotients of integers such as `(k−1)!/k` or
/// `p^{mk}/k` are formed here and only reduced to a residue at the end, so
/// intermediate non-integrality is harmless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValUnit {
    val: i64,
    unit: u64,
}

impl ValUnit {
    pub fn one() -> Self {
        ValUnit { val: 0, unit: 1 }
    }

    /// `None` for zero, which has no such factorization.
    pub fn from_int(x: i64, params: &RingParams) -> Option<Self> {
        if x == 0 {
            return None;
        }
        let v = vp_i64(x, params.p);
        let u = x / (params.p as i64).pow(v);
        Some(ValUnit { val: v as i64, unit: params.reduce_i64(u) })
    }

    pub fn p_power(e: i64) -> Self {
        ValUnit { val: e, unit: 1 }
    }

    pub fn val(&self) -> i64 {
        self.val
    }

    pub fn mul(&self, other: &Self, params: &RingParams) -> Self {
        ValUnit { val: self.val + other.val, unit: params.mul(self.unit, other.unit) }
    }

    pub fn div(&self, other: &Self, params: &RingParams) -> Self {
        let inv = params.inv(other.unit).expect("unit part is invertible");
        ValUnit { val: self.val - other.val, unit: params.mul(self.unit, inv) }
    }

    pub fn pow(&self, e: u64, params: &RingParams) -> Self {
        ValUnit { val: self.val * e as i64, unit: params.pow(self.unit, e) }
    }

    /// Reduction to `Z/p^n`; fails when the value is not a p-adic integer.
    pub fn to_residue(&self, params: &RingParams) -> Result<u64, ExactError> {
        if self.val < 0 {
            return Err(ExactError::NotIntegral);
        }
        Ok(params.mul(params.p_pow(self.val as u64), self.unit))
    }

    /// `k!` as a factorized p-adic integer.
    pub fn factorial(k: u64, params: &RingParams) -> Self {
        let mut acc = ValUnit::one();
        for j in 2..=k {
            acc = acc.mul(&ValUnit::from_int(j as i64, params).expect("nonzero"), params);
        }
        acc
    }
}

/// `a(a−1)···(a−k+1) mod p^n`; the empty product is 1.
pub fn falling_factorial_mod(a: i64, k: u64, params: &RingParams) -> ResidueInt {
    let mut acc = 1 % params.modulus;
    for j in 0..k {
        let factor = params.reduce_i128(a as i128 - j as i128);
        acc = params.mul(acc, factor);
        if acc == 0 {
            break;
        }
    }
    ResidueInt::from_raw(acc, *params)
}

/// `C(i+j, i) mod p^n`, the structure constant of `V^[i]·V^[j]`.
pub fn binom_times_dp(i: u64, j: u64, params: &RingParams) -> ResidueInt {
    ResidueInt::from_raw(binomial_mod(i + j, i, params), *params)
}

/// `C(nn, k) mod p^n` from the shared Pascal table.
pub fn binomial_mod(nn: u64, k: u64, params: &RingParams) -> u64 {
    if k > nn {
        return 0;
    }
    if nn as usize >= PASCAL_ROW_LIMIT {
        return binomial_by_valuation(nn, k, params);
    }
    pascal_table(params, nn as usize + 1).get(nn as usize, k as usize)
}

fn binomial_by_valuation(nn: u64, k: u64, params: &RingParams) -> u64 {
    let k = k.min(nn - k);
    let mut acc = ValUnit::one();
    for j in 0..k {
        let num = ValUnit::from_int((nn - j) as i64, params).expect("nonzero");
        let den = ValUnit::from_int((j + 1) as i64, params).expect("nonzero");
        acc = acc.mul(&num, params).div(&den, params);
    }
    acc.to_residue(params).expect("binomials are integers")
}

const PASCAL_ROW_LIMIT: usize = 2048;

/// Rows `0..len` of Pascal's triangle reduced mod `p^n`.
#[derive(Debug)]
pub struct PascalTable {
    rows: Vec<Vec<u64>>,
}

impl PascalTable {
    fn extend_to(mut rows: Vec<Vec<u64>>, len: usize, params: &RingParams) -> Self {
        if rows.is_empty() {
            rows.push(vec![1 % params.modulus]);
        }
        while rows.len() < len {
            let prev = rows.last().expect("non-empty");
            let mut row = Vec::with_capacity(prev.len() + 1);
            row.push(1 % params.modulus);
            for w in prev.windows(2) {
                row.push(params.add(w[0], w[1]));
            }
            row.push(1 % params.modulus);
            rows.push(row);
        }
        PascalTable { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    #[inline]
    pub fn get(&self, nn: usize, k: usize) -> u64 {
        if k > nn {
            0
        } else {
            self.rows[nn][k]
        }
    }
}

type PascalCache = RwLock<HashMap<(u64, u32), Arc<PascalTable>>>;

fn pascal_cache() -> &'static PascalCache {
    static CACHE: OnceLock<PascalCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// A Pascal table for `(p, n)` with at least `min_rows` rows. Tables only
/// grow; concurrent growers race benignly and the longest table is kept.
pub fn pascal_table(params: &RingParams, min_rows: usize) -> Arc<PascalTable> {
    let key = (params.p, params.n);
    {
        let guard = pascal_cache().read().expect("pascal cache poisoned");
        if let Some(t) = guard.get(&key) {
            if t.len() >= min_rows {
                return Arc::clone(t);
            }
        }
    }
    let existing = pascal_cache()
        .read()
        .expect("pascal cache poisoned")
        .get(&key)
        .map(|t| t.rows.clone())
        .unwrap_or_default();
    let target = min_rows.max(existing.len() * 2).clamp(64, PASCAL_ROW_LIMIT.max(min_rows));
    let table = Arc::new(PascalTable::extend_to(existing, target, params));
    let mut guard = pascal_cache().write().expect("pascal cache poisoned");
    let slot = guard.entry(key).or_insert_with(|| Arc::clone(&table));
    if slot.len() < table.len() {
        *slot = Arc::clone(&table);
    }
    Arc::clone(slot)
}

/// An element `numerator / p^level` of `Z[1/p]`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PadicExponent {
    numerator: i64,
    level: u32,
    p: u64,
}

impl PadicExponent {
    pub fn new(numerator: i64, level: u32, p: u64) -> Self {
        let mut e = PadicExponent { numerator, level, p };
        e.normalize();
        e
    }

    pub fn integer(k: i64, p: u64) -> Self {
        PadicExponent { numerator: k, level: 0, p }
    }

    pub fn zero(p: u64) -> Self {
        PadicExponent::integer(0, p)
    }

    fn normalize(&mut self) {
        if self.numerator == 0 {
            self.level = 0;
            return;
        }
        while self.level > 0 && self.numerator % self.p as i64 == 0 {
            self.numerator /= self.p as i64;
            self.level -= 1;
        }
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.numerator == 0
    }

    pub fn is_integer(&self) -> bool {
        self.level == 0
    }

    /// `v_p(numerator) − level`; `None` for zero.
    pub fn vp(&self) -> Option<i64> {
        if self.numerator == 0 {
            None
        } else {
            Some(vp_i64(self.numerator, self.p) as i64 - self.level as i64)
        }
    }

    /// The integer `self · p^m`, if `level ≤ m`.
    pub fn scaled_numerator(&self, m: u32) -> Option<i64> {
        if self.level > m {
            return None;
        }
        (self.p as i64)
            .checked_pow(m - self.level)
            .and_then(|s| s.checked_mul(self.numerator))
    }

    pub fn as_integer(&self) -> Option<i64> {
        if self.level == 0 {
            Some(self.numerator)
        } else {
            None
        }
    }

    fn common(&self, other: &Self) -> (i128, i128, u32) {
        assert_eq!(self.p, other.p, "exponents over different primes");
        let level = self.level.max(other.level);
        let a = self.numerator as i128 * (self.p as i128).pow(level - self.level);
        let b = other.numerator as i128 * (self.p as i128).pow(level - other.level);
        (a, b, level)
    }

    fn from_wide(num: i128, level: u32, p: u64) -> Result<Self, ExactError> {
        let mut num = num;
        let mut level = level;
        while level > 0 && num % p as i128 == 0 {
            num /= p as i128;
            level -= 1;
        }
        let numerator = i64::try_from(num).map_err(|_| ExactError::Overflow)?;
        Ok(PadicExponent::new(numerator, level, p))
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ExactError> {
        let (a, b, level) = self.common(other);
        PadicExponent::from_wide(a + b, level, self.p)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ExactError> {
        let (a, b, level) = self.common(other);
        PadicExponent::from_wide(a - b, level, self.p)
    }

    pub fn checked_mul_int(&self, k: i64) -> Result<Self, ExactError> {
        PadicExponent::from_wide(self.numerator as i128 * k as i128, self.level, self.p)
    }

    /// Multiplication by `p`: the Frobenius of the value group.
    pub fn mul_p(&self) -> Result<Self, ExactError> {
        self.checked_mul_int(self.p as i64)
    }

    /// Division by `p`, raising the level by one.
    pub fn div_p(&self) -> Self {
        if self.numerator == 0 {
            return *self;
        }
        PadicExponent::new(self.numerator, self.level + 1, self.p)
    }

    pub fn neg(&self) -> Self {
        PadicExponent { numerator: -self.numerator, level: self.level, p: self.p }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn signum(&self) -> i64 {
        self.numerator.signum()
    }

    /// `|self| ≤ bound` for an integer bound.
    pub fn abs_at_most(&self, bound: u64) -> bool {
        let lhs = (self.numerator as i128).abs();
        let rhs = bound as i128 * (self.p as i128).pow(self.level);
        lhs <= rhs
    }

    /// Parses `"a"` or `"a/b"` with `b` a power of `p`.
    pub fn parse(text: &str, p: u64) -> Result<Self, ExactError> {
        let bad = || ExactError::BadExponent(text.to_string());
        let (num, den) = match text.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (text.trim(), "1"),
        };
        let num: i64 = num.parse().map_err(|_| bad())?;
        let mut den: u64 = den.parse().map_err(|_| bad())?;
        let mut level = 0;
        while den > 1 {
            if !den.is_multiple_of(p) {
                return Err(bad());
            }
            den /= p;
            level += 1;
        }
        if den != 1 {
            return Err(bad());
        }
        Ok(PadicExponent::new(num, level, p))
    }
}

impl PartialOrd for PadicExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PadicExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = self.common(other);
        a.cmp(&b)
    }
}

impl fmt::Display for PadicExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, self.p.pow(self.level))
        }
    }
}

/// The p-adic valuation of a big integer; `None` for zero.
pub fn bigint_vp(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    while (&y % &pb).is_zero() {
        y /= &pb;
        v += 1;
    }
    Some(v)
}
