//! p-typical Witt vectors of finite length over a pluggable coefficient ring.
//!
//! Addition, multiplication, negation and the Witt-polynomial Frobenius are
//! evaluated through universal integral structure polynomials. They are
//! obtained once per `(p, length)` by solving the ghost equations over `Z`
//! and then specialized to any coefficient ring, so they remain valid over
//! rings such as `F_p[s]/(s^k)` where ghost components lose information.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::exactnum::is_prime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WittError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("Witt vectors need length at least 1")]
    ZeroLength,
    #[error("expected a length-{expected} Witt vector, got length {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("coefficient ring has characteristic {found}, not {p}")]
    CharacteristicMismatch { p: u64, found: u64 },
    #[error("componentwise Frobenius needs a coefficient ring of characteristic p")]
    NotCharP,
    #[error("operation needs a finite coefficient field")]
    NotFinite,
    #[error("Frobenius lowers length, and a length-1 vector has no image")]
    TooShort,
}

/// A commutative ring with exact equality, usable as Witt coefficients.
pub trait CoeffRing: Clone + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// The image of an integer under `Z → R`.
    fn embed_bigint(&self, x: &BigInt) -> Self::Elem;
    /// `Some(p)` when the ring has prime characteristic `p`.
    fn char_p(&self) -> Option<u64>;
    /// Every element, for finite carriers.
    fn elements(&self) -> Option<Vec<Self::Elem>>;
    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> Self::Elem;
    fn name(&self) -> String;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}

/// `Z/m` for any modulus `m ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZmodRing {
    modulus: u64,
}

impl ZmodRing {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        ZmodRing { modulus }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
}

impl CoeffRing for ZmodRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.modulus as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a % self.modulus) % self.modulus
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.modulus as u128) as u64
    }
    fn embed_bigint(&self, x: &BigInt) -> u64 {
        x.mod_floor(&BigInt::from(self.modulus)).to_u64().expect("reduced residue fits")
    }
    fn char_p(&self) -> Option<u64> {
        is_prime(self.modulus).then_some(self.modulus)
    }
    fn elements(&self) -> Option<Vec<u64>> {
        Some((0..self.modulus).collect())
    }
    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> u64 {
        rng.gen_range(0..self.modulus)
    }
    fn name(&self) -> String {
        format!("Z/{}", self.modulus)
    }
}

/// The integers, as the universal coefficient ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntegerRing;

impl CoeffRing for IntegerRing {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn embed_bigint(&self, x: &BigInt) -> BigInt {
        x.clone()
    }
    fn char_p(&self) -> Option<u64> {
        None
    }
    fn elements(&self) -> Option<Vec<BigInt>> {
        None
    }
    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> BigInt {
        BigInt::from(rng.gen_range(-20i64..=20))
    }
    fn name(&self) -> String {
        "Z".into()
    }
}

/// `R[s]/(f)` for a monic `f = s^k + c_{k−1}s^{k−1} + … + c_0`; elements are
/// coefficient vectors of length `k`, lowest degree first.
#[derive(Debug, Clone)]
pub struct PolyQuotient<R: CoeffRing> {
    base: R,
    tail: Vec<R::Elem>,
    label: String,
}

impl<R: CoeffRing> PolyQuotient<R> {
    /// `R[s]/(s^k + Σ tail_i s^i)`.
    pub fn new(base: R, tail: Vec<R::Elem>, label: &str) -> Self {
        assert!(!tail.is_empty(), "modulus must have positive degree");
        PolyQuotient { base, tail, label: label.to_string() }
    }

    /// `R[s]/(s^k)`.
    pub fn truncated(base: R, k: usize) -> Self {
        let tail = vec![base.zero(); k];
        let label = format!("{}[s]/(s^{k})", base.name());
        PolyQuotient { base, tail, label }
    }

    pub fn degree(&self) -> usize {
        self.tail.len()
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    /// The class of `s`.
    pub fn generator(&self) -> Vec<R::Elem> {
        let mut e = vec![self.base.zero(); self.degree()];
        if self.degree() > 1 {
            e[1] = self.base.one();
        } else {
            e[0] = self.base.neg(&self.tail[0]);
        }
        e
    }

    fn reduce(&self, mut v: Vec<R::Elem>) -> Vec<R::Elem> {
        let k = self.degree();
        while v.len() > k {
            let a = v.pop().expect("non-empty");
            let shift = v.len() - k;
            for (i, c) in self.tail.iter().enumerate() {
                let t = self.base.mul(&a, c);
                v[shift + i] = self.base.sub(&v[shift + i], &t);
            }
        }
        v
    }
}

impl PolyQuotient<ZmodRing> {
    /// `F_4 = F_2[s]/(s² + s + 1)`.
    pub fn gf4() -> Self {
        PolyQuotient::new(ZmodRing::new(2), vec![1, 1], "F_4")
    }

    /// `F_9 = F_3[s]/(s² + 1)`.
    pub fn gf9() -> Self {
        PolyQuotient::new(ZmodRing::new(3), vec![1, 0], "F_9")
    }
}

impl<R: CoeffRing> CoeffRing for PolyQuotient<R> {
    type Elem = Vec<R::Elem>;

    fn zero(&self) -> Self::Elem {
        vec![self.base.zero(); self.degree()]
    }
    fn one(&self) -> Self::Elem {
        let mut e = self.zero();
        e[0] = self.base.one();
        e
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| self.base.add(x, y)).collect()
    }
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.iter().map(|x| self.base.neg(x)).collect()
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let k = self.degree();
        let mut out = vec![self.base.zero(); 2 * k - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let t = self.base.mul(x, y);
                out[i + j] = self.base.add(&out[i + j], &t);
            }
        }
        self.reduce(out)
    }
    fn embed_bigint(&self, x: &BigInt) -> Self::Elem {
        let mut e = self.zero();
        e[0] = self.base.embed_bigint(x);
        e
    }
    fn char_p(&self) -> Option<u64> {
        self.base.char_p()
    }
    fn elements(&self) -> Option<Vec<Self::Elem>> {
        let base = self.base.elements()?;
        let mut out: Vec<Self::Elem> = vec![Vec::new()];
        for _ in 0..self.degree() {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    base.iter().map(move |b| {
                        let mut v = prefix.clone();
                        v.push(b.clone());
                        v
                    })
                })
                .collect();
        }
        Some(out)
    }
    fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> Self::Elem {
        (0..self.degree()).map(|_| self.base.random(rng)).collect()
    }
    fn name(&self) -> String {
        self.label.clone()
    }
}

/// A polynomial with integer coefficients; exponent vectors index variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl ZPoly {
    pub fn zero(nvars: usize) -> Self {
        ZPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigInt) -> Self {
        let mut p = ZPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = ZPoly::zero(nvars);
        p.terms.insert(e, BigInt::one());
        p
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ZPoly) -> ZPoly {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, c: &BigInt) -> ZPoly {
        let mut out = ZPoly::zero(self.nvars);
        if c.is_zero() {
            return out;
        }
        for (e, a) in &self.terms {
            out.terms.insert(e.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        let mut out = ZPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> ZPoly {
        let mut base = self.clone();
        let mut acc = ZPoly::constant(self.nvars, BigInt::one());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Coefficientwise exact division; panics if some coefficient is not a
    /// multiple of `d`.
    pub fn div_exact(&self, d: &BigInt) -> ZPoly {
        let mut out = ZPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            let (q, r) = c.div_rem(d);
            assert!(r.is_zero(), "Witt integrality failed: {c} is not divisible by {d}");
            out.terms.insert(e.clone(), q);
        }
        out
    }

    /// Evaluation at `vals` in `ring`.
    pub fn eval<R: CoeffRing>(&self, ring: &R, vals: &[R::Elem]) -> R::Elem {
        assert_eq!(vals.len(), self.nvars, "wrong number of evaluation points");
        let mut max_exp = vec![0u32; self.nvars];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<R::Elem>> = vals
            .iter()
            .zip(&max_exp)
            .map(|(v, &top)| {
                let mut row = Vec::with_capacity(top as usize + 1);
                row.push(ring.one());
                for k in 1..=top as usize {
                    let next = ring.mul(&row[k - 1], v);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = ring.zero();
        for (e, c) in &self.terms {
            let mut t = ring.embed_bigint(c);
            for (row, &k) in powers.iter().zip(e) {
                if k > 0 {
                    t = ring.mul(&t, &row[k as usize]);
                }
            }
            acc = ring.add(&acc, &t);
        }
        acc
    }
}

/// The universal structure polynomials for length `len`.
#[derive(Debug)]
pub struct WittPolys {
    pub p: u64,
    pub len: usize,
    /// `S_i(x_0..x_{len−1}, y_0..y_{len−1})`.
    pub sum: Vec<ZPoly>,
    /// `P_i(x, y)`.
    pub prod: Vec<ZPoly>,
    /// `N_i(x)`.
    pub neg: Vec<ZPoly>,
    /// `F_i(x_0..x_{len−1})` for `i < len − 1`.
    pub frob: Vec<ZPoly>,
}

/// `w_i = Σ_{j≤i} p^j x_{offset+j}^{p^{i−j}}`.
fn ghost_poly(p: u64, i: usize, nvars: usize, offset: usize) -> ZPoly {
    let mut out = ZPoly::zero(nvars);
    for j in 0..=i {
        let term = ZPoly::var(nvars, offset + j).pow(p.pow((i - j) as u32));
        out = out.add(&term.scale(&BigInt::from(p).pow(j as u32)));
    }
    out
}

fn solve_ghost(p: u64, count: usize, target: impl Fn(usize) -> ZPoly) -> Vec<ZPoly> {
    let mut solved: Vec<ZPoly> = Vec::with_capacity(count);
    let pb = BigInt::from(p);
    for i in 0..count {
        let mut rhs = target(i);
        for (j, sj) in solved.iter().enumerate() {
            let t = sj.pow(p.pow((i - j) as u32)).scale(&pb.pow(j as u32));
            rhs = rhs.sub(&t);
        }
        solved.push(rhs.div_exact(&pb.pow(i as u32)));
    }
    solved
}

impl WittPolys {
    fn compute(p: u64, len: usize) -> WittPolys {
        let nv2 = 2 * len;
        let sum = solve_ghost(p, len, |i| ghost_poly(p, i, nv2, 0).add(&ghost_poly(p, i, nv2, len)));
        let prod = solve_ghost(p, len, |i| ghost_poly(p, i, nv2, 0).mul(&ghost_poly(p, i, nv2, len)));
        let neg = solve_ghost(p, len, |i| ghost_poly(p, i, len, 0).scale(&BigInt::from(-1)));
        let frob = solve_ghost(p, len.saturating_sub(1), |i| ghost_poly(p, i + 1, len, 0));
        WittPolys { p, len, sum, prod, neg, frob }
    }
}

type PolyCache = RwLock<HashMap<(u64, usize), Arc<WittPolys>>>;

fn poly_cache() -> &'static PolyCache {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Structure polynomials for `(p, len)`, computed at most once per key that
/// is kept: concurrent initializers race and the first insert wins.
pub fn witt_polys(p: u64, len: usize) -> Arc<WittPolys> {
    if let Some(found) = poly_cache().read().expect("witt cache poisoned").get(&(p, len)) {
        return Arc::clone(found);
    }
    let fresh = Arc::new(WittPolys::compute(p, len));
    let mut guard = poly_cache().write().expect("witt cache poisoned");
    Arc::clone(guard.entry((p, len)).or_insert(fresh))
}

/// A Witt vector `(x_0, …, x_{n−1})`; its length is checked by the ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WittVec<E> {
    comps: Vec<E>,
}

impl<E> WittVec<E> {
    pub fn components(&self) -> &[E] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<E> {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }
}

/// `W_n(R)` for a fixed prime `p` and length `n`.
#[derive(Debug, Clone)]
pub struct WittRing<R: CoeffRing> {
    base: R,
    p: u64,
    len: usize,
    polys: Arc<WittPolys>,
}

impl<R: CoeffRing> WittRing<R> {
    pub fn new(base: R, p: u64, len: usize) -> Result<Self, WittError> {
        if !is_prime(p) {
            return Err(WittError::NotPrime(p));
        }
        if len == 0 {
            return Err(WittError::ZeroLength);
        }
        if let Some(q) = base.char_p() {
            if q != p {
                return Err(WittError::CharacteristicMismatch { p, found: q });
            }
        }
        Ok(WittRing { polys: witt_polys(p, len), base, p, len })
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The same coefficient ring at another length.
    pub fn with_len(&self, len: usize) -> Result<Self, WittError> {
        WittRing::new(self.base.clone(), self.p, len)
    }

    fn check(&self, w: &WittVec<R::Elem>) -> Result<(), WittError> {
        if w.comps.len() == self.len {
            Ok(())
        } else {
            Err(WittError::LengthMismatch { expected: self.len, got: w.comps.len() })
        }
    }

    pub fn vector(&self, comps: Vec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        let w = WittVec { comps };
        self.check(&w)?;
        Ok(w)
    }

    pub fn zero(&self) -> WittVec<R::Elem> {
        WittVec { comps: vec![self.base.zero(); self.len] }
    }

    pub fn one(&self) -> WittVec<R::Elem> {
        self.teichmuller(&self.base.one())
    }

    /// `[x] = (x, 0, …, 0)`.
    pub fn teichmuller(&self, x: &R::Elem) -> WittVec<R::Elem> {
        let mut comps = vec![self.base.zero(); self.len];
        comps[0] = x.clone();
        WittVec { comps }
    }

    pub fn random<G: Rng + ?Sized>(&self, rng: &mut G) -> WittVec<R::Elem> {
        WittVec { comps: (0..self.len).map(|_| self.base.random(rng)).collect() }
    }

    fn binary(&self, polys: &[ZPoly], a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(a)?;
        self.check(b)?;
        let vals: Vec<R::Elem> = a.comps.iter().chain(&b.comps).cloned().collect();
        Ok(WittVec { comps: polys.iter().map(|s| s.eval(&self.base, &vals)).collect() })
    }

    pub fn add(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.binary(&self.polys.sum, a, b)
    }

    pub fn mul(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.binary(&self.polys.prod, a, b)
    }

    pub fn neg(&self, a: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(a)?;
        Ok(WittVec { comps: self.polys.neg.iter().map(|s| s.eval(&self.base, &a.comps)).collect() })
    }

    pub fn sub(&self, a: &WittVec<R::Elem>, b: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.add(a, &self.neg(b)?)
    }

    /// `k·w` for an integer `k`.
    pub fn mul_int(&self, w: &WittVec<R::Elem>, k: i64) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        let mut acc = self.zero();
        let mut base = w.clone();
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.add(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.add(&base, &base)?;
            }
        }
        if k < 0 {
            acc = self.neg(&acc)?;
        }
        Ok(acc)
    }

    pub fn pow(&self, w: &WittVec<R::Elem>, mut e: u64) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        let mut acc = self.one();
        let mut base = w.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Ghost components `w_i = Σ_{j≤i} p^j x_j^{p^{i−j}}`.
    pub fn ghost(&self, w: &WittVec<R::Elem>) -> Result<Vec<R::Elem>, WittError> {
        self.check(w)?;
        let b = &self.base;
        Ok((0..self.len)
            .map(|i| {
                let mut acc = b.zero();
                for j in 0..=i {
                    let t = b.pow(&w.comps[j], self.p.pow((i - j) as u32));
                    let pj = b.embed_bigint(&BigInt::from(self.p).pow(j as u32));
                    acc = b.add(&acc, &b.mul(&pj, &t));
                }
                acc
            })
            .collect())
    }

    /// Componentwise `p`-th power, the Frobenius of `W_n(R)` when `R` has
    /// characteristic `p`.
    pub fn frobenius(&self, w: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        if self.base.char_p() != Some(self.p) {
            return Err(WittError::NotCharP);
        }
        Ok(WittVec { comps: w.comps.iter().map(|x| self.base.pow(x, self.p)).collect() })
    }

    /// The Witt-polynomial Frobenius `W_n(R) → W_{n−1}(R)`, valid over any
    /// coefficient ring.
    pub fn frobenius_poly(&self, w: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        if self.len < 2 {
            return Err(WittError::TooShort);
        }
        Ok(WittVec { comps: self.polys.frob.iter().map(|f| f.eval(&self.base, &w.comps)).collect() })
    }

    /// `V(x_0, …, x_{n−1}) = (0, x_0, …, x_{n−2})` inside `W_n(R)`.
    pub fn verschiebung(&self, w: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        let mut comps = Vec::with_capacity(self.len);
        comps.push(self.base.zero());
        comps.extend(w.comps[..self.len - 1].iter().cloned());
        Ok(WittVec { comps })
    }

    /// `V: W_n(R) → W_{n+1}(R)`, `(x_0, …) ↦ (0, x_0, …, x_{n−1})`.
    pub fn verschiebung_ext(&self, w: &WittVec<R::Elem>) -> Result<WittVec<R::Elem>, WittError> {
        self.check(w)?;
        let mut comps = Vec::with_capacity(self.len + 1);
        comps.push(self.base.zero());
        comps.extend(w.comps.iter().cloned());
        Ok(WittVec { comps })
    }

    /// `V^i(w)` inside `W_n(R)`.
    pub fn verschiebung_pow(&self, w: &WittVec<R::Elem>, i: usize) -> Result<WittVec<R::Elem>, WittError> {
        let mut out = w.clone();
        for _ in 0..i {
            out = self.verschiebung(&out)?;
        }
        Ok(out)
    }

    /// Image of `w` under a coefficient-ring homomorphism `f`.
    pub fn map_coefficients<S: CoeffRing>(
        &self,
        target: &WittRing<S>,
        w: &WittVec<R::Elem>,
        f: impl Fn(&R::Elem) -> S::Elem,
    ) -> Result<WittVec<S::Elem>, WittError> {
        self.check(w)?;
        target.vector(w.comps.iter().map(f).collect())
    }

    /// `(x, y_1, …, y_{n−1})` with random `y_i`: a random element of
    /// `W_n(R)` mapping to `x` under `W_n(R) → R`.
    pub fn random_lift<G: Rng + ?Sized>(&self, x: &R::Elem, rng: &mut G) -> WittVec<R::Elem> {
        let mut w = self.random(rng);
        w.comps[0] = x.clone();
        w
    }

    /// `θ(r_0, …, r_{n−1}) = Σ p^i r̂_i^{p^{n−i}}` into `A = W_n(R)`, where
    /// `lifts[i]` lifts `r_i` along `W_n(R) → R`.
    pub fn theta_level(&self, lifts: &[WittVec<R::Elem>]) -> Result<WittVec<R::Elem>, WittError> {
        if lifts.len() != self.len {
            return Err(WittError::LengthMismatch { expected: self.len, got: lifts.len() });
        }
        let mut acc = self.zero();
        for (i, lift) in lifts.iter().enumerate() {
            let t = self.pow(lift, self.p.pow((self.len - i) as u32))?;
            acc = self.add(&acc, &self.mul_int(&t, (self.p as i64).pow(i as u32))?)?;
        }
        Ok(acc)
    }

    /// `x^{1/p^m}` in a finite field of characteristic `p`.
    pub fn frobenius_root(&self, x: &R::Elem, m: u32) -> Result<R::Elem, WittError> {
        let size = self.base.elements().ok_or(WittError::NotFinite)?.len() as u64;
        if self.base.char_p() != Some(self.p) {
            return Err(WittError::NotCharP);
        }
        let mut y = x.clone();
        for _ in 0..m {
            y = self.base.pow(&y, size / self.p);
        }
        Ok(y)
    }

    /// Compatibility of the two level maps on a Teichmüller lift: for the
    /// perfect field `R`, the element `x = (x^{(0)}, x^{(1)}, …)` of the
    /// perfection has `x^{(k)} = x^{1/p^k}`, and both the limit construction
    /// `(lift of x^{(n)})^{p^n}` and `θ([x^{(n)}])` with random lifts must
    /// equal `[x]` in `W_n(R)`.
    pub fn teichmuller_level_check<G: Rng + ?Sized>(&self, x: &R::Elem, rng: &mut G) -> Result<bool, WittError> {
        let n = self.len as u32;
        let root = self.frobenius_root(x, n)?;
        let direct = self.pow(&self.random_lift(&root, rng), self.p.pow(n))?;
        let mut lifts = vec![self.random_lift(&root, rng)];
        for _ in 1..self.len {
            lifts.push(self.random_lift(&self.base.zero(), rng));
        }
        let via_theta = self.theta_level(&lifts)?;
        let target = self.teichmuller(x);
        Ok(direct == target && via_theta == target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn int_vec(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn ghost_examples() {
        let r = WittRing::new(IntegerRing, 5, 1).unwrap();
        let w = r.vector(int_vec(&[7])).unwrap();
        assert_eq!(r.ghost(&w).unwrap(), int_vec(&[7]));
        let r = WittRing::new(IntegerRing, 3, 2).unwrap();
        let w = r.vector(int_vec(&[2, 5])).unwrap();
        assert_eq!(r.ghost(&w).unwrap(), int_vec(&[2, 8 + 15]));
        let z9 = WittRing::new(ZmodRing::new(9), 3, 2).unwrap();
        for x in 0..9u64 {
            assert_eq!(z9.ghost(&z9.teichmuller(&x)).unwrap(), vec![x, x.pow(3) % 9]);
        }
    }

    #[test]
    fn one_plus_one_over_integers() {
        let r = WittRing::new(IntegerRing, 2, 2).unwrap();
        let one = r.one();
        let s = r.add(&one, &one).unwrap();
        // x0 + y0 = 2 and (x0² + 2x1 + y0² + 2y1 − 4)/2 = −1
        let brute_1 = ((1 + 1) - (1 + 1_i64).pow(2)) / 2;
        assert_eq!(s.components(), int_vec(&[2, brute_1]).as_slice());
        assert_eq!(r.add(&one, &r.zero()).unwrap(), one);
    }

    #[test]
    fn structure_polynomials_low_degree() {
        let polys = witt_polys(2, 2);
        // S_1 = x1 + y1 − x0 y0 for p = 2
        assert_eq!(polys.sum[1].coeff(&[1, 0, 1, 0]), BigInt::from(-1));
        assert_eq!(polys.sum[1].coeff(&[0, 1, 0, 0]), BigInt::from(1));
        assert_eq!(polys.sum[1].term_count(), 3);
        // P_0 = x0 y0
        assert_eq!(polys.prod[0].coeff(&[1, 0, 1, 0]), BigInt::from(1));
    }

    #[test]
    fn frobenius_after_verschiebung_is_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = PolyQuotient::truncated(ZmodRing::new(3), 3);
        let r = WittRing::new(base, 3, 3).unwrap();
        let r4 = r.with_len(4).unwrap();
        for _ in 0..10 {
            let w = r.random(&mut rng);
            let pw = r.mul_int(&w, 3).unwrap();
            assert_eq!(r.frobenius(&r.verschiebung(&w).unwrap()).unwrap(), pw);
            assert_eq!(r4.frobenius_poly(&r.verschiebung_ext(&w).unwrap()).unwrap(), pw);
        }
    }

    #[test]
    fn frobenius_paths_agree_in_char_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let r = WittRing::new(PolyQuotient::truncated(ZmodRing::new(2), 3), 2, 3).unwrap();
        for _ in 0..20 {
            let w = r.random(&mut rng);
            let a = r.frobenius(&w).unwrap();
            let b = r.frobenius_poly(&w).unwrap();
            assert_eq!(&a.components()[..2], b.components());
        }
    }

    #[test]
    fn graded_pieces_of_v_filtration() {
        let base = PolyQuotient::truncated(ZmodRing::new(2), 2);
        let r = WittRing::new(base.clone(), 2, 3).unwrap();
        let elems = base.elements().unwrap();
        for i in 0..3 {
            for j in 0..3 - i {
                for x in &elems {
                    for y in &elems {
                        let lhs = r
                            .mul(
                                &r.verschiebung_pow(&r.teichmuller(x), i).unwrap(),
                                &r.verschiebung_pow(&r.teichmuller(y), j).unwrap(),
                            )
                            .unwrap();
                        let xy = base.mul(&base.pow(x, 2u64.pow(j as u32)), &base.pow(y, 2u64.pow(i as u32)));
                        let rhs = r.verschiebung_pow(&r.teichmuller(&xy), i + j).unwrap();
                        assert_eq!(lhs, rhs, "i={i} j={j} x={x:?} y={y:?}");
                        let sum = r
                            .add(
                                &r.verschiebung_pow(&r.teichmuller(x), i).unwrap(),
                                &r.verschiebung_pow(&r.teichmuller(y), i).unwrap(),
                            )
                            .unwrap();
                        let direct = r.verschiebung_pow(&r.teichmuller(&base.add(x, y)), i).unwrap();
                        assert_eq!(&sum.components()[..=i], &direct.components()[..=i]);
                    }
                }
            }
        }
    }

    #[test]
    fn teichmuller_level_maps_on_finite_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for len in 1..=3 {
            let r = WittRing::new(PolyQuotient::gf4(), 2, len).unwrap();
            for x in PolyQuotient::gf4().elements().unwrap() {
                assert!(r.teichmuller_level_check(&x, &mut rng).unwrap());
            }
            let r = WittRing::new(PolyQuotient::gf9(), 3, len).unwrap();
            for x in PolyQuotient::gf9().elements().unwrap() {
                assert!(r.teichmuller_level_check(&x, &mut rng).unwrap());
            }
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let r = WittRing::new(ZmodRing::new(2), 2, 3).unwrap();
        let short = WittVec { comps: vec![1u64, 0] };
        assert_eq!(
            r.add(&short, &r.one()),
            Err(WittError::LengthMismatch { expected: 3, got: 2 })
        );
        assert!(matches!(WittRing::new(ZmodRing::new(3), 2, 2), Err(WittError::CharacteristicMismatch { .. })));
        assert_eq!(WittRing::new(ZmodRing::new(4), 4, 2).unwrap_err(), WittError::NotPrime(4));
    }

    #[test]
    fn fields_are_fields() {
        for f in [PolyQuotient::gf4(), PolyQuotient::gf9()] {
            let elems = f.elements().unwrap();
            for a in elems.iter().filter(|a| **a != f.zero()) {
                assert!(elems.iter().any(|b| f.mul(a, b) == f.one()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn ring_laws_over_z_mod_p_squared(seed in any::<u64>(), p in prop_oneof![Just(2u64), Just(3)]) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = WittRing::new(ZmodRing::new(p * p), p, 3).unwrap();
            let (a, b, c) = (r.random(&mut rng), r.random(&mut rng), r.random(&mut rng));
            prop_assert_eq!(r.add(&a, &b).unwrap(), r.add(&b, &a).unwrap());
            prop_assert_eq!(r.mul(&r.mul(&a, &b).unwrap(), &c).unwrap(), r.mul(&a, &r.mul(&b, &c).unwrap()).unwrap());
            prop_assert_eq!(
                r.mul(&a, &r.add(&b, &c).unwrap()).unwrap(),
                r.add(&r.mul(&a, &b).unwrap(), &r.mul(&a, &c).unwrap()).unwrap()
            );
            prop_assert_eq!(r.add(&a, &r.neg(&a).unwrap()).unwrap(), r.zero());
        }

        #[test]
        fn ghost_is_additive_and_multiplicative_over_z(a in proptest::collection::vec(-9i64..9, 3), b in proptest::collection::vec(-9i64..9, 3)) {
            let r = WittRing::new(IntegerRing, 3, 3).unwrap();
            let (wa, wb) = (r.vector(int_vec(&a)).unwrap(), r.vector(int_vec(&b)).unwrap());
            let (ga, gb) = (r.ghost(&wa).unwrap(), r.ghost(&wb).unwrap());
            let gs = r.ghost(&r.add(&wa, &wb).unwrap()).unwrap();
            let gp = r.ghost(&r.mul(&wa, &wb).unwrap()).unwrap();
            for i in 0..3 {
                prop_assert_eq!(&gs[i], &(&ga[i] + &gb[i]));
                prop_assert_eq!(&gp[i], &(&ga[i] * &gb[i]));
            }
        }
    }

    #[test]
    fn integer_witt_polys_have_sign_conventions() {
        let r = WittRing::new(IntegerRing, 3, 2).unwrap();
        let w = r.vector(int_vec(&[4, -1])).unwrap();
        assert_eq!(r.neg(&w).unwrap().components(), int_vec(&[-4, 1]).as_slice());
        assert!(r.neg(&w).unwrap().components()[0].is_negative());
    }
}
