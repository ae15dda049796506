//! Divided-power polynomial rings `Z/p^n⟨V_1, …, V_v⟩`.
//!
//! The basis consists of DP monomials `V^[k] = Π V_i^[k_i]` with the product
//! rule `V^[i]·V^[j] = C(i+j, i)·V^[i+j]`. A ring may carry a total-degree cap
//! and per-variable caps; monomials beyond a cap span an ideal, and the ring
//! is the quotient by that ideal.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::exactnum::{binomial_mod, nilpotency_index, pascal_table, vp_factorial, RingParams, ValUnit};
use crate::linalg::{snf_local, Matrix};

/// Number of variables a monomial can hold.
pub const MAX_VARS: usize = 8;
const FIELD_BITS: u32 = 16;
const FIELD_MASK: u128 = 0xFFFF;
const MAX_FIELD: u32 = 0xFFFF;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("a DP ring holds at most {MAX_VARS} variables, got {0}")]
    TooManyVariables(usize),
    #[error("duplicate variable name {0:?}")]
    DuplicateVariable(String),
    #[error("expected {expected} variable caps, got {got}")]
    CapCount { expected: usize, got: usize },
    #[error("element has a nonzero constant term and lies outside the DP ideal")]
    NotInIdeal,
    #[error("constant term {0} is not divisible by p")]
    NotInPdIdeal(u64),
    #[error("constant term must equal 1")]
    ConstantNotOne,
    #[error("constant term {0} is not a unit")]
    NotUnitConstant(u64),
    #[error("no unit pivot: the lowest-degree part of the divisor has no unit coefficient")]
    NoUnitPivot,
    #[error("inconsistent: no quotient exists at degree {degree}")]
    Inconsistent { degree: u32 },
    #[error("exp does not terminate: coefficients are not all divisible by p and the ring has no degree bound")]
    ExpDoesNotTerminate,
    #[error("nilpotency bound violated: z^{0} is nonzero")]
    NilpotencyViolated(u64),
    #[error("re-multiplication check failed: {0}")]
    VerificationFailed(String),
    #[error("expected {expected} substitution images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("malformed serialized polynomial: {0}")]
    Parse(String),
}

/// A DP monomial, packed as sixteen bits per variable with variable 0 in the
/// high bits. The derived order sorts by total degree, then lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono {
    deg: u32,
    packed: u128,
}

impl Mono {
    pub const ONE: Mono = Mono { deg: 0, packed: 0 };

    #[inline]
    fn shift(v: usize) -> u32 {
        FIELD_BITS * (MAX_VARS - 1 - v) as u32
    }

    pub fn from_exps(exps: &[u32]) -> Mono {
        assert!(exps.len() <= MAX_VARS, "too many exponents");
        let mut packed = 0u128;
        let mut deg = 0u32;
        for (v, &k) in exps.iter().enumerate() {
            assert!(k <= MAX_FIELD, "DP exponent {k} exceeds the packed range");
            packed |= (k as u128) << Mono::shift(v);
            deg += k;
        }
        assert!(deg <= MAX_FIELD, "total degree {deg} exceeds the packed range");
        Mono { deg, packed }
    }

    pub fn var(v: usize, k: u32) -> Mono {
        Mono::ONE.with_exp(v, k)
    }

    #[inline]
    pub fn exp(&self, v: usize) -> u32 {
        ((self.packed >> Mono::shift(v)) & FIELD_MASK) as u32
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.deg
    }

    pub fn exps(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|v| self.exp(v)).collect()
    }

    pub fn with_exp(&self, v: usize, k: u32) -> Mono {
        let old = self.exp(v);
        let deg = self.deg - old + k;
        assert!(k <= MAX_FIELD && deg <= MAX_FIELD, "DP exponent exceeds the packed range");
        let packed = (self.packed & !(FIELD_MASK << Mono::shift(v))) | ((k as u128) << Mono::shift(v));
        Mono { deg, packed }
    }

    /// Exponent-wise sum.
    #[inline]
    pub fn times(&self, other: &Mono) -> Mono {
        let deg = self.deg + other.deg;
        assert!(deg <= MAX_FIELD, "total degree {deg} exceeds the packed range");
        Mono { deg, packed: self.packed + other.packed }
    }

    /// Exponent-wise difference, when `other` divides `self`.
    pub fn quotient(&self, other: &Mono) -> Option<Mono> {
        let mut out = Mono::ONE;
        for v in 0..MAX_VARS {
            let (a, b) = (self.exp(v), other.exp(v));
            if b > a {
                return None;
            }
            if a > b {
                out = out.with_exp(v, a - b);
            }
        }
        Some(out)
    }
}

/// Descriptor of a DP polynomial ring over `Z/p^n`, with optional caps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DpRing {
    params: RingParams,
    vars: Vec<String>,
    total_cap: Option<u32>,
    var_caps: Vec<Option<u32>>,
}

impl DpRing {
    /// The untruncated ring on the given variables.
    pub fn new(params: RingParams, vars: &[&str]) -> Result<Arc<DpRing>, DpError> {
        DpRing::with_caps(params, vars, None, vec![None; vars.len()])
    }

    pub fn with_caps(
        params: RingParams,
        vars: &[&str],
        total_cap: Option<u32>,
        var_caps: Vec<Option<u32>>,
    ) -> Result<Arc<DpRing>, DpError> {
        if vars.len() > MAX_VARS {
            return Err(DpError::TooManyVariables(vars.len()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(DpError::DuplicateVariable(v.to_string()));
            }
        }
        if var_caps.len() != vars.len() {
            return Err(DpError::CapCount { expected: vars.len(), got: var_caps.len() });
        }
        Ok(Arc::new(DpRing {
            params,
            vars: vars.iter().map(|s| s.to_string()).collect(),
            total_cap,
            var_caps,
        }))
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn total_cap(&self) -> Option<u32> {
        self.total_cap
    }

    pub fn var_cap(&self, v: usize) -> Option<u32> {
        self.var_caps[v]
    }

    /// Whether the monomial survives in the quotient.
    #[inline]
    pub fn admits(&self, m: &Mono) -> bool {
        if self.total_cap.is_some_and(|c| m.degree() > c) {
            return false;
        }
        self.var_caps
            .iter()
            .enumerate()
            .all(|(v, cap)| cap.is_none_or(|c| m.exp(v) <= c))
    }

    /// An upper bound on the total degree of any surviving monomial.
    pub fn degree_bound(&self) -> Option<u32> {
        let per_var: Option<u32> = self.var_caps.iter().try_fold(0u32, |acc, c| c.map(|c| acc + c));
        match (self.total_cap, per_var) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    /// The same ring with the total-degree cap lowered to `d`.
    pub fn truncated(&self, d: u32) -> Arc<DpRing> {
        let mut r = self.clone();
        r.total_cap = Some(self.total_cap.map_or(d, |c| c.min(d)));
        Arc::new(r)
    }

    /// All admitted monomials of total degree exactly `s`, in ring order.
    pub fn monomials_of_degree(&self, s: u32) -> Vec<Mono> {
        if self.total_cap.is_some_and(|c| s > c) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.nvars()];
        self.compositions(0, s, &mut exps, &mut out);
        out.sort();
        out
    }

    fn compositions(&self, v: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Mono>) {
        let nv = self.nvars();
        if v == nv {
            if left == 0 {
                out.push(Mono::from_exps(exps));
            }
            return;
        }
        let hi = self.var_caps[v].map_or(left, |c| c.min(left));
        for k in 0..=hi {
            exps[v] = k;
            self.compositions(v + 1, left - k, exps, out);
        }
        exps[v] = 0;
    }
}

/// An element of a DP polynomial ring. Stored coefficients are nonzero
/// canonical residues and every stored monomial is admitted by the ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DPPoly {
    ring: Arc<DpRing>,
    terms: BTreeMap<Mono, u64>,
}

/// Result of [`DPPoly::divide_filtered`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    pub quotient: DPPoly,
    /// `den·quotient = num` holds in the ring itself, not only modulo the cap.
    pub exact: bool,
}

impl DPPoly {
    pub fn zero(ring: &Arc<DpRing>) -> DPPoly {
        DPPoly { ring: Arc::clone(ring), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<DpRing>) -> DPPoly {
        DPPoly::constant(ring, 1)
    }

    pub fn constant(ring: &Arc<DpRing>, c: i64) -> DPPoly {
        DPPoly::term(ring, Mono::ONE, ring.params.reduce_i64(c))
    }

    /// `V_v^[k]`.
    pub fn var(ring: &Arc<DpRing>, v: usize, k: u32) -> DPPoly {
        DPPoly::term(ring, Mono::var(v, k), 1)
    }

    /// `c·m`, or zero when `m` is not admitted.
    pub fn term(ring: &Arc<DpRing>, m: Mono, c: u64) -> DPPoly {
        let mut p = DPPoly::zero(ring);
        let c = c % ring.params.modulus();
        if c != 0 && ring.admits(&m) {
            p.terms.insert(m, c);
        }
        p
    }

    /// Sum of `c·V^[exps]` over the given signed terms.
    pub fn from_terms(ring: &Arc<DpRing>, terms: &[(Vec<u32>, i64)]) -> DPPoly {
        let mut p = DPPoly::zero(ring);
        for (exps, c) in terms {
            p.add_term(Mono::from_exps(exps), ring.params.reduce_i64(*c));
        }
        p
    }

    pub fn ring(&self) -> &Arc<DpRing> {
        &self.ring
    }

    pub fn params(&self) -> RingParams {
        self.ring.params
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &u64)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> u64 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u64 {
        self.coeff(&Mono::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    pub fn max_exp(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Minimal p-adic valuation of a coefficient; `None` for zero.
    pub fn min_valuation(&self) -> Option<u32> {
        let pr = self.ring.params;
        self.terms.values().map(|&c| pr.valuation(c).value).min()
    }

    /// Adds `c·m` in place, dropping inadmissible monomials.
    pub fn add_term(&mut self, m: Mono, c: u64) {
        if c == 0 || !self.ring.admits(&m) {
            return;
        }
        let pr = self.ring.params;
        let slot = self.terms.entry(m).or_insert(0);
        *slot = pr.add(*slot, c);
        if *slot == 0 {
            self.terms.remove(&m);
        }
    }

    fn check_ring(&self, other: &DPPoly) {
        assert!(
            Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring,
            "DP ring mismatch: {:?} vs {:?}",
            self.ring.vars,
            other.ring.vars
        );
    }

    pub fn scale(&self, c: u64) -> DPPoly {
        let pr = self.ring.params;
        let c = c % pr.modulus();
        let mut out = DPPoly::zero(&self.ring);
        if c == 0 {
            return out;
        }
        for (&m, &a) in &self.terms {
            let v = pr.mul(a, c);
            if v != 0 {
                out.terms.insert(m, v);
            }
        }
        out
    }

    pub fn scale_i64(&self, c: i64) -> DPPoly {
        self.scale(self.ring.params.reduce_i64(c))
    }

    /// Product with the single term `c·m`.
    pub fn mul_term(&self, m: &Mono, c: u64) -> DPPoly {
        let other = DPPoly::term(&self.ring, *m, c);
        self.mul(&other)
    }

    pub fn mul(&self, other: &DPPoly) -> DPPoly {
        self.check_ring(other);
        let ring = &self.ring;
        if self.is_zero() || other.is_zero() {
            return DPPoly::zero(ring);
        }
        let pr = ring.params;
        let nv = ring.nvars();
        let rows = (0..nv).map(|v| self.max_exp(v) + other.max_exp(v)).max().unwrap_or(0) as usize + 1;
        let table = pascal_table(&pr, rows);
        let mut acc: HashMap<Mono, u64> = HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let m = ma.times(mb);
                if !ring.admits(&m) {
                    continue;
                }
                let mut c = pr.mul(ca, cb);
                for v in 0..nv {
                    let (a, b) = (ma.exp(v), mb.exp(v));
                    if a != 0 && b != 0 {
                        c = pr.mul(c, table.get((a + b) as usize, a as usize));
                        if c == 0 {
                            break;
                        }
                    }
                }
                if c != 0 {
                    let slot = acc.entry(m).or_insert(0);
                    *slot = pr.add(*slot, c);
                }
            }
        }
        let terms = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        DPPoly { ring: Arc::clone(ring), terms }
    }

    pub fn pow(&self, mut e: u64) -> DPPoly {
        let mut base = self.clone();
        let mut acc = DPPoly::one(&self.ring);
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

    /// `γ_j(c·m)` for `j = 0..=q`, as single-term elements.
    fn term_gammas(&self, m: &Mono, c: u64, q: usize) -> Vec<DPPoly> {
        let ring = &self.ring;
        let pr = ring.params;
        let nv = ring.nvars();
        let v0 = (0..nv).find(|&v| m.exp(v) > 0).expect("term lies in the DP ideal");
        let mut out = Vec::with_capacity(q + 1);
        out.push(DPPoly::one(ring));
        let mut coeff = 1 % pr.modulus();
        for j in 1..=q as u64 {
            let mut mono = Mono::ONE;
            for v in 0..nv {
                let k = m.exp(v) as u64;
                if k == 0 {
                    continue;
                }
                let factor = if v == v0 {
                    binomial_mod(j * k - 1, k - 1, &pr)
                } else {
                    binomial_mod(j * k, k, &pr)
                };
                coeff = pr.mul(coeff, factor);
                mono = mono.with_exp(v, (j * k) as u32);
            }
            coeff = pr.mul(coeff, c);
            if coeff == 0 || !ring.admits(&mono) {
                break;
            }
            out.push(DPPoly::term(ring, mono, coeff));
        }
        while out.len() <= q {
            out.push(DPPoly::zero(ring));
        }
        out
    }

    /// `γ_0(x), …, γ_q(x)` for `x` in the DP ideal.
    pub fn dp_powers(&self, q: usize) -> Result<Vec<DPPoly>, DpError> {
        if self.constant_term() != 0 {
            return Err(DpError::NotInIdeal);
        }
        let ring = &self.ring;
        let mut g = vec![DPPoly::zero(ring); q + 1];
        g[0] = DPPoly::one(ring);
        for (m, &c) in &self.terms {
            let gt = self.term_gammas(m, c, q);
            let mut next = vec![DPPoly::zero(ring); q + 1];
            for (i, gi) in g.iter().enumerate() {
                if gi.is_zero() {
                    continue;
                }
                for (k, gk) in gt.iter().enumerate().take(q + 1 - i) {
                    if !gk.is_zero() {
                        next[i + k] = &next[i + k] + &gi.mul(gk);
                    }
                }
            }
            g = next;
        }
        Ok(g)
    }

    /// `γ_q(x)` for `x` in the DP ideal.
    pub fn dp_power(&self, q: usize) -> Result<DPPoly, DpError> {
        Ok(self.dp_powers(q)?.pop().expect("q+1 entries"))
    }

    /// `γ_0, …, γ_q` of `c_0 + y` where `c_0 ∈ pZ/p^n` and `y` is in the DP
    /// ideal, using `γ_j(c_0) = c_0^j/j!`.
    pub fn dp_powers_pd(&self, q: usize) -> Result<Vec<DPPoly>, DpError> {
        let c0 = self.constant_term();
        if c0 == 0 {
            return self.dp_powers(q);
        }
        let pr = self.ring.params;
        if !c0.is_multiple_of(pr.p()) {
            return Err(DpError::NotInPdIdeal(c0));
        }
        let y = self - &DPPoly::constant(&self.ring, c0 as i64);
        let gy = y.dp_powers(q)?;
        let base = ValUnit::from_int(c0 as i64, &pr).expect("nonzero constant");
        let gc: Vec<u64> = (0..=q as u64)
            .map(|i| {
                base.pow(i, &pr)
                    .div(&ValUnit::factorial(i, &pr), &pr)
                    .to_residue(&pr)
                    .expect("divided powers of p-multiples are integral")
            })
            .collect();
        Ok((0..=q)
            .map(|j| {
                let mut acc = DPPoly::zero(&self.ring);
                for i in 0..=j {
                    acc = &acc + &gy[j - i].scale(gc[i]);
                }
                acc
            })
            .collect())
    }

    /// `Σ_q γ_q(x)`; terminates when every coefficient is divisible by `p`
    /// or when the ring bounds total degree.
    pub fn exp_ideal(&self) -> Result<DPPoly, DpError> {
        if self.constant_term() != 0 {
            return Err(DpError::NotInIdeal);
        }
        if self.is_zero() {
            return Ok(DPPoly::one(&self.ring));
        }
        let mut bound: Option<u32> = None;
        if let Some(dmax) = self.ring.degree_bound() {
            bound = Some(dmax / self.min_degree().expect("nonzero"));
        }
        let vmin = self.min_valuation().expect("nonzero");
        if vmin >= 1 {
            let n = self.ring.params.n();
            let qb = n.div_ceil(vmin) - 1;
            bound = Some(bound.map_or(qb, |b| b.min(qb)));
        }
        let q = bound.ok_or(DpError::ExpDoesNotTerminate)?;
        let g = self.dp_powers(q as usize)?;
        Ok(g.iter().fold(DPPoly::zero(&self.ring), |acc, x| &acc + x))
    }

    /// `log(1+y) = Σ_{k≥1} (−1)^{k−1}(k−1)!·γ_k(y)`, summed while
    /// `v_p((k−1)!) < n`.
    pub fn log_unit(&self) -> Result<DPPoly, DpError> {
        let pr = self.ring.params;
        if self.constant_term() != 1 % pr.modulus() {
            return Err(DpError::ConstantNotOne);
        }
        let y = self - &DPPoly::one(&self.ring);
        if y.is_zero() {
            return Ok(y);
        }
        let mut kmax = 1u64;
        while vp_factorial(kmax, pr.p()) < pr.n() as u64 {
            kmax += 1;
        }
        if let Some(dmax) = self.ring.degree_bound() {
            kmax = kmax.min((dmax / y.min_degree().expect("nonzero")) as u64);
        }
        let g = y.dp_powers(kmax as usize)?;
        let mut acc = DPPoly::zero(&self.ring);
        let mut fact = 1 % pr.modulus();
        for (k, gk) in g.iter().enumerate().skip(1) {
            if k > 1 {
                fact = pr.mul(fact, (k - 1) as u64 % pr.modulus());
            }
            let c = if k % 2 == 1 { fact } else { pr.neg(fact) };
            acc = &acc + &gk.scale(c);
        }
        Ok(acc)
    }

    /// Two-sided inverse of an element with unit constant term.
    pub fn invert_unit(&self) -> Result<DPPoly, DpError> {
        let pr = self.ring.params;
        let c0 = self.constant_term();
        let c0inv = pr.inv(c0).map_err(|_| DpError::NotUnitConstant(c0))?;
        let one = DPPoly::one(&self.ring);
        let z = &one - &self.scale(c0inv);
        let k = nilpotency_index(&pr);
        let mut sum = one.clone();
        let mut power = one.clone();
        for _ in 1..k {
            power = power.mul(&z);
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        if !power.is_zero() && !power.mul(&z).is_zero() {
            return Err(DpError::NilpotencyViolated(k));
        }
        let inv = sum.scale(c0inv);
        if inv.mul(self) != one {
            return Err(DpError::VerificationFailed("u·u⁻¹ ≠ 1".into()));
        }
        Ok(inv)
    }

    /// Terms of total degree exactly `s`.
    pub fn homogeneous_part(&self, s: u32) -> DPPoly {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() == s).map(|(&m, &c)| (m, c)).collect();
        DPPoly { ring: Arc::clone(&self.ring), terms }
    }

    /// Terms of total degree at most `d`, kept in the same ring.
    pub fn drop_above(&self, d: u32) -> DPPoly {
        let terms = self.terms.iter().filter(|(m, _)| m.degree() <= d).map(|(&m, &c)| (m, c)).collect();
        DPPoly { ring: Arc::clone(&self.ring), terms }
    }

    /// Image in the quotient by all monomials of total degree `> d`.
    pub fn truncate(&self, d: u32) -> DPPoly {
        let ring = self.ring.truncated(d);
        let terms = self.terms.iter().filter(|(m, _)| ring.admits(m)).map(|(&m, &c)| (m, c)).collect();
        DPPoly { ring, terms }
    }

    /// Re-homes the element in `ring`, dropping monomials it does not admit.
    pub fn in_ring(&self, ring: &Arc<DpRing>) -> DPPoly {
        assert_eq!(self.ring.vars, ring.vars, "variable lists differ");
        let mut out = DPPoly::zero(ring);
        for (&m, &c) in &self.terms {
            out.add_term(m, c);
        }
        out
    }

    /// Sends variable `v` to variable `map[v]` of `target`.
    pub fn relabel(&self, target: &Arc<DpRing>, map: &[usize]) -> DPPoly {
        assert_eq!(map.len(), self.ring.nvars());
        let mut out = DPPoly::zero(target);
        for (m, &c) in &self.terms {
            let mut mm = Mono::ONE;
            for (v, &tv) in map.iter().enumerate() {
                let k = m.exp(v);
                if k > 0 {
                    mm = mm.with_exp(tv, mm.exp(tv) + k);
                }
            }
            out.add_term(mm, c);
        }
        out
    }

    /// The DP homomorphism `V_v^[k] ↦ γ_k(images[v])` into `target`. Images
    /// with a p-divisible constant term use [`DPPoly::dp_powers_pd`].
    pub fn substitute(&self, target: &Arc<DpRing>, images: &[DPPoly]) -> Result<DPPoly, DpError> {
        let nv = self.ring.nvars();
        if images.len() != nv {
            return Err(DpError::ImageCount { expected: nv, got: images.len() });
        }
        let mut gammas = Vec::with_capacity(nv);
        for (v, img) in images.iter().enumerate() {
            img.check_ring(&DPPoly::zero(target));
            let top = self.max_exp(v) as usize;
            gammas.push(if top == 0 { vec![DPPoly::one(target)] } else { img.dp_powers_pd(top)? });
        }
        let mut out = DPPoly::zero(target);
        for (m, &c) in &self.terms {
            let mut acc = DPPoly::constant(target, 1).scale(c);
            for (v, g) in gammas.iter().enumerate() {
                let k = m.exp(v) as usize;
                if k > 0 {
                    acc = acc.mul(&g[k]);
                    if acc.is_zero() {
                        break;
                    }
                }
            }
            out = &out + &acc;
        }
        Ok(out)
    }

    /// Coefficients of `V_v^[k]`, each with variable `v` removed.
    pub fn split_by_var(&self, v: usize) -> BTreeMap<u32, DPPoly> {
        let mut out: BTreeMap<u32, DPPoly> = BTreeMap::new();
        for (m, &c) in &self.terms {
            let k = m.exp(v);
            out.entry(k).or_insert_with(|| DPPoly::zero(&self.ring)).add_term(m.with_exp(v, 0), c);
        }
        out
    }

    /// Inverse of [`DPPoly::split_by_var`]: `Σ_k parts[k]·V_v^[k]`, where no
    /// part may involve `v`.
    pub fn join_by_var(ring: &Arc<DpRing>, v: usize, parts: &BTreeMap<u32, DPPoly>) -> DPPoly {
        let mut out = DPPoly::zero(ring);
        for (&k, part) in parts {
            for (m, &c) in &part.terms {
                assert_eq!(m.exp(v), 0, "part involves the split variable");
                out.add_term(m.with_exp(v, k), c);
            }
        }
        out
    }

    /// The DP derivation `∂/∂V_v`: `V_v^[k] ↦ V_v^[k−1]`.
    pub fn derivative(&self, v: usize) -> DPPoly {
        let mut out = DPPoly::zero(&self.ring);
        for (m, &c) in &self.terms {
            let k = m.exp(v);
            if k > 0 {
                out.add_term(m.with_exp(v, k - 1), c);
            }
        }
        out
    }

    /// `V_v^[k] ↦ V_v^[k+1]`, a right inverse of [`DPPoly::derivative`] up to
    /// the cap on `v`.
    pub fn antiderivative(&self, v: usize) -> DPPoly {
        let mut out = DPPoly::zero(&self.ring);
        for (m, &c) in &self.terms {
            out.add_term(m.with_exp(v, m.exp(v) + 1), c);
        }
        out
    }

    /// Whether every coefficient is divisible by `p^k`.
    pub fn divisible_by_p_pow(&self, k: u32) -> bool {
        let pr = self.ring.params;
        k <= pr.n() && self.terms.values().all(|&c| c % pr.p().pow(k) == 0)
    }

    /// Some `y` with `p^k·y = self`, when one exists.
    pub fn div_p_pow(&self, k: u32) -> Option<DPPoly> {
        if !self.divisible_by_p_pow(k) {
            return None;
        }
        let pk = self.ring.params.p().pow(k);
        let terms = self.terms.iter().map(|(&m, &c)| (m, c / pk)).filter(|&(_, c)| c != 0).collect();
        Some(DPPoly { ring: Arc::clone(&self.ring), terms })
    }

    /// Finds `q` with `den·q ≡ num` modulo monomials of total degree `> cap`,
    /// by a triangular solve over total degree. Each degree stage is a small
    /// linear system over `Z/p^n`. When a stage has no solution the whole
    /// truncated system is solved at once before reporting inconsistency.
    /// The result is always re-verified by multiplication.
    pub fn divide_filtered(num: &DPPoly, den: &DPPoly, cap: u32) -> Result<Division, DpError> {
        num.check_ring(den);
        let ring = Arc::clone(&num.ring);
        let pr = ring.params;
        let k0 = den.min_degree().ok_or(DpError::NoUnitPivot)?;
        let low = den.homogeneous_part(k0);
        if !low.terms.values().any(|&c| pr.is_unit(c)) {
            return Err(DpError::NoUnitPivot);
        }
        if let Some(bad) = num.terms.keys().find(|m| m.degree() < k0 && m.degree() <= cap) {
            return Err(DpError::Inconsistent { degree: bad.degree() });
        }
        let den_cap = den.drop_above(cap);
        let mut quotient = DPPoly::zero(&ring);
        let mut resid = num.drop_above(cap);
        let mut stagewise = true;
        for j in 0..=cap.saturating_sub(k0) {
            if cap < k0 {
                break;
            }
            let s = k0 + j;
            let unknowns = ring.monomials_of_degree(j);
            let equations = ring.monomials_of_degree(s);
            if unknowns.is_empty() {
                if !resid.homogeneous_part(s).is_zero() {
                    stagewise = false;
                    break;
                }
                continue;
            }
            let index: HashMap<Mono, usize> = equations.iter().enumerate().map(|(i, &m)| (m, i)).collect();
            let mut a = Matrix::zeros(equations.len(), unknowns.len(), pr);
            for (col, m) in unknowns.iter().enumerate() {
                for (mm, &c) in &low.mul_term(m, 1).terms {
                    a.set(index[mm], col, c);
                }
            }
            let rhs: Vec<u64> = equations.iter().map(|m| resid.coeff(m)).collect();
            let Some(x) = snf_local(&a).solve(&rhs) else {
                stagewise = false;
                break;
            };
            let mut qj = DPPoly::zero(&ring);
            for (m, &c) in unknowns.iter().zip(&x) {
                qj.add_term(*m, c);
            }
            resid = &resid - &den_cap.mul(&qj).drop_above(cap);
            quotient = &quotient + &qj;
        }
        if !stagewise {
            quotient = DPPoly::divide_global(num, den, cap, k0)?;
        }
        let product = den.mul(&quotient);
        if product.drop_above(cap) != num.drop_above(cap) {
            return Err(DpError::VerificationFailed(format!(
                "den·q ≠ num below degree {cap}: den·q = {product}, num = {num}"
            )));
        }
        let exact = product == *num;
        Ok(Division { quotient, exact })
    }

    fn divide_global(num: &DPPoly, den: &DPPoly, cap: u32, k0: u32) -> Result<DPPoly, DpError> {
        let ring = Arc::clone(&num.ring);
        let pr = ring.params;
        let unknowns: Vec<Mono> = (0..=cap - k0).flat_map(|j| ring.monomials_of_degree(j)).collect();
        let equations: Vec<Mono> = (0..=cap).flat_map(|s| ring.monomials_of_degree(s)).collect();
        let index: HashMap<Mono, usize> = equations.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let den_cap = den.drop_above(cap);
        let mut a = Matrix::zeros(equations.len(), unknowns.len(), pr);
        for (col, m) in unknowns.iter().enumerate() {
            for (mm, &c) in &den_cap.mul_term(m, 1).drop_above(cap).terms {
                a.set(index[mm], col, c);
            }
        }
        let rhs: Vec<u64> = equations.iter().map(|m| num.coeff(m)).collect();
        let snf = snf_local(&a);
        let x = snf.solve(&rhs).ok_or_else(|| {
            let first_bad = (k0..=cap)
                .find(|&s| {
                    let upto: Vec<usize> =
                        equations.iter().enumerate().filter(|(_, m)| m.degree() <= s).map(|(i, _)| i).collect();
                    let cols: Vec<usize> = unknowns
                        .iter()
                        .enumerate()
                        .filter(|(_, m)| m.degree() + k0 <= s)
                        .map(|(i, _)| i)
                        .collect();
                    let mut sub = Matrix::zeros(upto.len(), cols.len(), pr);
                    for (ri, &r) in upto.iter().enumerate() {
                        for (ci, &c) in cols.iter().enumerate() {
                            sub.set(ri, ci, a.get(r, c));
                        }
                    }
                    let sub_rhs: Vec<u64> = upto.iter().map(|&r| rhs[r]).collect();
                    snf_local(&sub).solve(&sub_rhs).is_none()
                })
                .unwrap_or(cap);
            DpError::Inconsistent { degree: first_bad }
        })?;
        let mut q = DPPoly::zero(&ring);
        for (m, &c) in unknowns.iter().zip(&x) {
            q.add_term(*m, c);
        }
        Ok(q)
    }

    /// Rendering with variable names, e.g. `3·Z^[1]·Ξ^[2]`.
    pub fn render_named(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let nv = self.ring.nvars();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = c.to_string();
                for v in 0..nv {
                    let k = m.exp(v);
                    if k > 0 {
                        s.push_str(&format!("·{}^[{}]", self.ring.vars[v], k));
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }

    /// Deterministic JSON form: variable names and `[exponents, coefficient]`
    /// pairs in ring order.
    pub fn to_json(&self) -> Value {
        let nv = self.ring.nvars();
        let terms: Vec<Value> = self.terms.iter().map(|(m, &c)| json!([m.exps(nv), c])).collect();
        json!({ "vars": self.ring.vars, "modulus": self.ring.params.modulus(), "terms": terms })
    }

    pub fn from_json(ring: &Arc<DpRing>, value: &Value) -> Result<DPPoly, DpError> {
        let err = |s: &str| DpError::Parse(s.to_string());
        let vars = value.get("vars").and_then(Value::as_array).ok_or_else(|| err("missing vars"))?;
        let names: Vec<&str> = vars.iter().filter_map(Value::as_str).collect();
        if names.len() != ring.nvars() || names.iter().zip(&ring.vars).any(|(a, b)| a != b) {
            return Err(err("variable list does not match the ring"));
        }
        let terms = value.get("terms").and_then(Value::as_array).ok_or_else(|| err("missing terms"))?;
        let mut out = DPPoly::zero(ring);
        for t in terms {
            let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(|| err("term is not a pair"))?;
            let exps: Vec<u32> = pair[0]
                .as_array()
                .ok_or_else(|| err("exponents are not a list"))?
                .iter()
                .map(|e| e.as_u64().map(|e| e as u32).ok_or_else(|| err("bad exponent")))
                .collect::<Result<_, _>>()?;
            if exps.len() != ring.nvars() {
                return Err(err("exponent list has the wrong length"));
            }
            let c = pair[1].as_u64().ok_or_else(|| err("bad coefficient"))?;
            out.add_term(Mono::from_exps(&exps), c % ring.params.modulus());
        }
        Ok(out)
    }
}

impl fmt::Display for DPPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let nv = self.ring.nvars();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let exps: Vec<String> = m.exps(nv).iter().map(|e| e.to_string()).collect();
            write!(f, "{c}·V^[{}]", exps.join(","))?;
        }
        Ok(())
    }
}

impl Add for &DPPoly {
    type Output = DPPoly;
    fn add(self, rhs: &DPPoly) -> DPPoly {
        self.check_ring(rhs);
        let mut out = self.clone();
        for (&m, &c) in &rhs.terms {
            out.add_term(m, c);
        }
        out
    }
}

impl Sub for &DPPoly {
    type Output = DPPoly;
    fn sub(self, rhs: &DPPoly) -> DPPoly {
        self.check_ring(rhs);
        let pr = self.ring.params;
        let mut out = self.clone();
        for (&m, &c) in &rhs.terms {
            out.add_term(m, pr.neg(c));
        }
        out
    }
}

impl Neg for &DPPoly {
    type Output = DPPoly;
    fn neg(self) -> DPPoly {
        let pr = self.ring.params;
        let terms = self.terms.iter().map(|(&m, &c)| (m, pr.neg(c))).collect();
        DPPoly { ring: Arc::clone(&self.ring), terms }
    }
}

impl Mul for &DPPoly {
    type Output = DPPoly;
    fn mul(self, rhs: &DPPoly) -> DPPoly {
        DPPoly::mul(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(p: u64, n: u32, vars: &[&str]) -> Arc<DpRing> {
        DpRing::new(RingParams::new(p, n).unwrap(), vars).unwrap()
    }

    fn capped(p: u64, n: u32, vars: &[&str], cap: u32) -> Arc<DpRing> {
        DpRing::with_caps(RingParams::new(p, n).unwrap(), vars, Some(cap), vec![None; vars.len()]).unwrap()
    }

    fn binom(n: u64, k: u64) -> u128 {
        (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128)
    }

    #[test]
    fn mono_order_is_degree_then_lex() {
        let a = Mono::from_exps(&[0, 2]);
        let b = Mono::from_exps(&[1, 1]);
        let c = Mono::from_exps(&[3, 0]);
        assert!(a < b && b < c);
        assert!(Mono::ONE < a);
        assert_eq!(b.times(&c).exps(2), vec![4, 1]);
        assert_eq!(c.quotient(&b), None);
        assert_eq!(b.times(&c).quotient(&c), Some(b));
    }

    #[test]
    fn product_examples() {
        let r = ring(2, 2, &["Z"]);
        let z = DPPoly::var(&r, 0, 1);
        assert_eq!(z.mul(&z), DPPoly::var(&r, 0, 2).scale(2));
        let z2 = DPPoly::var(&r, 0, 2);
        assert_eq!(z2.mul(&z2), DPPoly::var(&r, 0, 4).scale((binom(4, 2) % 4) as u64));
        let one = DPPoly::one(&r);
        let lhs = (&one + &z).mul(&(&one - &z));
        let expected = DPPoly::from_terms(&r, &[(vec![0], 1), (vec![2], -2)]);
        assert_eq!(lhs, expected);
    }

    #[test]
    fn dp_power_examples() {
        let r = ring(3, 3, &["Z"]);
        let z = DPPoly::var(&r, 0, 1);
        for k in 0..6 {
            assert_eq!(z.dp_power(k).unwrap(), DPPoly::var(&r, 0, k as u32));
        }
        let two_z = z.scale(2);
        assert_eq!(two_z.dp_power(2).unwrap(), DPPoly::var(&r, 0, 2).scale(4));
        // (4)!/(2!^2·2!) = 3
        let want = (24 / (2 * 2 * 2)) as u64;
        assert_eq!(DPPoly::var(&r, 0, 2).dp_power(2).unwrap(), DPPoly::var(&r, 0, 4).scale(want));
        assert_eq!(DPPoly::one(&r).dp_power(2), Err(DpError::NotInIdeal));
    }

    #[test]
    fn log_of_one_minus_z_mod_four() {
        let r = ring(2, 2, &["Z"]);
        let u = DPPoly::from_terms(&r, &[(vec![0], 1), (vec![1], -1)]);
        let l = u.log_unit().unwrap();
        let expected = DPPoly::from_terms(&r, &[(vec![1], -1), (vec![2], -1), (vec![3], -2), (vec![4], -2)]);
        assert_eq!(l, expected);
        assert_eq!(DPPoly::one(&r).log_unit().unwrap(), DPPoly::zero(&r));
        let rt = capped(2, 2, &["Z"], 12);
        let ut = u.in_ring(&rt);
        assert_eq!(ut.log_unit().unwrap().exp_ideal().unwrap(), ut);
    }

    #[test]
    fn exp_of_multiple_of_tau() {
        let r = capped(3, 2, &["Z"], 10);
        let tau = DPPoly::from_terms(&r, &[(vec![0], 1), (vec![1], -1)]).log_unit().unwrap();
        for a in [-2i64, 1, 2, 5] {
            let x = tau.scale_i64(a);
            let lhs = &x.exp_ideal().unwrap() - &DPPoly::one(&r);
            let g = tau.dp_powers(10).unwrap();
            let mut rhs = DPPoly::zero(&r);
            for (k, gk) in g.iter().enumerate().skip(1) {
                rhs = &rhs + &gk.scale_i64(a.pow(k as u32));
            }
            assert_eq!(lhs, rhs);
        }
        let untruncated = ring(3, 2, &["Z"]);
        let tau_u = DPPoly::from_terms(&untruncated, &[(vec![0], 1), (vec![1], -1)]).log_unit().unwrap();
        assert_eq!(tau_u.exp_ideal(), Err(DpError::ExpDoesNotTerminate));
    }

    #[test]
    fn invert_unit_examples() {
        let r = ring(2, 3, &["Z"]);
        assert_eq!(DPPoly::one(&r).invert_unit().unwrap(), DPPoly::one(&r));
        assert_eq!(DPPoly::constant(&r, 3).invert_unit().unwrap(), DPPoly::constant(&r, 3));
        let u = DPPoly::from_terms(&r, &[(vec![0], 1), (vec![1], -1)]);
        let inv = u.invert_unit().unwrap();
        let mut expected = DPPoly::zero(&r);
        let mut fact: u64 = 1;
        for k in 0..8u64 {
            if k > 0 {
                fact *= k;
            }
            expected.add_term(Mono::var(0, k as u32), fact % 8);
        }
        assert_eq!(inv, expected);
        assert_eq!(u.mul(&inv), DPPoly::one(&r));
        assert_eq!(DPPoly::constant(&r, 2).invert_unit(), Err(DpError::NotUnitConstant(2)));
    }

    #[test]
    fn divide_filtered_examples() {
        let r = ring(2, 3, &["Z"]);
        let z = DPPoly::var(&r, 0, 1);
        let d = DPPoly::divide_filtered(&z, &z, 6).unwrap();
        assert_eq!(d.quotient, DPPoly::one(&r));
        assert!(d.exact);
        let den = &z + &DPPoly::var(&r, 0, 2);
        let num = den.scale(2);
        let d = DPPoly::divide_filtered(&num, &den, 6).unwrap();
        assert_eq!(d.quotient, DPPoly::constant(&r, 2));
        assert!(d.exact);
        let bad = z.scale(2);
        assert_eq!(DPPoly::divide_filtered(&z, &bad, 4), Err(DpError::NoUnitPivot));
        assert!(matches!(
            DPPoly::divide_filtered(&DPPoly::one(&r), &z, 4),
            Err(DpError::Inconsistent { degree: 0 })
        ));
    }

    #[test]
    fn divide_t_by_exp_two_tau() {
        let r = ring(3, 2, &["Z"]);
        let tau = DPPoly::from_terms(&r, &[(vec![0], 1), (vec![1], -1)]).log_unit().unwrap();
        let t = tau.scale(3);
        let rt = capped(3, 2, &["Z"], 12);
        let den = &tau.in_ring(&rt).scale(2).exp_ideal().unwrap() - &DPPoly::one(&rt);
        assert_eq!(den.homogeneous_part(1), DPPoly::var(&rt, 0, 1).scale_i64(-2));
        let d = DPPoly::divide_filtered(&t.in_ring(&rt), &den, 12).unwrap();
        assert_eq!(den.mul(&d.quotient).drop_above(12), t.in_ring(&rt).drop_above(12));
    }

    #[test]
    fn truncate_examples() {
        let r = ring(2, 2, &["Z"]);
        assert!(DPPoly::var(&r, 0, 5).truncate(4).is_zero());
        let x = &DPPoly::one(&r) + &DPPoly::var(&r, 0, 1);
        assert_eq!(x.truncate(0), DPPoly::one(&r).truncate(0));
        assert_eq!(x.truncate(3).truncate(3), x.truncate(3));
    }

    #[test]
    fn pd_powers_of_p_plus_xi() {
        let r = capped(3, 3, &["X"], 6);
        let x = DPPoly::from_terms(&r, &[(vec![0], 3), (vec![1], 1)]);
        let g = x.dp_powers_pd(4).unwrap();
        for (q, gq) in g.iter().enumerate() {
            let fact: u64 = (1..=q as u64).product();
            let lhs = gq.scale(fact % 27);
            assert_eq!(lhs, x.pow(q as u64), "q = {q}");
        }
    }

    #[test]
    fn substitute_is_dp_morphism() {
        let src = ring(2, 3, &["W"]);
        let dst = capped(2, 3, &["Z"], 8);
        let img = DPPoly::from_terms(&dst, &[(vec![1], 1), (vec![2], -1)]);
        let w = DPPoly::var(&src, 0, 1);
        let a = &w + &DPPoly::var(&src, 0, 3).scale(3);
        let b = &DPPoly::one(&src) + &DPPoly::var(&src, 0, 2);
        let fa = a.substitute(&dst, std::slice::from_ref(&img)).unwrap();
        let fb = b.substitute(&dst, std::slice::from_ref(&img)).unwrap();
        let fab = a.mul(&b).substitute(&dst, std::slice::from_ref(&img)).unwrap();
        assert_eq!(fab, fa.mul(&fb));
    }

    #[test]
    fn json_round_trip_and_render() {
        let r = ring(5, 2, &["Z", "Ξ"]);
        let x = DPPoly::from_terms(&r, &[(vec![1, 0], 3), (vec![0, 2], -1)]);
        assert_eq!(DPPoly::from_json(&r, &x.to_json()).unwrap(), x);
        assert_eq!(x.to_string(), "3·V^[1,0] + 24·V^[0,2]");
        assert_eq!(x.render_named(), "3·Z^[1] + 24·Ξ^[2]");
    }

    #[test]
    fn split_and_join() {
        let r = ring(3, 2, &["A", "B"]);
        let x = DPPoly::from_terms(&r, &[(vec![1, 2], 3), (vec![0, 2], 1), (vec![2, 0], 5)]);
        let parts = x.split_by_var(1);
        assert_eq!(parts.len(), 2);
        assert_eq!(DPPoly::join_by_var(&r, 1, &parts), x);
        assert_eq!(x.derivative(0).antiderivative(0), &x - &DPPoly::from_terms(&r, &[(vec![0, 2], 1)]));
    }

    fn ideal_element(ring: Arc<DpRing>, max_deg: u32) -> impl Strategy<Value = DPPoly> {
        let nv = ring.nvars();
        proptest::collection::vec((proptest::collection::vec(0..=max_deg, nv), any::<i64>()), 1..5).prop_map(
            move |ts| {
                let mut p = DPPoly::zero(&ring);
                for (e, c) in ts {
                    let m = Mono::from_exps(&e);
                    if m.degree() > 0 {
                        p.add_term(m, ring.params().reduce_i64(c));
                    }
                }
                p
            },
        )
    }

    fn param_rings() -> impl Strategy<Value = Arc<DpRing>> {
        prop_oneof![Just((2u64, 2u32)), Just((2, 3)), Just((3, 2)), Just((5, 2))]
            .prop_map(|(p, n)| capped(p, n, &["A", "B"], 7))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn factorial_times_gamma_is_power(
            (x, q) in param_rings().prop_flat_map(|r| (ideal_element(r, 3), 0usize..=6))
        ) {
            let fact: u64 = (1..=q as u64).product();
            let g = x.dp_power(q).unwrap();
            prop_assert_eq!(g.scale(fact % x.params().modulus()), x.pow(q as u64));
        }

        #[test]
        fn gamma_addition_and_homogeneity(
            (x, y, c) in param_rings().prop_flat_map(|r| (ideal_element(r.clone(), 3), ideal_element(r, 3), any::<i64>()))
        ) {
            let q = 4;
            let gx = x.dp_powers(q).unwrap();
            let gy = y.dp_powers(q).unwrap();
            let gxy = (&x + &y).dp_powers(q).unwrap();
            for j in 0..=q {
                let mut s = DPPoly::zero(x.ring());
                for i in 0..=j {
                    s = &s + &gx[i].mul(&gy[j - i]);
                }
                prop_assert_eq!(&gxy[j], &s);
                let pr = x.params();
                let cc = pr.reduce_i64(c);
                prop_assert_eq!(x.scale(cc).dp_power(j).unwrap(), gx[j].scale(pr.pow(cc, j as u64)));
            }
        }

        #[test]
        fn exp_log_inverse(x in param_rings().prop_flat_map(|r| ideal_element(r, 3))) {
            let one = DPPoly::one(x.ring());
            prop_assert_eq!(x.exp_ideal().unwrap().log_unit().unwrap(), x.clone());
            let u = &one + &x;
            prop_assert_eq!(u.log_unit().unwrap().exp_ideal().unwrap(), u);
        }

        #[test]
        fn nilpotency_index_kills_ideal(
            (p, n, e, c) in prop_oneof![Just((2u64, 2u32)), Just((2, 3)), Just((3, 2)), Just((5, 2))]
                .prop_flat_map(|(p, n)| (Just(p), Just(n), proptest::collection::vec(0u32..3, 2), any::<i64>()))
        ) {
            let r = ring(p, n, &["A", "B"]);
            let mut z = DPPoly::var(&r, 0, 1);
            let m = Mono::from_exps(&e);
            if m.degree() > 0 && m != Mono::var(0, 1) {
                z.add_term(m, r.params().reduce_i64(c));
            }
            let k = nilpotency_index(&r.params());
            prop_assert!(z.pow(k).is_zero());
            prop_assert!(!z.pow(k - 1).is_zero());
        }

        #[test]
        fn truncate_is_ring_map(
            (a, b, d) in param_rings().prop_flat_map(|r| (ideal_element(r.clone(), 3), ideal_element(r, 3), 0u32..6))
        ) {
            let one = DPPoly::one(a.ring());
            let a = &a + &one;
            prop_assert_eq!(a.mul(&b).truncate(d), a.truncate(d).mul(&b.truncate(d)));
        }

        #[test]
        fn ring_laws(
            (a, b, c) in param_rings().prop_flat_map(|r| (ideal_element(r.clone(), 3), ideal_element(r.clone(), 3), ideal_element(r, 2)))
        ) {
            let one = DPPoly::one(a.ring());
            let a = &a + &one.scale(3);
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&(&b + &c)), &a.mul(&b) + &a.mul(&c));
            prop_assert_eq!(a.mul(&one), a.clone());
        }
    }
}
