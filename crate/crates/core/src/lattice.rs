//! Exponent lattices over monoid charts, with perfection and the kernel groups `L`.
//!
//! Exponents live in `Z[1/p]`. A chart is one of four monoids: `N^r`, `Z^r`,
//! or their p-divisible versions `N[1/p]^r` and `Z[1/p]^r`, truncated to a
//! finite level `m` (denominators dividing `p^m`).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{ExactError, PadicExponent, RingParams};
use crate::linalg::{snf_local, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("unsupported chart combination: {0}")]
    Unsupported(String),
    #[error("structure map has {got} columns, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("exponent arithmetic overflowed")]
    Overflow,
    #[error("exponent {0} lies outside the chart")]
    OutsideChart(String),
    #[error("kernel vector failed the substitution check")]
    Verification,
}

impl From<ExactError> for LatticeError {
    fn from(_: ExactError) -> Self {
        LatticeError::Overflow
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    FreeNonneg,
    FreeGroup,
    PadicNonneg,
    PadicGroup,
}

impl ChartKind {
    pub fn is_padic(self) -> bool {
        matches!(self, ChartKind::PadicNonneg | ChartKind::PadicGroup)
    }

    pub fn is_nonneg(self) -> bool {
        matches!(self, ChartKind::FreeNonneg | ChartKind::PadicNonneg)
    }
}

/// A monoid chart of rank `r`; p-divisible kinds hold exponents of level
/// at most `level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MonoidChart {
    pub kind: ChartKind,
    pub rank: usize,
    pub level: u32,
    pub p: u64,
}

impl MonoidChart {
    pub fn new(kind: ChartKind, rank: usize, level: u32, p: u64) -> Self {
        let level = if kind.is_padic() { level } else { 0 };
        MonoidChart { kind, rank, level, p }
    }

    pub fn contains(&self, x: &[PadicExponent]) -> bool {
        x.len() == self.rank
            && x.iter().all(|c| {
                c.prime() == self.p && c.level() <= self.level && (!self.kind.is_nonneg() || c.signum() >= 0)
            })
    }

    /// The perfection `P(M)` of coherent `p`-power-root sequences, read
    /// through `(x_k) ↦ x_0`. For p-divisible charts every element has all
    /// roots, modeled by raising the level bound by `extra`; for free charts
    /// only the zero sequence is coherent.
    pub fn perfection(&self, extra: u32) -> MonoidChart {
        if self.kind.is_padic() {
            MonoidChart { level: self.level + extra, ..*self }
        } else {
            MonoidChart { rank: 0, ..*self }
        }
    }

    /// The coherent root sequence `(x, x/p, …, x/p^depth)` of `x`.
    pub fn root_sequence(&self, x: &[PadicExponent], depth: u32) -> Result<Vec<Vec<PadicExponent>>, LatticeError> {
        if !self.contains(x) {
            return Err(LatticeError::OutsideChart(format!("{x:?}")));
        }
        let mut out = vec![x.to_vec()];
        for _ in 0..depth {
            let next: Vec<PadicExponent> = out.last().expect("non-empty").iter().map(|c| c.div_p()).collect();
            if !self.contains(&next) {
                return Err(LatticeError::OutsideChart(format!("{next:?}")));
            }
            out.push(next);
        }
        Ok(out)
    }

    /// `x ↦ p·x`.
    pub fn frobenius_monoid(&self, x: &[PadicExponent]) -> Result<Vec<PadicExponent>, LatticeError> {
        if !self.contains(x) {
            return Err(LatticeError::OutsideChart(format!("{x:?}")));
        }
        Ok(x.iter().map(|c| c.mul_p()).collect::<Result<_, _>>()?)
    }

    /// The unique `y` in the chart with `p·y = x`, when it exists.
    pub fn frobenius_preimage(&self, x: &[PadicExponent]) -> Option<Vec<PadicExponent>> {
        let y: Vec<PadicExponent> = x.iter().map(|c| c.div_p()).collect();
        self.contains(&y).then_some(y)
    }

    /// Whether Frobenius maps the chart onto its level-`(m−1)` part; false
    /// for free charts, where `N → pN` misses `1`.
    pub fn frobenius_is_surjective(&self) -> bool {
        self.kind.is_padic() || self.rank == 0
    }
}

/// Whether the ring is the good-reduction chart `c = 1` or the semistable
/// chart `c = π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CMode {
    One,
    Pi,
}

impl fmt::Display for CMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CMode::One => write!(f, "one"),
            CMode::Pi => write!(f, "pi"),
        }
    }
}

/// Exponents of `[T_1], …, [T_{d+1}], [π]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVec {
    coords: Vec<PadicExponent>,
}

impl ExponentVec {
    pub fn zero(d: usize, p: u64) -> Self {
        ExponentVec { coords: vec![PadicExponent::zero(p); d + 2] }
    }

    pub fn from_coords(coords: Vec<PadicExponent>) -> Self {
        assert!(coords.len() >= 3, "need at least T_1, T_2 and π");
        ExponentVec { coords }
    }

    /// `α·e_{T_i}` for `1 ≤ i ≤ d+1`.
    pub fn t_power(d: usize, i: usize, alpha: PadicExponent) -> Self {
        let mut e = ExponentVec::zero(d, alpha.prime());
        e.coords[i - 1] = alpha;
        e
    }

    pub fn pi_power(d: usize, alpha: PadicExponent) -> Self {
        let mut e = ExponentVec::zero(d, alpha.prime());
        e.coords[d + 1] = alpha;
        e
    }

    /// The lattice relation `(1, …, 1, 0, …, 0, −1)` with `r` ones.
    pub fn relation(d: usize, r: usize, p: u64) -> Self {
        let mut e = ExponentVec::zero(d, p);
        for c in e.coords.iter_mut().take(r) {
            *c = PadicExponent::integer(1, p);
        }
        e.coords[d + 1] = PadicExponent::integer(-1, p);
        e
    }

    pub fn d(&self) -> usize {
        self.coords.len() - 2
    }

    pub fn p(&self) -> u64 {
        self.coords[0].prime()
    }

    pub fn coords(&self) -> &[PadicExponent] {
        &self.coords
    }

    /// Exponent of `[T_i]`, `1 ≤ i ≤ d+1`.
    pub fn t(&self, i: usize) -> PadicExponent {
        self.coords[i - 1]
    }

    pub fn pi(&self) -> PadicExponent {
        self.coords[self.d() + 1]
    }

    pub fn with_t(&self, i: usize, alpha: PadicExponent) -> Self {
        let mut e = self.clone();
        e.coords[i - 1] = alpha;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LatticeError> {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a.checked_add(b)).collect::<Result<_, _>>()?;
        Ok(ExponentVec { coords })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LatticeError> {
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a.checked_sub(b)).collect::<Result<_, _>>()?;
        Ok(ExponentVec { coords })
    }

    pub fn neg(&self) -> Self {
        ExponentVec { coords: self.coords.iter().map(|c| c.neg()).collect() }
    }

    pub fn scale_int(&self, k: i64) -> Result<Self, LatticeError> {
        let coords = self.coords.iter().map(|c| c.checked_mul_int(k)).collect::<Result<_, _>>()?;
        Ok(ExponentVec { coords })
    }

    pub fn scale(&self, k: &PadicExponent) -> Result<Self, LatticeError> {
        let mut out = self.scale_int(k.numerator())?;
        for _ in 0..k.level() {
            out = ExponentVec { coords: out.coords.iter().map(|c| c.div_p()).collect() };
        }
        Ok(out)
    }

    /// `p·e`, the action of Frobenius on exponents.
    pub fn mul_p(&self) -> Result<Self, LatticeError> {
        self.scale_int(self.p() as i64)
    }

    pub fn max_level(&self) -> u32 {
        self.coords.iter().map(|c| c.level()).max().unwrap_or(0)
    }

    /// Every coordinate has level at most `m` and absolute value at most `bound`.
    pub fn within(&self, m: u32, bound: u64) -> bool {
        self.coords.iter().all(|c| c.level() <= m && c.abs_at_most(bound))
    }

    /// Sector constraints: in `π` mode the first `r` coordinates and the
    /// `π`-coordinate are nonnegative; in `c = 1` mode the `π`-coordinate is
    /// zero and the torus coordinates are unconstrained.
    pub fn in_sector(&self, mode: CMode, r: usize) -> bool {
        match mode {
            CMode::Pi => self.coords[..r].iter().all(|c| c.signum() >= 0) && self.pi().signum() >= 0,
            CMode::One => self.pi().is_zero(),
        }
    }

    /// Canonical form under the relation: subtract `μ·(1, …, 1, 0, …, −1)`
    /// with `μ` the minimum of the first `r` coordinates.
    pub fn normalize_semistable(&self, r: usize) -> Result<Self, LatticeError> {
        let mu = self.coords[..r].iter().copied().reduce(PadicExponent::min).expect("r ≥ 1");
        if mu.is_zero() {
            return Ok(self.clone());
        }
        self.sub(&ExponentVec::relation(self.d(), r, self.p()).scale(&mu)?)
    }

    pub fn normalize(&self, mode: CMode, r: usize) -> Result<Self, LatticeError> {
        match mode {
            CMode::Pi => self.normalize_semistable(r),
            CMode::One => Ok(self.clone()),
        }
    }

    /// Strings `"a/p^l"` per coordinate, for reports.
    pub fn to_strings(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_string()).collect()
    }

    pub fn parse(items: &[String], p: u64) -> Result<Self, LatticeError> {
        let coords = items
            .iter()
            .map(|s| PadicExponent::parse(s, p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| LatticeError::OutsideChart(e.to_string()))?;
        if coords.len() < 3 {
            return Err(LatticeError::OutsideChart("too few coordinates".into()));
        }
        Ok(ExponentVec { coords })
    }
}

impl fmt::Display for ExponentVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.d();
        let ts: Vec<String> = self.coords[..=d].iter().map(|c| c.to_string()).collect();
        write!(f, "({} | {})", ts.join(", "), self.pi())
    }
}

/// A homomorphism `Z[1/p]^a ⊕ Z^b → Z[1/p]^c` given by an integer matrix on
/// generators. Columns follow the order of the source charts.
#[derive(Debug, Clone)]
pub struct LatticeMap {
    p: u64,
    divisible: Vec<bool>,
    matrix: Vec<Vec<i64>>,
}

impl LatticeMap {
    /// The map on group completions induced by `matrix` from the direct sum
    /// of `sources` to `target`.
    pub fn from_charts(sources: &[MonoidChart], target: &MonoidChart, matrix: Vec<Vec<i64>>) -> Result<Self, LatticeError> {
        let p = target.p;
        let divisible: Vec<bool> =
            sources.iter().flat_map(|c| std::iter::repeat_n(c.kind.is_padic(), c.rank)).collect();
        if matrix.len() != target.rank {
            return Err(LatticeError::Dimension { expected: target.rank, got: matrix.len() });
        }
        for row in &matrix {
            if row.len() != divisible.len() {
                return Err(LatticeError::Dimension { expected: divisible.len(), got: row.len() });
            }
        }
        if sources.iter().any(|c| c.p != p) {
            return Err(LatticeError::Unsupported("charts over different primes".into()));
        }
        if !target.kind.is_padic() {
            let hits_divisible = matrix.iter().any(|row| row.iter().zip(&divisible).any(|(&x, &dv)| dv && x != 0));
            if hits_divisible {
                return Err(LatticeError::Unsupported(
                    "a p-divisible group has no nonzero map to a free group".into(),
                ));
            }
        }
        Ok(LatticeMap { p, divisible, matrix })
    }

    pub fn source_dim(&self) -> usize {
        self.divisible.len()
    }

    /// Image of a source vector.
    pub fn apply(&self, x: &[PadicExponent]) -> Result<Vec<PadicExponent>, LatticeError> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter().zip(x).try_fold(PadicExponent::zero(self.p), |acc, (&a, c)| {
                    Ok::<_, LatticeError>(acc.checked_add(&c.checked_mul_int(a)?)?)
                })
            })
            .collect()
    }
}

fn checked(x: Option<i128>) -> Result<i128, LatticeError> {
    x.ok_or(LatticeError::Overflow)
}

/// Integer kernel of an integer matrix, by unimodular column operations.
fn integer_kernel(m: &[Vec<i128>], cols: usize) -> Result<Vec<Vec<i128>>, LatticeError> {
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut u: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();
    let mut piv = 0;
    for row in 0..a.len() {
        if piv == cols {
            break;
        }
        for j in piv + 1..cols {
            let (x, y) = (a[row][piv], a[row][j]);
            if y == 0 {
                continue;
            }
            let g = x.extended_gcd(&y);
            let (s, t, d) = (g.x, g.y, g.gcd);
            let (xd, yd) = (x / d, y / d);
            for mat in [&mut a, &mut u] {
                for r in mat.iter_mut() {
                    let (cp, cj) = (r[piv], r[j]);
                    r[piv] = checked(cp.checked_mul(s).and_then(|v| cj.checked_mul(t).and_then(|w| v.checked_add(w))))?;
                    r[j] = checked(cj.checked_mul(xd).and_then(|v| cp.checked_mul(yd).and_then(|w| v.checked_sub(w))))?;
                }
            }
        }
        if a[row][piv] != 0 {
            piv += 1;
        }
    }
    Ok((piv..cols).map(|j| u.iter().map(|r| r[j]).collect()).collect())
}

/// Borrows row `pivot` shared and row `target` mutably; the rows differ.
fn pivot_and_target<T>(m: &mut [Vec<T>], pivot: usize, target: usize) -> (&[T], &mut [T]) {
    if pivot < target {
        let (lo, hi) = m.split_at_mut(target);
        (&lo[pivot], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(pivot);
        (&hi[0], &mut lo[target])
    }
}

/// Row Hermite normal form: positive pivots, entries above pivots reduced,
/// zero rows dropped.
fn hermite_rows(rows: &[Vec<i128>]) -> Result<Vec<Vec<i128>>, LatticeError> {
    let mut a: Vec<Vec<i128>> = rows.to_vec();
    let cols = a.first().map_or(0, |r| r.len());
    let mut top = 0;
    for c in 0..cols {
        for i in top + 1..a.len() {
            while a[i][c] != 0 {
                let q = a[top][c].checked_div(a[i][c]).unwrap_or(0);
                let (src, dst) = pivot_and_target(&mut a, i, top);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = checked(s.checked_mul(q).and_then(|v| d.checked_sub(v)))?;
                }
                a.swap(top, i);
            }
        }
        if top < a.len() && a[top][c] != 0 {
            if a[top][c] < 0 {
                for v in a[top].iter_mut() {
                    *v = -*v;
                }
            }
            for i in 0..top {
                let q = a[i][c].div_euclid(a[top][c]);
                let (src, dst) = pivot_and_target(&mut a, top, i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = checked(s.checked_mul(q).and_then(|v| d.checked_sub(v)))?;
                }
            }
            top += 1;
        }
    }
    a.truncate(top);
    Ok(a)
}

/// `{z ∈ Z^b : p^k z ∈ Λ for some k}` for the lattice `Λ` spanned by `rows`.
fn saturate_at_p(rows: Vec<Vec<i128>>, p: u64) -> Result<Vec<Vec<i128>>, LatticeError> {
    let field = RingParams::new(p, 1).map_err(|e| LatticeError::Unsupported(e.to_string()))?;
    let mut basis = hermite_rows(&rows)?;
    loop {
        if basis.is_empty() {
            return Ok(basis);
        }
        let k = basis.len();
        let b = basis[0].len();
        let mut transposed = Matrix::zeros(b, k, field);
        for (i, row) in basis.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                transposed.set(j, i, x.rem_euclid(p as i128) as u64);
            }
        }
        let gens = snf_local(&transposed).kernel_generators();
        let Some(x) = gens.into_iter().find(|g| g.iter().any(|&v| v != 0)) else {
            return Ok(basis);
        };
        let mut v = vec![0i128; b];
        for (coef, row) in x.iter().zip(&basis) {
            for (vj, &rj) in v.iter_mut().zip(row) {
                *vj = checked((*coef as i128).checked_mul(rj).and_then(|t| vj.checked_add(t)))?;
            }
        }
        let new: Vec<i128> = v.iter().map(|x| x / p as i128).collect();
        basis.push(new);
        basis = hermite_rows(&basis)?;
    }
}

/// Solves `A·α = rhs` over `Q` for injective `A`; `None` if inconsistent.
fn rational_solve(a: &[Vec<BigRational>], rhs: &[BigRational], unknowns: usize) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let mut m: Vec<Vec<BigRational>> =
        a.iter().zip(rhs).map(|(row, r)| row.iter().cloned().chain(std::iter::once(r.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut top = 0;
    for c in 0..unknowns {
        let Some(pr) = (top..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(top, pr);
        let inv = m[top][c].recip();
        for v in m[top].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != top && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src, dst) = pivot_and_target(&mut m, top, i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d -= s * &f;
                }
            }
        }
        pivots.push(c);
        top += 1;
    }
    if m[top..].iter().any(|row| !row[unknowns].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); unknowns];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = m[i][unknowns].clone();
    }
    Some(x)
}

fn to_padic(x: &BigRational, p: u64) -> Result<PadicExponent, LatticeError> {
    let mut den = x.denom().clone();
    let pb = BigInt::from(p);
    let mut level = 0u32;
    while den > BigInt::one() {
        let (q, r) = den.div_rem(&pb);
        if !r.is_zero() {
            return Err(LatticeError::Unsupported("denominator prime to p in a kernel vector".into()));
        }
        den = q;
        level += 1;
    }
    let num = x.numer().to_i64().ok_or(LatticeError::Overflow)?;
    Ok(PadicExponent::new(num, level, p))
}

/// A basis of `L = ker(Z[1/p]^a ⊕ Z^b → Z[1/p]^c)`. The kernel must be
/// finitely generated, which holds exactly when the p-divisible part maps
/// injectively; this is checked. Each basis vector has its first nonzero
/// coordinate positive and is re-checked by substitution.
pub fn kernel_l(map: &LatticeMap) -> Result<Vec<Vec<PadicExponent>>, LatticeError> {
    let p = map.p;
    let div_cols: Vec<usize> = (0..map.source_dim()).filter(|&j| map.divisible[j]).collect();
    let int_cols: Vec<usize> = (0..map.source_dim()).filter(|&j| !map.divisible[j]).collect();
    let a_rat: Vec<Vec<BigRational>> = map
        .matrix
        .iter()
        .map(|row| div_cols.iter().map(|&j| BigRational::from_integer(row[j].into())).collect())
        .collect();
    if !div_cols.is_empty() {
        let mut rank_check = a_rat.clone();
        let rank = {
            let cols = div_cols.len();
            let mut top = 0;
            for c in 0..cols {
                if let Some(pr) = (top..rank_check.len()).find(|&i| !rank_check[i][c].is_zero()) {
                    rank_check.swap(top, pr);
                    let inv = rank_check[top][c].recip();
                    for i in 0..rank_check.len() {
                        if i != top {
                            let f = &rank_check[i][c] * &inv;
                            let (src, dst) = pivot_and_target(&mut rank_check, top, i);
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d -= s * &f;
                            }
                        }
                    }
                    top += 1;
                }
            }
            top
        };
        if rank < div_cols.len() {
            return Err(LatticeError::Unsupported(
                "the p-divisible part does not map injectively, so L is not finitely generated".into(),
            ));
        }
    }
    let full: Vec<Vec<i128>> = map
        .matrix
        .iter()
        .map(|row| div_cols.iter().chain(&int_cols).map(|&j| row[j] as i128).collect())
        .collect();
    let kernel = integer_kernel(&full, div_cols.len() + int_cols.len())?;
    let projected: Vec<Vec<i128>> = kernel.iter().map(|v| v[div_cols.len()..].to_vec()).collect();
    let z_basis = if int_cols.is_empty() { Vec::new() } else { saturate_at_p(projected, p)? };
    let mut out = Vec::with_capacity(z_basis.len());
    for z in z_basis {
        let rhs: Vec<BigRational> = map
            .matrix
            .iter()
            .map(|row| {
                let s: i128 = int_cols.iter().zip(&z).map(|(&j, &zj)| row[j] as i128 * zj).sum();
                BigRational::from_integer((-s).into())
            })
            .collect();
        let alpha = rational_solve(&a_rat, &rhs, div_cols.len()).ok_or(LatticeError::Verification)?;
        let mut v = vec![PadicExponent::zero(p); map.source_dim()];
        for (&j, a) in div_cols.iter().zip(&alpha) {
            v[j] = to_padic(a, p)?;
        }
        for (&j, &zj) in int_cols.iter().zip(&z) {
            v[j] = PadicExponent::integer(i64::try_from(zj).map_err(|_| LatticeError::Overflow)?, p);
        }
        if v.iter().find(|c| !c.is_zero()).is_some_and(|c| c.signum() < 0) {
            v = v.iter().map(|c| c.neg()).collect();
        }
        if map.apply(&v)?.iter().any(|c| !c.is_zero()) {
            return Err(LatticeError::Verification);
        }
        out.push(v);
    }
    Ok(out)
}

/// True when every entry of `v` is an integer and `v` equals `target` or
/// its negative.
pub fn same_up_to_sign(v: &[PadicExponent], target: &[i64]) -> bool {
    let p = v.first().map_or(2, |c| c.prime());
    let plus: Vec<PadicExponent> = target.iter().map(|&x| PadicExponent::integer(x, p)).collect();
    let minus: Vec<PadicExponent> = plus.iter().map(|c| c.neg()).collect();
    v == plus.as_slice() || v == minus.as_slice()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pe(n: i64, l: u32, p: u64) -> PadicExponent {
        PadicExponent::new(n, l, p)
    }

    fn ints(v: &[i64], p: u64) -> Vec<PadicExponent> {
        v.iter().map(|&x| PadicExponent::integer(x, p)).collect()
    }

    #[test]
    fn value_group_plus_integers_kernel() {
        let p = 3;
        let q = MonoidChart::new(ChartKind::PadicNonneg, 1, 4, p);
        let n = MonoidChart::new(ChartKind::FreeNonneg, 1, 0, p);
        let map = LatticeMap::from_charts(&[q, n], &q, vec![vec![1, 1]]).unwrap();
        assert_eq!(kernel_l(&map).unwrap(), vec![ints(&[1, -1], p)]);
    }

    #[test]
    fn torus_pairs_kernel() {
        for r in 1..=3 {
            let p = 2;
            let q = MonoidChart::new(ChartKind::PadicNonneg, r, 3, p);
            let n = MonoidChart::new(ChartKind::FreeNonneg, r, 0, p);
            let mut matrix = vec![vec![0i64; 2 * r]; r];
            for i in 0..r {
                matrix[i][i] = 1;
                matrix[i][r + i] = 1;
            }
            let basis = kernel_l(&LatticeMap::from_charts(&[q, n], &q, matrix).unwrap()).unwrap();
            assert_eq!(basis.len(), r);
            for (i, v) in basis.iter().enumerate() {
                let mut want = vec![0i64; 2 * r];
                want[i] = -1;
                want[r + i] = 1;
                assert!(same_up_to_sign(v, &want), "{v:?}");
            }
        }
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let q = MonoidChart::new(ChartKind::PadicGroup, 2, 2, 5);
        let map = LatticeMap::from_charts(&[q], &q, vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert!(kernel_l(&map).unwrap().is_empty());
    }

    #[test]
    fn p_divisible_kernel_is_rejected() {
        let q = MonoidChart::new(ChartKind::PadicGroup, 2, 2, 5);
        let t = MonoidChart::new(ChartKind::PadicGroup, 1, 2, 5);
        let map = LatticeMap::from_charts(&[q], &t, vec![vec![1, 1]]).unwrap();
        assert!(matches!(kernel_l(&map), Err(LatticeError::Unsupported(_))));
        let free = MonoidChart::new(ChartKind::FreeGroup, 1, 0, 5);
        assert!(LatticeMap::from_charts(&[q], &free, vec![vec![1, 0]]).is_err());
    }

    #[test]
    fn saturation_picks_up_p_divisible_coordinates() {
        let p = 2;
        let q = MonoidChart::new(ChartKind::PadicGroup, 1, 3, p);
        let z = MonoidChart::new(ChartKind::FreeGroup, 1, 0, p);
        let map = LatticeMap::from_charts(&[q, z], &q, vec![vec![4, 1]]).unwrap();
        assert_eq!(kernel_l(&map).unwrap(), vec![vec![pe(1, 2, p), pe(-1, 0, p)]]);
        let map = LatticeMap::from_charts(&[q, z], &q, vec![vec![3, 1]]).unwrap();
        assert_eq!(kernel_l(&map).unwrap(), vec![ints(&[1, -3], p)]);
    }

    #[test]
    fn perfection_and_frobenius() {
        let p = 3;
        let c = MonoidChart::new(ChartKind::PadicNonneg, 1, 2, p);
        assert_eq!(c.perfection(1).level, 3);
        let seq = c.perfection(1).root_sequence(&[pe(1, 0, p)], 3).unwrap();
        assert_eq!(seq[3], vec![pe(1, 3, p)]);
        assert_eq!(c.frobenius_monoid(&[pe(1, 2, p)]).unwrap(), vec![pe(1, 1, p)]);
        assert!(c.frobenius_is_surjective());
        let free = MonoidChart::new(ChartKind::FreeNonneg, 2, 0, p);
        assert_eq!(free.perfection(5).rank, 0);
        assert!(!free.frobenius_is_surjective());
        assert_eq!(free.frobenius_preimage(&ints(&[1, 0], p)), None);
    }

    #[test]
    fn semistable_normal_form_examples() {
        let p = 3;
        let d = 2;
        let e = ExponentVec::from_coords(ints(&[1, 1, 0, 0], p));
        assert_eq!(e.normalize_semistable(2).unwrap(), ExponentVec::from_coords(ints(&[0, 0, 0, 1], p)));
        let e = ExponentVec::from_coords(vec![pe(2, 0, p), pe(0, 0, p), pe(0, 0, p), pe(5, 0, p)]);
        assert_eq!(e.normalize_semistable(2).unwrap(), e);
        let e = ExponentVec::from_coords(vec![pe(3, 1, p), pe(1, 1, p), pe(0, 0, p), pe(0, 0, p)]);
        let want = ExponentVec::from_coords(vec![pe(2, 1, p), pe(0, 0, p), pe(0, 0, p), pe(1, 1, p)]);
        assert_eq!(e.normalize_semistable(2).unwrap(), want);
        assert_eq!(e.normalize(CMode::One, 2).unwrap(), e);
        assert_eq!(ExponentVec::relation(d, 2, p).to_strings(), vec!["1", "1", "0", "-1"]);
    }

    fn exponent_vec(p: u64) -> impl Strategy<Value = ExponentVec> {
        proptest::collection::vec((-20i64..20, 0u32..3), 4)
            .prop_map(move |cs| ExponentVec::from_coords(cs.into_iter().map(|(n, l)| pe(n, l, p)).collect()))
    }

    proptest! {
        #[test]
        fn normal_form_is_idempotent_and_orbit_constant(e in exponent_vec(3), k in -5i64..5, r in 1usize..=3) {
            let n = e.normalize_semistable(r).unwrap();
            prop_assert_eq!(n.normalize_semistable(r).unwrap(), n.clone());
            let shifted = e.add(&ExponentVec::relation(2, r, 3).scale_int(k).unwrap()).unwrap();
            prop_assert_eq!(shifted.normalize_semistable(r).unwrap(), n.clone());
            prop_assert!(n.coords()[..r].iter().any(|c| c.is_zero()));
        }

        #[test]
        fn frobenius_is_injective_and_hits_lower_level(n in -30i64..30, l in 1u32..4) {
            let p = 2;
            let c = MonoidChart::new(ChartKind::PadicGroup, 1, 4, p);
            let x = vec![pe(n, l, p)];
            let y = c.frobenius_monoid(&x).unwrap();
            prop_assert_eq!(c.frobenius_preimage(&y), Some(x.clone()));
            let lower = MonoidChart::new(ChartKind::PadicGroup, 1, 3, p);
            prop_assert!(lower.contains(&y));
        }

        #[test]
        fn kernel_vectors_map_to_zero(rows in proptest::collection::vec(proptest::collection::vec(-4i64..5, 4), 2)) {
            let p = 3;
            let q = MonoidChart::new(ChartKind::PadicGroup, 2, 3, p);
            let z = MonoidChart::new(ChartKind::FreeGroup, 2, 0, p);
            let Ok(map) = LatticeMap::from_charts(&[q, z], &q, rows) else { return Ok(()); };
            if let Ok(basis) = kernel_l(&map) {
                for v in basis {
                    prop_assert!(map.apply(&v).unwrap().iter().all(|c| c.is_zero()));
                }
            }
        }
    }
}
