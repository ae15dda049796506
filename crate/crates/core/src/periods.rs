//! Finite models of crystalline period rings at root level `m`.
//!
//! The base model is `Z/p^n⟨Z, Ξ⟩` where `Z` stands for `1 − [1̲]^{1/p^m}` and
//! `Ξ` for `ξ = [p̲] − p`. Inside it `q = (1−Z)^{p^m}` plays `[1̲]`, and
//! `t = p^m·log(1−Z)` plays `log [1̲]`. The geometric model attaches lattice
//! symbols `[T_1]^{α_1}⋯[T_{d+1}]^{α_{d+1}}[π]^β` with coefficients in
//! `Z/p^n⟨Z, Ξ, X, X_2, …, X_{d+1}⟩`, where `X_i` is `[T_i]⊗T_i^{−1} − 1` and
//! `X` is `[π]⊗u^{−1} − 1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dpring::{DPPoly, DpError, DpRing, Mono};
use crate::exactnum::{
    falling_factorial_mod, nilpotency_index, vp_factorial, ExactError, PadicExponent, RingParams, ValUnit,
};
use crate::lattice::{CMode, ExponentVec, LatticeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PeriodError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("invalid model descriptor: {0}")]
    Descriptor(String),
    #[error("exponent {alpha} has level above the model level {m}")]
    LevelOverflow { alpha: String, m: u32 },
    #[error("exponent {0} leaves the numerator bound or the sector")]
    ExponentOverflow(String),
    #[error("q^0 − 1 = 0 has no cofactor")]
    ZeroExponent,
    #[error("element involves X-variables where a base element is required")]
    NotBase,
    #[error("verification failed for {what}: {detail}")]
    Verification { what: String, detail: String },
    #[error("malformed serialized element: {0}")]
    Parse(String),
}

/// Parameters of a period model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodModelDesc {
    pub p: u64,
    pub n: u32,
    /// Root level: `Z` models `1 − [1̲]^{1/p^m}`.
    pub m: u32,
    /// Relative dimension; directions are `2, …, d+1`.
    pub d: usize,
    /// Semistable depth: `T_1⋯T_r = c`.
    pub r: usize,
    pub c_mode: CMode,
    /// Truncation degree in `Z` for finite modules and division caps.
    pub deg_z: u32,
    /// Truncation degree in each `X_i` for finite modules.
    pub deg_x: u32,
    /// Bound on `|p^m·α|` for every exponent coordinate `α`.
    pub numerator_bound: u64,
}

impl PeriodModelDesc {
    /// Descriptor with `deg_z = 2p^m`, `deg_x = 3` and numerator bound `2p`.
    pub fn with_defaults(p: u64, n: u32, m: u32, d: usize, r: usize, c_mode: CMode) -> Self {
        PeriodModelDesc {
            p,
            n,
            m,
            d,
            r,
            c_mode,
            deg_z: 2 * p.saturating_pow(m) as u32,
            deg_x: 3,
            numerator_bound: 2 * p,
        }
    }

    pub fn validate(&self) -> Result<RingParams, PeriodError> {
        let params = RingParams::new(self.p, self.n)?;
        let bad = |s: &str| Err(PeriodError::Descriptor(s.to_string()));
        if self.m < 1 {
            return bad("the root level m must be at least 1");
        }
        if self.d < 1 {
            return bad("the relative dimension d must be at least 1");
        }
        if self.d + 3 > crate::dpring::MAX_VARS {
            return bad("d is too large for the packed monomial representation");
        }
        if self.r < 1 || self.r > self.d + 1 {
            return bad("the depth r must satisfy 1 ≤ r ≤ d+1");
        }
        if self.deg_z < 1 || self.deg_x < 1 || self.numerator_bound < 1 {
            return bad("deg_z, deg_x and the numerator bound must be at least 1");
        }
        if self.p.checked_pow(self.m).is_none_or(|v| v > 1 << 20) {
            return bad("p^m is too large");
        }
        Ok(params)
    }
}

/// The level-`m` model of `A_cris/p^n` on the variables `Z, Ξ`.
#[derive(Debug)]
pub struct BaseModel {
    params: RingParams,
    m: u32,
    ring: Arc<DpRing>,
    q_m: DPPoly,
    q: DPPoly,
    tau: DPPoly,
    t: DPPoly,
    xi: DPPoly,
    wp: DPPoly,
    /// `γ_k(τ)` for `k = 0..tau_dp.len()`.
    tau_dp: Vec<DPPoly>,
    cofactors: Mutex<HashMap<PadicExponent, DPPoly>>,
}

impl BaseModel {
    pub fn new(params: RingParams, m: u32) -> Result<BaseModel, PeriodError> {
        if m < 1 {
            return Err(PeriodError::Descriptor("the root level m must be at least 1".into()));
        }
        let ring = DpRing::new(params, &["Z", "Ξ"])?;
        let one = DPPoly::one(&ring);
        let z = DPPoly::var(&ring, 0, 1);
        let q_m = &one - &z;
        let pm = params.p().checked_pow(m).ok_or(ExactError::Overflow)?;
        let q = one_minus_z_power(&ring, pm);
        let tau = q_m.log_unit()?;
        let t = tau.scale(params.p_pow(m as u64));
        let xi = DPPoly::var(&ring, 1, 1);
        let wp = &xi + &DPPoly::constant(&ring, params.p() as i64);
        let tau_dp = tau.dp_powers(series_bound(&params))?;
        Ok(BaseModel {
            params,
            m,
            ring,
            q_m,
            q,
            tau,
            t,
            xi,
            wp,
            tau_dp,
            cofactors: Mutex::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> RingParams {
        self.params
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn ring(&self) -> &Arc<DpRing> {
        &self.ring
    }

    /// `1 − Z`, standing for `[1̲]^{1/p^m}`.
    pub fn q_m(&self) -> &DPPoly {
        &self.q_m
    }

    /// `(1 − Z)^{p^m}`, standing for `[1̲]`.
    pub fn q(&self) -> &DPPoly {
        &self.q
    }

    /// `log(1 − Z)`.
    pub fn tau(&self) -> &DPPoly {
        &self.tau
    }

    /// `t = p^m·τ`.
    pub fn t(&self) -> &DPPoly {
        &self.t
    }

    pub fn xi(&self) -> &DPPoly {
        &self.xi
    }

    /// `p + Ξ`, standing for `[p̲]`.
    pub fn wp(&self) -> &DPPoly {
        &self.wp
    }

    /// `γ_k(τ)`.
    pub fn tau_dp(&self, k: usize) -> DPPoly {
        self.tau_dp.get(k).cloned().unwrap_or_else(|| self.tau.dp_power(k).expect("τ lies in the DP ideal"))
    }

    /// `q^α = (1−Z)^{p^m·α}`.
    pub fn q_power(&self, alpha: &PadicExponent) -> Result<DPPoly, PeriodError> {
        let e = alpha
            .scaled_numerator(self.m)
            .ok_or_else(|| PeriodError::LevelOverflow { alpha: alpha.to_string(), m: self.m })?;
        let pos = one_minus_z_power(&self.ring, e.unsigned_abs());
        if e >= 0 {
            Ok(pos)
        } else {
            Ok(pos.invert_unit()?)
        }
    }

    /// `(p^{m(b−1)}/b)·γ_{b−1}(τ)`, so that `t·w_b = γ_b(t)`.
    pub fn w_b(&self, b: u64) -> DPPoly {
        assert!(b >= 1);
        let pr = &self.params;
        let c = ValUnit::p_power((self.m as u64 * (b - 1)) as i64)
            .div(&ValUnit::from_int(b as i64, pr).expect("b ≥ 1"), pr)
            .to_residue(pr)
            .expect("p^{m(b−1)}/b is integral for m ≥ 1");
        if c == 0 {
            return DPPoly::zero(&self.ring);
        }
        self.tau_dp(b as usize - 1).scale(c)
    }

    /// `u_α = Σ_{k≥1} α^{k−1}(p^{m(k−1)}/k)·γ_{k−1}(τ)`, which satisfies
    /// `q^α − 1 = α·t·u_α`.
    pub fn unit_u_alpha(&self, alpha: i64) -> DPPoly {
        let pr = &self.params;
        let a = pr.reduce_i64(alpha);
        let mut acc = DPPoly::zero(&self.ring);
        for k in 1..=series_bound(pr) as u64 {
            let ak = pr.pow(a, k - 1);
            if ak == 0 {
                break;
            }
            let w = self.w_b(k);
            acc = &acc + &w.scale(ak);
        }
        acc
    }

    /// The images of `Z, Ξ` under the map from the level-`j` model into this
    /// one: `Z_j ↦ 1 − (1−Z)^{p^{m−j}}`, `Ξ ↦ Ξ`.
    pub fn level_images(&self, j: u32) -> Result<Vec<DPPoly>, PeriodError> {
        if j > self.m {
            return Err(PeriodError::Descriptor(format!("level {j} exceeds the model level {}", self.m)));
        }
        let one = DPPoly::one(&self.ring);
        let w = &one - &one_minus_z_power(&self.ring, self.params.p().pow(self.m - j));
        Ok(vec![w, self.xi.clone()])
    }

    /// A cofactor `c` with `c·(q^α − 1) = p^{max(v_p(α), 0)}·t`, as an exact
    /// identity. Integer `α` use `u_α`; fractional `α = a/p^j` use the
    /// substitution `W = 1 − (1−Z)^{p^{m−j}}` under which `q^α − 1 = −W·V`
    /// with `V` a unit.
    pub fn t_cofactor(&self, alpha: &PadicExponent) -> Result<DPPoly, PeriodError> {
        if alpha.is_zero() {
            return Err(PeriodError::ZeroExponent);
        }
        if let Some(c) = self.cofactors.lock().expect("cofactor cache").get(alpha) {
            return Ok(c.clone());
        }
        let c = if let Some(a) = alpha.as_integer() {
            self.integer_cofactor(a)?
        } else {
            self.fractional_cofactor(alpha)?
        };
        let lhs = c.mul(&(&self.q_power(alpha)? - &DPPoly::one(&self.ring)));
        let v = alpha.vp().expect("nonzero").max(0) as u64;
        let rhs = self.t.scale(self.params.p_pow(v));
        if lhs != rhs {
            return Err(PeriodError::Verification {
                what: format!("cofactor of q^{alpha} − 1"),
                detail: format!("c·(q^α − 1) = {lhs}, expected {rhs}"),
            });
        }
        self.cofactors.lock().expect("cofactor cache").insert(*alpha, c.clone());
        Ok(c)
    }

    fn integer_cofactor(&self, alpha: i64) -> Result<DPPoly, PeriodError> {
        let pr = &self.params;
        let v = crate::exactnum::vp_i64(alpha, pr.p());
        let unit = alpha / (pr.p() as i64).pow(v);
        let inv = pr.inv(pr.reduce_i64(unit))?;
        Ok(self.unit_u_alpha(alpha).invert_unit()?.scale(inv))
    }

    fn fractional_cofactor(&self, beta: &PadicExponent) -> Result<DPPoly, PeriodError> {
        let pr = &self.params;
        let j = beta.level();
        if j > self.m {
            return Err(PeriodError::LevelOverflow { alpha: beta.to_string(), m: self.m });
        }
        let a = beta.numerator();
        let one = DPPoly::one(&self.ring);
        let w = self.level_images(j)?.swap_remove(0);
        let one_minus_w = &one - &w;
        let geometric = |count: u64| {
            let mut acc = DPPoly::zero(&self.ring);
            let mut power = one.clone();
            for _ in 0..count {
                acc = &acc + &power;
                power = power.mul(&one_minus_w);
            }
            acc
        };
        let v = if a > 0 {
            geometric(a as u64)
        } else {
            let inv_power = one_minus_z_power(&self.ring, pr.p().pow(self.m - j) * a.unsigned_abs()).invert_unit()?;
            -&inv_power.mul(&geometric(a.unsigned_abs()))
        };
        let coeffs: Vec<u64> = (1..=fractional_series_bound(pr) as u64)
            .map(|k| {
                ValUnit::p_power(j as i64)
                    .mul(&ValUnit::factorial(k - 1, pr), pr)
                    .div(&ValUnit::from_int(k as i64, pr).expect("k ≥ 1"), pr)
                    .to_residue(pr)
                    .expect("p^j (k−1)!/k is integral for j ≥ 1")
            })
            .collect();
        let top = coeffs.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        let gw = w.dp_powers(top)?;
        let mut q_sum = DPPoly::zero(&self.ring);
        for (k, &c) in coeffs.iter().enumerate().take(top) {
            q_sum = &q_sum + &gw[k].scale(c);
        }
        Ok(q_sum.mul(&v.invert_unit()?))
    }
}

/// `(1−Z)^e = Σ_k (−1)^k·a(a−1)⋯(a−k+1)·Z^[k]` on variable 0 of `ring`.
fn one_minus_z_power(ring: &Arc<DpRing>, e: u64) -> DPPoly {
    let pr = ring.params();
    let kmax = e.min(nilpotency_index(&pr));
    let mut out = DPPoly::zero(ring);
    for k in 0..=kmax {
        let c = falling_factorial_mod(e as i64, k, &pr).value();
        let c = if k % 2 == 0 { c } else { pr.neg(c) };
        out.add_term(Mono::var(0, k as u32), c);
    }
    out
}

/// An index past which `p^{m(k−1)}/k ≡ 0 mod p^n` for every `m ≥ 1`.
fn series_bound(pr: &RingParams) -> usize {
    4 * pr.n() as usize + 8
}

/// An index past which `p^j (k−1)!/k ≡ 0 mod p^n` for every `j ≥ 1`.
fn fractional_series_bound(pr: &RingParams) -> usize {
    let mut k = 2u64;
    loop {
        if (k..k + 4 * pr.p()).all(|kk| {
            vp_factorial(kk - 1, pr.p()) >= pr.n() as u64 + crate::exactnum::vp_u64(kk, pr.p()) as u64
        }) {
            return k as usize;
        }
        k += 1;
    }
}

/// How a witness was verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessMode {
    /// The identity holds in the untruncated model.
    Exact,
    /// The identity holds modulo monomials beyond the degree cap.
    CapTruncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One verified claim in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEntry {
    pub claim_id: String,
    pub anchor: String,
    pub parameters: Value,
    pub witness: Value,
    pub mode: WitnessMode,
    pub status: Status,
}

impl ClaimEntry {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Ranges for [`verify_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantsConfig {
    /// Integer exponents `0 < |α| ≤ integer_range`.
    pub integer_range: i64,
    /// Fractional exponents `a/p^j`, `1 ≤ j ≤ m`, `|a| ≤ fraction_numerators`, `p ∤ a`.
    pub fraction_numerators: i64,
    /// Degree cap for the filtered division.
    pub cap: u32,
}

impl ConstantsConfig {
    /// `|α| ≤ 2p²`, `|a| ≤ p²`, cap `4p^m`.
    pub fn standard(p: u64, m: u32) -> Self {
        let p2 = (p * p) as i64;
        ConstantsConfig { integer_range: 2 * p2, fraction_numerators: p2, cap: 4 * p.pow(m) as u32 }
    }
}

/// Result of dividing `t` by `q^β − 1` for fractional `β`.
#[derive(Debug, Clone)]
pub struct FractionalDivision {
    /// The quotient pushed into the level-`m` model.
    pub quotient: DPPoly,
    pub exact: bool,
}

/// Divides `t` by `q^β − 1` for `β = a/p^j`. The solve runs in the level-`j`
/// model, whose divisor `(1−W)^a − 1` has unit pivot `−a`, and the quotient
/// is pushed into `base`. The product is re-checked in `base` up to `cap`.
pub fn divide_fractional(base: &BaseModel, beta: &PadicExponent, cap: u32) -> Result<FractionalDivision, PeriodError> {
    let j = beta.level();
    if j == 0 || j > base.m() {
        return Err(PeriodError::LevelOverflow { alpha: beta.to_string(), m: base.m() });
    }
    let low = BaseModel::new(base.params(), j)?;
    let den = &low.q_power(beta)? - &DPPoly::one(low.ring());
    let division = DPPoly::divide_filtered(low.t(), &den, cap)?;
    let images = base.level_images(j)?;
    let quotient = division.quotient.substitute(base.ring(), &images)?;
    let big_den = &base.q_power(beta)? - &DPPoly::one(base.ring());
    let product = big_den.mul(&quotient);
    if product.drop_above(cap) != base.t().drop_above(cap) {
        return Err(PeriodError::Verification {
            what: format!("t/(q^{beta} − 1)"),
            detail: "pushed-forward quotient fails re-multiplication below the cap".into(),
        });
    }
    let exact = division.exact || product == *base.t();
    Ok(FractionalDivision { quotient, exact })
}

/// Checks the three divisibility statements about `t` and `q^α − 1`:
/// (i) `t^{p−1} ∈ p·A`, (ii) `q^α − 1 = α·t·u_α` with `u_α` a unit, and
/// (iii) `t·p^{max(v_p(α),0)}/(q^α − 1)` exists.
pub fn verify_constants(base: &BaseModel, config: &ConstantsConfig) -> Result<Vec<ClaimEntry>, PeriodError> {
    let pr = base.params();
    let p = pr.p();
    let m = base.m();
    let one = DPPoly::one(base.ring());
    let mut out = Vec::new();
    let params = |extra: Value| {
        let mut v = json!({ "p": p, "n": pr.n(), "m": m });
        if let (Some(obj), Value::Object(more)) = (v.as_object_mut(), extra) {
            obj.extend(more);
        }
        v
    };

    let t_pow = base.t().pow(p - 1);
    let cofactor = base.tau().pow(p - 1).scale(pr.p_pow(m as u64 * (p - 1) - 1));
    if cofactor.scale(p) != t_pow {
        return Err(PeriodError::Verification { what: "t^{p−1}/p".into(), detail: format!("{cofactor}") });
    }
    out.push(ClaimEntry {
        claim_id: "constants.i".into(),
        anchor: "constants (i): t^{p−1} ∈ p·A_cris".into(),
        parameters: params(json!({})),
        witness: json!({ "cofactor": cofactor.to_json(), "form": "p^{m(p−1)−1}·τ^{p−1}" }),
        mode: WitnessMode::Exact,
        status: Status::Pass,
    });

    for alpha in -config.integer_range..=config.integer_range {
        let a = PadicExponent::integer(alpha, p);
        let u = base.unit_u_alpha(alpha);
        let lhs = &base.q_power(&a)? - &one;
        let rhs = base.t().mul(&u).scale_i64(alpha);
        if lhs != rhs {
            return Err(PeriodError::Verification {
                what: format!("q^{alpha} − 1 = α·t·u_α"),
                detail: format!("lhs {lhs}, rhs {rhs}"),
            });
        }
        let u_inv = u.invert_unit()?;
        out.push(ClaimEntry {
            claim_id: "constants.ii".into(),
            anchor: "constants (ii): q^α − 1 = α·t·u_α with u_α a unit".into(),
            parameters: params(json!({ "alpha": alpha })),
            witness: json!({ "u_alpha": u.to_json(), "u_alpha_inverse": u_inv.to_json() }),
            mode: WitnessMode::Exact,
            status: Status::Pass,
        });
        if alpha != 0 {
            let c = base.t_cofactor(&a)?;
            out.push(ClaimEntry {
                claim_id: "constants.iii".into(),
                anchor: "constants (iii): t·p^{max(v_p(α),0)}/(q^α − 1) ∈ A_cris".into(),
                parameters: params(json!({ "alpha": alpha.to_string() })),
                witness: json!({ "cofactor": c.to_json(), "method": "unit factorization" }),
                mode: WitnessMode::Exact,
                status: Status::Pass,
            });
        }
    }

    for j in 1..=m {
        for a in -config.fraction_numerators..=config.fraction_numerators {
            if a % p as i64 == 0 {
                continue;
            }
            let beta = PadicExponent::new(a, j, p);
            let division = divide_fractional(base, &beta, config.cap)?;
            let closed = base.t_cofactor(&beta)?;
            out.push(ClaimEntry {
                claim_id: "constants.iii".into(),
                anchor: "constants (iii): t/(q^α − 1) ∈ A_cris for v_p(α) < 0".into(),
                parameters: params(json!({ "alpha": beta.to_string(), "cap": config.cap })),
                witness: json!({
                    "quotient": division.quotient.to_json(),
                    "closed_form": closed.to_json(),
                    "pivot": pr.neg(pr.reduce_i64(a)),
                }),
                mode: if division.exact { WitnessMode::Exact } else { WitnessMode::CapTruncated },
                status: Status::Pass,
            });
        }
    }
    Ok(out)
}

/// An element of the geometric model: a finitely supported map from lattice
/// exponents to coefficients in the model's DP ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodElem {
    ring: Arc<DpRing>,
    terms: BTreeMap<ExponentVec, DPPoly>,
}

impl PeriodElem {
    pub fn zero(ring: &Arc<DpRing>) -> PeriodElem {
        PeriodElem { ring: Arc::clone(ring), terms: BTreeMap::new() }
    }

    pub fn ring(&self) -> &Arc<DpRing> {
        &self.ring
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVec, &DPPoly)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &ExponentVec) -> DPPoly {
        self.terms.get(e).cloned().unwrap_or_else(|| DPPoly::zero(&self.ring))
    }

    /// Adds `c` at the already-normalized exponent `e`.
    pub fn add_term(&mut self, e: ExponentVec, c: &DPPoly) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => {
                *slot = &*slot + c;
                if slot.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    pub fn add(&self, other: &PeriodElem) -> PeriodElem {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &PeriodElem) -> PeriodElem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PeriodElem {
        self.map_coeffs(|c| -c)
    }

    pub fn scale(&self, c: u64) -> PeriodElem {
        self.map_coeffs(|x| x.scale(c))
    }

    /// Multiplies every coefficient by `c`, which carries no lattice part.
    pub fn mul_coeff(&self, c: &DPPoly) -> PeriodElem {
        self.map_coeffs(|x| x.mul(c))
    }

    /// Applies `f` to every coefficient, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&DPPoly) -> DPPoly) -> PeriodElem {
        let mut out = PeriodElem::zero(&self.ring);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    /// Applies a fallible `f` to every coefficient.
    pub fn try_map_coeffs<E>(&self, f: impl Fn(&DPPoly) -> Result<DPPoly, E>) -> Result<PeriodElem, E> {
        let mut out = PeriodElem::zero(&self.ring);
        for (e, c) in &self.terms {
            let v = f(c)?;
            if !v.is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        Ok(out)
    }

    /// The `Ξ`-degree-`k` part of each coefficient.
    pub fn xi_component(&self, k: u32) -> PeriodElem {
        self.map_coeffs(|c| {
            let parts = c.split_by_var(XI);
            match parts.get(&k) {
                Some(part) => {
                    let mut single = BTreeMap::new();
                    single.insert(k, part.clone());
                    DPPoly::join_by_var(c.ring(), XI, &single)
                }
                None => DPPoly::zero(c.ring()),
            }
        })
    }
}

impl fmt::Display for PeriodElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[T]^{e}·({})", c.render_named())?;
        }
        Ok(())
    }
}

const Z: usize = 0;
const XI: usize = 1;
const X_PI: usize = 2;

/// The geometric model `A_model ⊂ M_model` for one descriptor.
#[derive(Debug)]
pub struct Model {
    desc: PeriodModelDesc,
    base: BaseModel,
    ring: Arc<DpRing>,
    /// `γ_b(q − 1)` and `γ_b(q^{−1} − 1)` in the model ring.
    eps_fwd: Vec<DPPoly>,
    eps_inv: Vec<DPPoly>,
    q_cache: Mutex<HashMap<PadicExponent, DPPoly>>,
    sigma_cache: Mutex<HashMap<(usize, u32, bool), DPPoly>>,
}

impl Model {
    pub fn build(desc: PeriodModelDesc) -> Result<Model, PeriodError> {
        let params = desc.validate()?;
        let base = BaseModel::new(params, desc.m)?;
        let names: Vec<String> = ["Z", "Ξ", "X"]
            .iter()
            .map(|s| s.to_string())
            .chain((2..=desc.d + 1).map(|i| format!("X{i}")))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let ring = DpRing::new(params, &refs)?;
        let embed = |x: &DPPoly| x.relabel(&ring, &[Z, XI]);
        let one = DPPoly::one(base.ring());
        let top = (params.n() / desc.m + 1) as usize;
        let eps_fwd = (&base.q - &one).dp_powers(top)?.iter().map(embed).collect();
        let q_inv = base.q.invert_unit()?;
        let eps_inv = (&q_inv - &one).dp_powers(top)?.iter().map(embed).collect();
        Ok(Model {
            desc,
            base,
            ring,
            eps_fwd,
            eps_inv,
            q_cache: Mutex::new(HashMap::new()),
            sigma_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn desc(&self) -> &PeriodModelDesc {
        &self.desc
    }

    pub fn base(&self) -> &BaseModel {
        &self.base
    }

    pub fn ring(&self) -> &Arc<DpRing> {
        &self.ring
    }

    pub fn params(&self) -> RingParams {
        self.base.params
    }

    pub fn p(&self) -> u64 {
        self.base.params.p()
    }

    pub fn d(&self) -> usize {
        self.desc.d
    }

    pub fn r(&self) -> usize {
        self.desc.r
    }

    pub fn mode(&self) -> CMode {
        self.desc.c_mode
    }

    /// Directions `2, …, d+1`.
    pub fn directions(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.desc.d + 1
    }

    /// Variable index of `X_i`, `2 ≤ i ≤ d+1`.
    pub fn x_var(&self, i: usize) -> usize {
        assert!((2..=self.desc.d + 1).contains(&i), "direction {i} out of range");
        i + 1
    }

    /// Variable index of `X`.
    pub fn pi_var(&self) -> usize {
        X_PI
    }

    pub fn z_var(&self) -> usize {
        Z
    }

    pub fn xi_var(&self) -> usize {
        XI
    }

    /// A base element as a coefficient in the model ring.
    pub fn embed(&self, x: &DPPoly) -> DPPoly {
        x.relabel(&self.ring, &[Z, XI])
    }

    /// The base element underlying a coefficient free of `X`-variables.
    pub fn to_base(&self, x: &DPPoly) -> Result<DPPoly, PeriodError> {
        let mut out = DPPoly::zero(self.base.ring());
        for (m, &c) in x.terms() {
            if (2..self.ring.nvars()).any(|v| m.exp(v) > 0) {
                return Err(PeriodError::NotBase);
            }
            out.add_term(Mono::from_exps(&[m.exp(Z), m.exp(XI)]), c);
        }
        Ok(out)
    }

    pub fn t(&self) -> DPPoly {
        self.embed(self.base.t())
    }

    /// `q^α` in the model ring, cached.
    pub fn q_power(&self, alpha: &PadicExponent) -> Result<DPPoly, PeriodError> {
        if let Some(v) = self.q_cache.lock().expect("q cache").get(alpha) {
            return Ok(v.clone());
        }
        let v = self.embed(&self.base.q_power(alpha)?);
        self.q_cache.lock().expect("q cache").insert(*alpha, v.clone());
        Ok(v)
    }

    /// Puts an exponent into normal form, then checks it against the model limits.
    pub fn normalize(&self, e: &ExponentVec) -> Result<ExponentVec, PeriodError> {
        let e = e.normalize(self.desc.c_mode, self.desc.r)?;
        let bound = self.desc.numerator_bound as i64;
        let fits = e
            .coords()
            .iter()
            .all(|c| c.scaled_numerator(self.desc.m).is_some_and(|s| s.abs() <= bound));
        if !fits || !e.in_sector(self.desc.c_mode, self.desc.r) {
            return Err(PeriodError::ExponentOverflow(e.to_string()));
        }
        Ok(e)
    }

    pub fn zero(&self) -> PeriodElem {
        PeriodElem::zero(&self.ring)
    }

    pub fn one(&self) -> PeriodElem {
        self.scalar(&DPPoly::one(&self.ring))
    }

    /// `c·[T]^0` for a coefficient `c` of the model ring.
    pub fn scalar(&self, c: &DPPoly) -> PeriodElem {
        let mut out = self.zero();
        out.add_term(ExponentVec::zero(self.desc.d, self.p()), c);
        out
    }

    /// `c·[T]^e`.
    pub fn monomial(&self, e: &ExponentVec, c: &DPPoly) -> Result<PeriodElem, PeriodError> {
        let mut out = self.zero();
        out.add_term(self.normalize(e)?, c);
        Ok(out)
    }

    /// `[T]^e`.
    pub fn lattice(&self, e: &ExponentVec) -> Result<PeriodElem, PeriodError> {
        self.monomial(e, &DPPoly::one(&self.ring))
    }

    /// `[T_i]^α`, `1 ≤ i ≤ d+1`.
    pub fn t_symbol(&self, i: usize, alpha: PadicExponent) -> Result<PeriodElem, PeriodError> {
        self.lattice(&ExponentVec::t_power(self.desc.d, i, alpha))
    }

    /// `[π]^α`.
    pub fn pi_symbol(&self, alpha: PadicExponent) -> Result<PeriodElem, PeriodError> {
        self.lattice(&ExponentVec::pi_power(self.desc.d, alpha))
    }

    pub fn mul(&self, a: &PeriodElem, b: &PeriodElem) -> Result<PeriodElem, PeriodError> {
        let mut out = self.zero();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let prod = ca.mul(cb);
                if prod.is_zero() {
                    continue;
                }
                out.add_term(self.normalize(&ea.add(eb)?)?, &prod);
            }
        }
        Ok(out)
    }

    /// `(1 + v)^{−1}` for a variable `v`.
    pub fn one_plus_var_inverse(&self, v: usize) -> DPPoly {
        (&DPPoly::one(&self.ring) + &DPPoly::var(&self.ring, v, 1)).invert_unit().expect("unit constant term")
    }

    /// The chart coordinate `T_j` in terms of lattice symbols and `X`-variables:
    /// `T_j = [T_j](1+X_j)^{−1}` for `j ≥ 2`; `T_1 = [T_1](1+X)^{−1}Π_{2≤j≤r}(1+X_j)`
    /// in `π` mode and `T_1 = Π_{2≤j≤r}[T_j]^{−1}(1+X_j)` in `c = 1` mode.
    pub fn chart_coordinate(&self, j: usize) -> Result<PeriodElem, PeriodError> {
        let p = self.p();
        let one = PadicExponent::integer(1, p);
        let ring = &self.ring;
        if j >= 2 {
            let c = self.one_plus_var_inverse(self.x_var(j));
            return self.monomial(&ExponentVec::t_power(self.desc.d, j, one), &c);
        }
        let mut c = DPPoly::one(ring);
        for k in 2..=self.desc.r {
            c = c.mul(&(&DPPoly::one(ring) + &DPPoly::var(ring, self.x_var(k), 1)));
        }
        match self.desc.c_mode {
            CMode::Pi => {
                c = c.mul(&self.one_plus_var_inverse(X_PI));
                self.monomial(&ExponentVec::t_power(self.desc.d, 1, one), &c)
            }
            CMode::One => {
                let mut e = ExponentVec::zero(self.desc.d, p);
                for k in 2..=self.desc.r {
                    e = e.with_t(k, one.neg());
                }
                self.monomial(&e, &c)
            }
        }
    }

    /// The `σ_i`-eigenvalue exponent of `[T]^e`: `e_i − e_1` for `i ≤ r`,
    /// otherwise `e_i`.
    pub fn eigen_exponent(&self, e: &ExponentVec, i: usize) -> Result<PadicExponent, PeriodError> {
        if i <= self.desc.r {
            Ok(e.t(i).checked_sub(&e.t(1))?)
        } else {
            Ok(e.t(i))
        }
    }

    /// `σ_i(X_i^[k])` (or `σ_i^{−1}`) in the variable `v = X_i`:
    /// `Σ_b γ_b(ε)(1+X_i)^b X_i^[k−b]` with `ε = q^{±1} − 1`.
    fn sigma_x_power(&self, v: usize, k: u32, inverse: bool) -> DPPoly {
        let key = (v, k, inverse);
        if let Some(x) = self.sigma_cache.lock().expect("σ cache").get(&key) {
            return x.clone();
        }
        let pr = self.params();
        let eps = if inverse { &self.eps_inv } else { &self.eps_fwd };
        let mut out = DPPoly::zero(&self.ring);
        for (b, eb) in eps.iter().enumerate().take(k as usize + 1) {
            if eb.is_zero() {
                continue;
            }
            let b = b as u32;
            let mut shape = DPPoly::zero(&self.ring);
            for c in 0..=b {
                let ff = falling_factorial_mod(b as i64, c as u64, &pr).value();
                let binom = crate::exactnum::binomial_mod((k - b + c) as u64, c as u64, &pr);
                shape.add_term(Mono::var(v, k - b + c), pr.mul(ff, binom));
            }
            out = &out + &eb.mul(&shape);
        }
        self.sigma_cache.lock().expect("σ cache").insert(key, out.clone());
        out
    }

    /// `σ_i` (or its inverse) on a coefficient: `X_i ↦ q^{±1}(1+X_i) − 1`.
    pub fn sigma_coeff(&self, i: usize, c: &DPPoly, inverse: bool) -> DPPoly {
        let v = self.x_var(i);
        let parts = c.split_by_var(v);
        let mut out = DPPoly::zero(&self.ring);
        for (k, part) in &parts {
            if *k == 0 {
                out = &out + part;
            } else {
                out = &out + &part.mul(&self.sigma_x_power(v, *k, inverse));
            }
        }
        out
    }

    fn sigma_impl(&self, i: usize, x: &PeriodElem, inverse: bool) -> Result<PeriodElem, PeriodError> {
        let mut out = self.zero();
        for (e, c) in &x.terms {
            let alpha = self.eigen_exponent(e, i)?;
            let alpha = if inverse { alpha.neg() } else { alpha };
            let mut v = self.sigma_coeff(i, c, inverse);
            if !alpha.is_zero() {
                v = v.mul(&self.q_power(&alpha)?);
            }
            out.add_term(e.clone(), &v);
        }
        Ok(out)
    }

    /// The generator `σ_i` of `Δ_∞`, `2 ≤ i ≤ d+1`.
    pub fn sigma(&self, i: usize, x: &PeriodElem) -> Result<PeriodElem, PeriodError> {
        self.sigma_impl(i, x, false)
    }

    pub fn sigma_inverse(&self, i: usize, x: &PeriodElem) -> Result<PeriodElem, PeriodError> {
        self.sigma_impl(i, x, true)
    }

    /// `(σ_i − 1)x`.
    pub fn sigma_minus_one(&self, i: usize, x: &PeriodElem) -> Result<PeriodElem, PeriodError> {
        Ok(self.sigma(i, x)?.sub(x))
    }

    /// Splits `x` into `σ_i`-eigencomponents keyed by `α`, where `σ_i` acts
    /// on the `α` component of an element free of `X_i` by `q^α`.
    pub fn decompose_eigen(&self, x: &PeriodElem, i: usize) -> Result<BTreeMap<PadicExponent, PeriodElem>, PeriodError> {
        let mut out: BTreeMap<PadicExponent, PeriodElem> = BTreeMap::new();
        for (e, c) in &x.terms {
            let alpha = self.eigen_exponent(e, i)?;
            out.entry(alpha).or_insert_with(|| self.zero()).add_term(e.clone(), c);
        }
        Ok(out)
    }

    /// The generator `e_α` of the `α` eigenspace in direction `i`:
    /// `[T_i]^α` for `i ≤ r, α ≥ 0` or `i > r`, and `[T_1]^{−α}` for `i ≤ r, α < 0`.
    pub fn eigen_generator(&self, i: usize, alpha: PadicExponent) -> Result<PeriodElem, PeriodError> {
        if i <= self.desc.r && alpha.signum() < 0 {
            self.t_symbol(1, alpha.neg())
        } else {
            self.t_symbol(i, alpha)
        }
    }

    /// The Frobenius `Φ` on coefficients: `Z ↦ 1 − (1−Z)^p`,
    /// `Ξ ↦ (p+Ξ)^p − p`, and `X, X_i ↦ (1+X)^p − 1`.
    pub fn frobenius_coeff(&self, c: &DPPoly) -> Result<DPPoly, PeriodError> {
        let ring = &self.ring;
        let p = self.p();
        let one = DPPoly::one(ring);
        let mut images = Vec::with_capacity(ring.nvars());
        images.push(&one - &(&one - &DPPoly::var(ring, Z, 1)).pow(p));
        let pc = DPPoly::constant(ring, p as i64);
        images.push(&(&pc + &DPPoly::var(ring, XI, 1)).pow(p) - &pc);
        for v in 2..ring.nvars() {
            images.push(&(&one + &DPPoly::var(ring, v, 1)).pow(p) - &one);
        }
        Ok(c.substitute(ring, &images)?)
    }

    /// The Frobenius `Φ`, multiplying exponents by `p`.
    pub fn frobenius_phi(&self, x: &PeriodElem) -> Result<PeriodElem, PeriodError> {
        let mut out = self.zero();
        for (e, c) in &x.terms {
            out.add_term(self.normalize(&e.mul_p()?)?, &self.frobenius_coeff(c)?);
        }
        Ok(out)
    }

    /// A random element of `A_model`: `terms` lattice monomials with random
    /// coefficients in `Z` and `Ξ`.
    pub fn random_a_element<G: Rng + ?Sized>(&self, rng: &mut G, terms: usize) -> PeriodElem {
        let mut out = self.zero();
        let mut attempts = 0;
        while out.term_count() < terms && attempts < 50 * terms {
            attempts += 1;
            let e = self.random_exponent(rng);
            let Ok(e) = self.normalize(&e) else { continue };
            let c = self.random_base_coeff(rng);
            out.add_term(e, &c);
        }
        out
    }

    /// A random exponent accepted by [`Model::normalize`].
    pub fn random_exponent<G: Rng + ?Sized>(&self, rng: &mut G) -> ExponentVec {
        let p = self.p();
        let d = self.desc.d;
        let bound = self.desc.numerator_bound as i64;
        let mut coords = Vec::with_capacity(d + 2);
        for k in 0..d + 2 {
            let nonneg = match self.desc.c_mode {
                CMode::Pi => k < self.desc.r || k == d + 1,
                CMode::One => false,
            };
            let a = if k == d + 1 && self.desc.c_mode == CMode::One {
                0
            } else if nonneg {
                rng.gen_range(0..=bound)
            } else {
                rng.gen_range(-bound..=bound)
            };
            coords.push(PadicExponent::new(a, self.desc.m, p));
        }
        ExponentVec::from_coords(coords)
    }

    /// A random coefficient in `Z^[a]Ξ^[b]`, `a ≤ deg_z`, `b ≤ 2`.
    pub fn random_base_coeff<G: Rng + ?Sized>(&self, rng: &mut G) -> DPPoly {
        let modulus = self.params().modulus();
        let mut c = DPPoly::zero(&self.ring);
        for _ in 0..rng.gen_range(1..=3) {
            let a = rng.gen_range(0..=self.desc.deg_z);
            let b = rng.gen_range(0..=2);
            c.add_term(Mono::from_exps(&[a, b]), rng.gen_range(1..modulus));
        }
        c
    }

    /// Serializes `x` grouped by `Ξ`-degree: `x = Σ_k x_k·Ξ^[k]` with each
    /// `x_k` a combination of lattice monomials with `Ξ`-free coefficients.
    pub fn write_form(&self, x: &PeriodElem) -> WriteForm {
        let mut blocks: BTreeMap<u32, Vec<WriteTerm>> = BTreeMap::new();
        let nv = self.ring.nvars();
        for (e, c) in &x.terms {
            for (k, part) in c.split_by_var(XI) {
                let coefficient = part.terms().map(|(m, &v)| (m.exps(nv), v)).collect();
                blocks.entry(k).or_default().push(WriteTerm { exponent: e.to_strings(), coefficient });
            }
        }
        WriteForm {
            vars: self.ring.vars().to_vec(),
            p: self.p(),
            modulus: self.params().modulus(),
            blocks: blocks.into_iter().map(|(xi_degree, terms)| XiBlock { xi_degree, terms }).collect(),
        }
    }

    pub fn from_write_form(&self, form: &WriteForm) -> Result<PeriodElem, PeriodError> {
        if form.vars != self.ring.vars() || form.p != self.p() || form.modulus != self.params().modulus() {
            return Err(PeriodError::Parse("ring does not match the model".into()));
        }
        let mut out = self.zero();
        for block in &form.blocks {
            for term in &block.terms {
                let e = ExponentVec::parse(&term.exponent, self.p())?;
                let mut c = DPPoly::zero(&self.ring);
                for (exps, v) in &term.coefficient {
                    if exps.len() != self.ring.nvars() || exps[XI] != 0 {
                        return Err(PeriodError::Parse("coefficient monomial must be Ξ-free".into()));
                    }
                    c.add_term(Mono::from_exps(exps).with_exp(XI, block.xi_degree), *v % form.modulus);
                }
                out.add_term(self.normalize(&e)?, &c);
            }
        }
        Ok(out)
    }
}

/// Serialized form `Σ_k x_k·Ξ^[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteForm {
    pub vars: Vec<String>,
    pub p: u64,
    pub modulus: u64,
    pub blocks: Vec<XiBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiBlock {
    pub xi_degree: u32,
    pub terms: Vec<WriteTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WriteTerm {
    pub exponent: Vec<String>,
    /// `(DP exponents, coefficient)` pairs with the `Ξ` exponent zero.
    pub coefficient: Vec<(Vec<u32>, u64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn base(p: u64, n: u32, m: u32) -> BaseModel {
        BaseModel::new(RingParams::new(p, n).unwrap(), m).unwrap()
    }

    fn model(p: u64, n: u32, m: u32, d: usize, r: usize, mode: CMode) -> Model {
        Model::build(PeriodModelDesc::with_defaults(p, n, m, d, r, mode)).unwrap()
    }

    fn pe(a: i64, l: u32, p: u64) -> PadicExponent {
        PadicExponent::new(a, l, p)
    }

    #[test]
    fn descriptor_validation() {
        let mut d = PeriodModelDesc::with_defaults(2, 2, 1, 2, 2, CMode::Pi);
        assert!(d.validate().is_ok());
        d.m = 0;
        assert!(d.validate().is_err());
        d.m = 1;
        d.r = 4;
        assert!(d.validate().is_err());
        d.r = 2;
        d.p = 4;
        assert!(d.validate().is_err());
    }

    #[test]
    fn q_power_basic_values() {
        let b = base(2, 3, 1);
        let ring = b.ring();
        assert_eq!(b.q_power(&PadicExponent::zero(2)).unwrap(), DPPoly::one(ring));
        assert_eq!(b.q_power(&pe(1, 1, 2)).unwrap(), b.q_m().clone());
        let q = b.q_power(&PadicExponent::integer(1, 2)).unwrap();
        assert_eq!(q, b.q_m().pow(2));
        assert_eq!(q.max_degree(), Some(2));
        let qinv = b.q_power(&PadicExponent::integer(-1, 2)).unwrap();
        assert_eq!(q.mul(&qinv), DPPoly::one(ring));
        assert!(b.q_power(&pe(1, 2, 2)).is_err());
    }

    #[test]
    fn q_power_matches_repeated_squaring() {
        for (p, n, m) in [(2, 3, 2), (3, 2, 1), (5, 2, 1)] {
            let b = base(p, n, m);
            for e in 0..12i64 {
                let lhs = b.q_power(&pe(e, m, p)).unwrap();
                assert_eq!(lhs, b.q_m().pow(e as u64), "p={p} e={e}");
            }
        }
    }

    #[test]
    fn exp_of_t_is_q_and_exp_tau_is_generator() {
        for (p, n, m) in [(2, 2, 1), (2, 3, 1), (3, 2, 1), (2, 2, 2)] {
            let b = base(p, n, m);
            assert_eq!(b.t().exp_ideal().unwrap(), *b.q(), "p={p} n={n} m={m}");
            let truncated = b.tau().truncate(12);
            let one_minus_z = b.q_m().truncate(12);
            assert_eq!(truncated.exp_ideal().unwrap(), one_minus_z);
        }
    }

    #[test]
    fn u_alpha_identity_and_unit() {
        let b = base(2, 3, 1);
        let one = DPPoly::one(b.ring());
        assert_eq!(b.unit_u_alpha(0), one);
        for alpha in -8..=8i64 {
            let u = b.unit_u_alpha(alpha);
            assert_eq!(u.constant_term(), 1);
            let lhs = &b.q_power(&PadicExponent::integer(alpha, 2)).unwrap() - &one;
            assert_eq!(lhs, b.t().mul(&u).scale_i64(alpha), "α={alpha}");
            assert!(u.invert_unit().is_ok());
        }
    }

    #[test]
    fn t_cofactor_is_exact_for_integer_and_fractional() {
        for (p, n, m) in [(2, 2, 1), (3, 2, 1), (2, 3, 2)] {
            let b = base(p, n, m);
            for a in [-3i64, -1, 1, 2, 3, 4] {
                for l in 0..=m {
                    let alpha = pe(a, l, p);
                    assert!(b.t_cofactor(&alpha).is_ok(), "p={p} α={alpha}");
                }
            }
        }
    }

    #[test]
    fn t_cofactor_absorbs_p_power() {
        let b = base(2, 3, 1);
        let c = b.t_cofactor(&PadicExponent::integer(2, 2)).unwrap();
        let one = DPPoly::one(b.ring());
        let q2 = &b.q_power(&PadicExponent::integer(2, 2)).unwrap() - &one;
        assert_eq!(c.mul(&q2), b.t().scale(2));
        assert!(matches!(b.t_cofactor(&PadicExponent::zero(2)), Err(PeriodError::ZeroExponent)));
    }

    #[test]
    fn divided_t_by_q_to_the_two_at_p3() {
        let b = base(3, 2, 1);
        let one = DPPoly::one(b.ring());
        let den = &b.tau().scale(2).truncate(12).exp_ideal().unwrap().in_ring(b.ring()) - &one;
        let pivot = den.homogeneous_part(1);
        assert_eq!(pivot.coeff(&Mono::var(0, 1)), b.params().reduce_i64(-2));
        let div = DPPoly::divide_filtered(b.t(), &den, 12).unwrap();
        assert_eq!(den.mul(&div.quotient).drop_above(12), b.t().drop_above(12));
    }

    #[test]
    fn fractional_division_through_lower_level() {
        let b = base(2, 2, 2);
        for (a, j) in [(1, 1), (-3, 1), (1, 2), (3, 2), (-1, 2)] {
            let beta = pe(a, j, 2);
            let div = divide_fractional(&b, &beta, 16).unwrap();
            let den = &b.q_power(&beta).unwrap() - &DPPoly::one(b.ring());
            assert_eq!(den.mul(&div.quotient).drop_above(16), b.t().drop_above(16));
        }
    }

    #[test]
    fn verify_constants_small_configuration() {
        let b = base(2, 2, 1);
        let entries = verify_constants(&b, &ConstantsConfig { integer_range: 4, fraction_numerators: 3, cap: 8 }).unwrap();
        assert!(entries.iter().all(ClaimEntry::passed));
        let first = &entries[0];
        assert_eq!(first.claim_id, "constants.i");
        let tau = b.tau();
        assert_eq!(first.witness["cofactor"], tau.to_json());
    }

    #[test]
    fn decompose_generator_table() {
        let m = model(2, 2, 1, 2, 2, CMode::Pi);
        let x = m.t_symbol(2, pe(1, 1, 2)).unwrap();
        let comps = m.decompose_eigen(&x, 2).unwrap();
        assert_eq!(comps.keys().copied().collect::<Vec<_>>(), vec![pe(1, 1, 2)]);
        let y = m.t_symbol(1, pe(1, 1, 2)).unwrap();
        let comps = m.decompose_eigen(&y, 2).unwrap();
        assert_eq!(comps.keys().copied().collect::<Vec<_>>(), vec![pe(-1, 1, 2)]);
        assert_eq!(m.eigen_generator(2, pe(-1, 1, 2)).unwrap(), y);
        let z = m.t_symbol(3, pe(1, 1, 2)).unwrap();
        assert_eq!(m.decompose_eigen(&z, 3).unwrap().keys().copied().collect::<Vec<_>>(), vec![pe(1, 1, 2)]);
    }

    #[test]
    fn semistable_relation_in_products() {
        let m = model(2, 2, 1, 2, 2, CMode::Pi);
        let one = PadicExponent::integer(1, 2);
        let prod = m.mul(&m.t_symbol(1, one).unwrap(), &m.t_symbol(2, one).unwrap()).unwrap();
        assert_eq!(prod, m.pi_symbol(one).unwrap());
    }

    #[test]
    fn decompose_then_sum_and_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mode in [CMode::Pi, CMode::One] {
            let m = model(2, 2, 1, 2, 1, mode);
            for _ in 0..10 {
                let x = m.random_a_element(&mut rng, 5);
                for i in m.directions() {
                    let comps = m.decompose_eigen(&x, i).unwrap();
                    let sum = comps.values().fold(m.zero(), |acc, c| acc.add(c));
                    assert_eq!(sum, x);
                    for (alpha, comp) in &comps {
                        let lhs = m.sigma(i, comp).unwrap();
                        assert_eq!(lhs, comp.mul_coeff(&m.q_power(alpha).unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_is_multiplicative_invertible_and_commuting() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = model(3, 2, 1, 2, 2, CMode::Pi);
        let x2 = m.scalar(&DPPoly::var(m.ring(), m.x_var(2), 2));
        let x3 = m.scalar(&DPPoly::var(m.ring(), m.x_var(3), 1));
        for _ in 0..5 {
            let a = m.random_a_element(&mut rng, 2).add(&x2);
            let b = m.mul(&m.random_a_element(&mut rng, 2), &m.one().add(&x3)).unwrap();
            let Ok(ab) = m.mul(&a, &b) else { continue };
            for i in m.directions() {
                let lhs = m.sigma(i, &ab).unwrap();
                let rhs = m.mul(&m.sigma(i, &a).unwrap(), &m.sigma(i, &b).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
                assert_eq!(m.sigma_inverse(i, &m.sigma(i, &a).unwrap()).unwrap(), a);
            }
            let s23 = m.sigma(2, &m.sigma(3, &b).unwrap()).unwrap();
            let s32 = m.sigma(3, &m.sigma(2, &b).unwrap()).unwrap();
            assert_eq!(s23, s32);
        }
        let base_elem = m.scalar(&m.t());
        assert_eq!(m.sigma(2, &base_elem).unwrap(), base_elem);
    }

    #[test]
    fn sigma_on_x_matches_dictionary() {
        let m = model(2, 3, 1, 1, 1, CMode::Pi);
        let x = DPPoly::var(m.ring(), m.x_var(2), 1);
        let q = m.q_power(&PadicExponent::integer(1, 2)).unwrap();
        let one = DPPoly::one(m.ring());
        let expected = &q.mul(&(&one + &x)) - &one;
        assert_eq!(m.sigma_coeff(2, &x, false), expected);
    }

    #[test]
    fn chart_coordinates_are_invariant() {
        for mode in [CMode::Pi, CMode::One] {
            let m = model(2, 2, 1, 2, 2, mode);
            for j in 1..=3 {
                let tj = m.chart_coordinate(j).unwrap();
                for i in m.directions() {
                    assert_eq!(m.sigma(i, &tj).unwrap(), tj, "mode {mode} T_{j} σ_{i}");
                }
            }
        }
    }

    #[test]
    fn frobenius_examples_and_multiplicativity() {
        let m = model(2, 2, 2, 1, 1, CMode::Pi);
        assert_eq!(m.frobenius_phi(&m.one()).unwrap(), m.one());
        let qm = m.scalar(&m.q_power(&pe(1, 2, 2)).unwrap());
        let q1 = m.scalar(&m.q_power(&pe(1, 1, 2)).unwrap());
        assert_eq!(m.frobenius_phi(&qm).unwrap(), q1);
        let sym = m.t_symbol(2, pe(1, 2, 2)).unwrap();
        assert_eq!(m.frobenius_phi(&sym).unwrap(), m.t_symbol(2, pe(1, 1, 2)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let small = Model::build(PeriodModelDesc { numerator_bound: 16, ..*m.desc() }).unwrap();
        for _ in 0..6 {
            let a = small.random_a_element(&mut rng, 2);
            let b = small.random_a_element(&mut rng, 2);
            let (Ok(fa), Ok(fb)) = (small.frobenius_phi(&a), small.frobenius_phi(&b)) else { continue };
            let Ok(ab) = small.mul(&a, &b) else { continue };
            let Ok(fab) = small.frobenius_phi(&ab) else { continue };
            assert_eq!(fab, small.mul(&fa, &fb).unwrap());
        }
        let xi = DPPoly::var(m.ring(), 1, 1);
        let wp = &xi + &DPPoly::constant(m.ring(), 2);
        let expected = &wp.pow(2) - &DPPoly::constant(m.ring(), 2);
        assert_eq!(m.frobenius_coeff(&xi).unwrap(), expected);
    }

    #[test]
    fn frobenius_overflow_is_an_error() {
        let m = model(2, 2, 1, 1, 1, CMode::Pi);
        let big = m.t_symbol(2, PadicExponent::integer(2, 2)).unwrap();
        assert!(matches!(m.frobenius_phi(&big), Err(PeriodError::ExponentOverflow(_))));
    }

    #[test]
    fn write_form_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = model(3, 2, 1, 2, 2, CMode::Pi);
        for _ in 0..10 {
            let x = m.random_a_element(&mut rng, 4);
            let form = m.write_form(&x);
            let text = serde_json::to_string(&form).unwrap();
            let back: WriteForm = serde_json::from_str(&text).unwrap();
            assert_eq!(m.from_write_form(&back).unwrap(), x);
            for block in &form.blocks {
                assert_eq!(m.from_write_form(&WriteForm { blocks: vec![block.clone()], ..form.clone() }).unwrap(), x.xi_component(block.xi_degree));
            }
        }
    }

    #[test]
    fn build_is_deterministic_and_minimal_case_works() {
        let desc = PeriodModelDesc::with_defaults(2, 2, 1, 1, 1, CMode::Pi);
        let a = Model::build(desc).unwrap();
        let b = Model::build(desc).unwrap();
        assert_eq!(a.ring().vars(), b.ring().vars());
        assert_eq!(a.ring().vars(), &["Z", "Ξ", "X", "X2"]);
        assert_eq!(a.t(), b.t());
    }
}
