//! The `periodcheck` driver: configuration, suites and JSON reports.
//!
//! A run builds one [`Model`] from a [`RunConfig`], executes the requested
//! suites in registry order and collects their [`ClaimEntry`] lists into a
//! [`Report`]. Reports contain no timestamps, so identical configurations and
//! seeds give byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dpring::{DPPoly, DpRing, Mono};
use crate::exactnum::{nilpotency_index, RingParams};
use crate::galois::{
    enumerate_cohomology, enumerate_kernel_image, h0_invariants, integration_identities, kummer_check, snf_local,
    standard_blocks, t_annihilation_suite, t_primitive_suite, Galois, GaloisError, Matrix, ModuleCaps,
    TruncatedModule,
};
use crate::lattice::{kernel_l, same_up_to_sign, CMode, ChartKind, LatticeMap, MonoidChart};
use crate::periods::{
    verify_constants, ClaimEntry, ConstantsConfig, Model, PeriodError, PeriodModelDesc, Status, WitnessMode,
};
use crate::witt::{CoeffRing, IntegerRing, PolyQuotient, WittRing, ZmodRing};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Period(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

/// The fixed suite registry, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize, Deserialize)]
pub enum Suite {
    #[value(name = "witt-laws")]
    #[serde(rename = "witt-laws")]
    WittLaws,
    #[value(name = "dp-laws")]
    #[serde(rename = "dp-laws")]
    DpLaws,
    #[value(name = "constants")]
    #[serde(rename = "constants")]
    Constants,
    #[value(name = "eigen")]
    #[serde(rename = "eigen")]
    Eigen,
    #[value(name = "integration")]
    #[serde(rename = "integration")]
    Integration,
    #[value(name = "t-primitive")]
    #[serde(rename = "t-primitive")]
    TPrimitive,
    #[value(name = "koszul")]
    #[serde(rename = "koszul")]
    Koszul,
    #[value(name = "t-annihilation")]
    #[serde(rename = "t-annihilation")]
    TAnnihilation,
    #[value(name = "kummer")]
    #[serde(rename = "kummer")]
    Kummer,
    #[value(name = "lattice-L")]
    #[serde(rename = "lattice-L")]
    LatticeL,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::WittLaws => "witt-laws",
            Suite::DpLaws => "dp-laws",
            Suite::Constants => "constants",
            Suite::Eigen => "eigen",
            Suite::Integration => "integration",
            Suite::TPrimitive => "t-primitive",
            Suite::Koszul => "koszul",
            Suite::TAnnihilation => "t-annihilation",
            Suite::Kummer => "kummer",
            Suite::LatticeL => "lattice-L",
        }
    }

    fn parse(s: &str) -> Result<Suite, CliError> {
        <Suite as ValueEnum>::from_str(s.trim(), false).map_err(|_| CliError::Config(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn parse_mode(s: &str) -> Result<CMode, CliError> {
    match s.trim() {
        "one" | "1" => Ok(CMode::One),
        "pi" => Ok(CMode::Pi),
        other => Err(CliError::Config(format!("c must be one or pi, got {other:?}"))),
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub d: usize,
    pub r: usize,
    pub c: CMode,
    pub deg_z: u32,
    pub deg_x: u32,
    pub numerator_bound: u64,
    pub suites: Vec<Suite>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// `p = 2, n = 2, m = 1, d = 2, r = 2, c = π` with the model's default
    /// caps and seed 0.
    pub fn new(suites: Vec<Suite>) -> Self {
        RunConfig::from_desc(PeriodModelDesc::with_defaults(2, 2, 1, 2, 2, CMode::Pi), suites)
    }

    pub fn from_desc(desc: PeriodModelDesc, suites: Vec<Suite>) -> Self {
        RunConfig {
            p: desc.p,
            n: desc.n,
            m: desc.m,
            d: desc.d,
            r: desc.r,
            c: desc.c_mode,
            deg_z: desc.deg_z,
            deg_x: desc.deg_x,
            numerator_bound: desc.numerator_bound,
            suites,
            seed: 0,
            out: None,
        }
    }

    pub fn desc(&self) -> PeriodModelDesc {
        PeriodModelDesc {
            p: self.p,
            n: self.n,
            m: self.m,
            d: self.d,
            r: self.r,
            c_mode: self.c,
            deg_z: self.deg_z,
            deg_x: self.deg_x,
            numerator_bound: self.numerator_bound,
        }
    }

    /// Checks the model descriptor and the suite list.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.suites.is_empty() {
            return Err(CliError::Config("no suites selected".into()));
        }
        self.desc().validate()?;
        Ok(())
    }
}

/// Command-line flags. Every flag overrides the same key in `--config`.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "periodcheck", about = "Verify identities in finite period-ring models over Z/p^n")]
pub struct CliArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    /// Chart constant: `one` or `pi`.
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long = "deg-z")]
    pub deg_z: Option<u32>,
    #[arg(long = "deg-x")]
    pub deg_x: Option<u32>,
    #[arg(long = "numerator-bound")]
    pub numerator_bound: Option<u64>,
    /// Suite to run; repeat the flag for several suites.
    #[arg(long = "suite", value_enum)]
    pub suites: Vec<Suite>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat `key=value` file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Config(format!("bad value {value:?} for {key}")))
}

/// Parses a flat `key=value` configuration text. Blank lines and lines
/// starting with `#` are ignored, and `suite` may be repeated or hold a
/// comma-separated list.
pub fn parse_config_text(text: &str) -> Result<CliArgs, CliError> {
    let mut args = CliArgs::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "p" => args.p = Some(parse_value(&key, value)?),
            "n" => args.n = Some(parse_value(&key, value)?),
            "m" => args.m = Some(parse_value(&key, value)?),
            "d" => args.d = Some(parse_value(&key, value)?),
            "r" => args.r = Some(parse_value(&key, value)?),
            "c" => args.c = Some(value.to_string()),
            "deg_z" => args.deg_z = Some(parse_value(&key, value)?),
            "deg_x" => args.deg_x = Some(parse_value(&key, value)?),
            "numerator_bound" => args.numerator_bound = Some(parse_value(&key, value)?),
            "suite" | "suites" => {
                for s in value.split(',').filter(|s| !s.trim().is_empty()) {
                    args.suites.push(Suite::parse(s)?);
                }
            }
            "seed" => args.seed = Some(parse_value(&key, value)?),
            "out" => args.out = Some(PathBuf::from(value)),
            other => return Err(CliError::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
        }
    }
    Ok(args)
}

impl CliArgs {
    /// Flags take precedence over `file`; `suites` from the flags replace the
    /// file's list when non-empty.
    pub fn merged_over(self, file: CliArgs) -> CliArgs {
        CliArgs {
            p: self.p.or(file.p),
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            d: self.d.or(file.d),
            r: self.r.or(file.r),
            c: self.c.or(file.c),
            deg_z: self.deg_z.or(file.deg_z),
            deg_x: self.deg_x.or(file.deg_x),
            numerator_bound: self.numerator_bound.or(file.numerator_bound),
            suites: if self.suites.is_empty() { file.suites } else { self.suites },
            seed: self.seed.or(file.seed),
            out: self.out.or(file.out),
            config: None,
        }
    }

    /// Reads `--config` if given, merges it under the flags and validates. The
    /// caps and numerator bound default from `p` and `m`.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let merged = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                self.merged_over(parse_config_text(&text)?)
            }
            None => self,
        };
        let c = merged.c.as_deref().map(parse_mode).transpose()?.unwrap_or(CMode::Pi);
        let p = merged.p.unwrap_or(2);
        let m = merged.m.unwrap_or(1);
        let defaults = PeriodModelDesc::with_defaults(p, merged.n.unwrap_or(2), m, merged.d.unwrap_or(2), merged.r.unwrap_or(2), c);
        let desc = PeriodModelDesc {
            deg_z: merged.deg_z.unwrap_or(defaults.deg_z),
            deg_x: merged.deg_x.unwrap_or(defaults.deg_x),
            numerator_bound: merged.numerator_bound.unwrap_or(defaults.numerator_bound),
            ..defaults
        };
        let mut config = RunConfig::from_desc(desc, merged.suites);
        config.seed = merged.seed.unwrap_or(0);
        config.out = merged.out;
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub entries: usize,
    pub passed: usize,
    pub failed: usize,
    pub failed_by_suite: BTreeMap<String, usize>,
}

/// One JSON report per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub suites: BTreeMap<String, Vec<ClaimEntry>>,
    pub summary: Summary,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json_pretty() + "\n")?;
        Ok(())
    }
}

fn entry(claim_id: &str, anchor: &str, parameters: Value, witness: Value, mode: WitnessMode, ok: bool) -> ClaimEntry {
    ClaimEntry {
        claim_id: claim_id.into(),
        anchor: anchor.into(),
        parameters,
        witness,
        mode,
        status: if ok { Status::Pass } else { Status::Fail },
    }
}

fn error_entry(claim_id: &str, parameters: Value, err: impl fmt::Display) -> ClaimEntry {
    entry(claim_id, "suite error", parameters, json!({ "error": err.to_string() }), WitnessMode::Exact, false)
}

/// Runs every suite of `config` against one model.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    config.validate()?;
    let mut suites = config.suites.clone();
    suites.sort();
    suites.dedup();
    let mut out = BTreeMap::new();
    for suite in suites {
        out.insert(suite.name().to_string(), run_suite(config, suite));
    }
    let entries: usize = out.values().map(Vec::len).sum();
    let failed_by_suite: BTreeMap<String, usize> = out
        .iter()
        .map(|(k, v)| (k.clone(), v.iter().filter(|e| !e.passed()).count()))
        .filter(|(_, n)| *n > 0)
        .collect();
    let failed = failed_by_suite.values().sum();
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        config: RunConfig { out: None, ..config.clone() },
        suites: out,
        summary: Summary { entries, passed: entries - failed, failed, failed_by_suite },
    })
}

fn suite_seed(config: &RunConfig, suite: Suite) -> u64 {
    config.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(suite as u64)
}

/// The model of `config` with its numerator bound raised to `at_least`.
fn model_with_bound(config: &RunConfig, at_least: u64) -> Result<Model, PeriodError> {
    let desc = config.desc();
    Model::build(PeriodModelDesc { numerator_bound: desc.numerator_bound.max(at_least), ..desc })
}

fn run_suite(config: &RunConfig, suite: Suite) -> Vec<ClaimEntry> {
    let seed = suite_seed(config, suite);
    let pm = config.p.pow(config.m);
    let params = json!({ "p": config.p, "n": config.n, "m": config.m });
    let result: Result<Vec<ClaimEntry>, GaloisError> = (|| match suite {
        Suite::WittLaws => Ok(witt_laws(config.p, config.n as usize, WITT_SAMPLES, seed)),
        Suite::DpLaws => Ok(dp_laws(config.p, config.n, DP_SAMPLES, seed)),
        Suite::Constants => {
            let model = Model::build(config.desc())?;
            Ok(verify_constants(model.base(), &ConstantsConfig::standard(config.p, config.m))?)
        }
        Suite::Eigen => Ok(eigen_suite(&Model::build(config.desc())?, EIGEN_SAMPLES, seed)),
        Suite::Integration => {
            let model = model_with_bound(config, 8 * pm)?;
            integration_identities(&Galois::new(&model), 6)
        }
        Suite::TPrimitive => {
            let p2 = (config.p * config.p) as i64;
            let model = model_with_bound(config, p2 as u64)?;
            Ok(t_primitive_suite(&Galois::new(&model), p2, 3))
        }
        Suite::Koszul => Ok(koszul_suite(&Model::build(config.desc())?, KOSZUL_SAMPLES, seed)),
        Suite::TAnnihilation => {
            let model = Model::build(config.desc())?;
            annihilation_suite(&model)
        }
        Suite::Kummer => kummer_check(&Galois::new(&Model::build(config.desc())?)),
        Suite::LatticeL => Ok(lattice_suite(config.p, config.r)),
    })();
    result.unwrap_or_else(|err| vec![error_entry(suite.name(), params, err)])
}

pub const WITT_SAMPLES: usize = 200;
pub const DP_SAMPLES: usize = 100;
pub const EIGEN_SAMPLES: usize = 100;
pub const KOSZUL_SAMPLES: usize = 500;

fn count_entry(claim_id: &str, anchor: &str, parameters: Value, checked: usize, failures: Vec<String>) -> ClaimEntry {
    let ok = failures.is_empty() && checked > 0;
    let shown: Vec<String> = failures.iter().take(5).cloned().collect();
    entry(
        claim_id,
        anchor,
        parameters,
        json!({ "checked": checked, "failures": failures.len(), "first_failures": shown }),
        WitnessMode::Exact,
        ok,
    )
}

fn witt_ring_laws<R: CoeffRing>(w: &WittRing<R>, samples: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for k in 0..samples {
        let (a, b, c) = (w.random(rng), w.random(rng), w.random(rng));
        let ok = (|| -> Result<bool, crate::witt::WittError> {
            let ab = w.add(&a, &b)?;
            let checks = [
                ab == w.add(&b, &a)?,
                w.mul(&a, &b)? == w.mul(&b, &a)?,
                w.add(&ab, &c)? == w.add(&a, &w.add(&b, &c)?)?,
                w.mul(&w.mul(&a, &b)?, &c)? == w.mul(&a, &w.mul(&b, &c)?)?,
                w.mul(&a, &w.add(&b, &c)?)? == w.add(&w.mul(&a, &b)?, &w.mul(&a, &c)?)?,
                w.add(&a, &w.zero())? == a,
                w.mul(&a, &w.one())? == a,
                w.add(&a, &w.neg(&a)?)? == w.zero(),
            ];
            Ok(checks.iter().all(|&x| x))
        })();
        if ok != Ok(true) {
            failures.push(format!("sample {k}"));
        }
    }
    (samples, failures)
}

fn witt_teichmuller<R: CoeffRing>(w: &WittRing<R>) -> Option<(usize, Vec<String>)> {
    let elems = w.base().elements().filter(|e| e.len() <= 9)?;
    let mut failures = Vec::new();
    for x in &elems {
        for y in &elems {
            let lhs = w.mul(&w.teichmuller(x), &w.teichmuller(y));
            if lhs != Ok(w.teichmuller(&w.base().mul(x, y))) {
                failures.push(format!("{x:?}·{y:?}"));
            }
        }
    }
    Some((elems.len() * elems.len(), failures))
}

/// `F(V(w)) = p·w`, through the polynomial Frobenius `W_{n+1} → W_n` on every
/// ring and through the componentwise Frobenius in characteristic `p`.
fn witt_fv<R: CoeffRing>(w: &WittRing<R>, samples: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<String>) {
    let longer = w.with_len(w.len() + 1).expect("positive length");
    let mut failures = Vec::new();
    for k in 0..samples {
        let x = w.random(rng);
        let px = w.mul_int(&x, w.p() as i64);
        let poly = w.verschiebung_ext(&x).and_then(|v| longer.frobenius_poly(&v));
        let mut ok = poly.is_ok() && poly == px;
        if w.base().char_p() == Some(w.p()) {
            ok &= w.verschiebung(&x).and_then(|v| w.frobenius(&v)) == px;
        }
        if !ok {
            failures.push(format!("sample {k}"));
        }
    }
    (samples, failures)
}

/// `w(f(x)) = f(w(x))` for the ghost map and a ring map `f: S → R`.
fn witt_ghost_naturality<S: CoeffRing, R: CoeffRing>(
    source: &WittRing<S>,
    target: &WittRing<R>,
    f: impl Fn(&S::Elem) -> R::Elem,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> (usize, Vec<String>) {
    let mut failures = Vec::new();
    for k in 0..samples {
        let x = source.random(rng);
        let lhs = source.map_coefficients(target, &x, &f).and_then(|y| target.ghost(&y));
        let rhs = source.ghost(&x).map(|g| g.iter().map(&f).collect::<Vec<_>>());
        if lhs.is_err() || lhs != rhs {
            failures.push(format!("sample {k}"));
        }
    }
    (samples, failures)
}

fn witt_ring_entries<R: CoeffRing>(
    base: R,
    p: u64,
    len: usize,
    samples: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<ClaimEntry>,
) {
    let params = json!({ "p": p, "length": len, "coefficients": base.name() });
    let w = match WittRing::new(base.clone(), p, len) {
        Ok(w) => w,
        Err(e) => {
            out.push(error_entry("witt.ring", params, e));
            return;
        }
    };
    let (n, f) = witt_ring_laws(&w, samples, rng);
    out.push(count_entry("witt.ring_axioms", "W_n(R) is a commutative ring", params.clone(), n, f));
    if let Some((n, f)) = witt_teichmuller(&w) {
        out.push(count_entry("witt.teichmuller", "[x][y] = [xy]", params.clone(), n, f));
    }
    let (n, f) = witt_fv(&w, samples, rng);
    out.push(count_entry("witt.frobenius_verschiebung", "F∘V = p", params.clone(), n, f));
    let integers = WittRing::new(IntegerRing, p, len).expect("valid prime");
    let (n, f) = witt_ghost_naturality(&integers, &w, |x| base.embed_bigint(x), samples, rng);
    out.push(count_entry("witt.ghost_naturality", "ghost map is natural in R", params, n, f));
}

/// Witt-vector laws on `W_len(R)` for `R` in `{F_p, Z/p², F_p[s]/(s³)}`:
/// ring axioms, Teichmüller multiplicativity, `F∘V = p`, ghost naturality. Reduction `Z/p² → F_p`
/// is checked for naturality too.
pub fn witt_laws(p: u64, len: usize, samples: usize, seed: u64) -> Vec<ClaimEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    witt_ring_entries(ZmodRing::new(p), p, len, samples, &mut rng, &mut out);
    witt_ring_entries(ZmodRing::new(p * p), p, len, samples, &mut rng, &mut out);
    witt_ring_entries(PolyQuotient::truncated(ZmodRing::new(p), 3), p, len, samples, &mut rng, &mut out);
    if let (Ok(src), Ok(dst)) = (WittRing::new(ZmodRing::new(p * p), p, len), WittRing::new(ZmodRing::new(p), p, len)) {
        let (n, f) = witt_ghost_naturality(&src, &dst, |x| x % p, samples, &mut rng);
        let params = json!({ "p": p, "length": len, "map": format!("Z/{} -> F_{p}", p * p) });
        out.push(count_entry("witt.ghost_naturality", "ghost map is natural in R", params, n, f));
    }
    out
}

fn random_ideal_element(ring: &std::sync::Arc<DpRing>, rng: &mut ChaCha8Rng) -> DPPoly {
    let q = ring.params().modulus();
    let mut x = DPPoly::zero(ring);
    for _ in 0..rng.gen_range(1..=4) {
        let a = rng.gen_range(0..=3u32);
        let b = rng.gen_range(u32::from(a == 0)..=3 - a.min(2));
        x.add_term(Mono::from_exps(&[a, b]), rng.gen_range(0..q));
    }
    x
}

fn factorial_mod(k: u64, pr: &RingParams) -> u64 {
    (1..=k).fold(1u64, |acc, j| pr.mul(acc, j % pr.modulus()))
}

/// Divided-power laws on random elements of the DP ideal of
/// `Z/p^n⟨Z, W⟩`. Besides `q!γ_q(x) = x^q` and the γ-rules, `exp` and `log`
/// are checked to be inverse in a degree-capped ring, and `x^K = 0` for the
/// nilpotency index `K`, which `Z^{K−1} ≠ 0` shows is attained.
pub fn dp_laws(p: u64, n: u32, samples: usize, seed: u64) -> Vec<ClaimEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params_json = json!({ "p": p, "n": n, "samples": samples });
    let Ok(pr) = RingParams::new(p, n) else {
        return vec![error_entry("dp.laws", params_json, "invalid ring parameters")];
    };
    let ring = DpRing::new(pr, &["Z", "W"]).expect("two variables");
    let capped = DpRing::with_caps(pr, &["Z", "W"], Some(8), vec![None, None]).expect("two variables");
    let k_nil = nilpotency_index(&pr);
    let mut fails: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut note = |name: &'static str, k: usize, ok: bool| {
        let list = fails.entry(name).or_default();
        if !ok {
            list.push(format!("sample {k}"));
        }
    };
    for k in 0..samples {
        let x = random_ideal_element(&ring, &mut rng);
        let y = random_ideal_element(&ring, &mut rng);
        let lambda = rng.gen_range(0..pr.modulus());
        let gx = x.dp_powers(6).expect("ideal element");
        let gy = y.dp_powers(6).expect("ideal element");
        let gs = (&x + &y).dp_powers(6).expect("ideal element");
        let gl = x.scale(lambda).dp_powers(6).expect("ideal element");
        let mut factorial_ok = true;
        let mut addition_ok = true;
        let mut homogeneity_ok = true;
        let mut product_ok = true;
        for q in 0..=6usize {
            factorial_ok &= gx[q].scale(factorial_mod(q as u64, &pr)) == x.pow(q as u64);
            let mut sum = DPPoly::zero(&ring);
            for i in 0..=q {
                sum = &sum + &gx[i].mul(&gy[q - i]);
            }
            addition_ok &= sum == gs[q];
            homogeneity_ok &= gl[q] == gx[q].scale(pr.pow(lambda, q as u64));
        }
        for a in 0..=3usize {
            for b in 0..=3usize {
                let c = crate::exactnum::binomial_mod((a + b) as u64, a as u64, &pr);
                product_ok &= gx[a].mul(&gx[b]) == gx[a + b].scale(c);
            }
        }
        note("dp.factorial", k, factorial_ok);
        note("dp.addition", k, addition_ok);
        note("dp.homogeneity", k, homogeneity_ok);
        note("dp.product", k, product_ok);
        let xc = x.in_ring(&capped);
        let one = DPPoly::one(&capped);
        let inverse = match (xc.exp_ideal(), (&one + &xc).log_unit()) {
            (Ok(e), Ok(l)) => e.log_unit().ok() == Some(xc.clone()) && l.exp_ideal().ok() == Some(&one + &xc),
            _ => false,
        };
        note("dp.exp_log", k, inverse);
        note("dp.nilpotency", k, x.pow(k_nil).is_zero());
    }
    let anchors = [
        ("dp.factorial", "q!·γ_q(x) = x^q"),
        ("dp.addition", "γ_q(x+y) = Σ γ_i(x)γ_{q−i}(y)"),
        ("dp.homogeneity", "γ_q(λx) = λ^q γ_q(x)"),
        ("dp.product", "γ_a(x)γ_b(x) = C(a+b, a)γ_{a+b}(x)"),
        ("dp.exp_log", "log(exp x) = x and exp(log(1+x)) = 1+x"),
        ("dp.nilpotency", "x^K = 0 for K = min{k : v_p(k!) ≥ n}"),
    ];
    let mut out: Vec<ClaimEntry> = anchors
        .iter()
        .map(|(id, anchor)| count_entry(id, anchor, params_json.clone(), samples, fails.remove(id).unwrap_or_default()))
        .collect();
    let z = DPPoly::var(&ring, 0, 1);
    let attained = k_nil >= 1 && !z.pow(k_nil - 1).is_zero() && z.pow(k_nil).is_zero();
    out.push(entry(
        "dp.nilpotency_attained",
        "Z^{K−1} ≠ 0 = Z^K",
        params_json,
        json!({ "K": k_nil }),
        WitnessMode::Exact,
        attained,
    ));
    out
}

/// Decompose-recombine and the eigenvector property `σ_i(x_α) = q^α x_α` on
/// random `A_model` elements, in every direction.
pub fn eigen_suite(model: &Model, samples: usize, seed: u64) -> Vec<ClaimEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elems: Vec<_> = (0..samples).map(|_| model.random_a_element(&mut rng, 3)).collect();
    let mut out = Vec::new();
    for i in model.directions() {
        let mut recombine = Vec::new();
        let mut eigen = Vec::new();
        let mut components = 0usize;
        for (k, x) in elems.iter().enumerate() {
            let parts = match model.decompose_eigen(x, i) {
                Ok(parts) => parts,
                Err(e) => {
                    recombine.push(format!("sample {k}: {e}"));
                    continue;
                }
            };
            let sum = parts.values().fold(model.zero(), |acc, c| acc.add(c));
            if sum != *x {
                recombine.push(format!("sample {k}"));
            }
            for (alpha, c) in &parts {
                components += 1;
                let ok = match (model.sigma(i, c), model.q_power(alpha)) {
                    (Ok(s), Ok(q)) => s == c.mul_coeff(&q),
                    _ => false,
                };
                if !ok {
                    eigen.push(format!("sample {k}, α = {alpha}"));
                }
            }
        }
        let params = json!({
            "p": model.p(), "n": model.desc().n, "m": model.desc().m, "d": model.d(), "r": model.r(),
            "c": model.mode().to_string(), "direction": i, "samples": samples,
        });
        out.push(count_entry("direct.recombine", "direct: A = ⊕_α F_α", params.clone(), samples, recombine));
        out.push(count_entry("direct.eigenvector", "direct: σ_i acts on F_α by [1̲]^α", params, components, eigen));
    }
    out
}

/// Smith-form kernel and image sizes against enumeration on random square and
/// rectangular matrices of size at most 3×3, then Koszul cohomology against
/// enumeration on every module of a fixed family whose cochain spaces are
/// small enough to enumerate (at most 12 coordinates).
pub fn koszul_suite(model: &Model, samples: usize, seed: u64) -> Vec<ClaimEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pr = model.params();
    let mut out = Vec::new();
    let mut failures = Vec::new();
    let mut checked = 0;
    for k in 0..samples {
        let (rows, cols) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let mut a = Matrix::zeros(rows, cols, pr);
        for i in 0..rows {
            for j in 0..cols {
                a.set(i, j, rng.gen_range(0..pr.modulus()));
            }
        }
        let Some((ker, im)) = enumerate_kernel_image(&a) else { continue };
        checked += 1;
        let snf = snf_local(&a);
        let pow = |e: u64| pr.p().pow(e as u32);
        if pow(snf.kernel_log_size()) != ker || pow(snf.image_log_size()) != im {
            failures.push(format!("sample {k}: {rows}×{cols}"));
        }
    }
    out.push(count_entry(
        "koszul.snf_oracle",
        "Smith form over Z/p^n matches enumeration",
        json!({ "p": pr.p(), "n": pr.n(), "samples": samples }),
        checked,
        failures,
    ));
    let blocks = standard_blocks(model);
    let mut families: Vec<Vec<_>> = blocks.iter().map(|b| vec![b.clone()]).collect();
    families.extend(blocks.iter().skip(1).map(|b| vec![blocks[0].clone(), b.clone()]));
    for exps in &families {
        for z in 0..=2 {
            for x in 0..=2 {
                let caps = ModuleCaps { z, x, pi_x: 0, xi: 0, with_directions: true };
                let Ok(module) = TruncatedModule::build(model, exps, caps) else { continue };
                let dim = module.dim();
                let top = module.directions.len();
                if dim == 0 || dim * binom_max(top) > 12 {
                    continue;
                }
                let complex = match module.koszul() {
                    Ok(c) => c,
                    Err(e) => {
                        out.push(error_entry("koszul.module_oracle", json!({ "z": z, "x": x }), e));
                        continue;
                    }
                };
                let mut degrees = Vec::new();
                let mut ok = true;
                let mut enumerable = true;
                for j in 0..=top {
                    let Some(brute) = enumerate_cohomology(&complex, j) else {
                        enumerable = false;
                        break;
                    };
                    match complex.cohomology(j) {
                        Ok(h) => {
                            ok &= h.log_size == brute;
                            degrees.push(json!({ "degree": j, "invariants": h.invariants, "enumerated_log_size": brute }));
                        }
                        Err(e) => {
                            ok = false;
                            degrees.push(json!({ "degree": j, "error": e.to_string() }));
                        }
                    }
                }
                if !enumerable {
                    continue;
                }
                let h0 = complex.h0_basis().len();
                out.push(entry(
                    "koszul.module_oracle",
                    "koszul: Galois cohomology via the Koszul complex",
                    json!({
                        "p": pr.p(), "n": pr.n(), "d": top,
                        "exponents": exps.iter().map(|e| e.to_strings()).collect::<Vec<_>>(),
                        "caps": { "z": z, "x": x }, "dim": dim,
                    }),
                    json!({ "cohomology": degrees, "h0_generators": h0 }),
                    WitnessMode::CapTruncated,
                    ok,
                ));
            }
        }
    }
    out
}

/// The largest binomial coefficient `C(d, k)`.
fn binom_max(d: usize) -> usize {
    let k = d / 2;
    (0..k).fold(1usize, |acc, j| acc * (d - j) / (j + 1))
}

/// `t^d`-annihilation on the model's default module, then the `H^0`
/// statement on its `A_model` part.
pub fn annihilation_suite(model: &Model) -> Result<Vec<ClaimEntry>, GaloisError> {
    let galois = Galois::new(model);
    let blocks = standard_blocks(model);
    let module = TruncatedModule::build(model, &blocks, ModuleCaps::from_model(model))?;
    let mut out = t_annihilation_suite(&galois, &module)?;
    let base = TruncatedModule::build(model, &blocks, ModuleCaps::base_only(model))?;
    out.extend(h0_invariants(&galois, &base)?);
    Ok(out)
}

fn strings(v: &[crate::exactnum::PadicExponent]) -> Vec<String> {
    v.iter().map(|c| c.to_string()).collect()
}

/// The two reference kernels: `Q ⊕ Z → Q, (α, m) ↦ α + m` with basis
/// `{(1, −1)}`, and `Q^r ⊕ Z^r → Q^r, (α, n) ↦ α + n` with basis
/// `{(−e_i, e_i)}`. The first is compared exactly; basis vectors of the second
/// are compared up to sign, since the normal form makes the first nonzero
/// coordinate positive.
pub fn lattice_suite(p: u64, r: usize) -> Vec<ClaimEntry> {
    let mut out = Vec::new();
    let q1 = MonoidChart::new(ChartKind::PadicNonneg, 1, 4, p);
    let z1 = MonoidChart::new(ChartKind::FreeNonneg, 1, 0, p);
    let params = json!({ "p": p, "map": "(α, m) ↦ α + m" });
    match LatticeMap::from_charts(&[q1, z1], &q1, vec![vec![1, 1]]).and_then(|m| kernel_l(&m)) {
        Ok(basis) => {
            let want = vec![crate::exactnum::PadicExponent::integer(1, p), crate::exactnum::PadicExponent::integer(-1, p)];
            let ok = basis == vec![want];
            out.push(entry(
                "lattice.kernel_value_group",
                "L consists of pairs (m, −m) ∈ Z²",
                params,
                json!({ "basis": basis.iter().map(|v| strings(v)).collect::<Vec<_>>(), "comparison": "exact" }),
                WitnessMode::Exact,
                ok,
            ));
        }
        Err(e) => out.push(error_entry("lattice.kernel_value_group", params, e)),
    }
    let qr = MonoidChart::new(ChartKind::PadicNonneg, r, 4, p);
    let zr = MonoidChart::new(ChartKind::FreeNonneg, r, 0, p);
    let mut matrix = vec![vec![0i64; 2 * r]; r];
    for (i, row) in matrix.iter_mut().enumerate() {
        row[i] = 1;
        row[r + i] = 1;
    }
    let params = json!({ "p": p, "r": r, "map": "(α, n) ↦ α + n" });
    match LatticeMap::from_charts(&[qr, zr], &qr, matrix).and_then(|m| kernel_l(&m)) {
        Ok(basis) => {
            let ok = basis.len() == r
                && basis.iter().enumerate().all(|(i, v)| {
                    let mut want = vec![0i64; 2 * r];
                    want[i] = -1;
                    want[r + i] = 1;
                    same_up_to_sign(v, &want)
                });
            out.push(entry(
                "lattice.kernel_torus",
                "L consists of tuples ((−n_i), (n_i))",
                params,
                json!({ "basis": basis.iter().map(|v| strings(v)).collect::<Vec<_>>(), "comparison": "up to sign" }),
                WitnessMode::Exact,
                ok,
            ));
        }
        Err(e) => out.push(error_entry("lattice.kernel_torus", params, e)),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_and_flag_precedence() {
        let file = parse_config_text("# comment\np = 3\nn=2\nsuite = constants, kummer\nc = one\ndeg-z = 7\n").unwrap();
        let flags = CliArgs { p: Some(5), ..CliArgs::default() };
        let cfg = flags.merged_over(file).resolve().unwrap();
        assert_eq!(cfg.p, 5);
        assert_eq!(cfg.c, CMode::One);
        assert_eq!(cfg.deg_z, 7);
        assert_eq!(cfg.suites, vec![Suite::Constants, Suite::Kummer]);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(CliArgs::default().resolve(), Err(CliError::Config(_))));
        assert!(parse_config_text("suite = nope").is_err());
        assert!(parse_config_text("p 3").is_err());
        let bad = CliArgs { p: Some(4), suites: vec![Suite::Kummer], ..CliArgs::default() };
        assert_eq!(bad.resolve().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::WittLaws, Suite::TPrimitive, Suite::LatticeL] {
            assert_eq!(Suite::parse(s.name()).unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), json!(s.name()));
        }
    }

    #[test]
    fn lattice_report_and_determinism() {
        let cfg = RunConfig::new(vec![Suite::LatticeL, Suite::Kummer]);
        let a = run(&cfg).unwrap();
        assert!(a.all_passed());
        assert_eq!(a.to_json_pretty(), run(&cfg).unwrap().to_json_pretty());
        let first = &a.suites["lattice-L"][0];
        assert_eq!(first.witness["basis"], json!([["1", "-1"]]));
    }

    #[test]
    fn small_law_suites_pass() {
        assert!(witt_laws(2, 2, 10, 1).iter().all(ClaimEntry::passed));
        assert!(dp_laws(3, 2, 10, 1).iter().all(ClaimEntry::passed));
    }
}
