//! Verification sweeps: every closed-form identity and structural claim about
//! the group rings and the X-family, checked exactly over parameter ranges.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupring::{
    ann_closed_form, ann_generic, build_p, build_q, chi, ideal_intersect, multigen_admissible, multigen_formula, phi_d, sigma_minus_one_pow,
    spec_generators, AnnSpec, GroupRingCtx, GroupRingElem, IdealHandle, Monotonicity,
};
use crate::indecomp::{decompose_fully, find_decomposition, is_indecomposable, DEFAULT_BUDGET, DEFAULT_SEED};
use crate::linalg::{howell, kernel, rank_mod_p, Matrix};
use crate::module::{ConcreteModule, IsoSignature, ModElement};
use crate::residue::{pow_class, pow_expansion_check, Level, RingCtx};
use crate::xfamily::{
    build_x, check_conditions, level_module, decompose_degenerate_n1, decompose_iii_failure, degenerate_relation_holds, quotient_split_check,
    recover_a, split_witnesses, XParams,
};

pub const SUITES: [&str; 15] = [
    "upower",
    "phi",
    "separate",
    "kerbasic",
    "phidb",
    "qhomo",
    "kerint",
    "star",
    "ideal",
    "cycprop",
    "theorem1",
    "section7",
    "prop51",
    "krullschmidt",
    "howell",
];

pub const DEFAULT_SWEEP_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DPolicy {
    /// Every residue mod p^m.
    All,
    /// An explicit list, reduced mod p^m.
    List(Vec<i64>),
}

/// Ranges and knobs for a sweep. Unset ranges fall back to the suite default.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p: Option<Vec<u64>>,
    pub n: Option<Vec<u32>>,
    pub m: Option<Vec<u32>>,
    pub d_policy: DPolicy,
    pub seed: u64,
    pub jobs: usize,
    pub samples: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { p: None, n: None, m: None, d_policy: DPolicy::All, seed: DEFAULT_SWEEP_SEED, jobs: 1, samples: None }
    }
}

impl SweepConfig {
    fn ps(&self, default: &[u64]) -> Vec<u64> {
        self.p.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ns(&self, default: &[u32]) -> Vec<u32> {
        self.n.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ms(&self, default: &[u32]) -> Vec<u32> {
        self.m.clone().unwrap_or_else(|| default.to_vec())
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn ds(&self, base: RingCtx) -> Vec<u64> {
        match &self.d_policy {
            DPolicy::All => (0..base.modulus()).collect(),
            DPolicy::List(v) => {
                let mut out: Vec<u64> = v.iter().map(|&d| base.reduce_i64(d)).collect();
                out.sort();
                out.dedup();
                out
            }
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("p", self.p.as_ref().is_some_and(|v| v.is_empty())),
            ("n", self.n.as_ref().is_some_and(|v| v.is_empty())),
            ("m", self.m.as_ref().is_some_and(|v| v.is_empty())),
        ] {
            if empty {
                return Err(Error::InvalidArgument(format!("empty range for {name}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    /// Which property the case checks; a suite may check several.
    pub check: String,
    pub id: String,
    pub verdict: Verdict,
    pub detail: String,
    /// Enough data to rerun the case.
    pub payload: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: SweepConfig,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub cases: Vec<CaseOutcome>,
    /// Observations outside the verdicts, such as cases excluded from a domain.
    pub notes: Vec<String>,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed == 0 && self.errors == 0 && self.passed > 0
    }

    pub fn cases_for(&self, check: &str) -> impl Iterator<Item = &CaseOutcome> {
        let check = check.to_string();
        self.cases.iter().filter(move |c| c.check == check)
    }

    /// (passed, total) for one check.
    pub fn tally(&self, check: &str) -> (usize, usize) {
        let total = self.cases_for(check).count();
        let passed = self.cases_for(check).filter(|c| c.verdict == Verdict::Pass).count();
        (passed, total)
    }
}

type CheckFn = Box<dyn Fn() -> Result<(bool, String)> + Send + Sync>;

struct Case {
    check: &'static str,
    id: String,
    payload: Value,
    run: CheckFn,
}

fn case(check: &'static str, id: String, payload: Value, run: impl Fn() -> Result<(bool, String)> + Send + Sync + 'static) -> Case {
    Case { check, id, payload, run: Box::new(run) }
}

fn run_cases(cases: Vec<Case>, jobs: usize) -> Result<Vec<CaseOutcome>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        cases
            .par_iter()
            .map(|c| {
                let (verdict, detail) = match catch_unwind(AssertUnwindSafe(|| (c.run)())) {
                    Ok(Ok((true, d))) => (Verdict::Pass, d),
                    Ok(Ok((false, d))) => (Verdict::Fail, d),
                    Ok(Err(e)) => (Verdict::Error, e.to_string()),
                    Err(_) => (Verdict::Error, "panicked".to_string()),
                };
                CaseOutcome { check: c.check.to_string(), id: c.id.clone(), verdict, detail, payload: c.payload.clone() }
            })
            .collect()
    }))
}

/// Runs one suite by name.
pub fn run_suite(name: &str, cfg: &SweepConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let mut notes = Vec::new();
    let cases = match name {
        "upower" => upower_cases(cfg)?,
        "phi" => phi_cases(cfg)?,
        "separate" => separate_cases(cfg)?,
        "kerbasic" => kerbasic_cases(cfg)?,
        "phidb" => phidb_cases(cfg)?,
        "qhomo" => qhomo_cases(cfg)?,
        "kerint" => kerint_cases(cfg, &mut notes)?,
        "star" => star_cases(cfg)?,
        "ideal" => ideal_cases(cfg)?,
        "cycprop" => cycprop_cases(cfg)?,
        "theorem1" => theorem1_cases(cfg)?,
        "section7" => section7_cases(cfg, &mut notes)?,
        "prop51" => prop51_cases(cfg)?,
        "krullschmidt" => krullschmidt_cases(cfg)?,
        "howell" => howell_cases(cfg)?,
        other => return Err(Error::InvalidArgument(format!("unknown suite {other:?}"))),
    };
    let outcomes = run_cases(cases, cfg.jobs)?;
    let count = |v: Verdict| outcomes.iter().filter(|c| c.verdict == v).count();
    Ok(Report {
        suite: name.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        passed: count(Verdict::Pass),
        failed: count(Verdict::Fail),
        errors: count(Verdict::Error),
        cases: outcomes,
        notes,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn case_rng(seed: u64, stream: u64, idx: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(idx as u128 * 1024);
    rng
}

fn ok_when(cond: bool, fail: impl FnOnce() -> String) -> (bool, String) {
    if cond {
        (true, String::new())
    } else {
        (false, fail())
    }
}

fn congruent(base: RingCtx, x: u64, y: u64, e: u32) -> bool {
    let q = base.p_pow(e.min(base.m()));
    let q = if e >= base.m() { base.modulus() } else { q };
    x % q == y % q
}

// ---------------------------------------------------------------- unit filtration

fn upower_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3, 4, 5, 6]) {
            let base = RingCtx::new(p, m)?;
            for i in 1..=m {
                for j in 0..=3u32 {
                    let payload = json!({"p": p, "m": m, "i": i, "j": j});
                    cases.push(case("upower", format!("p={p} m={m} i={i} j={j}"), payload, move || {
                        for d in 0..base.modulus() {
                            let d = base.residue(d);
                            if !d.in_u(Level::Finite(i)) {
                                continue;
                            }
                            let direct = d.pow(p.pow(j));
                            let class = pow_class(d, i, j)?;
                            if !class.contains(direct) {
                                return Ok((false, format!("d={} class {class:?} misses d^(p^j)={}", d.value(), direct.value())));
                            }
                            if !(p == 2 && j == 0) && !pow_expansion_check(d, i, j)? {
                                return Ok((false, format!("expansion congruence fails at d={}", d.value())));
                            }
                            if p == 2 && i == 1 && j > 0 && !direct.in_u(Level::Finite(j + 2)) {
                                return Ok((false, format!("d={}: d^(2^j) not in U_(j+2)", d.value())));
                            }
                        }
                        Ok((true, String::new()))
                    }));
                }
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- norm operators

fn int_class(p: u64, d: u64) -> (bool, Option<u32>) {
    // membership of the integer d in U_2, and v with d ∈ -U_v \ -U_{v+1} (p = 2)
    let in_u2 = (d as i128 - 1).rem_euclid((p * p) as i128) == 0;
    let v = if p == 2 && d % 2 == 1 { Some((d + 1).trailing_zeros()) } else { None };
    (in_u2, v)
}

fn phi_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                let ring = GroupRingCtx::from_parts(p, m, i)?;
                let base = ring.base();
                let payload = json!({"p": p, "m": m, "i": i});
                cases.push(case("phi", format!("p={p} m={m} i={i}"), payload, move || {
                    for d in 0..base.modulus() {
                        let dr = base.residue(d);
                        if !dr.in_u(Level::Finite(1)) {
                            continue;
                        }
                        let (in_u2, v) = int_class(p, d);
                        let minus_one = d == base.modulus() - 1;
                        for j in 0..=i {
                            let val = phi_d(&build_p(ring, i, Some(j))?, dr)?.value();
                            let fail = |what: &str| Ok((false, format!("d={d} j={j}: {what}, φ_d(P(i,j)) = {val}")));
                            if !congruent(base, val, 0, i - j) {
                                return fail("not divisible by p^(i-j)");
                            }
                            if j < i && (p > 2 || in_u2 || j > 0) && !congruent(base, val, base.p_pow(i - j), i - j + 1) {
                                return fail("refined case (1)");
                            }
                            if p == 2 && minus_one && j == 0 && i > 0 && val != 0 {
                                return fail("refined case (2)");
                            }
                            if let Some(v) = v {
                                if p == 2 && v >= 2 && j == 0 && i > 0 {
                                    let target = base.p_pow(i + v - 1);
                                    if !congruent(base, val, target, i + v) {
                                        return fail("refined case (3)");
                                    }
                                }
                            }
                        }
                    }
                    Ok((true, String::new()))
                }));
            }
        }
    }
    Ok(cases)
}

fn qhomo_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                for j in 0..i {
                    let ring = GroupRingCtx::from_parts(p, m, i)?;
                    let low = ring.with_level(j)?;
                    let base = ring.base();
                    let payload = json!({"p": p, "m": m, "i": i, "j": j});
                    cases.push(case("qhomo", format!("p={p} m={m} i={i} j={j}"), payload, move || {
                        for d in 0..base.modulus() {
                            let dr = base.residue(d);
                            if !dr.in_u(Level::Finite(1)) {
                                continue;
                            }
                            let (in_u2, v) = int_class(p, d);
                            let image = chi(&build_q(ring, i, Some(0), dr)?, j)?;
                            let coeffs_congruent = |target: &GroupRingElem, e: u32| {
                                image.coeffs().iter().zip(target.coeffs()).all(|(&x, &y)| congruent(base, x, y, e))
                            };
                            let fail = |what: &str| Ok((false, format!("d={d}: {what}, χ_j(Q_d(i,0)) = {image}")));
                            if !coeffs_congruent(&low.zero(), i - j) {
                                return fail("not divisible by p^(i-j)");
                            }
                            if (p > 2 || in_u2 || j > 0) && !coeffs_congruent(&build_q(low, j, Some(0), dr)?.scale(base.p_pow(i - j)), i - j + 1) {
                                return fail("refined case (1)");
                            }
                            if p == 2 && d == base.modulus() - 1 && j == 0 && !image.is_zero() {
                                return fail("refined case (2)");
                            }
                            if let Some(v) = v {
                                if p == 2 && v >= 2 && j == 0 && !coeffs_congruent(&low.scalar(base.p_pow(i + v - 1)), i + v) {
                                    return fail("refined case (3)");
                                }
                            }
                        }
                        Ok((true, String::new()))
                    }));
                }
            }
        }
    }
    Ok(cases)
}

// ---------------------------------------------------------------- ideals and annihilators

fn separate_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                for j in 0..i {
                    for k in 0..=m {
                        let ring = GroupRingCtx::from_parts(p, m, i)?;
                        let payload = json!({"p": p, "m": m, "i": i, "j": j, "k": k});
                        cases.push(case("separate", format!("p={p} m={m} i={i} j={j} k={k}"), payload, move || {
                            let pij = build_p(ring, i, Some(j))?;
                            let pk = ring.scalar(ring.base().p_pow(k));
                            let lhs = ideal_intersect(
                                &IdealHandle::generated_by(ring, vec![pij.clone()])?,
                                &IdealHandle::generated_by(ring, vec![pk.clone()])?,
                            )?;
                            let rhs = IdealHandle::generated_by(ring, vec![&pk * &pij])?;
                            Ok(ok_when(lhs == rhs, || "⟨P(i,j)⟩ ∩ ⟨p^k⟩ != ⟨p^k P(i,j)⟩".into()))
                        }));
                    }
                }
            }
        }
    }
    Ok(cases)
}

fn ann_case(check: &'static str, ring: GroupRingCtx, spec: AnnSpec, label: String) -> Case {
    let payload = json!({"p": ring.p(), "m": ring.m(), "i": ring.level(), "spec": spec});
    case(check, label, payload, move || {
        let generic = ann_generic(ring, &spec_generators(ring, &spec)?)?;
        let closed = ann_closed_form(ring, &spec)?;
        Ok(ok_when(generic == closed, || format!("closed form differs from the computed annihilator for {spec:?}")))
    })
}

fn kerbasic_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                let ring = GroupRingCtx::from_parts(p, m, i)?;
                for k in 0..=m {
                    cases.push(ann_case("kerbasic", ring, AnnSpec::Pow { k }, format!("p={p} m={m} i={i} ann p^{k}")));
                    for j in 0..i {
                        cases.push(ann_case(
                            "kerbasic",
                            ring,
                            AnnSpec::PowTimes { k, j },
                            format!("p={p} m={m} i={i} ann p^{k}(σ^(p^{j})-1)"),
                        ));
                    }
                }
            }
        }
    }
    Ok(cases)
}

fn phidb_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                let ring = GroupRingCtx::from_parts(p, m, i)?;
                for d in cfg.ds(ring.base()) {
                    if !ring.base().residue(d).in_u(Level::Finite(1)) {
                        continue;
                    }
                    cases.push(ann_case("phidb", ring, AnnSpec::SigmaMinusD { d }, format!("p={p} m={m} i={i} ann (σ-{d})")));
                }
            }
        }
    }
    Ok(cases)
}

/// Every (b, c) with t ≤ 2 that is weakly monotone.
fn multigen_specs(ring: GroupRingCtx) -> Vec<(Vec<u32>, Vec<Option<u32>>)> {
    let m = ring.m();
    let i = ring.level();
    let c_values: Vec<Option<u32>> = std::iter::once(None).chain((0..i).map(Some)).collect();
    let mut out = Vec::new();
    for len in 1..=3usize {
        let mut b_seqs: Vec<Vec<u32>> = vec![vec![]];
        let mut c_seqs: Vec<Vec<Option<u32>>> = vec![vec![]];
        for _ in 0..len {
            b_seqs = b_seqs.into_iter().flat_map(|s| (0..m).map(move |x| [s.clone(), vec![x]].concat())).collect();
            c_seqs = c_seqs.into_iter().flat_map(|s| c_values.iter().map(move |x| [s.clone(), vec![*x]].concat())).collect();
        }
        for b in &b_seqs {
            for c in &c_seqs {
                if multigen_admissible(ring, b, c, Monotonicity::Weak) {
                    out.push((b.clone(), c.clone()));
                }
            }
        }
    }
    out
}

fn kerint_cases(cfg: &SweepConfig, notes: &mut Vec<String>) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let (mut weak_only, mut weak_bad, mut weak_bad_c_repeat) = (0usize, 0usize, 0usize);
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                let ring = GroupRingCtx::from_parts(p, m, i)?;
                for (b, c) in multigen_specs(ring) {
                    if multigen_admissible(ring, &b, &c, Monotonicity::Strict) {
                        let label = format!("p={p} m={m} i={i} b={b:?} c={c:?}");
                        cases.push(ann_case("kerint", ring, AnnSpec::MultiGen { b, c }, label));
                        continue;
                    }
                    // the weak reading, evaluated directly on the displayed formula
                    weak_only += 1;
                    let generic = ann_generic(ring, &spec_generators(ring, &AnnSpec::MultiGen { b: b.clone(), c: c.clone() })?)?;
                    let formula = IdealHandle::generated_by(ring, multigen_formula(ring, &b, &c)?)?;
                    if generic != formula {
                        weak_bad += 1;
                        if c.windows(2).any(|w| w[0] == w[1]) {
                            weak_bad_c_repeat += 1;
                        }
                    }
                }
            }
        }
    }
    if weak_only > 0 {
        notes.push(format!(
            "weakly monotone sequences outside the strict reading: {weak_only}, formula wrong on {weak_bad} ({weak_bad_c_repeat} of them repeat an entry of c)"
        ));
    }
    Ok(cases)
}

// ---------------------------------------------------------------- random modules

fn random_ring(rng: &mut ChaCha8Rng, min_m: u32) -> GroupRingCtx {
    let p = [2u64, 3][rng.gen_range(0..2)];
    let m = rng.gen_range(min_m..=3);
    let max_i = if p == 2 { 2 } else { 1 };
    let i = rng.gen_range(0..=max_i);
    GroupRingCtx::from_parts(p, m, i).expect("small ring")
}

fn random_elem(rng: &mut ChaCha8Rng, ring: GroupRingCtx) -> GroupRingElem {
    let q = ring.base().modulus();
    let coeffs: Vec<u64> = (0..ring.order()).map(|_| rng.gen_range(0..q)).collect();
    ring.from_coeffs(&coeffs).expect("length")
}

/// A random relation: a random element times p^k or times a power of (σ-1).
fn random_relation(rng: &mut ChaCha8Rng, ring: GroupRingCtx) -> GroupRingElem {
    let r = random_elem(rng, ring);
    match rng.gen_range(0..3) {
        0 => r.scale(ring.base().p_pow(rng.gen_range(0..ring.m()))),
        1 => &r * &sigma_minus_one_pow(ring, rng.gen_range(0..=ring.order() as u64)),
        _ => r,
    }
}

/// A random module with the given number of generators and up to `rels` relations.
pub fn random_module(rng: &mut ChaCha8Rng, ring: GroupRingCtx, gens: usize, rels: usize) -> Result<ConcreteModule> {
    let order = ring.order();
    let count = rng.gen_range(0..=rels);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = vec![0; gens * order];
        for j in 0..gens {
            if rng.gen_bool(0.6) {
                v[j * order..(j + 1) * order].copy_from_slice(random_relation(rng, ring).coeffs());
            }
        }
        rows.push(v);
    }
    ConcreteModule::from_relation_rows(ring, gens, &rows, Vec::new())
}

fn random_nonzero_module(rng: &mut ChaCha8Rng, ring: GroupRingCtx, gens: usize) -> Result<ConcreteModule> {
    for _ in 0..64 {
        let m = random_module(rng, ring, gens, 2)?;
        if !m.is_zero_module() {
            return Ok(m);
        }
    }
    ConcreteModule::free(ring, 1)
}

fn random_element_of(rng: &mut ChaCha8Rng, m: &ConcreteModule) -> ModElement {
    let coords: Vec<u64> = m.divisors().iter().map(|&f| rng.gen_range(0..m.base().p().pow(f))).collect();
    m.element(&coords).expect("rank")
}

fn star_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for p in cfg.ps(&[2, 3, 5]) {
        for m in cfg.ms(&[1, 2, 3]) {
            for i in cfg.ns(&[0, 1, 2]) {
                let ring = GroupRingCtx::from_parts(p, m, i)?;
                let payload = json!({"p": p, "m": m, "i": i});
                cases.push(case("starrmgi", format!("p={p} m={m} i={i}"), payload, move || {
                    let free = ConcreteModule::free(ring, 1)?;
                    let top = ring.base().p_pow(m - 1);
                    let a = free.combine(&[sigma_minus_one_pow(ring, ring.order() as u64 - 1).scale(top)])?;
                    let b = free.combine(&[build_p(ring, i, Some(0))?.scale(top)])?;
                    let star = free.star();
                    let ok = star == free.submodule_generated(&[a]) && star == free.submodule_generated(&[b]) && star.log_order() == 1;
                    Ok(ok_when(ok, || format!("(R_mG_i)* has order p^{} and differs from the closed form", star.log_order())))
                }));
            }
        }
    }
    let samples = cfg.samples_or(200);
    let seed = cfg.seed;
    for idx in 0..samples as u64 {
        cases.push(case("starzero", format!("random module #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 1, idx);
            let ring = random_ring(&mut rng, 1);
            let gens = rng.gen_range(1..=2);
            let m = random_nonzero_module(&mut rng, ring, gens)?;
            Ok(ok_when(!m.star().is_zero(), || format!("M* = 0 for a module of order p^{}", m.log_order())))
        }));
    }
    for idx in 0..samples as u64 {
        cases.push(case("excl", format!("random submodule pair #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 2, idx);
            for _ in 0..256 {
                let ring = random_ring(&mut rng, 1);
                let (m, m1, m2) = if rng.gen_bool(0.5) {
                    let a = random_nonzero_module(&mut rng, ring, 1)?;
                    let b = random_nonzero_module(&mut rng, ring, 1)?;
                    let s = a.direct_sum(&b)?;
                    let ra = random_element_of(&mut rng, &a);
                    let rb = random_element_of(&mut rng, &b);
                    let u1 = s.element(&[ra.coords, vec![0; b.rank()]].concat())?;
                    let u2 = s.element(&[vec![0; a.rank()], rb.coords].concat())?;
                    let m1 = s.submodule_generated(&[u1]);
                    let m2 = s.submodule_generated(&[u2]);
                    (s, m1, m2)
                } else {
                    let s = random_nonzero_module(&mut rng, ring, 2)?;
                    let u1 = random_element_of(&mut rng, &s);
                    let u2 = random_element_of(&mut rng, &s);
                    let m1 = s.submodule_generated(&[u1]);
                    let m2 = s.submodule_generated(&[u2]);
                    (s, m1, m2)
                };
                let star = m.star();
                let s1 = m1.intersect(&star)?;
                let s2 = m2.intersect(&star)?;
                if !s1.intersect(&s2)?.is_zero() {
                    continue;
                }
                let sum = m1.sum(&m2)?;
                return Ok(ok_when(sum.log_order() == m1.log_order() + m2.log_order(), || {
                    format!("|M1+M2| = p^{} but |M1||M2| = p^{}", sum.log_order(), m1.log_order() + m2.log_order())
                }));
            }
            Err(Error::BudgetExhausted(256))
        }));
    }
    Ok(cases)
}

fn ideal_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let samples = cfg.samples_or(200);
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for idx in 0..samples as u64 {
        cases.push(case("idealrmgi", format!("random ideal #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 3, idx);
            let ring = random_ring(&mut rng, 1);
            let count = rng.gen_range(1..=2);
            let mut gens = Vec::new();
            while gens.len() < count {
                let g = random_relation(&mut rng, ring);
                if !g.is_zero() {
                    gens.push(g);
                }
            }
            let ideal = IdealHandle::generated_by(ring, gens)?;
            let target = sigma_minus_one_pow(ring, ring.order() as u64 - 1).scale(ring.base().p_pow(ring.m() - 1));
            Ok(ok_when(ideal.contains(&target), || format!("{:?} misses p^(m-1)(σ-1)^(p^i-1)", ideal.generators())))
        }));
    }
    Ok(cases)
}

fn cycprop_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let samples = cfg.samples_or(200);
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for idx in 0..samples as u64 {
        cases.push(case("cycprop", format!("random module #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 4, idx);
            for _ in 0..256 {
                let ring = random_ring(&mut rng, 2);
                let order = ring.order();
                let base = ring.base();
                let gens = rng.gen_range(1..=3);
                let mut rows = Vec::new();
                if rng.gen_bool(0.7) {
                    // e_k = f_k e_0 modulo p^{m-1}
                    for k in 1..gens {
                        let mut v = vec![0; gens * order];
                        v[k * order] = 1;
                        let f = random_elem(&mut rng, ring);
                        for t in 0..order {
                            v[t] = base.neg(f.coeffs()[t]);
                        }
                        let l = rng.gen_range(0..gens);
                        let h = random_elem(&mut rng, ring).scale(base.p_pow(base.m() - 1));
                        for t in 0..order {
                            v[l * order + t] = base.add(v[l * order + t], h.coeffs()[t]);
                        }
                        rows.push(v);
                    }
                }
                let extra = random_module(&mut rng, ring, gens, 2)?;
                rows.extend(extra.relations().iter().cloned());
                let m = ConcreteModule::from_relation_rows(ring, gens, &rows, Vec::new())?;
                if !m.quotient_mod_pk(base.m() - 1)?.is_cyclic() {
                    continue;
                }
                return Ok(ok_when(m.is_cyclic(), || format!("M/p^(m-1)M cyclic but g(M) = {}", m.min_generators())));
            }
            Err(Error::BudgetExhausted(256))
        }));
    }
    Ok(cases)
}

// ---------------------------------------------------------------- X-family

fn x_tuples(cfg: &SweepConfig) -> Result<Vec<XParams>> {
    let mut out = Vec::new();
    for p in cfg.ps(&[2, 3]) {
        for n in cfg.ns(&[1, 2]) {
            for m in cfg.ms(&[1, 2, 3]) {
                let base = RingCtx::new(p, m)?;
                let ds = cfg.ds(base);
                out.extend(XParams::enumerate(p, n, m)?.into_iter().filter(|t| ds.contains(&t.d)));
            }
        }
    }
    Ok(out)
}

fn params_id(t: &XParams) -> String {
    let a: Vec<String> = t.a.iter().map(|x| x.map_or("-inf".to_string(), |v| v.to_string())).collect();
    format!("p={} n={} m={} a=({}) d={}", t.p, t.n, t.m, a.join(","), t.d)
}

fn theorem1_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    for t in x_tuples(cfg)? {
        if !check_conditions(&t).overall {
            continue;
        }
        let payload = serde_json::to_value(&t).expect("serializable");
        let id = params_id(&t);
        let t1 = t.clone();
        cases.push(case("indecomposable", id.clone(), payload.clone(), move || {
            let x = build_x(&t1)?;
            if !x.relations_hold()? {
                return Ok((false, "defining relations fail in the built module".into()));
            }
            let (ind, rep) = is_indecomposable(&x.module)?;
            Ok(ok_when(ind, || format!("End(X) is not local: {rep:?}")))
        }));
        let t2 = t.clone();
        cases.push(case("lengths", id.clone(), payload.clone(), move || {
            let x = build_x(&t2)?;
            let lens: Vec<usize> = (0..t2.m as usize).map(|i| x.len_x(i)).collect();
            Ok(ok_when(x.lengths_match(), || format!("l(y) = {}, l(x_i) = {lens:?}", x.len_y())))
        }))
        ;
        if t.m >= 2 {
            let t3 = t.clone();
            cases.push(case("quotient-split", id, payload, move || {
                let x = build_x(&t3)?;
                Ok(ok_when(quotient_split_check(&x)?, || "X/p^(m-1)X and A ⊕ B have different signatures".into()))
            }));
        }
    }
    Ok(cases)
}

/// The split-off of ⟨x_{m-1}⟩ at witness i. When the explicit Q does not exist
/// the module is decomposed generically and its summands compared with
/// X_â ⊕ R_mG_{a_{m-1}}.
pub fn check_split_off(t: &XParams, i: usize) -> Result<(bool, String)> {
    let x = build_x(t)?;
    match decompose_iii_failure(t, i) {
        Ok(split) => {
            split.certificate.verify(&x.module)?;
            let (ind, _) = is_indecomposable(&x.module)?;
            Ok(ok_when(!ind, || "certificate verified but End(X) reported local".into()))
        }
        Err(Error::Inconsistency(why)) => {
            let Some(cert) = find_decomposition(&x.module, DEFAULT_SEED, DEFAULT_BUDGET)? else {
                return Ok((false, format!("{why}; X is indecomposable")));
            };
            cert.verify(&x.module)?;
            let mut hat = t.a.clone();
            let top = hat[t.m as usize - 1].take();
            let hat_x = build_x(&XParams::new(t.p, t.n, t.m, hat, t.d as i64)?)?;
            let mut expected: Vec<IsoSignature> = decompose_fully(&hat_x.module, DEFAULT_SEED)?.iter().map(|s| s.iso_signature()).collect();
            expected.push(level_module(t.ring(), top, None)?.iso_signature());
            expected.sort();
            let mut found: Vec<IsoSignature> = decompose_fully(&x.module, DEFAULT_SEED)?.iter().map(|s| s.iso_signature()).collect();
            found.sort();
            Ok(ok_when(found == expected, || {
                format!("{why}; a generic certificate verifies but the summands differ from X_â ⊕ R_mG_(a_(m-1))")
            }))
        }
        Err(e) => Err(e),
    }
}

fn section7_cases(cfg: &SweepConfig, notes: &mut Vec<String>) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let (mut no_witness, mut lemma_gap) = (0usize, 0usize);
    for t in x_tuples(cfg)? {
        let report = check_conditions(&t);
        if !report.i || report.iii {
            continue;
        }
        let witnesses = split_witnesses(&t);
        if witnesses.is_empty() {
            no_witness += 1;
            continue;
        }
        let top = t.a[t.m as usize - 1].expect("witness");
        for i in witnesses {
            let ai = t.a[i].expect("witness");
            // the norm congruence behind Q needs p > 2, d ∈ U_2 or a_i > 0 (or a_i = a_{m-1})
            if !(t.p > 2 || t.in_u(2) || ai > 0 || ai == top) {
                lemma_gap += 1;
            }
            let t1 = t.clone();
            let payload = json!({"params": t, "witness": i});
            cases.push(case("split-off", format!("{} witness {i}", params_id(&t)), payload, move || check_split_off(&t1, i)));
        }
    }
    notes.push(format!(
        "{lemma_gap} witness cases have p = 2, d ∉ U_2 and 0 = a_i < a_(m-1), where the congruence for φ_d(P(a_(m-1),a_i)) is not available"
    ));
    if no_witness > 0 {
        notes.push(format!("{no_witness} tuples with (I) but not (III) have no guarded witness index"));
    }
    let ms = cfg.ms(&[2, 3]);
    let ns = cfg.ns(&[1]);
    if cfg.ps(&[2]).contains(&2) && ns.contains(&1) {
        for m in ms.into_iter().filter(|&m| m >= 2) {
            let base = RingCtx::new(2, m)?;
            for d in cfg.ds(base) {
                if d % 2 == 0 || base.residue(d).in_u(Level::Finite(2)) {
                    continue;
                }
                let mut a = vec![None; m as usize];
                a[0] = Some(0);
                a[m as usize - 1] = Some(1);
                let t = XParams::new(2, 1, m, a, d as i64)?;
                let failed = check_conditions(&t).failed;
                if failed != ["IV"] {
                    notes.push(format!("degenerate shape {} fails {failed:?}, not only (IV)", params_id(&t)));
                }
                let payload = json!({"params": t, "failed": failed});
                cases.push(case("degenerate", params_id(&t), payload, move || {
                    let x = build_x(&t)?;
                    if !degenerate_relation_holds(&x)? {
                        let decomposable = find_decomposition(&x.module, DEFAULT_SEED, DEFAULT_BUDGET)?.is_some();
                        return Ok((false, format!("2^(m-1)(σ+1)x_(m-1) != 0 (X decomposable: {decomposable})")));
                    }
                    let split = decompose_degenerate_n1(&t)?;
                    split.certificate.verify(&x.module)?;
                    Ok((true, String::new()))
                }));
            }
        }
    }
    Ok(cases)
}

/// log_p of |(σ-1)X|, an isomorphism invariant outside the signature.
fn sigma_minus_one_image_order(t: &XParams) -> Result<u64> {
    let x = build_x(t)?;
    let m = &x.module;
    let s = &m.ring().sigma() - &m.ring().one();
    let images = (0..m.gens()).map(|j| m.act(&s, &m.gen(j))).collect::<Result<Vec<_>>>()?;
    Ok(m.submodule_generated(&images).log_order())
}

fn prop51_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let mut cases = Vec::new();
    let tuples: Vec<XParams> = x_tuples(cfg)?.into_iter().filter(|t| check_conditions(t).overall).collect();
    let mut groups: Vec<((u64, u32, u32), Vec<XParams>)> = Vec::new();
    for t in &tuples {
        let key = (t.p, t.n, t.m);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(t.clone()),
            None => groups.push((key, vec![t.clone()])),
        }
    }
    for ((p, n, m), group) in groups {
        let payload = json!({"p": p, "n": n, "m": m, "tuples": group});
        cases.push(case("distinct-signatures", format!("p={p} n={n} m={m}"), payload, move || {
            let sigs: Vec<(XParams, IsoSignature)> =
                group.iter().map(|t| Ok((t.clone(), build_x(t)?.module.iso_signature()))).collect::<Result<_>>()?;
            let mut pairs = 0usize;
            let mut collisions = Vec::new();
            for (x, (ta, sa)) in sigs.iter().enumerate() {
                for (tb, sb) in &sigs[x + 1..] {
                    if ta.a == tb.a {
                        continue;
                    }
                    pairs += 1;
                    if sa == sb {
                        let (ea, eb) = (sigma_minus_one_image_order(ta)?, sigma_minus_one_image_order(tb)?);
                        collisions.push(format!(
                            "{} and {} share a signature, |(σ-1)X| = p^{ea} vs p^{eb}",
                            params_id(ta),
                            params_id(tb)
                        ));
                    }
                }
            }
            if !collisions.is_empty() {
                return Ok((false, collisions.join(" | ")));
            }
            Ok((true, format!("{pairs} pairs")))
        }));
    }
    let seed = cfg.seed;
    for t in tuples {
        let payload = serde_json::to_value(&t).expect("serializable");
        cases.push(case("recover-a", params_id(&t), payload, move || {
            let x = build_x(&t)?;
            let a = recover_a(&x.module, seed)?;
            Ok(ok_when(a == t.a, || format!("recovered {a:?}")))
        }));
    }
    Ok(cases)
}

/// A random module that is a direct sum of two or three nonzero random modules,
/// re-presented on mixed generators so the blocks are not visible.
pub fn random_decomposable(rng: &mut ChaCha8Rng) -> Result<ConcreteModule> {
    let p = [2u64, 3][rng.gen_range(0..2)];
    let m = rng.gen_range(1..=2);
    let i = rng.gen_range(0..=1);
    let ring = GroupRingCtx::from_parts(p, m, i)?;
    let parts = rng.gen_range(2..=3);
    let mut sum = random_nonzero_module(rng, ring, 1)?;
    let mut tops = vec![0usize];
    for _ in 1..parts {
        tops.push(sum.gens());
        let next = random_nonzero_module(rng, ring, 1)?;
        sum = sum.direct_sum(&next)?;
    }
    // g_0 + Σ f_k g_k together with the other generators still generates the sum
    let mut gens: Vec<ModElement> = (0..sum.gens()).map(|j| sum.gen(j)).collect();
    let mut first = gens[0].clone();
    for g in gens.iter().skip(1) {
        let f = random_elem(rng, ring);
        first = sum.add(&first, &sum.act(&f, g)?);
    }
    gens[0] = first;
    let labels = (0..gens.len()).map(|j| format!("u{j}")).collect();
    Ok(sum.from_images(&gens, labels)?.0)
}

fn krullschmidt_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let samples = cfg.samples_or(50);
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for idx in 0..samples as u64 {
        cases.push(case("krull-schmidt", format!("random decomposable module #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 5, idx);
            let m = random_decomposable(&mut rng)?;
            let mut reference: Option<Vec<IsoSignature>> = None;
            for k in 0..5u64 {
                let parts = decompose_fully(&m, seed.wrapping_add(1 + k * 7919))?;
                if parts.len() < 2 {
                    return Ok((false, format!("only {} summand(s) found", parts.len())));
                }
                let mut sigs: Vec<IsoSignature> = parts.iter().map(|s| s.iso_signature()).collect();
                sigs.sort();
                match &reference {
                    None => reference = Some(sigs),
                    Some(r) if *r != sigs => return Ok((false, format!("seed {k} gives a different summand multiset"))),
                    _ => {}
                }
            }
            Ok((true, format!("{} summands", reference.map_or(0, |r| r.len()))))
        }));
    }
    Ok(cases)
}

// ---------------------------------------------------------------- linear algebra

fn random_matrix(rng: &mut ChaCha8Rng, base: RingCtx, rows: usize, cols: usize) -> Matrix {
    let data: Vec<Vec<u64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..base.modulus())).collect()).collect();
    Matrix::from_rows(base, cols, &data).expect("shape")
}

fn random_invertible(rng: &mut ChaCha8Rng, base: RingCtx, n: usize) -> Matrix {
    loop {
        let u = random_matrix(rng, base, n, n);
        if rank_mod_p(&u) == n {
            return u;
        }
    }
}

fn howell_cases(cfg: &SweepConfig) -> Result<Vec<Case>> {
    let samples = cfg.samples_or(1000);
    let seed = cfg.seed;
    let mut cases = Vec::new();
    for idx in 0..samples as u64 {
        cases.push(case("canonicity", format!("trial #{idx}"), json!({"seed": seed, "instance": idx}), move || {
            let mut rng = case_rng(seed, 6, idx);
            let p = [2u64, 3][rng.gen_range(0..2)];
            let base = RingCtx::new(p, rng.gen_range(1..=3))?;
            let rows = rng.gen_range(1..=6);
            let cols = rng.gen_range(1..=6);
            let a = random_matrix(&mut rng, base, rows, cols);
            let u = random_invertible(&mut rng, base, rows);
            let h1 = howell(&a);
            let h2 = howell(&u.mul(&a)?);
            let spans = a.row_vecs().iter().all(|r| h1.contains(r)) && h1.matrix().row_vecs().iter().all(|r| h2.contains(r));
            Ok(ok_when(h1.matrix() == h2.matrix() && spans, || format!("forms differ for A = {:?}", a.row_vecs())))
        }));
    }
    // kernel completeness on every shape whose domain has at most 10^4 vectors
    for p in [2u64, 3, 5] {
        for m in 1..=3u32 {
            let base = RingCtx::new(p, m)?;
            let q = base.modulus();
            for rows in 1..=6usize {
                if (q as u128).pow(rows as u32) > 10_000 {
                    break;
                }
                for cols in 1..=3usize {
                    let total = (q as u128).checked_pow((rows * cols) as u32).unwrap_or(u128::MAX);
                    let payload = json!({"p": p, "m": m, "rows": rows, "cols": cols, "seed": seed});
                    cases.push(case("kernel", format!("p={p} m={m} {rows}x{cols}"), payload, move || {
                        let mut rng = case_rng(seed, 7, (p * 1000 + m as u64 * 100 + rows as u64 * 10 + cols as u64) as u64);
                        let mats: Vec<Matrix> = if total <= 256 {
                            (0..total as u64)
                                .map(|mut idx| {
                                    let data: Vec<Vec<u64>> = (0..rows)
                                        .map(|_| {
                                            (0..cols)
                                                .map(|_| {
                                                    let v = idx % q;
                                                    idx /= q;
                                                    v
                                                })
                                                .collect()
                                        })
                                        .collect();
                                    Matrix::from_rows(base, cols, &data).expect("shape")
                                })
                                .collect()
                        } else {
                            (0..12).map(|_| random_matrix(&mut rng, base, rows, cols)).collect()
                        };
                        let domain = q.pow(rows as u32);
                        for a in &mats {
                            let k = howell(&kernel(a));
                            for idx in 0..domain {
                                let mut x = vec![0u64; rows];
                                let mut r = idx;
                                for v in x.iter_mut() {
                                    *v = r % q;
                                    r /= q;
                                }
                                let zero = a.vec_mul(&x).iter().all(|&v| v == 0);
                                if zero != k.contains(&x) {
                                    return Ok((false, format!("x = {x:?} disagrees for A = {:?}", a.row_vecs())));
                                }
                            }
                        }
                        Ok((true, format!("{} matrices", mats.len())))
                    }));
                }
            }
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &SweepConfig::default()).is_err());
    }

    #[test]
    fn reports_are_deterministic_across_job_counts() {
        let mut cfg = SweepConfig { samples: Some(12), ..SweepConfig::default() };
        let a = run_suite("ideal", &cfg).unwrap();
        cfg.jobs = 4;
        let b = run_suite("ideal", &cfg).unwrap();
        assert_eq!(a.cases, b.cases);
        assert!(a.all_pass());
    }

    #[test]
    fn small_kerbasic_sweep_passes() {
        let cfg = SweepConfig { p: Some(vec![2, 3]), m: Some(vec![1, 2]), n: Some(vec![0, 1]), ..SweepConfig::default() };
        let r = run_suite("kerbasic", &cfg).unwrap();
        assert!(r.all_pass(), "{:?}", r.cases.iter().find(|c| c.verdict != Verdict::Pass));
    }
}
