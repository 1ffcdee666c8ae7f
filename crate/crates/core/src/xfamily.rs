//! The modules X_{a,d,m} = ⟨y, x_0, …, x_{m-1} : (σ-d)y = Σ p^i x_i, σ^{p^{a_i}} x_i = x_i⟩
//! over R_mG_n, the hypotheses (I)–(V) on (a, d, m), and the constructions
//! that split X when those hypotheses fail.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupring::{build_p, GroupRingCtx, GroupRingElem};
use crate::indecomp::{decompose_fully, DecompositionCertificate};
use crate::linalg::Solver;
use crate::module::{ConcreteModule, IsoSignature, ModElement, ModulePresentation};
use crate::residue::{Level, RingCtx};

/// Upper bound on p^n · (m+1), the coordinate count of the free cover of X.
pub const MAX_COVER_RANK: u64 = 400;

#[derive(Clone, Debug, Deserialize)]
struct RawParams {
    p: u64,
    n: u32,
    m: u32,
    a: Vec<Option<u32>>,
    d: i64,
}

/// The data (p, n, m, a, d); d is stored reduced mod p^m and None in a stands for -∞.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct XParams {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    pub a: Vec<Option<u32>>,
    pub d: u64,
}

impl TryFrom<RawParams> for XParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        XParams::new(r.p, r.n, r.m, r.a, r.d)
    }
}

impl XParams {
    pub fn new(p: u64, n: u32, m: u32, a: Vec<Option<u32>>, d: i64) -> Result<Self> {
        let base = RingCtx::new(p, m)?;
        GroupRingCtx::new(base, n)?;
        if a.len() != m as usize {
            return Err(Error::ShapeMismatch(format!("a has {} entries but m = {m}", a.len())));
        }
        if let Some(bad) = a.iter().flatten().find(|&&ai| ai > n) {
            return Err(Error::InvalidArgument(format!("a_i = {bad} exceeds n = {n}")));
        }
        if let Some(a0) = a[0] {
            if a0 >= n {
                return Err(Error::InvalidArgument(format!("a_0 = {a0} must be below n = {n}")));
            }
        }
        Ok(XParams { p, n, m, a, d: base.reduce_i64(d) })
    }

    pub fn base(&self) -> RingCtx {
        RingCtx::new(self.p, self.m).expect("validated")
    }

    pub fn ring(&self) -> GroupRingCtx {
        GroupRingCtx::new(self.base(), self.n).expect("validated")
    }

    pub fn in_u(&self, level: u32) -> bool {
        self.base().residue(self.d).in_u(Level::Finite(level))
    }

    /// (a_0, …, a_{m-2}) with d reduced mod p^{m-1}.
    pub fn truncated(&self) -> Result<XParams> {
        if self.m < 2 {
            return Err(Error::Precondition("truncation needs m >= 2".into()));
        }
        let a = self.a[..self.m as usize - 1].to_vec();
        XParams::new(self.p, self.n, self.m - 1, a, self.d as i64)
    }

    /// Every parameter tuple with a ∈ {-∞, 0, …, n}^m, a_0 < n, and d ∈ [0, p^m).
    pub fn enumerate(p: u64, n: u32, m: u32) -> Result<Vec<XParams>> {
        let base = RingCtx::new(p, m)?;
        let choices: Vec<Option<u32>> = std::iter::once(None).chain((0..=n).map(Some)).collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; m as usize];
        loop {
            let a: Vec<Option<u32>> = idx.iter().map(|&k| choices[k]).collect();
            if a[0].map_or(true, |a0| a0 < n) {
                for d in 0..base.modulus() {
                    out.push(XParams { p, n, m, a: a.clone(), d });
                }
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return Ok(out);
                }
                idx[pos] += 1;
                if idx[pos] < choices.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Verdicts for the hypotheses (I)–(V).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
    pub iv: bool,
    pub v: bool,
    /// The v with d ∈ -U_v \ -U_{v+1}, v ≥ 2, when p = 2 and one exists.
    pub minus_level: Option<u32>,
    pub overall: bool,
    pub failed: Vec<String>,
}

fn lt(x: Option<u32>, j: u32, y: Option<u32>) -> bool {
    // x + j < y with -∞ below every integer
    match (x, y) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(x), Some(y)) => x + j < y,
    }
}

pub fn check_conditions(params: &XParams) -> ConditionReport {
    let base = params.base();
    let d = base.residue(params.d);
    let p = params.p;
    let m = params.m as usize;
    let a = &params.a;
    let cond_i = d.in_u(Level::Finite(1));
    let cond_ii = a.iter().enumerate().all(|(i, ai)| match ai {
        None => true,
        Some(e) => d.pow(p.pow(*e)).in_u(Level::Finite(i as u32 + 1)),
    });
    let exception = p == 2 && !params.in_u(2) && a[0] == Some(0);
    let mut cond_iii = true;
    for i in 0..m {
        if i == 0 && exception {
            if (1..m).any(|j| a[j] == Some(0)) {
                cond_iii = false;
            }
            continue;
        }
        for j in 1..m - i {
            if a[i + j].is_some() && !lt(a[i], j as u32, a[i + j]) {
                cond_iii = false;
            }
        }
    }
    let cond_iv = !(p == 2 && params.n == 1) || a[0].is_none();
    let mut minus_level = None;
    let mut cond_v = true;
    if p == 2 && cond_i {
        if let Ok(Level::Finite(v)) = d.minus_u_level() {
            if v >= 2 {
                minus_level = Some(v);
                if m >= 2 && a[0] == Some(0) {
                    for i in v as usize..m {
                        if let Some(ai) = a[i] {
                            if ai as i64 <= i as i64 - (v as i64 - 1) {
                                cond_v = false;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut failed = Vec::new();
    for (ok, tag) in [(cond_i, "I"), (cond_ii, "II"), (cond_iii, "III"), (cond_iv, "IV"), (cond_v, "V")] {
        if !ok {
            failed.push(tag.to_string());
        }
    }
    ConditionReport {
        i: cond_i,
        ii: cond_ii,
        iii: cond_iii,
        iv: cond_iv,
        v: cond_v,
        minus_level,
        overall: failed.is_empty(),
        failed,
    }
}

/// X_{a,d,m} with its generators labelled y, x0, …, x{m-1}.
#[derive(Clone, Debug)]
pub struct XModule {
    pub params: XParams,
    pub module: ConcreteModule,
}

impl XModule {
    pub fn y(&self) -> ModElement {
        self.module.gen(0)
    }

    pub fn x(&self, i: usize) -> ModElement {
        self.module.gen(1 + i)
    }

    pub fn len_y(&self) -> usize {
        self.module.length(&self.y())
    }

    pub fn len_x(&self, i: usize) -> usize {
        self.module.length(&self.x(i))
    }

    /// l(y) = p^{a_0}+1 and l(x_i) = p^{a_i}, with p^{-∞} = 0.
    pub fn lengths_match(&self) -> bool {
        let pw = |e: Option<u32>| e.map_or(0, |e| self.params.p.pow(e) as usize);
        self.len_y() == pw(self.params.a[0]) + 1 && (0..self.params.m as usize).all(|i| self.len_x(i) == pw(self.params.a[i]))
    }

    /// (σ-d)y = Σ p^i x_i and σ^{p^{a_i}} x_i = x_i, exactly.
    pub fn relations_hold(&self) -> Result<bool> {
        let ring = self.module.ring();
        let base = ring.base();
        let m = &self.module;
        let lhs = m.act(&(&ring.sigma() - &ring.scalar(self.params.d)), &self.y())?;
        let mut rhs = m.zero();
        for i in 0..self.params.m as usize {
            rhs = m.add(&rhs, &m.scale(&self.x(i), base.p_pow(i as u32)));
        }
        if lhs != rhs {
            return Ok(false);
        }
        for (i, ai) in self.params.a.iter().enumerate() {
            let ok = match ai {
                None => m.is_zero(&self.x(i)),
                Some(e) => m.act(&ring.sigma_pow(self.params.p.pow(*e)), &self.x(i))? == self.x(i),
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn x_labels(m: usize) -> Vec<String> {
    std::iter::once("y".to_string()).chain((0..m).map(|i| format!("x{i}"))).collect()
}

/// The presentation of X with the given a and d over `ring`, optionally with
/// every generator also killed by p^kill. a_0 is not range-checked here.
pub fn x_presentation(ring: GroupRingCtx, a: &[Option<u32>], d: u64, kill: Option<u32>) -> ModulePresentation {
    let base = ring.base();
    let m = a.len();
    let g = m + 1;
    let mut relations = Vec::new();
    let mut first = vec![&ring.sigma() - &ring.scalar(d)];
    for i in 0..m {
        first.push(ring.scalar(base.neg(base.p_pow(i as u32))));
    }
    relations.push(first);
    for (i, ai) in a.iter().enumerate() {
        let mut row = vec![ring.zero(); g];
        row[1 + i] = match ai {
            None => ring.one(),
            Some(e) => &ring.sigma_pow(base.p().pow(*e)) - &ring.one(),
        };
        relations.push(row);
    }
    if let Some(k) = kill {
        for j in 0..g {
            let mut row = vec![ring.zero(); g];
            row[j] = ring.scalar(base.p_pow(k));
            relations.push(row);
        }
    }
    ModulePresentation { ring, gens: g, relations, labels: x_labels(m) }
}

fn check_scale(params: &XParams) -> Result<()> {
    let cover = params.p.pow(params.n) * (params.m as u64 + 1);
    if cover > MAX_COVER_RANK {
        return Err(Error::TooLarge(format!("free cover of rank {cover}")));
    }
    Ok(())
}

/// Builds X_{a,d,m} over R_mG_n. The hypotheses (I)–(V) are not required.
pub fn build_x(params: &XParams) -> Result<XModule> {
    check_scale(params)?;
    let module = ConcreteModule::realize(&x_presentation(params.ring(), &params.a, params.d, None))?;
    Ok(XModule { params: params.clone(), module })
}

/// R_mG_j as a cyclic R_mG_n-module, optionally killed by p^kill; zero for j = -∞.
pub fn level_module(ring: GroupRingCtx, j: Option<u32>, kill: Option<u32>) -> Result<ConcreteModule> {
    let base = ring.base();
    let mut rels = match j {
        None => vec![ring.one()],
        Some(j) => vec![&ring.sigma_pow(base.p().pow(j)) - &ring.one()],
    };
    if let Some(k) = kill {
        rels.push(ring.scalar(base.p_pow(k)));
    }
    ConcreteModule::cyclic(ring, &rels)
}

/// Compares X / p^{m-1}X with A ⊕ B, A = X_{(a_0..a_{m-2}),d,m-1} and
/// B = R_{m-1}G_{a_{m-1}}, both built separately inside R_mG_n.
pub fn quotient_split_check(x: &XModule) -> Result<bool> {
    let params = &x.params;
    if params.m < 2 {
        return Err(Error::Precondition("the quotient split needs m >= 2".into()));
    }
    let k = params.m - 1;
    let ring = params.ring();
    let q = x.module.quotient_mod_pk(k)?;
    let a = ConcreteModule::realize(&x_presentation(ring, &params.a[..k as usize], params.d, Some(k)))?;
    let b = level_module(ring, params.a[k as usize], Some(k))?;
    Ok(q.iso_signature() == a.direct_sum(&b)?.iso_signature())
}

fn sorted_signatures(mods: &[&ConcreteModule]) -> Vec<IsoSignature> {
    let mut v: Vec<IsoSignature> = mods.iter().map(|m| m.iso_signature()).collect();
    v.sort();
    v
}

/// The split X ≅ X_â ⊕ R_mG_{a_{m-1}} for a witness i of the failure of (III).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitOffTop {
    pub witness: usize,
    /// Coefficients of Q with (σ-d)Q = p^{m-1-(a_{m-1}-a_i)} P(a_{m-1},a_i) - p^{m-1}.
    pub q: Vec<u64>,
    pub hat_params: XParams,
    pub certificate: DecompositionCertificate,
}

/// Whether i is a witness for the split-off construction: finite a_i ≤ a_{m-1},
/// a_i + (m-1-i) ≥ a_{m-1}, and p > 2 or d ∈ U_2 or i > 0.
pub fn is_split_witness(params: &XParams, i: usize) -> bool {
    let m = params.m as usize;
    if m < 2 || i >= m - 1 {
        return false;
    }
    let (Some(ai), Some(top)) = (params.a[i], params.a[m - 1]) else { return false };
    ai <= top && ai as usize + (m - 1 - i) >= top as usize && (params.p > 2 || params.in_u(2) || i > 0)
}

pub fn split_witnesses(params: &XParams) -> Vec<usize> {
    (0..params.m as usize).filter(|&i| is_split_witness(params, i)).collect()
}

/// Solves Q·(σ-d) = rhs in R_mG_n.
fn solve_sigma_minus_d(ring: GroupRingCtx, d: u64, rhs: &GroupRingElem) -> Option<GroupRingElem> {
    let f = &ring.sigma() - &ring.scalar(d);
    let q = Solver::new(&f.mul_matrix()).solve(rhs.coeffs())?;
    ring.from_coeffs(&q).ok()
}

/// Splits ⟨x_{m-1}⟩ off X using ŷ = y + Q x_{m-1} and
/// x̂_i = x_i + p^{m-1-i-(a_{m-1}-a_i)} P(a_{m-1},a_i) x_{m-1}.
pub fn decompose_iii_failure(params: &XParams, i: usize) -> Result<SplitOffTop> {
    if !params.in_u(1) {
        return Err(Error::Precondition("d must lie in U_1".into()));
    }
    if !is_split_witness(params, i) {
        return Err(Error::Precondition(format!("index {i} is not a witness for the split-off construction")));
    }
    let m = params.m as usize;
    let top = params.a[m - 1].expect("witness");
    let ai = params.a[i].expect("witness");
    let ring = params.ring();
    let base = ring.base();
    let c = (m - 1) as u32 - (top - ai);
    let norm = build_p(ring, top, Some(ai))?;
    let rhs = &norm.scale(base.p_pow(c)) - &ring.scalar(base.p_pow(m as u32 - 1));
    let q = solve_sigma_minus_d(ring, params.d, &rhs)
        .ok_or_else(|| Error::Inconsistency(format!("(σ-d)Q = {rhs} has no solution for {params:?}")))?;
    let x = build_x(params)?;
    let md = &x.module;
    let xt = x.x(m - 1);
    let qx = md.act(&q, &xt)?;
    let shift = md.act(&norm.scale(base.p_pow(c - i as u32)), &xt)?;
    let y_hat = md.add(&x.y(), &qx);
    let mut x_hat: Vec<ModElement> = (0..m).map(|j| x.x(j)).collect();
    x_hat[i] = md.add(&x_hat[i], &shift);
    x_hat[m - 1] = md.zero();
    let mut hat_a = params.a.clone();
    hat_a[m - 1] = None;
    let hat_params = XParams::new(params.p, params.n, params.m, hat_a, params.d as i64)?;
    // the hatted elements satisfy the relations of X_â
    let lhs = md.act(&(&ring.sigma() - &ring.scalar(params.d)), &y_hat)?;
    let mut sum = md.zero();
    for (j, xj) in x_hat.iter().enumerate() {
        sum = md.add(&sum, &md.scale(xj, base.p_pow(j as u32)));
    }
    if lhs != sum {
        return Err(Error::Verification("(σ-d)ŷ != Σ p^j x̂_j".into()));
    }
    for (j, aj) in hat_params.a.iter().enumerate() {
        let ok = match aj {
            None => md.is_zero(&x_hat[j]),
            Some(e) => md.act(&(&ring.sigma_pow(params.p.pow(*e)) - &ring.one()), &x_hat[j])?.coords.iter().all(|&v| v == 0),
        };
        if !ok {
            return Err(Error::Verification(format!("x̂_{j} violates its relation")));
        }
    }
    // projection onto ⟨x_{m-1}⟩ along ⟨ŷ, x̂_j⟩
    let mut images = vec![md.neg(&qx)];
    for j in 0..m {
        images.push(if j == i && j != m - 1 {
            md.neg(&shift)
        } else if j == m - 1 {
            xt.clone()
        } else {
            md.zero()
        });
    }
    let e = md.hom_from_generator_images(md, &images)?;
    let certificate = DecompositionCertificate::from_idempotent(md, &e)?;
    if md.submodule_generated(&certificate.summand) != md.submodule_generated(&[xt.clone()]) {
        return Err(Error::Verification("eM differs from ⟨x_{m-1}⟩".into()));
    }
    let mut hat_gens = vec![y_hat];
    hat_gens.extend(x_hat.iter().cloned());
    if md.submodule_generated(&certificate.complement) != md.submodule_generated(&hat_gens) {
        return Err(Error::Verification("(1-e)M differs from ⟨ŷ, x̂⟩".into()));
    }
    let (s1, s2) = certificate.summands(md)?;
    let hat_x = build_x(&hat_params)?;
    let free = level_module(ring, Some(top), None)?;
    if sorted_signatures(&[&s1, &s2]) != sorted_signatures(&[&hat_x.module, &free]) {
        return Err(Error::Verification("summand signatures differ from X_â and R_mG_{a_{m-1}}".into()));
    }
    Ok(SplitOffTop { witness: i, q: q.coeffs().to_vec(), hat_params, certificate })
}

/// The split-off construction at the smallest witness.
pub fn decompose_iii_failure_auto(params: &XParams) -> Result<SplitOffTop> {
    let i = split_witnesses(params)
        .into_iter()
        .next()
        .ok_or_else(|| Error::Precondition("no witness for the split-off construction".into()))?;
    decompose_iii_failure(params, i)
}

/// The split X = ⟨y⟩ ⊕ ⟨x_{m-1}⟩ for p = 2, n = 1, d ∉ U_2, a_0 = 0, a_{m-1} = 1.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegenerateSplit {
    pub certificate: DecompositionCertificate,
}

/// Whether 2^{m-1}(σ+1)x_{m-1} = 0 in X.
pub fn degenerate_relation_holds(x: &XModule) -> Result<bool> {
    let ring = x.module.ring();
    let m = x.params.m;
    let f = (&ring.sigma() + &ring.one()).scale(ring.base().p_pow(m - 1));
    Ok(x.module.is_zero(&x.module.act(&f, &x.x(m as usize - 1))?))
}

pub fn decompose_degenerate_n1(params: &XParams) -> Result<DegenerateSplit> {
    let m = params.m as usize;
    if !(params.p == 2 && params.n == 1 && m >= 2 && !params.in_u(2) && params.a[0] == Some(0) && params.a[m - 1] == Some(1)) {
        return Err(Error::Precondition("needs p = 2, n = 1, d ∉ U_2, a_0 = 0, a_{m-1} = 1".into()));
    }
    let x = build_x(params)?;
    if !degenerate_relation_holds(&x)? {
        return Err(Error::Verification("2^{m-1}(σ+1)x_{m-1} != 0".into()));
    }
    let md = &x.module;
    let xt = x.x(m - 1);
    let mut images = vec![md.zero(); m + 1];
    images[1] = md.neg(&md.scale(&xt, 1u64 << (m - 1)));
    images[m] = xt.clone();
    let e = md.hom_from_generator_images(md, &images)?;
    let certificate = DecompositionCertificate::from_idempotent(md, &e)?;
    if md.submodule_generated(&certificate.summand) != md.submodule_generated(&[xt]) {
        return Err(Error::Verification("eM differs from ⟨x_{m-1}⟩".into()));
    }
    if md.submodule_generated(&certificate.complement) != md.submodule_generated(&[x.y()]) {
        return Err(Error::Verification("(1-e)M differs from ⟨y⟩".into()));
    }
    Ok(DegenerateSplit { certificate })
}

fn fp_dim(m: &ConcreteModule) -> Result<u64> {
    Ok(m.quotient_mod_pk(1)?.log_order())
}

fn exact_log(p: u64, x: u64) -> Option<u32> {
    let mut e = 0;
    let mut v = 1;
    while v < x {
        v *= p;
        e += 1;
    }
    (v == x).then_some(e)
}

/// Reads a off a module isomorphic to some X_{a,d,m} satisfying (I)–(V), using
/// only decompositions, generator counts and F_p-dimensions.
pub fn recover_a(x: &ConcreteModule, seed: u64) -> Result<Vec<Option<u32>>> {
    let m = x.base().m();
    recover_level(x, m, seed)
}

fn recover_level(x: &ConcreteModule, k: u32, seed: u64) -> Result<Vec<Option<u32>>> {
    let p = x.base().p();
    let unident = |why: &str| Error::Inconsistency(format!("unidentifiable: {why}"));
    if k == 1 {
        let dim = fp_dim(x)?;
        if dim == 1 {
            return Ok(vec![None]);
        }
        let a0 = exact_log(p, dim - 1).ok_or_else(|| unident("dim X/pX is not p^a + 1"))?;
        return Ok(vec![Some(a0)]);
    }
    let q = x.quotient_mod_pk(k - 1)?;
    let parts = decompose_fully(&q, seed)?;
    let (a_part, b_part) = match parts.len() {
        1 => (parts[0].clone(), None),
        2 => {
            let (v, w) = (&parts[0], &parts[1]);
            let (gv, gw) = (v.min_generators(), w.min_generators());
            if gv != gw {
                if gv == 1 {
                    (w.clone(), Some(v.clone()))
                } else if gw == 1 {
                    (v.clone(), Some(w.clone()))
                } else {
                    return Err(unident("neither summand is cyclic"));
                }
            } else {
                let (dv, dw) = (fp_dim(v)?, fp_dim(w)?);
                if dv == dw {
                    // both cyclic of equal dimension: a_{k-1} and (a_0..a_{k-2}) are forced
                    let mut a = vec![None; k as usize];
                    match dv {
                        1 => a[k as usize - 1] = Some(0),
                        2 if p == 2 => {
                            a[0] = Some(0);
                            a[k as usize - 1] = Some(1);
                        }
                        _ => return Err(unident("summands of equal dimension outside the two special cases")),
                    }
                    return Ok(a);
                }
                if dv < dw {
                    (v.clone(), Some(w.clone()))
                } else {
                    (w.clone(), Some(v.clone()))
                }
            }
        }
        n => return Err(unident(&format!("X/p^{}X has {n} indecomposable summands", k - 1))),
    };
    let mut a = recover_level(&a_part, k - 1, seed)?;
    let last = match b_part {
        None => None,
        Some(b) => Some(exact_log(p, fp_dim(&b)?).ok_or_else(|| unident("dim B/pB is not a power of p"))?),
    };
    a.push(last);
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indecomp::is_indecomposable;

    fn xp(p: u64, n: u32, a: Vec<Option<u32>>, d: i64) -> XParams {
        let m = a.len() as u32;
        XParams::new(p, n, m, a, d).unwrap()
    }

    #[test]
    fn condition_examples() {
        let r = check_conditions(&xp(3, 2, vec![Some(0), Some(2)], 4));
        assert!(r.overall, "{r:?}");
        let r = check_conditions(&xp(2, 1, vec![None], 1));
        assert!(r.iv);
        let r = check_conditions(&XParams { p: 2, n: 1, m: 1, a: vec![Some(0)], d: 1 });
        assert!(!r.iv);
        assert_eq!(r.failed, vec!["IV"]);
        let r = check_conditions(&xp(2, 2, vec![Some(0), Some(1)], 1));
        assert!(!r.iii);
    }

    #[test]
    fn params_json_round_trip() {
        let p: XParams = serde_json::from_str(r#"{"p":3,"n":2,"m":2,"a":[0,null],"d":-5}"#).unwrap();
        assert_eq!(p.d, 4);
        assert_eq!(p.a, vec![Some(0), None]);
        let back: XParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<XParams>(r#"{"p":3,"n":2,"m":2,"a":[0],"d":1}"#).is_err());
        assert!(serde_json::from_str::<XParams>(r#"{"p":4,"n":2,"m":1,"a":[0],"d":1}"#).is_err());
    }

    #[test]
    fn build_examples() {
        let x = build_x(&xp(3, 2, vec![Some(0)], 1)).unwrap();
        assert!(x.relations_hold().unwrap());
        assert_eq!(x.module.log_order(), 2);
        assert!(x.module.is_cyclic());
        assert_eq!(x.len_y(), 2);
        // all -∞ with d^{p^n} = 1: X = ⟨y : (σ-d)y = 0⟩ has order p^m
        let x = build_x(&xp(2, 1, vec![None, None], 3)).unwrap();
        assert_eq!(x.module.log_order(), 2);
        assert!(x.lengths_match());
        let x = build_x(&xp(2, 2, vec![Some(0), Some(1)], 1)).unwrap();
        assert!(x.relations_hold().unwrap());
        assert!(x.lengths_match());
        let x0 = x.module.submodule_generated(&[x.x(0)]);
        assert_eq!(x0.log_order(), 2);
    }

    #[test]
    fn quotient_split_examples() {
        for (p, n, a, d) in [
            (2, 2, vec![None, Some(1)], 1),
            (3, 2, vec![Some(0), Some(2)], 4),
            (3, 1, vec![Some(0), None], 1),
        ] {
            let x = build_x(&xp(p, n, a, d)).unwrap();
            assert!(quotient_split_check(&x).unwrap());
        }
    }

    #[test]
    fn split_off_small_example() {
        let params = xp(2, 2, vec![Some(0), Some(1)], 1);
        let s = decompose_iii_failure(&params, 0).unwrap();
        let ring = params.ring();
        // Q = 1 up to ann(σ-1)
        let q = ring.from_coeffs(&s.q).unwrap();
        let diff = &q - &ring.one();
        assert!((&diff * &(&ring.sigma() - &ring.one())).is_zero());
        let x = build_x(&params).unwrap();
        s.certificate.verify(&x.module).unwrap();
        assert!(!is_indecomposable(&x.module).unwrap().0);
        let valid = xp(3, 2, vec![Some(0), Some(2)], 4);
        assert!(decompose_iii_failure(&valid, 0).is_err());
    }

    #[test]
    fn subtracting_q_breaks_the_y_relation() {
        // with ŷ = y - Q x_1 the relation (σ-d)ŷ = x̂_0 + 2x̂_1 fails
        let params = xp(2, 2, vec![Some(0), Some(1)], 1);
        let x = build_x(&params).unwrap();
        let md = &x.module;
        let ring = params.ring();
        let y_hat = md.sub(&x.y(), &x.x(1));
        let x0_hat = md.add(&x.x(0), &md.act(&(&ring.one() + &ring.sigma()), &x.x(1)).unwrap());
        let lhs = md.act(&(&ring.sigma() - &ring.one()), &y_hat).unwrap();
        assert_ne!(lhs, x0_hat);
    }

    #[test]
    fn split_off_odd_example() {
        let params = xp(3, 2, vec![Some(1), Some(2)], 1);
        let s = decompose_iii_failure_auto(&params).unwrap();
        assert_eq!(s.witness, 0);
    }

    #[test]
    fn degenerate_precondition() {
        assert!(decompose_degenerate_n1(&xp(2, 1, vec![Some(0), Some(1)], 1)).is_err());
        let params = xp(2, 1, vec![Some(0), Some(1)], 3);
        let s = decompose_degenerate_n1(&params).unwrap();
        s.certificate.verify(&build_x(&params).unwrap().module).unwrap();
    }

    #[test]
    fn recover_small() {
        let params = xp(3, 1, vec![Some(0)], 1);
        let x = build_x(&params).unwrap();
        assert_eq!(recover_a(&x.module, 1).unwrap(), vec![Some(0)]);
        let params = xp(3, 2, vec![Some(0), Some(2)], 4);
        let x = build_x(&params).unwrap();
        assert_eq!(recover_a(&x.module, 1).unwrap(), params.a);
        let params = xp(3, 2, vec![None, None], 1);
        let x = build_x(&params).unwrap();
        assert_eq!(recover_a(&x.module, 1).unwrap(), params.a);
    }
}
