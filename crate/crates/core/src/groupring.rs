//! The group ring R_mG_i = (Z/p^m)[σ]/(σ^{p^i} - 1), its norm elements P(i,j)
//! and Q_d(i,j), the evaluation σ ↦ d, the projections to lower levels, and
//! annihilator ideals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{howell, kernel, span_intersect, HowellForm, Matrix};
use crate::residue::{Level, Residue, RingCtx};

/// Largest group order p^i accepted for a group ring.
pub const MAX_GROUP_ORDER: u64 = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupRingCtx {
    base: RingCtx,
    level: u32,
    order: usize,
}

impl GroupRingCtx {
    pub fn new(base: RingCtx, level: u32) -> Result<Self> {
        if level > 30 {
            return Err(Error::InvalidArgument(format!("group level {level} exceeds 30")));
        }
        let order = base
            .p()
            .checked_pow(level)
            .filter(|&q| q <= MAX_GROUP_ORDER)
            .ok_or_else(|| Error::TooLarge(format!("group of order {}^{}", base.p(), level)))?;
        Ok(GroupRingCtx { base, level, order: order as usize })
    }

    pub fn from_parts(p: u64, m: u32, level: u32) -> Result<Self> {
        GroupRingCtx::new(RingCtx::new(p, m)?, level)
    }

    #[inline]
    pub fn base(&self) -> RingCtx {
        self.base
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    /// p^level, the number of coefficients.
    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    pub fn m(&self) -> u32 {
        self.base.m()
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        GroupRingCtx::new(self.base, level)
    }

    pub fn with_m(&self, m: u32) -> Result<Self> {
        GroupRingCtx::new(self.base.with_m(m)?, self.level)
    }

    pub fn zero(&self) -> GroupRingElem {
        GroupRingElem { ctx: *self, coeffs: vec![0; self.order] }
    }

    pub fn one(&self) -> GroupRingElem {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u64) -> GroupRingElem {
        let mut e = self.zero();
        e.coeffs[0] = self.base.reduce(c);
        e
    }

    pub fn scalar_i64(&self, c: i64) -> GroupRingElem {
        self.scalar(self.base.reduce_i64(c))
    }

    /// σ^t (t taken modulo the group order).
    pub fn sigma_pow(&self, t: u64) -> GroupRingElem {
        let mut e = self.zero();
        e.coeffs[(t % self.order as u64) as usize] = 1 % self.base.modulus();
        e
    }

    pub fn sigma(&self) -> GroupRingElem {
        self.sigma_pow(1)
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<GroupRingElem> {
        if coeffs.len() != self.order {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                self.order
            )));
        }
        Ok(GroupRingElem { ctx: *self, coeffs: coeffs.iter().map(|&c| self.base.reduce(c)).collect() })
    }

    /// Reads a polynomial in σ with integer coefficients, folding exponents.
    pub fn from_poly_i64(&self, coeffs: &[i64]) -> GroupRingElem {
        let mut e = self.zero();
        for (t, &c) in coeffs.iter().enumerate() {
            let k = t % self.order;
            e.coeffs[k] = self.base.add(e.coeffs[k], self.base.reduce_i64(c));
        }
        e
    }
}

/// An element Σ c_t σ^t of R_mG_i.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElem {
    ctx: GroupRingCtx,
    coeffs: Vec<u64>,
}

impl fmt::Debug for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GroupRingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match t {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}s")?,
                _ => write!(f, "{c}s^{t}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl GroupRingElem {
    pub fn ctx(&self) -> GroupRingCtx {
        self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, s: u64) -> GroupRingElem {
        let b = self.ctx.base;
        GroupRingElem { ctx: self.ctx, coeffs: self.coeffs.iter().map(|&c| b.mul(c, s)).collect() }
    }

    pub fn pow(&self, mut e: u64) -> GroupRingElem {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplication-by-self as a matrix on coefficient rows: row t holds σ^t · self.
    pub fn mul_matrix(&self) -> Matrix {
        let n = self.ctx.order;
        let mut m = Matrix::zeros(self.ctx.base, n, n);
        for t in 0..n {
            for (s, &c) in self.coeffs.iter().enumerate() {
                if c != 0 {
                    m.set(t, (t + s) % n, c);
                }
            }
        }
        m
    }

    /// Valuation of the content: the largest v with self ∈ p^v R_mG_i.
    pub fn content_val(&self) -> Level {
        let b = self.ctx.base;
        self.coeffs.iter().map(|&c| b.val(c)).min().unwrap_or(Level::Infinite)
    }

    /// Whether every coefficient is divisible by p^k.
    pub fn divisible_by_p_pow(&self, k: u32) -> bool {
        match self.content_val() {
            Level::Infinite => true,
            Level::Finite(v) => v >= k,
        }
    }

    fn check(&self, other: &GroupRingElem) {
        assert_eq!(self.ctx, other.ctx, "group ring elements from different rings");
    }
}

impl<'a> Add<&'a GroupRingElem> for &'a GroupRingElem {
    type Output = GroupRingElem;
    fn add(self, rhs: &GroupRingElem) -> GroupRingElem {
        self.check(rhs);
        let b = self.ctx.base;
        GroupRingElem { ctx: self.ctx, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&x, &y)| b.add(x, y)).collect() }
    }
}

impl<'a> Sub<&'a GroupRingElem> for &'a GroupRingElem {
    type Output = GroupRingElem;
    fn sub(self, rhs: &GroupRingElem) -> GroupRingElem {
        self.check(rhs);
        let b = self.ctx.base;
        GroupRingElem { ctx: self.ctx, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(&x, &y)| b.sub(x, y)).collect() }
    }
}

impl<'a> Mul<&'a GroupRingElem> for &'a GroupRingElem {
    type Output = GroupRingElem;
    fn mul(self, rhs: &GroupRingElem) -> GroupRingElem {
        self.check(rhs);
        let n = self.ctx.order;
        let q = self.ctx.base.modulus() as u128;
        let mut acc = vec![0u128; n];
        for (s, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (t, &b) in rhs.coeffs.iter().enumerate() {
                if b != 0 {
                    let k = (s + t) % n;
                    acc[k] = (acc[k] + a as u128 * b as u128) % q;
                }
            }
        }
        GroupRingElem { ctx: self.ctx, coeffs: acc.into_iter().map(|v| v as u64).collect() }
    }
}

impl Neg for &GroupRingElem {
    type Output = GroupRingElem;
    fn neg(self) -> GroupRingElem {
        let b = self.ctx.base;
        GroupRingElem { ctx: self.ctx, coeffs: self.coeffs.iter().map(|&c| b.neg(c)).collect() }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr<GroupRingElem> for GroupRingElem {
            type Output = GroupRingElem;
            fn $f(self, rhs: GroupRingElem) -> GroupRingElem {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

fn check_j(i: u32, j: Option<u32>) -> Result<()> {
    match j {
        Some(j) if j > i => Err(Error::InvalidArgument(format!("need j <= i, got j = {j}, i = {i}"))),
        _ => Ok(()),
    }
}

/// P(i,j) = Σ_{k < p^{i-j}} σ^{k p^j}, built in the ring `ctx`; P(i,-∞) = 1.
pub fn build_p(ctx: GroupRingCtx, i: u32, j: Option<u32>) -> Result<GroupRingElem> {
    check_j(i, j)?;
    let Some(j) = j else { return Ok(ctx.one()) };
    let p = ctx.p();
    let step = p.pow(j);
    let terms = p.pow(i - j);
    let n = ctx.order() as u64;
    let mut e = ctx.zero();
    let b = ctx.base();
    for k in 0..terms {
        let t = ((k as u128 * step as u128) % n as u128) as usize;
        e.coeffs[t] = b.add(e.coeffs[t], 1);
    }
    Ok(e)
}

/// Q_d(i,j) = Σ_{k < p^{i-j}} (d^{p^j})^{p^{i-j}-1-k} (σ^{p^j})^k; Q_d(i,-∞) = 1.
pub fn build_q(ctx: GroupRingCtx, i: u32, j: Option<u32>, d: Residue) -> Result<GroupRingElem> {
    check_j(i, j)?;
    if d.ctx() != ctx.base() {
        return Err(Error::ContextMismatch);
    }
    if !d.in_u(Level::Finite(1)) {
        return Err(Error::NotInUnitFiltration { value: d.value(), level: 1, modulus: d.ctx().modulus() });
    }
    let Some(j) = j else { return Ok(ctx.one()) };
    let p = ctx.p();
    let step = p.pow(j);
    let terms = p.pow(i - j);
    let n = ctx.order() as u64;
    let b = ctx.base();
    let dj = d.pow(step).value();
    let mut e = ctx.zero();
    // coefficient of (σ^{p^j})^k is dj^{terms-1-k}; accumulate from the top power down
    let mut c = 1 % b.modulus();
    for k in (0..terms).rev() {
        let t = ((k as u128 * step as u128) % n as u128) as usize;
        e.coeffs[t] = b.add(e.coeffs[t], c);
        c = b.mul(c, dj);
    }
    Ok(e)
}

/// The additive evaluation Σ c_t σ^t ↦ Σ c_t d^t in Z/p^m.
pub fn phi_d(f: &GroupRingElem, d: Residue) -> Result<Residue> {
    let b = f.ctx().base();
    if d.ctx() != b {
        return Err(Error::ContextMismatch);
    }
    let mut acc = 0;
    let mut dt = 1 % b.modulus();
    for &c in f.coeffs() {
        acc = b.add(acc, b.mul(c, dt));
        dt = b.mul(dt, d.value());
    }
    Ok(b.residue(acc))
}

/// Whether σ ↦ d defines a ring map on this group ring (d^{p^i} = 1 in Z/p^m).
pub fn phi_d_is_ring_map(ctx: GroupRingCtx, d: Residue) -> bool {
    d.pow(ctx.order() as u64).is_one()
}

/// The projection to level j induced by σ^t ↦ σ^{t mod p^j}.
pub fn chi(f: &GroupRingElem, j: u32) -> Result<GroupRingElem> {
    let ctx = f.ctx();
    if j > ctx.level() {
        return Err(Error::InvalidArgument(format!("cannot project level {} to level {j}", ctx.level())));
    }
    let target = ctx.with_level(j)?;
    let b = ctx.base();
    let mut out = target.zero();
    for (t, &c) in f.coeffs().iter().enumerate() {
        let k = t % target.order();
        out.coeffs[k] = b.add(out.coeffs[k], c);
    }
    Ok(out)
}

/// An ideal of R_mG_i with its canonical Howell form (over the Z/p^m-basis σ^t).
#[derive(Clone, Debug)]
pub struct IdealHandle {
    ctx: GroupRingCtx,
    generators: Vec<GroupRingElem>,
    canonical: HowellForm,
}

impl PartialEq for IdealHandle {
    fn eq(&self, other: &Self) -> bool {
        self.ctx == other.ctx && self.canonical == other.canonical
    }
}

impl Eq for IdealHandle {}

impl IdealHandle {
    pub fn generated_by(ctx: GroupRingCtx, generators: Vec<GroupRingElem>) -> Result<Self> {
        let n = ctx.order();
        let mut m = Matrix::zeros(ctx.base(), 0, n);
        for g in &generators {
            if g.ctx() != ctx {
                return Err(Error::ContextMismatch);
            }
            let mm = g.mul_matrix();
            m = m.vstack(&mm)?;
        }
        Ok(IdealHandle { ctx, generators, canonical: howell(&m) })
    }

    pub fn ctx(&self) -> GroupRingCtx {
        self.ctx
    }

    pub fn generators(&self) -> &[GroupRingElem] {
        &self.generators
    }

    pub fn canonical(&self) -> &HowellForm {
        &self.canonical
    }

    pub fn contains(&self, f: &GroupRingElem) -> bool {
        self.canonical.contains(f.coeffs())
    }

    pub fn is_zero(&self) -> bool {
        self.canonical.is_zero()
    }

    /// log_p of the number of elements of the ideal.
    pub fn log_size(&self) -> u64 {
        self.canonical.log_size()
    }
}

/// Annihilator specifications with closed-form answers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnSpec {
    /// ann p^k.
    Pow { k: u32 },
    /// ann p^k (σ^{p^j} - 1), for j < i.
    PowTimes { k: u32, j: u32 },
    /// ann (σ - d), for d ∈ U_1.
    SigmaMinusD { d: u64 },
    /// ann of p^{b_0} (when c_0 = -∞) or p^{b_0}(σ^{p^{c_0}} - 1), together with
    /// p^{b_j}(σ^{p^{c_j}} - 1) for j = 1..t.
    MultiGen { b: Vec<u32>, c: Vec<Option<u32>> },
}

/// How the monotonicity of a multi-generator specification is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Strict,
    Weak,
}

/// Whether (b, c) is admissible: b decreasing in {0..m-1}, c increasing in
/// {-∞, 0..i-1}, with equal lengths.
pub fn multigen_admissible(ctx: GroupRingCtx, b: &[u32], c: &[Option<u32>], mode: Monotonicity) -> bool {
    if b.is_empty() || b.len() != c.len() {
        return false;
    }
    if b.iter().any(|&x| x >= ctx.m()) {
        return false;
    }
    if c.iter().any(|x| matches!(x, Some(v) if *v >= ctx.level())) {
        return false;
    }
    // -∞ sorts below every integer, matching Option's ordering
    let ok_b = b.windows(2).all(|w| match mode {
        Monotonicity::Strict => w[0] > w[1],
        Monotonicity::Weak => w[0] >= w[1],
    });
    let ok_c = c.windows(2).all(|w| match mode {
        Monotonicity::Strict => w[0] < w[1],
        Monotonicity::Weak => w[0] <= w[1],
    });
    ok_b && ok_c
}

/// The elements whose common annihilator the specification describes.
pub fn spec_generators(ctx: GroupRingCtx, spec: &AnnSpec) -> Result<Vec<GroupRingElem>> {
    let b = ctx.base();
    let sigma_pp_minus_one = |j: u32| -> GroupRingElem { &ctx.sigma_pow(ctx.p().pow(j)) - &ctx.one() };
    Ok(match spec {
        AnnSpec::Pow { k } => vec![ctx.scalar(b.p_pow(*k))],
        AnnSpec::PowTimes { k, j } => {
            if *j >= ctx.level() {
                return Err(Error::InvalidArgument(format!("need j < i, got j = {j}")));
            }
            vec![sigma_pp_minus_one(*j).scale(b.p_pow(*k))]
        }
        AnnSpec::SigmaMinusD { d } => vec![&ctx.sigma() - &ctx.scalar(*d)],
        AnnSpec::MultiGen { b: bs, c: cs } => {
            if bs.len() != cs.len() || bs.is_empty() {
                return Err(Error::InvalidArgument("b and c must be nonempty and of equal length".into()));
            }
            bs.iter()
                .zip(cs)
                .map(|(&bj, cj)| match cj {
                    None => ctx.scalar(b.p_pow(bj)),
                    Some(c) => sigma_pp_minus_one(*c).scale(b.p_pow(bj)),
                })
                .collect()
        }
    })
}

/// The closed-form annihilator for a specification.
///
/// Multi-generator specifications must be strictly monotone: with a repeated
/// entry in c the displayed formula is wrong.
pub fn ann_closed_form(ctx: GroupRingCtx, spec: &AnnSpec) -> Result<IdealHandle> {
    let base = ctx.base();
    let m = ctx.m();
    let i = ctx.level();
    let gens = match spec {
        AnnSpec::Pow { k } => {
            if *k > m {
                return Err(Error::InvalidArgument(format!("k = {k} exceeds m = {m}")));
            }
            vec![ctx.scalar(base.p_pow(m - k))]
        }
        AnnSpec::PowTimes { k, j } => {
            if *k > m || *j >= i {
                return Err(Error::InvalidArgument(format!("need k <= m and j < i, got k = {k}, j = {j}")));
            }
            vec![build_p(ctx, i, Some(*j))?, ctx.scalar(base.p_pow(m - k))]
        }
        AnnSpec::SigmaMinusD { d } => {
            let d = base.residue(*d);
            let k = sigma_minus_d_exponent(ctx, d);
            vec![build_q(ctx, i, Some(0), d)?.scale(base.p_pow(k))]
        }
        AnnSpec::MultiGen { b, c } => {
            if !multigen_admissible(ctx, b, c, Monotonicity::Strict) {
                return Err(Error::InvalidArgument(format!("inadmissible sequences b = {b:?}, c = {c:?}")));
            }
            multigen_formula(ctx, b, c)?
        }
    };
    IdealHandle::generated_by(ctx, gens)
}

/// The generators of the multi-generator closed form, without checking the
/// sequences.
pub fn multigen_formula(ctx: GroupRingCtx, b: &[u32], c: &[Option<u32>]) -> Result<Vec<GroupRingElem>> {
    if b.is_empty() || b.len() != c.len() || b.iter().any(|&x| x >= ctx.m()) {
        return Err(Error::InvalidArgument(format!("bad sequences b = {b:?}, c = {c:?}")));
    }
    let base = ctx.base();
    let m = ctx.m();
    let i = ctx.level();
    let t = b.len() - 1;
    let mut gens = Vec::new();
    if let Some(c0) = c[0] {
        gens.push(build_p(ctx, i, Some(c0))?);
    }
    for j in 1..=t {
        gens.push(build_p(ctx, i, c[j])?.scale(base.p_pow(m - b[j - 1])));
    }
    gens.push(ctx.scalar(base.p_pow(m - b[t])));
    Ok(gens)
}

/// k = min{v >= 0 : p^v (d^{p^i} - 1) = 0 mod p^m}.
pub fn sigma_minus_d_exponent(ctx: GroupRingCtx, d: Residue) -> u32 {
    let base = ctx.base();
    let x = base.sub(d.pow(ctx.order() as u64).value(), 1);
    ctx.m() - base.val_sat(x)
}

/// The annihilator {r : r g = 0 for every generator g}, by linear algebra.
pub fn ann_generic(ctx: GroupRingCtx, generators: &[GroupRingElem]) -> Result<IdealHandle> {
    let n = ctx.order();
    let mut stacked = Matrix::zeros(ctx.base(), n, 0);
    for g in generators {
        if g.ctx() != ctx {
            return Err(Error::ContextMismatch);
        }
        // r g as a row vector: r times the matrix whose row t is σ^t g
        stacked = stacked.hstack(&g.mul_matrix())?;
    }
    let k = kernel(&stacked);
    let gens: Vec<GroupRingElem> =
        (0..k.rows()).map(|r| GroupRingElem { ctx, coeffs: k.row(r).to_vec() }).collect();
    IdealHandle::generated_by(ctx, gens)
}

pub fn ideal_intersect(a: &IdealHandle, b: &IdealHandle) -> Result<IdealHandle> {
    if a.ctx != b.ctx {
        return Err(Error::ContextMismatch);
    }
    let h = span_intersect(&a.canonical, &b.canonical)?;
    let gens = (0..h.matrix().rows()).map(|r| GroupRingElem { ctx: a.ctx, coeffs: h.matrix().row(r).to_vec() }).collect();
    Ok(IdealHandle { ctx: a.ctx, generators: gens, canonical: h })
}

/// (σ - 1)^k.
pub fn sigma_minus_one_pow(ctx: GroupRingCtx, k: u64) -> GroupRingElem {
    (&ctx.sigma() - &ctx.one()).pow(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grc(p: u64, m: u32, i: u32) -> GroupRingCtx {
        GroupRingCtx::from_parts(p, m, i).unwrap()
    }

    #[test]
    fn p_examples() {
        let c = grc(2, 3, 1);
        assert_eq!(build_p(c, 1, Some(0)).unwrap(), c.from_poly_i64(&[1, 1]));
        let c = grc(3, 2, 2);
        assert_eq!(build_p(c, 2, Some(1)).unwrap(), c.from_poly_i64(&[1, 0, 0, 1, 0, 0, 1]));
        assert_eq!(build_p(c, 2, Some(2)).unwrap(), c.one());
        assert_eq!(build_p(c, 2, None).unwrap(), c.one());
        assert!(build_p(c, 1, Some(2)).is_err());
    }

    #[test]
    fn q_examples() {
        let c = grc(2, 2, 1);
        let d = c.base().residue(3);
        assert_eq!(build_q(c, 1, Some(0), d).unwrap(), c.from_poly_i64(&[3, 1]));
        let c = grc(3, 3, 2);
        for j in 0..=2 {
            assert_eq!(build_q(c, 2, Some(j), c.base().residue(1)).unwrap(), build_p(c, 2, Some(j)).unwrap());
        }
        assert!(build_q(c, 2, Some(0), c.base().residue(2)).is_err());
    }

    #[test]
    fn q_agrees_with_p_mod_p() {
        let c = grc(3, 3, 2);
        let modp = RingCtx::new(3, 1).unwrap();
        for d in (1..27).step_by(3) {
            let d = c.base().residue(d);
            for j in 0..=2 {
                let q = build_q(c, 2, Some(j), d).unwrap();
                let p = build_p(c, 2, Some(j)).unwrap();
                for (a, b) in q.coeffs().iter().zip(p.coeffs()) {
                    assert_eq!(modp.reduce(*a), modp.reduce(*b));
                }
            }
        }
    }

    #[test]
    fn phi_examples() {
        let c = grc(2, 4, 3);
        let minus_one = c.base().residue_i64(-1);
        for i in 1..=3 {
            let f = build_p(c, i, Some(0)).unwrap();
            assert_eq!(phi_d(&f, minus_one).unwrap().value(), 0);
        }
        let c = grc(3, 4, 2);
        let v = phi_d(&build_p(c, 2, Some(1)).unwrap(), c.base().residue(4)).unwrap();
        assert_eq!(v.value(), 4161 % 81);
        assert_eq!(4161 % 9, 3);
        assert_eq!(phi_d(&c.one(), c.base().residue(4)).unwrap().value(), 1);
    }

    #[test]
    fn chi_examples() {
        let c = grc(2, 4, 2);
        let f = build_p(c, 2, Some(0)).unwrap();
        assert_eq!(chi(&f, 0).unwrap(), grc(2, 4, 0).scalar(4));
        let q = build_q(c, 2, Some(0), c.base().residue_i64(-1)).unwrap();
        assert!(chi(&q, 0).unwrap().is_zero());
        assert!(chi(&f, 3).is_err());
    }

    #[test]
    fn identities_of_norm_elements() {
        for (p, m, top) in [(2u64, 3u32, 3u32), (3, 2, 2)] {
            let c = grc(p, m, top);
            for i in 0..=top {
                for j in 0..=i {
                    for k in 0..=j {
                        let lhs = build_p(c, i, Some(k)).unwrap();
                        let rhs = build_p(c, i, Some(j)).unwrap() * build_p(c, j, Some(k)).unwrap();
                        assert_eq!(lhs, rhs);
                        for dv in (1..c.base().modulus()).step_by(p as usize) {
                            let d = c.base().residue(dv);
                            let lhs = build_q(c, i, Some(k), d).unwrap();
                            let rhs = build_q(c, i, Some(j), d).unwrap() * build_q(c, j, Some(k), d).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                    // (σ^{p^j} - 1) P(i,j) = σ^{p^i} - 1, computed in a ring of larger level
                    let big = grc(p, m, top);
                    let sj = big.sigma_pow(p.pow(j));
                    let si = big.sigma_pow(p.pow(i));
                    if i < top {
                        assert_eq!(&(&sj - &big.one()) * &build_p(big, i, Some(j)).unwrap(), &si - &big.one());
                    }
                }
            }
        }
    }

    #[test]
    fn ann_examples() {
        let c = grc(2, 2, 1);
        let closed = ann_closed_form(c, &AnnSpec::Pow { k: 1 }).unwrap();
        assert_eq!(closed, IdealHandle::generated_by(c, vec![c.scalar(2)]).unwrap());
        let gens = spec_generators(c, &AnnSpec::Pow { k: 1 }).unwrap();
        assert_eq!(ann_generic(c, &gens).unwrap(), closed);

        let spec = AnnSpec::SigmaMinusD { d: 3 };
        let closed = ann_closed_form(c, &spec).unwrap();
        assert_eq!(closed, IdealHandle::generated_by(c, vec![c.from_poly_i64(&[3, 1])]).unwrap());
        // brute force over all 16 elements
        let s = &c.sigma() - &c.scalar(3);
        for a in 0..4 {
            for b in 0..4 {
                let x = c.from_coeffs(&[a, b]).unwrap();
                assert_eq!((&x * &s).is_zero(), closed.contains(&x));
            }
        }

        let spec = AnnSpec::MultiGen { b: vec![1], c: vec![None] };
        assert_eq!(ann_closed_form(c, &spec).unwrap(), IdealHandle::generated_by(c, vec![c.scalar(2)]).unwrap());
    }

    #[test]
    fn generic_annihilator_edge_cases() {
        let c = grc(3, 2, 1);
        let full = ann_generic(c, &[c.zero()]).unwrap();
        assert_eq!(full, IdealHandle::generated_by(c, vec![c.one()]).unwrap());
        assert!(ann_generic(c, &[c.one()]).unwrap().is_zero());
    }

    #[test]
    fn intersection_matches_enumeration() {
        let c = grc(2, 2, 1);
        let two = IdealHandle::generated_by(c, vec![c.scalar(2)]).unwrap();
        let aug = IdealHandle::generated_by(c, vec![&c.sigma() - &c.one()]).unwrap();
        let inter = ideal_intersect(&two, &aug).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let x = c.from_coeffs(&[a, b]).unwrap();
                assert_eq!(inter.contains(&x), two.contains(&x) && aug.contains(&x));
            }
        }
        assert_eq!(ideal_intersect(&two, &two).unwrap(), two);
    }
}
