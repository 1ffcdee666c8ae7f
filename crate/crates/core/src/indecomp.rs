//! Endomorphism algebras, their Jacobson radicals, locality, and explicit
//! decompositions of modules into direct summands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{howell, kernel, smith_columns, HowellForm, Matrix, Solver};
use crate::module::{ConcreteModule, ModElement, Submodule};
use crate::residue::RingCtx;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_BUDGET: usize = 512;

fn fp(p: u64) -> RingCtx {
    RingCtx::new(p, 1).expect("prime")
}

/// A finite-dimensional associative unital algebra over F_p given by structure
/// constants: table[a][b] holds the coordinates of e_a e_b.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpAlgebra {
    pub p: u64,
    pub dim: usize,
    pub table: Vec<Vec<Vec<u64>>>,
    pub one: Vec<u64>,
}

impl FpAlgebra {
    /// The algebra spanned by a set of square matrices over F_p, which must be
    /// closed under multiplication and contain the identity in its span.
    pub fn from_matrices(p: u64, mats: &[Matrix]) -> Result<Self> {
        let f = fp(p);
        let Some(first) = mats.first() else {
            return Err(Error::InvalidArgument("empty matrix algebra".into()));
        };
        let n = first.rows();
        let rows: Vec<Vec<u64>> = mats.iter().map(|m| m.reduce_to(f).data().to_vec()).collect();
        let h = howell(&Matrix::from_rows(f, n * n, &rows)?);
        let basis: Vec<Matrix> = h
            .matrix()
            .row_vecs()
            .into_iter()
            .map(|v| Matrix::from_rows(f, n, &v.chunks(n).map(|c| c.to_vec()).collect::<Vec<_>>()).expect("square"))
            .collect();
        let coords = |m: &Matrix| -> Result<Vec<u64>> {
            if !h.contains(m.data()) {
                return Err(Error::Verification("matrix span is not closed under multiplication".into()));
            }
            Ok(h.pivots().iter().map(|pv| m.data()[pv.col]).collect())
        };
        let dim = basis.len();
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for a in 0..dim {
            for b in 0..dim {
                table[a][b] = coords(&basis[a].mul(&basis[b])?)?;
            }
        }
        let one = coords(&Matrix::identity(f, n))?;
        Ok(FpAlgebra { p, dim, table, one })
    }

    pub fn ctx(&self) -> RingCtx {
        fp(self.p)
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0u64; self.dim];
        for (a, &xa) in x.iter().enumerate() {
            if xa == 0 {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                if yb == 0 {
                    continue;
                }
                let c = xa * yb % p;
                for (o, &t) in out.iter_mut().zip(&self.table[a][b]) {
                    *o = (*o + c * t) % p;
                }
            }
        }
        out
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter().zip(y).map(|(&a, &b)| (a + b) % self.p).collect()
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter().zip(y).map(|(&a, &b)| (a + self.p - b) % self.p).collect()
    }

    pub fn scale(&self, x: &[u64], s: u64) -> Vec<u64> {
        x.iter().map(|&a| a * (s % self.p) % self.p).collect()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim]
    }

    pub fn unit_vector(&self, k: usize) -> Vec<u64> {
        let mut v = self.zero();
        v[k] = 1;
        v
    }

    pub fn pow(&self, x: &[u64], mut e: u64) -> Vec<u64> {
        let mut acc = self.one.clone();
        let mut base = x.to_vec();
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

    /// Matrix of y ↦ x y in the row convention (row k holds x e_k).
    pub fn left_mult(&self, x: &[u64]) -> Matrix {
        let rows: Vec<Vec<u64>> = (0..self.dim).map(|k| self.mul(x, &self.unit_vector(k))).collect();
        Matrix::from_rows(self.ctx(), self.dim, &rows).expect("square")
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.dim).all(|a| (0..a).all(|b| self.table[a][b] == self.table[b][a]))
    }

    pub fn is_nilpotent(&self, x: &[u64]) -> bool {
        let mut cur = x.to_vec();
        for _ in 0..=self.dim {
            if cur.iter().all(|&c| c == 0) {
                return true;
            }
            cur = self.mul(&cur, x);
        }
        cur.iter().all(|&c| c == 0)
    }

    /// The quotient by a two-sided ideal given by a basis, with a complement basis
    /// of unit vectors.
    pub fn quotient(&self, ideal: &[Vec<u64>]) -> Result<FpAlgebra> {
        let f = self.ctx();
        let h = howell(&Matrix::from_rows(f, self.dim, ideal)?);
        let pivot_cols: Vec<usize> = h.pivots().iter().map(|pv| pv.col).collect();
        let comp: Vec<usize> = (0..self.dim).filter(|c| !pivot_cols.contains(c)).collect();
        let project = |v: &[u64]| -> Vec<u64> {
            let r = h.reduce(v);
            comp.iter().map(|&c| r[c]).collect()
        };
        let q = comp.len();
        let mut table = vec![vec![Vec::new(); q]; q];
        for (a, &ca) in comp.iter().enumerate() {
            for (b, &cb) in comp.iter().enumerate() {
                table[a][b] = project(&self.table[ca][cb]);
            }
        }
        Ok(FpAlgebra { p: self.p, dim: q, table, one: project(&self.one) })
    }

    /// Whether the span of the given vectors is a two-sided ideal.
    pub fn is_ideal(&self, basis: &[Vec<u64>]) -> bool {
        if basis.is_empty() {
            return true;
        }
        let f = self.ctx();
        let h = howell(&Matrix::from_rows(f, self.dim, basis).expect("widths"));
        for x in basis {
            for k in 0..self.dim {
                let e = self.unit_vector(k);
                if !h.contains(&self.mul(x, &e)) || !h.contains(&self.mul(&e, x)) {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the ideal spanned by `basis` is nilpotent.
    pub fn is_nilpotent_ideal(&self, basis: &[Vec<u64>]) -> bool {
        let f = self.ctx();
        let mut cur: Vec<Vec<u64>> = basis.to_vec();
        for _ in 0..=self.dim {
            let h = howell(&Matrix::from_rows(f, self.dim, &cur).expect("widths"));
            if h.is_zero() {
                return true;
            }
            let rows = h.matrix().row_vecs();
            let mut next = Vec::new();
            for a in &rows {
                for b in basis {
                    next.push(self.mul(a, b));
                }
            }
            cur = next;
        }
        false
    }
}

fn trace_mod(a: &[u64], n: usize, q: u64) -> u64 {
    (0..n).fold(0, |acc, i| (acc + a[i * n + i]) % q)
}

fn matmul_mod(a: &[u64], b: &[u64], n: usize, q: u64) -> Vec<u64> {
    let q = q as u128;
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k] as u128;
            if x == 0 {
                continue;
            }
            for j in 0..n {
                let y = b[k * n + j] as u128;
                if y != 0 {
                    out[i * n + j] = ((out[i * n + j] as u128 + x * y) % q) as u64;
                }
            }
        }
    }
    out
}

/// g_i(x) = (Tr(L~_x^{p^i}) mod p^{i+1}) / p^i, with L~ the integer lift of the
/// left regular representation.
fn trace_functional(alg: &FpAlgebra, x: &[u64], i: u32) -> u64 {
    let p = alg.p;
    let n = alg.dim;
    let q = p.pow(i + 1);
    let l = alg.left_mult(x);
    let mut acc = l.data().to_vec();
    for _ in 0..i {
        // raise to the p-th power
        let base = acc.clone();
        for _ in 1..p {
            acc = matmul_mod(&acc, &base, n, q);
        }
    }
    let t = trace_mod(&acc, n, q);
    debug_assert_eq!(t % p.pow(i), 0, "trace not divisible at stage {i}");
    t / p.pow(i) % p
}

/// The Jacobson radical of an algebra over F_p by the trace-of-p-power chain.
pub fn radical(alg: &FpAlgebra) -> Result<Vec<Vec<u64>>> {
    if alg.dim > 400 {
        return Err(Error::TooLarge(format!("algebra of dimension {}", alg.dim)));
    }
    let f = alg.ctx();
    let t = alg.dim;
    if t == 0 {
        return Ok(Vec::new());
    }
    let mut l = 0u32;
    while alg.p.pow(l + 1) <= t as u64 {
        l += 1;
    }
    let mut current: Vec<Vec<u64>> = (0..t).map(|k| alg.unit_vector(k)).collect();
    for i in 0..=l {
        if current.is_empty() {
            break;
        }
        // conditions: g_i(x b) = 0 for every basis vector b, x in the current ideal
        let mut cond = Matrix::zeros(f, current.len(), t);
        for (r, x) in current.iter().enumerate() {
            for b in 0..t {
                let xb = alg.mul(x, &alg.unit_vector(b));
                cond.set(r, b, trace_functional(alg, &xb, i));
            }
        }
        let k = kernel(&cond);
        let mut next = Vec::new();
        for row in k.row_vecs() {
            let mut v = alg.zero();
            for (c, x) in row.iter().zip(&current) {
                if *c != 0 {
                    v = alg.add(&v, &alg.scale(x, *c));
                }
            }
            next.push(v);
        }
        let h = howell(&Matrix::from_rows(f, t, &next)?);
        current = h.matrix().row_vecs();
    }
    Ok(current)
}

/// The largest nilpotent ideal, by enumerating every element (small algebras only).
pub fn radical_bruteforce(alg: &FpAlgebra) -> Result<Vec<Vec<u64>>> {
    let total = (alg.p as u128).pow(alg.dim as u32);
    if total > 1 << 16 {
        return Err(Error::TooLarge(format!("{total} elements to enumerate")));
    }
    let f = alg.ctx();
    let mut members = Vec::new();
    for idx in 0..total as u64 {
        let x = index_to_vec(idx, alg.p, alg.dim);
        let mut gens = vec![x.clone()];
        for a in 0..alg.dim {
            let ea = alg.unit_vector(a);
            let ax = alg.mul(&ea, &x);
            gens.push(ax.clone());
            gens.push(alg.mul(&x, &ea));
            for b in 0..alg.dim {
                gens.push(alg.mul(&ax, &alg.unit_vector(b)));
            }
        }
        if alg.is_nilpotent_ideal(&gens) {
            members.push(x);
        }
    }
    Ok(howell(&Matrix::from_rows(f, alg.dim, &members)?).matrix().row_vecs())
}

fn index_to_vec(mut idx: u64, p: u64, dim: usize) -> Vec<u64> {
    let mut v = vec![0; dim];
    for x in v.iter_mut() {
        *x = idx % p;
        idx /= p;
    }
    v
}

/// Whether some idempotent other than 0 and 1 exists, by enumeration.
pub fn has_nontrivial_idempotent_bruteforce(alg: &FpAlgebra) -> Result<bool> {
    let total = (alg.p as u128).pow(alg.dim as u32);
    if total > 1 << 20 {
        return Err(Error::TooLarge(format!("{total} elements to enumerate")));
    }
    for idx in 0..total as u64 {
        let x = index_to_vec(idx, alg.p, alg.dim);
        if x == alg.zero() || x == alg.one {
            continue;
        }
        if alg.mul(&x, &x) == x {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub is_local: bool,
    /// dim over F_p of End(M)/p End(M).
    pub algebra_dim: usize,
    pub radical_dim: usize,
    pub residue_field_degree: Option<usize>,
}

/// Locality of an algebra over F_p: A/rad(A) must be a field.
pub fn algebra_locality(alg: &FpAlgebra) -> Result<LocalityReport> {
    let rad = radical(alg)?;
    let b = alg.quotient(&rad)?;
    let is_local = semisimple_is_field(&b)?;
    Ok(LocalityReport {
        is_local,
        algebra_dim: alg.dim,
        radical_dim: rad.len(),
        residue_field_degree: is_local.then_some(b.dim),
    })
}

/// For a semisimple algebra B: whether B is a field, i.e. commutative with a
/// one-dimensional space of Frobenius-fixed elements.
fn semisimple_is_field(b: &FpAlgebra) -> Result<bool> {
    if !b.is_commutative() {
        return Ok(false);
    }
    Ok(frobenius_fixed(b)?.len() == 1)
}

/// Basis of {x : x^p = x} in a commutative algebra.
fn frobenius_fixed(b: &FpAlgebra) -> Result<Vec<Vec<u64>>> {
    let f = b.ctx();
    let rows: Vec<Vec<u64>> = (0..b.dim)
        .map(|k| {
            let e = b.unit_vector(k);
            b.sub(&b.pow(&e, b.p), &e)
        })
        .collect();
    Ok(kernel(&Matrix::from_rows(f, b.dim, &rows)?).row_vecs())
}

/// End(M) with its generating set, in map and generator-image form.
pub struct EndAlgebra<'a> {
    module: &'a ConcreteModule,
    maps: Vec<Matrix>,
    images: Vec<Vec<u64>>,
}

impl<'a> EndAlgebra<'a> {
    pub fn new(module: &'a ConcreteModule) -> Result<Self> {
        let hs = module.hom_space(module)?;
        Ok(EndAlgebra { module, maps: hs.maps, images: hs.images })
    }

    pub fn module(&self) -> &ConcreteModule {
        self.module
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.maps
    }

    /// Generator images scaled so that coordinate k lives in p^{m-f_k} Z/p^m.
    fn scaled_images(&self, rows: &[Vec<u64>]) -> Matrix {
        let m = self.module;
        let b = m.base();
        let r = m.rank();
        let scaled: Vec<Vec<u64>> = rows
            .iter()
            .map(|v| v.iter().enumerate().map(|(idx, &x)| b.mul(x, b.p_pow(b.m() - m.divisors()[idx % r]))).collect())
            .collect();
        Matrix::from_rows(b, m.gens() * r, &scaled).expect("widths")
    }

    /// dim over F_p of End(M)/p End(M).
    pub fn fp_dim(&self) -> usize {
        if self.images.is_empty() {
            return 0;
        }
        let e = self.scaled_images(&self.images);
        let pe = e.scale(self.module.base().p() % self.module.base().modulus());
        (howell(&e).log_size() - howell(&pe).log_size()) as usize
    }

    /// Generator images of φ (applied to each generator of M).
    pub fn images_of(&self, phi: &Matrix) -> Vec<u64> {
        let m = self.module;
        let mut out = Vec::with_capacity(m.gens() * m.rank());
        for j in 0..m.gens() {
            out.extend(ConcreteModule::apply_map(m, phi, &m.gen(j)).coords);
        }
        out
    }

    /// Whether every generator is a module map and products stay in the span.
    pub fn verify_closure(&self) -> bool {
        let m = self.module;
        if !self.maps.iter().all(|phi| m.is_module_map(m, phi)) {
            return false;
        }
        if self.images.is_empty() {
            return true;
        }
        let h = howell(&self.scaled_images(&self.images));
        for a in &self.maps {
            for b in &self.maps {
                let prod = m.reduce_cols(&a.mul(b).expect("square"));
                let img = self.images_of(&prod);
                if !h.contains(self.scaled_images(&[img]).row(0)) {
                    return false;
                }
            }
        }
        true
    }

    /// The full algebra End(M)/p End(M) with structure constants; the product
    /// x·y applies x first.
    pub fn fp_algebra(&self) -> Result<(FpAlgebra, Vec<Matrix>)> {
        let m = self.module;
        let b = m.base();
        let p = b.p();
        if self.images.is_empty() {
            return Err(Error::InvalidArgument("the zero module has the zero endomorphism ring".into()));
        }
        let e = self.scaled_images(&self.images);
        let sm = smith_columns(&e);
        let dim = sm.exponents.iter().filter(|&&s| s < b.m()).count();
        let r = m.rank();
        // basis endomorphisms from the diagonal generators
        let mut basis = Vec::with_capacity(dim);
        for c in 0..dim {
            let s = sm.exponents[c];
            let row: Vec<u64> = sm.v_inv.row(c).iter().map(|&x| b.mul(x, b.p_pow(s))).collect();
            let imgs: Vec<ModElement> = row
                .chunks(r)
                .map(|chunk| {
                    let coords: Vec<u64> = chunk
                        .iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            let sh = b.m() - m.divisors()[k];
                            x / p.pow(sh)
                        })
                        .collect();
                    m.element(&coords).expect("rank")
                })
                .collect();
            basis.push(m.hom_from_generator_images(m, &imgs)?);
        }
        let coords_of = |phi: &Matrix| -> Vec<u64> {
            let img = self.images_of(phi);
            let scaled = self.scaled_images(&[img]);
            let w = scaled.mul(&sm.v).expect("shapes");
            (0..dim)
                .map(|c| {
                    let s = sm.exponents[c];
                    (w.get(0, c) / p.pow(s)) % p
                })
                .collect()
        };
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for x in 0..dim {
            for y in 0..dim {
                let prod = m.reduce_cols(&basis[x].mul(&basis[y])?);
                table[x][y] = coords_of(&prod);
            }
        }
        let one = coords_of(&Matrix::identity(b, r));
        Ok((FpAlgebra { p, dim, table, one }, basis))
    }

    /// The image of End(M) in End(M / IM), I = (p, σ-1), as a matrix algebra
    /// over F_p, with the induced matrix of every generator.
    pub fn top_action(&self) -> Result<TopAction> {
        let m = self.module;
        let p = m.base().p();
        let f = fp(p);
        let r = m.rank();
        let t = m.sigma().sub(&Matrix::identity(m.base(), r))?.reduce_to(f);
        let w = howell(&t);
        let pivots: Vec<usize> = w.pivots().iter().map(|pv| pv.col).collect();
        let comp: Vec<usize> = (0..r).filter(|c| !pivots.contains(c)).collect();
        let g = comp.len();
        let induced = |phi: &Matrix| -> Matrix {
            let phi = phi.reduce_to(f);
            let mut out = Matrix::zeros(f, g, g);
            for (a, &ca) in comp.iter().enumerate() {
                let red = w.reduce(phi.row(ca));
                for (bi, &cb) in comp.iter().enumerate() {
                    out.set(a, bi, red[cb]);
                }
            }
            out
        };
        let mats: Vec<Matrix> = self.maps.iter().map(induced).collect();
        Ok(TopAction { p, g, mats })
    }

    pub fn locality(&self) -> Result<LocalityReport> {
        let top = self.top_action()?;
        let alg = top.algebra()?;
        let rep = algebra_locality(&alg)?;
        let total = self.fp_dim();
        Ok(LocalityReport {
            is_local: rep.is_local,
            algebra_dim: total,
            radical_dim: total - (alg.dim - rep.radical_dim),
            residue_field_degree: rep.residue_field_degree,
        })
    }
}

/// The induced action of endomorphisms on M/IM.
pub struct TopAction {
    pub p: u64,
    /// dim M/IM = g(M).
    pub g: usize,
    /// One matrix per endomorphism generator.
    pub mats: Vec<Matrix>,
}

impl TopAction {
    pub fn algebra(&self) -> Result<FpAlgebra> {
        let mut mats = self.mats.clone();
        mats.push(Matrix::identity(fp(self.p), self.g));
        FpAlgebra::from_matrices(self.p, &mats)
    }
}

/// A nontrivial idempotent endomorphism with both of its summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub idempotent: Vec<Vec<u64>>,
    /// Generators of eM.
    pub summand: Vec<ModElement>,
    /// Generators of (1-e)M.
    pub complement: Vec<ModElement>,
    pub summand_log_order: u64,
    pub complement_log_order: u64,
}

impl DecompositionCertificate {
    pub fn from_idempotent(m: &ConcreteModule, e: &Matrix) -> Result<Self> {
        let b = m.base();
        let id = Matrix::identity(b, m.rank());
        let f = m.reduce_cols(&id.sub(e)?);
        let gens_e: Vec<ModElement> = (0..m.gens()).map(|j| ConcreteModule::apply_map(m, e, &m.gen(j))).collect();
        let gens_f: Vec<ModElement> = (0..m.gens()).map(|j| ConcreteModule::apply_map(m, &f, &m.gen(j))).collect();
        let cert = DecompositionCertificate {
            idempotent: e.row_vecs(),
            summand_log_order: m.image_of(m, e).log_order(),
            complement_log_order: m.image_of(m, &f).log_order(),
            summand: gens_e,
            complement: gens_f,
        };
        cert.verify(m)?;
        Ok(cert)
    }

    pub fn idempotent_matrix(&self, m: &ConcreteModule) -> Result<Matrix> {
        Matrix::from_rows(m.base(), m.rank(), &self.idempotent)
    }

    /// Checks every invariant exactly.
    pub fn verify(&self, m: &ConcreteModule) -> Result<()> {
        let b = m.base();
        let e = self.idempotent_matrix(m)?;
        if e.rows() != m.rank() {
            return Err(Error::Verification("idempotent has the wrong shape".into()));
        }
        if !m.is_module_map(m, &e) {
            return Err(Error::Verification("e is not a module endomorphism".into()));
        }
        let id = m.reduce_cols(&Matrix::identity(b, m.rank()));
        let ee = m.reduce_cols(&e.mul(&e)?);
        let e = m.reduce_cols(&e);
        if ee != e {
            return Err(Error::Verification("e∘e != e".into()));
        }
        if e.is_zero() || e == id {
            return Err(Error::Verification("e is trivial".into()));
        }
        let f = m.reduce_cols(&id.sub(&e)?);
        let em = m.image_of(m, &e);
        let fm = m.image_of(m, &f);
        if !em.intersect(&fm)?.is_zero() {
            return Err(Error::Verification("eM ∩ (1-e)M != 0".into()));
        }
        if em.log_order() + fm.log_order() != m.log_order() {
            return Err(Error::Verification("|eM| |(1-e)M| != |M|".into()));
        }
        if em.log_order() != self.summand_log_order || fm.log_order() != self.complement_log_order {
            return Err(Error::Verification("recorded summand orders disagree".into()));
        }
        let sub_e = m.submodule_generated(&self.summand);
        let sub_f = m.submodule_generated(&self.complement);
        if sub_e != em || sub_f != fm {
            return Err(Error::Verification("summand generators do not generate eM and (1-e)M".into()));
        }
        Ok(())
    }

    /// Both summands realised as modules on their generators.
    pub fn summands(&self, m: &ConcreteModule) -> Result<(ConcreteModule, ConcreteModule)> {
        let (a, _) = m.from_images(&self.summand, m.labels().to_vec())?;
        let (c, _) = m.from_images(&self.complement, m.labels().to_vec())?;
        Ok((a, c))
    }
}

/// Decides indecomposability of a nonzero module through locality of End(M).
pub fn is_indecomposable(m: &ConcreteModule) -> Result<(bool, LocalityReport)> {
    if m.is_zero_module() {
        return Err(Error::InvalidArgument("the zero module is neither decomposable nor indecomposable".into()));
    }
    let end = EndAlgebra::new(m)?;
    let rep = end.locality()?;
    Ok((rep.is_local, rep))
}

/// M = ker φ^N ⊕ im φ^N for stabilised N; `None` when one part is zero.
pub fn fitting_split(m: &ConcreteModule, phi: &Matrix) -> Result<Option<DecompositionCertificate>> {
    let mut n = m.log_order().max(1);
    let mut psi = m.reduce_cols(&phi.pow(n)?);
    loop {
        let psi2 = m.reduce_cols(&psi.mul(&psi)?);
        if m.kernel_of(m, &psi) == m.kernel_of(m, &psi2) {
            break;
        }
        psi = psi2;
        n *= 2;
        if n > 1 << 20 {
            return Err(Error::Inconsistency("Fitting chain failed to stabilise".into()));
        }
    }
    let k = m.kernel_of(m, &psi);
    let im = m.image_of(m, &psi);
    if k.is_zero() || im.is_zero() {
        return Ok(None);
    }
    let e = projection_onto(m, &k, &im)?;
    Ok(Some(DecompositionCertificate::from_idempotent(m, &e)?))
}

/// The projection onto `im` along `k`, for M = k ⊕ im.
fn projection_onto(m: &ConcreteModule, k: &Submodule, im: &Submodule) -> Result<Matrix> {
    let b = m.base();
    let kr = k.form().matrix();
    let ir = im.form().matrix();
    let stacked = kr.vstack(ir)?;
    let solver = Solver::new(&stacked);
    let mut e = Matrix::zeros(b, m.rank(), m.rank());
    for c in 0..m.rank() {
        let mut unit = vec![0; m.rank()];
        unit[c] = 1 % b.modulus();
        let x = solver
            .solve(&unit)
            .ok_or_else(|| Error::Inconsistency("kernel and image do not span the module".into()))?;
        let xi = &x[kr.rows()..];
        let v = ir.vec_mul(xi);
        e.row_mut(c).copy_from_slice(&v);
    }
    Ok(m.reduce_cols(&e))
}

fn random_combination(rng: &mut ChaCha8Rng, maps: &[Matrix], m: &ConcreteModule) -> (Vec<u64>, Matrix) {
    let b = m.base();
    let mut acc = Matrix::zeros(b, m.rank(), m.rank());
    let mut coeffs = Vec::with_capacity(maps.len());
    for phi in maps {
        let c = rng.gen_range(0..b.p());
        coeffs.push(c);
        if c != 0 {
            acc = acc.add(&phi.scale(c)).expect("shapes");
        }
    }
    (coeffs, m.reduce_cols(&acc))
}

/// Searches for a nontrivial idempotent endomorphism.
///
/// Returns `Ok(None)` when End(M) is local. Candidates are Fitting splits of the
/// generators of End(M), then of seeded random combinations whose action on
/// M/IM is neither nilpotent nor invertible.
pub fn find_decomposition(m: &ConcreteModule, seed: u64, budget: usize) -> Result<Option<DecompositionCertificate>> {
    if m.is_zero_module() {
        return Err(Error::InvalidArgument("the zero module is neither decomposable nor indecomposable".into()));
    }
    let end = EndAlgebra::new(m)?;
    let top = end.top_action()?;
    let alg = top.algebra()?;
    if algebra_locality(&alg)?.is_local {
        return Ok(None);
    }
    for phi in end.generators() {
        if let Some(cert) = fitting_split(m, phi)? {
            return Ok(Some(cert));
        }
    }
    let f = fp(top.p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget {
        let (coeffs, phi) = random_combination(&mut rng, end.generators(), m);
        let mut t = Matrix::zeros(f, top.g, top.g);
        for (c, mat) in coeffs.iter().zip(&top.mats) {
            if *c != 0 {
                t = t.add(&mat.scale(*c))?;
            }
        }
        if !splits_top(&t)? {
            continue;
        }
        if let Some(cert) = fitting_split(m, &phi)? {
            return Ok(Some(cert));
        }
    }
    Err(Error::BudgetExhausted(budget))
}

/// Whether a square matrix over F_p is neither nilpotent nor invertible.
fn splits_top(t: &Matrix) -> Result<bool> {
    let n = t.rows();
    let tn = t.pow(n as u64)?;
    let rank = howell(&tn).pivots().len();
    Ok(rank > 0 && rank < n)
}

/// Recursive decomposition into indecomposable summands.
pub fn decompose_fully(m: &ConcreteModule, seed: u64) -> Result<Vec<ConcreteModule>> {
    if m.is_zero_module() {
        return Ok(Vec::new());
    }
    match find_decomposition(m, seed, DEFAULT_BUDGET)? {
        None => Ok(vec![m.clone()]),
        Some(cert) => {
            let (a, c) = cert.summands(m)?;
            let mut out = decompose_fully(&a, seed.wrapping_add(1))?;
            out.extend(decompose_fully(&c, seed.wrapping_add(2))?);
            Ok(out)
        }
    }
}

/// The canonical form of a span of F_p vectors, for comparisons in tests.
pub fn fp_span(p: u64, dim: usize, rows: &[Vec<u64>]) -> HowellForm {
    howell(&Matrix::from_rows(fp(p), dim, rows).expect("widths"))
}
