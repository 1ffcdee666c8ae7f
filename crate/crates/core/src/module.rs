//! Finite modules over R_mG_i in elementary-divisor coordinates.
//!
//! A module is a quotient of the free module F = (R_mG_i)^g. F has the
//! Z/p^m-basis σ^t e_j, indexed j·p^i + t. The relation lattice is diagonalised
//! by column operations, which gives coordinates M ≅ Z/p^{f_1} × … × Z/p^{f_r}.
//! Elements are row vectors and maps act on the right.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupring::{GroupRingCtx, GroupRingElem};
use crate::linalg::{howell, kernel, rank_mod_p, smith_columns, span_intersect, span_sum, HowellForm, Matrix};
use crate::residue::RingCtx;

/// A presentation by generators and relations; relation r asserts Σ_k r[k] e_k = 0.
#[derive(Clone, Debug)]
pub struct ModulePresentation {
    pub ring: GroupRingCtx,
    pub gens: usize,
    pub relations: Vec<Vec<GroupRingElem>>,
    pub labels: Vec<String>,
}

/// JSON form of a presentation: each relation is a list of per-generator
/// coefficient lists (coefficient of σ^t at index t).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PresentationSpec {
    pub p: u64,
    pub m: u32,
    pub level: u32,
    pub gens: usize,
    pub relations: Vec<Vec<Vec<i64>>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl PresentationSpec {
    pub fn to_presentation(&self) -> Result<ModulePresentation> {
        let ring = GroupRingCtx::from_parts(self.p, self.m, self.level)?;
        let mut relations = Vec::new();
        for rel in &self.relations {
            if rel.len() != self.gens {
                return Err(Error::ShapeMismatch(format!("relation with {} entries for {} generators", rel.len(), self.gens)));
            }
            relations.push(rel.iter().map(|c| ring.from_poly_i64(c)).collect());
        }
        Ok(ModulePresentation { ring, gens: self.gens, relations, labels: self.labels.clone() })
    }
}

/// An element of a concrete module, by coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModElement {
    pub coords: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct ConcreteModule {
    ring: GroupRingCtx,
    divisors: Vec<u32>,
    sigma: Matrix,
    gens: usize,
    gen_images: Vec<Vec<u64>>,
    // F -> M, (gens * order) x r
    projection: Matrix,
    // M -> F, r x (gens * order); a section of the projection
    coord_lift: Matrix,
    relation_form: HowellForm,
    // R-module generators of the relation lattice, as vectors in F
    relations: Vec<Vec<u64>>,
    labels: Vec<String>,
}

fn default_labels(g: usize) -> Vec<String> {
    (0..g).map(|j| format!("g{j}")).collect()
}

/// σ · v for v in F = (R_mG_i)^g.
fn shift_free(order: usize, v: &[u64]) -> Vec<u64> {
    let mut out = vec![0; v.len()];
    for (blk_in, blk_out) in v.chunks(order).zip(out.chunks_mut(order)) {
        for t in 0..order {
            blk_out[(t + 1) % order] = blk_in[t];
        }
    }
    out
}

fn sigma_closure(order: usize, v: &[u64]) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(order);
    let mut cur = v.to_vec();
    for _ in 0..order {
        let next = shift_free(order, &cur);
        out.push(cur);
        cur = next;
    }
    out
}

impl ConcreteModule {
    /// The quotient of (R_mG_i)^gens by the R-submodule generated by `rows`
    /// (vectors in F).
    pub fn from_relation_rows(ring: GroupRingCtx, gens: usize, rows: &[Vec<u64>], labels: Vec<String>) -> Result<Self> {
        let base = ring.base();
        let order = ring.order();
        let n = gens * order;
        for r in rows {
            if r.len() != n {
                return Err(Error::ShapeMismatch(format!("relation of length {} in a free module of rank {n}", r.len())));
            }
        }
        let labels = if labels.len() == gens { labels } else { default_labels(gens) };
        // greedy choice of R-module generators for the relation lattice
        let mut relations: Vec<Vec<u64>> = Vec::new();
        let mut closure_rows: Vec<Vec<u64>> = Vec::new();
        let mut form = howell(&Matrix::zeros(base, 0, n));
        for r in rows {
            let r: Vec<u64> = r.iter().map(|&x| base.reduce(x)).collect();
            if form.contains(&r) {
                continue;
            }
            closure_rows.extend(sigma_closure(order, &r));
            relations.push(r);
            form = howell(&Matrix::from_rows(base, n, &closure_rows)?);
            closure_rows = form.matrix().row_vecs();
        }
        let sm = smith_columns(form.matrix());
        let rank = sm.exponents.len();
        let mut kept = Vec::new();
        let mut divisors = Vec::new();
        for c in 0..n {
            let f = if c < rank { sm.exponents[c] } else { base.m() };
            if f > 0 {
                kept.push(c);
                divisors.push(f);
            }
        }
        let r = kept.len();
        let mut projection = Matrix::zeros(base, n, r);
        for row in 0..n {
            for (k, &c) in kept.iter().enumerate() {
                projection.set(row, k, sm.v.get(row, c) % base.p().pow(divisors[k]));
            }
        }
        let mut coord_lift = Matrix::zeros(base, r, n);
        for (k, &c) in kept.iter().enumerate() {
            coord_lift.row_mut(k).copy_from_slice(sm.v_inv.row(c));
        }
        // σ on F permutes basis vectors within each block
        let mut shifted = Matrix::zeros(base, n, r);
        for j in 0..gens {
            for t in 0..order {
                let src = j * order + (t + 1) % order;
                let row = projection.row(src).to_vec();
                shifted.row_mut(j * order + t).copy_from_slice(&row);
            }
        }
        let mut module = ConcreteModule {
            ring,
            divisors,
            sigma: Matrix::zeros(base, r, r),
            gens,
            gen_images: Vec::new(),
            projection,
            coord_lift,
            relation_form: form,
            relations,
            labels,
        };
        let sigma = coord_lift_mul(&module.coord_lift, &shifted)?;
        module.sigma = module.reduce_cols(&sigma);
        module.gen_images = (0..gens).map(|j| module.projection.row(j * order).to_vec()).collect();
        Ok(module)
    }

    pub fn realize(pres: &ModulePresentation) -> Result<Self> {
        let order = pres.ring.order();
        let mut rows = Vec::new();
        for rel in &pres.relations {
            if rel.len() != pres.gens {
                return Err(Error::ShapeMismatch("relation length differs from generator count".into()));
            }
            let mut v = vec![0; pres.gens * order];
            for (j, f) in rel.iter().enumerate() {
                if f.ctx() != pres.ring {
                    return Err(Error::ContextMismatch);
                }
                v[j * order..(j + 1) * order].copy_from_slice(f.coeffs());
            }
            rows.push(v);
        }
        ConcreteModule::from_relation_rows(pres.ring, pres.gens, &rows, pres.labels.clone())
    }

    /// The free module (R_mG_i)^gens.
    pub fn free(ring: GroupRingCtx, gens: usize) -> Result<Self> {
        ConcreteModule::from_relation_rows(ring, gens, &[], Vec::new())
    }

    /// The cyclic module R_mG_i / ⟨relations⟩ with one generator.
    pub fn cyclic(ring: GroupRingCtx, relations: &[GroupRingElem]) -> Result<Self> {
        let rows: Vec<Vec<u64>> = relations.iter().map(|f| f.coeffs().to_vec()).collect();
        ConcreteModule::from_relation_rows(ring, 1, &rows, Vec::new())
    }

    pub fn zero_module(ring: GroupRingCtx) -> Result<Self> {
        ConcreteModule::from_relation_rows(ring, 0, &[], Vec::new())
    }

    pub fn ring(&self) -> GroupRingCtx {
        self.ring
    }

    pub fn base(&self) -> RingCtx {
        self.ring.base()
    }

    pub fn divisors(&self) -> &[u32] {
        &self.divisors
    }

    /// Number of coordinates.
    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    /// log_p |M|.
    pub fn log_order(&self) -> u64 {
        self.divisors.iter().map(|&f| f as u64).sum()
    }

    pub fn is_zero_module(&self) -> bool {
        self.divisors.is_empty()
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    pub fn gen_images(&self) -> &[Vec<u64>] {
        &self.gen_images
    }

    pub fn gen(&self, j: usize) -> ModElement {
        ModElement { coords: self.gen_images[j].clone() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn relations(&self) -> &[Vec<u64>] {
        &self.relations
    }

    pub fn relation_form(&self) -> &HowellForm {
        &self.relation_form
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    pub fn coord_lift(&self) -> &Matrix {
        &self.coord_lift
    }

    fn modulus_of(&self, k: usize) -> u64 {
        self.base().p().pow(self.divisors[k])
    }

    pub fn reduce_coords(&self, v: &mut [u64]) {
        for (k, x) in v.iter_mut().enumerate() {
            *x %= self.modulus_of(k);
        }
    }

    /// Reduces column k of a matrix with r columns modulo p^{f_k}.
    pub fn reduce_cols(&self, a: &Matrix) -> Matrix {
        let mut out = a.clone();
        for r in 0..out.rows() {
            self.reduce_coords(out.row_mut(r));
        }
        out
    }

    pub fn element(&self, coords: &[u64]) -> Result<ModElement> {
        if coords.len() != self.rank() {
            return Err(Error::ShapeMismatch(format!("{} coordinates for a module of rank {}", coords.len(), self.rank())));
        }
        let mut c = coords.to_vec();
        self.reduce_coords(&mut c);
        Ok(ModElement { coords: c })
    }

    pub fn zero(&self) -> ModElement {
        ModElement { coords: vec![0; self.rank()] }
    }

    pub fn is_zero(&self, u: &ModElement) -> bool {
        u.coords.iter().enumerate().all(|(k, &x)| x % self.modulus_of(k) == 0)
    }

    pub fn add(&self, u: &ModElement, v: &ModElement) -> ModElement {
        let b = self.base();
        let mut c: Vec<u64> = u.coords.iter().zip(&v.coords).map(|(&x, &y)| b.add(x, y)).collect();
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    pub fn sub(&self, u: &ModElement, v: &ModElement) -> ModElement {
        let b = self.base();
        let mut c: Vec<u64> = u.coords.iter().zip(&v.coords).map(|(&x, &y)| b.sub(x, y)).collect();
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    pub fn neg(&self, u: &ModElement) -> ModElement {
        let b = self.base();
        let mut c: Vec<u64> = u.coords.iter().map(|&x| b.neg(x)).collect();
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    pub fn scale(&self, u: &ModElement, s: u64) -> ModElement {
        let b = self.base();
        let mut c: Vec<u64> = u.coords.iter().map(|&x| b.mul(x, s)).collect();
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    pub fn apply_sigma(&self, u: &ModElement) -> ModElement {
        let mut c = self.sigma.vec_mul(&u.coords);
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    /// The action of f as an r x r matrix.
    pub fn act_matrix(&self, f: &GroupRingElem) -> Result<Matrix> {
        if f.ctx() != self.ring {
            return Err(Error::ContextMismatch);
        }
        let b = self.base();
        let r = self.rank();
        let mut acc = Matrix::zeros(b, r, r);
        let mut pw = Matrix::identity(b, r);
        for (t, &c) in f.coeffs().iter().enumerate() {
            if c != 0 {
                acc = acc.add(&pw.scale(c))?;
            }
            if t + 1 < f.coeffs().len() {
                pw = self.reduce_cols(&pw.mul(&self.sigma)?);
            }
        }
        Ok(self.reduce_cols(&acc))
    }

    pub fn act(&self, f: &GroupRingElem, u: &ModElement) -> Result<ModElement> {
        if f.ctx() != self.ring {
            return Err(Error::ContextMismatch);
        }
        let b = self.base();
        let mut acc = vec![0; self.rank()];
        let mut cur = u.clone();
        for &c in f.coeffs() {
            if c != 0 {
                for (a, &x) in acc.iter_mut().zip(&cur.coords) {
                    *a = b.add(*a, b.mul(c, x));
                }
            }
            cur = self.apply_sigma(&cur);
        }
        self.reduce_coords(&mut acc);
        Ok(ModElement { coords: acc })
    }

    /// The image of a vector of F = (R_mG_i)^g.
    pub fn from_free(&self, v: &[u64]) -> ModElement {
        let mut c = self.projection.vec_mul(v);
        self.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    /// Σ_j f_j · gen_j.
    pub fn combine(&self, coeffs: &[GroupRingElem]) -> Result<ModElement> {
        if coeffs.len() != self.gens {
            return Err(Error::ShapeMismatch("one coefficient per generator expected".into()));
        }
        let mut acc = self.zero();
        for (j, f) in coeffs.iter().enumerate() {
            acc = self.add(&acc, &self.act(f, &self.gen(j))?);
        }
        Ok(acc)
    }

    /// Whether every relation holds for the generator images.
    pub fn relations_hold(&self) -> bool {
        self.relation_form.matrix().row_vecs().iter().all(|r| self.is_zero(&self.from_free(r)))
    }

    /// Scales column k by p^{m - f_k}, embedding Z/p^{f_k} into Z/p^m.
    fn scale_cols_into(&self, a: &Matrix) -> Matrix {
        let b = self.base();
        let mut out = a.clone();
        for r in 0..out.rows() {
            let row = out.row_mut(r);
            for (k, x) in row.iter_mut().enumerate() {
                *x = b.mul(*x, b.p_pow(b.m() - self.divisors[k]));
            }
        }
        out
    }

    /// Rows p^{f_k} e_k generating the kernel of (Z/p^m)^r -> M.
    fn divisor_rows(&self) -> Vec<Vec<u64>> {
        let b = self.base();
        (0..self.rank())
            .filter(|&k| self.divisors[k] < b.m())
            .map(|k| {
                let mut v = vec![0; self.rank()];
                v[k] = b.p_pow(self.divisors[k]);
                v
            })
            .collect()
    }

    /// The submodule of elements u with u A = 0 in the target coordinates
    /// described by `target_divisors` (A has one column per target coordinate).
    fn kernel_submodule(&self, a: &Matrix, target_divisors: &[u32]) -> Submodule {
        let b = self.base();
        let mut scaled = a.clone();
        for r in 0..scaled.rows() {
            let row = scaled.row_mut(r);
            for (k, x) in row.iter_mut().enumerate() {
                *x = b.mul(*x, b.p_pow(b.m() - target_divisors[k]));
            }
        }
        let mut k = kernel(&scaled);
        for d in self.divisor_rows() {
            k.push_row(&d);
        }
        Submodule { ctx: b, divisors: self.divisors.clone(), form: howell(&k) }
    }

    pub fn submodule_generated(&self, elements: &[ModElement]) -> Submodule {
        let b = self.base();
        let mut rows = Vec::new();
        for e in elements {
            let mut cur = e.clone();
            for _ in 0..self.ring.order() {
                rows.push(cur.coords.clone());
                cur = self.apply_sigma(&cur);
            }
        }
        rows.extend(self.divisor_rows());
        let m = Matrix::from_rows(b, self.rank(), &rows).expect("consistent widths");
        Submodule { ctx: b, divisors: self.divisors.clone(), form: howell(&m) }
    }

    pub fn whole(&self) -> Submodule {
        let b = self.base();
        Submodule { ctx: b, divisors: self.divisors.clone(), form: howell(&Matrix::identity(b, self.rank())) }
    }

    fn sigma_minus_one(&self) -> Matrix {
        self.sigma.sub(&Matrix::identity(self.base(), self.rank())).expect("square")
    }

    /// M^G = ker(σ - 1).
    pub fn fixed_points(&self) -> Submodule {
        self.kernel_submodule(&self.sigma_minus_one(), &self.divisors)
    }

    /// M⋆ = ker(σ - 1) ∩ ker(p).
    pub fn star(&self) -> Submodule {
        let b = self.base();
        let r = self.rank();
        let a = self.sigma_minus_one().hstack(&Matrix::identity(b, r).scale(b.p() % b.modulus())).expect("rows");
        let mut divs = self.divisors.clone();
        divs.extend_from_slice(&self.divisors);
        self.kernel_submodule(&a, &divs)
    }

    /// σ - 1 on M/pM, as a matrix over F_p.
    fn sigma_minus_one_mod_p(&self) -> Matrix {
        let fp = RingCtx::new(self.base().p(), 1).expect("prime");
        self.sigma_minus_one().reduce_to(fp)
    }

    /// l(u): the F_p-dimension of the F_pG-submodule of M/pM generated by u.
    pub fn length(&self, u: &ModElement) -> usize {
        let t = self.sigma_minus_one_mod_p();
        let fp = t.ctx();
        let mut v: Vec<u64> = u.coords.iter().map(|&x| fp.reduce(x)).collect();
        let mut l = 0;
        while v.iter().any(|&x| x != 0) {
            l += 1;
            v = t.vec_mul(&v);
            if l > self.rank() {
                break;
            }
        }
        l
    }

    /// g(M) = dim M / (p, σ-1)M.
    pub fn min_generators(&self) -> usize {
        self.rank() - rank_mod_p(&self.sigma_minus_one())
    }

    pub fn is_cyclic(&self) -> bool {
        self.min_generators() <= 1
    }

    pub fn iso_signature(&self) -> IsoSignature {
        let m = self.base().m();
        let t = self.sigma_minus_one_mod_p();
        let r = self.rank();
        let mut ker_profile = Vec::with_capacity(self.ring.order());
        let mut pw = Matrix::identity(t.ctx(), r);
        for _ in 0..self.ring.order() {
            pw = pw.mul(&t).expect("square");
            ker_profile.push(r - rank_mod_p(&pw));
        }
        let layer_dims = (0..m).map(|k| self.divisors.iter().filter(|&&f| f > k).count()).collect();
        IsoSignature {
            log_order: self.log_order(),
            generators: self.min_generators(),
            star_dim: self.star().log_order() as usize,
            ker_profile,
            layer_dims,
        }
    }

    /// M / p^k M, as a module over the same ring.
    pub fn quotient_mod_pk(&self, k: u32) -> Result<ConcreteModule> {
        let b = self.base();
        if k == 0 || k > b.m() {
            return Err(Error::InvalidArgument(format!("need 1 <= k <= m, got k = {k}")));
        }
        let order = self.ring.order();
        let mut rows = self.relations.clone();
        for j in 0..self.gens {
            let mut v = vec![0; self.gens * order];
            v[j * order] = b.p_pow(k);
            rows.push(v);
        }
        ConcreteModule::from_relation_rows(self.ring, self.gens, &rows, self.labels.clone())
    }

    /// M ⊕ N with block coordinates.
    pub fn direct_sum(&self, other: &ConcreteModule) -> Result<ConcreteModule> {
        if self.ring != other.ring {
            return Err(Error::ContextMismatch);
        }
        let b = self.base();
        let order = self.ring.order();
        let (r1, r2) = (self.rank(), other.rank());
        let (n1, n2) = (self.gens * order, other.gens * order);
        let block = |a: &Matrix, c: &Matrix| -> Matrix {
            let mut out = Matrix::zeros(b, a.rows() + c.rows(), a.cols() + c.cols());
            for r in 0..a.rows() {
                out.row_mut(r)[..a.cols()].copy_from_slice(a.row(r));
            }
            for r in 0..c.rows() {
                out.row_mut(a.rows() + r)[a.cols()..].copy_from_slice(c.row(r));
            }
            out
        };
        let pad = |v: &[u64], before: usize, after: usize| -> Vec<u64> {
            let mut out = vec![0; before];
            out.extend_from_slice(v);
            out.extend(std::iter::repeat(0).take(after));
            out
        };
        let mut relations: Vec<Vec<u64>> = self.relations.iter().map(|v| pad(v, 0, n2)).collect();
        relations.extend(other.relations.iter().map(|v| pad(v, n1, 0)));
        let rel_rows: Vec<Vec<u64>> = self
            .relation_form
            .matrix()
            .row_vecs()
            .iter()
            .map(|v| pad(v, 0, n2))
            .chain(other.relation_form.matrix().row_vecs().iter().map(|v| pad(v, n1, 0)))
            .collect();
        let mut gen_images: Vec<Vec<u64>> = self.gen_images.iter().map(|v| pad(v, 0, r2)).collect();
        gen_images.extend(other.gen_images.iter().map(|v| pad(v, r1, 0)));
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut divisors = self.divisors.clone();
        divisors.extend_from_slice(&other.divisors);
        Ok(ConcreteModule {
            ring: self.ring,
            divisors,
            sigma: block(&self.sigma, &other.sigma),
            gens: self.gens + other.gens,
            gen_images,
            projection: block(&self.projection, &other.projection),
            coord_lift: block(&self.coord_lift, &other.coord_lift),
            relation_form: howell(&Matrix::from_rows(b, n1 + n2, &rel_rows)?),
            relations,
            labels,
        })
    }

    /// The submodule generated by `elements`, realised as a module on those
    /// generators, together with its inclusion map into `self`.
    pub fn from_images(&self, elements: &[ModElement], labels: Vec<String>) -> Result<(ConcreteModule, Matrix)> {
        let b = self.base();
        let order = self.ring.order();
        let g = elements.len();
        let mut a = Matrix::zeros(b, 0, self.rank());
        for e in elements {
            let mut cur = e.clone();
            for _ in 0..order {
                a.push_row(&cur.coords);
                cur = self.apply_sigma(&cur);
            }
        }
        let k = kernel(&self.scale_cols_into(&a));
        let sub = ConcreteModule::from_relation_rows(self.ring, g, &k.row_vecs(), labels)?;
        let inclusion = self.reduce_cols(&sub.coord_lift.mul(&a)?);
        Ok((sub, inclusion))
    }

    /// Applies a map given by a matrix with one column per target coordinate.
    pub fn apply_map(target: &ConcreteModule, phi: &Matrix, u: &ModElement) -> ModElement {
        let mut c = phi.vec_mul(&u.coords);
        target.reduce_coords(&mut c);
        ModElement { coords: c }
    }

    /// The generator coefficient ρ_j of a relation vector, as a ring element.
    fn relation_entry(&self, rel: &[u64], j: usize) -> GroupRingElem {
        let order = self.ring.order();
        self.ring.from_coeffs(&rel[j * order..(j + 1) * order]).expect("block length")
    }

    /// Builds the map sending generator j to images[j], checking every relation.
    pub fn hom_from_generator_images(&self, target: &ConcreteModule, images: &[ModElement]) -> Result<Matrix> {
        if self.ring != target.ring {
            return Err(Error::ContextMismatch);
        }
        if images.len() != self.gens {
            return Err(Error::ShapeMismatch("one image per generator expected".into()));
        }
        for rel in &self.relations {
            let mut acc = target.zero();
            for (j, n) in images.iter().enumerate() {
                let f = self.relation_entry(rel, j);
                acc = target.add(&acc, &target.act(&f, n)?);
            }
            if !target.is_zero(&acc) {
                return Err(Error::Verification("generator images violate a defining relation".into()));
            }
        }
        Ok(self.map_from_images_unchecked(target, images))
    }

    fn map_from_images_unchecked(&self, target: &ConcreteModule, images: &[ModElement]) -> Matrix {
        let b = self.base();
        let order = self.ring.order();
        let mut g = Matrix::zeros(b, self.gens * order, target.rank());
        for (j, n) in images.iter().enumerate() {
            let mut cur = n.clone();
            for t in 0..order {
                g.row_mut(j * order + t).copy_from_slice(&cur.coords);
                cur = target.apply_sigma(&cur);
            }
        }
        target.reduce_cols(&self.coord_lift.mul(&g).expect("shapes"))
    }

    /// A generating set of Hom(self, target) as an abelian group.
    ///
    /// A map is determined by the images of the generators; the unknown images
    /// are constrained by one linear condition per relation generator.
    pub fn hom_space(&self, target: &ConcreteModule) -> Result<HomSpace> {
        if self.ring != target.ring {
            return Err(Error::ContextMismatch);
        }
        let b = self.base();
        let rn = target.rank();
        let g = self.gens;
        if rn == 0 || self.rank() == 0 {
            return Ok(HomSpace { maps: Vec::new(), images: Vec::new() });
        }
        let mut cond = Matrix::zeros(b, g * rn, 0);
        for rel in &self.relations {
            let mut block = Matrix::zeros(b, 0, rn);
            for j in 0..g {
                let f = self.relation_entry(rel, j);
                block = block.vstack(&target.act_matrix(&f)?)?;
            }
            cond = cond.hstack(&target.scale_cols_into(&block))?;
        }
        let k = kernel(&cond);
        let mut images = Vec::new();
        let mut maps = Vec::new();
        for row in k.row_vecs() {
            let imgs: Vec<ModElement> = row
                .chunks(rn)
                .map(|c| {
                    let mut c = c.to_vec();
                    target.reduce_coords(&mut c);
                    ModElement { coords: c }
                })
                .collect();
            if imgs.iter().all(|e| target.is_zero(e)) {
                continue;
            }
            let flat: Vec<u64> = imgs.iter().flat_map(|e| e.coords.iter().copied()).collect();
            if images.contains(&flat) {
                continue;
            }
            maps.push(self.map_from_images_unchecked(target, &imgs));
            images.push(flat);
        }
        Ok(HomSpace { maps, images })
    }

    /// Hom(self, target) by solving S_M Φ = Φ S_N directly (small modules only).
    pub fn hom_space_direct(&self, target: &ConcreteModule) -> Result<Vec<Matrix>> {
        if self.ring != target.ring {
            return Err(Error::ContextMismatch);
        }
        let b = self.base();
        let (rm, rn) = (self.rank(), target.rank());
        let vars = rm * rn;
        if vars == 0 {
            return Ok(Vec::new());
        }
        if vars > 1600 {
            return Err(Error::TooLarge(format!("{vars} unknowns in a direct Hom computation")));
        }
        let sm = &self.sigma;
        let sn = &target.sigma;
        let mut a = Matrix::zeros(b, vars, 2 * vars);
        for k in 0..rm {
            for l in 0..rn {
                let eq = k * rn + l;
                let scale = b.p_pow(b.m() - target.divisors[l]);
                // (S_M Φ)_{kl} = Σ_a S_M[k][a] Φ[a][l]
                for av in 0..rm {
                    let c = sm.get(k, av);
                    if c != 0 {
                        let var = av * rn + l;
                        let cur = a.get(var, eq);
                        a.set(var, eq, b.add(cur, b.mul(c, scale)));
                    }
                }
                // -(Φ S_N)_{kl} = -Σ_b Φ[k][b] S_N[b][l]
                for bv in 0..rn {
                    let c = sn.get(bv, l);
                    if c != 0 {
                        let var = k * rn + bv;
                        let cur = a.get(var, eq);
                        a.set(var, eq, b.sub(cur, b.mul(c, scale)));
                    }
                }
                // p^{e_k} Φ_{kl} = 0 in the target coordinate
                a.set(eq, vars + eq, b.mul(b.p_pow(self.divisors[k]), scale));
            }
        }
        let ker = kernel(&a);
        let mut out: Vec<Matrix> = Vec::new();
        for row in ker.row_vecs() {
            let phi = target.reduce_cols(&Matrix::from_rows(b, rn, &row.chunks(rn).map(|c| c.to_vec()).collect::<Vec<_>>())?);
            if !phi.is_zero() && !out.contains(&phi) {
                out.push(phi);
            }
        }
        Ok(out)
    }

    /// Whether a matrix defines a module map self -> target.
    pub fn is_module_map(&self, target: &ConcreteModule, phi: &Matrix) -> bool {
        if phi.rows() != self.rank() || phi.cols() != target.rank() {
            return false;
        }
        let b = self.base();
        for k in 0..self.rank() {
            let v: Vec<u64> = phi.row(k).iter().map(|&x| b.mul(x, b.p_pow(self.divisors[k]))).collect();
            if !target.is_zero(&ModElement { coords: v }) {
                return false;
            }
        }
        let lhs = target.reduce_cols(&self.sigma.mul(phi).expect("shapes"));
        let rhs = target.reduce_cols(&phi.mul(&target.sigma).expect("shapes"));
        lhs == rhs
    }

    /// The image of a map self -> target, as a submodule of target.
    pub fn image_of(&self, target: &ConcreteModule, phi: &Matrix) -> Submodule {
        let elems: Vec<ModElement> = (0..phi.rows()).map(|r| ModElement { coords: phi.row(r).to_vec() }).collect();
        let b = self.base();
        let mut rows: Vec<Vec<u64>> = elems.into_iter().map(|e| e.coords).collect();
        rows.extend(target.divisor_rows());
        let m = Matrix::from_rows(b, target.rank(), &rows).expect("widths");
        Submodule { ctx: b, divisors: target.divisors.clone(), form: howell(&m) }
    }

    /// The kernel of a map self -> target, as a submodule of self.
    pub fn kernel_of(&self, target: &ConcreteModule, phi: &Matrix) -> Submodule {
        self.kernel_submodule(phi, &target.divisors)
    }
}

fn coord_lift_mul(lift: &Matrix, a: &Matrix) -> Result<Matrix> {
    lift.mul(a)
}

/// A generating set of a Hom group: maps as matrices together with the
/// generator images they come from (flattened, one block per source generator).
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub maps: Vec<Matrix>,
    pub images: Vec<Vec<u64>>,
}

/// A necessary-condition fingerprint for isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IsoSignature {
    pub log_order: u64,
    pub generators: usize,
    pub star_dim: usize,
    /// dim ker (σ-1)^j on M/pM for j = 1..p^i.
    pub ker_profile: Vec<usize>,
    /// dim p^k M / p^{k+1} M for k = 0..m-1.
    pub layer_dims: Vec<usize>,
}

/// A submodule, stored as the canonical form of its preimage in (Z/p^m)^r.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submodule {
    ctx: RingCtx,
    divisors: Vec<u32>,
    form: HowellForm,
}

impl Submodule {
    pub fn form(&self) -> &HowellForm {
        &self.form
    }

    /// log_p of the number of elements.
    pub fn log_order(&self) -> u64 {
        let m = self.ctx.m() as u64;
        let ambient: u64 = self.divisors.iter().map(|&f| m - f as u64).sum();
        self.form.log_size() - ambient
    }

    pub fn is_zero(&self) -> bool {
        self.log_order() == 0
    }

    pub fn contains(&self, u: &ModElement) -> bool {
        self.form.contains(&u.coords)
    }

    pub fn intersect(&self, other: &Submodule) -> Result<Submodule> {
        if self.divisors != other.divisors {
            return Err(Error::ContextMismatch);
        }
        Ok(Submodule { ctx: self.ctx, divisors: self.divisors.clone(), form: span_intersect(&self.form, &other.form)? })
    }

    pub fn sum(&self, other: &Submodule) -> Result<Submodule> {
        if self.divisors != other.divisors {
            return Err(Error::ContextMismatch);
        }
        Ok(Submodule { ctx: self.ctx, divisors: self.divisors.clone(), form: span_sum(&self.form, &other.form)? })
    }

    /// Nonzero generators as module elements.
    pub fn generators(&self) -> Vec<ModElement> {
        let mut out = Vec::new();
        for row in self.form.matrix().row_vecs() {
            let mut c = row;
            for (k, x) in c.iter_mut().enumerate() {
                *x %= self.ctx.p().pow(self.divisors[k]);
            }
            if c.iter().any(|&x| x != 0) {
                out.push(ModElement { coords: c });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupring::{build_p, sigma_minus_one_pow};
    use std::collections::BTreeSet;

    fn grc(p: u64, m: u32, i: u32) -> GroupRingCtx {
        GroupRingCtx::from_parts(p, m, i).unwrap()
    }

    fn enumerate(m: &ConcreteModule) -> Vec<ModElement> {
        let mut out = vec![m.zero()];
        for k in 0..m.rank() {
            let q = m.base().p().pow(m.divisors()[k]);
            let mut next = Vec::new();
            for e in &out {
                for x in 0..q {
                    let mut c = e.coords.clone();
                    c[k] = x;
                    next.push(ModElement { coords: c });
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn free_module_shape() {
        let r = grc(2, 3, 2);
        let f = ConcreteModule::free(r, 1).unwrap();
        assert_eq!(f.divisors(), &[3, 3, 3, 3]);
        assert_eq!(f.log_order(), 12);
        assert!(f.relations_hold());
    }

    #[test]
    fn trivial_action_quotient() {
        let r = grc(2, 2, 1);
        let m = ConcreteModule::cyclic(r, &[&r.sigma() - &r.one()]).unwrap();
        assert_eq!(m.log_order(), 2);
        let g = m.gen(0);
        assert_eq!(m.apply_sigma(&g), g);
        // enumeration cross-check: the quotient of Z/4[C_2] by (σ-1) has 4 elements
        assert_eq!(enumerate(&m).len(), 4);
    }

    #[test]
    fn sigma_minus_d_module() {
        // ⟨y : (σ - d) y = 0⟩ with d^{p^n} = 1 mod p has order p when m = 1
        let r = grc(3, 1, 2);
        let m = ConcreteModule::cyclic(r, &[&r.sigma() - &r.scalar(4)]).unwrap();
        assert_eq!(m.log_order(), 1);
    }

    #[test]
    fn action_examples() {
        let r = grc(3, 2, 1);
        let f = ConcreteModule::free(r, 1).unwrap();
        let u = f.gen(0);
        assert_eq!(f.act(&r.one(), &u).unwrap(), u);
        assert_eq!(f.act(&r.sigma_pow(3), &u).unwrap(), u);
        let norm = build_p(r, 1, Some(0)).unwrap();
        let mut acc = f.zero();
        for t in 0..3 {
            acc = f.add(&acc, &f.act(&r.sigma_pow(t), &u).unwrap());
        }
        assert_eq!(f.act(&norm, &u).unwrap(), acc);
    }

    #[test]
    fn fixed_points_and_star_of_free() {
        for (p, m, i) in [(2u64, 2u32, 1u32), (3, 2, 1), (2, 3, 2)] {
            let r = grc(p, m, i);
            let f = ConcreteModule::free(r, 1).unwrap();
            let norm = f.act(&build_p(r, i, Some(0)).unwrap(), &f.gen(0)).unwrap();
            assert_eq!(f.fixed_points(), f.submodule_generated(&[norm]));
            let s = f.star();
            assert_eq!(s.log_order(), 1);
            let w = f.act(&sigma_minus_one_pow(r, r.order() as u64 - 1).scale(p.pow(m - 1)), &f.gen(0)).unwrap();
            assert_eq!(s, f.submodule_generated(&[w]));
        }
    }

    #[test]
    fn length_and_generators() {
        let r = grc(2, 2, 2);
        let f = ConcreteModule::free(r, 1).unwrap();
        assert_eq!(f.length(&f.gen(0)), 4);
        assert_eq!(f.length(&f.scale(&f.gen(0), 2)), 0);
        assert_eq!(f.length(&f.zero()), 0);
        assert_eq!(f.min_generators(), 1);
        assert!(f.is_cyclic());
        let z = ConcreteModule::zero_module(r).unwrap();
        assert_eq!(z.min_generators(), 0);
        let t = ConcreteModule::cyclic(grc(2, 1, 0), &[]).unwrap();
        assert!(!t.direct_sum(&t).unwrap().is_cyclic());
    }

    #[test]
    fn hom_examples() {
        let r = grc(2, 1, 1);
        let triv = ConcreteModule::cyclic(r, &[&r.sigma() - &r.one()]).unwrap();
        let free = ConcreteModule::free(r, 1).unwrap();
        let homs = triv.hom_space(&free).unwrap();
        // the image of the generator must be fixed: one nonzero map over F_2
        let all: BTreeSet<Vec<u64>> = homs.maps.iter().map(|m| m.data().to_vec()).collect();
        assert_eq!(all.len(), 1);
        let direct = triv.hom_space_direct(&free).unwrap();
        assert_eq!(direct.len(), 1);
        assert_eq!(direct[0], homs.maps[0]);
        let zero = ConcreteModule::zero_module(r).unwrap();
        assert!(free.hom_space(&zero).unwrap().maps.is_empty());
        let end = free.hom_space(&free).unwrap();
        for phi in &end.maps {
            assert!(free.is_module_map(&free, phi));
        }
    }

    #[test]
    fn quotient_examples() {
        let r = grc(3, 2, 1);
        let f = ConcreteModule::free(r, 1).unwrap();
        assert_eq!(f.quotient_mod_pk(2).unwrap().iso_signature(), f.iso_signature());
        let q = f.quotient_mod_pk(1).unwrap();
        assert_eq!(q.divisors(), &[1, 1, 1]);
        assert!(f.quotient_mod_pk(0).is_err());
    }

    #[test]
    fn submodule_from_images_round_trip() {
        let r = grc(2, 2, 1);
        let f = ConcreteModule::free(r, 2).unwrap();
        let u = f.add(&f.gen(0), &f.apply_sigma(&f.gen(1)));
        let (sub, inc) = f.from_images(&[u.clone()], vec!["u".into()]).unwrap();
        assert_eq!(sub.log_order(), 4);
        assert!(sub.relations_hold());
        assert_eq!(ConcreteModule::apply_map(&f, &inc, &sub.gen(0)), u);
        assert!(sub.is_module_map(&f, &inc));
    }

    #[test]
    fn signature_distinguishes_orders() {
        let r0 = grc(2, 1, 1);
        let a = ConcreteModule::cyclic(r0, &[&r0.sigma() - &r0.one()]).unwrap();
        let b = ConcreteModule::free(r0, 1).unwrap();
        assert_ne!(a.iso_signature(), b.iso_signature());
        let s = a.direct_sum(&b).unwrap();
        assert_eq!(s.log_order(), a.log_order() + b.log_order());
        assert_eq!(s.star().log_order(), a.star().log_order() + b.star().log_order());
    }
}
