//! The Kac-Moody algebra `g(A)` truncated at a height cutoff.
//!
//! The positive side is built degree by degree as a quotient of the free
//! Lie algebra on the `e_i`: at each multidegree the Lyndon-basis component
//! is row-reduced modulo the Serre ideal, and the surviving echelon basis
//! becomes the basis of the root space. The negative side is the mirror
//! image in the `f_i` (the mirror preserves structure constants), and
//! brackets across the triangular decomposition are computed by induction
//! on height from `[e_i, f_j] = delta_ij alpha_i^vee` and the h-action.
//!
//! All structure constants are precomputed at build time, so a finished
//! algebra is immutable and cheap to share across threads.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{One, Signed, Zero};

use crate::cartan::{
    realization, validate_and_symmetrize, BilinearForm, CartanMatrix, Realization, Symmetrizer,
};
use crate::error::{KmError, Result};
use crate::freelie::{expand_lyndon, is_lyndon, lyndon_coordinates, lyndon_words, NcPoly, Word};
use crate::qlinalg::RowSpace;
use crate::ratio::{rat_int, rat_to_string, Rat};
use crate::weyl::Root;

/// One stored root space on the positive side.
#[derive(Debug, Clone)]
struct Space {
    /// Lyndon words of this multidegree, lex order (the free basis).
    words: Vec<Word>,
    /// Degree component of the Serre ideal, in free coordinates.
    ideal: RowSpace,
    /// Indices into `words` forming the quotient basis (non-pivots).
    basis: Vec<usize>,
}

type SparseVec = Vec<(usize, Rat)>;

/// Sparse element of the truncated algebra: one coefficient vector per
/// root, the zero root keying the Cartan subalgebra in realization
/// coordinates. No explicit zero components are kept.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    pub terms: BTreeMap<Root, Vec<Rat>>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn single(root: Root, dim: usize, idx: usize, c: Rat) -> Self {
        let mut v = vec![Rat::zero(); dim];
        v[idx] = c;
        let mut e = AlgebraElement::zero();
        e.add_component(root, v);
        e
    }

    pub fn add_component(&mut self, root: Root, coeffs: Vec<Rat>) {
        if coeffs.iter().all(|c| c.is_zero()) {
            return;
        }
        match self.terms.get_mut(&root) {
            None => {
                self.terms.insert(root, coeffs);
            }
            Some(v) => {
                for (a, b) in v.iter_mut().zip(&coeffs) {
                    *a += b;
                }
                if v.iter().all(|c| c.is_zero()) {
                    self.terms.remove(&root);
                }
            }
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (r, v) in &other.terms {
            out.add_component(r.clone(), v.clone());
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(&rat_int(-1)))
    }

    pub fn scale(&self, c: &Rat) -> AlgebraElement {
        if c.is_zero() {
            return AlgebraElement::zero();
        }
        let mut out = AlgebraElement::zero();
        for (r, v) in &self.terms {
            out.terms.insert(r.clone(), v.iter().map(|x| x * c).collect());
        }
        out
    }

    /// Height-graded projection onto degree m.
    pub fn pi_height(&self, m: i64) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (r, v) in &self.terms {
            if r.height() == m {
                out.terms.insert(r.clone(), v.clone());
            }
        }
        out
    }

    /// Order: the smallest height with a nonzero component.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().map(|r| r.height()).min()
    }

    pub fn max_height(&self) -> Option<i64> {
        self.terms.keys().map(|r| r.height()).max()
    }

    /// Supported only on positive roots.
    pub fn is_positive(&self) -> bool {
        self.terms.keys().all(|r| r.is_positive())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut terms = Vec::new();
        for (r, v) in &self.terms {
            for (idx, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    terms.push(serde_json::json!({
                        "root": r.coeffs(),
                        "idx": idx,
                        "coeff": rat_to_string(c),
                    }));
                }
            }
        }
        serde_json::json!({ "terms": terms })
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (r, v) in &self.terms {
            for (idx, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{}*x[{},{}]", rat_to_string(c), r, idx)?;
            }
        }
        Ok(())
    }
}

/// The graded algebra `g(A)` with root spaces stored for every root of
/// height at most the cutoff.
#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    gcm: CartanMatrix,
    sym: Symmetrizer,
    real: Realization,
    form: BilinearForm,
    cutoff: i64,
    spaces: BTreeMap<Root, Space>,
    pos_pos: BTreeMap<(Root, Root), Vec<Vec<SparseVec>>>,
    mixed: BTreeMap<(Root, Root), Vec<Vec<AlgebraElement>>>,
}

/// All multidegrees in Q+ of the given height, lex order.
pub fn multidegrees(l: usize, height: i64) -> Vec<Root> {
    fn rec(l: usize, left: i64, prefix: &mut Vec<i64>, out: &mut Vec<Root>) {
        if prefix.len() == l - 1 {
            prefix.push(left);
            out.push(Root::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(l, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(l, height, &mut Vec::new(), &mut out);
    out
}

fn expand_cached(w: &Word, cache: &mut HashMap<Word, NcPoly>) -> NcPoly {
    if let Some(p) = cache.get(w) {
        return p.clone();
    }
    let p = expand_lyndon(w);
    cache.insert(w.clone(), p.clone());
    p
}

impl GradedAlgebra {
    /// Build the algebra from raw matrix entries up to height `cutoff`.
    /// `cutoff = 0` yields h alone.
    pub fn build(entries: Vec<Vec<i64>>, cutoff: i64) -> Result<GradedAlgebra> {
        let (gcm, sym) = validate_and_symmetrize(entries)?;
        let real = realization(&gcm);
        let form = BilinearForm::new(&gcm, &sym);
        let l = gcm.size();
        assert!(cutoff >= 0);

        let mut expansions: HashMap<Word, NcPoly> = HashMap::new();

        // Serre element multidegrees: sigma_ij = (1 - a_ij) alpha_i + alpha_j.
        let mut serre_at: BTreeMap<Root, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    let mut c = vec![0i64; l];
                    c[i] = 1 - gcm.entry(i, j);
                    c[j] += 1;
                    serre_at.entry(Root::new(c)).or_default().push((i, j));
                }
            }
        }

        let mut spaces: BTreeMap<Root, Space> = BTreeMap::new();
        for d in 1..=cutoff {
            let mut by_content: BTreeMap<Root, Vec<Word>> = BTreeMap::new();
            for w in lyndon_words(l, d as usize) {
                by_content.entry(Root::new(w.multidegree(l))).or_default().push(w);
            }
            for beta in multidegrees(l, d) {
                let words = by_content.remove(&beta).unwrap_or_default();
                if words.is_empty() {
                    continue;
                }
                let word_index: BTreeMap<Word, usize> =
                    words.iter().enumerate().map(|(k, w)| (w.clone(), k)).collect();
                let mut new_rows: Vec<NcPoly> = Vec::new();
                // ad(e_i) images of the lower ideal components
                for i in 0..l {
                    if beta.coeff(i) == 0 {
                        continue;
                    }
                    let mut lower = beta.coeffs().to_vec();
                    lower[i] -= 1;
                    let gamma = Root::new(lower);
                    if gamma.is_zero() {
                        continue;
                    }
                    if let Some(low) = spaces.get(&gamma) {
                        let ei = NcPoly::letter((i + 1) as u8);
                        for row in &low.ideal.rows {
                            let mut p = NcPoly::zero();
                            for (k, c) in row.iter().enumerate() {
                                if !c.is_zero() {
                                    p = p
                                        .add(&expand_cached(&low.words[k], &mut expansions).scale(c));
                                }
                            }
                            new_rows.push(ei.bracket_trunc(&p, d as usize));
                        }
                    }
                }
                // Serre generators living at this multidegree
                if let Some(pairs) = serre_at.get(&beta) {
                    for &(i, j) in pairs {
                        let mut p = NcPoly::letter((j + 1) as u8);
                        let ei = NcPoly::letter((i + 1) as u8);
                        for _ in 0..(1 - gcm.entry(i, j)) {
                            p = ei.bracket_trunc(&p, d as usize);
                        }
                        new_rows.push(p);
                    }
                }
                let mut ideal = RowSpace::new(words.len());
                for p in new_rows {
                    let coords = lyndon_coordinates(&p)?;
                    let mut v = vec![Rat::zero(); words.len()];
                    for (w, c) in coords {
                        v[*word_index.get(&w).expect("content mismatch")] = c;
                    }
                    ideal.insert(&v);
                }
                let basis = ideal.non_pivots();
                spaces.insert(beta, Space { words, ideal, basis });
            }
        }

        let mut alg = GradedAlgebra {
            gcm,
            sym,
            real,
            form,
            cutoff,
            spaces,
            pos_pos: BTreeMap::new(),
            mixed: BTreeMap::new(),
        };

        // positive x positive structure constants, heights summing within cutoff
        let roots: Vec<Root> = alg
            .spaces
            .iter()
            .filter(|(_, s)| !s.basis.is_empty())
            .map(|(r, _)| r.clone())
            .collect();
        for a in &roots {
            for b in &roots {
                if a.height() + b.height() > cutoff {
                    continue;
                }
                let gamma = a.add(b);
                let (da, db) = (alg.dim_pos(a), alg.dim_pos(b));
                let mut table = vec![vec![SparseVec::new(); db]; da];
                for (ia, row) in table.iter_mut().enumerate() {
                    let pa = expand_cached(&alg.basis_word(a, ia).clone(), &mut expansions);
                    for (ib, cell) in row.iter_mut().enumerate() {
                        let pb = expand_cached(&alg.basis_word(b, ib).clone(), &mut expansions);
                        let br = pa.bracket_trunc(&pb, (a.height() + b.height()) as usize);
                        *cell = alg.free_poly_to_quotient(&gamma, &br)?;
                    }
                }
                alg.pos_pos.insert((a.clone(), b.clone()), table);
            }
        }

        // mixed tables [x_a, y_b] for positive roots a, b, in increasing
        // total height so the induction only consults finished entries
        let mut pairs: Vec<(Root, Root)> = Vec::new();
        for a in &roots {
            for b in &roots {
                pairs.push((a.clone(), b.clone()));
            }
        }
        pairs.sort_by_key(|(a, b)| (a.height() + b.height(), a.clone(), b.clone()));
        for (a, b) in pairs {
            let (da, db) = (alg.dim_pos(&a), alg.dim_pos(&b));
            let mut table = vec![vec![AlgebraElement::zero(); db]; da];
            for (ia, row) in table.iter_mut().enumerate() {
                for (ib, cell) in row.iter_mut().enumerate() {
                    *cell = alg.mixed_bracket_words(&a, ia, &b, ib)?;
                }
            }
            alg.mixed.insert((a, b), table);
        }

        Ok(alg)
    }

    fn dim_pos(&self, root: &Root) -> usize {
        self.spaces.get(root).map_or(0, |s| s.basis.len())
    }

    fn basis_word(&self, root: &Root, idx: usize) -> &Word {
        let s = &self.spaces[root];
        &s.words[s.basis[idx]]
    }

    /// Express a free Lie polynomial of multidegree `gamma` in the quotient
    /// basis, as a sparse vector.
    fn free_poly_to_quotient(&self, gamma: &Root, p: &NcPoly) -> Result<SparseVec> {
        if p.is_zero() {
            return Ok(SparseVec::new());
        }
        let Some(space) = self.spaces.get(gamma) else {
            debug_assert!(p.is_zero(), "nonzero Lie polynomial in a zero component");
            return Ok(SparseVec::new());
        };
        let coords = lyndon_coordinates(p)?;
        let mut v = vec![Rat::zero(); space.words.len()];
        for (w, c) in coords {
            let k = space.words.binary_search(&w).expect("word of wrong content");
            v[k] = c;
        }
        let reduced = space.ideal.reduce(&v);
        Ok(space
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &k)| !reduced[k].is_zero())
            .map(|(q, &k)| (q, reduced[k].clone()))
            .collect())
    }

    /// The class of any Lyndon word of its multidegree in quotient
    /// coordinates.
    fn word_class(&self, root: &Root, w: &Word) -> SparseVec {
        debug_assert!(is_lyndon(&w.0));
        let space = &self.spaces[root];
        let k = space.words.binary_search(w).expect("word of wrong content");
        let mut v = vec![Rat::zero(); space.words.len()];
        v[k] = Rat::one();
        let reduced = space.ideal.reduce(&v);
        space
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &k)| !reduced[k].is_zero())
            .map(|(q, &k)| (q, reduced[k].clone()))
            .collect()
    }

    /// `[x_{a,ia}, y_{b,ib}]` across the triangular decomposition, by
    /// induction on total height.
    fn mixed_bracket_words(
        &self,
        a: &Root,
        ia: usize,
        b: &Root,
        ib: usize,
    ) -> Result<AlgebraElement> {
        let l = self.gcm.size();
        if a.height() == 1 && b.height() == 1 {
            let i = (0..l).find(|&i| a.coeff(i) == 1).unwrap();
            let j = (0..l).find(|&j| b.coeff(j) == 1).unwrap();
            if i != j {
                return Ok(AlgebraElement::zero());
            }
            let mut e = AlgebraElement::zero();
            e.add_component(Root::zero(l), self.real.simple_coroots.data[i].clone());
            return Ok(e);
        }
        if a.height() >= 2 {
            // x = [u, v] by the standard factorization of the basis word
            let w = self.basis_word(a, ia).clone();
            let (u, v) = crate::freelie::standard_factorization(&w);
            let (ru, rv) = (Root::new(u.multidegree(l)), Root::new(v.multidegree(l)));
            let xu = self.sparse_to_element(&ru, &self.word_class(&ru, &u), false);
            let xv = self.sparse_to_element(&rv, &self.word_class(&rv, &v), false);
            let y = self.neg_basis_element(b, ib);
            // [[u,v],y] = [u,[v,y]] - [v,[u,y]]
            let vy = self.bracket(&xv, &y)?;
            let uy = self.bracket(&xu, &y)?;
            Ok(self.bracket(&xu, &vy)?.sub(&self.bracket(&xv, &uy)?))
        } else {
            // height(a) = 1 < height(b): decompose the mirrored word
            let w = self.basis_word(b, ib).clone();
            let (u, v) = crate::freelie::standard_factorization(&w);
            let (ru, rv) = (Root::new(u.multidegree(l)), Root::new(v.multidegree(l)));
            let yu = self.sparse_to_element(&ru, &self.word_class(&ru, &u), true);
            let yv = self.sparse_to_element(&rv, &self.word_class(&rv, &v), true);
            let x = self.pos_basis_element(a, ia);
            // [x, [yu, yv]] = [[x, yu], yv] + [yu, [x, yv]]
            let xu = self.bracket(&x, &yu)?;
            let xv = self.bracket(&x, &yv)?;
            Ok(self.bracket(&xu, &yv)?.add(&self.bracket(&yu, &xv)?))
        }
    }

    fn sparse_to_element(&self, root: &Root, sv: &SparseVec, negative: bool) -> AlgebraElement {
        let dim = self.dim_pos(root);
        let mut v = vec![Rat::zero(); dim];
        for (k, c) in sv {
            v[*k] = c.clone();
        }
        let mut e = AlgebraElement::zero();
        e.add_component(if negative { root.neg() } else { root.clone() }, v);
        e
    }

    pub fn pos_basis_element(&self, root: &Root, idx: usize) -> AlgebraElement {
        AlgebraElement::single(root.clone(), self.dim_pos(root), idx, Rat::one())
    }

    pub fn neg_basis_element(&self, root: &Root, idx: usize) -> AlgebraElement {
        AlgebraElement::single(root.neg(), self.dim_pos(root), idx, Rat::one())
    }

    /// The idx-th basis vector of the graded piece at `root` (either sign,
    /// or h at zero).
    pub fn basis_element(&self, root: &Root, idx: usize) -> AlgebraElement {
        if root.is_positive() {
            self.pos_basis_element(root, idx)
        } else if root.is_negative() {
            self.neg_basis_element(&root.neg(), idx)
        } else {
            AlgebraElement::single(root.clone(), self.dim_h(), idx, Rat::one())
        }
    }

    pub fn gcm(&self) -> &CartanMatrix {
        &self.gcm
    }

    pub fn symmetrizer(&self) -> &Symmetrizer {
        &self.sym
    }

    pub fn realization(&self) -> &Realization {
        &self.real
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn rank(&self) -> usize {
        self.gcm.size()
    }

    /// Dimension of h.
    pub fn dim_h(&self) -> usize {
        self.real.n
    }

    /// Dimension of the graded piece at `root` (either sign); `dim_h` at 0.
    pub fn dim(&self, root: &Root) -> usize {
        if root.is_zero() {
            self.dim_h()
        } else if root.is_positive() {
            self.dim_pos(root)
        } else if root.is_negative() {
            self.dim_pos(&root.neg())
        } else {
            0
        }
    }

    /// Root multiplicity from the Serre quotient.
    pub fn mult(&self, root: &Root) -> usize {
        if root.is_zero() {
            0
        } else {
            self.dim(root)
        }
    }

    /// Positive roots of nonzero multiplicity within the cutoff, ascending.
    pub fn positive_roots(&self) -> Vec<Root> {
        self.spaces
            .iter()
            .filter(|(_, s)| !s.basis.is_empty())
            .map(|(r, _)| r.clone())
            .collect()
    }

    /// All nonzero roots within the cutoff, negatives included, ascending.
    pub fn all_roots(&self) -> Vec<Root> {
        let mut out: Vec<Root> = self.positive_roots();
        let negs: Vec<Root> = out.iter().map(Root::neg).collect();
        out.extend(negs);
        out.sort();
        out
    }

    pub fn e(&self, i: usize) -> Result<AlgebraElement> {
        if i >= self.rank() {
            return Err(KmError::IndexOutOfRange(i + 1, self.rank()));
        }
        Ok(self.pos_basis_element(&Root::simple(i, self.rank()), 0))
    }

    pub fn f(&self, i: usize) -> Result<AlgebraElement> {
        if i >= self.rank() {
            return Err(KmError::IndexOutOfRange(i + 1, self.rank()));
        }
        Ok(self.neg_basis_element(&Root::simple(i, self.rank()), 0))
    }

    /// The t-th basis vector of h in realization coordinates.
    pub fn h_basis(&self, t: usize) -> Result<AlgebraElement> {
        if t >= self.dim_h() {
            return Err(KmError::IndexOutOfRange(t + 1, self.dim_h()));
        }
        Ok(AlgebraElement::single(Root::zero(self.rank()), self.dim_h(), t, Rat::one()))
    }

    /// The coroot `alpha_i^vee` as an h-element.
    pub fn coroot_element(&self, i: usize) -> Result<AlgebraElement> {
        if i >= self.rank() {
            return Err(KmError::IndexOutOfRange(i + 1, self.rank()));
        }
        let mut e = AlgebraElement::zero();
        e.add_component(Root::zero(self.rank()), self.real.simple_coroots.data[i].clone());
        Ok(e)
    }

    /// `<beta, h>` for a root-lattice vector and an h-coordinate vector.
    pub fn weight_pairing(&self, beta: &Root, h: &[Rat]) -> Rat {
        let coords = self.real.root_coords(beta);
        let mut s = Rat::zero();
        for (a, b) in coords.iter().zip(h) {
            s += a * b;
        }
        s
    }

    fn bracket_components(
        &self,
        ra: &Root,
        va: &[Rat],
        rb: &Root,
        vb: &[Rat],
    ) -> Result<AlgebraElement> {
        if ra.is_zero() && rb.is_zero() {
            return Ok(AlgebraElement::zero());
        }
        if ra.is_zero() {
            // [h, x_beta] = <beta, h> x_beta
            let c = self.weight_pairing(rb, va);
            let mut e = AlgebraElement::zero();
            e.add_component(rb.clone(), vb.iter().map(|x| x * &c).collect());
            return Ok(e);
        }
        if rb.is_zero() {
            return Ok(self.bracket_components(rb, vb, ra, va)?.scale(&rat_int(-1)));
        }
        let (pa, pb) = (ra.is_positive(), rb.is_positive());
        match (pa, pb) {
            (true, true) | (false, false) => {
                let (ka, kb) = if pa { (ra.clone(), rb.clone()) } else { (ra.neg(), rb.neg()) };
                if ka.height() + kb.height() > self.cutoff {
                    return Err(KmError::CutoffExceeded(ra.add(rb), self.cutoff));
                }
                let gamma = ka.add(&kb);
                let dim = self.dim_pos(&gamma);
                if dim == 0 {
                    return Ok(AlgebraElement::zero());
                }
                let table = self.pos_pos.get(&(ka, kb)).expect("structure table missing");
                let mut out = vec![Rat::zero(); dim];
                for (ia, ca) in va.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (ib, cb) in vb.iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        let c = ca * cb;
                        for (k, x) in &table[ia][ib] {
                            out[*k] += x * &c;
                        }
                    }
                }
                let mut e = AlgebraElement::zero();
                // negative x negative mirrors with identical constants
                e.add_component(if pa { gamma } else { gamma.neg() }, out);
                Ok(e)
            }
            (true, false) => {
                let table = self.mixed.get(&(ra.clone(), rb.neg())).expect("mixed table missing");
                let mut out = AlgebraElement::zero();
                for (ia, ca) in va.iter().enumerate() {
                    if ca.is_zero() {
                        continue;
                    }
                    for (ib, cb) in vb.iter().enumerate() {
                        if cb.is_zero() {
                            continue;
                        }
                        out = out.add(&table[ia][ib].scale(&(ca * cb)));
                    }
                }
                Ok(out)
            }
            (false, true) => Ok(self.bracket_components(rb, vb, ra, va)?.scale(&rat_int(-1))),
        }
    }

    /// Lie bracket, bilinear over all component pairs. A product component
    /// whose height leaves the cutoff window is an explicit error, never a
    /// silent truncation.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        let mut out = AlgebraElement::zero();
        for (ra, va) in &x.terms {
            for (rb, vb) in &y.terms {
                out = out.add(&self.bracket_components(ra, va, rb, vb)?);
            }
        }
        Ok(out)
    }

    /// `ad(x)^n (y)`.
    pub fn ad_pow(
        &self,
        x: &AlgebraElement,
        n: usize,
        y: &AlgebraElement,
    ) -> Result<AlgebraElement> {
        let mut acc = y.clone();
        for _ in 0..n {
            acc = self.bracket(x, &acc)?;
        }
        Ok(acc)
    }

    /// Check that every Serre element whose degree fits the cutoff vanishes
    /// through the runtime bracket path.
    pub fn serre_elements_vanish(&self) -> Result<bool> {
        let l = self.rank();
        for i in 0..l {
            for j in 0..l {
                if i == j {
                    continue;
                }
                let n = (1 - self.gcm.entry(i, j)) as usize;
                if 1 + n as i64 > self.cutoff {
                    continue;
                }
                let pe = self.ad_pow(&self.e(i)?, n, &self.e(j)?)?;
                let pf = self.ad_pow(&self.f(i)?, n, &self.f(j)?)?;
                if !pe.is_zero() || !pf.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Root multiplicities by the Peterson recurrence, seeded with
/// `mult(alpha_i) = 1` and driven by the bilinear form alone. Independent
/// of the Serre-quotient construction, which it cross-validates.
pub fn peterson_table(
    gcm: &CartanMatrix,
    sym: &Symmetrizer,
    max_height: i64,
) -> BTreeMap<Root, i64> {
    let l = gcm.size();
    let form = BilinearForm::new(gcm, sym);
    let two_rho_pairing = |beta: &Root| -> Rat {
        // (beta, 2 rho) with (rho, alpha_i) = d_i
        let mut s = Rat::zero();
        for i in 0..l {
            s += rat_int(2 * beta.coeff(i) * sym.d[i]);
        }
        s
    };
    let mut betas: Vec<Root> = (1..=max_height).flat_map(|d| multidegrees(l, d)).collect();
    betas.sort();
    let mut c: BTreeMap<Root, Rat> = BTreeMap::new();
    let mut mult: BTreeMap<Root, i64> = BTreeMap::new();
    for beta in betas {
        if beta.height() == 1 {
            c.insert(beta.clone(), Rat::one());
            mult.insert(beta, 1);
            continue;
        }
        // ordered decompositions beta = b1 + b2 with both parts nonzero
        let mut rhs = Rat::zero();
        for b1 in decompositions(&beta) {
            let b2 = beta.sub(&b1);
            if let (Some(c1), Some(c2)) = (c.get(&b1), c.get(&b2)) {
                rhs += form.eval(&b1, &b2) * c1 * c2;
            }
        }
        let denom = form.norm(&beta) - two_rho_pairing(&beta);
        let divisor_part: Rat = (2..=beta.height())
            .filter_map(|k| beta.divided(k).map(|sub| (k, sub)))
            .map(|(k, sub)| rat_int(*mult.get(&sub).unwrap_or(&0)) / rat_int(k))
            .sum();
        let c_beta = if denom.is_zero() {
            // only hit for non-roots (orthogonal decomposable supports)
            assert!(rhs.is_zero(), "Peterson recurrence inconsistent at {beta}");
            divisor_part.clone()
        } else {
            rhs / denom
        };
        let m = &c_beta - &divisor_part;
        assert!(m.denom().is_one(), "non-integral multiplicity at {beta}");
        assert!(!m.numer().is_negative(), "negative multiplicity at {beta}");
        let m_int: i64 = m.numer().try_into().expect("multiplicity fits i64");
        c.insert(beta.clone(), c_beta);
        mult.insert(beta, m_int);
    }
    mult
}

/// Lattice points 0 < b <= beta componentwise, excluding beta itself.
fn decompositions(beta: &Root) -> Vec<Root> {
    let l = beta.rank();
    let mut out = Vec::new();
    let mut cur = vec![0i64; l];
    loop {
        let mut i = 0;
        loop {
            if i == l {
                return out;
            }
            if cur[i] < beta.coeff(i) {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        let cand = Root::new(cur.clone());
        if cand != *beta {
            out.push(cand);
        }
    }
}

/// Multiplicity of a single lattice vector without building the algebra;
/// 0 for anything outside Q+.
pub fn peterson_mult(gcm: &CartanMatrix, sym: &Symmetrizer, beta: &Root) -> i64 {
    if !beta.is_positive() {
        return 0;
    }
    *peterson_table(gcm, sym, beta.height()).get(beta).unwrap_or(&0)
}

/// One layer of the root subalgebra at `alpha`: dimension and an
/// echelonized basis inside `g_{k alpha}`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub k: usize,
    pub dim: usize,
    pub basis: Vec<AlgebraElement>,
}

/// Iterated bracket layers `g_{alpha,k} = [g_alpha, g_{alpha,k-1}]` for
/// k = 1..=kmax, echelonized per layer.
pub fn root_subalgebra_layers(
    alg: &GradedAlgebra,
    alpha: &Root,
    kmax: usize,
) -> Result<Vec<Layer>> {
    if !alpha.is_positive() {
        return Err(KmError::NotRealRoot(alpha.clone()));
    }
    if alpha.height() * kmax as i64 > alg.cutoff() {
        return Err(KmError::CutoffExceeded(alpha.scaled(kmax as i64), alg.cutoff()));
    }
    let m = alg.mult(alpha);
    let g_alpha: Vec<AlgebraElement> = (0..m).map(|i| alg.pos_basis_element(alpha, i)).collect();
    let mut layers: Vec<Layer> = vec![Layer { k: 1, dim: m, basis: g_alpha.clone() }];
    let mut prev = g_alpha.clone();
    for k in 2..=kmax {
        let kalpha = alpha.scaled(k as i64);
        let mut span = RowSpace::new(alg.mult(&kalpha));
        for b in &g_alpha {
            for y in &prev {
                let z = alg.bracket(b, y)?;
                if z.is_zero() {
                    continue;
                }
                debug_assert!(z.terms.len() == 1 && z.terms.contains_key(&kalpha));
                span.insert(&z.terms[&kalpha]);
            }
        }
        let basis: Vec<AlgebraElement> = span
            .rows
            .iter()
            .map(|row| {
                let mut e = AlgebraElement::zero();
                e.add_component(kalpha.clone(), row.clone());
                e
            })
            .collect();
        prev = basis.clone();
        layers.push(Layer { k, dim: span.rank(), basis });
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a2(k: i64) -> GradedAlgebra {
        GradedAlgebra::build(vec![vec![2, -1], vec![-1, 2]], k).unwrap()
    }

    #[test]
    fn a2_dimensions() {
        let alg = a2(3);
        assert_eq!(alg.mult(&Root::new(vec![1, 1])), 1);
        assert_eq!(alg.mult(&Root::new(vec![2, 1])), 0);
        assert_eq!(alg.mult(&Root::simple(0, 2)), 1);
        assert_eq!(alg.dim(&Root::zero(2)), 2);
        assert_eq!(alg.positive_roots().len(), 3);
    }

    #[test]
    fn defining_relations() {
        let alg = a2(3);
        // [e1, f1] = alpha_1^vee and [e1, f2] = 0
        let b = alg.bracket(&alg.e(0).unwrap(), &alg.f(0).unwrap()).unwrap();
        assert_eq!(b, alg.coroot_element(0).unwrap());
        assert!(alg.bracket(&alg.e(0).unwrap(), &alg.f(1).unwrap()).unwrap().is_zero());
        // [h, e_i] = <alpha_i, h> e_i on every h basis vector
        for t in 0..alg.dim_h() {
            let h = alg.h_basis(t).unwrap();
            let hv = h.terms[&Root::zero(2)].clone();
            for i in 0..2 {
                let pairing = alg.weight_pairing(&Root::simple(i, 2), &hv);
                let lhs = alg.bracket(&h, &alg.e(i).unwrap()).unwrap();
                assert_eq!(lhs, alg.e(i).unwrap().scale(&pairing));
                let lhs_f = alg.bracket(&h, &alg.f(i).unwrap()).unwrap();
                assert_eq!(lhs_f, alg.f(i).unwrap().scale(&-pairing));
            }
        }
        // Serre: [e1,[e1,e2]] = 0
        let inner = alg.bracket(&alg.e(0).unwrap(), &alg.e(1).unwrap()).unwrap();
        assert!(alg.bracket(&alg.e(0).unwrap(), &inner).unwrap().is_zero());
        assert!(alg.serre_elements_vanish().unwrap());
    }

    #[test]
    fn affine_multiplicities() {
        let alg = GradedAlgebra::build(vec![vec![2, -2], vec![-2, 2]], 4).unwrap();
        assert_eq!(alg.mult(&Root::new(vec![1, 1])), 1);
        assert_eq!(alg.mult(&Root::new(vec![2, 2])), 1);
        assert_eq!(alg.mult(&Root::new(vec![2, 1])), 1);
        assert_eq!(alg.mult(&Root::new(vec![3, 1])), 0);
        assert!(alg.serre_elements_vanish().unwrap());
    }

    #[test]
    fn hyperbolic_small() {
        let alg = GradedAlgebra::build(vec![vec![2, -3], vec![-3, 2]], 5).unwrap();
        assert_eq!(alg.mult(&Root::new(vec![1, 1])), 1);
        assert_eq!(alg.mult(&Root::new(vec![2, 1])), 1);
        assert_eq!(alg.mult(&Root::new(vec![2, 2])), 1);
        // Serre kills (4,1): (ad e1)^4 e2 = 0
        assert_eq!(alg.mult(&Root::new(vec![4, 1])), 0);
        assert_eq!(alg.mult(&Root::new(vec![3, 2])), 2);
    }

    #[test]
    fn cutoff_is_explicit() {
        let alg = a2(2);
        let theta = alg.pos_basis_element(&Root::new(vec![1, 1]), 0);
        let e1 = alg.e(0).unwrap();
        assert!(matches!(alg.bracket(&e1, &theta), Err(KmError::CutoffExceeded(_, 2))));
    }

    #[test]
    fn peterson_oracle_values() {
        let (g, s) = validate_and_symmetrize(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![1, 1])), 1);
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![2, 0])), 0);
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![2, 1])), 0);
        let (g, s) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![3, 3])), 1);
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![2, 2])), 1);
        assert_eq!(peterson_mult(&g, &s, &Root::new(vec![0, 2])), 0);
    }

    #[test]
    fn peterson_matches_serre_quotient() {
        for m in [
            vec![vec![2, -1], vec![-1, 2]],
            vec![vec![2, -1], vec![-2, 2]],
            vec![vec![2, -2], vec![-2, 2]],
            vec![vec![2, -3], vec![-3, 2]],
        ] {
            let alg = GradedAlgebra::build(m.clone(), 5).unwrap();
            let table = peterson_table(alg.gcm(), alg.symmetrizer(), 5);
            for d in 1..=5i64 {
                for beta in multidegrees(2, d) {
                    let serre = alg.mult(&beta);
                    let oracle = *table.get(&beta).unwrap_or(&0) as usize;
                    assert_eq!(serre, oracle, "matrix {m:?}, beta {beta}");
                }
            }
        }
    }

    #[test]
    fn jacobi_on_random_triples() {
        let alg = GradedAlgebra::build(vec![vec![2, -2], vec![-2, 2]], 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut basis: Vec<AlgebraElement> = Vec::new();
        for r in alg.all_roots() {
            for i in 0..alg.dim(&r) {
                basis.push(alg.basis_element(&r, i));
            }
        }
        for t in 0..alg.dim_h() {
            basis.push(alg.h_basis(t).unwrap());
        }
        let mut done = 0;
        while done < 40 {
            let x = &basis[rng.gen_range(0..basis.len())];
            let y = &basis[rng.gen_range(0..basis.len())];
            let z = &basis[rng.gen_range(0..basis.len())];
            let attempt = (|| -> Result<AlgebraElement> {
                let a = alg.bracket(x, &alg.bracket(y, z)?)?;
                let b = alg.bracket(y, &alg.bracket(x, z)?)?;
                let c = alg.bracket(&alg.bracket(x, y)?, z)?;
                Ok(a.sub(&b).sub(&c))
            })();
            if let Ok(residue) = attempt {
                assert!(residue.is_zero(), "Jacobi fails");
                done += 1;
            }
        }
    }

    #[test]
    fn antisymmetry_and_bilinearity() {
        let alg = a2(3);
        let x = alg.e(0).unwrap().add(&alg.f(1).unwrap().scale(&rat_int(3)));
        let y = alg.e(1).unwrap().add(&alg.coroot_element(0).unwrap());
        let xy = alg.bracket(&x, &y).unwrap();
        let yx = alg.bracket(&y, &x).unwrap();
        assert_eq!(xy, yx.scale(&rat_int(-1)));
        assert_eq!(alg.bracket(&x.scale(&rat_int(2)), &y).unwrap(), xy.scale(&rat_int(2)));
    }

    #[test]
    fn weyl_invariance_of_mult() {
        let alg = GradedAlgebra::build(vec![vec![2, -3], vec![-3, 2]], 6).unwrap();
        let g = alg.gcm();
        for beta in [Root::new(vec![1, 1]), Root::new(vec![2, 1]), Root::new(vec![2, 2])] {
            for w in [vec![0usize], vec![1], vec![0, 1]] {
                let image = crate::weyl::act_on_root(g, &w, &beta).unwrap();
                let im_abs = if image.is_negative() { image.neg() } else { image };
                if im_abs.height() <= alg.cutoff() {
                    assert_eq!(alg.mult(&beta), alg.mult(&im_abs), "beta {beta} w {w:?}");
                }
            }
        }
    }

    #[test]
    fn layers_abelian_and_real() {
        let alg = a2(3);
        let layers = root_subalgebra_layers(&alg, &Root::simple(0, 2), 3).unwrap();
        assert_eq!(layers.iter().map(|l| l.dim).collect::<Vec<_>>(), vec![1, 0, 0]);

        let alg = GradedAlgebra::build(vec![vec![2, -2], vec![-2, 2]], 4).unwrap();
        let layers = root_subalgebra_layers(&alg, &Root::new(vec![1, 1]), 2).unwrap();
        assert_eq!(layers.iter().map(|l| l.dim).collect::<Vec<_>>(), vec![1, 0]);

        let alg = GradedAlgebra::build(vec![vec![2, -3], vec![-3, 2]], 4).unwrap();
        let layers = root_subalgebra_layers(&alg, &Root::new(vec![1, 1]), 2).unwrap();
        // mult 1: free on one generator, so layer 2 dies
        assert_eq!(layers.iter().map(|l| l.dim).collect::<Vec<_>>(), vec![1, 0]);
        assert!(matches!(
            root_subalgebra_layers(&alg, &Root::new(vec![1, 1]), 5),
            Err(KmError::CutoffExceeded(_, _))
        ));
    }

    #[test]
    fn element_json_shape() {
        let alg = a2(3);
        let x = alg.e(0).unwrap().add(&alg.e(1).unwrap().scale(&crate::ratio::rat(1, 2)));
        let j = x.to_json();
        assert_eq!(j["terms"][0]["root"], serde_json::json!([0, 1]));
        assert_eq!(j["terms"][0]["coeff"], "1/2");
    }
}
