//! Standard graded modules over a finite degree window: grading functions,
//! restricted weight lattices, the adjoint module, and highest-weight
//! (Verma) modules with PBW monomial bases.
//!
//! A module stores per-degree ordered bases and full action tables for
//! every algebra basis vector. Applying an operator that would push a
//! nonzero component out of the stored window is a hard error; silent
//! truncation of module vectors would corrupt operator-equality tests.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use crate::cartan::Realization;
use crate::error::{KmError, Result};
use crate::liealg::{AlgebraElement, GradedAlgebra};
use crate::qlinalg::{Mat, RowSpace};
use crate::ratio::{rat_int, rat_to_string, Rat};
use crate::weyl::Root;

/// The Z-grading: `f = a * f'` where f' extends the height function by
/// zero on the complement coordinates, and the scale a is the minimal
/// positive integer making f integral on the weight lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradingFunction {
    pub a: i64,
    /// Coordinates of f' as a linear functional on h*.
    covector: Vec<Rat>,
}

impl GradingFunction {
    /// Height grading on the root lattice alone (a = 1).
    pub fn height(real: &Realization) -> GradingFunction {
        let ones = vec![Rat::one(); real.simple_roots.rows];
        let v = real.simple_roots.solve(&ones).expect("simple roots are independent");
        GradingFunction { a: 1, covector: v }
    }

    pub fn eval_hstar(&self, x: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (a, b) in self.covector.iter().zip(x) {
            s += a * b;
        }
        s * rat_int(self.a)
    }

    /// On the root lattice the grading is `a * height`.
    pub fn degree_of_root(&self, beta: &Root) -> i64 {
        self.a * beta.height()
    }
}

/// A restricted weight lattice: rows are a Z-basis of P and a basis of h*,
/// the first l rows being fundamental weights.
#[derive(Debug, Clone)]
pub struct WeightLattice {
    pub omegas: Mat,
    rank: usize,
}

fn hnf_rows(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut col = 0;
    while col < cols && !rows.is_empty() {
        // gcd-reduce the column down to a single nonzero entry
        loop {
            let mut nz: Vec<usize> =
                (0..rows.len()).filter(|&r| !rows[r][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&r| rows[r][col].magnitude().clone());
            let pivot = nz[0];
            for &r in &nz[1..] {
                let q = &rows[r][col] / &rows[pivot][col];
                for c in 0..cols {
                    let sub = &rows[pivot][c] * &q;
                    rows[r][c] -= sub;
                }
            }
        }
        if let Some(p) = (0..rows.len()).find(|&r| !rows[r][col].is_zero()) {
            let mut row = rows.remove(p);
            if row[col].is_negative() {
                for x in row.iter_mut() {
                    *x = -x.clone();
                }
            }
            out.push(row);
        }
        col += 1;
    }
    out
}

impl WeightLattice {
    /// Canonical restricted weight lattice for a realization: fundamental
    /// weights solved with free coordinates zero, completed by a lattice
    /// basis of the coroot-orthogonal residues `alpha_j - sum_k a_kj omega_k`
    /// and, if needed, further coroot-orthogonal directions.
    pub fn canonical(
        gcm: &crate::cartan::CartanMatrix,
        real: &Realization,
    ) -> Result<WeightLattice> {
        let l = gcm.size();
        let n = real.n;
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        for i in 0..l {
            let mut rhs = vec![Rat::zero(); l];
            rhs[i] = Rat::one();
            rows.push(real.simple_coroots.solve(&rhs).expect("coroots independent"));
        }
        // residues of the simple roots off the fundamental-weight span
        let mut residues: Vec<Vec<Rat>> = Vec::new();
        for j in 0..l {
            let mut r = real.simple_roots.data[j].clone();
            for k in 0..l {
                let c = rat_int(gcm.entry(k, j));
                for t in 0..n {
                    let sub = &c * &rows[k][t];
                    r[t] -= sub;
                }
            }
            if r.iter().any(|x| !x.is_zero()) {
                residues.push(r);
            }
        }
        if !residues.is_empty() {
            let mut denom = BigInt::one();
            for r in &residues {
                for x in r {
                    denom = denom.lcm(x.denom());
                }
            }
            let int_rows: Vec<Vec<BigInt>> = residues
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|x| (x * Rat::from_integer(denom.clone())).numer().clone())
                        .collect()
                })
                .collect();
            for h in hnf_rows(int_rows, n) {
                rows.push(h.iter().map(|x| Rat::new(x.clone(), denom.clone())).collect());
            }
        }
        // complete with further coroot-orthogonal directions when the
        // residues do not already span the complement
        if rows.len() < n {
            let mut span = RowSpace::new(n);
            for r in &rows {
                span.insert(r);
            }
            for v in real.simple_coroots.kernel() {
                if rows.len() == n {
                    break;
                }
                if span.insert(&v) {
                    rows.push(v);
                }
            }
        }
        let lattice = WeightLattice { omegas: Mat::from_rows(rows), rank: l };
        lattice.validate(gcm, real)?;
        Ok(lattice)
    }

    /// Validate a basis as a restricted weight lattice.
    pub fn validate(
        &self,
        gcm: &crate::cartan::CartanMatrix,
        real: &Realization,
    ) -> Result<()> {
        let n = real.n;
        let l = self.rank.min(gcm.size());
        if self.omegas.rows != n || self.omegas.cols != n {
            return Err(KmError::NotRestrictedLattice(format!(
                "need {n} basis vectors of dimension {n}"
            )));
        }
        if self.omegas.rank() != n {
            return Err(KmError::NotRestrictedLattice("basis rows are dependent".into()));
        }
        // W4: the first l rows are fundamental weights
        for i in 0..l {
            for j in 0..l {
                let p = real.pair(&self.omegas.data[i], &real.simple_coroots.data[j]);
                let expect = if i == j { Rat::one() } else { Rat::zero() };
                if p != expect {
                    return Err(KmError::NotRestrictedLattice(format!(
                        "row {} does not pair delta with coroot {}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        // W2: integral pairings against all simple coroots
        for t in 0..n {
            for j in 0..l {
                let p = real.pair(&self.omegas.data[t], &real.simple_coroots.data[j]);
                if !p.denom().is_one() {
                    return Err(KmError::NotRestrictedLattice(format!(
                        "basis vector {} pairs non-integrally with coroot {}",
                        t + 1,
                        j + 1
                    )));
                }
            }
        }
        // W1: Q inside the Z-span
        let mt = self.omegas.transpose();
        for j in 0..l {
            let alpha = &real.simple_roots.data[j];
            let sol = mt.solve(alpha).ok_or_else(|| {
                KmError::NotRestrictedLattice(format!("alpha_{} outside the span", j + 1))
            })?;
            if sol.iter().any(|c| !c.denom().is_one()) {
                return Err(KmError::NotRestrictedLattice(format!(
                    "alpha_{} is not an integral combination",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Coordinates in h* of a lattice point given in the omega basis.
    pub fn weight_coords(&self, c: &[i64]) -> Vec<Rat> {
        let n = self.omegas.cols;
        let mut v = vec![Rat::zero(); n];
        for (t, &ct) in c.iter().enumerate() {
            if ct != 0 {
                for s in 0..n {
                    v[s] += rat_int(ct) * &self.omegas.data[t][s];
                }
            }
        }
        v
    }
}

/// Grading function for a restricted weight lattice: the minimal integer
/// scale `a` clears all denominators of f' on the lattice basis.
pub fn make_grading_function(
    real: &Realization,
    lattice: &WeightLattice,
) -> Result<GradingFunction> {
    let base = GradingFunction::height(real);
    let mut a = BigInt::one();
    for row in &lattice.omegas.data {
        let q = base.eval_hstar(row);
        a = a.lcm(q.denom());
    }
    let a: i64 = a.try_into().map_err(|_| KmError::Parse("grading scale overflow".into()))?;
    Ok(GradingFunction { a, covector: base.covector })
}

/// F3 on truncated root data: f positive on the positive roots, negative
/// on their negatives.
pub fn check_f3(gf: &GradingFunction, positive_roots: &[Root]) -> Result<()> {
    for r in positive_roots {
        if gf.degree_of_root(r) <= 0 {
            return Err(KmError::GradingAxiomFailed { axiom: "F3", witness: r.to_string() });
        }
        if gf.degree_of_root(&r.neg()) >= 0 {
            return Err(KmError::GradingAxiomFailed { axiom: "F3", witness: r.neg().to_string() });
        }
    }
    Ok(())
}

/// F4 on truncated weight data: weights of equal degree are pairwise
/// incomparable under dominance. Labels are weight differences in root
/// coordinates, so comparability would mean a difference in Q+ \ {0}.
pub fn check_f4(degree_labels: &[(i64, Root)]) -> Result<()> {
    for (da, la) in degree_labels {
        for (db, lb) in degree_labels {
            if da == db && la != lb {
                let diff = la.sub(lb);
                if diff.is_positive() {
                    return Err(KmError::GradingAxiomFailed {
                        axiom: "F4",
                        witness: format!("{la} vs {lb} at degree {da}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Basis vector provenance inside a module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisLabel {
    /// Adjoint module: a graded-algebra basis vector.
    Alg(Root, usize),
    /// Verma module: a PBW monomial, nondecreasing ids into the
    /// negative-basis list.
    Pbw(Vec<usize>),
}

#[derive(Debug, Clone)]
struct DegreeSpace {
    labels: Vec<BasisLabel>,
    /// Coordinates of each basis vector's weight in h*.
    mu_hstar: Vec<Vec<Rat>>,
    /// Weight relative to the module top, in root coordinates (the root
    /// itself for the adjoint module, -beta for a Verma monomial).
    weight_label: Vec<Root>,
}

/// How one action block leaves the stored window, per source column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColOob {
    Zero,
    Nonzero,
    /// Beyond the algebra cutoff: not even computable.
    Unknown,
}

#[derive(Debug, Clone)]
pub enum ActionBlock {
    /// Target degree inside the window: dense matrix.
    In(Mat),
    /// Target degree outside: per-column status only.
    Out { target: i64, cols: Vec<ColOob> },
}

/// A standard graded module over the stored window `[lo, hi]`, with full
/// action tables for every algebra basis vector.
#[derive(Debug, Clone)]
pub struct GradedModule {
    pub grading: GradingFunction,
    lo: i64,
    hi: i64,
    integrable: bool,
    adjoint: bool,
    rank: usize,
    coroot_rows: Mat,
    degrees: BTreeMap<i64, DegreeSpace>,
    action: BTreeMap<(Root, usize), BTreeMap<i64, ActionBlock>>,
}

/// Sparse module vector: coordinates per stored degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModuleVector {
    pub terms: BTreeMap<i64, Vec<Rat>>,
}

impl ModuleVector {
    pub fn zero() -> Self {
        ModuleVector::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_component(&mut self, deg: i64, coeffs: Vec<Rat>) {
        if coeffs.iter().all(|c| c.is_zero()) {
            return;
        }
        match self.terms.get_mut(&deg) {
            None => {
                self.terms.insert(deg, coeffs);
            }
            Some(v) => {
                for (a, b) in v.iter_mut().zip(&coeffs) {
                    *a += b;
                }
                if v.iter().all(|c| c.is_zero()) {
                    self.terms.remove(&deg);
                }
            }
        }
    }

    pub fn add(&self, other: &ModuleVector) -> ModuleVector {
        let mut out = self.clone();
        for (d, v) in &other.terms {
            out.add_component(*d, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &ModuleVector) -> ModuleVector {
        self.add(&other.scale(&rat_int(-1)))
    }

    pub fn scale(&self, c: &Rat) -> ModuleVector {
        if c.is_zero() {
            return ModuleVector::zero();
        }
        let mut out = ModuleVector::zero();
        for (d, v) in &self.terms {
            out.terms.insert(*d, v.iter().map(|x| x * c).collect());
        }
        out
    }

    /// Projection onto one degree.
    pub fn pi(&self, m: i64) -> ModuleVector {
        let mut out = ModuleVector::zero();
        if let Some(v) = self.terms.get(&m) {
            out.terms.insert(m, v.clone());
        }
        out
    }

    /// Order N(v): smallest degree with a nonzero component.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }
}

impl fmt::Display for ModuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, v) in &self.terms {
            for (i, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{}*v[{},{}]", rat_to_string(c), d, i)?;
            }
        }
        Ok(())
    }
}

impl GradedModule {
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn integrable(&self) -> bool {
        self.integrable
    }

    pub fn is_adjoint(&self) -> bool {
        self.adjoint
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim_at(&self, m: i64) -> usize {
        self.degrees.get(&m).map_or(0, |d| d.labels.len())
    }

    pub fn stored_degrees(&self) -> Vec<i64> {
        self.degrees.keys().copied().collect()
    }

    pub fn labels_at(&self, m: i64) -> &[BasisLabel] {
        &self.degrees[&m].labels
    }

    pub fn weight_labels_at(&self, m: i64) -> &[Root] {
        &self.degrees[&m].weight_label
    }

    /// `(degree, weight label)` pairs over the whole window, deduplicated,
    /// for the F4 incomparability check.
    pub fn degree_weight_labels(&self) -> Vec<(i64, Root)> {
        let mut out = Vec::new();
        for (d, sp) in &self.degrees {
            for w in &sp.weight_label {
                if !out.contains(&(*d, w.clone())) {
                    out.push((*d, w.clone()));
                }
            }
        }
        out
    }

    /// `<mu, h>` for the weight of basis vector `(m, col)` against an
    /// h-coordinate vector.
    pub fn weight_pairing(&self, m: i64, col: usize, h: &[Rat]) -> Rat {
        let mu = &self.degrees[&m].mu_hstar[col];
        let mut s = Rat::zero();
        for (a, b) in mu.iter().zip(h) {
            s += a * b;
        }
        s
    }

    /// `<mu, alpha_i^vee>`, integral for integral weights.
    pub fn coroot_pairing(&self, m: i64, col: usize, i: usize) -> Rat {
        self.weight_pairing(m, col, &self.coroot_rows.data[i])
    }

    pub fn action_block(&self, x: &(Root, usize), m: i64) -> Option<&ActionBlock> {
        self.action.get(x).and_then(|t| t.get(&m))
    }

    fn apply_basis(
        &self,
        x: &(Root, usize),
        m: i64,
        coeffs: &[Rat],
        c: &Rat,
    ) -> Result<ModuleVector> {
        let deg_x = self.grading.degree_of_root(&x.0);
        let target = m + deg_x;
        let Some(block) = self.action_block(x, m) else {
            return Ok(ModuleVector::zero());
        };
        match block {
            ActionBlock::In(mat) => {
                let mut v = vec![Rat::zero(); mat.rows];
                for (j, cj) in coeffs.iter().enumerate() {
                    if cj.is_zero() {
                        continue;
                    }
                    let f = cj * c;
                    for (i, row) in mat.data.iter().enumerate() {
                        if !row[j].is_zero() {
                            v[i] += &row[j] * &f;
                        }
                    }
                }
                let mut out = ModuleVector::zero();
                out.add_component(target, v);
                Ok(out)
            }
            ActionBlock::Out { target, cols } => {
                for (j, cj) in coeffs.iter().enumerate() {
                    if !cj.is_zero() && cols[j] != ColOob::Zero {
                        return Err(KmError::WindowExceeded(*target));
                    }
                }
                Ok(ModuleVector::zero())
            }
        }
    }

    /// `rho(x) v`, linear in both arguments. Errors with `WindowExceeded`
    /// if any nonzero result component leaves the stored window.
    pub fn apply(&self, x: &AlgebraElement, v: &ModuleVector) -> Result<ModuleVector> {
        let mut out = ModuleVector::zero();
        for (r, cv) in &x.terms {
            for (idx, c) in cv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let key = (r.clone(), idx);
                for (m, coeffs) in &v.terms {
                    out = out.add(&self.apply_basis(&key, *m, coeffs, c)?);
                }
            }
        }
        Ok(out)
    }

    /// Embed an algebra element into the adjoint module.
    pub fn element_to_vector(&self, x: &AlgebraElement) -> Result<ModuleVector> {
        assert!(self.adjoint, "only the adjoint module embeds algebra elements");
        let mut out = ModuleVector::zero();
        for (r, cv) in &x.terms {
            let m = self.grading.degree_of_root(r);
            let Some(sp) = self.degrees.get(&m) else {
                return Err(KmError::WindowExceeded(m));
            };
            let mut v = vec![Rat::zero(); sp.labels.len()];
            for (idx, c) in cv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let col = sp
                    .labels
                    .iter()
                    .position(|lbl| matches!(lbl, BasisLabel::Alg(rr, ii) if rr == r && *ii == idx))
                    .ok_or(KmError::WindowExceeded(m))?;
                v[col] = c.clone();
            }
            out.add_component(m, v);
        }
        Ok(out)
    }

    /// Read an adjoint module vector back as an algebra element.
    pub fn vector_to_element(&self, v: &ModuleVector) -> AlgebraElement {
        assert!(self.adjoint);
        let mut out = AlgebraElement::zero();
        for (m, coeffs) in &v.terms {
            let sp = &self.degrees[m];
            let mut per_root: BTreeMap<Root, Vec<(usize, Rat)>> = BTreeMap::new();
            for (col, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let BasisLabel::Alg(r, idx) = &sp.labels[col] else { unreachable!() };
                per_root.entry(r.clone()).or_default().push((*idx, c.clone()));
            }
            for (r, entries) in per_root {
                let dim = sp
                    .labels
                    .iter()
                    .filter(|lbl| matches!(lbl, BasisLabel::Alg(rr, _) if *rr == r))
                    .count();
                let mut cv = vec![Rat::zero(); dim];
                for (i, c) in entries {
                    cv[i] = c;
                }
                out.add_component(r, cv);
            }
        }
        out
    }

    pub fn vector_to_json(&self, v: &ModuleVector) -> serde_json::Value {
        let mut terms = Vec::new();
        for (m, coeffs) in &v.terms {
            let sp = &self.degrees[m];
            let mut by_weight: BTreeMap<Root, Vec<String>> = BTreeMap::new();
            for (col, c) in coeffs.iter().enumerate() {
                if !c.is_zero() {
                    by_weight
                        .entry(sp.weight_label[col].clone())
                        .or_default()
                        .push(rat_to_string(c));
                }
            }
            for (w, cols) in by_weight {
                terms.push(serde_json::json!({
                    "deg": m,
                    "weight": w.coeffs(),
                    "coords": cols,
                }));
            }
        }
        serde_json::json!({ "window": [self.lo, self.hi], "terms": terms })
    }
}

/// Assemble action tables from an exact single-vector application routine.
/// `apply_exact` returns None when the image is not computable (beyond the
/// algebra cutoff), which is only tolerated outside the stored window.
fn build_action_tables(
    alg: &GradedAlgebra,
    gf: &GradingFunction,
    lo: i64,
    hi: i64,
    degrees: &BTreeMap<i64, DegreeSpace>,
    mut apply_exact: impl FnMut(&(Root, usize), i64, usize) -> Result<Option<Vec<(i64, usize, Rat)>>>,
) -> Result<BTreeMap<(Root, usize), BTreeMap<i64, ActionBlock>>> {
    let mut gens: Vec<(Root, usize)> = Vec::new();
    for r in alg.all_roots() {
        for idx in 0..alg.dim(&r) {
            gens.push((r.clone(), idx));
        }
    }
    for t in 0..alg.dim_h() {
        gens.push((Root::zero(alg.rank()), t));
    }
    let mut action: BTreeMap<(Root, usize), BTreeMap<i64, ActionBlock>> = BTreeMap::new();
    for x in gens {
        let deg_x = gf.degree_of_root(&x.0);
        let mut blocks: BTreeMap<i64, ActionBlock> = BTreeMap::new();
        for (&m, sp) in degrees {
            let target = m + deg_x;
            let src_dim = sp.labels.len();
            if target >= lo && target <= hi {
                let dst_dim = degrees.get(&target).map_or(0, |d| d.labels.len());
                let mut mat = Mat::zero(dst_dim, src_dim);
                for col in 0..src_dim {
                    let img = apply_exact(&x, m, col)?.ok_or(KmError::WindowExceeded(target))?;
                    for (d, row, c) in img {
                        if c.is_zero() {
                            continue;
                        }
                        debug_assert_eq!(d, target);
                        mat.data[row][col] = c;
                    }
                }
                if !mat.is_zero() {
                    blocks.insert(m, ActionBlock::In(mat));
                }
            } else {
                let mut cols = vec![ColOob::Zero; src_dim];
                let mut any = false;
                for (col, slot) in cols.iter_mut().enumerate() {
                    *slot = match apply_exact(&x, m, col)? {
                        None => ColOob::Unknown,
                        Some(img) => {
                            if img.iter().any(|(_, _, c)| !c.is_zero()) {
                                ColOob::Nonzero
                            } else {
                                ColOob::Zero
                            }
                        }
                    };
                    any |= *slot != ColOob::Zero;
                }
                if any {
                    blocks.insert(m, ActionBlock::Out { target, cols });
                }
            }
        }
        if !blocks.is_empty() {
            action.insert(x, blocks);
        }
    }
    Ok(action)
}

/// The adjoint module over a degree window: `V_m = g_m`, action by
/// bracket, weights the roots themselves.
pub fn adjoint_module(alg: &GradedAlgebra, lo: i64, hi: i64) -> Result<GradedModule> {
    if lo > hi || lo < -alg.cutoff() || hi > alg.cutoff() {
        return Err(KmError::WindowExceeded(if lo < -alg.cutoff() { lo } else { hi }));
    }
    let gf = GradingFunction::height(alg.realization());
    let mut degrees: BTreeMap<i64, DegreeSpace> = BTreeMap::new();
    for m in lo..=hi {
        let mut labels = Vec::new();
        let mut mu = Vec::new();
        let mut wl = Vec::new();
        let roots: Vec<Root> = if m == 0 {
            vec![Root::zero(alg.rank())]
        } else {
            alg.all_roots().into_iter().filter(|r| r.height() == m).collect()
        };
        for r in roots {
            for idx in 0..alg.dim(&r) {
                labels.push(BasisLabel::Alg(r.clone(), idx));
                mu.push(alg.realization().root_coords(&r));
                wl.push(r.clone());
            }
        }
        if !labels.is_empty() {
            degrees.insert(m, DegreeSpace { labels, mu_hstar: mu, weight_label: wl });
        }
    }

    let degrees_ref = degrees.clone();
    let action = build_action_tables(alg, &gf, lo, hi, &degrees, |x, m, col| {
        let sp = &degrees_ref[&m];
        let BasisLabel::Alg(r, idx) = &sp.labels[col] else { unreachable!() };
        let xe = alg.basis_element(&x.0, x.1);
        let ye = alg.basis_element(r, *idx);
        match alg.bracket(&xe, &ye) {
            Err(KmError::CutoffExceeded(_, _)) => Ok(None),
            Err(e) => Err(e),
            Ok(z) => {
                let mut img = Vec::new();
                for (rr, cv) in &z.terms {
                    let d = rr.height();
                    for (ii, c) in cv.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let row = degrees_ref.get(&d).and_then(|dsp| {
                            dsp.labels.iter().position(
                                |lbl| matches!(lbl, BasisLabel::Alg(r2, i2) if r2 == rr && *i2 == ii),
                            )
                        });
                        img.push((d, row.unwrap_or(0), c.clone()));
                    }
                }
                Ok(Some(img))
            }
        }
    })?;

    Ok(GradedModule {
        grading: gf,
        lo,
        hi,
        integrable: true,
        adjoint: true,
        rank: alg.rank(),
        coroot_rows: alg.realization().simple_coroots.clone(),
        degrees,
        action,
    })
}

/// PBW straightening engine over the negative basis of a graded algebra.
struct Straightener<'a> {
    alg: &'a GradedAlgebra,
    /// Negative basis vectors in the fixed order (degree, root, index).
    neg_basis: Vec<(Root, usize)>,
    id_of: HashMap<(Root, usize), usize>,
    lambda_hstar: Vec<Rat>,
    memo: HashMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>>,
}

impl<'a> Straightener<'a> {
    fn new(alg: &'a GradedAlgebra, lambda_hstar: Vec<Rat>, depth: i64) -> Self {
        let mut neg_basis: Vec<(Root, usize)> = Vec::new();
        for r in alg.positive_roots() {
            if r.height() <= depth {
                for idx in 0..alg.dim(&r) {
                    neg_basis.push((r.clone(), idx));
                }
            }
        }
        neg_basis.sort_by_key(|(r, idx)| (r.height(), r.clone(), *idx));
        let id_of = neg_basis.iter().cloned().enumerate().map(|(k, v)| (v, k)).collect();
        Straightener { alg, neg_basis, id_of, lambda_hstar, memo: HashMap::new() }
    }

    fn content(&self, m: &[usize]) -> Root {
        let l = self.alg.rank();
        let mut c = Root::zero(l);
        for &id in m {
            c = c.add(&self.neg_basis[id].0);
        }
        c
    }

    fn weight_hstar(&self, m: &[usize]) -> Vec<Rat> {
        let beta = self.content(m);
        let bc = self.alg.realization().root_coords(&beta);
        self.lambda_hstar.iter().zip(&bc).map(|(a, b)| a - b).collect()
    }

    /// Normal form of an arbitrary word of negative basis ids. Each swap
    /// removes an inversion; each bracket term shortens the word.
    fn normal_form(&mut self, word: Vec<usize>) -> Result<BTreeMap<Vec<usize>, Rat>> {
        if let Some(hit) = self.memo.get(&word) {
            return Ok(hit.clone());
        }
        let Some(k) = (0..word.len().saturating_sub(1)).find(|&k| word[k] > word[k + 1]) else {
            let mut out = BTreeMap::new();
            out.insert(word.clone(), Rat::one());
            self.memo.insert(word, out.clone());
            return Ok(out);
        };
        let mut swapped = word.clone();
        swapped.swap(k, k + 1);
        let mut out = self.normal_form(swapped)?;
        let (a, b) = (self.neg_basis[word[k]].clone(), self.neg_basis[word[k + 1]].clone());
        let ya = self.alg.neg_basis_element(&a.0, a.1);
        let yb = self.alg.neg_basis_element(&b.0, b.1);
        let br = self.alg.bracket(&ya, &yb)?;
        for (r, cv) in &br.terms {
            let rp = r.neg();
            for (idx, c) in cv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let id = self.id_of[&(rp.clone(), idx)];
                let mut shorter = word[..k].to_vec();
                shorter.push(id);
                shorter.extend_from_slice(&word[k + 2..]);
                for (mono, coeff) in self.normal_form(shorter)? {
                    *out.entry(mono).or_insert_with(Rat::zero) += coeff * c;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        self.memo.insert(word, out.clone());
        Ok(out)
    }

    /// Action of an algebra element on a PBW monomial.
    fn act(&mut self, x: &AlgebraElement, m: &[usize]) -> Result<BTreeMap<Vec<usize>, Rat>> {
        let mut out: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
        for (r, cv) in &x.terms {
            for (idx, c) in cv.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (mono, coeff) in self.act_single(r, idx, m)? {
                    *out.entry(mono).or_insert_with(Rat::zero) += coeff * c;
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    fn act_single(
        &mut self,
        r: &Root,
        idx: usize,
        m: &[usize],
    ) -> Result<BTreeMap<Vec<usize>, Rat>> {
        if r.is_zero() {
            // h action: scalar by the weight
            let mu = self.weight_hstar(m);
            let s = mu[idx].clone();
            let mut out = BTreeMap::new();
            if !s.is_zero() {
                out.insert(m.to_vec(), s);
            }
            return Ok(out);
        }
        if r.is_negative() {
            let id = self.id_of[&(r.neg(), idx)];
            let mut word = vec![id];
            word.extend_from_slice(m);
            return self.normal_form(word);
        }
        // positive: commute past the head; n+ kills the highest weight line
        if m.is_empty() {
            return Ok(BTreeMap::new());
        }
        let head = m[0];
        let rest = m[1..].to_vec();
        let x = self.alg.pos_basis_element(r, idx);
        let yh = {
            let (hr, hidx) = self.neg_basis[head].clone();
            self.alg.neg_basis_element(&hr, hidx)
        };
        // x (y_h w) = y_h (x w) + [x, y_h] w
        let mut out: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
        for (mono, c) in self.act_single(r, idx, &rest)? {
            let mut word = vec![head];
            word.extend_from_slice(&mono);
            for (m2, c2) in self.normal_form(word)? {
                *out.entry(m2).or_insert_with(Rat::zero) += c2 * &c;
            }
        }
        let br = self.alg.bracket(&x, &yh)?;
        for (mono, c) in self.act(&br, &rest)? {
            *out.entry(mono).or_insert_with(Rat::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }
}

/// Number of ways to write beta as a sum of positive roots counted with
/// multiplicity (each basis direction is its own color). Independent
/// dynamic-programming oracle for Verma weight-space dimensions.
pub fn kostant_partition_count(pos_roots: &[(Root, usize)], beta: &Root) -> u64 {
    let l = beta.rank();
    let sizes: Vec<usize> = (0..l).map(|i| (beta.coeff(i) + 1) as usize).collect();
    let total: usize = sizes.iter().product();
    let index = |r: &[i64]| -> usize {
        let mut k = 0;
        for i in 0..l {
            k = k * sizes[i] + r[i] as usize;
        }
        k
    };
    let mut ways = vec![0u64; total];
    ways[0] = 1;
    for (root, mult) in pos_roots {
        if (0..l).any(|i| root.coeff(i) > beta.coeff(i)) {
            continue;
        }
        for _ in 0..*mult {
            // unbounded knapsack per color, box traversal in index order
            let mut cur = vec![0i64; l];
            loop {
                if (0..l).all(|i| cur[i] >= root.coeff(i)) {
                    let prev: Vec<i64> = (0..l).map(|i| cur[i] - root.coeff(i)).collect();
                    ways[index(&cur)] += ways[index(&prev)];
                }
                let mut i = 0;
                loop {
                    if i == l {
                        break;
                    }
                    if cur[i] < beta.coeff(i) {
                        cur[i] += 1;
                        break;
                    }
                    cur[i] = 0;
                    i += 1;
                }
                if i == l {
                    break;
                }
            }
        }
    }
    ways[total - 1]
}

/// The Verma module `M(lambda)` truncated to weights `lambda - beta` with
/// `height(beta) <= depth`. Basis: PBW monomials over the negative root
/// basis in the fixed order (degree, root, index); dimensions equal the
/// Kostant partition counts by PBW freeness.
pub fn verma_module(
    alg: &GradedAlgebra,
    lattice: &WeightLattice,
    lambda_omega: &[i64],
    depth: i64,
) -> Result<GradedModule> {
    if depth > alg.cutoff() {
        return Err(KmError::DepthExceedsCutoff(depth, alg.cutoff()));
    }
    let real = alg.realization();
    let gf = make_grading_function(real, lattice)?;
    let mut lam = lambda_omega.to_vec();
    lam.resize(real.n, 0);
    let lambda_hstar = lattice.weight_coords(&lam);
    let f_lambda_rat = gf.eval_hstar(&lambda_hstar);
    if !f_lambda_rat.denom().is_one() {
        return Err(KmError::NotRestrictedLattice(
            "grading is not integral on the chosen highest weight".into(),
        ));
    }
    let f_lambda: i64 = f_lambda_rat.numer().try_into().unwrap();

    let mut st = Straightener::new(alg, lambda_hstar.clone(), depth);

    fn gen_monomials(
        st: &Straightener,
        start: usize,
        remaining: i64,
        cur: &mut Vec<usize>,
        out: &mut BTreeMap<Root, Vec<Vec<usize>>>,
    ) {
        out.entry(st.content(cur)).or_default().push(cur.clone());
        for id in start..st.neg_basis.len() {
            let h = st.neg_basis[id].0.height();
            if h <= remaining {
                cur.push(id);
                gen_monomials(st, id, remaining - h, cur, out);
                cur.pop();
            }
        }
    }
    let mut by_content: BTreeMap<Root, Vec<Vec<usize>>> = BTreeMap::new();
    gen_monomials(&st, 0, depth, &mut Vec::new(), &mut by_content);

    let mut degrees: BTreeMap<i64, DegreeSpace> = BTreeMap::new();
    for (beta, monos) in &by_content {
        let m = f_lambda - gf.degree_of_root(beta);
        let entry = degrees.entry(m).or_insert_with(|| DegreeSpace {
            labels: Vec::new(),
            mu_hstar: Vec::new(),
            weight_label: Vec::new(),
        });
        let mut monos = monos.clone();
        monos.sort();
        for mono in monos {
            entry.mu_hstar.push(st.weight_hstar(&mono));
            entry.labels.push(BasisLabel::Pbw(mono));
            entry.weight_label.push(beta.neg());
        }
    }
    let lo = f_lambda - gf.a * depth;
    let hi = f_lambda;

    let mut mono_pos: HashMap<Vec<usize>, (i64, usize)> = HashMap::new();
    for (d, sp) in &degrees {
        for (col, lbl) in sp.labels.iter().enumerate() {
            let BasisLabel::Pbw(m) = lbl else { unreachable!() };
            mono_pos.insert(m.clone(), (*d, col));
        }
    }

    let degrees_ref = degrees.clone();
    let action = build_action_tables(alg, &gf, lo, hi, &degrees, |x, m, col| {
        let sp = &degrees_ref[&m];
        let BasisLabel::Pbw(mono) = &sp.labels[col] else { unreachable!() };
        if x.0.is_negative() {
            // image content beyond the stored depth is nonzero by PBW
            // freeness; report it without straightening
            let target_content = st.content(mono).add(&x.0.neg());
            if target_content.height() > depth {
                return Ok(Some(vec![(m + gf.degree_of_root(&x.0), 0, Rat::one())]));
            }
        }
        let xe = alg.basis_element(&x.0, x.1);
        let img = st.act(&xe, mono)?;
        let mut out = Vec::new();
        for (mono2, c) in img {
            let (d, row) = mono_pos[&mono2];
            out.push((d, row, c));
        }
        Ok(Some(out))
    })?;

    Ok(GradedModule {
        grading: gf,
        lo,
        hi,
        integrable: false,
        adjoint: false,
        rank: alg.rank(),
        coroot_rows: real.simple_coroots.clone(),
        degrees,
        action,
    })
}
