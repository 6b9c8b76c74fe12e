//! Generalized Cartan matrices: validation, symmetrizers, type
//! classification, realizations, and the bilinear form on the root lattice.

use num::{BigInt, Integer, One, Signed, Zero};

use crate::error::{KmError, Result};
use crate::qlinalg::Mat;
use crate::ratio::{rat_int, Rat};
use crate::weyl::Root;

/// A validated generalized Cartan matrix: 2 on the diagonal, nonpositive
/// integers off it, and a symmetric zero pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanMatrix {
    entries: Vec<Vec<i64>>,
}

/// Positive integers `d_i`, minimal with gcd 1 per indecomposable
/// component, such that `diag(d) * A` is symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symmetrizer {
    pub d: Vec<i64>,
}

/// Matrix type in the finite / affine / indefinite trichotomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeClass {
    Finite,
    Affine,
    Indefinite { hyperbolic: bool },
}

impl TypeClass {
    pub fn name(&self) -> &'static str {
        match self {
            TypeClass::Finite => "finite",
            TypeClass::Affine => "affine",
            TypeClass::Indefinite { .. } => "indefinite",
        }
    }
}

impl CartanMatrix {
    /// Validate axioms C1-C3 on a square integer matrix.
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self> {
        let l = entries.len();
        if l == 0 {
            return Err(KmError::Parse("empty matrix".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != l {
                return Err(KmError::Parse("matrix is not square".into()));
            }
            for (j, &a) in row.iter().enumerate() {
                if i == j && a != 2 {
                    return Err(KmError::NotAGcm { axiom: "C1", row: i + 1, col: j + 1 });
                }
                if i != j && a > 0 {
                    return Err(KmError::NotAGcm { axiom: "C2", row: i + 1, col: j + 1 });
                }
            }
        }
        for i in 0..l {
            for j in 0..l {
                if (entries[i][j] == 0) != (entries[j][i] == 0) {
                    // report the vanishing entry whose mirror is nonzero
                    let (r, c) = if entries[i][j] == 0 { (i, j) } else { (j, i) };
                    return Err(KmError::NotAGcm { axiom: "C3", row: r + 1, col: c + 1 });
                }
            }
        }
        Ok(CartanMatrix { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// Pairing of a root-lattice vector against the i-th simple coroot:
    /// `<x, alpha_i^vee> = sum_j x_j a_ij`.
    pub fn pair_coroot(&self, x: &Root, i: usize) -> i64 {
        (0..self.size()).map(|j| x.coeff(j) * self.entries[i][j]).sum()
    }

    /// Connected components of the Dynkin diagram, as index sets.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let l = self.size();
        let mut seen = vec![false; l];
        let mut comps = Vec::new();
        for start in 0..l {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(i) = stack.pop() {
                for j in 0..l {
                    if !seen[j] && self.entries[i][j] != 0 {
                        seen[j] = true;
                        comp.push(j);
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// Principal submatrix on the given (sorted) index set, revalidated.
    pub fn submatrix(&self, idx: &[usize]) -> CartanMatrix {
        let entries = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.entries[i][j]).collect())
            .collect();
        CartanMatrix { entries }
    }
}

/// Validate a GCM and compute its minimal positive-integer symmetrizer.
pub fn validate_and_symmetrize(entries: Vec<Vec<i64>>) -> Result<(CartanMatrix, Symmetrizer)> {
    let gcm = CartanMatrix::new(entries)?;
    let l = gcm.size();

    // Propagate the ratios d_i a_ij = d_j a_ji over each component and
    // check consistency around cycles.
    let mut d: Vec<Option<Rat>> = vec![None; l];
    for comp in gcm.components() {
        d[comp[0]] = Some(Rat::one());
        let mut stack = vec![comp[0]];
        while let Some(i) = stack.pop() {
            let di = d[i].clone().unwrap();
            for j in 0..l {
                if gcm.entry(i, j) == 0 || i == j {
                    continue;
                }
                // d_j = d_i a_ij / a_ji (both entries negative, ratio positive)
                let dj = &di * rat_int(gcm.entry(i, j)) / rat_int(gcm.entry(j, i));
                match &d[j] {
                    None => {
                        d[j] = Some(dj);
                        stack.push(j);
                    }
                    Some(prev) => {
                        if *prev != dj {
                            return Err(KmError::NotSymmetrizable);
                        }
                    }
                }
            }
        }
        // scale to minimal positive integers with gcd 1 on this component
        let mut lcm_den = BigInt::one();
        for &i in &comp {
            lcm_den = lcm_den.lcm(d[i].as_ref().unwrap().denom());
        }
        let mut gcd_num = BigInt::zero();
        let scaled: Vec<BigInt> = comp
            .iter()
            .map(|&i| {
                let r = d[i].as_ref().unwrap() * Rat::from_integer(lcm_den.clone());
                debug_assert!(r.denom().is_one());
                r.numer().clone()
            })
            .collect();
        for v in &scaled {
            gcd_num = gcd_num.gcd(v);
        }
        for (&i, v) in comp.iter().zip(&scaled) {
            d[i] = Some(Rat::from_integer(v / &gcd_num));
        }
    }

    let mut dv = Vec::with_capacity(l);
    for x in d {
        let x = x.unwrap();
        debug_assert!(x.denom().is_one() && x.numer().is_positive());
        let n: i64 = x.numer().try_into().map_err(|_| KmError::NotSymmetrizable)?;
        dv.push(n);
    }
    // final exactness check
    for i in 0..l {
        for j in 0..l {
            if dv[i] * gcm.entry(i, j) != dv[j] * gcm.entry(j, i) {
                return Err(KmError::NotSymmetrizable);
            }
        }
    }
    Ok((gcm, Symmetrizer { d: dv }))
}

/// The symmetrized matrix `diag(d) * A`.
pub fn symmetrized(gcm: &CartanMatrix, sym: &Symmetrizer) -> Mat {
    let l = gcm.size();
    let mut m = Mat::zero(l, l);
    for i in 0..l {
        for j in 0..l {
            m.data[i][j] = rat_int(sym.d[i] * gcm.entry(i, j));
        }
    }
    m
}

fn definiteness(s: &Mat) -> (bool, bool) {
    // Positive definite iff all leading principal minors are positive;
    // positive semidefinite iff every coefficient sum e_j of principal
    // minors is >= 0 (e_j are the elementary symmetric functions of the
    // eigenvalues, read off the characteristic polynomial).
    let n = s.rows;
    let mut pd = true;
    for k in 1..=n {
        let idx: Vec<usize> = (0..k).collect();
        let sub = Mat::from_rows(
            idx.iter().map(|&i| idx.iter().map(|&j| s.data[i][j].clone()).collect()).collect(),
        );
        if !sub.det().is_positive() {
            pd = false;
            break;
        }
    }
    let coeffs = s.char_poly();
    // det(xI - S) = sum_k (-1)^{n-k} e_{n-k} x^k, so e_j = (-1)^j c_{n-j}
    let n_i = coeffs.len() - 1;
    let psd = (0..=n_i).all(|j| {
        let e = if j % 2 == 0 { coeffs[n_i - j].clone() } else { -coeffs[n_i - j].clone() };
        !e.is_negative()
    });
    (pd, psd)
}

fn classify_basic(gcm: &CartanMatrix) -> Result<TypeClass> {
    let (_, sym) = validate_and_symmetrize(gcm.entries().to_vec())?;
    let s = symmetrized(gcm, &sym);
    let (pd, psd) = definiteness(&s);
    if pd {
        Ok(TypeClass::Finite)
    } else if psd {
        Ok(TypeClass::Affine)
    } else {
        Ok(TypeClass::Indefinite { hyperbolic: false })
    }
}

/// Classify finite / affine / indefinite over exact rationals, with the
/// hyperbolic flag when every proper indecomposable principal submatrix
/// is of finite or affine type.
pub fn classify(gcm: &CartanMatrix) -> Result<TypeClass> {
    let base = classify_basic(gcm)?;
    let TypeClass::Indefinite { .. } = base else {
        return Ok(base);
    };
    let l = gcm.size();
    let mut hyperbolic = true;
    'subsets: for mask in 1..(1u32 << l) - 1 {
        let idx: Vec<usize> = (0..l).filter(|&i| mask & (1 << i) != 0).collect();
        let sub = gcm.submatrix(&idx);
        for comp in sub.components() {
            match classify_basic(&sub.submatrix(&comp))? {
                TypeClass::Finite | TypeClass::Affine => {}
                TypeClass::Indefinite { .. } => {
                    hyperbolic = false;
                    break 'subsets;
                }
            }
        }
    }
    Ok(TypeClass::Indefinite { hyperbolic })
}

/// A realization of A: an n-dimensional rational Cartan space with
/// embedded simple roots and coroots reproducing A under the pairing.
///
/// This is the standard block construction: `n = 2l - rank(A)`, the simple
/// roots are the first l coordinate vectors of the dual basis, and the
/// coroot rows are `[A | B]` where the extra columns of B pin down the
/// left-kernel directions of A. Any valid realization would do; this one
/// is fixed so bases are stable across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub n: usize,
    /// l x n, row i = coordinates of alpha_i in the fixed basis of h*.
    pub simple_roots: Mat,
    /// l x n, row i = coordinates of alpha_i^vee in the dual basis of h.
    pub simple_coroots: Mat,
}

pub fn realization(gcm: &CartanMatrix) -> Realization {
    let l = gcm.size();
    let a = Mat::from_i64(gcm.entries());
    let rank = a.rank();
    let n = 2 * l - rank;

    let mut simple_roots = Mat::zero(l, n);
    for i in 0..l {
        simple_roots.data[i][i] = Rat::one();
    }

    // Columns of B are indicator vectors for the pivot coordinates of the
    // left kernel of A, which makes the rows of [A | B] independent.
    let left_kernel = a.transpose().kernel();
    let mut kmat = Mat::from_rows(left_kernel);
    let kernel_pivots = if kmat.rows > 0 { kmat.rref() } else { Vec::new() };
    debug_assert_eq!(kernel_pivots.len(), l - rank);

    let mut simple_coroots = Mat::zero(l, n);
    for i in 0..l {
        for j in 0..l {
            simple_coroots.data[i][j] = rat_int(gcm.entry(i, j));
        }
        for (t, &p) in kernel_pivots.iter().enumerate() {
            if p == i {
                simple_coroots.data[i][l + t] = Rat::one();
            }
        }
    }

    let r = Realization { n, simple_roots, simple_coroots };
    debug_assert!(r.check(gcm));
    r
}

impl Realization {
    /// R1-R3: dimension count, independence, and pairing matrix equal to A.
    pub fn check(&self, gcm: &CartanMatrix) -> bool {
        let l = gcm.size();
        if self.simple_roots.rank() != l || self.simple_coroots.rank() != l {
            return false;
        }
        let pairing = self.simple_coroots.mul(&self.simple_roots.transpose());
        for i in 0..l {
            for j in 0..l {
                // <alpha_j, alpha_i^vee> = a_ij sits at (row i, col j)
                if pairing.data[i][j] != rat_int(gcm.entry(i, j)) {
                    return false;
                }
            }
        }
        true
    }

    /// Coordinates in h* of a root-lattice vector.
    pub fn root_coords(&self, x: &Root) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.n];
        for (i, &k) in x.coeffs().iter().enumerate() {
            if k != 0 {
                for t in 0..self.n {
                    v[t] += rat_int(k) * &self.simple_roots.data[i][t];
                }
            }
        }
        v
    }

    /// `<x, h>` for x in h*-coordinates and h in h-coordinates.
    pub fn pair(&self, x: &[Rat], h: &[Rat]) -> Rat {
        let mut s = Rat::zero();
        for (a, b) in x.iter().zip(h) {
            s += a * b;
        }
        s
    }
}

/// Coxeter matrix attached to A; 0 encodes an infinite order.
pub fn coxeter_matrix(gcm: &CartanMatrix) -> Vec<Vec<i64>> {
    let l = gcm.size();
    let mut c = vec![vec![0i64; l]; l];
    for i in 0..l {
        for j in 0..l {
            c[i][j] = if i == j {
                1
            } else {
                match gcm.entry(i, j) * gcm.entry(j, i) {
                    0 => 2,
                    1 => 3,
                    2 => 4,
                    3 => 6,
                    _ => 0,
                }
            };
        }
    }
    c
}

/// The symmetric bilinear form on the root lattice, `(alpha_i, alpha_j) = d_i a_ij`.
#[derive(Debug, Clone)]
pub struct BilinearForm {
    gram: Mat,
}

impl BilinearForm {
    pub fn new(gcm: &CartanMatrix, sym: &Symmetrizer) -> Self {
        BilinearForm { gram: symmetrized(gcm, sym) }
    }

    pub fn eval(&self, x: &Root, y: &Root) -> Rat {
        let mut s = Rat::zero();
        for (i, &xi) in x.coeffs().iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.coeffs().iter().enumerate() {
                if yj != 0 {
                    s += rat_int(xi * yj) * &self.gram.data[i][j];
                }
            }
        }
        s
    }

    pub fn norm(&self, x: &Root) -> Rat {
        self.eval(x, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::Root;

    fn a2() -> Vec<Vec<i64>> {
        vec![vec![2, -1], vec![-1, 2]]
    }

    #[test]
    fn symmetrizer_examples() {
        let (_, s) = validate_and_symmetrize(a2()).unwrap();
        assert_eq!(s.d, vec![1, 1]);
        // solve d_1*(-1) = d_2*(-2), normalized to minimal integers
        let (_, s) = validate_and_symmetrize(vec![vec![2, -1], vec![-2, 2]]).unwrap();
        assert_eq!(s.d, vec![2, 1]);
        // decomposable: per-component normalization
        let (_, s) = validate_and_symmetrize(vec![
            vec![2, -1, 0],
            vec![-2, 2, 0],
            vec![0, 0, 2],
        ])
        .unwrap();
        assert_eq!(s.d, vec![2, 1, 1]);
    }

    #[test]
    fn gcm_axiom_failures() {
        assert_eq!(
            CartanMatrix::new(vec![vec![2, -1], vec![0, 2]]).unwrap_err(),
            KmError::NotAGcm { axiom: "C3", row: 2, col: 1 }
        );
        assert_eq!(
            CartanMatrix::new(vec![vec![1, -1], vec![-1, 2]]).unwrap_err(),
            KmError::NotAGcm { axiom: "C1", row: 1, col: 1 }
        );
        assert_eq!(
            CartanMatrix::new(vec![vec![2, 1], vec![1, 2]]).unwrap_err(),
            KmError::NotAGcm { axiom: "C2", row: 1, col: 2 }
        );
    }

    #[test]
    fn non_symmetrizable_rejected() {
        // classic non-symmetrizable 3x3 pattern: cycle products disagree
        let m = vec![vec![2, -1, -2], vec![-2, 2, -1], vec![-1, -2, 2]];
        assert_eq!(validate_and_symmetrize(m).unwrap_err(), KmError::NotSymmetrizable);
    }

    #[test]
    fn classification() {
        let (g, _) = validate_and_symmetrize(a2()).unwrap();
        assert_eq!(classify(&g).unwrap(), TypeClass::Finite);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert_eq!(classify(&g).unwrap(), TypeClass::Affine);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -3], vec![-3, 2]]).unwrap();
        assert_eq!(classify(&g).unwrap(), TypeClass::Indefinite { hyperbolic: true });
        // finite-type library: A1, B2, G2
        for m in [
            vec![vec![2]],
            vec![vec![2, -2], vec![-1, 2]],
            vec![vec![2, -3], vec![-1, 2]],
        ] {
            let (g, _) = validate_and_symmetrize(m).unwrap();
            assert_eq!(classify(&g).unwrap(), TypeClass::Finite);
        }
        // all untwisted rank-2 affine matrices
        for m in [vec![vec![2, -2], vec![-2, 2]], vec![vec![2, -4], vec![-1, 2]], vec![vec![2, -1], vec![-4, 2]]] {
            let (g, _) = validate_and_symmetrize(m).unwrap();
            assert_eq!(classify(&g).unwrap(), TypeClass::Affine);
        }
    }

    #[test]
    fn realization_dimensions_and_pairing() {
        let (g, _) = validate_and_symmetrize(a2()).unwrap();
        assert_eq!(realization(&g).n, 2);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        let r = realization(&g);
        assert_eq!(r.n, 3);
        assert!(r.check(&g));
    }

    #[test]
    fn coxeter_table() {
        let (g, _) = validate_and_symmetrize(a2()).unwrap();
        assert_eq!(coxeter_matrix(&g), vec![vec![1, 3], vec![3, 1]]);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert_eq!(coxeter_matrix(&g), vec![vec![1, 0], vec![0, 1]]);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -1], vec![-2, 2]]).unwrap();
        assert_eq!(coxeter_matrix(&g)[0][1], 4);
        let (g, _) = validate_and_symmetrize(vec![vec![2, -3], vec![-1, 2]]).unwrap();
        assert_eq!(coxeter_matrix(&g)[0][1], 6);
        let (g, _) = validate_and_symmetrize(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(coxeter_matrix(&g)[0][1], 2);
    }

    #[test]
    fn bilinear_values() {
        let (g, s) = validate_and_symmetrize(a2()).unwrap();
        let form = BilinearForm::new(&g, &s);
        assert_eq!(form.norm(&Root::new(vec![1, 0])), rat_int(2));
        let (g, s) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        assert_eq!(form.norm(&Root::new(vec![1, 1])), rat_int(0));
        let (g, s) = validate_and_symmetrize(vec![vec![2, -3], vec![-3, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        assert_eq!(form.norm(&Root::new(vec![1, 1])), rat_int(-2));
        // symmetry on basis pairs
        let (g, s) = validate_and_symmetrize(vec![vec![2, -1], vec![-2, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (Root::simple(i, 2), Root::simple(j, 2));
                assert_eq!(form.eval(&a, &b), form.eval(&b, &a));
            }
        }
    }
}
