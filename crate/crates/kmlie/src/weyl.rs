//! Weyl group machinery: reflections on root, coroot, and Cartan-space
//! coordinates, reduced words via the exchange condition, breadth-first
//! enumeration of positive real roots with witnesses, and coroots.

use std::cmp::Ordering;
use std::fmt;

use num::{One, Signed};

use crate::cartan::{BilinearForm, CartanMatrix, Realization};
use crate::error::{KmError, Result};
use crate::ratio::Rat;

/// An element of the root lattice in simple-root coordinates.
///
/// Also used for elements of `Q` that are not roots (the zero vector tags
/// the Cartan subalgebra inside graded data structures).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Root(Vec<i64>);

impl Root {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Root(coeffs)
    }

    pub fn zero(l: usize) -> Self {
        Root(vec![0; l])
    }

    pub fn simple(i: usize, l: usize) -> Self {
        let mut c = vec![0; l];
        c[i] = 1;
        Root(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn is_positive(&self) -> bool {
        !self.is_zero() && self.0.iter().all(|&k| k >= 0)
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.0.iter().all(|&k| k <= 0)
    }

    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|&k| -k).collect())
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: i64) -> Root {
        Root(self.0.iter().map(|&c| c * k).collect())
    }

    /// `self / k` when every coefficient is divisible, else None.
    pub fn divided(&self, k: i64) -> Option<Root> {
        if self.0.iter().all(|c| c % k == 0) {
            Some(Root(self.0.iter().map(|c| c / k).collect()))
        } else {
            None
        }
    }
}

impl Ord for Root {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.height(), &self.0).cmp(&(other.height(), &other.0))
    }
}

impl PartialOrd for Root {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

/// A word in the simple reflections, letters 0-indexed.
pub type WeylWord = Vec<usize>;

/// `w_i(x) = x - <x, alpha_i^vee> alpha_i` on root-lattice coordinates.
pub fn reflect_root(gcm: &CartanMatrix, i: usize, x: &Root) -> Result<Root> {
    let l = gcm.size();
    if i >= l {
        return Err(KmError::IndexOutOfRange(i + 1, l));
    }
    let pairing = gcm.pair_coroot(x, i);
    let mut c = x.coeffs().to_vec();
    c[i] -= pairing;
    Ok(Root::new(c))
}

/// The contragredient reflection on coroot-lattice coordinates:
/// `w_i(h) = h - <alpha_i, h> alpha_i^vee`.
pub fn reflect_coroot(gcm: &CartanMatrix, i: usize, h: &[i64]) -> Result<Vec<i64>> {
    let l = gcm.size();
    if i >= l {
        return Err(KmError::IndexOutOfRange(i + 1, l));
    }
    // <alpha_i, sum_k c_k alpha_k^vee> = sum_k c_k a_ki
    let pairing: i64 = (0..l).map(|k| h[k] * gcm.entry(k, i)).sum();
    let mut c = h.to_vec();
    c[i] -= pairing;
    Ok(c)
}

/// Reflection on full Cartan-space coordinates of h*.
pub fn reflect_point(gcm: &CartanMatrix, real: &Realization, i: usize, x: &[Rat]) -> Result<Vec<Rat>> {
    let l = gcm.size();
    if i >= l {
        return Err(KmError::IndexOutOfRange(i + 1, l));
    }
    let pairing = real.pair(x, &real.simple_coroots.data[i]);
    let mut v = x.to_vec();
    for t in 0..real.n {
        let sub = &pairing * &real.simple_roots.data[i][t];
        v[t] -= sub;
    }
    Ok(v)
}

/// Apply a word to root coordinates; letters act right to left.
pub fn act_on_root(gcm: &CartanMatrix, word: &[usize], x: &Root) -> Result<Root> {
    let mut y = x.clone();
    for &i in word.iter().rev() {
        y = reflect_root(gcm, i, &y)?;
    }
    Ok(y)
}

pub fn act_on_coroot(gcm: &CartanMatrix, word: &[usize], h: &[i64]) -> Result<Vec<i64>> {
    let mut y = h.to_vec();
    for &i in word.iter().rev() {
        y = reflect_coroot(gcm, i, &y)?;
    }
    Ok(y)
}

pub fn act_on_point(gcm: &CartanMatrix, real: &Realization, word: &[usize], x: &[Rat]) -> Result<Vec<Rat>> {
    let mut y = x.to_vec();
    for &i in word.iter().rev() {
        y = reflect_point(gcm, real, i, &y)?;
    }
    Ok(y)
}

/// A regular dominant rational point of h*: `<x, alpha_i^vee> = 1` for all
/// i, free coordinates zero. Its stabilizer in W is trivial, so equal
/// action on it certifies equality of group elements.
pub fn regular_point(gcm: &CartanMatrix, real: &Realization) -> Vec<Rat> {
    let ones = vec![Rat::one(); gcm.size()];
    real.simple_coroots.solve(&ones).expect("coroot rows are independent")
}

/// Rewrite a word as a reduced word for the same group element.
///
/// Letters are appended one at a time; a letter that shortens the element
/// is handled through the exchange condition, searching for the position
/// whose deletion reproduces the action on a regular point.
pub fn reduce_word(gcm: &CartanMatrix, word: &[usize]) -> Result<WeylWord> {
    let real = crate::cartan::realization(gcm);
    let pt = regular_point(gcm, &real);
    let mut reduced: WeylWord = Vec::new();
    for &j in word {
        if j >= gcm.size() {
            return Err(KmError::IndexOutOfRange(j + 1, gcm.size()));
        }
        let image = act_on_root(gcm, &reduced, &Root::simple(j, gcm.size()))?;
        if image.is_positive() {
            reduced.push(j);
            continue;
        }
        // descent: R s_j equals R with one letter deleted
        let mut target = reduced.clone();
        target.push(j);
        let target_pt = act_on_point(gcm, &real, &target, &pt)?;
        let mut found = false;
        for p in 0..reduced.len() {
            let mut cand = reduced.clone();
            cand.remove(p);
            if act_on_point(gcm, &real, &cand, &pt)? == target_pt {
                reduced = cand;
                found = true;
                break;
            }
        }
        debug_assert!(found, "exchange condition must produce a deletion");
    }
    Ok(reduced)
}

pub fn length(gcm: &CartanMatrix, word: &[usize]) -> Result<usize> {
    Ok(reduce_word(gcm, word)?.len())
}

/// A positive real root together with its breadth-first witness
/// `alpha = w(alpha_i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealRoot {
    pub root: Root,
    /// Witness word w, leftmost letter applied last.
    pub witness: WeylWord,
    /// Index i of the simple root the witness is applied to.
    pub simple: usize,
}

/// All positive real roots of height <= `max_height` by breadth-first
/// orbit of the simple roots, lexicographic letter order, first witness
/// kept. Output sorted by (height, lex).
pub fn positive_real_roots_up_to(gcm: &CartanMatrix, max_height: i64) -> Result<Vec<RealRoot>> {
    let l = gcm.size();
    let mut seen: Vec<Root> = Vec::new();
    let mut out: Vec<RealRoot> = Vec::new();
    let mut queue: std::collections::VecDeque<RealRoot> = (0..l)
        .map(|i| RealRoot { root: Root::simple(i, l), witness: Vec::new(), simple: i })
        .collect();
    for r in &queue {
        seen.push(r.root.clone());
    }
    while let Some(item) = queue.pop_front() {
        if item.root.height() <= max_height {
            out.push(item.clone());
        }
        for j in 0..l {
            let img = reflect_root(gcm, j, &item.root)?;
            if img.is_positive() && img.height() <= max_height && !seen.contains(&img) {
                seen.push(img.clone());
                let mut w = vec![j];
                w.extend_from_slice(&item.witness);
                queue.push_back(RealRoot { root: img, witness: w, simple: item.simple });
            }
        }
    }
    out.sort_by(|a, b| a.root.cmp(&b.root));
    Ok(out)
}

/// Coroot of a positive real root via its witness, `alpha^vee = w(alpha_i^vee)`.
pub fn coroot_from_witness(gcm: &CartanMatrix, rr: &RealRoot) -> Result<Vec<i64>> {
    let l = gcm.size();
    let mut h = vec![0i64; l];
    h[rr.simple] = 1;
    act_on_coroot(gcm, &rr.witness, &h)
}

/// Coroot of a real root given only its coordinates: requires positive
/// norm and membership in the enumerated orbit up to the root's height.
pub fn coroot(gcm: &CartanMatrix, form: &BilinearForm, alpha: &Root) -> Result<Vec<i64>> {
    if !form.norm(alpha).is_positive() {
        return Err(KmError::NotRealRoot(alpha.clone()));
    }
    let (alpha_pos, flip) = if alpha.is_positive() {
        (alpha.clone(), false)
    } else if alpha.is_negative() {
        (alpha.neg(), true)
    } else {
        return Err(KmError::NotRealRoot(alpha.clone()));
    };
    let orbit = positive_real_roots_up_to(gcm, alpha_pos.height())?;
    let rr = orbit
        .iter()
        .find(|r| r.root == alpha_pos)
        .ok_or_else(|| KmError::NotRealRoot(alpha.clone()))?;
    let c = coroot_from_witness(gcm, rr)?;
    Ok(if flip { c.iter().map(|&x| -x).collect() } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::validate_and_symmetrize;
    use crate::ratio::rat_int;

    fn gcm(m: Vec<Vec<i64>>) -> CartanMatrix {
        validate_and_symmetrize(m).unwrap().0
    }

    #[test]
    fn simple_reflections() {
        let g = gcm(vec![vec![2, -1], vec![-1, 2]]);
        let a1 = Root::simple(0, 2);
        let a2 = Root::simple(1, 2);
        assert_eq!(reflect_root(&g, 0, &a1).unwrap(), a1.neg());
        assert_eq!(reflect_root(&g, 0, &a2).unwrap(), Root::new(vec![1, 1]));
        // (s1 s2 s1)(alpha_1) = -alpha_2
        assert_eq!(act_on_root(&g, &[0, 1, 0], &a1).unwrap(), Root::new(vec![0, -1]));
        assert!(reflect_root(&g, 2, &a1).is_err());
    }

    #[test]
    fn reduce_words() {
        let g = gcm(vec![vec![2, -1], vec![-1, 2]]);
        assert_eq!(reduce_word(&g, &[0, 0]).unwrap(), Vec::<usize>::new());
        assert_eq!(reduce_word(&g, &[0, 1]).unwrap(), vec![0, 1]);
        // [1,2,1,2] has length 2 in A2 and equals s2 s1
        let r = reduce_word(&g, &[0, 1, 0, 1]).unwrap();
        assert_eq!(r.len(), 2);
        let real = crate::cartan::realization(&g);
        let pt = regular_point(&g, &real);
        assert_eq!(
            act_on_point(&g, &real, &r, &pt).unwrap(),
            act_on_point(&g, &real, &[1, 0], &pt).unwrap()
        );
    }

    #[test]
    fn reduce_word_minimal_by_exhaustion() {
        // in A2 the Weyl group has 6 elements; check minimality for all
        // words of length <= 4 by exhaustive search over shorter words
        let g = gcm(vec![vec![2, -1], vec![-1, 2]]);
        let real = crate::cartan::realization(&g);
        let pt = regular_point(&g, &real);
        let words: Vec<Vec<usize>> = (0..=4u32)
            .flat_map(|len| {
                (0..(1u32 << len)).map(move |mask| {
                    (0..len).map(|b| ((mask >> b) & 1) as usize).collect::<Vec<_>>()
                })
            })
            .collect();
        for w in &words {
            let r = reduce_word(&g, w).unwrap();
            let target = act_on_point(&g, &real, w, &pt).unwrap();
            assert_eq!(act_on_point(&g, &real, &r, &pt).unwrap(), target);
            let min_len = words
                .iter()
                .filter(|v| act_on_point(&g, &real, v, &pt).unwrap() == target)
                .map(|v| v.len())
                .min()
                .unwrap();
            assert_eq!(r.len(), min_len, "word {w:?}");
        }
    }

    #[test]
    fn orbit_enumeration() {
        let g = gcm(vec![vec![2]]);
        let o = positive_real_roots_up_to(&g, 5).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].root, Root::simple(0, 1));

        let g = gcm(vec![vec![2, -1], vec![-1, 2]]);
        let o = positive_real_roots_up_to(&g, 3).unwrap();
        let roots: Vec<Root> = o.iter().map(|r| r.root.clone()).collect();
        assert_eq!(
            roots,
            vec![Root::new(vec![0, 1]), Root::new(vec![1, 0]), Root::new(vec![1, 1])]
        );

        let g = gcm(vec![vec![2, -2], vec![-2, 2]]);
        let o = positive_real_roots_up_to(&g, 3).unwrap();
        let roots: Vec<Root> = o.iter().map(|r| r.root.clone()).collect();
        assert_eq!(
            roots,
            vec![
                Root::new(vec![0, 1]),
                Root::new(vec![1, 0]),
                Root::new(vec![1, 2]),
                Root::new(vec![2, 1])
            ]
        );
        // witnesses reproduce the roots
        for rr in &o {
            assert_eq!(
                act_on_root(&g, &rr.witness, &Root::simple(rr.simple, 2)).unwrap(),
                rr.root
            );
        }
    }

    #[test]
    fn coroots() {
        let (g, s) = validate_and_symmetrize(vec![vec![2, -1], vec![-1, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        assert_eq!(coroot(&g, &form, &Root::simple(0, 2)).unwrap(), vec![1, 0]);
        assert_eq!(coroot(&g, &form, &Root::new(vec![1, 1])).unwrap(), vec![1, 1]);

        let (g, s) = validate_and_symmetrize(vec![vec![2, -1], vec![-2, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        let c = coroot(&g, &form, &Root::new(vec![1, 1])).unwrap();
        // closed form: alpha^vee = (2/(a,a)) sum_j k_j d_j alpha_j^vee
        // with d = (2,1) and (a,a) = 2 this gives 2*alpha_1^vee + alpha_2^vee
        assert_eq!(c, vec![2, 1]);
        // defining identity against the closed form on both simple roots
        let norm = form.norm(&Root::new(vec![1, 1]));
        for j in 0..2 {
            // <alpha_j, sum_k c_k alpha_k^vee> = sum_k c_k a_kj
            let pairing: i64 = (0..2).map(|k| c[k] * g.entry(k, j)).sum();
            let two_xa = rat_int(2) * form.eval(&Root::simple(j, 2), &Root::new(vec![1, 1]));
            assert_eq!(rat_int(pairing) * &norm, two_xa);
        }
        // imaginary roots have no coroot
        let (g, s) = validate_and_symmetrize(vec![vec![2, -2], vec![-2, 2]]).unwrap();
        let form = BilinearForm::new(&g, &s);
        assert!(matches!(
            coroot(&g, &form, &Root::new(vec![1, 1])),
            Err(KmError::NotRealRoot(_))
        ));
    }

    #[test]
    fn form_is_weyl_invariant() {
        for m in [
            vec![vec![2, -1], vec![-1, 2]],
            vec![vec![2, -1], vec![-2, 2]],
            vec![vec![2, -2], vec![-2, 2]],
            vec![vec![2, -3], vec![-3, 2]],
        ] {
            let (g, s) = validate_and_symmetrize(m).unwrap();
            let form = BilinearForm::new(&g, &s);
            let words: [&[usize]; 4] = [&[0], &[1], &[0, 1], &[1, 0, 1]];
            let vecs = [Root::new(vec![1, 0]), Root::new(vec![0, 1]), Root::new(vec![2, -1])];
            for w in words {
                for x in &vecs {
                    for y in &vecs {
                        let wx = act_on_root(&g, w, x).unwrap();
                        let wy = act_on_root(&g, w, y).unwrap();
                        assert_eq!(form.eval(&wx, &wy), form.eval(x, y));
                    }
                }
            }
        }
    }

    #[test]
    fn braid_relations_on_generic_point() {
        // the two sides of the braid word of length c_ij act identically
        for (m, c) in [
            (vec![vec![2, -1], vec![-1, 2]], 3usize),
            (vec![vec![2, -1], vec![-2, 2]], 4),
            (vec![vec![2, -3], vec![-1, 2]], 6),
            (vec![vec![2, 0], vec![0, 2]], 2),
        ] {
            let g = gcm(m);
            let real = crate::cartan::realization(&g);
            let pt = regular_point(&g, &real);
            let side1: Vec<usize> = (0..c).map(|t| t % 2).collect();
            let side2: Vec<usize> = (0..c).map(|t| (t + 1) % 2).collect();
            assert_eq!(
                act_on_point(&g, &real, &side1, &pt).unwrap(),
                act_on_point(&g, &real, &side2, &pt).unwrap()
            );
        }
    }

    #[test]
    fn reflect_involution_on_samples() {
        let g = gcm(vec![vec![2, -3], vec![-3, 2]]);
        for x in [Root::new(vec![3, -2]), Root::new(vec![5, 7]), Root::new(vec![0, 0])] {
            for i in 0..2 {
                let y = reflect_root(&g, i, &reflect_root(&g, i, &x).unwrap()).unwrap();
                assert_eq!(y, x);
            }
        }
    }
}
