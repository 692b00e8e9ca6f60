//! Search for a Jacobian elliptic fibration with irreducible singular fibres
//! on a Kummer surface with Picard lattice `Z h_S ⊕ Π`.
//!
//! A primitive `x ∈ Π` pairing nontrivially with every root is paired with a
//! polarization of square `h_S² = -x²`, so that `e = h_S - x` is isotropic.
//! The fibre lattice `N_x = x^⊥ ∩ Π` must be root-free, and a section class
//! `l` with `l² = -2`, `(l, e) = 1` is produced from any `z ∈ Π` with
//! `(z, e) = 1`.

use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kummer::KummerLattice;
use crate::lattice::{
    big_row_to_i64, is_primitive, make_standard, Lattice, LatticeVector, QuotientMap, StandardLattice, Sublattice,
};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibrationCertificate {
    pub x: LatticeVector,
    #[serde(rename = "hS_square")]
    pub hs_square: i64,
    /// Coordinates in the Picard model, `h_S` first.
    pub e: LatticeVector,
    pub l: LatticeVector,
    pub root_check: bool,
    pub code_class: Vec<u64>,
}

/// The Picard model `Z h_S ⊕ Π`, with `h_S` as coordinate 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicModel {
    pub lattice: Lattice,
    pub hs_square: i64,
}

impl PicModel {
    pub fn new(pi: &Lattice, hs_square: i64) -> Result<Self> {
        let polarization = Lattice::with_labels(vec![vec![hs_square]], vec!["hS".into()])?;
        Ok(Self { lattice: polarization.direct_sum(pi), hs_square })
    }

    pub fn h_s(&self) -> LatticeVector {
        LatticeVector::unit(self.lattice.rank(), 0)
    }

    pub fn embed(&self, v: &LatticeVector) -> LatticeVector {
        let mut c = Vec::with_capacity(v.len() + 1);
        c.push(0);
        c.extend_from_slice(&v.0);
        LatticeVector(c)
    }

    /// Drops the `h_S` coordinate.
    pub fn pi_part(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector(v.0[1..].to_vec())
    }
}

/// Output of [`FibrationSearch::build_fibration_class`]: everything but the section.
#[derive(Debug, Clone)]
pub struct FibrationClass {
    pub x: LatticeVector,
    pub hs_square: i64,
    pub e: LatticeVector,
    pub pic: PicModel,
    pub fibre_lattice: Sublattice,
}

/// A lattice `Π` prepared for the search: its roots and, optionally, the
/// projection onto a finite code quotient.
#[derive(Debug, Clone)]
pub struct FibrationSearch {
    pub pi: Lattice,
    pub roots: Vec<LatticeVector>,
    pub code: Option<QuotientMap>,
}

impl FibrationSearch {
    pub fn new(pi: Lattice, code: Option<QuotientMap>) -> Result<Self> {
        let roots = pi.enumerate_norm_vectors(-2)?;
        Ok(Self { pi, roots, code })
    }

    pub fn kummer() -> Result<Self> {
        let k = KummerLattice::build()?;
        let code = k.code_projection();
        Self::new(k.lattice, Some(code))
    }

    pub fn toy() -> Result<Self> {
        Self::new(make_standard(StandardLattice::A2Neg)?, None)
    }

    fn avoids_roots(&self, x: &LatticeVector) -> bool {
        let gx = self.pi.pairing_row(x).expect("candidate has lattice rank");
        self.roots.iter().all(|r| r.0.iter().zip(&gx).map(|(a, b)| a * b).sum::<i64>() != 0)
    }

    fn is_root_avoiding(&self, x: &LatticeVector) -> bool {
        x.content() == 1
            && self.avoids_roots(x)
            && self.pi.orthogonal_complement(x).and_then(|c| root_free(&c)).unwrap_or(false)
    }

    /// First primitive `x` in search order with `(x, δ) ≠ 0` for every root
    /// `δ` and root-free `x^⊥`.
    pub fn find_root_avoiding_vector(&self, coeff_bound: i64) -> Result<LatticeVector> {
        search_box(self.pi.rank(), coeff_bound, |x| self.is_root_avoiding(x).then(|| x.clone()))
            .ok_or(Error::SearchExhausted { bound: coeff_bound })
    }

    pub fn build_fibration_class(&self, x: &LatticeVector) -> Result<FibrationClass> {
        if !is_primitive(x)? {
            return Err(Error::NotPrimitive);
        }
        let norm = self.pi.norm(x)?;
        if norm >= 0 {
            return Err(Error::NonNegativeNorm(norm));
        }
        let pic = PicModel::new(&self.pi, -norm)?;
        let e = pic.h_s().add(&pic.embed(&x.neg()));
        debug_assert_eq!(pic.lattice.norm(&e)?, 0);
        debug_assert_eq!(e.content(), 1);
        let fibre_lattice = self.pi.orthogonal_complement(x)?;
        Ok(FibrationClass { x: x.clone(), hs_square: -norm, e, pic, fibre_lattice })
    }

    /// `N_x` has no roots. Since `e` is isotropic and orthogonal to `N_x`,
    /// `(n + c e)² = n²`, so this also covers `N_e`.
    pub fn verify_orthogonal_root_free(&self, class: &FibrationClass) -> Result<bool> {
        root_free(&class.fibre_lattice)
    }

    /// A class `l = z + c e` with `l² = -2` and `(l, e) = 1`.
    pub fn find_section_class(&self, class: &FibrationClass) -> Result<LatticeVector> {
        // (z, e) = -(z, x) for z ∈ Π, so we need (z, x) = -1.
        let gx = self.pi.pairing_row(&class.x)?;
        let z = solve_pairing(&gx, -1)
            .ok_or_else(|| Error::NoSectionClass(format!("x = {} pairs evenly with all of the lattice", class.x)))?;
        let z2 = self.pi.norm(&z)?;
        debug_assert_eq!(z2 % 2, 0);
        // (z + c e)² = z² + 2c
        let c = -(z2 + 2) / 2;
        let l = class.pic.embed(&z).add_scaled(c, &class.e);
        debug_assert_eq!(class.pic.lattice.norm(&l)?, -2);
        debug_assert_eq!(class.pic.lattice.inner_product(&l, &class.e)?, 1);
        Ok(l)
    }

    pub fn code_class(&self, x: &LatticeVector) -> Result<Vec<u64>> {
        match &self.code {
            Some(q) => q.project(&x.neg()),
            None => Ok(Vec::new()),
        }
    }

    fn complete(&self, x: &LatticeVector) -> Result<FibrationCertificate> {
        let class = self.build_fibration_class(x)?;
        let root_check = self.verify_orthogonal_root_free(&class)?;
        if !root_check {
            return Err(Error::InvalidInput(format!("x^⊥ has roots for x = {x}")));
        }
        let l = self.find_section_class(&class)?;
        let code_class = self.code_class(x)?;
        if self.code.is_some() && code_class.iter().all(|&c| c == 0) {
            return Err(Error::InvalidInput(format!("x = {x} has trivial code class")));
        }
        Ok(FibrationCertificate { x: class.x, hs_square: class.hs_square, e: class.e, l, root_check, code_class })
    }

    /// First candidate in search order that yields a complete certificate.
    pub fn run_search(&self, coeff_bound: i64) -> Result<FibrationCertificate> {
        search_box(self.pi.rank(), coeff_bound, |x| {
            if !self.is_root_avoiding(x) {
                return None;
            }
            self.complete(x).ok()
        })
        .ok_or(Error::SearchExhausted { bound: coeff_bound })
    }
}

fn root_free(sub: &Sublattice) -> Result<bool> {
    let restricted = sub.restricted_lattice()?;
    Ok(restricted.enumerate_norm_vectors(-2)?.is_empty())
}

/// Some integer `z` with `row · z = target`, preferring `±` a basis vector.
fn solve_pairing(row: &[i64], target: i64) -> Option<LatticeVector> {
    let n = row.len();
    for (i, &r) in row.iter().enumerate() {
        if r == target || r == -target {
            return Some(LatticeVector::unit(n, i).scale(r.signum() * target.signum()));
        }
    }
    let h = linalg::hermite(&linalg::transpose(&linalg::to_big(&[row.to_vec()])));
    let g = &h.form[0][0];
    let target = BigInt::from(target);
    if g.is_zero() || !(&target % g).is_zero() {
        return None;
    }
    let k = (target / g).to_i64()?;
    Some(LatticeVector(big_row_to_i64(&h.transform[0])).scale(k))
}

/// Visits `[-bound, bound]^rank \ {0}` shell by shell (sup-norm 1, 2, ...),
/// each shell in descending lexicographic order, and returns the first hit.
///
/// The top two coordinates are split across workers; `find_map_first` keeps
/// the answer independent of the worker count, and a prefix stops early once
/// an earlier prefix has a hit.
pub fn search_box<T, F>(rank: usize, bound: i64, visit: F) -> Option<T>
where
    T: Send,
    F: Fn(&LatticeVector) -> Option<T> + Sync,
{
    let split = rank.min(2);
    for shell in 1..=bound {
        let prefixes: Vec<Vec<i64>> = Odometer::new(split, shell).collect();
        let earliest_hit = AtomicUsize::new(usize::MAX);
        let hit = prefixes.par_iter().enumerate().find_map_first(|(idx, prefix)| {
            let prefix_max = prefix.iter().map(|c| c.abs()).max().unwrap_or(0);
            for tail in Odometer::new(rank - split, shell) {
                if earliest_hit.load(Ordering::Relaxed) < idx {
                    return None;
                }
                let tail_max = tail.iter().map(|c| c.abs()).max().unwrap_or(0);
                if prefix_max.max(tail_max) != shell {
                    continue;
                }
                let mut coords = prefix.clone();
                coords.extend_from_slice(&tail);
                if let Some(t) = visit(&LatticeVector(coords)) {
                    earliest_hit.fetch_min(idx, Ordering::Relaxed);
                    return Some(t);
                }
            }
            None
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// `[-r, r]^len` in descending lexicographic order.
struct Odometer {
    current: Option<Vec<i64>>,
    radius: i64,
}

impl Odometer {
    fn new(len: usize, radius: i64) -> Self {
        Self { current: Some(vec![radius; len]), radius }
    }
}

impl Iterator for Odometer {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.take()?;
        let mut next = out.clone();
        let mut i = next.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            if next[i] > -self.radius {
                next[i] -= 1;
                self.current = Some(next);
                break;
            }
            next[i] = self.radius;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[i64]) -> LatticeVector {
        LatticeVector(c.to_vec())
    }

    #[test]
    fn odometer_order() {
        let all: Vec<Vec<i64>> = Odometer::new(2, 1).collect();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0], vec![1, 1]);
        assert_eq!(all[1], vec![1, 0]);
        assert_eq!(all[8], vec![-1, -1]);
        assert_eq!(Odometer::new(0, 3).collect::<Vec<_>>(), vec![Vec::<i64>::new()]);
    }

    #[test]
    fn toy_root_avoiding_vector() {
        let s = FibrationSearch::toy().unwrap();
        assert_eq!(s.roots.len(), 6);
        let x = s.find_root_avoiding_vector(1).unwrap();
        assert_eq!(x, v(&[1, 0]));
        let pairings: Vec<i64> = s.roots.iter().map(|r| s.pi.inner_product(&x, r).unwrap()).collect();
        assert!(pairings.iter().all(|&p| p != 0));
        let mut abs: Vec<i64> = pairings.iter().map(|p| p.abs()).collect();
        abs.sort();
        assert_eq!(abs, vec![1, 1, 1, 1, 2, 2]);
    }

    #[test]
    fn minus_two_identity_pairings() {
        let s = FibrationSearch::new(make_standard(StandardLattice::MinusTwoId(2)).unwrap(), None).unwrap();
        assert!(!s.avoids_roots(&v(&[1, 0])));
        assert!(s.avoids_roots(&v(&[1, 1])));
        assert_eq!(s.find_root_avoiding_vector(1).unwrap(), v(&[1, 1]));
    }

    #[test]
    fn toy_fibration_class() {
        let s = FibrationSearch::toy().unwrap();
        let class = s.build_fibration_class(&v(&[1, 0])).unwrap();
        assert_eq!(class.hs_square, 2);
        assert_eq!(class.e, v(&[1, -1, 0]));
        assert_eq!(class.pic.lattice.norm(&class.e).unwrap(), 0);
        assert_eq!(class.fibre_lattice.canonical_basis(), vec![v(&[1, -2])]);
        assert!(s.verify_orthogonal_root_free(&class).unwrap());
    }

    #[test]
    fn minus_two_identity_fibration_class() {
        let s = FibrationSearch::new(make_standard(StandardLattice::MinusTwoId(2)).unwrap(), None).unwrap();
        let class = s.build_fibration_class(&v(&[1, 1])).unwrap();
        assert_eq!(class.hs_square, 4);
        assert_eq!(class.pic.lattice.norm(&class.e).unwrap(), 0);
        assert!(s.verify_orthogonal_root_free(&class).unwrap());
        assert!(matches!(s.find_section_class(&class), Err(Error::NoSectionClass(_))));

        // Forced through despite failing the root test.
        let bad = s.build_fibration_class(&v(&[1, 0])).unwrap();
        assert!(!s.verify_orthogonal_root_free(&bad).unwrap());

        assert_eq!(s.build_fibration_class(&v(&[2, 0])).err(), Some(Error::NotPrimitive));
        assert_eq!(s.build_fibration_class(&v(&[0, 0])).err(), Some(Error::ZeroVector));
    }

    #[test]
    fn toy_section_class() {
        let s = FibrationSearch::toy().unwrap();
        let class = s.build_fibration_class(&v(&[1, 0])).unwrap();
        let l = s.find_section_class(&class).unwrap();
        // z = s pairs to -1 with x, hence to +1 with e; c = 0.
        assert_eq!(l, v(&[0, 0, 1]));
        assert_eq!(class.pic.lattice.norm(&l).unwrap(), -2);
        assert_eq!(class.pic.lattice.inner_product(&l, &class.e).unwrap(), 1);
    }

    #[test]
    fn solve_pairing_general() {
        let z = solve_pairing(&[4, 6, 9], -1).unwrap();
        assert_eq!(z.0.iter().zip([4, 6, 9]).map(|(a, b)| a * b).sum::<i64>(), -1);
        assert!(solve_pairing(&[2, 4], 1).is_none());
        assert_eq!(solve_pairing(&[-2, -1], -1).unwrap(), v(&[0, 1]));
    }

    #[test]
    fn zero_bound_exhausts() {
        let s = FibrationSearch::toy().unwrap();
        assert_eq!(s.run_search(0), Err(Error::SearchExhausted { bound: 0 }));
    }
}
