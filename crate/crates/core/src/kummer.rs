//! The Kummer lattice: the 16 exceptional (-2)-classes `e_p`, indexed by the
//! points `p` of F_2^4, together with half-sums `(1/2) Σ_{p ∈ F} e_p` over
//! affine flats `F`.
//!
//! Vectors are handled in "half coordinates": `a ∈ Z^16` stands for
//! `Σ a_p e_p / 2`, so the form is `-(a · b) / 2`. A Z-basis is obtained by
//! Hermite reduction of the generators, and the lattice is stored in that
//! basis with integer coordinates only.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{big_row_to_i64, Lattice, LatticeVector, QuotientMap, Sublattice};
use crate::linalg;

pub const POINTS: usize = 16;

/// Affine flats of dimension `dim` in F_2^4, as sorted point indices.
pub fn affine_flats(dim: u32) -> Vec<Vec<usize>> {
    let size = 1usize << dim;
    let mut subspaces: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(1, Vec::new())];
    while let Some((next, chosen)) = stack.pop() {
        if chosen.len() == dim as usize {
            let mut span = vec![0usize];
            for &g in &chosen {
                let shifted: Vec<usize> = span.iter().map(|s| s ^ g).collect();
                span.extend(shifted);
            }
            span.sort_unstable();
            span.dedup();
            if span.len() == size {
                subspaces.insert(span);
            }
            continue;
        }
        for g in next..POINTS {
            let mut c = chosen.clone();
            c.push(g);
            stack.push((g + 1, c));
        }
    }
    let mut flats = BTreeSet::new();
    for s in &subspaces {
        for t in 0..POINTS {
            let mut coset: Vec<usize> = s.iter().map(|p| p ^ t).collect();
            coset.sort_unstable();
            flats.insert(coset);
        }
    }
    flats.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct KummerLattice {
    pub lattice: Lattice,
    /// Basis vectors in half coordinates.
    pub half_basis: Vec<Vec<i64>>,
    /// The exceptional classes `e_p` in lattice coordinates.
    pub exceptional: Vec<LatticeVector>,
}

impl KummerLattice {
    /// Exceptional classes plus half-sums over affine hyperplanes.
    pub fn build() -> Result<Self> {
        Self::from_half_sums(&affine_flats(3))
    }

    /// Lattice generated by the `e_p` and `(1/2) Σ_{p ∈ w} e_p` for each word `w`.
    ///
    /// Fails if the generated group is not an even integral lattice.
    pub fn from_half_sums(words: &[Vec<usize>]) -> Result<Self> {
        let mut gens: Vec<Vec<i64>> = (0..POINTS)
            .map(|p| {
                let mut r = vec![0; POINTS];
                r[p] = 2;
                r
            })
            .collect();
        for w in words {
            let mut r = vec![0; POINTS];
            for &p in w {
                r[p] += 1;
            }
            gens.push(r);
        }
        let basis = linalg::row_basis(&linalg::to_big(&gens));
        let half_basis: Vec<Vec<i64>> = basis.iter().map(|r| big_row_to_i64(r)).collect();

        let n = half_basis.len();
        let mut gram = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dot: i64 = half_basis[i].iter().zip(&half_basis[j]).map(|(a, b)| a * b).sum();
                if dot % 2 != 0 {
                    return Err(Error::InvalidLattice(format!(
                        "half-sum generators pair to {}/2, not an integral lattice",
                        -dot
                    )));
                }
                gram[i][j] = -dot / 2;
            }
        }
        let labels = (1..=n).map(|k| format!("pi{k}")).collect();
        let lattice = Lattice::with_labels(gram, labels)?;

        let exceptional = (0..POINTS)
            .map(|p| {
                let mut target = vec![BigInt::zero(); POINTS];
                target[p] = BigInt::from(2);
                let c = linalg::solve_left(&basis, &target)
                    .ok_or_else(|| Error::InvalidLattice("degenerate half-sum basis".into()))?;
                c.iter()
                    .map(|x| {
                        if x.denom().is_one() {
                            Ok(x.numer().to_i64().unwrap())
                        } else {
                            Err(Error::InvalidLattice("exceptional class not in basis span".into()))
                        }
                    })
                    .collect::<Result<Vec<i64>>>()
                    .map(LatticeVector)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self { lattice, half_basis, exceptional })
    }

    /// The sublattice `(-2) Id_16` spanned by the exceptional classes.
    pub fn exceptional_sublattice(&self) -> Sublattice {
        Sublattice::new(self.lattice.clone(), self.exceptional.clone())
            .expect("exceptional classes live in the lattice")
    }

    /// Half coordinates of a lattice vector.
    pub fn to_half_coords(&self, v: &LatticeVector) -> Vec<i64> {
        let mut out = vec![0i64; POINTS];
        for (c, row) in v.0.iter().zip(&self.half_basis) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        out
    }

    /// Projection onto the elementary 2-group `Π / (-2) Id_16`.
    pub fn code_projection(&self) -> QuotientMap {
        QuotientMap::new(&self.lattice, &self.exceptional_sublattice()).expect("exceptional classes have full rank")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_counts() {
        assert_eq!(affine_flats(1).len(), 120);
        assert_eq!(affine_flats(2).len(), 140);
        assert_eq!(affine_flats(3).len(), 30);
        assert!(affine_flats(3).iter().all(|f| f.len() == 8));
    }

    #[test]
    fn kummer_lattice_is_even_negative_definite() {
        let k = KummerLattice::build().unwrap();
        assert_eq!(k.lattice.rank(), 16);
        assert!(k.lattice.is_negative_definite());
        for (p, e) in k.exceptional.iter().enumerate() {
            assert_eq!(k.lattice.norm(e).unwrap(), -2);
            let mut expect = vec![0; POINTS];
            expect[p] = 2;
            assert_eq!(k.to_half_coords(e), expect);
        }
    }

    #[test]
    fn plane_half_sums_are_not_integral() {
        // Two affine 2-planes with complementary directions meet in one point,
        // so their half-sums pair to -1/2.
        let err = KummerLattice::from_half_sums(&affine_flats(2)).unwrap_err();
        assert!(matches!(err, Error::InvalidLattice(_)));
    }
}
