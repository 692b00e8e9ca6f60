//! Affine monodromy actions on `(Z/m)²` and subgroup closures in `SL(2, Z/p)`.
//!
//! An orbit of the affine action `v ↦ A v + t` of the monodromy group on the
//! level-`m` torsion corresponds to an irreducible component of the preimage
//! of a section under multiplication by `m`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = [[i64; 2]; 2];
pub type Point = [i64; 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineGenerator {
    #[serde(rename = "A")]
    pub a: Mat2,
    #[serde(default)]
    pub t: Point,
}

/// JSON: `{ "m": p, "gens": [ { "A": [[a,b],[c,d]], "t": [u,v] } ] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct AffineAction {
    modulus: i64,
    generators: Vec<AffineGenerator>,
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    m: i64,
    gens: Vec<AffineGenerator>,
}

impl TryFrom<RawAction> for AffineAction {
    type Error = Error;

    fn try_from(raw: RawAction) -> Result<Self> {
        AffineAction::new(raw.m, raw.gens)
    }
}

impl From<AffineAction> for RawAction {
    fn from(a: AffineAction) -> Self {
        RawAction { m: a.modulus, gens: a.generators }
    }
}

fn reduce(x: i64, m: i64) -> i64 {
    x.rem_euclid(m)
}

fn mat_mul(a: &Mat2, b: &Mat2, m: i64) -> Mat2 {
    let mut c = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = reduce(a[i][0] * b[0][j] + a[i][1] * b[1][j], m);
        }
    }
    c
}

fn apply(a: &Mat2, v: &Point, m: i64) -> Point {
    [reduce(a[0][0] * v[0] + a[0][1] * v[1], m), reduce(a[1][0] * v[0] + a[1][1] * v[1], m)]
}

/// Inverse of a determinant-one matrix: the adjugate.
fn sl2_inverse(a: &Mat2, m: i64) -> Mat2 {
    [[reduce(a[1][1], m), reduce(-a[0][1], m)], [reduce(-a[1][0], m), reduce(a[0][0], m)]]
}

fn det_mod(a: &Mat2, m: i64) -> i64 {
    reduce(a[0][0] * a[1][1] - a[0][1] * a[1][0], m)
}

pub fn is_prime(n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl AffineAction {
    pub fn new(modulus: i64, generators: Vec<AffineGenerator>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidAction(format!("modulus {modulus} < 2")));
        }
        let mut reduced = Vec::with_capacity(generators.len());
        for (k, g) in generators.into_iter().enumerate() {
            if det_mod(&g.a, modulus) != reduce(1, modulus) {
                return Err(Error::InvalidAction(format!(
                    "generator {k} has determinant {} mod {modulus}",
                    det_mod(&g.a, modulus)
                )));
            }
            let a = [
                [reduce(g.a[0][0], modulus), reduce(g.a[0][1], modulus)],
                [reduce(g.a[1][0], modulus), reduce(g.a[1][1], modulus)],
            ];
            let t = [reduce(g.t[0], modulus), reduce(g.t[1], modulus)];
            reduced.push(AffineGenerator { a, t });
        }
        Ok(Self { modulus, generators: reduced })
    }

    /// A purely linear action (all translations zero).
    pub fn linear(modulus: i64, matrices: &[Mat2]) -> Result<Self> {
        Self::new(modulus, matrices.iter().map(|&a| AffineGenerator { a, t: [0, 0] }).collect())
    }

    pub fn modulus(&self) -> i64 {
        self.modulus
    }

    pub fn generators(&self) -> &[AffineGenerator] {
        &self.generators
    }

    pub fn apply(&self, g: &AffineGenerator, v: &Point) -> Point {
        let w = apply(&g.a, v, self.modulus);
        [reduce(w[0] + g.t[0], self.modulus), reduce(w[1] + g.t[1], self.modulus)]
    }

    /// `v ↦ A⁻¹ (v - t)`
    pub fn apply_inverse(&self, g: &AffineGenerator, v: &Point) -> Point {
        let m = self.modulus;
        let shifted = [reduce(v[0] - g.t[0], m), reduce(v[1] - g.t[1], m)];
        apply(&sl2_inverse(&g.a, m), &shifted, m)
    }

    /// Orbits of the generated group, by breadth-first closure.
    pub fn orbits(&self) -> OrbitPartition {
        let m = self.modulus as usize;
        let index = |p: &Point| p[0] as usize * m + p[1] as usize;
        let mut seen = vec![false; m * m];
        let mut blocks = Vec::new();
        for start in 0..m * m {
            if seen[start] {
                continue;
            }
            let origin = [(start / m) as i64, (start % m) as i64];
            seen[start] = true;
            let mut block = vec![origin];
            let mut queue = VecDeque::from([origin]);
            while let Some(p) = queue.pop_front() {
                for g in &self.generators {
                    for q in [self.apply(g, &p), self.apply_inverse(g, &p)] {
                        if !seen[index(&q)] {
                            seen[index(&q)] = true;
                            block.push(q);
                            queue.push_back(q);
                        }
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        OrbitPartition { modulus: self.modulus, blocks }
    }

    /// True iff the single orbit is all of `(Z/p)²`.
    pub fn is_preimage_irreducible(&self) -> Result<bool> {
        if !is_prime(self.modulus) {
            return Err(Error::NotPrime(self.modulus));
        }
        let orbits = self.orbits();
        Ok(orbits.blocks.len() == 1 && orbits.blocks[0].len() as i64 == self.modulus * self.modulus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitPartition {
    pub modulus: i64,
    /// Each block sorted; blocks ordered by their least element.
    pub blocks: Vec<Vec<Point>>,
}

impl OrbitPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    pub fn block_of(&self, p: &Point) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(p).is_ok())
    }
}

pub const SL2_S: Mat2 = [[0, -1], [1, 0]];
pub const SL2_T: Mat2 = [[1, 1], [0, 1]];
pub const SL2_T_LOWER: Mat2 = [[1, 0], [1, 1]];

/// Order of the subgroup of `SL(2, Z/m)` generated by `matrices`.
pub fn subgroup_order(matrices: &[Mat2], m: i64) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidAction(format!("modulus {m} < 2")));
    }
    let gens: Vec<Mat2> = matrices
        .iter()
        .map(|a| {
            if det_mod(a, m) != reduce(1, m) {
                Err(Error::InvalidAction(format!("{a:?} has determinant {} mod {m}", det_mod(a, m))))
            } else {
                Ok([[reduce(a[0][0], m), reduce(a[0][1], m)], [reduce(a[1][0], m), reduce(a[1][1], m)]])
            }
        })
        .collect::<Result<_>>()?;
    let identity: Mat2 = [[1, 0], [0, 1]];
    let mut seen = BTreeSet::from([identity]);
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            for y in [mat_mul(&x, g, m), mat_mul(&x, &sl2_inverse(g, m), m)] {
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(seen.len())
}

/// `|SL(2, Z/p)| = p (p² - 1)`
pub fn sl2_order(p: i64) -> i64 {
    p * (p * p - 1)
}

pub fn monodromy_surjective_mod_p(matrices: &[Mat2], p: i64) -> Result<bool> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(subgroup_order(matrices, p)? as i64 == sl2_order(p))
}

/// Degree of multiplication by `m` on an elliptic curve.
pub fn phi_degree(m: u64) -> u64 {
    m * m
}
