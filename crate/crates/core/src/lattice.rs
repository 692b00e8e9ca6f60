//! Even integral lattices given by a Gram matrix in a fixed Z-basis.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kummer;
use crate::linalg;

/// Integer coordinates relative to the basis of some [`Lattice`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn zero(rank: usize) -> Self {
        Self(vec![0; rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: i64) -> Self {
        Self(self.0.iter().map(|c| c * k).collect())
    }

    /// `self + k * other`
    pub fn add_scaled(&self, k: i64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + k * b).collect())
    }

    pub fn content(&self) -> i64 {
        self.0.iter().fold(0i64, |g, &c| g.gcd(&c))
    }
}

impl From<Vec<i64>> for LatticeVector {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// On-disk shape of a lattice: `{ "rank": n, "gram": [[...]], "labels": [...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    #[serde(default)]
    pub labels: Vec<String>,
}

/// An even integral symmetric bilinear form on Z^rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    gram: Vec<Vec<i64>>,
    labels: Vec<String>,
    degenerate: bool,
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = Error;

    fn try_from(spec: LatticeSpec) -> Result<Self> {
        if spec.gram.len() != spec.rank {
            return Err(Error::InvalidLattice(format!("rank {} but gram has {} rows", spec.rank, spec.gram.len())));
        }
        Lattice::with_labels(spec.gram, spec.labels)
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> Self {
        LatticeSpec { rank: l.rank(), gram: l.gram, labels: l.labels }
    }
}

impl Lattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        Self::with_labels(gram, Vec::new())
    }

    /// Validates symmetry and evenness; a singular form is accepted but flagged.
    pub fn with_labels(gram: Vec<Vec<i64>>, labels: Vec<String>) -> Result<Self> {
        let n = gram.len();
        if n == 0 {
            return Err(Error::InvalidLattice("rank must be positive".into()));
        }
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidLattice(format!("gram row {i} has length {}", row.len())));
            }
            if row[i] % 2 != 0 {
                return Err(Error::InvalidLattice(format!("odd diagonal entry {} at {i}", row[i])));
            }
            for j in 0..i {
                if row[j] != gram[j][i] {
                    return Err(Error::InvalidLattice(format!("gram not symmetric at ({i},{j})")));
                }
            }
        }
        let labels = if labels.is_empty() {
            (0..n).map(|i| format!("b{i}")).collect()
        } else if labels.len() == n {
            labels
        } else {
            return Err(Error::InvalidLattice(format!("{} labels for rank {n}", labels.len())));
        };
        let degenerate = linalg::determinant(&linalg::to_big(&gram)).is_zero();
        Ok(Self { gram, labels, degenerate })
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn determinant(&self) -> BigInt {
        linalg::determinant(&linalg::to_big(&self.gram))
    }

    /// Exact test via the leading principal minors of `-gram`.
    pub fn is_negative_definite(&self) -> bool {
        let neg: Vec<Vec<i64>> = self.gram.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let minors = linalg::leading_minors(&neg);
        minors.len() == self.rank() && minors.iter().all(Signed::is_positive)
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (n, m) = (self.rank(), other.rank());
        let mut gram = vec![vec![0; n + m]; n + m];
        for i in 0..n {
            gram[i][..n].copy_from_slice(&self.gram[i]);
        }
        for i in 0..m {
            gram[n + i][n..].copy_from_slice(&other.gram[i]);
        }
        let labels = self.labels.iter().chain(other.labels.iter()).cloned().collect();
        Lattice { gram, labels, degenerate: self.degenerate || other.degenerate }
    }

    fn check(&self, v: &LatticeVector) -> Result<()> {
        if v.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), got: v.len() });
        }
        Ok(())
    }

    /// `gram * v`
    pub fn pairing_row(&self, v: &LatticeVector) -> Result<Vec<i64>> {
        self.check(v)?;
        Ok(self.gram.iter().map(|row| row.iter().zip(&v.0).map(|(g, c)| g * c).sum()).collect())
    }

    pub fn inner_product(&self, v: &LatticeVector, w: &LatticeVector) -> Result<i64> {
        self.check(w)?;
        let gv = self.pairing_row(v)?;
        Ok(gv.iter().zip(&w.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self, v: &LatticeVector) -> Result<i64> {
        self.inner_product(v, v)
    }

    /// Reflection in a root: `v + (v, root) * root`.
    pub fn reflect(&self, v: &LatticeVector, root: &LatticeVector) -> Result<LatticeVector> {
        let n = self.norm(root)?;
        if n != -2 {
            return Err(Error::NotARoot(n));
        }
        let k = self.inner_product(v, root)?;
        Ok(v.add_scaled(k, root))
    }

    /// Every vector of norm `target`, sorted lexicographically.
    pub fn enumerate_norm_vectors(&self, target: i64) -> Result<Vec<LatticeVector>> {
        if target >= 0 {
            return Err(Error::NonNegativeTarget(target));
        }
        if self.degenerate || !self.is_negative_definite() {
            return Err(Error::NotNegativeDefinite);
        }
        let neg: Vec<Vec<i64>> = self.gram.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let enumerator = ShortVectors::new(&neg);
        Ok(enumerator.with_norm(-target))
    }

    /// Saturated basis of `{n : (n, v) = 0}`.
    pub fn orthogonal_complement(&self, v: &LatticeVector) -> Result<Sublattice> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        let row = self.pairing_row(v)?;
        let kernel = linalg::integer_kernel(&linalg::to_big(&[row]), self.rank());
        let generators = kernel.iter().map(|r| LatticeVector(big_row_to_i64(r))).collect();
        Sublattice::new(self.clone(), generators)
    }

    /// Invariant factors (> 1) of `self / sub`.
    pub fn smith_quotient(&self, sub: &Sublattice) -> Result<Vec<u64>> {
        Ok(QuotientMap::new(self, sub)?.factors)
    }
}

pub fn is_primitive(v: &LatticeVector) -> Result<bool> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.content() == 1)
}

pub(crate) fn big_row_to_i64(row: &[BigInt]) -> Vec<i64> {
    row.iter().map(|x| x.to_i64().expect("coordinate exceeds i64")).collect()
}

/// The standard lattices this crate knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardLattice {
    /// Hyperbolic plane.
    H,
    /// Negative E8.
    E8Neg,
    /// `-2 * Id_k`.
    MinusTwoId(usize),
    /// The Kummer lattice spanned by the 16 exceptional classes and half-sums.
    KummerPi,
    /// `3H + E8(-1) + E8(-1)`.
    K3,
    /// Negative A2, the smallest lattice with odd pairings between roots.
    A2Neg,
}

impl FromStr for StandardLattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let parsed = match lower.as_str() {
            "h" => Some(Self::H),
            "e8neg" | "e8(-1)" => Some(Self::E8Neg),
            "kummerpi" | "pi" => Some(Self::KummerPi),
            "k3" => Some(Self::K3),
            "a2neg" | "a2(-1)" => Some(Self::A2Neg),
            _ => lower
                .strip_prefix("minustwoid")
                .map(|k| k.trim_start_matches('(').trim_end_matches(')'))
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(Self::MinusTwoId),
        };
        parsed.ok_or_else(|| Error::UnknownLattice(s.to_string()))
    }
}

impl fmt::Display for StandardLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::H => write!(f, "H"),
            Self::E8Neg => write!(f, "E8neg"),
            Self::MinusTwoId(k) => write!(f, "MinusTwoId({k})"),
            Self::KummerPi => write!(f, "KummerPi"),
            Self::K3 => write!(f, "K3"),
            Self::A2Neg => write!(f, "A2neg"),
        }
    }
}

// Bourbaki numbering: chain 1-3-4-5-6-7-8 with 2 attached to 4.
const E8_EDGES: [(usize, usize); 7] = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];

pub fn make_standard(name: StandardLattice) -> Result<Lattice> {
    match name {
        StandardLattice::H => Lattice::with_labels(vec![vec![0, 1], vec![1, 0]], vec!["u".into(), "v".into()]),
        StandardLattice::E8Neg => {
            let mut gram = vec![vec![0; 8]; 8];
            for (i, row) in gram.iter_mut().enumerate() {
                row[i] = -2;
            }
            for &(a, b) in &E8_EDGES {
                gram[a][b] = 1;
                gram[b][a] = 1;
            }
            Lattice::with_labels(gram, (1..=8).map(|i| format!("a{i}")).collect())
        }
        StandardLattice::MinusTwoId(0) => Err(Error::UnknownLattice("MinusTwoId(0)".into())),
        StandardLattice::MinusTwoId(k) => {
            let gram = (0..k).map(|i| (0..k).map(|j| if i == j { -2 } else { 0 }).collect()).collect();
            Lattice::with_labels(gram, (1..=k).map(|i| format!("e{i}")).collect())
        }
        StandardLattice::KummerPi => Ok(kummer::KummerLattice::build()?.lattice),
        StandardLattice::K3 => {
            let h = make_standard(StandardLattice::H)?;
            let e8 = make_standard(StandardLattice::E8Neg)?;
            Ok(h.direct_sum(&h).direct_sum(&h).direct_sum(&e8).direct_sum(&e8))
        }
        StandardLattice::A2Neg => Lattice::with_labels(vec![vec![-2, -1], vec![-1, -2]], vec!["e1".into(), "s".into()]),
    }
}

/// A finitely generated subgroup of an ambient lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sublattice {
    ambient: Lattice,
    generators: Vec<LatticeVector>,
}

impl Sublattice {
    pub fn new(ambient: Lattice, generators: Vec<LatticeVector>) -> Result<Self> {
        for g in &generators {
            ambient.check(g)?;
        }
        Ok(Self { ambient, generators })
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    fn big_rows(&self) -> linalg::IntMatrix {
        linalg::to_big(&self.generators.iter().map(|g| g.0.clone()).collect::<Vec<_>>())
    }

    pub fn rank(&self) -> usize {
        linalg::rank(&self.big_rows())
    }

    /// Canonical (Hermite) basis; two sublattices are equal iff these agree.
    pub fn canonical_basis(&self) -> Vec<LatticeVector> {
        linalg::row_basis(&self.big_rows()).iter().map(|r| LatticeVector(big_row_to_i64(r))).collect()
    }

    /// The restricted form on a basis of the sublattice. May be degenerate.
    pub fn restricted_lattice(&self) -> Result<Lattice> {
        let basis = self.canonical_basis();
        let mut gram = vec![vec![0; basis.len()]; basis.len()];
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                gram[i][j] = self.ambient.inner_product(&basis[i], &basis[j])?;
            }
        }
        Lattice::new(gram)
    }

    /// True iff the sublattice equals its saturation `(sub ⊗ Q) ∩ ambient`.
    pub fn is_saturated(&self) -> bool {
        linalg::smith(&self.big_rows()).invariants.iter().all(num_traits::One::is_one)
    }
}

/// Projection of a lattice onto its finite quotient by a full-rank sublattice.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    /// Invariant factors greater than one.
    pub factors: Vec<u64>,
    transform: linalg::IntMatrix,
    skip: usize,
}

impl QuotientMap {
    pub fn new(ambient: &Lattice, sub: &Sublattice) -> Result<Self> {
        let n = ambient.rank();
        if sub.ambient.rank() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sub.ambient.rank() });
        }
        let s = linalg::smith(&sub.big_rows());
        if s.invariants.len() != n {
            return Err(Error::NotFullRank { rank: s.invariants.len(), ambient: n });
        }
        let skip = s.invariants.iter().take_while(|d| num_traits::One::is_one(*d)).count();
        let factors = s.invariants[skip..].iter().map(|d| d.to_u64().expect("invariant factor exceeds u64")).collect();
        Ok(Self { factors, transform: s.col_transform, skip })
    }

    /// Image of `v` in `⊕ Z/d_j`, one residue per factor in [`Self::factors`].
    pub fn project(&self, v: &LatticeVector) -> Result<Vec<u64>> {
        let n = self.transform.len();
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(self
            .factors
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                let col = self.skip + k;
                let image: BigInt = (0..n).map(|i| &self.transform[i][col] * v.0[i]).sum();
                image.mod_floor(&BigInt::from(d)).to_u64().unwrap()
            })
            .collect())
    }
}

/// Fincke-Pohst enumeration for a positive definite integer form.
///
/// The form is rewritten as `Q(x) = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)^2` with
/// exact rational coefficients; coordinates are fixed from last to first.
struct ShortVectors {
    n: usize,
    q: Vec<Vec<BigRational>>,
}

#[derive(Clone)]
struct Partial {
    level: usize,
    coords: Vec<i64>,
    remaining: BigRational,
}

impl ShortVectors {
    fn new(form: &[Vec<i64>]) -> Self {
        let n = form.len();
        let mut q: Vec<Vec<BigRational>> =
            form.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        for i in 0..n {
            for j in i + 1..n {
                q[j][i] = q[i][j].clone();
                q[i][j] = &q[i][j] / &q[i][i];
            }
            for k in i + 1..n {
                for l in k..n {
                    let d = &q[k][i] * &q[i][l];
                    q[k][l] -= d;
                }
            }
        }
        Self { n, q }
    }

    fn centre(&self, i: usize, coords: &[i64]) -> BigRational {
        (i + 1..self.n)
            .filter(|&j| coords[j] != 0)
            .map(|j| &self.q[i][j] * BigRational::from_integer(coords[j].into()))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Integer interval of `x` with `q_ii (x + u)^2 <= remaining`.
    fn range(&self, i: usize, u: &BigRational, remaining: &BigRational) -> (i64, i64) {
        let qi = &self.q[i][i];
        let fits = |x: i64| {
            let y = BigRational::from_integer(x.into()) + u;
            qi * &y * &y <= *remaining
        };
        let c = -u.to_f64().unwrap_or(0.0);
        let r = (remaining / qi).to_f64().unwrap_or(0.0).max(0.0).sqrt();
        let mut lo = (c - r).floor() as i64 - 1;
        let mut hi = (c + r).ceil() as i64 + 1;
        while lo <= hi && !fits(lo) {
            lo += 1;
        }
        while hi >= lo && !fits(hi) {
            hi -= 1;
        }
        (lo, hi)
    }

    fn children(&self, p: &Partial) -> Vec<Partial> {
        let i = p.level - 1;
        let u = self.centre(i, &p.coords);
        let (lo, hi) = self.range(i, &u, &p.remaining);
        (lo..=hi)
            .map(|x| {
                let y = BigRational::from_integer(x.into()) + &u;
                let mut coords = p.coords.clone();
                coords[i] = x;
                Partial { level: i, coords, remaining: &p.remaining - &self.q[i][i] * &y * &y }
            })
            .collect()
    }

    fn descend(&self, p: Partial, out: &mut Vec<LatticeVector>) {
        if p.level == 0 {
            if p.remaining.is_zero() && p.coords.iter().any(|&c| c != 0) {
                out.push(LatticeVector(p.coords));
            }
            return;
        }
        for child in self.children(&p) {
            self.descend(child, out);
        }
    }

    fn with_norm(&self, norm: i64) -> Vec<LatticeVector> {
        let root =
            Partial { level: self.n, coords: vec![0; self.n], remaining: BigRational::from_integer(norm.into()) };
        // Split the top two levels into independent subtrees.
        let mut frontier = vec![root];
        for _ in 0..2.min(self.n) {
            frontier = frontier.iter().flat_map(|p| self.children(p)).collect();
        }
        let mut found: Vec<LatticeVector> = frontier
            .into_par_iter()
            .flat_map_iter(|p| {
                let mut out = Vec::new();
                self.descend(p, &mut out);
                out
            })
            .collect();
        found.sort();
        found
    }
}
