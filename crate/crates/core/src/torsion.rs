//! Torsion graphs of horizontal divisors on a Jacobian elliptic fibration.
//!
//! The restriction `η*` to the generic fibre kills exactly the span of the
//! singular-fibre components. For multisections `M_i`, `M_j` of fibre degrees
//! `d_i`, `d_j`, the degree-zero class `d_j M_i - d_i M_j` can only restrict to
//! a torsion point if it lies in the rational span of that kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibration::FibrationSearch;
use crate::kummer::KummerLattice;
use crate::lattice::{Lattice, LatticeVector};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub struct FibrationPicardModel {
    ambient: Lattice,
    multisections: Vec<LatticeVector>,
    fiber: LatticeVector,
    kernel: Vec<LatticeVector>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    ambient: Lattice,
    multisections: Vec<LatticeVector>,
    fiber: LatticeVector,
    kernel: Vec<LatticeVector>,
}

impl TryFrom<RawModel> for FibrationPicardModel {
    type Error = Error;

    fn try_from(r: RawModel) -> Result<Self> {
        FibrationPicardModel::new(r.ambient, r.multisections, r.fiber, r.kernel)
    }
}

impl From<FibrationPicardModel> for RawModel {
    fn from(m: FibrationPicardModel) -> Self {
        RawModel { ambient: m.ambient, multisections: m.multisections, fiber: m.fiber, kernel: m.kernel }
    }
}

fn big_rows(vs: &[LatticeVector]) -> linalg::IntMatrix {
    linalg::to_big(&vs.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
}

impl FibrationPicardModel {
    pub fn new(
        ambient: Lattice,
        multisections: Vec<LatticeVector>,
        fiber: LatticeVector,
        kernel: Vec<LatticeVector>,
    ) -> Result<Self> {
        let n = ambient.rank();
        for v in multisections.iter().chain(kernel.iter()).chain(std::iter::once(&fiber)) {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        for (i, m) in multisections.iter().enumerate() {
            let d = ambient.inner_product(m, &fiber)?;
            if d < 1 {
                return Err(Error::InvalidModel(format!("multisection {i} has fibre degree {d}")));
            }
        }
        if linalg::rank(&big_rows(&multisections)) != multisections.len() {
            return Err(Error::InvalidModel("multisections are linearly dependent".into()));
        }
        Ok(Self { ambient, multisections, fiber, kernel })
    }

    pub fn len(&self) -> usize {
        self.multisections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisections.is_empty()
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn multisections(&self) -> &[LatticeVector] {
        &self.multisections
    }

    pub fn fiber(&self) -> &LatticeVector {
        &self.fiber
    }

    pub fn kernel(&self) -> &[LatticeVector] {
        &self.kernel
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.ambient.inner_product(&self.multisections[i], &self.fiber).expect("validated at construction")
    }

    pub fn eta_kernel_rank(&self) -> usize {
        linalg::rank(&big_rows(&self.kernel))
    }

    /// `d_j M_i - d_i M_j`
    pub fn difference_class(&self, i: usize, j: usize) -> Result<LatticeVector> {
        for &k in &[i, j] {
            if k >= self.len() {
                return Err(Error::IndexOutOfRange { index: k, len: self.len() });
            }
        }
        if i == j {
            return Err(Error::SameIndex(i));
        }
        let (di, dj) = (self.degree(i), self.degree(j));
        Ok(self.multisections[i].scale(dj).add_scaled(-di, &self.multisections[j]))
    }

    /// Whether `η*[M_ij]` can be torsion.
    pub fn torsion_possible(&self, i: usize, j: usize) -> Result<bool> {
        let diff = self.difference_class(i, j)?;
        let v = linalg::to_big(&[diff.0]).pop().expect("one row");
        Ok(linalg::in_rational_span(&big_rows(&self.kernel), &v))
    }

    pub fn torsion_graph(&self) -> TorsionGraph {
        let n = self.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.torsion_possible(i, j).expect("indices in range") {
                    edges.push((i, j));
                }
            }
        }
        TorsionGraph { vertices: n, edges }
    }
}

/// The 16 exceptional curves of the Kummer surface as multisections of the
/// fibration found by the search, with all singular fibres irreducible, so
/// the `η*` kernel is spanned by the fibre class alone.
pub fn kummer_exceptional_model(coeff_bound: i64) -> Result<FibrationPicardModel> {
    let kummer = KummerLattice::build()?;
    let search = FibrationSearch::new(kummer.lattice.clone(), Some(kummer.code_projection()))?;
    let cert = search.run_search(coeff_bound)?;
    let class = search.build_fibration_class(&cert.x)?;
    let multisections = kummer.exceptional.iter().map(|d| class.pic.embed(d)).collect();
    FibrationPicardModel::new(class.pic.lattice.clone(), multisections, class.e.clone(), vec![class.e])
}

/// A simple undirected graph on `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionGraph {
    pub vertices: usize,
    /// Sorted pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

impl TorsionGraph {
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("loop at vertex {a}")));
            }
            if a.max(b) >= vertices {
                return Err(Error::IndexOutOfRange { index: a.max(b), len: vertices });
            }
            out.push((a.min(b), a.max(b)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Self { vertices, edges: out })
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.degrees().into_iter().min()
    }

    pub fn is_connected(&self) -> Result<bool> {
        if self.vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut uf = UnionFind::new(self.vertices);
        let merges = self.edges.iter().filter(|&&(a, b)| uf.union(a, b)).count();
        Ok(merges == self.vertices - 1)
    }

    /// Largest BFS distance; `None` if disconnected.
    pub fn diameter(&self) -> Result<Option<usize>> {
        if self.vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        let adj = self.adjacency();
        let mut diameter = 0;
        for s in 0..self.vertices {
            let mut dist = vec![usize::MAX; self.vertices];
            dist[s] = 0;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                }
            }
            match dist.iter().max() {
                Some(&usize::MAX) => return Ok(None),
                Some(&d) => diameter = diameter.max(d),
                None => {}
            }
        }
        Ok(Some(diameter))
    }

    pub fn diameter_at_most(&self, k: usize) -> Result<bool> {
        Ok(self.diameter()?.is_some_and(|d| d <= k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphVerdict {
    Connected,
    Unknown,
}

/// Connectivity of the intersection graph of the preimage components.
///
/// Needs a connected torsion graph, irreducible preimages of each component,
/// and the large-prime threshold for intersecting preimages, which is an
/// assumption rather than something computed here.
pub fn preimage_graph_verdict(
    torsion_connected: bool,
    components_irreducible: bool,
    threshold_assumed: bool,
) -> GraphVerdict {
    if torsion_connected && components_irreducible && threshold_assumed {
        GraphVerdict::Connected
    } else {
        GraphVerdict::Unknown
    }
}
