//! Pure and mixed many-qutrit states, the GHZ/cluster/graph reference states,
//! and expectation values of Heisenberg-Weyl tensor products.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::{multiply, Bipartition, HwMultiIndex, WeylOperator, Z3};
use crate::linalg::{digits, flat_index, hermitian_eigenvalues, is_hermitian, omega_pow, CMatrix, CVector, C64};

/// Largest site count for state vectors built by the named constructors.
pub const MAX_STATE_SITES: usize = 10;
/// Largest site count for the exhaustive `9^N` correlation scan.
pub const MAX_SCAN_SITES: usize = 5;

fn dim_of(sites: usize) -> usize {
    3usize.pow(sites as u32)
}

fn check_sites(sites: usize, limit: usize) -> Result<()> {
    if sites > limit {
        return Err(Error::DimensionGuard { sites, limit });
    }
    Ok(())
}

/// Unit vector in `(C^3)^{⊗N}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    sites: usize,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(sites: usize, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != dim_of(sites) {
            return Err(Error::DimensionMismatch {
                expected: dim_of(sites),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(PureState { sites, amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(sites: usize, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(sites, amplitudes / C64::new(norm, 0.0))
    }

    pub fn basis(sites: usize, index: usize) -> Result<Self> {
        let dim = dim_of(sites);
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(PureState { sites, amplitudes: v })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            sites: self.sites,
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// `self ⊗ other`, with `self` on the leading sites.
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            sites: self.sites + other.sites,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on `N` qutrits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    sites: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(sites: usize, matrix: CMatrix) -> Result<Self> {
        let rho = Self::new_unchecked(sites, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Only the shape is checked. Used for reconstructions from noisy data.
    pub fn new_unchecked(sites: usize, matrix: CMatrix) -> Result<Self> {
        let dim = dim_of(sites);
        if matrix.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(DensityMatrix { sites, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        if !is_hermitian(&self.matrix, 1e-12) {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = self.matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn maximally_mixed(sites: usize) -> Self {
        let dim = dim_of(sites);
        DensityMatrix {
            sites,
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    /// Convex combination `Σ q_i ρ_i`; weights are normalized.
    pub fn mixture(components: &[(f64, DensityMatrix)]) -> Result<Self> {
        let (_, first) = components.first().ok_or(Error::Empty("mixture"))?;
        let total: f64 = components.iter().map(|(q, _)| q).sum();
        if components.iter().any(|(q, _)| *q < 0.0) || total <= 0.0 {
            return Err(Error::InvalidState("mixture weights must be nonnegative".into()));
        }
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (q, rho) in components {
            if rho.sites != first.sites {
                return Err(Error::LengthMismatch {
                    left: first.sites,
                    right: rho.sites,
                });
            }
            m += &rho.matrix * C64::new(q / total, 0.0);
        }
        Ok(DensityMatrix {
            sites: first.sites,
            matrix: m,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)[0]
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Anything with a well-defined expectation value of a Weyl tensor product.
pub trait QuantumState {
    fn sites(&self) -> usize;

    /// `tr(ρ O†)`.
    fn trace_adjoint(&self, op: &WeylOperator) -> C64;

    fn to_density(&self) -> DensityMatrix;
}

impl QuantumState for PureState {
    fn sites(&self) -> usize {
        self.sites
    }

    fn trace_adjoint(&self, op: &WeylOperator) -> C64 {
        // ⟨ψ|O†|ψ⟩ = conj ⟨ψ|O|ψ⟩
        op.sandwich(self.as_slice()).conj()
    }

    fn to_density(&self) -> DensityMatrix {
        self.density()
    }
}

impl QuantumState for DensityMatrix {
    fn sites(&self) -> usize {
        self.sites
    }

    fn trace_adjoint(&self, op: &WeylOperator) -> C64 {
        op.trace_with_adjoint(&self.matrix)
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// Correlation-tensor entry `T_idx = tr(ρ O_idx†)`. Its modulus is `|⟨O_idx⟩|`.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, idx: &HwMultiIndex) -> Result<C64> {
    if idx.len() != state.sites() {
        return Err(Error::DimensionMismatch {
            expected: state.sites(),
            found: idx.len(),
        });
    }
    Ok(state.trace_adjoint(&WeylOperator::new(idx)))
}

/// `(|0…0⟩ + |1…1⟩ + |2…2⟩)/√3`.
pub fn ghz_state(sites: usize) -> Result<PureState> {
    if sites < 2 {
        return Err(Error::InvalidState(format!(
            "GHZ state needs at least 2 sites, got {sites}"
        )));
    }
    check_sites(sites, MAX_STATE_SITES)?;
    let mut v = CVector::zeros(dim_of(sites));
    let amp = C64::new(1.0 / 3f64.sqrt(), 0.0);
    for i in 0..3 {
        v[flat_index(&vec![i; sites])] = amp;
    }
    PureState::new(sites, v)
}

/// `(1/3) Σ_{i,j} ω^{ij} |i j i j⟩`.
pub fn cluster_state_4() -> PureState {
    let mut v = CVector::zeros(81);
    for i in 0..3 {
        for j in 0..3 {
            v[flat_index(&[i, j, i, j])] = omega_pow((i * j) as i64) / 3.0;
        }
    }
    PureState::new(4, v).expect("cluster state is normalized")
}

/// Generalized controlled-Z on two qutrits, basis index `3·control + target`.
pub fn control_z() -> CMatrix {
    let diag = [0, 0, 0, 0, 1, 2, 0, 2, 1].map(omega_pow);
    CMatrix::from_diagonal(&CVector::from_column_slice(&diag))
}

/// Simple undirected graph; vertices are 0-based internally and 1-based in text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {}", u + 1)));
            }
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {}-{} outside {vertices} vertices",
                    u + 1,
                    v + 1
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { vertices, edges: set })
    }

    /// Parses `"1-2,2-3,3-4"` on the given number of vertices.
    pub fn parse(text: &str, vertices: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = part
                .split_once('-')
                .ok_or_else(|| Error::InvalidGraph(format!("edge {part:?} is not of the form u-v")))?;
            let parse = |s: &str| -> Result<usize> {
                let v: usize = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidGraph(format!("bad vertex {s:?}")))?;
                v.checked_sub(1)
                    .ok_or_else(|| Error::InvalidGraph("vertices are numbered from 1".into()))
            };
            edges.push((parse(a)?, parse(b)?));
        }
        Graph::new(vertices, &edges)
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// Image of the graph under the vertex map `v ↦ perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Graph {
        let edges: Vec<(usize, usize)> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::new(self.vertices, &edges).expect("a permutation preserves simplicity")
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges().map(|(u, v)| format!("{}-{}", u + 1, v + 1)).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The six connected four-vertex graphs with at least three edges, numbered 1–6:
/// path, star, cycle, triangle with a leg, cycle with a diagonal, complete.
pub fn canonical_graphs() -> Vec<(&'static str, Graph)> {
    let g = |s: &str| Graph::parse(s, 4).expect("static edge list");
    vec![
        ("path", g("1-2,2-3,3-4")),
        ("star", g("1-2,1-3,1-4")),
        ("cycle", g("1-2,2-3,3-4,4-1")),
        ("triangle+leg", g("1-2,2-3,1-3,3-4")),
        ("cycle+diagonal", g("1-2,2-3,3-4,4-1,1-3")),
        ("complete", g("1-2,1-3,1-4,2-3,2-4,3-4")),
    ]
}

/// `Π_{edges} Ch_1^{(u,v)} |+⟩^{⊗N}`.
pub fn graph_state(graph: &Graph) -> Result<PureState> {
    let sites = graph.vertices();
    if sites == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    check_sites(sites, MAX_STATE_SITES)?;
    let dim = dim_of(sites);
    let cz = control_z();
    let mut v = CVector::from_element(dim, C64::new(1.0 / (dim as f64).sqrt(), 0.0));
    for (u, w) in graph.edges() {
        for (j, amp) in v.iter_mut().enumerate() {
            let d = digits(j, sites);
            let k = 3 * d[u] + d[w];
            *amp *= cz[(k, k)];
        }
    }
    PureState::normalized(sites, v)
}

/// A multi-index whose mean value has modulus 1 on a given state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectCorrelation {
    pub idx: HwMultiIndex,
    /// `tr(ρ O†)`.
    pub value: C64,
}

/// Exhaustive scan of all `9^N - 1` nontrivial multi-indices for `|T| ≥ 1 - tol`.
pub fn perfect_correlations<S: QuantumState + Sync + ?Sized>(state: &S, tol: f64) -> Result<Vec<PerfectCorrelation>> {
    let sites = state.sites();
    check_sites(sites, MAX_SCAN_SITES)?;
    let total = 9usize.pow(sites as u32);
    let mut found: Vec<PerfectCorrelation> = (1..total)
        .into_par_iter()
        .filter_map(|flat| {
            let idx = HwMultiIndex::from_flat(flat, sites);
            let value = state.trace_adjoint(&WeylOperator::new(&idx));
            (value.norm() >= 1.0 - tol).then_some(PerfectCorrelation { idx, value })
        })
        .collect();
    found.sort_by(|a, b| a.idx.cmp(&b.idx));
    Ok(found)
}

/// Stabilizer element of a graph state: `tr(ρ O_idx†) = ω^phase`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerElement {
    pub idx: HwMultiIndex,
    pub phase: Z3,
}

/// Generator `X_v Π_{u ~ v} Z_u` of a graph state, as a multi-index (`X = h_6`, `Z = h_1`).
pub fn graph_generator(graph: &Graph, vertex: usize) -> HwMultiIndex {
    let digits: Vec<u8> = (0..graph.vertices())
        .map(|u| {
            if u == vertex {
                6
            } else if graph.has_edge(u, vertex) {
                1
            } else {
                0
            }
        })
        .collect();
    HwMultiIndex::from_digits(&digits).expect("labels in range")
}

/// The `3^N` stabilizer elements obtained as products of generator powers.
pub fn stabilizer_group(graph: &Graph) -> Vec<StabilizerElement> {
    let n = graph.vertices();
    let gens: Vec<HwMultiIndex> = (0..n).map(|v| graph_generator(graph, v)).collect();
    let mut out = Vec::with_capacity(dim_of(n));
    for flat in 0..dim_of(n) {
        // S = ω^c O with S|ψ⟩ = |ψ⟩, so ⟨O⟩ = ω^{-c} and tr(ρ O†) = ω^c.
        let mut phase = Z3::ZERO;
        let mut acc = HwMultiIndex::identity(n);
        for (v, power) in digits(flat, n).into_iter().enumerate() {
            for _ in 0..power {
                let (c, next) = multiply(&acc, &gens[v]).expect("equal lengths");
                phase += c;
                acc = next;
            }
        }
        out.push(StabilizerElement { idx: acc, phase });
    }
    out.sort_by(|a, b| a.idx.cmp(&b.idx));
    out
}

pub(crate) fn gaussian_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    CVector::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub(crate) fn random_unit(rng: &mut impl Rng, sites: usize) -> PureState {
    let v = gaussian_vector(rng, dim_of(sites));
    PureState::normalized(sites, v).expect("gaussian vector is nonzero")
}

/// Haar-random pure state from normalized complex Gaussian amplitudes.
pub fn random_pure(sites: usize, seed: u64) -> PureState {
    random_unit(&mut ChaCha8Rng::seed_from_u64(seed), sites)
}

/// Random mixed state `G G† / tr(G G†)` with `G` a `3^N × rank` Ginibre matrix.
pub fn random_density(sites: usize, rank: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = dim_of(sites);
    let g = CMatrix::from_fn(dim, rank.max(1), |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    let m = m / tr;
    // exact Hermitian symmetry
    let m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix { sites, matrix: m }
}

/// Product pure state across a bipartition.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductStateSpec {
    pub cut: Bipartition,
    pub factor_a: PureState,
    pub factor_b: PureState,
}

impl ProductStateSpec {
    pub fn new(cut: Bipartition, factor_a: PureState, factor_b: PureState) -> Result<Self> {
        let (na, nb) = (cut.side_a().len(), cut.side_b().len());
        if factor_a.sites() != na {
            return Err(Error::DimensionMismatch {
                expected: na,
                found: factor_a.sites(),
            });
        }
        if factor_b.sites() != nb {
            return Err(Error::DimensionMismatch {
                expected: nb,
                found: factor_b.sites(),
            });
        }
        Ok(ProductStateSpec {
            cut,
            factor_a,
            factor_b,
        })
    }

    /// Full state on all sites, respecting the original site order.
    pub fn to_pure(&self) -> PureState {
        let amps = assemble_product(&self.cut, self.factor_a.as_slice(), self.factor_b.as_slice());
        PureState {
            sites: self.cut.sites(),
            amplitudes: amps,
        }
    }
}

pub(crate) fn assemble_product(cut: &Bipartition, a: &[C64], b: &[C64]) -> CVector {
    let sites = cut.sites();
    let (sa, sb) = (cut.side_a(), cut.side_b());
    CVector::from_fn(dim_of(sites), |j, _| {
        let d = digits(j, sites);
        let ia = flat_index(&sa.iter().map(|&s| d[s]).collect::<Vec<_>>());
        let ib = flat_index(&sb.iter().map(|&s| d[s]).collect::<Vec<_>>());
        a[ia] * b[ib]
    })
}

pub fn random_product(cut: &Bipartition, seed: u64) -> ProductStateSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor_a = random_unit(&mut rng, cut.side_a().len());
    let factor_b = random_unit(&mut rng, cut.side_b().len());
    ProductStateSpec {
        cut: *cut,
        factor_a,
        factor_b,
    }
}

/// Restrictions of `idx` to the two sides of `cut`.
pub fn split_index(idx: &HwMultiIndex, cut: &Bipartition) -> (HwMultiIndex, HwMultiIndex) {
    (idx.restrict(&cut.side_a()), idx.restrict(&cut.side_b()))
}
