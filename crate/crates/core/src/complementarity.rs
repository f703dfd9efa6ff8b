//! Complementarity relations between Heisenberg-Weyl observables: the
//! pairwise bound for non-commuting operators, the 5/4 sets of seven, and the
//! global two-qutrit bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::hw::{commutation_phase, hw_matrix, HwLabel, HwMultiIndex, WeylOperator, Z3};
use crate::linalg::CMatrix;
use crate::optimize::{maximize, MaximizationResult, OptimizerConfig};
use crate::states::{DensityMatrix, QuantumState};
use crate::{Error, Result};

/// Duplicate-free list of equal-length multi-indices with cached pairwise phases.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    ops: Vec<HwMultiIndex>,
    phases: Vec<Vec<Z3>>,
}

impl OperatorSet {
    pub fn new(ops: Vec<HwMultiIndex>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::Empty("operator set"));
        }
        for (i, a) in ops.iter().enumerate() {
            if ops[..i].contains(a) {
                return Err(Error::DuplicateOperator(a.to_string()));
            }
        }
        let phases = ops
            .iter()
            .map(|a| ops.iter().map(|b| commutation_phase(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(OperatorSet { ops, phases })
    }

    pub fn ops(&self) -> &[HwMultiIndex] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn sites(&self) -> usize {
        self.ops[0].len()
    }

    pub fn phase(&self, i: usize, j: usize) -> Z3 {
        self.phases[i][j]
    }

    pub fn is_mutually_noncommuting(&self) -> bool {
        (0..self.len()).all(|i| (i + 1..self.len()).all(|j| !self.phases[i][j].is_zero()))
    }

    pub fn is_mutually_commuting(&self) -> bool {
        self.phases.iter().flatten().all(|p| p.is_zero())
    }

    /// `Σ_i |⟨O_i⟩|²` on a state.
    pub fn sum_squared<S: QuantumState + ?Sized>(&self, state: &S) -> Result<f64> {
        if state.sites() != self.sites() {
            return Err(Error::LengthMismatch {
                left: self.sites(),
                right: state.sites(),
            });
        }
        Ok(self
            .ops
            .iter()
            .map(|o| state.trace_adjoint(&WeylOperator::new(o)).norm_sqr())
            .sum())
    }
}

/// Largest `Σ_i |⟨O_i⟩|²` over pure states found by multi-start ascent.
pub fn max_sum_squared(set: &OperatorSet, cfg: &OptimizerConfig) -> MaximizationResult {
    let terms: Vec<(f64, WeylOperator)> = set.ops.iter().map(|o| (1.0, WeylOperator::new(o))).collect();
    maximize(set.sites(), &terms, cfg)
}

/// Maximum of `|⟨a⟩|² + |⟨b⟩|²` for a non-commuting pair.
pub fn pairwise_bound_check(a: &HwMultiIndex, b: &HwMultiIndex, cfg: &OptimizerConfig) -> Result<MaximizationResult> {
    if commutation_phase(a, b)?.is_zero() {
        return Err(Error::CommutingPair(a.to_string(), b.to_string()));
    }
    Ok(max_sum_squared(&OperatorSet::new(vec![a.clone(), b.clone()])?, cfg))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairScanReport {
    pub pairs: usize,
    pub restarts: usize,
    pub max_value: f64,
    pub worst_pair: (HwMultiIndex, HwMultiIndex),
    /// Pairs whose maximum exceeds `1 + tol`.
    pub exceeding: Vec<(HwMultiIndex, HwMultiIndex, f64)>,
}

/// Every unordered non-commuting pair among the nontrivial operators on `sites` qutrits.
pub fn noncommuting_pairs(sites: usize) -> Vec<(HwMultiIndex, HwMultiIndex)> {
    let ops: Vec<HwMultiIndex> = HwMultiIndex::nontrivial(sites).collect();
    let mut out = Vec::new();
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            if !commutation_phase(a, b).expect("equal lengths").is_zero() {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Runs [`pairwise_bound_check`] on each pair and collects the extremes.
pub fn scan_pairs(pairs: &[(HwMultiIndex, HwMultiIndex)], cfg: &OptimizerConfig, tol: f64) -> Result<PairScanReport> {
    if pairs.is_empty() {
        return Err(Error::Empty("pair list"));
    }
    let values = pairs
        .par_iter()
        .map(|(a, b)| pairwise_bound_check(a, b, cfg).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;
    let (worst, max_value) =
        values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        );
    let exceeding = pairs
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v > 1.0 + tol)
        .map(|((a, b), &v)| (a.clone(), b.clone(), v))
        .collect();
    Ok(PairScanReport {
        pairs: pairs.len(),
        restarts: cfg.restarts.max(1),
        max_value,
        worst_pair: pairs[worst].clone(),
        exceeding,
    })
}

/// Counts of pairwise non-commuting two-qutrit sets of one size under several
/// notions of "same set".
#[derive(Clone, Debug, Serialize)]
pub struct SetEnumeration {
    pub size: usize,
    /// Sets of distinct labels.
    pub raw: u64,
    /// Raw sets modulo daggering every member at once.
    pub dagger_quotient: u64,
    /// Sets of operators modulo phase and inverse, i.e. of `{O, O†}` classes.
    pub projective: u64,
    /// Projective sets that admit no further non-commuting member.
    pub maximal: u64,
    /// One raw representative per projective set, in lexicographic order.
    #[serde(skip)]
    pub sets: Vec<OperatorSet>,
}

impl SetEnumeration {
    /// Names of the counts equal to `target`.
    pub fn matches(&self, target: u64) -> Vec<&'static str> {
        [
            ("raw", self.raw),
            ("dagger_quotient", self.dagger_quotient),
            ("projective", self.projective),
            ("maximal", self.maximal),
        ]
        .into_iter()
        .filter(|(_, c)| *c == target)
        .map(|(n, _)| n)
        .collect()
    }
}

/// Default ceiling on visited partial sets.
pub const DEFAULT_SEARCH_GUARD: u64 = 50_000_000;

/// Exhaustive clique search over the 80 nontrivial two-qutrit labels.
pub fn enumerate_noncommuting_sets(size: usize, guard: u64) -> Result<SetEnumeration> {
    if size == 0 || size > 8 {
        return Err(Error::InvalidCriterion(format!("set size {size} outside 1..=8")));
    }
    let ops: Vec<HwMultiIndex> = HwMultiIndex::nontrivial(2).collect();
    let n = ops.len();
    let index_of = |o: &HwMultiIndex| ops.iter().position(|p| p == o).expect("nontrivial label");
    let dagger: Vec<usize> = ops.iter().map(|o| index_of(&o.dagger())).collect();
    let adjacency: Vec<u128> = ops
        .iter()
        .map(|a| {
            ops.iter().enumerate().fold(0u128, |m, (j, b)| {
                if commutation_phase(a, b).expect("equal lengths").is_zero() {
                    m
                } else {
                    m | 1 << j
                }
            })
        })
        .collect();
    let representative: u128 = (0..n).filter(|&i| i <= dagger[i]).fold(0, |m, i| m | 1 << i);

    let mut state = Walk {
        size,
        guard,
        adjacency: &adjacency,
        dagger: &dagger,
        representative,
        visited: 0,
        out: SetEnumeration {
            size,
            raw: 0,
            dagger_quotient: 0,
            projective: 0,
            maximal: 0,
            sets: Vec::new(),
        },
        members: Vec::with_capacity(size),
        found: Vec::new(),
    };
    state.extend((1u128 << n) - 1)?;
    let mut out = state.out;
    out.sets = state
        .found
        .into_iter()
        .map(|s| OperatorSet::new(s.into_iter().map(|i| ops[i].clone()).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(out)
}

struct Walk<'a> {
    size: usize,
    guard: u64,
    adjacency: &'a [u128],
    dagger: &'a [usize],
    representative: u128,
    visited: u64,
    out: SetEnumeration,
    members: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl Walk<'_> {
    fn extend(&mut self, candidates: u128) -> Result<()> {
        self.visited += 1;
        if self.visited > self.guard {
            return Err(Error::SearchGuard { limit: self.guard });
        }
        if self.members.len() == self.size {
            self.record();
            return Ok(());
        }
        let mut rest = candidates;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            self.members.push(i);
            self.extend(rest & self.adjacency[i])?;
            self.members.pop();
        }
        Ok(())
    }

    fn record(&mut self) {
        self.out.raw += 1;
        let mut daggered: Vec<usize> = self.members.iter().map(|&i| self.dagger[i]).collect();
        daggered.sort_unstable();
        if self.members <= daggered {
            self.out.dagger_quotient += 1;
        }
        if self.members.iter().all(|&i| self.representative >> i & 1 == 1) {
            self.out.projective += 1;
            let common = self.members.iter().fold(u128::MAX, |m, &i| m & self.adjacency[i]);
            if common == 0 {
                self.out.maximal += 1;
            }
            self.found.push(self.members.clone());
        }
    }
}

/// `Σ_{i,j=0}^{8} |⟨h_i ⊗ h_j⟩|²` for a two-qutrit state; equals `9 tr ρ²`.
pub fn global_bound_check<S: QuantumState + Sync + ?Sized>(state: &S) -> Result<f64> {
    if state.sites() != 2 {
        return Err(Error::LengthMismatch {
            left: 2,
            right: state.sites(),
        });
    }
    Ok(HwMultiIndex::all(2)
        .map(|o| state.trace_adjoint(&WeylOperator::new(&o)).norm_sqr())
        .sum())
}

/// `Σ_{i,j=0}^{2} |tr(ρ (h_1^i h_2^j)†)|²` for one qutrit; equals `3 tr ρ²`.
pub fn purity_fourier_sum(rho: &DensityMatrix) -> Result<f64> {
    if rho.sites() != 1 {
        return Err(Error::LengthMismatch {
            left: 1,
            right: rho.sites(),
        });
    }
    let clock = hw_matrix(HwLabel::new(1)?);
    let shift = hw_matrix(HwLabel::new(2)?);
    let mut total = 0.0;
    let mut ci = CMatrix::identity(3, 3);
    for _ in 0..3 {
        let mut sj = CMatrix::identity(3, 3);
        for _ in 0..3 {
            let op = &ci * &sj;
            total += (rho.matrix() * op.adjoint()).trace().norm_sqr();
            sj = &sj * &shift;
        }
        ci = &ci * &clock;
    }
    Ok(total)
}
