//! Quadratic entanglement criteria `Σ_t w_t |⟨O_t⟩|² ≤ bound` for states
//! separable across given cuts: construction, evaluation, numerical
//! certification of the separable bound, and search over perfect correlations.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hw::{cut_commutes, Bipartition, HwMultiIndex, WeylOperator};
use crate::linalg::C64;
use crate::optimize::{maximize_product, MaximizationResult, OptimizerConfig, SplitTerm};
use crate::states::{canonical_graphs, graph_state, perfect_correlations, split_index, QuantumState};
use crate::{Error, Result};

/// Restarts used by default for separable maxima.
pub const SEPARABLE_RESTARTS: usize = 100;

/// Slack allowed when comparing a numerical separable maximum with its bound.
pub const CERTIFY_TOL: f64 = 1e-6;

pub fn separable_config(seed: u64) -> OptimizerConfig {
    OptimizerConfig::default()
        .with_restarts(SEPARABLE_RESTARTS)
        .with_seed(seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(rename = "w")]
    pub weight: f64,
    pub idx: HwMultiIndex,
}

impl Term {
    pub fn new(weight: f64, idx: HwMultiIndex) -> Self {
        Term { weight, idx }
    }

    pub fn unit(idx: HwMultiIndex) -> Self {
        Term { weight: 1.0, idx }
    }
}

fn check_terms(terms: &[Term]) -> Result<usize> {
    let first = terms.first().ok_or(Error::Empty("criterion"))?;
    let sites = first.idx.len();
    for t in terms {
        if !(t.weight > 0.0 && t.weight.is_finite()) {
            return Err(Error::InvalidCriterion(format!("weight {} is not positive", t.weight)));
        }
        if t.idx.len() != sites {
            return Err(Error::LengthMismatch {
                left: sites,
                right: t.idx.len(),
            });
        }
    }
    Ok(sites)
}

/// Upper bound on the criterion over product states across `cut`, from
/// pairing terms that fail to cut-commute: a paired `(s, t)` contributes at
/// most `max(w_s, w_t)`, an unpaired term at most `w_t`. Minimized over all
/// pairings.
pub fn analytic_bound(terms: &[Term], cut: &Bipartition) -> Result<f64> {
    let sites = check_terms(terms)?;
    if cut.sites() != sites {
        return Err(Error::LengthMismatch {
            left: sites,
            right: cut.sites(),
        });
    }
    let n = terms.len();
    let mut pairable = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = !cut_commutes(&terms[i].idx, &terms[j].idx, cut)?;
            pairable[i][j] = p;
            pairable[j][i] = p;
        }
    }
    fn best(terms: &[Term], pairable: &[Vec<bool>], used: &mut Vec<bool>) -> f64 {
        let Some(i) = used.iter().position(|u| !u) else {
            return 0.0;
        };
        used[i] = true;
        let mut value = terms[i].weight + best(terms, pairable, used);
        for j in i + 1..terms.len() {
            if !used[j] && pairable[i][j] {
                used[j] = true;
                value = value.min(terms[i].weight.max(terms[j].weight) + best(terms, pairable, used));
                used[j] = false;
            }
        }
        used[i] = false;
        value
    }
    Ok(best(terms, &pairable, &mut vec![false; n]))
}

/// `Σ_t w_t |⟨O_t⟩|²`.
pub fn evaluate_terms<S: QuantumState + ?Sized>(terms: &[Term], state: &S) -> Result<f64> {
    let sites = check_terms(terms)?;
    if state.sites() != sites {
        return Err(Error::LengthMismatch {
            left: sites,
            right: state.sites(),
        });
    }
    Ok(terms
        .iter()
        .map(|t| t.weight * state.trace_adjoint(&WeylOperator::new(&t.idx)).norm_sqr())
        .sum())
}

/// Maximum over product states `ψ_A ⊗ ψ_B` across `cut`, which by convexity
/// is the maximum over all states separable across `cut`.
pub fn separable_max_terms(terms: &[Term], cut: &Bipartition, cfg: &OptimizerConfig) -> Result<MaximizationResult> {
    let sites = check_terms(terms)?;
    if cut.sites() != sites {
        return Err(Error::LengthMismatch {
            left: sites,
            right: cut.sites(),
        });
    }
    let split: Vec<SplitTerm> = terms
        .iter()
        .map(|t| {
            let (a, b) = split_index(&t.idx, cut);
            SplitTerm {
                weight: t.weight,
                side_a: WeylOperator::new(&a),
                side_b: WeylOperator::new(&b),
            }
        })
        .collect();
    Ok(maximize_product(cut, &split, cfg))
}

/// A criterion whose every excluded cut carries an analytic pairing certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CriterionFile", into = "CriterionFile")]
pub struct Criterion {
    terms: Vec<Term>,
    bound: f64,
    cuts_excluded: Vec<Bipartition>,
}

#[derive(Serialize, Deserialize)]
struct CriterionFile {
    terms: Vec<Term>,
    bound: f64,
    cuts: Vec<Vec<usize>>,
}

impl TryFrom<CriterionFile> for Criterion {
    type Error = Error;

    fn try_from(f: CriterionFile) -> Result<Self> {
        let sites = check_terms(&f.terms)?;
        let cuts = f
            .cuts
            .iter()
            .map(|c| Bipartition::from_one_based(sites, c))
            .collect::<Result<Vec<_>>>()?;
        Criterion::new(f.terms, f.bound, cuts)
    }
}

impl From<Criterion> for CriterionFile {
    fn from(c: Criterion) -> Self {
        CriterionFile {
            cuts: c.cuts_excluded.iter().map(|c| c.to_one_based()).collect(),
            terms: c.terms,
            bound: c.bound,
        }
    }
}

impl Criterion {
    /// Fails unless `analytic_bound ≤ bound` on every listed cut.
    pub fn new(terms: Vec<Term>, bound: f64, cuts_excluded: Vec<Bipartition>) -> Result<Self> {
        check_terms(&terms)?;
        let mut cuts = cuts_excluded;
        cuts.sort();
        cuts.dedup();
        for cut in &cuts {
            let b = analytic_bound(&terms, cut)?;
            if b > bound + 1e-12 {
                return Err(Error::InvalidCriterion(format!(
                    "cut {cut}: pairing certificate gives {b}, above the bound {bound}"
                )));
            }
        }
        Ok(Criterion {
            terms,
            bound,
            cuts_excluded: cuts,
        })
    }

    /// Excludes exactly the cuts on which the pairing certificate reaches `bound`.
    pub fn with_derived_cuts(terms: Vec<Term>, bound: f64) -> Result<Self> {
        let sites = check_terms(&terms)?;
        let mut cuts = Vec::new();
        for cut in Bipartition::all(sites) {
            if analytic_bound(&terms, &cut)? <= bound + 1e-12 {
                cuts.push(cut);
            }
        }
        Criterion::new(terms, bound, cuts)
    }

    /// Two unit-weight terms with bound 1 and derived cuts.
    pub fn pair(a: HwMultiIndex, b: HwMultiIndex) -> Result<Self> {
        Criterion::with_derived_cuts(vec![Term::unit(a), Term::unit(b)], 1.0)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn cuts_excluded(&self) -> &[Bipartition] {
        &self.cuts_excluded
    }

    pub fn sites(&self) -> usize {
        self.terms[0].idx.len()
    }

    pub fn excludes(&self, cut: &Bipartition) -> bool {
        self.cuts_excluded.contains(cut)
    }

    pub fn evaluate<S: QuantumState + ?Sized>(&self, state: &S) -> Result<f64> {
        evaluate_terms(&self.terms, state)
    }

    pub fn separable_max(&self, cut: &Bipartition, cfg: &OptimizerConfig) -> Result<MaximizationResult> {
        separable_max_terms(&self.terms, cut, cfg)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms)?;
        write!(f, " <= {}", self.bound)
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term]) -> fmt::Result {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            write!(f, " + ")?;
        }
        if t.weight != 1.0 {
            write!(f, "{}*", t.weight)?;
        }
        write!(f, "|<{}>|^2", t.idx)?;
    }
    Ok(())
}

/// A criterion as asserted, with the cuts it is claimed to exclude. Nothing
/// about the claim is assumed; [`CriterionClaim::audit`] checks it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionClaim {
    pub name: String,
    pub terms: Vec<Term>,
    pub bound: f64,
    pub claimed_cuts: Vec<Bipartition>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutAudit {
    pub cut: Bipartition,
    /// Some pair of terms fails to cut-commute.
    pub noncommuting_pair: bool,
    pub analytic_bound: f64,
    pub separable_max: f64,
    pub certified: bool,
}

impl CriterionClaim {
    pub fn evaluate<S: QuantumState + ?Sized>(&self, state: &S) -> Result<f64> {
        evaluate_terms(&self.terms, state)
    }

    /// Separable maximum on each claimed cut, against `bound + CERTIFY_TOL`.
    pub fn audit(&self, cfg: &OptimizerConfig) -> Result<Vec<CutAudit>> {
        self.claimed_cuts
            .iter()
            .map(|cut| {
                let noncommuting_pair = self.terms.iter().enumerate().any(|(i, a)| {
                    self.terms[i + 1..]
                        .iter()
                        .any(|b| !cut_commutes(&a.idx, &b.idx, cut).unwrap_or(true))
                });
                let separable_max = separable_max_terms(&self.terms, cut, cfg)?.value;
                Ok(CutAudit {
                    cut: *cut,
                    noncommuting_pair,
                    analytic_bound: analytic_bound(&self.terms, cut)?,
                    separable_max,
                    certified: separable_max <= self.bound + CERTIFY_TOL,
                })
            })
            .collect()
    }
}

/// Per-site measurement basis (1..=4), `None` where any basis will do.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SettingAssignment(pub Vec<Option<u8>>);

impl SettingAssignment {
    /// Every site label is the identity or diagonal in the assigned basis.
    pub fn measures(&self, idx: &HwMultiIndex) -> bool {
        idx.len() == self.0.len()
            && idx.labels().iter().zip(&self.0).all(|(l, s)| match l.mub() {
                None => true,
                Some(m) => *s == Some(m),
            })
    }

    fn joint(ops: &[&HwMultiIndex], sites: usize) -> Option<Self> {
        let mut settings = vec![None; sites];
        for op in ops {
            for (slot, l) in settings.iter_mut().zip(op.labels()) {
                match (l.mub(), *slot) {
                    (None, _) => {}
                    (Some(m), None) => *slot = Some(m),
                    (Some(m), Some(s)) if m == s => {}
                    _ => return None,
                }
            }
        }
        Some(SettingAssignment(settings))
    }
}

impl fmt::Display for SettingAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            match s {
                Some(m) => write!(f, "{m}")?,
                None => write!(f, "*")?,
            }
        }
        Ok(())
    }
}

/// One measurement series and the operators (by position) it establishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementSeries {
    pub setting: SettingAssignment,
    pub members: Vec<usize>,
}

/// Smallest split of `ops` into at most two jointly measurable groups, or
/// `None` if two product-MUB settings do not suffice.
pub fn measurement_series(ops: &[HwMultiIndex]) -> Option<Vec<MeasurementSeries>> {
    let sites = ops.first()?.len();
    if ops.iter().any(|o| o.len() != sites) || ops.len() > 20 {
        return None;
    }
    let all: Vec<&HwMultiIndex> = ops.iter().collect();
    if let Some(setting) = SettingAssignment::joint(&all, sites) {
        return Some(vec![MeasurementSeries {
            setting,
            members: (0..ops.len()).collect(),
        }]);
    }
    // op 0 always in the first group
    for mask in 0u32..(1 << (ops.len() - 1)) {
        let (mut first, mut second) = (vec![0], Vec::new());
        for i in 1..ops.len() {
            if mask >> (i - 1) & 1 == 1 {
                second.push(i);
            } else {
                first.push(i);
            }
        }
        let group = |ix: &[usize]| SettingAssignment::joint(&ix.iter().map(|&i| &ops[i]).collect::<Vec<_>>(), sites);
        if let (Some(a), Some(b)) = (group(&first), group(&second)) {
            return Some(vec![
                MeasurementSeries {
                    setting: a,
                    members: first,
                },
                MeasurementSeries {
                    setting: b,
                    members: second,
                },
            ]);
        }
    }
    None
}

/// Per-cut evidence from [`violates_for_all_cuts`].
#[derive(Clone, Debug, Serialize)]
pub struct CutWitness {
    pub cut: Bipartition,
    /// Position of the criterion used on this cut.
    pub criterion: usize,
    pub separable_max: f64,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViolationCertificate {
    pub violated: bool,
    pub values: Vec<f64>,
    pub witnesses: Vec<CutWitness>,
}

/// True iff every criterion is violated on `state` and every cut is excluded
/// by one of them with a numerically certified separable maximum.
pub fn violates_for_all_cuts<S: QuantumState + ?Sized>(
    criteria: &[Criterion],
    state: &S,
    cfg: &OptimizerConfig,
    tol: f64,
) -> Result<ViolationCertificate> {
    let first = criteria.first().ok_or(Error::Empty("criterion list"))?;
    let sites = first.sites();
    let mut witnesses = Vec::new();
    for cut in Bipartition::all(sites) {
        let k = criteria
            .iter()
            .position(|c| c.excludes(&cut))
            .ok_or(Error::CoverageGap(cut))?;
        let separable_max = criteria[k].separable_max(&cut, cfg)?.value;
        witnesses.push(CutWitness {
            cut,
            criterion: k,
            separable_max,
            certified: separable_max <= criteria[k].bound + CERTIFY_TOL,
        });
    }
    let values = criteria
        .iter()
        .map(|c| c.evaluate(state))
        .collect::<Result<Vec<f64>>>()?;
    let violated =
        criteria.iter().zip(&values).all(|(c, v)| *v > c.bound + tol) && witnesses.iter().all(|w| w.certified);
    Ok(ViolationCertificate {
        violated,
        values,
        witnesses,
    })
}

/// How the search reads cut coverage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageMode {
    /// Each cut is split by some pair among the three operators.
    #[default]
    PerTriple,
    /// Each cut is split by one of the two emitted pair criteria.
    PerPair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// A mean counts as unimodular when `|mean| ≥ 1 - tol`.
    pub tol: f64,
    pub mode: CoverageMode,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tol: 1e-9,
            mode: CoverageMode::PerTriple,
        }
    }
}

/// A triple `{base, partner1, partner2}` and its two pair criteria.
#[derive(Clone, Debug, Serialize)]
pub struct CriterionPair {
    pub base: HwMultiIndex,
    pub partners: [HwMultiIndex; 2],
    /// `tr(ρ O†)` for base, partner1, partner2.
    pub means: [C64; 3],
    pub criteria: [Criterion; 2],
    pub series: Vec<MeasurementSeries>,
    /// Cuts excluded by each pair criterion.
    pub coverage: [usize; 2],
    /// The two criteria alone exclude every cut.
    pub pairs_cover_all: bool,
}

impl CriterionPair {
    pub fn operators(&self) -> [&HwMultiIndex; 3] {
        [&self.base, &self.partners[0], &self.partners[1]]
    }

    /// Same base and same unordered partners.
    pub fn same_triple(&self, base: &HwMultiIndex, partners: &[HwMultiIndex; 2]) -> bool {
        &self.base == base
            && ((self.partners[0] == partners[0] && self.partners[1] == partners[1])
                || (self.partners[0] == partners[1] && self.partners[1] == partners[0]))
    }
}

/// Triples of perfectly correlated operators satisfying (i) unit-modulus
/// means, (ii) cut coverage per `cfg.mode`, and (iii) two measurement series.
/// Sorted by total pair coverage (descending), then by labels.
pub fn search_criteria<S: QuantumState + Sync + ?Sized>(state: &S, cfg: &SearchConfig) -> Result<Vec<CriterionPair>> {
    let corr = perfect_correlations(state, cfg.tol)?;
    if corr.is_empty() {
        return Err(Error::Empty("perfect-correlation list"));
    }
    let sites = state.sites();
    let cuts = Bipartition::all(sites);
    let full: u64 = (1u64 << cuts.len()) - 1;
    let n = corr.len();
    // bit k set when the pair fails to commute across cuts[k]
    let masks: Vec<Vec<u64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    cuts.iter().enumerate().fold(0u64, |m, (k, cut)| {
                        if cut_commutes(&corr[i].idx, &corr[j].idx, cut).expect("equal lengths") {
                            m
                        } else {
                            m | 1 << k
                        }
                    })
                })
                .collect()
        })
        .collect();

    let mut found: Vec<CriterionPair> = (0..n)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut local = Vec::new();
            for p in 0..n {
                for q in p + 1..n {
                    if p == b || q == b {
                        continue;
                    }
                    let pair_mask = masks[b][p] | masks[b][q];
                    let covered = match cfg.mode {
                        CoverageMode::PerTriple => pair_mask | masks[p][q],
                        CoverageMode::PerPair => pair_mask,
                    };
                    if covered != full {
                        continue;
                    }
                    let ops = [corr[b].idx.clone(), corr[p].idx.clone(), corr[q].idx.clone()];
                    let Some(series) = measurement_series(&ops) else {
                        continue;
                    };
                    let first = Criterion::pair(ops[0].clone(), ops[1].clone()).expect("valid pair");
                    let second = Criterion::pair(ops[0].clone(), ops[2].clone()).expect("valid pair");
                    local.push(CriterionPair {
                        means: [corr[b].value, corr[p].value, corr[q].value],
                        coverage: [first.cuts_excluded().len(), second.cuts_excluded().len()],
                        pairs_cover_all: pair_mask == full,
                        criteria: [first, second],
                        series,
                        base: ops[0].clone(),
                        partners: [ops[1].clone(), ops[2].clone()],
                    });
                }
            }
            local
        })
        .collect();
    found.sort_by(|x, y| {
        (y.coverage[0] + y.coverage[1])
            .cmp(&(x.coverage[0] + x.coverage[1]))
            .then_with(|| x.base.cmp(&y.base))
            .then_with(|| x.partners.cmp(&y.partners))
    });
    Ok(found)
}

fn idx(d: &[u8]) -> HwMultiIndex {
    HwMultiIndex::from_digits(d).expect("static labels")
}

fn unit_terms(ops: &[&[u8]]) -> Vec<Term> {
    ops.iter().map(|d| Term::unit(idx(d))).collect()
}

fn cuts4(sides: &[&[usize]]) -> Vec<Bipartition> {
    sides
        .iter()
        .map(|s| Bipartition::from_one_based(4, s).expect("static cut"))
        .collect()
}

/// The two four-qutrit GHZ criteria with the cuts they are asserted to exclude.
pub fn reference_ghz_claims() -> Vec<CriterionClaim> {
    let one_vs_three: [&[usize]; 4] = [&[1], &[2], &[3], &[4]];
    let mut first_cuts: Vec<&[usize]> = vec![&[1, 2], &[1, 4]];
    first_cuts.extend(one_vs_three);
    let mut second_cuts: Vec<&[usize]> = vec![&[1, 3]];
    second_cuts.extend(one_vs_three);
    vec![
        CriterionClaim {
            name: "ghz-1".into(),
            terms: unit_terms(&[&[1, 5, 1, 5], &[2, 2, 2, 2]]),
            bound: 1.0,
            claimed_cuts: cuts4(&first_cuts),
        },
        CriterionClaim {
            name: "ghz-2".into(),
            terms: unit_terms(&[&[1, 1, 5, 5], &[1, 5, 1, 5]]),
            bound: 1.0,
            claimed_cuts: cuts4(&second_cuts),
        },
    ]
}

/// The correlations `⟨h_2h_2h_2h_2⟩ = ⟨Π(h_1h_5h_1h_5)⟩ = 1` of the GHZ state.
pub fn reference_ghz_correlations() -> Vec<HwMultiIndex> {
    let mut out: BTreeSet<HwMultiIndex> = BTreeSet::new();
    out.insert(idx(&[2, 2, 2, 2]));
    let base = [1u8, 5, 1, 5];
    for perm in permutations(4) {
        let d: Vec<u8> = perm.iter().map(|&p| base[p]).collect();
        out.insert(idx(&d));
    }
    out.into_iter().collect()
}

/// The ½-weighted four-term cluster criterion, asserted for all seven cuts.
pub fn reference_cluster_claim() -> CriterionClaim {
    let ops = reference_cluster_correlations();
    CriterionClaim {
        name: "cluster".into(),
        terms: ops.into_iter().map(|o| Term::new(0.5, o)).collect(),
        bound: 1.0,
        claimed_cuts: Bipartition::all(4),
    }
}

pub fn reference_cluster_correlations() -> Vec<HwMultiIndex> {
    [[0u8, 2, 5, 2], [2, 0, 2, 5], [5, 2, 0, 2], [2, 5, 2, 0]]
        .iter()
        .map(|d| idx(d))
        .collect()
}

/// A reference triple for one of the canonical graphs (numbered 1–6).
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceTriple {
    pub graph: usize,
    pub base: HwMultiIndex,
    pub partners: [HwMultiIndex; 2],
}

pub fn reference_graph_triples() -> Vec<ReferenceTriple> {
    let rows: [[[u8; 4]; 3]; 6] = [
        [[3, 8, 4, 7], [6, 0, 2, 5], [0, 5, 2, 5]],
        [[2, 5, 5, 5], [1, 6, 6, 4], [5, 6, 6, 0]],
        [[3, 3, 3, 3], [1, 2, 1, 2], [1, 0, 1, 6]],
        [[2, 5, 5, 5], [4, 3, 3, 7], [8, 3, 0, 3]],
        [[4, 2, 6, 2], [0, 3, 7, 1], [3, 7, 0, 5]],
        [[2, 8, 8, 8], [0, 3, 3, 3], [3, 3, 3, 0]],
    ];
    rows.iter()
        .enumerate()
        .map(|(g, r)| ReferenceTriple {
            graph: g + 1,
            base: idx(&r[0]),
            partners: [idx(&r[1]), idx(&r[2])],
        })
        .collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..n)
            .rev()
            .find(|&j| current[j] > current[i - 1])
            .expect("pivot exists");
        current.swap(i - 1, j);
        current[i..].reverse();
    }
}

/// A canonical graph and vertex map under which every listed operator is a
/// perfect correlation of the graph state.
#[derive(Clone, Debug, Serialize)]
pub struct LabelingMatch {
    /// 1-based canonical graph number.
    pub graph: usize,
    pub name: &'static str,
    pub perm: Vec<usize>,
    pub means: Vec<C64>,
}

/// Every (canonical graph, vertex relabeling) making all `ops` unit-modulus.
pub fn find_labelings(ops: &[HwMultiIndex], tol: f64) -> Result<Vec<LabelingMatch>> {
    let mut out = Vec::new();
    for (g, (name, graph)) in canonical_graphs().into_iter().enumerate() {
        for perm in permutations(graph.vertices()) {
            let state = graph_state(&graph.relabeled(&perm))?;
            let means: Vec<C64> = ops.iter().map(|o| state.trace_adjoint(&WeylOperator::new(o))).collect();
            if means.iter().all(|m| m.norm() >= 1.0 - tol) {
                out.push(LabelingMatch {
                    graph: g + 1,
                    name,
                    perm,
                    means,
                });
            }
        }
    }
    Ok(out)
}
