//! End-to-end checks of every claim the library reproduces, rendered as a
//! deterministic plain-text report.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::complementarity::{
    enumerate_noncommuting_sets, global_bound_check, max_sum_squared, noncommuting_pairs, pairwise_bound_check,
    purity_fourier_sum, scan_pairs, DEFAULT_SEARCH_GUARD,
};
use crate::criteria::{
    evaluate_terms, find_labelings, reference_cluster_claim, reference_cluster_correlations, reference_ghz_claims,
    reference_ghz_correlations, reference_graph_triples, search_criteria, separable_max_terms, violates_for_all_cuts,
    CoverageMode, Criterion, CriterionClaim, SearchConfig, Term, CERTIFY_TOL,
};
use crate::hw::{
    commutation_phase, cut_commutes, hw_matrix, mub_basis, simplex_vectors, tensor_operator, weyl_exponents,
    Bipartition, HwLabel, HwMultiIndex, WeylOperator,
};
use crate::linalg::{max_abs_diff, omega_pow, CMatrix, C64};
use crate::optimize::OptimizerConfig;
use crate::states::{
    canonical_graphs, cluster_state_4, ghz_state, graph_state, perfect_correlations, random_density, random_product,
    random_pure, split_index, DensityMatrix, QuantumState,
};
use crate::tomography::{
    mub_probabilities, reconstruct_from_tensor, reconstruct_multi, reconstruct_single, tensor_from_probabilities,
};
use crate::{Error, Result};

pub const CHECK_IDS: [&str; 11] = [
    "algebra",
    "tomography",
    "purity",
    "pairwise",
    "five-quarters",
    "global",
    "ghz",
    "cluster",
    "graphs",
    "product",
    "mixing",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproduceConfig {
    pub seed: u64,
    /// Restarts for single-register maxima.
    pub restarts: usize,
    /// Restarts for separable maxima.
    pub separable_restarts: usize,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            seed: 0,
            restarts: 200,
            separable_restarts: 100,
        }
    }
}

impl ReproduceConfig {
    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig::default()
            .with_restarts(self.restarts)
            .with_seed(self.seed)
    }

    fn separable(&self) -> OptimizerConfig {
        OptimizerConfig::default()
            .with_restarts(self.separable_restarts)
            .with_seed(self.seed)
    }

    fn rng(&self, check: &str) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(CHECK_IDS.iter().position(|c| *c == check).unwrap_or(99) as u64);
        rng
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Line {
    pub text: String,
    /// `None` for informational lines.
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: &'static str,
    pub title: &'static str,
    /// Relies on optimizer maxima rather than exact arithmetic.
    pub numerical: bool,
    pub lines: Vec<Line>,
}

impl CheckReport {
    fn new(id: &'static str, title: &'static str, numerical: bool) -> Self {
        CheckReport {
            id,
            title,
            numerical,
            lines: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed != Some(false))
    }

    fn check(&mut self, ok: bool, text: String) -> bool {
        self.lines.push(Line { text, passed: Some(ok) });
        ok
    }

    fn info(&mut self, text: String) {
        self.lines.push(Line { text, passed: None });
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.numerical {
            " [numerical certification]"
        } else {
            ""
        };
        writeln!(f, "== {} ({}){}", self.id, self.title, tag)?;
        for l in &self.lines {
            match l.passed {
                Some(true) => writeln!(f, "  {} PASS", l.text)?,
                Some(false) => writeln!(f, "  {} FAIL", l.text)?,
                None => writeln!(f, "  note: {}", l.text)?,
            }
        }
        writeln!(f, "{} {}", self.id, if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn run_check(id: &str, cfg: &ReproduceConfig) -> Result<CheckReport> {
    match id {
        "algebra" => algebra(),
        "tomography" => tomography(cfg),
        "purity" => purity(cfg),
        "pairwise" => pairwise(cfg),
        "five-quarters" => five_quarters(cfg),
        "global" => global(cfg),
        "ghz" => ghz(cfg),
        "cluster" => cluster(cfg),
        "graphs" => graphs(cfg),
        "product" => product(cfg),
        "mixing" => mixing(cfg),
        other => Err(Error::Parse(format!(
            "unknown check {other:?}; expected one of {}",
            CHECK_IDS.join(", ")
        ))),
    }
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "yes"
    } else {
        "no"
    }
}

fn algebra() -> Result<CheckReport> {
    let mut r = CheckReport::new("algebra", "Heisenberg-Weyl operators and MUBs", false);
    let roots = [omega_pow(0), omega_pow(1), omega_pow(2)];
    let mut unitary_err: f64 = 0.0;
    let mut spectrum_err: f64 = 0.0;
    let mut weyl_err: f64 = 0.0;
    for label in HwLabel::all() {
        let h = hw_matrix(label);
        unitary_err = unitary_err.max(max_abs_diff(&(h.adjoint() * &h), &CMatrix::identity(3, 3)));
        weyl_err = weyl_err.max(max_abs_diff(&weyl_exponents(label).matrix(), &h));
        let basis = match label.mub() {
            Some(m) => mub_basis(m)?.to_vec(),
            None => mub_basis(1)?.to_vec(),
        };
        for v in basis {
            let lambda = (v.adjoint() * &h * &v)[(0, 0)];
            let residual = (&h * &v - &v * lambda).norm();
            let off_root = roots.iter().map(|w| (w - lambda).norm()).fold(f64::INFINITY, f64::min);
            spectrum_err = spectrum_err.max(residual).max(off_root);
        }
    }
    r.check(
        unitary_err <= 1e-12,
        format!("unitarity: max |h†h - I| = {unitary_err:.2e} (tol 1e-12)"),
    );
    r.check(
        spectrum_err <= 1e-12,
        format!("spectra in {{1, w, w^2}}: max deviation {spectrum_err:.2e} (tol 1e-12)"),
    );
    let mut mub_err: f64 = 0.0;
    for a in 1..=4u8 {
        for b in a + 1..=4u8 {
            for u in mub_basis(a)?.iter() {
                for v in mub_basis(b)?.iter() {
                    mub_err = mub_err.max(((u.adjoint() * v)[(0, 0)].norm_sqr() - 1.0 / 3.0).abs());
                }
            }
        }
    }
    r.check(
        mub_err <= 1e-12,
        format!("unbiasedness: max ||<u|v>|^2 - 1/3| = {mub_err:.2e} (tol 1e-12)"),
    );
    r.check(
        weyl_err <= 1e-12,
        format!("Weyl-exponent reconstruction: max error {weyl_err:.2e} (tol 1e-12)"),
    );
    let ops: Vec<HwMultiIndex> = HwMultiIndex::all(2).collect();
    let dense: Vec<CMatrix> = ops.iter().map(tensor_operator).collect::<Result<_>>()?;
    let mut mismatches = 0usize;
    for (i, a) in ops.iter().enumerate() {
        for (j, b) in ops.iter().enumerate() {
            let c = commutation_phase(a, b)?;
            let lhs = &dense[i] * &dense[j];
            let rhs = &dense[j] * &dense[i] * c.omega();
            if max_abs_diff(&lhs, &rhs) > 1e-12 {
                mismatches += 1;
            }
        }
    }
    r.check(
        mismatches == 0,
        format!("symplectic phase vs dense commutators: {mismatches} mismatches in 81^2 pairs"),
    );
    Ok(r)
}

fn tomography(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("tomography", "MUB tomography round trips", false);
    let mut rng = cfg.rng("tomography");
    let (mut via_probs, mut via_tensor): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        let rho = random_density(1, 1 + i % 3, rng.gen());
        let dist = mub_probabilities(&rho)?;
        via_probs = via_probs.max(max_abs_diff(reconstruct_single(&dist)?.state.matrix(), rho.matrix()));
        let tensor = tensor_from_probabilities(&dist)?;
        via_tensor = via_tensor.max(max_abs_diff(
            reconstruct_from_tensor(&tensor)?.state.matrix(),
            rho.matrix(),
        ));
    }
    r.check(
        via_probs <= 1e-10,
        format!("single qutrit via probabilities, 100 states: max error {via_probs:.2e} (tol 1e-10)"),
    );
    r.check(
        via_tensor <= 1e-10,
        format!("single qutrit via correlation vectors, 100 states: max error {via_tensor:.2e} (tol 1e-10)"),
    );
    let mut joint: f64 = 0.0;
    for i in 0..20 {
        let rho = random_density(2, 1 + i % 9, rng.gen());
        let dist = mub_probabilities(&rho)?;
        joint = joint.max(max_abs_diff(reconstruct_multi(&dist)?.state.matrix(), rho.matrix()));
    }
    r.check(
        joint <= 1e-9,
        format!("two qutrits via joint probabilities, 20 states: max error {joint:.2e} (tol 1e-9)"),
    );
    Ok(r)
}

fn purity(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("purity", "3 tr rho^2 as a Fourier sum", false);
    let mut rng = cfg.rng("purity");
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let rho = random_density(1, 1 + i % 3, rng.gen());
        worst = worst.max((purity_fourier_sum(&rho)? - 3.0 * rho.purity()).abs());
    }
    r.check(
        worst <= 1e-10,
        format!("100 random qutrit states: max |sum - 3 tr rho^2| = {worst:.2e} (tol 1e-10)"),
    );
    Ok(r)
}

/// Pair criteria used for four-qutrit states: GHZ, cluster, and reference graph pairs.
fn four_qutrit_pairs() -> Vec<(HwMultiIndex, HwMultiIndex)> {
    let mut out = Vec::new();
    for claim in reference_ghz_claims() {
        out.push((claim.terms[0].idx.clone(), claim.terms[1].idx.clone()));
    }
    let c = reference_cluster_correlations();
    out.push((c[0].clone(), c[1].clone()));
    out.push((c[2].clone(), c[3].clone()));
    for t in reference_graph_triples() {
        for p in &t.partners {
            out.push((t.base.clone(), p.clone()));
        }
    }
    out
}

fn pairwise(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("pairwise", "complementarity of non-commuting pairs", true);
    let opt = cfg.optimizer();
    let pairs = noncommuting_pairs(2);
    let scan = scan_pairs(&pairs, &opt, CERTIFY_TOL)?;
    r.check(
        scan.max_value <= 1.0 + CERTIFY_TOL,
        format!(
            "{} non-commuting two-qutrit pairs, {} restarts each: max |<a>|^2 + |<b>|^2 = {:.9} at ({}, {}) (bound 1 + 1e-6)",
            scan.pairs, scan.restarts, scan.max_value, scan.worst_pair.0, scan.worst_pair.1
        ),
    );
    let single = pairwise_bound_check(
        &HwMultiIndex::from_digits(&[1])?,
        &HwMultiIndex::from_digits(&[2])?,
        &opt,
    )?;
    r.check(
        single.value <= 1.0 + CERTIFY_TOL,
        format!("single qutrit (h1, h2): max {:.9} (bound 1 + 1e-6)", single.value),
    );
    // Four-qutrit pairs are bounded only for product states across cuts they split.
    let sep = cfg.separable().with_restarts(cfg.restarts);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for (a, b) in four_qutrit_pairs() {
        let terms = [Term::unit(a.clone()), Term::unit(b.clone())];
        for cut in Bipartition::all(4) {
            if cut_commutes(&a, &b, &cut)? {
                continue;
            }
            worst = worst.max(separable_max_terms(&terms, &cut, &sep)?.value);
            checked += 1;
        }
    }
    r.check(
        worst <= 1.0 + CERTIFY_TOL,
        format!("four-qutrit criterion pairs on {checked} (pair, split cut) cases: max separable value {worst:.9} (bound 1 + 1e-6)"),
    );
    Ok(r)
}

fn five_quarters(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("five-quarters", "sets of seven mutually non-commuting operators", true);
    let sets = enumerate_noncommuting_sets(7, DEFAULT_SEARCH_GUARD)?;
    r.check(
        !sets.sets.is_empty(),
        format!("7-element sets found: {} (projective classes)", sets.projective),
    );
    let step = (sets.sets.len() / 60).max(1);
    let sample: Vec<_> = sets.sets.iter().step_by(step).collect();
    let opt = cfg.optimizer();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for set in &sample {
        let v = max_sum_squared(set, &opt).value;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let ok = (lo - 1.25).abs() <= 1e-6 && (hi - 1.25).abs() <= 1e-6;
    r.check(
        ok,
        format!(
            "5/4 maximum: {hi:.7} (min {lo:.7} over {} sampled sets, tol 1e-6)",
            sample.len()
        ),
    );
    let matches = sets.matches(792);
    r.info(format!(
        "counts vs 792: raw {}, dagger-quotient {}, projective {}, maximal {}; match: {}",
        sets.raw,
        sets.dagger_quotient,
        sets.projective,
        sets.maximal,
        if matches.is_empty() {
            "none".to_string()
        } else {
            matches.join(", ")
        }
    ));
    Ok(r)
}

fn global(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("global", "sum over all 81 two-qutrit correlations", false);
    let mut rng = cfg.rng("global");
    let (mut worst, mut largest): (f64, f64) = (0.0, 0.0);
    let mut pure_worst: f64 = 0.0;
    for i in 0..50 {
        let rho = random_density(2, 1 + i % 9, rng.gen());
        let sum = global_bound_check(&rho)?;
        worst = worst.max((sum - 9.0 * rho.purity()).abs());
        largest = largest.max(sum);
        if i % 9 == 0 {
            pure_worst = pure_worst.max((sum - 9.0).abs());
        }
    }
    r.check(
        worst <= 1e-9,
        format!("50 random states: max |sum - 9 tr rho^2| = {worst:.2e} (tol 1e-9)"),
    );
    r.check(largest <= 9.0 + 1e-9, format!("largest sum {largest:.9} <= 9"));
    r.check(
        pure_worst <= 1e-9,
        format!("pure states reach 9: max deviation {pure_worst:.2e}"),
    );
    Ok(r)
}

fn audit_claim(
    r: &mut CheckReport,
    claim: &CriterionClaim,
    state: &dyn QuantumState,
    cfg: &ReproduceConfig,
) -> Result<()> {
    let value = claim.evaluate(state)?;
    r.check(
        (value - 2.0).abs() <= 1e-12,
        format!("{} value {value:.12} (target 2 +- 1e-12)", claim.name),
    );
    for a in claim.audit(&cfg.separable())? {
        r.check(
            a.certified,
            format!(
                "{} separable max on {}: {:.9} (bound 1 + 1e-6)",
                claim.name, a.cut, a.separable_max
            ),
        );
        if !a.noncommuting_pair {
            r.info(format!(
                "{}: no term pair fails to commute across {}, so product states reach {:.1}",
                claim.name, a.cut, a.separable_max
            ));
        } else if !a.certified {
            r.info(format!(
                "{}: pairing certificate on {} only gives {}",
                claim.name, a.cut, a.analytic_bound
            ));
        }
    }
    Ok(())
}

fn alternative(
    r: &mut CheckReport,
    state: &(dyn QuantumState + Sync),
    cfg: &ReproduceConfig,
    label: &str,
) -> Result<()> {
    let found = search_criteria(
        state,
        &SearchConfig {
            tol: 1e-9,
            mode: CoverageMode::PerPair,
        },
    )?;
    let Some(best) = found.first() else {
        r.info(format!("{label}: no pair-covering triple found"));
        return Ok(());
    };
    let cert = violates_for_all_cuts(&best.criteria, state, &cfg.separable(), 1e-9)?;
    let worst = cert.witnesses.iter().map(|w| w.separable_max).fold(0.0, f64::max);
    r.info(format!(
        "{label}: triple {} + ({}, {}) violates both pair criteria ({:.6}, {:.6}) with separable max <= {:.9} on all {} cuts: {}",
        best.base,
        best.partners[0],
        best.partners[1],
        cert.values[0],
        cert.values[1],
        worst,
        cert.witnesses.len(),
        pass_word(cert.violated)
    ));
    Ok(())
}

fn ghz(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("ghz", "four-qutrit GHZ criteria", true);
    let state = ghz_state(4)?;
    let corr = reference_ghz_correlations();
    let dev = corr
        .iter()
        .map(|o| (state.trace_adjoint(&WeylOperator::new(o)) - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    r.check(
        dev <= 1e-12,
        format!(
            "{} listed correlations: max |T - 1| = {dev:.2e} (tol 1e-12)",
            corr.len()
        ),
    );
    let claims = reference_ghz_claims();
    for claim in &claims {
        audit_claim(&mut r, claim, &state, cfg)?;
    }
    let mut covered: Vec<Bipartition> = claims.iter().flat_map(|c| c.claimed_cuts.iter().copied()).collect();
    covered.sort();
    covered.dedup();
    r.check(
        covered.len() == 7,
        format!("claimed cuts jointly cover {} of 7 bipartitions", covered.len()),
    );
    for claim in &claims {
        let derived = Criterion::with_derived_cuts(claim.terms.clone(), claim.bound)?;
        let names: Vec<String> = derived.cuts_excluded().iter().map(|c| c.to_string()).collect();
        r.info(format!(
            "{} actually splits: {}",
            claim.name,
            if names.is_empty() {
                "none".into()
            } else {
                names.join(" ")
            }
        ));
    }
    alternative(&mut r, &state, cfg, "pair-covering alternative")?;
    Ok(r)
}

fn cluster(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("cluster", "four-qutrit cluster criterion", true);
    let state = cluster_state_4();
    let corr = reference_cluster_correlations();
    let dev = corr
        .iter()
        .map(|o| (state.trace_adjoint(&WeylOperator::new(o)) - C64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    r.check(
        dev <= 1e-12,
        format!("4 listed correlations: max |T - 1| = {dev:.2e} (tol 1e-12)"),
    );
    audit_claim(&mut r, &reference_cluster_claim(), &state, cfg)?;
    alternative(&mut r, &state, cfg, "pair-covering alternative")?;
    Ok(r)
}

fn graphs(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("graphs", "four-qutrit graph-state criteria", true);
    for (g, (name, graph)) in canonical_graphs().into_iter().enumerate() {
        let n = perfect_correlations(&graph_state(&graph)?, 1e-9)?.len();
        r.check(
            n == 80,
            format!(
                "graph {} ({name}): {n} nontrivial perfect correlations (expected 80)",
                g + 1
            ),
        );
    }
    for t in reference_graph_triples() {
        let ops = [t.base.clone(), t.partners[0].clone(), t.partners[1].clone()];
        let matches = find_labelings(&ops, 1e-9)?;
        let label = format!(
            "reference graph {} pair ({} ; {}, {})",
            t.graph, t.base, t.partners[0], t.partners[1]
        );
        let Some(m) = matches.iter().find(|m| m.graph == t.graph).or(matches.first()) else {
            r.check(
                false,
                format!("{label}: no canonical graph and relabeling makes all three means unimodular"),
            );
            for o in &ops {
                let k = find_labelings(std::slice::from_ref(o), 1e-9)?.len();
                if k == 0 {
                    r.info(format!(
                        "{o} has |mean| < 1 on every canonical graph state under every relabeling"
                    ));
                }
            }
            continue;
        };
        let (_, graph) = &canonical_graphs()[m.graph - 1];
        let state = graph_state(&graph.relabeled(&m.perm))?;
        let v1 = Criterion::pair(ops[0].clone(), ops[1].clone())?.evaluate(&state)?;
        let v2 = Criterion::pair(ops[0].clone(), ops[2].clone())?.evaluate(&state)?;
        r.check(
            v1 > 1.0 + 1e-9 && v2 > 1.0 + 1e-9,
            format!(
                "{label}: graph {} relabeling {:?}, values {v1:.6} and {v2:.6} (> 1)",
                m.graph, m.perm
            ),
        );
        let found = search_criteria(&state, &SearchConfig::default())?;
        let regenerated = found.iter().any(|p| p.same_triple(&t.base, &t.partners));
        r.check(
            regenerated,
            format!("{label}: regenerated by search on the matching labeling"),
        );
    }
    for (g, (name, graph)) in canonical_graphs().into_iter().enumerate() {
        let state = graph_state(&graph)?;
        let found = search_criteria(
            &state,
            &SearchConfig {
                tol: 1e-9,
                mode: CoverageMode::PerPair,
            },
        )?;
        let Some(best) = found.first() else {
            r.check(false, format!("graph {} ({name}): search found no triple", g + 1));
            continue;
        };
        let cert = violates_for_all_cuts(&best.criteria, &state, &cfg.separable(), 1e-9)?;
        r.check(
            cert.violated && best.series.len() <= 2,
            format!(
                "graph {} ({name}): search gives {} + ({}, {}), {} triples total, certified on all 7 cuts",
                g + 1,
                best.base,
                best.partners[0],
                best.partners[1],
                found.len()
            ),
        );
    }
    Ok(r)
}

fn product(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("product", "factorization on product states", false);
    let mut rng = cfg.rng("product");
    let cuts = Bipartition::all(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let cut = cuts[rng.gen_range(0..cuts.len())];
        let spec = random_product(&cut, rng.gen());
        let psi = spec.to_pure();
        let idx = HwMultiIndex::from_flat(rng.gen_range(0..6561), 4);
        let (a, b) = split_index(&idx, &cut);
        let whole = psi.trace_adjoint(&WeylOperator::new(&idx)).norm();
        let parts = spec.factor_a.trace_adjoint(&WeylOperator::new(&a)).norm()
            * spec.factor_b.trace_adjoint(&WeylOperator::new(&b)).norm();
        worst = worst.max((whole - parts).abs());
    }
    r.check(
        worst <= 1e-12,
        format!("100 random product states: max ||<O>| - |<O_A>||<O_B>|| = {worst:.2e} (tol 1e-12)"),
    );
    for d in 2..=6 {
        let e = simplex_vectors(d)?.gram_error();
        r.check(e <= 1e-12, format!("simplex vectors d = {d}: Gram error {e:.2e}"));
    }
    Ok(r)
}

fn mixing(cfg: &ReproduceConfig) -> Result<CheckReport> {
    let mut r = CheckReport::new("mixing", "criterion values under mixing", false);
    let mut rng = cfg.rng("mixing");
    let mut term_sets: Vec<Vec<Term>> = reference_ghz_claims().into_iter().map(|c| c.terms).collect();
    term_sets.push(reference_cluster_claim().terms);
    let anchors = [ghz_state(4)?.density(), cluster_state_4().density()];
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let k = 2 + i % 3;
        let mut parts: Vec<DensityMatrix> = (0..k).map(|_| random_pure(4, rng.gen()).density()).collect();
        parts[0] = anchors[i % 2].clone();
        let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let mixture: Vec<(f64, DensityMatrix)> = raw.iter().map(|w| w / total).zip(parts.iter().cloned()).collect();
        let rho = DensityMatrix::mixture(&mixture)?;
        for terms in &term_sets {
            let value = evaluate_terms(terms, &rho)?;
            let best = parts
                .iter()
                .map(|p| evaluate_terms(terms, p))
                .collect::<Result<Vec<f64>>>()?;
            worst = worst.max(value - best.into_iter().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    r.check(
        worst <= 1e-9,
        format!("100 random mixtures: max excess over best component {worst:.2e} (tol 1e-9)"),
    );
    Ok(r)
}
