//! Multi-start projected gradient ascent of `f(ψ) = Σ_t w_t |⟨ψ|O_t|ψ⟩|²`
//! on the unit sphere, and its alternating variant over product states.
//!
//! `f` is convex in `ρ`, so its maximum over all states (or over all states
//! separable across a cut) is attained on pure (product) states. Results are
//! lower bounds achieved by an explicit certificate state; upper bounds rest on
//! restart saturation and are numerical only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hw::{Bipartition, WeylOperator};
use crate::linalg::{CVector, C64};
use crate::states::{assemble_product, random_unit, PureState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Ascent iterations per start (per side, per alternation for product states).
    pub max_iter: usize,
    /// Initial step; adapted by backtracking.
    pub step: f64,
    /// Stop once the tangent gradient norm falls below this.
    pub grad_tol: f64,
    /// Outer alternations for product-state ascent.
    pub alternations: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 200,
            max_iter: 2000,
            step: 0.1,
            grad_tol: 1e-9,
            alternations: 100,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug)]
pub struct MaximizationResult {
    pub value: f64,
    pub argmax_state: PureState,
    pub restarts_used: usize,
    /// Whether the best start reached the gradient tolerance.
    pub converged: bool,
    /// Starts whose final value is within 1e-6 of the best.
    pub hits: usize,
}

/// Weighted Weyl operators acting on one register.
pub struct Objective<'a> {
    terms: Vec<(f64, &'a WeylOperator)>,
}

impl<'a> Objective<'a> {
    pub fn new(terms: Vec<(f64, &'a WeylOperator)>) -> Self {
        Objective { terms }
    }

    pub fn value(&self, psi: &[C64]) -> f64 {
        self.terms.iter().map(|(w, op)| w * op.sandwich(psi).norm_sqr()).sum()
    }

    /// Value and `Σ w (conj(a) O + a O†) ψ` with `a = ⟨ψ|O|ψ⟩`.
    fn value_and_gradient(&self, psi: &[C64]) -> (f64, Vec<C64>) {
        let mut grad = vec![C64::new(0.0, 0.0); psi.len()];
        let mut value = 0.0;
        for (w, op) in &self.terms {
            let a = op.sandwich(psi);
            value += w * a.norm_sqr();
            if *w == 0.0 || a.norm_sqr() == 0.0 {
                continue;
            }
            let forward = op.apply(psi);
            let backward = op.apply_adjoint(psi);
            let (ca, aa) = (a.conj() * *w, a * *w);
            for ((g, f), b) in grad.iter_mut().zip(&forward).zip(&backward) {
                *g += ca * f + aa * b;
            }
        }
        (value, grad)
    }

    /// Backtracking ascent from `psi`. Returns the final state, value, and
    /// whether the gradient tolerance was met.
    pub fn ascend(&self, mut psi: Vec<C64>, cfg: &OptimizerConfig) -> (Vec<C64>, f64, bool) {
        normalize(&mut psi);
        let (mut value, mut grad) = self.value_and_gradient(&psi);
        let mut step = cfg.step;
        for _ in 0..cfg.max_iter {
            let overlap: C64 = psi.iter().zip(&grad).map(|(p, g)| p.conj() * g).sum();
            for (g, p) in grad.iter_mut().zip(&psi) {
                *g -= overlap * p;
            }
            let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
            if gnorm < cfg.grad_tol {
                return (psi, value, true);
            }
            loop {
                let mut trial: Vec<C64> = psi.iter().zip(&grad).map(|(p, g)| p + g * step).collect();
                normalize(&mut trial);
                let (tv, tg) = self.value_and_gradient(&trial);
                if tv > value {
                    let flat = tv - value <= 1e-15 * value.abs().max(1.0);
                    psi = trial;
                    value = tv;
                    grad = tg;
                    if flat {
                        return (psi, value, true);
                    }
                    step = (step * 1.5).min(10.0);
                    break;
                }
                step *= 0.5;
                if step < 1e-14 {
                    // no ascent direction left at machine precision
                    return (psi, value, true);
                }
            }
        }
        (psi, value, false)
    }
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

fn start_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn summarize(runs: Vec<(f64, PureState, bool)>, restarts: usize) -> MaximizationResult {
    let (best_i, _) = runs.iter().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |(bi, bv), (i, r)| if r.0 > bv { (i, r.0) } else { (bi, bv) },
    );
    let best = runs[best_i].0;
    let hits = runs.iter().filter(|r| r.0 >= best - 1e-6).count();
    let (value, state, converged) = runs.into_iter().nth(best_i).unwrap();
    MaximizationResult {
        value,
        argmax_state: state,
        restarts_used: restarts,
        converged,
        hits,
    }
}

/// Maximizes `Σ w |⟨ψ|O|ψ⟩|²` over unit vectors on `sites` qutrits.
pub fn maximize(sites: usize, terms: &[(f64, WeylOperator)], cfg: &OptimizerConfig) -> MaximizationResult {
    let objective = Objective::new(terms.iter().map(|(w, o)| (*w, o)).collect());
    let restarts = cfg.restarts.max(1);
    let runs: Vec<(f64, PureState, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let start = random_unit(&mut start_rng(cfg.seed, r), sites);
            let (psi, value, converged) = objective.ascend(start.as_slice().to_vec(), cfg);
            let state = PureState::normalized(sites, CVector::from_vec(psi)).expect("unit vector");
            (value, state, converged)
        })
        .collect();
    summarize(runs, restarts)
}

/// One term of a product-state objective: weight and the two restrictions.
pub struct SplitTerm {
    pub weight: f64,
    pub side_a: WeylOperator,
    pub side_b: WeylOperator,
}

/// Alternating ascent of `Σ w |⟨A⟩_{ψA}|² |⟨B⟩_{ψB}|²` over product states
/// `ψA ⊗ ψB` across `cut`: fixing one factor leaves a weighted objective of
/// the same form on the other.
pub fn maximize_product(cut: &Bipartition, terms: &[SplitTerm], cfg: &OptimizerConfig) -> MaximizationResult {
    let (na, nb) = (cut.side_a().len(), cut.side_b().len());
    let restarts = cfg.restarts.max(1);
    let runs: Vec<(f64, PureState, bool)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = start_rng(cfg.seed, r);
            let mut a = random_unit(&mut rng, na).as_slice().to_vec();
            let mut b = random_unit(&mut rng, nb).as_slice().to_vec();
            let value_of = |a: &[C64], b: &[C64]| -> f64 {
                terms
                    .iter()
                    .map(|t| t.weight * t.side_a.sandwich(a).norm_sqr() * t.side_b.sandwich(b).norm_sqr())
                    .sum()
            };
            let mut value = value_of(&a, &b);
            let mut converged = false;
            for _ in 0..cfg.alternations.max(1) {
                let wa: Vec<(f64, &WeylOperator)> = terms
                    .iter()
                    .map(|t| (t.weight * t.side_b.sandwich(&b).norm_sqr(), &t.side_a))
                    .collect();
                let (na_psi, _, ca) = Objective::new(wa).ascend(a, cfg);
                a = na_psi;
                let wb: Vec<(f64, &WeylOperator)> = terms
                    .iter()
                    .map(|t| (t.weight * t.side_a.sandwich(&a).norm_sqr(), &t.side_b))
                    .collect();
                let (nb_psi, _, cb) = Objective::new(wb).ascend(b, cfg);
                b = nb_psi;
                let next = value_of(&a, &b);
                let stalled = next - value <= 1e-13;
                value = next;
                if stalled && ca && cb {
                    converged = true;
                    break;
                }
            }
            let full = assemble_product(cut, &a, &b);
            let state = PureState::normalized(cut.sites(), full).expect("unit vector");
            (value, state, converged)
        })
        .collect();
    summarize(runs, restarts)
}
