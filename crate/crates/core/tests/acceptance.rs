//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values come from the dense oracles below (literal matrices,
//! explicit state formulas, brute-force sums), never from the library's own
//! tables.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qutrit_hw::complementarity::{
    enumerate_noncommuting_sets, global_bound_check, max_sum_squared, noncommuting_pairs, purity_fourier_sum,
    scan_pairs, DEFAULT_SEARCH_GUARD,
};
use qutrit_hw::criteria::{evaluate_terms, search_criteria, separable_max_terms, Criterion, SearchConfig, Term};
use qutrit_hw::hw::{commutation_phase, hw_matrix, mub_basis, simplex_vectors, Bipartition, HwLabel, HwMultiIndex};
use qutrit_hw::optimize::OptimizerConfig;
use qutrit_hw::states::{
    cluster_state_4, ghz_state, graph_state, perfect_correlations, random_density, random_product, random_pure,
    DensityMatrix, Graph,
};
use qutrit_hw::tomography::{mub_probabilities, reconstruct_multi, reconstruct_single, MubDistribution};

type M3 = [[C; 3]; 3];

fn w(k: i64) -> C {
    C::from_polar(1.0, 2.0 * std::f64::consts::PI * k.rem_euclid(3) as f64 / 3.0)
}

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn dagger(m: &M3) -> M3 {
    let mut d = [[c(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = m[j][i].conj();
        }
    }
    d
}

fn mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[c(0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn diff(a: &M3, b: &M3) -> f64 {
    (0..9)
        .map(|n| (a[n / 3][n % 3] - b[n / 3][n % 3]).norm())
        .fold(0.0, f64::max)
}

/// h0..h8 as literal matrices: h1 clock, h2 shift, h3 and h4 twisted shifts, h5..h8 adjoints.
fn literal() -> [M3; 9] {
    let (o, z) = (c(1.0), c(0.0));
    let h0 = [[o, z, z], [z, o, z], [z, z, o]];
    let h1 = [[o, z, z], [z, w(1), z], [z, z, w(2)]];
    let h2 = [[z, o, z], [z, z, o], [o, z, z]];
    let h3 = [[z, o, z], [z, z, w(1)], [w(2), z, z]];
    let h4 = [[z, o, z], [z, z, w(2)], [w(1), z, z]];
    [h0, h1, h2, h3, h4, dagger(&h1), dagger(&h2), dagger(&h3), dagger(&h4)]
}

fn to_dense(m: &M3) -> DMatrix<C> {
    DMatrix::from_fn(3, 3, |i, j| m[i][j])
}

fn tensor(h: &[M3; 9], labels: &[u8]) -> DMatrix<C> {
    labels.iter().fold(DMatrix::from_element(1, 1, c(1.0)), |acc, &l| {
        acc.kronecker(&to_dense(&h[l as usize]))
    })
}

/// `O|ψ⟩` for a tensor product, site 1 slowest.
fn apply(h: &[M3; 9], labels: &[u8], psi: &[C]) -> Vec<C> {
    let n = labels.len();
    let mut v = psi.to_vec();
    for (s, &l) in labels.iter().enumerate() {
        let stride = 3usize.pow((n - 1 - s) as u32);
        let m = &h[l as usize];
        let mut next = vec![c(0.0); v.len()];
        for (idx, slot) in next.iter_mut().enumerate() {
            let d = (idx / stride) % 3;
            let base = idx - d * stride;
            *slot = (0..3).map(|j| m[d][j] * v[base + j * stride]).sum();
        }
        v = next;
    }
    v
}

/// `⟨ψ|O†|ψ⟩`.
fn mean(h: &[M3; 9], labels: &[u8], psi: &[C]) -> C {
    let o = apply(h, labels, psi);
    o.iter().zip(psi).map(|(a, p)| a.conj() * p).sum()
}

fn mean_rho(h: &[M3; 9], labels: &[u8], rho: &DMatrix<C>) -> C {
    let o = tensor(h, labels);
    rho.iter().zip(o.iter()).map(|(r, x)| r * x.conj()).sum()
}

/// `c` with `A B = ω^c B A`, or `None`.
fn single_phase(a: &M3, b: &M3) -> Option<i64> {
    let (ab, ba) = (mul(a, b), mul(b, a));
    (0..3).find(|&k| {
        let scaled: M3 = ba.map(|row| row.map(|x| x * w(k)));
        diff(&ab, &scaled) < 1e-12
    })
}

fn phase_table(h: &[M3; 9]) -> [[i64; 9]; 9] {
    let mut t = [[0; 9]; 9];
    for a in 0..9 {
        for b in 0..9 {
            t[a][b] = single_phase(&h[a], &h[b]).expect("HW operators commute up to a phase");
        }
    }
    t
}

/// Whether `a` and `b` fail to commute on one side of the cut (side A = sites in `mask`).
fn cut_noncommuting(t: &[[i64; 9]; 9], a: &[u8], b: &[u8], mask: u32) -> bool {
    let side = |inside: bool| -> i64 {
        (0..a.len())
            .filter(|&s| (mask >> s & 1 == 1) == inside)
            .map(|s| t[a[s] as usize][b[s] as usize])
            .sum::<i64>()
            % 3
    };
    side(true) != 0 || side(false) != 0
}

/// Masks of the 7 four-site bipartitions with site 1 on side A.
fn cut_masks() -> Vec<u32> {
    (1u32..16).filter(|m| m & 1 == 1 && *m != 15).collect()
}

fn ghz(n: usize) -> Vec<C> {
    let dim = 3usize.pow(n as u32);
    let mut v = vec![c(0.0); dim];
    for i in 0..3 {
        let idx = (0..n).fold(0, |acc, _| acc * 3 + i);
        v[idx] = c(1.0 / 3f64.sqrt());
    }
    v
}

fn digits4(idx: usize) -> [usize; 4] {
    [idx / 27, idx / 9 % 3, idx / 3 % 3, idx % 3]
}

/// `(1/3) Σ ω^{ij} |ijij⟩`.
fn cluster() -> Vec<C> {
    let mut v = vec![c(0.0); 81];
    for (idx, slot) in v.iter_mut().enumerate() {
        let d = digits4(idx);
        if d[0] == d[2] && d[1] == d[3] {
            *slot = w((d[0] * d[1]) as i64) / 3.0;
        }
    }
    v
}

/// Controlled-phase `diag(ω^{ij})` on every edge of `|+⟩^{⊗4}`; vertices 0-based.
fn graph(edges: &[(usize, usize)]) -> Vec<C> {
    (0..81)
        .map(|idx| {
            let d = digits4(idx);
            w(edges.iter().map(|&(u, v)| (d[u] * d[v]) as i64).sum()) / 9.0
        })
        .collect()
}

fn canonical_edges() -> Vec<(&'static str, Vec<(usize, usize)>)> {
    vec![
        ("path", vec![(0, 1), (1, 2), (2, 3)]),
        ("star", vec![(0, 1), (0, 2), (0, 3)]),
        ("cycle", vec![(0, 1), (1, 2), (2, 3), (3, 0)]),
        ("triangle+leg", vec![(0, 1), (1, 2), (0, 2), (2, 3)]),
        ("cycle+diagonal", vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]),
        ("complete", vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    ]
}

fn cmax(m: &DMatrix<C>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn vdiff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn idx(d: &[u8]) -> HwMultiIndex {
    HwMultiIndex::from_digits(d).unwrap()
}

fn lib_matrix(m: &qutrit_hw::linalg::CMatrix) -> DMatrix<C> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn parse(s: &str) -> Vec<u8> {
    s.trim_start_matches('h')
        .split('h')
        .map(|d| d.parse().unwrap())
        .collect()
}

fn opt(restarts: usize) -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(restarts).with_seed(0)
}

struct Suite {
    results: Vec<(usize, bool)>,
}

impl Suite {
    fn report(&mut self, n: usize, name: &str, pass: bool, detail: &str) {
        println!(
            "criterion {n:>2} {name}: {} ({detail})",
            if pass { "PASS" } else { "FAIL" }
        );
        self.results.push((n, pass));
    }

    fn note(&self, text: &str) {
        println!("             note: {text}");
    }
}

fn algebra(s: &mut Suite, h: &[M3; 9]) {
    let start = Instant::now();
    let mut lit_err: f64 = 0.0;
    let mut unit_err: f64 = 0.0;
    let mut spec_err: f64 = 0.0;
    let id = h[0];
    for m in 0..9u8 {
        let lib = hw_matrix(HwLabel::new(m).unwrap());
        let lib: M3 = std::array::from_fn(|i| std::array::from_fn(|j| lib[(i, j)]));
        lit_err = lit_err.max(diff(&lib, &h[m as usize]));
        unit_err = unit_err.max(diff(&mul(&dagger(&lib), &lib), &id));
        // unitary with h^3 = I: every eigenvalue is a cube root of unity
        spec_err = spec_err.max(diff(&mul(&lib, &mul(&lib, &lib)), &id));
    }
    let mut eig_err: f64 = 0.0;
    let mut mub_err: f64 = 0.0;
    for m in 1..=4u8 {
        let basis = mub_basis(m).unwrap();
        for (k, v) in basis.iter().enumerate() {
            let hv = apply(h, &[m], v.as_slice());
            let expected: Vec<C> = v.iter().map(|x| x * w(k as i64)).collect();
            eig_err = eig_err.max(vdiff(&hv, &expected));
        }
        for m2 in 1..=4u8 {
            let other = mub_basis(m2).unwrap();
            for (i, u) in basis.iter().enumerate() {
                for (j, v) in other.iter().enumerate() {
                    let o: C = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                    let target = if m == m2 {
                        if i == j {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        1.0 / 3.0
                    };
                    mub_err = mub_err.max((o.norm_sqr() - target).abs());
                }
            }
        }
    }
    // ω^p Z^z X^x with Z = diag(1, ω, ω²) and X|k⟩ = |k+1⟩ (h2†)
    let mut weyl_err: f64 = 0.0;
    for m in 0..9u8 {
        let e = HwLabel::new(m).unwrap().exponents();
        let mut prod = id;
        for _ in 0..e.z.value() {
            prod = mul(&prod, &h[1]);
        }
        for _ in 0..e.x.value() {
            prod = mul(&prod, &h[6]);
        }
        let prod = prod.map(|row| row.map(|x| x * w(e.phase.value() as i64)));
        weyl_err = weyl_err.max(diff(&prod, &h[m as usize]));
    }
    let mut mismatches = 0;
    let dense: Vec<DMatrix<C>> = (0..81u8).map(|i| tensor(h, &[i / 9, i % 9])).collect();
    for a in 0..81u8 {
        for b in 0..81u8 {
            let k = commutation_phase(&idx(&[a / 9, a % 9]), &idx(&[b / 9, b % 9]))
                .unwrap()
                .value() as i64;
            let (ab, ba) = (
                &dense[a as usize] * &dense[b as usize],
                &dense[b as usize] * &dense[a as usize],
            );
            if cmax(&(ab - ba * w(k))) > 1e-12 {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = lit_err < 1e-12
        && unit_err < 1e-12
        && spec_err < 1e-12
        && eig_err < 1e-12
        && mub_err < 1e-12
        && weyl_err < 1e-12
        && mismatches == 0
        && secs < 1.0;
    s.report(
        1,
        "operator algebra",
        pass,
        &format!(
            "literal {lit_err:.1e}, unitarity {unit_err:.1e}, h^3 = I {spec_err:.1e}, eigenvectors {eig_err:.1e}, \
             overlaps {mub_err:.1e}, Weyl form {weyl_err:.1e}, {mismatches} phase mismatches in 81^2 pairs, \
             tol 1e-12, {secs:.2} s < 1 s"
        ),
    );
}

/// `tr(ρ P_k)` with `P_k = (I + ω^{-k} h + ω^{-2k} h²)/3` projecting onto `h|v⟩ = ω^k|v⟩`.
fn oracle_distribution(h: &[M3; 9], rho: &DMatrix<C>, sites: usize) -> MubDistribution {
    let projector = |m: usize, k: i64| -> DMatrix<C> {
        let hm = to_dense(&h[m]);
        let h2 = &hm * &hm;
        (DMatrix::identity(3, 3) + hm * w(-k) + h2 * w(-2 * k)) / c(3.0)
    };
    let mut probs = BTreeMap::new();
    for flat in 0..4usize.pow(sites as u32) {
        let settings: Vec<u8> = (0..sites)
            .map(|s| (flat / 4usize.pow((sites - 1 - s) as u32) % 4) as u8 + 1)
            .collect();
        let p: Vec<f64> = (0..3usize.pow(sites as u32))
            .map(|out| {
                let p = settings
                    .iter()
                    .enumerate()
                    .fold(DMatrix::from_element(1, 1, c(1.0)), |acc, (s, &m)| {
                        let k = out / 3usize.pow((sites - 1 - s) as u32) % 3;
                        acc.kronecker(&projector(m as usize, k as i64))
                    });
                (rho * p).trace().re
            })
            .collect();
        probs.insert(settings, p);
    }
    MubDistribution::new(sites, probs).unwrap()
}

fn tomography(s: &mut Suite, h: &[M3; 9]) {
    let start = Instant::now();
    let mut single: f64 = 0.0;
    let mut prob_err: f64 = 0.0;
    for i in 0..100u64 {
        let rho = random_density(1, 1 + (i % 3) as usize, 1000 + i);
        let dense = lib_matrix(rho.matrix());
        let dist = oracle_distribution(h, &dense, 1);
        let lib = mub_probabilities(&rho).unwrap();
        for (m, p) in dist.settings() {
            prob_err = prob_err.max(
                p.iter()
                    .zip(lib.get(m).unwrap())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
        }
        let rec = reconstruct_single(&dist).unwrap();
        single = single.max(cmax(&(lib_matrix(rec.state.matrix()) - dense)));
    }
    let mut joint: f64 = 0.0;
    for i in 0..20u64 {
        let rho = random_density(2, 1 + (i % 9) as usize, 2000 + i);
        let dense = lib_matrix(rho.matrix());
        let rec = reconstruct_multi(&oracle_distribution(h, &dense, 2)).unwrap();
        joint = joint.max(cmax(&(lib_matrix(rec.state.matrix()) - dense)));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = single < 1e-10 && joint < 1e-9 && prob_err < 1e-12 && secs < 10.0;
    s.report(
        2,
        "tomography",
        pass,
        &format!(
            "single qutrit 100 states {single:.1e} (tol 1e-10), two qutrits 20 states {joint:.1e} (tol 1e-9), \
             outcome probabilities vs projectors {prob_err:.1e}, {secs:.2} s < 10 s"
        ),
    );
}

fn purity(s: &mut Suite, h: &[M3; 9]) {
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let rho = random_density(1, 1 + (i % 3) as usize, 3000 + i);
        let dense = lib_matrix(rho.matrix());
        let target = 3.0 * (&dense * &dense).trace().re;
        let mut sum = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut op = h[0];
                for _ in 0..a {
                    op = mul(&op, &h[1]);
                }
                for _ in 0..b {
                    op = mul(&op, &h[2]);
                }
                let t: C = dense.iter().zip(to_dense(&op).iter()).map(|(r, x)| r * x.conj()).sum();
                sum += t.norm_sqr();
            }
        }
        let lib = purity_fourier_sum(&rho).unwrap();
        worst = worst.max((sum - target).abs()).max((lib - target).abs());
    }
    s.report(
        3,
        "purity identity",
        worst < 1e-10,
        &format!("100 states, max deviation {worst:.1e} (tol 1e-10)"),
    );
}

/// The two-term pairs appearing in the reference four-qutrit criteria.
fn reference_pairs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("h1h5h1h5", "h2h2h2h2"),
        ("h1h1h5h5", "h1h5h1h5"),
        ("h0h2h5h2", "h2h0h2h5"),
        ("h5h2h0h2", "h2h5h2h0"),
        ("h3h8h4h7", "h6h0h2h5"),
        ("h3h8h4h7", "h0h5h2h5"),
        ("h2h5h5h5", "h1h6h6h4"),
        ("h2h5h5h5", "h5h6h6h0"),
        ("h3h3h3h3", "h1h2h1h2"),
        ("h3h3h3h3", "h1h0h1h6"),
        ("h2h5h5h5", "h4h3h3h7"),
        ("h2h5h5h5", "h8h3h0h3"),
        ("h4h2h6h2", "h0h3h7h1"),
        ("h4h2h6h2", "h3h7h0h5"),
        ("h2h8h8h8", "h0h3h3h3"),
        ("h2h8h8h8", "h3h3h3h0"),
    ]
}

fn pairwise(s: &mut Suite, h: &[M3; 9], table: &[[i64; 9]; 9]) {
    let start = Instant::now();
    let mut oracle_pairs = 0;
    for a in 1..81u8 {
        for b in (a + 1)..81u8 {
            let (x, y) = ([a / 9, a % 9], [b / 9, b % 9]);
            if (table[x[0] as usize][y[0] as usize] + table[x[1] as usize][y[1] as usize]) % 3 != 0 {
                oracle_pairs += 1;
            }
        }
    }
    let pairs = noncommuting_pairs(2);
    let report = scan_pairs(&pairs, &opt(200), 1e-6).unwrap();

    let mut cases = 0;
    let mut worst: f64 = 0.0;
    let mut cert_err: f64 = 0.0;
    for (a, b) in reference_pairs() {
        let (da, db) = (parse(a), parse(b));
        let terms = [Term::unit(idx(&da)), Term::unit(idx(&db))];
        for mask in cut_masks() {
            if !cut_noncommuting(table, &da, &db, mask) {
                continue;
            }
            let cut = Bipartition::from_mask(4, mask).unwrap();
            let r = separable_max_terms(&terms, &cut, &opt(200)).unwrap();
            let psi = r.argmax_state.as_slice();
            let recomputed = mean(h, &da, psi).norm_sqr() + mean(h, &db, psi).norm_sqr();
            cert_err = cert_err.max((recomputed - r.value).abs());
            worst = worst.max(r.value);
            cases += 1;
        }
    }
    let pass = report.pairs == oracle_pairs && report.max_value <= 1.0 + 1e-6 && worst <= 1.0 + 1e-6 && cert_err < 1e-9;
    s.report(
        4,
        "pairwise complementarity",
        pass,
        &format!(
            "numerical certification: {} non-commuting two-qutrit pairs (oracle {oracle_pairs}), 200 restarts, max {:.9}; \
             {cases} reference four-qutrit (pair, cut) cases max {worst:.9}; bound 1 + 1e-6; {:.1} s",
            report.pairs,
            report.max_value,
            start.elapsed().as_secs_f64()
        ),
    );
}

fn five_quarters(s: &mut Suite, h: &[M3; 9], table: &[[i64; 9]; 9]) {
    let sets = enumerate_noncommuting_sets(7, DEFAULT_SEARCH_GUARD).unwrap();
    let phase2 = |a: &[u8], b: &[u8]| (table[a[0] as usize][b[0] as usize] + table[a[1] as usize][b[1] as usize]) % 3;
    let step = (sets.sets.len() / 60).max(1);
    let sample: Vec<_> = sets.sets.iter().step_by(step).take(60).collect();
    let mut all_noncommuting = true;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut cert_err: f64 = 0.0;
    for set in &sample {
        let ops: Vec<Vec<u8>> = set.ops().iter().map(|o| o.digits()).collect();
        for i in 0..ops.len() {
            for j in (i + 1)..ops.len() {
                all_noncommuting &= phase2(&ops[i], &ops[j]) != 0;
            }
        }
        let r = max_sum_squared(set, &opt(200));
        let psi = r.argmax_state.as_slice();
        let recomputed: f64 = ops.iter().map(|o| mean(h, o, psi).norm_sqr()).sum();
        cert_err = cert_err.max((recomputed - r.value).abs());
        lo = lo.min(r.value);
        hi = hi.max(r.value);
    }
    let pass = sets.projective > 0
        && sample.len() >= 50
        && all_noncommuting
        && (lo - 1.25).abs() <= 1e-6
        && (hi - 1.25).abs() <= 1e-6
        && cert_err < 1e-9;
    s.report(
        5,
        "five-quarters maximum",
        pass,
        &format!(
            "{} sampled 7-sets, max in [{lo:.9}, {hi:.9}], target 1.25 +- 1e-6, pairwise non-commuting by oracle: {all_noncommuting}",
            sample.len()
        ),
    );
    let matches = sets.matches(792);
    s.note(&format!(
        "7-set counts vs 792: raw {}, dagger-quotient {}, projective {}, maximal {}; match: {}",
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
}

fn global(s: &mut Suite, h: &[M3; 9]) {
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for i in 0..50u64 {
        let rho = random_density(2, 1 + (i % 9) as usize, 4000 + i);
        let dense = lib_matrix(rho.matrix());
        let target = 9.0 * (&dense * &dense).trace().re;
        let mut sum = 0.0;
        for a in 0..9u8 {
            for b in 0..9u8 {
                sum += mean_rho(h, &[a, b], &dense).norm_sqr();
            }
        }
        let lib = global_bound_check(&rho).unwrap();
        worst = worst.max((sum - target).abs()).max((lib - target).abs());
        largest = largest.max(lib);
    }
    let pass = worst <= 1e-9 && largest <= 9.0 + 1e-9;
    s.report(
        6,
        "global bound",
        pass,
        &format!("50 states, max |sum - 9 tr rho^2| {worst:.1e} (tol 1e-9), largest {largest:.9}"),
    );
}

/// Separable maxima of `terms` on each claimed cut.
fn claimed_cuts(terms: &[Term], masks: &[u32]) -> Vec<(Bipartition, f64)> {
    masks
        .iter()
        .map(|&m| {
            let cut = Bipartition::from_mask(4, m).unwrap();
            let v = separable_max_terms(terms, &cut, &opt(200)).unwrap().value;
            (cut, v)
        })
        .collect()
}

fn ghz_criteria(s: &mut Suite, h: &[M3; 9]) {
    let psi = ghz(4);
    let lib = ghz_state(4).unwrap();
    let state_err = vdiff(lib.as_slice(), &psi);
    let corr = [
        "h2h2h2h2", "h1h1h5h5", "h1h5h1h5", "h1h5h5h1", "h5h1h1h5", "h5h1h5h1", "h5h5h1h1",
    ];
    let corr_err = corr
        .iter()
        .map(|o| (mean(h, &parse(o), &psi) - c(1.0)).norm())
        .fold(0.0, f64::max);

    // side A masks (bit s = site s+1): 1|3 cuts, AB|CD, AD|BC, AC|BD
    let one_three = [0b0001u32, 0b1101, 0b1011, 0b0111];
    let first: Vec<u32> = [0b0011u32, 0b1001].iter().chain(&one_three).copied().collect();
    let second: Vec<u32> = [0b0101u32].iter().chain(&one_three).copied().collect();
    let criteria = [("h1h5h1h5", "h2h2h2h2", first), ("h1h1h5h5", "h1h5h1h5", second)];
    let mut pass = state_err < 1e-12 && corr_err <= 1e-12;
    let mut covered = 0u32;
    let mut parts = Vec::new();
    for (a, b, masks) in &criteria {
        let terms = [Term::unit(idx(&parse(a))), Term::unit(idx(&parse(b)))];
        let value = mean(h, &parse(a), &psi).norm_sqr() + mean(h, &parse(b), &psi).norm_sqr();
        let lib_value = evaluate_terms(&terms, &lib).unwrap();
        pass &= (value - 2.0).abs() <= 1e-12 && (lib_value - 2.0).abs() <= 1e-12;
        let cuts = claimed_cuts(&terms, masks);
        let bad: Vec<String> = cuts
            .iter()
            .filter(|(_, v)| *v > 1.0 + 1e-6)
            .map(|(k, v)| format!("{k} {v:.6}"))
            .collect();
        pass &= bad.is_empty();
        covered |= masks.iter().fold(0, |acc, m| acc | 1 << m);
        parts.push(format!(
            "{a} + {b} = {value:.12}, claimed cuts above 1: [{}]",
            if bad.is_empty() { "none".into() } else { bad.join(", ") }
        ));
    }
    let cover = cut_masks().iter().all(|m| covered >> m & 1 == 1);
    pass &= cover;
    s.report(
        7,
        "GHZ criteria",
        pass,
        &format!(
            "{} correlations max |T - 1| {corr_err:.1e}; {}; claimed cuts cover all 7: {cover}",
            corr.len(),
            parts.join("; ")
        ),
    );
    let found = search_criteria(&lib, &SearchConfig::default()).unwrap();
    if let Some(best) = found.iter().find(|p| p.pairs_cover_all) {
        s.note(&format!(
            "search on the GHZ state: {} + ({}, {}) has each pair criterion violated (2.0) and covers all 7 cuts",
            best.base, best.partners[0], best.partners[1]
        ));
    }
}

fn cluster_criterion(s: &mut Suite, h: &[M3; 9]) {
    let psi = cluster();
    let lib = cluster_state_4();
    let state_err = vdiff(lib.as_slice(), &psi);
    let ops = ["h0h2h5h2", "h2h0h2h5", "h5h2h0h2", "h2h5h2h0"];
    let corr_err = ops
        .iter()
        .map(|o| (mean(h, &parse(o), &psi) - c(1.0)).norm())
        .fold(0.0, f64::max);
    let terms: Vec<Term> = ops.iter().map(|o| Term::new(0.5, idx(&parse(o)))).collect();
    let value: f64 = ops.iter().map(|o| 0.5 * mean(h, &parse(o), &psi).norm_sqr()).sum();
    let lib_value = evaluate_terms(&terms, &lib).unwrap();
    let cuts = claimed_cuts(&terms, &cut_masks());
    let bad: Vec<String> = cuts
        .iter()
        .filter(|(_, v)| *v > 1.0 + 1e-6)
        .map(|(k, v)| format!("{k} {v:.6}"))
        .collect();
    let pass = state_err < 1e-12
        && corr_err <= 1e-12
        && (value - 2.0).abs() <= 1e-12
        && (lib_value - 2.0).abs() <= 1e-12
        && bad.is_empty();
    s.report(
        8,
        "cluster criterion",
        pass,
        &format!(
            "4 correlations max |T - 1| {corr_err:.1e}; value {value:.12}; separable max above 1 + 1e-6 on: [{}]",
            if bad.is_empty() { "none".into() } else { bad.join(", ") }
        ),
    );
}

fn graphs(s: &mut Suite, h: &[M3; 9], table: &[[i64; 9]; 9]) {
    let canon = canonical_edges();
    let mut pass = true;
    let mut counts = Vec::new();
    for ((name, edges), (lib_name, lib_graph)) in canon.iter().zip(qutrit_hw::states::canonical_graphs()) {
        let psi = graph(edges);
        let lib = graph_state(&lib_graph).unwrap();
        let mut count = 0;
        for flat in 1..6561usize {
            let labels = [flat / 729, flat / 81 % 9, flat / 9 % 9, flat % 9].map(|x| x as u8);
            if mean(h, &labels, &psi).norm() > 1.0 - 1e-9 {
                count += 1;
            }
        }
        let lib_count = perfect_correlations(&lib, 1e-9).unwrap().len();
        pass &= count == 80 && lib_count == 80 && *name == lib_name && vdiff(lib.as_slice(), &psi) < 1e-12;
        counts.push(count);
    }

    let reference = [
        ("h3h8h4h7", ["h6h0h2h5", "h0h5h2h5"]),
        ("h2h5h5h5", ["h1h6h6h4", "h5h6h6h0"]),
        ("h3h3h3h3", ["h1h2h1h2", "h1h0h1h6"]),
        ("h2h5h5h5", ["h4h3h3h7", "h8h3h0h3"]),
        ("h4h2h6h2", ["h0h3h7h1", "h3h7h0h5"]),
        ("h2h8h8h8", ["h0h3h3h3", "h3h3h3h0"]),
    ];
    let mut perms = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c2 in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c2, d];
                    if (0..4).all(|i| p.contains(&i)) {
                        perms.push(p);
                    }
                }
            }
        }
    }
    let mut reference_parts = Vec::new();
    for (n, (base, partners)) in reference.iter().enumerate() {
        let ops = [parse(base), parse(partners[0]), parse(partners[1])];
        let mut hit = None;
        'search: for (g, (_, edges)) in canon.iter().enumerate() {
            for p in &perms {
                let relabeled: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (p[u], p[v])).collect();
                let psi = graph(&relabeled);
                let means: Vec<f64> = ops.iter().map(|o| mean(h, o, &psi).norm()).collect();
                if means.iter().all(|m| (m - 1.0).abs() < 1e-9) {
                    hit = Some((
                        g + 1,
                        *p,
                        means[0].powi(2) + means[1].powi(2),
                        means[0].powi(2) + means[2].powi(2),
                    ));
                    break 'search;
                }
            }
        }
        match hit {
            Some((g, p, v1, v2)) if v1 > 1.0 && v2 > 1.0 => {
                reference_parts.push(format!("graph {} pair on graph {g} {p:?}: {v1:.6}, {v2:.6}", n + 1))
            }
            _ => {
                pass = false;
                reference_parts.push(format!("graph {} pair: no graph and relabeling", n + 1));
            }
        }
    }

    let mut regenerated = Vec::new();
    for (name, edges) in &canon {
        let psi = graph(edges);
        let lib = graph_state(&Graph::new(4, edges).unwrap()).unwrap();
        let found = search_criteria(&lib, &SearchConfig::default()).unwrap();
        let ok = found.first().is_some_and(|p| {
            let ops: Vec<Vec<u8>> = p.operators().iter().map(|o| o.digits()).collect();
            let unimodular = ops.iter().all(|o| (mean(h, o, &psi).norm() - 1.0).abs() < 1e-9);
            let covers = cut_masks()
                .iter()
                .all(|&m| cut_noncommuting(table, &ops[0], &ops[1], m) || cut_noncommuting(table, &ops[0], &ops[2], m));
            let measurable = p.series.len() <= 2
                && ops.iter().all(|o| {
                    p.series.iter().any(|series| {
                        o.iter()
                            .zip(&series.setting.0)
                            .all(|(&l, s)| l == 0 || s.is_some_and(|m| (l - 1) % 4 + 1 == m))
                    })
                });
            let values = [
                mean(h, &ops[0], &psi).norm_sqr() + mean(h, &ops[1], &psi).norm_sqr(),
                mean(h, &ops[0], &psi).norm_sqr() + mean(h, &ops[2], &psi).norm_sqr(),
            ];
            unimodular && covers && measurable && values.iter().all(|v| *v > 1.0)
        });
        pass &= ok;
        regenerated.push(format!("{name}: {} triples, first valid {ok}", found.len()));
    }
    s.report(
        9,
        "graph-state criteria",
        pass,
        &format!(
            "perfect correlations per graph {counts:?} (expected 80); {}; search: {}",
            reference_parts.join("; "),
            regenerated.join(", ")
        ),
    );
}

fn product(s: &mut Suite, h: &[M3; 9]) {
    let mut rng = ChaCha8Rng::seed_from_u64(5000);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let sites = rng.gen_range(2..=4usize);
        let mask = rng.gen_range(1..(1u32 << sites) - 1);
        let cut = Bipartition::from_mask(sites, mask).unwrap();
        let spec = random_product(&cut, 6000 + i);
        let labels: Vec<u8> = (0..sites).map(|_| rng.gen_range(0..9u8)).collect();
        let (la, lb): (Vec<u8>, Vec<u8>) = (
            cut.side_a().iter().map(|&s| labels[s]).collect(),
            cut.side_b().iter().map(|&s| labels[s]).collect(),
        );
        let full = mean(h, &labels, spec.to_pure().as_slice()).norm();
        let fa = mean(h, &la, spec.factor_a.as_slice()).norm();
        let fb = mean(h, &lb, spec.factor_b.as_slice()).norm();
        worst = worst.max((full - fa * fb).abs());
    }
    let mut gram: f64 = 0.0;
    for d in 2..=6usize {
        let v = simplex_vectors(d).unwrap();
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = v.vectors[i].iter().zip(&v.vectors[j]).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { -1.0 / (d as f64 - 1.0) };
                gram = gram.max((dot - target).abs());
            }
        }
    }
    let pass = worst <= 1e-12 && gram <= 1e-12;
    s.report(
        10,
        "product factorization",
        pass,
        &format!(
            "100 product states max deviation {worst:.1e} (tol 1e-12); simplex Gram d = 2..6 max error {gram:.1e}"
        ),
    );
}

fn mixing(s: &mut Suite, h: &[M3; 9]) {
    let criterion = Criterion::pair(idx(&[2, 2, 2, 2]), idx(&[0, 1, 1, 1])).unwrap();
    let ops = [parse("h2h2h2h2"), parse("h0h1h1h1")];
    let mut rng = ChaCha8Rng::seed_from_u64(7000);
    let pool: Vec<DensityMatrix> = vec![ghz_state(4).unwrap().density(), cluster_state_4().density()];
    let mut worst = f64::NEG_INFINITY;
    let mut oracle_err: f64 = 0.0;
    for i in 0..100u64 {
        let k = rng.gen_range(2..=4usize);
        let comps: Vec<DensityMatrix> = (0..k)
            .map(|j| match rng.gen_range(0..4) {
                0 | 1 => pool[rng.gen_range(0..pool.len())].clone(),
                2 => random_pure(4, 8000 + 10 * i + j as u64).density(),
                _ => random_density(4, rng.gen_range(1..5), 9000 + 10 * i + j as u64),
            })
            .collect();
        let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        let mix: Vec<(f64, DensityMatrix)> = raw.iter().map(|p| p / total).zip(comps.iter().cloned()).collect();
        let rho = DensityMatrix::mixture(&mix).unwrap();
        let value = criterion.evaluate(&rho).unwrap();
        let dense = lib_matrix(rho.matrix());
        let oracle: f64 = ops.iter().map(|o| mean_rho(h, o, &dense).norm_sqr()).sum();
        oracle_err = oracle_err.max((oracle - value).abs());
        let best = comps
            .iter()
            .map(|r| criterion.evaluate(r).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(value - best);
    }
    let pass = worst <= 1e-9 && oracle_err < 1e-12;
    s.report(
        11,
        "mixing",
        pass,
        &format!("100 mixtures, max excess over best component {worst:.2e} (tol 1e-9), value vs dense oracle {oracle_err:.1e}"),
    );
}

fn main() {
    let h = literal();
    let table = phase_table(&h);
    let mut s = Suite { results: Vec::new() };
    algebra(&mut s, &h);
    tomography(&mut s, &h);
    purity(&mut s, &h);
    pairwise(&mut s, &h, &table);
    five_quarters(&mut s, &h, &table);
    global(&mut s, &h);
    ghz_criteria(&mut s, &h);
    cluster_criterion(&mut s, &h);
    graphs(&mut s, &h, &table);
    product(&mut s, &h);
    mixing(&mut s, &h);
    let passed = s.results.iter().filter(|r| r.1).count();
    let failed: Vec<String> = s.results.iter().filter(|r| !r.1).map(|r| r.0.to_string()).collect();
    println!(
        "acceptance: {passed} of {} criteria passed{}",
        s.results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
