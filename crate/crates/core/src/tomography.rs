//! MUB statistics, correlation tensors, and linear state reconstruction.
//!
//! Single-qutrit inversion: `ρ = -I + Σ_{m=1}^{4} Σ_k p(m,k) |mk⟩⟨mk|`, or
//! equivalently in vector form `ρ = I/3 + (2/3) Σ_m T⃗_m·o⃗_m` with
//! `T_m = tr(ρ h_m†)` paired with `o = h_m†`. The many-qutrit version applies
//! the per-site affine map `|mk⟩⟨mk| - I/4` inside the joint sum.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hw::{hw_matrix, mub_basis, mub_matrix, HwLabel, HwMultiIndex, WeylOperator, MAX_DENSE_SITES};
use crate::linalg::{digits, kron, omega_pow, sig12, CMatrix, C64};
use crate::states::{DensityMatrix, QuantumState};

/// Largest site count accepted by joint-probability tomography.
pub const MAX_TOMOGRAPHY_SITES: usize = 3;

/// Tolerance on per-setting probability sums.
pub const SUM_TOL: f64 = 1e-9;

/// Joint outcome probabilities `p(m⃗, k⃗)` for product MUB settings.
///
/// Keys are setting vectors in `{1..4}^N`; each value lists `3^N` outcome
/// probabilities with site 1 as the slowest digit.
#[derive(Clone, Debug, PartialEq)]
pub struct MubDistribution {
    sites: usize,
    probs: BTreeMap<Vec<u8>, Vec<f64>>,
}

impl MubDistribution {
    pub fn new(sites: usize, probs: BTreeMap<Vec<u8>, Vec<f64>>) -> Result<Self> {
        let dist = MubDistribution { sites, probs };
        dist.validate()?;
        Ok(dist)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn get(&self, settings: &[u8]) -> Option<&[f64]> {
        self.probs.get(settings).map(Vec::as_slice)
    }

    pub fn settings(&self) -> impl Iterator<Item = (&Vec<u8>, &Vec<f64>)> {
        self.probs.iter()
    }

    fn validate(&self) -> Result<()> {
        let outcomes = 3usize.pow(self.sites as u32);
        for (m, p) in &self.probs {
            if m.len() != self.sites || m.iter().any(|s| !(1..=4).contains(s)) {
                return Err(Error::IncompleteData(format!("bad setting vector {m:?}")));
            }
            if p.len() != outcomes {
                return Err(Error::IncompleteData(format!(
                    "setting {m:?} has {} outcomes, want {outcomes}",
                    p.len()
                )));
            }
            if p.iter().any(|&x| !(-SUM_TOL..=1.0 + SUM_TOL).contains(&x)) {
                return Err(Error::IncompleteData(format!(
                    "setting {m:?} has a probability outside [0, 1]"
                )));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::IncompleteData(format!("setting {m:?} sums to {sum}")));
            }
        }
        Ok(())
    }

    fn require_complete(&self) -> Result<()> {
        for m in all_settings(self.sites) {
            if !self.probs.contains_key(&m) {
                return Err(Error::IncompleteData(format!("missing setting {m:?}")));
            }
        }
        Ok(())
    }

    /// Import from JSON records; counts are normalized per setting.
    pub fn from_records(records: &[MubRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::Empty("MUB record list"))?;
        let sites = first.settings.len();
        let outcomes = 3usize.pow(sites as u32);
        let mut probs = BTreeMap::new();
        for r in records {
            if r.settings.len() != sites {
                return Err(Error::LengthMismatch {
                    left: sites,
                    right: r.settings.len(),
                });
            }
            let (table, normalize) = match (&r.probs, &r.counts) {
                (Some(p), None) => (p, false),
                (None, Some(c)) => (c, true),
                _ => {
                    return Err(Error::Parse(
                        "each record needs exactly one of \"probs\" or \"counts\"".into(),
                    ))
                }
            };
            let mut p = vec![0.0; outcomes];
            for (key, &value) in table {
                p[parse_outcome(key, sites)?] += value;
            }
            if normalize {
                let total: f64 = p.iter().sum();
                if total <= 0.0 {
                    return Err(Error::IncompleteData(format!("setting {:?} has no counts", r.settings)));
                }
                p.iter_mut().for_each(|x| *x /= total);
            }
            if probs.insert(r.settings.clone(), p).is_some() {
                return Err(Error::Parse(format!("duplicate setting {:?}", r.settings)));
            }
        }
        Self::new(sites, probs)
    }

    pub fn to_records(&self) -> Vec<MubRecord> {
        self.probs
            .iter()
            .map(|(m, p)| MubRecord {
                settings: m.clone(),
                counts: None,
                probs: Some(
                    p.iter()
                        .enumerate()
                        .map(|(k, &x)| (outcome_key(k, self.sites), sig12(x)))
                        .collect(),
                ),
            })
            .collect()
    }
}

/// One setting's worth of data in the JSON exchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MubRecord {
    pub settings: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<BTreeMap<String, f64>>,
}

fn outcome_key(k: usize, sites: usize) -> String {
    digits(k, sites).iter().map(|d| char::from(b'0' + *d as u8)).collect()
}

fn parse_outcome(key: &str, sites: usize) -> Result<usize> {
    if key.len() != sites || !key.bytes().all(|b| (b'0'..=b'2').contains(&b)) {
        return Err(Error::Parse(format!(
            "outcome key {key:?} must be {sites} digits in 0..2"
        )));
    }
    Ok(key.bytes().fold(0, |acc, b| acc * 3 + (b - b'0') as usize))
}

fn all_settings(sites: usize) -> Vec<Vec<u8>> {
    (0..4usize.pow(sites as u32))
        .map(|mut t| {
            let mut m = vec![0u8; sites];
            for slot in m.iter_mut().rev() {
                *slot = (t % 4) as u8 + 1;
                t /= 4;
            }
            m
        })
        .collect()
}

fn product_basis(settings: &[u8]) -> CMatrix {
    let mut u = mub_matrix(settings[0]).expect("setting in 1..=4");
    for &m in &settings[1..] {
        u = kron(&u, &mub_matrix(m).expect("setting in 1..=4"));
    }
    u
}

/// `p(m⃗, k⃗) = ⟨m⃗k⃗|ρ|m⃗k⃗⟩` for all `4^N` product settings.
pub fn mub_probabilities(rho: &DensityMatrix) -> Result<MubDistribution> {
    rho.validate()?;
    if rho.sites() > MAX_TOMOGRAPHY_SITES {
        return Err(Error::DimensionGuard {
            sites: rho.sites(),
            limit: MAX_TOMOGRAPHY_SITES,
        });
    }
    let probs = all_settings(rho.sites())
        .into_par_iter()
        .map(|m| {
            let u = product_basis(&m);
            let rotated = u.adjoint() * rho.matrix() * &u;
            let p = (0..rotated.nrows())
                .map(|k| rotated[(k, k)].re.clamp(0.0, 1.0))
                .collect();
            (m, p)
        })
        .collect();
    MubDistribution::new(rho.sites(), probs)
}

/// Entries `T_idx = tr(ρ O_idx†)` keyed by multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTensor {
    sites: usize,
    entries: BTreeMap<HwMultiIndex, C64>,
}

impl CorrelationTensor {
    pub fn new(sites: usize, entries: BTreeMap<HwMultiIndex, C64>) -> Result<Self> {
        if let Some(bad) = entries.keys().find(|k| k.len() != sites) {
            return Err(Error::LengthMismatch {
                left: sites,
                right: bad.len(),
            });
        }
        Ok(CorrelationTensor { sites, entries })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: &HwMultiIndex) -> Option<C64> {
        self.entries.get(idx).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HwMultiIndex, &C64)> {
        self.entries.iter()
    }
}

/// All `9^N` entries.
pub fn correlation_tensor<S: QuantumState + Sync + ?Sized>(state: &S) -> Result<CorrelationTensor> {
    if state.sites() > MAX_DENSE_SITES {
        return Err(Error::DimensionGuard {
            sites: state.sites(),
            limit: MAX_DENSE_SITES,
        });
    }
    let all: Vec<HwMultiIndex> = HwMultiIndex::all(state.sites()).collect();
    correlation_tensor_subset(state, &all)
}

pub fn correlation_tensor_subset<S: QuantumState + Sync + ?Sized>(
    state: &S,
    indices: &[HwMultiIndex],
) -> Result<CorrelationTensor> {
    if let Some(bad) = indices.iter().find(|i| i.len() != state.sites()) {
        return Err(Error::DimensionMismatch {
            expected: state.sites(),
            found: bad.len(),
        });
    }
    let entries = indices
        .par_iter()
        .map(|i| (i.clone(), state.trace_adjoint(&WeylOperator::new(i))))
        .collect();
    CorrelationTensor::new(state.sites(), entries)
}

/// Correlation tensor computed from outcome statistics by a per-site discrete
/// Fourier transform: `h_m†` has eigenvalue `ω^{-k}` on `|mk⟩`, `h_{m+4}† = h_m`
/// has `ω^k`, and identity sites are marginalized.
pub fn tensor_from_probabilities(dist: &MubDistribution) -> Result<CorrelationTensor> {
    let sites = dist.sites();
    let mut entries = BTreeMap::new();
    for idx in HwMultiIndex::all(sites) {
        let settings: Vec<u8> = idx.labels().iter().map(|l| l.mub().unwrap_or(1)).collect();
        let p = dist
            .get(&settings)
            .ok_or_else(|| Error::IncompleteData(format!("missing setting {settings:?}")))?;
        let sign: Vec<i64> = idx
            .labels()
            .iter()
            .map(|l| match l.index() {
                0 => 0,
                1..=4 => -1,
                _ => 1,
            })
            .collect();
        let value: C64 = p
            .iter()
            .enumerate()
            .map(|(k, &pk)| {
                let power: i64 = digits(k, sites).iter().zip(&sign).map(|(&d, &s)| d as i64 * s).sum();
                omega_pow(power) * pk
            })
            .sum();
        entries.insert(idx, value);
    }
    CorrelationTensor::new(sites, entries)
}

/// Linear reconstruction result; may be unphysical for inconsistent input.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub state: DensityMatrix,
    pub min_eigenvalue: f64,
}

impl Reconstruction {
    fn from_matrix(sites: usize, m: CMatrix) -> Result<Self> {
        let state = DensityMatrix::new_unchecked(sites, m)?;
        let min_eigenvalue = state.min_eigenvalue();
        Ok(Reconstruction { state, min_eigenvalue })
    }

    pub fn is_physical(&self) -> bool {
        self.min_eigenvalue >= -1e-10
    }
}

fn projector(m: u8, k: usize) -> CMatrix {
    let v = &mub_basis(m).expect("setting in 1..=4")[k];
    v * v.adjoint()
}

/// `ρ = -I + Σ_{m,k} p(m,k) |mk⟩⟨mk|` for one qutrit.
pub fn reconstruct_single(dist: &MubDistribution) -> Result<Reconstruction> {
    if dist.sites() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: dist.sites(),
        });
    }
    dist.require_complete()?;
    let mut rho = -CMatrix::identity(3, 3);
    for m in 1..=4u8 {
        let p = dist.get(&[m]).expect("complete");
        for (k, &pk) in p.iter().enumerate() {
            rho += projector(m, k) * C64::new(pk, 0.0);
        }
    }
    Reconstruction::from_matrix(1, rho)
}

/// `ρ = I/3 + (2/3) Σ_m T⃗_m·o⃗_m`, where for `o = h_m†` the vector dot product
/// is `(conj(T_m) o + T_m o†)/2`.
pub fn reconstruct_from_tensor(tensor: &CorrelationTensor) -> Result<Reconstruction> {
    if tensor.sites() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: tensor.sites(),
        });
    }
    let mut rho = CMatrix::identity(3, 3) / C64::new(3.0, 0.0);
    for m in 1..=4u8 {
        let label = HwLabel::new(m)?;
        let direct = HwMultiIndex::new(vec![label])?;
        let t = match (tensor.get(&direct), tensor.get(&direct.dagger())) {
            (Some(t), _) => t,
            (None, Some(td)) => td.conj(),
            (None, None) => return Err(Error::IncompleteData(format!("no entry for h{m} or its adjoint"))),
        };
        let o = hw_matrix(label.dagger());
        let dot = (&o * t.conj() + o.adjoint() * t) * C64::new(0.5, 0.0);
        rho += dot * C64::new(2.0 / 3.0, 0.0);
    }
    Reconstruction::from_matrix(1, rho)
}

/// `ρ = Σ_{m⃗,k⃗} p(m⃗,k⃗) ⊗_s (|m_s k_s⟩⟨m_s k_s| - I/4)`.
pub fn reconstruct_multi(dist: &MubDistribution) -> Result<Reconstruction> {
    let sites = dist.sites();
    if sites > MAX_TOMOGRAPHY_SITES {
        return Err(Error::DimensionGuard {
            sites,
            limit: MAX_TOMOGRAPHY_SITES,
        });
    }
    dist.require_complete()?;
    let quarter = CMatrix::identity(3, 3) * C64::new(0.25, 0.0);
    let local: Vec<Vec<CMatrix>> = (1..=4u8)
        .map(|m| (0..3).map(|k| projector(m, k) - &quarter).collect())
        .collect();
    let dim = 3usize.pow(sites as u32);
    let rho = dist
        .settings()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(m, p)| {
            let mut acc = CMatrix::zeros(dim, dim);
            for (k, &pk) in p.iter().enumerate() {
                if pk == 0.0 {
                    continue;
                }
                let ks = digits(k, sites);
                let mut term = local[m[0] as usize - 1][ks[0]].clone();
                for s in 1..sites {
                    term = kron(&term, &local[m[s] as usize - 1][ks[s]]);
                }
                acc += term * C64::new(pk, 0.0);
            }
            acc
        })
        .reduce(|| CMatrix::zeros(dim, dim), |a, b| a + b);
    Reconstruction::from_matrix(sites, rho)
}
