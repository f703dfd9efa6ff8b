//! Heisenberg-Weyl operator algebra for qutrits.
//!
//! The nine operators `h_0..h_8` are stored twice: as literal dense 3×3
//! matrices and as exact Weyl exponents `ω^phase · Z^z · X^x` over Z3, where
//! `Z = diag(1, ω, ω²)` and `X|j⟩ = |j+1⟩`. The exponent table is derived from
//! the dense matrices once and everything exact (commutation phases, operator
//! products, stabilizer arithmetic) runs on the integers.
//!
//! Dense tensor products use the row-major Kronecker convention: site 1 is the
//! slowest-varying digit of a basis index.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{digits, flat_index, kron, max_abs_diff, omega_pow, CMatrix, CVector, C64};

/// Largest site count for which dense `3^N × 3^N` matrices are built.
pub const MAX_DENSE_SITES: usize = 6;

/// Element of Z3, used for ω-powers and Weyl exponents.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Z3(u8);

impl Z3 {
    pub const ZERO: Z3 = Z3(0);
    pub const ONE: Z3 = Z3(1);
    pub const TWO: Z3 = Z3(2);

    pub fn new(v: i64) -> Self {
        Z3(v.rem_euclid(3) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// ω raised to this power.
    pub fn omega(self) -> C64 {
        omega_pow(self.0 as i64)
    }
}

impl Add for Z3 {
    type Output = Z3;
    fn add(self, rhs: Z3) -> Z3 {
        Z3((self.0 + rhs.0) % 3)
    }
}

impl AddAssign for Z3 {
    fn add_assign(&mut self, rhs: Z3) {
        *self = *self + rhs;
    }
}

impl Sub for Z3 {
    type Output = Z3;
    fn sub(self, rhs: Z3) -> Z3 {
        Z3((self.0 + 3 - rhs.0) % 3)
    }
}

impl Mul for Z3 {
    type Output = Z3;
    fn mul(self, rhs: Z3) -> Z3 {
        Z3((self.0 * rhs.0) % 3)
    }
}

impl Neg for Z3 {
    type Output = Z3;
    fn neg(self) -> Z3 {
        Z3((3 - self.0) % 3)
    }
}

impl fmt::Display for Z3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Index `m` of a single-qutrit operator `h_m`, `0 ≤ m ≤ 8`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct HwLabel(u8);

impl HwLabel {
    pub const IDENTITY: HwLabel = HwLabel(0);

    pub fn new(m: u8) -> Result<Self> {
        if m <= 8 {
            Ok(HwLabel(m))
        } else {
            Err(Error::LabelOutOfRange(m as i64))
        }
    }

    pub fn all() -> impl Iterator<Item = HwLabel> {
        (0..9).map(HwLabel)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// Label of `h_m†`: 1↔5, 2↔6, 3↔7, 4↔8, 0 fixed.
    pub fn dagger(self) -> HwLabel {
        match self.0 {
            0 => self,
            m @ 1..=4 => HwLabel(m + 4),
            m => HwLabel(m - 4),
        }
    }

    /// The MUB (1..=4) in which `h_m` is diagonal; `None` for the identity.
    pub fn mub(self) -> Option<u8> {
        match self.0 {
            0 => None,
            m => Some((m - 1) % 4 + 1),
        }
    }

    pub fn exponents(self) -> WeylExponents {
        weyl_table()[self.0 as usize]
    }

    /// The label with the given Z and X exponents, together with the phase
    /// `q` such that `Z^z X^x = ω^q h_label`.
    pub fn from_zx(z: Z3, x: Z3) -> (Z3, HwLabel) {
        let table = weyl_table();
        let m = table
            .iter()
            .position(|e| e.z == z && e.x == x)
            .expect("every (z, x) pair labels exactly one operator");
        (-table[m].phase, HwLabel(m as u8))
    }
}

impl TryFrom<u8> for HwLabel {
    type Error = Error;
    fn try_from(m: u8) -> Result<Self> {
        HwLabel::new(m)
    }
}

impl From<HwLabel> for u8 {
    fn from(l: HwLabel) -> u8 {
        l.0
    }
}

impl fmt::Display for HwLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// Exact form `ω^phase · Z^z · X^x` of a single-qutrit operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylExponents {
    pub phase: Z3,
    pub z: Z3,
    pub x: Z3,
}

impl WeylExponents {
    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(3, 3);
        // Z^z X^x |j⟩ = ω^{z(j+x)} |j+x⟩
        for j in 0..3 {
            let row = (j + self.x.value() as usize) % 3;
            let power = self.phase.value() as i64 + self.z.value() as i64 * row as i64;
            m[(row, j)] = omega_pow(power);
        }
        m
    }
}

/// Literal matrix of `h_m`.
pub fn hw_matrix(m: HwLabel) -> CMatrix {
    let o = |k: i64| omega_pow(k);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let base = |m: u8| -> CMatrix {
        let rows: [[C64; 3]; 3] = match m {
            0 => [[one, zero, zero], [zero, one, zero], [zero, zero, one]],
            1 => [[one, zero, zero], [zero, o(1), zero], [zero, zero, o(2)]],
            2 => [[zero, one, zero], [zero, zero, one], [one, zero, zero]],
            3 => [[zero, one, zero], [zero, zero, o(1)], [o(2), zero, zero]],
            4 => [[zero, one, zero], [zero, zero, o(2)], [o(1), zero, zero]],
            _ => unreachable!(),
        };
        CMatrix::from_fn(3, 3, |r, c| rows[r][c])
    };
    match m.0 {
        k @ 0..=4 => base(k),
        k => base(k - 4).adjoint(),
    }
}

pub fn weyl_exponents(m: HwLabel) -> WeylExponents {
    m.exponents()
}

fn weyl_table() -> &'static [WeylExponents; 9] {
    static TABLE: OnceLock<[WeylExponents; 9]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let candidates: Vec<WeylExponents> = (0..27)
            .map(|t| WeylExponents {
                phase: Z3::new(t / 9),
                z: Z3::new(t / 3 % 3),
                x: Z3::new(t % 3),
            })
            .collect();
        let mut table = [WeylExponents {
            phase: Z3::ZERO,
            z: Z3::ZERO,
            x: Z3::ZERO,
        }; 9];
        for (m, slot) in table.iter_mut().enumerate() {
            let dense = hw_matrix(HwLabel(m as u8));
            *slot = *candidates
                .iter()
                .find(|e| max_abs_diff(&e.matrix(), &dense) < 1e-12)
                .expect("h_m is a phase times a clock-shift product");
        }
        table
    })
}

/// Tensor-product label `h_{i_1} ⊗ h_{i_2} ⊗ …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<HwLabel>", into = "Vec<HwLabel>")]
pub struct HwMultiIndex(Vec<HwLabel>);

impl HwMultiIndex {
    pub fn new(labels: Vec<HwLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyMultiIndex);
        }
        Ok(HwMultiIndex(labels))
    }

    pub fn from_digits(labels: &[u8]) -> Result<Self> {
        let labels = labels.iter().map(|&m| HwLabel::new(m)).collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }

    pub fn identity(sites: usize) -> Self {
        assert!(sites >= 1);
        HwMultiIndex(vec![HwLabel::IDENTITY; sites])
    }

    /// All `9^sites` multi-indices, site 1 slowest.
    pub fn all(sites: usize) -> impl Iterator<Item = HwMultiIndex> {
        let total = 9usize.pow(sites as u32);
        (0..total).map(move |flat| Self::from_flat(flat, sites))
    }

    /// All multi-indices except the global identity.
    pub fn nontrivial(sites: usize) -> impl Iterator<Item = HwMultiIndex> {
        Self::all(sites).skip(1)
    }

    pub fn from_flat(mut flat: usize, sites: usize) -> Self {
        let mut labels = vec![HwLabel::IDENTITY; sites];
        for slot in labels.iter_mut().rev() {
            *slot = HwLabel((flat % 9) as u8);
            flat /= 9;
        }
        HwMultiIndex(labels)
    }

    pub fn to_flat(&self) -> usize {
        self.0.iter().fold(0, |acc, l| acc * 9 + l.0 as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[HwLabel] {
        &self.0
    }

    pub fn digits(&self) -> Vec<u8> {
        self.0.iter().map(|l| l.0).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|l| l.is_identity())
    }

    pub fn dagger(&self) -> Self {
        HwMultiIndex(self.0.iter().map(|l| l.dagger()).collect())
    }

    /// Sub-index on the given sites (0-based), in the given order.
    pub fn restrict(&self, sites: &[usize]) -> Self {
        HwMultiIndex(sites.iter().map(|&s| self.0[s]).collect())
    }

    /// Relabels sites so that site `s` of the result carries label `self[perm[s]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len());
        HwMultiIndex(perm.iter().map(|&p| self.0[p]).collect())
    }

    /// Symplectic (z, x) coordinates per site, phases dropped.
    pub fn symplectic(&self) -> Vec<(Z3, Z3)> {
        self.0
            .iter()
            .map(|l| {
                let e = l.exponents();
                (e.z, e.x)
            })
            .collect()
    }

    /// Sum of the per-site phases: `O = ω^phase ⊗ Z^z X^x`.
    pub fn phase(&self) -> Z3 {
        self.0.iter().fold(Z3::ZERO, |acc, l| acc + l.exponents().phase)
    }
}

impl TryFrom<Vec<HwLabel>> for HwMultiIndex {
    type Error = Error;
    fn try_from(labels: Vec<HwLabel>) -> Result<Self> {
        HwMultiIndex::new(labels)
    }
}

impl From<HwMultiIndex> for Vec<HwLabel> {
    fn from(idx: HwMultiIndex) -> Self {
        idx.0
    }
}

impl fmt::Display for HwMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Accepts `h1h5h1h5`, `1,5,1,5` or `1515`.
impl FromStr for HwMultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = if s.contains('h') {
            s.split('h').filter(|p| !p.is_empty()).collect()
        } else if s.contains(',') {
            s.split(',').map(str::trim).collect()
        } else {
            s.split("").filter(|p| !p.is_empty()).collect()
        };
        let labels = parts
            .iter()
            .map(|p| {
                let v: i64 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad label {p:?} in {s:?}")))?;
                if (0..=8).contains(&v) {
                    Ok(HwLabel(v as u8))
                } else {
                    Err(Error::LabelOutOfRange(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        HwMultiIndex::new(labels)
    }
}

/// Dense `3^N × 3^N` matrix of the tensor product.
pub fn tensor_operator(idx: &HwMultiIndex) -> Result<CMatrix> {
    if idx.len() > MAX_DENSE_SITES {
        return Err(Error::DimensionGuard {
            sites: idx.len(),
            limit: MAX_DENSE_SITES,
        });
    }
    let mut out = hw_matrix(idx.0[0]);
    for &l in &idx.0[1..] {
        out = kron(&out, &hw_matrix(l));
    }
    Ok(out)
}

fn check_lengths(a: &HwMultiIndex, b: &HwMultiIndex) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// The `c` with `O_a O_b = ω^c O_b O_a`.
pub fn commutation_phase(a: &HwMultiIndex, b: &HwMultiIndex) -> Result<Z3> {
    check_lengths(a, b)?;
    Ok(a.0.iter().zip(&b.0).fold(Z3::ZERO, |acc, (la, lb)| {
        let (ea, eb) = (la.exponents(), lb.exponents());
        acc + ea.z * eb.x - eb.z * ea.x
    }))
}

pub fn commutes(a: &HwMultiIndex, b: &HwMultiIndex) -> Result<bool> {
    Ok(commutation_phase(a, b)?.is_zero())
}

/// Operator product `O_a O_b = ω^c O_ab`, returning `(c, ab)`.
pub fn multiply(a: &HwMultiIndex, b: &HwMultiIndex) -> Result<(Z3, HwMultiIndex)> {
    check_lengths(a, b)?;
    let mut phase = Z3::ZERO;
    let mut labels = Vec::with_capacity(a.len());
    for (la, lb) in a.0.iter().zip(&b.0) {
        let (ea, eb) = (la.exponents(), lb.exponents());
        // X^x Z^z' = ω^{-x z'} Z^z' X^x
        phase += ea.phase + eb.phase - ea.x * eb.z;
        let (q, label) = HwLabel::from_zx(ea.z + eb.z, ea.x + eb.x);
        phase += q;
        labels.push(label);
    }
    Ok((phase, HwMultiIndex(labels)))
}

/// Split of `N` sites into two nonempty sides. Canonical form keeps site 1
/// (index 0) on side A.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bipartition {
    sites: u8,
    side_a: u32,
}

impl Bipartition {
    /// `side_a` holds 0-based site indices.
    pub fn new(sites: usize, side_a: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &s in side_a {
            if s >= sites {
                return Err(Error::SiteOutOfRange { site: s, sites });
            }
            mask |= 1 << s;
        }
        Self::from_mask(sites, mask)
    }

    pub fn from_mask(sites: usize, mask: u32) -> Result<Self> {
        assert!(sites <= 31);
        let full = (1u32 << sites) - 1;
        let mask = mask & full;
        if mask == 0 || mask == full {
            return Err(Error::TrivialCut);
        }
        let side_a = if mask & 1 == 1 { mask } else { full ^ mask };
        Ok(Bipartition {
            sites: sites as u8,
            side_a,
        })
    }

    /// All `2^{N-1} - 1` nontrivial cuts, ordered by size of side A then lexicographically.
    pub fn all(sites: usize) -> Vec<Bipartition> {
        let full = (1u32 << sites) - 1;
        let mut cuts: Vec<Bipartition> = (1..full)
            .filter(|m| m & 1 == 1)
            .map(|m| Bipartition {
                sites: sites as u8,
                side_a: m,
            })
            .collect();
        cuts.sort_by_key(|c| (c.side_a.count_ones(), c.side_a()));
        cuts
    }

    pub fn sites(&self) -> usize {
        self.sites as usize
    }

    pub fn mask(&self) -> u32 {
        self.side_a
    }

    pub fn side_a(&self) -> Vec<usize> {
        (0..self.sites()).filter(|&s| self.side_a >> s & 1 == 1).collect()
    }

    pub fn side_b(&self) -> Vec<usize> {
        (0..self.sites()).filter(|&s| self.side_a >> s & 1 == 0).collect()
    }

    pub fn on_side_a(&self, site: usize) -> bool {
        self.side_a >> site & 1 == 1
    }

    /// Side A as 1-based site numbers.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.side_a().into_iter().map(|s| s + 1).collect()
    }

    pub fn from_one_based(sites: usize, side_a: &[usize]) -> Result<Self> {
        let zero_based = side_a
            .iter()
            .map(|&s| s.checked_sub(1).ok_or(Error::SiteOutOfRange { site: 0, sites }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(sites, &zero_based)
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |s: usize| -> String {
            if self.sites() <= 26 {
                ((b'A' + s as u8) as char).to_string()
            } else {
                format!("[{}]", s + 1)
            }
        };
        let a: String = self.side_a().into_iter().map(name).collect();
        let b: String = self.side_b().into_iter().map(name).collect();
        write!(f, "{a}|{b}")
    }
}

/// Parses the letter form `AB|CD`; every site must appear exactly once.
impl FromStr for Bipartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::Parse(format!("cut {s:?} lacks '|'")))?;
        let sites = a.len() + b.len();
        let mut seen = 0u32;
        let mut mask = 0u32;
        for (side_a, part) in [(true, a), (false, b)] {
            for c in part.chars() {
                let site = (c as u32).wrapping_sub('A' as u32) as usize;
                if !c.is_ascii_uppercase() || site >= sites || seen >> site & 1 == 1 {
                    return Err(Error::Parse(format!("bad cut {s:?}")));
                }
                seen |= 1 << site;
                if side_a {
                    mask |= 1 << site;
                }
            }
        }
        Self::from_mask(sites, mask)
    }
}

impl Serialize for Bipartition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bipartition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// True iff the restrictions of `a` and `b` commute on side A and on side B.
pub fn cut_commutes(a: &HwMultiIndex, b: &HwMultiIndex, cut: &Bipartition) -> Result<bool> {
    check_lengths(a, b)?;
    if cut.sites() != a.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: cut.sites(),
        });
    }
    let (sa, sb) = (cut.side_a(), cut.side_b());
    Ok(commutation_phase(&a.restrict(&sa), &b.restrict(&sa))?.is_zero()
        && commutation_phase(&a.restrict(&sb), &b.restrict(&sb))?.is_zero())
}

/// Matrix-free form of a tensor-product operator: `O|j⟩ = ω^{phase_j} |target_j⟩`.
#[derive(Clone, Debug)]
pub struct WeylOperator {
    sites: usize,
    targets: Vec<u32>,
    phases: Vec<u8>,
}

impl WeylOperator {
    pub fn new(idx: &HwMultiIndex) -> Self {
        let sites = idx.len();
        let exps: Vec<WeylExponents> = idx.labels().iter().map(|l| l.exponents()).collect();
        let dim = 3usize.pow(sites as u32);
        let mut targets = Vec::with_capacity(dim);
        let mut phases = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut ds = digits(j, sites);
            let mut phase = Z3::ZERO;
            for (d, e) in ds.iter_mut().zip(&exps) {
                *d = (*d + e.x.value() as usize) % 3;
                phase += e.phase + e.z * Z3::new(*d as i64);
            }
            targets.push(flat_index(&ds) as u32);
            phases.push(phase.value());
        }
        WeylOperator { sites, targets, phases }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.targets.len()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); v.len()];
        for (j, (&t, &p)) in self.targets.iter().zip(&self.phases).enumerate() {
            out[t as usize] = omega_pow(p as i64) * v[j];
        }
        out
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        self.targets
            .iter()
            .zip(&self.phases)
            .map(|(&t, &p)| omega_pow(-(p as i64)) * v[t as usize])
            .collect()
    }

    /// `⟨v|O|v⟩`.
    pub fn sandwich(&self, v: &[C64]) -> C64 {
        self.targets
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(j, (&t, &p))| v[t as usize].conj() * omega_pow(p as i64) * v[j])
            .sum()
    }

    /// `tr(ρ O†)` for a dense `ρ`.
    pub fn trace_with_adjoint(&self, rho: &CMatrix) -> C64 {
        self.targets
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(j, (&t, &p))| rho[(t as usize, j)] * omega_pow(-(p as i64)))
            .sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (j, (&t, &p)) in self.targets.iter().zip(&self.phases).enumerate() {
            m[(t as usize, j)] = omega_pow(p as i64);
        }
        m
    }
}

fn mub_table() -> &'static [[CVector; 3]; 4] {
    static TABLE: OnceLock<[[CVector; 3]; 4]> = OnceLock::new();
    TABLE.get_or_init(|| std::array::from_fn(|i| eigenbasis(HwLabel(i as u8 + 1))))
}

// Spectral projector P_k = (1/3) Σ_j ω^{-jk} U^j onto the ω^k eigenspace (U³ = I).
fn eigenbasis(label: HwLabel) -> [CVector; 3] {
    let u = hw_matrix(label);
    let powers = [CMatrix::identity(3, 3), u.clone(), &u * &u];
    std::array::from_fn(|k| {
        let mut p = CMatrix::zeros(3, 3);
        for (j, uj) in powers.iter().enumerate() {
            p += uj * omega_pow(-((j * k) as i64));
        }
        p /= C64::new(3.0, 0.0);
        let col = (0..3)
            .max_by(|&a, &b| p.column(a).norm().partial_cmp(&p.column(b).norm()).unwrap())
            .unwrap();
        let mut v: CVector = p.column(col).into_owned();
        v /= C64::new(v.norm(), 0.0);
        let lead = v.iter().copied().find(|z| z.norm() > 1e-9).unwrap();
        v * (lead.conj() / lead.norm())
    })
}

/// Eigenbasis of `h_m` (m = 1..4), ordered so that `h_m |mk⟩ = ω^k |mk⟩`.
pub fn mub_basis(m: u8) -> Result<[CVector; 3]> {
    if !(1..=4).contains(&m) {
        return Err(Error::MubOutOfRange(m));
    }
    Ok(mub_table()[m as usize - 1].clone())
}

/// Columns are the basis vectors of `mub_basis(m)`.
pub fn mub_matrix(m: u8) -> Result<CMatrix> {
    let basis = mub_basis(m)?;
    Ok(CMatrix::from_columns(&basis))
}

/// `d` unit vectors in R^{d-1} with pairwise dot products `-1/(d-1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexVectors {
    pub d: usize,
    pub vectors: Vec<Vec<f64>>,
}

impl SimplexVectors {
    pub fn gram(&self) -> Vec<Vec<f64>> {
        self.vectors
            .iter()
            .map(|a| {
                self.vectors
                    .iter()
                    .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                    .collect()
            })
            .collect()
    }

    /// Largest deviation of the Gram matrix from `(d δ_ij - 1)/(d - 1)`.
    pub fn gram_error(&self) -> f64 {
        let d = self.d as f64;
        let mut worst: f64 = 0.0;
        for (i, row) in self.gram().iter().enumerate() {
            for (j, &g) in row.iter().enumerate() {
                let expected = (if i == j { d } else { 0.0 } - 1.0) / (d - 1.0);
                worst = worst.max((g - expected).abs());
            }
        }
        worst
    }
}

/// Centred standard basis of R^d expressed in the Helmert basis of the
/// hyperplane orthogonal to (1, …, 1), rescaled to unit length.
pub fn simplex_vectors(d: usize) -> Result<SimplexVectors> {
    if d < 2 {
        return Err(Error::SimplexDimension(d));
    }
    let df = d as f64;
    let scale = (df / (df - 1.0)).sqrt();
    let vectors = (0..d)
        .map(|i| {
            (1..d)
                .map(|k| {
                    // u_k = (1, …, 1, -k, 0, …)/√(k(k+1)), with k leading ones
                    let norm = ((k * (k + 1)) as f64).sqrt();
                    let ui = match i.cmp(&k) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -(k as f64),
                        std::cmp::Ordering::Greater => 0.0,
                    } / norm;
                    // u_k is orthogonal to (1, …, 1), so u_k·(e_i - 1/d) = u_k[i]
                    ui * scale
                })
                .collect()
        })
        .collect();
    Ok(SimplexVectors { d, vectors })
}

/// A 2×2 matrix over Z3 with determinant 1, acting on per-site (z, x).
pub type SymplecticMap = [[u8; 2]; 2];

fn sl2_z3() -> Vec<SymplecticMap> {
    let mut out = Vec::new();
    for t in 0..81u32 {
        let (a, b, c, d) = ((t / 27) as u8, (t / 9 % 3) as u8, (t / 3 % 3) as u8, (t % 3) as u8);
        if (a * d + 2 * b * c) % 3 == 1 {
            out.push([[a, b], [c, d]]);
        }
    }
    out
}

/// Searches for per-site symplectic maps carrying the (phase-free) operator set
/// `from` onto `to`. Local Clifford equivalence of stabilizer states shows up
/// as such a map between their stabilizer label sets.
pub fn local_symplectic_equivalence(from: &[HwMultiIndex], to: &[HwMultiIndex]) -> Option<Vec<SymplecticMap>> {
    if from.len() != to.len() || from.is_empty() {
        return None;
    }
    let sites = from[0].len();
    let encode = |v: &[(u8, u8)]| -> Vec<u8> { v.iter().map(|&(z, x)| z * 3 + x).collect() };
    let src: Vec<Vec<(u8, u8)>> = from
        .iter()
        .map(|i| {
            i.symplectic()
                .into_iter()
                .map(|(z, x)| (z.value(), x.value()))
                .collect()
        })
        .collect();
    let dst: Vec<Vec<(u8, u8)>> = to
        .iter()
        .map(|i| {
            i.symplectic()
                .into_iter()
                .map(|(z, x)| (z.value(), x.value()))
                .collect()
        })
        .collect();
    // prefix projections of the target set, for pruning
    let prefixes: Vec<HashSet<Vec<u8>>> = (0..=sites)
        .map(|k| dst.iter().map(|v| encode(&v[..k])).collect())
        .collect();
    let group = sl2_z3();

    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    fn search(
        site: usize,
        sites: usize,
        mapped: &mut Vec<Vec<(u8, u8)>>,
        src: &[Vec<(u8, u8)>],
        prefixes: &[HashSet<Vec<u8>>],
        group: &[SymplecticMap],
        chosen: &mut Vec<SymplecticMap>,
        encode: &dyn Fn(&[(u8, u8)]) -> Vec<u8>,
    ) -> bool {
        if site == sites {
            return true;
        }
        for g in group {
            for (m, v) in mapped.iter_mut().zip(src) {
                let (z, x) = v[site];
                m.push(((g[0][0] * z + g[0][1] * x) % 3, (g[1][0] * z + g[1][1] * x) % 3));
            }
            let ok = mapped.iter().all(|m| prefixes[site + 1].contains(&encode(m)));
            if ok {
                chosen.push(*g);
                if search(site + 1, sites, mapped, src, prefixes, group, chosen, encode) {
                    return true;
                }
                chosen.pop();
            }
            for m in mapped.iter_mut() {
                m.pop();
            }
        }
        false
    }

    let mut mapped = vec![Vec::with_capacity(sites); src.len()];
    let mut chosen = Vec::new();
    search(0, sites, &mut mapped, &src, &prefixes, &group, &mut chosen, &encode).then_some(chosen)
}
