//! Multimode bosonic Fock space.
//!
//! Occupations are stored sparsely: a [`Ket`] maps occupation vectors to
//! amplitudes, so probes with a handful of components (N00N-like states)
//! stay cheap at any photon number. A [`FockBasis`] is only built when a
//! dense representation is required, e.g. for lossy density operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Photon counts per mode. Mode 0 is the reference mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOccupation(Vec<u32>);

impl ModeOccupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    /// All `n` photons in `mode`, none elsewhere.
    pub fn concentrated(modes: usize, mode: usize, n: u32) -> Self {
        let mut counts = vec![0; modes];
        counts[mode] = n;
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }
}

impl fmt::Display for ModeOccupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "⟩")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Σ counts = n_max exactly.
    FixedTotal,
    /// Σ counts ≤ n_max.
    AtMostTotal,
}

/// Lexicographically ordered enumeration of admissible occupations.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    n_max: u32,
    kind: BasisKind,
    states: Vec<ModeOccupation>,
    index: HashMap<ModeOccupation, usize>,
}

impl FockBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ModeOccupation] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &ModeOccupation {
        &self.states[k]
    }

    pub fn index_of(&self, occupation: &ModeOccupation) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Diagonal of the number operator of `mode` in this basis.
    pub fn number_diagonal(&self, mode: usize) -> Result<Vec<f64>> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange { index: mode, modes: self.modes });
        }
        Ok(self.states.iter().map(|s| s.get(mode) as f64).collect())
    }
}

/// Enumerate occupations of `modes` modes with total `n_max` (fixed) or at
/// most `n_max`, in lexicographic order.
///
/// # Panics
/// If `modes == 0`.
pub fn build_basis(modes: usize, n_max: u32, kind: BasisKind) -> FockBasis {
    assert!(modes >= 1, "a Fock basis needs at least one mode");
    let mut states = Vec::new();
    let mut current = vec![0u32; modes];
    enumerate(&mut current, 0, n_max, kind, &mut states);
    let index = states.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
    FockBasis { modes, n_max, kind, states, index }
}

fn enumerate(
    current: &mut Vec<u32>,
    mode: usize,
    remaining: u32,
    kind: BasisKind,
    out: &mut Vec<ModeOccupation>,
) {
    let last = mode + 1 == current.len();
    if last && kind == BasisKind::FixedTotal {
        current[mode] = remaining;
        out.push(ModeOccupation(current.clone()));
        return;
    }
    for c in 0..=remaining {
        current[mode] = c;
        if last {
            out.push(ModeOccupation(current.clone()));
        } else {
            enumerate(current, mode + 1, remaining - c, kind, out);
        }
    }
    current[mode] = 0;
}

/// Sparse, not necessarily normalized, state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    modes: usize,
    terms: BTreeMap<ModeOccupation, C64>,
}

impl Ket {
    pub fn zero(modes: usize) -> Self {
        Self { modes, terms: BTreeMap::new() }
    }

    /// Sum of terms; repeated occupations accumulate.
    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ModeOccupation, C64)>,
    {
        let mut ket = Self::zero(modes);
        for (occ, amp) in terms {
            if occ.modes() != modes {
                return Err(Error::DimensionMismatch { expected: modes, got: occ.modes() });
            }
            *ket.terms.entry(occ).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        ket.terms.retain(|_, a| a.norm_sqr() > 0.0);
        Ok(ket)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModeOccupation, &C64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occ: &ModeOccupation) -> C64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total photon number over the support.
    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(ModeOccupation::total).max().unwrap_or(0)
    }

    /// Apply â^l on `mode`. Components with fewer than `l` photons vanish.
    pub fn annihilate(&self, mode: usize, l: u32) -> Result<Ket> {
        if mode >= self.modes {
            return Err(Error::ModeOutOfRange { index: mode, modes: self.modes });
        }
        let mut out = BTreeMap::new();
        for (occ, &amp) in &self.terms {
            let n = occ.get(mode);
            if n < l {
                continue;
            }
            // √(n(n−1)⋯(n−l+1))
            let factor = ((n - l + 1)..=n).map(f64::from).product::<f64>().sqrt();
            let mut reduced = occ.clone();
            reduced.0[mode] = n - l;
            *out.entry(reduced).or_insert(C64::new(0.0, 0.0)) += amp * factor;
        }
        Ok(Ket { modes: self.modes, terms: out })
    }

    /// Amplitudes aligned with `basis` order.
    pub fn to_dense(&self, basis: &FockBasis) -> Result<DVector<C64>> {
        if basis.modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: basis.modes(), got: self.modes });
        }
        let mut v = DVector::zeros(basis.len());
        for (occ, &amp) in &self.terms {
            let k = basis
                .index_of(occ)
                .ok_or_else(|| Error::OccupationNotInBasis(occ.counts().to_vec()))?;
            v[k] = amp;
        }
        Ok(v)
    }

    pub fn from_dense(basis: &FockBasis, amplitudes: &DVector<C64>) -> Result<Ket> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: amplitudes.len() });
        }
        Ket::from_terms(
            basis.modes(),
            basis.states().iter().cloned().zip(amplitudes.iter().copied()),
        )
    }
}

impl Add for &Ket {
    type Output = Ket;

    fn add(self, rhs: &Ket) -> Ket {
        assert_eq!(self.modes, rhs.modes, "adding kets over different mode counts");
        let mut terms = self.terms.clone();
        for (occ, &amp) in &rhs.terms {
            *terms.entry(occ.clone()).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        Ket { modes: self.modes, terms }
    }
}

impl Mul<&Ket> for C64 {
    type Output = Ket;

    fn mul(self, rhs: &Ket) -> Ket {
        Ket {
            modes: rhs.modes,
            terms: rhs.terms.iter().map(|(o, &a)| (o.clone(), self * a)).collect(),
        }
    }
}

/// Normalized pure probe state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    ket: Ket,
    real: bool,
}

impl PureState {
    /// Normalizes `ket`; fails on the zero vector.
    pub fn normalized(ket: Ket) -> Result<Self> {
        let norm = ket.norm_sqr().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let ket = C64::new(1.0 / norm, 0.0) * &ket;
        let real = ket.terms.values().all(|a| a.im == 0.0);
        Ok(Self { ket, real })
    }

    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    pub fn modes(&self) -> usize {
        self.ket.modes
    }

    /// Number of phase modes, i.e. all modes but the reference.
    pub fn phases(&self) -> usize {
        self.ket.modes - 1
    }

    /// True when every amplitude is real.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn max_photons(&self) -> u32 {
        self.ket.max_photons()
    }

    pub fn annihilate(&self, mode: usize, l: u32) -> Result<Ket> {
        self.ket.annihilate(mode, l)
    }

    pub fn to_dense(&self, basis: &FockBasis) -> Result<DVector<C64>> {
        self.ket.to_dense(basis)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean_i: f64,
    pub second_ij: f64,
    pub cov_ij: f64,
}

fn check_phase_mode(state: &PureState, i: usize) -> Result<()> {
    if i == 0 || i >= state.modes() {
        return Err(Error::ModeOutOfRange { index: i, modes: state.modes() });
    }
    Ok(())
}

/// ⟨n̂_i⟩, ⟨n̂_i n̂_j⟩ and their covariance for phase modes `i`, `j` (1-based).
pub fn moments(state: &PureState, i: usize, j: usize) -> Result<Moments> {
    check_phase_mode(state, i)?;
    check_phase_mode(state, j)?;
    let (mut mean_i, mut mean_j, mut second_ij) = (0.0, 0.0, 0.0);
    for (occ, amp) in state.ket.terms() {
        let p = amp.norm_sqr();
        let (ni, nj) = (occ.get(i) as f64, occ.get(j) as f64);
        mean_i += p * ni;
        mean_j += p * nj;
        second_ij += p * ni * nj;
    }
    Ok(Moments { mean_i, second_ij, cov_ij: second_ij - mean_i * mean_j })
}

/// First and second number moments over all phase modes at once.
#[derive(Clone, Debug, PartialEq)]
pub struct NumberMoments {
    /// ⟨n̂_i⟩ for i = 1..=d, stored at index i−1.
    pub mean: Vec<f64>,
    /// Cov(n̂_i, n̂_j), d×d.
    pub covariance: DMatrix<f64>,
}

impl NumberMoments {
    pub fn of(state: &PureState) -> Self {
        let d = state.phases();
        let mut mean = vec![0.0; d];
        let mut second = DMatrix::<f64>::zeros(d, d);
        for (occ, amp) in state.ket.terms() {
            let p = amp.norm_sqr();
            let n = &occ.counts()[1..];
            for i in 0..d {
                if n[i] == 0 {
                    continue;
                }
                mean[i] += p * n[i] as f64;
                for j in 0..d {
                    second[(i, j)] += p * (n[i] as f64) * (n[j] as f64);
                }
            }
        }
        let covariance = DMatrix::from_fn(d, d, |i, j| second[(i, j)] - mean[i] * mean[j]);
        Self { mean, covariance }
    }

    pub fn phases(&self) -> usize {
        self.mean.len()
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.covariance[(i, i)]
    }
}
