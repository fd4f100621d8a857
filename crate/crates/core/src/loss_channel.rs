//! Beam-splitter photon loss.
//!
//! Per mode, the Kraus branch that loses `l` photons is
//! `√((1−η)^l / l!) · e^{iθ n̂} · η^{n̂/2} · â^l`. The phase factor commutes
//! out of the branch sum, so the lossy state at any θ is a unitary rotation
//! of the θ = 0 state; [`apply_loss`] therefore works at θ = 0 and
//! [`DensityOperator::rotated`] supplies the rest.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{build_basis, BasisKind, FockBasis, ModeOccupation, PureState};
use crate::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct LossChannel {
    eta: Vec<f64>,
    n_max: u32,
}

fn check_eta(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidEta(eta))
    }
}

impl LossChannel {
    /// One transmissivity per mode, reference mode first.
    pub fn new(eta: Vec<f64>, n_max: u32) -> Result<Self> {
        for &e in &eta {
            check_eta(e)?;
        }
        Ok(Self { eta, n_max })
    }

    /// Same η on every mode, reference included.
    pub fn uniform(modes: usize, eta: f64, n_max: u32) -> Result<Self> {
        Self::new(vec![eta; modes], n_max)
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn modes(&self) -> usize {
        self.eta.len()
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }
}

/// ⟨n−l| K_l |n⟩ at θ = 0, i.e. √(C(n,l) (1−η)^l η^{n−l}).
pub fn kraus_element(eta: f64, l: u32, n: u32) -> f64 {
    if l > n {
        return 0.0;
    }
    let binom = (1..=l).fold(1.0, |acc, j| acc * f64::from(n + 1 - j) / f64::from(j));
    (binom * (1.0 - eta).powi(l as i32) * eta.powi((n - l) as i32)).sqrt()
}

/// Dense single-mode Kraus matrix for `l` lost photons, at θ = 0, over a
/// one-mode basis.
pub fn kraus_operator(eta: f64, l: u32, single_mode_basis: &FockBasis) -> Result<DMatrix<f64>> {
    check_eta(eta)?;
    if single_mode_basis.modes() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: single_mode_basis.modes() });
    }
    let dim = single_mode_basis.len();
    let photons: Vec<u32> = single_mode_basis.states().iter().map(|s| s.get(0)).collect();
    let mut ladder = DMatrix::<f64>::zeros(dim, dim);
    for (col, &n) in photons.iter().enumerate() {
        if n == 0 {
            continue;
        }
        if let Some(row) = photons.iter().position(|&m| m + 1 == n) {
            ladder[(row, col)] = f64::from(n).sqrt();
        }
    }
    let damping = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        photons.iter().map(|&n| eta.powf(f64::from(n) / 2.0)),
    ));
    let factorial: f64 = (1..=l).map(f64::from).product();
    let prefactor = ((1.0 - eta).powi(l as i32) / factorial).sqrt();
    let mut power = DMatrix::<f64>::identity(dim, dim);
    for _ in 0..l {
        power = &ladder * power;
    }
    Ok(prefactor * damping * power)
}

/// Hermitian unit-trace operator over a Fock basis.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    basis: Arc<FockBasis>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(basis: Arc<FockBasis>, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: matrix.nrows() });
        }
        Ok(Self { basis, matrix })
    }

    pub fn pure(basis: Arc<FockBasis>, state: &PureState) -> Result<Self> {
        let v = state.to_dense(&basis)?;
        let matrix = &v * v.adjoint();
        Self::new(basis, matrix)
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect()
    }

    /// Checks Hermiticity, unit trace and positivity within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::NotDensityOperator(format!("hermiticity error {herm:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::NotDensityOperator(format!("trace {tr}")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::NotDensityOperator(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// U(θ) ρ U(θ)† with U(θ) = exp(i Σ_j θ_j n̂_j) over phase modes j ≥ 1.
    pub fn rotated(&self, theta: &[f64]) -> Result<Self> {
        let d = self.basis.modes() - 1;
        if theta.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: theta.len() });
        }
        let phase: Vec<f64> = self
            .basis
            .states()
            .iter()
            .map(|s| theta.iter().enumerate().map(|(j, t)| t * f64::from(s.get(j + 1))).sum())
            .collect();
        let matrix = DMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |r, c| {
            self.matrix[(r, c)] * C64::from_polar(1.0, phase[r] - phase[c])
        });
        Ok(Self { basis: self.basis.clone(), matrix })
    }
}

/// ρ_loss = Σ_𝒍 K_𝒍 |ψ⟩⟨ψ| K_𝒍† at θ = 0, over the at-most-total basis with
/// the channel's photon cap.
pub fn apply_loss(probe: &PureState, channel: &LossChannel) -> Result<DensityOperator> {
    evolve(probe, channel, None)
}

/// Same as [`apply_loss`] but with the e^{iθ n̂} factor kept inside every
/// Kraus branch. `theta` covers the phase modes only.
pub fn apply_loss_with_phases(
    probe: &PureState,
    channel: &LossChannel,
    theta: &[f64],
) -> Result<DensityOperator> {
    let d = probe.phases();
    if theta.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: theta.len() });
    }
    evolve(probe, channel, Some(theta))
}

fn evolve(probe: &PureState, channel: &LossChannel, theta: Option<&[f64]>) -> Result<DensityOperator> {
    let modes = probe.modes();
    if channel.modes() != modes {
        return Err(Error::DimensionMismatch { expected: modes, got: channel.modes() });
    }
    if probe.max_photons() > channel.n_max() {
        return Err(Error::InvalidArgument(format!(
            "probe carries {} photons, channel cutoff is {}",
            probe.max_photons(),
            channel.n_max()
        )));
    }
    let basis = Arc::new(build_basis(modes, channel.n_max(), BasisKind::AtMostTotal));
    let terms: Vec<(&ModeOccupation, C64)> = probe.ket().terms().map(|(o, &a)| (o, a)).collect();

    // Per-mode loss ranges are bounded by the largest occupation present.
    let max_per_mode: Vec<u32> = (0..modes)
        .map(|m| terms.iter().map(|(o, _)| o.get(m)).max().unwrap_or(0))
        .collect();

    let dim = basis.len();
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    let mut pattern = vec![0u32; modes];
    let mut branch: Vec<(usize, C64)> = Vec::with_capacity(terms.len());
    loop {
        branch.clear();
        for (occ, amp) in &terms {
            let mut factor = C64::new(1.0, 0.0) * *amp;
            let mut reduced = Vec::with_capacity(modes);
            let mut alive = true;
            for m in 0..modes {
                let (n, l) = (occ.get(m), pattern[m]);
                if l > n {
                    alive = false;
                    break;
                }
                factor *= kraus_element(channel.eta()[m], l, n);
                if let (Some(th), true) = (theta, m > 0) {
                    factor *= C64::from_polar(1.0, th[m - 1] * f64::from(n - l));
                }
                reduced.push(n - l);
            }
            if !alive || factor.norm_sqr() == 0.0 {
                continue;
            }
            let k = basis
                .index_of(&ModeOccupation::new(reduced))
                .expect("reduced occupation within the at-most-total basis");
            match branch.iter_mut().find(|(idx, _)| *idx == k) {
                Some((_, a)) => *a += factor,
                None => branch.push((k, factor)),
            }
        }
        for &(r, a) in &branch {
            for &(c, b) in &branch {
                rho[(r, c)] += a * b.conj();
            }
        }
        if !next_pattern(&mut pattern, &max_per_mode) {
            break;
        }
    }
    DensityOperator::new(basis, rho)
}

fn next_pattern(pattern: &mut [u32], limits: &[u32]) -> bool {
    for (p, &lim) in pattern.iter_mut().zip(limits) {
        if *p < lim {
            *p += 1;
            return true;
        }
        *p = 0;
    }
    false
}
