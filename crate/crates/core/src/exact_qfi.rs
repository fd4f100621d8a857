//! Exact quantum Fisher information for number-operator phase generators.
//!
//! Phases enter as ρ(θ) = U(θ) ρ U(θ)† with U(θ) = exp(i Σ_j θ_j n̂_j), so
//! ∂_j ρ = i[n̂_j, ρ] and every quantity here is θ-independent.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{NumberMoments, PureState};
use crate::linalg;
use crate::loss_channel::DensityOperator;
use crate::C64;

/// Relative eigenvalue cutoff for the support of ρ.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Input validation tolerance for density operators.
const DENSITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QfiResult {
    matrix: DMatrix<f64>,
    trace_inverse: Option<f64>,
    saturation_residual: f64,
}

impl QfiResult {
    fn new(matrix: DMatrix<f64>, saturation_residual: f64) -> Self {
        let trace_inverse = linalg::trace_inverse(&matrix).ok();
        Self { matrix, trace_inverse, saturation_residual }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Tr[I_Q⁻¹], `None` when some phase is not identifiable.
    pub fn trace_inverse(&self) -> Option<f64> {
        self.trace_inverse
    }

    /// Tr[I_Q⁻¹] or the singularity error.
    pub fn total_variance(&self) -> Result<f64> {
        match self.trace_inverse {
            Some(t) => Ok(t),
            None => linalg::trace_inverse(&self.matrix),
        }
    }

    /// max_{i<j} |Im Tr(ρ L_i L_j)|.
    pub fn saturation_residual(&self) -> f64 {
        self.saturation_residual
    }
}

/// QFI of a pure probe: 4 Cov(n̂_i, n̂_j). Number operators commute, so the
/// weak-commutativity residual vanishes identically.
pub fn qfi_pure(probe: &PureState) -> QfiResult {
    let m = NumberMoments::of(probe);
    QfiResult::new(4.0 * m.covariance, 0.0)
}

/// Eigen-decomposition of ρ with the phase generators rotated into its
/// eigenbasis.
struct Spectral {
    lambda: Vec<f64>,
    vectors: DMatrix<C64>,
    /// V† n̂_i V for each phase mode.
    generators: Vec<DMatrix<C64>>,
    cutoff: f64,
}

impl Spectral {
    fn new(rho: &DensityOperator, d: usize) -> Result<Self> {
        if rho.basis().modes() != d + 1 {
            return Err(Error::DimensionMismatch { expected: d + 1, got: rho.basis().modes() });
        }
        rho.validate(DENSITY_TOL)?;
        let eig = SymmetricEigen::new(rho.matrix().clone());
        let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let vectors = eig.eigenvectors;
        let vadj = vectors.adjoint();
        let generators = (1..=d)
            .map(|mode| {
                let n = rho.basis().number_diagonal(mode)?;
                let mut scaled = vectors.clone();
                for (r, &nr) in n.iter().enumerate() {
                    scaled.row_mut(r).scale_mut(nr);
                }
                Ok(&vadj * scaled)
            })
            .collect::<Result<Vec<_>>>()?;
        let max = lambda.iter().copied().fold(0.0, f64::max);
        Ok(Self { lambda, vectors, generators, cutoff: SUPPORT_CUTOFF * max })
    }

    fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Spectral QFI and the complex Tr(ρ L_i L_j) imaginary parts.
    fn qfi_and_residual(&self) -> (DMatrix<f64>, f64) {
        let d = self.generators.len();
        let mut qfi = DMatrix::zeros(d, d);
        let mut imag = DMatrix::<f64>::zeros(d, d);
        for k in 0..self.dim() {
            for l in 0..self.dim() {
                let (lk, ll) = (self.lambda[k], self.lambda[l]);
                let s = lk + ll;
                if s <= self.cutoff {
                    continue;
                }
                let diff = lk - ll;
                let w = 2.0 * diff * diff / s;
                // Tr(ρ L_i L_j) = Σ_kl 4 λ_k (λ_k−λ_l)² G^i_kl G^j_lk / s²
                let wc = 4.0 * lk * diff * diff / (s * s);
                if w == 0.0 && wc == 0.0 {
                    continue;
                }
                for i in 0..d {
                    let gi = self.generators[i][(k, l)];
                    for j in 0..d {
                        let prod = gi * self.generators[j][(l, k)];
                        qfi[(i, j)] += w * prod.re;
                        imag[(i, j)] += wc * prod.im;
                    }
                }
            }
        }
        let mut residual = 0.0f64;
        for i in 0..d {
            for j in (i + 1)..d {
                residual = residual.max(imag[(i, j)].abs());
            }
        }
        (qfi, residual)
    }

    fn slds(&self) -> Vec<DMatrix<C64>> {
        let dim = self.dim();
        let vadj = self.vectors.adjoint();
        self.generators
            .iter()
            .map(|g| {
                let eigen_basis = DMatrix::from_fn(dim, dim, |k, l| {
                    let s = self.lambda[k] + self.lambda[l];
                    if s <= self.cutoff {
                        C64::new(0.0, 0.0)
                    } else {
                        C64::new(0.0, 2.0 * (self.lambda[l] - self.lambda[k]) / s) * g[(k, l)]
                    }
                });
                &self.vectors * eigen_basis * &vadj
            })
            .collect()
    }
}

/// QFI matrix of a lossy state for the d phase-mode number generators.
pub fn qfi_mixed(rho: &DensityOperator, d: usize) -> Result<QfiResult> {
    let spectral = Spectral::new(rho, d)?;
    let (matrix, residual) = spectral.qfi_and_residual();
    let matrix = 0.5 * (&matrix + matrix.transpose());
    Ok(QfiResult::new(matrix, residual))
}

/// Symmetric logarithmic derivatives L_i, in the Fock basis of `rho`,
/// solving i[n̂_i, ρ] = (ρ L_i + L_i ρ)/2 on the support of ρ, together with
/// the weak-commutativity residual max_{i<j} |Im Tr(ρ L_i L_j)|.
pub fn sld_and_residual(rho: &DensityOperator, d: usize) -> Result<(Vec<DMatrix<C64>>, f64)> {
    let spectral = Spectral::new(rho, d)?;
    let slds = spectral.slds();
    let mut residual = 0.0f64;
    for i in 0..d {
        for j in (i + 1)..d {
            let t = (rho.matrix() * &slds[i] * &slds[j]).trace();
            residual = residual.max(t.im.abs());
        }
    }
    Ok((slds, residual))
}
