//! Purification-based upper bound C_Q on the QFI matrix under photon loss.
//!
//! With the δ-gauged Kraus family, the generators reduce to
//! Â⁽ⁱ⁾ = a_i n̂_i, B̂⁽ⁱⁱ⁾ = a_i² n̂_i² + b_i n̂_i and B̂⁽ⁱʲ⁾ = Â⁽ⁱ⁾Â⁽ʲ⁾, so
//! C_Q depends on the probe only through its first and second number
//! moments:
//!
//! ```text
//! C_Q[i][i] = 4 (a_i² Var(n̂_i) + b_i ⟨n̂_i⟩)
//! C_Q[i][j] = 4 a_i a_j Cov(n̂_i, n̂_j)
//! ```
//!
//! Since C_Q ≥ I_Q for every δ, Tr[C_Q⁻¹] is a lower bound on the total
//! variance; [`optimize_delta`] picks the δ that makes it largest.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{NumberMoments, PureState};
use crate::linalg;
use crate::optimize::bracketed_max;

/// Grid points scanned before golden-section refinement.
const DELTA_GRID: usize = 200;
const DELTA_REL_TOL: f64 = 1e-8;

/// Per-phase-mode gauge parameters δ_i of the Kraus family.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaGauge(Vec<f64>);

impl DeltaGauge {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = delta.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite gauge δ = {bad}")));
        }
        Ok(Self(delta))
    }

    pub fn uniform(d: usize, delta: f64) -> Result<Self> {
        Self::new(vec![delta; d])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// (a, b) with a = 1 − (1+δ)(1−η), b = (1+δ)² η (1−η).
pub fn ab_coefficients(eta: f64, delta: f64) -> (f64, f64) {
    let x = 1.0 + delta;
    (1.0 - x * (1.0 - eta), x * x * eta * (1.0 - eta))
}

/// δ = η/(1−η), the gauge that zeroes `a` and makes C_Q diagonal.
pub fn diagonalizing_delta(eta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "diagonalizing gauge needs 0 ≤ η < 1, got {eta}"
        )));
    }
    Ok(eta / (1.0 - eta))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CqBound {
    matrix: DMatrix<f64>,
    delta: DeltaGauge,
    trace_inverse: Option<f64>,
}

impl CqBound {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn delta(&self) -> &DeltaGauge {
        &self.delta
    }

    /// Tr[C_Q⁻¹], or `None` when C_Q is singular.
    pub fn trace_inverse(&self) -> Option<f64> {
        self.trace_inverse
    }
}

fn check_lengths(d: usize, eta: &[f64], delta: &DeltaGauge) -> Result<()> {
    if eta.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: eta.len() });
    }
    if delta.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: delta.len() });
    }
    if let Some(&bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::InvalidEta(bad));
    }
    Ok(())
}

/// C_Q for `probe` with phase-mode transmissivities `eta` (length d).
pub fn cq_matrix(probe: &PureState, eta: &[f64], delta: &DeltaGauge) -> Result<CqBound> {
    cq_matrix_from_moments(&NumberMoments::of(probe), eta, delta)
}

pub fn cq_matrix_from_moments(
    moments: &NumberMoments,
    eta: &[f64],
    delta: &DeltaGauge,
) -> Result<CqBound> {
    let d = moments.phases();
    check_lengths(d, eta, delta)?;
    let ab: Vec<(f64, f64)> = eta
        .iter()
        .zip(delta.values())
        .map(|(&e, &dl)| ab_coefficients(e, dl))
        .collect();
    let matrix = DMatrix::from_fn(d, d, |i, j| {
        let cov = moments.covariance[(i, j)];
        if i == j {
            let (a, b) = ab[i];
            4.0 * (a * a * cov + b * moments.mean[i])
        } else {
            4.0 * ab[i].0 * ab[j].0 * cov
        }
    });
    let trace_inverse = linalg::trace_inverse(&matrix).ok();
    Ok(CqBound { matrix, delta: delta.clone(), trace_inverse })
}

/// Tr[C_Q⁻¹], the total-variance lower bound at repetition count 1.
pub fn bound_total_variance(bound: &CqBound) -> Result<f64> {
    match bound.trace_inverse {
        Some(t) => Ok(t),
        None => linalg::trace_inverse(&bound.matrix),
    }
}

/// δ = (N/η)/(κN+1) − 1 with κ = (1−η)/η, the large-N choice for the
/// generalized N00N probe.
pub fn asymptotic_delta(n: f64, eta: f64) -> f64 {
    let kappa = (1.0 - eta) / eta;
    (n / eta) / (kappa * n + 1.0) - 1.0
}

fn delta_bracket(n: u32, eta: f64) -> (f64, f64) {
    let upper = if eta < 1.0 { 10.0 / (1.0 - eta) } else { 10.0 };
    (-1.0, upper.max(2.0 * f64::from(n)))
}

/// Maximizes Tr[C_Q⁻¹] over the gauge. With `uniform`, a single δ is shared
/// by every phase mode; otherwise each δ_i is refined coordinate-wise,
/// starting from the uniform optimum. The returned bound carries δ*.
pub fn optimize_delta(probe: &PureState, eta: &[f64], uniform: bool) -> Result<CqBound> {
    let moments = NumberMoments::of(probe);
    let d = moments.phases();
    if eta.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: eta.len() });
    }
    if let Some(&bad) = eta.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(Error::InvalidEta(bad));
    }
    let n = probe.max_photons();
    let objective = |delta: &[f64]| -> f64 {
        let gauge = DeltaGauge(delta.to_vec());
        cq_matrix_from_moments(&moments, eta, &gauge)
            .ok()
            .and_then(|b| b.trace_inverse)
            .unwrap_or(f64::NEG_INFINITY)
    };

    let eta_hi = eta.iter().copied().filter(|&e| e < 1.0).fold(f64::NAN, f64::max);
    let (lo, hi) = delta_bracket(n, if eta_hi.is_nan() { 1.0 } else { eta_hi });
    let (x, mut best_val) = bracketed_max(|x| objective(&vec![x; d]), lo, hi, DELTA_GRID, DELTA_REL_TOL);
    let mut best = vec![x; d];

    // Fixed candidates the optimum must dominate.
    let eta_mean = eta.iter().sum::<f64>() / d as f64;
    let mut candidates = vec![0.0, asymptotic_delta(f64::from(n), eta_mean)];
    if eta_mean < 1.0 {
        candidates.push(eta_mean / (1.0 - eta_mean));
    }
    for c in candidates {
        let v = objective(&vec![c; d]);
        if v > best_val {
            best_val = v;
            best = vec![c; d];
        }
    }
    if !uniform {
        let diag: Vec<f64> = eta.iter().map(|&e| if e < 1.0 { e / (1.0 - e) } else { 0.0 }).collect();
        let v = objective(&diag);
        if v > best_val {
            best_val = v;
            best = diag;
        }
        for _sweep in 0..50 {
            let before = best_val;
            for i in 0..d {
                let (lo, hi) = delta_bracket(n, eta[i]);
                let (xi, vi) = bracketed_max(
                    |x| {
                        let mut trial = best.clone();
                        trial[i] = x;
                        objective(&trial)
                    },
                    lo,
                    hi,
                    DELTA_GRID,
                    DELTA_REL_TOL,
                );
                if vi > best_val {
                    best_val = vi;
                    best[i] = xi;
                }
            }
            if best_val - before <= 1e-14 * best_val.abs() {
                break;
            }
        }
    }
    if !best_val.is_finite() {
        // Every gauge gives a singular C_Q; report the δ = 0 conditioning.
        let at_zero = cq_matrix_from_moments(&moments, eta, &DeltaGauge(vec![0.0; d]))?;
        return Err(linalg::trace_inverse(at_zero.matrix())
            .err()
            .unwrap_or(Error::Singular { condition: f64::INFINITY }));
    }
    cq_matrix_from_moments(&moments, eta, &DeltaGauge(best))
}
