//! Individual-estimation baselines and closed-form asymptotics.

use std::fmt;
use std::str::FromStr;

use crate::cq_bounds::asymptotic_delta;
use crate::error::{Error, Result};
use crate::fock::PureState;
use crate::optimize::golden_section_max;
use crate::probes::ie_two_mode;

/// Thresholds on κN separating the regimes.
pub const HEISENBERG_MAX_KAPPA_N: f64 = 0.1;
pub const SQL_MIN_KAPPA_N: f64 = 10.0;

fn check_open_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEta(eta))
    }
}

/// Loss parameter κ = (1−η)/η.
pub fn kappa(eta: f64) -> f64 {
    (1.0 - eta) / eta
}

/// Single-phase C_Q minimized over the gauge, in closed form:
/// `4η·V·μ / ((1−η)V + ημ)` for phase-mode mean μ and variance V.
pub fn single_phase_bound(mean: f64, variance: f64, eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if !(mean > 0.0) {
        return Err(Error::NoPhotons(1));
    }
    if variance < 0.0 {
        return Err(Error::InvalidArgument(format!("negative variance {variance}")));
    }
    if variance == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * eta * variance * mean / ((1.0 - eta) * variance + eta * mean))
}

/// Gauge attaining [`single_phase_bound`]: 1+δ* = V / ((1−η)V + ημ).
pub fn single_phase_delta(mean: f64, variance: f64, eta: f64) -> Result<f64> {
    check_open_eta(eta)?;
    if !(mean > 0.0) {
        return Err(Error::NoPhotons(1));
    }
    Ok(variance / ((1.0 - eta) * variance + eta * mean) - 1.0)
}

/// Best two-mode probe for one phase with `m` photons.
#[derive(Clone, Debug, PartialEq)]
pub struct IePhase {
    pub m: u32,
    /// Optimal single-phase C_Q.
    pub fisher: f64,
    /// 1 / fisher.
    pub per_phase_bound: f64,
    /// Phase-mode photon numbers of the two-point support.
    pub support: (u32, u32),
    /// Probability of the upper support point.
    pub weight: f64,
    pub probe: PureState,
}

fn two_point_fisher(j: u32, k: u32, w: f64, eta: f64) -> f64 {
    let (j, k) = (f64::from(j), f64::from(k));
    let mean = j + (k - j) * w;
    let variance = (k - j) * (k - j) * w * (1.0 - w);
    single_phase_bound(mean, variance, eta).unwrap_or(0.0)
}

/// Maximizes [`single_phase_bound`] over two-mode probes Σ_n c_n |n, m−n⟩.
///
/// The objective depends on the photon distribution only through (⟨n̂⟩,
/// ⟨n̂²⟩), which range over the convex hull of the points (n, n²). The bound
/// increases with the variance at fixed mean, so the optimum lies on an edge
/// of that hull; every chord between two support points is searched, each a
/// one-dimensional quasi-concave problem in the mixing weight.
pub fn ie_optimal(m: u32, eta: f64) -> Result<IePhase> {
    if m == 0 {
        return Err(Error::InvalidArgument("IE probe needs m ≥ 1 photons".into()));
    }
    check_open_eta(eta)?;
    let mut best = (0.0, 0, m, 0.5);
    for j in 0..m {
        for k in (j + 1)..=m {
            let (w, c) = golden_section_max(|w| two_point_fisher(j, k, w, eta), 0.0, 1.0, 1e-13);
            if c > best.0 {
                best = (c, j, k, w);
            }
        }
    }
    let (fisher, j, k, w) = best;
    // coefficient index counts reference photons
    let mut coefficients = vec![0.0; m as usize + 1];
    coefficients[(m - k) as usize] = w.sqrt();
    coefficients[(m - j) as usize] = (1.0 - w).sqrt();
    let probe = ie_two_mode(m, &coefficients)?;
    Ok(IePhase {
        m,
        fisher,
        per_phase_bound: 1.0 / fisher,
        support: (j, k),
        weight: w,
        probe,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct IeResult {
    pub per_phase_bound: f64,
    pub total: f64,
    pub probe: PureState,
    /// Photons per phase, N/d.
    pub m: u32,
}

/// Photons per phase under the equal split; rejects uneven budgets.
pub fn equal_split(d: u32, n: u32) -> Result<u32> {
    if d == 0 || n == 0 || !n.is_multiple_of(d) {
        return Err(Error::Indivisible { d, n });
    }
    Ok(n / d)
}

/// Σ_i 1/n_i^t for an allocation of photons to phases.
pub fn allocation_objective(allocation: &[u32], t: f64) -> f64 {
    allocation.iter().map(|&n| f64::from(n).powf(-t)).sum()
}

/// Total IE variance with N/d photons per phase, each phase estimated with
/// its optimal two-mode probe.
pub fn ie_total_variance(d: u32, n: u32, eta: f64) -> Result<IeResult> {
    let m = equal_split(d, n)?;
    let phase = ie_optimal(m, eta)?;
    Ok(IeResult {
        per_phase_bound: phase.per_phase_bound,
        total: f64::from(d) * phase.per_phase_bound,
        probe: phase.probe,
        m,
    })
}

/// SE floor (1−η)/(4η) · d²/N, reached when every phase mode holds N/d
/// photons on average.
pub fn se_asymptotic(d: u32, n: u32, eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidEta(eta));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let d = f64::from(d);
    Ok(kappa(eta) / 4.0 * d * d / f64::from(n))
}

/// Large-N, large-d approximation of the optimized Tr[C_Q⁻¹] for the
/// generalized N00N probe, with the gauge it is evaluated at.
///
/// Returns `(value, δ)` with
/// `value = ¼ / [ (N/d)²/(κN+1)² + κN²/(κN+1)² · (N/d)/d ]`.
pub fn psi_s_asymptotic(d: u32, n: u32, eta: f64) -> Result<(f64, f64)> {
    check_open_eta(eta)?;
    if d == 0 || n == 0 {
        return Err(Error::InvalidArgument("d and N must be positive".into()));
    }
    let (d, n) = (f64::from(d), f64::from(n));
    let k = kappa(eta);
    let denom = (k * n + 1.0).powi(2);
    let per = n / d;
    let value = 0.25 / (per * per / denom + k * n * n / denom * per / d);
    Ok((value, asymptotic_delta(n, eta)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Heisenberg,
    Crossover,
    Sql,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Heisenberg => "heisenberg",
            Regime::Crossover => "crossover",
            Regime::Sql => "sql",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heisenberg" => Ok(Regime::Heisenberg),
            "crossover" => Ok(Regime::Crossover),
            "sql" => Ok(Regime::Sql),
            other => Err(Error::InvalidArgument(format!("unknown regime {other}"))),
        }
    }
}

/// Heisenberg when κN ≤ 0.1, SQL when κN ≥ 10, crossover in between.
pub fn regime_classify(n: u32, eta: f64) -> Result<Regime> {
    check_open_eta(eta)?;
    let kn = kappa(eta) * f64::from(n);
    Ok(if kn <= HEISENBERG_MAX_KAPPA_N {
        Regime::Heisenberg
    } else if kn >= SQL_MIN_KAPPA_N {
        Regime::Sql
    } else {
        Regime::Crossover
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::NumberMoments;

    #[test]
    fn closed_form_examples() {
        assert!((single_phase_bound(3.0, 2.5, 1.0).unwrap() - 10.0).abs() < 1e-12);
        assert!((single_phase_bound(1.0, 1.0, 0.9).unwrap() - 3.6).abs() < 1e-12);
        for eta in [0.1, 0.5, 0.9] {
            let c = single_phase_bound(0.5, 0.25, eta).unwrap();
            assert!((c - 2.0 * eta / (1.0 + eta)).abs() < 1e-14);
        }
        assert_eq!(single_phase_bound(0.0, 0.0, 0.5), Err(Error::NoPhotons(1)));
        assert!(single_phase_bound(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn analytic_gauge_minimizes() {
        let (mean, var, eta) = (1.7, 2.3, 0.65);
        let star = single_phase_delta(mean, var, eta).unwrap();
        let f = |delta: f64| {
            let (a, b) = crate::cq_bounds::ab_coefficients(eta, delta);
            4.0 * (a * a * var + b * mean)
        };
        let c = single_phase_bound(mean, var, eta).unwrap();
        assert!((f(star) - c).abs() < 1e-12);
        for h in [-1e-3, 1e-3, 0.5] {
            assert!(f(star + h) >= c);
        }
    }

    #[test]
    fn lossless_optimum_is_noon() {
        for m in 1..=6 {
            let phase = ie_optimal(m, 1.0).unwrap();
            assert!((phase.fisher - f64::from(m * m)).abs() < 1e-9);
            assert_eq!(phase.support, (0, m));
            assert!((phase.weight - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn single_photon_grid_oracle() {
        let eta = 0.9;
        let grid_best = (1..1000)
            .map(|k| k as f64 / 1000.0)
            .map(|p| single_phase_bound(p, p * (1.0 - p), eta).unwrap())
            .fold(0.0, f64::max);
        let phase = ie_optimal(1, eta).unwrap();
        assert!(phase.fisher >= grid_best);
        assert!((phase.fisher - grid_best) / grid_best < 1e-5);
    }

    #[test]
    fn probe_matches_reported_fisher() {
        let phase = ie_optimal(4, 0.7).unwrap();
        let m = NumberMoments::of(&phase.probe);
        let c = single_phase_bound(m.mean[0], m.variance(0), 0.7).unwrap();
        assert!((c - phase.fisher).abs() < 1e-10 * c);
    }

    #[test]
    fn near_complete_loss_diverges() {
        let phase = ie_optimal(3, 1e-9).unwrap();
        assert!(phase.fisher < 1e-7);
        assert!(phase.per_phase_bound > 1e7);
    }

    #[test]
    fn noiseless_total() {
        for (d, n) in [(2u32, 4u32), (3, 6), (2, 8)] {
            let r = ie_total_variance(d, n, 1.0).unwrap();
            let expected = f64::from(d).powi(3) / f64::from(n * n);
            assert!((r.total - expected).abs() < 1e-9 * expected);
        }
        assert_eq!(ie_total_variance(3, 4, 0.9), Err(Error::Indivisible { d: 3, n: 4 }));
    }

    #[test]
    fn optimized_beats_noon_at_d2_n4() {
        let r = ie_total_variance(2, 4, 0.9).unwrap();
        assert!(r.total <= 2.0 / 3.6 + 1e-12);
        assert!((2.0f64 / 3.6 - 0.5555555555555556).abs() < 1e-15);
    }

    #[test]
    fn se_floor() {
        let v = se_asymptotic(2, 100, 0.9).unwrap();
        assert!((v - 1.1111111111111112e-3).abs() < 1e-15);
        assert!((se_asymptotic(4, 100, 0.9).unwrap() / v - 4.0).abs() < 1e-12);
        assert!((se_asymptotic(2, 200, 0.9).unwrap() / v - 0.5).abs() < 1e-12);
        assert!(se_asymptotic(2, 10, 1.0).is_err());
        assert!(se_asymptotic(2, 10, 0.0).is_err());
    }

    #[test]
    fn psi_s_limits() {
        for (d, n) in [(2u32, 4u32), (5, 100)] {
            let (v, _) = psi_s_asymptotic(d, n, 1.0).unwrap();
            let heis = f64::from(d * d) / (4.0 * f64::from(n * n));
            assert!((v - heis).abs() < 1e-15 * heis.max(1.0));
        }
        let (v, _) = psi_s_asymptotic(2, 1_000_000, 0.9).unwrap();
        let sql = 0.1 / 3.6 * 4.0 / 1e6;
        assert!((sql - 1.1111111111111112e-7f64).abs() < 1e-20);
        assert!((v - sql).abs() / sql < 0.01);
    }

    #[test]
    fn regimes() {
        assert_eq!(regime_classify(100, 0.9999).unwrap(), Regime::Heisenberg);
        assert_eq!(regime_classify(100, 0.5).unwrap(), Regime::Sql);
        assert_eq!(regime_classify(10, 0.9).unwrap(), Regime::Crossover);
        assert_eq!("sql".parse::<Regime>().unwrap(), Regime::Sql);
    }

    #[test]
    fn split_objective() {
        assert!((allocation_objective(&[4, 4, 4], 2.0) - 3.0 / 16.0).abs() < 1e-15);
        assert_eq!(equal_split(3, 12).unwrap(), 4);
        assert!(equal_split(0, 12).is_err());
    }
}
