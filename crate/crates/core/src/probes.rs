//! Probe state constructors.

use crate::error::{Error, Result};
use crate::fock::{FockBasis, Ket, ModeOccupation, PureState};
use crate::C64;

/// Squared amplitude α² = 1/(d+√d) of each phase-mode component of the
/// generalized N00N state.
pub fn noon_alpha_sq(d: u32) -> f64 {
    let d = f64::from(d);
    1.0 / (d + d.sqrt())
}

/// Generalized N00N state over d+1 modes: amplitude α on each of the d
/// components with all `n` photons in one phase mode, and β on the
/// component with all photons in the reference mode.
///
/// # Panics
/// If `d == 0` or `n == 0`.
pub fn generalized_noon(d: u32, n: u32) -> PureState {
    assert!(d >= 1 && n >= 1, "generalized N00N state needs d ≥ 1 and N ≥ 1");
    let modes = d as usize + 1;
    let alpha_sq = noon_alpha_sq(d);
    let alpha = alpha_sq.sqrt();
    let beta = (1.0 - f64::from(d) * alpha_sq).max(0.0).sqrt();
    let terms = std::iter::once((ModeOccupation::concentrated(modes, 0, n), C64::new(beta, 0.0)))
        .chain((1..modes).map(|i| (ModeOccupation::concentrated(modes, i, n), C64::new(alpha, 0.0))));
    let ket = Ket::from_terms(modes, terms).expect("occupations sized to the mode count");
    PureState::normalized(ket).expect("generalized N00N amplitudes are non-zero")
}

/// Normalized superposition of real-amplitude terms drawn from `basis`.
pub fn custom_probe(basis: &FockBasis, terms: &[(ModeOccupation, f64)]) -> Result<PureState> {
    for (occ, _) in terms {
        if basis.index_of(occ).is_none() {
            return Err(Error::OccupationNotInBasis(occ.counts().to_vec()));
        }
    }
    let ket = Ket::from_terms(
        basis.modes(),
        terms.iter().map(|(o, a)| (o.clone(), C64::new(*a, 0.0))),
    )?;
    PureState::normalized(ket)
}

/// Like [`custom_probe`] but with complex amplitudes.
pub fn custom_probe_complex(basis: &FockBasis, terms: &[(ModeOccupation, C64)]) -> Result<PureState> {
    for (occ, _) in terms {
        if basis.index_of(occ).is_none() {
            return Err(Error::OccupationNotInBasis(occ.counts().to_vec()));
        }
    }
    PureState::normalized(Ket::from_terms(basis.modes(), terms.iter().cloned())?)
}

/// Two-mode probe Σ_n c_n |n, m−n⟩ over (reference, phase).
pub fn ie_two_mode(m: u32, coefficients: &[f64]) -> Result<PureState> {
    if coefficients.len() != m as usize + 1 {
        return Err(Error::DimensionMismatch {
            expected: m as usize + 1,
            got: coefficients.len(),
        });
    }
    let terms = coefficients
        .iter()
        .enumerate()
        .map(|(n, &c)| (ModeOccupation::new(vec![n as u32, m - n as u32]), C64::new(c, 0.0)));
    PureState::normalized(Ket::from_terms(2, terms)?)
}

/// Declarative description of a probe, as accepted by the CLI and FFI.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeSpec {
    GeneralizedNoon { d: u32, n: u32 },
    Custom { d: u32, n: u32, terms: Vec<(ModeOccupation, f64)> },
    /// Two-mode IE probe with m = n photons; only meaningful for d = 1.
    IeTwoMode { n: u32, coefficients: Vec<f64> },
}

impl ProbeSpec {
    pub fn build(&self) -> Result<PureState> {
        match self {
            Self::GeneralizedNoon { d, n } => {
                if *d == 0 || *n == 0 {
                    return Err(Error::InvalidArgument("generalized N00N needs d ≥ 1, N ≥ 1".into()));
                }
                Ok(generalized_noon(*d, *n))
            }
            Self::Custom { d, n, terms } => {
                let basis = crate::fock::build_basis(*d as usize + 1, *n, crate::fock::BasisKind::FixedTotal);
                custom_probe(&basis, terms)
            }
            Self::IeTwoMode { n, coefficients } => ie_two_mode(*n, coefficients),
        }
    }
}
