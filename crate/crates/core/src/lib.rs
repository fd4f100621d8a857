//! Precision bounds for simultaneous estimation of several optical phases
//! under photon loss.
//!
//! * [`fock`]: multimode Fock space, sparse kets and number moments.
//! * [`probes`]: generalized N00N, custom and two-mode probes.
//! * [`loss_channel`]: beam-splitter loss Kraus operators and lossy states.
//! * [`cq_bounds`]: the gauge-dependent C_Q upper bound on the QFI matrix.
//! * [`exact_qfi`]: exact QFI matrices, SLDs and the attainability residual.
//! * [`baselines`]: individual-estimation baselines and asymptotic forms.
//! * [`cli`]: the `multiphase` command line.
//!
//! All reported variances are totals over the phases for a single repetition.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod cq_bounds;
pub mod error;
pub mod exact_qfi;
pub mod fock;
pub mod linalg;
pub mod loss_channel;
pub mod optimize;
pub mod probes;

pub use error::{Error, Result};
pub use fock::{BasisKind, FockBasis, Ket, ModeOccupation, PureState};
pub use loss_channel::{DensityOperator, LossChannel};

/// Complex scalar used for amplitudes and operators.
pub type C64 = nalgebra::Complex<f64>;
