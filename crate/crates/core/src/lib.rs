//! Weyl-covariant quantum channels, constrained output-entropy roofs, and
//! numerical checks of entropy lower bounds and strong superadditivity at
//! small prime dimensions.
//!
//! Entropies are in bits throughout.

pub mod bounds;
pub mod catalog;
pub mod channel;
pub mod ensemble;
pub mod error;
pub mod linalg;
pub mod mub;
pub mod optimize;
pub mod random;
pub mod state;
pub mod weyl;

pub use bounds::{
    bound_rhs, conditional_ensembles, h_dep_const, superadditivity_experiment, verify_bound, BoundConfig, BoundReport,
    SuperaddConfig, SuperaddReport,
};
pub use catalog::ChannelSpec;
pub use channel::{apply, choi, compose, tensor_channels, ChoiMatrix, QuantumChannel};
pub use ensemble::{average_output_entropy, ensemble_from_stiefel, Ensemble, StiefelPoint};
pub use error::{Error, Result};
pub use linalg::{hermitian_eig, tensor, ComplexMatrix, HermitianSpectrum};
pub use mub::{fourier_basis, mub_family, shift_defect, unbiasedness_defect, Basis, MubFamily};
pub use optimize::{estimate_chi, estimate_h_hat, EnsembleSize, HhatEstimate, OptimizerConfig};
pub use state::{partial_trace, von_neumann_entropy, DensityMatrix, TraceOut};
pub use weyl::{
    chi_dep_closed_form, conditional_expectation, covariance_defect, depolarizing, lambda_for_params, phase_damping,
    qc_channel, weyl_channel, weyl_operator, WeylParams,
};
