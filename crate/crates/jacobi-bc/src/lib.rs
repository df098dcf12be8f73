//! Boundary-control toolkit for semi-infinite Jacobi matrices.

// House style for the numerics: grids are indexed explicitly (the index IS
// the site or the time, iterators would obscure the recurrences), and
// definiteness guards are written `!(x > floor)` so that NaN falls on the
// rejecting side.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod characterize;
pub mod coeffs;
pub mod eigen;
pub mod error;
pub mod exact;
pub mod forward;
pub mod guide;
pub mod inverse;
pub mod io;
pub mod matrix;
pub mod operators;
pub mod spectral;

pub use characterize::{
    characterize_jacobi, characterize_jacobi_certified, characterize_jacobi_exact,
    characterize_schrodinger, characterize_schrodinger_exact, CharacterizationReport,
    FailingCondition, Verdict,
};
pub use coeffs::{ControlVector, JacobiCoefficients};
pub use eigen::tridiagonal_eigenvalues;
pub use error::{Error, Result};
pub use exact::{recover_factorization_exact, response_rational, ExactRecovery, RationalMatrix};
pub use forward::{dalembert_solution, goursat_kernel, step_forward, GoursatKernel, Wavefield};
pub use inverse::{
    kappa_vector, recover_factorization, recover_krein, solve_krein, KreinProblem, RecoveryResult,
    RecoveryStep,
};
pub use io::{
    format_float, parse_coefficients, parse_measure, parse_response, write_coefficients,
    write_measure, write_response,
};
pub use operators::{
    adjoint_response, apply_response, blagoveshchenskii_form, connecting_from_gram,
    connecting_from_response, control_matrix, response_vector, rotate_connecting,
    rotated_connecting_from_response, ConnectingMatrix, ControlMatrix, ResponseVector,
};
pub use spectral::{
    chebyshev_u, connecting_from_measure, eigenexpansion_solution, eigenvector, interval_forward,
    measure_from_spectral_data, phi_solution, response_from_measure, spectral_data,
    validate_schrodinger_measure, BoundaryProblem, DiscreteMeasure, SpectralData,
};
