//! Ground- and excited-state energy estimation for qubit Hamiltonians from
//! Hamiltonian moments: connected-moments expansions (Cioslowski and
//! Knowles forms) and Peeters–Devreese–Soldatov bounds, evaluated on an exact
//! statevector or on finite-shot emulated expectations.
//!
//! The numerical core is generic over [`scalar::Real`]; the aliases below fix
//! it to `f64`, which is what the command-line front end uses.

pub mod cli;
pub mod cmx;
pub mod error;
pub mod method;
pub mod models;
pub mod moments;
pub mod noise;
pub mod pauli;
pub mod pds;
pub mod scalar;
pub mod statevector;
pub mod variational;

pub use cmx::{cmx_cioslowski, cmx_closed_form, cmx_knowles, singularity_report, CmxMethod};
pub use error::{Error, Result};
pub use method::EnergyMethod;
pub use models::{h2_bk_hamiltonian, siam_fci_energy, siam_hamiltonian};
pub use moments::{connected_moments, raw_moments_dense, raw_moments_pauli};
pub use noise::{hadamard_test_estimate, noisy_moments, NoiseModel, ShotEstimate};
pub use pauli::PauliString;
pub use pds::{solve_pds, PdsResult};
pub use statevector::exact_diagonalize;
pub use variational::{deviation_report, energy_vs_theta};

pub type PauliSumF64 = pauli::PauliSum<f64>;
pub type StateVectorF64 = statevector::StateVector<f64>;
pub type MomentTableF64 = moments::MomentTable<f64>;
pub type CmxResultF64 = cmx::CmxResult<f64>;
pub type PdsResultF64 = pds::PdsResult<f64>;
pub type ScanResultF64 = variational::ScanResult<f64>;
pub type SiamParamsF64 = models::SiamParams<f64>;
pub type H2CoefficientsF64 = models::H2Coefficients<f64>;
