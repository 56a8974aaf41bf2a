//! Modified hydrogenic eigenvalues with an r^-2 magnetic potential, a
//! pair-correlated non-orthogonal variational functional for two and three
//! electron atoms, and the Hylleraas-coordinate integrals behind it.
//!
//! The crate is organised bottom up:
//!
//! * [`quantum`] orbitals, configurations and the fixed constants
//! * [`qed`] Dirac, Lamb and magnetic reference energies
//! * [`hydrogenic`] the delta functions of Z and closed-form eigensolutions
//! * [`integrals`] one- and two-electron integrals plus a quadrature oracle
//! * [`functional`] the energy functional W
//! * [`optimizer`] bounded Nelder-Mead over the orbital exponents
//! * [`harness`] reference data and table reproduction
//!
//! ```
//! use magpot::hydrogenic::{solve_deltas, eigen_xi_energy};
//! use magpot::quantum::Orbital;
//!
//! let d = solve_deltas(1).unwrap();
//! let (xi, e) = eigen_xi_energy(&Orbital::new(1, 0, 0, 0, 0, 1.0), 1, &d).unwrap();
//! assert!((xi - 1.0).abs() < 1e-4);
//! assert!((e + 0.500007).abs() < 1e-6);
//! ```

pub mod error;
pub mod functional;
pub mod harness;
pub mod hydrogenic;
pub mod integrals;
pub mod optimizer;
pub mod qed;
pub mod quantum;

pub use error::{Error, Result};
