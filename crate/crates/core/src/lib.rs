//! Spectral theory of the periodic Benjamin–Ono Lax operator `L_u = D − T_u` at low
//! regularity: eigenvalues, gaps, norming constants, the Birkhoff map and its inverse,
//! the linear flow in Birkhoff coordinates, and the geometric counterexample family.

mod error;
mod dd;
pub mod birkhoff;
pub mod counterexample;
pub mod flow;
pub mod grid;
pub mod hardy;
pub mod io;
pub mod lax;
pub mod quadrature;
pub mod verify;

pub use birkhoff::{birkhoff_forward, birkhoff_inverse, BirkhoffCoordinates, InverseOptions, InverseResult};
pub use counterexample::{CounterexampleParams, SweepRow};
pub use error::{Error, Result};
pub use flow::{evolve_birkhoff, evolve_direct, FlowMethod, FlowTrajectory};
pub use hardy::{make_potential, HardyFunction, LogMode, PotentialFamily, PotentialSpectrum, WeightSpec, WeightedNorm};
pub use lax::{assemble_lax_matrix, eigendecompose, LaxMatrix, Precision, SpectralData};
pub use num_complex::Complex64;
