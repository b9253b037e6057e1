//! Density-matrix simulation and audits for gauge cooling on a single SU(2)
//! plaquette truncated at j_max = 1/2.

pub mod checks;
pub mod cooling;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod hamiltonian;
pub mod lattice;
pub mod kl;
pub mod linalg;
pub mod su2;
pub mod tdesign;

pub use cooling::{CoolingReport, GaugeCooler, RecoveryChannel, Syndrome};
pub use dynamics::{DensityMatrix, EvolutionContext, KrausChannel, NoiseKind, NoiseSpec, TrotterConfig};
pub use error::{Error, Result};
pub use hamiltonian::HamiltonianPair;
pub use lattice::{PlaquetteGeometry, VertexCgBasis, WignerIndex};
pub use linalg::CMatrix;
pub use su2::{Axis, GroupElement, SpinLabel};
pub use experiment::{ConvergeRow, EvolveConfig, EvolveRow, Simulator, Stage};
pub use checks::{CheckResult, Suite, SuiteOptions};
