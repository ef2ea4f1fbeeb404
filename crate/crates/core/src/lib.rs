//! Symmetric Lyapunov center analysis for Newtonian systems `u'' = -∇U(u)`.
//!
//! The pipeline: parse a potential and its symmetry group ([`potential`],
//! [`repgroup`]), read off the Hessian spectrum at a critical orbit
//! ([`spectral`]), compare Conley index descriptors on both sides of each
//! candidate level through cohomological dimensions ([`topology`],
//! [`bifurcation`]), and confirm predicted families by shooting ([`dynamics`]).

pub mod bifurcation;
pub mod dynamics;
pub mod linalg;
pub mod potential;
pub mod repgroup;
pub mod spectral;
pub mod topology;

pub use bifurcation::{analyze, AnalysisConfig, BifurcationReport, CandidateLevel, ConleyDescriptor};
pub use dynamics::{PeriodicBranch, PhaseState};
pub use potential::{catalog, catalog_entry, parse_potential, CatalogEntry, PotentialError, PotentialExpr};
pub use repgroup::{GroupSpec, HKind, IsotypicalDecomposition, StabilizerClaim};
pub use spectral::{ModeSpectrum, SpectralData};
pub use topology::CohomDim;
