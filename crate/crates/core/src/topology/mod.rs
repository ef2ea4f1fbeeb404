//! Cohomological dimensions of representation-sphere quotients `S^V/H`, smash
//! additivity, the dimension-based index distinction test, and a simplicial
//! cohomology oracle for cyclic quotients.

mod complex;
mod lens;
mod snf;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::repgroup::{HKind, IsotypicalDecomposition, RepError};

pub use complex::{CellComplex, SimplicialComplexZ};
pub use lens::{
    cp_cohomology, cp_quotient_cd, lens_complex, oracle_cohomology_zm, CohomologyGroup,
    OracleReport, ORACLE_DIM_CAP,
};
pub use snf::{smith_invariants, IntMatrix, SmithForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("malformed decomposition: {0}")]
    Malformed(#[from] RepError),
    #[error("decompositions are over different groups ({0} vs {1})")]
    KindMismatch(HKind, HKind),
    #[error("the simplicial oracle handles cyclic groups only, got {0}")]
    NotCyclic(HKind),
    #[error("weighted dimension {dim} exceeds the oracle cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("inconsistent complex: {0}")]
    Inconsistent(String),
    #[error("integer overflow during Smith normal form")]
    Overflow,
}

/// `max{k : H̃^k(Z; Z) ≠ 0}`, or `Contractible` when all reduced cohomology vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CohomDim {
    Dim(usize),
    Contractible,
}

impl CohomDim {
    pub fn value(self) -> Option<usize> {
        match self {
            CohomDim::Dim(d) => Some(d),
            CohomDim::Contractible => None,
        }
    }
}

impl fmt::Display for CohomDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohomDim::Dim(d) => write!(f, "{d}"),
            CohomDim::Contractible => write!(f, "contractible"),
        }
    }
}

impl Serialize for CohomDim {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CohomDim::Dim(d) => s.serialize_u64(*d as u64),
            CohomDim::Contractible => s.serialize_str("contractible"),
        }
    }
}

impl<'de> Deserialize<'de> for CohomDim {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(CohomDim::Dim(n as usize)),
            Raw::Text(t) if t == "contractible" => Ok(CohomDim::Contractible),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unknown CD value {t:?}"))),
        }
    }
}

/// CD of `S^V/H` from the isotypical data: `k0 + 2Σk` for `Z_m`, `k0 + 2Σk - 1`
/// for `S¹`. A circle quotient with exactly one weighted coordinate pair is a
/// point after suspension and is `Contractible`; `V` with no weighted part is
/// the sphere `S^{k0}` with trivial action.
pub fn cohom_dim_quotient(decomp: &IsotypicalDecomposition) -> Result<CohomDim, TopologyError> {
    decomp.validate()?;
    let s = decomp.sum_k();
    if s == 0 {
        return Ok(CohomDim::Dim(decomp.k0));
    }
    Ok(match decomp.kind {
        HKind::Zm(_) => CohomDim::Dim(decomp.k0 + 2 * s),
        HKind::S1 if s == 1 => CohomDim::Contractible,
        HKind::S1 => CohomDim::Dim(decomp.k0 + 2 * s - 1),
    })
}

/// The same quantity read off `dim V` alone: `dim V` for `Z_m`, `dim V - 1` for `S¹`.
pub fn cd_by_dimension(decomp: &IsotypicalDecomposition) -> Result<CohomDim, TopologyError> {
    decomp.validate()?;
    let d = decomp.dim();
    Ok(match decomp.kind {
        HKind::S1 if decomp.sum_k() > 0 => CohomDim::Dim(d - 1),
        _ => CohomDim::Dim(d),
    })
}

/// CD of a smash product: dimensions add, a contractible factor absorbs.
pub fn smash_cd(a: CohomDim, b: CohomDim) -> CohomDim {
    match (a, b) {
        (CohomDim::Dim(x), CohomDim::Dim(y)) => CohomDim::Dim(x + y),
        _ => CohomDim::Contractible,
    }
}

/// Sufficient test for `Γ⁺ ∧_H S^{V1}` and `Γ⁺ ∧_H S^{V2}` being of different
/// homotopy type: `dim V1 ≠ dim V2`. `false` means "not distinguished".
pub fn indices_distinct(
    v1: &IsotypicalDecomposition,
    v2: &IsotypicalDecomposition,
) -> Result<bool, TopologyError> {
    if v1.kind != v2.kind {
        return Err(TopologyError::KindMismatch(v1.kind, v2.kind));
    }
    v1.validate()?;
    v2.validate()?;
    Ok(v1.dim() != v2.dim())
}
