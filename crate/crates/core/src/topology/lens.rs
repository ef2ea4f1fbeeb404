//! Lens complexes `S(V)/Z_m` as quotients of joins of polygons, and the
//! complex-projective cross-check for equal-weight circle actions.

use serde::{Deserialize, Serialize};

use super::complex::SimplicialComplexZ;
use super::{smash_cd, CohomDim, TopologyError};
use crate::repgroup::{HKind, IsotypicalDecomposition};

/// Largest weighted dimension `2Σk` the oracle accepts.
pub const ORACLE_DIM_CAP: usize = 8;
const ORACLE_K0_CAP: usize = 2;

/// `H^degree ≅ Z^rank ⊕ ⊕ Z/t` for `t` in `torsion`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyGroup {
    pub degree: usize,
    pub rank: usize,
    pub torsion: Vec<u64>,
}

impl CohomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

fn top_nonzero(groups: &[CohomologyGroup]) -> Option<usize> {
    groups.iter().filter(|g| !g.is_zero()).map(|g| g.degree).max()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub m: u32,
    pub decomposition: IsotypicalDecomposition,
    /// Cells per degree of the quotient complex `S(V)/Z_m`.
    pub cells: Vec<usize>,
    /// Reduced cohomology of `S(V)/Z_m`.
    pub sphere_quotient: Vec<CohomologyGroup>,
    /// Reduced cohomology of `S^V/Z_m`, the unreduced suspension of the above.
    pub quotient: Vec<CohomologyGroup>,
    pub cd: CohomDim,
}

struct Factor {
    offset: usize,
    len: usize,
    shift: usize,
    polygon: bool,
}

/// Equivariant triangulation of `S(V)` for a `Z_m` representation: one
/// two-point sphere per trivial summand and one polygon per weighted copy of
/// `R²`, joined together. Returns the complex and the generator's vertex map.
pub fn lens_complex(
    decomp: &IsotypicalDecomposition,
) -> Result<(SimplicialComplexZ, Vec<usize>, u32), TopologyError> {
    let HKind::Zm(m) = decomp.kind else {
        return Err(TopologyError::NotCyclic(decomp.kind));
    };
    decomp.validate()?;
    let weighted = 2 * decomp.sum_k();
    if weighted > ORACLE_DIM_CAP {
        return Err(TopologyError::DimensionCap {
            dim: weighted,
            cap: ORACLE_DIM_CAP,
        });
    }
    if decomp.k0 > ORACLE_K0_CAP {
        return Err(TopologyError::DimensionCap {
            dim: decomp.k0,
            cap: ORACLE_K0_CAP,
        });
    }
    // polygons need at least three vertices so that no rotation preserves an edge
    let mult = (3 + m as usize - 1) / m as usize;
    let l = m as usize * mult;
    let mut factors = Vec::new();
    let mut offset = 0;
    for _ in 0..decomp.k0 {
        factors.push(Factor {
            offset,
            len: 2,
            shift: 0,
            polygon: false,
        });
        offset += 2;
    }
    for b in &decomp.blocks {
        for _ in 0..b.multiplicity {
            factors.push(Factor {
                offset,
                len: l,
                shift: mult * b.weight as usize,
                polygon: true,
            });
            offset += l;
        }
    }
    let n_vertices = offset;
    let mut action = vec![0; n_vertices];
    for f in &factors {
        for a in 0..f.len {
            action[f.offset + a] = f.offset + (a + f.shift) % f.len;
        }
    }
    // maximal simplices: an edge of every polygon and a vertex of every two-point sphere
    let mut maximal: Vec<Vec<usize>> = vec![Vec::new()];
    for f in &factors {
        let mut next = Vec::with_capacity(maximal.len() * f.len);
        for s in &maximal {
            for a in 0..f.len {
                let mut t = s.clone();
                t.push(f.offset + a);
                if f.polygon {
                    t.push(f.offset + (a + 1) % f.len);
                }
                next.push(t);
            }
        }
        maximal = next;
    }
    maximal.retain(|s| !s.is_empty());
    let complex = SimplicialComplexZ::from_simplices(n_vertices, &maximal)?;
    Ok((complex, action, m))
}

/// Reduced integer cohomology of `S^V/Z_m` computed from the lens complex.
pub fn oracle_cohomology_zm(decomp: &IsotypicalDecomposition) -> Result<OracleReport, TopologyError> {
    let HKind::Zm(m) = decomp.kind else {
        return Err(TopologyError::NotCyclic(decomp.kind));
    };
    decomp.validate()?;
    if decomp.dim() == 0 {
        // S^0 with trivial action
        return Ok(OracleReport {
            m,
            decomposition: decomp.clone(),
            cells: Vec::new(),
            sphere_quotient: Vec::new(),
            quotient: vec![CohomologyGroup {
                degree: 0,
                rank: 1,
                torsion: Vec::new(),
            }],
            cd: CohomDim::Dim(0),
        });
    }
    let (complex, action, order) = lens_complex(decomp)?;
    let q = complex.quotient(&|v| action[v], order)?;
    let sphere_quotient = q.cohomology(true)?;
    let mut quotient = vec![CohomologyGroup {
        degree: 0,
        rank: 0,
        torsion: Vec::new(),
    }];
    quotient.extend(sphere_quotient.iter().map(|g| CohomologyGroup {
        degree: g.degree + 1,
        rank: g.rank,
        torsion: g.torsion.clone(),
    }));
    let cd = top_nonzero(&quotient).map_or(CohomDim::Contractible, CohomDim::Dim);
    Ok(OracleReport {
        m,
        decomposition: decomp.clone(),
        cells: q.cells,
        sphere_quotient,
        quotient,
        cd,
    })
}

/// Reduced cohomology of `CP^{k-1}`: `Z` in even degrees `2..=2k-2`.
pub fn cp_cohomology(k: usize) -> Vec<CohomologyGroup> {
    assert!(k >= 1, "CP^{{k-1}} needs k >= 1");
    (0..=2 * (k - 1))
        .map(|d| CohomologyGroup {
            degree: d,
            rank: usize::from(d > 0 && d % 2 == 0),
            torsion: Vec::new(),
        })
        .collect()
}

/// CD of `S^V/S¹` for `V = R[k0,0] ⊕ R[k,1]`, using `S(R[k,1])/S¹ = CP^{k-1}`,
/// one suspension, and a smash with `S^{k0}`.
pub fn cp_quotient_cd(k0: usize, k: usize) -> CohomDim {
    if k == 0 {
        return CohomDim::Dim(k0);
    }
    let suspended = top_nonzero(&cp_cohomology(k)).map_or(CohomDim::Contractible, |d| CohomDim::Dim(d + 1));
    smash_cd(CohomDim::Dim(k0), suspended)
}
