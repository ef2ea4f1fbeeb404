//! Finite simplicial complexes, their quotients by a cyclic simplicial action,
//! and integer cohomology of the resulting cell complexes.

use std::collections::HashMap;

use super::snf::{smith_invariants, IntMatrix};
use super::TopologyError;
use super::lens::CohomologyGroup;

/// Simplicial complex on vertices `0..n_vertices`; simplices are stored as
/// strictly increasing vertex tuples, grouped by dimension.
#[derive(Debug, Clone)]
pub struct SimplicialComplexZ {
    pub n_vertices: usize,
    pub simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

/// Integer chain complex with a free basis of cells in each degree.
/// `boundaries[k][c]` lists the faces `(cell in degree k-1, coefficient)` of
/// cell `c` in degree `k`; `boundaries[0]` is all empty.
#[derive(Debug, Clone)]
pub struct CellComplex {
    pub cells: Vec<usize>,
    pub boundaries: Vec<Vec<Vec<(usize, i64)>>>,
}

impl SimplicialComplexZ {
    /// Builds the complex from a list of simplices, closing under faces.
    pub fn from_simplices(n_vertices: usize, generators: &[Vec<usize>]) -> Result<Self, TopologyError> {
        let mut by_dim: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut index: Vec<HashMap<Vec<usize>, usize>> = Vec::new();
        let mut stack: Vec<Vec<usize>> = Vec::new();
        for g in generators {
            let mut s = g.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.len() != g.len() {
                return Err(TopologyError::Inconsistent("repeated or missing vertices in simplex".into()));
            }
            if s.iter().any(|&v| v >= n_vertices) {
                return Err(TopologyError::Inconsistent("vertex index out of range".into()));
            }
            stack.push(s);
        }
        while let Some(s) = stack.pop() {
            let d = s.len() - 1;
            while by_dim.len() <= d {
                by_dim.push(Vec::new());
                index.push(HashMap::new());
            }
            if index[d].contains_key(&s) {
                continue;
            }
            index[d].insert(s.clone(), by_dim[d].len());
            if d > 0 {
                for i in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(i);
                    if !index[d - 1].contains_key(&f) {
                        stack.push(f);
                    }
                }
            }
            by_dim[d].push(s);
        }
        Ok(Self {
            n_vertices,
            simplices: by_dim,
            index,
        })
    }

    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, Vec::len)
    }

    pub fn position(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    pub fn to_cell_complex(&self) -> CellComplex {
        let top = self.simplices.len();
        let mut boundaries = vec![vec![Vec::new(); self.count(0)]];
        for d in 1..top {
            let faces = self.simplices[d]
                .iter()
                .map(|s| {
                    (0..s.len())
                        .map(|i| {
                            let mut f = s.clone();
                            f.remove(i);
                            let c = if i % 2 == 0 { 1 } else { -1 };
                            (self.position(&f).expect("closed under faces"), c)
                        })
                        .collect()
                })
                .collect();
            boundaries.push(faces);
        }
        CellComplex {
            cells: (0..top).map(|d| self.count(d)).collect(),
            boundaries,
        }
    }

    /// Cellular chain complex of the quotient by the cyclic group generated by
    /// the vertex map `act` (of order dividing `order`). Every cell stabilizer
    /// must fix its cell pointwise, which makes the quotient chains the
    /// coinvariants, freely generated by orbits of oriented simplices.
    pub fn quotient(&self, act: &dyn Fn(usize) -> usize, order: u32) -> Result<CellComplex, TopologyError> {
        let top = self.simplices.len();
        // rep[d][i] = (orbit id, sign of simplex relative to the orbit representative)
        let mut rep: Vec<Vec<(usize, i64)>> = Vec::with_capacity(top);
        let mut cells = Vec::with_capacity(top);
        for d in 0..top {
            let n = self.count(d);
            let mut assign: Vec<Option<(usize, i64)>> = vec![None; n];
            let mut orbits = 0;
            for i in 0..n {
                if assign[i].is_some() {
                    continue;
                }
                let id = orbits;
                orbits += 1;
                assign[i] = Some((id, 1));
                let mut cur = self.simplices[d][i].clone();
                let mut sign = 1i64;
                for _ in 1..order.max(1) {
                    let (img, s) = apply(&cur, act);
                    sign *= s;
                    let j = self
                        .position(&img)
                        .ok_or_else(|| TopologyError::Inconsistent("action does not preserve the complex".into()))?;
                    match assign[j] {
                        None => assign[j] = Some((id, sign)),
                        Some((o, s0)) => {
                            if o != id {
                                return Err(TopologyError::Inconsistent("orbits overlap".into()));
                            }
                            if s0 != sign {
                                return Err(TopologyError::Inconsistent(
                                    "a cell stabilizer reverses orientation".into(),
                                ));
                            }
                        }
                    }
                    cur = img;
                }
                let (back, s) = apply(&cur, act);
                if back != self.simplices[d][i] || sign * s != 1 {
                    return Err(TopologyError::Inconsistent(
                        "action has the wrong order or reverses orientation on a fixed cell".into(),
                    ));
                }
            }
            rep.push(assign.into_iter().map(|a| a.expect("assigned")).collect());
            cells.push(orbits);
        }
        // pick the first simplex of each orbit as representative
        let mut reps: Vec<Vec<usize>> = Vec::with_capacity(top);
        for d in 0..top {
            let mut r = vec![usize::MAX; cells[d]];
            for (i, (o, s)) in rep[d].iter().enumerate() {
                if r[*o] == usize::MAX {
                    debug_assert_eq!(*s, 1);
                    r[*o] = i;
                }
            }
            reps.push(r);
        }
        let mut boundaries = vec![vec![Vec::new(); cells.first().copied().unwrap_or(0)]];
        for d in 1..top {
            let mut bd = Vec::with_capacity(cells[d]);
            for &i in &reps[d] {
                let s = &self.simplices[d][i];
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for k in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(k);
                    let fi = self.position(&f).expect("closed under faces");
                    let (o, sg) = rep[d - 1][fi];
                    let c = if k % 2 == 0 { 1 } else { -1 };
                    *acc.entry(o).or_insert(0) += c * sg;
                }
                let mut faces: Vec<(usize, i64)> = acc.into_iter().filter(|(_, c)| *c != 0).collect();
                faces.sort_unstable();
                bd.push(faces);
            }
            boundaries.push(bd);
        }
        Ok(CellComplex { cells, boundaries })
    }
}

/// Image of a sorted simplex under a vertex map, re-sorted, with the sign of
/// the sorting permutation.
fn apply(s: &[usize], act: &dyn Fn(usize) -> usize) -> (Vec<usize>, i64) {
    let mut img: Vec<usize> = s.iter().map(|&v| act(v)).collect();
    let mut sign = 1;
    // insertion sort counting transpositions; simplices are short
    for i in 1..img.len() {
        let mut j = i;
        while j > 0 && img[j - 1] > img[j] {
            img.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (img, sign)
}

impl CellComplex {
    pub fn top_dim(&self) -> Option<usize> {
        self.cells.len().checked_sub(1)
    }

    fn dense_boundary(&self, k: usize) -> IntMatrix {
        let rows = self.cells[k - 1];
        let cols = self.cells[k];
        let mut m = IntMatrix::zeros(rows, cols);
        for (c, faces) in self.boundaries[k].iter().enumerate() {
            for &(f, v) in faces {
                m.set(f, c, m.get(f, c) + v);
            }
        }
        m
    }

    /// Verifies `∂_{k-1} ∘ ∂_k = 0` exactly.
    pub fn check_boundary_squared(&self) -> Result<(), TopologyError> {
        for k in 2..self.cells.len() {
            for (c, faces) in self.boundaries[k].iter().enumerate() {
                let mut acc: HashMap<usize, i64> = HashMap::new();
                for &(f, v) in faces {
                    for &(g, w) in &self.boundaries[k - 1][f] {
                        *acc.entry(g).or_insert(0) += v * w;
                    }
                }
                if acc.values().any(|&x| x != 0) {
                    return Err(TopologyError::Inconsistent(format!(
                        "boundary of boundary is nonzero on cell {c} of degree {k}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Integer cohomology `H^k` for `k = 0..=top`: free rank and torsion orders.
    /// With `reduced`, one copy of `Z` is removed from degree 0.
    pub fn cohomology(&self, reduced: bool) -> Result<Vec<CohomologyGroup>, TopologyError> {
        self.check_boundary_squared()?;
        let top = self.cells.len();
        let mut forms = Vec::with_capacity(top + 1);
        forms.push(None);
        for k in 1..top {
            forms.push(Some(smith_invariants(self.dense_boundary(k))?));
        }
        forms.push(None);
        let rank = |k: usize| forms[k].as_ref().map_or(0, |f| f.rank);
        let mut out = Vec::with_capacity(top);
        for k in 0..top {
            let mut free = self.cells[k] - rank(k) - rank(k + 1);
            if reduced && k == 0 {
                free = free
                    .checked_sub(1)
                    .ok_or_else(|| TopologyError::Inconsistent("complex has no components".into()))?;
            }
            let torsion = forms[k].as_ref().map_or(Vec::new(), |f| f.torsion());
            out.push(CohomologyGroup {
                degree: k,
                rank: free,
                torsion,
            });
        }
        Ok(out)
    }
}
