//! Small dense linear-algebra helpers shared by the analysis modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Serde adapter storing a `DMatrix<f64>` as row-major nested arrays.
pub mod rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    /// Builds a matrix from rows; `None` if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return None;
        }
        Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).ok_or_else(|| serde::de::Error::custom("ragged matrix rows"))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[DMatrix<f64>], s: S) -> Result<S::Ok, S::Error> {
            ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<DMatrix<f64>>, D::Error> {
            let all = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
            all.iter()
                .map(|r| from_rows(r).ok_or_else(|| serde::de::Error::custom("ragged matrix rows")))
                .collect()
        }
    }
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn is_skew(a: &DMatrix<f64>, tol: f64) -> bool {
    a.is_square() && max_abs_diff(a, &(-a.transpose())) <= tol
}

pub fn orthogonality_defect(g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    max_abs_diff(&(g.transpose() * g), &DMatrix::identity(n, n))
}

/// Numerical rank: singular values above `rel_tol * sigma_max`, and above
/// `abs_floor` so that an all-but-zero matrix has rank 0.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64, abs_floor: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if smax <= abs_floor {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending.
pub struct SortedEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> SortedEigen {
    let eig = SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    SortedEigen {
        values: idx.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    }
}

/// Stacks vectors as the columns of a matrix.
pub fn columns(n: usize, vs: &[DVector<f64>]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, vs.len());
    for (j, v) in vs.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Orthonormal basis of `span(vs)` via SVD.
pub fn orthonormal_basis(n: usize, vs: &[DVector<f64>], rel_tol: f64) -> Vec<DVector<f64>> {
    if vs.is_empty() {
        return Vec::new();
    }
    let m = columns(n, vs);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    if smax <= 1e-300 {
        return Vec::new();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax)
        .map(|(j, _)| u.column(j).into_owned())
        .collect()
}

/// Orthonormal basis of `{x in span(space) : x ⟂ remove}`; `space` must be orthonormal.
pub fn complement_within(
    space: &[DVector<f64>],
    remove: &[DVector<f64>],
    tol: f64,
) -> Vec<DVector<f64>> {
    if space.is_empty() {
        return Vec::new();
    }
    let n = space[0].len();
    let d = space.len();
    let remove = orthonormal_basis(n, remove, 1e-10);
    if remove.is_empty() {
        return space.to_vec();
    }
    let q = columns(n, space);
    let t = columns(n, &remove);
    let r = q.transpose() * t; // d × t
    let gram = &r * r.transpose(); // d × d, projector of removed directions in coefficients
    let eig = sorted_symmetric_eigen(&gram);
    let mut out = Vec::new();
    for (val, vec) in eig.values.iter().zip(&eig.vectors) {
        if *val < tol {
            out.push(&q * vec);
        }
    }
    debug_assert!(out.len() <= d);
    out
}

/// Matrix of `op` restricted to the (invariant) subspace with orthonormal `basis`.
pub fn restrict(op: &DMatrix<f64>, basis: &[DVector<f64>]) -> DMatrix<f64> {
    let n = op.nrows();
    let q = columns(n, basis);
    q.transpose() * op * q
}

/// How far `span(basis)` is from being invariant under `op`.
pub fn invariance_defect(op: &DMatrix<f64>, basis: &[DVector<f64>]) -> f64 {
    if basis.is_empty() {
        return 0.0;
    }
    let n = op.nrows();
    let q = columns(n, basis);
    let aq = op * &q;
    let back = &q * (q.transpose() * &aq);
    (aq - back).amax()
}

pub fn matrix_power(g: &DMatrix<f64>, k: u32) -> DMatrix<f64> {
    let n = g.nrows();
    let mut acc = DMatrix::identity(n, n);
    for _ in 0..k {
        acc = &acc * g;
    }
    acc
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_removes_direction() {
        let e = |i: usize| {
            let mut v = DVector::zeros(3);
            v[i] = 1.0;
            v
        };
        let space = vec![e(0), e(1)];
        let diag = (e(0) + e(1)).normalize();
        let c = complement_within(&space, &[diag.clone()], 1e-10);
        assert_eq!(c.len(), 1);
        assert!(c[0].dot(&diag).abs() < 1e-12);
        assert!(c[0][2].abs() < 1e-12);
    }

    #[test]
    fn rank_of_degenerate_matrix() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(numerical_rank(&m, 1e-10, 1e-14), 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 2), 1e-10, 1e-14), 0);
    }

    #[test]
    fn rows_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let r = rows::to_rows(&m);
        assert_eq!(r, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(rows::from_rows(&r).unwrap(), m);
        assert!(rows::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_none());
    }
}
