//! Smith normal form invariant factors of integer matrices.

use super::TopologyError;

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[dst] -= q * row[src]` on columns `from..`.
    fn row_axpy(&mut self, dst: usize, src: usize, q: i64, from: usize) -> Result<(), TopologyError> {
        let c = self.cols;
        for j in from..c {
            let s = self.data[src * c + j];
            if s != 0 {
                let v = s
                    .checked_mul(q)
                    .and_then(|p| self.data[dst * c + j].checked_sub(p))
                    .ok_or(TopologyError::Overflow)?;
                self.data[dst * c + j] = v;
            }
        }
        Ok(())
    }

    /// `col[dst] -= q * col[src]` on rows `from..`.
    fn col_axpy(&mut self, dst: usize, src: usize, q: i64, from: usize) -> Result<(), TopologyError> {
        let c = self.cols;
        for i in from..self.rows {
            let s = self.data[i * c + src];
            if s != 0 {
                let v = s
                    .checked_mul(q)
                    .and_then(|p| self.data[i * c + dst].checked_sub(p))
                    .ok_or(TopologyError::Overflow)?;
                self.data[i * c + dst] = v;
            }
        }
        Ok(())
    }
}

/// Rank and nonzero invariant factors (diagonal of the Smith form, all positive).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    pub invariants: Vec<u64>,
}

impl SmithForm {
    /// Invariant factors greater than one: the torsion of the cokernel.
    pub fn torsion(&self) -> Vec<u64> {
        self.invariants.iter().copied().filter(|&d| d > 1).collect()
    }
}

fn find_min_pivot(m: &IntMatrix, r: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, i64)> = None;
    for i in r..m.rows {
        for j in r..m.cols {
            let v = m.get(i, j).abs();
            if v != 0 && best.is_none_or(|b| v < b.2) {
                best = Some((i, j, v));
                if v == 1 {
                    return Some((i, j));
                }
            }
        }
    }
    best.map(|(i, j, _)| (i, j))
}

pub fn smith_invariants(mut m: IntMatrix) -> Result<SmithForm, TopologyError> {
    let mut invariants = Vec::new();
    let mut r = 0;
    while r < m.rows.min(m.cols) {
        let Some((pi, pj)) = find_min_pivot(&m, r) else {
            break;
        };
        m.swap_rows(r, pi);
        m.swap_cols(r, pj);
        loop {
            let p = m.get(r, r);
            let mut dirty = false;
            for i in r + 1..m.rows {
                let a = m.get(i, r);
                if a != 0 {
                    let q = a.div_euclid(p);
                    m.row_axpy(i, r, q, r)?;
                    if m.get(i, r) != 0 {
                        dirty = true;
                    }
                }
            }
            for j in r + 1..m.cols {
                let a = m.get(r, j);
                if a != 0 {
                    let q = a.div_euclid(p);
                    m.col_axpy(j, r, q, r)?;
                    if m.get(r, j) != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // move the smallest remainder in row/column r into the pivot
                let mut best = (r, r, p.abs());
                for i in r + 1..m.rows {
                    let v = m.get(i, r).abs();
                    if v != 0 && v < best.2 {
                        best = (i, r, v);
                    }
                }
                for j in r + 1..m.cols {
                    let v = m.get(r, j).abs();
                    if v != 0 && v < best.2 {
                        best = (r, j, v);
                    }
                }
                m.swap_rows(r, best.0);
                m.swap_cols(r, best.1);
                continue;
            }
            if p.abs() > 1 {
                let mut offender = None;
                'scan: for i in r + 1..m.rows {
                    for j in r + 1..m.cols {
                        if m.get(i, j) % p != 0 {
                            offender = Some(i);
                            break 'scan;
                        }
                    }
                }
                if let Some(i) = offender {
                    m.row_axpy(r, i, -1, r)?;
                    continue;
                }
            }
            break;
        }
        invariants.push(m.get(r, r).unsigned_abs());
        r += 1;
    }
    Ok(SmithForm {
        rank: invariants.len(),
        invariants,
    })
}
