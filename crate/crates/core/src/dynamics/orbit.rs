//! Distance from points to the group orbit `Γ(u0)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::linalg;
use crate::repgroup::GroupSpec;

const COARSE_BUDGET: usize = 4096;
const FINITE_CAP: usize = 256;
const REFINE_ITERS: usize = 30;

/// Precomputed coarse sample of `Γ(u0)` plus local refinement in the
/// one-parameter coordinates.
pub struct OrbitSampler<'a> {
    group: &'a GroupSpec,
    u0: DVector<f64>,
    finite: Vec<DMatrix<f64>>,
    coarse: Vec<(Vec<f64>, usize, DVector<f64>)>,
}

/// All products of the finite generators, up to `FINITE_CAP` elements.
fn finite_closure(group: &GroupSpec) -> Vec<DMatrix<f64>> {
    let n = group.n;
    let mut elems = vec![DMatrix::identity(n, n)];
    let mut frontier = 0;
    while frontier < elems.len() && elems.len() < FINITE_CAP {
        let g = elems[frontier].clone();
        frontier += 1;
        for f in &group.finite_generators {
            let h = &f.matrix * &g;
            if !elems.iter().any(|e| linalg::max_abs_diff(e, &h) < 1e-9) {
                elems.push(h);
            }
        }
    }
    elems
}

impl<'a> OrbitSampler<'a> {
    pub fn new(group: &'a GroupSpec, u0: &[f64]) -> Self {
        let d = group.lie_generators.len();
        let finite = finite_closure(group);
        let u0 = DVector::from_column_slice(u0);
        let per_dim = if d == 0 {
            1
        } else {
            ((COARSE_BUDGET as f64).powf(1.0 / d as f64).floor() as usize).max(8)
        };
        let mut grid: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..d {
            let mut next = Vec::with_capacity(grid.len() * per_dim);
            for c in &grid {
                for i in 0..per_dim {
                    let mut c = c.clone();
                    c.push(2.0 * PI * i as f64 / per_dim as f64);
                    next.push(c);
                }
            }
            grid = next;
        }
        let mut coarse = Vec::with_capacity(grid.len() * finite.len());
        for c in &grid {
            let g = group.exp_combination(c);
            for (fi, f) in finite.iter().enumerate() {
                coarse.push((c.clone(), fi, &g * (f * &u0)));
            }
        }
        Self {
            group,
            u0,
            finite,
            coarse,
        }
    }

    fn point(&self, c: &[f64], fi: usize) -> DVector<f64> {
        self.group.exp_combination(c) * (&self.finite[fi] * &self.u0)
    }

    /// `min_γ |γu0 - p|`.
    pub fn distance(&self, p: &[f64]) -> f64 {
        let p = DVector::from_column_slice(p);
        let mut best = (f64::INFINITY, 0usize);
        for (i, (_, _, q)) in self.coarse.iter().enumerate() {
            let d = (q - &p).norm_squared();
            if d < best.0 {
                best = (d, i);
            }
        }
        let (c0, fi, _) = &self.coarse[best.1];
        let mut c = c0.clone();
        let mut r = self.point(&c, fi.to_owned()) - &p;
        let mut f = r.norm();
        let d = c.len();
        if d == 0 {
            return f;
        }
        let h = 1e-6;
        for _ in 0..REFINE_ITERS {
            let mut jac = DMatrix::zeros(p.len(), d);
            for k in 0..d {
                let mut cp = c.clone();
                let mut cm = c.clone();
                cp[k] += h;
                cm[k] -= h;
                let col = (self.point(&cp, *fi) - self.point(&cm, *fi)) / (2.0 * h);
                jac.set_column(k, &col);
            }
            let Ok(step) = jac.clone().svd(true, true).solve(&(-&r), 1e-12) else {
                break;
            };
            let mut t = 1.0;
            let mut improved = false;
            for _ in 0..20 {
                let trial: Vec<f64> = c.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
                let rt = self.point(&trial, *fi) - &p;
                let ft = rt.norm();
                if ft < f {
                    c = trial;
                    r = rt;
                    improved = f - ft > 1e-15 * f.max(1e-300);
                    f = ft;
                    break;
                }
                t *= 0.5;
            }
            if !improved || step.norm() < 1e-13 {
                break;
            }
        }
        f
    }
}

/// `max_p min_γ |γu0 - p|` over the points of a trajectory.
pub fn orbit_distance(points: &[Vec<f64>], group: &GroupSpec, u0: &[f64]) -> f64 {
    let sampler = OrbitSampler::new(group, u0);
    points.iter().map(|p| sampler.distance(p)).fold(0.0, f64::max)
}
