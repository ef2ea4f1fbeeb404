//! Periodic orbits as zeros of `F(s, T) = flow_T(s) - s`, augmented with
//! phase, amplitude and group-slice conditions, by damped Gauss-Newton.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{integrate, steps_for, DynamicsError, FlowOptions, PhaseState};
use crate::potential::PotentialExpr;

/// A proper divisor `T/j` counts as a period when the return residual is below this.
pub const MINIMAL_RESIDUAL: f64 = 1e-4;

pub struct ShootProblem<'a> {
    pub potential: &'a PotentialExpr,
    pub u0: Vec<f64>,
    /// Linear mode direction `e`: anchors the phase `<v(0), e> = 0`.
    pub direction: Vec<f64>,
    /// When set, `<u(0) - u0, e> = a`.
    pub amplitude: Option<f64>,
    /// Tangent vectors `A_j u0`: `<u(0) - u0, A_j u0> = 0`.
    pub slices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_rel: f64,
    pub svd_cutoff: f64,
    pub max_halvings: usize,
    pub flow: FlowOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 25,
            fd_rel: 1e-7,
            svd_cutoff: 1e-10,
            max_halvings: 12,
            flow: FlowOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub state: PhaseState,
    pub period: f64,
    /// `|flow_T(s) - s|`.
    pub residual: f64,
    /// Norm of the full augmented residual.
    pub augmented_residual: f64,
    pub iterations: usize,
    pub steps: usize,
    /// Half-step disagreement of `flow_T(s)` at the accepted step count.
    pub richardson_error: f64,
    pub condition: f64,
    pub rank: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Residual<'p, 'a> {
    p: &'p ShootProblem<'a>,
    n: usize,
    steps: usize,
    method: super::Method,
}

impl Residual<'_, '_> {
    fn len(&self) -> usize {
        2 * self.n + 1 + usize::from(self.p.amplitude.is_some()) + self.p.slices.len()
    }

    fn eval(&self, x: &[f64]) -> Result<DVector<f64>, DynamicsError> {
        let n = self.n;
        let t = x[2 * n];
        let s = PhaseState::from_slice(&x[..2 * n]);
        let out = integrate(self.p.potential, &s, t, self.steps, self.method)?;
        let mut f = DVector::zeros(self.len());
        for i in 0..n {
            f[i] = out.u[i] - s.u[i];
            f[n + i] = out.v[i] - s.v[i];
        }
        let du: Vec<f64> = s.u.iter().zip(&self.p.u0).map(|(a, b)| a - b).collect();
        let mut row = 2 * n;
        f[row] = dot(&s.v, &self.p.direction);
        row += 1;
        if let Some(a) = self.p.amplitude {
            f[row] = dot(&du, &self.p.direction) - a;
            row += 1;
        }
        for t in &self.p.slices {
            f[row] = dot(&du, t);
            row += 1;
        }
        Ok(f)
    }

    fn periodicity(&self, f: &DVector<f64>) -> f64 {
        f.rows(0, 2 * self.n).norm()
    }
}

fn gauss_newton(
    res: &Residual,
    x0: Vec<f64>,
    opts: &ShootOptions,
) -> Result<(Vec<f64>, DVector<f64>, usize, f64, usize), DynamicsError> {
    let m = x0.len();
    let mut x = x0;
    let mut f = res.eval(&x)?;
    let mut condition = 1.0;
    let mut rank = m;
    for it in 0..=opts.max_iter {
        let norm = f.norm();
        if norm < opts.tol {
            return Ok((x, f, it, condition, rank));
        }
        if it == opts.max_iter {
            break;
        }
        let mut jac = DMatrix::zeros(f.len(), m);
        for k in 0..m {
            let h = opts.fd_rel * x[k].abs().max(1.0);
            let mut xp = x.clone();
            xp[k] += h;
            let fp = res.eval(&xp)?;
            jac.set_column(k, &((fp - &f) / h));
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let cut = opts.svd_cutoff * smax;
        let kept: Vec<f64> = svd.singular_values.iter().copied().filter(|&s| s > cut).collect();
        rank = kept.len();
        condition = smax / kept.iter().copied().fold(f64::INFINITY, f64::min);
        let step = svd
            .solve(&(-&f), cut)
            .map_err(|e| DynamicsError::Input(format!("least-squares solve failed: {e}")))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + t * s).collect();
            if trial[m - 1] > 0.0 {
                if let Ok(ft) = res.eval(&trial) {
                    if ft.norm() < norm {
                        x = trial;
                        f = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if rank < m && condition > 1e8 {
                return Err(DynamicsError::SingularJacobian { condition, residual: norm });
            }
            return Err(DynamicsError::Diverged {
                iterations: it + 1,
                residual: norm,
            });
        }
    }
    Err(DynamicsError::Diverged {
        iterations: opts.max_iter,
        residual: f.norm(),
    })
}

/// Solves for a periodic orbit near `guess` with period near `t_guess`. The
/// step count is fixed during the Newton loop and doubled afterwards until the
/// half-step check passes.
pub fn shoot_periodic(
    problem: &ShootProblem,
    guess: &PhaseState,
    t_guess: f64,
    opts: &ShootOptions,
) -> Result<ShootResult, DynamicsError> {
    let n = problem.potential.dim();
    if guess.dim() != n || problem.u0.len() != n || problem.direction.len() != n {
        return Err(DynamicsError::Input("shooting problem dimensions disagree".into()));
    }
    if problem.slices.iter().any(|s| s.len() != n) {
        return Err(DynamicsError::Input("slice vector has the wrong dimension".into()));
    }
    if !(t_guess > 0.0 && t_guess.is_finite()) {
        return Err(DynamicsError::BadTime(t_guess));
    }
    let mut x = guess.to_vec();
    x.push(t_guess);
    let mut steps = steps_for(t_guess, opts.flow.base_step);
    let mut total_iters = 0;
    for refinement in 0..=opts.flow.max_refinements {
        let res = Residual {
            p: problem,
            n,
            steps,
            method: opts.flow.method,
        };
        let (xs, f, iters, condition, rank) = gauss_newton(&res, x, opts)?;
        total_iters += iters;
        let t = xs[2 * n];
        let s = PhaseState::from_slice(&xs[..2 * n]);
        let coarse = integrate(problem.potential, &s, t, steps, opts.flow.method)?;
        let fine = integrate(problem.potential, &s, t, 2 * steps, opts.flow.method)?;
        let richardson_error = fine.distance(&coarse);
        let done = richardson_error <= opts.flow.richardson_tol || refinement == opts.flow.max_refinements;
        if done {
            return Ok(ShootResult {
                residual: res.periodicity(&f),
                augmented_residual: f.norm(),
                state: s,
                period: t,
                iterations: total_iters,
                steps,
                richardson_error,
                condition,
                rank,
            });
        }
        x = xs;
        steps *= 2;
    }
    unreachable!("the last refinement always returns")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPeriod {
    pub minimal: bool,
    /// `(j, |flow_{T/j}(s) - s|)` for each divisor tested.
    pub residuals: Vec<(u32, f64)>,
}

/// True iff no `T/j`, `j = 2..=j_max`, returns to `s` within `MINIMAL_RESIDUAL`.
/// Divisors shorter than eight base steps are skipped.
pub fn minimal_period_check(
    potential: &PotentialExpr,
    s: &PhaseState,
    period: f64,
    j_max: u32,
    flow: &FlowOptions,
) -> Result<MinimalPeriod, DynamicsError> {
    let mut residuals = Vec::new();
    for j in 2..=j_max {
        let t = period / j as f64;
        if t < 8.0 * flow.base_step {
            break;
        }
        let out = integrate(potential, s, t, steps_for(t, flow.base_step), flow.method)?;
        residuals.push((j, out.distance(s)));
    }
    Ok(MinimalPeriod {
        minimal: residuals.iter().all(|&(_, r)| r > MINIMAL_RESIDUAL),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog_entry, parse_potential};
    use std::f64::consts::PI;

    #[test]
    fn harmonic_period() {
        let p = parse_potential("u1^2/2", 1).unwrap();
        let prob = ShootProblem {
            potential: &p,
            u0: vec![0.0],
            direction: vec![1.0],
            amplitude: Some(1.1),
            slices: vec![],
        };
        let r = shoot_periodic(&prob, &PhaseState::at_rest(vec![1.1]), 6.0, &ShootOptions::default()).unwrap();
        assert!((r.period - 2.0 * PI).abs() < 1e-9, "{}", r.period);
        assert!(r.augmented_residual < 1e-10);
        let f = FlowOptions::default();
        assert!(minimal_period_check(&p, &r.state, r.period, 6, &f).unwrap().minimal);
        assert!(!minimal_period_check(&p, &r.state, 2.0 * r.period, 6, &f).unwrap().minimal);
    }

    #[test]
    fn ring3d_vertical_mode() {
        let e = catalog_entry("ring3d").unwrap();
        let a = 0.01;
        let prob = ShootProblem {
            potential: &e.potential,
            u0: e.u0.clone(),
            direction: vec![0.0, 0.0, 1.0],
            amplitude: Some(a),
            slices: vec![vec![0.0, 1.0, 0.0]],
        };
        let r = shoot_periodic(&prob, &PhaseState::at_rest(vec![1.0, 0.0, a]), 2.0 * PI, &ShootOptions::default())
            .unwrap();
        assert!((r.period - 2.0 * PI).abs() < 1e-6);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn ring3d_radial_mode() {
        let e = catalog_entry("ring3d").unwrap();
        let a = 0.01;
        let prob = ShootProblem {
            potential: &e.potential,
            u0: e.u0.clone(),
            direction: vec![1.0, 0.0, 0.0],
            amplitude: Some(a),
            slices: vec![vec![0.0, 1.0, 0.0]],
        };
        let t0 = 2.0 * PI / 2f64.sqrt();
        let r = shoot_periodic(&prob, &PhaseState::at_rest(vec![1.0 + a, 0.0, 0.0]), t0, &ShootOptions::default())
            .unwrap();
        assert!((r.period - t0).abs() < 1e-3, "{}", r.period);
        assert!(r.residual < 1e-10);
    }
}
