//! Numerical confirmation of certified levels: symplectic integration of
//! `ü = -∇U(u)`, periodic orbits by shooting, and amplitude continuation.

mod branch;
mod orbit;
mod shoot;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{PotentialError, PotentialExpr};

pub use branch::{
    confirm_levels, continue_branch, linear_mode_direction, BranchOptions, BranchRecord, BranchRow,
    BranchStatus, BranchSummary, PeriodicBranch, DEFAULT_AMPLITUDES,
};
pub use orbit::{orbit_distance, OrbitSampler};
pub use shoot::{
    minimal_period_check, shoot_periodic, MinimalPeriod, ShootOptions, ShootProblem, ShootResult,
    MINIMAL_RESIDUAL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("integration time must be positive and finite, got {0}")]
    BadTime(f64),
    #[error("step size underflow: {steps} steps over time {t}")]
    StepUnderflow { steps: usize, t: f64 },
    #[error("state became non-finite at t = {t:.6}")]
    NonFinite { t: f64 },
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    Diverged { iterations: usize, residual: f64 },
    #[error("shooting Jacobian is singular (condition estimate {condition:.3e}, residual {residual:.3e})")]
    SingularJacobian { condition: f64, residual: f64 },
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PhaseState {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(u.len(), v.len(), "position and velocity dimensions differ");
        Self { u, v }
    }

    pub fn at_rest(u: Vec<f64>) -> Self {
        let v = vec![0.0; u.len()];
        Self { u, v }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Euclidean distance in `R^{2n}`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.u.iter().chain(&self.v).copied().collect()
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        Self {
            u: x[..n].to_vec(),
            v: x[n..2 * n].to_vec(),
        }
    }
}

pub fn energy(potential: &PotentialExpr, s: &PhaseState) -> Result<f64, DynamicsError> {
    let kinetic: f64 = s.v.iter().map(|x| x * x).sum::<f64>() / 2.0;
    Ok(kinetic + potential.eval(&s.u)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Kick-drift-kick velocity Verlet, second order.
    Verlet,
    /// Triple-jump composition of Verlet, fourth order.
    #[default]
    Yoshida4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub method: Method,
    /// Largest step; a time `T` uses `ceil(T / base_step)` equal steps.
    pub base_step: f64,
    /// Accept a step count when the half-step result agrees to this.
    pub richardson_tol: f64,
    /// How many times the step count may be doubled.
    pub max_refinements: u32,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            method: Method::Yoshida4,
            base_step: 2.0 * PI / 2048.0,
            richardson_tol: 1e-9,
            max_refinements: 4,
        }
    }
}

pub fn steps_for(t: f64, base_step: f64) -> usize {
    ((t / base_step).ceil() as usize).max(1)
}

const MIN_STEP: f64 = 1e-12;

struct Stepper<'a> {
    potential: &'a PotentialExpr,
    u: Vec<f64>,
    v: Vec<f64>,
    acc: Vec<f64>,
    value: f64,
}

impl<'a> Stepper<'a> {
    fn new(potential: &'a PotentialExpr, s: &PhaseState) -> Result<Self, DynamicsError> {
        let n = s.dim();
        if potential.dim() != n {
            return Err(DynamicsError::Input(format!(
                "state has dimension {n}, potential has {}",
                potential.dim()
            )));
        }
        let mut st = Self {
            potential,
            u: s.u.clone(),
            v: s.v.clone(),
            acc: vec![0.0; n],
            value: 0.0,
        };
        st.refresh()?;
        Ok(st)
    }

    fn refresh(&mut self) -> Result<(), DynamicsError> {
        self.value = self.potential.gradient_into(&self.u, &mut self.acc)?;
        for a in &mut self.acc {
            *a = -*a;
        }
        Ok(())
    }

    fn verlet(&mut self, h: f64) -> Result<(), DynamicsError> {
        for (v, a) in self.v.iter_mut().zip(&self.acc) {
            *v += 0.5 * h * a;
        }
        for (u, v) in self.u.iter_mut().zip(&self.v) {
            *u += h * v;
        }
        self.refresh()?;
        for (v, a) in self.v.iter_mut().zip(&self.acc) {
            *v += 0.5 * h * a;
        }
        Ok(())
    }

    fn step(&mut self, method: Method, h: f64) -> Result<(), DynamicsError> {
        match method {
            Method::Verlet => self.verlet(h),
            Method::Yoshida4 => {
                let c = 2f64.cbrt();
                let w1 = 1.0 / (2.0 - c);
                let w0 = -c / (2.0 - c);
                self.verlet(w1 * h)?;
                self.verlet(w0 * h)?;
                self.verlet(w1 * h)
            }
        }
    }

    fn state(&self) -> PhaseState {
        PhaseState {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    fn energy(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum::<f64>() / 2.0 + self.value
    }

    fn finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// A blow-up shows up first as a non-finite value inside the potential.
fn blow_up(e: DynamicsError, t: f64) -> DynamicsError {
    match e {
        DynamicsError::Potential(PotentialError::Domain { what, .. }) if what.starts_with("non-finite") => {
            DynamicsError::NonFinite { t }
        }
        other => other,
    }
}

fn check_time(t: f64, steps: usize) -> Result<f64, DynamicsError> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(DynamicsError::BadTime(t));
    }
    if steps == 0 || t / (steps as f64) < MIN_STEP {
        return Err(DynamicsError::StepUnderflow { steps, t });
    }
    Ok(t / steps as f64)
}

/// Flows `s0` for time `t` with `steps` equal steps.
pub fn integrate(
    potential: &PotentialExpr,
    s0: &PhaseState,
    t: f64,
    steps: usize,
    method: Method,
) -> Result<PhaseState, DynamicsError> {
    let h = check_time(t, steps)?;
    let mut st = Stepper::new(potential, s0)?;
    for i in 0..steps {
        st.step(method, h).map_err(|e| blow_up(e, (i + 1) as f64 * h))?;
        if !st.finite() {
            return Err(DynamicsError::NonFinite { t: (i + 1) as f64 * h });
        }
    }
    Ok(st.state())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// `max_t |E(t) - E(0)|` over the recorded states.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max)
    }
}

/// As `integrate`, recording the state every `stride` steps and at the end.
pub fn integrate_dense(
    potential: &PotentialExpr,
    s0: &PhaseState,
    t: f64,
    steps: usize,
    method: Method,
    stride: usize,
) -> Result<Trajectory, DynamicsError> {
    let h = check_time(t, steps)?;
    let stride = stride.max(1);
    let mut st = Stepper::new(potential, s0)?;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![st.state()],
        energies: vec![st.energy()],
    };
    for i in 1..=steps {
        st.step(method, h).map_err(|e| blow_up(e, i as f64 * h))?;
        if !st.finite() {
            return Err(DynamicsError::NonFinite { t: i as f64 * h });
        }
        if i % stride == 0 || i == steps {
            traj.times.push(i as f64 * h);
            traj.states.push(st.state());
            traj.energies.push(st.energy());
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub state: PhaseState,
    pub steps: usize,
    /// Distance between the accepted result and the one with half the steps.
    pub error_estimate: f64,
    pub accepted: bool,
}

/// Flows with `ceil(t / base_step)` steps, doubling the step count until the
/// result agrees with the half-step run to `richardson_tol`.
pub fn integrate_checked(
    potential: &PotentialExpr,
    s0: &PhaseState,
    t: f64,
    opts: &FlowOptions,
) -> Result<Flow, DynamicsError> {
    let mut steps = steps_for(t, opts.base_step);
    let mut coarse = integrate(potential, s0, t, steps, opts.method)?;
    let mut err = f64::INFINITY;
    for _ in 0..=opts.max_refinements {
        let fine = integrate(potential, s0, t, 2 * steps, opts.method)?;
        err = fine.distance(&coarse);
        steps *= 2;
        coarse = fine;
        if err <= opts.richardson_tol {
            return Ok(Flow {
                state: coarse,
                steps,
                error_estimate: err,
                accepted: true,
            });
        }
    }
    Ok(Flow {
        state: coarse,
        steps,
        error_estimate: err,
        accepted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog_entry, parse_potential};

    fn harmonic() -> PotentialExpr {
        parse_potential("u1^2/2", 1).unwrap()
    }

    #[test]
    fn harmonic_closes() {
        let p = harmonic();
        let s = PhaseState::new(vec![1.0], vec![0.0]);
        let full = integrate(&p, &s, 2.0 * PI, 2048, Method::Yoshida4).unwrap();
        assert!(full.distance(&s) < 1e-8);
        let half = integrate(&p, &s, PI, 1024, Method::Yoshida4).unwrap();
        assert!(half.distance(&PhaseState::new(vec![-1.0], vec![0.0])) < 1e-8);
    }

    #[test]
    fn verlet_is_second_order() {
        let p = harmonic();
        let s = PhaseState::new(vec![1.0], vec![0.0]);
        let e1 = integrate(&p, &s, 1.0, 100, Method::Verlet).unwrap().distance(&PhaseState::new(
            vec![1f64.cos()],
            vec![-1f64.sin()],
        ));
        let e2 = integrate(&p, &s, 1.0, 200, Method::Verlet).unwrap().distance(&PhaseState::new(
            vec![1f64.cos()],
            vec![-1f64.sin()],
        ));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn equilibrium_is_fixed() {
        let e = catalog_entry("ring3d").unwrap();
        let s = PhaseState::at_rest(vec![0.6, 0.8, 0.0]);
        let out = integrate(&e.potential, &s, 3.7, 2000, Method::Yoshida4).unwrap();
        assert!(out.distance(&s) < 1e-10);
    }

    #[test]
    fn bad_times() {
        let p = harmonic();
        let s = PhaseState::at_rest(vec![1.0]);
        assert!(matches!(integrate(&p, &s, -1.0, 10, Method::Verlet), Err(DynamicsError::BadTime(_))));
        assert!(matches!(
            integrate(&p, &s, 1e-6, 1_000_000_000, Method::Verlet),
            Err(DynamicsError::StepUnderflow { .. })
        ));
    }

    #[test]
    fn blow_up_is_reported() {
        let p = parse_potential("-u1^4", 1).unwrap();
        let s = PhaseState::new(vec![1.0], vec![1.0]);
        assert!(matches!(
            integrate(&p, &s, 50.0, 500, Method::Verlet),
            Err(DynamicsError::NonFinite { .. })
        ));
    }

    #[test]
    fn richardson_accepts_default_step() {
        let p = harmonic();
        let s = PhaseState::new(vec![1.0], vec![0.5]);
        let f = integrate_checked(&p, &s, 2.0 * PI, &FlowOptions::default()).unwrap();
        assert!(f.accepted, "{f:?}");
        let d = integrate_dense(&p, &s, 2.0 * PI, 2048, Method::Yoshida4, 16).unwrap();
        assert!(d.energy_drift() < 1e-10);
        assert_eq!(d.states.len(), 129);
    }
}
