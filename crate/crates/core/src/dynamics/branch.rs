//! Natural-parameter continuation of Lyapunov families in amplitude.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::orbit::OrbitSampler;
use super::shoot::{minimal_period_check, shoot_periodic, ShootOptions, ShootProblem};
use super::{integrate_dense, DynamicsError, PhaseState};
use crate::bifurcation::{BifurcationReport, CandidateLevel, LevelStatus};
use crate::potential::PotentialExpr;
use crate::repgroup::{self, GroupSpec};
use crate::spectral::SpectralData;

pub const DEFAULT_AMPLITUDES: [f64; 5] = [0.1, 0.05, 0.02, 0.01, 0.005];
/// Records with a larger periodicity residual are not accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchOptions {
    /// Strictly decreasing amplitudes.
    pub amplitudes: Vec<f64>,
    pub shoot: ShootOptions,
    /// Approximate number of trajectory points used for the tube radius.
    pub tube_samples: usize,
    pub j_max: u32,
    pub period_tol: f64,
    pub orbit_tol: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            amplitudes: DEFAULT_AMPLITUDES.to_vec(),
            shoot: ShootOptions::default(),
            tube_samples: 256,
            j_max: 6,
            period_tol: 5e-4,
            orbit_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    pub amplitude: f64,
    pub initial: PhaseState,
    pub period: f64,
    pub residual: f64,
    /// `max_t dist(u(t), Γ(u0))`.
    pub tube_radius: f64,
    pub minimal: bool,
    pub energy: f64,
    pub energy_drift: f64,
    pub iterations: usize,
    pub steps: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFailure {
    pub amplitude: f64,
    pub error: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchStatus {
    Complete,
    /// Some amplitudes failed; the rest of the branch is kept.
    Partial,
    Failed,
}

impl std::fmt::Display for BranchStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BranchStatus::Complete => "complete",
            BranchStatus::Partial => "partial",
            BranchStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBranch {
    pub level_index: usize,
    pub level: CandidateLevel,
    pub j0: usize,
    pub beta: f64,
    pub predicted_period: f64,
    pub certified: bool,
    pub direction: Vec<f64>,
    pub records: Vec<BranchRecord>,
    pub failures: Vec<BranchFailure>,
    pub status: BranchStatus,
    /// `|T(a_last) - 2π/β|` for the smallest accepted amplitude.
    pub period_error: Option<f64>,
    pub period_converged: bool,
    pub tube_monotone: bool,
    pub all_minimal: bool,
}

/// One CSV row per record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub amplitude: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub residual: f64,
    pub tube_radius: f64,
    #[serde(rename = "minimal_flag")]
    pub minimal: bool,
    pub energy_drift: f64,
    pub stamp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub level_index: usize,
    pub lambda: f64,
    pub records: usize,
    pub last_period: Option<f64>,
    pub predicted_period: f64,
    pub period_error: Option<f64>,
    pub tube_monotone: bool,
    pub all_minimal: bool,
    pub certified: bool,
    pub status: BranchStatus,
}

impl PeriodicBranch {
    pub fn rows(&self) -> Vec<BranchRow> {
        let stamp = if self.certified { "certified" } else { "uncertified" };
        self.records
            .iter()
            .map(|r| BranchRow {
                amplitude: r.amplitude,
                period: r.period,
                residual: r.residual,
                tube_radius: r.tube_radius,
                minimal: r.minimal,
                energy_drift: r.energy_drift,
                stamp: stamp.into(),
            })
            .collect()
    }

    pub fn summary(&self) -> BranchSummary {
        BranchSummary {
            level_index: self.level_index,
            lambda: self.level.lambda,
            records: self.records.len(),
            last_period: self.records.last().map(|r| r.period),
            predicted_period: self.predicted_period,
            period_error: self.period_error,
            tube_monotone: self.tube_monotone,
            all_minimal: self.all_minimal,
            certified: self.certified,
            status: self.status,
        }
    }
}

/// Unit eigenvector of `∇²U(u0)` for `β_j²`, sign fixed by its largest entry.
pub fn linear_mode_direction(data: &SpectralData, j: usize) -> Option<Vec<f64>> {
    let e = data.frequency_basis(j)?.first()?.clone();
    let (_, big) = e
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1.abs() + 1e-12 { (i, *x) } else { acc });
    let s = if big < 0.0 { -1.0 } else { 1.0 };
    Some(e.iter().map(|x| s * x).collect())
}

/// Shoots at each amplitude in turn, seeding from the previous solution
/// rescaled to the new amplitude and falling back to the linear mode.
#[allow(clippy::too_many_arguments)]
pub fn continue_branch(
    potential: &PotentialExpr,
    group: &GroupSpec,
    u0: &[f64],
    data: &SpectralData,
    level: &CandidateLevel,
    level_index: usize,
    certified: bool,
    opts: &BranchOptions,
) -> Result<PeriodicBranch, DynamicsError> {
    let src = level
        .first_mode()
        .ok_or_else(|| DynamicsError::Input(format!("level {} has no 1/beta source", level.lambda)))?;
    if opts.amplitudes.is_empty() || opts.amplitudes.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(DynamicsError::Input("amplitudes must be nonempty and strictly decreasing".into()));
    }
    let direction = linear_mode_direction(data, src.j)
        .ok_or_else(|| DynamicsError::Input(format!("no frequency with index {}", src.j)))?;
    let slices: Vec<Vec<f64>> = repgroup::orbit_tangent_basis(group, u0, opts.orbit_tol)
        .into_iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    let predicted = 2.0 * PI / src.beta;
    let sampler = OrbitSampler::new(group, u0);
    let linear = |a: f64| PhaseState::at_rest(u0.iter().zip(&direction).map(|(x, e)| x + a * e).collect());

    let mut records: Vec<BranchRecord> = Vec::new();
    let mut failures = Vec::new();
    for &a in &opts.amplitudes {
        let problem = ShootProblem {
            potential,
            u0: u0.to_vec(),
            direction: direction.clone(),
            amplitude: Some(a),
            slices: slices.clone(),
        };
        let mut seeds = Vec::new();
        if let Some(prev) = records.last() {
            let r = a / prev.amplitude;
            let u = prev.initial.u.iter().zip(u0).map(|(x, c)| c + r * (x - c)).collect();
            let v = prev.initial.v.iter().map(|x| r * x).collect();
            seeds.push((PhaseState::new(u, v), prev.period));
        }
        seeds.push((linear(a), predicted));
        let mut outcome = Err(DynamicsError::Input("no seed".into()));
        for (seed, t) in seeds {
            outcome = shoot_periodic(&problem, &seed, t, &opts.shoot);
            if outcome.is_ok() {
                break;
            }
        }
        let sol = match outcome {
            Ok(s) => s,
            Err(e) => {
                failures.push(BranchFailure {
                    amplitude: a,
                    error: e.to_string(),
                });
                continue;
            }
        };
        let stride = (sol.steps / opts.tube_samples.max(1)).max(1);
        let traj = integrate_dense(potential, &sol.state, sol.period, sol.steps, opts.shoot.flow.method, stride)?;
        let tube_radius = traj.states.iter().map(|s| sampler.distance(&s.u)).fold(0.0, f64::max);
        let minimal = minimal_period_check(potential, &sol.state, sol.period, opts.j_max, &opts.shoot.flow)?;
        records.push(BranchRecord {
            amplitude: a,
            initial: sol.state.clone(),
            period: sol.period,
            residual: sol.residual,
            tube_radius,
            minimal: minimal.minimal,
            energy: traj.energies[0],
            energy_drift: traj.energy_drift(),
            iterations: sol.iterations,
            steps: sol.steps,
            accepted: sol.residual <= ACCEPT_RESIDUAL,
        });
    }
    let status = if records.is_empty() {
        BranchStatus::Failed
    } else if failures.is_empty() {
        BranchStatus::Complete
    } else {
        BranchStatus::Partial
    };
    let period_error = records.last().map(|r| (r.period - predicted).abs());
    Ok(PeriodicBranch {
        level_index,
        level: level.clone(),
        j0: src.j,
        beta: src.beta,
        predicted_period: predicted,
        certified,
        direction,
        period_converged: period_error.is_some_and(|e| e < opts.period_tol),
        tube_monotone: records.windows(2).all(|w| w[1].tube_radius < w[0].tube_radius),
        all_minimal: records.iter().all(|r| r.minimal),
        period_error,
        records,
        failures,
        status,
    })
}

/// Runs `continue_branch` for the given level indices of a report and adds a
/// summary of each branch to `report.confirmations`. Levels that are not
/// certified are refused unless `force` is set.
pub fn confirm_levels(
    report: &mut BifurcationReport,
    potential: &PotentialExpr,
    group: &GroupSpec,
    indices: &[usize],
    force: bool,
    opts: &BranchOptions,
) -> Result<Vec<PeriodicBranch>, DynamicsError> {
    let mut out = Vec::new();
    for &i in indices {
        let rec = report
            .levels
            .get(i)
            .ok_or_else(|| DynamicsError::Input(format!("unknown level {i} ({} levels available)", report.levels.len())))?;
        let certified = rec.status == LevelStatus::Certified;
        if !certified && !force {
            return Err(DynamicsError::Input(format!(
                "level {i} is {}; use force to run it anyway",
                rec.status.label()
            )));
        }
        let branch = continue_branch(potential, group, &report.u0, &report.spectral, &rec.level, i, certified, opts)?;
        report.confirmations.push(branch.summary());
        out.push(branch);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bifurcation::{analyze, AnalysisConfig};
    use crate::potential::catalog_entry;

    #[test]
    fn ring3d_vertical_branch_is_linear() {
        let e = catalog_entry("ring3d").unwrap();
        let mut r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        let opts = BranchOptions {
            amplitudes: vec![0.05, 0.01],
            ..BranchOptions::default()
        };
        let b = confirm_levels(&mut r, &e.potential, &e.group, &[1], false, &opts).unwrap().remove(0);
        assert_eq!(b.status, BranchStatus::Complete);
        for rec in &b.records {
            assert!((rec.period - 2.0 * PI).abs() < 1e-6);
            assert!(rec.minimal && rec.accepted);
        }
        assert!(b.tube_monotone);
        assert_eq!(r.confirmations.len(), 1);
        assert_eq!(b.rows()[0].stamp, "certified");
    }

    #[test]
    fn uncertified_needs_force() {
        let e = catalog_entry("ring3d").unwrap();
        let mut r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        let opts = BranchOptions::default();
        assert!(confirm_levels(&mut r, &e.potential, &e.group, &[2], false, &opts).is_err());
        assert!(confirm_levels(&mut r, &e.potential, &e.group, &[99], true, &opts).is_err());
    }

    #[test]
    fn bad_amplitudes() {
        let e = catalog_entry("ring3d").unwrap();
        let r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        let opts = BranchOptions {
            amplitudes: vec![0.01, 0.02],
            ..BranchOptions::default()
        };
        assert!(continue_branch(&e.potential, &e.group, &e.u0, &r.spectral, &r.levels[0].level, 0, true, &opts).is_err());
    }
}
