//! Hessian spectrum at the critical point, the frequency set, the spectrum of
//! the action functional on Fourier modes, and Morse index bookkeeping.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::potential::{PotentialError, PotentialExpr};

pub const SYMMETRY_TOL: f64 = 1e-10;
pub const CLUSTER_GAP: f64 = 1e-6;
/// Relative tolerance for `λ` being on a level `k/β`.
pub const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (defect {defect:.3e})")]
    NotSymmetric { defect: f64 },
    #[error("lambda = {lambda} must be positive and finite")]
    BadLambda { lambda: f64 },
    #[error("lambda = {lambda} is within tolerance of the level {k}/{beta}")]
    NearLevel { lambda: f64, k: u32, beta: f64 },
    #[error("frequency index {index} out of range ({available} frequencies)")]
    NoSuchFrequency { index: usize, available: usize },
    #[error("[{lo}, {hi}] contains the other level {k}/{beta}")]
    EpsilonTooLarge { lo: f64, hi: f64, k: u32, beta: f64 },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

/// A cluster of numerically equal Hessian eigenvalues with an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub alpha: f64,
    pub multiplicity: usize,
    #[serde(skip)]
    pub basis: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    pub beta: f64,
    pub alpha: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub n: usize,
    /// Clusters sorted by increasing `alpha`; the kernel, if any, is one cluster with `alpha = 0`.
    pub clusters: Vec<EigenCluster>,
    pub kernel_dim: usize,
    /// `β = √α` for positive clusters, strictly decreasing.
    pub frequencies: Vec<Frequency>,
    pub tol: f64,
}

impl SpectralData {
    pub fn beta1(&self) -> Option<f64> {
        self.frequencies.first().map(|f| f.beta)
    }

    pub fn kernel_basis(&self) -> Vec<DVector<f64>> {
        self.clusters
            .iter()
            .filter(|c| c.alpha == 0.0)
            .flat_map(|c| c.basis.iter().cloned())
            .collect()
    }

    /// Eigenbasis of the cluster belonging to frequency `j`.
    pub fn frequency_basis(&self, j: usize) -> Option<&[DVector<f64>]> {
        let f = self.frequencies.get(j)?;
        self.clusters
            .iter()
            .find(|c| c.alpha == f.alpha)
            .map(|c| c.basis.as_slice())
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let neg = self.clusters.iter().filter(|c| c.alpha < 0.0).map(|c| c.multiplicity).sum();
        let pos = self.clusters.iter().filter(|c| c.alpha > 0.0).map(|c| c.multiplicity).sum();
        (neg, self.kernel_dim, pos)
    }
}

/// Default zero threshold: `1e-8 · max(spectral radius, 1)`.
pub fn default_tol(hessian: &DMatrix<f64>) -> f64 {
    let eig = linalg::sorted_symmetric_eigen(hessian);
    let rho = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    1e-8 * rho.max(1.0)
}

pub fn spectral_data(hessian: &DMatrix<f64>, tol: Option<f64>) -> Result<SpectralData, SpectralError> {
    if !hessian.is_square() {
        return Err(SpectralError::NotSquare {
            rows: hessian.nrows(),
            cols: hessian.ncols(),
        });
    }
    let n = hessian.nrows();
    let defect = linalg::max_abs_diff(hessian, &hessian.transpose());
    if defect > SYMMETRY_TOL * hessian.amax().max(1.0) {
        return Err(SpectralError::NotSymmetric { defect });
    }
    let sym = (hessian + hessian.transpose()) * 0.5;
    let eig = linalg::sorted_symmetric_eigen(&sym);
    let rho = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = tol.unwrap_or(1e-8 * rho.max(1.0));
    let gap = CLUSTER_GAP * rho.max(1.0);

    let mut clusters: Vec<EigenCluster> = Vec::new();
    let mut kernel = EigenCluster {
        alpha: 0.0,
        multiplicity: 0,
        basis: Vec::new(),
    };
    let mut pending: Vec<(f64, DVector<f64>)> = Vec::new();
    let flush = |pending: &mut Vec<(f64, DVector<f64>)>, clusters: &mut Vec<EigenCluster>| {
        if pending.is_empty() {
            return;
        }
        let mean = pending.iter().map(|p| p.0).sum::<f64>() / pending.len() as f64;
        clusters.push(EigenCluster {
            alpha: mean,
            multiplicity: pending.len(),
            basis: pending.drain(..).map(|p| p.1).collect(),
        });
    };
    for (v, vec) in eig.values.iter().zip(eig.vectors) {
        if v.abs() < tol {
            flush(&mut pending, &mut clusters);
            kernel.multiplicity += 1;
            kernel.basis.push(vec);
            continue;
        }
        if let Some(last) = pending.last() {
            if v - last.0 > gap {
                flush(&mut pending, &mut clusters);
            }
        }
        pending.push((*v, vec));
    }
    flush(&mut pending, &mut clusters);
    let kernel_dim = kernel.multiplicity;
    if kernel_dim > 0 {
        clusters.push(kernel);
    }
    clusters.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let frequencies = clusters
        .iter()
        .rev()
        .filter(|c| c.alpha > 0.0)
        .map(|c| Frequency {
            beta: c.alpha.sqrt(),
            alpha: c.alpha,
            multiplicity: c.multiplicity,
        })
        .collect();
    Ok(SpectralData {
        n,
        clusters,
        kernel_dim,
        frequencies,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Verdict {
    pub kernel_dim: usize,
    pub orbit_dim: usize,
    pub kernel_matches_orbit: bool,
    pub positive_spectrum: bool,
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

/// Non-degeneracy of the orbit and existence of a positive Hessian eigenvalue.
pub fn check_hypotheses_thm1(data: &SpectralData, orbit_dim: usize) -> Thm1Verdict {
    let kernel_matches_orbit = data.kernel_dim == orbit_dim;
    let positive_spectrum = !data.frequencies.is_empty();
    let mut diagnostics = Vec::new();
    if !kernel_matches_orbit {
        diagnostics.push(format!(
            "dim ker Hessian = {} but dim orbit = {}{}",
            data.kernel_dim,
            orbit_dim,
            if data.kernel_dim > orbit_dim {
                ": degenerate orbit, try the minimum route"
            } else {
                ""
            }
        ));
    }
    if !positive_spectrum {
        diagnostics.push("the Hessian has no positive eigenvalue".into());
    }
    Thm1Verdict {
        kernel_dim: data.kernel_dim,
        orbit_dim,
        kernel_matches_orbit,
        positive_spectrum,
        passed: kernel_matches_orbit && positive_spectrum,
        diagnostics,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationProbe {
    pub passed: bool,
    pub qualifier: String,
    pub r_min: f64,
    pub r_max: f64,
    pub shells: usize,
    pub directions: usize,
    pub threshold: f64,
    /// Smallest `∇U(u0 + ρe)·e` seen over all probes.
    pub min_radial_derivative: f64,
    /// `(ρ, direction)` attaining the minimum when the probe fails.
    pub worst: Option<(f64, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm2Verdict {
    pub positive_semidefinite: bool,
    pub min_eigenvalue: f64,
    pub positive_spectrum: bool,
    pub isolation: IsolationProbe,
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub r_min: f64,
    pub r_max: f64,
    pub shells: usize,
    pub random_directions: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 0.2,
            shells: 24,
            random_directions: 16,
            threshold: 1e-12,
            seed: 0x15a1,
        }
    }
}

/// The orbit is a minimum and is isolated among critical points. The second
/// part is probed along rays `u0 + ρe`, `e ⟂ T_{u0}Γ(u0)`: the gradient must
/// push outward, `∇U·e > threshold`. The verdict is probed, not proven.
pub fn check_hypotheses_thm2(
    potential: &PotentialExpr,
    u0: &[f64],
    data: &SpectralData,
    tangent: &[DVector<f64>],
    opts: &ProbeOptions,
) -> Thm2Verdict {
    let n = data.n;
    let min_eigenvalue = data.clusters.first().map_or(0.0, |c| c.alpha);
    let positive_semidefinite = data.clusters.iter().all(|c| c.alpha >= 0.0);
    let positive_spectrum = !data.frequencies.is_empty();
    let mut diagnostics = Vec::new();
    if !positive_semidefinite {
        diagnostics.push(format!(
            "Hessian has negative eigenvalue {min_eigenvalue:.6e}: not a minimum"
        ));
    }
    if !positive_spectrum {
        diagnostics.push("the Hessian has no positive eigenvalue".into());
    }

    let identity: Vec<DVector<f64>> = (0..n)
        .map(|i| {
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            v
        })
        .collect();
    let normal = linalg::complement_within(&identity, tangent, 1e-10);
    let mut directions: Vec<DVector<f64>> = Vec::new();
    for b in &normal {
        directions.push(b.clone());
        directions.push(-b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    if !normal.is_empty() {
        for _ in 0..opts.random_directions {
            let mut v = DVector::zeros(n);
            for b in &normal {
                v += b * rng.gen_range(-1.0..1.0);
            }
            let norm = v.norm();
            if norm > 1e-6 {
                directions.push(v / norm);
            }
        }
    }
    let shells = opts.shells.max(2);
    let ratio = (opts.r_max / opts.r_min).powf(1.0 / (shells - 1) as f64);
    let mut min_d = f64::INFINITY;
    let mut worst = None;
    let mut failed_eval = None;
    let mut grad = vec![0.0; n];
    for e in &directions {
        let mut rho = opts.r_min;
        for _ in 0..shells {
            let u: Vec<f64> = u0.iter().zip(e.iter()).map(|(a, b)| a + rho * b).collect();
            match potential.gradient_into(&u, &mut grad) {
                Ok(_) => {
                    let d: f64 = grad.iter().zip(e.iter()).map(|(g, x)| g * x).sum();
                    if d < min_d {
                        min_d = d;
                        worst = Some((rho, e.iter().copied().collect::<Vec<_>>()));
                    }
                }
                Err(err) => {
                    failed_eval.get_or_insert(err.to_string());
                    min_d = f64::NEG_INFINITY;
                }
            }
            rho *= ratio;
        }
    }
    if directions.is_empty() {
        min_d = f64::INFINITY;
    }
    let iso_passed = min_d > opts.threshold && failed_eval.is_none();
    if let Some(e) = &failed_eval {
        diagnostics.push(format!("isolation probe could not evaluate the gradient: {e}"));
    } else if !iso_passed {
        diagnostics.push(format!(
            "isolation probe: radial derivative {min_d:.3e} <= {:.1e}; another critical point is nearby",
            opts.threshold
        ));
    }
    let isolation = IsolationProbe {
        passed: iso_passed,
        qualifier: "probed, not proven".into(),
        r_min: opts.r_min,
        r_max: opts.r_max,
        shells,
        directions: directions.len(),
        threshold: opts.threshold,
        min_radial_derivative: min_d,
        worst: if iso_passed { None } else { worst },
    };
    Thm2Verdict {
        positive_semidefinite,
        min_eigenvalue,
        positive_spectrum,
        passed: positive_semidefinite && positive_spectrum && iso_passed,
        isolation,
        diagnostics,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeValue {
    pub value: f64,
    pub multiplicity: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEntry {
    pub k: u32,
    pub values: Vec<ModeValue>,
}

/// Spectrum of the action Hessian restricted to `H_0 ⊕ … ⊕ H_{k_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub lambda: f64,
    pub entries: Vec<ModeEntry>,
}

impl ModeSpectrum {
    /// All eigenvalues with multiplicity, sorted ascending.
    pub fn multiset(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| {
                e.values
                    .iter()
                    .flat_map(|v| std::iter::repeat_n(v.value, v.multiplicity))
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn mode_value(k: u32, lambda: f64, alpha: f64) -> f64 {
    let k2 = (k as f64) * (k as f64);
    (k2 - lambda * lambda * alpha) / (k2 + 1.0)
}

pub fn mode_spectrum(data: &SpectralData, lambda: f64, k_max: u32) -> ModeSpectrum {
    let entries = (0..=k_max)
        .map(|k| ModeEntry {
            k,
            values: data
                .clusters
                .iter()
                .map(|c| ModeValue {
                    value: mode_value(k, lambda, c.alpha),
                    multiplicity: if k == 0 { c.multiplicity } else { 2 * c.multiplicity },
                    alpha: c.alpha,
                })
                .collect(),
        })
        .collect();
    ModeSpectrum { lambda, entries }
}

/// `⌈2λβ₁⌉ + 2`.
pub fn default_k_max(data: &SpectralData, lambda: f64) -> u32 {
    (2.0 * lambda * data.beta1().unwrap_or(0.0)).ceil() as u32 + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveModeDims {
    pub lambda: f64,
    /// `dim H_k⁺` for `k = 0..=k_max`, positive eigenspace of the action Hessian.
    pub dims: Vec<usize>,
    /// From this mode on every block is positive definite (`dim H_k⁺ = 2n`).
    pub k_star: u32,
}

/// Rejects `λ` within tolerance of some `k/β`.
pub fn check_off_levels(data: &SpectralData, lambda: f64) -> Result<(), SpectralError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SpectralError::BadLambda { lambda });
    }
    for f in &data.frequencies {
        let k = (lambda * f.beta).round();
        if k >= 1.0 {
            let level = k / f.beta;
            if (lambda - level).abs() <= LEVEL_TOL * level.max(1.0) {
                return Err(SpectralError::NearLevel {
                    lambda,
                    k: k as u32,
                    beta: f.beta,
                });
            }
        }
    }
    Ok(())
}

pub fn k_star(data: &SpectralData, lambda: f64) -> u32 {
    (lambda * data.beta1().unwrap_or(0.0)).floor() as u32 + 1
}

pub fn positive_mode_dims(
    data: &SpectralData,
    lambda: f64,
    k_max: Option<u32>,
) -> Result<PositiveModeDims, SpectralError> {
    check_off_levels(data, lambda)?;
    let k_max = k_max.unwrap_or_else(|| default_k_max(data, lambda));
    let dims = (0..=k_max)
        .map(|k| {
            data.clusters
                .iter()
                .filter(|c| {
                    if k == 0 {
                        c.alpha < 0.0
                    } else {
                        mode_value(k, lambda, c.alpha) > 0.0
                    }
                })
                .map(|c| if k == 0 { c.multiplicity } else { 2 * c.multiplicity })
                .sum()
        })
        .collect();
    Ok(PositiveModeDims {
        lambda,
        dims,
        k_star: k_star(data, lambda),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseJump {
    /// `m⁻(-∇²Φ|H_1)` at `λ0 - ε`.
    pub below: usize,
    /// `m⁻(-∇²Φ|H_1)` at `λ0 + ε`.
    pub above: usize,
}

impl MorseJump {
    pub fn jump(&self) -> usize {
        self.below.abs_diff(self.above)
    }
}

/// Largest `k/β` strictly inside `(lo, hi)` other than `k = 1, β = beta0`.
fn other_level_in(data: &SpectralData, lo: f64, hi: f64, j0: usize) -> Option<(u32, f64)> {
    for (j, f) in data.frequencies.iter().enumerate() {
        let k_lo = (lo * f.beta).floor().max(1.0) as u32;
        let k_hi = (hi * f.beta).ceil() as u32;
        for k in k_lo..=k_hi {
            if j == j0 && k == 1 {
                continue;
            }
            let level = k as f64 / f.beta;
            if level >= lo && level <= hi {
                return Some((k, f.beta));
            }
        }
    }
    None
}

fn h1_negative_index(data: &SpectralData, lambda: f64) -> usize {
    data.clusters
        .iter()
        .filter(|c| mode_value(1, lambda, c.alpha) > 0.0)
        .map(|c| 2 * c.multiplicity)
        .sum()
}

/// Morse indices of `-∇²Φ` on the first Fourier mode on both sides of `1/β_{j0}`.
pub fn morse_jump_h1(data: &SpectralData, j0: usize, eps: f64) -> Result<MorseJump, SpectralError> {
    let f = data.frequencies.get(j0).ok_or(SpectralError::NoSuchFrequency {
        index: j0,
        available: data.frequencies.len(),
    })?;
    let l0 = 1.0 / f.beta;
    let (lo, hi) = (l0 - eps, l0 + eps);
    if !(eps > 0.0 && lo > 0.0) {
        return Err(SpectralError::BadLambda { lambda: lo });
    }
    if let Some((k, beta)) = other_level_in(data, lo, hi, j0) {
        return Err(SpectralError::EpsilonTooLarge { lo, hi, k, beta });
    }
    Ok(MorseJump {
        below: h1_negative_index(data, lo),
        above: h1_negative_index(data, hi),
    })
}

/// Orthonormal basis functions of `H_0 ⊕ … ⊕ H_{k_max}` in the `H¹` inner
/// product `∫ u̇·v̇ + u·v`, as (coordinate, mode, is_sine).
fn basis_functions(n: usize, k_max: u32) -> Vec<(usize, u32, bool)> {
    let mut out = Vec::new();
    for i in 0..n {
        out.push((i, 0, false));
    }
    for k in 1..=k_max {
        for i in 0..n {
            out.push((i, k, false));
            out.push((i, k, true));
        }
    }
    out
}

fn eval_basis(k: u32, sine: bool, t: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0 / (2.0 * PI).sqrt(), 0.0);
    }
    let kf = k as f64;
    let c = 1.0 / (PI * (kf * kf + 1.0)).sqrt();
    let (s, co) = (kf * t).sin_cos();
    if sine {
        (c * s, c * kf * co)
    } else {
        (c * co, -c * kf * s)
    }
}

/// Matrix of the second variation of `Φ(u, λ) = ∫ ½|u̇|² - λ²U(u)` at the
/// constant loop `u0`, in an `H¹`-orthonormal Fourier basis. Entries are
/// integrated by the trapezoid rule on `quad_points` nodes, which is exact for
/// trigonometric integrands of degree below `quad_points`.
pub fn discrete_action_hessian(
    potential: &PotentialExpr,
    u0: &[f64],
    lambda: f64,
    k_max: u32,
    quad_points: Option<usize>,
) -> Result<DMatrix<f64>, SpectralError> {
    let n = potential.dim();
    let hess = potential.hessian(u0)?;
    let funcs = basis_functions(n, k_max);
    let dim = funcs.len();
    let q = quad_points.unwrap_or(4 * k_max as usize + 16).max(2 * k_max as usize + 2);
    let w = 2.0 * PI / q as f64;
    let l2 = lambda * lambda;
    let mut m = DMatrix::zeros(dim, dim);
    let mut vals = vec![(0.0, 0.0); dim];
    for s in 0..q {
        let t = w * s as f64;
        for (a, &(_, k, sine)) in funcs.iter().enumerate() {
            vals[a] = eval_basis(k, sine, t);
        }
        for a in 0..dim {
            let (ia, _, _) = funcs[a];
            for b in a..dim {
                let (ib, _, _) = funcs[b];
                let kinetic = if ia == ib { vals[a].1 * vals[b].1 } else { 0.0 };
                let pot = l2 * hess[(ia, ib)] * vals[a].0 * vals[b].0;
                m[(a, b)] += w * (kinetic - pot);
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            m[(a, b)] = m[(b, a)];
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{catalog_entry, parse_potential};

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn ring3d_spectral_data() {
        let e = catalog_entry("ring3d").unwrap();
        let d = spectral_data(&e.potential.hessian(&e.u0).unwrap(), None).unwrap();
        assert_eq!(d.kernel_dim, 1);
        assert_eq!(d.frequencies.len(), 2);
        assert!((d.frequencies[0].beta - 2f64.sqrt()).abs() < 1e-14);
        assert!((d.frequencies[1].beta - 1.0).abs() < 1e-14);
        assert!(d.frequencies.iter().all(|f| f.multiplicity == 1));
        assert_eq!(d.clusters.iter().map(|c| c.multiplicity).sum::<usize>(), 3);
    }

    #[test]
    fn identity_and_negative_identity() {
        let d = spectral_data(&DMatrix::identity(3, 3), None).unwrap();
        assert_eq!((d.kernel_dim, d.frequencies.len(), d.frequencies[0].multiplicity), (0, 1, 3));
        let d = spectral_data(&-DMatrix::<f64>::identity(3, 3), None).unwrap();
        assert!(d.frequencies.is_empty());
        assert_eq!(d.kernel_dim, 0);
        assert!(!check_hypotheses_thm1(&d, 0).passed);
        assert!(matches!(
            spectral_data(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), None),
            Err(SpectralError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn thm1_routing() {
        let d = spectral_data(&diag(&[2.0, 0.0, 1.0]), None).unwrap();
        assert!(check_hypotheses_thm1(&d, 1).passed);
        let d2 = spectral_data(&diag(&[2.0, 0.0, 0.0]), None).unwrap();
        let v = check_hypotheses_thm1(&d2, 1);
        assert!(!v.passed && !v.kernel_matches_orbit && v.positive_spectrum);
    }

    fn tangent_of(e: &crate::potential::CatalogEntry) -> Vec<DVector<f64>> {
        crate::repgroup::orbit_tangent_basis(&e.group, &e.u0, 1e-8)
    }

    #[test]
    fn thm2_probe_examples() {
        let opts = ProbeOptions::default();
        for name in ["ring3d", "ring_quartic4"] {
            let e = catalog_entry(name).unwrap();
            let d = spectral_data(&e.potential.hessian(&e.u0).unwrap(), None).unwrap();
            let v = check_hypotheses_thm2(&e.potential, &e.u0, &d, &tangent_of(&e), &opts);
            assert!(v.passed, "{name}: {:?}", v.diagnostics);
            assert_eq!(v.isolation.qualifier, "probed, not proven");
        }
        let e = catalog_entry("double_ring2").unwrap();
        let d = spectral_data(&e.potential.hessian(&e.u0).unwrap(), None).unwrap();
        let v = check_hypotheses_thm2(&e.potential, &e.u0, &d, &tangent_of(&e), &opts);
        assert!(v.positive_semidefinite && !v.isolation.passed && !v.passed);

        let saddle = parse_potential("u1^2 - u2^2", 2).unwrap();
        let d = spectral_data(&saddle.hessian(&[0.0, 0.0]).unwrap(), None).unwrap();
        let v = check_hypotheses_thm2(&saddle, &[0.0, 0.0], &d, &[], &opts);
        assert!(!v.positive_semidefinite && !v.passed);
    }

    #[test]
    fn mode_values() {
        assert_eq!(mode_value(2, 1.0, 4.0), 0.0);
        assert!((mode_value(0, 0.7, 3.0) + 0.7 * 0.7 * 3.0).abs() < 1e-15);
        assert_eq!(mode_value(1, 0.5, 1.0), 0.375);
    }

    #[test]
    fn positive_dims_examples() {
        let d = spectral_data(&diag(&[1.0]), None).unwrap();
        assert_eq!(positive_mode_dims(&d, 0.5, Some(3)).unwrap().dims, vec![0, 2, 2, 2]);
        assert_eq!(positive_mode_dims(&d, 1.5, Some(3)).unwrap().dims, vec![0, 0, 2, 2]);
        let p = positive_mode_dims(&d, 1.5, None).unwrap();
        assert_eq!(p.k_star, 2);
        assert!(p.dims[p.k_star as usize..].iter().all(|&x| x == 2));
        assert!(matches!(
            positive_mode_dims(&d, 2.0, None),
            Err(SpectralError::NearLevel { k: 2, .. })
        ));
    }

    #[test]
    fn morse_jump_examples() {
        let d = spectral_data(&diag(&[1.0]), None).unwrap();
        assert_eq!(morse_jump_h1(&d, 0, 0.1).unwrap().jump(), 2);
        let d = spectral_data(&diag(&[2.0, 0.0, 1.0]), None).unwrap();
        let m = morse_jump_h1(&d, 0, 0.1).unwrap();
        assert_eq!((m.below, m.above), (6, 4));
        let d2 = spectral_data(&diag(&[4.0, 4.0, 1.0]), None).unwrap();
        assert_eq!(morse_jump_h1(&d2, 0, 0.1).unwrap().jump(), 4);
        assert!(matches!(
            morse_jump_h1(&d2, 1, 0.6),
            Err(SpectralError::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn quadrature_hessian_matches_closed_form() {
        let e = catalog_entry("ring3d").unwrap();
        let m = discrete_action_hessian(&e.potential, &e.u0, 1.0, 3, None).unwrap();
        assert_eq!(m.nrows(), 21);
        let mut ev: Vec<f64> = linalg::sorted_symmetric_eigen(&m).values;
        ev.sort_by(f64::total_cmp);
        let d = spectral_data(&e.potential.hessian(&e.u0).unwrap(), None).unwrap();
        let expected = mode_spectrum(&d, 1.0, 3).multiset();
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn quadrature_shows_resonance_kernel() {
        let p = parse_potential("u1^2/2", 1).unwrap();
        let m = discrete_action_hessian(&p, &[0.0], 1.0, 1, None).unwrap();
        let ev = linalg::sorted_symmetric_eigen(&m).values;
        assert_eq!(ev.iter().filter(|v| v.abs() < 1e-12).count(), 2);
        let small = discrete_action_hessian(&p, &[0.0], 1e-3, 4, None).unwrap();
        let block = small.view((1, 1), (8, 8)).into_owned();
        assert!(linalg::sorted_symmetric_eigen(&block).values[0] > 0.0);
    }
}
