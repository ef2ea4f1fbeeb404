//! Candidate levels, Conley index descriptors on both sides of a level, and
//! the index-change certificate, assembled into a full analysis report.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::BranchSummary;
use crate::linalg;
use crate::potential::{PotentialError, PotentialExpr};
use crate::repgroup::{
    self, GroupSpec, HKind, IsotypicalDecomposition, RepError, StabilizerClaim, StabilizerVerdict,
};
use crate::spectral::{
    self, check_hypotheses_thm1, check_hypotheses_thm2, ProbeOptions, SpectralData, SpectralError,
    Thm1Verdict, Thm2Verdict,
};
use crate::topology::{cohom_dim_quotient, indices_distinct, CohomDim, TopologyError};

/// Ratios within this of an integer count as integers.
pub const RATIO_TOL: f64 = 1e-9;
/// Ratios within this of an integer (but not within `RATIO_TOL`) are flagged.
pub const SUSPECT_TOL: f64 = 1e-6;
pub const EPS_FLOOR: f64 = 1e-6;
const LEVEL_MERGE_TOL: f64 = 1e-9;
const COMMUTE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BifurcationError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Representation(#[from] RepError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("stabilizer action does not commute with the Hessian (defect {defect:.3e})")]
    NotInvariant { defect: f64 },
    #[error("level {lambda} is not in the nonresonant set")]
    NotNonresonant { lambda: f64 },
    #[error("levels are too crowded near {lambda}: eps = {eps:.3e} is below {floor:.1e}")]
    Crowded { lambda: f64, eps: f64, floor: f64 },
    #[error("{0}")]
    Input(String),
}

/// `λ = k/β_j`, with `j` indexing the frequency list (largest first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSource {
    pub k: u32,
    pub j: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLevel {
    pub lambda: f64,
    pub sources: Vec<LevelSource>,
    /// No two frequencies produce this level.
    pub nonresonant: bool,
    /// `λ = 1/β_{j0}` and `β_j/β_{j0}` is never an integer.
    pub in_lambda0: bool,
    /// Some frequency ratio is within `SUSPECT_TOL` of an integer without being one.
    pub resonance_suspect: bool,
}

impl CandidateLevel {
    /// The frequency `j0` with `λ = 1/β_{j0}`, if any.
    pub fn first_mode(&self) -> Option<LevelSource> {
        self.sources.iter().copied().find(|s| s.k == 1)
    }

    pub fn describe_sources(&self) -> String {
        self.sources
            .iter()
            .map(|s| format!("{}/{:.6}", s.k, s.beta))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn ratio_status(r: f64) -> (bool, bool) {
    let d = (r - r.round()).abs();
    let integral = r.round() >= 1.0 && d <= RATIO_TOL * r.max(1.0);
    let suspect = !integral && r.round() >= 1.0 && d <= SUSPECT_TOL * r.max(1.0);
    (integral, suspect)
}

fn finish_level(lambda: f64, sources: Vec<LevelSource>, betas: &[f64]) -> CandidateLevel {
    let mut distinct: Vec<usize> = sources.iter().map(|s| s.j).collect();
    distinct.dedup();
    let nonresonant = distinct.len() == 1;
    let first = sources.iter().find(|s| s.k == 1).copied();
    let mut suspect = false;
    if let Some(s) = first {
        for (j, b) in betas.iter().enumerate() {
            if j != s.j {
                suspect |= ratio_status(b / s.beta).1;
            }
        }
    }
    CandidateLevel {
        lambda,
        in_lambda0: nonresonant && first.is_some(),
        nonresonant,
        resonance_suspect: suspect,
        sources,
    }
}

/// All `k/β_j ≤ λ_max`, sorted, with coinciding levels merged.
pub fn candidate_levels(betas: &[f64], lambda_max: f64) -> Vec<CandidateLevel> {
    let mut raw: Vec<(f64, LevelSource)> = Vec::new();
    for (j, &beta) in betas.iter().enumerate() {
        if !(beta > 0.0) {
            continue;
        }
        let mut k = 1u32;
        loop {
            let l = k as f64 / beta;
            if l > lambda_max * (1.0 + LEVEL_MERGE_TOL) {
                break;
            }
            raw.push((l, LevelSource { k, j, beta }));
            k += 1;
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.j.cmp(&b.1.j)));
    let mut out: Vec<CandidateLevel> = Vec::new();
    let mut group: Vec<(f64, LevelSource)> = Vec::new();
    let close = |a: f64, b: f64| (a - b).abs() <= LEVEL_MERGE_TOL * a.max(1.0);
    for item in raw {
        if let Some(first) = group.first() {
            if !close(first.0, item.0) {
                let lambda = representative(&group);
                out.push(finish_level(lambda, group.drain(..).map(|g| g.1).collect(), betas));
            }
        }
        group.push(item);
    }
    if !group.is_empty() {
        let lambda = representative(&group);
        out.push(finish_level(lambda, group.drain(..).map(|g| g.1).collect(), betas));
    }
    for l in &mut out {
        l.sources.sort_by_key(|s| (s.j, s.k));
    }
    out
}

fn representative(group: &[(f64, LevelSource)]) -> f64 {
    // prefer the k = 1 expression, then the smallest k
    group
        .iter()
        .min_by_key(|g| g.1.k)
        .map(|g| g.0)
        .expect("nonempty group")
}

/// The nonresonant levels `1/β_{j0}` with `β_j/β_{j0} ∉ N` for all `j ≠ j0`.
pub fn nonresonant_levels(betas: &[f64]) -> Vec<CandidateLevel> {
    let mut out = Vec::new();
    for (j0, &b0) in betas.iter().enumerate() {
        let mut sources = vec![LevelSource { k: 1, j: j0, beta: b0 }];
        for (j, &b) in betas.iter().enumerate() {
            if j == j0 {
                continue;
            }
            let r = b / b0;
            if ratio_status(r).0 {
                sources.push(LevelSource {
                    k: r.round() as u32,
                    j,
                    beta: b,
                });
            }
        }
        sources.sort_by_key(|s| (s.j, s.k));
        let level = finish_level(1.0 / b0, sources, betas);
        if level.in_lambda0 {
            out.push(level);
        }
    }
    out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptorParts {
    /// From `T⊥Γ(u0)`: Hessian eigenvalues `α > 0`.
    pub transverse: usize,
    /// `ker ∇²U(u0) ∩ T⊥Γ(u0)` (degenerate route only).
    pub kernel: usize,
    /// `(k, dim)` for Fourier modes with `k² < λ²α`.
    pub modes: Vec<(u32, usize)>,
}

/// Positive eigenspace `V⁺` of `-∇²Ψ` at `λ`, as an `H`-representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConleyDescriptor {
    pub lambda: f64,
    pub kind: HKind,
    pub vplus: IsotypicalDecomposition,
    pub total_dim: usize,
    pub cd: CohomDim,
    pub parts: DescriptorParts,
}

#[derive(Debug, Clone)]
struct ClusterRep {
    alpha: f64,
    rep: IsotypicalDecomposition,
}

/// Per-eigenspace `H`-representations, computed once per critical orbit.
#[derive(Debug, Clone)]
pub struct DescriptorContext {
    pub kind: HKind,
    pub degenerate: bool,
    pub data: SpectralData,
    clusters: Vec<ClusterRep>,
    kernel_transverse: IsotypicalDecomposition,
}

impl DescriptorContext {
    pub fn new(
        hessian: &DMatrix<f64>,
        data: &SpectralData,
        claim: &StabilizerClaim,
        tangent: &[DVector<f64>],
        degenerate: bool,
    ) -> Result<Self, BifurcationError> {
        if claim.dim() != data.n {
            return Err(BifurcationError::Input(format!(
                "stabilizer acts on R^{} but the Hessian is {}x{}",
                claim.dim(),
                data.n,
                data.n
            )));
        }
        let defect = claim.commutator_defect(hessian);
        if defect > COMMUTE_TOL * hessian.amax().max(1.0) {
            return Err(BifurcationError::NotInvariant { defect });
        }
        let op = claim.operator();
        let mut clusters = Vec::new();
        for c in data.clusters.iter().filter(|c| c.alpha > 0.0) {
            let d = linalg::invariance_defect(op, &c.basis);
            if d > COMMUTE_TOL * op.amax().max(1.0) {
                return Err(BifurcationError::NotInvariant { defect: d });
            }
            clusters.push(ClusterRep {
                alpha: c.alpha,
                rep: claim.decompose_on(&c.basis)?,
            });
        }
        let kernel = data.kernel_basis();
        let n_basis = linalg::complement_within(&kernel, tangent, 1e-10);
        let kernel_transverse = if n_basis.is_empty() {
            IsotypicalDecomposition::trivial(claim.kind(), 0)
        } else {
            let d = linalg::invariance_defect(op, &n_basis);
            if d > COMMUTE_TOL * op.amax().max(1.0) {
                return Err(BifurcationError::NotInvariant { defect: d });
            }
            claim.decompose_on(&n_basis)?
        };
        Ok(Self {
            kind: claim.kind(),
            degenerate,
            data: data.clone(),
            clusters,
            kernel_transverse,
        })
    }

    pub fn kernel_transverse_dim(&self) -> usize {
        self.kernel_transverse.dim()
    }
}

/// Assembles `V⁺ = T⊥⁺ ⊕ (N) ⊕ ⊕_k H_k⁺` at a parameter `λ ∉ Λ`.
pub fn conley_descriptor(ctx: &DescriptorContext, lambda: f64) -> Result<ConleyDescriptor, BifurcationError> {
    spectral::check_off_levels(&ctx.data, lambda)?;
    let mut v = IsotypicalDecomposition::trivial(ctx.kind, 0);
    let mut transverse = 0;
    for c in &ctx.clusters {
        v = v.direct_sum(&c.rep)?;
        transverse += c.rep.dim();
    }
    let mut kernel = 0;
    if ctx.degenerate {
        v = v.direct_sum(&ctx.kernel_transverse)?;
        kernel = ctx.kernel_transverse.dim();
    }
    let mut modes = Vec::new();
    let k_star = spectral::k_star(&ctx.data, lambda);
    for k in 1..k_star {
        let mut dim = 0;
        for c in &ctx.clusters {
            if spectral::mode_value(k, lambda, c.alpha) < 0.0 {
                let doubled = c.rep.doubled();
                dim += doubled.dim();
                v = v.direct_sum(&doubled)?;
            }
        }
        if dim > 0 {
            modes.push((k, dim));
        }
    }
    let cd = cohom_dim_quotient(&v)?;
    Ok(ConleyDescriptor {
        lambda,
        kind: ctx.kind,
        total_dim: v.dim(),
        vplus: v,
        cd,
        parts: DescriptorParts {
            transverse,
            kernel,
            modes,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelStatus {
    Certified,
    /// Descriptors of equal dimension: the dimension test says nothing.
    Inconclusive,
    /// Level in `Λ \ Λ0`: listed without a verdict.
    Uncertified,
    /// The orbit failed the hypotheses; nothing was evaluated.
    HypothesesFailed,
}

impl LevelStatus {
    pub fn label(self) -> &'static str {
        match self {
            LevelStatus::Certified => "bifurcation certified",
            LevelStatus::Inconclusive => "inconclusive",
            LevelStatus::Uncertified => "candidate, uncertified",
            LevelStatus::HypothesesFailed => "hypotheses failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub lambda0: f64,
    pub j0: usize,
    pub beta: f64,
    pub multiplicity: usize,
    pub eps: f64,
    pub minus: ConleyDescriptor,
    pub plus: ConleyDescriptor,
    pub distinct: bool,
    pub certified: bool,
    pub dim_jump: usize,
    pub predicted_period: f64,
    pub period_minimal: bool,
}

/// Half the distance from `λ0` to the nearest other `k/β`, capped at `cap·λ0`.
pub fn choose_eps(betas: &[f64], lambda0: f64, cap: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &b in betas {
        let k_mid = (lambda0 * b).round();
        for dk in [-1.0, 0.0, 1.0] {
            let k = k_mid + dk;
            if k < 1.0 {
                continue;
            }
            let l = k / b;
            let d = (l - lambda0).abs();
            if d > LEVEL_MERGE_TOL * lambda0.max(1.0) {
                best = best.min(d);
            }
        }
    }
    (0.5 * best).min(cap * lambda0)
}

/// Compares descriptors at `λ0 ∓ ε` for a nonresonant level.
pub fn certify_level(
    level: &CandidateLevel,
    ctx: &DescriptorContext,
    eps: Option<f64>,
    eps_cap: f64,
) -> Result<LevelCertificate, BifurcationError> {
    let src = match level.first_mode() {
        Some(s) if level.in_lambda0 => s,
        _ => return Err(BifurcationError::NotNonresonant { lambda: level.lambda }),
    };
    let betas: Vec<f64> = ctx.data.frequencies.iter().map(|f| f.beta).collect();
    let eps = eps.unwrap_or_else(|| choose_eps(&betas, level.lambda, eps_cap));
    if !(eps >= EPS_FLOOR) {
        return Err(BifurcationError::Crowded {
            lambda: level.lambda,
            eps,
            floor: EPS_FLOOR,
        });
    }
    let minus = conley_descriptor(ctx, level.lambda - eps)?;
    let plus = conley_descriptor(ctx, level.lambda + eps)?;
    let distinct = indices_distinct(&minus.vplus, &plus.vplus)?;
    let mult = ctx.data.frequencies[src.j].multiplicity;
    Ok(LevelCertificate {
        lambda0: level.lambda,
        j0: src.j,
        beta: src.beta,
        multiplicity: mult,
        eps,
        dim_jump: minus.total_dim.abs_diff(plus.total_dim),
        distinct,
        certified: distinct && level.in_lambda0,
        predicted_period: 2.0 * PI / src.beta,
        period_minimal: level.in_lambda0,
        minus,
        plus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Upper end of the listed candidate levels; default `1.5/β_q`.
    pub lambda_max: Option<f64>,
    /// Zero threshold for Hessian eigenvalues; default `1e-8·max(ρ, 1)`.
    pub spectral_tol: Option<f64>,
    pub orbit_tol: f64,
    pub stabilizer_tol: f64,
    pub gradient_tol: f64,
    pub eps_cap: f64,
    pub probe: ProbeOptions,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lambda_max: None,
            spectral_tol: None,
            orbit_tol: 1e-8,
            stabilizer_tol: repgroup::FIX_TOL,
            gradient_tol: 1e-8,
            eps_cap: 0.25,
            probe: ProbeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Non-degenerate orbit: kernel equals the orbit tangent.
    NonDegenerate,
    /// Isolated degenerate minimum.
    DegenerateMinimum,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub index: usize,
    pub level: CandidateLevel,
    pub status: LevelStatus,
    pub certificate: Option<LevelCertificate>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationReport {
    pub n: usize,
    pub u0: Vec<f64>,
    pub gradient_norm: f64,
    pub critical: bool,
    pub stabilizer: StabilizerVerdict,
    pub orbit_dim: usize,
    pub spectral: SpectralData,
    pub thm1: Thm1Verdict,
    pub thm2: Option<Thm2Verdict>,
    pub route: Route,
    pub lambda_max: f64,
    pub levels: Vec<LevelRecord>,
    pub certified: usize,
    pub notes: Vec<String>,
    #[serde(default)]
    pub confirmations: Vec<BranchSummary>,
}

impl BifurcationReport {
    pub fn certified_levels(&self) -> impl Iterator<Item = &LevelRecord> {
        self.levels.iter().filter(|l| l.status == LevelStatus::Certified)
    }
}

/// Runs the full hypothesis check and certifies every nonresonant level.
pub fn analyze(
    potential: &PotentialExpr,
    group: &GroupSpec,
    u0: &[f64],
    claim: &StabilizerClaim,
    config: &AnalysisConfig,
) -> Result<BifurcationReport, BifurcationError> {
    let n = potential.dim();
    if group.n != n || u0.len() != n || claim.dim() != n {
        return Err(BifurcationError::Input(format!(
            "dimension mismatch: potential {n}, group {}, u0 {}, stabilizer {}",
            group.n,
            u0.len(),
            claim.dim()
        )));
    }
    let mut notes = Vec::new();
    let grad = potential.gradient(u0)?;
    let gradient_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let critical = gradient_norm < config.gradient_tol;
    if !critical {
        notes.push(format!("u0 is not a critical point: |grad U(u0)| = {gradient_norm:.3e}"));
    }
    let stabilizer = repgroup::verify_stabilizer(group, u0, claim, config.stabilizer_tol);
    for c in stabilizer.failures() {
        notes.push(format!("stabilizer check failed: {} ({})", c.name, c.detail));
    }
    let orbit_dim = repgroup::orbit_tangent_dim(group, u0, config.orbit_tol);
    let tangent = repgroup::orbit_tangent_basis(group, u0, config.orbit_tol);
    let hessian = potential.hessian(u0)?;
    let data = spectral::spectral_data(&hessian, config.spectral_tol)?;
    let thm1 = check_hypotheses_thm1(&data, orbit_dim);
    let mut thm2 = None;
    let mut route = Route::None;
    if critical && stabilizer.confirmed {
        if thm1.passed {
            route = Route::NonDegenerate;
        } else if data.kernel_dim > orbit_dim && thm1.positive_spectrum {
            let v = check_hypotheses_thm2(potential, u0, &data, &tangent, &config.probe);
            if v.passed {
                route = Route::DegenerateMinimum;
                notes.push(format!(
                    "degenerate orbit (kernel {} > orbit {}): isolated minimum route, isolation {}",
                    data.kernel_dim, orbit_dim, v.isolation.qualifier
                ));
            }
            thm2 = Some(v);
        }
    }
    if orbit_dim == 0 {
        notes.push("the orbit is a single point: classical (non-symmetric) Lyapunov setting".into());
    }
    notes.push(stabilizer.trust_note.clone());
    notes.push("smoothness of U is assumed, only evaluated at sampled points".into());

    let betas: Vec<f64> = data.frequencies.iter().map(|f| f.beta).collect();
    let lambda_max = config
        .lambda_max
        .unwrap_or_else(|| betas.last().map_or(0.0, |b| 1.5 / b));
    let candidates = candidate_levels(&betas, lambda_max);
    let ctx = if route != Route::None {
        Some(DescriptorContext::new(
            &hessian,
            &data,
            claim,
            &tangent,
            route == Route::DegenerateMinimum,
        )?)
    } else {
        None
    };
    let mut levels = Vec::new();
    for (index, level) in candidates.into_iter().enumerate() {
        let mut record = LevelRecord {
            index,
            status: LevelStatus::HypothesesFailed,
            certificate: None,
            note: None,
            level,
        };
        if let Some(ctx) = &ctx {
            if !record.level.in_lambda0 {
                record.status = LevelStatus::Uncertified;
                record.note = Some("resonant level: periods need not be minimal".into());
            } else {
                match certify_level(&record.level, ctx, None, config.eps_cap) {
                    Ok(c) => {
                        record.status = if c.certified {
                            LevelStatus::Certified
                        } else {
                            LevelStatus::Inconclusive
                        };
                        record.certificate = Some(c);
                    }
                    Err(e) => {
                        record.status = LevelStatus::Inconclusive;
                        record.note = Some(e.to_string());
                    }
                }
            }
            if record.level.resonance_suspect {
                let extra = "resonance-suspect: a frequency ratio is within 1e-6 of an integer";
                record.note = Some(match record.note.take() {
                    Some(n) => format!("{n}; {extra}"),
                    None => extra.into(),
                });
            }
        }
        levels.push(record);
    }
    let certified = levels.iter().filter(|l| l.status == LevelStatus::Certified).count();
    Ok(BifurcationReport {
        n,
        u0: u0.to_vec(),
        gradient_norm,
        critical,
        stabilizer,
        orbit_dim,
        spectral: data,
        thm1,
        thm2,
        route,
        lambda_max,
        levels,
        certified,
        notes,
        confirmations: Vec::new(),
    })
}

/// Human-readable summary table.
pub fn render_text(r: &BifurcationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "critical point u0 = {:?} (|grad U| = {:.3e})", r.u0, r.gradient_norm);
    let _ = writeln!(
        s,
        "stabilizer {}: {}",
        r.stabilizer.kind,
        if r.stabilizer.confirmed { "confirmed" } else { "REJECTED" }
    );
    for c in r.stabilizer.failures() {
        let _ = writeln!(s, "  failed: {} {}", c.name, c.detail);
    }
    let _ = writeln!(s, "orbit dimension {}, kernel dimension {}", r.orbit_dim, r.spectral.kernel_dim);
    let spectrum: Vec<String> = r
        .spectral
        .clusters
        .iter()
        .map(|c| format!("{:.6} (x{})", c.alpha, c.multiplicity))
        .collect();
    let _ = writeln!(s, "Hessian spectrum: {}", spectrum.join(", "));
    let freqs: Vec<String> = r
        .spectral
        .frequencies
        .iter()
        .map(|f| format!("{:.6} (x{})", f.beta, f.multiplicity))
        .collect();
    let _ = writeln!(s, "frequencies: {}", if freqs.is_empty() { "none".into() } else { freqs.join(", ") });
    let route = match r.route {
        Route::NonDegenerate => "non-degenerate orbit",
        Route::DegenerateMinimum => "isolated degenerate minimum (probed)",
        Route::None => "hypotheses not satisfied",
    };
    let _ = writeln!(s, "route: {route}");
    for d in r.thm1.diagnostics.iter().chain(r.thm2.iter().flat_map(|t| t.diagnostics.iter())) {
        let _ = writeln!(s, "  {d}");
    }
    let _ = writeln!(s, "\nlevels up to lambda_max = {:.6}:", r.lambda_max);
    let _ = writeln!(
        s,
        "{:>3}  {:>10}  {:<22}  {:>7}  {:>7}  {:>10}  status",
        "id", "lambda", "sources", "dim V-", "dim V+", "period"
    );
    for l in &r.levels {
        let (dm, dp, per) = match &l.certificate {
            Some(c) => (
                c.minus.total_dim.to_string(),
                c.plus.total_dim.to_string(),
                format!("{:.6}", c.predicted_period),
            ),
            None => ("-".into(), "-".into(), "-".into()),
        };
        let _ = writeln!(
            s,
            "{:>3}  {:>10.6}  {:<22}  {:>7}  {:>7}  {:>10}  {}",
            l.index,
            l.level.lambda,
            l.level.describe_sources(),
            dm,
            dp,
            per,
            l.status.label()
        );
        if let Some(n) = &l.note {
            let _ = writeln!(s, "     note: {n}");
        }
    }
    let _ = writeln!(s, "\ncertified levels: {}", r.certified);
    for b in &r.confirmations {
        let _ = writeln!(
            s,
            "branch level {}: {} records, last period {:.9} (predicted {:.9}), {}",
            b.level_index,
            b.records,
            b.last_period.unwrap_or(f64::NAN),
            b.predicted_period,
            b.status
        );
    }
    if !r.notes.is_empty() {
        let _ = writeln!(s, "\nnotes:");
        for n in &r.notes {
            let _ = writeln!(s, "  - {n}");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::catalog_entry;

    fn lambdas(v: &[CandidateLevel]) -> Vec<f64> {
        v.iter().map(|l| l.lambda).collect()
    }

    #[test]
    fn candidate_examples() {
        let l = candidate_levels(&[2.0, 1.0], 1.1);
        assert_eq!(lambdas(&l), vec![0.5, 1.0]);
        assert_eq!(l[1].sources.len(), 2);
        assert!(!l[1].nonresonant && !l[1].in_lambda0);
        assert!(l[0].in_lambda0);
        assert_eq!(lambdas(&candidate_levels(&[1.0], 3.5)), vec![1.0, 2.0, 3.0]);
        let r2 = 2f64.sqrt();
        let l = candidate_levels(&[r2], 2.0);
        assert_eq!(l.len(), 2);
        assert!((l[0].lambda - 1.0 / r2).abs() < 1e-15 && (l[1].lambda - r2).abs() < 1e-15);
    }

    #[test]
    fn nonresonant_examples() {
        assert_eq!(lambdas(&nonresonant_levels(&[2.0, 1.0])), vec![0.5]);
        assert_eq!(lambdas(&nonresonant_levels(&[3.0, 2.0])), vec![1.0 / 3.0, 0.5]);
        assert_eq!(lambdas(&nonresonant_levels(&[1.7])), vec![1.0 / 1.7]);
        let near = nonresonant_levels(&[2.0 + 1e-7, 1.0]);
        assert_eq!(near.len(), 2);
        assert!(near.iter().any(|l| l.resonance_suspect));
    }

    fn ring3d_ctx() -> (DescriptorContext, SpectralData) {
        let e = catalog_entry("ring3d").unwrap();
        let h = e.potential.hessian(&e.u0).unwrap();
        let d = spectral::spectral_data(&h, None).unwrap();
        let t = repgroup::orbit_tangent_basis(&e.group, &e.u0, 1e-8);
        (DescriptorContext::new(&h, &d, &e.claim, &t, false).unwrap(), d)
    }

    #[test]
    fn ring3d_descriptors() {
        let (ctx, _) = ring3d_ctx();
        let a = conley_descriptor(&ctx, 0.5).unwrap();
        assert_eq!(a.parts.transverse, 2);
        assert_eq!(a.total_dim, 2);
        let b = conley_descriptor(&ctx, 0.9).unwrap();
        assert_eq!(b.total_dim, 4);
        assert!(conley_descriptor(&ctx, 1.0).is_err());
    }

    #[test]
    fn small_lambda_descriptor_is_the_positive_transverse_part() {
        let (ctx, _) = ring3d_ctx();
        let d = conley_descriptor(&ctx, 1e-3).unwrap();
        assert_eq!(d.total_dim, 3 - 1);
        assert!(d.parts.modes.is_empty());
    }

    #[test]
    fn ring3d_certifies_two_levels() {
        let e = catalog_entry("ring3d").unwrap();
        let r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.route, Route::NonDegenerate);
        let cert: Vec<f64> = r.certified_levels().map(|l| l.level.lambda).collect();
        assert_eq!(cert.len(), 2);
        assert!((cert[0] - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((cert[1] - 1.0).abs() < 1e-12);
        let c = r.levels[0].certificate.as_ref().unwrap();
        assert!((c.predicted_period - 2.0 * PI / 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.levels[2].status, LevelStatus::Uncertified);
        assert!(render_text(&r).contains("bifurcation certified"));
    }

    #[test]
    fn resonant_level_is_refused() {
        let (ctx, _) = ring3d_ctx();
        let l = candidate_levels(&[2f64.sqrt(), 1.0], 1.5);
        assert!(matches!(
            certify_level(&l[2], &ctx, None, 0.25),
            Err(BifurcationError::NotNonresonant { .. })
        ));
    }

    #[test]
    fn degenerate_minimum_route() {
        let e = catalog_entry("ring_quartic4").unwrap();
        let r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.route, Route::DegenerateMinimum);
        assert_eq!(r.certified, 2);
        let c = r.certified_levels().next().unwrap().certificate.as_ref().unwrap();
        assert_eq!(c.minus.parts.kernel, 1);
    }

    #[test]
    fn no_positive_spectrum() {
        let p = crate::potential::parse_potential("-(u1^2+u2^2)/2", 2).unwrap();
        let g = GroupSpec::trivial(2);
        let r = analyze(&p, &g, &[0.0, 0.0], &StabilizerClaim::trivial(2), &AnalysisConfig::default()).unwrap();
        assert_eq!(r.route, Route::None);
        assert!(r.levels.is_empty());
        assert!(!r.thm1.positive_spectrum);
    }

    #[test]
    fn circle_stabilizer_descriptor_dims() {
        let e = catalog_entry("harmonic2").unwrap();
        let r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.certified, 1);
        let c = r.levels[0].certificate.as_ref().unwrap();
        assert_eq!((c.minus.total_dim, c.plus.total_dim), (2, 6));
        assert_eq!(c.minus.cd, CohomDim::Contractible);
        assert_eq!(c.plus.cd, CohomDim::Dim(5));
    }
}
