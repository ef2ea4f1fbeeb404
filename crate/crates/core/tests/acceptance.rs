//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are fixed here.

use std::f64::consts::PI;
use std::time::Instant;

use eqlyap_core::bifurcation::{analyze, nonresonant_levels, AnalysisConfig, LevelStatus, Route};
use eqlyap_core::dynamics::{
    confirm_levels, integrate, integrate_dense, steps_for, BranchOptions, FlowOptions, PhaseState,
};
use eqlyap_core::linalg::sorted_symmetric_eigen;
use eqlyap_core::potential::{catalog, catalog_entry};
use eqlyap_core::repgroup::{self, decompose_zm, GroupWord, HKind, IsotypicalDecomposition, StabilizerClaim};
use eqlyap_core::spectral::{discrete_action_hessian, mode_spectrum, spectral_data};
use eqlyap_core::topology::{cohom_dim_quotient, cp_quotient_cd, oracle_cohomology_zm, CohomDim};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ACTION_TOL: f64 = 1e-8;
const RADIAL_PERIOD_TOL: f64 = 5e-4;
const VERTICAL_PERIOD_TOL: f64 = 1e-6;
const DEGENERATE_PERIOD_TOL: f64 = 1e-3;
const EQUIVARIANCE_TOL: f64 = 1e-8;
const ENERGY_REL_TOL: f64 = 1e-8;
const SAMPLES_PER_ENTRY: usize = 50;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn zm_grid() -> Vec<IsotypicalDecomposition> {
    let mut out = Vec::new();
    for m in 2u32..=5 {
        let weights: Vec<u32> = (1..=m / 2).collect();
        for p in 1..=2usize {
            let weight_sets: Vec<Vec<u32>> = match p {
                1 => weights.iter().map(|&w| vec![w]).collect(),
                _ => {
                    let mut s = Vec::new();
                    for (i, &a) in weights.iter().enumerate() {
                        for &b in &weights[i + 1..] {
                            s.push(vec![a, b]);
                        }
                    }
                    s
                }
            };
            for ws in &weight_sets {
                let mut mults: Vec<Vec<usize>> = vec![Vec::new()];
                for _ in 0..p {
                    mults = mults
                        .into_iter()
                        .flat_map(|v| {
                            [1usize, 2].into_iter().map(move |k| {
                                let mut v = v.clone();
                                v.push(k);
                                v
                            })
                        })
                        .collect();
                }
                for ks in &mults {
                    for k0 in 0..=1usize {
                        let blocks: Vec<(usize, u32)> = ks.iter().copied().zip(ws.iter().copied()).collect();
                        let total = k0 + 2 * ks.iter().sum::<usize>();
                        if total <= 8 {
                            out.push(IsotypicalDecomposition::new(HKind::Zm(m), k0, &blocks).unwrap());
                        }
                    }
                }
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let grid = zm_grid();
    let mut mismatches = Vec::new();
    for d in &grid {
        let formula = cohom_dim_quotient(d).unwrap();
        match oracle_cohomology_zm(d) {
            Ok(r) if r.cd == formula => {}
            Ok(r) => mismatches.push(format!("{d}: formula {formula}, oracle {}", r.cd)),
            Err(e) => mismatches.push(format!("{d}: oracle error {e}")),
        }
    }
    outcome(
        mismatches.is_empty() && !grid.is_empty(),
        if mismatches.is_empty() {
            format!("CD formula equals the lens-complex oracle on all {} Z_m cases", grid.len())
        } else {
            format!("{} of {} cases mismatch: {}", mismatches.len(), grid.len(), mismatches.join("; "))
        },
    )
}

fn criterion_2() -> Outcome {
    let mut bad = Vec::new();
    for k in 1..=3usize {
        let d = IsotypicalDecomposition::new(HKind::S1, 0, &[(k, 1)]).unwrap();
        let formula = cohom_dim_quotient(&d).unwrap();
        let cp = cp_quotient_cd(0, k);
        let expected = if k == 1 {
            CohomDim::Contractible
        } else {
            CohomDim::Dim(2 * k - 1)
        };
        if formula != cp || formula != expected {
            bad.push(format!("k = {k}: formula {formula}, projective {cp}"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "S1 formula matches the CP^{k-1} suspension for k = 1, 2, 3 (k = 1 contractible on both)".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut bad = Vec::new();
    for e in catalog() {
        let h = e.potential.hessian(&e.u0).unwrap();
        let data = spectral_data(&h, None).unwrap();
        for &lambda in &[0.3, 0.7, 1.3] {
            let m = discrete_action_hessian(&e.potential, &e.u0, lambda, 5, None).unwrap();
            let numeric = sorted_symmetric_eigen(&m).values;
            let closed = mode_spectrum(&data, lambda, 5).multiset();
            if numeric.len() != closed.len() {
                bad.push(format!("{} at {lambda}: sizes {} vs {}", e.name, numeric.len(), closed.len()));
                continue;
            }
            let mut a = numeric.clone();
            a.sort_by(f64::total_cmp);
            let err = a.iter().zip(&closed).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            cases += 1;
            if err > ACTION_TOL {
                bad.push(format!("{} at {lambda}: error {err:.3e}", e.name));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{cases} (entry, lambda) cases, max eigenvalue error {worst:.3e} (tol {ACTION_TOL:.0e}){}",
            if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for e in catalog() {
        let r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
        if r.route == Route::None {
            bad.push(format!("{}: hypotheses not satisfied", e.name));
            continue;
        }
        let betas: Vec<f64> = r.spectral.frequencies.iter().map(|f| f.beta).collect();
        for lvl in nonresonant_levels(&betas) {
            let rec = r.levels.iter().find(|l| (l.level.lambda - lvl.lambda).abs() < 1e-12);
            let Some(c) = rec.and_then(|l| l.certificate.as_ref()) else {
                bad.push(format!("{}: no certificate at {:.6}", e.name, lvl.lambda));
                continue;
            };
            checked += 1;
            if c.dim_jump != 2 * c.multiplicity {
                bad.push(format!(
                    "{} at {:.6}: jump {} vs 2*{}",
                    e.name, c.lambda0, c.dim_jump, c.multiplicity
                ));
            }
        }
    }
    outcome(
        bad.is_empty() && checked > 0,
        if bad.is_empty() {
            format!("descriptor dimensions jump by 2*mult at all {checked} nonresonant levels")
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_5() -> Outcome {
    let e = catalog_entry("ring3d").unwrap();
    let mut r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
    let certified: Vec<(usize, f64)> = r.certified_levels().map(|l| (l.index, l.level.lambda)).collect();
    let want = [1.0 / 2f64.sqrt(), 1.0];
    let levels_ok = certified.len() == 2
        && certified
            .iter()
            .zip(&want)
            .all(|(c, w)| (c.1 - w).abs() < 1e-12);
    if !levels_ok {
        return outcome(false, format!("certified levels {certified:?}, expected 1/sqrt(2) and 1"));
    }
    let idx: Vec<usize> = certified.iter().map(|c| c.0).collect();
    let branches = match confirm_levels(&mut r, &e.potential, &e.group, &idx, false, &BranchOptions::default()) {
        Ok(b) => b,
        Err(err) => return outcome(false, format!("continuation failed: {err}")),
    };
    let radial = &branches[0];
    let vertical = &branches[1];
    let mut problems = Vec::new();
    for b in &branches {
        if b.records.len() != 5 {
            problems.push(format!("level {}: {} of 5 records ({:?})", b.level_index, b.records.len(), b.failures));
        }
        if !b.records.iter().all(|x| x.minimal && x.accepted) {
            problems.push(format!("level {}: a record fails the minimal-period or residual check", b.level_index));
        }
        if !b.tube_monotone {
            let t: Vec<f64> = b.records.iter().map(|x| x.tube_radius).collect();
            problems.push(format!("level {}: tube radii not decreasing {t:?}", b.level_index));
        }
    }
    let radial_err = radial
        .records
        .iter()
        .find(|x| (x.amplitude - 0.005).abs() < 1e-15)
        .map(|x| (x.period - 2.0 * PI / 2f64.sqrt()).abs());
    if !radial_err.is_some_and(|x| x < RADIAL_PERIOD_TOL) {
        problems.push(format!("radial |T(0.005) - 2pi/sqrt2| = {radial_err:?}"));
    }
    let vertical_err = vertical
        .records
        .iter()
        .map(|x| (x.period - 2.0 * PI).abs())
        .fold(0.0, f64::max);
    if !(vertical_err < VERTICAL_PERIOD_TOL) {
        problems.push(format!("vertical max |T - 2pi| = {vertical_err:.3e}"));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "levels 1/sqrt(2), 1 certified; radial |T - 2pi/sqrt2| = {:.3e}, vertical max |T - 2pi| = {:.3e}; all records minimal, tubes shrinking",
                radial_err.unwrap_or(f64::NAN),
                vertical_err
            )
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_6() -> Outcome {
    let e = catalog_entry("ring_quartic4").unwrap();
    let mut r = analyze(&e.potential, &e.group, &e.u0, &e.claim, &AnalysisConfig::default()).unwrap();
    let mut problems = Vec::new();
    if r.route != Route::DegenerateMinimum {
        problems.push(format!("route {:?}", r.route));
    }
    if r.spectral.kernel_dim != r.orbit_dim + 1 {
        problems.push(format!("kernel {} vs orbit {}", r.spectral.kernel_dim, r.orbit_dim));
    }
    match &r.thm2 {
        Some(t) if t.positive_semidefinite && t.isolation.passed => {}
        other => problems.push(format!("degenerate-minimum checks {other:?}")),
    }
    let nonres = r.levels.iter().filter(|l| l.level.in_lambda0).count();
    let nonres_certified = r
        .levels
        .iter()
        .filter(|l| l.level.in_lambda0 && l.status == LevelStatus::Certified)
        .count();
    if nonres == 0 || nonres_certified != nonres {
        problems.push("not every nonresonant level is certified".into());
    }
    let first = r
        .levels
        .iter()
        .find(|l| l.certificate.as_ref().is_some_and(|c| c.j0 == 0) && l.level.in_lambda0)
        .map(|l| l.index);
    let mut period_err = None;
    if let Some(i) = first {
        match confirm_levels(&mut r, &e.potential, &e.group, &[i], false, &BranchOptions::default()) {
            Ok(b) => {
                let b = &b[0];
                period_err = b.period_error;
                if b.records.is_empty() || !b.records.iter().all(|x| x.accepted) {
                    problems.push(format!("branch records {} ({:?})", b.records.len(), b.failures));
                }
            }
            Err(err) => problems.push(format!("continuation failed: {err}")),
        }
    } else {
        problems.push("no certified level for the largest frequency".into());
    }
    if !period_err.is_some_and(|x| x < DEGENERATE_PERIOD_TOL) {
        problems.push(format!("period error {period_err:?}"));
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "degenerate-minimum route taken, {} nonresonant levels certified, beta1 branch period error {:.3e}",
                nonres,
                period_err.unwrap_or(f64::NAN)
            )
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_7() -> Outcome {
    let e = catalog_entry("double_rotator").unwrap();
    let mut problems = Vec::new();
    let word = |m: u32| GroupWord {
        exp_coeffs: vec![2.0 * PI / m as f64],
        finite: vec![],
    };
    let g = e.group.evaluate_word(&word(3)).unwrap();
    let d = decompose_zm(&g, 3).unwrap();
    let hand = IsotypicalDecomposition::new(HKind::Zm(3), 2, &[(1, 1)]).unwrap();
    if d != hand {
        problems.push(format!("decompose_zm gave {d}, expected {hand}"));
    }
    let verdict = repgroup::verify_stabilizer(&e.group, &e.u0, &e.claim, repgroup::FIX_TOL);
    if !verdict.confirmed {
        problems.push("the order-3 claim is rejected".into());
    }
    let mut rejected = 0;
    for m in [2u32, 4, 5, 6] {
        for claim in [
            StabilizerClaim::cyclic(&e.group, m, word(m)),
            StabilizerClaim::cyclic(&e.group, m, word(3)),
        ] {
            let ok = match claim {
                Ok(c) => repgroup::verify_stabilizer(&e.group, &e.u0, &c, repgroup::FIX_TOL).confirmed,
                Err(_) => false,
            };
            if ok {
                problems.push(format!("order {m} claim accepted"));
            } else {
                rejected += 1;
            }
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("weights {d} reproduced; order 3 accepted, {rejected} wrong-order claims rejected")
        } else {
            problems.join("; ")
        },
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x8ca5e);
    let flow = FlowOptions::default();
    let mut worst_eq = 0.0f64;
    let mut worst_energy = 0.0f64;
    let mut bad = Vec::new();
    let mut samples = 0;
    for e in catalog() {
        let n = e.u0.len();
        for _ in 0..SAMPLES_PER_ENTRY {
            let u: Vec<f64> = e.u0.iter().map(|x| x + rng.gen_range(-0.1..0.1)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.1..0.1)).collect();
            let t = rng.gen_range(0.5..2.0 * PI);
            let s = PhaseState::new(u, v);
            let steps = steps_for(t, flow.base_step);
            let traj = integrate_dense(&e.potential, &s, t, steps, flow.method, 1).unwrap();
            let e0 = traj.energies[0];
            let drift = traj.energy_drift() / (1.0 + e0.abs());
            worst_energy = worst_energy.max(drift);
            let gm = e.group.sample(&mut rng);
            let act = |x: &[f64]| -> Vec<f64> { (&gm * DVector::from_column_slice(x)).iter().copied().collect() };
            let gs = PhaseState::new(act(&s.u), act(&s.v));
            let a = integrate(&e.potential, &gs, t, steps, flow.method).unwrap();
            let out = traj.last();
            let b = PhaseState::new(act(&out.u), act(&out.v));
            let d = a.distance(&b);
            worst_eq = worst_eq.max(d);
            samples += 1;
            if d > EQUIVARIANCE_TOL || drift > ENERGY_REL_TOL {
                bad.push(format!("{}: equivariance {d:.3e}, energy {drift:.3e}", e.name));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{samples} samples: max equivariance defect {worst_eq:.3e} (tol {EQUIVARIANCE_TOL:.0e}), max relative energy drift {worst_energy:.3e} (tol {ENERGY_REL_TOL:.0e}){}",
            if bad.is_empty() { String::new() } else { format!("; {} failures, first {}", bad.len(), bad[0]) }
        ),
    )
}

fn main() {
    // (id, name, check, runtime budget in seconds)
    let criteria: [(u32, &str, fn() -> Outcome, Option<f64>); 8] = [
        (1, "CD formula vs simplicial oracle", criterion_1, Some(60.0)),
        (2, "S1 projective cross-check", criterion_2, None),
        (3, "action spectrum closed form", criterion_3, Some(10.0)),
        (4, "Morse jump identity", criterion_4, None),
        (5, "ring3d end-to-end", criterion_5, Some(120.0)),
        (6, "degenerate-minimum route", criterion_6, None),
        (7, "Z_m stabilizer checks", criterion_7, None),
        (8, "flow equivariance and energy", criterion_8, None),
    ];
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        let start = Instant::now();
        let mut o = run();
        let secs = start.elapsed().as_secs_f64();
        if let Some(b) = budget.filter(|&b| secs > b) {
            o.passed = false;
            o.detail = format!("{} (over the {b:.0}s budget)", o.detail);
        }
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id} ({name}): {} [{secs:.2}s]", o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
