//! The analyze, oracle-check and shoot workflows and the files they write.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use eqlyap_core::bifurcation::{render_text, LevelStatus};
use eqlyap_core::dynamics::{confirm_levels, BranchStatus, PeriodicBranch};
use eqlyap_core::repgroup::HKind;
use eqlyap_core::topology::{
    cohom_dim_quotient, cp_quotient_cd, oracle_cohomology_zm, CohomologyGroup, TopologyError,
};
use eqlyap_core::{analyze, BifurcationReport, CohomDim, IsotypicalDecomposition};
use serde::{Deserialize, Serialize};

use crate::config::{OracleCase, ResolvedConfig, RunConfig};

pub const TOOL: &str = "eqlyap";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

fn tool() -> ToolInfo {
    ToolInfo {
        name: TOOL.into(),
        version: VERSION.into(),
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: ToolInfo,
    pub config: ResolvedConfig,
    pub report: BifurcationReport,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn header(cfg: &ResolvedConfig) -> String {
    let name = cfg
        .potential
        .catalog
        .as_deref()
        .map(|c| format!(" (catalog {c})"))
        .unwrap_or_default();
    format!(
        "{TOOL} {VERSION}\npotential{name}: U = {} on R^{}\n\n",
        cfg.potential.source, cfg.potential.dim
    )
}

fn run_analysis(cfg: &ResolvedConfig) -> Result<BifurcationReport> {
    let potential = cfg.build_potential()?;
    analyze(&potential, &cfg.group, &cfg.u0, &cfg.stabilizer, &cfg.analysis).map_err(|e| anyhow!("analysis: {e}"))
}

fn write_report(cfg: &ResolvedConfig, report: &BifurcationReport) -> Result<()> {
    prepare(&cfg.out)?;
    let file = ReportFile {
        tool: tool(),
        config: cfg.clone(),
        report: report.clone(),
    };
    write(&cfg.out, "report.json", &(serde_json::to_string_pretty(&file)? + "\n"))?;
    write(&cfg.out, "report.txt", &(header(cfg) + &render_text(report)))
}

/// Always succeeds once the pipeline ran; zero certified levels is a result.
pub fn cmd_analyze(cfg: &ResolvedConfig) -> Result<u8> {
    let report = run_analysis(cfg)?;
    write_report(cfg, &report)?;
    print!("{}", render_text(&report));
    println!("wrote {}", cfg.out.join("report.json").display());
    Ok(0)
}

fn branch_csv(b: &PeriodicBranch) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in b.rows() {
        w.serialize(row)?;
    }
    if b.records.is_empty() {
        w.write_record(["amplitude", "T", "residual", "tube_radius", "minimal_flag", "energy_drift", "stamp"])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("csv: {e}"))?)?)
}

/// Exit 1 iff some requested branch produced no record at all.
pub fn cmd_shoot(cfg: &ResolvedConfig) -> Result<u8> {
    let potential = cfg.build_potential()?;
    let mut report = run_analysis(cfg)?;
    let levels: Vec<usize> = if cfg.levels.is_empty() {
        report.certified_levels().map(|l| l.index).collect()
    } else {
        cfg.levels.clone()
    };
    if levels.is_empty() {
        bail!("no certified level to shoot; pass --level with --force to run an uncertified one");
    }
    for &i in &levels {
        let Some(rec) = report.levels.get(i) else {
            bail!("unknown level {i}: the report lists {} levels", report.levels.len());
        };
        if rec.status != LevelStatus::Certified && !cfg.force {
            bail!("level {i} is {}; pass --force to shoot it anyway", rec.status.label());
        }
        if rec.level.first_mode().is_none() {
            bail!("level {i} has no 1/beta source to follow");
        }
    }
    let branches = confirm_levels(&mut report, &potential, &cfg.group, &levels, cfg.force, &cfg.shoot)
        .map_err(|e| anyhow!("shoot: {e}"))?;
    write_report(cfg, &report)?;
    let mut failed = false;
    for b in &branches {
        let id = b.level_index;
        write(&cfg.out, &format!("branch_{id}.csv"), &branch_csv(b)?)?;
        write(&cfg.out, &format!("branch_{id}.json"), &(serde_json::to_string_pretty(b)? + "\n"))?;
        println!(
            "level {id} (lambda {:.6}, {}): {} records, {}, predicted period {:.9}",
            b.level.lambda,
            if b.certified { "certified" } else { "uncertified" },
            b.records.len(),
            b.status,
            b.predicted_period
        );
        for r in &b.records {
            println!(
                "  a = {:<8} T = {:.9}  residual {:.2e}  tube {:.3e}  minimal {}",
                r.amplitude, r.period, r.residual, r.tube_radius, r.minimal
            );
        }
        for f in &b.failures {
            println!("  a = {:<8} failed: {}", f.amplitude, f.error);
        }
        failed |= b.status == BranchStatus::Failed;
    }
    Ok(u8::from(failed))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRow {
    pub case: String,
    pub kind: HKind,
    pub dimension: usize,
    pub formula_cd: CohomDim,
    pub check_cd: Option<CohomDim>,
    /// "lens complex" or "CP suspension".
    pub method: String,
    pub matches: Option<bool>,
    /// Nonzero reduced cohomology of `S^V/H` where computed.
    pub cohomology: Vec<CohomologyGroup>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleTable {
    pub tool: ToolInfo,
    pub rows: Vec<OracleRow>,
    pub mismatches: usize,
    pub skipped: usize,
}

/// `m ∈ {2..5}`, one or two distinct weights `≤ m/2` with multiplicities in
/// `{1, 2}`, `k0 ∈ {0, 1}`, total dimension at most 8.
pub fn default_grid() -> Vec<OracleCase> {
    let mut out = Vec::new();
    for m in 2u32..=5 {
        let ws: Vec<u32> = (1..=m / 2).collect();
        let mut sets: Vec<Vec<u32>> = ws.iter().map(|&w| vec![w]).collect();
        for (i, &a) in ws.iter().enumerate() {
            for &b in &ws[i + 1..] {
                sets.push(vec![a, b]);
            }
        }
        for set in sets {
            for mask in 0..(1u32 << set.len()) {
                let blocks: Vec<(usize, u32)> = set
                    .iter()
                    .enumerate()
                    .map(|(i, &w)| (1 + ((mask >> i) & 1) as usize, w))
                    .collect();
                for k0 in 0..=1 {
                    if k0 + 2 * blocks.iter().map(|b| b.0).sum::<usize>() <= 8 {
                        out.push(OracleCase {
                            m,
                            k0,
                            blocks: blocks.clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn zm_row(case: &OracleCase) -> Result<OracleRow> {
    let d = IsotypicalDecomposition::new(HKind::Zm(case.m), case.k0, &case.blocks)
        .map_err(|e| anyhow!("oracle case m = {}: {e}", case.m))?;
    let formula = cohom_dim_quotient(&d).map_err(|e| anyhow!("{d}: {e}"))?;
    let mut row = OracleRow {
        case: d.to_string(),
        kind: d.kind,
        dimension: d.dim(),
        formula_cd: formula,
        check_cd: None,
        method: "lens complex".into(),
        matches: None,
        cohomology: Vec::new(),
        note: None,
    };
    match oracle_cohomology_zm(&d) {
        Ok(r) => {
            row.matches = Some(r.cd == formula);
            row.check_cd = Some(r.cd);
            row.cohomology = r.quotient.into_iter().filter(|g| !g.is_zero()).collect();
        }
        Err(e @ TopologyError::DimensionCap { .. }) => {
            row.note = Some(format!("skipped: {e}"));
        }
        Err(e) => bail!("{d}: {e}"),
    }
    Ok(row)
}

fn s1_row(k: usize) -> OracleRow {
    let d = IsotypicalDecomposition::new(HKind::S1, 0, &[(k, 1)]).expect("valid circle representation");
    let formula = cohom_dim_quotient(&d).expect("formula is total");
    let cp = cp_quotient_cd(0, k);
    OracleRow {
        case: d.to_string(),
        kind: HKind::S1,
        dimension: d.dim(),
        formula_cd: formula,
        check_cd: Some(cp),
        method: "CP suspension".into(),
        matches: Some(cp == formula),
        cohomology: Vec::new(),
        note: None,
    }
}

fn render_table(t: &OracleTable) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<28} {:>4} {:>12} {:>12}  {:<14} result",
        "decomposition", "dim", "formula CD", "check CD", "method"
    );
    for r in &t.rows {
        let check = r.check_cd.map_or("-".to_string(), |c| c.to_string());
        let result = match r.matches {
            Some(true) => "match".to_string(),
            Some(false) => "MISMATCH".to_string(),
            None => r.note.clone().unwrap_or_default(),
        };
        let _ = writeln!(
            s,
            "{:<28} {:>4} {:>12} {:>12}  {:<14} {result}",
            r.case, r.dimension, r.formula_cd.to_string(), check, r.method
        );
        let tors: Vec<String> = r
            .cohomology
            .iter()
            .filter(|g| !g.torsion.is_empty())
            .map(|g| {
                let t: Vec<String> = g.torsion.iter().map(|t| format!("Z/{t}")).collect();
                format!("H^{} torsion {}", g.degree, t.join("+"))
            })
            .collect();
        if !tors.is_empty() {
            let _ = writeln!(s, "    {}", tors.join(", "));
        }
    }
    let _ = writeln!(
        s,
        "{} cases, {} mismatches, {} skipped",
        t.rows.len(),
        t.mismatches,
        t.skipped
    );
    s
}

/// Exit 1 iff some case disagrees.
pub fn cmd_oracle_check(run: &RunConfig, out: &Path) -> Result<u8> {
    let mut cases = if run.oracle.grid { default_grid() } else { Vec::new() };
    cases.extend(run.oracle.cases.iter().cloned());
    let mut rows = cases.iter().map(zm_row).collect::<Result<Vec<_>>>()?;
    if run.oracle.grid || run.oracle.s1_max_k.is_some() {
        for k in 1..=run.oracle.s1_max_k.unwrap_or(3) {
            rows.push(s1_row(k));
        }
    }
    let table = OracleTable {
        tool: tool(),
        mismatches: rows.iter().filter(|r| r.matches == Some(false)).count(),
        skipped: rows.iter().filter(|r| r.matches.is_none()).count(),
        rows,
    };
    prepare(out)?;
    write(out, "oracle_table.json", &(serde_json::to_string_pretty(&table)? + "\n"))?;
    print!("{}", render_table(&table));
    Ok(u8::from(table.mismatches > 0))
}
