//! TOML run configuration and its resolution into fully specified inputs.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use eqlyap_core::dynamics::{BranchOptions, FlowOptions, Method};
use eqlyap_core::linalg::rows::from_rows;
use eqlyap_core::potential::{catalog_entry, parse_potential, PotentialExpr};
use eqlyap_core::repgroup::{FiniteGenerator, GroupWord};
use eqlyap_core::spectral::ProbeOptions;
use eqlyap_core::{AnalysisConfig, GroupSpec, StabilizerClaim};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub u0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub potential: PotentialSection,
    pub group: Option<GroupSection>,
    pub stabilizer: Option<StabilizerSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub shoot: ShootSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub catalog: Option<String>,
    pub expr: Option<String>,
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    #[serde(default)]
    pub lie_generators: Vec<Rows>,
    #[serde(default)]
    pub finite_generators: Vec<FiniteSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSection {
    pub matrix: Rows,
    pub order: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerSection {
    /// "trivial", "S1" or "Zm".
    pub kind: String,
    pub coeffs: Option<Vec<f64>>,
    pub generator: Option<Rows>,
    pub m: Option<u32>,
    pub exp_coeffs: Option<Vec<f64>>,
    pub finite: Option<Vec<usize>>,
    pub element: Option<Rows>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub lambda_max: Option<f64>,
    pub spectral_tol: Option<f64>,
    pub orbit_tol: Option<f64>,
    pub stabilizer_tol: Option<f64>,
    pub gradient_tol: Option<f64>,
    pub eps_cap: Option<f64>,
    pub probe: Option<ProbeSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub r_min: Option<f64>,
    pub r_max: Option<f64>,
    pub shells: Option<usize>,
    pub random_directions: Option<usize>,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootSection {
    pub levels: Option<Vec<usize>>,
    pub force: Option<bool>,
    pub amplitudes: Option<Vec<f64>>,
    pub period_tol: Option<f64>,
    pub j_max: Option<u32>,
    pub tube_samples: Option<usize>,
    pub method: Option<Method>,
    pub base_step: Option<f64>,
    pub richardson_tol: Option<f64>,
    pub newton_tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "yes")]
    pub grid: bool,
    #[serde(default)]
    pub cases: Vec<OracleCase>,
    pub s1_max_k: Option<usize>,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            grid: true,
            cases: Vec::new(),
            s1_max_k: None,
        }
    }
}

fn yes() -> bool {
    true
}

/// `blocks` lists `[multiplicity, weight]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleCase {
    pub m: u32,
    #[serde(default)]
    pub k0: usize,
    #[serde(default)]
    pub blocks: Vec<(usize, u32)>,
}

/// Command-line overrides; each wins over the corresponding config entry.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub catalog: Option<String>,
    pub potential: Option<String>,
    pub dim: Option<usize>,
    pub u0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub lambda_max: Option<f64>,
    pub levels: Vec<usize>,
    pub force: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPotential {
    pub catalog: Option<String>,
    pub source: String,
    pub dim: usize,
}

/// Every input of a run with defaults filled in; echoed into each report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub potential: ResolvedPotential,
    pub u0: Vec<f64>,
    pub group: GroupSpec,
    pub stabilizer: StabilizerClaim,
    pub analysis: AnalysisConfig,
    pub shoot: BranchOptions,
    pub levels: Vec<usize>,
    pub force: bool,
    pub out: PathBuf,
}

pub const DEFAULT_OUT: &str = "eqlyap-out";

pub fn load(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| anyhow!("config {}: {e}", path.display()))
}

fn matrix(rows: &Rows, what: &str) -> Result<DMatrix<f64>> {
    from_rows(rows).ok_or_else(|| anyhow!("malformed matrix in {what}: rows have different lengths"))
}

impl ResolvedConfig {
    pub fn build_potential(&self) -> Result<PotentialExpr> {
        parse_potential(&self.potential.source, self.potential.dim)
            .map_err(|e| anyhow!("potential {:?}: {e}", self.potential.source))
    }
}

pub fn resolve(cfg: &RunConfig, ov: &Overrides) -> Result<ResolvedConfig> {
    if ov.catalog.is_some() && ov.potential.is_some() {
        bail!("give either a catalog name or a potential expression, not both");
    }
    let from_file = ov.catalog.is_none() && ov.potential.is_none();
    if from_file && cfg.potential.catalog.is_some() && cfg.potential.expr.is_some() {
        bail!("config: potential.catalog and potential.expr are mutually exclusive");
    }
    let catalog = ov
        .catalog
        .clone()
        .or_else(|| ov.potential.is_none().then(|| cfg.potential.catalog.clone()).flatten());
    let expr = if catalog.is_some() {
        None
    } else {
        ov.potential.clone().or_else(|| cfg.potential.expr.clone())
    };
    let (potential, mut u0, mut group, mut claim) = match (&catalog, &expr) {
        (Some(name), _) => {
            let e = catalog_entry(name).ok_or_else(|| anyhow!("unknown catalog entry {name:?}"))?;
            (
                ResolvedPotential {
                    catalog: Some(name.clone()),
                    source: e.potential.source().to_string(),
                    dim: e.potential.dim(),
                },
                e.u0.clone(),
                e.group.clone(),
                e.claim.clone(),
            )
        }
        (None, Some(src)) => {
            let dim = ov
                .dim
                .or(cfg.potential.dim)
                .ok_or_else(|| anyhow!("a potential expression needs its dimension (--dim)"))?;
            parse_potential(src, dim).map_err(|e| anyhow!("potential {src:?}: {e}"))?;
            (
                ResolvedPotential {
                    catalog: None,
                    source: src.clone(),
                    dim,
                },
                vec![0.0; dim],
                GroupSpec::trivial(dim),
                StabilizerClaim::trivial(dim),
            )
        }
        (None, None) => bail!("no potential given: use --catalog, --potential with --dim, or a config file"),
    };
    let n = potential.dim;
    if let Some(g) = &cfg.group {
        let lie = g
            .lie_generators
            .iter()
            .enumerate()
            .map(|(i, m)| matrix(m, &format!("group.lie_generators[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let fin = g
            .finite_generators
            .iter()
            .enumerate()
            .map(|(i, f)| {
                Ok(FiniteGenerator {
                    matrix: matrix(&f.matrix, &format!("group.finite_generators[{i}]"))?,
                    order: f.order,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        group = GroupSpec::new(n, lie, fin).map_err(|e| anyhow!("invalid group: {e}"))?;
        if cfg.stabilizer.is_none() {
            claim = StabilizerClaim::trivial(n);
        }
    }
    if let Some(s) = &cfg.stabilizer {
        claim = stabilizer(s, &group)?;
    }
    if let Some(u) = ov.u0.clone().or_else(|| cfg.u0.clone()) {
        u0 = u;
    }
    if u0.len() != n {
        bail!("u0 has {} entries but the potential has dimension {n}", u0.len());
    }
    if u0.iter().any(|x| !x.is_finite()) {
        bail!("u0 has non-finite entries");
    }

    let a = &cfg.analysis;
    let d = AnalysisConfig::default();
    let p = a.probe.clone().unwrap_or_default();
    let dp = ProbeOptions::default();
    let analysis = AnalysisConfig {
        lambda_max: ov.lambda_max.or(a.lambda_max),
        spectral_tol: a.spectral_tol,
        orbit_tol: a.orbit_tol.unwrap_or(d.orbit_tol),
        stabilizer_tol: a.stabilizer_tol.unwrap_or(d.stabilizer_tol),
        gradient_tol: a.gradient_tol.unwrap_or(d.gradient_tol),
        eps_cap: a.eps_cap.unwrap_or(d.eps_cap),
        probe: ProbeOptions {
            r_min: p.r_min.unwrap_or(dp.r_min),
            r_max: p.r_max.unwrap_or(dp.r_max),
            shells: p.shells.unwrap_or(dp.shells),
            random_directions: p.random_directions.unwrap_or(dp.random_directions),
            threshold: p.threshold.unwrap_or(dp.threshold),
            seed: p.seed.unwrap_or(dp.seed),
        },
    };
    if let Some(l) = analysis.lambda_max {
        if !(l > 0.0 && l.is_finite()) {
            bail!("lambda_max must be positive, got {l}");
        }
    }
    let s = &cfg.shoot;
    let db = BranchOptions::default();
    let df = FlowOptions::default();
    let mut shoot = BranchOptions {
        amplitudes: s.amplitudes.clone().unwrap_or(db.amplitudes),
        period_tol: s.period_tol.unwrap_or(db.period_tol),
        j_max: s.j_max.unwrap_or(db.j_max),
        tube_samples: s.tube_samples.unwrap_or(db.tube_samples),
        orbit_tol: analysis.orbit_tol,
        shoot: db.shoot,
    };
    shoot.shoot.tol = s.newton_tol.unwrap_or(shoot.shoot.tol);
    shoot.shoot.max_iter = s.max_iter.unwrap_or(shoot.shoot.max_iter);
    shoot.shoot.flow = FlowOptions {
        method: s.method.unwrap_or(df.method),
        base_step: s.base_step.unwrap_or(df.base_step),
        richardson_tol: s.richardson_tol.unwrap_or(df.richardson_tol),
        max_refinements: df.max_refinements,
    };
    let levels = if ov.levels.is_empty() {
        s.levels.clone().unwrap_or_default()
    } else {
        ov.levels.clone()
    };
    Ok(ResolvedConfig {
        potential,
        u0,
        group,
        stabilizer: claim,
        analysis,
        shoot,
        levels,
        force: ov.force || s.force.unwrap_or(false),
        out: ov
            .out
            .clone()
            .or_else(|| cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    })
}

fn stabilizer(s: &StabilizerSection, group: &GroupSpec) -> Result<StabilizerClaim> {
    let n = group.n;
    match s.kind.as_str() {
        "trivial" => Ok(StabilizerClaim::trivial(n)),
        "S1" | "s1" => match (&s.coeffs, &s.generator) {
            (Some(c), None) => {
                if c.len() != group.lie_generators.len() {
                    bail!(
                        "stabilizer.coeffs has {} entries for {} lie generators",
                        c.len(),
                        group.lie_generators.len()
                    );
                }
                Ok(StabilizerClaim::circle(group, c.clone()))
            }
            (None, Some(g)) => Ok(StabilizerClaim::S1 {
                generator: matrix(g, "stabilizer.generator")?,
                coeffs: None,
            }),
            _ => bail!("an S1 stabilizer needs exactly one of coeffs or generator"),
        },
        "Zm" | "zm" => {
            let m = s.m.ok_or_else(|| anyhow!("a Zm stabilizer needs m"))?;
            if let Some(e) = &s.element {
                return Ok(StabilizerClaim::Zm {
                    m,
                    element: matrix(e, "stabilizer.element")?,
                    word: None,
                });
            }
            let word = GroupWord {
                exp_coeffs: s.exp_coeffs.clone().unwrap_or_default(),
                finite: s.finite.clone().unwrap_or_default(),
            };
            StabilizerClaim::cyclic(group, m, word).map_err(|e| anyhow!("stabilizer word: {e}"))
        }
        other => bail!("unknown stabilizer kind {other:?} (expected trivial, S1 or Zm)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RunConfig {
        toml::from_str(s).unwrap()
    }

    #[test]
    fn overrides_win() {
        let cfg = parse("[potential]\ncatalog = \"ring3d\"\n[analysis]\nlambda_max = 2.0\n");
        let r = resolve(
            &cfg,
            &Overrides {
                lambda_max: Some(1.2),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(r.analysis.lambda_max, Some(1.2));
        assert_eq!(r.u0, vec![1.0, 0.0, 0.0]);
        let r = resolve(
            &cfg,
            &Overrides {
                potential: Some("u1^2".into()),
                dim: Some(1),
                ..Overrides::default()
            },
        )
        .unwrap();
        assert_eq!(r.potential.catalog, None);
        assert_eq!(r.u0, vec![0.0]);
    }

    #[test]
    fn rejects_conflicts_and_bad_shapes() {
        let both = parse("[potential]\ncatalog = \"ring3d\"\nexpr = \"u1^2\"\ndim = 1\n");
        assert!(resolve(&both, &Overrides::default()).is_err());
        let short = parse("u0 = [1.0]\n[potential]\ncatalog = \"ring3d\"\n");
        assert!(resolve(&short, &Overrides::default()).unwrap_err().to_string().contains("u0 has 1"));
        let nodim = parse("[potential]\nexpr = \"u1^2\"\n");
        assert!(resolve(&nodim, &Overrides::default()).is_err());
        assert!(toml::from_str::<RunConfig>("[shoot]\nlevel = [1]\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let r = resolve(&parse("[potential]\ncatalog = \"torus4\"\n"), &Overrides::default()).unwrap();
        let back: ResolvedConfig = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
