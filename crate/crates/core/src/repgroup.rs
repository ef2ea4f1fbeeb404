//! Matrix groups Γ ⊂ O(n), stabilizer claims and isotypical decompositions of
//! circle and cyclic representations.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, rows};

pub const SKEW_TOL: f64 = 1e-12;
pub const ORTHO_TOL: f64 = 1e-12;
pub const ORDER_TOL: f64 = 1e-10;
pub const FREQUENCY_TOL: f64 = 1e-6;
pub const ANGLE_TOL: f64 = 1e-8;
/// Default tolerance for "fixes u0" style checks.
pub const FIX_TOL: f64 = 1e-10;

const IDENTITY_SEPARATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("matrix is {rows}x{cols}, expected {expected}x{expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("matrix is not skew-symmetric (defect {defect:.3e})")]
    NotSkew { defect: f64 },
    #[error("matrix is not orthogonal (defect {defect:.3e})")]
    NotOrthogonal { defect: f64 },
    #[error("finite generator {index}: g^{order} differs from I by {defect:.3e}")]
    WrongOrder {
        index: usize,
        order: u32,
        defect: f64,
    },
    #[error("g^{m} differs from I by {defect:.3e}")]
    NotPeriodic { m: u32, defect: f64 },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("frequency {value} is not an integer within tolerance")]
    NonIntegerFrequency { value: f64 },
    #[error("weight {weight} has odd real multiplicity {count}")]
    UnpairedWeight { weight: u32, count: usize },
    #[error("eigen-angle {angle} is not a multiple of 2pi/{m}")]
    AngleNotMultiple { angle: f64, m: u32 },
    #[error("the -1 eigenspace has odd dimension {dim}")]
    OddMinusOneEigenspace { dim: usize },
    #[error("decompositions are over different groups ({0} vs {1})")]
    KindMismatch(HKind, HKind),
    #[error("malformed decomposition: {0}")]
    Malformed(String),
    #[error("word refers to {what} {index}, group has {available}")]
    BadWord {
        what: &'static str,
        index: usize,
        available: usize,
    },
}

/// Stabilizer type of the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HKind {
    S1,
    Zm(u32),
}

impl fmt::Display for HKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HKind::S1 => write!(f, "S1"),
            HKind::Zm(m) => write!(f, "Z{m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotypicBlock {
    pub multiplicity: usize,
    pub weight: u32,
}

/// `R[k0,0] ⊕ R[k1,m1] ⊕ … ⊕ R[kp,mp]` with strictly increasing weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotypicalDecomposition {
    pub kind: HKind,
    pub k0: usize,
    pub blocks: Vec<IsotypicBlock>,
}

impl IsotypicalDecomposition {
    pub fn new(kind: HKind, k0: usize, blocks: &[(usize, u32)]) -> Result<Self, RepError> {
        let d = Self {
            kind,
            k0,
            blocks: blocks
                .iter()
                .map(|&(multiplicity, weight)| IsotypicBlock {
                    multiplicity,
                    weight,
                })
                .collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn trivial(kind: HKind, k0: usize) -> Self {
        Self {
            kind,
            k0,
            blocks: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), RepError> {
        if let HKind::Zm(0) = self.kind {
            return Err(RepError::ZeroOrder);
        }
        let mut prev = 0u32;
        for b in &self.blocks {
            if b.multiplicity == 0 {
                return Err(RepError::Malformed(format!(
                    "weight {} has multiplicity 0",
                    b.weight
                )));
            }
            if b.weight == 0 {
                return Err(RepError::Malformed(
                    "weight 0 belongs in k0, not in a block".into(),
                ));
            }
            if let HKind::Zm(m) = self.kind {
                if b.weight >= m {
                    return Err(RepError::Malformed(format!(
                        "weight {} outside 1..{} for Z{m}",
                        b.weight,
                        m - 1
                    )));
                }
            }
            if b.weight <= prev {
                return Err(RepError::Malformed(
                    "weights must be strictly increasing".into(),
                ));
            }
            prev = b.weight;
        }
        Ok(())
    }

    pub fn sum_k(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity).sum()
    }

    pub fn dim(&self) -> usize {
        self.k0 + 2 * self.sum_k()
    }

    /// Direct sum of two representations of the same group.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, RepError> {
        if self.kind != other.kind {
            return Err(RepError::KindMismatch(self.kind, other.kind));
        }
        let mut blocks = self.blocks.clone();
        for b in &other.blocks {
            match blocks.iter_mut().find(|x| x.weight == b.weight) {
                Some(x) => x.multiplicity += b.multiplicity,
                None => blocks.push(*b),
            }
        }
        blocks.sort_by_key(|b| b.weight);
        Ok(Self {
            kind: self.kind,
            k0: self.k0 + other.k0,
            blocks,
        })
    }

    /// `V ⊕ V`, e.g. the `a cos kt + b sin kt` copy of an eigenspace.
    pub fn doubled(&self) -> Self {
        self.direct_sum(self).expect("same kind")
    }
}

impl fmt::Display for IsotypicalDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R[{},0]", self.k0)?;
        for b in &self.blocks {
            write!(f, "+R[{},{}]", b.multiplicity, b.weight)?;
        }
        write!(f, " over {}", self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGenerator {
    #[serde(with = "rows")]
    pub matrix: DMatrix<f64>,
    pub order: u32,
}

/// Compact matrix group generated by one-parameter subgroups `exp(tA)` and
/// finitely many orthogonal matrices of finite order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub n: usize,
    #[serde(with = "rows::vec")]
    pub lie_generators: Vec<DMatrix<f64>>,
    pub finite_generators: Vec<FiniteGenerator>,
}

fn check_shape(m: &DMatrix<f64>, n: usize) -> Result<(), RepError> {
    if m.nrows() != n || m.ncols() != n {
        return Err(RepError::Shape {
            rows: m.nrows(),
            cols: m.ncols(),
            expected: n,
        });
    }
    Ok(())
}

impl GroupSpec {
    pub fn new(
        n: usize,
        lie_generators: Vec<DMatrix<f64>>,
        finite_generators: Vec<FiniteGenerator>,
    ) -> Result<Self, RepError> {
        let g = Self {
            n,
            lie_generators,
            finite_generators,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            lie_generators: Vec::new(),
            finite_generators: Vec::new(),
        }
    }

    /// One circle acting on coordinate planes `(i, i+1)` (0-based `i`) with the
    /// given integer weights; other coordinates are fixed.
    pub fn weighted_circle_generator(n: usize, planes: &[(usize, i32)]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for &(i, w) in planes {
            a[(i, i + 1)] = -(w as f64);
            a[(i + 1, i)] = w as f64;
        }
        a
    }

    pub fn validate(&self) -> Result<(), RepError> {
        for a in &self.lie_generators {
            check_shape(a, self.n)?;
            let defect = linalg::max_abs_diff(a, &(-a.transpose()));
            if defect > SKEW_TOL {
                return Err(RepError::NotSkew { defect });
            }
        }
        for (index, f) in self.finite_generators.iter().enumerate() {
            check_shape(&f.matrix, self.n)?;
            if f.order == 0 {
                return Err(RepError::ZeroOrder);
            }
            let defect = linalg::orthogonality_defect(&f.matrix);
            if defect > ORTHO_TOL {
                return Err(RepError::NotOrthogonal { defect });
            }
            let defect = linalg::max_abs_diff(
                &linalg::matrix_power(&f.matrix, f.order),
                &DMatrix::identity(self.n, self.n),
            );
            if defect > ORDER_TOL {
                return Err(RepError::WrongOrder {
                    index,
                    order: f.order,
                    defect,
                });
            }
        }
        Ok(())
    }

    /// Dimension of the Lie algebra spanned by the generators.
    pub fn lie_dim(&self) -> usize {
        if self.lie_generators.is_empty() {
            return 0;
        }
        let nn = self.n * self.n;
        let mut m = DMatrix::zeros(nn, self.lie_generators.len());
        for (j, a) in self.lie_generators.iter().enumerate() {
            for (i, x) in a.iter().enumerate() {
                m[(i, j)] = *x;
            }
        }
        linalg::numerical_rank(&m, 1e-10, 1e-14)
    }

    pub fn exp_combination(&self, coeffs: &[f64]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (c, g) in coeffs.iter().zip(&self.lie_generators) {
            a += g * *c;
        }
        a.exp()
    }

    /// Evaluates a word `exp(Σ c_j A_j) · F_{i1} ⋯ F_{ik}`.
    pub fn evaluate_word(&self, word: &GroupWord) -> Result<DMatrix<f64>, RepError> {
        if word.exp_coeffs.len() > self.lie_generators.len() {
            return Err(RepError::BadWord {
                what: "lie generator",
                index: word.exp_coeffs.len() - 1,
                available: self.lie_generators.len(),
            });
        }
        let mut g = self.exp_combination(&word.exp_coeffs);
        for &i in &word.finite {
            let f = self.finite_generators.get(i).ok_or(RepError::BadWord {
                what: "finite generator",
                index: i,
                available: self.finite_generators.len(),
            })?;
            g = &g * &f.matrix;
        }
        Ok(g)
    }

    /// A random group element: random one-parameter flows times a short word in
    /// the finite generators.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DMatrix<f64> {
        let mut g = DMatrix::identity(self.n, self.n);
        for a in &self.lie_generators {
            let t: f64 = rng.gen_range(0.0..2.0 * PI);
            g = (a * t).exp() * g;
        }
        if !self.finite_generators.is_empty() {
            let len = rng.gen_range(0..4);
            for _ in 0..len {
                let f = &self.finite_generators[rng.gen_range(0..self.finite_generators.len())];
                g = &f.matrix * g;
            }
        }
        g
    }
}

/// `exp(Σ exp_coeffs[j] · A_j)` followed by the finite generators listed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupWord {
    #[serde(default)]
    pub exp_coeffs: Vec<f64>,
    #[serde(default)]
    pub finite: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum StabilizerClaim {
    /// Circle `exp(t A)`, normalized so that `exp(2π A) = I`.
    S1 {
        #[serde(with = "rows")]
        generator: DMatrix<f64>,
        #[serde(default)]
        coeffs: Option<Vec<f64>>,
    },
    /// Cyclic group generated by `element` of order `m`.
    Zm {
        m: u32,
        #[serde(with = "rows")]
        element: DMatrix<f64>,
        #[serde(default)]
        word: Option<GroupWord>,
    },
}

impl StabilizerClaim {
    pub fn trivial(n: usize) -> Self {
        StabilizerClaim::Zm {
            m: 1,
            element: DMatrix::identity(n, n),
            word: Some(GroupWord::default()),
        }
    }

    pub fn circle(group: &GroupSpec, coeffs: Vec<f64>) -> Self {
        let mut a = DMatrix::zeros(group.n, group.n);
        for (c, g) in coeffs.iter().zip(&group.lie_generators) {
            a += g * *c;
        }
        StabilizerClaim::S1 {
            generator: a,
            coeffs: Some(coeffs),
        }
    }

    pub fn cyclic(group: &GroupSpec, m: u32, word: GroupWord) -> Result<Self, RepError> {
        let element = group.evaluate_word(&word)?;
        Ok(StabilizerClaim::Zm {
            m,
            element,
            word: Some(word),
        })
    }

    pub fn kind(&self) -> HKind {
        match self {
            StabilizerClaim::S1 { .. } => HKind::S1,
            StabilizerClaim::Zm { m, .. } => HKind::Zm(*m),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StabilizerClaim::S1 { generator, .. } => generator.nrows(),
            StabilizerClaim::Zm { element, .. } => element.nrows(),
        }
    }

    /// The operator whose restriction determines the H-representation: the
    /// circle generator or the cyclic generator.
    pub fn operator(&self) -> &DMatrix<f64> {
        match self {
            StabilizerClaim::S1 { generator, .. } => generator,
            StabilizerClaim::Zm { element, .. } => element,
        }
    }

    /// Isotypical decomposition of the claim's action on the span of an
    /// orthonormal, H-invariant `basis`.
    pub fn decompose_on(&self, basis: &[DVector<f64>]) -> Result<IsotypicalDecomposition, RepError> {
        let restricted = linalg::restrict(self.operator(), basis);
        match self {
            StabilizerClaim::S1 { .. } => decompose_s1(&restricted),
            StabilizerClaim::Zm { m, .. } => decompose_zm(&restricted, *m),
        }
    }

    /// Largest deviation from commuting with a symmetric operator `h`.
    pub fn commutator_defect(&self, h: &DMatrix<f64>) -> f64 {
        let a = self.operator();
        (a * h - h * a).amax()
    }
}

/// `dim Γ(u0)`: rank of the tangent vectors `A_j u0`.
pub fn orbit_tangent_dim(group: &GroupSpec, u0: &[f64], tol: f64) -> usize {
    let u = DVector::from_column_slice(u0);
    let cols: Vec<DVector<f64>> = group.lie_generators.iter().map(|a| a * &u).collect();
    if cols.is_empty() {
        return 0;
    }
    let m = linalg::columns(group.n, &cols);
    linalg::numerical_rank(&m, tol, 1e-12 * (1.0 + u.norm()))
}

/// Orthonormal basis of the orbit tangent space `span{A_j u0}`.
pub fn orbit_tangent_basis(group: &GroupSpec, u0: &[f64], tol: f64) -> Vec<DVector<f64>> {
    let u = DVector::from_column_slice(u0);
    let cols: Vec<DVector<f64>> = group.lie_generators.iter().map(|a| a * &u).collect();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale <= 1e-12 * (1.0 + u.norm()) {
        return Vec::new();
    }
    linalg::orthonormal_basis(group.n, &cols, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, residual: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            residual,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizerVerdict {
    pub kind: HKind,
    pub confirmed: bool,
    pub checks: Vec<Check>,
    pub trust_note: String,
}

impl StabilizerVerdict {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const TRUST_NOTE: &str = "the claimed subgroup is checked against each one-parameter generator \
and each finite generator separately; that it is the full stabilizer of u0 is trusted, not proven";

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Squared norm of `v` in each integer-weight eigenspace of a 2π-periodic skew `a`.
fn weight_components(a: &DMatrix<f64>, v: &DVector<f64>) -> Result<Vec<(u32, f64)>, RepError> {
    let eig = linalg::sorted_symmetric_eigen(&(a.transpose() * a));
    let mut out: Vec<(u32, f64)> = Vec::new();
    for (val, vec) in eig.values.iter().zip(&eig.vectors) {
        let w = val.max(0.0).sqrt();
        let r = w.round();
        if (w - r).abs() > FREQUENCY_TOL {
            return Err(RepError::NonIntegerFrequency { value: w });
        }
        let c = vec.dot(v).powi(2);
        let r = r as u32;
        match out.iter_mut().find(|(x, _)| *x == r) {
            Some(e) => e.1 += c,
            None => out.push((r, c)),
        }
    }
    Ok(out)
}

fn powers(g: &DMatrix<f64>, m: u32) -> Vec<DMatrix<f64>> {
    let n = g.nrows();
    let mut out = Vec::with_capacity(m as usize);
    let mut acc = DMatrix::identity(n, n);
    for _ in 0..m {
        out.push(acc.clone());
        acc = &acc * g;
    }
    out
}

fn in_cyclic(h: &DMatrix<f64>, pw: &[DMatrix<f64>]) -> f64 {
    pw.iter()
        .map(|p| linalg::max_abs_diff(h, p))
        .fold(f64::INFINITY, f64::min)
}

/// Checks a stabilizer claim at `u0` and reports every check performed.
pub fn verify_stabilizer(
    group: &GroupSpec,
    u0: &[f64],
    claim: &StabilizerClaim,
    tol: f64,
) -> StabilizerVerdict {
    let n = group.n;
    let mut checks = Vec::new();
    let shape_ok = claim.dim() == n && u0.len() == n && claim.operator().is_square();
    checks.push(Check::new(
        "dimensions agree",
        shape_ok,
        None,
        format!("group n = {n}, claim {}x{}, u0 len {}", claim.dim(), claim.dim(), u0.len()),
    ));
    if !shape_ok {
        return StabilizerVerdict {
            kind: claim.kind(),
            confirmed: false,
            checks,
            trust_note: TRUST_NOTE.into(),
        };
    }
    let u = DVector::from_column_slice(u0);
    let eye = DMatrix::<f64>::identity(n, n);
    let orbit_dim = orbit_tangent_dim(group, u0, 1e-8);
    let lie_dim = group.lie_dim();

    match claim {
        StabilizerClaim::S1 { generator, coeffs } => {
            let a = generator;
            let skew = linalg::max_abs_diff(a, &(-a.transpose()));
            checks.push(Check::new(
                "generator is skew-symmetric",
                skew <= SKEW_TOL,
                Some(skew),
                "",
            ));
            let nonzero = a.amax() > 1e-12;
            checks.push(Check::new(
                "generator is nonzero",
                nonzero,
                Some(a.amax()),
                "",
            ));
            let period = linalg::max_abs_diff(&(a * (2.0 * PI)).exp(), &eye);
            checks.push(Check::new(
                "exp(2pi A) = I",
                period <= ORDER_TOL,
                Some(period),
                "",
            ));
            let fix = (a * &u).norm();
            checks.push(Check::new(
                if fix <= tol { "generator fixes u0" } else { "generator does not fix u0" },
                fix <= tol,
                Some(fix),
                "",
            ));
            let (member, detail) = match coeffs {
                Some(c) if c.len() <= group.lie_generators.len() => {
                    let mut b = DMatrix::zeros(n, n);
                    for (ci, g) in c.iter().zip(&group.lie_generators) {
                        b += g * *ci;
                    }
                    (linalg::max_abs_diff(&b, a), "rebuilt from coefficients".to_string())
                }
                Some(c) => (
                    f64::INFINITY,
                    format!("{} coefficients for {} generators", c.len(), group.lie_generators.len()),
                ),
                None => (span_residual(group, a), "least-squares projection onto generators".into()),
            };
            checks.push(Check::new(
                "generator lies in the Lie algebra",
                member <= 1e-10,
                Some(member),
                detail,
            ));
            let stab_dim = lie_dim as i64 - orbit_dim as i64;
            checks.push(Check::new(
                "stabilizer dimension is 1",
                stab_dim == 1,
                None,
                format!("dim group {lie_dim} - dim orbit {orbit_dim} = {stab_dim}"),
            ));
            for (i, f) in group.finite_generators.iter().enumerate() {
                if (&f.matrix * &u - &u).norm() > tol {
                    continue;
                }
                let best = (0..720)
                    .map(|s| {
                        let t = 2.0 * PI * s as f64 / 720.0;
                        linalg::max_abs_diff(&(a * t).exp(), &f.matrix)
                    })
                    .fold(f64::INFINITY, f64::min);
                checks.push(Check::new(
                    "finite generator fixing u0 lies in the circle",
                    best <= 1e-2,
                    Some(best),
                    format!("finite generator {i}"),
                ));
            }
        }
        StabilizerClaim::Zm { m, element, word } => {
            let m = *m;
            let g = element;
            checks.push(Check::new("order m >= 1", m >= 1, None, format!("m = {m}")));
            if m == 0 {
                return finish(claim, checks);
            }
            let ortho = linalg::orthogonality_defect(g);
            checks.push(Check::new(
                "element is orthogonal",
                ortho <= ORTHO_TOL.max(1e-10),
                Some(ortho),
                "",
            ));
            let membership = match word {
                Some(w) => match group.evaluate_word(w) {
                    Ok(h) => {
                        let d = linalg::max_abs_diff(&h, g);
                        Check::new("element lies in the group", d <= 1e-10, Some(d), "rebuilt from word")
                    }
                    Err(e) => Check::new("element lies in the group", false, None, e.to_string()),
                },
                None => {
                    let d = linalg::max_abs_diff(g, &eye);
                    Check::new(
                        "element lies in the group",
                        d <= 1e-10,
                        Some(d),
                        if d <= 1e-10 { "identity" } else { "no word supplied; membership unverified" },
                    )
                }
            };
            checks.push(membership);
            let gm = linalg::max_abs_diff(&linalg::matrix_power(g, m), &eye);
            checks.push(Check::new("g^m = I", gm <= ORDER_TOL, Some(gm), ""));
            let pw = powers(g, m);
            let min_sep = pw
                .iter()
                .skip(1)
                .map(|p| linalg::max_abs_diff(p, &eye))
                .fold(f64::INFINITY, f64::min);
            checks.push(Check::new(
                "order is exactly m",
                m == 1 || min_sep > IDENTITY_SEPARATION,
                if m == 1 { None } else { Some(min_sep) },
                "g^j != I for 1 <= j < m",
            ));
            let fix = (g * &u - &u).norm();
            checks.push(Check::new(
                if fix <= tol { "generator fixes u0" } else { "generator does not fix u0" },
                fix <= tol,
                Some(fix),
                "",
            ));
            let stab_dim = lie_dim as i64 - orbit_dim as i64;
            checks.push(Check::new(
                "stabilizer dimension is 0",
                stab_dim == 0,
                None,
                format!("dim group {lie_dim} - dim orbit {orbit_dim} = {stab_dim}"),
            ));
            for (j, a) in group.lie_generators.iter().enumerate() {
                let comps = match weight_components(a, &u) {
                    Ok(c) => c,
                    Err(_) => {
                        checks.push(Check::new(
                            "circle stabilizer contained in claim",
                            true,
                            None,
                            format!("lie generator {j} is not 2pi-periodic; skipped"),
                        ));
                        continue;
                    }
                };
                let scale = u.norm_squared().max(1e-300);
                let r = comps
                    .iter()
                    .filter(|(w, c)| *w > 0 && *c > 1e-20 * scale.max(1.0))
                    .fold(0u32, |acc, (w, _)| gcd(acc, *w));
                if r == 0 {
                    // the whole circle fixes u0; already caught by the dimension check
                    continue;
                }
                let h = (a * (2.0 * PI / r as f64)).exp();
                let d = in_cyclic(&h, &pw);
                checks.push(Check::new(
                    "circle stabilizer contained in claim",
                    d <= 1e-8,
                    Some(d),
                    format!("lie generator {j}: u0 is fixed by a cyclic subgroup of order {r}"),
                ));
            }
            for (i, f) in group.finite_generators.iter().enumerate() {
                if (&f.matrix * &u - &u).norm() > tol {
                    continue;
                }
                let d = in_cyclic(&f.matrix, &pw);
                checks.push(Check::new(
                    "finite generator fixing u0 lies in claim",
                    d <= 1e-8,
                    Some(d),
                    format!("finite generator {i}"),
                ));
            }
        }
    }
    finish(claim, checks)
}

fn finish(claim: &StabilizerClaim, checks: Vec<Check>) -> StabilizerVerdict {
    StabilizerVerdict {
        kind: claim.kind(),
        confirmed: checks.iter().all(|c| c.passed),
        checks,
        trust_note: TRUST_NOTE.into(),
    }
}

/// Distance from `a` to the span of the group's lie generators.
fn span_residual(group: &GroupSpec, a: &DMatrix<f64>) -> f64 {
    if group.lie_generators.is_empty() {
        return a.amax();
    }
    let nn = group.n * group.n;
    let mut m = DMatrix::zeros(nn, group.lie_generators.len());
    for (j, g) in group.lie_generators.iter().enumerate() {
        for (i, x) in g.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    let b = DVector::from_iterator(nn, a.iter().copied());
    let svd = m.clone().svd(true, true);
    let c = svd.solve(&b, 1e-12).expect("U and V computed");
    (m * c - b).amax()
}

/// Decomposes the circle representation `exp(tA)` on `W` (A given in an
/// orthonormal basis of `W`).
pub fn decompose_s1(a: &DMatrix<f64>) -> Result<IsotypicalDecomposition, RepError> {
    if !a.is_square() {
        return Err(RepError::Shape {
            rows: a.nrows(),
            cols: a.ncols(),
            expected: a.nrows(),
        });
    }
    let defect = linalg::max_abs_diff(a, &(-a.transpose()));
    if defect > 1e-9 * a.amax().max(1.0) {
        return Err(RepError::NotSkew { defect });
    }
    let eig = linalg::sorted_symmetric_eigen(&(a.transpose() * a));
    let mut counts: Vec<(u32, usize)> = Vec::new();
    for val in &eig.values {
        let w = val.max(0.0).sqrt();
        let r = w.round();
        if (w - r).abs() > FREQUENCY_TOL {
            return Err(RepError::NonIntegerFrequency { value: w });
        }
        let r = r as u32;
        match counts.iter_mut().find(|(x, _)| *x == r) {
            Some(e) => e.1 += 1,
            None => counts.push((r, 1)),
        }
    }
    assemble(HKind::S1, counts)
}

fn assemble(kind: HKind, mut counts: Vec<(u32, usize)>) -> Result<IsotypicalDecomposition, RepError> {
    counts.sort_by_key(|c| c.0);
    let mut k0 = 0;
    let mut blocks = Vec::new();
    for (w, c) in counts {
        if w == 0 {
            k0 = c;
            continue;
        }
        if c % 2 != 0 {
            if let HKind::Zm(m) = kind {
                if 2 * w == m {
                    return Err(RepError::OddMinusOneEigenspace { dim: c });
                }
            }
            return Err(RepError::UnpairedWeight { weight: w, count: c });
        }
        blocks.push(IsotypicBlock {
            multiplicity: c / 2,
            weight: w,
        });
    }
    let d = IsotypicalDecomposition { kind, k0, blocks };
    d.validate()?;
    Ok(d)
}

/// Decomposes the `Z_m` representation generated by orthogonal `g` on `W`.
/// Weights are reported in canonical form `l ≤ m/2` (weights `l` and `m - l`
/// give equivalent real representations).
pub fn decompose_zm(g: &DMatrix<f64>, m: u32) -> Result<IsotypicalDecomposition, RepError> {
    if m == 0 {
        return Err(RepError::ZeroOrder);
    }
    if !g.is_square() {
        return Err(RepError::Shape {
            rows: g.nrows(),
            cols: g.ncols(),
            expected: g.nrows(),
        });
    }
    let n = g.nrows();
    let ortho = linalg::orthogonality_defect(g);
    if ortho > 1e-9 {
        return Err(RepError::NotOrthogonal { defect: ortho });
    }
    let defect = linalg::max_abs_diff(&linalg::matrix_power(g, m), &DMatrix::identity(n, n));
    if defect > 1e-9 {
        return Err(RepError::NotPeriodic { m, defect });
    }
    let sym = (g + g.transpose()) * 0.5;
    let skew = (g - g.transpose()) * 0.5;
    let eig = linalg::sorted_symmetric_eigen(&sym);
    let step = 2.0 * PI / m as f64;
    let mut counts: Vec<(u32, usize)> = Vec::new();
    for (c, v) in eig.values.iter().zip(&eig.vectors) {
        let s = (&skew * v).norm();
        let theta = s.atan2(*c);
        let l = (theta / step).round();
        if (theta - l * step).abs() > ANGLE_TOL {
            return Err(RepError::AngleNotMultiple { angle: theta, m });
        }
        let l = l as u32;
        match counts.iter_mut().find(|(x, _)| *x == l) {
            Some(e) => e.1 += 1,
            None => counts.push((l, 1)),
        }
    }
    assemble(HKind::Zm(m), counts)
}
