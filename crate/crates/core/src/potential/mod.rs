//! Potentials `U: R^n -> R` given as arithmetic expressions, with exact
//! first and second derivatives from forward-mode automatic differentiation.

mod catalog;
mod number;
mod parse;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{catalog, catalog_entry, CatalogEntry, CATALOG_NAMES};
pub use number::{Dual, HyperDual, Number};
pub use parse::{Expr, Func};

use parse::{Instr, Op};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("empty potential expression")]
    EmptySource,
    #[error("potential dimension must be positive")]
    ZeroDimension,
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable u{index} at offset {offset} is out of range 1..{dim}")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        dim: usize,
    },
    #[error("exponent at offset {offset} must be an integer")]
    NonIntegerExponent { offset: usize },
    #[error("domain error at offset {offset}: {what}")]
    Domain { offset: usize, what: &'static str },
    #[error("point has dimension {got}, potential expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A parsed potential. Immutable after construction.
#[derive(Clone)]
pub struct PotentialExpr {
    source: String,
    dim: usize,
    expr: Expr,
    tape: Vec<Instr>,
}

impl fmt::Debug for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialExpr")
            .field("source", &self.source)
            .field("dim", &self.dim)
            .finish()
    }
}

impl PartialEq for PotentialExpr {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.expr == other.expr
    }
}

impl Serialize for PotentialExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PotentialSource {
            expr: self.source.clone(),
            dim: self.dim,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PotentialExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let src = PotentialSource::deserialize(d)?;
        parse_potential(&src.expr, src.dim).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialSource {
    expr: String,
    dim: usize,
}

/// Parses `source` as a potential in the variables `u1..u{dim}`.
pub fn parse_potential(source: &str, dim: usize) -> Result<PotentialExpr, PotentialError> {
    let parsed = parse::parse(source, dim)?;
    Ok(PotentialExpr {
        source: source.to_string(),
        dim,
        expr: parsed.expr,
        tape: parsed.tape,
    })
}

impl PotentialExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ast(&self) -> &Expr {
        &self.expr
    }

    /// Canonical text form; parsing it yields the same tree.
    pub fn pretty(&self) -> String {
        self.expr.to_string()
    }

    fn check_dim(&self, u: &[f64]) -> Result<(), PotentialError> {
        if u.len() != self.dim {
            return Err(PotentialError::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        Ok(())
    }

    fn run<T: Number>(&self, inputs: &[T], slots: &mut Vec<T>) -> Result<T, PotentialError> {
        slots.clear();
        for ins in &self.tape {
            let v = match ins.op {
                Op::Const(x) => T::constant(x),
                Op::Var(i) => inputs[i],
                Op::Neg(a) => -slots[a],
                Op::Add(a, b) => slots[a] + slots[b],
                Op::Sub(a, b) => slots[a] - slots[b],
                Op::Mul(a, b) => slots[a] * slots[b],
                Op::Div(a, b) => {
                    if slots[b].value() == 0.0 {
                        return Err(PotentialError::Domain {
                            offset: ins.offset,
                            what: "division by zero",
                        });
                    }
                    slots[a] / slots[b]
                }
                Op::Pow(a, k) => {
                    if k < 0 && slots[a].value() == 0.0 {
                        return Err(PotentialError::Domain {
                            offset: ins.offset,
                            what: "negative power of zero",
                        });
                    }
                    slots[a].powi(k)
                }
                Op::Call(f, a) => {
                    let x = slots[a];
                    match f {
                        Func::Sin => x.sin(),
                        Func::Cos => x.cos(),
                        Func::Exp => x.exp(),
                        Func::Sqrt => {
                            let xv = x.value();
                            if xv < 0.0 {
                                return Err(PotentialError::Domain {
                                    offset: ins.offset,
                                    what: "sqrt of negative number",
                                });
                            }
                            if xv == 0.0 && T::CARRIES_DERIVATIVES {
                                return Err(PotentialError::Domain {
                                    offset: ins.offset,
                                    what: "sqrt is not differentiable at zero",
                                });
                            }
                            x.sqrt()
                        }
                    }
                }
            };
            if !v.value().is_finite() {
                return Err(PotentialError::Domain {
                    offset: ins.offset,
                    what: "non-finite intermediate value",
                });
            }
            slots.push(v);
        }
        Ok(*slots.last().expect("parser never yields an empty tape"))
    }

    /// `U(u)`.
    pub fn eval(&self, u: &[f64]) -> Result<f64, PotentialError> {
        self.check_dim(u)?;
        let mut slots = Vec::with_capacity(self.tape.len());
        self.run(u, &mut slots)
    }

    /// `grad U(u)`, one dual-number pass per coordinate.
    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>, PotentialError> {
        let mut g = vec![0.0; self.dim];
        self.gradient_into(u, &mut g)?;
        Ok(g)
    }

    /// Writes `grad U(u)` into `out` and returns `U(u)`.
    pub fn gradient_into(&self, u: &[f64], out: &mut [f64]) -> Result<f64, PotentialError> {
        self.check_dim(u)?;
        let mut inputs: Vec<Dual> = u.iter().map(|&x| Dual::new(x, 0.0)).collect();
        let mut slots = Vec::with_capacity(self.tape.len());
        let mut value = 0.0;
        for i in 0..self.dim {
            inputs[i].du = 1.0;
            let r = self.run(&inputs, &mut slots)?;
            inputs[i].du = 0.0;
            out[i] = r.du;
            value = r.re;
        }
        Ok(value)
    }

    /// `grad^2 U(u)` from hyper-dual passes over the upper triangle, mirrored,
    /// so the result equals its transpose exactly.
    pub fn hessian(&self, u: &[f64]) -> Result<DMatrix<f64>, PotentialError> {
        self.check_dim(u)?;
        let n = self.dim;
        let mut h = DMatrix::zeros(n, n);
        let mut inputs: Vec<HyperDual> = u.iter().map(|&x| HyperDual::constant(x)).collect();
        let mut slots = Vec::with_capacity(self.tape.len());
        for i in 0..n {
            for j in i..n {
                inputs[i].d1 = 1.0;
                inputs[j].d2 = 1.0;
                let r = self.run(&inputs, &mut slots)?;
                inputs[i].d1 = 0.0;
                inputs[j].d2 = 0.0;
                h[(i, j)] = r.d12;
                h[(j, i)] = r.d12;
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn eval_examples() {
        let p = parse_potential("u1^2+u2^2", 2).unwrap();
        assert_eq!(p.eval(&[3.0, 4.0]).unwrap(), 25.0);
        let ring = parse_potential("(u1^2+u2^2-1)^2/4", 2).unwrap();
        assert_eq!(ring.eval(&[1.0, 0.0]).unwrap(), 0.0);
        let r3 = catalog_entry("ring3d").unwrap();
        assert_eq!(r3.potential.eval(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn gradient_example() {
        let p = parse_potential("u1^2+u2^2", 2).unwrap();
        assert_eq!(p.gradient(&[1.0, 2.0]).unwrap(), vec![2.0, 4.0]);
    }

    #[test]
    fn ring3d_hessian_eigenvalues() {
        // (r^2-1)^2/4 + z^2/2 at (1,0,0): d2/dx2 = 2, tangent 0, d2/dz2 = 1.
        let r3 = catalog_entry("ring3d").unwrap();
        let h = r3.potential.hessian(&[1.0, 0.0, 0.0]).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((h - expected).abs().max() < 1e-14);
    }

    #[test]
    fn domain_errors_carry_location() {
        let p = parse_potential("u1 + sqrt(u2)", 2).unwrap();
        assert_eq!(
            p.eval(&[0.0, -1.0]),
            Err(PotentialError::Domain {
                offset: 5,
                what: "sqrt of negative number"
            })
        );
        let q = parse_potential("1/(u1-u2)", 2).unwrap();
        assert!(matches!(
            q.eval(&[1.0, 1.0]),
            Err(PotentialError::Domain { offset: 1, .. })
        ));
        assert!(matches!(
            p.gradient(&[0.0, 0.0]),
            Err(PotentialError::Domain { .. })
        ));
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            p.eval(&[1.0]),
            Err(PotentialError::DimensionMismatch { .. })
        ));
    }

    fn central_gradient(p: &PotentialExpr, u: &[f64], h: f64) -> Vec<f64> {
        (0..u.len())
            .map(|i| {
                let mut a = u.to_vec();
                let mut b = u.to_vec();
                a[i] += h;
                b[i] -= h;
                (p.eval(&a).unwrap() - p.eval(&b).unwrap()) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = parse_potential(
            "(u1^2+u2^2-1)^2/4 + u3^2/2 + sin(u1*u2)*exp(-u3^2) + sqrt(2 + cos(u2))",
            3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let g = p.gradient(&u).unwrap();
            let fd = central_gradient(&p, &u, 1e-5);
            for (a, b) in g.iter().zip(&fd) {
                assert!((a - b).abs() <= 1e-6 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn hessian_matches_differences_of_gradient_and_is_symmetric() {
        let p = parse_potential("u1^4*u2 - 3*u1*u2^3/(1+u3^2) + cos(u1+u3)", 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let h = p.hessian(&u).unwrap();
            assert_eq!(h, h.transpose());
            let step = 1e-5;
            for j in 0..3 {
                let mut a = u.clone();
                let mut b = u.clone();
                a[j] += step;
                b[j] -= step;
                let ga = p.gradient(&a).unwrap();
                let gb = p.gradient(&b).unwrap();
                for i in 0..3 {
                    let fd = (ga[i] - gb[i]) / (2.0 * step);
                    assert!((h[(i, j)] - fd).abs() <= 1e-6 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn serde_round_trip_through_source() {
        let p = parse_potential("u1^2 - u2", 2).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"expr":"u1^2 - u2","dim":2}"#);
        let back: PotentialExpr = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
