//! Vector-valued polynomials with graded-lex coefficient maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::multi_index::{binomial, falling_factorial, MultiIndex};
use crate::Result;

/// A polynomial `R^n -> R^dim` stored as a sparse map from multi-indices to
/// coefficient vectors. Coefficients that are exactly zero are dropped, so
/// the zero polynomial has an empty map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct Polynomial {
    n: usize,
    dim: usize,
    coeffs: BTreeMap<MultiIndex, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    dim: usize,
    coeffs: Vec<CoeffEntry>,
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    alpha: Vec<usize>,
    c: Vec<f64>,
}

impl From<Polynomial> for PolyJson {
    fn from(p: Polynomial) -> Self {
        PolyJson {
            n: p.n,
            dim: p.dim,
            coeffs: p
                .coeffs
                .into_iter()
                .map(|(alpha, c)| CoeffEntry { alpha: alpha.0, c })
                .collect(),
        }
    }
}

impl TryFrom<PolyJson> for Polynomial {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        let mut p = Polynomial::zero(j.n, j.dim);
        for e in j.coeffs {
            if e.alpha.len() != j.n {
                return Err(Error::DimensionMismatch {
                    what: "polynomial multi-index",
                    expected: j.n,
                    got: e.alpha.len(),
                });
            }
            if e.c.len() != j.dim {
                return Err(Error::DimensionMismatch {
                    what: "polynomial coefficient",
                    expected: j.dim,
                    got: e.c.len(),
                });
            }
            p.add_to(MultiIndex(e.alpha), &e.c);
        }
        Ok(p)
    }
}

impl Polynomial {
    pub fn zero(n: usize, dim: usize) -> Self {
        Polynomial {
            n,
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    /// Scalar constant polynomial.
    pub fn constant(n: usize, value: &[f64]) -> Self {
        let mut p = Polynomial::zero(n, value.len());
        p.add_to(MultiIndex::zero(n), value);
        p
    }

    /// Scalar monomial `c * x^alpha` placed in component `comp`.
    pub fn monomial(n: usize, dim: usize, alpha: MultiIndex, comp: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(n, dim);
        let mut v = vec![0.0; dim];
        v[comp] = c;
        p.add_to(alpha, &v);
        p
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Maximal total order of a nonzero coefficient; `None` for the zero
    /// polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.keys().map(|a| a.order()).max()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<f64>)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<&Vec<f64>> {
        self.coeffs.get(alpha)
    }

    /// Adds `c` to the coefficient of `x^alpha`, pruning exact zeros.
    pub fn add_to(&mut self, alpha: MultiIndex, c: &[f64]) {
        debug_assert_eq!(alpha.len(), self.n);
        debug_assert_eq!(c.len(), self.dim);
        let entry = self
            .coeffs
            .entry(alpha.clone())
            .or_insert_with(|| vec![0.0; self.dim]);
        for (e, v) in entry.iter_mut().zip(c) {
            *e += v;
        }
        if entry.iter().all(|&v| v == 0.0) {
            self.coeffs.remove(&alpha);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (alpha, c) in &self.coeffs {
            let m = alpha.monomial(x);
            for (o, v) in out.iter_mut().zip(c) {
                *o += m * v;
            }
        }
        out
    }

    /// Euclidean norm of the value at `x`.
    pub fn eval_norm(&self, x: &[f64]) -> f64 {
        self.eval(x).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// l2 norm of all coefficients.
    pub fn coefficient_norm(&self) -> f64 {
        self.coeffs
            .values()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Polynomial {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            for v in c.iter_mut() {
                *v *= s;
            }
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (alpha, c) in &other.coeffs {
            out.add_to(alpha.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scaled(-1.0))
    }

    /// The polynomial `x -> p(x + t)`.
    pub fn shifted(&self, t: &[f64]) -> Polynomial {
        let mut out = Polynomial::zero(self.n, self.dim);
        for (beta, c) in &self.coeffs {
            // expand prod (x_i + t_i)^{beta_i}
            let mut terms: Vec<(MultiIndex, f64)> = vec![(MultiIndex::zero(self.n), 1.0)];
            for (axis, &b) in beta.0.iter().enumerate() {
                let mut next = Vec::with_capacity(terms.len() * (b + 1));
                for (gamma, w) in &terms {
                    for g in 0..=b {
                        let mut gi = gamma.clone();
                        gi.0[axis] = g;
                        let factor = binomial(b, g) * t[axis].powi((b - g) as i32);
                        next.push((gi, w * factor));
                    }
                }
                terms = next;
            }
            for (gamma, w) in terms {
                let cv: Vec<f64> = c.iter().map(|v| v * w).collect();
                out.add_to(gamma, &cv);
            }
        }
        out
    }

    /// The polynomial `x -> p(s * x)`.
    pub fn scaled_args(&self, s: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.n, self.dim);
        for (alpha, c) in &self.coeffs {
            let w = s.powi(alpha.order() as i32);
            let cv: Vec<f64> = c.iter().map(|v| v * w).collect();
            out.add_to(alpha.clone(), &cv);
        }
        out
    }

    /// Partial derivative `d^alpha p` (componentwise).
    pub fn derivative(&self, alpha: &MultiIndex) -> Polynomial {
        let mut out = Polynomial::zero(self.n, self.dim);
        for (beta, c) in &self.coeffs {
            if let Some(gamma) = beta.checked_sub(alpha) {
                let w = falling_factorial(beta, alpha);
                let cv: Vec<f64> = c.iter().map(|v| v * w).collect();
                out.add_to(gamma, &cv);
            }
        }
        out
    }

    /// Scalar polynomial holding one component.
    pub fn component(&self, comp: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.n, 1);
        for (alpha, c) in &self.coeffs {
            out.add_to(alpha.clone(), &[c[comp]]);
        }
        out
    }

    /// Pointwise dot product with another polynomial of the same codomain,
    /// returning the scalar polynomial `x -> p(x).q(x)`.
    pub fn dot(&self, other: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = Polynomial::zero(self.n, 1);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let s: f64 = ca.iter().zip(cb).map(|(x, y)| x * y).sum();
                if s != 0.0 {
                    out.add_to(a.add(b), &[s]);
                }
            }
        }
        out
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| c.iter().any(|&v| v != 0.0));
    }
}
