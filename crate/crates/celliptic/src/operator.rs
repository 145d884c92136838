//! Homogeneous constant-coefficient differential operators given by one
//! coefficient matrix per top-order multi-index, with exact symbol
//! evaluation and symbolic application to polynomials.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::multi_index::{falling_factorial, MultiIndex};
use crate::polynomial::Polynomial;
use crate::Result;

/// Operator `u -> sum_{|alpha| = k} A_alpha d^alpha u` mapping V-valued to
/// W-valued functions on `R^n`. All coefficient matrices are `dim_w x dim_v`.
///
/// Immutable after construction; all methods are pure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct Operator {
    n: usize,
    k: usize,
    dim_v: usize,
    dim_w: usize,
    terms: BTreeMap<MultiIndex, DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n: usize,
    k: usize,
    dim_v: usize,
    dim_w: usize,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<usize>,
    /// Row-major, `dim_w` rows by `dim_v` columns.
    matrix: Vec<Vec<f64>>,
}

impl From<Operator> for OperatorJson {
    fn from(op: Operator) -> Self {
        OperatorJson {
            n: op.n,
            k: op.k,
            dim_v: op.dim_v,
            dim_w: op.dim_w,
            terms: op
                .terms
                .into_iter()
                .map(|(alpha, m)| TermJson {
                    alpha: alpha.0,
                    matrix: (0..m.nrows())
                        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                        .collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in j.terms {
            if t.matrix.len() != j.dim_w || t.matrix.iter().any(|r| r.len() != j.dim_v) {
                return Err(Error::InvalidOperator(format!(
                    "term {:?}: matrix must be {} x {} row-major",
                    t.alpha, j.dim_w, j.dim_v
                )));
            }
            let m = DMatrix::from_fn(j.dim_w, j.dim_v, |i, jj| t.matrix[i][jj]);
            terms.push((MultiIndex(t.alpha), m));
        }
        Ok(Operator::new(j.n, j.k, j.dim_v, j.dim_w, terms))
    }
}

/// Outcome of [`Operator::validate`]: `ok` with an empty violation list, or
/// a description of every broken invariant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Symbol matrix at one (possibly complex) frequency.
#[derive(Clone, Debug)]
pub struct SymbolValue {
    pub matrix: DMatrix<Complex64>,
    pub frequency: Vec<Complex64>,
}

impl Operator {
    /// Builds the operator without validating; call [`Operator::validate`]
    /// on untrusted data.
    pub fn new(
        n: usize,
        k: usize,
        dim_v: usize,
        dim_w: usize,
        terms: Vec<(MultiIndex, DMatrix<f64>)>,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (alpha, m) in terms {
            map.insert(alpha, m);
        }
        Operator {
            n,
            k,
            dim_v,
            dim_w,
            terms: map,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn dim_v(&self) -> usize {
        self.dim_v
    }

    pub fn dim_w(&self) -> usize {
        self.dim_w
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &DMatrix<f64>)> {
        self.terms.iter()
    }

    /// Checks every structural invariant, reporting all violations instead
    /// of failing on the first.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.n < 2 {
            violations.push(format!(
                "ambient dimension must satisfy n >= 2, got {}",
                self.n
            ));
        }
        if self.k < 1 {
            violations.push("order must satisfy k >= 1".into());
        }
        if self.dim_v < 1 || self.dim_w < 1 {
            violations.push("dim_v and dim_w must be positive".into());
        }
        if self.terms.is_empty() {
            violations.push("operator has no terms".into());
        }
        let mut any_nonzero = false;
        for (alpha, m) in &self.terms {
            if alpha.len() != self.n {
                violations.push(format!(
                    "multi-index {alpha} has length {} != n = {}",
                    alpha.len(),
                    self.n
                ));
                continue;
            }
            if alpha.order() != self.k {
                violations.push(format!(
                    "non-homogeneous term: |{alpha}| = {} != k = {}",
                    alpha.order(),
                    self.k
                ));
            }
            if m.nrows() != self.dim_w || m.ncols() != self.dim_v {
                violations.push(format!(
                    "term {alpha}: matrix is {} x {}, expected {} x {}",
                    m.nrows(),
                    m.ncols(),
                    self.dim_w,
                    self.dim_v
                ));
            }
            if m.iter().any(|v| !v.is_finite()) {
                violations.push(format!("term {alpha}: matrix has non-finite entries"));
            }
            if m.iter().any(|&v| v != 0.0) {
                any_nonzero = true;
            }
        }
        if !self.terms.is_empty() && !any_nonzero {
            violations.push("zero operator: all coefficient matrices vanish".into());
        }
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    /// Symbol matrix `sum xi^alpha A_alpha` at a complex frequency.
    pub fn symbol(&self, xi: &[Complex64]) -> Result<SymbolValue> {
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "frequency",
                expected: self.n,
                got: xi.len(),
            });
        }
        let mut matrix = DMatrix::<Complex64>::zeros(self.dim_w, self.dim_v);
        for (alpha, m) in &self.terms {
            let factor = alpha.monomial_c(xi);
            for i in 0..self.dim_w {
                for j in 0..self.dim_v {
                    matrix[(i, j)] += factor * m[(i, j)];
                }
            }
        }
        Ok(SymbolValue {
            matrix,
            frequency: xi.to_vec(),
        })
    }

    /// Symbol at a real frequency (imaginary parts are exactly zero since
    /// all coefficients are real).
    pub fn symbol_real(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        if xi.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "frequency",
                expected: self.n,
                got: xi.len(),
            });
        }
        let mut matrix = DMatrix::<f64>::zeros(self.dim_w, self.dim_v);
        for (alpha, m) in &self.terms {
            let factor = alpha.monomial(xi);
            matrix += m * factor;
        }
        Ok(matrix)
    }

    /// Exact symbolic application to a V-valued polynomial; the result is
    /// W-valued of degree `deg(q) - k` (the zero polynomial when
    /// `deg(q) < k`).
    pub fn apply_to_polynomial(&self, q: &Polynomial) -> Result<Polynomial> {
        if q.dim() != self.dim_v {
            return Err(Error::DimensionMismatch {
                what: "polynomial codomain",
                expected: self.dim_v,
                got: q.dim(),
            });
        }
        if q.vars() != self.n {
            return Err(Error::DimensionMismatch {
                what: "polynomial variables",
                expected: self.n,
                got: q.vars(),
            });
        }
        let mut out = Polynomial::zero(self.n, self.dim_w);
        for (beta, c) in q.coeffs() {
            for (alpha, m) in &self.terms {
                if let Some(gamma) = beta.checked_sub(alpha) {
                    let factor = falling_factorial(beta, alpha);
                    let mut cv = vec![0.0; self.dim_w];
                    for (i, cvi) in cv.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for j in 0..self.dim_v {
                            s += m[(i, j)] * c[j];
                        }
                        *cvi = factor * s;
                    }
                    out.add_to(gamma, &cv);
                }
            }
        }
        Ok(out)
    }
}
