//! Built-in operator generators parameterized by the ambient dimension.
//!
//! Symmetric-matrix codomains are flattened to a fixed basis. For the
//! (trace-free) symmetric gradient the off-diagonal slots carry weight
//! `sqrt(2)` so that the Euclidean norm of the flattened value equals the
//! Frobenius norm of the matrix. The derivative tensors `hessian` /
//! `derivative_tensor` instead use one unweighted slot per distinct
//! multi-index, so each component is literally one partial derivative.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::multi_index::{indices_of_order, MultiIndex};
use crate::operator::Operator;
use crate::Result;

/// Gradient of a scalar field: k = 1, V = R, W = R^n.
pub fn gradient(n: usize) -> Operator {
    let terms = (0..n)
        .map(|axis| {
            let mut m = DMatrix::<f64>::zeros(n, 1);
            m[(axis, 0)] = 1.0;
            (MultiIndex::unit(n, axis), m)
        })
        .collect();
    Operator::new(n, 1, 1, n, terms)
}

/// Scalar Laplacian: k = 2, V = W = R. Elliptic but not C-elliptic.
pub fn laplacian_scalar(n: usize) -> Operator {
    let terms = (0..n)
        .map(|axis| {
            let mut alpha = vec![0; n];
            alpha[axis] = 2;
            (MultiIndex(alpha), DMatrix::from_element(1, 1, 1.0))
        })
        .collect();
    Operator::new(n, 2, 1, 1, terms)
}

// Row layout for symmetric 2-tensors: diagonal slots (i,i) first, then
// off-diagonal (i,j), i < j, both in lexicographic order.
fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Symmetric gradient of a vector field: `0.5 * (d_i u_j + d_j u_i)`,
/// flattened with sqrt(2)-weighted off-diagonal slots.
pub fn symmetric_gradient(n: usize) -> Operator {
    let pairs = sym_pairs(n);
    let dim_w = pairs.len();
    let terms = (0..n)
        .map(|axis| {
            let mut m = DMatrix::<f64>::zeros(dim_w, n);
            for (row, &(i, j)) in pairs.iter().enumerate() {
                let weight = if i == j { 1.0 } else { 2.0_f64.sqrt() };
                // strain (i,j) component of d_axis: 0.5*(delta_{axis,i} u_j + delta_{axis,j} u_i)
                if axis == i {
                    m[(row, j)] += 0.5 * weight;
                }
                if axis == j {
                    m[(row, i)] += 0.5 * weight;
                }
            }
            (MultiIndex::unit(n, axis), m)
        })
        .collect();
    Operator::new(n, 1, n, dim_w, terms)
}

/// Trace-free part of the symmetric gradient. For n = 2 its polynomial
/// kernel is infinite dimensional (conformal fields), so it is elliptic but
/// not C-elliptic.
pub fn tracefree_symmetric_gradient(n: usize) -> Operator {
    let pairs = sym_pairs(n);
    let dim_w = pairs.len();
    let terms = (0..n)
        .map(|axis| {
            let mut m = DMatrix::<f64>::zeros(dim_w, n);
            for (row, &(i, j)) in pairs.iter().enumerate() {
                let weight = if i == j { 1.0 } else { 2.0_f64.sqrt() };
                if axis == i {
                    m[(row, j)] += 0.5 * weight;
                }
                if axis == j {
                    m[(row, i)] += 0.5 * weight;
                }
                // subtract (div u / n) on the diagonal
                if i == j {
                    m[(row, axis)] -= 1.0 / n as f64;
                }
            }
            (MultiIndex::unit(n, axis), m)
        })
        .collect();
    Operator::new(n, 1, n, dim_w, terms)
}

/// Full tensor of order-k partial derivatives of a scalar field, one
/// unweighted row per multi-index of order k in graded-lex order.
pub fn derivative_tensor(n: usize, k: usize) -> Operator {
    let idx = indices_of_order(n, k);
    let dim_w = idx.len();
    let terms = idx
        .iter()
        .enumerate()
        .map(|(row, alpha)| {
            let mut m = DMatrix::<f64>::zeros(dim_w, 1);
            m[(row, 0)] = 1.0;
            (alpha.clone(), m)
        })
        .collect();
    Operator::new(n, k, 1, dim_w, terms)
}

/// Hessian of a scalar field: `derivative_tensor(n, 2)`.
pub fn hessian(n: usize) -> Operator {
    derivative_tensor(n, 2)
}

/// Cauchy-Riemann operator on R^2: `(d1 u1 - d2 u2, d2 u1 + d1 u2)`.
/// Elliptic but not C-elliptic (holomorphic kernel). Only defined for n = 2.
pub fn cauchy_riemann(n: usize) -> Result<Operator> {
    if n != 2 {
        return Err(Error::InvalidParameter(format!(
            "cauchy_riemann is only defined for n = 2, got {n}"
        )));
    }
    let m1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let m2 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    Ok(Operator::new(
        2,
        1,
        2,
        2,
        vec![(MultiIndex(vec![1, 0]), m1), (MultiIndex(vec![0, 1]), m2)],
    ))
}

/// Known generator names accepted by `zoo:<name>` operator references.
pub const NAMES: &[&str] = &[
    "gradient",
    "symmetric_gradient",
    "tracefree_symmetric_gradient",
    "hessian",
    "laplacian_scalar",
    "cauchy_riemann",
    "d3",
];

/// Resolves a generator by name for dimension `n`.
pub fn by_name(name: &str, n: usize) -> Result<Operator> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "zoo operators require n >= 2, got {n}"
        )));
    }
    match name {
        "gradient" => Ok(gradient(n)),
        "symmetric_gradient" => Ok(symmetric_gradient(n)),
        "tracefree_symmetric_gradient" => Ok(tracefree_symmetric_gradient(n)),
        "hessian" => Ok(hessian(n)),
        "laplacian_scalar" => Ok(laplacian_scalar(n)),
        "cauchy_riemann" => cauchy_riemann(n),
        "d3" => Ok(derivative_tensor(n, 3)),
        _ => Err(Error::InvalidParameter(format!(
            "unknown zoo operator '{name}' (known: {})",
            NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::Polynomial;

    #[test]
    fn all_generators_validate() {
        for n in [2usize, 3] {
            for name in NAMES {
                if *name == "cauchy_riemann" && n != 2 {
                    continue;
                }
                let op = by_name(name, n).unwrap();
                let rep = op.validate();
                assert!(rep.ok, "{name} n={n}: {:?}", rep.violations);
            }
        }
    }

    #[test]
    fn tracefree_kernel_contains_conformal_fields() {
        // kernel = fields with u1 + i u2 holomorphic
        let op = tracefree_symmetric_gradient(2);
        // f(z) = z -> u = (x, y)
        let mut lin = Polynomial::zero(2, 2);
        lin.add_to(MultiIndex(vec![1, 0]), &[1.0, 0.0]);
        lin.add_to(MultiIndex(vec![0, 1]), &[0.0, 1.0]);
        assert!(op.apply_to_polynomial(&lin).unwrap().is_zero());
        // f(z) = z^2 -> u = (x^2 - y^2, 2xy)
        let mut sq = Polynomial::zero(2, 2);
        sq.add_to(MultiIndex(vec![2, 0]), &[1.0, 0.0]);
        sq.add_to(MultiIndex(vec![0, 2]), &[-1.0, 0.0]);
        sq.add_to(MultiIndex(vec![1, 1]), &[0.0, 2.0]);
        assert!(op.apply_to_polynomial(&sq).unwrap().is_zero());
        // rigid rotation comes from f(z) = i z
        let mut rot = Polynomial::zero(2, 2);
        rot.add_to(MultiIndex(vec![0, 1]), &[-1.0, 0.0]);
        rot.add_to(MultiIndex(vec![1, 0]), &[0.0, 1.0]);
        assert!(op.apply_to_polynomial(&rot).unwrap().is_zero());
    }

    #[test]
    fn cauchy_riemann_kernel() {
        let op = cauchy_riemann(2).unwrap();
        // f(z) = z, u = (x, y): both components vanish identically
        let mut lin = Polynomial::zero(2, 2);
        lin.add_to(MultiIndex(vec![1, 0]), &[1.0, 0.0]);
        lin.add_to(MultiIndex(vec![0, 1]), &[0.0, 1.0]);
        assert!(op.apply_to_polynomial(&lin).unwrap().is_zero());
        assert!(cauchy_riemann(3).is_err());
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(by_name("biharmonic", 2).is_err());
    }
}
