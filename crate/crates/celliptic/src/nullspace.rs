//! Bases of the polynomial solution spaces of an operator per degree and
//! their stabilization across degrees.
//!
//! For degree `d` the solution space is the kernel of the linear map sending
//! coefficients of V-valued polynomials of degree `<= d` to coefficients of
//! the W-valued image of degree `<= d - k`. The assembled matrix is made of
//! falling factorials times coefficient entries, so true kernels are exact
//! and the singular-value cutoff only guards rounding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::multi_index::{falling_factorial, indices_up_to, MultiIndex};
use crate::operator::Operator;
use crate::polynomial::Polynomial;
use crate::Result;

/// Relative singular-value cutoff below which a direction counts as kernel.
pub const KERNEL_CUTOFF: f64 = 1e-10;

/// Orthonormal basis (in L2 of the unit ball) of the degree-`d` polynomial
/// solution space, together with the kernel dimensions of every lower degree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NullspaceBasis {
    /// Maximal total degree attained by a basis element.
    pub degree: usize,
    pub basis: Vec<Polynomial>,
    /// `dims_by_degree[d]` = kernel dimension at degree `d`.
    pub dims_by_degree: Vec<usize>,
}

/// Result of scanning kernel dimensions up to `d_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stabilization {
    Stabilized(NullspaceBasis),
    NotStabilized { dims_by_degree: Vec<usize> },
}

/// Coefficient layout for degree-`d` V-valued polynomials: monomials in
/// graded-lex order, `dim_v` components per monomial.
fn column_index(mono: usize, comp: usize, dim_v: usize) -> usize {
    mono * dim_v + comp
}

fn assemble(op: &Operator, d: usize) -> (DMatrix<f64>, Vec<MultiIndex>) {
    let n = op.n();
    let k = op.order();
    let cols_idx = indices_up_to(n, d);
    let ncols = cols_idx.len() * op.dim_v();
    if d < k {
        return (DMatrix::zeros(0, ncols), cols_idx);
    }
    let rows_idx = indices_up_to(n, d - k);
    let row_pos = |gamma: &MultiIndex| rows_idx.binary_search(gamma).expect("image index");
    let mut m = DMatrix::<f64>::zeros(rows_idx.len() * op.dim_w(), ncols);
    for (mono, beta) in cols_idx.iter().enumerate() {
        for (alpha, a) in op.terms() {
            if let Some(gamma) = beta.checked_sub(alpha) {
                let factor = falling_factorial(beta, alpha);
                let r0 = row_pos(&gamma) * op.dim_w();
                for j in 0..op.dim_v() {
                    let col = column_index(mono, j, op.dim_v());
                    for i in 0..op.dim_w() {
                        m[(r0 + i, col)] += factor * a[(i, j)];
                    }
                }
            }
        }
    }
    (m, cols_idx)
}

/// Orthonormal kernel vectors (in coefficient space) of the assembled matrix.
fn kernel_vectors(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return (0..ncols)
            .map(|i| {
                let mut e = vec![0.0; ncols];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // Pad with zero rows so the SVD exposes the full right-singular basis.
    let work = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = KERNEL_CUTOFF * smax;
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            out.push((0..ncols).map(|j| v_t[(i, j)]).collect());
        }
    }
    out
}

fn vector_to_polynomial(
    coeffs: &[f64],
    cols_idx: &[MultiIndex],
    n: usize,
    dim_v: usize,
) -> Polynomial {
    // Singular vectors carry rounding noise of order machine epsilon on the
    // coordinates outside the kernel; strip it so degrees stay honest.
    let vmax = coeffs.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let floor = 1e-9 * vmax;
    let mut p = Polynomial::zero(n, dim_v);
    for (mono, beta) in cols_idx.iter().enumerate() {
        let c: Vec<f64> = coeffs
            [column_index(mono, 0, dim_v)..column_index(mono, 0, dim_v) + dim_v]
            .iter()
            .map(|&v| if v.abs() <= floor { 0.0 } else { v })
            .collect();
        if c.iter().any(|&v| v != 0.0) {
            p.add_to(beta.clone(), &c);
        }
    }
    p
}

/// Dimension of the degree-`d` solution space (one SVD, no basis assembly).
pub fn kernel_dimension(op: &Operator, d: usize) -> usize {
    let (m, cols_idx) = assemble(op, d);
    if m.nrows() == 0 {
        return cols_idx.len() * op.dim_v();
    }
    kernel_vectors(&m).len()
}

/// Basis of the degree-`d` solution space, orthonormalized in L2 of the
/// unit ball, with kernel dimensions for all degrees `0..=d`.
///
/// ```
/// use celliptic::nullspace::kernel_basis;
/// use celliptic::zoo;
///
/// // translations plus the rotation span the plane symmetric-gradient kernel
/// let basis = kernel_basis(&zoo::symmetric_gradient(2), 2).unwrap();
/// assert_eq!(basis.dims_by_degree, vec![2, 3, 3]);
/// assert_eq!(basis.degree, 1);
/// ```
pub fn kernel_basis(op: &Operator, d: usize) -> Result<NullspaceBasis> {
    let (m, cols_idx) = assemble(op, d);
    let vectors = kernel_vectors(&m);
    let polys: Vec<Polynomial> = vectors
        .iter()
        .map(|v| vector_to_polynomial(v, &cols_idx, op.n(), op.dim_v()))
        .collect();
    let basis = orthonormalize_on_unit_ball(polys)?;
    let mut dims_by_degree: Vec<usize> = (0..d).map(|dd| kernel_dimension(op, dd)).collect();
    dims_by_degree.push(basis.len());
    let degree = basis.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    Ok(NullspaceBasis {
        degree,
        basis,
        dims_by_degree,
    })
}

/// Exact L2(B(0,1)) Gram matrix through a memoized monomial moment table;
/// avoids materializing the product polynomials.
fn gram_on_unit_ball(polys: &[Polynomial]) -> DMatrix<f64> {
    use std::collections::HashMap;
    let mut moments: HashMap<MultiIndex, f64> = HashMap::new();
    let dim = polys.len();
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let mut acc = 0.0;
            for (beta, cb) in polys[i].coeffs() {
                for (gamma, cg) in polys[j].coeffs() {
                    let dotc: f64 = cb.iter().zip(cg).map(|(a, b)| a * b).sum();
                    if dotc == 0.0 {
                        continue;
                    }
                    let key = beta.add(gamma);
                    let m = *moments
                        .entry(key.clone())
                        .or_insert_with(|| crate::region::unit_ball_monomial_integral(&key));
                    acc += dotc * m;
                }
            }
            gram[(i, j)] = acc;
            gram[(j, i)] = acc;
        }
    }
    gram
}

/// Gram-based orthonormalization in L2(B(0,1)) using exact monomial
/// integrals; falls back to an eigenvalue whitening when the coefficient
/// basis is too ill-conditioned for a Cholesky factor.
fn orthonormalize_on_unit_ball(polys: Vec<Polynomial>) -> Result<Vec<Polynomial>> {
    if polys.is_empty() {
        return Ok(polys);
    }
    let dim = polys.len();
    let gram = gram_on_unit_ball(&polys);
    let transform = match gram.clone().cholesky() {
        Some(chol) => {
            // basis' = basis * L^{-T}
            let l_inv = chol
                .l()
                .solve_lower_triangular(&DMatrix::identity(dim, dim))
                .ok_or(crate::Error::GramSingular)?;
            l_inv.transpose()
        }
        None => {
            let eig = gram.symmetric_eigen();
            let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
            if eig.eigenvalues.iter().any(|&v| v <= 1e-14 * max) {
                return Err(crate::Error::GramSingular);
            }
            // basis' = basis * Q * D^{-1/2}
            let mut t = eig.eigenvectors.clone();
            for j in 0..dim {
                let s = eig.eigenvalues[j].sqrt();
                for i in 0..dim {
                    t[(i, j)] /= s;
                }
            }
            t
        }
    };
    let mut out = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut p = Polynomial::zero(polys[0].vars(), polys[0].dim());
        for (i, q) in polys.iter().enumerate() {
            if transform[(i, j)] != 0.0 {
                p = p.add(&q.scaled(transform[(i, j)]));
            }
        }
        out.push(p);
    }
    Ok(out)
}

/// Scans kernel dimensions for `d = 0..=d_max` and returns the top basis
/// when the dimension is constant on the final window of `ceil(d_max/2)`
/// degrees; otherwise reports the still-increasing dimensions.
pub fn stabilized_nullspace(op: &Operator, d_max: usize) -> Result<Stabilization> {
    if d_max < op.order() + 2 {
        return Err(crate::Error::InvalidParameter(format!(
            "stabilization scan needs d_max >= k + 2 = {}, got {d_max}",
            op.order() + 2
        )));
    }
    let dims: Vec<usize> = (0..=d_max).map(|d| kernel_dimension(op, d)).collect();
    let window = d_max.div_ceil(2);
    let stable = dims[d_max.saturating_sub(window)..=d_max]
        .windows(2)
        .all(|w| w[0] == w[1]);
    if stable {
        Ok(Stabilization::Stabilized(kernel_basis(op, d_max)?))
    } else {
        Ok(Stabilization::NotStabilized {
            dims_by_degree: dims,
        })
    }
}
