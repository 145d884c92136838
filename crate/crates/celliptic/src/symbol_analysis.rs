//! Real ellipticity margins and the search for complex frequencies at which
//! the symbol loses injectivity.
//!
//! Injectivity over the complex sphere is only semi-decidable by sampling,
//! so a clean bill of health is reported as `c_elliptic_evidence`, never as
//! a definitive verdict. Two complementary probes run side by side: a
//! derivative-free minimization of the smallest singular value of the symbol
//! over the complex projective sphere, and the stabilization of polynomial
//! kernel dimensions across degrees (an operator whose symbol has a complex
//! null direction pumps one new kernel polynomial into every degree).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nullspace::{stabilized_nullspace, Stabilization};
use crate::operator::Operator;
use crate::region::sphere_quadrature;
use crate::Result;

/// Parameters of [`classify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub d_max: usize,
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    /// Refinement depth of the real unit-sphere margin scan.
    pub grid_depth: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            d_max: 8,
            restarts: 32,
            tol: 1e-8,
            seed: 0,
            grid_depth: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CEllipticEvidence,
    NotCElliptic,
    Inconclusive,
}

/// A complex frequency/vector pair witnessing near-singularity of the symbol.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub xi_re: Vec<f64>,
    pub xi_im: Vec<f64>,
    pub v_re: Vec<f64>,
    pub v_im: Vec<f64>,
    /// Independently re-evaluated `|symbol(xi) v|`.
    pub residual: f64,
}

impl Certificate {
    pub fn xi(&self) -> Vec<Complex64> {
        self.xi_re
            .iter()
            .zip(&self.xi_im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }

    pub fn v(&self) -> Vec<Complex64> {
        self.v_re
            .iter()
            .zip(&self.v_im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EllipticityReport {
    /// Smallest minimal singular value of the symbol over the real unit
    /// sphere.
    pub real_margin: f64,
    pub c_elliptic_verdict: Verdict,
    pub certificate: Option<Certificate>,
    /// Kernel dimension per polynomial degree `0..=d_max`.
    pub nullspace_dims: Vec<usize>,
    /// Smallest singular value found by the complex search.
    pub symbol_search_min: f64,
    /// Which probes triggered a `not_c_elliptic` verdict.
    pub not_c_elliptic_reasons: Vec<String>,
}

fn sigma_min_complex(op: &Operator, xi: &[Complex64]) -> f64 {
    let m = op.symbol(xi).expect("frequency length").matrix;
    smallest_singular_value(&m)
}

fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Fast smallest-singular-value estimate through the Hermitian Gram matrix
/// `M* M`. Exact for one column; for several columns the noise floor sits
/// near `1e-8 * sigma_max`, which is why near-zeros found with it are
/// re-polished against the full SVD.
fn sigma_min_gram(op: &Operator, xi: &[Complex64]) -> f64 {
    let m = op.symbol(xi).expect("frequency length").matrix;
    let dv = m.ncols();
    if dv == 1 {
        return m.column(0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let gram = m.adjoint() * &m;
    if dv == 2 {
        let a = gram[(0, 0)].re;
        let d = gram[(1, 1)].re;
        let b2 = gram[(0, 1)].norm_sqr();
        let tr = a + d;
        let disc = ((a - d) * (a - d) + 4.0 * b2).max(0.0).sqrt();
        return (0.5 * (tr - disc)).max(0.0).sqrt();
    }
    gram.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
        .sqrt()
}

fn sigma_min_real(op: &Operator, xi: &[f64]) -> f64 {
    let m = op.symbol_real(xi).expect("frequency length");
    m.svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn normalize(z: &mut [f64]) {
    let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in z.iter_mut() {
            *v /= norm;
        }
    } else {
        z[0] = 1.0;
    }
}

/// Coordinate pattern search of `f` over the unit sphere in R^dim
/// (projection after every trial step). Returns the best point and value.
///
/// A sweep that fails to improve by more than a relative epsilon halves the
/// step, so descent along a flat valley cannot stall the search.
fn pattern_search_sphere<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    mut step: f64,
    step_min: f64,
) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    normalize(&mut x);
    let mut best = f(&x);
    // at most this many accepted moves before the step halves anyway, so a
    // slow crawl along a valley cannot dominate the budget
    let level_cap = 16;
    let mut level_moves = 0;
    let max_sweeps = 5_000;
    for _ in 0..max_sweeps {
        if step <= step_min {
            break;
        }
        let mut cand_best = best;
        let mut cand_x: Option<Vec<f64>> = None;
        for axis in 0..x.len() {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[axis] += sgn * step;
                normalize(&mut y);
                let v = f(&y);
                if v < cand_best {
                    cand_best = v;
                    cand_x = Some(y);
                }
            }
        }
        // rounding-level jitter does not count as progress
        match cand_x {
            Some(y) if cand_best < best - 1e-15 * (1.0 + best.abs()) => {
                x = y;
                best = cand_best;
                level_moves += 1;
                if level_moves >= level_cap {
                    step *= 0.5;
                    level_moves = 0;
                }
            }
            _ => {
                step *= 0.5;
                level_moves = 0;
            }
        }
    }
    (x, best)
}

/// Minimum of the smallest singular value of the symbol over a quasi-uniform
/// sample of the real unit sphere, refined `grid_depth` times around the
/// running minimizer.
pub fn real_ellipticity_margin(op: &Operator, grid_depth: usize) -> f64 {
    let n = op.n();
    let sample = sphere_quadrature(n, 48);
    let f = |xi: &[f64]| sigma_min_real(op, xi);
    let mut best_xi: Vec<f64> = sample[0].0.clone();
    let mut best = f(&best_xi);
    for (dir, _) in &sample {
        let v = f(dir);
        if v < best {
            best = v;
            best_xi = dir.clone();
        }
    }
    let mut step = 0.2;
    for _ in 0..grid_depth.max(1) {
        let (xi, v) = pattern_search_sphere(&f, &best_xi, step, step * 1e-6);
        if v < best {
            best = v;
            best_xi = xi;
        }
        step *= 0.25;
    }
    best.max(0.0)
}

/// Deterministic restart seeds: coordinate/pair starts covering the obvious
/// isotropic directions, topped up with seeded Gaussian directions.
fn restart_points(n: usize, restarts: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = 2 * n;
    let mut starts = Vec::with_capacity(restarts);
    // real axes
    for i in 0..n {
        let mut z = vec![0.0; dim];
        z[i] = 1.0;
        starts.push(z);
    }
    // e_i +- i e_j
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for sgn in [1.0, -1.0] {
                let mut z = vec![0.0; dim];
                z[i] = std::f64::consts::FRAC_1_SQRT_2;
                z[n + j] = sgn * std::f64::consts::FRAC_1_SQRT_2;
                starts.push(z);
            }
        }
    }
    let mut rng = StdRng::seed_from_u64(seed);
    while starts.len() < restarts {
        let mut z: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        normalize(&mut z);
        starts.push(z);
    }
    starts
}

fn gaussian(rng: &mut StdRng) -> f64 {
    // Box-Muller; two uniforms per call keeps the stream simple.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn split_complex(z: &[f64]) -> Vec<Complex64> {
    let n = z.len() / 2;
    (0..n).map(|i| Complex64::new(z[i], z[n + i])).collect()
}

/// Multi-start minimization of the smallest singular value of the symbol
/// over the complex unit sphere. Returns the best frequency and value.
pub fn symbol_search(op: &Operator, restarts: usize, seed: u64) -> (Vec<Complex64>, f64) {
    let fast = |z: &[f64]| sigma_min_gram(op, &split_complex(z));
    let starts = restart_points(op.n(), restarts, seed);
    let results: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|s| pattern_search_sphere(&fast, s, 0.3, 1e-10))
        .collect();
    let mut best = results[0].clone();
    for r in &results[1..] {
        if r.1 < best.1 {
            best = r.clone();
        }
    }
    // polish promising minima against the exact objective
    if best.1 < 1e-4 {
        let exact = |z: &[f64]| sigma_min_complex(op, &split_complex(z));
        let (x, v) = pattern_search_sphere(&exact, &best.0, 1e-4, 1e-13);
        if v < best.1 {
            best = (x, v);
        }
    }
    (split_complex(&best.0), best.1)
}

/// Runs the symbol search and the nullspace stabilization probe and merges
/// their verdicts.
///
/// ```
/// use celliptic::symbol_analysis::{classify, ClassifyParams, Verdict};
/// use celliptic::zoo;
///
/// let params = ClassifyParams::default();
/// let report = classify(&zoo::laplacian_scalar(2), &params).unwrap();
/// assert_eq!(report.c_elliptic_verdict, Verdict::NotCElliptic);
/// assert!(report.certificate.unwrap().residual <= 1e-7);
///
/// let report = classify(&zoo::symmetric_gradient(2), &params).unwrap();
/// assert_eq!(report.c_elliptic_verdict, Verdict::CEllipticEvidence);
/// assert_eq!(*report.nullspace_dims.last().unwrap(), 3); // rigid motions
/// ```
pub fn classify(op: &Operator, params: &ClassifyParams) -> Result<EllipticityReport> {
    let real_margin = real_ellipticity_margin(op, params.grid_depth);
    let (xi, search_min) = symbol_search(op, params.restarts, params.seed);
    let mut reasons = Vec::new();
    let mut certificate = None;
    if search_min < params.tol {
        reasons.push("symbol_search".to_string());
        certificate = build_certificate(op, &xi);
    }

    let stab = stabilized_nullspace(op, params.d_max)?;
    let (dims, stabilized) = match &stab {
        Stabilization::Stabilized(b) => (b.dims_by_degree.clone(), true),
        Stabilization::NotStabilized { dims_by_degree } => (dims_by_degree.clone(), false),
    };
    let d_max = params.d_max;
    let growing_at_top = dims[d_max] > dims[d_max - 1];
    if growing_at_top {
        reasons.push("nullspace_growth".to_string());
    }

    let verdict = if !reasons.is_empty() {
        Verdict::NotCElliptic
    } else if stabilized {
        Verdict::CEllipticEvidence
    } else {
        Verdict::Inconclusive
    };

    Ok(EllipticityReport {
        real_margin,
        c_elliptic_verdict: verdict,
        certificate,
        nullspace_dims: dims,
        symbol_search_min: search_min,
        not_c_elliptic_reasons: reasons,
    })
}

/// Right singular vector of the smallest singular value, with the residual
/// `|symbol(xi) v|` re-evaluated from scratch.
fn build_certificate(op: &Operator, xi: &[Complex64]) -> Option<Certificate> {
    let m = op.symbol(xi).ok()?.matrix;
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t?;
    let mut min_idx = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[min_idx] {
            min_idx = i;
        }
    }
    let v: Vec<Complex64> = (0..op.dim_v()).map(|j| v_t[(min_idx, j)].conj()).collect();
    // independent re-evaluation
    let image = &m * DMatrix::from_fn(op.dim_v(), 1, |i, _| v[i]);
    let residual = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Some(Certificate {
        xi_re: xi.iter().map(|z| z.re).collect(),
        xi_im: xi.iter().map(|z| z.im).collect(),
        v_re: v.iter().map(|z| z.re).collect(),
        v_im: v.iter().map(|z| z.im).collect(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use nalgebra::DMatrix;

    #[test]
    fn real_margins_of_reference_operators() {
        assert!((real_ellipticity_margin(&zoo::gradient(2), 2) - 1.0).abs() < 1e-9);
        assert!((real_ellipticity_margin(&zoo::laplacian_scalar(2), 2) - 1.0).abs() < 1e-9);
        // d1 alone on R^2 degenerates at xi = (0, 1)
        let d1 = Operator::new(
            2,
            1,
            1,
            1,
            vec![(
                crate::multi_index::MultiIndex(vec![1, 0]),
                DMatrix::from_element(1, 1, 1.0),
            )],
        );
        assert!(real_ellipticity_margin(&d1, 4) < 1e-6);
    }

    #[test]
    fn classify_gradient_is_evidence() {
        let rep = classify(&zoo::gradient(2), &ClassifyParams::default()).unwrap();
        assert_eq!(rep.c_elliptic_verdict, Verdict::CEllipticEvidence);
        assert!(rep.nullspace_dims.iter().all(|&d| d == 1));
        assert!(rep.certificate.is_none());
    }

    #[test]
    fn classify_laplacian_finds_isotropic_certificate() {
        let params = ClassifyParams::default();
        let rep = classify(&zoo::laplacian_scalar(2), &params).unwrap();
        assert_eq!(rep.c_elliptic_verdict, Verdict::NotCElliptic);
        let cert = rep.certificate.expect("certificate");
        assert!(
            cert.residual <= 10.0 * params.tol,
            "residual {}",
            cert.residual
        );
        // the null frequency satisfies xi . xi = 0 (up to phase it is
        // (1, +-i)/sqrt(2))
        let xi = cert.xi();
        let dot = xi[0] * xi[0] + xi[1] * xi[1];
        assert!(dot.norm() < 1e-7, "xi.xi = {dot}");
    }

    #[test]
    fn classify_tracefree_by_nullspace_growth() {
        let rep = classify(
            &zoo::tracefree_symmetric_gradient(2),
            &ClassifyParams::default(),
        )
        .unwrap();
        assert_eq!(rep.c_elliptic_verdict, Verdict::NotCElliptic);
        assert!(rep
            .not_c_elliptic_reasons
            .iter()
            .any(|r| r == "nullspace_growth"));
        for w in rep.nullspace_dims.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn classify_symmetric_gradient_stabilizes_at_rigid_motions() {
        let rep = classify(&zoo::symmetric_gradient(2), &ClassifyParams::default()).unwrap();
        assert_eq!(rep.c_elliptic_verdict, Verdict::CEllipticEvidence);
        assert_eq!(*rep.nullspace_dims.last().unwrap(), 3);
    }

    #[test]
    fn certificates_are_sound_when_emitted() {
        let params = ClassifyParams::default();
        for op in [
            zoo::laplacian_scalar(2),
            zoo::tracefree_symmetric_gradient(2),
            zoo::cauchy_riemann(2).unwrap(),
        ] {
            let rep = classify(&op, &params).unwrap();
            assert_eq!(rep.c_elliptic_verdict, Verdict::NotCElliptic);
            if let Some(cert) = &rep.certificate {
                let s = op.symbol(&cert.xi()).unwrap().matrix;
                let v = cert.v();
                let image = &s * DMatrix::from_fn(op.dim_v(), 1, |i, _| v[i]);
                let res = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                assert!(res <= 10.0 * params.tol);
            }
        }
    }

    #[test]
    fn verdict_is_invariant_under_basis_changes() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        let params = ClassifyParams::default();
        for op in [zoo::symmetric_gradient(2), zoo::laplacian_scalar(2)] {
            let base = classify(&op, &params).unwrap();
            // random well-conditioned M (dim_w) and N (dim_v)
            let m = DMatrix::from_fn(op.dim_w(), op.dim_w(), |i, j| {
                let diag = if i == j { 1.0 } else { 0.0 };
                diag + 0.3 * rng.gen_range(-1.0..1.0)
            });
            let nn = DMatrix::from_fn(op.dim_v(), op.dim_v(), |i, j| {
                let diag = if i == j { 1.0 } else { 0.0 };
                diag + 0.3 * rng.gen_range(-1.0..1.0)
            });
            let terms: Vec<_> = op
                .terms()
                .map(|(alpha, a)| (alpha.clone(), &m * a * &nn))
                .collect();
            let transformed = Operator::new(op.n(), op.order(), op.dim_v(), op.dim_w(), terms);
            let rep = classify(&transformed, &params).unwrap();
            assert_eq!(rep.c_elliptic_verdict, base.c_elliptic_verdict);
            assert_eq!(rep.nullspace_dims, base.nullspace_dims);
        }
    }

    #[test]
    fn search_and_stabilization_never_contradict() {
        // a symbol-search violation and a stabilized nullspace must not
        // co-occur
        let params = ClassifyParams::default();
        for n in [2usize, 3] {
            for name in zoo::NAMES {
                if *name == "cauchy_riemann" && n != 2 {
                    continue;
                }
                let op = zoo::by_name(name, n).unwrap();
                let rep = classify(&op, &params).unwrap();
                let search_violation = rep.symbol_search_min < params.tol;
                let window = params.d_max.div_ceil(2);
                let dims = &rep.nullspace_dims;
                let stabilized = dims[params.d_max - window..]
                    .windows(2)
                    .all(|w| w[0] == w[1]);
                assert!(
                    !(search_violation && stabilized),
                    "{name} n={n}: contradictory probes"
                );
            }
        }
    }

    use crate::operator::Operator;
}
