//! L2-orthogonal projection onto a polynomial nullspace over a region,
//! averaged Taylor polynomials of grid functions, and the inverse-estimate /
//! center-vanishing ratios for polynomials on balls.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::grid::{clip, fd, GridFunction};
use crate::multi_index::{binomial, indices_up_to};
use crate::nullspace::NullspaceBasis;
use crate::polynomial::Polynomial;
use crate::region::{Region, RegionKind};
use crate::Result;

/// Solves the Gram system `G a = c` and returns `sum a_i e_i`.
///
/// The Gram matrix over the region is computed from exact monomial
/// integrals, so re-orthonormalization on the region is implicit in the
/// solve. Errors with `GramSingular` when the basis degenerates on the
/// region.
fn solve_projection(basis: &NullspaceBasis, region: &Region, inner: &[f64]) -> Result<Polynomial> {
    let dim = basis.basis.len();
    if dim == 0 {
        return Err(Error::GramSingular);
    }
    let gram = DMatrix::from_fn(dim, dim, |i, j| {
        region.l2_inner(&basis.basis[i], &basis.basis[j])
    });
    let rhs = DVector::from_column_slice(inner);
    let coeffs = match gram.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            let eig = gram.symmetric_eigen();
            let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
            if max <= 0.0 || eig.eigenvalues.iter().any(|&v| v <= 1e-12 * max) {
                return Err(Error::GramSingular);
            }
            let qt_rhs = eig.eigenvectors.transpose() * &rhs;
            let scaled = DVector::from_fn(dim, |i, _| qt_rhs[i] / eig.eigenvalues[i]);
            &eig.eigenvectors * scaled
        }
    };
    let mut out = Polynomial::zero(basis.basis[0].vars(), basis.basis[0].dim());
    for (i, e) in basis.basis.iter().enumerate() {
        if coeffs[i] != 0.0 {
            out = out.add(&e.scaled(coeffs[i]));
        }
    }
    Ok(out)
}

/// L2-orthogonal projection of a function, given through its values at the
/// nodes of a quadrature suited to the region, onto the span of the basis.
pub fn project_l2<F: FnMut(&[f64]) -> Vec<f64>>(
    mut sample: F,
    basis: &NullspaceBasis,
    region: &Region,
) -> Result<Polynomial> {
    region.validate()?;
    if basis.basis.is_empty() {
        return Err(Error::GramSingular);
    }
    // inner products <u, e_i> by quadrature exact on degree 2m (+ margin for
    // generic integrands)
    let quad = region.quadrature(2 * basis.degree + 6);
    let dim_v = basis.basis[0].dim();
    let mut inner = vec![0.0; basis.basis.len()];
    for (node, w) in quad.nodes.iter().zip(&quad.weights) {
        let uv = sample(node);
        debug_assert_eq!(uv.len(), dim_v);
        for (i, e) in basis.basis.iter().enumerate() {
            let ev = e.eval(node);
            let dot: f64 = ev.iter().zip(&uv).map(|(a, b)| a * b).sum();
            inner[i] += w * dot;
        }
    }
    solve_projection(basis, region, &inner)
}

/// Projection of a grid function using cell-clipped inner products, which
/// stay meaningful for indicator-type samples.
pub fn project_grid(
    u: &GridFunction,
    basis: &NullspaceBasis,
    region: &Region,
) -> Result<Polynomial> {
    region.validate()?;
    if basis.basis.is_empty() {
        return Err(Error::GramSingular);
    }
    let cells = clip::cell_weights(u, region);
    let mut inner = vec![0.0; basis.basis.len()];
    for &(flat, w) in &cells.items {
        let x = u.point_of_flat(flat);
        let uv = u.value(flat);
        for (i, e) in basis.basis.iter().enumerate() {
            let ev = e.eval(&x);
            let dot: f64 = ev.iter().zip(uv).map(|(a, b)| a * b).sum();
            inner[i] += w * dot;
        }
    }
    solve_projection(basis, region, &inner)
}

/// Averaged Taylor polynomial of order `m` of a grid function over a ball:
/// the ball average of the degree-`m` Taylor expansions, with derivatives
/// realized by second-order finite differences (one-sided at the box
/// boundary).
pub fn averaged_taylor(u: &GridFunction, m: usize, ball: &Region) -> Result<Polynomial> {
    if ball.kind != RegionKind::Ball {
        return Err(Error::InvalidRegion(
            "averaged Taylor polynomial needs a ball".into(),
        ));
    }
    if 2.0 * ball.radius < 4.0 * u.h() {
        return Err(Error::GridTooSmall(format!(
            "ball of diameter {} spans fewer than 4 cells (h = {})",
            2.0 * ball.radius,
            u.h()
        )));
    }
    let lo = u.lo();
    let hi = u.hi();
    for axis in 0..u.n() {
        if ball.center[axis] - ball.radius < lo[axis] || ball.center[axis] + ball.radius > hi[axis]
        {
            return Err(Error::RegionOutsideGrid(format!(
                "ball leaves the sampled box on axis {axis}"
            )));
        }
    }
    let cells = clip::cell_weights(u, ball);
    let n = u.n();
    let dim = u.dim();
    let mut out = Polynomial::zero(n, dim);
    for alpha in indices_up_to(n, m) {
        let field = fd::fd_field(u, &alpha, true)?;
        let inv_alpha_fact = 1.0 / alpha.factorial();
        // ball means of D^alpha u(y) * y^{alpha - gamma} for every gamma <= alpha
        for gamma in indices_up_to(n, alpha.order()) {
            let Some(delta) = alpha.checked_sub(&gamma) else {
                continue;
            };
            let sign = if delta.order() % 2 == 0 { 1.0 } else { -1.0 };
            let comb: f64 = alpha
                .0
                .iter()
                .zip(&gamma.0)
                .map(|(&a, &g)| binomial(a, g))
                .product();
            let mut acc = vec![0.0; dim];
            for &(flat, w) in &cells.items {
                let y = field.point_of_flat(flat);
                let mono = delta.monomial(&y);
                for (a, v) in acc.iter_mut().zip(field.value(flat)) {
                    *a += w * mono * v;
                }
            }
            let scale = sign * comb * inv_alpha_fact / cells.total;
            let coeff: Vec<f64> = acc.iter().map(|v| v * scale).collect();
            out.add_to(gamma.clone(), &coeff);
        }
    }
    Ok(out)
}

/// Dense polar sampling of `|q|` over the closed ball plus a local pattern
/// refinement around the best sample.
fn sup_norm_on_ball(q: &Polynomial, ball: &Region) -> f64 {
    let n = ball.dim();
    let radial = 48;
    let sphere = crate::region::sphere_quadrature(n, 40);
    let mut best = q.eval_norm(&ball.center);
    let mut best_x = ball.center.clone();
    for (dir, _) in &sphere {
        for i in 1..=radial {
            let rho = ball.radius * i as f64 / radial as f64;
            let x: Vec<f64> = ball
                .center
                .iter()
                .zip(dir)
                .map(|(c, d)| c + rho * d)
                .collect();
            let v = q.eval_norm(&x);
            if v > best {
                best = v;
                best_x = x;
            }
        }
    }
    // pattern refinement constrained to the closed ball; the sweep cap
    // keeps marginal-improvement cycles from stalling the search
    let mut step = ball.radius / radial as f64;
    let mut x = best_x;
    let mut sweeps = 0;
    while step > 1e-9 * ball.radius && sweeps < 10_000 {
        sweeps += 1;
        let mut improved = false;
        for axis in 0..n {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[axis] += sgn * step;
                let d: f64 = y
                    .iter()
                    .zip(&ball.center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d > ball.radius {
                    let scale = ball.radius / d;
                    for (yc, c) in y.iter_mut().zip(&ball.center) {
                        *yc = c + (*yc - c) * scale;
                    }
                }
                let v = q.eval_norm(&y);
                if v > best * (1.0 + 1e-15) {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Region mean of `|q|`. The integrand is only piecewise smooth (kinks on
/// the zero set of `q`), so the rule oversamples the angular directions far
/// beyond polynomial exactness; the trapezoid error on a periodic kinked
/// integrand decays quadratically in the angle count.
fn mean_abs_on_region(q: &Polynomial, region: &Region) -> f64 {
    let n = region.dim();
    let angular_degree = if n == 2 { 4095 } else { 95 };
    let sphere = crate::region::sphere_quadrature(n, angular_degree);
    let (rt, rw) = crate::region::gauss_jacobi_symmetric(48, 0.0);
    let r_in = region.inner_radius();
    let half = 0.5 * (region.radius - r_in);
    let mid = 0.5 * (region.radius + r_in);
    let mut acc = 0.0;
    let mut total = 0.0;
    let mut x = vec![0.0; n];
    for (t, wt) in rt.iter().zip(&rw) {
        let rho = mid + half * t;
        let wr = wt * half * rho.powi(n as i32 - 1);
        for (dir, wd) in &sphere {
            for (xi, (c, d)) in x.iter_mut().zip(region.center.iter().zip(dir)) {
                *xi = c + rho * d;
            }
            let w = wr * wd;
            acc += w * q.eval_norm(&x);
            total += w;
        }
    }
    acc / total
}

/// `sup_B |q| / (mean of |q| over B)` for a nonzero polynomial.
pub fn inverse_estimate_ratio(q: &Polynomial, ball: &Region) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if ball.kind != RegionKind::Ball {
        return Err(Error::InvalidRegion(
            "inverse estimate ratio needs a ball".into(),
        ));
    }
    let sup = sup_norm_on_ball(q, ball);
    let mean = mean_abs_on_region(q, ball);
    Ok(sup / mean)
}

/// `(mean of |q| over lambda B) / (mean of |q| over B)` for a polynomial
/// vanishing at the ball center; `lambda` in `(0, 1]`.
pub fn center_vanishing_ratio(q: &Polynomial, ball: &Region, lambda: f64) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if ball.kind != RegionKind::Ball {
        return Err(Error::InvalidRegion(
            "center-vanishing ratio needs a ball".into(),
        ));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )));
    }
    let value = q.eval_norm(&ball.center);
    if value > 1e-12 * q.coefficient_norm() {
        return Err(Error::PointNotVanishing { value });
    }
    let inner = mean_abs_on_region(q, &ball.scaled(lambda));
    let outer = mean_abs_on_region(q, ball);
    Ok(inner / outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use crate::nullspace::kernel_basis;
    use crate::zoo;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn projection_reproduces_basis_elements() {
        let basis = kernel_basis(&zoo::symmetric_gradient(2), 2).unwrap();
        let region = Region::ball(vec![0.3, -0.2], 0.8).unwrap();
        for e in &basis.basis {
            let p = project_l2(|x| e.eval(x), &basis, &region).unwrap();
            let diff = p.sub(e);
            for x in [[0.0, 0.0], [0.5, 0.2], [-0.3, 0.9]] {
                assert!(diff.eval_norm(&x) < 1e-8);
            }
        }
    }

    #[test]
    fn gradient_projection_is_the_region_mean() {
        // nullspace of the gradient = constants, so the projection must be
        // the mean over the region
        let basis = kernel_basis(&zoo::gradient(2), 4).unwrap();
        let region = Region::annulus(vec![0.1, 0.4], 0.7, 0.25).unwrap();
        let f = |x: &[f64]| vec![x[0] * x[0] - 0.3 * x[1] + 1.0];
        let p = project_l2(|x| f(x), &basis, &region).unwrap();
        // independent mean through the quadrature
        let quad = region.quadrature(8);
        let total: f64 = quad.weights.iter().sum();
        let mean: f64 = quad
            .nodes
            .iter()
            .zip(&quad.weights)
            .map(|(x, w)| w * f(x)[0])
            .sum::<f64>()
            / total;
        let val = p.eval(&[0.0, 0.0]);
        assert_eq!(p.degree(), Some(0));
        assert!((val[0] - mean).abs() < 1e-10, "{} vs {mean}", val[0]);
    }

    #[test]
    fn rotation_component_of_perturbed_rigid_motion() {
        // u = (-y + x^2, x) on B(0,1): the projection onto rigid motions
        // carries rotation coefficient exactly 1 and mean (1/4, 0)
        let basis = kernel_basis(&zoo::symmetric_gradient(2), 1).unwrap();
        let region = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let p = project_l2(|x| vec![-x[1] + x[0] * x[0], x[0]], &basis, &region).unwrap();
        // expected projection: (1/4 - y, x)
        for x in [[0.0, 0.0], [0.3, -0.4], [0.9, 0.1]] {
            let got = p.eval(&x);
            let want = [0.25 - x[1], x[0]];
            assert!((got[0] - want[0]).abs() < 1e-9, "{got:?} vs {want:?}");
            assert!((got[1] - want[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn projection_idempotent_and_self_adjoint() {
        let basis = kernel_basis(&zoo::symmetric_gradient(2), 3).unwrap();
        let region = Region::annulus(vec![0.0, 0.0], 1.2, 0.25).unwrap();
        let mut rng = StdRng::seed_from_u64(9);
        let quad = region.quadrature(2 * basis.degree + 6);
        for _ in 0..5 {
            // random polynomial sample of degree 3
            let mut u = Polynomial::zero(2, 2);
            let mut v = Polynomial::zero(2, 2);
            for alpha in crate::multi_index::indices_up_to(2, 3) {
                u.add_to(
                    alpha.clone(),
                    &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                );
                v.add_to(alpha, &[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            }
            let pu = project_l2(|x| u.eval(x), &basis, &region).unwrap();
            let ppu = project_l2(|x| pu.eval(x), &basis, &region).unwrap();
            // idempotence in L2(region)
            let diff = ppu.sub(&pu);
            let l2: f64 = quad
                .nodes
                .iter()
                .zip(&quad.weights)
                .map(|(x, w)| w * diff.eval_norm(x).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(l2 < 1e-8, "idempotence defect {l2}");
            // self-adjointness <Pu, v> = <u, Pv>
            let pv = project_l2(|x| v.eval(x), &basis, &region).unwrap();
            let a = region.l2_inner(&pu, &v);
            let b = region.l2_inner(&u, &pv);
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn taylor_reproduces_polynomials() {
        let h = 1.0 / 64.0;
        let g = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![128, 128], 1, |x| {
            vec![1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]]
        });
        let ball = Region::ball(vec![0.1, -0.2], 0.5).unwrap();
        let p = averaged_taylor(&g, 2, &ball).unwrap();
        for x in [[0.0, 0.0], [0.4, 0.3], [-0.5, 0.2]] {
            let want = 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1];
            let got = p.eval(&x)[0];
            assert!((got - want).abs() < 5e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn taylor_order_zero_is_the_ball_mean() {
        let h = 1.0 / 64.0;
        let g = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![128, 128], 1, |x| {
            vec![(2.0 * x[0]).sin() + x[1]]
        });
        let ball = Region::ball(vec![0.0, 0.0], 0.5).unwrap();
        let p = averaged_taylor(&g, 0, &ball).unwrap();
        let cells = clip::cell_weights(&g, &ball);
        let mean = clip::mean(&g, &cells);
        assert_eq!(p.degree(), Some(0));
        assert!((p.eval(&[9.0, 9.0])[0] - mean[0]).abs() < 1e-12);
    }

    #[test]
    fn taylor_linear_slope_of_sine() {
        // first-order averaged Taylor polynomial of sin(x) over B(0, 1/2):
        // x-slope = ball mean of cos(x1), which the radial oracle puts at
        // 4 J_1(1/2) = 0.969074 (the oracle below integrates the circle
        // means of cos directly)
        let oracle = {
            // mean of cos(x1) over B(0,R) via radial quadrature of the
            // closed-form circle average 2pi rho J0(rho)
            let rr = 0.5;
            let (t, w) = crate::region::gauss_jacobi_symmetric(64, 0.0);
            let mut num = 0.0;
            for (ti, wi) in t.iter().zip(&w) {
                let rho = 0.5 * rr * (ti + 1.0);
                // J0 by its defining angular mean
                let m = on_circle_mean_cos(rho);
                num += wi * 0.5 * rr * rho * m;
            }
            num * 2.0 * std::f64::consts::PI / (std::f64::consts::PI * rr * rr)
        };
        assert!((oracle - 0.969074).abs() < 1e-5, "oracle {oracle}");

        let h = 1.0 / 128.0;
        let g = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![256, 256], 1, |x| vec![x[0].sin()]);
        let ball = Region::ball(vec![0.0, 0.0], 0.5).unwrap();
        let p = averaged_taylor(&g, 1, &ball).unwrap();
        let slope = p
            .coeff(&MultiIndex(vec![1, 0]))
            .map(|c| c[0])
            .unwrap_or(0.0);
        assert!(
            (slope - oracle).abs() < 2e-3,
            "slope {slope} vs oracle {oracle}"
        );
    }

    fn on_circle_mean_cos(rho: f64) -> f64 {
        let m = 512;
        (0..m)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                (rho * theta.cos()).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    #[test]
    fn taylor_commutes_with_gradient() {
        // d/dx of the order-m polynomial equals the order-(m-1) polynomial of
        // the finite-difference derivative, up to consistency error
        let h = 1.0 / 128.0;
        let g = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![256, 256], 1, |x| {
            vec![(x[0] + 0.5 * x[1]).sin()]
        });
        let ball = Region::ball(vec![0.0, 0.1], 0.4).unwrap();
        let p2 = averaged_taylor(&g, 2, &ball).unwrap();
        let dx = fd::fd_field(&g, &MultiIndex(vec![1, 0]), true).unwrap();
        let p1 = averaged_taylor(&dx, 1, &ball).unwrap();
        let dp2 = p2.derivative(&MultiIndex(vec![1, 0]));
        for x in [[0.0, 0.0], [0.2, 0.2], [-0.3, 0.1]] {
            let a = dp2.eval(&x)[0];
            let b = p1.eval(&x)[0];
            assert!((a - b).abs() < 5e-3, "{a} vs {b}");
        }
    }

    #[test]
    fn taylor_errors() {
        let g = GridFunction::from_fn(vec![-1.0, -1.0], 0.25, vec![8, 8], 1, |x| vec![x[0]]);
        let tiny = Region::ball(vec![0.0, 0.0], 0.3).unwrap();
        assert!(matches!(
            averaged_taylor(&g, 1, &tiny),
            Err(Error::GridTooSmall(_))
        ));
        let outside = Region::ball(vec![0.9, 0.0], 0.5).unwrap();
        assert!(matches!(
            averaged_taylor(&g, 1, &outside),
            Err(Error::RegionOutsideGrid(_))
        ));
    }

    #[test]
    fn inverse_estimate_examples() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        // constants have ratio exactly 1
        let one = Polynomial::constant(2, &[1.0]);
        assert!((inverse_estimate_ratio(&one, &ball).unwrap() - 1.0).abs() < 1e-9);
        // q = x1 on the unit disk: sup = 1, mean |x1| = 4/(3 pi)
        let x1 = Polynomial::monomial(2, 1, MultiIndex(vec![1, 0]), 0, 1.0);
        let expect = 3.0 * std::f64::consts::PI / 4.0;
        let got = inverse_estimate_ratio(&x1, &ball).unwrap();
        assert!((got - expect).abs() < 1e-6 * expect, "{got} vs {expect}");
        assert!(inverse_estimate_ratio(&Polynomial::zero(2, 1), &ball).is_err());
    }

    #[test]
    fn inverse_estimate_scale_invariance() {
        let mut q = Polynomial::zero(2, 1);
        q.add_to(MultiIndex(vec![2, 0]), &[1.0]);
        q.add_to(MultiIndex(vec![0, 1]), &[-0.7]);
        q.add_to(MultiIndex(vec![1, 1]), &[0.3]);
        let base = inverse_estimate_ratio(&q, &Region::ball(vec![0.0, 0.0], 1.0).unwrap()).unwrap();
        for s in [2.0_f64, 4.0, 0.5] {
            let qs = q.scaled_args(1.0 / s);
            let scaled =
                inverse_estimate_ratio(&qs, &Region::ball(vec![0.0, 0.0], s).unwrap()).unwrap();
            assert!(
                (scaled - base).abs() <= 1e-6 * base,
                "ratio must be scale-free: {base} vs {scaled}"
            );
        }
    }

    #[test]
    fn grid_projection_of_indicator_is_clipped_mean() {
        // projecting onto the constants (gradient nullspace) through the
        // cell-clipped inner products must reproduce the clipped ball mean
        // even for a discontinuous sample
        let h = 1.0 / 128.0;
        let g = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![256, 256], 1, |x| {
            vec![if x[0] > 0.0 { 1.0 } else { 0.0 }]
        });
        let basis = kernel_basis(&zoo::gradient(2), 2).unwrap();
        let ball = Region::ball(vec![0.1, 0.0], 0.5).unwrap();
        let p = project_grid(&g, &basis, &ball).unwrap();
        let cells = clip::cell_weights(&g, &ball);
        let mean = clip::mean(&g, &cells)[0];
        assert_eq!(p.degree(), Some(0));
        assert!((p.eval(&[0.0, 0.0])[0] - mean).abs() < 1e-10);
    }

    #[test]
    fn center_vanishing_examples() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let x1 = Polynomial::monomial(2, 1, MultiIndex(vec![1, 0]), 0, 1.0);
        for lambda in [0.5, 0.25, 0.125] {
            let got = center_vanishing_ratio(&x1, &ball, lambda).unwrap();
            assert!((got - lambda).abs() < 1e-9, "{got} vs {lambda}");
        }
        assert!((center_vanishing_ratio(&x1, &ball, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // a polynomial that does not vanish at the center errors
        let one = Polynomial::constant(2, &[1.0]);
        assert!(matches!(
            center_vanishing_ratio(&one, &ball, 0.5),
            Err(Error::PointNotVanishing { .. })
        ));
    }

    #[test]
    fn center_vanishing_linear_bound_random_cubics() {
        let mut rng = StdRng::seed_from_u64(21);
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        for _ in 0..10 {
            let mut q = Polynomial::zero(2, 1);
            for alpha in crate::multi_index::indices_up_to(2, 3) {
                if alpha.order() == 0 {
                    continue;
                }
                q.add_to(alpha, &[rng.gen_range(-1.0..1.0)]);
            }
            if q.is_zero() {
                continue;
            }
            let mut bound: f64 = 0.0;
            for j in 1..=6 {
                let lambda = 2f64.powi(-j);
                let ratio = center_vanishing_ratio(&q, &ball, lambda).unwrap();
                bound = bound.max(ratio / lambda);
            }
            assert!(
                bound < 12.0,
                "ratio/lambda should stay bounded, got {bound}"
            );
        }
    }
}
