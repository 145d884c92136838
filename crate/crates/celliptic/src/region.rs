//! Balls and annuli with polynomial-exact quadrature and closed-form
//! monomial integrals.
//!
//! Quadrature is a tensor product of a radial Gauss rule (weight `rho^{n-1}`
//! absorbed into the weights) with a product rule on the sphere built from
//! uniform angles (n = 2) and symmetric Gauss-Jacobi rules in `cos(phi)` for
//! the remaining latitudes. For total degree `D` the rule integrates every
//! polynomial of degree `<= D` over the region exactly up to rounding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::multi_index::MultiIndex;
use crate::polynomial::Polynomial;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ball,
    Annulus,
}

/// An open ball `B(center, radius)` or annulus `B \ lambda * closed(B)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Region {
    pub kind: RegionKind,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidRegion(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Region {
            kind: RegionKind::Ball,
            center,
            radius,
            lambda: 0.0,
        })
    }

    pub fn annulus(center: Vec<f64>, radius: f64, lambda: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidRegion(format!(
                "radius must be positive, got {radius}"
            )));
        }
        if !(0.0..=0.5).contains(&lambda) {
            return Err(Error::InvalidRegion(format!(
                "annulus ratio must lie in [0, 1/2], got {lambda}"
            )));
        }
        Ok(Region {
            kind: RegionKind::Annulus,
            center,
            radius,
            lambda,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) {
            return Err(Error::InvalidRegion("radius must be positive".into()));
        }
        if !(0.0..=0.5).contains(&self.lambda) {
            return Err(Error::InvalidRegion("lambda must lie in [0, 1/2]".into()));
        }
        if self.kind == RegionKind::Ball && self.lambda != 0.0 {
            return Err(Error::InvalidRegion("a ball must have lambda = 0".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Inner exclusion radius (`0` for balls).
    pub fn inner_radius(&self) -> f64 {
        self.lambda * self.radius
    }

    /// Same center, radius scaled by `s` (inner radius scales along).
    pub fn scaled(&self, s: f64) -> Region {
        Region {
            kind: self.kind,
            center: self.center.clone(),
            radius: self.radius * s,
            lambda: self.lambda,
        }
    }

    /// Membership; the annulus excludes the closed inner ball (for
    /// `lambda = 0` that is the punctured ball).
    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let d = d2.sqrt();
        if d >= self.radius {
            return false;
        }
        match self.kind {
            RegionKind::Ball => true,
            RegionKind::Annulus => d > self.inner_radius(),
        }
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let full = unit_ball_volume(n) * self.radius.powi(n as i32);
        full * (1.0 - self.lambda.powi(n as i32))
    }

    /// Tensor rule exact for polynomials of total degree `<= degree`.
    pub fn quadrature(&self, degree: usize) -> Quadrature {
        let n = self.dim();
        let r_in = self.inner_radius();
        let r_out = self.radius;
        // radial integrand: polynomial of degree `degree` times rho^{n-1}
        let q_r = (degree + n).div_ceil(2).max(2);
        let (rt, rw) = gauss_jacobi_symmetric(q_r, 0.0);
        let half = 0.5 * (r_out - r_in);
        let mid = 0.5 * (r_out + r_in);
        let sphere = sphere_quadrature(n, degree);
        let mut nodes = Vec::with_capacity(q_r * sphere.len());
        let mut weights = Vec::with_capacity(q_r * sphere.len());
        for (t, wt) in rt.iter().zip(&rw) {
            let rho = mid + half * t;
            let wr = wt * half * rho.powi(n as i32 - 1);
            for (dir, wd) in &sphere {
                let node: Vec<f64> = self
                    .center
                    .iter()
                    .zip(dir)
                    .map(|(c, d)| c + rho * d)
                    .collect();
                nodes.push(node);
                weights.push(wr * wd);
            }
        }
        Quadrature { nodes, weights }
    }

    /// Exact integral of `(x - center)^beta` over the region.
    pub fn monomial_integral_centered(&self, beta: &MultiIndex) -> f64 {
        let n = self.dim();
        let p = beta.order() + n;
        let unit = unit_ball_monomial_integral(beta);
        unit * self.radius.powi(p as i32) * (1.0 - self.lambda.powi(p as i32))
    }

    /// Exact integral of a scalar polynomial (in global coordinates) over the
    /// region.
    pub fn polynomial_integral(&self, p: &Polynomial) -> f64 {
        debug_assert_eq!(p.dim(), 1);
        let centered = p.shifted(&self.center);
        centered
            .coeffs()
            .map(|(alpha, c)| c[0] * self.monomial_integral_centered(alpha))
            .sum()
    }

    /// Exact L2 inner product of two vector polynomials over the region.
    pub fn l2_inner(&self, p: &Polynomial, q: &Polynomial) -> f64 {
        self.polynomial_integral(&p.dot(q))
    }
}

/// Nodes strictly inside the region with positive weights summing to its
/// volume.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a scalar function given at the nodes.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_fn<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .sum()
    }
}

/// Gamma(k/2) for positive integer k.
pub fn gamma_half(k: usize) -> f64 {
    match k {
        1 => std::f64::consts::PI.sqrt(),
        2 => 1.0,
        _ => (k as f64 / 2.0 - 1.0) * gamma_half(k - 2),
    }
}

/// Volume of the unit ball in n dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n + 2)
}

/// Surface measure of the unit sphere in n dimensions.
pub fn unit_sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Exact integral of `x^beta` over the unit ball; zero when any exponent is
/// odd.
pub fn unit_ball_monomial_integral(beta: &MultiIndex) -> f64 {
    if beta.0.iter().any(|&b| b % 2 == 1) {
        return 0.0;
    }
    let n = beta.len();
    let total = beta.order();
    // surface integral of x^beta: 2 * prod Gamma((b_i+1)/2) / Gamma((|b|+n)/2)
    let num: f64 = beta.0.iter().map(|&b| gamma_half(b + 1)).product();
    let surface = 2.0 * num / gamma_half(total + n);
    surface / (total + n) as f64
}

/// Nodes and weights of the Gauss rule for the weight `(1-t^2)^alpha` on
/// `[-1, 1]` (Golub-Welsch on the symmetric Jacobi recurrence).
/// `alpha = 0` is Gauss-Legendre.
pub fn gauss_jacobi_symmetric(npts: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(npts >= 1);
    let mu0 = std::f64::consts::PI.sqrt() * gamma_real(alpha + 1.0) / gamma_real(alpha + 1.5);
    if npts == 1 {
        return (vec![0.0], vec![mu0]);
    }
    let mut jac = DMatrix::<f64>::zeros(npts, npts);
    for k in 1..npts {
        let kf = k as f64;
        let b2 = kf * (kf + 2.0 * alpha)
            / ((2.0 * kf + 2.0 * alpha + 1.0) * (2.0 * kf + 2.0 * alpha - 1.0));
        let b = b2.sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..npts)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let w = mu0 * eig.eigenvectors[(0, i)].powi(2);
            (node, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Product rule on the unit sphere `S^{n-1}` exact for polynomials of total
/// degree `<= degree`; returns (direction, weight) pairs.
pub fn sphere_quadrature(n: usize, degree: usize) -> Vec<(Vec<f64>, f64)> {
    assert!(n >= 2);
    if n == 2 {
        let m = (degree + 1).max(4);
        let w = 2.0 * std::f64::consts::PI / m as f64;
        return (0..m)
            .map(|j| {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                (vec![theta.cos(), theta.sin()], w)
            })
            .collect();
    }
    // x = (sqrt(1-t^2) * omega, t), weight (1-t^2)^{(n-3)/2}
    let q_t = (degree + 2).div_ceil(2).max(2);
    let (tn, tw) = gauss_jacobi_symmetric(q_t, (n as f64 - 3.0) / 2.0);
    let sub = sphere_quadrature(n - 1, degree);
    let mut out = Vec::with_capacity(tn.len() * sub.len());
    for (t, wt) in tn.iter().zip(&tw) {
        let s = (1.0 - t * t).sqrt();
        for (omega, wo) in &sub {
            let mut dir: Vec<f64> = omega.iter().map(|o| s * o).collect();
            dir.push(*t);
            out.push((dir, wt * wo));
        }
    }
    out
}

// Gamma for the small positive arguments used by the Jacobi recurrences:
// integers and half-integers only.
fn gamma_real(x: f64) -> f64 {
    let twice = 2.0 * x;
    let rounded = twice.round();
    debug_assert!((twice - rounded).abs() < 1e-12 && rounded >= 1.0);
    gamma_half(rounded as usize)
}
