//! Analytic prototype functions sampled onto grids: smooth products,
//! half-plane and half-disk indicators, the cone `|x - c|`, and explicit
//! polynomials.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::GridFunction;
use crate::polynomial::Polynomial;
use crate::Result;

/// Named analytic prototypes; each kind carries its own parameters with
/// sensible defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionKind {
    /// `prod_i sin(freq_i x_i + phase_i)` (scalar).
    Smooth {
        #[serde(default)]
        freq: Option<Vec<f64>>,
        #[serde(default)]
        phase: Option<Vec<f64>>,
    },
    /// Indicator of the open half-space `normal . x > offset`.
    IndicatorHalfplane {
        #[serde(default)]
        normal: Option<Vec<f64>>,
        #[serde(default)]
        offset: f64,
    },
    /// Indicator of the upper half-ball `|x - center| < radius` with the
    /// last coordinate above the center.
    IndicatorHalfdisk {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "default_radius")]
        radius: f64,
    },
    /// The cone `|x - center|`.
    ConeAbs {
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Samples of an explicit polynomial (possibly vector-valued).
    Polynomial { poly: Polynomial },
}

fn default_radius() -> f64 {
    1.0
}

impl TestFunctionKind {
    pub fn codomain_dim(&self) -> usize {
        match self {
            TestFunctionKind::Polynomial { poly } => poly.dim(),
            _ => 1,
        }
    }
}

/// Samples the prototype at the cell centers of the box `[lo, hi]` with
/// spacing `h`; the box extents must be integer multiples of `h`.
pub fn synthesize(kind: &TestFunctionKind, lo: &[f64], hi: &[f64], h: f64) -> Result<GridFunction> {
    let n = lo.len();
    if hi.len() != n {
        return Err(Error::DimensionMismatch {
            what: "box corner",
            expected: n,
            got: hi.len(),
        });
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spacing must be positive, got {h}"
        )));
    }
    let mut dims = Vec::with_capacity(n);
    for axis in 0..n {
        let extent = hi[axis] - lo[axis];
        if !(extent > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "box must have positive extent on axis {axis}"
            )));
        }
        let cells = extent / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "extent {extent} on axis {axis} is not an integer multiple of h = {h}"
            )));
        }
        dims.push(rounded as usize);
    }
    let dim = kind.codomain_dim();
    match kind {
        TestFunctionKind::Smooth { freq, phase } => {
            let freq = resolve(freq, n, 1.0, "freq")?;
            let phase = resolve(phase, n, 0.0, "phase")?;
            Ok(GridFunction::from_fn(lo.to_vec(), h, dims, dim, |x| {
                let v: f64 = x
                    .iter()
                    .zip(freq.iter().zip(&phase))
                    .map(|(xi, (f, p))| (f * xi + p).sin())
                    .product();
                vec![v]
            }))
        }
        TestFunctionKind::IndicatorHalfplane { normal, offset } => {
            let mut default_normal = vec![0.0; n];
            default_normal[0] = 1.0;
            let normal = match normal {
                Some(v) => check_len(v.clone(), n, "normal")?,
                None => default_normal,
            };
            Ok(GridFunction::from_fn(lo.to_vec(), h, dims, dim, |x| {
                let s: f64 = x.iter().zip(&normal).map(|(a, b)| a * b).sum();
                vec![if s > *offset { 1.0 } else { 0.0 }]
            }))
        }
        TestFunctionKind::IndicatorHalfdisk { center, radius } => {
            let center = match center {
                Some(c) => check_len(c.clone(), n, "center")?,
                None => vec![0.0; n],
            };
            let r2 = radius * radius;
            Ok(GridFunction::from_fn(lo.to_vec(), h, dims, dim, |x| {
                let d2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                let upper = x[n - 1] - center[n - 1] > 0.0;
                vec![if d2 < r2 && upper { 1.0 } else { 0.0 }]
            }))
        }
        TestFunctionKind::ConeAbs { center } => {
            let center = match center {
                Some(c) => check_len(c.clone(), n, "center")?,
                None => vec![0.0; n],
            };
            Ok(GridFunction::from_fn(lo.to_vec(), h, dims, dim, |x| {
                let d2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
                vec![d2.sqrt()]
            }))
        }
        TestFunctionKind::Polynomial { poly } => {
            if poly.vars() != n {
                return Err(Error::DimensionMismatch {
                    what: "polynomial variables",
                    expected: n,
                    got: poly.vars(),
                });
            }
            Ok(GridFunction::from_fn(lo.to_vec(), h, dims, dim, |x| {
                poly.eval(x)
            }))
        }
    }
}

fn resolve(v: &Option<Vec<f64>>, n: usize, default: f64, what: &'static str) -> Result<Vec<f64>> {
    match v {
        Some(v) => check_len(v.clone(), n, what),
        None => Ok(vec![default; n]),
    }
}

fn check_len(v: Vec<f64>, n: usize, _what: &'static str) -> Result<Vec<f64>> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            what: "parameter vector",
            expected: n,
            got: v.len(),
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;

    #[test]
    fn halfdisk_mass_fraction() {
        // area pi/2 out of a 16-area box
        let h = 1.0 / 256.0;
        let g = synthesize(
            &TestFunctionKind::IndicatorHalfdisk {
                center: None,
                radius: 1.0,
            },
            &[-2.0, -2.0],
            &[2.0, 2.0],
            h,
        )
        .unwrap();
        let ones = g.values().iter().filter(|&&v| v == 1.0).count();
        let zeros = g.values().iter().filter(|&&v| v == 0.0).count();
        assert_eq!(ones + zeros, g.num_points());
        let fraction = ones as f64 / g.num_points() as f64;
        let expect = std::f64::consts::PI / 2.0 / 16.0;
        assert!((fraction - expect).abs() < 1e-3, "{fraction} vs {expect}");
    }

    #[test]
    fn polynomial_samples_are_exact() {
        // rigid rotation (-y, x)
        let mut p = Polynomial::zero(2, 2);
        p.add_to(MultiIndex(vec![0, 1]), &[-1.0, 0.0]);
        p.add_to(MultiIndex(vec![1, 0]), &[0.0, 1.0]);
        let g = synthesize(
            &TestFunctionKind::Polynomial { poly: p.clone() },
            &[-1.0, -1.0],
            &[1.0, 1.0],
            0.25,
        )
        .unwrap();
        for flat in 0..g.num_points() {
            let x = g.point_of_flat(flat);
            assert_eq!(g.value(flat), p.eval(&x).as_slice());
        }
    }

    #[test]
    fn cone_is_symmetric() {
        let g = synthesize(
            &TestFunctionKind::ConeAbs { center: None },
            &[-1.0, -1.0],
            &[1.0, 1.0],
            0.125,
        )
        .unwrap();
        let dims = g.dims().to_vec();
        for flat in 0..g.num_points() {
            let idx = g.index_of_flat(flat);
            let mirrored: Vec<usize> = idx.iter().zip(&dims).map(|(&i, &d)| d - 1 - i).collect();
            let v = g.value(flat)[0];
            let vm = g.value(g.flat_of_index(&mirrored))[0];
            assert_eq!(v, vm, "u(x) must equal u(-x) exactly");
        }
        // center value: nearest samples sit half a cell away
        let v = g.interp(&[0.0, 0.0]);
        assert!(v[0] < 0.1);
    }

    #[test]
    fn bad_boxes_are_rejected() {
        let kind = TestFunctionKind::Smooth {
            freq: None,
            phase: None,
        };
        assert!(synthesize(&kind, &[0.0, 0.0], &[1.0, 1.0], 0.3).is_err());
        assert!(synthesize(&kind, &[0.0, 0.0], &[0.0, 1.0], 0.25).is_err());
        assert!(synthesize(&kind, &[0.0, 0.0], &[1.0], 0.25).is_err());
    }
}
