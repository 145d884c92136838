//! Discrete W-valued Radon measures: weighted atoms plus an optional grid
//! density, with Riesz potentials, ball masses and fractional maximal
//! functions.
//!
//! A grid density interprets every lattice sample as one cell of volume
//! `h^n` centered at the sample point; the representative point of a cell is
//! its center. Restriction keeps atoms and cells whose representative point
//! lies in the region.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::GridFunction;
use crate::region::{gauss_jacobi_symmetric, Region};
use crate::Result;

/// One weighted point mass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

/// A finite vector-valued measure given by atoms and/or a cellwise density.
#[derive(Clone, Debug, Default)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
    pub density: Option<GridFunction>,
}

/// A potential value; infinities are an explicit flag that downstream
/// classification can branch on, never a float overflow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialValue {
    Finite(f64),
    Infinite,
}

impl PotentialValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, PotentialValue::Infinite)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl DiscreteMeasure {
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        DiscreteMeasure {
            atoms,
            density: None,
        }
    }

    pub fn from_density(density: GridFunction) -> Self {
        DiscreteMeasure {
            atoms: Vec::new(),
            density: Some(density),
        }
    }

    /// Ambient dimension, taken from the first atom or the density grid.
    pub fn ambient_dim(&self) -> Option<usize> {
        self.atoms
            .first()
            .map(|a| a.x.len())
            .or_else(|| self.density.as_ref().map(|d| d.n()))
    }

    /// Total variation: sum of atom weight norms plus cell masses.
    pub fn total_variation(&self) -> f64 {
        let mut tv: f64 = self.atoms.iter().map(|a| norm(&a.w)).sum();
        if let Some(d) = &self.density {
            let cell = d.cell_volume();
            tv += (0..d.num_points())
                .map(|i| norm(d.value(i)) * cell)
                .sum::<f64>();
        }
        tv
    }

    /// Keeps atoms and cells whose representative point lies in the region;
    /// density cells outside are zeroed in place on a copy.
    pub fn restrict(&self, region: &Region) -> DiscreteMeasure {
        let atoms = self
            .atoms
            .iter()
            .filter(|a| region.contains(&a.x))
            .cloned()
            .collect();
        let density = self.density.as_ref().map(|d| {
            let mut masked = d.clone();
            for i in 0..masked.num_points() {
                let p = masked.point_of_flat(i);
                if !region.contains(&p) {
                    masked.zero_value(i);
                }
            }
            masked
        });
        DiscreteMeasure { atoms, density }
    }

    /// Total-variation mass inside the open ball `B(x0, r)`.
    pub fn mass_in_ball(&self, x0: &[f64], r: f64) -> f64 {
        let mut mass: f64 = self
            .atoms
            .iter()
            .filter(|a| dist(&a.x, x0) < r)
            .map(|a| norm(&a.w))
            .sum();
        if let Some(d) = &self.density {
            let cell = d.cell_volume();
            mass += d
                .flat_indices_near(x0, r)
                .filter(|&i| dist(&d.point_of_flat(i), x0) < r)
                .map(|i| norm(d.value(i)) * cell)
                .sum::<f64>();
        }
        mass
    }

    /// Riesz potential `integral |x0 - y|^{s-n} d|mu|(y)` of order `s > 0`.
    ///
    /// Atoms exactly at `x0` with nonzero weight make the value infinite
    /// when `s < n`. Density cells contribute at their centers except the
    /// one containing `x0`, which uses the closed-form integral of the
    /// kernel over a centered cube of the cell size; dropping it instead
    /// would mask the divergence rate under grid refinement.
    ///
    /// ```
    /// use celliptic::measure::{Atom, DiscreteMeasure, PotentialValue};
    ///
    /// let mu = DiscreteMeasure::from_atoms(vec![Atom { x: vec![0.0, 0.0], w: vec![1.0] }]);
    /// assert_eq!(mu.riesz_potential(1.0, &[1.0, 0.0]).unwrap(), PotentialValue::Finite(1.0));
    /// assert!(mu.riesz_potential(1.0, &[0.0, 0.0]).unwrap().is_infinite());
    /// ```
    pub fn riesz_potential(&self, s: f64, x0: &[f64]) -> Result<PotentialValue> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "riesz potential order must be positive, got {s}"
            )));
        }
        self.riesz_potential_within(s, x0, f64::INFINITY)
    }

    /// Riesz potential of the restriction to the open ball `B(x0, r)`,
    /// without materializing the restricted measure.
    pub fn riesz_potential_in_ball(&self, s: f64, x0: &[f64], r: f64) -> Result<PotentialValue> {
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "riesz potential order must be positive, got {s}"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {r}"
            )));
        }
        self.riesz_potential_within(s, x0, r)
    }

    fn riesz_potential_within(&self, s: f64, x0: &[f64], r: f64) -> Result<PotentialValue> {
        let n = self
            .ambient_dim()
            .ok_or_else(|| Error::InvalidParameter("empty measure has no dimension".into()))?;
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                what: "potential base point",
                expected: n,
                got: x0.len(),
            });
        }
        let exponent = s - n as f64;
        let mut acc = 0.0;
        for a in &self.atoms {
            let d = dist(&a.x, x0);
            if d >= r {
                continue;
            }
            let w = norm(&a.w);
            if d == 0.0 && exponent < 0.0 {
                // the kernel blows up at the base point only for s < n;
                // massless atoms contribute nothing either way
                if w > 0.0 {
                    return Ok(PotentialValue::Infinite);
                }
                continue;
            }
            // 0^0 = 1 covers s = n; s > n contributes nothing at d = 0
            acc += w * d.powf(exponent);
        }
        if let Some(den) = &self.density {
            let h = den.h();
            let cell_vol = den.cell_volume();
            let own = den.cell_containing(x0);
            let kernel_cube = cube_kernel_constant(s, n) * h.powf(s);
            for i in den.flat_indices_near(x0, r.min(1e300)) {
                let c = den.point_of_flat(i);
                let d = dist(&c, x0);
                if d >= r {
                    continue;
                }
                let w = norm(den.value(i));
                if w == 0.0 {
                    continue;
                }
                if own == Some(i) {
                    acc += w * kernel_cube;
                } else {
                    acc += w * cell_vol * d.powf(exponent);
                }
            }
        }
        Ok(PotentialValue::Finite(acc))
    }

    /// `max over given radii of |mu|(B(x0, r)) / r^{n-k}`; a lower bound for
    /// the supremum over all radii.
    pub fn fractional_maximal(&self, k: usize, x0: &[f64], radii: &[f64]) -> Result<f64> {
        let n = self
            .ambient_dim()
            .ok_or_else(|| Error::InvalidParameter("empty measure has no dimension".into()))?;
        if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidParameter(
                "maximal function needs a nonempty list of positive radii".into(),
            ));
        }
        let mut best = 0.0_f64;
        for &r in radii {
            let v = self.mass_in_ball(x0, r) / r.powi(n as i32 - k as i32);
            best = best.max(v);
        }
        Ok(best)
    }
}

/// Geometric radius ladder `r_max * 2^{-j/per_octave}` descending over the
/// given number of octaves.
pub fn radius_ladder(r_max: f64, octaves: usize, per_octave: usize) -> Vec<f64> {
    let steps = octaves * per_octave;
    (0..=steps)
        .map(|j| r_max * 2f64.powf(-(j as f64) / per_octave as f64))
        .collect()
}

/// `integral over the centered unit cube of |z|^{s-n} dz`, finite for all
/// `s > 0`. Computed through the divergence identity
/// `s |z|^{s-n} = div(z |z|^{s-n})`, which turns the singular volume integral
/// into a smooth one over the cube faces.
pub fn cube_kernel_constant(s: f64, n: usize) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize), f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (s.to_bits(), n);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return *v;
    }
    // (n/s) * integral over [-1/2,1/2]^{n-1} of (1/4 + |y|^2)^{(s-n)/2} dy
    let (t, w) = gauss_jacobi_symmetric(48, 0.0);
    let face_dim = n - 1;
    let mut integral = 0.0;
    let mut idx = vec![0usize; face_dim];
    'outer: loop {
        let mut y2 = 0.0;
        let mut weight = 1.0;
        for &i in &idx {
            let yi = 0.5 * t[i];
            y2 += yi * yi;
            weight *= 0.5 * w[i];
        }
        integral += weight * (0.25 + y2).powf((s - n as f64) / 2.0);
        for axis in 0..face_dim {
            idx[axis] += 1;
            if idx[axis] < t.len() {
                continue 'outer;
            }
            idx[axis] = 0;
        }
        break;
    }
    if face_dim == 0 {
        // n = 1: the faces are two points at distance 1/2
        integral = 0.5_f64.powf(s - 1.0);
    }
    let value = n as f64 / s * integral;
    cache.lock().unwrap().insert(key, value);
    value
}
