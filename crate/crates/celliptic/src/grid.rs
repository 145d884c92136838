//! Functions sampled on uniform cell-centered lattices: finite-difference
//! application of an operator, variation measures, and dyadic oscillation
//! profiles over balls and annuli.
//!
//! A `GridFunction` covers the box `[lo, lo + dims*h]` with `dims` cells per
//! axis; samples live at cell centers `lo + (i + 1/2) h`. Cell-centered
//! sampling makes the grid, its measure interpretation and clipped integrals
//! agree: every sample owns exactly one cell of volume `h^n`.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::measure::{DiscreteMeasure, PotentialValue};
use crate::operator::Operator;
use crate::region::{Region, RegionKind};
use crate::Result;

const GRID_MAGIC: &[u8; 8] = b"CELGRID1";

/// A vector-valued function sampled on a uniform cell-centered lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    lo: Vec<f64>,
    h: f64,
    dims: Vec<usize>,
    dim: usize,
    values: Vec<f64>,
}

/// JSON sidecar mirroring the binary header.
#[derive(Serialize, Deserialize)]
struct GridSidecar {
    n: usize,
    dim: usize,
    dims: Vec<usize>,
    h: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(lo: Vec<f64>, h: f64, dims: Vec<usize>, dim: usize) -> Self {
        let total: usize = dims.iter().product();
        GridFunction {
            lo,
            h,
            dims,
            dim,
            values: vec![0.0; total * dim],
        }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn<F: FnMut(&[f64]) -> Vec<f64>>(
        lo: Vec<f64>,
        h: f64,
        dims: Vec<usize>,
        dim: usize,
        mut f: F,
    ) -> Self {
        let mut g = GridFunction::zeros(lo, h, dims, dim);
        let mut x = vec![0.0; g.n()];
        for flat in 0..g.num_points() {
            g.write_point_of_flat(flat, &mut x);
            let v = f(&x);
            debug_assert_eq!(v.len(), dim);
            let off = flat * dim;
            g.values[off..off + dim].copy_from_slice(&v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.dims)
            .map(|(l, &d)| l + d as f64 * self.h)
            .collect()
    }

    pub fn num_points(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n() as i32)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, flat: usize) -> &[f64] {
        &self.values[flat * self.dim..(flat + 1) * self.dim]
    }

    pub fn value_mut(&mut self, flat: usize) -> &mut [f64] {
        &mut self.values[flat * self.dim..(flat + 1) * self.dim]
    }

    pub fn zero_value(&mut self, flat: usize) {
        self.value_mut(flat).fill(0.0);
    }

    pub fn flat_of_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (i, &d) in idx.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        flat
    }

    pub fn index_of_flat(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.n()];
        for axis in (0..self.n()).rev() {
            idx[axis] = flat % self.dims[axis];
            flat /= self.dims[axis];
        }
        idx
    }

    /// Cell center of the lattice index.
    pub fn point_of_index(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.lo)
            .map(|(&i, l)| l + (i as f64 + 0.5) * self.h)
            .collect()
    }

    pub fn point_of_flat(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        self.write_point_of_flat(flat, &mut x);
        x
    }

    fn write_point_of_flat(&self, mut flat: usize, x: &mut [f64]) {
        for axis in (0..self.n()).rev() {
            let i = flat % self.dims[axis];
            flat /= self.dims[axis];
            x[axis] = self.lo[axis] + (i as f64 + 0.5) * self.h;
        }
    }

    /// Lattice flat index of the half-open cell containing `x`, if inside.
    pub fn cell_containing(&self, x: &[f64]) -> Option<usize> {
        let mut idx = Vec::with_capacity(self.n());
        for axis in 0..self.n() {
            let rel = (x[axis] - self.lo[axis]) / self.h;
            if rel < 0.0 {
                return None;
            }
            let i = rel.floor() as usize;
            if i >= self.dims[axis] {
                return None;
            }
            idx.push(i);
        }
        Some(self.flat_of_index(&idx))
    }

    /// Flat indices of cells whose center could lie within distance `r` of
    /// `x0` (a bounding-box prefilter; callers re-check the metric).
    pub fn flat_indices_near<'a>(&'a self, x0: &[f64], r: f64) -> impl Iterator<Item = usize> + 'a {
        let n = self.n();
        let mut ranges = Vec::with_capacity(n);
        for axis in 0..n {
            let d = self.dims[axis] as f64;
            // clamp on the float side; huge or infinite radii fall back to
            // the full axis range without integer overflow
            let lo_f = ((x0[axis] - r - self.lo[axis]) / self.h - 0.5)
                .floor()
                .clamp(0.0, d);
            let hi_f = (((x0[axis] + r - self.lo[axis]) / self.h - 0.5).ceil() + 1.0).clamp(0.0, d);
            ranges.push(lo_f as usize..hi_f as usize);
        }
        RangeProduct::new(ranges, self.dims.clone())
    }

    /// Multilinear interpolation between cell centers, clamped to the sample
    /// hull at the boundary.
    pub fn interp(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for axis in 0..n {
            let rel = (x[axis] - self.lo[axis]) / self.h - 0.5;
            let max_i = self.dims[axis] - 1;
            let clamped = rel.clamp(0.0, max_i as f64);
            let i0 = (clamped.floor() as usize).min(max_i.saturating_sub(1));
            let t = (clamped - i0 as f64).clamp(0.0, 1.0);
            base.push(i0);
            frac.push(t);
        }
        let mut out = vec![0.0; self.dim];
        for corner in 0..(1usize << n) {
            let mut weight = 1.0;
            let mut idx = Vec::with_capacity(n);
            for axis in 0..n {
                let hi = (corner >> axis) & 1 == 1;
                let t = frac[axis];
                weight *= if hi { t } else { 1.0 - t };
                idx.push(base[axis] + if hi { 1 } else { 0 });
            }
            if weight == 0.0 {
                continue;
            }
            let idx: Vec<usize> = idx
                .iter()
                .zip(&self.dims)
                .map(|(&i, &d)| i.min(d - 1))
                .collect();
            let v = self.value(self.flat_of_index(&idx));
            for (o, vv) in out.iter_mut().zip(v) {
                *o += weight * vv;
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Writes the flat binary file plus a `<path>.json` sidecar.
    pub fn write_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let path = path.as_ref();
        let mut buf: Vec<u8> = Vec::with_capacity(64 + self.values.len() * 8);
        buf.extend_from_slice(GRID_MAGIC);
        buf.extend_from_slice(&(self.n() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for &d in &self.dims {
            buf.extend_from_slice(&(d as u64).to_le_bytes());
        }
        buf.extend_from_slice(&self.h.to_le_bytes());
        for &l in &self.lo {
            buf.extend_from_slice(&l.to_le_bytes());
        }
        for &v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(&buf)?;
        let sidecar = GridSidecar {
            n: self.n(),
            dim: self.dim,
            dims: self.dims.clone(),
            h: self.h,
            lo: self.lo.clone(),
            hi: self.hi(),
        };
        let mut sidecar_path = path.as_os_str().to_owned();
        sidecar_path.push(".json");
        std::fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)?)?;
        Ok(())
    }

    pub fn read_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut data = Vec::new();
        std::fs::File::open(path.as_ref())?.read_to_end(&mut data)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, len: usize| -> Result<&[u8]> {
            if *pos + len > data.len() {
                return Err(Error::FileFormat("truncated grid file".into()));
            }
            let s = &data[*pos..*pos + len];
            *pos += len;
            Ok(s)
        };
        if take(&mut pos, 8)? != GRID_MAGIC {
            return Err(Error::FileFormat("bad magic; not a grid file".into()));
        }
        let n = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        if n == 0 || n > 8 || dim == 0 || dim > 1024 {
            return Err(Error::FileFormat(format!(
                "implausible grid header n={n} dim={dim}"
            )));
        }
        let mut dims = Vec::with_capacity(n);
        for _ in 0..n {
            dims.push(u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize);
        }
        let h = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let mut lo = Vec::with_capacity(n);
        for _ in 0..n {
            lo.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        let total: usize = dims.iter().product::<usize>() * dim;
        let payload = take(&mut pos, total * 8)?;
        let values: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let g = GridFunction {
            lo,
            h,
            dims,
            dim,
            values,
        };
        if !(g.h > 0.0) {
            return Err(Error::FileFormat("grid spacing must be positive".into()));
        }
        if !g.all_finite() {
            return Err(Error::FileFormat("grid contains non-finite values".into()));
        }
        Ok(g)
    }
}

struct RangeProduct {
    ranges: Vec<std::ops::Range<usize>>,
    dims: Vec<usize>,
    cur: Vec<usize>,
    done: bool,
}

impl RangeProduct {
    fn new(ranges: Vec<std::ops::Range<usize>>, dims: Vec<usize>) -> Self {
        let done = ranges.iter().any(|r| r.is_empty());
        let cur = ranges.iter().map(|r| r.start).collect();
        RangeProduct {
            ranges,
            dims,
            cur,
            done,
        }
    }
}

impl Iterator for RangeProduct {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        let mut flat = 0;
        for (i, d) in self.cur.iter().zip(&self.dims) {
            flat = flat * d + i;
        }
        // advance
        for axis in (0..self.cur.len()).rev() {
            self.cur[axis] += 1;
            if self.cur[axis] < self.ranges[axis].end {
                return Some(flat);
            }
            self.cur[axis] = self.ranges[axis].start;
        }
        self.done = true;
        Some(flat)
    }
}

pub mod fd {
    //! Finite-difference stencils (Fornberg weights) on uniform lattices.

    use super::GridFunction;
    use crate::error::Error;
    use crate::multi_index::MultiIndex;
    use crate::Result;

    /// Fornberg weight table: row `k` holds the weights of the `k`-th
    /// derivative at 0 for samples at `offsets`.
    pub fn fornberg_table(max_order: usize, offsets: &[f64]) -> Vec<Vec<f64>> {
        let nn = offsets.len();
        let m = max_order;
        let z = 0.0;
        let mut delta = vec![vec![vec![0.0; m + 1]; nn]; nn];
        delta[0][0][0] = 1.0;
        let mut c1 = 1.0;
        for n in 1..nn {
            let mut c2 = 1.0;
            for v in 0..n {
                let c3 = offsets[n] - offsets[v];
                c2 *= c3;
                for k in 0..=m.min(n) {
                    let a = delta[n - 1][v][k];
                    let b = if k > 0 { delta[n - 1][v][k - 1] } else { 0.0 };
                    delta[n][v][k] = ((offsets[n] - z) * a - k as f64 * b) / c3;
                }
            }
            for k in 0..=m.min(n) {
                let a = if k > 0 {
                    delta[n - 1][n - 1][k - 1]
                } else {
                    0.0
                };
                let b = delta[n - 1][n - 1][k];
                delta[n][n][k] = c1 / c2 * (k as f64 * a - (offsets[n - 1] - z) * b);
            }
            c1 = c2;
        }
        (0..=m)
            .map(|k| (0..nn).map(|j| delta[nn - 1][j][k]).collect())
            .collect()
    }

    /// Centered stencil radius giving second-order accuracy for the `m`-th
    /// derivative.
    pub fn centered_radius(m: usize) -> usize {
        m.div_ceil(2)
    }

    /// Centered second-order weights (offsets `-R..=R`, divided by `h^m` by
    /// the caller).
    pub fn centered_weights(m: usize) -> Vec<f64> {
        let r = centered_radius(m);
        let offsets: Vec<f64> = (-(r as i64)..=r as i64).map(|o| o as f64).collect();
        fornberg_table(m, &offsets).pop().unwrap()
    }

    /// One-dimensional derivative pass along `axis`. Uses the centered
    /// stencil wherever it fits and a shifted (m+2)-point stencil of the
    /// same accuracy at the box boundary when `one_sided` is set; points
    /// where no stencil fits are left untouched.
    pub fn derivative_pass(
        u: &GridFunction,
        axis: usize,
        m: usize,
        one_sided: bool,
    ) -> Result<GridFunction> {
        if m == 0 {
            return Ok(u.clone());
        }
        let r = centered_radius(m);
        let len = u.dims()[axis];
        if len < 2 * r + 1 {
            return Err(Error::GridTooSmall(format!(
                "axis {axis} has {len} cells, need {}",
                2 * r + 1
            )));
        }
        let centered = centered_weights(m);
        let scale = u.h().powi(-(m as i32));
        // one-sided stencils per left offset (npoints = m + 2 keeps order 2)
        let np_side = (m + 2).min(len);
        let mut out = u.clone();
        let dims = u.dims().to_vec();
        let dim = u.dim();
        let n = u.n();
        let mut idx = vec![0usize; n];
        for flat in 0..u.num_points() {
            // decode index
            let mut f = flat;
            for ax in (0..n).rev() {
                idx[ax] = f % dims[ax];
                f /= dims[ax];
            }
            let i = idx[axis];
            let (start, weights): (usize, &[f64]);
            let shifted_weights;
            if i >= r && i + r < len {
                start = i - r;
                weights = &centered;
            } else if one_sided {
                let s = if i < r { 0 } else { len - np_side };
                shifted_weights = one_sided_weights(m, np_side, i as i64 - s as i64);
                start = s;
                weights = &shifted_weights;
            } else {
                continue;
            };
            let mut acc = vec![0.0; dim];
            for (jj, w) in weights.iter().enumerate() {
                if *w == 0.0 {
                    continue;
                }
                let mut nb = idx.clone();
                nb[axis] = start + jj;
                let v = u.value(u.flat_of_index(&nb));
                for (a, vv) in acc.iter_mut().zip(v) {
                    *a += w * vv;
                }
            }
            let ov = out.value_mut(flat);
            for (o, a) in ov.iter_mut().zip(&acc) {
                *o = a * scale;
            }
        }
        Ok(out)
    }

    fn one_sided_weights(m: usize, npoints: usize, eval_at: i64) -> Vec<f64> {
        let offsets: Vec<f64> = (0..npoints).map(|j| j as f64 - eval_at as f64).collect();
        fornberg_table(m, &offsets).pop().unwrap()
    }

    /// Finite-difference field of `d^alpha u` on the full lattice, falling
    /// back to shifted stencils near the box boundary.
    pub fn fd_field(u: &GridFunction, alpha: &MultiIndex, one_sided: bool) -> Result<GridFunction> {
        let mut cur = u.clone();
        for axis in 0..u.n() {
            if alpha.0[axis] > 0 {
                cur = derivative_pass(&cur, axis, alpha.0[axis], one_sided)?;
            }
        }
        Ok(cur)
    }
}

/// Applies the operator by centered second-order differences and crops the
/// result to the lattice interior where every stencil fits.
pub fn apply_operator_fd(op: &Operator, u: &GridFunction) -> Result<GridFunction> {
    if u.dim() != op.dim_v() {
        return Err(Error::DimensionMismatch {
            what: "grid codomain",
            expected: op.dim_v(),
            got: u.dim(),
        });
    }
    if u.n() != op.n() {
        return Err(Error::DimensionMismatch {
            what: "grid ambient dimension",
            expected: op.n(),
            got: u.n(),
        });
    }
    let n = u.n();
    let mut margin = vec![0usize; n];
    for (alpha, _) in op.terms() {
        for axis in 0..n {
            margin[axis] = margin[axis].max(fd::centered_radius(alpha.0[axis]));
        }
    }
    for axis in 0..n {
        if u.dims()[axis] < op.order() + 2 || u.dims()[axis] <= 2 * margin[axis] {
            return Err(Error::GridTooSmall(format!(
                "axis {axis}: {} cells cannot support order-{} stencils",
                u.dims()[axis],
                op.order()
            )));
        }
    }
    let out_dims: Vec<usize> = u
        .dims()
        .iter()
        .zip(&margin)
        .map(|(&d, &m)| d - 2 * m)
        .collect();
    let out_lo: Vec<f64> = u
        .lo()
        .iter()
        .zip(&margin)
        .map(|(&l, &m)| l + m as f64 * u.h())
        .collect();
    let mut out = GridFunction::zeros(out_lo, u.h(), out_dims.clone(), op.dim_w());
    for (alpha, a) in op.terms() {
        let field = fd::fd_field(u, alpha, false)?;
        // accumulate A_alpha * field over the cropped interior
        let mut idx = vec![0usize; n];
        for flat_out in 0..out.num_points() {
            let mut f = flat_out;
            for ax in (0..n).rev() {
                idx[ax] = f % out_dims[ax] + margin[ax];
                f /= out_dims[ax];
            }
            let v = field.value(field.flat_of_index(&idx));
            let ov = out.value_mut(flat_out);
            for i in 0..a.nrows() {
                let mut acc = 0.0;
                for (j, vj) in v.iter().enumerate() {
                    acc += a[(i, j)] * vj;
                }
                ov[i] += acc;
            }
        }
    }
    Ok(out)
}

/// The variation measure of `u` under the operator:cellwise density given
/// by the finite-difference field. Near a jump the density scales like
/// `1/h` over an `O(h)` band, the discrete surrogate of a surface measure;
/// its total variation converges to the continuum mass under refinement.
pub fn variation_measure(op: &Operator, u: &GridFunction) -> Result<DiscreteMeasure> {
    Ok(DiscreteMeasure::from_density(apply_operator_fd(op, u)?))
}

pub mod clip {
    //! Cell-clipped integration over balls and annuli.
    //!
    //! In the plane each boundary cell enters with its exact overlap area
    //! (closed-form circle/rectangle intersection); in higher dimensions a
    //! 4-per-axis subsample decides the inside fraction. Exact areas keep
    //! discrete dyadic means consistent enough that the telescoping
    //! inequality holds to rounding rather than to subsampling error.

    use super::GridFunction;
    use crate::region::Region;

    /// Antiderivative of `sqrt(r^2 - s^2)`.
    fn half_disk_antideriv(s: f64, r: f64) -> f64 {
        let s = s.clamp(-r, r);
        0.5 * (s * (r * r - s * s).max(0.0).sqrt() + r * r * (s / r).asin())
    }

    /// Area of `disk(0, r) ∩ (-inf, x] x (-inf, y]`.
    fn corner_area(x: f64, y: f64, r: f64) -> f64 {
        if x <= -r || y <= -r {
            return 0.0;
        }
        let xm = x.min(r);
        if y >= r {
            return 2.0 * (half_disk_antideriv(xm, r) - half_disk_antideriv(-r, r));
        }
        let sy = (r * r - y * y).max(0.0).sqrt();
        let mut area = 0.0;
        // |s| > sy: width(s) < |y|; contributes 2w if y >= 0, else 0
        // |s| <= sy: contributes y + w
        let seg = |a: f64, b: f64, full: bool| -> f64 {
            if b <= a {
                return 0.0;
            }
            let w = half_disk_antideriv(b, r) - half_disk_antideriv(a, r);
            if full {
                2.0 * w
            } else {
                y * (b - a) + w
            }
        };
        if y >= 0.0 {
            area += seg(-r, xm.min(-sy), true);
            area += seg((-sy).max(-r), xm.min(sy), false);
            area += seg(sy, xm, true);
        } else {
            area += seg((-sy).max(-r), xm.min(sy), false);
        }
        area
    }

    /// Exact area of the intersection of a disk with an axis-aligned
    /// rectangle.
    pub fn disk_rect_area(cx: f64, cy: f64, r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
        let a = corner_area(x1 - cx, y1 - cy, r)
            - corner_area(x0 - cx, y1 - cy, r)
            - corner_area(x1 - cx, y0 - cy, r)
            + corner_area(x0 - cx, y0 - cy, r);
        a.max(0.0)
    }

    /// Cells (by flat index) with their clipped volume inside the region.
    pub struct WeightedCells {
        pub items: Vec<(usize, f64)>,
        pub total: f64,
    }

    /// Clipped cell weights of the lattice of `g` against the region.
    pub fn cell_weights(g: &GridFunction, region: &Region) -> WeightedCells {
        let n = g.n();
        let h = g.h();
        let mut items = Vec::new();
        let mut total = 0.0;
        let r_in = region.inner_radius();
        let r_out = region.radius;
        let half_diag = 0.5 * h * (n as f64).sqrt();
        for flat in g.flat_indices_near(&region.center, r_out + h) {
            let c = g.point_of_flat(flat);
            let d: f64 = c
                .iter()
                .zip(&region.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if d >= r_out + half_diag {
                continue;
            }
            let w = if d + half_diag < r_out && (r_in == 0.0 || d - half_diag > r_in) {
                // cell fully inside
                g.cell_volume()
            } else if n == 2 {
                let outer = disk_rect_area(
                    region.center[0],
                    region.center[1],
                    r_out,
                    c[0] - 0.5 * h,
                    c[0] + 0.5 * h,
                    c[1] - 0.5 * h,
                    c[1] + 0.5 * h,
                );
                let inner = if r_in > 0.0 {
                    disk_rect_area(
                        region.center[0],
                        region.center[1],
                        r_in,
                        c[0] - 0.5 * h,
                        c[0] + 0.5 * h,
                        c[1] - 0.5 * h,
                        c[1] + 0.5 * h,
                    )
                } else {
                    0.0
                };
                (outer - inner).max(0.0)
            } else {
                subsample_fraction(&c, h, region) * g.cell_volume()
            };
            if w > 0.0 {
                items.push((flat, w));
                total += w;
            }
        }
        WeightedCells { items, total }
    }

    fn subsample_fraction(center: &[f64], h: f64, region: &Region) -> f64 {
        let n = center.len();
        let k = 4usize;
        let mut count = 0usize;
        let total = k.pow(n as u32);
        let mut idx = vec![0usize; n];
        let mut x = vec![0.0; n];
        'outer: loop {
            for axis in 0..n {
                x[axis] = center[axis] + ((idx[axis] as f64 + 0.5) / k as f64 - 0.5) * h;
            }
            if region.contains(&x) {
                count += 1;
            }
            for axis in 0..n {
                idx[axis] += 1;
                if idx[axis] < k {
                    continue 'outer;
                }
                idx[axis] = 0;
            }
            break;
        }
        count as f64 / total as f64
    }

    /// Weighted mean of a vector field over the clipped cells.
    pub fn mean(g: &GridFunction, cells: &WeightedCells) -> Vec<f64> {
        let mut acc = vec![0.0; g.dim()];
        for &(flat, w) in &cells.items {
            for (a, v) in acc.iter_mut().zip(g.value(flat)) {
                *a += w * v;
            }
        }
        if cells.total > 0.0 {
            for a in acc.iter_mut() {
                *a /= cells.total;
            }
        }
        acc
    }

    /// Weighted mean of `|g - c|` over the clipped cells.
    pub fn mean_abs_dev(g: &GridFunction, cells: &WeightedCells, c: &[f64]) -> f64 {
        if cells.total == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for &(flat, w) in &cells.items {
            let v = g.value(flat);
            let dev: f64 = v
                .iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            acc += w * dev;
        }
        acc / cells.total
    }

    /// Weighted integral of `|g|` over the clipped cells (not a mean).
    pub fn mass(g: &GridFunction, cells: &WeightedCells) -> f64 {
        let mut acc = 0.0;
        for &(flat, w) in &cells.items {
            let v = g.value(flat);
            acc += w * v.iter().map(|x| x * x).sum::<f64>().sqrt();
        }
        acc
    }

    /// Weighted maximum of `|g|` over the clipped cells.
    pub fn sup_norm(g: &GridFunction, cells: &WeightedCells) -> f64 {
        let mut best = 0.0_f64;
        for &(flat, _) in &cells.items {
            let v = g.value(flat);
            best = best.max(v.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        best
    }
}

/// Per-level statistics of a dyadic profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub radius: f64,
    pub mean: Vec<f64>,
    pub osc: f64,
    pub ann_mean: Vec<f64>,
    pub ann_osc: f64,
    /// Variation-measure mass of the ball at this level.
    pub ball_mass: f64,
    /// Variation-measure mass of the annulus at this level.
    pub ann_mass: f64,
    /// Riesz potential of order k of the variation measure restricted to the
    /// ball, evaluated at the center.
    pub potential: PotentialValue,
}

/// Dyadic means, oscillations and potentials of `u` around one point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OscillationProfile {
    pub center: Vec<f64>,
    pub base_radius: f64,
    /// Inner fraction of the annuli (fixed to 1/4).
    pub annulus_lambda: f64,
    pub levels: Vec<LevelStats>,
}

/// Minimal number of cells across the smallest profiled ball.
pub const MIN_CELLS_PER_BALL: f64 = 8.0;

/// Computes means, oscillations, annulus statistics and restricted Riesz
/// potentials of `u` on the dyadic balls `2^{-j} B(x0, r)`, `j <= j_max`,
/// stopping early once a ball would span fewer than eight cells.
pub fn dyadic_profile(
    u: &GridFunction,
    op: &Operator,
    x0: &[f64],
    r: f64,
    j_max: usize,
) -> Result<OscillationProfile> {
    let fdu = apply_operator_fd(op, u)?;
    dyadic_profile_with_fd(u, &fdu, op.order(), x0, r, j_max)
}

/// Same as [`dyadic_profile`] but reusing a precomputed variation density.
pub fn dyadic_profile_with_fd(
    u: &GridFunction,
    fdu: &GridFunction,
    order: usize,
    x0: &[f64],
    r: f64,
    j_max: usize,
) -> Result<OscillationProfile> {
    if x0.len() != u.n() {
        return Err(Error::DimensionMismatch {
            what: "profile center",
            expected: u.n(),
            got: x0.len(),
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile radius must be positive, got {r}"
        )));
    }
    // the base ball must live inside the finite-difference interior
    let fd_lo = fdu.lo();
    let fd_hi = fdu.hi();
    for axis in 0..u.n() {
        if x0[axis] - r < fd_lo[axis] || x0[axis] + r > fd_hi[axis] {
            return Err(Error::RegionOutsideGrid(format!(
                "ball of radius {r} at the query point leaves the valid interior on axis {axis}"
            )));
        }
    }
    let var = DiscreteMeasure::from_density(fdu.clone());
    let lambda = 0.25;
    let mut levels = Vec::new();
    for j in 0..=j_max {
        let rj = r * 2f64.powi(-(j as i32));
        if rj < MIN_CELLS_PER_BALL * u.h() {
            break;
        }
        let ball = Region::ball(x0.to_vec(), rj)?;
        let ann = Region {
            kind: RegionKind::Annulus,
            center: x0.to_vec(),
            radius: rj,
            lambda,
        };
        let ball_cells = clip::cell_weights(u, &ball);
        let ann_cells = clip::cell_weights(u, &ann);
        let mean = clip::mean(u, &ball_cells);
        let osc = clip::mean_abs_dev(u, &ball_cells, &mean);
        let ann_mean = clip::mean(u, &ann_cells);
        let ann_osc = clip::mean_abs_dev(u, &ann_cells, &ann_mean);
        let fd_ball_cells = clip::cell_weights(fdu, &ball);
        let fd_ann_cells = clip::cell_weights(fdu, &ann);
        let ball_mass = clip::mass(fdu, &fd_ball_cells);
        let ann_mass = clip::mass(fdu, &fd_ann_cells);
        let potential = var.riesz_potential_in_ball(order as f64, x0, rj)?;
        levels.push(LevelStats {
            level: j,
            radius: rj,
            mean,
            osc,
            ann_mean,
            ann_osc,
            ball_mass,
            ann_mass,
            potential,
        });
    }
    if levels.is_empty() {
        return Err(Error::GridTooSmall(format!(
            "base radius {r} spans fewer than {MIN_CELLS_PER_BALL} cells"
        )));
    }
    Ok(OscillationProfile {
        center: x0.to_vec(),
        base_radius: r,
        annulus_lambda: lambda,
        levels,
    })
}
