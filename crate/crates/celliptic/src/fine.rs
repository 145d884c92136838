//! Point classification through the potential criterion: Riesz-potential
//! divergence trends across a resolution ladder, dyadic mean/oscillation
//! evidence, continuity-modulus checks for order k = n and k > n, and the
//! local sup bound for k >= n.
//!
//! A discrete potential of a fixed-resolution measure is always finite; only
//! refinement reveals divergence. Divergence is therefore operationalized as
//! the slope of the potential against log(1/h) across at least three ladder
//! rungs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{apply_operator_fd, clip, dyadic_profile_with_fd, fd, GridFunction};
use crate::measure::DiscreteMeasure;
use crate::multi_index::indices_of_order;
use crate::operator::Operator;
use crate::region::Region;
use crate::Result;

/// Slope of the discrete potential against `log(1/h)` at or above which the
/// potential counts as divergent under refinement.
pub const DIVERGENCE_SLOPE: f64 = 0.2;

/// Mean-difference threshold for the empirical Cauchy check at the finest
/// level.
pub const CAUCHY_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    /// Some tested radius has a bounded potential trend.
    Lebesgue,
    /// The potential trend diverges at every tested radius.
    SigmaCandidate,
    /// Fewer than three ladder rungs; no verdict.
    Undetermined,
}

/// Potential trend of one tested radius across the ladder.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadiusTrend {
    pub radius: f64,
    /// Least-squares slope of potential against `ln(1/h)`.
    pub slope: f64,
    /// Potential per ladder rung, coarse to fine.
    pub potentials: Vec<f64>,
}

/// Verdict for one query point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointVerdict {
    pub x0: Vec<f64>,
    pub predicted: Prediction,
    /// Whether dyadic means at the finest grid settle below the Cauchy
    /// threshold.
    pub means_cauchy: bool,
    /// Whether dyadic oscillations at the finest grid decay.
    pub osc_vanishing: bool,
    /// Potential slope at the base radius.
    pub potential_trend: f64,
    /// Fractional maximal function at the finest rung over the tested radii.
    pub maximal_value: f64,
    /// Fractional maximal function per ladder rung, coarse to fine.
    pub maximal_by_rung: Vec<f64>,
    pub trends: Vec<RadiusTrend>,
    /// `|mean_j - mean_{j+1}|` per dyadic level at the finest grid.
    pub mean_diffs: Vec<f64>,
    pub osc_by_level: Vec<f64>,
    /// A bounded-potential prediction must come with Cauchy means; this
    /// flag records the check instead of silently reconciling the two.
    pub consistency_ok: bool,
}

fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Validates that the grids form a nested resolution ladder of one box and
/// returns them sorted coarse to fine.
fn sort_ladder<'a>(ladder: &'a [GridFunction]) -> Result<Vec<&'a GridFunction>> {
    if ladder.len() < 2 {
        return Err(Error::LadderMismatch(
            "need at least two resolutions".into(),
        ));
    }
    let mut sorted: Vec<&GridFunction> = ladder.iter().collect();
    sorted.sort_by(|a, b| b.h().total_cmp(&a.h()));
    let base = sorted[0];
    for g in &sorted {
        if g.n() != base.n() || g.dim() != base.dim() {
            return Err(Error::LadderMismatch("grids differ in dimensions".into()));
        }
        for axis in 0..base.n() {
            if (g.lo()[axis] - base.lo()[axis]).abs() > 1e-9 * base.h()
                || (g.hi()[axis] - base.hi()[axis]).abs() > 1e-9 * base.h()
            {
                return Err(Error::LadderMismatch(format!(
                    "grids cover different boxes on axis {axis}"
                )));
            }
        }
    }
    for pair in sorted.windows(2) {
        let ratio = pair[0].h() / pair[1].h();
        if (ratio - 2.0).abs() > 1e-9 {
            return Err(Error::LadderMismatch(format!(
                "spacings must halve between rungs, got ratio {ratio}"
            )));
        }
    }
    Ok(sorted)
}

/// Scans query points across a resolution ladder: fits potential trends per
/// dyadic radius, gathers mean/oscillation evidence at the finest grid, and
/// emits one verdict per point.
pub fn lebesgue_scan(
    op: &Operator,
    ladder: &[GridFunction],
    points: &[Vec<f64>],
    r: f64,
    j_max: usize,
) -> Result<Vec<PointVerdict>> {
    let sorted = sort_ladder(ladder)?;
    let k = op.order();
    // one finite-difference field per rung, shared across the points
    let measures: Vec<DiscreteMeasure> = sorted
        .iter()
        .map(|g| apply_operator_fd(op, g).map(DiscreteMeasure::from_density))
        .collect::<Result<_>>()?;
    let h_coarse = sorted[0].h();
    // radii valid as a profile level on every rung
    let radii: Vec<f64> = (0..=j_max)
        .map(|j| r * 2f64.powi(-(j as i32)))
        .filter(|rj| *rj >= crate::grid::MIN_CELLS_PER_BALL * h_coarse)
        .collect();
    if radii.is_empty() {
        return Err(Error::GridTooSmall(format!(
            "radius {r} spans fewer than {} cells at the coarsest rung",
            crate::grid::MIN_CELLS_PER_BALL
        )));
    }
    let log_inv_h: Vec<f64> = sorted.iter().map(|g| (1.0 / g.h()).ln()).collect();
    let finest = *sorted.last().unwrap();
    let finest_fd = measures
        .last()
        .and_then(|m| m.density.as_ref())
        .expect("ladder measures carry densities");
    let enough_rungs = sorted.len() >= 3;

    let verdicts: Result<Vec<PointVerdict>> = points
        .par_iter()
        .map(|x0| {
            let mut trends = Vec::with_capacity(radii.len());
            for &radius in &radii {
                let potentials: Vec<f64> = measures
                    .iter()
                    .map(|mu| {
                        mu.riesz_potential_in_ball(k as f64, x0, radius)
                            .map(|p| p.finite().expect("grid densities are finite"))
                    })
                    .collect::<Result<_>>()?;
                let slope = lsq_slope(&log_inv_h, &potentials);
                trends.push(RadiusTrend {
                    radius,
                    slope,
                    potentials,
                });
            }
            let maximal_by_rung: Vec<f64> = measures
                .iter()
                .map(|mu| mu.fractional_maximal(k, x0, &radii))
                .collect::<Result<_>>()?;
            let profile = dyadic_profile_with_fd(finest, finest_fd, k, x0, r, j_max)?;
            let mean_diffs: Vec<f64> = profile
                .levels
                .windows(2)
                .map(|w| {
                    w[0].mean
                        .iter()
                        .zip(&w[1].mean)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            let osc_by_level: Vec<f64> = profile.levels.iter().map(|l| l.osc).collect();
            let means_cauchy = match (mean_diffs.first(), mean_diffs.last()) {
                (Some(first), Some(last)) => *last <= CAUCHY_THRESHOLD && *last <= first + 1e-12,
                _ => true,
            };
            let osc_vanishing = match (osc_by_level.first(), osc_by_level.last()) {
                (Some(first), Some(last)) => *first <= 1e-12 || *last <= 0.5 * first,
                _ => true,
            };
            let min_slope = trends.iter().map(|t| t.slope).fold(f64::INFINITY, f64::min);
            let predicted = if !enough_rungs {
                Prediction::Undetermined
            } else if min_slope <= DIVERGENCE_SLOPE {
                Prediction::Lebesgue
            } else {
                Prediction::SigmaCandidate
            };
            let consistency_ok = !(predicted == Prediction::Lebesgue && !means_cauchy);
            Ok(PointVerdict {
                x0: x0.clone(),
                predicted,
                means_cauchy,
                osc_vanishing,
                potential_trend: trends[0].slope,
                maximal_value: *maximal_by_rung.last().unwrap(),
                maximal_by_rung,
                trends,
                mean_diffs,
                osc_by_level,
                consistency_ok,
            })
        })
        .collect();
    verdicts
}

/// One probed pair of the continuity estimate: `lhs <= C (rhs_mass +
/// rhs_osc)` is the claim under test.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairRow {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    /// `|g(x) - g(y)|` from grid samples.
    pub lhs: f64,
    /// Variation mass of the punctured ball `B(x, r) minus the cell of x`.
    pub rhs_mass: f64,
    /// `(|x - y| / r) * mean of |g - <g>_B| over B`.
    pub rhs_osc: f64,
}

/// Probe directions: the 8 compass directions in the plane, axis pairs
/// otherwise.
fn directions(n: usize) -> Vec<Vec<f64>> {
    if n == 2 {
        return (0..8)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / 8.0;
                vec![theta.cos(), theta.sin()]
            })
            .collect();
    }
    let mut dirs = Vec::new();
    for axis in 0..n {
        for sgn in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[axis] = sgn;
            dirs.push(d);
        }
    }
    let diag = 1.0 / (n as f64).sqrt();
    dirs.push(vec![diag; n]);
    dirs.push(vec![-diag; n]);
    dirs
}

/// The stacked field of all order-`l` partial derivatives (`u` itself for
/// `l = 0`).
fn gradient_tensor(u: &GridFunction, l: usize) -> Result<GridFunction> {
    if l == 0 {
        return Ok(u.clone());
    }
    let idx = indices_of_order(u.n(), l);
    let fields: Vec<GridFunction> = idx
        .iter()
        .map(|alpha| fd::fd_field(u, alpha, true))
        .collect::<Result<_>>()?;
    let dim_out = idx.len() * u.dim();
    let mut out = GridFunction::zeros(u.lo().to_vec(), u.h(), u.dims().to_vec(), dim_out);
    for flat in 0..u.num_points() {
        let ov = out.value_mut(flat);
        for (fi, f) in fields.iter().enumerate() {
            let v = f.value(flat);
            ov[fi * u.dim()..(fi + 1) * u.dim()].copy_from_slice(v);
        }
    }
    Ok(out)
}

/// Variation mass of `B(x, r)` with the cell containing `x` dropped
/// (the discrete puncturing of the ball).
fn punctured_mass(fdu: &GridFunction, x: &[f64], r: f64) -> f64 {
    let ball = Region::ball(x.to_vec(), r).expect("radius checked by caller");
    let cells = clip::cell_weights(fdu, &ball);
    let own = fdu.cell_containing(x);
    let mut acc = 0.0;
    for &(flat, w) in &cells.items {
        if own == Some(flat) {
            continue;
        }
        let v = fdu.value(flat);
        acc += w * v.iter().map(|a| a * a).sum::<f64>().sqrt();
    }
    acc
}

fn continuity_rows(
    op: &Operator,
    u: &GridFunction,
    points: &[Vec<f64>],
    r: f64,
    l: usize,
) -> Result<Vec<PairRow>> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "pair radius must be positive, got {r}"
        )));
    }
    let g = gradient_tensor(u, l)?;
    let fdu = apply_operator_fd(op, u)?;
    let fd_lo = fdu.lo();
    let fd_hi = fdu.hi();
    let mut rows = Vec::new();
    for x in points {
        if x.len() != u.n() {
            return Err(Error::DimensionMismatch {
                what: "query point",
                expected: u.n(),
                got: x.len(),
            });
        }
        for axis in 0..u.n() {
            if x[axis] - r < fd_lo[axis] || x[axis] + r > fd_hi[axis] {
                return Err(Error::RegionOutsideGrid(format!(
                    "pair ball of radius {r} leaves the valid interior on axis {axis}"
                )));
            }
        }
        let ball = Region::ball(x.clone(), r)?;
        let cells = clip::cell_weights(&g, &ball);
        let mean = clip::mean(&g, &cells);
        let osc = clip::mean_abs_dev(&g, &cells, &mean);
        let mass = punctured_mass(&fdu, x, r);
        let gx = g.interp(x);
        for dir in directions(u.n()) {
            for t in [r / 4.0, r / 8.0, r / 16.0] {
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
                let gy = g.interp(&y);
                let lhs: f64 = gx
                    .iter()
                    .zip(&gy)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                rows.push(PairRow {
                    x: x.clone(),
                    y,
                    t,
                    lhs,
                    rhs_mass: mass,
                    rhs_osc: t / r * osc,
                });
            }
        }
    }
    Ok(rows)
}

/// Continuity-modulus probe for operators of order `k = n`: compares
/// `|u(x) - u(y)|` against the punctured variation mass plus the scaled
/// mean oscillation.
pub fn continuity_check(
    op: &Operator,
    u: &GridFunction,
    points: &[Vec<f64>],
    r: f64,
) -> Result<Vec<PairRow>> {
    if op.order() != op.n() {
        return Err(Error::OrderMismatch {
            need: "k = n",
            k: op.order(),
            n: op.n(),
        });
    }
    continuity_rows(op, u, points, r, 0)
}

/// Continuity-modulus probe for `k > n`, applied to the order-`(k-n)`
/// derivative tensor of `u`.
pub fn higher_continuity_check(
    op: &Operator,
    u: &GridFunction,
    points: &[Vec<f64>],
    r: f64,
) -> Result<Vec<PairRow>> {
    if op.order() <= op.n() {
        return Err(Error::OrderMismatch {
            need: "k > n",
            k: op.order(),
            n: op.n(),
        });
    }
    continuity_rows(op, u, points, r, op.order() - op.n())
}

/// Components of the local sup bound for `k >= n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupBoundReport {
    /// `sup over B of |grad^{k-n} u|` over the sampled cells.
    pub sup: f64,
    /// `mean over B of |grad^{k-n} u|`.
    pub mean_abs: f64,
    /// Variation mass `|A u|(B)`.
    pub mass: f64,
}

/// Local sup bound probe: the suite asserts `sup <= C (mean_abs + mass)`
/// with one constant.
pub fn sup_bound_check(op: &Operator, u: &GridFunction, ball: &Region) -> Result<SupBoundReport> {
    if op.order() < op.n() {
        return Err(Error::OrderMismatch {
            need: "k >= n",
            k: op.order(),
            n: op.n(),
        });
    }
    ball.validate()?;
    let g = gradient_tensor(u, op.order() - op.n())?;
    let fdu = apply_operator_fd(op, u)?;
    let cells = clip::cell_weights(&g, ball);
    if cells.items.is_empty() {
        return Err(Error::RegionOutsideGrid(
            "ball misses the sampled box".into(),
        ));
    }
    let mean = vec![0.0; g.dim()];
    let mean_abs = clip::mean_abs_dev(&g, &cells, &mean);
    let sup = clip::sup_norm(&g, &cells);
    let fd_cells = clip::cell_weights(&fdu, ball);
    let mass = clip::mass(&fdu, &fd_cells);
    Ok(SupBoundReport {
        sup,
        mean_abs,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synthesize, TestFunctionKind};
    use crate::zoo;

    fn halfdisk_ladder() -> Vec<GridFunction> {
        let kind = TestFunctionKind::IndicatorHalfdisk {
            center: None,
            radius: 1.0,
        };
        [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
            .iter()
            .map(|&h| synthesize(&kind, &[-2.0, -2.0], &[2.0, 2.0], h).unwrap())
            .collect()
    }

    #[test]
    fn smooth_points_are_lebesgue() {
        let kind = TestFunctionKind::Smooth {
            freq: Some(vec![2.0, 1.0]),
            phase: Some(vec![0.3, 1.2]),
        };
        let ladder: Vec<GridFunction> = [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
            .iter()
            .map(|&h| synthesize(&kind, &[-1.0, -1.0], &[1.0, 1.0], h).unwrap())
            .collect();
        let verdicts = lebesgue_scan(
            &zoo::gradient(2),
            &ladder,
            &[vec![0.1, -0.2], vec![0.4, 0.3]],
            0.25,
            3,
        )
        .unwrap();
        for v in &verdicts {
            assert_eq!(v.predicted, Prediction::Lebesgue);
            assert!(v.means_cauchy);
            assert!(v.osc_vanishing);
            assert!(
                v.potential_trend.abs() < DIVERGENCE_SLOPE,
                "slope {}",
                v.potential_trend
            );
            assert!(v.consistency_ok);
        }
    }

    #[test]
    fn circle_point_of_halfdisk_diverges_while_maximal_stays_bounded() {
        let ladder = halfdisk_ladder();
        let x0 = vec![0.0, 1.0];
        let verdicts = lebesgue_scan(&zoo::gradient(2), &ladder, &[x0], 0.5, 2).unwrap();
        let v = &verdicts[0];
        assert_eq!(v.predicted, Prediction::SigmaCandidate);
        assert!(v.potential_trend > 0.5, "slope {}", v.potential_trend);
        assert!(!v.osc_vanishing, "oscillation must not vanish on the jump");
        // the maximal function cannot tell: bounded across rungs
        let max = v.maximal_by_rung.iter().cloned().fold(0.0_f64, f64::max);
        let min = v
            .maximal_by_rung
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert!(
            max / min < 2.0,
            "maximal varies too much: {:?}",
            v.maximal_by_rung
        );
        assert!(v.consistency_ok);
    }

    #[test]
    fn interior_point_of_halfdisk_is_lebesgue() {
        let ladder = halfdisk_ladder();
        let verdicts =
            lebesgue_scan(&zoo::gradient(2), &ladder, &[vec![0.0, 0.5]], 0.25, 2).unwrap();
        let v = &verdicts[0];
        assert_eq!(v.predicted, Prediction::Lebesgue);
        assert!(v.potential_trend.abs() < 0.1);
        assert!(v.means_cauchy);
        assert!(v.consistency_ok);
    }

    #[test]
    fn sigma_flag_survives_widening_the_radius_set() {
        // divergence at every tested radius must persist when more (smaller)
        // radii are added
        let ladder = halfdisk_ladder();
        let x0 = vec![0.0, 1.0];
        let few = lebesgue_scan(&zoo::gradient(2), &ladder, &[x0.clone()], 0.5, 0).unwrap();
        assert_eq!(few[0].predicted, Prediction::SigmaCandidate);
        assert_eq!(few[0].trends.len(), 1);
        let more = lebesgue_scan(&zoo::gradient(2), &ladder, &[x0], 0.5, 2).unwrap();
        assert!(more[0].trends.len() > few[0].trends.len());
        assert_eq!(more[0].predicted, Prediction::SigmaCandidate);
    }

    #[test]
    fn bounded_potential_never_pairs_with_stuck_oscillations() {
        // the sufficient direction of the criterion, checked on a mixed
        // point suite: bounded trend must come with decaying oscillations
        let ladder = halfdisk_ladder();
        let points = vec![
            vec![0.0, 0.5],  // interior of the half-disk
            vec![0.0, 1.0],  // on the circular jump
            vec![0.3, 0.0],  // on the flat jump
            vec![0.0, -0.7], // outside, locally constant
            vec![1.4, 1.4],  // far corner region
        ];
        let verdicts = lebesgue_scan(&zoo::gradient(2), &ladder, &points, 0.4, 2).unwrap();
        for v in &verdicts {
            if v.predicted == Prediction::Lebesgue {
                assert!(
                    v.osc_vanishing,
                    "bounded potential with non-vanishing oscillation at {:?}",
                    v.x0
                );
                assert!(v.consistency_ok);
            }
        }
        // sanity: the suite exercises both verdicts
        assert!(verdicts.iter().any(|v| v.predicted == Prediction::Lebesgue));
        assert!(verdicts
            .iter()
            .any(|v| v.predicted == Prediction::SigmaCandidate));
    }

    #[test]
    fn two_rungs_are_undetermined() {
        let ladder: Vec<GridFunction> = halfdisk_ladder().into_iter().take(2).collect();
        let verdicts =
            lebesgue_scan(&zoo::gradient(2), &ladder, &[vec![0.0, 0.5]], 0.25, 2).unwrap();
        assert_eq!(verdicts[0].predicted, Prediction::Undetermined);
    }

    #[test]
    fn ladder_validation() {
        let kind = TestFunctionKind::ConeAbs { center: None };
        let a = synthesize(&kind, &[-1.0, -1.0], &[1.0, 1.0], 0.125).unwrap();
        let b = synthesize(&kind, &[-1.0, -1.0], &[1.0, 1.0], 0.1).unwrap();
        assert!(matches!(
            lebesgue_scan(
                &zoo::gradient(2),
                &[a.clone(), b],
                &[vec![0.0, 0.0]],
                0.25,
                2
            ),
            Err(Error::LadderMismatch(_))
        ));
        let c = synthesize(&kind, &[0.0, -1.0], &[2.0, 1.0], 0.0625).unwrap();
        assert!(matches!(
            lebesgue_scan(&zoo::gradient(2), &[a], &[vec![0.0, 0.0]], 0.25, 2),
            Err(Error::LadderMismatch(_))
        ));
        drop(c);
    }

    #[test]
    fn cone_continuity_bound_k_eq_n() {
        // |x| under the full second-derivative tensor: finite mass, ratios
        // bounded, and lhs decreasing in t
        let u = synthesize(
            &TestFunctionKind::ConeAbs { center: None },
            &[-1.0, -1.0],
            &[1.0, 1.0],
            1.0 / 128.0,
        )
        .unwrap();
        let op = zoo::hessian(2);
        let rows = continuity_check(&op, &u, &[vec![0.0, 0.0]], 0.5).unwrap();
        assert_eq!(rows.len(), 8 * 3);
        for row in &rows {
            let ratio = row.lhs / (row.rhs_mass + row.rhs_osc);
            assert!(ratio < 1.0, "two-term bound violated: ratio {ratio}");
        }
        // per direction, lhs shrinks with t
        for chunk in rows.chunks(3) {
            assert!(chunk[0].lhs > chunk[1].lhs && chunk[1].lhs > chunk[2].lhs);
        }
        // wrong order relation errors
        assert!(matches!(
            continuity_check(&zoo::gradient(2), &u, &[vec![0.0, 0.0]], 0.5),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn affine_u_has_zero_mass_term() {
        let mut p = crate::polynomial::Polynomial::zero(2, 1);
        p.add_to(crate::multi_index::MultiIndex(vec![1, 0]), &[2.0]);
        p.add_to(crate::multi_index::MultiIndex(vec![0, 1]), &[-1.0]);
        let u = synthesize(
            &TestFunctionKind::Polynomial { poly: p },
            &[-1.0, -1.0],
            &[1.0, 1.0],
            1.0 / 64.0,
        )
        .unwrap();
        let rows = continuity_check(&zoo::hessian(2), &u, &[vec![0.0, 0.0]], 0.25).unwrap();
        for row in &rows {
            assert!(row.rhs_mass < 1e-9, "affine functions carry no variation");
            // the estimate degenerates to the oscillation term alone; the
            // sharp factor for affine data is 3 pi / 4 (inverse estimate)
            assert!(row.lhs <= 2.5 * row.rhs_osc + 1e-12);
        }
    }

    #[test]
    fn gradient_modulus_k_gt_n() {
        // u = |x| x1 under the third-derivative tensor; the gradient is
        // |x|-like and its modulus at 0 halves with t
        let h = 1.0 / 128.0;
        let u = GridFunction::from_fn(vec![-1.0, -1.0], h, vec![256, 256], 1, |x| {
            vec![(x[0] * x[0] + x[1] * x[1]).sqrt() * x[0]]
        });
        let op = zoo::derivative_tensor(2, 3);
        let rows = higher_continuity_check(&op, &u, &[vec![0.0, 0.0]], 0.5).unwrap();
        for row in &rows {
            let ratio = row.lhs / (row.rhs_mass + row.rhs_osc);
            assert!(ratio < 1.0, "bound violated: {ratio}");
        }
        for chunk in rows.chunks(3) {
            // t halves from r/4 to r/8 to r/16: modulus shrinks by >= 1.5x
            assert!(chunk[0].lhs > 1.5 * chunk[1].lhs);
            assert!(chunk[1].lhs > 1.5 * chunk[2].lhs);
        }
        assert!(matches!(
            higher_continuity_check(&zoo::hessian(2), &u, &[vec![0.0, 0.0]], 0.5),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn sup_bound_for_cone() {
        // u = |x| on B(0,1): sup = 1, mean = 2/3, mass = integral of the
        // flattened second-derivative norm
        let u = synthesize(
            &TestFunctionKind::ConeAbs { center: None },
            &[-2.0, -2.0],
            &[2.0, 2.0],
            1.0 / 128.0,
        )
        .unwrap();
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let rep = sup_bound_check(&zoo::hessian(2), &u, &ball).unwrap();
        assert!((rep.sup - 1.0).abs() < 0.01, "sup {}", rep.sup);
        assert!(
            (rep.mean_abs - 2.0 / 3.0).abs() < 0.01,
            "mean {}",
            rep.mean_abs
        );
        // oracle for the mass: radial-angular quadrature of the distinct
        // second partials of |x|, norm sqrt(1 - sin^2(2 theta)/4) / rho
        let oracle = {
            let m = 4096;
            let angular: f64 = (0..m)
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                    (1.0 - (2.0 * th).sin().powi(2) / 4.0).sqrt()
                })
                .sum::<f64>()
                * (2.0 * std::f64::consts::PI / m as f64);
            // integral over B(0,1) of f(theta)/rho * rho drho dtheta = f-bar
            angular
        };
        assert!(
            (rep.mass - oracle).abs() < 0.05 * oracle,
            "mass {} vs oracle {oracle}",
            rep.mass
        );
        assert!(rep.sup <= 2.0 * (rep.mean_abs + rep.mass));
        // constants: sup equals mean, zero mass
        let c = synthesize(
            &TestFunctionKind::Polynomial {
                poly: crate::polynomial::Polynomial::constant(2, &[0.7]),
            },
            &[-2.0, -2.0],
            &[2.0, 2.0],
            1.0 / 32.0,
        )
        .unwrap();
        let rep = sup_bound_check(&zoo::hessian(2), &c, &ball).unwrap();
        assert!((rep.sup - 0.7).abs() < 1e-12);
        assert!((rep.mean_abs - 0.7).abs() < 1e-12);
        assert!(rep.mass < 1e-12);
        assert!(matches!(
            sup_bound_check(&zoo::gradient(2), &c, &ball),
            Err(Error::OrderMismatch { .. })
        ));
    }
}
