//! Property tests for the crate-wide algebraic invariants.

use celliptic::measure::{Atom, DiscreteMeasure};
use celliptic::multi_index::{indices_up_to, MultiIndex};
use celliptic::polynomial::Polynomial;
use celliptic::region::Region;
use celliptic::zoo;

use num_complex::Complex64;
use proptest::prelude::*;

fn small_coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // symbol homogeneity of degree k in the frequency, over the complex
    // numbers
    #[test]
    fn symbol_is_homogeneous(
        re in prop::array::uniform2(small_coord()),
        im in prop::array::uniform2(small_coord()),
        t_re in small_coord(),
        t_im in small_coord(),
    ) {
        for op in [zoo::symmetric_gradient(2), zoo::hessian(2), zoo::laplacian_scalar(2)] {
            let xi: Vec<Complex64> = (0..2).map(|i| Complex64::new(re[i], im[i])).collect();
            let t = Complex64::new(t_re, t_im);
            let txi: Vec<Complex64> = xi.iter().map(|z| t * z).collect();
            let s0 = op.symbol(&xi).unwrap().matrix;
            let s1 = op.symbol(&txi).unwrap().matrix;
            let tk = t.powu(op.order() as u32);
            let scale = 1.0 + s0.iter().map(|z| z.norm()).fold(0.0, f64::max) * tk.norm();
            for (a, b) in s1.iter().zip(s0.iter()) {
                prop_assert!((a - tk * b).norm() <= 1e-10 * scale);
            }
        }
    }

    // p(x + t) computed by coefficient shifting matches direct evaluation
    #[test]
    fn polynomial_shift_matches_evaluation(
        coeffs in prop::collection::vec(-1.0..1.0f64, 10),
        t in prop::array::uniform2(small_coord()),
        x in prop::array::uniform2(small_coord()),
    ) {
        let mut p = Polynomial::zero(2, 1);
        for (alpha, c) in indices_up_to(2, 3).into_iter().zip(&coeffs) {
            p.add_to(alpha, &[*c]);
        }
        let shifted = p.shifted(&t);
        let direct = p.eval(&[x[0] + t[0], x[1] + t[1]])[0];
        let via = shifted.eval(&x)[0];
        prop_assert!((direct - via).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    // restriction never increases total variation, and the restricted
    // potential is monotone in the radius
    #[test]
    fn restriction_and_potential_monotonicity(
        xs in prop::collection::vec(prop::array::uniform2(small_coord()), 1..20),
        ws in prop::collection::vec(-2.0..2.0f64, 20),
        r in 0.1..2.0f64,
    ) {
        let atoms: Vec<Atom> = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| Atom { x: x.to_vec(), w: vec![*w] })
            .collect();
        let mu = DiscreteMeasure::from_atoms(atoms);
        let tv = mu.total_variation();
        let ball = Region::ball(vec![0.0, 0.0], r).unwrap();
        prop_assert!(mu.restrict(&ball).total_variation() <= tv + 1e-12);
        let x0 = [0.33, -0.21];
        let p_small = mu.riesz_potential_in_ball(1.0, &x0, r).unwrap();
        let p_large = mu.riesz_potential_in_ball(1.0, &x0, 2.0 * r).unwrap();
        match (p_small.finite(), p_large.finite()) {
            (Some(a), Some(b)) => prop_assert!(b + 1e-12 >= a),
            (None, Some(_)) => prop_assert!(false, "restriction cannot remove a singular atom"),
            _ => {}
        }
    }

    // quadrature integrates monomials over random balls to the promised
    // relative tolerance
    #[test]
    fn quadrature_exactness_random_balls(
        c in prop::array::uniform2(small_coord()),
        r in 0.2..1.5f64,
        lambda in 0.0..0.5f64,
    ) {
        let region = if lambda < 0.05 {
            Region::ball(c.to_vec(), r).unwrap()
        } else {
            Region::annulus(c.to_vec(), r, lambda).unwrap()
        };
        let quad = region.quadrature(6);
        for beta in [MultiIndex(vec![0, 0]), MultiIndex(vec![2, 1]), MultiIndex(vec![4, 2])] {
            let exact = region.monomial_integral_centered(&beta);
            let got = quad.integrate_fn(|x| beta.monomial(&[x[0] - c[0], x[1] - c[1]]));
            let scale = exact.abs().max(region.volume());
            prop_assert!((exact - got).abs() <= 1e-6 * scale);
        }
    }
}
