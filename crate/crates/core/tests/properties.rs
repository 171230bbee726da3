use num_traits::Zero;
use proptest::prelude::*;

use kstab::geometry::LatticePolytope;
use kstab::invariants;
use kstab::plfun::{AffinePiece, PlConvex};
use kstab::quantize::{ehrhart_fit, eval_poly, quantized_projection, weight_spectrum, SubtorusDirections, ToricTestConfig};
use kstab::rational::{dot_int, q, qf, qvec, Q};

/// Hull of random lattice points in `[0, 3]²`, rejected when flat.
fn polygon() -> impl Strategy<Value = LatticePolytope> {
    prop::collection::vec((0i64..=3, 0i64..=3), 3..7).prop_filter_map("flat hull", |pts| {
        LatticePolytope::from_vertices(pts.into_iter().map(|(a, b)| qvec(&[a, b])).collect()).ok()
    })
}

fn piece() -> impl Strategy<Value = AffinePiece> {
    ((-2i64..=2, -2i64..=2), -3i64..=3, 1i64..=2).prop_map(|((a, b), c, d)| AffinePiece::new(qvec(&[a, b]), qf(c, d)))
}

fn function() -> impl Strategy<Value = PlConvex> {
    prop::collection::vec(piece(), 1..4).prop_map(|p| PlConvex::new(p).unwrap())
}

/// Ehrhart fits sample up to `6q`; larger periods make a single case slow.
const MAX_PERIOD: u64 = 12;

fn sum(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |a, b| a + b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn max_form_dominates_every_piece(f in function(), x in (-4i64..=4, -4i64..=4)) {
        let x = qvec(&[x.0, x.1]);
        let v = f.evaluate(&x);
        prop_assert!(f.pieces().iter().all(|l| l.eval(&x) <= v));
        prop_assert!(f.pieces().iter().any(|l| l.eval(&x) == v));
    }

    #[test]
    fn centered_weights_are_trace_free(p in polygon(), f in function(), k in 1u64..6) {
        let tc = ToricTestConfig::new(p, f).unwrap();
        let s = weight_spectrum(&tc, k).unwrap();
        prop_assert!(sum(&s.centered_weights).is_zero());
        prop_assert_eq!(sum(&s.raw_weights), s.trace);
    }

    #[test]
    fn residual_is_killing_orthogonal(p in polygon(), f in function(), k in 2u64..6) {
        let tc = ToricTestConfig::new(p, f).unwrap();
        let s = weight_spectrum(&tc, k).unwrap();
        let w = SubtorusDirections::full(2);
        let Ok(proj) = quantized_projection(&s, &w) else { return Ok(()) };
        for e in w.basis() {
            let gens: Vec<Q> = s.points.iter().map(|a| dot_int(e, a)).collect();
            let mean = sum(&gens) / Q::from_integer(gens.len().into());
            let inner = proj.residual.iter().zip(&gens).fold(Q::zero(), |acc, (r, g)| acc + r * (g - &mean));
            prop_assert!(inner.is_zero());
        }
    }

    #[test]
    fn weights_scale_with_integral_f(p in polygon(), f in function(), m in 1i64..4, k in 1u64..5) {
        let (f, _) = f.clear_denominators();
        let a = weight_spectrum(&ToricTestConfig::new(p.clone(), f.clone()).unwrap(), k).unwrap();
        let b = weight_spectrum(&ToricTestConfig::new(p, f.scale(&q(m))).unwrap(), k).unwrap();
        prop_assert!(a.raw_weights.iter().zip(&b.raw_weights).all(|(x, y)| x * q(m) == *y));
    }

    #[test]
    fn df_ignores_constants(p in polygon(), f in function(), c in (-5i64..=5, 1i64..=4)) {
        let tc = ToricTestConfig::new(p.clone(), f.clone()).unwrap();
        prop_assume!(tc.period() <= MAX_PERIOD);
        let shifted = ToricTestConfig::new(p, f.shift(&AffinePiece::constant(2, qf(c.0, c.1)))).unwrap();
        prop_assert_eq!(invariants::df(&tc).unwrap(), invariants::df(&shifted).unwrap());
    }

    #[test]
    fn df_routes_agree(p in polygon(), f in function()) {
        let tc = ToricTestConfig::new(p, f).unwrap();
        prop_assume!(tc.period() <= MAX_PERIOD);
        prop_assert_eq!(invariants::df(&tc).unwrap() * tc.denominator_q(), invariants::df_boundary(&tc));
    }

    #[test]
    fn ehrhart_fit_predicts_counts(p in polygon()) {
        let tc = ToricTestConfig::new(p.clone(), PlConvex::zero(2)).unwrap();
        let fit = ehrhart_fit(&tc).unwrap();
        let k = 9 * fit.period;
        prop_assert_eq!(eval_poly(&fit.n_poly, &Q::from_integer(k.into())), Q::from_integer(p.lattice_points(k).len().into()));
        prop_assert_eq!(fit.n_poly[2].clone(), p.volume());
    }

    #[test]
    fn affine_data_is_reproduced(p in polygon(), l in piece()) {
        let tc = ToricTestConfig::new(p.clone(), PlConvex::affine(l.clone())).unwrap();
        let w = SubtorusDirections::full(2);
        let proj = invariants::continuous_projection(tc.function(), &p, &w).unwrap();
        prop_assert_eq!(&proj.coefficients, &l.slope);
        prop_assert!(proj.residual_mean_square.is_zero());
        prop_assert!(invariants::reduced_norm(&tc, &w, 1.0).unwrap().is_exact_zero());
        prop_assert!(invariants::df_relative(&tc, &w).unwrap().is_zero());
    }

    #[test]
    fn projection_shrinks_the_norm(p in polygon(), f in function()) {
        let tc = ToricTestConfig::new(p, f).unwrap();
        let plain = invariants::norm_p(&tc, 2.0).unwrap().exact_inner.unwrap();
        let reduced = invariants::reduced_norm(&tc, &SubtorusDirections::full(2), 2.0).unwrap().exact_inner.unwrap();
        prop_assert!(reduced <= plain);
    }
}
