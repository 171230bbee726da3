//! Values frozen from an independent oracle: iterated symbolic integrals and
//! lattice sums fitted to polynomials, computed outside this crate.

mod common;

use common::*;
use kstab::invariants;
use kstab::plfun;
use kstab::quantize::{ehrhart_fit, SubtorusDirections};
use kstab::rational::{qf, Q};

struct Oracle {
    id: &'static str,
    f0: Q,
    df: Q,
    /// mean, centered mean square, full-torus coefficients, reduced mean square
    moments: Option<(Q, Q, [Q; 2], Q)>,
}

fn table() -> Vec<Oracle> {
    vec![
        Oracle {
            id: "square_max_xy",
            f0: qf(2, 3),
            df: qf(1, 6),
            moments: Some((qf(2, 3), qf(1, 18), [qf(1, 2), qf(1, 2)], qf(1, 72))),
        },
        Oracle {
            id: "square_kink",
            f0: qf(1, 6),
            df: qf(1, 6),
            moments: Some((qf(1, 6), qf(1, 18), [qf(1, 2), qf(1, 2)], qf(1, 72))),
        },
        Oracle {
            id: "simplex_kink",
            f0: qf(9, 32),
            df: qf(9, 32),
            moments: Some((qf(9, 32), qf(135, 1024), [qf(189, 128), qf(0, 1)], qf(351, 32768))),
        },
        Oracle {
            id: "simplex_max_xy",
            f0: qf(1, 2),
            df: qf(1, 4),
            moments: Some((qf(1, 2), qf(1, 24), [qf(3, 4), qf(3, 4)], qf(1, 96))),
        },
        Oracle { id: "hexagon_max_xy", f0: qf(7, 18), df: qf(7, 36), moments: None },
        Oracle { id: "hexagon_max_x0", f0: qf(2, 9), df: qf(1, 9), moments: None },
        Oracle { id: "rectangle_kink", f0: qf(1, 4), df: qf(1, 8), moments: None },
        Oracle { id: "cube_kink", f0: qf(13, 24), df: qf(1, 8), moments: None },
    ]
}

#[test]
fn ehrhart_expansion_matches_lattice_oracle() {
    let corpus = corpus();
    for o in table() {
        let tc = find(&corpus, o.id);
        let fit = ehrhart_fit(&tc).unwrap();
        assert_eq!(fit.f0 / tc.denominator_q(), o.f0, "{}", o.id);
        assert_eq!(invariants::df(&tc).unwrap(), o.df, "{}", o.id);
        assert_eq!(invariants::df_boundary(&tc), o.df * tc.denominator_q(), "{}", o.id);
    }
}

#[test]
fn integrals_match_symbolic_oracle() {
    let corpus = corpus();
    let full = SubtorusDirections::full(2);
    for o in table() {
        let Some((mean, ms, coef, reduced)) = o.moments else { continue };
        let tc = find(&corpus, o.id);
        assert_eq!(plfun::mean(tc.function(), tc.polytope()), mean, "{}", o.id);
        assert_eq!(invariants::norm_p(&tc, 2.0).unwrap().exact_inner.unwrap(), ms, "{}", o.id);
        let proj = invariants::continuous_projection(tc.function(), tc.polytope(), &full).unwrap();
        assert_eq!(proj.coefficients, coef.to_vec(), "{}", o.id);
        assert_eq!(proj.residual_mean_square, reduced, "{}", o.id);
        assert_eq!(invariants::reduced_norm(&tc, &full, 2.0).unwrap().exact_inner.unwrap(), reduced, "{}", o.id);
    }
}

#[test]
fn flagship_interval_kink() {
    let tc = find(&corpus(), "interval_kink");
    let full = SubtorusDirections::full(1);
    let fit = ehrhart_fit(&tc).unwrap();
    assert_eq!((fit.f0.clone(), fit.f1.clone()), (qf(1, 4), qf(1, 4)));
    assert_eq!(invariants::norm_p(&tc, 2.0).unwrap().exact_inner, Some(qf(5, 48)));
    assert_eq!(invariants::reduced_norm(&tc, &full, 2.0).unwrap().exact_inner, Some(qf(1, 48)));
    assert_eq!(invariants::df_relative(&tc, &full).unwrap(), qf(1, 4));
}
