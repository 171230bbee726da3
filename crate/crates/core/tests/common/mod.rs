#![allow(dead_code)]

use kstab::geometry::shapes::*;
use kstab::geometry::LatticePolytope;
use kstab::plfun::{AffinePiece, PlConvex};
use kstab::quantize::ToricTestConfig;
use kstab::rational::{q, qf, qvec};

/// Affine piece with integer slope and constant `num/den`.
pub fn piece(slope: &[i64], num: i64, den: i64) -> AffinePiece {
    AffinePiece::new(qvec(slope), qf(num, den))
}

pub fn pl(pieces: &[AffinePiece]) -> PlConvex {
    PlConvex::new(pieces.to_vec()).unwrap()
}

pub fn polygon(pts: &[(i64, i64)]) -> LatticePolytope {
    LatticePolytope::from_vertices(pts.iter().map(|&(a, b)| qvec(&[a, b])).collect()).unwrap()
}

pub fn kink() -> PlConvex {
    pl(&[piece(&[0], 0, 1), piece(&[2], -1, 1)])
}

pub struct Member {
    pub id: &'static str,
    pub tc: ToricTestConfig,
    /// `f` is affine on `P` (checked geometrically, not through integrals).
    pub affine: bool,
}

fn member(id: &'static str, p: LatticePolytope, f: PlConvex) -> Member {
    let affine = f.is_affine_on(&p);
    Member { id, tc: ToricTestConfig::new(p, f).unwrap(), affine }
}

/// Intervals, squares, rectangles, simplices, the hexagon, a trapezoid,
/// rational polytopes and the cube, with affine and kinked functions.
pub fn corpus() -> Vec<Member> {
    let trapezoid = || polygon(&[(0, 0), (3, 0), (0, 1), (2, 1)]);
    let half_triangle = || {
        LatticePolytope::from_vertices(vec![qvec(&[0, 0]), qvec(&[1, 0]), vec![q(0), qf(1, 2)]]).unwrap()
    };
    vec![
        member("interval_kink", unit_interval(), kink()),
        member("interval_linear", unit_interval(), pl(&[piece(&[1], 0, 1)])),
        member("interval_constant", unit_interval(), pl(&[piece(&[0], 5, 1)])),
        member("interval3_two_kinks", interval(q(0), q(3)), pl(&[piece(&[0], 0, 1), piece(&[1], -1, 1), piece(&[2], -3, 1)])),
        member("interval_rational", interval(qf(1, 2), qf(5, 2)), pl(&[piece(&[0], 0, 1), piece(&[1], -1, 1)])),
        member("interval_fractional_f", unit_interval(), pl(&[piece(&[0], 0, 1), AffinePiece::new(vec![qf(1, 2)], qf(-1, 3))])),
        member("square_kink", unit_square(), pl(&[piece(&[0, 0], 0, 1), piece(&[1, 1], -1, 1)])),
        member("square_max_xy", unit_square(), pl(&[piece(&[1, 0], 0, 1), piece(&[0, 1], 0, 1)])),
        member("square_three_pieces", unit_square(), pl(&[piece(&[0, 0], 0, 1), piece(&[1, -1], 0, 1), piece(&[0, 2], -1, 1)])),
        member("square_affine", unit_square(), pl(&[piece(&[2, -1], 1, 1)])),
        member("rectangle_kink", rectangle(2, 1), pl(&[piece(&[0, 0], 0, 1), piece(&[1, 0], -1, 1)])),
        member("simplex_max_xy", standard_simplex(2), pl(&[piece(&[1, 0], 0, 1), piece(&[0, 1], 0, 1)])),
        member("simplex_kink", standard_simplex(2), pl(&[piece(&[0, 0], 0, 1), piece(&[2, 0], -1, 2)])),
        member("simplex_affine", standard_simplex(2), pl(&[piece(&[1, 3], 0, 1)])),
        member("hexagon_max_xy", hexagon(), pl(&[piece(&[1, 0], 0, 1), piece(&[0, 1], 0, 1)])),
        member("hexagon_max_x0", hexagon(), pl(&[piece(&[0, 0], 0, 1), piece(&[1, 0], 0, 1)])),
        member("hexagon_affine", hexagon(), pl(&[piece(&[1, -1], 0, 1)])),
        member("trapezoid_kink", trapezoid(), pl(&[piece(&[0, 0], 0, 1), piece(&[1, 0], -1, 1)])),
        member("trapezoid_affine", trapezoid(), pl(&[piece(&[0, 1], 0, 1)])),
        member("half_triangle_kink", half_triangle(), pl(&[piece(&[0, 0], 0, 1), piece(&[1, 0], -1, 2)])),
        member("cube_kink", unit_cube(), pl(&[piece(&[0, 0, 0], 0, 1), piece(&[1, 1, 1], -1, 1)])),
        member("simplex3_max", standard_simplex(3), pl(&[piece(&[1, 0, 0], 0, 1), piece(&[0, 1, 0], 0, 1), piece(&[0, 0, 1], 0, 1)])),
    ]
}

pub fn find(corpus: &[Member], id: &str) -> ToricTestConfig {
    corpus.iter().find(|m| m.id == id).unwrap().tc.clone()
}

pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
