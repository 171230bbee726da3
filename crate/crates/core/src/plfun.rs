//! Rational piecewise-linear convex functions on polytopes.
//!
//! A [`PlConvex`] is stored as a maximum of affine pieces. Integrals are exact:
//! the polytope is cut into the cells where a single piece is active (and, for
//! `|g|^p`, further by the sign of `g`), each cell is triangulated and the
//! resulting polynomial is integrated in closed form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePolytope;
use crate::poly::Poly;
use crate::quadrature::simplex_mean_abs_power;
use crate::rational::{dot, serde_q, serde_qvec, to_f64, QVec, Q};

/// `x ↦ ⟨slope, x⟩ + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffinePiece {
    #[serde(with = "serde_qvec")]
    pub slope: QVec,
    #[serde(with = "serde_q")]
    pub constant: Q,
}

impl AffinePiece {
    pub fn new(slope: QVec, constant: Q) -> Self {
        AffinePiece { slope, constant }
    }

    pub fn zero(dim: usize) -> Self {
        AffinePiece { slope: vec![Q::zero(); dim], constant: Q::zero() }
    }

    pub fn constant(dim: usize, c: Q) -> Self {
        AffinePiece { slope: vec![Q::zero(); dim], constant: c }
    }

    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        dot(&self.slope, x) + &self.constant
    }

    pub fn eval_int(&self, a: &[i64]) -> Q {
        crate::rational::dot_int(&self.slope, a) + &self.constant
    }

    pub fn to_poly(&self) -> Poly {
        Poly::affine(&self.slope, &self.constant)
    }

    pub fn add(&self, other: &AffinePiece) -> AffinePiece {
        AffinePiece {
            slope: self.slope.iter().zip(&other.slope).map(|(a, b)| a + b).collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &AffinePiece) -> AffinePiece {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, s: &Q) -> AffinePiece {
        AffinePiece { slope: self.slope.iter().map(|x| x * s).collect(), constant: &self.constant * s }
    }

    pub fn is_constant(&self) -> bool {
        self.slope.iter().all(Zero::is_zero)
    }

    fn is_zero(&self) -> bool {
        self.is_constant() && self.constant.is_zero()
    }

    /// Half-space `{x : self(x) ≥ other(x)}` as a row `⟨x, a⟩ ≤ b`.
    fn dominates_row(&self, other: &AffinePiece) -> (QVec, Q) {
        let a = other.slope.iter().zip(&self.slope).map(|(o, s)| o - s).collect();
        (a, &self.constant - &other.constant)
    }

    fn to_f64(&self) -> (Vec<f64>, f64) {
        (self.slope.iter().map(to_f64).collect(), to_f64(&self.constant))
    }
}

/// A convex piecewise-linear function `f(x) = max_j (⟨ξ_j, x⟩ + c_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlConvexRepr", into = "PlConvexRepr")]
pub struct PlConvex {
    pieces: Vec<AffinePiece>,
}

#[derive(Serialize, Deserialize)]
struct PlConvexRepr {
    pieces: Vec<AffinePiece>,
}

impl TryFrom<PlConvexRepr> for PlConvex {
    type Error = Error;
    fn try_from(r: PlConvexRepr) -> Result<Self> {
        PlConvex::new(r.pieces)
    }
}

impl From<PlConvex> for PlConvexRepr {
    fn from(f: PlConvex) -> Self {
        PlConvexRepr { pieces: f.pieces }
    }
}

impl PlConvex {
    pub fn new(pieces: Vec<AffinePiece>) -> Result<Self> {
        let dim = pieces.first().map(AffinePiece::dim).ok_or_else(|| Error::invalid("PL function has no pieces"))?;
        if dim == 0 || pieces.iter().any(|p| p.dim() != dim) {
            return Err(Error::invalid("PL function pieces have inconsistent dimensions"));
        }
        Ok(PlConvex { pieces })
    }

    pub fn affine(piece: AffinePiece) -> Self {
        PlConvex { pieces: vec![piece] }
    }

    pub fn zero(dim: usize) -> Self {
        Self::affine(AffinePiece::zero(dim))
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn evaluate(&self, x: &[Q]) -> Q {
        self.pieces.iter().map(|p| p.eval(x)).max().expect("nonempty")
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| {
                let (s, c) = p.to_f64();
                s.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + c
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `m · f` for `m ≥ 0`.
    pub fn scale(&self, m: &Q) -> PlConvex {
        assert!(!m.is_negative(), "scaling a convex function by a negative factor");
        PlConvex { pieces: self.pieces.iter().map(|p| p.scale(m)).collect() }
    }

    /// `f + ℓ` for affine `ℓ`.
    pub fn shift(&self, l: &AffinePiece) -> PlConvex {
        PlConvex { pieces: self.pieces.iter().map(|p| p.add(l)).collect() }
    }

    /// `(D·f, D)` with `D` the least positive integer clearing every denominator.
    pub fn clear_denominators(&self) -> (PlConvex, BigInt) {
        let d = self
            .pieces
            .iter()
            .flat_map(|p| p.slope.iter().chain(std::iter::once(&p.constant)))
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        (self.scale(&Q::from_integer(d.clone())), d)
    }

    fn distinct_pieces(&self) -> Vec<AffinePiece> {
        let mut ps = self.pieces.clone();
        ps.sort();
        ps.dedup();
        ps
    }

    /// Cells of `P` on which a single piece attains the maximum.
    pub fn linearity_regions(&self, p: &LatticePolytope) -> Subdivision {
        PlDiff::from(self.clone()).linearity_regions(p)
    }

    /// The piece that attains the maximum on all of `P`, if one does.
    ///
    /// Piece `j` dominates iff `piece_j − piece_i ≥ 0` at every vertex of `P`,
    /// for every `i`.
    pub fn active_piece_on(&self, p: &LatticePolytope) -> Option<&AffinePiece> {
        self.pieces.iter().find(|pj| {
            self.pieces
                .iter()
                .all(|pi| p.vertices().iter().all(|v| !(pj.eval(v) - pi.eval(v)).is_negative()))
        })
    }

    pub fn is_affine_on(&self, p: &LatticePolytope) -> bool {
        self.active_piece_on(p).is_some()
    }

    /// Drops pieces that are nowhere active on `P` (up to measure zero).
    pub fn pruned(&self, p: &LatticePolytope) -> PlConvex {
        let cells = self.linearity_regions(p);
        let mut pieces: Vec<AffinePiece> = cells.cells.into_iter().map(|c| c.piece).collect();
        pieces.sort();
        pieces.dedup();
        PlConvex { pieces }
    }
}

/// A signed piecewise-linear expression `plus − minus` with both parts convex.
#[derive(Debug, Clone, PartialEq)]
pub struct PlDiff {
    pub plus: PlConvex,
    pub minus: PlConvex,
}

impl From<PlConvex> for PlDiff {
    fn from(f: PlConvex) -> Self {
        let dim = f.dim();
        PlDiff { plus: f, minus: PlConvex::zero(dim) }
    }
}

impl From<AffinePiece> for PlDiff {
    fn from(l: AffinePiece) -> Self {
        PlDiff::from(PlConvex::affine(l))
    }
}

impl PlDiff {
    pub fn new(plus: PlConvex, minus: PlConvex) -> Self {
        PlDiff { plus, minus }
    }

    /// `f − ℓ` for affine `ℓ`; the affine part is folded into the convex part.
    pub fn minus_affine(f: &PlConvex, l: &AffinePiece) -> Self {
        PlDiff::from(f.shift(&l.scale(&-Q::one())))
    }

    pub fn dim(&self) -> usize {
        self.plus.dim()
    }

    pub fn evaluate(&self, x: &[Q]) -> Q {
        self.plus.evaluate(x) - self.minus.evaluate(x)
    }

    pub fn evaluate_f64(&self, x: &[f64]) -> f64 {
        self.plus.evaluate_f64(x) - self.minus.evaluate_f64(x)
    }

    /// Common refinement of the linearity cells of both parts.
    pub fn linearity_regions(&self, p: &LatticePolytope) -> Subdivision {
        let plus = self.plus.distinct_pieces();
        let minus = self.minus.distinct_pieces();
        if plus.len() == 1 && minus.len() == 1 {
            return Subdivision { cells: vec![Cell { polytope: p.clone(), piece: plus[0].sub(&minus[0]) }] };
        }
        let mut cells = Vec::new();
        for (i, a) in plus.iter().enumerate() {
            for (j, b) in minus.iter().enumerate() {
                let mut rows: Vec<(QVec, Q)> = Vec::new();
                rows.extend(plus.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, o)| a.dominates_row(o)));
                rows.extend(minus.iter().enumerate().filter(|&(l, _)| l != j).map(|(_, o)| b.dominates_row(o)));
                rows.retain(|(r, c)| !(r.iter().all(Zero::is_zero) && !c.is_negative()));
                if rows.iter().any(|(r, c)| r.iter().all(Zero::is_zero) && c.is_negative()) {
                    continue;
                }
                if let Some(cell) = p.cut(&rows) {
                    cells.push(Cell { polytope: cell, piece: a.sub(b) });
                }
            }
        }
        Subdivision { cells }
    }

    /// Linearity cells further split by the sign of the expression.
    pub fn sign_regions(&self, p: &LatticePolytope) -> Vec<(Cell, bool)> {
        let mut out = Vec::new();
        for cell in self.linearity_regions(p).cells {
            let h = &cell.piece;
            if h.is_constant() {
                let nonneg = !h.constant.is_negative();
                out.push((cell, nonneg));
                continue;
            }
            let values: Vec<Q> = cell.polytope.vertices().iter().map(|v| h.eval(v)).collect();
            if values.iter().all(|v| !v.is_negative()) {
                out.push((cell, true));
            } else if values.iter().all(|v| !v.is_positive()) {
                out.push((cell, false));
            } else {
                // h ≥ 0  ⟺  ⟨x, −ξ⟩ ≤ c
                let neg_slope: QVec = h.slope.iter().map(|x| -x).collect();
                if let Some(c) = cell.polytope.cut(&[(neg_slope, h.constant.clone())]) {
                    out.push((Cell { polytope: c, piece: h.clone() }, true));
                }
                if let Some(c) = cell.polytope.cut(&[(h.slope.clone(), -h.constant.clone())]) {
                    out.push((Cell { polytope: c, piece: h.clone() }, false));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub polytope: LatticePolytope,
    pub piece: AffinePiece,
}

/// Cells with disjoint interiors covering a polytope, each with a single affine function.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub cells: Vec<Cell>,
}

impl Subdivision {
    /// `∑_cells ∫_cell map(piece) dx`.
    pub fn integrate_with(&self, map: impl Fn(&AffinePiece) -> Poly) -> Q {
        self.cells.iter().map(|c| c.polytope.integrate(&map(&c.piece))).sum()
    }

    /// Least common multiple of all cell vertex denominators.
    pub fn denominator(&self) -> BigInt {
        self.cells.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.polytope.denominator()))
    }
}

pub fn mean(f: &PlConvex, p: &LatticePolytope) -> Q {
    integrate_pl(&PlDiff::from(f.clone()), p) / p.volume()
}

/// Exact `∫_P g dx`.
pub fn integrate_pl(g: &PlDiff, p: &LatticePolytope) -> Q {
    g.linearity_regions(p).integrate_with(AffinePiece::to_poly)
}

/// Exact `∫_P g · h dx` for a polynomial weight `h`.
pub fn integrate_pl_times(g: &PlDiff, h: &Poly, p: &LatticePolytope) -> Q {
    g.linearity_regions(p).integrate_with(|a| a.to_poly().mul(h))
}

/// Exact `∫_P |g|^p dx` for integer `p ≥ 1`.
pub fn integrate_abs_power(g: &PlDiff, p: &LatticePolytope, power: u32) -> Q {
    assert!(power >= 1, "power must be at least 1");
    g.sign_regions(p)
        .into_iter()
        .map(|(cell, nonneg)| {
            let h = if nonneg { cell.piece.clone() } else { cell.piece.scale(&-Q::one()) };
            if h.is_zero() {
                return Q::zero();
            }
            cell.polytope.integrate(&h.to_poly().pow(power))
        })
        .sum()
}

/// `∫_∂P f dσ` with `dσ` the lattice-normalized facet measure.
pub fn boundary_integral(f: &PlConvex, p: &LatticePolytope) -> Q {
    let mut total = Q::zero();
    for cell in f.linearity_regions(p).cells {
        let g = cell.piece.to_poly();
        for (i, cf) in cell.polytope.facets().iter().enumerate() {
            if p.facets().iter().any(|pf| pf.normal == cf.normal && pf.offset == cf.offset) {
                total += cell.polytope.facet_integral(i, &g);
            }
        }
    }
    total
}

/// Triangulated linearity cells in floating point, for repeated evaluation of
/// `∫_P |g + ℓ|^p` while `ℓ` varies.
#[derive(Debug, Clone)]
pub struct FloatMesh {
    simplices: Vec<FloatSimplex>,
}

#[derive(Debug, Clone)]
struct FloatSimplex {
    vertices: Vec<Vec<f64>>,
    volume: f64,
    values: Vec<f64>,
}

impl FloatMesh {
    pub fn new(g: &PlDiff, p: &LatticePolytope) -> Self {
        let mut simplices = Vec::new();
        for cell in g.linearity_regions(p).cells {
            for s in cell.polytope.triangulate() {
                let values = s.vertices.iter().map(|v| to_f64(&cell.piece.eval(v))).collect();
                simplices.push(FloatSimplex {
                    vertices: s.vertices.iter().map(|v| v.iter().map(to_f64).collect()).collect(),
                    volume: to_f64(&s.volume()),
                    values,
                });
            }
        }
        FloatMesh { simplices }
    }

    /// `∫_P |g + ℓ|^p dx` with `ℓ = ⟨slope, x⟩ + constant`.
    pub fn abs_power_integral(&self, slope: &[f64], constant: f64, power: f64, tol: f64) -> f64 {
        self.simplices
            .iter()
            .map(|s| {
                let vals: Vec<f64> = s
                    .vertices
                    .iter()
                    .zip(&s.values)
                    .map(|(v, g)| g + constant + v.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>())
                    .collect();
                s.volume * simplex_mean_abs_power(&vals, power, tol)
            })
            .sum()
    }
}

/// `∫_P |g|^p dx` for real `p ≥ 1` by quadrature on the linearity cells.
pub fn integrate_abs_power_real(g: &PlDiff, p: &LatticePolytope, power: f64, tol: f64) -> f64 {
    FloatMesh::new(g, p).abs_power_integral(&vec![0.0; p.dim()], 0.0, power, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::*;
    use crate::rational::{q, qf, qvec};

    pub(crate) fn kink() -> PlConvex {
        PlConvex::new(vec![AffinePiece::zero(1), AffinePiece::new(qvec(&[2]), q(-1))]).unwrap()
    }

    fn x_piece() -> AffinePiece {
        AffinePiece::new(qvec(&[1]), q(0))
    }

    #[test]
    fn evaluate_kink() {
        let f = kink();
        assert_eq!(f.evaluate(&[qf(1, 2)]), q(0));
        assert_eq!(f.evaluate(&[q(1)]), q(1));
        assert_eq!(f.evaluate(&[qf(3, 4)]), qf(1, 2));
    }

    #[test]
    fn clear_denominator_examples() {
        let (s, d) = kink().clear_denominators();
        assert_eq!((s, d), (kink(), BigInt::from(1)));
        let f = PlConvex::new(vec![AffinePiece::zero(1), AffinePiece::new(vec![qf(1, 2)], qf(-1, 3))]).unwrap();
        let (s, d) = f.clear_denominators();
        assert_eq!(d, BigInt::from(6));
        let expected = PlConvex::new(vec![AffinePiece::zero(1), AffinePiece::new(qvec(&[3]), q(-2))]).unwrap();
        assert_eq!(s, expected);
        let (s, d) = PlConvex::affine(x_piece()).clear_denominators();
        assert_eq!((s, d), (PlConvex::affine(x_piece()), BigInt::from(1)));
    }

    #[test]
    fn cleared_weights_are_integral() {
        let f = PlConvex::new(vec![
            AffinePiece::new(vec![qf(1, 2), qf(-2, 3)], qf(1, 5)),
            AffinePiece::new(vec![qf(-3, 4), q(0)], qf(-1, 7)),
            AffinePiece::new(vec![q(0), qf(5, 6)], q(0)),
        ])
        .unwrap();
        let (s, _) = f.clear_denominators();
        let p = hexagon();
        for k in 1..=25u64 {
            for a in p.lattice_points(k) {
                let x: QVec = a.iter().map(|&c| qf(c, k as i64)).collect();
                let w = s.evaluate(&x) * q(k as i64);
                assert!(w.is_integer(), "k={k} a={a:?} w={w}");
            }
        }
    }

    #[test]
    fn linearity_region_examples() {
        let i = unit_interval();
        assert_eq!(PlConvex::affine(x_piece()).linearity_regions(&i).cells.len(), 1);
        let cells = kink().linearity_regions(&i).cells;
        let mut spans: Vec<(Q, Q)> = cells
            .iter()
            .map(|c| (c.polytope.vertices()[0][0].clone(), c.polytope.vertices()[1][0].clone()))
            .collect();
        spans.sort();
        assert_eq!(spans, vec![(q(0), qf(1, 2)), (qf(1, 2), q(1))]);
        let maxxy =
            PlConvex::new(vec![AffinePiece::new(qvec(&[1, 0]), q(0)), AffinePiece::new(qvec(&[0, 1]), q(0))]).unwrap();
        let cells = maxxy.linearity_regions(&unit_square()).cells;
        assert_eq!(cells.len(), 2);
        assert!(cells.iter().all(|c| c.polytope.vertices().len() == 3 && c.polytope.volume() == qf(1, 2)));
    }

    #[test]
    fn affinity_detection() {
        let i = unit_interval();
        assert!(PlConvex::affine(x_piece()).is_affine_on(&i));
        assert!(!kink().is_affine_on(&i));
        let redundant = PlConvex::new(vec![x_piece(), AffinePiece::new(qvec(&[1]), q(-1))]).unwrap();
        assert!(redundant.is_affine_on(&i));
        assert_eq!(redundant.pruned(&i), PlConvex::affine(x_piece()));
    }

    #[test]
    fn integrate_pl_examples() {
        let i = unit_interval();
        assert_eq!(integrate_pl(&kink().into(), &i), qf(1, 4));
        assert_eq!(integrate_pl(&x_piece().into(), &i), qf(1, 2));
        let maxxy =
            PlConvex::new(vec![AffinePiece::new(qvec(&[1, 0]), q(0)), AffinePiece::new(qvec(&[0, 1]), q(0))]).unwrap();
        assert_eq!(integrate_pl(&maxxy.into(), &unit_square()), qf(2, 3));
    }

    #[test]
    fn integrate_abs_power_examples() {
        let i = unit_interval();
        let g = PlDiff::from(AffinePiece::new(qvec(&[1]), qf(-1, 2)));
        assert_eq!(integrate_abs_power(&g, &i, 2), qf(1, 12));
        let centered = PlDiff::minus_affine(&kink(), &AffinePiece::constant(1, qf(1, 4)));
        assert_eq!(integrate_abs_power(&centered, &i, 2), qf(5, 48));
        let residual = PlDiff::minus_affine(&kink(), &AffinePiece::new(qvec(&[1]), qf(-1, 4)));
        assert_eq!(integrate_abs_power(&residual, &i, 2), qf(1, 48));
    }

    #[test]
    fn boundary_integral_examples() {
        let i = unit_interval();
        assert_eq!(boundary_integral(&PlConvex::affine(AffinePiece::constant(1, q(1))), &i), q(2));
        assert_eq!(boundary_integral(&PlConvex::affine(AffinePiece::constant(2, q(1))), &unit_square()), q(4));
        assert_eq!(boundary_integral(&kink(), &i), q(1));
    }

    #[test]
    fn square_expansion_agrees_with_sign_split() {
        let f = PlConvex::new(vec![
            AffinePiece::new(qvec(&[1, 0]), q(0)),
            AffinePiece::new(qvec(&[0, 1]), q(0)),
            AffinePiece::new(qvec(&[-1, -1]), qf(1, 3)),
        ])
        .unwrap();
        let g = PlDiff::minus_affine(&f, &AffinePiece::new(vec![qf(1, 3), qf(-1, 5)], qf(1, 2)));
        for p in [unit_square(), hexagon(), standard_simplex(2)] {
            let a = integrate_abs_power(&g, &p, 2);
            let b = g.linearity_regions(&p).integrate_with(|h| h.to_poly().pow(2));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn float_mesh_matches_exact() {
        let g = PlDiff::minus_affine(&kink(), &AffinePiece::constant(1, qf(1, 4)));
        let i = unit_interval();
        for p in [1u32, 2, 3] {
            let exact = to_f64(&integrate_abs_power(&g, &i, p));
            let float = integrate_abs_power_real(&g, &i, p as f64, 1e-13);
            assert!((exact - float).abs() < 1e-13, "p={p}: {exact} vs {float}");
        }
    }
}
