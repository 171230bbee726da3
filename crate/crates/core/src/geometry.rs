//! Exact rational geometry of full-dimensional polytopes.
//!
//! Polytopes are small (dimension ≤ 4, a few dozen vertices), so both the
//! vertex and the facet description are computed by brute-force enumeration of
//! affinely independent subsets. Everything here is exact.

use std::sync::OnceLock;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;
use crate::poly::Poly;
use crate::rational::{dot, primitive, sub, QVec, Q};

/// A facet `⟨x, normal⟩ ≤ offset` with primitive integer normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: Q,
    /// `normal / |normal|²`, a rational vector pairing to 1 with the normal.
    ///
    /// Completing any frame of the facet hyperplane by this vector gives a
    /// determinant equal to the volume in units where the induced lattice
    /// `ℤⁿ ∩ normal^⊥` has covolume one.
    pub transversal: QVec,
}

impl Facet {
    fn new(normal: Vec<i64>, offset: Q) -> Self {
        let norm2: i64 = normal.iter().map(|x| x * x).sum();
        let transversal = normal.iter().map(|&x| Q::new(x.into(), norm2.into())).collect();
        Facet { normal, offset, transversal }
    }

    pub fn normal_q(&self) -> QVec {
        self.normal.iter().map(|&x| Q::from_integer(x.into())).collect()
    }

    /// `offset − ⟨x, normal⟩`, non-negative inside the polytope.
    pub fn slack(&self, x: &[Q]) -> Q {
        &self.offset - dot(&self.normal_q(), x)
    }
}

/// A simplex given by its vertices (`dim + 1` points of the ambient space).
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vec<QVec>,
}

impl Simplex {
    /// Euclidean volume of a full-dimensional simplex.
    pub fn volume(&self) -> Q {
        let n = self.vertices.len() - 1;
        let rows: Vec<QVec> = self.vertices[1..].iter().map(|v| sub(v, &self.vertices[0])).collect();
        linalg::det(&rows).abs() / factorial(n)
    }

    pub fn integrate(&self, g: &Poly) -> Q {
        self.volume() * g.simplex_mean(&self.vertices)
    }
}

fn factorial(n: usize) -> Q {
    Q::from_integer((1..=n).fold(BigInt::from(1), |a, k| a * BigInt::from(k)))
}

#[derive(Debug, Clone)]
pub struct LatticePolytope {
    dim: usize,
    vertices: Vec<QVec>,
    facets: Vec<Facet>,
    /// Indices into `vertices` of the vertices on each facet.
    facet_vertices: Vec<Vec<usize>>,
    simplices: OnceLock<Vec<Vec<usize>>>,
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices && self.facets == other.facets
    }
}

impl LatticePolytope {
    /// Convex hull of a finite point set. Non-extreme points are discarded.
    pub fn from_vertices(points: Vec<QVec>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or_else(|| Error::invalid("polytope has no vertices"))?;
        if dim == 0 {
            return Err(Error::invalid("polytope dimension must be at least 1"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("vertices have inconsistent dimensions"));
        }
        let mut points = points;
        points.sort();
        points.dedup();
        let refs: Vec<&QVec> = points.iter().collect();
        if linalg::affine_dim(&refs) < dim {
            return Err(Error::invalid(format!("polytope is not full-dimensional in R^{dim}")));
        }

        let mut facets: Vec<Facet> = Vec::new();
        for subset in (0..points.len()).combinations(dim) {
            let base = &points[subset[0]];
            let rows: Vec<QVec> = subset[1..].iter().map(|&i| sub(&points[i], base)).collect();
            let ns = linalg::nullspace(&rows, dim);
            if ns.len() != 1 {
                continue;
            }
            let mut u = ns.into_iter().next().unwrap();
            let c = dot(&u, base);
            let mut above = false;
            let mut below = false;
            for p in &points {
                let s = dot(&u, p) - &c;
                above |= s.is_positive();
                below |= s.is_negative();
            }
            if above && below {
                continue;
            }
            if above {
                u = u.into_iter().map(|x| -x).collect();
            }
            let normal: Vec<i64> = primitive(&u)
                .into_iter()
                .map(|x| x.to_i64().ok_or_else(|| Error::invalid("facet normal overflows i64")))
                .collect::<Result<_>>()?;
            if facets.iter().any(|f| f.normal == normal) {
                continue;
            }
            let nq: QVec = normal.iter().map(|&x| Q::from_integer(x.into())).collect();
            let offset = dot(&nq, base);
            facets.push(Facet::new(normal, offset));
        }
        facets.sort_by(|a, b| a.normal.cmp(&b.normal).then_with(|| a.offset.cmp(&b.offset)));

        let on_facet = |p: &QVec, f: &Facet| f.slack(p).is_zero();
        let vertices: Vec<QVec> = points
            .into_iter()
            .filter(|p| {
                let normals: Vec<QVec> = facets.iter().filter(|f| on_facet(p, f)).map(Facet::normal_q).collect();
                linalg::rank(&normals) == dim
            })
            .collect();
        let facet_vertices = facets
            .iter()
            .map(|f| (0..vertices.len()).filter(|&i| on_facet(&vertices[i], f)).collect())
            .collect();
        Ok(LatticePolytope { dim, vertices, facets, facet_vertices, simplices: OnceLock::new() })
    }

    /// Polytope `{x : ⟨x, a_i⟩ ≤ b_i}`; the normals need not be primitive or integral.
    pub fn from_inequalities(rows: &[(QVec, Q)]) -> Result<Self> {
        let dim = rows.first().map(|r| r.0.len()).ok_or_else(|| Error::invalid("no inequalities"))?;
        if rows.iter().any(|r| r.0.len() != dim) {
            return Err(Error::invalid("inequalities have inconsistent dimensions"));
        }
        let vertices = enumerate_vertices(dim, rows);
        if vertices.is_empty() {
            return Err(Error::invalid("inequalities define an empty or unbounded set"));
        }
        let p = Self::from_vertices(vertices)?;
        // bounded iff every hull facet is one of the given inequalities
        for f in &p.facets {
            let matched = rows.iter().any(|(a, b)| {
                !a.iter().all(Zero::is_zero)
                    && primitive(a).iter().map(|x| x.to_i64()).collect::<Vec<_>>()
                        == f.normal.iter().map(|&x| Some(x)).collect::<Vec<_>>()
                    && {
                        let nq = f.normal_q();
                        // same hyperplane: b / |a| == offset / |normal| along the shared ray
                        let ratio = a.iter().zip(&nq).find(|(_, y)| !y.is_zero()).map(|(x, y)| x / y).unwrap();
                        *b == &f.offset * ratio
                    }
            });
            if !matched {
                return Err(Error::invalid("inequalities define an unbounded set"));
            }
        }
        Ok(p)
    }

    /// Intersection of this polytope with extra half-spaces; `None` when the
    /// result is empty or not full-dimensional.
    pub fn cut(&self, extra: &[(QVec, Q)]) -> Option<Self> {
        let mut rows: Vec<(QVec, Q)> = self.facets.iter().map(|f| (f.normal_q(), f.offset.clone())).collect();
        rows.extend(extra.iter().cloned());
        let vertices = enumerate_vertices(self.dim, &rows);
        let refs: Vec<&QVec> = vertices.iter().collect();
        if vertices.is_empty() || linalg::affine_dim(&refs) < self.dim {
            return None;
        }
        Self::from_vertices(vertices).ok()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_vertices(&self, facet: usize) -> Vec<QVec> {
        self.facet_vertices[facet].iter().map(|&i| self.vertices[i].clone()).collect()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.facets.iter().all(|f| !f.slack(x).is_negative())
    }

    /// Least common multiple of the vertex coordinate denominators.
    pub fn denominator(&self) -> BigInt {
        self.vertices.iter().flatten().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()))
    }

    fn simplex_indices(&self) -> &[Vec<usize>] {
        self.simplices.get_or_init(|| {
            let all: Vec<usize> = (0..self.vertices.len()).collect();
            self.triangulate_face(&all, self.dim)
        })
    }

    /// Cone triangulation: cone from the first vertex of each face over the
    /// triangulated subfaces that avoid it.
    fn triangulate_face(&self, face: &[usize], d: usize) -> Vec<Vec<usize>> {
        if d == 0 {
            return vec![face.to_vec()];
        }
        let apex = face[0];
        let mut subfaces: Vec<Vec<usize>> = Vec::new();
        for fv in &self.facet_vertices {
            let s: Vec<usize> = face.iter().copied().filter(|i| fv.contains(i)).collect();
            if s.len() < d || s.len() == face.len() || subfaces.contains(&s) {
                continue;
            }
            let pts: Vec<&QVec> = s.iter().map(|&i| &self.vertices[i]).collect();
            if linalg::affine_dim(&pts) == d - 1 {
                subfaces.push(s);
            }
        }
        let mut out = Vec::new();
        for s in subfaces.iter().filter(|s| !s.contains(&apex)) {
            for mut simplex in self.triangulate_face(s, d - 1) {
                simplex.insert(0, apex);
                out.push(simplex);
            }
        }
        out
    }

    pub fn triangulate(&self) -> Vec<Simplex> {
        self.simplex_indices()
            .iter()
            .map(|idx| Simplex { vertices: idx.iter().map(|&i| self.vertices[i].clone()).collect() })
            .collect()
    }

    pub fn volume(&self) -> Q {
        self.triangulate().iter().map(Simplex::volume).sum()
    }

    /// Exact `∫_P g dx` for a polynomial `g`.
    pub fn integrate(&self, g: &Poly) -> Q {
        if g.is_zero() {
            return Q::zero();
        }
        self.triangulate().iter().map(|s| s.integrate(g)).sum()
    }

    /// Exact `∫_P x^α dx`.
    pub fn moment_integral(&self, alpha: &[u32]) -> Q {
        self.integrate(&Poly::monomial(alpha))
    }

    /// Triangulation of a facet into `(dim − 1)`-simplices.
    pub fn facet_simplices(&self, facet: usize) -> Vec<Simplex> {
        self.triangulate_face(&self.facet_vertices[facet], self.dim - 1)
            .into_iter()
            .map(|idx| Simplex { vertices: idx.iter().map(|&i| self.vertices[i].clone()).collect() })
            .collect()
    }

    /// `∫_F g dσ` over one facet, with `dσ` the lattice-normalized facet measure.
    /// In dimension one the facets are points and `dσ` is the unit point mass.
    pub fn facet_integral(&self, facet: usize, g: &Poly) -> Q {
        let t = &self.facets[facet].transversal;
        self.facet_simplices(facet)
            .iter()
            .map(|s| {
                let mut rows: Vec<QVec> = s.vertices[1..].iter().map(|v| sub(v, &s.vertices[0])).collect();
                rows.push(t.clone());
                let vol = linalg::det(&rows).abs() / factorial(self.dim - 1);
                vol * g.simplex_mean(&s.vertices)
            })
            .sum()
    }

    pub fn facet_measure(&self, facet: usize) -> Q {
        self.facet_integral(facet, &Poly::constant(self.dim, Q::from_integer(1.into())))
    }

    /// `∑_F ∫_F g dσ` for a polynomial `g`.
    pub fn boundary_integral_poly(&self, g: &Poly) -> Q {
        (0..self.facets.len()).map(|i| self.facet_integral(i, g)).sum()
    }

    /// `Vol_σ(∂P)`.
    pub fn boundary_measure(&self) -> Q {
        (0..self.facets.len()).map(|i| self.facet_measure(i)).sum()
    }

    /// The lattice points of the dilate `kP`.
    pub fn lattice_points(&self, k: u64) -> Vec<Vec<i64>> {
        let n = self.dim;
        let kq = Q::from_integer(k.into());
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for v in &self.vertices {
            for j in 0..n {
                let x = &v[j] * &kq;
                lo[j] = lo[j].min(x.ceil().to_integer().to_i64().expect("coordinate overflow"));
                hi[j] = hi[j].max(x.floor().to_integer().to_i64().expect("coordinate overflow"));
            }
        }
        // ⟨a, u⟩·den ≤ k·num for offset = num/den
        let ineqs: Vec<(Vec<i128>, i128)> = self
            .facets
            .iter()
            .map(|f| {
                let den = f.offset.denom().to_i128().expect("offset overflow");
                let num = f.offset.numer().to_i128().expect("offset overflow");
                (f.normal.iter().map(|&u| u as i128 * den).collect(), num * k as i128)
            })
            .collect();
        let mut out = Vec::new();
        let mut cur = vec![0i64; n];
        enumerate_box(0, &lo, &hi, &ineqs, &mut cur, &mut out);
        out
    }
}

fn enumerate_box(
    j: usize,
    lo: &[i64],
    hi: &[i64],
    ineqs: &[(Vec<i128>, i128)],
    cur: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    let n = lo.len();
    if j + 1 == n {
        // solve the last coordinate's interval directly
        let (mut a, mut b) = (lo[j] as i128, hi[j] as i128);
        for (u, rhs) in ineqs {
            let partial: i128 = (0..j).map(|i| u[i] * cur[i] as i128).sum();
            let r = rhs - partial;
            let c = u[j];
            if c == 0 {
                if r < 0 {
                    return;
                }
            } else if c > 0 {
                b = b.min(Integer::div_floor(&r, &c));
            } else {
                a = a.max(Integer::div_ceil(&r, &c));
            }
        }
        for x in a..=b {
            cur[j] = x as i64;
            out.push(cur.clone());
        }
        return;
    }
    for x in lo[j]..=hi[j] {
        cur[j] = x;
        enumerate_box(j + 1, lo, hi, ineqs, cur, out);
    }
}

/// Vertices of `{x : ⟨x, a_i⟩ ≤ b_i}` by solving every `dim`-subset of rows.
fn enumerate_vertices(dim: usize, rows: &[(QVec, Q)]) -> Vec<QVec> {
    let mut out: Vec<QVec> = Vec::new();
    for subset in (0..rows.len()).combinations(dim) {
        let a: Vec<QVec> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Q> = subset.iter().map(|&i| rows[i].1.clone()).collect();
        let Some(x) = linalg::solve(&a, &b) else { continue };
        if rows.iter().all(|(ai, bi)| dot(ai, &x) <= *bi) {
            out.push(x);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Common test and corpus polytopes.
pub mod shapes {
    use super::*;
    use crate::rational::{q, qvec};

    pub fn interval(a: Q, b: Q) -> LatticePolytope {
        LatticePolytope::from_vertices(vec![vec![a], vec![b]]).expect("interval")
    }

    pub fn unit_interval() -> LatticePolytope {
        interval(q(0), q(1))
    }

    pub fn unit_square() -> LatticePolytope {
        LatticePolytope::from_vertices(vec![qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[1, 1])]).unwrap()
    }

    pub fn rectangle(a: i64, b: i64) -> LatticePolytope {
        LatticePolytope::from_vertices(vec![qvec(&[0, 0]), qvec(&[a, 0]), qvec(&[0, b]), qvec(&[a, b])]).unwrap()
    }

    /// `conv{0, e_1, …, e_n}`.
    pub fn standard_simplex(n: usize) -> LatticePolytope {
        let mut pts = vec![vec![q(0); n]];
        for i in 0..n {
            let mut e = vec![q(0); n];
            e[i] = q(1);
            pts.push(e);
        }
        LatticePolytope::from_vertices(pts).unwrap()
    }

    /// `conv{±e_1, ±e_2, ±(e_1 + e_2)}`, the polytope of the degree-6 del Pezzo surface.
    pub fn hexagon() -> LatticePolytope {
        LatticePolytope::from_vertices(vec![
            qvec(&[1, 0]),
            qvec(&[0, 1]),
            qvec(&[-1, 1]),
            qvec(&[-1, 0]),
            qvec(&[0, -1]),
            qvec(&[1, -1]),
        ])
        .unwrap()
    }

    pub fn unit_cube() -> LatticePolytope {
        let pts = (0..8).map(|m| qvec(&[m & 1, (m >> 1) & 1, (m >> 2) & 1])).collect();
        LatticePolytope::from_vertices(pts).unwrap()
    }
}
