//! Continuous invariants of a toric test configuration: the `L²(P)` projection
//! onto mean-zero affine Hamiltonians, the Donaldson–Futaki invariant by two
//! independent routes, and the plain, twisted, reduced and infimum `L^p` norms.
//!
//! The tangent of the geodesic ray corresponds to `f − f̄` and the Hamiltonian of
//! a torus direction `w` to `⟨w, x⟩ − mean`, all integrated against Lebesgue
//! measure on `P` normalized by `V = Vol(P)`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::LatticePolytope;
use crate::linalg;
use crate::optimize;
use crate::plfun::{self, AffinePiece, FloatMesh, PlConvex, PlDiff};
use crate::poly::Poly;
use crate::quantize::{ehrhart_fit, SubtorusDirections, ToricTestConfig};
use crate::rational::{from_f64, to_f64, QVec, Q};

/// Default absolute tolerance for the infimum-norm descent.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default absolute tolerance for quadrature at non-integer `p`.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;
const MAX_EVALS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// Coordinates of the projection in the basis of `W`.
    pub coefficients: QVec,
    /// The projected Hamiltonian; mean zero on `P`.
    pub projected: AffinePiece,
    /// `(1/V) ∫_P (f − f̄ − projected)²`.
    pub residual_mean_square: Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Plain,
    Twisted,
    Reduced,
    Infimum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub p: f64,
    pub value: f64,
    /// `(1/V) ∫ |·|^p` before the root, when it is known exactly.
    pub exact_inner: Option<Q>,
    pub kind: NormKind,
}

impl NormReport {
    fn exact(p: u32, inner: Q, kind: NormKind) -> Self {
        let value = to_f64(&inner).powf(1.0 / p as f64);
        NormReport { p: p as f64, value, exact_inner: Some(inner), kind }
    }

    fn approximate(p: f64, inner: f64, kind: NormKind) -> Self {
        NormReport { p, value: inner.max(0.0).powf(1.0 / p), exact_inner: None, kind }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.exact_inner.as_ref().is_some_and(Zero::is_zero)
    }
}

fn integer_power(p: f64) -> Result<Option<u32>> {
    if p.is_nan() || p < 1.0 || !p.is_finite() {
        return Err(Error::invalid(format!("p must be a real number ≥ 1, got {p}")));
    }
    Ok((p.fract() == 0.0 && p <= 64.0).then_some(p as u32))
}

/// `(1/V) ∫_P |g|^p` exactly for integer `p`, else by quadrature.
fn mean_abs_power(g: &PlDiff, poly: &LatticePolytope, p: f64, kind: NormKind) -> Result<NormReport> {
    let v = poly.volume();
    Ok(match integer_power(p)? {
        Some(k) => NormReport::exact(k, plfun::integrate_abs_power(g, poly, k) / v, kind),
        None => {
            let inner = plfun::integrate_abs_power_real(g, poly, p, DEFAULT_QUAD_TOL) / to_f64(&v);
            NormReport::approximate(p, inner, kind)
        }
    })
}

/// Mean-zero Hamiltonians `⟨w_i, x⟩ − m_i` of the basis of `W`, as affine pieces.
fn hamiltonians(poly: &LatticePolytope, w: &SubtorusDirections) -> Vec<AffinePiece> {
    let v = poly.volume();
    w.basis()
        .iter()
        .map(|wi| {
            let m = poly.integrate(&Poly::affine(wi, &Q::zero())) / &v;
            AffinePiece::new(wi.clone(), -m)
        })
        .collect()
}

/// Orthogonal projection of `f − f̄` onto `span{⟨w_i, x⟩ − m_i}` in `L²(P)`.
pub fn continuous_projection(
    f: &PlConvex,
    poly: &LatticePolytope,
    w: &SubtorusDirections,
) -> Result<ProjectionResult> {
    let v = poly.volume();
    let mean_f = plfun::mean(f, poly);
    let hams = hamiltonians(poly, w);
    let gram: Vec<QVec> = hams
        .iter()
        .map(|a| hams.iter().map(|b| poly.integrate(&a.to_poly().mul(&b.to_poly()))).collect())
        .collect();
    let g = PlDiff::from(f.clone());
    // ∫ (f − f̄) h_i = ∫ f h_i since h_i has mean zero
    let rhs: QVec = hams.iter().map(|h| plfun::integrate_pl_times(&g, &h.to_poly(), poly)).collect();
    let coefficients =
        linalg::solve(&gram, &rhs).ok_or_else(|| Error::DegenerateGram { context: "continuous projection".into() })?;
    let projected = hams
        .iter()
        .zip(&coefficients)
        .fold(AffinePiece::zero(poly.dim()), |acc, (h, c)| acc.add(&h.scale(c)));
    let residual = PlDiff::minus_affine(f, &projected.add(&AffinePiece::constant(poly.dim(), mean_f)));
    let residual_mean_square = plfun::integrate_abs_power(&residual, poly, 2) / v;
    Ok(ProjectionResult { coefficients, projected, residual_mean_square })
}

/// `F₁ = (1/(2V)) (∫_∂P f dσ − a ∫_P f dx)` with `a = Vol_σ(∂P)/V`.
///
/// This is the subleading coefficient of `∑_{a ∈ kP} k f(a/k) / (k N_k)` read off
/// from the two-term lattice-sum expansions of the numerator and `N_k`.
pub fn boundary_df(f: &PlConvex, poly: &LatticePolytope) -> Q {
    let v = poly.volume();
    let a = poly.boundary_measure() / &v;
    let interior = plfun::integrate_pl(&PlDiff::from(f.clone()), poly);
    (plfun::boundary_integral(f, poly) - a * interior) / (Q::from_integer(2.into()) * v)
}

/// Donaldson–Futaki invariant from the Ehrhart expansion of the weight sum.
pub fn df(tc: &ToricTestConfig) -> Result<Q> {
    Ok(ehrhart_fit(tc)?.f1 / tc.denominator_q())
}

/// Boundary formula applied to the scaled function; equals `df(tc) · D`.
pub fn df_boundary(tc: &ToricTestConfig) -> Q {
    boundary_df(tc.scaled_function(), tc.polytope())
}

pub fn norm_p(tc: &ToricTestConfig, p: f64) -> Result<NormReport> {
    let f = tc.function();
    let mean = plfun::mean(f, tc.polytope());
    let g = PlDiff::minus_affine(f, &AffinePiece::constant(tc.dim(), mean));
    mean_abs_power(&g, tc.polytope(), p, NormKind::Plain)
}

/// `((1/V) ∫_P |(f − f̄) + (ℓ − ℓ̄)|^p)^{1/p}`.
pub fn twisted_norm(tc: &ToricTestConfig, l: &AffinePiece, p: f64) -> Result<NormReport> {
    let poly = tc.polytope();
    if l.dim() != tc.dim() {
        return Err(Error::invalid("twisting function has the wrong dimension"));
    }
    let f = tc.function();
    let mean_f = plfun::mean(f, poly);
    let mean_l = poly.integrate(&l.to_poly()) / poly.volume();
    let shift = l.sub(&AffinePiece::constant(tc.dim(), mean_l + mean_f));
    mean_abs_power(&PlDiff::from(f.shift(&shift)), poly, p, NormKind::Twisted)
}

pub fn reduced_norm(tc: &ToricTestConfig, w: &SubtorusDirections, p: f64) -> Result<NormReport> {
    let poly = tc.polytope();
    let f = tc.function();
    let proj = continuous_projection(f, poly, w)?;
    let mean_f = plfun::mean(f, poly);
    let g = PlDiff::minus_affine(f, &proj.projected.add(&AffinePiece::constant(tc.dim(), mean_f)));
    mean_abs_power(&g, poly, p, NormKind::Reduced)
}

/// Minimizes the twisted norm over `ℓ` with slope in `W`.
///
/// Starts from `ℓ = −projected`, where the twisted norm equals the reduced norm,
/// so the result never exceeds the reduced norm. Returns the report and the
/// minimizing mean-zero `ℓ*`.
pub fn infimum_norm(
    tc: &ToricTestConfig,
    w: &SubtorusDirections,
    p: f64,
    tol: f64,
) -> Result<(NormReport, AffinePiece)> {
    integer_power(p)?;
    let poly = tc.polytope();
    let f = tc.function();
    let proj = continuous_projection(f, poly, w)?;
    let mean_f = plfun::mean(f, poly);
    let vol = to_f64(&poly.volume());
    let mesh = FloatMesh::new(&PlDiff::minus_affine(f, &AffinePiece::constant(tc.dim(), mean_f)), poly);
    let hams = hamiltonians(poly, w);
    let hams_f: Vec<(Vec<f64>, f64)> =
        hams.iter().map(|h| (h.slope.iter().map(to_f64).collect(), to_f64(&h.constant))).collect();
    let n = tc.dim();
    let objective = |t: &[f64]| {
        let mut slope = vec![0.0; n];
        let mut constant = 0.0;
        for (ti, (s, c)) in t.iter().zip(&hams_f) {
            for (acc, x) in slope.iter_mut().zip(s) {
                *acc += ti * x;
            }
            constant += ti * c;
        }
        mesh.abs_power_integral(&slope, constant, p, DEFAULT_QUAD_TOL) / vol
    };
    let x0: Vec<f64> = proj.coefficients.iter().map(|c| -to_f64(c)).collect();
    let min = optimize::minimize(objective, &x0, tol, MAX_EVALS)?;
    let minimizer = hams
        .iter()
        .zip(&min.x)
        .fold(AffinePiece::zero(n), |acc, (h, &t)| acc.add(&h.scale(&from_f64(t))));
    let at_start = x0.iter().zip(&min.x).all(|(a, b)| a == b);
    let report = match integer_power(p)? {
        // nothing improved on the projection: the exact reduced value is attained
        Some(k) if at_start => {
            let exact = reduced_norm(tc, w, p)?.exact_inner.expect("integer p");
            NormReport::exact(k, exact, NormKind::Infimum)
        }
        _ => NormReport::approximate(p, min.value, NormKind::Infimum),
    };
    let minimizer = if at_start { proj.projected.scale(&-Q::one()) } else { minimizer };
    Ok((report, minimizer))
}

/// `DF − DF(P(𝒳, ℒ))`, with the product configuration's DF (the Futaki
/// character of the projected direction) evaluated by the boundary formula.
pub fn df_relative(tc: &ToricTestConfig, w: &SubtorusDirections) -> Result<Q> {
    let proj = continuous_projection(tc.function(), tc.polytope(), w)?;
    Ok(df(tc)? - boundary_df(&PlConvex::affine(proj.projected), tc.polytope()))
}

/// `(1/V) ∫ projected²`, the squared norm of the projected Hamiltonian.
pub fn projected_mean_square(proj: &ProjectionResult, poly: &LatticePolytope) -> Q {
    poly.integrate(&proj.projected.to_poly().pow(2)) / poly.volume()
}

/// `(1/V) ∫_P P(f − f̄)^p`, the continuous side of the projected moment.
pub fn projected_moment(proj: &ProjectionResult, poly: &LatticePolytope, p: u32) -> Q {
    poly.integrate(&proj.projected.to_poly().pow(p)) / poly.volume()
}

/// `(1/V) ∫_P (f − f̄)^p`.
pub fn centered_moment(f: &PlConvex, poly: &LatticePolytope, p: u32) -> Q {
    let mean = plfun::mean(f, poly);
    let g = PlDiff::minus_affine(f, &AffinePiece::constant(poly.dim(), mean));
    g.linearity_regions(poly).integrate_with(|h| h.to_poly().pow(p)) / poly.volume()
}
