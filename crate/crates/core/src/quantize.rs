//! Weight spectra of toric test configurations at level `k`.
//!
//! A toric test configuration is a polytope `P` with a rational convex PL
//! function `f`. At level `k` the sections of the central fiber are indexed by
//! the lattice points `a ∈ kP ∩ ℤⁿ` and the generator acts diagonally with
//! weight `λ'_a = k·f(a/k)`. Torus directions `w ∈ W` act with weights
//! `⟨w, a⟩`; after removing traces both are diagonal matrices, so the Killing
//! form `Tr(AB)` becomes a plain sum over lattice points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::LatticePolytope;
use crate::linalg;
use crate::plfun::PlConvex;
use crate::rational::{dot_int, pow, QVec, Q};

#[derive(Debug, Clone)]
pub struct ToricTestConfig {
    polytope: LatticePolytope,
    f: PlConvex,
    scaled_f: PlConvex,
    denominator: BigInt,
    scaled: bool,
}

impl ToricTestConfig {
    /// Builds a configuration and clears denominators (base change `τ ↦ τ^D`).
    pub fn new(polytope: LatticePolytope, f: PlConvex) -> Result<Self> {
        if polytope.dim() != f.dim() {
            return Err(Error::invalid(format!(
                "polytope has dimension {} but the function has dimension {}",
                polytope.dim(),
                f.dim()
            )));
        }
        let (scaled_f, denominator) = f.clear_denominators();
        Ok(ToricTestConfig { polytope, f, scaled_f, denominator, scaled: true })
    }

    /// A configuration whose denominators were never cleared. Spectra of it are refused.
    pub fn unscaled(polytope: LatticePolytope, f: PlConvex) -> Result<Self> {
        let mut tc = Self::new(polytope, f)?;
        tc.scaled_f = tc.f.clone();
        tc.denominator = BigInt::one();
        tc.scaled = false;
        Ok(tc)
    }

    pub fn polytope(&self) -> &LatticePolytope {
        &self.polytope
    }

    /// The original (unscaled) PL function.
    pub fn function(&self) -> &PlConvex {
        &self.f
    }

    /// `D · f`, whose weights are integral.
    pub fn scaled_function(&self) -> &PlConvex {
        &self.scaled_f
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn denominator_q(&self) -> Q {
        Q::from_integer(self.denominator.clone())
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn dim(&self) -> usize {
        self.polytope.dim()
    }

    /// Period of the progression `k ∈ qℤ` on which lattice counts and weight
    /// sums are honest polynomials: every vertex of `P` and of every linearity
    /// cell of `f` becomes integral after dilation by `q`.
    pub fn period(&self) -> u64 {
        let q = self.polytope.denominator().lcm(&self.scaled_f.linearity_regions(&self.polytope).denominator());
        u64::try_from(q).expect("period overflows u64")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpectrum {
    pub k: u64,
    pub points: Vec<Vec<i64>>,
    /// `λ'_a = k·f(a/k)` for the scaled function.
    pub raw_weights: Vec<Q>,
    pub trace: Q,
    /// `λ_a = λ'_a − trace / N_k`.
    pub centered_weights: Vec<Q>,
}

impl WeightSpectrum {
    pub fn n_k(&self) -> usize {
        self.points.len()
    }
}

pub fn weight_spectrum(tc: &ToricTestConfig, k: u64) -> Result<WeightSpectrum> {
    if !tc.is_scaled() {
        return Err(Error::UnscaledConfig);
    }
    if k == 0 {
        return Err(Error::invalid("level k must be positive"));
    }
    let points = tc.polytope().lattice_points(k);
    if points.is_empty() {
        return Err(Error::invalid(format!("no lattice points at level {k}")));
    }
    let kq = Q::from_integer(k.into());
    let pieces: Vec<(QVec, Q)> =
        tc.scaled_function().pieces().iter().map(|p| (p.slope.clone(), &p.constant * &kq)).collect();
    let raw_weights: Vec<Q> = points
        .iter()
        .map(|a| pieces.iter().map(|(s, c)| dot_int(s, a) + c).max().expect("nonempty"))
        .collect();
    let trace: Q = raw_weights.iter().sum();
    let mean = &trace / Q::from_integer(points.len().into());
    let centered_weights = raw_weights.iter().map(|w| w - &mean).collect();
    Ok(WeightSpectrum { k, points, raw_weights, trace, centered_weights })
}

/// A rational basis of the torus directions `W ⊆ ℚⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubtorusDirections {
    dim: usize,
    basis: Vec<QVec>,
}

impl SubtorusDirections {
    pub fn new(dim: usize, basis: Vec<QVec>) -> Result<Self> {
        if basis.iter().any(|w| w.len() != dim) {
            return Err(Error::invalid("torus direction has the wrong dimension"));
        }
        if basis.len() > dim || linalg::rank(&basis) != basis.len() {
            return Err(Error::invalid("torus directions are not linearly independent"));
        }
        Ok(SubtorusDirections { dim, basis })
    }

    /// The maximal torus: the standard basis of `ℚⁿ`.
    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        SubtorusDirections { dim, basis }
    }

    pub fn none(dim: usize) -> Self {
        SubtorusDirections { dim, basis: Vec::new() }
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Whether `v` lies in the span of the basis.
    pub fn contains(&self, v: &[Q]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        linalg::rank(&rows) == self.basis.len()
    }
}

/// Coefficients (ascending degree) of the polynomial through the given points.
pub fn interpolate(xs: &[Q], ys: &[Q]) -> QVec {
    let n = xs.len();
    // Newton divided differences, then expand the Newton form.
    let mut dd = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
        }
    }
    let mut coeffs = vec![Q::zero(); n];
    for i in (0..n).rev() {
        // coeffs = coeffs·(x − xs[i]) + dd[i]
        let mut next = vec![Q::zero(); n];
        for d in 0..n {
            if coeffs[d].is_zero() {
                continue;
            }
            if d + 1 < n {
                next[d + 1] += &coeffs[d];
            }
            next[d] -= &coeffs[d] * &xs[i];
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    coeffs
}

pub fn eval_poly(coeffs: &[Q], x: &Q) -> Q {
    coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EhrhartFit {
    pub period: u64,
    /// `N_k` on `k ∈ qℤ`, ascending coefficients (degree `n`).
    pub n_poly: QVec,
    /// `w_k = ∑ λ'_a` on `k ∈ qℤ`, ascending coefficients (degree `n + 1`).
    pub w_poly: QVec,
    pub f0: Q,
    pub f1: Q,
}

/// Fits `N_k` and `w_k` on the progression `k = q, 2q, …, (n+3)q`, validates
/// at `(n+4)q` and expands `w_k / (k N_k) = F₀ + F₁/k + O(1/k²)`.
///
/// All quantities refer to the scaled function `D·f`.
pub fn ehrhart_fit(tc: &ToricTestConfig) -> Result<EhrhartFit> {
    if !tc.is_scaled() {
        return Err(Error::UnscaledConfig);
    }
    let n = tc.dim();
    let q = tc.period();
    let samples: Vec<(u64, Q, Q)> = (1..=n as u64 + 4)
        .into_par_iter()
        .map(|j| {
            let k = j * q;
            let s = weight_spectrum(tc, k)?;
            Ok((k, Q::from_integer(s.n_k().into()), s.trace))
        })
        .collect::<Result<_>>()?;
    let (fit, held_out) = samples.split_at(n + 3);
    let xs: QVec = fit.iter().map(|s| Q::from_integer(s.0.into())).collect();
    let mut n_poly = interpolate(&xs, &fit.iter().map(|s| s.1.clone()).collect::<Vec<_>>());
    let mut w_poly = interpolate(&xs, &fit.iter().map(|s| s.2.clone()).collect::<Vec<_>>());
    let (k_out, n_out, w_out) = &held_out[0];
    let kq = Q::from_integer((*k_out).into());
    if eval_poly(&n_poly, &kq) != *n_out {
        return Err(Error::FitMismatch { k: *k_out, detail: "lattice point count".into() });
    }
    if eval_poly(&w_poly, &kq) != *w_out {
        return Err(Error::FitMismatch { k: *k_out, detail: "weight sum".into() });
    }
    if n_poly[n + 1..].iter().any(|c| !c.is_zero()) || w_poly[n + 2..].iter().any(|c| !c.is_zero()) {
        return Err(Error::FitMismatch { k: *k_out, detail: "unexpected polynomial degree".into() });
    }
    n_poly.truncate(n + 1);
    w_poly.truncate(n + 2);
    let lead = n_poly[n].clone();
    let f0 = &w_poly[n + 1] / &lead;
    let f1 = (&w_poly[n] - &f0 * &n_poly[n - 1]) / &lead;
    Ok(EhrhartFit { period: q, n_poly, w_poly, f0, f1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedProjection {
    pub coefficients: QVec,
    pub projected: Vec<Q>,
    pub residual: Vec<Q>,
}

/// Killing-form orthogonal projection of the centered spectrum onto the
/// trace-free generators `G_i(a) = ⟨w_i, a⟩ − mean`.
pub fn quantized_projection(spec: &WeightSpectrum, w: &SubtorusDirections) -> Result<QuantizedProjection> {
    let d = w.rank();
    let nk = spec.n_k();
    if d == 0 {
        return Ok(QuantizedProjection {
            coefficients: Vec::new(),
            projected: vec![Q::zero(); nk],
            residual: spec.centered_weights.clone(),
        });
    }
    if nk < d + 1 {
        return Err(Error::DegenerateGram { context: format!("quantized projection at k = {} (N_k = {nk})", spec.k) });
    }
    let n = w.dim();
    // integer moment sums of the lattice points
    let mut s1 = vec![0i128; n];
    let mut s2 = vec![vec![0i128; n]; n];
    let mut lw = vec![Q::zero(); n];
    for (a, lam) in spec.points.iter().zip(&spec.raw_weights) {
        for r in 0..n {
            s1[r] += a[r] as i128;
            for s in r..n {
                s2[r][s] += a[r] as i128 * a[s] as i128;
            }
            if a[r] != 0 {
                lw[r] += lam * Q::from_integer(a[r].into());
            }
        }
    }
    let big = |x: i128| Q::from_integer(BigInt::from(x));
    let nkq = Q::from_integer(nk.into());
    let basis = w.basis();
    let sum_w: QVec = basis.iter().map(|wi| wi.iter().zip(&s1).map(|(c, &s)| c * big(s)).sum()).collect();
    let means: QVec = sum_w.iter().map(|s| s / &nkq).collect();
    let gram: Vec<QVec> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let mut acc = Q::zero();
                    for r in 0..n {
                        for s in 0..n {
                            let m = if r <= s { s2[r][s] } else { s2[s][r] };
                            acc += &basis[i][r] * &basis[j][s] * big(m);
                        }
                    }
                    acc - &sum_w[i] * &sum_w[j] / &nkq
                })
                .collect()
        })
        .collect();
    let trace_mean = &spec.trace / &nkq;
    let rhs: QVec = (0..d)
        .map(|i| {
            let lam_w: Q = basis[i].iter().zip(&lw).map(|(c, s)| c * s).sum();
            lam_w - &trace_mean * &sum_w[i]
        })
        .collect();
    let coefficients = linalg::solve(&gram, &rhs)
        .ok_or_else(|| Error::DegenerateGram { context: format!("quantized projection at k = {}", spec.k) })?;
    // projected(a) = ⟨∑ c_i w_i, a⟩ − ∑ c_i mean_i
    let direction: QVec = (0..n).map(|r| (0..d).map(|i| &coefficients[i] * &basis[i][r]).sum()).collect();
    let offset: Q = coefficients.iter().zip(&means).map(|(c, m)| c * m).sum();
    let projected: Vec<Q> = spec.points.iter().map(|a| dot_int(&direction, a) - &offset).collect();
    let residual = spec.centered_weights.iter().zip(&projected).map(|(l, p)| l - p).collect();
    Ok(QuantizedProjection { coefficients, projected, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMode {
    Signed,
    Absolute,
}

/// `(1 / (k^p N_k)) ∑_a v_a^p` (or `|v_a|^p`).
pub fn trace_moment(values: &[Q], k: u64, p: u32, mode: MomentMode) -> Q {
    assert!(p >= 1, "moment order must be at least 1");
    if values.is_empty() {
        return Q::zero();
    }
    let sum: Q = values
        .par_iter()
        .map(|v| {
            let x = pow(v, p);
            match mode {
                MomentMode::Absolute => x.abs(),
                MomentMode::Signed => x,
            }
        })
        .reduce(Q::zero, |a, b| a + b);
    sum / (pow(&Q::from_integer(k.into()), p) * Q::from_integer(values.len().into()))
}

/// Projection coefficients at each level, in the normalization of the
/// continuous projection of the unscaled `f`.
///
/// Both the spectrum and the generators grow linearly in `k`, so the
/// coefficients need no rescaling apart from undoing the base change `D`.
pub fn limit_projection_coefficients(
    tc: &ToricTestConfig,
    w: &SubtorusDirections,
    k_list: &[u64],
) -> Result<Vec<QVec>> {
    let d = tc.denominator_q();
    k_list
        .par_iter()
        .map(|&k| {
            let spec = weight_spectrum(tc, k)?;
            let proj = quantized_projection(&spec, w)?;
            Ok(proj.coefficients.iter().map(|c| c / &d).collect())
        })
        .collect()
}
