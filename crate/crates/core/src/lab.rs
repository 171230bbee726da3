//! Experiment harness: moment convergence, product detection, norm
//! equivalence, relative stability scans and Monte-Carlo cross-checks.

use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::LatticePolytope;
use crate::invariants::{self, NormReport};
use crate::plfun::{AffinePiece, PlConvex, PlDiff};
use crate::quantize::{quantized_projection, trace_moment, weight_spectrum, MomentMode, SubtorusDirections, ToricTestConfig};
use crate::rational::{fmt_real, pow, to_f64, QVec, Q};

/// Default cap on the number of lattice points of the largest level.
pub const DEFAULT_POINT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// Moments of the projected spectrum `P_k(A_k)`.
    Projected,
    /// Moments of the full trace-free spectrum `A_k` (no projection).
    Raw,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub p: u32,
    pub mode: SpectrumMode,
    pub k_list: Vec<u64>,
    pub quantized_moments: Vec<Q>,
    pub continuous_target: Q,
    pub residuals: Vec<f64>,
    /// Slope of `log residual` against `log k` on the second half of the sequence.
    pub fitted_rate: Option<f64>,
    /// Residuals failed to be non-increasing (quasi-period effects).
    pub oscillatory: bool,
    /// Richardson extrapolation of the last two levels assuming a `1/k` correction.
    pub extrapolated_limit: Option<Q>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,m_k,target,residual\n");
        for ((k, m), r) in self.k_list.iter().zip(&self.quantized_moments).zip(&self.residuals) {
            let _ = writeln!(out, "{k},{m},{},{}", self.continuous_target, fmt_real(*r));
        }
        out
    }
}

/// Levels `q, 2q, 4q, …` whose largest dilate stays within the point budget.
pub fn default_k_list(tc: &ToricTestConfig, budget: u64) -> Vec<u64> {
    let q = tc.period();
    let v = to_f64(&tc.polytope().volume());
    let n = tc.dim() as i32;
    let estimate = |k: u64| v * (k as f64 + 2.0).powi(n);
    let mut ks = vec![q];
    let mut k = q;
    while estimate(2 * k) <= budget as f64 {
        k *= 2;
        ks.push(k);
    }
    ks
}

/// Least-squares slope of `log y` against `log x`.
fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, &y)| y > 0.0).map(|(&x, &y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Richardson step eliminating a `c/k` term from two levels.
pub fn richardson(k1: u64, m1: &Q, k2: u64, m2: &Q) -> Q {
    let (a, b) = (Q::from_integer(k1.into()), Q::from_integer(k2.into()));
    (&b * m2 - &a * m1) / (b - a)
}

/// Quantized moments `Tr P_k(A_k)^p / (k^p N_k)` (or of `A_k`) against the
/// continuous moment `(1/V) ∫ P(f − f̄)^p` (or of `f − f̄`).
///
/// Moments are reported for the unscaled function: the scaled spectrum is
/// divided by `D^p`.
pub fn moment_convergence(
    tc: &ToricTestConfig,
    w: &SubtorusDirections,
    p: u32,
    k_list: &[u64],
    mode: SpectrumMode,
) -> Result<ConvergenceReport> {
    if p == 0 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    if k_list.is_empty() || k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] == 0 {
        return Err(Error::invalid("k list must be positive and strictly increasing"));
    }
    let dp = pow(&tc.denominator_q(), p);
    let quantized_moments: Vec<Q> = k_list
        .par_iter()
        .map(|&k| {
            let spec = weight_spectrum(tc, k)?;
            let values = match mode {
                SpectrumMode::Raw => spec.centered_weights,
                SpectrumMode::Projected => quantized_projection(&spec, w)?.projected,
            };
            Ok(trace_moment(&values, k, p, MomentMode::Signed) / &dp)
        })
        .collect::<Result<_>>()?;
    let poly = tc.polytope();
    let continuous_target = match mode {
        SpectrumMode::Raw => invariants::centered_moment(tc.function(), poly, p),
        SpectrumMode::Projected => {
            let proj = invariants::continuous_projection(tc.function(), poly, w)?;
            invariants::projected_moment(&proj, poly, p)
        }
    };
    let residuals: Vec<f64> =
        quantized_moments.iter().map(|m| to_f64(&(m - &continuous_target).abs())).collect();
    let oscillatory = residuals.windows(2).any(|w| w[1] > w[0]);
    let half = k_list.len() / 2;
    let xs: Vec<f64> = k_list[half..].iter().map(|&k| k as f64).collect();
    let fitted_rate = if oscillatory { None } else { log_log_slope(&xs, &residuals[half..]) };
    let extrapolated_limit = (k_list.len() >= 2).then(|| {
        let j = k_list.len() - 1;
        richardson(k_list[j - 1], &quantized_moments[j - 1], k_list[j], &quantized_moments[j])
    });
    Ok(ConvergenceReport {
        p,
        mode,
        k_list: k_list.to_vec(),
        quantized_moments,
        continuous_target,
        residuals,
        fitted_rate,
        oscillatory,
        extrapolated_limit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProductWitness {
    /// Rational coordinates in the basis of `W` of the one-parameter subgroup.
    Direction(QVec),
    /// `f − f̄ − P(f − f̄)` and its exact mean square.
    Residual { function: PlConvex, exact_inner: Q },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductDetection {
    pub is_product: bool,
    pub witness: ProductWitness,
}

/// Product iff the reduced `L²` inner integral vanishes exactly.
pub fn product_detector(tc: &ToricTestConfig, w: &SubtorusDirections) -> Result<ProductDetection> {
    let poly = tc.polytope();
    let f = tc.function();
    let proj = invariants::continuous_projection(f, poly, w)?;
    let inner = invariants::reduced_norm(tc, w, 2.0)?.exact_inner.expect("exact at p = 2");
    if inner.is_zero() {
        return Ok(ProductDetection { is_product: true, witness: ProductWitness::Direction(proj.coefficients) });
    }
    let mean = crate::plfun::mean(f, poly);
    let residual = f.shift(&proj.projected.add(&AffinePiece::constant(tc.dim(), mean)).scale(&Q::from_integer((-1).into())));
    Ok(ProductDetection {
        is_product: false,
        witness: ProductWitness::Residual { function: residual, exact_inner: inner },
    })
}

#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub id: String,
    pub reduced: NormReport,
    pub infimum: NormReport,
    pub minimizer: AffinePiece,
    /// `infimum / reduced`, when the reduced norm is nonzero.
    pub ratio: Option<f64>,
    /// `infimum ≤ reduced + tol`.
    pub sandwich_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ProbeTable {
    pub p: f64,
    pub rows: Vec<ProbeRow>,
    /// Empirical equivalence constant: the smallest ratio over nonzero rows.
    pub empirical_delta: Option<f64>,
}

pub fn norm_equivalence_probe(
    corpus: &[(String, ToricTestConfig)],
    w: &SubtorusDirections,
    p: f64,
    tol: f64,
) -> Result<ProbeTable> {
    let rows: Vec<ProbeRow> = corpus
        .par_iter()
        .map(|(id, tc)| {
            let reduced = invariants::reduced_norm(tc, w, p)?;
            let (infimum, minimizer) = invariants::infimum_norm(tc, w, p, tol)?;
            let ratio = (reduced.value > 0.0 && !reduced.is_exact_zero()).then(|| infimum.value / reduced.value);
            let sandwich_ok = infimum.value <= reduced.value + tol;
            Ok(ProbeRow { id: id.clone(), reduced, infimum, minimizer, ratio, sandwich_ok })
        })
        .collect::<Result<_>>()?;
    let empirical_delta = rows.iter().filter_map(|r| r.ratio).reduce(f64::min);
    Ok(ProbeTable { p, rows, empirical_delta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub id: String,
    pub df: Q,
    pub df_relative: Q,
    /// `(1/V) ∫ |f − f̄ − P(f − f̄)|`, which is the reduced `p = 1` norm itself.
    pub reduced_norm1: Q,
    pub ratio: Option<Q>,
    pub product: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSummary {
    pub records: Vec<ScanRecord>,
    /// `min DF_T / ‖·‖_{T,1}` over non-product members.
    pub empirical_delta: Option<Q>,
    /// Members with `DF_T < 0`.
    pub destabilizing: Vec<String>,
}

impl ScanSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,DF,DF_T,norm1,ratio,product\n");
        for r in &self.records {
            let ratio = r.ratio.as_ref().map(ToString::to_string).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{},{}", r.id, r.df, r.df_relative, r.reduced_norm1, ratio, r.product);
        }
        out
    }
}

pub fn stability_scan(corpus: &[(String, ToricTestConfig)], w: &SubtorusDirections) -> Result<ScanSummary> {
    let records: Vec<ScanRecord> = corpus
        .par_iter()
        .map(|(id, tc)| {
            let df = invariants::df(tc)?;
            let df_relative = invariants::df_relative(tc, w)?;
            let reduced_norm1 = invariants::reduced_norm(tc, w, 1.0)?.exact_inner.expect("exact at p = 1");
            let product = product_detector(tc, w)?.is_product;
            let ratio = (!reduced_norm1.is_zero()).then(|| &df_relative / &reduced_norm1);
            Ok(ScanRecord { id: id.clone(), df, df_relative, reduced_norm1, ratio, product })
        })
        .collect::<Result<_>>()?;
    let empirical_delta = records.iter().filter(|r| !r.product).filter_map(|r| r.ratio.clone()).min();
    let destabilizing = records.iter().filter(|r| r.df_relative.is_negative()).map(|r| r.id.clone()).collect();
    Ok(ScanSummary { records, empirical_delta, destabilizing })
}

/// Rejection-sampled Monte-Carlo estimate of `∫_P |g|^p dx` with its standard error.
pub fn mc_cross_check(g: &PlDiff, poly: &LatticePolytope, p: f64, samples: usize, seed: u64) -> (f64, f64) {
    let n = poly.dim();
    let verts: Vec<Vec<f64>> = poly.vertices().iter().map(|v| v.iter().map(to_f64).collect()).collect();
    let lo: Vec<f64> = (0..n).map(|j| verts.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min)).collect();
    let hi: Vec<f64> = (0..n).map(|j| verts.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let facets: Vec<(Vec<f64>, f64)> =
        poly.facets().iter().map(|f| (f.normal.iter().map(|&u| u as f64).collect(), to_f64(&f.offset))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0f64, 0.0f64);
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        for j in 0..n {
            x[j] = rng.gen_range(lo[j]..hi[j]);
        }
        let inside = facets.iter().all(|(u, c)| u.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() <= *c);
        if inside {
            let v = g.evaluate_f64(&x).abs().powf(p);
            sum += v;
            sum2 += v * v;
        }
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0);
    (box_vol * mean, box_vol * (var / m).sqrt())
}
