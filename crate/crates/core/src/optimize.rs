//! Derivative-free descent for small convex problems.
//!
//! Cyclic line searches along the coordinate axes plus the last pattern move
//! (`x_new − x_old`), each a bracketed golden-section search. Convex but
//! nonsmooth objectives (`∫|g|`) can stall axis searches at a kink, so a sweep
//! that stops improving is retried along a batch of seeded random directions
//! before the search is declared converged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const RANDOM_DIRECTIONS: usize = 24;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

struct Counter<F> {
    f: F,
    evals: usize,
    cap: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.evals += 1;
        if self.evals > self.cap {
            return Err(Error::NonConvergence { context: "infimum norm descent".into(), iterations: self.cap });
        }
        Ok((self.f)(x))
    }
}

fn along(x: &[f64], dir: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(dir).map(|(a, d)| a + s * d).collect()
}

/// Minimizes along `x + s·dir`; returns the best step and value (step 0 if no improvement).
fn line_search<F: FnMut(&[f64]) -> f64>(
    c: &mut Counter<F>,
    x: &[f64],
    fx: f64,
    dir: &[f64],
    h: f64,
) -> Result<(f64, f64)> {
    let phi = |s: f64, c: &mut Counter<F>| c.eval(&along(x, dir, s));
    let fp = phi(h, c)?;
    let fm = phi(-h, c)?;
    let (mut lo, mut hi);
    if fp < fx || fm < fx {
        let sign = if fp <= fm { 1.0 } else { -1.0 };
        let (mut prev, mut cur, mut fcur): (f64, f64, f64) = (0.0, sign * h, fp.min(fm));
        let mut step = h;
        loop {
            step /= INV_PHI;
            let next = cur + sign * step;
            let fnext = phi(next, c)?;
            if fnext >= fcur {
                lo = prev.min(next);
                hi = prev.max(next);
                break;
            }
            prev = cur;
            cur = next;
            fcur = fnext;
            if !cur.is_finite() || step > 1e12 {
                return Err(Error::NonConvergence { context: "line search bracketing".into(), iterations: c.evals });
            }
        }
    } else {
        lo = -h;
        hi = h;
    }
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = phi(a, c)?;
    let mut fb = phi(b, c)?;
    while hi - lo > 1e-12 * (1.0 + a.abs()) {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = phi(a, c)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = phi(b, c)?;
        }
    }
    let (s, fs) = if fa <= fb { (a, fa) } else { (b, fb) };
    Ok(if fs < fx { (s, fs) } else { (0.0, fx) })
}

/// Minimizes a convex `f` from `x0` until a full sweep improves by less than `tol`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], tol: f64, max_evals: usize) -> Result<Minimum> {
    let mut c = Counter { f, evals: 0, cap: max_evals };
    let mut x = x0.to_vec();
    let mut fx = c.eval(&x)?;
    let d = x.len();
    if d == 0 {
        return Ok(Minimum { x, value: fx, evaluations: c.evals });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b_7374_6162);
    loop {
        let start = x.clone();
        let f_start = fx;
        for i in 0..d {
            let mut dir = vec![0.0; d];
            dir[i] = 1.0;
            let h = 0.1 * (1.0 + x[i].abs());
            let (s, fs) = line_search(&mut c, &x, fx, &dir, h)?;
            x = along(&x, &dir, s);
            fx = fs;
        }
        let pattern: Vec<f64> = x.iter().zip(&start).map(|(a, b)| a - b).collect();
        let len = pattern.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d > 1 && len > 0.0 {
            let (s, fs) = line_search(&mut c, &x, fx, &pattern, 0.5)?;
            x = along(&x, &pattern, s);
            fx = fs;
        }
        if f_start - fx >= tol {
            continue;
        }
        if d > 1 {
            let f_axes = fx;
            for _ in 0..RANDOM_DIRECTIONS {
                let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (s, fs) = line_search(&mut c, &x, fx, &dir, 0.1)?;
                x = along(&x, &dir, s);
                fx = fs;
            }
            if f_axes - fx >= tol {
                continue;
            }
        }
        return Ok(Minimum { x, value: fx, evaluations: c.evals });
    }
}
