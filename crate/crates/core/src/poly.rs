//! Sparse multivariate polynomials with exact integration over simplices.
//!
//! Integration uses barycentric substitution: if `t` is uniformly distributed on
//! the standard `m`-simplex (Dirichlet(1,…,1) on `m + 1` weights) then
//! `E[t^β] = m! ∏ β_i! / (m + |β|)!`, so the mean of any polynomial over a simplex
//! is a finite exact sum.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::{QVec, Q};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `⟨slope, x⟩ + constant`.
    pub fn affine(slope: &[Q], constant: &Q) -> Self {
        let n = slope.len();
        let mut p = Poly::constant(n, constant.clone());
        for (j, s) in slope.iter().enumerate() {
            let mut e = vec![0; n];
            e[j] = 1;
            p.add_term(e, s.clone());
        }
        p
    }

    pub fn monomial(exponents: &[u32]) -> Self {
        let mut p = Poly::zero(exponents.len());
        p.add_term(exponents.to_vec(), Q::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars.max(other.nvars));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, p: u32) -> Poly {
        let mut out = Poly::constant(self.nvars, Q::one());
        for _ in 0..p {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = c.clone();
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        v *= num_traits::pow(xi.clone(), k as usize);
                    }
                }
                v
            })
            .sum()
    }

    /// Mean value of the polynomial over the simplex with the given vertices.
    ///
    /// The vertices may span a simplex of any dimension `m ≤ nvars`; the mean is
    /// taken with respect to its own `m`-dimensional Lebesgue measure.
    pub fn simplex_mean(&self, vertices: &[QVec]) -> Q {
        let nb = vertices.len();
        let m = nb - 1;
        // coordinate j as a linear form in the barycentric weights
        let coord: Vec<Poly> = (0..self.nvars)
            .map(|j| {
                let mut p = Poly::zero(nb);
                for (i, v) in vertices.iter().enumerate() {
                    let mut e = vec![0; nb];
                    e[i] = 1;
                    p.add_term(e, v[j].clone());
                }
                p
            })
            .collect();
        let mut total = Q::zero();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(nb, c.clone());
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&coord[j].pow(k));
                }
            }
            for (beta, coef) in &t.terms {
                total += coef * dirichlet_moment(m, beta);
            }
        }
        total
    }
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `E[∏ t_i^{β_i}]` for `t` uniform on the standard `m`-simplex.
fn dirichlet_moment(m: usize, beta: &[u32]) -> Q {
    let total: u32 = beta.iter().sum();
    let num = beta.iter().fold(factorial(m as u32), |acc, &b| acc * factorial(b));
    Q::new(num, factorial(m as u32 + total))
}
