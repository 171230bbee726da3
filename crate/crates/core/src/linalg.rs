//! Dense exact linear algebra over the rationals (desk-scale sizes only).

use num_traits::{One, Zero};

use crate::rational::{QVec, Q};

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [QVec]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[QVec]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of the right null space `{x : M x = 0}` for a matrix with `cols` columns.
pub fn nullspace(rows: &[QVec], cols: usize) -> Vec<QVec> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `A x = b`; `None` when `A` is singular.
pub fn solve(a: &[QVec], b: &[Q]) -> Option<QVec> {
    let n = a.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut m: Vec<QVec> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n].clone()).collect())
}

pub fn det(a: &[QVec]) -> Q {
    let n = a.len();
    let mut m = a.to_vec();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            let (top, bottom) = m.split_at_mut(i);
            for (x, y) in bottom[0][c..].iter_mut().zip(&top[c][c..]) {
                *x -= &f * y;
            }
        }
    }
    d
}

/// Dimension of the affine hull of `points`.
pub fn affine_dim(points: &[&QVec]) -> usize {
    let Some(first) = points.first() else {
        return 0;
    };
    let diffs: Vec<QVec> = points[1..]
        .iter()
        .map(|p| p.iter().zip(first.iter()).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf, qvec};

    #[test]
    fn solves_and_detects_singularity() {
        let a = vec![qvec(&[2, 1]), qvec(&[1, 3])];
        let x = solve(&a, &[q(3), q(5)]).unwrap();
        assert_eq!(x, vec![qf(4, 5), qf(7, 5)]);
        let s = vec![qvec(&[1, 2]), qvec(&[2, 4])];
        assert!(solve(&s, &[q(1), q(2)]).is_none());
    }

    #[test]
    fn determinant_and_rank() {
        let a = vec![qvec(&[0, 1, 2]), qvec(&[1, 0, 3]), qvec(&[4, -3, 8])];
        assert_eq!(det(&a), q(-2));
        assert_eq!(rank(&[qvec(&[1, 1]), qvec(&[2, 2])]), 1);
    }

    #[test]
    fn nullspace_of_row() {
        let ns = nullspace(&[qvec(&[1, -1, 0])], 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert_eq!(&v[0] - &v[1], q(0));
        }
    }
}
