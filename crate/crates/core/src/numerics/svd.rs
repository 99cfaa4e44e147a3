//! Full singular value decomposition by one-sided (Hestenes) Jacobi rotations.
//!
//! Columns of `A·V` are orthogonalised pairwise until every pair is
//! numerically orthogonal; the column norms are then the singular values and
//! the accumulated rotations form the right-singular basis. Null-space columns
//! of `V` come out of the same process, so the right factor is always a full
//! `n×n` unitary even for wide inputs.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{invalid, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// `m = left · diag(singular_values) · right^H`.
#[derive(Debug, Clone)]
pub struct SvdResult<T: Real> {
    /// `m×m` unitary.
    pub left_vectors: ComplexMatrix<T>,
    /// `min(m, n)` values, descending.
    pub singular_values: Vec<T>,
    /// `n×n` unitary.
    pub right_vectors: ComplexMatrix<T>,
}

impl<T: Real> SvdResult<T> {
    /// Number of singular values above `tol · σ_max`.
    pub fn rank(&self, tol: T) -> usize {
        let top = self.singular_values.first().copied().unwrap_or_else(T::zero);
        if top <= T::zero() {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > tol * top).count()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        let (m, n) = (self.left_vectors.rows(), self.right_vectors.rows());
        let k = self.singular_values.len();
        ComplexMatrix::from_fn(m, n, |i, j| {
            (0..k)
                .map(|l| {
                    self.left_vectors[(i, l)]
                        * self.singular_values[l]
                        * self.right_vectors[(j, l)].conj()
                })
                .sum()
        })
    }
}

fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Applies the unitary 2×2 transform that zeroes `a_p^H a_q` to a column pair.
fn rotate<T: Real>(
    p: &mut [Complex<T>],
    q: &mut [Complex<T>],
    phase: Complex<T>,
    c: T,
    s: T,
) {
    for (x, y) in p.iter_mut().zip(q.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

pub fn svd<T: Real>(m: &ComplexMatrix<T>) -> Result<SvdResult<T>> {
    if !m.is_finite() {
        return invalid("svd input contains non-finite entries");
    }
    let (rows, cols) = m.shape();
    let mut work: Vec<Vec<Complex<T>>> = (0..cols).map(|j| m.column(j)).collect();
    let mut right: Vec<Vec<Complex<T>>> = (0..cols)
        .map(|j| {
            let mut e = vec![Complex::zero(); cols];
            e[j] = Complex::new(T::one(), T::zero());
            e
        })
        .collect();

    let tol = T::epsilon() * T::count(rows.max(cols));
    // Columns below this energy are numerically zero; rotating them only
    // amplifies rounding noise.
    let negligible = {
        let e = T::epsilon() * m.frobenius_norm();
        e * e
    };
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = norm_sqr(&work[p]);
                let beta = norm_sqr(&work[q]);
                let gamma = dot(&work[p], &work[q]);
                let g = gamma.norm();
                if g.is_zero() || g <= tol * (alpha * beta).sqrt() || alpha.max(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let phase = phase / phase.norm();
                let zeta = (beta - alpha) / (g + g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (head, tail) = work.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], phase, c, s);
                let (head, tail) = right.split_at_mut(q);
                rotate(&mut head[p], &mut tail[0], phase, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<T> = work.iter().map(|w| norm_sqr(w).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    // Stable: equal singular values keep factorization order.
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let k = rows.min(cols);
    let singular_values: Vec<T> = order[..k].iter().map(|&j| norms[j]).collect();
    let right_vectors = ComplexMatrix::from_fn(cols, cols, |i, j| right[order[j]][i]);

    let top = singular_values.first().copied().unwrap_or_else(T::zero);
    let floor = top * T::epsilon() * T::count(rows.max(cols));
    let mut left_cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(rows);
    for (l, &j) in order[..k].iter().enumerate() {
        let s = singular_values[l];
        if s > floor && s > T::zero() {
            left_cols.push(work[j].iter().map(|z| *z / s).collect());
        } else {
            break;
        }
    }
    complete_orthonormal(&mut left_cols, rows);
    let left_vectors = ComplexMatrix::from_fn(rows, rows, |i, j| left_cols[j][i]);

    Ok(SvdResult {
        left_vectors,
        singular_values,
        right_vectors,
    })
}

/// Extends an orthonormal set of `dim`-vectors to a full basis using the
/// standard basis and two rounds of Gram–Schmidt.
fn complete_orthonormal<T: Real>(basis: &mut Vec<Vec<Complex<T>>>, dim: usize) {
    let mut e = 0;
    while basis.len() < dim && e < dim {
        let mut cand = vec![Complex::zero(); dim];
        cand[e] = Complex::new(T::one(), T::zero());
        e += 1;
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = dot(b, &cand);
                for (c, &bi) in cand.iter_mut().zip(b) {
                    *c -= bi * proj;
                }
            }
        }
        let n = norm_sqr(&cand).sqrt();
        if n > T::lit(0.5) / T::count(dim).sqrt() {
            basis.push(cand.into_iter().map(|z| z / n).collect());
        }
    }
}
