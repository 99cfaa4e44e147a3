//! Hermitian positive-definite factorization, log-determinants and solves.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::scalar::Real;

/// Lower-triangular `L` with `A = L·L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky<T: Real> {
    l: ComplexMatrix<T>,
    /// Whether diagonal loading was needed to factorize.
    pub regularized: bool,
}

impl<T: Real> Cholesky<T> {
    /// Plain factorization of a Hermitian matrix; no symmetrization or loading.
    pub fn factor_exact(a: &ComplexMatrix<T>) -> Result<Self> {
        let n = square_dim(a)?;
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self {
            l,
            regularized: false,
        })
    }

    /// Factorization under the numerical-floor policy: the input is
    /// symmetrized, and if that fails once, `1e-15·tr(A)/n` is added to the
    /// diagonal before a single retry.
    pub fn factor(a: &ComplexMatrix<T>) -> Result<Self> {
        let n = square_dim(a)?;
        let mut h = a.hermitian_part();
        match Self::factor_exact(&h) {
            Ok(c) => Ok(c),
            Err(Error::NotPositiveDefinite) => {
                let load = T::lit(1e-15) * h.trace().re.abs() / T::count(n);
                h.add_diagonal(load);
                let mut c = Self::factor_exact(&h)?;
                log::warn!("log-det factorization needed diagonal loading {load:e}");
                c.regularized = true;
                Ok(c)
            }
            Err(e) => Err(e),
        }
    }

    pub fn lower(&self) -> &ComplexMatrix<T> {
        &self.l
    }

    /// Natural log of the determinant.
    pub fn ln_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.l.rows()).map(|i| two * self.l[(i, i)].re.ln()).sum()
    }

    /// Solves `L·X = B`.
    pub fn forward(&self, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let n = self.l.rows();
        assert_eq!(b.rows(), n);
        let mut x = b.clone();
        for c in 0..b.cols() {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
        }
        x
    }

    /// Solves `A·X = B`.
    pub fn solve(&self, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let n = self.l.rows();
        let mut x = self.forward(b);
        for c in 0..b.cols() {
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= self.l[(k, i)].conj() * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
        }
        x
    }
}

fn square_dim<T: Real>(a: &ComplexMatrix<T>) -> Result<usize> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch {
            op: "hermitian factorization",
            detail: format!("{}x{} is not square", a.rows(), a.cols()),
        });
    }
    Ok(a.rows())
}

/// Base-2 log-determinant of a Hermitian positive-definite matrix.
#[derive(Debug, Clone, Copy)]
pub struct LogDet<T> {
    pub log2: T,
    pub regularized: bool,
}

pub fn log2_det_hpd<T: Real>(a: &ComplexMatrix<T>) -> Result<LogDet<T>> {
    let c = Cholesky::factor(a)?;
    Ok(LogDet {
        log2: c.ln_det() / T::LN_2(),
        regularized: c.regularized,
    })
}

/// Solves `A·X = B` for Hermitian positive-definite `A`.
pub fn solve_hpd<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, bool)> {
    let c = Cholesky::factor(a)?;
    if b.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            op: "solve_hpd",
            detail: format!("{} rows vs {}", b.rows(), a.rows()),
        });
    }
    Ok((c.solve(b), c.regularized))
}

/// `true` when every entry of `a - a^H` is within `tol` of zero.
pub fn is_hermitian<T: Real>(a: &ComplexMatrix<T>, tol: T) -> bool {
    a.rows() == a.cols()
        && (0..a.rows()).all(|i| (0..a.cols()).all(|j| (a[(i, j)] - a[(j, i)].conj()).norm() <= tol))
}
