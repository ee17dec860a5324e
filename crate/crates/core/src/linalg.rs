//! Small dense kernels for the D×D systems inside the sampler.
//!
//! Latent dimensions are tens, not thousands, so plain loops over the lower
//! triangle are enough and keep the code generic over [`Real`].

// Triangular solves index two arrays with one counter.
#![allow(clippy::needless_range_loop)]

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative diagonal jitter added once when a factorization fails.
pub const SPD_JITTER: f64 = 1e-6;

/// Lower-triangular Cholesky factor `L` with `A = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Array2<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factor a symmetric matrix. Only the lower triangle of `a` is read.
    /// Returns `None` when `a` is not positive definite.
    pub fn new(a: &Array2<T>) -> Option<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return None;
        }
        let mut l = Array2::<T>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]];
            for p in 0..j {
                d -= l[[j, p]] * l[[j, p]];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let ljj = d.sqrt();
            l[[j, j]] = ljj;
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for p in 0..j {
                    s -= l[[i, p]] * l[[j, p]];
                }
                l[[i, j]] = s / ljj;
            }
        }
        Some(Self { l })
    }

    pub fn factor(&self) -> &Array2<T> {
        &self.l
    }

    pub fn into_factor(self) -> Array2<T> {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// In place `L x = b`.
    pub fn solve_lower_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = b[i];
            for p in 0..i {
                s -= self.l[[i, p]] * b[p];
            }
            b[i] = s / self.l[[i, i]];
        }
    }

    /// In place `Lᵀ x = b`.
    pub fn solve_upper_in_place(&self, b: &mut [T]) {
        let n = self.dim();
        for i in (0..n).rev() {
            let mut s = b[i];
            for p in (i + 1)..n {
                s -= self.l[[p, i]] * b[p];
            }
            b[i] = s / self.l[[i, i]];
        }
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &Array1<T>) -> Array1<T> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        Array1::from(x)
    }

    /// `A⁻¹`, symmetrized.
    pub fn inverse(&self) -> Array2<T> {
        let n = self.dim();
        let mut inv = Array2::<T>::zeros((n, n));
        let mut col = vec![T::zero(); n];
        for c in 0..n {
            col.iter_mut().for_each(|x| *x = T::zero());
            col[c] = T::one();
            self.solve_lower_in_place(&mut col);
            self.solve_upper_in_place(&mut col);
            for r in 0..n {
                inv[[r, c]] = col[r];
            }
        }
        symmetrize(&mut inv);
        inv
    }
}

/// Factor `a`, retrying once with `SPD_JITTER·(trace/D)·I` added to the
/// diagonal. A second failure is reported as [`Error::NotSpd`].
pub fn cholesky_with_jitter<T: Real>(a: &Array2<T>, what: &'static str) -> Result<Cholesky<T>> {
    if let Some(c) = Cholesky::new(a) {
        return Ok(c);
    }
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::NotSpd(what));
    }
    let trace: T = (0..n).map(|i| a[[i, i]]).sum();
    let eps = T::lit(SPD_JITTER) * trace / T::from_usize_lossy(n);
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::NotSpd(what));
    }
    let mut jittered = a.clone();
    for i in 0..n {
        jittered[[i, i]] += eps;
    }
    log::debug!("{what}: cholesky failed, retrying with jitter {eps}");
    Cholesky::new(&jittered).ok_or(Error::NotSpd(what))
}

pub fn is_spd<T: Real>(a: &Array2<T>) -> bool {
    Cholesky::new(a).is_some()
}

/// Replace `a` with `(a + aᵀ)/2`.
pub fn symmetrize<T: Real>(a: &mut Array2<T>) {
    let n = a.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in 0..i {
            let v = (a[[i, j]] + a[[j, i]]) * half;
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
}

/// Dense `a · b` for small matrices.
pub fn matmul<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (n, m) = (a.nrows(), b.ncols());
    let inner = a.ncols();
    assert_eq!(inner, b.nrows(), "matmul shape mismatch");
    let mut out = Array2::<T>::zeros((n, m));
    for i in 0..n {
        for p in 0..inner {
            let aip = a[[i, p]];
            if aip == T::zero() {
                continue;
            }
            for j in 0..m {
                out[[i, j]] += aip * b[[p, j]];
            }
        }
    }
    out
}

pub fn matvec<T: Real>(a: &Array2<T>, x: &Array1<T>) -> Array1<T> {
    let n = a.nrows();
    Array1::from_iter((0..n).map(|i| (0..a.ncols()).map(|j| a[[i, j]] * x[j]).sum()))
}
