//! Wishart and precision-parameterized multivariate normal draws.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, symmetrize, Cholesky};
use crate::scalar::Real;

/// Draw from `Wishart(scale, dof)` with the Bartlett decomposition.
///
/// `A` is lower triangular with `A[i][i] = sqrt(χ²(dof − i))` and standard
/// normal entries below the diagonal; the draw is `L·A·Aᵀ·Lᵀ` with
/// `L = chol(scale)`.
pub fn sample_wishart<T: Real, R: Rng + ?Sized>(
    scale: &Array2<T>,
    dof: T,
    rng: &mut R,
) -> Result<Array2<T>> {
    let d = scale.nrows();
    if d == 0 || scale.ncols() != d {
        return Err(Error::NotSpd("scale matrix"));
    }
    if !(dof >= T::from_usize_lossy(d)) {
        return Err(Error::invalid(format!(
            "wishart degrees of freedom {dof} below dimension {d}"
        )));
    }
    let chol = cholesky_with_jitter(scale, "scale matrix")?;
    Ok(wishart_from_factor(chol.factor(), dof, rng))
}

pub(crate) fn wishart_from_factor<T: Real, R: Rng + ?Sized>(
    l: &Array2<T>,
    dof: T,
    rng: &mut R,
) -> Array2<T> {
    let d = l.nrows();
    let mut a = Array2::<T>::zeros((d, d));
    for i in 0..d {
        a[[i, i]] = T::chi_squared(dof - T::from_usize_lossy(i), rng).sqrt();
        for j in 0..i {
            a[[i, j]] = T::std_normal(rng);
        }
    }
    // B = L·A, both lower triangular.
    let mut b = Array2::<T>::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut s = T::zero();
            for p in j..=i {
                s += l[[i, p]] * a[[p, j]];
            }
            b[[i, j]] = s;
        }
    }
    let mut out = Array2::<T>::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut s = T::zero();
            for p in 0..=j {
                s += b[[i, p]] * b[[j, p]];
            }
            out[[i, j]] = s;
            out[[j, i]] = s;
        }
    }
    out
}

/// Draw from `Normal(mean, precision⁻¹)`.
///
/// Uses `precision = L·Lᵀ` and returns `mean + L⁻ᵀ·z`; the inverse is never
/// formed.
pub fn sample_mvn<T: Real, R: Rng + ?Sized>(
    mean: &Array1<T>,
    precision: &Array2<T>,
    rng: &mut R,
) -> Result<Array1<T>> {
    if precision.nrows() != mean.len() {
        return Err(Error::invalid("mean and precision dimensions differ"));
    }
    let chol = cholesky_with_jitter(precision, "precision")?;
    let mut z: Vec<T> = (0..mean.len()).map(|_| T::std_normal(rng)).collect();
    chol.solve_upper_in_place(&mut z);
    Ok(Array1::from_iter(mean.iter().zip(z).map(|(&m, dz)| m + dz)))
}

/// Draw from `Normal(P⁻¹·h, P⁻¹)` given `chol(P)` and the canonical vector
/// `h`.
pub(crate) fn sample_mvn_canonical<T: Real, R: Rng + ?Sized>(
    chol: &Cholesky<T>,
    h: &[T],
    rng: &mut R,
) -> Vec<T> {
    let mut mean = h.to_vec();
    chol.solve_lower_in_place(&mut mean);
    chol.solve_upper_in_place(&mut mean);
    let mut z: Vec<T> = (0..mean.len()).map(|_| T::std_normal(rng)).collect();
    chol.solve_upper_in_place(&mut z);
    for (m, dz) in mean.iter_mut().zip(z) {
        *m += dz;
    }
    mean
}

/// Scale a matrix and keep it exactly symmetric.
pub(crate) fn scaled<T: Real>(a: &Array2<T>, s: T) -> Array2<T> {
    let mut out = a.mapv(|x| x * s);
    symmetrize(&mut out);
    out
}
