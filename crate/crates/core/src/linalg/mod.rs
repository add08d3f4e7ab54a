//! Dense complex linear algebra used by the spectral and dynamics layers.
//!
//! Everything here is generic over [`Real`](crate::Real) so the same code
//! runs in single and double precision.

mod eig;
mod expm;
mod hermitian;
mod lu;

pub use eig::{clusters as eig_clusters, eigen, schur, Eigen, Schur};
pub use expm::expm;
pub use hermitian::{hermitian_eigen, HermitianEigen};
pub use lu::{inverse, solve};

use ndarray::Array2;

use crate::scalar::{Real, C};

/// Dense complex matrix.
pub type CMatrix<T> = Array2<C<T>>;

/// `|re| + |im|`, the cheap modulus used in convergence tests.
#[inline]
pub(crate) fn abs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1<T: Real>(a: &CMatrix<T>) -> T {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<T>())
        .fold(T::zero(), T::max)
}

pub fn norm_fro<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Largest entry modulus.
pub fn norm_max<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = C::new(T::one(), T::zero());
    }
    m
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    a.t().mapv(|z| z.conj())
}
