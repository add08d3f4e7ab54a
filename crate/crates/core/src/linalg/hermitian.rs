//! Cyclic Jacobi eigensolver for Hermitian matrices.

use ndarray::Array2;
use num_traits::Zero;

use super::{identity, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{cplx, creal, Real, C};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

const MAX_SWEEPS: usize = 100;

pub fn hermitian_eigen<T: Real>(a: &CMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Argument("hermitian_eigen needs a square matrix".into()));
    }
    let scale = super::norm_max(a).max(T::min_positive_value());
    for i in 0..n {
        for j in i..n {
            if (a[[i, j]] - a[[j, i]].conj()).norm() > T::tol(1e-12) * scale {
                return Err(Error::Argument(format!("matrix is not Hermitian at ({i}, {j})")));
            }
        }
    }
    let mut m = a.clone();
    let mut v = identity::<T>(n);
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]].norm_sqr())
            .sum();
        if off.sqrt() <= eps * scale * T::lit(0.1) || off == T::zero() {
            return Ok(sorted(m, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                let r = apq.norm();
                if r == T::zero() {
                    continue;
                }
                let phase = apq / r;
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (T::lit(2.0) * r);
                let t = if tau == T::zero() {
                    T::one()
                } else {
                    tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) [[c, s], [-s, c]]
                let g_pp = creal(c);
                let g_pq = creal(s);
                let g_qp = phase.conj() * creal(-s);
                let g_qq = phase.conj() * creal(c);
                rotate(&mut m, &mut v, p, q, [g_pp, g_pq, g_qp, g_qq]);
                m[[p, q]] = C::<T>::zero();
                m[[q, p]] = C::<T>::zero();
                m[[p, p]] = cplx(m[[p, p]].re, T::zero());
                m[[q, q]] = cplx(m[[q, q]].re, T::zero());
            }
        }
    }
    Err(Error::Numeric("Jacobi sweeps did not converge".into()))
}

/// `M <- G† M G`, `V <- V G` where `G` acts on the (p, q) plane.
fn rotate<T: Real>(m: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize, g: [C<T>; 4]) {
    let [gpp, gpq, gqp, gqq] = g;
    let n = m.nrows();
    for mat in [&mut *m, &mut *v] {
        for i in 0..n {
            let xp = mat[[i, p]];
            let xq = mat[[i, q]];
            mat[[i, p]] = xp * gpp + xq * gqp;
            mat[[i, q]] = xp * gpq + xq * gqq;
        }
    }
    for j in 0..n {
        let xp = m[[p, j]];
        let xq = m[[q, j]];
        m[[p, j]] = gpp.conj() * xp + gqp.conj() * xq;
        m[[q, j]] = gpq.conj() * xp + gqq.conj() * xq;
    }
}

fn sorted<T: Real>(m: CMatrix<T>, v: CMatrix<T>) -> HermitianEigen<T> {
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| m[[a, a]].re.partial_cmp(&m[[b, b]].re).unwrap());
    let values = order.iter().map(|&i| m[[i, i]].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| v[[i, order[j]]]);
    HermitianEigen { values, vectors }
}
