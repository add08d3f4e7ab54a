use ndarray::Array2;
use num_traits::Zero;

use super::{identity, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// LU factorization with partial pivoting, stored packed.
struct Lu<T: Real> {
    lu: CMatrix<T>,
    perm: Vec<usize>,
}

fn factor<T: Real>(a: &CMatrix<T>) -> Result<Lu<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Argument(format!(
            "LU needs a square matrix, got {}x{}",
            n,
            a.ncols()
        )));
    }
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = super::norm_max(a);
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= T::epsilon() * scale * T::lit(1e-3) || pmax == T::zero() {
            return Err(Error::Numeric(format!("singular matrix at pivot {k}")));
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                lu.swap([p, j], [k, j]);
            }
        }
        let pivot = lu[[k, k]];
        for i in k + 1..n {
            let f = lu[[i, k]] / pivot;
            lu[[i, k]] = f;
            if f.is_zero() {
                continue;
            }
            for j in k + 1..n {
                let u = lu[[k, j]];
                lu[[i, j]] -= f * u;
            }
        }
    }
    Ok(Lu { lu, perm })
}

impl<T: Real> Lu<T> {
    fn solve_in_place(&self, b: &mut CMatrix<T>) {
        let n = self.lu.nrows();
        let permuted = Array2::from_shape_fn(b.raw_dim(), |(i, j)| b[[self.perm[i], j]]);
        *b = permuted;
        for col in 0..b.ncols() {
            for i in 0..n {
                let mut s = b[[i, col]];
                for k in 0..i {
                    s -= self.lu[[i, k]] * b[[k, col]];
                }
                b[[i, col]] = s;
            }
            for i in (0..n).rev() {
                let mut s = b[[i, col]];
                for k in i + 1..n {
                    s -= self.lu[[i, k]] * b[[k, col]];
                }
                b[[i, col]] = s / self.lu[[i, i]];
            }
        }
    }
}

/// Solves `a x = b` for a matrix right-hand side.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if b.nrows() != a.nrows() {
        return Err(Error::Argument("right-hand side has wrong row count".into()));
    }
    let f = factor(a)?;
    let mut x = b.clone();
    f.solve_in_place(&mut x);
    Ok(x)
}

pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    solve(a, &identity(a.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn inverse_round_trip() {
        let a = Array2::from_shape_fn((4, 4), |(i, j)| {
            cplx(1.0 / (1.0 + i as f64 + j as f64), (i as f64 - j as f64) * 0.3)
        });
        let inv = inverse(&a).unwrap();
        let prod = a.dot(&inv);
        let id: CMatrix<f64> = identity(4);
        for (x, y) in prod.iter().zip(id.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn singular_is_an_error() {
        let a: CMatrix<f64> = Array2::zeros((3, 3));
        assert!(matches!(inverse(&a), Err(Error::Numeric(_))));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let mut a: CMatrix<f64> = Array2::zeros((2, 2));
        a[[0, 1]] = cplx(1.0, 0.0);
        a[[1, 0]] = cplx(0.0, 2.0);
        let b = Array2::from_shape_vec((2, 1), vec![cplx(3.0, 0.0), cplx(4.0, 0.0)]).unwrap();
        let x = solve(&a, &b).unwrap();
        assert!((x[[0, 0]] - cplx(0.0, -2.0)).norm() < 1e-15);
        assert!((x[[1, 0]] - cplx(3.0, 0.0)).norm() < 1e-15);
    }
}
