//! Complex non-Hermitian eigensolver.
//!
//! Householder reduction to upper Hessenberg form, then implicit
//! single-shift QR sweeps with Wilkinson shifts down to a complex Schur
//! form `A = Z T Z†`. Right eigenvectors come from back substitution on
//! `T`, left eigenvectors from forward substitution on `T†`.

use ndarray::Array2;
use num_traits::{One, Zero};

use super::{abs1, lu, norm_max, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{creal, Real, C};

/// Complex Schur decomposition `A = Z T Z†` with `T` upper triangular.
#[derive(Debug, Clone)]
pub struct Schur<T: Real> {
    pub t: CMatrix<T>,
    pub z: CMatrix<T>,
}

/// Eigenvalues with biorthonormal right and left eigenvectors.
///
/// Column `j` of `right` is `r_j` (unit 2-norm) and column `j` of `left`
/// is `l_j`, scaled so that `l_i† r_j = δ_ij`.
#[derive(Debug, Clone)]
pub struct Eigen<T: Real> {
    pub values: Vec<C<T>>,
    pub right: CMatrix<T>,
    pub left: CMatrix<T>,
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

fn householder_hessenberg<T: Real>(h: &mut CMatrix<T>, z: &mut CMatrix<T>) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[[i, k]].norm_sqr()).sum::<T>().sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = h[[k + 1, k]];
        let phase = if x0.norm() == T::zero() {
            C::<T>::one()
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<C<T>> = (k + 1..n).map(|i| h[[i, k]]).collect();
        v[0] -= alpha;
        let vn2: T = v.iter().map(|x| x.norm_sqr()).sum();
        if vn2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0) / vn2;
        // H <- P H
        for j in 0..n {
            let w = v
                .iter()
                .enumerate()
                .fold(C::<T>::zero(), |acc, (i, vi)| acc + vi.conj() * h[[k + 1 + i, j]]);
            for (i, vi) in v.iter().enumerate() {
                h[[k + 1 + i, j]] -= *vi * w * two;
            }
        }
        // H <- H P, Z <- Z P
        for m in [&mut *h, &mut *z] {
            for i in 0..n {
                let w = v
                    .iter()
                    .enumerate()
                    .fold(C::<T>::zero(), |acc, (j, vj)| acc + m[[i, k + 1 + j]] * *vj);
                for (j, vj) in v.iter().enumerate() {
                    m[[i, k + 1 + j]] -= w * vj.conj() * two;
                }
            }
        }
        h[[k + 1, k]] = alpha;
        for i in k + 2..n {
            h[[i, k]] = C::<T>::zero();
        }
    }
}

/// Rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`.
fn givens<T: Real>(a: C<T>, b: C<T>) -> (T, C<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), C::<T>::zero());
    }
    if na == T::zero() {
        return (T::zero(), C::<T>::one());
    }
    let nu = na.hypot(nb);
    (na / nu, (a / na) * b.conj() / nu)
}

fn wilkinson_shift<T: Real>(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> C<T> {
    let half = creal(T::lit(0.5));
    let m = (a + d) * half;
    let disc = ((a - d) * half * ((a - d) * half) + b * c).sqrt();
    let l1 = m + disc;
    let l2 = m - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition of a square matrix.
pub fn schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Argument("schur needs a square matrix".into()));
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    let mut h = a.clone();
    let mut z = super::identity::<T>(n);
    if n == 0 {
        return Ok(Schur { t: h, z });
    }
    householder_hessenberg(&mut h, &mut z);

    let eps = T::epsilon();
    let anorm = norm_max(&h).max(T::min_positive_value());
    let mut hi = n - 1;
    let mut its = 0usize;
    while hi > 0 {
        // locate the active window [l, hi]
        let mut l = hi;
        while l > 0 {
            let sub = abs1(h[[l, l - 1]]);
            let mut diag = abs1(h[[l - 1, l - 1]]) + abs1(h[[l, l]]);
            if diag == T::zero() {
                diag = anorm;
            }
            if sub <= eps * diag {
                h[[l, l - 1]] = C::<T>::zero();
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        if its > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::Numeric(format!(
                "QR iteration did not converge for eigenvalue {hi}"
            )));
        }
        let mu = if its.is_multiple_of(10) {
            h[[hi, hi]] + creal(T::lit(0.75) * abs1(h[[hi, hi - 1]]))
        } else {
            wilkinson_shift(h[[hi - 1, hi - 1]], h[[hi - 1, hi]], h[[hi, hi - 1]], h[[hi, hi]])
        };
        for k in l..hi {
            let (x, y) = if k == l {
                (h[[l, l]] - mu, h[[l + 1, l]])
            } else {
                (h[[k, k - 1]], h[[k + 1, k - 1]])
            };
            let (c, s) = givens(x, y);
            let cc = creal(c);
            let col0 = if k == l { l } else { k - 1 };
            for j in col0..n {
                let p = h[[k, j]];
                let q = h[[k + 1, j]];
                h[[k, j]] = cc * p + s * q;
                h[[k + 1, j]] = cc * q - s.conj() * p;
            }
            if k > l {
                h[[k + 1, k - 1]] = C::<T>::zero();
            }
            let rmax = (k + 2).min(hi);
            for i in 0..=rmax {
                let p = h[[i, k]];
                let q = h[[i, k + 1]];
                h[[i, k]] = cc * p + s.conj() * q;
                h[[i, k + 1]] = cc * q - s * p;
            }
            for i in 0..n {
                let p = z[[i, k]];
                let q = z[[i, k + 1]];
                z[[i, k]] = cc * p + s.conj() * q;
                z[[i, k + 1]] = cc * q - s * p;
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[[i, j]] = C::<T>::zero();
        }
    }
    Ok(Schur { t: h, z })
}

fn rescale_if_large<T: Real>(x: &mut [C<T>]) {
    let big = T::max_value().sqrt();
    let m = x.iter().map(|v| v.norm()).fold(T::zero(), T::max);
    if m > big {
        let s = creal(T::one() / m);
        for v in x.iter_mut() {
            *v *= s;
        }
    }
}

fn guarded<T: Real>(d: C<T>, smin: T) -> C<T> {
    if d.norm() < smin {
        creal(smin)
    } else {
        d
    }
}

fn normalize<T: Real>(v: &mut [C<T>]) {
    let nrm = v.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt();
    if nrm > T::zero() {
        let s = creal(T::one() / nrm);
        for x in v.iter_mut() {
            *x *= s;
        }
    }
}

/// Eigen-decomposition with biorthonormal left/right vectors.
///
/// Eigenvalues closer than `cluster_tol` are grouped and their left
/// vectors re-biorthogonalized inside the group.
pub fn eigen<T: Real>(a: &CMatrix<T>, cluster_tol: T) -> Result<Eigen<T>> {
    let n = a.nrows();
    let Schur { t, z } = schur(a)?;
    let values: Vec<C<T>> = (0..n).map(|i| t[[i, i]]).collect();
    let smin = (T::epsilon() * norm_max(&t)).max(T::min_positive_value());

    let mut right = Array2::<C<T>>::zeros((n, n));
    let mut left = Array2::<C<T>>::zeros((n, n));
    for k in 0..n {
        let lam = t[[k, k]];
        // right: T x = lam x, x supported on 0..=k
        let mut x = vec![C::<T>::zero(); n];
        x[k] = C::<T>::one();
        for i in (0..k).rev() {
            let s = (i + 1..=k).fold(C::<T>::zero(), |acc, j| acc + t[[i, j]] * x[j]);
            if s.is_zero() {
                continue;
            }
            x[i] = -s / guarded(t[[i, i]] - lam, smin);
        }
        rescale_if_large(&mut x);
        let mut r: Vec<C<T>> = (0..n)
            .map(|i| (0..=k).fold(C::<T>::zero(), |acc, j| acc + z[[i, j]] * x[j]))
            .collect();
        normalize(&mut r);

        // left: T† y = conj(lam) y, y supported on k..n
        let mut y = vec![C::<T>::zero(); n];
        y[k] = C::<T>::one();
        for i in k + 1..n {
            let s = (k..i).fold(C::<T>::zero(), |acc, j| acc + t[[j, i]].conj() * y[j]);
            if s.is_zero() {
                continue;
            }
            y[i] = -s / guarded(t[[i, i]].conj() - lam.conj(), smin);
        }
        rescale_if_large(&mut y);
        let mut l: Vec<C<T>> = (0..n)
            .map(|i| (k..n).fold(C::<T>::zero(), |acc, j| acc + z[[i, j]] * y[j]))
            .collect();
        normalize(&mut l);
        let g = l
            .iter()
            .zip(r.iter())
            .fold(C::<T>::zero(), |acc, (li, ri)| acc + li.conj() * *ri);
        if g.norm() < smin {
            return Err(Error::Numeric(format!(
                "left and right eigenvectors of eigenvalue {k} are orthogonal (defective matrix)"
            )));
        }
        let gc = g.conj();
        for i in 0..n {
            right[[i, k]] = r[i];
            left[[i, k]] = l[i] / gc;
        }
    }

    for cluster in clusters(&values, cluster_tol) {
        if cluster.len() < 2 {
            continue;
        }
        let m = cluster.len();
        let gram = Array2::from_shape_fn((m, m), |(a, b)| {
            (0..n).fold(C::<T>::zero(), |acc, i| {
                acc + left[[i, cluster[a]]].conj() * right[[i, cluster[b]]]
            })
        });
        let ginv = lu::inverse(&gram)?;
        // L_c <- L_c (G^{-1})†
        let old: Vec<Vec<C<T>>> = cluster
            .iter()
            .map(|&c| (0..n).map(|i| left[[i, c]]).collect())
            .collect();
        for (b, &cb) in cluster.iter().enumerate() {
            for i in 0..n {
                left[[i, cb]] = (0..m).fold(C::<T>::zero(), |acc, a| acc + old[a][i] * ginv[[b, a]].conj());
            }
        }
    }
    Ok(Eigen { values, right, left })
}

/// Groups indices whose eigenvalues lie within `tol` of each other
/// (transitively). Groups are returned in order of their first member.
pub fn clusters<T: Real>(values: &[C<T>], tol: T) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() < tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{adjoint, identity};
    use crate::scalar::cplx;

    fn test_matrix(n: usize, seed: u64) -> CMatrix<f64> {
        // small deterministic LCG, enough for fixtures
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        Array2::from_shape_fn((n, n), |_| cplx(next(), next()))
    }

    fn max_dev(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn schur_reconstructs_and_is_unitary() {
        for n in [1, 2, 3, 7, 16] {
            let a = test_matrix(n, n as u64);
            let s = schur(&a).unwrap();
            let back = s.z.dot(&s.t).dot(&adjoint(&s.z));
            assert!(max_dev(&back, &a) < 1e-13, "n={n}");
            assert!(max_dev(&adjoint(&s.z).dot(&s.z), &identity(n)) < 1e-13);
            for i in 1..n {
                for j in 0..i {
                    assert_eq!(s.t[[i, j]], C::zero());
                }
            }
        }
    }

    #[test]
    fn eigenpairs_are_biorthonormal() {
        let a = test_matrix(12, 99);
        let e = eigen(&a, 1e-9).unwrap();
        let g = adjoint(&e.left).dot(&e.right);
        assert!(max_dev(&g, &identity(12)) < 1e-10);
        for k in 0..12 {
            let r = e.right.column(k).to_owned();
            let ar = a.dot(&r);
            for i in 0..12 {
                assert!((ar[i] - e.values[k] * r[i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_matrix_gives_standard_basis() {
        let d = [cplx(1.0, -0.5), cplx(1.0, -0.5), cplx(-2.0, 0.0)];
        let mut a: CMatrix<f64> = Array2::zeros((3, 3));
        for (i, x) in d.iter().enumerate() {
            a[[i, i]] = *x;
        }
        let e = eigen(&a, 1e-9).unwrap();
        assert_eq!(e.values, d.to_vec());
        assert!(max_dev(&e.right, &identity(3)) == 0.0);
        assert!(max_dev(&e.left, &identity(3)) == 0.0);
    }

    #[test]
    fn clusters_group_transitively() {
        let v = [cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(0.5e-9, 0.0), cplx(1.0e-9, 0.0)];
        let g = clusters(&v, 0.6e-9);
        assert_eq!(g, vec![vec![0, 2, 3], vec![1]]);
    }

    #[test]
    fn single_precision_runs() {
        let a64 = test_matrix(6, 5);
        let a32 = a64.mapv(|z| cplx(z.re as f32, z.im as f32));
        let e = eigen(&a32, 1e-4).unwrap();
        let g = adjoint(&e.left).dot(&e.right);
        for (i, x) in g.iter().enumerate() {
            let expect = if i % 7 == 0 { 1.0 } else { 0.0 };
            assert!((x - cplx(expect, 0.0)).norm() < 1e-4);
        }
    }
}
