//! Matrix exponential by scaling and squaring with a diagonal Padé kernel
//! (Higham 2005). Double precision uses degrees up to 13; single
//! precision switches to the single-precision thresholds and degree 7.

use ndarray::Array2;

use super::{identity, lu, norm_1, CMatrix};
use crate::error::{Error, Result};
use crate::scalar::{creal, Real};

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// (degree, theta) for unit roundoff 2^-53 and 2^-24
const THETA_DOUBLE: [(usize, f64); 5] = [
    (3, 1.495585217958292e-2),
    (5, 2.53939833006323e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
    (13, 5.371920351148152),
];
const THETA_SINGLE: [(usize, f64); 3] = [(3, 4.258730016922831e-1), (5, 1.880152677804762), (7, 3.92572478313866)];

fn scaled<T: Real>(a: &CMatrix<T>, x: f64) -> CMatrix<T> {
    let s = creal(T::lit(x));
    a.mapv(|z| z * s)
}

fn pade_odd_even<T: Real>(a: &CMatrix<T>, b: &[f64]) -> (CMatrix<T>, CMatrix<T>) {
    let n = a.nrows();
    let id = identity::<T>(n);
    let a2 = a.dot(a);
    // powers of A^2
    let m = b.len() - 1;
    let mut pow = id.clone();
    let mut u = scaled(&id, b[1]);
    let mut v = scaled(&id, b[0]);
    for j in 1..=m / 2 {
        pow = pow.dot(&a2);
        v = v + scaled(&pow, b[2 * j]);
        if 2 * j < m {
            u = u + scaled(&pow, b[2 * j + 1]);
        }
    }
    (a.dot(&u), v)
}

fn pade13<T: Real>(a: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let b = &B13;
    let id = identity::<T>(a.nrows());
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let inner_u = scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]);
    let u = a.dot(&(a6.dot(&inner_u) + scaled(&a6, b[7]) + scaled(&a4, b[5]) + scaled(&a2, b[3]) + scaled(&id, b[1])));
    let inner_v = scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]);
    let v = a6.dot(&inner_v) + scaled(&a6, b[6]) + scaled(&a4, b[4]) + scaled(&a2, b[2]) + scaled(&id, b[0]);
    (u, v)
}

/// `exp(A)` for a square complex matrix.
pub fn expm<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Argument("expm needs a square matrix".into()));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = norm_1(a).to_f64_lossy();
    if !norm.is_finite() {
        return Err(Error::Numeric("non-finite matrix in expm".into()));
    }
    let single = T::epsilon().to_f64_lossy() > 1e-10;
    let table: &[(usize, f64)] = if single { &THETA_SINGLE } else { &THETA_DOUBLE };

    for &(m, theta) in &table[..table.len() - 1] {
        if norm <= theta {
            return finish(a, m, 0);
        }
    }
    let (m_top, theta_top) = table[table.len() - 1];
    let s = if norm > theta_top {
        (norm / theta_top).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a_s = scaled(a, 2f64.powi(-s));
    finish(&a_s, m_top, s as u32)
}

fn finish<T: Real>(a: &CMatrix<T>, m: usize, squarings: u32) -> Result<CMatrix<T>> {
    let (u, v) = match m {
        3 => pade_odd_even(a, &B3),
        5 => pade_odd_even(a, &B5),
        7 => pade_odd_even(a, &B7),
        9 => pade_odd_even(a, &B9),
        _ => pade13(a),
    };
    let mut r = lu::solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(r)
}
