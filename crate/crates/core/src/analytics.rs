//! Closed-form predictions for the impurity, SSH and three-site chains.
//!
//! Eigenvalues are reported for `L̃ = -iH` (decay rate `-Re λ`); where a
//! formula is naturally written for `H` the `H` value is kept alongside.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::netmodel::build_ssh_model;
use crate::scalar::{cplx, creal, Real, C};
use crate::spectral::{cluster_weights, decompose, SpectralData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityPrediction<T: Real> {
    pub lambda_plus: C<T>,
    pub lambda_minus: C<T>,
    /// `Re λ± < 0`: the formula describes a decaying localized mode.
    pub validity_plus: bool,
    pub validity_minus: bool,
    /// Localization length of the `λ+` mode, in sites.
    pub zeta: T,
    pub zeta_minus: T,
    pub tau: T,
}

fn impurity_root<T: Real>(j: T, kappa: T, gamma: T) -> C<T> {
    creal(T::lit(16.0) * (j * j - kappa * kappa) + gamma * gamma).sqrt()
}

/// `λ± = -4κ²/(Γ ± √(16(J²-κ²)+Γ²))`, `ζ = 1/|ln|4J/(Γ ± √…)||`,
/// `τ = Re[(Γ + √…)/(4κ²)]`.
pub fn impurity_prediction<T: Real>(j: T, kappa: T, gamma: T) -> Result<ImpurityPrediction<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::Argument("Gamma must be positive".into()));
    }
    if j == T::zero() {
        return Err(Error::Argument("J must be nonzero".into()));
    }
    let s = impurity_root(j, kappa, gamma);
    let k2 = T::lit(4.0) * kappa * kappa;
    let plus = creal(gamma) + s;
    let minus = creal(gamma) - s;
    let lam = |den: C<T>| if k2 == T::zero() { C::zero() } else { -creal(k2) / den };
    let zeta = |den: C<T>| T::one() / (T::lit(4.0) * j.abs() / den.norm()).ln().abs();
    let (lp, lm) = (lam(plus), lam(minus));
    let tau = if k2 == T::zero() {
        T::infinity()
    } else {
        (plus / creal(k2)).re
    };
    Ok(ImpurityPrediction {
        lambda_plus: lp,
        lambda_minus: lm,
        validity_plus: lp.re < T::zero(),
        validity_minus: lm.re < T::zero(),
        zeta: zeta(plus),
        zeta_minus: zeta(minus),
        tau,
    })
}

/// A root of `[2cos k + ia] sin(kN) - β² sin(k(N-1)) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasimomentumRoot<T: Real> {
    pub k: C<T>,
    /// `L̃` eigenvalue `2iJ cos k - Γ/2`.
    pub lambda: C<T>,
    /// `|f(k)|` relative to the magnitude of its two terms.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> QuasimomentumRoot<T> {
    /// `ζ = 1/|Im k|`.
    pub fn localization_length(&self) -> T {
        T::one() / self.k.im.abs()
    }
}

pub const ROOT_MAX_ITER: usize = 200;
pub const ROOT_TOL: f64 = 1e-12;

struct Secular<T: Real> {
    a: T,
    b2: T,
    n: T,
}

impl<T: Real> Secular<T> {
    fn terms(&self, k: C<T>) -> (C<T>, C<T>) {
        let head = creal(T::lit(2.0)) * k.cos() + cplx(T::zero(), self.a);
        (
            head * (k * self.n).sin(),
            creal(self.b2) * (k * (self.n - T::one())).sin(),
        )
    }

    fn value(&self, k: C<T>) -> C<T> {
        let (p, q) = self.terms(k);
        p - q
    }

    // |sin(x+iy)| <= cosh y gives a scale that does not vanish at a root
    fn residual(&self, k: C<T>) -> T {
        let head = creal(T::lit(2.0)) * k.cos() + cplx(T::zero(), self.a);
        let y = k.im.abs();
        let scale = head.norm() * (y * self.n).cosh() + self.b2 * (y * (self.n - T::one())).cosh();
        if scale > T::zero() {
            self.value(k).norm() / scale
        } else {
            T::zero()
        }
    }

    fn derivative(&self, k: C<T>) -> C<T> {
        let two = creal(T::lit(2.0));
        let n = self.n;
        let m = n - T::one();
        -two * k.sin() * (k * n).sin() + (two * k.cos() + cplx(T::zero(), self.a)) * creal(n) * (k * n).cos()
            - creal(self.b2 * m) * (k * m).cos()
    }

    fn newton(&self, seed: C<T>) -> std::result::Result<(C<T>, usize), (C<T>, T)> {
        let mut k = seed;
        for it in 0..ROOT_MAX_ITER {
            if self.residual(k) < T::lit(ROOT_TOL) * T::lit(0.1) {
                return Ok((k, it));
            }
            let d = self.derivative(k);
            if d.norm() == T::zero() || !d.re.is_finite() {
                break;
            }
            let step = self.value(k) / d;
            k -= step;
            if !k.re.is_finite() || !k.im.is_finite() {
                return Err((seed, T::infinity()));
            }
            if step.norm() < T::epsilon() * (T::one() + k.norm()) {
                let r = self.residual(k);
                return if r < T::tol(ROOT_TOL) {
                    Ok((k, it + 1))
                } else {
                    Err((k, r))
                };
            }
        }
        let r = self.residual(k);
        if r < T::tol(ROOT_TOL) {
            Ok((k, ROOT_MAX_ITER))
        } else {
            Err((k, r))
        }
    }
}

/// Reduce `k` to `0 ≤ Re k ≤ π` using `f(-k) = -f(k)` and 2π periodicity.
fn canonical<T: Real>(k: C<T>) -> C<T> {
    let two_pi = T::TAU();
    let mut re = k.re % two_pi;
    if re > T::PI() {
        re -= two_pi;
    } else if re < -T::PI() {
        re += two_pi;
    }
    let k = cplx(re, k.im);
    if k.re < T::zero() {
        -k
    } else {
        k
    }
}

/// Asymptotic seeds `z = e^{ik}` solving `(1-β²)z² + iaz + 1 = 0`, i.e.
/// `q = ln((-i)(a ± √(a²+4(1-β²)))/(2(1-β²)))`.
pub fn impurity_seed_z<T: Real>(a: T, b2: T) -> Vec<C<T>> {
    let c2 = T::one() - b2;
    let ia = cplx(T::zero(), a);
    if c2 == T::zero() {
        return vec![-C::<T>::new(T::one(), T::zero()) / ia];
    }
    let disc = creal(a * a + T::lit(4.0) * c2).sqrt();
    let den = creal(T::lit(2.0) * c2);
    let mi = cplx(T::zero(), -T::one());
    vec![mi * (creal(a) + disc) / den, mi * (creal(a) - disc) / den]
}

/// Localized quasi-momenta of the impurity chain, from Newton iterations
/// seeded by the `N → ∞` solution with `|z| < 1`.
pub fn impurity_quasimomentum_roots<T: Real>(j: T, kappa: T, gamma: T, n: usize) -> Result<Vec<QuasimomentumRoot<T>>> {
    if n < 3 {
        return Err(Error::Size(format!("quasi-momentum equation needs N >= 3, got {n}")));
    }
    if j == T::zero() {
        return Err(Error::Argument("J must be nonzero".into()));
    }
    let eq = Secular {
        a: gamma / (T::lit(2.0) * j),
        b2: (kappa / j) * (kappa / j),
        n: T::from_usize_lossy(n),
    };
    let mut out: Vec<QuasimomentumRoot<T>> = Vec::new();
    for z in impurity_seed_z(eq.a, eq.b2) {
        if !(z.norm() < T::one()) || z.norm() == T::zero() {
            continue;
        }
        let seed = canonical(cplx(T::zero(), -T::one()) * z.ln());
        let (k, it) = eq.newton(seed).map_err(|(k, r)| Error::RootFinding {
            iterations: ROOT_MAX_ITER,
            seed: format!("{seed} (last iterate {k})"),
            residual: r.to_f64_lossy(),
        })?;
        push_root(&mut out, &eq, k, it, j, gamma);
    }
    Ok(out)
}

fn push_root<T: Real>(out: &mut Vec<QuasimomentumRoot<T>>, eq: &Secular<T>, k: C<T>, it: usize, j: T, gamma: T) {
    let k = canonical(k);
    if out.iter().any(|r| (r.k - k).norm() < T::tol(1e-8)) {
        return;
    }
    out.push(QuasimomentumRoot {
        k,
        lambda: cplx(T::zero(), T::lit(2.0) * j) * k.cos() - creal(gamma / T::lit(2.0)),
        residual: eq.residual(k),
        iterations: it,
    });
}

/// Extended-state quasi-momenta, seeded at `πm/N`; seeds that fail to
/// converge are dropped.
pub fn impurity_bulk_roots<T: Real>(j: T, kappa: T, gamma: T, n: usize) -> Result<Vec<QuasimomentumRoot<T>>> {
    if n < 3 {
        return Err(Error::Size(format!("quasi-momentum equation needs N >= 3, got {n}")));
    }
    if j == T::zero() {
        return Err(Error::Argument("J must be nonzero".into()));
    }
    let eq = Secular {
        a: gamma / (T::lit(2.0) * j),
        b2: (kappa / j) * (kappa / j),
        n: T::from_usize_lossy(n),
    };
    let mut out = Vec::new();
    for m in 1..n {
        let seed = creal(T::PI() * T::from_usize_lossy(m) / eq.n);
        if let Ok((k, it)) = eq.newton(seed) {
            // sin(k) = 0 solves the equation trivially without an eigenvector
            if k.sin().norm() > T::tol(1e-8) {
                push_root(&mut out, &eq, k, it, j, gamma);
            }
        }
    }
    Ok(out)
}

/// Exact dark state of the odd SSH chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SshOddDarkState<T: Real> {
    /// `A e^{ink}` on odd (1-based) sites, zero on even ones.
    pub vector: Vec<C<T>>,
    /// `A² = (1-x²)/(x-x^{N+2})`, `x = |J1/J2|`.
    pub a2: T,
    /// The state sits at the far end (`|J1| ≥ |J2|`).
    pub mirrored: bool,
}

impl<T: Real> SshOddDarkState<T> {
    /// `|⟨1|ξ⟩|²`.
    pub fn qubit_weight(&self) -> T {
        self.vector[0].norm_sqr()
    }
}

fn check_odd(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Size(format!("need odd N >= 3, got {n}")));
    }
    Ok(())
}

/// `ξ_n = A e^{ink}` for odd `n` with `e^{2ik} = -J1/J2`.
pub fn ssh_odd_dark_state<T: Real>(n: usize, j1: T, j2: T) -> Result<SshOddDarkState<T>> {
    check_odd(n)?;
    if j2 == T::zero() {
        return Err(Error::Argument("J2 must be nonzero".into()));
    }
    let x = (j1 / j2).abs();
    let a2 = if (x - T::one()).abs() <= T::tol(1e-14) {
        T::lit(2.0) / T::from_usize_lossy(n + 1)
    } else {
        (T::one() - x * x) / (x - x.powi(n as i32 + 2))
    };
    let eik = creal(-j1 / j2).sqrt();
    let amp = a2.sqrt();
    let mut vector = vec![C::<T>::zero(); n];
    let mut p = eik;
    let step = eik * eik;
    for (i, slot) in vector.iter_mut().enumerate() {
        if i % 2 == 0 {
            *slot = p * amp;
            p *= step;
        }
    }
    Ok(SshOddDarkState {
        vector,
        a2,
        mirrored: j1.abs() >= j2.abs(),
    })
}

/// Plateau `J2^{N-1}(J2²-J1²)/(J2^{N+1}-J1^{N+1})`, or `2/(N+1)` at
/// `J1 = J2`.
pub fn ssh_odd_asymptotic_coherence<T: Real>(n: usize, j1: T, j2: T) -> Result<T> {
    check_odd(n)?;
    let (a, b) = (j1.abs(), j2.abs());
    if (a - b).abs() <= T::tol(1e-14) * a.max(b) {
        return Ok(T::lit(2.0) / T::from_usize_lossy(n + 1));
    }
    let ni = n as i32;
    let r = a / b;
    Ok(if r < T::one() {
        (T::one() - r * r) / (T::one() - r.powi(ni + 1))
    } else {
        // z^{N-1}(1-z²)/(1-z^{N+1}) with z = |J2/J1|, finite for long chains
        let z = b / a;
        z.powi(ni - 1) * (T::one() - z * z) / (T::one() - z.powi(ni + 1))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshEvenEdge<T: Real> {
    /// Root of `sinh(Ny/2) = x sinh((N/2+1)y)`.
    pub y: T,
    /// Relative residual of that equation at `y`.
    pub y_residual: T,
    /// `L̃` eigenvalue of the left edge mode (from `y`).
    pub lambda_plus: C<T>,
    /// `L̃` eigenvalue of the right edge mode.
    pub lambda_minus: C<T>,
    /// The same two eigenvalues in the `H` convention.
    pub lambda_plus_h: C<T>,
    pub lambda_minus_h: C<T>,
    /// First-order `τ_coh = Γ J1⁻² d^N (d⁻¹-d)⁻²`.
    pub tau_coh: T,
    /// `1/(-Re λ+)` with `λ+` from the exact `y`.
    pub tau_from_y: T,
    /// `|⟨1|ξ+⟩|²` from the sinh expression.
    pub overlap: T,
    /// Expanded form to order `x^N`.
    pub overlap_expanded: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshEvenPrediction<T: Real> {
    pub n: usize,
    pub d: T,
    pub x: T,
    /// `d > 1 + 2/N`.
    pub threshold_ok: bool,
    pub edge: Option<SshEvenEdge<T>>,
}

/// `2 e^{-Ny/2} [x sinh((N/2+1)y) - sinh(Ny/2)]`, overflow-free.
fn ssh_even_g<T: Real>(y: T, n: T, x: T) -> T {
    x * (y.exp() - (-(n + T::one()) * y).exp()) - (T::one() - (-n * y).exp())
}

pub fn ssh_even_solve_y<T: Real>(n: usize, j1: T, j2: T) -> Result<(T, T)> {
    let d = (j2 / j1).abs();
    let x = T::one() / d;
    let nf = T::from_usize_lossy(n);
    if !(d > T::one() + T::lit(2.0) / nf) {
        return Err(Error::Argument(format!("d = {d} is below the edge-mode threshold")));
    }
    let mut hi = T::lit(10.0) * d.ln();
    let mut lo = hi * T::lit(1e-12);
    if !(ssh_even_g(lo, nf, x) < T::zero() && ssh_even_g(hi, nf, x) > T::zero()) {
        return Err(Error::Numeric("sinh equation is not bracketed".into()));
    }
    while hi - lo > T::lit(1e-15) * hi {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if ssh_even_g(mid, nf, x) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = (lo + hi) / T::lit(2.0);
    let residual = ssh_even_g(y, nf, x).abs() / (T::one() - (-nf * y).exp());
    Ok((y, residual))
}

/// Edge-mode predictions of the even SSH chain.
pub fn ssh_even_prediction<T: Real>(n: usize, j1: T, j2: T, gamma: T) -> Result<SshEvenPrediction<T>> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::Size(format!("need even N >= 4, got {n}")));
    }
    if j1 == T::zero() || !(gamma > T::zero()) {
        return Err(Error::Argument("need J1 != 0 and Gamma > 0".into()));
    }
    let d = (j2 / j1).abs();
    let x = T::one() / d;
    let nf = T::from_usize_lossy(n);
    let threshold_ok = d > T::one() + T::lit(2.0) / nf;
    if !threshold_ok {
        return Ok(SshEvenPrediction {
            n,
            d,
            x,
            threshold_ok,
            edge: None,
        });
    }
    let (y, y_residual) = ssh_even_solve_y(n, j1, j2)?;
    let (a1, a2) = (j1.abs(), j2.abs());
    // J1² + J2² - 2 J1 J2 cosh y, factored to avoid cancellation
    let s = (a2 - a1 * y.exp()) * (a2 - a1 * (-y).exp());
    let half = gamma / T::lit(2.0);
    let w = creal(half * half - s).sqrt();
    // -Γ/2 + w, written to keep relative accuracy when s is tiny
    let lambda_plus = if (half * half - s) > T::zero() {
        creal(-s / (half + w.re))
    } else {
        creal(-half) + w
    };
    let lambda_minus = creal(-half) - w;
    let to_h = |l: C<T>| cplx(T::zero(), T::one()) * l;
    let r = T::one() / d - d;
    let tau_coh = gamma / (j1 * j1) * d.powi(n as i32) / (r * r);
    let tau_from_y = if lambda_plus.re < T::zero() {
        -T::one() / lambda_plus.re
    } else {
        T::infinity()
    };

    let lp_h = to_h(lambda_plus);
    let ig = cplx(T::zero(), gamma);
    let frac = (lp_h + ig) / (lp_h * creal(T::lit(2.0)) + ig);
    let sh = (nf * y / T::lit(2.0)).sinh();
    let bracket = ((nf + T::one()) * y).sinh() / y.sinh() - (nf + T::one());
    let overlap = (creal(T::lit(4.0) * sh * sh / bracket) * frac).norm();

    let x2 = x * x;
    let xn = x.powi(n as i32);
    let g2 = (j1 / gamma) * (j1 / gamma);
    let overlap_expanded =
        T::one() - x2 + xn * (T::one() - x2) * (T::one() - x2) * ((nf + T::one()) - (T::one() - x2) / x2 * g2);
    Ok(SshEvenPrediction {
        n,
        d,
        x,
        threshold_ok,
        edge: Some(SshEvenEdge {
            y,
            y_residual,
            lambda_plus,
            lambda_minus,
            lambda_plus_h: lp_h,
            lambda_minus_h: to_h(lambda_minus),
            tau_coh,
            tau_from_y,
            overlap,
            overlap_expanded,
        }),
    })
}

/// Indices of modes with decay rate below `eps_dark`.
pub fn dark_indices<T: Real>(sd: &SpectralData<T>, eps_dark: T) -> Vec<usize> {
    (0..sd.len()).filter(|&j| sd.decay_rates()[j] < eps_dark).collect()
}

/// `|Σ_{dark j} c_j e^{λ_j t}|`: the coherence carried by the quasi-dark
/// sector alone. Zero when there is no such mode.
pub fn dark_sector_prediction<T: Real>(sd: &SpectralData<T>, eps_dark: T, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::Argument("t must be non-negative".into()));
    }
    let w = crate::spectral::overlap_weights(sd, 0)?;
    Ok(dark_indices(sd, eps_dark)
        .into_iter()
        .fold(C::<T>::zero(), |acc, j| {
            acc + w[j] * (sd.eigenvalues[j] * creal(t)).exp()
        })
        .norm())
}

/// Rabi data of a two-mode dark sector: oscillation between `|w1|+|w2|`
/// and `||w1|-|w2||` with period `2π/|ω1-ω2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiPrediction<T: Real> {
    pub omega1: T,
    pub omega2: T,
    pub weight1: C<T>,
    pub weight2: C<T>,
    pub period: T,
    pub c_max: T,
    pub c_min: T,
}

/// Requires exactly two quasi-dark modes.
pub fn rabi_prediction<T: Real>(sd: &SpectralData<T>, eps_dark: T) -> Result<RabiPrediction<T>> {
    let idx = dark_indices(sd, eps_dark);
    if idx.len() != 2 {
        return Err(Error::Argument(format!("expected two dark modes, found {}", idx.len())));
    }
    let w = cluster_weights(sd, 0)?;
    let (a, b) = (idx[0], idx[1]);
    let (o1, o2) = (sd.eigenvalues[a].im, sd.eigenvalues[b].im);
    Ok(RabiPrediction {
        omega1: o1,
        omega2: o2,
        weight1: w[a],
        weight2: w[b],
        period: T::TAU() / (o1 - o2).abs(),
        c_max: w[a].norm() + w[b].norm(),
        c_min: (w[a].norm() - w[b].norm()).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row<T: Real> {
    pub n: usize,
    /// `1/decay rate` of the slowest mode of the open chain.
    pub tau_exact: T,
    pub tau_theory: T,
    /// `|⟨1|ξ+⟩|²` of the slowest mode's normalized right eigenvector.
    pub overlap_exact: T,
    pub overlap_theory: T,
}

/// Exact versus first-order coherence times and qubit overlaps of the even
/// SSH chain. Theory columns are NaN below the edge-mode threshold.
pub fn table1<T: Real>(j1: T, j2: T, gamma: T, n_list: &[usize]) -> Result<Vec<Table1Row<T>>> {
    n_list
        .iter()
        .map(|&n| {
            let pred = ssh_even_prediction(n, j1, j2, gamma)?;
            let sd = decompose(&build_ssh_model(n, j1, j2, gamma)?)?;
            let rates = sd.decay_rates();
            let slow = (0..sd.len())
                .min_by(|&a, &b| rates[a].partial_cmp(&rates[b]).unwrap_or(std::cmp::Ordering::Equal))
                .ok_or_else(|| Error::Numeric("empty spectrum".into()))?;
            let (tau_theory, overlap_theory) = match pred.edge {
                Some(e) => (e.tau_coh, e.overlap_expanded),
                None => (T::nan(), T::nan()),
            };
            Ok(Table1Row {
                n,
                tau_exact: T::one() / rates[slow],
                tau_theory,
                overlap_exact: sd.site_population(slow, 0),
                overlap_theory,
            })
        })
        .collect()
}

pub const TABLE1_SIZES: [usize; 4] = [6, 8, 10, 20];
