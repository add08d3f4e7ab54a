//! Bloch Hamiltonians of the periodic chains, the winding number of the
//! gauge-fixed unitary `U(k)`, and bulk–edge checks on open chains.

use ndarray::{s, Array2};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::netmodel::{Model, SshParams, ThreeSiteParams};
use crate::scalar::{cplx, creal, Real, C};
use crate::spectral::{decompose, find_quasi_dark_modes, QUBIT_OVERLAP_THRESHOLD};

/// Periodic-chain Bloch matrix with the single lossy site last in the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlochHamiltonian<T: Real> {
    Ssh(SshParams<T>),
    ThreeSite(ThreeSiteParams<T>),
}

pub fn bloch_ssh<T: Real>(j1: T, j2: T, gamma: T) -> BlochHamiltonian<T> {
    BlochHamiltonian::Ssh(SshParams { j1, j2, gamma })
}

pub fn bloch_three_site<T: Real>(params: ThreeSiteParams<T>) -> BlochHamiltonian<T> {
    BlochHamiltonian::ThreeSite(params)
}

impl<T: Real> BlochHamiltonian<T> {
    pub fn cell_size(&self) -> usize {
        match self {
            BlochHamiltonian::Ssh(_) => 2,
            BlochHamiltonian::ThreeSite(_) => 3,
        }
    }

    pub fn eval(&self, k: T) -> CMatrix<T> {
        let phase = cplx(k.cos(), k.sin());
        match *self {
            BlochHamiltonian::Ssh(p) => {
                let v = creal(p.j1) + phase * p.j2;
                let mut m = Array2::zeros((2, 2));
                m[[0, 1]] = v;
                m[[1, 0]] = v.conj();
                m[[1, 1]] = cplx(T::zero(), -p.gamma);
                m
            }
            BlochHamiltonian::ThreeSite(p) => {
                let v = phase * p.j3 + p.j;
                let mut m = Array2::zeros((3, 3));
                m[[0, 0]] = creal(p.eps1);
                m[[1, 1]] = creal(p.eps2);
                m[[2, 2]] = cplx(T::zero(), -p.gamma);
                m[[0, 1]] = creal(p.j1);
                m[[1, 0]] = creal(p.j1);
                m[[1, 2]] = creal(p.j2);
                m[[2, 1]] = creal(p.j2);
                m[[0, 2]] = v;
                m[[2, 0]] = v.conj();
                m
            }
        }
    }

    /// Loss-free `(n-1)×(n-1)` block `h(k)`.
    pub fn hermitian_block(&self, k: T) -> CMatrix<T> {
        let n = self.cell_size() - 1;
        self.eval(k).slice(s![..n, ..n]).to_owned()
    }

    /// Coupling `v_k` of the loss-free sites to the lossy one.
    pub fn coupling(&self, k: T) -> Vec<C<T>> {
        let n = self.cell_size() - 1;
        self.eval(k).slice(s![..n, n]).to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindingMethod {
    Numeric,
    ClosedForm,
}

impl WindingMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WindingMethod::Numeric => "numeric",
            WindingMethod::ClosedForm => "closed_form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingResult<T: Real> {
    pub w: i64,
    pub method: WindingMethod,
    /// Grid size actually used (0 for closed forms).
    pub k_points: usize,
    pub max_phase_step: T,
    /// Unrounded `∮ d arg det U / 2π`.
    pub raw: T,
    /// Grid points nudged by [`K_NUDGE`] because a coupling vanished there.
    pub nudged_points: usize,
}

impl<T: Real> WindingResult<T> {
    fn closed(w: i64) -> Self {
        Self {
            w,
            method: WindingMethod::ClosedForm,
            k_points: 0,
            max_phase_step: T::zero(),
            raw: T::from_i64(w).unwrap_or_else(T::zero),
            nudged_points: 0,
        }
    }
}

pub const MIN_K_POINTS: usize = 64;
pub const MAX_K_POINTS: usize = 1 << 20;
pub const K_NUDGE: f64 = 1e-9;
/// Couplings `|ṽ_m|` below this make the phase of `U(k)` undefined.
pub const GAP_TOL: f64 = 1e-10;

/// `arg det U(k)`, with `U(k)` diagonalizing `h(k)` and making `U†v` real
/// positive. `scramble(m)` multiplies eigenvector `m` by an arbitrary phase
/// before gauge fixing; the result must not depend on it.
fn gauge_phase<T: Real>(b: &BlochHamiltonian<T>, k: T, scramble: &dyn Fn(T, usize) -> T) -> Option<T> {
    let h = b.hermitian_block(k);
    let v = b.coupling(k);
    let e = hermitian_eigen(&h).ok()?;
    let n = v.len();
    let mut u = e.vectors;
    degenerate_fix(&mut u, &e.values, &v);
    for m in 0..n {
        let rot = {
            let a = scramble(k, m);
            cplx(a.cos(), a.sin())
        };
        let mut col: Vec<C<T>> = (0..n).map(|i| u[[i, m]] * rot).collect();
        let overlap = col
            .iter()
            .zip(&v)
            .fold(C::<T>::zero(), |acc, (a, b)| acc + a.conj() * *b);
        if overlap.norm() < T::tol(GAP_TOL) {
            return None;
        }
        let fix = overlap / creal(overlap.norm());
        for c in col.iter_mut() {
            *c *= fix;
        }
        for i in 0..n {
            u[[i, m]] = col[i];
        }
    }
    Some(det(&u).arg())
}

/// Within a degenerate eigenspace, align the first vector with the
/// projection of `v` and orthogonalize the rest against it.
fn degenerate_fix<T: Real>(u: &mut CMatrix<T>, values: &[T], v: &[C<T>]) {
    let n = values.len();
    let tol = T::tol(1e-10) * values.iter().map(|x| x.abs()).fold(T::one(), T::max);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[end] - values[start]).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            let mut p = vec![C::<T>::zero(); n];
            for m in start..end {
                let ov = (0..n).fold(C::<T>::zero(), |acc, i| acc + u[[i, m]].conj() * v[i]);
                for i in 0..n {
                    p[i] += u[[i, m]] * ov;
                }
            }
            let pn = p.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if pn > T::tol(GAP_TOL) {
                let mut basis: Vec<Vec<C<T>>> = vec![p.iter().map(|z| *z / creal(pn)).collect()];
                for m in start..end {
                    let mut w: Vec<C<T>> = (0..n).map(|i| u[[i, m]]).collect();
                    for b in &basis {
                        let ov = (0..n).fold(C::<T>::zero(), |acc, i| acc + b[i].conj() * w[i]);
                        for i in 0..n {
                            w[i] -= b[i] * ov;
                        }
                    }
                    let wn = w.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
                    if wn > T::lit(1e-6) && basis.len() < end - start {
                        basis.push(w.iter().map(|z| *z / creal(wn)).collect());
                    }
                }
                for (m, b) in (start..end).zip(basis) {
                    for i in 0..n {
                        u[[i, m]] = b[i];
                    }
                }
            }
        }
        start = end;
    }
}

fn det<T: Real>(u: &CMatrix<T>) -> C<T> {
    match u.nrows() {
        1 => u[[0, 0]],
        2 => u[[0, 0]] * u[[1, 1]] - u[[0, 1]] * u[[1, 0]],
        _ => {
            // Gaussian elimination with partial pivoting
            let mut a = u.clone();
            let n = a.nrows();
            let mut d = C::<T>::new(T::one(), T::zero());
            for c in 0..n {
                let p = (c..n)
                    .max_by(|&i, &j| {
                        a[[i, c]]
                            .norm()
                            .partial_cmp(&a[[j, c]].norm())
                            .unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .unwrap_or(c);
                if a[[p, c]].is_zero() {
                    return C::zero();
                }
                if p != c {
                    for j in 0..n {
                        a.swap([p, j], [c, j]);
                    }
                    d = -d;
                }
                d *= a[[c, c]];
                for i in c + 1..n {
                    let f = a[[i, c]] / a[[c, c]];
                    for j in c..n {
                        let t = a[[c, j]];
                        a[[i, j]] -= f * t;
                    }
                }
            }
            d
        }
    }
}

fn wrap<T: Real>(x: T) -> T {
    let two_pi = T::TAU();
    let mut y = x % two_pi;
    if y > T::PI() {
        y -= two_pi;
    } else if y <= -T::PI() {
        y += two_pi;
    }
    y
}

/// `W = (1/2π) ∮ d arg det U(k)`, doubling the grid from `n_k` until every
/// phase step is below `π/2`.
pub fn winding_number_numeric<T: Real>(b: &BlochHamiltonian<T>, n_k: usize) -> Result<WindingResult<T>> {
    winding_number_numeric_scrambled(b, n_k, &|_, _| T::zero())
}

/// As [`winding_number_numeric`], with the raw eigenvector phases rotated by
/// `scramble(k, m)` before gauge fixing.
pub fn winding_number_numeric_scrambled<T: Real>(
    b: &BlochHamiltonian<T>,
    n_k: usize,
    scramble: &dyn Fn(T, usize) -> T,
) -> Result<WindingResult<T>> {
    if n_k < MIN_K_POINTS {
        return Err(Error::Argument(format!("n_k must be at least {MIN_K_POINTS}")));
    }
    let mut n = n_k;
    let mut stalled = 0;
    let mut prev_step = T::infinity();
    loop {
        let mut nudged = 0;
        let mut nudged_at = Vec::new();
        let mut phases = Vec::with_capacity(n + 1);
        for i in 0..n {
            let k = T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            let ph = match gauge_phase(b, k, scramble) {
                Some(p) => p,
                None => {
                    nudged += 1;
                    nudged_at.push(i);
                    gauge_phase(b, k + T::lit(K_NUDGE), scramble).ok_or(Error::GapClosure { k: k.to_f64_lossy() })?
                }
            };
            phases.push(ph);
        }
        phases.push(phases[0]);
        let steps: Vec<T> = phases.windows(2).map(|w| wrap(w[1] - w[0])).collect();
        let max_step = steps.iter().map(|x| x.abs()).fold(T::zero(), T::max);
        if max_step < T::FRAC_PI_2() {
            let raw = steps.iter().copied().sum::<T>() / T::TAU();
            let w = raw.round();
            if (raw - w).abs() >= T::lit(0.05) {
                return Err(Error::Numeric(format!("winding integral {raw} is not near an integer")));
            }
            return Ok(WindingResult {
                w: w.to_i64().unwrap_or(0),
                method: WindingMethod::Numeric,
                k_points: n,
                max_phase_step: max_step,
                raw,
                nudged_points: nudged,
            });
        }
        // A vanishing coupling crossed between samples leaves a phase jump
        // that no refinement removes.
        let worst = steps
            .iter()
            .enumerate()
            .fold(
                (0, T::zero()),
                |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc },
            )
            .0;
        let k_worst = T::TAU() * T::from_usize_lossy(worst) / T::from_usize_lossy(n);
        if nudged_at.iter().any(|&i| i == worst || i == (worst + 1) % n) {
            return Err(Error::GapClosure {
                k: k_worst.to_f64_lossy(),
            });
        }
        stalled = if max_step > T::lit(0.75) * prev_step {
            stalled + 1
        } else {
            0
        };
        if stalled >= 3 {
            return Err(Error::GapClosure {
                k: k_worst.to_f64_lossy(),
            });
        }
        prev_step = max_step;
        if n >= MAX_K_POINTS {
            return Err(Error::Resolution { n_k: n });
        }
        n *= 2;
    }
}

/// Margin within which a closed-form comparison counts as a phase boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `W = 1` for `|J2| > |J1|`, else 0.
pub fn winding_ssh_closed_form<T: Real>(j1: T, j2: T) -> Result<WindingResult<T>> {
    let (a, b) = (j1.abs(), j2.abs());
    if (a - b).abs() <= T::tol(BOUNDARY_TOL) * a.max(b).max(T::one()) {
        return Err(Error::PhaseBoundary(format!("|J1| = |J2| = {a}")));
    }
    Ok(WindingResult::closed(i64::from(b > a)))
}

fn theta<T: Real>(lhs: T, rhs: T) -> Result<i64> {
    if (lhs - rhs).abs() <= T::tol(BOUNDARY_TOL) * lhs.max(rhs).max(T::one()) {
        return Err(Error::PhaseBoundary(format!("|J3| = {lhs} meets {rhs}")));
    }
    Ok(i64::from(lhs > rhs))
}

/// Angle `ϑ = arccos[(ε1-ε2)/√(4J1²+(ε1-ε2))]` entering the general
/// three-site winding formula, taken as written (for `ε1 = ε2` it is π/2).
pub fn three_site_theta<T: Real>(j1: T, eps1: T, eps2: T) -> Result<T> {
    let de = eps1 - eps2;
    let r = T::lit(4.0) * j1 * j1 + de;
    if !(r > T::zero()) {
        return Err(Error::Argument("4 J1² + (ε1 - ε2) must be positive".into()));
    }
    let c = de / r.sqrt();
    if c.abs() > T::one() {
        return Err(Error::Argument("arccos argument outside [-1, 1]".into()));
    }
    Ok(c.acos())
}

/// `W = Θ(|J3| > |J + J2 tan(ϑ/2)|) + Θ(|J3| > |J - J2 cot(ϑ/2)|)`.
pub fn winding_three_site_closed_form<T: Real>(
    j1: T,
    j2: T,
    j3: T,
    j: T,
    eps1: T,
    eps2: T,
) -> Result<WindingResult<T>> {
    let half = three_site_theta(j1, eps1, eps2)? / T::lit(2.0);
    let (tan, cot) = if eps1 == eps2 {
        (T::one(), T::one())
    } else {
        (half.tan(), T::one() / half.tan())
    };
    let w = theta(j3.abs(), (j + j2 * tan).abs())? + theta(j3.abs(), (j - j2 * cot).abs())?;
    Ok(WindingResult::closed(w))
}

/// Closed-form winding number for a lattice model, `None` for models
/// without one.
pub fn closed_form_winding<T: Real>(model: &Model<T>) -> Option<Result<WindingResult<T>>> {
    match model {
        Model::Ssh { params, .. } => Some(winding_ssh_closed_form(params.j1, params.j2)),
        Model::ThreeSite { params: p, .. } => {
            Some(winding_three_site_closed_form(p.j1, p.j2, p.j3, p.j, p.eps1, p.eps2))
        }
        _ => None,
    }
}

pub fn bloch_of<T: Real>(model: &Model<T>) -> Option<BlochHamiltonian<T>> {
    match model {
        Model::Ssh { params, .. } => Some(BlochHamiltonian::Ssh(*params)),
        Model::ThreeSite { params, .. } => Some(BlochHamiltonian::ThreeSite(*params)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BulkEdgeRow<T: Real> {
    pub n: usize,
    pub n_quasi_dark: usize,
    pub n_localized_site1: usize,
    /// Decay rates in ascending order.
    pub decay_rates: Vec<T>,
}

impl<T: Real> BulkEdgeRow<T> {
    pub fn slowest_decay_rate(&self) -> T {
        self.decay_rates.first().copied().unwrap_or_else(T::nan)
    }
}

/// Fit of `ln(rate)` against `N` for the `rank`-th slowest mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeScaling<T: Real> {
    pub rank: usize,
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    /// R² of `ln(rate)` against `ln N`, the algebraic alternative.
    pub loglog_r_squared: T,
    /// Log-linear, decreasing, and quasi-dark at the largest `N`.
    pub exponential: bool,
}

/// Minimum R² of the log-linear fit for a mode to count as protected.
pub const SCALING_R2: f64 = 0.98;

/// How many of the slowest modes are fitted.
pub const SCALING_RANKS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct BulkEdgeReport<T: Real> {
    pub model: Model<T>,
    pub rows: Vec<BulkEdgeRow<T>>,
    /// `None` on a phase boundary or for models without a closed form.
    pub w_closed_form: Option<i64>,
    pub scaling: Vec<ModeScaling<T>>,
    pub eps_dark: T,
}

impl<T: Real> BulkEdgeReport<T> {
    /// Modes whose decay rate falls exponentially with `N`.
    pub fn n_exponential(&self) -> usize {
        self.scaling.iter().filter(|s| s.exponential).count()
    }
}

/// Quasi-dark counts per size and exponential-scaling fits across sizes.
///
/// A rank counts as exponentially protected when `ln(rate)` decreases
/// linearly in `N` with `R² > 0.98` and the mode is quasi-dark at the
/// largest size; slowly closing bulk bands can also fit a line over a short
/// range of `N` but stay far above the threshold.
pub fn bulk_edge_report<T: Real>(model: &Model<T>, n_list: &[usize], eps_dark: Option<T>) -> Result<BulkEdgeReport<T>> {
    if n_list.len() < 4 {
        return Err(Error::Argument("bulk-edge report needs at least four sizes".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("sizes must be strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    let mut eps_used = T::zero();
    for &n in n_list {
        let h = model.with_len(n).build()?;
        let sd = decompose(&h)?;
        let eps = eps_dark.unwrap_or_else(|| sd.default_eps_dark());
        eps_used = eps;
        let modes = find_quasi_dark_modes(&sd, eps)?;
        let mut rates = sd.decay_rates().to_vec();
        rates.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        rows.push(BulkEdgeRow {
            n,
            n_quasi_dark: modes.len(),
            n_localized_site1: modes
                .iter()
                .filter(|m| m.localized_at_qubit(sd.cell_size(), T::lit(QUBIT_OVERLAP_THRESHOLD)))
                .count(),
            decay_rates: rates,
        });
    }
    let ranks = SCALING_RANKS.min(rows.iter().map(|r| r.decay_rates.len()).min().unwrap_or(0));
    let scaling = (0..ranks)
        .filter_map(|rank| {
            let lin: Vec<(T, T)> = rows
                .iter()
                .filter(|r| r.decay_rates[rank] > T::zero())
                .map(|r| (T::from_usize_lossy(r.n), r.decay_rates[rank].ln()))
                .collect();
            if lin.len() < rows.len() {
                return None;
            }
            let log: Vec<(T, T)> = lin.iter().map(|&(x, y)| (x.ln(), y)).collect();
            let f = linear_fit(&lin)?;
            let g = linear_fit(&log)?;
            Some(ModeScaling {
                rank,
                slope: f.slope,
                intercept: f.intercept,
                r_squared: f.r_squared,
                loglog_r_squared: g.r_squared,
                exponential: f.slope < T::zero()
                    && f.r_squared > T::lit(SCALING_R2)
                    && rows.last().is_some_and(|r| r.decay_rates[rank] < eps_used),
            })
        })
        .collect();
    let w_closed_form = closed_form_winding(model).and_then(|r| r.ok()).map(|r| r.w);
    Ok(BulkEdgeReport {
        model: model.clone(),
        rows,
        w_closed_form,
        scaling,
        eps_dark: eps_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert!((wrap(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap(-0.5f64) + 0.5).abs() < 1e-15);
        assert!((wrap(7.0f64) - (7.0 - std::f64::consts::TAU)).abs() < 1e-14);
    }

    #[test]
    fn det3() {
        let a = Array2::from_shape_fn((3, 3), |(i, j)| {
            cplx((i * 3 + j) as f64, if i == j { 1.0 } else { 0.0 })
        });
        // det of [[i,1,2],[3,4+i,5],[6,7,8+i]]
        let d = det(&a);
        let i = cplx(0.0, 1.0);
        let want = i * ((cplx(4.0, 1.0)) * cplx(8.0, 1.0) - cplx(35.0, 0.0))
            - (cplx(3.0, 0.0) * cplx(8.0, 1.0) - cplx(30.0, 0.0))
            + cplx(2.0, 0.0) * (cplx(21.0, 0.0) - cplx(6.0, 0.0) * cplx(4.0, 1.0));
        assert!((d - want).norm() < 1e-12);
    }
}
