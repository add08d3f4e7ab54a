//! Coherence of the fiducial qubit, `C(t) = |⟨1|e^{tL̃}|1⟩|`, and the
//! timescales and perturbative rates derived from it.

use ndarray::Array2;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, hermitian_eigen, CMatrix};
use crate::netmodel::{EffectiveHamiltonian, Superoperator};
use crate::scalar::{cplx, creal, Real, C};
use crate::spectral::{decompose, overlap_weights};

/// Above this eigenvector condition number the spectral sum is not trusted.
pub const EXPM_FALLBACK_CONDITION: f64 = 1e8;

/// Modes with `|c_j|` below this never enter `C(t)` and are ignored by
/// [`timescales`].
pub const WEIGHT_CUTOFF: f64 = 1e-14;

pub const DEFAULT_TAU_LIN_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    Expm,
    FullSuperoperator,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Spectral => "spectral",
            Method::Expm => "expm",
            Method::FullSuperoperator => "full_superoperator",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace<T: Real> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub method: Method,
}

impl<T: Real> CoherenceTrace<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |C(t) - C'(t)|` on a shared grid.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.times != other.times {
            return Err(Error::Argument("traces are on different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max))
    }
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < T::zero()) {
        return Err(Error::Argument("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("times must be ascending".into()));
    }
    Ok(())
}

/// `|Σ_j c_j e^{λ_j t}|` at each time.
pub fn spectral_sum<T: Real>(eigenvalues: &[C<T>], weights: &[C<T>], times: &[T]) -> Vec<T> {
    times
        .iter()
        .map(|&t| {
            eigenvalues
                .iter()
                .zip(weights)
                .fold(C::<T>::zero(), |acc, (l, c)| acc + *c * (*l * creal(t)).exp())
                .norm()
        })
        .collect()
}

/// Spectral evaluation, falling back to the matrix exponential when the
/// eigenvector basis is ill-conditioned.
pub fn coherence_trace<T: Real>(h: &EffectiveHamiltonian<T>, times: &[T]) -> Result<CoherenceTrace<T>> {
    check_times(times)?;
    // an exactly defective generator fails in `decompose`; expm still works
    match decompose(h) {
        Ok(sd) if sd.condition.is_finite() && sd.condition < T::lit(EXPM_FALLBACK_CONDITION) => {
            let w = overlap_weights(&sd, 0)?;
            Ok(CoherenceTrace {
                times: times.to_vec(),
                values: spectral_sum(&sd.eigenvalues, &w, times),
                method: Method::Spectral,
            })
        }
        Ok(_) | Err(Error::Numeric(_)) => coherence_trace_with(h, times, Method::Expm),
        Err(e) => Err(e),
    }
}

/// Forces a given evaluation method.
pub fn coherence_trace_with<T: Real>(
    h: &EffectiveHamiltonian<T>,
    times: &[T],
    method: Method,
) -> Result<CoherenceTrace<T>> {
    check_times(times)?;
    let values = match method {
        Method::Spectral => {
            let sd = decompose(h)?;
            let w = overlap_weights(&sd, 0)?;
            spectral_sum(&sd.eigenvalues, &w, times)
        }
        Method::Expm => {
            let g = h.generator();
            times
                .iter()
                .map(|&t| Ok(expm(&g.mapv(|z| z * creal(t)))?[[0, 0]].norm()))
                .collect::<Result<_>>()?
        }
        Method::FullSuperoperator => {
            let so = Superoperator::from_hamiltonian(h)?;
            let col = so.ket_vacuum(0);
            times
                .iter()
                .map(|&t| Ok(expm(&so.matrix().mapv(|z| z * creal(t)))?[[col, col]].norm()))
                .collect::<Result<_>>()?
        }
    };
    Ok(CoherenceTrace {
        times: times.to_vec(),
        values,
        method,
    })
}

/// `exp(t L̃)`.
pub fn expm_oracle<T: Real>(h: &EffectiveHamiltonian<T>, t: T) -> Result<CMatrix<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::Argument("t must be finite and non-negative".into()));
    }
    expm(&h.generator().mapv(|z| z * creal(t)))
}

/// `n` log-spaced points from `1e-2` to `t_max`.
pub fn default_time_grid<T: Real>(t_max: T, n: usize) -> Result<Vec<T>> {
    log_time_grid(T::lit(1e-2), t_max, n)
}

pub fn log_time_grid<T: Real>(t_min: T, t_max: T, n: usize) -> Result<Vec<T>> {
    if !(t_min > T::zero()) || !(t_max > t_min) || n < 2 {
        return Err(Error::Argument("log grid needs 0 < t_min < t_max and n >= 2".into()));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                t_max
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect())
}

/// `n` evenly spaced points on `[0, t_max]`.
pub fn linear_time_grid<T: Real>(t_max: T, n: usize) -> Result<Vec<T>> {
    if !(t_max > T::zero()) || n < 2 {
        return Err(Error::Argument("linear grid needs t_max > 0 and n >= 2".into()));
    }
    let step = t_max / T::from_usize_lossy(n - 1);
    Ok((0..n).map(|i| step * T::from_usize_lossy(i)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timescales<T: Real> {
    pub tau_min: T,
    pub tau_max: T,
    pub tau_lin: T,
    pub epsilon: T,
}

fn inverse_rate<T: Real>(rate: T) -> T {
    if rate > T::zero() {
        T::one() / rate
    } else {
        T::infinity()
    }
}

/// `τ_min⁻¹ = max Re(-λ_j)`, `τ_max⁻¹ = min Re(-λ_j)` over modes with
/// non-negligible weight, and `τ_lin = ε / Re(-Σ c_j λ_j)`.
///
/// `τ_lin` is `+∞` when the weighted rate vanishes to round-off, which is
/// always the case at a loss-free site.
pub fn timescales<T: Real>(eigenvalues: &[C<T>], weights: &[C<T>], epsilon: T) -> Result<Timescales<T>> {
    if eigenvalues.len() != weights.len() {
        return Err(Error::Argument("eigenvalue and weight counts differ".into()));
    }
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::Argument("epsilon must lie in (0, 1)".into()));
    }
    let rates: Vec<T> = eigenvalues
        .iter()
        .zip(weights)
        .filter(|(_, c)| c.norm() >= T::lit(WEIGHT_CUTOFF))
        .map(|(l, _)| -l.re)
        .collect();
    if rates.is_empty() {
        return Err(Error::Argument("all weights vanish".into()));
    }
    let fast = rates.iter().copied().fold(T::neg_infinity(), T::max);
    let slow = rates.iter().copied().fold(T::infinity(), T::min);
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(T::one(), T::max);
    let lin = -eigenvalues
        .iter()
        .zip(weights)
        .fold(C::<T>::zero(), |acc, (l, c)| acc + *l * *c)
        .re;
    let tau_lin = if lin > T::tol(1e-12) * scale {
        epsilon / lin
    } else {
        T::infinity()
    };
    Ok(Timescales {
        tau_min: inverse_rate(fast),
        tau_max: inverse_rate(slow),
        tau_lin,
        epsilon,
    })
}

/// Timescales of the qubit coherence for a model.
pub fn coherence_timescales<T: Real>(h: &EffectiveHamiltonian<T>, epsilon: T) -> Result<Timescales<T>> {
    let sd = decompose(h)?;
    timescales(&sd.eigenvalues, &overlap_weights(&sd, 0)?, epsilon)
}

/// Coherence decay rate `2 J1² / Γ₂` of a qubit coupled to a strongly
/// damped cavity.
pub fn strong_dissipative_rate<T: Real>(j1: T, gamma2: T) -> Result<T> {
    if !(gamma2 > T::zero()) {
        return Err(Error::Argument("Gamma2 must be positive".into()));
    }
    Ok(T::lit(2.0) * j1 * j1 / gamma2)
}

/// First-order eigenvalues of `L̃` for weak loss:
/// `λ_k = -i ε_k - ½ Σ_j Γ_j |⟨k|j⟩|²` with `H0|k⟩ = ε_k|k⟩`.
pub fn weak_dissipative_spectrum<T: Real>(h0: &Array2<T>, gammas: &[T]) -> Result<Vec<C<T>>> {
    let n = h0.nrows();
    if h0.ncols() != n || gammas.len() != n || n == 0 {
        return Err(Error::Argument("H0 must be square and match the loss vector".into()));
    }
    let tol = T::tol(1e-14) * h0.iter().map(|x| x.abs()).fold(T::one(), T::max);
    for i in 0..n {
        for j in 0..i {
            if (h0[[i, j]] - h0[[j, i]]).abs() > tol {
                return Err(Error::Argument("H0 is not symmetric".into()));
            }
        }
    }
    if gammas.iter().any(|g| !(*g >= T::zero())) {
        return Err(Error::Argument("loss rates must be non-negative".into()));
    }
    if gammas[0] != T::zero() {
        return Err(Error::Argument("the qubit (site 1) must be loss-free".into()));
    }
    let e = hermitian_eigen(&h0.mapv(creal))?;
    let half = T::lit(0.5);
    Ok((0..n)
        .map(|k| {
            let loss: T = (0..n).map(|j| gammas[j] * e.vectors[[j, k]].norm_sqr()).sum();
            cplx(-half * loss, -e.values[k])
        })
        .collect())
}

/// [`weak_dissipative_spectrum`] for the Hermitian part and loss of `H`.
pub fn weak_dissipative_spectrum_of<T: Real>(h: &EffectiveHamiltonian<T>) -> Result<Vec<C<T>>> {
    h.check_structure()?;
    let h0 = h.hermitian_part().mapv(|z| z.re);
    let gammas: Vec<T> = h.site_dissipation().iter().map(|&d| T::lit(2.0) * d).collect();
    weak_dissipative_spectrum(&h0, &gammas)
}

/// Rate `b` of a least-squares fit `ln C(t) ≈ a - b t` over samples with
/// `t0 ≤ t ≤ t1` and `C > 0`.
pub fn fit_decay_rate<T: Real>(trace: &CoherenceTrace<T>, t0: T, t1: T) -> Result<T> {
    let pts: Vec<(T, T)> = trace
        .times
        .iter()
        .zip(&trace.values)
        .filter(|(t, c)| **t >= t0 && **t <= t1 && **c > T::zero())
        .map(|(t, c)| (*t, c.ln()))
        .collect();
    crate::fit::linear_fit(&pts)
        .map(|f| -f.slope)
        .ok_or_else(|| Error::Argument("not enough samples in the fit window".into()))
}
