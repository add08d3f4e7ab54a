//! Biorthogonal spectral decomposition of `L̃ = -iH` and edge-mode analysis.

use ndarray::Array2;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, eigen, norm_fro, CMatrix};
use crate::netmodel::EffectiveHamiltonian;
use crate::scalar::{Real, C};

/// Above this eigenvector condition number the decomposition is flagged
/// as near-defective.
pub const DEGENERACY_CONDITION: f64 = 1e10;

/// Eigenvalues closer than this share an aggregated projector.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Spectral data of `L̃`: eigenvalues `λ_j`, right vectors `r_j`, left
/// vectors `l_j` with `l_i† r_j = δ_ij`, so that `P_j = r_j l_j†`.
#[derive(Debug, Clone)]
pub struct SpectralData<T: Real> {
    pub eigenvalues: Vec<C<T>>,
    pub right_vectors: CMatrix<T>,
    pub left_vectors: CMatrix<T>,
    /// `‖R‖_F ‖R⁻¹‖_F / N`; equals 1 for a normal generator.
    pub condition: T,
    /// Set when `condition` exceeds [`DEGENERACY_CONDITION`].
    pub degeneracy_warning: bool,
    decay_rates: Vec<T>,
    clusters: Vec<Vec<usize>>,
    cell_size: usize,
    dissipation_scale: T,
}

impl<T: Real> SpectralData<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Decay rate `-Re λ_j` of every mode.
    ///
    /// When the dissipation of `H` is diagonal this is evaluated as the
    /// loss-weighted norm `Σ_i (-Im H_ii)|r_j,i|²`, which keeps relative
    /// accuracy for exponentially small rates.
    pub fn decay_rates(&self) -> &[T] {
        &self.decay_rates
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }

    /// Groups of (near-)degenerate eigenvalue indices.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Default quasi-dark threshold: `1e-3` times the model's loss scale.
    pub fn default_eps_dark(&self) -> T {
        let g = self.dissipation_scale;
        if g > T::zero() {
            T::lit(1e-3) * g
        } else {
            T::lit(1e-3)
        }
    }

    pub fn right(&self, j: usize) -> Vec<C<T>> {
        self.right_vectors.column(j).to_vec()
    }

    pub fn left(&self, j: usize) -> Vec<C<T>> {
        self.left_vectors.column(j).to_vec()
    }

    /// `|⟨site|r_j⟩|² / ‖r_j‖²`: population of `site` in the normalized
    /// right eigenvector.
    pub fn site_population(&self, j: usize, site: usize) -> T {
        let col = self.right_vectors.column(j);
        let norm2: T = col.iter().map(|z| z.norm_sqr()).sum();
        col[site].norm_sqr() / norm2
    }

    /// `Σ_j λ_j r_j l_j†`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.len();
        Array2::from_shape_fn((n, n), |(a, b)| {
            (0..n).fold(C::<T>::zero(), |acc, j| {
                acc + self.eigenvalues[j] * self.right_vectors[[a, j]] * self.left_vectors[[b, j]].conj()
            })
        })
    }

    /// `Σ_j r_j l_j†`.
    pub fn completeness(&self) -> CMatrix<T> {
        self.right_vectors.dot(&linalg::adjoint(&self.left_vectors))
    }
}

pub fn decompose<T: Real>(h: &EffectiveHamiltonian<T>) -> Result<SpectralData<T>> {
    let gen = h.generator();
    if gen.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("non-finite Hamiltonian".into()));
    }
    let e = eigen(&gen, T::tol(CLUSTER_TOL))?;
    let n = e.values.len();
    let condition = if n == 0 {
        T::one()
    } else {
        norm_fro(&e.right) * norm_fro(&e.left) / T::from_usize_lossy(n)
    };
    let diagonal_loss = h.check_structure().is_ok();
    let loss = h.site_dissipation();
    let decay_rates = (0..n)
        .map(|j| {
            if diagonal_loss {
                let norm2: T = (0..n).map(|i| e.right[[i, j]].norm_sqr()).sum();
                (0..n).map(|i| loss[i] * e.right[[i, j]].norm_sqr()).sum::<T>() / norm2
            } else {
                -e.values[j].re
            }
        })
        .collect();
    let clusters = linalg::eig_clusters(&e.values, T::tol(CLUSTER_TOL));
    Ok(SpectralData {
        degeneracy_warning: !condition.is_finite() || condition > T::lit(DEGENERACY_CONDITION),
        eigenvalues: e.values,
        right_vectors: e.right,
        left_vectors: e.left,
        condition,
        decay_rates,
        clusters,
        cell_size: h.cell_size(),
        dissipation_scale: h.model().dissipation_scale(),
    })
}

/// Weights `c_j = ⟨site|r_j⟩⟨l_j|site⟩ = ⟨site|P_j|site⟩`, summing to one.
pub fn overlap_weights<T: Real>(sd: &SpectralData<T>, site: usize) -> Result<Vec<C<T>>> {
    if site >= sd.len() {
        return Err(Error::Argument(format!(
            "site {} out of range 1..={}",
            site + 1,
            sd.len()
        )));
    }
    Ok((0..sd.len())
        .map(|j| sd.right_vectors[[site, j]] * sd.left_vectors[[site, j]].conj())
        .collect())
}

/// Weights with the projectors of each degenerate cluster summed; every
/// member of a cluster reports the cluster total.
pub fn cluster_weights<T: Real>(sd: &SpectralData<T>, site: usize) -> Result<Vec<C<T>>> {
    let mut w = overlap_weights(sd, site)?;
    for c in sd.clusters() {
        if c.len() > 1 {
            let total = c.iter().fold(C::<T>::zero(), |acc, &j| acc + w[j]);
            for &j in c {
                w[j] = total;
            }
        }
    }
    Ok(w)
}

/// Peak site and exponential localization length of a mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationProfile<T: Real> {
    /// 0-based site of the largest `|component|²`.
    pub site: usize,
    /// Localization length in lattice sites (`+∞` when no fit is possible).
    pub length: T,
    pub r_squared: T,
    pub delocalized: bool,
}

/// Minimum normalized weight for a component to enter the fit.
pub const FIT_WEIGHT_FLOOR: f64 = 1e-14;

/// Fit `ln|v_n|² ≈ a - n/ℓ` over the sublattice (residue class modulo
/// `period`) that carries the most weight. Fewer than three usable points
/// give an infinite length, flagged delocalized.
pub fn localization_profile<T: Real>(v: &[C<T>], period: usize) -> Result<LocalizationProfile<T>> {
    let w: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    let total: T = w.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Argument("localization of a zero vector".into()));
    }
    let period = period.max(1);
    let site = w
        .iter()
        .enumerate()
        .fold((0, T::zero()), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
        .0;
    let residue = (0..period)
        .map(|r| (r, w.iter().skip(r).step_by(period).copied().sum::<T>()))
        .fold((0, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc })
        .0;
    let pts: Vec<(T, T)> = w
        .iter()
        .enumerate()
        .skip(residue)
        .step_by(period)
        .filter(|(_, &x)| x / total > T::lit(FIT_WEIGHT_FLOOR))
        .map(|(i, &x)| (T::from_usize_lossy(i), (x / total).ln()))
        .collect();
    let fit = crate::fit::linear_fit(&pts);
    let (length, r_squared, delocalized) = match fit {
        Some(f) if f.slope != T::zero() && pts.len() >= 3 => {
            let len = T::one() / f.slope.abs();
            (len, f.r_squared, f.r_squared < T::lit(0.9))
        }
        Some(f) => (T::infinity(), f.r_squared, true),
        None => (T::infinity(), T::zero(), true),
    };
    Ok(LocalizationProfile {
        site,
        length,
        r_squared,
        delocalized,
    })
}

/// A mode of `L̃` with its localization data.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMode<T: Real> {
    pub index: usize,
    pub eigenvalue: C<T>,
    pub decay_rate: T,
    /// 0-based.
    pub localization_site: usize,
    pub localization_length: T,
    pub delocalized: bool,
    /// `|⟨1|P_j|1⟩|`, cluster-aggregated for degenerate eigenvalues.
    pub overlap_site1: T,
}

/// Overlap threshold for counting a mode as sitting on the qubit.
pub const QUBIT_OVERLAP_THRESHOLD: f64 = 0.1;

impl<T: Real> EdgeMode<T> {
    /// Peak in the first unit cell and `overlap_site1 > threshold`.
    pub fn localized_at_qubit(&self, cell_size: usize, overlap_threshold: T) -> bool {
        self.localization_site < cell_size.max(1) && self.overlap_site1 > overlap_threshold
    }
}

/// Mode description for every eigenvalue, in decomposition order.
pub fn describe_modes<T: Real>(sd: &SpectralData<T>) -> Result<Vec<EdgeMode<T>>> {
    let w = cluster_weights(sd, 0)?;
    (0..sd.len())
        .map(|j| {
            let prof = localization_profile(&sd.right(j), sd.cell_size())?;
            Ok(EdgeMode {
                index: j,
                eigenvalue: sd.eigenvalues[j],
                decay_rate: sd.decay_rates[j],
                localization_site: prof.site,
                localization_length: prof.length,
                delocalized: prof.delocalized,
                overlap_site1: w[j].norm(),
            })
        })
        .collect()
}

/// Modes with `decay_rate < eps_dark`, slowest first.
pub fn find_quasi_dark_modes<T: Real>(sd: &SpectralData<T>, eps_dark: T) -> Result<Vec<EdgeMode<T>>> {
    if !(eps_dark > T::zero()) {
        return Err(Error::Argument("eps_dark must be positive".into()));
    }
    let mut modes: Vec<EdgeMode<T>> = describe_modes(sd)?
        .into_iter()
        .filter(|m| m.decay_rate < eps_dark)
        .collect();
    modes.sort_by(|a, b| {
        a.decay_rate
            .partial_cmp(&b.decay_rate)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(modes)
}
