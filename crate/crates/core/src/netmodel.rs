//! Network descriptions and the effective non-Hermitian generators they
//! induce on the single-excitation coherence sector.
//!
//! Site indices are 0-based in this API; site 0 is the fiducial qubit.
//! The stored matrix is `H`, with the generator `L̃ = -iH`.

use ndarray::Array2;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_max, CMatrix};
use crate::scalar::{cplx, creal, times_minus_i, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteKind {
    Qubit,
    Cavity,
}

/// One site of the network. `loss_rate` is the Lindblad rate `Γ`, entering
/// the diagonal of `H` as `-iΓ/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteSpec<T: Real> {
    pub kind: SiteKind,
    pub detuning: T,
    pub loss_rate: T,
}

impl<T: Real> SiteSpec<T> {
    pub fn qubit(detuning: T) -> Self {
        Self {
            kind: SiteKind::Qubit,
            detuning,
            loss_rate: T::zero(),
        }
    }

    pub fn cavity(detuning: T, loss_rate: T) -> Self {
        Self {
            kind: SiteKind::Cavity,
            detuning,
            loss_rate,
        }
    }
}

/// Coherent hopping between sites `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T: Real> {
    pub i: usize,
    pub j: usize,
    pub amplitude: T,
}

impl<T: Real> Edge<T> {
    pub fn new(i: usize, j: usize, amplitude: T) -> Self {
        Self { i, j, amplitude }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkSpec<T: Real> {
    pub sites: Vec<SiteSpec<T>>,
    pub edges: Vec<Edge<T>>,
}

impl<T: Real> NetworkSpec<T> {
    pub fn new(sites: Vec<SiteSpec<T>>, edges: Vec<Edge<T>>) -> Self {
        Self { sites, edges }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sites.len();
        if n == 0 {
            return Err(Error::Spec("network has no sites".into()));
        }
        if self.sites[0].kind != SiteKind::Qubit {
            return Err(Error::Spec("site 1 must be the fiducial qubit".into()));
        }
        for (idx, s) in self.sites.iter().enumerate() {
            if !s.detuning.is_finite() {
                return Err(Error::Spec(format!("site {}: detuning not finite", idx + 1)));
            }
            if !s.loss_rate.is_finite() || s.loss_rate < T::zero() {
                return Err(Error::Spec(format!(
                    "site {}: loss rate must be finite and >= 0",
                    idx + 1
                )));
            }
            if s.kind == SiteKind::Qubit && s.loss_rate != T::zero() {
                return Err(Error::Spec(format!(
                    "site {} is a qubit but has nonzero loss rate",
                    idx + 1
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.edges {
            if e.i >= n || e.j >= n {
                return Err(Error::Spec(format!(
                    "edge ({}, {}) references a site outside 1..={n}",
                    e.i + 1,
                    e.j + 1
                )));
            }
            if e.i == e.j {
                return Err(Error::Spec(format!("self-loop on site {}", e.i + 1)));
            }
            if !e.amplitude.is_finite() {
                return Err(Error::Spec("edge amplitude not finite".into()));
            }
            if self.sites[e.i].kind == SiteKind::Qubit && self.sites[e.j].kind == SiteKind::Qubit {
                return Err(Error::Spec(format!(
                    "qubit-qubit hopping ({}, {}) is not allowed",
                    e.i + 1,
                    e.j + 1
                )));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::Spec(format!("duplicate edge ({}, {})", e.i + 1, e.j + 1)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpurityParams<T: Real> {
    pub j: T,
    pub kappa: T,
    pub gamma: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SshParams<T: Real> {
    pub j1: T,
    pub j2: T,
    pub gamma: T,
}

/// Three-site unit cell: intra-cell `j1` (1-2), `j2` (2-3), `j` (1-3),
/// inter-cell `j3` (3-1'), on-site `eps1`, `eps2`, and loss on site 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeSiteParams<T: Real> {
    pub j1: T,
    pub j2: T,
    pub j3: T,
    pub j: T,
    pub eps1: T,
    pub eps2: T,
    pub gamma: T,
}

/// Which generator a Hamiltonian was built from.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T: Real> {
    Custom(NetworkSpec<T>),
    Impurity { n: usize, params: ImpurityParams<T> },
    Ssh { n: usize, params: SshParams<T> },
    ThreeSite { n: usize, params: ThreeSiteParams<T> },
}

impl<T: Real> Model<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Custom(_) => "custom",
            Model::Impurity { .. } => "impurity",
            Model::Ssh { .. } => "ssh",
            Model::ThreeSite { .. } => "three-site",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Model::Custom(s) => s.len(),
            Model::Impurity { n, .. } | Model::Ssh { n, .. } | Model::ThreeSite { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sites per unit cell (1 for models without a cell structure).
    pub fn cell_size(&self) -> usize {
        match self {
            Model::Ssh { .. } => 2,
            Model::ThreeSite { .. } => 3,
            _ => 1,
        }
    }

    /// Largest loss rate in the `-iΓ` convention of the lattice models, used
    /// as the dissipation scale for default thresholds.
    pub fn dissipation_scale(&self) -> T {
        match self {
            Model::Custom(s) => s
                .sites
                .iter()
                .map(|x| x.loss_rate / T::lit(2.0))
                .fold(T::zero(), T::max),
            Model::Impurity { params, .. } => params.gamma / T::lit(2.0),
            Model::Ssh { params, .. } => params.gamma,
            Model::ThreeSite { params, .. } => params.gamma,
        }
    }

    /// Same model at a different size; custom networks are returned as-is.
    pub fn with_len(&self, n: usize) -> Self {
        match self.clone() {
            Model::Custom(s) => Model::Custom(s),
            Model::Impurity { params, .. } => Model::Impurity { n, params },
            Model::Ssh { params, .. } => Model::Ssh { n, params },
            Model::ThreeSite { params, .. } => Model::ThreeSite { n, params },
        }
    }

    pub fn network_spec(&self) -> Result<NetworkSpec<T>> {
        match self {
            Model::Custom(s) => Ok(s.clone()),
            Model::Impurity { n, params } => impurity_network(*n, params),
            Model::Ssh { n, params } => ssh_network(*n, params),
            Model::ThreeSite { n, params } => three_site_network(*n, params),
        }
    }

    pub fn build(&self) -> Result<EffectiveHamiltonian<T>> {
        let spec = self.network_spec()?;
        let mut h = build_effective_hamiltonian(&spec)?;
        h.model = self.clone();
        Ok(h)
    }
}

/// Dense `H` of the generator `L̃ = -iH`, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian<T: Real> {
    matrix: CMatrix<T>,
    model: Model<T>,
    detuning_disorder: bool,
}

impl<T: Real> EffectiveHamiltonian<T> {
    /// Wraps an arbitrary matrix as a custom model. The matrix must be
    /// square; no further structure is checked here.
    pub fn from_matrix(matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::Size("effective Hamiltonian must be square and non-empty".into()));
        }
        Ok(Self {
            matrix,
            model: Model::Custom(NetworkSpec::default()),
            detuning_disorder: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn model(&self) -> &Model<T> {
        &self.model
    }

    pub fn has_detuning_disorder(&self) -> bool {
        self.detuning_disorder
    }

    pub fn cell_size(&self) -> usize {
        self.model.cell_size()
    }

    /// `L̃ = -iH`.
    pub fn generator(&self) -> CMatrix<T> {
        self.matrix.mapv(times_minus_i)
    }

    pub fn max_abs(&self) -> T {
        norm_max(&self.matrix)
    }

    /// Per-site dissipation `-Im H_jj`.
    pub fn site_dissipation(&self) -> Vec<T> {
        (0..self.dim()).map(|i| -self.matrix[[i, i]].im).collect()
    }

    /// Hermitian part `(H + H†)/2`.
    pub fn hermitian_part(&self) -> CMatrix<T> {
        let h = &self.matrix;
        let half = creal(T::lit(0.5));
        Array2::from_shape_fn(h.raw_dim(), |(i, j)| (h[[i, j]] + h[[j, i]].conj()) * half)
    }

    /// Checks that the Hermitian part is real symmetric and that the
    /// anti-Hermitian part is diagonal with non-positive imaginary entries.
    pub fn check_structure(&self) -> Result<()> {
        let n = self.dim();
        let tol = T::tol(1e-14) * self.max_abs().max(T::one());
        for i in 0..n {
            if self.matrix[[i, i]].im > tol {
                return Err(Error::Spec(format!("site {} has gain", i + 1)));
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let a = self.matrix[[i, j]];
                if a.im.abs() > tol || (a - self.matrix[[j, i]]).norm() > tol {
                    return Err(Error::Spec(format!(
                        "off-diagonal ({}, {}) is not real symmetric",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `H + diag(mu)`; the anti-Hermitian part is untouched.
    pub fn with_detuning(&self, mu: &[T]) -> Result<Self> {
        if mu.len() != self.dim() {
            return Err(Error::Spec(format!(
                "detuning vector has length {}, expected {}",
                mu.len(),
                self.dim()
            )));
        }
        let mut out = self.clone();
        for (i, &m) in mu.iter().enumerate() {
            out.matrix[[i, i]].re += m;
        }
        out.detuning_disorder = true;
        Ok(out)
    }
}

/// Builds `H` from a network: `H_ii = ω_i - iΓ_i/2`, `H_ij = H_ji = J_ij`.
pub fn build_effective_hamiltonian<T: Real>(spec: &NetworkSpec<T>) -> Result<EffectiveHamiltonian<T>> {
    spec.validate()?;
    let n = spec.len();
    let mut m = Array2::<C<T>>::zeros((n, n));
    let half = T::lit(0.5);
    for (i, s) in spec.sites.iter().enumerate() {
        m[[i, i]] = cplx(s.detuning, -half * s.loss_rate);
    }
    for e in &spec.edges {
        m[[e.i, e.j]] = creal(e.amplitude);
        m[[e.j, e.i]] = creal(e.amplitude);
    }
    Ok(EffectiveHamiltonian {
        matrix: m,
        model: Model::Custom(spec.clone()),
        detuning_disorder: false,
    })
}

fn impurity_network<T: Real>(n: usize, p: &ImpurityParams<T>) -> Result<NetworkSpec<T>> {
    if n < 2 {
        return Err(Error::Size(format!("impurity model needs N >= 2, got {n}")));
    }
    if p.gamma < T::zero() {
        return Err(Error::Spec("impurity model needs Gamma >= 0".into()));
    }
    let mut sites = vec![SiteSpec::qubit(T::zero())];
    sites.extend((1..n).map(|_| SiteSpec::cavity(T::zero(), p.gamma)));
    let mut edges = vec![Edge::new(0, 1, p.kappa)];
    edges.extend((1..n - 1).map(|s| Edge::new(s, s + 1, p.j)));
    Ok(NetworkSpec::new(sites, edges))
}

// The lattice models carry -iΓ (not -iΓ/2) on lossy sites, hence the
// network loss rate 2Γ.
fn ssh_network<T: Real>(n: usize, p: &SshParams<T>) -> Result<NetworkSpec<T>> {
    if n < 2 {
        return Err(Error::Size(format!("SSH model needs N >= 2, got {n}")));
    }
    if p.gamma < T::zero() {
        return Err(Error::Spec("SSH model needs Gamma >= 0".into()));
    }
    let two = T::lit(2.0);
    let sites = (0..n)
        .map(|s| match s {
            0 => SiteSpec::qubit(T::zero()),
            s if s % 2 == 1 => SiteSpec::cavity(T::zero(), two * p.gamma),
            _ => SiteSpec::cavity(T::zero(), T::zero()),
        })
        .collect();
    let edges = (0..n - 1)
        .map(|s| Edge::new(s, s + 1, if s % 2 == 0 { p.j1 } else { p.j2 }))
        .collect();
    Ok(NetworkSpec::new(sites, edges))
}

fn three_site_network<T: Real>(n: usize, p: &ThreeSiteParams<T>) -> Result<NetworkSpec<T>> {
    if n < 3 {
        return Err(Error::Size(format!("three-site model needs N >= 3, got {n}")));
    }
    if p.gamma < T::zero() {
        return Err(Error::Spec("three-site model needs Gamma >= 0".into()));
    }
    let two = T::lit(2.0);
    let sites = (0..n)
        .map(|s| match (s, s % 3) {
            (0, _) => SiteSpec::qubit(p.eps1),
            (_, 0) => SiteSpec::cavity(p.eps1, T::zero()),
            (_, 1) => SiteSpec::cavity(p.eps2, T::zero()),
            _ => SiteSpec::cavity(T::zero(), two * p.gamma),
        })
        .collect();
    let mut edges = Vec::new();
    for s in 0..n {
        match s % 3 {
            0 => {
                if s + 1 < n {
                    edges.push(Edge::new(s, s + 1, p.j1));
                }
                if s + 2 < n {
                    edges.push(Edge::new(s, s + 2, p.j));
                }
            }
            1 if s + 1 < n => edges.push(Edge::new(s, s + 1, p.j2)),
            2 if s + 1 < n => edges.push(Edge::new(s, s + 1, p.j3)),
            _ => {}
        }
    }
    Ok(NetworkSpec::new(sites, edges))
}

/// Qubit coupled by `kappa` to the first of `N - 1` lossy cavities in a
/// chain with hopping `j`, in the qubit's rotating frame.
pub fn build_impurity_model<T: Real>(n: usize, j: T, kappa: T, gamma: T) -> Result<EffectiveHamiltonian<T>> {
    Model::Impurity {
        n,
        params: ImpurityParams { j, kappa, gamma },
    }
    .build()
}

/// Open SSH chain: bonds alternate `j1`, `j2`; loss `-iΓ` on every second site.
pub fn build_ssh_model<T: Real>(n: usize, j1: T, j2: T, gamma: T) -> Result<EffectiveHamiltonian<T>> {
    Model::Ssh {
        n,
        params: SshParams { j1, j2, gamma },
    }
    .build()
}

/// Open chain of three-site cells, truncated after `n` sites.
pub fn build_three_site_model<T: Real>(n: usize, params: ThreeSiteParams<T>) -> Result<EffectiveHamiltonian<T>> {
    Model::ThreeSite { n, params }.build()
}

pub fn apply_detuning_disorder<T: Real>(h: &EffectiveHamiltonian<T>, mu: &[T]) -> Result<EffectiveHamiltonian<T>> {
    h.with_detuning(mu)
}

/// Matrix of the full Lindbladian restricted to the `(N+1)²`-dimensional
/// single-excitation operator space.
///
/// Basis order: `|0⟩⟨0|`, then `|0⟩⟨j|` (j = 1..N), then `|j⟩⟨0|`, then
/// `|i⟩⟨j|` row-major. Column `c` holds the image of basis element `c`.
#[derive(Debug, Clone)]
pub struct Superoperator<T: Real> {
    n: usize,
    matrix: CMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub const VACUUM: usize = 0;

    /// Index of `|0⟩⟨j|`.
    pub fn ket_vacuum(&self, j: usize) -> usize {
        1 + j
    }

    /// Index of `|j⟩⟨0|`.
    pub fn bra_vacuum(&self, j: usize) -> usize {
        1 + self.n + j
    }

    /// Index of `|i⟩⟨j|`.
    pub fn excited(&self, i: usize, j: usize) -> usize {
        1 + 2 * self.n + i * self.n + j
    }

    /// Which direct-sum block an index belongs to: 0 vacuum, 1 `V01`,
    /// 2 `V10`, 3 `V11`.
    pub fn block_of(&self, idx: usize) -> usize {
        match idx {
            0 => 0,
            i if i <= self.n => 1,
            i if i <= 2 * self.n => 2,
            _ => 3,
        }
    }

    /// Whether `(row, col)` lies in one of the blocks allowed to be nonzero.
    pub fn block_allowed(&self, row: usize, col: usize) -> bool {
        let (br, bc) = (self.block_of(row), self.block_of(col));
        br == bc && br != 0 || (br == 0 && bc == 3)
    }
}

pub fn build_full_superoperator<T: Real>(spec: &NetworkSpec<T>) -> Result<Superoperator<T>> {
    Superoperator::from_hamiltonian(&build_effective_hamiltonian(spec)?)
}

impl<T: Real> Superoperator<T> {
    /// Lifts a structured `H` (real symmetric hopping, diagonal loss) back
    /// to the full Lindbladian on `V`, with `Γ_j = -2 Im H_jj`.
    pub fn from_hamiltonian(h: &EffectiveHamiltonian<T>) -> Result<Self> {
        h.check_structure()?;
        let n = h.dim();
        let herm = h.hermitian_part();
        let gamma: Vec<T> = h.site_dissipation().iter().map(|&d| T::lit(2.0) * d).collect();
        let dim = (n + 1) * (n + 1);
        let mut so = Superoperator {
            n,
            matrix: Array2::zeros((dim, dim)),
        };
        let i_unit = cplx(T::zero(), T::one());
        let half = T::lit(0.5);
        let mut m = Array2::<C<T>>::zeros((dim, dim));
        for j in 0..n {
            // |0><j| -> i Σ_k H_jk |0><k| - Γ_j/2 |0><j|
            let c = so.ket_vacuum(j);
            for k in 0..n {
                if !herm[[j, k]].is_zero() {
                    m[[so.ket_vacuum(k), c]] += i_unit * herm[[j, k]];
                }
            }
            m[[c, c]] += creal(-half * gamma[j]);
            // |j><0| -> -i Σ_k H_kj |k><0| - Γ_j/2 |j><0|
            let c = so.bra_vacuum(j);
            for k in 0..n {
                if !herm[[k, j]].is_zero() {
                    m[[so.bra_vacuum(k), c]] += -i_unit * herm[[k, j]];
                }
            }
            m[[c, c]] += creal(-half * gamma[j]);
        }
        for i in 0..n {
            for j in 0..n {
                let c = so.excited(i, j);
                for k in 0..n {
                    if !herm[[k, i]].is_zero() {
                        m[[so.excited(k, j), c]] += -i_unit * herm[[k, i]];
                    }
                    if !herm[[j, k]].is_zero() {
                        m[[so.excited(i, k), c]] += i_unit * herm[[j, k]];
                    }
                }
                m[[c, c]] += creal(-half * (gamma[i] + gamma[j]));
                if i == j {
                    m[[Self::VACUUM, c]] += creal(gamma[i]);
                }
            }
        }
        so.matrix = m;
        Ok(so)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        cplx(re, im)
    }

    #[test]
    fn qubit_cavity_pair() {
        let spec = NetworkSpec::new(
            vec![SiteSpec::qubit(0.0), SiteSpec::cavity(0.0, 3.0)],
            vec![Edge::new(0, 1, 0.7)],
        );
        let h = build_effective_hamiltonian(&spec).unwrap();
        let m = h.matrix();
        assert_eq!(m[[0, 0]], c(0.0, 0.0));
        assert_eq!(m[[0, 1]], c(0.7, 0.0));
        assert_eq!(m[[1, 0]], c(0.7, 0.0));
        assert_eq!(m[[1, 1]], c(0.0, -1.5));
        h.check_structure().unwrap();
    }

    #[test]
    fn no_edges_is_diagonal() {
        let spec = NetworkSpec::new(
            vec![
                SiteSpec::qubit(0.3),
                SiteSpec::cavity(-1.0, 2.0),
                SiteSpec::cavity(0.5, 0.0),
            ],
            vec![],
        );
        let h = build_effective_hamiltonian(&spec).unwrap();
        let want = [c(0.3, 0.0), c(-1.0, -1.0), c(0.5, 0.0)];
        for ((i, j), z) in h.matrix().indexed_iter() {
            let w = if i == j { want[i] } else { c(0.0, 0.0) };
            assert_eq!(*z, w);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let q = SiteSpec::qubit(0.0);
        let cav = SiteSpec::cavity(0.0, 1.0);
        let bad = [
            NetworkSpec::new(vec![], vec![]),
            NetworkSpec::new(vec![cav, q], vec![]),
            NetworkSpec::new(vec![SiteSpec { loss_rate: 1.0, ..q }, cav], vec![]),
            NetworkSpec::new(vec![q, cav], vec![Edge::new(0, 2, 1.0)]),
            NetworkSpec::new(vec![q, cav], vec![Edge::new(1, 1, 1.0)]),
            NetworkSpec::new(vec![q, cav], vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 2.0)]),
            NetworkSpec::new(vec![q, q], vec![Edge::new(0, 1, 1.0)]),
            NetworkSpec::new(vec![q, SiteSpec::cavity(0.0, -1.0)], vec![]),
            NetworkSpec::new(vec![q, SiteSpec::cavity(f64::NAN, 1.0)], vec![]),
        ];
        for s in &bad {
            assert!(matches!(build_effective_hamiltonian(s), Err(Error::Spec(_))), "{s:?}");
        }
    }

    #[test]
    fn impurity_smallest() {
        let h = build_impurity_model(2, 123.0, 1.0, 4.0).unwrap();
        assert_eq!(h.matrix()[[0, 0]], c(0.0, 0.0));
        assert_eq!(h.matrix()[[0, 1]], c(1.0, 0.0));
        assert_eq!(h.matrix()[[1, 1]], c(0.0, -2.0));
        assert!(matches!(build_impurity_model(1, 1.0, 1.0, 1.0), Err(Error::Size(_))));
    }

    #[test]
    fn impurity_chain() {
        let h = build_impurity_model(4, 1.0, 0.5, 4.0).unwrap();
        let m = h.matrix();
        assert_eq!(m[[0, 1]], c(0.5, 0.0));
        assert_eq!(m[[1, 2]], c(1.0, 0.0));
        assert_eq!(m[[2, 3]], c(1.0, 0.0));
        assert_eq!(m[[0, 2]], c(0.0, 0.0));
        for s in 1..4 {
            assert_eq!(m[[s, s]], c(0.0, -2.0));
        }
        assert_eq!(h.model().name(), "impurity");
    }

    #[test]
    fn ssh_layout() {
        let h = build_ssh_model(2, 1.0, 1.8, 0.5).unwrap();
        assert_eq!(h.matrix()[[0, 1]], c(1.0, 0.0));
        assert_eq!(h.matrix()[[1, 1]], c(0.0, -0.5));
        let h = build_ssh_model(5, 1.0, 1.8, 0.5).unwrap();
        let m = h.matrix();
        let bonds = [1.0, 1.8, 1.0, 1.8];
        for (s, &b) in bonds.iter().enumerate() {
            assert_eq!(m[[s, s + 1]], c(b, 0.0));
        }
        let loss: Vec<f64> = h.site_dissipation();
        assert_eq!(loss, vec![0.0, 0.5, 0.0, 0.5, 0.0]);
        assert_eq!(h.cell_size(), 2);
    }

    fn two_dark_chain() -> ThreeSiteParams<f64> {
        ThreeSiteParams {
            j1: 1.0,
            j2: 0.3,
            j3: 2.0,
            j: 0.7,
            eps1: 0.1,
            eps2: -0.2,
            gamma: 0.5,
        }
    }

    #[test]
    fn three_site_single_cell() {
        let p = two_dark_chain();
        let h = build_three_site_model(3, p).unwrap();
        let want = [
            [c(0.1, 0.0), c(1.0, 0.0), c(0.7, 0.0)],
            [c(1.0, 0.0), c(-0.2, 0.0), c(0.3, 0.0)],
            [c(0.7, 0.0), c(0.3, 0.0), c(0.0, -0.5)],
        ];
        for ((i, j), z) in h.matrix().indexed_iter() {
            assert_eq!(*z, want[i][j]);
        }
    }

    #[test]
    fn three_site_truncation() {
        let h = build_three_site_model(5, two_dark_chain()).unwrap();
        let m = h.matrix();
        assert_eq!(m[[2, 3]], c(2.0, 0.0));
        assert_eq!(m[[3, 4]], c(1.0, 0.0));
        // site 4 (0-based 3) would couple by J to site 6, which is cut
        let nnz = m.iter().filter(|z| **z != c(0.0, 0.0)).count();
        // 5 diagonal (site 6 absent; site 3 lossy) + 2*(4 nn + 1 nnn)
        assert_eq!(nnz, 5 + 10);
        assert!(matches!(
            build_three_site_model(2, two_dark_chain()),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn detuning_shift() {
        let h = build_ssh_model(4, 1.0, 1.8, 0.5).unwrap();
        assert_eq!(apply_detuning_disorder(&h, &[0.0; 4]).unwrap().matrix(), h.matrix());
        let d = apply_detuning_disorder(&h, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(d.has_detuning_disorder());
        assert_eq!(d.matrix()[[1, 1]], c(0.2, -0.5));
        assert_eq!(d.site_dissipation(), h.site_dissipation());
        assert!(matches!(apply_detuning_disorder(&h, &[0.0; 3]), Err(Error::Spec(_))));
    }

    #[test]
    fn structure_check_flags_gain() {
        let mut m = Array2::<C<f64>>::zeros((2, 2));
        m[[1, 1]] = c(0.0, 0.5);
        assert!(EffectiveHamiltonian::from_matrix(m).unwrap().check_structure().is_err());
    }

    fn chain3() -> NetworkSpec<f64> {
        NetworkSpec::new(
            vec![
                SiteSpec::qubit(0.2),
                SiteSpec::cavity(0.0, 4.0),
                SiteSpec::cavity(-0.3, 1.0),
            ],
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 0.6), Edge::new(0, 2, 0.4)],
        )
    }

    #[test]
    fn superoperator_blocks_match_reduction() {
        let spec = chain3();
        let h = build_effective_hamiltonian(&spec).unwrap();
        let g = h.generator();
        let so = build_full_superoperator(&spec).unwrap();
        let m = so.matrix();
        assert_eq!(so.dim(), 16);
        for a in 0..3 {
            for b in 0..3 {
                let v10 = m[[so.bra_vacuum(a), so.bra_vacuum(b)]];
                let v01 = m[[so.ket_vacuum(a), so.ket_vacuum(b)]];
                assert!((v10 - g[[a, b]]).norm() < 1e-14);
                assert!((v01 - g[[a, b]].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn superoperator_dissipator_and_trace() {
        let spec = chain3();
        let so = build_full_superoperator(&spec).unwrap();
        let m = so.matrix();
        // steady state
        assert!(m.column(Superoperator::<f64>::VACUUM).iter().all(|z| *z == c(0.0, 0.0)));
        // D(|0><j|) sits on the diagonal
        assert_eq!(m[[so.ket_vacuum(1), so.ket_vacuum(1)]], c(-2.0, 0.0));
        // trace functional: vacuum + diagonal populations
        for col in 0..so.dim() {
            let mut s = m[[0, col]];
            for i in 0..3 {
                s += m[[so.excited(i, i), col]];
            }
            assert!(s.norm() < 1e-14, "column {col}");
        }
        for r in 0..so.dim() {
            for col in 0..so.dim() {
                if !so.block_allowed(r, col) {
                    assert_eq!(m[[r, col]], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn model_helpers() {
        let m = Model::Ssh {
            n: 4,
            params: SshParams {
                j1: 1.0,
                j2: 1.8,
                gamma: 0.5,
            },
        };
        assert_eq!(m.with_len(7).len(), 7);
        assert_eq!(m.dissipation_scale(), 0.5);
        let h = build_impurity_model::<f32>(3, 1.0, 0.5, 4.0).unwrap();
        assert_eq!(h.matrix()[[2, 2]], cplx(0.0f32, -2.0));
    }
}
