//! Ensembles of random on-site detuning and the averaged coherence.
//!
//! Realization `r` draws its detunings from a ChaCha8 stream seeded with
//! `mix_seed(base_seed, r)`; each variate is `μ(2u - 1)` with `u` built from
//! the top 53 bits of one `u64`. Realizations run in parallel but are
//! aggregated by index, so results do not depend on scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{coherence_trace, CoherenceTrace, Method};
use crate::error::{Error, Result};
use crate::netmodel::{apply_detuning_disorder, EffectiveHamiltonian, Model};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DisorderConfig<T: Real> {
    /// Half-width of the uniform detuning distribution.
    pub mu: T,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub model: Model<T>,
    pub times: Vec<T>,
    /// Sites that receive disorder; `None` means all of them. Masked-out
    /// sites still consume a variate so streams stay aligned across masks.
    pub site_mask: Option<Vec<bool>>,
    pub keep_per_realization: bool,
}

impl<T: Real> DisorderConfig<T> {
    pub fn new(model: Model<T>, mu: T, n_realizations: usize, base_seed: u64, times: Vec<T>) -> Self {
        Self {
            mu,
            n_realizations,
            base_seed,
            model,
            times,
            site_mask: None,
            keep_per_realization: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= T::zero()) || !self.mu.is_finite() {
            return Err(Error::Argument(format!(
                "disorder width must be finite and >= 0, got {}",
                self.mu
            )));
        }
        if self.n_realizations == 0 {
            return Err(Error::Argument("need at least one realization".into()));
        }
        if let Some(m) = &self.site_mask {
            if m.len() != self.model.len() {
                return Err(Error::Spec(format!(
                    "site mask has {} entries for {} sites",
                    m.len(),
                    self.model.len()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult<T: Real> {
    pub mean_trace: CoherenceTrace<T>,
    /// Standard error of the mean at each time.
    pub stderr_trace: Vec<T>,
    /// Successful realizations, in index order (empty unless requested).
    pub per_realization: Vec<(usize, Vec<T>)>,
    pub n_ok: usize,
    /// Skipped realizations and why.
    pub failures: Vec<(usize, Error)>,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-realization seed.
pub fn mix_seed(base_seed: u64, r: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(r))
}

/// Uniform in `[0, 1)` from the top 53 bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Detunings of realization `r`.
pub fn draw_detunings<T: Real>(cfg: &DisorderConfig<T>, r: usize) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.base_seed, r as u64));
    (0..cfg.model.len())
        .map(|i| {
            let u = T::lit(2.0 * unit(&mut rng) - 1.0);
            match &cfg.site_mask {
                Some(m) if !m[i] => T::zero(),
                _ => cfg.mu * u,
            }
        })
        .collect()
}

fn realization<T: Real>(
    cfg: &DisorderConfig<T>,
    clean: &EffectiveHamiltonian<T>,
    r: usize,
) -> Result<CoherenceTrace<T>> {
    let h = apply_detuning_disorder(clean, &draw_detunings(cfg, r))?;
    let tr = coherence_trace(&h, &cfg.times)?;
    if tr.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite coherence in realization {r}")));
    }
    Ok(tr)
}

pub fn run_ensemble<T: Real>(cfg: &DisorderConfig<T>) -> Result<EnsembleResult<T>> {
    cfg.validate()?;
    let clean = cfg.model.build()?;
    let outcomes: Vec<Result<CoherenceTrace<T>>> = (0..cfg.n_realizations)
        .into_par_iter()
        .map(|r| realization(cfg, &clean, r))
        .collect();

    let mut ok = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    // report the fallback if any realization needed it
    let mut method = Method::Spectral;
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(tr) => {
                if tr.method != Method::Spectral {
                    method = tr.method;
                }
                ok.push((r, tr.values))
            }
            Err(e) => failures.push((r, e)),
        }
    }
    if ok.is_empty() {
        return Err(Error::Numeric(format!(
            "all {} realizations failed; first: {}",
            failures.len(),
            failures[0].1
        )));
    }
    let samples: Vec<&[T]> = ok.iter().map(|(_, v)| v.as_slice()).collect();
    let (mean, stderr) = aggregate(&samples);
    Ok(EnsembleResult {
        mean_trace: CoherenceTrace {
            times: cfg.times.clone(),
            values: mean,
            method,
        },
        stderr_trace: stderr,
        n_ok: ok.len(),
        per_realization: if cfg.keep_per_realization { ok } else { Vec::new() },
        failures,
    })
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Default)]
struct Neumaier<T> {
    sum: T,
    c: T,
}

impl<T: Real> Neumaier<T> {
    fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> T {
        self.sum + self.c
    }
}

/// Pointwise mean and standard error of equally long samples.
///
/// Sums are taken relative to the first sample and compensated, so
/// identical samples return that sample bit-exactly with zero error.
pub fn aggregate<T: Real>(samples: &[&[T]]) -> (Vec<T>, Vec<T>) {
    let Some(first) = samples.first() else {
        return (Vec::new(), Vec::new());
    };
    let n = T::from_usize_lossy(samples.len());
    let mut mean = Vec::with_capacity(first.len());
    let mut stderr = Vec::with_capacity(first.len());
    for t in 0..first.len() {
        let shift = first[t];
        let mut s = Neumaier::default();
        for x in samples {
            s.add(x[t] - shift);
        }
        let d = s.total() / n;
        let m = shift + d;
        let mut q = Neumaier::default();
        for x in samples {
            let e = (x[t] - shift) - d;
            q.add(e * e);
        }
        let se = if samples.len() > 1 {
            (q.total() / (n * (n - T::one()))).sqrt()
        } else {
            T::zero()
        };
        mean.push(m);
        stderr.push(se);
    }
    (mean, stderr)
}
