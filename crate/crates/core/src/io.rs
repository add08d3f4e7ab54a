//! JSON model descriptions and CSV output.
//!
//! Site and mode indices are 1-based in every file (site 1 is the qubit);
//! the in-memory API is 0-based. Floats are written in shortest
//! round-trip exponent form, so equal results give byte-identical files.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::analytics::Table1Row;
use crate::disorder::EnsembleResult;
use crate::dynamics::CoherenceTrace;
use crate::error::{Error, Result};
use crate::netmodel::{
    Edge, EffectiveHamiltonian, ImpurityParams, Model, NetworkSpec, SiteKind, SiteSpec, SshParams, ThreeSiteParams,
};
use crate::scalar::Real;
use crate::spectral::EdgeMode;
use crate::topology::BulkEdgeReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpurityConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl Default for ImpurityConfig {
    fn default() -> Self {
        Self {
            n: 4,
            j: 1.0,
            kappa: 0.5,
            gamma: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SshConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    pub gamma: f64,
}

impl Default for SshConfig {
    fn default() -> Self {
        Self {
            n: 7,
            j1: 1.0,
            j2: 1.8,
            gamma: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeSiteConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
    #[serde(rename = "J3")]
    pub j3: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub gamma: f64,
}

impl Default for ThreeSiteConfig {
    fn default() -> Self {
        Self {
            n: 8,
            j1: 1.0,
            j2: 0.3,
            j3: 2.0,
            j: 0.7,
            eps1: 0.0,
            eps2: 0.0,
            gamma: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteConfig {
    pub kind: SiteKind,
    #[serde(default)]
    pub detuning: f64,
    /// Lindblad rate `Γ`; must be 0 on qubits.
    #[serde(default)]
    pub loss_rate: f64,
}

/// Hopping between 1-based sites `i` and `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub i: usize,
    pub j: usize,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomConfig {
    pub sites: Vec<SiteConfig>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
}

/// A model as it appears in a JSON file, e.g.
/// `{"type": "ssh", "N": 8, "J1": 1, "J2": 1.8, "gamma": 0.5}`.
/// Omitted parameters take the reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Impurity(ImpurityConfig),
    Ssh(SshConfig),
    ThreeSite(ThreeSiteConfig),
    Custom(CustomConfig),
}

impl ModelConfig {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Spec(format!("model config: {e}")))
    }

    pub fn to_model<T: Real>(&self) -> Result<Model<T>> {
        let l = T::lit;
        Ok(match self {
            ModelConfig::Impurity(c) => Model::Impurity {
                n: c.n,
                params: ImpurityParams {
                    j: l(c.j),
                    kappa: l(c.kappa),
                    gamma: l(c.gamma),
                },
            },
            ModelConfig::Ssh(c) => Model::Ssh {
                n: c.n,
                params: SshParams {
                    j1: l(c.j1),
                    j2: l(c.j2),
                    gamma: l(c.gamma),
                },
            },
            ModelConfig::ThreeSite(c) => Model::ThreeSite {
                n: c.n,
                params: ThreeSiteParams {
                    j1: l(c.j1),
                    j2: l(c.j2),
                    j3: l(c.j3),
                    j: l(c.j),
                    eps1: l(c.eps1),
                    eps2: l(c.eps2),
                    gamma: l(c.gamma),
                },
            },
            ModelConfig::Custom(c) => {
                let sites = c
                    .sites
                    .iter()
                    .map(|s| SiteSpec {
                        kind: s.kind,
                        detuning: l(s.detuning),
                        loss_rate: l(s.loss_rate),
                    })
                    .collect();
                let edges = c
                    .edges
                    .iter()
                    .map(|e| {
                        if e.i == 0 || e.j == 0 {
                            Err(Error::Spec("edge endpoints are 1-based".into()))
                        } else {
                            Ok(Edge::new(e.i - 1, e.j - 1, l(e.amplitude)))
                        }
                    })
                    .collect::<Result<_>>()?;
                Model::Custom(NetworkSpec::new(sites, edges))
            }
        })
    }

    pub fn len(&self) -> usize {
        match self {
            ModelConfig::Impurity(c) => c.n,
            ModelConfig::Ssh(c) => c.n,
            ModelConfig::ThreeSite(c) => c.n,
            ModelConfig::Custom(c) => c.sites.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same model at `n` sites; custom networks cannot be resized.
    pub fn with_len(&self, n: usize) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            ModelConfig::Impurity(c) => c.n = n,
            ModelConfig::Ssh(c) => c.n = n,
            ModelConfig::ThreeSite(c) => c.n = n,
            ModelConfig::Custom(_) => return Err(Error::Spec("custom networks have a fixed size".into())),
        }
        Ok(out)
    }
}

fn header(w: &mut impl Write, lines: &[String]) -> io::Result<()> {
    for l in lines {
        writeln!(w, "# {l}")?;
    }
    Ok(())
}

/// `index,re_lambda,im_lambda,decay_rate,overlap_site1,localization_site,localization_length`
/// with `λ` an eigenvalue of `L̃`.
pub fn write_spectrum_csv<T: Real>(w: &mut impl Write, modes: &[EdgeMode<T>], comments: &[String]) -> io::Result<()> {
    header(w, comments)?;
    writeln!(
        w,
        "index,re_lambda,im_lambda,decay_rate,overlap_site1,localization_site,localization_length"
    )?;
    for m in modes {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{},{:e}",
            m.index + 1,
            m.eigenvalue.re,
            m.eigenvalue.im,
            m.decay_rate,
            m.overlap_site1,
            m.localization_site + 1,
            m.localization_length
        )?;
    }
    Ok(())
}

pub fn write_trace_csv<T: Real>(w: &mut impl Write, trace: &CoherenceTrace<T>, comments: &[String]) -> io::Result<()> {
    header(w, comments)?;
    writeln!(w, "t,coherence")?;
    for (t, c) in trace.times.iter().zip(&trace.values) {
        writeln!(w, "{t:e},{c:e}")?;
    }
    Ok(())
}

pub fn write_table1_csv<T: Real>(w: &mut impl Write, rows: &[Table1Row<T>], comments: &[String]) -> io::Result<()> {
    header(w, comments)?;
    writeln!(w, "N,tau_exact,tau_theory,overlap_exact,overlap_theory")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            r.n, r.tau_exact, r.tau_theory, r.overlap_exact, r.overlap_theory
        )?;
    }
    Ok(())
}

/// Per-size counts and the slowest decay rates (`rate_1` ascending), with
/// the log-linear fit of each tracked rank as trailing comment lines.
pub fn write_bulk_edge_csv<T: Real>(
    w: &mut impl Write,
    rep: &BulkEdgeReport<T>,
    comments: &[String],
) -> io::Result<()> {
    header(w, comments)?;
    let ranks = rep.scaling.len();
    write!(w, "N,n_quasi_dark,n_localized_site1,W_closed_form,slowest_decay_rate")?;
    for k in 1..=ranks {
        write!(w, ",rate_{k}")?;
    }
    writeln!(w)?;
    let wcf = rep.w_closed_form.map_or_else(|| "NA".to_string(), |x| x.to_string());
    for row in &rep.rows {
        write!(
            w,
            "{},{},{},{},{:e}",
            row.n,
            row.n_quasi_dark,
            row.n_localized_site1,
            wcf,
            row.slowest_decay_rate()
        )?;
        for k in 0..ranks {
            match row.decay_rates.get(k) {
                Some(r) => write!(w, ",{r:e}")?,
                None => write!(w, ",NA")?,
            }
        }
        writeln!(w)?;
    }
    writeln!(
        w,
        "# eps_dark={:e} exponential_modes={}",
        rep.eps_dark,
        rep.n_exponential()
    )?;
    for s in &rep.scaling {
        writeln!(
            w,
            "# rank={} slope={:e} intercept={:e} r2={:e} loglog_r2={:e} exponential={}",
            s.rank + 1,
            s.slope,
            s.intercept,
            s.r_squared,
            s.loglog_r_squared,
            s.exponential
        )?;
    }
    Ok(())
}

pub fn write_disorder_csv<T: Real>(w: &mut impl Write, res: &EnsembleResult<T>, comments: &[String]) -> io::Result<()> {
    header(w, comments)?;
    writeln!(w, "# n_ok={} n_failed={}", res.n_ok, res.failures.len())?;
    for (r, e) in &res.failures {
        writeln!(w, "# failed realization {r}: {e}")?;
    }
    writeln!(w, "t,mean_coherence,stderr,n_ok")?;
    let tr = &res.mean_trace;
    for ((t, m), s) in tr.times.iter().zip(&tr.values).zip(&res.stderr_trace) {
        writeln!(w, "{t:e},{m:e},{s:e},{}", res.n_ok)?;
    }
    Ok(())
}

/// Dense `H` as `row,col,re,im`, 1-based, row-major.
pub fn write_matrix_csv<T: Real>(
    w: &mut impl Write,
    h: &EffectiveHamiltonian<T>,
    comments: &[String],
) -> io::Result<()> {
    header(w, comments)?;
    writeln!(w, "row,col,re,im")?;
    for ((i, j), z) in h.matrix().indexed_iter() {
        // `+ 0` folds the -0 of lossless diagonals into 0
        writeln!(w, "{},{},{:e},{:e}", i + 1, j + 1, z.re + T::zero(), z.im + T::zero())?;
    }
    Ok(())
}
