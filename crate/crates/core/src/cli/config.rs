use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::method::EnergyMethod;
use crate::models::{h2_bk_hamiltonian, load_h2_pes, siam_hamiltonian, H2Coefficients, SiamParams};
use crate::noise::{DepthProxy, NoiseModel, DEFAULT_SHOTS};
use crate::pauli::{parse_pauli_sum, PauliString, PauliSum};
use crate::statevector::StateVector;

/// Keys accepted in a TOML config file. Every key mirrors a command-line
/// flag of the same name (dashes become underscores).
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub mu: Option<f64>,
    pub eps0: Option<f64>,
    pub eps1: Option<f64>,
    pub g: Option<Vec<f64>>,
    pub pes: Option<PathBuf>,
    pub hamiltonian: Option<PathBuf>,
    pub trial: Option<String>,
    pub generator: Option<String>,
    pub theta: Option<f64>,
    pub methods: Option<Vec<String>>,
    pub sweep_var: Option<String>,
    pub values: Option<String>,
    pub noise: Option<bool>,
    pub p00: Option<f64>,
    pub p11: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub no_mitigation: Option<bool>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merged(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            model,
            u,
            v,
            mu,
            eps0,
            eps1,
            g,
            pes,
            hamiltonian,
            trial,
            generator,
            theta,
            methods,
            sweep_var,
            values,
            noise,
            p00,
            p11,
            p1,
            p2,
            shots,
            seed,
            no_mitigation,
            output,
            threads,
            grid
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Siam(SiamParams<f64>),
    H2(Vec<H2Coefficients<f64>>),
    Pauli(PauliSum<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    V,
    U,
    /// Bond length of each PES row.
    R,
    /// A single point at 0.
    None,
}

#[derive(Clone, Debug)]
pub struct TrialSpec {
    pub bits: String,
    pub generator: Option<PauliString>,
    pub theta: f64,
}

impl TrialSpec {
    pub fn state(&self) -> Result<StateVector<f64>> {
        let base = StateVector::basis_state(&self.bits)?;
        match &self.generator {
            Some(g) if self.theta != 0.0 => base.apply_generator_rotation(self.theta, g),
            _ => Ok(base),
        }
    }

    pub fn depth(&self) -> DepthProxy {
        let d = DepthProxy::for_basis_state(&self.bits);
        match &self.generator {
            Some(g) if self.theta != 0.0 => d.with_rotation(g),
            _ => d,
        }
    }
}

/// Fully resolved run description.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub trial: TrialSpec,
    pub methods: Vec<EnergyMethod>,
    pub sweep_var: SweepVariable,
    pub values: Vec<f64>,
    pub noise: Option<NoiseModel>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub grid: usize,
}

/// One Hamiltonian of a sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub hamiltonian: PauliSum<f64>,
}

/// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let bad = |t: &str| Error::Config(format!("invalid number '{t}' in values"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let a: f64 = parts[0].parse().map_err(|_| bad(parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| bad(parts[1]))?;
        let n: usize = parts[2].parse().map_err(|_| bad(parts[2]))?;
        return match n {
            0 => Err(Error::Config("value range needs at least one point".into())),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    let vals = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| bad(t)))
        .collect::<Result<Vec<_>>>()?;
    if vals.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    Ok(vals)
}

impl RunConfig {
    pub fn from_file_config(fc: &FileConfig) -> Result<Self> {
        let model_name = fc.model.as_deref().unwrap_or("siam");
        let model = match model_name {
            "siam" => {
                let u = fc.u.unwrap_or(8.0);
                let mut p = SiamParams::half_filling(u, fc.v.unwrap_or(1.0));
                if let Some(mu) = fc.mu {
                    p.mu = mu;
                    p.eps1 = fc.eps1.unwrap_or(mu);
                }
                if let Some(e0) = fc.eps0 {
                    p.eps0 = e0;
                }
                if let Some(e1) = fc.eps1 {
                    p.eps1 = e1;
                }
                ModelSpec::Siam(p)
            }
            "h2" => match (&fc.pes, &fc.g) {
                (Some(path), _) => {
                    if !path.exists() {
                        return Err(Error::Config(format!("PES file {} does not exist", path.display())));
                    }
                    ModelSpec::H2(load_h2_pes(path)?)
                }
                (None, Some(g)) => {
                    let g: [f64; 6] = g
                        .as_slice()
                        .try_into()
                        .map_err(|_| Error::Config(format!("g needs 6 coefficients, got {}", g.len())))?;
                    ModelSpec::H2(vec![H2Coefficients::new(g)?])
                }
                (None, None) => return Err(Error::Config("h2 model needs --pes or --g".into())),
            },
            "pauli" => {
                let path = fc
                    .hamiltonian
                    .as_ref()
                    .ok_or_else(|| Error::Config("pauli model needs --hamiltonian".into()))?;
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "Hamiltonian file {} does not exist",
                        path.display()
                    )));
                }
                ModelSpec::Pauli(parse_pauli_sum(&std::fs::read_to_string(path)?)?)
            }
            other => return Err(Error::Config(format!("unknown model '{other}' (siam, h2, pauli)"))),
        };

        let default_bits = match &model {
            ModelSpec::Siam(_) => "0110".to_string(),
            ModelSpec::H2(_) => "01".to_string(),
            ModelSpec::Pauli(h) => "0".repeat(h.n_qubits()),
        };
        let bits = fc.trial.clone().unwrap_or(default_bits);
        let n = match &model {
            ModelSpec::Siam(_) => 4,
            ModelSpec::H2(_) => 2,
            ModelSpec::Pauli(h) => h.n_qubits(),
        };
        if bits.len() != n || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Config(format!("trial '{bits}' is not a {n}-qubit bitstring")));
        }
        let generator = fc
            .generator
            .as_deref()
            .map(|g| PauliString::parse_any(g, n))
            .transpose()?;
        if let Some(g) = &generator {
            if !g.is_phaseless() {
                return Err(Error::Config(format!("generator {g} must be phaseless")));
            }
        }
        let trial = TrialSpec {
            bits,
            generator,
            theta: fc.theta.unwrap_or(0.0),
        };

        let methods = match &fc.methods {
            Some(list) if list.is_empty() => return Err(Error::Config("at least one method is required".into())),
            Some(list) => list.iter().map(|m| m.parse()).collect::<Result<Vec<EnergyMethod>>>()?,
            None => vec![EnergyMethod::Pds(2)],
        };

        let sweep_var = match (fc.sweep_var.as_deref(), &model) {
            (None | Some("v"), ModelSpec::Siam(_)) => SweepVariable::V,
            (Some("u"), ModelSpec::Siam(_)) => SweepVariable::U,
            (None | Some("r"), ModelSpec::H2(_)) => SweepVariable::R,
            (None | Some("none"), ModelSpec::Pauli(_)) => SweepVariable::None,
            (Some(other), _) => {
                return Err(Error::Config(format!(
                    "sweep variable '{other}' does not apply to model '{model_name}'"
                )))
            }
        };
        let values = match (&fc.values, sweep_var, &model) {
            (Some(text), SweepVariable::V | SweepVariable::U, _) => parse_values(text)?,
            (None, SweepVariable::V, ModelSpec::Siam(p)) => vec![p.v],
            (None, SweepVariable::U, ModelSpec::Siam(p)) => vec![p.u],
            (Some(_), _, _) => return Err(Error::Config("--values only applies to SIAM sweeps".into())),
            (None, _, ModelSpec::H2(rows)) => {
                if rows.is_empty() {
                    return Err(Error::Config("PES table has no rows".into()));
                }
                rows.iter().enumerate().map(|(i, r)| r.r.unwrap_or(i as f64)).collect()
            }
            (None, _, _) => vec![0.0],
        };

        let noise = if fc.noise.unwrap_or(false) {
            let nm = NoiseModel {
                p00: fc.p00.unwrap_or(1.0),
                p11: fc.p11.unwrap_or(1.0),
                p1: fc.p1.unwrap_or(0.0),
                p2: fc.p2.unwrap_or(0.0),
                shots: fc.shots.unwrap_or(DEFAULT_SHOTS),
                seed: fc.seed.unwrap_or(0),
                mitigate: !fc.no_mitigation.unwrap_or(false),
            };
            nm.validate()?;
            Some(nm)
        } else {
            None
        };
        if fc.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }

        Ok(RunConfig {
            model,
            trial,
            methods,
            sweep_var,
            values,
            noise,
            output: fc.output.clone(),
            threads: fc.threads,
            grid: fc.grid.unwrap_or(crate::variational::DEFAULT_GRID_POINTS),
        })
    }

    /// Hamiltonians in sweep order.
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        match &self.model {
            ModelSpec::Siam(p) => self
                .values
                .iter()
                .map(|&x| {
                    let mut q = *p;
                    match self.sweep_var {
                        SweepVariable::U => {
                            // keep half filling tied to U when it was implied
                            if p.mu == p.u / 2.0 && p.eps1 == p.mu {
                                q = SiamParams::new(x, x / 2.0, p.eps0, x / 2.0, p.v);
                            } else {
                                q.u = x;
                            }
                        }
                        _ => q.v = x,
                    }
                    SweepPoint {
                        value: x,
                        hamiltonian: siam_hamiltonian(&q),
                    }
                })
                .collect(),
            ModelSpec::H2(rows) => rows
                .iter()
                .zip(&self.values)
                .map(|(r, &x)| SweepPoint {
                    value: x,
                    hamiltonian: h2_bk_hamiltonian(r),
                })
                .collect(),
            ModelSpec::Pauli(h) => vec![SweepPoint {
                value: 0.0,
                hamiltonian: h.clone(),
            }],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists() {
        assert_eq!(parse_values("0.1, 1,3").unwrap(), vec![0.1, 1.0, 3.0]);
        assert_eq!(parse_values("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_values("").is_err());
        assert!(parse_values("1,x").is_err());
        assert!(parse_values("0:1:0").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse("u = 4.0\nv = 2.0\nmethods = [\"pds:3\"]\n").unwrap();
        let flags = FileConfig {
            v: Some(0.5),
            ..Default::default()
        };
        let merged = file.merged(flags);
        assert_eq!(merged.u, Some(4.0));
        assert_eq!(merged.v, Some(0.5));
        let cfg = RunConfig::from_file_config(&merged).unwrap();
        assert_eq!(cfg.methods, vec![EnergyMethod::Pds(3)]);
        assert_eq!(cfg.values, vec![0.5]);
        assert!(FileConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn invalid_configs() {
        let bad = |fc: FileConfig| RunConfig::from_file_config(&fc).is_err();
        assert!(bad(FileConfig {
            methods: Some(vec![]),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            trial: Some("011".into()),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            model: Some("h2".into()),
            pes: Some("/nonexistent/pes.csv".into()),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            model: Some("h2".into()),
            g: Some(vec![1.0, 2.0]),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            noise: Some(true),
            p00: Some(2.0),
            ..Default::default()
        }));
    }
}
