//! Energy estimators evaluated on a moment table.

use std::fmt;
use std::str::FromStr;

use crate::cmx::{cmx_cioslowski, cmx_knowles, CmxMethod};
use crate::error::{Error, Result};
use crate::moments::{hw_energy_series, MomentTable};
use crate::pds::solve_pds;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyMethod {
    /// The mean energy `I₁`.
    Mean,
    Pds(usize),
    Cmx(CmxMethod, usize),
    /// Horn–Weinstein series truncated after `order` terms at imaginary time `tau`.
    HwSeries {
        order: usize,
        tau: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation<T> {
    pub energy: T,
    pub singular: bool,
    pub condition: Option<T>,
}

impl EnergyMethod {
    /// Highest raw moment the method reads.
    pub fn moments_needed(&self) -> usize {
        match *self {
            EnergyMethod::Mean => 1,
            EnergyMethod::Pds(n) => 2 * n - 1,
            EnergyMethod::Cmx(_, k) => 2 * k - 1,
            EnergyMethod::HwSeries { order, .. } => order + 1,
        }
    }

    pub fn order(&self) -> usize {
        match *self {
            EnergyMethod::Mean => 1,
            EnergyMethod::Pds(n) | EnergyMethod::Cmx(_, n) => n,
            EnergyMethod::HwSeries { order, .. } => order,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnergyMethod::Mean => "mean",
            EnergyMethod::Pds(_) => "pds",
            EnergyMethod::Cmx(CmxMethod::Cioslowski, _) => "cmx-cioslowski",
            EnergyMethod::Cmx(CmxMethod::Knowles, _) => "cmx-knowles",
            EnergyMethod::HwSeries { .. } => "hw-series",
        }
    }

    /// Degenerate PDS results are reported as singular rows with a NaN
    /// energy rather than as errors.
    pub fn evaluate<T: Real>(&self, table: &MomentTable<T>) -> Result<Evaluation<T>> {
        if table.max_order() < self.moments_needed() {
            return Err(Error::Arity {
                needed: self.moments_needed(),
                available: table.max_order(),
            });
        }
        Ok(match *self {
            EnergyMethod::Mean => Evaluation {
                energy: table.connected(1),
                singular: false,
                condition: None,
            },
            EnergyMethod::Pds(n) => match solve_pds(table, n) {
                Ok(r) => Evaluation {
                    energy: r.ground_energy,
                    singular: r.used_pseudo_inverse,
                    condition: Some(r.condition_number),
                },
                Err(Error::Degenerate(_)) => Evaluation {
                    energy: T::lit(f64::NAN),
                    singular: true,
                    condition: None,
                },
                Err(e) => return Err(e),
            },
            EnergyMethod::Cmx(m, k) => {
                let r = match m {
                    CmxMethod::Cioslowski => cmx_cioslowski(table.connected_slice(), k)?,
                    CmxMethod::Knowles => cmx_knowles(table.connected_slice(), k)?,
                };
                Evaluation {
                    energy: r.energy,
                    singular: r.singular_flag,
                    condition: r.condition_number,
                }
            }
            EnergyMethod::HwSeries { order, tau } => Evaluation {
                energy: hw_energy_series(table, T::lit(tau), order)?,
                singular: false,
                condition: None,
            },
        })
    }
}

impl fmt::Display for EnergyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyMethod::Mean => f.write_str("mean"),
            EnergyMethod::HwSeries { order, tau } => write!(f, "hw-series:{order}:{tau}"),
            m => write!(f, "{}:{}", m.name(), m.order()),
        }
    }
}

/// Accepts `mean`, `pds:N`, `cmx-cioslowski:K`, `cmx-knowles:K` and
/// `hw-series:K:TAU`.
impl FromStr for EnergyMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Config(format!("unknown method '{s}'"));
        let order = |t: &str| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(Error::Config(format!("invalid order in '{s}'"))),
            }
        };
        match parts.as_slice() {
            ["mean"] => Ok(EnergyMethod::Mean),
            ["pds", n] => Ok(EnergyMethod::Pds(order(n)?)),
            ["cmx-cioslowski", k] => Ok(EnergyMethod::Cmx(CmxMethod::Cioslowski, order(k)?)),
            ["cmx-knowles", k] => Ok(EnergyMethod::Cmx(CmxMethod::Knowles, order(k)?)),
            ["hw-series", k, tau] => {
                let tau: f64 = tau.parse().map_err(|_| bad())?;
                if !(tau.is_finite() && tau >= 0.0) {
                    return Err(Error::Config(format!("tau must be finite and non-negative in '{s}'")));
                }
                Ok(EnergyMethod::HwSeries { order: order(k)?, tau })
            }
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["mean", "pds:3", "cmx-cioslowski:2", "cmx-knowles:4", "hw-series:3:0.5"] {
            let m: EnergyMethod = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        for s in ["pds", "pds:0", "cmx:2", "hw-series:2:-1", "mean:1"] {
            assert!(s.parse::<EnergyMethod>().is_err(), "{s}");
        }
    }

    #[test]
    fn moment_requirements() {
        let t = MomentTable::<f64>::from_raw(&[-4.0, 18.0, -80.0]);
        assert_eq!(EnergyMethod::Mean.evaluate(&t).unwrap().energy, -4.0);
        assert!(EnergyMethod::Pds(2).evaluate(&t).is_ok());
        assert!(matches!(
            EnergyMethod::Pds(3).evaluate(&t),
            Err(Error::Arity { needed: 5, .. })
        ));
        let c = EnergyMethod::Cmx(CmxMethod::Cioslowski, 2).evaluate(&t).unwrap();
        assert!((c.energy + 4.5).abs() < 1e-12);
    }
}
