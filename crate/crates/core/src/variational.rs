//! Energy landscapes over a single-generator trial rotation
//! `|Φ(θ)⟩ = exp(iθg)|Φ⟩`, with grid scan and golden-section refinement.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::method::EnergyMethod;
use crate::moments::{raw_moments_pauli, MomentTable};
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::Real;
use crate::statevector::StateVector;

pub const DEFAULT_GRID_POINTS: usize = 81;
pub const REFINE_TOL: f64 = 1e-6;

/// `points` equally spaced angles over `[−π/2, π/2]`.
pub fn default_theta_grid<T: Real>(points: usize) -> Vec<T> {
    let half_pi = T::frac_pi_2();
    match points {
        0 => Vec::new(),
        1 => vec![T::zero()],
        _ => (0..points)
            .map(|i| -half_pi + T::pi() * T::lit(i as f64) / T::lit((points - 1) as f64))
            .collect(),
    }
}

#[derive(Clone, Debug)]
pub struct ScanPoint<T: Real> {
    pub theta: T,
    /// NaN when the method failed outright at this angle.
    pub energy: T,
    /// `I₁..I₃` (fewer when the method needs fewer moments).
    pub connected: Vec<T>,
    pub singular: bool,
}

#[derive(Clone, Debug)]
pub struct ScanResult<T: Real> {
    pub method: EnergyMethod,
    pub theta_grid: Vec<T>,
    pub energies: Vec<T>,
    pub points: Vec<ScanPoint<T>>,
    pub theta_opt: T,
    pub energy_opt: T,
    pub moments_at_opt: MomentTable<T>,
    /// The unrotated trial's value.
    pub energy_at_zero: T,
}

struct Landscape<'a, T: Real> {
    h: &'a PauliSum<T>,
    base: &'a StateVector<T>,
    generator: &'a PauliString,
    method: EnergyMethod,
    max_order: usize,
}

impl<T: Real> Landscape<'_, T> {
    fn moments(&self, theta: T) -> Result<MomentTable<T>> {
        let state = self.base.apply_generator_rotation(theta, self.generator)?;
        Ok(raw_moments_pauli(self.h, &state, self.max_order)?.0)
    }

    fn point(&self, theta: T) -> Result<(ScanPoint<T>, MomentTable<T>)> {
        let table = self.moments(theta)?;
        let eval = self.method.evaluate(&table)?;
        let connected = table.connected_slice().iter().take(3).copied().collect();
        Ok((
            ScanPoint {
                theta,
                energy: eval.energy,
                connected,
                singular: eval.singular || !eval.energy.is_finite(),
            },
            table,
        ))
    }

    /// Objective for the refinement; singular points are never preferred.
    fn objective(&self, theta: T) -> Result<T> {
        let (p, _) = self.point(theta)?;
        Ok(if p.singular {
            T::max_value().unwrap_or(T::one() / T::default_epsilon())
        } else {
            p.energy
        })
    }
}

/// Golden-section search on `[lo, hi]` until the bracket is narrower than `tol`.
pub fn golden_section<T: Real, F>(mut f: F, mut lo: T, mut hi: T, tol: T) -> Result<(T, T)>
where
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (hi - lo).abs() > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

pub fn energy_vs_theta<T: Real>(
    h: &PauliSum<T>,
    base: &StateVector<T>,
    generator: &PauliString,
    method: EnergyMethod,
    theta_grid: &[T],
) -> Result<ScanResult<T>> {
    if theta_grid.is_empty() {
        return Err(Error::Contract("theta grid is empty".into()));
    }
    if !generator.is_phaseless() {
        return Err(Error::Contract(format!("generator {generator} is not phaseless")));
    }
    if generator.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension {
            expected: h.n_qubits(),
            found: generator.n_qubits(),
        });
    }
    let landscape = Landscape {
        h,
        base,
        generator,
        method,
        max_order: method.moments_needed().max(3),
    };

    let points: Vec<ScanPoint<T>> = theta_grid
        .par_iter()
        .map(|&theta| landscape.point(theta).map(|(p, _)| p))
        .collect::<Result<_>>()?;

    let best = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !p.singular)
        .min_by(|a, b| a.1.energy.partial_cmp(&b.1.energy).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i);
    let Some(best) = best else {
        let diag: Vec<String> = points
            .iter()
            .map(|p| format!("θ={:.6} E={:e}", p.theta.as_f64(), p.energy.as_f64()))
            .collect();
        return Err(Error::Degenerate(format!(
            "{method} is singular at every angle: {}",
            diag.join("; ")
        )));
    };

    let (lo_bound, hi_bound) = theta_grid
        .iter()
        .fold((theta_grid[0], theta_grid[0]), |(lo, hi), &t| (lo.min(t), hi.max(t)));
    let (mut theta_opt, mut energy_opt) = (points[best].theta, points[best].energy);
    if theta_grid.len() > 1 {
        // bracket by the nearest grid neighbours on each side
        let lo = points
            .iter()
            .map(|p| p.theta)
            .filter(|&t| t < theta_opt)
            .fold(lo_bound, |a, t| a.max(t));
        let hi = points
            .iter()
            .map(|p| p.theta)
            .filter(|&t| t > theta_opt)
            .fold(hi_bound, |a, t| a.min(t));
        let (t, e) = golden_section(|t| landscape.objective(t), lo, hi, T::lit(REFINE_TOL))?;
        if e < energy_opt {
            theta_opt = t;
            energy_opt = e;
        }
    }

    let (_, moments_at_opt) = landscape.point(theta_opt)?;
    let energy_at_zero = landscape.point(T::zero())?.0.energy;
    Ok(ScanResult {
        method,
        theta_grid: theta_grid.to_vec(),
        energies: points.iter().map(|p| p.energy).collect(),
        points,
        theta_opt,
        energy_opt,
        moments_at_opt,
        energy_at_zero,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationReport<T> {
    pub dev_at_zero: T,
    pub dev_at_opt: T,
    /// `dev_at_zero / dev_at_opt`; `None` when `dev_at_opt` is zero.
    pub improvement_factor: Option<T>,
    pub infinite: bool,
}

pub fn deviation_report<T: Real>(scan: &ScanResult<T>, reference: T) -> Result<DeviationReport<T>> {
    if !reference.is_finite() {
        return Err(Error::Contract("reference energy must be finite".into()));
    }
    let dev_at_zero = (scan.energy_at_zero - reference).abs();
    let dev_at_opt = (scan.energy_opt - reference).abs();
    let infinite = dev_at_opt == T::zero();
    Ok(DeviationReport {
        dev_at_zero,
        dev_at_opt,
        improvement_factor: (!infinite).then(|| dev_at_zero / dev_at_opt),
        infinite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{siam_fci_energy, siam_hamiltonian, SiamParams};

    fn siam(v: f64) -> (PauliSum<f64>, StateVector<f64>, PauliString) {
        (
            siam_hamiltonian(&SiamParams::half_filling(8.0, v)),
            StateVector::basis_state("0110").unwrap(),
            "YXXX".parse().unwrap(),
        )
    }

    #[test]
    fn grid_shape() {
        let g: Vec<f64> = default_theta_grid(81);
        assert_eq!(g.len(), 81);
        assert!((g[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g[40], 0.0);
        assert!((g[80] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (t, e) = golden_section(|x: f64| Ok((x - 0.3) * (x - 0.3) + 1.0), -1.0, 1.0, 1e-8).unwrap();
        assert!((t - 0.3).abs() < 1e-7);
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_is_flat() {
        let (h, phi, g) = siam(1.0);
        let scan = energy_vs_theta(&h, &phi, &g, EnergyMethod::Mean, &default_theta_grid(21)).unwrap();
        assert!(scan.energies.iter().all(|e| (e + 4.0).abs() < 1e-12));
    }

    #[test]
    fn pds2_reaches_ground_state() {
        let (h, phi, g) = siam(1.0);
        let scan = energy_vs_theta(&h, &phi, &g, EnergyMethod::Pds(2), &default_theta_grid(81)).unwrap();
        let fci = siam_fci_energy(8.0, 1.0);
        assert!((scan.energy_opt - fci).abs() < 1e-6);
        assert!((scan.theta_opt.abs() - std::f64::consts::FRAC_PI_4).abs() < 0.05);
        assert!((scan.energy_at_zero - (-2.0 - 6f64.sqrt())).abs() < 1e-10);
        let rep = deviation_report(&scan, fci).unwrap();
        assert!((rep.dev_at_zero - 0.379).abs() < 1e-3);
    }

    #[test]
    fn perfect_method_flags_infinite_improvement() {
        let (h, phi, g) = siam(1.0);
        let scan = energy_vs_theta(&h, &phi, &g, EnergyMethod::Mean, &[0.0]).unwrap();
        let rep = deviation_report(&scan, -4.0).unwrap();
        assert!(rep.infinite);
        assert_eq!(rep.improvement_factor, None);
    }

    #[test]
    fn bad_inputs() {
        let (h, phi, g) = siam(1.0);
        assert!(energy_vs_theta(&h, &phi, &g, EnergyMethod::Pds(2), &[]).is_err());
        let phased = g.with_phase(1);
        assert!(energy_vs_theta(&h, &phi, &phased, EnergyMethod::Pds(2), &[0.0]).is_err());
    }
}
