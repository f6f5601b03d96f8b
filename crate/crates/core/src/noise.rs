//! Finite-shot Hadamard-test emulation with readout and depolarizing noise.
//!
//! A test of `⟨Φ|P|Φ⟩ = x` is modelled at the probability level: the
//! depolarizing channel damps the signal to `λx` with
//! `λ = (1−p1)^n1 (1−p2)^n2`, the ancilla reads 0 with probability
//! `(1 + λx)/2`, and the readout channel flips outcomes with probabilities
//! `1 − p00` and `1 − p11`. The number of recorded zeros is drawn from the
//! resulting binomial distribution. Thermal relaxation is not modelled, so
//! results are not comparable to device-calibrated simulations.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::moments::{MomentExpansion, MomentTable};
use crate::pauli::{PauliString, PauliSum};
use crate::statevector::StateVector;

pub const DEFAULT_SHOTS: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub p00: f64,
    pub p11: f64,
    pub p1: f64,
    pub p2: f64,
    pub shots: u64,
    pub seed: u64,
    pub mitigate: bool,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::perfect(DEFAULT_SHOTS, 0)
    }
}

impl NoiseModel {
    /// Shot noise only.
    pub fn perfect(shots: u64, seed: u64) -> Self {
        Self {
            p00: 1.0,
            p11: 1.0,
            p1: 0.0,
            p2: 0.0,
            shots,
            seed,
            mitigate: true,
        }
    }

    pub fn with_readout(mut self, p00: f64, p11: f64) -> Self {
        self.p00 = p00;
        self.p11 = p11;
        self
    }

    pub fn with_depolarizing(mut self, p1: f64, p2: f64) -> Self {
        self.p1 = p1;
        self.p2 = p2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p00", self.p00), ("p11", self.p11), ("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn damping(&self, depth: DepthProxy) -> f64 {
        (1.0 - self.p1).powi(depth.n1 as i32) * (1.0 - self.p2).powi(depth.n2 as i32)
    }
}

/// Gate-equivalent counts entering the depolarizing damping.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DepthProxy {
    pub n1: u32,
    pub n2: u32,
}

impl DepthProxy {
    /// Bit flips preparing `bits` plus one controlled operation.
    pub fn for_basis_state(bits: &str) -> Self {
        Self {
            n1: bits.chars().filter(|&c| c == '1').count() as u32,
            n2: 1,
        }
    }

    /// Adds the usual `exp(iθP)` circuit: a basis change on each non-identity
    /// qubit and back, a CNOT ladder down and up, and one rotation.
    pub fn with_rotation(mut self, generator: &PauliString) -> Self {
        let w = generator.weight();
        if w > 0 {
            let basis_changes = (0..generator.n_qubits())
                .filter(|&q| matches!(generator.letter(q), 'X' | 'Y'))
                .count() as u32;
            self.n1 += 2 * basis_changes + 1;
            self.n2 += 2 * (w - 1);
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mitigation {
    /// Readout inverted and damping undone.
    Full,
    /// Readout inverted; damping is total (`λ = 0`) and cannot be undone.
    ReadoutOnly,
    /// Readout matrix singular (`p00 + p11 ≤ 1`) or mitigation switched off.
    Disabled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotEstimate {
    pub raw_estimate: f64,
    pub mitigated_estimate: f64,
    /// Standard error of `raw_estimate`.
    pub standard_error: f64,
    /// Standard error of `mitigated_estimate`.
    pub mitigated_standard_error: f64,
    pub shots_used: u64,
    pub mitigation: Mitigation,
}

impl ShotEstimate {
    /// The value a moment assembly should use under `nm`.
    pub fn value(&self, nm: &NoiseModel) -> f64 {
        if nm.mitigate {
            self.mitigated_estimate
        } else {
            self.raw_estimate
        }
    }

    pub fn error(&self, nm: &NoiseModel) -> f64 {
        if nm.mitigate {
            self.mitigated_standard_error
        } else {
            self.standard_error
        }
    }
}

/// SplitMix64 output function, used to derive independent sub-seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for the test of `p`, independent of evaluation order.
pub fn pauli_seed(seed: u64, p: &PauliString) -> u64 {
    splitmix64(seed ^ splitmix64(p.x_mask() ^ splitmix64(p.z_mask() ^ p.n_qubits() as u64)))
}

pub fn hadamard_test_estimate(true_expectation: f64, nm: &NoiseModel, depth: DepthProxy) -> Result<ShotEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(nm.seed);
    estimate_with(true_expectation, nm, depth, &mut rng)
}

fn estimate_with(x: f64, nm: &NoiseModel, depth: DepthProxy, rng: &mut ChaCha8Rng) -> Result<ShotEstimate> {
    nm.validate()?;
    if x.is_nan() || x.abs() > 1.0 + 1e-12 {
        return Err(Error::Contract(format!("expectation {x} outside [-1, 1]")));
    }
    let x = x.clamp(-1.0, 1.0);
    let lambda = nm.damping(depth);
    let p0 = (0.5 * (1.0 + lambda * x)).clamp(0.0, 1.0);
    let q0 = (p0 * nm.p00 + (1.0 - p0) * (1.0 - nm.p11)).clamp(0.0, 1.0);
    let zeros = Binomial::new(nm.shots, q0)
        .map_err(|e| Error::Contract(format!("binomial sampling: {e}")))?
        .sample(rng);
    let q0_hat = zeros as f64 / nm.shots as f64;
    let raw = 2.0 * q0_hat - 1.0;
    let se = ((1.0 - raw * raw).max(0.0) / nm.shots as f64).sqrt();

    let contrast = nm.p00 + nm.p11 - 1.0;
    let (mitigated, mitigated_se, mitigation) = if !nm.mitigate || contrast <= 0.0 {
        (raw, se, Mitigation::Disabled)
    } else {
        let p0_hat = (q0_hat - (1.0 - nm.p11)) / contrast;
        let readout_corrected = 2.0 * p0_hat - 1.0;
        if lambda > 0.0 {
            (readout_corrected / lambda, se / (contrast * lambda), Mitigation::Full)
        } else {
            (readout_corrected, se / contrast, Mitigation::ReadoutOnly)
        }
    };
    Ok(ShotEstimate {
        raw_estimate: raw,
        mitigated_estimate: mitigated,
        standard_error: se,
        mitigated_standard_error: mitigated_se,
        shots_used: nm.shots,
        mitigation,
    })
}

#[derive(Clone, Debug)]
pub struct NoisyMoments {
    pub table: MomentTable<f64>,
    /// Exact and sampled expectation per distinct non-identity string.
    pub estimates: BTreeMap<PauliString, (f64, ShotEstimate)>,
    pub expansion: MomentExpansion<f64>,
}

impl NoisyMoments {
    /// Moments recomputed from the sampled values (mitigated or raw per `nm`).
    pub fn table_with(&self, nm: &NoiseModel, bump: Option<(&PauliString, f64)>) -> Result<MomentTable<f64>> {
        let raw = self.expansion.evaluate(|p| {
            let base = self.estimates.get(p).map(|(_, e)| e.value(nm)).unwrap_or(0.0);
            match bump {
                Some((q, h)) if q == p => Ok(base + h),
                _ => Ok(base),
            }
        })?;
        Ok(MomentTable::from_raw(&raw))
    }

    /// First-order propagated standard error of `f(table)`, using central
    /// differences in each sampled expectation.
    pub fn propagated_error<F>(&self, nm: &NoiseModel, mut f: F) -> Result<f64>
    where
        F: FnMut(&MomentTable<f64>) -> Result<f64>,
    {
        const H: f64 = 1e-6;
        let mut var = 0.0;
        for (p, (_, est)) in &self.estimates {
            let up = f(&self.table_with(nm, Some((p, H)))?)?;
            let down = f(&self.table_with(nm, Some((p, -H)))?)?;
            let grad = (up - down) / (2.0 * H);
            var += (grad * est.error(nm)).powi(2);
        }
        Ok(var.sqrt())
    }
}

/// Moments with every distinct Pauli expectation replaced by a sampled
/// estimate. The identity is exact. Each string uses its own sub-seed so the
/// result does not depend on scheduling.
pub fn noisy_moments(
    h: &PauliSum<f64>,
    state: &StateVector<f64>,
    max_order: usize,
    nm: &NoiseModel,
    depth: DepthProxy,
) -> Result<NoisyMoments> {
    nm.validate()?;
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension {
            expected: h.n_qubits(),
            found: state.n_qubits(),
        });
    }
    if !state.is_normalized() {
        return Err(Error::Contract("trial state is not normalized".into()));
    }
    let expansion = MomentExpansion::build(h, max_order)?;
    let strings: Vec<PauliString> = expansion
        .distinct_strings()
        .into_iter()
        .filter(|p| !p.is_identity())
        .collect();
    let sampled: Vec<(PauliString, (f64, ShotEstimate))> = strings
        .into_par_iter()
        .map(|p| {
            let exact = state.pauli_expectation(&p)?.re;
            let mut rng = ChaCha8Rng::seed_from_u64(pauli_seed(nm.seed, &p));
            let est = estimate_with(exact, nm, depth, &mut rng)?;
            Ok((p, (exact, est)))
        })
        .collect::<Result<_>>()?;
    let mut out = NoisyMoments {
        table: MomentTable::from_raw(&[0.0]),
        estimates: sampled.into_iter().collect(),
        expansion,
    };
    out.table = out.table_with(nm, None)?;
    Ok(out)
}
