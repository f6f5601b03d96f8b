//! Hamiltonian moments `K_n = ⟨Φ|Hⁿ|Φ⟩` and connected moments `I_k`.
//!
//! Two independent routes compute the raw moments:
//! - [`raw_moments_pauli`] expands `(H − I₁)ⁿ` into phaseless Pauli strings by
//!   iterated sum products with term collection, then weights each string's
//!   expectation (looked up once per string through a cache);
//! - [`raw_moments_dense`] applies `H` repeatedly to the statevector.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::pauli::{format_float, PauliString, PauliSum};
use crate::scalar::{binomial, cabs, Complex, Field, Real};
use crate::statevector::{StateVector, DEFAULT_DENSE_LIMIT};

/// Raw moments `K_0..K_max` together with connected moments `I_1..I_max`
/// and central moments `m_n = ⟨(H − I₁)ⁿ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<T: Real> {
    raw: Vec<T>,
    connected: Vec<T>,
    mean: T,
    central: Vec<T>,
}

/// `Σ_j C(n, j) m_j s^(n−j)` for every `n`: moments of `X + s` from those of `X`.
fn shift_moments<T: Real>(moments: &[T], s: T) -> Vec<T> {
    (0..moments.len())
        .map(|n| {
            let mut acc = T::zero();
            let mut pow = T::one();
            for j in (0..=n).rev() {
                acc += T::lit(binomial(n as u64, j as u64) as f64) * moments[j] * pow;
                pow *= s;
            }
            acc
        })
        .collect()
}

impl<T: Real> MomentTable<T> {
    /// Builds the table from `K_1..K_max` (the leading `K_0 = 1` is implied).
    pub fn from_raw(raw_from_one: &[T]) -> Self {
        let mut raw = Vec::with_capacity(raw_from_one.len() + 1);
        raw.push(T::one());
        raw.extend_from_slice(raw_from_one);
        let connected = connected_moments(&raw);
        let mean = raw.get(1).copied().unwrap_or_else(T::zero);
        let central = shift_moments(&raw, -mean);
        Self {
            raw,
            connected,
            mean,
            central,
        }
    }

    /// Builds the table from the mean and the central moments `m_1..m_max`.
    /// Connected moments beyond the first are then free of the cancellation
    /// that a large mean causes when they are formed from raw moments.
    pub fn from_central(mean: T, central_from_one: &[T]) -> Self {
        let mut central = Vec::with_capacity(central_from_one.len() + 1);
        central.push(T::one());
        central.extend_from_slice(central_from_one);
        let raw = shift_moments(&central, mean);
        let mut connected = connected_moments(&central);
        if let Some(first) = connected.first_mut() {
            *first += mean;
        }
        Self {
            raw,
            connected,
            mean,
            central,
        }
    }

    /// The point the central moments are taken about (`I₁` up to roundoff).
    pub fn mean(&self) -> T {
        self.mean
    }

    /// `m_0..m_max` with `m_0 = 1`.
    pub fn central_slice(&self) -> &[T] {
        &self.central
    }

    pub fn max_order(&self) -> usize {
        self.raw.len() - 1
    }

    /// `K_n`; `K_0 = 1`.
    pub fn raw(&self, n: usize) -> T {
        self.raw[n]
    }

    /// `I_k` for `k ≥ 1`.
    pub fn connected(&self, k: usize) -> T {
        assert!(k >= 1, "connected moments start at I_1");
        self.connected[k - 1]
    }

    /// `K_0..K_max`.
    pub fn raw_slice(&self) -> &[T] {
        &self.raw
    }

    /// `I_1..I_max`.
    pub fn connected_slice(&self) -> &[T] {
        &self.connected
    }

    /// Hankel matrix `[K_{i+j}]` for `i, j = 0..=m`.
    pub fn hankel(&self, m: usize) -> Result<DMatrix<T>> {
        if 2 * m > self.max_order() {
            return Err(Error::Arity {
                needed: 2 * m,
                available: self.max_order(),
            });
        }
        Ok(DMatrix::from_fn(m + 1, m + 1, |i, j| self.raw[i + j]))
    }

    /// CSV with columns `order,K,I`; the order-0 row leaves `I` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("order,K,I\n");
        for (n, k) in self.raw.iter().enumerate() {
            let i = if n == 0 {
                String::new()
            } else {
                format_float(self.connected[n - 1].as_f64())
            };
            let _ = writeln!(out, "{n},{},{i}", format_float(k.as_f64()));
        }
        out
    }
}

/// Connected moments `I_1..I_max` from raw moments `K_0..K_max` (`K_0 = 1`).
///
/// `I_k = K_k − Σ_{i=0}^{k−2} C(k−1, i) I_{i+1} K_{k−i−1}`, with exact
/// integer binomials.
pub fn connected_moments<F: Field>(raw: &[F]) -> Vec<F> {
    let mut connected: Vec<F> = Vec::with_capacity(raw.len().saturating_sub(1));
    for k in 1..raw.len() {
        let mut value = raw[k].clone();
        for i in 0..k.saturating_sub(1) {
            let c = F::from_integer(binomial(k as u64 - 1, i as u64) as i64);
            value = value - c * connected[i].clone() * raw[k - i - 1].clone();
        }
        connected.push(value);
    }
    connected
}

/// Truncated series `E(τ) = Σ_{k=0}^{order} (−τ)^k / k! · I_{k+1}`.
pub fn hw_energy_series<T: Real>(table: &MomentTable<T>, tau: T, order: usize) -> Result<T> {
    if order + 1 > table.max_order() {
        return Err(Error::Arity {
            needed: order + 1,
            available: table.max_order(),
        });
    }
    let mut term_scale = T::one();
    let mut sum = T::zero();
    for k in 0..=order {
        if k > 0 {
            term_scale = term_scale * (-tau) / T::lit(k as f64);
        }
        sum += term_scale * table.connected(k + 1);
    }
    Ok(sum)
}

/// `Hⁿ` for `n = 1..=max_order` as collected Pauli sums.
#[derive(Clone, Debug)]
pub struct MomentExpansion<T: Real> {
    powers: Vec<PauliSum<T>>,
}

impl<T: Real> MomentExpansion<T> {
    pub fn build(h: &PauliSum<T>, max_order: usize) -> Result<Self> {
        if max_order < 1 {
            return Err(Error::Contract("max_order must be at least 1".into()));
        }
        h.require_hermitian()?;
        let mut powers = Vec::with_capacity(max_order);
        powers.push(h.clone());
        for _ in 1..max_order {
            let next = powers.last().expect("nonempty").multiply(h)?;
            powers.push(next);
        }
        Ok(Self { powers })
    }

    pub fn max_order(&self) -> usize {
        self.powers.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.powers[0].n_qubits()
    }

    /// `Hⁿ`, `n ≥ 1`.
    pub fn power(&self, n: usize) -> &PauliSum<T> {
        &self.powers[n - 1]
    }

    /// Collected term count of each power.
    pub fn term_counts(&self) -> Vec<usize> {
        self.powers.iter().map(|p| p.len()).collect()
    }

    /// Distinct non-identity strings across all powers.
    pub fn distinct_strings(&self) -> Vec<PauliString> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for power in &self.powers {
            for (p, _) in power.sorted_terms() {
                if !p.is_identity() && seen.insert(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Weighted sums `K_n = Σ_P c_P ⟨P⟩` for every order, with `⟨P⟩`
    /// supplied by `expect`.
    pub fn evaluate<F>(&self, mut expect: F) -> Result<Vec<T>>
    where
        F: FnMut(&PauliString) -> Result<T>,
    {
        (1..=self.max_order())
            .map(|n| self.evaluate_order(n, &mut expect))
            .collect()
    }

    /// `K_n` alone. Identity strings contribute their coefficient directly,
    /// without calling `expect`.
    pub fn evaluate_order<F>(&self, n: usize, mut expect: F) -> Result<T>
    where
        F: FnMut(&PauliString) -> Result<T>,
    {
        let mut acc: Complex<T> = Complex::default();
        let mut scale = T::zero();
        for (p, c) in self.power(n).sorted_terms() {
            let e = if p.is_identity() { T::one() } else { expect(&p)? };
            acc += c.scale(e);
            scale += cabs(c);
        }
        if acc.im.abs() > T::tolerance(1e-10) * (T::one() + scale) {
            return Err(Error::Contract(format!("K_{n} has imaginary residual {:e}", acc.im)));
        }
        Ok(acc.re)
    }
}

/// Memoized `⟨Φ|P|Φ⟩` for phaseless strings.
#[derive(Clone, Debug, Default)]
pub struct PauliExpectationCache<T: Real> {
    values: HashMap<PauliString, T>,
    hits: usize,
    misses: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Distinct strings whose expectation was evaluated.
    pub entries: usize,
}

impl<T: Real> PauliExpectationCache<T> {
    pub fn new() -> Self {
        Self {
            values: HashMap::new(),
            hits: 0,
            misses: 0,
        }
    }

    pub fn get_or_compute(&mut self, p: &PauliString, state: &StateVector<T>) -> Result<T> {
        let key = p.phaseless();
        if let Some(v) = self.values.get(&key) {
            self.hits += 1;
            return Ok(*v);
        }
        self.misses += 1;
        let v = state.pauli_expectation(&key)?.re;
        self.values.insert(key, v);
        Ok(v)
    }

    pub fn get(&self, p: &PauliString) -> Option<T> {
        self.values.get(&p.phaseless()).copied()
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits,
            misses: self.misses,
            entries: self.values.len(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MomentOptions {
    pub use_cache: bool,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self { use_cache: true }
    }
}

/// Raw moments through the Pauli-product expansion.
pub fn raw_moments_pauli<T: Real>(
    h: &PauliSum<T>,
    state: &StateVector<T>,
    max_order: usize,
) -> Result<(MomentTable<T>, CacheStats)> {
    raw_moments_pauli_with(h, state, max_order, MomentOptions::default())
}

pub fn raw_moments_pauli_with<T: Real>(
    h: &PauliSum<T>,
    state: &StateVector<T>,
    max_order: usize,
    options: MomentOptions,
) -> Result<(MomentTable<T>, CacheStats)> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension {
            expected: h.n_qubits(),
            found: state.n_qubits(),
        });
    }
    if !state.is_normalized() {
        return Err(Error::Contract("trial state is not normalized".into()));
    }
    h.require_hermitian()?;
    let mut cache = PauliExpectationCache::new();
    let mut uncached = CacheStats::default();
    let mut lookup = |p: &PauliString| {
        if options.use_cache {
            cache.get_or_compute(p, state)
        } else {
            uncached.misses += 1;
            Ok(state.pauli_expectation(p)?.re)
        }
    };
    // expand the centred Hamiltonian so higher moments carry no large mean
    let mean = MomentExpansion::build(h, 1)?.evaluate_order(1, &mut lookup)?;
    let expansion = MomentExpansion::build(&h.shifted(-mean), max_order)?;
    let central = expansion.evaluate(&mut lookup)?;
    let stats = if options.use_cache { cache.stats() } else { uncached };
    Ok((MomentTable::from_central(mean, &central), stats))
}

/// Raw moments by repeated application of `H` to the dense state.
pub fn raw_moments_dense<T: Real>(h: &PauliSum<T>, state: &StateVector<T>, max_order: usize) -> Result<MomentTable<T>> {
    if max_order < 1 {
        return Err(Error::Contract("max_order must be at least 1".into()));
    }
    if h.n_qubits() > DEFAULT_DENSE_LIMIT {
        return Err(Error::Capacity {
            n_qubits: h.n_qubits(),
            limit: DEFAULT_DENSE_LIMIT,
        });
    }
    h.require_hermitian()?;
    let mut v = state.clone();
    let mut raw = Vec::with_capacity(max_order);
    for _ in 0..max_order {
        v = v.apply_sum(h)?;
        raw.push(state.inner(&v)?.re);
    }
    Ok(MomentTable::from_raw(&raw))
}

/// Smallest eigenvalue of the Hankel matrix `[K_{i+j}]_{i,j=0..=m}`.
pub fn hankel_min_eigenvalue<T: Real>(table: &MomentTable<T>, m: usize) -> Result<T> {
    let hk = table.hankel(m)?;
    let ev = SymmetricEigen::new(hk).eigenvalues;
    Ok(ev.iter().copied().fold(ev[0], |a, b| a.min(b)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation<T> {
    /// Keep the `n` largest-magnitude terms.
    Keep(usize),
    /// Keep terms with `|h| > threshold`.
    Threshold(T),
}

/// Reduced Hamiltonian `H'` with fewer terms. Ties are broken by label order;
/// `Keep(n)` with `n` at least the term count returns `H` unchanged.
pub fn truncate_hamiltonian<T: Real>(h: &PauliSum<T>, rule: Truncation<T>) -> Result<PauliSum<T>> {
    let mut terms = h.sorted_terms();
    // stable sort keeps label order among equal magnitudes
    terms.sort_by(|a, b| cabs(b.1).partial_cmp(&cabs(a.1)).unwrap_or(std::cmp::Ordering::Equal));
    let kept: Vec<_> = match rule {
        Truncation::Keep(n) => {
            if n < 1 {
                return Err(Error::Contract("keep must be at least 1".into()));
            }
            terms.into_iter().take(n).collect()
        }
        Truncation::Threshold(t) => {
            if t < T::zero() {
                return Err(Error::Contract("threshold must be nonnegative".into()));
            }
            terms
                .into_iter()
                .filter(|(_, c)| cabs(*c) > t || t == T::zero())
                .collect()
        }
    };
    let mut out = PauliSum::with_prune(h.n_qubits(), h.prune_threshold());
    for (p, c) in kept {
        out.add_term(p, c)?;
    }
    Ok(out)
}
