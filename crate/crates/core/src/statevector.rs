//! Dense statevectors, trial-state preparation and the exact-diagonalization oracle.
//!
//! Qubit 0 is the leftmost label character and the most significant bit of
//! the amplitude index, so `basis_state("01")` has its amplitude at index 1.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::{i_pow, Complex, Real};

/// Largest register accepted by dense routines unless overridden.
pub const DEFAULT_DENSE_LIMIT: usize = 14;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

/// Reverses the low `n` bits so that qubit `q` maps to index bit `n - 1 - q`.
#[inline]
fn to_index_mask(mask: u64, n: usize) -> usize {
    if mask == 0 {
        return 0;
    }
    (mask.reverse_bits() >> (64 - n)) as usize
}

impl<T: Real> StateVector<T> {
    /// Computational basis state from a bitstring such as `"0110"`.
    pub fn basis_state(bits: &str) -> Result<Self> {
        let n = bits.chars().count();
        if n == 0 || n > crate::pauli::MAX_QUBITS {
            return Err(Error::Contract(format!("bitstring '{bits}' has invalid length")));
        }
        let mut index = 0usize;
        for c in bits.chars() {
            index <<= 1;
            match c {
                '0' => {}
                '1' => index |= 1,
                _ => return Err(Error::Contract(format!("invalid bit '{c}' in '{bits}'"))),
            }
        }
        let mut amplitudes = vec![Complex::<T>::default(); 1usize << n];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self {
            n_qubits: n,
            amplitudes,
        })
    }

    /// Like [`basis_state`](Self::basis_state) but checks the register width.
    pub fn basis_state_on(bits: &str, n_qubits: usize) -> Result<Self> {
        let found = bits.chars().count();
        if found != n_qubits {
            return Err(Error::Dimension {
                expected: n_qubits,
                found,
            });
        }
        Self::basis_state(bits)
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::Dimension {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
            .sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| a.unscale(n)).collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::tolerance(1e-10)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_dim(other.n_qubits)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::<T>::default(), |acc, (a, b)| acc + a.conj() * b))
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            Err(Error::Dimension {
                expected: self.n_qubits,
                found: n,
            })
        } else {
            Ok(())
        }
    }

    /// Expected value of `Z` on `qubit`.
    pub fn z_expectation(&self, qubit: usize) -> Result<T> {
        let z = PauliString::single(self.n_qubits, qubit, 'Z')?;
        Ok(self.pauli_expectation(&z)?.re)
    }

    /// `p|self⟩`, exact up to the ±1, ±i factors.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<Self> {
        self.check_dim(p.n_qubits())?;
        let mut out = vec![Complex::<T>::default(); self.dim()];
        self.apply_pauli_into(p, Complex::new(T::one(), T::zero()), &mut out);
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// Accumulates `coeff · p|self⟩` into `out`.
    pub(crate) fn apply_pauli_into(&self, p: &PauliString, coeff: Complex<T>, out: &mut [Complex<T>]) {
        let n = self.n_qubits;
        let xi = to_index_mask(p.x_mask(), n);
        let zi = to_index_mask(p.z_mask(), n);
        let y_count = (p.x_mask() & p.z_mask()).count_ones() as u8;
        let factor = coeff * i_pow::<T>(p.phase_exponent().wrapping_add(y_count));
        for (i, a) in self.amplitudes.iter().enumerate() {
            let v = *a * factor;
            let target = &mut out[i ^ xi];
            if (i & zi).count_ones() % 2 == 1 {
                *target -= v;
            } else {
                *target += v;
            }
        }
    }

    /// `⟨self|p|self⟩` for a single string.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex<T>> {
        self.check_dim(p.n_qubits())?;
        let n = self.n_qubits;
        let xi = to_index_mask(p.x_mask(), n);
        let zi = to_index_mask(p.z_mask(), n);
        let y_count = (p.x_mask() & p.z_mask()).count_ones() as u8;
        let mut acc: Complex<T> = Complex::default();
        for (i, a) in self.amplitudes.iter().enumerate() {
            let term = self.amplitudes[i ^ xi].conj() * a;
            if (i & zi).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        Ok(acc * i_pow::<T>(p.phase_exponent().wrapping_add(y_count)))
    }

    /// `H|self⟩` by per-term accumulation.
    pub fn apply_sum(&self, h: &PauliSum<T>) -> Result<Self> {
        self.check_dim(h.n_qubits())?;
        let mut out = vec![Complex::<T>::default(); self.dim()];
        for (p, c) in h.iter() {
            self.apply_pauli_into(p, *c, &mut out);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// `⟨self|H|self⟩` for Hermitian `H`; the imaginary residual is checked.
    pub fn expectation(&self, h: &PauliSum<T>) -> Result<T> {
        h.require_hermitian()?;
        let mut acc: Complex<T> = Complex::default();
        for (p, c) in h.iter() {
            acc += *c * self.pauli_expectation(p)?;
        }
        if acc.im.abs() > T::tolerance(1e-10) * (T::one() + acc.re.abs()) {
            return Err(Error::Contract(format!(
                "expectation has imaginary residual {:e}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// `exp(iθg)|self⟩ = (cos θ + i sin θ g)|self⟩` for a phaseless generator.
    pub fn apply_generator_rotation(&self, theta: T, g: &PauliString) -> Result<Self> {
        if !g.is_phaseless() {
            return Err(Error::Contract(format!("generator {g} is not phaseless")));
        }
        self.check_dim(g.n_qubits())?;
        let (s, c) = theta.sin_cos();
        let mut out: Vec<Complex<T>> = self.amplitudes.iter().map(|a| a.scale(c)).collect();
        self.apply_pauli_into(g, Complex::new(T::zero(), s), &mut out);
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: out,
        })
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        if !self.is_normalized() || !other.is_normalized() {
            return Err(Error::Contract("fidelity requires normalized states".into()));
        }
        let f = self.inner(other)?.norm_sqr();
        Ok(f.min(T::one()))
    }
}

/// Full spectrum of a Hamiltonian.
#[derive(Clone, Debug)]
pub struct SpectrumResult<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    pub ground_vector: StateVector<T>,
    /// Largest `‖Hv − λv‖` over all eigenpairs.
    pub max_residual: T,
}

impl<T: Real> SpectrumResult<T> {
    pub fn ground_energy(&self) -> T {
        self.eigenvalues[0]
    }
}

fn check_dense_limit(n_qubits: usize, limit: usize) -> Result<()> {
    if n_qubits > limit {
        Err(Error::Capacity { n_qubits, limit })
    } else {
        Ok(())
    }
}

/// Dense matrix of `H` in the computational basis.
pub fn dense_matrix<T: Real>(h: &PauliSum<T>, limit: usize) -> Result<DMatrix<Complex<T>>> {
    let n = h.n_qubits();
    check_dense_limit(n, limit)?;
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex<T>>::zeros(dim, dim);
    let mut col = vec![Complex::<T>::default(); dim];
    for j in 0..dim {
        col.iter_mut().for_each(|c| *c = Complex::default());
        let mut e = vec![Complex::<T>::default(); dim];
        e[j] = Complex::new(T::one(), T::zero());
        let basis = StateVector {
            n_qubits: n,
            amplitudes: e,
        };
        for (p, c) in h.iter() {
            basis.apply_pauli_into(p, *c, &mut col);
        }
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

pub fn exact_diagonalize<T: Real>(h: &PauliSum<T>) -> Result<SpectrumResult<T>> {
    exact_diagonalize_with_limit(h, DEFAULT_DENSE_LIMIT)
}

/// Dense Hermitian eigendecomposition.
pub fn exact_diagonalize_with_limit<T: Real>(h: &PauliSum<T>, limit: usize) -> Result<SpectrumResult<T>> {
    h.require_hermitian()?;
    let m = dense_matrix(h, limit)?;
    let n = h.n_qubits();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<T> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut max_residual = T::zero();
    for &i in &order {
        let v: DVector<Complex<T>> = eig.eigenvectors.column(i).into_owned();
        let lambda = Complex::new(eig.eigenvalues[i], T::zero());
        let r = (&m * &v - v.scale(T::one()) * lambda).norm();
        if r > max_residual {
            max_residual = r;
        }
    }

    let g = eig.eigenvectors.column(order[0]);
    let ground_vector = StateVector {
        n_qubits: n,
        amplitudes: g.iter().copied().collect(),
    }
    .normalized();
    Ok(SpectrumResult {
        eigenvalues,
        ground_vector,
        max_residual,
    })
}

/// Dimension of the Krylov space spanned by `{H^k|s⟩}`, from the rank of its
/// Gram matrix (relative eigenvalue cutoff `tol`).
pub fn krylov_dimension<T: Real>(h: &PauliSum<T>, s: &StateVector<T>, tol: T) -> Result<usize> {
    let dim = s.dim();
    let mut vectors = vec![s.clone()];
    for _ in 1..dim.min(64) {
        let next = vectors.last().expect("nonempty").apply_sum(h)?;
        let nrm = next.norm();
        if nrm == T::zero() {
            break;
        }
        // keep magnitudes comparable; rank is scale invariant per vector
        vectors.push(StateVector {
            n_qubits: next.n_qubits,
            amplitudes: next.amplitudes.iter().map(|a| a.unscale(nrm)).collect(),
        });
        let k = vectors.len();
        let gram = DMatrix::<Complex<T>>::from_fn(k, k, |i, j| vectors[i].inner(&vectors[j]).expect("same register"));
        let ev = SymmetricEigen::new(gram).eigenvalues;
        let max = ev.iter().fold(T::zero(), |a, &b| a.max(b.abs()));
        let rank = ev.iter().filter(|&&e| e > tol * max).count();
        if rank < k {
            return Ok(rank);
        }
    }
    Ok(vectors.len())
}
