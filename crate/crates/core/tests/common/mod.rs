//! Independent dense-matrix oracles shared by the integration tests. Nothing
//! here goes through the symplectic representation.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex<f64>;

pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn single(letter: char) -> DMatrix<C> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match letter {
        'I' => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        'X' => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        'Y' => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        _ => panic!("bad letter {letter}"),
    }
}

/// Kronecker product with qubit 0 as the most significant factor.
pub fn label_matrix(label: &str) -> DMatrix<C> {
    label
        .chars()
        .map(single)
        .reduce(|acc, m| acc.kronecker(&m))
        .expect("non-empty label")
}

pub fn sum_matrix(terms: &[(f64, String)]) -> DMatrix<C> {
    let n = terms[0].1.len();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for (w, l) in terms {
        m += label_matrix(l) * c(*w, 0.0);
    }
    m
}

pub fn basis(bits: &str) -> DVector<C> {
    let idx = usize::from_str_radix(bits, 2).unwrap();
    let mut v = DVector::zeros(1 << bits.len());
    v[idx] = c(1.0, 0.0);
    v
}

/// `⟨φ|Hⁿ|φ⟩` for `n = 1..=max` by repeated matrix-vector products.
pub fn dense_moments(h: &DMatrix<C>, phi: &DVector<C>, max: usize) -> Vec<f64> {
    let mut v = phi.clone();
    (0..max)
        .map(|_| {
            v = h * &v;
            phi.dotc(&v).re
        })
        .collect()
}

pub fn random_label(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n).map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)]).collect()
}

/// Random real-coefficient Pauli sum (Hermitian by construction).
pub fn random_terms(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(f64, String)> {
    (0..count)
        .map(|_| (rng.random_range(-1.0..1.0), random_label(rng, n)))
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn eigenvalues(h: &DMatrix<C>) -> Vec<f64> {
    let mut ev: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Eigenvalues of `H` restricted to the Krylov space of `φ`, with weights
/// `|⟨ψ_k|φ⟩|²`, merged when closer than `tol`.
pub fn reachable_spectrum(h: &DMatrix<C>, phi: &DVector<C>, tol: f64) -> Vec<(f64, f64)> {
    let eig = h.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..eig.eigenvalues.len())
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).dotc(phi).norm_sqr()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (e, w) in pairs {
        match merged.last_mut() {
            Some(last) if (e - last.0).abs() < tol => last.1 += w,
            _ => merged.push((e, w)),
        }
    }
    merged.into_iter().filter(|&(_, w)| w > 1e-12).collect()
}

/// Fixed-seed sweep whose output is checked in under `tests/golden`.
pub const GOLDEN_ARGS: &[&str] = &[
    "qcmx",
    "sweep",
    "--model",
    "siam",
    "--u",
    "8",
    "--values",
    "0.1,0.5,1,2,3,6,10",
    "--methods",
    "mean,pds:2,pds:3,cmx-cioslowski:2,cmx-cioslowski:3,cmx-knowles:2,cmx-knowles:3",
    "--seed",
    "20240607",
];

pub fn golden_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/siam_sweep.csv")
}
