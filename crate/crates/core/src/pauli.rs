//! Pauli strings in symplectic form and Hamiltonians as Pauli sums.
//!
//! A [`PauliString`] stores one X bit and one Z bit per qubit plus a quartic
//! phase. The letter on qubit `q` is read from `(x_q, z_q)`:
//! `(0,0) = I`, `(1,0) = X`, `(0,1) = Z`, `(1,1) = Y`, with `Y = iXZ`.
//! The string is `i^phase` times the tensor product of those letters, so a
//! phaseless string is Hermitian and squares to the identity.
//!
//! Labels are read left to right as qubits `0..n`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::BuildHasherDefault;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, i_pow, Complex, Real};

/// Maximum register width representable by the 64-bit masks.
pub const MAX_QUBITS: usize = 64;

/// Default magnitude below which collected coefficients are dropped.
pub const DEFAULT_PRUNE: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PauliString {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    phase: u8,
}

#[inline]
fn width_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self::from_masks(n_qubits, 0, 0, 0)
    }

    /// Builds a string from raw masks; bits above `n_qubits` are cleared.
    pub fn from_masks(n_qubits: usize, x_mask: u64, z_mask: u64, phase: u8) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits), "n_qubits must be in 1..=64");
        let w = width_mask(n_qubits);
        Self {
            n_qubits,
            x_mask: x_mask & w,
            z_mask: z_mask & w,
            phase: phase & 3,
        }
    }

    /// Single-letter string `letter` on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, letter: char) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::Dimension {
                expected: n_qubits,
                found: qubit + 1,
            });
        }
        let (x, z) = letter_bits(letter).ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("invalid Pauli letter '{letter}'"),
        })?;
        Ok(Self::from_masks(n_qubits, (x as u64) << qubit, (z as u64) << qubit, 0))
    }

    /// Parses a dense label such as `XXIZ`, optionally prefixed by a phase
    /// (`-`, `i`, `-i`, `+`).
    pub fn parse_label(label: &str) -> Result<Self> {
        let (phase, body) = if let Some(rest) = label.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = label.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = label.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('+') {
            (0, rest)
        } else {
            (0, label)
        };
        let n = body.chars().count();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Parse {
                line: 0,
                message: format!("label '{label}' must have 1..=64 letters"),
            });
        }
        let mut x = 0u64;
        let mut z = 0u64;
        for (q, c) in body.chars().enumerate() {
            let (xb, zb) = letter_bits(c).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("invalid Pauli letter '{c}' in '{label}'"),
            })?;
            x |= (xb as u64) << q;
            z |= (zb as u64) << q;
        }
        Ok(Self::from_masks(n, x, z, phase))
    }

    /// Parses a sparse label such as `Y0X1X2X3` on an `n_qubits` register.
    pub fn parse_sparse(label: &str, n_qubits: usize) -> Result<Self> {
        let err = |m: String| Error::Parse { line: 0, message: m };
        let mut out = Self::identity(n_qubits);
        let chars: Vec<char> = label.chars().collect();
        let mut i = 0;
        if chars.is_empty() {
            return Err(err("empty sparse label".into()));
        }
        while i < chars.len() {
            let letter = chars[i];
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(err(format!("missing qubit index after '{letter}' in '{label}'")));
            }
            let idx: usize = chars[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| err(format!("bad qubit index in '{label}'")))?;
            let factor = Self::single(n_qubits, idx, letter)
                .map_err(|_| err(format!("term '{letter}{idx}' invalid on {n_qubits} qubits")))?;
            if out.x_mask & factor.x_mask != 0 || out.z_mask & factor.z_mask != 0 {
                return Err(err(format!("qubit {idx} repeated in '{label}'")));
            }
            out = out.multiply(&factor)?;
        }
        Ok(out)
    }

    /// Accepts either a dense label of exactly `n_qubits` letters or a sparse label.
    pub fn parse_any(label: &str, n_qubits: usize) -> Result<Self> {
        if label.chars().count() == n_qubits && label.chars().all(|c| letter_bits(c).is_some()) {
            Self::parse_label(label)
        } else {
            Self::parse_sparse(label, n_qubits)
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn is_phaseless(&self) -> bool {
        self.phase == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Diagonal in the computational basis (only I and Z letters).
    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    /// Same letters with the phase dropped.
    pub fn phaseless(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    pub fn with_phase(&self, phase: u8) -> Self {
        Self {
            phase: phase & 3,
            ..*self
        }
    }

    /// Letter acting on `qubit`.
    pub fn letter(&self, qubit: usize) -> char {
        let x = (self.x_mask >> qubit) & 1;
        let z = (self.z_mask >> qubit) & 1;
        match (x, z) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, 1) => 'Z',
            _ => 'Y',
        }
    }

    /// Letters only, without the phase prefix.
    pub fn label(&self) -> String {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    /// Exact group product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self.mul_unchecked(other))
    }

    /// Product for strings already known to share a register.
    ///
    /// Writing each letter as `i^(x z) X^x Z^z`, the product picks up
    /// `(-1)^(z_a x_b)` from moving `Z^z_a` past `X^x_b`, and the result is
    /// re-expressed with `i^(-x z)`.
    #[inline]
    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let x = self.x_mask ^ other.x_mask;
        let z = self.z_mask ^ other.z_mask;
        let mut e = self.phase as u32 + other.phase as u32;
        e += (self.x_mask & self.z_mask).count_ones();
        e += (other.x_mask & other.z_mask).count_ones();
        e += 2 * (self.z_mask & other.x_mask).count_ones();
        e += 3 * (x & z).count_ones();
        Self {
            n_qubits: self.n_qubits,
            x_mask: x,
            z_mask: z,
            phase: (e & 3) as u8,
        }
    }

    /// True when the two strings commute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let s = (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        s.is_multiple_of(2)
    }

    /// The phase factor `i^phase` as a complex number.
    pub fn phase_factor<T: Real>(&self) -> Complex<T> {
        i_pow(self.phase)
    }
}

/// Left fold of [`PauliString::multiply`]; the empty product is the identity
/// on `n_qubits`.
pub fn reduce_product(n_qubits: usize, factors: &[PauliString]) -> Result<PauliString> {
    factors
        .iter()
        .try_fold(PauliString::identity(n_qubits), |acc, f| acc.multiply(f))
}

fn letter_bits(c: char) -> Option<(bool, bool)> {
    match c {
        'I' => Some((false, false)),
        'X' => Some((true, false)),
        'Y' => Some((true, true)),
        'Z' => Some((false, true)),
        _ => None,
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}{}", self.label())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_label(s)
    }
}

// Fixed-key hasher: iteration order depends only on insertion order, so
// float accumulation is reproducible across runs.
type TermMap<T> = HashMap<PauliString, Complex<T>, BuildHasherDefault<DefaultHasher>>;

/// A Hamiltonian `Σ_j h_j P_j` keyed by phaseless strings.
#[derive(Clone, Debug)]
pub struct PauliSum<T: Real> {
    n_qubits: usize,
    terms: TermMap<T>,
    prune: T,
}

impl<T: Real> PartialEq for PauliSum<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n_qubits == other.n_qubits && self.terms == other.terms
    }
}

impl<T: Real> PauliSum<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self::with_prune(n_qubits, T::lit(DEFAULT_PRUNE))
    }

    pub fn with_prune(n_qubits: usize, prune: T) -> Self {
        assert!((1..=MAX_QUBITS).contains(&n_qubits));
        Self {
            n_qubits,
            terms: TermMap::default(),
            prune,
        }
    }

    /// Builds a sum from `(coefficient, label)` pairs with real coefficients.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::Contract("empty term list".into()))?;
        let n = first.1.len();
        let mut sum = Self::new(n);
        for (c, label) in terms {
            let p = PauliString::parse_label(label)?;
            sum.add_term(p, Complex::new(T::lit(*c), T::zero()))?;
        }
        Ok(sum)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn prune_threshold(&self) -> T {
        self.prune
    }

    pub fn set_prune_threshold(&mut self, prune: T) {
        self.prune = prune;
        self.prune_small();
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff · p`, folding the string's phase into the coefficient.
    pub fn add_term(&mut self, p: PauliString, coeff: Complex<T>) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        self.accumulate(p.phaseless(), coeff * p.phase_factor::<T>());
        if let Some(c) = self.terms.get(&p.phaseless()) {
            if cabs(*c) < self.prune {
                self.terms.remove(&p.phaseless());
            }
        }
        Ok(())
    }

    #[inline]
    fn accumulate(&mut self, key: PauliString, coeff: Complex<T>) {
        *self.terms.entry(key).or_default() += coeff;
    }

    fn prune_small(&mut self) {
        let prune = self.prune;
        self.terms.retain(|_, c| cabs(*c) >= prune);
    }

    /// Coefficient of a phaseless string (zero when absent).
    pub fn coefficient(&self, p: &PauliString) -> Complex<T> {
        self.terms.get(&p.phaseless()).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex<T>)> {
        self.terms.iter()
    }

    /// Terms in canonical (lexicographic label) order.
    pub fn sorted_terms(&self) -> Vec<(PauliString, Complex<T>)> {
        let mut v: Vec<_> = self.terms.iter().map(|(p, c)| (*p, *c)).collect();
        v.sort_by_cached_key(|(p, _)| p.label());
        v
    }

    /// All coefficients have imaginary parts below `tol · max(1, max|h|)`.
    pub fn is_hermitian_within(&self, tol: T) -> bool {
        let scale = self
            .terms
            .values()
            .map(|c| cabs(*c))
            .fold(T::one(), |a, b| if b > a { b } else { a });
        self.terms.values().all(|c| c.im.abs() <= tol * scale)
    }

    pub fn is_hermitian(&self) -> bool {
        self.is_hermitian_within(T::lit(1e-12))
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::Contract("Hamiltonian is not Hermitian".into()))
        }
    }

    /// Product of two sums with coefficient collection and pruning.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut out = Self::with_prune(self.n_qubits, self.prune);
        out.terms.reserve(self.len().max(other.len()));
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let p = a.mul_unchecked(b);
                out.accumulate(p.phaseless(), *ca * *cb * p.phase_factor::<T>());
            }
        }
        out.prune_small();
        Ok(out)
    }

    /// `self + c·I`.
    pub fn shifted(&self, c: T) -> Self {
        let mut out = self.clone();
        out.accumulate(PauliString::identity(self.n_qubits), Complex::new(c, T::zero()));
        out.prune_small();
        out
    }

    /// Sum with every coefficient multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.scale(s);
        }
        out.prune_small();
        out
    }

    /// Largest coefficient magnitude.
    pub fn max_coefficient(&self) -> T {
        self.terms
            .values()
            .map(|c| cabs(*c))
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Parses the line-oriented text format `<real> [<imag>] <label>`.
///
/// Repeated labels are summed; `#` starts a comment.
pub fn parse_pauli_sum<T: Real>(text: &str) -> Result<PauliSum<T>> {
    let mut sum: Option<PauliSum<T>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (re, im, label) = match fields.as_slice() {
            [re, label] => (*re, "0", *label),
            [re, im, label] => (*re, *im, *label),
            _ => return Err(perr(format!("expected '<real> [<imag>] <label>', got '{line}'"))),
        };
        let re: f64 = re.parse().map_err(|_| perr(format!("invalid real part '{re}'")))?;
        let im: f64 = im.parse().map_err(|_| perr(format!("invalid imaginary part '{im}'")))?;
        if !label.chars().all(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            return Err(perr(format!("invalid label '{label}'")));
        }
        let p = PauliString::parse_label(label).map_err(|e| match e {
            Error::Parse { message, .. } => perr(message),
            other => other,
        })?;
        let s = sum.get_or_insert_with(|| PauliSum::new(p.n_qubits()));
        if s.n_qubits() != p.n_qubits() {
            return Err(perr(format!(
                "label '{label}' has {} qubits, expected {}",
                p.n_qubits(),
                s.n_qubits()
            )));
        }
        s.accumulate(p, Complex::new(T::lit(re), T::lit(im)));
    }
    let mut sum = sum.ok_or_else(|| Error::Parse {
        line: 0,
        message: "no terms found".into(),
    })?;
    sum.prune_small();
    Ok(sum)
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Canonical text form: labels sorted, 17 significant digits, imaginary part
/// only when nonzero.
pub fn serialize_pauli_sum<T: Real>(sum: &PauliSum<T>) -> String {
    let mut out = String::new();
    for (p, c) in sum.sorted_terms() {
        let re = format_float(c.re.as_f64());
        if c.im == T::zero() {
            out.push_str(&format!("{re} {}\n", p.label()));
        } else {
            out.push_str(&format!("{re} {} {}\n", format_float(c.im.as_f64()), p.label()));
        }
    }
    out
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
struct TermRecord {
    label: String,
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
struct HamiltonianDocument {
    n_qubits: usize,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
    #[serde(default)]
    terms: Vec<TermRecord>,
}

/// Structured (TOML) Hamiltonian file carrying `n_qubits` and free-form metadata.
pub fn to_structured<T: Real>(sum: &PauliSum<T>, metadata: &BTreeMap<String, String>) -> String {
    let doc = HamiltonianDocument {
        n_qubits: sum.n_qubits(),
        metadata: metadata.clone(),
        terms: sum
            .sorted_terms()
            .into_iter()
            .map(|(p, c)| TermRecord {
                label: p.label(),
                re: c.re.as_f64(),
                im: c.im.as_f64(),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("hamiltonian document serializes")
}

pub fn from_structured<T: Real>(text: &str) -> Result<(PauliSum<T>, BTreeMap<String, String>)> {
    let doc: HamiltonianDocument = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    if doc.n_qubits == 0 || doc.n_qubits > MAX_QUBITS {
        return Err(Error::Parse {
            line: 0,
            message: format!("n_qubits = {} out of range", doc.n_qubits),
        });
    }
    let mut sum = PauliSum::new(doc.n_qubits);
    for (i, t) in doc.terms.iter().enumerate() {
        let p = PauliString::parse_label(&t.label).map_err(|_| Error::Parse {
            line: 0,
            message: format!("term {i}: invalid label '{}'", t.label),
        })?;
        if p.n_qubits() != doc.n_qubits {
            return Err(Error::Parse {
                line: 0,
                message: format!("term {i}: label '{}' does not have {} qubits", t.label, doc.n_qubits),
            });
        }
        sum.accumulate(p, Complex::new(T::lit(t.re), T::lit(t.im)));
    }
    sum.prune_small();
    Ok((sum, doc.metadata))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
