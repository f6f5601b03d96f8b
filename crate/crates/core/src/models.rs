//! Benchmark Hamiltonians: the two-site Anderson impurity model and the
//! six-term two-qubit H₂ form.
//!
//! Anderson-model qubit layout (an assumption; only the pairing structure is
//! fixed by the Hamiltonian): qubits 0 and 1 are the spin-up impurity and
//! bath orbitals, qubits 2 and 3 the spin-down ones. The repulsion couples
//! qubits 0 and 2, hopping acts within (0,1) and (2,3). The trial state
//! `|0110⟩` therefore has an up electron on the bath and a down electron on
//! the impurity, and has mean energy −4 at half filling with `U = 8`.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::scalar::{Complex, Real};

/// Single-impurity Anderson model parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiamParams<T> {
    /// On-site repulsion.
    pub u: T,
    /// Chemical potential.
    pub mu: T,
    /// Impurity site energy.
    pub eps0: T,
    /// Bath site energy.
    pub eps1: T,
    /// Hybridization.
    pub v: T,
}

impl<T: Real> SiamParams<T> {
    pub fn new(u: T, mu: T, eps0: T, eps1: T, v: T) -> Self {
        Self { u, mu, eps0, eps1, v }
    }

    /// Half filling: `mu = U/2`, `eps0 = 0`, `eps1 = mu`.
    pub fn half_filling(u: T, v: T) -> Self {
        let mu = u / T::lit(2.0);
        Self {
            u,
            mu,
            eps0: T::zero(),
            eps1: mu,
            v,
        }
    }
}

/// Jordan–Wigner Hamiltonian of the two-site model on four qubits:
///
/// `U/4 (I − Z0)(I − Z2) + (ε0 − μ)/2 (2I − Z0 − Z2) + (ε1 − μ)/2 (2I − Z1 − Z3)
///  + V/2 (X0X1 + Y0Y1 + X2X3 + Y2Y3)`.
pub fn siam_hamiltonian<T: Real>(p: &SiamParams<T>) -> PauliSum<T> {
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    let imp = (p.eps0 - p.mu) * half;
    let bath = (p.eps1 - p.mu) * half;
    let hop = p.v * half;
    let u4 = p.u * quarter;
    let two = T::lit(2.0);

    let terms: [(T, &str); 10] = [
        (u4 + two * imp + two * bath, "IIII"),
        (-u4 - imp, "ZIII"),
        (-u4 - imp, "IIZI"),
        (u4, "ZIZI"),
        (-bath, "IZII"),
        (-bath, "IIIZ"),
        (hop, "XXII"),
        (hop, "YYII"),
        (hop, "IIXX"),
        (hop, "IIYY"),
    ];
    let mut sum = PauliSum::new(4);
    for (c, label) in terms {
        sum.add_term(label.parse().expect("static label"), Complex::new(c, T::zero()))
            .expect("four-qubit label");
    }
    sum
}

/// Ground energy at half filling, `−(U + √(U² + 64V²))/4`.
pub fn siam_fci_energy<T: Real>(u: T, v: T) -> T {
    -(u + (u * u + T::lit(64.0) * v * v).sqrt()) / T::lit(4.0)
}

/// Six coefficients of `g0 I + g1 Z0 + g2 Z1 + g3 Z0Z1 + g4 X0X1 + g5 Y0Y1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Coefficients<T> {
    pub g: [T; 6],
    /// Bond length label in Å, when known.
    pub r: Option<T>,
}

impl<T: Real> H2Coefficients<T> {
    pub fn new(g: [T; 6]) -> Result<Self> {
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("H2 coefficients must be finite".into()));
        }
        Ok(Self { g, r: None })
    }
}

pub fn h2_bk_hamiltonian<T: Real>(c: &H2Coefficients<T>) -> PauliSum<T> {
    let labels = ["II", "ZI", "IZ", "ZZ", "XX", "YY"];
    let mut sum = PauliSum::new(2);
    for (g, label) in c.g.iter().zip(labels) {
        sum.add_term(label.parse().expect("static label"), Complex::new(*g, T::zero()))
            .expect("two-qubit label");
    }
    sum
}

/// Reads a potential-energy-surface table with header `R,g0,g1,g2,g3,g4,g5`.
pub fn load_h2_pes<T: Real>(path: &Path) -> Result<Vec<H2Coefficients<T>>> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_h2_pes(&text)
}

pub fn parse_h2_pes<T: Real>(text: &str) -> Result<Vec<H2Coefficients<T>>> {
    const HEADER: [&str; 7] = ["R", "g0", "g1", "g2", "g3", "g4", "g5"];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut saw_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if !saw_header {
            let fields: Vec<&str> = record.iter().collect();
            if fields != HEADER {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header {}", HEADER.join(",")),
                });
            }
            saw_header = true;
            continue;
        }
        if record.len() != 7 {
            return Err(Error::Parse {
                line,
                message: format!("expected 7 columns, found {}", record.len()),
            });
        }
        let mut vals = [0.0f64; 7];
        for (slot, field) in vals.iter_mut().zip(record.iter()) {
            *slot = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid number '{field}'"),
            })?;
        }
        let g = [vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]].map(T::lit);
        let mut c = H2Coefficients::new(g).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        c.r = Some(T::lit(vals[0]));
        rows.push(c);
    }
    Ok(rows)
}

/// Serializes rows in the format read by [`parse_h2_pes`].
pub fn write_h2_pes<T: Real>(rows: &[H2Coefficients<T>]) -> String {
    let mut out = String::from("R,g0,g1,g2,g3,g4,g5\n");
    for row in rows {
        let mut fields = vec![crate::pauli::format_float(row.r.unwrap_or_default().as_f64())];
        fields.extend(row.g.iter().map(|g| crate::pauli::format_float(g.as_f64())));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
