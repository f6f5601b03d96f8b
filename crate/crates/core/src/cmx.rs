//! Connected-moments expansions of the ground-state energy.
//!
//! Cioslowski's resummation evaluates the nested continued product
//!
//! ```text
//! E = I1 − S21²/S31 · (1 + S22²/(S21² S32) · (1 + S23²/(S22² S33) · (…)))
//! ```
//!
//! with `S_{k,1} = I_k` and `S_{k,i+1} = S_{k,1} S_{k+2,i} − S_{k+1,i}²`,
//! truncated after `K` terms. The product telescopes, so the `K`-th order
//! energy is `I1 − Σ_{t=1}^{K−1} S_{2,t}² / Π_{j=1}^{t} S_{3,j}`.
//!
//! Knowles's variant replaces the nested product by `E = I1 − bᵀ A⁻¹ b` with
//! `b_i = I_{i+1}` and `A_ij = I_{i+j+1}`.
//!
//! Singularity checks are made on dimensionless values: every `S_{k,i}` is a
//! homogeneous polynomial in the moments, so it is divided by `σ^deg`, where
//! `σ = max_{k≥2} |I_k|^{1/k}`. `I_1` is excluded so a constant shift of the
//! Hamiltonian never changes which denominators are flagged.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{Field, Real};

pub const DEFAULT_SINGULAR_TOL: f64 = 1e-10;
pub const DEFAULT_KNOWLES_COND: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmxMethod {
    Cioslowski,
    Knowles,
}

impl fmt::Display for CmxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmxMethod::Cioslowski => f.write_str("cmx-cioslowski"),
            CmxMethod::Knowles => f.write_str("cmx-knowles"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CmxOptions<T> {
    /// Threshold on dimensionless denominators.
    pub singular_tol: T,
    /// Condition number above which the Knowles solve uses a pseudo-inverse.
    pub knowles_cond: T,
}

impl<T: Real> Default for CmxOptions<T> {
    fn default() -> Self {
        Self {
            singular_tol: T::lit(DEFAULT_SINGULAR_TOL),
            knowles_cond: T::lit(DEFAULT_KNOWLES_COND),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Denominator<T> {
    pub label: String,
    /// Raw value.
    pub value: T,
    /// Value divided by the moment scale raised to its degree.
    pub scaled: T,
}

#[derive(Clone, Debug)]
pub struct CmxResult<T> {
    pub method: CmxMethod,
    pub order: usize,
    /// Energy at `order`; when singular, the last finite partial result.
    pub energy: T,
    /// `E(1)..E(order)`.
    pub per_order: Vec<T>,
    pub denominators: Vec<Denominator<T>>,
    pub singular_flag: bool,
    /// First order whose evaluation hit a singular denominator.
    pub first_singular_order: Option<usize>,
    /// Largest condition number met in a Knowles solve.
    pub condition_number: Option<T>,
    pub used_pseudo_inverse: bool,
}

fn require_moments<T>(connected: &[T], order: usize) -> Result<()> {
    if order < 1 {
        return Err(Error::Contract("expansion order must be at least 1".into()));
    }
    let needed = 2 * order - 1;
    if connected.len() < needed {
        return Err(Error::Arity {
            needed,
            available: connected.len(),
        });
    }
    Ok(())
}

/// `σ = max_{k≥2} |I_k|^{1/k}` over the supplied moments; 1 when all vanish.
pub fn moment_scale<T: Real>(connected: &[T]) -> T {
    let s = connected
        .iter()
        .enumerate()
        .skip(1)
        .map(|(idx, v)| v.abs().powf(T::one() / T::lit((idx + 1) as f64)))
        .fold(T::zero(), |a, b| a.max(b));
    if s > T::zero() && s.is_finite() {
        s
    } else {
        T::one()
    }
}

/// Degree of `S_{k,i}` as a polynomial in the moments (`I_k` has degree `k`).
fn s_degree(k: usize, i: usize) -> i32 {
    (1i32 << (i - 1)) * (k + i - 1) as i32
}

/// Lazily filled table of `S_{k,i}`; `connected[k-1] = I_k`.
struct STable<'a, T> {
    connected: &'a [T],
    memo: HashMap<(usize, usize), T>,
}

impl<'a, T: Real> STable<'a, T> {
    fn new(connected: &'a [T]) -> Self {
        Self {
            connected,
            memo: HashMap::new(),
        }
    }

    fn get(&mut self, k: usize, i: usize) -> T {
        if i == 1 {
            return self.connected[k - 1];
        }
        if let Some(v) = self.memo.get(&(k, i)) {
            return *v;
        }
        let a = self.get(k, 1);
        let b = self.get(k + 2, i - 1);
        let c = self.get(k + 1, i - 1);
        let v = a * b - c * c;
        self.memo.insert((k, i), v);
        v
    }
}

/// Cioslowski CMX(K) from `I_1..I_{2K−1}`.
pub fn cmx_cioslowski<T: Real>(connected: &[T], order: usize) -> Result<CmxResult<T>> {
    cmx_cioslowski_with(connected, order, &CmxOptions::default())
}

pub fn cmx_cioslowski_with<T: Real>(connected: &[T], order: usize, opts: &CmxOptions<T>) -> Result<CmxResult<T>> {
    require_moments(connected, order)?;
    let sigma = moment_scale(&connected[..2 * order - 1]);
    let mut table = STable::new(connected);
    let mut per_order = vec![connected[0]];
    let mut denominators = Vec::new();
    let mut first_singular = None;

    // The nested product telescopes: term t equals S_{2,t}² / Π_{j≤t} S_{3,j},
    // so only the S_{3,j} ever divide.
    let mut denominator_product = T::one();
    for m in 2..=order {
        let t = m - 1;
        let s3 = table.get(3, t);
        let scaled = s3 / sigma.powi(s_degree(3, t));
        denominators.push(Denominator {
            label: format!("S3,{t}"),
            value: s3,
            scaled,
        });
        denominator_product *= s3;
        let last = *per_order.last().expect("nonempty");
        let ok = scaled.abs() >= opts.singular_tol && s3.is_finite();
        let s2 = table.get(2, t);
        let next = last - s2 * s2 / denominator_product;
        if ok && first_singular.is_none() && next.is_finite() {
            per_order.push(next);
        } else {
            first_singular.get_or_insert(m);
            per_order.push(last);
        }
    }

    Ok(CmxResult {
        method: CmxMethod::Cioslowski,
        order,
        energy: *per_order.last().expect("nonempty"),
        per_order,
        denominators,
        singular_flag: first_singular.is_some(),
        first_singular_order: first_singular,
        condition_number: None,
        used_pseudo_inverse: false,
    })
}

/// Literal closed forms of CMX(2) and CMX(3) over any field.
///
/// `CMX(2) = I1 − I2²/I3`,
/// `CMX(3) = CMX(2) − (1/I3)(I2 I4 − I3²)²/(I5 I3 − I4²)`.
pub fn cmx_closed_form<F: Field>(connected: &[F], order: usize) -> Result<F> {
    if !(2..=3).contains(&order) {
        return Err(Error::Contract(format!(
            "closed form exists only for orders 2 and 3, not {order}"
        )));
    }
    require_moments(connected, order)?;
    let i = |k: usize| connected[k - 1].clone();
    if i(3).is_zero() {
        return Err(Error::Degenerate("I3 vanishes".into()));
    }
    let cmx2 = i(1) - i(2) * i(2) / i(3);
    if order == 2 {
        return Ok(cmx2);
    }
    let den = i(5) * i(3) - i(4) * i(4);
    if den.is_zero() {
        return Err(Error::Degenerate("I5 I3 − I4² vanishes".into()));
    }
    let num = i(2) * i(4) - i(3) * i(3);
    Ok(cmx2 - num.clone() * num / den / i(3))
}

/// Knowles CMX(K) from `I_1..I_{2K−1}`.
pub fn cmx_knowles<T: Real>(connected: &[T], order: usize) -> Result<CmxResult<T>> {
    cmx_knowles_with(connected, order, &CmxOptions::default())
}

pub fn cmx_knowles_with<T: Real>(connected: &[T], order: usize, opts: &CmxOptions<T>) -> Result<CmxResult<T>> {
    require_moments(connected, order)?;
    let sigma = moment_scale(&connected[..2 * order - 1]);
    let i1 = connected[0];
    let mut per_order = vec![i1];
    let mut denominators = Vec::new();
    let mut first_singular = None;
    let mut max_cond: Option<T> = None;
    let mut used_pinv = false;

    for k in 2..=order {
        let n = k - 1;
        // dimensionless system: Ã_ij = A_ij/σ^(i+j+1), b̃_i = b_i/σ^(i+1)
        let a = DMatrix::from_fn(n, n, |r, c| {
            let deg = (r + 1) + (c + 1) + 1;
            connected[deg - 1] / sigma.powi(deg as i32)
        });
        let b = DVector::from_fn(n, |r, _| {
            let deg = r + 2;
            connected[deg - 1] / sigma.powi(deg as i32)
        });
        let det = a.determinant();
        let det_degree: i32 = (1..=n).map(|j| 2 * j as i32 + 1).sum();
        denominators.push(Denominator {
            label: format!("det A({n}x{n})"),
            value: det * sigma.powi(det_degree),
            scaled: det,
        });
        let singular = det.abs() < opts.singular_tol;

        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().fold(T::zero(), |x, &y| x.max(y));
        let smin = svd.singular_values.iter().fold(smax, |x, &y| x.min(y));
        let cond = if smin > T::zero() {
            smax / smin
        } else {
            T::max_value().unwrap_or(smax)
        };
        max_cond = Some(max_cond.map_or(cond, |c: T| c.max(cond)));

        let x = if cond <= opts.knowles_cond {
            a.clone().lu().solve(&b)
        } else {
            None
        };
        let x = match x {
            Some(x) => x,
            None => {
                used_pinv = true;
                let cutoff = smax / opts.knowles_cond;
                svd.solve(&b, cutoff)
                    .map_err(|e| Error::Degenerate(format!("pseudo-inverse failed: {e}")))?
            }
        };
        let correction = b.dot(&x) * sigma;
        let e = i1 - correction;
        if singular || !e.is_finite() {
            first_singular.get_or_insert(k);
        }
        if e.is_finite() {
            per_order.push(e);
        } else {
            per_order.push(*per_order.last().expect("nonempty"));
        }
    }

    Ok(CmxResult {
        method: CmxMethod::Knowles,
        order,
        energy: *per_order.last().expect("nonempty"),
        per_order,
        denominators,
        singular_flag: first_singular.is_some(),
        first_singular_order: first_singular,
        condition_number: max_cond,
        used_pseudo_inverse: used_pinv,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularEntry<T> {
    pub method: CmxMethod,
    /// Lowest expansion order that divides by this quantity.
    pub order: usize,
    pub label: String,
    pub scaled: T,
}

/// Denominators below `tol` (dimensionless) for every order up to the largest
/// the supplied moments allow.
pub fn singularity_report<T: Real>(connected: &[T], tol: T) -> Vec<SingularEntry<T>> {
    let max_order = connected.len().div_ceil(2);
    if max_order < 2 {
        return Vec::new();
    }
    let opts = CmxOptions {
        singular_tol: tol,
        ..CmxOptions::default()
    };
    let mut out = Vec::new();
    if let Ok(r) = cmx_cioslowski_with(connected, max_order, &opts) {
        // one denominator S3,t per order t + 1
        for (idx, d) in r.denominators.iter().enumerate() {
            let order = idx + 2;
            if d.scaled.abs() < tol || !d.value.is_finite() {
                out.push(SingularEntry {
                    method: CmxMethod::Cioslowski,
                    order,
                    label: d.label.clone(),
                    scaled: d.scaled,
                });
            }
        }
    }
    if let Ok(r) = cmx_knowles_with(connected, max_order, &opts) {
        for (idx, d) in r.denominators.iter().enumerate() {
            if d.scaled.abs() < tol {
                out.push(SingularEntry {
                    method: CmxMethod::Knowles,
                    order: idx + 2,
                    label: d.label.clone(),
                    scaled: d.scaled,
                });
            }
        }
    }
    out
}

/// Suggests an expansion for `order` given a singularity report: the
/// Cioslowski form unless one of its denominators up to `order` is flagged,
/// in which case Knowles when that is clean. Returns `None` when both are
/// poisoned.
pub fn suggest_method<T>(report: &[SingularEntry<T>], order: usize) -> Option<CmxMethod> {
    let poisoned = |m: CmxMethod| report.iter().any(|e| e.method == m && e.order <= order);
    if !poisoned(CmxMethod::Cioslowski) {
        Some(CmxMethod::Cioslowski)
    } else if !poisoned(CmxMethod::Knowles) {
        Some(CmxMethod::Knowles)
    } else {
        None
    }
}
