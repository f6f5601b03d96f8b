//! Peeters–Devreese–Soldatov bounds.
//!
//! For order `n` the monic polynomial `P_n(x) = Σ_{i=0}^{n} a_i x^{n−i}`
//! (`a_0 = 1`) has coefficients solving `M a = −b` with
//! `M_ij = K_{2n−(i+j)}` and `b_i = K_{2n−i}`. Its real roots are upper
//! bounds to the eigenvalues reachable from the trial state, the lowest one
//! bounding the ground state.
//!
//! The solve itself runs on standardized moments (those of `(H − I₁)/s` with
//! `s² = I₂`), taken from the table's central moments. This leaves the roots
//! unchanged up to the affine map and keeps the Hankel system well scaled.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::moments::MomentTable;
use crate::scalar::{binomial, Complex, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankPolicy {
    /// Lower the order one step at a time until `M` is well conditioned; a
    /// saturated Krylov space otherwise leaves spurious free roots.
    Deflate,
    /// Minimum-norm solution through the truncated SVD.
    PseudoInverse,
}

#[derive(Clone, Copy, Debug)]
pub struct PdsOptions<T> {
    /// Condition number above which the rank policy kicks in.
    pub max_condition: T,
    /// Relative singular-value cutoff defining numerical rank.
    pub rank_cutoff: T,
    /// A root with `|Im| ≤ tol·(1 + |Re|)` counts as real.
    pub complex_tol: T,
    pub rank_policy: RankPolicy,
}

impl<T: Real> Default for PdsOptions<T> {
    fn default() -> Self {
        Self {
            max_condition: T::lit(1e10),
            rank_cutoff: T::lit(1e-10),
            complex_tol: T::lit(1e-8),
            rank_policy: RankPolicy::Deflate,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PdsResult<T: Real> {
    pub order: usize,
    /// Degree of the polynomial actually solved for (below `order` after deflation).
    pub effective_order: usize,
    /// `a_0..a_m` in the original energy units, `a_0 = 1`.
    pub coefficients: Vec<T>,
    pub roots: Vec<Complex<T>>,
    /// Real roots ascending.
    pub real_roots_sorted: Vec<T>,
    /// Roots dropped by the complex-root policy.
    pub discarded_roots: Vec<Complex<T>>,
    pub ground_energy: T,
    /// Condition number of the (standardized) moment matrix at `order`.
    pub condition_number: T,
    pub used_pseudo_inverse: bool,
    /// `max |P(r)| / max(1, max|a_i|)` over retained roots.
    pub residual: T,
}

fn require_raw<T: Real>(table: &MomentTable<T>, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::Contract("PDS order must be at least 1".into()));
    }
    if table.max_order() < 2 * n - 1 {
        return Err(Error::Arity {
            needed: 2 * n - 1,
            available: table.max_order(),
        });
    }
    Ok(())
}

fn system_from<T: Real>(k: &[T], n: usize) -> (DMatrix<T>, DVector<T>) {
    let m = DMatrix::from_fn(n, n, |i, j| k[2 * n - (i + 1 + j + 1)]);
    let b = DVector::from_fn(n, |i, _| k[2 * n - (i + 1)]);
    (m, b)
}

/// The literal system `M_ij = K_{2n−(i+j)}`, `b_i = K_{2n−i}` (1-based).
pub fn build_pds_system<T: Real>(table: &MomentTable<T>, n: usize) -> Result<(DMatrix<T>, DVector<T>)> {
    require_raw(table, n)?;
    Ok(system_from(table.raw_slice(), n))
}

fn horner<T: Real>(coeffs: &[T], x: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(T::zero(), T::zero());
    let mut dp = Complex::new(T::zero(), T::zero());
    for &c in coeffs {
        dp = dp * x + p;
        p = p * x + Complex::new(c, T::zero());
    }
    (p, dp)
}

/// Roots of a monic polynomial `[1, a_1, …, a_m]` from its companion matrix,
/// each polished by one Newton step.
pub fn polynomial_roots<T: Real>(coeffs: &[T]) -> Vec<Complex<T>> {
    let m = coeffs.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let mut c = DMatrix::<T>::zeros(m, m);
    for j in 0..m {
        c[(0, j)] = -coeffs[j + 1];
    }
    for i in 1..m {
        c[(i, i - 1)] = T::one();
    }
    let mut roots: Vec<Complex<T>> = c.complex_eigenvalues().iter().copied().collect();
    for r in roots.iter_mut() {
        let (p, dp) = horner(coeffs, *r);
        if dp.norm_sqr() > T::zero() {
            let step = p / dp;
            let polished = *r - step;
            if polished.re.is_finite() && polished.im.is_finite() {
                *r = polished;
            }
        }
    }
    roots
}

pub fn solve_pds<T: Real>(table: &MomentTable<T>, n: usize) -> Result<PdsResult<T>> {
    solve_pds_with(table, n, &PdsOptions::default())
}

pub fn solve_pds_with<T: Real>(table: &MomentTable<T>, n: usize, opts: &PdsOptions<T>) -> Result<PdsResult<T>> {
    require_raw(table, n)?;
    let mu = table.mean();
    let central = &table.central_slice()[..=2 * n - 1];
    let var = if n > 1 { central[2] } else { T::zero() };
    if var < -T::tolerance(1e-12) * (T::one() + mu * mu) {
        return Err(Error::Degenerate(format!("negative variance {var:e}")));
    }
    let spread = var.max(T::zero()).sqrt();

    // zero spread: the trial state is an eigenvector and P(x) = x − μ
    let eigenstate = spread <= T::tolerance(1e-12) * (T::one() + mu.abs());
    let (std_coeffs, effective, cond, used_pinv) = if eigenstate {
        (vec![T::one(), T::zero()], 1, T::one(), false)
    } else {
        let k: Vec<T> = central
            .iter()
            .enumerate()
            .map(|(j, m)| *m / spread.powi(j as i32))
            .collect();
        solve_standardized(&k, n, opts)?
    };
    let scale = if eigenstate { T::one() } else { spread };

    // roots of the standardized polynomial map back through x = μ + s·y
    let std_roots = polynomial_roots(&std_coeffs);
    let roots: Vec<Complex<T>> = std_roots
        .iter()
        .map(|y| Complex::new(mu + scale * y.re, scale * y.im))
        .collect();
    let coefficients = unstandardize(&std_coeffs, mu, scale);

    let (real, discarded) = split_real_roots(&roots, opts.complex_tol);
    if real.is_empty() {
        return Err(Error::Degenerate(format!(
            "PDS({n}) has no real roots: {:?}",
            roots.iter().map(|r| (r.re.as_f64(), r.im.as_f64())).collect::<Vec<_>>()
        )));
    }

    let amax = coefficients.iter().fold(T::one(), |a, c| a.max(c.abs()));
    let residual = real
        .iter()
        .map(|&r| {
            let (p, _) = horner(&coefficients, Complex::new(r, T::zero()));
            p.norm_sqr().sqrt() / amax
        })
        .fold(T::zero(), |a, b| a.max(b));

    Ok(PdsResult {
        order: n,
        effective_order: effective,
        coefficients,
        roots,
        ground_energy: real[0],
        real_roots_sorted: real,
        discarded_roots: discarded,
        condition_number: cond,
        used_pseudo_inverse: used_pinv,
        residual,
    })
}

/// Separates roots with `|Im| ≤ tol·(1 + |Re|)` (kept as their real part,
/// ascending) from the rest.
pub fn split_real_roots<T: Real>(roots: &[Complex<T>], tol: T) -> (Vec<T>, Vec<Complex<T>>) {
    let mut real = Vec::new();
    let mut discarded = Vec::new();
    for r in roots {
        if r.im.abs() <= tol * (T::one() + r.re.abs()) {
            real.push(r.re);
        } else {
            discarded.push(*r);
        }
    }
    real.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    (real, discarded)
}

/// Returns standardized coefficients `[1, ã_1..ã_m]`, the degree `m`, the
/// condition number at the requested order and whether a pseudo-inverse ran.
fn solve_standardized<T: Real>(k: &[T], n: usize, opts: &PdsOptions<T>) -> Result<(Vec<T>, usize, T, bool)> {
    let mut order = n;
    let mut first_cond = None;
    loop {
        let (m, b) = system_from(k, order);
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
        let smin = svd.singular_values.iter().fold(smax, |a, &s| a.min(s));
        let cond = if smin > T::zero() {
            smax / smin
        } else {
            T::max_value().unwrap_or(smax)
        };
        let first = *first_cond.get_or_insert(cond);

        if cond <= opts.max_condition {
            if let Some(a) = m.clone().lu().solve(&(-&b)) {
                let mut coeffs = vec![T::one()];
                coeffs.extend(a.iter().copied());
                return Ok((coeffs, order, first, false));
            }
        }
        let cutoff = opts.rank_cutoff * smax;
        let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
        match opts.rank_policy {
            RankPolicy::Deflate if order > 1 && rank < order => {
                order -= 1;
            }
            _ => {
                let a = svd
                    .solve(&(-&b), cutoff)
                    .map_err(|e| Error::Degenerate(format!("pseudo-inverse failed: {e}")))?;
                let mut coeffs = vec![T::one()];
                coeffs.extend(a.iter().copied());
                return Ok((coeffs, order, first, true));
            }
        }
    }
}

/// Coefficients of `s^m P̃((x − μ)/s)` given `P̃ = [1, ã_1..ã_m]`.
fn unstandardize<T: Real>(std: &[T], mu: T, s: T) -> Vec<T> {
    let m = std.len() - 1;
    let mut out = vec![T::zero(); m + 1];
    // term ã_i s^i (x − μ)^(m−i)
    for (i, &a) in std.iter().enumerate() {
        let d = m - i;
        let w = a * s.powi(i as i32);
        for j in 0..=d {
            // (x − μ)^d = Σ_j C(d, j) x^j (−μ)^(d−j); x^j sits at index m − j
            let c = T::lit(binomial(d as u64, j as u64) as f64) * (-mu).powi((d - j) as i32);
            out[m - j] += w * c;
        }
    }
    out
}

/// All retained real roots, ascending.
pub fn pds_excited_bounds<T: Real>(result: &PdsResult<T>) -> Vec<T> {
    result.real_roots_sorted.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siam_v1() -> MomentTable<f64> {
        MomentTable::from_raw(&[-4.0, 18.0, -80.0])
    }

    #[test]
    fn literal_system_for_siam() {
        let (m, b) = build_pds_system(&siam_v1(), 2).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[18.0, -4.0, -4.0, 1.0]));
        assert_eq!(b, DVector::from_vec(vec![-80.0, 18.0]));
        let (m1, b1) = build_pds_system(&siam_v1(), 1).unwrap();
        assert_eq!(m1[(0, 0)], 1.0);
        assert_eq!(b1[0], -4.0);
        assert!(build_pds_system(&siam_v1(), 3).is_err());
    }

    #[test]
    fn siam_pds2_coefficients_and_roots() {
        let r = solve_pds(&siam_v1(), 2).unwrap();
        let expect = [1.0, 4.0, -2.0];
        for (a, e) in r.coefficients.iter().zip(expect) {
            assert!((a - e).abs() < 1e-12, "{:?}", r.coefficients);
        }
        let s6 = 6f64.sqrt();
        assert!((r.ground_energy - (-2.0 - s6)).abs() < 1e-12);
        assert!((r.real_roots_sorted[1] - (-2.0 + s6)).abs() < 1e-12);
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn pds1_is_the_mean() {
        let r = solve_pds(&siam_v1(), 1).unwrap();
        assert_eq!(r.coefficients, vec![1.0, 4.0]);
        assert_eq!(r.ground_energy, -4.0);
    }

    #[test]
    fn eigenstate_gives_exact_root() {
        let e: f64 = -1.7;
        let raw: Vec<f64> = (1..=7).map(|l| e.powi(l)).collect();
        let t = MomentTable::from_raw(&raw);
        for n in 1..=4 {
            let r = solve_pds(&t, n).unwrap();
            assert!((r.ground_energy - e).abs() < 1e-12);
        }
    }

    #[test]
    fn companion_roots() {
        // (x − 1)(x + 2)(x − 3) = x³ − 2x² − 5x + 6
        let mut r: Vec<f64> = polynomial_roots(&[1.0, -2.0, -5.0, 6.0]).iter().map(|c| c.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, e) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn root_policy() {
        let roots = polynomial_roots(&[1.0, 0.0, 1.0]);
        let (real, gone) = split_real_roots(&roots, 1e-8);
        assert!(real.is_empty());
        assert_eq!(gone.len(), 2);
        let near = [Complex::new(2.0, 1e-9), Complex::new(-1.0, 0.0)];
        let (real, gone) = split_real_roots(&near, 1e-8);
        assert_eq!(real, vec![-1.0, 2.0]);
        assert!(gone.is_empty());
    }

    #[test]
    fn inconsistent_moments_are_rejected() {
        let bad = MomentTable::from_raw(&[0.0, -1.0, 0.0]);
        assert!(matches!(solve_pds(&bad, 2), Err(Error::Degenerate(_))));
    }
}
