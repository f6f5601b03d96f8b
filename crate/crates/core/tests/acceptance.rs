//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! with its runtime; the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use clap::Parser;
use common::*;
use qcmx::cli::{execute, Cli};
use qcmx::cmx::{cmx_cioslowski, cmx_knowles};
use qcmx::method::EnergyMethod;
use qcmx::models::{h2_bk_hamiltonian, siam_fci_energy, siam_hamiltonian, H2Coefficients, SiamParams};
use qcmx::moments::{hankel_min_eigenvalue, raw_moments_dense, raw_moments_pauli, MomentTable};
use qcmx::noise::{hadamard_test_estimate, noisy_moments, DepthProxy, NoiseModel};
use qcmx::pauli::{PauliString, PauliSum};
use qcmx::pds::solve_pds;
use qcmx::statevector::{exact_diagonalize, StateVector};
use qcmx::variational::{default_theta_grid, deviation_report, energy_vs_theta};
use rand::Rng;

const SWEEP: [f64; 7] = [0.1, 0.5, 1.0, 2.0, 3.0, 6.0, 10.0];
const U: f64 = 8.0;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn siam(v: f64) -> PauliSum<f64> {
    siam_hamiltonian(&SiamParams::half_filling(U, v))
}

fn trial() -> StateVector<f64> {
    StateVector::basis_state("0110").unwrap()
}

fn to_sum(terms: &[(f64, String)]) -> PauliSum<f64> {
    let t: Vec<(f64, &str)> = terms.iter().map(|(w, l)| (*w, l.as_str())).collect();
    PauliSum::from_labels(&t).unwrap()
}

fn criterion_1() -> Check {
    let mut worst = 0.0f64;
    for v in SWEEP {
        let e = exact_diagonalize(&siam(v)).map_err(|e| e.to_string())?.ground_energy();
        let formula = -(U + (U * U + 64.0 * v * v).sqrt()) / 4.0;
        worst = worst.max((e - formula).abs());
        ensure((e - siam_fci_energy(U, v)).abs() < 1e-10, || {
            format!("V={v}: {e} vs {formula}")
        })?;
    }
    Ok(format!("max |E_exact - formula| = {worst:.1e}"))
}

fn criterion_2() -> Check {
    let mut worst = 0.0f64;
    for v in SWEEP {
        let (t, _) = raw_moments_pauli(&siam(v), &trial(), 7).map_err(|e| e.to_string())?;
        let fci = siam_fci_energy(U, v);
        for n in [3, 4] {
            let e = solve_pds(&t, n).map_err(|e| e.to_string())?.ground_energy;
            worst = worst.max((e - fci).abs());
            ensure((e - fci).abs() < 1e-8, || format!("PDS({n}) at V={v}: {e} vs {fci}"))?;
        }
    }
    let (t, _) = raw_moments_pauli(&siam(1.0), &trial(), 3).map_err(|e| e.to_string())?;
    let e2 = solve_pds(&t, 2).map_err(|e| e.to_string())?.ground_energy;
    let expect = -2.0 - 6f64.sqrt();
    ensure((e2 - expect).abs() < 1e-10, || {
        format!("PDS(2) at V=1: {e2} vs {expect}")
    })?;
    Ok(format!("max |PDS(3,4) - FCI| = {worst:.1e}, PDS(2) at V=1 = {e2:.12}"))
}

fn criterion_3() -> Check {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for case in 0..25 {
        let g: [f64; 6] = std::array::from_fn(|_| r.random_range(-1.0..1.0));
        let h = h2_bk_hamiltonian(&H2Coefficients::new(g).map_err(|e| e.to_string())?);
        // oracle: lowest eigenvalue of the 2x2 block on |01⟩, |10⟩ of the Kronecker matrix
        let labels = ["II", "ZI", "IZ", "ZZ", "XX", "YY"];
        let terms: Vec<(f64, String)> = g.iter().zip(labels).map(|(w, l)| (*w, l.to_string())).collect();
        let m = sum_matrix(&terms);
        let (a, b, t) = (m[(1, 1)].re, m[(2, 2)].re, m[(1, 2)]);
        let lowest = 0.5 * (a + b) - (0.25 * (a - b).powi(2) + t.norm_sqr()).sqrt();
        let (tab, _) = raw_moments_pauli(&h, &StateVector::basis_state("01").unwrap(), 3).map_err(|e| e.to_string())?;
        let e = solve_pds(&tab, 2).map_err(|e| e.to_string())?.ground_energy;
        worst = worst.max((e - lowest).abs());
        ensure((e - lowest).abs() < 1e-12, || format!("case {case}: {e} vs {lowest}"))?;
    }
    Ok(format!("25 instances, max deviation {worst:.1e}"))
}

fn criterion_4() -> Check {
    let mut r = rng(404);
    let mut worst = 0.0f64;
    let mut knowles_checked = 0;
    for case in 0..100 {
        let i: Vec<f64> = (0..5).map(|_| r.random_range(-2.0..2.0)).collect();
        let cmx2 = i[0] - i[1] * i[1] / i[2];
        let cmx3 = cmx2 - (i[1] * i[3] - i[2] * i[2]).powi(2) / (i[2] * (i[4] * i[2] - i[3] * i[3]));
        let e2 = cmx_cioslowski(&i, 2).map_err(|e| e.to_string())?.energy;
        let e3 = cmx_cioslowski(&i, 3).map_err(|e| e.to_string())?.energy;
        for (got, want) in [(e2, cmx2), (e3, cmx3)] {
            let err = (got - want).abs() / (1.0 + want.abs());
            worst = worst.max(err);
            ensure(err < 1e-12, || format!("case {case}: {got} vs {want}"))?;
        }
        if i[2].abs() > 1e-10 {
            knowles_checked += 1;
            let k2 = cmx_knowles(&i, 2).map_err(|e| e.to_string())?.energy;
            ensure((k2 - cmx2).abs() <= 1e-12 * (1.0 + cmx2.abs()), || {
                format!("case {case}: Knowles {k2} vs {cmx2}")
            })?;
        }
    }
    Ok(format!(
        "100 moment vectors, max relative error {worst:.1e}, {knowles_checked} Knowles checks"
    ))
}

fn criterion_5() -> Check {
    let mut r = rng(505);
    let mut worst = 0.0f64;
    let mut worst_hankel = f64::INFINITY;
    for case in 0..100 {
        let n = r.random_range(1..=4);
        let count = r.random_range(1..=10);
        let h = to_sum(&random_terms(&mut r, n, count));
        let bits: String = (0..n).map(|_| if r.random_bool(0.5) { '1' } else { '0' }).collect();
        let s = StateVector::basis_state(&bits).unwrap();
        let (p, _) = raw_moments_pauli(&h, &s, 7).map_err(|e| e.to_string())?;
        let d = raw_moments_dense(&h, &s, 7).map_err(|e| e.to_string())?;
        for k in 1..=7 {
            let rel = (p.raw(k) - d.raw(k)).abs() / d.raw(k).abs().max(1e-300).max(1.0);
            worst = worst.max(rel);
            ensure(rel < 1e-10, || {
                format!("case {case} K{k}: {} vs {}", p.raw(k), d.raw(k))
            })?;
        }
        let hmin = hankel_min_eigenvalue(&p, 3).map_err(|e| e.to_string())?;
        worst_hankel = worst_hankel.min(hmin);
        ensure(hmin >= -1e-9, || format!("case {case}: Hankel min eigenvalue {hmin}"))?;
    }
    Ok(format!(
        "max relative gap {worst:.1e}, min Hankel eigenvalue {worst_hankel:.1e}"
    ))
}

fn criterion_6() -> Check {
    let g: PauliString = "YXXX".parse().unwrap();
    let grid = default_theta_grid::<f64>(81);
    let mut factors = Vec::new();
    let mut thetas = Vec::new();
    let mut zero_devs = Vec::new();
    let mut opt_devs = Vec::new();
    for v in SWEEP {
        let h = siam(v);
        let fci = siam_fci_energy(U, v);
        let scan = energy_vs_theta(&h, &trial(), &g, EnergyMethod::Pds(2), &grid).map_err(|e| e.to_string())?;
        ensure((scan.energy_opt - fci).abs() < 1e-6, || {
            format!("V={v}: min PDS(2) {} vs {fci}", scan.energy_opt)
        })?;
        ensure(
            (scan.theta_opt.abs() - std::f64::consts::FRAC_PI_4).abs() < 0.05,
            || format!("V={v}: theta_opt {}", scan.theta_opt),
        )?;
        thetas.push(scan.theta_opt);
        let flat = energy_vs_theta(&h, &trial(), &g, EnergyMethod::Mean, &grid).map_err(|e| e.to_string())?;
        ensure(flat.energies.iter().all(|e| (e + 4.0).abs() < 1e-12), || {
            format!("V={v}: order-1 curve not flat")
        })?;
        if [0.1, 1.0, 3.0, 6.0, 10.0].contains(&v) {
            let rep = deviation_report(&scan, fci).map_err(|e| e.to_string())?;
            zero_devs.push(rep.dev_at_zero);
            opt_devs.push(rep.dev_at_opt);
            factors.push(rep.improvement_factor.unwrap_or(f64::INFINITY));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    // a zero optimal deviation everywhere means the improvement is unbounded
    let improvement = if mean(&opt_devs) == 0.0 {
        f64::INFINITY
    } else {
        mean(&zero_devs) / mean(&opt_devs)
    };
    ensure(improvement >= 100.0, || {
        format!("average improvement factor {improvement}")
    })?;
    Ok(format!(
        "theta_opt {:.6} (sign convention exp(i theta YXXX)), average improvement {improvement:.2e}",
        thetas[0]
    ))
}

fn criterion_7() -> Check {
    let mut r = rng(707);
    let c = 1.5;
    let mut done = 0;
    let mut worst = 0.0f64;
    while done < 20 {
        let n = r.random_range(2..=3);
        let h = to_sum(&random_terms(&mut r, n, 6));
        let bits: String = (0..n).map(|_| if r.random_bool(0.5) { '1' } else { '0' }).collect();
        let s = StateVector::basis_state(&bits).unwrap();
        let (t0, _) = raw_moments_pauli(&h, &s, 5).map_err(|e| e.to_string())?;
        let (t1, _) = raw_moments_pauli(&h.shifted(c), &s, 5).map_err(|e| e.to_string())?;
        if t0.connected(2) < 1e-3 {
            continue;
        }
        done += 1;
        for k in 2..=5 {
            let d = (t1.connected(k) - t0.connected(k)).abs();
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("I{k} moved by {d}"))?;
        }
        let mut shifts: Vec<(String, f64, f64)> = Vec::new();
        let pair = |t: &MomentTable<f64>, m: EnergyMethod| m.evaluate(t).map_err(|e| e.to_string());
        for m in [
            EnergyMethod::Mean,
            EnergyMethod::Cmx(qcmx::CmxMethod::Cioslowski, 2),
            EnergyMethod::Cmx(qcmx::CmxMethod::Cioslowski, 3),
            EnergyMethod::Cmx(qcmx::CmxMethod::Knowles, 2),
            EnergyMethod::Cmx(qcmx::CmxMethod::Knowles, 3),
            EnergyMethod::Pds(1),
            EnergyMethod::Pds(2),
            EnergyMethod::Pds(3),
        ] {
            let (a, b) = (pair(&t0, m)?, pair(&t1, m)?);
            ensure(a.singular == b.singular, || {
                format!("{m}: singular flag changed under shift")
            })?;
            if a.energy.is_finite() {
                shifts.push((m.to_string(), a.energy, b.energy));
            }
        }
        for k in 1..=3 {
            let (Ok(a), Ok(b)) = (solve_pds(&t0, k), solve_pds(&t1, k)) else {
                continue;
            };
            for (x, y) in a.real_roots_sorted.iter().zip(&b.real_roots_sorted) {
                shifts.push((format!("pds root {k}"), *x, *y));
            }
        }
        for (name, a, b) in shifts {
            let d = (b - a - c).abs();
            worst = worst.max(d);
            ensure(d < 1e-9, || format!("{name}: {a} -> {b}"))?;
        }
    }
    Ok(format!("20 instances, max shift error {worst:.1e}"))
}

fn criterion_8() -> Check {
    // standard error scaling with perfect readout
    let x = 0.3;
    let mut ratios = Vec::new();
    for shots in [100u64, 10_000, 1_000_000] {
        let samples: Vec<f64> = (0..200)
            .map(|seed| hadamard_test_estimate(x, &NoiseModel::perfect(shots, seed), DepthProxy::default()))
            .map(|e| e.map(|e| e.raw_estimate))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt();
        let ratio = sd * (shots as f64).sqrt();
        ensure((0.5..=2.0).contains(&ratio), || {
            format!("shots {shots}: sd·sqrt(shots) = {ratio}")
        })?;
        ratios.push(ratio);
    }

    // mitigation is unbiased
    let nm = |seed| {
        NoiseModel::perfect(8192, seed)
            .with_readout(0.97, 0.97)
            .with_depolarizing(0.001, 0.01)
    };
    let depth = DepthProxy::for_basis_state("0110");
    for x in [-0.7, 0.0, 0.45] {
        let est: Vec<f64> = (0..200)
            .map(|seed| hadamard_test_estimate(x, &nm(seed), depth).map(|e| e.mitigated_estimate))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mean = est.iter().sum::<f64>() / 200.0;
        let sd = (est.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
        ensure((mean - x).abs() < 3.0 * sd / 200f64.sqrt(), || {
            format!("x={x}: mitigated mean {mean}, sd {sd}")
        })?;
    }

    // bit reproducibility
    let nm_fixed = nm(77);
    let a = noisy_moments(&siam(1.0), &trial(), 3, &nm_fixed, depth).map_err(|e| e.to_string())?;
    let b = noisy_moments(&siam(1.0), &trial(), 3, &nm_fixed, depth).map_err(|e| e.to_string())?;
    ensure(
        a.table
            .raw_slice()
            .iter()
            .zip(b.table.raw_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits()),
        || "seeded noisy moments differ".to_string(),
    )?;

    // noisy PDS(2) finite across the sweep under readout-only noise
    for v in [0.1, 1.0, 3.0, 6.0, 10.0] {
        let readout = NoiseModel::perfect(8192, 5).with_readout(0.97, 0.97);
        let nmom = noisy_moments(&siam(v), &trial(), 3, &readout, depth).map_err(|e| e.to_string())?;
        let e = EnergyMethod::Pds(2)
            .evaluate(&nmom.table)
            .map_err(|e| e.to_string())?
            .energy;
        ensure(e.is_finite(), || format!("noisy PDS(2) at V={v} is {e}"))?;
    }

    // perfect model at 10^6 shots agrees with the noiseless CMX(2) within 5 propagated errors
    let perfect = NoiseModel::perfect(1_000_000, 8);
    let nmom = noisy_moments(&siam(1.0), &trial(), 3, &perfect, depth).map_err(|e| e.to_string())?;
    let cmx2 = |t: &MomentTable<f64>| -> qcmx::Result<f64> { Ok(cmx_cioslowski(t.connected_slice(), 2)?.energy) };
    let noisy_e = cmx2(&nmom.table).map_err(|e| e.to_string())?;
    let se = nmom.propagated_error(&perfect, cmx2).map_err(|e| e.to_string())?;
    ensure((noisy_e + 4.5).abs() < 5.0 * se, || {
        format!("CMX(2) {noisy_e} vs -4.5, se {se}")
    })?;

    // an H2-form case with I3 = 0: noiseless CMX(2) is singular, the noisy value stays finite
    let h = h2_bk_hamiltonian(&H2Coefficients::new([-0.4, 0.2, 0.2, 0.05, 0.1, 0.1]).unwrap());
    let s01 = StateVector::basis_state("01").unwrap();
    let (clean, _) = raw_moments_pauli(&h, &s01, 3).map_err(|e| e.to_string())?;
    let clean_r = cmx_cioslowski(clean.connected_slice(), 2).map_err(|e| e.to_string())?;
    ensure(clean_r.singular_flag, || {
        format!("expected a singular noiseless CMX(2), I3 = {}", clean.connected(3))
    })?;
    let noisy = noisy_moments(
        &h,
        &s01,
        3,
        &NoiseModel::perfect(8192, 3).with_readout(0.97, 0.97),
        DepthProxy::for_basis_state("01"),
    )
    .map_err(|e| e.to_string())?;
    let noisy_r = cmx_cioslowski(noisy.table.connected_slice(), 2).map_err(|e| e.to_string())?;
    ensure(noisy_r.energy.is_finite(), || {
        format!("noisy CMX(2) = {}", noisy_r.energy)
    })?;

    Ok(format!(
        "sd·sqrt(shots) = {:.3}/{:.3}/{:.3}; singular CMX(2) regularized to {:.4} (flag {})",
        ratios[0], ratios[1], ratios[2], noisy_r.energy, noisy_r.singular_flag
    ))
}

fn criterion_9() -> Check {
    let cli = Cli::try_parse_from(GOLDEN_ARGS).map_err(|e| e.to_string())?;
    let csv = execute(&cli).map_err(|e| e.to_string())?;
    let golden = std::fs::read_to_string(golden_path()).map_err(|e| e.to_string())?;
    ensure(csv == golden, || {
        "sweep output differs from tests/golden/siam_sweep.csv".to_string()
    })?;
    Ok(format!("{} rows byte-identical", csv.lines().count() - 1))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, fn() -> Check, Duration);
    let criteria: [Criterion; 9] = [
        (
            "SIAM exact diagonalization matches the analytic ground energy",
            criterion_1,
            Duration::from_secs(1),
        ),
        (
            "PDS saturates to FCI at orders 3 and 4",
            criterion_2,
            Duration::from_secs(5),
        ),
        (
            "PDS(2) is exact on the two-qubit H2 block",
            criterion_3,
            Duration::from_secs(5),
        ),
        (
            "CMX closed forms and Knowles agreement",
            criterion_4,
            Duration::from_secs(1),
        ),
        (
            "Pauli moments match dense moments; Hankel PSD",
            criterion_5,
            Duration::from_secs(30),
        ),
        ("Variational PDS(2) reaches FCI", criterion_6, Duration::from_secs(30)),
        (
            "Shift covariance of all estimators",
            criterion_7,
            Duration::from_secs(5),
        ),
        (
            "Noise statistics and regularization",
            criterion_8,
            Duration::from_secs(60),
        ),
        ("Golden fixed-seed sweep", criterion_9, Duration::from_secs(5)),
    ];
    let mut failures = 0;
    for (idx, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took {elapsed:.2?}, budget {budget:.0?}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!(
            "criterion {}: {status} | {name} | {:.3}s | {detail}",
            idx + 1,
            elapsed.as_secs_f64()
        );
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
