use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::method::EnergyMethod;
use crate::moments::{raw_moments_pauli, MomentTable};
use crate::noise::noisy_moments;
use crate::pauli::{format_float, PauliSum};
use crate::statevector::{exact_diagonalize, StateVector};
use crate::variational::{default_theta_grid, deviation_report, energy_vs_theta, ScanResult};

pub const SWEEP_HEADER: &str =
    "sweep_value,method,order,energy,expectation,fci_reference,deviation,singular_flag,condition";
pub const VARIATIONAL_HEADER: &str = "theta,energy,I1,I2,I3,singular_flag";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub method: EnergyMethod,
    pub energy: f64,
    pub expectation: f64,
    pub fci_reference: f64,
    pub deviation: f64,
    pub singular: bool,
    pub condition: Option<f64>,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let method = match self.method {
            EnergyMethod::HwSeries { tau, .. } => format!("hw-series@{tau}"),
            m => m.name().to_string(),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            format_float(self.sweep_value),
            method,
            self.method.order(),
            format_float(self.energy),
            format_float(self.expectation),
            format_float(self.fci_reference),
            format_float(self.deviation),
            u8::from(self.singular),
            self.condition.map(format_float).unwrap_or_default()
        )
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub csv: String,
    pub summary: String,
}

/// Runs `f` on a pool of `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// Noiseless or sampled moments of `h` in the configured trial state.
pub fn trial_moments(
    cfg: &RunConfig,
    h: &PauliSum<f64>,
    state: &StateVector<f64>,
    max_order: usize,
) -> Result<MomentTable<f64>> {
    match &cfg.noise {
        Some(nm) => Ok(noisy_moments(h, state, max_order, nm, cfg.trial.depth())?.table),
        None => Ok(raw_moments_pauli(h, state, max_order)?.0),
    }
}

fn max_needed(methods: &[EnergyMethod]) -> usize {
    methods.iter().map(|m| m.moments_needed()).max().unwrap_or(1)
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    if cfg.methods.is_empty() {
        return Err(Error::Config("at least one method is required".into()));
    }
    let state = cfg.trial.state()?;
    let max_order = max_needed(&cfg.methods);
    let points = cfg.sweep_points();
    if points.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }

    let per_point: Vec<Vec<SweepRow>> = with_threads(cfg.threads, || {
        points
            .par_iter()
            .map(|pt| {
                let fci = exact_diagonalize(&pt.hamiltonian)?.ground_energy();
                let table = trial_moments(cfg, &pt.hamiltonian, &state, max_order)?;
                cfg.methods
                    .iter()
                    .map(|m| {
                        let ev = m.evaluate(&table)?;
                        Ok(SweepRow {
                            sweep_value: pt.value,
                            method: *m,
                            energy: ev.energy,
                            expectation: table.connected(1),
                            fci_reference: fci,
                            deviation: ev.energy - fci,
                            singular: ev.singular,
                            condition: ev.condition,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let rows: Vec<SweepRow> = per_point.into_iter().flatten().collect();

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }

    let mut summary = String::new();
    for m in &cfg.methods {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.method == *m).collect();
        let worst = mine
            .iter()
            .filter(|r| r.deviation.is_finite())
            .map(|r| r.deviation.abs())
            .fold(0.0f64, f64::max);
        let singular = mine.iter().filter(|r| r.singular).count();
        let _ = writeln!(
            summary,
            "{m}: {} points, max |deviation| {:.3e}, singular at {singular}",
            mine.len(),
            worst
        );
    }
    Ok(SweepOutput { rows, csv, summary })
}

#[derive(Clone, Debug)]
pub struct VariationalOutput {
    pub scan: ScanResult<f64>,
    pub fci_reference: f64,
    pub csv: String,
    pub summary: String,
}

/// θ scan at the first sweep point of the configuration.
pub fn run_variational(cfg: &RunConfig) -> Result<VariationalOutput> {
    let generator = cfg
        .trial
        .generator
        .ok_or_else(|| Error::Config("variational runs need --generator".into()))?;
    let method = *cfg
        .methods
        .first()
        .ok_or_else(|| Error::Config("at least one method is required".into()))?;
    let point = cfg
        .sweep_points()
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("sweep grid is empty".into()))?;
    let base = StateVector::basis_state(&cfg.trial.bits)?;
    let grid = default_theta_grid::<f64>(cfg.grid);
    let scan = with_threads(cfg.threads, || {
        energy_vs_theta(&point.hamiltonian, &base, &generator, method, &grid)
    })??;
    let fci = exact_diagonalize(&point.hamiltonian)?.ground_energy();
    let report = deviation_report(&scan, fci)?;

    let mut csv = String::from(VARIATIONAL_HEADER);
    csv.push('\n');
    for p in &scan.points {
        let i = |k: usize| p.connected.get(k).copied().map(format_float).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            format_float(p.theta),
            format_float(p.energy),
            i(0),
            i(1),
            i(2),
            u8::from(p.singular)
        );
    }
    let factor = match report.improvement_factor {
        Some(f) => format!("{f:.3e}"),
        None => "infinite".to_string(),
    };
    let summary = format!(
        "method {method}, generator {generator}\ntheta_opt {:.9}\nenergy_opt {:.12}\nfci {:.12}\n\
         deviation at theta=0 {:.3e}\ndeviation at theta_opt {:.3e}\nimprovement factor {factor}\n",
        scan.theta_opt, scan.energy_opt, fci, report.dev_at_zero, report.dev_at_opt
    );
    Ok(VariationalOutput {
        scan,
        fci_reference: fci,
        csv,
        summary,
    })
}

/// Gnuplot script for a sweep or variational CSV.
pub fn emit_plot_script(csv_path: &Path) -> Result<String> {
    let text = std::fs::read_to_string(csv_path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("{} is empty", csv_path.display())))?
        .split(',')
        .collect();
    let data: Vec<&str> = lines.collect();
    if data.is_empty() {
        return Err(Error::Config(format!("{} has no data rows", csv_path.display())));
    }
    let col = |name: &str| header.iter().position(|h| *h == name).map(|i| i + 1);
    let require = |names: &[&str]| -> Result<Vec<usize>> {
        let missing: Vec<&str> = names.iter().copied().filter(|n| col(n).is_none()).collect();
        if missing.is_empty() {
            Ok(names.iter().map(|n| col(n).unwrap_or(0)).collect())
        } else {
            Err(Error::Config(format!(
                "{} lacks column(s) {}",
                csv_path.display(),
                missing.join(", ")
            )))
        }
    };
    let file = csv_path.display().to_string().replace('\'', "''");
    let mut out = String::from("set datafile separator ','\nset key outside right\nset grid\n");

    if header.first() == Some(&"theta") {
        let c = require(&["theta", "energy", "I1", "I2", "I3"])?;
        let _ = writeln!(out, "set xlabel 'theta (rad)'\nset ylabel 'energy'");
        let _ = writeln!(
            out,
            "plot '{file}' every ::1 using {}:{} with linespoints title 'energy', \\\n     '{file}' every ::1 using {}:{} with lines title 'I1'",
            c[0], c[1], c[0], c[2]
        );
        return Ok(out);
    }

    let c = require(&["sweep_value", "method", "order", "energy", "fci_reference"])?;
    let mut series: Vec<(String, String)> = Vec::new();
    for line in &data {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(Error::Config(format!(
                "row '{line}' has {} fields, expected {}",
                f.len(),
                header.len()
            )));
        }
        let key = (f[c[1] - 1].to_string(), f[c[2] - 1].to_string());
        if !series.contains(&key) {
            series.push(key);
        }
    }
    let _ = writeln!(out, "set xlabel 'sweep value'\nset ylabel 'energy'");
    let mut plots = Vec::new();
    for (method, order) in &series {
        plots.push(format!(
            "'{file}' every ::1 using {}:((strcol({}) eq '{method}' && strcol({}) eq '{order}') ? ${} : NaN) with linespoints title '{method}({order})'",
            c[0], c[1], c[2], c[3]
        ));
    }
    plots.push(format!(
        "'{file}' every ::1 using {}:{} with lines lw 2 title 'FCI'",
        c[0], c[4]
    ));
    let _ = writeln!(out, "plot {}", plots.join(", \\\n     "));
    Ok(out)
}
