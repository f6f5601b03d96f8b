//! Command-line front end.

mod config;
mod run;

pub use config::{parse_values, FileConfig, ModelSpec, RunConfig, SweepPoint, SweepVariable, TrialSpec};
pub use run::{
    emit_plot_script, run_sweep, run_variational, trial_moments, with_threads, SweepOutput, SweepRow,
    VariationalOutput, SWEEP_HEADER, VARIATIONAL_HEADER,
};

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cmx::{cmx_cioslowski, cmx_knowles, singularity_report, suggest_method, CmxMethod};
use crate::error::{Error, Result};
use crate::noise::noisy_moments;
use crate::pauli::format_float;
use crate::pds::solve_pds;
use crate::statevector::exact_diagonalize;

#[derive(Debug, Parser)]
#[command(
    name = "qcmx",
    version,
    about = "Connected-moments and PDS energy estimation for qubit Hamiltonians"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Raw and connected moments of the trial state.
    Moments {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 7)]
        max_order: usize,
    },
    /// Connected-moments expansion energy.
    Cmx {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "cioslowski", value_parser = ["cioslowski", "knowles"])]
        variant: String,
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Print which expansion avoids flagged denominators.
        #[arg(long)]
        suggest: bool,
    },
    /// PDS polynomial, roots and bounds.
    Pds {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// CSV of method energies over a parameter sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Energy landscape over a trial rotation angle.
    Variational {
        #[command(flatten)]
        common: Common,
        /// Also write a gnuplot script next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Sampled moments next to exact ones.
    Noise {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        max_order: usize,
    },
    /// Exact spectrum and trial-state fidelity.
    Diag {
        #[command(flatten)]
        common: Common,
    },
    /// Gnuplot script for a CSV written by `sweep` or `variational`.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, Args, Default)]
pub struct Common {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// siam, h2 or pauli.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Six comma-separated H2 coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub g: Option<Vec<f64>>,
    /// H2 potential-energy-surface CSV.
    #[arg(long)]
    pub pes: Option<PathBuf>,
    /// Pauli-sum text file.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Computational basis trial state, qubit 0 first.
    #[arg(long)]
    pub trial: Option<String>,
    /// Rotation generator, dense (YXXX) or sparse (Y0X1X2X3).
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Methods such as pds:2, cmx-cioslowski:3, cmx-knowles:2, mean, hw-series:4:0.5.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// v or u for SIAM, r for H2 PES files.
    #[arg(long)]
    pub sweep_var: Option<String>,
    /// Comma list or start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Sample expectations with the noise model.
    #[arg(long)]
    pub noise: bool,
    #[arg(long)]
    pub p00: Option<f64>,
    #[arg(long)]
    pub p11: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub no_mitigation: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QCMX_THREADS")]
    pub threads: Option<usize>,
    /// Number of θ grid points.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl Common {
    fn as_file_config(&self) -> FileConfig {
        let flag = |b: bool| b.then_some(true);
        FileConfig {
            model: self.model.clone(),
            u: self.u,
            v: self.v,
            mu: self.mu,
            eps0: self.eps0,
            eps1: self.eps1,
            g: self.g.clone(),
            pes: self.pes.clone(),
            hamiltonian: self.hamiltonian.clone(),
            trial: self.trial.clone(),
            generator: self.generator.clone(),
            theta: self.theta,
            methods: self.methods.clone(),
            sweep_var: self.sweep_var.clone(),
            values: self.values.clone(),
            noise: flag(self.noise),
            p00: self.p00,
            p11: self.p11,
            p1: self.p1,
            p2: self.p2,
            shots: self.shots,
            seed: self.seed,
            no_mitigation: flag(self.no_mitigation),
            output: self.output.clone(),
            threads: self.threads,
            grid: self.grid,
        }
    }

    /// File values first, flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        RunConfig::from_file_config(&base.merged(self.as_file_config()))
    }
}

fn deliver(text: &str, output: Option<&PathBuf>) -> Result<String> {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

fn first_point(cfg: &RunConfig) -> Result<SweepPoint> {
    cfg.sweep_points()
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("sweep grid is empty".into()))
}

/// Executes a parsed command and returns what should go to stdout.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Moments { common, max_order } => {
            let cfg = common.resolve()?;
            let pt = first_point(&cfg)?;
            let table = trial_moments(&cfg, &pt.hamiltonian, &cfg.trial.state()?, *max_order)?;
            deliver(&table.to_csv(), cfg.output.as_ref())
        }
        Command::Cmx {
            common,
            variant,
            order,
            suggest,
        } => {
            let cfg = common.resolve()?;
            let pt = first_point(&cfg)?;
            let table = trial_moments(&cfg, &pt.hamiltonian, &cfg.trial.state()?, 2 * order - 1)?;
            let i = table.connected_slice();
            let r = if variant == "knowles" {
                cmx_knowles(i, *order)?
            } else {
                cmx_cioslowski(i, *order)?
            };
            let mut out = String::new();
            let _ = writeln!(
                out,
                "method {}\norder {}\nenergy {}",
                r.method,
                r.order,
                format_float(r.energy)
            );
            for (k, e) in r.per_order.iter().enumerate() {
                let _ = writeln!(out, "E({}) {}", k + 1, format_float(*e));
            }
            for d in &r.denominators {
                let _ = writeln!(
                    out,
                    "{} {} (scaled {})",
                    d.label,
                    format_float(d.value),
                    format_float(d.scaled)
                );
            }
            let _ = writeln!(out, "singular {}", r.singular_flag);
            if *suggest {
                let report = singularity_report(i, crate::cmx::DEFAULT_SINGULAR_TOL);
                for e in &report {
                    let _ = writeln!(
                        out,
                        "flagged {} order {} {} scaled {:e}",
                        e.method, e.order, e.label, e.scaled
                    );
                }
                let hint = suggest_method(&report, *order).map_or("none".to_string(), |m: CmxMethod| m.to_string());
                let _ = writeln!(out, "suggested {hint}");
            }
            deliver(&out, cfg.output.as_ref())
        }
        Command::Pds { common, order } => {
            let cfg = common.resolve()?;
            let pt = first_point(&cfg)?;
            let table = trial_moments(&cfg, &pt.hamiltonian, &cfg.trial.state()?, 2 * order - 1)?;
            let r = solve_pds(&table, *order)?;
            let mut out = String::new();
            let _ = writeln!(out, "order {} (effective {})", r.order, r.effective_order);
            let coeffs: Vec<String> = r.coefficients.iter().map(|c| format_float(*c)).collect();
            let _ = writeln!(out, "coefficients {}", coeffs.join(" "));
            let roots: Vec<String> = r.real_roots_sorted.iter().map(|c| format_float(*c)).collect();
            let _ = writeln!(out, "roots {}", roots.join(" "));
            for c in &r.discarded_roots {
                let _ = writeln!(out, "discarded {} {}i", format_float(c.re), format_float(c.im));
            }
            let _ = writeln!(
                out,
                "ground {}\ncondition {}\npseudo_inverse {}",
                format_float(r.ground_energy),
                format_float(r.condition_number),
                r.used_pseudo_inverse
            );
            deliver(&out, cfg.output.as_ref())
        }
        Command::Sweep { common } => {
            let cfg = common.resolve()?;
            let out = run_sweep(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    std::fs::write(path, &out.csv)?;
                    Ok(out.summary)
                }
                None => Ok(out.csv),
            }
        }
        Command::Variational { common, plot } => {
            let cfg = common.resolve()?;
            let out = run_variational(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    std::fs::write(path, &out.csv)?;
                    if *plot {
                        let script = emit_plot_script(path)?;
                        std::fs::write(path.with_extension("gp"), script)?;
                    }
                    Ok(out.summary)
                }
                None => Ok(format!("{}\n{}", out.csv, out.summary)),
            }
        }
        Command::Noise { common, max_order } => {
            let mut cfg = Common {
                noise: true,
                ..common.clone()
            }
            .resolve()?;
            let nm = cfg.noise.take().unwrap_or_default();
            let pt = first_point(&cfg)?;
            let state = cfg.trial.state()?;
            let exact = trial_moments(&cfg, &pt.hamiltonian, &state, *max_order)?;
            let noisy = noisy_moments(&pt.hamiltonian, &state, *max_order, &nm, cfg.trial.depth())?;
            let mut out = String::from("order,K_exact,K_noisy,I_exact,I_noisy\n");
            for n in 1..=*max_order {
                let _ = writeln!(
                    out,
                    "{n},{},{},{},{}",
                    format_float(exact.raw(n)),
                    format_float(noisy.table.raw(n)),
                    format_float(exact.connected(n)),
                    format_float(noisy.table.connected(n))
                );
            }
            for m in &cfg.methods {
                if m.moments_needed() <= *max_order {
                    let e = m.evaluate(&exact)?;
                    let n = m.evaluate(&noisy.table)?;
                    let se = noisy.propagated_error(&nm, |t| Ok(m.evaluate(t)?.energy))?;
                    let _ = writeln!(
                        out,
                        "# {m}: exact {} noisy {} +- {}",
                        format_float(e.energy),
                        format_float(n.energy),
                        format_float(se)
                    );
                }
            }
            deliver(&out, cfg.output.as_ref())
        }
        Command::Diag { common } => {
            let cfg = common.resolve()?;
            let pt = first_point(&cfg)?;
            let spec = exact_diagonalize(&pt.hamiltonian)?;
            let state = cfg.trial.state()?;
            let mut out = String::from("index,eigenvalue\n");
            for (k, e) in spec.eigenvalues.iter().enumerate() {
                let _ = writeln!(out, "{k},{}", format_float(*e));
            }
            let _ = writeln!(out, "# fidelity {}", format_float(state.fidelity(&spec.ground_vector)?));
            let _ = writeln!(out, "# max_residual {:e}", spec.max_residual);
            deliver(&out, cfg.output.as_ref())
        }
        Command::Plot { csv, output } => {
            let script = emit_plot_script(csv)?;
            deliver(&script, output.as_ref())
        }
    }
}
