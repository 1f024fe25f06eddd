//! Command-line front-end: `norm`, `sigma-plot` and `spectrum` subcommands
//! over TOML system files.
//!
//! Exit codes: 0 on success, 1 on input or computation errors, 2 when every
//! correction candidate failed to converge (the prediction is still
//! printed).

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::level_matrices::build_level_matrices;
use crate::norm::{self, Accuracy, Method, NormOptions};
use crate::spectral::{
    build_discretized_operator, build_mesh, hamiltonian_operator, operator_eigenvalues,
    DEFAULT_IMAG_TOL,
};
use crate::sysfile;
use crate::system::{self, DelaySystem};

#[derive(Debug, Parser)]
#[command(
    name = "hinfdelay",
    version,
    about = "H-infinity norms of retarded time-delay systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the H-infinity norm of a system
    Norm {
        /// System file (TOML)
        file: PathBuf,
        /// Mesh order N (2N+1 collocation points)
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
        /// Prediction tolerance
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Prediction strategy: bisection or levelset
        #[arg(long, value_parser = parse_method, default_value = "levelset")]
        method: Method,
        /// Candidate peak frequency seeding the level-set lower bound
        #[arg(long = "omega-hint")]
        omega_hint: Option<f64>,
        /// Emit machine-readable JSON instead of the report
        #[arg(long)]
        json: bool,
    },
    /// Sweep singular values over frequency and write them as CSV
    SigmaPlot {
        /// System file (TOML)
        file: PathBuf,
        /// Upper end of the sweep [default: scaled to coefficient norms]
        #[arg(long = "omega-max")]
        omega_max: Option<f64>,
        /// Number of uniformly spaced sweep points (>= 2)
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// "exact" for the true transfer function, or a mesh order N for
        /// the rational approximant
        #[arg(long, default_value = "exact")]
        approx: String,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// List the level-operator eigenvalues at a fixed level
    Spectrum {
        /// System file (TOML)
        file: PathBuf,
        /// Level xi (must exceed sigma_1(D))
        #[arg(long)]
        xi: f64,
        /// Mesh order N (2N+1 collocation points)
        #[arg(long = "N", default_value_t = 8)]
        n: usize,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "bisection" => Ok(Method::Bisection),
        "levelset" => Ok(Method::LevelSet),
        other => Err(format!(
            "unknown method '{other}' (expected bisection or levelset)"
        )),
    }
}

/// Dispatches a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Norm {
            file,
            n,
            tol,
            method,
            omega_hint,
            json,
        } => cmd_norm(&file, n, tol, method, omega_hint, json),
        Command::SigmaPlot {
            file,
            omega_max,
            points,
            approx,
            out,
        } => cmd_sigma_plot(&file, omega_max, points, &approx, &out),
        Command::Spectrum { file, xi, n } => cmd_spectrum(&file, xi, n),
    }
}

fn load_or_report(file: &Path) -> Option<DelaySystem> {
    match sysfile::load_system(file) {
        Ok(sys) => Some(sys),
        Err(err) => {
            eprintln!("error: {err}");
            None
        }
    }
}

fn cmd_norm(
    file: &Path,
    n: usize,
    tol: f64,
    method: Method,
    omega_hint: Option<f64>,
    json: bool,
) -> i32 {
    let Some(sys) = load_or_report(file) else {
        return 1;
    };
    let opts = NormOptions {
        n,
        tol,
        method,
        omega_hint,
        ..Default::default()
    };
    let result = match norm::hinf_norm(&sys, &opts) {
        Ok(result) => result,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };

    if json {
        let doc = json!({
            "norm": result.norm,
            "omega": result.omega_peak,
            "method": method.as_str(),
            "N": result.n_used,
            "accuracy": result.accuracy.as_str(),
            "prediction": {
                "xi_pred": result.prediction.xi_pred,
                "xi_lower": result.prediction.xi_lower,
                "iterations": result.prediction.iterations,
                "omegas": result.prediction.omegas,
            },
            "candidates": result.candidates.iter().map(|c| json!({
                "omega": c.omega,
                "xi": c.xi,
                "residual": c.residual_norm,
                "iterations": c.iterations,
                "converged": c.converged,
            })).collect::<Vec<_>>(),
        });
        println!("{doc}");
    } else {
        println!("norm = {:.12}", result.norm);
        match result.omega_peak {
            Some(omega) => println!("omega = {:.12}", omega),
            None => println!("omega = none (supremum approached as omega -> infinity)"),
        }
        println!("method = {}", method.as_str());
        if result.n_used > 0 {
            println!("N = {}", result.n_used);
        } else {
            println!("N = 0 (delay-free: Hamiltonian level test)");
        }
        println!("accuracy = {}", result.accuracy.as_str());
        println!(
            "prediction: xi = {:.12}, iterations = {}, crossings = {}",
            result.prediction.xi_pred,
            result.prediction.iterations,
            result.prediction.omegas.len()
        );
        if result.accuracy == Accuracy::LowerBound {
            println!(
                "note: no singular-value crossings above the lower bound; the reported \
                 value is the exact static/zero-frequency gain"
            );
        }
        if result.candidates.is_empty() {
            println!("candidates: none");
        } else {
            println!("candidates:");
            println!(
                "  {:>3}  {:>18}  {:>18}  {:>9}  {:>5}  conv",
                "#", "omega", "xi", "residual", "it"
            );
            for (i, c) in result.candidates.iter().enumerate() {
                println!(
                    "  {:>3}  {:>18.12}  {:>18.12}  {:>9.2e}  {:>5}  {}",
                    i + 1,
                    c.omega,
                    c.xi,
                    c.residual_norm,
                    c.iterations,
                    if c.converged { "yes" } else { "NO" }
                );
            }
        }
    }

    if result.accuracy == Accuracy::PredictionOnly {
        2
    } else {
        0
    }
}

fn cmd_sigma_plot(
    file: &Path,
    omega_max: Option<f64>,
    points: usize,
    approx: &str,
    out: &Path,
) -> i32 {
    let Some(sys) = load_or_report(file) else {
        return 1;
    };
    if points < 2 {
        eprintln!("error: points must be >= 2");
        return 1;
    }
    let omega_max = omega_max.unwrap_or_else(|| system::default_omega_max(&sys));
    if omega_max.is_nan() || omega_max <= 0.0 {
        eprintln!("error: omega-max must be > 0");
        return 1;
    }

    let mesh = match approx.trim() {
        "exact" => None,
        text => match text.parse::<usize>() {
            Ok(order) if order >= 1 && sys.delay_count() > 0 => {
                match build_mesh(order, sys.tau_max()) {
                    Ok(mesh) => Some(mesh),
                    Err(err) => {
                        eprintln!("error: {err}");
                        return 1;
                    }
                }
            }
            // a delay-free approximant is the exact transfer function
            Ok(order) if order >= 1 => None,
            _ => {
                eprintln!("error: --approx must be 'exact' or a positive mesh order");
                return 1;
            }
        },
    };

    let k = sys.n_inputs().min(sys.n_outputs());
    let mut csv = String::from("omega");
    for i in 1..=k {
        csv.push_str(&format!(",sigma_{i}"));
    }
    csv.push('\n');
    for idx in 0..points {
        let omega = omega_max * idx as f64 / (points - 1) as f64;
        let response = match &mesh {
            Some(mesh) => crate::collocation::eval_gn(&sys, mesh, omega),
            None => sys.eval_transfer(omega),
        };
        let response = match response {
            Ok(r) => r,
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        };
        csv.push_str(&format!("{omega}"));
        for i in 0..k {
            csv.push_str(&format!(",{}", response.singular_values[i]));
        }
        csv.push('\n');
    }

    if let Err(err) = std::fs::write(out, csv) {
        eprintln!("error: {err}");
        return 1;
    }
    0
}

fn cmd_spectrum(file: &Path, xi: f64, n: usize) -> i32 {
    let Some(sys) = load_or_report(file) else {
        return 1;
    };
    let lm = match build_level_matrices(&sys, xi) {
        Ok(lm) => lm,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    let op = if sys.delay_count() == 0 {
        hamiltonian_operator(&lm)
    } else {
        let mesh = match build_mesh(n, sys.tau_max()) {
            Ok(mesh) => mesh,
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        };
        match build_discretized_operator(&lm, &mesh) {
            Ok(op) => op,
            Err(err) => {
                eprintln!("error: {err}");
                return 1;
            }
        }
    };

    let mut eigs = match operator_eigenvalues(&op) {
        Ok(eigs) => eigs,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };
    eigs.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());

    println!(
        "eigenvalues of the level operator at xi = {xi} (dimension {}):",
        op.matrix().nrows()
    );
    let mut imaginary = 0usize;
    for lam in &eigs {
        let on_axis = lam.re.abs() <= DEFAULT_IMAG_TOL * lam.norm().max(1.0);
        if on_axis {
            imaginary += 1;
            println!(
                "  {:>18.12} {:+.12}i   [imaginary axis, omega = {:.12}]",
                lam.re,
                lam.im,
                lam.im.abs()
            );
        } else {
            println!("  {:>18.12} {:+.12}i", lam.re, lam.im);
        }
    }
    if imaginary == 0 {
        println!("no imaginary-axis eigenvalues");
    }
    0
}
