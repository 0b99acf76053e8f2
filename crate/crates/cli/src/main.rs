//! `balgeo` — command-line front end for the cylinder-measure toolkit.
//!
//! Every subcommand reads or builds a measure, runs one of the library's
//! checks, and emits a single JSON report (see [`output`]). Exit codes:
//!
//! * `0` — the requested report was produced and no checked property failed;
//! * `1` — the report was produced but a checked property failed (an
//!   invariance defect above tolerance, a broken ceiling, a negative slack),
//!   or a computation could not be completed (no convergence, an
//!   unfactorable modulus);
//! * `2` — the request itself was malformed: bad flags, bad parameter
//!   combinations, unreadable or ill-formed measure files.
//!
//! `--jobs` sizes the worker pool for the parallel inner sums; reports are
//! byte-identical regardless of its value.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use balgeo::dynamics::{
    conjugacy_cylinders, conjugate_to_lebesgue, imbalance_profile, make_parabolic_branches,
    make_sine_branches, partition_check, transfer_fixed_density, verify_sine_bound, ExpandingMap,
};
use balgeo::harmonic::{rigidity_chain, weyl_l2_nu, FourierEngine};
use balgeo::io::{
    balance_json, fourier_json, imbalance_json, integral_phi_json, invariance_json,
    measure_from_file, measure_summary_json, measure_to_file, order_profile_json, partition_json,
    phi_bound_json, rigidity_json, sine_bound_json, transfer_json, weyl_l2_json, AnyMeasure,
};
use balgeo::measure::{make_bernoulli, make_markov, make_uniform, markov_stationary};
use balgeo::orders::{orbit_enumerate, orbit_size, order_profile};
use balgeo::scalar::parse_rational;
use balgeo::{Error, Rational, Result, Scalar};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use output::{csv_float, emit, write_csv};

#[derive(Parser)]
#[command(
    name = "balgeo",
    version,
    about = "Balance, smoothing, and Weyl-average diagnostics for cylinder measures on the circle"
)]
struct Cli {
    /// Worker threads for the parallel sums (default: all cores).
    /// Report bytes do not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Mirror the JSON report to this file as well as stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Equal weight on every cylinder.
    Uniform,
    /// Product measure from a digit distribution (`--probs`).
    Bernoulli,
    /// Markov measure from transition rows (`--rows`), started from the
    /// exact stationary law.
    Markov,
    /// Coded length measure of the sine-perturbed affine branches
    /// (`--delta`). Float backend only.
    Sine,
    /// Coded length measure of the two-branch family with a neutral fixed
    /// point (`--alpha`). Float backend only.
    Parabolic,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// Exact big-rational weights.
    Rational,
    /// Double-precision weights with compensated summation.
    Float,
}

#[derive(Subcommand)]
enum Command {
    /// Orbit-size table T_n of {a·q^k mod p^n} with its stabilization
    /// certificate and scaling constant.
    Orders {
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
        /// Re-certify the table against literal orbit enumeration for every
        /// level whose modulus is small enough.
        #[arg(long)]
        certify: bool,
    },

    /// Size of one orbit {a·q^k mod p^n}, by order reduction and (when the
    /// modulus is small) by literal enumeration.
    Orbit {
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n: u32,
    },

    /// Build a cylinder measure and optionally write it to a measure file.
    Measure {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        /// Weight arithmetic (default: rational; coded kinds are float).
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Digit distribution for --kind bernoulli, e.g. "1/2,1/3,1/6".
        #[arg(long)]
        probs: Option<String>,
        /// Transition rows for --kind markov, e.g. "1/2,1/2;1/3,2/3".
        #[arg(long)]
        rows: Option<String>,
        /// Perturbation size for --kind sine.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Exponent for --kind parabolic.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Write the measure file here.
        #[arg(long)]
        write: Option<PathBuf>,
        /// Refuse to build more than this many cells.
        #[arg(long, default_value_t = 1 << 20)]
        max_cells: u64,
    },

    /// Invariance and balance reports for a measure file.
    Check {
        #[arg(long)]
        measure: PathBuf,
        /// Balance scan depth (default: the measure's own depth).
        #[arg(long)]
        max_depth: Option<u32>,
        /// Invariance tolerance (default: 0 for rational files, 1e-9 for
        /// float files).
        #[arg(long)]
        tol: Option<f64>,
    },

    /// Materialize the level-n translation-average smoothing of a measure.
    Nu {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        level: u32,
        /// Invariance tolerance override for float files.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the smoothed measure file here.
        #[arg(long)]
        write_measure: Option<PathBuf>,
    },

    /// Density-step ceiling sweep and the partition sum approximating the
    /// smoothing-density integral.
    Phi {
        #[arg(long)]
        measure: PathBuf,
        /// Smoothing level n.
        #[arg(long)]
        level: u32,
        /// Partition depth for the integral (default: the measure's depth).
        #[arg(long)]
        partition_depth: Option<u32>,
    },

    /// Fourier coefficients of a measure for frequencies 1..=m_max.
    Fourier {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 32)]
        m_max: u64,
        /// Write a CSV table (m, re, im, modulus, error_bound).
        #[arg(long)]
        csv: Option<PathBuf>,
    },

    /// Second moment of the orbit-averaged exponential against the level-n
    /// smoothing, compared to its exact target 1/T_n.
    Weyl {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        level: u32,
        /// Fail (exit 1) if |deviation| exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },

    /// Chained decay estimate over a range of smoothing levels, with one
    /// row per level; levels at or below the stabilization threshold are
    /// reported as skipped.
    Rigidity {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        n_from: u32,
        #[arg(long)]
        n_to: u32,
        /// Write a CSV table of the levels.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Negative-slack tolerance before a link counts as violated.
        #[arg(long, default_value_t = 1e-8)]
        slack_tol: f64,
    },

    /// Sibling-ratio decay table of the parabolic family along its spine.
    Imbalance {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 40)]
        n_max: u32,
        /// Write a CSV table (n, endpoint, ratio).
        #[arg(long)]
        csv: Option<PathBuf>,
    },

    /// Invariant density of x -> p·x + eps·sin(2πx)/(2π) by transfer-operator
    /// iteration, conjugated to branch maps and optionally coded.
    Transfer {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 16384)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: u32,
        /// Midpoint samples for the branch-derivative partition check.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Also code the conjugated system to this depth and report its
        /// invariance and balance.
        #[arg(long)]
        code_depth: Option<u32>,
        /// Write the coded measure file here (needs --code-depth).
        #[arg(long)]
        write_measure: Option<PathBuf>,
        #[arg(long, default_value_t = 1 << 20)]
        max_cells: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Usage-shaped failures exit 2; failed properties and incomplete
/// computations exit 1.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::BaseTooSmall(_)
        | Error::DigitOutOfRange { .. }
        | Error::DepthTooLarge { .. }
        | Error::EmptyWord
        | Error::ShiftEmptyWord
        | Error::WordParse { .. }
        | Error::PointOutOfRange(_)
        | Error::CellCountOverflow { .. }
        | Error::WeightLength { .. }
        | Error::NegativeWeight { .. }
        | Error::MassNotOne { .. }
        | Error::BelowResolution { .. }
        | Error::SmoothingTooDeep { .. }
        | Error::NotPositive { .. }
        | Error::NonStochastic(_)
        | Error::NotCoprime { .. }
        | Error::ParamOutOfRange { .. }
        | Error::BelowStabilization { .. }
        | Error::ExpansionTooLarge { .. }
        | Error::NotExpanding { .. }
        | Error::RationalParse(_)
        | Error::MeasureFile(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn usage(what: &'static str, got: String, requirement: &'static str) -> Error {
    Error::ParamOutOfRange { what, got, requirement }
}

/// Refuse cell counts beyond the command's cap before allocating anything.
fn guard_cells(p: u32, depth: u32, max_cells: u64) -> Result<()> {
    let mut cells: u64 = 1;
    for _ in 0..depth {
        cells = cells
            .checked_mul(p as u64)
            .filter(|&c| c <= max_cells)
            .ok_or_else(|| {
                usage(
                    "depth",
                    format!("{p}^{depth} cells"),
                    "cell count must stay within --max-cells",
                )
            })?;
    }
    Ok(())
}

/// Load a measure file, naming the file in any I/O error.
fn load_measure(path: &std::path::Path) -> Result<AnyMeasure> {
    measure_from_file(path).map_err(|e| match e {
        Error::Io(inner) => Error::MeasureFile(format!("{}: {inner}", path.display())),
        other => other,
    })
}

fn parse_rational_list(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(|t| parse_rational(t.trim())).collect()
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|t| f64::parse_weight(t.trim())).collect()
}

/// Identity of a loaded measure for the params echo: everything relevant,
/// no filesystem paths.
fn measure_params(any: &AnyMeasure) -> Value {
    json!({
        "p": any.p(),
        "depth": any.depth(),
        "backend": any.backend().to_string(),
    })
}

fn run(cli: Cli) -> Result<u8> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage("jobs", "0".into(), "at least one worker thread"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| usage("jobs", e.to_string(), "worker pool must initialize once"))?;
    }
    let out = cli.out.as_ref();

    match cli.command {
        Command::Orders { a, p, q, n_max, certify } => {
            let profile = order_profile(a, p, q, n_max)?;
            let mut report = order_profile_json(&profile);
            report["certificate_ok"] = json!(profile.verify_certificate());
            if certify {
                report["enumeration_certified_levels"] = json!(profile.certify_by_enumeration()?);
            }
            let params = json!({ "a": a, "p": p, "q": q, "n_max": n_max, "certify": certify });
            emit("orders", params, report, out)?;
            Ok(0)
        }

        Command::Orbit { a, p, q, n } => {
            let size = orbit_size(a, p, q, n)?;
            let (enumerated, agree) = match orbit_enumerate(a, p, q, n) {
                Ok(count) => (json!(count.to_string()), BigUint::from(count) == size),
                Err(_) => (Value::Null, true), // modulus too large to walk
            };
            let report = json!({
                "orbit_size": size.to_string(),
                "enumerated": enumerated,
                "agreement": agree,
            });
            emit("orbit", json!({ "a": a, "p": p, "q": q, "n": n }), report, out)?;
            Ok(if agree { 0 } else { 1 })
        }

        Command::Measure {
            kind,
            p,
            depth,
            backend,
            probs,
            rows,
            delta,
            alpha,
            write,
            max_cells,
        } => {
            guard_cells(p, depth, max_cells)?;
            if probs.is_some() && kind != KindArg::Bernoulli {
                return Err(usage("probs", "set".into(), "only --kind bernoulli takes --probs"));
            }
            if rows.is_some() && kind != KindArg::Markov {
                return Err(usage("rows", "set".into(), "only --kind markov takes --rows"));
            }
            let coded = matches!(kind, KindArg::Sine | KindArg::Parabolic);
            if coded && backend == Some(BackendArg::Rational) {
                return Err(usage(
                    "backend",
                    "rational".into(),
                    "coded measures are produced by float branch maps",
                ));
            }
            let backend = backend.unwrap_or(if coded {
                BackendArg::Float
            } else {
                BackendArg::Rational
            });

            let mut extras = serde_json::Map::new();
            let any = match kind {
                KindArg::Uniform => match backend {
                    BackendArg::Rational => AnyMeasure::Rational(make_uniform(p, depth)?),
                    BackendArg::Float => AnyMeasure::Float(make_uniform(p, depth)?),
                },
                KindArg::Bernoulli => {
                    let text = probs.ok_or_else(|| {
                        usage("probs", "missing".into(), "--kind bernoulli needs --probs")
                    })?;
                    match backend {
                        BackendArg::Rational => AnyMeasure::Rational(make_bernoulli(
                            p,
                            &parse_rational_list(&text)?,
                            depth,
                        )?),
                        BackendArg::Float => {
                            AnyMeasure::Float(make_bernoulli(p, &parse_float_list(&text)?, depth)?)
                        }
                    }
                }
                KindArg::Markov => {
                    let text = rows.ok_or_else(|| {
                        usage("rows", "missing".into(), "--kind markov needs --rows")
                    })?;
                    match backend {
                        BackendArg::Rational => {
                            let rows = text
                                .split(';')
                                .map(parse_rational_list)
                                .collect::<Result<Vec<_>>>()?;
                            let initial = markov_stationary(p, &rows)?;
                            extras.insert(
                                "stationary".into(),
                                json!(initial
                                    .iter()
                                    .map(Scalar::format_weight)
                                    .collect::<Vec<_>>()),
                            );
                            AnyMeasure::Rational(make_markov(p, &rows, &initial, depth)?)
                        }
                        BackendArg::Float => {
                            let rows = text
                                .split(';')
                                .map(parse_float_list)
                                .collect::<Result<Vec<_>>>()?;
                            let initial = markov_stationary(p, &rows)?;
                            extras.insert(
                                "stationary".into(),
                                json!(initial
                                    .iter()
                                    .map(Scalar::format_weight)
                                    .collect::<Vec<_>>()),
                            );
                            AnyMeasure::Float(make_markov(p, &rows, &initial, depth)?)
                        }
                    }
                }
                KindArg::Sine => {
                    let system = make_sine_branches(p, delta)?;
                    let mu = conjugacy_cylinders(&system, depth)?;
                    let bound = verify_sine_bound(p, delta, depth, 0.0)?;
                    extras.insert("sine_bound".into(), sine_bound_json(&bound));
                    AnyMeasure::Float(mu)
                }
                KindArg::Parabolic => {
                    if p != 2 {
                        return Err(usage(
                            "p",
                            p.to_string(),
                            "the parabolic family has exactly two branches",
                        ));
                    }
                    let system = make_parabolic_branches(alpha)?;
                    AnyMeasure::Float(conjugacy_cylinders(&system, depth)?)
                }
            };

            if let Some(path) = &write {
                match &any {
                    AnyMeasure::Rational(m) => measure_to_file(m, path)?,
                    AnyMeasure::Float(m) => measure_to_file(m, path)?,
                }
            }
            let pass = extras
                .get("sine_bound")
                .map_or(true, |b| b["pass"] == json!(true));
            let mut report = json!({ "summary": measure_summary_json(&any) });
            for (k, v) in extras {
                report[k] = v;
            }
            let mut params = json!({
                "kind": kind.label(),
                "p": p,
                "depth": depth,
                "backend": any.backend().to_string(),
            });
            if kind == KindArg::Sine {
                params["delta"] = json!(delta);
            }
            if kind == KindArg::Parabolic {
                params["alpha"] = json!(alpha);
            }
            emit("measure", params, report, out)?;
            Ok(if pass { 0 } else { 1 })
        }

        Command::Check { measure, max_depth, tol } => {
            let any = load_measure(&measure)?;
            let scan_depth = max_depth.unwrap_or_else(|| any.depth()).min(any.depth());
            let tol = tol.unwrap_or(match any {
                AnyMeasure::Rational(_) => 0.0,
                AnyMeasure::Float(_) => 1e-9,
            });
            let (inv_json, bal_json, defect, c0) = match &any {
                AnyMeasure::Rational(m) => {
                    let inv = m.check_p_invariance();
                    let bal = m.balance_profile(scan_depth)?;
                    (
                        invariance_json(&inv),
                        balance_json(&bal),
                        m.invariance_defect(),
                        Scalar::to_f64(&bal.c0),
                    )
                }
                AnyMeasure::Float(m) => {
                    let inv = m.check_p_invariance();
                    let bal = m.balance_profile(scan_depth)?;
                    (invariance_json(&inv), balance_json(&bal), m.invariance_defect(), bal.c0)
                }
            };
            let invariant = defect <= tol;
            let balanced = c0 > 0.0;
            let report = json!({
                "summary": measure_summary_json(&any),
                "invariance": inv_json,
                "balance": bal_json,
                "invariant": invariant,
                "balanced": balanced,
            });
            let mut params = measure_params(&any);
            params["max_depth"] = json!(scan_depth);
            params["tol"] = json!(tol);
            emit("check", params, report, out)?;
            Ok(if invariant && balanced { 0 } else { 1 })
        }

        Command::Nu { measure, level, tol, write_measure } => {
            let any = load_measure(&measure)?;
            let smoothed = match &any {
                AnyMeasure::Rational(m) => {
                    let view = match tol {
                        Some(t) => m.smooth_nu_with_tol(level, t)?,
                        None => m.smooth_nu(level)?,
                    };
                    AnyMeasure::Rational(view.materialize())
                }
                AnyMeasure::Float(m) => {
                    let view = match tol {
                        Some(t) => m.smooth_nu_with_tol(level, t)?,
                        None => m.smooth_nu(level)?,
                    };
                    AnyMeasure::Float(view.materialize())
                }
            };
            if let Some(path) = &write_measure {
                match &smoothed {
                    AnyMeasure::Rational(m) => measure_to_file(m, path)?,
                    AnyMeasure::Float(m) => measure_to_file(m, path)?,
                }
            }
            let report = json!({
                "level": level,
                "base": measure_summary_json(&any),
                "smoothed": measure_summary_json(&smoothed),
            });
            let mut params = measure_params(&any);
            params["level"] = json!(level);
            emit("nu", params, report, out)?;
            Ok(0)
        }

        Command::Phi { measure, level, partition_depth } => {
            let any = load_measure(&measure)?;
            let k = partition_depth.unwrap_or_else(|| any.depth());
            let (bound_json, int_json, violations) = match &any {
                AnyMeasure::Rational(m) => {
                    let bound = m.phi_bound_check(level, m.depth())?;
                    let integral = m.integral_phi(level, k)?;
                    (phi_bound_json(&bound), integral_phi_json(&integral), bound.violations)
                }
                AnyMeasure::Float(m) => {
                    let bound = m.phi_bound_check(level, m.depth())?;
                    let integral = m.integral_phi(level, k)?;
                    (phi_bound_json(&bound), integral_phi_json(&integral), bound.violations)
                }
            };
            let report = json!({
                "phi_bound": bound_json,
                "integral_phi": int_json,
            });
            let mut params = measure_params(&any);
            params["level"] = json!(level);
            params["partition_depth"] = json!(k);
            emit("phi", params, report, out)?;
            Ok(if violations == 0 { 0 } else { 1 })
        }

        Command::Fourier { measure, m_max, csv } => {
            if m_max == 0 {
                return Err(usage("m_max", "0".into(), "at least one frequency"));
            }
            let any = load_measure(&measure)?;
            let engine = match &any {
                AnyMeasure::Rational(m) => FourierEngine::new(m),
                AnyMeasure::Float(m) => FourierEngine::new(m),
            };
            let mut coeffs = Vec::with_capacity(m_max as usize);
            let mut csv_rows = Vec::with_capacity(m_max as usize);
            let mut max_modulus = 0.0f64;
            for m in 1..=m_max {
                let c = engine.coefficient(&BigUint::from(m))?;
                max_modulus = max_modulus.max(c.value.norm());
                csv_rows.push(format!(
                    "{m},{},{},{},{}",
                    csv_float(c.value.re),
                    csv_float(c.value.im),
                    csv_float(c.value.norm()),
                    csv_float(c.error_bound),
                ));
                coeffs.push(fourier_json(&c));
            }
            if let Some(path) = &csv {
                write_csv(path, "m,re,im,modulus,error_bound", &csv_rows)?;
            }
            let report = json!({
                "coefficients": coeffs,
                "max_modulus": max_modulus,
            });
            let mut params = measure_params(&any);
            params["m_max"] = json!(m_max);
            emit("fourier", params, report, out)?;
            Ok(0)
        }

        Command::Weyl { measure, m, q, level, tol } => {
            let any = load_measure(&measure)?;
            let rep = match &any {
                AnyMeasure::Rational(mu) => weyl_l2_nu(mu, level, m, q)?,
                AnyMeasure::Float(mu) => weyl_l2_nu(mu, level, m, q)?,
            };
            let ok = tol.map_or(true, |t| rep.deviation.abs() <= t);
            let mut params = measure_params(&any);
            params["m"] = json!(m);
            params["q"] = json!(q);
            params["level"] = json!(level);
            if let Some(t) = tol {
                params["tol"] = json!(t);
            }
            emit("weyl", params, weyl_l2_json(&rep), out)?;
            Ok(if ok { 0 } else { 1 })
        }

        Command::Rigidity { measure, m, q, n_from, n_to, csv, slack_tol } => {
            if n_to < n_from {
                return Err(usage("n_to", n_to.to_string(), "range must satisfy n_from <= n_to"));
            }
            let any = load_measure(&measure)?;
            let mut levels = Vec::new();
            let mut csv_rows = Vec::new();
            let mut violated = false;
            for n in n_from..=n_to {
                let result = match &any {
                    AnyMeasure::Rational(mu) => rigidity_chain(mu, m, q, n),
                    AnyMeasure::Float(mu) => rigidity_chain(mu, m, q, n),
                };
                match result {
                    Ok(rep) => {
                        violated |= rep.cs_slack < -slack_tol
                            || rep.phi_slack < -slack_tol
                            || rep.final_slack < -slack_tol;
                        csv_rows.push(format!(
                            "{n},ok,{},{},{},{},{}",
                            rep.t_n,
                            csv_float(rep.lhs),
                            csv_float(rep.cs_slack),
                            csv_float(rep.weyl_deviation),
                            csv_float(rep.final_bound),
                        ));
                        levels.push(rigidity_json(&rep));
                    }
                    Err(Error::BelowStabilization { n0, .. }) => {
                        csv_rows.push(format!("{n},skipped,,,,,"));
                        levels.push(json!({ "n": n, "skipped": true, "n0": n0 }));
                    }
                    Err(other) => return Err(other),
                }
            }
            if let Some(path) = &csv {
                write_csv(
                    path,
                    "n,status,t_n,lhs,cs_slack,weyl_deviation,final_bound",
                    &csv_rows,
                )?;
            }
            let report = json!({ "levels": levels, "violated": violated });
            let mut params = measure_params(&any);
            params["m"] = json!(m);
            params["q"] = json!(q);
            params["n_from"] = json!(n_from);
            params["n_to"] = json!(n_to);
            params["slack_tol"] = json!(slack_tol);
            emit("rigidity", params, report, out)?;
            Ok(if violated { 1 } else { 0 })
        }

        Command::Imbalance { alpha, n_max, csv } => {
            let profile = imbalance_profile(alpha, n_max)?;
            let decreasing = profile.rows.windows(2).all(|w| w[1].ratio < w[0].ratio);
            if let Some(path) = &csv {
                let rows: Vec<String> = profile
                    .rows
                    .iter()
                    .map(|r| format!("{},{},{}", r.n, csv_float(r.endpoint), csv_float(r.ratio)))
                    .collect();
                write_csv(path, "n,endpoint,ratio", &rows)?;
            }
            let mut report = imbalance_json(&profile);
            report["strictly_decreasing"] = json!(decreasing);
            emit("imbalance", json!({ "alpha": alpha, "n_max": n_max }), report, out)?;
            Ok(if decreasing { 0 } else { 1 })
        }

        Command::Transfer {
            p,
            epsilon,
            grid,
            tol,
            max_iters,
            samples,
            code_depth,
            write_measure,
            max_cells,
        } => {
            if write_measure.is_some() && code_depth.is_none() {
                return Err(usage(
                    "write_measure",
                    "set".into(),
                    "--write-measure needs --code-depth",
                ));
            }
            let map = ExpandingMap::new(p, epsilon)?;
            let (density, stats) = transfer_fixed_density(&map, grid, tol, max_iters)?;
            let system = conjugate_to_lebesgue(&map, &density)?;
            let partition = partition_check(&system, samples)?;
            let mut report = json!({
                "transfer": transfer_json(&stats),
                "partition": partition_json(&partition),
            });
            if let Some(depth) = code_depth {
                guard_cells(p, depth, max_cells)?;
                let mu = conjugacy_cylinders(&system, depth)?;
                let balance = mu.balance_profile(depth)?;
                let coded = AnyMeasure::Float(mu);
                if let Some(path) = &write_measure {
                    match &coded {
                        AnyMeasure::Float(m) => measure_to_file(m, path)?,
                        AnyMeasure::Rational(_) => unreachable!("coded measures are float"),
                    }
                }
                report["coded"] = json!({
                    "summary": measure_summary_json(&coded),
                    "balance": balance_json(&balance),
                });
            }
            let params = json!({
                "p": p,
                "epsilon": epsilon,
                "grid": grid,
                "tol": tol,
                "max_iters": max_iters,
                "samples": samples,
                "code_depth": code_depth,
            });
            emit("transfer", params, report, out)?;
            Ok(0)
        }
    }
}

impl KindArg {
    fn label(self) -> &'static str {
        match self {
            KindArg::Uniform => "uniform",
            KindArg::Bernoulli => "bernoulli",
            KindArg::Markov => "markov",
            KindArg::Sine => "sine",
            KindArg::Parabolic => "parabolic",
        }
    }
}
