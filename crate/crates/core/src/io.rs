//! Measure files and JSON views of reports.
//!
//! A measure is stored as a small JSON document: base, depth, backend, and
//! one weight string per cell. Rational weights are written exactly
//! (`"11/24"`); float weights use 17 significant digits so the bits
//! round-trip. The same convention carries into the report builders below:
//! backend-typed quantities appear as exact strings, while quantities that
//! are floating-point by nature (defects, bounds, deviations) appear as
//! JSON numbers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{ImbalanceProfile, PartitionReport, SineBoundReport, TransferStats};
use crate::error::{Error, Result};
use crate::harmonic::{FourierCoefficient, QTransferReport, RigidityReport, WeylL2Report};
use crate::measure::{BalanceProfile, CylinderMeasure, IntegralPhi, InvarianceReport, PhiBoundReport};
use crate::orders::OrderProfile;
use crate::scalar::{Backend, Rational, Scalar};
use crate::symbolic::Word;

/// On-disk form of a cylinder measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureFile {
    pub p: u32,
    pub depth: u32,
    pub backend: Backend,
    pub weights: Vec<String>,
}

/// A measure of either backend, as loaded from a file.
#[derive(Debug, Clone)]
pub enum AnyMeasure {
    Rational(CylinderMeasure<Rational>),
    Float(CylinderMeasure<f64>),
}

impl AnyMeasure {
    pub fn p(&self) -> u32 {
        match self {
            AnyMeasure::Rational(m) => m.p(),
            AnyMeasure::Float(m) => m.p(),
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            AnyMeasure::Rational(m) => m.depth(),
            AnyMeasure::Float(m) => m.depth(),
        }
    }

    pub fn backend(&self) -> Backend {
        match self {
            AnyMeasure::Rational(_) => Backend::Rational,
            AnyMeasure::Float(_) => Backend::Float,
        }
    }

    /// A float copy regardless of the stored backend.
    pub fn to_float(&self) -> CylinderMeasure<f64> {
        match self {
            AnyMeasure::Rational(m) => m.to_float(),
            AnyMeasure::Float(m) => m.clone(),
        }
    }
}

fn file_form<S: Scalar>(mu: &CylinderMeasure<S>) -> MeasureFile {
    MeasureFile {
        p: mu.p(),
        depth: mu.depth(),
        backend: mu.backend(),
        weights: mu.weights().iter().map(Scalar::format_weight).collect(),
    }
}

pub fn measure_to_string<S: Scalar>(mu: &CylinderMeasure<S>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&file_form(mu))?)
}

pub fn measure_to_file<S: Scalar>(mu: &CylinderMeasure<S>, path: &Path) -> Result<()> {
    let mut text = measure_to_string(mu)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn measure_from_str(text: &str) -> Result<AnyMeasure> {
    let file: MeasureFile = serde_json::from_str(text)?;
    build_measure(file)
}

pub fn measure_from_file(path: &Path) -> Result<AnyMeasure> {
    let text = fs::read_to_string(path)?;
    measure_from_str(&text).map_err(|e| match e {
        Error::Json(inner) => Error::MeasureFile(format!("{}: {inner}", path.display())),
        other => other,
    })
}

fn build_measure(file: MeasureFile) -> Result<AnyMeasure> {
    match file.backend {
        Backend::Rational => {
            let weights = file
                .weights
                .iter()
                .map(|s| Rational::parse_weight(s))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyMeasure::Rational(CylinderMeasure::new(file.p, file.depth, weights)?))
        }
        Backend::Float => {
            let weights = file
                .weights
                .iter()
                .map(|s| f64::parse_weight(s))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyMeasure::Float(CylinderMeasure::new(file.p, file.depth, weights)?))
        }
    }
}

fn word_value(w: &Word) -> Value {
    json!(w.to_string())
}

fn opt_word(w: &Option<Word>) -> Value {
    w.as_ref().map(word_value).unwrap_or(Value::Null)
}

fn family_list(items: &[(Word, u32)]) -> Value {
    Value::Array(
        items
            .iter()
            .map(|(w, digit)| json!({ "word": w.to_string(), "digit": digit }))
            .collect(),
    )
}

pub fn measure_summary_json(mu: &AnyMeasure) -> Value {
    let (cells, defect) = match mu {
        AnyMeasure::Rational(m) => (m.cells(), m.invariance_defect()),
        AnyMeasure::Float(m) => (m.cells(), m.invariance_defect()),
    };
    json!({
        "p": mu.p(),
        "depth": mu.depth(),
        "backend": mu.backend().to_string(),
        "cells": cells,
        "invariance_defect": defect,
    })
}

pub fn invariance_json<S: Scalar>(report: &InvarianceReport<S>) -> Value {
    json!({
        "max_defect": report.max_defect.format_weight(),
        "max_defect_float": report.max_defect.to_f64(),
        "witness": opt_word(&report.witness),
        "levels_checked": report.levels_checked,
    })
}

pub fn balance_json<S: Scalar>(profile: &BalanceProfile<S>) -> Value {
    let per_depth: Vec<Value> = profile
        .per_depth
        .iter()
        .map(|d| {
            json!({
                "depth": d.depth,
                "min_ratio": d.min_ratio.as_ref().map(Scalar::format_weight),
            })
        })
        .collect();
    json!({
        "c0": profile.c0.format_weight(),
        "c0_float": profile.c0.to_f64(),
        "witness": profile.witness.as_ref().map(|(w, digit)| {
            json!({ "word": w.to_string(), "digit": digit })
        }),
        "per_depth": per_depth,
        "degenerate": family_list(&profile.degenerate),
        "unbounded": family_list(&profile.unbounded),
        "max_depth": profile.max_depth,
    })
}

pub fn phi_bound_json<S: Scalar>(report: &PhiBoundReport<S>) -> Value {
    json!({
        "n": report.n,
        "max_depth": report.max_depth,
        "c0": report.c0.format_weight(),
        "bound": report.bound.format_weight(),
        "bound_float": report.bound.to_f64(),
        "max_phi": report.max_phi.format_weight(),
        "max_phi_float": report.max_phi.to_f64(),
        "witness": opt_word(&report.witness),
        "violations": report.violations,
        "degenerate_count": report.degenerate_count,
    })
}

pub fn integral_phi_json<S: Scalar>(report: &IntegralPhi<S>) -> Value {
    json!({
        "n": report.n,
        "partition_depth": report.partition_depth,
        "value": report.value.format_weight(),
        "value_float": report.value.to_f64(),
        "degenerate_count": report.degenerate_count,
    })
}

pub fn order_profile_json(profile: &OrderProfile) -> Value {
    json!({
        "a": profile.a,
        "p": profile.p,
        "q": profile.q,
        "r": profile.r,
        "n0": profile.n0,
        "c1": profile.c1.format_weight(),
        "table": profile.table.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "certificate": {
            "v": profile.certificate.v,
            "unit_mod_p2": profile.certificate.unit_mod_p2.to_string(),
        },
    })
}

pub fn fourier_json(coeff: &FourierCoefficient) -> Value {
    json!({
        "frequency": coeff.frequency.to_string(),
        "re": coeff.value.re,
        "im": coeff.value.im,
        "modulus": coeff.value.norm(),
        "depth": coeff.depth,
        "error_bound": coeff.error_bound,
    })
}

pub fn weyl_l2_json(report: &WeylL2Report) -> Value {
    json!({
        "p": report.p,
        "n": report.n,
        "m": report.m,
        "q": report.q,
        "t_n": report.t_n,
        "value": report.value,
        "expected": report.expected,
        "deviation": report.deviation,
        "max_offdiag": report.max_offdiag,
        "depth": report.depth,
    })
}

pub fn q_transfer_json(report: &QTransferReport) -> Value {
    json!({
        "m": report.m,
        "q": report.q,
        "terms": report.terms,
        "average": { "re": report.average.re, "im": report.average.im },
        "single": { "re": report.single.re, "im": report.single.im },
        "defect": report.defect,
    })
}

pub fn rigidity_json(report: &RigidityReport) -> Value {
    json!({
        "p": report.p,
        "m": report.m,
        "q": report.q,
        "n": report.n,
        "depth": report.depth,
        "n0": report.n0,
        "t_n": report.t_n,
        "scaling_exact": report.scaling_exact,
        "c0": report.c0,
        "c1": report.c1.format_weight(),
        "lhs": report.lhs,
        "integral_phi": report.integral_phi,
        "weyl_l2": report.weyl_l2,
        "weyl_deviation": report.weyl_deviation,
        "cs_slack": report.cs_slack,
        "phi_bound": report.phi_bound,
        "phi_slack": report.phi_slack,
        "final_bound": report.final_bound,
        "final_slack": report.final_slack,
    })
}

pub fn transfer_json(stats: &TransferStats) -> Value {
    json!({
        "p": stats.p,
        "epsilon": stats.epsilon,
        "grid": stats.grid,
        "iterations": stats.iterations,
        "residual": stats.residual,
        "mass_defect": stats.mass_defect,
        "density_min": stats.density_min,
        "density_max": stats.density_max,
    })
}

pub fn partition_json(report: &PartitionReport) -> Value {
    json!({
        "samples": report.samples,
        "max_deviation": report.max_deviation,
    })
}

pub fn sine_bound_json(report: &SineBoundReport) -> Value {
    json!({
        "p": report.p,
        "delta": report.delta,
        "depth": report.depth,
        "a": report.constants.a,
        "big_a": report.constants.big_a,
        "floor": report.constants.floor,
        "invariance_defect": report.invariance_defect,
        "c0": report.c0,
        "pass": report.pass,
    })
}

pub fn imbalance_json(profile: &ImbalanceProfile) -> Value {
    json!({
        "alpha": profile.alpha,
        "rows": profile.rows.iter().map(|r| {
            json!({ "n": r.n, "endpoint": r.endpoint, "ratio": r.ratio })
        }).collect::<Vec<_>>(),
    })
}
